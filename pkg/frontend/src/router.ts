// Hash router. One screen at a time; switching destroys the old screen so
// its timers stop.

import { ApiClient } from "./api.js";
import { clear, el } from "./dom.js";

export interface Screen {
  element: HTMLElement;
  /** Resolves once the initial data fetches have rendered. */
  ready?: Promise<unknown>;
  destroy?: () => void;
}

export interface AppContext {
  client: ApiClient;
  navigate: (route: string) => void;
}

export type ScreenFactory = (ctx: AppContext) => Screen;

export const LOGIN_ROUTE = "#/login";
export const DEFAULT_ROUTE = "#/jobs";

const NAV_LABELS: Record<string, string> = {
  "#/jobs": "Jobs",
  "#/map": "Ad map",
  "#/advertisers": "Advertisers",
};

export class Router {
  private readonly client: ApiClient;
  private readonly screens: Record<string, ScreenFactory>;
  private readonly root: HTMLElement;
  private readonly outlet: HTMLElement;
  private readonly nav: HTMLElement;
  private current: Screen | null = null;

  constructor(root: HTMLElement, client: ApiClient, screens: Record<string, ScreenFactory>) {
    this.root = root;
    this.client = client;
    this.screens = screens;
    this.nav = el("nav", { class: "topnav" });
    this.outlet = el("main", { class: "screen" });
    this.root.append(this.nav, this.outlet);
    window.addEventListener("hashchange", () => this.render());
  }

  navigate(route: string): void {
    if (window.location.hash === route) {
      this.render();
    } else {
      window.location.hash = route; // render follows via hashchange
    }
  }

  start(): void {
    if (!(window.location.hash in this.screens)) {
      window.location.hash = this.client.token === null ? LOGIN_ROUTE : DEFAULT_ROUTE;
    }
    this.render();
  }

  render(): void {
    let route = window.location.hash;
    if (!(route in this.screens)) route = LOGIN_ROUTE;
    if (this.client.token === null && route !== LOGIN_ROUTE) {
      window.location.hash = LOGIN_ROUTE;
      route = LOGIN_ROUTE;
    }

    this.current?.destroy?.();
    this.renderNav(route);
    const factory = this.screens[route];
    if (factory === undefined) return;
    this.current = factory({ client: this.client, navigate: (r) => this.navigate(r) });
    clear(this.outlet);
    this.outlet.append(this.current.element);
  }

  private renderNav(active: string): void {
    clear(this.nav);
    if (active === LOGIN_ROUTE) return;
    this.nav.append(el("span", { class: "brand" }, "adtracker"));
    for (const [route, label] of Object.entries(NAV_LABELS)) {
      if (!(route in this.screens)) continue;
      const link = el("a", { href: route, class: route === active ? "active" : "" }, label);
      this.nav.append(link);
    }
    const logout = el("button", { class: "logout", type: "button" }, "Log out");
    logout.addEventListener("click", () => {
      void this.client
        .json("POST", "/logout")
        .catch(() => undefined) // token may already be dead; log out anyway
        .then(() => {
          this.client.clearToken();
          this.navigate(LOGIN_ROUTE);
        });
    });
    this.nav.append(logout);
  }
}

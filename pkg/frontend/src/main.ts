// Boot: build the API client with the global 401 handler and start routing.

import { ApiClient } from "./api.js";
import { LOGIN_ROUTE, Router, type ScreenFactory } from "./router.js";
import { advertisersScreen } from "./screens/advertisers.js";
import { jobsScreen } from "./screens/jobs.js";
import { loginScreen } from "./screens/login.js";
import { mapScreen } from "./screens/map.js";

export function createApp(root: HTMLElement): Router {
  const client = new ApiClient(() => {
    // any 401 anywhere drops the session and lands on the login screen
    window.location.hash = LOGIN_ROUTE;
  });
  const screens: Record<string, ScreenFactory> = {
    [LOGIN_ROUTE]: loginScreen,
    "#/jobs": jobsScreen,
    "#/map": mapScreen,
    "#/advertisers": advertisersScreen,
  };
  return new Router(root, client, screens);
}

const rootElement = document.getElementById("app");
if (rootElement !== null) {
  createApp(rootElement).start();
}

// Login and signup. Accounts start PENDING; a manager has to approve them
// before the data screens work, so surface that instead of a raw 403.

import { ApiError } from "../api.js";
import { el } from "../dom.js";
import { DEFAULT_ROUTE, type AppContext, type Screen } from "../router.js";
import type { AccountInfo, LoginResponse } from "../types.js";

export function loginScreen(ctx: AppContext): Screen {
  const status = el("p", { class: "status", role: "status" });
  const email = el("input", { type: "email", name: "email", required: "", placeholder: "you@example.org" });
  const password = el("input", { type: "password", name: "password", required: "" });

  const loginButton = el("button", { type: "submit" }, "Log in");
  const signupButton = el("button", { type: "button", class: "secondary" }, "Sign up");

  const form = el(
    "form",
    { class: "login-form" },
    el("h1", {}, "adtracker"),
    el("label", {}, "Email", email),
    el("label", {}, "Password", password),
    el("div", { class: "row" }, loginButton, signupButton),
    status,
  );

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    status.textContent = "";
    void ctx.client
      .json<LoginResponse>("POST", "/login", { email: email.value, password: password.value })
      .then((body) => {
        ctx.client.setToken(body.token);
        ctx.navigate(DEFAULT_ROUTE);
      })
      .catch((err: unknown) => {
        status.textContent = err instanceof ApiError ? err.message : "login failed";
      });
  });

  signupButton.addEventListener("click", () => {
    status.textContent = "";
    void ctx.client
      .json<AccountInfo>("POST", "/signup", {
        email: email.value,
        password: password.value,
        identity_confirmed: true,
        developer_account: true,
      })
      .then((account) => {
        status.textContent = `account ${account.email} created; awaiting manager review`;
      })
      .catch((err: unknown) => {
        status.textContent = err instanceof ApiError ? err.message : "signup failed";
      });
  });

  return { element: form };
}

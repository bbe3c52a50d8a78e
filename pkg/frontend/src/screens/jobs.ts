// Job manager: registration form plus the job table with search, download,
// delete, and a 15 s poll-status refresh while the screen is visible.

import { ApiError, queryString } from "../api.js";
import { clear, el } from "../dom.js";
import type { AppContext, Screen } from "../router.js";
import type { Job, JobList, JobSpecPayload, Vocabulary } from "../types.js";

const REFRESH_MS = 15_000;

function pollStatus(job: Job): string {
  if (job.last_report === null) return "never polled";
  const r = job.last_report;
  const counts = `${r.pages_fetched} pages, +${r.upsert.inserted} / ~${r.upsert.updated}`;
  return r.errors.length === 0 ? counts : `${counts}, ${r.errors.length} errors`;
}

/** Registration form over the archive's query options, rendered from the
 * server's own vocabulary so it cannot submit a value the API would reject. */
function buildForm(
  vocab: Vocabulary,
  onSubmit: (payload: JobSpecPayload) => void,
): HTMLFormElement {
  const searchTerm = el("input", {
    type: "text",
    name: "search_term",
    placeholder: "e.g. climate",
  });

  const countries = el("select", { name: "reached_countries", multiple: "", size: "8" });
  for (const code of vocab.countries) {
    countries.append(el("option", { value: code }, code));
  }

  const statusBox = el("div", { class: "choices", "data-field": "active_status" });
  for (const status of vocab.active_status) {
    const radio = el("input", { type: "radio", name: "active_status", value: status });
    if (status === "ALL") radio.checked = true;
    statusBox.append(el("label", { class: "choice" }, radio, status));
  }

  const category = el("select", { name: "category" });
  for (const value of vocab.categories) {
    category.append(el("option", { value }, value));
  }

  const platformBox = el("div", { class: "choices", "data-field": "platforms" });
  for (const platform of vocab.platforms) {
    const box = el("input", { type: "checkbox", name: "platforms", value: platform });
    platformBox.append(el("label", { class: "choice" }, box, platform));
  }

  const visibilityBox = el("div", { class: "choices", "data-field": "visibility" });
  for (const value of vocab.visibility) {
    const radio = el("input", { type: "radio", name: "visibility", value });
    if (value === "PRIVATE") radio.checked = true;
    visibilityBox.append(el("label", { class: "choice" }, radio, value));
  }

  const field = (label: string, name: string, control: HTMLElement) =>
    el(
      "div",
      { class: "field", "data-field": name },
      el("label", {}, label),
      control,
      el("span", { class: "field-error" }),
    );

  const form = el(
    "form",
    { class: "job-form" },
    el("h2", {}, "Register a monitoring job"),
    field("Search term", "search_term", searchTerm),
    field("Countries", "reached_countries", countries),
    field("Status", "active_status", statusBox),
    field("Category", "category", category),
    field("Platforms", "platforms", platformBox),
    field("Visibility", "visibility", visibilityBox),
    el("button", { type: "submit" }, "Register"),
    el("p", { class: "status", role: "status" }),
  );

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const picked = (selector: string) =>
      Array.from(form.querySelectorAll<HTMLInputElement>(selector))
        .filter((input) => input.checked)
        .map((input) => input.value);
    onSubmit({
      search_term: searchTerm.value,
      reached_countries: Array.from(countries.selectedOptions).map((o) => o.value),
      active_status: picked('input[name="active_status"]')[0] ?? "",
      category: category.value,
      platforms: picked('input[name="platforms"]'),
      visibility: picked('input[name="visibility"]')[0] ?? "",
    });
  });
  return form;
}

function showViolations(form: HTMLFormElement, err: ApiError): void {
  for (const violation of err.violations) {
    const slot = form.querySelector(`[data-field="${violation.field}"] .field-error`);
    if (slot !== null) slot.textContent = violation.detail;
  }
  const status = form.querySelector(".status");
  if (status !== null) {
    status.textContent = err.violations.length === 0 ? err.message : "";
  }
}

export function jobsScreen(ctx: AppContext): Screen {
  const container = el("section", { class: "jobs" });
  const formSlot = el("div", {});
  const filter = el("input", {
    type: "search",
    class: "job-filter",
    placeholder: "filter jobs",
  });
  const tableBody = el("tbody", {});
  const table = el(
    "table",
    { class: "job-table" },
    el(
      "thead",
      {},
      el(
        "tr",
        {},
        el("th", {}, "Search term"),
        el("th", {}, "Countries"),
        el("th", {}, "Status"),
        el("th", {}, "Visibility"),
        el("th", {}, "Last poll"),
        el("th", {}, ""),
      ),
    ),
    tableBody,
  );
  container.append(formSlot, el("h2", {}, "Jobs"), filter, table);

  let jobs: Job[] = [];

  const renderRows = () => {
    const needle = filter.value.toLowerCase();
    clear(tableBody);
    for (const job of jobs) {
      if (needle !== "" && !job.spec.search_term.toLowerCase().includes(needle)) continue;
      const download = el("button", { type: "button", class: "download" }, "Download");
      download.addEventListener("click", () => {
        void ctx.client.blob(`/jobs/${job.job_id}/export.csv`).then((blob) => {
          const url = URL.createObjectURL(blob);
          const anchor = el("a", { href: url, download: `${job.job_id}.csv` });
          anchor.click();
          URL.revokeObjectURL(url);
        });
      });
      const remove = el("button", { type: "button", class: "delete" }, "Delete");
      remove.addEventListener("click", () => {
        if (!window.confirm(`Delete job "${job.spec.search_term}"?`)) return;
        void ctx.client.json("DELETE", `/jobs/${job.job_id}`).then(() => refresh());
      });
      tableBody.append(
        el(
          "tr",
          { "data-job-id": job.job_id },
          el("td", {}, job.spec.search_term),
          el("td", {}, job.spec.reached_countries.join(", ")),
          el("td", {}, el("span", { class: `badge ${job.spec.active_status}` }, job.spec.active_status)),
          el("td", {}, job.spec.visibility),
          el("td", { class: "poll-status" }, pollStatus(job)),
          el("td", {}, download, remove),
        ),
      );
    }
  };

  const refresh = (): Promise<void> =>
    ctx.client
      .json<JobList>("GET", `/jobs${queryString({ limit: "200" })}`)
      .then((body) => {
        jobs = body.jobs;
        renderRows();
      })
      .catch(() => undefined); // 401 already redirected; other errors keep stale rows

  filter.addEventListener("input", renderRows);

  const ready = ctx.client
    .json<Vocabulary>("GET", "/vocabulary")
    .then((vocab) => {
      const form = buildForm(vocab, (payload) => {
        for (const slot of form.querySelectorAll(".field-error")) slot.textContent = "";
        void ctx.client
          .json<Job>("POST", "/jobs", payload)
          .then(() => {
            const status = form.querySelector(".status");
            if (status !== null) status.textContent = "job registered";
            return refresh();
          })
          .catch((err: unknown) => {
            if (err instanceof ApiError) showViolations(form, err);
          });
      });
      formSlot.append(form);
      return refresh();
    })
    .catch(() => undefined);

  const timer = window.setInterval(() => {
    if (!document.hidden) void refresh();
  }, REFRESH_MS);

  return {
    element: container,
    ready,
    destroy: () => window.clearInterval(timer),
  };
}

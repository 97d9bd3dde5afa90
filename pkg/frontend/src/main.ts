/**
 * DOM wiring for the budget explorer. Edits mark the workspace dirty and
 * debounce into a re-submission; the rendered numbers always come from the
 * most recent service response.
 */

import { createClient } from "./api";
import { renderAllocation } from "./render";
import { METHODS, Workspace } from "./state";
import { debounce } from "./util";

const SUBMIT_DEBOUNCE_MS = 300;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  if (text) {
    node.textContent = text;
  }
  return node;
}

function start(): void {
  const root = document.getElementById("app");
  if (!root) {
    throw new Error("missing #app container");
  }
  const baseUrl =
    new URLSearchParams(window.location.search).get("service") ??
    "http://127.0.0.1:8080";
  const workspace = new Workspace(createClient(baseUrl));

  const editor = el("div", { class: "editor" });
  const output = el("div", { class: "output" });
  root.append(
    el("h1", {}, "Privacy budget explorer"),
    el("p", { class: "hint" }, `service: ${baseUrl}`),
    editor,
    output,
  );

  const submitSoon = debounce(() => {
    void workspace.submit().then(paint);
  }, SUBMIT_DEBOUNCE_MS);

  function onEdit(apply: () => void, structural = false): void {
    apply();
    if (structural) {
      paintEditor(); // row added/removed: rebuild the editor table
    }
    paint();
    submitSoon();
  }

  function paintEditor(): void {
    editor.replaceChildren();
    const table = el("table");
    const head = el("tr");
    for (const title of ["statistic", "weight", "delta", ""]) {
      head.append(el("th", {}, title));
    }
    table.append(head);
    workspace.state.statistics.forEach((stat, index) => {
      const row = el("tr");
      for (const field of ["name", "weight", "delta"] as const) {
        const cell = el("td");
        const input = el("input", { value: stat[field] });
        input.addEventListener("input", () =>
          onEdit(() => workspace.editStatistic(index, { [field]: input.value })),
        );
        cell.append(input);
        row.append(cell);
      }
      const remove = el("button", {}, "remove");
      remove.addEventListener("click", () =>
        onEdit(() => workspace.removeStatistic(index), true),
      );
      const cell = el("td");
      cell.append(remove);
      row.append(cell);
      table.append(row);
    });
    editor.append(table);

    const add = el("button", {}, "add statistic");
    add.addEventListener("click", () => onEdit(() => workspace.addStatistic(), true));
    editor.append(add);

    const controls = el("div", { class: "controls" });
    const epsInput = el("input", { value: workspace.state.global.epsilonG });
    epsInput.addEventListener("input", () =>
      onEdit(() => workspace.editGlobal({ epsilonG: epsInput.value })),
    );
    const deltaInput = el("input", { value: workspace.state.global.deltaG });
    deltaInput.addEventListener("input", () =>
      onEdit(() => workspace.editGlobal({ deltaG: deltaInput.value })),
    );
    const method = el("select");
    for (const name of METHODS) {
      const option = el("option", { value: name }, name);
      if (name === workspace.state.method) {
        option.setAttribute("selected", "selected");
      }
      method.append(option);
    }
    method.addEventListener("change", () =>
      onEdit(() => workspace.setMethod(method.value)),
    );
    const eta = el("input", { value: workspace.state.eta });
    eta.addEventListener("input", () => onEdit(() => workspace.setEta(eta.value)));
    controls.append(
      el("label", {}, "global epsilon"), epsInput,
      el("label", {}, "global delta"), deltaInput,
      el("label", {}, "method"), method,
      el("label", {}, "eta"), eta,
    );
    editor.append(controls);
  }

  function paint(): void {
    const view = renderAllocation(workspace.state);
    output.replaceChildren();
    if (view.inFlight) {
      output.append(el("p", { class: "busy" }, "computing..."));
    }
    if (view.banner) {
      const banner = el("div", { class: `banner ${view.banner.kind}` });
      banner.append(el("span", {}, view.banner.message));
      if (view.banner.thresholdText) {
        banner.append(
          el("span", { class: "threshold" }, ` minimum feasible delta_g: ${view.banner.thresholdText}`),
        );
      }
      const dismiss = el("button", {}, "dismiss");
      dismiss.addEventListener("click", () => {
        workspace.dismissBanner();
        paint();
      });
      banner.append(dismiss);
      output.append(banner);
    }
    if (view.realized) {
      output.append(
        el(
          "p",
          { class: "realized" },
          `realized guarantee: epsilon_g = ${view.realized.epsilonText}, ` +
            `delta_g = ${view.realized.deltaText} (${view.realized.method})`,
        ),
      );
    }
    if (view.rows.length) {
      const table = el("table", { class: "allocation" });
      const head = el("tr");
      for (const title of ["statistic", "epsilon", "delta"]) {
        head.append(el("th", {}, title));
      }
      table.append(head);
      for (const row of view.rows) {
        const tr = el("tr");
        tr.append(el("td", {}, row.name));
        tr.append(el("td", {}, row.epsilonText));
        tr.append(el("td", {}, row.deltaText));
        table.append(tr);
      }
      output.append(table);
    }
    if (view.comparison.length) {
      const strip = el("p", { class: "comparison" });
      strip.append(
        el("span", {}, "this allocation under other methods: "),
        ...view.comparison.map((entry) =>
          el("span", { class: "method" }, `${entry.method}: ${entry.epsilonText}  `),
        ),
      );
      output.append(strip);
    }
    if (view.dirty && !view.inFlight) {
      output.append(el("p", { class: "dirty" }, "edited - resubmitting shortly"));
    }
  }

  paintEditor();
  paint();
  submitSoon();
}

start();

// Zoom-out view: every simulation at once, as a scatter of absorbed
// energy vs. similarity plus a status grid. Pinning here builds the
// comparison set for the zoom-in view.

import { ApiClient } from "../api.js";
import { scatterPlot } from "../charts.js";
import { el, fmt } from "../dom.js";
import { pinSim, unpinSim, ViewState } from "../state.js";
import { Navigate } from "./benchmark.js";

export async function renderSimOverview(
  container: HTMLElement,
  api: ApiClient,
  state: ViewState,
  navigate: Navigate,
): Promise<void> {
  const payload = await api.sims({
    model: state.model || undefined,
    barrier: state.barrier || undefined,
    page: state.page,
    page_size: 100,
  });

  const filters = el("section", { class: "controls" },
    el("input", {
      id: "model-filter", placeholder: "model id (model:m1)", value: state.model,
      onchange: (event) => navigate({ model: (event.target as HTMLInputElement).value, page: 1 }),
    }),
    el("input", {
      id: "barrier-filter", placeholder: "barrier id (barr:odb-64)", value: state.barrier,
      onchange: (event) => navigate({ barrier: (event.target as HTMLInputElement).value, page: 1 }),
    }),
    state.model || state.barrier
      ? el("button", { id: "clear-filters", onclick: () => navigate({ model: "", barrier: "", page: 1 }) }, "Clear")
      : null,
  );
  container.append(filters);

  if (!payload.rows.length) {
    container.append(el("p", { class: "empty-state" }, "No simulations match the filter."));
    return;
  }

  const pinMessage = el("p", { class: "pin-message", id: "pin-message" });

  const scatter = scatterPlot(
    payload.rows.map((row) => ({
      id: row.id,
      label: row.run_id,
      x: row.total_ie,
      y: row.max_similarity ?? 0,
      highlighted: state.pinned.includes(row.id),
    })),
    "total absorbed energy [kJ]",
    "max similarity",
    (id) => navigate({ view: "sim-detail", sim: id }),
  );
  container.append(el("section", { class: "scatter-wrap" }, scatter));

  const header = el("tr", {},
    el("th", {}, "Pin"), el("th", {}, "Simulation"), el("th", {}, "Model"),
    el("th", {}, "Counterpart"), el("th", {}, "Protocol"),
    el("th", {}, "Σ energy"), el("th", {}, "Max similarity"), el("th", {}, "Clusters"),
  );
  const rows = payload.rows.map((row) => {
    const isPinned = state.pinned.includes(row.id);
    const pinButton = el("button", {
      class: isPinned ? "pin pinned" : "pin",
      "data-sim": row.id,
      onclick: () => {
        if (isPinned) {
          navigate({ pinned: unpinSim(state.pinned, row.id) });
          return;
        }
        const result = pinSim(state.pinned, row.id);
        if (!result.ok) {
          pinMessage.textContent = result.message ?? "";
          return;
        }
        navigate({ pinned: result.pinned });
      },
    }, isPinned ? "unpin" : "pin");
    const openLink = el("a", {
      href: "#",
      class: "sim-link",
      "data-sim": row.id,
      onclick: (event) => {
        event.preventDefault();
        navigate({ view: "sim-detail", sim: row.id });
      },
    }, row.run_id);
    return el("tr", { class: "sim-row", "data-sim": row.id },
      el("td", {}, pinButton),
      el("td", {}, openLink),
      el("td", {}, row.model ?? "–"),
      el("td", {}, row.barrier ?? row.impactor ?? "–"),
      el("td", {}, row.protocol ?? "–"),
      el("td", { class: "num" }, fmt(row.total_ie)),
      el("td", { class: "num" }, fmt(row.max_similarity, 3)),
      el("td", {}, row.clusters.join(", ")),
    );
  });
  container.append(
    pinMessage,
    el("table", { class: "status-grid" }, el("thead", {}, header), el("tbody", {}, ...rows)),
  );

  if (payload.total > payload.page_size) {
    const pages = Math.ceil(payload.total / payload.page_size);
    container.append(
      el("nav", { class: "pagination" },
        el("button", {
          disabled: state.page <= 1,
          onclick: () => navigate({ page: state.page - 1 }),
        }, "‹ prev"),
        el("span", {}, ` page ${payload.page} / ${pages} `),
        el("button", {
          disabled: state.page >= pages,
          onclick: () => navigate({ page: state.page + 1 }),
        }, "next ›"),
      ),
    );
  }

  if (state.pinned.length) {
    container.append(
      el("p", { class: "pinned-summary" },
        `${state.pinned.length} pinned: ${state.pinned.join(", ")} `,
        el("button", {
          id: "open-comparison",
          onclick: () => navigate({ view: "sim-detail", sim: state.pinned[0] ?? "" }),
        }, "Open comparison"),
      ),
    );
  }
}

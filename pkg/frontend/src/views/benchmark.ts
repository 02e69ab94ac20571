// Benchmark view: rank vehicles of a class by one subdiscipline score,
// optionally narrowed by a specification predicate. Row click opens the
// vehicle's development tree.

import { ApiClient, BenchmarkRow, VehicleRow } from "../api.js";
import { el, fmt } from "../dom.js";
import { ViewState } from "../state.js";

export type Navigate = (update: Partial<ViewState>) => void;

const SUBDISCIPLINES = ["VRU", "AOP", "COP", "SA"];
const OPS = ["eq", "ne", "lt", "le", "gt", "ge", "contains"];

export async function renderBenchmark(
  container: HTMLElement,
  api: ApiClient,
  state: ViewState,
  navigate: Navigate,
): Promise<void> {
  const vehicles = await api.vehicles({});
  const classes = [...new Set(vehicles.map((v) => v.class).filter((c): c is string => !!c))].sort();

  const classSelect = el("select", { id: "class-select" },
    el("option", { value: "" }, "– class –"),
    ...classes.map((c) =>
      el("option", { value: c, ...(c === state.klass ? { selected: true } : {}) }, c),
    ),
  );
  const subSelect = el("select", { id: "sub-select" },
    el("option", { value: "" }, "– subdiscipline –"),
    ...SUBDISCIPLINES.map((s) =>
      el("option", { value: s, ...(s === state.subdiscipline ? { selected: true } : {}) }, s),
    ),
  );
  const specKey = el("input", { id: "spec-key", placeholder: "spec key", value: state.specKey });
  const specOp = el("select", { id: "spec-op" },
    ...OPS.map((op) =>
      el("option", { value: op, ...(op === state.specOp ? { selected: true } : {}) }, op),
    ),
  );
  const specValue = el("input", {
    id: "spec-value", placeholder: "value", value: state.specValue,
  });
  specKey.value = state.specKey;
  specValue.value = state.specValue;

  const apply = el("button", {
    id: "apply-benchmark",
    onclick: () =>
      navigate({
        klass: classSelect.value,
        subdiscipline: subSelect.value,
        specKey: specKey.value,
        specOp: specOp.value,
        specValue: specValue.value,
      }),
  }, "Apply");

  container.append(
    el("section", { class: "controls" },
      classSelect, subSelect, specKey, specOp, specValue, apply,
    ),
  );

  if (!state.klass || !state.subdiscipline) {
    container.append(renderMarketTable(vehicles, state, navigate));
    return;
  }

  const params: Record<string, string | undefined> = {
    class: state.klass,
    subdiscipline: state.subdiscipline,
  };
  if (state.specKey && state.specValue) {
    params.spec_key = state.specKey;
    params.spec_op = state.specOp;
    params.spec_value = state.specValue;
  }
  let rows: BenchmarkRow[];
  try {
    rows = await api.benchmark(params);
  } catch (error) {
    container.append(el("p", { class: "error" }, String(error)));
    return;
  }
  if (state.sortDir === "asc") {
    rows = [...rows].reverse(); // service order is score-descending
  }

  if (!rows.length) {
    container.append(el("p", { class: "empty-state" }, "No vehicles match this benchmark."));
    return;
  }

  const header = el("tr", {},
    el("th", {}, "Vehicle"),
    el("th", {
      id: "score-header",
      class: "sortable",
      onclick: () => navigate({ sortDir: state.sortDir === "desc" ? "asc" : "desc" }),
    }, `${state.subdiscipline} score ${state.sortDir === "desc" ? "↓" : "↑"}`),
    el("th", {}, "Stars"),
    el("th", {}, "Year"),
    el("th", {}, state.specKey || "Spec"),
  );
  const body = rows.map((row) =>
    el("tr", {
      class: "benchmark-row",
      "data-veh": row.id,
      onclick: () => navigate({ view: "devtree", veh: row.id }),
    },
      el("td", {}, row.name),
      el("td", { class: "num" }, fmt(row.score)),
      el("td", { class: "num" }, row.stars == null ? "–" : String(row.stars)),
      el("td", { class: "num" }, row.test_year == null ? "–" : String(row.test_year)),
      el("td", {}, state.specKey ? (row.spec[state.specKey] ?? "–") : ""),
    ),
  );
  container.append(
    el("table", { class: "benchmark-table" }, el("thead", {}, header), el("tbody", {}, ...body)),
  );
}

function renderMarketTable(
  vehicles: VehicleRow[],
  state: ViewState,
  navigate: Navigate,
): HTMLElement {
  const market = vehicles.filter((v) => v.on_market);
  return el("table", { class: "benchmark-table all-vehicles" },
    el("thead", {}, el("tr", {},
      el("th", {}, "Vehicle"), el("th", {}, "Class"), el("th", {}, "Year"),
      el("th", {}, "VRU"), el("th", {}, "AOP"), el("th", {}, "COP"), el("th", {}, "SA"),
    )),
    el("tbody", {}, ...market.map((v) =>
      el("tr", {
        class: "benchmark-row",
        "data-veh": v.id,
        onclick: () => navigate({ view: "devtree", veh: v.id }),
      },
        el("td", {}, v.name),
        el("td", {}, v.class ?? "–"),
        el("td", { class: "num" }, v.test_year == null ? "–" : String(v.test_year)),
        ...SUBDISCIPLINES.map((s) => el("td", { class: "num" }, fmt(v.ratings[s] ?? null))),
      ),
    )),
  );
}

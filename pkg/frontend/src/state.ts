// View state lives entirely in the URL hash: every view is a pure function
// of (snapshot id, state), links are shareable, and reload reproduces the view.

export type ViewName = "benchmark" | "devtree" | "sim-overview" | "sim-detail";

export const MAX_PINNED = 10;

export interface ViewState {
  view: ViewName;
  /** benchmark filters */
  klass: string;
  subdiscipline: string;
  specKey: string;
  specOp: string;
  specValue: string;
  sortDir: "asc" | "desc";
  /** devtree selection */
  veh: string;
  /** sim-overview filters */
  model: string;
  barrier: string;
  page: number;
  /** zoom-in center */
  sim: string;
  /** comparison set, bounded by MAX_PINNED */
  pinned: string[];
}

export function defaultState(): ViewState {
  return {
    view: "benchmark",
    klass: "",
    subdiscipline: "",
    specKey: "",
    specOp: "le",
    specValue: "",
    sortDir: "desc",
    veh: "",
    model: "",
    barrier: "",
    page: 1,
    sim: "",
    pinned: [],
  };
}

const VIEWS: ViewName[] = ["benchmark", "devtree", "sim-overview", "sim-detail"];

export function encodeState(state: ViewState): string {
  const params = new URLSearchParams();
  const defaults = defaultState();
  const set = (key: string, value: string, fallback: string) => {
    if (value !== "" && value !== fallback) params.set(key, value);
  };
  set("class", state.klass, defaults.klass);
  set("sub", state.subdiscipline, defaults.subdiscipline);
  set("specKey", state.specKey, defaults.specKey);
  set("specOp", state.specOp, defaults.specOp);
  set("specValue", state.specValue, defaults.specValue);
  set("sortDir", state.sortDir, defaults.sortDir);
  set("veh", state.veh, defaults.veh);
  set("model", state.model, defaults.model);
  set("barrier", state.barrier, defaults.barrier);
  if (state.page !== 1) params.set("page", String(state.page));
  set("sim", state.sim, defaults.sim);
  if (state.pinned.length) params.set("pinned", state.pinned.join(","));
  const query = params.toString();
  return `#/${state.view}${query ? "?" + query : ""}`;
}

export function decodeState(hash: string): ViewState {
  const state = defaultState();
  const stripped = hash.replace(/^#\/?/, "");
  if (!stripped) return state;
  const [viewPart, queryPart] = stripped.split("?", 2);
  if (VIEWS.includes(viewPart as ViewName)) {
    state.view = viewPart as ViewName;
  }
  const params = new URLSearchParams(queryPart ?? "");
  state.klass = params.get("class") ?? state.klass;
  state.subdiscipline = params.get("sub") ?? state.subdiscipline;
  state.specKey = params.get("specKey") ?? state.specKey;
  state.specOp = params.get("specOp") ?? state.specOp;
  state.specValue = params.get("specValue") ?? state.specValue;
  const dir = params.get("sortDir");
  if (dir === "asc" || dir === "desc") state.sortDir = dir;
  state.veh = params.get("veh") ?? state.veh;
  state.model = params.get("model") ?? state.model;
  state.barrier = params.get("barrier") ?? state.barrier;
  const page = Number(params.get("page") ?? "1");
  state.page = Number.isFinite(page) && page >= 1 ? Math.floor(page) : 1;
  state.sim = params.get("sim") ?? state.sim;
  const pinned = params.get("pinned");
  state.pinned = pinned ? dedupe(pinned.split(",").filter(Boolean)).slice(0, MAX_PINNED) : [];
  return state;
}

function dedupe(items: string[]): string[] {
  return [...new Set(items)];
}

export interface PinResult {
  ok: boolean;
  pinned: string[];
  message?: string;
}

/** Add a simulation to the comparison set; the combined view is bounded. */
export function pinSim(pinned: string[], simId: string): PinResult {
  if (pinned.includes(simId)) {
    return { ok: true, pinned };
  }
  if (pinned.length >= MAX_PINNED) {
    return {
      ok: false,
      pinned,
      message: `Comparison set is full (${MAX_PINNED} simulations); unpin one first.`,
    };
  }
  return { ok: true, pinned: [...pinned, simId] };
}

export function unpinSim(pinned: string[], simId: string): string[] {
  return pinned.filter((id) => id !== simId);
}

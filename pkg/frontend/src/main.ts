// Hash router: the URL owns the view state, every render is a pure
// function of (snapshot id, state), and renders from superseded
// navigation are dropped.

import { ApiClient } from "./api.js";
import { clear, el } from "./dom.js";
import { decodeState, encodeState, ViewName, ViewState } from "./state.js";
import { renderBenchmark } from "./views/benchmark.js";
import { renderDevtree } from "./views/devtree.js";
import { renderSimOverview } from "./views/simoverview.js";
import { renderSimDetail } from "./views/simdetail.js";

const TITLES: Record<ViewName, string> = {
  benchmark: "Benchmark",
  devtree: "Development tree",
  "sim-overview": "Simulations (zoom out)",
  "sim-detail": "Simulation (zoom in)",
};

export class App {
  private renderSeq = 0;

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private win: Window = window,
  ) {}

  start(): void {
    this.win.addEventListener("hashchange", () => void this.render());
    void this.render();
  }

  state(): ViewState {
    return decodeState(this.win.location.hash);
  }

  navigate = (update: Partial<ViewState>): void => {
    const next = { ...this.state(), ...update };
    const hash = encodeState(next);
    if (this.win.location.hash === hash) {
      void this.render();
    } else {
      this.win.location.hash = hash; // hashchange triggers the render
    }
  };

  async render(): Promise<void> {
    const seq = ++this.renderSeq;
    const state = this.state();
    const container = el("main", { class: `view view-${state.view}` });

    try {
      switch (state.view) {
        case "benchmark":
          await renderBenchmark(container, this.api, state, this.navigate);
          break;
        case "devtree":
          await renderDevtree(container, this.api, state, this.navigate);
          break;
        case "sim-overview":
          await renderSimOverview(container, this.api, state, this.navigate);
          break;
        case "sim-detail":
          await renderSimDetail(container, this.api, state, this.navigate);
          break;
      }
    } catch (error) {
      container.append(el("p", { class: "error" }, String(error)));
    }

    if (seq !== this.renderSeq) {
      return; // a newer navigation superseded this render
    }

    clear(this.root);
    this.root.append(this.header(state), container, this.footer());
  }

  private header(state: ViewState): HTMLElement {
    const nav = el("nav", { class: "tabs" });
    for (const view of Object.keys(TITLES) as ViewName[]) {
      nav.append(
        el("a", {
          href: encodeState({ ...state, view }),
          class: view === state.view ? "tab active" : "tab",
          "data-view": view,
        }, TITLES[view]),
      );
    }
    return el("header", {}, el("h1", {}, "cargraph"), nav);
  }

  private footer(): HTMLElement {
    return el("footer", {},
      el("span", { class: "snapshot" },
        this.api.snapshotId ? `snapshot ${this.api.snapshotId}` : ""),
    );
  }
}

export function mount(root: HTMLElement, baseUrl = ""): App {
  const app = new App(root, new ApiClient(baseUrl));
  app.start();
  return app;
}

declare global {
  interface Window {
    __CARGRAPH_TEST__?: boolean;
  }
}

if (typeof document !== "undefined" && !window.__CARGRAPH_TEST__) {
  const root = document.querySelector<HTMLElement>("#app");
  if (root) {
    mount(root, ""); // UI at /ui/, API at the origin root
  }
}

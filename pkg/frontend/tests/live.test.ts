// Optional end-to-end pass against a running service:
//   CARGRAPH_API=http://127.0.0.1:8723 npx vitest run tests/live.test.ts
// Skipped when the variable is unset.

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { App } from "../src/main.js";
import { defaultState, encodeState, ViewState } from "../src/state.js";

const base = process.env.CARGRAPH_API ?? "";

function liveApp(partial: Partial<ViewState>): { app: App; root: HTMLElement } {
  window.location.hash = encodeState({ ...defaultState(), ...partial });
  const root = document.createElement("div");
  document.body.append(root);
  const api = new ApiClient(base, (input) => fetch(input));
  return { app: new App(root, api, window), root };
}

describe.runIf(Boolean(base))("live service", () => {
  it("renders the benchmark table", async () => {
    const { app, root } = liveApp({
      view: "benchmark",
      klass: "Large Family Car",
      subdiscipline: "VRU",
    });
    await app.render();
    expect(root.querySelectorAll("tr.benchmark-row").length).toBe(2);
  });

  it("renders the development tree", async () => {
    const { app, root } = liveApp({ view: "devtree", veh: "veh:dev-aldora" });
    await app.render();
    expect(root.querySelectorAll(".devtree details").length).toBe(4);
  });

  it("renders the zoom-out scatter", async () => {
    const { app, root } = liveApp({ view: "sim-overview" });
    await app.render();
    expect(root.querySelectorAll(".scatter-plot circle.dot").length).toBe(6);
  });

  it("renders the zoom-in with two pinned simulations overlaid", async () => {
    const { app, root } = liveApp({
      view: "sim-detail",
      sim: "sim:front_v1",
      pinned: ["sim:front_v1", "sim:front_v2"],
    });
    await app.render();
    expect(root.querySelectorAll(".curve-overlay path.series").length).toBe(2);
  });
});

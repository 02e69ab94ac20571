// Development-tree view: the model lineage of one vehicle as a collapsible
// tree with per-model badges. Clicking a model opens the simulation
// overview filtered to it.

import { ApiClient, DevTreeNode } from "../api.js";
import { el } from "../dom.js";
import { ViewState } from "../state.js";
import { Navigate } from "./benchmark.js";

export async function renderDevtree(
  container: HTMLElement,
  api: ApiClient,
  state: ViewState,
  navigate: Navigate,
): Promise<void> {
  const vehicles = await api.vehicles({});
  const select = el("select", {
    id: "veh-select",
    onchange: (event) => navigate({ veh: (event.target as HTMLSelectElement).value }),
  },
    el("option", { value: "" }, "– vehicle –"),
    ...vehicles.map((v) =>
      el("option", { value: v.id, ...(v.id === state.veh ? { selected: true } : {}) },
        `${v.name}${v.on_market ? "" : " (development)"}`),
    ),
  );
  container.append(el("section", { class: "controls" }, select));

  if (!state.veh) {
    container.append(el("p", { class: "empty-state" }, "Pick a vehicle to see its model tree."));
    return;
  }

  let forest: DevTreeNode[];
  try {
    forest = await api.devtree(state.veh);
  } catch (error) {
    container.append(el("p", { class: "error" }, String(error)));
    return;
  }
  if (!forest.length) {
    container.append(el("p", { class: "empty-state" }, "No models loaded for this vehicle."));
    return;
  }
  const tree = el("div", { class: "devtree" },
    ...forest.map((root) => renderNode(root, navigate)),
  );
  container.append(tree);
}

function renderNode(node: DevTreeNode, navigate: Navigate): HTMLElement {
  const badges = el("span", { class: "badges" },
    el("span", { class: "badge sims", title: "simulations" }, `${node.sim_count} sims`),
    node.protocols.length
      ? el("span", { class: "badge protocols" }, node.protocols.join(", "))
      : null,
    node.status_reuse.length
      ? el("span", { class: "badge reuse", title: "reused results" },
        `↺ ${node.status_reuse.length}`)
      : null,
  );
  const link = el("a", {
    class: "model-link",
    href: "#",
    "data-model": node.id,
    onclick: (event) => {
      event.preventDefault();
      navigate({ view: "sim-overview", model: node.id });
    },
  }, node.model_id);

  const summary = el("summary", {}, link, " ", badges);
  const details = el("details", { class: "tree-node", open: true }, summary);
  if (node.children.length) {
    details.append(
      el("div", { class: "children" }, ...node.children.map((c) => renderNode(c, navigate))),
    );
  }
  return details;
}

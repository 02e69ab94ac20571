// Zoom-in view: one simulation in detail — global properties, the energy
// ranking of its parts, raw output channels, and the similar-simulations
// panel. With two or more pinned simulations the energy histories overlay
// in one chart for comparison.

import { ApiClient, SimDetailPayload } from "../api.js";
import { barChart, lineChart, totalEnergyCurve, LineSeries } from "../charts.js";
import { el, fmt } from "../dom.js";
import { pinSim, ViewState } from "../state.js";
import { Navigate } from "./benchmark.js";

export async function renderSimDetail(
  container: HTMLElement,
  api: ApiClient,
  state: ViewState,
  navigate: Navigate,
): Promise<void> {
  if (!state.sim) {
    container.append(el("p", { class: "empty-state" }, "Pick a simulation from the overview."));
    return;
  }
  let detail: SimDetailPayload;
  try {
    detail = await api.simDetail(state.sim);
  } catch (error) {
    container.append(el("p", { class: "error" }, String(error)));
    return;
  }

  const pinMessage = el("p", { class: "pin-message", id: "pin-message" });
  const isPinned = state.pinned.includes(detail.id);
  container.append(
    el("section", { class: "sim-globals" },
      el("h2", {}, detail.run_id),
      el("button", {
        id: "pin-current",
        class: isPinned ? "pin pinned" : "pin",
        onclick: () => {
          const result = pinSim(state.pinned, detail.id);
          if (!result.ok) {
            pinMessage.textContent = result.message ?? "";
            return;
          }
          navigate({ pinned: result.pinned });
        },
      }, isPinned ? "pinned" : "pin for comparison"),
      el("dl", {},
        el("dt", {}, "model"), el("dd", {}, detail.model ?? "–"),
        el("dt", {}, "counterpart"), el("dd", {}, detail.barrier ?? detail.impactor ?? "–"),
        el("dt", {}, "protocol"), el("dd", {}, detail.protocol ?? "–"),
        el("dt", {}, "total mass [t]"), el("dd", {}, fmt(detail.total_mass, 3)),
        el("dt", {}, "impact energy [kJ]"), el("dd", {}, fmt(detail.impact_energy)),
        el("dt", {}, "termination [ms]"), el("dd", {}, fmt(detail.termination_time)),
      ),
      pinMessage,
    ),
  );

  if (detail.parts.length) {
    container.append(
      el("section", { class: "energy-bars" },
        el("h3", {}, "Energy absorption by part"),
        barChart(detail.parts.map((p) => ({ label: p.name ?? p.part, value: p.ie_max }))),
        el("table", { class: "energy-table" },
          el("thead", {}, el("tr", {},
            el("th", {}, "Part"), el("th", {}, "peak [kJ]"),
            el("th", {}, "start [ms]"), el("th", {}, "end [ms]"), el("th", {}, "rate [kJ/ms]"),
          )),
          el("tbody", {}, ...detail.parts.map((p) =>
            el("tr", { class: "energy-row" },
              el("td", {}, p.name ?? p.part),
              el("td", { class: "num" }, fmt(p.ie_max)),
              el("td", { class: "num" }, fmt(p.t_start)),
              el("td", { class: "num" }, fmt(p.t_end)),
              el("td", { class: "num" }, fmt(p.rate, 3)),
            ),
          )),
        ),
      ),
    );
  }

  await renderCurves(container, api, state, detail);
  renderChannels(container, detail);

  const panel = el("section", { class: "similar-panel" },
    el("h3", {}, "Similar simulations"),
    detail.similar.length
      ? el("ul", {}, ...detail.similar.map((item) =>
        el("li", {},
          el("a", {
            href: "#",
            class: "similar-link",
            "data-sim": item.sim,
            onclick: (event) => {
              event.preventDefault();
              navigate({ view: "sim-detail", sim: item.sim });
            },
          }, item.sim),
          ` score ${fmt(item.score, 4)}`,
        ),
      ))
      : el("p", { class: "empty-state" }, "No similarity edges for this simulation."),
  );
  container.append(panel);
}

async function renderCurves(
  container: HTMLElement,
  api: ApiClient,
  state: ViewState,
  center: SimDetailPayload,
): Promise<void> {
  const comparison = state.pinned.filter((id) => id !== center.id);
  const overlayIds = state.pinned.length >= 2 ? state.pinned : [];

  if (overlayIds.length >= 2) {
    const series: LineSeries[] = [];
    for (const simId of overlayIds) {
      const payload = simId === center.id ? center : await api.simDetail(simId);
      const curve = totalEnergyCurve(payload.series);
      if (curve.t.length) {
        series.push({ label: payload.run_id, t: curve.t, v: curve.v });
      }
    }
    if (series.length >= 2) {
      container.append(
        el("section", { class: "curve-overlay" },
          el("h3", {}, `Total energy comparison (${series.length} pinned)`),
          lineChart(series),
          el("p", { class: "legend" }, series.map((s) => s.label).join("  ·  ")),
        ),
      );
      return;
    }
  }

  const own = totalEnergyCurve(center.series);
  if (own.t.length) {
    container.append(
      el("section", { class: "curve-single" },
        el("h3", {}, "Total internal energy"),
        lineChart([{ label: center.run_id, t: own.t, v: own.v }]),
        comparison.length === 1
          ? el("p", { class: "hint" }, "Pin one more simulation to overlay curves.")
          : null,
      ),
    );
  }
}

function renderChannels(container: HTMLElement, detail: SimDetailPayload): void {
  const channels = Object.entries(detail.series).filter(([key]) => !key.startsWith("part:"));
  if (!channels.length) return;
  const section = el("section", { class: "channels" }, el("h3", {}, "Output channels"));
  for (const [key, curve] of channels) {
    section.append(
      el("figure", { class: "channel" },
        lineChart([{ label: key, t: curve.t, v: curve.v }], 420, 180),
        el("figcaption", {}, key),
      ),
    );
  }
  container.append(section);
}

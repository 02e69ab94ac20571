// Hand-rolled SVG chart primitives: lines, bars, scatter. Deliberately
// small: no 3D, no animation, just crisp data marks with min/max axes.

const SVG_NS = "http://www.w3.org/2000/svg";

export const SERIES_COLORS = [
  "#2563eb", "#dc2626", "#16a34a", "#9333ea", "#ea580c",
  "#0891b2", "#be185d", "#4d7c0f", "#7c3aed", "#b45309",
];

export interface Margins {
  top: number;
  right: number;
  bottom: number;
  left: number;
}

const MARGINS: Margins = { top: 12, right: 12, bottom: 28, left: 48 };

function svgElement<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number> = {},
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    el.setAttribute(key, String(value));
  }
  return el;
}

function frame(width: number, height: number, cls: string): SVGSVGElement {
  const svg = svgElement("svg", {
    viewBox: `0 0 ${width} ${height}`,
    width,
    height,
    class: cls,
  });
  return svg;
}

interface Scale {
  (value: number): number;
  min: number;
  max: number;
}

function linearScale(min: number, max: number, rangeLo: number, rangeHi: number): Scale {
  const span = max - min || 1;
  const fn = ((value: number) =>
    rangeLo + ((value - min) / span) * (rangeHi - rangeLo)) as Scale;
  fn.min = min;
  fn.max = max;
  return fn;
}

function axes(svg: SVGSVGElement, width: number, height: number, x: Scale, y: Scale): void {
  const m = MARGINS;
  svg.append(
    svgElement("line", {
      x1: m.left, y1: height - m.bottom, x2: width - m.right, y2: height - m.bottom,
      class: "axis",
    }),
    svgElement("line", {
      x1: m.left, y1: m.top, x2: m.left, y2: height - m.bottom, class: "axis",
    }),
  );
  const label = (text: string, px: number, py: number, anchor: string) => {
    const t = svgElement("text", { x: px, y: py, "text-anchor": anchor, class: "tick" });
    t.textContent = text;
    svg.append(t);
  };
  label(format(x.min), m.left, height - m.bottom + 16, "start");
  label(format(x.max), width - m.right, height - m.bottom + 16, "end");
  label(format(y.max), m.left - 4, m.top + 8, "end");
  label(format(y.min), m.left - 4, height - m.bottom, "end");
}

function format(value: number): string {
  if (!Number.isFinite(value)) return "0";
  if (Math.abs(value) >= 1000 || (value !== 0 && Math.abs(value) < 0.01)) {
    return value.toExponential(1);
  }
  return String(Math.round(value * 100) / 100);
}

export interface LineSeries {
  label: string;
  t: number[];
  v: number[];
}

export function lineChart(
  series: LineSeries[],
  width = 560,
  height = 260,
): SVGSVGElement {
  const svg = frame(width, height, "chart line-chart");
  const points = series.flatMap((s) => s.t.map((t, i) => [t, s.v[i] ?? 0] as const));
  const xs = points.map((p) => p[0]);
  const ys = points.map((p) => p[1]);
  const m = MARGINS;
  const x = linearScale(Math.min(0, ...xs), Math.max(1, ...xs), m.left, width - m.right);
  const y = linearScale(Math.min(0, ...ys), Math.max(1, ...ys), height - m.bottom, m.top);
  axes(svg, width, height, x, y);
  series.forEach((s, index) => {
    const d = s.t
      .map((t, i) => `${i === 0 ? "M" : "L"}${x(t).toFixed(2)},${y(s.v[i] ?? 0).toFixed(2)}`)
      .join(" ");
    const path = svgElement("path", {
      d,
      fill: "none",
      stroke: SERIES_COLORS[index % SERIES_COLORS.length] ?? "#333",
      "stroke-width": 1.8,
      class: "series",
      "data-label": s.label,
    });
    svg.append(path);
  });
  return svg;
}

export interface Bar {
  label: string;
  value: number;
}

export function barChart(bars: Bar[], width = 560, height = 220): SVGSVGElement {
  const svg = frame(width, height, "chart bar-chart");
  const m = MARGINS;
  const maxValue = Math.max(1e-12, ...bars.map((b) => b.value));
  const x = linearScale(0, bars.length, m.left, width - m.right);
  const y = linearScale(0, maxValue, height - m.bottom, m.top);
  axes(svg, width, height, linearScale(0, maxValue, 0, 1), y);
  const slot = (x(1) - x(0)) * 0.8;
  bars.forEach((bar, index) => {
    const rect = svgElement("rect", {
      x: x(index) + slot * 0.1,
      y: y(bar.value),
      width: Math.max(slot, 2),
      height: Math.max(y(0) - y(bar.value), 0),
      class: "bar",
      fill: SERIES_COLORS[index % SERIES_COLORS.length] ?? "#333",
      "data-label": bar.label,
    });
    const title = svgElement("title");
    title.textContent = `${bar.label}: ${format(bar.value)}`;
    rect.append(title);
    svg.append(rect);
  });
  return svg;
}

export interface ScatterPoint {
  id: string;
  label: string;
  x: number;
  y: number;
  highlighted?: boolean;
}

export function scatterPlot(
  points: ScatterPoint[],
  xLabel: string,
  yLabel: string,
  onClick?: (id: string) => void,
  width = 560,
  height = 300,
): SVGSVGElement {
  const svg = frame(width, height, "chart scatter-plot");
  const m = MARGINS;
  const xs = points.map((p) => p.x);
  const ys = points.map((p) => p.y);
  const x = linearScale(Math.min(0, ...xs), Math.max(1, ...xs), m.left, width - m.right);
  const y = linearScale(Math.min(0, ...ys), Math.max(1, ...ys), height - m.bottom, m.top);
  axes(svg, width, height, x, y);
  const xText = svgElement("text", {
    x: width / 2, y: height - 4, "text-anchor": "middle", class: "axis-label",
  });
  xText.textContent = xLabel;
  const yText = svgElement("text", {
    x: 12, y: m.top, "text-anchor": "start", class: "axis-label",
  });
  yText.textContent = yLabel;
  svg.append(xText, yText);
  for (const point of points) {
    const circle = svgElement("circle", {
      cx: x(point.x),
      cy: y(point.y),
      r: point.highlighted ? 7 : 5,
      class: point.highlighted ? "dot pinned" : "dot",
      "data-id": point.id,
    });
    const title = svgElement("title");
    title.textContent = `${point.label} (${format(point.x)}, ${format(point.y)})`;
    circle.append(title);
    if (onClick) {
      circle.addEventListener("click", () => onClick(point.id));
    }
    svg.append(circle);
  }
  return svg;
}

/**
 * Total internal energy over time for one simulation: the per-part curves
 * are summed on the union time axis with last-observation-carried-forward.
 */
export function totalEnergyCurve(series: Record<string, Curve>): Curve {
  const parts = Object.entries(series)
    .filter(([key]) => key.startsWith("part:"))
    .map(([, curve]) => curve);
  if (!parts.length) return { t: [], v: [] };
  const axis = [...new Set(parts.flatMap((c) => c.t))].sort((a, b) => a - b);
  const values = axis.map((t) =>
    parts.reduce((acc, curve) => acc + sampleAt(curve, t), 0),
  );
  return { t: axis, v: values };
}

interface Curve {
  t: number[];
  v: number[];
}

function sampleAt(curve: Curve, t: number): number {
  let last = 0;
  for (let i = 0; i < curve.t.length; i++) {
    const ti = curve.t[i]!;
    if (ti > t) break;
    last = curve.v[i] ?? 0;
  }
  return last;
}

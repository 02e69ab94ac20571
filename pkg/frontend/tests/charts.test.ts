import { describe, expect, it } from "vitest";

import { barChart, lineChart, scatterPlot, totalEnergyCurve } from "../src/charts.js";

describe("svg chart primitives", () => {
  it("line chart draws one path per series", () => {
    const svg = lineChart([
      { label: "a", t: [0, 1, 2], v: [0, 1, 4] },
      { label: "b", t: [0, 1, 2], v: [1, 1, 1] },
    ]);
    const paths = svg.querySelectorAll("path.series");
    expect(paths).toHaveLength(2);
    expect(paths[0]!.getAttribute("d")).toMatch(/^M/);
    expect(paths[0]!.getAttribute("data-label")).toBe("a");
  });

  it("bar chart draws one rect per bar with tooltips", () => {
    const svg = barChart([
      { label: "floorpan", value: 12 },
      { label: "bumper", value: 20 },
    ]);
    const rects = svg.querySelectorAll("rect.bar");
    expect(rects).toHaveLength(2);
    expect(svg.textContent).toContain("bumper: 20");
  });

  it("scatter draws circles, flags pinned points, and dispatches clicks", () => {
    const clicked: string[] = [];
    const svg = scatterPlot(
      [
        { id: "sim:a", label: "a", x: 1, y: 0.5 },
        { id: "sim:b", label: "b", x: 2, y: 0.25, highlighted: true },
      ],
      "x", "y",
      (id) => clicked.push(id),
    );
    const dots = svg.querySelectorAll("circle.dot");
    expect(dots).toHaveLength(2);
    expect(dots[1]!.classList.contains("pinned")).toBe(true);
    (dots[0] as SVGElement).dispatchEvent(new Event("click"));
    expect(clicked).toEqual(["sim:a"]);
  });
});

describe("totalEnergyCurve", () => {
  it("sums part channels on the union axis with carry-forward", () => {
    const curve = totalEnergyCurve({
      "part:1/internal_energy": { t: [0, 10, 20], v: [0, 5, 5] },
      "part:2/internal_energy": { t: [0, 5, 20], v: [0, 2, 4] },
      "node:7/acceleration": { t: [0, 20], v: [9, 9] }, // not a part: ignored
    });
    expect(curve.t).toEqual([0, 5, 10, 20]);
    expect(curve.v).toEqual([0, 2, 7, 9]);
  });

  it("returns an empty curve when no part series exist", () => {
    expect(totalEnergyCurve({})).toEqual({ t: [], v: [] });
  });
});

import { beforeEach, describe, expect, it } from "vitest";

import { renderHistogram } from "../src/charts.js";
import type { Histogram } from "../src/types.js";

beforeEach(() => {
  document.body.textContent = "";
});

function container(): HTMLElement {
  const el = document.createElement("div");
  document.body.appendChild(el);
  return el;
}

describe("stats view", () => {
  it("shows an empty state for an all-zero histogram", () => {
    const el = container();
    renderHistogram(el, { n_final: 0, counts: {} });
    expect(el.querySelector(".empty-state")?.textContent).toContain("No finally-labeled");
    expect(el.querySelectorAll(".bar")).toHaveLength(0);
  });

  it("renders bars with widths proportional to counts", () => {
    const histogram: Histogram = {
      n_final: 100,
      counts: {
        daytime: { Day: 60, Night: 30, Twilight: 10 },
        precipitation: { None: 100 },
        fog: { None: 100 },
        road: { Dry: 100 },
        roadside: { Dry: 100 },
        infrastructure: { Urban: 100 },
        precipitation_intensity: {},
      },
    };
    const el = container();
    renderHistogram(el, histogram);

    const block = el.querySelector('.chart-block[data-category="daytime"]')!;
    const bars = block.querySelectorAll<HTMLElement>(".bar");
    expect(bars).toHaveLength(3);
    const widthOf = (value: string) => {
      const bar = [...bars].find((b) => b.dataset.value === value)!;
      return Number.parseFloat(bar.style.width);
    };
    // Max count fills the track; the others scale linearly with count
    // (widths are rendered with two decimals, so compare at that precision).
    expect(widthOf("Day")).toBeCloseTo(100, 2);
    expect(widthOf("Night")).toBeCloseTo(50, 2);
    expect(widthOf("Twilight")).toBeCloseTo(100 / 6, 2);
    const ratio = widthOf("Night") / widthOf("Twilight");
    expect(ratio).toBeCloseTo(30 / 10, 2);
  });

  it("labels every bar with its count", () => {
    const histogram: Histogram = {
      n_final: 4,
      counts: {
        daytime: { Day: 3, Night: 1 },
        precipitation: {},
        fog: {},
        road: {},
        roadside: {},
        infrastructure: {},
        precipitation_intensity: {},
      },
    };
    const el = container();
    renderHistogram(el, histogram);
    const block = el.querySelector('.chart-block[data-category="daytime"]')!;
    const counts = [...block.querySelectorAll(".chart-count")].map((n) => n.textContent);
    expect(counts).toEqual(["3", "1"]);
    const empty = el.querySelector('.chart-block[data-category="fog"] .chart-empty');
    expect(empty).not.toBeNull();
  });

  it("shows the headline frame count", () => {
    const el = container();
    renderHistogram(el, { n_final: 42, counts: { daytime: { Day: 42 } } });
    expect(el.querySelector("h2")?.textContent).toContain("42");
  });
});

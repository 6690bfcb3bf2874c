import { beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { App } from "../src/app.js";
import { FixtureService } from "./fixtureService.js";

function makeService(): FixtureService {
  return new FixtureService([
    { frame_id: "frame-a", suggestion: { intensity: "Heavy", clutter_fraction: 0.12, diagnostics: [] } },
    { frame_id: "frame-b", suggestion: { intensity: "Light", clutter_fraction: 0.01, diagnostics: [] } },
    { frame_id: "frame-c", suggestion: null },
  ]);
}

interface Harness {
  app: App;
  root: HTMLElement;
  service: FixtureService;
  confirms: ReturnType<typeof vi.fn>;
  storage: Map<string, string>;
}

async function startApp(
  service: FixtureService,
  storage = new Map<string, string>(),
): Promise<Harness> {
  const root = document.createElement("div");
  document.body.appendChild(root);
  const confirms = vi.fn(() => true);
  const app = new App(root, new ApiClient(service.fetchFn), {
    confirmFn: confirms,
    storage: {
      getItem: (key: string) => storage.get(key) ?? null,
      setItem: (key: string, value: string) => void storage.set(key, value),
    },
  });
  await app.start();
  return { app, root, service, confirms, storage };
}

function click(root: HTMLElement, selector: string): void {
  const el = root.querySelector<HTMLElement>(selector);
  if (!el) throw new Error(`nothing matches ${selector}`);
  el.click();
}

async function flush(): Promise<void> {
  await new Promise((resolve) => setTimeout(resolve, 0));
}

beforeEach(() => {
  document.body.textContent = "";
  window.location.hash = "";
});

describe("app round trip", () => {
  it("labels a frame through the UI, and a reloaded app shows the values", async () => {
    const service = makeService();
    const first = await startApp(service);
    await first.app.route("#/frames");
    expect(first.root.querySelectorAll(".frame-row")).toHaveLength(3);

    await first.app.route("#/frame/frame-a");
    for (const [field, value] of [
      ["daytime", "Twilight"],
      ["precipitation_kind", "Rain"],
      ["precipitation_intensity", "Light"],
      ["fog", "LightFog"],
      ["road", "Wet"],
      ["roadside", "Wet"],
      ["infrastructure", "Highway"],
    ]) {
      click(first.root, `.category-row[data-field="${field}"] .choice[data-value="${value}"]`);
    }
    click(first.root, "button.save");
    await flush();
    expect(service.records.get("frame-a")?.daytime).toBe("Twilight");
    first.app.stop();

    // Fresh app over the same service: simulates a browser reload.
    document.body.textContent = "";
    const second = await startApp(service);
    await second.app.route("#/frames");
    const row = second.root.querySelector('.frame-row[data-frame-id="frame-a"]');
    expect((row as HTMLElement).dataset.status).toBe("complete");
    await second.app.route("#/frame/frame-a");
    const picked = second.root.querySelector(
      '.category-row[data-field="daytime"] .choice[data-selected="true"]',
    );
    expect((picked as HTMLElement).dataset.value).toBe("Twilight");
    second.app.stop();
  });

  it("stats view reflects saved labels and shows proportional bars", async () => {
    const service = makeService();
    const { app, root } = await startApp(service);
    await app.route("#/frame/frame-a");
    for (const [field, value] of [
      ["daytime", "Day"],
      ["precipitation_kind", "None"],
      ["fog", "None"],
      ["road", "Dry"],
      ["roadside", "Dry"],
      ["infrastructure", "Urban"],
    ]) {
      click(root, `.category-row[data-field="${field}"] .choice[data-value="${value}"]`);
    }
    click(root, "button.save");
    await flush();

    await app.route("#/stats");
    expect(root.querySelector("h2")?.textContent).toContain("1 finally-labeled");
    const bar = root.querySelector<HTMLElement>(
      '.chart-block[data-category="daytime"] .bar[data-value="Day"]',
    );
    expect(bar?.dataset.count).toBe("1");
    expect(Number.parseFloat(bar!.style.width)).toBeCloseTo(100, 5);
    app.stop();
  });
});

describe("navigation", () => {
  it("steps between frames and wraps at the ends when enabled", async () => {
    const service = makeService();
    const storage = new Map([["envlabel.wrapNavigation", "1"]]);
    const { app, root } = await startApp(service, storage);
    await app.route("#/frames");
    await app.route("#/frame/frame-c");
    await (app as unknown as { step(d: number): Promise<void> }).step(1);
    await flush();
    expect(root.querySelector(".frame-title")?.textContent).toBe("frame-a");
    app.stop();
  });

  it("stops at the last frame when wrap is off", async () => {
    const service = makeService();
    const storage = new Map([["envlabel.wrapNavigation", "0"]]);
    const { app, root } = await startApp(service, storage);
    await app.route("#/frames");
    await app.route("#/frame/frame-c");
    await (app as unknown as { step(d: number): Promise<void> }).step(1);
    await flush();
    expect(root.querySelector(".frame-title")?.textContent).toBe("frame-c");
    app.stop();
  });

  it("asks before discarding unsaved changes on step navigation", async () => {
    const service = makeService();
    const harness = await startApp(service);
    await harness.app.route("#/frames");
    await harness.app.route("#/frame/frame-a");
    click(harness.root, '.category-row[data-field="daytime"] .choice[data-value="Day"]');
    harness.confirms.mockReturnValueOnce(false);
    await (harness.app as unknown as { step(d: number): Promise<void> }).step(1);
    await flush();
    expect(harness.confirms).toHaveBeenCalled();
    expect(harness.root.querySelector(".frame-title")?.textContent).toBe("frame-a");
    harness.app.stop();
  });

  it("toggles the shortcut legend", async () => {
    const service = makeService();
    const { app, root } = await startApp(service);
    const panel = root.querySelector<HTMLElement>(".help-legend")!;
    expect(panel.hidden).toBe(true);
    click(root, ".help-toggle");
    expect(panel.hidden).toBe(false);
    click(root, ".help-toggle");
    expect(panel.hidden).toBe(true);
    app.stop();
  });

  it("unlabeled filter hides completed frames in the browser", async () => {
    const service = makeService();
    const { app, root } = await startApp(service);
    await app.route("#/frame/frame-b");
    for (const [field, value] of [
      ["daytime", "Day"],
      ["precipitation_kind", "None"],
      ["fog", "None"],
      ["road", "Dry"],
      ["roadside", "Dry"],
      ["infrastructure", "Urban"],
    ]) {
      click(root, `.category-row[data-field="${field}"] .choice[data-value="${value}"]`);
    }
    click(root, "button.save");
    await flush();

    await app.route("#/frames");
    const filter = root.querySelector<HTMLSelectElement>(".frame-filter")!;
    filter.value = "unlabeled";
    filter.dispatchEvent(new Event("change"));
    await flush();
    const ids = [...root.querySelectorAll(".frame-row")].map(
      (row) => (row as HTMLElement).dataset.frameId,
    );
    expect(ids).toEqual(["frame-a", "frame-c"]);
    app.stop();
  });

  it("conflicting filter finds human labels contradicting the suggestion", async () => {
    const service = makeService();
    const { app, root } = await startApp(service);
    // Human says Light where the suggestion says Heavy: a conflict.
    await app.route("#/frame/frame-a");
    click(root, '.category-row[data-field="precipitation_kind"] .choice[data-value="Snow"]');
    click(root, '.category-row[data-field="precipitation_intensity"] .choice[data-value="Light"]');
    click(root, "button.save");
    await flush();

    await app.route("#/frames");
    const filter = root.querySelector<HTMLSelectElement>(".frame-filter")!;
    filter.value = "conflicting";
    filter.dispatchEvent(new Event("change"));
    await flush();
    await flush();
    const ids = [...root.querySelectorAll(".frame-row")].map(
      (row) => (row as HTMLElement).dataset.frameId,
    );
    expect(ids).toEqual(["frame-a"]);
    app.stop();
  });
});

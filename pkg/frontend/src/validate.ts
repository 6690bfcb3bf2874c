/**
 * Client-side mirror of the server's hierarchy constraints.
 *
 * The editor refuses to submit any draft these checks reject, so the service
 * should never answer 422 to a payload produced through the normal UI flow.
 */

import type { ValueField, ViolationItem } from "./types.js";

export type Draft = Record<ValueField, string | null>;

export function emptyDraft(): Draft {
  return {
    daytime: null,
    precipitation_kind: null,
    precipitation_intensity: null,
    fog: null,
    road: null,
    roadside: null,
    infrastructure: null,
  };
}

export function violations(draft: Draft): ViolationItem[] {
  const out: ViolationItem[] = [];
  if (draft.precipitation_kind === "None" && draft.precipitation_intensity !== null) {
    out.push({
      category: "precipitation",
      message: "intensity without precipitation kind",
    });
  }
  return out;
}

/** Every category decided, ready to count as a final label. */
export function isComplete(draft: Draft): boolean {
  if (violations(draft).length > 0) return false;
  const simple: ValueField[] = ["daytime", "fog", "road", "roadside", "infrastructure"];
  if (simple.some((field) => draft[field] === null)) return false;
  if (draft.precipitation_kind === null) return false;
  if (draft.precipitation_kind !== "None" && draft.precipitation_intensity === null) {
    return false;
  }
  return true;
}

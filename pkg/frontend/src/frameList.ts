/** Paged frame browser with completion badges and quick filters. */

import type { FramePage, FrameSummary } from "./types.js";

export type FrameFilter = "all" | "unlabeled" | "conflicting";

export interface FrameListOptions {
  filter: FrameFilter;
  /** frame_ids whose human intensity contradicts the live suggestion
      (null while not yet computed; only needed for the conflicting filter) */
  conflicts: Set<string> | null;
  onOpen: (frameId: string) => void;
  onFilterChange: (filter: FrameFilter) => void;
}

export function applyFilter(
  frames: FrameSummary[],
  filter: FrameFilter,
  conflicts: Set<string> | null,
): FrameSummary[] {
  if (filter === "unlabeled") {
    return frames.filter((f) => f.status !== "complete");
  }
  if (filter === "conflicting") {
    return frames.filter((f) => conflicts?.has(f.frame_id) ?? false);
  }
  return frames;
}

export function renderFrameList(
  container: HTMLElement,
  page: FramePage,
  options: FrameListOptions,
): void {
  container.textContent = "";

  const toolbar = document.createElement("div");
  toolbar.className = "list-toolbar";
  const select = document.createElement("select");
  select.className = "frame-filter";
  for (const value of ["all", "unlabeled", "conflicting"] as FrameFilter[]) {
    const option = document.createElement("option");
    option.value = value;
    option.textContent = value;
    if (value === options.filter) option.selected = true;
    select.appendChild(option);
  }
  select.addEventListener("change", () => {
    options.onFilterChange(select.value as FrameFilter);
  });
  toolbar.appendChild(select);
  const summary = document.createElement("span");
  summary.className = "list-summary";
  summary.textContent = `${page.total} frames`;
  toolbar.appendChild(summary);
  container.appendChild(toolbar);

  const visible = applyFilter(page.frames, options.filter, options.conflicts);
  if (visible.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent =
      page.frames.length === 0 ? "No frames in the dataset." : "No frames match this filter.";
    container.appendChild(empty);
    return;
  }

  const list = document.createElement("ul");
  list.className = "frame-list";
  for (const frame of visible) {
    const item = document.createElement("li");
    item.className = "frame-row";
    item.dataset.frameId = frame.frame_id;
    item.dataset.status = frame.status;

    const name = document.createElement("span");
    name.className = "frame-id";
    name.textContent = frame.frame_id;
    item.appendChild(name);

    const badge = document.createElement("span");
    badge.className = `status-badge status-${frame.status}`;
    badge.textContent = frame.status;
    item.appendChild(badge);

    item.addEventListener("click", () => options.onOpen(frame.frame_id));
    list.appendChild(item);
  }
  container.appendChild(list);
}

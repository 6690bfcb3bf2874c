/**
 * Label-distribution view: one bar block per category, bar widths
 * proportional to counts within the block (max count = 100%).
 */
const BLOCK_ORDER = [
    "daytime",
    "precipitation",
    "precipitation_intensity",
    "fog",
    "road",
    "roadside",
    "infrastructure",
];
const BLOCK_TITLES = {
    daytime: "Daytime",
    precipitation: "Precipitation",
    precipitation_intensity: "Precipitation intensity",
    fog: "Fog",
    road: "Road condition",
    roadside: "Roadside condition",
    infrastructure: "Infrastructure",
};
export function renderHistogram(container, histogram) {
    container.textContent = "";
    const heading = document.createElement("h2");
    heading.textContent = `Label distribution (${histogram.n_final} finally-labeled frames)`;
    container.appendChild(heading);
    if (histogram.n_final === 0) {
        const empty = document.createElement("p");
        empty.className = "empty-state";
        empty.textContent = "No finally-labeled frames yet.";
        container.appendChild(empty);
        return;
    }
    for (const key of BLOCK_ORDER) {
        const counts = histogram.counts[key] ?? {};
        const block = document.createElement("section");
        block.className = "chart-block";
        block.dataset.category = key;
        const title = document.createElement("h3");
        title.textContent = BLOCK_TITLES[key] ?? key;
        block.appendChild(title);
        const values = Object.keys(counts).sort((a, b) => (counts[b] ?? 0) - (counts[a] ?? 0));
        const max = values.reduce((m, v) => Math.max(m, counts[v] ?? 0), 0);
        if (values.length === 0 || max === 0) {
            const none = document.createElement("p");
            none.className = "chart-empty";
            none.textContent = "no values";
            block.appendChild(none);
        }
        for (const value of values) {
            const count = counts[value] ?? 0;
            const row = document.createElement("div");
            row.className = "chart-row";
            const label = document.createElement("span");
            label.className = "chart-label";
            label.textContent = value;
            row.appendChild(label);
            const track = document.createElement("div");
            track.className = "chart-track";
            const bar = document.createElement("div");
            bar.className = "bar";
            bar.dataset.value = value;
            bar.dataset.count = String(count);
            bar.style.width = max > 0 ? `${((count / max) * 100).toFixed(2)}%` : "0%";
            track.appendChild(bar);
            row.appendChild(track);
            const amount = document.createElement("span");
            amount.className = "chart-count";
            amount.textContent = String(count);
            row.appendChild(amount);
            block.appendChild(row);
        }
        container.appendChild(block);
    }
}

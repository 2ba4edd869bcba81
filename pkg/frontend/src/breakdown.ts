/** Stacked per-step proportions of the four actions. */

import { BreakdownResponse } from "./api.js";

const STEP_COLORS = [
  "#4c78a8", "#f58518", "#54a24b", "#e45756", "#72b7b2", "#eeca3b", "#b279a2",
  "#9d755d", "#bab0ac",
];

const ACTIONS = ["start", "complete", "scrap", "delay"];

export function renderBreakdown(container: HTMLElement, data: BreakdownResponse): void {
  container.textContent = "";
  container.classList.add("breakdown");
  const total = data.rows.reduce((acc, row) => acc + row.count, 0);
  if (total === 0) {
    const empty = document.createElement("div");
    empty.className = "empty-state";
    empty.textContent = "No events ingested yet.";
    container.appendChild(empty);
    return;
  }
  for (const action of ACTIONS) {
    const rows = data.rows.filter((r) => r.action === action);
    const line = document.createElement("div");
    line.className = "breakdown-row";
    line.dataset.action = action;

    const label = document.createElement("span");
    label.className = "breakdown-label";
    label.textContent = action;
    line.appendChild(label);

    const bar = document.createElement("div");
    bar.className = "breakdown-bar";
    for (const row of rows) {
      if (row.proportion <= 0) continue;
      const seg = document.createElement("div");
      seg.className = "breakdown-seg";
      seg.dataset.step = String(row.step);
      seg.dataset.proportion = String(row.proportion);
      seg.style.width = `${(row.proportion * 100).toFixed(2)}%`;
      seg.style.background = STEP_COLORS[(row.step - 1) % STEP_COLORS.length];
      seg.title = `step ${row.step}: ${(row.proportion * 100).toFixed(1)}% (${row.count})`;
      if (row.proportion > 0.08) seg.textContent = `${row.step}`;
      bar.appendChild(seg);
    }
    line.appendChild(bar);
    container.appendChild(line);
  }

  const key = document.createElement("div");
  key.className = "breakdown-key";
  for (let step = 1; step <= data.n_steps; step++) {
    const chip = document.createElement("span");
    chip.className = "key-chip";
    chip.innerHTML =
      `<i style="background:${STEP_COLORS[(step - 1) % STEP_COLORS.length]}"></i> step ${step}`;
    key.appendChild(chip);
  }
  container.appendChild(key);
}

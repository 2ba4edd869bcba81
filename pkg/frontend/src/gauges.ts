/** KPI gauge row: one arc gauge per metric, colored exactly as the API says. */

import { Gauge, GaugeColor } from "./api.js";

export const COLOR_HEX: Record<GaugeColor, string> = {
  green: "#2e9e44",
  orange: "#e8a13c",
  red: "#d64545",
};

const LABELS: Record<string, string> = {
  starts: "Starts",
  completes: "Completes",
  scraps: "Scraps",
  idle: "Mean idle",
  duration: "Mean duration",
};

function polar(cx: number, cy: number, r: number, deg: number): [number, number] {
  const rad = (Math.PI * deg) / 180;
  return [cx + r * Math.cos(rad), cy - r * Math.sin(rad)];
}

/** Arc from 180deg (left) sweeping clockwise by `fraction` of a half turn. */
function arcPath(cx: number, cy: number, r: number, fraction: number): string {
  const end = 180 - 180 * Math.max(0, Math.min(1, fraction));
  const [x0, y0] = polar(cx, cy, r, 180);
  const [x1, y1] = polar(cx, cy, r, end);
  const large = fraction > 0.5 ? 1 : 0;
  return `M ${x0.toFixed(2)} ${y0.toFixed(2)} A ${r} ${r} 0 ${large} 1 ${x1.toFixed(2)} ${y1.toFixed(2)}`;
}

export function renderGauges(container: HTMLElement, gauges: Gauge[]): void {
  container.textContent = "";
  container.classList.add("gauge-row");
  for (const gauge of gauges) {
    const card = document.createElement("div");
    card.className = "gauge";
    card.dataset.metric = gauge.metric;
    card.dataset.color = gauge.color;

    const fraction = gauge.rank === null ? 0 : gauge.rank / 100;
    const needleDeg = 180 - 180 * fraction;
    const [nx, ny] = polar(60, 62, 44, needleDeg);
    const valueText = gauge.today === null ? "–" : gauge.today.toFixed(2);
    const rankText = gauge.rank === null ? "no rank" : `p${gauge.rank.toFixed(0)}`;

    card.innerHTML = `
      <svg viewBox="0 0 120 72" class="gauge-svg" role="img"
           aria-label="${LABELS[gauge.metric] ?? gauge.metric}: ${valueText}">
        <path class="gauge-track" d="${arcPath(60, 62, 50, 1)}"
              fill="none" stroke="#e3e3e8" stroke-width="10"/>
        <path class="gauge-arc" d="${arcPath(60, 62, 50, fraction)}"
              fill="none" stroke="${COLOR_HEX[gauge.color]}" stroke-width="10"/>
        <line class="gauge-needle" x1="60" y1="62"
              x2="${nx.toFixed(2)}" y2="${ny.toFixed(2)}"
              stroke="#444" stroke-width="2"/>
        <circle cx="60" cy="62" r="3" fill="#444"/>
      </svg>
      <div class="gauge-value">${valueText}</div>
      <div class="gauge-rank">${rankText} · ${gauge.history_n} days</div>
      <div class="gauge-label">${LABELS[gauge.metric] ?? gauge.metric}</div>
    `;
    container.appendChild(card);
  }
}

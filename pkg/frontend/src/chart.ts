/** Template-vs-today chart.
 *
 * Draws the historical band (lower..upper), the smoothed mean, and today's
 * smoothed overlay with per-bin markers.  Absent bins break the paths into
 * segments (gaps, never zeros).  Shift boundaries show as vertical lines,
 * hovering reveals bin values, the legend toggles series without refetching,
 * and the mouse wheel zooms the time axis.
 */

import { BinFlag, CompareResponse, SeriesResponse, ShiftSpec, TemplateResponse } from "./api.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface ChartGeometry {
  xOf(bin: number): number;
  yOf(value: number): number;
  upperY: (number | null)[];
  lowerY: (number | null)[];
}

export interface ChartHandle {
  geometry: ChartGeometry;
  setVisible(series: "band" | "mean" | "today", visible: boolean): void;
  zoom(loBin: number, hiBin: number): void;
  resetZoom(): void;
}

interface Margins {
  left: number;
  right: number;
  top: number;
  bottom: number;
}

const MARGIN: Margins = { left: 46, right: 12, top: 10, bottom: 26 };

function el<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number> = {},
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, String(v));
  return node;
}

function binLabel(bin: number, binMinutes: number): string {
  const minute = bin * binMinutes;
  const hh = String(Math.floor(minute / 60)).padStart(2, "0");
  const mm = String(minute % 60).padStart(2, "0");
  return `${hh}:${mm}`;
}

function minuteOf(hhmm: string): number {
  const [hh, mm] = hhmm.split(":").map(Number);
  return hh * 60 + (mm || 0);
}

/** Path over contiguous non-null runs; null values break the line. */
function gappedPath(
  values: (number | null)[],
  xOf: (i: number) => number,
  yOf: (v: number) => number,
  lo: number,
  hi: number,
): string {
  const parts: string[] = [];
  let pen = false;
  for (let i = lo; i <= hi; i++) {
    const v = values[i];
    if (v === null || v === undefined || Number.isNaN(v)) {
      pen = false;
      continue;
    }
    const cmd = pen ? "L" : "M";
    parts.push(`${cmd}${xOf(i).toFixed(2)},${yOf(v).toFixed(2)}`);
    pen = true;
  }
  return parts.join(" ");
}

export function renderChart(
  container: HTMLElement,
  template: TemplateResponse,
  series: SeriesResponse,
  compare: CompareResponse,
  shifts: ShiftSpec[],
  width = 760,
  height = 300,
): ChartHandle {
  container.textContent = "";
  const nBins = template.ma_mean.length;
  const binMinutes = template.bin_minutes;
  let viewLo = 0;
  let viewHi = nBins - 1;

  const svg = el("svg", {
    viewBox: `0 0 ${width} ${height}`,
    class: "template-chart",
  });
  svg.setAttribute("width", String(width));
  svg.setAttribute("height", String(height));
  container.appendChild(svg);

  const tooltip = document.createElement("div");
  tooltip.className = "tooltip";
  tooltip.style.display = "none";
  container.appendChild(tooltip);

  const legend = document.createElement("div");
  legend.className = "legend";
  container.appendChild(legend);

  const plot = el("g", { class: "plot" });
  svg.appendChild(plot);

  const visible = { band: true, mean: true, today: true };
  let geometry!: ChartGeometry;

  function draw(): void {
    plot.textContent = "";
    const finite: number[] = [];
    for (const arr of [template.lower, template.upper, template.ma_mean, series.smoothed]) {
      for (let i = viewLo; i <= viewHi; i++) {
        const v = arr[i];
        if (v !== null && v !== undefined && !Number.isNaN(v)) finite.push(v);
      }
    }
    const yMin = finite.length ? Math.min(...finite, 0) : 0;
    const yMax = finite.length ? Math.max(...finite) : 1;
    const pad = (yMax - yMin) * 0.06 || 0.5;
    const innerW = width - MARGIN.left - MARGIN.right;
    const innerH = height - MARGIN.top - MARGIN.bottom;
    const xOf = (bin: number): number =>
      MARGIN.left + ((bin - viewLo) / Math.max(1, viewHi - viewLo)) * innerW;
    const yOf = (v: number): number =>
      MARGIN.top + innerH - ((v - yMin + pad) / (yMax - yMin + 2 * pad)) * innerH;

    geometry = {
      xOf,
      yOf,
      upperY: template.upper.map((v) => (v === null ? null : yOf(v))),
      lowerY: template.lower.map((v) => (v === null ? null : yOf(v))),
    };

    // axes
    for (let bin = viewLo; bin <= viewHi; bin++) {
      if ((bin * binMinutes) % 240 === 0) {
        plot.appendChild(
          el("text", {
            x: xOf(bin),
            y: height - 8,
            class: "axis-label",
            "text-anchor": "middle",
          }),
        ).textContent = binLabel(bin, binMinutes);
      }
    }
    const ySteps = 4;
    for (let i = 0; i <= ySteps; i++) {
      const v = yMin + ((yMax - yMin) * i) / ySteps;
      plot.appendChild(
        el("text", {
          x: MARGIN.left - 6,
          y: yOf(v) + 3,
          class: "axis-label",
          "text-anchor": "end",
        }),
      ).textContent = v.toFixed(1);
      plot.appendChild(
        el("line", {
          x1: MARGIN.left,
          x2: width - MARGIN.right,
          y1: yOf(v),
          y2: yOf(v),
          class: "grid-line",
        }),
      );
    }

    // shift separators at shift start times
    for (const shift of shifts) {
      const bin = minuteOf(shift.start) / binMinutes;
      if (bin >= viewLo && bin <= viewHi) {
        plot.appendChild(
          el("line", {
            x1: xOf(bin),
            x2: xOf(bin),
            y1: MARGIN.top,
            y2: height - MARGIN.bottom,
            class: "shift-line",
          }),
        );
        plot.appendChild(
          el("text", {
            x: xOf(bin) + 3,
            y: MARGIN.top + 10,
            class: "shift-label",
          }),
        ).textContent = shift.name;
      }
    }

    // band: one polygon per contiguous run where both bounds exist
    const bandGroup = el("g", { class: "series-band" });
    let run: number[] = [];
    const flushRun = (): void => {
      if (run.length >= 2) {
        const top = run.map((b) => `${xOf(b).toFixed(2)},${yOf(template.upper[b] as number).toFixed(2)}`);
        const bottom = [...run]
          .reverse()
          .map((b) => `${xOf(b).toFixed(2)},${yOf(template.lower[b] as number).toFixed(2)}`);
        bandGroup.appendChild(
          el("polygon", { points: [...top, ...bottom].join(" "), class: "band" }),
        );
      }
      run = [];
    };
    for (let bin = viewLo; bin <= viewHi; bin++) {
      if (template.lower[bin] !== null && template.upper[bin] !== null) run.push(bin);
      else flushRun();
    }
    flushRun();
    plot.appendChild(bandGroup);

    // historical smoothed mean
    const meanGroup = el("g", { class: "series-mean" });
    meanGroup.appendChild(
      el("path", { d: gappedPath(template.ma_mean, xOf, yOf, viewLo, viewHi), class: "ma-mean" }),
    );
    plot.appendChild(meanGroup);

    // today's smoothed overlay with per-bin markers carrying compare flags
    const todayGroup = el("g", { class: "series-today" });
    todayGroup.appendChild(
      el("path", { d: gappedPath(series.smoothed, xOf, yOf, viewLo, viewHi), class: "today-line" }),
    );
    for (let bin = viewLo; bin <= viewHi; bin++) {
      const v = series.smoothed[bin];
      if (v === null || v === undefined || Number.isNaN(v)) continue;
      const flag: BinFlag = compare.flags[bin] ?? "no_data";
      const marker = el("circle", {
        cx: xOf(bin),
        cy: yOf(v),
        r: flag === "within" ? 2 : 3.5,
        class: `today-pt flag-${flag}`,
        "data-bin": bin,
        "data-flag": flag,
      });
      todayGroup.appendChild(marker);
    }
    plot.appendChild(todayGroup);

    for (const [name, group] of [
      ["band", bandGroup],
      ["mean", meanGroup],
      ["today", todayGroup],
    ] as const) {
      group.style.display = visible[name] ? "" : "none";
    }

    // hover overlay
    const overlay = el("rect", {
      x: MARGIN.left,
      y: MARGIN.top,
      width: innerW,
      height: innerH,
      fill: "transparent",
      class: "hover-overlay",
    });
    overlay.addEventListener("mousemove", (ev: MouseEvent) => {
      const rect = svg.getBoundingClientRect();
      const px = rect.width ? ((ev.clientX - rect.left) / rect.width) * width : MARGIN.left;
      const bin = Math.round(
        viewLo + ((px - MARGIN.left) / innerW) * (viewHi - viewLo),
      );
      if (bin < viewLo || bin > viewHi) return;
      const fmt = (v: number | null | undefined): string =>
        v === null || v === undefined || Number.isNaN(v) ? "–" : v.toFixed(2);
      tooltip.style.display = "";
      tooltip.style.left = `${Math.min(px + 12, width - 150)}px`;
      tooltip.style.top = "18px";
      tooltip.innerHTML =
        `<b>${binLabel(bin, binMinutes)}</b>` +
        `<br>today ${fmt(series.smoothed[bin])}` +
        `<br>mean ${fmt(template.ma_mean[bin])}` +
        `<br>band ${fmt(template.lower[bin])} … ${fmt(template.upper[bin])}`;
    });
    overlay.addEventListener("mouseleave", () => {
      tooltip.style.display = "none";
    });
    overlay.addEventListener("wheel", (ev: WheelEvent) => {
      ev.preventDefault();
      const span = viewHi - viewLo;
      const shrink = ev.deltaY < 0 ? Math.max(1, Math.round(span * 0.15)) : -Math.max(1, Math.round(span * 0.2));
      const lo = Math.max(0, viewLo + shrink);
      const hi = Math.min(nBins - 1, viewHi - shrink);
      if (hi - lo >= 4) {
        viewLo = lo;
        viewHi = hi;
        draw();
      }
    });
    overlay.addEventListener("dblclick", () => {
      viewLo = 0;
      viewHi = nBins - 1;
      draw();
    });
    plot.appendChild(overlay);
  }

  function renderLegend(): void {
    legend.textContent = "";
    const entries: ["band" | "mean" | "today", string][] = [
      ["band", "95% band"],
      ["mean", "MA mean"],
      ["today", "today"],
    ];
    for (const [key, label] of entries) {
      const item = document.createElement("span");
      item.className = `legend-item legend-${key}${visible[key] ? "" : " legend-off"}`;
      item.textContent = label;
      item.addEventListener("click", () => {
        visible[key] = !visible[key];
        item.classList.toggle("legend-off", !visible[key]);
        const group = svg.querySelector<SVGGElement>(`.series-${key}`);
        if (group) group.style.display = visible[key] ? "" : "none";
      });
      legend.appendChild(item);
    }
  }

  draw();
  renderLegend();

  return {
    get geometry() {
      return geometry;
    },
    setVisible(name, on) {
      visible[name] = on;
      const group = svg.querySelector<SVGGElement>(`.series-${name}`);
      if (group) group.style.display = on ? "" : "none";
    },
    zoom(loBin, hiBin) {
      viewLo = Math.max(0, loBin);
      viewHi = Math.min(nBins - 1, hiBin);
      draw();
    },
    resetZoom() {
      viewLo = 0;
      viewHi = nBins - 1;
      draw();
    },
  };
}

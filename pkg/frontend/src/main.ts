/** Dashboard bootstrap: build controls from /meta, wire state to renderers. */

import { ApiClient, MetaResponse, Selection } from "./api.js";
import { renderBreakdown } from "./breakdown.js";
import { renderChart } from "./chart.js";
import { renderGauges } from "./gauges.js";
import { DashboardStore } from "./state.js";

function option(value: string, label?: string): HTMLOptionElement {
  const opt = document.createElement("option");
  opt.value = value;
  opt.textContent = label ?? value;
  return opt;
}

function buildControls(
  root: HTMLElement,
  meta: MetaResponse,
  initial: Selection,
  onChange: (partial: Partial<Selection>) => void,
): void {
  const bar = document.createElement("div");
  bar.className = "controls";

  const dateSel = document.createElement("select");
  dateSel.id = "sel-date";
  for (const d of meta.dates) dateSel.appendChild(option(d));
  dateSel.value = initial.date;
  dateSel.addEventListener("change", () => onChange({ date: dateSel.value }));

  const compSel = document.createElement("select");
  compSel.id = "sel-comparison";
  compSel.appendChild(option("all", "vs all days"));
  compSel.appendChild(option("same_weekday", "vs same weekday"));
  compSel.value = initial.comparison;
  compSel.addEventListener("change", () =>
    onChange({ comparison: compSel.value as Selection["comparison"] }),
  );

  const stepSel = document.createElement("select");
  stepSel.id = "sel-step";
  for (const s of meta.steps) stepSel.appendChild(option(String(s), `step ${s}`));
  stepSel.value = String(initial.step);
  stepSel.addEventListener("change", () => onChange({ step: Number(stepSel.value) }));

  const quantitySel = document.createElement("select");
  quantitySel.id = "sel-quantity";
  for (const q of meta.quantities) quantitySel.appendChild(option(q));
  quantitySel.value = initial.quantity;
  quantitySel.addEventListener("change", () => onChange({ quantity: quantitySel.value }));

  for (const [label, select] of [
    ["date", dateSel],
    ["comparison", compSel],
    ["process step", stepSel],
    ["chart quantity", quantitySel],
  ] as const) {
    const wrap = document.createElement("label");
    wrap.className = "control";
    wrap.textContent = label;
    wrap.appendChild(select);
    bar.appendChild(wrap);
  }
  root.appendChild(bar);
}

export async function boot(root: HTMLElement, baseUrl = ""): Promise<DashboardStore> {
  const api = new ApiClient(baseUrl);
  const meta = await api.meta();

  const initial: Selection = {
    date: meta.dates[meta.dates.length - 1] ?? "",
    step: meta.steps[0] ?? 1,
    comparison: "all",
    quantity: "starts",
  };

  root.textContent = "";
  const store = new DashboardStore(api, initial);
  buildControls(root, meta, initial, (partial) => store.set(partial));

  const errorBox = document.createElement("div");
  errorBox.className = "error-box";
  errorBox.style.display = "none";
  root.appendChild(errorBox);

  const gaugeBox = document.createElement("div");
  gaugeBox.id = "gauges";
  root.appendChild(gaugeBox);

  const chartBox = document.createElement("div");
  chartBox.id = "chart";
  chartBox.className = "chart-box";
  root.appendChild(chartBox);

  const breakdownBox = document.createElement("div");
  breakdownBox.id = "breakdown";
  root.appendChild(breakdownBox);

  store.subscribe((data) => {
    if (data.error) {
      errorBox.style.display = "";
      errorBox.textContent = data.error;
      return;
    }
    errorBox.style.display = "none";
    if (data.kpis) renderGauges(gaugeBox, data.kpis.gauges);
    if (data.template && data.series && data.compare) {
      renderChart(chartBox, data.template, data.series, data.compare, meta.config.shifts);
    }
  });
  store.subscribeBreakdown((data) => renderBreakdown(breakdownBox, data));

  await store.refresh();
  await store.refreshBreakdown();
  store.startPolling();
  return store;
}

declare global {
  interface Window {
    mesviewBoot?: typeof boot;
  }
}

if (typeof window !== "undefined") {
  window.mesviewBoot = boot;
  const root = document.getElementById("app");
  if (root) {
    void boot(root).catch((err) => {
      root.textContent = `failed to load dashboard: ${err}`;
    });
  }
}

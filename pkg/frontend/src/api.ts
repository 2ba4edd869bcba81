/** Typed client for the analytics JSON API. The UI never computes metrics:
 *  every number on screen comes straight from one of these payloads. */

export type GaugeColor = "green" | "orange" | "red";

export interface Gauge {
  metric: string;
  today: number | null;
  rank: number | null;
  color: GaugeColor;
  history_n: number;
}

export interface KpisResponse {
  date: string;
  step: number;
  comparison: string;
  kpis: {
    starts: number | null;
    completes: number | null;
    scraps: number | null;
    mean_idle: number | null;
    mean_duration: number | null;
  };
  gauges: Gauge[];
}

export interface TemplateResponse {
  step: number;
  quantity: string;
  comparison: string;
  n_dates: number;
  bin_minutes: number;
  ma_mean: (number | null)[];
  lower: (number | null)[];
  upper: (number | null)[];
  support: number[];
}

export interface SeriesResponse {
  date: string;
  step: number;
  quantity: string;
  bin_minutes: number;
  raw: (number | null)[];
  smoothed: (number | null)[];
}

export type BinFlag = "below" | "within" | "above" | "no_data";

export interface CompareResponse {
  date: string;
  step: number;
  quantity: string;
  comparison: string;
  flags: BinFlag[];
  exceedance_fraction: number;
  n_data_bins: number;
}

export interface BreakdownRow {
  step: number;
  action: string;
  count: number;
  proportion: number;
}

export interface BreakdownResponse {
  n_steps: number;
  rows: BreakdownRow[];
}

export interface ShiftSpec {
  name: string;
  start: string; // HH:MM
  end: string;
}

export interface MetaResponse {
  steps: number[];
  n_events: number;
  date_range: { start: string | null; end: string | null };
  dates: string[];
  quantities: string[];
  gauge_order: string[];
  config: {
    bin_minutes: number;
    ma_order: number;
    lower_pct: number;
    upper_pct: number;
    timezone: string;
    shifts: ShiftSpec[];
    thresholds: Record<string, number>;
    [key: string]: unknown;
  };
}

export interface Selection {
  date: string;
  step: number;
  comparison: "all" | "same_weekday";
  quantity: string;
}

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`API ${status}: ${detail}`);
  }
}

export class ApiClient {
  constructor(private base = "") {}

  private async get<T>(path: string, params?: Record<string, string | number>): Promise<T> {
    let url = this.base + path;
    if (params) {
      const qs = Object.entries(params)
        .map(([k, v]) => `${k}=${encodeURIComponent(String(v))}`)
        .join("&");
      url += `?${qs}`;
    }
    const resp = await fetch(url);
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const body = (await resp.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  meta(): Promise<MetaResponse> {
    return this.get("/meta");
  }

  kpis(sel: Selection): Promise<KpisResponse> {
    return this.get("/kpis", { date: sel.date, step: sel.step, comparison: sel.comparison });
  }

  template(sel: Selection): Promise<TemplateResponse> {
    const params: Record<string, string | number> = {
      step: sel.step,
      quantity: sel.quantity,
      comparison: sel.comparison,
    };
    // same_weekday resolves against the selected date's weekday
    if (sel.comparison === "same_weekday") params.date = sel.date;
    return this.get("/template", params);
  }

  series(sel: Selection): Promise<SeriesResponse> {
    return this.get("/series", { date: sel.date, step: sel.step, quantity: sel.quantity });
  }

  compare(sel: Selection): Promise<CompareResponse> {
    return this.get("/compare", {
      date: sel.date,
      step: sel.step,
      quantity: sel.quantity,
      comparison: sel.comparison,
    });
  }

  breakdown(): Promise<BreakdownResponse> {
    return this.get("/breakdown");
  }
}

/** Selection state and fetch orchestration.
 *
 * Every selection change triggers exactly one refetch of each
 * selection-dependent endpoint (kpis, template, series, compare); stale
 * responses are dropped when a newer selection supersedes them.  The
 * breakdown is store-wide and only refreshes at boot and on the polling
 * tick.
 */

import {
  ApiClient,
  ApiError,
  BreakdownResponse,
  CompareResponse,
  KpisResponse,
  Selection,
  SeriesResponse,
  TemplateResponse,
} from "./api.js";

export interface DashboardData {
  selection: Selection;
  kpis?: KpisResponse;
  template?: TemplateResponse;
  series?: SeriesResponse;
  compare?: CompareResponse;
  error?: string;
}

export type Listener = (data: DashboardData) => void;
export type BreakdownListener = (data: BreakdownResponse) => void;

export const DEFAULT_POLL_MS = 30_000;

export class DashboardStore {
  private listeners: Listener[] = [];
  private breakdownListeners: BreakdownListener[] = [];
  private version = 0;
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(private api: ApiClient, public selection: Selection) {}

  subscribe(fn: Listener): void {
    this.listeners.push(fn);
  }

  subscribeBreakdown(fn: BreakdownListener): void {
    this.breakdownListeners.push(fn);
  }

  /** Update the selection; any actual change refetches once. */
  set(partial: Partial<Selection>): void {
    const next = { ...this.selection, ...partial };
    const changed =
      next.date !== this.selection.date ||
      next.step !== this.selection.step ||
      next.comparison !== this.selection.comparison ||
      next.quantity !== this.selection.quantity;
    this.selection = next;
    if (changed) void this.refresh();
  }

  async refresh(): Promise<void> {
    const version = ++this.version;
    const selection = { ...this.selection };
    try {
      const [kpis, template, series, compare] = await Promise.all([
        this.api.kpis(selection),
        this.api.template(selection),
        this.api.series(selection),
        this.api.compare(selection),
      ]);
      if (version !== this.version) return; // superseded
      this.emit({ selection, kpis, template, series, compare });
    } catch (err) {
      if (version !== this.version) return;
      const message =
        err instanceof ApiError && err.status === 422
          ? `insufficient history: ${err.detail}`
          : String(err instanceof Error ? err.message : err);
      this.emit({ selection, error: message });
    }
  }

  async refreshBreakdown(): Promise<void> {
    const data = await this.api.breakdown();
    for (const fn of this.breakdownListeners) fn(data);
  }

  startPolling(intervalMs = DEFAULT_POLL_MS): void {
    this.stopPolling();
    this.timer = setInterval(() => {
      void this.refresh();
      void this.refreshBreakdown();
    }, intervalMs);
  }

  stopPolling(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  private emit(data: DashboardData): void {
    for (const fn of this.listeners) fn(data);
  }
}

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { vi } from "vitest";

import type {
  BreakdownResponse,
  CompareResponse,
  KpisResponse,
  MetaResponse,
  SeriesResponse,
  TemplateResponse,
} from "../src/api.js";

const here = dirname(fileURLToPath(import.meta.url));

export interface StoreFixture {
  selections: { date: string; step: number; comparison: string; key: string }[];
  chart: { date: string; step: number; quantity: string; comparison: string };
  sparse_chart: { date: string; step: number; quantity: string; comparison: string };
  responses: Record<string, unknown>;
}

export const STORE: StoreFixture = JSON.parse(
  readFileSync(join(here, "fixtures", "store.json"), "utf-8"),
);

/** Origin stripped, query keys sorted, so lookup ignores parameter order. */
export function normalizeUrl(url: string): string {
  const noOrigin = url.replace(/^https?:\/\/[^/]+/, "");
  const [path, qs] = noOrigin.split("?");
  if (!qs) return path;
  const params = qs.split("&").sort();
  return `${path}?${params.join("&")}`;
}

const FIXTURE_MAP = new Map<string, unknown>(
  Object.entries(STORE.responses).map(([k, v]) => [normalizeUrl(k), v]),
);

export interface FetchMock {
  calls: string[];
  countFor(path: string): number;
  addOverride(url: string, status: number, body: unknown): void;
  restore(): void;
}

/** Install a fetch stub backed by the captured API fixtures. */
export function installFetchMock(): FetchMock {
  const calls: string[] = [];
  const overrides = new Map<string, { status: number; body: unknown }>();
  const stub = vi.fn(async (input: RequestInfo | URL): Promise<Response> => {
    const url = String(input);
    calls.push(url);
    const key = normalizeUrl(url);
    const override = overrides.get(key);
    if (override) {
      return new Response(JSON.stringify(override.body), {
        status: override.status,
        headers: { "content-type": "application/json" },
      });
    }
    const body = FIXTURE_MAP.get(key);
    if (body === undefined) {
      return new Response(JSON.stringify({ detail: `no fixture for ${key}` }), {
        status: 404,
        headers: { "content-type": "application/json" },
      });
    }
    return new Response(JSON.stringify(body), {
      status: 200,
      headers: { "content-type": "application/json" },
    });
  });
  vi.stubGlobal("fetch", stub);
  return {
    calls,
    countFor: (path: string) => calls.filter((u) => u.split("?")[0] === path).length,
    addOverride: (url, status, body) => {
      overrides.set(normalizeUrl(url), { status, body });
    },
    restore: () => vi.unstubAllGlobals(),
  };
}

export function fixture<T>(key: string): T {
  const body = FIXTURE_MAP.get(normalizeUrl(key));
  if (body === undefined) throw new Error(`missing fixture ${key}`);
  return body as T;
}

export const META = fixture<MetaResponse>("/meta");

export function chartFixtures(which: "chart" | "sparse_chart" = "chart"): {
  template: TemplateResponse;
  series: SeriesResponse;
  compare: CompareResponse;
} {
  const sel = STORE[which];
  return {
    template: fixture<TemplateResponse>(
      `/template?step=${sel.step}&quantity=${sel.quantity}&comparison=${sel.comparison}`,
    ),
    series: fixture<SeriesResponse>(
      `/series?date=${sel.date}&step=${sel.step}&quantity=${sel.quantity}`,
    ),
    compare: fixture<CompareResponse>(
      `/compare?date=${sel.date}&step=${sel.step}&quantity=${sel.quantity}&comparison=${sel.comparison}`,
    ),
  };
}

export type { KpisResponse, BreakdownResponse };

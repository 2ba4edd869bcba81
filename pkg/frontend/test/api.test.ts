import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { installFetchMock } from "./helpers.js";

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("api client", () => {
  it("builds the endpoint URLs the server expects", async () => {
    const mock = installFetchMock();
    const api = new ApiClient();
    await api.kpis({ date: "2020-03-03", step: 1, comparison: "all", quantity: "starts" });
    expect(mock.calls[0]).toBe("/kpis?date=2020-03-03&step=1&comparison=all");
    await api.series({ date: "2020-03-14", step: 1, comparison: "all", quantity: "starts" });
    expect(mock.calls[1]).toBe("/series?date=2020-03-14&step=1&quantity=starts");
  });

  it("passes the date through for same_weekday templates only", async () => {
    const mock = installFetchMock();
    const api = new ApiClient();
    await api
      .template({ date: "2020-03-04", step: 1, comparison: "all", quantity: "starts" })
      .catch(() => undefined);
    expect(mock.calls[0]).not.toContain("date=");
    await api
      .template({
        date: "2020-03-04", step: 1, comparison: "same_weekday", quantity: "starts",
      })
      .catch(() => undefined);
    expect(mock.calls[1]).toContain("date=2020-03-04");
  });

  it("raises a typed error carrying the API detail", async () => {
    const mock = installFetchMock();
    mock.addOverride("/kpis?date=2020-01-01&step=1&comparison=all", 422, {
      detail: "no historical days",
    });
    const api = new ApiClient();
    const err = await api
      .kpis({ date: "2020-01-01", step: 1, comparison: "all", quantity: "starts" })
      .then(() => null)
      .catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBe(422);
    expect((err as ApiError).detail).toBe("no historical days");
  });

  it("prefixes a configured base URL", async () => {
    const mock = installFetchMock();
    const api = new ApiClient("http://localhost:8077");
    await api.breakdown();
    expect(mock.calls[0]).toBe("http://localhost:8077/breakdown");
  });
});

import { describe, expect, it } from "vitest";

import {
  ActionRejection,
  Api,
  ConflictRejection,
  ServiceUnreachable,
} from "../src/api.js";

interface Call {
  url: string;
  init: RequestInit;
}

function stub(status: number, payload: unknown, calls: Call[] = []): {
  api: Api;
  calls: Call[];
} {
  const fetchFn = (async (url: RequestInfo | URL, init?: RequestInit) => {
    calls.push({ url: String(url), init: init ?? {} });
    return {
      ok: status >= 200 && status < 300,
      status,
      json: async () => {
        if (payload === undefined) {
          throw new Error("no body");
        }
        return payload;
      },
    } as Response;
  }) as typeof fetch;
  return { api: new Api("/api/v1", fetchFn), calls };
}

describe("service client", () => {
  it("asks the right endpoints with the right bodies", async () => {
    const { api, calls } = stub(200, { models: [] });
    await api.listModels();
    await api.getState("s-1");
    await api.select("s-1", "java");
    await api.exclude("s-1", "3d graphics");
    await api.undo("s-1");
    await api.complete("s-1");
    expect(
      calls.map((call) => [call.url, call.init.method, call.init.body ?? null]),
    ).toEqual([
      ["/api/v1/models", "GET", null],
      ["/api/v1/sessions/s-1", "GET", null],
      ["/api/v1/sessions/s-1/select", "POST", '{"item":"java"}'],
      ["/api/v1/sessions/s-1/exclude", "POST", '{"item":"3d graphics"}'],
      ["/api/v1/sessions/s-1/undo", "POST", null],
      ["/api/v1/sessions/s-1/complete", "POST", null],
    ]);
  });

  it("returns response payloads verbatim", async () => {
    const created = { session: "s-9", model: "figure2", undecided: 18 };
    const { api } = stub(201, created);
    expect(await api.createSession("figure2")).toEqual(created);
  });

  it("turns a 409 into a conflict with both chains attached", async () => {
    const body = {
      error: {
        code: "Conflict",
        message: "rolled back",
        item: "java",
        selected_by: { item: "java", state: "selected", rule: "R1", premises: [] },
        notselected_by: {
          item: "java",
          state: "notselected",
          rule: "R12",
          premises: ["c++"],
        },
        conflicts: [],
      },
    };
    const { api } = stub(409, body);
    const failure = await api.select("s-1", "3d graphics").catch((e) => e);
    expect(failure).toBeInstanceOf(ConflictRejection);
    expect(failure.body).toEqual(body);
  });

  it("turns other 4xx answers into plain rejections", async () => {
    const { api } = stub(422, {
      error: { code: "AlreadyDecided", message: "no takebacks" },
    });
    const failure = await api.select("s-1", "methodology").catch((e) => e);
    expect(failure).toBeInstanceOf(ActionRejection);
    expect(failure.code).toBe("AlreadyDecided");
    expect(failure.status).toBe(422);
  });

  it("treats server faults and dead sockets as retryable", async () => {
    const broken = stub(500, { error: { code: "boom", message: "?" } });
    await expect(broken.api.listModels()).rejects.toBeInstanceOf(ServiceUnreachable);

    const silent = stub(502, undefined);
    await expect(silent.api.listModels()).rejects.toBeInstanceOf(ServiceUnreachable);

    const dead = new Api("/api/v1", (async () => {
      throw new TypeError("fetch failed");
    }) as typeof fetch);
    await expect(dead.listModels()).rejects.toBeInstanceOf(ServiceUnreachable);
  });
});

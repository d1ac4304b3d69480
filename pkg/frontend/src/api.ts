import type {
  CompletionReport,
  ConflictBody,
  DeltaView,
  ErrorBody,
  ModelsList,
  SessionCreated,
  StateView,
} from "./types.js";

/** The service refused the action and rolled it back (409). */
export class ConflictRejection extends Error {
  constructor(readonly body: ConflictBody) {
    super(body.error.message);
  }
}

/** Domain rejection (404/422): retrying the same request cannot succeed. */
export class ActionRejection extends Error {
  readonly code: string;

  constructor(readonly status: number, readonly body: ErrorBody) {
    super(body.error.message);
    this.code = body.error.code;
  }
}

/** Network failure or server fault; the same request may work on retry. */
export class ServiceUnreachable extends Error {}

async function decode(response: Response): Promise<unknown> {
  try {
    return await response.json();
  } catch {
    return null;
  }
}

export class Api {
  constructor(
    private readonly base: string = "/api/v1",
    private readonly fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {}

  private async call<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.base + path, {
        method,
        headers: body === undefined ? {} : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch {
      throw new ServiceUnreachable("the service did not answer");
    }
    const payload = await decode(response);
    if (response.ok) {
      return payload as T;
    }
    if (response.status === 409) {
      throw new ConflictRejection(payload as ConflictBody);
    }
    if (response.status >= 400 && response.status < 500 && payload !== null) {
      throw new ActionRejection(response.status, payload as ErrorBody);
    }
    throw new ServiceUnreachable(`the service answered ${response.status}`);
  }

  listModels(): Promise<ModelsList> {
    return this.call("GET", "/models");
  }

  createSession(model: string): Promise<SessionCreated> {
    return this.call("POST", "/sessions", { model });
  }

  getState(session: string): Promise<StateView> {
    return this.call("GET", `/sessions/${encodeURIComponent(session)}`);
  }

  select(session: string, item: string): Promise<DeltaView> {
    return this.call("POST", `/sessions/${encodeURIComponent(session)}/select`, {
      item,
    });
  }

  exclude(session: string, item: string): Promise<DeltaView> {
    return this.call("POST", `/sessions/${encodeURIComponent(session)}/exclude`, {
      item,
    });
  }

  undo(session: string): Promise<DeltaView> {
    return this.call("POST", `/sessions/${encodeURIComponent(session)}/undo`);
  }

  complete(session: string): Promise<CompletionReport> {
    return this.call("POST", `/sessions/${encodeURIComponent(session)}/complete`);
  }
}

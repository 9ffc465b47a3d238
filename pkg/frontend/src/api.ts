/**
 * Gateway API client. All data flows through the HTTP API; each client
 * enforces a per-role endpoint allowlist so a trainee-facing bundle can
 * never request supervisor endpoints. Live refresh uses the server-sent
 * event stream with a 2-second polling fallback.
 */

import type { RefreshNotice, Role } from "./types.js";

export class EndpointForbiddenError extends Error {}
export class RoleForbiddenError extends Error {}
export class RunStillOpenError extends Error {}
export class GatewayError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

interface EndpointRule {
  method: string;
  pattern: RegExp;
}

const rule = (method: string, pattern: RegExp): EndpointRule => ({ method, pattern });

const COMMON: EndpointRule[] = [
  rule("GET", /^\/runs\/[^/]+\/view$/),
  rule("GET", /^\/runs\/[^/]+\/stream$/),
  rule("GET", /^\/runs\/[^/]+\/scoreboard$/),
];

/**
 * What each role's bundle may call. Trainees get their view, the
 * scoreboard, their own feedback, the stream, and event posting (own
 * actions and poll answers); everything else is organizer surface.
 */
export const ROLE_ENDPOINTS: Record<Role, EndpointRule[]> = {
  trainee: [
    ...COMMON,
    rule("GET", /^\/runs\/[^/]+\/feedback\/[^/]+$/),
    rule("POST", /^\/runs\/[^/]+\/events$/),
  ],
  sparring_partner: [
    ...COMMON,
    rule("POST", /^\/runs\/[^/]+\/events$/),
    rule("GET", /^\/runs\/[^/]+\/definition$/),
    rule("GET", /^\/runs\/[^/]+\/alerts$/),
  ],
  supervisor: [
    ...COMMON,
    rule("POST", /^\/runs\/[^/]+\/events$/),
    rule("GET", /^\/runs\/[^/]+\/feedback\/[^/]+$/),
    rule("GET", /^\/runs\/[^/]+\/definition$/),
    rule("GET", /^\/runs\/[^/]+\/alerts$/),
    rule("POST", /^\/runs\/[^/]+\/close$/),
  ],
  operator: [
    ...COMMON,
    rule("POST", /^\/runs\/[^/]+\/events$/),
    rule("GET", /^\/runs\/[^/]+\/definition$/),
    rule("GET", /^\/runs\/[^/]+\/alerts$/),
    rule("POST", /^\/runs\/[^/]+\/close$/),
  ],
};

export interface Subscription {
  stop(): void;
}

export class GatewayClient {
  constructor(
    public readonly baseUrl: string,
    public readonly runId: string,
    public readonly actorId: string,
    public readonly role: Role,
    private readonly token: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private guard(method: string, path: string): void {
    const allowed = ROLE_ENDPOINTS[this.role] ?? [];
    if (!allowed.some((r) => r.method === method && r.pattern.test(path))) {
      throw new EndpointForbiddenError(
        `${this.role} bundle may not call ${method} ${path}`);
    }
  }

  private async request(method: string, path: string, query?: Record<string, string>,
                        body?: unknown): Promise<unknown> {
    this.guard(method, path);
    const url = new URL(this.baseUrl + path);
    for (const [k, v] of Object.entries(query ?? {})) url.searchParams.set(k, v);
    const resp = await this.fetchImpl(url.toString(), {
      method,
      headers: {
        "Authorization": `Bearer ${this.token}`,
        ...(body !== undefined ? { "Content-Type": "application/json" } : {}),
      },
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    if (resp.status === 409) throw new RunStillOpenError(await resp.text());
    if (!resp.ok) throw new GatewayError(resp.status, await resp.text());
    return resp.json();
  }

  view(asOf?: number): Promise<unknown> {
    const query: Record<string, string> = { role: this.role, actor: this.actorId };
    if (asOf !== undefined) query.as_of = String(asOf);
    return this.request("GET", `/runs/${this.runId}/view`, query);
  }

  scoreboard(): Promise<unknown> {
    return this.request("GET", `/runs/${this.runId}/scoreboard`);
  }

  alerts(): Promise<unknown> {
    return this.request("GET", `/runs/${this.runId}/alerts`);
  }

  feedback(actor: string): Promise<unknown> {
    return this.request("GET", `/runs/${this.runId}/feedback/${actor}`);
  }

  definition(): Promise<unknown> {
    return this.request("GET", `/runs/${this.runId}/definition`);
  }

  postEvent(actorId: string, timestamp: number, payload: Record<string, unknown>):
      Promise<unknown> {
    return this.request("POST", `/runs/${this.runId}/events`, undefined,
                        { actor_id: actorId, timestamp, payload });
  }

  closeRun(endTime: number): Promise<unknown> {
    return this.request("POST", `/runs/${this.runId}/close`, undefined,
                        { end_time: endTime });
  }

  /** Answer the per-dot feedback poll shown on the personalized view. */
  answerPoll(questionnaireId: string, answers: Record<string, unknown>):
      Promise<unknown> {
    return this.postEvent(this.actorId, Date.now() / 1000, {
      kind: "QuestionnaireAnswered",
      questionnaire_id: questionnaireId,
      answers,
    });
  }

  /**
   * Live refresh. Prefers the SSE stream; if it cannot be established or
   * drops, falls back to polling every `pollMs` (default 2000 ms), in
   * which case the callback receives an empty notice per tick.
   */
  subscribe(onNotice: (notice: RefreshNotice) => void,
            opts: { pollMs?: number } = {}): Subscription {
    this.guard("GET", `/runs/${this.runId}/stream`);
    const pollMs = opts.pollMs ?? 2000;
    let stopped = false;
    let pollTimer: ReturnType<typeof setInterval> | null = null;
    const controller = new AbortController();

    const startPolling = () => {
      if (stopped || pollTimer !== null) return;
      pollTimer = setInterval(() => onNotice({}), pollMs);
    };

    const consume = async () => {
      try {
        const resp = await this.fetchImpl(
          `${this.baseUrl}/runs/${this.runId}/stream`, {
            headers: { "Authorization": `Bearer ${this.token}` },
            signal: controller.signal,
          });
        if (!resp.ok || resp.body === null) {
          startPolling();
          return;
        }
        const reader = resp.body.getReader();
        const decoder = new TextDecoder();
        let buffer = "";
        for (;;) {
          const { done, value } = await reader.read();
          if (done || stopped) break;
          buffer += decoder.decode(value, { stream: true });
          let idx;
          while ((idx = buffer.indexOf("\n\n")) >= 0) {
            const frame = buffer.slice(0, idx);
            buffer = buffer.slice(idx + 2);
            const data = frame.split("\n").find((l) => l.startsWith("data:"));
            if (data && frame.includes("event: refresh")) {
              onNotice(JSON.parse(data.slice(5).trim()) as RefreshNotice);
            }
          }
        }
        if (!stopped) startPolling();
      } catch {
        if (!stopped) startPolling();
      }
    };
    void consume();

    return {
      stop() {
        stopped = true;
        controller.abort();
        if (pollTimer !== null) clearInterval(pollTimer);
      },
    };
  }
}

/** True when a refresh notice names this client's channel. */
export function noticeConcerns(notice: RefreshNotice, role: Role,
                               actorId: string): boolean {
  if (!notice.channels) return true; // poll tick or close: refresh anyway
  return notice.channels.some(([r, a]) => r === role && a === actorId);
}

/**
 * Record a supervisor note to a trainee. Client-side validation rejects
 * empty notes and non-supervisor callers before anything goes on the
 * wire; the note lands in the log as a MessageSent user action and the
 * target's view refreshes through the push channel.
 */
export async function submitIntervention(client: GatewayClient, targetActor: string,
                                         note: string): Promise<unknown> {
  if (client.role !== "supervisor") {
    throw new RoleForbiddenError("only supervisors may send interventions");
  }
  if (note.trim() === "") {
    throw new Error("intervention note must not be empty");
  }
  return client.postEvent(client.actorId, Date.now() / 1000, {
    kind: "MessageSent",
    to_actor_id: targetActor,
    text: note,
  });
}

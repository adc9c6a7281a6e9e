// The documented audit-service endpoints, nothing more.

export interface ApiReply {
  ok: boolean;
  status: number;
  text: string;
  detail: string | null;
}

async function reply(response: Response): Promise<ApiReply> {
  const text = await response.text();
  let detail: string | null = null;
  if (!response.ok) {
    try {
      detail = JSON.parse(text).detail ?? text;
    } catch {
      detail = text;
    }
  }
  return { ok: response.ok, status: response.status, text, detail };
}

export class Api {
  constructor(private baseUrl: string, private token: string | null = null) {}

  private headers(withBody: boolean): Record<string, string> {
    const h: Record<string, string> = {};
    if (withBody) h["Content-Type"] = "application/json";
    if (this.token) h["Authorization"] = `Bearer ${this.token}`;
    return h;
  }

  async createSession(policy: string, schema?: string): Promise<ApiReply> {
    return reply(await fetch(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: this.headers(true),
      body: JSON.stringify(schema ? { policy, schema } : { policy }),
    }));
  }

  async ingest(sessionId: string, lines: string[]): Promise<ApiReply> {
    return reply(await fetch(`${this.baseUrl}/sessions/${sessionId}/logs`, {
      method: "POST",
      headers: this.headers(true),
      body: JSON.stringify({ lines }),
    }));
  }

  async iterate(sessionId: string): Promise<ApiReply> {
    return reply(await fetch(`${this.baseUrl}/sessions/${sessionId}/iterate`, {
      method: "POST",
      headers: this.headers(false),
    }));
  }

  async report(sessionId: string): Promise<ApiReply> {
    return reply(await fetch(`${this.baseUrl}/sessions/${sessionId}/report`, {
      headers: this.headers(false),
    }));
  }

  async assert(
    sessionId: string, atom: string, value: "tt" | "ff", justification: string,
  ): Promise<ApiReply> {
    return reply(await fetch(`${this.baseUrl}/sessions/${sessionId}/assertions`, {
      method: "POST",
      headers: this.headers(true),
      body: JSON.stringify({ atom, value, justification }),
    }));
  }
}

// The workbench controller: holds the last server reply verbatim and renders
// from it. Optimistic updates are view-only patches that are replaced by the
// server's reply on success and reverted on error; the engine's semantics
// are never re-implemented here.

import { Api } from "./api.js";
import { Report, validateReport } from "./model.js";
import { renderResidual } from "./render.js";

export interface WorkbenchState {
  sessionId: string | null;
  /** The raw text of the last accepted server reply; the source of truth. */
  reportText: string | null;
  /** A transient view-only patch shown while a write is in flight. */
  optimisticText: string | null;
  error: string | null;
  inFlight: Set<string>;
}

function parseReport(text: string): unknown {
  try {
    return JSON.parse(text);
  } catch {
    return { unparseable: text };
  }
}

/** Drop one atom from the pending list and unmark it in the tree. */
export function withAtomDischargedLocally(report: Report, atom: string): Report {
  const clone = JSON.parse(JSON.stringify(report)) as Report;
  clone.pending = clone.pending.filter((p) => p.atom !== atom);
  const unmark = (node: any): void => {
    if (node.node === "atom" && node.text === atom) node.pending = false;
    if (node.parts) node.parts.forEach(unmark);
    if (node.guard) unmark(node.guard);
    if (node.body) unmark(node.body);
  };
  unmark(clone.residual.ast);
  return clone;
}

export class Workbench {
  state: WorkbenchState = {
    sessionId: null,
    reportText: null,
    optimisticText: null,
    error: null,
    inFlight: new Set(),
  };

  constructor(private api: Api) {}

  report(): Report | null {
    const text = this.state.optimisticText ?? this.state.reportText;
    if (text === null) return null;
    const payload = parseReport(text);
    return validateReport(payload).length ? null : (payload as Report);
  }

  html(): string {
    const text = this.state.optimisticText ?? this.state.reportText;
    const error = this.state.error
      ? `<div class="banner banner-error" data-banner="error">${escapeHtml(this.state.error)}</div>`
      : "";
    if (text === null) {
      return error + `<div class="empty">No session loaded.</div>`;
    }
    return error + renderResidual(parseReport(text));
  }

  async load(sessionId: string): Promise<void> {
    const reply = await this.api.report(sessionId);
    if (!reply.ok) {
      this.state.error = reply.detail;
      return;
    }
    this.state.sessionId = sessionId;
    this.state.reportText = reply.text;
    this.state.optimisticText = null;
    this.state.error = null;
  }

  pendingAtoms(): string[] {
    return (this.report()?.pending ?? []).map((p) => p.atom);
  }

  async submitAssertion(
    atom: string, value: "tt" | "ff", justification: string,
  ): Promise<boolean> {
    const sessionId = this.state.sessionId;
    if (!sessionId || this.state.reportText === null) {
      this.state.error = "no session loaded";
      return false;
    }
    if (!justification.trim()) {
      this.state.error = "a justification is required before asserting";
      return false;
    }
    // A repeat of an already-recorded decision is the server's call: it
    // answers idempotently, and contradiction/unknown-atom errors come back
    // verbatim. Only rapid double-clicks are absorbed here.
    const flightKey = `${atom}=${value}`;
    if (this.state.inFlight.has(flightKey)) {
      return true; // a double submit rides along with the in-flight request
    }
    this.state.inFlight.add(flightKey);
    const before = this.state.reportText;
    const current = this.report();
    if (current) {
      this.state.optimisticText = JSON.stringify(
        withAtomDischargedLocally(current, atom));
    }
    try {
      const reply = await this.api.assert(sessionId, atom, value, justification);
      if (!reply.ok) {
        this.state.reportText = before;
        this.state.optimisticText = null;
        this.state.error = reply.detail; // surfaced verbatim
        return false;
      }
      this.state.reportText = reply.text;
      this.state.optimisticText = null;
      this.state.error = null;
      return true;
    } finally {
      this.state.inFlight.delete(flightKey);
    }
  }

  async iterate(): Promise<boolean> {
    const sessionId = this.state.sessionId;
    if (!sessionId) {
      this.state.error = "no session loaded";
      return false;
    }
    const reply = await this.api.iterate(sessionId);
    if (!reply.ok) {
      this.state.error = reply.detail;
      return false;
    }
    this.state.reportText = reply.text;
    this.state.optimisticText = null;
    this.state.error = null;
    return true;
  }

  /** Re-fetch the report; the rendered view must not change if no one wrote. */
  async refresh(): Promise<void> {
    if (this.state.sessionId) await this.load(this.state.sessionId);
  }
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

// Types for the session report served by the audit service, plus a structural
// validator mirroring fixtures/report.schema.json. The workbench never
// interprets formulas itself; these types only describe the payload.

export type Term =
  | number
  | string
  | Term[]
  | { fn: string; args: Term[] }
  | { var: string; plus?: number };

export interface AtomNode {
  node: "atom";
  pred: string;
  kind: "objective" | "subjective";
  args: Term[];
  text: string;
  pending?: boolean;
}

export interface BinaryNode {
  node: "and" | "or";
  parts: [FormulaNode, FormulaNode];
}

export interface QuantifierNode {
  node: "forall" | "exists";
  vars: string[];
  guard: FormulaNode;
  body: FormulaNode;
  excluded: Term[][];
}

export type FormulaNode =
  | { node: "top" }
  | { node: "bot" }
  | AtomNode
  | BinaryNode
  | QuantifierNode;

export interface PendingAtom {
  atom: string;
  pred: string;
  args: Term[];
}

export interface Verdict {
  kind: "violated" | "satisfied" | "residual" | "trivially_true" | "trivially_false";
  witness_time?: number | "inf";
  residual?: string;
}

export interface HistoryEntry {
  event: "create" | "ingest" | "iterate" | "assert";
  at: number;
  structure_digest: string;
  residual_digest: string;
}

export interface Report {
  session: string;
  residual: { text: string; ast: FormulaNode };
  pending: PendingAtom[];
  verdict: Verdict | null;
  history: HistoryEntry[];
}

const NODE_KINDS = new Set(["top", "bot", "atom", "and", "or", "forall", "exists"]);
const VERDICT_KINDS = new Set([
  "violated", "satisfied", "residual", "trivially_true", "trivially_false",
]);

function isObject(x: unknown): x is Record<string, unknown> {
  return typeof x === "object" && x !== null && !Array.isArray(x);
}

function checkTerm(t: unknown, path: string, problems: string[]): void {
  if (typeof t === "number" || typeof t === "string") return;
  if (Array.isArray(t)) {
    t.forEach((item, i) => checkTerm(item, `${path}[${i}]`, problems));
    return;
  }
  if (isObject(t)) {
    if ("fn" in t && Array.isArray(t.args)) {
      t.args.forEach((a, i) => checkTerm(a, `${path}.args[${i}]`, problems));
      return;
    }
    if (typeof t.var === "string") return;
  }
  problems.push(`${path}: not a term`);
}

function checkNode(node: unknown, path: string, problems: string[]): void {
  if (!isObject(node) || typeof node.node !== "string" || !NODE_KINDS.has(node.node)) {
    problems.push(`${path}: not a formula node`);
    return;
  }
  switch (node.node) {
    case "top":
    case "bot":
      return;
    case "atom":
      if (typeof node.pred !== "string") problems.push(`${path}: atom without pred`);
      if (node.kind !== "objective" && node.kind !== "subjective") {
        problems.push(`${path}: atom kind must be objective or subjective`);
      }
      if (typeof node.text !== "string") problems.push(`${path}: atom without text`);
      if (!Array.isArray(node.args)) problems.push(`${path}: atom without args`);
      else node.args.forEach((a, i) => checkTerm(a, `${path}.args[${i}]`, problems));
      return;
    case "and":
    case "or":
      if (!Array.isArray(node.parts) || node.parts.length !== 2) {
        problems.push(`${path}: ${node.node} needs exactly two parts`);
        return;
      }
      node.parts.forEach((p, i) => checkNode(p, `${path}.parts[${i}]`, problems));
      return;
    case "forall":
    case "exists":
      if (!Array.isArray(node.vars) || node.vars.length === 0) {
        problems.push(`${path}: quantifier without variables`);
      }
      if (!Array.isArray(node.excluded)) {
        problems.push(`${path}: quantifier without exclusion set`);
      } else {
        node.excluded.forEach((tup, i) => {
          if (!Array.isArray(tup)) problems.push(`${path}.excluded[${i}]: not a tuple`);
          else tup.forEach((t, j) => checkTerm(t, `${path}.excluded[${i}][${j}]`, problems));
        });
      }
      checkNode(node.guard, `${path}.guard`, problems);
      checkNode(node.body, `${path}.body`, problems);
      return;
  }
}

/** Structural problems in a report payload; empty means it is usable. */
export function validateReport(payload: unknown): string[] {
  const problems: string[] = [];
  if (!isObject(payload)) return ["payload is not an object"];
  if (typeof payload.session !== "string") problems.push("session: missing id");
  const residual = payload.residual;
  if (!isObject(residual) || typeof residual.text !== "string") {
    problems.push("residual: missing text");
  } else {
    checkNode(residual.ast, "residual.ast", problems);
  }
  if (!Array.isArray(payload.pending)) {
    problems.push("pending: not a list");
  } else {
    payload.pending.forEach((p, i) => {
      if (!isObject(p) || typeof p.atom !== "string") {
        problems.push(`pending[${i}]: missing atom text`);
      }
    });
  }
  if (payload.verdict !== null) {
    const v = payload.verdict;
    if (!isObject(v) || typeof v.kind !== "string" || !VERDICT_KINDS.has(v.kind)) {
      problems.push("verdict: unknown shape");
    }
  }
  if (!Array.isArray(payload.history)) problems.push("history: not a list");
  return problems;
}

export function renderTerm(t: Term): string {
  if (typeof t === "number") return String(t);
  if (typeof t === "string") return t;
  if (Array.isArray(t)) return `(${t.map(renderTerm).join(", ")})`;
  if ("fn" in t) return `${t.fn}(${t.args.map(renderTerm).join(", ")})`;
  return t.plus !== undefined ? `${t.var}+${t.plus}` : t.var;
}

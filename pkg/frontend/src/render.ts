// Rendering is a pure function of the report payload: same payload, same
// markup. No simplification, no reordering; the engine's output is shown
// exactly as served.

import {
  FormulaNode,
  Report,
  Verdict,
  renderTerm,
  validateReport,
} from "./model.js";

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function verdictBanner(verdict: Verdict | null, residual: FormulaNode): string {
  if (verdict?.kind === "violated" || residual.node === "bot" ||
      verdict?.kind === "trivially_false") {
    const witness = verdict?.witness_time !== undefined
      ? ` at time ${esc(String(verdict.witness_time))}`
      : "";
    return `<div class="banner banner-violation" data-banner="violation">` +
      `Policy violated${witness}.</div>`;
  }
  if (verdict?.kind === "satisfied" || verdict?.kind === "trivially_true" ||
      residual.node === "top") {
    const witness = verdict?.witness_time !== undefined
      ? ` at time ${esc(String(verdict.witness_time))}`
      : "";
    return `<div class="banner banner-satisfied" data-banner="satisfied">` +
      `Policy satisfied${witness}: no obligations remain.</div>`;
  }
  return "";
}

function atomMarkup(node: Extract<FormulaNode, { node: "atom" }>): string {
  const classes = ["atom", node.kind];
  if (node.pending) classes.push("pending");
  const text = esc(node.text);
  if (node.pending) {
    return `<span class="${classes.join(" ")}" data-atom="${text}">` +
      `<code>${text}</code>` +
      `<span class="assert-controls" data-controls-for="${text}">` +
      `<input type="text" class="justification" data-justification-for="${text}" ` +
      `placeholder="justification (required)">` +
      `<button type="button" data-assert="${text}" data-value="tt">true</button>` +
      `<button type="button" data-assert="${text}" data-value="ff">false</button>` +
      `</span></span>`;
  }
  return `<span class="${classes.join(" ")}"><code>${text}</code></span>`;
}

function quantifierMarkup(node: Extract<FormulaNode, { node: "forall" | "exists" }>): string {
  const keyword = node.node === "forall" ? "∀" : "∃";
  const vars = esc(node.vars.join(", "));
  const excluded = node.excluded.length
    ? `<div class="excluded">already instantiated: ` +
      node.excluded.map((tup) =>
        `<code>(${esc(tup.map(renderTerm).join(", "))})</code>`).join(" ") +
      `</div>`
    : "";
  const connective = node.node === "forall" ? "⊳" : "&amp;";
  return `<details open class="node quantifier ${node.node}">` +
    `<summary>${keyword} ${vars}</summary>` +
    excluded +
    `<div class="guard"><span class="label">when</span>${formulaMarkup(node.guard)}</div>` +
    `<div class="body"><span class="label">${connective}</span>${formulaMarkup(node.body)}</div>` +
    `</details>`;
}

export function formulaMarkup(node: FormulaNode): string {
  switch (node.node) {
    case "top":
      return `<span class="const top">⊤</span>`;
    case "bot":
      return `<span class="const bot">⊥</span>`;
    case "atom":
      return atomMarkup(node);
    case "and":
    case "or":
      return `<details open class="node ${node.node}">` +
        `<summary>${node.node}</summary>` +
        `<ul>` +
        node.parts.map((p) => `<li>${formulaMarkup(p)}</li>`).join("") +
        `</ul></details>`;
    case "forall":
    case "exists":
      return quantifierMarkup(node);
  }
}

/** The interactive residual view for one report payload. */
export function renderResidual(payload: unknown): string {
  const problems = validateReport(payload);
  if (problems.length) {
    return `<div class="banner banner-mismatch" data-banner="schema-mismatch">` +
      `The service reply does not match the expected report format:` +
      `<ul>${problems.map((p) => `<li>${esc(p)}</li>`).join("")}</ul></div>`;
  }
  const report = payload as Report;
  const banner = verdictBanner(report.verdict, report.residual.ast);
  const pendingPanel = report.pending.length
    ? `<section class="pending-panel">` +
      `<h2>Pending subjective atoms (${report.pending.length})</h2>` +
      `<ul>` +
      report.pending.map((p) => `<li><code>${esc(p.atom)}</code></li>`).join("") +
      `</ul></section>`
    : "";
  const tree = banner && (report.residual.ast.node === "top" || report.residual.ast.node === "bot")
    ? ""
    : `<section class="residual-tree">${formulaMarkup(report.residual.ast)}</section>`;
  const history = `<section class="history"><h2>History</h2><ol>` +
    report.history.map((e) =>
      `<li><code>${esc(e.event)}</code> <span class="digest">${esc(e.residual_digest)}</span></li>`)
      .join("") +
    `</ol></section>`;
  return `<div class="session" data-session="${esc(report.session)}">` +
    banner + pendingPanel + tree + history + `</div>`;
}

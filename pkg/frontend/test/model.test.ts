import { readFileSync } from "node:fs";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { renderTerm, validateReport } from "../src/model.js";

describe("validateReport", () => {
  it("accepts a well-formed report", () => {
    const report = {
      session: "s",
      residual: { text: "top", ast: { node: "top" } },
      pending: [],
      verdict: null,
      history: [],
    };
    expect(validateReport(report)).toEqual([]);
  });

  it("collects every structural problem", () => {
    const problems = validateReport({
      session: 42,
      residual: { text: "x", ast: { node: "and", parts: [{ node: "top" }] } },
      pending: [{}],
      verdict: { kind: "perhaps" },
      history: "nope",
    });
    expect(problems.length).toBeGreaterThanOrEqual(4);
    expect(problems.join("\n")).toContain("session");
    expect(problems.join("\n")).toContain("verdict");
  });

  it("matches the committed schema fixture on node kinds", () => {
    const schema = JSON.parse(readFileSync(
      join(__dirname, "..", "fixtures", "report.schema.json"), "utf8"));
    const kinds: string[] = [];
    for (const variant of schema.definitions.node.oneOf) {
      const nodeProp = variant.properties.node;
      if (nodeProp.enum) kinds.push(...nodeProp.enum);
      if (nodeProp.const) kinds.push(nodeProp.const);
    }
    for (const kind of ["top", "bot", "atom", "and", "or", "forall", "exists"]) {
      expect(kinds).toContain(kind);
    }
  });
});

describe("renderTerm", () => {
  it("prints every term shape", () => {
    expect(renderTerm(3)).toBe("3");
    expect(renderTerm("Alice")).toBe("Alice");
    expect(renderTerm([3, "Alice"])).toBe("(3, Alice)");
    expect(renderTerm({ fn: "doc", args: ["C"] })).toBe("doc(C)");
    expect(renderTerm({ var: "tau" })).toBe("tau");
    expect(renderTerm({ var: "tau", plus: 30 })).toBe("tau+30");
  });
});

import { describe, expect, it } from "vitest";

import { boundMetrics, boundSelect } from "../src/index.js";

const square = [
  [1.0, 0.0],
  [0.0, 1.0],
];

describe("boundary validation (no kernel involved)", () => {
  it("rejects mismatched importance length with the kernel's diagnostic text", () => {
    expect(() => boundSelect(square, [0.5], "mmr", 1)).toThrow(
      /importance length 1 does not match feature matrix with 2 tokens/,
    );
  });

  it("rejects non-finite values with row/column positions", () => {
    expect(() => boundSelect([[1.0, NaN]], [0.5], "mmr", 1)).toThrow(
      /non-finite feature value at row 0, column 1/,
    );
    expect(() => boundSelect(square, [0.5, Infinity], "mmr", 1)).toThrow(
      /non-finite importance score at index 1/,
    );
  });

  it("rejects unknown methods and bad budgets", () => {
    expect(() => boundSelect(square, [0.5, 0.4], "best" as never, 1)).toThrow(TypeError);
    expect(() => boundSelect(square, [0.5, 0.4], "mmr", 0)).toThrow(/positive integer/);
  });

  it("rejects duplicate metric indices", () => {
    expect(() => boundMetrics(square, [0.5, 0.4], [0, 0])).toThrow(/distinct/);
  });

  it("never mutates the input buffers", () => {
    const data = Float64Array.from([1, 0, 0, 1]);
    const copy = Float64Array.from(data);
    const w = Float64Array.from([0.9, 0.1]);
    boundSelect({ data, nTokens: 2, dim: 2 }, w, "mmr", 1);
    expect(Array.from(data)).toEqual(Array.from(copy));
    expect(Array.from(w)).toEqual([0.9, 0.1]);
  });
});

describe("kernel-side domain errors surface with their diagnostics", () => {
  it("zero-norm rows carry the kernel's message", () => {
    expect(() => boundSelect([[0.0, 0.0], [1.0, 0.0]], [0.5, 0.4], "mmr", 1)).toThrow(
      /zero norm/,
    );
  });

  it("over-budget k carries the kernel's message", () => {
    expect(() => boundSelect(square, [0.5, 0.4], "mmr", 3)).toThrow(/budget/);
  });
});

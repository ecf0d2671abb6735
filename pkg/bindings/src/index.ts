/**
 * In-memory array bindings for the tokenprune selection kernel.
 *
 * The kernel lives in the Python package; these bindings expose its
 * selectors and metrics to typed arrays without the caller touching any
 * files. Data crosses the boundary through the kernel's own byte-exact
 * formats (FMAT/FVEC in, a JSON selection document or stdout out) inside
 * a private temp directory, so results are bit-identical to invoking the
 * CLI by hand. Input buffers are never mutated; float32 buffers are
 * written as float32 and widened by the kernel to match its 64-bit
 * in-memory contract.
 */

import { spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { FeatureView, encodeFmat, encodeFvec, parseSelectionDocument } from "./formats.js";

export { FeatureView, SelectionDocument, decodeFmat, decodeFvec, encodeFmat, encodeFvec, parseSelectionDocument } from "./formats.js";

export const VERSION = "0.1.0";

/** Default way to reach the kernel; override via options.cli. */
export const DEFAULT_CLI = ["python3", "-m", "tokenprune"];

export const METHODS = ["importance", "fps", "hybrid", "mmr", "mmr-naive", "dpp"] as const;
export type Method = (typeof METHODS)[number];

export type FeatureInput = FeatureView | number[][];
export type VectorInput = Float64Array | Float32Array | number[];

export interface SelectOptions {
  lambda?: number;
  seed?: number;
  /** Command used to invoke the kernel CLI (argv list). */
  cli?: string[];
}

export interface MetricsOptions {
  seed?: number;
  trials?: number;
  cli?: string[];
}

export interface SelectResult {
  indices: number[];
  stepScores: number[];
}

export interface MetricsResult {
  hopkins: number;
  retention: number;
}

function toFeatureView(features: FeatureInput): FeatureView {
  if (Array.isArray(features)) {
    const nTokens = features.length;
    const dim = nTokens > 0 ? features[0].length : 0;
    const data = new Float64Array(nTokens * dim);
    for (let r = 0; r < nTokens; r++) {
      if (features[r].length !== dim) {
        throw new RangeError(`ragged feature rows: row ${r} has ${features[r].length} values, expected ${dim}`);
      }
      data.set(features[r], r * dim);
    }
    return { data, nTokens, dim };
  }
  if (features.data.length !== features.nTokens * features.dim) {
    throw new RangeError(
      `feature buffer holds ${features.data.length} values, expected ${features.nTokens * features.dim}`,
    );
  }
  return features;
}

function toVector(values: VectorInput): Float64Array | Float32Array {
  if (values instanceof Float64Array || values instanceof Float32Array) return values;
  return Float64Array.from(values);
}

function validateFinite(view: FeatureView, vector: Float64Array | Float32Array): void {
  if (view.nTokens < 1 || view.dim < 1) {
    throw new RangeError(`feature matrix must be at least 1x1, got shape (${view.nTokens}, ${view.dim})`);
  }
  for (let i = 0; i < view.data.length; i++) {
    if (!Number.isFinite(view.data[i])) {
      const row = Math.floor(i / view.dim);
      throw new RangeError(`non-finite feature value at row ${row}, column ${i - row * view.dim}`);
    }
  }
  for (let i = 0; i < vector.length; i++) {
    if (!Number.isFinite(vector[i])) throw new RangeError(`non-finite importance score at index ${i}`);
  }
  if (vector.length !== view.nTokens) {
    throw new RangeError(
      `importance length ${vector.length} does not match feature matrix with ${view.nTokens} tokens`,
    );
  }
}

function runCli(argv: string[], cli: string[] = DEFAULT_CLI): string {
  const [cmd, ...base] = cli;
  const proc = spawnSync(cmd, [...base, ...argv], { encoding: "utf8" });
  if (proc.error) throw proc.error;
  if (proc.status !== 0) {
    const detail = (proc.stderr ?? "").trim() || `exit code ${proc.status}`;
    throw new Error(`tokenprune kernel failed: ${detail}`);
  }
  return proc.stdout ?? "";
}

function withTempDir<T>(fn: (dir: string) => T): T {
  const dir = mkdtempSync(join(tmpdir(), "tokenprune-bind-"));
  try {
    return fn(dir);
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

/**
 * Run one selection strategy on in-memory arrays.
 *
 * Returns the selected indices (selection order) and the per-step greedy
 * objective values, bit-identical to what the kernel CLI writes for the
 * same inputs, method, k, lambda and seed.
 */
export function boundSelect(
  features: FeatureInput,
  importance: VectorInput,
  method: Method,
  k: number,
  options: SelectOptions = {},
): SelectResult {
  if (!METHODS.includes(method)) {
    throw new TypeError(`unknown method '${method}'; expected one of ${METHODS.join(", ")}`);
  }
  if (!Number.isInteger(k) || k < 1) throw new RangeError(`budget k must be a positive integer, got ${k}`);
  const view = toFeatureView(features);
  const vector = toVector(importance);
  validateFinite(view, vector);
  return withTempDir((dir) => {
    const fmat = join(dir, "features.fmat");
    const fvec = join(dir, "importance.fvec");
    const out = join(dir, "selection.json");
    writeFileSync(fmat, encodeFmat(view));
    writeFileSync(fvec, encodeFvec(vector));
    const argv = [
      "select", "--features", fmat, "--importance", fvec,
      "--method", method, "--k", String(k), "--out", out,
    ];
    if (options.lambda !== undefined) argv.push("--lambda", String(options.lambda));
    if (options.seed !== undefined) argv.push("--seed", String(options.seed));
    runCli(argv, options.cli);
    const doc = parseSelectionDocument(readFileSync(out, "utf8"));
    return { indices: doc.indices, stepScores: doc.step_scores ?? [] };
  });
}

/**
 * Hopkins statistic and importance retention of a given index subset,
 * bit-identical to the kernel's `metrics` subcommand for equal seeds.
 */
export function boundMetrics(
  features: FeatureInput,
  importance: VectorInput,
  indices: number[],
  options: MetricsOptions = {},
): MetricsResult {
  const view = toFeatureView(features);
  const vector = toVector(importance);
  validateFinite(view, vector);
  if (indices.length < 1 || !indices.every((i) => Number.isInteger(i))) {
    throw new RangeError("indices must be a non-empty list of integers");
  }
  if (new Set(indices).size !== indices.length) {
    throw new RangeError("selection indices must be distinct");
  }
  return withTempDir((dir) => {
    const fmat = join(dir, "features.fmat");
    const fvec = join(dir, "importance.fvec");
    const sel = join(dir, "selection.json");
    writeFileSync(fmat, encodeFmat(view));
    writeFileSync(fvec, encodeFvec(vector));
    writeFileSync(sel, JSON.stringify({ method: "external", k: indices.length, indices }));
    const argv = ["metrics", "--features", fmat, "--importance", fvec, "--selection", sel];
    if (options.trials !== undefined) argv.push("--hopkins-trials", String(options.trials));
    if (options.seed !== undefined) argv.push("--seed", String(options.seed));
    const stdout = runCli(argv, options.cli);
    const match = /hopkins=(\S+) retention=(\S+)/.exec(stdout);
    if (!match) throw new Error(`unexpected kernel output: ${stdout.trim()}`);
    return { hopkins: Number(match[1]), retention: Number(match[2]) };
  });
}

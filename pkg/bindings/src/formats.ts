/**
 * Byte-exact encoders/decoders for the kernel's file formats.
 *
 * FMAT: "FMAT" | u32 version=1 | u64 nTokens | u64 dim | u8 dtype | payload
 * FVEC: "FVEC" | u32 version=1 | u64 length  | u8 dtype | payload
 *
 * dtype 0 = float32, 1 = float64; payloads are row-major little-endian.
 */

const FMAT_HEADER = 25;
const FVEC_HEADER = 17;

export interface FeatureView {
  data: Float64Array | Float32Array;
  nTokens: number;
  dim: number;
}

export interface SelectionDocument {
  method: string;
  lambda?: number;
  k: number;
  indices: number[];
  step_scores?: number[];
}

function writeMagic(view: DataView, magic: string): void {
  for (let i = 0; i < 4; i++) view.setUint8(i, magic.charCodeAt(i));
}

function readMagic(view: DataView): string {
  return String.fromCharCode(
    view.getUint8(0), view.getUint8(1), view.getUint8(2), view.getUint8(3),
  );
}

function writePayload(
  view: DataView,
  offset: number,
  values: Float64Array | Float32Array,
): void {
  if (values instanceof Float32Array) {
    for (let i = 0; i < values.length; i++) view.setFloat32(offset + 4 * i, values[i], true);
  } else {
    for (let i = 0; i < values.length; i++) view.setFloat64(offset + 8 * i, values[i], true);
  }
}

function readPayload(view: DataView, offset: number, count: number, dtype: number): Float64Array {
  const out = new Float64Array(count);
  if (dtype === 0) {
    for (let i = 0; i < count; i++) out[i] = view.getFloat32(offset + 4 * i, true);
  } else {
    for (let i = 0; i < count; i++) out[i] = view.getFloat64(offset + 8 * i, true);
  }
  return out;
}

export function encodeFmat(features: FeatureView): Uint8Array {
  const { data, nTokens, dim } = features;
  const f32 = data instanceof Float32Array;
  const width = f32 ? 4 : 8;
  const buf = new Uint8Array(FMAT_HEADER + nTokens * dim * width);
  const view = new DataView(buf.buffer);
  writeMagic(view, "FMAT");
  view.setUint32(4, 1, true);
  view.setBigUint64(8, BigInt(nTokens), true);
  view.setBigUint64(16, BigInt(dim), true);
  view.setUint8(24, f32 ? 0 : 1);
  writePayload(view, FMAT_HEADER, data);
  return buf;
}

export function decodeFmat(bytes: Uint8Array): FeatureView {
  if (bytes.length < FMAT_HEADER) {
    throw new RangeError(`truncated header: need ${FMAT_HEADER} bytes, got ${bytes.length}`);
  }
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  const magic = readMagic(view);
  if (magic !== "FMAT") throw new RangeError(`bad magic ${JSON.stringify(magic)} at byte offset 0`);
  const version = view.getUint32(4, true);
  if (version !== 1) throw new RangeError(`unsupported version ${version} at byte offset 4`);
  const nTokens = Number(view.getBigUint64(8, true));
  const dim = Number(view.getBigUint64(16, true));
  const dtype = view.getUint8(24);
  if (dtype !== 0 && dtype !== 1) throw new RangeError(`unknown dtype code ${dtype}`);
  const width = dtype === 0 ? 4 : 8;
  const expected = nTokens * dim * width;
  if (bytes.length - FMAT_HEADER !== expected) {
    throw new RangeError(
      `payload size mismatch: expected ${expected} bytes, got ${bytes.length - FMAT_HEADER}`,
    );
  }
  return { data: readPayload(view, FMAT_HEADER, nTokens * dim, dtype), nTokens, dim };
}

export function encodeFvec(values: Float64Array | Float32Array): Uint8Array {
  const f32 = values instanceof Float32Array;
  const width = f32 ? 4 : 8;
  const buf = new Uint8Array(FVEC_HEADER + values.length * width);
  const view = new DataView(buf.buffer);
  writeMagic(view, "FVEC");
  view.setUint32(4, 1, true);
  view.setBigUint64(8, BigInt(values.length), true);
  view.setUint8(16, f32 ? 0 : 1);
  writePayload(view, FVEC_HEADER, values);
  return buf;
}

export function decodeFvec(bytes: Uint8Array): Float64Array {
  if (bytes.length < FVEC_HEADER) {
    throw new RangeError(`truncated header: need ${FVEC_HEADER} bytes, got ${bytes.length}`);
  }
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  const magic = readMagic(view);
  if (magic !== "FVEC") throw new RangeError(`bad magic ${JSON.stringify(magic)} at byte offset 0`);
  const version = view.getUint32(4, true);
  if (version !== 1) throw new RangeError(`unsupported version ${version} at byte offset 4`);
  const length = Number(view.getBigUint64(8, true));
  const dtype = view.getUint8(16);
  if (dtype !== 0 && dtype !== 1) throw new RangeError(`unknown dtype code ${dtype}`);
  const width = dtype === 0 ? 4 : 8;
  const expected = length * width;
  if (bytes.length - FVEC_HEADER !== expected) {
    throw new RangeError(
      `payload size mismatch: expected ${expected} bytes, got ${bytes.length - FVEC_HEADER}`,
    );
  }
  return readPayload(view, FVEC_HEADER, length, dtype);
}

export function parseSelectionDocument(text: string): SelectionDocument {
  const doc = JSON.parse(text) as Record<string, unknown>;
  if (typeof doc !== "object" || doc === null || Array.isArray(doc)) {
    throw new RangeError("selection document must be a JSON object");
  }
  for (const field of ["method", "k", "indices"]) {
    if (!(field in doc)) throw new RangeError(`selection document missing field '${field}'`);
  }
  const indices = doc.indices;
  if (!Array.isArray(indices) || !indices.every((i) => Number.isInteger(i))) {
    throw new RangeError("field 'indices' must be a list of integers");
  }
  const out: SelectionDocument = {
    method: String(doc.method),
    k: Number(doc.k),
    indices: indices as number[],
  };
  if (typeof doc.lambda === "number") out.lambda = doc.lambda;
  if (Array.isArray(doc.step_scores)) out.step_scores = doc.step_scores as number[];
  return out;
}

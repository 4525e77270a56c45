/**
 * STGP tensor wire/file format and Float32Array-backed tensor views.
 *
 * Layout (little-endian): magic "STGP", version u16, rank u16 (3 or 4),
 * dims u32 * rank, dtype u16 (0 = float32), then row-major float32 payload.
 */

/** A dense row-major tensor: shape plus a contiguous float32 buffer. */
export interface ArrayView {
  shape: number[];
  data: Float32Array;
}

/** Inputs accepted at the boundary; anything not already float32 is copied. */
export interface ArrayViewLike {
  shape: number[];
  data: Float32Array | Float64Array | number[];
}

export const STGP_VERSION = 1;
export const DTYPE_F32 = 0;

const MAGIC = [0x53, 0x54, 0x47, 0x50]; // "STGP"

export function elementCount(shape: number[]): number {
  return shape.reduce((acc, dim) => acc * dim, 1);
}

/**
 * Validate a tensor view at the call boundary and normalize it to a
 * float32-backed ArrayView. Wrong-dtype input (number[] or Float64Array) is
 * copied into a fresh Float32Array: convenient, but a per-call O(n) cost;
 * pass Float32Array to avoid it. The returned view shares the caller's
 * buffer when no copy was needed; callers of this module never write
 * through it.
 */
export function toArrayView(input: ArrayViewLike, expectedRank?: number): ArrayView {
  if (!input || !Array.isArray(input.shape)) {
    throw new TypeError("tensor view must have a shape array");
  }
  const shape = input.shape.map((dim) => {
    if (!Number.isInteger(dim) || dim < 1) {
      throw new RangeError(`tensor dims must be integers >= 1, got [${input.shape}]`);
    }
    return dim;
  });
  if (shape.length !== 3 && shape.length !== 4) {
    throw new RangeError(`tensor rank must be 3 or 4, got ${shape.length}`);
  }
  if (expectedRank !== undefined && shape.length !== expectedRank) {
    throw new RangeError(
      `expected a rank-${expectedRank} tensor, got rank ${shape.length}`,
    );
  }
  const data =
    input.data instanceof Float32Array ? input.data : Float32Array.from(input.data);
  const expected = elementCount(shape);
  if (data.length !== expected) {
    throw new RangeError(
      `expected ${expected} elements for shape [${shape}], got ${data.length}`,
    );
  }
  return { shape, data };
}

/** Serialize a tensor view to STGP bytes. The input buffer is only read. */
export function encodeTensor(view: ArrayViewLike): Uint8Array {
  const { shape, data } = toArrayView(view);
  const headerSize = 4 + 2 + 2 + 4 * shape.length + 2;
  const bytes = new Uint8Array(headerSize + 4 * data.length);
  const dv = new DataView(bytes.buffer);

  MAGIC.forEach((byte, i) => dv.setUint8(i, byte));
  dv.setUint16(4, STGP_VERSION, true);
  dv.setUint16(6, shape.length, true);
  let offset = 8;
  for (const dim of shape) {
    dv.setUint32(offset, dim, true);
    offset += 4;
  }
  dv.setUint16(offset, DTYPE_F32, true);
  offset += 2;
  for (let i = 0; i < data.length; i++) {
    dv.setFloat32(offset + 4 * i, data[i]!, true);
  }
  return bytes;
}

/** Parse STGP bytes into a freshly-allocated tensor view. */
export function decodeTensor(bytes: Uint8Array): ArrayView {
  const dv = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  if (bytes.length < 8 || MAGIC.some((byte, i) => dv.getUint8(i) !== byte)) {
    throw new Error("bad magic: not an STGP tensor");
  }
  const version = dv.getUint16(4, true);
  if (version !== STGP_VERSION) {
    throw new Error(`bad version: expected ${STGP_VERSION}, got ${version}`);
  }
  const rank = dv.getUint16(6, true);
  if (rank !== 3 && rank !== 4) {
    throw new Error(`bad rank: expected 3 or 4, got ${rank}`);
  }
  if (bytes.length < 8 + 4 * rank + 2) {
    throw new Error("truncated header");
  }
  const shape: number[] = [];
  let offset = 8;
  for (let i = 0; i < rank; i++) {
    shape.push(dv.getUint32(offset, true));
    offset += 4;
  }
  const dtype = dv.getUint16(offset, true);
  offset += 2;
  if (dtype !== DTYPE_F32) {
    throw new Error(`bad dtype: expected code ${DTYPE_F32}, got ${dtype}`);
  }
  const expected = elementCount(shape) * 4;
  const payload = bytes.length - offset;
  if (payload < expected) {
    throw new Error(`truncated payload: expected ${expected} bytes, got ${payload}`);
  }
  if (payload > expected) {
    throw new Error(`trailing data: expected ${expected} payload bytes, got ${payload}`);
  }
  const data = new Float32Array(expected / 4);
  for (let i = 0; i < data.length; i++) {
    data[i] = dv.getFloat32(offset + 4 * i, true);
  }
  return { shape, data };
}

export function tensorToBase64(view: ArrayViewLike): string {
  return Buffer.from(encodeTensor(view)).toString("base64");
}

export function tensorFromBase64(text: string): ArrayView {
  return decodeTensor(new Uint8Array(Buffer.from(text, "base64")));
}

/**
 * Binary tensor container, byte-compatible with the engine's file format.
 *
 * Layout, all little-endian: magic "KECF", format version u16, dtype
 * code u8 (1 = float64), rank u8, one u64 per dimension, payload in
 * column-major order, CRC32 of the payload as u32.  Multiple blocks may
 * be concatenated in one file.
 */

import * as fs from "node:fs";

import { KecorError } from "./errors";

export const MAGIC = "KECF";
export const FORMAT_VERSION = 1;
export const DTYPE_F64 = 1;

export interface Tensor {
    dims: number[];
    /** column-major values, length = product of dims */
    data: Float64Array;
}

const CRC_TABLE = (() => {
    const table = new Uint32Array(256);
    for (let n = 0; n < 256; n++) {
        let c = n;
        for (let k = 0; k < 8; k++) {
            c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
        }
        table[n] = c >>> 0;
    }
    return table;
})();

/** CRC-32 with the zlib polynomial, as an unsigned 32-bit integer. */
export function crc32(bytes: Uint8Array): number {
    let c = 0xffffffff;
    for (let i = 0; i < bytes.length; i++) {
        c = CRC_TABLE[(c ^ bytes[i]) & 0xff] ^ (c >>> 8);
    }
    return (c ^ 0xffffffff) >>> 0;
}

function elementCount(dims: number[]): number {
    let count = 1;
    for (const dim of dims) {
        count *= dim;
    }
    return count;
}

export function encodeTensor(tensor: Tensor): Buffer {
    const { dims, data } = tensor;
    for (const dim of dims) {
        if (!Number.isInteger(dim) || dim < 0) {
            throw new KecorError(
                "TensorFileError", `invalid dimension ${dim}`);
        }
    }
    if (dims.length > 255) {
        throw new KecorError(
            "TensorFileError",
            `rank ${dims.length} exceeds the format limit`);
    }
    const count = elementCount(dims);
    if (data.length !== count) {
        throw new KecorError(
            "DimensionMismatch",
            `payload holds ${data.length} values but dims ` +
            `[${dims.join(", ")}] need ${count}`);
    }
    const headBytes = 8 + 8 * dims.length;
    const buf = Buffer.alloc(headBytes + 8 * count + 4);
    buf.write(MAGIC, 0, "ascii");
    buf.writeUInt16LE(FORMAT_VERSION, 4);
    buf.writeUInt8(DTYPE_F64, 6);
    buf.writeUInt8(dims.length, 7);
    let off = 8;
    for (const dim of dims) {
        buf.writeBigUInt64LE(BigInt(dim), off);
        off += 8;
    }
    for (let i = 0; i < count; i++) {
        buf.writeDoubleLE(data[i], off);
        off += 8;
    }
    const payload = buf.subarray(headBytes, headBytes + 8 * count);
    buf.writeUInt32LE(crc32(payload), off);
    return buf;
}

export interface DecodedBlock {
    tensor: Tensor;
    /** offset of the byte after this block */
    next: number;
}

export function decodeTensor(buf: Buffer, offset = 0): DecodedBlock {
    const magic = buf.subarray(offset, offset + 4);
    if (magic.length < 4 || magic.toString("ascii") !== MAGIC) {
        throw new KecorError(
            "BadMagic",
            `expected magic "${MAGIC}", found ${JSON.stringify(
                magic.toString("latin1"))}`);
    }
    if (buf.length < offset + 8) {
        throw new KecorError("BadCrc", "truncated header");
    }
    const version = buf.readUInt16LE(offset + 4);
    if (version !== FORMAT_VERSION) {
        throw new KecorError(
            "UnsupportedVersion",
            `format version ${version} is not supported`);
    }
    const dtype = buf.readUInt8(offset + 6);
    if (dtype !== DTYPE_F64) {
        throw new KecorError(
            "UnsupportedDtype", `dtype code ${dtype} is not supported`);
    }
    const rank = buf.readUInt8(offset + 7);
    let off = offset + 8;
    const dims: number[] = [];
    for (let r = 0; r < rank; r++) {
        if (buf.length < off + 8) {
            throw new KecorError("BadCrc", "truncated dimension header");
        }
        const dim = buf.readBigUInt64LE(off);
        off += 8;
        if (dim > BigInt(Number.MAX_SAFE_INTEGER)) {
            throw new KecorError(
                "TensorFileError",
                `dimension ${dim} is too large to address`);
        }
        dims.push(Number(dim));
    }
    const count = elementCount(dims);
    if (buf.length < off + 8 * count) {
        throw new KecorError(
            "BadCrc",
            `truncated payload: expected ${8 * count} bytes, found ` +
            `${Math.max(0, buf.length - off)}`);
    }
    const payload = buf.subarray(off, off + 8 * count);
    off += 8 * count;
    if (buf.length < off + 4) {
        throw new KecorError("BadCrc", "missing checksum");
    }
    if (buf.readUInt32LE(off) !== crc32(payload)) {
        throw new KecorError("BadCrc", "payload checksum mismatch");
    }
    off += 4;
    const data = new Float64Array(count);
    for (let i = 0; i < count; i++) {
        data[i] = payload.readDoubleLE(8 * i);
    }
    return { tensor: { dims, data }, next: off };
}

/** Decode every concatenated block in a buffer. */
export function decodeAllTensors(buf: Buffer): Tensor[] {
    const out: Tensor[] = [];
    let off = 0;
    while (off < buf.length) {
        const block = decodeTensor(buf, off);
        out.push(block.tensor);
        off = block.next;
    }
    return out;
}

export function writeTensorFile(path: string, tensor: Tensor): void {
    fs.writeFileSync(path, encodeTensor(tensor));
}

/** Read the first tensor block of a file. */
export function readTensorFile(path: string): Tensor {
    return decodeTensor(fs.readFileSync(path)).tensor;
}

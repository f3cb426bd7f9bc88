/**
 * Bindings for the kecor batch selection engine.
 *
 * Each call shells out to the engine's command-line interface, moving
 * arrays through its binary tensor format inside a private scratch
 * directory that is deleted before the call returns.  Input buffers are
 * only read, never written; returned arrays are freshly allocated and
 * owned by the caller.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { KecorError } from "./errors";
import { runCli, withScratchDir } from "./runner";
import type { Tensor } from "./tensorfile";
import { readTensorFile, writeTensorFile } from "./tensorfile";

export { KecorError } from "./errors";
export type { EngineErrorCode } from "./errors";
export { pythonExecutable, runCli, withScratchDir } from "./runner";
export type { CliResult } from "./runner";
export {
    DTYPE_F64,
    FORMAT_VERSION,
    MAGIC,
    crc32,
    decodeAllTensors,
    decodeTensor,
    encodeTensor,
    readTensorFile,
    writeTensorFile,
} from "./tensorfile";
export type { Tensor } from "./tensorfile";

export type KernelKind =
    | "linear"
    | "rbf"
    | "laplace-rbf"
    | "last"
    | "last-layer"
    | "ntk";

export type Strategy = "kecor" | "random" | "entropy" | "coreset";

/**
 * Dense d x N matrix in column-major order: column j holds sample j,
 * entry (i, j) lives at data[j * rows + i].
 */
export interface Matrix {
    rows: number;
    cols: number;
    data: Float64Array;
}

export interface KernelConfig {
    kind?: KernelKind;
    rbf_sigma?: number;
    normalize?: boolean;
}

/**
 * Engine options.  Keys mirror the run-configuration JSON document;
 * anything omitted falls back to the engine's defaults (or to the
 * named profile's values when `profile` is set).
 */
export interface EngineConfig {
    strategy?: Strategy;
    batch_size?: number;
    epsilon?: number;
    sigma_ent?: number;
    seed?: number;
    kernel?: KernelConfig;
    /** proxy checkpoint file, required by the ntk and last kernels */
    proxy_checkpoint?: string;
    /** named hyperparameter profile (default "generic") */
    profile?: string;
}

export interface SelectResult {
    /** chosen pool indices, in pick order */
    indices: number[];
    /** per-step objective increments */
    gains: number[];
    /** final objective, or null for strategies that do not score */
    objective: number | null;
    entropyTerm: number;
}

/** Build a d x N matrix from N sample vectors (one column per sample). */
export function matrixFromColumns(
    columns: ReadonlyArray<ArrayLike<number>>,
): Matrix {
    const cols = columns.length;
    const rows = cols > 0 ? columns[0].length : 0;
    const data = new Float64Array(rows * cols);
    for (let j = 0; j < cols; j++) {
        const col = columns[j];
        if (col.length !== rows) {
            throw new KecorError(
                "DimensionMismatch",
                `column ${j} has length ${col.length}, expected ${rows}`);
        }
        for (let i = 0; i < rows; i++) {
            data[j * rows + i] = col[i];
        }
    }
    return { rows, cols, data };
}

/** Entry (i, j) of a column-major matrix. */
export function matrixGet(m: Matrix, i: number, j: number): number {
    return m.data[j * m.rows + i];
}

function checkMatrix(m: Matrix, name: string): void {
    if (!Number.isInteger(m.rows) || !Number.isInteger(m.cols)
            || m.rows < 0 || m.cols < 0) {
        throw new KecorError(
            "DimensionMismatch",
            `${name} has invalid shape ${m.rows} x ${m.cols}`);
    }
    if (m.data.length !== m.rows * m.cols) {
        throw new KecorError(
            "DimensionMismatch",
            `${name} holds ${m.data.length} values but shape ` +
            `${m.rows} x ${m.cols} needs ${m.rows * m.cols}`);
    }
}

function matrixTensor(m: Matrix): Tensor {
    return { dims: [m.rows, m.cols], data: m.data };
}

// Writes the config document and invokes one engine subcommand.  Unknown
// config keys pass through so the engine's schema is the single validator.
function runEngine(
    command: string,
    config: EngineConfig,
    dir: string,
    paths: Record<string, string>,
    extra: readonly string[] = [],
): { stdout: string; stderr: string } {
    const { profile, proxy_checkpoint, ...rest } = config;
    const docPaths: Record<string, string> = { ...paths };
    if (proxy_checkpoint !== undefined) {
        docPaths.proxy_checkpoint = proxy_checkpoint;
    }
    const configPath = path.join(dir, "config.json");
    fs.writeFileSync(configPath, JSON.stringify({ ...rest, paths: docPaths }));
    const args = [command, "--config", configPath, ...extra];
    if (profile !== undefined) {
        args.push("--profile", profile);
    }
    return runCli(args);
}

/**
 * Pick a batch from the unlabeled pool.
 *
 * `features` is the d x N pool, `logits` an optional C x N matrix of
 * classifier outputs (required whenever the entropy weight is positive),
 * and `labeled` the already-annotated indices to exclude.
 */
export function select(
    features: Matrix,
    logits: Matrix | null,
    labeled: readonly number[],
    config: EngineConfig = {},
): SelectResult {
    checkMatrix(features, "features");
    if (logits !== null) {
        checkMatrix(logits, "logits");
    }
    return withScratchDir((dir) => {
        const paths: Record<string, string> = {
            features: path.join(dir, "features.kecf"),
            output: path.join(dir, "chosen.txt"),
        };
        writeTensorFile(paths.features, matrixTensor(features));
        if (logits !== null) {
            paths.logits = path.join(dir, "logits.kecf");
            writeTensorFile(paths.logits, matrixTensor(logits));
        }
        if (labeled.length > 0) {
            paths.labeled_indices = path.join(dir, "labeled.txt");
            fs.writeFileSync(
                paths.labeled_indices,
                labeled.map((i) => `${i}\n`).join(""));
        }
        const { stdout } = runEngine("select", config, dir, paths);
        const summary = JSON.parse(stdout) as {
            gains: number[];
            objective: number | null;
            entropy_term: number;
        };
        const chosen = fs.readFileSync(paths.output, "utf-8");
        const indices = chosen
            .split("\n")
            .filter((word) => word.length > 0)
            .map((word) => Number(word));
        return {
            indices,
            gains: summary.gains,
            objective: summary.objective,
            entropyTerm: summary.entropy_term,
        };
    });
}

/** Gram matrix of the given pool indices, as a caller-owned matrix. */
export function gram(
    features: Matrix,
    indices: readonly number[],
    config: EngineConfig = {},
): Matrix {
    checkMatrix(features, "features");
    return withScratchDir((dir) => {
        const featuresPath = path.join(dir, "features.kecf");
        const outputPath = path.join(dir, "gram.kecf");
        writeTensorFile(featuresPath, matrixTensor(features));
        runEngine("kernel", config, dir,
                  { features: featuresPath, output: outputPath },
                  ["--indices", indices.join(",")]);
        const tensor = readTensorFile(outputPath);
        if (tensor.dims.length !== 2) {
            throw new KecorError(
                "TensorFileError",
                `expected a rank-2 gram tensor, got rank ` +
                `${tensor.dims.length}`);
        }
        return {
            rows: tensor.dims[0],
            cols: tensor.dims[1],
            data: tensor.data,
        };
    });
}

/** Coding rate of the given pool indices under the configured kernel. */
export function codingRate(
    features: Matrix,
    indices: readonly number[],
    config: EngineConfig = {},
): number {
    checkMatrix(features, "features");
    return withScratchDir((dir) => {
        const featuresPath = path.join(dir, "features.kecf");
        writeTensorFile(featuresPath, matrixTensor(features));
        const { stdout } = runEngine(
            "coding-rate", config, dir, { features: featuresPath },
            ["--indices", indices.join(",")]);
        const value = Number(stdout.trim());
        if (!Number.isFinite(value)) {
            throw new KecorError(
                "CliError",
                `cannot parse coding rate from ${JSON.stringify(stdout)}`);
        }
        return value;
    });
}

/** Version string of the engine behind these bindings. */
export function version(): string {
    const { stdout } = runCli(["--version"]);
    const words = stdout.trim().split(/\s+/);
    const last = words[words.length - 1];
    if (!last) {
        throw new KecorError("CliError", "empty version output");
    }
    return last;
}

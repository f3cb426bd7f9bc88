/** Shared fixtures for the binding tests: deterministic matrices, CSV
 * rendering for the engine's from-csv import, and direct CLI runs used
 * as the parity oracle. */

import * as fs from "node:fs";
import * as path from "node:path";

import type { Matrix } from "../src/index";
import { crc32, runCli } from "../src/index";

/** Small deterministic PRNG so fixtures never drift between runs. */
export function mulberry32(seed: number): () => number {
    let a = seed >>> 0;
    return () => {
        a = (a + 0x6d2b79f5) >>> 0;
        let t = a;
        t = Math.imul(t ^ (t >>> 15), t | 1);
        t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
        return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
    };
}

export function randomMatrix(rows: number, cols: number, seed: number): Matrix {
    const rng = mulberry32(seed);
    const data = new Float64Array(rows * cols);
    for (let i = 0; i < data.length; i++) {
        data[i] = rng() * 4 - 2;
    }
    return { rows, cols, data };
}

/** Checksum of a matrix's underlying bytes, for no-mutation assertions. */
export function matrixChecksum(m: Matrix): number {
    return crc32(new Uint8Array(
        m.data.buffer, m.data.byteOffset, m.data.byteLength));
}

/** Render a matrix as CSV text, one row per line.  Number.toString is
 * shortest-round-trip, so the engine's float parser recovers the exact
 * same doubles. */
export function csvFromMatrix(m: Matrix): string {
    const lines: string[] = [];
    for (let i = 0; i < m.rows; i++) {
        const row: string[] = [];
        for (let j = 0; j < m.cols; j++) {
            row.push(String(m.data[j * m.rows + i]));
        }
        lines.push(row.join(","));
    }
    return lines.join("\n") + "\n";
}

/** Import a matrix into the engine's tensor format via its own CSV
 * converter, bypassing the TypeScript encoder entirely. */
export function importViaCsv(dir: string, name: string, m: Matrix): string {
    const csvPath = path.join(dir, `${name}.csv`);
    const tensorPath = path.join(dir, `${name}.kecf`);
    fs.writeFileSync(csvPath, csvFromMatrix(m));
    runCli(["from-csv", csvPath, tensorPath]);
    return tensorPath;
}

export function writeConfig(
    dir: string, name: string, doc: Record<string, unknown>,
): string {
    const configPath = path.join(dir, name);
    fs.writeFileSync(configPath, JSON.stringify(doc));
    return configPath;
}

export interface DirectSelectRun {
    /** raw bytes of the chosen-index file, one index per line */
    indexText: string;
    gains: number[];
    objective: number | null;
    entropyTerm: number;
}

/** Run `select` straight through the CLI on already-imported tensors.
 * `doc` holds the config document minus the paths section. */
export function directSelect(
    dir: string,
    featuresPath: string,
    logitsPath: string | null,
    labeled: readonly number[],
    doc: Record<string, unknown>,
    checkpointPath?: string,
): DirectSelectRun {
    const paths: Record<string, string> = {
        features: featuresPath,
        output: path.join(dir, "chosen.txt"),
    };
    if (logitsPath !== null) {
        paths.logits = logitsPath;
    }
    if (checkpointPath !== undefined) {
        paths.proxy_checkpoint = checkpointPath;
    }
    if (labeled.length > 0) {
        paths.labeled_indices = path.join(dir, "labeled.txt");
        fs.writeFileSync(paths.labeled_indices,
                         labeled.map((i) => `${i}\n`).join(""));
    }
    const configPath = writeConfig(dir, "select.json", { ...doc, paths });
    const { stdout } = runCli(["select", "--config", configPath]);
    const summary = JSON.parse(stdout) as {
        gains: number[];
        objective: number | null;
        entropy_term: number;
    };
    return {
        indexText: fs.readFileSync(paths.output, "utf-8"),
        gains: summary.gains,
        objective: summary.objective,
        entropyTerm: summary.entropy_term,
    };
}

/** Render indices the way the engine's select command writes them. */
export function indexLines(indices: readonly number[]): string {
    return indices.map((i) => `${i}\n`).join("");
}

/**
 * Launches the engine's command-line interface and maps failures onto
 * typed errors.  The engine prints one "Code: message" line to stderr
 * before exiting nonzero; that code is surfaced on the thrown error.
 */

import { spawnSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { KecorError } from "./errors";

/** Interpreter used to launch the engine; override with KECOR_PYTHON. */
export function pythonExecutable(): string {
    return process.env.KECOR_PYTHON || "python3";
}

export interface CliResult {
    stdout: string;
    stderr: string;
}

const ERROR_LINE = /^([A-Z][A-Za-z0-9]*): (.*)$/;

export function runCli(args: readonly string[]): CliResult {
    const proc = spawnSync(pythonExecutable(), ["-m", "kecor", ...args], {
        encoding: "utf-8",
        maxBuffer: 1 << 28,
    });
    if (proc.error) {
        throw new KecorError(
            "CliError",
            `cannot launch ${pythonExecutable()}: ${proc.error.message}`);
    }
    if (proc.status !== 0) {
        const status = proc.status ?? 3;
        const lines = (proc.stderr ?? "").trim().split(/\r?\n/);
        for (let i = lines.length - 1; i >= 0; i--) {
            const match = ERROR_LINE.exec(lines[i]);
            if (match) {
                throw new KecorError(match[1], match[2], status);
            }
        }
        throw new KecorError(
            "CliError", `engine exited ${status}: ${lines.join(" ")}`,
            status);
    }
    return { stdout: proc.stdout ?? "", stderr: proc.stderr ?? "" };
}

/**
 * Run a function with a private scratch directory that is removed
 * afterwards, so no engine call leaves files behind.
 */
export function withScratchDir<T>(fn: (dir: string) => T): T {
    const dir = fs.mkdtempSync(path.join(os.tmpdir(), "kecor-"));
    try {
        return fn(dir);
    } finally {
        fs.rmSync(dir, { recursive: true, force: true });
    }
}

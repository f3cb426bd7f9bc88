import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import type { EngineConfig, KernelKind, Matrix } from "../src/index";
import {
    KecorError,
    codingRate,
    encodeTensor,
    gram,
    matrixFromColumns,
    matrixGet,
    runCli,
    select,
    version,
    writeTensorFile,
} from "../src/index";
import {
    directSelect,
    importViaCsv,
    indexLines,
    matrixChecksum,
    randomMatrix,
    writeConfig,
} from "./helpers";

let scratch: string;
const checkpoints: Record<string, string> = {};

/** Train a proxy through the CLI; its inputs travel through the
 * TypeScript tensor writer, its checkpoint is reused by both routes. */
function trainCheckpoint(
    name: string, d: number, t: number, layers: number[],
    activation: string, seed: number,
): string {
    const samples = 30;
    const features = randomMatrix(d, samples, seed);
    const targets = randomMatrix(t, samples, seed + 1);
    const featuresPath = path.join(scratch, `${name}-x.kecf`);
    const targetsPath = path.join(scratch, `${name}-y.kecf`);
    writeTensorFile(featuresPath, { dims: [d, samples], data: features.data });
    writeTensorFile(targetsPath, { dims: [t, samples], data: targets.data });
    const checkpointPath = path.join(scratch, `${name}.ckpt`);
    const configPath = writeConfig(scratch, `${name}-train.json`, {
        seed,
        proxy: { layers, beta: 0.1, activation, epochs: 5, lr: 0.05 },
        paths: {
            features: featuresPath,
            targets: targetsPath,
            proxy_checkpoint: checkpointPath,
        },
    });
    const { stdout } = runCli(["proxy-train", "--config", configPath]);
    const summary = JSON.parse(stdout) as {
        checkpoint: string;
        final_loss: number;
    };
    expect(summary.checkpoint).toBe(checkpointPath);
    expect(Number.isFinite(summary.final_loss)).toBe(true);
    return checkpointPath;
}

beforeAll(() => {
    scratch = fs.mkdtempSync(path.join(os.tmpdir(), "kecor-parity-"));
    checkpoints.relu = trainCheckpoint("proxy-relu", 6, 3, [8, 6], "relu", 11);
    checkpoints.identity = trainCheckpoint(
        "proxy-id", 4, 2, [5], "identity", 7);
});

afterAll(() => {
    fs.rmSync(scratch, { recursive: true, force: true });
});

function expectEngineError(
    fn: () => unknown, code: string, exitCode?: number,
): KecorError {
    try {
        fn();
    } catch (err) {
        expect(err).toBeInstanceOf(KecorError);
        const engineErr = err as KecorError;
        expect(engineErr.code).toBe(code);
        if (exitCode !== undefined) {
            expect(engineErr.exitCode).toBe(exitCode);
        }
        return engineErr;
    }
    throw new Error(`expected a KecorError with code ${code}`);
}

interface Fixture {
    name: string;
    d: number;
    N: number;
    n: number;
    kind: KernelKind;
    rbf_sigma?: number;
    normalize?: boolean;
    sigma_ent: number;
    epsilon?: number;
    withLogits: boolean;
    labeled: number[];
    checkpoint?: "relu" | "identity";
    seed: number;
}

const FIXTURES: Fixture[] = [
    { name: "linear-plain", d: 4, N: 12, n: 3, kind: "linear",
      sigma_ent: 0, withLogits: false, labeled: [], seed: 1 },
    { name: "linear-entropy", d: 3, N: 10, n: 2, kind: "linear",
      normalize: true, sigma_ent: 0.1, withLogits: true, labeled: [0, 1],
      seed: 2 },
    { name: "rbf-plain", d: 5, N: 9, n: 3, kind: "rbf", rbf_sigma: 1.0,
      sigma_ent: 0, withLogits: false, labeled: [], seed: 3 },
    { name: "rbf-entropy", d: 4, N: 14, n: 4, kind: "rbf", rbf_sigma: 0.7,
      normalize: true, sigma_ent: 0.25, withLogits: true, labeled: [3],
      seed: 4 },
    { name: "rbf-long-name", d: 2, N: 8, n: 2, kind: "laplace-rbf",
      rbf_sigma: 2.0, sigma_ent: 0, withLogits: false, labeled: [5, 6],
      seed: 5 },
    { name: "ntk-plain", d: 6, N: 11, n: 3, kind: "ntk", sigma_ent: 0,
      withLogits: false, labeled: [], checkpoint: "relu", seed: 6 },
    { name: "ntk-entropy", d: 6, N: 13, n: 4, kind: "ntk", normalize: true,
      sigma_ent: 0.1, withLogits: true, labeled: [2, 4],
      checkpoint: "relu", seed: 7 },
    { name: "last-plain", d: 6, N: 10, n: 2, kind: "last", sigma_ent: 0,
      withLogits: false, labeled: [1], checkpoint: "relu", seed: 8 },
    { name: "last-long-name", d: 4, N: 9, n: 3, kind: "last-layer",
      sigma_ent: 0.3, withLogits: true, labeled: [],
      checkpoint: "identity", seed: 9 },
    { name: "linear-wide", d: 5, N: 16, n: 5, kind: "linear",
      sigma_ent: 0.5, epsilon: 0.8, withLogits: true, labeled: [0, 7, 15],
      seed: 10 },
];

describe("CLI parity", () => {
    it.each(FIXTURES.map((f) => [f.name, f] as const))(
        "%s: select, gram, and coding rate match direct runs",
        (_name, f) => {
            const features = randomMatrix(f.d, f.N, 1000 + f.seed);
            const logits = f.withLogits
                ? randomMatrix(3, f.N, 2000 + f.seed)
                : null;
            const checkpointPath = f.checkpoint
                ? checkpoints[f.checkpoint]
                : undefined;
            const kernel: EngineConfig["kernel"] = { kind: f.kind };
            if (f.rbf_sigma !== undefined) {
                kernel.rbf_sigma = f.rbf_sigma;
            }
            if (f.normalize !== undefined) {
                kernel.normalize = f.normalize;
            }
            const config: EngineConfig = {
                batch_size: f.n,
                sigma_ent: f.sigma_ent,
                seed: 5,
                kernel,
            };
            if (f.epsilon !== undefined) {
                config.epsilon = f.epsilon;
            }
            if (checkpointPath !== undefined) {
                config.proxy_checkpoint = checkpointPath;
            }

            const beforeFeatures = matrixChecksum(features);
            const beforeLogits = logits === null ? 0 : matrixChecksum(logits);

            const resA = select(features, logits, f.labeled, config);

            // independent route: tensors imported by the engine's own
            // CSV converter, config written by the test
            const dir = fs.mkdtempSync(path.join(scratch, `${f.name}-`));
            const featuresPath = importViaCsv(dir, "features", features);
            const logitsPath = logits === null
                ? null
                : importViaCsv(dir, "logits", logits);
            const doc: Record<string, unknown> = {
                batch_size: f.n,
                sigma_ent: f.sigma_ent,
                seed: 5,
                kernel,
            };
            if (f.epsilon !== undefined) {
                doc.epsilon = f.epsilon;
            }
            const resB = directSelect(
                dir, featuresPath, logitsPath, f.labeled, doc,
                checkpointPath);

            expect(indexLines(resA.indices)).toBe(resB.indexText);
            expect(resA.indices.length).toBe(f.n);
            for (const i of resA.indices) {
                expect(f.labeled).not.toContain(i);
                expect(i).toBeGreaterThanOrEqual(0);
                expect(i).toBeLessThan(f.N);
            }
            expect(resA.gains).toEqual(resB.gains);
            expect(resA.objective).toBe(resB.objective);
            expect(resA.entropyTerm).toBe(resB.entropyTerm);

            const subset = [...new Set([0, 1, Math.min(4, f.N - 1),
                                        f.N - 1])].sort((a, b) => a - b);
            const gramA = gram(features, subset, config);
            expect(gramA.rows).toBe(subset.length);
            expect(gramA.cols).toBe(subset.length);
            for (let i = 0; i < gramA.rows; i++) {
                for (let j = 0; j < i; j++) {
                    expect(matrixGet(gramA, i, j))
                        .toBe(matrixGet(gramA, j, i));
                }
            }

            const gramOut = path.join(dir, "gram.kecf");
            const opPaths: Record<string, string> = {
                features: featuresPath,
                output: gramOut,
            };
            if (checkpointPath !== undefined) {
                opPaths.proxy_checkpoint = checkpointPath;
            }
            const opConfig = writeConfig(
                dir, "op.json", { ...doc, paths: opPaths });
            runCli(["kernel", "--config", opConfig,
                    "--indices", subset.join(",")]);
            const encodedA = encodeTensor({
                dims: [gramA.rows, gramA.cols],
                data: gramA.data,
            });
            expect(encodedA.equals(fs.readFileSync(gramOut))).toBe(true);

            const rateA = codingRate(features, subset, config);
            const rateB = Number(runCli(
                ["coding-rate", "--config", opConfig,
                 "--indices", subset.join(",")]).stdout.trim());
            expect(Math.abs(rateA - rateB))
                .toBeLessThanOrEqual(1e-12 * Math.max(1, Math.abs(rateB)));
            expect(rateA).toBe(rateB);

            expect(matrixChecksum(features)).toBe(beforeFeatures);
            if (logits !== null) {
                expect(matrixChecksum(logits)).toBe(beforeLogits);
            }
        });
});

describe("other strategies", () => {
    it("random matches the CLI and reports no objective", () => {
        const features = randomMatrix(4, 9, 31);
        const config: EngineConfig = {
            strategy: "random", batch_size: 3, seed: 42,
        };
        const resA = select(features, null, [2], config);
        expect(resA.objective).toBeNull();
        expect(resA.gains).toEqual([]);

        const dir = fs.mkdtempSync(path.join(scratch, "random-"));
        const featuresPath = importViaCsv(dir, "features", features);
        const resB = directSelect(dir, featuresPath, null, [2],
                                  { strategy: "random", batch_size: 3,
                                    seed: 42 });
        expect(indexLines(resA.indices)).toBe(resB.indexText);

        const again = select(features, null, [2], config);
        expect(again.indices).toEqual(resA.indices);
    });

    it("entropy matches the CLI", () => {
        const features = randomMatrix(3, 11, 33);
        const logits = randomMatrix(4, 11, 34);
        const config: EngineConfig = { strategy: "entropy", batch_size: 4 };
        const resA = select(features, logits, [1, 2], config);

        const dir = fs.mkdtempSync(path.join(scratch, "entropy-"));
        const featuresPath = importViaCsv(dir, "features", features);
        const logitsPath = importViaCsv(dir, "logits", logits);
        const resB = directSelect(dir, featuresPath, logitsPath, [1, 2],
                                  { strategy: "entropy", batch_size: 4 });
        expect(indexLines(resA.indices)).toBe(resB.indexText);
    });

    it("coreset matches the CLI and avoids labeled samples", () => {
        const features = randomMatrix(5, 12, 35);
        const config: EngineConfig = { strategy: "coreset", batch_size: 3 };
        const labeled = [0, 1];
        const resA = select(features, null, labeled, config);
        for (const i of resA.indices) {
            expect(labeled).not.toContain(i);
        }

        const dir = fs.mkdtempSync(path.join(scratch, "coreset-"));
        const featuresPath = importViaCsv(dir, "features", features);
        const resB = directSelect(dir, featuresPath, null, labeled,
                                  { strategy: "coreset", batch_size: 3 });
        expect(indexLines(resA.indices)).toBe(resB.indexText);
    });
});

describe("edge behavior", () => {
    it("empty labeled set on a small pool works", () => {
        const features = randomMatrix(3, 5, 50);
        const res = select(features, null, [], {
            batch_size: 2, sigma_ent: 0, kernel: { kind: "linear" },
        });
        expect(res.indices.length).toBe(2);
        expect(new Set(res.indices).size).toBe(2);
        for (const i of res.indices) {
            expect(i).toBeGreaterThanOrEqual(0);
            expect(i).toBeLessThan(5);
        }
    });

    it("the zero kernel has zero coding rate", () => {
        const zeros: Matrix = {
            rows: 3, cols: 6, data: new Float64Array(18),
        };
        const config: EngineConfig = { kernel: { kind: "linear" } };
        expect(codingRate(zeros, [0, 1, 2], config)).toBe(0);
        const g = gram(zeros, [0, 1, 2], config);
        expect(Array.from(g.data)).toEqual(new Array(9).fill(0));
    });

    it("profiles reach the engine", () => {
        const features = randomMatrix(3, 10, 51);
        // the waymo profile sets batch_size 400, far beyond this pool
        const err = expectEngineError(
            () => select(features, null, [],
                         { strategy: "random", profile: "waymo" }),
            "InsufficientPool", 3);
        expect(err.message).toContain("400");
    });

    it("matrix views with a byte offset are read correctly", () => {
        const backing = new Float64Array(8 + 12);
        for (let i = 0; i < backing.length; i++) {
            backing[i] = Math.cos(i) * 3;
        }
        const features: Matrix = {
            rows: 3, cols: 4, data: backing.subarray(8),
        };
        const before = matrixChecksum(
            { rows: 1, cols: backing.length, data: backing });
        const res = select(features, null, [], {
            batch_size: 2, sigma_ent: 0, kernel: { kind: "linear" },
        });
        expect(res.indices.length).toBe(2);
        expect(matrixChecksum(
            { rows: 1, cols: backing.length, data: backing })).toBe(before);
    });

    it("frozen inputs are accepted", () => {
        const features = matrixFromColumns(
            Object.freeze([[1, 0], [0, 1], [1, 1]]));
        const labeled = Object.freeze([0]) as readonly number[];
        const res = select(features, null, labeled, {
            batch_size: 1, sigma_ent: 0, kernel: { kind: "linear" },
        });
        expect(res.indices.length).toBe(1);
        expect(res.indices[0]).not.toBe(0);
    });

    it("version reports the engine version", () => {
        expect(version()).toMatch(/^\d+\.\d+\.\d+$/);
    });
});

describe("error mapping", () => {
    const features = randomMatrix(4, 8, 60);

    it("mismatched logits carry DimensionMismatch", () => {
        const logits = randomMatrix(3, 7, 61);
        expectEngineError(
            () => select(features, logits, [], {
                batch_size: 2, sigma_ent: 0.1, kernel: { kind: "linear" },
            }),
            "DimensionMismatch", 3);
    });

    it("an exhausted pool carries InsufficientPool", () => {
        expectEngineError(
            () => select(features, null, [0, 1, 2, 3, 4, 5], {
                batch_size: 3, sigma_ent: 0, kernel: { kind: "linear" },
            }),
            "InsufficientPool", 3);
    });

    it("a positive entropy weight without logits is a config error", () => {
        expectEngineError(
            () => select(features, null, [], {
                batch_size: 2, sigma_ent: 0.1, kernel: { kind: "linear" },
            }),
            "ConfigInvalid", 2);
    });

    it("the entropy strategy without logits is a config error", () => {
        expectEngineError(
            () => select(features, null, [], {
                strategy: "entropy", batch_size: 2,
            }),
            "ConfigInvalid", 2);
    });

    it("gradient kernels without a checkpoint are a config error", () => {
        const err = expectEngineError(
            () => gram(features, [0, 1], { kernel: { kind: "ntk" } }),
            "ConfigInvalid", 2);
        expect(err.message).toContain("proxy_checkpoint");
    });

    it("a missing checkpoint file carries TensorFileError", () => {
        expectEngineError(
            () => gram(features, [0, 1], {
                kernel: { kind: "ntk" },
                proxy_checkpoint: path.join(scratch, "no-such.ckpt"),
            }),
            "TensorFileError", 3);
    });

    it("unknown config keys are rejected by the engine schema", () => {
        const config = { batch_size: 2, bogus: 1 } as EngineConfig;
        const err = expectEngineError(
            () => codingRate(features, [0, 1], config),
            "ConfigInvalid", 2);
        expect(err.message).toContain("bogus");
    });

    it("out-of-range config values are rejected", () => {
        expectEngineError(
            () => codingRate(features, [0, 1], { batch_size: 0 }),
            "ConfigInvalid", 2);
    });

    it("out-of-range subset indices are data errors", () => {
        expectEngineError(
            () => codingRate(features, [0, 99],
                             { kernel: { kind: "linear" } }),
            "DimensionMismatch", 3);
    });

    it("inconsistent matrix shapes fail before any engine call", () => {
        const broken: Matrix = {
            rows: 3, cols: 4, data: new Float64Array(11),
        };
        expectEngineError(
            () => select(broken, null, [], { batch_size: 1 }),
            "DimensionMismatch");
    });

    it("non-integer labeled indices surface the engine's error", () => {
        expectEngineError(
            () => select(features, null, [1.5], {
                batch_size: 2, sigma_ent: 0, kernel: { kind: "linear" },
            }),
            "KecorError", 3);
    });
});

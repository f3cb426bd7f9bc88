/** Error codes reported by the selection engine on its stderr line. */
export type EngineErrorCode =
    | "KecorError"
    | "DimensionMismatch"
    | "NotPositiveDefinite"
    | "SnapshotMismatch"
    | "NonFiniteLoss"
    | "InsufficientPool"
    | "ConfigInvalid"
    | "TensorFileError"
    | "BadMagic"
    | "BadCrc"
    | "UnsupportedVersion"
    | "UnsupportedDtype";

/**
 * Error raised by every binding entry point.
 *
 * `code` carries the engine's stable error code (one of EngineErrorCode,
 * or "CliError" when the process failed without printing one) and
 * `exitCode` the process exit status: 2 for configuration problems,
 * 3 for data or numerical ones.
 */
export class KecorError extends Error {
    readonly code: string;
    readonly exitCode: number;

    constructor(code: string, message: string, exitCode = 3) {
        super(message);
        this.name = "KecorError";
        this.code = code;
        this.exitCode = exitCode;
    }
}

/* tslint:disable */
/* eslint-disable */

/**
 * Histogram of sampled noise norms `‖η‖` next to their analytic summary.
 */
export class NoiseHistogram {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly analyticMean: number;
    readonly counts: Float64Array;
    /**
     * `bins + 1` bin edges.
     */
    readonly edges: Float64Array;
    readonly mean: number;
    /**
     * Radius exceeded with probability at most 0.05.
     */
    readonly tailBound: number;
}

/**
 * Mean test accuracy of every method (in [`method_names`] order, one row
 * per method) at each `1/ε` in `inv_epsilon`, on a small synthetic task.
 */
export function accuracyCurve(parties: number, inv_epsilon: Float64Array, separation: number, trials: number, seed: bigint): Float64Array;

/**
 * For each mechanism in [`mechanism_names`] order: sensitivity, `β` and the
 * expected noise norm `d/β`. Unsupported combinations yield `NaN`.
 */
export function calibrationTable(lambda: number, parties: number, samples: number, dim: number, classes: number, epsilon: number, protect_aux: boolean): Float64Array;

export function mechanismNames(): string[];

export function methodNames(): string[];

export function noiseHistogram(dim: number, beta: number, draws: number, bins: number, seed: bigint): NoiseHistogram;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_noisehistogram_free: (a: number, b: number) => void;
    readonly accuracyCurve: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number, number];
    readonly calibrationTable: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly mechanismNames: () => [number, number];
    readonly methodNames: () => [number, number];
    readonly noiseHistogram: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number];
    readonly noisehistogram_analyticMean: (a: number) => number;
    readonly noisehistogram_counts: (a: number) => [number, number];
    readonly noisehistogram_edges: (a: number) => [number, number];
    readonly noisehistogram_mean: (a: number) => number;
    readonly noisehistogram_tailBound: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_drop_slice: (a: number, b: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;

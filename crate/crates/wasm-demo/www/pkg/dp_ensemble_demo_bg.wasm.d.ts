/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_noisehistogram_free: (a: number, b: number) => void;
export const accuracyCurve: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number, number];
export const calibrationTable: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
export const mechanismNames: () => [number, number];
export const methodNames: () => [number, number];
export const noiseHistogram: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number];
export const noisehistogram_analyticMean: (a: number) => number;
export const noisehistogram_counts: (a: number) => [number, number];
export const noisehistogram_edges: (a: number) => [number, number];
export const noisehistogram_mean: (a: number) => number;
export const noisehistogram_tailBound: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_drop_slice: (a: number, b: number) => void;
export const __wbindgen_start: () => void;

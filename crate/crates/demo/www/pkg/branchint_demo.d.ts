/* tslint:disable */
/* eslint-disable */

/**
 * Matrix element at `diag(a, 1/a)` by quadrature over the real projective line.
 */
export function eval_diagonal(a: number, alpha_re: number, alpha_im: number, k: number, resolution: number): string;

/**
 * Continues the matrix element once around the loop of radius `r` with the contour oracle.
 */
export function monodromy_ratio(r: number, alpha_re: number, alpha_im: number, k: number): string;

/**
 * `θ = ad/bc` for `g = [[a, b], [c, d]]`, given as `[a.re, a.im, b.re, …, d.im]` and
 * rescaled to unit determinant.
 */
export function theta(entries: Float64Array): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly eval_diagonal: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly monodromy_ratio: (a: number, b: number, c: number, d: number) => [number, number];
    readonly theta: (a: number, b: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
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

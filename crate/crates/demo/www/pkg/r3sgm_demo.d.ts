/* tslint:disable */
/* eslint-disable */

export class Disparity {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Bad-1 rate over non-occluded pixels the map covers.
     */
    bad(): number;
    density(): number;
    /**
     * Peak cost-buffer bytes (streaming engine only, else 0).
     */
    peak_buffer(): number;
    rgba(): Uint8Array;
}

/**
 * A random-dot stereo pair with known disparity.
 */
export class Scene {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Runs the full pipeline and returns the coloured disparity map with
     * its scores.
     */
    compute(algo: string, d_max: number, window: number, p1: number, p2: number, median: boolean, lr_check: boolean, interpolate: boolean): Disparity;
    /**
     * Unary costs followed by the aggregated (4x scaled) costs of the
     * streaming engine at left-image pixel `(x, y)`.
     */
    cost_profile(x: number, y: number, d_max: number, window: number, p1: number, p2: number): Uint32Array;
    height(): number;
    left_rgba(): Uint8Array;
    max_disparity(): number;
    constructor(width: number, height: number, background: number, foreground: number, levels: number, noise: number, seed: bigint);
    right_rgba(): Uint8Array;
    /**
     * Ground truth coloured on the same scale as `compute` with `d_max`.
     */
    truth_rgba(d_max: number): Uint8Array;
    width(): number;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_disparity_free: (a: number, b: number) => void;
    readonly __wbg_scene_free: (a: number, b: number) => void;
    readonly disparity_bad: (a: number) => number;
    readonly disparity_density: (a: number) => number;
    readonly disparity_peak_buffer: (a: number) => number;
    readonly disparity_rgba: (a: number) => [number, number];
    readonly scene_compute: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number) => [number, number, number];
    readonly scene_cost_profile: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly scene_height: (a: number) => number;
    readonly scene_left_rgba: (a: number) => [number, number];
    readonly scene_max_disparity: (a: number) => number;
    readonly scene_new: (a: number, b: number, c: number, d: number, e: number, f: number, g: bigint) => [number, number, number];
    readonly scene_right_rgba: (a: number) => [number, number];
    readonly scene_truth_rgba: (a: number, b: number) => [number, number];
    readonly scene_width: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
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

/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_disparity_free: (a: number, b: number) => void;
export const __wbg_scene_free: (a: number, b: number) => void;
export const disparity_bad: (a: number) => number;
export const disparity_density: (a: number) => number;
export const disparity_peak_buffer: (a: number) => number;
export const disparity_rgba: (a: number) => [number, number];
export const scene_compute: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number) => [number, number, number];
export const scene_cost_profile: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
export const scene_height: (a: number) => number;
export const scene_left_rgba: (a: number) => [number, number];
export const scene_max_disparity: (a: number) => number;
export const scene_new: (a: number, b: number, c: number, d: number, e: number, f: number, g: bigint) => [number, number, number];
export const scene_right_rgba: (a: number) => [number, number];
export const scene_truth_rgba: (a: number, b: number) => [number, number];
export const scene_width: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;

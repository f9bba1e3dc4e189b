/* tslint:disable */
/* eslint-disable */

/**
 * A discrete Cantor set of dimension s at scale 2^-k with its box counts.
 */
export function cantor_view(k: number, s: number): string;

/**
 * Generates a construction and counts its incidences.
 */
export function construction_scene(id: number, k: number, alpha: number, beta: number): string;

/**
 * Which construction (1-4) realises f at (alpha, beta).
 */
export function extremal_construction(alpha: number, beta: number): number;

/**
 * f on an (n + 1) × (n + 1) grid over [0, 2]², row-major in beta then alpha.
 */
export function surface_grid(n: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly cantor_view: (a: number, b: number) => [number, number, number, number];
    readonly construction_scene: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly extremal_construction: (a: number, b: number) => number;
    readonly surface_grid: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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

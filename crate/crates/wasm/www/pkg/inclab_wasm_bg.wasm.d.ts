/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const cantor_view: (a: number, b: number) => [number, number, number, number];
export const construction_scene: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const extremal_construction: (a: number, b: number) => number;
export const surface_grid: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;

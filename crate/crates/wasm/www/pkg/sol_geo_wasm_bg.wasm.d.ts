/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_sweepmesh_free: (a: number, b: number) => void;
export const curve_fan: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const residual_slice: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
export const sweep_mesh: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number];
export const sweepmesh_cols: (a: number) => number;
export const sweepmesh_orthogonality_defect: (a: number) => number;
export const sweepmesh_positions: (a: number) => [number, number];
export const sweepmesh_rows: (a: number) => number;
export const sweepmesh_singular_loci: (a: number) => number;
export const sweepmesh_vt: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;

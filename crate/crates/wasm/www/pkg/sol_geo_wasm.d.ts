/* tslint:disable */
/* eslint-disable */

/**
 * Ruled area-stationary surface swept from the characteristic curve with
 * frame direction `(cos α, sin α)` through `p0`.
 */
export class SweepMesh {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly cols: number;
    readonly orthogonality_defect: number;
    /**
     * Flat `x y z` per vertex, row-major over (ε, t).
     */
    readonly positions: Float64Array;
    readonly rows: number;
    readonly singular_loci: number;
    /**
     * `⟨V,T⟩` per vertex; it vanishes exactly on the singular curve.
     */
    readonly vt: Float64Array;
}

export function curve_fan(x0: number, y0: number, z0: number, count: number, t_max: number, samples: number): Float64Array;

export function residual_slice(expr: string, z: number, x0: number, x1: number, y0: number, y1: number, n: number): Float64Array;

export function sweep_mesh(alpha: number, x0: number, y0: number, z0: number, eps_half: number, t_half: number, rows: number, cols: number, skew: number): SweepMesh;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_sweepmesh_free: (a: number, b: number) => void;
    readonly curve_fan: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly residual_slice: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
    readonly sweep_mesh: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number];
    readonly sweepmesh_cols: (a: number) => number;
    readonly sweepmesh_orthogonality_defect: (a: number) => number;
    readonly sweepmesh_positions: (a: number) => [number, number];
    readonly sweepmesh_rows: (a: number) => number;
    readonly sweepmesh_singular_loci: (a: number) => number;
    readonly sweepmesh_vt: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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

/* tslint:disable */
/* eslint-disable */

/**
 * CED curve of a set of normalized errors.
 */
export class CedView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Percent.
     */
    readonly auc: number;
    /**
     * Percent of errors above the cutoff.
     */
    readonly failureRate: number;
    readonly fractions: Float64Array;
    readonly thresholds: Float64Array;
}

/**
 * One rendered face: RGBA pixels, the true landmarks and the landmarks
 * decoded from their heatmap.
 */
export class FaceView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly decoded: Float64Array;
    /**
     * `[x0, y0, x1, y1, ...]` for the 68 points.
     */
    readonly landmarks: Float64Array;
    /**
     * Largest distance between a true point and its decoded heatmap peak.
     */
    readonly maxDecodeError: number;
    /**
     * `size * size * 4` bytes, row-major.
     */
    readonly rgba: Uint8Array;
    readonly size: number;
}

export function cedCurve(errors: Float64Array, e_max: number): CedView;

export function renderFace(seed: number, frame: number, size: number, sigma: number, overlay: number, mirrored: boolean): FaceView;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_cedview_free: (a: number, b: number) => void;
    readonly __wbg_faceview_free: (a: number, b: number) => void;
    readonly cedCurve: (a: number, b: number, c: number) => [number, number, number];
    readonly cedview_auc: (a: number) => number;
    readonly cedview_failureRate: (a: number) => number;
    readonly cedview_fractions: (a: number) => [number, number];
    readonly cedview_thresholds: (a: number) => [number, number];
    readonly faceview_decoded: (a: number) => [number, number];
    readonly faceview_landmarks: (a: number) => [number, number];
    readonly faceview_rgba: (a: number) => [number, number];
    readonly faceview_size: (a: number) => number;
    readonly renderFace: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly faceview_maxDecodeError: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
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

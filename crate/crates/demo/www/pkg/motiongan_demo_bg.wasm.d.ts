/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_cedview_free: (a: number, b: number) => void;
export const __wbg_faceview_free: (a: number, b: number) => void;
export const cedCurve: (a: number, b: number, c: number) => [number, number, number];
export const cedview_auc: (a: number) => number;
export const cedview_failureRate: (a: number) => number;
export const cedview_fractions: (a: number) => [number, number];
export const cedview_thresholds: (a: number) => [number, number];
export const faceview_decoded: (a: number) => [number, number];
export const faceview_landmarks: (a: number) => [number, number];
export const faceview_rgba: (a: number) => [number, number];
export const faceview_size: (a: number) => number;
export const renderFace: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const faceview_maxDecodeError: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;

//! Row-major matrix products used by the dense and convolution layers.
//!
//! All three entry points share one cache-blocked kernel: operands are
//! packed into contiguous panels and multiplied in 4x4 register tiles. The
//! blocking is fixed, so the summation order (and therefore every result) is
//! the same on every run.

use alloc::vec::Vec;

const MR: usize = 4;
const NR: usize = 4;
const KC: usize = 256;
const MC: usize = 64;
const NC: usize = 1024;

/// A read-only matrix view with arbitrary row and column strides.
#[derive(Clone, Copy)]
struct View<'a> {
    data: &'a [f64],
    row_stride: usize,
    col_stride: usize,
}

impl View<'_> {
    #[inline(always)]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.row_stride + c * self.col_stride]
    }
}

/// Packs rows `r0..r0+rows`, columns `k0..k0+kc` of `a` as MR-row strips,
/// each stored column by column; the last strip is zero-padded.
fn pack_a(a: View, r0: usize, rows: usize, k0: usize, kc: usize, out: &mut Vec<f64>) {
    out.clear();
    for s in (0..rows).step_by(MR) {
        for p in 0..kc {
            for i in 0..MR {
                out.push(if s + i < rows { a.at(r0 + s + i, k0 + p) } else { 0.0 });
            }
        }
    }
}

/// Packs rows `k0..k0+kc`, columns `c0..c0+cols` of `b` as NR-column
/// strips, each stored row by row; the last strip is zero-padded.
fn pack_b(b: View, k0: usize, kc: usize, c0: usize, cols: usize, out: &mut Vec<f64>) {
    out.clear();
    for s in (0..cols).step_by(NR) {
        for p in 0..kc {
            for j in 0..NR {
                out.push(if s + j < cols { b.at(k0 + p, c0 + s + j) } else { 0.0 });
            }
        }
    }
}

#[inline(always)]
fn micro_kernel(kc: usize, a: &[f64], b: &[f64]) -> [[f64; NR]; MR] {
    let mut acc = [[0.0; NR]; MR];
    for (ap, bp) in a[..kc * MR].chunks_exact(MR).zip(b[..kc * NR].chunks_exact(NR)) {
        for i in 0..MR {
            for j in 0..NR {
                acc[i][j] += ap[i] * bp[j];
            }
        }
    }
    acc
}

/// `c[m x n] += A[m x k] * B[k x n]` for strided views; `c` is row-major.
fn gemm(c: &mut [f64], a: View, b: View, m: usize, k: usize, n: usize) {
    let mut a_pack = Vec::new();
    let mut b_pack = Vec::new();
    for jc in (0..n).step_by(NC) {
        let nc = NC.min(n - jc);
        for pc in (0..k).step_by(KC) {
            let kc = KC.min(k - pc);
            pack_b(b, pc, kc, jc, nc, &mut b_pack);
            for ic in (0..m).step_by(MC) {
                let mc = MC.min(m - ic);
                pack_a(a, ic, mc, pc, kc, &mut a_pack);
                for (js, b_strip) in b_pack.chunks_exact(kc * NR).enumerate() {
                    let j0 = jc + js * NR;
                    let nr = NR.min(n - j0);
                    for (is, a_strip) in a_pack.chunks_exact(kc * MR).enumerate() {
                        let i0 = ic + is * MR;
                        let mr = MR.min(m - i0);
                        let acc = micro_kernel(kc, a_strip, b_strip);
                        for (i, row) in acc.iter().enumerate().take(mr) {
                            let dst = &mut c[(i0 + i) * n + j0..][..nr];
                            for (d, v) in dst.iter_mut().zip(row) {
                                *d += v;
                            }
                        }
                    }
                }
            }
        }
    }
}

/// `c[m x n] += a[m x k] * b[k x n]`.
pub fn add_ab(c: &mut [f64], a: &[f64], b: &[f64], m: usize, k: usize, n: usize) {
    debug_assert_eq!(c.len(), m * n);
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    let a = View { data: a, row_stride: k, col_stride: 1 };
    let b = View { data: b, row_stride: n, col_stride: 1 };
    gemm(c, a, b, m, k, n);
}

/// `c[m x n] += a[m x k] * b[n x k]^T`.
pub fn add_abt(c: &mut [f64], a: &[f64], b: &[f64], m: usize, k: usize, n: usize) {
    debug_assert_eq!(c.len(), m * n);
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), n * k);
    let a = View { data: a, row_stride: k, col_stride: 1 };
    let b = View { data: b, row_stride: 1, col_stride: k };
    gemm(c, a, b, m, k, n);
}

/// `c[m x n] += a[k x m]^T * b[k x n]`.
pub fn add_atb(c: &mut [f64], a: &[f64], b: &[f64], m: usize, k: usize, n: usize) {
    debug_assert_eq!(c.len(), m * n);
    debug_assert_eq!(a.len(), k * m);
    debug_assert_eq!(b.len(), k * n);
    let a = View { data: a, row_stride: 1, col_stride: m };
    let b = View { data: b, row_stride: n, col_stride: 1 };
    gemm(c, a, b, m, k, n);
}

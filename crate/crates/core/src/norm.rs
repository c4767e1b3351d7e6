//! Operator (spectral) norm `σ_max`.
//!
//! [`operator_norm`] uses a closed form when the smaller side of the matrix
//! is at most 3, cyclic Jacobi on the Gram matrix for moderate sizes, and
//! power iteration with a fixed start vector beyond that. All routes are
//! deterministic.

use alloc::vec;
use alloc::vec::Vec;

use crate::matrix::{CMatrix, C64};

/// Gram dimension up to which Jacobi is used instead of power iteration.
pub const JACOBI_MAX_DIM: usize = 24;

pub const DEFAULT_TOL: f64 = 1e-12;

const POWER_MAX_ITER: usize = 20_000;

/// Gram matrix on the smaller side of `m`.
fn small_gram(m: &CMatrix) -> CMatrix {
    if m.rows() < m.cols() {
        m.adjoint().gram()
    } else {
        m.gram()
    }
}

/// `σ_max(m)`, with relative accuracy `tol` on the iterative route.
pub fn operator_norm(m: &CMatrix, tol: f64) -> f64 {
    if m.is_zero() {
        return 0.0;
    }
    if let Some(v) = closed_form_norm(m) {
        return v;
    }
    if m.rows().min(m.cols()) <= JACOBI_MAX_DIM {
        jacobi_norm(m)
    } else {
        power_norm(m, tol, POWER_MAX_ITER)
    }
}

/// Exact `σ_max` when `min(rows, cols) ≤ 3`, via the eigenvalues of the
/// Hermitian Gram matrix of size at most 3.
pub fn closed_form_norm(m: &CMatrix) -> Option<f64> {
    let k = m.rows().min(m.cols());
    if k == 0 {
        return Some(0.0);
    }
    if k > 3 {
        return None;
    }
    let g = small_gram(m);
    let lambda = match k {
        1 => g[(0, 0)].re,
        2 => {
            let a = g[(0, 0)].re;
            let d = g[(1, 1)].re;
            let b = g[(0, 1)].norm();
            let half = 0.5 * (a - d);
            0.5 * (a + d) + libm::hypot(half, b)
        }
        _ => hermitian3_max_eigenvalue(&g),
    };
    Some(libm::sqrt(lambda.max(0.0)))
}

/// Largest eigenvalue of a 3×3 Hermitian matrix (trigonometric solution of
/// the characteristic cubic).
fn hermitian3_max_eigenvalue(h: &CMatrix) -> f64 {
    let a00 = h[(0, 0)].re;
    let a11 = h[(1, 1)].re;
    let a22 = h[(2, 2)].re;
    let p1 = h[(0, 1)].norm_sqr() + h[(0, 2)].norm_sqr() + h[(1, 2)].norm_sqr();
    let q = (a00 + a11 + a22) / 3.0;
    if p1 == 0.0 {
        return a00.max(a11).max(a22);
    }
    let p2 = (a00 - q) * (a00 - q) + (a11 - q) * (a11 - q) + (a22 - q) * (a22 - q) + 2.0 * p1;
    let p = libm::sqrt(p2 / 6.0);
    let inv = 1.0 / p;
    let b = |i: usize, j: usize| {
        let v = h[(i, j)];
        if i == j {
            C64::new((v.re - q) * inv, 0.0)
        } else {
            v * inv
        }
    };
    let det = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1))
        - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
        + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
    let r = (0.5 * det.re).clamp(-1.0, 1.0);
    let phi = libm::acos(r) / 3.0;
    q + 2.0 * p * libm::cos(phi)
}

/// `σ_max` from the largest eigenvalue of the Gram matrix, computed by
/// cyclic Jacobi on its real symmetric embedding `[[Re, -Im], [Im, Re]]`.
pub fn jacobi_norm(m: &CMatrix) -> f64 {
    if m.rows().min(m.cols()) == 0 {
        return 0.0;
    }
    let g = small_gram(m);
    let k = g.rows();
    let n = 2 * k;
    let mut a = vec![0.0f64; n * n];
    for i in 0..k {
        for j in 0..k {
            let z = g[(i, j)];
            a[i * n + j] = z.re;
            a[(i + k) * n + j + k] = z.re;
            a[i * n + j + k] = -z.im;
            a[(i + k) * n + j] = z.im;
        }
    }
    let lambda = symmetric_max_eigenvalue(&mut a, n);
    libm::sqrt(lambda.max(0.0))
}

fn symmetric_max_eigenvalue(a: &mut [f64], n: usize) -> f64 {
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>();
    if scale == 0.0 {
        return 0.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = {
                    let s = if theta >= 0.0 { 1.0 } else { -1.0 };
                    s / (theta.abs() + libm::sqrt(theta * theta + 1.0))
                };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for r in 0..n {
                    let arp = a[r * n + p];
                    let arq = a[r * n + q];
                    a[r * n + p] = c * arp - s * arq;
                    a[r * n + q] = s * arp + c * arq;
                }
                for r in 0..n {
                    let apr = a[p * n + r];
                    let aqr = a[q * n + r];
                    a[p * n + r] = c * apr - s * aqr;
                    a[q * n + r] = s * apr + c * aqr;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).fold(f64::NEG_INFINITY, f64::max)
}

/// Power iteration on `A* A` from a fixed start vector.
///
/// Stops once the Rayleigh quotient changes by less than `1e-3 · tol`
/// (relative) on three consecutive steps, or after `max_iter` steps.
pub fn power_norm(m: &CMatrix, tol: f64, max_iter: usize) -> f64 {
    let n = m.cols();
    if n == 0 || m.rows() == 0 || m.is_zero() {
        return 0.0;
    }
    // fixed, non-symmetric start avoids orthogonality to structured top vectors
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
    let mut v: Vec<C64> = (0..n)
        .map(|_| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = ((state >> 11) as f64) / ((1u64 << 53) as f64);
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let b = ((state >> 11) as f64) / ((1u64 << 53) as f64);
            C64::new(0.5 + a, b - 0.5)
        })
        .collect();
    normalize(&mut v);
    let mut lambda = 0.0f64;
    let mut calm = 0;
    let mut av = vec![C64::new(0.0, 0.0); m.rows()];
    let mut w = vec![C64::new(0.0, 0.0); n];
    for _ in 0..max_iter {
        for (i, out) in av.iter_mut().enumerate() {
            *out = m.row(i).iter().zip(&v).map(|(a, x)| a * x).sum();
        }
        for x in w.iter_mut() {
            *x = C64::new(0.0, 0.0);
        }
        for (i, &ai) in av.iter().enumerate() {
            for (x, a) in w.iter_mut().zip(m.row(i)) {
                *x += a.conj() * ai;
            }
        }
        let next: f64 = av.iter().map(|z| z.norm_sqr()).sum();
        let norm_w = normalize(&mut w);
        core::mem::swap(&mut v, &mut w);
        if (next - lambda).abs() <= 1e-3 * tol * next {
            calm += 1;
            if calm >= 3 {
                lambda = next;
                break;
            }
        } else {
            calm = 0;
        }
        lambda = next;
        if norm_w == 0.0 {
            break;
        }
    }
    libm::sqrt(lambda.max(0.0))
}

fn normalize(v: &mut [C64]) -> f64 {
    let norm = libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>());
    if norm > 0.0 {
        for z in v.iter_mut() {
            *z /= norm;
        }
    }
    norm
}

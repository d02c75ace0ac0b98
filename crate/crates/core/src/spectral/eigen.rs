//! Dense symmetric eigensolver: Householder tridiagonalization followed by the
//! implicit QL iteration with Wilkinson-style shifts (the EISPACK `tred2` /
//! `tql2` pair). Deterministic for a given input.

use serde::Serialize;

use super::matrix::{SymMatrix, SYMMETRY_TOL};
use crate::error::{invalid, Error, Result};

/// Default relative deflation threshold.
pub const DEFAULT_EIG_TOL: f64 = 1e-10;

/// QL sweeps allowed per eigenvalue before giving up.
const MAX_QL_ITERS: usize = 60;

/// Full eigendecomposition, eigenvalues ascending.
///
/// `vectors[i]` is the unit eigenvector for `values[i]`, sign-normalized so
/// that its first entry of magnitude above `1e-10` is positive.
#[derive(Clone, Debug, Serialize)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.vectors[i]
    }

    /// Reassembles `Σ f(λᵢ) vᵢ vᵢᵀ`.
    pub fn reconstruct_with(&self, mut f: impl FnMut(f64) -> f64) -> SymMatrix {
        let n = self.len();
        let mut out = SymMatrix::zeros(n);
        for (lambda, v) in self.values.iter().zip(&self.vectors) {
            let w = f(*lambda);
            if w != 0.0 {
                out.add_outer(v, w);
            }
        }
        out
    }
}

/// Eigendecomposition with the default deflation threshold.
pub fn eig_sym(a: &SymMatrix) -> Result<Spectrum> {
    eig_sym_with_tol(a, DEFAULT_EIG_TOL)
}

/// Eigendecomposition of a symmetric matrix.
///
/// `tol` is the relative threshold below which an off-diagonal entry of the
/// tridiagonal form is treated as zero; it is floored at machine epsilon.
pub fn eig_sym_with_tol(a: &SymMatrix, tol: f64) -> Result<Spectrum> {
    if !(tol > 0.0) {
        return Err(invalid(format!("eigensolver tolerance must be positive, got {tol}")));
    }
    let scale = a.as_slice().iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    if a.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(invalid("matrix has non-finite entries"));
    }
    if a.asymmetry() > SYMMETRY_TOL * scale {
        return Err(invalid("eigensolver input is not symmetric"));
    }
    let n = a.n();
    if n == 0 {
        return Ok(Spectrum {
            values: vec![],
            vectors: vec![],
        });
    }

    let mut v = a.as_slice().to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(n, &mut v, &mut d, &mut e);
    // Eigenvectors are accumulated as rows so each plane rotation touches
    // two contiguous slices.
    let mut vt = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            vt[j * n + i] = v[i * n + j];
        }
    }
    ql_implicit(n, &mut vt, &mut d, &mut e, tol.max(f64::EPSILON))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = order
        .iter()
        .map(|&row| {
            let mut vec = vt[row * n..(row + 1) * n].to_vec();
            canonicalize_sign(&mut vec);
            vec
        })
        .collect();
    Ok(Spectrum { values, vectors })
}

/// Flips `v` so that its first entry with magnitude above `1e-10` is positive.
pub fn canonicalize_sign(v: &mut [f64]) {
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-10) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

// Householder reduction to tridiagonal form. On exit `v` holds the orthogonal
// transformation (row-major), `d` the diagonal and `e[1..]` the subdiagonal.
fn tridiagonalize(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    let idx = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in &d[..i] {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = 0.0;
                v[idx(j, i)] = 0.0;
            }
        } else {
            for dk in &mut d[..i] {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in &mut e[..i] {
                *ej = 0.0;
            }

            for j in 0..i {
                f = d[j];
                v[idx(j, i)] = f;
                g = e[j] + v[idx(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[idx(k, j)] * d[k];
                    e[k] += v[idx(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[idx(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    // Accumulate the transformations.
    for i in 0..(n - 1) {
        v[idx(n - 1, i)] = v[idx(i, i)];
        v[idx(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[idx(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[idx(k, i + 1)] * v[idx(k, j)];
                }
                for k in 0..=i {
                    v[idx(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[idx(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
        v[idx(n - 1, j)] = 0.0;
    }
    v[idx(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

// Implicit QL on the tridiagonal (d, e), rotating the rows of `vt`.
fn ql_implicit(n: usize, vt: &mut [f64], d: &mut [f64], e: &mut [f64], tol: f64) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1 = 0.0_f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > tol * tst1 {
            m += 1;
        }

        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERS {
                    return Err(Error::NumericFailure(format!(
                        "QL iteration did not converge for eigenvalue {l} of {n} \
                         (residual off-diagonal {:.3e})",
                        e[l].abs()
                    )));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in &mut d[(l + 2)..n] {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (head, tail) = vt.split_at_mut((i + 1) * n);
                    let row_i = &mut head[i * n..];
                    let row_i1 = &mut tail[..n];
                    for (vk, vk1) in row_i.iter_mut().zip(row_i1.iter_mut()) {
                        let (a, b) = (*vk, *vk1);
                        *vk1 = s * a + c * b;
                        *vk = c * a - s * b;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= tol * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

//! ADMM for the fairness-constrained SDP relaxation
//!
//! ```text
//! maximize ⟨X, Y⟩  subject to  Y_ii = 1,  aᵢᵀ Y aᵢ = 0,  Y ⪰ 0.
//! ```
//!
//! For PSD `Y`, `aᵀYa = 0` is equivalent to `Ya = 0`, so the constraints split
//! into the affine set `A = {Y : diag(Y) = 1, Y aᵢ = 0}` and the PSD cone.
//! The iteration (scaled form, `Y = Z` consensus) is
//!
//! ```text
//! Y ← Π_A(Z − U + X/ρ)
//! Z ← Π_PSD(Y + U)
//! U ← U + Y − Z
//! ```
//!
//! `Π_A` is computed exactly. With `P` the projector onto `span{aᵢ}⊥`, the set
//! `{Y : Y = PYP}` is a subspace whose diagonal-constraint normals are
//! `P eᵢ eᵢᵀ P` with Gram matrix `P ∘ P`, so
//! `Π_A(W) = PWP + P diag(μ) P` with `(P ∘ P) μ = 1 − diag(PWP)`.
//! The Gram pseudo-inverse is factored once per solve.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::spectral::{dot, eig_sym, norm2, SymMatrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SdpConfig {
    /// Bound on `‖Y − Z‖_F` at convergence.
    pub primal_tol: f64,
    /// Bound on `ρ‖Z − Z_prev‖_F` at convergence.
    pub dual_tol: f64,
    pub max_iters: usize,
    /// Initial ADMM penalty ρ; rebalanced when one residual dominates.
    pub penalty: f64,
}

impl Default for SdpConfig {
    fn default() -> Self {
        Self {
            primal_tol: 1e-6,
            dual_tol: 1e-6,
            max_iters: 20_000,
            penalty: 1.0,
        }
    }
}

impl SdpConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.primal_tol > 0.0 && self.dual_tol > 0.0) {
            return Err(invalid("SDP tolerances must be positive"));
        }
        if self.max_iters == 0 {
            return Err(invalid("max_iters must be at least 1"));
        }
        if !(self.penalty > 0.0 && self.penalty.is_finite()) {
            return Err(invalid("ADMM penalty must be positive and finite"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SdpStatus {
    Converged,
    IterationCap,
}

#[derive(Clone, Debug, Serialize)]
pub struct SdpSolution {
    /// Satisfies `diag = 1` and `Y aᵢ = 0` to rounding; PSD up to `primal_residual`.
    pub y_matrix: SymMatrix,
    /// `⟨X, Y⟩`.
    pub objective: f64,
    pub status: SdpStatus,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Number of linearly independent attribute directions enforced.
    pub constraint_rank: usize,
    /// Attributes dropped as linearly dependent on earlier ones.
    pub dropped_attributes: usize,
}

/// Relative residual below which an attribute counts as dependent.
const DEPENDENCE_TOL: f64 = 1e-8;
/// Relative eigenvalue cutoff in the Gram pseudo-inverse.
const GRAM_PINV_TOL: f64 = 1e-12;
/// Residual-balancing factor and cadence for the adaptive penalty.
const BALANCE_RATIO: f64 = 2.0;
const BALANCE_EVERY: usize = 100;

/// Solves the relaxation with the attributes as `aᵢᵀYaᵢ = 0` constraints.
///
/// Hitting `max_iters` is reported through [`SdpStatus::IterationCap`], with the
/// best iterate seen. Linearly dependent attributes are dropped and counted.
pub fn solve_sdp(x: &SymMatrix, attributes: &[Vec<f64>], cfg: &SdpConfig) -> Result<SdpSolution> {
    cfg.validate()?;
    let n = x.n();
    if n == 0 {
        return Err(invalid("empty observation matrix"));
    }
    if let Some(i) = (0..n).find(|&i| x.get(i, i) != 0.0) {
        return Err(invalid(format!("observation matrix has nonzero diagonal at {i}")));
    }
    for (i, a) in attributes.iter().enumerate() {
        if a.len() != n {
            return Err(invalid(format!("attribute {i} has length {}, expected {n}", a.len())));
        }
    }

    let proj = AffineProjector::new(n, attributes)?;
    let mut rho = cfg.penalty;
    let mut z = proj.project(&SymMatrix::identity(n));
    let mut u = SymMatrix::zeros(n);
    let mut y = z.clone();

    let mut best: Option<(f64, SymMatrix, f64, f64, usize)> = None;
    let mut primal = f64::INFINITY;
    let mut dual = f64::INFINITY;
    let mut iterations = 0;
    let mut status = SdpStatus::IterationCap;

    for it in 1..=cfg.max_iters {
        iterations = it;
        let mut w = z.clone();
        w.add_scaled(&u, -1.0);
        w.add_scaled(x, 1.0 / rho);
        y = proj.project(&w);

        let mut v = y.clone();
        v.add_scaled(&u, 1.0);
        let z_new = project_psd(&v)?;

        let mut diff = y.clone();
        diff.add_scaled(&z_new, -1.0);
        primal = diff.frobenius();
        let mut dz = z_new.clone();
        dz.add_scaled(&z, -1.0);
        dual = rho * dz.frobenius();
        u.add_scaled(&diff, 1.0);
        z = z_new;

        if !(primal.is_finite() && dual.is_finite()) {
            return Err(Error::NumericFailure(format!(
                "ADMM iterate became non-finite at iteration {it}"
            )));
        }

        if primal <= cfg.primal_tol && dual <= cfg.dual_tol {
            status = SdpStatus::Converged;
            break;
        }

        let score = (primal / cfg.primal_tol).max(dual / cfg.dual_tol);
        if best.as_ref().map_or(true, |b| score < b.0) {
            best = Some((score, y.clone(), primal, dual, it));
        }

        if it % BALANCE_EVERY == 0 {
            if primal > BALANCE_RATIO * dual {
                rho *= 2.0;
                u = u.scaled(0.5);
            } else if dual > BALANCE_RATIO * primal {
                rho *= 0.5;
                u = u.scaled(2.0);
            }
        }
    }

    if status == SdpStatus::IterationCap {
        if let Some((_, by, bp, bd, _)) = best {
            y = by;
            primal = bp;
            dual = bd;
        }
    }

    Ok(SdpSolution {
        objective: x.inner(&y),
        y_matrix: y,
        status,
        iterations,
        primal_residual: primal,
        dual_residual: dual,
        constraint_rank: proj.basis.len(),
        dropped_attributes: attributes.len() - proj.basis.len(),
    })
}

/// Nearest PSD matrix in Frobenius norm: negative eigenvalues clipped to 0.
pub fn project_psd(m: &SymMatrix) -> Result<SymMatrix> {
    let spec = eig_sym(m)?;
    Ok(spec.reconstruct_with(|l| l.max(0.0)))
}

/// Orthonormalizes `vectors` by two-pass modified Gram–Schmidt, skipping those
/// already in the span of earlier ones.
pub fn orthonormal_basis(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for a in vectors {
        let scale = norm2(a);
        if scale == 0.0 {
            continue;
        }
        let mut v = a.clone();
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&v, q);
                v.iter_mut().zip(q).for_each(|(vi, qi)| *vi -= c * qi);
            }
        }
        let r = norm2(&v);
        if r > DEPENDENCE_TOL * scale {
            v.iter_mut().for_each(|vi| *vi /= r);
            basis.push(v);
        }
    }
    basis
}

/// Exact Frobenius projection onto `{Y : diag(Y) = 1, Y q = 0 for q in basis}`.
pub(crate) struct AffineProjector {
    n: usize,
    basis: Vec<Vec<f64>>,
    gram: SymMatrix,
    gram_pinv: SymMatrix,
}

impl AffineProjector {
    pub(crate) fn new(n: usize, attributes: &[Vec<f64>]) -> Result<Self> {
        let basis = orthonormal_basis(attributes);
        if basis.len() >= n {
            return Err(invalid(format!(
                "{} independent attributes leave no room for a unit-diagonal solution in dimension {n}",
                basis.len()
            )));
        }
        let (gram, gram_pinv) = if basis.is_empty() {
            (SymMatrix::identity(n), SymMatrix::identity(n))
        } else {
            let p = SymMatrix::from_fn(n, |i, j| {
                let delta = if i == j { 1.0 } else { 0.0 };
                delta - basis.iter().map(|q| q[i] * q[j]).sum::<f64>()
            });
            let gram = SymMatrix::from_fn(n, |i, j| p.get(i, j).powi(2));
            let spec = eig_sym(&gram)?;
            let cutoff = GRAM_PINV_TOL * spec.max().abs().max(1.0);
            let pinv = spec.reconstruct_with(|l| if l > cutoff { 1.0 / l } else { 0.0 });
            (gram, pinv)
        };
        Ok(Self {
            n,
            basis,
            gram,
            gram_pinv,
        })
    }

    /// `P W P` via the low-rank expansion of `P = I − QQᵀ`.
    fn compress(&self, w: &mut SymMatrix) {
        if self.basis.is_empty() {
            return;
        }
        let n = self.n;
        let r = self.basis.len();
        let wq: Vec<Vec<f64>> = self.basis.iter().map(|q| w.matvec(q)).collect();
        let qwq: Vec<Vec<f64>> = (0..r)
            .map(|a| {
                (0..r)
                    .map(|b| 0.5 * (dot(&self.basis[a], &wq[b]) + dot(&self.basis[b], &wq[a])))
                    .collect()
            })
            .collect();
        let data = w.as_mut_slice();
        for i in 0..n {
            for j in i..n {
                let mut corr = 0.0;
                for a in 0..r {
                    let qa = &self.basis[a];
                    corr += qa[i] * wq[a][j] + wq[a][i] * qa[j];
                    for b in 0..r {
                        corr -= qa[i] * qwq[a][b] * self.basis[b][j];
                    }
                }
                data[i * n + j] -= corr;
                if j != i {
                    data[j * n + i] -= corr;
                }
            }
        }
    }

    pub(crate) fn project(&self, w: &SymMatrix) -> SymMatrix {
        let n = self.n;
        let mut b = w.clone();
        self.compress(&mut b);
        let resid: Vec<f64> = (0..n).map(|i| 1.0 - b.get(i, i)).collect();
        let mut mu = self.gram_pinv.matvec(&resid);
        // One step of iterative refinement against the conditioning of P ∘ P.
        let gm = self.gram.matvec(&mu);
        let r2: Vec<f64> = resid.iter().zip(&gm).map(|(r, g)| r - g).collect();
        for (m, d) in mu.iter_mut().zip(self.gram_pinv.matvec(&r2)) {
            *m += d;
        }
        let mut corr = SymMatrix::from_diag(&mu);
        self.compress(&mut corr);
        b.add_scaled(&corr, 1.0);
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{labels_to_f64, sample_fair_attributes, sample_labels};

    #[test]
    fn projection_is_feasible_and_idempotent() {
        let y = sample_labels(12, 4);
        let attrs = sample_fair_attributes(&y, 2, 5).unwrap();
        let proj = AffineProjector::new(12, &attrs).unwrap();
        let w = SymMatrix::from_fn(12, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        let p = proj.project(&w);
        for i in 0..12 {
            assert!((p.get(i, i) - 1.0).abs() < 1e-12, "{}", p.get(i, i) - 1.0);
        }
        for a in &attrs {
            assert!(norm2(&p.matvec(a)) < 1e-12);
        }
        let pp = proj.project(&p);
        let mut d = pp.clone();
        d.add_scaled(&p, -1.0);
        assert!(d.frobenius() < 1e-12);
    }

    #[test]
    fn projection_is_orthogonal() {
        // W − Π(W) must be orthogonal to every feasible direction Π(V) − Π(W).
        let y = sample_labels(9, 1);
        let attrs = sample_fair_attributes(&y, 1, 2).unwrap();
        let proj = AffineProjector::new(9, &attrs).unwrap();
        let w = SymMatrix::from_fn(9, |i, j| ((i + 2 * j) as f64).sin());
        let v = SymMatrix::from_fn(9, |i, j| ((3 * i + j) as f64).cos());
        let pw = proj.project(&w);
        let pv = proj.project(&v);
        let mut r = w.clone();
        r.add_scaled(&pw, -1.0);
        let mut dir = pv.clone();
        dir.add_scaled(&pw, -1.0);
        assert!(r.inner(&dir).abs() < 1e-10);
    }

    #[test]
    fn planted_matrix_is_a_fixed_point_of_projection() {
        let y = sample_labels(10, 3);
        let yf = labels_to_f64(&y);
        let attrs = sample_fair_attributes(&y, 2, 3).unwrap();
        let proj = AffineProjector::new(10, &attrs).unwrap();
        let planted = SymMatrix::outer(&yf);
        let mut d = proj.project(&planted);
        d.add_scaled(&planted, -1.0);
        assert!(d.frobenius() < 1e-12);
    }

    #[test]
    fn dependent_attributes_are_dropped() {
        let a = vec![1.0, -1.0, 0.0, 0.0];
        let b = vec![2.0, -2.0, 0.0, 0.0];
        let c = vec![0.0, 0.0, 1.0, -1.0];
        assert_eq!(orthonormal_basis(&[a, b, c]).len(), 2);
    }

    #[test]
    fn psd_projection_clips_negative_part() {
        let m = SymMatrix::from_diag(&[-1.0, 2.0]);
        assert_eq!(project_psd(&m).unwrap().diag(), vec![0.0, 2.0]);
    }

    #[test]
    fn config_validation() {
        assert!(SdpConfig::default().validate().is_ok());
        let bad = SdpConfig {
            max_iters: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SdpConfig {
            primal_tol: -1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let cfg: SdpConfig = serde_json::from_str(r#"{"max_iters": 50}"#).unwrap();
        assert_eq!(cfg.max_iters, 50);
        assert_eq!(cfg.primal_tol, 1e-6);
    }

    #[test]
    fn zero_objective_returns_feasible_point() {
        let x = SymMatrix::zeros(5);
        let sol = solve_sdp(&x, &[], &SdpConfig::default()).unwrap();
        assert!(sol.objective.abs() < 1e-6);
        for i in 0..5 {
            assert!((sol.y_matrix.get(i, i) - 1.0).abs() < 1e-6);
        }
        assert!(eig_sym(&sol.y_matrix).unwrap().min() >= -1e-5);
    }

    #[test]
    fn rejects_nonzero_diagonal_and_bad_attributes() {
        let x = SymMatrix::identity(3);
        assert!(solve_sdp(&x, &[], &SdpConfig::default()).is_err());
        let x = SymMatrix::zeros(3);
        assert!(solve_sdp(&x, &[vec![1.0, 2.0]], &SdpConfig::default()).is_err());
    }
}

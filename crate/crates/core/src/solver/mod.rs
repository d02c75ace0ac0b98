//! Inference: the SDP relaxation, sign rounding with a majority vote, the
//! dual certificate that proves the planted labeling is the unique SDP
//! optimum, and an exhaustive oracle for the combinatorial problem.

mod brute;
mod sdp;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::model::{check_labels, labels_to_f64};
use crate::spectral::{eig_sym, norm2, SymMatrix};

pub use brute::{brute_force, BruteForceResult, BRUTE_FORCE_MAX_N, DEFAULT_FEAS_TOL};
pub use sdp::{orthonormal_basis, project_psd, solve_sdp, SdpConfig, SdpSolution, SdpStatus};

/// `λ₂(Λ)` must exceed this for the certificate to hold.
pub const CERTIFICATE_TOL: f64 = 1e-9;

/// Signs of the top eigenvector of `sol.y_matrix`, then globally flipped when
/// that disagrees with the majority of `c`.
pub fn round_solution(sol: &SdpSolution, c: &[i8]) -> Result<Vec<i8>> {
    round_matrix(&sol.y_matrix, c)
}

/// Rounding rule of [`round_solution`] applied to any symmetric matrix.
///
/// `sign(0) = +1`; the vote keeps the vector unless `cᵀŷ < 0`.
pub fn round_matrix(y: &SymMatrix, c: &[i8]) -> Result<Vec<i8>> {
    if c.len() != y.n() {
        return Err(invalid(format!("c has length {}, expected {}", c.len(), y.n())));
    }
    let spec = eig_sym(y)?;
    let top = spec.vector(spec.len() - 1);
    let mut labels: Vec<i8> = top.iter().map(|&v| if v < 0.0 { -1 } else { 1 }).collect();
    let vote: i64 = labels
        .iter()
        .zip(c)
        .map(|(&l, &ci)| i64::from(l) * i64::from(ci))
        .sum();
    if vote < 0 {
        labels.iter_mut().for_each(|l| *l = -*l);
    }
    Ok(labels)
}

/// Entrywise equality of two label vectors.
pub fn check_exact_recovery(y_hat: &[i8], y_bar: &[i8]) -> Result<bool> {
    if y_hat.len() != y_bar.len() {
        return Err(invalid(format!(
            "label vectors differ in length: {} vs {}",
            y_hat.len(),
            y_bar.len()
        )));
    }
    Ok(y_hat == y_bar)
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateReport {
    /// Second-smallest eigenvalue of `Λ`.
    pub lambda2: f64,
    /// Smallest eigenvalue of `Λ`; zero (up to rounding) whenever `Λ ⪰ 0`.
    pub lambda1: f64,
    pub holds: bool,
    /// `‖Λȳ‖₂`, zero by construction.
    pub residual_null: f64,
    /// `‖Λ‖_F`, the scale for `residual_null`.
    pub lambda_norm: f64,
}

/// The dual witness `Λ = V − X + n·Σ aᵢaᵢᵀ` with `V = diag(X ȳ ∘ ȳ)`.
pub fn certificate_matrix(x: &SymMatrix, attributes: &[Vec<f64>], y_bar: &[i8]) -> Result<SymMatrix> {
    let n = x.n();
    if y_bar.len() != n {
        return Err(invalid(format!("labels have length {}, expected {n}", y_bar.len())));
    }
    check_labels(y_bar)?;
    let y = labels_to_f64(y_bar);
    let xy = x.matvec(&y);
    let mut lambda = x.scaled(-1.0);
    for i in 0..n {
        lambda.set(i, i, lambda.get(i, i) + xy[i] * y[i]);
    }
    for (i, a) in attributes.iter().enumerate() {
        if a.len() != n {
            return Err(invalid(format!("attribute {i} has length {}, expected {n}", a.len())));
        }
        lambda.add_outer(a, n as f64);
    }
    Ok(lambda)
}

/// Checks `λ₂(Λ) > 0`, which makes `ȳȳᵀ` the unique optimum of the relaxation.
///
/// Since `Λȳ = 0` always, `λ₂(Λ) > 0` also implies `Λ ⪰ 0`.
pub fn dual_certificate(x: &SymMatrix, attributes: &[Vec<f64>], y_bar: &[i8]) -> Result<CertificateReport> {
    let lambda = certificate_matrix(x, attributes, y_bar)?;
    let spec = eig_sym(&lambda)?;
    let lambda2 = if spec.len() >= 2 { spec.values[1] } else { f64::INFINITY };
    Ok(CertificateReport {
        lambda2,
        lambda1: spec.min(),
        holds: lambda2 > CERTIFICATE_TOL,
        residual_null: norm2(&lambda.matvec(&labels_to_f64(y_bar))),
        lambda_norm: lambda.frobenius(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{complete, grid};
    use crate::model::{generate, observe, sample_labels, Instance};

    fn solution_from(y: SymMatrix) -> SdpSolution {
        SdpSolution {
            objective: 0.0,
            y_matrix: y,
            status: SdpStatus::Converged,
            iterations: 0,
            primal_residual: 0.0,
            dual_residual: 0.0,
            constraint_rank: 0,
            dropped_attributes: 0,
        }
    }

    #[test]
    fn rounding_rank_one() {
        let y_bar: Vec<i8> = vec![1, -1, -1, 1, 1];
        let sol = solution_from(SymMatrix::outer(&labels_to_f64(&y_bar)));
        assert_eq!(round_solution(&sol, &y_bar).unwrap(), y_bar);
        let neg: Vec<i8> = y_bar.iter().map(|v| -v).collect();
        assert_eq!(round_solution(&sol, &neg).unwrap(), neg);
    }

    #[test]
    fn rounding_vote_example() {
        let y_bar: Vec<i8> = vec![1, 1, -1, -1];
        let sol = solution_from(SymMatrix::outer(&labels_to_f64(&y_bar)));
        // cᵀȳ = 1 − 1 + 1 + 1 = 2 > 0.
        assert_eq!(round_solution(&sol, &[1, -1, -1, -1]).unwrap(), y_bar);
    }

    #[test]
    fn rounding_tie_keeps_orientation() {
        let y_bar: Vec<i8> = vec![1, -1];
        let sol = solution_from(SymMatrix::outer(&labels_to_f64(&y_bar)));
        let kept = round_solution(&sol, &[1, 1]).unwrap();
        // Eigenvectors are sign-normalized, so the unflipped rounding starts with +1.
        assert_eq!(kept, vec![1, -1]);
    }

    #[test]
    fn exact_recovery_check() {
        let y: Vec<i8> = vec![1, -1, 1];
        assert!(check_exact_recovery(&y, &y).unwrap());
        assert!(!check_exact_recovery(&[-1, 1, -1], &y).unwrap());
        assert!(!check_exact_recovery(&[1, -1, -1], &y).unwrap());
        assert!(check_exact_recovery(&[1], &y).is_err());
    }

    #[test]
    fn certificate_null_vector_identity() {
        for seed in 0..20 {
            let (inst, obs) = generate(grid(3, 4).unwrap(), (seed % 3) as usize, 0.2, 0.2, seed).unwrap();
            let rep = dual_certificate(&obs.x, inst.attributes(), inst.y_bar()).unwrap();
            assert!(rep.residual_null <= 1e-9 * rep.lambda_norm);
        }
    }

    #[test]
    fn noiseless_certificate_dominates_algebraic_connectivity() {
        let g = grid(3, 5).unwrap();
        let l2 = eig_sym(&g.laplacian()).unwrap().values[1];
        for seed in 0..5 {
            let y = sample_labels(15, seed);
            let inst = Instance::new(g.clone(), y.clone(), vec![]).unwrap();
            let obs = observe(&inst, 0.0, 0.0, seed).unwrap();
            let rep = dual_certificate(&obs.x, &[], &y).unwrap();
            assert!(rep.holds);
            assert!(rep.lambda2 >= l2 - 1e-8);
        }
    }

    #[test]
    fn adversarial_observation_breaks_certificate() {
        let g = complete(6).unwrap();
        let y: Vec<i8> = vec![1, -1, 1, 1, -1, -1];
        let inst = Instance::new(g, y.clone(), vec![]).unwrap();
        let clean = observe(&inst, 0.0, 0.0, 0).unwrap();
        let rep = dual_certificate(&clean.x.scaled(-1.0), &[], &y).unwrap();
        assert!(!rep.holds);
        assert!(rep.lambda1 < 0.0);
    }
}

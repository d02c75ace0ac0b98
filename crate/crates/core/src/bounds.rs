//! Minimum-eigenvalue perturbation bound for PSD matrices under a low-rank PSD
//! update, and the exact-recovery probability bound built from it.
//!
//! For PSD `M` with gap `Δ = λ₂(M) − λ₁(M)` and first eigenvector `q₁`, and
//! PSD `N` with eigenpairs `(λᵢ(N), vᵢ)`, every nonzero eigenpair of `N` gives
//!
//! ```text
//! λ₁(M + αN) ≥ λ₁(M) + (αᵢ + Δ)/2 − √(((αᵢ + Δ)/2)² − αᵢ·Δ·(vᵢᵀq₁)²),   αᵢ = α·λᵢ(N).
//! ```
//!
//! The recovery bound applies the same bracket to the graph Laplacian (with
//! `α = n`) to obtain `ε₁`, adds the expansion term `ε₂`, and plugs the sum
//! into a matrix Bernstein tail.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graphs::{edge_expansion, CheegerResult, ExpansionMode, Graph, EXACT_EXPANSION_MAX_N};
use crate::spectral::{dot, eig_sym, eigen_gap, laplacian_spectrum, SymMatrix};

/// Tolerance on the PSD preconditions (`λ₁ ≥ −PSD_TOL`).
pub const PSD_TOL: f64 = 1e-9;
/// Eigenvalues of `N` at or below `RANK_TOL · λ_max(N)` count as zero.
pub const RANK_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct Lemma1Input {
    pub m: SymMatrix,
    pub n_mat: SymMatrix,
    pub alpha_scale: f64,
}

/// `(a + Δ)/2 − √(((a + Δ)/2)² − a·Δ·s)` for `a, Δ ≥ 0` and `s = (vᵀq)² ∈ [0, 1]`.
///
/// Evaluated as `a·Δ·s / (b + √(b² − a·Δ·s))` with `b = (a + Δ)/2` to avoid
/// cancellation when the bracket is small.
pub fn perturbation_bracket(a: f64, delta: f64, proj_sq: f64) -> Result<f64> {
    let b = 0.5 * (a + delta);
    let c = a * delta * proj_sq;
    if b <= 0.0 || c <= 0.0 {
        return Ok(0.0);
    }
    let mut radicand = b * b - c;
    if radicand < 0.0 {
        if radicand < -1e-12 * b * b.max(1.0) {
            return Err(Error::NumericFailure(format!(
                "negative radicand {radicand:e} in perturbation bound (a = {a}, delta = {delta}, s = {proj_sq})"
            )));
        }
        radicand = 0.0;
    }
    Ok(c / (b + radicand.sqrt()))
}

/// Lower bound on `λ₁(M + α·N)`.
pub fn lemma1_bound(inp: &Lemma1Input) -> Result<f64> {
    let dim = inp.m.n();
    if inp.n_mat.n() != dim {
        return Err(invalid("M and N differ in dimension"));
    }
    if !(inp.alpha_scale >= 0.0 && inp.alpha_scale.is_finite()) {
        return Err(invalid(format!("alpha must be non-negative, got {}", inp.alpha_scale)));
    }
    if dim == 0 {
        return Err(invalid("empty matrices"));
    }
    let sm = eig_sym(&inp.m)?;
    let sn = eig_sym(&inp.n_mat)?;
    if sm.min() < -PSD_TOL || sn.min() < -PSD_TOL {
        return Err(invalid("M and N must be positive semidefinite"));
    }
    let lambda1 = sm.min();
    if dim == 1 {
        return Ok(lambda1);
    }
    let delta = sm.values[1] - sm.values[0];
    let q1 = sm.vector(0);
    let cutoff = RANK_TOL * sn.max().max(0.0);
    let mut best = 0.0_f64;
    for (ln, v) in sn.values.iter().zip(&sn.vectors) {
        if *ln <= cutoff {
            continue;
        }
        let proj = dot(v, q1);
        best = best.max(perturbation_bracket(inp.alpha_scale * ln, delta, proj * proj)?);
    }
    Ok(lambda1 + best)
}

/// Weyl's bound `λ₁(M) + α·λ₁(N)`.
pub fn weyl_bound(m: &SymMatrix, n_mat: &SymMatrix, alpha_scale: f64) -> Result<f64> {
    if m.n() != n_mat.n() || m.n() == 0 {
        return Err(invalid("M and N must be nonempty and of equal dimension"));
    }
    Ok(eig_sym(m)?.min() + alpha_scale * eig_sym(n_mat)?.min())
}

/// `Σ aᵢaᵢᵀ`.
pub fn attribute_gram(n: usize, attributes: &[Vec<f64>]) -> Result<SymMatrix> {
    let mut out = SymMatrix::zeros(n);
    for (i, a) in attributes.iter().enumerate() {
        if a.len() != n {
            return Err(invalid(format!("attribute {i} has length {}, expected {n}", a.len())));
        }
        out.add_outer(a, 1.0);
    }
    Ok(out)
}

/// Fairness term `ε₁`: the perturbation bracket with `α = n`, the Laplacian
/// gap `Δ = λ₃(L) − λ₂(L)` and the Fiedler vector, maximized over the top-`k`
/// eigenpairs of `N = Σ aᵢaᵢᵀ`.
pub fn epsilon1(g: &Graph, attributes: &[Vec<f64>]) -> Result<f64> {
    g.require_connected()?;
    if attributes.is_empty() {
        return Ok(0.0);
    }
    let n = g.n();
    let spec = laplacian_spectrum(g)?;
    let delta = eigen_gap(&spec.values);
    if delta == 0.0 {
        return Ok(0.0);
    }
    let fiedler = spec.vector(1);
    let sn = eig_sym(&attribute_gram(n, attributes)?)?;
    let cutoff = RANK_TOL * sn.max().max(0.0);
    let mut best = 0.0_f64;
    for i in (n.saturating_sub(attributes.len())..n).rev() {
        let ln = sn.values[i];
        if ln <= cutoff {
            continue;
        }
        let proj = dot(sn.vector(i), fiedler);
        best = best.max(perturbation_bracket(n as f64 * ln, delta, proj * proj)?);
    }
    Ok(best)
}

/// Expansion term `ε₂ = (1 − 2p)·φ² / (4·deg_max)`, using the exact `φ` or the
/// lower Cheeger endpoint.
pub fn epsilon2(g: &Graph, p: f64, phi: &CheegerResult) -> Result<f64> {
    check_p(p)?;
    let deg_max = g.max_degree();
    if deg_max == 0 {
        return Err(Error::Structural("graph has no edges".into()));
    }
    let phi_used = match phi.mode {
        ExpansionMode::Exact => phi.phi,
        ExpansionMode::Spectral => phi.lower,
    };
    Ok((1.0 - 2.0 * p) * phi_used * phi_used / (4.0 * deg_max as f64))
}

fn check_p(p: f64) -> Result<()> {
    if (0.0..=0.5).contains(&p) {
        Ok(())
    } else {
        Err(invalid(format!("edge noise p must lie in [0, 0.5], got {p}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhiMode {
    Exact,
    SpectralLower,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub eps1: f64,
    pub eps2: f64,
    pub sigma_sq: f64,
    pub r_const: f64,
    /// `−3s² / (24σ² + 8Rs)` with `s = ε₁ + ε₂`.
    pub exponent: f64,
    /// `1 − 2n·e^exponent`; negative values are reported as-is.
    pub prob_lower_bound: f64,
    pub vacuous: bool,
    pub phi_used: f64,
    pub phi_mode: PhiMode,
    pub delta: f64,
    pub deg_max: usize,
}

/// Probability lower bound for exact recovery by the relaxation. `φ` is exact
/// up to [`EXACT_EXPANSION_MAX_N`] vertices and the spectral lower endpoint
/// beyond.
pub fn recovery_probability_bound(g: &Graph, attributes: &[Vec<f64>], p: f64) -> Result<BoundReport> {
    let mode = if g.n() <= EXACT_EXPANSION_MAX_N {
        ExpansionMode::Exact
    } else {
        ExpansionMode::Spectral
    };
    let phi = edge_expansion(g, mode)?;
    recovery_probability_bound_with_phi(g, attributes, p, &phi)
}

pub fn recovery_probability_bound_with_phi(
    g: &Graph,
    attributes: &[Vec<f64>],
    p: f64,
    phi: &CheegerResult,
) -> Result<BoundReport> {
    check_p(p)?;
    let eps1 = epsilon1(g, attributes)?;
    let eps2 = epsilon2(g, p, phi)?;
    let deg_max = g.max_degree();
    let sigma_sq = 4.0 * p * (1.0 - p) * deg_max as f64;
    let r_const = 2.0 * (1.0 - p);
    let s = eps1 + eps2;
    let denom = 24.0 * sigma_sq + 8.0 * r_const * s;
    let exponent = if s == 0.0 { 0.0 } else { -3.0 * s * s / denom };
    let prob_lower_bound = 1.0 - 2.0 * g.n() as f64 * exponent.exp();
    let (phi_used, phi_mode) = match phi.mode {
        ExpansionMode::Exact => (phi.phi, PhiMode::Exact),
        ExpansionMode::Spectral => (phi.lower, PhiMode::SpectralLower),
    };
    Ok(BoundReport {
        eps1,
        eps2,
        sigma_sq,
        r_const,
        exponent,
        prob_lower_bound,
        vacuous: prob_lower_bound <= 0.0,
        phi_used,
        phi_mode,
        delta: eigen_gap(&laplacian_spectrum(g)?.values),
        deg_max,
    })
}

//! Symmetric eigendecomposition and the Laplacian spectral quantities used by
//! the recovery bounds: algebraic connectivity, the Fiedler vector and the
//! eigen-gap `Δ = λ₃(L) − λ₂(L)`.

mod eigen;
mod matrix;

use serde::Serialize;

use crate::error::Result;
use crate::graphs::Graph;

pub use eigen::{canonicalize_sign, eig_sym, eig_sym_with_tol, Spectrum, DEFAULT_EIG_TOL};
pub use matrix::{dot, norm2, SymMatrix, SYMMETRY_TOL};

/// Two eigenvalues `a ≤ b` are treated as equal when `b − a ≤ MULTIPLICITY_TOL · max(1, b)`.
pub const MULTIPLICITY_TOL: f64 = 1e-8;

pub fn same_eigenvalue(a: f64, b: f64) -> bool {
    (b - a).abs() <= MULTIPLICITY_TOL * b.abs().max(1.0)
}

/// `λ₃ − λ₂` of an ascending spectrum, clamped to exactly 0 when the two are
/// equal under [`MULTIPLICITY_TOL`]. Spectra with fewer than three values
/// have no gap and return 0.
pub fn eigen_gap(values: &[f64]) -> f64 {
    if values.len() < 3 {
        return 0.0;
    }
    let (l2, l3) = (values[1], values[2]);
    if same_eigenvalue(l2, l3) {
        0.0
    } else {
        l3 - l2
    }
}

pub fn laplacian_spectrum(g: &Graph) -> Result<Spectrum> {
    eig_sym(&g.laplacian())
}

/// `Δ = λ₃(L_G) − λ₂(L_G)` for a connected graph.
pub fn laplacian_gap_delta(g: &Graph) -> Result<f64> {
    g.require_connected()?;
    Ok(eigen_gap(&laplacian_spectrum(g)?.values))
}

/// Unit eigenvector for the algebraic connectivity `λ₂(L_G)`.
#[derive(Clone, Debug, Serialize)]
pub struct Fiedler {
    pub lambda2: f64,
    pub vector: Vec<f64>,
    /// Set when `λ₂` is repeated; `vector` is then one deterministic member of
    /// the eigenspace.
    pub multiplicity_flag: bool,
}

pub fn fiedler_vector(g: &Graph) -> Result<Fiedler> {
    g.require_connected()?;
    let spec = laplacian_spectrum(g)?;
    Ok(fiedler_from_spectrum(&spec))
}

pub(crate) fn fiedler_from_spectrum(spec: &Spectrum) -> Fiedler {
    let multiplicity_flag = spec.len() >= 3 && same_eigenvalue(spec.values[1], spec.values[2]);
    Fiedler {
        lambda2: spec.values[1],
        vector: spec.vector(1).to_vec(),
        multiplicity_flag,
    }
}

/// Laplacian eigenvalues of `Grid(rows, cols)` from the product formula
/// `λ_{i,j} = (2 sin(πi / 2·rows))² + (2 sin(πj / 2·cols))²`, sorted ascending.
pub fn grid_spectrum_closed_form(rows: usize, cols: usize) -> Vec<f64> {
    let path = |len: usize, k: usize| {
        let s = 2.0 * (std::f64::consts::PI * k as f64 / (2.0 * len as f64)).sin();
        s * s
    };
    let mut vals: Vec<f64> = (0..rows)
        .flat_map(|i| (0..cols).map(move |j| path(rows, i) + path(cols, j)))
        .collect();
    vals.sort_by(f64::total_cmp);
    vals
}

/// Everything the `spectrum` command reports about a graph.
#[derive(Clone, Debug, Serialize)]
pub struct GraphSpectrumReport {
    pub eigenvalues: Vec<f64>,
    pub delta: f64,
    pub fiedler: Vec<f64>,
    pub multiplicity_flag: bool,
}

pub fn graph_spectrum_report(g: &Graph) -> Result<GraphSpectrumReport> {
    g.require_connected()?;
    let spec = laplacian_spectrum(g)?;
    let fiedler = fiedler_from_spectrum(&spec);
    Ok(GraphSpectrumReport {
        delta: eigen_gap(&spec.values),
        eigenvalues: spec.values,
        fiedler: fiedler.vector,
        multiplicity_flag: fiedler.multiplicity_flag,
    })
}

use crate::error::{invalid, Error, Result};
use crate::spectral::{norm2, SymMatrix};

pub const BRUTE_FORCE_MAX_N: usize = 20;

/// Default feasibility tolerance for `|⟨a, y⟩| ≤ tol·‖a‖`.
pub const DEFAULT_FEAS_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct BruteForceResult {
    pub labels: Vec<i8>,
    /// `½ yᵀXy + α cᵀy` at `labels`.
    pub objective: f64,
}

/// Exhaustive maximizer of `½ yᵀXy + α·cᵀy` over sign vectors with
/// `|⟨aᵢ, y⟩| ≤ feas_tol·‖aᵢ‖` for every attribute.
///
/// Ties go to the lexicographically smallest vector under `+1 < −1`. The walk
/// visits all `2ⁿ` vectors in Gray-code order, updating `Xy`, the quadratic
/// form, `cᵀy` and every `⟨aᵢ, y⟩` in O(n + k) per flip.
///
/// With generic real attributes the feasible set is exactly `{ȳ, −ȳ}`.
pub fn brute_force(
    x: &SymMatrix,
    c: &[f64],
    attributes: &[Vec<f64>],
    alpha: f64,
    feas_tol: f64,
) -> Result<BruteForceResult> {
    let n = x.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::SizeLimit {
            what: "vertex count for brute-force search",
            actual: n,
            limit: BRUTE_FORCE_MAX_N,
        });
    }
    if n == 0 {
        return Err(invalid("empty problem"));
    }
    if c.len() != n {
        return Err(invalid(format!("c has length {}, expected {n}", c.len())));
    }
    if !(feas_tol >= 0.0) || !alpha.is_finite() {
        return Err(invalid("feas_tol must be non-negative and alpha finite"));
    }
    if let Some(a) = attributes.iter().find(|a| a.len() != n) {
        return Err(invalid(format!("attribute has length {}, expected {n}", a.len())));
    }

    let bounds: Vec<f64> = attributes.iter().map(|a| feas_tol * norm2(a)).collect();
    let slack: Vec<f64> = attributes
        .iter()
        .map(|a| 1e-9 * a.iter().map(|v| v.abs()).sum::<f64>())
        .collect();

    let mut y = vec![1.0_f64; n];
    let mut h: Vec<f64> = (0..n).map(|i| x.row(i).iter().sum()).collect();
    let mut quad: f64 = h.iter().sum();
    let mut lin: f64 = c.iter().sum();
    let mut inner: Vec<f64> = attributes.iter().map(|a| a.iter().sum()).collect();
    // Vertex i is bit (n − 1 − i) of `key`, so numeric order on keys is the
    // required lexicographic order on label vectors.
    let mut key: u32 = 0;

    let objective = |quad: f64, lin: f64| 0.5 * quad + alpha * lin;
    let feasible = |inner: &[f64], y: &[f64]| -> bool {
        inner.iter().zip(&bounds).zip(&slack).zip(attributes).all(|(((s, b), sl), a)| {
            if s.abs() > b + sl {
                return false;
            }
            // Re-evaluate near the boundary to shed accumulated rounding.
            let exact: f64 = a.iter().zip(y).map(|(ai, yi)| ai * yi).sum();
            exact.abs() <= *b
        })
    };

    let mut best: Option<(f64, u32)> = None;
    let mut consider = |obj: f64, key: u32, inner: &[f64], y: &[f64]| {
        let tie_tol = 1e-9 * (1.0 + obj.abs());
        let better = match best {
            None => true,
            Some((bo, bk)) => obj > bo + tie_tol || ((obj - bo).abs() <= tie_tol && key < bk),
        };
        if better && feasible(inner, y) {
            best = Some((obj, key));
        }
    };

    consider(objective(quad, lin), key, &inner, &y);
    for step in 1u64..(1u64 << n) {
        let u = step.trailing_zeros() as usize;
        let yu = y[u];
        quad -= 4.0 * yu * (h[u] - x.get(u, u) * yu);
        for (w, hw) in h.iter_mut().enumerate() {
            *hw -= 2.0 * x.get(w, u) * yu;
        }
        lin -= 2.0 * c[u] * yu;
        for (s, a) in inner.iter_mut().zip(attributes) {
            *s -= 2.0 * a[u] * yu;
        }
        y[u] = -yu;
        key ^= 1 << (n - 1 - u);
        consider(objective(quad, lin), key, &inner, &y);
    }

    let (_, key) = best.ok_or(Error::Infeasible)?;
    let labels: Vec<i8> = (0..n)
        .map(|i| if key & (1 << (n - 1 - i)) != 0 { -1 } else { 1 })
        .collect();
    let yf: Vec<f64> = labels.iter().map(|&v| f64::from(v)).collect();
    let lin_exact: f64 = c.iter().zip(&yf).map(|(a, b)| a * b).sum();
    Ok(BruteForceResult {
        objective: 0.5 * x.quad_form(&yf) + alpha * lin_exact,
        labels,
    })
}

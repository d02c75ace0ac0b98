use serde::{Deserialize, Serialize};

use super::Graph;
use crate::error::{Error, Result};
use crate::spectral::eig_sym;

/// Largest vertex count accepted by exhaustive edge-expansion search.
pub const EXACT_EXPANSION_MAX_N: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpansionMode {
    Exact,
    Spectral,
}

/// Edge expansion (Cheeger constant) of a graph, exact or bracketed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheegerResult {
    /// Exact value in exact mode; the lower endpoint `λ₂/2` in spectral mode.
    pub phi: f64,
    pub mode: ExpansionMode,
    pub lower: f64,
    pub upper: f64,
    /// `phi = cut_edges / set_size` in exact mode.
    pub cut_edges: Option<usize>,
    pub set_size: Option<usize>,
    /// Minimizing vertex set, ascending (exact mode only).
    pub witness: Option<Vec<usize>>,
}

/// Edge expansion `min |E(S, Sᶜ)| / |S|` over nonempty `S` with `|S| ≤ n/2`.
///
/// Exact mode walks all subsets in Gray-code order, updating the cut size in
/// O(1) per step. Spectral mode returns the Cheeger bracket
/// `[λ₂/2, √(2·deg_max·λ₂)]`.
pub fn edge_expansion(g: &Graph, mode: ExpansionMode) -> Result<CheegerResult> {
    if g.n() < 2 {
        return Err(Error::Structural("edge expansion needs at least two vertices".into()));
    }
    g.require_connected()?;
    match mode {
        ExpansionMode::Exact => exact(g),
        ExpansionMode::Spectral => spectral(g),
    }
}

fn exact(g: &Graph) -> Result<CheegerResult> {
    let n = g.n();
    if n > EXACT_EXPANSION_MAX_N {
        return Err(Error::SizeLimit {
            what: "vertex count for exact edge expansion",
            actual: n,
            limit: EXACT_EXPANSION_MAX_N,
        });
    }
    let adj: Vec<u32> = (0..n)
        .map(|u| g.neighbors(u).iter().fold(0u32, |m, &v| m | (1 << v)))
        .collect();
    let deg: Vec<i64> = (0..n).map(|u| g.degree(u) as i64).collect();
    let half = n / 2;

    let mut mask: u32 = 0;
    let mut size = 0usize;
    let mut cut: i64 = 0;
    let mut best: Option<(u64, u64, u32)> = None;
    for step in 1u64..(1u64 << n) {
        let u = step.trailing_zeros() as usize;
        let bit = 1u32 << u;
        if mask & bit == 0 {
            cut += deg[u] - 2 * (adj[u] & mask).count_ones() as i64;
            mask |= bit;
            size += 1;
        } else {
            mask &= !bit;
            size -= 1;
            cut -= deg[u] - 2 * (adj[u] & mask).count_ones() as i64;
        }
        if size == 0 || size > half {
            continue;
        }
        let c = cut as u64;
        let s = size as u64;
        let better = match best {
            None => true,
            Some((bc, bs, _)) => c * bs < bc * s,
        };
        if better {
            best = Some((c, s, mask));
        }
    }

    let (c, s, m) = best.expect("n >= 2 admits a singleton set");
    let phi = c as f64 / s as f64;
    Ok(CheegerResult {
        phi,
        mode: ExpansionMode::Exact,
        lower: phi,
        upper: phi,
        cut_edges: Some(c as usize),
        set_size: Some(s as usize),
        witness: Some((0..n).filter(|&v| m & (1 << v) != 0).collect()),
    })
}

fn spectral(g: &Graph) -> Result<CheegerResult> {
    let spec = eig_sym(&g.laplacian())?;
    let lambda2 = spec.values[1].max(0.0);
    let lower = lambda2 / 2.0;
    let upper = (2.0 * g.max_degree() as f64 * lambda2).sqrt();
    Ok(CheegerResult {
        phi: lower,
        mode: ExpansionMode::Spectral,
        lower,
        upper,
        cut_edges: None,
        set_size: None,
        witness: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{complete, erdos_renyi, grid, star};

    // Straightforward subset enumeration with cuts counted from the edge list.
    fn brute_force_phi(g: &Graph) -> (usize, usize) {
        let n = g.n();
        let mut best = (g.edge_count() + 1, 1usize);
        for mask in 1u32..(1 << n) {
            let size = mask.count_ones() as usize;
            if size > n / 2 {
                continue;
            }
            let inside = |v: usize| mask & (1 << v) != 0;
            let cut = g.edges().iter().filter(|&&(u, v)| inside(u) != inside(v)).count();
            if cut * best.1 < best.0 * size {
                best = (cut, size);
            }
        }
        best
    }

    fn check_against_oracle(g: &Graph) -> CheegerResult {
        let res = edge_expansion(g, ExpansionMode::Exact).unwrap();
        let (c, s) = brute_force_phi(g);
        assert_eq!(res.cut_edges.unwrap() * s, c * res.set_size.unwrap());
        let w = res.witness.as_ref().unwrap();
        assert!(!w.is_empty() && w.len() <= g.n() / 2);
        let cut = g
            .edges()
            .iter()
            .filter(|&&(u, v)| w.contains(&u) != w.contains(&v))
            .count();
        assert_eq!(cut as f64 / w.len() as f64, res.phi);
        assert_eq!(res.lower, res.phi);
        assert_eq!(res.upper, res.phi);
        res
    }

    #[test]
    fn complete_graph_expansion() {
        let res = check_against_oracle(&complete(10).unwrap());
        assert_eq!(res.phi, 5.0);
        assert_eq!(res.witness.unwrap().len(), 5);
    }

    #[test]
    fn star_expansion() {
        let res = check_against_oracle(&star(6).unwrap());
        assert_eq!(res.phi, 1.0);
    }

    #[test]
    fn grid_expansion_matches_oracle_and_decreases() {
        let phis: Vec<f64> = (2..=4)
            .map(|k| check_against_oracle(&grid(k, k).unwrap()).phi)
            .collect();
        // Grid(4,4): cutting between the middle columns costs 4 edges for 8 vertices.
        assert_eq!(phis[2], 0.5);
        assert!(phis.windows(2).all(|w| w[1] <= w[0]), "{phis:?}");
        assert!(phis[2] < phis[0]);
    }

    #[test]
    fn exact_lies_within_cheeger_bracket() {
        let mut graphs = vec![grid(3, 5).unwrap(), grid(4, 4).unwrap(), star(9).unwrap()];
        graphs.extend(
            (0..20)
                .map(|s| erdos_renyi(12, 0.35, s).unwrap())
                .filter(Graph::is_connected),
        );
        for g in graphs {
            let exact = check_against_oracle(&g);
            let bracket = edge_expansion(&g, ExpansionMode::Spectral).unwrap();
            assert!(bracket.lower <= bracket.upper);
            assert!(bracket.lower <= exact.phi + 1e-9, "{} > {}", bracket.lower, exact.phi);
            assert!(exact.phi <= bracket.upper + 1e-9);
        }
    }

    #[test]
    fn errors() {
        let g = grid(5, 5).unwrap();
        assert!(matches!(
            edge_expansion(&g, ExpansionMode::Exact),
            Err(Error::SizeLimit { actual: 25, .. })
        ));
        assert!(edge_expansion(&g, ExpansionMode::Spectral).is_ok());
        let disconnected = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        assert!(matches!(
            edge_expansion(&disconnected, ExpansionMode::Exact),
            Err(Error::Structural(_))
        ));
    }
}

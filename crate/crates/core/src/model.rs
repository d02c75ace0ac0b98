//! The generative model: a fair planted labeling, statistical-parity
//! attributes, and one noisy observation per edge and per node.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graphs::Graph;
use crate::rng::prng;
use crate::spectral::{dot, norm2, SymMatrix};

/// Relative tolerance of the statistical-parity check `|⟨a, ȳ⟩| ≤ tol·‖a‖`.
pub const FAIRNESS_TOL: f64 = 1e-9;

/// Ground truth: graph, planted labels in `{−1, +1}` and the attributes the
/// labeling is fair with respect to.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    graph: Graph,
    y_bar: Vec<i8>,
    attributes: Vec<Vec<f64>>,
}

impl Instance {
    pub fn new(graph: Graph, y_bar: Vec<i8>, attributes: Vec<Vec<f64>>) -> Result<Self> {
        let n = graph.n();
        if y_bar.len() != n {
            return Err(invalid(format!("label vector has length {}, graph has {n} vertices", y_bar.len())));
        }
        check_labels(&y_bar)?;
        let y = labels_to_f64(&y_bar);
        for (i, a) in attributes.iter().enumerate() {
            if a.len() != n {
                return Err(invalid(format!("attribute {i} has length {}, expected {n}", a.len())));
            }
            if a.iter().any(|v| !v.is_finite()) {
                return Err(invalid(format!("attribute {i} has non-finite entries")));
            }
            let ip = dot(a, &y);
            if ip.abs() > FAIRNESS_TOL * norm2(a) {
                return Err(invalid(format!(
                    "labeling is not fair with respect to attribute {i}: <a, y> = {ip:e}"
                )));
            }
        }
        Ok(Self {
            graph,
            y_bar,
            attributes,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn y_bar(&self) -> &[i8] {
        &self.y_bar
    }

    pub fn attributes(&self) -> &[Vec<f64>] {
        &self.attributes
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }
}

/// Noisy measurements: `x` is supported on the graph's edges, `c` on its nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub x: SymMatrix,
    pub c: Vec<i8>,
    pub p: f64,
    pub q: f64,
}

pub fn labels_to_f64(y: &[i8]) -> Vec<f64> {
    y.iter().map(|&v| f64::from(v)).collect()
}

pub(crate) fn check_labels(y: &[i8]) -> Result<()> {
    match y.iter().position(|&v| v != 1 && v != -1) {
        Some(i) => Err(invalid(format!("label {i} is {}, expected +1 or -1", y[i]))),
        None => Ok(()),
    }
}

/// Independent Rademacher labels.
pub fn sample_labels(n: usize, seed: u64) -> Vec<i8> {
    let mut rng = prng(seed);
    (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect()
}

/// `k` unit vectors drawn from the orthogonal complement of `ȳ`: a standard
/// Gaussian vector with its `ȳ` component removed, then normalized.
pub fn sample_fair_attributes(y_bar: &[i8], k: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let n = y_bar.len();
    if n < 2 {
        return Err(invalid("fair attributes need at least two vertices"));
    }
    if k >= n {
        return Err(invalid(format!(
            "cannot draw {k} attributes: the complement of the labeling has dimension {}",
            n - 1
        )));
    }
    check_labels(y_bar)?;
    let y = labels_to_f64(y_bar);
    let mut rng = prng(seed);
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        let mut a: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        // Two passes so the residual sits at rounding level.
        for _ in 0..2 {
            let coef = dot(&a, &y) / n as f64;
            a.iter_mut().zip(&y).for_each(|(ai, yi)| *ai -= coef * yi);
        }
        let norm = norm2(&a);
        if norm < 1e-8 {
            continue;
        }
        a.iter_mut().for_each(|ai| *ai /= norm);
        out.push(a);
    }
    Ok(out)
}

/// `log((1 − q)/q) / log((1 − p)/p)`, the weight of the node term relative to
/// the edge term in the maximum-likelihood objective.
pub fn alpha(p: f64, q: f64) -> Result<f64> {
    for (name, v) in [("p", p), ("q", q)] {
        if !(v > 0.0 && v < 0.5) {
            return Err(invalid(format!("{name} must lie in (0, 0.5), got {v}")));
        }
    }
    Ok(((1.0 - q) / q).ln() / ((1.0 - p) / p).ln())
}

fn check_noise(name: &str, v: f64) -> Result<()> {
    if (0.0..0.5).contains(&v) {
        Ok(())
    } else {
        Err(invalid(format!("{name} must lie in [0, 0.5), got {v}")))
    }
}

/// Draws one observation: each edge reports `ȳ_u ȳ_v`, flipped with
/// probability `p`; each node reports `ȳ_u`, flipped with probability `q`.
/// Edges are visited in the graph's edge order, then nodes in index order.
pub fn observe(inst: &Instance, p: f64, q: f64, seed: u64) -> Result<Observation> {
    check_noise("p", p)?;
    check_noise("q", q)?;
    inst.graph.require_connected()?;
    let mut rng = prng(seed);
    let y = &inst.y_bar;
    let mut x = SymMatrix::zeros(inst.n());
    for &(u, v) in inst.graph.edges() {
        let truth = f64::from(y[u] * y[v]);
        let flip = rng.random::<f64>() < p;
        x.set(u, v, if flip { -truth } else { truth });
    }
    let c = y
        .iter()
        .map(|&yu| if rng.random::<f64>() < q { -yu } else { yu })
        .collect();
    Ok(Observation { x, c, p, q })
}

/// Seeds for the three random stages of [`generate`], derived from one seed.
pub fn stage_seeds(seed: u64) -> (u64, u64, u64) {
    use crate::rng::sub_seed;
    (sub_seed(seed, &[0]), sub_seed(seed, &[1]), sub_seed(seed, &[2]))
}

/// Full sampling pipeline: Rademacher labels, `k` fair attributes, one observation.
pub fn generate(graph: Graph, k: usize, p: f64, q: f64, seed: u64) -> Result<(Instance, Observation)> {
    let (s_labels, s_attr, s_obs) = stage_seeds(seed);
    let y_bar = sample_labels(graph.n(), s_labels);
    let attributes = sample_fair_attributes(&y_bar, k, s_attr)?;
    let inst = Instance::new(graph, y_bar, attributes)?;
    let obs = observe(&inst, p, q, s_obs)?;
    Ok((inst, obs))
}

/// On-disk form of an instance together with its observation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    pub y_bar: Vec<i8>,
    pub attributes: Vec<Vec<f64>>,
    /// `[u, v, s]` for each edge `u < v`, with `s = X_uv`.
    pub x_entries: Vec<(usize, usize, i8)>,
    pub c: Vec<i8>,
    pub p: f64,
    pub q: f64,
    pub seed: u64,
}

impl InstanceRecord {
    pub fn new(inst: &Instance, obs: &Observation, seed: u64) -> Self {
        let edges = inst.graph.edges();
        Self {
            n: inst.n(),
            edges: edges.iter().map(|&(u, v)| [u, v]).collect(),
            y_bar: inst.y_bar.clone(),
            attributes: inst.attributes.clone(),
            x_entries: edges
                .iter()
                .map(|&(u, v)| (u, v, obs.x.get(u, v) as i8))
                .collect(),
            c: obs.c.clone(),
            p: obs.p,
            q: obs.q,
            seed,
        }
    }

    /// Validates the record and rebuilds the typed values.
    pub fn into_parts(self) -> Result<(Instance, Observation)> {
        let graph = Graph::new(self.n, self.edges.iter().map(|&[u, v]| (u, v)))?;
        let inst = Instance::new(graph, self.y_bar, self.attributes)?;
        if self.c.len() != self.n {
            return Err(invalid(format!("c has length {}, expected {}", self.c.len(), self.n)));
        }
        check_labels(&self.c)?;
        check_noise("p", self.p)?;
        check_noise("q", self.q)?;
        let mut x = SymMatrix::zeros(self.n);
        for &(u, v, s) in &self.x_entries {
            if !inst.graph.has_edge(u, v) {
                return Err(Error::InvalidArgument(format!(
                    "observation ({u}, {v}) is not an edge of the graph"
                )));
            }
            if s != 1 && s != -1 {
                return Err(invalid(format!("edge observation ({u}, {v}) is {s}, expected +1 or -1")));
            }
            x.set(u, v, f64::from(s));
        }
        if self.x_entries.len() != inst.graph.edge_count() {
            return Err(invalid(format!(
                "{} edge observations for {} edges",
                self.x_entries.len(),
                inst.graph.edge_count()
            )));
        }
        Ok((
            inst,
            Observation {
                x,
                c: self.c,
                p: self.p,
                q: self.q,
            },
        ))
    }
}

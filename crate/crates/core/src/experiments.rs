//! Seeded Monte-Carlo drivers for the eigen-gap statistics of random graphs
//! and the recovery curves on grids.
//!
//! Every cell of a run derives its own seed from the top-level seed with
//! [`sub_seed`], so results do not depend on thread count or scheduling.
//!
//! Seed layout for the recovery curves, per trial `t` and p-index `i`:
//!
//! - labels: `sub_seed(seed, [0, t])`, or `sub_seed(seed, [0])` with a fixed truth
//! - attributes: `sub_seed(seed, [1, t])`
//! - observation: `sub_seed(seed, [2, i, t])`
//!
//! The observation does not depend on `k`, so the curves for different
//! constraint counts are compared on identical noise draws.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graphs::{erdos_renyi, grid};
use crate::model::{observe, sample_fair_attributes, sample_labels, Instance};
use crate::rng::sub_seed;
use crate::solver::{check_exact_recovery, dual_certificate, round_solution, solve_sdp, SdpConfig, SdpStatus};
use crate::spectral::{eig_sym, eigen_gap, laplacian_spectrum, norm2};

/// Largest grid accepted by [`run_fig2`].
pub const MAX_GRID_VERTICES: usize = 400;

/// Edge probability rule for Erdős–Rényi sweeps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RSpec {
    Fixed(f64),
    /// `r = 2·ln(n)/n`, capped at 1.
    TwoLogNOverN,
    /// `r = 2^(ln(n)/n)`, capped at 1.
    TwoPowLogNOverN,
}

impl RSpec {
    pub fn resolve(self, n: usize) -> f64 {
        let nf = n as f64;
        match self {
            RSpec::Fixed(r) => r,
            RSpec::TwoLogNOverN => (2.0 * nf.ln() / nf).min(1.0),
            RSpec::TwoPowLogNOverN => 2f64.powf(nf.ln() / nf).min(1.0),
        }
    }
}

impl FromStr for RSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t {
            "2logn/n" => return Ok(RSpec::TwoLogNOverN),
            "2^(logn/n)" => return Ok(RSpec::TwoPowLogNOverN),
            _ => {}
        }
        let r: f64 = t
            .parse()
            .map_err(|_| invalid(format!("unrecognized edge-probability spec {s:?}")))?;
        if !(0.0..=1.0).contains(&r) {
            return Err(invalid(format!("edge probability must lie in [0, 1], got {r}")));
        }
        Ok(RSpec::Fixed(r))
    }
}

impl fmt::Display for RSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RSpec::Fixed(r) => write!(f, "{r}"),
            RSpec::TwoLogNOverN => f.write_str("2logn/n"),
            RSpec::TwoPowLogNOverN => f.write_str("2^(logn/n)"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapStatsRow {
    pub n: usize,
    pub r_spec: String,
    pub trials: usize,
    pub prob_delta_positive: f64,
    pub mean_delta: f64,
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::NumericFailure(format!("cannot start worker pool: {e}")))
}

/// Draws `trials` graphs `G(n, r)` per `n` and tallies `Δ = λ₃ − λ₂` of the
/// Laplacian. Disconnected draws are measured as-is.
pub fn run_fig1(n_values: &[usize], r_spec: RSpec, trials: usize, seed: u64, threads: usize) -> Result<Vec<GapStatsRow>> {
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    if let RSpec::Fixed(r) = r_spec {
        if !(0.0..=1.0).contains(&r) {
            return Err(invalid(format!("edge probability must lie in [0, 1], got {r}")));
        }
    }
    let pool = pool(threads)?;
    n_values
        .iter()
        .map(|&n| {
            let r = r_spec.resolve(n);
            let deltas: Vec<f64> = pool.install(|| {
                (0..trials)
                    .into_par_iter()
                    .map(|t| {
                        let g = erdos_renyi(n, r, sub_seed(seed, &[n as u64, t as u64]))?;
                        Ok(eigen_gap(&laplacian_spectrum(&g)?.values))
                    })
                    .collect::<Result<_>>()
            })?;
            let positive = deltas.iter().filter(|&&d| d > 0.0).count();
            Ok(GapStatsRow {
                n,
                r_spec: r_spec.to_string(),
                trials,
                prob_delta_positive: positive as f64 / trials as f64,
                mean_delta: deltas.iter().sum::<f64>() / trials as f64,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig2Config {
    pub rows: usize,
    pub cols: usize,
    pub p_values: Vec<f64>,
    pub k_values: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Node-noise level; `None` uses `q = p`.
    pub q: Option<f64>,
    /// Plant one labeling for all trials instead of one per trial.
    pub fixed_truth: bool,
    pub solver: SdpConfig,
    pub threads: usize,
}

impl Default for Fig2Config {
    fn default() -> Self {
        Self {
            rows: 4,
            cols: 16,
            p_values: (0..=10).map(|i| f64::from(i) / 100.0).collect(),
            k_values: vec![0, 1, 2],
            trials: 30,
            seed: 0,
            q: None,
            fixed_truth: false,
            solver: SdpConfig::default(),
            threads: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryCurveRow {
    pub p: f64,
    pub k: usize,
    pub trials: usize,
    pub recovery_rate: f64,
    pub certificate_rate: f64,
}

/// Outcome of one `(p, k, trial)` cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub p: f64,
    pub k: usize,
    pub trial: usize,
    pub recovered: bool,
    pub certificate: bool,
    /// Solver status, or `None` when the cell failed with an error.
    pub status: Option<SdpStatus>,
    pub iterations: usize,
    pub primal_residual: f64,
    /// `max |Y_ii − 1|`.
    pub diag_error: f64,
    /// `λ₁(Y)`.
    pub min_eigenvalue: f64,
    /// `max ‖Y aᵢ‖ / ‖aᵢ‖` over the enforced attributes.
    pub attribute_residual: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Fig2Report {
    pub rows: Vec<RecoveryCurveRow>,
    pub outcomes: Vec<TrialOutcome>,
    /// Cells where sampling or solving returned an error; counted as failures.
    pub failures: usize,
}

impl Fig2Config {
    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(invalid("grid dimensions must be positive"));
        }
        if self.rows * self.cols > MAX_GRID_VERTICES {
            return Err(Error::SizeLimit {
                what: "grid vertex count",
                actual: self.rows * self.cols,
                limit: MAX_GRID_VERTICES,
            });
        }
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if self.p_values.is_empty() || self.k_values.is_empty() {
            return Err(invalid("p and k lists must be nonempty"));
        }
        if let Some(p) = self.p_values.iter().find(|p| !(0.0..0.5).contains(*p)) {
            return Err(invalid(format!("p must lie in [0, 0.5), got {p}")));
        }
        if let Some(q) = self.q.filter(|q| !(0.0..0.5).contains(q)) {
            return Err(invalid(format!("q must lie in [0, 0.5), got {q}")));
        }
        if let Some(k) = self.k_values.iter().find(|&&k| k > 2) {
            return Err(invalid(format!("k must be 0, 1 or 2, got {k}")));
        }
        self.solver.validate()
    }
}

/// Recovery curves: for each `(p, k, trial)`, plants labels and fair
/// attributes, draws one observation, solves the relaxation with the first
/// `k` attributes, rounds with the node vote and checks the certificate.
///
/// Rows are sorted by `(p, k)`.
pub fn run_fig2(cfg: &Fig2Config) -> Result<Fig2Report> {
    cfg.validate()?;
    let g = grid(cfg.rows, cfg.cols)?;
    let n = g.n();
    let k_max = cfg.k_values.iter().copied().max().unwrap_or(0);
    if k_max >= n {
        return Err(invalid(format!("k = {k_max} needs more than {n} vertices")));
    }

    let mut cells = Vec::new();
    for (pi, &p) in cfg.p_values.iter().enumerate() {
        for &k in &cfg.k_values {
            for t in 0..cfg.trials {
                cells.push((pi, p, k, t));
            }
        }
    }

    let seed = cfg.seed;
    let run_cell = |&(pi, p, k, t): &(usize, f64, usize, usize)| -> Result<TrialOutcome> {
        let label_seed = if cfg.fixed_truth {
            sub_seed(seed, &[0])
        } else {
            sub_seed(seed, &[0, t as u64])
        };
        let y_bar = sample_labels(n, label_seed);
        let attrs = sample_fair_attributes(&y_bar, k_max, sub_seed(seed, &[1, t as u64]))?;
        // Validates parity of every attribute against the planted labels.
        let inst = Instance::new(g.clone(), y_bar, attrs)?;
        let q = cfg.q.unwrap_or(p);
        let obs = observe(&inst, p, q, sub_seed(seed, &[2, pi as u64, t as u64]))?;
        let used = &inst.attributes()[..k];
        let sol = solve_sdp(&obs.x, used, &cfg.solver)?;
        let labels = round_solution(&sol, &obs.c)?;
        let cert = dual_certificate(&obs.x, used, inst.y_bar())?;
        let y = &sol.y_matrix;
        let attribute_residual = used
            .iter()
            .map(|a| norm2(&y.matvec(a)) / norm2(a))
            .fold(0.0, f64::max);
        Ok(TrialOutcome {
            p,
            k,
            trial: t,
            recovered: check_exact_recovery(&labels, inst.y_bar())?,
            certificate: cert.holds,
            status: Some(sol.status),
            iterations: sol.iterations,
            primal_residual: sol.primal_residual,
            diag_error: y.diag().iter().map(|d| (d - 1.0).abs()).fold(0.0, f64::max),
            min_eigenvalue: eig_sym(y)?.min(),
            attribute_residual,
            error: None,
        })
    };

    let pool = pool(cfg.threads)?;
    let outcomes: Vec<TrialOutcome> = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| {
                run_cell(cell).unwrap_or_else(|e| TrialOutcome {
                    p: cell.1,
                    k: cell.2,
                    trial: cell.3,
                    recovered: false,
                    certificate: false,
                    status: None,
                    iterations: 0,
                    primal_residual: f64::NAN,
                    diag_error: f64::NAN,
                    min_eigenvalue: f64::NAN,
                    attribute_residual: f64::NAN,
                    error: Some(e.to_string()),
                })
            })
            .collect()
    });

    let mut rows: Vec<RecoveryCurveRow> = Vec::new();
    for chunk in outcomes.chunks(cfg.trials) {
        let trials = chunk.len();
        let frac = |f: fn(&TrialOutcome) -> bool| chunk.iter().filter(|o| f(o)).count() as f64 / trials as f64;
        rows.push(RecoveryCurveRow {
            p: chunk[0].p,
            k: chunk[0].k,
            trials,
            recovery_rate: frac(|o| o.recovered),
            certificate_rate: frac(|o| o.certificate),
        });
    }
    rows.sort_by(|a, b| a.p.total_cmp(&b.p).then(a.k.cmp(&b.k)));
    let failures = outcomes.iter().filter(|o| o.error.is_some()).count();
    Ok(Fig2Report {
        rows,
        outcomes,
        failures,
    })
}

/// Parses `start:stop:step` (inclusive of `stop` up to rounding) or a
/// comma-separated list.
pub fn parse_f64_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| -> Result<f64> {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| invalid(format!("not a number: {t:?}")))
    };
    match parts.as_slice() {
        [start, stop, step] => {
            let (a, b, h) = (num(start)?, num(stop)?, num(step)?);
            if !(h > 0.0) || b < a {
                return Err(invalid(format!("bad range {s:?}")));
            }
            let count = ((b - a) / h + 1e-9).floor() as usize + 1;
            // Rounded to 12 decimals so 0.1 + 0.2-style drift does not leak into outputs.
            Ok((0..count)
                .map(|i| ((a + i as f64 * h) * 1e12).round() / 1e12)
                .collect())
        }
        [_] => s.split(',').map(num).collect(),
        _ => Err(invalid(format!("bad range {s:?}"))),
    }
}

/// Integer form of [`parse_f64_range`].
pub fn parse_usize_range(s: &str) -> Result<Vec<usize>> {
    let num = |t: &str| -> Result<usize> {
        t.trim()
            .parse::<usize>()
            .map_err(|_| invalid(format!("not a non-negative integer: {t:?}")))
    };
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (a, b, h) = (num(start)?, num(stop)?, num(step)?);
            if h == 0 || b < a {
                return Err(invalid(format!("bad range {s:?}")));
            }
            Ok((a..=b).step_by(h).collect())
        }
        [_] => s.split(',').map(num).collect(),
        _ => Err(invalid(format!("bad range {s:?}"))),
    }
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

/// Columns `n,r_spec,trials,prob_delta_positive,mean_delta`.
pub fn write_gap_csv<W: Write>(rows: &[GapStatsRow], out: W) -> Result<()> {
    let mut w = csv_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `p,k,trials,recovery_rate,certificate_rate`.
pub fn write_recovery_csv<W: Write>(rows: &[RecoveryCurveRow], out: W) -> Result<()> {
    let mut w = csv_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Mean recovery rate over the p-sweep for each `k`, ascending in `k`.
pub fn sweep_average(rows: &[RecoveryCurveRow]) -> Vec<(usize, f64)> {
    let mut ks: Vec<usize> = rows.iter().map(|r| r.k).collect();
    ks.sort_unstable();
    ks.dedup();
    ks.into_iter()
        .map(|k| {
            let rates: Vec<f64> = rows.iter().filter(|r| r.k == k).map(|r| r.recovery_rate).collect();
            (k, rates.iter().sum::<f64>() / rates.len() as f64)
        })
        .collect()
}

//! Seeded Monte Carlo estimators that validate the analytic formulas:
//! coverage probability, feasibility fraction, conditional condition
//! number tails, expected caps to coverage, `E(ln C)`, and determinant
//! moments.
//!
//! Reproducibility contract: every estimator is a deterministic function
//! of its `(seed, trials)` arguments alone. Trials are partitioned into
//! fixed batches of [`BATCH_SIZE`]; batch `b` draws from the ChaCha8
//! stream `b + 1` of the seed, and batch statistics are merged in batch
//! order, so results are bit-identical for any number of worker threads
//! (the rayon pool only decides who computes each batch).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geom::{self, Feasibility};
use crate::linalg::{self, Matrix};
use crate::{Error, Result};

/// Trials per RNG stream; fixed so the stream layout never changes.
pub const BATCH_SIZE: u64 = 4096;

/// Identity of the generator, echoed into run configurations.
pub const RNG_ALGORITHM: &str = "chacha8 (per-batch streams, batch size 4096)";

/// A Monte Carlo point estimate with its standard error.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
    /// `value ± 1.96 · std_error`.
    pub ci95: (f64, f64),
}

impl McEstimate {
    pub fn from_moments(sum: f64, sum_sq: f64, n: u64, seed: u64) -> Self {
        let nf = n as f64;
        let mean = sum / nf;
        let var = ((sum_sq / nf) - mean * mean).max(0.0);
        let std_error = if n > 1 { (var / nf).sqrt() } else { f64::INFINITY };
        McEstimate {
            value: mean,
            std_error,
            samples: n,
            seed,
            ci95: (mean - 1.96 * std_error, mean + 1.96 * std_error),
        }
    }

    /// Binomial frequency estimate `hits / n`.
    pub fn from_frequency(hits: u64, n: u64, seed: u64) -> Self {
        let p = hits as f64 / n as f64;
        let std_error = (p * (1.0 - p) / n as f64).sqrt();
        McEstimate {
            value: p,
            std_error,
            samples: n,
            seed,
            ci95: (p - 1.96 * std_error, p + 1.96 * std_error),
        }
    }

    /// JSON record in the shape `{estimator, params, value, std_error,
    /// ci95, seed, trials}`.
    pub fn record(&self, estimator: &str, params: serde_json::Value) -> serde_json::Value {
        serde_json::json!({
            "estimator": estimator,
            "params": params,
            "value": self.value,
            "std_error": self.std_error,
            "ci95": [self.ci95.0, self.ci95.1],
            "seed": self.seed,
            "trials": self.samples,
            "rng": RNG_ALGORITHM,
        })
    }
}

/// Run `f` over every batch (possibly in parallel) and return the batch
/// results in batch order.
fn map_batches<A, F>(trials: u64, seed: u64, f: F) -> Result<Vec<A>>
where
    A: Send,
    F: Fn(std::ops::Range<u64>, &mut ChaCha8Rng) -> Result<A> + Sync,
{
    let batches = trials.div_ceil(BATCH_SIZE);
    (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b + 1);
            let lo = b * BATCH_SIZE;
            let hi = (lo + BATCH_SIZE).min(trials);
            f(lo..hi, &mut rng)
        })
        .collect()
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::Domain("trials must be >= 1".into()));
    }
    Ok(())
}

/// Estimate `p(n, m, α)`: the probability that `n` uniform caps of
/// radius `α` fail to cover `S^m`.
///
/// For `α ≥ π/2` the decision only needs the feasible-side solver; for
/// `α < π/2` each trial solves the full SIC, so `n` must stay within the
/// enumeration capacity.
pub fn mc_coverage(n: usize, m: usize, alpha: f64, trials: u64, seed: u64) -> Result<McEstimate> {
    check_trials(trials)?;
    if !(0.0..=std::f64::consts::PI).contains(&alpha) {
        return Err(Error::Domain(format!("alpha = {alpha} outside [0, π]")));
    }
    let threshold = (std::f64::consts::PI - alpha).cos();
    // The caller chose n deliberately, so the enumeration capacity is
    // lifted to n for the α < π/2 decisions (exact but O(n³) per trial).
    let cap = n.max(geom::DEFAULT_ENUMERATION_CAP);
    let batches = map_batches(trials, seed, |range, rng| {
        let mut hits = 0u64;
        for _ in range {
            let inst = geom::sample_uniform_sphere_with(rng, m, n);
            let not_covered = if threshold >= 0.0 {
                // Only strictly feasible instances can fail to cover.
                match geom::sic_feasible(&inst)? {
                    Some(r) => r.t >= threshold,
                    None => false,
                }
            } else {
                geom::sic_general_with_cap(&inst, cap)?.t >= threshold
            };
            if not_covered {
                hits += 1;
            }
        }
        Ok(hits)
    })?;
    let hits: u64 = batches.iter().sum();
    Ok(McEstimate::from_frequency(hits, trials, seed))
}

/// Empirical conditional condition-number tails on a grid of ε values.
#[derive(Debug, Clone, Serialize)]
pub struct CondTailsEstimate {
    pub n: usize,
    pub m: usize,
    pub eps: Vec<f64>,
    /// `Prob{C ≥ 1/ε | feasible}` per grid point.
    pub feasible_tail: Vec<McEstimate>,
    /// `Prob{C ≥ 1/ε | infeasible}` per grid point.
    pub infeasible_tail: Vec<McEstimate>,
    /// Fraction of strictly feasible instances (Wendel's probability).
    pub feasible_fraction: McEstimate,
    pub feasible_count: u64,
    pub infeasible_count: u64,
    /// Instances that landed in the ill-posed band `|t| ≤ 1e-9`.
    pub ill_posed_count: u64,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Clone)]
struct TailAcc {
    feasible: u64,
    infeasible: u64,
    ill: u64,
    feas_hits: Vec<u64>,
    inf_hits: Vec<u64>,
}

/// Per-instance feasibility class and conditional tail frequencies at
/// each ε. The tail event is `C(A) ≥ 1/ε`, i.e. `|t(A)| ≤ ε`.
pub fn mc_condition_tails(
    n: usize,
    m: usize,
    eps_grid: &[f64],
    trials: u64,
    seed: u64,
) -> Result<CondTailsEstimate> {
    check_trials(trials)?;
    if eps_grid.iter().any(|e| !(0.0..=1.0).contains(e)) {
        return Err(Error::Domain("eps grid values must lie in [0, 1]".into()));
    }
    let ne = eps_grid.len();
    let batches = map_batches(trials, seed, |range, rng| {
        let mut acc = TailAcc {
            feasible: 0,
            infeasible: 0,
            ill: 0,
            feas_hits: vec![0; ne],
            inf_hits: vec![0; ne],
        };
        for _ in range {
            let inst = geom::sample_uniform_sphere_with(rng, m, n);
            let sic = geom::sic_general(&inst)?;
            match sic.feasibility {
                Feasibility::IllPosed => acc.ill += 1,
                Feasibility::StrictlyFeasible => {
                    acc.feasible += 1;
                    for (j, &e) in eps_grid.iter().enumerate() {
                        if sic.t <= e {
                            acc.feas_hits[j] += 1;
                        }
                    }
                }
                Feasibility::Infeasible => {
                    acc.infeasible += 1;
                    for (j, &e) in eps_grid.iter().enumerate() {
                        if sic.t.abs() <= e {
                            acc.inf_hits[j] += 1;
                        }
                    }
                }
            }
        }
        Ok(acc)
    })?;

    let mut total = TailAcc {
        feasible: 0,
        infeasible: 0,
        ill: 0,
        feas_hits: vec![0; ne],
        inf_hits: vec![0; ne],
    };
    for b in batches {
        total.feasible += b.feasible;
        total.infeasible += b.infeasible;
        total.ill += b.ill;
        for j in 0..ne {
            total.feas_hits[j] += b.feas_hits[j];
            total.inf_hits[j] += b.inf_hits[j];
        }
    }

    let cond_estimate = |hits: u64, class_n: u64| {
        if class_n == 0 {
            McEstimate {
                value: f64::NAN,
                std_error: f64::INFINITY,
                samples: 0,
                seed,
                ci95: (f64::NAN, f64::NAN),
            }
        } else {
            McEstimate::from_frequency(hits, class_n, seed)
        }
    };
    Ok(CondTailsEstimate {
        n,
        m,
        eps: eps_grid.to_vec(),
        feasible_tail: (0..ne)
            .map(|j| cond_estimate(total.feas_hits[j], total.feasible))
            .collect(),
        infeasible_tail: (0..ne)
            .map(|j| cond_estimate(total.inf_hits[j], total.infeasible))
            .collect(),
        feasible_fraction: McEstimate::from_frequency(total.feasible, trials, seed),
        feasible_count: total.feasible,
        infeasible_count: total.infeasible,
        ill_posed_count: total.ill,
        trials,
        seed,
    })
}

/// Expected-caps estimate; a lower bound when any trial was censored.
#[derive(Debug, Clone, Serialize)]
pub struct ExpectedCapsEstimate {
    pub estimate: McEstimate,
    /// Trials stopped at `draw_cap` before covering.
    pub censored: u64,
    /// True when `censored > 0`: the value is then a certified lower bound.
    pub is_lower_bound: bool,
}

/// Estimate `E(N(m, α))`: caps are added one at a time until they cover
/// the sphere.
///
/// `α = π/2` uses the feasibility test directly (no enumeration cap);
/// for `α < π/2` trials whose instance outgrows the enumeration capacity
/// are censored at that point.
pub fn mc_expected_caps(
    m: usize,
    alpha: f64,
    trials: u64,
    seed: u64,
    draw_cap: usize,
) -> Result<ExpectedCapsEstimate> {
    check_trials(trials)?;
    if !(alpha > 0.0 && alpha <= std::f64::consts::PI / 2.0) {
        return Err(Error::Domain(format!("alpha = {alpha} outside (0, π/2]")));
    }
    if draw_cap <= m + 1 {
        return Err(Error::Domain("draw_cap must exceed m + 1".into()));
    }
    let half_pi = alpha == std::f64::consts::PI / 2.0;
    let threshold = (std::f64::consts::PI - alpha).cos();
    let batches = map_batches(trials, seed, |range, rng| {
        let mut sum = 0.0f64;
        let mut sum_sq = 0.0f64;
        let mut censored = 0u64;
        for _ in range {
            // Coverage with caps of radius ≤ π/2 needs at least m + 2 of
            // them, so the first checks start there.
            let mut inst = geom::sample_uniform_sphere_with(rng, m, m + 2);
            let n = loop {
                let covered = if half_pi {
                    geom::covers_at_half_pi(&inst)?
                } else {
                    match geom::sic_general(&inst) {
                        Ok(sic) => sic.t < threshold,
                        Err(Error::Capacity(_)) => {
                            censored += 1;
                            break inst.n();
                        }
                        Err(e) => return Err(e),
                    }
                };
                if covered {
                    break inst.n();
                }
                if inst.n() >= draw_cap {
                    censored += 1;
                    break inst.n();
                }
                inst.push_row(geom::unit_vector(rng, m + 1))?;
            };
            sum += n as f64;
            sum_sq += (n as f64) * (n as f64);
        }
        Ok((sum, sum_sq, censored))
    })?;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut censored = 0;
    for (s, sq, c) in batches {
        sum += s;
        sum_sq += sq;
        censored += c;
    }
    Ok(ExpectedCapsEstimate {
        estimate: McEstimate::from_moments(sum, sum_sq, trials, seed),
        censored,
        is_lower_bound: censored > 0,
    })
}

/// `E(ln C)` estimate with a bootstrap confidence interval.
#[derive(Debug, Clone, Serialize)]
pub struct LnCondEstimate {
    pub estimate: McEstimate,
    /// Percentile bootstrap interval for the mean (1000 resamples);
    /// sturdier than the normal interval under the heavy tail of ln C.
    pub bootstrap_ci95: (f64, f64),
    pub ill_posed_count: u64,
}

/// Mean of `ln C(A)` over non-ill-posed instances.
pub fn mc_expected_ln_cond(
    n: usize,
    m: usize,
    trials: u64,
    seed: u64,
) -> Result<LnCondEstimate> {
    check_trials(trials)?;
    let batches = map_batches(trials, seed, |range, rng| {
        let mut values = Vec::with_capacity((range.end - range.start) as usize);
        let mut ill = 0u64;
        for _ in range {
            let inst = geom::sample_uniform_sphere_with(rng, m, n);
            let sic = geom::sic_general(&inst)?;
            if sic.feasibility == Feasibility::IllPosed {
                ill += 1;
            } else {
                values.push(sic.condition.ln());
            }
        }
        Ok((values, ill))
    })?;
    let mut values: Vec<f64> = Vec::with_capacity(trials as usize);
    let mut ill = 0u64;
    for (v, i) in batches {
        values.extend(v);
        ill += i;
    }
    if values.is_empty() {
        return Err(Error::Domain(
            "all instances were ill-posed; nothing to average".into(),
        ));
    }
    let sum: f64 = values.iter().sum();
    let sum_sq: f64 = values.iter().map(|v| v * v).sum();
    let estimate = McEstimate::from_moments(sum, sum_sq, values.len() as u64, seed);

    // Percentile bootstrap on a reserved RNG stream.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    let resamples = 1000;
    let nn = values.len();
    let mut means = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mut s = 0.0;
        for _ in 0..nn {
            s += values[rand::Rng::gen_range(&mut rng, 0..nn)];
        }
        means.push(s / nn as f64);
    }
    means.sort_by(f64::total_cmp);
    let lo = means[(0.025 * resamples as f64) as usize];
    let hi = means[(0.975 * resamples as f64) as usize];
    Ok(LnCondEstimate {
        estimate,
        bootstrap_ci95: (lo, hi),
        ill_posed_count: ill,
    })
}

/// Estimate `E(|det B|^{m−k+1})` for a `k×k` matrix `B` with rows
/// uniform on `S^{k−1}`. The closed form is `(O_m/O_{k−1})^k / G_{k,m+1}`.
pub fn mc_det_moment(m: usize, k: usize, trials: u64, seed: u64) -> Result<McEstimate> {
    check_trials(trials)?;
    if k < 1 || k > m {
        return Err(Error::Domain(format!(
            "det moment requires 1 <= k <= m, got m = {m}, k = {k}"
        )));
    }
    let power = (m - k + 1) as i32;
    let batches = map_batches(trials, seed, |range, rng| {
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in range {
            let rows: Vec<Vec<f64>> = (0..k).map(|_| geom::unit_vector(rng, k)).collect();
            let det = match linalg::Lu::factor(&Matrix::from_rows(&rows)) {
                Ok(lu) => lu.det(),
                Err(_) => 0.0,
            };
            let v = det.abs().powi(power);
            sum += v;
            sum_sq += v * v;
        }
        Ok((sum, sum_sq))
    })?;
    let (sum, sum_sq) = batches
        .into_iter()
        .fold((0.0, 0.0), |(a, b), (s, q)| (a + s, b + q));
    Ok(McEstimate::from_moments(sum, sum_sq, trials, seed))
}

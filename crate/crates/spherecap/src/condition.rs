//! Distribution of the GCC condition number `C(A) = 1/|cos ρ(A)|` of a
//! uniform random `A ∈ (S^m)^n`, `n > m`.
//!
//! Conditioned on feasibility the distribution is exact:
//!
//! `Prob{C ≥ 1/ε | feasible} = 2^{n−1}/Σ_{k=0}^m binom(n−1,k) ·
//!  Σ_{k=1}^m binom(n,k+1) C(m,k) ∫_0^ε t^{m−k}(1−t²)^{km/2−1} λ_m^{n−k−1} dt`,
//!
//! and conditioned on infeasibility it is bounded by the matching
//! `C(m,m)` integral with normalizer `Σ_{k=m+1}^{n-1} binom(n−1,k)`.
//! On top sit the elementary tail estimates (valid for every `n > m`)
//! and the expectation machinery that yields
//! `E(ln C) ≤ 2 ln(m+1) + 3.31`.

use serde::Serialize;

use crate::coeffs::CoeffTable;
use crate::coverage::wendel;
use crate::linalg::KahanSum;
use crate::quad::{self, QuadSpec};
use crate::specfun;
use crate::{Error, Result};

/// Conditional tail pair at one threshold ε.
#[derive(Debug, Clone, Serialize)]
pub struct CondTail {
    pub n: u64,
    pub m: usize,
    pub eps: f64,
    /// Exact `Prob{C(A) ≥ 1/ε | A feasible}`.
    pub feasible_tail: f64,
    /// Upper bound on `Prob{C(A) ≥ 1/ε | A infeasible}` (clamped to 1).
    pub infeasible_tail_bound: f64,
}

fn check_args(n: u64, m: usize, eps: f64) -> Result<()> {
    if m < 1 || n as usize <= m {
        return Err(Error::Domain(format!(
            "condition tails require n > m >= 1, got n = {n}, m = {m}"
        )));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Domain(format!("eps = {eps} outside (0, 1]")));
    }
    Ok(())
}

fn check_table(m: usize, coeffs: &CoeffTable) -> Result<()> {
    if coeffs.m() != m {
        return Err(Error::Domain(format!(
            "coefficient table is for m = {}, need m = {m}",
            coeffs.m()
        )));
    }
    Ok(())
}

/// Exact `Prob{C(A) ≥ 1/ε | A feasible}`; equals 1 at ε = 1.
pub fn cond_tail_feasible(
    n: u64,
    m: usize,
    eps: f64,
    coeffs: &CoeffTable,
    spec: &QuadSpec,
) -> Result<f64> {
    check_args(n, m, eps)?;
    check_table(m, coeffs)?;
    let hemisphere_sum: f64 = (0..=m as u64).map(|k| specfun::binomial(n - 1, k)).sum();
    let ln_prefactor = (n as f64 - 1.0) * std::f64::consts::LN_2 - hemisphere_sum.ln();
    let mut sum = KahanSum::default();
    for k in 1..=m {
        let r = quad::integrate_coverage_kernel(n, m, k, 0.0, eps, spec)?;
        if !r.converged {
            return Err(Error::Quadrature(format!(
                "feasible tail kernel (n={n}, m={m}, k={k}, ε={eps}) did not converge"
            )));
        }
        if r.value > 0.0 {
            sum.add(
                (ln_prefactor
                    + specfun::ln_binomial(n, k as u64 + 1)
                    + coeffs.get(k).ln()
                    + r.value.ln())
                .exp(),
            );
        }
    }
    let value = sum.value();
    let clamped = value.clamp(0.0, 1.0);
    if (value - clamped).abs() > 1e-6 {
        return Err(Error::InternalConsistency(format!(
            "feasible tail {value} is more than 1e-6 outside [0,1]"
        )));
    }
    Ok(clamped)
}

/// Upper bound on `Prob{C(A) ≥ 1/ε | A infeasible}`, clamped to 1 when
/// vacuous. Requires `n > m + 1`: at `n = m + 1` the infeasible set has
/// measure zero, so the conditional probability is undefined.
pub fn cond_tail_infeasible_bound(
    n: u64,
    m: usize,
    eps: f64,
    coeffs: &CoeffTable,
    spec: &QuadSpec,
) -> Result<f64> {
    check_args(n, m, eps)?;
    check_table(m, coeffs)?;
    if n as usize == m + 1 {
        return Err(Error::Domain(
            "n = m + 1 instances are feasible almost surely; the infeasible \
             conditional is undefined"
                .into(),
        ));
    }
    let r = quad::integrate_infeasible_kernel(n, m, 0.0, eps, spec)?;
    if !r.converged {
        return Err(Error::Quadrature(format!(
            "infeasible tail kernel (n={n}, m={m}, ε={eps}) did not converge"
        )));
    }
    if r.value <= 0.0 {
        return Ok(0.0);
    }
    // Normalizer Σ_{k=m+1}^{n-1} binom(n−1,k) = 2^{n−1}(1 − wendel),
    // assembled from the complement in log space.
    let ln_denominator =
        (n as f64 - 1.0) * std::f64::consts::LN_2 + (-wendel(n, m)).ln_1p();
    let ln_bound = (n as f64 - 1.0) * std::f64::consts::LN_2
        + specfun::ln_binomial(n, m as u64 + 1)
        + coeffs.get(m).ln()
        + r.value.ln()
        - ln_denominator;
    Ok(ln_bound.exp().min(1.0))
}

/// Both conditional tails on a grid of ε values.
pub fn cond_tail_grid(
    n: u64,
    m: usize,
    eps_grid: &[f64],
    coeffs: &CoeffTable,
    spec: &QuadSpec,
) -> Result<Vec<CondTail>> {
    eps_grid
        .iter()
        .map(|&eps| {
            Ok(CondTail {
                n,
                m,
                eps,
                feasible_tail: cond_tail_feasible(n, m, eps, coeffs, spec)?,
                infeasible_tail_bound: cond_tail_infeasible_bound(n, m, eps, coeffs, spec)?,
            })
        })
        .collect()
}

/// Elementary tail bounds with their validity regimes.
///
/// `P` bounds the joint probability `Prob{A infeasible and C ≥ 1/ε}`
/// and `Q` the joint `Prob{A feasible and C ≥ 1/ε}`; a component is
/// `None` outside its regime.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TailBounds {
    /// `2e(m+1)^{3/2} ε`, valid when `ε^{-1} ≥ 13(m+1)^{3/2}`.
    pub p_bound: Option<f64>,
    /// `√(2πe)(m+1)^{7/4} ε`, valid when `ε^{-1} ≥ (m+1)²`.
    pub q_bound: Option<f64>,
}

pub fn tail_bound_explicit(n: u64, m: usize, eps: f64) -> Result<TailBounds> {
    check_args(n, m, eps)?;
    let mp1 = m as f64 + 1.0;
    let inv = 1.0 / eps;
    let p_bound = (inv >= 13.0 * mp1.powf(1.5))
        .then(|| 2.0 * std::f64::consts::E * mp1.powf(1.5) * eps);
    let q_bound = (inv >= mp1 * mp1)
        .then(|| (2.0 * std::f64::consts::PI * std::f64::consts::E).sqrt() * mp1.powf(1.75) * eps);
    Ok(TailBounds { p_bound, q_bound })
}

/// `E(ln C(A)) ≤ 2 ln(m+1) + 3.31`, for every `n > m`.
pub fn expected_ln_cond_bound(m: usize) -> f64 {
    assert!(m >= 1, "dimension m must be >= 1");
    2.0 * (m as f64 + 1.0).ln() + 3.31
}

/// For `Z ≥ 1` with `Prob{Z ≥ t} ≤ K/t` for all `t ≥ t0`:
/// `E(ln Z) ≤ ln t0 + K/t0`.
pub fn expectation_from_tail(k_const: f64, t0: f64) -> Result<f64> {
    if !(k_const > 0.0 && t0 > 0.0) {
        return Err(Error::Domain(format!(
            "expectation_from_tail requires K > 0, t0 > 0, got K = {k_const}, t0 = {t0}"
        )));
    }
    Ok(t0.ln() + k_const / t0)
}

//! Coverage probabilities for random spherical caps.
//!
//! `p(n, m, α)` is the probability that `n` caps of angular radius `α`
//! with independent uniform centers fail to cover `S^m`. With
//! `ε = cos(π − α)` and the coefficients `C(m,k)`:
//!
//! * for `α ∈ [π/2, π]` the exact value is
//!   `Σ_{k=1}^m binom(n,k+1) C(m,k) ∫_ε^1 t^{m−k}(1−t²)^{km/2−1} λ_m^{n−k−1}(t) dt`;
//! * for `α ∈ [0, π/2]` the value is bounded above by the hemisphere
//!   term `2^{1−n} Σ_{k=0}^m binom(n−1,k)` plus
//!   `binom(n,m+1) C(m,m) ∫_0^{|ε|} (1−t²)^{(m²−2)/2}(1−λ_m(t))^{n−m−1} dt`,
//!   and the bound tends to the exact hemisphere value as `α → π/2`.
//!
//! The classical references are also implemented: Wendel's hemisphere
//! probability (any `m`), Stevens's exact circle formula (`m = 1`),
//! Gilbert's bracket and Miles's exact formula (`m = 2`). They are
//! algebraically independent of the route above and serve as oracles
//! for it in the test suites.

use crate::coeffs::CoeffTable;
use crate::linalg::KahanSum;
use crate::quad::{self, QuadSpec};
use crate::specfun;
use crate::{Error, Result};

use std::f64::consts::PI;

/// Largest clamp applied silently when assembling probabilities from
/// sums of huge binomials times tiny integrals; anything worse is an
/// internal-consistency failure, not a value to hide.
pub const CLAMP_LIMIT: f64 = 1e-6;

/// A coverage question: do `n` caps of radius `alpha` miss part of `S^m`?
#[derive(Debug, Clone, Copy)]
pub struct CoverageQuery {
    n: u64,
    m: usize,
    alpha: f64,
}

impl CoverageQuery {
    pub fn new(n: u64, m: usize, alpha: f64) -> Result<Self> {
        if m < 1 || n as usize <= m {
            return Err(Error::Domain(format!(
                "coverage query requires n > m >= 1, got n = {n}, m = {m}"
            )));
        }
        if !(0.0..=PI).contains(&alpha) {
            return Err(Error::Domain(format!("alpha = {alpha} outside [0, π]")));
        }
        Ok(CoverageQuery { n, m, alpha })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `ε = cos(π − α)`; nonnegative exactly when `α ≥ π/2`.
    pub fn epsilon(&self) -> f64 {
        (PI - self.alpha).cos()
    }
}

fn check_table(q_m: usize, coeffs: &CoeffTable) -> Result<()> {
    if coeffs.m() != q_m {
        return Err(Error::Domain(format!(
            "coefficient table is for m = {}, query needs m = {}",
            coeffs.m(),
            q_m
        )));
    }
    Ok(())
}

fn clamp_probability(x: f64) -> Result<f64> {
    let clamped = x.clamp(0.0, 1.0);
    let distance = (x - clamped).abs();
    if distance > CLAMP_LIMIT {
        return Err(Error::InternalConsistency(format!(
            "probability {x} is {distance} outside [0,1]; quadrature likely failed"
        )));
    }
    Ok(clamped)
}

/// Converged kernel integral or an error.
fn coverage_kernel(n: u64, m: usize, k: usize, lo: f64, hi: f64, spec: &QuadSpec) -> Result<f64> {
    let r = quad::integrate_coverage_kernel(n, m, k, lo, hi, spec)?;
    if !r.converged {
        return Err(Error::Quadrature(format!(
            "coverage kernel (n={n}, m={m}, k={k}, [{lo},{hi}]) did not converge"
        )));
    }
    Ok(r.value.max(0.0))
}

fn infeasible_kernel(n: u64, m: usize, hi: f64, spec: &QuadSpec) -> Result<f64> {
    let r = quad::integrate_infeasible_kernel(n, m, 0.0, hi, spec)?;
    if !r.converged {
        return Err(Error::Quadrature(format!(
            "infeasible kernel (n={n}, m={m}, [0,{hi}]) did not converge"
        )));
    }
    Ok(r.value.max(0.0))
}

/// Exact `p(n, m, α)` for `α ∈ [π/2, π]`.
///
/// Each term is assembled in log space (`ln binom + ln C + ln ∫`) and the
/// terms are summed with compensated accumulation; the result is clamped
/// to `[0, 1]` only within [`CLAMP_LIMIT`].
pub fn p_not_covered_exact(
    q: &CoverageQuery,
    coeffs: &CoeffTable,
    spec: &QuadSpec,
) -> Result<f64> {
    if q.alpha < PI / 2.0 {
        return Err(Error::Domain(format!(
            "exact coverage formula needs alpha in [π/2, π], got {}",
            q.alpha
        )));
    }
    check_table(q.m, coeffs)?;
    let eps = q.epsilon().clamp(0.0, 1.0);
    let mut sum = KahanSum::default();
    for k in 1..=q.m {
        let integral = coverage_kernel(q.n, q.m, k, eps, 1.0, spec)?;
        if integral > 0.0 {
            let ln_term = specfun::ln_binomial(q.n, k as u64 + 1)
                + coeffs.get(k).ln()
                + integral.ln();
            sum.add(ln_term.exp());
        }
    }
    clamp_probability(sum.value())
}

/// Upper bound on `p(n, m, α)` for `α ∈ [0, π/2]`.
///
/// Exact in the limit `α → π/2` (the integral term vanishes and the
/// hemisphere term remains). The raw bound is returned unclamped; it is
/// a valid upper bound even when it exceeds 1.
pub fn p_not_covered_bound(
    q: &CoverageQuery,
    coeffs: &CoeffTable,
    spec: &QuadSpec,
) -> Result<f64> {
    if q.alpha > PI / 2.0 {
        return Err(Error::Domain(format!(
            "coverage bound needs alpha in [0, π/2], got {}",
            q.alpha
        )));
    }
    check_table(q.m, coeffs)?;
    let eps_abs = q.epsilon().abs().min(1.0);
    let mut bound = wendel(q.n, q.m);
    if eps_abs > 0.0 {
        let integral = infeasible_kernel(q.n, q.m, eps_abs, spec)?;
        if integral > 0.0 {
            bound += (specfun::ln_binomial(q.n, q.m as u64 + 1)
                + coeffs.get(q.m).ln()
                + integral.ln())
            .exp();
        }
    }
    Ok(bound)
}

/// Wendel's hemisphere probability
/// `p(n, m, π/2) = 2^{1−n} Σ_{k=0}^m binom(n−1, k)`; equals 1 for
/// `n ≤ m + 1`.
pub fn wendel(n: u64, m: usize) -> f64 {
    assert!(n >= 1, "wendel requires n >= 1");
    let mut sum = KahanSum::default();
    for k in 0..=m as u64 {
        sum.add(specfun::binomial(n - 1, k));
    }
    2f64.powi(1 - n as i32) * sum.value()
}

/// Stevens's exact circle formula:
/// `p(n, 1, α) = Σ_{j=1}^{⌊π/α⌋} (−1)^{j+1} binom(n,j) (1 − jα/π)^{n−1}`.
///
/// Terms with `1 − jα/π ≤ 0` contribute zero and are dropped, which
/// also covers exact ties `j = π/α`.
pub fn stevens_exact(n: u64, alpha: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::Domain("stevens requires n >= 1".into()));
    }
    if !(alpha > 0.0 && alpha <= PI) {
        return Err(Error::Domain(format!(
            "stevens requires alpha in (0, π], got {alpha}"
        )));
    }
    let k_max = (PI / alpha).floor() as u64;
    let mut sum = KahanSum::default();
    for j in 1..=k_max {
        let base = 1.0 - j as f64 * alpha / PI;
        if base <= 0.0 {
            continue;
        }
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        sum.add(sign * specfun::binomial(n, j) * base.powi(n as i32 - 1));
    }
    clamp_probability(sum.value())
}

/// Gilbert's bracket for `p(n, 2, α)`.
#[derive(Debug, Clone, Copy)]
pub struct GilbertBounds {
    pub lower: f64,
    pub upper: f64,
    /// The upper bound degenerates to 0 for n < 2; the bracket is only
    /// meaningful from two caps on.
    pub bracket_valid: bool,
}

/// `(1−λ)^n ≤ p(n, 2, α) ≤ (4/3) n(n−1) λ(1−λ)^{n−1}`, `λ = sin²(α/2)`.
pub fn gilbert_bounds(n: u64, alpha: f64) -> Result<GilbertBounds> {
    if n < 1 {
        return Err(Error::Domain("gilbert requires n >= 1".into()));
    }
    if !(0.0..=PI).contains(&alpha) {
        return Err(Error::Domain(format!("alpha = {alpha} outside [0, π]")));
    }
    let lam = (alpha / 2.0).sin().powi(2);
    let nf = n as f64;
    Ok(GilbertBounds {
        lower: (1.0 - lam).powi(n as i32),
        upper: 4.0 / 3.0 * nf * (nf - 1.0) * lam * (1.0 - lam).powi(n as i32 - 1),
        bracket_valid: n >= 2,
    })
}

/// Miles's exact formula for `p(n, 2, α)`, `α ∈ [π/2, π]`:
/// `binom(n,2)∫_0^{π−α} sin^{2(n−2)}(θ/2) sin 2θ dθ
///  + (3/4) binom(n,3)∫_0^{π−α} sin^{2(n−3)}(θ/2) sin³θ dθ`.
pub fn miles_exact(n: u64, alpha: f64, spec: &QuadSpec) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain("miles requires n >= 2".into()));
    }
    if !(PI / 2.0..=PI).contains(&alpha) {
        return Err(Error::Domain(format!(
            "miles requires alpha in [π/2, π], got {alpha}"
        )));
    }
    let hi = PI - alpha;
    let e1 = 2 * (n as i32 - 2);
    let first = quad::integrate(
        move |theta: f64| (theta / 2.0).sin().powi(e1) * (2.0 * theta).sin(),
        0.0,
        hi,
        spec,
    )?;
    let e2 = 2 * (n as i32 - 3);
    let second = if n >= 3 {
        quad::integrate(
            move |theta: f64| (theta / 2.0).sin().powi(e2) * theta.sin().powi(3),
            0.0,
            hi,
            spec,
        )?
        .value
    } else {
        0.0
    };
    clamp_probability(
        specfun::binomial(n, 2) * first.value + 0.75 * specfun::binomial(n, 3) * second,
    )
}

/// Upper bound on the expected number of caps of radius `α ∈ (0, π/2]`
/// needed to cover `S^m`:
/// `3m + 2 + √m (m+1) cos α · λ_m(cos α)^{−2} (2 λ_m(cos α))^{−m}`.
pub fn expected_caps_bound(m: usize, alpha: f64) -> Result<f64> {
    if m < 1 {
        return Err(Error::Domain("m must be >= 1".into()));
    }
    if !(alpha > 0.0 && alpha <= PI / 2.0) {
        return Err(Error::Domain(format!(
            "expected-caps bound needs alpha in (0, π/2], got {alpha}"
        )));
    }
    let eps = alpha.cos();
    let lam = specfun::cap_fraction(m, eps)?;
    let mf = m as f64;
    Ok(3.0 * mf + 2.0 + mf.sqrt() * (mf + 1.0) * eps / (lam * lam) / (2.0 * lam).powi(m as i32))
}

/// Truncated series bound for `E(N(m, α))`.
#[derive(Debug, Clone, Copy)]
pub struct CapsSeries {
    /// `m + 1 + Σ_{n=m+1}^{m+terms} min(1, p̄(n,m,α))` where `p̄` is the
    /// per-`n` upper bound; itself an upper bound on the corresponding
    /// truncation of the true series.
    pub partial_sum: f64,
    /// Analytic bound on everything past the truncation, so that
    /// `E(N) ≤ partial_sum + tail_bound`.
    pub tail_bound: f64,
    pub terms: u64,
}

/// Sum the series `E(N(m,α)) = m + 1 + Σ_{n>m} p(n,m,α)` using the
/// per-`n` upper bound, plus a geometric-domination bound on the tail.
///
/// The tail combines the hemisphere part (each `Σ_r binom(r,k) 2^{−r}`
/// dominated by a geometric series from `r = m + terms`) with the
/// integral part (dominated by `binom(n,m+1)(1−λ_m(ε))^{n−m−1}`, again
/// geometric, falling back to the global `C(m,m)·ε/λ_m(ε)^{m+2}` bound
/// when the truncation is too short for the ratio test).
pub fn expected_caps_series(
    m: usize,
    alpha: f64,
    coeffs: &CoeffTable,
    spec: &QuadSpec,
    terms: u64,
) -> Result<CapsSeries> {
    if terms < 1 {
        return Err(Error::Domain("terms must be >= 1".into()));
    }
    if !(alpha > 0.0 && alpha <= PI / 2.0) {
        return Err(Error::Domain(format!(
            "expected-caps series needs alpha in (0, π/2], got {alpha}"
        )));
    }
    check_table(m, coeffs)?;

    let cutoff = m as u64 + terms;
    let mut partial = KahanSum::default();
    partial.add(m as f64 + 1.0);
    for n in (m as u64 + 1)..=cutoff {
        let q = CoverageQuery::new(n, m, alpha)?;
        partial.add(p_not_covered_bound(&q, coeffs, spec)?.min(1.0));
    }

    // Hemisphere tail: Σ_{k≤m} Σ_{r≥cutoff} binom(r,k) 2^{−r}.
    let mut tail = 0.0f64;
    for k in 0..=m as u64 {
        let first = specfun::binomial(cutoff, k) * 2f64.powi(-(cutoff as i32));
        let ratio = (cutoff as f64 + 1.0) / (cutoff as f64 + 1.0 - k as f64) / 2.0;
        if ratio >= 1.0 {
            tail = f64::INFINITY;
        } else {
            tail += first / (1.0 - ratio);
        }
    }

    // Integral tail, only present for α strictly below π/2.
    let eps = q_eps(alpha);
    if eps > 0.0 {
        let lam = specfun::cap_fraction(m, eps)?;
        let envelope = if m == 1 {
            1.0 / ((1.0 - eps) * (1.0 + eps)).sqrt()
        } else {
            1.0
        };
        let cmm = coeffs.get(m);
        let z = 1.0 - lam;
        let ratio = (cutoff as f64 + 2.0) / (cutoff as f64 + 1.0 - m as f64) * z;
        let geometric = if ratio < 1.0 {
            let first = (specfun::ln_binomial(cutoff + 1, m as u64 + 1)
                + (cutoff - m as u64) as f64 * z.ln())
            .exp();
            cmm * envelope * eps * first / (1.0 - ratio)
        } else {
            f64::INFINITY
        };
        let global = cmm * envelope * eps / lam.powi(m as i32 + 2);
        tail += geometric.min(global);
    }

    if tail.is_nan() {
        tail = f64::INFINITY;
    }
    Ok(CapsSeries {
        partial_sum: partial.value(),
        tail_bound: tail,
        terms,
    })
}

/// `ε = cos α` for the sub-hemisphere regime, clamped against roundoff.
fn q_eps(alpha: f64) -> f64 {
    alpha.cos().max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::CoeffTable;

    fn table(m: usize) -> CoeffTable {
        CoeffTable::from_linear_system(m, &QuadSpec::default()).unwrap()
    }

    #[test]
    fn wendel_values() {
        assert_eq!(wendel(3, 1), 0.75);
        assert_eq!(wendel(4, 2), 0.875);
        assert_eq!(wendel(2, 5), 1.0);
        assert_eq!(wendel(4, 1), 0.5);
        // 2^{-5} (1 + 5 + 10) = 1/2
        assert_eq!(wendel(6, 2), 0.5);
    }

    #[test]
    fn stevens_values() {
        assert!((stevens_exact(2, PI / 2.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((stevens_exact(3, PI / 2.0).unwrap() - 0.75).abs() < 1e-14);
        // Single surviving term: 5 (1/3)^4 = 5/81.
        assert!((stevens_exact(5, 2.0 * PI / 3.0).unwrap() - 5.0 / 81.0).abs() < 1e-14);
        assert!(stevens_exact(5, 0.0).is_err());
        assert!((stevens_exact(7, PI).unwrap() - 0.0).abs() < 1e-300);
    }

    #[test]
    fn stevens_matches_wendel_at_half_pi() {
        for n in 2..=10 {
            assert!(
                (stevens_exact(n, PI / 2.0).unwrap() - wendel(n, 1)).abs() < 1e-12,
                "n = {n}"
            );
        }
    }

    #[test]
    fn gilbert_values() {
        let g = gilbert_bounds(10, PI / 2.0).unwrap();
        assert!((g.lower - 0.5f64.powi(10)).abs() < 1e-15);
        // (4/3)·10·9·λ(1−λ)^9 = 120·2^{−10} at λ = 1/2; the bracket must
        // contain the exact hemisphere value wendel(10,2) = 46/512.
        assert!((g.upper - 120.0 * 0.5f64.powi(10)).abs() < 1e-12);
        assert!(g.lower <= 46.0 / 512.0 && 46.0 / 512.0 <= g.upper);
        assert!(g.bracket_valid);
        let g1 = gilbert_bounds(1, PI / 2.0).unwrap();
        assert!(!g1.bracket_valid);
        assert!((g1.lower - 0.5).abs() < 1e-15);
        assert_eq!(g1.upper, 0.0);
    }

    #[test]
    fn miles_matches_wendel_at_half_pi() {
        let spec = QuadSpec::default();
        for n in 3..=8 {
            let m = miles_exact(n, PI / 2.0, &spec).unwrap();
            let w = wendel(n, 2);
            assert!((m - w).abs() < 1e-9, "n = {n}: miles {m} vs wendel {w}");
        }
        // In particular p(4,2,π/2) = 7/8.
        assert!((miles_exact(4, PI / 2.0, &spec).unwrap() - 0.875).abs() < 1e-9);
        assert!((miles_exact(5, PI, &spec).unwrap()).abs() < 1e-300);
    }

    #[test]
    fn exact_formula_reduces_to_wendel() {
        let spec = QuadSpec::default();
        for m in 1..=3 {
            let t = table(m);
            for n in (m as u64 + 1)..=(m as u64 + 5) {
                let q = CoverageQuery::new(n, m, PI / 2.0).unwrap();
                let p = p_not_covered_exact(&q, &t, &spec).unwrap();
                let w = wendel(n, m);
                assert!((p - w).abs() < 1e-8, "n = {n}, m = {m}: {p} vs {w}");
            }
        }
    }

    #[test]
    fn exact_formula_matches_stevens_and_miles() {
        let spec = QuadSpec::default();
        let t1 = table(1);
        let t2 = table(2);
        for alpha in [PI / 2.0, 3.0 * PI / 5.0, 3.0 * PI / 4.0, 0.9 * PI] {
            for n in 3..=6u64 {
                let q1 = CoverageQuery::new(n, 1, alpha).unwrap();
                let p1 = p_not_covered_exact(&q1, &t1, &spec).unwrap();
                let s = stevens_exact(n, alpha).unwrap();
                assert!((p1 - s).abs() < 1e-8, "m=1 n={n} α={alpha}: {p1} vs {s}");

                let q2 = CoverageQuery::new(n, 2, alpha).unwrap();
                let p2 = p_not_covered_exact(&q2, &t2, &spec).unwrap();
                let mi = miles_exact(n, alpha, &spec).unwrap();
                assert!((p2 - mi).abs() < 1e-8, "m=2 n={n} α={alpha}: {p2} vs {mi}");
            }
        }
    }

    #[test]
    fn full_caps_cover_surely() {
        let spec = QuadSpec::default();
        let t = table(2);
        let q = CoverageQuery::new(5, 2, PI).unwrap();
        assert_eq!(p_not_covered_exact(&q, &t, &spec).unwrap(), 0.0);
    }

    #[test]
    fn bound_reduces_to_wendel_at_half_pi() {
        let spec = QuadSpec::default();
        let t = table(2);
        let q = CoverageQuery::new(7, 2, PI / 2.0).unwrap();
        let b = p_not_covered_bound(&q, &t, &spec).unwrap();
        assert!((b - wendel(7, 2)).abs() < 1e-12);
    }

    #[test]
    fn bound_equals_stevens_first_term_for_m1() {
        // For m = 1 the bound collapses exactly to n(1 − α/π)^{n−1}.
        let spec = QuadSpec::default();
        let t = table(1);
        let q = CoverageQuery::new(10, 1, PI / 3.0).unwrap();
        let b = p_not_covered_bound(&q, &t, &spec).unwrap();
        let stevens_first = 10.0 * (2.0f64 / 3.0).powi(9);
        assert!(
            (b - stevens_first).abs() < 1e-9,
            "{b} vs {stevens_first}"
        );
        assert!(b <= stevens_first + 1e-9);
    }

    #[test]
    fn expected_caps_bound_values() {
        assert!((expected_caps_bound(1, PI / 2.0).unwrap() - 5.0).abs() < 1e-12);
        assert!((expected_caps_bound(2, PI / 2.0).unwrap() - 8.0).abs() < 1e-12);
        // λ_2(1/2) = 1/4: 8 + 96√2.
        let b = expected_caps_bound(2, PI / 3.0).unwrap();
        assert!((b - (8.0 + 96.0 * 2f64.sqrt())).abs() < 1e-9, "{b}");
        assert!((b - 143.76).abs() < 0.01);
        assert!(expected_caps_bound(2, 2.0).is_err());
    }

    #[test]
    fn expected_caps_series_hemisphere_values() {
        let spec = QuadSpec::default();
        // E(N(2, π/2)) = 7 and E(N(1, π/2)) = 5 by summing the Wendel
        // series; with 200 terms the truncation error is far below 1e-6.
        let s2 = expected_caps_series(2, PI / 2.0, &table(2), &spec, 200).unwrap();
        assert!((s2.partial_sum - 7.0).abs() < 1e-6, "{}", s2.partial_sum);
        assert!(s2.tail_bound < 1e-6);
        let s1 = expected_caps_series(1, PI / 2.0, &table(1), &spec, 200).unwrap();
        assert!((s1.partial_sum - 5.0).abs() < 1e-6, "{}", s1.partial_sum);
        assert!(s1.tail_bound < 1e-6);
    }

    #[test]
    fn expected_caps_series_consistent_with_bound() {
        let spec = QuadSpec::default();
        for (m, alpha) in [(1, PI / 2.0), (2, PI / 2.0), (2, PI / 3.0)] {
            let s = expected_caps_series(m, alpha, &table(m), &spec, 300).unwrap();
            let b = expected_caps_bound(m, alpha).unwrap();
            assert!(
                s.partial_sum <= b + 1e-9,
                "m={m} α={alpha}: partial {} vs bound {b}",
                s.partial_sum
            );
            assert!(s.tail_bound.is_finite());
        }
    }

    #[test]
    fn exact_is_monotone_in_n_and_alpha() {
        let spec = QuadSpec::default();
        let t = table(2);
        let mut prev = 1.0;
        for n in 3..=9u64 {
            let q = CoverageQuery::new(n, 2, 2.0 * PI / 3.0).unwrap();
            let p = p_not_covered_exact(&q, &t, &spec).unwrap();
            assert!(p <= prev + 1e-12, "not monotone in n at {n}");
            prev = p;
        }
        let mut prev = 1.0;
        for i in 0..=8 {
            let alpha = PI / 2.0 + (PI / 2.0) * i as f64 / 8.0;
            let q = CoverageQuery::new(6, 2, alpha).unwrap();
            let p = p_not_covered_exact(&q, &t, &spec).unwrap();
            assert!(p <= prev + 1e-12, "not monotone in alpha at {alpha}");
            prev = p;
        }
    }

    #[test]
    fn domain_errors() {
        let spec = QuadSpec::default();
        let t = table(2);
        assert!(CoverageQuery::new(2, 2, 1.0).is_err());
        let q = CoverageQuery::new(5, 2, 1.0).unwrap(); // alpha < π/2
        assert!(p_not_covered_exact(&q, &t, &spec).is_err());
        let q2 = CoverageQuery::new(5, 2, 2.0).unwrap(); // alpha > π/2
        assert!(p_not_covered_bound(&q2, &t, &spec).is_err());
        // Table dimension mismatch.
        let q3 = CoverageQuery::new(5, 1, 2.0).unwrap();
        assert!(p_not_covered_exact(&q3, &t, &spec).is_err());
    }
}

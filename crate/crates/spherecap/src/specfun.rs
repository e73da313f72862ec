//! Exact special-function primitives: sphere surface measures, relative
//! cap volumes, Grassmannian volumes, binomials, and half-integer Gamma
//! brackets.
//!
//! Conventions used throughout the crate:
//!
//! * `O_m = vol_m(S^m) = 2 π^{(m+1)/2} / Γ((m+1)/2)`, so `O_0 = 2`,
//!   `O_1 = 2π`, `O_2 = 4π`, `O_3 = 2π²`.
//! * `λ_m(t)` is the fraction of `S^m` occupied by a spherical cap whose
//!   angular radius has cosine `t`, extended to `t < 0` by the symmetry
//!   `λ_m(t) = 1 − λ_m(−t)`; `λ_m(1) = 0`, `λ_m(0) = 1/2`, `λ_m(−1) = 1`.
//!
//! Everything here is a pure function; factorial-sized quantities are
//! assembled in log space so the public values stay finite for every
//! dimension this crate supports (`m` up to a couple hundred).

use statrs::function::beta::beta_reg;

use crate::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// FACTORIAL[n] = n!, exact in f64 up to 18! and correctly rounded after.
const FACTORIAL: [f64; 21] = [
    1.0,
    1.0,
    2.0,
    6.0,
    24.0,
    120.0,
    720.0,
    5040.0,
    40320.0,
    362880.0,
    3628800.0,
    39916800.0,
    479001600.0,
    6227020800.0,
    87178291200.0,
    1307674368000.0,
    20922789888000.0,
    355687428096000.0,
    6402373705728000.0,
    121645100408832000.0,
    2432902008176640000.0,
];

#[inline]
fn lanczos_sum(z: f64) -> f64 {
    let mut s = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        s += c / (z + i as f64);
    }
    s
}

/// Γ(x) by the Lanczos approximation (g = 7, n = 9), with exact fast
/// paths at small integers and upward recurrence from Γ(1/2) = √π at
/// half-integers. Better than 13 significant digits on the range this
/// crate uses; the unit tests assert that against the recurrence.
pub fn gamma(x: f64) -> f64 {
    if x.is_nan() {
        return x;
    }
    if x > 0.0 && x == x.floor() {
        let n = x as u64;
        if (1..=21).contains(&n) {
            return FACTORIAL[(n - 1) as usize];
        }
    }
    if x > 0.0 && x - x.floor() == 0.5 && x <= 300.5 {
        // x = k + 1/2: exact recurrence keeps the error at a few ulps.
        let k = (x - 0.5) as u64;
        let mut g = std::f64::consts::PI.sqrt();
        for j in 0..k {
            g *= j as f64 + 0.5;
        }
        return g;
    }
    if x <= 0.0 && x == x.floor() {
        return f64::INFINITY;
    }
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return pi / ((pi * x).sin() * gamma(1.0 - x));
    }
    let z = x - 1.0;
    let base = z + LANCZOS_G + 0.5;
    (2.0 * std::f64::consts::PI).sqrt()
        * base.powf(z + 0.5)
        * (-base).exp()
        * lanczos_sum(z)
}

/// ln Γ(x) for x > 0, Lanczos in log space.
pub fn ln_gamma(x: f64) -> f64 {
    if x.is_nan() {
        return x;
    }
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    if x <= 21.0 && (x == x.floor() || x - x.floor() == 0.5) {
        return gamma(x).ln();
    }
    let z = x - 1.0;
    let base = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * base.ln() - base
        + lanczos_sum(z).ln()
}

/// `ln O_m`.
pub fn ln_sphere_volume(m: usize) -> f64 {
    let h = (m as f64 + 1.0) / 2.0;
    std::f64::consts::LN_2 + h * std::f64::consts::PI.ln() - ln_gamma(h)
}

/// `O_m`, the m-dimensional volume of the unit sphere `S^m ⊂ R^{m+1}`.
pub fn sphere_volume(m: usize) -> f64 {
    ln_sphere_volume(m).exp()
}

/// `α_m = 2 O_{m−1} / O_m`; satisfies `α_m ≤ √m`.
pub fn alpha_m(m: usize) -> f64 {
    assert!(m >= 1);
    2.0 * (ln_sphere_volume(m - 1) - ln_sphere_volume(m)).exp()
}

fn check_cap_args(m: usize, t: f64) -> Result<()> {
    if m == 0 {
        return Err(Error::Domain("cap_fraction requires m >= 1".into()));
    }
    if !(-1.0..=1.0).contains(&t) || t.is_nan() {
        return Err(Error::Domain(format!(
            "cap cosine t = {t} outside [-1, 1]"
        )));
    }
    Ok(())
}

/// `λ_m(t)`: relative volume of a cap of radius `arccos t` in `S^m`.
///
/// Evaluated through the regularized incomplete beta identity
/// `λ_m(t) = ½ I_{1−t²}(m/2, ½)` for `t ≥ 0` and by the complement
/// symmetry for `t < 0`. The direct quadrature of the defining integral
/// lives in [`crate::quad::cap_fraction_via_quadrature`] and serves as an
/// independent oracle.
pub fn cap_fraction(m: usize, t: f64) -> Result<f64> {
    check_cap_args(m, t)?;
    if t < 0.0 {
        return Ok(1.0 - cap_fraction(m, -t)?);
    }
    // 1 - t² evaluated as a product to keep precision near t = 1.
    let x = (1.0 - t) * (1.0 + t);
    if x <= 0.0 {
        return Ok(0.0);
    }
    Ok(0.5 * beta_reg(m as f64 / 2.0, 0.5, x.min(1.0)))
}

/// `1 − λ_m(t)`, without the cancellation of forming the complement for
/// t well below zero.
pub fn cap_fraction_complement(m: usize, t: f64) -> Result<f64> {
    check_cap_args(m, t)?;
    if t < 0.0 {
        // 1 - λ_m(t) = λ_m(-t) ≤ 1/2: directly stable.
        cap_fraction(m, -t)
    } else {
        Ok(1.0 - cap_fraction(m, t)?)
    }
}

/// `ln λ_m(t)`, used to raise the cap volume to large powers.
///
/// Underflow of `λ_m` itself (extremely small caps in high dimension)
/// yields `-inf`, which exponentiates to an accepted hard zero.
pub fn ln_cap_fraction(m: usize, t: f64) -> Result<f64> {
    Ok(cap_fraction(m, t)?.ln())
}

/// Volume of the Grassmannian of k-dimensional subspaces of `R^d`:
/// `G_{k,d} = O_{d−k} ⋯ O_{d−1} / (O_0 ⋯ O_{k−1})`.
pub fn grassmann_volume(k: usize, d: usize) -> Result<f64> {
    Ok(ln_grassmann_volume(k, d)?.exp())
}

/// `ln G_{k,d}`.
pub fn ln_grassmann_volume(k: usize, d: usize) -> Result<f64> {
    if k == 0 || k > d {
        return Err(Error::Domain(format!(
            "grassmann_volume requires 1 <= k <= d, got k = {k}, d = {d}"
        )));
    }
    let mut ln = 0.0;
    for j in d - k..d {
        ln += ln_sphere_volume(j);
    }
    for j in 0..k {
        ln -= ln_sphere_volume(j);
    }
    Ok(ln)
}

/// Bracket `lower ≤ Γ((r+1)/2) ≤ upper` with
/// `lower = r^{1/4} 2^{−(r−1)/2} √((r−1)!)` and `upper = √(π/2) · lower`.
///
/// The factorial is handled in log space, so the bracket is computed
/// without overflow for any `r` whose Γ value itself fits in an `f64`.
pub fn gamma_half_bounds(r: u64) -> Result<(f64, f64)> {
    if r < 1 {
        return Err(Error::Domain("gamma_half_bounds requires r >= 1".into()));
    }
    let rf = r as f64;
    let ln_lower = 0.25 * rf.ln() - 0.5 * (rf - 1.0) * std::f64::consts::LN_2
        + 0.5 * ln_gamma(rf); // ln (r-1)! = ln Γ(r)
    let lower = ln_lower.exp();
    let upper = (std::f64::consts::PI / 2.0).sqrt() * lower;
    Ok((lower, upper))
}

/// Exact binomial coefficient as an `f64` (exact while below 2^53).
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 1..=k {
        // acc stays integer-valued: it equals binom(n-k+i, i) after step i.
        acc = acc * ((n - k + i) as f64) / (i as f64);
    }
    acc.round()
}

/// `ln binom(n, k)`; `-inf` when `k > n`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const TOL: f64 = 1e-12;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn sphere_volume_low_dimensions() {
        assert!(rel_close(sphere_volume(0), 2.0, TOL));
        assert!(rel_close(sphere_volume(1), 2.0 * PI, TOL));
        assert!(rel_close(sphere_volume(2), 4.0 * PI, TOL));
        assert!(rel_close(sphere_volume(3), 2.0 * PI * PI, TOL));
        // O_4 = 8π²/3 via Γ(5/2) = 3√π/4
        assert!(rel_close(sphere_volume(4), 8.0 * PI * PI / 3.0, TOL));
        assert!((sphere_volume(2) - 12.56637).abs() < 1e-5);
        assert!((sphere_volume(4) - 26.31894).abs() < 1e-5);
    }

    #[test]
    fn gamma_matches_half_integer_recurrence() {
        // Γ(k) = (k-1)! and Γ(k + 1/2) by the recurrence from Γ(1/2) = √π.
        let mut fact = 1.0;
        for k in 1..=20u64 {
            assert!(rel_close(gamma(k as f64), fact, 1e-13));
            fact *= k as f64;
        }
        let mut half = PI.sqrt();
        for k in 0..40 {
            assert!(rel_close(gamma(k as f64 + 0.5), half, 1e-13));
            half *= k as f64 + 0.5;
        }
    }

    #[test]
    fn cap_fraction_known_values() {
        // λ_1(t) = arccos(t)/π
        assert!(rel_close(cap_fraction(1, 0.5).unwrap(), 1.0 / 3.0, 1e-12));
        // λ_2(t) = (1−t)/2
        assert!(rel_close(cap_fraction(2, 0.5).unwrap(), 0.25, 1e-12));
        assert!(rel_close(cap_fraction(7, 0.0).unwrap(), 0.5, 1e-12));
        for m in 1..=10 {
            assert_eq!(cap_fraction(m, 1.0).unwrap(), 0.0);
            assert!(rel_close(cap_fraction(m, 0.0).unwrap(), 0.5, 1e-12));
            assert!(rel_close(cap_fraction(m, -1.0).unwrap(), 1.0, 1e-12));
        }
        assert!(cap_fraction(2, 1.5).is_err());
        assert!(cap_fraction(0, 0.5).is_err());
    }

    #[test]
    fn cap_fraction_symmetry_and_monotonicity() {
        for m in [1usize, 2, 3, 5, 17] {
            let mut prev = f64::INFINITY;
            for i in 0..=100 {
                let t = -1.0 + 0.02 * i as f64;
                let l = cap_fraction(m, t).unwrap();
                let lc = cap_fraction(m, -t).unwrap();
                assert!((l + lc - 1.0).abs() < 1e-12, "symmetry at m={m}, t={t}");
                assert!(l < prev + 1e-15, "monotone at m={m}, t={t}");
                prev = l;
            }
        }
    }

    #[test]
    fn complement_is_stable() {
        for m in [1usize, 2, 4] {
            for t in [-0.9, -0.5, 0.0, 0.5, 0.9] {
                let a = cap_fraction_complement(m, t).unwrap();
                let b = 1.0 - cap_fraction(m, t).unwrap();
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn grassmann_volume_examples() {
        // One factor each: O_1/O_0 = π.
        assert!(rel_close(grassmann_volume(1, 2).unwrap(), PI, TOL));
        // Full product telescopes to 1.
        for d in 1..=6 {
            assert!(rel_close(grassmann_volume(d, d).unwrap(), 1.0, TOL));
        }
        // O_2 O_3 / (O_0 O_1) = 2π².
        assert!(rel_close(grassmann_volume(2, 4).unwrap(), 2.0 * PI * PI, TOL));
        assert!(grassmann_volume(3, 2).is_err());
        assert!(grassmann_volume(0, 2).is_err());
    }

    #[test]
    fn gamma_half_bounds_bracket() {
        let (lo, hi) = gamma_half_bounds(1).unwrap();
        assert!(rel_close(lo, 1.0, TOL));
        assert!(rel_close(hi, (PI / 2.0).sqrt(), TOL));
        let (lo, hi) = gamma_half_bounds(2).unwrap();
        assert!(rel_close(lo, 2.0f64.powf(0.25) / 2.0f64.sqrt(), TOL));
        let g32 = PI.sqrt() / 2.0;
        assert!(lo <= g32 && g32 <= hi);
        let (lo, hi) = gamma_half_bounds(6).unwrap();
        let g72 = 15.0 * PI.sqrt() / 8.0;
        assert!((g72 - 3.3234).abs() < 1e-4);
        assert!(lo <= g72 && g72 <= hi);
        for r in 1..=100u64 {
            let (lo, hi) = gamma_half_bounds(r).unwrap();
            let g = gamma((r as f64 + 1.0) / 2.0);
            assert!(lo <= g * (1.0 + 1e-13) && g <= hi * (1.0 + 1e-13), "r = {r}");
        }
    }

    #[test]
    fn alpha_m_sharper_bound() {
        for m in 1..=50 {
            assert!(alpha_m(m) <= (m as f64).sqrt() + 1e-13, "m = {m}");
        }
    }

    #[test]
    fn sphere_volume_ratio_bound() {
        // O_{k−1} O_{m−k} / O_m ≤ √(π/2) k^{3/4} √binom(m,k)
        for m in 1..=30usize {
            for k in 1..=m {
                let lhs = (ln_sphere_volume(k - 1) + ln_sphere_volume(m - k)
                    - ln_sphere_volume(m))
                .exp();
                let rhs = (PI / 2.0).sqrt()
                    * (k as f64).powf(0.75)
                    * binomial(m as u64, k as u64).sqrt();
                assert!(lhs <= rhs * (1.0 + 1e-12), "m = {m}, k = {k}");
            }
        }
    }

    #[test]
    fn binomial_exact_values() {
        assert_eq!(binomial(0, 0), 1.0);
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(10, 10), 1.0);
        assert_eq!(binomial(10, 11), 0.0);
        assert_eq!(binomial(52, 5), 2_598_960.0);
        for n in 0..40u64 {
            for k in 0..=n {
                let b = binomial(n, k);
                assert_eq!(b, binomial(n, n - k));
                let ln = ln_binomial(n, k);
                assert!((ln - b.ln()).abs() < 1e-10 * b.ln().abs().max(1.0));
            }
        }
    }
}

//! The simplex-moment coefficients `C(m, k)`, `1 ≤ k ≤ m`.
//!
//! Three independent routes are implemented:
//!
//! * closed forms for `k ∈ {1, m−1, m}`:
//!   `C(m,1) = 2^m O_{m−1}/O_m`,
//!   `C(m,m) = (m+1)/2^{m−1} · O_{m−1}/O_m`,
//!   `C(m,m−1) = m(m−1)/2^{m−1} · (1 + α_m²)` with `α_m = 2O_{m−1}/O_m`;
//! * an `m×m` linear system built from the weighted integrals
//!   `I(n,m,k) = 2^{n−1} binom(n,k+1) ∫_0^1 t^{m−k}(1−t²)^{km/2−1} λ_m^{n−k−1} dt`
//!   through the normalization identity
//!   `Σ_k I(n,m,k) C(m,k) = Σ_{k=0}^{m} binom(n−1,k)` at `n = m+1..2m`;
//! * direct Monte Carlo over the defining moment: `C(m,k)` equals
//!   `(k!)^{m−k+1}/O_m^k · G_{k,m} · O_{k−1}^{k+1}` times the expectation
//!   of `vol_k(Δ)^{m−k+1}` over centered `(k+1)`-tuples on `S^{k−1}`,
//!   where a tuple is centered when the origin lies in the relative
//!   interior of its full-dimensional convex hull.
//!
//! Every value, whatever its route, is checked against the rigorous
//! bracket
//! `(k+1)/2^k · O_{k−1}O_{m−k}/O_m ≤ C(m,k) ≤ (k+1)^{m−k+1}/2^k · O_{k−1}O_{m−k}/O_m`
//! (equalities at `k = m`); a violation is a hard failure.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, Matrix};
use crate::mc::McEstimate;
use crate::quad::{self, QuadSpec};
use crate::specfun;
use crate::{Error, Result};

/// Largest dimension accepted by the linear-system route in double
/// precision; beyond this the integrand powers are too poorly scaled.
pub const LINEAR_SYSTEM_M_CAP: usize = 12;

/// Condition-estimate threshold that triggers the rescaled fallback
/// solve and marks the table degraded.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Required relative residual of the solved system.
pub const RESIDUAL_LIMIT: f64 = 1e-8;

/// How a coefficient value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ClosedForm,
    LinearSystem,
    MonteCarlo,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Provenance::ClosedForm => "closed-form",
            Provenance::LinearSystem => "linear-system",
            Provenance::MonteCarlo => "monte-carlo",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Provenance {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed-form" => Ok(Provenance::ClosedForm),
            "linear-system" => Ok(Provenance::LinearSystem),
            "monte-carlo" => Ok(Provenance::MonteCarlo),
            other => Err(Error::Parse(format!("unknown provenance {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoeffEntry {
    pub value: f64,
    pub provenance: Provenance,
    pub uncertainty: f64,
}

/// The coefficients `C(m, 1..=m)` for one dimension.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoeffTable {
    m: usize,
    entries: Vec<CoeffEntry>,
    degraded: bool,
}

impl CoeffTable {
    pub fn m(&self) -> usize {
        self.m
    }

    /// `C(m, k)`.
    pub fn get(&self, k: usize) -> f64 {
        self.entry(k).value
    }

    pub fn entry(&self, k: usize) -> &CoeffEntry {
        assert!(
            k >= 1 && k <= self.m,
            "coefficient index k = {k} outside 1..={}",
            self.m
        );
        &self.entries[k - 1]
    }

    /// True when the linear system needed the rescaled fallback solve.
    pub fn degraded(&self) -> bool {
        self.degraded
    }

    /// Closed forms only; available exactly for m ≤ 3 where
    /// `{1, m−1, m}` covers every k.
    pub fn from_closed_forms(m: usize) -> Result<Self> {
        let mut entries = Vec::with_capacity(m);
        for k in 1..=m {
            match closed_form(m, k)? {
                Some(value) => entries.push(CoeffEntry {
                    value,
                    provenance: Provenance::ClosedForm,
                    uncertainty: 0.0,
                }),
                None => {
                    return Err(Error::Domain(format!(
                        "no closed form for C({m},{k}); use the linear-system route"
                    )))
                }
            }
        }
        let table = CoeffTable {
            m,
            entries,
            degraded: false,
        };
        table.check_brackets()?;
        Ok(table)
    }

    /// Solve the `m×m` system of weighted integrals.
    pub fn from_linear_system(m: usize, spec: &QuadSpec) -> Result<Self> {
        solve_linear_system(m, spec)
    }

    /// Monte Carlo estimate of every entry.
    pub fn from_monte_carlo(m: usize, samples: u64, seed: u64) -> Result<Self> {
        let mut entries = Vec::with_capacity(m);
        for k in 1..=m {
            let est = monte_carlo(m, k, samples, seed)?;
            entries.push(CoeffEntry {
                value: est.value,
                provenance: Provenance::MonteCarlo,
                uncertainty: est.std_error,
            });
        }
        // Monte Carlo noise may poke past the bracket; clip-check with
        // three standard errors of slack instead of failing hard.
        for (k, e) in entries.iter().enumerate() {
            let (lo, hi) = bounds(m, k + 1)?;
            if e.value < lo - 3.0 * e.uncertainty || e.value > hi + 3.0 * e.uncertainty {
                return Err(Error::CoeffBracket {
                    m,
                    k: k + 1,
                    value: e.value,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        Ok(CoeffTable {
            m,
            entries,
            degraded: false,
        })
    }

    fn check_brackets(&self) -> Result<()> {
        for k in 1..=self.m {
            let (lo, hi) = bounds(self.m, k)?;
            let v = self.entries[k - 1].value;
            // C(m,1) and C(m,m) sit exactly on the bracket boundary, so
            // allow a hair of floating-point slack.
            let slack = 1e-6 * hi.abs() + 1e-12;
            if v < lo - slack || v > hi + slack {
                return Err(Error::CoeffBracket {
                    m: self.m,
                    k,
                    value: v,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        Ok(())
    }

    /// CSV with columns `m,k,value,provenance,uncertainty`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,k,value,provenance,uncertainty\n");
        for (i, e) in self.entries.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                self.m,
                i + 1,
                e.value,
                e.provenance,
                e.uncertainty
            ));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows: Vec<(usize, usize, CoeffEntry)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("m,") {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 5 {
                return Err(Error::Parse(format!(
                    "line {}: expected 5 columns, got {}",
                    lineno + 1,
                    parts.len()
                )));
            }
            let bad = |what: &str| Error::Parse(format!("line {}: bad {what}", lineno + 1));
            rows.push((
                parts[0].parse().map_err(|_| bad("m"))?,
                parts[1].parse().map_err(|_| bad("k"))?,
                CoeffEntry {
                    value: parts[2].parse().map_err(|_| bad("value"))?,
                    provenance: parts[3].parse()?,
                    uncertainty: parts[4].parse().map_err(|_| bad("uncertainty"))?,
                },
            ));
        }
        if rows.is_empty() {
            return Err(Error::Parse("empty coefficient table".into()));
        }
        let m = rows[0].0;
        let mut entries: Vec<Option<CoeffEntry>> = vec![None; m];
        for (rm, k, e) in rows {
            if rm != m || k < 1 || k > m {
                return Err(Error::Parse(format!(
                    "inconsistent table row (m = {rm}, k = {k})"
                )));
            }
            entries[k - 1] = Some(e);
        }
        let entries: Vec<CoeffEntry> = entries
            .into_iter()
            .enumerate()
            .map(|(i, e)| e.ok_or_else(|| Error::Parse(format!("missing k = {}", i + 1))))
            .collect::<Result<_>>()?;
        Ok(CoeffTable {
            m,
            entries,
            degraded: false,
        })
    }
}

fn check_mk(m: usize, k: usize) -> Result<()> {
    if m < 1 || k < 1 || k > m {
        return Err(Error::Domain(format!(
            "coefficient C({m},{k}) requires 1 <= k <= m"
        )));
    }
    Ok(())
}

/// Closed form of `C(m,k)` for `k ∈ {1, m−1, m}`, `None` otherwise.
pub fn closed_form(m: usize, k: usize) -> Result<Option<f64>> {
    check_mk(m, k)?;
    let ratio = (specfun::ln_sphere_volume(m - 1) - specfun::ln_sphere_volume(m)).exp();
    let mf = m as f64;
    if k == 1 {
        return Ok(Some(2f64.powi(m as i32) * ratio));
    }
    if k == m {
        return Ok(Some((mf + 1.0) / 2f64.powi(m as i32 - 1) * ratio));
    }
    if k == m - 1 {
        let alpha = specfun::alpha_m(m);
        return Ok(Some(
            mf * (mf - 1.0) / 2f64.powi(m as i32 - 1) * (1.0 + alpha * alpha),
        ));
    }
    Ok(None)
}

/// Rigorous bracket `(lower, upper)` for `C(m,k)`: the sphere-volume
/// bracket, with the upper side tightened by the explicit elementary
/// bound `√(π/2)·(k+1)^{m−k+1}/2^k · k^{3/4} √binom(m,k)` for `k < m`
/// and `(m+1)√m/2^m` for `k = m`.
pub fn bounds(m: usize, k: usize) -> Result<(f64, f64)> {
    check_mk(m, k)?;
    let x = (specfun::ln_sphere_volume(k - 1) + specfun::ln_sphere_volume(m - k)
        - specfun::ln_sphere_volume(m))
    .exp();
    let kf = k as f64;
    let mf = m as f64;
    let two_k = 2f64.powi(k as i32);
    let lower = (kf + 1.0) / two_k * x;
    let bracket_upper = (kf + 1.0).powi((m - k + 1) as i32) / two_k * x;
    let explicit_upper = if k < m {
        (std::f64::consts::PI / 2.0).sqrt() * (kf + 1.0).powi((m - k + 1) as i32) / two_k
            * kf.powf(0.75)
            * specfun::binomial(m as u64, k as u64).sqrt()
    } else {
        (mf + 1.0) * mf.sqrt() / 2f64.powi(m as i32)
    };
    Ok((lower, bracket_upper.min(explicit_upper)))
}

/// `I(n,m,k) = 2^{n−1} binom(n, k+1) ∫_0^1 t^{m−k}(1−t²)^{km/2−1} λ_m^{n−k−1} dt`.
pub fn system_integral(n: u64, m: usize, k: usize, spec: &QuadSpec) -> Result<f64> {
    let r = quad::integrate_coverage_kernel(n, m, k, 0.0, 1.0, spec)?;
    if !r.converged {
        return Err(Error::Quadrature(format!(
            "I({n},{m},{k}) did not converge: estimate {} ± {}",
            r.value, r.error_estimate
        )));
    }
    Ok(2f64.powi(n as i32 - 1) * specfun::binomial(n, k as u64 + 1) * r.value)
}

/// Right-hand side of the normalization identity: `Σ_{k=0}^{m} binom(n−1, k)`.
///
/// The identity follows from the feasible condition-number distribution
/// at ε = 1 together with the hemisphere probability; its right-hand
/// side is the full Wendel sum.
pub(crate) fn system_rhs(n: u64, m: usize) -> f64 {
    (0..=m as u64).map(|k| specfun::binomial(n - 1, k)).sum()
}

/// Solve for `C(m, 1..=m)` from the rows `n = m+1 ..= 2m`.
///
/// The system is assembled and eliminated in exact rational arithmetic;
/// the values are rounded to f64 only at the end. This is necessary,
/// not a luxury: the system's conditioning grows so fast with `m` that
/// from `m = 8` on, double-precision quadrature cannot reach the 1e-6
/// agreement with the closed forms. For even `m` the cap fraction
/// `λ_m(t)` is a rational polynomial and everything is rational; for
/// odd `m` it is `(aθ + sin θ P(cos θ))/(aπ)` in the angle variable,
/// so the entries are rational polynomials in π, which are evaluated
/// with a 100-digit rational approximation of π (truncation ~1e-100,
/// far below anything conditioning can amplify into an f64).
pub fn solve_linear_system(m: usize, _spec: &QuadSpec) -> Result<CoeffTable> {
    if m < 1 {
        return Err(Error::Domain("dimension m must be >= 1".into()));
    }
    if m > LINEAR_SYSTEM_M_CAP {
        return Err(Error::Domain(format!(
            "linear-system route supports m <= {LINEAR_SYSTEM_M_CAP}, got {m}"
        )));
    }
    let values = if m % 2 == 0 {
        exact::solve_even(m)
    } else {
        exact::solve_odd(m)
    };
    let entries: Vec<CoeffEntry> = values
        .into_iter()
        .map(|value| CoeffEntry {
            value,
            provenance: Provenance::LinearSystem,
            uncertainty: f64::EPSILON * value.abs(),
        })
        .collect();
    let table = CoeffTable {
        m,
        entries,
        degraded: false,
    };
    table.check_brackets()?;
    Ok(table)
}

/// Numeric fallback solve of the same system, used as an independent
/// cross-check of the exact route in the test suites (and retaining the
/// conditioning diagnostics of a floating-point solve).
pub fn solve_linear_system_numeric(m: usize, spec: &QuadSpec) -> Result<CoeffTable> {
    if m < 1 {
        return Err(Error::Domain("dimension m must be >= 1".into()));
    }
    if m > LINEAR_SYSTEM_M_CAP {
        return Err(Error::Domain(format!(
            "linear-system route supports m <= {LINEAR_SYSTEM_M_CAP}, got {m}"
        )));
    }
    // Tightened beyond the caller's tolerance: the solution error is the
    // system's conditioning times the integral error.
    let spec = QuadSpec {
        rel_tol: spec.rel_tol.min(1e-13),
        abs_tol: spec.abs_tol.min(1e-18),
        ..*spec
    };
    let spec = &spec;
    let ns: Vec<u64> = ((m as u64 + 1)..=(2 * m as u64)).collect();
    // The integrals are independent; evaluate them in parallel.
    let rows: Vec<Vec<f64>> = ns
        .par_iter()
        .map(|&n| (1..=m).map(|k| system_integral(n, m, k, spec)).collect())
        .collect::<Result<_>>()?;
    let rhs: Vec<f64> = ns.iter().map(|&n| system_rhs(n, m)).collect();

    let a = Matrix::from_rows(&rows);
    let mut report = linalg::solve_with_report(&a, &rhs)?;
    let mut degraded = false;
    if report.condition_estimate > CONDITION_LIMIT {
        // Rescale each column to order one using the bracket midpoint,
        // solve again, and undo the scaling.
        degraded = true;
        let mids: Vec<f64> = (1..=m)
            .map(|k| bounds(m, k).map(|(lo, hi)| 0.5 * (lo + hi)))
            .collect::<Result<_>>()?;
        let mut scaled = Matrix::zeros(m);
        for i in 0..m {
            for j in 0..m {
                scaled.set(i, j, rows[i][j] * mids[j]);
            }
        }
        let scaled_report = linalg::solve_with_report(&scaled, &rhs)?;
        report.x = scaled_report
            .x
            .iter()
            .zip(&mids)
            .map(|(y, mid)| y * mid)
            .collect();
        report.relative_residual = {
            let ax = a.mul_vec(&report.x);
            ax.iter()
                .zip(&rhs)
                .map(|(l, r)| (l - r).abs() / r.abs().max(1.0))
                .fold(0.0, f64::max)
        };
        report.condition_estimate = scaled_report.condition_estimate;
    }
    if report.relative_residual > RESIDUAL_LIMIT {
        return Err(Error::Linalg(format!(
            "coefficient system residual {} exceeds {RESIDUAL_LIMIT}",
            report.relative_residual
        )));
    }

    let entries: Vec<CoeffEntry> = report
        .x
        .iter()
        .map(|&value| CoeffEntry {
            value,
            provenance: Provenance::LinearSystem,
            uncertainty: report.condition_estimate * f64::EPSILON * value.abs(),
        })
        .collect();
    let table = CoeffTable {
        m,
        entries,
        degraded,
    };
    table.check_brackets()?;
    Ok(table)
}

/// Barycentric test that the origin lies in the relative interior of
/// `conv{b_1..b_{k+1}}` with a full-dimensional affine hull: solve the
/// affine system for the weights and require a tiny residual and
/// strictly positive coordinates.
fn is_centered(points: &[Vec<f64>]) -> bool {
    let k = points[0].len();
    debug_assert_eq!(points.len(), k + 1);
    let mut sys = Matrix::zeros(k + 1);
    for (j, b) in points.iter().enumerate() {
        for (r, &coord) in b.iter().enumerate() {
            sys.set(r, j, coord);
        }
        sys.set(k, j, 1.0);
    }
    let mut rhs = vec![0.0; k + 1];
    rhs[k] = 1.0;
    let Ok(mu) = linalg::solve(&sys, &rhs) else {
        return false;
    };
    let residual = sys
        .mul_vec(&mu)
        .iter()
        .zip(&rhs)
        .map(|(l, r)| (l - r).abs())
        .fold(0.0, f64::max);
    residual < 1e-10 && mu.iter().all(|&w| w > 1e-12)
}

/// `vol_k` of the simplex spanned by `k+1` points in `R^k`, by the Gram
/// determinant of the edge vectors.
fn simplex_volume(points: &[Vec<f64>]) -> f64 {
    let k = points[0].len();
    let last = &points[k];
    let edges: Vec<Vec<f64>> = (0..k)
        .map(|i| points[i].iter().zip(last).map(|(a, b)| a - b).collect())
        .collect();
    let mut gram = Matrix::zeros(k);
    for i in 0..k {
        for j in 0..k {
            gram.set(i, j, linalg::dot(&edges[i], &edges[j]));
        }
    }
    let det = match linalg::Lu::factor(&gram) {
        Ok(lu) => lu.det().max(0.0),
        Err(_) => 0.0,
    };
    det.sqrt() / specfun::gamma(k as f64 + 1.0)
}

/// Monte Carlo estimate of `C(m,k)` from the defining simplex moment.
pub fn monte_carlo(m: usize, k: usize, samples: u64, seed: u64) -> Result<McEstimate> {
    check_mk(m, k)?;
    if samples == 0 {
        return Err(Error::Domain("samples must be >= 1".into()));
    }
    let ln_factor = (m - k + 1) as f64 * specfun::ln_gamma(k as f64 + 1.0)
        - k as f64 * specfun::ln_sphere_volume(m)
        + specfun::ln_grassmann_volume(k, m)?
        + (k + 1) as f64 * specfun::ln_sphere_volume(k - 1);
    let factor = ln_factor.exp();
    let power = (m - k + 1) as i32;

    let batches: Vec<(f64, f64, u64)> = (0..samples.div_ceil(crate::mc::BATCH_SIZE))
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b + 1);
            let lo = b * crate::mc::BATCH_SIZE;
            let hi = (lo + crate::mc::BATCH_SIZE).min(samples);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            let mut hits = 0u64;
            for _ in lo..hi {
                let pts: Vec<Vec<f64>> = (0..=k)
                    .map(|_| crate::geom::unit_vector(&mut rng, k))
                    .collect();
                if is_centered(&pts) {
                    hits += 1;
                    let v = simplex_volume(&pts).powi(power);
                    sum += v;
                    sum_sq += v * v;
                }
            }
            (sum, sum_sq, hits)
        })
        .collect();
    let (sum, sum_sq, hits) = batches
        .into_iter()
        .fold((0.0, 0.0, 0u64), |(a, b, c), (s, q, h)| {
            (a + s, b + q, c + h)
        });

    let mut est = McEstimate::from_moments(factor * sum, factor * factor * sum_sq, samples, seed);
    if hits == 0 {
        // No centered tuple seen: the estimate is 0 with infinite
        // relative error.
        est.std_error = f64::INFINITY;
        est.ci95 = (f64::NEG_INFINITY, f64::INFINITY);
    }
    Ok(est)
}

/// Exact rational evaluation of the coefficient system for even `m`.
mod exact {
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{One, Signed, ToPrimitive, Zero};

    /// Dense polynomial in `t`, coefficient of `t^i` at index `i`.
    type Poly = Vec<BigRational>;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn poly_mul(a: &Poly, b: &Poly) -> Poly {
        let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                out[i + j] += ai * bj;
            }
        }
        out
    }

    fn poly_eval(p: &Poly, t: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in p.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    /// `(1 − t²)^e` expanded.
    fn one_minus_t2_pow(e: usize) -> Poly {
        let mut out = vec![BigRational::zero(); 2 * e + 1];
        let mut binom = BigInt::one();
        for i in 0..=e {
            let sign = if i % 2 == 0 { 1 } else { -1 };
            out[2 * i] = BigRational::from(&binom * BigInt::from(sign));
            binom = &binom * BigInt::from((e - i) as i64) / BigInt::from((i + 1) as i64);
        }
        out
    }

    /// `S_j(t) = ∫_0^{arccos t} sin^j θ dθ` for odd `j`, a polynomial:
    /// `S_1 = 1 − t`, `S_j = (−t (1−t²)^{(j−1)/2} + (j−1) S_{j−2})/j`.
    fn sin_integral_poly(j: usize) -> Poly {
        assert!(j % 2 == 1);
        if j == 1 {
            return vec![BigRational::one(), -BigRational::one()];
        }
        let prev = sin_integral_poly(j - 2);
        let mut head = one_minus_t2_pow((j - 1) / 2);
        // Multiply by −t: shift up one degree and negate.
        head.insert(0, BigRational::zero());
        for c in head.iter_mut() {
            *c = -c.clone();
        }
        let jr = ratio(j as i64, 1);
        let jm1 = ratio(j as i64 - 1, 1);
        let mut out = vec![BigRational::zero(); head.len().max(prev.len())];
        for (i, c) in head.into_iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in prev.into_iter().enumerate() {
            out[i] += jm1.clone() * c;
        }
        for c in out.iter_mut() {
            *c = c.clone() / jr.clone();
        }
        out
    }

    /// `λ_m(t)` for even `m`: the sine integral normalized so that
    /// `λ_m(−1) = 1`.
    fn cap_poly_even(m: usize) -> Poly {
        assert!(m % 2 == 0);
        let p = sin_integral_poly(m - 1);
        let full = poly_eval(&p, &ratio(-1, 1));
        p.into_iter().map(|c| c / full.clone()).collect()
    }

    /// `∫_0^1 p(t) dt` exactly.
    fn poly_integral_01(p: &Poly) -> BigRational {
        let mut acc = BigRational::zero();
        for (i, c) in p.iter().enumerate() {
            acc += c / BigRational::from(BigInt::from(i as i64 + 1));
        }
        acc
    }

    fn binom_big(n: u64, k: u64) -> BigInt {
        let mut acc = BigInt::one();
        let k = k.min(n - k);
        for i in 1..=k {
            acc = acc * BigInt::from(n - k + i) / BigInt::from(i);
        }
        acc
    }

    /// π as an exact rational to better than 10^-48, by Machin's
    /// formula `π = 16 arctan(1/5) − 4 arctan(1/239)`. The truncation
    /// is reduced to a single fraction with a 10^50 denominator so the
    /// rationals flowing through the elimination stay small; 48 digits
    /// leave ~30 orders of headroom over what the worst conditioning
    /// (≈1e16 at m = 12) can amplify into an f64.
    fn pi_rational() -> &'static BigRational {
        use std::sync::OnceLock;
        static PI_RAT: OnceLock<BigRational> = OnceLock::new();
        PI_RAT.get_or_init(|| {
            let arctan_inv = |q: i64| {
                let q = BigInt::from(q);
                let q2 = &q * &q;
                let mut power = q.clone(); // q^(2j+1)
                let mut sum = BigRational::zero();
                let mut j = 0i64;
                loop {
                    let term = BigRational::new(
                        BigInt::from(if j % 2 == 0 { 1 } else { -1 }),
                        &power * BigInt::from(2 * j + 1),
                    );
                    if term.abs() < BigRational::new(BigInt::one(), BigInt::from(10u8).pow(55)) {
                        break;
                    }
                    sum += term;
                    power *= &q2;
                    j += 1;
                }
                sum
            };
            let machin = arctan_inv(5) * BigRational::from(BigInt::from(16))
                - arctan_inv(239) * BigRational::from(BigInt::from(4));
            // Round to a fixed 10^50 denominator.
            let scale = BigInt::from(10u8).pow(50);
            let scaled = (machin * BigRational::from(scale.clone())).round();
            BigRational::new(scaled.to_integer(), scale)
        })
    }

    /// A polynomial in π: coefficient of π^i at index i.
    type PiPoly = Vec<BigRational>;

    fn pipoly_add_scaled(acc: &mut PiPoly, p: &PiPoly, scale: &BigRational) {
        if acc.len() < p.len() {
            acc.resize(p.len(), BigRational::zero());
        }
        for (a, c) in acc.iter_mut().zip(p) {
            *a += scale * c;
        }
    }

    /// `∫_0^{π/2} θ^j sin^a θ cos^b θ dθ` for `a ∈ {0, 1}`, exact as a
    /// polynomial in π. Reductions:
    /// `M(0,1,b) = 1/(b+1)`;
    /// `M(j,1,b) = j/(b+1) · M(j−1, 0, b+1)` for `j ≥ 1`;
    /// `M(j,0,0) = (π/2)^{j+1}/(j+1)`;
    /// `M(j,0,b) = ((π/2)^j [b=1] − j·M(j−1,1,b−1))/b + (b−1)/b · M(j,0,b−2)`.
    fn moment(
        j: usize,
        a: usize,
        b: usize,
        memo: &mut std::collections::HashMap<(usize, usize, usize), PiPoly>,
    ) -> PiPoly {
        if let Some(p) = memo.get(&(j, a, b)) {
            return p.clone();
        }
        let half_pow = |p: usize| -> BigRational {
            BigRational::new(BigInt::one(), BigInt::from(2u8).pow(p as u32))
        };
        let result: PiPoly = if a == 1 {
            if j == 0 {
                vec![ratio(1, b as i64 + 1)]
            } else {
                let inner = moment(j - 1, 0, b + 1, memo);
                let scale = ratio(j as i64, b as i64 + 1);
                inner.iter().map(|c| c * &scale).collect()
            }
        } else if b == 0 {
            // (π/2)^{j+1}/(j+1): a single π^{j+1} term.
            let mut p = vec![BigRational::zero(); j + 2];
            p[j + 1] = half_pow(j + 1) / BigRational::from(BigInt::from(j as i64 + 1));
            p
        } else {
            let mut acc: PiPoly = Vec::new();
            if b == 1 {
                let mut boundary = vec![BigRational::zero(); j + 1];
                boundary[j] = half_pow(j);
                pipoly_add_scaled(&mut acc, &boundary, &ratio(1, 1));
            }
            if j >= 1 {
                let inner = moment(j - 1, 1, b - 1, memo);
                pipoly_add_scaled(&mut acc, &inner, &ratio(-(j as i64), 1));
            }
            for c in acc.iter_mut() {
                *c = c.clone() / BigRational::from(BigInt::from(b as i64));
            }
            if b >= 2 {
                let tail = moment(j, 0, b - 2, memo);
                pipoly_add_scaled(&mut acc, &tail, &ratio(b as i64 - 1, b as i64));
            }
            acc
        };
        memo.insert((j, a, b), result.clone());
        result
    }

    /// `S_j(θ) = ∫_0^θ sin^j u du` for even `j`, in the form
    /// `a·θ + sin θ · P(cos θ)`: returns `(a, P)`.
    fn sin_integral_theta(j: usize) -> (BigRational, Poly) {
        assert!(j % 2 == 0);
        if j == 0 {
            return (BigRational::one(), Vec::new());
        }
        let (a_prev, p_prev) = sin_integral_theta(j - 2);
        // S_j = (−cos θ sin^{j−1}θ + (j−1) S_{j−2})/j and
        // sin^{j−1} = sin · (1−cos²)^{(j−2)/2}.
        let jr = ratio(j as i64, 1);
        let a = a_prev * ratio(j as i64 - 1, 1) / jr.clone();
        let mut head = one_minus_t2_pow((j - 2) / 2);
        head.insert(0, BigRational::zero()); // × c
        let mut p = vec![BigRational::zero(); head.len().max(p_prev.len())];
        for (i, c) in head.into_iter().enumerate() {
            p[i] -= c;
        }
        for (i, c) in p_prev.into_iter().enumerate() {
            p[i] += ratio(j as i64 - 1, 1) * c;
        }
        for c in p.iter_mut() {
            *c = c.clone() / jr.clone();
        }
        (a, p)
    }

    /// Exact solve for odd `m`. In the angle variable the unnormalized
    /// cap integral is `T(θ) = aθ + sin θ P(cos θ)` with
    /// `λ_m(cos θ) = T(θ)/(aπ)`, and
    /// `J(n,m,k) = ∫_0^{π/2} cos^{m−k}θ sin^{km−1}θ λ^{n−k−1} dθ`.
    /// Expanding `T^pow` binomially leaves sums of `θ^j sin^a cos^b`
    /// moments, each an exact polynomial in π.
    pub(super) fn solve_odd(m: usize) -> Vec<f64> {
        let (a, p_poly) = sin_integral_theta(m - 1);
        let max_pow = m - 1; // n−k−1 ≤ 2m − 1 − 1 − ... = m − 2 + m − ...
        let max_pow = (2 * m - 2).max(max_pow);
        // P(c)^i for i = 0..=max_pow.
        let mut p_powers: Vec<Poly> = vec![vec![BigRational::one()]];
        for i in 1..=max_pow {
            p_powers.push(poly_mul(&p_powers[i - 1], &p_poly));
        }
        let mut memo = std::collections::HashMap::new();
        let pi = pi_rational();

        let ns: Vec<u64> = ((m as u64 + 1)..=(2 * m as u64)).collect();
        let mut matrix: Vec<Vec<BigRational>> = Vec::with_capacity(m);
        let mut rhs: Vec<BigRational> = Vec::with_capacity(m);
        for &n in &ns {
            let mut row = vec![BigRational::zero(); m];
            for k in 1..=m {
                let pow = (n - k as u64 - 1) as usize;
                // Σ_i binom(pow,i) a^{pow−i} θ^{pow−i} sin^{km−1+i} cos^{m−k} P(c)^i
                let mut entry: PiPoly = Vec::new();
                let mut a_power = {
                    // a^{pow−i} built downward from a^pow.
                    let mut v = BigRational::one();
                    for _ in 0..pow {
                        v *= a.clone();
                    }
                    v
                };
                let mut binom_pi = BigRational::one(); // binom(pow, i)
                for i in 0..=pow {
                    let s_total = k * m - 1 + i;
                    let s_par = s_total % 2;
                    // cos-polynomial: c^{m−k} (1−c²)^{s_total/2} P(c)^i
                    let mut cpoly = poly_mul(&one_minus_t2_pow(s_total / 2), &p_powers[i]);
                    let mut shifted = vec![BigRational::zero(); m - k];
                    shifted.append(&mut cpoly);
                    let scale = &binom_pi * &a_power;
                    if !scale.is_zero() {
                        for (b, coeff) in shifted.iter().enumerate() {
                            if coeff.is_zero() {
                                continue;
                            }
                            let mom = moment(pow - i, s_par, b, &mut memo);
                            pipoly_add_scaled(&mut entry, &mom, &(&scale * coeff));
                        }
                    }
                    // Update binom(pow, i+1) and a^{pow−i−1}.
                    if i < pow {
                        binom_pi = binom_pi * ratio((pow - i) as i64, i as i64 + 1);
                        a_power = a_power / a.clone();
                    }
                }
                // Evaluate at rational π, divide by (aπ)^pow, apply the
                // combinatorial weight.
                let mut value = BigRational::zero();
                for c in entry.iter().rev() {
                    value = value * pi + c;
                }
                let mut denom = BigRational::one();
                for _ in 0..pow {
                    denom *= a.clone() * pi.clone();
                }
                let weight = BigRational::from(
                    BigInt::from(2).pow(n as u32 - 1) * binom_big(n, k as u64 + 1),
                );
                row[k - 1] = weight * value / denom;
            }
            matrix.push(row);
            let mut b = BigInt::zero();
            for k in 0..=m as u64 {
                b += binom_big(n - 1, k.min(n - 1));
            }
            rhs.push(BigRational::from(b));
        }
        gauss_exact(matrix, rhs)
    }

    /// Exact Gaussian elimination; pivot by approximate magnitude to
    /// keep the fraction sizes in check.
    fn gauss_exact(mut matrix: Vec<Vec<BigRational>>, mut x: Vec<BigRational>) -> Vec<f64> {
        let m = x.len();
        for col in 0..m {
            let pivot = (col..m)
                .max_by(|&a, &b| {
                    let fa = matrix[a][col].to_f64().unwrap_or(0.0).abs();
                    let fb = matrix[b][col].to_f64().unwrap_or(0.0).abs();
                    fa.total_cmp(&fb)
                })
                .unwrap();
            assert!(
                !matrix[pivot][col].is_zero(),
                "exact coefficient system is singular"
            );
            matrix.swap(col, pivot);
            x.swap(col, pivot);
            for r in col + 1..m {
                if matrix[r][col].is_zero() {
                    continue;
                }
                let f = matrix[r][col].clone() / matrix[col][col].clone();
                for c in col..m {
                    let v = matrix[r][c].clone() - f.clone() * matrix[col][c].clone();
                    matrix[r][c] = v;
                }
                let v = x[r].clone() - f * x[col].clone();
                x[r] = v;
            }
        }
        for col in (0..m).rev() {
            for r in col + 1..m {
                let v = x[col].clone() - matrix[col][r].clone() * x[r].clone();
                x[col] = v;
            }
            x[col] = x[col].clone() / matrix[col][col].clone();
        }
        x.iter()
            .map(|v| v.to_f64().expect("coefficient fits in f64"))
            .collect()
    }

    /// Exact solve of the coefficient system for even `m`, rounded to
    /// f64 only at the very end.
    pub(super) fn solve_even(m: usize) -> Vec<f64> {
        let lam = cap_poly_even(m);
        let ns: Vec<u64> = ((m as u64 + 1)..=(2 * m as u64)).collect();
        let mut matrix: Vec<Vec<BigRational>> = Vec::with_capacity(m);
        let mut rhs: Vec<BigRational> = Vec::with_capacity(m);
        for &n in &ns {
            // λ^(n−k−1) for k = m down to 1, built incrementally.
            let mut lam_pow = {
                let mut acc = vec![BigRational::one()];
                for _ in 0..(n - m as u64 - 1) {
                    acc = poly_mul(&acc, &lam);
                }
                acc
            };
            let mut row = vec![BigRational::zero(); m];
            for k in (1..=m).rev() {
                // Integrand t^{m−k} (1−t²)^{km/2−1} λ^{n−k−1}.
                let mut poly = poly_mul(&lam_pow, &one_minus_t2_pow(k * m / 2 - 1));
                let mut shifted = vec![BigRational::zero(); m - k];
                shifted.append(&mut poly);
                let integral = poly_integral_01(&shifted);
                let weight = BigRational::from(
                    BigInt::from(2).pow(n as u32 - 1) * binom_big(n, k as u64 + 1),
                );
                row[k - 1] = weight * integral;
                if k > 1 {
                    lam_pow = poly_mul(&lam_pow, &lam);
                }
            }
            matrix.push(row);
            let mut b = BigInt::zero();
            for k in 0..=m as u64 {
                b += binom_big(n - 1, k.min(n - 1));
            }
            rhs.push(BigRational::from(b));
        }

        gauss_exact(matrix, rhs)
    }

}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn closed_forms_match_known_values() {
        assert!(rel(closed_form(1, 1).unwrap().unwrap(), 2.0 / PI) < 1e-12);
        assert!(rel(closed_form(2, 1).unwrap().unwrap(), 2.0) < 1e-12);
        assert!(rel(closed_form(2, 2).unwrap().unwrap(), 0.75) < 1e-12);
        assert!(rel(closed_form(4, 4).unwrap().unwrap(), 15.0 / 32.0) < 1e-12);
        // C(3,2) = (3·2/4)(1 + 16/π²)
        let c32 = 1.5 * (1.0 + 16.0 / (PI * PI));
        assert!(rel(closed_form(3, 2).unwrap().unwrap(), c32) < 1e-12);
        assert!((c32 - 3.9317).abs() < 1e-4);
        assert!(closed_form(4, 2).unwrap().is_none());
        assert!(closed_form(4, 5).is_err());
    }

    #[test]
    fn bounds_examples() {
        // k = m: bracket collapses to the exact value.
        let (lo, hi) = bounds(5, 5).unwrap();
        assert!(rel(lo, hi) < 1e-12);
        assert!((lo - 1.0 / PI).abs() < 1e-4);
        // (m,k) = (2,1): [1, 2], and the true value 2 attains the upper end.
        let (lo, hi) = bounds(2, 1).unwrap();
        assert!(rel(lo, 1.0) < 1e-12);
        assert!(rel(hi, 2.0) < 1e-12);
        // (m,k) = (6,6): explicit bound 7√6/64 dominates the exact 105/512.
        let (_, hi) = bounds(6, 6).unwrap();
        assert!(rel(hi, 105.0 / 512.0) < 1e-12 || hi >= 105.0 / 512.0);
        assert!(hi <= 7.0 * 6f64.sqrt() / 64.0 + 1e-12);
    }

    #[test]
    fn closed_forms_lie_in_bounds() {
        for m in 1..=10 {
            for k in 1..=m {
                if let Some(v) = closed_form(m, k).unwrap() {
                    let (lo, hi) = bounds(m, k).unwrap();
                    assert!(
                        v >= lo * (1.0 - 1e-12) && v <= hi * (1.0 + 1e-12),
                        "C({m},{k}) = {v} outside [{lo}, {hi}]"
                    );
                }
            }
        }
    }

    #[test]
    fn system_integral_examples() {
        let spec = QuadSpec::default();
        assert!(rel(system_integral(2, 1, 1, &spec).unwrap(), PI) < 1e-10);
        assert!(rel(system_integral(3, 2, 2, &spec).unwrap(), 8.0 / 3.0) < 1e-10);
    }

    #[test]
    fn normalization_identity_small() {
        // Σ_k I(n,m,k) C(m,k) = Σ_{k=0}^m binom(n−1,k); for (n,m) = (3,2)
        // both sides equal 4.
        let spec = QuadSpec::default();
        let lhs = system_integral(3, 2, 1, &spec).unwrap() * 2.0
            + system_integral(3, 2, 2, &spec).unwrap() * 0.75;
        assert!(rel(lhs, 4.0) < 1e-10, "lhs = {lhs}");
        assert_eq!(system_rhs(3, 2), 4.0);
    }

    #[test]
    fn linear_system_m1_and_m4() {
        let spec = QuadSpec::default();
        let t1 = solve_linear_system(1, &spec).unwrap();
        assert!(rel(t1.get(1), 2.0 / PI) < 1e-9);

        let t4 = solve_linear_system(4, &spec).unwrap();
        let expect = [12.0, 477.0 / 32.0, 39.0 / 8.0, 15.0 / 32.0];
        for (k, e) in expect.iter().enumerate() {
            assert!(
                rel(t4.get(k + 1), *e) < 1e-6,
                "C(4,{}) = {} vs {e}",
                k + 1,
                t4.get(k + 1)
            );
        }
        assert!(!t4.degraded());
    }

    #[test]
    fn linear_system_m5_decimals() {
        // Published decimals for the m = 5 column. Note 27.1639 is a
        // slight misrounding of C(5,1) = 256/(3π) = 27.16244 (the closed
        // form and the system agree to 5e-11), hence the relative 1e-3.
        let spec = QuadSpec::default();
        let t5 = solve_linear_system(5, &spec).unwrap();
        let expect = [27.1639, 49.5841, 25.1644, 4.8525, 0.3183];
        for (k, e) in expect.iter().enumerate() {
            assert!(
                rel(t5.get(k + 1), *e) < 1e-3,
                "C(5,{}) = {} vs {e}",
                k + 1,
                t5.get(k + 1)
            );
        }
        assert!(rel(t5.get(1), 256.0 / (3.0 * PI)) < 1e-9);
    }

    #[test]
    fn monte_carlo_small_cases() {
        // C(2,2) = 3/4 and C(3,1) = 16/π; modest sample counts keep the
        // unit suite fast, the acceptance suite runs the full million.
        let est = monte_carlo(2, 2, 60_000, 7).unwrap();
        assert!(
            (est.value - 0.75).abs() <= 3.5 * est.std_error,
            "{} ± {}",
            est.value,
            est.std_error
        );
        let est = monte_carlo(3, 1, 60_000, 11).unwrap();
        assert!(
            (est.value - 16.0 / PI).abs() <= 3.5 * est.std_error,
            "{} ± {}",
            est.value,
            est.std_error
        );
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let a = monte_carlo(2, 1, 10_000, 3).unwrap();
        let b = monte_carlo(2, 1, 10_000, 3).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.std_error, b.std_error);
    }

    #[test]
    fn csv_round_trip() {
        let spec = QuadSpec::default();
        let t = solve_linear_system(3, &spec).unwrap();
        let csv = t.to_csv();
        let back = CoeffTable::from_csv(&csv).unwrap();
        assert_eq!(t.m(), back.m());
        for k in 1..=3 {
            assert_eq!(t.get(k), back.get(k));
            assert_eq!(t.entry(k).provenance, back.entry(k).provenance);
        }
        assert!(CoeffTable::from_csv("garbage").is_err());
    }

    #[test]
    fn centered_test_matches_geometry() {
        // On S^0 the only centered pairs are {−1, +1}.
        assert!(is_centered(&[vec![1.0], vec![-1.0]]));
        assert!(!is_centered(&[vec![1.0], vec![1.0]]));
        // Equilateral triangle contains the origin; a squashed one does not.
        let tri: Vec<Vec<f64>> = (0..3)
            .map(|j| {
                let a = 2.0 * PI * j as f64 / 3.0;
                vec![a.cos(), a.sin()]
            })
            .collect();
        assert!(is_centered(&tri));
        let squashed: Vec<Vec<f64>> = (0..3)
            .map(|j| {
                let a = 0.3 * j as f64;
                vec![a.cos(), a.sin()]
            })
            .collect();
        assert!(!is_centered(&squashed));
    }

    #[test]
    fn simplex_volume_known() {
        // Segment [−1, 1] has length 2; right triangle legs 1 has area 1/2.
        assert!((simplex_volume(&[vec![1.0], vec![-1.0]]) - 2.0).abs() < 1e-12);
        let tri = [vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let mut pts = tri.to_vec();
        pts.rotate_left(1);
        assert!((simplex_volume(&pts) - 0.5).abs() < 1e-12);
    }
}

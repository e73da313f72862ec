//! Adaptive one-dimensional quadrature tuned for the coverage and
//! condition-number integrands, including their endpoint singularity.
//!
//! The integrator is a globally adaptive 7/15 Gauss–Kronrod scheme: the
//! interval with the largest error estimate is bisected until the summed
//! error meets the tolerance. The only singular integrand family in this
//! crate is `(1−t²)^е` with `e ∈ (−1, 0)` at `t = 1` (it occurs for
//! `k = m = 1` in the coverage kernel and for `m = 1` in the infeasible
//! kernel); the change of variables `t = cos θ` turns those into bounded
//! integrands and is applied automatically when
//! [`QuadSpec::substitute_endpoint`] is set.

use std::collections::BinaryHeap;

use crate::linalg::KahanSum;
use crate::specfun;
use crate::{Error, Result};

/// Quadrature controls.
#[derive(Debug, Clone, Copy)]
pub struct QuadSpec {
    /// Relative tolerance on the integral value.
    pub rel_tol: f64,
    /// Absolute error floor, for integrals that are themselves tiny.
    pub abs_tol: f64,
    /// Maximum bisection depth of any subinterval.
    pub max_depth: u32,
    /// Apply the `t = cos θ` substitution to singular kernels.
    pub substitute_endpoint: bool,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            rel_tol: 1e-12,
            abs_tol: 1e-15,
            max_depth: 60,
            substitute_endpoint: true,
        }
    }
}

impl QuadSpec {
    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || self.abs_tol < 0.0 || self.max_depth < 1 {
            return Err(Error::Domain(format!(
                "invalid quadrature spec: rel_tol = {}, abs_tol = {}, max_depth = {}",
                self.rel_tol, self.abs_tol, self.max_depth
            )));
        }
        Ok(())
    }
}

/// Outcome of one integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: u64,
    /// True when `error_estimate ≤ max(rel_tol·|value|, abs_tol)`.
    pub converged: bool,
}

// 15-point Kronrod abscissae (positive half); odd indices are the
// embedded 7-point Gauss abscissae. Values from QUADPACK dqk15.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error && self.a == other.a
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Largest error first; ties broken toward the left endpoint so the
        // whole run is deterministic.
        self.error
            .total_cmp(&other.error)
            .then(other.a.total_cmp(&self.a))
    }
}

/// Evaluate `f` at `x`; if the value is not finite (an endpoint node
/// that rounded onto an integrable singularity), retry a few ulps toward
/// the panel center before giving up.
fn eval_finite<F: Fn(f64) -> f64>(f: &F, x: f64, toward: f64) -> Result<f64> {
    let mut v = f(x);
    if v.is_finite() {
        return Ok(v);
    }
    let mut xx = x;
    for _ in 0..4 {
        xx = if toward > xx {
            xx.next_up()
        } else {
            xx.next_down()
        };
        v = f(xx);
        if v.is_finite() {
            return Ok(v);
        }
    }
    Err(Error::Quadrature(format!(
        "integrand not finite near x = {x} (value {v})"
    )))
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, depth: u32) -> Result<Segment> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut fv = [0.0f64; 15];
    for (i, &x) in XGK.iter().enumerate() {
        let lo = center - half * x;
        let hi = center + half * x;
        let flo = eval_finite(f, lo, center)?;
        let fhi = if i == 7 {
            flo
        } else {
            eval_finite(f, hi, center)?
        };
        fv[i] = flo;
        fv[14 - i] = fhi;
    }
    let mut resk = WGK[7] * fv[7];
    let mut resg = WG[3] * fv[7];
    let mut resabs = resk.abs();
    for j in 0..7 {
        let sum = fv[j] + fv[14 - j];
        resk += WGK[j] * sum;
        resabs += WGK[j] * (fv[j].abs() + fv[14 - j].abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * sum;
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[7] * (fv[7] - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }
    let value = resk * half;
    resabs *= half.abs();
    resasc *= half.abs();
    // QUADPACK-style error rescaling.
    let mut error = ((resk - resg) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * 1.0f64.min((200.0 * error / resasc).powf(1.5));
    }
    let tiny = f64::MIN_POSITIVE / (50.0 * f64::EPSILON);
    if resabs > tiny {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Ok(Segment {
        a,
        b,
        value,
        error,
        depth,
    })
}

/// Integrate `f` over `[a, b]`.
///
/// Non-convergence within the subdivision budget is not an error: the
/// best estimate is returned with `converged = false`. A NaN from the
/// integrand aborts with a diagnostic.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadSpec) -> Result<QuadResult> {
    spec.validate()?;
    if !(a <= b) {
        return Err(Error::Domain(format!(
            "integration bounds must satisfy a <= b, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
            converged: true,
        });
    }

    const MAX_SEGMENTS: usize = 100_000;

    let mut evaluations = 0u64;
    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Segment> = Vec::new();
    heap.push(gauss_kronrod(&f, a, b, 0)?);
    evaluations += 15;
    let mut heap_value = heap.peek().unwrap().value;
    let mut heap_error = heap.peek().unwrap().error;
    let mut frozen_value = 0.0;
    let mut frozen_error = 0.0;

    let tolerance = |value: f64| -> f64 { spec.abs_tol.max(spec.rel_tol * value.abs()) };

    loop {
        let total_error = heap_error + frozen_error;
        let total_value = heap_value + frozen_value;
        if total_error <= tolerance(total_value) {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        heap_value -= worst.value;
        heap_error -= worst.error;
        if worst.depth >= spec.max_depth || heap.len() + frozen.len() >= MAX_SEGMENTS {
            frozen_value += worst.value;
            frozen_error += worst.error;
            frozen.push(worst);
            continue;
        }
        let mid = 0.5 * (worst.a + worst.b);
        for child in [
            gauss_kronrod(&f, worst.a, mid, worst.depth + 1)?,
            gauss_kronrod(&f, mid, worst.b, worst.depth + 1)?,
        ] {
            evaluations += 15;
            heap_value += child.value;
            heap_error += child.error;
            heap.push(child);
        }
    }

    // Deterministic final summation in endpoint order.
    let mut segments: Vec<Segment> = frozen;
    segments.extend(heap.into_iter());
    segments.sort_by(|s, t| s.a.total_cmp(&t.a));
    let mut value = KahanSum::default();
    let mut error = KahanSum::default();
    for s in &segments {
        value.add(s.value);
        error.add(s.error);
    }
    let value = value.value();
    let error = error.value();
    Ok(QuadResult {
        value,
        error_estimate: error,
        evaluations,
        converged: error <= tolerance(value),
    })
}

/// `x^p` for a nonnegative integer power expressed as `exp(p ln x)`,
/// with the conventions `x^0 = 1` and `0^p = 0` for `p > 0`.
#[inline]
fn ln_pow(ln_x: f64, p: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else {
        (p * ln_x).exp()
    }
}

/// `∫_lo^hi t^{m−k} (1−t²)^{km/2−1} λ_m(t)^{n−k−1} dt`.
///
/// This is the weight function shared by the exact non-coverage
/// probability and the feasible condition-number distribution. When
/// `km/2 − 1 < 0` (exactly the case `k = m = 1`) and substitution is
/// enabled, the integral is evaluated as
/// `∫ cos^{m−k}θ sin^{km−1}θ λ_m(cos θ)^{n−k−1} dθ`, which is bounded.
pub fn integrate_coverage_kernel(
    n: u64,
    m: usize,
    k: usize,
    lo: f64,
    hi: f64,
    spec: &QuadSpec,
) -> Result<QuadResult> {
    if k < 1 || k > m || (n as usize) <= m {
        return Err(Error::Domain(format!(
            "coverage kernel requires 1 <= k <= m < n, got n = {n}, m = {m}, k = {k}"
        )));
    }
    if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
        return Err(Error::Domain(format!(
            "coverage kernel bounds must satisfy 0 <= lo <= hi <= 1, got [{lo}, {hi}]"
        )));
    }
    let power = (n - k as u64 - 1) as f64;
    let t_exp = (m - k) as i32;
    let sin_exp = (k * m) as f64 / 2.0 - 1.0;
    // Substitute when the (1−t²) power is singular, and also when it is
    // a half-integer: t^a(1−t²)^{j+1/2} is not analytic at t = 1, which
    // stalls the quadrature's convergence, while the transformed
    // integrand is an entire function of θ.
    if spec.substitute_endpoint && (sin_exp < 0.0 || sin_exp.fract() != 0.0) {
        // θ runs from arccos(hi) down at the t = hi end.
        let theta_lo = hi.min(1.0).acos();
        let theta_hi = lo.min(1.0).acos();
        let f = move |theta: f64| {
            let (s, c) = theta.sin_cos();
            let lam = specfun::cap_fraction(m, c.clamp(-1.0, 1.0)).unwrap_or(f64::NAN);
            c.powi(t_exp) * s.powf(2.0 * sin_exp + 1.0) * ln_pow(lam.ln(), power)
        };
        integrate(f, theta_lo, theta_hi, spec)
    } else {
        let f = move |t: f64| {
            let x = (1.0 - t) * (1.0 + t);
            let lam = specfun::cap_fraction(m, t).unwrap_or(f64::NAN);
            t.powi(t_exp) * x.powf(sin_exp) * ln_pow(lam.ln(), power)
        };
        integrate(f, lo, hi, spec)
    }
}

/// `∫_lo^hi (1−t²)^{(m²−2)/2} (1−λ_m(t))^{n−m−1} dt`.
///
/// Weight function of the infeasible-case bound. Singular at `t = 1`
/// only for `m = 1`; the same cosine substitution bounds it.
pub fn integrate_infeasible_kernel(
    n: u64,
    m: usize,
    lo: f64,
    hi: f64,
    spec: &QuadSpec,
) -> Result<QuadResult> {
    if m < 1 || (n as usize) <= m {
        return Err(Error::Domain(format!(
            "infeasible kernel requires 1 <= m < n, got n = {n}, m = {m}"
        )));
    }
    if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
        return Err(Error::Domain(format!(
            "infeasible kernel bounds must satisfy 0 <= lo <= hi <= 1, got [{lo}, {hi}]"
        )));
    }
    let power = (n - m as u64 - 1) as f64;
    let sin_exp = ((m * m) as f64 - 2.0) / 2.0;
    if spec.substitute_endpoint && (sin_exp < 0.0 || sin_exp.fract() != 0.0) {
        let theta_lo = hi.min(1.0).acos();
        let theta_hi = lo.min(1.0).acos();
        let f = move |theta: f64| {
            let (s, c) = theta.sin_cos();
            let comp = specfun::cap_fraction_complement(m, c.clamp(-1.0, 1.0))
                .unwrap_or(f64::NAN);
            s.powf(2.0 * sin_exp + 1.0) * ln_pow(comp.ln(), power)
        };
        integrate(f, theta_lo, theta_hi, spec)
    } else {
        let f = move |t: f64| {
            let x = (1.0 - t) * (1.0 + t);
            let comp = specfun::cap_fraction_complement(m, t).unwrap_or(f64::NAN);
            x.powf(sin_exp) * ln_pow(comp.ln(), power)
        };
        integrate(f, lo, hi, spec)
    }
}

/// `λ_m(t)` by direct quadrature of its defining integral
/// `(O_{m−1}/O_m) ∫_0^{arccos t} sin^{m−1}θ dθ`.
///
/// Independent oracle for [`specfun::cap_fraction`]; the production code
/// never calls this.
pub fn cap_fraction_via_quadrature(m: usize, t: f64, spec: &QuadSpec) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain("cap_fraction requires m >= 1".into()));
    }
    if !(-1.0..=1.0).contains(&t) || t.is_nan() {
        return Err(Error::Domain(format!("cap cosine t = {t} outside [-1, 1]")));
    }
    if t < 0.0 {
        return Ok(1.0 - cap_fraction_via_quadrature(m, -t, spec)?);
    }
    let ratio = (specfun::ln_sphere_volume(m - 1) - specfun::ln_sphere_volume(m)).exp();
    let e = (m - 1) as i32;
    let r = integrate(|theta| theta.sin().powi(e), 0.0, t.acos(), spec)?;
    Ok(ratio * r.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_function() {
        let r = integrate(|_| 1.0, 0.0, 1.0, &QuadSpec::default()).unwrap();
        assert!(r.converged);
        assert!((r.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn arcsine_singularity() {
        // ∫_0^1 (1−t²)^{−1/2} dt = π/2, integrable endpoint singularity.
        // The raw (unsubstituted) path converges slowly, so the flag may
        // report non-convergence at the default tolerance; the value must
        // still be accurate.
        let r = integrate(
            |t| 1.0 / ((1.0 - t) * (1.0 + t)).sqrt(),
            0.0,
            1.0,
            &QuadSpec::default(),
        )
        .unwrap();
        assert!((r.value - PI / 2.0).abs() < 1e-8, "got {}", r.value);
        assert!(r.error_estimate < 1e-7);
    }

    #[test]
    fn cap_power_polynomial() {
        // ∫_0^1 λ_2(t)³ dt = (1/8)∫_0^1 (1−t)³ dt = 1/32.
        let r = integrate(
            |t| ((1.0 - t) / 2.0).powi(3),
            0.0,
            1.0,
            &QuadSpec::default(),
        )
        .unwrap();
        assert!(r.converged);
        assert!((r.value - 1.0 / 32.0).abs() < 1e-14);
    }

    #[test]
    fn additivity() {
        let spec = QuadSpec::default();
        let f = |t: f64| (3.0 * t).sin() * (-t).exp();
        let whole = integrate(f, 0.0, 2.0, &spec).unwrap().value;
        let left = integrate(f, 0.0, 0.7, &spec).unwrap().value;
        let right = integrate(f, 0.7, 2.0, &spec).unwrap().value;
        assert!((left + right - whole).abs() <= 2.0 * spec.rel_tol * whole.abs().max(1.0));
    }

    #[test]
    fn nan_is_diagnosed() {
        let err = integrate(|t| (t - 0.5).ln(), 0.0, 1.0, &QuadSpec::default());
        assert!(matches!(err, Err(Error::Quadrature(_))));
    }

    #[test]
    fn nonconvergence_is_flagged_not_fatal() {
        let spec = QuadSpec {
            max_depth: 2,
            rel_tol: 1e-14,
            ..QuadSpec::default()
        };
        let r = integrate(
            |t| 1.0 / ((1.0 - t) * (1.0 + t)).sqrt(),
            0.0,
            1.0,
            &spec,
        )
        .unwrap();
        assert!(!r.converged);
        assert!((r.value - PI / 2.0).abs() < 0.1);
    }

    #[test]
    fn empty_interval() {
        let r = integrate_coverage_kernel(3, 2, 1, 1.0, 1.0, &QuadSpec::default()).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.converged);
    }

    #[test]
    fn kernel_singular_case_reduces_to_arcsine() {
        // n=2, m=1, k=1: λ-exponent 0, so the kernel is ∫_0^1 (1−t²)^{−1/2} = π/2.
        let r = integrate_coverage_kernel(2, 1, 1, 0.0, 1.0, &QuadSpec::default()).unwrap();
        assert!(r.converged);
        assert!((r.value - PI / 2.0).abs() < 1e-10, "got {}", r.value);
    }

    #[test]
    fn kernel_polynomial_case() {
        // n=4, m=2, k=2: ∫_0^1 (1−t²)(1−t)/2 dt = 5/24.
        let r = integrate_coverage_kernel(4, 2, 2, 0.0, 1.0, &QuadSpec::default()).unwrap();
        assert!(r.converged);
        assert!((r.value - 5.0 / 24.0).abs() < 1e-12);
    }

    #[test]
    fn kernel_substitution_agreement() {
        // For k = 1, m ≥ 3 the integrand is regular, so both settings of
        // the substitution flag must agree.
        for m in 3..=5 {
            for n in [m as u64 + 2, m as u64 + 4] {
                let with = integrate_coverage_kernel(
                    n,
                    m,
                    1,
                    0.0,
                    1.0,
                    &QuadSpec {
                        substitute_endpoint: true,
                        ..QuadSpec::default()
                    },
                )
                .unwrap();
                let without = integrate_coverage_kernel(
                    n,
                    m,
                    1,
                    0.0,
                    1.0,
                    &QuadSpec {
                        substitute_endpoint: false,
                        ..QuadSpec::default()
                    },
                )
                .unwrap();
                assert!(
                    (with.value - without.value).abs() < 1e-9,
                    "m = {m}, n = {n}: {} vs {}",
                    with.value,
                    without.value
                );
            }
        }
    }

    #[test]
    fn infeasible_kernel_closed_form_m1() {
        // ∫_0^ε (1−t²)^{−1/2} (1−λ_1(t))^{n−2} dt
        //   = π/(n−1) [(1−α/π)^{n−1} − 2^{1−n}],  α = arccos ε.
        let n = 6u64;
        let eps = 0.3f64;
        let alpha = eps.acos();
        let expect = PI / (n as f64 - 1.0)
            * ((1.0 - alpha / PI).powi(n as i32 - 1) - 0.5f64.powi(n as i32 - 1));
        let r = integrate_infeasible_kernel(n, 1, 0.0, eps, &QuadSpec::default()).unwrap();
        assert!(r.converged);
        assert!((r.value - expect).abs() < 1e-12, "got {}", r.value);
    }

    #[test]
    fn cap_fraction_quadrature_matches_beta_path() {
        let spec = QuadSpec::default();
        for m in [1usize, 2, 3, 7] {
            for i in 0..=20 {
                let t = -1.0 + 0.1 * i as f64;
                let via_quad = cap_fraction_via_quadrature(m, t, &spec).unwrap();
                let via_beta = specfun::cap_fraction(m, t).unwrap();
                assert!(
                    (via_quad - via_beta).abs() <= 1e-10 * via_beta.max(1e-300),
                    "m = {m}, t = {t}: {via_quad} vs {via_beta}"
                );
            }
        }
    }
}

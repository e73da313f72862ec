//! Cross-module invariants: dual-route agreements, normalization
//! identities, solver certificates against the brute-force oracle, and
//! sampling-distribution checks. Heavier than unit tests, lighter than
//! the acceptance suite.

use spherecap::coeffs::{self, CoeffTable};
use spherecap::coverage;
use spherecap::geom::{self, Feasibility, Instance};
use spherecap::linalg;
use spherecap::mc;
use spherecap::quad::{self, QuadSpec};
use spherecap::specfun;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Beta-function path and direct quadrature of the defining integral
/// agree to 1e-10 relative across dimensions and the full t range.
#[test]
fn cap_fraction_dual_route() {
    // Pure relative tolerance so the comparison stays meaningful in the
    // deep tails where λ is tiny.
    let spec = QuadSpec {
        rel_tol: 1e-13,
        abs_tol: 0.0,
        ..QuadSpec::default()
    };
    for m in [1usize, 2, 3, 5, 8, 17, 33] {
        for i in 0..=100 {
            let t = -1.0 + 0.02 * i as f64;
            let beta = specfun::cap_fraction(m, t).unwrap();
            let quad = quad::cap_fraction_via_quadrature(m, t, &spec).unwrap();
            assert!(
                (beta - quad).abs() <= 1e-10 * beta.abs().max(1e-300),
                "m = {m}, t = {t}: beta {beta} vs quadrature {quad}"
            );
        }
    }
}

/// The normalization identity holds well beyond the rows used to solve
/// the system: for n = m+1 .. 3m the solved coefficients reproduce the
/// full Wendel sum to 1e-6 relative.
#[test]
fn coefficient_identity_extended_range() {
    let spec = QuadSpec::default();
    for m in 1..=6usize {
        let table = CoeffTable::from_linear_system(m, &spec).unwrap();
        for n in (m as u64 + 1)..=(3 * m as u64) {
            let lhs: f64 = (1..=m)
                .map(|k| coeffs::system_integral(n, m, k, &spec).unwrap() * table.get(k))
                .sum();
            let rhs: f64 = (0..=m as u64).map(|k| specfun::binomial(n - 1, k)).sum();
            assert!(
                (lhs - rhs).abs() <= 1e-6 * rhs,
                "m = {m}, n = {n}: {lhs} vs {rhs}"
            );
        }
    }
}

/// The exact-arithmetic system solve agrees with the plain
/// floating-point solve of the same system wherever the latter is
/// trustworthy.
#[test]
fn coefficient_exact_vs_numeric_solve() {
    let spec = QuadSpec::default();
    for m in 1..=6usize {
        let exact = CoeffTable::from_linear_system(m, &spec).unwrap();
        let numeric = coeffs::solve_linear_system_numeric(m, &spec).unwrap();
        for k in 1..=m {
            let (e, n) = (exact.get(k), numeric.get(k));
            assert!(
                (e - n).abs() <= 1e-6 * e.abs(),
                "C({m},{k}): exact {e} vs numeric {n}"
            );
        }
    }
}

/// Monte Carlo coefficients agree with the linear system (3.5σ) on a
/// full column.
#[test]
fn coefficient_monte_carlo_vs_system() {
    let spec = QuadSpec::default();
    let table = CoeffTable::from_linear_system(4, &spec).unwrap();
    for k in 1..=4usize {
        let est = coeffs::monte_carlo(4, k, 200_000, 2024 + k as u64).unwrap();
        assert!(
            (est.value - table.get(k)).abs() <= 3.5 * est.std_error,
            "C(4,{k}): mc {} ± {} vs system {}",
            est.value,
            est.std_error,
            table.get(k)
        );
    }
}

/// t(A), the blocking set, and (up to rotation) the center are invariant
/// under random orthogonal maps.
#[test]
fn sic_orthogonal_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for trial in 0..60 {
        let m = 1 + (trial % 3) as usize;
        let n = rng.gen_range(m + 2..=10);
        let inst = geom::sample_uniform_sphere(m, n, 10_000 + trial);
        let q = geom::random_orthogonal(m + 1, 20_000 + trial);
        let rotated_rows: Vec<Vec<f64>> = inst
            .rows()
            .iter()
            .map(|r| q.iter().map(|row| linalg::dot(row, r)).collect())
            .collect();
        let rotated = Instance::new(m, rotated_rows).unwrap();

        let a = geom::sic_general(&inst).unwrap();
        let b = geom::sic_general(&rotated).unwrap();
        assert!(
            (a.t - b.t).abs() < 1e-9,
            "trial {trial}: t {} vs {}",
            a.t,
            b.t
        );
        assert_eq!(a.blocking_set, b.blocking_set, "trial {trial}");
        let mapped_center: Vec<f64> = q.iter().map(|row| linalg::dot(row, &a.center)).collect();
        for (x, y) in mapped_center.iter().zip(&b.center) {
            assert!((x - y).abs() < 1e-7, "trial {trial}: center mismatch");
        }
    }
}

/// Every returned SIC satisfies its own invariants, re-verified here
/// from scratch: inclusion, blocking definition, class-vs-t coherence,
/// and the convex-hull certificate.
#[test]
fn sic_certificate_soundness() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for trial in 0..200u64 {
        let m = 1 + (trial % 3) as usize;
        let n = rng.gen_range(m + 2..=10);
        let inst = geom::sample_uniform_sphere(m, n, 31_000 + trial);
        let sic = geom::sic_general(&inst).unwrap();

        assert!((linalg::norm(&sic.center) - 1.0).abs() < 1e-9);
        for row in inst.rows() {
            assert!(linalg::dot(row, &sic.center) >= sic.t - 1e-9);
        }
        for &i in &sic.blocking_set {
            assert!((linalg::dot(inst.row(i), &sic.center) - sic.t).abs() <= 1e-9);
        }
        match sic.feasibility {
            Feasibility::StrictlyFeasible => assert!(sic.t > 1e-9),
            Feasibility::Infeasible => assert!(sic.t < -1e-9),
            Feasibility::IllPosed => assert!(sic.t.abs() <= 1e-9),
        }
        assert!((sic.rho - sic.t.clamp(-1.0, 1.0).acos()).abs() < 1e-12);
        let dist = geom::certificate_distance(&inst, &sic).unwrap();
        assert!(dist <= 1e-8, "trial {trial}: certificate distance {dist}");
    }
}

/// Enumeration solver vs the dense grid oracle at 1e-7, 500 instances.
#[test]
fn sic_grid_oracle_agreement() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for trial in 0..500u64 {
        let m = 1 + (trial % 2) as usize;
        let n = rng.gen_range(m + 2..=10);
        let inst = geom::sample_uniform_sphere(m, n, 50_000 + trial);
        let solved = geom::sic_general(&inst).unwrap().t;
        let coarse = if m == 1 { 10_000 } else { 40_000 };
        let oracle = geom::oracle::grid_search_t(&inst, coarse).unwrap();
        assert!(
            (solved - oracle).abs() < 1e-7,
            "trial {trial} (m={m}, n={n}): solver {solved} vs oracle {oracle}"
        );
    }
}

/// Fraction of strictly feasible (n=6, m=2) instances is wendel(6,2) = 1/2.
#[test]
fn wendel_frequency() {
    let r = mc::mc_condition_tails(6, 2, &[1.0], 100_000, 616).unwrap();
    let w = coverage::wendel(6, 2);
    assert_eq!(w, 0.5);
    assert!(
        (r.feasible_fraction.value - w).abs() <= 3.0 * r.feasible_fraction.std_error,
        "{} ± {}",
        r.feasible_fraction.value,
        r.feasible_fraction.std_error
    );
}

/// Uniform sampling reproduces cap fractions: the empirical probability
/// of ⟨a, e1⟩ ≥ t matches λ_m(t).
#[test]
fn sampling_matches_cap_fractions() {
    let n = 100_000usize;
    // Coordinate means vanish like 3/√n.
    let inst1 = geom::sample_uniform_sphere(1, n, 2717);
    for d in 0..2 {
        let mean: f64 = inst1.rows().iter().map(|r| r[d]).sum::<f64>() / n as f64;
        assert!(mean.abs() < 3.0 / (n as f64).sqrt() * 1.5, "mean {mean}");
    }
    for (m, ts) in [(2usize, vec![0.5]), (3usize, vec![0.2, 0.5, 0.8])] {
        let inst = geom::sample_uniform_sphere(m, n, 37 + m as u64);
        for t in ts {
            let lam = specfun::cap_fraction(m, t).unwrap();
            let hits = inst.rows().iter().filter(|r| r[0] >= t).count() as f64;
            let p = hits / n as f64;
            let sigma = (lam * (1.0 - lam) / n as f64).sqrt();
            assert!(
                (p - lam).abs() <= 3.5 * sigma,
                "m = {m}, t = {t}: {p} vs {lam}"
            );
        }
    }
}

/// The two probability routes stay glued along α: exact coverage equals
/// the Wendel-conditioned tail complement for m up to 3.
#[test]
fn coverage_condition_dictionary_m3() {
    let spec = QuadSpec::default();
    let m = 3usize;
    let table = CoeffTable::from_linear_system(m, &spec).unwrap();
    for n in (m as u64 + 1)..=(m as u64 + 6) {
        let mut prev = f64::INFINITY;
        for alpha in [PI / 2.0, 0.6 * PI, 0.75 * PI, 0.9 * PI] {
            let q = coverage::CoverageQuery::new(n, m, alpha).unwrap();
            let p = coverage::p_not_covered_exact(&q, &table, &spec).unwrap();
            assert!(p <= prev + 1e-12, "monotone in α failed at n={n}");
            prev = p;
            let eps = alpha.cos().abs();
            let rhs = if eps == 0.0 {
                coverage::wendel(n, m)
            } else {
                coverage::wendel(n, m)
                    * (1.0
                        - spherecap::condition::cond_tail_feasible(n, m, eps, &table, &spec)
                            .unwrap())
            };
            assert!(
                (p - rhs).abs() < 1e-8,
                "n = {n}, α = {alpha}: {p} vs {rhs}"
            );
        }
        let q = coverage::CoverageQuery::new(n, m, PI / 2.0).unwrap();
        let p = coverage::p_not_covered_exact(&q, &table, &spec).unwrap();
        assert!((p - coverage::wendel(n, m)).abs() < 1e-8);
    }
}

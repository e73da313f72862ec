//! Concrete instance geometry: uniform sampling on `S^m`, the smallest
//! including cap (SIC), feasibility classification, and the coverage
//! predicate.
//!
//! An instance is a matrix `A` with `n` unit rows in `R^{m+1}`. Its SIC
//! radius `ρ(A)` and cosine `t(A) = cos ρ(A)` determine everything else:
//!
//! * `t > 0` — the rows fit in an open hemisphere; the conic system
//!   `Ax ≤ 0, x ≠ 0` is strictly feasible and the SIC is unique. The
//!   SIC center is the normalized minimum-norm point of `conv{a_i}`,
//!   certified by `t·p ∈ conv{blocking rows}`.
//! * `t < 0` — infeasible. Blocking sets have at least `m+1` elements,
//!   so the SIC is found exactly by enumerating candidate supports of
//!   size up to `m+1`, solving `⟨a_i, p⟩ = t` with `p` in their span,
//!   and keeping the best certified cap that still contains every row.
//! * `|t| ≤ τ` (τ = 1e-9) — numerically ill-posed band.
//!
//! The GCC condition number is `C(A) = 1/|t(A)|` (`∞` in the band).

mod io;
mod minnorm;
pub mod oracle;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{self, Matrix};
use crate::{Error, Result};

pub use io::{instance_from_csv, instance_from_json, instance_to_csv, instance_to_json};

/// Classification band below which `t` counts as ill-posed.
pub const ILL_POSED_BAND: f64 = 1e-9;
/// Rows within this of the cap boundary belong to the blocking set.
pub const BLOCKING_TOL: f64 = 1e-9;
/// Required accuracy of the convex-hull certificate `t·p ∈ conv{...}`.
pub const CERTIFICATE_TOL: f64 = 1e-8;
/// Inclusion slack: every row must satisfy `⟨a_i, p⟩ ≥ t − INCLUSION_TOL`.
pub const INCLUSION_TOL: f64 = 1e-9;
/// Largest `n` accepted by the exhaustive support enumeration.
pub const DEFAULT_ENUMERATION_CAP: usize = 25;

const ROW_NORM_TOL: f64 = 1e-12;

/// A list of `n` unit vectors in `R^{m+1}`, i.e. a point of `(S^m)^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    m: usize,
    rows: Vec<Vec<f64>>,
}

impl Instance {
    /// Build from rows that are already unit vectors (within 1e-12).
    pub fn new(m: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Domain("instance needs at least one row".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m + 1 {
                return Err(Error::Domain(format!(
                    "row {} has {} coordinates, expected {}",
                    i + 1,
                    row.len(),
                    m + 1
                )));
            }
            let norm = linalg::norm(row);
            if (norm - 1.0).abs() > ROW_NORM_TOL {
                return Err(Error::Domain(format!(
                    "row {} has norm {norm}, not unit within {ROW_NORM_TOL}",
                    i + 1
                )));
            }
        }
        Ok(Instance { m, rows })
    }

    /// Build from unnormalized rows: rows within 1e-6 of unit norm are
    /// re-normalized, anything further off is rejected with its 1-based
    /// row index. This is the file-loading policy.
    pub fn from_raw_rows(m: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        let mut normalized = Vec::with_capacity(rows.len());
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != m + 1 {
                return Err(Error::Parse(format!(
                    "row {} has {} coordinates, expected {}",
                    i + 1,
                    row.len(),
                    m + 1
                )));
            }
            let norm = linalg::norm(&row);
            if (norm - 1.0).abs() > 1e-6 {
                return Err(Error::Parse(format!(
                    "row {} has norm {norm}, outside the 1e-6 unit tolerance",
                    i + 1
                )));
            }
            if (norm - 1.0).abs() > ROW_NORM_TOL {
                normalized.push(row.iter().map(|x| x / norm).collect());
            } else {
                // Already unit to working precision: keep the bits so
                // emitted files re-parse to identical values.
                normalized.push(row);
            }
        }
        Instance::new(m, normalized)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    /// Append one more unit row (used by the sequential coverage process).
    pub fn push_row(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.m + 1 || (linalg::norm(&row) - 1.0).abs() > ROW_NORM_TOL {
            return Err(Error::Domain("pushed row is not a unit vector".into()));
        }
        self.rows.push(row);
        Ok(())
    }
}

/// One uniform unit vector in `R^dim` (normalized standard normals).
pub(crate) fn unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = linalg::norm(&v);
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// `count` i.i.d. uniform points on `S^m`; deterministic in `seed`.
pub fn sample_uniform_sphere(m: usize, count: usize, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_uniform_sphere_with(&mut rng, m, count)
}

/// As [`sample_uniform_sphere`] but drawing from a caller-owned stream.
pub fn sample_uniform_sphere_with<R: Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    count: usize,
) -> Instance {
    let rows = (0..count).map(|_| unit_vector(rng, m + 1)).collect();
    Instance { m, rows }
}

/// Haar-uniform random orthogonal matrix (as rows), via Gram–Schmidt on
/// a Gaussian matrix with the sign convention that makes it uniform.
pub fn random_orthogonal(dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let g: Vec<Vec<f64>> = (0..dim)
            .map(|_| (0..dim).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        let mut q: Vec<Vec<f64>> = Vec::with_capacity(dim);
        let mut ok = true;
        for i in 0..dim {
            let mut v = g[i].clone();
            for u in &q {
                let c = linalg::dot(&g[i], u);
                for (vd, ud) in v.iter_mut().zip(u) {
                    *vd -= c * ud;
                }
            }
            let norm = linalg::norm(&v);
            if norm < 1e-9 {
                ok = false;
                break;
            }
            // Sign fix: make the "R" diagonal positive.
            let sign = if linalg::dot(&g[i], &v) < 0.0 { -1.0 } else { 1.0 };
            q.push(v.into_iter().map(|x| sign * x / norm).collect());
        }
        if ok {
            return q;
        }
    }
}

/// Feasibility class of the conic system `Ax ≤ 0, x ≠ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Feasibility {
    StrictlyFeasible,
    IllPosed,
    Infeasible,
}

/// A smallest including cap together with its certificate data.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SicResult {
    /// Unit center `p` of the cap.
    pub center: Vec<f64>,
    /// Cosine of the cap radius, `t = cos ρ ∈ [−1, 1]`.
    pub t: f64,
    /// Cap radius `ρ = arccos t`.
    pub rho: f64,
    /// 0-based indices of rows on the cap boundary.
    pub blocking_set: Vec<usize>,
    pub feasibility: Feasibility,
    /// GCC condition number `1/|t|`; infinite in the ill-posed band.
    pub condition: f64,
}

fn classify(t: f64) -> Feasibility {
    if t > ILL_POSED_BAND {
        Feasibility::StrictlyFeasible
    } else if t < -ILL_POSED_BAND {
        Feasibility::Infeasible
    } else {
        Feasibility::IllPosed
    }
}

fn blocking_set(inst: &Instance, p: &[f64], t: f64) -> Vec<usize> {
    inst.rows
        .iter()
        .enumerate()
        .filter(|(_, a)| (linalg::dot(a, p) - t).abs() <= BLOCKING_TOL)
        .map(|(i, _)| i)
        .collect()
}

fn make_result(inst: &Instance, p: Vec<f64>, t: f64) -> SicResult {
    let feasibility = classify(t);
    let condition = match feasibility {
        Feasibility::IllPosed => f64::INFINITY,
        _ => 1.0 / t.abs(),
    };
    SicResult {
        blocking_set: blocking_set(inst, &p, t),
        rho: t.clamp(-1.0, 1.0).acos(),
        feasibility,
        condition,
        center: p,
        t,
    }
}

/// Distance from `t·p` to the convex hull of the blocking rows.
///
/// Independent post-hoc check of the certificate that must hold for
/// every SIC (zero for a genuine smallest including cap).
pub fn certificate_distance(inst: &Instance, sic: &SicResult) -> Result<f64> {
    if sic.blocking_set.is_empty() {
        return Err(Error::InternalConsistency("empty blocking set".into()));
    }
    let shifted: Vec<Vec<f64>> = sic
        .blocking_set
        .iter()
        .map(|&i| {
            inst.rows[i]
                .iter()
                .zip(&sic.center)
                .map(|(a, p)| a - sic.t * p)
                .collect()
        })
        .collect();
    let mn = minnorm::min_norm_point(&shifted)?;
    Ok(linalg::norm(&mn.point))
}

/// SIC of a strictly feasible instance, or `None` when the instance is
/// not strictly feasible (the min-norm point of the row hull is ~0).
///
/// The center is the normalized minimum-norm point `x*` of
/// `conv{a_1..a_n}` and `t = ‖x*‖`; the certificate
/// `t·p ∈ conv{blocking}` is re-verified before returning.
pub fn sic_feasible(inst: &Instance) -> Result<Option<SicResult>> {
    let mn = minnorm::min_norm_point(&inst.rows)?;
    let t = linalg::norm(&mn.point);
    if t <= ILL_POSED_BAND {
        return Ok(None);
    }
    let p: Vec<f64> = mn.point.iter().map(|x| x / t).collect();
    let result = make_result(inst, p, t);
    let dist = certificate_distance(inst, &result)?;
    if dist > CERTIFICATE_TOL {
        return Err(Error::InternalConsistency(format!(
            "feasible SIC certificate distance {dist} exceeds {CERTIFICATE_TOL}"
        )));
    }
    Ok(Some(result))
}

/// One candidate support solve: the unique `(p, t)` with `t > 0`,
/// `p ∈ span{a_i : i ∈ support}`, and `⟨a_i, p⟩ = t` on the support.
///
/// Also returns the affine certificate weights of `t·p` in the support
/// rows (they are invariant under the sign flip `(p, t) → (−p, −t)`).
/// `None` when the support is rank-deficient.
fn support_candidate(inst: &Instance, support: &[usize]) -> Option<(Vec<f64>, f64, Vec<f64>)> {
    let s = support.len();
    let mut gram = Matrix::zeros(s);
    for (r, &i) in support.iter().enumerate() {
        for (c, &j) in support.iter().enumerate() {
            gram.set(r, c, linalg::dot(&inst.rows[i], &inst.rows[j]));
        }
    }
    let lu = linalg::Lu::factor(&gram).ok()?;
    if lu.det().abs() < 1e-12 {
        return None;
    }
    let q = lu.solve(&vec![1.0; s]);
    let total: f64 = q.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return None;
    }
    let t = 1.0 / total.sqrt();
    let mut p = vec![0.0; inst.m + 1];
    for (&i, &qi) in support.iter().zip(&q) {
        for (pd, ad) in p.iter_mut().zip(&inst.rows[i]) {
            *pd += t * qi * ad;
        }
    }
    // Affine weights of t·p in the support rows: μ_i = t² q_i, Σ μ = 1.
    let mu: Vec<f64> = q.iter().map(|&qi| t * t * qi).collect();
    Some((p, t, mu))
}

fn lex_less(a: &[usize], b: &[usize]) -> bool {
    a.iter().lt(b.iter())
}

/// SIC of an arbitrary instance.
///
/// Strictly feasible instances go through [`sic_feasible`]. Otherwise
/// every support of size `2..=m+1` is enumerated; rank-deficient ones
/// are skipped, candidates must contain every row and carry the convex
/// hull certificate, and the cap of maximal `t` wins. Ties are broken
/// by the lexicographically smallest blocking set (infeasible instances
/// may have several smallest including caps).
pub fn sic_general(inst: &Instance) -> Result<SicResult> {
    sic_general_with_cap(inst, DEFAULT_ENUMERATION_CAP)
}

/// [`sic_general`] with an explicit enumeration capacity.
pub fn sic_general_with_cap(inst: &Instance, cap: usize) -> Result<SicResult> {
    if let Some(result) = sic_feasible(inst)? {
        return Ok(result);
    }
    let n = inst.n();
    let m = inst.m();
    if n > cap {
        return Err(Error::Capacity(format!(
            "support enumeration needs n <= {cap}, instance has n = {n}"
        )));
    }

    let mut best: Option<(f64, Vec<f64>, Vec<usize>)> = None;
    let mut rank_deficient = 0usize;
    for size in 2..=(m + 1).min(n) {
        let mut support: Vec<usize> = (0..size).collect();
        loop {
            match support_candidate(inst, &support) {
                None => rank_deficient += 1,
                Some((p, t, mu)) => {
                    let certified = mu.iter().all(|&w| w >= -CERTIFICATE_TOL);
                    if certified {
                        for (pc, tc) in [(p.clone(), t), (p.iter().map(|x| -x).collect(), -t)] {
                            let includes = inst
                                .rows
                                .iter()
                                .all(|a| linalg::dot(a, &pc) >= tc - INCLUSION_TOL);
                            if !includes {
                                continue;
                            }
                            let better = match &best {
                                None => true,
                                Some((bt, _, bblock)) => {
                                    tc > bt + 1e-12
                                        || ((tc - bt).abs() <= 1e-12
                                            && lex_less(&blocking_set(inst, &pc, tc), bblock))
                                }
                            };
                            if better {
                                let block = blocking_set(inst, &pc, tc);
                                best = Some((tc, pc, block));
                            }
                        }
                    }
                }
            }
            if !next_combination(&mut support, n) {
                break;
            }
        }
    }

    let Some((t, p, _)) = best else {
        return Err(Error::InternalConsistency(format!(
            "no valid SIC candidate found ({rank_deficient} rank-deficient supports skipped); \
             the instance is degenerate"
        )));
    };
    let result = make_result(inst, p, t);
    let dist = certificate_distance(inst, &result)?;
    if dist > CERTIFICATE_TOL {
        return Err(Error::InternalConsistency(format!(
            "SIC certificate distance {dist} exceeds {CERTIFICATE_TOL}"
        )));
    }
    Ok(result)
}

/// Advance `support` to the next size-|support| combination of `0..n`
/// in lexicographic order; false when exhausted.
fn next_combination(support: &mut [usize], n: usize) -> bool {
    let k = support.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if support[i] < n - k + i {
            support[i] += 1;
            for j in i + 1..k {
                support[j] = support[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Do `n` caps of angular radius `alpha` centered at the rows cover `S^m`?
///
/// Equivalent to `ρ(A) > π − α`: the caps fail to cover exactly when
/// some point of the sphere stays at angle more than `α` from every
/// center, i.e. when a largest excluding cap has radius at least `α`.
pub fn covers_sphere(inst: &Instance, alpha: f64) -> Result<bool> {
    if !(0.0..=std::f64::consts::PI).contains(&alpha) {
        return Err(Error::Domain(format!(
            "cap radius alpha = {alpha} outside [0, π]"
        )));
    }
    let sic = sic_general(inst)?;
    Ok(sic.t < (std::f64::consts::PI - alpha).cos())
}

/// Cheap coverage decision for hemispheres (`alpha = π/2`): the caps
/// cover iff the instance is not feasible. Used by the sequential
/// expected-caps estimator, where `n` outgrows the enumeration cap.
pub(crate) fn covers_at_half_pi(inst: &Instance) -> Result<bool> {
    Ok(sic_feasible(inst)?.is_none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn inst(m: usize, rows: &[&[f64]]) -> Instance {
        Instance::new(m, rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn two_orthogonal_rows_on_s1() {
        let i = inst(1, &[&[1.0, 0.0], &[0.0, 1.0]]);
        let r = sic_feasible(&i).unwrap().unwrap();
        let s = 0.5f64.sqrt();
        assert!((r.t - s).abs() < 1e-12);
        assert!((r.center[0] - s).abs() < 1e-9 && (r.center[1] - s).abs() < 1e-9);
        assert!((r.condition - 2f64.sqrt()).abs() < 1e-9);
        assert_eq!(r.blocking_set, vec![0, 1]);
        assert_eq!(r.feasibility, Feasibility::StrictlyFeasible);
    }

    #[test]
    fn single_row_is_a_point_cap() {
        let i = inst(1, &[&[0.6, 0.8]]);
        let r = sic_general(&i).unwrap();
        assert!((r.t - 1.0).abs() < 1e-12);
        assert!(r.rho.abs() < 1e-6);
        assert!((r.condition - 1.0).abs() < 1e-9);
    }

    #[test]
    fn orthonormal_frame_on_s2() {
        let i = inst(2, &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        let r = sic_general(&i).unwrap();
        let e = 1.0 / 3f64.sqrt();
        assert!((r.t - e).abs() < 1e-10);
        for c in &r.center {
            assert!((c - e).abs() < 1e-9);
        }
        assert_eq!(r.blocking_set, vec![0, 1, 2]);
    }

    #[test]
    fn equiangular_triple_on_s1_is_infeasible() {
        let rows: Vec<Vec<f64>> = (0..3)
            .map(|j| {
                let a = 2.0 * PI * j as f64 / 3.0;
                vec![a.cos(), a.sin()]
            })
            .collect();
        let i = Instance::new(1, rows).unwrap();
        assert!(sic_feasible(&i).unwrap().is_none());
        let r = sic_general(&i).unwrap();
        assert!((r.t + 0.5).abs() < 1e-10, "t = {}", r.t);
        assert!((r.condition - 2.0).abs() < 1e-9);
        assert_eq!(r.feasibility, Feasibility::Infeasible);
        assert!((r.rho - 2.0 * PI / 3.0).abs() < 1e-9);
        assert_eq!(r.blocking_set.len(), 2);
        assert!(certificate_distance(&i, &r).unwrap() < 1e-10);
    }

    #[test]
    fn coordinate_cross_on_s2() {
        // ±e_1, ±e_2, ±e_3: the SIC has t = −1/√3 (center on a diagonal,
        // blocked by the three rows of opposite sign), condition √3.
        let i = inst(
            2,
            &[
                &[1.0, 0.0, 0.0],
                &[0.0, 1.0, 0.0],
                &[0.0, 0.0, 1.0],
                &[-1.0, 0.0, 0.0],
                &[0.0, -1.0, 0.0],
                &[0.0, 0.0, -1.0],
            ],
        );
        let r = sic_general(&i).unwrap();
        let e = 1.0 / 3f64.sqrt();
        assert!((r.t + e).abs() < 1e-10, "t = {}", r.t);
        assert!((r.condition - 3f64.sqrt()).abs() < 1e-9);
        assert_eq!(r.feasibility, Feasibility::Infeasible);
        assert_eq!(r.blocking_set.len(), 3);
    }

    #[test]
    fn general_matches_feasible_path_on_random_instance() {
        let i = {
            // Rows pulled toward the pole are strictly feasible.
            let base = sample_uniform_sphere(2, 8, 42);
            let rows: Vec<Vec<f64>> = base
                .rows()
                .iter()
                .map(|r| {
                    let mut v = r.clone();
                    v[2] = v[2].abs() + 1.5;
                    let n = linalg::norm(&v);
                    v.iter().map(|x| x / n).collect()
                })
                .collect();
            Instance::new(2, rows).unwrap()
        };
        let a = sic_feasible(&i).unwrap().unwrap();
        let b = sic_general(&i).unwrap();
        assert_eq!(a.t, b.t);
        assert_eq!(a.blocking_set, b.blocking_set);
    }

    #[test]
    fn covers_examples() {
        let cross = inst(
            2,
            &[
                &[1.0, 0.0, 0.0],
                &[0.0, 1.0, 0.0],
                &[0.0, 0.0, 1.0],
                &[-1.0, 0.0, 0.0],
                &[0.0, -1.0, 0.0],
                &[0.0, 0.0, -1.0],
            ],
        );
        // ρ = arccos(−1/√3) ≈ 2.186 > π − (π/2 + 0.01)
        assert!(covers_sphere(&cross, PI / 2.0 + 0.01).unwrap());

        let single = inst(2, &[&[0.0, 0.0, 1.0]]);
        assert!(!covers_sphere(&single, PI / 2.0).unwrap());

        let triple: Vec<Vec<f64>> = (0..3)
            .map(|j| {
                let a = 2.0 * PI * j as f64 / 3.0;
                vec![a.cos(), a.sin()]
            })
            .collect();
        let tri = Instance::new(1, triple).unwrap();
        assert!(covers_sphere(&tri, PI / 3.0 + 0.01).unwrap());
        assert!(!covers_sphere(&tri, PI / 3.0 - 0.01).unwrap());
    }

    #[test]
    fn capacity_error_beyond_enumeration_cap() {
        // An infeasible instance too large for the default enumeration.
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for j in 0..30 {
            let a = 2.0 * PI * j as f64 / 30.0;
            rows.push(vec![a.cos(), a.sin()]);
        }
        let i = Instance::new(1, rows).unwrap();
        assert!(matches!(sic_general(&i), Err(Error::Capacity(_))));
        assert!(sic_general_with_cap(&i, 30).is_ok());
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_uniform_sphere(2, 1000, 7);
        let b = sample_uniform_sphere(2, 1000, 7);
        assert_eq!(a, b);
        let c = sample_uniform_sphere(2, 1000, 8);
        assert_ne!(a, c);
        for row in a.rows() {
            assert!((linalg::norm(row) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn orthogonal_sampler_is_orthogonal() {
        for seed in 0..5 {
            let q = random_orthogonal(3, seed);
            for i in 0..3 {
                for j in 0..3 {
                    let d = linalg::dot(&q[i], &q[j]);
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((d - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn malformed_rows_are_rejected_with_index() {
        let bad = Instance::from_raw_rows(1, vec![vec![1.0, 0.0], vec![0.9, 0.0]]);
        match bad {
            Err(Error::Parse(msg)) => assert!(msg.contains("row 2"), "{msg}"),
            other => panic!("expected parse rejection, got {other:?}"),
        }
        // Mild denormalization is repaired.
        let ok = Instance::from_raw_rows(1, vec![vec![1.0 + 5e-7, 0.0]]).unwrap();
        assert!((linalg::norm(ok.row(0)) - 1.0).abs() < 1e-12);
    }
}

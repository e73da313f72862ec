//! Minimum-norm point in the convex hull of a finite point set.
//!
//! Wolfe's active-set method, which is exact (up to floating point) at
//! the sizes this crate handles, with a Gilbert-style conditional
//! gradient fallback capped at 10^5 steps. Optimality is certified by
//! the Wolfe criterion `min_i ⟨x, p_i⟩ ≥ ‖x‖² − tol`.

use crate::linalg::{self, Matrix};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub(crate) struct MinNorm {
    /// The minimizing point `x* = argmin{‖x‖ : x ∈ conv(points)}`.
    pub point: Vec<f64>,
    /// Indices carrying positive weight in the returned combination.
    #[allow(dead_code)]
    pub support: Vec<usize>,
}

pub(crate) const WOLFE_TOL: f64 = 1e-12;
pub(crate) const MAX_ITER: u64 = 100_000;

fn combination(points: &[Vec<f64>], support: &[usize], weights: &[f64]) -> Vec<f64> {
    let dim = points[0].len();
    let mut x = vec![0.0; dim];
    for (&i, &w) in support.iter().zip(weights) {
        for (xd, pd) in x.iter_mut().zip(&points[i]) {
            *xd += w * pd;
        }
    }
    x
}

/// Min over all points of `⟨x, p_i⟩`, with the winning index.
fn most_violating(points: &[Vec<f64>], x: &[f64], banned: &[bool]) -> (usize, f64) {
    let mut best = (usize::MAX, f64::INFINITY);
    for (i, p) in points.iter().enumerate() {
        if banned[i] {
            continue;
        }
        let d = linalg::dot(x, p);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// Affine minimizer over the support: minimize `‖Σ v_i p_i‖` subject to
/// `Σ v_i = 1` with unrestricted signs, via the KKT system
/// `[G 1; 1ᵀ 0] (v, ν) = (0, 1)` where `G` is the support Gram matrix.
fn affine_minimizer(points: &[Vec<f64>], support: &[usize]) -> Result<Vec<f64>> {
    let s = support.len();
    let mut kkt = Matrix::zeros(s + 1);
    for (r, &i) in support.iter().enumerate() {
        for (c, &j) in support.iter().enumerate() {
            kkt.set(r, c, linalg::dot(&points[i], &points[j]));
        }
        kkt.set(r, s, 1.0);
        kkt.set(s, r, 1.0);
    }
    let mut rhs = vec![0.0; s + 1];
    rhs[s] = 1.0;
    let sol = linalg::solve(&kkt, &rhs)?;
    Ok(sol[..s].to_vec())
}

/// Wolfe's method. On success the support carries strictly positive
/// weights and `x` satisfies the Wolfe criterion at `tol`.
fn wolfe(points: &[Vec<f64>], tol: f64, max_iter: u64) -> Result<MinNorm> {
    let n = points.len();
    let mut banned = vec![false; n];

    // Start from the point of smallest norm.
    let start = (0..n)
        .min_by(|&i, &j| linalg::norm(&points[i]).total_cmp(&linalg::norm(&points[j])))
        .unwrap();
    let mut support = vec![start];
    let mut weights = vec![1.0];
    let mut x = points[start].clone();
    let mut iterations = 0u64;

    loop {
        iterations += 1;
        if iterations > max_iter {
            return Err(Error::Solver(format!(
                "Wolfe method exceeded {max_iter} iterations; best ‖x‖ = {}",
                linalg::norm(&x)
            )));
        }
        let xx = linalg::dot(&x, &x);
        let (j, dj) = most_violating(points, &x, &banned);
        if j == usize::MAX || dj >= xx - tol || support.contains(&j) {
            // Optimal, or no further progress is representable.
            break;
        }
        support.push(j);
        weights.push(0.0);

        // Minor cycles: pull x to the affine minimizer of the support,
        // dropping vertices whose weight would have to go negative.
        loop {
            iterations += 1;
            if iterations > max_iter {
                return Err(Error::Solver(format!(
                    "Wolfe minor cycle exceeded {max_iter} iterations; best ‖x‖ = {}",
                    linalg::norm(&x)
                )));
            }
            let v = match affine_minimizer(points, &support) {
                Ok(v) => v,
                Err(_) => {
                    // Degenerate Gram (duplicate rows): give up on this
                    // vertex and never select it again.
                    let dropped = support.pop().unwrap();
                    weights.pop();
                    banned[dropped] = true;
                    break;
                }
            };
            if v.iter().all(|&vi| vi > -1e-14) {
                weights = v.iter().map(|&vi| vi.max(0.0)).collect();
                break;
            }
            // Largest step toward v keeping all weights nonnegative.
            let mut theta = 1.0f64;
            for (&w, &vi) in weights.iter().zip(&v) {
                if vi < w {
                    theta = theta.min(w / (w - vi));
                }
            }
            for (w, &vi) in weights.iter_mut().zip(&v) {
                *w = (1.0 - theta) * *w + theta * vi;
            }
            let keep: Vec<usize> = (0..support.len())
                .filter(|&i| weights[i] > 1e-14)
                .collect();
            if keep.len() == support.len() {
                // Numerical stalemate; nudge out the smallest weight.
                let drop = (0..support.len())
                    .min_by(|&a, &b| weights[a].total_cmp(&weights[b]))
                    .unwrap();
                support.remove(drop);
                weights.remove(drop);
            } else {
                support = keep.iter().map(|&i| support[i]).collect();
                weights = keep.iter().map(|&i| weights[i]).collect();
            }
            let total: f64 = weights.iter().sum();
            for w in weights.iter_mut() {
                *w /= total;
            }
        }
        x = combination(points, &support, &weights);
    }

    Ok(MinNorm { point: x, support })
}

/// Gilbert's conditional-gradient iteration, used only when Wolfe gives
/// up. Linear convergence, but it needs no linear algebra at all.
fn gilbert(points: &[Vec<f64>], tol: f64, max_iter: u64) -> Result<MinNorm> {
    let banned = vec![false; points.len()];
    let start = (0..points.len())
        .min_by(|&i, &j| linalg::norm(&points[i]).total_cmp(&linalg::norm(&points[j])))
        .unwrap();
    let mut x = points[start].clone();
    for _ in 0..max_iter {
        let xx = linalg::dot(&x, &x);
        let (j, dj) = most_violating(points, &x, &banned);
        if dj >= xx - tol {
            let support = active_support(points, &x, tol);
            return Ok(MinNorm { point: x, support });
        }
        // Project the origin onto the segment [x, p_j].
        let p = &points[j];
        let d: Vec<f64> = p.iter().zip(&x).map(|(pi, xi)| pi - xi).collect();
        let dd = linalg::dot(&d, &d);
        if dd == 0.0 {
            break;
        }
        let gamma = (-linalg::dot(&x, &d) / dd).clamp(0.0, 1.0);
        for (xi, di) in x.iter_mut().zip(&d) {
            *xi += gamma * di;
        }
    }
    Err(Error::Solver(format!(
        "Gilbert iteration exceeded {max_iter} steps; best ‖x‖ = {}",
        linalg::norm(&x)
    )))
}

fn active_support(points: &[Vec<f64>], x: &[f64], tol: f64) -> Vec<usize> {
    let m = points
        .iter()
        .map(|p| linalg::dot(p, x))
        .fold(f64::INFINITY, f64::min);
    points
        .iter()
        .enumerate()
        .filter(|(_, p)| linalg::dot(p, x) <= m + tol.sqrt())
        .map(|(i, _)| i)
        .collect()
}

/// Minimum-norm point of `conv{points}`.
pub(crate) fn min_norm_point(points: &[Vec<f64>]) -> Result<MinNorm> {
    assert!(!points.is_empty());
    match wolfe(points, WOLFE_TOL, MAX_ITER) {
        Ok(r) => Ok(r),
        Err(_) => gilbert(points, WOLFE_TOL, MAX_ITER),
    }
}

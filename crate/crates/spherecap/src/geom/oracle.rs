//! Brute-force reference for the SIC cosine `t(A) = max_p min_i ⟨a_i, p⟩`.
//!
//! A dense grid over the sphere followed by local shrinking-window
//! refinement of the best basins. Deliberately independent of the
//! production solvers (no min-norm duality, no support enumeration);
//! only `S^1` and `S^2` are supported. This is validation machinery,
//! far too slow for production use.

use super::Instance;
use crate::linalg;
use crate::{Error, Result};

use std::f64::consts::PI;

fn objective(inst: &Instance, p: &[f64]) -> f64 {
    inst.rows()
        .iter()
        .map(|a| linalg::dot(a, p))
        .fold(f64::INFINITY, f64::min)
}

/// `t(A)` by grid search with `coarse` initial directions.
pub fn grid_search_t(inst: &Instance, coarse: usize) -> Result<f64> {
    match inst.m() {
        1 => Ok(circle_search(inst, coarse)),
        2 => Ok(sphere_search(inst, coarse)),
        m => Err(Error::Domain(format!(
            "grid oracle supports m in {{1, 2}}, got {m}"
        ))),
    }
}

fn circle_search(inst: &Instance, coarse: usize) -> f64 {
    let eval = |theta: f64| objective(inst, &[theta.cos(), theta.sin()]);
    let step = 2.0 * PI / coarse as f64;
    let mut seeds: Vec<(f64, f64)> = (0..coarse)
        .map(|j| {
            let theta = j as f64 * step;
            (eval(theta), theta)
        })
        .collect();
    seeds.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = f64::NEG_INFINITY;
    for &(_, seed) in seeds.iter().take(8) {
        // Pattern search: recenter freely, shrink only when stuck, so a
        // maximum just outside the current window is never lost.
        let mut center = seed;
        let mut value = eval(seed);
        let mut width = step;
        let mut iterations = 0;
        while width > 1e-15 && iterations < 500 {
            iterations += 1;
            let mut improved = false;
            let mut on_edge = false;
            for j in [-4i32, -3, -2, -1, 1, 2, 3, 4] {
                let theta = center + width * j as f64 / 4.0;
                let v = eval(theta);
                if v > value {
                    value = v;
                    center = theta;
                    improved = true;
                    on_edge = j.abs() == 4;
                }
            }
            if !improved {
                width *= 0.5;
            } else if on_edge {
                width = (width * 1.6).min(step);
            }
        }
        best = best.max(value);
    }
    best
}

fn fibonacci_sphere(count: usize) -> Vec<[f64; 3]> {
    let golden = PI * (3.0 - 5.0f64.sqrt());
    (0..count)
        .map(|j| {
            let z = 1.0 - (2.0 * j as f64 + 1.0) / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * j as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

fn normalize3(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Orthonormal tangent frame at `c`.
fn tangent_frame(c: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let pick = if c[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let u = normalize3([
        c[1] * pick[2] - c[2] * pick[1],
        c[2] * pick[0] - c[0] * pick[2],
        c[0] * pick[1] - c[1] * pick[0],
    ]);
    let v = [
        c[1] * u[2] - c[2] * u[1],
        c[2] * u[0] - c[0] * u[2],
        c[0] * u[1] - c[1] * u[0],
    ];
    (u, v)
}

fn sphere_search(inst: &Instance, coarse: usize) -> f64 {
    let eval = |p: [f64; 3]| objective(inst, &p);
    let grid = fibonacci_sphere(coarse);
    let mut ranked: Vec<(f64, [f64; 3])> = grid.into_iter().map(|p| (eval(p), p)).collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0));

    // Keep the best few seeds that are pairwise well separated, so
    // several competing basins get refined.
    let mesh = (4.0 * PI / coarse as f64).sqrt();
    let mut seeds: Vec<[f64; 3]> = Vec::new();
    for (_, p) in ranked {
        if seeds.len() >= 24 {
            break;
        }
        if seeds
            .iter()
            .all(|s| (s[0] * p[0] + s[1] * p[1] + s[2] * p[2]) < (3.0 * mesh).cos())
        {
            seeds.push(p);
        }
    }

    let mut best = f64::NEG_INFINITY;
    for seed in seeds {
        best = best.max(tangent_polish(inst, seed, 2.0 * mesh));
    }
    best
}

/// Local maximin polish around `seed`.
///
/// Linearize every constraint on the tangent plane at the current
/// point and enumerate the candidate optima of the 2-D problem
/// `max_d min_i (c_i + ⟨g_i, d⟩)` inside a trust region: single-gradient
/// steps, pair-equalization lines (walked both ways), and
/// triple-equalization points. Candidates are scored with the true
/// spherical objective, so a step is only ever taken when it genuinely
/// improves; the trust region shrinks when nothing does. At a
/// nondegenerate apex the triple candidate lands on the corner and the
/// iteration converges like Newton.
fn tangent_polish(inst: &Instance, seed: [f64; 3], initial_trust: f64) -> f64 {
    let eval = |p: [f64; 3]| objective(inst, &p);
    let dot3 = |a: &[f64], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let n = inst.n();
    let mut p = seed;
    let mut value = eval(p);
    let mut trust = initial_trust;
    for _ in 0..80 {
        let (u, v) = tangent_frame(p);
        let c: Vec<f64> = inst.rows().iter().map(|a| dot3(a, p)).collect();
        let gu: Vec<f64> = inst.rows().iter().map(|a| dot3(a, u)).collect();
        let gv: Vec<f64> = inst.rows().iter().map(|a| dot3(a, v)).collect();

        let mut cands: Vec<[f64; 2]> = Vec::with_capacity(8 * n * n);
        for i in 0..n {
            let g = (gu[i] * gu[i] + gv[i] * gv[i]).sqrt();
            if g > 1e-15 {
                cands.push([trust * gu[i] / g, trust * gv[i] / g]);
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                let (dc, du, dv) = (c[i] - c[j], gu[i] - gu[j], gv[i] - gv[j]);
                let nrm2 = du * du + dv * dv;
                if nrm2 < 1e-28 {
                    continue;
                }
                // Foot of the equalization line g_i = g_j, then walk it.
                let foot = [-dc * du / nrm2, -dc * dv / nrm2];
                let nrm = nrm2.sqrt();
                let along = [-dv / nrm, du / nrm];
                cands.push(foot);
                for sgn in [-1.0, 1.0] {
                    for step in [0.3 * trust, trust] {
                        cands.push([
                            foot[0] + sgn * step * along[0],
                            foot[1] + sgn * step * along[1],
                        ]);
                    }
                }
                for k in j + 1..n {
                    let (a11, a12, b1) = (du, dv, -(c[i] - c[j]));
                    let (a21, a22, b2) = (gu[i] - gu[k], gv[i] - gv[k], -(c[i] - c[k]));
                    let det = a11 * a22 - a12 * a21;
                    if det.abs() > 1e-16 {
                        cands.push([(b1 * a22 - b2 * a12) / det, (a11 * b2 - a21 * b1) / det]);
                    }
                }
            }
        }

        let mut improved = false;
        for d in cands {
            let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
            let d = if len > trust {
                [d[0] * trust / len, d[1] * trust / len]
            } else {
                d
            };
            let cand = normalize3([
                p[0] + d[0] * u[0] + d[1] * v[0],
                p[1] + d[0] * u[1] + d[1] * v[1],
                p[2] + d[0] * u[2] + d[1] * v[2],
            ]);
            let val = eval(cand);
            if val > value {
                value = val;
                p = cand;
                improved = true;
            }
        }
        if !improved {
            trust *= 0.35;
            if trust < 1e-13 {
                break;
            }
        }
    }
    value
}

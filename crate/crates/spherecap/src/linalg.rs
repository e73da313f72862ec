//! Small dense linear algebra: LU with partial pivoting, solves, a
//! one-norm condition estimate, and vector helpers.
//!
//! Every system in this crate is tiny (at most `2m ≤ 24` unknowns), so a
//! plain O(n³) factorization is both fast and fully deterministic.

use crate::{Error, Result};

/// Row-major dense square matrix.
#[derive(Debug, Clone)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut m = Matrix::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix rows must be square");
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }
}

/// LU factorization with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    /// Factor `a`. Fails on exact singularity (zero pivot column).
    pub fn factor(a: &Matrix) -> Result<Lu> {
        let n = a.n;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for col in 0..n {
            let mut piv = col;
            let mut best = lu.get(col, col).abs();
            for r in col + 1..n {
                let v = lu.get(r, col).abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best == 0.0 {
                return Err(Error::Linalg(format!("singular matrix at column {col}")));
            }
            if piv != col {
                for j in 0..n {
                    let tmp = lu.get(col, j);
                    lu.set(col, j, lu.get(piv, j));
                    lu.set(piv, j, tmp);
                }
                perm.swap(col, piv);
                sign = -sign;
            }
            let d = lu.get(col, col);
            for r in col + 1..n {
                let f = lu.get(r, col) / d;
                lu.set(r, col, f);
                for j in col + 1..n {
                    let v = lu.get(r, j) - f * lu.get(col, j);
                    lu.set(r, j, v);
                }
            }
        }
        Ok(Lu { lu, perm, sign })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for j in 0..i {
                x[i] -= self.lu.get(i, j) * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= self.lu.get(i, j) * x[j];
            }
            x[i] /= self.lu.get(i, i);
        }
        x
    }

    pub fn det(&self) -> f64 {
        let mut d = self.sign;
        for i in 0..self.lu.n {
            d *= self.lu.get(i, i);
        }
        d
    }

    pub fn inverse(&self) -> Matrix {
        let n = self.lu.n;
        let mut inv = Matrix::zeros(n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.solve(&e);
            for i in 0..n {
                inv.set(i, j, col[i]);
            }
            e[j] = 0.0;
        }
        inv
    }
}

/// Solution of a square system together with a one-norm condition estimate.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub x: Vec<f64>,
    /// `‖A‖₁ · ‖A⁻¹‖₁`.
    pub condition_estimate: f64,
    /// `max_i |A x − b|_i / max(1, |b|_i)`.
    pub relative_residual: f64,
}

/// `b − A x` with fma-exact products and Neumaier accumulation, so the
/// residual keeps meaning even when it is far below `ε‖A‖‖x‖`.
fn residual_compensated(a: &Matrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.n;
    (0..n)
        .map(|i| {
            let mut sum = b[i];
            let mut comp = 0.0;
            for j in 0..n {
                let aij = -a.get(i, j);
                let p = aij * x[j];
                let err = aij.mul_add(x[j], -p);
                let t = sum + p;
                comp += if sum.abs() >= p.abs() {
                    (sum - t) + p
                } else {
                    (p - t) + sum
                };
                sum = t;
                comp += err;
            }
            sum + comp
        })
        .collect()
}

/// Solve `a x = b` with iterative refinement (compensated residuals) and
/// report conditioning and the achieved residual.
///
/// Refinement pushes the forward error of the solve itself down to a
/// few ulps even for badly conditioned systems; what remains is the
/// conditioning applied to the uncertainty of the inputs.
pub fn solve_with_report(a: &Matrix, b: &[f64]) -> Result<SolveReport> {
    let lu = Lu::factor(a)?;
    let mut x = lu.solve(b);
    let x_scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for _ in 0..5 {
        let r = residual_compensated(a, &x, b);
        let dx = lu.solve(&r);
        let step = dx.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += di;
        }
        if step <= 1e-16 * x_scale {
            break;
        }
    }
    let condition_estimate = a.norm_one() * lu.inverse().norm_one();
    let r = residual_compensated(a, &x, b);
    let relative_residual = r
        .iter()
        .zip(b)
        .map(|(ri, bi)| ri.abs() / bi.abs().max(1.0))
        .fold(0.0, f64::max);
    Ok(SolveReport {
        x,
        condition_estimate,
        relative_residual,
    })
}

/// Plain solve without the condition estimate, for inner loops.
pub fn solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    Ok(Lu::factor(a)?.solve(b))
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Compensated (Kahan) accumulator for sums of many small terms.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

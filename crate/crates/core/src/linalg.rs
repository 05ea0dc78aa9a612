//! Banded symmetric positive-definite systems: Cholesky factorization for
//! moderate sizes, Jacobi-preconditioned conjugate gradients beyond.

// Band storage reads most clearly with explicit row and offset indices.
#![allow(clippy::needless_range_loop)]

use crate::error::{Error, Result};

/// Symmetric matrix stored by its lower band: `band[i][k] = A(i, i − k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedSpd {
    n: usize,
    bandwidth: usize,
    band: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSolveOptions {
    /// Systems up to this size are factorized directly.
    pub direct_limit: usize,
    pub cg_rel_tol: f64,
    pub cg_max_iterations: usize,
}

impl Default for LinearSolveOptions {
    fn default() -> Self {
        LinearSolveOptions {
            direct_limit: 4096,
            cg_rel_tol: 1e-12,
            cg_max_iterations: 20_000,
        }
    }
}

impl BandedSpd {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        BandedSpd {
            n,
            bandwidth,
            band: vec![vec![0.0; bandwidth + 1]; n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.bandwidth {
            0.0
        } else {
            self.band[i][i - j]
        }
    }

    /// Adds `v` to `A(i, j)` (and, by symmetry, to `A(j, i)`).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        assert!(i - j <= self.bandwidth, "entry ({i}, {j}) outside the band");
        self.band[i][i - j] += v;
    }

    pub fn add_diagonal(&mut self, d: &[f64]) {
        for (row, v) in self.band.iter_mut().zip(d) {
            row[0] += v;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.band.iter().map(|r| r[0]).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let row = &self.band[i];
            y[i] += row[0] * x[i];
            for k in 1..=self.bandwidth.min(i) {
                let j = i - k;
                y[i] += row[k] * x[j];
                y[j] += row[k] * x[i];
            }
        }
        y
    }

    /// `xᵀ A y`.
    pub fn form(&self, x: &[f64], y: &[f64]) -> f64 {
        self.matvec(y).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Band Cholesky `A = L Lᵀ`, with `L` stored in the same layout.
    pub fn cholesky(&self) -> Result<BandedCholesky> {
        let mut l = self.band.clone();
        let bw = self.bandwidth;
        for i in 0..self.n {
            for k in (1..=bw.min(i)).rev() {
                let j = i - k;
                // L(i,j) = (A(i,j) − Σ_{m<j} L(i,m) L(j,m)) / L(j,j)
                let mut s = l[i][k];
                for m in 1..=bw.min(j) {
                    let col = j - m;
                    if i - col <= bw {
                        s -= l[i][i - col] * l[j][m];
                    }
                }
                l[i][k] = s / l[j][0];
            }
            let mut d = l[i][0];
            for k in 1..=bw.min(i) {
                d -= l[i][k] * l[i][k];
            }
            if !(d > 0.0) {
                return Err(Error::LinearSolve(format!(
                    "matrix is not positive definite (pivot {d:e} at row {i})"
                )));
            }
            l[i][0] = d.sqrt();
        }
        Ok(BandedCholesky { bandwidth: bw, l })
    }

    pub fn solve(&self, rhs: &[f64], opts: &LinearSolveOptions) -> Result<Vec<f64>> {
        if self.n <= opts.direct_limit {
            self.cholesky()?.solve(rhs)
        } else {
            self.solve_cg(rhs, opts)
        }
    }

    /// Jacobi-preconditioned conjugate gradients from a zero initial guess.
    pub fn solve_cg(&self, rhs: &[f64], opts: &LinearSolveOptions) -> Result<Vec<f64>> {
        let diag = self.diagonal();
        if diag.iter().any(|d| !(*d > 0.0)) {
            return Err(Error::LinearSolve("nonpositive diagonal entry".into()));
        }
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let norm_b = dot(rhs, rhs).sqrt();
        let mut x = vec![0.0; self.n];
        if norm_b == 0.0 {
            return Ok(x);
        }
        let mut r = rhs.to_vec();
        let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        for _ in 0..opts.cg_max_iterations {
            let ap = self.matvec(&p);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                return Err(Error::LinearSolve("matrix is not positive definite".into()));
            }
            let alpha = rz / pap;
            for i in 0..self.n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let res = dot(&r, &r).sqrt();
            if res <= opts.cg_rel_tol * norm_b {
                return Ok(x);
            }
            for i in 0..self.n {
                z[i] = r[i] / diag[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..self.n {
                p[i] = z[i] + beta * p[i];
            }
        }
        let res = dot(&r, &r).sqrt() / norm_b;
        Err(Error::MaxIterationsExceeded {
            solver: "conjugate gradients",
            iterations: opts.cg_max_iterations,
            residual: res,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandedCholesky {
    bandwidth: usize,
    l: Vec<Vec<f64>>,
}

impl BandedCholesky {
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.l.len();
        if rhs.len() != n {
            return Err(Error::LinearSolve(format!(
                "right-hand side has length {}, expected {n}",
                rhs.len()
            )));
        }
        let bw = self.bandwidth;
        let mut y = rhs.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 1..=bw.min(i) {
                s -= self.l[i][k] * y[i - k];
            }
            y[i] = s / self.l[i][0];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in 1..=bw.min(n - 1 - i) {
                s -= self.l[i + k][k] * y[i + k];
            }
            y[i] = s / self.l[i][0];
        }
        Ok(y)
    }
}

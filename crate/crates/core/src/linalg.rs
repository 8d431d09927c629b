//! Small dense kernels for the Newton systems.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Dense {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
    }

    pub fn max_diag(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i).abs()).fold(0.0, f64::max)
    }
}

/// Solves `A x = b` for symmetric positive definite `A` by Cholesky.
/// Returns `None` when a pivot is not positive.
pub(crate) fn cholesky_solve(a: &Dense, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.n;
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let d = math::sqrt(d);
        l[j * n + j] = d;
        for i in (j + 1)..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[i * n + k] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            y[i] -= l[k * n + i] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    Some(y)
}

/// Cholesky with growing diagonal regularization on failure.
pub(crate) fn regularized_solve(a: &Dense, b: &[f64]) -> Option<Vec<f64>> {
    if let Some(x) = cholesky_solve(a, b) {
        return Some(x);
    }
    let scale = a.max_diag().max(1e-300);
    let mut delta = 1e-14 * scale;
    for _ in 0..12 {
        let mut r = a.clone();
        for i in 0..a.n {
            r.add(i, i, delta);
        }
        if let Some(x) = cholesky_solve(&r, b) {
            return Some(x);
        }
        delta *= 100.0;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_spd_system() {
        let mut a = Dense::zeros(3);
        let m = [[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]];
        for (i, row) in m.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                a.add(i, j, v);
            }
        }
        let b = [1.0, -2.0, 0.5];
        let x = cholesky_solve(&a, &b).unwrap();
        for i in 0..3 {
            let r: f64 = (0..3).map(|j| m[i][j] * x[j]).sum::<f64>() - b[i];
            assert!(r.abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_indefinite_and_regularizes_singular() {
        let mut a = Dense::zeros(2);
        a.add(0, 0, 1.0);
        a.add(1, 1, -1.0);
        assert!(cholesky_solve(&a, &[1.0, 1.0]).is_none());
        let mut s = Dense::zeros(2);
        s.add(0, 0, 1.0);
        assert!(regularized_solve(&s, &[1.0, 0.0]).is_some());
    }
}

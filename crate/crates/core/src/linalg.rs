//! Fixed-capacity square matrices for n <= 3.
//!
//! Inversion goes through the adjugate and the determinant, which is exact
//! enough at these sizes and keeps the crate free of a general solver.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallMatrix {
    n: usize,
    a: [[f64; MAX_DIM]; MAX_DIM],
}

impl SmallMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&n), "SmallMatrix supports 1 <= n <= 3");
        Self {
            n,
            a: [[0.0; MAX_DIM]; MAX_DIM],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i][i] = 1.0;
        }
        m
    }

    /// Builds from row slices; panics on ragged or oversized input.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "row {i} has wrong length");
            m.a[i][..n].copy_from_slice(row);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.n && j < self.n);
        self.a[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(i < self.n && j < self.n);
        self.a[i][j] = v;
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut m = *self;
        for i in 0..self.n {
            for j in 0..self.n {
                m.a[i][j] *= s;
            }
        }
        m
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.a[i][..self.n].to_vec()).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.a[i][j] == self.a[j][i]))
    }

    pub fn determinant(&self) -> f64 {
        let a = &self.a;
        match self.n {
            1 => a[0][0],
            2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
            _ => {
                a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                    + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
            }
        }
    }

    pub fn adjugate(&self) -> Self {
        let a = &self.a;
        let mut m = Self::zeros(self.n);
        match self.n {
            1 => m.a[0][0] = 1.0,
            2 => {
                m.a[0][0] = a[1][1];
                m.a[0][1] = -a[0][1];
                m.a[1][0] = -a[1][0];
                m.a[1][1] = a[0][0];
            }
            _ => {
                // adj(A)[j][i] = cofactor(i, j)
                for i in 0..3 {
                    for j in 0..3 {
                        let (r0, r1) = other_two(i);
                        let (c0, c1) = other_two(j);
                        let minor = a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0];
                        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                        m.a[j][i] = sign * minor;
                    }
                }
            }
        }
        m
    }

    pub fn inverse(&self) -> Result<Self> {
        let det = self.determinant();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::SingularMetric(det));
        }
        Ok(self.adjugate().scaled(1.0 / det))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut m = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m.a[i][j] = (0..self.n).map(|k| self.a[i][k] * other.a[k][j]).sum();
            }
        }
        m
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.a[i][i]).sum()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.a[i][j] * v[j]).sum())
            .collect()
    }

    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        let w = self.mul_vec(v);
        v.iter().zip(&w).map(|(x, y)| x * y).sum()
    }

    /// Leading principal minors, used as a Sylvester positivity check.
    pub fn leading_minors(&self) -> Vec<f64> {
        (1..=self.n)
            .map(|k| {
                let mut sub = Self::zeros(k);
                for i in 0..k {
                    sub.a[i][..k].copy_from_slice(&self.a[i][..k]);
                }
                sub.determinant()
            })
            .collect()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.is_symmetric() && self.leading_minors().iter().all(|&m| m > 0.0)
    }
}

fn other_two(i: usize) -> (usize, usize) {
    match i {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_times_matrix_is_identity() {
        let m = SmallMatrix::from_rows(&[&[2.0, 0.5, 0.1], &[0.5, 3.0, -0.4], &[0.1, -0.4, 1.5]]);
        let inv = m.inverse().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let s: f64 = (0..3).map(|k| m.get(i, k) * inv.get(k, j)).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-14, "({i},{j}) = {s}");
            }
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let m = SmallMatrix::from_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert!(matches!(m.inverse(), Err(Error::SingularMetric(_))));
    }

    #[test]
    fn two_by_two_determinant() {
        let m = SmallMatrix::from_rows(&[&[4.0, 2.0], &[2.0, 4.0]]);
        assert_eq!(m.determinant(), 12.0);
        assert!(m.is_positive_definite());
    }
}

//! Dense matrices of dimension at most 3, just enough linear algebra for
//! derivative cocycles: products, determinants, and singular values through
//! a closed-form symmetric eigensolve of J^T J.
//!
//! The smallest eigenvalue of J^T J suffers catastrophic cancellation when
//! the condition number is large, so singular values are recovered
//! largest-first and the last one is rebuilt from |det J| / (product of the
//! others), which keeps every value at full relative accuracy.

use crate::error::{input, Error, Result};

pub const MAX_DIM: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat {
    pub d: usize,
    a: [[f64; MAX_DIM]; MAX_DIM],
}

impl Mat {
    pub fn zero(d: usize) -> Mat {
        assert!(d >= 1 && d <= MAX_DIM);
        Mat { d, a: [[0.0; MAX_DIM]; MAX_DIM] }
    }

    pub fn identity(d: usize) -> Mat {
        let mut m = Mat::zero(d);
        for i in 0..d {
            m.a[i][i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Mat> {
        let d = rows.len();
        if d == 0 || d > MAX_DIM {
            return input(format!("matrix dimension must be 1..=3, got {d}"));
        }
        let mut m = Mat::zero(d);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != d {
                return input(format!("row {i} has length {}, expected {d}", r.len()));
            }
            for (j, &v) in r.iter().enumerate() {
                if !v.is_finite() {
                    return input(format!("matrix entry ({i},{j}) is not finite"));
                }
                m.a[i][j] = v;
            }
        }
        Ok(m)
    }

    pub fn diagonal(entries: &[f64]) -> Mat {
        let d = entries.len();
        let mut m = Mat::zero(d);
        for i in 0..d {
            m.a[i][i] = entries[i];
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i][j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i][j] = v;
    }

    pub fn is_diagonal(&self) -> bool {
        for i in 0..self.d {
            for j in 0..self.d {
                if i != j && self.a[i][j] != 0.0 {
                    return false;
                }
            }
        }
        true
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.d, other.d);
        let d = self.d;
        let mut out = Mat::zero(d);
        for i in 0..d {
            for j in 0..d {
                let mut s = 0.0;
                for k in 0..d {
                    s += self.a[i][k] * other.a[k][j];
                }
                out.a[i][j] = s;
            }
        }
        out
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.d, x.len());
        (0..self.d)
            .map(|i| (0..self.d).map(|k| self.a[i][k] * x[k]).sum())
            .collect()
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zero(self.d);
        for i in 0..self.d {
            for j in 0..self.d {
                out.a[i][j] = self.a[j][i];
            }
        }
        out
    }

    pub fn det(&self) -> f64 {
        let a = &self.a;
        match self.d {
            1 => a[0][0],
            2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
            3 => {
                a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                    - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                    + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
            }
            _ => unreachable!(),
        }
    }

    /// Inverse via adjugate; errors when the determinant vanishes.
    pub fn inverse(&self) -> Result<Mat> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Domain("singular matrix has no inverse".into()));
        }
        let a = &self.a;
        let mut out = Mat::zero(self.d);
        match self.d {
            1 => out.a[0][0] = 1.0 / det,
            2 => {
                out.a[0][0] = a[1][1] / det;
                out.a[0][1] = -a[0][1] / det;
                out.a[1][0] = -a[1][0] / det;
                out.a[1][1] = a[0][0] / det;
            }
            3 => {
                for i in 0..3 {
                    for j in 0..3 {
                        let (r0, r1) = match i {
                            0 => (1, 2),
                            1 => (0, 2),
                            _ => (0, 1),
                        };
                        let (c0, c1) = match j {
                            0 => (1, 2),
                            1 => (0, 2),
                            _ => (0, 1),
                        };
                        let minor = a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0];
                        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                        // adjugate transposes the cofactor matrix
                        out.a[j][i] = sign * minor / det;
                    }
                }
            }
            _ => unreachable!(),
        }
        Ok(out)
    }

    /// Singular values, sorted in nonincreasing order.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        let d = self.d;
        let det = self.det().abs();
        if d == 1 {
            return Ok(vec![self.a[0][0].abs()]);
        }
        // Gram matrix B = J^T J, symmetric positive semidefinite.
        let b = self.transpose().mul(self);
        let mut sv = match d {
            2 => {
                let (p, q, r) = (b.a[0][0], b.a[0][1], b.a[1][1]);
                let tr = p + r;
                let disc = ((p - r) * (p - r) + 4.0 * q * q).sqrt();
                let l1 = 0.5 * (tr + disc);
                let s1 = l1.max(0.0).sqrt();
                let s2 = if s1 > 0.0 { det / s1 } else { 0.0 };
                vec![s1, s2]
            }
            3 => {
                let eigs = sym3_eigenvalues(&b);
                let s1 = eigs[0].max(0.0).sqrt();
                let s2 = eigs[1].max(0.0).sqrt();
                let s3 = if s1 * s2 > 0.0 { det / (s1 * s2) } else { 0.0 };
                vec![s1, s2, s3]
            }
            _ => unreachable!(),
        };
        // Guard against rounding producing a tiny inversion in the order.
        for i in 1..sv.len() {
            if sv[i] > sv[i - 1] {
                sv.swap(i - 1, i);
            }
        }
        if sv.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("singular values overflowed f64".into()));
        }
        Ok(sv)
    }
}

/// Eigenvalues of a symmetric 3x3 matrix, descending, by the trigonometric
/// (Cardano) method.
fn sym3_eigenvalues(b: &Mat) -> [f64; 3] {
    let a = &b.a;
    let p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    if p1 == 0.0 {
        let mut e = [a[0][0], a[1][1], a[2][2]];
        e.sort_by(|x, y| y.partial_cmp(x).unwrap());
        return e;
    }
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut bn = Mat::zero(3);
    for i in 0..3 {
        for j in 0..3 {
            bn.a[i][j] = (a[i][j] - if i == j { q } else { 0.0 }) / p;
        }
    }
    let r = (bn.det() / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let e2 = 3.0 * q - e1 - e3;
    [e1, e2, e3]
}

//! Linear algebra of four-dimensional Lorentz-Minkowski space with
//! signature (-,+,+,+).

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{GeometryError, Result};

/// Default absolute tolerance for lightlike membership.
pub const LIGHTLIKE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MinkowskiVec(pub [f64; 4]);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Causal {
    Timelike,
    Spacelike,
    Lightlike,
    Zero,
}

impl MinkowskiVec {
    pub const fn new(x0: f64, x1: f64, x2: f64, x3: f64) -> Self {
        Self([x0, x1, x2, x3])
    }

    pub fn time(&self) -> f64 {
        self.0[0]
    }

    pub fn inner(&self, other: &Self) -> f64 {
        inner(self, other)
    }

    pub fn norm_sq(&self) -> f64 {
        inner(self, self)
    }

    /// Causal character; `tol` is the absolute band around zero for
    /// `<v,v>` and for the Euclidean size of the zero vector.
    pub fn classify(&self, tol: f64) -> Causal {
        if self.0.iter().all(|c| c.abs() <= tol) {
            return Causal::Zero;
        }
        let q = self.norm_sq();
        if q.abs() <= tol {
            Causal::Lightlike
        } else if q < 0.0 {
            Causal::Timelike
        } else {
            Causal::Spacelike
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_vector(&self) -> Vector4<f64> {
        Vector4::from(self.0)
    }

    pub fn from_vector(v: &Vector4<f64>) -> Self {
        Self([v[0], v[1], v[2], v[3]])
    }

    pub fn transformed(&self, m: &Matrix4<f64>) -> Self {
        Self::from_vector(&(m * self.to_vector()))
    }
}

impl Add for MinkowskiVec {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl Sub for MinkowskiVec {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

impl Neg for MinkowskiVec {
    type Output = Self;
    fn neg(self) -> Self {
        Self(self.0.map(|c| -c))
    }
}

impl Mul<f64> for MinkowskiVec {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self(self.0.map(|c| c * s))
    }
}

/// `<a,b> = -a0 b0 + a1 b1 + a2 b2 + a3 b3`.
pub fn inner(a: &MinkowskiVec, b: &MinkowskiVec) -> f64 {
    -a.0[0] * b.0[0] + a.0[1] * b.0[1] + a.0[2] * b.0[2] + a.0[3] * b.0[3]
}

pub fn in_future_lightcone(v: &MinkowskiVec, tol: f64) -> bool {
    v.norm_sq().abs() <= tol && v.time() > 0.0
}

/// The signature matrix diag(-1, 1, 1, 1).
pub fn signature() -> Matrix4<f64> {
    Matrix4::from_diagonal(&Vector4::new(-1.0, 1.0, 1.0, 1.0))
}

/// Lorentz transform `B` with `B (-1,0,0,0) = u`, for a unit timelike `u`
/// with negative time component.
///
/// The first column is `-u`; the remaining columns come from Minkowski
/// Gram-Schmidt over the canonical spatial basis, each step taking the
/// candidate with the largest residual norm.
pub fn boost_to(u: &MinkowskiVec) -> Result<Matrix4<f64>> {
    let q = u.norm_sq();
    if (q + 1.0).abs() > 1e-10 || u.time() >= 0.0 {
        return Err(GeometryError::NotUnitTimelike {
            inner: q,
            time: u.time(),
        });
    }
    let mut basis = vec![-*u];
    let mut remaining: Vec<MinkowskiVec> = (1..4)
        .map(|k| {
            let mut e = [0.0; 4];
            e[k] = 1.0;
            MinkowskiVec(e)
        })
        .collect();
    while !remaining.is_empty() {
        let residuals: Vec<MinkowskiVec> = remaining
            .iter()
            .map(|e| {
                basis.iter().fold(*e, |acc, b| {
                    acc - *b * (inner(e, b) / inner(b, b))
                })
            })
            .collect();
        let (pick, _) = residuals
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (k, r)| {
                let n = r.norm_sq();
                if n > best.1 {
                    (k, n)
                } else {
                    best
                }
            });
        let r = residuals[pick];
        basis.push(r * (1.0 / r.norm_sq().sqrt()));
        remaining.remove(pick);
    }
    let mut m = Matrix4::zeros();
    for (j, b) in basis.iter().enumerate() {
        for i in 0..4 {
            m[(i, j)] = b.0[i];
        }
    }
    Ok(m)
}

//! Orthonormal real spherical harmonics up to degree 4, written as
//! polynomials in the Cartesian coordinates of the unit sphere.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use crate::jet::Jet2;

pub const MAX_DEGREE: u32 = 4;

/// Arithmetic shared by plain reals and jets.
pub trait Scalar: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Mul<f64, Output = Self> {
    fn from_f64(x: f64) -> Self;
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
}

impl Scalar for Jet2 {
    fn from_f64(x: f64) -> Self {
        Jet2::constant(x)
    }
}

/// `Y_lm(x, y, z)` with `m < 0` the sine family and `m > 0` the cosine
/// family. Returns `None` for `l > 4` or `|m| > l`.
pub fn real_sh<T: Scalar>(l: u32, m: i32, x: T, y: T, z: T) -> Option<T> {
    if l > MAX_DEGREE || m.unsigned_abs() > l {
        return None;
    }
    let r2 = x * x + y * y + z * z;
    let c = |k: f64| k.sqrt();
    let v = match (l, m) {
        (0, 0) => T::from_f64(0.5 * c(1.0 / PI)),
        (1, -1) => y * c(3.0 / (4.0 * PI)),
        (1, 0) => z * c(3.0 / (4.0 * PI)),
        (1, 1) => x * c(3.0 / (4.0 * PI)),
        (2, -2) => x * y * (0.5 * c(15.0 / PI)),
        (2, -1) => y * z * (0.5 * c(15.0 / PI)),
        (2, 0) => (z * z * 3.0 - r2) * (0.25 * c(5.0 / PI)),
        (2, 1) => x * z * (0.5 * c(15.0 / PI)),
        (2, 2) => (x * x - y * y) * (0.25 * c(15.0 / PI)),
        (3, -3) => y * (x * x * 3.0 - y * y) * (0.25 * c(35.0 / (2.0 * PI))),
        (3, -2) => x * y * z * (0.5 * c(105.0 / PI)),
        (3, -1) => y * (z * z * 5.0 - r2) * (0.25 * c(21.0 / (2.0 * PI))),
        (3, 0) => z * (z * z * 5.0 - r2 * 3.0) * (0.25 * c(7.0 / PI)),
        (3, 1) => x * (z * z * 5.0 - r2) * (0.25 * c(21.0 / (2.0 * PI))),
        (3, 2) => z * (x * x - y * y) * (0.25 * c(105.0 / PI)),
        (3, 3) => x * (x * x - y * y * 3.0) * (0.25 * c(35.0 / (2.0 * PI))),
        (4, -4) => x * y * (x * x - y * y) * (0.75 * c(35.0 / PI)),
        (4, -3) => y * z * (x * x * 3.0 - y * y) * (0.75 * c(35.0 / (2.0 * PI))),
        (4, -2) => x * y * (z * z * 7.0 - r2) * (0.75 * c(5.0 / PI)),
        (4, -1) => y * z * (z * z * 7.0 - r2 * 3.0) * (0.75 * c(5.0 / (2.0 * PI))),
        (4, 0) => {
            let z2 = z * z;
            (z2 * z2 * 35.0 - z2 * r2 * 30.0 + r2 * r2 * 3.0) * (3.0 / 16.0 * c(1.0 / PI))
        }
        (4, 1) => x * z * (z * z * 7.0 - r2 * 3.0) * (0.75 * c(5.0 / (2.0 * PI))),
        (4, 2) => (x * x - y * y) * (z * z * 7.0 - r2) * (0.375 * c(5.0 / PI)),
        (4, 3) => x * z * (x * x - y * y * 3.0) * (0.75 * c(35.0 / (2.0 * PI))),
        (4, 4) => {
            let (x2, y2) = (x * x, y * y);
            (x2 * (x2 - y2 * 3.0) - y2 * (x2 * 3.0 - y2)) * (3.0 / 16.0 * c(35.0 / PI))
        }
        _ => unreachable!(),
    };
    Some(v)
}

/// One `(degree, order, amplitude)` triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(u32, i32, f64)", into = "(u32, i32, f64)")]
pub struct HarmonicTerm {
    pub l: u32,
    pub m: i32,
    pub amplitude: f64,
}

impl From<(u32, i32, f64)> for HarmonicTerm {
    fn from((l, m, amplitude): (u32, i32, f64)) -> Self {
        Self { l, m, amplitude }
    }
}

impl From<HarmonicTerm> for (u32, i32, f64) {
    fn from(t: HarmonicTerm) -> Self {
        (t.l, t.m, t.amplitude)
    }
}

/// Real spherical-harmonic expansion of a function on the sphere;
/// serialized as a JSON array of `[l, m, amplitude]` triples.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HarmonicSpec {
    pub terms: Vec<HarmonicTerm>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpecError {
    #[error("invalid harmonic ({l}, {m})")]
    InvalidIndex { l: u32, m: i32 },
    #[error("non-finite amplitude for ({l}, {m})")]
    NonFinite { l: u32, m: i32 },
}

impl HarmonicSpec {
    pub fn new(terms: impl IntoIterator<Item = (u32, i32, f64)>) -> Self {
        Self {
            terms: terms.into_iter().map(HarmonicTerm::from).collect(),
        }
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        for t in &self.terms {
            if t.l > MAX_DEGREE || t.m.unsigned_abs() > t.l {
                return Err(SpecError::InvalidIndex { l: t.l, m: t.m });
            }
            if !t.amplitude.is_finite() {
                return Err(SpecError::NonFinite { l: t.l, m: t.m });
            }
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.terms.iter().all(|t| t.amplitude == 0.0)
    }

    pub fn eval<T: Scalar>(&self, x: T, y: T, z: T) -> T {
        self.terms.iter().fold(T::from_f64(0.0), |acc, t| {
            match real_sh(t.l, t.m, x, y, z) {
                Some(y_lm) => acc + y_lm * t.amplitude,
                None => acc,
            }
        })
    }

    /// L2 norm over the unit sphere (coefficients are orthonormal).
    pub fn l2_norm(&self) -> f64 {
        let mut merged = std::collections::BTreeMap::new();
        for t in &self.terms {
            *merged.entry((t.l, t.m)).or_insert(0.0) += t.amplitude;
        }
        merged.values().map(|a: &f64| a * a).sum::<f64>().sqrt()
    }
}

/// All `(l, m)` with `lo <= l <= hi`, in increasing `l` then `m`.
pub fn index_range(lo: u32, hi: u32) -> Vec<(u32, i32)> {
    (lo..=hi.min(MAX_DEGREE))
        .flat_map(|l| (-(l as i32)..=l as i32).map(move |m| (l, m)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_legendre;

    #[test]
    fn orthonormal_up_to_degree_four() {
        // Gauss-Legendre in cos(theta) times uniform phi integrates
        // polynomials of degree <= 8 exactly at these sizes.
        let (nodes, weights) = gauss_legendre(12);
        let n_phi = 24;
        let idx = index_range(0, 4);
        let mut gram = vec![vec![0.0; idx.len()]; idx.len()];
        for (z, w) in nodes.iter().zip(weights.iter()) {
            let s = (1.0 - z * z).sqrt();
            for k in 0..n_phi {
                let phi = 2.0 * PI * (k as f64 + 0.5) / n_phi as f64;
                let (x, y) = (s * phi.cos(), s * phi.sin());
                let vals: Vec<f64> =
                    idx.iter().map(|&(l, m)| real_sh(l, m, x, y, *z).unwrap()).collect();
                for i in 0..idx.len() {
                    for j in 0..idx.len() {
                        gram[i][j] += w * 2.0 * PI / n_phi as f64 * vals[i] * vals[j];
                    }
                }
            }
        }
        for i in 0..idx.len() {
            for j in 0..idx.len() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((gram[i][j] - expected).abs() < 1e-12, "{:?} {:?}", idx[i], idx[j]);
            }
        }
    }

    #[test]
    fn spec_json_is_triples() {
        let spec = HarmonicSpec::new([(2, 0, 0.05), (3, -1, -0.01)]);
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(text, "[[2,0,0.05],[3,-1,-0.01]]");
        let back: HarmonicSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        assert!(HarmonicSpec::new([(5, 0, 1.0)]).validate().is_err());
        assert!(HarmonicSpec::new([(2, 3, 1.0)]).validate().is_err());
    }
}

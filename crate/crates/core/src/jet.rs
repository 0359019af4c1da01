//! Bivariate truncated Taylor jets.
//!
//! The order is fixed at 4. The curvature of the metric `II_eta` needs
//! second derivatives of `II_eta`, which itself sits two derivatives above
//! the chart, so four orders of the chart are the minimum that reaches it.
//! Nothing in the pipeline needs more.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::error::{GeometryError, Result};
use crate::minkowski::MinkowskiVec;

pub const ORDER: usize = 4;
const LEN: usize = (ORDER + 1) * (ORDER + 2) / 2;

const fn index(i: usize, j: usize) -> usize {
    let n = i + j;
    n * (n + 1) / 2 + j
}

const FACTORIAL: [f64; ORDER + 1] = [1.0, 1.0, 2.0, 6.0, 24.0];

#[derive(Debug, Clone, Copy, Eq, PartialEq)]
pub enum Axis {
    U,
    V,
}

/// Taylor coefficients `c[i][j] = d^{i+j} f / du^i dv^j / (i! j!)` of a
/// scalar function at a base point, for `i + j <= 4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    coeff: [f64; LEN],
}

impl Default for Jet2 {
    fn default() -> Self {
        Self::zero()
    }
}

impl Jet2 {
    pub const fn zero() -> Self {
        Self { coeff: [0.0; LEN] }
    }

    pub fn constant(value: f64) -> Self {
        let mut j = Self::zero();
        j.coeff[0] = value;
        j
    }

    /// The coordinate function `u` (or `v`) expanded at `value`.
    pub fn lift_variable(axis: Axis, value: f64) -> Self {
        let mut j = Self::constant(value);
        match axis {
            Axis::U => j.coeff[index(1, 0)] = 1.0,
            Axis::V => j.coeff[index(0, 1)] = 1.0,
        }
        j
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut j = Self::zero();
        for n in 0..=ORDER {
            for b in 0..=n {
                j.coeff[index(n - b, b)] = f(n - b, b);
            }
        }
        j
    }

    pub fn value(&self) -> f64 {
        self.coeff[0]
    }

    /// Raw Taylor coefficient; zero outside the stored triangle.
    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        if i + j > ORDER {
            0.0
        } else {
            self.coeff[index(i, j)]
        }
    }

    pub fn set_coeff(&mut self, i: usize, j: usize, value: f64) {
        self.coeff[index(i, j)] = value;
    }

    /// Mixed partial derivative `d^{i+j} f / du^i dv^j` at the base point.
    pub fn partial(&self, i: usize, j: usize) -> Result<f64> {
        if i + j > ORDER {
            return Err(GeometryError::OrderExceeded { order: i + j });
        }
        Ok(FACTORIAL[i] * FACTORIAL[j] * self.coeff[index(i, j)])
    }

    /// Jet of the partial derivative along `axis`. The top-degree
    /// coefficients of the result are unknown and set to zero, so the
    /// result is accurate to one order less than the input.
    pub fn derivative(&self, axis: Axis) -> Self {
        let mut out = Self::zero();
        for n in 0..ORDER {
            for b in 0..=n {
                let a = n - b;
                out.coeff[index(a, b)] = match axis {
                    Axis::U => (a + 1) as f64 * self.coeff[index(a + 1, b)],
                    Axis::V => (b + 1) as f64 * self.coeff[index(a, b + 1)],
                };
            }
        }
        out
    }

    pub fn du(&self) -> Self {
        self.derivative(Axis::U)
    }

    pub fn dv(&self) -> Self {
        self.derivative(Axis::V)
    }

    /// First derivatives at the base point as `[d/du, d/dv]`.
    pub fn gradient(&self) -> [f64; 2] {
        [self.coeff[index(1, 0)], self.coeff[index(0, 1)]]
    }

    /// Evaluates the truncated polynomial at offset `(du, dv)`.
    pub fn eval(&self, du: f64, dv: f64) -> f64 {
        let mut s = 0.0;
        for n in 0..=ORDER {
            for b in 0..=n {
                let a = n - b;
                s += self.coeff[index(a, b)] * du.powi(a as i32) * dv.powi(b as i32);
            }
        }
        s
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            coeff: self.coeff.map(|c| c * s),
        }
    }

    pub fn recip(&self) -> Result<Self> {
        let a0 = self.value();
        if a0 == 0.0 || !a0.is_finite() {
            return Err(GeometryError::DivisionByZeroJet);
        }
        let r = 1.0 / a0;
        Ok(self.compose([r, -r * r, 2.0 * r * r * r, -6.0 * r.powi(4), 24.0 * r.powi(5)]))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        Ok(*self * other.recip()?)
    }

    pub fn apply(&self, f: Analytic) -> Result<Self> {
        let a = self.value();
        let d = match f {
            Analytic::Exp => {
                let e = a.exp();
                [e; 5]
            }
            Analytic::Log => {
                if a <= 0.0 {
                    return Err(GeometryError::DomainError { function: "log", value: a });
                }
                let r = 1.0 / a;
                [a.ln(), r, -r * r, 2.0 * r.powi(3), -6.0 * r.powi(4)]
            }
            Analytic::Sqrt => {
                if a <= 0.0 {
                    return Err(GeometryError::DomainError { function: "sqrt", value: a });
                }
                let s = a.sqrt();
                [
                    s,
                    0.5 / s,
                    -0.25 / (s * a),
                    0.375 / (s * a * a),
                    -0.9375 / (s * a * a * a),
                ]
            }
            Analytic::Sin => {
                let (s, c) = a.sin_cos();
                [s, c, -s, -c, s]
            }
            Analytic::Cos => {
                let (s, c) = a.sin_cos();
                [c, -s, -c, s, c]
            }
            Analytic::Sinh => {
                let (s, c) = (a.sinh(), a.cosh());
                [s, c, s, c, s]
            }
            Analytic::Cosh => {
                let (s, c) = (a.sinh(), a.cosh());
                [c, s, c, s, c]
            }
        };
        Ok(self.compose(d))
    }

    pub fn exp(&self) -> Self {
        self.apply(Analytic::Exp).expect("exp is entire")
    }

    pub fn sin(&self) -> Self {
        self.apply(Analytic::Sin).expect("sin is entire")
    }

    pub fn cos(&self) -> Self {
        self.apply(Analytic::Cos).expect("cos is entire")
    }

    pub fn sinh(&self) -> Self {
        self.apply(Analytic::Sinh).expect("sinh is entire")
    }

    pub fn cosh(&self) -> Self {
        self.apply(Analytic::Cosh).expect("cosh is entire")
    }

    pub fn ln(&self) -> Result<Self> {
        self.apply(Analytic::Log)
    }

    pub fn sqrt(&self) -> Result<Self> {
        self.apply(Analytic::Sqrt)
    }

    /// `f(a0 + h) = sum_k f^(k)(a0) h^k / k!` given the derivative values.
    fn compose(&self, derivs: [f64; ORDER + 1]) -> Self {
        let mut h = *self;
        h.coeff[0] = 0.0;
        let mut out = Self::constant(derivs[0]);
        let mut power = h;
        for (k, d) in derivs.iter().enumerate().skip(1) {
            out += power.scale(d / FACTORIAL[k]);
            if k < ORDER {
                power = power * h;
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeff
            .iter()
            .zip(other.coeff.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Analytic {
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
    Sinh,
    Cosh,
}

impl Add for Jet2 {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        self += o;
        self
    }
}

impl AddAssign for Jet2 {
    fn add_assign(&mut self, o: Self) {
        for (a, b) in self.coeff.iter_mut().zip(o.coeff.iter()) {
            *a += b;
        }
    }
}

impl Sub for Jet2 {
    type Output = Self;
    fn sub(mut self, o: Self) -> Self {
        for (a, b) in self.coeff.iter_mut().zip(o.coeff.iter()) {
            *a -= b;
        }
        self
    }
}

impl Neg for Jet2 {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Mul for Jet2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut out = Self::zero();
        for n in 0..=ORDER {
            for b in 0..=n {
                let a = n - b;
                let mut s = 0.0;
                for a1 in 0..=a {
                    for b1 in 0..=b {
                        s += self.coeff[index(a1, b1)] * o.coeff[index(a - a1, b - b1)];
                    }
                }
                out.coeff[index(a, b)] = s;
            }
        }
        out
    }
}

impl Mul<f64> for Jet2 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        self.scale(s)
    }
}

impl Add<f64> for Jet2 {
    type Output = Self;
    fn add(mut self, s: f64) -> Self {
        self.coeff[0] += s;
        self
    }
}

impl Sub<f64> for Jet2 {
    type Output = Self;
    fn sub(mut self, s: f64) -> Self {
        self.coeff[0] -= s;
        self
    }
}

/// Jets of the four components of a map into Minkowski space.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JetVec4(pub [Jet2; 4]);

impl JetVec4 {
    pub fn constant(v: &MinkowskiVec) -> Self {
        Self(v.0.map(Jet2::constant))
    }

    pub fn value(&self) -> MinkowskiVec {
        MinkowskiVec(self.0.map(|c| c.value()))
    }

    pub fn derivative(&self, axis: Axis) -> Self {
        Self(self.0.map(|c| c.derivative(axis)))
    }

    pub fn du(&self) -> Self {
        self.derivative(Axis::U)
    }

    pub fn dv(&self) -> Self {
        self.derivative(Axis::V)
    }

    /// Minkowski inner product, evaluated in jet arithmetic.
    pub fn inner(&self, o: &Self) -> Jet2 {
        -(self.0[0] * o.0[0]) + self.0[1] * o.0[1] + self.0[2] * o.0[2] + self.0[3] * o.0[3]
    }

    pub fn scale(&self, s: &Jet2) -> Self {
        Self(self.0.map(|c| c * *s))
    }

    pub fn scale_f(&self, s: f64) -> Self {
        Self(self.0.map(|c| c.scale(s)))
    }

    /// Applies a constant linear map (e.g. a Lorentz transform).
    pub fn transform(&self, m: &nalgebra::Matrix4<f64>) -> Self {
        Self(std::array::from_fn(|i| {
            (0..4).fold(Jet2::zero(), |acc, k| acc + self.0[k].scale(m[(i, k)]))
        }))
    }
}

impl Add for JetVec4 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl Sub for JetVec4 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

impl Neg for JetVec4 {
    type Output = Self;
    fn neg(self) -> Self {
        Self(self.0.map(|c| -c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_jet(rng: &mut ChaCha8Rng, constant: f64) -> Jet2 {
        let mut j = Jet2::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        j.coeff[0] = constant;
        j
    }

    #[test]
    fn lifted_variables() {
        let u = Jet2::lift_variable(Axis::U, 0.3);
        assert_eq!(u.coeff(0, 0), 0.3);
        assert_eq!(u.coeff(1, 0), 1.0);
        assert_eq!(u.coeff(0, 1), 0.0);
        let v = Jet2::lift_variable(Axis::V, -1.0);
        assert_eq!(v.coeff(0, 0), -1.0);
        assert_eq!(v.coeff(0, 1), 1.0);
        let uv = Jet2::lift_variable(Axis::U, 0.0) * Jet2::lift_variable(Axis::V, 0.0);
        assert_eq!(uv.coeff(1, 1), 1.0);
    }

    #[test]
    fn square_of_u() {
        let u = Jet2::lift_variable(Axis::U, 2.0);
        let sq = u * u;
        assert_eq!(sq.coeff(0, 0), 4.0);
        assert_eq!(sq.coeff(1, 0), 4.0);
        assert_eq!(sq.coeff(2, 0), 1.0);
        assert_eq!(sq.coeff(3, 0), 0.0);
    }

    #[test]
    fn self_division_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let c0 = rng.gen_range(0.5..2.0);
            let a = random_jet(&mut rng, c0);
            let q = a.checked_div(&a).unwrap();
            assert!(q.max_abs_diff(&Jet2::constant(1.0)) < 1e-12);
        }
        assert_eq!(
            Jet2::lift_variable(Axis::U, 0.0).recip(),
            Err(GeometryError::DivisionByZeroJet)
        );
    }

    #[test]
    fn product_matches_finite_differences() {
        // Central differences of the evaluated product at step 1e-4.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_jet(&mut rng, 0.7);
        let b = random_jet(&mut rng, -0.4);
        let p = a * b;
        let f = |x: f64, y: f64| a.eval(x, y) * b.eval(x, y);
        let h = 1e-4;
        let fu = (f(h, 0.0) - f(-h, 0.0)) / (2.0 * h);
        let fv = (f(0.0, h) - f(0.0, -h)) / (2.0 * h);
        let fuu = (f(h, 0.0) - 2.0 * f(0.0, 0.0) + f(-h, 0.0)) / (h * h);
        let fuv = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);
        let fvv = (f(0.0, h) - 2.0 * f(0.0, 0.0) + f(0.0, -h)) / (h * h);
        assert!((p.partial(1, 0).unwrap() - fu).abs() < 1e-6);
        assert!((p.partial(0, 1).unwrap() - fv).abs() < 1e-6);
        assert!((p.partial(2, 0).unwrap() - fuu).abs() < 1e-6);
        assert!((p.partial(1, 1).unwrap() - fuv).abs() < 1e-6);
        assert!((p.partial(0, 2).unwrap() - fvv).abs() < 1e-6);
    }

    #[test]
    fn cosh_series() {
        let c = Jet2::lift_variable(Axis::U, 0.0).cosh();
        let expected = [1.0, 0.0, 0.5, 0.0, 1.0 / 24.0];
        for (k, e) in expected.iter().enumerate() {
            assert!((c.coeff(k, 0) - e).abs() < 1e-15);
        }
        assert!((c.partial(4, 0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn partials() {
        let u = Jet2::lift_variable(Axis::U, 0.0);
        let v = Jet2::lift_variable(Axis::V, 0.0);
        let j = u * u * v * v;
        assert_eq!(j.partial(2, 2).unwrap(), 4.0);
        let a = Jet2::constant(3.5);
        assert_eq!(a.partial(0, 0).unwrap(), 3.5);
        assert!(matches!(a.partial(3, 2), Err(GeometryError::OrderExceeded { order: 5 })));
    }

    #[test]
    fn inverse_pairs_and_pythagoras() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let c0 = rng.gen_range(0.2..3.0);
            let a = random_jet(&mut rng, c0);
            let back = a.ln().unwrap().exp();
            assert!(back.max_abs_diff(&a) < 1e-12 * (1.0 + a.value().abs()));
            let s = a.sqrt().unwrap();
            assert!((s * s).max_abs_diff(&a) < 1e-12);
            let one = a.sin() * a.sin() + a.cos() * a.cos();
            assert!(one.max_abs_diff(&Jet2::constant(1.0)) < 1e-12);
            let one_h = a.cosh() * a.cosh() - a.sinh() * a.sinh();
            assert!(one_h.max_abs_diff(&Jet2::constant(1.0)) < 1e-10);
        }
        assert!(Jet2::constant(-1.0).ln().is_err());
        assert!(Jet2::constant(0.0).sqrt().is_err());
    }

    #[test]
    fn derivative_drops_one_order() {
        let u = Jet2::lift_variable(Axis::U, 0.5);
        let v = Jet2::lift_variable(Axis::V, 0.2);
        let f = (u * v).sin();
        let fu = f.du();
        // d/du sin(uv) = v cos(uv)
        let expected = v * (u * v).cos();
        for n in 0..ORDER {
            for b in 0..=n {
                assert!((fu.coeff(n - b, b) - expected.coeff(n - b, b)).abs() < 1e-14);
            }
        }
        assert_eq!(fu.coeff(4, 0), 0.0);
    }
}

//! Intrinsic curvature of jet-valued metrics and the curvature calculus
//! of `A_eta`: covariant derivative, Codazzi residual, the difference
//! tensor between the Levi-Civita connections of `II_eta` and of the
//! induced metric, and the relation between `K`, `K^eta` and `det A_eta`.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};
use crate::jet::Jet2;
use crate::surface::{jm_det, jm_values, Frame, SurfacePatch, DEGENERACY_THRESHOLD};

/// Symmetric 2x2 metric with jet entries `E`, `F`, `G`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricField {
    pub e: Jet2,
    pub f: Jet2,
    pub g: Jet2,
}

impl MetricField {
    pub fn new(e: Jet2, f: Jet2, g: Jet2) -> Self {
        Self { e, f, g }
    }

    pub fn entry(&self, a: usize, b: usize) -> Jet2 {
        match (a, b) {
            (0, 0) => self.e,
            (1, 1) => self.g,
            _ => self.f,
        }
    }

    pub fn values(&self) -> Matrix2<f64> {
        Matrix2::new(self.e.value(), self.f.value(), self.f.value(), self.g.value())
    }

    pub fn det(&self) -> Jet2 {
        self.e * self.g - self.f * self.f
    }

    /// Positive definite at the base point.
    pub fn is_riemannian(&self) -> bool {
        self.e.value() > 0.0 && self.det().value() > 0.0
    }

    pub fn inverse(&self) -> Result<MetricField> {
        let r = self.det().recip().map_err(|_| GeometryError::DegenerateMetric)?;
        Ok(MetricField::new(self.g * r, -(self.f * r), self.e * r))
    }
}

/// Gauss curvature of a Riemannian metric from `E, F, G` and their
/// derivatives up to second order (Brioschi's formula).
pub fn brioschi_curvature(m: &MetricField) -> Result<f64> {
    if !m.is_riemannian() {
        return Err(GeometryError::DegenerateMetric);
    }
    let p = |j: &Jet2, a: usize, b: usize| j.partial(a, b);
    let (e, f, g) = (m.e.value(), m.f.value(), m.g.value());
    let (e_u, e_v, e_vv) = (p(&m.e, 1, 0)?, p(&m.e, 0, 1)?, p(&m.e, 0, 2)?);
    let (f_u, f_v, f_uv) = (p(&m.f, 1, 0)?, p(&m.f, 0, 1)?, p(&m.f, 1, 1)?);
    let (g_u, g_v, g_uu) = (p(&m.g, 1, 0)?, p(&m.g, 0, 1)?, p(&m.g, 2, 0)?);
    let det3 = |r: [[f64; 3]; 3]| {
        r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
            - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
    };
    let first = det3([
        [-0.5 * e_vv + f_uv - 0.5 * g_uu, 0.5 * e_u, f_u - 0.5 * e_v],
        [f_v - 0.5 * g_u, e, f],
        [0.5 * g_v, f, g],
    ]);
    let second = det3([[0.0, 0.5 * e_v, 0.5 * g_u], [0.5 * e_v, e, f], [0.5 * g_u, f, g]]);
    let w = e * g - f * f;
    Ok((first - second) / (w * w))
}

/// Levi-Civita symbols `Gamma[c][a][b]` as jets (one order below the
/// derivatives of the metric).
pub fn christoffels(m: &MetricField) -> Result<[[[Jet2; 2]; 2]; 2]> {
    let inv = m.inverse()?;
    let dg: [[[Jet2; 2]; 2]; 2] = std::array::from_fn(|d| {
        std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                let x = m.entry(a, b);
                if d == 0 {
                    x.du()
                } else {
                    x.dv()
                }
            })
        })
    });
    // lowered[d][a][b] = (d_a g_db + d_b g_da - d_d g_ab) / 2
    let lowered: [[[Jet2; 2]; 2]; 2] = std::array::from_fn(|d| {
        std::array::from_fn(|a| {
            std::array::from_fn(|b| (dg[a][d][b] + dg[b][d][a] - dg[d][a][b]) * 0.5)
        })
    });
    Ok(std::array::from_fn(|c| {
        std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                inv.entry(c, 0) * lowered[0][a][b] + inv.entry(c, 1) * lowered[1][a][b]
            })
        })
    }))
}

/// `(nabla_a A)^c_b` at the base point, stored as `[a][c][b]`.
pub fn covariant_shape_derivative(frame: &Frame) -> Result<[[[f64; 2]; 2]; 2]> {
    frame_order(frame, 3)?;
    let gamma = christoffels(&frame.induced_metric())?;
    let gv = |c: usize, a: usize, b: usize| gamma[c][a][b].value();
    let a = frame.shape_values();
    let mut out = [[[0.0; 2]; 2]; 2];
    for (dir, slot) in out.iter_mut().enumerate() {
        for c in 0..2 {
            for b in 0..2 {
                let mut x = frame.shape[c][b].gradient()[dir];
                for d in 0..2 {
                    x += gv(c, dir, d) * a[(d, b)] - a[(c, d)] * gv(d, dir, b);
                }
                slot[c][b] = x;
            }
        }
    }
    Ok(out)
}

fn frame_order(frame: &Frame, required: usize) -> Result<()> {
    if frame.order < required {
        Err(GeometryError::InsufficientOrder {
            required,
            available: frame.order,
        })
    } else {
        Ok(())
    }
}

/// `|(nabla_u A) d_v - (nabla_v A) d_u|` in the induced metric.
pub fn codazzi_residual(patch: &SurfacePatch, u: f64, v: f64) -> Result<f64> {
    let frame = Frame::new(patch, u, v)?;
    codazzi_from_frame(&frame)
}

pub fn codazzi_from_frame(frame: &Frame) -> Result<f64> {
    let nabla = covariant_shape_derivative(frame)?;
    let r = Vector2::new(nabla[0][0][1] - nabla[1][0][0], nabla[0][1][1] - nabla[1][1][0]);
    let g = jm_values(&frame.metric);
    Ok((r.transpose() * g * r)[0].max(0.0).sqrt())
}

/// `L[a][b][c]`: chart components of `L(d_a, d_b) = L^c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DifferenceTensor {
    pub l: [[[f64; 2]; 2]; 2],
}

impl DifferenceTensor {
    /// `II_eta(L(d_a, d_b), d_c)`.
    pub fn lowered(&self, ii: &Matrix2<f64>) -> [[[f64; 2]; 2]; 2] {
        std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                std::array::from_fn(|c| (0..2).map(|d| ii[(c, d)] * self.l[a][b][d]).sum())
            })
        })
    }

    /// Largest deviation of the lowered tensor from total symmetry.
    pub fn symmetry_defect(&self, ii: &Matrix2<f64>) -> f64 {
        let low = self.lowered(ii);
        let mut worst: f64 = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    let x = low[a][b][c];
                    for y in [low[b][a][c], low[a][c][b], low[c][b][a]] {
                        worst = worst.max((x - y).abs());
                    }
                }
            }
        }
        worst
    }

    /// `II_eta(L, L)`, the full contraction with `II_eta`.
    pub fn ii_norm_sq(&self, ii: &Matrix2<f64>, ii_inv: &Matrix2<f64>) -> f64 {
        let mut s = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        for c in 0..2 {
                            for d in 0..2 {
                                s += ii_inv[(a, i)]
                                    * ii_inv[(b, j)]
                                    * ii[(c, d)]
                                    * self.l[a][b][c]
                                    * self.l[i][j][d];
                            }
                        }
                    }
                }
            }
        }
        s
    }

    /// `II_eta`-trace of `L`, the vector `sum ii^{ab} L(d_a, d_b)`.
    pub fn trace(&self, ii_inv: &Matrix2<f64>) -> Vector2<f64> {
        let mut t = Vector2::zeros();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    t[c] += ii_inv[(a, b)] * self.l[a][b][c];
                }
            }
        }
        t
    }

    pub fn sup_abs(&self) -> f64 {
        self.l.iter().flatten().flatten().fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

fn check_nondegenerate(frame: &Frame, threshold: f64) -> Result<f64> {
    let d = frame.det_shape().value();
    if d.abs() < threshold {
        return Err(GeometryError::DegeneracyViolation {
            u: frame.at.0,
            v: frame.at.1,
            det: d,
        });
    }
    Ok(d)
}

/// `L(X, Y) = A_eta^{-1} [(nabla_X A_eta) Y] / 2`.
pub fn difference_tensor(patch: &SurfacePatch, u: f64, v: f64) -> Result<DifferenceTensor> {
    difference_from_frame(&Frame::new(patch, u, v)?, DEGENERACY_THRESHOLD)
}

pub fn difference_from_frame(frame: &Frame, threshold: f64) -> Result<DifferenceTensor> {
    check_nondegenerate(frame, threshold)?;
    let a_inv = frame
        .shape_values()
        .try_inverse()
        .ok_or(GeometryError::DegeneracyViolation {
            u: frame.at.0,
            v: frame.at.1,
            det: 0.0,
        })?;
    let nabla = covariant_shape_derivative(frame)?;
    let l = std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            std::array::from_fn(|c| {
                0.5 * (0..2).map(|d| a_inv[(c, d)] * nabla[a][d][b]).sum::<f64>()
            })
        })
    });
    Ok(DifferenceTensor { l })
}

/// `II_eta`-norm of `tr_{II_eta} L - grad^{II_eta}(d) / (2 d)`.
pub fn trace_identity_residual(frame: &Frame, threshold: f64) -> Result<f64> {
    let d = check_nondegenerate(frame, threshold)?;
    let l = difference_from_frame(frame, threshold)?;
    let ii = frame.ii_metric().values();
    let ii_inv = ii.try_inverse().ok_or(GeometryError::DegenerateMetric)?;
    let dd = frame.det_shape().gradient();
    let grad = ii_inv * Vector2::new(dd[0], dd[1]);
    let r = l.trace(&ii_inv) - grad / (2.0 * d);
    Ok((r.transpose() * ii * r)[0].abs().sqrt())
}

/// Terms of the identity
/// `2 K^eta = K^2 / d + II(L, L) - II(grad d, grad d) / (4 d^2)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurvatureRelation {
    pub k: f64,
    pub k_eta: f64,
    pub dkr: f64,
    pub ll: f64,
    pub grad_term: f64,
    pub residual: f64,
    /// `|tr_{II_eta}(Ric) - K^2 / d|`, with `K` from Brioschi on `g`.
    pub ricci_trace_residual: f64,
}

fn require_riemannian_ii(frame: &Frame) -> Result<MetricField> {
    let ii = frame.ii_metric();
    if !ii.is_riemannian() {
        return Err(GeometryError::NotRiemannianII {
            u: frame.at.0,
            v: frame.at.1,
        });
    }
    Ok(ii)
}

/// Gauss curvature of the metric `II_eta`.
pub fn k_eta(patch: &SurfacePatch, u: f64, v: f64) -> Result<f64> {
    k_eta_from_frame(&Frame::new(patch, u, v)?)
}

pub fn k_eta_from_frame(frame: &Frame) -> Result<f64> {
    frame_order(frame, 4)?;
    let ii = require_riemannian_ii(frame)?;
    brioschi_curvature(&ii)
}

pub fn curvature_relation(patch: &SurfacePatch, u: f64, v: f64) -> Result<CurvatureRelation> {
    curvature_relation_from_frame(&Frame::new(patch, u, v)?, DEGENERACY_THRESHOLD)
}

pub fn curvature_relation_from_frame(frame: &Frame, threshold: f64) -> Result<CurvatureRelation> {
    let dkr = check_nondegenerate(frame, threshold)?;
    let ii_field = require_riemannian_ii(frame)?;
    let k_eta = k_eta_from_frame(frame)?;
    let k = -frame.shape_values().trace();
    let ii = ii_field.values();
    let ii_inv = ii.try_inverse().ok_or(GeometryError::DegenerateMetric)?;
    let l = difference_from_frame(frame, threshold)?;
    let ll = l.ii_norm_sq(&ii, &ii_inv);
    let dd = frame.det_shape().gradient();
    let dd = Vector2::new(dd[0], dd[1]);
    let grad_term = (dd.transpose() * ii_inv * dd)[0] / (4.0 * dkr * dkr);
    let residual = (2.0 * k_eta - k * k / dkr - ll + grad_term).abs();

    let k_intrinsic = brioschi_curvature(&frame.induced_metric())?;
    let g = jm_values(&frame.metric);
    let ric_trace = k_intrinsic * (ii_inv * g).trace();
    let ricci_trace_residual = (ric_trace - k_intrinsic * k_intrinsic / dkr).abs();
    Ok(CurvatureRelation {
        k,
        k_eta,
        dkr,
        ll,
        grad_term,
        residual,
        ricci_trace_residual,
    })
}

pub fn theorem_des5_residual(patch: &SurfacePatch, u: f64, v: f64) -> Result<f64> {
    Ok(curvature_relation(patch, u, v)?.residual)
}

/// `det A_eta` as a jet, for callers that need its derivatives.
pub fn dkr_jet(frame: &Frame) -> Jet2 {
    jm_det(&frame.shape)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Axis;

    #[test]
    fn flat_metric_has_zero_curvature() {
        let m = MetricField::new(Jet2::constant(1.0), Jet2::zero(), Jet2::constant(1.0));
        assert_eq!(brioschi_curvature(&m).unwrap(), 0.0);
        let gamma = christoffels(&m).unwrap();
        assert!(gamma.iter().flatten().flatten().all(|x| x.max_abs_diff(&Jet2::zero()) == 0.0));
    }

    fn round_metric(r: f64, theta: f64) -> MetricField {
        let t = Jet2::lift_variable(Axis::U, theta);
        let s = t.sin();
        MetricField::new(Jet2::constant(r * r), Jet2::zero(), s * s * (r * r))
    }

    #[test]
    fn round_metric_curvature() {
        for r in [0.5, 1.0, 3.0] {
            let k = brioschi_curvature(&round_metric(r, 0.9)).unwrap();
            assert!((k - 1.0 / (r * r)).abs() < 1e-12);
        }
    }

    #[test]
    fn round_metric_christoffels() {
        let theta: f64 = 0.7;
        let gamma = christoffels(&round_metric(1.0, theta)).unwrap();
        assert!((gamma[0][1][1].value() + theta.sin() * theta.cos()).abs() < 1e-14);
        assert!((gamma[1][0][1].value() - theta.cos() / theta.sin()).abs() < 1e-14);
        assert!(gamma[0][0][0].value().abs() < 1e-15);
    }

    #[test]
    fn metric_compatibility() {
        // d_a g_bc = Gamma^d_ab g_dc + Gamma^d_ac g_bd
        let u = Jet2::lift_variable(Axis::U, 0.3);
        let v = Jet2::lift_variable(Axis::V, -0.2);
        let m = MetricField::new(u.exp() + v * v, u * v * 0.3, (v * 0.5).cosh() + u * u);
        let gamma = christoffels(&m).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    let dg = m.entry(b, c).gradient()[a];
                    let rhs: f64 = (0..2)
                        .map(|d| {
                            gamma[d][a][b].value() * m.entry(d, c).value()
                                + gamma[d][a][c].value() * m.entry(b, d).value()
                        })
                        .sum();
                    assert!((dg - rhs).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn degenerate_metric_rejected() {
        let m = MetricField::new(Jet2::constant(1.0), Jet2::constant(1.0), Jet2::constant(1.0));
        assert_eq!(brioschi_curvature(&m), Err(GeometryError::DegenerateMetric));
    }
}

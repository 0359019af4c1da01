//! Pointwise geometry of a spacelike chart into the future lightcone:
//! induced metric, the lightlike normal `eta` with `<psi, eta> = 1`, both
//! Weingarten operators, `II_eta`, the curvatures `K` and `det A_eta`, the
//! mean curvature vector and the two Gauss maps.

use nalgebra::{Matrix2, Matrix3x2};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

use crate::curvature::{christoffels, MetricField};
use crate::error::{GeometryError, Result};
use crate::jet::{Axis, Jet2, JetVec4};
use crate::minkowski::{inner, MinkowskiVec};

/// Default threshold on `|det A_eta|` separating degenerate from
/// nondegenerate `eta`.
pub const DEGENERACY_THRESHOLD: f64 = 1e-8;

/// 2x2 matrix of jets, indexed `[row][col]`.
pub type JetMat2 = [[Jet2; 2]; 2];

pub(crate) fn jm_values(m: &JetMat2) -> Matrix2<f64> {
    Matrix2::new(m[0][0].value(), m[0][1].value(), m[1][0].value(), m[1][1].value())
}

pub(crate) fn jm_det(m: &JetMat2) -> Jet2 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

pub(crate) fn jm_inverse(m: &JetMat2) -> Result<JetMat2> {
    let r = jm_det(m).recip()?;
    Ok([
        [m[1][1] * r, -(m[0][1] * r)],
        [-(m[1][0] * r), m[0][0] * r],
    ])
}

pub(crate) fn jm_mul(a: &JetMat2, b: &JetMat2) -> JetMat2 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j]))
}

pub(crate) fn jm_transpose(a: &JetMat2) -> JetMat2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

/// A chart `(u, v) -> psi(u, v)` that can be Taylor-expanded at any point
/// of its domain.
pub trait Chart: Send + Sync {
    fn jet_at(&self, u: f64, v: f64) -> Result<JetVec4>;
}

/// Chart given by a closed-form expression in the coordinate jets.
pub struct AnalyticChart<F>(pub F);

impl<F> Chart for AnalyticChart<F>
where
    F: Fn(Jet2, Jet2) -> Result<JetVec4> + Send + Sync,
{
    fn jet_at(&self, u: f64, v: f64) -> Result<JetVec4> {
        (self.0)(Jet2::lift_variable(Axis::U, u), Jet2::lift_variable(Axis::V, v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub u: (f64, f64),
    pub v: (f64, f64),
}

impl Domain {
    pub fn contains(&self, u: f64, v: f64) -> bool {
        u >= self.u.0 && u <= self.u.1 && v >= self.v.0 && v <= self.v.1
    }
}

/// A spacelike surface through the lightcone, given by a chart.
///
/// Closed surfaces (topological spheres parametrized by `(theta, phi)`)
/// carry a second, rotated chart whose poles sit on the equator of the
/// main chart.
#[derive(Clone)]
pub struct SurfacePatch {
    pub name: String,
    pub domain: Domain,
    pub chart: Arc<dyn Chart>,
    pub pole_chart: Option<Arc<dyn Chart>>,
    /// Number of derivatives the chart jets carry exactly.
    pub order: usize,
}

impl fmt::Debug for SurfacePatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SurfacePatch")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("compact", &self.is_compact())
            .field("order", &self.order)
            .finish()
    }
}

impl SurfacePatch {
    pub fn new(name: impl Into<String>, domain: Domain, chart: Arc<dyn Chart>, order: usize) -> Self {
        Self {
            name: name.into(),
            domain,
            chart,
            pole_chart: None,
            order,
        }
    }

    pub fn with_pole_chart(mut self, chart: Arc<dyn Chart>) -> Self {
        self.pole_chart = Some(chart);
        self
    }

    pub fn is_compact(&self) -> bool {
        self.pole_chart.is_some()
    }

    /// The same surface seen through the rotated chart.
    pub fn pole_patch(&self) -> Option<SurfacePatch> {
        self.pole_chart.as_ref().map(|c| SurfacePatch {
            name: format!("{} (rotated chart)", self.name),
            domain: self.domain,
            chart: c.clone(),
            pole_chart: Some(self.chart.clone()),
            order: self.order,
        })
    }

    pub fn position(&self, u: f64, v: f64) -> Result<MinkowskiVec> {
        Ok(self.chart.jet_at(u, v)?.value())
    }

    pub fn require_order(&self, required: usize) -> Result<()> {
        if self.order < required {
            Err(GeometryError::InsufficientOrder {
                required,
                available: self.order,
            })
        } else {
            Ok(())
        }
    }
}

/// Jet-level local geometry at one base point. Every field is a Taylor
/// expansion so that downstream code can differentiate it further.
///
/// With a chart exact to order `k`: the metric and `eta` are exact to
/// order `k - 1`, the shape operator and `II_eta` to order `k - 2`.
#[derive(Debug, Clone)]
pub struct Frame {
    pub at: (f64, f64),
    pub order: usize,
    pub psi: JetVec4,
    pub dpsi: [JetVec4; 2],
    pub metric: JetMat2,
    pub metric_inv: JetMat2,
    pub eta: JetVec4,
    pub deta: [JetVec4; 2],
    /// `P[a][b] = <d_a eta, d_b psi>`; equals `II_eta(d_a, d_b)`.
    pub ii_raw: JetMat2,
    /// `A_eta` in the chart basis: column `a` holds `A_eta(d_a)`.
    pub shape: JetMat2,
}

impl Frame {
    pub fn new(patch: &SurfacePatch, u: f64, v: f64) -> Result<Self> {
        patch.require_order(2)?;
        let psi = patch.chart.jet_at(u, v)?;
        let p = psi.value();
        let scale = p.0.iter().map(|c| c * c).sum::<f64>().max(1.0);
        if p.norm_sq().abs() > 1e-9 * scale || p.time() <= 0.0 {
            return Err(GeometryError::OffCone {
                u,
                v,
                inner: p.norm_sq(),
                time: p.time(),
            });
        }
        let dpsi = [psi.du(), psi.dv()];
        let metric: JetMat2 =
            std::array::from_fn(|a| std::array::from_fn(|b| dpsi[a].inner(&dpsi[b])));
        let gv = jm_values(&metric);
        if gv[(0, 0)] <= 0.0 || gv.determinant() <= 0.0 {
            return Err(GeometryError::NotSpacelike { u, v });
        }
        let metric_inv = jm_inverse(&metric)?;

        // Project e0 onto the normal plane, then solve for the null normal
        // eta = a psi + b w with <psi, eta> = 1 and <eta, eta> = 0.
        let e0 = JetVec4::constant(&MinkowskiVec::new(1.0, 0.0, 0.0, 0.0));
        let e0_dot: [Jet2; 2] = std::array::from_fn(|b| e0.inner(&dpsi[b]));
        let mut w = e0;
        for a in 0..2 {
            for b in 0..2 {
                w = w - dpsi[a].scale(&(metric_inv[a][b] * e0_dot[b]));
            }
        }
        let c = psi.inner(&w);
        if c.value().abs() < 1e-12 * scale.sqrt() {
            return Err(GeometryError::DegenerateNormalFrame { u, v });
        }
        let c_inv = c.recip().map_err(|_| GeometryError::DegenerateNormalFrame { u, v })?;
        let ww = w.inner(&w);
        let eta = w.scale(&c_inv) - psi.scale(&(ww * c_inv * c_inv * 0.5));

        let deta = [eta.du(), eta.dv()];
        let ii_raw: JetMat2 =
            std::array::from_fn(|a| std::array::from_fn(|b| deta[a].inner(&dpsi[b])));
        let shape = jm_mul(&metric_inv, &jm_transpose(&ii_raw));
        let shape = shape.map(|row| row.map(|x| -x));

        Ok(Self {
            at: (u, v),
            order: patch.order,
            psi,
            dpsi,
            metric,
            metric_inv,
            eta,
            deta,
            ii_raw,
            shape,
        })
    }

    /// `II_eta` as a symmetric jet metric.
    pub fn ii_metric(&self) -> MetricField {
        let off = (self.ii_raw[0][1] + self.ii_raw[1][0]) * 0.5;
        MetricField::new(self.ii_raw[0][0], off, self.ii_raw[1][1])
    }

    pub fn induced_metric(&self) -> MetricField {
        MetricField::new(self.metric[0][0], self.metric[0][1], self.metric[1][1])
    }

    pub fn shape_values(&self) -> Matrix2<f64> {
        jm_values(&self.shape)
    }

    pub fn det_shape(&self) -> Jet2 {
        jm_det(&self.shape)
    }

    fn second_derivative(&self, a: usize, b: usize) -> JetVec4 {
        self.dpsi[a].derivative(if b == 0 { Axis::U } else { Axis::V })
    }
}

pub fn first_fundamental_form(patch: &SurfacePatch, u: f64, v: f64) -> Result<Matrix2<f64>> {
    let frame = Frame::new(patch, u, v)?;
    Ok(jm_values(&frame.metric))
}

/// The lightlike normal `eta` as a jet.
pub fn lightlike_normal(patch: &SurfacePatch, u: f64, v: f64) -> Result<JetVec4> {
    Ok(Frame::new(patch, u, v)?.eta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeingartenMethod {
    /// Tangential part of `-d eta`.
    Projection,
    /// Expression through the time coordinate `psi0` and its metric Hessian.
    ClosedForm,
}

pub fn weingarten_eta(
    patch: &SurfacePatch,
    u: f64,
    v: f64,
    method: WeingartenMethod,
) -> Result<Matrix2<f64>> {
    let frame = Frame::new(patch, u, v)?;
    match method {
        WeingartenMethod::Projection => Ok(frame.shape_values()),
        WeingartenMethod::ClosedForm => closed_form_shape(&frame),
    }
}

/// `A_eta = -(1 + |grad psi0|^2) / (2 psi0^2) I + Hess(psi0) / psi0`, with
/// the Hessian taken as a (1,1) tensor through the Levi-Civita connection.
pub fn closed_form_shape(frame: &Frame) -> Result<Matrix2<f64>> {
    let psi0 = frame.psi.0[0];
    let p0 = psi0.value();
    let dp = psi0.gradient();
    let gamma = christoffels(&frame.induced_metric())?;
    let ginv = jm_values(&frame.metric_inv);
    let grad = ginv * nalgebra::Vector2::new(dp[0], dp[1]);
    let grad_sq = dp[0] * grad[0] + dp[1] * grad[1];
    let mut hess_low = Matrix2::zeros();
    for a in 0..2 {
        for b in 0..2 {
            let mut h = psi0.partial(
                usize::from(a == 0) + usize::from(b == 0),
                usize::from(a == 1) + usize::from(b == 1),
            )?;
            for c in 0..2 {
                h -= gamma[c][a][b].value() * dp[c];
            }
            hess_low[(a, b)] = h;
        }
    }
    let hess = ginv * hess_low;
    Ok(Matrix2::identity() * (-(1.0 + grad_sq) / (2.0 * p0 * p0)) + hess / p0)
}

/// `||A_psi + I||_inf`, with `A_psi` the tangential part of `-d psi`.
pub fn verify_a_psi(patch: &SurfacePatch, u: f64, v: f64) -> Result<f64> {
    let frame = Frame::new(patch, u, v)?;
    let ginv = jm_values(&frame.metric_inv);
    let mut t = Matrix2::zeros();
    for a in 0..2 {
        for b in 0..2 {
            t[(b, a)] = frame.dpsi[a].inner(&frame.dpsi[b]).value();
        }
    }
    let a_psi = -(ginv * t);
    Ok((a_psi + Matrix2::identity()).abs().max())
}

/// The full pointwise dashboard.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointGeometry {
    pub at: (f64, f64),
    pub psi: MinkowskiVec,
    pub g: Matrix2<f64>,
    pub g_inv: Matrix2<f64>,
    pub eta: MinkowskiVec,
    pub a_eta: Matrix2<f64>,
    pub ii_eta: Matrix2<f64>,
    /// Gauss curvature of the induced metric, `-tr A_eta`.
    pub k: f64,
    /// Gauss curvature of `II_eta`, when it has been computed.
    pub k_eta: Option<f64>,
    /// Gauss-Kronecker curvature `det A_eta`.
    pub dkr: f64,
    pub h_vec: MinkowskiVec,
    pub quartic: f64,
    /// `K^2 - 4 det A_eta`.
    pub gap_low: f64,
    /// `2 tr(A_eta^2) - K^2`.
    pub gap_high: f64,
    /// `<H, H>`.
    pub h_norm_sq: f64,
    /// `<II, II>` summed over an orthonormal tangent basis.
    pub ii_norm_sq: f64,
}

impl PointGeometry {
    pub fn from_frame(frame: &Frame) -> Self {
        let g = jm_values(&frame.metric);
        let g_inv = jm_values(&frame.metric_inv);
        let a = frame.shape_values();
        let ii = frame.ii_metric().values();
        let k = -a.trace();
        let dkr = a.determinant();

        // Normal part of the second derivatives.
        let mut second = [[MinkowskiVec::default(); 2]; 2];
        let tangents = [frame.dpsi[0].value(), frame.dpsi[1].value()];
        for i in 0..2 {
            for j in 0..2 {
                let d2 = frame.second_derivative(i, j).value();
                let mut n = d2;
                for c in 0..2 {
                    for d in 0..2 {
                        n = n - tangents[c] * (g_inv[(c, d)] * inner(&d2, &tangents[d]));
                    }
                }
                second[i][j] = n;
            }
        }
        let mut h_vec = MinkowskiVec::default();
        for i in 0..2 {
            for j in 0..2 {
                h_vec = h_vec + second[i][j] * (0.5 * g_inv[(i, j)]);
            }
        }
        let mut ii_norm_sq = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                for k2 in 0..2 {
                    for l in 0..2 {
                        ii_norm_sq += g_inv[(i, k2)] * g_inv[(j, l)] * inner(&second[i][j], &second[k2][l]);
                    }
                }
            }
        }

        Self {
            at: frame.at,
            psi: frame.psi.value(),
            g,
            g_inv,
            eta: frame.eta.value(),
            a_eta: a,
            ii_eta: ii,
            k,
            k_eta: None,
            dkr,
            h_vec,
            quartic: 2.0 * dkr,
            gap_low: k * k - 4.0 * dkr,
            gap_high: 2.0 * (a * a).trace() - k * k,
            h_norm_sq: h_vec.norm_sq(),
            ii_norm_sq,
        }
    }
}

pub fn point_geometry(patch: &SurfacePatch, u: f64, v: f64) -> Result<PointGeometry> {
    Ok(PointGeometry::from_frame(&Frame::new(patch, u, v)?))
}

/// The S^2-valued Gauss maps, normalized to time component 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussMaps {
    pub gf: MinkowskiVec,
    pub gp: MinkowskiVec,
    /// Singular values of the differential of the spatial part of `G^P`.
    pub gp_singular_values: [f64; 2],
    pub gp_rank: usize,
}

/// `G^F = psi / psi0` and `G^P = eta / eta0` (the future-pointing null
/// normal `-eta` scaled to unit time component).
pub fn gauss_maps(patch: &SurfacePatch, u: f64, v: f64) -> Result<GaussMaps> {
    let frame = Frame::new(patch, u, v)?;
    let psi = frame.psi.value();
    let eta0 = frame.eta.0[0];
    if eta0.value().abs() < 1e-14 {
        return Err(GeometryError::GaussMapUndefined { u, v });
    }
    let r = eta0.recip()?;
    let gp_jet = frame.eta.scale(&r);
    let mut jac = Matrix3x2::zeros();
    for i in 0..3 {
        let grad = gp_jet.0[i + 1].gradient();
        jac[(i, 0)] = grad[0];
        jac[(i, 1)] = grad[1];
    }
    let sv = jac.svd(false, false).singular_values;
    let scale = 1.0 + frame.psi.0[0].value().abs();
    let rank = sv.iter().filter(|s| **s > 1e-8 * scale).count();
    Ok(GaussMaps {
        gf: psi * (1.0 / psi.time()),
        gp: gp_jet.value(),
        gp_singular_values: [sv[0].max(sv[1]), sv[0].min(sv[1])],
        gp_rank: rank,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Definiteness {
    Positive,
    Negative,
    Indefinite,
    Mixed,
    Degenerate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NondegeneracyReport {
    pub nondegenerate: bool,
    pub min_abs_dkr: f64,
    pub ii_eta: Definiteness,
}

fn classify_2x2(m: &Matrix2<f64>, tol: f64) -> Definiteness {
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    if det.abs() <= tol {
        Definiteness::Degenerate
    } else if det < 0.0 {
        Definiteness::Indefinite
    } else if m.trace() > 0.0 {
        Definiteness::Positive
    } else {
        Definiteness::Negative
    }
}

pub fn is_nondegenerate(
    patch: &SurfacePatch,
    points: &[(f64, f64)],
    threshold: f64,
) -> Result<NondegeneracyReport> {
    let mut min_abs = f64::INFINITY;
    let mut kind: Option<Definiteness> = None;
    for &(u, v) in points {
        let frame = Frame::new(patch, u, v)?;
        let d = frame.det_shape().value();
        min_abs = min_abs.min(d.abs());
        let here = classify_2x2(&frame.ii_metric().values(), 0.0);
        kind = Some(match kind {
            None => here,
            Some(k) if k == here => k,
            Some(_) => Definiteness::Mixed,
        });
    }
    let nondegenerate = min_abs > threshold;
    Ok(NondegeneracyReport {
        nondegenerate,
        min_abs_dkr: min_abs,
        ii_eta: if nondegenerate {
            kind.unwrap_or(Definiteness::Degenerate)
        } else {
            Definiteness::Degenerate
        },
    })
}

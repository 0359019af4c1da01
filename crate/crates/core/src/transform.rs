//! Surface transforms: the conjugate surface `-eta` and expansions
//! `e^sigma psi`, together with the identities relating their geometry to
//! the original surface.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::catalog::{sphere_omega, ChartKind};
use crate::curvature::{brioschi_curvature, christoffels};
use crate::error::{GeometryError, Result};
use crate::jet::{Axis, Jet2, JetVec4, ORDER};
use crate::surface::{jm_values, Chart, Frame, SurfacePatch, DEGENERACY_THRESHOLD};

/// Scalar function on a chart domain, expandable at any point.
pub trait Field: Send + Sync {
    fn jet_at(&self, u: f64, v: f64) -> Result<Jet2>;
}

pub struct AnalyticField<F>(pub F);

impl<F> Field for AnalyticField<F>
where
    F: Fn(Jet2, Jet2) -> Jet2 + Send + Sync,
{
    fn jet_at(&self, u: f64, v: f64) -> Result<Jet2> {
        Ok((self.0)(Jet2::lift_variable(Axis::U, u), Jet2::lift_variable(Axis::V, v)))
    }
}

/// A function of the unit vector `omega`, read through one sphere chart.
pub struct SphereField<F> {
    pub f: F,
    pub kind: ChartKind,
}

impl<F> Field for SphereField<F>
where
    F: Fn(&[Jet2; 3]) -> Jet2 + Send + Sync,
{
    fn jet_at(&self, u: f64, v: f64) -> Result<Jet2> {
        let w = sphere_omega(self.kind, Jet2::lift_variable(Axis::U, u), Jet2::lift_variable(Axis::V, v));
        Ok((self.f)(&w))
    }
}

#[derive(Clone)]
pub struct ScalarField {
    pub main: Arc<dyn Field>,
    pub pole: Option<Arc<dyn Field>>,
}

impl ScalarField {
    pub fn analytic<F>(f: F) -> Self
    where
        F: Fn(Jet2, Jet2) -> Jet2 + Send + Sync + 'static,
    {
        Self {
            main: Arc::new(AnalyticField(f)),
            pole: None,
        }
    }

    pub fn constant(c: f64) -> Self {
        let main: Arc<dyn Field> = Arc::new(AnalyticField(move |_: Jet2, _: Jet2| Jet2::constant(c)));
        Self {
            pole: Some(main.clone()),
            main,
        }
    }

    /// A function on the unit sphere, usable in both sphere charts.
    pub fn on_sphere<F>(f: F) -> Self
    where
        F: Fn(&[Jet2; 3]) -> Jet2 + Send + Sync + Clone + 'static,
    {
        Self {
            main: Arc::new(SphereField {
                f: f.clone(),
                kind: ChartKind::Standard,
            }),
            pole: Some(Arc::new(SphereField {
                f,
                kind: ChartKind::Rotated,
            })),
        }
    }

    pub fn from_spec(spec: &crate::harmonics::HarmonicSpec) -> Self {
        let spec = spec.clone();
        Self::on_sphere(move |w: &[Jet2; 3]| spec.eval(w[0], w[1], w[2]))
    }

    pub fn jet_at(&self, u: f64, v: f64) -> Result<Jet2> {
        self.main.jet_at(u, v)
    }
}

struct ExpandedChart {
    base: Arc<dyn Chart>,
    sigma: Arc<dyn Field>,
}

impl Chart for ExpandedChart {
    fn jet_at(&self, u: f64, v: f64) -> Result<JetVec4> {
        let psi = self.base.jet_at(u, v)?;
        let s = self.sigma.jet_at(u, v)?.exp();
        Ok(psi.scale(&s))
    }
}

/// The expansion `e^sigma psi`.
pub fn expand(patch: &SurfacePatch, sigma: &ScalarField) -> SurfacePatch {
    let main: Arc<dyn Chart> = Arc::new(ExpandedChart {
        base: patch.chart.clone(),
        sigma: sigma.main.clone(),
    });
    let pole = match (&patch.pole_chart, &sigma.pole) {
        (Some(c), Some(s)) => Some(Arc::new(ExpandedChart {
            base: c.clone(),
            sigma: s.clone(),
        }) as Arc<dyn Chart>),
        _ => None,
    };
    SurfacePatch {
        name: format!("expansion of {}", patch.name),
        domain: patch.domain,
        chart: main,
        pole_chart: pole,
        order: patch.order.min(ORDER),
    }
}

struct ConjugateChart {
    base: SurfacePatch,
}

impl Chart for ConjugateChart {
    fn jet_at(&self, u: f64, v: f64) -> Result<JetVec4> {
        Ok(-Frame::new(&self.base, u, v)?.eta)
    }
}

/// The conjugate surface `-eta`. Fails with the first sampled point where
/// `eta` is degenerate. The chart keeps the original parametrization and
/// carries one derivative less than the original.
pub fn conjugate(patch: &SurfacePatch, points: &[(f64, f64)]) -> Result<SurfacePatch> {
    for &(u, v) in points {
        let frame = Frame::new(patch, u, v)?;
        let det = frame.det_shape().value();
        if det.abs() <= DEGENERACY_THRESHOLD {
            return Err(GeometryError::DegeneracyViolation { u, v, det });
        }
    }
    patch.require_order(3)?;
    let pole = patch.pole_patch().map(|p| Arc::new(ConjugateChart { base: p }) as Arc<dyn Chart>);
    Ok(SurfacePatch {
        name: format!("conjugate of {}", patch.name),
        domain: patch.domain,
        chart: Arc::new(ConjugateChart { base: patch.clone() }),
        pole_chart: pole,
        order: patch.order - 1,
    })
}

/// `III_eta(X, Y) = <A_eta^2 X, Y>` in the chart basis.
pub fn third_fundamental_form(patch: &SurfacePatch, u: f64, v: f64) -> Result<Matrix2<f64>> {
    let frame = Frame::new(patch, u, v)?;
    let g = jm_values(&frame.metric);
    let a = frame.shape_values();
    Ok(a.transpose() * g * a)
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ConjugateResiduals {
    /// sup |A~ A - I|
    pub inverse_shape: f64,
    /// sup |II~ - II|
    pub second_form: f64,
    /// sup |K~ - K / d|
    pub curvature: f64,
    /// sup |g~ - III|
    pub third_form: f64,
}

/// Compares the conjugate's own pipeline with the original's at each point.
pub fn verify_des30(patch: &SurfacePatch, points: &[(f64, f64)]) -> Result<ConjugateResiduals> {
    let conj = conjugate(patch, points)?;
    let mut out = ConjugateResiduals::default();
    for &(u, v) in points {
        let f = Frame::new(patch, u, v)?;
        let fc = Frame::new(&conj, u, v)?;
        let a = f.shape_values();
        let ac = fc.shape_values();
        let ii = f.ii_metric().values();
        let iic = fc.ii_metric().values();
        let k_over_d = -a.trace() / a.determinant();
        let k_conj = brioschi_curvature(&fc.induced_metric())?;
        let third = a.transpose() * jm_values(&f.metric) * a;
        out.inverse_shape = out.inverse_shape.max((ac * a - Matrix2::identity()).abs().max());
        out.second_form = out.second_form.max((iic - ii).abs().max());
        out.curvature = out.curvature.max((k_conj - k_over_d).abs());
        out.third_form = out.third_form.max((jm_values(&fc.metric) - third).abs().max());
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpansionResiduals {
    /// |A^sigma(direct) - A^sigma(formula)|
    pub shape: f64,
    /// |II^sigma(direct) - II^sigma(formula)|
    pub second_form: f64,
    /// |K_sigma(Brioschi) - (K - Laplacian sigma) e^{-2 sigma}|
    pub curvature: f64,
    /// |-tr A^sigma(formula) - (K - Laplacian sigma) e^{-2 sigma}|
    pub trace_consistency: f64,
    /// |g_sigma - e^{2 sigma} g|
    pub metric: f64,
    /// |<psi_sigma, e^{-sigma} eta> - 1| and the deviation of the expanded
    /// surface's null normal from its closed form
    pub normal: f64,
}

impl ExpansionResiduals {
    pub fn max(&self) -> f64 {
        [self.shape, self.second_form, self.curvature, self.trace_consistency, self.metric, self.normal]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Checks the expansion laws at one point: the direct pipeline on
/// `e^sigma psi` against the formulas in terms of the original surface.
pub fn verify_expansion_weingarten(
    patch: &SurfacePatch,
    sigma: &ScalarField,
    u: f64,
    v: f64,
) -> Result<ExpansionResiduals> {
    let expanded = expand(patch, sigma);
    let f = Frame::new(patch, u, v)?;
    let fe = Frame::new(&expanded, u, v)?;
    let s = sigma.jet_at(u, v)?;
    let sv = s.value();
    let ds = Vector2::from(s.gradient());
    let g = jm_values(&f.metric);
    let ginv = jm_values(&f.metric_inv);
    let grad = ginv * ds;
    let grad_sq = ds.dot(&grad);
    let gamma = christoffels(&f.induced_metric())?;
    let mut hess_low = Matrix2::zeros();
    for a in 0..2 {
        for b in 0..2 {
            let mut h = s.partial(
                usize::from(a == 0) + usize::from(b == 0),
                usize::from(a == 1) + usize::from(b == 1),
            )?;
            for c in 0..2 {
                h -= gamma[c][a][b].value() * ds[c];
            }
            hess_low[(a, b)] = h;
        }
    }
    let hess = ginv * hess_low;
    let a = f.shape_values();
    let scale = (-2.0 * sv).exp();
    let predicted_a = (a + hess + Matrix2::identity() * (0.5 * grad_sq) - grad * ds.transpose()) * scale;
    let ii = f.ii_metric().values();
    let predicted_ii = ii + ds * ds.transpose() - g * (0.5 * grad_sq) - hess_low;
    let k = brioschi_curvature(&f.induced_metric())?;
    let laplacian = hess.trace();
    let predicted_k = (k - laplacian) * scale;
    let k_sigma = brioschi_curvature(&fe.induced_metric())?;

    // e^{-sigma} eta pairs to 1 with the expanded position but is not
    // normal to it; the null normal is e^{-sigma}(eta - grad sigma - |grad sigma|^2 psi / 2).
    let scaled_eta = f.eta.value() * (-sv).exp();
    let tangent = f.dpsi[0].value() * grad[0] + f.dpsi[1].value() * grad[1];
    let eta_sigma = (f.eta.value() - tangent - f.psi.value() * (0.5 * grad_sq)) * (-sv).exp();
    let normal = fe
        .eta
        .value()
        .max_abs_diff(&eta_sigma)
        .max((fe.psi.value().inner(&scaled_eta) - 1.0).abs());

    Ok(ExpansionResiduals {
        shape: (fe.shape_values() - predicted_a).abs().max(),
        second_form: (fe.ii_metric().values() - predicted_ii).abs().max(),
        curvature: (k_sigma - predicted_k).abs(),
        trace_consistency: (-predicted_a.trace() - predicted_k).abs(),
        metric: (jm_values(&fe.metric) - g * (2.0 * sv).exp()).abs().max(),
        normal,
    })
}

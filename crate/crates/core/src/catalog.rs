//! Concrete lightcone surfaces: round spheres `S^2(u, r)`, the flat
//! cylinder-type immersion, the flat paraboloid graph, and graphs over
//! the sphere (including harmonic perturbations of round spheres).

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};
use crate::harmonics::HarmonicSpec;
use crate::jet::{Axis, Jet2, JetVec4, ORDER};
use crate::minkowski::{boost_to, MinkowskiVec};
use crate::surface::{AnalyticChart, Chart, Domain, SurfacePatch};
use crate::transform::{expand, ScalarField};

/// Which `(theta, phi)` chart of the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChartKind {
    /// `omega = (sin t cos p, sin t sin p, cos t)`, poles on the x3 axis.
    Standard,
    /// `omega = (cos t, sin t cos p, sin t sin p)`, poles on the x1 axis.
    Rotated,
}

pub fn sphere_omega(kind: ChartKind, theta: Jet2, phi: Jet2) -> [Jet2; 3] {
    let (st, ct) = (theta.sin(), theta.cos());
    let (sp, cp) = (phi.sin(), phi.cos());
    match kind {
        ChartKind::Standard => [st * cp, st * sp, ct],
        ChartKind::Rotated => [ct, st * cp, st * sp],
    }
}

/// Unit vector for plain angles, standard chart.
pub fn omega(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

pub fn sphere_domain() -> Domain {
    Domain {
        u: (0.0, PI),
        v: (0.0, 2.0 * PI),
    }
}

/// Chart `(theta, phi) -> B f(omega) (1, omega)` for a radial function `f`.
struct SphereGraphChart<F> {
    boost: Matrix4<f64>,
    radial: F,
    kind: ChartKind,
}

impl<F> Chart for SphereGraphChart<F>
where
    F: Fn(&[Jet2; 3]) -> Jet2 + Send + Sync,
{
    fn jet_at(&self, u: f64, v: f64) -> Result<JetVec4> {
        let w = sphere_omega(self.kind, Jet2::lift_variable(Axis::U, u), Jet2::lift_variable(Axis::V, v));
        let f = (self.radial)(&w);
        if f.value() <= 0.0 {
            return Err(GeometryError::NonpositiveRadialFunction { value: f.value(), u, v });
        }
        let psi = JetVec4([f, f * w[0], f * w[1], f * w[2]]);
        Ok(psi.transform(&self.boost))
    }
}

fn sphere_graph<F>(name: String, boost: Matrix4<f64>, radial: F) -> SurfacePatch
where
    F: Fn(&[Jet2; 3]) -> Jet2 + Send + Sync + Clone + 'static,
{
    let main = SphereGraphChart {
        boost,
        radial: radial.clone(),
        kind: ChartKind::Standard,
    };
    let pole = SphereGraphChart {
        boost,
        radial,
        kind: ChartKind::Rotated,
    };
    SurfacePatch::new(name, sphere_domain(), Arc::new(main), ORDER).with_pole_chart(Arc::new(pole))
}

/// The totally umbilical sphere `{x : <x,x> = 0, <u,x> = r}`.
pub fn round_sphere(u: &MinkowskiVec, r: f64) -> Result<SurfacePatch> {
    if r <= 0.0 || !r.is_finite() {
        return Err(GeometryError::NonpositiveRadius(r));
    }
    let b = boost_to(u)?;
    Ok(sphere_graph(
        format!("round sphere r={r}"),
        b,
        move |_: &[Jet2; 3]| Jet2::constant(r),
    ))
}

pub fn rest_frame() -> MinkowskiVec {
    MinkowskiVec::new(-1.0, 0.0, 0.0, 0.0)
}

/// `psi(x, y) = (cosh x, sinh x, cos y, sin y)`: an isometric immersion of
/// the Euclidean plane with indefinite `II_eta`.
pub fn product_cylinder() -> SurfacePatch {
    let chart = AnalyticChart(|x: Jet2, y: Jet2| Ok(JetVec4([x.cosh(), x.sinh(), y.cos(), y.sin()])));
    SurfacePatch::new(
        "cylinder",
        Domain {
            u: (-2.0, 2.0),
            v: (-PI, PI),
        },
        Arc::new(chart),
        ORDER,
    )
}

/// `phi(x, y) = ((x^2+y^2+1)/2, (x^2+y^2-1)/2, x, y)`, with `A_eta = 0`.
pub fn paraboloid_graph() -> SurfacePatch {
    let chart = AnalyticChart(|x: Jet2, y: Jet2| {
        let q = x * x + y * y;
        Ok(JetVec4([(q + 1.0) * 0.5, (q - 1.0) * 0.5, x, y]))
    });
    SurfacePatch::new(
        "paraboloid",
        Domain {
            u: (-2.0, 2.0),
            v: (-2.0, 2.0),
        },
        Arc::new(chart),
        ORDER,
    )
}

/// `e^sigma` times the round sphere of radius `r` at rest, with `sigma`
/// given by a spherical-harmonic expansion.
pub fn perturbed_sphere(spec: &HarmonicSpec, r: f64) -> Result<SurfacePatch> {
    let base = round_sphere(&rest_frame(), r)?;
    let mut patch = expand(&base, &ScalarField::from_spec(spec));
    patch.name = format!("perturbed sphere r={r}");
    Ok(patch)
}

/// `(theta, phi) -> f(omega) (1, omega)` for a positive function `f` on
/// the unit sphere.
pub fn graph_over_sphere<F>(f: F) -> SurfacePatch
where
    F: Fn(&[Jet2; 3]) -> Jet2 + Send + Sync + Clone + 'static,
{
    sphere_graph("graph over sphere".into(), Matrix4::identity(), f)
}

/// A random harmonic perturbation with degrees `1..=l_max` whose `sigma`
/// has L2 norm `eps` over the unit sphere.
pub fn random_spec<R: rand::Rng>(rng: &mut R, l_max: u32, eps: f64) -> HarmonicSpec {
    let idx = crate::harmonics::index_range(1, l_max);
    let raw: Vec<f64> = idx.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
    let norm = raw.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-300);
    HarmonicSpec::new(idx.iter().zip(raw).map(|(&(l, m), a)| (l, m, a * eps / norm)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minkowski::in_future_lightcone;

    #[test]
    fn round_sphere_level_set() {
        let s: f64 = 0.4;
        let u = MinkowskiVec::new(-s.cosh(), 0.0, s.sinh(), 0.0);
        let patch = round_sphere(&u, 1.5).unwrap();
        for (t, p) in [(0.3, 1.0), (1.2, 4.0), (2.8, 0.1)] {
            let x = patch.position(t, p).unwrap();
            assert!(in_future_lightcone(&x, 1e-12));
            assert!((u.inner(&x) - 1.5).abs() < 1e-12);
        }
    }

    #[test]
    fn constructors_reject_bad_input() {
        assert!(matches!(round_sphere(&rest_frame(), 0.0), Err(GeometryError::NonpositiveRadius(_))));
        assert!(matches!(
            round_sphere(&MinkowskiVec::new(1.0, 0.0, 0.0, 0.0), 1.0),
            Err(GeometryError::NotUnitTimelike { .. })
        ));
        let bad = graph_over_sphere(|w: &[Jet2; 3]| w[2]);
        assert!(matches!(
            bad.position(2.5, 0.0),
            Err(GeometryError::NonpositiveRadialFunction { .. })
        ));
    }

    #[test]
    fn charts_agree_on_overlap() {
        let spec = HarmonicSpec::new([(2, 1, 0.04), (3, -2, 0.02)]);
        let patch = perturbed_sphere(&spec, 1.0).unwrap();
        let pole = patch.pole_patch().unwrap();
        // omega = (1/sqrt 2)(1, 0, 1): standard (pi/4, 0), rotated (pi/4, pi/2).
        let a = patch.position(PI / 4.0, 0.0).unwrap();
        let b = pole.position(PI / 4.0, PI / 2.0).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-14);
    }
}

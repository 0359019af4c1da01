//! Integrals over closed surfaces and the global inequalities built on
//! them: Gauss-Bonnet for both metrics, the `II_eta`-area bound, the
//! first-eigenvalue bound and the argmax test for `K^eta`.

use std::f64::consts::PI;
use std::io::Write;

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;
use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};
use crate::laplacian::{lambda1_estimate, Lambda1Estimate};
use crate::quadrature::{GridNode, SphereGrid};
use crate::curvature::k_eta;
use crate::surface::{point_geometry, PointGeometry, SurfacePatch};
use crate::verify::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Induced,
    IiEta,
}

fn require_nondegenerate(grid: &SphereGrid) -> Result<()> {
    match grid.nodes.iter().find(|n| !(n.geometry.dkr > 0.0)) {
        Some(n) => Err(GeometryError::DegeneracyViolation {
            u: n.theta,
            v: n.phi,
            det: n.geometry.dkr,
        }),
        None => Ok(()),
    }
}

/// Quadrature of a per-node field; the `II_eta` measure is `sqrt(d) dA`.
pub fn integrate(grid: &SphereGrid, field: &[f64], measure: Measure) -> Result<f64> {
    assert_eq!(field.len(), grid.nodes.len(), "one value per node");
    if measure == Measure::IiEta {
        require_nondegenerate(grid)?;
    }
    Ok(grid
        .nodes
        .iter()
        .zip(field)
        .map(|(n, f)| f * node_measure(n, measure))
        .sum())
}

fn node_measure(n: &GridNode, measure: Measure) -> f64 {
    match measure {
        Measure::Induced => n.area_weight(),
        Measure::IiEta => n.area_weight() * n.geometry.dkr.sqrt(),
    }
}

pub fn integrate_with<F: Fn(&GridNode) -> f64>(grid: &SphereGrid, measure: Measure, f: F) -> Result<f64> {
    let field: Vec<f64> = grid.nodes.iter().map(f).collect();
    integrate(grid, &field, measure)
}

pub fn gauss_bonnet(grid: &SphereGrid) -> f64 {
    grid.nodes.iter().map(|n| n.geometry.k * n.area_weight()).sum()
}

/// `int K^eta dA_{II_eta}`; needs a grid built with `K^eta`.
pub fn gauss_bonnet_ii(grid: &SphereGrid) -> Result<f64> {
    let k_eta = k_eta_values(grid)?;
    integrate(grid, &k_eta, Measure::IiEta)
}

fn k_eta_values(grid: &SphereGrid) -> Result<Vec<f64>> {
    grid.nodes
        .iter()
        .map(|n| {
            n.geometry
                .k_eta
                .ok_or(GeometryError::InsufficientOrder { required: 4, available: 0 })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IiAreaReport {
    pub area: f64,
    pub bound: f64,
    /// `area <= 2 pi + tol`
    pub within_bound: bool,
    /// `2 pi - area`; positive for non-umbilical surfaces.
    pub deficit: f64,
}

pub fn ii_eta_area(grid: &SphereGrid, tol: f64) -> Result<IiAreaReport> {
    let area = integrate_with(grid, Measure::IiEta, |_| 1.0)?;
    Ok(IiAreaReport {
        area,
        bound: 2.0 * PI,
        within_bound: area <= 2.0 * PI + tol,
        deficit: 2.0 * PI - area,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KetaFloor {
    pub theta: f64,
    pub phi: f64,
    pub pole_chart: bool,
    pub dkr: f64,
    pub k: f64,
    pub k_eta: f64,
    /// `K^2 / d` at the argmax of `d`.
    pub value: f64,
    /// `2 K^eta >= K^2 / d - tol`
    pub chain_holds: bool,
    /// `K^2 / d >= 4 - tol`
    pub at_least_four: bool,
}

/// Evaluates the inequality chain at the argmax of `d`: the grid argmax,
/// refined so that the gradient of `d` vanishes there.
pub fn keta_floor_check(grid: &SphereGrid, tol: f64) -> Result<KetaFloor> {
    require_nondegenerate(grid)?;
    let q0 = grid
        .nodes
        .iter()
        .max_by(|a, b| a.geometry.dkr.total_cmp(&b.geometry.dkr))
        .ok_or_else(|| GeometryError::NotCompact("empty grid".into()))?;
    let r = refine(grid, q0, |g| -g.dkr)?;
    let g = point_geometry(&r.patch, r.theta, r.phi)?;
    let k_eta = k_eta(&r.patch, r.theta, r.phi)?;
    let value = g.k * g.k / g.dkr;
    Ok(KetaFloor {
        theta: r.theta,
        phi: r.phi,
        pole_chart: r.pole_chart,
        dkr: g.dkr,
        k: g.k,
        k_eta,
        value,
        chain_holds: 2.0 * k_eta >= value - tol,
        at_least_four: value >= 4.0 - tol,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenBound {
    pub lambda1: Lambda1Estimate,
    /// `2 int <H,H> dA / area(g)`
    pub bound_rhs: f64,
    pub slack: f64,
    /// `lambda1 <= (1 + slack) rhs`
    pub holds: bool,
    /// `|lambda1 - rhs| <= slack rhs`
    pub equality_within_slack: bool,
    /// `(rhs - lambda1) / rhs`
    pub relative_margin: f64,
}

pub fn eigen_bound(grid: &SphereGrid, slack: f64) -> Result<EigenBound> {
    let hh: f64 = grid.nodes.iter().map(|n| n.geometry.h_norm_sq * n.area_weight()).sum();
    let rhs = 2.0 * hh / grid.area();
    let lambda1 = lambda1_estimate(&grid.patch, grid.n_theta, grid.n_phi)?;
    let relative_margin = (rhs - lambda1.lambda1) / rhs;
    Ok(EigenBound {
        bound_rhs: rhs,
        slack,
        holds: lambda1.lambda1 <= (1.0 + slack) * rhs,
        equality_within_slack: relative_margin.abs() <= slack,
        relative_margin,
        lambda1,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Margins {
    /// `|int K dA - 4 pi|`
    pub gauss_bonnet: f64,
    /// `|int K^eta dA_II - 4 pi|`
    pub gauss_bonnet_ii: Option<f64>,
    /// `2 pi - area(II_eta)`
    pub ii_eta_area: Option<f64>,
    /// `(rhs - lambda1) / rhs`
    pub eigen_bound: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GlobalReport {
    pub surface: String,
    #[serde(rename = "Ntheta")]
    pub n_theta: usize,
    #[serde(rename = "Nphi")]
    pub n_phi: usize,
    pub area: f64,
    pub gauss_bonnet: f64,
    pub gauss_bonnet_ii: Option<f64>,
    pub ii_eta_area: Option<IiAreaReport>,
    pub keta_floor: Option<KetaFloor>,
    pub umbilic: Option<UmbilicPoint>,
    pub lambda1: Option<Lambda1Estimate>,
    pub bound_rhs: Option<f64>,
    pub slack: f64,
    pub margins: Margins,
}

/// Everything global about one surface. The `II_eta` quantities need a
/// nondegenerate surface and are left out otherwise.
pub fn global_report(grid: &SphereGrid, with_lambda1: bool, tol: &Tolerances) -> Result<GlobalReport> {
    let slack = tol.get("slack");
    let gb = gauss_bonnet(grid);
    let nondegenerate = require_nondegenerate(grid).is_ok() && k_eta_values(grid).is_ok();
    let (gb_ii, area_ii, floor) = if nondegenerate {
        (
            Some(gauss_bonnet_ii(grid)?),
            Some(ii_eta_area(grid, tol.get("ii_area"))?),
            Some(keta_floor_check(grid, tol.get("floor"))?),
        )
    } else {
        (None, None, None)
    };
    let bound = if with_lambda1 { Some(eigen_bound(grid, slack)?) } else { None };
    Ok(GlobalReport {
        surface: grid.patch.name.clone(),
        n_theta: grid.n_theta,
        n_phi: grid.n_phi,
        area: grid.area(),
        gauss_bonnet: gb,
        gauss_bonnet_ii: gb_ii,
        margins: Margins {
            gauss_bonnet: (gb - 4.0 * PI).abs(),
            gauss_bonnet_ii: gb_ii.map(|v| (v - 4.0 * PI).abs()),
            ii_eta_area: area_ii.as_ref().map(|a| a.deficit),
            eigen_bound: bound.as_ref().map(|b| b.relative_margin),
        },
        ii_eta_area: area_ii,
        keta_floor: floor,
        umbilic: locate_umbilic(grid).ok(),
        bound_rhs: bound.as_ref().map(|b| b.bound_rhs),
        lambda1: bound.map(|b| b.lambda1),
        slack,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UmbilicPoint {
    pub theta: f64,
    pub phi: f64,
    /// Whether the point is in the rotated (pole) chart.
    pub pole_chart: bool,
    pub gap_low: f64,
    pub gap_high: f64,
}

struct LocalObjective<'a> {
    patch: &'a SurfacePatch,
    f: fn(&PointGeometry) -> f64,
}

impl CostFunction for LocalObjective<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        Ok(match point_geometry(self.patch, x[0], x[1]) {
            Ok(g) => (self.f)(&g),
            Err(_) => f64::INFINITY,
        })
    }
}

struct Refined {
    patch: SurfacePatch,
    pole_chart: bool,
    theta: f64,
    phi: f64,
}

/// Local simplex minimization of `f` from a grid node, switching to the
/// rotated chart near the poles.
fn refine(grid: &SphereGrid, start: &GridNode, f: fn(&PointGeometry) -> f64) -> Result<Refined> {
    let (mut theta, mut phi) = (start.theta, start.phi);
    let near_pole = theta.sin() < 0.5;
    let patch = if near_pole {
        let w = crate::catalog::omega(theta, phi);
        // Same point in the rotated chart: omega = (cos t, sin t cos p, sin t sin p).
        theta = w[0].clamp(-1.0, 1.0).acos();
        phi = w[2].atan2(w[1]).rem_euclid(2.0 * PI);
        grid.patch
            .pole_patch()
            .ok_or_else(|| GeometryError::NotCompact(grid.patch.name.clone()))?
    } else {
        grid.patch.clone()
    };
    let h = 0.5 * PI / grid.n_theta as f64;
    let simplex = vec![vec![theta, phi], vec![theta + h, phi], vec![theta, phi + h]];
    let solver = NelderMead::new(simplex).with_sd_tolerance(1e-20).expect("positive tolerance");
    let best = Executor::new(LocalObjective { patch: &patch, f }, solver)
        .configure(|s| s.max_iters(400))
        .timer(false)
        .run()
        .ok()
        .and_then(|r| r.state().get_best_param().cloned())
        .unwrap_or(vec![theta, phi]);
    Ok(Refined {
        patch,
        pole_chart: near_pole,
        theta: best[0],
        phi: best[1],
    })
}

/// Refines the grid minimizer of `gap_low`. Every closed surface of sphere
/// type has umbilic points, so this finds one to the precision of the
/// search.
pub fn locate_umbilic(grid: &SphereGrid) -> Result<UmbilicPoint> {
    let start = grid
        .nodes
        .iter()
        .min_by(|a, b| a.geometry.gap_low.total_cmp(&b.geometry.gap_low))
        .ok_or_else(|| GeometryError::NotCompact("empty grid".into()))?;
    let r = refine(grid, start, |g| g.gap_low)?;
    let g = point_geometry(&r.patch, r.theta, r.phi)?;
    Ok(UmbilicPoint {
        theta: r.theta,
        phi: r.phi,
        pole_chart: r.pole_chart,
        gap_low: g.gap_low,
        gap_high: g.gap_high,
    })
}

pub const CSV_HEADER: &str = "theta,phi,K,Keta,d,gap_low,gap_high,psi0";

/// Node dump, one row per grid node; `Keta` is empty when not computed.
pub fn write_nodes_csv<W: Write>(grid: &SphereGrid, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for n in &grid.nodes {
        let g = &n.geometry;
        let k_eta = g.k_eta.map(|v| format!("{v:.17e}")).unwrap_or_default();
        writeln!(
            out,
            "{:.17e},{:.17e},{:.17e},{},{:.17e},{:.17e},{:.17e},{:.17e}",
            n.theta,
            n.phi,
            g.k,
            k_eta,
            g.dkr,
            g.gap_low,
            g.gap_high,
            g.psi.time()
        )?;
    }
    Ok(())
}

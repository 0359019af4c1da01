//! Browser bindings: a heatmap of one invariant over the sphere chart, a
//! point inspector and the `Var(K^eta)` objective, all for `e^sigma` times
//! the unit sphere with `sigma` given as `[[l, m, a], ...]` JSON.

use lightcone_core::catalog::perturbed_sphere;
use lightcone_core::curvature::curvature_relation;
use lightcone_core::harmonics::HarmonicSpec;
use lightcone_core::search::keta_variance as objective;
use lightcone_core::surface::point_geometry;
use lightcone_core::SurfacePatch;
use serde::Serialize;
use wasm_bindgen::prelude::*;

const QUANTITIES: [&str; 5] = ["K", "Keta", "d", "gap", "psi0"];

fn surface(spec_json: &str) -> Result<SurfacePatch, String> {
    let spec: HarmonicSpec = serde_json::from_str(spec_json).map_err(|e| format!("spec: {e}"))?;
    spec.validate().map_err(|e| e.to_string())?;
    perturbed_sphere(&spec, 1.0).map_err(|e| e.to_string())
}

/// Row-major `n_theta x n_phi` samples at cell centres; NaN where the
/// quantity is undefined (e.g. `Keta` where `II_eta` is not definite).
pub fn field_grid_values(spec_json: &str, quantity: &str, n_theta: usize, n_phi: usize) -> Result<Vec<f64>, String> {
    if !QUANTITIES.contains(&quantity) {
        return Err(format!("unknown quantity `{quantity}`, expected one of {QUANTITIES:?}"));
    }
    if n_theta == 0 || n_phi == 0 || n_theta * n_phi > 1 << 20 {
        return Err("grid must be non-empty and at most 2^20 cells".into());
    }
    let patch = surface(spec_json)?;
    let mut out = Vec::with_capacity(n_theta * n_phi);
    for i in 0..n_theta {
        let theta = std::f64::consts::PI * (i as f64 + 0.5) / n_theta as f64;
        for j in 0..n_phi {
            let phi = std::f64::consts::TAU * (j as f64 + 0.5) / n_phi as f64;
            let value = point_geometry(&patch, theta, phi).ok().and_then(|g| match quantity {
                "K" => Some(g.k),
                "Keta" => lightcone_core::curvature::k_eta(&patch, theta, phi).ok(),
                "d" => Some(g.dkr),
                "gap" => Some(g.gap_low),
                _ => Some(g.psi.time()),
            });
            out.push(value.unwrap_or(f64::NAN));
        }
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct PointReport {
    pub theta: f64,
    pub phi: f64,
    pub psi: [f64; 4],
    pub eta: [f64; 4],
    pub k: f64,
    pub k_eta: Option<f64>,
    pub d: f64,
    pub gap_low: f64,
    pub gap_high: f64,
    pub h_norm_sq: f64,
    /// Residual of the curvature identity, when `II_eta` is definite.
    pub identity_residual: Option<f64>,
}

pub fn point_values(spec_json: &str, theta: f64, phi: f64) -> Result<PointReport, String> {
    let patch = surface(spec_json)?;
    let g = point_geometry(&patch, theta, phi).map_err(|e| e.to_string())?;
    let rel = curvature_relation(&patch, theta, phi).ok();
    Ok(PointReport {
        theta,
        phi,
        psi: g.psi.0,
        eta: g.eta.0,
        k: g.k,
        k_eta: rel.as_ref().map(|r| r.k_eta),
        d: g.dkr,
        gap_low: g.gap_low,
        gap_high: g.gap_high,
        h_norm_sq: g.h_norm_sq,
        identity_residual: rel.map(|r| r.residual),
    })
}

pub fn variance_values(spec_json: &str, n_theta: usize, n_phi: usize) -> Result<String, String> {
    let spec: HarmonicSpec = serde_json::from_str(spec_json).map_err(|e| format!("spec: {e}"))?;
    spec.validate().map_err(|e| e.to_string())?;
    let e = objective(&spec, n_theta.max(2), n_phi.max(2), 1e3, 0.02);
    serde_json::to_string(&e).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn field_grid(spec_json: &str, quantity: &str, n_theta: usize, n_phi: usize) -> Result<Vec<f64>, JsError> {
    field_grid_values(spec_json, quantity, n_theta, n_phi).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn point_report(spec_json: &str, theta: f64, phi: f64) -> Result<String, JsError> {
    let report = point_values(spec_json, theta, phi).map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&report).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn keta_variance(spec_json: &str, n_theta: usize, n_phi: usize) -> Result<String, JsError> {
    variance_values(spec_json, n_theta, n_phi).map_err(|e| JsError::new(&e))
}

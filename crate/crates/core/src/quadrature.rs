//! Gauss-Legendre nodes and the tensor grid over sphere charts.

use rayon::prelude::*;
use std::f64::consts::PI;

use crate::curvature::{k_eta_from_frame, DifferenceTensor};
use crate::error::{GeometryError, Result};
use crate::surface::{Frame, PointGeometry, SurfacePatch};

/// Nodes (ascending) and weights of the `n`-point Gauss-Legendre rule on
/// [-1, 1], by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "need at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Quadrature node of a sphere grid with its cached geometry.
#[derive(Debug, Clone)]
pub struct GridNode {
    pub theta: f64,
    pub phi: f64,
    /// Weight of the coordinate measure `d theta d phi`.
    pub weight: f64,
    pub geometry: PointGeometry,
    pub difference: Option<DifferenceTensor>,
}

impl GridNode {
    /// Weight of the induced area measure.
    pub fn area_weight(&self) -> f64 {
        self.weight * self.geometry.g.determinant().sqrt()
    }
}

/// Gauss-Legendre in `cos(theta)` times a uniform `phi` grid. All nodes are
/// strictly inside the chart, so the coordinate poles are never evaluated.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    pub n_theta: usize,
    pub n_phi: usize,
    pub nodes: Vec<GridNode>,
    pub patch: SurfacePatch,
}

/// `(theta, phi, coordinate weight)` for an `n_theta x n_phi` sphere grid,
/// theta-major.
pub fn sphere_nodes(n_theta: usize, n_phi: usize) -> Vec<(f64, f64, f64)> {
    let (x, w) = gauss_legendre(n_theta);
    let dphi = 2.0 * PI / n_phi as f64;
    let mut out = Vec::with_capacity(n_theta * n_phi);
    // Descending cos(theta) gives ascending theta.
    for i in (0..n_theta).rev() {
        let theta = x[i].acos();
        let sin_t = (1.0 - x[i] * x[i]).sqrt();
        for j in 0..n_phi {
            out.push((theta, dphi * (j as f64 + 0.5), w[i] * dphi / sin_t));
        }
    }
    out
}

impl SphereGrid {
    /// Builds the grid; with `with_k_eta` the nodes also carry `K^eta` and
    /// the difference tensor (requires nondegenerate, Riemannian `II_eta`).
    pub fn build(patch: &SurfacePatch, n_theta: usize, n_phi: usize, with_k_eta: bool) -> Result<Self> {
        if !patch.is_compact() {
            return Err(GeometryError::NotCompact(patch.name.clone()));
        }
        let nodes = sphere_nodes(n_theta, n_phi)
            .into_par_iter()
            .map(|(theta, phi, weight)| {
                let frame = Frame::new(patch, theta, phi)?;
                let mut geometry = PointGeometry::from_frame(&frame);
                let mut difference = None;
                if with_k_eta {
                    geometry.k_eta = Some(k_eta_from_frame(&frame)?);
                    difference = crate::curvature::difference_from_frame(&frame, 0.0).ok();
                }
                Ok(GridNode {
                    theta,
                    phi,
                    weight,
                    geometry,
                    difference,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n_theta,
            n_phi,
            nodes,
            patch: patch.clone(),
        })
    }

    pub fn area(&self) -> f64 {
        self.nodes.iter().map(GridNode::area_weight).sum()
    }
}

/// Cell-centered uniform points over a rectangular domain.
pub fn rectangle_points(domain: &crate::surface::Domain, n_u: usize, n_v: usize) -> Vec<(f64, f64)> {
    let du = (domain.u.1 - domain.u.0) / n_u as f64;
    let dv = (domain.v.1 - domain.v.0) / n_v as f64;
    (0..n_u)
        .flat_map(|i| {
            (0..n_v).map(move |j| {
                (domain.u.0 + du * (i as f64 + 0.5), domain.v.0 + dv * (j as f64 + 0.5))
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_small_cases() {
        let (x, w) = gauss_legendre(3);
        assert!((x[2] - 0.7745966692414834).abs() < 1e-15);
        assert!(x[1].abs() < 1e-15);
        assert!((w[1] - 0.8888888888888888).abs() < 1e-15);
        assert!((w[0] - 0.5555555555555556).abs() < 1e-15);
    }

    #[test]
    fn legendre_rule_exact_for_polynomials() {
        for n in [5, 16, 32, 64] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for k in 0..(2 * n).min(40) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn sphere_nodes_integrate_area_form() {
        let total: f64 = sphere_nodes(8, 16).iter().map(|(t, _, w)| w * t.sin()).sum();
        assert!((total - 4.0 * PI).abs() < 1e-12);
    }
}

use std::f64::consts::PI;

use lightcone_core::catalog::{paraboloid_graph, perturbed_sphere, product_cylinder, rest_frame, round_sphere};
use lightcone_core::global::{
    gauss_bonnet, global_report, ii_eta_area, integrate_with, keta_floor_check, write_nodes_csv, Measure, CSV_HEADER,
};
use lightcone_core::harmonics::HarmonicSpec;
use lightcone_core::laplacian::{lambda1_at, lambda1_estimate};
use lightcone_core::quadrature::SphereGrid;
use lightcone_core::verify::Tolerances;
use lightcone_core::GeometryError;

fn perturbed(eps: f64) -> lightcone_core::SurfacePatch {
    perturbed_sphere(&HarmonicSpec::new([(2, 0, eps), (3, 1, 0.6 * eps), (1, -1, 0.4 * eps)]), 1.0).unwrap()
}

#[test]
fn round_sphere_area_to_quadrature_precision() {
    for r in [0.5, 1.0, 3.0] {
        let grid = SphereGrid::build(&round_sphere(&rest_frame(), r).unwrap(), 32, 64, false).unwrap();
        let area = integrate_with(&grid, Measure::Induced, |_| 1.0).unwrap();
        assert!((area / (4.0 * PI * r * r) - 1.0).abs() < 1e-8);
    }
}

#[test]
fn gauss_bonnet_on_perturbed_sphere() {
    let grid = SphereGrid::build(&perturbed(0.05), 32, 64, true).unwrap();
    assert!((gauss_bonnet(&grid) / (4.0 * PI) - 1.0).abs() < 1e-6);
    let report = global_report(&grid, false, &Tolerances::default()).unwrap();
    assert!(report.margins.gauss_bonnet_ii.unwrap() < 1e-5);
    assert!(report.ii_eta_area.as_ref().unwrap().deficit > 0.0);
    assert!(report.umbilic.as_ref().unwrap().gap_low < 1e-6);
    let json = serde_json::to_value(&report).unwrap();
    for key in ["surface", "Ntheta", "Nphi", "gauss_bonnet", "ii_eta_area", "lambda1", "bound_rhs", "margins"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn quadrature_converges_under_doubling() {
    let patch = perturbed(0.05);
    let coarse = gauss_bonnet(&SphereGrid::build(&patch, 24, 48, false).unwrap());
    let fine = gauss_bonnet(&SphereGrid::build(&patch, 48, 96, false).unwrap());
    assert!((coarse - fine).abs() < 1e-9);
}

#[test]
fn ii_area_and_floor() {
    let grid = SphereGrid::build(&perturbed(0.03), 32, 64, true).unwrap();
    let area = ii_eta_area(&grid, 1e-6).unwrap();
    assert!(area.within_bound && area.area < 2.0 * PI);
    let floor = keta_floor_check(&grid, 1e-6).unwrap();
    assert!(floor.value >= 4.0 - 1e-6 && floor.chain_holds && floor.at_least_four);
}

#[test]
fn noncompact_surfaces_are_rejected() {
    assert!(matches!(
        SphereGrid::build(&paraboloid_graph(), 8, 16, true),
        Err(GeometryError::NotCompact(_))
    ));
    assert!(matches!(
        SphereGrid::build(&product_cylinder(), 8, 16, false),
        Err(GeometryError::NotCompact(_))
    ));
}

#[test]
fn lambda1_scales_with_radius() {
    let est = lambda1_estimate(&round_sphere(&rest_frame(), 2.0).unwrap(), 32, 64).unwrap();
    assert!((est.lambda1 / 0.5 - 1.0).abs() < 2e-2);
    assert!(est.refinement_gap < 1e-2);
}

#[test]
fn lambda1_refinement_is_cauchy_like() {
    let patch = perturbed(0.05);
    let l: Vec<f64> = [32, 48, 64].iter().map(|&n| lambda1_at(&patch, n, 2 * n).unwrap()).collect();
    let (g1, g2) = ((l[1] - l[0]).abs(), (l[2] - l[1]).abs());
    assert!(g2 * 2.0 <= g1, "{l:?}");
}

#[test]
fn csv_dump_shape() {
    let grid = SphereGrid::build(&perturbed(0.02), 6, 12, true).unwrap();
    let mut buf = Vec::new();
    write_nodes_csv(&grid, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    assert_eq!(lines.count(), 72);
}

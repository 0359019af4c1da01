//! End-to-end acceptance suite. Runs every criterion, prints one line per
//! criterion and exits nonzero if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use lightcone_core::catalog::{
    paraboloid_graph, perturbed_sphere, product_cylinder, random_spec, rest_frame, round_sphere,
};
use lightcone_core::curvature::curvature_relation;
use lightcone_core::global::{eigen_bound, gauss_bonnet, gauss_bonnet_ii, ii_eta_area, keta_floor_check, locate_umbilic};
use lightcone_core::harmonics::HarmonicSpec;
use lightcone_core::minkowski::MinkowskiVec;
use lightcone_core::quadrature::SphereGrid;
use lightcone_core::search::{search, write_trace_csv, Classification, SearchConfig};
use lightcone_core::surface::{point_geometry, SurfacePatch};
use lightcone_core::transform::{verify_des30, verify_expansion_weingarten, ScalarField};
use lightcone_core::verify::{double_conjugate_residual, sample_points};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn require(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if ok {
            self.notes.push(what);
        } else {
            self.failures.push(what);
        }
    }
}

fn run(index: usize, title: &str, budget: Duration, body: impl FnOnce(&mut Outcome)) -> bool {
    let start = Instant::now();
    let mut out = Outcome::new();
    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| body(&mut out)));
    let elapsed = start.elapsed();
    if result.is_err() {
        out.failures.push("panicked".into());
    }
    if elapsed > budget {
        out.failures.push(format!("runtime {:.2?} over budget {:.0?}", elapsed, budget));
    }
    let ok = out.failures.is_empty();
    println!(
        "[{}] {index}. {title} ({:.2} s)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    for f in &out.failures {
        println!("       failed: {f}");
    }
    for n in &out.notes {
        println!("       ok: {n}");
    }
    ok
}

fn boosted(rapidity: f64, dir: [f64; 3]) -> MinkowskiVec {
    let n = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
    let s = rapidity.sinh() / n;
    MinkowskiVec::new(-rapidity.cosh(), s * dir[0], s * dir[1], s * dir[2])
}

fn random_perturbed(rng: &mut ChaCha8Rng, l_max: u32, eps_max: f64) -> (HarmonicSpec, SurfacePatch) {
    let eps = rng.gen_range(0.2 * eps_max..=eps_max);
    let spec = random_spec(rng, l_max, eps);
    let patch = perturbed_sphere(&spec, 1.0).expect("perturbed sphere");
    (spec, patch)
}

fn criterion1(out: &mut Outcome) {
    let boosts = [
        boosted(0.3, [1.0, 0.0, 0.0]),
        boosted(0.8, [0.2, -1.0, 0.5]),
        boosted(1.5, [-0.4, 0.3, 1.0]),
    ];
    let mut worst = [0.0_f64; 4];
    for r in [0.5, 1.0, 2.0] {
        for (i, u) in boosts.iter().enumerate() {
            let patch = round_sphere(u, r).unwrap();
            for (t, p) in sample_points(&patch, 200, 10 + i as u64) {
                let g = point_geometry(&patch, t, p).unwrap();
                let ke = lightcone_core::curvature::k_eta(&patch, t, p).unwrap();
                let a = (g.a_eta + nalgebra::Matrix2::identity() / (2.0 * r * r)).abs().max();
                worst[0] = worst[0].max(a);
                worst[1] = worst[1].max((g.k - 1.0 / (r * r)).abs());
                worst[2] = worst[2].max((g.dkr - 1.0 / (4.0 * r.powi(4))).abs());
                worst[3] = worst[3].max((ke - 2.0).abs());
            }
        }
    }
    out.require(worst[0] < 1e-9, format!("sup |A_eta + I/(2r^2)| = {:.2e} < 1e-9", worst[0]));
    out.require(worst[1] < 1e-9, format!("sup |K - 1/r^2| = {:.2e} < 1e-9", worst[1]));
    out.require(worst[2] < 1e-9, format!("sup |d - 1/(4r^4)| = {:.2e} < 1e-9", worst[2]));
    out.require(worst[3] < 1e-8, format!("sup |K^eta - 2| = {:.2e} < 1e-8", worst[3]));
}

fn criterion2(out: &mut Outcome) {
    let cyl = product_cylinder();
    let mut w = [0.0_f64; 3];
    for (x, y) in sample_points(&cyl, 200, 2) {
        let g = point_geometry(&cyl, x, y).unwrap();
        w[0] = w[0].max((g.dkr + 0.25).abs());
        w[1] = w[1].max(g.k.abs());
        w[2] = w[2].max((2.0 * (g.a_eta * g.a_eta).trace() - 1.0).abs());
    }
    out.require(w[0] < 1e-10, format!("cylinder sup |d + 1/4| = {:.2e} < 1e-10", w[0]));
    out.require(w[1] < 1e-10, format!("cylinder sup |K| = {:.2e} < 1e-10", w[1]));
    out.require(w[2] < 1e-10, format!("cylinder sup |2 tr A^2 - 1| = {:.2e} < 1e-10", w[2]));
    let par = paraboloid_graph();
    let target = MinkowskiVec::new(-1.0, -1.0, 0.0, 0.0);
    let (mut e, mut a) = (0.0_f64, 0.0_f64);
    for (x, y) in sample_points(&par, 200, 3) {
        let g = point_geometry(&par, x, y).unwrap();
        e = e.max(g.eta.max_abs_diff(&target));
        a = a.max(g.a_eta.abs().max());
    }
    out.require(e < 1e-12, format!("paraboloid sup |eta - (-1,-1,0,0)| = {e:.2e} < 1e-12"));
    out.require(a < 1e-12, format!("paraboloid sup |A_eta| = {a:.2e} < 1e-12"));
}

fn criterion3(out: &mut Outcome) {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let (_, patch) = random_perturbed(&mut rng, 3, 0.05);
        for (t, p) in sample_points(&patch, 100, rng.gen()) {
            worst = worst.max(curvature_relation(&patch, t, p).unwrap().residual);
        }
    }
    out.require(worst < 1e-6, format!("sup des5 residual over 1000 points = {worst:.2e} < 1e-6"));
}

fn criterion4(out: &mut Outcome) {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let mut w = [0.0_f64; 4];
    for _ in 0..5 {
        let (_, patch) = random_perturbed(&mut rng, 3, 0.05);
        let pts = sample_points(&patch, 40, rng.gen());
        let c = verify_des30(&patch, &pts).unwrap();
        w[0] = w[0].max(c.inverse_shape);
        w[1] = w[1].max(c.second_form);
        w[2] = w[2].max(c.curvature);
        w[3] = w[3].max(double_conjugate_residual(&patch, &pts).unwrap());
    }
    out.require(w[0] < 1e-7, format!("sup |A~ A - I| = {:.2e} < 1e-7", w[0]));
    out.require(w[1] < 1e-7, format!("sup |II~ - II| = {:.2e} < 1e-7", w[1]));
    out.require(w[2] < 1e-7, format!("sup |K~ - K/d| = {:.2e} < 1e-7", w[2]));
    out.require(w[3] < 1e-9, format!("sup |conj(conj psi) - psi| = {:.2e} < 1e-9", w[3]));
}

fn criterion5(out: &mut Outcome) {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let bases = [
        round_sphere(&rest_frame(), 1.0).unwrap(),
        round_sphere(&boosted(0.6, [0.0, 1.0, 1.0]), 0.7).unwrap(),
        perturbed_sphere(&HarmonicSpec::new([(2, 1, 0.04), (3, 0, -0.02)]), 1.2).unwrap(),
    ];
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        let eps = rng.gen_range(0.02..0.2);
        let sigma_spec = random_spec(&mut rng, 4, eps);
        let sigma = ScalarField::from_spec(&sigma_spec);
        let base = &bases[i % bases.len()];
        for (t, p) in sample_points(base, 20, rng.gen()) {
            let r = verify_expansion_weingarten(base, &sigma, t, p).unwrap();
            worst = worst.max(r.shape).max(r.second_form).max(r.curvature).max(r.metric);
        }
    }
    out.require(worst < 1e-7, format!("sup over K_sigma, A^sigma, II^sigma, g_sigma residuals = {worst:.2e} < 1e-7"));
}

fn compact_test_surfaces() -> Vec<(SurfacePatch, bool)> {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let mut out = vec![
        (round_sphere(&rest_frame(), 0.5).unwrap(), true),
        (round_sphere(&rest_frame(), 2.0).unwrap(), true),
        (round_sphere(&boosted(0.7, [1.0, -1.0, 0.5]), 1.0).unwrap(), true),
        (perturbed_sphere(&HarmonicSpec::new([(2, 0, 0.05)]), 1.0).unwrap(), false),
    ];
    for _ in 0..2 {
        out.push((random_perturbed(&mut rng, 3, 0.05).1, false));
    }
    out
}

fn criterion6(out: &mut Outcome) {
    let (mut gb, mut gb_ii, mut round_area): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut min_deficit = f64::INFINITY;
    for (patch, umbilical) in compact_test_surfaces() {
        let grid = SphereGrid::build(&patch, 64, 128, true).unwrap();
        gb = gb.max((gauss_bonnet(&grid) - 4.0 * PI).abs());
        gb_ii = gb_ii.max((gauss_bonnet_ii(&grid).unwrap() - 4.0 * PI).abs());
        let area = ii_eta_area(&grid, 1e-6).unwrap();
        if umbilical {
            round_area = round_area.max((area.area - 2.0 * PI).abs());
        } else {
            min_deficit = min_deficit.min(area.deficit);
        }
    }
    out.require(gb < 1e-6, format!("sup |int K dA - 4 pi| = {gb:.2e} < 1e-6"));
    out.require(gb_ii < 1e-5, format!("sup |int K^eta dA_II - 4 pi| = {gb_ii:.2e} < 1e-5"));
    out.require(round_area < 1e-6, format!("round spheres: sup |area(II_eta) - 2 pi| = {round_area:.2e} < 1e-6"));
    out.require(min_deficit > 0.0, format!("non-umbilical: min (2 pi - area(II_eta)) = {min_deficit:.3e} > 0"));
}

fn criterion7(out: &mut Outcome) {
    let slack = 0.05;
    let r = 0.5;
    let round = round_sphere(&rest_frame(), r).unwrap();
    let grid = SphereGrid::build(&round, 64, 128, false).unwrap();
    let b = eigen_bound(&grid, slack).unwrap();
    let rel = (b.lambda1.lambda1 * r * r / 2.0 - 1.0).abs();
    out.require(rel < 2e-2, format!("round r={r}: lambda1 = {:.6}, relative error {rel:.2e} < 2e-2", b.lambda1.lambda1));
    out.require(b.holds, format!("round r={r}: bound holds (margin {:+.3e})", b.relative_margin));
    for eps in [0.0, 0.02, 0.05] {
        let patch = perturbed_sphere(&HarmonicSpec::new([(2, 0, eps)]), 1.0).unwrap();
        let grid = SphereGrid::build(&patch, 64, 128, false).unwrap();
        let b = eigen_bound(&grid, slack).unwrap();
        out.require(
            b.holds,
            format!(
                "eps={eps}: lambda1 = {:.6} <= (1+{slack}) * {:.6} (margin {:+.3e})",
                b.lambda1.lambda1, b.bound_rhs, b.relative_margin
            ),
        );
        let expect_equality = eps == 0.0;
        out.require(
            b.equality_within_slack == expect_equality,
            format!(
                "eps={eps}: equality within {slack} slack is {} (expected {expect_equality}; |margin| = {:.3e})",
                b.equality_within_slack,
                b.relative_margin.abs()
            ),
        );
    }
}

fn criterion8(out: &mut Outcome) {
    let mut min_gap = f64::INFINITY;
    let noncompact = [product_cylinder(), paraboloid_graph()];
    for patch in &noncompact {
        for (u, v) in sample_points(patch, 200, 8) {
            let g = point_geometry(patch, u, v).unwrap();
            min_gap = min_gap.min(g.gap_low).min(g.gap_high);
        }
    }
    let mut worst_umbilic: f64 = 0.0;
    let mut min_floor = f64::INFINITY;
    for (patch, _) in compact_test_surfaces() {
        let grid = SphereGrid::build(&patch, 64, 128, true).unwrap();
        for n in &grid.nodes {
            min_gap = min_gap.min(n.geometry.gap_low).min(n.geometry.gap_high);
        }
        let u = locate_umbilic(&grid).unwrap();
        min_gap = min_gap.min(u.gap_low).min(u.gap_high);
        worst_umbilic = worst_umbilic.max(u.gap_low.max(u.gap_high));
        min_floor = min_floor.min(keta_floor_check(&grid, 1e-6).unwrap().value);
    }
    out.require(min_gap >= -1e-9, format!("min over all samples of both gaps = {min_gap:.2e} >= -1e-9"));
    out.require(
        worst_umbilic < 1e-6,
        format!("every compact surface has a sample with both gaps < 1e-6 (worst {worst_umbilic:.2e})"),
    );
    out.require(min_floor >= 4.0 - 1e-6, format!("min K^2/d at the d-argmax = {min_floor:.9} >= 4 - 1e-6"));
}

fn criterion9(out: &mut Outcome) {
    let mut total = 0;
    let mut converged = 0;
    let mut violations = Vec::new();
    let mut reproducible = true;
    for seed in 0..20 {
        let config = SearchConfig {
            l_max: 2,
            amplitude_box: 0.1,
            starts: 1,
            seed,
            ..SearchConfig::default()
        };
        let report = search(&config).unwrap();
        let again = search(&config).unwrap();
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_trace_csv(&report.trace, &mut a).unwrap();
        write_trace_csv(&again.trace, &mut b).unwrap();
        reproducible &= a == b;
        for s in &report.starts {
            total += 1;
            let e = &s.evaluation;
            if e.variance < 1e-8 && !e.barrier_active {
                converged += 1;
                if !(e.sup_gap_low < 1e-4 && (e.mean_k_eta - 2.0).abs() < 1e-3) {
                    violations.push(format!("seed {seed}: gap {:.2e}, mean {:.6}", e.sup_gap_low, e.mean_k_eta));
                }
            }
            let verified = match s.classification {
                Classification::Candidate => s.verification.is_some(),
                Classification::Demoted => s.note.is_some(),
                _ => true,
            };
            if !verified {
                violations.push(format!("seed {seed}: candidate not re-verified"));
            }
        }
    }
    out.require(reproducible, "every seed reproduces a byte-identical trace");
    out.require(
        violations.is_empty(),
        format!("{converged}/{total} minimizers with Var < 1e-8, all with sup gap < 1e-4 and |mean K^eta - 2| < 1e-3 {violations:?}"),
    );
}

fn main() {
    let results = [
        run(1, "round-sphere exactness", Duration::from_secs(5), criterion1),
        run(2, "noncompact catalog examples", Duration::from_secs(1), criterion2),
        run(3, "curvature identity on perturbed spheres", Duration::from_secs(30), criterion3),
        run(4, "conjugate duality", Duration::from_secs(30), criterion4),
        run(5, "expansion laws", Duration::from_secs(30), criterion5),
        run(6, "global integrals", Duration::from_secs(20), criterion6),
        run(7, "first-eigenvalue bound", Duration::from_secs(60), criterion7),
        run(8, "inequality suite", Duration::from_secs(60), criterion8),
        run(9, "search machinery", Duration::from_secs(600), criterion9),
    ];
    let passed = results.iter().filter(|ok| **ok).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}

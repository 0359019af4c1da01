use lightcone_core::harmonics::HarmonicSpec;
use lightcone_core::search::{keta_variance, rotate_spec, search, write_trace_csv, Classification, SearchConfig};
use nalgebra::Rotation3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn variance_fixture() {
    let e = keta_variance(&HarmonicSpec::new([(2, 0, 0.05)]), 16, 32, 1e3, 0.02);
    assert!(e.variance > 0.0);
    assert!((e.variance - 9.1136289e-5).abs() < 1e-11, "{}", e.variance);
    assert!(!e.barrier_active);
}

#[test]
fn objective_is_rotation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let spec = HarmonicSpec::new([(1, 0, 0.03), (1, 1, -0.02), (2, 0, 0.04), (2, -1, 0.03), (2, 2, -0.02)]);
    for _ in 0..3 {
        let r = Rotation3::from_euler_angles(rng.gen_range(-3.0..3.0), rng.gen_range(-1.5..1.5), rng.gen_range(-3.0..3.0));
        let rotated = rotate_spec(&spec, r.matrix());
        let a = keta_variance(&spec, 16, 32, 1e3, 0.02).objective;
        let b = keta_variance(&rotated, 16, 32, 1e3, 0.02).objective;
        assert!((a - b).abs() < 1e-8);
    }
}

fn small_config(seed: u64) -> SearchConfig {
    SearchConfig {
        l_max: 2,
        amplitude_box: 0.1,
        n_theta: 10,
        n_phi: 20,
        max_iter: 60,
        starts: 2,
        seed,
        ..SearchConfig::default()
    }
}

#[test]
fn search_is_deterministic() {
    let a = search(&small_config(3)).unwrap();
    let b = search(&small_config(3)).unwrap();
    let (mut x, mut y) = (Vec::new(), Vec::new());
    write_trace_csv(&a.trace, &mut x).unwrap();
    write_trace_csv(&b.trace, &mut y).unwrap();
    assert_eq!(x, y);
    assert_eq!(a.seed, 3);
    let c = search(&small_config(4)).unwrap();
    assert_ne!(a.starts[0].initial, c.starts[0].initial);
}

#[test]
fn origin_start_stays_round() {
    let config = SearchConfig {
        starts: 0,
        include_origin: true,
        ..small_config(0)
    };
    let report = search(&config).unwrap();
    let s = &report.starts[0];
    assert!(s.evaluation.variance < 1e-12);
    assert_eq!(s.classification, Classification::Umbilical);
    assert!(report.all_converged_umbilical);
    assert!((report.mean_k_eta - 2.0).abs() < 1e-9);
}

#[test]
fn invalid_configs_are_rejected() {
    let bad = SearchConfig {
        variance_tol: 0.0,
        ..SearchConfig::default()
    };
    assert!(search(&bad).is_err());
    let frozen = SearchConfig {
        l_max: 1,
        ..SearchConfig::default()
    };
    assert!(frozen.validate().is_err());
}

mod common;

use std::f64::consts::PI;

use common::forest_of;
use nodal_atlas::field::{draw_plane_waves, eval_field, FieldGrid, GridSpec, SpectralParams};
use nodal_atlas::kacrice::{beta_1_alpha, count_sign_changes};
use nodal_atlas::measures::*;
use nodal_atlas::topology::NestingForest;
use nodal_atlas::Error;
use proptest::prelude::*;

fn synthetic(radius: f64, h: f64, f: impl Fn([f64; 2]) -> f64) -> FieldGrid {
    FieldGrid::from_fn(GridSpec::covering_ball(radius, h), radius, f)
}

fn sample_forest(alpha: f64, seed: u64, index: u64, radius: f64) -> NestingForest {
    let p = SpectralParams::new(2, alpha, 512, seed).unwrap();
    let w = draw_plane_waves(&p, index).unwrap();
    forest_of(&eval_field(&w, GridSpec::covering_ball(radius, 0.15), false).unwrap())
}

fn contribution(f: &NestingForest, i: u64, corr: EdgeCorrection) -> SampleContribution {
    accumulate(f, i, 0, corr, DiagnosticParams::default()).unwrap()
}

#[test]
fn single_bump() {
    let f = forest_of(&synthetic(6.0, 0.02, |x| 1.0 - (x[0] * x[0] + x[1] * x[1]) / 4.0));
    let plain = contribution(&f, 0, EdgeCorrection::None);
    assert_eq!(plain.mu_gamma.total, 1);
    assert_eq!(plain.mu_gamma.count(&1), 1);
    assert_eq!(plain.mu_gamma.probability(&1), 1.0);
    assert_eq!(plain.mu_x.count(&"()".to_string()), 1);
    assert_eq!(plain.report.n_components, 1);
    assert!(plain.report.handshake_ok);

    // a disk of radius 2 fits in B(6) for translates in B(4)
    let ml = contribution(&f, 0, EdgeCorrection::MilesLantuejoul);
    assert_eq!(ml.mu_gamma.count(&1), 1);
    assert!((ml.mu_gamma.mass(&1) - 36.0 / 16.0).abs() < 0.01, "{}", ml.mu_gamma.mass(&1));
}

#[test]
fn nested_circles() {
    let f = forest_of(&synthetic(3.0, 0.02, |x| (PI * x[0].hypot(x[1])).cos()));
    let c = contribution(&f, 0, EdgeCorrection::None);
    // the central disk has one boundary curve, each annulus two
    assert_eq!(c.mu_gamma.count(&1), 1);
    assert_eq!(c.mu_gamma.count(&2), 2);
    assert_eq!(c.mu_gamma.total, 3);
    for code in ["()", "(())", "((()))"] {
        assert_eq!(c.mu_x.count(&code.to_string()), 1, "{code}");
    }
    let (mean, _) = c.mu_gamma.mean_with_stderr();
    assert!((mean - 5.0 / 3.0).abs() < 1e-12);
}

#[test]
fn handshake_by_brute_force() {
    for seed in 0..5 {
        let f = sample_forest(0.5, seed, 0, 15.0);
        let mut m = vec![0u32; f.domain_count];
        for c in &f.curves {
            m[c.plus_domain as usize] += 1;
            m[c.minus_domain as usize] += 1;
            assert_ne!(c.plus_domain, c.minus_domain);
            assert_ne!(f.domain_positive[c.plus_domain as usize], f.domain_positive[c.minus_domain as usize]);
        }
        assert_eq!(m, f.connectivity);
        assert_eq!(m.iter().sum::<u32>() as usize, 2 * f.curves.len());
        assert!(contribution(&f, 0, EdgeCorrection::None).report.handshake_ok);
    }
}

#[test]
fn ns_constant_on_the_line() {
    // on the line the nodal components are the zeros and beta = sqrt(lambda2)
    for alpha in [0.0, 1.0] {
        let p = SpectralParams::new(1, alpha, 512, 4).unwrap();
        let radius = 400.0;
        let reports: Vec<CountReport> = (0..30)
            .map(|i| {
                let w = draw_plane_waves(&p, i).unwrap();
                let g = eval_field(&w, GridSpec::covering_interval(radius, 0.05), false).unwrap();
                let n = count_sign_changes(&g.values);
                CountReport {
                    sample_index: i,
                    seed: 4,
                    dim: 1,
                    window_radius: Some(radius),
                    n_components: n,
                    n_components_star: n,
                    volume: 2.0 * radius,
                    n_domains: n + 1,
                    n_interior_domains: n.saturating_sub(1),
                    handshake_ok: true,
                    tree_identity_ok: None,
                }
            })
            .collect();
        let est = ns_constant_estimate(&reports).unwrap();
        let want = beta_1_alpha(alpha);
        assert!(
            (est.beta_hat - want).abs() < 4.0 * est.beta_stderr + 0.005,
            "alpha {alpha}: {est:?} vs {want}"
        );
    }
    assert!(matches!(ns_constant_estimate(&[]), Err(Error::InsufficientData(_))));
}

fn pooled(radius: f64, samples: u64) -> Accumulator {
    let mut acc = Accumulator::new("stabilization");
    for i in 0..samples {
        let f = sample_forest(1.0, 77, i, radius);
        acc.add_sample(contribution(&f, i, EdgeCorrection::MilesLantuejoul)).unwrap();
    }
    acc
}

#[test]
fn estimates_stabilize_as_the_window_doubles() {
    let small = pooled(30.0, 48);
    let large = pooled(60.0, 12);
    let (p_small, p_large) = (small.mu_gamma.probability(&1), large.mu_gamma.probability(&1));
    assert!((p_small - p_large).abs() < 0.03, "{p_small} vs {p_large}");
    let ns_small = ns_constant_estimate(&small.report_list()).unwrap();
    let ns_large = ns_constant_estimate(&large.report_list()).unwrap();
    // only closed curves count, and the share cut by the window decays like 1/R
    let rel = (ns_small.estimate - ns_large.estimate).abs() / ns_large.estimate;
    assert!(rel < 0.2, "{ns_small:?} vs {ns_large:?}");
    assert!(ns_small.estimate < ns_large.estimate);
}

#[test]
fn sandwich_holds_on_random_samples() {
    let big_r = 16.0;
    let r = big_r / 4.0;
    for i in 0..10 {
        let f = sample_forest(0.3, 12, i, big_r + 2.0 * r);
        let s = sandwich_check(&f, r, big_r, 0.5).unwrap();
        assert!(!s.violated, "{s:?}");
        assert!(s.lower <= s.mid + s.tolerance && s.mid <= s.upper + s.tolerance);
    }
    let f = sample_forest(0.3, 12, 0, big_r + r);
    assert!(matches!(sandwich_check(&f, r, big_r, 0.5), Err(Error::Precondition(_))));
}

#[test]
fn ten_shards_merge_to_the_pooled_run() {
    let forests: Vec<NestingForest> = (0..20).map(|i| sample_forest(0.7, 3, i, 12.0)).collect();
    let mut whole = Accumulator::new("k");
    for (i, f) in forests.iter().enumerate() {
        whole.add_sample(contribution(f, i as u64, EdgeCorrection::MilesLantuejoul)).unwrap();
    }
    let shards: Vec<Accumulator> = (0..10)
        .map(|k| {
            let mut a = Accumulator::new("k");
            for (i, f) in forests.iter().enumerate().filter(|(i, _)| i % 10 == k) {
                a.add_sample(contribution(f, i as u64, EdgeCorrection::MilesLantuejoul)).unwrap();
            }
            a
        })
        .collect();
    let forward = shards[1..].iter().fold(shards[0].clone(), |a, b| merge(&a, b).unwrap());
    let backward = shards[..9].iter().rev().fold(shards[9].clone(), |a, b| merge(&a, b).unwrap());
    assert_eq!(forward, whole);
    assert_eq!(backward, whole);
    assert_eq!(
        serde_json::to_string(&forward).unwrap(),
        serde_json::to_string(&whole).unwrap()
    );
    assert!(merge(&whole, &shards[0]).is_err());
    assert!(merge(&whole, &Accumulator::new("other")).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn diagnostics_are_monotone(seed in any::<u64>(), xi in 0.1f64..5.0, dxi in 0.0f64..5.0, d in 1.0f64..30.0, dd in 0.0f64..30.0) {
        let f = sample_forest(0.5, seed, 0, 12.0);
        let a = small_long_diagnostics(&f, xi, d);
        let b = small_long_diagnostics(&f, xi + dxi, d + dd);
        prop_assert_eq!(a.n_countable, b.n_countable);
        prop_assert!(b.n_xi_small >= a.n_xi_small);
        prop_assert!(b.n_d_long <= a.n_d_long);
        prop_assert!(a.frac_xi_small() <= 1.0 && a.frac_d_long() <= 1.0);
    }
}

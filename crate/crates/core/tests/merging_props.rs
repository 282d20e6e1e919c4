mod common;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wavechain::merging::{
    certify_stability, check_wave_dominance, chi_square_distance, merging_time, nash_bound, pairwise_merging_measure,
    relative_sup_distance, scaling_study, sv_product_bound, tv_distance, wave_bound, Horizon, NashParams,
    SvProductBound, WaveBound,
};
use wavechain::models::{binary_cycling_system, circle_system, four_point_example, periodic_class_example};
use wavechain::spectral::is_primitive;
use wavechain::wave::{evolve_trajectory, for_each_window};
use wavechain::{Distance, Distribution, Error, MergingTime, Metric, Permutation, WaveSystem};

#[test]
fn relative_sup_merging_iff_shift_is_primitive() {
    for system in corpus() {
        let n = system.size() as u64;
        let r = merging_time(&system, 0.5, 5 * n * n, Metric::RelativeSup).unwrap();
        assert_eq!(r.steps().is_some(), is_primitive(system.shifted()));
        if r.steps().is_none() {
            assert!(r.reason.is_some());
        }
    }
}

#[test]
fn merging_time_records_the_first_crossing() {
    for system in primitive_corpus().into_iter().take(30) {
        let r = merging_time(&system, 0.1, 2000, Metric::RelativeSup).unwrap();
        let t = r.steps().unwrap();
        assert_eq!(r.trace.len() as u64, t + 1);
        assert!(r.trace[..t as usize].iter().all(|(_, d)| !d.below(0.1)));
        let direct = pairwise_merging_measure(&system, t, Metric::RelativeSup).unwrap();
        assert!((direct.value() - r.trace[t as usize].1.value()).abs() <= 1e-12);
    }
}

#[test]
fn wave_bound_dominates_the_relative_error() {
    let mut checked = 0;
    for system in primitive_corpus() {
        let r = check_wave_dominance(&system, 50, 1e-10).unwrap();
        assert_eq!(r.violations, 0, "{r:?}");
        checked += r.checked;
    }
    assert!(checked > 0);
}

#[test]
fn product_bound_collapses_to_the_wave_bound_from_the_wave() {
    for system in primitive_corpus().into_iter().take(60) {
        let pi = system.wave_measure().unwrap().clone();
        let sv = SvProductBound::new(&system, &pi, 20).unwrap();
        let wave = WaveBound::new(&system).unwrap();
        for n in [0u64, 1, 5, 20] {
            for x in 0..system.size() {
                for z in 0..system.size() {
                    let a = sv.eval(x, z, n).unwrap();
                    let b = wave.eval(x, z, n);
                    assert!((a - b).abs() <= 1e-10 * b.max(1.0), "{a} vs {b}");
                }
            }
        }
    }
}

#[test]
fn product_bound_from_any_start_dominates() {
    for system in primitive_corpus().into_iter().take(50) {
        let n = system.size();
        let mu0 = Distribution::normalized((0..n).map(|x| 1.0 + x as f64).collect()).unwrap();
        let traj = evolve_trajectory(&mu0, &system, 25).unwrap();
        let bound = SvProductBound::new(&system, &mu0, 25).unwrap();
        for_each_window(&system, 25, |m, w| {
            for x in 0..n {
                for z in 0..n {
                    let actual = (w.get(x, z) / traj[m as usize].get(z) - 1.0).abs();
                    assert!(bound.eval(x, z, m).unwrap() + 1e-10 >= actual);
                }
            }
            true
        })
        .unwrap();
    }
    let system = circle_system(5, 1.0, -1).unwrap();
    let mu0 = Distribution::new(vec![0.3, 0.1, 0.2, 0.25, 0.15]).unwrap();
    let traj = evolve_trajectory(&mu0, &system, 30).unwrap();
    let bound = SvProductBound::new(&system, &mu0, 30).unwrap();
    for_each_window(&system, 30, |n, w| {
        let mu_n = &traj[n as usize];
        for x in 0..5 {
            for z in 0..5 {
                let actual = (w.get(x, z) / mu_n.get(z) - 1.0).abs();
                assert!(bound.eval(x, z, n).unwrap() + 1e-10 >= actual, "n={n} x={x} z={z}");
            }
        }
        true
    })
    .unwrap();
    let b = sv_product_bound(&system, &mu0, 0, 0, 10).unwrap();
    assert!(b > 0.0);
    let n0 = sv_product_bound(&system, &mu0, 1, 2, 0).unwrap();
    assert!((n0 - ((1.0f64 / 0.1 - 1.0) * (1.0 / 0.2 - 1.0)).sqrt()).abs() <= 1e-12);
}

#[test]
fn four_point_merges_in_total_variation_only() {
    let s = four_point_example().unwrap();
    for_each_window(&s, 120, |n, w| {
        if n % 2 == 0 {
            assert_eq!(w.get(3, 3), 1.0);
        }
        true
    })
    .unwrap();
    let tv = pairwise_merging_measure(&s, 60, Metric::TotalVariation).unwrap();
    assert!(tv.value() < 0.01);
    for n in 0..=60 {
        assert_eq!(pairwise_merging_measure(&s, n, Metric::RelativeSup).unwrap(), Distance::Infinite);
    }
    let r = merging_time(&s, 0.5, 200, Metric::RelativeSup).unwrap();
    assert_eq!(r.merging_time, MergingTime::Unbounded);
    assert_eq!(r.reason.as_deref(), Some("K\u{303} reducible"));
    assert!(matches!(wave_bound(&s, 0, 0, 3), Err(Error::NotMerging(_))));
}

#[test]
fn binary_cycling_merges_exactly_at_n() {
    let s = binary_cycling_system(4).unwrap();
    let r = merging_time(&s, 0.5, 50, Metric::RelativeSup).unwrap();
    assert_eq!(r.merging_time, MergingTime::Steps(4));
    assert_eq!(pairwise_merging_measure(&s, 4, Metric::RelativeSup).unwrap(), Distance::Finite(0.0));
}

#[test]
fn periodic_classes_never_merge() {
    let s = periodic_class_example(3, 2).unwrap();
    let r = merging_time(&s, 0.5, 100, Metric::RelativeSup).unwrap();
    assert_eq!(r.merging_time, MergingTime::Unbounded);
    let reason = r.reason.unwrap();
    assert!(reason.contains("periodic") || reason.contains("reducible"), "{reason}");
}

#[test]
fn circle_stability_constant() {
    for n in [5usize, 7, 9] {
        for eps in EPSILONS {
            let s = circle_system(n, eps, -1).unwrap();
            let pi = s.wave_measure().unwrap().clone();
            let cert = certify_stability(&s, &pi, None).unwrap();
            assert!((cert.c - (1.0 + eps)).abs() <= 1e-10);
            assert_eq!(cert.horizon, Horizon::Periodic(n as u64));
            // Definition holds along 3k steps of direct evolution
            let traj = evolve_trajectory(&pi, &s, 3 * n as u64).unwrap();
            for mu in &traj {
                for x in 0..n {
                    let r = mu.get(x) / pi.get(x);
                    assert!(r <= cert.c * (1.0 + 1e-12) && 1.0 / r <= cert.c * (1.0 + 1e-12));
                }
            }
        }
    }
    let plain = WaveSystem::new(wavechain::models::symmetric_circle_walk(5).unwrap(), Permutation::identity(5))
        .unwrap()
        .with_stationary_wave()
        .unwrap();
    let u = Distribution::uniform(5).unwrap();
    assert!((certify_stability(&plain, &u, None).unwrap().c - 1.0).abs() <= 1e-12);
}

#[test]
fn scanning_stability_from_an_arbitrary_start() {
    let s = circle_system(5, 1.0, -1).unwrap();
    let mu0 = Distribution::new(vec![0.3, 0.1, 0.2, 0.25, 0.15]).unwrap();
    let cert = certify_stability(&s, &mu0, Some(40)).unwrap();
    assert_eq!(cert.horizon, Horizon::Steps(40));
    assert!(cert.c >= 1.0);
    assert!(matches!(certify_stability(&s, &mu0, None), Err(Error::InvalidArgument(_))));
}

#[test]
fn nash_bound_dominates_on_the_circle() {
    let (n, eps) = (7usize, 1.0);
    let s = circle_system(n, eps, -1).unwrap();
    let pi = s.wave_measure().unwrap().clone();
    let eps_prime = eps / (2.0 + eps);
    let p = NashParams::circle(n, 1.0 + eps, eps_prime);
    let two_t = (2.0 * p.t) as u64;
    let g = s.map();
    for_each_window(&s, 4 * two_t, |m, w| {
        if m > two_t {
            let bound = nash_bound(&p, m as f64).unwrap();
            let shift = (m % s.order()) as i64;
            for x in 0..n {
                for z in 0..n {
                    let actual = (w.get(x, z) / pi.get(g.apply_pow(z, shift)) - 1.0).abs();
                    assert!(bound >= actual);
                }
            }
        }
        true
    })
    .unwrap();
    assert!(matches!(nash_bound(&p, 2.0 * p.t), Err(Error::HorizonTooShort { .. })));
    assert!(nash_bound(&p, 3.0 * p.t + 1.0).unwrap() < nash_bound(&p, 3.0 * p.t).unwrap());
}

#[test]
fn circle_five_merging_time_regression() {
    let s = circle_system(5, 1.0, -1).unwrap();
    let r = merging_time(&s, (-1.0f64).exp(), 10_000, Metric::RelativeSup).unwrap();
    let t = r.steps().unwrap();
    // brute-force oracle on the explicit products
    let windows = brute_windows(s.base(), s.map().forward(), 40);
    let oracle = windows
        .iter()
        .position(|w| {
            let mut worst = 0.0f64;
            for x in 0..5 {
                for y in 0..5 {
                    for z in 0..5 {
                        worst = worst.max((w[x][z] / w[y][z] - 1.0).abs());
                    }
                }
            }
            worst < (-1.0f64).exp()
        })
        .unwrap();
    assert_eq!(t, oracle as u64);
    // regression constant from the exact computation
    assert_eq!(t, 12);
}

#[test]
fn eta_sweep_grows_affinely_in_log_inverse_eta() {
    let s = circle_system(11, 1.0, -1).unwrap();
    let times: Vec<(f64, f64)> = [1e-1, 1e-2, 1e-3, 1e-4, 1e-6]
        .iter()
        .map(|&eta| {
            let t = merging_time(&s, eta, 100_000, Metric::RelativeSup).unwrap().steps().unwrap();
            ((1.0f64 / eta).ln(), t as f64)
        })
        .collect();
    // increments per unit of log(1/eta) stay bounded by the first one plus slack
    let slopes: Vec<f64> = times.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
    let first = slopes[0];
    assert!(slopes.iter().all(|s| *s <= 1.5 * first + 2.0), "{slopes:?}");
}

#[test]
fn scaling_fit_on_small_circles() {
    let family: Vec<(usize, WaveSystem)> = [5usize, 7, 9, 11, 13, 15]
        .iter()
        .map(|&n| (n, circle_system(n, 1.0, -1).unwrap()))
        .collect();
    let r = scaling_study(&family, (-1.0f64).exp(), 100_000).unwrap();
    let fit = r.fit.unwrap();
    assert!(fit.slope > 1.0 && fit.slope < 3.0, "{}", fit.slope);
    assert!(r.points.iter().all(|p| p.normalized.is_some()));
}

#[test]
fn tv_pairs_of_four_point_rows() {
    let s = four_point_example().unwrap();
    let w = wavechain::compose_window(&s, 0, 100).unwrap();
    let row = |x: usize| Distribution::new((0..4).map(|y| w.get(x, y)).collect()).unwrap();
    assert!(tv_distance(&row(0), &row(3)).unwrap() < 0.01);
    assert_eq!(relative_sup_distance(&row(0), &row(3)).unwrap(), Distance::Infinite);
}

fn random_pair(seed: u64, n: usize) -> (Distribution, Distribution) {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
    let b: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
    (Distribution::normalized(a).unwrap(), Distribution::normalized(b).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn chi_square_below_relative_sup_squared(seed in any::<u64>(), n in 1usize..12) {
        let (mu, nu) = random_pair(seed, n);
        let rs = relative_sup_distance(&mu, &nu).unwrap().value();
        let chi = chi_square_distance(&mu, &nu).unwrap().value();
        prop_assert!(chi <= rs * rs + 1e-15);
        prop_assert!(tv_distance(&mu, &nu).unwrap() <= 0.5 * rs + 1e-15);
    }
}

mod support;

use crossdamp::inference::{
    crb, dfs_null_scaling, fim_general, fim_thermal, fisher_from_family, mle_harness, population_gradient,
    population_of, FdOptions, FisherMatrix, MleConfig, ParamVector, UncorrelatedStart, COUPLING, GAMMA, GAMMA12, N1_0, N2_0,
    NBAR,
};
use crossdamp::model::bose_occupation;
use crossdamp::phonon_stats::LocalGaussian;
use crossdamp::{Complex64, Error};
use crossdamp_oracles::finite_diff;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::rel_err;

/// n1(0) = 0.35, n2(0) = 2.3, gamma = 0.02 Omega, at a given cross ratio and
/// inverse temperature.
fn fixture(cross_ratio: f64, beta: f64) -> ParamVector {
    let omega = 1.0;
    let gamma = 0.02 * omega;
    ParamVector::new([0.35, 2.3, omega, gamma, cross_ratio * gamma, bose_occupation(beta).unwrap()]).unwrap()
}

fn random_theta<R: Rng>(rng: &mut R, on_dfs: bool) -> ParamVector {
    let gamma = rng.random_range(0.05..1.0);
    let gamma12 = if on_dfs { gamma } else { gamma * rng.random_range(0.0..0.98) };
    ParamVector::new([
        rng.random_range(0.0..4.0),
        rng.random_range(0.0..4.0),
        rng.random_range(-2.0..2.0),
        gamma,
        gamma12,
        rng.random_range(0.05..3.0),
    ])
    .unwrap()
}

#[test]
fn gradient_matches_richardson_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst = 0.0f64;
    for i in 0..50 {
        let theta = random_theta(&mut rng, i < 10);
        let t = rng.random_range(0.1..8.0) / theta.get(GAMMA);
        let analytic = population_gradient(&theta, t).unwrap();
        let scales = theta.natural_scales();
        let steps: Vec<f64> = (0..6).map(|a| 1e-4 * theta.get(a).abs().max(scales[a])).collect();
        let numeric = finite_diff::gradient(
            |p| population_of(&p.try_into().unwrap(), t),
            theta.as_array(),
            &steps,
        );
        for a in 0..6 {
            let e = rel_err(analytic[a], numeric[a]);
            assert!(e <= 1e-6, "point {i}, parameter {a}: {} vs {}", analytic[a], numeric[a]);
            worst = worst.max(e);
        }
    }
    println!("worst relative gradient error {worst:e}");
}

#[test]
fn late_time_gradient_limits() {
    let theta = fixture(0.5, 1.0);
    let g = population_gradient(&theta, 2000.0 / theta.get(GAMMA)).unwrap();
    assert!((g[NBAR] - 1.0).abs() < 1e-12);

    // at gamma12 = gamma the rate derivatives grow linearly with opposite signs
    let theta = fixture(1.0, 1.0);
    let t = 400.0 / theta.get(GAMMA);
    let g = population_gradient(&theta, t).unwrap();
    let bracket = theta.get(NBAR) - 0.5 * (theta.get(N1_0) + theta.get(N2_0));
    assert!(rel_err(g[GAMMA], 0.5 * t * bracket) < 1e-9);
    assert!(rel_err(g[GAMMA12], -0.5 * t * bracket) < 1e-9);
}

#[test]
fn gradient_rejects_negative_time() {
    assert!(matches!(population_gradient(&fixture(0.5, 1.0), -1.0), Err(Error::NegativeTime(_))));
}

#[test]
fn thermal_fisher_is_rank_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for i in 0..40 {
        let theta = random_theta(&mut rng, i % 4 == 0);
        let t = rng.random_range(0.0..30.0) / theta.get(GAMMA);
        let f = fim_thermal(&theta, t).unwrap();
        assert!(f.is_symmetric());
        let norm2: f64 = f.entries.iter().flatten().map(|x| x * x).sum();
        for a in 0..6 {
            for b in 0..6 {
                for c in 0..6 {
                    for d in 0..6 {
                        let minor = f.get(a, c) * f.get(b, d) - f.get(a, d) * f.get(b, c);
                        assert!(minor.abs() <= 1e-12 * norm2);
                    }
                }
            }
        }
        let ev = f.eigenvalues();
        assert!(ev[4].abs() <= 1e-10 * ev[5]);
        assert!(ev[0] >= -1e-12 * f.trace());
    }
}

#[test]
fn thermal_fisher_is_degenerate_for_a_point_mass() {
    let theta = ParamVector::new([0.0, 0.0, 1.0, 0.1, 0.05, 0.0]).unwrap();
    assert!(matches!(fim_thermal(&theta, 3.0), Err(Error::Degenerate(_))));
}

#[test]
fn thermalising_fixture_keeps_only_reservoir_information() {
    let theta = fixture(0.5, 1.0);
    let nbar = theta.get(NBAR);
    let late = fim_thermal(&theta, 50.0 / theta.get(GAMMA)).unwrap();
    assert!(rel_err(late.get(NBAR, NBAR), 1.0 / (nbar * (1.0 + nbar))) <= 1e-4);
}

#[test]
fn decoherence_free_plateaus_and_vanishing_coupling_information() {
    let gamma = fixture(1.0, 1.0).get(GAMMA);
    let t = 50.0 / gamma;
    let dfs = fim_thermal(&fixture(1.0, 1.0), t).unwrap();
    let leaky = fim_thermal(&fixture(0.8, 1.0), t).unwrap();
    assert!(dfs.get(N1_0, N1_0) > 100.0 * leaky.get(N1_0, N1_0));
    assert!(dfs.get(N1_0, N2_0) > 100.0 * leaky.get(N1_0, N2_0));
    // plateau: already settled between 50/gamma and 100/gamma
    let later = fim_thermal(&fixture(1.0, 1.0), 100.0 / gamma).unwrap();
    assert!(rel_err(dfs.get(N1_0, N1_0), later.get(N1_0, N1_0)) < 1e-9);

    for ratio in [0.0, 0.5, 0.8, 1.0] {
        let theta = fixture(ratio, 1.0);
        let peak = (1..=500)
            .map(|i| fim_thermal(&theta, i as f64 * 0.1 / gamma).unwrap().get(COUPLING, COUPLING))
            .fold(0.0, f64::max);
        let f33 = fim_thermal(&theta, t).unwrap().get(COUPLING, COUPLING);
        assert!(f33 <= 1e-6 * peak, "ratio {ratio}");
    }
}

#[test]
fn swapping_the_initial_occupations_mirrors_f11_and_f22() {
    // n1(t) is unchanged by (n1(0), n2(0), Omega t) -> (n2(0), n1(0), Omega t + pi/2),
    // which exchanges the roles of the two initial occupations
    let half_turn = std::f64::consts::FRAC_PI_2;
    for ratio in [0.3, 1.0] {
        let theta = ParamVector::new([0.35, 2.3, 1.0, 0.02, 0.02 * ratio, 1.2]).unwrap();
        for t in [3.0, 20.0, 150.0, 2000.0] {
            let swapped = ParamVector::new([2.3, 0.35, 1.0 + half_turn / t, 0.02, 0.02 * ratio, 1.2]).unwrap();
            let f = fim_thermal(&theta, t).unwrap();
            let g = fim_thermal(&swapped, t).unwrap();
            assert!(rel_err(f.get(N2_0, N2_0), g.get(N1_0, N1_0)) < 1e-10, "t = {t}");
            assert!(rel_err(f.get(N1_0, N1_0), g.get(N2_0, N2_0)) < 1e-10, "t = {t}");
        }
    }
    // at the DFS point both plateaus coincide
    let theta = fixture(1.0, 1.0);
    let f = fim_thermal(&theta, 2000.0 / theta.get(GAMMA)).unwrap();
    assert!(rel_err(f.get(N1_0, N1_0), f.get(N2_0, N2_0)) < 1e-9);
}

#[test]
fn reservoir_information_grows_before_saturation() {
    for ratio in [0.0, 0.5, 0.8, 1.0] {
        let theta = fixture(ratio, 1.0);
        let gamma = theta.get(GAMMA);
        let series: Vec<f64> = (1..=400)
            .map(|i| fim_thermal(&theta, i as f64 * 0.25 / gamma).unwrap().get(NBAR, NBAR))
            .collect();
        let peak = series.iter().cloned().fold(0.0, f64::max);
        // rising part: every sample up to the first one within 1% of the peak
        let rise = series.iter().position(|&f| f >= 0.99 * peak).unwrap();
        for w in series[..=rise].windows(2) {
            assert!(w[1] >= w[0], "ratio {ratio}: {} then {}", w[0], w[1]);
        }
    }
}

#[test]
fn general_fisher_reduces_to_the_thermal_formula() {
    let path = UncorrelatedStart::thermal();
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for i in 0..6 {
        let theta = random_theta(&mut rng, i % 3 == 0);
        let t = rng.random_range(0.2..5.0) / theta.get(GAMMA);
        let thermal = fim_thermal(&theta, t).unwrap();
        let general = fim_general(&path, &theta, t, FdOptions::default()).unwrap();
        for a in 0..6 {
            for b in 0..6 {
                let scale = (thermal.get(a, a) * thermal.get(b, b)).sqrt();
                let diff = (general.get(a, b) - thermal.get(a, b)).abs();
                assert!(diff <= 1e-6 * scale, "point {i} ({a},{b}): {} vs {}", general.get(a, b), thermal.get(a, b));
            }
        }
    }
}

#[test]
fn geometric_family_information_about_its_mean() {
    for n in [0.3, 1.0, 4.5] {
        let f = fisher_from_family(|p| LocalGaussian::new(p[0], Complex64::new(0.0, 0.0)), &[n], &[1e-4 * n], true)
            .unwrap();
        // brute force: sum_k (d/dn P_k)^2 / P_k with P_k = n^k / (1+n)^(k+1)
        let mut brute = 0.0;
        for k in 0..4000 {
            let kf = k as f64;
            let p = (kf * n.ln() - (kf + 1.0) * (1.0 + n).ln()).exp();
            let score = kf / n - (kf + 1.0) / (1.0 + n);
            brute += p * score * score;
        }
        assert!(rel_err(f[0][0], brute) < 1e-8);
        assert!(rel_err(f[0][0], 1.0 / (n * (1.0 + n))) < 1e-8);
    }
}

#[test]
fn general_fisher_is_stable_under_step_halving() {
    let path = UncorrelatedStart {
        omega0: 0.3,
        m1_0: Complex64::new(0.4, 0.1),
        m2_0: Complex64::new(-0.2, 0.3),
    };
    let theta = ParamVector::new([0.8, 1.4, 0.7, 0.3, 0.2, 0.6]).unwrap();
    let t = 2.5;
    let coarse = fim_general(&path, &theta, t, FdOptions::default()).unwrap();
    let fine = fim_general(&path, &theta, t, FdOptions { rel_step: 0.5e-4, richardson: true }).unwrap();
    for a in 0..6 {
        for b in 0..6 {
            let scale = (coarse.get(a, a) * coarse.get(b, b)).sqrt();
            assert!((coarse.get(a, b) - fine.get(a, b)).abs() <= 1e-6 * scale, "({a},{b})");
        }
    }
    let ev = coarse.eigenvalues();
    assert!(ev[0] >= -1e-12 * coarse.trace());
    assert!(coarse.is_symmetric());
}

#[test]
fn reservoir_bound_from_the_late_information() {
    let mut entries = [[0.0; 6]; 6];
    entries[NBAR][NBAR] = 0.4113;
    let stated = crb(&FisherMatrix { t: 0.0, entries }, 10_000).unwrap();
    assert!(rel_err(stated.per_parameter[NBAR].unwrap(), 2.431e-4) < 1e-3);
    assert!(stated.per_parameter[N1_0].is_none());

    let nbar = bose_occupation(1.0).unwrap();
    let theta = ParamVector::new([0.35, 2.3, 1.0, 0.02, 0.01, nbar]).unwrap();
    let f = fim_thermal(&theta, 50.0 / 0.02).unwrap();
    let report = crb(&f, 10_000).unwrap();
    let bound = report.per_parameter[NBAR].unwrap();
    assert!(rel_err(bound, nbar * (1.0 + nbar) / 1e4) < 1e-4);
    assert!(report.singular);
    assert_eq!(report.rank, 1);

    let doubled = crb(&f, 20_000).unwrap();
    for a in 0..6 {
        if let (Some(x), Some(y)) = (report.per_parameter[a], doubled.per_parameter[a]) {
            assert!(rel_err(y, 0.5 * x) < 1e-15);
        }
    }
    assert!(crb(&f, 0).is_err());
}

#[test]
fn null_detector_scaling_at_the_dfs_point() {
    let theta = fixture(1.0, 1.0);
    let gamma = theta.get(GAMMA);
    let grid: Vec<f64> = (0..=30).map(|i| 10.0 * 10f64.powf(i as f64 / 30.0) / gamma).collect();
    let report = dfs_null_scaling(&theta, &grid).unwrap();
    assert!((report.slope_f44 - 2.0).abs() <= 0.05);
    assert!((report.slope_gamma_minus - 2.0).abs() <= 0.05);
    assert!(report.slope_gamma_plus.is_none_or(|s| s <= 0.0));
    assert!(report.rel_f44_f55 <= 1e-6);
    assert!(report.rel_f44_plus_f45 <= 1e-3);

    let balanced = theta.with(NBAR, 0.5 * (0.35 + 2.3)).unwrap();
    assert!(matches!(dfs_null_scaling(&balanced, &grid), Err(Error::Degenerate(_))));
    assert!(dfs_null_scaling(&fixture(0.9, 1.0), &grid).is_err());
}

#[test]
fn mle_smoke_and_identifiability() {
    let theta = fixture(0.5, 1.0);
    let t = 50.0 / theta.get(GAMMA);
    let one = mle_harness(&MleConfig {
        truth: theta,
        t,
        repetitions: 1,
        trials: 1,
        target: NBAR,
        bracket: (1e-3, 20.0),
        seed: 5,
    })
    .unwrap();
    assert!(one.estimates[0].is_finite());
    assert!(one.variance.is_none());

    let omega = mle_harness(&MleConfig {
        truth: theta,
        t,
        repetitions: 100,
        trials: 2,
        target: COUPLING,
        bracket: (0.5, 1.5),
        seed: 5,
    });
    assert!(matches!(omega, Err(Error::NonIdentifiable(_))));
}

#[test]
fn mle_is_reproducible_and_thread_independent() {
    let theta = fixture(0.5, 1.0);
    let cfg = MleConfig {
        truth: theta,
        t: 50.0 / theta.get(GAMMA),
        repetitions: 2000,
        trials: 16,
        target: NBAR,
        bracket: (1e-3, 20.0),
        seed: 77,
    };
    let a = mle_harness(&cfg).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| mle_harness(&cfg).unwrap());
    assert_eq!(a, b);
}

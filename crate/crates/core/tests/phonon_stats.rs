mod support;

use crossdamp::entanglement::SqueezedThermalSpec;
use crossdamp::phonon_stats::{
    general_pmf, generating_pmf, geometric_pmf, histogram, hyp2f1_series, hypergeometric_pmf, sample_seeded,
    LocalGaussian, PmfRoute, Truncation,
};
use crossdamp::{Complex64, Error};
use crossdamp_oracles::fock::squeezed_thermal_distribution;
use crossdamp_oracles::hypergeometric::hyp2f1_direct;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::rel_err;

fn squeezed(nbar: f64, r: f64) -> LocalGaussian {
    let (n, m) = SqueezedThermalSpec::new(nbar, r).unwrap().moments();
    LocalGaussian::new(n, m).unwrap()
}

#[test]
fn geometric_normalisation_with_tail() {
    for n in [0.0, 0.05, 0.58, 2.3, 9.508_331_944_775_05, 150.0] {
        let pmf = geometric_pmf(n, Truncation::Auto).unwrap();
        assert!((pmf.sum() + pmf.tail_bound - 1.0).abs() <= 1e-12, "n = {n}");
    }
    let pmf = geometric_pmf(9.508_331_944_775_05, Truncation::Fixed(5)).unwrap();
    assert!((pmf.sum() + pmf.tail_bound - 1.0).abs() <= 1e-15);
    let n = 9.508_331_944_775_05;
    assert!((pmf.get(0) - 1.0 / (1.0 + n)).abs() < 1e-16);
    assert!((pmf.get(0) - 0.095_162_6).abs() < 5e-8);
}

#[test]
fn squeezed_thermal_matches_fock_truncation() {
    let g = squeezed(0.5, 1.0);
    assert!(!g.in_hypergeometric_domain());
    let pmf = general_pmf(&g, Truncation::Auto).unwrap();
    let fock = squeezed_thermal_distribution(0.5, 1.0, 400);
    for (k, reference) in fock.iter().enumerate() {
        let diff = (pmf.get(k) - reference).abs();
        assert!(diff <= 1e-8, "k = {k}: {} vs {reference}", pmf.get(k));
    }
    assert!((pmf.mean() - g.n).abs() < 1e-9);
}

#[test]
fn hypergeometric_route_matches_fock_inside_its_domain() {
    let g = squeezed(1.5, 0.3);
    assert!(g.in_hypergeometric_domain());
    let closed = hypergeometric_pmf(&g, Truncation::Auto).unwrap();
    let recurrence = generating_pmf(&g, Truncation::Fixed(closed.k_max())).unwrap();
    let fock = squeezed_thermal_distribution(1.5, 0.3, 300);
    for k in 0..=closed.k_max() {
        assert!((closed.get(k) - fock[k]).abs() <= 1e-10, "k = {k}");
        assert!((closed.get(k) - recurrence.get(k)).abs() <= 1e-12, "k = {k}");
    }
    assert_eq!(general_pmf(&g, Truncation::Auto).unwrap().route, PmfRoute::Hypergeometric);
}

#[test]
fn closed_form_rejects_states_outside_its_domain() {
    assert!(matches!(
        hypergeometric_pmf(&squeezed(0.5, 1.0), Truncation::Auto),
        Err(Error::UnsupportedRegime(_))
    ));
}

#[test]
fn vanishing_anomalous_moment_reduces_to_geometric() {
    for n in [0.2, 1.3, 7.0] {
        let geometric = geometric_pmf(n, Truncation::Auto).unwrap();
        for m in [0.0, 1e-9, 1e-7] {
            let g = LocalGaussian::new(n, Complex64::new(m, 0.0)).unwrap();
            let general = general_pmf(&g, Truncation::Fixed(geometric.k_max())).unwrap();
            for k in 0..=geometric.k_max() {
                assert!((general.get(k) - geometric.get(k)).abs() <= 1e-10, "n={n} m={m} k={k}");
            }
        }
    }
}

#[test]
fn gauss_series_against_extended_precision() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for k in (0..=50usize).step_by(5) {
        let kf = k as f64;
        let (a, b) = ((kf + 1.0) / 2.0, (kf + 2.0) / 2.0);
        for _ in 0..4 {
            let z: f64 = rng.random_range(0.0..0.9);
            let reference = hyp2f1_direct(a, b, 1.0, z).0;
            let value = hyp2f1_series(a, b, 1.0, z).unwrap();
            assert!(rel_err(value, reference) <= 1e-12, "k={k} z={z}: {value} vs {reference}");
        }
    }
    let (reference, terms) = hyp2f1_direct(25.5, 26.0, 1.0, 0.9);
    assert!(terms > 200);
    assert!(rel_err(hyp2f1_series(25.5, 26.0, 1.0, 0.9).unwrap(), reference) <= 1e-12);
}

#[test]
fn gauss_series_on_the_negative_axis() {
    for k in [0usize, 1, 3, 6] {
        let kf = k as f64;
        let (a, b) = ((kf + 1.0) / 2.0, (kf + 2.0) / 2.0);
        for z in [-0.95, -0.7, -0.3] {
            let reference = hyp2f1_direct(a, b, 1.0, z).0;
            let value = hyp2f1_series(a, b, 1.0, z).unwrap();
            assert!(rel_err(value, reference) <= 1e-12, "k={k} z={z}: {value} vs {reference}");
        }
    }
    // 2F1(1/2, 1; 1; z) = (1 - z)^(-1/2)
    assert!(rel_err(hyp2f1_series(0.5, 1.0, 1.0, -0.8).unwrap(), 1.8f64.powf(-0.5)) <= 1e-14);
}

#[test]
fn sampling_follows_the_distribution() {
    let pmf = geometric_pmf(1.7, Truncation::Auto).unwrap();
    let draws = sample_seeded(&pmf, 200_000, 99);
    assert_eq!(draws, sample_seeded(&pmf, 200_000, 99));
    let counts = histogram(&draws, pmf.k_max());
    // Pearson statistic over bins with expected count >= 20
    let mut chi2 = 0.0;
    let mut bins = 0;
    for (k, &c) in counts.iter().enumerate() {
        let expected = pmf.get(k) * draws.len() as f64;
        if expected >= 20.0 {
            chi2 += (c as f64 - expected).powi(2) / expected;
            bins += 1;
        }
    }
    // 99.9% quantile of chi-square is below dof + 4 sqrt(2 dof) + 10 here
    let dof = (bins - 1) as f64;
    assert!(chi2 < dof + 4.0 * (2.0 * dof).sqrt() + 10.0, "chi2 = {chi2} over {bins} bins");
}

#[test]
fn csv_export_layout() {
    let pmf = geometric_pmf(1.0, Truncation::Fixed(2)).unwrap();
    let mut buf = Vec::new();
    pmf.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,probability");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("0,5e-1"));
}

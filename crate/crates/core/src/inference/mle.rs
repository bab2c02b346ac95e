use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{fim_thermal, population_of, ParamVector, PARAM_NAMES};
use crate::error::{check_time, invalid, Error, Result};
use crate::phonon_stats::{geometric_pmf, sample, Truncation};

/// Dimensionless information below which a target counts as unidentifiable.
const IDENTIFIABILITY_FLOOR: f64 = 1e-16;
const SEARCH_TOL: f64 = 1e-10;

/// Monte-Carlo maximum-likelihood experiment for one parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct MleConfig {
    pub truth: ParamVector,
    pub t: f64,
    /// Phonon-number measurements per trial.
    pub repetitions: usize,
    pub trials: usize,
    /// Index into the parameter vector.
    pub target: usize,
    /// Search interval for the target parameter.
    pub bracket: (f64, f64),
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MleReport {
    pub target: &'static str,
    pub truth: f64,
    pub estimates: Vec<f64>,
    pub mean: f64,
    pub bias: f64,
    /// Unbiased sample variance; `None` for a single trial.
    pub variance: Option<f64>,
    pub bias_standard_error: Option<f64>,
    /// `1 / (M F_target)`.
    pub crb: f64,
    pub variance_ratio: Option<f64>,
}

/// Draws `repetitions` phonon counts from the geometric distribution of ion 1
/// per trial and maximises the log-likelihood over the target parameter with
/// the others held at their true values.
///
/// Trial `i` uses the ChaCha8 stream `i` of the master seed, so results do
/// not depend on the number of worker threads.
pub fn mle_harness(cfg: &MleConfig) -> Result<MleReport> {
    check_time(cfg.t)?;
    if cfg.repetitions == 0 || cfg.trials == 0 {
        return Err(invalid("trials", "repetitions and trials must be positive"));
    }
    if cfg.target >= 6 {
        return Err(invalid("target", format!("index {} out of range", cfg.target)));
    }
    let (lo, hi) = cfg.bracket;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(invalid("bracket", "need finite lo < hi"));
    }
    let name = PARAM_NAMES[cfg.target];
    let fisher = fim_thermal(&cfg.truth, cfg.t)?;
    let f_target = fisher.get(cfg.target, cfg.target);
    let scale = cfg.truth.natural_scales()[cfg.target];
    if f_target * scale * scale <= IDENTIFIABILITY_FLOOR {
        return Err(Error::NonIdentifiable(name));
    }

    let n_true = population_of(cfg.truth.as_array(), cfg.t);
    let pmf = geometric_pmf(n_true, Truncation::Auto)?;
    let estimates: Vec<f64> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(trial as u64);
            let draws = sample(&pmf, cfg.repetitions, &mut rng);
            let mean_count = draws.iter().map(|&k| k as f64).sum::<f64>() / cfg.repetitions as f64;
            let mut theta = *cfg.truth.as_array();
            let objective = |x: f64| {
                theta[cfg.target] = x;
                geometric_log_likelihood(mean_count, population_of(&theta, cfg.t))
            };
            golden_max(objective, lo, hi)
        })
        .collect();

    let trials = estimates.len() as f64;
    let truth = cfg.truth.get(cfg.target);
    let mean = estimates.iter().sum::<f64>() / trials;
    let variance = (estimates.len() > 1)
        .then(|| estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (trials - 1.0));
    let crb = 1.0 / (cfg.repetitions as f64 * f_target);
    Ok(MleReport {
        target: name,
        truth,
        mean,
        bias: mean - truth,
        bias_standard_error: variance.map(|v| (v / trials).sqrt()),
        variance_ratio: variance.map(|v| v / crb),
        variance,
        crb,
        estimates,
    })
}

/// Per-measurement geometric log-likelihood given the sample mean count.
fn geometric_log_likelihood(mean_count: f64, n: f64) -> f64 {
    if n < 0.0 || !n.is_finite() {
        f64::NEG_INFINITY
    } else if n == 0.0 {
        if mean_count == 0.0 {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        mean_count * n.ln() - (mean_count + 1.0) * n.ln_1p()
    }
}

/// Golden-section maximisation of a unimodal function on `[lo, hi]`.
fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > SEARCH_TOL * (1.0 + lo.abs().max(hi.abs())) {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::{COUPLING, NBAR};

    fn fixture() -> ParamVector {
        let omega = 3.1 * std::f64::consts::PI * 1e3;
        let gamma = 0.02 * omega;
        ParamVector::new([0.35, 2.3, omega, gamma, 0.5 * gamma, 0.581_976_706_869_326_4]).unwrap()
    }

    #[test]
    fn golden_section_finds_parabola_peak() {
        let x = golden_max(|x| -(x - 0.3).powi(2), -2.0, 5.0);
        assert!((x - 0.3).abs() < 1e-8);
    }

    #[test]
    fn smoke_single_trial() {
        let theta = fixture();
        let cfg = MleConfig {
            truth: theta,
            t: 50.0 / theta.get(3),
            repetitions: 1,
            trials: 1,
            target: NBAR,
            bracket: (0.0, 20.0),
            seed: 7,
        };
        let report = mle_harness(&cfg).unwrap();
        assert!(report.estimates[0].is_finite());
        assert!(report.variance.is_none());
    }

    #[test]
    fn coupling_is_unidentifiable_late() {
        let theta = fixture();
        let cfg = MleConfig {
            truth: theta,
            t: 50.0 / theta.get(3),
            repetitions: 100,
            trials: 2,
            target: COUPLING,
            bracket: (0.0, 2e4),
            seed: 1,
        };
        assert_eq!(mle_harness(&cfg), Err(Error::NonIdentifiable("Omega")));
    }
}

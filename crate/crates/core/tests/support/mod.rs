#![allow(dead_code)]

use crossdamp::dynamics::MomentState;
use crossdamp::entanglement::{beam_splitter, local_rotation, local_squeeze, CovarianceReal};
use crossdamp::model::ModelParams;
use crossdamp::Complex64;
use nalgebra::Matrix4;
use rand::Rng;

/// Physical two-mode Gaussian state: thermal noise, local squeezing and
/// phases, then a passive mixer.
pub fn random_state<R: Rng>(rng: &mut R) -> MomentState {
    let (v1, v2) = (0.5 + rng.random::<f64>() * 1.5, 0.5 + rng.random::<f64>() * 1.5);
    let base = Matrix4::from_diagonal(&nalgebra::Vector4::new(v1, v1, v2, v2));
    let s = beam_splitter(rng.random_range(-1.5..1.5))
        * local_rotation(0, rng.random_range(0.0..6.3))
        * local_rotation(1, rng.random_range(0.0..6.3))
        * local_squeeze(0, rng.random_range(-0.8..0.8))
        * local_squeeze(1, rng.random_range(-0.8..0.8));
    let m = s * base * s.transpose();
    CovarianceReal::new(0.5 * (m + m.transpose())).unwrap().to_moments()
}

/// Uncorrelated start with arbitrary local anomalous moments.
pub fn random_product<R: Rng>(rng: &mut R) -> MomentState {
    let mut local = || {
        let n: f64 = rng.random_range(0.0..4.0);
        let frac: f64 = rng.random();
        let phase: f64 = rng.random_range(0.0..6.3);
        let m = Complex64::from_polar(frac * (n * (n + 1.0)).sqrt(), phase);
        (n, m)
    };
    let (n1, m1) = local();
    let (n2, m2) = local();
    MomentState::product(n1, m1, n2, m2)
}

/// Rates in units where `gamma` is of order one; every fifth draw sits
/// exactly on `gamma12 = gamma`.
pub fn random_params<R: Rng>(rng: &mut R, index: usize) -> ModelParams {
    let gamma = rng.random_range(0.05..1.0);
    let gamma12 = if index % 5 == 0 { gamma } else { gamma * rng.random::<f64>() };
    ModelParams::new(
        rng.random_range(0.0..3.0),
        rng.random_range(-2.0..2.0),
        gamma,
        gamma12,
        rng.random_range(0.0..3.0),
    )
    .unwrap()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

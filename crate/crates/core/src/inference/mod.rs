//! Classical Fisher information of phonon-number measurements on ion 1.
//!
//! Parameters are always ordered `(n1(0), n2(0), Omega, gamma, gamma12, Nbar)`.
//! `gamma` and `gamma12` are independent coordinates: derivatives are taken
//! first and only then evaluated, including at `gamma12 = gamma`.

mod bounds;
mod mle;

use nalgebra::{Matrix6, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::{anomalous_formula, grouped_hyperbolics, population_formula};
use crate::error::{check_time, invalid, Error, Result};
use crate::model::ModelParams;
use crate::phonon_stats::{general_pmf, LocalGaussian, Pmf, Truncation};

pub use bounds::{crb, dfs_null_scaling, CrbReport, DfsNullReport};
pub use mle::{mle_harness, MleConfig, MleReport};

pub const N1_0: usize = 0;
pub const N2_0: usize = 1;
pub const COUPLING: usize = 2;
pub const GAMMA: usize = 3;
pub const GAMMA12: usize = 4;
pub const NBAR: usize = 5;

pub const PARAM_NAMES: [&str; 6] = ["n1(0)", "n2(0)", "Omega", "gamma", "gamma12", "Nbar"];

/// The six estimation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamVector([f64; 6]);

impl ParamVector {
    pub fn new(theta: [f64; 6]) -> Result<Self> {
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(invalid("theta", "all components must be finite"));
        }
        for i in [N1_0, N2_0, GAMMA, GAMMA12, NBAR] {
            if theta[i] < 0.0 {
                return Err(invalid(PARAM_NAMES[i], format!("{} must be >= 0", theta[i])));
            }
        }
        if theta[GAMMA12] > theta[GAMMA] {
            return Err(invalid("gamma12", "cross-damping exceeds local damping"));
        }
        Ok(Self(theta))
    }

    pub fn from_model(init: (f64, f64), params: &ModelParams) -> Result<Self> {
        Self::new([
            init.0,
            init.1,
            params.coupling(),
            params.gamma(),
            params.gamma12(),
            params.nbar(),
        ])
    }

    pub fn as_array(&self) -> &[f64; 6] {
        &self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn with(&self, i: usize, value: f64) -> Result<Self> {
        let mut theta = self.0;
        theta[i] = value;
        Self::new(theta)
    }

    pub fn model(&self, omega0: f64) -> Result<ModelParams> {
        ModelParams::new(omega0, self.0[COUPLING], self.0[GAMMA], self.0[GAMMA12], self.0[NBAR])
    }

    /// Natural unit of each parameter: one phonon for occupations, `|Omega|`
    /// for the coupling and `gamma` for both rates (each falling back to the
    /// other scale, then to 1, when zero).
    pub fn natural_scales(&self) -> [f64; 6] {
        let (omega, gamma) = (self.0[COUPLING].abs(), self.0[GAMMA]);
        let pick = |first: f64, second: f64| {
            if first > 0.0 {
                first
            } else if second > 0.0 {
                second
            } else {
                1.0
            }
        };
        let rate = pick(gamma, omega);
        [1.0, 1.0, pick(omega, gamma), rate, rate, 1.0]
    }
}

/// Mean occupation `n1(t; theta)` of ion 1 for a thermal-like start.
///
/// No parameter validation: the formula is analytic in every component, which
/// finite-difference checks across `gamma12 = gamma` rely on.
pub fn population_of(theta: &[f64; 6], t: f64) -> f64 {
    population_formula(
        theta[N1_0],
        theta[N2_0],
        theta[COUPLING],
        theta[GAMMA],
        theta[GAMMA12],
        theta[NBAR],
        t,
    )
}

/// Analytic partial derivatives `d n1(t) / d theta_alpha`.
pub fn population_gradient(theta: &ParamVector, t: f64) -> Result<[f64; 6]> {
    check_time(t)?;
    Ok(gradient_unchecked(theta.as_array(), t))
}

pub(crate) fn gradient_unchecked(theta: &[f64; 6], t: f64) -> [f64; 6] {
    let [n1, n2, omega, gamma, gamma12, nbar] = *theta;
    let e = (-gamma * t).exp();
    let (ec, es) = grouped_hyperbolics(gamma, gamma12, t);
    let (s, c) = (omega * t).sin_cos();
    let (cos2, sin2) = (c * c, s * s);
    let total = n1 + n2;
    let exchange = n1 * cos2 + n2 * sin2;
    [
        e * cos2 + 0.5 * (ec - e),
        e * sin2 + 0.5 * (ec - e),
        e * (n2 - n1) * t * (2.0 * omega * t).sin(),
        -t * e * exchange - 0.5 * total * t * (ec - e) + nbar * t * ec,
        (0.5 * total - nbar) * t * es,
        1.0 - ec,
    ]
}

/// 6x6 Fisher information matrix at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FisherMatrix {
    pub t: f64,
    pub entries: [[f64; 6]; 6],
}

impl FisherMatrix {
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.entries[a][b]
    }

    fn outer(t: f64, g: &[f64; 6], weight: f64) -> Self {
        let mut entries = [[0.0; 6]; 6];
        for a in 0..6 {
            for b in a..6 {
                entries[a][b] = weight * g[a] * g[b];
                entries[b][a] = entries[a][b];
            }
        }
        Self { t, entries }
    }

    pub fn to_matrix(&self) -> Matrix6<f64> {
        Matrix6::from_fn(|a, b| self.entries[a][b])
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 6] {
        let eig = SymmetricEigen::new(self.to_matrix());
        let mut values: [f64; 6] = eig.eigenvalues.as_slice().try_into().expect("six eigenvalues");
        values.sort_by(|a, b| a.total_cmp(b));
        values
    }

    pub fn trace(&self) -> f64 {
        (0..6).map(|a| self.entries[a][a]).sum()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..6).all(|a| (0..6).all(|b| self.entries[a][b] == self.entries[b][a]))
    }

    /// Information in units of the natural parameter scales,
    /// `F_ab * u_a * u_b`.
    pub fn dimensionless(&self, scales: &[f64; 6]) -> Self {
        let mut entries = self.entries;
        for a in 0..6 {
            for b in 0..6 {
                entries[a][b] *= scales[a] * scales[b];
            }
        }
        Self { t: self.t, entries }
    }

    /// Information about `(Gamma_+, Gamma_-) = (gamma + gamma12, gamma - gamma12)`
    /// obtained by the chain rule from the `(gamma, gamma12)` block.
    pub fn collective_view(&self) -> [[f64; 2]; 2] {
        let (f44, f45, f55) = (
            self.entries[GAMMA][GAMMA],
            self.entries[GAMMA][GAMMA12],
            self.entries[GAMMA12][GAMMA12],
        );
        let plus = 0.25 * (f44 + 2.0 * f45 + f55);
        let minus = 0.25 * (f44 - 2.0 * f45 + f55);
        let mixed = 0.25 * (f44 - f55);
        [[plus, mixed], [mixed, minus]]
    }
}

/// Fisher matrix for a thermal start, where the ion-1 statistics are geometric
/// with mean `n1(t)`: `F = grad n1 grad n1^T / (n1 (1 + n1))`.
pub fn fim_thermal(theta: &ParamVector, t: f64) -> Result<FisherMatrix> {
    let grad = population_gradient(theta, t)?;
    let n = population_of(theta.as_array(), t);
    if n <= 0.0 {
        return Err(Error::Degenerate(format!(
            "n1(t) = {n} at t = {t}: the phonon distribution is a point mass"
        )));
    }
    Ok(FisherMatrix::outer(t, &grad, 1.0 / (n * (1.0 + n))))
}

/// Reduced state of ion 1 as a function of the parameters.
pub trait StatePath: Sync {
    fn local_state(&self, theta: &[f64; 6], t: f64) -> Result<LocalGaussian>;
}

/// Uncorrelated product start with given anomalous moments; the occupations
/// come from `theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncorrelatedStart {
    pub omega0: f64,
    pub m1_0: Complex64,
    pub m2_0: Complex64,
}

impl UncorrelatedStart {
    pub fn thermal() -> Self {
        Self {
            omega0: 0.0,
            m1_0: Complex64::new(0.0, 0.0),
            m2_0: Complex64::new(0.0, 0.0),
        }
    }
}

impl StatePath for UncorrelatedStart {
    fn local_state(&self, theta: &[f64; 6], t: f64) -> Result<LocalGaussian> {
        let n = population_of(theta, t);
        let m = anomalous_formula(
            self.m1_0,
            self.m2_0,
            self.omega0,
            theta[COUPLING],
            theta[GAMMA],
            theta[GAMMA12],
            t,
        );
        LocalGaussian::new(n, m)
    }
}

/// Finite-difference settings for [`fim_general`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdOptions {
    /// Step relative to `max(|theta_a|, natural scale)`.
    pub rel_step: f64,
    /// Combine steps `h` and `h/2` as `(4 D(h/2) - D(h)) / 3`.
    pub richardson: bool,
}

impl Default for FdOptions {
    fn default() -> Self {
        Self {
            rel_step: 1e-4,
            richardson: true,
        }
    }
}

/// Fisher matrix from the full phonon distribution `sum_k P dlnP dlnP`, with
/// the parameter derivatives of `P(k)` taken by central differences along the
/// state path.
pub fn fim_general(path: &dyn StatePath, theta: &ParamVector, t: f64, opts: FdOptions) -> Result<FisherMatrix> {
    check_time(t)?;
    let scales = theta.natural_scales();
    let steps: Vec<f64> = (0..6)
        .map(|a| opts.rel_step * theta.get(a).abs().max(scales[a]))
        .collect();
    let family = |p: &[f64]| {
        let arr: [f64; 6] = p.try_into().expect("six parameters");
        path.local_state(&arr, t)
    };
    let matrix = fisher_from_family(family, theta.as_array(), &steps, opts.richardson)?;
    let mut entries = [[0.0; 6]; 6];
    for a in 0..6 {
        entries[a].copy_from_slice(&matrix[a]);
    }
    Ok(FisherMatrix { t, entries })
}

/// Fisher matrix of the phonon distribution of a parametrised single-mode
/// Gaussian family, summed over the automatically truncated support of the
/// central distribution.
pub fn fisher_from_family<F>(family: F, theta: &[f64], steps: &[f64], richardson: bool) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&[f64]) -> Result<LocalGaussian>,
{
    let dim = theta.len();
    if steps.len() != dim {
        return Err(invalid("steps", "one step per parameter is required"));
    }
    let centre = general_pmf(&family(theta)?, Truncation::Auto)?;
    let support = Truncation::Fixed(centre.k_max());
    let at = |a: usize, h: f64| -> Result<Pmf> {
        let mut shifted = theta.to_vec();
        shifted[a] += h;
        general_pmf(&family(&shifted)?, support)
    };
    let central = |a: usize, h: f64| -> Result<Vec<f64>> {
        let plus = at(a, h)?;
        let minus = at(a, -h)?;
        Ok(plus
            .probabilities
            .iter()
            .zip(&minus.probabilities)
            .map(|(p, m)| (p - m) / (2.0 * h))
            .collect())
    };
    let mut derivs = Vec::with_capacity(dim);
    for a in 0..dim {
        let coarse = central(a, steps[a])?;
        let d = if richardson {
            let fine = central(a, 0.5 * steps[a])?;
            fine.iter().zip(&coarse).map(|(f, c)| (4.0 * f - c) / 3.0).collect()
        } else {
            coarse
        };
        derivs.push(d);
    }
    let mut out = vec![vec![0.0; dim]; dim];
    for (k, &p) in centre.probabilities.iter().enumerate() {
        if p <= f64::MIN_POSITIVE {
            continue;
        }
        for a in 0..dim {
            for b in a..dim {
                out[a][b] += derivs[a][k] * derivs[b][k] / p;
            }
        }
    }
    for a in 0..dim {
        for b in 0..a {
            out[a][b] = out[b][a];
        }
    }
    Ok(out)
}

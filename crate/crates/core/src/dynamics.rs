//! Second-moment dynamics of the two ions under the cross-damped
//! Heisenberg-Langevin equations.
//!
//! The propagator works in the normal-mode basis `A = (a1 + a2)/sqrt(2)`,
//! `B = (a1 - a2)/sqrt(2)` where, for symmetric damping, the drift is diagonal
//! and the reservoir noise is uncorrelated between the two collective modes.
//! The fast `omega0` phase only enters the anomalous moments and is attached as
//! a single factor `exp(-2 i omega0 t)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_time, invalid, Result};
use crate::model::ModelParams;

/// Zero-mean two-mode Gaussian second moments.
///
/// `m1 = -<a1^2>`, `m2 = -<a2^2>` follow the sign convention of the local
/// covariance matrix; `c12 = <a1^dag a2>` and `s12 = <a1 a2>` are the cross
/// moments.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MomentState {
    pub n1: f64,
    pub n2: f64,
    pub c12: Complex64,
    pub m1: Complex64,
    pub m2: Complex64,
    pub s12: Complex64,
}

impl MomentState {
    pub fn vacuum() -> Self {
        Self::default()
    }

    /// Uncorrelated thermal product state.
    pub fn thermal(n1: f64, n2: f64) -> Self {
        Self {
            n1,
            n2,
            ..Self::default()
        }
    }

    /// Uncorrelated product of two single-mode Gaussian states.
    pub fn product(n1: f64, m1: Complex64, n2: f64, m2: Complex64) -> Self {
        Self {
            n1,
            n2,
            m1,
            m2,
            ..Self::default()
        }
    }

    /// Two-mode squeezed vacuum with `<a1 a2> = sinh r cosh r`.
    pub fn two_mode_squeezed_vacuum(r: f64) -> Self {
        let sh = r.sinh();
        Self {
            n1: sh * sh,
            n2: sh * sh,
            s12: Complex64::new(sh * r.cosh(), 0.0),
            ..Self::default()
        }
    }

    pub fn is_uncorrelated(&self) -> bool {
        self.c12 == Complex64::new(0.0, 0.0) && self.s12 == Complex64::new(0.0, 0.0)
    }

    /// `<b_X^dag b_Y>` and `<b_X b_Y>` in the normal-mode basis.
    pub fn to_normal_modes(&self) -> NormalModeMoments {
        let normal = rotate(&self.normal_matrix());
        let anomalous = rotate(&self.anomalous_matrix());
        NormalModeMoments { normal, anomalous }
    }

    fn normal_matrix(&self) -> Mat2 {
        [
            [Complex64::new(self.n1, 0.0), self.c12],
            [self.c12.conj(), Complex64::new(self.n2, 0.0)],
        ]
    }

    fn anomalous_matrix(&self) -> Mat2 {
        [[-self.m1, self.s12], [self.s12, -self.m2]]
    }

    fn from_matrices(normal: &Mat2, anomalous: &Mat2) -> Self {
        Self {
            n1: normal[0][0].re,
            n2: normal[1][1].re,
            c12: normal[0][1],
            m1: -anomalous[0][0],
            m2: -anomalous[1][1],
            s12: 0.5 * (anomalous[0][1] + anomalous[1][0]),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let d = [
            (self.n1 - other.n1).abs(),
            (self.n2 - other.n2).abs(),
            (self.c12 - other.c12).norm(),
            (self.m1 - other.m1).norm(),
            (self.m2 - other.m2).norm(),
            (self.s12 - other.s12).norm(),
        ];
        d.into_iter().fold(0.0, f64::max)
    }

    /// The ten real degrees of freedom in a fixed order:
    /// `n1, n2, Re c12, Im c12, Re m1, Im m1, Re m2, Im m2, Re s12, Im s12`.
    pub fn to_real_vector(&self) -> [f64; 10] {
        [
            self.n1, self.n2, self.c12.re, self.c12.im, self.m1.re, self.m1.im, self.m2.re,
            self.m2.im, self.s12.re, self.s12.im,
        ]
    }

    pub fn from_real_vector(v: &[f64; 10]) -> Self {
        Self {
            n1: v[0],
            n2: v[1],
            c12: Complex64::new(v[2], v[3]),
            m1: Complex64::new(v[4], v[5]),
            m2: Complex64::new(v[6], v[7]),
            s12: Complex64::new(v[8], v[9]),
        }
    }
}

/// Second moments expressed in the collective (A, B) basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalModeMoments {
    /// `normal[x][y] = <b_x^dag b_y>` with `b_0 = A`, `b_1 = B`.
    pub normal: Mat2,
    /// `anomalous[x][y] = <b_x b_y>`.
    pub anomalous: Mat2,
}

impl NormalModeMoments {
    pub fn n_a(&self) -> f64 {
        self.normal[0][0].re
    }
    pub fn n_b(&self) -> f64 {
        self.normal[1][1].re
    }
}

pub type Mat2 = [[Complex64; 2]; 2];

// U = [[1, 1], [1, -1]] / sqrt(2) is real, symmetric and its own inverse, so
// both the forward and backward transforms are U X U.
fn rotate(x: &Mat2) -> Mat2 {
    let [[a, b], [c, d]] = *x;
    [
        [0.5 * (a + b + c + d), 0.5 * (a - b + c - d)],
        [0.5 * (a + b - c - d), 0.5 * (a - b - c + d)],
    ]
}

/// General (possibly asymmetric) drift matrix of `da/dt = -i M a + F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftMatrix {
    pub omega0: f64,
    pub coupling: f64,
    pub gamma11: f64,
    pub gamma22: f64,
    pub gamma12: f64,
    pub gamma21: f64,
}

impl DriftMatrix {
    pub fn symmetric(params: &ModelParams) -> Self {
        Self {
            omega0: params.omega0(),
            coupling: params.coupling(),
            gamma11: params.gamma(),
            gamma22: params.gamma(),
            gamma12: params.gamma12(),
            gamma21: params.gamma12(),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.gamma11 == self.gamma22 && self.gamma12 == self.gamma21
    }

    pub fn entries(&self) -> Mat2 {
        let i = Complex64::i();
        [
            [self.omega0 - i * (self.gamma11 / 2.0), self.coupling - i * (self.gamma12 / 2.0)],
            [self.coupling - i * (self.gamma21 / 2.0), self.omega0 - i * (self.gamma22 / 2.0)],
        ]
    }
}

/// Both eigenvalues `(lambda_+, lambda_-)` of the drift matrix.
///
/// In the symmetric case these are exactly
/// `omega0 +- Omega - i (gamma +- gamma12)/2`. Otherwise the branch of the
/// discriminant root is the one continuously connected to the symmetric
/// labelling.
pub fn drift_eigenvalues(m: &DriftMatrix) -> (Complex64, Complex64) {
    let i = Complex64::i();
    if m.is_symmetric() {
        let plus = Complex64::new(m.omega0 + m.coupling, -(m.gamma11 + m.gamma12) / 2.0);
        let minus = Complex64::new(m.omega0 - m.coupling, -(m.gamma11 - m.gamma12) / 2.0);
        return (plus, minus);
    }
    let centre = m.omega0 - i * ((m.gamma11 + m.gamma22) / 4.0);
    let skew = (m.gamma11 - m.gamma22) / 4.0;
    let delta = (m.coupling - i * (m.gamma12 / 2.0)) * (m.coupling - i * (m.gamma21 / 2.0))
        - Complex64::new(skew * skew, 0.0);
    let mut root = delta.sqrt();
    let reference = m.coupling - i * ((m.gamma12 + m.gamma21) / 4.0);
    if (reference.conj() * root).re < 0.0 {
        root = -root;
    }
    (centre + root, centre - root)
}

/// Collective decay rates `(gamma + gamma12, gamma - gamma12)`.
pub fn collective_rates(params: &ModelParams) -> (f64, f64) {
    (
        params.gamma() + params.gamma12(),
        params.gamma() - params.gamma12(),
    )
}

/// Exact second moments at time `t` for symmetric damping.
pub fn propagate(state0: &MomentState, params: &ModelParams, t: f64) -> Result<MomentState> {
    check_time(t)?;
    let (gp, gm) = collective_rates(params);
    let gamma = params.gamma();
    let omega = params.coupling();
    let nbar = params.nbar();
    let NormalModeMoments { normal, anomalous } = state0.to_normal_modes();

    let decay = |rate: f64| (-rate * t).exp();
    let cross = Complex64::from_polar((-gamma * t).exp(), 2.0 * omega * t);

    let mut n = normal;
    n[0][0] = normal[0][0] * decay(gp) - nbar * (-gp * t).exp_m1();
    n[1][1] = normal[1][1] * decay(gm) - nbar * (-gm * t).exp_m1();
    n[0][1] = normal[0][1] * cross;
    n[1][0] = normal[1][0] * cross.conj();

    // Interaction-frame rotation of the anomalous block; omega0 is reattached below.
    let mut s = anomalous;
    s[0][0] = anomalous[0][0] * Complex64::from_polar(decay(gp), -2.0 * omega * t);
    s[1][1] = anomalous[1][1] * Complex64::from_polar(decay(gm), 2.0 * omega * t);
    s[0][1] = anomalous[0][1] * decay(gamma);
    s[1][0] = anomalous[1][0] * decay(gamma);
    let fast = Complex64::from_polar(1.0, -2.0 * reduced_phase(params.omega0(), t));
    for row in s.iter_mut() {
        for v in row.iter_mut() {
            *v *= fast;
        }
    }

    Ok(MomentState::from_matrices(&rotate(&n), &rotate(&s)))
}

// omega0 * t reduced modulo pi, so that large lab-frame phases keep precision
// in the product before the trigonometric evaluation.
fn reduced_phase(omega0: f64, t: f64) -> f64 {
    (omega0 * t).rem_euclid(std::f64::consts::PI)
}

/// Ion index for single-ion observables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ion {
    One,
    Two,
}

/// `e^{-gamma t} cosh(gamma12 t)` and `e^{-gamma t} sinh(gamma12 t)` evaluated
/// as averages of decaying exponentials so they stay finite for any `t`.
pub(crate) fn grouped_hyperbolics(gamma: f64, gamma12: f64, t: f64) -> (f64, f64) {
    let slow = (-(gamma - gamma12) * t).exp();
    let fast = (-(gamma + gamma12) * t).exp();
    (0.5 * (slow + fast), 0.5 * (slow - fast))
}

/// Mean occupation of an ion for an uncorrelated, non-squeezed start, as an
/// unchecked function of the raw parameters.
#[allow(clippy::too_many_arguments)]
pub(crate) fn population_formula(
    own0: f64,
    other0: f64,
    coupling: f64,
    gamma: f64,
    gamma12: f64,
    nbar: f64,
    t: f64,
) -> f64 {
    let e = (-gamma * t).exp();
    let (ec, _) = grouped_hyperbolics(gamma, gamma12, t);
    let (s, c) = (coupling * t).sin_cos();
    e * (own0 * c * c + other0 * s * s) + 0.5 * (own0 + other0) * (ec - e) + nbar * (1.0 - ec)
}

/// Closed-form mean occupation of ion `j` for an initially uncorrelated,
/// diagonal (thermal-like) state.
pub fn population(j: Ion, init: (f64, f64), params: &ModelParams, t: f64) -> Result<f64> {
    check_time(t)?;
    check_occupations(init)?;
    let (own, other) = ordered(j, init);
    Ok(population_formula(
        own,
        other,
        params.coupling(),
        params.gamma(),
        params.gamma12(),
        params.nbar(),
        t,
    ))
}

/// Relaxation regime of the single-ion populations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Thermal,
    Dfs,
}

/// Long-time population; trapped excitations survive only when `gamma12`
/// bit-equals `gamma`.
pub fn steady_state(init: (f64, f64), params: &ModelParams) -> Result<(f64, Regime)> {
    check_occupations(init)?;
    if params.is_decoherence_free() {
        let trapped = 0.5 * (params.nbar() + 0.5 * (init.0 + init.1));
        Ok((trapped, Regime::Dfs))
    } else {
        Ok((params.nbar(), Regime::Thermal))
    }
}

/// Quadratic-order short-time expansion of [`population`].
pub fn short_time_population(j: Ion, init: (f64, f64), params: &ModelParams, t: f64) -> f64 {
    let (own, other) = ordered(j, init);
    let (s, c) = (params.coupling() * t).sin_cos();
    let (g, g12, nbar) = (params.gamma(), params.gamma12(), params.nbar());
    own * c * c
        + other * s * s
        + nbar * g * t
        + 0.5 * (0.5 * g12 * g12 * (init.0 + init.1) - nbar * (g * g + g12 * g12)) * t * t
}

/// Anomalous moment of ion 1 as an unchecked function of the raw parameters.
#[allow(clippy::too_many_arguments)]
pub(crate) fn anomalous_formula(
    m1_0: Complex64,
    m2_0: Complex64,
    omega0: f64,
    coupling: f64,
    gamma: f64,
    gamma12: f64,
    t: f64,
) -> Complex64 {
    let sum = m1_0 + m2_0;
    let diff = m1_0 - m2_0;
    let slow = Complex64::from_polar((-(gamma - gamma12) * t).exp(), 2.0 * coupling * t);
    let fast = Complex64::from_polar((-(gamma + gamma12) * t).exp(), -2.0 * coupling * t);
    let frame = Complex64::from_polar(0.25, -2.0 * reduced_phase(omega0, t));
    frame * (sum * (slow + fast) + 2.0 * (-gamma * t).exp() * diff)
}

/// Closed-form anomalous moment `m1(t)` for a start without `<a1 a2>`
/// correlations.
///
/// The prefactor is `+1/4`: this is the value that reproduces `m1(0)` at
/// `t = 0` and agrees with [`propagate`]. At `gamma12 = gamma` the modulus
/// tends to `|m1(0) + m2(0)| / 4` and the phase rotates at `2(omega0 - Omega)`.
pub fn anomalous_moment_1(init: &MomentState, params: &ModelParams, t: f64) -> Result<Complex64> {
    check_time(t)?;
    if init.s12 != Complex64::new(0.0, 0.0) {
        return Err(invalid("init.s12", "closed form requires <a1 a2> = 0 initially"));
    }
    Ok(anomalous_formula(
        init.m1,
        init.m2,
        params.omega0(),
        params.coupling(),
        params.gamma(),
        params.gamma12(),
        t,
    ))
}

fn ordered(j: Ion, init: (f64, f64)) -> (f64, f64) {
    match j {
        Ion::One => (init.0, init.1),
        Ion::Two => (init.1, init.0),
    }
}

fn check_occupations(init: (f64, f64)) -> Result<()> {
    if !(init.0 >= 0.0 && init.1 >= 0.0 && init.0.is_finite() && init.1.is_finite()) {
        return Err(invalid("init", "initial occupations must be finite and >= 0"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(g12: f64) -> ModelParams {
        ModelParams::new(3.0, -0.7, 0.2, g12, 1.3).unwrap()
    }

    fn generic_state() -> MomentState {
        MomentState {
            n1: 0.8,
            n2: 1.7,
            c12: Complex64::new(0.1, -0.2),
            m1: Complex64::new(0.3, 0.2),
            m2: Complex64::new(-0.5, 0.4),
            s12: Complex64::new(0.05, 0.15),
        }
    }

    #[test]
    fn identity_at_zero_time() {
        let s = generic_state();
        let out = propagate(&s, &params(0.1), 0.0).unwrap();
        assert!(out.max_abs_diff(&s) < 1e-15);
    }

    #[test]
    fn normal_mode_round_trip() {
        let s = generic_state();
        let nm = s.to_normal_modes();
        let back = MomentState::from_matrices(&rotate(&nm.normal), &rotate(&nm.anomalous));
        assert!(back.max_abs_diff(&s) < 1e-15);
    }

    #[test]
    fn rejects_negative_time() {
        assert!(propagate(&generic_state(), &params(0.1), -1e-3).is_err());
        assert!(population(Ion::One, (1.0, 1.0), &params(0.1), -1.0).is_err());
    }

    #[test]
    fn thermalises_without_dfs() {
        let p = params(0.15);
        let out = propagate(&MomentState::thermal(0.35, 2.3), &p, 1000.0).unwrap();
        assert!((out.n1 - 1.3).abs() < 1e-12 && (out.n2 - 1.3).abs() < 1e-12);
        assert!(out.c12.norm() < 1e-12 && out.m1.norm() < 1e-12 && out.s12.norm() < 1e-12);
    }

    #[test]
    fn collective_rate_examples() {
        let p = ModelParams::new(0.0, 1.0, 1.0, 0.8, 0.0).unwrap();
        let (gp, gm) = collective_rates(&p);
        assert!((gp - 1.8).abs() < 1e-15 && (gm - 0.2).abs() < 1e-15);
        assert_eq!(collective_rates(&p.with_gamma12(1.0).unwrap()), (2.0, 0.0));
        assert_eq!(collective_rates(&p.with_gamma12(0.0).unwrap()), (1.0, 1.0));
    }

    #[test]
    fn symmetric_eigenvalues() {
        let p = params(0.2);
        let (plus, minus) = drift_eigenvalues(&DriftMatrix::symmetric(&p));
        assert_eq!(plus, Complex64::new(3.0 - 0.7, -0.2));
        assert_eq!(minus.im, 0.0);
        let indep = DriftMatrix { gamma12: 0.0, gamma21: 0.0, ..DriftMatrix::symmetric(&p) };
        let (a, b) = drift_eigenvalues(&indep);
        assert_eq!(a.im, -0.1);
        assert_eq!(b.im, -0.1);
    }

    #[test]
    fn general_branch_matches_symmetric_limit() {
        let base = DriftMatrix::symmetric(&params(0.12));
        let nudged = DriftMatrix { gamma22: base.gamma22 * (1.0 + 1e-9), ..base };
        let (p0, m0) = drift_eigenvalues(&base);
        let (p1, m1) = drift_eigenvalues(&nudged);
        assert!((p0 - p1).norm() < 1e-8 && (m0 - m1).norm() < 1e-8);
    }

    #[test]
    fn population_at_zero_time() {
        let p = params(0.1);
        assert_eq!(population(Ion::One, (0.35, 2.3), &p, 0.0).unwrap(), 0.35);
        assert_eq!(population(Ion::Two, (0.35, 2.3), &p, 0.0).unwrap(), 2.3);
        assert_eq!(short_time_population(Ion::One, (0.35, 2.3), &p, 0.0), 0.35);
    }

    #[test]
    fn dfs_population_stays_finite_at_huge_times() {
        let p = params(0.2);
        let v = population(Ion::One, (0.35, 2.3), &p, 1e6).unwrap();
        assert!((v - 0.5 * (1.3 + 0.5 * 2.65)).abs() < 1e-12);
    }

    #[test]
    fn steady_state_branches() {
        let p = params(0.2);
        assert_eq!(steady_state((1.3, 1.3), &p).unwrap(), (1.3, Regime::Dfs));
        let near = p.with_gamma12(0.99 * 0.2).unwrap();
        assert_eq!(steady_state((0.35, 2.3), &near).unwrap(), (1.3, Regime::Thermal));
    }

    #[test]
    fn dissipation_free_short_time_limit() {
        let p = ModelParams::new(0.0, 0.9, 0.0, 0.0, 0.0).unwrap();
        for t in [0.1, 0.5, 2.0] {
            let exact = population(Ion::One, (0.4, 1.9), &p, t).unwrap();
            assert!((short_time_population(Ion::One, (0.4, 1.9), &p, t) - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn anomalous_vanishes_without_initial_squeezing() {
        let p = params(0.1);
        for t in [0.0, 1.0, 10.0] {
            let m = anomalous_moment_1(&MomentState::thermal(0.4, 1.0), &p, t).unwrap();
            assert_eq!(m, Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn anomalous_reproduces_initial_value() {
        let s = MomentState::product(0.9, Complex64::new(0.3, 0.1), 1.2, Complex64::new(-0.2, 0.5));
        let m = anomalous_moment_1(&s, &params(0.1), 0.0).unwrap();
        assert!((m - s.m1).norm() < 1e-15);
    }
}

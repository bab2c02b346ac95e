//! Real quadrature covariance matrices and the Gaussian separability invariant.
//!
//! Quadratures are `x = (a + a†)/√2` and `p = i(a† - a)/√2`, ordered
//! `(x1, p1, x2, p2)`, so the vacuum covariance is `I/2`. The anomalous
//! moments follow the sign convention `m = -<a²>` used throughout the crate.

use nalgebra::{Matrix2, Matrix4, SMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{propagate, MomentState};
use crate::error::{check_time, invalid, Error, Result};
use crate::model::{bose_occupation, ModelParams};

const PHYSICAL_TOL: f64 = 1e-10;

/// Symmetrised second moments of `(x1, p1, x2, p2)` (zero means assumed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceReal {
    matrix: Matrix4<f64>,
}

impl CovarianceReal {
    /// Wraps a matrix after checking symmetry and the uncertainty relation.
    pub fn new(matrix: Matrix4<f64>) -> Result<Self> {
        let cov = Self::unchecked(matrix);
        let asym = (matrix - matrix.transpose()).abs().max();
        if asym > PHYSICAL_TOL * matrix.abs().max().max(1.0) {
            return Err(Error::Unphysical(format!("covariance is not symmetric (|V - V^T| = {asym:e})")));
        }
        cov.check_physical()?;
        Ok(cov)
    }

    pub(crate) fn unchecked(matrix: Matrix4<f64>) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.matrix
    }

    pub fn local(&self, ion: usize) -> Matrix2<f64> {
        let o = 2 * ion;
        self.matrix.fixed_view::<2, 2>(o, o).into_owned()
    }

    pub fn cross(&self) -> Matrix2<f64> {
        self.matrix.fixed_view::<2, 2>(0, 2).into_owned()
    }

    /// Smallest eigenvalue of `V + (i/2) J4`.
    pub fn uncertainty_margin(&self) -> f64 {
        let j4 = symplectic_form();
        let mut embed = SMatrix::<f64, 8, 8>::zeros();
        embed.fixed_view_mut::<4, 4>(0, 0).copy_from(&self.matrix);
        embed.fixed_view_mut::<4, 4>(4, 4).copy_from(&self.matrix);
        embed.fixed_view_mut::<4, 4>(0, 4).copy_from(&(-0.5 * j4));
        embed.fixed_view_mut::<4, 4>(4, 0).copy_from(&(0.5 * j4));
        SymmetricEigen::new(embed).eigenvalues.min()
    }

    pub fn check_physical(&self) -> Result<()> {
        let margin = self.uncertainty_margin();
        let tol = PHYSICAL_TOL * self.matrix.abs().max().max(1.0);
        if margin < -tol {
            return Err(Error::Unphysical(format!(
                "covariance violates the uncertainty relation (min eigenvalue {margin:e})"
            )));
        }
        Ok(())
    }

    /// `S V S^T` for a symplectic `S`.
    pub fn transformed(&self, s: &Matrix4<f64>) -> Self {
        let m = s * self.matrix * s.transpose();
        Self::unchecked(0.5 * (m + m.transpose()))
    }

    /// Inverse of [`to_real_covariance`].
    pub fn to_moments(&self) -> MomentState {
        let v = &self.matrix;
        let (x1, p1, x2, p2) = (0, 1, 2, 3);
        let local = |x: usize, p: usize| {
            let n = 0.5 * (v[(x, x)] + v[(p, p)]) - 0.5;
            let m = Complex64::new(0.5 * (v[(p, p)] - v[(x, x)]), -v[(x, p)]);
            (n, m)
        };
        let (n1, m1) = local(x1, p1);
        let (n2, m2) = local(x2, p2);
        let c12 = Complex64::new(
            0.5 * (v[(x1, x2)] + v[(p1, p2)]),
            0.5 * (v[(x1, p2)] - v[(p1, x2)]),
        );
        let s12 = Complex64::new(
            0.5 * (v[(x1, x2)] - v[(p1, p2)]),
            0.5 * (v[(x1, p2)] + v[(p1, x2)]),
        );
        MomentState { n1, n2, c12, m1, m2, s12 }
    }
}

/// Real covariance matrix of a two-mode Gaussian state.
pub fn to_real_covariance(s: &MomentState) -> Result<CovarianceReal> {
    CovarianceReal::new(covariance_matrix(s))
}

fn covariance_matrix(s: &MomentState) -> Matrix4<f64> {
    let mut v = Matrix4::zeros();
    let local = |n: f64, m: Complex64| {
        Matrix2::new(n + 0.5 - m.re, -m.im, -m.im, n + 0.5 + m.re)
    };
    v.fixed_view_mut::<2, 2>(0, 0).copy_from(&local(s.n1, s.m1));
    v.fixed_view_mut::<2, 2>(2, 2).copy_from(&local(s.n2, s.m2));
    let (c, a) = (s.c12, s.s12);
    let cross = Matrix2::new(a.re + c.re, c.im + a.im, a.im - c.im, c.re - a.re);
    v.fixed_view_mut::<2, 2>(0, 2).copy_from(&cross);
    v.fixed_view_mut::<2, 2>(2, 0).copy_from(&cross.transpose());
    v
}

/// `J4 = J ⊕ J` with `J = [[0, 1], [-1, 0]]`.
pub fn symplectic_form() -> Matrix4<f64> {
    let mut j = Matrix4::zeros();
    for o in [0, 2] {
        j[(o, o + 1)] = 1.0;
        j[(o + 1, o)] = -1.0;
    }
    j
}

fn embed_local(ion: usize, s: Matrix2<f64>) -> Matrix4<f64> {
    let mut m = Matrix4::identity();
    m.fixed_view_mut::<2, 2>(2 * ion, 2 * ion).copy_from(&s);
    m
}

/// Phase-space rotation of one mode.
pub fn local_rotation(ion: usize, phi: f64) -> Matrix4<f64> {
    let (s, c) = phi.sin_cos();
    embed_local(ion, Matrix2::new(c, s, -s, c))
}

/// Single-mode squeezer `diag(e^-r, e^r)` on one mode.
pub fn local_squeeze(ion: usize, r: f64) -> Matrix4<f64> {
    embed_local(ion, Matrix2::new((-r).exp(), 0.0, 0.0, r.exp()))
}

/// Passive two-mode mixer with transmissivity `cos² theta`.
pub fn beam_splitter(theta: f64) -> Matrix4<f64> {
    let (s, c) = theta.sin_cos();
    let mut m = Matrix4::identity() * c;
    m[(0, 2)] = s;
    m[(1, 3)] = s;
    m[(2, 0)] = -s;
    m[(3, 1)] = -s;
    m
}

/// Separability invariant with its building blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct YInvariant {
    pub y: f64,
    /// Same combination with `(1/4 + I3)²`, the partially transposed form.
    pub y_transposed: f64,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub i4: f64,
}

impl YInvariant {
    pub fn entangled(&self) -> bool {
        self.y < 0.0
    }

    pub fn depth(&self) -> f64 {
        self.y.abs()
    }

    pub fn value(&self, form: YForm) -> f64 {
        match form {
            YForm::AbsoluteCross => self.y,
            YForm::PartialTranspose => self.y_transposed,
        }
    }
}

/// Which closed form of `Y` to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum YForm {
    /// `(1/4 - |I3|)²`.
    #[default]
    AbsoluteCross,
    /// `(1/4 + I3)²`.
    PartialTranspose,
}

pub fn y_invariant(cov: &CovarianceReal) -> YInvariant {
    let (v1, v2, c) = (cov.local(0), cov.local(1), cov.cross());
    let j = Matrix2::new(0.0, 1.0, -1.0, 0.0);
    let i1 = v1.determinant();
    let i2 = v2.determinant();
    let i3 = c.determinant();
    let i4 = (v1 * j * c * j * v2 * j * c.transpose() * j).trace();
    let base = i1 * i2 - i4 - 0.25 * (i1 + i2);
    YInvariant {
        y: base + (0.25 - i3.abs()).powi(2),
        y_transposed: base + (0.25 + i3).powi(2),
        i1,
        i2,
        i3,
        i4,
    }
}

/// Squeezed thermal state with real squeezing parameter and zero phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqueezedThermalSpec {
    pub nbar: f64,
    pub r: f64,
}

impl SqueezedThermalSpec {
    pub fn new(nbar: f64, r: f64) -> Result<Self> {
        if !(nbar >= 0.0 && nbar.is_finite()) {
            return Err(invalid("nbar", format!("{nbar} must be finite and >= 0")));
        }
        if !r.is_finite() {
            return Err(invalid("r", "must be finite"));
        }
        Ok(Self { nbar, r })
    }

    /// `(n, m)` of the state.
    pub fn moments(&self) -> (f64, Complex64) {
        let w = self.nbar + 0.5;
        let n = w * (2.0 * self.r).cosh() - 0.5;
        (n, Complex64::new(w * (2.0 * self.r).sinh(), 0.0))
    }
}

/// Ion 1 thermal, ion 2 squeezed thermal, uncorrelated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntanglementStart {
    pub ion1_nbar: f64,
    pub ion2: SqueezedThermalSpec,
}

impl EntanglementStart {
    pub fn state(&self) -> Result<MomentState> {
        if !(self.ion1_nbar >= 0.0 && self.ion1_nbar.is_finite()) {
            return Err(invalid("ion1_nbar", format!("{} must be finite and >= 0", self.ion1_nbar)));
        }
        let (n2, m2) = self.ion2.moments();
        Ok(MomentState::product(self.ion1_nbar, Complex64::new(0.0, 0.0), n2, m2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct YSample {
    pub t: f64,
    pub invariant: YInvariant,
}

/// `Y(t)` along the exact evolution from an uncorrelated start.
pub fn evolve_y(init: &EntanglementStart, params: &ModelParams, t_grid: &[f64]) -> Result<Vec<YSample>> {
    if t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("t_grid", "times must be ascending"));
    }
    let state0 = init.state()?;
    to_real_covariance(&state0)?;
    t_grid
        .iter()
        .map(|&t| {
            check_time(t)?;
            let cov = CovarianceReal::unchecked(covariance_matrix(&propagate(&state0, params, t)?));
            Ok(YSample { t, invariant: y_invariant(&cov) })
        })
        .collect()
}

/// Total time spent entangled, integrating the indicator `Y < 0` with the
/// trapezoid rule on the sample grid.
pub fn entangled_time(samples: &[YSample]) -> f64 {
    samples
        .windows(2)
        .map(|w| {
            let inside = w.iter().filter(|s| s.invariant.entangled()).count() as f64;
            0.5 * inside * (w[1].t - w[0].t)
        })
        .sum()
}

/// Axes available to [`scan`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ScanAxis {
    /// Time in units of `1/gamma`.
    Time,
    /// `gamma12 / gamma`.
    CrossRatio,
    /// `hbar omega0 / (k_B T)`.
    InverseTemperature,
    /// Squeezing parameter of ion 2.
    Squeezing,
}

impl ScanAxis {
    pub fn label(&self) -> &'static str {
        match self {
            ScanAxis::Time => "gamma_t",
            ScanAxis::CrossRatio => "gamma12_over_gamma",
            ScanAxis::InverseTemperature => "hbar_omega0_over_kT",
            ScanAxis::Squeezing => "r",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisGrid {
    pub axis: ScanAxis,
    pub values: Vec<f64>,
}

/// Values used for the axes that are not scanned.
///
/// The starting thermal occupations of both ions follow the reservoir
/// occupation unless overridden.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanFixed {
    pub coupling: f64,
    pub gamma: f64,
    pub gamma_t: f64,
    pub cross_ratio: f64,
    pub inverse_temperature: f64,
    pub r: f64,
    pub initial_nbar: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanPoint {
    /// Position along each scanned axis.
    pub index: [usize; 3],
    pub coords: [f64; 3],
    pub y: f64,
    pub entangled: bool,
}

fn point_value(fixed: &ScanFixed, axes: &[AxisGrid], coords: &[f64]) -> Result<f64> {
    let mut f = *fixed;
    for (grid, &v) in axes.iter().zip(coords) {
        match grid.axis {
            ScanAxis::Time => f.gamma_t = v,
            ScanAxis::CrossRatio => f.cross_ratio = v,
            ScanAxis::InverseTemperature => f.inverse_temperature = v,
            ScanAxis::Squeezing => f.r = v,
        }
    }
    let nbar = bose_occupation(f.inverse_temperature)?;
    let (n1, n2) = f.initial_nbar.unwrap_or((nbar, nbar));
    let params = ModelParams::new(0.0, f.coupling, f.gamma, f.cross_ratio * f.gamma, nbar)?;
    let start = EntanglementStart {
        ion1_nbar: n1,
        ion2: SqueezedThermalSpec::new(n2, f.r)?,
    };
    let t = if f.gamma > 0.0 { f.gamma_t / f.gamma } else { f.gamma_t };
    Ok(evolve_y(&start, &params, &[t])?[0].invariant.y)
}

/// Evaluates `Y` on the tensor grid of two or three axes.
///
/// Rows (all points sharing the leading indices, the last axis varying) are
/// computed in parallel and handed to `sink` in grid order.
pub fn scan<F>(axes: &[AxisGrid], fixed: &ScanFixed, mut sink: F) -> Result<usize>
where
    F: FnMut(&[ScanPoint]) -> Result<()>,
{
    if !(2..=3).contains(&axes.len()) {
        return Err(invalid("axes", "scan two or three axes"));
    }
    for (i, grid) in axes.iter().enumerate() {
        if grid.values.is_empty() {
            return Err(invalid("axes", format!("axis {} is empty", grid.axis.label())));
        }
        let up = grid.values.windows(2).all(|w| w[1] > w[0]);
        let down = grid.values.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(invalid("axes", format!("axis {} is not monotone", grid.axis.label())));
        }
        if axes[..i].iter().any(|g| g.axis == grid.axis) {
            return Err(invalid("axes", format!("axis {} repeated", grid.axis.label())));
        }
    }
    let leading: Vec<Vec<usize>> = match axes.len() {
        2 => (0..axes[0].values.len()).map(|i| vec![i]).collect(),
        _ => (0..axes[0].values.len())
            .flat_map(|i| (0..axes[1].values.len()).map(move |j| vec![i, j]))
            .collect(),
    };
    let last = axes.len() - 1;
    let mut emitted = 0;
    for lead in leading {
        let row: Vec<ScanPoint> = (0..axes[last].values.len())
            .into_par_iter()
            .map(|k| {
                let mut index = [0usize; 3];
                let mut coords = [0.0; 3];
                for (d, &i) in lead.iter().enumerate() {
                    index[d] = i;
                    coords[d] = axes[d].values[i];
                }
                index[last] = k;
                coords[last] = axes[last].values[k];
                let y = point_value(fixed, axes, &coords[..axes.len()])?;
                Ok(ScanPoint { index, coords, y, entangled: y < 0.0 })
            })
            .collect::<Result<_>>()?;
        emitted += row.len();
        sink(&row)?;
    }
    Ok(emitted)
}

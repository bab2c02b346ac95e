use nalgebra::Matrix6;
use serde::Serialize;

use super::{fim_thermal, FisherMatrix, ParamVector, GAMMA, GAMMA12, N1_0, N2_0, NBAR, PARAM_NAMES};
use crate::error::{invalid, Error, Result};

/// Cramer-Rao lower bounds for `M` independent repetitions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrbReport {
    pub repetitions: u64,
    pub names: [&'static str; 6],
    /// `1/(M F_aa)`; `None` where `F_aa = 0` (no information, unbounded variance).
    pub per_parameter: [Option<f64>; 6],
    /// `F^+ / M`, the inverse when `F` has full rank.
    pub matrix_bound: [[f64; 6]; 6],
    pub singular: bool,
    pub rank: usize,
}

/// Relative singular-value cut-off for the rank decision.
const RANK_TOL: f64 = 1e-10;

pub fn crb(f: &FisherMatrix, repetitions: u64) -> Result<CrbReport> {
    if repetitions == 0 {
        return Err(invalid("repetitions", "at least one repetition is required"));
    }
    let m = repetitions as f64;
    let per_parameter = std::array::from_fn(|a| {
        let faa = f.entries[a][a];
        (faa > 0.0).then(|| 1.0 / (m * faa))
    });

    let svd = f.to_matrix().svd(true, true);
    let largest = svd.singular_values.max();
    let cut = RANK_TOL * largest;
    let rank = svd.singular_values.iter().filter(|&&s| s > cut && s > 0.0).count();
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let mut pinv = Matrix6::<f64>::zeros();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > cut && s > 0.0 {
            pinv += v_t.row(i).transpose() * u.column(i).transpose() / s;
        }
    }
    let matrix_bound = std::array::from_fn(|a| std::array::from_fn(|b| pinv[(a, b)] / m));
    Ok(CrbReport {
        repetitions,
        names: PARAM_NAMES,
        per_parameter,
        matrix_bound,
        singular: rank < 6,
        rank,
    })
}

/// Late-time behaviour of the rate information at a decoherence-free point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DfsNullReport {
    /// Least-squares slope of `ln F44` against `ln t`.
    pub slope_f44: f64,
    /// Same for the information about `Gamma_- = gamma - gamma12`.
    pub slope_gamma_minus: f64,
    /// Same for the information about `Gamma_+ = gamma + gamma12`; `None`
    /// when it vanishes identically on the grid.
    pub slope_gamma_plus: Option<f64>,
    /// Evaluated at the last grid time.
    pub t_last: f64,
    pub rel_f44_f55: f64,
    pub rel_f44_plus_f45: f64,
    pub f44: Vec<f64>,
}

/// Fits the growth of `F44` at `gamma12 = gamma` over a late-time grid and
/// checks `F44 = F55 = -F45` at its last point.
pub fn dfs_null_scaling(theta: &ParamVector, t_grid: &[f64]) -> Result<DfsNullReport> {
    let (gamma, gamma12) = (theta.get(GAMMA), theta.get(GAMMA12));
    if gamma12 != gamma || gamma <= 0.0 {
        return Err(invalid("gamma12", "the null-detector fit needs gamma12 = gamma > 0"));
    }
    if t_grid.len() < 2 {
        return Err(invalid("t_grid", "at least two times are required"));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("t_grid", "times must be strictly increasing"));
    }
    if t_grid[0] * gamma < 10.0 * (1.0 - 1e-12) {
        return Err(invalid("t_grid", "the fit window starts at t = 10/gamma"));
    }
    let start = 0.5 * (theta.get(N1_0) + theta.get(N2_0));
    let nbar = theta.get(NBAR);
    if (nbar - start).abs() <= 1e-12 * nbar.max(start) {
        return Err(Error::Degenerate(
            "mean initial occupation equals the reservoir occupation: no late-time rate information".into(),
        ));
    }

    let mut ln_t = Vec::with_capacity(t_grid.len());
    let (mut ln44, mut ln_minus, mut ln_plus) = (Vec::new(), Vec::new(), Vec::new());
    let mut f44 = Vec::with_capacity(t_grid.len());
    let mut plus_vanishes = false;
    let mut last = None;
    for &t in t_grid {
        let f = fim_thermal(theta, t)?;
        let view = f.collective_view();
        ln_t.push(t.ln());
        ln44.push(f.get(GAMMA, GAMMA).ln());
        ln_minus.push(view[1][1].ln());
        if view[0][0] > 0.0 {
            ln_plus.push(view[0][0].ln());
        } else {
            plus_vanishes = true;
        }
        f44.push(f.get(GAMMA, GAMMA));
        last = Some(f);
    }
    let last = last.expect("non-empty grid");
    let (a44, a45, a55) = (last.get(GAMMA, GAMMA), last.get(GAMMA, GAMMA12), last.get(GAMMA12, GAMMA12));
    Ok(DfsNullReport {
        slope_f44: slope(&ln_t, &ln44),
        slope_gamma_minus: slope(&ln_t, &ln_minus),
        slope_gamma_plus: (!plus_vanishes).then(|| slope(&ln_t, &ln_plus)),
        t_last: last.t,
        rel_f44_f55: (a44 - a55).abs() / a44,
        rel_f44_plus_f45: (a44 + a45).abs() / a44,
        f44,
    })
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rank_one(g: [f64; 6], w: f64) -> FisherMatrix {
        FisherMatrix {
            t: 1.0,
            entries: std::array::from_fn(|a| std::array::from_fn(|b| w * g[a] * g[b])),
        }
    }

    #[test]
    fn per_parameter_arithmetic() {
        let mut f = rank_one([0.0; 6], 0.0);
        f.entries[NBAR][NBAR] = 0.4113;
        let r = crb(&f, 10_000).unwrap();
        assert!((r.per_parameter[NBAR].unwrap() - 2.431_315e-4).abs() < 1e-9);
        assert!(r.per_parameter[0].is_none());
        assert!(r.singular && r.rank == 1);
    }

    #[test]
    fn doubling_repetitions_halves_bounds() {
        let f = rank_one([0.3, -1.2, 0.01, 4.0, -2.0, 0.7], 0.25);
        let a = crb(&f, 500).unwrap();
        let b = crb(&f, 1000).unwrap();
        for i in 0..6 {
            assert!((a.per_parameter[i].unwrap() / b.per_parameter[i].unwrap() - 2.0).abs() < 1e-14);
        }
        assert!(a.singular && a.rank == 1);
    }

    #[test]
    fn full_rank_inverse() {
        let mut f = rank_one([0.0; 6], 0.0);
        for a in 0..6 {
            f.entries[a][a] = (a + 1) as f64;
        }
        f.entries[0][1] = 0.5;
        f.entries[1][0] = 0.5;
        let r = crb(&f, 1).unwrap();
        assert!(!r.singular && r.rank == 6);
        let prod = f.to_matrix() * Matrix6::from_fn(|a, b| r.matrix_bound[a][b]);
        assert!((prod - Matrix6::identity()).abs().max() < 1e-13);
    }

    #[test]
    fn rejects_zero_repetitions() {
        assert!(crb(&rank_one([1.0; 6], 1.0), 0).is_err());
    }

    #[test]
    fn null_scaling_rejects_off_dfs_and_degenerate_start() {
        let theta = ParamVector::new([0.35, 2.3, 1.0, 0.02, 0.01, 0.58]).unwrap();
        assert!(dfs_null_scaling(&theta, &[500.0, 5000.0]).is_err());
        let special = ParamVector::new([0.5, 1.5, 1.0, 0.02, 0.02, 1.0]).unwrap();
        assert!(matches!(
            dfs_null_scaling(&special, &[500.0, 5000.0]),
            Err(Error::Degenerate(_))
        ));
    }
}

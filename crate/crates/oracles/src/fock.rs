//! Truncated Fock-space constructions of Gaussian states.
//!
//! Conventions: the squeezer satisfies `S† a S = a cosh r - a† sinh r`, the
//! phase shifter `R† a R = a e^{-i phi}` and the beam splitter
//! `U† a1 U = a1 cos t + a2 sin t`, `U† a2 U = a2 cos t - a1 sin t`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

/// Single-mode Gaussian preparation: thermal, then squeezed, then rotated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModePrep {
    pub nbar: f64,
    pub r: f64,
    pub phi: f64,
}

/// `<m|S(r)|n>` for `m < rows`, `n < cols`, from the exponential of the
/// generator `(a² - a†²) r / 2` on a padded number space, one parity sector at
/// a time. Column recurrences lose everything to cancellation once `cols`
/// reaches a few dozen at `r ~ 1`.
pub fn squeeze_matrix(r: f64, rows: usize, cols: usize) -> DMatrix<f64> {
    // amplitudes of S|n> fall by tanh r per two quanta; pad to below 1e-20
    let t = r.abs().tanh().max(1e-3);
    let pad = (2.0 * -46.0 / t.ln()).ceil() as usize + 40;
    let dim = rows.max(cols) + pad;
    let mut out = DMatrix::zeros(rows, cols);
    for parity in 0..2 {
        let size = (dim - parity).div_ceil(2);
        let mut g = DMatrix::zeros(size, size);
        for i in 0..size - 1 {
            // <k|a²|k+2> = sqrt((k+1)(k+2)) with k = 2i + parity
            let k = 2 * i + parity;
            let amp = 0.5 * r * (((k + 1) * (k + 2)) as f64).sqrt();
            g[(i, i + 1)] = amp;
            g[(i + 1, i)] = -amp;
        }
        let s = g.exp();
        for m in (parity..rows).step_by(2) {
            for n in (parity..cols).step_by(2) {
                out[(m, n)] = s[(m / 2, n / 2)];
            }
        }
    }
    out
}

/// Thermal occupation probabilities, cut where they drop below `1e-30`.
pub fn thermal_weights(nbar: f64) -> Vec<f64> {
    if nbar == 0.0 {
        return vec![1.0];
    }
    let q = nbar / (1.0 + nbar);
    let mut w = vec![1.0 / (1.0 + nbar)];
    while *w.last().unwrap() > 1e-30 {
        let next = w.last().unwrap() * q;
        w.push(next);
    }
    w
}

/// Density matrix of a prepared mode on `0..dim`.
pub fn single_mode_density(prep: &ModePrep, dim: usize) -> DMatrix<Complex64> {
    let weights = thermal_weights(prep.nbar);
    let s = squeeze_matrix(prep.r, dim, weights.len());
    let mut rho = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for j in 0..dim {
        for k in 0..dim {
            let v: f64 = weights.iter().enumerate().map(|(n, w)| w * s[(j, n)] * s[(k, n)]).sum();
            let phase = Complex64::from_polar(1.0, -prep.phi * (j as f64 - k as f64));
            rho[(j, k)] = phase * v;
        }
    }
    rho
}

/// Photon-number distribution of a squeezed thermal state on `0..dim`.
pub fn squeezed_thermal_distribution(nbar: f64, r: f64, dim: usize) -> Vec<f64> {
    let weights = thermal_weights(nbar);
    let s = squeeze_matrix(r, dim, weights.len());
    (0..dim)
        .map(|k| weights.iter().enumerate().map(|(n, w)| w * s[(k, n)].powi(2)).sum())
        .collect()
}

/// `(<a†a>, <a²>)` of a truncated single-mode density matrix.
pub fn single_mode_moments(rho: &DMatrix<Complex64>) -> (f64, Complex64) {
    let dim = rho.nrows();
    let n: f64 = (0..dim).map(|k| k as f64 * rho[(k, k)].re).sum();
    // <a²> = sum_k sqrt(k(k-1)) rho_{k, k-2}... tr(rho a²) = sum_k <k|rho|k+2> sqrt((k+1)(k+2))
    let a2: Complex64 = (0..dim.saturating_sub(2))
        .map(|k| rho[(k, k + 2)] * (((k + 1) * (k + 2)) as f64).sqrt())
        .sum();
    (n, a2)
}

fn beam_splitter_block(total: usize, theta: f64) -> DMatrix<f64> {
    let size = total + 1;
    let mut g = DMatrix::zeros(size, size);
    for k in 0..total {
        // a1† a2 |k, N-k> = sqrt(k+1) sqrt(N-k) |k+1, N-k-1>
        let amp = (((k + 1) * (total - k)) as f64).sqrt();
        g[(k + 1, k)] = theta * amp;
        g[(k, k + 1)] = -theta * amp;
    }
    g.exp()
}

/// Two prepared modes combined on a beam splitter, restricted to the window
/// `n1, n2 < window`. Entries inside the window are exact up to the thermal
/// cut, since the beam splitter conserves the total number.
pub fn two_mode_density(a: &ModePrep, b: &ModePrep, theta: f64, window: usize) -> DMatrix<Complex64> {
    let full = 2 * window;
    let rho1 = single_mode_density(a, full);
    let rho2 = single_mode_density(b, full);
    let blocks: Vec<DMatrix<f64>> = (0..full).map(|n| beam_splitter_block(n, theta)).collect();
    let idx = |n1: usize, n2: usize| n1 * window + n2;
    let dim = window * window;
    let mut out = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for total in 0..full {
        for total_b in 0..full {
            // input block between |j, N-j> and |j', N'-j'>
            let rows = total + 1;
            let cols = total_b + 1;
            let mut block = DMatrix::from_element(rows, cols, Complex64::new(0.0, 0.0));
            for j in 0..rows {
                for jb in 0..cols {
                    block[(j, jb)] = rho1[(j, jb)] * rho2[(total - j, total_b - jb)];
                }
            }
            let u = blocks[total].map(|x| Complex64::new(x, 0.0));
            let ub = blocks[total_b].map(|x| Complex64::new(x, 0.0));
            let rotated = &u * block * ub.transpose();
            for k in 0..rows {
                let (n1, n2) = (k, total - k);
                if n1 >= window || n2 >= window {
                    continue;
                }
                for kb in 0..cols {
                    let (m1, m2) = (kb, total_b - kb);
                    if m1 >= window || m2 >= window {
                        continue;
                    }
                    out[(idx(n1, n2), idx(m1, m2))] = rotated[(k, kb)];
                }
            }
        }
    }
    out
}

/// Partial transpose on the second mode of a `window²` density matrix.
pub fn partial_transpose(rho: &DMatrix<Complex64>, window: usize) -> DMatrix<Complex64> {
    let idx = |n1: usize, n2: usize| n1 * window + n2;
    let dim = window * window;
    DMatrix::from_fn(dim, dim, |row, col| {
        let (n1, n2) = (row / window, row % window);
        let (m1, m2) = (col / window, col % window);
        rho[(idx(n1, m2), idx(m1, n2))]
    })
}

pub fn min_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    SymmetricEigen::new(herm).eigenvalues.min()
}

/// Smallest eigenvalue of the partial transpose of the two-mode squeezed
/// vacuum `sum_n tanh^n r / cosh r |n, n>` truncated to `n < window`, by
/// Lanczos iteration on `v -> psi v^T conj(psi)`.
pub fn tmsv_partial_transpose_min(r: f64, window: usize) -> f64 {
    let amp: Vec<f64> = (0..window).map(|n| r.tanh().powi(n as i32) / r.cosh()).collect();
    let psi = DMatrix::from_fn(window, window, |i, j| if i == j { amp[i] } else { 0.0 });
    let matvec = |v: &DVector<f64>| -> DVector<f64> {
        let vm = DMatrix::from_row_slice(window, window, v.as_slice());
        let out = &psi * vm.transpose() * &psi;
        DVector::from_row_slice(out.transpose().as_slice())
    };
    lanczos_min(matvec, window * window, 300)
}

/// Smallest eigenvalue of a real symmetric operator by Lanczos iteration
/// with full reorthogonalisation.
pub fn lanczos_min<F: Fn(&DVector<f64>) -> DVector<f64>>(matvec: F, dim: usize, max_iter: usize) -> f64 {
    let steps = max_iter.min(dim);
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(steps);
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    // deterministic start vector with support on every basis state
    let mut q = DVector::from_fn(dim, |i, _| 1.0 + 0.37 * ((i * 7919) % 101) as f64 / 101.0);
    q /= q.norm();
    for _ in 0..steps {
        let mut w = matvec(&q);
        let a = q.dot(&w);
        alpha.push(a);
        basis.push(q.clone());
        for _pass in 0..2 {
            for b in &basis {
                let proj = b.dot(&w);
                w -= b * proj;
            }
        }
        let norm = w.norm();
        if norm < 1e-14 {
            break;
        }
        beta.push(norm);
        q = w / norm;
    }
    let k = alpha.len();
    let t = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j || j + 1 == i {
            beta[i.min(j)]
        } else {
            0.0
        }
    });
    SymmetricEigen::new(t).eigenvalues.min()
}

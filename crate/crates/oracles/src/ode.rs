//! Adaptive integration of the second-moment equations of two damped modes
//! sharing a thermal reservoir.
//!
//! With `da/dt = K a + F`, `K = -i M`, `<F_j† F_l> = nbar G_jl` the moments
//! `N_jl = <a_j† a_l>` and `S_jl = <a_j a_l>` obey
//! `dN/dt = K* N + N K^T + nbar G` and `dS/dt = K S + S K^T`.

use num_complex::Complex64;

pub type Mat2 = [[Complex64; 2]; 2];

#[derive(Debug, Clone, Copy)]
pub struct Rates {
    pub omega0: f64,
    pub coupling: f64,
    pub gamma: f64,
    pub gamma12: f64,
    pub nbar: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    /// `<a_j† a_l>`
    pub normal: Mat2,
    /// `<a_j a_l>`
    pub anomalous: Mat2,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn drift(r: &Rates) -> Mat2 {
    // K = -i M with M = [[w0 - i g/2, W - i g12/2], [W - i g12/2, w0 - i g/2]]
    let diag = c(-0.5 * r.gamma, -r.omega0);
    let off = c(-0.5 * r.gamma12, -r.coupling);
    [[diag, off], [off, diag]]
}

fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[c(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn transpose(a: &Mat2) -> Mat2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

fn conj(a: &Mat2) -> Mat2 {
    [[a[0][0].conj(), a[0][1].conj()], [a[1][0].conj(), a[1][1].conj()]]
}

const DIM: usize = 16;

fn pack(m: &Moments) -> [f64; DIM] {
    let mut v = [0.0; DIM];
    let mut k = 0;
    for mat in [&m.normal, &m.anomalous] {
        for row in mat {
            for z in row {
                v[k] = z.re;
                v[k + 1] = z.im;
                k += 2;
            }
        }
    }
    v
}

fn unpack(v: &[f64; DIM]) -> Moments {
    let mut mats = [[[c(0.0, 0.0); 2]; 2]; 2];
    let mut k = 0;
    for mat in mats.iter_mut() {
        for row in mat.iter_mut() {
            for z in row.iter_mut() {
                *z = c(v[k], v[k + 1]);
                k += 2;
            }
        }
    }
    Moments {
        normal: mats[0],
        anomalous: mats[1],
    }
}

fn rhs(r: &Rates, k: &Mat2, v: &[f64; DIM]) -> [f64; DIM] {
    let m = unpack(v);
    let kt = transpose(k);
    let kc = conj(k);
    let a = mul(&kc, &m.normal);
    let b = mul(&m.normal, &kt);
    let g = [[r.gamma, r.gamma12], [r.gamma12, r.gamma]];
    let mut dn = [[c(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            dn[i][j] = a[i][j] + b[i][j] + c(r.nbar * g[i][j], 0.0);
        }
    }
    let sa = mul(k, &m.anomalous);
    let sb = mul(&m.anomalous, &kt);
    let mut ds = [[c(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            ds[i][j] = sa[i][j] + sb[i][j];
        }
    }
    pack(&Moments {
        normal: dn,
        anomalous: ds,
    })
}

fn axpy(y: &[f64; DIM], a: f64, x: &[f64; DIM]) -> [f64; DIM] {
    std::array::from_fn(|i| y[i] + a * x[i])
}

fn rk4(r: &Rates, k: &Mat2, y: &[f64; DIM], h: f64) -> [f64; DIM] {
    let k1 = rhs(r, k, y);
    let k2 = rhs(r, k, &axpy(y, 0.5 * h, &k1));
    let k3 = rhs(r, k, &axpy(y, 0.5 * h, &k2));
    let k4 = rhs(r, k, &axpy(y, h, &k3));
    std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Integrates from `t = 0` to each requested time (ascending) with classical
/// RK4, step doubling and local extrapolation. `tol` bounds the per-step
/// error relative to `1 + |y|`.
pub fn integrate(rates: &Rates, start: &Moments, times: &[f64], tol: f64) -> Vec<Moments> {
    let k = drift(rates);
    let mut y = pack(start);
    let mut t = 0.0;
    let scale = rates.omega0.abs() + rates.coupling.abs() + rates.gamma + 1e-300;
    let mut h = 0.01 / scale;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        assert!(target >= t, "times must be ascending");
        while t < target {
            let step = h.min(target - t);
            let full = rk4(rates, &k, &y, step);
            let half = rk4(rates, &k, &y, 0.5 * step);
            let two_half = rk4(rates, &k, &half, 0.5 * step);
            let norm = two_half.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let err = two_half
                .iter()
                .zip(&full)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
                / 15.0;
            let allowed = tol * (1.0 + norm);
            if err <= allowed {
                y = std::array::from_fn(|i| two_half[i] + (two_half[i] - full[i]) / 15.0);
                t = if step == target - t { target } else { t + step };
            }
            let factor = if err == 0.0 { 4.0 } else { (0.9 * (allowed / err).powf(0.2)).clamp(0.2, 4.0) };
            h = step * factor;
        }
        out.push(unpack(&y));
    }
    out
}

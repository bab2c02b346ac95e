//! Phonon-number statistics of a single ion's reduced Gaussian state.
//!
//! Three exact routes produce a [`Pmf`]:
//!
//! * [`geometric_pmf`] for states without anomalous moment;
//! * [`hypergeometric_pmf`], the closed form in terms of
//!   `2F1((k+1)/2, (k+2)/2; 1; z)`, valid only for `|m| < n`;
//! * [`generating_pmf`], a three-term recurrence that follows from the
//!   factorised generating function
//!   `sum_k P(k) x^k = [(1 + a(1-x))(1 + b(1-x))]^(-1/2)`, `a, b = n -+ |m|`,
//!   valid on the whole physical domain.
//!
//! [`general_pmf`] dispatches between them.

pub mod hypergeometric;

use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub use hypergeometric::hyp2f1_series;

/// Tail mass targeted by automatic truncation.
pub const AUTO_TAIL: f64 = 1e-12;
/// Largest support automatic truncation will allocate.
pub const AUTO_CAP: usize = 100_000;

/// Reduced single-mode Gaussian state: `n = <a^dag a>`, `m = -<a^2>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalGaussian {
    pub n: f64,
    pub m: Complex64,
}

impl LocalGaussian {
    /// Checks `n >= 0` and `n(n+1) >= |m|^2` (to rounding).
    pub fn new(n: f64, m: Complex64) -> Result<Self> {
        if !(n.is_finite() && n >= 0.0) {
            return Err(Error::Unphysical(format!("occupation {n} must be finite and >= 0")));
        }
        let g = Self { n, m };
        if g.purity_gap() < -1e-12 * (1.0 + n * (n + 1.0)) {
            return Err(Error::Unphysical(format!(
                "n(n+1) - |m|^2 = {} < 0 for n = {n}, |m| = {}",
                g.purity_gap(),
                m.norm()
            )));
        }
        Ok(g)
    }

    pub fn thermal(n: f64) -> Result<Self> {
        Self::new(n, Complex64::new(0.0, 0.0))
    }

    /// `n(n+1) - |m|^2`; zero for pure states.
    pub fn purity_gap(&self) -> f64 {
        self.n * (self.n + 1.0) - self.m.norm_sqr()
    }

    /// True when the hypergeometric closed form applies (`|m| < n`).
    pub fn in_hypergeometric_domain(&self) -> bool {
        self.m.norm() < self.n
    }

    // Generating-function parameters: a = n - |m|, b = n + |m|.
    fn factor_pair(&self) -> (f64, f64) {
        let mm = self.m.norm();
        (self.n - mm, self.n + mm)
    }
}

/// How a [`Pmf`] was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PmfRoute {
    Geometric,
    Hypergeometric,
    GeneratingFunction,
}

/// Probabilities for `k = 0..=k_max` plus a rigorous bound on the
/// remaining mass `P(k > k_max)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pmf {
    pub probabilities: Vec<f64>,
    pub tail_bound: f64,
    pub route: PmfRoute,
}

impl Pmf {
    pub fn k_max(&self) -> usize {
        self.probabilities.len() - 1
    }

    pub fn sum(&self) -> f64 {
        // Small-to-large summation keeps the tail terms.
        self.probabilities.iter().rev().sum()
    }

    pub fn mean(&self) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .rev()
            .map(|(k, p)| k as f64 * p)
            .sum()
    }

    pub fn get(&self, k: usize) -> f64 {
        self.probabilities.get(k).copied().unwrap_or(0.0)
    }

    /// CSV with header `k,probability`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "k,probability")?;
        for (k, p) in self.probabilities.iter().enumerate() {
            writeln!(out, "{k},{p:e}")?;
        }
        Ok(())
    }
}

/// Support selection for the pmf routines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    /// Smallest `k_max` whose tail bound is at most [`AUTO_TAIL`], capped at [`AUTO_CAP`].
    Auto,
    Fixed(usize),
}

/// Thermal (geometric) distribution `n^k / (1+n)^(k+1)`.
pub fn geometric_pmf(n: f64, truncation: Truncation) -> Result<Pmf> {
    if !(n.is_finite() && n >= 0.0) {
        return Err(invalid("n", format!("{n} must be finite and >= 0")));
    }
    let ratio = n / (1.0 + n);
    let k_max = match truncation {
        Truncation::Fixed(k) => k,
        Truncation::Auto if ratio == 0.0 => 0,
        Truncation::Auto => {
            let k = (AUTO_TAIL.ln() / ratio.ln()).ceil() as usize;
            k.saturating_sub(1).min(AUTO_CAP)
        }
    };
    let p0 = 1.0 / (1.0 + n);
    let probabilities = (0..=k_max).map(|k| p0 * ratio.powi(k as i32)).collect();
    Ok(Pmf {
        probabilities,
        tail_bound: ratio.powi(k_max as i32 + 1),
        route: PmfRoute::Geometric,
    })
}

/// Closed form
/// `P(k) = 2F1((k+1)/2, (k+2)/2; 1; z) / ((1 + n/w)^(k+1) sqrt(w))`
/// with `w = n^2 - |m|^2` and `z = |m|^2 / (n(n+1) - |m|^2)^2`.
///
/// Returns [`Error::UnsupportedRegime`] when `|m| >= n`, where `w <= 0`.
pub fn hypergeometric_pmf(g: &LocalGaussian, truncation: Truncation) -> Result<Pmf> {
    if !g.in_hypergeometric_domain() {
        return Err(Error::UnsupportedRegime(format!(
            "hypergeometric form needs |m| < n, got n = {}, |m| = {}",
            g.n,
            g.m.norm()
        )));
    }
    let mm2 = g.m.norm_sqr();
    let w = g.n * g.n - mm2;
    let gap = g.purity_gap();
    let z = mm2 / (gap * gap);
    if !(0.0..1.0).contains(&z) {
        return Err(Error::UnsupportedRegime(format!("argument z = {z} outside [0, 1)")));
    }
    let k_max = resolve_truncation(g, truncation);
    let ln_base = (g.n / w).ln_1p();
    let ln_w = w.ln();
    let probabilities = (0..=k_max)
        .map(|k| {
            let ln_f = hypergeometric::ln_pmf_family(k, z)?;
            Ok((ln_f - (k as f64 + 1.0) * ln_base - 0.5 * ln_w).exp())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Pmf {
        probabilities,
        tail_bound: chernoff_tail(g, k_max),
        route: PmfRoute::Hypergeometric,
    })
}

/// Number distribution from the generating-function recurrence
/// `(k+1) P(k+1) = (p+q)(k+1/2) P(k) - p q k P(k-1)`, with
/// `p = a/(1+a)`, `q = b/(1+b)` and `P(0) = [(1+a)(1+b)]^(-1/2)`.
pub fn generating_pmf(g: &LocalGaussian, truncation: Truncation) -> Result<Pmf> {
    let g = LocalGaussian::new(g.n, g.m)?;
    let (a, b) = g.factor_pair();
    let p = a / (1.0 + a);
    let q = b / (1.0 + b);
    let k_max = resolve_truncation(&g, truncation);
    let mut probabilities = Vec::with_capacity(k_max + 1);
    let p0 = 1.0 / ((1.0 + a) * (1.0 + b)).sqrt();
    probabilities.push(p0);
    if k_max >= 1 {
        probabilities.push(0.5 * (p + q) * p0);
    }
    for k in 1..k_max {
        let kf = k as f64;
        let next = ((p + q) * (kf + 0.5) * probabilities[k] - p * q * kf * probabilities[k - 1]) / (kf + 1.0);
        // Rounding can leave a -1e-300 residue on exactly-zero odd terms.
        probabilities.push(next.max(0.0));
    }
    Ok(Pmf {
        probabilities,
        tail_bound: chernoff_tail(&g, k_max),
        route: PmfRoute::GeneratingFunction,
    })
}

/// Exact number distribution of any physical [`LocalGaussian`].
///
/// Uses the hypergeometric closed form whenever `|m| < n` and the
/// generating-function recurrence otherwise.
pub fn general_pmf(g: &LocalGaussian, truncation: Truncation) -> Result<Pmf> {
    let g = LocalGaussian::new(g.n, g.m)?;
    if g.in_hypergeometric_domain() {
        hypergeometric_pmf(&g, truncation)
    } else {
        generating_pmf(&g, truncation)
    }
}

fn resolve_truncation(g: &LocalGaussian, truncation: Truncation) -> usize {
    match truncation {
        Truncation::Fixed(k) => k,
        Truncation::Auto => auto_k_max(g),
    }
}

/// Smallest support with a tail bound of at most [`AUTO_TAIL`].
pub fn auto_k_max(g: &LocalGaussian) -> usize {
    if chernoff_tail(g, 0) <= AUTO_TAIL {
        return 0;
    }
    let mut hi = 1usize;
    while hi < AUTO_CAP && chernoff_tail(g, hi) > AUTO_TAIL {
        hi *= 2;
    }
    let mut hi = hi.min(AUTO_CAP);
    let mut lo = hi / 2;
    // invariant: tail(lo) > target, tail(hi) <= target (or hi == cap)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if chernoff_tail(g, mid) > AUTO_TAIL {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Chernoff bound `P(k > K) <= min_{x >= 1} G(x) / x^(K+1)` from the
/// generating function `G`.
pub fn chernoff_tail(g: &LocalGaussian, k_max: usize) -> f64 {
    let (a, b) = g.factor_pair();
    if b <= 0.0 {
        return 0.0;
    }
    let order = k_max as f64 + 1.0;
    // f(y) = ln G(1+y) - (K+1) ln(1+y), convex on [0, 1/b).
    let f = |y: f64| -0.5 * (-a * y).ln_1p() - 0.5 * (-b * y).ln_1p() - order * y.ln_1p();
    let (mut lo, mut hi) = (0.0_f64, (1.0 / b) * (1.0 - 1e-12));
    let inv_phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
        if hi - lo <= 1e-15 * hi.max(1e-300) {
            break;
        }
    }
    f(0.5 * (lo + hi)).min(0.0).exp()
}

/// Draws `count` i.i.d. phonon numbers by inversion of the cumulative
/// distribution. Draws falling in the truncated tail are reported as `k_max`.
pub fn sample<R: Rng + ?Sized>(pmf: &Pmf, count: usize, rng: &mut R) -> Vec<u32> {
    let cdf = cumulative(pmf);
    (0..count).map(|_| invert(&cdf, rng.random::<f64>())).collect()
}

/// [`sample`] with a ChaCha8 generator seeded from `seed`.
pub fn sample_seeded(pmf: &Pmf, count: usize, seed: u64) -> Vec<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample(pmf, count, &mut rng)
}

pub(crate) fn cumulative(pmf: &Pmf) -> Vec<f64> {
    let mut acc = 0.0;
    pmf.probabilities
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect()
}

pub(crate) fn invert(cdf: &[f64], u: f64) -> u32 {
    let k = cdf.partition_point(|&c| c <= u);
    k.min(cdf.len() - 1) as u32
}

/// Histogram of draws over `0..=k_max`.
pub fn histogram(draws: &[u32], k_max: usize) -> Vec<u64> {
    let mut counts = vec![0u64; k_max + 1];
    for &d in draws {
        counts[(d as usize).min(k_max)] += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn vacuum_is_a_delta() {
        let p = geometric_pmf(0.0, Truncation::Auto).unwrap();
        assert_eq!(p.probabilities, vec![1.0]);
        assert_eq!(p.tail_bound, 0.0);
        let g = general_pmf(&LocalGaussian::thermal(0.0).unwrap(), Truncation::Fixed(5)).unwrap();
        assert_eq!(g.get(0), 1.0);
        assert!(g.probabilities[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn geometric_normalisation_and_mean() {
        for n in [0.01, 0.35, 2.3, 9.508_331_944_775_05, 150.0] {
            let p = geometric_pmf(n, Truncation::Auto).unwrap();
            assert!(p.tail_bound <= AUTO_TAIL);
            assert!((p.sum() + p.tail_bound - 1.0).abs() <= 1e-12, "n={n}");
            // The truncated tail carries mean (K+1+n) * tail.
            let tail_mean = (p.k_max() as f64 + 1.0 + n) * p.tail_bound;
            assert!((p.mean() + tail_mean - n).abs() <= 1e-10 * n.max(1.0), "n={n}");
        }
    }

    #[test]
    fn geometric_first_entry() {
        let p = geometric_pmf(9.50833, Truncation::Fixed(3)).unwrap();
        assert!((p.get(0) - 0.095_162_599_575_765_13).abs() < 1e-15);
    }

    #[test]
    fn rejects_negative_occupation() {
        assert!(geometric_pmf(-0.1, Truncation::Auto).is_err());
        assert!(LocalGaussian::new(-0.1, c(0.0, 0.0)).is_err());
        assert!(LocalGaussian::new(1.0, c(1.5, 0.0)).is_err());
    }

    #[test]
    fn thermal_limit_of_closed_form() {
        let g = LocalGaussian::thermal(2.3).unwrap();
        let hyp = hypergeometric_pmf(&g, Truncation::Fixed(200)).unwrap();
        let geo = geometric_pmf(2.3, Truncation::Fixed(200)).unwrap();
        for k in 0..=200 {
            assert!((hyp.get(k) - geo.get(k)).abs() <= 1e-12, "k={k}");
        }
    }

    #[test]
    fn closed_form_rejects_strong_squeezing() {
        let g = LocalGaussian::new(3.262, c(3.0, 0.0)).unwrap();
        assert!(hypergeometric_pmf(&g, Truncation::Auto).is_ok());
        let g = LocalGaussian::new(3.262, c(3.3, 0.0)).unwrap();
        assert!(matches!(
            hypergeometric_pmf(&g, Truncation::Auto),
            Err(Error::UnsupportedRegime(_))
        ));
        assert_eq!(general_pmf(&g, Truncation::Auto).unwrap().route, PmfRoute::GeneratingFunction);
    }

    #[test]
    fn routes_agree_inside_domain() {
        for (n, m) in [(1.0, c(0.4, 0.3)), (4.0, c(-2.0, 2.5)), (0.3, c(0.0, 0.29))] {
            let g = LocalGaussian::new(n, m).unwrap();
            let a = hypergeometric_pmf(&g, Truncation::Auto).unwrap();
            let b = generating_pmf(&g, Truncation::Fixed(a.k_max())).unwrap();
            for k in 0..=a.k_max() {
                assert!((a.get(k) - b.get(k)).abs() <= 1e-13, "n={n} k={k}: {} vs {}", a.get(k), b.get(k));
            }
        }
    }

    #[test]
    fn pure_squeezed_vacuum_has_even_support() {
        let r: f64 = 0.8;
        let g = LocalGaussian::new(r.sinh().powi(2), c(r.sinh() * r.cosh(), 0.0)).unwrap();
        let p = general_pmf(&g, Truncation::Auto).unwrap();
        for k in (1..p.k_max()).step_by(2) {
            assert!(p.get(k).abs() < 1e-16);
        }
        // P(2) = tanh^2 r / (2 cosh r)
        assert!((p.get(2) - r.tanh().powi(2) / (2.0 * r.cosh())).abs() < 1e-14);
    }

    #[test]
    fn chernoff_bound_dominates_true_tail() {
        let g = LocalGaussian::new(1.2, c(0.9, -0.5)).unwrap();
        let wide = general_pmf(&g, Truncation::Fixed(400)).unwrap();
        for k in [0usize, 3, 10, 40] {
            let tail: f64 = wide.probabilities[k + 1..].iter().sum();
            assert!(chernoff_tail(&g, k) >= tail);
        }
    }

    #[test]
    fn delta_pmf_samples_zero() {
        let p = geometric_pmf(0.0, Truncation::Auto).unwrap();
        assert!(sample_seeded(&p, 1000, 3).iter().all(|&k| k == 0));
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let p = geometric_pmf(1.7, Truncation::Auto).unwrap();
        assert_eq!(sample_seeded(&p, 5000, 42), sample_seeded(&p, 5000, 42));
        assert_ne!(sample_seeded(&p, 5000, 42), sample_seeded(&p, 5000, 43));
    }

    #[test]
    fn csv_layout() {
        let p = geometric_pmf(1.0, Truncation::Fixed(1)).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "k,probability\n0,5e-1\n1,2.5e-1\n");
    }
}

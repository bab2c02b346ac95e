//! Gauss hypergeometric function on the real axis.
//!
//! Three regimes: the direct Gauss series for `|z| <= 1/2`, Euler's
//! transformation `(1-z)^(c-a-b) 2F1(c-a, c-b; c; z)` for `1/2 < z < 1`, and
//! Pfaff's transformation `(1-z)^(-a) 2F1(a, c-b; c; z/(z-1))` (or its `a <-> b`
//! twin, when that one terminates) for `z < -1/2`. Terminating series (a
//! non-positive integer upper parameter) are summed directly for any `z`.
//!
//! On `0 <= z < 1`, where the phonon-number pmf lives, the summed terms never
//! cancel. Far out on the negative axis with large upper parameters the
//! transformed series alternate and lose digits roughly in proportion to
//! `(1-z)^a |2F1|^-1`; there the result is only as good as that cancellation
//! allows.

use crate::error::{invalid, Error, Result};

const MAX_TERMS: usize = 200_000;
const REL_TOL: f64 = 1e-17;

/// `2F1(a, b; c; z)` for real arguments with `z < 1`.
///
/// Relative accuracy is about `1e-15` on `0 <= z < 1`; see the module notes for
/// the negative axis.
pub fn hyp2f1_series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if is_non_positive_integer(c) {
        return Err(invalid("c", format!("{c} is a non-positive integer")));
    }
    if !z.is_finite() {
        return Err(invalid("z", "must be finite"));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    if is_non_positive_integer(a) || is_non_positive_integer(b) {
        return direct(a, b, c, z);
    }
    if z >= 1.0 {
        return Err(invalid("z", format!("{z} lies on or beyond the branch point z = 1")));
    }
    if z.abs() <= 0.5 {
        direct(a, b, c, z)
    } else if z > 0.5 {
        let scale = (1.0 - z).powf(c - a - b);
        // No second transformation: the Euler image is summed directly.
        Ok(scale * direct(c - a, c - b, c, z)?)
    } else {
        let w = z / (z - 1.0);
        // Either Pfaff image works; prefer the one that terminates.
        if is_non_positive_integer(c - a) && !is_non_positive_integer(c - b) {
            Ok((1.0 - z).powf(-b) * direct(c - a, b, c, w)?)
        } else {
            Ok((1.0 - z).powf(-a) * direct(a, c - b, c, w)?)
        }
    }
}

fn direct(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut quiet = 0;
    for j in 0..MAX_TERMS {
        let jf = j as f64;
        let ratio = (a + jf) * (b + jf) / ((c + jf) * (jf + 1.0)) * z;
        if ratio == 0.0 {
            return Ok(sum);
        }
        term *= ratio;
        sum += term;
        if !sum.is_finite() {
            break;
        }
        if term.abs() <= REL_TOL * sum.abs() {
            quiet += 1;
            // Past the peak the ratio is below one, so two small terms in a row
            // bound the remainder.
            if quiet >= 2 && ratio.abs() < 1.0 {
                return Ok(sum);
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::NonConvergence { a, b, c, z })
}

/// `ln 2F1((k+1)/2, (k+2)/2; 1; z)` for `0 <= z < 1`.
///
/// All terms are positive in both the direct and the Euler-transformed series
/// (the transformed series terminates after `floor(k/2) + 1` terms), so the sum
/// is accumulated in scaled form and never overflows.
pub(crate) fn ln_pmf_family(k: usize, z: f64) -> Result<f64> {
    let kf = k as f64;
    let (a, b, c) = ((kf + 1.0) / 2.0, (kf + 2.0) / 2.0, 1.0);
    if !(0.0..1.0).contains(&z) {
        return Err(invalid("z", format!("{z} outside [0, 1)")));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if z <= 0.5 {
        ln_positive_series(a, b, c, z).ok_or(Error::NonConvergence { a, b, c, z })
    } else {
        let poly = ln_positive_series(c - a, c - b, c, z).ok_or(Error::NonConvergence { a, b, c, z })?;
        Ok((c - a - b) * (-z).ln_1p() + poly)
    }
}

fn ln_positive_series(a: f64, b: f64, c: f64, z: f64) -> Option<f64> {
    // sum = acc * exp(shift)
    let mut shift = 0.0_f64;
    let mut acc = 1.0_f64;
    let mut ln_term = 0.0_f64;
    for j in 0..MAX_TERMS {
        let jf = j as f64;
        let ratio = (a + jf) * (b + jf) / ((c + jf) * (jf + 1.0)) * z;
        if ratio == 0.0 {
            return Some(shift + acc.ln());
        }
        debug_assert!(ratio > 0.0);
        ln_term += ratio.ln();
        let rel = (ln_term - shift).exp();
        if ln_term - shift > 300.0 {
            acc *= (shift - ln_term).exp();
            shift = ln_term;
            acc += 1.0;
        } else {
            acc += rel;
        }
        if ratio < 1.0 && rel <= REL_TOL * acc {
            // Geometric bound on the remainder once ratios keep shrinking.
            return Some(shift + acc.ln());
        }
    }
    None
}

fn is_non_positive_integer(x: f64) -> bool {
    x <= 0.0 && x.fract() == 0.0
}

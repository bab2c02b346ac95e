//! Gauss series summed term by term in 512-bit fixed point.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

const FRACTION_BITS: u32 = 512;

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite input")
}

/// `2F1(a, b; c; z)` by direct summation for `|z| < 1`. Terms and partial
/// sums are integers in units of `2^-512`, and every term ratio is applied
/// as an exact rational (each `f64` is dyadic), so the only error is one unit
/// of truncation per step. Summation stops once the terms fall below `1e-30`
/// of the partial sum and are shrinking.
///
/// Returns the value and the number of terms used.
pub fn hyp2f1_direct(a: f64, b: f64, c: f64, z: f64) -> (f64, usize) {
    assert!(z.abs() < 1.0, "direct summation needs |z| < 1");
    let (a, b, c, z) = (exact(a), exact(b), exact(c), exact(z));
    let unit = BigInt::one() << FRACTION_BITS;
    let scale = BigInt::from(10u32).pow(30u32);
    let mut term = unit.clone();
    let mut sum = unit.clone();
    let mut j = 0usize;
    loop {
        let jr = BigRational::from_integer(BigInt::from(j));
        let ratio = (&a + &jr) * (&b + &jr) / ((&c + &jr) * (&jr + BigRational::one())) * &z;
        term = term * ratio.numer() / ratio.denom();
        sum += &term;
        j += 1;
        let shrinking = ratio.abs() < BigRational::one();
        // |term| <= 1e-30 |sum|, compared as 10^30 |term| <= |sum|
        let small = term.abs() * &scale <= sum.abs();
        if term.is_zero() || (small && shrinking) {
            let value = BigRational::new(sum, unit).to_f64().unwrap();
            return (value, j + 1);
        }
        assert!(j < 1_000_000, "series did not settle");
    }
}

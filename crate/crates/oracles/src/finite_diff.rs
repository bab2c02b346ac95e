//! Central differences with one Richardson step.

/// `(4 D(h/2) - D(h)) / 3` with `D(h) = (f(x+h) - f(x-h)) / 2h`.
pub fn richardson<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    let central = |step: f64| (f(x + step) - f(x - step)) / (2.0 * step);
    (4.0 * central(0.5 * h) - central(h)) / 3.0
}

/// Gradient of `f` at `x` with per-coordinate steps.
pub fn gradient<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], steps: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            richardson(
                |v| {
                    let mut p = x.to_vec();
                    p[i] = v;
                    f(&p)
                },
                x[i],
                steps[i],
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_of_sine() {
        let d = richardson(f64::sin, 0.4, 1e-3);
        assert!((d - 0.4f64.cos()).abs() < 1e-12);
    }
}

//! Finite-difference oracles used by the derivative audits.

/// Five-point central difference `(−f(x+2h) + 8f(x+h) − 8f(x−h) + f(x−2h)) / 12h`.
pub fn central_difference<F: FnMut(f64) -> f64>(mut f: F, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

/// Default step `1e-6 (1 + |x|)`.
pub fn default_step(x: f64) -> f64 {
    1e-6 * (1.0 + x.abs())
}

/// Central-difference gradient of `f` at `x` with per-coordinate default steps.
pub fn gradient<F: FnMut(&[f64]) -> f64>(mut f: F, x: &[f64]) -> Vec<f64> {
    let mut work = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = default_step(x[i]);
            let d = central_difference(
                |t| {
                    work[i] = t;
                    f(&work)
                },
                x[i],
                h,
            );
            work[i] = x[i];
            d
        })
        .collect()
}

/// `‖a − b‖∞ / max(‖a‖∞, floor)`.
pub fn relative_error(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    let diff = analytic
        .iter()
        .zip(numeric)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let scale = analytic.iter().map(|a| a.abs()).fold(floor, f64::max);
    diff / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_quartics() {
        let d = central_difference(|x| x.powi(4) - 3.0 * x.powi(3), 0.7, 1e-3);
        let exact = 4.0 * 0.7f64.powi(3) - 9.0 * 0.49;
        assert!((d - exact).abs() < 1e-11);
    }

    #[test]
    fn gradient_of_quadratic_form() {
        let g = gradient(|x| x[0] * x[0] + 3.0 * x[0] * x[1], &[1.0, 2.0]);
        assert!(relative_error(&[8.0, 3.0], &g, 1.0) < 1e-9);
    }
}

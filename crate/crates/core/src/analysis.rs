//! Small fitting helpers for sweep post-processing: power laws on log-log
//! data, the quadratic heating law, and the threshold crossover estimate.

use crate::error::Error;
use crate::Result;

/// Fit `y = amplitude * x^exponent` by linear regression on logs.
/// Requires strictly positive data.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<PowerLaw> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch { expected: xs.len(), got: ys.len() });
    }
    if xs.len() < 2 || xs.iter().chain(ys).any(|&v| v <= 0.0) {
        return Err(Error::TooFewPhases(xs.len()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let exponent = sxy / sxx;
    let amplitude = (my - exponent * mx).exp();
    Ok(PowerLaw { amplitude, exponent })
}

#[derive(Debug, Clone, Copy)]
pub struct PowerLaw {
    pub amplitude: f64,
    pub exponent: f64,
}

impl PowerLaw {
    pub fn eval(&self, x: f64) -> f64 {
        self.amplitude * x.powf(self.exponent)
    }
}

/// Least-squares fit of `y = q1 x + q2 x^2` (no constant term).
pub fn fit_linear_quadratic(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch { expected: xs.len(), got: ys.len() });
    }
    if xs.len() < 2 {
        return Err(Error::TooFewPhases(xs.len()));
    }
    // normal equations for the 2-parameter design [x, x^2]
    let (mut s2, mut s3, mut s4, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        s2 += x * x;
        s3 += x * x * x;
        s4 += x * x * x * x;
        b1 += x * y;
        b2 += x * x * y;
    }
    let det = s2 * s4 - s3 * s3;
    if det.abs() < 1e-300 {
        return Err(Error::TooFewPhases(xs.len()));
    }
    Ok(((s4 * b1 - s3 * b2) / det, (s2 * b2 - s3 * b1) / det))
}

/// Mean of the `ys` whose `xs` fall inside `[lo, hi]`.
pub fn window_mean(xs: &[f64], ys: &[f64], lo: f64, hi: f64) -> Option<f64> {
    let vals: Vec<f64> = xs
        .iter()
        .zip(ys)
        .filter(|(&x, &y)| x >= lo && x <= hi && y.is_finite())
        .map(|(_, &y)| y)
        .collect();
    if vals.is_empty() {
        None
    } else {
        Some(vals.iter().sum::<f64>() / vals.len() as f64)
    }
}

/// Crossover of a fitted pre-threshold power law with a plateau level:
/// the `x` where `amplitude * x^exponent = plateau`.
pub fn power_law_plateau_crossing(fit: &PowerLaw, plateau: f64) -> f64 {
    (plateau / fit.amplitude).powf(1.0 / fit.exponent)
}

/// Log-spaced grid of `n` points covering `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (llo + (lhi - llo) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn power_law_fit_recovers_exact_data() {
        let xs = [0.2f64, 0.4, 0.8, 1.6];
        let ys: Vec<f64> = xs.iter().map(|x| 3.5 * x * x).collect();
        let fit = fit_power_law(&xs, &ys).unwrap();
        assert_abs_diff_eq!(fit.amplitude, 3.5, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.exponent, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            power_law_plateau_crossing(&fit, 3.5 * 9.0),
            3.0,
            epsilon = 1e-10
        );
    }

    #[test]
    fn linear_quadratic_fit_recovers_coefficients() {
        let xs = [0.5, 0.8, 1.1, 1.6, 2.0];
        let ys: Vec<f64> = xs.iter().map(|x| 0.007 * x + 0.035 * x * x).collect();
        let (q1, q2) = fit_linear_quadratic(&xs, &ys).unwrap();
        assert_abs_diff_eq!(q1, 0.007, epsilon = 1e-12);
        assert_abs_diff_eq!(q2, 0.035, epsilon = 1e-12);
    }

    #[test]
    fn window_mean_filters() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [10.0, 20.0, 30.0, 40.0];
        assert_abs_diff_eq!(window_mean(&xs, &ys, 2.0, 3.0).unwrap(), 25.0);
        assert!(window_mean(&xs, &ys, 5.0, 6.0).is_none());
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(0.01, 10.0, 7);
        assert_eq!(g.len(), 7);
        assert_abs_diff_eq!(g[0], 0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(g[6], 10.0, epsilon = 1e-12);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
}

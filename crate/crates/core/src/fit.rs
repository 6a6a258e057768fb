//! Ordinary least-squares line fits used for growth exponents.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("need at least {needed} points for a fit, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("abscissae are all equal; slope undefined")]
    DegenerateAbscissae,
    #[error("non-finite data point ({0}, {1})")]
    NonFinite(f64, f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub residual: f64,
}

/// Fits `y = slope * x + intercept` with at least `min_points` samples.
pub fn least_squares(xs: &[f64], ys: &[f64], min_points: usize) -> Result<LineFit, FitError> {
    assert_eq!(xs.len(), ys.len(), "abscissa/ordinate length mismatch");
    let n = xs.len();
    if n < min_points.max(2) {
        return Err(FitError::TooFewPoints {
            needed: min_points.max(2),
            got: n,
        });
    }
    if let Some((&x, &y)) = xs
        .iter()
        .zip(ys)
        .find(|(x, y)| !x.is_finite() || !y.is_finite())
    {
        return Err(FitError::NonFinite(x, y));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= f64::EPSILON * xs.iter().map(|x| x * x).sum::<f64>() {
        return Err(FitError::DegenerateAbscissae);
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    Ok(LineFit {
        slope,
        intercept,
        residual: (ss / nf).sqrt(),
    })
}

/// Slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64], min_points: usize) -> Result<LineFit, FitError> {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    least_squares(&lx, &ly, min_points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_recovered() {
        let xs = [2.0, 3.0, 4.0, 5.0];
        let ys: Vec<f64> = xs.iter().map(|t| -5.0 * t + 1.0).collect();
        let f = least_squares(&xs, &ys, 3).unwrap();
        assert!((f.slope + 5.0).abs() < 1e-9);
        assert!((f.intercept - 1.0).abs() < 1e-9);
        assert!(f.residual < 1e-12);
    }

    #[test]
    fn constant_data_zero_slope() {
        let f = least_squares(&[2.0, 3.0, 4.0], &[7.0; 3], 3).unwrap();
        assert_eq!(f.slope, 0.0);
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert_eq!(
            least_squares(&[1.0, 2.0], &[1.0, 2.0], 3),
            Err(FitError::TooFewPoints { needed: 3, got: 2 })
        );
        assert_eq!(
            least_squares(&[2.0; 4], &[1.0, 2.0, 3.0, 4.0], 3),
            Err(FitError::DegenerateAbscissae)
        );
    }
}

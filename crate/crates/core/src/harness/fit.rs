//! Log-log rate fits.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Least-squares line `log e = slope · log h + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// half-width of the 95% confidence interval of the slope
    pub slope_ci95: f64,
    /// root-mean-square residual in log space
    pub residual: f64,
    pub points: usize,
}

/// Fits `error ≈ C h^slope` through `(h, error)` pairs with `h, error > 0`.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    let admissible: Vec<(f64, f64)> = points
        .iter()
        .filter(|(h, e)| h.is_finite() && e.is_finite() && *h > 0.0 && *e > 0.0)
        .map(|&(h, e)| (h.ln(), e.ln()))
        .collect();
    let n = admissible.len();
    if n < 3 {
        return Err(Error::TooFewPoints { got: n });
    }
    let nf = n as f64;
    let mx = admissible.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = admissible.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = admissible.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("rate fit needs distinct abscissae".into()));
    }
    let sxy: f64 = admissible.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = admissible
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let dof = nf - 2.0;
    let se = (ssr / dof / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| Error::Numerical(e.to_string()))?
        .inverse_cdf(0.975);
    Ok(RateFit {
        slope,
        intercept,
        slope_ci95: t * se,
        residual: (ssr / nf).sqrt(),
        points: n,
    })
}

/// Slopes of [`fit_rate`] over consecutive windows of `width` points.
pub fn local_slopes(points: &[(f64, f64)], width: usize) -> Vec<f64> {
    if width < 2 || points.len() < width {
        return Vec::new();
    }
    points
        .windows(width)
        .map(|w| {
            if width == 2 {
                (w[1].1.ln() - w[0].1.ln()) / (w[1].0.ln() - w[0].0.ln())
            } else {
                fit_rate(w).map_or(f64::NAN, |f| f.slope)
            }
        })
        .collect()
}

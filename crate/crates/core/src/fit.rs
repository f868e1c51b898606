//! Ordinary least-squares fits of log y against log x.

use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};

/// Power-law fit y ≈ C·x^slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
}

impl ExponentFit {
    /// Fits ln y = intercept + slope·ln x. Needs at least two points with
    /// distinct, positive abscissae and positive ordinates.
    pub fn fit(x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() != y.len() {
            return config_err("fit", format!("{} abscissae but {} ordinates", x.len(), y.len()));
        }
        if x.len() < 2 {
            return config_err("fit", "need at least two points");
        }
        if let Some(v) = x.iter().chain(y).find(|v| !(**v > 0.0) || !v.is_finite()) {
            return config_err("fit", format!("log-log fit needs positive finite data, got {v}"));
        }
        let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
        let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
        let m = lx.len() as f64;
        let mx = lx.iter().sum::<f64>() / m;
        let my = ly.iter().sum::<f64>() / m;
        let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
        if sxx == 0.0 {
            return config_err("fit", "abscissae are all equal");
        }
        let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
        let syy: f64 = ly.iter().map(|b| (b - my).powi(2)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let sse: f64 = lx
            .iter()
            .zip(&ly)
            .map(|(a, b)| (b - intercept - slope * a).powi(2))
            .sum();
        let slope_stderr = if lx.len() > 2 {
            (sse / (m - 2.0) / sxx).sqrt()
        } else {
            0.0
        };
        let r_squared = if syy > 0.0 {
            (1.0 - sse / syy).clamp(-1.0, 1.0)
        } else {
            1.0
        };
        Ok(ExponentFit {
            x: x.to_vec(),
            y: y.to_vec(),
            slope,
            intercept,
            slope_stderr,
            r_squared,
        })
    }

    pub fn predict(&self, x: f64) -> f64 {
        (self.intercept + self.slope * x.ln()).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-0.5)).collect();
        let f = ExponentFit::fit(&x, &y).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-14);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-14);
        assert!(f.slope_stderr < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
        assert!((f.predict(16.0) - 0.75).abs() < 1e-13);
    }

    #[test]
    fn noisy_fit_has_stderr() {
        let x = [1.0, 2.0, 4.0, 8.0, 16.0];
        let y = [1.0, 2.2, 3.7, 8.5, 15.0];
        let f = ExponentFit::fit(&x, &y).unwrap();
        assert!(f.slope_stderr > 0.0 && f.r_squared < 1.0 && f.r_squared > 0.9);
        assert_eq!(f, ExponentFit::fit(&x, &y).unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ExponentFit::fit(&[1.0], &[1.0]).is_err());
        assert!(ExponentFit::fit(&[1.0, 2.0], &[1.0, 0.0]).is_err());
        assert!(ExponentFit::fit(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(ExponentFit::fit(&[1.0, 2.0], &[1.0]).is_err());
    }
}

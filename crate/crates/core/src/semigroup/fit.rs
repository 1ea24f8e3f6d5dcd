//! Least-squares fits `log y = c − α log t (+ β log log t)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{DecayCurve, SemigroupError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub alpha: f64,
    pub beta: f64,
    /// RMS of the log-model error, bracket half-widths folded in.
    pub residual: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

pub fn fit_rate(curve: &DecayCurve, window: (f64, f64), with_log: bool) -> Result<RateFit, SemigroupError> {
    let pts: Vec<(f64, f64, f64)> = curve
        .samples
        .iter()
        .filter(|s| s.t >= window.0 && s.t <= window.1)
        .filter(|s| s.lower > 0.0 && s.upper > 0.0 && (!with_log || s.t > 1.0))
        .map(|s| (s.t, s.mid().ln(), 0.5 * (s.upper / s.lower).ln()))
        .collect();
    if pts.len() < 8 {
        return Err(SemigroupError::DegenerateWindow(pts.len()));
    }
    let cols = if with_log { 3 } else { 2 };
    let a = DMatrix::from_fn(pts.len(), cols, |i, j| match j {
        0 => 1.0,
        1 => pts[i].0.ln(),
        _ => pts[i].0.ln().ln(),
    });
    let y = DVector::from_iterator(pts.len(), pts.iter().map(|p| p.1));
    let coef = a
        .clone()
        .svd(true, true)
        .solve(&y, 1e-14)
        .map_err(|_| SemigroupError::DegenerateWindow(pts.len()))?;
    let resid = &a * &coef - &y;
    let ms = resid
        .iter()
        .zip(&pts)
        .map(|(e, p)| e * e + p.2 * p.2)
        .sum::<f64>()
        / pts.len() as f64;
    Ok(RateFit {
        alpha: -coef[1],
        beta: if with_log { coef[2] } else { 0.0 },
        residual: ms.sqrt(),
        window,
        samples: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::log_grid;
    use crate::semigroup::{Kind, PNorm, Quantity, Sample};

    fn synthetic(f: impl Fn(f64) -> f64) -> DecayCurve {
        DecayCurve {
            label: "synthetic".into(),
            kind: Kind::Laurent,
            n_list: vec![],
            p: PNorm::Two,
            quantity: Quantity::Derivative,
            samples: log_grid(1.0, 1e4, 40)
                .into_iter()
                .map(|t| Sample { t, lower: f(t), upper: f(t) })
                .collect(),
            exact: true,
            dense_error: None,
        }
    }

    #[test]
    fn pure_power() {
        let fit = fit_rate(&synthetic(|t| t.powf(-0.5)), (1e2, 1e4), false).unwrap();
        assert!((fit.alpha - 0.5).abs() < 1e-12 && fit.residual <= 1e-12);
    }

    #[test]
    fn log_factor_recovered() {
        let fit = fit_rate(&synthetic(|t| t.powf(-0.5) * t.ln()), (1e2, 1e4), true).unwrap();
        assert!((fit.beta - 1.0).abs() <= 0.05, "{fit:?}");
        assert!((fit.alpha - 0.5).abs() <= 1e-6);
    }

    #[test]
    fn narrow_window_rejected() {
        let err = fit_rate(&synthetic(|t| 1.0 / t), (10.0, 12.0), false).unwrap_err();
        assert!(matches!(err, SemigroupError::DegenerateWindow(_)));
    }
}

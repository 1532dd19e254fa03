//! Power-law fitting of QFI-versus-asymmetry scans: I(ε) = α + β·εⁿ.
//!
//! α is pinned to the ε = 0 value (the purely thermal QFI), so only
//! (β, n) — or β alone at fixed n — are fitted, by least squares on
//! ln(I − α) against ln ε over the ε > 0 points.

use crate::{Error, Result};

/// How the exponent is treated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitMode {
    FreeExponent,
    FixedExponent(f64),
}

/// Fitted power-law coefficients.
#[derive(Debug, Clone)]
pub struct FitResult {
    /// Pinned to the ε = 0 input exactly.
    pub alpha: f64,
    pub beta: f64,
    pub exponent: f64,
    /// Root-mean-square residual over all input points, original scale.
    pub rms_residual: f64,
    pub grid_used: String,
    /// Points dropped because I(ε) ≤ α makes the logarithm undefined.
    pub excluded: usize,
}

/// Fits I(ε) = α + β εⁿ to (ε, I) samples that include ε = 0.
pub fn fit_power_law(points: &[(f64, f64)], mode: FitMode) -> Result<FitResult> {
    if points.len() < 4 {
        return Err(Error::Fit(format!(
            "need at least 4 points including eps = 0, got {}",
            points.len()
        )));
    }
    if points.iter().any(|(e, i)| !e.is_finite() || !i.is_finite()) {
        return Err(Error::Fit("points must be finite".into()));
    }
    if points.iter().any(|(e, _)| *e < 0.0) {
        return Err(Error::Fit("asymmetry values must be nonnegative".into()));
    }
    let alpha = points
        .iter()
        .find(|(e, _)| *e == 0.0)
        .map(|(_, i)| *i)
        .ok_or_else(|| Error::Fit("no eps = 0 point to pin alpha".into()))?;

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut excluded = 0usize;
    for &(e, i) in points {
        if e <= 0.0 {
            continue;
        }
        if i - alpha <= 0.0 {
            excluded += 1;
            continue;
        }
        xs.push(e.ln());
        ys.push((i - alpha).ln());
    }
    if xs.is_empty() {
        return Err(Error::Fit(
            "every eps > 0 point fell below alpha; nothing to fit".into(),
        ));
    }

    let m = xs.len() as f64;
    let (exponent, ln_beta) = match mode {
        FitMode::FreeExponent => {
            if xs.len() < 2 {
                return Err(Error::Fit("free-exponent fit needs at least 2 usable points".into()));
            }
            let sx: f64 = xs.iter().sum();
            let sy: f64 = ys.iter().sum();
            let sxx: f64 = xs.iter().map(|x| x * x).sum();
            let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
            let denom = m * sxx - sx * sx;
            if denom.abs() < 1e-30 {
                return Err(Error::Fit("degenerate abscissas in log-log fit".into()));
            }
            let n = (m * sxy - sx * sy) / denom;
            (n, (sy - n * sx) / m)
        }
        FitMode::FixedExponent(n) => {
            if !n.is_finite() {
                return Err(Error::Fit(format!("fixed exponent must be finite, got {n}")));
            }
            let lnb = xs
                .iter()
                .zip(&ys)
                .map(|(x, y)| y - n * x)
                .sum::<f64>()
                / m;
            (n, lnb)
        }
    };
    let beta = ln_beta.exp();

    let rms_residual = (points
        .iter()
        .map(|&(e, i)| {
            let model = alpha + beta * e.powf(exponent);
            (model - i) * (model - i)
        })
        .sum::<f64>()
        / points.len() as f64)
        .sqrt();

    let (lo, hi) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (e, _)| {
        (lo.min(*e), hi.max(*e))
    });
    Ok(FitResult {
        alpha,
        beta,
        exponent,
        rms_residual,
        grid_used: format!("eps in [{}, {}], {} points", lo, hi, points.len()),
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_cubic_recovery() {
        let pts: Vec<(f64, f64)> = (0..10)
            .map(|i| {
                let e = 0.1 * i as f64;
                (e, 0.3 + 1.7 * e * e * e)
            })
            .collect();
        let fit = fit_power_law(&pts, FitMode::FreeExponent).unwrap();
        assert_eq!(fit.alpha, 0.3);
        assert_relative_eq!(fit.beta, 1.7, epsilon = 1e-9);
        assert_relative_eq!(fit.exponent, 3.0, epsilon = 1e-9);
        assert!(fit.rms_residual < 1e-9);
        assert_eq!(fit.excluded, 0);

        let fixed = fit_power_law(&pts, FitMode::FixedExponent(3.0)).unwrap();
        assert_relative_eq!(fixed.beta, 1.7, epsilon = 1e-9);
        assert!(fixed.rms_residual < 1e-12);
    }

    #[test]
    fn flat_points_are_excluded_with_warning_count() {
        let mut pts: Vec<(f64, f64)> = (0..6)
            .map(|i| {
                let e = 0.15 * i as f64;
                (e, 1.0 + 2.0 * e * e)
            })
            .collect();
        pts.push((0.9, 0.5)); // below alpha: log undefined
        let fit = fit_power_law(&pts, FitMode::FreeExponent).unwrap();
        assert_eq!(fit.excluded, 1);

        // all excluded -> fit error
        let flat: Vec<(f64, f64)> = (0..5).map(|i| (0.2 * i as f64, 1.0)).collect();
        assert!(matches!(
            fit_power_law(&flat, FitMode::FreeExponent),
            Err(Error::Fit(_))
        ));
    }

    #[test]
    fn input_contract() {
        assert!(fit_power_law(&[(0.0, 1.0), (0.1, 1.1)], FitMode::FreeExponent).is_err());
        let no_zero: Vec<(f64, f64)> = (1..6).map(|i| (0.1 * i as f64, 1.0)).collect();
        assert!(matches!(
            fit_power_law(&no_zero, FitMode::FreeExponent),
            Err(Error::Fit(_))
        ));
        let negative = [(0.0, 1.0), (-0.1, 1.0), (0.2, 1.1), (0.3, 1.2)];
        assert!(fit_power_law(&negative, FitMode::FreeExponent).is_err());
    }
}

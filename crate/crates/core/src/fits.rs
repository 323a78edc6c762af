//! Least-squares fits used by the diagnostics.

use crate::error::{LabError, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope (zero for a two-point fit).
    pub slope_stderr: f64,
    pub r2: f64,
    pub n: usize,
}

/// Ordinary least squares y = intercept + slope x.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() {
        return Err(LabError::InvalidInput(
            "fit needs matched abscissae and ordinates".into(),
        ));
    }
    let n = x.len();
    if n < 2 {
        return Err(LabError::FitRejected(format!(
            "line fit needs at least 2 points, got {n}"
        )));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(LabError::FitRejected("non-finite data in fit".into()));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|&v| (v - mx) * (v - mx)).sum();
    if sxx <= 0.0 {
        return Err(LabError::FitRejected(
            "degenerate abscissae (no spread)".into(),
        ));
    }
    let sxy: f64 = x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|&v| (v - my) * (v - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr = (syy - slope * sxy).max(0.0);
    let slope_stderr = if n > 2 {
        (ssr / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    let r2 = if syy > 0.0 { 1.0 - ssr / syy } else { 1.0 };
    Ok(LineFit {
        slope,
        intercept,
        slope_stderr,
        r2,
        n,
    })
}

/// Fit v = C t^p on log-log axes; the slope is the power p.
/// Non-positive pairs are discarded; at least 3 must survive.
pub fn fit_power_law(t: &[f64], v: &[f64]) -> Result<LineFit> {
    let pairs: Vec<(f64, f64)> = t
        .iter()
        .zip(v)
        .filter(|(&a, &b)| a > 0.0 && b > 0.0)
        .map(|(&a, &b)| (a.ln(), b.ln()))
        .collect();
    if pairs.len() < 3 {
        return Err(LabError::FitRejected(format!(
            "power-law fit kept only {} positive points",
            pairs.len()
        )));
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    fit_line(&xs, &ys)
}

/// Fit v = C e^(r t); the slope is the rate r.  Non-positive values are
/// discarded; at least 3 points must survive.
pub fn fit_exponential_rate(t: &[f64], v: &[f64]) -> Result<LineFit> {
    let pairs: Vec<(f64, f64)> = t
        .iter()
        .zip(v)
        .filter(|(_, &b)| b > 0.0)
        .map(|(&a, &b)| (a, b.ln()))
        .collect();
    if pairs.len() < 3 {
        return Err(LabError::FitRejected(format!(
            "exponential fit kept only {} positive points",
            pairs.len()
        )));
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    fit_line(&xs, &ys)
}

/// Percentile bootstrap interval (2.5%, 97.5%) for the slope, resampling
/// pairs with replacement.  Deterministic for a given seed.
pub fn bootstrap_slope(
    x: &[f64],
    y: &[f64],
    resamples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 4 {
        return Err(LabError::FitRejected(
            "bootstrap needs at least 4 matched points".into(),
        ));
    }
    if resamples < 10 {
        return Err(LabError::InvalidInput(
            "bootstrap needs at least 10 resamples".into(),
        ));
    }
    let n = x.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut slopes = Vec::with_capacity(resamples);
    let mut xa = vec![0.0; n];
    let mut ya = vec![0.0; n];
    while slopes.len() < resamples {
        for i in 0..n {
            let j = rng.random_range(0..n);
            xa[i] = x[j];
            ya[i] = y[j];
        }
        // a resample can collapse onto one abscissa; draw again
        if let Ok(fit) = fit_line(&xa, &ya) {
            slopes.push(fit.slope);
        }
    }
    slopes.sort_by(f64::total_cmp);
    let lo = slopes[((resamples as f64) * 0.025).floor() as usize];
    let hi = slopes[(((resamples as f64) * 0.975).ceil() as usize).min(resamples - 1)];
    Ok((lo, hi))
}

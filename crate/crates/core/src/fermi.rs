//! Resonant transfer rate into the continuum.
//!
//! The beat energy 2 e1 - e0 of a two-level well sits inside the
//! continuous spectrum, so the product mode phi0 phi1^2 couples the
//! discrete beat to outgoing waves.  The rate is the spectral density of
//! that coupling at the beat energy.  On a finite box the density is
//! smoothed at scale sigma and extrapolated sigma -> 0, with two
//! independent estimators that must agree:
//!
//! * the resolvent matrix element Im <f, (H - E - i sigma)^(-1) f>,
//! * a Gaussian-smoothed sum over box eigenmodes near E.
//!
//! Both converge to the same limit like sigma^2 once sigma resolves the
//! level spacing; a disagreement beyond tolerance means the box or grid
//! cannot support the estimate and is reported as such.

use crate::error::{LabError, Result};
use crate::fits::fit_line;
use crate::ham::Hamiltonian;
use crate::tridiag::SymTridiag;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy)]
pub struct ProbeConfig {
    /// Smoothing ladder in units of the local level spacing.
    pub ladder_lo: f64,
    pub ladder_hi: f64,
    pub ladder_points: usize,
    /// How many of the smallest sigmas enter the sigma^2 extrapolation.
    pub extrapolation_points: usize,
    /// Maximum relative disagreement between the two estimators.
    pub disagreement_limit: f64,
    /// Half-width of the detuning scan, as a fraction of the beat energy.
    pub window_span: f64,
    pub window_points: usize,
    /// Ladder size for each detuned estimate.
    pub window_ladder_points: usize,
    /// The scan passes if min gamma(s) >= window_floor * gamma(0).
    pub window_floor: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            ladder_lo: 2.0,
            ladder_hi: 20.0,
            ladder_points: 8,
            extrapolation_points: 5,
            disagreement_limit: 0.05,
            window_span: 0.2,
            window_points: 9,
            window_ladder_points: 5,
            window_floor: 0.75,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ResonanceProbe {
    /// Extrapolated rate, clamped at zero.
    pub gamma: f64,
    pub resolvent_estimate: f64,
    pub density_estimate: f64,
    /// |resolvent - density| / resolvent.
    pub disagreement: f64,
    pub beat_energy: f64,
    /// Local level spacing of the box at the beat energy.
    pub level_spacing: f64,
    pub sigma_ladder: Vec<f64>,
    /// Resolvent estimate at each ladder sigma (diagnostic).
    pub resolvent_curve: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct WindowScan {
    /// Detunings away from the beat energy.
    pub shifts: Vec<f64>,
    pub gammas: Vec<f64>,
    /// min gamma(s) / gamma(0).
    pub min_ratio: f64,
    pub ok: bool,
}

/// Coupling vector phi0 phi1^2 (in reduced form), orthogonalized against
/// both discrete modes.
pub fn coupling_vector(ham: &Hamiltonian) -> Result<Vec<f64>> {
    let modes = ham.bound_modes()?;
    let inv = ham.grid().inverse_scale_sq();
    let mut f: Vec<f64> = (0..inv.len())
        .map(|i| modes.phi0[i] * modes.phi1[i] * modes.phi1[i] * inv[i])
        .collect();
    for mode in [&modes.phi0, &modes.phi1] {
        let c: f64 = mode.iter().zip(&f).map(|(a, b)| a * b).sum();
        for (fi, &mi) in f.iter_mut().zip(mode.iter()) {
            *fi -= c * mi;
        }
    }
    Ok(f)
}

fn geometric_ladder(lo: f64, hi: f64, n: usize, unit: f64) -> Vec<f64> {
    if n == 1 {
        return vec![lo * unit];
    }
    let ratio = (hi / lo).powf(1.0 / (n - 1) as f64);
    (0..n).map(|j| lo * ratio.powi(j as i32) * unit).collect()
}

/// Smoothed resolvent estimate at energy `e` and width `sigma`.
fn resolvent_density(op: &SymTridiag, f: &[f64], e: f64, sigma: f64) -> Result<f64> {
    let fac = op.factor(Complex64::new(e, sigma))?;
    let rhs: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let z = fac.solve(&rhs);
    let dot: Complex64 = f
        .iter()
        .zip(&z)
        .map(|(&a, b)| a * b)
        .sum();
    Ok(dot.im)
}

/// Extrapolate a smoothed-density ladder to sigma = 0, linearly in
/// sigma^2 over the k smallest sigmas.
fn extrapolate(sigmas: &[f64], values: &[f64], k: usize) -> Result<f64> {
    let k = k.min(sigmas.len());
    let x: Vec<f64> = sigmas[..k].iter().map(|&s| s * s).collect();
    Ok(fit_line(&x, &values[..k])?.intercept)
}

/// Rate estimate at the beat energy with both estimators.
pub fn resonance_probe(ham: &Hamiltonian, cfg: &ProbeConfig) -> Result<ResonanceProbe> {
    if cfg.ladder_points < 2 || cfg.extrapolation_points < 2 {
        return Err(LabError::InvalidInput(
            "smoothing ladder needs at least two points".into(),
        ));
    }
    let modes = ham.bound_modes()?;
    let beat = 2.0 * modes.e1 - modes.e0;
    if beat <= 0.0 {
        return Err(LabError::InvalidInput(format!(
            "beat energy {beat} is not in the continuum"
        )));
    }
    let f = coupling_vector(ham)?;
    let op = ham.operator();
    let spacing = std::f64::consts::TAU * beat.sqrt() / ham.grid().r_max();
    let ladder = geometric_ladder(cfg.ladder_lo, cfg.ladder_hi, cfg.ladder_points, spacing);

    let mut curve = Vec::with_capacity(ladder.len());
    for &sigma in &ladder {
        curve.push(resolvent_density(op, &f, beat, sigma)?);
    }
    let resolvent_estimate = extrapolate(&ladder, &curve, cfg.extrapolation_points)?;

    // Gaussian-smoothed eigenmode sum over a window wide enough for the
    // largest sigma
    let sigma_max = *ladder.last().unwrap();
    let pairs = op.eigenpairs_in(beat - 8.0 * sigma_max, beat + 8.0 * sigma_max)?;
    let overlaps: Vec<(f64, f64)> = pairs
        .iter()
        .map(|(e, chi)| {
            let c: f64 = chi.iter().zip(&f).map(|(a, b)| a * b).sum();
            (e - beat, c * c)
        })
        .collect();
    let mut density_curve = Vec::with_capacity(ladder.len());
    for &sigma in &ladder {
        let norm = 1.0 / (sigma * std::f64::consts::TAU.sqrt());
        let sum: f64 = overlaps
            .iter()
            .map(|&(de, w2)| w2 * (-0.5 * de * de / (sigma * sigma)).exp())
            .sum();
        density_curve.push(std::f64::consts::PI * norm * sum);
    }
    let density_estimate = extrapolate(&ladder, &density_curve, cfg.extrapolation_points)?;

    let disagreement = (resolvent_estimate - density_estimate).abs()
        / resolvent_estimate.abs().max(1e-300);
    if disagreement > cfg.disagreement_limit {
        return Err(LabError::ResolutionInsufficient {
            disagreement,
            limit: cfg.disagreement_limit,
        });
    }
    Ok(ResonanceProbe {
        gamma: resolvent_estimate.max(0.0),
        resolvent_estimate,
        density_estimate,
        disagreement,
        beat_energy: beat,
        level_spacing: spacing,
        sigma_ladder: ladder,
        resolvent_curve: curve,
    })
}

/// Rate as a function of detuning s: the estimate is repeated at energies
/// beat - s across the window and compared against the on-beat value.
pub fn window_scan(ham: &Hamiltonian, cfg: &ProbeConfig) -> Result<WindowScan> {
    let modes = ham.bound_modes()?;
    let beat = 2.0 * modes.e1 - modes.e0;
    let f = coupling_vector(ham)?;
    let op = ham.operator();
    let spacing = std::f64::consts::TAU * beat.sqrt() / ham.grid().r_max();
    let ladder = geometric_ladder(
        cfg.ladder_lo,
        cfg.ladder_hi,
        cfg.window_ladder_points,
        spacing,
    );

    let span = cfg.window_span * beat;
    let m = cfg.window_points.max(3);
    let shifts: Vec<f64> = (0..m)
        .map(|j| -span + 2.0 * span * j as f64 / (m - 1) as f64)
        .collect();
    let mut gammas = Vec::with_capacity(m);
    for &s in &shifts {
        let mut curve = Vec::with_capacity(ladder.len());
        for &sigma in &ladder {
            curve.push(resolvent_density(op, &f, beat - s, sigma)?);
        }
        gammas.push(extrapolate(&ladder, &curve, ladder.len())?);
    }
    let center = gammas[m / 2];
    if center <= 0.0 {
        return Err(LabError::ResolutionInsufficient {
            disagreement: f64::INFINITY,
            limit: cfg.window_floor,
        });
    }
    let min_ratio = gammas
        .iter()
        .map(|&g| g / center)
        .fold(f64::INFINITY, f64::min);
    Ok(WindowScan {
        shifts,
        gammas,
        min_ratio,
        ok: min_ratio >= cfg.window_floor,
    })
}

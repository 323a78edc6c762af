//! Sorting a run into its asymptotic regime.
//!
//! The decision walks a ladder of crossing times against the dispersive
//! envelope alpha <t>^(-3/2):
//!
//! * t1: when the amplitude, raised to the supercritical power 2 + delta,
//!   first overtakes the envelope.  Never -> everything is dispersing.
//! * t2: when the ground amplitude, weighted by the crossing size, does
//!   the same.  Never -> the excited amplitude either locks or the run is
//!   too short.
//! * t3: when the ground amplitude reaches a set fraction of the crossing
//!   size; t4: how long the excited amplitude stays compliant afterwards.
//!
//! Between t2 and t3 the ground amplitude should grow at the resonant
//! rate; the fitted rate over that window, relative to gamma n^4, is the
//! quantitative check.

use crate::error::{LabError, Result};
use crate::fits::{fit_exponential_rate, fit_power_law, LineFit};
use crate::propagate::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// Everything decays inside the envelope.
    Dispersion,
    /// The ground amplitude dominates from the first crossing.
    GroundDirect,
    /// The excited amplitude holds a plateau, feeds the ground amplitude,
    /// and collapses.
    GroundViaCollapse,
    /// The excited amplitude stabilizes while the ground stays small.
    ExcitedPersistent,
    /// The run does not show a complete signature.
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Crossing {
    /// Already past the threshold at the first sample.
    Immediate,
    /// Crossed at this time.
    At(f64),
    /// Not within the run.
    Beyond,
}

impl Crossing {
    pub fn time(&self) -> Option<f64> {
        match self {
            Crossing::Immediate => Some(0.0),
            Crossing::At(t) => Some(*t),
            Crossing::Beyond => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ClassifierParams {
    /// Supercritical margin in the first crossing.
    pub delta: f64,
    /// Weight exponent in the second crossing.
    pub iota: f64,
    /// Compliance floor for the excited amplitude, as a fraction of the
    /// crossing size.
    pub epsilon: f64,
    /// Ground amplitude fraction that ends the growth window.
    pub x_fraction: f64,
    /// Envelope amplitude; measured from the data when absent.
    pub alpha: Option<f64>,
    /// Resonant transfer rate used to normalize the fitted growth.
    pub gamma: f64,
    /// Minimum points for the growth fit.
    pub min_fit_points: usize,
    /// A decay fit at least this steep counts as dispersion.
    pub decay_slope_max: f64,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        Self {
            delta: 0.75,
            iota: 0.1,
            epsilon: 0.025,
            x_fraction: 0.001,
            alpha: None,
            gamma: 0.0,
            min_fit_points: 6,
            decay_slope_max: -0.4,
        }
    }
}

/// Amplitude history of a run: times, the two discrete moduli, and a
/// local size for the remainder.
#[derive(Debug, Clone)]
pub struct AmplitudeSeries {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub local: Vec<f64>,
}

impl AmplitudeSeries {
    pub fn from_trajectory(traj: &Trajectory) -> Self {
        Self {
            t: traj.times(),
            x: traj.x_abs(),
            y: traj.y_abs(),
            local: traj.samples.iter().map(|s| s.xi_local).collect(),
        }
    }

    fn len(&self) -> usize {
        self.t.len()
    }
}

#[derive(Debug, Clone)]
pub struct ClassificationReport {
    pub outcome: Outcome,
    /// Envelope amplitude used.
    pub alpha: f64,
    /// Crossing size n = max(|x|, |y|) at t1.
    pub crossing_size: Option<f64>,
    pub t1: Crossing,
    pub t2: Crossing,
    pub t3: Option<f64>,
    pub t4: Option<f64>,
    /// Power-law fit of the local size (dispersion path).
    pub decay_fit: Option<LineFit>,
    /// Exponential fit of the ground amplitude on [t2, t3].
    pub growth_fit: Option<LineFit>,
    /// Fitted rate over gamma n^4.
    pub growth_ratio: Option<f64>,
    /// (t4 - t3) gamma epsilon^2 n^4: how much transfer the compliant
    /// stretch could have completed.
    pub transfer_budget: Option<f64>,
    pub plateau_min: Option<f64>,
    pub plateau_median: Option<f64>,
    pub tail_mean: Option<f64>,
}

fn envelope(alpha: f64, t: f64) -> f64 {
    alpha * (1.0 + t * t).powf(-0.75)
}

fn median(sorted_src: &[f64]) -> f64 {
    let mut v = sorted_src.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Classify a trajectory; convenience wrapper that defaults the envelope
/// amplitude to the measured size of the data.
pub fn classify_trajectory(
    traj: &Trajectory,
    params: &ClassifierParams,
) -> Result<ClassificationReport> {
    let series = AmplitudeSeries::from_trajectory(traj);
    let mut p = *params;
    if p.alpha.is_none() {
        p.alpha = Some(traj.meta.alpha);
    }
    classify(&series, &p)
}

pub fn classify(series: &AmplitudeSeries, params: &ClassifierParams) -> Result<ClassificationReport> {
    let n_samples = series.len();
    if n_samples < 4
        || series.x.len() != n_samples
        || series.y.len() != n_samples
        || series.local.len() != n_samples
    {
        return Err(LabError::InvalidInput(
            "classification needs at least 4 aligned samples".into(),
        ));
    }
    if !(params.gamma.is_finite() && params.gamma >= 0.0) {
        return Err(LabError::InvalidInput(
            "classifier needs a non-negative transfer rate".into(),
        ));
    }
    let alpha = match params.alpha {
        Some(a) if a.is_finite() && a > 0.0 => a,
        _ => {
            return Err(LabError::InvalidInput(
                "classifier needs a positive envelope amplitude".into(),
            ))
        }
    };

    let mut report = ClassificationReport {
        outcome: Outcome::Inconclusive,
        alpha,
        crossing_size: None,
        t1: Crossing::Beyond,
        t2: Crossing::Beyond,
        t3: None,
        t4: None,
        decay_fit: None,
        growth_fit: None,
        growth_ratio: None,
        transfer_budget: None,
        plateau_min: None,
        plateau_median: None,
        tail_mean: None,
    };

    // first crossing: amplitude^(2+delta) against the envelope
    let power1 = 2.0 + params.delta;
    let first_cross = (0..n_samples).find(|&j| {
        series.x[j].max(series.y[j]).powf(power1) > envelope(alpha, series.t[j])
    });
    let j1 = match first_cross {
        None => {
            report.t1 = Crossing::Beyond;
            // dispersion candidate: power-law decay of the total local size
            let t_end = series.t[n_samples - 1];
            let (lo, hi) = (t_end / 12.0, 2.0 * t_end / 3.0);
            let mut ts = Vec::new();
            let mut vs = Vec::new();
            for j in 0..n_samples {
                if series.t[j] >= lo && series.t[j] <= hi {
                    ts.push(series.t[j]);
                    vs.push(series.x[j] + series.y[j] + series.local[j]);
                }
            }
            match fit_power_law(&ts, &vs) {
                Ok(fit) => {
                    let steep = fit.slope <= params.decay_slope_max;
                    report.outcome = if steep {
                        Outcome::Dispersion
                    } else {
                        Outcome::Inconclusive
                    };
                    report.decay_fit = Some(fit);
                }
                Err(_) => report.outcome = Outcome::Inconclusive,
            }
            return Ok(report);
        }
        Some(0) => {
            report.t1 = Crossing::Immediate;
            0
        }
        Some(j) => {
            report.t1 = Crossing::At(series.t[j - 1]);
            j - 1
        }
    };

    let size = series.x[j1].max(series.y[j1]);
    report.crossing_size = Some(size);

    // immediate ground dominance: the ground amplitude alone explains the
    // crossing
    if series.x[j1] >= series.y[j1].powf(power1) {
        report.outcome = Outcome::GroundDirect;
        return Ok(report);
    }

    // second crossing: weighted ground amplitude against the envelope
    let weight = size.powf(2.0 + params.iota);
    let second_cross =
        (j1..n_samples).find(|&j| weight * series.x[j] > envelope(alpha, series.t[j]));
    let j2 = match second_cross {
        None => {
            report.t2 = Crossing::Beyond;
            // excited lock: the last third must be flat and sizable
            let start = n_samples - (n_samples / 3).max(2);
            let tail = &series.y[start..];
            let mean = tail.iter().sum::<f64>() / tail.len() as f64;
            let var = tail.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>()
                / tail.len() as f64;
            let relstd = if mean > 0.0 {
                var.sqrt() / mean
            } else {
                f64::INFINITY
            };
            report.tail_mean = Some(mean);
            report.outcome = if relstd <= 0.10 && mean >= 0.5 * size {
                Outcome::ExcitedPersistent
            } else {
                Outcome::Inconclusive
            };
            return Ok(report);
        }
        Some(j) if j == j1 => {
            report.t2 = if j1 == 0 {
                Crossing::Immediate
            } else {
                Crossing::At(series.t[j1])
            };
            j1
        }
        Some(j) => {
            report.t2 = Crossing::At(series.t[j - 1]);
            j - 1
        }
    };

    // growth end: ground amplitude reaches its fraction of the crossing size
    let j3 = (j2..n_samples).find(|&j| series.x[j] >= params.x_fraction * size);
    let Some(j3) = j3 else {
        // growth never completed within the run
        return Ok(report);
    };
    report.t3 = Some(series.t[j3]);

    // compliant stretch of the excited amplitude after t3
    let floor = params.epsilon * size;
    let mut j4: Option<usize> = None;
    for j in j3..n_samples {
        if series.y[j] >= floor {
            j4 = Some(j);
        } else {
            break;
        }
    }
    report.t4 = j4.map(|j| series.t[j]);
    if let Some(j4) = j4 {
        report.transfer_budget = Some(
            (series.t[j4] - series.t[j3])
                * params.gamma
                * params.epsilon
                * params.epsilon
                * size.powi(4),
        );
    }

    // growth fit between the crossings
    let x2 = series.x[j2];
    let mut ts: Vec<f64> = Vec::new();
    let mut vs: Vec<f64> = Vec::new();
    for j in j2..=j3 {
        if series.x[j] >= 2.0 * x2 && series.x[j] < params.x_fraction * size {
            ts.push(series.t[j]);
            vs.push(series.x[j]);
        }
    }
    if ts.len() < params.min_fit_points {
        ts = series.t[j2..=j3].to_vec();
        vs = series.x[j2..=j3].to_vec();
    }
    if ts.len() >= params.min_fit_points {
        if let Ok(fit) = fit_exponential_rate(&ts, &vs) {
            let denom = params.gamma * size.powi(4);
            if denom > 0.0 {
                report.growth_ratio = Some(fit.slope / denom);
            }
            report.growth_fit = Some(fit);
        }
    }

    // plateau-collapse signature
    let plateau = &series.y[j1..=j3];
    let p_min = plateau.iter().cloned().fold(f64::INFINITY, f64::min);
    let p_median = median(plateau);
    report.plateau_min = Some(p_min);
    report.plateau_median = Some(p_median);
    let tail_start = n_samples - (n_samples / 5).max(1);
    let tail = &series.y[tail_start..];
    let tail_mean = tail.iter().sum::<f64>() / tail.len() as f64;
    report.tail_mean = Some(tail_mean);

    let plateau_held = p_min >= 0.6 * size;
    let collapsed = j4.is_some() || tail_mean <= 0.85 * p_median;
    report.outcome = if plateau_held && collapsed {
        Outcome::GroundViaCollapse
    } else {
        Outcome::Inconclusive
    };
    Ok(report)
}

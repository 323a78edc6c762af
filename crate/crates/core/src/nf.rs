//! Reduced moduli system for the two discrete amplitudes.
//!
//! Once the fast angles are averaged out, the resonant energy transfer
//! leaves a closed pair of equations for the moduli mu = |ground| and
//! nu = |excited|:
//!
//! `d mu/dt = gamma nu^4 mu`, `d nu/dt = -2 gamma mu^2 nu^3`.
//!
//! The combination mu^2 + nu^2/2 is conserved exactly, which pins the
//! limit of mu; with mu frozen the decay of nu integrates in closed form
//! and provides the relaxation envelope.

use crate::error::{LabError, Result};
use crate::ode::{integrate_at, OdeOptions};

/// Conserved combination mu^2 + nu^2/2.
pub fn invariant(mu: f64, nu: f64) -> f64 {
    mu * mu + 0.5 * nu * nu
}

/// Limit of mu as t -> infinity, from the conserved combination.
pub fn limit_mu(mu0: f64, nu0: f64) -> f64 {
    invariant(mu0, nu0).sqrt()
}

/// Closed-form decay of nu when mu is held fixed:
/// nu(t) = (nu0^-2 + 4 gamma mu^2 t)^(-1/2).
pub fn frozen_mu_envelope(gamma: f64, mu: f64, nu0: f64, t: f64) -> f64 {
    if nu0 == 0.0 {
        return 0.0;
    }
    (nu0.powi(-2) + 4.0 * gamma * mu * mu * t).powf(-0.5)
}

/// Integrate the moduli system at the requested times.
pub fn moduli_flow(
    gamma: f64,
    mu0: f64,
    nu0: f64,
    times: &[f64],
) -> Result<Vec<[f64; 2]>> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(LabError::InvalidInput(format!(
            "transfer rate must be finite and non-negative, got {gamma}"
        )));
    }
    if !(mu0.is_finite() && mu0 >= 0.0 && nu0.is_finite() && nu0 >= 0.0) {
        return Err(LabError::InvalidInput(
            "moduli must be finite and non-negative".into(),
        ));
    }
    let opts = OdeOptions {
        clip_nonnegative: true,
        ..OdeOptions::default()
    };
    let states = integrate_at(
        |_t, y, dy| {
            let (mu, nu) = (y[0], y[1]);
            let nu2 = nu * nu;
            dy[0] = gamma * nu2 * nu2 * mu;
            dy[1] = -2.0 * gamma * mu * mu * nu2 * nu;
        },
        &[mu0, nu0],
        times,
        &opts,
    )?;
    Ok(states.into_iter().map(|s| [s[0], s[1]]).collect())
}

/// Where the relaxation is headed and how fast it gets there.
#[derive(Debug, Clone, Copy)]
pub struct RelaxationForecast {
    pub gamma: f64,
    pub mu_limit: f64,
    /// Time at which the frozen-mu envelope of nu falls to the mu limit;
    /// zero when nu starts at or below it.
    pub crossover: f64,
}

impl RelaxationForecast {
    pub fn new(gamma: f64, mu0: f64, nu0: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(LabError::InvalidInput(format!(
                "relaxation forecast needs a positive transfer rate, got {gamma}"
            )));
        }
        if !(mu0.is_finite() && mu0 >= 0.0 && nu0.is_finite() && nu0 >= 0.0) {
            return Err(LabError::InvalidInput(
                "moduli must be finite and non-negative".into(),
            ));
        }
        let mu_limit = limit_mu(mu0, nu0);
        if mu_limit == 0.0 {
            return Err(LabError::InvalidInput(
                "zero data has nothing to relax".into(),
            ));
        }
        let crossover = if nu0 <= mu_limit {
            0.0
        } else {
            (mu_limit.powi(-2) - nu0.powi(-2)) / (4.0 * gamma * mu_limit * mu_limit)
        };
        Ok(Self {
            gamma,
            mu_limit,
            crossover,
        })
    }

    /// Envelope for nu using the limiting mu in the closed form.
    pub fn envelope(&self, nu0: f64, t: f64) -> f64 {
        frozen_mu_envelope(self.gamma, self.mu_limit, nu0, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn log_times(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        let mut out = vec![0.0];
        let step = (hi / lo).powf(1.0 / (n - 1) as f64);
        let mut t = lo;
        for _ in 0..n {
            out.push(t);
            t *= step;
        }
        out
    }

    #[test]
    fn invariant_is_conserved_along_the_flow() {
        let times = log_times(1e-2, 1e5, 60);
        let flow = moduli_flow(0.008, 0.3, 1.1, &times).unwrap();
        let i0 = invariant(0.3, 1.1);
        for s in &flow {
            assert_relative_eq!(invariant(s[0], s[1]), i0, max_relative = 1e-9);
        }
        // mu grows, nu decays, monotonically
        for w in flow.windows(2) {
            assert!(w[1][0] >= w[0][0]);
            assert!(w[1][1] <= w[0][1]);
        }
    }

    #[test]
    fn mu_reaches_the_conserved_limit() {
        let times = vec![0.0, 1e7];
        let flow = moduli_flow(0.01, 0.2, 1.0, &times).unwrap();
        let end = flow.last().unwrap();
        assert_relative_eq!(end[0], limit_mu(0.2, 1.0), max_relative = 1e-4);
        assert!(end[1] < 1e-2);
    }

    #[test]
    fn frozen_envelope_matches_when_mu_dominates() {
        // mu >> nu: mu barely moves, so the closed form is accurate
        let times = log_times(1e-1, 1e4, 40);
        let flow = moduli_flow(0.02, 2.0, 0.1, &times).unwrap();
        for (i, s) in flow.iter().enumerate().skip(1) {
            let envelope = frozen_mu_envelope(0.02, 2.0, 0.1, times[i]);
            assert_relative_eq!(s[1], envelope, max_relative = 1e-2);
        }
    }

    #[test]
    fn late_time_decay_has_the_half_power() {
        let gamma = 0.01;
        let times = log_times(1e4, 1e6, 20);
        let flow = moduli_flow(gamma, 1.0, 1.0, &times).unwrap();
        let mu_inf = limit_mu(1.0, 1.0);
        // log nu vs log t in the asymptotic decade
        let pts: Vec<(f64, f64)> = times
            .iter()
            .zip(&flow)
            .skip(10)
            .map(|(&t, s)| (t.ln(), s[1].ln()))
            .collect();
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let sy: f64 = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let slope: f64 = pts.iter().map(|p| (p.0 - sx) * (p.1 - sy)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - sx) * (p.0 - sx)).sum::<f64>();
        assert_relative_eq!(slope, -0.5, max_relative = 0.02);
        // and the prefactor matches the limiting-mu closed form
        let last = flow.last().unwrap();
        let predicted = (4.0 * gamma * mu_inf * mu_inf * times.last().unwrap()).powf(-0.5);
        assert_relative_eq!(last[1], predicted, max_relative = 0.02);
    }

    #[test]
    fn scaling_covariance_holds() {
        // (mu, nu, t) -> (s mu, s nu, t / s^4) maps solutions to solutions
        let s = 1.7;
        let t = 37.0;
        let flow = moduli_flow(0.05, 0.4, 0.9, &[0.0, t]).unwrap();
        let scaled = moduli_flow(0.05, s * 0.4, s * 0.9, &[0.0, t / s.powi(4)]).unwrap();
        assert_relative_eq!(scaled[1][0], s * flow[1][0], max_relative = 1e-8);
        assert_relative_eq!(scaled[1][1], s * flow[1][1], max_relative = 1e-8);
    }

    #[test]
    fn forecast_crossover_brackets_the_actual_crossing() {
        let gamma = 0.01;
        let (mu0, nu0) = (0.3, 1.2);
        let fc = RelaxationForecast::new(gamma, mu0, nu0).unwrap();
        assert!(fc.crossover > 0.0);
        // nu actually falls below mu_limit within a factor of a few of the
        // forecast time
        let times = vec![0.0, 0.2 * fc.crossover, fc.crossover, 5.0 * fc.crossover];
        let flow = moduli_flow(gamma, mu0, nu0, &times).unwrap();
        assert!(flow[1][1] > fc.mu_limit, "crossed far too early");
        assert!(flow[3][1] < fc.mu_limit, "crossed far too late");
        // already-relaxed data has no crossover
        let fc2 = RelaxationForecast::new(gamma, 1.0, 0.5).unwrap();
        assert_eq!(fc2.crossover, 0.0);
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(moduli_flow(-1.0, 0.1, 0.1, &[0.0, 1.0]).is_err());
        assert!(moduli_flow(0.01, -0.1, 0.1, &[0.0, 1.0]).is_err());
        assert!(RelaxationForecast::new(0.0, 0.1, 0.1).is_err());
        assert!(RelaxationForecast::new(0.01, 0.0, 0.0).is_err());
    }
}

//! Adaptive Runge-Kutta integration for the small modulation systems.
//!
//! Dormand-Prince 5(4) with step-size control; output times are hit
//! exactly by clipping the step, so no dense interpolant is needed.

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Clamp each accepted state at zero (moduli stay non-negative).
    pub clip_nonnegative: bool,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 20_000_000,
            clip_nonnegative: false,
        }
    }
}

// classic Dormand-Prince coefficients
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate dy/dt = rhs(t, y) and return the state at each requested
/// time.  `times` must be strictly increasing; the first entry is the
/// initial time and maps to a copy of `y0`.
pub fn integrate_at<F>(
    rhs: F,
    y0: &[f64],
    times: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<Vec<f64>>>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    if times.len() < 2 {
        return Err(LabError::InvalidInput(
            "need an initial and at least one output time".into(),
        ));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
        return Err(LabError::InvalidInput(
            "output times must be finite and strictly increasing".into(),
        ));
    }
    let dim = y0.len();
    let mut out = Vec::with_capacity(times.len());
    out.push(y0.to_vec());

    let mut y = y0.to_vec();
    let mut t = times[0];
    let mut k = vec![vec![0.0; dim]; 7];
    let mut ytmp = vec![0.0; dim];
    let mut y5 = vec![0.0; dim];
    rhs(t, &y, &mut k[0]);

    // initial step: conservative fraction of the first output interval
    let mut h = (times[1] - times[0]) / 100.0;
    let mut steps = 0usize;

    for &t_out in &times[1..] {
        while t < t_out {
            if steps >= opts.max_steps {
                return Err(LabError::ConvergenceFailed {
                    what: "adaptive integration".into(),
                    iterations: steps,
                });
            }
            steps += 1;
            let h_try = h.min(t_out - t);
            for s in 1..7 {
                for i in 0..dim {
                    let mut acc = 0.0;
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += A[s][j] * kj[i];
                    }
                    ytmp[i] = y[i] + h_try * acc;
                }
                rhs(t + C[s] * h_try, &ytmp, &mut k[s]);
            }
            let mut err = 0.0f64;
            for i in 0..dim {
                let mut v5 = 0.0;
                let mut v4 = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    v5 += B5[j] * kj[i];
                    v4 += B4[j] * kj[i];
                }
                y5[i] = y[i] + h_try * v5;
                let scale = opts.atol + opts.rtol * y[i].abs().max(y5[i].abs());
                let e = h_try * (v5 - v4) / scale;
                err += e * e;
            }
            err = (err / dim as f64).sqrt();
            if !err.is_finite() {
                // overshot into garbage: reject hard and retry much smaller
                h = h_try * 0.1;
                if t + h == t {
                    return Err(LabError::ConvergenceFailed {
                        what: "adaptive integration (step size underflow)".into(),
                        iterations: steps,
                    });
                }
                continue;
            }
            let factor = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
            if err <= 1.0 {
                t += h_try;
                y.copy_from_slice(&y5);
                if opts.clip_nonnegative {
                    for v in y.iter_mut() {
                        *v = v.max(0.0);
                    }
                }
                rhs(t, &y, &mut k[0]);
                h = h_try * factor;
            } else {
                h = h_try * factor;
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

//! Numerical verification of the convolution bounds behind the
//! late-time envelopes.
//!
//! Each check states a closed-form or quadrature value for the left side,
//! a claimed constant for the right side, and reports the largest ratio
//! seen over a seeded random sweep of the parameter domain plus the
//! corner points where the bound is tight.  A ratio at most one means
//! the bound held everywhere it was sampled.

use crate::error::{LabError, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Outcome of sweeping one bound.
#[derive(Debug, Clone)]
pub struct InequalityCheck {
    pub name: &'static str,
    /// Constant used on the right side.
    pub constant: f64,
    /// max over samples of LHS / (constant * RHS core); must be <= 1.
    pub max_ratio: f64,
    /// Parameters at which the maximum was found.
    pub arg_max: Vec<f64>,
    pub samples: usize,
}

impl InequalityCheck {
    pub fn holds(&self) -> bool {
        self.max_ratio <= 1.0 + 1e-12
    }
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1],
/// by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // P_n(x) and P_n'(x) via the three-term recurrence
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=n {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss-Legendre integral of `f` over the given breakpoints.
fn composite_gl(f: impl Fn(f64) -> f64, breaks: &[f64], rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let (nodes, weights) = rule;
    let mut total = 0.0;
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in nodes.iter().zip(weights) {
            acc += w * f(mid + half * x);
        }
        total += half * acc;
    }
    total
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let u: f64 = rng.random();
    (lo.ln() + u * (hi / lo).ln()).exp()
}

fn sweep(
    name: &'static str,
    constant: f64,
    samples: usize,
    seed: u64,
    corners: &[Vec<f64>],
    draw: impl Fn(&mut ChaCha8Rng) -> Vec<f64>,
    ratio: impl Fn(&[f64]) -> f64,
) -> Result<InequalityCheck> {
    if samples == 0 {
        return Err(LabError::InvalidInput("need at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_ratio = f64::NEG_INFINITY;
    let mut arg_max = Vec::new();
    let mut consider = |p: Vec<f64>| -> Result<()> {
        let r = ratio(&p);
        if !r.is_finite() {
            return Err(LabError::InvalidInput(format!(
                "{name}: ratio not finite at {p:?}"
            )));
        }
        if r > max_ratio {
            max_ratio = r;
            arg_max = p;
        }
        Ok(())
    };
    for corner in corners {
        consider(corner.clone())?;
    }
    for _ in 0..samples {
        consider(draw(&mut rng))?;
    }
    Ok(InequalityCheck {
        name,
        constant,
        max_ratio,
        arg_max,
        samples: samples + corners.len(),
    })
}

/// 4 [(tau + dt)^{1/4} - tau^{1/4}]  <=  4 dt (tau + dt)^{-3/4},
/// the one-step gain of the quarter-power envelope.  Tight at tau = 0.
pub fn check_quarter_power_step(samples: usize, seed: u64) -> Result<InequalityCheck> {
    let c = 4.0;
    let corners = vec![vec![0.0, 1.0], vec![0.0, 1e5], vec![1e-3, 1e5]];
    sweep(
        "quarter_power_step",
        c,
        samples,
        seed,
        &corners,
        |rng| {
            vec![
                log_uniform(rng, 1e-3, 1e5),
                log_uniform(rng, 1.0, 1e5),
            ]
        },
        move |p| {
            let (tau, dt) = (p[0], p[1]);
            let lhs = 4.0 * ((tau + dt).powf(0.25) - tau.powf(0.25));
            let rhs = c * dt * (tau + dt).powf(-0.75);
            lhs / rhs
        },
    )
}

/// Integral of the broken weight s^{-3/4} (s <= 1), s^{-3/2} (s >= 1)
/// over a window [tau, tau + dt], against 6 dt / (dt + tau) <tau>^{-1/2}.
/// Tight for long windows starting at zero.
pub fn check_broken_weight_window(samples: usize, seed: u64) -> Result<InequalityCheck> {
    let c = 6.0;
    fn broken_integral(a: f64, b: f64) -> f64 {
        if b <= 1.0 {
            4.0 * (b.powf(0.25) - a.powf(0.25))
        } else if a >= 1.0 {
            2.0 * (a.powf(-0.5) - b.powf(-0.5))
        } else {
            4.0 * (1.0 - a.powf(0.25)) + 2.0 * (1.0 - b.powf(-0.5))
        }
    }
    let corners = vec![vec![0.0, 1e5], vec![0.0, 1.0], vec![1.0, 1e5]];
    sweep(
        "broken_weight_window",
        c,
        samples,
        seed,
        &corners,
        |rng| {
            vec![
                log_uniform(rng, 1e-3, 1e5),
                log_uniform(rng, 1.0, 1e5),
            ]
        },
        move |p| {
            let (tau, dt) = (p[0], p[1]);
            let lhs = broken_integral(tau, tau + dt);
            let bracket = (1.0 + tau * tau).sqrt();
            let rhs = c * dt / (dt + tau) * bracket.powf(-0.5);
            lhs / rhs
        },
    )
}

/// The memory integral from a start time T >= 1,
///   int_T^t (t - s)^{-3/4} s^{-3/2} ds  <=  6 T^{-1/2} t^{-3/4},
/// evaluated after the substitution s = t - u^4, which removes the
/// endpoint singularity and leaves a smooth integrand in u.
pub fn check_memory_tail(samples: usize, seed: u64) -> Result<InequalityCheck> {
    let c = 6.0;
    let rule = gauss_legendre(32);
    let corners = vec![
        vec![1.0, 2.0],
        vec![1.0, 5.0],
        vec![1.0, 1e4],
        vec![1e3, 2.0],
    ];
    sweep(
        "memory_tail",
        c,
        samples,
        seed,
        &corners,
        |rng| {
            vec![
                log_uniform(rng, 1.0, 1e4),
                log_uniform(rng, 1.0 + 1e-6, 1e4),
            ]
        },
        move |p| {
            let (t_start, mult) = (p[0], p[1]);
            let t = t_start * mult;
            let lhs = memory_integral(t_start, t, &rule);
            let rhs = c * t_start.powf(-0.5) * t.powf(-0.75);
            lhs / rhs
        },
    )
}

/// int_T^t (t-s)^{-3/4} s^{-3/2} ds via s = t - u^4, composite rule with
/// panels crowded toward the s = T end where the integrand peaks.
pub fn memory_integral(t_start: f64, t: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    assert!(t > t_start && t_start > 0.0);
    let u_max = (t - t_start).powf(0.25);
    let mut breaks = vec![0.0];
    for k in 1..=20 {
        breaks.push(u_max * (1.0 - 0.5_f64.powi(k)));
    }
    breaks.push(u_max);
    composite_gl(|u| 4.0 * (t - u.powi(4)).powf(-1.5), &breaks, rule)
}

/// Direct quadrature of the same memory integral in the s variable,
/// kept as an independent cross-check on the substitution.
pub fn memory_integral_direct(t_start: f64, t: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    assert!(t > t_start && t_start > 0.0);
    let mid = 0.5 * (t_start + t);
    // log-spaced panels through the left half, where s spans decades
    let mut breaks = vec![t_start];
    let mut s = 2.0 * t_start;
    while s < mid {
        breaks.push(s);
        s *= 2.0;
    }
    breaks.push(mid);
    // then crowd geometrically toward the singularity at s = t
    for k in 2..=20 {
        breaks.push(t - (t - t_start) * 0.5_f64.powi(k));
    }
    let s_last = *breaks.last().unwrap();
    // close the last sliver with the exact primitive of (t-s)^{-3/4},
    // freezing the slowly varying s^{-3/2} factor at the panel edge
    let tail = 4.0 * (t - s_last).powf(0.25) * s_last.powf(-1.5);
    composite_gl(|s| (t - s).powf(-0.75) * s.powf(-1.5), &breaks, rule) + tail
}

/// int_1^{t-1} (t-s)^{-3/2} s^{-3/2} ds = 4 (t-2) / (t^2 sqrt(t-1))
/// against 4 t^{-3/2}; the closed form follows from the primitive
/// (2/t^2) (2s - t) / sqrt(s (t-s)).  Approaches equality as t grows.
pub fn check_bilateral_tail(samples: usize, seed: u64) -> Result<InequalityCheck> {
    let c = 4.0;
    let corners = vec![vec![2.0 + 1e-9], vec![1e6], vec![4.0]];
    sweep(
        "bilateral_tail",
        c,
        samples,
        seed,
        &corners,
        |rng| vec![2.0 + log_uniform(rng, 1e-3, 1e6)],
        move |p| {
            let t = p[0];
            let lhs = bilateral_integral(t);
            let rhs = c * t.powf(-1.5);
            lhs / rhs
        },
    )
}

/// Closed form of int_1^{t-1} (t-s)^{-3/2} s^{-3/2} ds for t > 2.
pub fn bilateral_integral(t: f64) -> f64 {
    4.0 * (t - 2.0) / (t * t * (t - 1.0).sqrt())
}

/// Run all four checks with one seed.
pub fn verify_all(samples: usize, seed: u64) -> Result<Vec<InequalityCheck>> {
    Ok(vec![
        check_quarter_power_step(samples, seed)?,
        check_broken_weight_window(samples, seed.wrapping_add(1))?,
        check_memory_tail(samples, seed.wrapping_add(2))?,
        check_bilateral_tail(samples, seed.wrapping_add(3))?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = gauss_legendre(32);
        // degree 63 is the highest exact degree for 32 nodes
        let value = composite_gl(|x| x.powi(62), &[-1.0, 1.0], &rule);
        assert_relative_eq!(value, 2.0 / 63.0, max_relative = 1e-12);
        let weight_sum: f64 = rule.1.iter().sum();
        assert_relative_eq!(weight_sum, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn quarter_power_step_is_tight_at_the_origin_corner() {
        let check = check_quarter_power_step(1000, 7).unwrap();
        assert!(check.holds(), "max ratio {}", check.max_ratio);
        // equality at tau = 0 is included as a corner
        assert!(check.max_ratio > 1.0 - 1e-9);
    }

    #[test]
    fn broken_weight_window_holds_and_is_nearly_attained() {
        let check = check_broken_weight_window(1000, 7).unwrap();
        assert!(check.holds(), "max ratio {}", check.max_ratio);
        assert!(check.max_ratio > 0.98, "slack bound: {}", check.max_ratio);
    }

    #[test]
    fn memory_tail_holds_with_moderate_slack() {
        let check = check_memory_tail(400, 7).unwrap();
        assert!(check.holds(), "max ratio {}", check.max_ratio);
        assert!(
            check.max_ratio > 0.4,
            "constant far too generous: {}",
            check.max_ratio
        );
    }

    #[test]
    fn substituted_and_direct_memory_quadratures_agree() {
        let rule = gauss_legendre(32);
        for &(t_start, t) in &[(1.0, 3.0), (1.0, 50.0), (10.0, 1e3), (2.0, 1e4)] {
            let a = memory_integral(t_start, t, &rule);
            let b = memory_integral_direct(t_start, t, &rule);
            assert_relative_eq!(a, b, max_relative = 1e-6);
        }
    }

    #[test]
    fn bilateral_tail_approaches_equality_at_late_times() {
        let check = check_bilateral_tail(1000, 7).unwrap();
        assert!(check.holds(), "max ratio {}", check.max_ratio);
        assert!(check.max_ratio > 0.99, "slack bound: {}", check.max_ratio);
    }

    #[test]
    fn bilateral_closed_form_matches_quadrature() {
        let rule = gauss_legendre(32);
        for &t in &[2.5_f64, 4.0, 30.0, 1e4] {
            // both endpoints carry the mass: log-space panels away from
            // s = 1 up to the midpoint, then mirror toward s = t - 1
            let mid = 0.5 * t;
            let mut breaks = vec![1.0];
            let mut s = 2.0;
            while s < mid {
                breaks.push(s);
                s *= 2.0;
            }
            breaks.push(mid);
            let mut gaps = vec![1.0];
            let mut d = 2.0;
            while t - d > mid {
                gaps.push(d);
                d *= 2.0;
            }
            for &g in gaps.iter().rev() {
                breaks.push(t - g);
            }
            let quad = composite_gl(|s| ((t - s) * s).powf(-1.5), &breaks, &rule);
            assert_relative_eq!(quad, bilateral_integral(t), max_relative = 1e-9);
        }
    }

    #[test]
    fn maxima_are_stable_under_sample_doubling() {
        for build in [
            check_quarter_power_step,
            check_broken_weight_window,
            check_memory_tail,
            check_bilateral_tail,
        ] {
            let once = build(500, 11).unwrap();
            let twice = build(1000, 11).unwrap();
            let drift = (once.max_ratio - twice.max_ratio).abs() / once.max_ratio;
            assert!(
                drift < 0.1,
                "{}: max ratio moved {:.1}% under doubling",
                once.name,
                100.0 * drift
            );
        }
    }

    #[test]
    fn verify_all_reports_four_passing_checks() {
        let checks = verify_all(300, 3).unwrap();
        assert_eq!(checks.len(), 4);
        for check in &checks {
            assert!(check.holds(), "{} failed: {}", check.name, check.max_ratio);
            assert!(check.samples >= 300);
        }
    }
}

//! Nonlinear bound-state families.
//!
//! Stationary profiles solve H Q + lambda Q^3 = E Q.  Each family is grown
//! by parameter continuation from a linear mode: the ground family is
//! labelled by its overlap with the ground mode, the excited family by its
//! overlap with the excited mode.  A bordered Newton iteration solves for
//! the profile and the energy simultaneously, with the overlap pinned
//! exactly; evaluation between samples interpolates and then re-pins the
//! overlap, so downstream decompositions close exactly.

use crate::error::{LabError, Result};
use crate::grid::RadialField;
use crate::ham::Hamiltonian;
use crate::tridiag::SymTridiag;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchKind {
    Ground,
    Excited,
}

#[derive(Debug, Clone)]
pub struct BranchSample {
    pub param: f64,
    pub energy: f64,
    /// Real reduced profile, overlap with the linear mode equal to `param`.
    pub profile: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Least-squares model E(p) = linear + quadratic p^2 + quartic p^4 over the
/// lower half of the branch.
#[derive(Debug, Clone, Copy)]
pub struct EnergyFit {
    pub linear: f64,
    pub quadratic: f64,
    pub quartic: f64,
    /// ||model - E|| / ||E - linear|| over the samples used.
    pub relative_residual: f64,
    pub samples_used: usize,
}

/// Energy-derivative diagnostics at one branch sample.
#[derive(Debug, Clone, Copy)]
pub struct SampleDerivative {
    pub param: f64,
    /// dE/dp from the linearized solve.
    pub energy_slope: f64,
    /// 1 / <Q, dQ/dE>.
    pub c1: f64,
    /// ||dQ/dE||; grows like 1/param near the bifurcation.
    pub profile_sensitivity: f64,
    /// Relative L2 difference between the solved dQ/dE and the centered
    /// branch difference; None at the branch ends.
    pub difference_agreement: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct BoundStateFamily {
    kind: BranchKind,
    lambda: f64,
    e_linear: f64,
    mode: Vec<f64>,
    samples: Vec<BranchSample>,
}

impl BoundStateFamily {
    /// Grow a family at the given parameter values (sorted internally).
    /// A zero parameter is the linear limit and is filled in analytically.
    pub fn continue_family(
        ham: &Hamiltonian,
        kind: BranchKind,
        lambda: f64,
        params: &[f64],
    ) -> Result<Self> {
        if params.is_empty() {
            return Err(LabError::InvalidInput("no branch parameters given".into()));
        }
        let mut ordered: Vec<f64> = params.to_vec();
        if ordered.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(LabError::InvalidInput(
                "branch parameters must be finite and non-negative".into(),
            ));
        }
        ordered.sort_by(f64::total_cmp);
        ordered.dedup();

        let modes = ham.bound_modes()?;
        let (e_linear, mode) = match kind {
            BranchKind::Ground => (modes.e0, modes.phi0),
            BranchKind::Excited => (modes.e1, modes.phi1),
        };
        let inv = ham.grid().inverse_scale_sq();
        let op = ham.operator();
        let n = op.len();

        let mut samples: Vec<BranchSample> = Vec::with_capacity(ordered.len());
        let mut q = vec![0.0; n];
        let mut energy = e_linear;
        let mut prev_param = 0.0f64;
        for &p in &ordered {
            if p == 0.0 {
                samples.push(BranchSample {
                    param: 0.0,
                    energy: e_linear,
                    profile: vec![0.0; n],
                    residual: 0.0,
                    iterations: 0,
                });
                continue;
            }
            // predictor: rescale the previous profile, quadratic energy shift
            if prev_param == 0.0 {
                for (qi, &mi) in q.iter_mut().zip(&mode) {
                    *qi = p * mi;
                }
                energy = e_linear;
            } else {
                let ratio = p / prev_param;
                for qi in q.iter_mut() {
                    *qi *= ratio;
                }
                energy = e_linear + (energy - e_linear) * ratio * ratio;
            }
            match newton_pinned(op, &inv, &mode, lambda, p, &mut q, &mut energy) {
                Ok((residual, iterations)) => samples.push(BranchSample {
                    param: p,
                    energy,
                    profile: q.clone(),
                    residual,
                    iterations,
                }),
                Err((residual, iterations)) => {
                    let last_good = samples.last().map_or(0.0, |s| s.param);
                    return Err(LabError::ContinuationFailed {
                        param: p,
                        residual,
                        iterations,
                        last_good,
                    });
                }
            }
            prev_param = p;
        }
        Ok(Self {
            kind,
            lambda,
            e_linear,
            mode,
            samples,
        })
    }

    /// Parameter ladder for an excited family: 0, step, 2 step, ... up to
    /// `max`.
    pub fn even_params(max: f64, step: f64) -> Vec<f64> {
        let mut out = vec![0.0];
        let mut p = step;
        while p <= max + 1e-12 * step {
            out.push(p);
            p += step;
        }
        out
    }

    /// Geometric ladder top * 2^(-k/2), k = 0..levels, ascending; suits a
    /// branch examined over decades near the bifurcation.
    pub fn geometric_params(top: f64, levels: usize) -> Vec<f64> {
        let mut out: Vec<f64> = (0..=levels)
            .map(|k| top * (2.0f64).powf(-(k as f64) / 2.0))
            .collect();
        out.reverse();
        out
    }

    pub fn kind(&self) -> BranchKind {
        self.kind
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn linear_energy(&self) -> f64 {
        self.e_linear
    }

    /// Linear mode the parameter is pinned against.
    pub fn mode(&self) -> &[f64] {
        &self.mode
    }

    pub fn samples(&self) -> &[BranchSample] {
        &self.samples
    }

    pub fn max_param(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.param)
    }

    fn check_range(&self, m: f64) -> Result<()> {
        if !m.is_finite() || m < 0.0 {
            return Err(LabError::InvalidInput(format!(
                "branch parameter must be finite and non-negative, got {m}"
            )));
        }
        if m > self.max_param() * (1.0 + 1e-12) {
            return Err(LabError::OutsideBranch {
                value: m,
                max: self.max_param(),
            });
        }
        Ok(())
    }

    /// Four-point interpolation stencil around m (clamped at the ends).
    fn stencil(&self, m: f64) -> std::ops::Range<usize> {
        let n = self.samples.len();
        let width = n.min(4);
        let mut j = self
            .samples
            .partition_point(|s| s.param <= m)
            .saturating_sub(1);
        j = j.saturating_sub(1).min(n - width);
        j..j + width
    }

    pub fn energy_at(&self, m: f64) -> Result<f64> {
        self.check_range(m)?;
        let st = self.stencil(m);
        let w = lagrange_weights(&self.samples[st.clone()], m);
        Ok(self.samples[st]
            .iter()
            .zip(&w)
            .map(|(s, &wi)| wi * s.energy)
            .sum())
    }

    /// Interpolated profile with the overlap constraint re-pinned exactly.
    pub fn profile_at(&self, m: f64) -> Result<Vec<f64>> {
        self.check_range(m)?;
        let st = self.stencil(m);
        let w = lagrange_weights(&self.samples[st.clone()], m);
        let n = self.mode.len();
        let mut q = vec![0.0; n];
        for (s, &wi) in self.samples[st].iter().zip(&w) {
            if wi == 0.0 {
                continue;
            }
            for (qi, &pi) in q.iter_mut().zip(&s.profile) {
                *qi += wi * pi;
            }
        }
        let overlap: f64 = self.mode.iter().zip(&q).map(|(a, b)| a * b).sum();
        let fix = m - overlap;
        for (qi, &mi) in q.iter_mut().zip(&self.mode) {
            *qi += fix * mi;
        }
        Ok(q)
    }

    /// d(profile)/d(param), with the exact normalization <mode, dQ/dp> = 1.
    pub fn profile_slope_at(&self, m: f64) -> Result<Vec<f64>> {
        self.check_range(m)?;
        let st = self.stencil(m);
        let w = lagrange_slope_weights(&self.samples[st.clone()], m);
        let n = self.mode.len();
        let mut qp = vec![0.0; n];
        for (s, &wi) in self.samples[st].iter().zip(&w) {
            if wi == 0.0 {
                continue;
            }
            for (qi, &pi) in qp.iter_mut().zip(&s.profile) {
                *qi += wi * pi;
            }
        }
        let overlap: f64 = self.mode.iter().zip(&qp).map(|(a, b)| a * b).sum();
        let fix = 1.0 - overlap;
        for (qi, &mi) in qp.iter_mut().zip(&self.mode) {
            *qi += fix * mi;
        }
        Ok(qp)
    }

    /// Profile for a complex amplitude: |y| selects the modulus, arg(y) the
    /// phase, so eval(e^{i a} y) = e^{i a} eval(y) to round-off.
    pub fn eval(&self, y: Complex64) -> Result<RadialField> {
        let m = y.norm();
        if m == 0.0 {
            return Ok(RadialField::zeros(self.mode.len()));
        }
        let q = self.profile_at(m)?;
        let phase = y / m;
        Ok(RadialField::from_reduced(
            q.iter().map(|&v| phase * v).collect(),
        ))
    }

    /// Least-squares even model for E(p) over the lower half of the branch.
    pub fn energy_fit(&self) -> Result<EnergyFit> {
        let half = 0.5 * self.max_param();
        let pts: Vec<&BranchSample> = self
            .samples
            .iter()
            .filter(|s| s.param > 0.0 && s.param <= half)
            .collect();
        if pts.len() < 3 {
            return Err(LabError::FitRejected(format!(
                "energy fit needs at least 3 lower-half samples, found {}",
                pts.len()
            )));
        }
        // normal equations for [p^2, p^4] against E - linear
        let (mut s44, mut s46, mut s66) = (0.0, 0.0, 0.0);
        let (mut b4, mut b6) = (0.0, 0.0);
        for s in &pts {
            let p2 = s.param * s.param;
            let p4 = p2 * p2;
            let d = s.energy - self.e_linear;
            s44 += p4;
            s46 += p4 * p2;
            s66 += p4 * p4;
            b4 += p2 * d;
            b6 += p4 * d;
        }
        let det = s44 * s66 - s46 * s46;
        if det.abs() < 1e-300 {
            return Err(LabError::FitRejected("degenerate energy fit".into()));
        }
        let quadratic = (b4 * s66 - b6 * s46) / det;
        let quartic = (s44 * b6 - s46 * b4) / det;
        let mut num = 0.0;
        let mut den = 0.0;
        for s in &pts {
            let p2 = s.param * s.param;
            let model = quadratic * p2 + quartic * p2 * p2;
            let d = s.energy - self.e_linear;
            num += (model - d) * (model - d);
            den += d * d;
        }
        Ok(EnergyFit {
            linear: self.e_linear,
            quadratic,
            quartic,
            relative_residual: (num / den.max(1e-300)).sqrt(),
            samples_used: pts.len(),
        })
    }

    /// Energy-derivative diagnostics per nonzero sample: solve
    /// (H + 3 lambda Q^2 - E) R = Q for R = dQ/dE and compare with the
    /// centered branch difference.
    pub fn derivatives(&self, ham: &Hamiltonian) -> Result<Vec<SampleDerivative>> {
        if ham.grid().len() != self.mode.len() {
            return Err(LabError::GridMismatch {
                expected: self.mode.len(),
                got: ham.grid().len(),
            });
        }
        let inv = ham.grid().inverse_scale_sq();
        let op = ham.operator();
        let nz: Vec<usize> = (0..self.samples.len())
            .filter(|&i| self.samples[i].param > 0.0)
            .collect();
        let mut out = Vec::with_capacity(nz.len());
        for (pos, &i) in nz.iter().enumerate() {
            let s = &self.samples[i];
            let diag: Vec<f64> = op
                .diag()
                .iter()
                .zip(&s.profile)
                .zip(&inv)
                .map(|((&d, &qi), &si)| d + 3.0 * self.lambda * qi * qi * si - s.energy)
                .collect();
            let lplus = SymTridiag::new(diag, op.off().to_vec())?;
            let r = lplus.factor_real(0.0)?.solve(&s.profile);
            let qr: f64 = s.profile.iter().zip(&r).map(|(a, b)| a * b).sum();
            let mr: f64 = self.mode.iter().zip(&r).map(|(a, b)| a * b).sum();
            let r_norm: f64 = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            let difference_agreement = if pos > 0 && pos + 1 < nz.len() {
                let lo = &self.samples[nz[pos - 1]];
                let hi = &self.samples[nz[pos + 1]];
                let de = hi.energy - lo.energy;
                let mut num = 0.0;
                for ((&a, &b), &ri) in hi.profile.iter().zip(&lo.profile).zip(&r) {
                    let diff = (a - b) / de - ri;
                    num += diff * diff;
                }
                Some(num.sqrt() / r_norm)
            } else {
                None
            };
            out.push(SampleDerivative {
                param: s.param,
                energy_slope: 1.0 / mr,
                c1: 1.0 / qr,
                profile_sensitivity: r_norm,
                difference_agreement,
            });
        }
        Ok(out)
    }
}

/// Bordered Newton step for the pinned stationary problem.  On failure the
/// error carries the final residual and iteration count.
fn newton_pinned(
    op: &SymTridiag,
    inv: &[f64],
    mode: &[f64],
    lambda: f64,
    target: f64,
    q: &mut [f64],
    energy: &mut f64,
) -> std::result::Result<(f64, usize), (f64, usize)> {
    const MAX_ITER: usize = 50;
    let n = q.len();
    let mut f = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for it in 0..MAX_ITER {
        op.apply_real(q, &mut f);
        for i in 0..n {
            f[i] += lambda * q[i] * q[i] * q[i] * inv[i] - *energy * q[i];
        }
        let con: f64 = mode.iter().zip(q.iter()).map(|(a, b)| a * b).sum::<f64>() - target;
        let fnorm_sq: f64 = f.iter().map(|v| v * v).sum();
        residual = (fnorm_sq + con * con).sqrt();
        let qnorm: f64 = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        if residual <= 1e-12 * qnorm.max(1.0) {
            return Ok((residual, it));
        }
        let diag: Vec<f64> = op
            .diag()
            .iter()
            .zip(q.iter())
            .zip(inv)
            .map(|((&d, &qi), &si)| d + 3.0 * lambda * qi * qi * si - *energy)
            .collect();
        let jac = match SymTridiag::new(diag, op.off().to_vec())
            .and_then(|j| j.factor_real(0.0))
        {
            Ok(fac) => fac,
            Err(_) => return Err((residual, it)),
        };
        let z1 = jac.solve(&f);
        let z2 = jac.solve(q);
        let mz1: f64 = mode.iter().zip(&z1).map(|(a, b)| a * b).sum();
        let mz2: f64 = mode.iter().zip(&z2).map(|(a, b)| a * b).sum();
        if mz2 == 0.0 {
            return Err((residual, it));
        }
        let de = (mz1 - con) / mz2;
        for i in 0..n {
            q[i] += -z1[i] + de * z2[i];
        }
        *energy += de;
    }
    Err((residual, MAX_ITER))
}

fn lagrange_weights(samples: &[BranchSample], m: f64) -> Vec<f64> {
    let k = samples.len();
    let mut w = vec![0.0; k];
    for i in 0..k {
        let mut v = 1.0;
        for j in 0..k {
            if j != i {
                v *= (m - samples[j].param) / (samples[i].param - samples[j].param);
            }
        }
        w[i] = v;
    }
    w
}

fn lagrange_slope_weights(samples: &[BranchSample], m: f64) -> Vec<f64> {
    let k = samples.len();
    let mut w = vec![0.0; k];
    for i in 0..k {
        let mut acc = 0.0;
        for l in 0..k {
            if l == i {
                continue;
            }
            let mut v = 1.0 / (samples[i].param - samples[l].param);
            for j in 0..k {
                if j != i && j != l {
                    v *= (m - samples[j].param) / (samples[i].param - samples[j].param);
                }
            }
            acc += v;
        }
        w[i] = acc;
    }
    w
}

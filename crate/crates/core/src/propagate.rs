//! Time evolution by symmetric splitting.
//!
//! One step advances the cubic flow a half step, damps a half step in the
//! absorbing layer, applies the linear flow exactly in the eigenbasis, and
//! reverses the first two halves.  The linear substep being exact keeps
//! isolated modes beating at machine precision over long runs, which the
//! rest of the laboratory leans on.

use crate::bound::BoundStateFamily;
use crate::decomp::{decompose, local_norms};
use crate::error::{LabError, Result};
use crate::grid::RadialField;
use crate::spectral::LinearSpectrum;
use num_complex::Complex64;

/// Quartic damping layer on the outer part of the box.
#[derive(Debug, Clone, Copy)]
pub struct AbsorberSpec {
    pub strength: f64,
    /// Radius fraction where the layer begins.
    pub start_fraction: f64,
}

impl Default for AbsorberSpec {
    fn default() -> Self {
        Self {
            strength: 10.0,
            start_fraction: 0.8,
        }
    }
}

pub struct Propagator<'a> {
    spec: &'a LinearSpectrum,
    lambda: f64,
    dt: f64,
    phases: Vec<Complex64>,
    /// Per-node damping factor for half a step, when a layer is active.
    damp_half: Option<Vec<f64>>,
    inv: Vec<f64>,
}

/// One recorded instant of a run, split around the excited branch.
#[derive(Debug, Clone, Copy)]
pub struct TrajectorySample {
    pub t: f64,
    pub x: Complex64,
    pub y: Complex64,
    pub theta: f64,
    pub xi_l2: f64,
    pub xi_local: f64,
    /// Weighted L2 of the whole field (decay diagnostics).
    pub field_local: f64,
    pub mass: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct RunMeta {
    pub dt: f64,
    pub lambda: f64,
    /// Sampling interval actually used (a whole number of steps).
    pub stride: f64,
    pub steps: usize,
    pub absorber: bool,
    /// Measured size of the data: |x(0)| + |y(0)| + ||xi(0)||.
    pub alpha: f64,
    /// Localization exponent used for the weighted norms.
    pub weight_r1: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub meta: RunMeta,
    pub samples: Vec<TrajectorySample>,
    pub final_field: RadialField,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn x_abs(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.x.norm()).collect()
    }

    pub fn y_abs(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.y.norm()).collect()
    }

    /// Keep every k-th sample (and always the first); models a coarser
    /// recording of the same run.
    pub fn subsample(&self, k: usize) -> Trajectory {
        let k = k.max(1);
        let samples: Vec<TrajectorySample> = self
            .samples
            .iter()
            .enumerate()
            .filter(|(i, _)| i % k == 0)
            .map(|(_, s)| *s)
            .collect();
        let mut meta = self.meta;
        meta.stride *= k as f64;
        Trajectory {
            meta,
            samples,
            final_field: self.final_field.clone(),
        }
    }
}

/// Nonlinear phase advance per step beyond which the splitting has left
/// the resolved regime; treated as blow-up.
const PHASE_ADVANCE_CAP: f64 = 10.0;

impl<'a> Propagator<'a> {
    pub fn new(
        spec: &'a LinearSpectrum,
        lambda: f64,
        dt: f64,
        absorber: Option<AbsorberSpec>,
    ) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(LabError::InvalidInput(format!(
                "step size must be positive and finite, got {dt}"
            )));
        }
        if !lambda.is_finite() {
            return Err(LabError::InvalidInput("non-finite coupling".into()));
        }
        let grid = spec.grid();
        let damp_half = match absorber {
            None => None,
            Some(a) => {
                if !(a.strength >= 0.0 && (0.0..1.0).contains(&a.start_fraction)) {
                    return Err(LabError::InvalidInput(
                        "absorber needs strength >= 0 and start fraction in [0, 1)".into(),
                    ));
                }
                let r0 = a.start_fraction * grid.r_max();
                let width = grid.r_max() - r0;
                Some(
                    grid.nodes()
                        .iter()
                        .map(|&r| {
                            if r <= r0 {
                                1.0
                            } else {
                                let z = (r - r0) / width;
                                (-a.strength * z * z * z * z * dt / 2.0).exp()
                            }
                        })
                        .collect(),
                )
            }
        };
        Ok(Self {
            spec,
            lambda,
            dt,
            phases: spec.phase_factors(dt),
            damp_half,
            inv: grid.inverse_scale_sq(),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn spectrum(&self) -> &LinearSpectrum {
        self.spec
    }

    pub fn has_absorber(&self) -> bool {
        self.damp_half.is_some()
    }

    fn half_nonlinear(&self, w: &mut RadialField) {
        let half = -0.5 * self.lambda * self.dt;
        for (v, &s) in w.as_mut_slice().iter_mut().zip(&self.inv) {
            let arg = half * v.norm_sqr() * s;
            *v *= Complex64::from_polar(1.0, arg);
        }
    }

    fn half_absorb(&self, w: &mut RadialField) {
        if let Some(damp) = &self.damp_half {
            for (v, &d) in w.as_mut_slice().iter_mut().zip(damp) {
                *v *= d;
            }
        }
    }

    /// One symmetric step of size dt.
    pub fn step(&self, w: &mut RadialField) {
        self.half_nonlinear(w);
        self.half_absorb(w);
        let mut coeffs = self.spec.analyze(w);
        for (c, &p) in coeffs.iter_mut().zip(&self.phases) {
            *c *= p;
        }
        *w = self.spec.synthesize(&coeffs);
        self.half_absorb(w);
        self.half_nonlinear(w);
    }

    pub fn mass(&self, w: &RadialField) -> f64 {
        w.norm_sq()
    }

    /// Conserved energy of the flow without the absorbing layer.
    pub fn energy(&self, w: &RadialField) -> f64 {
        let coeffs = self.spec.analyze(w);
        let linear: f64 = coeffs
            .iter()
            .zip(self.spec.energies())
            .map(|(c, &e)| e * c.norm_sqr())
            .sum();
        let quartic: f64 = w
            .as_slice()
            .iter()
            .zip(&self.inv)
            .map(|(v, &s)| {
                let a2 = v.norm_sqr();
                a2 * a2 * s
            })
            .sum();
        linear + 0.5 * self.lambda * quartic
    }

    fn check_resolved(&self, w: &RadialField, t: f64) -> Result<()> {
        if !w.all_finite() {
            return Err(LabError::BlowUp { t });
        }
        let peak = w
            .as_slice()
            .iter()
            .zip(&self.inv)
            .map(|(v, &s)| v.norm_sqr() * s)
            .fold(0.0, f64::max);
        if self.lambda.abs() * peak * self.dt > PHASE_ADVANCE_CAP {
            return Err(LabError::BlowUp { t });
        }
        Ok(())
    }

    /// Advance in place by `steps` steps, watching for loss of resolution.
    pub fn evolve(&self, w: &mut RadialField, steps: usize) -> Result<()> {
        for k in 0..steps {
            self.step(w);
            self.check_resolved(w, (k + 1) as f64 * self.dt)?;
        }
        Ok(())
    }

    /// Run to `t_final`, splitting the state around the excited branch at
    /// (roughly) every `stride` of time and recording size diagnostics
    /// weighted by <r>^(-2 r1).
    pub fn evolve_recorded(
        &self,
        family: &BoundStateFamily,
        psi0: &RadialField,
        t_final: f64,
        stride: f64,
        weight_r1: f64,
    ) -> Result<Trajectory> {
        if !(t_final.is_finite() && t_final > 0.0 && stride.is_finite() && stride > 0.0) {
            return Err(LabError::InvalidInput(
                "final time and stride must be positive and finite".into(),
            ));
        }
        let grid = self.spec.grid();
        if psi0.len() != grid.len() {
            return Err(LabError::GridMismatch {
                expected: grid.len(),
                got: psi0.len(),
            });
        }
        let stride_steps = ((stride / self.dt).round() as usize).max(1);
        let total_steps = (t_final / self.dt - 1e-9).ceil().max(1.0) as usize;

        let mut w = psi0.clone();
        let mut samples: Vec<TrajectorySample> =
            Vec::with_capacity(total_steps / stride_steps + 2);

        let record = |samples: &mut Vec<TrajectorySample>,
                      w: &RadialField,
                      t: f64,
                      prev: Option<f64>|
         -> Result<f64> {
            let parts = decompose(self.spec, family, w, prev)?;
            let xi_norms = local_norms(grid, &parts.xi, weight_r1);
            let field_norms = local_norms(grid, w, weight_r1);
            samples.push(TrajectorySample {
                t,
                x: parts.x,
                y: parts.y,
                theta: parts.theta,
                xi_l2: xi_norms.l2,
                xi_local: xi_norms.l2_local,
                field_local: field_norms.l2_local,
                mass: self.mass(w),
                energy: self.energy(w),
            });
            Ok(parts.theta)
        };

        let mut prev_theta = Some(record(&mut samples, &w, 0.0, None)?);
        let first = &samples[0];
        let alpha = first.x.norm() + first.y.norm() + first.xi_l2;

        for k in 1..=total_steps {
            self.step(&mut w);
            let t = k as f64 * self.dt;
            self.check_resolved(&w, t)?;
            if k % stride_steps == 0 || k == total_steps {
                prev_theta = Some(record(&mut samples, &w, t, prev_theta)?);
            }
        }
        Ok(Trajectory {
            meta: RunMeta {
                dt: self.dt,
                lambda: self.lambda,
                stride: stride_steps as f64 * self.dt,
                steps: total_steps,
                absorber: self.has_absorber(),
                alpha,
                weight_r1,
            },
            samples,
            final_field: w,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bound::BranchKind;
    use crate::ham::{Hamiltonian, Potential};
    use crate::spectral::LinearSpectrum;
    use approx::assert_relative_eq;
    use once_cell::sync::Lazy;

    struct Lab {
        spec: LinearSpectrum,
        family: BoundStateFamily,
    }

    static LAB: Lazy<Lab> = Lazy::new(|| {
        let grid = crate::grid::RadialGrid::new(30.0, 600).unwrap();
        let ham = Hamiltonian::new(
            grid,
            &Potential::GaussianWell {
                depth: 41.0,
                width: 1.0,
            },
        )
        .unwrap();
        let spec = LinearSpectrum::build(&ham).unwrap();
        let family = BoundStateFamily::continue_family(
            &ham,
            BranchKind::Excited,
            1.0,
            &BoundStateFamily::even_params(1.5, 0.1),
        )
        .unwrap();
        Lab { spec, family }
    });

    #[test]
    fn linear_step_advances_a_mode_exactly() {
        let spec = &LAB.spec;
        let prop = Propagator::new(spec, 0.0, 0.05, None).unwrap();
        let k = spec.n_bound() + 3;
        let (e, chi) = spec.mode(k);
        let mut w = RadialField::from_real_reduced(chi);
        let steps = 200;
        for _ in 0..steps {
            prop.step(&mut w);
        }
        let expected = Complex64::from_polar(1.0, -e * 0.05 * steps as f64);
        let overlap = w.inner_real(chi).conj();
        assert!((overlap - expected).norm() < 1e-11);
        assert_relative_eq!(w.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn mass_is_conserved_without_the_layer() {
        let spec = &LAB.spec;
        let prop = Propagator::new(spec, 1.0, 1e-3, None).unwrap();
        let mut w = LAB.family.eval(Complex64::from_polar(1.0, 0.3)).unwrap();
        w.axpy_real(Complex64::new(0.4, 0.1), spec.phi0());
        let m0 = prop.mass(&w);
        prop.evolve(&mut w, 500).unwrap();
        assert_relative_eq!(prop.mass(&w), m0, max_relative = 1e-12);
    }

    #[test]
    fn energy_drift_shrinks_quadratically_with_the_step() {
        let spec = &LAB.spec;
        let mut w0 = LAB.family.eval(Complex64::from_polar(0.9, 0.0)).unwrap();
        w0.axpy_real(Complex64::new(0.5, 0.0), spec.phi0());
        let drift = |dt: f64| -> f64 {
            let prop = Propagator::new(spec, 1.0, dt, None).unwrap();
            let mut w = w0.clone();
            let e0 = prop.energy(&w);
            let steps = (1.0 / dt).round() as usize;
            prop.evolve(&mut w, steps).unwrap();
            (prop.energy(&w) - e0).abs()
        };
        let d1 = drift(4e-3);
        let d2 = drift(2e-3);
        let ratio = d1 / d2;
        assert!(
            (2.5..6.0).contains(&ratio),
            "expected second order, drift ratio {ratio} ({d1} vs {d2})"
        );
    }

    #[test]
    fn splitting_self_converges_at_second_order() {
        let spec = &LAB.spec;
        let mut w0 = LAB.family.eval(Complex64::from_polar(0.8, 0.4)).unwrap();
        w0.axpy_real(Complex64::new(0.3, -0.2), spec.phi0());
        let advance = |dt: f64| -> RadialField {
            let prop = Propagator::new(spec, 1.0, dt, None).unwrap();
            let mut w = w0.clone();
            prop.evolve(&mut w, (0.5 / dt).round() as usize).unwrap();
            w
        };
        let fine = advance(5e-4);
        let e1 = (&advance(4e-3) - &fine).norm();
        let e2 = (&advance(2e-3) - &fine).norm();
        let order = (e1 / e2).log2();
        assert!(
            (1.7..2.3).contains(&order),
            "observed order {order} (errors {e1}, {e2})"
        );
    }

    #[test]
    fn layer_drains_outgoing_flux() {
        let spec = &LAB.spec;
        let grid = spec.grid();
        // packet at r = 20 with outward momentum k = 4 (group speed 8)
        let w0 = RadialField::from_field_values(grid, |r| {
            Complex64::from_polar((-0.5 * (r - 20.0) * (r - 20.0)).exp(), 4.0 * r)
        });
        let prop = Propagator::new(spec, 0.0, 0.01, Some(AbsorberSpec::default())).unwrap();
        let mut w = w0.clone();
        prop.evolve(&mut w, 300).unwrap();
        assert!(
            prop.mass(&w) < 0.05 * prop.mass(&w0),
            "layer failed to drain: {} of {}",
            prop.mass(&w),
            prop.mass(&w0)
        );
        // and a state away from the layer is untouched by the damping factors
        let inner = LAB.family.eval(Complex64::new(0.5, 0.0)).unwrap();
        let mut v = inner.clone();
        prop.half_absorb(&mut v);
        assert!((&v - &inner).norm() < 1e-9 * inner.norm());
    }

    #[test]
    fn unresolved_focusing_run_reports_blow_up() {
        let spec = &LAB.spec;
        let prop = Propagator::new(spec, -1.0, 0.05, None).unwrap();
        let mut w = RadialField::from_real_reduced(spec.phi0());
        w.scale(Complex64::new(40.0, 0.0));
        let err = prop.evolve(&mut w, 100).unwrap_err();
        assert!(matches!(err, LabError::BlowUp { .. }));
    }

    #[test]
    fn recorded_run_samples_on_the_stride() {
        let spec = &LAB.spec;
        let prop = Propagator::new(spec, 1.0, 0.01, Some(AbsorberSpec::default())).unwrap();
        let mut psi0 = LAB.family.eval(Complex64::from_polar(0.7, 0.2)).unwrap();
        psi0.axpy_real(Complex64::new(0.1, 0.0), spec.phi0());
        let traj = prop
            .evolve_recorded(&LAB.family, &psi0, 2.0, 0.25, 2.0)
            .unwrap();
        assert_eq!(traj.meta.steps, 200);
        assert_relative_eq!(traj.meta.stride, 0.25, epsilon = 1e-12);
        assert_eq!(traj.samples.len(), 9);
        for (i, s) in traj.samples.iter().enumerate() {
            assert_relative_eq!(s.t, 0.25 * i as f64, epsilon = 1e-12);
        }
        // size of the data is measured, not assumed
        let s0 = &traj.samples[0];
        assert_relative_eq!(
            traj.meta.alpha,
            s0.x.norm() + s0.y.norm() + s0.xi_l2,
            epsilon = 1e-15
        );
        assert_relative_eq!(s0.y.norm(), 0.7, epsilon = 1e-12);
        // subsampling keeps every other sample
        let coarse = traj.subsample(2);
        assert_eq!(coarse.samples.len(), 5);
        assert_relative_eq!(coarse.meta.stride, 0.5, epsilon = 1e-12);
        assert_relative_eq!(coarse.samples[1].t, 0.5, epsilon = 1e-12);
        // phase unwrap: jumps stay below pi and the phase advances at
        // roughly the branch rate -E1 (here ~ +6.5 per unit time)
        for w in traj.samples.windows(2) {
            assert!((w[1].theta - w[0].theta).abs() < std::f64::consts::PI);
        }
        let total = traj.samples.last().unwrap().theta - traj.samples[0].theta;
        assert!(
            (11.0..15.0).contains(&total),
            "unwrapped phase advance {total} over t = 2"
        );
    }
}

//! Second-order continuum corrections around small discrete amplitudes.
//!
//! At second order in the two discrete amplitudes, the remainder is a
//! fixed combination of five source terms, each the continuum response of
//! a mode product at the frequency its amplitude monomial beats at.  The
//! resonant one (twice the excited frequency against the ground) sits
//! inside the continuum and is regularized by a small recorded smoothing;
//! the others sit at real energies and are solved with the discrete modes
//! projected out of both the source and the response, which keeps the
//! solves well-posed even when the shift equals a discrete level.

use crate::error::{LabError, Result};
use crate::fermi::coupling_vector;
use crate::grid::RadialField;
use crate::ham::{BoundModes, Hamiltonian};
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct SecondOrderProfiles {
    /// Recorded smoothing of the resonant solve.
    pub sigma: f64,
    /// Continuum responses, ordered by the monomials
    /// y^2 conj(x), |y|^2 x, |x|^2 y, x^2 conj(y), |x|^2 x.
    pub responses: [RadialField; 5],
    /// Shift each response was solved at.
    pub shifts: [Complex64; 5],
    /// Source scale for each solve (signed multiples of the coupling).
    pub scales: [f64; 5],
    /// Relative residual of each regularized equation.
    pub residuals: [f64; 5],
}

fn project_modes(modes: &BoundModes, v: &mut RadialField) {
    for mode in [&modes.phi0, &modes.phi1] {
        let c = v.inner_real(mode).conj();
        v.axpy_real(-c, mode);
    }
}

/// Solve (H - z) out = scale * P_c source, with the discrete modes
/// projected off both sides; returns the response and the relative
/// residual of the equation it solves.
fn continuum_response(
    ham: &Hamiltonian,
    modes: &BoundModes,
    source: &[f64],
    z: Complex64,
    scale: f64,
) -> Result<(RadialField, f64)> {
    let mut rhs = RadialField::from_real_reduced(source);
    project_modes(modes, &mut rhs);
    rhs.scale(Complex64::new(scale, 0.0));

    let fac = ham.shifted_factor(z)?;
    let sol = fac.solve(rhs.as_slice());
    let mut out = RadialField::from_reduced(sol);
    project_modes(modes, &mut out);

    // residual of (H - z) out - rhs
    let n = out.len();
    let mut resid = vec![Complex64::ZERO; n];
    ham.operator().apply(out.as_slice(), &mut resid);
    for i in 0..n {
        resid[i] -= z * out.as_slice()[i] + rhs.as_slice()[i];
    }
    let rnorm: f64 = resid.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    Ok((out, rnorm / rhs.norm().max(1e-300)))
}

impl SecondOrderProfiles {
    /// Build all five responses.  `sigma` regularizes the resonant solve;
    /// when omitted it defaults to three local level spacings of the box.
    pub fn build(ham: &Hamiltonian, lambda: f64, sigma: Option<f64>) -> Result<Self> {
        let modes = ham.bound_modes()?;
        let beat = 2.0 * modes.e1 - modes.e0;
        if beat <= 0.0 {
            return Err(LabError::InvalidInput(format!(
                "beat energy {beat} is not in the continuum"
            )));
        }
        let sigma = match sigma {
            Some(s) if s.is_finite() && s > 0.0 => s,
            Some(s) => {
                return Err(LabError::InvalidInput(format!(
                    "smoothing must be positive and finite, got {s}"
                )))
            }
            None => 3.0 * std::f64::consts::TAU * beat.sqrt() / ham.grid().r_max(),
        };
        let inv = ham.grid().inverse_scale_sq();
        // mode products in reduced form
        let f011: Vec<f64> = coupling_vector(ham)?; // phi0 phi1^2, already projected
        let f001: Vec<f64> = (0..inv.len())
            .map(|i| modes.phi0[i] * modes.phi0[i] * modes.phi1[i] * inv[i])
            .collect();
        let f000: Vec<f64> = (0..inv.len())
            .map(|i| modes.phi0[i].powi(3) * inv[i])
            .collect();

        let shifts = [
            Complex64::new(beat, sigma),
            Complex64::new(modes.e0, 0.0),
            Complex64::new(modes.e1, 0.0),
            Complex64::new(2.0 * modes.e0 - modes.e1, 0.0),
            Complex64::new(modes.e0, 0.0),
        ];
        let scales = [-lambda, -2.0 * lambda, -2.0 * lambda, -lambda, -lambda];
        let sources: [&[f64]; 5] = [&f011, &f011, &f001, &f001, &f000];

        let mut responses: Vec<RadialField> = Vec::with_capacity(5);
        let mut residuals = [0.0; 5];
        for k in 0..5 {
            let (resp, res) = continuum_response(ham, &modes, sources[k], shifts[k], scales[k])?;
            responses.push(resp);
            residuals[k] = res;
        }
        let responses: [RadialField; 5] = responses.try_into().expect("five responses");
        Ok(Self {
            sigma,
            responses,
            shifts,
            scales,
            residuals,
        })
    }

    /// Second-order remainder for amplitudes (x, y).
    pub fn remainder(&self, x: Complex64, y: Complex64) -> RadialField {
        let coeffs = [
            y * y * x.conj(),
            y.norm_sqr() * x,
            x.norm_sqr() * y,
            x * x * y.conj(),
            x.norm_sqr() * x,
        ];
        let mut out = RadialField::zeros(self.responses[0].len());
        for (c, resp) in coeffs.iter().zip(&self.responses) {
            if c.norm_sqr() > 0.0 {
                out.axpy(*c, resp);
            }
        }
        out
    }

    /// Overlap of the resonant source with the imaginary part of its own
    /// response; equals minus the coupling sign times the smoothed
    /// transfer rate at this smoothing.
    pub fn resonant_overlap(&self, ham: &Hamiltonian) -> Result<f64> {
        let f = coupling_vector(ham)?;
        let dot: Complex64 = f
            .iter()
            .zip(self.responses[0].as_slice())
            .map(|(&a, b)| a * b)
            .sum();
        Ok(dot.im)
    }
}

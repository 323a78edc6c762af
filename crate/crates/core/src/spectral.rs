//! Complete eigenbasis of the linear operator on a propagation grid, with
//! mode analysis/synthesis, the free flow, and spectral projectors.

use crate::error::{LabError, Result};
use crate::grid::{RadialField, RadialGrid};
use crate::ham::Hamiltonian;
use crate::tridiag::{ColMat, EigenBasis};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

/// Fixed chunk width for the parallel synthesis/analysis loops; fixed so
/// results do not depend on the thread count.
const PAR_CHUNK: usize = 64;

#[derive(Debug, Clone)]
pub struct LinearSpectrum {
    grid: RadialGrid,
    energies: Vec<f64>,
    basis: ColMat,
    n_bound: usize,
    e0: f64,
    e1: f64,
    phi0: Vec<f64>,
    phi1: Vec<f64>,
}

impl LinearSpectrum {
    /// Diagonalize the operator completely.  O(n^3): meant for grids where
    /// the basis is reused many times (time stepping, free flow, windows).
    pub fn build(ham: &Hamiltonian) -> Result<Self> {
        let EigenBasis { values, vectors } = ham.operator().eigen_full()?;
        let n_bound = values.iter().take_while(|&&e| e < 0.0).count();
        if n_bound < 2 {
            return Err(LabError::MissingBoundStates { found: n_bound });
        }
        let phi0 = vectors.col(0).to_vec();
        let phi1 = vectors.col(1).to_vec();
        Ok(Self {
            grid: ham.grid().clone(),
            e0: values[0],
            e1: values[1],
            energies: values,
            basis: vectors,
            n_bound,
            phi0,
            phi1,
        })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn n_bound(&self) -> usize {
        self.n_bound
    }

    pub fn e0(&self) -> f64 {
        self.e0
    }

    pub fn e1(&self) -> f64 {
        self.e1
    }

    /// Energy of the internal beat: twice the excited level above the ground
    /// level, 2 e1 - e0.  Positive exactly when the beat sits inside the
    /// continuous spectrum.
    pub fn beat_energy(&self) -> f64 {
        2.0 * self.e1 - self.e0
    }

    pub fn beat_in_continuum(&self) -> bool {
        self.beat_energy() > 0.0
    }

    pub fn phi0(&self) -> &[f64] {
        &self.phi0
    }

    pub fn phi1(&self) -> &[f64] {
        &self.phi1
    }

    pub fn mode(&self, k: usize) -> (f64, &[f64]) {
        (self.energies[k], self.basis.col(k))
    }

    /// Mode coefficients <chi_k, f> for all k.
    pub fn analyze(&self, f: &RadialField) -> Vec<Complex64> {
        let n = self.len();
        let fv = f.as_slice();
        (0..n)
            .into_par_iter()
            .with_min_len(PAR_CHUNK)
            .map(|k| {
                let col = self.basis.col(k);
                let mut acc = Complex64::ZERO;
                for (z, w) in col.iter().zip(fv) {
                    acc += w * *z;
                }
                acc
            })
            .collect()
    }

    /// Rebuild a field from mode coefficients.
    pub fn synthesize(&self, coeffs: &[Complex64]) -> RadialField {
        let n = self.len();
        debug_assert_eq!(coeffs.len(), n);
        let mut out = vec![Complex64::ZERO; n];
        let data = self.basis.data();
        out.par_chunks_mut(PAR_CHUNK).enumerate().for_each(|(ci, chunk)| {
            let r0 = ci * PAR_CHUNK;
            for (k, &c) in coeffs.iter().enumerate() {
                if c == Complex64::ZERO {
                    continue;
                }
                let seg = &data[k * n + r0..k * n + r0 + chunk.len()];
                for (o, &z) in chunk.iter_mut().zip(seg) {
                    *o += c * z;
                }
            }
        });
        RadialField::from_reduced(out)
    }

    /// Project onto the continuous (non-discrete) spectral subspace.
    pub fn project_continuous(&self, f: &RadialField) -> RadialField {
        let mut out = f.clone();
        for k in 0..self.n_bound {
            let col = self.basis.col(k);
            let c = f.inner_real(col).conj();
            out.axpy_real(-c, col);
        }
        out
    }

    /// Exact linear evolution exp(-i H t) applied through the basis.
    pub fn free_flow(&self, f: &RadialField, t: f64) -> RadialField {
        let mut coeffs = self.analyze(f);
        for (c, &e) in coeffs.iter_mut().zip(&self.energies) {
            *c *= Complex64::from_polar(1.0, -e * t);
        }
        self.synthesize(&coeffs)
    }

    /// Per-step phase table exp(-i e_k dt) for a stepper.
    pub fn phase_factors(&self, dt: f64) -> Vec<Complex64> {
        self.energies
            .iter()
            .map(|&e| Complex64::from_polar(1.0, -e * dt))
            .collect()
    }

    /// Seeded rough data supported on the continuous subspace: coefficients
    /// drawn N(0,1), damped exp(-e_k/4) in energy, then scaled to the given
    /// L2 size.  Deterministic in `seed`.
    pub fn continuum_noise(&self, seed: u64, l2_size: f64) -> RadialField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.len();
        let mut coeffs = vec![Complex64::ZERO; n];
        for (k, c) in coeffs.iter_mut().enumerate().skip(self.n_bound) {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            let damp = (-self.energies[k] / 4.0).exp();
            *c = Complex64::new(re, im) * damp;
        }
        let mut field = self.synthesize(&coeffs);
        let norm = field.norm();
        if norm > 0.0 {
            field.scale(Complex64::new(l2_size / norm, 0.0));
        }
        field
    }
}

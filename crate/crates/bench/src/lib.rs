//! Shared fixtures for the solver benchmarks.

use nlslab::bound::{BoundStateFamily, BranchKind};
use nlslab::grid::{RadialField, RadialGrid};
use nlslab::ham::{Hamiltonian, Potential};
use nlslab::spectral::LinearSpectrum;
use num_complex::Complex64;

pub const DEPTH: f64 = 41.0;
pub const WIDTH: f64 = 1.0;

pub fn hamiltonian(r_max: f64, n: usize) -> Hamiltonian {
    let grid = RadialGrid::new(r_max, n).unwrap();
    Hamiltonian::new(
        grid,
        &Potential::GaussianWell {
            depth: DEPTH,
            width: WIDTH,
        },
    )
    .unwrap()
}

pub fn spectrum(r_max: f64, n: usize) -> LinearSpectrum {
    LinearSpectrum::build(&hamiltonian(r_max, n)).unwrap()
}

pub fn excited_family(ham: &Hamiltonian, top: f64) -> BoundStateFamily {
    let params = BoundStateFamily::even_params(top, 0.1);
    BoundStateFamily::continue_family(ham, BranchKind::Excited, 1.0, &params).unwrap()
}

/// A beating two-mode state with a little continuum on top.
pub fn beating_state(spec: &LinearSpectrum) -> RadialField {
    let mut f = spec.continuum_noise(11, 0.01);
    f.axpy_real(Complex64::new(0.9, 0.0), spec.phi1());
    f.axpy_real(Complex64::new(0.05, 0.0), spec.phi0());
    f
}

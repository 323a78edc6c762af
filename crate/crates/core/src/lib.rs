//! Numerical laboratory for the radial cubic Schrodinger equation with an
//! attractive well supporting exactly two bound states.

pub mod bound;
pub mod classify;
pub mod decomp;
pub mod design;
pub mod error;
pub mod fermi;
pub mod fits;
pub mod grid;
pub mod ham;
pub mod inequalities;
pub mod nf;
pub mod ode;
pub mod profiles;
pub mod propagate;
pub mod spectral;
pub mod tridiag;

pub use bound::{BoundStateFamily, BranchKind};
pub use classify::{classify, classify_trajectory, ClassificationReport, ClassifierParams, Outcome};
pub use decomp::{decompose, recompose, Decomposition};
pub use design::{design_for_margin, design_potential, two_level_window, DesignConfig, DesignReport};
pub use error::{LabError, Result};
pub use grid::{RadialField, RadialGrid};
pub use ham::{BoundModes, Hamiltonian, Potential};
pub use num_complex::Complex64;
pub use propagate::{AbsorberSpec, Propagator, Trajectory};
pub use spectral::LinearSpectrum;

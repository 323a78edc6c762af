//! Radial Schrodinger operator -d^2/dr^2 + V(r) acting on reduced waves
//! w = r u with Dirichlet walls, discretized with the standard three-point
//! stencil on a [`RadialGrid`].

use crate::error::{LabError, Result};
use crate::grid::{RadialField, RadialGrid};
use crate::tridiag::{SymTridiag, TriFactor};
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    /// -depth * exp(-(r/width)^2)
    GaussianWell { depth: f64, width: f64 },
    /// V = 0 everywhere.
    Free,
    /// Arbitrary values on the grid nodes.
    Tabulated(Vec<f64>),
}

impl Potential {
    pub fn sample(&self, grid: &RadialGrid) -> Result<Vec<f64>> {
        let vals: Vec<f64> = match self {
            Potential::GaussianWell { depth, width } => {
                if !(*width > 0.0) || !depth.is_finite() {
                    return Err(LabError::BadPotential(format!(
                        "gaussian well needs finite depth and positive width, \
                         got depth {depth}, width {width}"
                    )));
                }
                grid.nodes()
                    .iter()
                    .map(|&r| -depth * (-(r / width) * (r / width)).exp())
                    .collect()
            }
            Potential::Free => vec![0.0; grid.len()],
            Potential::Tabulated(v) => {
                if v.len() != grid.len() {
                    return Err(LabError::GridMismatch {
                        expected: grid.len(),
                        got: v.len(),
                    });
                }
                v.clone()
            }
        };
        if let Some((i, bad)) = vals.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(LabError::BadPotential(format!(
                "potential value {bad} at r = {}",
                grid.node(i)
            )));
        }
        Ok(vals)
    }
}

/// Discrete bound modes of the linear operator: the two lowest eigenpairs,
/// L2-normalized in the reduced representation, with the largest-magnitude
/// component of each made positive.
#[derive(Debug, Clone)]
pub struct BoundModes {
    pub e0: f64,
    pub e1: f64,
    /// Total number of discrete (negative-energy) levels found.
    pub n_bound: usize,
    pub phi0: Vec<f64>,
    pub phi1: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Hamiltonian {
    grid: RadialGrid,
    potential: Vec<f64>,
    op: SymTridiag,
}

impl Hamiltonian {
    pub fn new(grid: RadialGrid, potential: &Potential) -> Result<Self> {
        let v = potential.sample(&grid)?;
        let inv_dr2 = 1.0 / (grid.dr() * grid.dr());
        let diag: Vec<f64> = v.iter().map(|&vi| 2.0 * inv_dr2 + vi).collect();
        let off = vec![-inv_dr2; grid.len() - 1];
        let op = SymTridiag::new(diag, off)?;
        Ok(Self {
            grid,
            potential: v,
            op,
        })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn operator(&self) -> &SymTridiag {
        &self.op
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn apply(&self, f: &RadialField) -> RadialField {
        let mut out = vec![Complex64::ZERO; f.len()];
        self.op.apply(f.as_slice(), &mut out);
        RadialField::from_reduced(out)
    }

    pub fn count_below(&self, x: f64) -> usize {
        self.op.count_below(x)
    }

    pub fn eigenvalue(&self, k: usize) -> Result<f64> {
        self.op.eigenvalue(k)
    }

    /// Extract the two lowest modes; errors unless the discrete spectrum has
    /// at least two levels.
    pub fn bound_modes(&self) -> Result<BoundModes> {
        let n_bound = self.op.count_below(0.0);
        if n_bound < 2 {
            return Err(LabError::MissingBoundStates { found: n_bound });
        }
        let (e0, phi0) = self.op.eigenpair(0)?;
        let (e1, phi1) = self.op.eigenpair(1)?;
        Ok(BoundModes {
            e0,
            e1,
            n_bound,
            phi0,
            phi1,
        })
    }

    /// Factor (H - z) for resolvent work.  For shifts at or near a discrete
    /// eigenvalue the caller must project the discrete modes out of the data
    /// before and after solving.
    pub fn shifted_factor(&self, z: Complex64) -> Result<TriFactor<Complex64>> {
        self.op.factor(z)
    }
}

//! Uniform radial grid and the reduced field representation.
//!
//! Spherically symmetric fields u(r) are stored through the reduced wave
//! w(r) = r u(r), sampled on interior nodes r_i = i dr and rescaled so that
//! the continuum pairing <f, g> = int conj(f) g 4 pi r^2 dr becomes the plain
//! vector dot product.  Concretely a [`RadialField`] holds
//! `w_i = sqrt(4 pi dr) * r_i * u(r_i)`, and both endpoints r = 0, r = r_max
//! carry implicit Dirichlet zeros.

use crate::error::{LabError, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Uniform grid on (0, r_max) with `n` interior nodes, r_i = i dr,
/// dr = r_max / (n + 1).
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    r_max: f64,
    dr: f64,
    nodes: Vec<f64>,
}

impl RadialGrid {
    pub fn new(r_max: f64, n: usize) -> Result<Self> {
        if !(r_max > 0.0) || !r_max.is_finite() {
            return Err(LabError::InvalidInput(format!(
                "domain radius must be positive and finite, got {r_max}"
            )));
        }
        if n < 8 {
            return Err(LabError::InvalidInput(format!(
                "grid needs at least 8 interior nodes, got {n}"
            )));
        }
        let dr = r_max / (n + 1) as f64;
        let nodes = (1..=n).map(|i| i as f64 * dr).collect();
        Ok(Self { r_max, dr, nodes })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn dr(&self) -> f64 {
        self.dr
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    /// Conversion factor c with w_i = c r_i u(r_i).
    pub fn field_scale(&self) -> f64 {
        (4.0 * PI * self.dr).sqrt()
    }

    /// 1 / (c r_i)^2 for every node; multiplying |w_i|^2 by this gives |u_i|^2.
    pub fn inverse_scale_sq(&self) -> Vec<f64> {
        let c = self.field_scale();
        self.nodes.iter().map(|&r| 1.0 / (c * r * (c * r))).collect()
    }

    pub fn same_shape(&self, other: &RadialGrid) -> bool {
        self.len() == other.len() && (self.r_max - other.r_max).abs() < 1e-12 * self.r_max
    }
}

/// Complex radial field in the reduced representation described in the
/// module docs.  The plain dot product of two of these equals the physical
/// L2 pairing of the underlying fields.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    data: Vec<Complex64>,
}

impl RadialField {
    pub fn zeros(n: usize) -> Self {
        Self {
            data: vec![Complex64::ZERO; n],
        }
    }

    pub fn from_reduced(data: Vec<Complex64>) -> Self {
        Self { data }
    }

    /// Reduce a real profile (already in w form) to a complex field.
    pub fn from_real_reduced(w: &[f64]) -> Self {
        Self {
            data: w.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    /// Sample physical field values u(r) on the grid nodes.
    pub fn from_field_values<F: Fn(f64) -> Complex64>(grid: &RadialGrid, u: F) -> Self {
        let c = grid.field_scale();
        Self {
            data: grid.nodes().iter().map(|&r| c * r * u(r)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_reduced(self) -> Vec<Complex64> {
        self.data
    }

    /// Physical field values u(r_i) = w_i / (c r_i).
    pub fn field_values(&self, grid: &RadialGrid) -> Vec<Complex64> {
        let c = grid.field_scale();
        self.data
            .iter()
            .zip(grid.nodes())
            .map(|(&w, &r)| w / (c * r))
            .collect()
    }

    /// L2 pairing <self, other> with the conjugate on `self`.
    pub fn inner(&self, other: &RadialField) -> Complex64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Pairing against a real reduced profile.
    pub fn inner_real(&self, profile: &[f64]) -> Complex64 {
        self.data
            .iter()
            .zip(profile)
            .map(|(a, &p)| a.conj() * p)
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&mut self, a: Complex64) {
        for v in &mut self.data {
            *v *= a;
        }
    }

    pub fn scaled(&self, a: Complex64) -> Self {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    /// self += a * x
    pub fn axpy(&mut self, a: Complex64, x: &RadialField) {
        for (s, &v) in self.data.iter_mut().zip(&x.data) {
            *s += a * v;
        }
    }

    /// self += a * p for a real profile p.
    pub fn axpy_real(&mut self, a: Complex64, p: &[f64]) {
        for (s, &v) in self.data.iter_mut().zip(p) {
            *s += a * v;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

impl std::ops::Add<&RadialField> for &RadialField {
    type Output = RadialField;
    fn add(self, rhs: &RadialField) -> RadialField {
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a + b)
            .collect();
        RadialField { data }
    }
}

impl std::ops::Sub<&RadialField> for &RadialField {
    type Output = RadialField;
    fn sub(self, rhs: &RadialField) -> RadialField {
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a - b)
            .collect();
        RadialField { data }
    }
}

//! Choosing a well that holds exactly two levels, comfortably.
//!
//! For the Gaussian family depth * exp(-(r/width)^2), the number of
//! levels is monotone in the depth, so the depths at which the second and
//! third levels are born bracket the usable window.  A design is accepted
//! only when the well sits away from both window edges and the beat
//! energy 2 e1 - e0 lands inside the continuum with a real margin.

use crate::error::{LabError, Result};
use crate::grid::RadialGrid;
use crate::ham::{Hamiltonian, Potential};

#[derive(Debug, Clone, Copy)]
pub struct DesignConfig {
    pub depth: f64,
    pub width: f64,
    /// Reference box used to resolve near-threshold levels.
    pub r_max: f64,
    pub n: usize,
    /// Required beat margin: (2 e1 - e0) / |e0|.
    pub margin_floor: f64,
    /// Required relative distance of the depth to each window edge.
    pub edge_buffer: f64,
}

impl Default for DesignConfig {
    fn default() -> Self {
        Self {
            depth: 41.0,
            width: 1.0,
            r_max: 120.0,
            n: 4000,
            margin_floor: 0.1,
            edge_buffer: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DesignReport {
    pub depth: f64,
    pub width: f64,
    /// Depth range with exactly two levels, at this width.
    pub window: (f64, f64),
    /// Relative distance of the depth to the nearer window edge.
    pub edge_distance: f64,
    pub e0: f64,
    pub e1: f64,
    pub beat: f64,
    /// beat / |e0|.
    pub margin: f64,
}

fn level_count(depth: f64, width: f64, grid: &RadialGrid) -> Result<usize> {
    let ham = Hamiltonian::new(
        grid.clone(),
        &Potential::GaussianWell { depth, width },
    )?;
    Ok(ham.count_below(0.0))
}

/// Smallest depth at which the well holds at least `k` levels, by
/// bisection on a bracket.
fn birth_depth(k: usize, width: f64, grid: &RadialGrid) -> Result<f64> {
    let mut lo = 1e-3;
    let mut hi = 400.0 / (width * width);
    if level_count(lo, width, grid)? >= k {
        return Err(LabError::DesignFailed(format!(
            "level {k} already present at vanishing depth"
        )));
    }
    if level_count(hi, width, grid)? < k {
        return Err(LabError::DesignFailed(format!(
            "level {k} not reachable within the probed depth range"
        )));
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if level_count(mid, width, grid)? >= k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Depth window holding exactly two levels at the given width.
pub fn two_level_window(width: f64, r_max: f64, n: usize) -> Result<(f64, f64)> {
    if !(width.is_finite() && width > 0.0) {
        return Err(LabError::BadPotential(format!(
            "width must be positive, got {width}"
        )));
    }
    let grid = RadialGrid::new(r_max, n)?;
    let lo = birth_depth(2, width, &grid)?;
    let hi = birth_depth(3, width, &grid)?;
    Ok((lo, hi))
}

/// Find a depth by bisection whose beat margin meets `target`, staying
/// buffered away from the window edges.  The margin shrinks as the well
/// deepens, so the feasible depths form an interval at the shallow end;
/// the midpoint of that interval is returned for robustness.
pub fn design_for_margin(target: f64, width: f64, cfg: &DesignConfig) -> Result<DesignReport> {
    if !(target > 0.0 && target < 0.5) {
        return Err(LabError::InvalidInput(format!(
            "margin target must lie in (0, 0.5), got {target}"
        )));
    }
    let window = two_level_window(width, cfg.r_max, cfg.n)?;
    let span = window.1 - window.0;
    let lo = window.0 + cfg.edge_buffer * span;
    let hi = window.1 - cfg.edge_buffer * span;
    let grid = RadialGrid::new(cfg.r_max, cfg.n)?;
    let margin_at = |depth: f64| -> Result<f64> {
        let ham = Hamiltonian::new(
            grid.clone(),
            &Potential::GaussianWell { depth, width },
        )?;
        let modes = ham.bound_modes()?;
        Ok((2.0 * modes.e1 - modes.e0) / modes.e0.abs())
    };
    if margin_at(lo)? < target {
        return Err(LabError::DesignFailed(format!(
            "no buffered depth at width {width} reaches beat margin {target}"
        )));
    }
    // deepest feasible depth, by bisection on the decreasing margin
    let deepest = if margin_at(hi)? >= target {
        hi
    } else {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..60 {
            let mid = 0.5 * (a + b);
            if margin_at(mid)? >= target {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    };
    design_potential(&DesignConfig {
        depth: 0.5 * (lo + deepest),
        width,
        margin_floor: target,
        ..*cfg
    })
}

/// Validate a candidate well, or say exactly why it will not do.
pub fn design_potential(cfg: &DesignConfig) -> Result<DesignReport> {
    if !(cfg.depth.is_finite() && cfg.depth > 0.0) {
        return Err(LabError::BadPotential(format!(
            "depth must be positive, got {}",
            cfg.depth
        )));
    }
    let window = two_level_window(cfg.width, cfg.r_max, cfg.n)?;
    let grid = RadialGrid::new(cfg.r_max, cfg.n)?;
    let ham = Hamiltonian::new(
        grid,
        &Potential::GaussianWell {
            depth: cfg.depth,
            width: cfg.width,
        },
    )?;
    let found = ham.count_below(0.0);
    if found != 2 {
        return Err(LabError::DesignFailed(format!(
            "depth {} holds {found} levels; the two-level window is ({:.4}, {:.4})",
            cfg.depth, window.0, window.1
        )));
    }
    let span = window.1 - window.0;
    let edge_distance = (cfg.depth - window.0).min(window.1 - cfg.depth) / span;
    if edge_distance < cfg.edge_buffer {
        return Err(LabError::DesignFailed(format!(
            "depth {} sits {:.3} of the window span from an edge; need {:.3}",
            cfg.depth, edge_distance, cfg.edge_buffer
        )));
    }
    let modes = ham.bound_modes()?;
    let beat = 2.0 * modes.e1 - modes.e0;
    let margin = beat / modes.e0.abs();
    if !(beat > 0.0 && margin >= cfg.margin_floor) {
        return Err(LabError::DesignFailed(format!(
            "beat energy {beat:.4} has margin {margin:.4}; need {:.3}",
            cfg.margin_floor
        )));
    }
    Ok(DesignReport {
        depth: cfg.depth,
        width: cfg.width,
        window,
        edge_distance,
        e0: modes.e0,
        e1: modes.e1,
        beat,
        margin,
    })
}

//! Experiment configuration: flat `key = value` sections, TOML syntax.
//!
//! Every field has a default, so an empty file (or no file) is a valid
//! experiment. `alpha = 0.0` in `[classify]` means "measure it from the
//! record"; any other value pins the data-size parameter by hand.

use anyhow::{bail, Context, Result};
use nlslab::classify::ClassifierParams;
use nlslab::fermi::ProbeConfig;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct LabConfig {
    pub potential: PotentialSection,
    pub grid: GridSection,
    pub coupling: CouplingSection,
    pub family: FamilySection,
    pub initial: InitialSection,
    pub run: RunSection,
    pub free: FreeSection,
    pub probe: ProbeSection,
    pub classify: ClassifySection,
    pub inequalities: InequalitySection,
    pub sweep: SweepSection,
}

impl Default for LabConfig {
    fn default() -> Self {
        Self {
            potential: PotentialSection::default(),
            grid: GridSection::default(),
            coupling: CouplingSection::default(),
            family: FamilySection::default(),
            initial: InitialSection::default(),
            run: RunSection::default(),
            free: FreeSection::default(),
            probe: ProbeSection::default(),
            classify: ClassifySection::default(),
            inequalities: InequalitySection::default(),
            sweep: SweepSection::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct PotentialSection {
    /// Only "gaussian" is understood.
    pub form: String,
    pub depth: f64,
    pub width: f64,
    /// When true, `depth` is replaced by a designed value before anything
    /// else runs.
    pub auto_design: bool,
    pub design_margin: f64,
}

impl Default for PotentialSection {
    fn default() -> Self {
        Self {
            form: "gaussian".into(),
            depth: 41.0,
            width: 1.0,
            auto_design: false,
            design_margin: 0.1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub r_max: f64,
    pub n: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { r_max: 64.0, n: 2000 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct CouplingSection {
    pub lambda: f64,
}

impl Default for CouplingSection {
    fn default() -> Self {
        Self { lambda: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct FamilySection {
    /// Largest branch parameter continued to.
    pub top: f64,
    pub step: f64,
}

impl Default for FamilySection {
    fn default() -> Self {
        Self { top: 1.5, step: 0.1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct InitialSection {
    /// One of "ground+noise", "excited+ground-seed", "dispersive-packet",
    /// "custom-coefficients".
    pub tag: String,
    /// Excited branch parameter for "excited+ground-seed".
    pub m: f64,
    /// Ground seed as a fraction of `m`; used when `x0` is zero.
    pub seed_fraction: f64,
    pub x0: f64,
    pub y0: f64,
    /// L2 size of the seeded continuum noise for "ground+noise".
    pub noise: f64,
    pub packet_amplitude: f64,
    pub packet_width: f64,
    pub packet_center: f64,
}

impl Default for InitialSection {
    fn default() -> Self {
        Self {
            tag: "excited+ground-seed".into(),
            m: 1.3,
            seed_fraction: 0.1,
            x0: 0.0,
            y0: 0.0,
            noise: 0.0,
            packet_amplitude: 0.05,
            packet_width: 2.5,
            packet_center: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub t_final: f64,
    pub dt: f64,
    pub stride: f64,
    pub absorber: bool,
    pub absorber_strength: f64,
    /// Radius fraction where the damping layer starts.
    pub absorber_start: f64,
    /// Localization exponent r1 in the weight <r>^(-2 r1).
    pub weight_r1: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            t_final: 40.0,
            dt: 0.01,
            stride: 0.25,
            absorber: true,
            absorber_strength: 10.0,
            absorber_start: 0.8,
            weight_r1: 4.0,
        }
    }
}

/// Sampling window for the free-flow decay fit.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct FreeSection {
    pub t_lo: f64,
    pub t_hi: f64,
    pub points: usize,
}

impl Default for FreeSection {
    fn default() -> Self {
        Self {
            t_lo: 10.0,
            t_hi: 100.0,
            points: 30,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSection {
    pub r_max: f64,
    pub n: usize,
    pub ladder_lo: f64,
    pub ladder_hi: f64,
    pub ladder_points: usize,
    pub extrapolation_points: usize,
    pub disagreement_limit: f64,
    pub window_span: f64,
    pub window_points: usize,
    pub window_ladder_points: usize,
    pub window_floor: f64,
}

impl Default for ProbeSection {
    fn default() -> Self {
        let p = ProbeConfig::default();
        Self {
            r_max: 800.0,
            n: 15999,
            ladder_lo: p.ladder_lo,
            ladder_hi: p.ladder_hi,
            ladder_points: p.ladder_points,
            extrapolation_points: p.extrapolation_points,
            disagreement_limit: p.disagreement_limit,
            window_span: p.window_span,
            window_points: p.window_points,
            window_ladder_points: p.window_ladder_points,
            window_floor: p.window_floor,
        }
    }
}

impl ProbeSection {
    pub fn probe_config(&self) -> ProbeConfig {
        ProbeConfig {
            ladder_lo: self.ladder_lo,
            ladder_hi: self.ladder_hi,
            ladder_points: self.ladder_points,
            extrapolation_points: self.extrapolation_points,
            disagreement_limit: self.disagreement_limit,
            window_span: self.window_span,
            window_points: self.window_points,
            window_ladder_points: self.window_ladder_points,
            window_floor: self.window_floor,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifySection {
    pub delta: f64,
    pub iota: f64,
    pub epsilon: f64,
    pub x_fraction: f64,
    /// 0.0 means: take the measured data size from the record.
    pub alpha: f64,
    /// Transfer rate used to normalize the fitted growth; 0.0 skips the
    /// normalization.
    pub gamma: f64,
    pub min_fit_points: usize,
    pub decay_slope_max: f64,
}

impl Default for ClassifySection {
    fn default() -> Self {
        let p = ClassifierParams::default();
        Self {
            delta: p.delta,
            iota: p.iota,
            epsilon: p.epsilon,
            x_fraction: p.x_fraction,
            alpha: 0.0,
            gamma: p.gamma,
            min_fit_points: p.min_fit_points,
            decay_slope_max: p.decay_slope_max,
        }
    }
}

impl ClassifySection {
    pub fn params(&self) -> ClassifierParams {
        ClassifierParams {
            delta: self.delta,
            iota: self.iota,
            epsilon: self.epsilon,
            x_fraction: self.x_fraction,
            alpha: if self.alpha > 0.0 { Some(self.alpha) } else { None },
            gamma: self.gamma,
            min_fit_points: self.min_fit_points,
            decay_slope_max: self.decay_slope_max,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct InequalitySection {
    pub samples: usize,
}

impl Default for InequalitySection {
    fn default() -> Self {
        Self { samples: 2000 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// Dotted path of the field to vary, e.g. "initial.x0".
    pub axis: String,
    pub values: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            axis: "initial.x0".into(),
            values: Vec::new(),
        }
    }
}

impl LabConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let cfg = match path {
            None => Self::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                toml::from_str(&text)
                    .with_context(|| format!("parsing config {}", p.display()))?
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.potential.form != "gaussian" {
            bail!("unknown potential form {:?}", self.potential.form);
        }
        if !(self.potential.depth > 0.0 && self.potential.width > 0.0) {
            bail!("potential depth and width must be positive");
        }
        if !(0.0 < self.potential.design_margin && self.potential.design_margin < 0.5) {
            bail!("design margin must lie in (0, 0.5)");
        }
        if !(self.grid.r_max > 0.0) || self.grid.n < 16 {
            bail!("grid needs a positive box and at least 16 nodes");
        }
        if !(self.run.dt > 0.0 && self.run.stride > 0.0) {
            bail!("dt and stride must be positive");
        }
        if self.run.t_final < 0.0 {
            bail!("t_final must be non-negative");
        }
        if !KNOWN_TAGS.contains(&self.initial.tag.as_str()) {
            bail!(
                "unknown initial-data tag {:?}; expected one of {}",
                self.initial.tag,
                KNOWN_TAGS.join(", ")
            );
        }
        if self.family.top <= 0.0 || self.family.step <= 0.0 {
            bail!("family top and step must be positive");
        }
        Ok(())
    }

    /// Set one numeric field through its dotted path; the sweep axis goes
    /// through here.
    pub fn set_axis(&mut self, path: &str, value: f64) -> Result<()> {
        match path {
            "potential.depth" => self.potential.depth = value,
            "potential.width" => self.potential.width = value,
            "coupling.lambda" => self.coupling.lambda = value,
            "initial.m" => self.initial.m = value,
            "initial.seed_fraction" => self.initial.seed_fraction = value,
            "initial.x0" => self.initial.x0 = value,
            "initial.y0" => self.initial.y0 = value,
            "initial.noise" => self.initial.noise = value,
            "initial.packet_amplitude" => self.initial.packet_amplitude = value,
            "initial.packet_width" => self.initial.packet_width = value,
            "run.dt" => self.run.dt = value,
            "run.t_final" => self.run.t_final = value,
            _ => bail!("sweep axis {path:?} does not name a numeric field"),
        }
        Ok(())
    }
}

pub const KNOWN_TAGS: [&str; 4] = [
    "ground+noise",
    "excited+ground-seed",
    "dispersive-packet",
    "custom-coefficients",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_is_the_default() {
        let parsed: LabConfig = toml::from_str("").unwrap();
        assert_eq!(parsed, LabConfig::default());
        parsed.validate().unwrap();
    }

    #[test]
    fn sections_override_fields() {
        let parsed: LabConfig = toml::from_str(
            "[initial]\ntag = \"dispersive-packet\"\npacket_amplitude = 0.02\n\n[run]\nt_final = 5.0\nabsorber = false\n",
        )
        .unwrap();
        assert_eq!(parsed.initial.tag, "dispersive-packet");
        assert_eq!(parsed.initial.packet_amplitude, 0.02);
        assert_eq!(parsed.run.t_final, 5.0);
        assert!(!parsed.run.absorber);
        assert_eq!(parsed.grid.n, 2000);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<LabConfig>("[run]\ndt_max = 1.0\n").is_err());
    }

    #[test]
    fn bad_tag_fails_validation() {
        let mut cfg = LabConfig::default();
        cfg.initial.tag = "solitons".into();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn axis_paths_cover_the_advertised_fields() {
        let mut cfg = LabConfig::default();
        for path in [
            "potential.depth",
            "coupling.lambda",
            "initial.m",
            "initial.seed_fraction",
            "initial.x0",
            "run.dt",
            "run.t_final",
        ] {
            cfg.set_axis(path, 0.5).unwrap();
        }
        assert_eq!(cfg.run.dt, 0.5);
        assert!(cfg.set_axis("grid.n", 100.0).is_err());
    }
}

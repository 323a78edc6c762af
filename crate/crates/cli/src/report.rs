//! Output plumbing: CSV tables with `# key = value` metadata lines, and
//! the key: value report blocks printed per verb.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! re-read reproduces the exact bits and identical runs produce identical
//! bytes.

use anyhow::{bail, Context, Result};
use nlslab::classify::{ClassificationReport, Crossing, Outcome};
use nlslab::propagate::Trajectory;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    match s {
        "nan" => Ok(f64::NAN),
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => s.parse().with_context(|| format!("bad float {s:?}")),
    }
}

pub fn case_label(outcome: Outcome) -> &'static str {
    match outcome {
        Outcome::Dispersion => "I",
        Outcome::GroundDirect => "II_a",
        Outcome::GroundViaCollapse => "II_b",
        Outcome::ExcitedPersistent => "III",
        Outcome::Inconclusive => "inconclusive",
    }
}

pub fn crossing_str(c: Crossing) -> String {
    match c {
        Crossing::Immediate => "immediate".into(),
        Crossing::At(t) => fmt_f64(t),
        Crossing::Beyond => "beyond".into(),
    }
}

pub fn opt_str(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// One CSV table: metadata lines, a header, string rows.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            meta: Vec::new(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta_entry(&mut self, key: &str, value: impl Into<String>) {
        self.meta.push((key.to_string(), value.into()));
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = String::new();
        for (k, v) in &self.meta {
            writeln!(text, "# {k} = {v}").unwrap();
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        text.push_str(std::str::from_utf8(&w.into_inner()?)?);
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let mut meta = Vec::new();
        for line in text.lines().take_while(|l| l.starts_with('#')) {
            let body = line.trim_start_matches('#').trim();
            if let Some((k, v)) = body.split_once('=') {
                meta.push((k.trim().to_string(), v.trim().to_string()));
            }
        }
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let header = reader
            .headers()?
            .iter()
            .map(|s| s.to_string())
            .collect();
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record?;
            rows.push(record.iter().map(|s| s.to_string()).collect());
        }
        Ok(Self { meta, header, rows })
    }

    pub fn meta_map(&self) -> BTreeMap<&str, &str> {
        self.meta.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect()
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self
            .header
            .iter()
            .position(|h| h == name)
            .with_context(|| format!("missing column {name:?}"))?;
        self.rows.iter().map(|r| parse_f64(&r[idx])).collect()
    }
}

pub const TRAJECTORY_COLUMNS: [&str; 13] = [
    "t", "x_re", "x_im", "x_abs", "y_re", "y_im", "y_abs", "theta", "xi_l2", "xi_local",
    "field_local", "mass", "energy",
];

pub fn trajectory_table(traj: &Trajectory) -> Table {
    let mut table = Table::new(&TRAJECTORY_COLUMNS);
    let m = &traj.meta;
    table.meta_entry("dt", fmt_f64(m.dt));
    table.meta_entry("lambda", fmt_f64(m.lambda));
    table.meta_entry("stride", fmt_f64(m.stride));
    table.meta_entry("steps", m.steps.to_string());
    table.meta_entry("absorber", m.absorber.to_string());
    table.meta_entry("alpha", fmt_f64(m.alpha));
    table.meta_entry("weight_r1", fmt_f64(m.weight_r1));
    for s in &traj.samples {
        table.push_row(vec![
            fmt_f64(s.t),
            fmt_f64(s.x.re),
            fmt_f64(s.x.im),
            fmt_f64(s.x.norm()),
            fmt_f64(s.y.re),
            fmt_f64(s.y.im),
            fmt_f64(s.y.norm()),
            fmt_f64(s.theta),
            fmt_f64(s.xi_l2),
            fmt_f64(s.xi_local),
            fmt_f64(s.field_local),
            fmt_f64(s.mass),
            fmt_f64(s.energy),
        ]);
    }
    table
}

/// The classifier's view of a trajectory file: aligned series plus the
/// recorded data size.
pub struct StoredSeries {
    pub t: Vec<f64>,
    pub x_abs: Vec<f64>,
    pub y_abs: Vec<f64>,
    pub xi_local: Vec<f64>,
    pub alpha: Option<f64>,
}

pub fn read_trajectory(path: &Path) -> Result<StoredSeries> {
    let table = Table::read(path)?;
    for col in TRAJECTORY_COLUMNS {
        if !table.header.iter().any(|h| h == col) {
            bail!("{} is not a trajectory table: missing {col:?}", path.display());
        }
    }
    let alpha = match table.meta_map().get("alpha") {
        Some(v) => Some(parse_f64(v)?),
        None => None,
    };
    Ok(StoredSeries {
        t: table.column("t")?,
        x_abs: table.column("x_abs")?,
        y_abs: table.column("y_abs")?,
        xi_local: table.column("xi_local")?,
        alpha,
    })
}

pub const CLASSIFICATION_COLUMNS: [&str; 15] = [
    "case",
    "alpha",
    "crossing_size",
    "t1",
    "t2",
    "t3",
    "t4",
    "decay_slope",
    "decay_intercept",
    "growth_rate",
    "growth_ratio",
    "transfer_budget",
    "plateau_min",
    "plateau_median",
    "tail_mean",
];

pub fn classification_table(report: &ClassificationReport) -> Table {
    let mut table = Table::new(&CLASSIFICATION_COLUMNS);
    table.push_row(classification_row(report));
    table
}

pub fn classification_row(report: &ClassificationReport) -> Vec<String> {
    vec![
        case_label(report.outcome).to_string(),
        fmt_f64(report.alpha),
        opt_str(report.crossing_size),
        crossing_str(report.t1),
        crossing_str(report.t2),
        opt_str(report.t3),
        opt_str(report.t4),
        opt_str(report.decay_fit.map(|f| f.slope)),
        opt_str(report.decay_fit.map(|f| f.intercept)),
        opt_str(report.growth_fit.map(|f| f.slope)),
        opt_str(report.growth_ratio),
        opt_str(report.transfer_budget),
        opt_str(report.plateau_min),
        opt_str(report.plateau_median),
        opt_str(report.tail_mean),
    ]
}

/// An "inconclusive" classification row for runs too short to classify.
pub fn inconclusive_row(alpha: f64) -> Vec<String> {
    let mut row = vec![String::new(); CLASSIFICATION_COLUMNS.len()];
    row[0] = "inconclusive".into();
    row[1] = fmt_f64(alpha);
    row
}

/// One key: value block of the textual report.
#[derive(Debug, Clone)]
pub struct Block {
    pub name: String,
    pub entries: Vec<(String, String)>,
}

impl Block {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            entries: Vec::new(),
        }
    }

    pub fn entry(&mut self, key: &str, value: impl Into<String>) -> &mut Self {
        self.entries.push((key.to_string(), value.into()));
        self
    }

    pub fn float(&mut self, key: &str, value: f64) -> &mut Self {
        self.entry(key, fmt_f64(value))
    }
}

pub fn render_blocks(blocks: &[Block]) -> String {
    let mut out = String::new();
    for (i, block) in blocks.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        writeln!(out, "[{}]", block.name).unwrap();
        for (k, v) in &block.entries {
            writeln!(out, "{k}: {v}").unwrap();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_round_trips() {
        for &x in &[0.0, -1.5, 1e-17, 2.0 / 3.0, 6.02e23, f64::INFINITY, f64::NAN] {
            let back = parse_f64(&fmt_f64(x)).unwrap();
            assert!(back == x || (back.is_nan() && x.is_nan()));
        }
    }

    #[test]
    fn table_round_trips_through_a_file() {
        let mut table = Table::new(&["t", "value", "note"]);
        table.meta_entry("seed", "42");
        table.meta_entry("rng", "chacha8");
        table.push_row(vec!["0.5".into(), fmt_f64(1.0 / 3.0), "plain".into()]);
        table.push_row(vec!["1".into(), fmt_f64(-2e-9), "commas, quoted".into()]);

        let path = std::env::temp_dir().join(format!("table_rt_{}.csv", std::process::id()));
        table.write(&path).unwrap();
        let back = Table::read(&path).unwrap();
        std::fs::remove_file(&path).ok();

        assert_eq!(back.meta, table.meta);
        assert_eq!(back.header, table.header);
        assert_eq!(back.rows, table.rows);
        assert_eq!(back.column("value").unwrap()[0], 1.0 / 3.0);
    }

    #[test]
    fn labels_and_crossings() {
        assert_eq!(case_label(Outcome::GroundViaCollapse), "II_b");
        assert_eq!(case_label(Outcome::Dispersion), "I");
        assert_eq!(crossing_str(Crossing::Immediate), "immediate");
        assert_eq!(crossing_str(Crossing::At(2.5)), "2.5");
        assert_eq!(crossing_str(Crossing::Beyond), "beyond");
        assert_eq!(opt_str(None), "");
    }
}

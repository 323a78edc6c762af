//! The nine verbs. Each builds what it needs from the config, writes CSV
//! artifacts into the output directory, and returns report blocks.

use crate::config::LabConfig;
use crate::report::{
    case_label, classification_row, classification_table, crossing_str, fmt_f64,
    inconclusive_row, read_trajectory, trajectory_table, Block, Table, CLASSIFICATION_COLUMNS,
};
use anyhow::{Context, Result};
use nlslab::bound::{BoundStateFamily, BranchKind};
use nlslab::classify::{classify, AmplitudeSeries, ClassifierParams};
use nlslab::decomp::{decompose, local_norms};
use nlslab::design::{design_for_margin, design_potential, DesignConfig, DesignReport};
use nlslab::fermi::{resonance_probe, window_scan};
use nlslab::fits::fit_power_law;
use nlslab::grid::{RadialField, RadialGrid};
use nlslab::ham::{Hamiltonian, Potential};
use nlslab::inequalities::verify_all;
use nlslab::propagate::{AbsorberSpec, Propagator};
use nlslab::spectral::LinearSpectrum;
use num_complex::Complex64;
use rayon::prelude::*;
use std::path::{Path, PathBuf};

pub struct Ctx {
    pub cfg: LabConfig,
    pub out: PathBuf,
    pub seed: u64,
}

impl Ctx {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

const RNG_NAME: &str = "chacha8";

fn design_grid(cfg: &LabConfig) -> DesignConfig {
    DesignConfig {
        depth: cfg.potential.depth,
        width: cfg.potential.width,
        margin_floor: cfg.potential.design_margin,
        ..DesignConfig::default()
    }
}

/// The potential actually used by a run. Auto-design replaces the depth;
/// a manual depth is still checked against the two-level window, so a well
/// that cannot carry the mode pair fails as a design error.
fn effective_potential(cfg: &LabConfig) -> Result<(Potential, Option<DesignReport>)> {
    if cfg.potential.auto_design {
        let report = design_for_margin(
            cfg.potential.design_margin,
            cfg.potential.width,
            &design_grid(cfg),
        )?;
        let potential = Potential::GaussianWell {
            depth: report.depth,
            width: report.width,
        };
        Ok((potential, Some(report)))
    } else {
        design_potential(&design_grid(cfg))?;
        Ok((
            Potential::GaussianWell {
                depth: cfg.potential.depth,
                width: cfg.potential.width,
            },
            None,
        ))
    }
}

struct Stack {
    spec: LinearSpectrum,
    family: BoundStateFamily,
    designed: Option<DesignReport>,
}

fn build_stack(cfg: &LabConfig) -> Result<Stack> {
    let (potential, designed) = effective_potential(cfg)?;
    let grid = RadialGrid::new(cfg.grid.r_max, cfg.grid.n)?;
    let ham = Hamiltonian::new(grid, &potential)?;
    let spec = LinearSpectrum::build(&ham)?;
    let top = cfg.family.top.max(cfg.initial.m);
    let params = BoundStateFamily::even_params(top, cfg.family.step);
    let family =
        BoundStateFamily::continue_family(&ham, BranchKind::Excited, cfg.coupling.lambda, &params)?;
    Ok(Stack {
        spec,
        family,
        designed,
    })
}

fn design_block(report: &DesignReport) -> Block {
    let mut b = Block::new("design");
    b.float("depth", report.depth)
        .float("width", report.width)
        .float("window_lo", report.window.0)
        .float("window_hi", report.window.1)
        .float("edge_distance", report.edge_distance)
        .float("e0", report.e0)
        .float("e1", report.e1)
        .float("beat", report.beat)
        .float("margin", report.margin);
    b
}

/// Build the initial field for the configured tag. Returns the field and
/// the metadata describing it.
fn initial_state(
    cfg: &LabConfig,
    stack: &Stack,
    seed: u64,
) -> Result<(RadialField, Vec<(String, String)>)> {
    let ini = &cfg.initial;
    let spec = &stack.spec;
    let mut meta: Vec<(String, String)> = vec![
        ("tag".into(), ini.tag.clone()),
        ("rng".into(), RNG_NAME.into()),
        ("seed".into(), seed.to_string()),
    ];
    let field = match ini.tag.as_str() {
        "ground+noise" => {
            let mut f = RadialField::zeros(spec.len());
            f.axpy_real(Complex64::new(ini.x0, 0.0), spec.phi0());
            f.axpy_real(Complex64::new(ini.y0, 0.0), spec.phi1());
            if ini.noise > 0.0 {
                let rough = spec.continuum_noise(seed, ini.noise);
                f.axpy(Complex64::ONE, &rough);
            }
            meta.push(("x0".into(), fmt_f64(ini.x0)));
            meta.push(("y0".into(), fmt_f64(ini.y0)));
            meta.push(("noise".into(), fmt_f64(ini.noise)));
            f
        }
        "excited+ground-seed" => {
            let seed_amp = if ini.x0 != 0.0 {
                ini.x0
            } else {
                ini.seed_fraction * ini.m
            };
            let mut f = stack.family.eval(Complex64::new(ini.m, 0.0))?;
            f.axpy_real(Complex64::new(seed_amp, 0.0), spec.phi0());
            meta.push(("m".into(), fmt_f64(ini.m)));
            meta.push(("ground_seed".into(), fmt_f64(seed_amp)));
            f
        }
        "dispersive-packet" => {
            let grid = spec.grid();
            let (w, c) = (ini.packet_width, ini.packet_center);
            let bump = RadialField::from_field_values(grid, |r| {
                Complex64::new((-((r - c) / w).powi(2)).exp(), 0.0)
            });
            let mut f = spec.project_continuous(&bump);
            let norm = f.norm();
            if norm == 0.0 {
                anyhow::bail!("packet projects to zero on the continuous subspace");
            }
            f.scale(Complex64::new(ini.packet_amplitude / norm, 0.0));
            meta.push(("packet_amplitude".into(), fmt_f64(ini.packet_amplitude)));
            meta.push(("packet_width".into(), fmt_f64(w)));
            meta.push(("packet_center".into(), fmt_f64(c)));
            f
        }
        "custom-coefficients" => {
            let mut f = RadialField::zeros(spec.len());
            f.axpy_real(Complex64::new(ini.x0, 0.0), spec.phi0());
            f.axpy_real(Complex64::new(ini.y0, 0.0), spec.phi1());
            meta.push(("x0".into(), fmt_f64(ini.x0)));
            meta.push(("y0".into(), fmt_f64(ini.y0)));
            f
        }
        other => anyhow::bail!("unknown initial-data tag {other:?}"),
    };
    if field.norm() == 0.0 {
        anyhow::bail!("initial data is identically zero; set amplitudes in [initial]");
    }
    Ok((field, meta))
}

fn classifier_params(cfg: &LabConfig) -> ClassifierParams {
    cfg.classify.params()
}

pub fn cmd_design_potential(ctx: &Ctx) -> Result<Vec<Block>> {
    let cfg = &ctx.cfg;
    let report = design_for_margin(
        cfg.potential.design_margin,
        cfg.potential.width,
        &design_grid(cfg),
    )?;
    let mut table = Table::new(&[
        "depth",
        "width",
        "window_lo",
        "window_hi",
        "edge_distance",
        "e0",
        "e1",
        "beat",
        "margin",
    ]);
    table.meta_entry("target_margin", fmt_f64(cfg.potential.design_margin));
    table.push_row(vec![
        fmt_f64(report.depth),
        fmt_f64(report.width),
        fmt_f64(report.window.0),
        fmt_f64(report.window.1),
        fmt_f64(report.edge_distance),
        fmt_f64(report.e0),
        fmt_f64(report.e1),
        fmt_f64(report.beat),
        fmt_f64(report.margin),
    ]);
    table.write(&ctx.path("design.csv"))?;
    Ok(vec![design_block(&report)])
}

pub fn cmd_spectrum(ctx: &Ctx) -> Result<Vec<Block>> {
    let cfg = &ctx.cfg;
    let (potential, designed) = effective_potential(cfg)?;
    let grid = RadialGrid::new(cfg.grid.r_max, cfg.grid.n)?;
    let ham = Hamiltonian::new(grid, &potential)?;
    let modes = ham.bound_modes()?;
    let grid = ham.grid();

    // physical-field values u = w / (c r), with u(0) extrapolated
    let scale = grid.field_scale();
    let u_at = |phi: &[f64], i: usize| phi[i] / (scale * grid.node(i));
    let u_origin = |phi: &[f64]| (4.0 * u_at(phi, 0) - u_at(phi, 1)) / 3.0;

    let mut table = Table::new(&["r", "w0", "w1", "u0", "u1"]);
    table.meta_entry("depth", fmt_f64(potential_depth(&potential)));
    table.meta_entry("width", fmt_f64(cfg.potential.width));
    table.meta_entry("e0", fmt_f64(modes.e0));
    table.meta_entry("e1", fmt_f64(modes.e1));
    for i in 0..grid.len() {
        table.push_row(vec![
            fmt_f64(grid.node(i)),
            fmt_f64(modes.phi0[i]),
            fmt_f64(modes.phi1[i]),
            fmt_f64(u_at(&modes.phi0, i)),
            fmt_f64(u_at(&modes.phi1, i)),
        ]);
    }
    table.write(&ctx.path("modes.csv"))?;

    let beat = 2.0 * modes.e1 - modes.e0;
    let loc0 = local_norms(grid, &RadialField::from_real_reduced(&modes.phi0), cfg.run.weight_r1);
    let loc1 = local_norms(grid, &RadialField::from_real_reduced(&modes.phi1), cfg.run.weight_r1);

    let mut b = Block::new("spectrum");
    b.entry("n_bound", modes.n_bound.to_string())
        .float("e0", modes.e0)
        .float("e1", modes.e1)
        .float("beat", beat)
        .float("margin", beat / modes.e0.abs())
        .entry("beat_in_continuum", (beat > 0.0).to_string())
        .float("u0_origin", u_origin(&modes.phi0))
        .float("u1_origin", u_origin(&modes.phi1))
        .float("phi0_local_ratio", loc0.l2_local / loc0.l2)
        .float("phi1_local_ratio", loc1.l2_local / loc1.l2);
    let mut blocks = Vec::new();
    if let Some(d) = designed {
        blocks.push(design_block(&d));
    }
    blocks.push(b);
    Ok(blocks)
}

fn potential_depth(p: &Potential) -> f64 {
    match p {
        Potential::GaussianWell { depth, .. } => *depth,
        _ => f64::NAN,
    }
}

pub fn cmd_families(ctx: &Ctx) -> Result<Vec<Block>> {
    let cfg = &ctx.cfg;
    let (potential, designed) = effective_potential(cfg)?;
    let grid = RadialGrid::new(cfg.grid.r_max, cfg.grid.n)?;
    let ham = Hamiltonian::new(grid, &potential)?;
    let params = BoundStateFamily::even_params(cfg.family.top, cfg.family.step);

    let mut table = Table::new(&[
        "branch",
        "param",
        "energy",
        "residual",
        "iterations",
        "energy_slope",
        "c1",
        "profile_sensitivity",
    ]);
    table.meta_entry("lambda", fmt_f64(cfg.coupling.lambda));

    let mut blocks: Vec<Block> = designed.as_ref().map(design_block).into_iter().collect();
    for (label, kind) in [("ground", BranchKind::Ground), ("excited", BranchKind::Excited)] {
        let family = BoundStateFamily::continue_family(&ham, kind, cfg.coupling.lambda, &params)?;
        let derivs = family.derivatives(&ham)?;
        let deriv_at = |p: f64| derivs.iter().find(|d| d.param == p);
        for s in family.samples() {
            let d = deriv_at(s.param);
            table.push_row(vec![
                label.into(),
                fmt_f64(s.param),
                fmt_f64(s.energy),
                fmt_f64(s.residual),
                s.iterations.to_string(),
                d.map(|d| fmt_f64(d.energy_slope)).unwrap_or_default(),
                d.map(|d| fmt_f64(d.c1)).unwrap_or_default(),
                d.map(|d| fmt_f64(d.profile_sensitivity)).unwrap_or_default(),
            ]);
        }
        let fit = family.energy_fit()?;
        let min_lambda_c1 = derivs
            .iter()
            .map(|d| cfg.coupling.lambda * d.c1)
            .filter(|v| v.is_finite())
            .fold(f64::INFINITY, f64::min);
        let mut b = Block::new(&format!("family.{label}"));
        b.float("linear_energy", family.linear_energy())
            .float("fit_linear", fit.linear)
            .float("fit_quadratic", fit.quadratic)
            .float("fit_quartic", fit.quartic)
            .float("fit_residual", fit.relative_residual)
            .float("max_param", family.max_param())
            .float("min_lambda_c1", min_lambda_c1);
        blocks.push(b);
    }
    table.write(&ctx.path("families.csv"))?;
    Ok(blocks)
}

pub fn cmd_gamma0(ctx: &Ctx) -> Result<Vec<Block>> {
    let cfg = &ctx.cfg;
    let (potential, designed) = effective_potential(cfg)?;
    let grid = RadialGrid::new(cfg.probe.r_max, cfg.probe.n)?;
    let ham = Hamiltonian::new(grid, &potential)?;
    let probe_cfg = cfg.probe.probe_config();
    let probe = resonance_probe(&ham, &probe_cfg)?;
    let window = window_scan(&ham, &probe_cfg)?;

    let mut ladder = Table::new(&["sigma", "resolvent_estimate"]);
    ladder.meta_entry("r_max", fmt_f64(cfg.probe.r_max));
    ladder.meta_entry("n", cfg.probe.n.to_string());
    for (s, g) in probe.sigma_ladder.iter().zip(&probe.resolvent_curve) {
        ladder.push_row(vec![fmt_f64(*s), fmt_f64(*g)]);
    }
    ladder.write(&ctx.path("gamma0_ladder.csv"))?;

    let mut win = Table::new(&["shift", "gamma"]);
    for (s, g) in window.shifts.iter().zip(&window.gammas) {
        win.push_row(vec![fmt_f64(*s), fmt_f64(*g)]);
    }
    win.write(&ctx.path("gamma0_window.csv"))?;

    let mut b = Block::new("gamma0");
    b.float("gamma", probe.gamma)
        .float("resolvent_estimate", probe.resolvent_estimate)
        .float("density_estimate", probe.density_estimate)
        .float("disagreement", probe.disagreement)
        .float("beat_energy", probe.beat_energy)
        .float("level_spacing", probe.level_spacing)
        .float("window_min_ratio", window.min_ratio)
        .entry("window_ok", window.ok.to_string());
    let mut blocks: Vec<Block> = designed.as_ref().map(design_block).into_iter().collect();
    blocks.push(b);
    Ok(blocks)
}

/// The full single-run pipeline behind `evolve` and each sweep point.
struct RunOutput {
    trajectory: Table,
    classification_row: Vec<String>,
    blocks: Vec<Block>,
}

fn run_pipeline(cfg: &LabConfig, seed: u64) -> Result<RunOutput> {
    let stack = build_stack(cfg)?;
    let (psi0, init_meta) = initial_state(cfg, &stack, seed)?;
    let absorber = cfg.run.absorber.then_some(AbsorberSpec {
        strength: cfg.run.absorber_strength,
        start_fraction: cfg.run.absorber_start,
    });
    let prop = Propagator::new(&stack.spec, cfg.coupling.lambda, cfg.run.dt, absorber)?;

    let mut blocks: Vec<Block> = stack.designed.as_ref().map(design_block).into_iter().collect();

    // A zero-length run still produces a valid single-sample record.
    if cfg.run.t_final == 0.0 {
        let parts = decompose(&stack.spec, &stack.family, &psi0, None)?;
        let grid = stack.spec.grid();
        let xi = local_norms(grid, &parts.xi, cfg.run.weight_r1);
        let whole = local_norms(grid, &psi0, cfg.run.weight_r1);
        let alpha = parts.x.norm() + parts.y.norm() + xi.l2;

        let mut table = Table::new(&crate::report::TRAJECTORY_COLUMNS);
        table.meta_entry("dt", fmt_f64(cfg.run.dt));
        table.meta_entry("lambda", fmt_f64(cfg.coupling.lambda));
        table.meta_entry("stride", fmt_f64(cfg.run.stride));
        table.meta_entry("steps", "0");
        table.meta_entry("absorber", cfg.run.absorber.to_string());
        table.meta_entry("alpha", fmt_f64(alpha));
        table.meta_entry("weight_r1", fmt_f64(cfg.run.weight_r1));
        for (k, v) in &init_meta {
            table.meta_entry(k, v.clone());
        }
        table.push_row(vec![
            fmt_f64(0.0),
            fmt_f64(parts.x.re),
            fmt_f64(parts.x.im),
            fmt_f64(parts.x.norm()),
            fmt_f64(parts.y.re),
            fmt_f64(parts.y.im),
            fmt_f64(parts.y.norm()),
            fmt_f64(parts.theta),
            fmt_f64(xi.l2),
            fmt_f64(xi.l2_local),
            fmt_f64(whole.l2_local),
            fmt_f64(prop.mass(&psi0)),
            fmt_f64(prop.energy(&psi0)),
        ]);

        let mut b = Block::new("classification");
        b.entry("case", "inconclusive").float("alpha", alpha);
        blocks.push(b);
        return Ok(RunOutput {
            trajectory: table,
            classification_row: inconclusive_row(alpha),
            blocks,
        });
    }

    let traj = prop.evolve_recorded(
        &stack.family,
        &psi0,
        cfg.run.t_final,
        cfg.run.stride,
        cfg.run.weight_r1,
    )?;
    let mut table = trajectory_table(&traj);
    for (k, v) in &init_meta {
        table.meta_entry(k, v.clone());
    }

    // runs too short for the classifier stay inconclusive rather than error
    let (row, block) = if traj.samples.len() < 4 {
        let alpha = traj.meta.alpha;
        let mut b = Block::new("classification");
        b.entry("case", "inconclusive").float("alpha", alpha);
        (inconclusive_row(alpha), b)
    } else {
        let report = nlslab::classify::classify_trajectory(&traj, &classifier_params(cfg))?;
        let mut b = Block::new("classification");
        b.entry("case", case_label(report.outcome))
            .float("alpha", report.alpha)
            .entry("t1", crossing_str(report.t1))
            .entry("t2", crossing_str(report.t2))
            .entry("t3", crate::report::opt_str(report.t3))
            .entry("t4", crate::report::opt_str(report.t4));
        if let Some(f) = report.decay_fit {
            b.float("decay_slope", f.slope);
        }
        if let Some(f) = report.growth_fit {
            b.float("growth_rate", f.slope);
        }
        if let Some(g) = report.growth_ratio {
            b.float("growth_ratio", g);
        }
        (classification_row(&report), b)
    };
    blocks.push(block);

    Ok(RunOutput {
        trajectory: table,
        classification_row: row,
        blocks,
    })
}

pub fn cmd_evolve(ctx: &Ctx) -> Result<Vec<Block>> {
    let out = run_pipeline(&ctx.cfg, ctx.seed)?;
    out.trajectory.write(&ctx.path("trajectory.csv"))?;
    let mut table = Table::new(&CLASSIFICATION_COLUMNS);
    table.push_row(out.classification_row.clone());
    table.write(&ctx.path("classification.csv"))?;
    Ok(out.blocks)
}

pub fn cmd_classify(ctx: &Ctx, input: &Path) -> Result<Vec<Block>> {
    let stored = read_trajectory(input)?;
    let series = AmplitudeSeries {
        t: stored.t,
        x: stored.x_abs,
        y: stored.y_abs,
        local: stored.xi_local,
    };
    let mut params = classifier_params(&ctx.cfg);
    if params.alpha.is_none() {
        params.alpha = stored.alpha;
    }
    let report = classify(&series, &params)?;
    classification_table(&report).write(&ctx.path("classification.csv"))?;

    let mut b = Block::new("classification");
    b.entry("input", input.display().to_string())
        .entry("case", case_label(report.outcome))
        .float("alpha", report.alpha)
        .entry("t1", crossing_str(report.t1))
        .entry("t2", crossing_str(report.t2))
        .entry("t3", crate::report::opt_str(report.t3))
        .entry("t4", crate::report::opt_str(report.t4));
    Ok(vec![b])
}

pub fn cmd_sweep(ctx: &Ctx) -> Result<Vec<Block>> {
    let cfg = &ctx.cfg;
    let axis = cfg.sweep.axis.clone();
    // reject a bad axis before spawning anything
    cfg.clone().set_axis(&axis, cfg.sweep.values.first().copied().unwrap_or(0.0))?;

    let results: Vec<(f64, Result<RunOutput>)> = cfg
        .sweep
        .values
        .par_iter()
        .map(|&value| {
            let mut one = cfg.clone();
            let run = one
                .set_axis(&axis, value)
                .and_then(|()| run_pipeline(&one, ctx.seed));
            (value, run)
        })
        .collect();

    let mut header = vec!["value"];
    header.extend(CLASSIFICATION_COLUMNS);
    header.push("error");
    let mut table = Table::new(&header);
    table.meta_entry("axis", axis.clone());
    table.meta_entry("rng", RNG_NAME);
    table.meta_entry("seed", ctx.seed.to_string());

    let mut failures = 0usize;
    for (value, run) in &results {
        let mut row = vec![fmt_f64(*value)];
        match run {
            Ok(out) => {
                row.extend(out.classification_row.iter().cloned());
                row.push(String::new());
            }
            Err(err) => {
                failures += 1;
                row.extend(std::iter::repeat_n(String::new(), CLASSIFICATION_COLUMNS.len()));
                row.push(format!("{err:#}"));
            }
        }
        table.push_row(row);
    }
    table.write(&ctx.path("sweep.csv"))?;

    let mut b = Block::new("sweep");
    b.entry("axis", axis)
        .entry("runs", results.len().to_string())
        .entry("failures", failures.to_string());
    for (value, run) in &results {
        let label = match run {
            Ok(out) => out.classification_row[0].clone(),
            Err(_) => "error".into(),
        };
        b.entry(&format!("case[{}]", fmt_f64(*value)), label);
    }
    Ok(vec![b])
}

pub fn cmd_verify_inequalities(ctx: &Ctx) -> Result<Vec<Block>> {
    let checks = verify_all(ctx.cfg.inequalities.samples, ctx.seed)?;
    let mut table = Table::new(&["name", "constant", "max_ratio", "samples", "holds"]);
    table.meta_entry("rng", RNG_NAME);
    table.meta_entry("seed", ctx.seed.to_string());
    for c in &checks {
        table.push_row(vec![
            c.name.to_string(),
            fmt_f64(c.constant),
            fmt_f64(c.max_ratio),
            c.samples.to_string(),
            c.holds().to_string(),
        ]);
    }
    table.write(&ctx.path("inequalities.csv"))?;

    let mut b = Block::new("inequalities");
    b.entry("samples", ctx.cfg.inequalities.samples.to_string());
    for c in &checks {
        b.entry(c.name, format!("max_ratio {} of constant {}", fmt_f64(c.max_ratio), fmt_f64(c.constant)));
    }
    let all_hold = checks.iter().all(|c| c.holds());
    b.entry("all_hold", all_hold.to_string());
    if !all_hold {
        let names: Vec<&str> = checks.iter().filter(|c| !c.holds()).map(|c| c.name).collect();
        anyhow::bail!("inequality bound exceeded: {}", names.join(", "));
    }
    Ok(vec![b])
}

pub fn cmd_free_decay(ctx: &Ctx) -> Result<Vec<Block>> {
    let cfg = &ctx.cfg;
    let (potential, designed) = effective_potential(cfg)?;
    let grid = RadialGrid::new(cfg.grid.r_max, cfg.grid.n)?;
    let ham = Hamiltonian::new(grid, &potential)?;
    let spec = LinearSpectrum::build(&ham)?;

    let ini = &cfg.initial;
    let bump = RadialField::from_field_values(spec.grid(), |r| {
        Complex64::new((-((r - ini.packet_center) / ini.packet_width).powi(2)).exp(), 0.0)
    });
    let mut f = spec.project_continuous(&bump);
    let norm = f.norm();
    if norm == 0.0 {
        anyhow::bail!("packet projects to zero on the continuous subspace");
    }
    f.scale(Complex64::new(ini.packet_amplitude / norm, 0.0));

    let fr = &cfg.free;
    if !(fr.t_lo > 0.0 && fr.t_hi > fr.t_lo && fr.points >= 2) {
        anyhow::bail!("[free] needs 0 < t_lo < t_hi and at least two points");
    }
    let ratio = (fr.t_hi / fr.t_lo).powf(1.0 / (fr.points as f64 - 1.0));
    let times: Vec<f64> = (0..fr.points).map(|k| fr.t_lo * ratio.powi(k as i32)).collect();

    let mut table = Table::new(&["t", "l2_local", "l2"]);
    table.meta_entry("weight_r1", fmt_f64(cfg.run.weight_r1));
    let mut local = Vec::with_capacity(times.len());
    for &t in &times {
        let ft = spec.free_flow(&f, t);
        let norms = local_norms(spec.grid(), &ft, cfg.run.weight_r1);
        local.push(norms.l2_local);
        table.push_row(vec![fmt_f64(t), fmt_f64(norms.l2_local), fmt_f64(norms.l2)]);
    }
    table.write(&ctx.path("free_decay.csv"))?;

    let fit = fit_power_law(&times, &local)?;
    let mut b = Block::new("free-decay");
    b.float("t_lo", fr.t_lo)
        .float("t_hi", fr.t_hi)
        .entry("points", fr.points.to_string())
        .float("slope", fit.slope)
        .float("intercept", fit.intercept);
    let mut blocks: Vec<Block> = designed.as_ref().map(design_block).into_iter().collect();
    blocks.push(b);
    Ok(blocks)
}

pub fn ensure_out_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))
}

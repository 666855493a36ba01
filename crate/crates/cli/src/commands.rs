//! Subcommand drivers and the human-readable summary reports.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use osg_core::distribution::momentum_distribution;
use osg_core::lithography::{
    default_exclusion_radius, locate_peak, peak_width, plan_fields, predict_deflection, FieldPlan,
};
use osg_core::states::{product_state, AtomPrep};
use osg_core::suite::{self, SuiteConfig};
use osg_core::{Error as CoreError, MomentumGrid, SimParams};

use crate::config::{
    self, ComplexSpec, ModeSpec, OutputFormat, ResolvedRun, RunConfig, TargetSpec,
};
use crate::gridfile;

/// Failure with the documented process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: msg.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl From<config::ConfigError> for CliError {
    fn from(e: config::ConfigError) -> Self {
        CliError::config(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError {
            code: 4,
            message: format!("i/o error: {e}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let code = match e {
            CoreError::BudgetExceeded { .. } => 3,
            CoreError::InfeasibleSqueeze { .. } => 5,
            CoreError::InvalidParam(_) | CoreError::InvalidIndex(_) => 2,
            _ => 1,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

/// Flags shared by the writing subcommands.
pub struct OutputOptions {
    pub dir: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub exclusion_radius: Option<f64>,
}

fn resolve_output(cfg: &RunConfig, opts: &OutputOptions) -> (PathBuf, OutputFormat) {
    let from_cfg = cfg.output.clone();
    let dir = opts
        .dir
        .clone()
        .or_else(|| from_cfg.as_ref().and_then(|o| o.dir.clone()))
        .unwrap_or_else(|| PathBuf::from("out"));
    let format = opts
        .format
        .or_else(|| from_cfg.as_ref().and_then(|o| o.format))
        .unwrap_or(OutputFormat::Both);
    (dir, format)
}

fn write_grid_outputs(
    dir: &Path,
    stem: &str,
    grid: &MomentumGrid,
    format: OutputFormat,
) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if matches!(format, OutputFormat::Bin | OutputFormat::Both) {
        let path = dir.join(format!("{stem}.osg"));
        gridfile::write_binary(&path, grid)?;
        written.push(path);
    }
    if matches!(format, OutputFormat::Csv | OutputFormat::Both) {
        let path = dir.join(format!("{stem}.csv"));
        gridfile::write_csv(&path, grid)?;
        written.push(path);
    }
    Ok(written)
}

fn summary_text(
    run: &ResolvedRun,
    grid: &MomentumGrid,
    exclusion: f64,
    kernel_ms: u128,
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "simulation summary");
    let _ = writeln!(
        s,
        "  params: lambda = {}, k_delta_r = {}, eps_trunc = {:.1e}",
        run.params.lambda, run.params.k_delta_r, run.params.eps_trunc
    );
    for w in &run.warnings {
        let _ = writeln!(s, "  warning: {w}");
    }
    let _ = writeln!(s, "  field: {}", run.field_desc);
    let _ = writeln!(s, "  atom:  {}", run.atom_desc);
    let _ = writeln!(
        s,
        "  cutoff audit: total-excitation N_max = {}, captured weight = {:.9}",
        grid.meta.n_total_max, grid.meta.captured_weight
    );
    let _ = writeln!(
        s,
        "  grid: {} x {} over p <= {:.4}",
        grid.n_radial(),
        grid.n_azimuthal(),
        grid.p_max()
    );
    let _ = writeln!(
        s,
        "  integral of W p dp dphi = {:.9} (captured - integral = {:+.3e})",
        grid.meta.integral,
        grid.meta.captured_weight - grid.meta.integral
    );
    let rings = grid.ring_weights(run.params.lambda, grid.meta.n_total_max + 1);
    let _ = writeln!(s, "  ring weights (band around sqrt(n) lambda):");
    for (n, w) in rings.iter().enumerate() {
        if *w > 1e-9 || n <= 2 {
            let _ = writeln!(
                s,
                "    n = {n:3}  p ~ {:7.3}  weight = {w:.6}",
                (n as f64).sqrt() * run.params.lambda
            );
        }
    }
    match locate_peak(grid, exclusion) {
        Ok(peak) => {
            let width = peak_width(grid, &peak);
            let _ = writeln!(
                s,
                "  peak beyond p > {exclusion:.3}: p = {:.4}, phi = {:.4}, W = {:.6e}",
                peak.p, peak.phi, peak.value
            );
            let _ = writeln!(
                s,
                "  widths: radial FWHM = {}, azimuthal FWHM = {}",
                width
                    .radial_fwhm
                    .map_or("undefined".into(), |v| format!("{v:.4}")),
                width
                    .azimuthal_fwhm
                    .map_or("undefined".into(), |v| format!("{v:.4} rad")),
            );
        }
        Err(e) => {
            let _ = writeln!(s, "  peak search: {e}");
        }
    }
    let _ = writeln!(s, "  kernel time: {kernel_ms} ms");
    s
}

pub fn run_simulate(
    cfg: &RunConfig,
    base_dir: &Path,
    opts: &OutputOptions,
) -> Result<(), CliError> {
    let run = config::resolve_run(cfg, base_dir)?;
    let (dir, format) = resolve_output(cfg, opts);
    let t0 = Instant::now();
    let mut grid = momentum_distribution(&run.field, &run.atom, &run.params, &run.grid)?;
    let kernel_ms = t0.elapsed().as_millis();
    grid.meta.field_desc = run.field_desc.clone();
    grid.meta.atom_desc = run.atom_desc.clone();
    let exclusion = opts
        .exclusion_radius
        .unwrap_or_else(|| default_exclusion_radius(run.params.lambda));
    let written = write_grid_outputs(&dir, "grid", &grid, format)?;
    let summary = summary_text(&run, &grid, exclusion, kernel_ms);
    std::fs::write(dir.join("summary.txt"), &summary)?;
    print!("{summary}");
    for path in written {
        println!("  wrote {}", path.display());
    }
    Ok(())
}

fn plan_text(plan: &FieldPlan, lambda: f64) -> String {
    let (p_pred, phi_pred) =
        predict_deflection(plan.mean_a, plan.mean_b, plan.sign_a, plan.sign_b, lambda)
            .expect("plan means are positive");
    let mut s = String::new();
    let _ = writeln!(s, "field plan");
    let _ = writeln!(
        s,
        "  mode a: |alpha| = {:.6}, phase = {:+.6} rad (alpha = {}), squeeze r = {}",
        plan.alpha_mod,
        plan.phase_a(),
        plan.alpha(),
        plan.r_a
    );
    let _ = writeln!(
        s,
        "  mode b: |beta|  = {:.6}, phase = {:+.6} rad (beta  = {}), squeeze r = {}",
        plan.beta_mod,
        plan.phase_b(),
        plan.beta(),
        plan.r_b
    );
    let _ = writeln!(
        s,
        "  planned mean photons: a = {:.6}, b = {:.6}",
        plan.mean_a, plan.mean_b
    );
    let _ = writeln!(
        s,
        "  predicted deflection: p = {p_pred:.4}, phi = {phi_pred:.6} rad"
    );
    s
}

fn plan_to_mode(modulus: f64, sign: i8, r: f64) -> ModeSpec {
    let alpha = ComplexSpec::ReIm {
        re: 0.0,
        im: sign as f64 * modulus,
    };
    if r > 0.0 {
        ModeSpec::Squeezed {
            alpha,
            r,
            phi_sq: None,
            n_max: None,
        }
    } else {
        ModeSpec::Coherent { alpha, n_max: None }
    }
}

fn verify_plan(
    cfg: &RunConfig,
    params: &SimParams,
    plan: &FieldPlan,
    target: &TargetSpec,
    dir: &Path,
    stem: &str,
    format: OutputFormat,
    exclusion: Option<f64>,
) -> Result<String, CliError> {
    let mode_a = config::build_mode(&plan_to_mode(plan.alpha_mod, plan.sign_a, plan.r_a), params.eps_trunc)?;
    let mode_b = config::build_mode(&plan_to_mode(plan.beta_mod, plan.sign_b, plan.r_b), params.eps_trunc)?;
    let field = product_state(&mode_a, &mode_b, params.eps_trunc)?;
    let atom = match &cfg.atom {
        Some(_) => config::resolve_atom(cfg)?.0,
        // The protocol phase maximizes the targeted concentration.
        None => AtomPrep::from_kappa(std::f64::consts::FRAC_PI_2),
    };
    let grid_spec = config::resolve_grid(cfg);
    let t0 = Instant::now();
    let mut grid = momentum_distribution(&field, &atom, params, &grid_spec)?;
    let kernel_ms = t0.elapsed().as_millis();
    grid.meta.field_desc = format!(
        "planned fields: alpha = {}, beta = {}, r = ({}, {})",
        plan.alpha(),
        plan.beta(),
        plan.r_a,
        plan.r_b
    );
    write_grid_outputs(dir, stem, &grid, format)?;
    let exclusion = exclusion.unwrap_or_else(|| default_exclusion_radius(params.lambda));
    let peak = locate_peak(&grid, exclusion)?;
    let width = peak_width(&grid, &peak);
    let (p_pred, phi_pred) =
        predict_deflection(plan.mean_a, plan.mean_b, plan.sign_a, plan.sign_b, params.lambda)?;
    let mut s = String::new();
    let _ = writeln!(s, "verification ({stem})");
    let _ = writeln!(
        s,
        "  requested target:    p = {:.4}, phi = {:.6}",
        target.p_bar, target.phi_bar
    );
    let _ = writeln!(s, "  predicted from plan: p = {p_pred:.4}, phi = {phi_pred:.6}");
    let _ = writeln!(
        s,
        "  located peak:        p = {:.4}, phi = {:.6} (W = {:.4e})",
        peak.p, peak.phi, peak.value
    );
    let _ = writeln!(
        s,
        "  offsets: dp = {:+.4} ({:+.2} rings), dphi = {:+.5} rad",
        peak.p - target.p_bar,
        (peak.p / params.lambda).powi(2) - (target.p_bar / params.lambda).powi(2),
        (peak.phi - target.phi_bar + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU)
            - std::f64::consts::PI
    );
    let _ = writeln!(
        s,
        "  widths: radial FWHM = {}, azimuthal FWHM = {}",
        width
            .radial_fwhm
            .map_or("undefined".into(), |v| format!("{v:.4}")),
        width
            .azimuthal_fwhm
            .map_or("undefined".into(), |v| format!("{v:.4} rad")),
    );
    let _ = writeln!(s, "  captured weight = {:.9}, integral = {:.9}, kernel {kernel_ms} ms",
        grid.meta.captured_weight, grid.meta.integral);
    Ok(s)
}

pub fn run_target(
    cfg: &RunConfig,
    base_dir: &Path,
    opts: &OutputOptions,
    verify: bool,
) -> Result<(), CliError> {
    let _ = base_dir;
    let params = config::resolve_params(cfg)?;
    let spec = cfg
        .target
        .as_ref()
        .ok_or_else(|| CliError::config("missing [target] section"))?;
    let target = config::resolve_target(spec)?;
    let plan = plan_fields(&target, params.lambda, spec.r_a, spec.r_b)?;
    let text = plan_text(&plan, params.lambda);
    print!("{text}");
    let (dir, format) = resolve_output(cfg, opts);
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("plan.txt"), &text)?;
    if verify {
        let report = verify_plan(
            cfg,
            &params,
            &plan,
            spec,
            &dir,
            "verify_grid",
            format,
            opts.exclusion_radius,
        )?;
        print!("{report}");
        std::fs::write(dir.join("verify.txt"), &report)?;
    }
    Ok(())
}

pub fn run_sweep(
    cfg: &RunConfig,
    base_dir: &Path,
    opts: &OutputOptions,
    verify: bool,
) -> Result<(), CliError> {
    let _ = base_dir;
    let params = config::resolve_params(cfg)?;
    if cfg.sweep.is_empty() {
        return Err(CliError::config("sweep mode needs at least one [[sweep]] entry"));
    }
    let (dir, format) = resolve_output(cfg, opts);
    std::fs::create_dir_all(&dir)?;
    let mut csv = String::from(
        "index,p_bar,phi_bar,r_a,r_b,alpha_mod,beta_mod,sign_a,sign_b,mean_a,mean_b\n",
    );
    let mut reports = String::new();
    for (idx, spec) in cfg.sweep.iter().enumerate() {
        let target = config::resolve_target(spec)?;
        let plan = plan_fields(&target, params.lambda, spec.r_a, spec.r_b)?;
        let _ = writeln!(
            csv,
            "{idx},{},{},{},{},{},{},{},{},{},{}",
            spec.p_bar,
            spec.phi_bar,
            spec.r_a,
            spec.r_b,
            plan.alpha_mod,
            plan.beta_mod,
            plan.sign_a,
            plan.sign_b,
            plan.mean_a,
            plan.mean_b
        );
        println!("[{idx}] target (p = {}, phi = {})", spec.p_bar, spec.phi_bar);
        print!("{}", plan_text(&plan, params.lambda));
        if verify {
            let report = verify_plan(
                cfg,
                &params,
                &plan,
                spec,
                &dir,
                &format!("sweep_{idx:02}"),
                format,
                opts.exclusion_radius,
            )?;
            print!("{report}");
            reports.push_str(&report);
        }
    }
    std::fs::write(dir.join("plans.csv"), &csv)?;
    if verify {
        std::fs::write(dir.join("sweep_verify.txt"), &reports)?;
    }
    Ok(())
}

pub fn run_oracle_check(cfg: Option<&RunConfig>) -> Result<(), CliError> {
    let params = match cfg.and_then(|c| c.params.as_ref()) {
        Some(_) => config::resolve_params(cfg.unwrap())?,
        None => SimParams::new(4.0, std::f64::consts::TAU / 10.0, 1e-6).expect("default params"),
    };
    let mut suite_cfg = SuiteConfig::default();
    if let Some(spec) = cfg.and_then(|c| c.oracle.as_ref()) {
        if let Some(m) = spec.max_excitation {
            suite_cfg.max_excitation = m;
        }
        if let Some(s) = spec.samples {
            suite_cfg.samples = s;
        }
        if let Some(s) = spec.seed {
            suite_cfg.seed = s;
        }
    }
    println!(
        "oracle equivalence suites (N <= {}, {} samples per block)",
        suite_cfg.max_excitation, suite_cfg.samples
    );
    let outcomes = suite::run_all(&params, &suite_cfg).map_err(CliError::from)?;
    let mut all_pass = true;
    for o in &outcomes {
        println!("{}", o.line());
        all_pass &= o.pass;
    }
    if !all_pass {
        return Err(CliError {
            code: 1,
            message: "one or more equivalence suites failed".into(),
        });
    }
    println!("all suites passed");
    Ok(())
}

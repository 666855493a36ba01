//! Run configuration: a versioned TOML schema with strict key checking.
//!
//! Complex numbers are accepted either as `{ re, im }` or as
//! `{ modulus, phase }` with the phase in radians.

use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use osg_core::states::{
    coherent_coeffs, fock_coeffs, product_state, squeezed_coherent_coeffs, AtomPrep, Generator,
    ModeCoeffs, TwoModeFockState,
};
use osg_core::{Error as CoreError, GridSpec, LithTarget, SimParams};

pub const CONFIG_VERSION: u32 = 1;
/// Hard ceiling for automatic per-mode window growth.
const MAX_AUTO_WINDOW: usize = 4096;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged, deny_unknown_fields)]
pub enum ComplexSpec {
    ReIm { re: f64, im: f64 },
    ModArg { modulus: f64, phase: f64 },
}

impl ComplexSpec {
    pub fn value(&self) -> C64 {
        match *self {
            ComplexSpec::ReIm { re, im } => C64::new(re, im),
            ComplexSpec::ModArg { modulus, phase } => C64::from_polar(modulus, phase),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModeSpec {
    Fock {
        n: usize,
        #[serde(skip_serializing_if = "Option::is_none")]
        n_max: Option<usize>,
    },
    Coherent {
        alpha: ComplexSpec,
        #[serde(skip_serializing_if = "Option::is_none")]
        n_max: Option<usize>,
    },
    Squeezed {
        alpha: ComplexSpec,
        r: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        phi_sq: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        n_max: Option<usize>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged, deny_unknown_fields)]
pub enum FieldSpec {
    Modes { a: ModeSpec, b: ModeSpec },
    /// Raw coefficient matrix from a CSV file with `m,n,re,im` rows.
    Raw { raw: PathBuf },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_g: Option<ComplexSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_e: Option<ComplexSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    pub lambda: f64,
    pub k_delta_r: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_trunc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_total_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub term_budget: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridSpecConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_radial: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_azimuthal: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_max: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub p_bar: f64,
    pub phi_bar: f64,
    #[serde(default)]
    pub r_a: f64,
    #[serde(default)]
    pub r_b: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_excitation: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Bin,
    Both,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunMode {
    Simulate,
    Target,
    OracleCheck,
    Sweep,
}

impl RunMode {
    pub fn name(self) -> &'static str {
        match self {
            RunMode::Simulate => "simulate",
            RunMode::Target => "target",
            RunMode::OracleCheck => "oracle-check",
            RunMode::Sweep => "sweep",
        }
    }
}

/// Root of the configuration file.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<RunMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atom: Option<AtomSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpecConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<TargetSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}
impl std::error::Error for ConfigError {}

pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
    if cfg.version != CONFIG_VERSION {
        return Err(ConfigError(format!(
            "unsupported config version {} (expected {CONFIG_VERSION})",
            cfg.version
        )));
    }
    Ok(cfg)
}

pub fn serialize(cfg: &RunConfig) -> String {
    toml::to_string_pretty(cfg).expect("config serializes")
}

/// Everything a simulation run needs, resolved and validated.
pub struct ResolvedRun {
    pub params: SimParams,
    pub field: TwoModeFockState,
    pub atom: AtomPrep,
    pub grid: GridSpec,
    pub field_desc: String,
    pub atom_desc: String,
    pub warnings: Vec<String>,
}

pub fn resolve_params(cfg: &RunConfig) -> Result<SimParams, ConfigError> {
    let spec = cfg
        .params
        .as_ref()
        .ok_or_else(|| ConfigError("missing [params] section".into()))?;
    let mut params = SimParams::new(
        spec.lambda,
        spec.k_delta_r,
        spec.eps_trunc.unwrap_or(osg_core::params::DEFAULT_EPS_TRUNC),
    )
    .map_err(|e| ConfigError(e.to_string()))?;
    params.n_total_max = spec.n_total_max;
    params.term_budget = spec.term_budget;
    Ok(params)
}

fn mode_mean_photon(spec: &ModeSpec) -> f64 {
    match spec {
        ModeSpec::Fock { n, .. } => *n as f64,
        ModeSpec::Coherent { alpha, .. } => alpha.value().norm_sqr(),
        ModeSpec::Squeezed { alpha, r, phi_sq, .. } => {
            let a = alpha.value();
            let phi = phi_sq.unwrap_or(std::f64::consts::PI);
            (a * r.cosh() - C64::new(0.0, phi).exp() * a.conj() * r.sinh()).norm_sqr()
                + r.sinh().powi(2)
        }
    }
}

/// Build one mode, growing the window until it captures the tolerance when
/// no explicit window is given.
pub fn build_mode(spec: &ModeSpec, eps: f64) -> Result<ModeCoeffs, CoreError> {
    let explicit = match spec {
        ModeSpec::Fock { n_max, .. }
        | ModeSpec::Coherent { n_max, .. }
        | ModeSpec::Squeezed { n_max, .. } => *n_max,
    };
    let attempt = |n_max: usize| -> Result<ModeCoeffs, CoreError> {
        match spec {
            ModeSpec::Fock { n, .. } => fock_coeffs(*n, n_max.max(*n)),
            ModeSpec::Coherent { alpha, .. } => coherent_coeffs(alpha.value(), n_max, eps),
            ModeSpec::Squeezed { alpha, r, phi_sq, .. } => squeezed_coherent_coeffs(
                alpha.value(),
                *r,
                phi_sq.unwrap_or(std::f64::consts::PI),
                n_max,
                eps,
            ),
        }
    };
    if let Some(n_max) = explicit {
        return attempt(n_max);
    }
    let mean = mode_mean_photon(spec);
    let mut n_max = (2.0 * mean + 8.0 * (mean + 1.0).sqrt() + 24.0).ceil() as usize;
    loop {
        match attempt(n_max) {
            Err(CoreError::CutoffTooSmall { .. }) if n_max < MAX_AUTO_WINDOW => {
                n_max *= 2;
            }
            other => return other,
        }
    }
}

fn mode_desc(tag: &str, spec: &ModeSpec, built: &ModeCoeffs) -> String {
    let gen = match built.generator() {
        Generator::Fock { n } => format!("fock n = {n}"),
        Generator::Coherent { alpha } => format!("coherent alpha = {alpha}"),
        Generator::SqueezedCoherent { alpha, r, phi_sq } => {
            format!("squeezed alpha = {alpha}, r = {r}, phi_sq = {phi_sq:.6}")
        }
        Generator::Raw => "raw".into(),
    };
    let _ = spec;
    format!(
        "{tag}: {gen} (window {} levels, captured {:.9})",
        built.len(),
        built.captured_weight()
    )
}

pub fn read_raw_cmatrix(path: &Path) -> Result<TwoModeFockState, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let mut entries: Vec<(usize, usize, C64)> = Vec::new();
    let mut side = 0usize;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('m') {
            continue;
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(ConfigError(format!(
                "{}:{}: expected `m,n,re,im`",
                path.display(),
                idx + 1
            )));
        }
        let m: usize = parts[0]
            .parse()
            .map_err(|e| ConfigError(format!("{}:{}: {e}", path.display(), idx + 1)))?;
        let n: usize = parts[1]
            .parse()
            .map_err(|e| ConfigError(format!("{}:{}: {e}", path.display(), idx + 1)))?;
        let re: f64 = parts[2]
            .parse()
            .map_err(|e| ConfigError(format!("{}:{}: {e}", path.display(), idx + 1)))?;
        let im: f64 = parts[3]
            .parse()
            .map_err(|e| ConfigError(format!("{}:{}: {e}", path.display(), idx + 1)))?;
        side = side.max(m + 1).max(n + 1);
        entries.push((m, n, C64::new(re, im)));
    }
    if entries.is_empty() {
        return Err(ConfigError(format!("{}: no coefficients", path.display())));
    }
    let mut matrix = ndarray_matrix(side);
    for (m, n, c) in entries {
        matrix[(m, n)] = c;
    }
    TwoModeFockState::from_matrix(matrix).map_err(|e| ConfigError(e.to_string()))
}

fn ndarray_matrix(side: usize) -> ndarray::Array2<C64> {
    ndarray::Array2::from_elem((side, side), C64::new(0.0, 0.0))
}

pub fn resolve_atom(cfg: &RunConfig) -> Result<(AtomPrep, String), ConfigError> {
    let spec = cfg
        .atom
        .as_ref()
        .ok_or_else(|| ConfigError("missing [atom] section".into()))?;
    match (&spec.kappa, &spec.c_g, &spec.c_e) {
        (Some(kappa), None, None) => Ok((
            AtomPrep::from_kappa(*kappa),
            format!("(|g> + e^(i {kappa:.6}) |e>)/sqrt(2)"),
        )),
        (None, Some(cg), Some(ce)) => {
            let atom = AtomPrep::from_amplitudes(cg.value(), ce.value())
                .map_err(|e| ConfigError(e.to_string()))?;
            Ok((atom, format!("c_g = {}, c_e = {}", atom.c_g, atom.c_e)))
        }
        _ => Err(ConfigError(
            "[atom] needs either `kappa` or both `c_g` and `c_e`".into(),
        )),
    }
}

pub fn resolve_grid(cfg: &RunConfig) -> GridSpec {
    let spec = cfg.grid.clone().unwrap_or(GridSpecConfig {
        n_radial: None,
        n_azimuthal: None,
        p_max: None,
    });
    GridSpec {
        n_radial: spec.n_radial.unwrap_or(256),
        n_azimuthal: spec.n_azimuthal.unwrap_or(256),
        p_max: spec.p_max,
    }
}

/// Resolve the full simulation input (params + field + atom + grid).
pub fn resolve_run(cfg: &RunConfig, base_dir: &Path) -> Result<ResolvedRun, ConfigError> {
    let params = resolve_params(cfg)?;
    let mut warnings = Vec::new();
    if let Some(w) = params.regime_warning() {
        warnings.push(w);
    }
    let (field, field_desc) = match cfg
        .field
        .as_ref()
        .ok_or_else(|| ConfigError("missing [field] section".into()))?
    {
        FieldSpec::Modes { a, b } => {
            for (tag, m) in [("a", a), ("b", b)] {
                if let ModeSpec::Squeezed { phi_sq: Some(phi), .. } = m {
                    if (phi - std::f64::consts::PI).abs() > 1e-9 {
                        warnings.push(format!(
                            "mode {tag}: squeeze phase {phi:.6} is off the protocol quadrature (pi)"
                        ));
                    }
                }
            }
            let mode_a = build_mode(a, params.eps_trunc).map_err(|e| ConfigError(e.to_string()))?;
            let mode_b = build_mode(b, params.eps_trunc).map_err(|e| ConfigError(e.to_string()))?;
            let desc = format!(
                "{}; {}",
                mode_desc("a", a, &mode_a),
                mode_desc("b", b, &mode_b)
            );
            let state = product_state(&mode_a, &mode_b, params.eps_trunc)
                .map_err(|e| ConfigError(e.to_string()))?;
            (state, desc)
        }
        FieldSpec::Raw { raw } => {
            let path = if raw.is_absolute() {
                raw.clone()
            } else {
                base_dir.join(raw)
            };
            let state = read_raw_cmatrix(&path)?;
            if state.captured_weight() < 1.0 - params.eps_trunc
                || state.captured_weight() > 1.0 + 1e-9
            {
                warnings.push(format!(
                    "raw field mass {:.9} differs from 1",
                    state.captured_weight()
                ));
            }
            (state, format!("raw C matrix from {}", path.display()))
        }
    };
    let (atom, atom_desc) = resolve_atom(cfg)?;
    Ok(ResolvedRun {
        grid: resolve_grid(cfg),
        params,
        field,
        atom,
        field_desc,
        atom_desc,
        warnings,
    })
}

pub fn resolve_target(spec: &TargetSpec) -> Result<LithTarget, ConfigError> {
    LithTarget::new(spec.p_bar, spec.phi_bar).map_err(|e| ConfigError(e.to_string()))
}

//! TOML experiment configuration: schema, scalar overrides, echo and hash.
//!
//! Every section rejects unknown keys. The echo is the resolved config (defaults filled in)
//! re-serialized, and the manifest hash is the SHA-256 of exactly those bytes.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use xnls_core::evolution::{BoundaryPolicy, SimConfig};
use xnls_core::field::Field2D;
use xnls_core::harness::{ProfileKind, SuiteConfig};
use xnls_core::io::read_snapshot;
use xnls_core::orlicz::{OrliczSpec, OrliczVariant};
use xnls_core::profiles::ScaledProfileField;
use xnls_core::radial::RadialFunction;
use xnls_core::{GridSpec, XnlsError};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub virial: VirialSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
    #[serde(default)]
    pub bank: BankSection,
    #[serde(default)]
    pub orlicz: OrliczSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub n: usize,
    pub l: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { n: 512, l: 40.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSection {
    pub dt: f64,
    pub t_end: f64,
    /// Series and snapshot cadence in steps.
    pub output_every: usize,
    pub nonlinear: bool,
    pub boundary_policy: BoundaryPolicy,
    pub boundary_threshold: f64,
}

impl Default for TimeSection {
    fn default() -> Self {
        TimeSection {
            dt: 1e-3,
            t_end: 20.0,
            output_every: 50,
            nonlinear: true,
            boundary_policy: BoundaryPolicy::Record,
            boundary_threshold: 1e-6,
        }
    }
}

/// Initial data. `h1`, when set, rescales the field to that `H¹` norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSection {
    Zero,
    Gaussian {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        width: f64,
        #[serde(default)]
        center: [f64; 2],
        #[serde(default)]
        h1: Option<f64>,
    },
    Moser {
        alpha: f64,
        #[serde(default)]
        h1: Option<f64>,
    },
    Profile {
        profile: ProfileKind,
        alpha: f64,
        #[serde(default)]
        h1: Option<f64>,
    },
    File {
        path: PathBuf,
        #[serde(default)]
        h1: Option<f64>,
    },
}

fn one() -> f64 {
    1.0
}

impl Default for InitialSection {
    fn default() -> Self {
        InitialSection::Gaussian { amplitude: 1.0, width: 1.0, center: [0.0, 0.0], h1: Some(0.1) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VirialSection {
    pub radii: Vec<f64>,
    pub every: usize,
}

impl Default for VirialSection {
    fn default() -> Self {
        VirialSection { radii: vec![2.0, 4.0], every: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsSection {
    /// Time intervals of the space-time norms; empty means the whole run.
    pub intervals: Vec<[f64; 2]>,
    /// Start of the scattering window; negative means two thirds of `t_end`.
    pub window_start: f64,
    /// Snapshot cadence in outputs.
    pub snapshot_every: usize,
    pub with_ltilde: bool,
    /// Acceptance threshold on the pairwise `H¹` distances of `v(t)`.
    pub scattering_tol: f64,
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        DiagnosticsSection {
            intervals: Vec::new(),
            window_start: -1.0,
            snapshot_every: 1,
            with_ltilde: false,
            scattering_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BankSection {
    pub seed: u64,
    pub random_count: usize,
    pub moser_alphas: Vec<f64>,
    pub lambda: f64,
    pub mu: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub cond_l4_tol: f64,
}

impl Default for BankSection {
    fn default() -> Self {
        let s = SuiteConfig::new(2024, GridSpec::default());
        BankSection {
            seed: s.seed,
            random_count: s.random_count,
            moser_alphas: s.moser_alphas,
            lambda: s.lambda,
            mu: s.mu,
            delta: s.delta,
            epsilon: s.epsilon,
            cond_l4_tol: s.cond_l4_tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OrliczSection {
    pub variant: OrliczVariant,
    /// Level `c` in `∫φ(|u|/λ) = c`.
    pub threshold: f64,
}

impl Default for OrliczSection {
    fn default() -> Self {
        OrliczSection { variant: OrliczVariant::Ltilde, threshold: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { directory: PathBuf::from("run"), formats: vec![Format::Csv, Format::Json] }
    }
}

impl OutputSection {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

/// TOML path of a `SimConfig` field.
fn toml_key(sim_key: &str) -> &str {
    match sim_key {
        "dt" => "time.dt",
        "t_end" => "time.t_end",
        "output_every" => "time.output_every",
        "boundary_threshold" => "time.boundary_threshold",
        "virial_r" => "virial.radii",
        "virial_every" => "virial.every",
        other => other,
    }
}

fn config_error(key: &str, detail: impl Into<String>) -> CliError {
    CliError::Config(XnlsError::Config { key: key.into(), detail: detail.into() }.to_string())
}

/// Parse `value` as a TOML scalar, falling back to a bare string.
fn parse_scalar(value: &str) -> toml::Value {
    let probe = format!("v = {value}");
    match toml::from_str::<toml::Table>(&probe) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(value.into())),
        Err(_) => toml::Value::String(value.into()),
    }
}

/// Apply `section.key=value` overrides to a parsed document.
pub fn apply_overrides(doc: &mut toml::Table, overrides: &[String]) -> Result<(), CliError> {
    for item in overrides {
        let (path, value) =
            item.split_once('=').ok_or_else(|| CliError::Usage(format!("override `{item}` is not key=value")))?;
        let keys: Vec<&str> = path.trim().split('.').collect();
        if keys.iter().any(|k| k.is_empty()) {
            return Err(CliError::Usage(format!("override key `{path}` is malformed")));
        }
        let mut table = &mut *doc;
        for k in &keys[..keys.len() - 1] {
            let entry = table.entry(k.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
            table = entry
                .as_table_mut()
                .ok_or_else(|| config_error(path, format!("`{k}` is not a section")))?;
        }
        let last = keys[keys.len() - 1];
        let value = parse_scalar(value.trim());
        if value.is_table() || value.is_array() {
            return Err(config_error(path, "overrides take scalar values only"));
        }
        table.insert(last.to_string(), value);
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self, CliError> {
        let mut doc: toml::Table = toml::from_str(text).map_err(|e| CliError::Config(format!("config parse error: {e}")))?;
        apply_overrides(&mut doc, overrides)?;
        let cfg: ExperimentConfig = toml::Value::Table(doc)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(format!("config schema error: {}", e.message())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config `{}`: {e}", path.display())))?;
        Self::from_toml(&text, overrides)
    }

    pub fn grid(&self) -> Result<GridSpec, CliError> {
        GridSpec::new(self.grid.n, self.grid.l).map_err(|e| config_error("grid", e.to_string()))
    }

    /// Errors name the offending key.
    pub fn validate(&self) -> Result<(), CliError> {
        self.grid()?;
        self.sim_config()?.validate().map_err(|e| match e {
            XnlsError::Config { key, detail } => config_error(toml_key(&key), detail),
            other => CliError::Config(other.to_string()),
        })?;
        if self.diagnostics.snapshot_every == 0 {
            return Err(config_error("diagnostics.snapshot_every", "must be at least 1"));
        }
        for iv in &self.diagnostics.intervals {
            if !(iv[0] >= 0.0 && iv[1] > iv[0]) {
                return Err(config_error("diagnostics.intervals", format!("[{}, {}] is not an interval", iv[0], iv[1])));
            }
        }
        if !(self.diagnostics.scattering_tol > 0.0) {
            return Err(config_error("diagnostics.scattering_tol", "must be positive"));
        }
        if self.bank.moser_alphas.is_empty() {
            return Err(config_error("bank.moser_alphas", "needs at least one value"));
        }
        OrliczSpec::new(self.orlicz.variant, self.orlicz.threshold)
            .map_err(|e| config_error("orlicz.threshold", e.to_string()))?;
        if self.output.formats.is_empty() {
            return Err(config_error("output.formats", "needs at least one format"));
        }
        let h1 = match &self.initial {
            InitialSection::Zero => None,
            InitialSection::Gaussian { width, h1, .. } => {
                if !(*width > 0.0) {
                    return Err(config_error("initial.width", "must be positive"));
                }
                *h1
            }
            InitialSection::Moser { alpha, h1 } | InitialSection::Profile { alpha, h1, .. } => {
                if !(*alpha > 0.0) {
                    return Err(config_error("initial.alpha", "must be positive"));
                }
                *h1
            }
            InitialSection::File { h1, .. } => *h1,
        };
        if let Some(h) = h1 {
            if !(h >= 0.0 && h.is_finite()) {
                return Err(config_error("initial.h1", "must be finite and nonnegative"));
            }
        }
        Ok(())
    }

    pub fn sim_config(&self) -> Result<SimConfig, CliError> {
        let mut cfg = SimConfig::new(self.grid()?, self.time.dt, self.time.t_end);
        cfg.output_every = self.time.output_every;
        cfg.nonlinear = self.time.nonlinear;
        cfg.boundary_policy = self.time.boundary_policy;
        cfg.boundary_threshold = self.time.boundary_threshold;
        cfg.virial_r = self.virial.radii.clone();
        cfg.virial_every = self.virial.every;
        Ok(cfg)
    }

    pub fn suite_config(&self) -> Result<SuiteConfig, CliError> {
        let b = &self.bank;
        Ok(SuiteConfig {
            seed: b.seed,
            random_count: b.random_count,
            grid: self.grid()?,
            moser_alphas: b.moser_alphas.clone(),
            lambda: b.lambda,
            mu: b.mu,
            delta: b.delta,
            epsilon: b.epsilon,
            cond_l4_tol: b.cond_l4_tol,
        })
    }

    pub fn orlicz_spec(&self) -> Result<OrliczSpec, CliError> {
        OrliczSpec::new(self.orlicz.variant, self.orlicz.threshold).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn window_start(&self) -> f64 {
        if self.diagnostics.window_start >= 0.0 {
            self.diagnostics.window_start
        } else {
            2.0 * self.time.t_end / 3.0
        }
    }

    /// Initial field on the configured grid; relative file paths resolve against `base`.
    pub fn initial_field(&self, base: &Path) -> Result<Field2D, CliError> {
        let grid = self.grid()?;
        let (u, h1) = match &self.initial {
            InitialSection::Zero => (Field2D::zeros(grid), None),
            InitialSection::Gaussian { amplitude, width, center, h1 } => {
                (xnls_core::field::gaussian(grid, *amplitude, *width, (center[0], center[1])), *h1)
            }
            InitialSection::Moser { alpha, h1 } => {
                let f = ScaledProfileField::moser(*alpha).map_err(|e| config_error("initial.alpha", e.to_string()))?;
                (f.to_field(grid), *h1)
            }
            InitialSection::Profile { profile, alpha, h1 } => {
                let p = profile.profile().map_err(|e| config_error("initial.profile", e.to_string()))?;
                let f = ScaledProfileField::new(p, *alpha).map_err(|e| config_error("initial.alpha", e.to_string()))?;
                (f.to_field(grid), *h1)
            }
            InitialSection::File { path, h1 } => {
                let full = if path.is_absolute() { path.clone() } else { base.join(path) };
                let (_, u) = read_snapshot(&full)
                    .map_err(|e| config_error("initial.path", format!("`{}`: {e}", full.display())))?;
                if *u.grid() != grid {
                    return Err(config_error("initial.path", "snapshot grid differs from [grid]"));
                }
                (u, *h1)
            }
        };
        Ok(match h1 {
            Some(target) if !u.is_zero() => {
                let scale = target / u.h1();
                u.scaled(scale)
            }
            Some(_) | None => u,
        })
    }

    /// The resolved config as TOML.
    pub fn echo(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Runtime(format!("cannot serialize config: {e}")))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

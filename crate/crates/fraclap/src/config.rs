//! Run configuration. Precedence: flags, then `FRACLAP_OUTPUT_DIR` (output
//! directory only), then the TOML config file, then defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{CliError, CliResult};
use crate::formats::DataFormat;

pub const OUTPUT_DIR_ENV: &str = "FRACLAP_OUTPUT_DIR";

pub const DEFAULT_ALPHA: f64 = 1.5;
pub const DEFAULT_H: f64 = 1.0;
pub const DEFAULT_N: usize = 64;
pub const DEFAULT_SIGMA: f64 = 4.0;
pub const DEFAULT_QUAD_TOL: f64 = 1e-12;
pub const DEFAULT_OUTPUT_DIR: &str = "fraclap-out";

/// Keys accepted in the config file. All optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub alpha: Option<f64>,
    pub h: Option<f64>,
    #[serde(alias = "N")]
    pub n: Option<usize>,
    #[serde(alias = "M")]
    pub m: Option<usize>,
    pub quad_tol: Option<f64>,
    pub sigma: Option<f64>,
    pub output_dir: Option<PathBuf>,
    pub format: Option<DataFormat>,
    pub seed: Option<u64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Validation(format!("config file {}: {e}", path.display())))
    }
}

/// Values supplied on the command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub alpha: Option<f64>,
    pub h: Option<f64>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub quad_tol: Option<f64>,
    pub sigma: Option<f64>,
    pub output_dir: Option<PathBuf>,
    pub format: Option<DataFormat>,
    pub seed: Option<u64>,
}

/// Fully resolved parameters shared by every command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub alpha: f64,
    pub h: f64,
    pub n: usize,
    /// Padded size; `2N` unless given.
    pub m: usize,
    pub quad_tol: f64,
    pub sigma: f64,
    pub output_dir: PathBuf,
    pub format: DataFormat,
    /// Reserved; nothing here is stochastic.
    pub seed: u64,
}

impl RunConfig {
    pub fn resolve(flags: &Overrides, env_output_dir: Option<PathBuf>, file: &FileConfig) -> Self {
        let n = flags.n.or(file.n).unwrap_or(DEFAULT_N);
        RunConfig {
            alpha: flags.alpha.or(file.alpha).unwrap_or(DEFAULT_ALPHA),
            h: flags.h.or(file.h).unwrap_or(DEFAULT_H),
            n,
            m: flags.m.or(file.m).unwrap_or(2 * n),
            quad_tol: flags.quad_tol.or(file.quad_tol).unwrap_or(DEFAULT_QUAD_TOL),
            sigma: flags.sigma.or(file.sigma).unwrap_or(DEFAULT_SIGMA),
            output_dir: flags
                .output_dir
                .clone()
                .or(env_output_dir)
                .or_else(|| file.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
            format: flags.format.or(file.format).unwrap_or(DataFormat::Csv),
            seed: flags.seed.or(file.seed).unwrap_or(0),
        }
    }

    /// Reads the environment and the optional config file.
    pub fn load(flags: &Overrides, config_path: Option<&Path>) -> CliResult<Self> {
        let file = match config_path {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let env = std::env::var_os(OUTPUT_DIR_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from);
        Ok(Self::resolve(flags, env, &file))
    }

    pub fn validate_spec(&self) -> CliResult<()> {
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(CliError::Validation(format!("alpha must lie in (0, 2], got {}", self.alpha)));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(CliError::Validation(format!("h must be positive and finite, got {}", self.h)));
        }
        if !(self.quad_tol > 0.0 && self.quad_tol.is_finite()) {
            return Err(CliError::Validation(format!("quad-tol must be positive, got {}", self.quad_tol)));
        }
        Ok(())
    }

    pub fn validate_register(&self) -> CliResult<()> {
        if self.n < 2 || !self.n.is_power_of_two() {
            return Err(CliError::Validation(format!("N must be a power of two >= 2, got {}", self.n)));
        }
        Ok(())
    }

    pub fn validate_padding(&self) -> CliResult<()> {
        self.validate_register()?;
        validate_padded(self.n, self.m)
    }

    pub fn validate_sigma(&self) -> CliResult<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(CliError::Validation(format!("sigma must be positive, got {}", self.sigma)));
        }
        Ok(())
    }

    pub fn spec(&self) -> CliResult<fraclap_core::KernelSpec> {
        self.validate_spec()?;
        Ok(fraclap_core::KernelSpec::new(self.alpha, self.h)?)
    }
}

pub fn validate_padded(n: usize, m: usize) -> CliResult<()> {
    if !m.is_power_of_two() || m < 2 * n {
        return Err(CliError::Validation(format!(
            "M must be a power of two with M >= 2N, got N={n}, M={m}"
        )));
    }
    Ok(())
}

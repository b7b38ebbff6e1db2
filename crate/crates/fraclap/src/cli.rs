use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::Overrides;
use crate::formats::DataFormat;

#[derive(Debug, Parser)]
#[command(name = "fraclap", version, about = "Open-boundary fractional Laplacian: kernels, identity checks, figure data and padding plans")]
pub struct Cli {
    /// TOML file with default parameters.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides FRACLAP_OUTPUT_DIR and the config file).
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<DataFormat>,
    /// Reserved for future stochastic experiments.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SpecArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub h: Option<f64>,
    #[arg(long)]
    pub quad_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SizeArgs {
    /// Register size.
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// Padded size (default 2N).
    #[arg(long = "M")]
    pub m: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Kernel coefficients and the decay-bound comparison.
    Kernel {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value_t = 32)]
        max_index: usize,
    },
    /// Run the identity checks and write a report.
    Verify {
        /// Run the three-dimensional suite at (N, M), default (2, 4).
        #[arg(long)]
        three_d: bool,
        #[command(flatten)]
        sizes: SizeArgs,
        /// Corrupt an operator entry before checking.
        #[arg(long, value_enum)]
        perturb: Option<Perturbation>,
    },
    /// Emit the data behind one figure.
    Figure {
        #[arg(value_enum)]
        kind: FigureKind,
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        sizes: SizeArgs,
        /// Padded sizes for the scaling experiment.
        #[arg(long = "M-list", value_delimiter = ',')]
        m_list: Option<Vec<usize>>,
        /// Gaussian center index.
        #[arg(long, default_value_t = 0)]
        center: usize,
        /// Gaussian width in sites.
        #[arg(long)]
        sigma: Option<f64>,
        /// Sweep centers (default 0, N/8, ..., N/2).
        #[arg(long, value_delimiter = ',')]
        centers: Option<Vec<usize>>,
    },
    /// Smallest power-of-two M meeting a normalized residual tolerance.
    Plan {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long, allow_negative_numbers = true)]
        eps: f64,
        /// Largest M to accept.
        #[arg(long)]
        cap: Option<u64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Perturbation {
    /// Negate the (0, N-1) entry of every circulant checked for aliasing.
    Corner,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureKind {
    Heatmap,
    Functional,
    Scaling,
    Gaussian,
    Sweep,
    Corner,
}

impl FigureKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FigureKind::Heatmap => "heatmap",
            FigureKind::Functional => "functional",
            FigureKind::Scaling => "scaling",
            FigureKind::Gaussian => "gaussian",
            FigureKind::Sweep => "sweep",
            FigureKind::Corner => "corner",
        }
    }
}

impl Cli {
    /// Flag values for config resolution.
    pub fn overrides(&self) -> Overrides {
        let (spec, n, m, sigma) = match &self.command {
            Command::Kernel { spec, .. } => (Some(spec), None, None, None),
            Command::Verify { sizes, .. } => (None, sizes.n, sizes.m, None),
            Command::Figure { spec, sizes, sigma, .. } => (Some(spec), sizes.n, sizes.m, *sigma),
            Command::Plan { spec, n, .. } => (Some(spec), *n, None, None),
        };
        let spec = spec.cloned().unwrap_or_default();
        Overrides {
            alpha: spec.alpha,
            h: spec.h,
            n,
            m,
            quad_tol: spec.quad_tol,
            sigma,
            output_dir: self.output_dir.clone(),
            format: self.format,
            seed: self.seed,
        }
    }
}

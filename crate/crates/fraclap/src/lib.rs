//! Command line, dataset formats and verification suites around
//! [`fraclap_core`].

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod verify;

use cli::{Cli, Command};
use commands::{cmd_figure, cmd_kernel, cmd_plan, cmd_verify, verify_result, FigureOptions};
use config::RunConfig;
use error::CliResult;
use verify::VerifyOptions;

/// Runs one parsed invocation, printing a short summary to stdout.
pub fn run(cli: &Cli) -> CliResult<()> {
    let cfg = RunConfig::load(&cli.overrides(), cli.config.as_deref())?;
    match &cli.command {
        Command::Kernel { max_index, .. } => {
            let w = cmd_kernel(&cfg, *max_index)?;
            println!("wrote {}", w.data.display());
        }
        Command::Verify { three_d, sizes, perturb } => {
            let opts = VerifyOptions {
                three_d: *three_d,
                n: sizes.n.unwrap_or(2),
                m: sizes.m.unwrap_or(4),
                perturb: *perturb,
            };
            let outcome = cmd_verify(&cfg, &opts)?;
            for c in &outcome.checks {
                let status = if c.passed { "PASS" } else { "FAIL" };
                println!("{status} {} achieved={:.3e} tolerance={:.3e}", c.name, c.achieved, c.tolerance);
            }
            println!("wrote {}", outcome.written.data.display());
            verify_result(&outcome)?;
        }
        Command::Figure { kind, m_list, center, centers, .. } => {
            let opts = FigureOptions {
                m_list: m_list.clone(),
                center: *center,
                centers: centers.clone(),
            };
            let w = cmd_figure(&cfg, *kind, &opts)?;
            println!("wrote {}", w.data.display());
        }
        Command::Plan { eps, cap, .. } => {
            let p = cmd_plan(&cfg, *eps, *cap)?;
            println!(
                "M = {} certified: ||E||_2 <= {:.6e}, normalized {:.6e} <= eps = {:e}",
                p.plan.m, p.plan.bound, p.plan.normalized_bound, eps
            );
            println!("wrote {}", p.written.data.display());
        }
    }
    Ok(())
}

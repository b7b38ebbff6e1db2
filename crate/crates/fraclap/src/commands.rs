//! Command implementations. Each validates its inputs before computing and
//! returns the files it wrote.

use fraclap_core::diagnostics::{
    benchmark_functions, center_sweep, corner_report, functional_comparison, gaussian_diagnostics, heatmap,
};
use fraclap_core::error_analysis::{plan_padding, residual_report, DEFAULT_PLAN_CAP};
use fraclap_core::kernel::decay_bound;
use fraclap_core::KernelTable;
use serde_json::Value;

use crate::cli::{FigureKind, Perturbation};
use crate::config::{validate_padded, RunConfig};
use crate::error::{CliError, CliResult};
use crate::formats::{file_stem, short, Cell, Dataset, Table, Written};
use crate::verify::{run_suite, Check, VerifyOptions};

fn spec_params(cfg: &RunConfig) -> Vec<(&'static str, String)> {
    vec![("alpha", short(cfg.alpha)), ("h", short(cfg.h))]
}

fn base_dataset(experiment: &str, stem: String, table: Table, cfg: &RunConfig) -> Dataset {
    Dataset::new(experiment, stem, table)
        .param("alpha", cfg.alpha)
        .param("h", cfg.h)
        .param("quad_tol", cfg.quad_tol)
        .param("seed", cfg.seed)
}

/// Kernel coefficients `c_0..c_max` with the decay bound alongside.
pub fn cmd_kernel(cfg: &RunConfig, max_index: usize) -> CliResult<Written> {
    let spec = cfg.spec()?;
    let tab = KernelTable::new(spec, max_index, cfg.quad_tol)?;
    let mut t = Table::new(&[
        ("m", "lattice separation"),
        ("coeff", "kernel coefficient c_m"),
        ("decay_bound", "certified bound on |c_m| (empty at m = 0)"),
        ("ratio", "|c_m| / decay_bound"),
    ]);
    for (m, &c) in tab.coeffs().iter().enumerate() {
        if m == 0 {
            t.push(vec![m.into(), c.into(), Cell::Empty, Cell::Empty]);
        } else {
            let b = decay_bound(&spec, m as i64)?;
            t.push(vec![m.into(), c.into(), b.into(), (c.abs() / b).into()]);
        }
    }
    let mut params = spec_params(cfg);
    params.push(("max", max_index.to_string()));
    base_dataset("kernel", file_stem("kernel", &params), t, cfg)
        .param("max_index", max_index)
        .note("closed_form", spec.has_closed_form())
        .note("decay_exponent", spec.decay_exponent())
        .write(&cfg.output_dir, cfg.format)
}

/// Outcome of `verify`: the checks and the report files.
#[derive(Debug)]
pub struct VerifyOutcome {
    pub checks: Vec<Check>,
    pub written: Written,
}

impl VerifyOutcome {
    pub fn failed(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

/// Runs the suite and writes the report. The caller maps failures to the
/// exit code; see [`verify_result`].
pub fn cmd_verify(cfg: &RunConfig, opts: &VerifyOptions) -> CliResult<VerifyOutcome> {
    let checks = run_suite(opts)?;
    let mut t = Table::new(&[
        ("check", "check name with its parameters"),
        ("achieved", "achieved error (or norm for bound checks)"),
        ("tolerance", "bound-aware tolerance"),
        ("status", "pass or fail"),
    ]);
    for c in &checks {
        let status = if c.passed { "pass" } else { "fail" };
        t.push(vec![c.name.as_str().into(), c.achieved.into(), c.tolerance.into(), status.into()]);
    }
    let (experiment, stem) = if opts.three_d {
        ("verify3d", file_stem("verify3d", &[("N", opts.n.to_string()), ("M", opts.m.to_string())]))
    } else {
        ("verify", "verify".to_string())
    };
    let perturb = match opts.perturb {
        Some(Perturbation::Corner) => Value::from("corner"),
        None => Value::Null,
    };
    let failed = checks.iter().filter(|c| !c.passed).count();
    let written = Dataset::new(experiment, stem, t)
        .param("three_d", opts.three_d)
        .param("perturb", perturb)
        .note("checks", checks.len())
        .note("failed", failed)
        .write(&cfg.output_dir, cfg.format)?;
    Ok(VerifyOutcome { checks, written })
}

/// Verification error naming every failed check, if any.
pub fn verify_result(outcome: &VerifyOutcome) -> CliResult<()> {
    let failed = outcome.failed();
    if failed.is_empty() {
        return Ok(());
    }
    let names: Vec<&str> = failed.iter().map(|c| c.name.as_str()).collect();
    Err(CliError::Verification(format!("{} check(s) failed: {}", names.len(), names.join(", "))))
}

/// Extra figure options.
#[derive(Debug, Clone, Default)]
pub struct FigureOptions {
    pub m_list: Option<Vec<usize>>,
    pub center: usize,
    pub centers: Option<Vec<usize>>,
}

pub fn cmd_figure(cfg: &RunConfig, kind: FigureKind, opts: &FigureOptions) -> CliResult<Written> {
    let spec = cfg.spec()?;
    cfg.validate_register()?;
    let n = cfg.n;
    let name = kind.as_str();
    let mut params = spec_params(cfg);
    params.push(("N", n.to_string()));
    match kind {
        FigureKind::Heatmap => {
            let data = heatmap(&spec, n)?;
            let mut t = Table::new(&[
                ("i", "row"),
                ("j", "column"),
                ("target", "open-boundary Toeplitz entry"),
                ("surrogate", "periodic circulant entry"),
                ("abs_difference", "|surrogate - target|"),
            ]);
            for i in 0..n {
                for j in 0..n {
                    t.push(vec![
                        i.into(),
                        j.into(),
                        data.target[(i, j)].into(),
                        data.surrogate[(i, j)].into(),
                        data.difference[(i, j)].into(),
                    ]);
                }
            }
            base_dataset(name, file_stem(name, &params), t, cfg)
                .param("N", n)
                .note("corner_blocks_dominate", data.corner_blocks_dominate((n / 8).max(1)))
                .write(&cfg.output_dir, cfg.format)
        }
        FigureKind::Functional => {
            cfg.validate_padding()?;
            let m = cfg.m;
            params.push(("M", m.to_string()));
            let mut t = Table::new(&[
                ("function", "benchmark function name"),
                ("j", "site index"),
                ("x", "position j h"),
                ("input", "function sample"),
                ("target", "open-boundary action"),
                ("native", "native periodic action"),
                ("padded", "zero-padded compressed action"),
                ("native_error", "|native - target|"),
                ("padded_error", "|padded - target|"),
            ]);
            let mut summary = serde_json::Map::new();
            for f in benchmark_functions(n, cfg.h)? {
                let c = functional_comparison(&spec, n, m, &f)?;
                for j in 0..n {
                    t.push(vec![
                        f.name.into(),
                        j.into(),
                        (j as f64 * cfg.h).into(),
                        f.samples[j].into(),
                        c.target[j].into(),
                        c.native[j].into(),
                        c.padded[j].into(),
                        c.native_error[j].into(),
                        c.padded_error[j].into(),
                    ]);
                }
                summary.insert(
                    f.name.into(),
                    serde_json::json!({
                        "max_native_error": c.max_native_error(),
                        "max_padded_error": c.max_padded_error(),
                    }),
                );
            }
            base_dataset(name, file_stem(name, &params), t, cfg)
                .param("N", n)
                .param("M", m)
                .note("errors", Value::Object(summary))
                .note(
                    "functions",
                    "stand-in suite: gaussian bump (sigma = N/16 sites), (1 - y^2)^2 on the mapped unit interval, half-period sine",
                )
                .write(&cfg.output_dir, cfg.format)
        }
        FigureKind::Scaling => {
            let ms = opts.m_list.clone().unwrap_or_else(|| vec![2 * n, 4 * n, 8 * n, 16 * n]);
            for &m in &ms {
                validate_padded(n, m)?;
            }
            cfg.validate_sigma()?;
            let state = fraclap_core::diagnostics::GaussianState::new(n, 0, cfg.sigma)?;
            let r = residual_report(&spec, n, &ms, Some(state.samples()))?;
            let mut t = Table::new(&[
                ("M", "padded size"),
                ("offset", "M - N + 1"),
                ("spectral_norm", "dense ||E||_2"),
                ("tail_bound", "certified Schur bound"),
                ("normalized_norm", "||E||_2 / lambda_max"),
                ("normalized_bound", "bound / lambda_max"),
                ("state_error", "||E u||_2 / lambda_max for the boundary Gaussian u"),
            ]);
            for p in &r.points {
                t.push(vec![
                    p.m.into(),
                    (p.offset as usize).into(),
                    p.spectral_norm.into(),
                    p.tail_bound.into(),
                    (p.spectral_norm / r.lambda_max).into(),
                    (p.tail_bound / r.lambda_max).into(),
                    p.state_error.into(),
                ]);
            }
            let list: Vec<String> = ms.iter().map(|m| m.to_string()).collect();
            params.push(("M", list.join("-")));
            base_dataset(name, file_stem(name, &params), t, cfg)
                .param("N", n)
                .param("M_list", ms.clone())
                .param("state_center", 0)
                .param("sigma", cfg.sigma)
                .note("lambda_max", r.lambda_max)
                .note("fitted_slope", finite_or_null(r.fitted_slope))
                .note("bound_slope", finite_or_null(r.bound_slope))
                .note("predicted_slope", r.predicted_slope)
                .note("bounds_hold", r.bounds_hold())
                .write(&cfg.output_dir, cfg.format)
        }
        FigureKind::Gaussian => {
            cfg.validate_sigma()?;
            let d = gaussian_diagnostics(&spec, n, opts.center, cfg.sigma)?;
            let mut t = Table::new(&[
                ("j", "site index"),
                ("state", "unit-norm Gaussian sample"),
                ("target", "open-boundary action"),
                ("native", "native periodic action"),
                ("padded", "zero-padded action, M = 2N"),
            ]);
            for j in 0..n {
                t.push(vec![
                    j.into(),
                    d.state.samples()[j].into(),
                    d.target[j].into(),
                    d.native[j].into(),
                    d.padded[j].into(),
                ]);
            }
            params.push(("j", opts.center.to_string()));
            base_dataset(name, file_stem(name, &params), t, cfg)
                .param("N", n)
                .param("M", 2 * n)
                .param("center", opts.center)
                .param("sigma", cfg.sigma)
                .note("native_relative_error", d.native_relative_error())
                .note("padded_relative_error", d.padded_relative_error())
                .write(&cfg.output_dir, cfg.format)
        }
        FigureKind::Sweep => {
            cfg.validate_sigma()?;
            let centers = opts
                .centers
                .clone()
                .unwrap_or_else(|| (0..=8).step_by(2).map(|k| k * n / 16).collect());
            let sweep = center_sweep(&spec, n, cfg.sigma, &centers)?;
            let mut t = Table::new(&[
                ("center", "Gaussian center j0"),
                ("native", "||(native - A) u|| / ||A u||"),
                ("padded", "||(padded - A) u|| / ||A u||, M = 2N"),
            ]);
            for p in &sweep {
                t.push(vec![p.center.into(), p.native.into(), p.padded.into()]);
            }
            base_dataset(name, file_stem(name, &params), t, cfg)
                .param("N", n)
                .param("M", 2 * n)
                .param("sigma", cfg.sigma)
                .param("centers", centers)
                .write(&cfg.output_dir, cfg.format)
        }
        FigureKind::Corner => {
            let r = corner_report(&spec, n)?;
            let mut t = Table::new(&[
                ("N", "register size"),
                ("target", "open-boundary corner entry c_{-(N-1)}"),
                ("surrogate", "periodic corner entry"),
                ("difference", "surrogate - target"),
                ("dominant_image", "nearest image c_1"),
                ("remainder_bound", "bound on |difference - c_1|"),
            ]);
            t.push(vec![
                n.into(),
                r.target.into(),
                r.surrogate.into(),
                r.difference.into(),
                r.dominant_image.into(),
                r.remainder_bound.into(),
            ]);
            base_dataset(name, file_stem(name, &params), t, cfg)
                .param("N", n)
                .note("image_dominates", r.image_dominates())
                .write(&cfg.output_dir, cfg.format)
        }
    }
}

fn finite_or_null(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

/// Planned padding with its certificate.
#[derive(Debug)]
pub struct PlanOutcome {
    pub plan: fraclap_core::error_analysis::PaddingPlan,
    pub written: Written,
}

pub fn cmd_plan(cfg: &RunConfig, eps: f64, cap: Option<u64>) -> CliResult<PlanOutcome> {
    let spec = cfg.spec()?;
    cfg.validate_register()?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(CliError::Validation(format!("eps must be positive, got {eps}")));
    }
    let cap = cap.unwrap_or(DEFAULT_PLAN_CAP);
    let plan = plan_padding(&spec, cfg.n, eps, cap)?;
    let mut t = Table::new(&[
        ("N", "register size"),
        ("M", "planned padded size"),
        ("bound", "certified bound on ||E||_2"),
        ("normalized_bound", "bound / lambda_max"),
        ("eps", "requested tolerance"),
    ]);
    t.push(vec![cfg.n.into(), (plan.m as usize).into(), plan.bound.into(), plan.normalized_bound.into(), eps.into()]);
    let mut params = spec_params(cfg);
    params.push(("N", cfg.n.to_string()));
    params.push(("eps", format!("{eps:e}")));
    let written = base_dataset("plan", file_stem("plan", &params), t, cfg)
        .param("N", cfg.n)
        .param("eps", eps)
        .param("cap", cap)
        .write(&cfg.output_dir, cfg.format)?;
    Ok(PlanOutcome { plan, written })
}

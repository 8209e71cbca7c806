//! `mptv bench`: run a benchmark suite over (instance, kernel, method,
//! lambda, kappa, eps) combinations and emit one plot-ready CSV row per run.
//!
//! Rows execute in a worker pool; assembly order is fixed by the task list,
//! so the CSV is byte-deterministic (apart from the timing column) for a
//! given spec and seed. Every mptv row is additionally checked against the
//! solver's structural invariants, and any violation is recorded in the
//! row's status column.

use std::collections::HashMap;
use std::path::PathBuf;
use std::time::Instant;

use mptv_core::{
    apply_gradient, group_magnitudes, make_sparse_image, mptv_with_plan, psnr, ssim,
    tv_admm_with_plan, BlurKernel, FrequencyPlan, ImageGrid, MptvDiagnostics, SolverConfig,
};
use rayon::prelude::*;

use crate::config::{Method, RunConfig};
use crate::error::{CliError, Result};
use crate::imageio::load_kernel;
use crate::report::{fmt_metric, write_csv};

pub struct BenchSpec {
    /// Phantom family (only `sparse` exists today).
    pub suite: String,
    pub instances: usize,
    pub height: usize,
    pub width: usize,
    pub shapes: usize,
    /// Kernel spec strings or file paths.
    pub kernels: Vec<String>,
    pub methods: Vec<Method>,
    pub lambdas: Vec<f64>,
    /// Activation-count values to sweep; `None` means the zeta rule.
    pub kappas: Vec<Option<usize>>,
    /// Outer tolerances to sweep.
    pub eps_values: Vec<f64>,
    pub noise: f64,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub instance: usize,
    pub kernel: String,
    pub method: Method,
    pub lambda: f64,
    pub kappa: Option<usize>,
    pub eps: f64,
    pub psnr: f64,
    pub ssim: f64,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub time_ms: f64,
    /// `ok`, or the failure/violation description.
    pub status: String,
    /// Retained so callers (and the acceptance suite) can re-verify runs.
    pub diagnostics: Option<MptvDiagnostics>,
}

pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn all_failed(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.status != "ok")
    }
}

/// Column layout of the benchmark CSV. `time_ms` is the only
/// non-deterministic column.
pub const CSV_HEADER: [&str; 12] = [
    "instance",
    "kernel",
    "method",
    "lambda",
    "kappa",
    "eps",
    "psnr",
    "ssim",
    "outer_iterations",
    "inner_iterations",
    "time_ms",
    "status",
];

fn validate(spec: &BenchSpec) -> Result<()> {
    crate::commands::synth::check_family(&spec.suite)?;
    if spec.kernels.is_empty() {
        return Err(CliError::input("benchmark kernel list is empty"));
    }
    if spec.methods.is_empty() {
        return Err(CliError::input("benchmark method list is empty"));
    }
    if spec.lambdas.is_empty() {
        return Err(CliError::input("benchmark lambda list is empty"));
    }
    if spec.kappas.is_empty() || spec.eps_values.is_empty() {
        return Err(CliError::input("benchmark kappa/eps lists are empty"));
    }
    if spec.instances == 0 {
        return Err(CliError::input("benchmark needs at least one instance"));
    }
    if !spec.noise.is_finite() || spec.noise < 0.0 {
        return Err(CliError::input(format!(
            "noise level must be nonnegative and finite, got {}",
            spec.noise
        )));
    }
    Ok(())
}

struct Problem {
    truth: ImageGrid,
    observed: ImageGrid,
    plan: FrequencyPlan,
}

struct Task {
    instance: usize,
    kernel_idx: usize,
    method: Method,
    lambda: f64,
    kappa: Option<usize>,
    eps: f64,
}

pub fn run(spec: &BenchSpec, cfg: &RunConfig) -> Result<BenchReport> {
    validate(spec)?;

    let kernels: Vec<BlurKernel> = spec
        .kernels
        .iter()
        .map(|k| load_kernel(k))
        .collect::<Result<_>>()?;

    // One degraded problem per (instance, kernel); shared across methods and
    // parameter values. Seeds derive deterministically from the base seed.
    let mut problems: HashMap<(usize, usize), Problem> = HashMap::new();
    for inst in 0..spec.instances {
        let phantom_seed = cfg.seed.wrapping_add(7919 * inst as u64);
        let phantom = make_sparse_image((spec.height, spec.width), spec.shapes, phantom_seed)?;
        for (kidx, kernel) in kernels.iter().enumerate() {
            if kernel.height() > spec.height || kernel.width() > spec.width {
                return Err(CliError::input(format!(
                    "kernel '{}' ({}x{}) does not fit the {}x{} phantom",
                    spec.kernels[kidx],
                    kernel.height(),
                    kernel.width(),
                    spec.height,
                    spec.width
                )));
            }
            let noise_seed = phantom_seed.wrapping_add(104_729 * (kidx as u64 + 1));
            let observed = mptv_core::degrade(&phantom.image, kernel, spec.noise, noise_seed)?;
            let plan = FrequencyPlan::new(spec.height, spec.width, kernel)?;
            problems.insert(
                (inst, kidx),
                Problem {
                    truth: phantom.image.clone(),
                    observed,
                    plan,
                },
            );
        }
    }

    // kappa and eps only steer the mptv outer loop; collapse their sweeps for
    // the baseline so it is not re-run on identical settings.
    let mut tasks = Vec::new();
    for inst in 0..spec.instances {
        for kidx in 0..kernels.len() {
            for &method in &spec.methods {
                for &lambda in &spec.lambdas {
                    let (kappas, epses): (&[Option<usize>], &[f64]) = match method {
                        Method::Mptv => (&spec.kappas, &spec.eps_values),
                        Method::TvAdmm => (&spec.kappas[..1], &spec.eps_values[..1]),
                    };
                    for &kappa in kappas {
                        for &eps in epses {
                            tasks.push(Task {
                                instance: inst,
                                kernel_idx: kidx,
                                method,
                                lambda,
                                kappa,
                                eps,
                            });
                        }
                    }
                }
            }
        }
    }

    let rows: Vec<BenchRow> = tasks
        .par_iter()
        .map(|task| run_task(task, spec, cfg, &problems))
        .collect();

    let report = BenchReport { rows };
    if let Some(path) = &spec.out {
        let mut comments = cfg.comment_block();
        comments.push_str(&format!(
            "# suite = {}\n# instances = {}\n# size = {}x{}\n# shapes = {}\n# noise = {}\n# kernels = {}\n",
            spec.suite,
            spec.instances,
            spec.height,
            spec.width,
            spec.shapes,
            spec.noise,
            spec.kernels.join(";"),
        ));
        let csv_rows: Vec<Vec<String>> = report.rows.iter().map(row_to_csv).collect();
        write_csv(path, &comments, &CSV_HEADER, &csv_rows)?;
    }
    Ok(report)
}

fn row_to_csv(row: &BenchRow) -> Vec<String> {
    vec![
        row.instance.to_string(),
        row.kernel.clone(),
        row.method.to_string(),
        row.lambda.to_string(),
        row.kappa.map_or_else(|| "auto".to_string(), |k| k.to_string()),
        row.eps.to_string(),
        fmt_metric(row.psnr),
        fmt_metric(row.ssim),
        row.outer_iterations.to_string(),
        row.inner_iterations.to_string(),
        format!("{:.3}", row.time_ms),
        row.status.clone(),
    ]
}

fn run_task(
    task: &Task,
    spec: &BenchSpec,
    cfg: &RunConfig,
    problems: &HashMap<(usize, usize), Problem>,
) -> BenchRow {
    let problem = &problems[&(task.instance, task.kernel_idx)];
    let mut row = BenchRow {
        instance: task.instance,
        kernel: spec.kernels[task.kernel_idx].clone(),
        method: task.method,
        lambda: task.lambda,
        kappa: task.kappa,
        eps: task.eps,
        psnr: f64::NAN,
        ssim: f64::NAN,
        outer_iterations: 0,
        inner_iterations: 0,
        time_ms: 0.0,
        status: "ok".to_string(),
        diagnostics: None,
    };

    let solver_cfg = SolverConfig {
        lambda: task.lambda,
        kappa: task.kappa,
        eps_outer: task.eps,
        ..cfg.solver_config()
    };

    let started = Instant::now();
    let solved = match task.method {
        Method::Mptv => mptv_with_plan(&problem.observed, &problem.plan, &solver_cfg).map(
            |(x, diag)| {
                row.outer_iterations = diag.outer_iters();
                row.inner_iterations = diag.inner_iters.iter().sum();
                row.diagnostics = Some(diag);
                x
            },
        ),
        Method::TvAdmm => {
            let mut admm_cfg = solver_cfg.effective_inner();
            admm_cfg.lambda = task.lambda;
            tv_admm_with_plan(&problem.observed, &problem.plan, &admm_cfg).map(|(x, state)| {
                row.outer_iterations = 1;
                row.inner_iterations = state.iter;
                x
            })
        }
    };
    row.time_ms = started.elapsed().as_secs_f64() * 1e3;

    match solved {
        Ok(x) => {
            match (psnr(&x, &problem.truth), ssim(&x, &problem.truth)) {
                (Ok(p), Ok(s)) => {
                    row.psnr = p;
                    row.ssim = s;
                }
                (Err(e), _) | (_, Err(e)) => {
                    row.status = format!("metric failure: {e}");
                }
            }
            if let Some(diag) = &row.diagnostics {
                if let Err(violation) = verify_invariants(diag, &x, &solver_cfg) {
                    row.status = format!("invariant violation: {violation}");
                }
            }
        }
        Err(e) => {
            row.status = format!("solver failure: {e}");
        }
    }
    row
}

/// Structural invariants every mptv run must satisfy:
/// pairwise-disjoint activation batches of size at most kappa, a
/// nonincreasing outer objective (relative slack 1e-8), off-support gradient
/// magnitudes at most 1e-3 of the on-support maximum at termination, and the
/// outer-iteration cap.
pub fn verify_invariants(
    diag: &MptvDiagnostics,
    x: &ImageGrid,
    cfg: &SolverConfig,
) -> std::result::Result<(), String> {
    let support = diag
        .final_support
        .as_ref()
        .ok_or("diagnostics carry no final support")?;

    // Activation batches: pairwise disjoint, each of size <= kappa.
    let mut seen = vec![false; support.pixel_count()];
    for (t, batch) in support.increments().iter().enumerate() {
        if batch.len() > diag.kappa {
            return Err(format!(
                "iteration {} activated {} pixels, kappa = {}",
                t + 1,
                batch.len(),
                diag.kappa
            ));
        }
        for &i in batch {
            if seen[i] {
                return Err(format!("pixel {i} activated twice"));
            }
            seen[i] = true;
        }
    }

    // Outer objective nonincreasing within relative slack.
    let mut prev = diag.psi0;
    for (t, &psi) in diag.psi.iter().enumerate() {
        if psi > prev + 1e-8 * prev.abs().max(diag.psi0) {
            return Err(format!(
                "objective increased at outer iteration {}: {prev} -> {psi}",
                t + 1
            ));
        }
        prev = psi;
    }

    // Off-support gradients annihilated relative to on-support content.
    let g = group_magnitudes(&apply_gradient(x));
    let mask = support.mask();
    let mut on_max = 0.0f64;
    let mut off_max = 0.0f64;
    for (i, &v) in g.as_slice().iter().enumerate() {
        if mask[i] {
            on_max = on_max.max(v);
        } else {
            off_max = off_max.max(v);
        }
    }
    if on_max > 0.0 && off_max > 1e-3 * on_max {
        return Err(format!(
            "off-support gradient {off_max:.3e} exceeds 1e-3 of on-support max {on_max:.3e}"
        ));
    }

    if diag.outer_iters() > cfg.max_outer {
        return Err(format!(
            "{} outer iterations exceed the cap {}",
            diag.outer_iters(),
            cfg.max_outer
        ));
    }
    Ok(())
}

/// Builds the linear lambda grid `count` points from `min` to `max`
/// inclusive (the sensitivity-sweep layout).
pub fn lambda_grid(count: usize, min: f64, max: f64) -> Result<Vec<f64>> {
    if count < 2 || !(min > 0.0) || !(max > min) {
        return Err(CliError::input(format!(
            "invalid lambda grid ({count} points in [{min}, {max}])"
        )));
    }
    let step = (max - min) / (count - 1) as f64;
    Ok((0..count).map(|i| min + step * i as f64).collect())
}

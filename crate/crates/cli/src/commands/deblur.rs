//! `mptv deblur`: restore an image given its blur kernel.
//!
//! Grayscale inputs run the chosen solver directly. Color inputs share one
//! gradient support: the activation loop runs on the Rec. 601 luminance and
//! each channel then solves the support-constrained subproblem, keeping
//! channel edges aligned.

use std::time::Instant;

use mptv_core::{
    mptv_with_plan, solve_subproblem, tv_admm_with_plan, FrequencyPlan, ImageGrid,
    MptvDiagnostics,
};

use crate::config::{Method, RunConfig};
use crate::error::{CliError, Result};
use crate::imageio::{load_image, load_kernel, save_image};
use crate::report::write_csv;

/// What a deblur run produced, for callers that want to inspect it.
pub struct DeblurOutcome {
    pub restored: Vec<ImageGrid>,
    /// Present for the mptv method (from the support-driving channel).
    pub diagnostics: Option<MptvDiagnostics>,
    /// Inner iterations of the tv-admm baseline (driving channel).
    pub baseline_iterations: Option<usize>,
    pub elapsed_ms: f64,
}

pub fn run(cfg: &RunConfig) -> Result<DeblurOutcome> {
    let input = cfg
        .input
        .as_ref()
        .ok_or_else(|| CliError::input("deblur requires an input image (--input)"))?;
    let kernel_src = cfg
        .kernel
        .as_ref()
        .ok_or_else(|| CliError::input("deblur requires a kernel (--kernel)"))?;
    let output = cfg
        .output
        .as_ref()
        .ok_or_else(|| CliError::input("deblur requires an output path (--output)"))?;

    let img = load_image(input)?;
    let kernel = load_kernel(kernel_src)?;
    let plan = FrequencyPlan::new(img.height(), img.width(), &kernel)?;

    let started = Instant::now();
    let outcome = match cfg.method {
        Method::Mptv => {
            let solver_cfg = cfg.solver_config();
            if img.is_color() {
                let (_, diag) = mptv_with_plan(&img.luminance(), &plan, &solver_cfg)?;
                let support = diag
                    .final_support
                    .clone()
                    .expect("solver always records its final support");
                let inner = solver_cfg.effective_inner();
                let restored = img
                    .channels
                    .iter()
                    .map(|ch| {
                        let x0 = ImageGrid::filled(ch.height(), ch.width(), ch.mean())?;
                        solve_subproblem(ch, &plan, &support, &inner, x0).map(|(x, _)| x)
                    })
                    .collect::<mptv_core::Result<Vec<_>>>()?;
                DeblurOutcome {
                    restored,
                    diagnostics: Some(diag),
                    baseline_iterations: None,
                    elapsed_ms: 0.0,
                }
            } else {
                let (x, diag) = mptv_with_plan(&img.channels[0], &plan, &solver_cfg)?;
                DeblurOutcome {
                    restored: vec![x],
                    diagnostics: Some(diag),
                    baseline_iterations: None,
                    elapsed_ms: 0.0,
                }
            }
        }
        Method::TvAdmm => {
            let admm_cfg = cfg.admm_config();
            let mut iters = 0;
            let restored = img
                .channels
                .iter()
                .map(|ch| {
                    tv_admm_with_plan(ch, &plan, &admm_cfg).map(|(x, state)| {
                        iters = iters.max(state.iter);
                        x
                    })
                })
                .collect::<mptv_core::Result<Vec<_>>>()?;
            DeblurOutcome {
                restored,
                diagnostics: None,
                baseline_iterations: Some(iters),
                elapsed_ms: 0.0,
            }
        }
    };
    let outcome = DeblurOutcome {
        elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
        ..outcome
    };

    save_image(output, &outcome.restored, img.sixteen_bit)?;
    if let Some(path) = &cfg.diagnostics {
        write_diagnostics(path, cfg, &outcome)?;
    }
    Ok(outcome)
}

fn write_diagnostics(path: &std::path::Path, cfg: &RunConfig, outcome: &DeblurOutcome) -> Result<()> {
    match (&outcome.diagnostics, outcome.baseline_iterations) {
        (Some(diag), _) => {
            let header = [
                "outer_iteration",
                "psi",
                "activated",
                "support_size",
                "inner_iterations",
                "fit_norm",
                "elapsed_ms",
            ];
            let mut rows = Vec::with_capacity(diag.outer_iters());
            for t in 0..diag.outer_iters() {
                rows.push(vec![
                    (t + 1).to_string(),
                    format!("{:.12e}", diag.psi[t]),
                    diag.activated[t].to_string(),
                    diag.support_sizes[t].to_string(),
                    diag.inner_iters[t].to_string(),
                    format!("{:.12e}", diag.fit_norms[t]),
                    format!("{:.3}", diag.outer_elapsed_ms[t]),
                ]);
            }
            let mut comments = cfg.comment_block();
            comments.push_str(&format!("# kappa_selected = {}\n", diag.kappa));
            comments.push_str(&format!("# stop_reason = {}\n", diag.stop_reason));
            write_csv(path, &comments, &header, &rows)
        }
        (None, Some(iters)) => {
            let header = ["iterations"];
            write_csv(
                path,
                &cfg.comment_block(),
                &header,
                &[vec![iters.to_string()]],
            )
        }
        (None, None) => Ok(()),
    }
}

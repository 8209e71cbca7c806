//! The matching-pursuit outer loop: dual recovery of the violation field,
//! most-violated-constraint selection, activation-count choice, optional
//! support refinement, and early stopping.
//!
//! Each outer iteration looks at the fit residual `alpha = y - Ax`, recovers
//! an approximate dual field `beta = (D D^T + r I)^{-1} D A^T alpha`, scores
//! every pixel by `g_i = ||beta_i||_2`, activates the top `kappa` scorers not
//! yet in the support, and re-solves the constrained subproblem warm-started
//! from the previous image.

use num_complex::Complex;

use crate::admm::{solve_subproblem_from, AdmmConfig, AdmmState};
use crate::error::{CoreError, Result};
use crate::fft::FrequencyPlan;
use crate::grid::{group_magnitudes, tv_value, BlurKernel, GradientField, ImageGrid};
use crate::support::{refine_support, SupportSet};

/// Parameters of the full solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// TV weight `lambda > 0`.
    pub lambda: f64,
    /// Inner ADMM penalty `rho > 0`.
    pub rho: f64,
    /// Ridge weight of the dual recovery, `r > 0`.
    pub r: f64,
    /// Activation-count threshold fraction in (0, 1].
    pub zeta: f64,
    /// Explicit activation count; overrides the `zeta` rule when set.
    pub kappa: Option<usize>,
    /// Relative-change tolerance on the outer objective.
    pub eps_outer: f64,
    /// Cap on outer iterations.
    pub max_outer: usize,
    /// Morphological support refinement after each activation.
    pub refine: bool,
    /// Inner-solver stopping knobs. Its `lambda` and `rho` fields are
    /// superseded by the top-level values above.
    pub inner: AdmmConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: 1e-4,
            rho: 1e-2,
            r: 1e-3,
            zeta: 0.6,
            kappa: None,
            eps_outer: 1e-3,
            max_outer: 7,
            refine: false,
            inner: AdmmConfig::default(),
        }
    }
}

impl SolverConfig {
    /// The inner configuration actually used: top-level `lambda`/`rho`
    /// combined with the inner stopping knobs.
    pub fn effective_inner(&self) -> AdmmConfig {
        AdmmConfig {
            lambda: self.lambda,
            rho: self.rho,
            eps_in: self.inner.eps_in,
            min_iters: self.inner.min_iters,
            max_iters: self.inner.max_iters,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.effective_inner().validate()?;
        if !(self.r > 0.0) || !self.r.is_finite() {
            return Err(CoreError::InvalidParameter(format!(
                "ridge weight r must be positive and finite, got {}",
                self.r
            )));
        }
        if !(self.zeta > 0.0 && self.zeta <= 1.0) {
            return Err(CoreError::InvalidParameter(format!(
                "zeta must lie in (0, 1], got {}",
                self.zeta
            )));
        }
        if let Some(k) = self.kappa {
            if k == 0 {
                return Err(CoreError::InvalidParameter(
                    "kappa override must be at least 1".to_string(),
                ));
            }
        }
        if !(self.eps_outer > 0.0) || !self.eps_outer.is_finite() {
            return Err(CoreError::InvalidParameter(format!(
                "eps_outer must be positive and finite, got {}",
                self.eps_outer
            )));
        }
        if self.max_outer == 0 {
            return Err(CoreError::InvalidParameter(
                "max_outer must be positive".to_string(),
            ));
        }
        Ok(())
    }
}

/// Why the outer loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Relative objective change fell below `eps_outer`.
    Converged,
    /// Hit the outer iteration cap.
    MaxOuter,
    /// No inactive pixels remained to activate.
    Saturated,
    /// The observation is already fit by the constant initialization.
    ConstantFit,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            StopReason::Converged => "converged",
            StopReason::MaxOuter => "max-outer",
            StopReason::Saturated => "saturated",
            StopReason::ConstantFit => "constant-fit",
        };
        f.write_str(s)
    }
}

/// Per-iteration records of one solver run. All vectors have one entry per
/// executed outer iteration.
#[derive(Debug, Clone)]
pub struct MptvDiagnostics {
    /// Objective at the constant initialization.
    pub psi0: f64,
    /// Activation count per iteration (from the `zeta` rule or the override).
    pub kappa: usize,
    /// Objective `||y - Ax||^2 + lambda * TV(x)` after each iteration.
    pub psi: Vec<f64>,
    /// `|C_t|` actually activated each iteration.
    pub activated: Vec<usize>,
    /// `|S_t|` after union (and refinement, when enabled).
    pub support_sizes: Vec<usize>,
    /// The violation-score map each activation was selected from.
    pub g_maps: Vec<ImageGrid>,
    /// Inner ADMM iterations spent per subproblem.
    pub inner_iters: Vec<usize>,
    /// Fit norms `||y - Ax^t||_2`.
    pub fit_norms: Vec<f64>,
    /// Dual objective proxy `-0.5*||alpha||^2 + alpha . y` per iteration.
    pub dual_proxy: Vec<f64>,
    /// Wall-clock milliseconds spent in each outer iteration.
    pub outer_elapsed_ms: Vec<f64>,
    /// The support set at termination (after any refinement).
    pub final_support: Option<SupportSet>,
    pub stop_reason: StopReason,
}

impl MptvDiagnostics {
    fn new(psi0: f64) -> Self {
        Self {
            psi0,
            kappa: 0,
            psi: Vec::new(),
            activated: Vec::new(),
            support_sizes: Vec::new(),
            g_maps: Vec::new(),
            inner_iters: Vec::new(),
            fit_norms: Vec::new(),
            dual_proxy: Vec::new(),
            outer_elapsed_ms: Vec::new(),
            final_support: None,
            stop_reason: StopReason::MaxOuter,
        }
    }

    /// Number of outer iterations executed.
    pub fn outer_iters(&self) -> usize {
        self.psi.len()
    }
}

/// Recovers the approximate dual field
/// `beta = (D D^T + r I)^{-1} D A^T alpha` spectrally. The 2x2 per-frequency
/// system is solved through its Schur-complement factors `(S_v, S_h, T_v,
/// T_h)`, which stay well conditioned because the ridge bounds the
/// denominators away from zero.
pub fn recover_beta(alpha: &ImageGrid, plan: &FrequencyPlan, r: f64) -> Result<GradientField> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(CoreError::InvalidParameter(format!(
            "ridge weight r must be positive and finite, got {r}"
        )));
    }
    if alpha.height() != plan.height() || alpha.width() != plan.width() {
        return Err(CoreError::DimensionMismatch {
            expected_h: plan.height(),
            expected_w: plan.width(),
            got_h: alpha.height(),
            got_w: alpha.width(),
        });
    }
    let alpha_spec = plan.forward(alpha);
    let n = alpha_spec.len();
    let mut beta_v_spec = vec![Complex::default(); n];
    let mut beta_h_spec = vec![Complex::default(); n];
    let kernel = plan.kernel_spec();
    let dv = plan.grad_v_spec();
    let dh = plan.grad_h_spec();
    let pv2 = plan.grad_v_power();
    let ph2 = plan.grad_h_power();
    for i in 0..n {
        // Right-hand side: D A^T alpha.
        let q = kernel[i].conj() * alpha_spec[i];
        let p_v = dv[i] * q;
        let p_h = dh[i] * q;
        // Per-frequency system [[|dv|^2+r, dv*conj(dh)], [dh*conj(dv), |dh|^2+r]].
        let a = pv2[i] + r;
        let d = ph2[i] + r;
        let b = dv[i] * dh[i].conj();
        let cross = pv2[i] * ph2[i];
        let s_v = d - cross / a;
        let s_h = a - cross / d;
        let t_v = -b / (a * s_v);
        let t_h = -b.conj() / (d * s_h);
        beta_v_spec[i] = p_v / s_h + t_v * p_h;
        beta_h_spec[i] = t_h * p_v + p_h / s_v;
    }
    Ok(GradientField {
        vertical: plan.inverse_real(beta_v_spec),
        horizontal: plan.inverse_real(beta_h_spec),
    })
}

/// Violation scores `g_i = ||beta_i||_2`.
pub fn violation_scores(beta: &GradientField) -> ImageGrid {
    group_magnitudes(beta)
}

/// Chooses the per-iteration activation count from the initial score map:
/// the number of entries strictly above `zeta * max(g0)`. At `zeta = 1`
/// that count is zero, so the multiplicity of the maximum is used instead;
/// the result is always at least 1.
pub fn select_kappa(g0: &ImageGrid, zeta: f64) -> Result<usize> {
    if !(zeta > 0.0 && zeta <= 1.0) {
        return Err(CoreError::InvalidParameter(format!(
            "zeta must lie in (0, 1], got {zeta}"
        )));
    }
    let max = g0.as_slice().iter().cloned().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return Err(CoreError::DegenerateInput(
            "violation scores are identically zero; the observation is already fit".to_string(),
        ));
    }
    let threshold = zeta * max;
    let count = g0.as_slice().iter().filter(|&&v| v > threshold).count();
    if count > 0 {
        Ok(count)
    } else {
        Ok(g0.as_slice().iter().filter(|&&v| v == max).count().max(1))
    }
}

/// Top-`kappa` indices of `g` outside the given support, ties broken by the
/// lower pixel index; returned sorted ascending. Pixels from any earlier
/// activation stay excluded even if refinement later dropped them, keeping
/// activation batches pairwise disjoint.
pub fn top_violations(g: &ImageGrid, kappa: usize, exclude: &SupportSet) -> Vec<usize> {
    let mut candidates: Vec<(usize, f64)> = g
        .as_slice()
        .iter()
        .enumerate()
        .filter(|(i, _)| !exclude.contains(*i) && !exclude.ever_activated(*i))
        .map(|(i, &v)| (i, v))
        .collect();
    candidates.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    candidates.truncate(kappa);
    let mut indices: Vec<usize> = candidates.into_iter().map(|(i, _)| i).collect();
    indices.sort_unstable();
    indices
}

/// Computes the violation scores for the current residual and returns the
/// at-most-`kappa` strongest inactive pixels (empty when the support is
/// saturated).
pub fn find_most_violated(
    alpha: &ImageGrid,
    kappa: usize,
    s_prev: &SupportSet,
    plan: &FrequencyPlan,
    r: f64,
) -> Result<Vec<usize>> {
    if kappa == 0 {
        return Err(CoreError::InvalidParameter(
            "kappa must be at least 1".to_string(),
        ));
    }
    let beta = recover_beta(alpha, plan, r)?;
    let g = violation_scores(&beta);
    Ok(top_violations(&g, kappa, s_prev))
}

/// The outer objective `psi(x) = ||y - Ax||_2^2 + lambda * TV(x)`.
pub fn outer_objective(
    x: &ImageGrid,
    y: &ImageGrid,
    plan: &FrequencyPlan,
    lambda: f64,
) -> Result<f64> {
    let fit = y.sub(&plan.convolve(x)?)?.norm();
    Ok(fit * fit + lambda * tv_value(x))
}

/// Runs the full matching-pursuit solver on observation `y` with kernel `k`.
pub fn mptv(
    y: &ImageGrid,
    kernel: &BlurKernel,
    cfg: &SolverConfig,
) -> Result<(ImageGrid, MptvDiagnostics)> {
    let plan = FrequencyPlan::new(y.height(), y.width(), kernel)?;
    mptv_with_plan(y, &plan, cfg)
}

/// [`mptv`] against a prebuilt frequency plan (avoids replanning in sweeps).
pub fn mptv_with_plan(
    y: &ImageGrid,
    plan: &FrequencyPlan,
    cfg: &SolverConfig,
) -> Result<(ImageGrid, MptvDiagnostics)> {
    cfg.validate()?;
    let (h, w) = (y.height(), y.width());
    if h != plan.height() || w != plan.width() {
        return Err(CoreError::DimensionMismatch {
            expected_h: plan.height(),
            expected_w: plan.width(),
            got_h: h,
            got_w: w,
        });
    }
    let inner_cfg = cfg.effective_inner();

    let mut x = ImageGrid::filled(h, w, y.mean())?;
    let mut support = SupportSet::empty(h, w)?;
    // One ADMM trajectory spans all outer iterations: the dual state carries
    // over so each enlarged support continues where the last solve stopped.
    let mut carry = AdmmState {
        x: x.clone(),
        z: GradientField::zeros(h, w)?,
        gamma: GradientField::zeros(h, w)?,
        iter: 0,
        fit_history: Vec::new(),
    };
    let psi0 = outer_objective(&x, y, plan, cfg.lambda)?;
    let psi_floor = if psi0 > 0.0 { psi0 } else { 1.0 };
    let mut psi_prev = psi0;
    let mut diag = MptvDiagnostics::new(psi0);

    let mut alpha = y.sub(&plan.convolve(&x)?)?;
    if alpha.norm() <= 1e-12 * y.norm().max(1.0) {
        // The constant initialization already explains the observation.
        diag.stop_reason = StopReason::ConstantFit;
        diag.final_support = Some(support);
        return Ok((x, diag));
    }
    let beta0 = recover_beta(&alpha, plan, cfg.r)?;
    let g0 = violation_scores(&beta0);
    let kappa = match cfg.kappa {
        Some(k) => k,
        None => select_kappa(&g0, cfg.zeta)?,
    };
    diag.kappa = kappa;

    let mut g_current = g0;
    for t in 1..=cfg.max_outer {
        let started = std::time::Instant::now();
        let c_t = top_violations(&g_current, kappa, &support);
        if c_t.is_empty() {
            diag.stop_reason = StopReason::Saturated;
            break;
        }
        support.record_increment(&c_t)?;
        if cfg.refine {
            support = refine_support(&support, (h, w))?;
        }

        carry.x = x;
        let (x_new, state) = solve_subproblem_from(y, plan, &support, &inner_cfg, carry)?;
        x = x_new;
        carry = state;
        alpha = y.sub(&plan.convolve(&x)?)?;
        let fit = alpha.norm();
        let psi_t = fit * fit + cfg.lambda * tv_value(&x);

        diag.psi.push(psi_t);
        diag.activated.push(c_t.len());
        diag.support_sizes.push(support.len());
        diag.g_maps.push(g_current.clone());
        diag.inner_iters.push(carry.iter);
        diag.fit_norms.push(fit);
        diag.dual_proxy.push(-0.5 * fit * fit + alpha.dot(y)?);
        diag.outer_elapsed_ms.push(started.elapsed().as_secs_f64() * 1e3);

        if (psi_prev - psi_t).abs() / psi_floor <= cfg.eps_outer {
            diag.stop_reason = StopReason::Converged;
            break;
        }
        psi_prev = psi_t;

        if t < cfg.max_outer {
            let beta = recover_beta(&alpha, plan, cfg.r)?;
            g_current = violation_scores(&beta);
        }
    }
    diag.final_support = Some(support);
    Ok((x, diag))
}

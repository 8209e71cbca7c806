//! Independent high-precision reference solver for the TV model, used only
//! to certify the production solvers on small instances.
//!
//! This is a primal-dual hybrid gradient (Chambolle-Pock) iteration — a
//! different algorithm family from the ADMM solvers it checks — run for a
//! long horizon and certified by an explicit first-order optimality residual
//! rather than by any shared solver code. It is deliberately slow and capped
//! to small images.

use crate::error::{CoreError, Result};
use crate::fft::FrequencyPlan;
use crate::grid::{apply_divergence, apply_gradient, tv_value, BlurKernel, GradientField, ImageGrid};

/// Largest pixel count the oracle accepts (32 x 32).
pub const ORACLE_PIXEL_CAP: usize = 1024;

const ORACLE_MIN_ITERS: usize = 10_000;
const ORACLE_MAX_ITERS: usize = 400_000;
const ORACLE_CHECK_EVERY: usize = 1_000;

/// Certification record of an oracle run.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub iterations: usize,
    /// Final objective `0.5*||Ax - y||^2 + lambda*TV(x)`.
    pub objective: f64,
    /// First-order residual `||A^T(Ax - y) + D^T q||` for the aligned dual
    /// certificate `q`.
    pub kkt_residual: f64,
    /// The residual target the run aimed for (`1e-5 * ||y||` scaled).
    pub kkt_target: f64,
}

/// The TV deconvolution objective `0.5*||Ax - y||^2 + lambda*TV(x)`.
pub fn tv_objective(x: &ImageGrid, y: &ImageGrid, plan: &FrequencyPlan, lambda: f64) -> Result<f64> {
    let fit = plan.convolve(x)?.sub(y)?.norm();
    Ok(0.5 * fit * fit + lambda * tv_value(x))
}

/// Builds the dual certificate from the current dual iterate: where the
/// gradient group is clearly nonzero the certificate must align with it at
/// radius `lambda`; elsewhere the iterate is projected into the lambda-ball.
fn certificate(q: &GradientField, gx: &GradientField, lambda: f64) -> GradientField {
    let n = q.len();
    let (h, w) = (q.height(), q.width());
    let mut cv = vec![0.0; n];
    let mut ch = vec![0.0; n];
    let (qv, qh) = (q.vertical.as_slice(), q.horizontal.as_slice());
    let (gv, gh) = (gx.vertical.as_slice(), gx.horizontal.as_slice());
    for i in 0..n {
        let gn = gv[i].hypot(gh[i]);
        if gn > 1e-9 {
            cv[i] = lambda * gv[i] / gn;
            ch[i] = lambda * gh[i] / gn;
        } else {
            let qn = qv[i].hypot(qh[i]);
            let scale = if qn > lambda { lambda / qn } else { 1.0 };
            cv[i] = qv[i] * scale;
            ch[i] = qh[i] * scale;
        }
    }
    GradientField {
        vertical: ImageGrid::from_vec_unchecked(h, w, cv),
        horizontal: ImageGrid::from_vec_unchecked(h, w, ch),
    }
}

/// Minimizes `0.5*||Ax - y||^2 + lambda*TV(x)` to high precision and returns
/// the solution with its certification report.
pub fn oracle_tv_solve_detailed(
    y: &ImageGrid,
    kernel: &BlurKernel,
    lambda: f64,
    tol: f64,
) -> Result<(ImageGrid, OracleReport)> {
    if y.len() > ORACLE_PIXEL_CAP {
        return Err(CoreError::OracleSizeCap {
            got: y.len(),
            cap: ORACLE_PIXEL_CAP,
        });
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(CoreError::InvalidParameter(format!(
            "lambda must be nonnegative and finite, got {lambda}"
        )));
    }
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(CoreError::InvalidParameter(format!(
            "tolerance must be positive and finite, got {tol}"
        )));
    }
    let (h, w) = (y.height(), y.width());
    let plan = FrequencyPlan::new(h, w, kernel)?;

    // Exact operator norm of K = [A; D] from the spectra.
    let norm_sq = plan
        .kernel_power()
        .iter()
        .zip(plan.grad_v_power().iter().zip(plan.grad_h_power()))
        .map(|(a, (dv, dh))| a + dv + dh)
        .fold(0.0f64, f64::max);
    let step = 0.95 / norm_sq.sqrt().max(1e-12);
    let (tau, sigma) = (step, step);

    let mut x = y.clone();
    let mut x_bar = y.clone();
    let mut p = ImageGrid::zeros(h, w)?;
    let mut q = GradientField::zeros(h, w)?;

    let kkt_target = 1e-5 * y.norm().max(1e-12);
    let mut last_objective = tv_objective(&x, y, &plan, lambda)?;
    let obj_floor = last_objective.abs().max(1e-12);
    let mut iterations = 0;
    let mut kkt_residual = f64::INFINITY;

    while iterations < ORACLE_MAX_ITERS {
        for _ in 0..ORACLE_CHECK_EVERY {
            // Dual ascent on the fit block: prox of (0.5*||. - y||^2)^*.
            let ax_bar = plan.convolve(&x_bar)?;
            for ((pp, ab), yy) in p
                .as_mut_slice()
                .iter_mut()
                .zip(ax_bar.as_slice())
                .zip(y.as_slice())
            {
                *pp = (*pp + sigma * (ab - yy)) / (1.0 + sigma);
            }
            // Dual ascent on the TV block: projection onto the lambda-ball.
            let gx_bar = apply_gradient(&x_bar);
            for i in 0..h * w {
                let nv = q.vertical.as_slice()[i] + sigma * gx_bar.vertical.as_slice()[i];
                let nh = q.horizontal.as_slice()[i] + sigma * gx_bar.horizontal.as_slice()[i];
                let nn = nv.hypot(nh);
                let scale = if nn > lambda { lambda / nn } else { 1.0 };
                q.vertical.as_mut_slice()[i] = nv * scale;
                q.horizontal.as_mut_slice()[i] = nh * scale;
            }
            // Primal descent and extrapolation.
            let atp = plan.correlate(&p)?;
            let dtq = apply_divergence(&q);
            for i in 0..h * w {
                let old = x.as_slice()[i];
                let new = old - tau * (atp.as_slice()[i] + dtq.as_slice()[i]);
                x.as_mut_slice()[i] = new;
                x_bar.as_mut_slice()[i] = 2.0 * new - old;
            }
            iterations += 1;
        }
        if !x.is_finite() {
            return Err(CoreError::Divergence {
                iter: iterations,
                rho: sigma,
            });
        }

        let objective = tv_objective(&x, y, &plan, lambda)?;
        let gx = apply_gradient(&x);
        let cert = certificate(&q, &gx, lambda);
        let grad_fit = plan.correlate(&plan.convolve(&x)?.sub(y)?)?;
        kkt_residual = grad_fit.add(&apply_divergence(&cert))?.norm();

        let settled = (last_objective - objective).abs() / obj_floor <= tol;
        last_objective = objective;
        if iterations >= ORACLE_MIN_ITERS && settled && kkt_residual <= kkt_target {
            break;
        }
    }

    let report = OracleReport {
        iterations,
        objective: last_objective,
        kkt_residual,
        kkt_target,
    };
    Ok((x, report))
}

/// [`oracle_tv_solve_detailed`] without the report.
pub fn oracle_tv_solve(
    y: &ImageGrid,
    kernel: &BlurKernel,
    lambda: f64,
    tol: f64,
) -> Result<ImageGrid> {
    oracle_tv_solve_detailed(y, kernel, lambda, tol).map(|(x, _)| x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_grid(h: usize, w: usize, seed: u64) -> ImageGrid {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..h * w).map(|_| rng.random_range(0.0..1.0)).collect();
        ImageGrid::from_vec(h, w, data).unwrap()
    }

    #[test]
    fn zero_lambda_delta_kernel_returns_observation() {
        let y = random_grid(8, 8, 3);
        let x = oracle_tv_solve(&y, &BlurKernel::delta(), 0.0, 1e-10).unwrap();
        let rel = x.sub(&y).unwrap().norm() / y.norm();
        assert!(rel < 1e-6, "relative error {rel}");
    }

    #[test]
    fn huge_lambda_returns_mean_image() {
        let y = random_grid(8, 8, 4);
        let x = oracle_tv_solve(&y, &BlurKernel::delta(), 1e4, 1e-10).unwrap();
        let mean = y.mean();
        for v in x.as_slice() {
            assert!((v - mean).abs() < 1e-4, "{v} vs {mean}");
        }
    }

    #[test]
    fn size_cap_enforced() {
        let y = ImageGrid::zeros(64, 64).unwrap();
        assert!(matches!(
            oracle_tv_solve(&y, &BlurKernel::delta(), 1e-4, 1e-8),
            Err(CoreError::OracleSizeCap { .. })
        ));
    }

    #[test]
    fn certified_on_a_small_instance() {
        let y = random_grid(12, 12, 5);
        let k = BlurKernel::from_vec(3, 3, vec![1.0; 9]).unwrap().normalized().unwrap();
        let (_, report) = oracle_tv_solve_detailed(&y, &k, 1e-4, 1e-9).unwrap();
        assert!(
            report.kkt_residual <= report.kkt_target,
            "kkt {} vs target {}",
            report.kkt_residual,
            report.kkt_target
        );
        assert!(report.iterations >= ORACLE_MIN_ITERS);
    }
}

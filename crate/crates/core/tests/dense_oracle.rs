//! Cross-checks the spectral solvers against dense linear algebra built by
//! applying the spatial operators to unit vectors — a fully independent
//! route to the same linear systems.

use mptv_core::{
    apply_divergence, apply_gradient, recover_beta, x_update, BlurKernel, FrequencyPlan,
    GradientField, ImageGrid,
};
use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

const H: usize = 8;
const W: usize = 8;
const N: usize = H * W;

fn random_grid(seed: u64) -> ImageGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..N).map(|_| rng.random_range(-1.0..1.0)).collect();
    ImageGrid::from_vec(H, W, data).unwrap()
}

fn test_kernel() -> BlurKernel {
    BlurKernel::from_vec(3, 3, vec![0.0, 0.15, 0.05, 0.1, 0.4, 0.1, 0.05, 0.15, 0.0])
        .unwrap()
        .normalized()
        .unwrap()
}

/// Dense n x n matrix of the blur operator, column by column.
fn dense_convolution(plan: &FrequencyPlan) -> DMatrix<f64> {
    DMatrix::from_fn(N, N, |i, j| {
        let mut e = vec![0.0; N];
        e[j] = 1.0;
        let col = plan
            .convolve(&ImageGrid::from_vec(H, W, e).unwrap())
            .unwrap();
        col.as_slice()[i]
    })
}

/// Dense 2n x n matrix of the stacked difference operator [D_v; D_h].
fn dense_gradient() -> DMatrix<f64> {
    DMatrix::from_fn(2 * N, N, |i, j| {
        let mut e = vec![0.0; N];
        e[j] = 1.0;
        let g = apply_gradient(&ImageGrid::from_vec(H, W, e).unwrap());
        if i < N {
            g.vertical.as_slice()[i]
        } else {
            g.horizontal.as_slice()[i - N]
        }
    })
}

#[test]
fn divergence_matches_dense_transpose() {
    let d = dense_gradient();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let zv: Vec<f64> = (0..N).map(|_| rng.random_range(-1.0..1.0)).collect();
    let zh: Vec<f64> = (0..N).map(|_| rng.random_range(-1.0..1.0)).collect();
    let z = GradientField {
        vertical: ImageGrid::from_vec(H, W, zv.clone()).unwrap(),
        horizontal: ImageGrid::from_vec(H, W, zh.clone()).unwrap(),
    };
    let fast = apply_divergence(&z);
    let stacked = DVector::from_iterator(2 * N, zv.into_iter().chain(zh));
    let dense = d.transpose() * stacked;
    for i in 0..N {
        assert!((fast.as_slice()[i] - dense[i]).abs() < 1e-12);
    }
}

#[test]
fn recover_beta_matches_dense_solve() {
    let kernel = test_kernel();
    let plan = FrequencyPlan::new(H, W, &kernel).unwrap();
    let alpha = random_grid(17);
    let r = 1e-3;

    let a = dense_convolution(&plan);
    let d = dense_gradient();
    // (D D^T + r I) beta = D A^T alpha, a dense 2n x 2n system.
    let m = &d * d.transpose() + DMatrix::identity(2 * N, 2 * N) * r;
    let alpha_vec = DVector::from_column_slice(alpha.as_slice());
    let rhs = &d * (a.transpose() * alpha_vec);
    let beta_dense = m.lu().solve(&rhs).expect("dense system is nonsingular");

    let beta = recover_beta(&alpha, &plan, r).unwrap();
    let mut max_err = 0.0f64;
    for i in 0..N {
        max_err = max_err.max((beta.vertical.as_slice()[i] - beta_dense[i]).abs());
        max_err = max_err.max((beta.horizontal.as_slice()[i] - beta_dense[N + i]).abs());
    }
    let scale = beta_dense.norm().max(1.0);
    assert!(
        max_err / scale <= 1e-8,
        "spectral vs dense mismatch: {max_err} (scale {scale})"
    );
}

#[test]
fn x_update_matches_dense_solve() {
    let kernel = test_kernel();
    let plan = FrequencyPlan::new(H, W, &kernel).unwrap();
    let y = random_grid(23);
    let nu = GradientField {
        vertical: random_grid(24),
        horizontal: random_grid(25),
    };
    let rho = 0.35;

    let a = dense_convolution(&plan);
    let d = dense_gradient();
    let m = a.transpose() * &a + d.transpose() * &d * rho;
    let nu_vec = DVector::from_iterator(
        2 * N,
        nu.vertical
            .as_slice()
            .iter()
            .cloned()
            .chain(nu.horizontal.as_slice().iter().cloned()),
    );
    let rhs = a.transpose() * DVector::from_column_slice(y.as_slice()) + d.transpose() * nu_vec * rho;
    let x_dense = m.lu().solve(&rhs).expect("normal matrix is nonsingular");

    let x = x_update(&y, &plan, &nu, rho).unwrap();
    let mut max_err = 0.0f64;
    for i in 0..N {
        max_err = max_err.max((x.as_slice()[i] - x_dense[i]).abs());
    }
    assert!(
        max_err / x_dense.norm().max(1.0) <= 1e-8,
        "spectral vs dense mismatch: {max_err}"
    );
}

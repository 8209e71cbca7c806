//! Image quality metrics: PSNR at unit peak and mean SSIM with the standard
//! 11x11 Gaussian window.

use crate::error::{CoreError, Result};
use crate::grid::ImageGrid;

/// PSNR in decibels at peak 1.0. An exact match (zero MSE) reports the
/// 99 dB sentinel instead of infinity.
pub fn psnr(x: &ImageGrid, reference: &ImageGrid) -> Result<f64> {
    reference.check_shape(x)?;
    let mse = x
        .as_slice()
        .iter()
        .zip(reference.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / x.len() as f64;
    if mse == 0.0 {
        Ok(99.0)
    } else {
        Ok(10.0 * (1.0 / mse).log10())
    }
}

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

fn ssim_window_weights() -> Vec<f64> {
    let r = (SSIM_WINDOW / 2) as isize;
    let mut w = Vec::with_capacity(SSIM_WINDOW * SSIM_WINDOW);
    for i in -r..=r {
        for j in -r..=r {
            w.push((-((i * i + j * j) as f64) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp());
        }
    }
    let s: f64 = w.iter().sum();
    for v in &mut w {
        *v /= s;
    }
    w
}

/// Mean structural similarity over all fully interior 11x11 windows, with
/// dynamic range 1.0 and the standard stabilizers K1 = 0.01, K2 = 0.03.
pub fn ssim(x: &ImageGrid, reference: &ImageGrid) -> Result<f64> {
    reference.check_shape(x)?;
    let (h, w) = (x.height(), x.width());
    if h < SSIM_WINDOW || w < SSIM_WINDOW {
        return Err(CoreError::InvalidParameter(format!(
            "ssim requires at least {SSIM_WINDOW}x{SSIM_WINDOW} images, got {h}x{w}"
        )));
    }
    let weights = ssim_window_weights();
    let c1 = (SSIM_K1 * 1.0f64).powi(2);
    let c2 = (SSIM_K2 * 1.0f64).powi(2);
    let r = SSIM_WINDOW / 2;
    let mut total = 0.0;
    let mut count = 0usize;
    for ci in r..h - r {
        for cj in r..w - r {
            let (mut mx, mut my) = (0.0, 0.0);
            let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
            let mut widx = 0;
            for di in 0..SSIM_WINDOW {
                let i = ci + di - r;
                for dj in 0..SSIM_WINDOW {
                    let j = cj + dj - r;
                    let wgt = weights[widx];
                    widx += 1;
                    let a = x.get(i, j);
                    let b = reference.get(i, j);
                    mx += wgt * a;
                    my += wgt * b;
                    sxx += wgt * a * a;
                    syy += wgt * b * b;
                    sxy += wgt * a * b;
                }
            }
            let vx = sxx - mx * mx;
            let vy = syy - my * my;
            let cov = sxy - mx * my;
            let score = ((2.0 * mx * my + c1) * (2.0 * cov + c2))
                / ((mx * mx + my * my + c1) * (vx + vy + c2));
            total += score;
            count += 1;
        }
    }
    Ok(total / count as f64)
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
    fn psnr_sentinel_and_hand_values() {
        let x = random_grid(8, 8, 1);
        assert_eq!(psnr(&x, &x).unwrap(), 99.0);

        // Uniform offset of 0.1 -> MSE = 0.01 -> 20 dB.
        let shifted = x.add(&ImageGrid::filled(8, 8, 0.1).unwrap()).unwrap();
        assert!((psnr(&shifted, &x).unwrap() - 20.0).abs() < 1e-12);

        // Offset 0.01 -> MSE = 1e-4 -> 40 dB.
        let shifted = x.add(&ImageGrid::filled(8, 8, 0.01).unwrap()).unwrap();
        assert!((psnr(&shifted, &x).unwrap() - 40.0).abs() < 1e-9);

        assert!(psnr(&x, &random_grid(4, 4, 2)).is_err());
    }

    #[test]
    fn psnr_decreases_with_noise_level() {
        let reference = random_grid(16, 16, 3);
        let noise = random_grid(16, 16, 4)
            .add(&ImageGrid::filled(16, 16, -0.5).unwrap())
            .unwrap();
        let mut last = f64::INFINITY;
        for scale in [0.01, 0.05, 0.1, 0.3] {
            let noisy = reference.add(&noise.scale(scale)).unwrap();
            let p = psnr(&noisy, &reference).unwrap();
            assert!(p < last, "psnr should fall as noise grows");
            last = p;
        }
    }

    #[test]
    fn ssim_identity_symmetry_and_disagreement() {
        let x = random_grid(16, 16, 5);
        assert!((ssim(&x, &x).unwrap() - 1.0).abs() < 1e-12);

        let y = random_grid(16, 16, 6);
        let ab = ssim(&x, &y).unwrap();
        let ba = ssim(&y, &x).unwrap();
        assert!((ab - ba).abs() < 1e-12);

        // Inverted non-constant image scores below 1.
        let inverted = ImageGrid::from_vec(
            16,
            16,
            x.as_slice().iter().map(|v| 1.0 - v).collect(),
        )
        .unwrap();
        assert!(ssim(&inverted, &x).unwrap() < 1.0);

        assert!(ssim(&random_grid(8, 8, 7), &random_grid(8, 8, 8)).is_err());
    }
}

//! Synthetic benchmark inputs: parametric blur kernels, piecewise-constant
//! phantoms (2-D and 1-D), seeded degradation, and the plain-text kernel
//! interchange format.

use std::path::PathBuf;

use rand::prelude::*;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{CoreError, Result};
use crate::fft::FrequencyPlan;
use crate::grid::{apply_gradient, group_magnitudes, BlurKernel, ImageGrid};

/// Parametric kernel families plus file-backed kernels.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    /// Sampled isotropic Gaussian, truncated to `size x size`.
    Gaussian { size: usize, sigma: f64 },
    /// Indicator of a disk with the given radius.
    Disk { radius: f64 },
    /// Linear motion: a line segment of the given length at the given angle
    /// (degrees, counterclockwise from the horizontal axis).
    Motion { length: f64, angle_degrees: f64 },
    /// Kernel loaded from a plain-text matrix file (see
    /// [`parse_kernel_text`]); image-backed kernel files are decoded by the
    /// CLI layer before reaching this enum.
    File { path: PathBuf },
}

/// How an observation is produced from a clean image.
#[derive(Debug, Clone, PartialEq)]
pub struct DegradationSpec {
    pub kernel: KernelSpec,
    /// Standard deviation of the additive Gaussian noise, in intensity
    /// units (images nominally span [0, 1]).
    pub noise_sigma: f64,
    pub seed: u64,
}

impl DegradationSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(CoreError::InvalidParameter(format!(
                "noise sigma must be nonnegative and finite, got {}",
                self.noise_sigma
            )));
        }
        Ok(())
    }
}

/// Builds a kernel from its spec; every branch returns a unit-sum kernel.
pub fn make_kernel(spec: &KernelSpec) -> Result<BlurKernel> {
    match spec {
        KernelSpec::Gaussian { size, sigma } => gaussian_kernel(*size, *sigma),
        KernelSpec::Disk { radius } => disk_kernel(*radius),
        KernelSpec::Motion {
            length,
            angle_degrees,
        } => motion_kernel(*length, *angle_degrees),
        KernelSpec::File { path } => {
            let text = std::fs::read_to_string(path)?;
            parse_kernel_text(&text)
        }
    }
}

/// Sampled isotropic Gaussian of odd `size`, normalized. `size = 1` yields
/// the delta kernel regardless of sigma.
pub fn gaussian_kernel(size: usize, sigma: f64) -> Result<BlurKernel> {
    if size == 0 || size % 2 == 0 {
        return Err(CoreError::InvalidKernel(format!(
            "gaussian kernel size must be odd and positive, got {size}"
        )));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(CoreError::InvalidKernel(format!(
            "gaussian sigma must be positive and finite, got {sigma}"
        )));
    }
    if size == 1 {
        return Ok(BlurKernel::delta());
    }
    let c = (size / 2) as isize;
    let mut taps = Vec::with_capacity(size * size);
    for i in 0..size as isize {
        for j in 0..size as isize {
            let (di, dj) = ((i - c) as f64, (j - c) as f64);
            taps.push((-(di * di + dj * dj) / (2.0 * sigma * sigma)).exp());
        }
    }
    BlurKernel::from_vec(size, size, taps)?.normalized()
}

/// Disk (defocus) kernel: uniform over the lattice points within `radius`,
/// on a `(2*floor(radius)+1)`-sized grid.
pub fn disk_kernel(radius: f64) -> Result<BlurKernel> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(CoreError::InvalidKernel(format!(
            "disk radius must be positive and finite, got {radius}"
        )));
    }
    let half = radius.floor() as isize;
    let size = (2 * half + 1) as usize;
    let r2 = radius * radius;
    let mut taps = Vec::with_capacity(size * size);
    for i in -half..=half {
        for j in -half..=half {
            let d2 = (i * i + j * j) as f64;
            taps.push(if d2 <= r2 { 1.0 } else { 0.0 });
        }
    }
    BlurKernel::from_vec(size, size, taps)?.normalized()
}

/// Linear motion kernel: a unit-mass segment of the given length centered on
/// the kernel, rasterized by bilinear splatting of finely spaced samples.
/// Angle is measured counterclockwise from the horizontal axis (rows grow
/// downward, so positive angles tilt the streak upward).
pub fn motion_kernel(length: f64, angle_degrees: f64) -> Result<BlurKernel> {
    if !(length >= 1.0) || !length.is_finite() {
        return Err(CoreError::InvalidKernel(format!(
            "motion length must be at least 1, got {length}"
        )));
    }
    if !angle_degrees.is_finite() {
        return Err(CoreError::InvalidKernel(
            "motion angle must be finite".to_string(),
        ));
    }
    let half_span = (length - 1.0) / 2.0;
    if half_span == 0.0 {
        return Ok(BlurKernel::delta());
    }
    let theta = angle_degrees.to_radians();
    let (dir_col, dir_row) = (theta.cos(), -theta.sin());
    let half_cols = (half_span * dir_col.abs()).ceil() as usize;
    let half_rows = (half_span * dir_row.abs()).ceil() as usize;
    let (kh, kw) = (2 * half_rows + 1, 2 * half_cols + 1);
    let mut taps = vec![0.0; kh * kw];
    // Dense sampling along the segment; each sample deposits its mass onto
    // the four surrounding taps with bilinear weights.
    let n_samples = ((length - 1.0) * 64.0).ceil() as usize + 1;
    let mass = 1.0 / n_samples as f64;
    for s in 0..n_samples {
        let t = if n_samples == 1 {
            0.0
        } else {
            -half_span + (2.0 * half_span) * s as f64 / (n_samples - 1) as f64
        };
        let col = half_cols as f64 + t * dir_col;
        let row = half_rows as f64 + t * dir_row;
        let (c0, r0) = (col.floor(), row.floor());
        let (fc, fr) = (col - c0, row - r0);
        for (dr, dc, wgt) in [
            (0isize, 0isize, (1.0 - fr) * (1.0 - fc)),
            (0, 1, (1.0 - fr) * fc),
            (1, 0, fr * (1.0 - fc)),
            (1, 1, fr * fc),
        ] {
            let (ri, ci) = (r0 as isize + dr, c0 as isize + dc);
            if ri >= 0 && (ri as usize) < kh && ci >= 0 && (ci as usize) < kw && wgt > 0.0 {
                taps[(ri as usize) * kw + ci as usize] += mass * wgt;
            }
        }
    }
    BlurKernel::from_vec(kh, kw, taps)?.normalized()
}

/// Applies the degradation model `y = k * x + n` with periodic convolution
/// and seeded iid Gaussian noise. The result is intentionally not clipped,
/// so the generative model stays exactly linear.
pub fn degrade(x_star: &ImageGrid, kernel: &BlurKernel, noise_sigma: f64, seed: u64) -> Result<ImageGrid> {
    if !(noise_sigma >= 0.0) || !noise_sigma.is_finite() {
        return Err(CoreError::InvalidParameter(format!(
            "noise sigma must be nonnegative and finite, got {noise_sigma}"
        )));
    }
    let plan = FrequencyPlan::new(x_star.height(), x_star.width(), kernel)?;
    let mut y = plan.convolve(x_star)?;
    if noise_sigma > 0.0 {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, noise_sigma)
            .map_err(|e| CoreError::InvalidParameter(format!("noise distribution: {e}")))?;
        for v in y.as_mut_slice() {
            *v += normal.sample(&mut rng);
        }
    }
    Ok(y)
}

/// Softens the border of `x` toward its blurred version so periodic solvers
/// see weaker wrap-around seams: a linear ramp of the kernel's half extent
/// blends the original interior into blurred borders.
pub fn edge_taper(x: &ImageGrid, kernel: &BlurKernel) -> Result<ImageGrid> {
    let plan = FrequencyPlan::new(x.height(), x.width(), kernel)?;
    let blurred = plan.convolve(x)?;
    let (h, w) = (x.height(), x.width());
    let ramp_r = (kernel.height() / 2).max(1);
    let ramp_c = (kernel.width() / 2).max(1);
    let mut out = ImageGrid::zeros(h, w)?;
    for i in 0..h {
        let di = i.min(h - 1 - i);
        let wi = ((di + 1) as f64 / (ramp_r + 1) as f64).min(1.0);
        for j in 0..w {
            let dj = j.min(w - 1 - j);
            let wj = ((dj + 1) as f64 / (ramp_c + 1) as f64).min(1.0);
            let alpha = wi * wj;
            out.set(i, j, alpha * x.get(i, j) + (1.0 - alpha) * blurred.get(i, j));
        }
    }
    Ok(out)
}

/// A generated ground-truth image together with its exact gradient support.
#[derive(Debug, Clone)]
pub struct Phantom {
    pub image: ImageGrid,
    /// Indices whose gradient group is nonzero in the clean image.
    pub gradient_support: Vec<usize>,
}

fn support_of(image: &ImageGrid) -> Vec<usize> {
    group_magnitudes(&apply_gradient(image))
        .as_slice()
        .iter()
        .enumerate()
        .filter_map(|(i, &g)| if g > 0.0 { Some(i) } else { None })
        .collect()
}

/// Piecewise-constant 2-D phantom: `n_shapes` axis-aligned rectangles with
/// well-separated intensity levels on a dark background. `n_shapes = 0`
/// yields a constant image.
///
/// Shapes cycle through three size classes — a large block, a thin bar, and
/// a small square — so the gradient set mixes long straight edges with fine
/// structure. Rectangles are kept disjoint with a clearance margin between
/// them, so every edge of the clean image is an isolated, high-contrast
/// jump — the ideally-sparse-gradient regime the solvers target. Placement
/// is rejection sampled; when the grid is too crowded to fit another
/// separated rectangle the last candidate is placed anyway, which keeps the
/// generator total for tiny grids and large shape counts.
pub fn make_sparse_image(dims: (usize, usize), n_shapes: usize, seed: u64) -> Result<Phantom> {
    let (h, w) = dims;
    if h < 4 || w < 4 {
        return Err(CoreError::InvalidParameter(format!(
            "phantom dimensions must be at least 4x4, got {h}x{w}"
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let base = rng.random_range(0.05..0.25);
    let mut image = ImageGrid::filled(h, w, base)?;
    let margin = (h.min(w) / 16).max(2);
    let mut placed: Vec<(usize, usize, usize, usize)> = Vec::new();
    for shape in 0..n_shapes {
        let mut candidate = None;
        for _ in 0..200 {
            let (rh, rw) = match shape % 3 {
                // Large block.
                0 => {
                    let (min_h, min_w) = ((h / 8).max(2), (w / 8).max(2));
                    (
                        rng.random_range(min_h..=(h / 3).max(min_h)),
                        rng.random_range(min_w..=(w / 3).max(min_w)),
                    )
                }
                // Thin bar, horizontal or vertical.
                1 => {
                    let thin = rng.random_range(2..=(h / 32).max(2));
                    let long = rng.random_range((h / 6).max(3)..=(h / 3).max(4));
                    if rng.random_range(0..2) == 0 {
                        (thin.min(h - 2), long.min(w - 2))
                    } else {
                        (long.min(h - 2), thin.min(w - 2))
                    }
                }
                // Small square.
                _ => {
                    let side = rng.random_range((h / 24).max(2)..=(h / 12).max(2));
                    (side.min(h - 2), side.min(w - 2))
                }
            };
            let r0 = rng.random_range(1..h.saturating_sub(rh + 1).max(2));
            let c0 = rng.random_range(1..w.saturating_sub(rw + 1).max(2));
            let clear = placed.iter().all(|&(pr, pc, ph, pw)| {
                r0 + rh + margin <= pr
                    || pr + ph + margin <= r0
                    || c0 + rw + margin <= pc
                    || pc + pw + margin <= c0
            });
            candidate = Some((r0, c0, rh, rw));
            if clear {
                break;
            }
        }
        let (r0, c0, rh, rw) = candidate.expect("at least one candidate sampled");
        placed.push((r0, c0, rh, rw));
        let level = rng.random_range(0.55..0.95);
        for i in r0..(r0 + rh).min(h) {
            for j in c0..(c0 + rw).min(w) {
                image.set(i, j, level);
            }
        }
    }
    let gradient_support = support_of(&image);
    Ok(Phantom {
        image,
        gradient_support,
    })
}

/// Piecewise-constant 1-D signal stored as a `length x 1` grid, with
/// `n_jumps` interior jumps at distinct positions and adjacent levels
/// separated by at least 0.25. The periodic wrap adds one more jump at the
/// end whenever the first and last segments differ, and the returned support
/// reflects the actual gradient.
pub fn make_1d_signal(length: usize, n_jumps: usize, seed: u64) -> Result<Phantom> {
    if length < 2 {
        return Err(CoreError::InvalidParameter(format!(
            "signal length must be at least 2, got {length}"
        )));
    }
    if n_jumps >= length {
        return Err(CoreError::InvalidParameter(format!(
            "cannot place {n_jumps} jumps in a signal of length {length}"
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut positions: Vec<usize> = Vec::new();
    while positions.len() < n_jumps {
        let p = rng.random_range(1..length);
        if !positions.contains(&p) {
            positions.push(p);
        }
    }
    positions.sort_unstable();

    let mut level: f64 = rng.random_range(0.0..1.0);
    let mut levels = vec![level];
    for _ in 0..n_jumps {
        let mut next: f64 = rng.random_range(0.0..1.0);
        let mut guard = 0;
        while (next - level).abs() < 0.25 && guard < 64 {
            next = rng.random_range(0.0..1.0);
            guard += 1;
        }
        if (next - level).abs() < 0.25 {
            // Deterministic fallback: mirror across the midpoint.
            next = if level < 0.5 { level + 0.4 } else { level - 0.4 };
        }
        levels.push(next);
        level = next;
    }

    let mut data = vec![0.0; length];
    let mut seg = 0usize;
    for (i, slot) in data.iter_mut().enumerate() {
        while seg < positions.len() && i >= positions[seg] {
            seg += 1;
        }
        *slot = levels[seg];
    }
    let image = ImageGrid::from_vec(length, 1, data)?;
    let gradient_support = support_of(&image);
    Ok(Phantom {
        image,
        gradient_support,
    })
}

/// Parses the plain-text kernel format: one row of whitespace-separated
/// reals per line; blank lines and `#` comment lines are ignored. The result
/// is normalized to unit sum.
pub fn parse_kernel_text(text: &str) -> Result<BlurKernel> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>().map_err(|_| {
                    CoreError::Parse(format!(
                        "kernel line {}: '{tok}' is not a number",
                        lineno + 1
                    ))
                })
            })
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CoreError::Parse("kernel file has no data rows".to_string()));
    }
    let width = rows[0].len();
    if rows.iter().any(|r| r.len() != width) {
        return Err(CoreError::Parse(
            "kernel rows have inconsistent lengths".to_string(),
        ));
    }
    let height = rows.len();
    let taps: Vec<f64> = rows.into_iter().flatten().collect();
    BlurKernel::from_vec(height, width, taps)?.normalized()
}

/// Renders a kernel in the plain-text format accepted by
/// [`parse_kernel_text`].
pub fn kernel_to_text(kernel: &BlurKernel) -> String {
    let mut out = String::new();
    for i in 0..kernel.height() {
        for j in 0..kernel.width() {
            if j > 0 {
                out.push(' ');
            }
            out.push_str(&format!("{:.17e}", kernel.get(i, j)));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_kernel_basics() {
        assert_eq!(gaussian_kernel(1, 2.0).unwrap(), BlurKernel::delta());
        let k = gaussian_kernel(25, 1.6).unwrap();
        assert_eq!((k.height(), k.width()), (25, 25));
        assert!((k.tap_sum() - 1.0).abs() < 1e-12);
        // Center tap dominates and symmetry holds.
        let center = k.get(12, 12);
        assert!(center > k.get(12, 13));
        assert!((k.get(10, 12) - k.get(14, 12)).abs() < 1e-15);
        assert!(gaussian_kernel(4, 1.0).is_err());
        assert!(gaussian_kernel(5, 0.0).is_err());
    }

    #[test]
    fn disk_kernel_lattice_count() {
        let k = disk_kernel(1.0).unwrap();
        assert_eq!((k.height(), k.width()), (3, 3));
        let nonzero: Vec<f64> = k.taps().iter().cloned().filter(|t| *t > 0.0).collect();
        assert_eq!(nonzero.len(), 5);
        for t in nonzero {
            assert!((t - 0.2).abs() < 1e-15);
        }
        let k15 = disk_kernel(15.0).unwrap();
        assert_eq!((k15.height(), k15.width()), (31, 31));
        assert!((k15.tap_sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn motion_kernel_geometry() {
        // Length 15 at 45 degrees spans ceil(7*cos45) = 5 cells each way.
        let k = motion_kernel(15.0, 45.0).unwrap();
        assert_eq!((k.height(), k.width()), (11, 11));
        assert!((k.tap_sum() - 1.0).abs() < 1e-12);

        // Horizontal motion stays in a single row.
        let kh = motion_kernel(9.0, 0.0).unwrap();
        assert_eq!(kh.height(), 1);
        assert_eq!(kh.width(), 9);

        // Length 1 is the identity.
        assert_eq!(motion_kernel(1.0, 30.0).unwrap(), BlurKernel::delta());
        assert!(motion_kernel(0.5, 0.0).is_err());
    }

    #[test]
    fn degrade_is_deterministic_and_noise_free_case_is_exact() {
        let phantom = make_sparse_image((16, 16), 2, 7).unwrap();
        let x = phantom.image;
        let clean = degrade(&x, &BlurKernel::delta(), 0.0, 5).unwrap();
        for (a, b) in clean.as_slice().iter().zip(x.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
        let k = gaussian_kernel(5, 1.0).unwrap();
        let y1 = degrade(&x, &k, 0.003, 42).unwrap();
        let y2 = degrade(&x, &k, 0.003, 42).unwrap();
        assert_eq!(y1.as_slice(), y2.as_slice());
        let y3 = degrade(&x, &k, 0.003, 43).unwrap();
        assert_ne!(y1.as_slice(), y3.as_slice());
    }

    #[test]
    fn sparse_phantom_support_matches_gradient() {
        let p = make_sparse_image((32, 32), 1, 11).unwrap();
        let g = group_magnitudes(&apply_gradient(&p.image));
        let expected: Vec<usize> = g
            .as_slice()
            .iter()
            .enumerate()
            .filter_map(|(i, &v)| if v > 0.0 { Some(i) } else { None })
            .collect();
        assert_eq!(p.gradient_support, expected);
        assert!(!p.gradient_support.is_empty());
        assert!(p.gradient_support.len() < 32 * 32 / 2);

        // Determinism.
        let q = make_sparse_image((32, 32), 1, 11).unwrap();
        assert_eq!(p.image.as_slice(), q.image.as_slice());

        // Zero shapes: constant image, empty support.
        let c = make_sparse_image((16, 16), 0, 3).unwrap();
        assert!(c.gradient_support.is_empty());
    }

    #[test]
    fn one_d_signal_structure() {
        let p = make_1d_signal(64, 3, 9).unwrap();
        assert_eq!(p.image.height(), 64);
        assert_eq!(p.image.width(), 1);
        // 3 interior jumps, possibly one more from the periodic wrap.
        assert!(p.gradient_support.len() == 3 || p.gradient_support.len() == 4);
        // Adjacent levels differ by at least 0.25 at each interior jump.
        let g = apply_gradient(&p.image);
        for &i in &p.gradient_support {
            if i != 63 {
                assert!(g.vertical.as_slice()[i].abs() >= 0.25);
            }
        }
        let flat = make_1d_signal(32, 0, 1).unwrap();
        assert!(flat.gradient_support.is_empty());
    }

    #[test]
    fn kernel_text_round_trip() {
        let k = gaussian_kernel(5, 1.2).unwrap();
        let text = kernel_to_text(&k);
        let back = parse_kernel_text(&text).unwrap();
        assert_eq!((back.height(), back.width()), (5, 5));
        for (a, b) in back.taps().iter().zip(k.taps()) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(parse_kernel_text("").is_err());
        assert!(parse_kernel_text("1 2\n3").is_err());
        assert!(parse_kernel_text("1 x\n").is_err());
        // Comment lines and normalization.
        let k2 = parse_kernel_text("# test kernel\n1 1\n1 1\n# wait, even dims\n");
        assert!(k2.is_err(), "even dimensions must be rejected");
        let k3 = parse_kernel_text("0 1 0\n1 4 1\n0 1 0\n").unwrap();
        assert!((k3.tap_sum() - 1.0).abs() < 1e-15);
        assert!((k3.get(1, 1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn edge_taper_leaves_interior_mostly_alone() {
        let p = make_sparse_image((32, 32), 2, 21).unwrap();
        let k = gaussian_kernel(5, 1.0).unwrap();
        let t = edge_taper(&p.image, &k).unwrap();
        // Interior pixels (beyond the ramp) are untouched.
        assert!((t.get(16, 16) - p.image.get(16, 16)).abs() < 1e-12);
        // Shape and finiteness.
        assert!(t.is_finite());
        assert!(t.same_shape(&p.image));
    }
}

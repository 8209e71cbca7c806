//! Dense image grids, convolution kernels, and the discrete gradient algebra.
//!
//! Images are row-major `f64` buffers. The gradient operator `D` stacks
//! forward differences in the vertical and horizontal directions with
//! periodic wrap-around, so every pixel owns exactly one two-vector
//! `(Dx)_i = (v_i, h_i)`. The divergence implemented here is the exact
//! negative adjoint of that gradient, which the solvers rely on.

use crate::error::{CoreError, Result};

/// A dense grayscale image (or any scalar field) on an `height x width` grid,
/// stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl ImageGrid {
    /// Creates a grid filled with `value`.
    pub fn filled(height: usize, width: usize, value: f64) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(CoreError::InvalidParameter(format!(
                "image dimensions must be positive, got {height}x{width}"
            )));
        }
        Ok(Self {
            height,
            width,
            data: vec![value; height * width],
        })
    }

    /// Creates an all-zero grid.
    pub fn zeros(height: usize, width: usize) -> Result<Self> {
        Self::filled(height, width, 0.0)
    }

    /// Wraps an existing row-major buffer. Rejects non-finite entries; the
    /// crate-internal unchecked variant skips that scan for values produced
    /// by the operators themselves (solvers watch for divergence explicitly).
    pub fn from_vec(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(CoreError::InvalidParameter(format!(
                "image dimensions must be positive, got {height}x{width}"
            )));
        }
        if data.len() != height * width {
            return Err(CoreError::InvalidParameter(format!(
                "buffer length {} does not match {height}x{width}",
                data.len()
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(CoreError::NonFinite(
                "image buffer contains NaN or infinity".to_string(),
            ));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub(crate) fn from_vec_unchecked(height: usize, width: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), height * width);
        Self {
            height,
            width,
            data,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Number of pixels.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn same_shape(&self, other: &ImageGrid) -> bool {
        self.height == other.height && self.width == other.width
    }

    /// Returns an error unless `other` has this grid's shape.
    pub fn check_shape(&self, other: &ImageGrid) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(CoreError::DimensionMismatch {
                expected_h: self.height,
                expected_w: self.width,
                got_h: other.height,
                got_w: other.width,
            })
        }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.width + col] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Mean pixel value.
    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Euclidean norm of the pixel buffer.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Inner product with another grid of the same shape.
    pub fn dot(&self, other: &ImageGrid) -> Result<f64> {
        self.check_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .sum())
    }

    /// Pointwise `self - other`.
    pub fn sub(&self, other: &ImageGrid) -> Result<ImageGrid> {
        self.check_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        ImageGrid::from_vec(self.height, self.width, data)
    }

    /// Pointwise `self + other`.
    pub fn add(&self, other: &ImageGrid) -> Result<ImageGrid> {
        self.check_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        ImageGrid::from_vec(self.height, self.width, data)
    }

    /// In-place `self += scale * other`.
    pub fn axpy(&mut self, scale: f64, other: &ImageGrid) -> Result<()> {
        self.check_shape(other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += scale * b;
        }
        Ok(())
    }

    /// Pointwise scaling.
    pub fn scale(&self, factor: f64) -> ImageGrid {
        let data = self.data.iter().map(|v| v * factor).collect();
        ImageGrid {
            height: self.height,
            width: self.width,
            data,
        }
    }

    /// True if every entry is finite.
    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// A 2-D convolution kernel with odd dimensions and an explicit center tap.
///
/// Kernels are stored row-major like images. Construction does not
/// normalize; the named factory functions in `synth` produce unit-sum
/// kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct BlurKernel {
    height: usize,
    width: usize,
    taps: Vec<f64>,
}

impl BlurKernel {
    pub fn from_vec(height: usize, width: usize, taps: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(CoreError::InvalidKernel(format!(
                "kernel dimensions must be positive, got {height}x{width}"
            )));
        }
        if height % 2 == 0 || width % 2 == 0 {
            return Err(CoreError::InvalidKernel(format!(
                "kernel dimensions must be odd so the center tap is unambiguous, got {height}x{width}"
            )));
        }
        if taps.len() != height * width {
            return Err(CoreError::InvalidKernel(format!(
                "tap buffer length {} does not match {height}x{width}",
                taps.len()
            )));
        }
        if !taps.iter().all(|t| t.is_finite()) {
            return Err(CoreError::InvalidKernel(
                "kernel taps must be finite".to_string(),
            ));
        }
        if taps.iter().any(|t| *t < 0.0) {
            return Err(CoreError::InvalidKernel(
                "kernel taps must be nonnegative".to_string(),
            ));
        }
        Ok(Self {
            height,
            width,
            taps,
        })
    }

    /// The identity kernel: a single unit tap.
    pub fn delta() -> Self {
        Self {
            height: 1,
            width: 1,
            taps: vec![1.0],
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.taps[row * self.width + col]
    }

    /// Sum of all taps.
    pub fn tap_sum(&self) -> f64 {
        self.taps.iter().sum()
    }

    /// Returns a copy rescaled to unit tap sum.
    pub fn normalized(&self) -> Result<Self> {
        let s = self.tap_sum();
        if s.abs() < 1e-300 {
            return Err(CoreError::InvalidKernel(
                "kernel tap sum is zero; cannot normalize".to_string(),
            ));
        }
        let taps = self.taps.iter().map(|t| t / s).collect();
        Ok(Self {
            height: self.height,
            width: self.width,
            taps,
        })
    }

    /// The kernel flipped in both axes (the correlation counterpart).
    pub fn flipped(&self) -> Self {
        let mut taps = self.taps.clone();
        taps.reverse();
        Self {
            height: self.height,
            width: self.width,
            taps,
        }
    }
}

/// The per-pixel gradient pair field `z = (z_v, z_h)`: the codomain of the
/// gradient operator and the splitting variable of the solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub vertical: ImageGrid,
    pub horizontal: ImageGrid,
}

impl GradientField {
    pub fn zeros(height: usize, width: usize) -> Result<Self> {
        Ok(Self {
            vertical: ImageGrid::zeros(height, width)?,
            horizontal: ImageGrid::zeros(height, width)?,
        })
    }

    pub fn new(vertical: ImageGrid, horizontal: ImageGrid) -> Result<Self> {
        vertical.check_shape(&horizontal)?;
        Ok(Self {
            vertical,
            horizontal,
        })
    }

    pub fn height(&self) -> usize {
        self.vertical.height()
    }

    pub fn width(&self) -> usize {
        self.vertical.width()
    }

    pub fn len(&self) -> usize {
        self.vertical.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertical.is_empty()
    }

    /// Euclidean norm over both components jointly.
    pub fn norm(&self) -> f64 {
        (self.vertical.norm().powi(2) + self.horizontal.norm().powi(2)).sqrt()
    }

    /// Inner product over both components jointly.
    pub fn dot(&self, other: &GradientField) -> Result<f64> {
        Ok(self.vertical.dot(&other.vertical)? + self.horizontal.dot(&other.horizontal)?)
    }

    /// Pointwise difference on both components.
    pub fn sub(&self, other: &GradientField) -> Result<GradientField> {
        Ok(GradientField {
            vertical: self.vertical.sub(&other.vertical)?,
            horizontal: self.horizontal.sub(&other.horizontal)?,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.vertical.is_finite() && self.horizontal.is_finite()
    }
}

/// Applies the forward-difference gradient with periodic wrap:
/// `v(i,j) = x(i+1,j) - x(i,j)` and `h(i,j) = x(i,j+1) - x(i,j)`,
/// indices taken modulo the grid size.
pub fn apply_gradient(x: &ImageGrid) -> GradientField {
    let (h, w) = (x.height(), x.width());
    let mut vert = vec![0.0; h * w];
    let mut horiz = vec![0.0; h * w];
    for i in 0..h {
        let inext = if i + 1 == h { 0 } else { i + 1 };
        for j in 0..w {
            let jnext = if j + 1 == w { 0 } else { j + 1 };
            let here = x.get(i, j);
            vert[i * w + j] = x.get(inext, j) - here;
            horiz[i * w + j] = x.get(i, jnext) - here;
        }
    }
    GradientField {
        vertical: ImageGrid::from_vec_unchecked(h, w, vert),
        horizontal: ImageGrid::from_vec_unchecked(h, w, horiz),
    }
}

/// Applies `D^T`, the adjoint of [`apply_gradient`]: negative divergence
/// with the matching periodic wrap, so `<Dx, z> = <x, apply_divergence(z)>`
/// holds exactly up to floating-point rounding.
pub fn apply_divergence(z: &GradientField) -> ImageGrid {
    let (h, w) = (z.height(), z.width());
    let mut out = vec![0.0; h * w];
    for i in 0..h {
        let iprev = if i == 0 { h - 1 } else { i - 1 };
        for j in 0..w {
            let jprev = if j == 0 { w - 1 } else { j - 1 };
            // D_v^T: backward difference of the vertical component.
            let dv = z.vertical.get(iprev, j) - z.vertical.get(i, j);
            // D_h^T: backward difference of the horizontal component.
            let dh = z.horizontal.get(i, jprev) - z.horizontal.get(i, j);
            out[i * w + j] = dv + dh;
        }
    }
    ImageGrid::from_vec_unchecked(h, w, out)
}

/// Per-pixel Euclidean magnitude of the gradient pair:
/// `g_i = sqrt(v_i^2 + h_i^2)`.
pub fn group_magnitudes(z: &GradientField) -> ImageGrid {
    let (h, w) = (z.height(), z.width());
    let data = z
        .vertical
        .as_slice()
        .iter()
        .zip(z.horizontal.as_slice())
        .map(|(v, g)| v.hypot(*g))
        .collect();
    ImageGrid::from_vec_unchecked(h, w, data)
}

/// Isotropic total variation: the sum of per-pixel gradient magnitudes.
pub fn tv_value(x: &ImageGrid) -> f64 {
    group_magnitudes(&apply_gradient(x)).as_slice().iter().sum()
}

/// Direct spatial-domain circular convolution of `x` with `k`, anchored at
/// the kernel's center tap. Quadratic cost; the frequency-domain plan is the
/// fast path, and this serves as its independent reference.
pub fn convolve_periodic_direct(x: &ImageGrid, k: &BlurKernel) -> ImageGrid {
    let (h, w) = (x.height(), x.width());
    let (kh, kw) = (k.height(), k.width());
    let (ch, cw) = (kh / 2, kw / 2);
    let mut out = vec![0.0; h * w];
    for i in 0..h {
        for j in 0..w {
            let mut acc = 0.0;
            for a in 0..kh {
                // Convolution flips the kernel: out(i,j) = sum k(a,b) x(i-a+ch, j-b+cw).
                let src_i = (i + h + ch - a) % h;
                for b in 0..kw {
                    let src_j = (j + w + cw - b) % w;
                    acc += k.get(a, b) * x.get(src_i, src_j);
                }
            }
            out[i * w + j] = acc;
        }
    }
    ImageGrid::from_vec_unchecked(h, w, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_3x3() -> ImageGrid {
        ImageGrid::from_vec(
            3,
            3,
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0],
        )
        .unwrap()
    }

    #[test]
    fn constructors_reject_bad_shapes() {
        assert!(ImageGrid::zeros(0, 4).is_err());
        assert!(ImageGrid::from_vec(2, 2, vec![0.0; 3]).is_err());
        assert!(BlurKernel::from_vec(2, 3, vec![0.0; 6]).is_err());
        assert!(BlurKernel::from_vec(3, 3, vec![0.0; 8]).is_err());
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let x = ImageGrid::filled(5, 7, 3.25).unwrap();
        let g = apply_gradient(&x);
        assert_eq!(g.norm(), 0.0);
        assert_eq!(tv_value(&x), 0.0);
    }

    #[test]
    fn gradient_values_match_hand_computation() {
        let x = grid_3x3();
        let g = apply_gradient(&x);
        // v(0,0) = x(1,0) - x(0,0) = 4 - 1 = 3; wrap row: v(2,0) = x(0,0) - x(2,0) = 1 - 7 = -6.
        assert_eq!(g.vertical.get(0, 0), 3.0);
        assert_eq!(g.vertical.get(2, 0), -6.0);
        // h(0,0) = x(0,1) - x(0,0) = 1; wrap col: h(0,2) = x(0,0) - x(0,2) = 1 - 3 = -2.
        assert_eq!(g.horizontal.get(0, 0), 1.0);
        assert_eq!(g.horizontal.get(0, 2), -2.0);
    }

    #[test]
    fn divergence_is_negative_adjoint_of_gradient() {
        // <Dx, z> == <x, D^T z> for arbitrary fixed vectors.
        let x = grid_3x3();
        let zv = ImageGrid::from_vec(
            3,
            3,
            vec![0.5, -1.0, 2.0, 0.0, 1.5, -0.5, 3.0, -2.0, 1.0],
        )
        .unwrap();
        let zh = ImageGrid::from_vec(
            3,
            3,
            vec![-1.0, 0.25, 0.75, 2.0, -0.5, 1.0, 0.0, 1.25, -0.3],
        )
        .unwrap();
        let z = GradientField::new(zv, zh).unwrap();
        let lhs = apply_gradient(&x).dot(&z).unwrap();
        let rhs = x.dot(&apply_divergence(&z)).unwrap();
        assert!((lhs - rhs).abs() < 1e-12, "lhs={lhs} rhs={rhs}");
    }

    #[test]
    fn group_magnitudes_are_hypotenuses() {
        let zv = ImageGrid::from_vec(1, 2, vec![3.0, 0.0]).unwrap();
        let zh = ImageGrid::from_vec(1, 2, vec![4.0, 0.0]).unwrap();
        let g = group_magnitudes(&GradientField::new(zv, zh).unwrap());
        assert_eq!(g.get(0, 0), 5.0);
        assert_eq!(g.get(0, 1), 0.0);
    }

    #[test]
    fn tv_of_single_step_column_image() {
        // Two-column image: left column 0, right column 1, height 4.
        // Periodic wrap makes each row cross the step twice: |1-0| + |0-1| = 2 per row.
        // Vertical differences vanish. TV = 4 * 2 = 8.
        let mut x = ImageGrid::zeros(4, 2).unwrap();
        for i in 0..4 {
            x.set(i, 1, 1.0);
        }
        assert!((tv_value(&x) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn delta_kernel_convolution_is_identity() {
        let x = grid_3x3();
        let y = convolve_periodic_direct(&x, &BlurKernel::delta());
        assert_eq!(x, y);
    }

    #[test]
    fn convolution_against_hand_computed_shift() {
        // Kernel with a single off-center tap acts as a circular shift.
        // 3x3 kernel with tap at (0,1), i.e. one above-center... careful:
        // center is (1,1); tap at (2,1) means a = 2, offset a-ch = +1, so
        // out(i,j) = x(i-1, j): shifts content downward.
        let mut taps = vec![0.0; 9];
        taps[2 * 3 + 1] = 1.0;
        let k = BlurKernel::from_vec(3, 3, taps).unwrap();
        let x = grid_3x3();
        let y = convolve_periodic_direct(&x, &k);
        for j in 0..3 {
            assert_eq!(y.get(1, j), x.get(0, j));
            assert_eq!(y.get(0, j), x.get(2, j));
        }
    }

    #[test]
    fn kernel_normalization() {
        let k = BlurKernel::from_vec(1, 3, vec![1.0, 2.0, 1.0]).unwrap();
        let n = k.normalized().unwrap();
        assert!((n.tap_sum() - 1.0).abs() < 1e-15);
        assert_eq!(n.get(0, 1), 0.5);
    }
}

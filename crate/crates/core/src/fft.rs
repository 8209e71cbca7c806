//! Frequency-domain machinery: 2-D FFTs, kernel spectra, and the analytic
//! spectra of the periodic forward-difference operators.
//!
//! Everything downstream (the image update, the dual recovery ridge solve,
//! fast convolution) reduces to pointwise algebra on these spectra. The
//! forward transform is unnormalized; the inverse divides by `H*W`, so
//! `inverse(forward(x)) == x` and Parseval reads `||x|| = ||forward(x)|| / sqrt(H*W)`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{CoreError, Result};
use crate::grid::{BlurKernel, GradientField, ImageGrid};

/// Row-major complex spectrum with the shape of its originating grid.
pub type Spectrum = Vec<Complex<f64>>;

/// Reusable 2-D FFT plan for one grid shape.
#[derive(Clone)]
pub struct Fft2 {
    height: usize,
    width: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
    scratch_len: usize,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2")
            .field("height", &self.height)
            .field("width", &self.width)
            .finish()
    }
}

impl Fft2 {
    pub fn new(height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(CoreError::InvalidParameter(format!(
                "FFT plan requires positive dimensions, got {height}x{width}"
            )));
        }
        let mut planner = FftPlanner::new();
        let row_fwd = planner.plan_fft_forward(width);
        let row_inv = planner.plan_fft_inverse(width);
        let col_fwd = planner.plan_fft_forward(height);
        let col_inv = planner.plan_fft_inverse(height);
        let scratch_len = row_fwd
            .get_inplace_scratch_len()
            .max(row_inv.get_inplace_scratch_len())
            .max(col_fwd.get_inplace_scratch_len())
            .max(col_inv.get_inplace_scratch_len());
        Ok(Self {
            height,
            width,
            row_fwd,
            row_inv,
            col_fwd,
            col_inv,
            scratch_len,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    fn transform(&self, data: &mut [Complex<f64>], inverse: bool) {
        let (h, w) = (self.height, self.width);
        debug_assert_eq!(data.len(), h * w);
        let row_fft = if inverse { &self.row_inv } else { &self.row_fwd };
        let col_fft = if inverse { &self.col_inv } else { &self.col_fwd };
        let mut scratch = vec![Complex::default(); self.scratch_len];
        for row in data.chunks_exact_mut(w) {
            row_fft.process_with_scratch(row, &mut scratch);
        }
        // Transform columns by transposing, running rows, and transposing back.
        let mut t = vec![Complex::default(); h * w];
        for i in 0..h {
            for j in 0..w {
                t[j * h + i] = data[i * w + j];
            }
        }
        for col in t.chunks_exact_mut(h) {
            col_fft.process_with_scratch(col, &mut scratch);
        }
        for i in 0..h {
            for j in 0..w {
                data[i * w + j] = t[j * h + i];
            }
        }
    }

    /// Forward 2-D transform of a real grid.
    pub fn forward(&self, x: &ImageGrid) -> Spectrum {
        debug_assert_eq!((x.height(), x.width()), (self.height, self.width));
        let mut buf: Vec<Complex<f64>> = x
            .as_slice()
            .iter()
            .map(|&v| Complex::new(v, 0.0))
            .collect();
        self.transform(&mut buf, false);
        buf
    }

    /// Inverse transform, returning the real part (imaginary residue from a
    /// conjugate-symmetric spectrum is rounding noise).
    pub fn inverse_real(&self, mut spec: Spectrum) -> ImageGrid {
        self.transform(&mut spec, true);
        let scale = 1.0 / (self.height * self.width) as f64;
        let data = spec.iter().map(|c| c.re * scale).collect();
        ImageGrid::from_vec_unchecked(self.height, self.width, data)
    }
}

/// Embeds a center-anchored kernel into an `H x W` grid with circular
/// wrapping and returns its spectrum. Tap `(a, b)` of a kernel with center
/// `(ch, cw)` lands at grid position `((a - ch) mod H, (b - cw) mod W)`;
/// coincident taps accumulate.
pub fn kernel_spectrum(fft: &Fft2, kernel: &BlurKernel) -> Spectrum {
    let (h, w) = (fft.height(), fft.width());
    let (ch, cw) = (kernel.height() / 2, kernel.width() / 2);
    let mut embedded = ImageGrid::zeros(h, w).expect("shape is valid by construction");
    for a in 0..kernel.height() {
        // rem_euclid keeps offsets valid even for kernels wider than the grid.
        let gi = (a as isize - ch as isize).rem_euclid(h as isize) as usize;
        for b in 0..kernel.width() {
            let gj = (b as isize - cw as isize).rem_euclid(w as isize) as usize;
            let cur = embedded.get(gi, gj);
            embedded.set(gi, gj, cur + kernel.get(a, b));
        }
    }
    fft.forward(&embedded)
}

/// Analytic spectra of the periodic forward-difference operators:
/// `d_v(w_r) = exp(2*pi*i*w_r/H) - 1` for rows and the transposed analogue
/// for columns. Multiplying a spectrum pointwise by these equals applying
/// the spatial operators.
pub fn gradient_spectra(height: usize, width: usize) -> (Spectrum, Spectrum) {
    let mut dv = vec![Complex::default(); height * width];
    let mut dh = vec![Complex::default(); height * width];
    let row_phase: Vec<Complex<f64>> = (0..height)
        .map(|i| Complex::from_polar(1.0, 2.0 * PI * i as f64 / height as f64) - 1.0)
        .collect();
    let col_phase: Vec<Complex<f64>> = (0..width)
        .map(|j| Complex::from_polar(1.0, 2.0 * PI * j as f64 / width as f64) - 1.0)
        .collect();
    for i in 0..height {
        for j in 0..width {
            dv[i * width + j] = row_phase[i];
            dh[i * width + j] = col_phase[j];
        }
    }
    (dv, dh)
}

/// Precomputed spectra tying one kernel to one grid shape: the workhorse
/// handle shared by the solvers. Immutable after construction, so it can be
/// shared freely across concurrent solves.
#[derive(Debug, Clone)]
pub struct FrequencyPlan {
    fft: Fft2,
    kernel_spec: Spectrum,
    grad_v_spec: Spectrum,
    grad_h_spec: Spectrum,
    kernel_power: Vec<f64>,
    grad_v_power: Vec<f64>,
    grad_h_power: Vec<f64>,
}

impl FrequencyPlan {
    pub fn new(height: usize, width: usize, kernel: &BlurKernel) -> Result<Self> {
        if kernel.height() > height || kernel.width() > width {
            return Err(CoreError::InvalidKernel(format!(
                "kernel {}x{} does not fit inside a {height}x{width} image",
                kernel.height(),
                kernel.width()
            )));
        }
        let fft = Fft2::new(height, width)?;
        let kernel_spec = kernel_spectrum(&fft, kernel);
        let (grad_v_spec, grad_h_spec) = gradient_spectra(height, width);
        let kernel_power = kernel_spec.iter().map(|c| c.norm_sqr()).collect();
        let grad_v_power = grad_v_spec.iter().map(|c| c.norm_sqr()).collect();
        let grad_h_power = grad_h_spec.iter().map(|c| c.norm_sqr()).collect();
        Ok(Self {
            fft,
            kernel_spec,
            grad_v_spec,
            grad_h_spec,
            kernel_power,
            grad_v_power,
            grad_h_power,
        })
    }

    pub fn height(&self) -> usize {
        self.fft.height()
    }

    pub fn width(&self) -> usize {
        self.fft.width()
    }

    pub fn pixel_count(&self) -> usize {
        self.height() * self.width()
    }

    pub fn fft(&self) -> &Fft2 {
        &self.fft
    }

    /// Spectrum of the blur operator `A`.
    pub fn kernel_spec(&self) -> &Spectrum {
        &self.kernel_spec
    }

    /// Spectrum of the vertical difference operator `D_v`.
    pub fn grad_v_spec(&self) -> &Spectrum {
        &self.grad_v_spec
    }

    /// Spectrum of the horizontal difference operator `D_h`.
    pub fn grad_h_spec(&self) -> &Spectrum {
        &self.grad_h_spec
    }

    /// `|F(A)|^2` per frequency.
    pub fn kernel_power(&self) -> &[f64] {
        &self.kernel_power
    }

    /// `|F(D_v)|^2` per frequency.
    pub fn grad_v_power(&self) -> &[f64] {
        &self.grad_v_power
    }

    /// `|F(D_h)|^2` per frequency.
    pub fn grad_h_power(&self) -> &[f64] {
        &self.grad_h_power
    }

    fn check_dims(&self, x: &ImageGrid) -> Result<()> {
        if x.height() == self.height() && x.width() == self.width() {
            Ok(())
        } else {
            Err(CoreError::DimensionMismatch {
                expected_h: self.height(),
                expected_w: self.width(),
                got_h: x.height(),
                got_w: x.width(),
            })
        }
    }

    pub fn forward(&self, x: &ImageGrid) -> Spectrum {
        self.fft.forward(x)
    }

    pub fn inverse_real(&self, spec: Spectrum) -> ImageGrid {
        self.fft.inverse_real(spec)
    }

    /// `A x`: circular convolution with the kernel.
    pub fn convolve(&self, x: &ImageGrid) -> Result<ImageGrid> {
        self.check_dims(x)?;
        let mut spec = self.fft.forward(x);
        for (s, k) in spec.iter_mut().zip(&self.kernel_spec) {
            *s *= k;
        }
        Ok(self.fft.inverse_real(spec))
    }

    /// `A^T x`: correlation, i.e. convolution with the conjugate spectrum.
    pub fn correlate(&self, x: &ImageGrid) -> Result<ImageGrid> {
        self.check_dims(x)?;
        let mut spec = self.fft.forward(x);
        for (s, k) in spec.iter_mut().zip(&self.kernel_spec) {
            *s *= k.conj();
        }
        Ok(self.fft.inverse_real(spec))
    }

    /// `D x` computed spectrally (the spatial version in `grid` is the
    /// reference; this one exists for validation).
    pub fn gradient_spectral(&self, x: &ImageGrid) -> GradientField {
        let spec = self.fft.forward(x);
        let mut sv = spec.clone();
        let mut sh = spec;
        for ((v, h), (dv, dh)) in sv
            .iter_mut()
            .zip(sh.iter_mut())
            .zip(self.grad_v_spec.iter().zip(&self.grad_h_spec))
        {
            let base = *v;
            *v = base * dv;
            *h = base * dh;
        }
        GradientField {
            vertical: self.fft.inverse_real(sv),
            horizontal: self.fft.inverse_real(sh),
        }
    }
}

/// Euclidean norm a spectrum would have in the spatial domain
/// (Parseval: `||u|| = ||U|| / sqrt(H*W)`).
pub fn spectral_norm_as_spatial(spec: &Spectrum, pixel_count: usize) -> f64 {
    let energy: f64 = spec.iter().map(|c| c.norm_sqr()).sum();
    (energy / pixel_count as f64).sqrt()
}

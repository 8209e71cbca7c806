//! `mptv synth`: generate a degraded observation together with everything
//! needed to reproduce and evaluate it — the ground truth, the kernel, the
//! seed, and (for phantoms) the gradient-support map.

use std::path::{Path, PathBuf};

use mptv_core::{degrade, kernel_to_text, make_sparse_image, ImageGrid};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::imageio::{load_image, load_kernel, save_image};

/// Where the clean image comes from.
pub enum SynthSource {
    /// An existing image file (converted to grayscale via luminance).
    Input(PathBuf),
    /// A piecewise-constant phantom with sparse gradients.
    Phantom {
        height: usize,
        width: usize,
        shapes: usize,
    },
}

pub struct SynthSpec {
    pub source: SynthSource,
    /// Kernel spec string or file path.
    pub kernel: String,
    /// Additive Gaussian noise level in intensity units.
    pub noise: f64,
    pub out_dir: PathBuf,
}

pub struct SynthOutcome {
    pub observed_path: PathBuf,
    pub truth_path: PathBuf,
    pub kernel_path: PathBuf,
    pub support_path: Option<PathBuf>,
    pub config_path: PathBuf,
}

pub fn run(spec: &SynthSpec, cfg: &RunConfig) -> Result<SynthOutcome> {
    if !spec.noise.is_finite() || spec.noise < 0.0 {
        return Err(CliError::input(format!(
            "noise level must be nonnegative and finite, got {}",
            spec.noise
        )));
    }

    let (clean, support): (ImageGrid, Option<Vec<usize>>) = match &spec.source {
        SynthSource::Input(path) => (load_image(path)?.luminance(), None),
        SynthSource::Phantom {
            height,
            width,
            shapes,
        } => {
            let phantom = make_sparse_image((*height, *width), *shapes, cfg.seed)?;
            (phantom.image, Some(phantom.gradient_support))
        }
    };
    let kernel = load_kernel(&spec.kernel)?;
    if kernel.height() > clean.height() || kernel.width() > clean.width() {
        return Err(CliError::input(format!(
            "kernel {}x{} does not fit the {}x{} image",
            kernel.height(),
            kernel.width(),
            clean.height(),
            clean.width()
        )));
    }
    let observed = degrade(&clean, &kernel, spec.noise, cfg.seed)?;

    std::fs::create_dir_all(&spec.out_dir)
        .map_err(|e| CliError::Other(format!("cannot create {}: {e}", spec.out_dir.display())))?;
    let observed_path = spec.out_dir.join("observed.png");
    let truth_path = spec.out_dir.join("truth.png");
    let kernel_path = spec.out_dir.join("kernel.txt");
    let config_path = spec.out_dir.join("bundle.toml");

    save_image(&observed_path, &[observed], true)?;
    save_image(&truth_path, &[clean.clone()], true)?;
    std::fs::write(&kernel_path, kernel_to_text(&kernel))
        .map_err(|e| CliError::Other(format!("cannot write {}: {e}", kernel_path.display())))?;

    let support_path = match &support {
        Some(indices) => {
            let path = spec.out_dir.join("support.png");
            let mut mask = ImageGrid::zeros(clean.height(), clean.width())?;
            for &i in indices {
                mask.as_mut_slice()[i] = 1.0;
            }
            save_image(&path, &[mask], false)?;
            Some(path)
        }
        None => None,
    };

    let mut manifest = String::new();
    manifest.push_str("# degradation bundle\n");
    match &spec.source {
        SynthSource::Input(p) => manifest.push_str(&format!("source = \"{}\"\n", p.display())),
        SynthSource::Phantom {
            height,
            width,
            shapes,
        } => {
            manifest.push_str("source = \"phantom:sparse\"\n");
            manifest.push_str(&format!("height = {height}\nwidth = {width}\nshapes = {shapes}\n"));
        }
    }
    manifest.push_str(&format!("kernel = \"{}\"\n", spec.kernel));
    manifest.push_str(&format!("noise = {}\n", spec.noise));
    manifest.push_str(&format!("seed = {}\n", cfg.seed));
    manifest.push_str("observed = \"observed.png\"\ntruth = \"truth.png\"\nkernel_file = \"kernel.txt\"\n");
    if support_path.is_some() {
        manifest.push_str("support = \"support.png\"\n");
    }
    std::fs::write(&config_path, manifest)
        .map_err(|e| CliError::Other(format!("cannot write {}: {e}", config_path.display())))?;

    Ok(SynthOutcome {
        observed_path,
        truth_path,
        kernel_path,
        support_path,
        config_path,
    })
}

/// Parses `HxW` or a single number meaning a square size.
pub fn parse_size(s: &str) -> Result<(usize, usize)> {
    let err = || CliError::input(format!("invalid size '{s}' (expected HxW or N)"));
    if let Some((h, w)) = s.split_once('x') {
        Ok((
            h.parse().map_err(|_| err())?,
            w.parse().map_err(|_| err())?,
        ))
    } else {
        let n: usize = s.parse().map_err(|_| err())?;
        Ok((n, n))
    }
}

/// Validates a phantom-family name (only `sparse` exists today).
pub fn check_family(name: &str) -> Result<()> {
    if name == "sparse" {
        Ok(())
    } else {
        Err(CliError::input(format!(
            "unknown phantom family '{name}' (available: sparse)"
        )))
    }
}

impl SynthOutcome {
    /// All files the bundle wrote, used by tests.
    pub fn files(&self) -> Vec<&Path> {
        let mut v = vec![
            self.observed_path.as_path(),
            self.truth_path.as_path(),
            self.kernel_path.as_path(),
            self.config_path.as_path(),
        ];
        if let Some(p) = &self.support_path {
            v.push(p.as_path());
        }
        v
    }
}

//! Image and kernel file handling.
//!
//! Images: 8/16-bit grayscale PNG and PGM, plus color PNG processed
//! per-channel. Pixels map to `[0, 1]` doubles on load and are quantized
//! back on save.
//!
//! Kernels: either a plain-text matrix (rows of whitespace-separated reals)
//! or a grayscale image file; both are normalized to unit mass on load. A
//! parametric spec string (`gaussian:SIZE:SIGMA`, `disk:RADIUS`,
//! `motion:LENGTH:ANGLE`) is accepted anywhere a kernel path is.

use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma, Rgb};
use mptv_core::{make_kernel, parse_kernel_text, BlurKernel, ImageGrid, KernelSpec};

use crate::error::{CliError, Result};

/// A decoded image: one grid per channel (1 for grayscale, 3 for color).
pub struct LoadedImage {
    pub channels: Vec<ImageGrid>,
    /// Whether the source (and therefore the default output) is 16-bit.
    pub sixteen_bit: bool,
}

impl LoadedImage {
    pub fn height(&self) -> usize {
        self.channels[0].height()
    }

    pub fn width(&self) -> usize {
        self.channels[0].width()
    }

    pub fn is_color(&self) -> bool {
        self.channels.len() > 1
    }

    /// Rec. 601 luminance (the image itself when grayscale).
    pub fn luminance(&self) -> ImageGrid {
        if !self.is_color() {
            return self.channels[0].clone();
        }
        let (h, w) = (self.height(), self.width());
        let r = self.channels[0].as_slice();
        let g = self.channels[1].as_slice();
        let b = self.channels[2].as_slice();
        let data = (0..h * w)
            .map(|i| 0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i])
            .collect();
        ImageGrid::from_vec(h, w, data).expect("luminance of a valid image is valid")
    }
}

pub fn load_image(path: &Path) -> Result<LoadedImage> {
    let img = image::open(path)
        .map_err(|e| CliError::input(format!("cannot read image {}: {e}", path.display())))?;
    let sixteen_bit = matches!(
        img.color(),
        image::ColorType::L16 | image::ColorType::La16 | image::ColorType::Rgb16 | image::ColorType::Rgba16
    );
    let channels = if img.color().has_color() {
        let rgb = img.to_rgb16();
        let (w, h) = (rgb.width() as usize, rgb.height() as usize);
        let mut planes = vec![Vec::with_capacity(h * w); 3];
        for px in rgb.pixels() {
            for c in 0..3 {
                planes[c].push(px.0[c] as f64 / 65535.0);
            }
        }
        planes
            .into_iter()
            .map(|p| ImageGrid::from_vec(h, w, p))
            .collect::<std::result::Result<Vec<_>, _>>()?
    } else {
        let gray = img.to_luma16();
        let (w, h) = (gray.width() as usize, gray.height() as usize);
        let data = gray.pixels().map(|p| p.0[0] as f64 / 65535.0).collect();
        vec![ImageGrid::from_vec(h, w, data)?]
    };
    Ok(LoadedImage {
        channels,
        sixteen_bit,
    })
}

fn quantize16(v: f64) -> u16 {
    (v.clamp(0.0, 1.0) * 65535.0).round() as u16
}

fn quantize8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Saves one or three channels as PNG or PGM (chosen by extension), clamping
/// to `[0, 1]` and quantizing to the requested depth.
pub fn save_image(path: &Path, channels: &[ImageGrid], sixteen_bit: bool) -> Result<()> {
    if channels.is_empty() || (channels.len() != 1 && channels.len() != 3) {
        return Err(CliError::Other(format!(
            "can only save 1- or 3-channel images, got {}",
            channels.len()
        )));
    }
    let (h, w) = (channels[0].height() as u32, channels[0].width() as u32);
    let save = |img: DynamicImage| {
        img.save(path)
            .map_err(|e| CliError::Other(format!("cannot write {}: {e}", path.display())))
    };
    match (channels.len(), sixteen_bit) {
        (1, true) => {
            let buf: ImageBuffer<Luma<u16>, Vec<u16>> = ImageBuffer::from_fn(w, h, |c, r| {
                Luma([quantize16(channels[0].get(r as usize, c as usize))])
            });
            save(DynamicImage::ImageLuma16(buf))
        }
        (1, false) => {
            let buf: ImageBuffer<Luma<u8>, Vec<u8>> = ImageBuffer::from_fn(w, h, |c, r| {
                Luma([quantize8(channels[0].get(r as usize, c as usize))])
            });
            save(DynamicImage::ImageLuma8(buf))
        }
        (_, true) => {
            let buf: ImageBuffer<Rgb<u16>, Vec<u16>> = ImageBuffer::from_fn(w, h, |c, r| {
                Rgb([0, 1, 2].map(|ch| quantize16(channels[ch].get(r as usize, c as usize))))
            });
            save(DynamicImage::ImageRgb16(buf))
        }
        (_, false) => {
            let buf: ImageBuffer<Rgb<u8>, Vec<u8>> = ImageBuffer::from_fn(w, h, |c, r| {
                Rgb([0, 1, 2].map(|ch| quantize8(channels[ch].get(r as usize, c as usize))))
            });
            save(DynamicImage::ImageRgb8(buf))
        }
    }
}

/// Parses a parametric kernel spec string; anything that does not match a
/// known `name:args` form is treated as a file path.
pub fn parse_kernel_spec(s: &str) -> Result<KernelSpec> {
    let parts: Vec<&str> = s.split(':').collect();
    let parse_usize = |v: &str, what: &str| {
        v.parse::<usize>()
            .map_err(|_| CliError::input(format!("invalid {what} in kernel spec '{s}'")))
    };
    let parse_f64 = |v: &str, what: &str| {
        v.parse::<f64>()
            .map_err(|_| CliError::input(format!("invalid {what} in kernel spec '{s}'")))
    };
    match parts.as_slice() {
        ["gaussian", size, sigma] => Ok(KernelSpec::Gaussian {
            size: parse_usize(size, "size")?,
            sigma: parse_f64(sigma, "sigma")?,
        }),
        ["disk", radius] => Ok(KernelSpec::Disk {
            radius: parse_f64(radius, "radius")?,
        }),
        ["motion", length, angle] => Ok(KernelSpec::Motion {
            length: parse_f64(length, "length")?,
            angle_degrees: parse_f64(angle, "angle")?,
        }),
        ["delta"] => Ok(KernelSpec::Gaussian { size: 1, sigma: 1.0 }),
        [name, ..] if ["gaussian", "disk", "motion"].contains(name) => Err(CliError::input(
            format!("malformed kernel spec '{s}' (expected gaussian:SIZE:SIGMA, disk:RADIUS, or motion:LENGTH:ANGLE)"),
        )),
        _ => Ok(KernelSpec::File {
            path: std::path::PathBuf::from(s),
        }),
    }
}

fn image_extension(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()),
        Some(ref e) if ["png", "pgm", "pbm", "ppm", "pnm"].contains(&e.as_str())
    )
}

/// Loads a kernel from a spec string, a text-matrix file, or a grayscale
/// image file; the result always has unit mass.
pub fn load_kernel(source: &str) -> Result<BlurKernel> {
    let spec = parse_kernel_spec(source)?;
    if let KernelSpec::File { path } = &spec {
        if image_extension(path) {
            let img = load_image(path)?;
            if img.is_color() {
                return Err(CliError::input(format!(
                    "kernel image {} must be grayscale",
                    path.display()
                )));
            }
            let grid = &img.channels[0];
            let kernel =
                BlurKernel::from_vec(grid.height(), grid.width(), grid.as_slice().to_vec())
                    .and_then(|k| k.normalized())
                    .map_err(|e| {
                        CliError::input(format!("invalid kernel image {}: {e}", path.display()))
                    })?;
            return Ok(kernel);
        }
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::input(format!("cannot read kernel {}: {e}", path.display()))
        })?;
        return parse_kernel_text(&text)
            .map_err(|e| CliError::input(format!("invalid kernel {}: {e}", path.display())));
    }
    make_kernel(&spec).map_err(CliError::from)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_strings_parse() {
        assert!(matches!(
            parse_kernel_spec("gaussian:25:1.6").unwrap(),
            KernelSpec::Gaussian { size: 25, .. }
        ));
        assert!(matches!(
            parse_kernel_spec("disk:15").unwrap(),
            KernelSpec::Disk { .. }
        ));
        match parse_kernel_spec("motion:15:45").unwrap() {
            KernelSpec::Motion {
                length,
                angle_degrees,
            } => {
                assert_eq!(length, 15.0);
                assert_eq!(angle_degrees, 45.0);
            }
            other => panic!("expected a motion kernel, got {other:?}"),
        }
        assert!(matches!(
            parse_kernel_spec("some/path.txt").unwrap(),
            KernelSpec::File { .. }
        ));
        assert!(parse_kernel_spec("gaussian:25").is_err());
        assert!(parse_kernel_spec("disk:abc").is_err());
    }

    #[test]
    fn delta_spec_is_identity_kernel() {
        let k = load_kernel("delta").unwrap();
        assert_eq!((k.height(), k.width()), (1, 1));
        assert!((k.tap_sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn image_roundtrip_16bit_is_exact() {
        let dir = std::env::temp_dir().join("mptv-imageio-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("roundtrip.png");
        let data: Vec<f64> = (0..64).map(|i| (i as f64 * 1021.0 % 65536.0) / 65535.0).collect();
        let grid = ImageGrid::from_vec(8, 8, data).unwrap();
        save_image(&path, &[grid.clone()], true).unwrap();
        let back = load_image(&path).unwrap();
        assert!(back.sixteen_bit);
        for (a, b) in grid.as_slice().iter().zip(back.channels[0].as_slice()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn pgm_roundtrip_8bit() {
        let dir = std::env::temp_dir().join("mptv-imageio-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("roundtrip.pgm");
        let data: Vec<f64> = (0..48).map(|i| (i as f64 * 5.0 % 256.0) / 255.0).collect();
        let grid = ImageGrid::from_vec(6, 8, data).unwrap();
        save_image(&path, &[grid.clone()], false).unwrap();
        let back = load_image(&path).unwrap();
        assert_eq!(back.height(), 6);
        assert_eq!(back.width(), 8);
        for (a, b) in grid.as_slice().iter().zip(back.channels[0].as_slice()) {
            assert!((a - b).abs() < 1.0 / 255.0 + 1e-9);
        }
    }

    #[test]
    fn kernel_from_image_file() {
        let dir = std::env::temp_dir().join("mptv-imageio-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("kernel.png");
        let taps = vec![0.0, 0.5, 0.0, 0.5, 1.0, 0.5, 0.0, 0.5, 0.0];
        save_image(&path, &[ImageGrid::from_vec(3, 3, taps).unwrap()], true).unwrap();
        let k = load_kernel(path.to_str().unwrap()).unwrap();
        assert_eq!((k.height(), k.width()), (3, 3));
        assert!((k.tap_sum() - 1.0).abs() < 1e-12);
        assert!(k.get(1, 1) > k.get(0, 1));
    }

    #[test]
    fn missing_kernel_file_is_input_error() {
        let err = load_kernel("/nonexistent/kernel.txt").unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn luminance_of_gray_is_identity() {
        let g = ImageGrid::from_vec(2, 2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let img = LoadedImage {
            channels: vec![g.clone()],
            sixteen_bit: false,
        };
        assert_eq!(img.luminance().as_slice(), g.as_slice());
    }
}

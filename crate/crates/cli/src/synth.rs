//! Deterministic synthetic test image: piecewise-constant shapes on a
//! flat background, sized proportionally so any square dimension works.
//! Stands in for a real photograph in reproducible restoration
//! experiments, together with seeded Gaussian degradation.

use std::path::PathBuf;

use varidiff::{add_gaussian_noise, from_unit, to_unit, write_pgm, ImageU8};

use crate::manifest::RunManifest;
use crate::CliError;

/// Background and shape intensities in unit range.
pub const BACKGROUND: f64 = 0.25;
pub const RECT_VALUE: f64 = 0.8;
pub const DISK_VALUE: f64 = 0.55;
pub const SQUARE_VALUE: f64 = 0.95;

/// Left edge of the main rectangle in pixels, for a `size`-pixel image.
/// This is the "main edge" used by edge-preservation measurements.
pub fn main_edge_column(size: usize) -> usize {
    (size as f64 * 0.1875) as usize
}

/// Vertical extent of the main rectangle (y range, half-open).
pub fn main_edge_rows(size: usize) -> (usize, usize) {
    let s = size as f64;
    ((s * 0.1875) as usize, (s * 0.6875) as usize)
}

/// Piecewise-constant shapes: a large rectangle, a disk, and a small
/// square, mutually disjoint. At `size = 128` the rectangle spans
/// `[24,80) x [24,88)`.
pub fn shapes_image(size: usize) -> ImageU8 {
    let s = size as f64;
    let rect_x = (s * 0.1875, s * 0.625);
    let rect_y = (s * 0.1875, s * 0.6875);
    let disk_c = (s * 0.75, s * 0.3125);
    let disk_r = s * 0.125;
    let sq_x = (s * 0.6875, s * 0.875);
    let sq_y = (s * 0.625, s * 0.8125);

    let mut pixels = Vec::with_capacity(size * size);
    for j in 0..size {
        let y = j as f64;
        for i in 0..size {
            let x = i as f64;
            let v = if x >= rect_x.0 && x < rect_x.1 && y >= rect_y.0 && y < rect_y.1 {
                RECT_VALUE
            } else if (x - disk_c.0).powi(2) + (y - disk_c.1).powi(2) <= disk_r * disk_r {
                DISK_VALUE
            } else if x >= sq_x.0 && x < sq_x.1 && y >= sq_y.0 && y < sq_y.1 {
                SQUARE_VALUE
            } else {
                BACKGROUND
            };
            pixels.push((v * 255.0 + 0.5).floor() as u8);
        }
    }
    ImageU8::new(size, size, pixels).expect("dimensions are consistent")
}

#[derive(Debug, Clone)]
pub struct SynthParams {
    pub size: usize,
    /// Gaussian noise level in unit intensity; 0 writes no noisy image.
    pub noise: f64,
    pub seed: u64,
    pub output: PathBuf,
    pub noisy_output: Option<PathBuf>,
}

pub fn run(params: &SynthParams) -> Result<(), CliError> {
    if params.size < 8 {
        return Err(CliError::Usage(format!(
            "image size must be at least 8, got {}",
            params.size
        )));
    }
    let clean = shapes_image(params.size);
    std::fs::write(&params.output, write_pgm(&clean))
        .map_err(|e| CliError::io(&params.output, e))?;

    let mut manifest = RunManifest::new("synth");
    manifest.push("size", params.size);
    manifest.push("noise", params.noise);
    manifest.push("seed", params.seed);
    manifest.push("output", params.output.display());

    if let Some(noisy_path) = &params.noisy_output {
        let field = to_unit(&clean).map_err(CliError::Core)?;
        let noisy = add_gaussian_noise(&field, params.noise, params.seed).map_err(CliError::Core)?;
        std::fs::write(noisy_path, write_pgm(&from_unit(&noisy)))
            .map_err(|e| CliError::io(noisy_path, e))?;
        manifest.push("noisy_output", noisy_path.display());
    }

    let manifest_path = crate::surface::manifest_sibling(&params.output);
    manifest
        .write_to(&manifest_path)
        .map_err(|e| CliError::io(&manifest_path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_size_layout() {
        let img = shapes_image(128);
        assert_eq!(img.width(), 128);
        assert_eq!(main_edge_column(128), 24);
        assert_eq!(main_edge_rows(128), (24, 88));
        // Background, rectangle interior, disk center, square interior.
        assert_eq!(img.get(4, 4), 64);
        assert_eq!(img.get(50, 50), 204);
        assert_eq!(img.get(96, 40), 140);
        assert_eq!(img.get(100, 90), 242);
        // The main edge has full contrast.
        assert_eq!(img.get(23, 50), 64);
        assert_eq!(img.get(24, 50), 204);
    }

    #[test]
    fn deterministic() {
        assert_eq!(shapes_image(64), shapes_image(64));
    }
}

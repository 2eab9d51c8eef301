//! Grayscale image I/O (PGM), intensity normalization, synthetic
//! degradation, and restoration quality metrics.
//!
//! PGM is the one required interchange format: P2 (ASCII) and P5 (binary)
//! with maxval 255. The writer always emits binary P5 with one header
//! line each for magic, dimensions, and maxval, so write-read-write is
//! byte stable.

use crate::error::{Error, Result};
use crate::field::{GridField, GridGeometry};
use crate::rng::GaussianSampler;

/// 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageU8 {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl ImageU8 {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::dim(format!("empty image {width}x{height}")));
        }
        if pixels.len() != width * height {
            return Err(Error::dim(format!(
                "expected {} pixels for {width}x{height}, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.pixels[j * self.width + i]
    }
}

struct PgmCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> PgmCursor<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::PgmParse {
            offset: self.pos,
            message: message.into(),
        }
    }

    /// Skip whitespace and `#` comments (which run to end of line).
    fn skip_separators(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Result<&'a [u8]> {
        self.skip_separators();
        if self.pos >= self.bytes.len() {
            return Err(self.err("unexpected end of data"));
        }
        let start = self.pos;
        while self.pos < self.bytes.len()
            && !self.bytes[self.pos].is_ascii_whitespace()
            && self.bytes[self.pos] != b'#'
        {
            self.pos += 1;
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        let start_of_token = {
            self.skip_separators();
            self.pos
        };
        let tok = self.token()?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| Error::PgmParse {
                offset: start_of_token,
                message: format!("invalid {what}"),
            })
    }
}

/// Parse a P2 or P5 PGM with maxval 255.
pub fn read_pgm(bytes: &[u8]) -> Result<ImageU8> {
    let mut cur = PgmCursor { bytes, pos: 0 };
    let magic = cur.token()?;
    let binary = match magic {
        b"P5" => true,
        b"P2" => false,
        _ => {
            return Err(Error::PgmParse {
                offset: 0,
                message: "expected magic P2 or P5".to_string(),
            })
        }
    };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    if width == 0 || height == 0 {
        return Err(cur.err(format!("degenerate dimensions {width}x{height}")));
    }
    let maxval_at = {
        cur.skip_separators();
        cur.pos
    };
    let maxval = cur.number("maxval")?;
    if maxval != 255 {
        return Err(Error::PgmParse {
            offset: maxval_at,
            message: format!("unsupported maxval {maxval}, only 255 is accepted"),
        });
    }
    let count = width * height;
    let pixels = if binary {
        // Exactly one whitespace byte separates the header from the raster.
        if cur.pos >= bytes.len() || !bytes[cur.pos].is_ascii_whitespace() {
            return Err(cur.err("expected single whitespace before raster"));
        }
        cur.pos += 1;
        if bytes.len() < cur.pos + count {
            return Err(Error::PgmParse {
                offset: bytes.len(),
                message: format!(
                    "truncated raster: need {count} bytes, have {}",
                    bytes.len() - cur.pos
                ),
            });
        }
        let raster = bytes[cur.pos..cur.pos + count].to_vec();
        cur.pos += count;
        raster
    } else {
        let mut raster = Vec::with_capacity(count);
        for _ in 0..count {
            let at = {
                cur.skip_separators();
                cur.pos
            };
            let v = cur.number("pixel value")?;
            if v > 255 {
                return Err(Error::PgmParse {
                    offset: at,
                    message: format!("pixel value {v} exceeds maxval 255"),
                });
            }
            raster.push(v as u8);
        }
        raster
    };
    cur.skip_separators();
    if cur.pos != bytes.len() {
        return Err(cur.err("trailing data after raster"));
    }
    ImageU8::new(width, height, pixels)
}

/// Serialize as binary P5 with maxval 255.
pub fn write_pgm(img: &ImageU8) -> Vec<u8> {
    let mut out = Vec::with_capacity(img.pixels.len() + 32);
    out.extend_from_slice(b"P5\n");
    out.extend_from_slice(format!("{} {}\n", img.width, img.height).as_bytes());
    out.extend_from_slice(b"255\n");
    out.extend_from_slice(&img.pixels);
    out
}

/// Map pixel intensities to `[0, 1]` on a unit-spacing grid.
///
/// The grid types require at least 3 nodes per axis, so images smaller
/// than 3x3 are rejected.
pub fn to_unit(img: &ImageU8) -> Result<GridField> {
    let geometry = GridGeometry::new(img.width, img.height, 1.0, 1.0, (0.0, 0.0))?;
    let values = img.pixels.iter().map(|&p| p as f64 / 255.0).collect();
    GridField::from_values(geometry, values)
}

/// Clamp to `[0, 1]`, scale by 255 and round half-up.
pub fn from_unit(f: &GridField) -> ImageU8 {
    let pixels = f
        .values()
        .iter()
        .map(|&v| (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8)
        .collect();
    ImageU8 {
        width: f.geometry().nx(),
        height: f.geometry().ny(),
        pixels,
    }
}

/// Add i.i.d. zero-mean Gaussian noise with standard deviation `sigma`.
///
/// The stream comes from the seeded SplitMix64 / polar-method sampler in
/// [`crate::rng`], drawn in row-major cell order, so outputs are
/// reproducible everywhere. `sigma = 0` returns the input bit-exactly.
pub fn add_gaussian_noise(f: &GridField, sigma: f64, seed: u64) -> Result<GridField> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::param(format!(
            "noise level must be non-negative, got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return Ok(f.clone());
    }
    let mut sampler = GaussianSampler::new(seed);
    let values = f
        .values()
        .iter()
        .map(|&v| v + sigma * sampler.next())
        .collect();
    GridField::from_values(*f.geometry(), values)
}

/// Quality metrics for a restored field against a reference.
#[derive(Debug, Clone, Copy)]
pub struct QualityReport {
    /// Mean squared difference.
    pub mse: f64,
    /// `10 log10(peak^2 / mse)`; infinite exactly when `mse == 0`.
    pub psnr_db: f64,
    /// Intensity statistics of the first argument.
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl QualityReport {
    pub fn psnr_is_infinite(&self) -> bool {
        self.psnr_db.is_infinite()
    }
}

/// Peak signal-to-noise ratio between two fields.
pub fn psnr(a: &GridField, b: &GridField, peak: f64) -> Result<QualityReport> {
    a.check_same_grid(b)?;
    if !(peak > 0.0 && peak.is_finite()) {
        return Err(Error::param(format!("peak must be positive, got {peak}")));
    }
    let mut acc = 0.0;
    for (x, y) in a.values().iter().zip(b.values()) {
        let d = x - y;
        acc += d * d;
    }
    let mse = acc / a.values().len() as f64;
    let psnr_db = if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak * peak / mse).log10()
    };
    Ok(QualityReport {
        mse,
        psnr_db,
        min: a.min(),
        max: a.max(),
        mean: a.mean(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use proptest::prelude::*;

    #[test]
    fn one_pixel_roundtrip() {
        let img = ImageU8::new(1, 1, vec![0]).unwrap();
        let bytes = write_pgm(&img);
        assert_eq!(read_pgm(&bytes).unwrap(), img);
    }

    #[test]
    fn ascii_p2_parses() {
        let img = read_pgm(b"P2 2 1 255 0 255").unwrap();
        assert_eq!(img.width(), 2);
        assert_eq!(img.height(), 1);
        assert_eq!(img.pixels(), &[0, 255]);
    }

    #[test]
    fn comments_allowed_in_header() {
        let img = read_pgm(b"P2 # a comment\n# another\n 2 1\n255\n7 9").unwrap();
        assert_eq!(img.pixels(), &[7, 9]);
    }

    #[test]
    fn gradient_ramp_roundtrip_is_byte_exact() {
        let mut pixels = Vec::with_capacity(64 * 64);
        for j in 0..64u32 {
            for i in 0..64u32 {
                pixels.push(((i * 4 + j) % 256) as u8);
            }
        }
        let img = ImageU8::new(64, 64, pixels).unwrap();
        let bytes = write_pgm(&img);
        let back = read_pgm(&bytes).unwrap();
        assert_eq!(back, img);
        assert_eq!(write_pgm(&back), bytes);
    }

    #[test]
    fn parse_errors_carry_offsets() {
        match read_pgm(b"P3 2 2 255 0 0 0 0") {
            Err(Error::PgmParse { offset, .. }) => assert_eq!(offset, 0),
            other => panic!("unexpected {other:?}"),
        }
        match read_pgm(b"P5 2 2 128\n\0\0\0\0") {
            Err(Error::PgmParse { offset, message }) => {
                assert_eq!(offset, 7);
                assert!(message.contains("maxval"));
            }
            other => panic!("unexpected {other:?}"),
        }
        match read_pgm(b"P5 2 2 255\n\0\0") {
            Err(Error::PgmParse { offset, message }) => {
                assert_eq!(offset, 13);
                assert!(message.contains("truncated"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unit_conversion_anchors() {
        let img = ImageU8::new(3, 3, vec![0, 128, 255, 10, 20, 30, 40, 50, 60]).unwrap();
        let f = to_unit(&img).unwrap();
        assert_eq!(f.get(2, 0), 1.0);
        let back = from_unit(&f);
        assert_eq!(back, img);

        let g = GridGeometry::new(3, 3, 1.0, 1.0, (0.0, 0.0)).unwrap();
        let clamped = from_unit(&GridField::constant(g, 1.7).unwrap());
        assert!(clamped.pixels().iter().all(|&p| p == 255));
        let negative = from_unit(&GridField::constant(g, -0.4).unwrap());
        assert!(negative.pixels().iter().all(|&p| p == 0));
        let half = from_unit(&GridField::constant(g, 0.5).unwrap());
        assert!(half.pixels().iter().all(|&p| p == 128));
    }

    #[test]
    fn unit_roundtrip_over_all_intensities() {
        let pixels: Vec<u8> = (0..=255).collect();
        let img = ImageU8::new(16, 16, pixels).unwrap();
        assert_eq!(from_unit(&to_unit(&img).unwrap()), img);
    }

    #[test]
    fn tiny_images_cannot_become_fields() {
        let img = ImageU8::new(2, 2, vec![0; 4]).unwrap();
        assert!(to_unit(&img).is_err());
    }

    #[test]
    fn noise_contract() {
        let g = GridGeometry::new(16, 16, 1.0, 1.0, (0.0, 0.0)).unwrap();
        let f = GridField::constant(g, 0.5).unwrap();
        let silent = add_gaussian_noise(&f, 0.0, 1).unwrap();
        assert_eq!(silent, f);
        let a = add_gaussian_noise(&f, 0.05, 9).unwrap();
        let b = add_gaussian_noise(&f, 0.05, 9).unwrap();
        assert_eq!(a, b);
        let c = add_gaussian_noise(&f, 0.05, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn noise_standard_deviation() {
        let g = GridGeometry::new(256, 256, 1.0, 1.0, (0.0, 0.0)).unwrap();
        let f = GridField::constant(g, 0.5).unwrap();
        let noisy = add_gaussian_noise(&f, 0.05, 42).unwrap();
        let mean = noisy.mean();
        let var = noisy
            .values()
            .iter()
            .map(|v| (v - mean) * (v - mean))
            .sum::<f64>()
            / noisy.values().len() as f64;
        let std = var.sqrt();
        assert!((0.049..=0.051).contains(&std), "std {std}");
    }

    #[test]
    fn psnr_anchor_values() {
        let g = GridGeometry::new(8, 8, 1.0, 1.0, (0.0, 0.0)).unwrap();
        let a = GridField::constant(g, 0.3).unwrap();
        let same = psnr(&a, &a, 1.0).unwrap();
        assert_eq!(same.mse, 0.0);
        assert!(same.psnr_is_infinite());

        let b = GridField::constant(g, 0.4).unwrap();
        let r = psnr(&a, &b, 1.0).unwrap();
        assert!((r.mse - 0.01).abs() < 1e-15);
        assert!((r.psnr_db - 20.0).abs() < 1e-9);

        let other = GridGeometry::new(9, 8, 1.0, 1.0, (0.0, 0.0)).unwrap();
        let c = GridField::constant(other, 0.0).unwrap();
        assert!(psnr(&a, &c, 1.0).is_err());
    }

    #[test]
    fn psnr_matches_double_loop_oracle() {
        let mut rng = SplitMix64::new(3);
        let g = GridGeometry::new(13, 9, 1.0, 1.0, (0.0, 0.0)).unwrap();
        let a = GridField::from_values(g, (0..g.cells()).map(|_| rng.next_f64()).collect())
            .unwrap();
        let b = GridField::from_values(g, (0..g.cells()).map(|_| rng.next_f64()).collect())
            .unwrap();
        let got = psnr(&a, &b, 1.0).unwrap();
        // Per-row partial sums, summed afterwards: a different
        // accumulation order than the implementation.
        let mut total = 0.0;
        for j in 0..g.ny() {
            let mut row = 0.0;
            for i in 0..g.nx() {
                let d = a.get(i, j) - b.get(i, j);
                row += d * d;
            }
            total += row;
        }
        let mse = total / g.cells() as f64;
        assert!((got.mse - mse).abs() < 1e-12);
        let sym = psnr(&b, &a, 1.0).unwrap();
        assert!((sym.mse - got.mse).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn pgm_roundtrip_identity(
            width in 1usize..24,
            height in 1usize..24,
            seed in 0u64..1_000_000,
        ) {
            let mut rng = SplitMix64::new(seed);
            let pixels: Vec<u8> = (0..width * height)
                .map(|_| (rng.next_u64() & 0xFF) as u8)
                .collect();
            let img = ImageU8::new(width, height, pixels).unwrap();
            let back = read_pgm(&write_pgm(&img)).unwrap();
            prop_assert_eq!(back, img);
        }

        #[test]
        fn psnr_monotone_in_mse(delta1 in 0.01f64..0.3, delta2 in 0.31f64..0.9) {
            let g = GridGeometry::new(4, 4, 1.0, 1.0, (0.0, 0.0)).unwrap();
            let a = GridField::constant(g, 0.0).unwrap();
            let b1 = GridField::constant(g, delta1).unwrap();
            let b2 = GridField::constant(g, delta2).unwrap();
            let r1 = psnr(&a, &b1, 1.0).unwrap();
            let r2 = psnr(&a, &b2, 1.0).unwrap();
            prop_assert!(r1.mse < r2.mse);
            prop_assert!(r1.psnr_db > r2.psnr_db);
        }
    }
}

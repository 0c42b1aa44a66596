//! Image containers, RGB/HSV conversion and plane extraction.
//!
//! Planes are row-major with the origin at the top-left: `x` is the column,
//! `y` the row.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest accepted image side; a 3x3 LBP neighbourhood has to fit.
pub const MIN_IMAGE_SIDE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ColorSpace {
    Rgb,
    Hsv,
}

impl fmt::Display for ColorSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColorSpace::Rgb => f.write_str("RGB"),
            ColorSpace::Hsv => f.write_str("HSV"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Channel {
    R,
    G,
    B,
    H,
    S,
    V,
}

impl Channel {
    pub fn space(self) -> ColorSpace {
        match self {
            Channel::R | Channel::G | Channel::B => ColorSpace::Rgb,
            Channel::H | Channel::S | Channel::V => ColorSpace::Hsv,
        }
    }

    /// Position of the channel inside its pixel triple.
    pub fn index(self) -> usize {
        match self {
            Channel::R | Channel::H => 0,
            Channel::G | Channel::S => 1,
            Channel::B | Channel::V => 2,
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Channel::R => "R",
            Channel::G => "G",
            Channel::B => "B",
            Channel::H => "H",
            Channel::S => "S",
            Channel::V => "V",
        };
        f.write_str(s)
    }
}

/// A three-channel, 8-bit image tagged with its color space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorImage {
    width: usize,
    height: usize,
    space: ColorSpace,
    pixels: Vec<[u8; 3]>,
}

impl ColorImage {
    pub fn new(width: usize, height: usize, space: ColorSpace, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if width < MIN_IMAGE_SIDE || height < MIN_IMAGE_SIDE {
            return Err(Error::ImageTooSmall { width, height });
        }
        if pixels.len() != width * height {
            return Err(Error::BufferSize {
                expected: width * height,
                actual: pixels.len(),
            });
        }
        Ok(ColorImage {
            width,
            height,
            space,
            pixels,
        })
    }

    /// Builds an image from interleaved `[c0, c1, c2, c0, ...]` bytes.
    pub fn from_interleaved(width: usize, height: usize, space: ColorSpace, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != width * height * 3 {
            return Err(Error::BufferSize {
                expected: width * height * 3,
                actual: bytes.len(),
            });
        }
        let pixels = bytes.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        Self::new(width, height, space, pixels)
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        space: ColorSpace,
        mut f: impl FnMut(usize, usize) -> [u8; 3],
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, space, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn space(&self) -> ColorSpace {
        self.space
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }

    pub fn to_interleaved(&self) -> Vec<u8> {
        self.pixels.iter().flatten().copied().collect()
    }
}

/// A single channel of real samples.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneF {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl PlaneF {
    /// Fails on a size mismatch or on any NaN/infinite sample.
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::BufferSize {
                expected: width * height,
                actual: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(PlaneF {
            width,
            height,
            values,
        })
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Self {
        assert!(value.is_finite());
        PlaneF {
            width,
            height,
            values: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y));
            }
        }
        Self::new(width, height, values)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.values[y * self.width..(y + 1) * self.width]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.width, self.height, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}

/// Hexcone RGB to HSV with every component quantized to `0..=255`.
///
/// Hue is mapped from `[0, 360)` degrees onto `0..=255`; achromatic pixels get
/// hue 0.
pub fn rgb_to_hsv(img: &ColorImage) -> Result<ColorImage> {
    if img.space != ColorSpace::Rgb {
        return Err(Error::WrongColorSpace {
            expected: ColorSpace::Rgb,
            actual: img.space,
        });
    }
    let pixels = img.pixels.iter().map(|&p| rgb_pixel_to_hsv(p)).collect();
    Ok(ColorImage {
        pixels,
        space: ColorSpace::Hsv,
        ..*img
    })
}

/// Inverse of [`rgb_to_hsv`], up to 8-bit quantization.
pub fn hsv_to_rgb(img: &ColorImage) -> Result<ColorImage> {
    if img.space != ColorSpace::Hsv {
        return Err(Error::WrongColorSpace {
            expected: ColorSpace::Hsv,
            actual: img.space,
        });
    }
    let pixels = img.pixels.iter().map(|&p| hsv_pixel_to_rgb(p)).collect();
    Ok(ColorImage {
        pixels,
        space: ColorSpace::Rgb,
        ..*img
    })
}

pub fn rgb_pixel_to_hsv([r, g, b]: [u8; 3]) -> [u8; 3] {
    let (rf, gf, bf) = (f64::from(r), f64::from(g), f64::from(b));
    let max = rf.max(gf).max(bf);
    let min = rf.min(gf).min(bf);
    let delta = max - min;

    let hue_deg = if delta == 0.0 {
        0.0
    } else if max == rf {
        60.0 * ((gf - bf) / delta).rem_euclid(6.0)
    } else if max == gf {
        60.0 * ((bf - rf) / delta + 2.0)
    } else {
        60.0 * ((rf - gf) / delta + 4.0)
    };
    let sat = if max == 0.0 { 0.0 } else { delta / max };

    // hue_deg < 360, so the rounded byte never exceeds 255
    let h = (hue_deg * 255.0 / 360.0).round() as u8;
    let s = (sat * 255.0).round() as u8;
    [h, s, max as u8]
}

pub fn hsv_pixel_to_rgb([h, s, v]: [u8; 3]) -> [u8; 3] {
    let hue = f64::from(h) * 360.0 / 255.0;
    let sat = f64::from(s) / 255.0;
    let val = f64::from(v);

    let chroma = val * sat;
    let sector = hue / 60.0;
    let x = chroma * (1.0 - (sector.rem_euclid(2.0) - 1.0).abs());
    let (r1, g1, b1) = match sector as u32 {
        0 => (chroma, x, 0.0),
        1 => (x, chroma, 0.0),
        2 => (0.0, chroma, x),
        3 => (0.0, x, chroma),
        4 => (x, 0.0, chroma),
        _ => (chroma, 0.0, x),
    };
    let m = val - chroma;
    let q = |c: f64| (c + m).round().clamp(0.0, 255.0) as u8;
    [q(r1), q(g1), q(b1)]
}

/// Returns one channel as real samples in `[0, 255]`.
pub fn extract_plane(img: &ColorImage, ch: Channel) -> Result<PlaneF> {
    if ch.space() != img.space {
        return Err(Error::ChannelMismatch {
            channel: ch,
            space: img.space,
        });
    }
    let i = ch.index();
    Ok(PlaneF {
        width: img.width,
        height: img.height,
        values: img.pixels.iter().map(|p| f64::from(p[i])).collect(),
    })
}

/// Spreads below this (relative to the largest magnitude, floored at 1) count
/// as a constant plane.
const FLAT_PLANE_TOLERANCE: f64 = 1e-9;

/// Affine rescale onto `[0, 255]`.
///
/// A constant plane maps to all zeros. Planes whose spread is at rounding
/// level (for example the Gabor response of a uniform image) count as
/// constant.
pub fn normalize_plane(p: &PlaneF) -> PlaneF {
    let (lo, hi) = p.min_max();
    let scale = lo.abs().max(hi.abs()).max(1.0);
    if hi - lo <= FLAT_PLANE_TOLERANCE * scale {
        return PlaneF::constant(p.width, p.height, 0.0);
    }
    let gain = 255.0 / (hi - lo);
    PlaneF {
        width: p.width,
        height: p.height,
        values: p.values.iter().map(|&v| ((v - lo) * gain).clamp(0.0, 255.0)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hsv_reference_colors() {
        assert_eq!(rgb_pixel_to_hsv([255, 0, 0]), [0, 255, 255]);
        assert_eq!(rgb_pixel_to_hsv([128, 128, 128]), [0, 0, 128]);
        // 240 degrees * 255 / 360 = 170
        assert_eq!(rgb_pixel_to_hsv([0, 0, 255]), [170, 255, 255]);
        assert_eq!(rgb_pixel_to_hsv([0, 255, 0]), [85, 255, 255]);
        assert_eq!(rgb_pixel_to_hsv([0, 0, 0]), [0, 0, 0]);
    }

    #[test]
    fn rgb_to_hsv_rejects_hsv_input() {
        let img = ColorImage::new(3, 3, ColorSpace::Hsv, vec![[0; 3]; 9]).unwrap();
        assert!(matches!(rgb_to_hsv(&img), Err(Error::WrongColorSpace { .. })));
    }

    #[test]
    fn image_invariants() {
        assert!(matches!(
            ColorImage::new(2, 5, ColorSpace::Rgb, vec![[0; 3]; 10]),
            Err(Error::ImageTooSmall { .. })
        ));
        assert!(matches!(
            ColorImage::new(3, 3, ColorSpace::Rgb, vec![[0; 3]; 8]),
            Err(Error::BufferSize { .. })
        ));
        assert!(PlaneF::new(1, 2, vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn extract_plane_selects_channel() {
        let img = ColorImage::from_fn(4, 3, ColorSpace::Rgb, |x, y| [x as u8, y as u8, 9]).unwrap();
        let r = extract_plane(&img, Channel::R).unwrap();
        assert_eq!(r.get(3, 1), 3.0);
        let g = extract_plane(&img, Channel::G).unwrap();
        assert_eq!(g.get(3, 1), 1.0);
    }

    #[test]
    fn extract_plane_channel_mismatch() {
        let img = ColorImage::new(3, 3, ColorSpace::Hsv, vec![[1; 3]; 9]).unwrap();
        let err = extract_plane(&img, Channel::R).unwrap_err();
        assert_eq!(err.to_string(), "channel R not in HSV image");
    }

    #[test]
    fn extract_plane_constant() {
        let img = ColorImage::new(5, 4, ColorSpace::Rgb, vec![[42; 3]; 20]).unwrap();
        for ch in [Channel::R, Channel::G, Channel::B] {
            assert!(extract_plane(&img, ch).unwrap().values().iter().all(|&v| v == 42.0));
        }
    }

    #[test]
    fn normalize_examples() {
        let p = PlaneF::new(101, 1, (0..=100).map(f64::from).collect()).unwrap();
        let n = normalize_plane(&p);
        for (i, v) in n.values().iter().enumerate() {
            assert!((v - i as f64 * 2.55).abs() < 1e-9);
        }

        let c = normalize_plane(&PlaneF::constant(4, 4, 17.0));
        assert!(c.values().iter().all(|&v| v == 0.0));

        let t = normalize_plane(&PlaneF::new(3, 1, vec![-1.0, 0.0, 1.0]).unwrap());
        assert_eq!(t.values(), &[0.0, 127.5, 255.0]);
    }

    #[test]
    fn round_trip_on_primaries_and_grays() {
        // hues 0, 120 and 240 land exactly on byte steps
        let exact = [[255, 0, 0], [0, 255, 0], [0, 0, 255], [10, 10, 10], [200, 200, 200]];
        for rgb in exact {
            assert_eq!(hsv_pixel_to_rgb(rgb_pixel_to_hsv(rgb)), rgb);
        }
        // 60, 180 and 300 do not; one hue step is chroma / 85 per channel
        for rgb in [[255, 255, 0], [0, 255, 255], [255, 0, 255]] {
            let back = hsv_pixel_to_rgb(rgb_pixel_to_hsv(rgb));
            for c in 0..3 {
                assert!((i32::from(back[c]) - i32::from(rgb[c])).abs() <= 5, "{rgb:?} -> {back:?}");
            }
        }
    }

    proptest! {
        #[test]
        fn gray_has_zero_saturation(v in 0u8..=255) {
            let hsv = rgb_pixel_to_hsv([v, v, v]);
            prop_assert_eq!(hsv, [0, 0, v]);
        }

        // One hue step is 360/255 degrees, so rounding hue moves a component by
        // up to chroma/85; saturation and output rounding add at most 2.
        #[test]
        fn round_trip_within_quantization(r in 0u8..=255, g in 0u8..=255, b in 0u8..=255) {
            let back = hsv_pixel_to_rgb(rgb_pixel_to_hsv([r, g, b]));
            let chroma = f64::from(r.max(g).max(b) - r.min(g).min(b));
            let bound = 2.0 + chroma / 85.0;
            for (x, y) in [r, g, b].iter().zip(back.iter()) {
                prop_assert!((f64::from(*x) - f64::from(*y)).abs() <= bound);
            }
        }

        #[test]
        fn normalize_spans_full_range(values in proptest::collection::vec(-1e3f64..1e3, 2..64)) {
            let (lo, hi) = values.iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
            prop_assume!(hi - lo > 1e-3);
            let n = normalize_plane(&PlaneF::new(values.len(), 1, values).unwrap());
            let (nlo, nhi) = n.min_max();
            prop_assert_eq!(nlo, 0.0);
            prop_assert!((nhi - 255.0).abs() < 1e-9);
        }
    }
}

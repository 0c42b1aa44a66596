//! Seeded synthetic color-texture corpus.
//!
//! Each class gets its own base hue, grating orientation and period, and
//! noise level. Individual images vary in grating phase, a little hue and
//! orientation jitter, and noise realisation. Output is a pure function of
//! the seed and the [`SynthSpec`].

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::image::{hsv_pixel_to_rgb, ColorImage, ColorSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthSpec {
    pub classes: usize,
    pub per_class: usize,
    pub width: usize,
    pub height: usize,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            classes: 8,
            per_class: 5,
            width: 256,
            height: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthClass {
    pub name: String,
    pub images: Vec<ColorImage>,
}

#[derive(Debug, Clone, Copy)]
struct ClassStyle {
    hue_deg: f64,
    orientation: f64,
    period: f64,
    noise: f64,
}

fn class_style(class: usize, classes: usize) -> ClassStyle {
    let t = class as f64 / classes as f64;
    ClassStyle {
        hue_deg: 360.0 * t,
        // orientations spread over a half turn, periods over 20..60 px
        orientation: PI * ((class * 3) % classes) as f64 / classes as f64,
        period: 20.0 + 40.0 * ((class * 5) % classes) as f64 / classes as f64,
        noise: 4.0 + 12.0 * ((class * 7) % classes) as f64 / classes as f64,
    }
}

/// Class directory name; zero-padded so lexicographic order is class order.
pub fn class_name(class: usize) -> String {
    format!("class_{:02}", class + 1)
}

pub fn generate(seed: u64, spec: &SynthSpec) -> Result<Vec<SynthClass>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(spec.classes);
    for class in 0..spec.classes {
        let style = class_style(class, spec.classes);
        let mut images = Vec::with_capacity(spec.per_class);
        for _ in 0..spec.per_class {
            images.push(texture(&mut rng, style, spec.width, spec.height)?);
        }
        out.push(SynthClass {
            name: class_name(class),
            images,
        });
    }
    Ok(out)
}

fn texture(rng: &mut ChaCha8Rng, style: ClassStyle, width: usize, height: usize) -> Result<ColorImage> {
    let phase = rng.gen_range(0.0..2.0 * PI);
    let hue = (style.hue_deg + rng.gen_range(-6.0..6.0)).rem_euclid(360.0);
    let theta = style.orientation + rng.gen_range(-0.05..0.05);
    let (c, s) = (theta.cos(), theta.sin());
    let noise = Normal::new(0.0, style.noise).expect("positive noise level");
    let hue_byte = (hue * 255.0 / 360.0).round().min(255.0) as u8;

    ColorImage::from_fn(width, height, ColorSpace::Rgb, |x, y| {
        let u = x as f64 * c + y as f64 * s;
        let wave = 0.5 + 0.5 * (2.0 * PI * u / style.period + phase).sin();
        let sat = 110.0 + 110.0 * wave;
        let val = 70.0 + 150.0 * wave + noise.sample(rng);
        let [r, g, b] = hsv_pixel_to_rgb([hue_byte, sat.round() as u8, val.round().clamp(0.0, 255.0) as u8]);
        let mut jitter = |v: u8| (f64::from(v) + noise.sample(rng) * 0.5).round().clamp(0.0, 255.0) as u8;
        [jitter(r), jitter(g), jitter(b)]
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_images() {
        let spec = SynthSpec {
            classes: 3,
            per_class: 2,
            width: 32,
            height: 24,
        };
        assert_eq!(generate(5, &spec).unwrap(), generate(5, &spec).unwrap());
        assert_ne!(generate(5, &spec).unwrap(), generate(6, &spec).unwrap());
    }

    #[test]
    fn default_layout() {
        let corpus = generate(1, &SynthSpec { width: 16, height: 16, ..Default::default() }).unwrap();
        assert_eq!(corpus.len(), 8);
        assert!(corpus.iter().all(|c| c.images.len() == 5));
        let names: Vec<&str> = corpus.iter().map(|c| c.name.as_str()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
    }

    #[test]
    fn class_styles_are_distinct() {
        let styles: Vec<_> = (0..8).map(|c| class_style(c, 8)).collect();
        for i in 0..8 {
            for j in i + 1..8 {
                assert!(styles[i].hue_deg != styles[j].hue_deg);
            }
        }
    }
}

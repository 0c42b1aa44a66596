//! Local binary pattern coding and code histograms.
//!
//! Neighbour `p_0` is the top-left sample and the rest follow clockwise; bit
//! `i` of a code is set when neighbour `i` is greater than or equal to the
//! centre. With `P = 8, R = 1` the neighbourhood is the 3x3 ring. Other
//! configurations sample `P` points on a circle of radius `R` (same start and
//! direction) with bilinear interpolation. Pixels closer than `ceil(R)` to the
//! border get no code.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::PlaneF;

/// Largest supported neighbour count.
pub const MAX_POINTS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LbpVariant {
    Basic,
    RotationInvariant,
    Riu2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LbpConfig {
    pub points: usize,
    pub radius: f64,
    pub variant: LbpVariant,
}

impl Default for LbpConfig {
    fn default() -> Self {
        LbpConfig {
            points: 8,
            radius: 1.0,
            variant: LbpVariant::Basic,
        }
    }
}

impl LbpConfig {
    pub fn new(points: usize, radius: f64, variant: LbpVariant) -> Result<Self> {
        let cfg = LbpConfig {
            points,
            radius,
            variant,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 4 || self.points > MAX_POINTS {
            return Err(Error::InvalidLbpConfig(format!(
                "P must be in 4..={MAX_POINTS}, got {}",
                self.points
            )));
        }
        if !self.radius.is_finite() || self.radius < 1.0 {
            return Err(Error::InvalidLbpConfig(format!("R must be >= 1, got {}", self.radius)));
        }
        Ok(())
    }

    /// Pixels excluded on each side of the plane.
    pub fn border(&self) -> usize {
        self.radius.ceil() as usize
    }

    /// Number of distinct labels `lbp_map` can emit for this configuration.
    pub fn n_bins(&self) -> usize {
        match self.variant {
            LbpVariant::Basic => 1 << self.points,
            LbpVariant::RotationInvariant => ri_label_table(self.points).labels.len(),
            LbpVariant::Riu2 => self.points + 2,
        }
    }
}

/// A plane of LBP labels over the interior of the source plane.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeMap {
    width: usize,
    height: usize,
    codes: Vec<u32>,
}

impl CodeMap {
    pub fn new(width: usize, height: usize, codes: Vec<u32>) -> Result<Self> {
        if codes.len() != width * height {
            return Err(Error::BufferSize {
                expected: width * height,
                actual: codes.len(),
            });
        }
        Ok(CodeMap { width, height, codes })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn codes(&self) -> &[u32] {
        &self.codes
    }

    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.codes[y * self.width + x]
    }

    /// The labels as a real plane, e.g. for statistics or rendering.
    pub fn to_plane(&self) -> PlaneF {
        PlaneF::new(self.width, self.height, self.codes.iter().map(|&c| f64::from(c)).collect())
            .expect("codes are finite")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeHistogram {
    pub bins: Vec<f64>,
    pub normalized: bool,
}

impl CodeHistogram {
    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.bins.iter().sum()
    }
}

/// LBP code of one neighbourhood: bit `i` is set iff `neighbors[i] >= center`.
pub fn lbp_code(center: f64, neighbors: &[f64]) -> u32 {
    neighbors
        .iter()
        .enumerate()
        .filter(|(_, &n)| n - center >= 0.0)
        .fold(0, |code, (i, _)| code | (1 << i))
}

/// Rotates the low `points` bits of `code` right by `k`.
pub fn rotate_bits(code: u32, k: usize, points: usize) -> u32 {
    let mask = if points == 32 { u32::MAX } else { (1u32 << points) - 1 };
    let k = k % points;
    if k == 0 {
        return code & mask;
    }
    ((code >> k) | (code << (points - k))) & mask
}

/// Smallest value among all circular rotations of `code`.
pub fn ri_code(code: u32, points: usize) -> u32 {
    (0..points).map(|k| rotate_bits(code, k, points)).min().unwrap_or(code)
}

/// Number of 0/1 changes walking once around the circular pattern.
pub fn transitions(code: u32, points: usize) -> u32 {
    (code ^ rotate_bits(code, 1, points)).count_ones()
}

/// Uniform rotation-invariant label: the number of set bits for patterns with
/// at most two transitions, `points + 1` otherwise.
pub fn riu2_code(code: u32, points: usize) -> u32 {
    if transitions(code, points) <= 2 {
        code.count_ones()
    } else {
        points as u32 + 1
    }
}

struct RiLabels {
    labels: Vec<u32>,
    index_of_code: Vec<u32>,
}

fn ri_label_table(points: usize) -> RiLabels {
    let ri: Vec<u32> = (0..1u32 << points).map(|c| ri_code(c, points)).collect();
    let mut labels = ri.clone();
    labels.sort_unstable();
    labels.dedup();
    let index_of_code = ri
        .iter()
        .map(|r| labels.binary_search(r).expect("label present") as u32)
        .collect();
    RiLabels { labels, index_of_code }
}

/// Sorted list of rotation-invariant labels; `lbp_map` with the
/// `RotationInvariant` variant emits indices into this list.
pub fn ri_labels(points: usize) -> Vec<u32> {
    ri_label_table(points).labels
}

#[derive(Debug, Clone, Copy)]
enum Sample {
    Pixel {
        dx: isize,
        dy: isize,
    },
    Bilinear {
        dx: isize,
        dy: isize,
        fx: f64,
        fy: f64,
    },
}

fn neighbourhood(cfg: &LbpConfig) -> Vec<Sample> {
    if cfg.points == 8 && cfg.radius == 1.0 {
        return [(-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0)]
            .into_iter()
            .map(|(dx, dy)| Sample::Pixel { dx, dy })
            .collect();
    }
    (0..cfg.points)
        .map(|i| {
            // y grows downwards, so increasing angle walks clockwise on screen
            let angle = 1.25 * PI + 2.0 * PI * i as f64 / cfg.points as f64;
            let snap = |v: f64| if (v - v.round()).abs() < 1e-9 { v.round() } else { v };
            let sx = snap(cfg.radius * angle.cos());
            let sy = snap(cfg.radius * angle.sin());
            let (x0, y0) = (sx.floor(), sy.floor());
            let (fx, fy) = (sx - x0, sy - y0);
            if fx == 0.0 && fy == 0.0 {
                Sample::Pixel {
                    dx: x0 as isize,
                    dy: y0 as isize,
                }
            } else {
                Sample::Bilinear {
                    dx: x0 as isize,
                    dy: y0 as isize,
                    fx,
                    fy,
                }
            }
        })
        .collect()
}

fn sample(plane: &PlaneF, x: usize, y: usize, s: &Sample) -> f64 {
    match *s {
        Sample::Pixel { dx, dy } => plane.get((x as isize + dx) as usize, (y as isize + dy) as usize),
        Sample::Bilinear { dx, dy, fx, fy } => {
            let x0 = (x as isize + dx) as usize;
            let y0 = (y as isize + dy) as usize;
            let x1 = if fx > 0.0 { x0 + 1 } else { x0 };
            let y1 = if fy > 0.0 { y0 + 1 } else { y0 };
            plane.get(x0, y0) * (1.0 - fx) * (1.0 - fy)
                + plane.get(x1, y0) * fx * (1.0 - fy)
                + plane.get(x0, y1) * (1.0 - fx) * fy
                + plane.get(x1, y1) * fx * fy
        }
    }
}

/// LBP labels of a single plane.
pub fn lbp_map(plane: &PlaneF, cfg: &LbpConfig) -> Result<CodeMap> {
    cross_lbp_map(plane, plane, cfg)
}

/// LBP labels where neighbours are read from `neighbors` and the threshold
/// from `centers`. With the same plane twice this is [`lbp_map`].
pub fn cross_lbp_map(neighbors: &PlaneF, centers: &PlaneF, cfg: &LbpConfig) -> Result<CodeMap> {
    cfg.validate()?;
    if neighbors.dims() != centers.dims() {
        return Err(Error::DimensionMismatch {
            left: neighbors.dims(),
            right: centers.dims(),
        });
    }
    let border = cfg.border();
    let min_side = 2 * border + 1;
    let (w, h) = neighbors.dims();
    if w < min_side || h < min_side {
        return Err(Error::PlaneTooSmall {
            width: w,
            height: h,
            min_side,
        });
    }

    let samples = neighbourhood(cfg);
    let relabel: Option<Vec<u32>> = match cfg.variant {
        LbpVariant::Basic => None,
        LbpVariant::RotationInvariant => Some(ri_label_table(cfg.points).index_of_code),
        LbpVariant::Riu2 => Some((0..1u32 << cfg.points).map(|c| riu2_code(c, cfg.points)).collect()),
    };

    let out_w = w - 2 * border;
    let out_h = h - 2 * border;
    let mut codes = vec![0u32; out_w * out_h];
    codes.par_chunks_mut(out_w).enumerate().for_each(|(row, out)| {
        let y = row + border;
        let mut ring = vec![0.0; samples.len()];
        for (col, slot) in out.iter_mut().enumerate() {
            let x = col + border;
            for (value, s) in ring.iter_mut().zip(&samples) {
                *value = sample(neighbors, x, y, s);
            }
            let code = lbp_code(centers.get(x, y), &ring);
            *slot = match &relabel {
                Some(table) => table[code as usize],
                None => code,
            };
        }
    });
    CodeMap::new(out_w, out_h, codes)
}

/// Counts label occurrences into `n_bins` bins, optionally dividing by the
/// total so the bins sum to one.
pub fn histogram(map: &CodeMap, n_bins: usize, normalize: bool) -> Result<CodeHistogram> {
    let mut counts = vec![0u64; n_bins];
    for &code in map.codes() {
        let slot = counts
            .get_mut(code as usize)
            .ok_or(Error::CodeOutOfRange { code, n_bins })?;
        *slot += 1;
    }
    let total = map.codes().len() as f64;
    let bins = counts
        .into_iter()
        .map(|c| if normalize && total > 0.0 { c as f64 / total } else { c as f64 })
        .collect();
    Ok(CodeHistogram { bins, normalized: normalize })
}

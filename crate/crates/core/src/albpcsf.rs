//! Cross-color-space LBP fusion.
//!
//! Each channel pair reads its neighbours from an RGB plane and its centre
//! threshold from the HSV Value plane. The three pair histograms, each
//! normalized, are concatenated in the order (R,V), (G,V), (B,V).

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{extract_plane, rgb_to_hsv, Channel, ColorImage, ColorSpace, PlaneF};
use crate::lbp::{cross_lbp_map, histogram, CodeHistogram, CodeMap, LbpConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChannelPair {
    pub neighbor: Channel,
    pub center: Channel,
}

impl fmt::Display for ChannelPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.neighbor, self.center)
    }
}

pub const FUSION_PAIRS: [ChannelPair; 3] = [
    ChannelPair {
        neighbor: Channel::R,
        center: Channel::V,
    },
    ChannelPair {
        neighbor: Channel::G,
        center: Channel::V,
    },
    ChannelPair {
        neighbor: Channel::B,
        center: Channel::V,
    },
];

/// The R, G, B and V planes the fusion operator reads.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionPlanes {
    pub r: PlaneF,
    pub g: PlaneF,
    pub b: PlaneF,
    pub v: PlaneF,
}

impl FusionPlanes {
    pub fn from_rgb(img: &ColorImage) -> Result<Self> {
        let hsv = rgb_to_hsv(img)?;
        Ok(FusionPlanes {
            r: extract_plane(img, Channel::R)?,
            g: extract_plane(img, Channel::G)?,
            b: extract_plane(img, Channel::B)?,
            v: extract_plane(&hsv, Channel::V)?,
        })
    }

    pub fn plane(&self, ch: Channel) -> Option<&PlaneF> {
        match ch {
            Channel::R => Some(&self.r),
            Channel::G => Some(&self.g),
            Channel::B => Some(&self.b),
            Channel::V => Some(&self.v),
            Channel::H | Channel::S => None,
        }
    }

    /// Applies `f` to every plane.
    pub fn try_map(&self, f: impl Fn(&PlaneF) -> Result<PlaneF> + Sync + Send) -> Result<Self> {
        let mut out: Vec<PlaneF> = [&self.r, &self.g, &self.b, &self.v]
            .into_par_iter()
            .map(f)
            .collect::<Result<_>>()?;
        let v = out.pop().expect("four planes");
        let b = out.pop().expect("four planes");
        let g = out.pop().expect("four planes");
        let r = out.pop().expect("four planes");
        Ok(FusionPlanes { r, g, b, v })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusedDescriptor {
    pub per_pair: Vec<(ChannelPair, CodeHistogram)>,
    /// Per-pair histograms back to back; sums to the number of pairs.
    pub concatenated: Vec<f64>,
}

/// Opponent-channel LBP: `code = sum s(n_i - c) 2^i` with neighbours `n_i`
/// from `neighbor_plane` and centre `c` from `center_plane`.
pub fn cross_channel_lbp(neighbor_plane: &PlaneF, center_plane: &PlaneF, cfg: &LbpConfig) -> Result<CodeMap> {
    cross_lbp_map(neighbor_plane, center_plane, cfg)
}

/// Code maps for every fusion pair, in [`FUSION_PAIRS`] order.
pub fn pair_code_maps(planes: &FusionPlanes, cfg: &LbpConfig) -> Result<Vec<(ChannelPair, CodeMap)>> {
    FUSION_PAIRS
        .par_iter()
        .map(|&pair| {
            let n = planes.plane(pair.neighbor).expect("fusion pair channel");
            let c = planes.plane(pair.center).expect("fusion pair channel");
            Ok((pair, cross_channel_lbp(n, c, cfg)?))
        })
        .collect()
}

/// Fusion descriptor over precomputed planes.
pub fn albpcsf_planes(planes: &FusionPlanes, cfg: &LbpConfig) -> Result<FusedDescriptor> {
    let n_bins = cfg.n_bins();
    let per_pair = pair_code_maps(planes, cfg)?
        .into_iter()
        .map(|(pair, map)| Ok((pair, histogram(&map, n_bins, true)?)))
        .collect::<Result<Vec<_>>>()?;
    let concatenated = per_pair.iter().flat_map(|(_, h)| h.bins.iter().copied()).collect();
    Ok(FusedDescriptor { per_pair, concatenated })
}

pub fn albpcsf(img: &ColorImage, cfg: &LbpConfig) -> Result<FusedDescriptor> {
    if img.space() != ColorSpace::Rgb {
        return Err(Error::WrongColorSpace {
            expected: ColorSpace::Rgb,
            actual: img.space(),
        });
    }
    albpcsf_planes(&FusionPlanes::from_rgb(img)?, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lbp::lbp_map;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rocktex_oracles::oracle_lbp;

    fn random_image(seed: u64, w: usize, h: usize) -> ColorImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ColorImage::from_fn(w, h, ColorSpace::Rgb, |_, _| rng.gen()).unwrap()
    }

    #[test]
    fn same_plane_degenerates_to_lbp() {
        let img = random_image(1, 17, 13);
        let r = extract_plane(&img, Channel::R).unwrap();
        let cfg = LbpConfig::default();
        assert_eq!(cross_channel_lbp(&r, &r, &cfg).unwrap(), lbp_map(&r, &cfg).unwrap());
    }

    #[test]
    fn lower_neighbours_give_zero() {
        let m = cross_channel_lbp(&PlaneF::constant(6, 6, 10.0), &PlaneF::constant(6, 6, 20.0), &LbpConfig::default())
            .unwrap();
        assert!(m.codes().iter().all(|&c| c == 0));
    }

    #[test]
    fn dimension_mismatch() {
        let err = cross_channel_lbp(&PlaneF::constant(6, 6, 0.0), &PlaneF::constant(6, 5, 0.0), &LbpConfig::default())
            .unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn random_pairs_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let n = PlaneF::from_fn(16, 16, |_, _| f64::from(rng.gen_range(0u8..=255))).unwrap();
            let c = PlaneF::from_fn(16, 16, |_, _| f64::from(rng.gen_range(0u8..=255))).unwrap();
            let got = cross_channel_lbp(&n, &c, &LbpConfig::default()).unwrap();
            let want = oracle_lbp(n.values(), c.values(), 16, 16, 8, 1.0).unwrap();
            assert_eq!(got.codes(), &want[..]);
        }
    }

    #[test]
    fn shape_and_normalization() {
        let d = albpcsf(&random_image(2, 32, 24), &LbpConfig::default()).unwrap();
        assert_eq!(d.concatenated.len(), 768);
        assert_eq!(d.per_pair.len(), 3);
        for ((pair, h), want) in d.per_pair.iter().zip(FUSION_PAIRS) {
            assert_eq!(*pair, want);
            assert!((h.total() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn gray_content_gives_identical_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let img = ColorImage::from_fn(20, 20, ColorSpace::Rgb, |_, _| [rng.gen(); 3]).unwrap();
        let d = albpcsf(&img, &LbpConfig::default()).unwrap();
        assert_eq!(d.per_pair[0].1, d.per_pair[1].1);
        assert_eq!(d.per_pair[1].1, d.per_pair[2].1);
    }

    #[test]
    fn translation_keeps_histograms() {
        // the same content embedded at two offsets inside a constant frame
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let patch: Vec<[u8; 3]> = (0..100).map(|_| rng.gen()).collect();
        let make = |ox: usize, oy: usize| {
            ColorImage::from_fn(20, 20, ColorSpace::Rgb, |x, y| {
                if (ox..ox + 10).contains(&x) && (oy..oy + 10).contains(&y) {
                    patch[(y - oy) * 10 + (x - ox)]
                } else {
                    [7, 7, 7]
                }
            })
            .unwrap()
        };
        let cfg = LbpConfig::default();
        assert_eq!(albpcsf(&make(3, 4), &cfg).unwrap(), albpcsf(&make(8, 6), &cfg).unwrap());
    }

    #[test]
    fn rejects_hsv_input() {
        let img = rgb_to_hsv(&random_image(5, 8, 8)).unwrap();
        assert!(albpcsf(&img, &LbpConfig::default()).is_err());
    }
}

//! Descriptor pipelines and per-pair statistics.
//!
//! Every descriptor is a non-negative vector summing to one:
//!
//! - `RgbHist`: the three 256-bin channel histograms, concatenated.
//! - `Lbp`: LBP histogram of the Rec. 601 luma plane.
//! - `Albpcsf`: cross-color-space LBP on the raw channels.
//! - `GAlbpcsf`: the same on Gabor amplitude planes for one `(mu, nu)`.
//! - `DAlbpcsf`: the same on low-pass DCT reconstructions.
//!
//! Gabor amplitudes and DCT reconstructions are recoded onto `[0, 255]`
//! ([`recode_plane`]) before the cross-channel comparison.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::albpcsf::{albpcsf_planes, pair_code_maps, ChannelPair, FusedDescriptor, FusionPlanes};
use crate::dct::{dct2, idct2, lowpass, LowFreqSelector};
use crate::error::{Error, Result};
use crate::gabor::{build_kernel, default_kernel_size, filter, GaborParams};
use crate::image::{normalize_plane, ColorImage, ColorSpace, PlaneF};
use crate::lbp::{histogram, lbp_map, LbpConfig};

/// Default low-frequency block side for D-ALBPCSF.
pub const DEFAULT_DCT_K: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "rgb-hist")]
    RgbHist,
    #[serde(rename = "lbp")]
    Lbp,
    #[serde(rename = "albpcsf")]
    Albpcsf,
    #[serde(rename = "g-albpcsf")]
    GAlbpcsf,
    #[serde(rename = "d-albpcsf")]
    DAlbpcsf,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::RgbHist,
        Method::Lbp,
        Method::Albpcsf,
        Method::GAlbpcsf,
        Method::DAlbpcsf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::RgbHist => "rgb-hist",
            Method::Lbp => "lbp",
            Method::Albpcsf => "albpcsf",
            Method::GAlbpcsf => "g-albpcsf",
            Method::DAlbpcsf => "d-albpcsf",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        Method::ALL
            .into_iter()
            .find(|m| m.name() == key || m.name().replace('-', "") == key)
            .ok_or_else(|| format!("unknown method '{s}'"))
    }
}

/// One Gabor filter choice, with the (wavelength, angle) label it was
/// requested under.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaborSetting {
    pub params: GaborParams,
    pub lambda: f64,
    pub theta_deg: f64,
}

impl GaborSetting {
    pub fn from_params(params: GaborParams) -> Self {
        GaborSetting {
            params,
            lambda: params.wavelength(),
            theta_deg: params.orientation().to_degrees(),
        }
    }

    pub fn from_wavelength(lambda: f64, theta_deg: f64, sigma: f64, f: f64) -> Result<Self> {
        Ok(GaborSetting {
            params: GaborParams::from_wavelength(lambda, theta_deg, sigma, f)?,
            lambda,
            theta_deg,
        })
    }
}

/// Wavelengths 4 and 8 at 0, 45, 90, 135 and 180 degrees.
pub fn reporting_grid(sigma: f64, f: f64) -> Result<Vec<GaborSetting>> {
    let mut grid = Vec::new();
    for nu in [0u8, 2] {
        for theta in [0.0, 45.0, 90.0, 135.0, 180.0] {
            let lambda = 4.0 * f.powi(i32::from(nu));
            grid.push(GaborSetting::from_wavelength(lambda, theta, sigma, f)?);
        }
    }
    Ok(grid)
}

/// All 40 `(mu, nu)` filters, scale-major.
pub fn full_grid(sigma: f64, f: f64) -> Result<Vec<GaborSetting>> {
    let mut grid = Vec::new();
    for nu in 0..crate::gabor::SCALES {
        for mu in 0..crate::gabor::ORIENTATIONS {
            grid.push(GaborSetting::from_params(GaborParams::new(mu, nu, sigma, f)?));
        }
    }
    Ok(grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DescriptorParams {
    RgbHist,
    Lbp { lbp: LbpConfig },
    Albpcsf { lbp: LbpConfig },
    Gabor { lbp: LbpConfig, gabor: GaborSetting },
    Dct { lbp: LbpConfig, k: usize },
}

impl DescriptorParams {
    pub fn method(&self) -> Method {
        match self {
            DescriptorParams::RgbHist => Method::RgbHist,
            DescriptorParams::Lbp { .. } => Method::Lbp,
            DescriptorParams::Albpcsf { .. } => Method::Albpcsf,
            DescriptorParams::Gabor { .. } => Method::GAlbpcsf,
            DescriptorParams::Dct { .. } => Method::DAlbpcsf,
        }
    }

    pub fn lbp(&self) -> Option<&LbpConfig> {
        match self {
            DescriptorParams::RgbHist => None,
            DescriptorParams::Lbp { lbp }
            | DescriptorParams::Albpcsf { lbp }
            | DescriptorParams::Gabor { lbp, .. }
            | DescriptorParams::Dct { lbp, .. } => Some(lbp),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorRecord {
    pub method: Method,
    pub params: DescriptorParams,
    pub vector: Vec<f64>,
}

/// Channel statistics for one fusion pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairStats {
    pub pair: ChannelPair,
    pub mean: f64,
    pub std: f64,
}

/// Grid step used by [`recode_plane`].
pub const RECODE_STEP: f64 = 1.0 / (1u64 << 20) as f64;

/// Rescales onto `[0, 255]` and rounds to multiples of 2^-20.
///
/// The rounding removes transform round-off, so samples that are equal in
/// exact arithmetic compare equal in the LBP threshold. Values derived from
/// 8-bit data sit at least ~1e-9 away from a rounding boundary, well above
/// the round-off of the transforms.
pub fn recode_plane(p: &PlaneF) -> PlaneF {
    normalize_plane(p)
        .map(|v| (v / RECODE_STEP).round() * RECODE_STEP)
        .expect("finite")
}

fn require_rgb(img: &ColorImage) -> Result<()> {
    if img.space() != ColorSpace::Rgb {
        return Err(Error::WrongColorSpace {
            expected: ColorSpace::Rgb,
            actual: img.space(),
        });
    }
    Ok(())
}

fn global_normalize(v: Vec<f64>) -> Vec<f64> {
    let total: f64 = v.iter().sum();
    if total == 0.0 {
        return v;
    }
    v.into_iter().map(|x| x / total).collect()
}

fn fused_record(method: Method, params: DescriptorParams, fused: FusedDescriptor) -> DescriptorRecord {
    DescriptorRecord {
        method,
        params,
        vector: global_normalize(fused.concatenated),
    }
}

/// Concatenated per-channel 256-bin intensity histograms.
pub fn rgb_hist(img: &ColorImage) -> Result<DescriptorRecord> {
    require_rgb(img)?;
    let mut counts = vec![0.0; 3 * 256];
    for px in img.pixels() {
        for (c, &v) in px.iter().enumerate() {
            counts[c * 256 + usize::from(v)] += 1.0;
        }
    }
    Ok(DescriptorRecord {
        method: Method::RgbHist,
        params: DescriptorParams::RgbHist,
        vector: global_normalize(counts),
    })
}

/// Rec. 601 luma rounded to 8 bits.
pub fn luma_plane(img: &ColorImage) -> Result<PlaneF> {
    require_rgb(img)?;
    let values = img
        .pixels()
        .iter()
        .map(|&[r, g, b]| (0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b)).round())
        .collect();
    PlaneF::new(img.width(), img.height(), values)
}

/// Single-channel LBP histogram of the luma plane.
pub fn gray_lbp(img: &ColorImage, cfg: &LbpConfig) -> Result<DescriptorRecord> {
    let map = lbp_map(&luma_plane(img)?, cfg)?;
    let hist = histogram(&map, cfg.n_bins(), true)?;
    Ok(DescriptorRecord {
        method: Method::Lbp,
        params: DescriptorParams::Lbp { lbp: *cfg },
        vector: hist.bins,
    })
}

pub fn albpcsf_record(img: &ColorImage, cfg: &LbpConfig) -> Result<DescriptorRecord> {
    require_rgb(img)?;
    let fused = albpcsf_planes(&FusionPlanes::from_rgb(img)?, cfg)?;
    Ok(fused_record(Method::Albpcsf, DescriptorParams::Albpcsf { lbp: *cfg }, fused))
}

/// Recoded Gabor amplitude of each fusion plane.
pub fn gabor_planes(img: &ColorImage, params: &GaborParams) -> Result<FusionPlanes> {
    require_rgb(img)?;
    let size = default_kernel_size(params, img.width().min(img.height()));
    let kernel = build_kernel(params, size)?;
    FusionPlanes::from_rgb(img)?.try_map(|p| Ok(recode_plane(&filter(p, &kernel)?.amplitude)))
}

/// Recoded low-pass DCT reconstruction of each fusion plane.
pub fn dct_planes(img: &ColorImage, k: usize) -> Result<FusionPlanes> {
    require_rgb(img)?;
    let sel = LowFreqSelector::new(k)?;
    FusionPlanes::from_rgb(img)?.try_map(|p| Ok(recode_plane(&idct2(&lowpass(&dct2(p), sel)?))))
}

/// Cross-color-space LBP on Gabor amplitudes for one filter.
pub fn g_albpcsf(img: &ColorImage, gabor: &GaborSetting, cfg: &LbpConfig) -> Result<DescriptorRecord> {
    let planes = gabor_planes(img, &gabor.params)?;
    let fused = albpcsf_planes(&planes, cfg)?;
    Ok(fused_record(
        Method::GAlbpcsf,
        DescriptorParams::Gabor {
            lbp: *cfg,
            gabor: *gabor,
        },
        fused,
    ))
}

/// Cross-color-space LBP on the low-frequency DCT reconstruction keeping the
/// top-left `k x k` coefficients.
pub fn d_albpcsf(img: &ColorImage, k: usize, cfg: &LbpConfig) -> Result<DescriptorRecord> {
    let planes = dct_planes(img, k)?;
    let fused = albpcsf_planes(&planes, cfg)?;
    Ok(fused_record(Method::DAlbpcsf, DescriptorParams::Dct { lbp: *cfg, k }, fused))
}

/// Runs the method described by `params` on `img`.
pub fn extract(img: &ColorImage, params: &DescriptorParams) -> Result<DescriptorRecord> {
    match params {
        DescriptorParams::RgbHist => rgb_hist(img),
        DescriptorParams::Lbp { lbp } => gray_lbp(img, lbp),
        DescriptorParams::Albpcsf { lbp } => albpcsf_record(img, lbp),
        DescriptorParams::Gabor { lbp, gabor } => g_albpcsf(img, gabor, lbp),
        DescriptorParams::Dct { lbp, k } => d_albpcsf(img, *k, lbp),
    }
}

/// Arithmetic mean and population standard deviation of a map.
pub fn pair_stats(map: &PlaneF, pair: ChannelPair) -> Result<PairStats> {
    let n = map.values().len();
    if n == 0 {
        return Err(Error::BufferSize { expected: 1, actual: 0 });
    }
    let mean = map.values().iter().sum::<f64>() / n as f64;
    let var = map.values().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    Ok(PairStats {
        pair,
        mean,
        std: var.sqrt(),
    })
}

/// Statistics of each pair's cross-channel code map, in fusion-pair order.
pub fn pair_report(planes: &FusionPlanes, cfg: &LbpConfig) -> Result<Vec<PairStats>> {
    pair_code_maps(planes, cfg)?
        .into_iter()
        .map(|(pair, map)| pair_stats(&map.to_plane(), pair))
        .collect()
}

/// The fusion planes a method codes, or `None` for the single-channel methods.
pub fn fusion_planes(img: &ColorImage, params: &DescriptorParams) -> Result<Option<FusionPlanes>> {
    Ok(match params {
        DescriptorParams::Albpcsf { .. } => Some(FusionPlanes::from_rgb(img)?),
        DescriptorParams::Gabor { gabor, .. } => Some(gabor_planes(img, &gabor.params)?),
        DescriptorParams::Dct { k, .. } => Some(dct_planes(img, *k)?),
        DescriptorParams::RgbHist | DescriptorParams::Lbp { .. } => None,
    })
}

/// [`extract`] plus, for the fusion methods, [`pair_report`] on the same
/// transformed planes.
pub fn extract_with_stats(
    img: &ColorImage,
    params: &DescriptorParams,
) -> Result<(DescriptorRecord, Option<Vec<PairStats>>)> {
    let (Some(planes), Some(cfg)) = (fusion_planes(img, params)?, params.lbp()) else {
        return Ok((extract(img, params)?, None));
    };
    let fused = albpcsf_planes(&planes, cfg)?;
    let stats = pair_report(&planes, cfg)?;
    Ok((fused_record(params.method(), *params, fused), Some(stats)))
}

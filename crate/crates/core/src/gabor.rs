//! Multi-scale, multi-orientation Gabor filter bank.
//!
//! The kernel for orientation `mu` and scale `nu` is
//!
//! ```text
//! psi(r) = exp(-|k|^2 |r|^2 / (2 sigma^2)) * (exp(i k.r) - c)
//! k      = pi / (2 f^nu) * (cos(mu pi / 8), sin(mu pi / 8))
//! ```
//!
//! sampled at integer offsets around the kernel centre, with `r = (x, y)` in
//! plane coordinates (y down). The wavelength is `4 f^nu` pixels. `c` removes
//! the DC response; see [`DcCompensation`].
//!
//! Filtering is a true convolution with half-sample symmetric border
//! extension. [`filter`] runs it through the FFT, [`filter_direct`] in the
//! spatial domain.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::PlaneF;

pub const ORIENTATIONS: u8 = 8;
pub const SCALES: u8 = 5;
pub const DEFAULT_SIGMA: f64 = PI;
pub const DEFAULT_F: f64 = std::f64::consts::SQRT_2;
/// Largest kernel side used by [`default_kernel_size`].
pub const MAX_KERNEL_SIDE: usize = 61;
pub const MIN_KERNEL_SIDE: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaborParams {
    pub mu: u8,
    pub nu: u8,
    pub sigma: f64,
    pub f: f64,
}

impl GaborParams {
    pub fn new(mu: u8, nu: u8, sigma: f64, f: f64) -> Result<Self> {
        if mu >= ORIENTATIONS {
            return Err(Error::InvalidGaborParams(format!("mu must be in 0..8, got {mu}")));
        }
        if nu >= SCALES {
            return Err(Error::InvalidGaborParams(format!("nu must be in 0..5, got {nu}")));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidGaborParams(format!("sigma must be > 0, got {sigma}")));
        }
        if !(f.is_finite() && f > 1.0) {
            return Err(Error::InvalidGaborParams(format!("f must be > 1, got {f}")));
        }
        Ok(GaborParams { mu, nu, sigma, f })
    }

    pub fn with_defaults(mu: u8, nu: u8) -> Result<Self> {
        Self::new(mu, nu, DEFAULT_SIGMA, DEFAULT_F)
    }

    /// Parameters from a wavelength in pixels and an orientation in degrees.
    ///
    /// The wavelength must be `4 f^nu` for an integer scale `nu` (within 1e-6
    /// relative), and the angle a multiple of 22.5 degrees; 180 degrees maps
    /// onto `mu = 0`, which has the same amplitude response.
    pub fn from_wavelength(lambda: f64, theta_deg: f64, sigma: f64, f: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidGaborParams(format!("wavelength must be > 0, got {lambda}")));
        }
        let nu_real = (lambda / 4.0).ln() / f.ln();
        let nu = nu_real.round();
        if (4.0 * f.powf(nu) - lambda).abs() > 1e-6 * lambda || !(0.0..f64::from(SCALES)).contains(&nu) {
            return Err(Error::InvalidGaborParams(format!(
                "wavelength {lambda} is not 4*f^nu for nu in 0..5 (f = {f})"
            )));
        }
        let steps = theta_deg / 22.5;
        if (steps - steps.round()).abs() > 1e-9 {
            return Err(Error::InvalidGaborParams(format!(
                "orientation {theta_deg} is not a multiple of 22.5 degrees"
            )));
        }
        let mu = (steps.round() as i64).rem_euclid(i64::from(ORIENTATIONS));
        Self::new(mu as u8, nu as u8, sigma, f)
    }

    pub fn wave_vector(&self) -> (f64, f64) {
        let magnitude = PI / (2.0 * self.f.powi(i32::from(self.nu)));
        let angle = self.orientation();
        (magnitude * angle.cos(), magnitude * angle.sin())
    }

    /// Orientation in radians, `mu * pi / 8`.
    pub fn orientation(&self) -> f64 {
        f64::from(self.mu) * PI / f64::from(ORIENTATIONS)
    }

    /// `2 pi / |k| = 4 f^nu`.
    pub fn wavelength(&self) -> f64 {
        4.0 * self.f.powi(i32::from(self.nu))
    }
}

/// How the DC term `c` of the kernel is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DcCompensation {
    /// `c = exp(-sigma^2 / 2)`, the value that zeroes the mean of the
    /// continuous, untruncated kernel.
    Analytic,
    /// `c` chosen so the sampled, truncated taps sum to exactly zero.
    #[default]
    ZeroMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct KernelOptions {
    pub dc: DcCompensation,
    /// Multiply the taps by `|k|^2 / sigma^2`.
    pub amplitude_prefactor: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaborKernel {
    params: GaborParams,
    size: usize,
    taps: Vec<Complex64>,
}

impl GaborKernel {
    pub fn params(&self) -> &GaborParams {
        &self.params
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Row-major taps; `taps[(y + h) * size + (x + h)]` is `psi(x, y)` with
    /// `h = size / 2`.
    pub fn taps(&self) -> &[Complex64] {
        &self.taps
    }

    pub fn tap(&self, x: isize, y: isize) -> Complex64 {
        let h = (self.size / 2) as isize;
        self.taps[((y + h) as usize) * self.size + (x + h) as usize]
    }

    pub fn l1_norm(&self) -> f64 {
        self.taps.iter().map(|t| t.norm()).sum()
    }
}

/// Kernel side covering three envelope standard deviations,
/// `2 ceil(3 sigma f^nu 2 / pi) + 1`, capped at `max_side` (rounded down to
/// odd) and at [`MAX_KERNEL_SIDE`].
pub fn default_kernel_size(params: &GaborParams, max_side: usize) -> usize {
    // the slack keeps f = sqrt(2) from rounding 24.000000000000004 up to 25
    let reach = (3.0 * params.sigma * params.f.powi(i32::from(params.nu)) * 2.0 / PI - 1e-9).ceil() as usize;
    let cap = max_side.min(MAX_KERNEL_SIDE);
    let cap = if cap.is_multiple_of(2) { cap.saturating_sub(1) } else { cap };
    (2 * reach + 1).min(cap)
}

pub fn build_kernel(params: &GaborParams, size: usize) -> Result<GaborKernel> {
    build_kernel_with(params, size, KernelOptions::default())
}

pub fn build_kernel_with(params: &GaborParams, size: usize, opts: KernelOptions) -> Result<GaborKernel> {
    if size.is_multiple_of(2) || size < MIN_KERNEL_SIDE {
        return Err(Error::InvalidKernelSize {
            size,
            min: MIN_KERNEL_SIDE,
        });
    }
    let (kx, ky) = params.wave_vector();
    let k2 = kx * kx + ky * ky;
    let s2 = params.sigma * params.sigma;
    let h = (size / 2) as isize;

    let mut envelope = Vec::with_capacity(size * size);
    let mut carrier = Vec::with_capacity(size * size);
    for y in -h..=h {
        for x in -h..=h {
            let (xf, yf) = (x as f64, y as f64);
            envelope.push((-k2 * (xf * xf + yf * yf) / (2.0 * s2)).exp());
            carrier.push(Complex64::from_polar(1.0, kx * xf + ky * yf));
        }
    }
    let dc = match opts.dc {
        DcCompensation::Analytic => Complex64::new((-s2 / 2.0).exp(), 0.0),
        DcCompensation::ZeroMean => {
            let num: Complex64 = envelope.iter().zip(&carrier).map(|(g, c)| c * g).sum();
            num / envelope.iter().sum::<f64>()
        }
    };
    let gain = if opts.amplitude_prefactor { k2 / s2 } else { 1.0 };
    let taps = envelope
        .iter()
        .zip(&carrier)
        .map(|(g, c)| (c - dc) * (g * gain))
        .collect();
    Ok(GaborKernel {
        params: *params,
        size,
        taps,
    })
}

/// All 40 kernels, ordered scale-major (`nu`, then `mu`).
pub fn bank(sigma: f64, f: f64) -> Result<Vec<GaborKernel>> {
    bank_with(sigma, f, MAX_KERNEL_SIDE, KernelOptions::default())
}

pub fn bank_with(sigma: f64, f: f64, max_side: usize, opts: KernelOptions) -> Result<Vec<GaborKernel>> {
    (0..SCALES)
        .flat_map(|nu| (0..ORIENTATIONS).map(move |mu| (mu, nu)))
        .map(|(mu, nu)| {
            let p = GaborParams::new(mu, nu, sigma, f)?;
            build_kernel_with(&p, default_kernel_size(&p, max_side), opts)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaborResponse {
    /// `|G|`, non-negative.
    pub amplitude: PlaneF,
    /// `arg G` in `(-pi, pi]`.
    pub phase: PlaneF,
}

impl GaborResponse {
    fn from_complex(width: usize, height: usize, g: &[Complex64]) -> Result<Self> {
        let amplitude = PlaneF::new(width, height, g.iter().map(|z| z.norm()).collect())?;
        let phase = PlaneF::new(
            width,
            height,
            g.iter()
                .map(|z| {
                    let a = z.arg();
                    if a <= -PI {
                        PI
                    } else {
                        a
                    }
                })
                .collect(),
        )?;
        Ok(GaborResponse { amplitude, phase })
    }
}

/// Half-sample symmetric index: `... 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...`.
fn reflect(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let m = i.rem_euclid(period);
    if m < n as isize {
        m as usize
    } else {
        (period - 1 - m) as usize
    }
}

fn check_fits(plane: &PlaneF, kernel: &GaborKernel) -> Result<()> {
    if plane.width() < kernel.size || plane.height() < kernel.size {
        return Err(Error::PlaneTooSmall {
            width: plane.width(),
            height: plane.height(),
            min_side: kernel.size,
        });
    }
    Ok(())
}

/// Complex convolution `plane * kernel` through a 2D FFT.
pub fn convolve(plane: &PlaneF, kernel: &GaborKernel) -> Result<Vec<Complex64>> {
    check_fits(plane, kernel)?;
    let (w, h) = plane.dims();
    let half = kernel.size / 2;
    let pw = w + 2 * half;
    let ph = h + 2 * half;

    // reflect-padded image and kernel wrapped around the origin; every output
    // in the interior window reads only padded samples, so the circular
    // convolution never wraps
    let mut img: Vec<Complex64> = (0..ph)
        .flat_map(|py| {
            let sy = reflect(py as isize - half as isize, h);
            (0..pw).map(move |px| (sy, reflect(px as isize - half as isize, w)))
        })
        .map(|(sy, sx)| Complex64::new(plane.get(sx, sy), 0.0))
        .collect();
    let mut ker = vec![Complex64::new(0.0, 0.0); pw * ph];
    let hk = half as isize;
    for v in -hk..=hk {
        for u in -hk..=hk {
            let row = v.rem_euclid(ph as isize) as usize;
            let col = u.rem_euclid(pw as isize) as usize;
            ker[row * pw + col] = kernel.tap(u, v);
        }
    }

    let mut planner = FftPlanner::new();
    fft2(&mut planner, &mut img, pw, ph, false);
    fft2(&mut planner, &mut ker, pw, ph, false);
    img.par_iter_mut().zip(&ker).for_each(|(a, b)| *a *= b);
    fft2(&mut planner, &mut img, pw, ph, true);

    let scale = 1.0 / (pw * ph) as f64;
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        let start = (y + half) * pw + half;
        out.extend(img[start..start + w].iter().map(|z| z * scale));
    }
    Ok(out)
}

fn fft2(planner: &mut FftPlanner<f64>, data: &mut [Complex64], width: usize, height: usize, inverse: bool) {
    let row_fft = if inverse {
        planner.plan_fft_inverse(width)
    } else {
        planner.plan_fft_forward(width)
    };
    data.par_chunks_mut(width).for_each(|row| row_fft.process(row));

    let col_fft = if inverse {
        planner.plan_fft_inverse(height)
    } else {
        planner.plan_fft_forward(height)
    };
    let mut transposed = vec![Complex64::new(0.0, 0.0); width * height];
    transpose(data, &mut transposed, width, height);
    transposed.par_chunks_mut(height).for_each(|col| col_fft.process(col));
    transpose(&transposed, data, height, width);
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], width: usize, height: usize) {
    for y in 0..height {
        for x in 0..width {
            dst[x * height + y] = src[y * width + x];
        }
    }
}

/// Complex convolution in the spatial domain, `O(N^2 K^2)`.
pub fn convolve_direct(plane: &PlaneF, kernel: &GaborKernel) -> Result<Vec<Complex64>> {
    check_fits(plane, kernel)?;
    let (w, h) = plane.dims();
    let hk = (kernel.size / 2) as isize;
    let mut out = vec![Complex64::new(0.0, 0.0); w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (x, acc) in row.iter_mut().enumerate() {
            for v in -hk..=hk {
                let sy = reflect(y as isize - v, h);
                for u in -hk..=hk {
                    let sx = reflect(x as isize - u, w);
                    *acc += kernel.tap(u, v) * plane.get(sx, sy);
                }
            }
        }
    });
    Ok(out)
}

/// Amplitude and phase of the Gabor response (FFT path).
pub fn filter(plane: &PlaneF, kernel: &GaborKernel) -> Result<GaborResponse> {
    let g = convolve(plane, kernel)?;
    GaborResponse::from_complex(plane.width(), plane.height(), &g)
}

/// Amplitude and phase of the Gabor response (spatial path).
pub fn filter_direct(plane: &PlaneF, kernel: &GaborKernel) -> Result<GaborResponse> {
    let g = convolve_direct(plane, kernel)?;
    GaborResponse::from_complex(plane.width(), plane.height(), &g)
}

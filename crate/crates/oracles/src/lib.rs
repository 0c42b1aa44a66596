//! Brute-force reference implementations.
//!
//! Everything here works on plain slices and shares no code with the
//! `rocktex` library, so the library can be checked against it. The routines
//! are deliberately literal and slow; each one is size-capped.

use std::f64::consts::PI;

/// Largest plane (per side) accepted by [`oracle_dct`].
pub const DCT_MAX_SIDE: usize = 16;
/// Largest plane (per side) accepted by [`oracle_convolve`].
pub const CONVOLVE_MAX_SIDE: usize = 64;

/// Literal evaluation of the LBP sum at every interior pixel.
///
/// Neighbours are taken from `neighbors`, the centre from `centers`; pass the
/// same slice twice for single-channel LBP. For `p == 8 && r == 1.0` the
/// neighbourhood is the 3x3 ring read clockwise from the top-left pixel;
/// otherwise `p` points on a circle of radius `r`, starting at the top-left
/// diagonal and going clockwise, bilinearly interpolated.
pub fn oracle_lbp(
    neighbors: &[f64],
    centers: &[f64],
    width: usize,
    height: usize,
    p: usize,
    r: f64,
) -> Result<Vec<u32>, String> {
    if neighbors.len() != width * height || centers.len() != width * height {
        return Err("buffer size does not match dimensions".into());
    }
    let border = r.ceil() as usize;
    if width < 2 * border + 1 || height < 2 * border + 1 {
        return Err(format!("plane {width}x{height} too small for radius {r}"));
    }
    let at = |x: i64, y: i64| neighbors[y as usize * width + x as usize];

    let mut out = Vec::new();
    for y in border..height - border {
        for x in border..width - border {
            let c = centers[y * width + x];
            let mut code: u32 = 0;
            for i in 0..p {
                let value = if p == 8 && r == 1.0 {
                    // top-left, top, top-right, right, bottom-right, bottom, bottom-left, left
                    let ring: [(i64, i64); 8] = [
                        (-1, -1),
                        (0, -1),
                        (1, -1),
                        (1, 0),
                        (1, 1),
                        (0, 1),
                        (-1, 1),
                        (-1, 0),
                    ];
                    let (dx, dy) = ring[i];
                    at(x as i64 + dx, y as i64 + dy)
                } else {
                    let angle = 1.25 * PI + 2.0 * PI * i as f64 / p as f64;
                    let mut sx = x as f64 + r * angle.cos();
                    let mut sy = y as f64 + r * angle.sin();
                    if (sx - sx.round()).abs() < 1e-9 {
                        sx = sx.round();
                    }
                    if (sy - sy.round()).abs() < 1e-9 {
                        sy = sy.round();
                    }
                    let x0 = sx.floor();
                    let y0 = sy.floor();
                    let fx = sx - x0;
                    let fy = sy - y0;
                    let x0 = x0 as i64;
                    let y0 = y0 as i64;
                    let x1 = if fx > 0.0 { x0 + 1 } else { x0 };
                    let y1 = if fy > 0.0 { y0 + 1 } else { y0 };
                    at(x0, y0) * (1.0 - fx) * (1.0 - fy)
                        + at(x1, y0) * fx * (1.0 - fy)
                        + at(x0, y1) * (1.0 - fx) * fy
                        + at(x1, y1) * fx * fy
                };
                let s = if value - c >= 0.0 { 1 } else { 0 };
                code += s * 2u32.pow(i as u32);
            }
            out.push(code);
        }
    }
    Ok(out)
}

/// Orthonormal 2D DCT-II as a quadruple loop.
///
/// `values` is row-major with `width` = M columns (index x) and `height` = N
/// rows (index y). The result is row-major too: `out[j * width + i] = A(i, j)`.
pub fn oracle_dct(values: &[f64], width: usize, height: usize) -> Result<Vec<f64>, String> {
    if width > DCT_MAX_SIDE || height > DCT_MAX_SIDE {
        return Err(format!(
            "oracle_dct is capped at {DCT_MAX_SIDE}x{DCT_MAX_SIDE}, got {width}x{height}"
        ));
    }
    if values.len() != width * height {
        return Err("buffer size does not match dimensions".into());
    }
    let m = width as f64;
    let n = height as f64;
    let a = |k: usize, len: f64| {
        if k == 0 {
            (1.0 / len).sqrt()
        } else {
            (2.0 / len).sqrt()
        }
    };
    let mut out = vec![0.0; width * height];
    for j in 0..height {
        for i in 0..width {
            let mut sum = 0.0;
            for x in 0..width {
                for y in 0..height {
                    let f = values[y * width + x];
                    sum += f
                        * (((2 * x + 1) as f64 * i as f64 * PI) / (2.0 * m)).cos()
                        * (((2 * y + 1) as f64 * j as f64 * PI) / (2.0 * n)).cos();
                }
            }
            out[j * width + i] = a(i, m) * a(j, n) * sum;
        }
    }
    Ok(out)
}

/// Direct spatial convolution of a real plane with a complex kernel.
///
/// `kernel` is row-major, `ksize` x `ksize` (odd), with the kernel centre at
/// offset (0, 0). Out-of-range samples use half-sample symmetric reflection
/// (`... c b a | a b c ...`). Returns (re, im) per output pixel.
pub fn oracle_convolve(
    values: &[f64],
    width: usize,
    height: usize,
    kernel: &[(f64, f64)],
    ksize: usize,
) -> Result<Vec<(f64, f64)>, String> {
    if width > CONVOLVE_MAX_SIDE || height > CONVOLVE_MAX_SIDE {
        return Err(format!(
            "oracle_convolve is capped at {CONVOLVE_MAX_SIDE}x{CONVOLVE_MAX_SIDE}, got {width}x{height}"
        ));
    }
    if ksize.is_multiple_of(2) || kernel.len() != ksize * ksize {
        return Err("kernel must be square with odd side".into());
    }
    let half = (ksize / 2) as i64;
    let reflect = |mut i: i64, n: i64| {
        while i < 0 || i >= n {
            if i < 0 {
                i = -i - 1;
            } else {
                i = 2 * n - 1 - i;
            }
        }
        i as usize
    };
    let mut out = Vec::with_capacity(width * height);
    for y in 0..height as i64 {
        for x in 0..width as i64 {
            let mut re = 0.0;
            let mut im = 0.0;
            for v in -half..=half {
                for u in -half..=half {
                    let sx = reflect(x - u, width as i64);
                    let sy = reflect(y - v, height as i64);
                    let sample = values[sy * width + sx];
                    let (kr, ki) = kernel[((v + half) * ksize as i64 + (u + half)) as usize];
                    re += sample * kr;
                    im += sample * ki;
                }
            }
            out.push((re, im));
        }
    }
    Ok(out)
}

/// Exhaustive nearest-class-mean scan.
///
/// For `query`, averages `distance(query, j)` over every other item `j` of
/// each class and returns the class with the smallest average, preferring the
/// lowest index on ties. Classes with no other members are skipped.
pub fn oracle_classify(
    labels: &[usize],
    n_classes: usize,
    query: usize,
    distance: impl Fn(usize, usize) -> f64,
) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for class in 0..n_classes {
        let members: Vec<usize> = (0..labels.len())
            .filter(|&j| j != query && labels[j] == class)
            .collect();
        if members.is_empty() {
            continue;
        }
        let mean = members.iter().map(|&j| distance(query, j)).sum::<f64>() / members.len() as f64;
        match best {
            Some((_, b)) if mean >= b => {}
            _ => best = Some((class, mean)),
        }
    }
    best.map(|(c, _)| c)
}

/// Counts of each value in `codes`, as a plain tally.
pub fn oracle_tally(codes: &[u32], n_bins: usize) -> Vec<u64> {
    let mut bins = vec![0u64; n_bins];
    for &c in codes {
        bins[c as usize] += 1;
    }
    bins
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lbp_constant_plane_is_all_ones() {
        let v = vec![7.0; 25];
        let codes = oracle_lbp(&v, &v, 5, 5, 8, 1.0).unwrap();
        assert_eq!(codes, vec![255; 9]);
    }

    #[test]
    fn lbp_single_interior_pixel() {
        let v: Vec<f64> = (0..9).map(f64::from).collect();
        assert_eq!(oracle_lbp(&v, &v, 3, 3, 8, 1.0).unwrap().len(), 1);
    }

    #[test]
    fn dct_two_by_two_ones() {
        let c = oracle_dct(&[1.0; 4], 2, 2).unwrap();
        assert!((c[0] - 2.0).abs() < 1e-12);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn dct_rejects_oversize() {
        assert!(oracle_dct(&vec![0.0; 17 * 17], 17, 17).is_err());
    }

    #[test]
    fn convolve_identity_kernel() {
        let v: Vec<f64> = (0..16).map(f64::from).collect();
        let mut k = vec![(0.0, 0.0); 9];
        k[4] = (1.0, 0.0);
        let out = oracle_convolve(&v, 4, 4, &k, 3).unwrap();
        for (o, e) in out.iter().zip(&v) {
            assert_eq!(o.0, *e);
            assert_eq!(o.1, 0.0);
        }
    }

    #[test]
    fn classify_prefers_lower_index_on_tie() {
        let labels = [0, 0, 1, 1];
        assert_eq!(oracle_classify(&labels, 2, 0, |_, _| 1.0), Some(0));
    }
}

//! Orthonormal 2D DCT-II, its inverse, and low-frequency selection.
//!
//! For an `M x N` plane (M columns indexed by x, N rows indexed by y):
//!
//! ```text
//! A(i, j) = a(i) a(j) sum_x sum_y f(x, y) cos((2x+1) i pi / 2M) cos((2y+1) j pi / 2N)
//! a(0) = sqrt(1/M), a(i > 0) = sqrt(2/M)   (likewise for j with N)
//! ```
//!
//! The transform is separable and is computed as two passes of 1D basis
//! products.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::PlaneF;

/// DCT coefficients, row-major: `coeffs[j * width + i] = A(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DctCoeffs {
    width: usize,
    height: usize,
    coeffs: Vec<f64>,
}

impl DctCoeffs {
    pub fn new(width: usize, height: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != width * height {
            return Err(Error::BufferSize {
                expected: width * height,
                actual: coeffs.len(),
            });
        }
        Ok(DctCoeffs { width, height, coeffs })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.coeffs[j * self.width + i]
    }

    /// Number of non-zero coefficients.
    pub fn nonzero(&self) -> usize {
        self.coeffs.iter().filter(|&&c| c != 0.0).count()
    }

    /// The coefficients as a plane, e.g. for statistics.
    pub fn to_plane(&self) -> PlaneF {
        PlaneF::new(self.width, self.height, self.coeffs.clone()).expect("finite coefficients")
    }
}

/// Keeps coefficients with `i < k` and `j < k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LowFreqSelector {
    k: usize,
}

impl LowFreqSelector {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidSelector("block side must be at least 1".into()));
        }
        Ok(LowFreqSelector { k })
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

/// `basis[i * n + x] = a(i) cos((2x + 1) i pi / 2n)`.
fn basis(n: usize) -> Vec<f64> {
    let nf = n as f64;
    let mut b = Vec::with_capacity(n * n);
    for i in 0..n {
        let scale = if i == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
        for x in 0..n {
            b.push(scale * (((2 * x + 1) * i) as f64 * PI / (2.0 * nf)).cos());
        }
    }
    b
}

/// Applies `out[r][i] = sum_x m[i][x] * data[r][x]` to every row.
fn transform_rows(data: &[f64], width: usize, m: &[f64], transpose_m: bool) -> Vec<f64> {
    let mut out = vec![0.0; data.len()];
    out.par_chunks_mut(width)
        .zip(data.par_chunks(width))
        .for_each(|(dst, src)| {
            for (i, d) in dst.iter_mut().enumerate() {
                *d = if transpose_m {
                    src.iter().enumerate().map(|(x, v)| m[x * width + i] * v).sum()
                } else {
                    m[i * width..(i + 1) * width].iter().zip(src).map(|(a, v)| a * v).sum()
                };
            }
        });
    out
}

fn transpose(src: &[f64], width: usize, height: usize) -> Vec<f64> {
    let mut dst = vec![0.0; src.len()];
    for y in 0..height {
        for x in 0..width {
            dst[x * height + y] = src[y * width + x];
        }
    }
    dst
}

fn separable(values: &[f64], width: usize, height: usize, inverse: bool) -> Vec<f64> {
    let bx = basis(width);
    let by = basis(height);
    let rows = transform_rows(values, width, &bx, inverse);
    let cols = transform_rows(&transpose(&rows, width, height), height, &by, inverse);
    transpose(&cols, height, width)
}

pub fn dct2(p: &PlaneF) -> DctCoeffs {
    let (w, h) = p.dims();
    DctCoeffs {
        width: w,
        height: h,
        coeffs: separable(p.values(), w, h, false),
    }
}

pub fn idct2(c: &DctCoeffs) -> PlaneF {
    PlaneF::new(c.width, c.height, separable(&c.coeffs, c.width, c.height, true))
        .expect("inverse of finite coefficients is finite")
}

/// Zeroes every coefficient with `i >= k` or `j >= k`.
pub fn lowpass(c: &DctCoeffs, sel: LowFreqSelector) -> Result<DctCoeffs> {
    let limit = c.width.min(c.height);
    if sel.k > limit {
        return Err(Error::InvalidSelector(format!(
            "block side {} exceeds min(M, N) = {limit}",
            sel.k
        )));
    }
    let coeffs = c
        .coeffs
        .iter()
        .enumerate()
        .map(|(idx, &v)| {
            let (i, j) = (idx % c.width, idx / c.width);
            if i < sel.k && j < sel.k {
                v
            } else {
                0.0
            }
        })
        .collect();
    Ok(DctCoeffs { coeffs, ..*c })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rocktex_oracles::oracle_dct;

    fn random_plane(seed: u64, w: usize, h: usize) -> PlaneF {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        PlaneF::from_fn(w, h, |_, _| rng.gen_range(0.0..255.0)).unwrap()
    }

    fn norm(v: &[f64]) -> f64 {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    #[test]
    fn ones_two_by_two() {
        let c = dct2(&PlaneF::constant(2, 2, 1.0));
        assert!((c.get(0, 0) - 2.0).abs() < 1e-12);
        assert!((c.get(1, 0)).abs() < 1e-12);
        assert!((c.get(0, 1)).abs() < 1e-12);
        assert!((c.get(1, 1)).abs() < 1e-12);
    }

    #[test]
    fn constant_plane_dc() {
        let c = dct2(&PlaneF::constant(6, 10, 3.5));
        assert!((c.get(0, 0) - 3.5 * 60f64.sqrt()).abs() < 1e-12);
        assert!(c.coeffs()[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn matches_oracle() {
        for (seed, (w, h)) in [(8, 8), (5, 7), (16, 3), (1, 4), (16, 16)].into_iter().enumerate() {
            let p = random_plane(seed as u64, w, h);
            let want = oracle_dct(p.values(), w, h).unwrap();
            let got = dct2(&p);
            let scale = norm(&want);
            for (a, b) in got.coeffs().iter().zip(&want) {
                assert!((a - b).abs() <= 1e-9 * scale, "{w}x{h}");
            }
        }
    }

    #[test]
    fn delta_at_origin() {
        let p = PlaneF::from_fn(4, 4, |x, y| if x == 0 && y == 0 { 1.0 } else { 0.0 }).unwrap();
        let c = dct2(&p);
        let a = |i: usize| if i == 0 { 0.5 } else { (0.5f64).sqrt() };
        for j in 0..4 {
            for i in 0..4 {
                let want = a(i) * a(j) * (i as f64 * PI / 8.0).cos() * (j as f64 * PI / 8.0).cos();
                assert!((c.get(i, j) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn parseval_and_round_trip() {
        let p = random_plane(11, 8, 8);
        let c = dct2(&p);
        let e1: f64 = p.values().iter().map(|v| v * v).sum();
        let e2: f64 = c.coeffs().iter().map(|v| v * v).sum();
        assert!((e1 - e2).abs() <= 1e-9 * e1);

        let back = idct2(&c);
        let diff: Vec<f64> = back.values().iter().zip(p.values()).map(|(a, b)| a - b).collect();
        assert!(norm(&diff) <= 1e-9 * norm(p.values()));
    }

    #[test]
    fn inverse_examples() {
        let mut coeffs = vec![0.0; 5 * 3];
        coeffs[0] = 15f64.sqrt();
        let plane = idct2(&DctCoeffs::new(5, 3, coeffs).unwrap());
        assert!(plane.values().iter().all(|v| (v - 1.0).abs() < 1e-12));

        let zero = idct2(&DctCoeffs::new(4, 4, vec![0.0; 16]).unwrap());
        assert!(zero.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn lowpass_examples() {
        let square = dct2(&random_plane(15, 7, 7));
        assert_eq!(lowpass(&square, LowFreqSelector::new(7).unwrap()).unwrap(), square);

        let p = random_plane(12, 9, 7);
        let c = dct2(&p);
        // on a non-square plane the block drops the extra columns
        assert_eq!(lowpass(&c, LowFreqSelector::new(7).unwrap()).unwrap().nonzero(), 49);

        let dc = idct2(&lowpass(&c, LowFreqSelector::new(1).unwrap()).unwrap());
        let mean = p.values().iter().sum::<f64>() / 63.0;
        assert!(dc.values().iter().all(|v| (v - mean).abs() < 1e-9));

        assert!(lowpass(&c, LowFreqSelector::new(8).unwrap()).is_err());
        assert!(LowFreqSelector::new(0).is_err());
    }

    #[test]
    fn lowpass_counts_retained_block() {
        let p = random_plane(13, 256, 256);
        let kept = lowpass(&dct2(&p), LowFreqSelector::new(32).unwrap()).unwrap();
        assert_eq!(kept.nonzero(), 1024);
    }

    #[test]
    fn reconstruction_error_shrinks_with_k() {
        let p = random_plane(14, 12, 12);
        let c = dct2(&p);
        let mut last = f64::INFINITY;
        for k in 1..=12 {
            let r = idct2(&lowpass(&c, LowFreqSelector::new(k).unwrap()).unwrap());
            let err: Vec<f64> = r.values().iter().zip(p.values()).map(|(a, b)| a - b).collect();
            let e = norm(&err);
            assert!(e <= last + 1e-9);
            last = e;
        }
        assert!(last < 1e-9 * norm(p.values()));
    }

    proptest! {
        #[test]
        fn linearity(seed in 0u64..500, a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let p = random_plane(seed, 7, 5);
            let q = random_plane(seed + 1000, 7, 5);
            let mix = PlaneF::new(7, 5, p.values().iter().zip(q.values()).map(|(x, y)| a * x + b * y).collect()).unwrap();
            let (cp, cq, cm) = (dct2(&p), dct2(&q), dct2(&mix));
            let scale = norm(cm.coeffs()).max(1.0);
            for i in 0..35 {
                let lin = a * cp.coeffs()[i] + b * cq.coeffs()[i];
                prop_assert!((lin - cm.coeffs()[i]).abs() <= 1e-9 * scale);
            }
        }
    }
}

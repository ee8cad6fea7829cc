use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Periodic square grid `[0, L)^2` with `n` points per axis.
///
/// Cloning is cheap: FFT plans and wavenumber tables live behind a shared
/// cache that is built lazily the first time they are needed.
#[derive(Clone)]
pub struct Grid2D {
    n: usize,
    length: f64,
    cache: Arc<GridCache>,
}

struct GridCache {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    wavenumber_abs: OnceLock<Vec<f64>>,
}

impl Grid2D {
    pub const MIN_POINTS: usize = 32;

    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < Self::MIN_POINTS || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n = {n} must be a power of two >= {}",
                Self::MIN_POINTS
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("length {length} must be positive")));
        }
        let mut planner = FftPlanner::new();
        let cache = GridCache {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            wavenumber_abs: OnceLock::new(),
        };
        Ok(Self {
            n,
            length,
            cache: Arc::new(cache),
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn length(&self) -> f64 {
        self.length
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    #[inline]
    pub fn cell_area(&self) -> f64 {
        self.spacing() * self.spacing()
    }

    /// Fundamental wavenumber `2*pi/L`.
    #[inline]
    pub fn base_wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.length
    }

    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI * self.n as f64 / self.length
    }

    /// Signed integer frequency of FFT bin `i`; bin `n/2` maps to `-n/2`.
    #[inline]
    pub fn freq_index(&self, i: usize) -> i64 {
        let half = self.n / 2;
        if i < half {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    #[inline]
    pub fn is_nyquist(&self, i: usize) -> bool {
        i == self.n / 2
    }

    /// Physical wavenumber of bin `i`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> f64 {
        self.freq_index(i) as f64 * self.base_wavenumber()
    }

    /// `|xi|` for every spectral index, row-major (`ky` rows, `kx` columns).
    pub fn wavenumber_abs(&self) -> &[f64] {
        self.cache.wavenumber_abs.get_or_init(|| {
            let n = self.n;
            let mut out = vec![0.0; n * n];
            for iy in 0..n {
                let ky = self.wavenumber(iy);
                for ix in 0..n {
                    let kx = self.wavenumber(ix);
                    out[iy * n + ix] = (kx * kx + ky * ky).sqrt();
                }
            }
            out
        })
    }

    /// Largest `|xi|` present on the lattice (the corner mode).
    pub fn max_wavenumber(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.nyquist()
    }

    /// Physical coordinates of node `(ix, iy)`.
    #[inline]
    pub fn coord(&self, ix: usize, iy: usize) -> (f64, f64) {
        let h = self.spacing();
        (ix as f64 * h, iy as f64 * h)
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * self.length, 0.5 * self.length)
    }

    /// 2/3-rule mask predicate: keep `|k_x|, |k_y| < n/3`.
    #[inline]
    pub fn dealias_keep(&self, ix: usize, iy: usize) -> bool {
        let cut = self.n as i64 / 3;
        self.freq_index(ix).abs() <= cut && self.freq_index(iy).abs() <= cut
    }

    /// Unnormalised forward 2-D DFT, in place.
    pub fn fft_forward(&self, data: &mut [Complex64]) {
        self.fft2(data, &self.cache.forward);
    }

    /// Inverse 2-D DFT including the `1/n^2` normalisation.
    pub fn fft_inverse(&self, data: &mut [Complex64]) {
        self.fft2(data, &self.cache.inverse);
        let scale = 1.0 / (self.n * self.n) as f64;
        data.par_iter_mut().for_each(|c| *c *= scale);
    }

    fn fft2(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        assert_eq!(data.len(), n * n);
        let rows = |buf: &mut [Complex64]| {
            buf.par_chunks_mut(n * 16).for_each(|chunk| {
                let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
                plan.process_with_scratch(chunk, &mut scratch);
            });
        };
        rows(data);
        let mut t = vec![Complex64::default(); n * n];
        transpose_into(data, &mut t, n);
        rows(&mut t);
        transpose_into(&t, data, n);
    }

    pub(crate) fn same_as(&self, other: &Grid2D) -> bool {
        Arc::ptr_eq(&self.cache, &other.cache) || self == other
    }
}

fn transpose_into(data: &[Complex64], out: &mut [Complex64], n: usize) {
    out.par_chunks_mut(n).enumerate().for_each(|(row, dst)| {
        for (col, d) in dst.iter_mut().enumerate() {
            *d = data[col * n + row];
        }
    });
}

impl PartialEq for Grid2D {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.length.to_bits() == other.length.to_bits()
    }
}

impl fmt::Debug for Grid2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid2D")
            .field("n", &self.n)
            .field("length", &self.length)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid2D::new(16, 1.0).is_err());
        assert!(Grid2D::new(48, 1.0).is_err());
        assert!(Grid2D::new(64, -1.0).is_err());
        assert!(Grid2D::new(64, 1.0).is_ok());
    }

    #[test]
    fn frequency_layout() {
        let g = Grid2D::new(32, 2.0 * std::f64::consts::PI).unwrap();
        assert_eq!(g.freq_index(0), 0);
        assert_eq!(g.freq_index(15), 15);
        assert_eq!(g.freq_index(16), -16);
        assert_eq!(g.freq_index(31), -1);
        assert!((g.nyquist() - 16.0).abs() < 1e-12);
    }

    #[test]
    fn fft_roundtrip_and_delta() {
        let g = Grid2D::new(32, 1.0).unwrap();
        let mut data = vec![Complex64::default(); g.len()];
        data[0] = Complex64::new(1.0, 0.0);
        g.fft_forward(&mut data);
        assert!(data.iter().all(|c| (c.re - 1.0).abs() < 1e-14 && c.im.abs() < 1e-14));
        g.fft_inverse(&mut data);
        assert!((data[0].re - 1.0).abs() < 1e-14);
        assert!(data[1..].iter().all(|c| c.norm() < 1e-14));
    }
}

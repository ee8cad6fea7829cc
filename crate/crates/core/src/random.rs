//! Seeded random band-limited fields, used for probe families and property
//! checks.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::spectral::{Grid2D, ScalarField, VectorField2};

/// Gaussian random field whose spectrum is supported in `lo <= |xi| <= hi`
/// (physical wavenumbers), normalised to unit sup norm. The zero mode is
/// always excluded.
pub fn random_annulus(grid: &Grid2D, seed: u64, lo: f64, hi: f64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kabs = grid.wavenumber_abs();
    let n = grid.n();
    let mut spec = vec![Complex64::default(); grid.len()];
    for iy in 0..n {
        for ix in 0..n {
            let i = iy * n + ix;
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            let k = kabs[i];
            if k > 0.0 && k >= lo && k <= hi && !grid.is_nyquist(ix) && !grid.is_nyquist(iy) {
                spec[i] = Complex64::new(re, im);
            }
        }
    }
    let f = ScalarField::from_spectrum(grid, spec);
    let m = f.max_abs();
    if m > 0.0 {
        f.scale(1.0 / m)
    } else {
        f
    }
}

/// Random mean-free field with spectrum in `0 < |xi| <= kmax`.
pub fn random_band_limited(grid: &Grid2D, seed: u64, kmax: f64) -> ScalarField {
    random_annulus(grid, seed, 0.0, kmax)
}

pub fn random_vector(grid: &Grid2D, seed: u64, kmax: f64) -> VectorField2 {
    VectorField2::new(
        random_band_limited(grid, seed, kmax),
        random_band_limited(grid, seed.wrapping_add(0x9e37_79b9), kmax),
    )
    .expect("same grid")
}

/// Divergence-free random field `grad^perp psi` with `psi` band limited.
pub fn random_solenoidal(grid: &Grid2D, seed: u64, lo: f64, hi: f64) -> VectorField2 {
    let psi = random_annulus(grid, seed, lo, hi);
    let v = crate::spectral::perp_gradient(&psi);
    let m = v.max_abs();
    if m > 0.0 {
        v.scale(1.0 / m)
    } else {
        v
    }
}

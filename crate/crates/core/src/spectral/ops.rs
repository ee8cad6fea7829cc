//! Differential and projection operators applied as Fourier multipliers.
//!
//! Odd-order multipliers zero the Nyquist row and column; even-order ones keep
//! them. All operators are pure.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{Grid2D, ScalarField, VectorField2};
use crate::error::{Error, Result};

/// Mean magnitude accepted as "zero" relative to `max(1, |f|_inf)`.
pub const MEAN_TOLERANCE: f64 = 1e-12;

/// Applies `m(ix, iy)` to every spectral coefficient of `f`.
pub fn apply_multiplier(
    f: &ScalarField,
    m: impl Fn(usize, usize) -> Complex64 + Sync,
) -> ScalarField {
    let grid = f.grid();
    let n = grid.n();
    let spec = f.spectrum();
    let mut out = vec![Complex64::default(); grid.len()];
    out.par_chunks_mut(n).enumerate().for_each(|(iy, row)| {
        for (ix, o) in row.iter_mut().enumerate() {
            *o = spec[iy * n + ix] * m(ix, iy);
        }
    });
    ScalarField::from_spectrum(grid, out)
}

/// Spectral `i * xi_axis`, zero on the Nyquist row and column.
#[inline]
fn derivative_symbol(grid: &Grid2D, axis: usize, ix: usize, iy: usize) -> Complex64 {
    if grid.is_nyquist(ix) || grid.is_nyquist(iy) {
        return Complex64::default();
    }
    let k = if axis == 0 { grid.wavenumber(ix) } else { grid.wavenumber(iy) };
    Complex64::new(0.0, k)
}

/// `d f / d x_axis` (axis 0 is `x`, 1 is `y`).
pub fn partial(f: &ScalarField, axis: usize) -> ScalarField {
    let grid = f.grid().clone();
    apply_multiplier(f, |ix, iy| derivative_symbol(&grid, axis, ix, iy))
}

pub fn gradient(f: &ScalarField) -> VectorField2 {
    VectorField2::new(partial(f, 0), partial(f, 1)).expect("same grid")
}

/// `(-d_2 f, d_1 f)`.
pub fn perp_gradient(f: &ScalarField) -> VectorField2 {
    VectorField2::new(partial(f, 1).scale(-1.0), partial(f, 0)).expect("same grid")
}

pub fn divergence(v: &VectorField2) -> ScalarField {
    let grid = v.grid().clone();
    let n = grid.n();
    let sx = v.x().spectrum();
    let sy = v.y().spectrum();
    let mut out = vec![Complex64::default(); grid.len()];
    out.par_chunks_mut(n).enumerate().for_each(|(iy, row)| {
        for (ix, o) in row.iter_mut().enumerate() {
            let i = iy * n + ix;
            *o = sx[i] * derivative_symbol(&grid, 0, ix, iy)
                + sy[i] * derivative_symbol(&grid, 1, ix, iy);
        }
    });
    ScalarField::from_spectrum(&grid, out)
}

/// `d_1 v^2 - d_2 v^1`.
pub fn curl(v: &VectorField2) -> ScalarField {
    let grid = v.grid().clone();
    let n = grid.n();
    let sx = v.x().spectrum();
    let sy = v.y().spectrum();
    let mut out = vec![Complex64::default(); grid.len()];
    out.par_chunks_mut(n).enumerate().for_each(|(iy, row)| {
        for (ix, o) in row.iter_mut().enumerate() {
            let i = iy * n + ix;
            *o = sy[i] * derivative_symbol(&grid, 0, ix, iy)
                - sx[i] * derivative_symbol(&grid, 1, ix, iy);
        }
    });
    ScalarField::from_spectrum(&grid, out)
}

pub fn laplacian(f: &ScalarField) -> ScalarField {
    let k = f.grid().wavenumber_abs().to_vec();
    let n = f.grid().n();
    apply_multiplier(f, |ix, iy| {
        let a = k[iy * n + ix];
        Complex64::new(-a * a, 0.0)
    })
}

pub(crate) fn mean_is_zero(f: &ScalarField) -> std::result::Result<(), f64> {
    let mean = f.spectrum()[0].re / f.grid().len() as f64;
    if mean.abs() <= MEAN_TOLERANCE * f.max_abs().max(1.0) {
        Ok(())
    } else {
        Err(mean)
    }
}

/// `Delta^{-1} f` for mean-free `f`; the zero mode of the result is 0.
pub fn inverse_laplacian(f: &ScalarField) -> Result<ScalarField> {
    mean_is_zero(f).map_err(|mean| Error::NonzeroMean { mean })?;
    Ok(inverse_laplacian_unchecked(f))
}

/// Inverse Laplacian that silently discards the zero mode.
pub(crate) fn inverse_laplacian_unchecked(f: &ScalarField) -> ScalarField {
    let k = f.grid().wavenumber_abs().to_vec();
    let n = f.grid().n();
    apply_multiplier(f, |ix, iy| {
        let a = k[iy * n + ix];
        if a == 0.0 {
            Complex64::default()
        } else {
            Complex64::new(-1.0 / (a * a), 0.0)
        }
    })
}

/// Leray projector onto divergence-free fields: `v - grad Delta^{-1} div v`.
///
/// Built from the same odd-order symbols as [`divergence`] and [`gradient`],
/// so the output is divergence free to round-off and the Nyquist modes of the
/// curl-free part are left untouched.
pub fn leray_project(v: &VectorField2) -> VectorField2 {
    let grid = v.grid().clone();
    let n = grid.n();
    let kabs = grid.wavenumber_abs();
    let sx = v.x().spectrum();
    let sy = v.y().spectrum();
    let mut ox = vec![Complex64::default(); grid.len()];
    let mut oy = vec![Complex64::default(); grid.len()];
    ox.par_chunks_mut(n)
        .zip(oy.par_chunks_mut(n))
        .enumerate()
        .for_each(|(iy, (rx, ry))| {
            for ix in 0..n {
                let i = iy * n + ix;
                let dx = derivative_symbol(&grid, 0, ix, iy);
                let dy = derivative_symbol(&grid, 1, ix, iy);
                let div = dx * sx[i] + dy * sy[i];
                let a = kabs[i];
                let (gx, gy) = if a == 0.0 {
                    (Complex64::default(), Complex64::default())
                } else {
                    let q = -div / (a * a);
                    (dx * q, dy * q)
                };
                rx[ix] = sx[i] - gx;
                ry[ix] = sy[i] - gy;
            }
        });
    VectorField2::new(
        ScalarField::from_spectrum(&grid, ox),
        ScalarField::from_spectrum(&grid, oy),
    )
    .expect("same grid")
}

/// 2/3-rule truncation.
pub fn dealias(f: &ScalarField) -> ScalarField {
    let grid = f.grid().clone();
    apply_multiplier(f, |ix, iy| {
        if grid.dealias_keep(ix, iy) {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::default()
        }
    })
}

/// Pointwise product followed by 2/3-rule truncation.
pub fn dealiased_product(a: &ScalarField, b: &ScalarField) -> Result<ScalarField> {
    Ok(dealias(&a.mul(b)?))
}

/// `(a . grad) b` for vector `a` and scalar `b`, dealiased.
pub fn directional_derivative(a: &VectorField2, b: &ScalarField) -> Result<ScalarField> {
    let g = gradient(b);
    let p = a.dot(&g)?;
    Ok(dealias(&p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_band_limited, random_vector};
    use std::f64::consts::PI;

    const L: f64 = 4.0;

    fn grid(n: usize) -> Grid2D {
        Grid2D::new(n, L).unwrap()
    }

    fn max_diff(a: &ScalarField, b: &ScalarField) -> f64 {
        a.sub(b).unwrap().max_abs()
    }

    #[test]
    fn gradient_of_sine() {
        let g = grid(64);
        let k = 2.0 * PI / L;
        let f = ScalarField::from_fn(&g, |x, _| (k * x).sin());
        let grad = gradient(&f);
        let expect = ScalarField::from_fn(&g, |x, _| k * (k * x).cos());
        assert!(max_diff(grad.x(), &expect) < 1e-12);
        assert!(grad.y().max_abs() < 1e-12);

        let f = ScalarField::from_fn(&g, |x, y| (k * x).sin() * (k * y).sin());
        let expect = ScalarField::from_fn(&g, |x, y| k * (k * x).cos() * (k * y).sin());
        assert!(max_diff(gradient(&f).x(), &expect) < 1e-12);
    }

    #[test]
    fn gradient_of_constant_vanishes() {
        let g = grid(32);
        let grad = gradient(&ScalarField::constant(&g, 3.5));
        assert!(grad.max_abs() < 1e-14);
        assert!(perp_gradient(&ScalarField::constant(&g, 3.5)).max_abs() < 1e-14);
    }

    #[test]
    fn perp_gradient_of_periodized_ramp() {
        // f = y with the wrap seam smoothed by tanh layers of width w, so that
        // d_2 f = 1 - (L / 2w) [sech^2(y/w) + sech^2((y - L)/w)]
        let g = grid(256);
        let w = L / 32.0;
        let f = ScalarField::from_fn(&g, |_, y| {
            y - 0.5 * L * ((y / w).tanh() + ((y - L) / w).tanh())
        });
        let v = perp_gradient(&f);
        let n = g.n();
        let mut worst: f64 = 0.0;
        for iy in n / 4..=3 * n / 4 {
            for ix in 0..n {
                worst = worst.max((v.x().at(ix, iy) + 1.0).abs());
                assert!(v.y().at(ix, iy).abs() < 1e-12);
            }
        }
        assert!(worst < 1e-5, "{worst}");
    }

    #[test]
    fn perp_gradient_is_tangent_to_level_sets() {
        let g = grid(64);
        let c = L / 2.0;
        let f = ScalarField::from_fn(&g, |x, y| (-((x - c).powi(2) + (y - c).powi(2))).exp());
        let v = perp_gradient(&f);
        let dot = v.dot(&gradient(&f)).unwrap();
        assert!(dot.max_abs() < 1e-10);
    }

    #[test]
    fn laplacian_and_inverse() {
        let g = grid(64);
        let k = 2.0 * PI / L;
        let f = ScalarField::from_fn(&g, |x, _| (k * x).sin());
        let lap = laplacian(&f);
        assert!(max_diff(&lap, &f.scale(-k * k)) < 1e-11);

        let f = random_band_limited(&g, 7, 10.0).map(|v| v + 0.7);
        let back = inverse_laplacian(&laplacian(&f)).unwrap();
        assert!(max_diff(&back, &f.without_mean()) < 1e-10);
    }

    #[test]
    fn inverse_laplacian_rejects_mean() {
        let g = grid(32);
        let f = ScalarField::constant(&g, 1.0);
        assert!(matches!(inverse_laplacian(&f), Err(Error::NonzeroMean { .. })));
    }

    #[test]
    fn divergence_of_perp_gradient_vanishes() {
        let g = grid(64);
        let f = random_band_limited(&g, 3, 20.0);
        assert!(divergence(&perp_gradient(&f)).max_abs() < 1e-12);
    }

    #[test]
    fn leray_examples() {
        let g = grid(64);
        let f = random_band_limited(&g, 11, 12.0);
        assert!(leray_project(&gradient(&f)).max_abs() < 1e-12);
        let s = perp_gradient(&f);
        let ps = leray_project(&s);
        assert!(ps.sub(&s).unwrap().max_abs() < 1e-12);

        let v = random_vector(&g, 5, 25.0);
        let p1 = leray_project(&v);
        let p2 = leray_project(&p1);
        assert!(p2.sub(&p1).unwrap().max_abs() < 1e-12);
        assert!(divergence(&p1).max_abs() < 1e-12);
    }

    #[test]
    fn helmholtz_decomposition_is_exact() {
        let g = grid(64);
        let v = random_vector(&g, 9, 30.0);
        let q = inverse_laplacian(&divergence(&v)).unwrap();
        let recon = leray_project(&v).add(&gradient(&q)).unwrap();
        assert!(recon.sub(&v).unwrap().max_abs() <= 1e-11 * v.max_abs().max(1.0));
    }

    #[test]
    fn parseval() {
        let g = grid(64);
        let f = random_band_limited(&g, 2, 30.0);
        let phys: f64 = f.values().iter().map(|v| v * v).sum();
        let spec: f64 = f.spectrum().iter().map(|c| c.norm_sqr()).sum::<f64>() / g.len() as f64;
        assert!((phys - spec).abs() <= 1e-12 * phys);
    }

    #[test]
    fn operators_commute_with_cell_shifts() {
        let g = grid(64);
        let n = g.n();
        let f = random_band_limited(&g, 4, 20.0);
        let shift = |h: &ScalarField, sx: usize, sy: usize| {
            let mut out = vec![0.0; n * n];
            for iy in 0..n {
                for ix in 0..n {
                    out[((iy + sy) % n) * n + (ix + sx) % n] = h.at(ix, iy);
                }
            }
            ScalarField::new(&g, out).unwrap()
        };
        let a = shift(&laplacian(&f), 5, 17);
        let b = laplacian(&shift(&f, 5, 17));
        assert!(max_diff(&a, &b) < 1e-10);
        let a = shift(gradient(&f).y(), 3, 1);
        let b = gradient(&shift(&f, 3, 1));
        assert!(max_diff(&a, b.y()) < 1e-10);
    }

    #[test]
    fn dealias_removes_high_modes() {
        let g = grid(32);
        let k = 2.0 * PI / L;
        let low = ScalarField::from_fn(&g, |x, _| (3.0 * k * x).cos());
        let high = ScalarField::from_fn(&g, |x, y| (12.0 * k * x).cos() * (k * y).sin());
        assert!(max_diff(&dealias(&low), &low) < 1e-13);
        assert!(dealias(&high).max_abs() < 1e-13);
    }
}

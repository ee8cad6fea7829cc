use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;

use super::Grid2D;
use crate::error::{Error, Result};

/// Real samples on a periodic grid, row-major (`y` rows, `x` columns), with
/// a lazily computed and cached Fourier spectrum.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Grid2D,
    values: Vec<f64>,
    spectrum: OnceLock<Arc<[Complex64]>>,
}

impl ScalarField {
    pub fn new(grid: &Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self::from_values(grid, values))
    }

    pub(crate) fn from_values(grid: &Grid2D, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self {
            grid: grid.clone(),
            values,
            spectrum: OnceLock::new(),
        }
    }

    pub fn zeros(grid: &Grid2D) -> Self {
        Self::from_values(grid, vec![0.0; grid.len()])
    }

    pub fn constant(grid: &Grid2D, c: f64) -> Self {
        Self::from_values(grid, vec![c; grid.len()])
    }

    /// Samples `f(x, y)` at every node.
    pub fn from_fn(grid: &Grid2D, f: impl Fn(f64, f64) -> f64 + Sync) -> Self {
        let n = grid.n();
        let h = grid.spacing();
        let mut values = vec![0.0; grid.len()];
        values.par_chunks_mut(n).enumerate().for_each(|(iy, row)| {
            let y = iy as f64 * h;
            for (ix, v) in row.iter_mut().enumerate() {
                *v = f(ix as f64 * h, y);
            }
        });
        Self::from_values(grid, values)
    }

    /// Builds a real field from spectral coefficients. The cached spectrum is
    /// the Hermitian part of `spectrum`, which is exactly the transform of the
    /// real part of its inverse.
    pub fn from_spectrum(grid: &Grid2D, mut spectrum: Vec<Complex64>) -> Self {
        assert_eq!(spectrum.len(), grid.len());
        let n = grid.n();
        let mut herm = vec![Complex64::default(); grid.len()];
        herm.par_chunks_mut(n).enumerate().for_each(|(iy, row)| {
            let jy = (n - iy) % n;
            for (ix, h) in row.iter_mut().enumerate() {
                let jx = (n - ix) % n;
                *h = 0.5 * (spectrum[iy * n + ix] + spectrum[jy * n + jx].conj());
            }
        });
        grid.fft_inverse(&mut spectrum);
        let values = spectrum.into_par_iter().map(|c| c.re).collect();
        let field = Self::from_values(grid, values);
        let _ = field.spectrum.set(herm.into());
        field
    }

    #[inline]
    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Mutable access to the samples; drops the cached spectrum.
    pub fn values_mut(&mut self) -> &mut [f64] {
        self.spectrum = OnceLock::new();
        &mut self.values
    }

    #[inline]
    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.grid.n() + ix]
    }

    /// Unnormalised DFT of the samples.
    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum.get_or_init(|| {
            let mut data: Vec<Complex64> = self
                .values
                .par_iter()
                .map(|&v| Complex64::new(v, 0.0))
                .collect();
            self.grid.fft_forward(&mut data);
            data.into()
        })
    }

    /// Copy of the samples without the cached spectrum, so later transforms
    /// depend on the values alone.
    pub fn uncached(&self) -> Self {
        Self::from_values(&self.grid, self.values.clone())
    }

    pub fn has_cached_spectrum(&self) -> bool {
        self.spectrum.get().is_some()
    }

    pub fn check_same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64 + Sync + Send) -> Self {
        Self::from_values(&self.grid, self.values.par_iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(
        &self,
        other: &ScalarField,
        f: impl Fn(f64, f64) -> f64 + Sync + Send,
    ) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .par_iter()
            .zip(other.values.par_iter())
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self::from_values(&self.grid, values))
    }

    pub fn add(&self, other: &ScalarField) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    /// Pointwise product without dealiasing; see [`crate::spectral::dealias`].
    pub fn mul(&self, other: &ScalarField) -> Result<Self> {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn add_in_place(&mut self, other: &ScalarField) -> Result<()> {
        self.check_same_grid(other)?;
        self.values_mut()
            .par_iter_mut()
            .zip(other.values.par_iter())
            .for_each(|(a, &b)| *a += b);
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        ordered_sum(&self.values, |v| v) / self.values.len() as f64
    }

    /// The field minus its mean.
    pub fn without_mean(&self) -> Self {
        let m = self.mean();
        self.map(|v| v - m)
    }

    pub fn max(&self) -> f64 {
        self.values.par_iter().cloned().reduce(|| f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.par_iter().cloned().reduce(|| f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.par_iter().map(|v| v.abs()).reduce(|| 0.0, f64::max)
    }

    /// Integral over the torus (trapezoid rule, exact for trigonometric polynomials).
    pub fn integral(&self) -> f64 {
        ordered_sum(&self.values, |v| v) * self.grid.cell_area()
    }

    /// `L^p` norm with `p` in `[1, inf]`, by grid quadrature.
    pub fn lp_norm(&self, p: f64) -> f64 {
        lp_norm(&self.values, self.grid.cell_area(), p)
    }

    pub fn l2_norm(&self) -> f64 {
        self.lp_norm(2.0)
    }
}

/// `sum f(v)` with a fixed summation order, so results do not depend on the
/// number of worker threads.
pub(crate) fn ordered_sum(values: &[f64], f: impl Fn(f64) -> f64 + Sync) -> f64 {
    const CHUNK: usize = 4096;
    let partial: Vec<f64> = values
        .par_chunks(CHUNK)
        .map(|c| c.iter().map(|&v| f(v)).sum::<f64>())
        .collect();
    partial.iter().sum()
}

pub(crate) fn lp_norm(values: &[f64], cell_area: f64, p: f64) -> f64 {
    if p.is_infinite() {
        return values.par_iter().map(|v| v.abs()).reduce(|| 0.0, f64::max);
    }
    if p == 1.0 {
        return ordered_sum(values, f64::abs) * cell_area;
    }
    if p == 2.0 {
        return (ordered_sum(values, |v| v * v) * cell_area).sqrt();
    }
    // scale by the sup norm to keep |v|^p in range
    let m = values.par_iter().map(|v| v.abs()).reduce(|| 0.0, f64::max);
    if m == 0.0 {
        return 0.0;
    }
    let s = ordered_sum(values, |v| (v.abs() / m).powf(p));
    m * (s * cell_area).powf(1.0 / p)
}

/// Two scalar components `(u^1, u^2)` on one grid.
#[derive(Clone, Debug)]
pub struct VectorField2 {
    components: [ScalarField; 2],
}

impl VectorField2 {
    pub fn new(x: ScalarField, y: ScalarField) -> Result<Self> {
        x.check_same_grid(&y)?;
        Ok(Self { components: [x, y] })
    }

    pub fn zeros(grid: &Grid2D) -> Self {
        Self {
            components: [ScalarField::zeros(grid), ScalarField::zeros(grid)],
        }
    }

    pub fn from_fn(grid: &Grid2D, f: impl Fn(f64, f64) -> [f64; 2] + Sync) -> Self {
        Self {
            components: [
                ScalarField::from_fn(grid, |x, y| f(x, y)[0]),
                ScalarField::from_fn(grid, |x, y| f(x, y)[1]),
            ],
        }
    }

    #[inline]
    pub fn grid(&self) -> &Grid2D {
        self.components[0].grid()
    }

    #[inline]
    pub fn x(&self) -> &ScalarField {
        &self.components[0]
    }

    #[inline]
    pub fn y(&self) -> &ScalarField {
        &self.components[1]
    }

    #[inline]
    pub fn component(&self, k: usize) -> &ScalarField {
        &self.components[k]
    }

    pub fn components(&self) -> &[ScalarField; 2] {
        &self.components
    }

    pub fn into_components(self) -> [ScalarField; 2] {
        self.components
    }

    pub fn uncached(&self) -> Self {
        self.map_components(ScalarField::uncached)
    }

    pub fn map_components(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        Self {
            components: [f(&self.components[0]), f(&self.components[1])],
        }
    }

    pub fn try_map_components(
        &self,
        f: impl Fn(&ScalarField) -> Result<ScalarField>,
    ) -> Result<Self> {
        Ok(Self {
            components: [f(&self.components[0])?, f(&self.components[1])?],
        })
    }

    pub fn add(&self, other: &VectorField2) -> Result<Self> {
        Self::new(
            self.components[0].add(&other.components[0])?,
            self.components[1].add(&other.components[1])?,
        )
    }

    pub fn sub(&self, other: &VectorField2) -> Result<Self> {
        Self::new(
            self.components[0].sub(&other.components[0])?,
            self.components[1].sub(&other.components[1])?,
        )
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map_components(|f| f.scale(c))
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField {
        self.components[0]
            .zip_map(&self.components[1], |a, b| a.hypot(b))
            .expect("components share a grid")
    }

    /// Pointwise dot product.
    pub fn dot(&self, other: &VectorField2) -> Result<ScalarField> {
        let a = self.components[0].mul(&other.components[0])?;
        let b = self.components[1].mul(&other.components[1])?;
        a.add(&b)
    }

    pub fn max_abs(&self) -> f64 {
        self.magnitude().max_abs()
    }

    /// `sqrt(int |v|^2)`.
    pub fn l2_norm(&self) -> f64 {
        self.components[0].l2_norm().hypot(self.components[1].l2_norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> Grid2D {
        Grid2D::new(32, 2.0 * PI).unwrap()
    }

    #[test]
    fn spectrum_roundtrip_and_hermitian() {
        let g = grid();
        let f = ScalarField::from_fn(&g, |x, y| (x + 0.3).sin() * (2.0 * y).cos() + 0.1 * (3.0 * x - y).cos());
        let spec = f.spectrum().to_vec();
        let n = g.n();
        for iy in 0..n {
            for ix in 0..n {
                let a = spec[iy * n + ix];
                let b = spec[((n - iy) % n) * n + (n - ix) % n].conj();
                assert!((a - b).norm() < 1e-10);
            }
        }
        let back = ScalarField::from_spectrum(&g, spec);
        let err = back.sub(&f).unwrap().max_abs();
        assert!(err <= 1e-12 * f.max_abs(), "{err}");
    }

    #[test]
    fn mutation_invalidates_spectrum() {
        let g = grid();
        let mut f = ScalarField::constant(&g, 1.0);
        assert!((f.spectrum()[0].re - (g.len() as f64)).abs() < 1e-9);
        f.values_mut()[0] = 2.0;
        assert!(!f.has_cached_spectrum());
        assert!((f.spectrum()[0].re - (g.len() as f64 + 1.0)).abs() < 1e-9);
    }

    #[test]
    fn lp_norms_of_constant() {
        let g = grid();
        let f = ScalarField::constant(&g, -2.0);
        let area = (2.0 * PI) * (2.0 * PI);
        assert!((f.lp_norm(1.0) - 2.0 * area).abs() < 1e-10);
        assert!((f.lp_norm(3.0) - 2.0 * area.powf(1.0 / 3.0)).abs() < 1e-10);
        assert_eq!(f.lp_norm(f64::INFINITY), 2.0);
    }

    #[test]
    fn mismatched_grids_rejected() {
        let a = ScalarField::zeros(&grid());
        let b = ScalarField::zeros(&Grid2D::new(64, 2.0 * PI).unwrap());
        assert!(matches!(a.add(&b), Err(Error::GridMismatch)));
        assert!(VectorField2::new(a, b).is_err());
    }
}

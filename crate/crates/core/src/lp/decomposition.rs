use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;

use super::CutoffProfiles;
use crate::error::{Error, Result};
use crate::spectral::{Grid2D, ScalarField};

/// Frequency weights of one Fourier multiplier, stored only where nonzero.
#[derive(Debug, Clone)]
pub(crate) struct SparseMask {
    pub(crate) entries: Vec<(usize, f64)>,
}

impl SparseMask {
    fn build(grid: &Grid2D, weight: impl Fn(f64) -> f64) -> Self {
        let entries = grid
            .wavenumber_abs()
            .iter()
            .enumerate()
            .filter_map(|(i, &k)| {
                let w = weight(k);
                (w != 0.0).then_some((i, w))
            })
            .collect();
        Self { entries }
    }

    pub(crate) fn apply(&self, grid: &Grid2D, spec: &[Complex64]) -> ScalarField {
        let mut out = vec![Complex64::default(); grid.len()];
        for &(i, w) in &self.entries {
            out[i] = spec[i] * w;
        }
        ScalarField::from_spectrum(grid, out)
    }
}

/// Dyadic masks for one grid, shared by every decomposition on that grid.
#[derive(Debug)]
pub(crate) struct DyadicMasks {
    pub(crate) j_min: i32,
    pub(crate) j_max: i32,
    /// `phi(2^-j D)` for `j_min..=j_max`.
    pub(crate) homogeneous: Vec<SparseMask>,
    /// `chi(2^-j_min D)`: on this grid only the zero mode.
    pub(crate) low: SparseMask,
    /// `chi(D)` followed by `phi(2^-j D)` for `j = 0..=j_max`.
    pub(crate) inhomogeneous: Vec<SparseMask>,
}

/// Lowest homogeneous index: the largest `j` with `4/3 * 2^j <= 2 pi / L`, so
/// that `chi(2^-j D)` keeps nothing but the mean.
pub fn lowest_shell(grid: &Grid2D) -> i32 {
    let k0 = grid.base_wavenumber();
    let mut j = (0.75 * k0).log2().floor() as i32;
    while CutoffProfiles::CHI_SUPPORT * (j as f64).exp2() > k0 {
        j -= 1;
    }
    while CutoffProfiles::CHI_SUPPORT * ((j + 1) as f64).exp2() <= k0 {
        j += 1;
    }
    j
}

/// Highest index: the smallest `j` with `2^(j+1) >= max |xi|`, so every lattice
/// frequency is covered.
pub fn highest_shell(grid: &Grid2D) -> i32 {
    let kmax = grid.max_wavenumber();
    let mut j = kmax.log2().ceil() as i32 - 1;
    while ((j + 1) as f64).exp2() < kmax {
        j += 1;
    }
    while (j as f64).exp2() >= kmax {
        j -= 1;
    }
    j
}

pub(crate) fn masks(grid: &Grid2D) -> Arc<DyadicMasks> {
    type Cache = Mutex<HashMap<(usize, u64), Arc<DyadicMasks>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let key = (grid.n(), grid.length().to_bits());
    let cache = CACHE.get_or_init(Default::default);
    if let Some(m) = cache.lock().unwrap().get(&key) {
        return m.clone();
    }
    let p = CutoffProfiles;
    let j_min = lowest_shell(grid);
    let j_max = highest_shell(grid);
    let homogeneous = (j_min..=j_max)
        .into_par_iter()
        .map(|j| SparseMask::build(grid, |k| p.phi_j(j, k)))
        .collect();
    let low = SparseMask::build(grid, |k| p.chi_j(j_min, k));
    let mut inhomogeneous = vec![SparseMask::build(grid, |k| p.chi(k))];
    inhomogeneous.extend(
        (0..=j_max.max(0))
            .into_par_iter()
            .map(|j| SparseMask::build(grid, |k| p.phi_j(j, k)))
            .collect::<Vec<_>>(),
    );
    let m = Arc::new(DyadicMasks {
        j_min,
        j_max,
        homogeneous,
        low,
        inhomogeneous,
    });
    cache.lock().unwrap().insert(key, m.clone());
    m
}

/// Largest deviation from 1 of the summed block weights over every lattice
/// frequency, for both the homogeneous family (with the low part) and the
/// inhomogeneous one.
pub fn partition_residual(grid: &Grid2D) -> f64 {
    let m = masks(grid);
    let deviation = |family: &mut dyn Iterator<Item = &SparseMask>| {
        let mut sum = vec![0.0; grid.len()];
        for mask in family {
            for &(i, w) in &mask.entries {
                sum[i] += w;
            }
        }
        sum.iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max)
    };
    let homogeneous = deviation(&mut m.homogeneous.iter().chain(std::iter::once(&m.low)));
    homogeneous.max(deviation(&mut m.inhomogeneous.iter()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecompositionKind {
    /// Blocks `Delta_j = phi(2^-j D)` for `j_min..=j_max` plus `S_{j_min}`.
    Homogeneous,
    /// `Delta_{-1} = chi(D)` then `Delta_j` for `j = 0..=j_max`; `low_part` is 0.
    Inhomogeneous,
}

/// The blocks `Delta_j f` of a field over the resolvable dyadic range.
#[derive(Debug, Clone)]
pub struct DyadicDecomposition {
    kind: DecompositionKind,
    j_min: i32,
    j_max: i32,
    blocks: Vec<ScalarField>,
    low_part: ScalarField,
}

impl DyadicDecomposition {
    pub const MIN_SHELLS: usize = 4;

    /// Homogeneous decomposition `f = S_{j_min} f + sum_j Delta_j f`.
    pub fn new(f: &ScalarField) -> Result<Self> {
        let grid = f.grid();
        let m = masks(grid);
        let shells = (m.j_max - m.j_min + 1).max(0) as usize;
        if shells < Self::MIN_SHELLS {
            return Err(Error::InsufficientResolution { shells });
        }
        let spec = f.spectrum();
        let blocks = m
            .homogeneous
            .par_iter()
            .map(|mask| mask.apply(grid, spec))
            .collect();
        Ok(Self {
            kind: DecompositionKind::Homogeneous,
            j_min: m.j_min,
            j_max: m.j_max,
            blocks,
            low_part: m.low.apply(grid, spec),
        })
    }

    /// Inhomogeneous decomposition starting at `Delta_{-1} = chi(D)`.
    pub fn inhomogeneous(f: &ScalarField) -> Result<Self> {
        let grid = f.grid();
        let m = masks(grid);
        let shells = m.inhomogeneous.len();
        if shells < Self::MIN_SHELLS {
            return Err(Error::InsufficientResolution { shells });
        }
        let spec = f.spectrum();
        let blocks = m
            .inhomogeneous
            .par_iter()
            .map(|mask| mask.apply(grid, spec))
            .collect();
        Ok(Self {
            kind: DecompositionKind::Inhomogeneous,
            j_min: -1,
            j_max: m.j_max.max(0),
            blocks,
            low_part: ScalarField::zeros(grid),
        })
    }

    pub fn kind(&self) -> DecompositionKind {
        self.kind
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn j_range(&self) -> std::ops::RangeInclusive<i32> {
        self.j_min..=self.j_max
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn grid(&self) -> &Grid2D {
        self.low_part.grid()
    }

    /// `Delta_j f`, or `None` outside the resolvable range.
    pub fn block(&self, j: i32) -> Option<&ScalarField> {
        if j < self.j_min || j > self.j_max {
            None
        } else {
            self.blocks.get((j - self.j_min) as usize)
        }
    }

    pub fn blocks(&self) -> impl Iterator<Item = (i32, &ScalarField)> {
        (self.j_min..).zip(self.blocks.iter())
    }

    pub fn low_part(&self) -> &ScalarField {
        &self.low_part
    }

    /// `S_m f = S_{j_min} f + sum_{j_min <= j < m} Delta_j f` (homogeneous).
    ///
    /// Below `j_min` this is the low part alone; the blocks there vanish on
    /// the lattice.
    pub fn low_frequency(&self, m: i32) -> ScalarField {
        let mut out = self.low_part.clone();
        for (j, b) in self.blocks() {
            if j >= m {
                break;
            }
            out.add_in_place(b).expect("same grid");
        }
        out
    }

    /// `sum_{|k - j| <= width} Delta_k f`.
    pub fn band_around(&self, j: i32, width: i32) -> ScalarField {
        let mut out = ScalarField::zeros(self.grid());
        for (k, b) in self.blocks() {
            if (k - j).abs() <= width {
                out.add_in_place(b).expect("same grid");
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ScalarField {
        self.low_frequency(self.j_max + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_band_limited;
    use std::f64::consts::PI;

    #[test]
    fn shell_range() {
        let g = Grid2D::new(256, 2.0 * PI).unwrap();
        assert_eq!(lowest_shell(&g), -1);
        assert_eq!(highest_shell(&g), 7);
        let g = Grid2D::new(256, 8.0).unwrap();
        let k0 = g.base_wavenumber();
        let j = lowest_shell(&g);
        assert!(CutoffProfiles::CHI_SUPPORT * (j as f64).exp2() <= k0);
        assert!(CutoffProfiles::CHI_SUPPORT * ((j + 1) as f64).exp2() > k0);
        let jm = highest_shell(&g);
        assert!(((jm + 1) as f64).exp2() >= g.max_wavenumber());
        assert!((jm as f64).exp2() < g.max_wavenumber());
    }

    #[test]
    fn partition_of_unity_on_lattice() {
        for (n, l) in [(32, 2.0 * PI), (128, 8.0), (256, 1.0)] {
            let g = Grid2D::new(n, l).unwrap();
            let m = masks(&g);
            let mut sum = vec![0.0; g.len()];
            for mask in m.homogeneous.iter().chain(std::iter::once(&m.low)) {
                for &(i, w) in &mask.entries {
                    sum[i] += w;
                }
            }
            assert!(sum.iter().all(|s| (s - 1.0).abs() < 1e-10));
            let mut sum = vec![0.0; g.len()];
            for mask in &m.inhomogeneous {
                for &(i, w) in &mask.entries {
                    sum[i] += w;
                }
            }
            assert!(sum.iter().all(|s| (s - 1.0).abs() < 1e-10));
            assert_eq!(m.low.entries.len(), 1, "low part keeps only the mean");
        }
    }

    #[test]
    fn single_mode_lands_in_expected_blocks() {
        let g = Grid2D::new(256, 2.0 * PI).unwrap();
        for k in 2..=6 {
            let freq = (1u32 << k) as f64;
            let f = ScalarField::from_fn(&g, |x, _| (freq * x).cos());
            let d = DyadicDecomposition::new(&f).unwrap();
            for (j, b) in d.blocks() {
                if !(k - 2..=k + 1).contains(&j) {
                    assert!(b.max_abs() < 1e-13, "block {j} for mode 2^{k}");
                }
            }
            let total: f64 = d.blocks().map(|(_, b)| b.max_abs()).sum();
            assert!(total > 0.99);
        }
    }

    #[test]
    fn constant_goes_to_low_part() {
        let g = Grid2D::new(64, 2.0 * PI).unwrap();
        let d = DyadicDecomposition::new(&ScalarField::constant(&g, 2.5)).unwrap();
        assert!(d.blocks().all(|(_, b)| b.max_abs() < 1e-14));
        assert!((d.low_part().mean() - 2.5).abs() < 1e-14);
    }

    #[test]
    fn reconstruction_and_quasi_orthogonality() {
        let g = Grid2D::new(128, 5.0).unwrap();
        let f = random_band_limited(&g, 21, 60.0).map(|v| v + 0.3);
        let d = DyadicDecomposition::new(&f).unwrap();
        assert_eq!(d.len() as i32, d.j_max() - d.j_min() + 1);
        let err = d.reconstruct().sub(&f).unwrap().max_abs();
        assert!(err <= 1e-10 * f.max_abs());
        let inh = DyadicDecomposition::inhomogeneous(&f).unwrap();
        let err = inh.reconstruct().sub(&f).unwrap().max_abs();
        assert!(err <= 1e-10 * f.max_abs());

        // Delta_j Delta_k = 0 for |j - k| >= 2
        let m = masks(&g);
        for (a, ma) in m.homogeneous.iter().enumerate() {
            for mb in m.homogeneous.iter().skip(a + 2) {
                let sa: std::collections::HashSet<usize> = ma.entries.iter().map(|e| e.0).collect();
                assert!(mb.entries.iter().all(|e| !sa.contains(&e.0)));
            }
        }
    }

    #[test]
    fn block_support_is_annulus() {
        let g = Grid2D::new(128, 2.0 * PI).unwrap();
        let f = random_band_limited(&g, 5, 200.0);
        let d = DyadicDecomposition::new(&f).unwrap();
        let kabs = g.wavenumber_abs();
        for (j, b) in d.blocks() {
            let lo = 0.75 * (j as f64).exp2();
            let hi = 8.0 / 3.0 * (j as f64).exp2();
            for (c, &k) in b.spectrum().iter().zip(kabs) {
                if k < lo || k > hi {
                    assert_eq!(c.norm(), 0.0);
                }
            }
        }
    }
}

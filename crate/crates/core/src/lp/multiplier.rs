//! Probe-based lower bounds for multiplier norms `||phi||_{M(E -> F)}`.
//!
//! The exact norm is a supremum over all of `E`. Here it is replaced by a
//! maximum over a finite probe family, which can only underestimate it.

use super::norms::{besov_norm, BesovIndex};
use crate::error::{Error, Result};
use crate::random::random_annulus;
use crate::spectral::{Grid2D, ScalarField};

/// `max_probe ||phi * probe||_dst / ||probe||_src`.
///
/// Probes whose source norm vanishes (or cannot be evaluated, for example a
/// nonzero mean with `src.s <= 0`) are skipped. For homogeneous targets with
/// `dst.s <= 0` the mean of the product is removed first, since a pointwise
/// product of mean-free fields need not be mean free and the mean carries no
/// homogeneous norm.
pub fn multiplier_norm_probe(
    phi: &ScalarField,
    src: &BesovIndex,
    dst: &BesovIndex,
    probes: &[ScalarField],
) -> Result<f64> {
    src.validate()?;
    dst.validate()?;
    let mut best: Option<f64> = None;
    for probe in probes {
        phi.check_same_grid(probe)?;
        let denom = match besov_norm(probe, src) {
            Ok(v) if v > 0.0 && v.is_finite() => v,
            Ok(_) | Err(Error::NotHomogeneous { .. }) => continue,
            Err(e) => return Err(e),
        };
        let mut prod = phi.mul(probe)?;
        if dst.homogeneous && dst.s <= 0.0 {
            prod = prod.without_mean();
        }
        let ratio = besov_norm(&prod, dst)? / denom;
        best = Some(best.map_or(ratio, |b: f64| b.max(ratio)));
    }
    best.ok_or(Error::NoValidProbes)
}

/// Seeded probe family: `per_shell` Gaussian random fields in every dyadic
/// annulus `[2^j, 2^{j+1}]` up to the dealiasing cutoff, plus mean-free
/// Gaussian bumps of several widths at each of `centers`.
pub fn standard_probes(
    grid: &Grid2D,
    seed: u64,
    per_shell: usize,
    centers: &[(f64, f64)],
) -> Vec<ScalarField> {
    let k0 = grid.base_wavenumber();
    let kcut = grid.nyquist() * 2.0 / 3.0;
    let mut probes = Vec::new();
    let mut lo = k0;
    let mut shell = 0u64;
    while lo < kcut {
        let hi = (2.0 * lo).min(kcut);
        for i in 0..per_shell as u64 {
            probes.push(random_annulus(grid, seed ^ (shell << 32) ^ i, lo, hi));
        }
        lo *= 2.0;
        shell += 1;
    }
    let h = grid.spacing();
    let length = grid.length();
    for &(cx, cy) in centers {
        for width in [2.0 * h, 4.0 * h, 8.0 * h, 16.0 * h] {
            let bump = ScalarField::from_fn(grid, |x, y| {
                let dx = wrap(x - cx, length);
                let dy = wrap(y - cy, length);
                (-(dx * dx + dy * dy) / (2.0 * width * width)).exp()
            });
            probes.push(bump.without_mean());
        }
    }
    probes
}

/// Signed periodic difference in `[-L/2, L/2)`.
pub(crate) fn wrap(d: f64, length: f64) -> f64 {
    d - length * (d / length + 0.5).floor()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_zero_multipliers() {
        let g = Grid2D::new(64, 8.0).unwrap();
        let probes = standard_probes(&g, 7, 2, &[(4.0, 4.0)]);
        let idx = BesovIndex::homogeneous(-1.0 / 3.0, 3.0, 1.0);
        let one = ScalarField::constant(&g, 1.0);
        let v = multiplier_norm_probe(&one, &idx, &idx, &probes).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let zero = ScalarField::zeros(&g);
        assert_eq!(multiplier_norm_probe(&zero, &idx, &idx, &probes).unwrap(), 0.0);
    }

    #[test]
    fn all_probes_skipped() {
        let g = Grid2D::new(64, 8.0).unwrap();
        let idx = BesovIndex::homogeneous(-1.0 / 3.0, 3.0, 1.0);
        let probes = vec![ScalarField::zeros(&g), ScalarField::constant(&g, 2.0)];
        assert!(matches!(
            multiplier_norm_probe(&ScalarField::constant(&g, 1.0), &idx, &idx, &probes),
            Err(Error::NoValidProbes)
        ));
    }

    #[test]
    fn wrap_is_periodic() {
        assert!((wrap(7.5, 8.0) + 0.5).abs() < 1e-15);
        assert!((wrap(-7.5, 8.0) - 0.5).abs() < 1e-15);
        assert_eq!(wrap(0.0, 8.0), 0.0);
    }
}

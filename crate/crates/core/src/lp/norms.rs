use serde::{Deserialize, Serialize};

use super::{DecompositionKind, DyadicDecomposition};
use crate::error::{Error, Result};
use crate::spectral::{lp_norm, mean_is_zero, ScalarField, VectorField2};

/// Besov index `(s, p, r)`; `p` and `r` may be `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovIndex {
    pub s: f64,
    pub p: f64,
    pub r: f64,
    pub homogeneous: bool,
}

impl BesovIndex {
    pub fn homogeneous(s: f64, p: f64, r: f64) -> Self {
        Self {
            s,
            p,
            r,
            homogeneous: true,
        }
    }

    pub fn inhomogeneous(s: f64, p: f64, r: f64) -> Self {
        Self {
            s,
            p,
            r,
            homogeneous: false,
        }
    }

    /// `C^s = B^s_{inf,inf}` (homogeneous).
    pub fn holder(s: f64) -> Self {
        Self::homogeneous(s, f64::INFINITY, f64::INFINITY)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.s.is_finite() {
            return Err(Error::InvalidIndex(format!("s = {} must be finite", self.s)));
        }
        for (name, v) in [("p", self.p), ("r", self.r)] {
            if v.is_nan() || v < 1.0 {
                return Err(Error::InvalidIndex(format!("{name} = {v} must lie in [1, inf]")));
            }
        }
        Ok(())
    }
}

/// `(sum a_j^r)^(1/r)`, or `max a_j` for `r = inf`.
pub(crate) fn ell_r(values: impl Iterator<Item = f64>, r: f64) -> f64 {
    if r.is_infinite() {
        values.fold(0.0, f64::max)
    } else if r == 1.0 {
        values.sum()
    } else {
        values.map(|a| a.powf(r)).sum::<f64>().powf(1.0 / r)
    }
}

/// `(j, ||Delta_j f||_{L^p})` for every block.
pub fn block_lp_norms(d: &DyadicDecomposition, p: f64) -> Vec<(i32, f64)> {
    let area = d.grid().cell_area();
    d.blocks().map(|(j, b)| (j, lp_norm(b.values(), area, p))).collect()
}

/// `|| 2^{js} ||Delta_j f||_{L^p} ||_{l^r}` over the blocks of `d`.
///
/// The decomposition kind must match `idx.homogeneous`; the low part is not
/// part of the norm in either case.
pub fn besov_norm_of(d: &DyadicDecomposition, idx: &BesovIndex) -> Result<f64> {
    idx.validate()?;
    let want = if idx.homogeneous {
        DecompositionKind::Homogeneous
    } else {
        DecompositionKind::Inhomogeneous
    };
    if d.kind() != want {
        return Err(Error::InvalidIndex(
            "decomposition kind does not match the index".into(),
        ));
    }
    let weighted = block_lp_norms(d, idx.p)
        .into_iter()
        .map(|(j, a)| (idx.s * j as f64).exp2() * a);
    Ok(ell_r(weighted, idx.r))
}

/// Discrete Besov norm of `f`.
///
/// Homogeneous norms with `s <= 0` require a mean-free field: the torus
/// stand-in for `S'_h`.
pub fn besov_norm(f: &ScalarField, idx: &BesovIndex) -> Result<f64> {
    idx.validate()?;
    if idx.homogeneous {
        if idx.s <= 0.0 {
            mean_is_zero(f).map_err(|mean| Error::NotHomogeneous { s: idx.s, mean })?;
        }
        besov_norm_of(&DyadicDecomposition::new(f)?, idx)
    } else {
        besov_norm_of(&DyadicDecomposition::inhomogeneous(f)?, idx)
    }
}

/// Largest component norm of a vector field.
pub fn besov_norm_vector(v: &VectorField2, idx: &BesovIndex) -> Result<f64> {
    Ok(besov_norm(v.x(), idx)?.max(besov_norm(v.y(), idx)?))
}

/// `max(||f||_inf, sup_{j >= 0} 2^{j eps} ||Delta_j f||_inf)`, the
/// `B^eps_{inf,inf}` realisation of the Holder norm `C^{0,eps}`.
pub fn holder_norm(f: &ScalarField, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidIndex(format!("eps = {eps} must lie in ]0,1[")));
    }
    let d = DyadicDecomposition::inhomogeneous(f)?;
    let sup = d
        .blocks()
        .filter(|(j, _)| *j >= 0)
        .map(|(j, b)| (eps * j as f64).exp2() * b.max_abs())
        .fold(0.0, f64::max);
    Ok(sup.max(f.max_abs()))
}

pub fn holder_norm_vector(v: &VectorField2, eps: f64) -> Result<f64> {
    Ok(holder_norm(v.x(), eps)?.max(holder_norm(v.y(), eps)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::CutoffProfiles;
    use crate::random::random_band_limited;
    use crate::spectral::Grid2D;
    use std::f64::consts::PI;

    #[test]
    fn single_mode_besov_value() {
        // cos(2^k x): Delta_j f = phi(2^{k-j}) f and sup|f| = 1 on the grid, so
        // the B^s_{inf,inf} norm is max_j 2^{js} phi(2^{k-j})
        let g = Grid2D::new(256, 2.0 * PI).unwrap();
        let p = CutoffProfiles;
        for k in 2..=6 {
            let f = ScalarField::from_fn(&g, |x, _| ((1u32 << k) as f64 * x).cos());
            for s in [-0.5, 0.25, 1.0] {
                let v = besov_norm(&f, &BesovIndex::holder(s)).unwrap();
                let expect = (k - 3..=k + 2)
                    .map(|j| (s * j as f64).exp2() * p.phi(((k - j) as f64).exp2()))
                    .fold(0.0, f64::max);
                assert!((v - expect).abs() < 1e-10 * expect, "k={k} s={s}: {v} vs {expect}");
            }
        }
    }

    #[test]
    fn zero_and_constant() {
        let g = Grid2D::new(64, 2.0 * PI).unwrap();
        let z = ScalarField::zeros(&g);
        assert_eq!(besov_norm(&z, &BesovIndex::homogeneous(-0.3, 3.0, 1.0)).unwrap(), 0.0);
        let c = ScalarField::constant(&g, -1.5);
        assert!((holder_norm(&c, 0.5).unwrap() - 1.5).abs() < 1e-12);
        assert!(matches!(
            besov_norm(&c, &BesovIndex::homogeneous(-0.3, 3.0, 1.0)),
            Err(Error::NotHomogeneous { .. })
        ));
        assert!(besov_norm(&c, &BesovIndex::homogeneous(0.3, 3.0, 1.0)).unwrap() < 1e-12);
    }

    #[test]
    fn rejects_bad_index() {
        let g = Grid2D::new(32, 1.0).unwrap();
        let z = ScalarField::zeros(&g);
        assert!(besov_norm(&z, &BesovIndex::homogeneous(0.0, 0.5, 1.0)).is_err());
        assert!(holder_norm(&z, 1.0).is_err());
    }

    #[test]
    fn r_monotonicity() {
        let g = Grid2D::new(128, 6.0).unwrap();
        for seed in 0..5 {
            let f = random_band_limited(&g, seed, 80.0);
            for (s, p) in [(-1.0 / 3.0, 3.0), (0.5, 2.0), (0.0, f64::INFINITY)] {
                let r1 = besov_norm(&f, &BesovIndex::homogeneous(s, p, 1.0)).unwrap();
                let r2 = besov_norm(&f, &BesovIndex::homogeneous(s, p, 2.0)).unwrap();
                let ri = besov_norm(&f, &BesovIndex::homogeneous(s, p, f64::INFINITY)).unwrap();
                assert!(r1 >= r2 && r2 >= ri);
            }
        }
    }
}

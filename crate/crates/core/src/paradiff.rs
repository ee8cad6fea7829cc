//! Bony paraproducts, remainders and the para-vector field `T_X = T_{X^k} d_k`.
//!
//! With homogeneous blocks over the resolvable range and the low part equal
//! to the mean, every product splits exactly as
//!
//! ```text
//! uv = T_u v + T_v u + R(u, v) + mean(u) mean(v)
//! ```
//!
//! after 2/3 dealiasing. The last term is the torus low-frequency correction
//! returned by [`bony_low_correction`].

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lp::DyadicDecomposition;
use crate::spectral::{dealias, divergence, laplacian, partial, ScalarField, VectorField2};

/// Paraproduct block separation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParaConfig {
    pub n0: i32,
}

impl Default for ParaConfig {
    fn default() -> Self {
        Self { n0: 4 }
    }
}

fn decompose_pair(y: &VectorField2) -> Result<[DyadicDecomposition; 2]> {
    Ok([DyadicDecomposition::new(y.x())?, DyadicDecomposition::new(y.y())?])
}

/// Decompositions of `d_0 f` and `d_1 f`.
fn gradient_blocks(f: &ScalarField) -> Result<[DyadicDecomposition; 2]> {
    Ok([
        DyadicDecomposition::new(&partial(f, 0))?,
        DyadicDecomposition::new(&partial(f, 1))?,
    ])
}

/// Sums pointwise products of pairs and dealiases once.
fn sum_of_products(pairs: Vec<(ScalarField, &ScalarField)>) -> ScalarField {
    let grid = pairs
        .first()
        .map(|(a, _)| a.grid().clone())
        .expect("at least one block");
    let len = grid.len();
    let acc = pairs
        .par_iter()
        .fold(
            || vec![0.0; len],
            |mut acc, (a, b)| {
                for ((o, x), y) in acc.iter_mut().zip(a.values()).zip(b.values()) {
                    *o += x * y;
                }
                acc
            },
        )
        .reduce(
            || vec![0.0; len],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x += y;
                }
                a
            },
        );
    dealias(&ScalarField::new(&grid, acc).expect("grid length"))
}

impl ParaConfig {
    pub fn new(n0: i32) -> Result<Self> {
        if n0 < 2 {
            return Err(Error::InvalidIndex(format!("n0 = {n0} must be at least 2")));
        }
        Ok(Self { n0 })
    }

    /// `T_u v` from precomputed decompositions.
    pub fn paraproduct_of(&self, du: &DyadicDecomposition, dv: &DyadicDecomposition) -> ScalarField {
        // S_m u for every m that occurs, built once by prefix sums
        let mut prefix = Vec::with_capacity(du.len() + 1);
        prefix.push(du.low_part().clone());
        for (_, b) in du.blocks() {
            let mut next = prefix.last().unwrap().clone();
            next.add_in_place(b).expect("same grid");
            prefix.push(next);
        }
        let low_index = |m: i32| -> usize { (m - du.j_min()).clamp(0, du.len() as i32) as usize };
        let pairs = dv
            .blocks()
            .map(|(j, b)| (prefix[low_index(j - self.n0)].clone(), b))
            .collect();
        sum_of_products(pairs)
    }

    /// `R(u, v)` from precomputed decompositions.
    pub fn remainder_of(&self, du: &DyadicDecomposition, dv: &DyadicDecomposition) -> ScalarField {
        let pairs = du
            .blocks()
            .map(|(j, b)| (dv.band_around(j, self.n0), b))
            .collect();
        sum_of_products(pairs)
    }

    /// `T_u v = sum_j S_{j - n0} u Delta_j v`, dealiased.
    pub fn paraproduct(&self, u: &ScalarField, v: &ScalarField) -> Result<ScalarField> {
        u.check_same_grid(v)?;
        Ok(self.paraproduct_of(&DyadicDecomposition::new(u)?, &DyadicDecomposition::new(v)?))
    }

    /// `R(u, v) = sum_{|j - k| <= n0} Delta_j u Delta_k v`, dealiased.
    pub fn remainder(&self, u: &ScalarField, v: &ScalarField) -> Result<ScalarField> {
        u.check_same_grid(v)?;
        Ok(self.remainder_of(&DyadicDecomposition::new(u)?, &DyadicDecomposition::new(v)?))
    }

    /// `(T_u v, T_v u, R(u, v))` sharing one pair of decompositions.
    pub fn bony(&self, u: &ScalarField, v: &ScalarField) -> Result<[ScalarField; 3]> {
        u.check_same_grid(v)?;
        let du = DyadicDecomposition::new(u)?;
        let dv = DyadicDecomposition::new(v)?;
        Ok([
            self.paraproduct_of(&du, &dv),
            self.paraproduct_of(&dv, &du),
            self.remainder_of(&du, &dv),
        ])
    }

    /// `T_Y f = sum_k T_{Y^k} d_k f` for any coefficient field `Y`.
    pub fn para_vector_field(&self, y: &VectorField2, f: &ScalarField) -> Result<ScalarField> {
        y.x().check_same_grid(f)?;
        Ok(self.para_vector_field_of(&decompose_pair(y)?, &gradient_blocks(f)?))
    }

    /// `T_Y f` from the decompositions of `Y^k` and of `d_k f`.
    fn para_vector_field_of(&self, y: &[DyadicDecomposition; 2], df: &[DyadicDecomposition; 2]) -> ScalarField {
        let mut out = self.paraproduct_of(&y[0], &df[0]);
        out.add_in_place(&self.paraproduct_of(&y[1], &df[1]))
            .expect("same grid");
        out
    }

    /// `T_Y` applied to each component of `v`.
    pub fn para_vector_field_vec(&self, y: &VectorField2, v: &VectorField2) -> Result<VectorField2> {
        y.x().check_same_grid(v.x())?;
        let dy = decompose_pair(y)?;
        VectorField2::new(
            self.para_vector_field_of(&dy, &gradient_blocks(v.x())?),
            self.para_vector_field_of(&dy, &gradient_blocks(v.y())?),
        )
    }

    /// Right-hand side of `d_X f - T_X f = T_{d_k f} X^k + d_k R(f, X^k) - R(f, div X)`.
    pub fn directional_defect(&self, x: &VectorField2, f: &ScalarField) -> Result<ScalarField> {
        x.x().check_same_grid(f)?;
        let div = divergence(x);
        let mut out = self.remainder(f, &div)?.scale(-1.0);
        for k in 0..2 {
            out.add_in_place(&self.paraproduct(&partial(f, k), x.component(k))?)?;
            out.add_in_place(&partial(&self.remainder(f, x.component(k))?, k))?;
        }
        Ok(out)
    }

    /// `[T_X, Laplacian] u = T_X (Laplacian u) - Laplacian (T_X u)`.
    pub fn commutator_laplacian(&self, x: &VectorField2, u: &ScalarField) -> Result<ScalarField> {
        x.x().check_same_grid(u)?;
        let dx = decompose_pair(x)?;
        let a = self.para_vector_field_of(&dx, &gradient_blocks(&laplacian(u))?);
        let b = laplacian(&self.para_vector_field_of(&dx, &gradient_blocks(u)?));
        a.sub(&b)
    }

    /// `[T_X, d_t + u . grad] u` at frozen time, with `d_t X = -u . grad X + d_X u`:
    ///
    /// ```text
    /// -T_{d_t X^k} d_k u + d_l T_X (u^l u) - T_{d_l X} (u^l u) - u^l d_l T_X u
    /// ```
    ///
    /// The rewriting relies on `div u = 0`, so `u` must be solenoidal.
    pub fn commutator_material(&self, x: &VectorField2, u: &VectorField2) -> Result<VectorField2> {
        x.x().check_same_grid(u.x())?;
        let div = divergence(u).max_abs();
        if div > 1e-8 * u.max_abs().max(1.0) {
            return Err(Error::NotSolenoidal(div));
        }
        let grad_x: [[ScalarField; 2]; 2] =
            [0, 1].map(|k| [0, 1].map(|l| partial(x.component(k), l)));
        let grad_u: [[ScalarField; 2]; 2] =
            [0, 1].map(|k| [0, 1].map(|l| partial(u.component(k), l)));
        let mut dt_x = Vec::with_capacity(2);
        for k in 0..2 {
            let mut acc = ScalarField::zeros(u.grid());
            for l in 0..2 {
                acc.add_in_place(&x.component(l).mul(&grad_u[k][l])?)?;
                acc.add_in_place(&u.component(l).mul(&grad_x[k][l])?.scale(-1.0))?;
            }
            dt_x.push(dealias(&acc));
        }
        let dt_x = VectorField2::new(dt_x.remove(0), dt_x.remove(0))?;
        // every coefficient field is decomposed once and reused below
        let dx = decompose_pair(x)?;
        let ddt_x = decompose_pair(&dt_x)?;
        // d_l X as a coefficient field: components (d_l X^1, d_l X^2)
        let dl_x = [0, 1].map(|l| {
            [0, 1].map(|k| DyadicDecomposition::new(&grad_x[k][l]))
        });
        let dl_x: Vec<[DyadicDecomposition; 2]> = dl_x
            .into_iter()
            .map(|[a, b]| Ok([a?, b?]))
            .collect::<Result<_>>()?;
        let du: Vec<[DyadicDecomposition; 2]> = (0..2)
            .map(|i| gradient_blocks(u.component(i)))
            .collect::<Result<_>>()?;
        let tx_u = VectorField2::new(
            self.para_vector_field_of(&dx, &du[0]),
            self.para_vector_field_of(&dx, &du[1]),
        )?;
        let mut out = Vec::with_capacity(2);
        for (i, du_i) in du.iter().enumerate() {
            let ui = u.component(i);
            let mut acc = self.para_vector_field_of(&ddt_x, du_i).scale(-1.0);
            for (l, dl_x_l) in dl_x.iter().enumerate() {
                let prod = dealias(&u.component(l).mul(ui)?);
                let dprod = gradient_blocks(&prod)?;
                acc.add_in_place(&partial(&self.para_vector_field_of(&dx, &dprod), l))?;
                acc.add_in_place(&self.para_vector_field_of(dl_x_l, &dprod).scale(-1.0))?;
                let transported = u.component(l).mul(&partial(tx_u.component(i), l))?;
                acc.add_in_place(&dealias(&transported).scale(-1.0))?;
            }
            out.push(acc);
        }
        VectorField2::new(out.remove(0), out.remove(0))
    }
}

/// `S_{j_min} u * S_{j_min} v`: on the torus the product of the two means.
pub fn bony_low_correction(u: &ScalarField, v: &ScalarField) -> Result<ScalarField> {
    u.check_same_grid(v)?;
    let du = DyadicDecomposition::new(u)?;
    let dv = DyadicDecomposition::new(v)?;
    Ok(dealias(&du.low_part().mul(dv.low_part())?))
}

/// `T_u v` with the default block separation.
pub fn paraproduct(u: &ScalarField, v: &ScalarField) -> Result<ScalarField> {
    ParaConfig::default().paraproduct(u, v)
}

/// `R(u, v)` with the default block separation.
pub fn remainder(u: &ScalarField, v: &ScalarField) -> Result<ScalarField> {
    ParaConfig::default().remainder(u, v)
}

/// `T_X f` with the default block separation.
pub fn para_vector_field(x: &VectorField2, f: &ScalarField) -> Result<ScalarField> {
    ParaConfig::default().para_vector_field(x, f)
}

pub fn commutator_laplacian(x: &VectorField2, u: &ScalarField) -> Result<ScalarField> {
    ParaConfig::default().commutator_laplacian(x, u)
}

pub fn commutator_material(x: &VectorField2, u: &VectorField2) -> Result<VectorField2> {
    ParaConfig::default().commutator_material(x, u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_band_limited, random_solenoidal, random_vector};
    use crate::spectral::{dealiased_product, directional_derivative, Grid2D};
    use std::f64::consts::PI;

    fn rel(a: &ScalarField, b: &ScalarField) -> f64 {
        a.sub(b).unwrap().max_abs() / b.max_abs().max(1e-300)
    }

    #[test]
    fn bony_identity_is_exact() {
        let g = Grid2D::new(128, 6.0).unwrap();
        let kmax = g.nyquist() * 2.0 / 3.0;
        for seed in 0..4 {
            let u = random_band_limited(&g, seed, kmax).map(|v| v + 0.3);
            let v = random_band_limited(&g, seed + 100, kmax).map(|v| v - 0.7);
            let [tuv, tvu, r] = ParaConfig::default().bony(&u, &v).unwrap();
            let uv = dealiased_product(&u, &v).unwrap();
            let mut sum = tuv.add(&tvu).unwrap().add(&r).unwrap();
            sum.add_in_place(&bony_low_correction(&u, &v).unwrap()).unwrap();
            assert!(rel(&sum, &uv) < 1e-11, "seed {seed}: {}", rel(&sum, &uv));
        }
    }

    #[test]
    fn constant_cases() {
        let g = Grid2D::new(64, 2.0 * PI).unwrap();
        let v = random_band_limited(&g, 3, 20.0).map(|x| x + 2.0);
        let c = ScalarField::constant(&g, 1.5);
        let t = paraproduct(&c, &v).unwrap();
        let expect = v.sub(&DyadicDecomposition::new(&v).unwrap().low_part().clone()).unwrap().scale(1.5);
        assert!(rel(&t, &expect) < 1e-12);
        assert!(paraproduct(&v, &c).unwrap().max_abs() < 1e-12);
        assert!(remainder(&v, &ScalarField::zeros(&g)).unwrap().max_abs() == 0.0);
        let ones = VectorField2::new(ScalarField::constant(&g, 1.0), ScalarField::zeros(&g)).unwrap();
        assert!(para_vector_field(&ones, &c).unwrap().max_abs() < 1e-12);
        // constant e1: T_X f = d_1 f minus the (vanishing) derivative of the mean
        let t = para_vector_field(&ones, &v).unwrap();
        assert!(rel(&t, &dealias(&partial(&v, 0))) < 1e-12);
    }

    #[test]
    fn remainder_is_symmetric() {
        let g = Grid2D::new(64, 5.0).unwrap();
        let u = random_band_limited(&g, 1, 30.0);
        let v = random_band_limited(&g, 2, 30.0);
        let a = remainder(&u, &v).unwrap();
        let b = remainder(&v, &u).unwrap();
        assert!(a.sub(&b).unwrap().max_abs() <= 1e-12 * a.max_abs());
    }

    #[test]
    fn single_mode_pair() {
        let g = Grid2D::new(256, 2.0 * PI).unwrap();
        let u = ScalarField::from_fn(&g, |x, _| (4.0 * x).cos());
        let v = ScalarField::from_fn(&g, |x, _| (64.0 * x).cos());
        let [tuv, tvu, r] = ParaConfig::default().bony(&u, &v).unwrap();
        // brute-force block bookkeeping: k - j > n0 feeds T_u v, |k - j| <= n0 feeds R
        let du = DyadicDecomposition::new(&u).unwrap();
        let dv = DyadicDecomposition::new(&v).unwrap();
        let mut t_brute = ScalarField::zeros(&g);
        let mut r_brute = ScalarField::zeros(&g);
        for (j, a) in du.blocks() {
            for (k, b) in dv.blocks() {
                let p = a.mul(b).unwrap();
                if k - j > 4 {
                    t_brute.add_in_place(&p).unwrap();
                } else if (k - j).abs() <= 4 {
                    r_brute.add_in_place(&p).unwrap();
                }
            }
        }
        assert!(tuv.sub(&dealias(&t_brute)).unwrap().max_abs() < 1e-12);
        assert!(r.sub(&dealias(&r_brute)).unwrap().max_abs() < 1e-12);
        assert!(tvu.max_abs() < 1e-12);
        let full = dealiased_product(&u, &v).unwrap();
        assert!(full.sub(&tuv.add(&r).unwrap()).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn directional_defect_identity() {
        let g = Grid2D::new(128, 2.0 * PI).unwrap();
        let kmax = g.nyquist() * 2.0 / 3.0;
        let f = random_band_limited(&g, 5, kmax);
        for x in [random_vector(&g, 6, kmax), random_solenoidal(&g, 7, 1.0, kmax)] {
            let lhs = directional_derivative(&x, &f).unwrap().sub(&para_vector_field(&x, &f).unwrap()).unwrap();
            let rhs = ParaConfig::default().directional_defect(&x, &f).unwrap();
            assert!(rel(&rhs, &lhs) < 1e-9, "{}", rel(&rhs, &lhs));
        }
    }

    #[test]
    fn paraproduct_block_is_localised() {
        let g = Grid2D::new(256, 2.0 * PI).unwrap();
        let u = random_band_limited(&g, 8, 80.0);
        let v = random_band_limited(&g, 9, 80.0);
        let du = DyadicDecomposition::new(&u).unwrap();
        let dv = DyadicDecomposition::new(&v).unwrap();
        for j in 2..=6 {
            let p = dealias(&du.low_frequency(j - 4).mul(dv.block(j).unwrap()).unwrap());
            let scale = (j as f64).exp2();
            let spec = p.spectrum();
            for (i, &k) in g.wavenumber_abs().iter().enumerate() {
                if k < 2.0 / 3.0 * scale - 1e-9 || k > 11.0 / 4.0 * scale + 1e-9 {
                    assert!(spec[i].norm() < 1e-9 * g.len() as f64);
                }
            }
        }
    }

    #[test]
    fn commutators_vanish_on_trivial_input() {
        let g = Grid2D::new(64, 2.0 * PI).unwrap();
        let x = random_solenoidal(&g, 1, 1.0, 8.0);
        let u = random_band_limited(&g, 2, 16.0);
        assert_eq!(commutator_laplacian(&x, &ScalarField::zeros(&g)).unwrap().max_abs(), 0.0);
        let e1 = VectorField2::new(ScalarField::constant(&g, 1.0), ScalarField::zeros(&g)).unwrap();
        let c = commutator_laplacian(&e1, &u).unwrap();
        assert!(c.max_abs() <= 1e-9 * laplacian(&u).max_abs());
        let w = random_solenoidal(&g, 3, 1.0, 8.0);
        assert_eq!(commutator_material(&x, &VectorField2::zeros(&g)).unwrap().max_abs(), 0.0);
        assert!(commutator_material(&VectorField2::zeros(&g), &w).unwrap().max_abs() == 0.0);
        let grad = crate::spectral::gradient(&u);
        assert!(matches!(commutator_material(&x, &grad), Err(Error::NotSolenoidal(_))));
    }

    #[test]
    fn rejects_small_n0_and_mismatch() {
        assert!(ParaConfig::new(1).is_err());
        assert_eq!(ParaConfig::new(4).unwrap(), ParaConfig::default());
        let a = ScalarField::zeros(&Grid2D::new(32, 1.0).unwrap());
        let b = ScalarField::zeros(&Grid2D::new(64, 1.0).unwrap());
        assert!(matches!(paraproduct(&a, &b), Err(Error::GridMismatch)));
    }
}

//! Bony's decomposition `uv = T_u v + T_v u + R(u, v)` and the
//! para-vector field `T_X`, on random band-limited data.

use std::f64::consts::PI;

use patchflow::paradiff::ParaConfig;
use patchflow::random::{random_band_limited, random_solenoidal};
use patchflow::spectral::{dealiased_product, directional_derivative, Grid2D};

fn main() -> patchflow::Result<()> {
    let grid = Grid2D::new(128, 2.0 * PI)?;
    let cfg = ParaConfig::default();
    let u = random_band_limited(&grid, 1, 30.0);
    let v = random_band_limited(&grid, 2, 30.0);

    let [tuv, tvu, r] = cfg.bony(&u, &v)?;
    let product = dealiased_product(&u, &v)?;
    let mut sum = tuv.add(&tvu)?;
    sum.add_in_place(&r)?;
    println!("Bony residual          {:.2e}", sum.sub(&product)?.max_abs() / product.max_abs());
    println!("|T_u v| |T_v u| |R|    {:.3} {:.3} {:.3}", tuv.max_abs(), tvu.max_abs(), r.max_abs());

    // d_X f = T_X f + remainder terms, with the defect given exactly by its formula
    let x = random_solenoidal(&grid, 3, 1.0, 8.0);
    let f = random_band_limited(&grid, 4, 30.0);
    let dxf = directional_derivative(&x, &f)?;
    let txf = cfg.para_vector_field(&x, &f)?;
    let defect = cfg.directional_defect(&x, &f)?;
    let identity = dxf.sub(&txf)?.sub(&defect)?.max_abs() / dxf.max_abs();
    println!("d_X f - T_X f identity {identity:.2e}");
    Ok(())
}

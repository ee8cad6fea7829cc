//! Littlewood-Paley blocks of a rough function and the Besov and Holder
//! norms built from them.

use std::f64::consts::PI;

use patchflow::lp::{
    besov_norm, block_lp_norms, decompose, holder_norm, partition_residual, BesovIndex,
};
use patchflow::spectral::{Grid2D, ScalarField};

fn main() -> patchflow::Result<()> {
    let grid = Grid2D::new(256, 2.0 * PI)?;
    println!("partition of unity residual {:.1e}", partition_residual(&grid));

    // lacunary series sum 2^{-k/2} cos(2^k x): Holder exponent exactly 1/2
    let lacunary = |x: f64| -> f64 {
        (1..=6).map(|k| (-0.5 * k as f64).exp2() * ((k as f64).exp2() * x).cos()).sum()
    };
    let f = ScalarField::from_fn(&grid, |x, y| lacunary(x) * y.cos()).without_mean();
    let d = decompose(&f)?;
    println!("{:>4} {:>12} {:>12}", "j", "|Delta_j f|", "2^(j/2) x");
    for (j, norm) in block_lp_norms(&d, f64::INFINITY) {
        println!("{j:>4} {norm:>12.4e} {:>12.4e}", norm * (0.5 * j as f64).exp2());
    }
    // sup_j 2^{j eps} |Delta_j f|_inf stays flat for eps = 1/2 and grows
    // with the top shell for eps = 3/4
    let blocks = block_lp_norms(&d, f64::INFINITY);
    for eps in [0.25, 0.5, 0.75] {
        let sup = blocks
            .iter()
            .map(|&(j, b)| (eps * j as f64).exp2() * b)
            .fold(0.0, f64::max);
        println!("eps = {eps}: weighted block sup {sup:.4e}");
    }
    // the full C^eps norm also includes the sup norm, which dominates here
    println!("C^0.5 norm {:.4e}, sup norm {:.4e}", holder_norm(&f, 0.5)?, f.max_abs());
    let idx = BesovIndex::homogeneous(0.25, 2.0, 2.0);
    println!("B^0.25_(2,2) norm {:.4e}", besov_norm(&f, &idx)?);
    Ok(())
}

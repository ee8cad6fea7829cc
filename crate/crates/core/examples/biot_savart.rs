//! Velocity from vorticity on the torus and the energy identity
//! `int |u|^2 = -int psi omega`.

use std::f64::consts::PI;

use patchflow::biot_savart::{energy_pair, stream_function, velocity_from_vorticity};
use patchflow::spectral::{curl, divergence, Grid2D, ScalarField};

fn main() -> patchflow::Result<()> {
    let grid = Grid2D::new(64, 2.0 * PI)?;
    let omega = ScalarField::from_fn(&grid, |x, y| 2.0 * x.sin() * y.sin());
    let u = velocity_from_vorticity(&omega)?;

    // Laplacian psi = omega, so omega = 2 sin x sin y gives psi = -sin x sin y
    let psi = stream_function(&omega)?;
    let exact = ScalarField::from_fn(&grid, |x, y| -x.sin() * y.sin());
    println!("stream function error {:.2e}", psi.sub(&exact)?.max_abs());
    println!("curl round trip error {:.2e}", curl(&u).sub(&omega)?.max_abs());
    println!("max |div u|           {:.2e}", divergence(&u).max_abs());

    let (kinetic, h_minus_one) = energy_pair(&omega)?;
    println!("int |u|^2 = {kinetic:.6}, -int psi omega = {h_minus_one:.6}");
    Ok(())
}

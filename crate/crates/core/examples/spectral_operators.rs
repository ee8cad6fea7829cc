//! Fourier-multiplier calculus on the periodic square: derivatives, the
//! Leray projector and dealiasing, checked against closed forms.

use std::f64::consts::PI;

use patchflow::spectral::{
    curl, dealias, divergence, gradient, inverse_laplacian, laplacian, leray_project, Grid2D,
    ScalarField, VectorField2,
};

fn main() -> patchflow::Result<()> {
    let grid = Grid2D::new(64, 2.0 * PI)?;
    let f = ScalarField::from_fn(&grid, |x, y| (2.0 * x).sin() * (3.0 * y).cos());

    // Laplacian of a single mode is -|k|^2 times the mode
    let lap = laplacian(&f);
    let expected = f.scale(-13.0);
    println!("laplacian error        {:.2e}", lap.sub(&expected)?.max_abs());

    // inverse Laplacian undoes it on mean-free fields
    let back = inverse_laplacian(&lap)?;
    println!("inverse laplacian err  {:.2e}", back.sub(&f)?.max_abs());

    // curl of a gradient vanishes, Leray projection removes gradients
    let g = gradient(&f);
    println!("|curl grad f|          {:.2e}", curl(&g).max_abs());
    let w = VectorField2::new(
        ScalarField::from_fn(&grid, |x, y| x.cos() * y.sin()),
        ScalarField::from_fn(&grid, |_, y| y.cos()),
    )?;
    let mixed = w.add(&g)?;
    let p = leray_project(&mixed);
    println!("|div P(w + grad f)|    {:.2e}", divergence(&p).max_abs());

    // modes beyond two thirds of the Nyquist wavenumber are removed
    let high = ScalarField::from_fn(&grid, |x, _| (30.0 * x).cos());
    println!("dealiased high mode    {:.2e}", dealias(&high).max_abs());
    Ok(())
}

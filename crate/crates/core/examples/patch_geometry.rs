//! Density patches: a disc with a Holder-rough boundary, its level set,
//! mollified density, contour and tangent vector field.

use patchflow::patch::{
    boundary_holder, disc_area, extract_contour, make_patch, tangent_field, PatchShape,
};
use patchflow::spectral::{divergence, Grid2D};

fn main() -> patchflow::Result<()> {
    let grid = Grid2D::new(256, 8.0)?;
    let shape = PatchShape::PerturbedDisc {
        radius: 1.0,
        eps: 0.5,
        amplitude: 0.05,
        modes: 4,
    };
    let patch = make_patch(shape, 0.05, 0.5, &grid)?;
    println!("centre {:?}, band {:.3}, mollifier width {:.3}", patch.center(), patch.band(), patch.mollification_width());
    println!("area {:.5} (unperturbed disc {:.5})", patch.area(), disc_area(1.0));

    let rho = patch.density();
    println!("density range [{:.3}, {:.3}]", rho.min(), rho.max());

    let contour = extract_contour(&patch.level_set().f)?;
    println!(
        "contour: {} points, perimeter {:.4}, C^0.5 seminorm {:.4}",
        contour.len(),
        contour.perimeter(),
        boundary_holder(&contour, 0.5)
    );

    // the tangent field is a perpendicular gradient, so it is divergence free
    let x = tangent_field(&patch);
    println!("max |X| {:.3}, max |div X| {:.2e}", x.max_abs(), divergence(&x).max_abs());

    match make_patch(PatchShape::Disc { radius: 3.5 }, 0.05, 0.5, &grid) {
        Err(e) => println!("oversized disc rejected: {e}"),
        Ok(_) => println!("oversized disc unexpectedly accepted"),
    }
    Ok(())
}

//! The Navier-Stokes solver against the exact Taylor-Green vortex, and its
//! observed order of accuracy in time.

use patchflow::acceptance::taylor_green_error;

fn main() -> patchflow::Result<()> {
    let coarse = taylor_green_error(2e-3)?;
    let fine = taylor_green_error(1e-3)?;
    println!("relative L2 error, dt = 2e-3: {coarse:.3e}");
    println!("relative L2 error, dt = 1e-3: {fine:.3e}");
    println!("observed order {:.3}", (coarse / fine).log2());
    Ok(())
}

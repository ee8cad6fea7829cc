//! A density patch with a rough boundary carried by a smooth vortex:
//! striated and boundary Holder norms along the run, printed as CSV.
//!
//! `cargo run --release --example density_patch_persistence -- 128 0.5`
//! runs at n = 128 up to t = 0.5; the acceptance resolution is n = 256, t = 2.

use patchflow::acceptance::{run_persistence, PersistenceSetup};

fn main() -> patchflow::Result<()> {
    let mut args = std::env::args().skip(1);
    let n = args.next().and_then(|a| a.parse().ok()).unwrap_or(128);
    let t_end = args.next().and_then(|a| a.parse().ok()).unwrap_or(0.5);

    let mut setup = PersistenceSetup::default().with_resolution(n);
    setup.solver.t_end = t_end;
    let run = run_persistence(&setup, |row, extra| {
        eprintln!(
            "t = {:.2}  holder_X = {:.4}  boundary = {:.4}  pde vs formula = {:.1e}",
            row.t, row.striated.holder_x, row.striated.boundary_holder, extra.pde_formula_l2
        );
    })?;
    print!("{}", run.series_csv());
    eprintln!("{:.1} s", run.seconds);
    Ok(())
}

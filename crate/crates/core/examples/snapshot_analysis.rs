//! Writing a field snapshot and reading it back for dyadic analysis, the
//! same path `patchflow analyze` takes.

use patchflow::analysis::{analyze, parse_norms, Analysis};
use patchflow::patch::{make_patch, PatchShape};
use patchflow::spectral::{snapshot, Grid2D};

fn main() -> patchflow::Result<()> {
    let grid = Grid2D::new(128, 8.0)?;
    let patch = make_patch(PatchShape::Ellipse { semi_x: 1.4, semi_y: 0.8 }, 0.1, 0.5, &grid)?;
    let path = std::env::temp_dir().join("patchflow-example-rho.snap");
    snapshot::write(&path, &patch.density(), "rho", 0.0)?;

    let snap = snapshot::read(&path)?;
    println!("read `{}` at t = {} on n = {}", snap.header.name, snap.header.t, snap.header.n);

    // a jump across the boundary gives blocks decaying like 2^{-j/p} down to
    // the mollification scale, and much faster beyond it
    let specs = parse_norms("holder(0.5); besov_inh(0.3,3,inf); besov_inh(0.5,3,inf)")?;
    let report = analyze(&snap.field, &specs)?;
    println!("{}", Analysis::CSV_HEADER);
    for row in report.rows.iter().filter(|r| r.norm.starts_with("besov_inh(0.3")) {
        println!("{},{},{:.4e},{:.4e}", row.norm, row.j, row.block_lp, row.weighted);
    }
    for v in &report.summary {
        println!("{:<24} {:.4e}", v.norm, v.value);
    }
    std::fs::remove_file(&path)?;
    Ok(())
}

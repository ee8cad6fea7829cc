//! Lower bounds for multiplier norms by probing: the indicator of a patch
//! acting between Besov spaces, estimated on a seeded probe family.

use patchflow::lp::{multiplier_norm_probe, standard_probes, BesovIndex};
use patchflow::patch::{make_patch, PatchShape};
use patchflow::spectral::Grid2D;

fn main() -> patchflow::Result<()> {
    let grid = Grid2D::new(128, 8.0)?;
    let patch = make_patch(PatchShape::Disc { radius: 1.0 }, 0.05, 0.5, &grid)?;
    let chi = patch.indicator();
    let center = patch.center();
    let probes = standard_probes(&grid, 7, 2, &[(center.0 + 1.0, center.1)]);
    println!("{} probes", probes.len());
    for s in [-0.5, -0.25, 0.25] {
        let idx = BesovIndex::homogeneous(s, 3.0, 1.0);
        let m = multiplier_norm_probe(&chi, &idx, &idx, &probes)?;
        println!("indicator on B^{s}_(3,1): norm >= {m:.4}");
    }
    Ok(())
}

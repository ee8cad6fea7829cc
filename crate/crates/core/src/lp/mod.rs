//! Littlewood-Paley analysis on the periodic grid: cutoff profiles, dyadic
//! blocks, Besov and Holder norms, and multiplier-norm probes.

mod decomposition;
mod multiplier;
mod norms;
mod profiles;

pub use decomposition::{
    highest_shell, lowest_shell, partition_residual, DecompositionKind, DyadicDecomposition,
};
pub use multiplier::{multiplier_norm_probe, standard_probes};
pub use norms::{
    besov_norm, besov_norm_of, besov_norm_vector, block_lp_norms, holder_norm,
    holder_norm_vector, BesovIndex,
};
pub use profiles::{smooth_step, CutoffProfiles};

pub(crate) use multiplier::wrap;

/// Shorthand for [`DyadicDecomposition::new`].
pub fn decompose(f: &crate::spectral::ScalarField) -> crate::Result<DyadicDecomposition> {
    DyadicDecomposition::new(f)
}

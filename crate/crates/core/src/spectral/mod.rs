//! Periodic grid, transforms, and Fourier-multiplier operators.

mod field;
mod grid;
mod ops;
pub mod snapshot;

pub use field::{ScalarField, VectorField2};
pub use grid::Grid2D;
pub use ops::{
    apply_multiplier, curl, dealias, dealiased_product, directional_derivative, divergence,
    gradient, inverse_laplacian, laplacian, leray_project, partial, perp_gradient, MEAN_TOLERANCE,
};
pub(crate) use field::lp_norm;
pub(crate) use ops::{inverse_laplacian_unchecked, mean_is_zero};

//! Velocity from vorticity on the torus: `u = grad^perp psi` with
//! `Laplacian psi = omega`.

use crate::error::{Error, Result};
use crate::spectral::{inverse_laplacian_unchecked, mean_is_zero, perp_gradient, ScalarField, VectorField2};

pub use crate::spectral::curl;

/// Stream function `psi` with `Laplacian psi = omega` and zero mean.
pub fn stream_function(omega: &ScalarField) -> Result<ScalarField> {
    mean_is_zero(omega).map_err(|mean| Error::NonzeroVorticity { mean })?;
    Ok(inverse_laplacian_unchecked(omega))
}

/// Divergence-free velocity whose curl is `omega`.
///
/// A periodic velocity has zero total vorticity, so `omega` must be mean free.
pub fn velocity_from_vorticity(omega: &ScalarField) -> Result<VectorField2> {
    Ok(perp_gradient(&stream_function(omega)?))
}

/// `(int |u|^2, -int psi omega)`; the two agree for `u` built from `omega`.
pub fn energy_pair(omega: &ScalarField) -> Result<(f64, f64)> {
    let psi = stream_function(omega)?;
    let u = perp_gradient(&psi);
    let ke = u.dot(&u)?.integral();
    let pe = -psi.mul(omega)?.integral();
    Ok((ke, pe))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_band_limited, random_vector};
    use crate::spectral::{divergence, leray_project, Grid2D};
    use std::f64::consts::PI;

    #[test]
    fn sine_sine_case() {
        let l = 5.0;
        let g = Grid2D::new(64, l).unwrap();
        let k = 2.0 * PI / l;
        let omega = ScalarField::from_fn(&g, |x, y| -2.0 * k * k * (k * x).sin() * (k * y).sin());
        let u = velocity_from_vorticity(&omega).unwrap();
        let ex = VectorField2::from_fn(&g, |x, y| {
            [-k * (k * x).sin() * (k * y).cos(), k * (k * x).cos() * (k * y).sin()]
        });
        assert!(u.sub(&ex).unwrap().max_abs() < 1e-10 * ex.max_abs());
        assert!(divergence(&u).max_abs() < 1e-12);
    }

    #[test]
    fn round_trips() {
        let g = Grid2D::new(128, 7.0).unwrap();
        let omega = random_band_limited(&g, 4, 60.0);
        let back = curl(&velocity_from_vorticity(&omega).unwrap());
        assert!(back.sub(&omega).unwrap().max_abs() < 1e-10 * omega.max_abs());
        let u = random_vector(&g, 5, 60.0);
        let v = velocity_from_vorticity(&curl(&u)).unwrap();
        let p = leray_project(&u);
        assert!(v.sub(&p).unwrap().max_abs() < 1e-10 * p.max_abs());
        let z = velocity_from_vorticity(&ScalarField::zeros(&g)).unwrap();
        assert_eq!(z.max_abs(), 0.0);
    }

    #[test]
    fn energy_identity() {
        let g = Grid2D::new(64, 3.0).unwrap();
        let (ke, pe) = energy_pair(&random_band_limited(&g, 9, 30.0)).unwrap();
        assert!((ke - pe).abs() < 1e-9 * ke);
    }

    #[test]
    fn rejects_net_vorticity() {
        let g = Grid2D::new(32, 1.0).unwrap();
        let err = velocity_from_vorticity(&ScalarField::constant(&g, 0.1)).unwrap_err();
        assert!(err.to_string().contains("nonzero total vorticity on torus"));
    }
}

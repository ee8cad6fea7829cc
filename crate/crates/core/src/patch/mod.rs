//! Initial data for a density patch: level set, density, tangent field and
//! vorticity, plus boundary extraction.
//!
//! The level set is `f0 = A tanh(q / A)` with `A = R` (the nominal radius)
//! and `q` an analytic quadratic-type function vanishing on the boundary:
//!
//! * disc: `q = (r^2 - R^2) / (2R)`,
//! * ellipse: `q = sqrt(ab) ((x/a)^2 + (y/b)^2 - 1) / 2`,
//! * perturbed disc: `q = (r^2 - R(theta)^2) / (2R)` with
//!   `R(theta) = R (1 + a W(theta))` and
//!   `W(theta) = sum_{k=1}^{K} 2^{-k(1+eps)} cos(2^k theta)`.
//!
//! Far from the patch `f0` is blended to the constant `A`, which makes it
//! exactly periodic. Everything is centred in the box.

mod contour;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use contour::{boundary_holder, extract_contour, extract_loops, Contour};

use crate::error::{Error, Result};
use crate::spectral::{gradient, perp_gradient, Grid2D, ScalarField, VectorField2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum PatchShape {
    Disc {
        radius: f64,
    },
    Ellipse {
        semi_x: f64,
        semi_y: f64,
    },
    /// Disc of nominal `radius` whose boundary is `R(1 + amplitude W(theta))`
    /// with a `modes`-term lacunary series of Holder exponent `eps`.
    PerturbedDisc {
        radius: f64,
        eps: f64,
        amplitude: f64,
        modes: u32,
    },
}

impl PatchShape {
    /// Nominal radius used for the level-set scale and the vorticity bump.
    pub fn nominal_radius(&self) -> f64 {
        match *self {
            PatchShape::Disc { radius } | PatchShape::PerturbedDisc { radius, .. } => radius,
            PatchShape::Ellipse { semi_x, semi_y } => semi_x.min(semi_y),
        }
    }

    /// Largest distance from the centre to the boundary.
    pub fn max_radius(&self) -> f64 {
        match *self {
            PatchShape::Disc { radius } => radius,
            PatchShape::Ellipse { semi_x, semi_y } => semi_x.max(semi_y),
            PatchShape::PerturbedDisc {
                radius,
                eps,
                amplitude,
                modes,
            } => {
                let s: f64 = (1..=modes).map(|k| (-(k as f64) * (1.0 + eps)).exp2()).sum();
                radius * (1.0 + amplitude.abs() * s)
            }
        }
    }

    /// Boundary radius in direction `theta` for star-shaped shapes.
    pub fn boundary_radius(&self, theta: f64) -> f64 {
        match *self {
            PatchShape::Disc { radius } => radius,
            PatchShape::Ellipse { semi_x, semi_y } => {
                let (c, s) = (theta.cos() / semi_x, theta.sin() / semi_y);
                1.0 / c.hypot(s)
            }
            PatchShape::PerturbedDisc {
                radius,
                eps,
                amplitude,
                modes,
            } => radius * (1.0 + amplitude * weierstrass(theta, eps, modes)),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            PatchShape::Disc { radius } => radius > 0.0,
            PatchShape::Ellipse { semi_x, semi_y } => semi_x > 0.0 && semi_y > 0.0,
            PatchShape::PerturbedDisc {
                radius,
                eps,
                amplitude,
                ..
            } => radius > 0.0 && eps > 0.0 && eps < 1.0 && amplitude.is_finite(),
        };
        if !ok {
            return Err(Error::InvalidPatch(format!("bad shape parameters {self:?}")));
        }
        if let PatchShape::PerturbedDisc { radius, .. } = *self {
            if self.max_radius() - radius > 0.5 * radius {
                return Err(Error::InvalidPatch(
                    "perturbation amplitude too large: boundary no longer star shaped".into(),
                ));
            }
        }
        Ok(())
    }
}

/// `sum_{k=1}^{K} 2^{-k(1+eps)} cos(2^k theta)`.
pub fn weierstrass(theta: f64, eps: f64, modes: u32) -> f64 {
    (1..=modes)
        .map(|k| (-(k as f64) * (1.0 + eps)).exp2() * ((k as f64).exp2() * theta).cos())
        .sum()
}

/// 0 for `t <= 0`, 1 for `t >= 1`: the standard `e(t) / (e(t) + e(1 - t))`
/// step with `e(t) = exp(-1/t)`, whose midpoint slope is only 2.
fn blend(t: f64) -> f64 {
    let e = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
    let t = t.clamp(0.0, 1.0);
    let (a, b) = (e(t), e(1.0 - t));
    a / (a + b)
}

type LevelFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// A level-set function sampled on the grid together with the band
/// `|f| < band` on which `|grad f| >= 0.5` is certified.
#[derive(Debug, Clone)]
pub struct LevelSet {
    pub f: ScalarField,
    pub band: f64,
}

impl LevelSet {
    /// Minimum of `|grad f|` over grid points with `|f| < band`.
    pub fn min_gradient_on_band(&self) -> f64 {
        let g = gradient(&self.f).magnitude();
        self.f
            .values()
            .iter()
            .zip(g.values())
            .filter(|(f, _)| f.abs() < self.band)
            .map(|(_, &d)| d)
            .fold(f64::INFINITY, f64::min)
    }
}

/// A density patch and its initial data.
#[derive(Clone)]
pub struct Patch {
    shape: PatchShape,
    eta: f64,
    eps: f64,
    center: (f64, f64),
    level: Arc<LevelFn>,
    level_set: LevelSet,
    contour: Contour,
    width: f64,
}

impl fmt::Debug for Patch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Patch")
            .field("shape", &self.shape)
            .field("eta", &self.eta)
            .field("eps", &self.eps)
            .field("center", &self.center)
            .field("band", &self.level_set.band)
            .field("contour_points", &self.contour.len())
            .finish()
    }
}

/// Builds the patch, its level set and its boundary contour.
///
/// The boundary must stay within distance `L/4` of the centre, i.e. inside
/// the central quarter of the box.
pub fn make_patch(shape: PatchShape, eta: f64, eps: f64, grid: &Grid2D) -> Result<Patch> {
    shape.validate()?;
    if !(eta.abs() < 1.0) {
        return Err(Error::InvalidPatch(format!("|eta| = {} must be < 1", eta.abs())));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidPatch(format!("eps = {eps} must lie in ]0,1[")));
    }
    let length = grid.length();
    let extent = shape.max_radius();
    let limit = 0.25 * length;
    if extent > limit {
        return Err(Error::PatchTooLarge { extent, limit });
    }
    let r0 = shape.nominal_radius();
    let band = 0.25 * r0;
    if band < 3.0 * grid.spacing() {
        return Err(Error::InvalidPatch(format!(
            "patch radius {r0} is under-resolved at spacing {}",
            grid.spacing()
        )));
    }
    let center = grid.center();
    let amp = r0;
    let (r_in, r_out) = (0.33 * length, 0.48 * length);
    let q: Box<dyn Fn(f64, f64) -> f64 + Send + Sync> = match shape {
        PatchShape::Disc { radius } => Box::new(move |x, y| (x * x + y * y - radius * radius) / (2.0 * radius)),
        PatchShape::Ellipse { semi_x, semi_y } => {
            let s = (semi_x * semi_y).sqrt();
            Box::new(move |x, y| 0.5 * s * ((x / semi_x).powi(2) + (y / semi_y).powi(2) - 1.0))
        }
        PatchShape::PerturbedDisc { radius, .. } => Box::new(move |x, y| {
            let r2 = x * x + y * y;
            let inner = (r2 - radius * radius) / (2.0 * radius);
            let r = r2.sqrt();
            let w = blend((r - 0.35 * radius) / (0.55 * radius));
            if w == 0.0 {
                return inner;
            }
            let rb = shape.boundary_radius(y.atan2(x));
            inner + w * (radius * radius - rb * rb) / (2.0 * radius)
        }),
    };
    let level: Arc<LevelFn> = Arc::new(move |x: f64, y: f64| {
        let dx = crate::lp::wrap(x - center.0, length);
        let dy = crate::lp::wrap(y - center.1, length);
        let r = dx.hypot(dy);
        let w = blend((r - r_in) / (r_out - r_in));
        let inner = if w < 1.0 { amp * (q(dx, dy) / amp).tanh() } else { amp };
        inner + w * (amp - inner)
    });
    let f = {
        let level = level.clone();
        ScalarField::from_fn(grid, move |x, y| level(x, y))
    };
    let level_set = LevelSet { f, band };
    let min_grad = level_set.min_gradient_on_band();
    if min_grad < 0.5 {
        return Err(Error::InvalidPatch(format!(
            "|grad f0| = {min_grad:.3} < 0.5 on the boundary band"
        )));
    }
    let contour = extract_contour(&level_set.f)?;
    Ok(Patch {
        shape,
        eta,
        eps,
        center,
        level,
        level_set,
        contour,
        width: 2.0 * grid.spacing(),
    })
}

/// `(1 - tanh(f / delta)) / 2`: a smoothed indicator of `{f < 0}`.
pub fn smoothed_indicator(f: &ScalarField, delta: f64) -> ScalarField {
    f.map(|v| 0.5 * (1.0 - (v / delta).tanh()))
}

/// `1 + eta * indicator(f)`.
pub fn density_from_level(f: &ScalarField, eta: f64, delta: f64) -> ScalarField {
    f.map(|v| 1.0 + eta * 0.5 * (1.0 - (v / delta).tanh()))
}

impl Patch {
    pub fn shape(&self) -> PatchShape {
        self.shape
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn center(&self) -> (f64, f64) {
        self.center
    }

    pub fn grid(&self) -> &Grid2D {
        self.level_set.f.grid()
    }

    pub fn level_set(&self) -> &LevelSet {
        &self.level_set
    }

    /// Half-width of the certified boundary band.
    pub fn band(&self) -> f64 {
        self.level_set.band
    }

    pub fn contour(&self) -> &Contour {
        &self.contour
    }

    /// Jump mollification width (two grid cells).
    pub fn mollification_width(&self) -> f64 {
        self.width
    }

    /// Exact `f0` at any point of the plane (periodic).
    pub fn level_value(&self, x: f64, y: f64) -> f64 {
        (self.level)(x, y)
    }

    /// Shared handle to the analytic level-set function.
    pub fn level_fn(&self) -> Arc<dyn Fn(f64, f64) -> f64 + Send + Sync> {
        self.level.clone()
    }

    pub fn indicator(&self) -> ScalarField {
        smoothed_indicator(&self.level_set.f, self.width)
    }

    /// `rho0 = 1 + eta 1_{D0}` with the jump mollified over two cells.
    pub fn density(&self) -> ScalarField {
        self.density_with_width(self.width)
    }

    pub fn density_with_width(&self, delta: f64) -> ScalarField {
        density_from_level(&self.level_set.f, self.eta, delta)
    }

    /// Area enclosed by the initial contour.
    pub fn area(&self) -> f64 {
        self.contour.area()
    }
}

/// `X0 = c(f0) grad^perp f0`, realised as `grad^perp C(f0)` with
/// `c(s) = (1 - tanh((s - m) / w)) / 2` and `C' = c`, so that it is exactly
/// divergence free on the grid and tangent to every level line of `f0`.
///
/// With `m = 0.7 A` and `w = 0.15 A` (`A` the saturation value of `f0`),
/// `c > 0.997` on the boundary band and `c(A) < 0.02`, and `C(f0)` stays
/// analytic with a transition several cells wide, so its spectrum decays
/// exponentially.
pub fn tangent_field(p: &Patch) -> VectorField2 {
    let c = tangent_profile(p);
    perp_gradient(&p.level_set.f.map(c))
}

/// The antiderivative `C(s) = (s - w ln cosh((s - m) / w)) / 2` used by
/// [`tangent_field`].
pub fn tangent_profile(p: &Patch) -> impl Fn(f64) -> f64 + Send + Sync + Copy {
    let a = p.shape.nominal_radius();
    let (m, w) = (0.7 * a, 0.15 * a);
    move |s: f64| {
        let z = ((s - m) / w).abs();
        let ln_cosh = z + (-2.0 * z).exp().ln_1p() - std::f64::consts::LN_2;
        0.5 * (s - w * ln_cosh)
    }
}

/// Stream function `C(f0)` of `X0` at any point of the plane.
pub fn tangent_stream_fn(p: &Patch) -> Arc<dyn Fn(f64, f64) -> f64 + Send + Sync> {
    let c = tangent_profile(p);
    let level = p.level_fn();
    Arc::new(move |x, y| c(level(x, y)))
}

/// Smooth bump `exp(-1 / (1 - (r / radius)^2))` around `center`.
pub fn bump(grid: &Grid2D, center: (f64, f64), radius: f64) -> ScalarField {
    let length = grid.length();
    ScalarField::from_fn(grid, |x, y| {
        let dx = crate::lp::wrap(x - center.0, length);
        let dy = crate::lp::wrap(y - center.1, length);
        let s = (dx * dx + dy * dy) / (radius * radius);
        if s < 1.0 {
            (-1.0 / (1.0 - s)).exp()
        } else {
            0.0
        }
    })
}

/// `omega0 = profile * 1_{D0}`, minus its mean carried by a bump of radius
/// `R/2` at the patch centroid so that the grid mean vanishes.
pub fn patch_vorticity(p: &Patch, profile: &ScalarField) -> Result<ScalarField> {
    let raw = profile.mul(&p.indicator())?;
    let m = raw.mean();
    if m == 0.0 {
        return Ok(raw);
    }
    let c = p.contour.centroid();
    let b = bump(p.grid(), (c[0], c[1]), 0.5 * p.shape.nominal_radius());
    let out = raw.sub(&b.scale(m / b.mean()))?;
    // remove the last rounding residue uniformly
    let r = out.mean();
    Ok(out.map(|v| v - r))
}

/// Area of a disc of radius `r`.
pub fn disc_area(r: f64) -> f64 {
    PI * r * r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::holder_norm;
    use crate::spectral::divergence;

    fn disc(n: usize) -> Patch {
        let g = Grid2D::new(n, 8.0).unwrap();
        make_patch(PatchShape::Disc { radius: 1.0 }, 0.05, 0.5, &g).unwrap()
    }

    #[test]
    fn disc_density_and_contour() {
        let p = disc(256);
        let rho = p.density();
        let f = &p.level_set().f;
        let off_band = 5.0 * p.mollification_width();
        for (r, fv) in rho.values().iter().zip(f.values()) {
            if *fv > off_band {
                assert!((r - 1.0).abs() < 2e-5);
            } else if *fv < -off_band {
                assert!((r - 1.05).abs() < 2e-5);
            }
        }
        assert!((p.contour().perimeter() - 2.0 * PI).abs() < 0.02 * 2.0 * PI);
        assert!(p.level_set().min_gradient_on_band() >= 0.5);
    }

    #[test]
    fn zero_contrast_and_zero_amplitude() {
        let g = Grid2D::new(128, 8.0).unwrap();
        let p = make_patch(PatchShape::Disc { radius: 1.0 }, 0.0, 0.5, &g).unwrap();
        assert!(p.density().values().iter().all(|&v| v == 1.0));
        let q = make_patch(
            PatchShape::PerturbedDisc {
                radius: 1.0,
                eps: 0.5,
                amplitude: 0.0,
                modes: 5,
            },
            0.0,
            0.5,
            &g,
        )
        .unwrap();
        let d = q.level_set().f.sub(&p.level_set().f).unwrap().max_abs();
        assert!(d <= 1e-12, "{d}");
    }

    #[test]
    fn too_large_patch() {
        let g = Grid2D::new(64, 8.0).unwrap();
        assert!(matches!(
            make_patch(PatchShape::Disc { radius: 2.5 }, 0.05, 0.5, &g),
            Err(Error::PatchTooLarge { .. })
        ));
        assert!(make_patch(PatchShape::Disc { radius: 1.0 }, 1.2, 0.5, &g).is_err());
    }

    #[test]
    fn tangent_field_properties() {
        let p = disc(512);
        let x0 = tangent_field(&p);
        assert!(divergence(&x0).max_abs() < 1e-10);
        // at the boundary point (R, 0) from the centre, X0 = (0, c |grad f|) with c ~ 1
        let g = p.grid();
        let n = g.n();
        let (ix, iy) = (n / 2 + n / 8, n / 2);
        assert_eq!(g.coord(ix, iy), (5.0, 4.0));
        assert!(x0.x().at(ix, iy).abs() < 1e-6);
        assert!((x0.y().at(ix, iy) - 1.0).abs() < 5e-3, "{}", x0.y().at(ix, iy));
        let grad = gradient(&p.level_set().f);
        let tang = x0.dot(&grad).unwrap();
        let band = p.band();
        let worst = tang
            .values()
            .iter()
            .zip(p.level_set().f.values())
            .filter(|(_, f)| f.abs() < band)
            .map(|(t, _)| t.abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-9, "{worst}");
        let h = holder_norm(x0.x(), 0.5).unwrap();
        let amp = x0.x().max_abs();
        assert!(h >= amp && h <= 4.0 * amp, "{h} vs {amp}");
    }

    #[test]
    fn vorticity_mean_correction() {
        let p = disc(128);
        let g = p.grid().clone();
        assert_eq!(patch_vorticity(&p, &ScalarField::zeros(&g)).unwrap().max_abs(), 0.0);
        let c = 0.3;
        let raw = ScalarField::constant(&g, c).mul(&p.indicator()).unwrap();
        let expect = c * PI / 64.0;
        assert!((raw.mean() - expect).abs() < 1e-3 * expect);
        let w = patch_vorticity(&p, &ScalarField::constant(&g, c)).unwrap();
        assert!(w.mean().abs() <= 1e-14);
    }

    #[test]
    fn perturbed_disc_contour() {
        let g = Grid2D::new(256, 8.0).unwrap();
        let shape = PatchShape::PerturbedDisc {
            radius: 1.0,
            eps: 0.5,
            amplitude: 0.05,
            modes: 4,
        };
        let p = make_patch(shape, 0.05, 0.5, &g).unwrap();
        let pts = p.contour().points();
        for pt in pts.iter().step_by(37) {
            let (dx, dy) = (pt[0] - 4.0, pt[1] - 4.0);
            let r = dx.hypot(dy);
            assert!((r - shape.boundary_radius(dy.atan2(dx))).abs() < 1e-3);
        }
        let h = boundary_holder(p.contour(), 0.5);
        assert!(h.is_finite() && h > 0.0);
    }
}

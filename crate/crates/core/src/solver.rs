//! Time stepping of the inhomogeneous incompressible Navier-Stokes system
//!
//! ```text
//! rho (d_t u + u . grad u) - lap u + grad P = 0,   div u = 0,
//! d_t rho + u . grad rho = 0,
//! ```
//!
//! with unit viscosity. The density is never advected on the grid: it is
//! rebuilt every step by composing the initial density with the inverse flow
//! map.
//!
//! Each step is a Heun predictor-corrector for the convective term with a
//! Crank-Nicolson viscous term. Writing `w = (u^{n+1} - u^n) / dt`, the
//! momentum equation becomes
//!
//! ```text
//! (I - dt/2 lap) w = P_L [ -rho N + lap u^n + (1 - rho) w ],
//! ```
//!
//! solved by fixed-point iteration on `w`. The map is a contraction with
//! factor `max|1 - rho| <= |eta|`, so convergence fails exactly when the
//! density contrast leaves the small-perturbation regime.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::patch::{density_from_level, tangent_field, tangent_stream_fn, Patch};
use crate::spectral::{
    dealias, divergence, inverse_laplacian_unchecked, laplacian, partial, Grid2D, ScalarField,
    VectorField2,
};
use crate::transport::{
    check_cfl, transport_fn, transport_scalar, transport_vector_formula, transport_vector_pde_between,
    transport_vector_stream, FlowMap,
};

/// Largest `max|div u|` accepted after a step, relative to `max(1, |u|_inf)`.
pub const DIV_TOLERANCE: f64 = 1e-8;

/// A scalar function on the plane, shared between states.
pub type PlaneFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub pressure_iter_tol: f64,
    pub pressure_max_iter: usize,
    pub cfl_safety: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 1.0,
            pressure_iter_tol: 1e-10,
            pressure_max_iter: 200,
            cfl_safety: 0.5,
        }
    }
}

impl SolverConfig {
    pub fn new(dt: f64, t_end: f64) -> Result<Self> {
        let cfg = Self {
            dt,
            t_end,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::config("solver.dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::config(
                "solver.t_end",
                format!("must be non-negative, got {}", self.t_end),
            ));
        }
        if !(self.pressure_iter_tol > 0.0) {
            return Err(Error::config("solver.pressure_iter_tol", "must be positive"));
        }
        if self.pressure_max_iter == 0 {
            return Err(Error::config("solver.pressure_max_iter", "must be at least 1"));
        }
        if !(self.cfl_safety > 0.0) {
            return Err(Error::config("solver.cfl_safety", "must be positive"));
        }
        Ok(())
    }

    /// Number of steps from `t` to `t_end` (never negative).
    pub fn steps_from(&self, t: f64) -> usize {
        ((self.t_end - t) / self.dt).round().max(0.0) as usize
    }
}

/// How the density is carried by the flow.
#[derive(Clone)]
pub enum DensityModel {
    /// `rho = 1`.
    Uniform,
    /// `rho0` sampled on the grid, transported by bilinear composition.
    Field(ScalarField),
    /// `rho = 1 + eta I(f0 o psi^{-1})` with `f0` evaluated exactly and the
    /// jump mollified over `delta`.
    Level { f0: PlaneFn, eta: f64, delta: f64 },
}

impl std::fmt::Debug for DensityModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Uniform => write!(f, "Uniform"),
            Self::Field(_) => write!(f, "Field"),
            Self::Level { eta, delta, .. } => write!(f, "Level {{ eta: {eta}, delta: {delta} }}"),
        }
    }
}

impl DensityModel {
    fn is_uniform(&self) -> bool {
        matches!(self, Self::Uniform | Self::Level { eta: 0.0, .. })
    }

    /// Density at the time of `flow`, and the transported level set if any.
    fn evaluate(&self, flow: &FlowMap) -> Result<(ScalarField, Option<ScalarField>)> {
        Ok(match self {
            Self::Uniform => (ScalarField::constant(flow.grid(), 1.0), None),
            Self::Field(rho0) => (transport_scalar(rho0, flow)?, None),
            Self::Level { f0, eta, delta } => {
                let ft = transport_fn(f0.as_ref(), flow);
                (density_from_level(&ft, *eta, *delta), Some(ft))
            }
        })
    }
}

/// Initial tangent field, with its stream function when one is known.
#[derive(Clone)]
pub struct TangentModel {
    pub x0: VectorField2,
    pub stream: Option<PlaneFn>,
}

impl std::fmt::Debug for TangentModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TangentModel {{ stream: {} }}", self.stream.is_some())
    }
}

impl TangentModel {
    /// `X(t)`: the stream-function form when available, the Jacobian formula
    /// otherwise.
    fn evaluate(&self, flow: &FlowMap) -> Result<VectorField2> {
        match &self.stream {
            Some(g) => Ok(transport_vector_stream(g.as_ref(), flow)),
            None => transport_vector_formula(&self.x0, flow),
        }
    }
}

#[derive(Debug)]
struct Models {
    density: DensityModel,
    tangent: Option<TangentModel>,
}

/// `(t, rho, u, P, psi, X)` advanced by [`SimulationState::step`].
#[derive(Debug, Clone)]
pub struct SimulationState {
    pub t: f64,
    pub steps: u64,
    pub rho: ScalarField,
    pub u: VectorField2,
    pub p: ScalarField,
    pub flow: FlowMap,
    /// `X(t)` from the flow map.
    pub x: Option<VectorField2>,
    /// `X(t)` from semi-Lagrangian steps of its transport equation.
    pub x_pde: Option<VectorField2>,
    /// `f_t = f0 o psi_t^{-1}` when the density comes from a level set.
    pub level: Option<ScalarField>,
    models: Arc<Models>,
}

fn check_solenoidal(u: &VectorField2) -> Result<()> {
    let d = divergence(u).max_abs();
    if d > DIV_TOLERANCE * u.max_abs().max(1.0) {
        return Err(Error::NotSolenoidal(d));
    }
    Ok(())
}

impl SimulationState {
    /// State at `t = 0` with identity flow map. `u0` must be divergence free.
    pub fn new(u0: VectorField2, density: DensityModel) -> Result<Self> {
        check_solenoidal(&u0)?;
        if let DensityModel::Field(r) = &density {
            r.check_same_grid(u0.x())?;
        }
        let grid = u0.grid().clone();
        let flow = FlowMap::identity(&grid);
        let (rho, level) = density.evaluate(&flow)?;
        Ok(Self {
            t: 0.0,
            steps: 0,
            rho,
            u: u0,
            p: ScalarField::zeros(&grid),
            flow,
            x: None,
            x_pde: None,
            level,
            models: Arc::new(Models {
                density,
                tangent: None,
            }),
        })
    }

    /// Adds a tangent field to be transported with the flow.
    pub fn with_tangent(mut self, tangent: TangentModel) -> Result<Self> {
        tangent.x0.x().check_same_grid(self.u.x())?;
        self.x = Some(tangent.evaluate(&self.flow)?);
        self.x_pde = Some(tangent.x0.clone());
        self.models = Arc::new(Models {
            density: self.models.density.clone(),
            tangent: Some(tangent),
        });
        Ok(self)
    }

    /// Density patch with its tangent field `X0`, starting from `u0`.
    pub fn from_patch(patch: &Patch, u0: VectorField2) -> Result<Self> {
        let density = DensityModel::Level {
            f0: patch.level_fn(),
            eta: patch.eta(),
            delta: patch.mollification_width(),
        };
        Self::new(u0, density)?.with_tangent(TangentModel {
            x0: tangent_field(patch),
            stream: Some(tangent_stream_fn(patch)),
        })
    }

    pub fn grid(&self) -> &Grid2D {
        self.u.grid()
    }

    pub fn density_model(&self) -> &DensityModel {
        &self.models.density
    }

    pub fn tangent_model(&self) -> Option<&TangentModel> {
        self.models.tangent.as_ref()
    }

    /// `X(t) = (d_{X0} psi) o psi^{-1}` by the finite-difference Jacobian of
    /// the forward map.
    pub fn x_formula(&self) -> Option<Result<VectorField2>> {
        self.models
            .tangent
            .as_ref()
            .map(|t| transport_vector_formula(&t.x0, &self.flow))
    }

    /// `int rho |u|^2 / 2`.
    pub fn energy(&self) -> f64 {
        let e = self
            .rho
            .mul(&self.u.x().mul(self.u.x()).expect("same grid"))
            .expect("same grid")
            .add(&self.rho.mul(&self.u.y().mul(self.u.y()).expect("same grid")).expect("same grid"))
            .expect("same grid");
        0.5 * e.integral()
    }

    /// `int (rho - 1)`.
    pub fn mass(&self) -> f64 {
        self.rho.integral() - self.grid().length().powi(2)
    }

    /// Advances one step of size `cfg.dt`.
    pub fn step(&self, cfg: &SolverConfig) -> Result<Self> {
        let dt = cfg.dt;
        check_cfl(&[&self.u], dt, cfg.cfl_safety)?;
        let models = &self.models;
        let uniform = models.density.is_uniform();

        let n_now = convection(&self.u)?;
        let lap_u = self.u.map_components(laplacian);

        // predictor
        let (w_pred, _) = momentum_solve(&lap_u, &n_now, &self.rho, None, dt, uniform, cfg)?;
        let u_pred = self.u.add(&w_pred.scale(dt))?;
        let (rho_mid, n_avg) = {
            let rho_pred = if uniform {
                self.rho.clone()
            } else {
                let flow = self.flow.advance_with_safety(&self.u, &u_pred, dt, cfg.cfl_safety)?;
                models.density.evaluate(&flow)?.0
            };
            let rho_mid = self.rho.add(&rho_pred)?.scale(0.5);
            let n_avg = n_now.add(&convection(&u_pred)?)?.scale(0.5);
            (rho_mid, n_avg)
        };

        // corrector
        let (w, p) = momentum_solve(&lap_u, &n_avg, &rho_mid, Some(w_pred), dt, uniform, cfg)?;
        let u = self.u.add(&w.scale(dt))?;
        check_solenoidal(&u)?;

        let flow = self.flow.advance_with_safety(&self.u, &u, dt, cfg.cfl_safety)?;
        let (rho, level) = models.density.evaluate(&flow)?;
        let (x, x_pde) = match (&models.tangent, &self.x_pde) {
            (Some(t), Some(xp)) => (
                Some(t.evaluate(&flow)?),
                Some(transport_vector_pde_between(xp, &self.u, &u, dt)?),
            ),
            _ => (None, None),
        };
        Ok(Self {
            t: self.t + dt,
            steps: self.steps + 1,
            rho,
            u,
            p,
            flow,
            x,
            x_pde,
            level,
            models: Arc::clone(models),
        })
    }

    /// Steps to `cfg.t_end`, calling `observe` on the initial state, after
    /// every `every`-th step and on the final state. `every = 0` observes only
    /// the two ends.
    pub fn run(
        self,
        cfg: &SolverConfig,
        every: usize,
        mut observe: impl FnMut(&SimulationState) -> Result<()>,
    ) -> Result<Self> {
        cfg.validate()?;
        let steps = cfg.steps_from(self.t);
        let mut state = self;
        observe(&state)?;
        for k in 1..=steps {
            state = state.step(cfg)?;
            if k == steps || (every > 0 && k % every == 0) {
                observe(&state)?;
            }
        }
        Ok(state)
    }
}

/// `N(u) = (u . grad) u`, dealiased once after summing the products.
pub fn convection(u: &VectorField2) -> Result<VectorField2> {
    let comp = |i: usize| -> Result<ScalarField> {
        let c = u.component(i);
        let a = u.x().mul(&partial(c, 0))?;
        Ok(dealias(&a.add(&u.y().mul(&partial(c, 1))?)?))
    };
    VectorField2::new(comp(0)?, comp(1)?)
}

/// `(I - c lap)^{-1} P_L r`, in one spectral pass per component.
fn project_helmholtz(r: &VectorField2, c: f64) -> VectorField2 {
    let grid = r.grid().clone();
    let n = grid.n();
    let kabs = grid.wavenumber_abs();
    let sx = r.x().spectrum();
    let sy = r.y().spectrum();
    let mut ox = vec![Complex64::default(); grid.len()];
    let mut oy = vec![Complex64::default(); grid.len()];
    ox.par_chunks_mut(n)
        .zip(oy.par_chunks_mut(n))
        .enumerate()
        .for_each(|(iy, (rx, ry))| {
            for ix in 0..n {
                let i = iy * n + ix;
                let a = kabs[i];
                if a == 0.0 {
                    rx[ix] = sx[i];
                    ry[ix] = sy[i];
                    continue;
                }
                let nyq = grid.is_nyquist(ix) || grid.is_nyquist(iy);
                let (kx, ky) = if nyq {
                    (0.0, 0.0)
                } else {
                    (grid.wavenumber(ix), grid.wavenumber(iy))
                };
                let dot = kx * sx[i] + ky * sy[i];
                let q = dot / (a * a);
                let h = 1.0 / (1.0 + c * a * a);
                rx[ix] = (sx[i] - kx * q) * h;
                ry[ix] = (sy[i] - ky * q) * h;
            }
        });
    VectorField2::new(
        ScalarField::from_spectrum(&grid, ox),
        ScalarField::from_spectrum(&grid, oy),
    )
    .expect("same grid")
}

/// Solves `(I - dt/2 lap) w = P_L[-rho N + lap u + (1 - rho) w]` and returns
/// `w` with the pressure `P = lap^{-1} div(-rho N + lap u + (1 - rho) w)`.
fn momentum_solve(
    lap_u: &VectorField2,
    n: &VectorField2,
    rho: &ScalarField,
    guess: Option<VectorField2>,
    dt: f64,
    uniform: bool,
    cfg: &SolverConfig,
) -> Result<(VectorField2, ScalarField)> {
    let c = 0.5 * dt;
    let base = if uniform {
        lap_u.sub(n)?
    } else {
        VectorField2::new(rho.mul(n.x())?, rho.mul(n.y())?)?
            .scale(-1.0)
            .add(lap_u)?
    };
    let one_minus_rho = rho.map(|r| 1.0 - r);
    let rhs_of = |w: &VectorField2| -> Result<VectorField2> {
        if uniform {
            return Ok(base.clone());
        }
        VectorField2::new(
            base.x().add(&one_minus_rho.mul(w.x())?)?,
            base.y().add(&one_minus_rho.mul(w.y())?)?,
        )
    };
    let pressure = |rhs: &VectorField2| inverse_laplacian_unchecked(&divergence(rhs));

    let mut w = guess.unwrap_or_else(|| VectorField2::zeros(lap_u.grid()));
    if uniform {
        let w = project_helmholtz(&base, c);
        return Ok((w, pressure(&base)));
    }
    let mut residual = f64::INFINITY;
    for _ in 0..cfg.pressure_max_iter {
        let rhs = rhs_of(&w)?;
        let next = project_helmholtz(&rhs, c);
        let diff = next.sub(&w)?.max_abs();
        let scale = next.max_abs();
        residual = if diff == 0.0 { 0.0 } else { diff / scale.max(f64::MIN_POSITIVE) };
        w = next;
        if residual <= cfg.pressure_iter_tol {
            let p = pressure(&rhs_of(&w)?);
            return Ok((w, p));
        }
    }
    Err(Error::PressureDiverged {
        iterations: cfg.pressure_max_iter,
        residual,
    })
}

/// Taylor-Green vortex `(cos k x sin k y, -sin k x cos k y)` with `k = 2 pi / L`,
/// an exact solution decaying like `exp(-2 k^2 t)` at unit viscosity.
pub fn taylor_green(grid: &Grid2D, t: f64) -> VectorField2 {
    let k = grid.base_wavenumber();
    let decay = (-2.0 * k * k * t).exp();
    VectorField2::from_fn(grid, |x, y| {
        [
            decay * (k * x).cos() * (k * y).sin(),
            -decay * (k * x).sin() * (k * y).cos(),
        ]
    })
}

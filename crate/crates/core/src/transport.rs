//! Flow map of a velocity field and transport of scalars and vector fields
//! along it.
//!
//! Both maps are stored as periodic displacements, `psi(x) = x + D(x)` and
//! `psi^{-1}(x) = x + E(x)`, sampled on the grid nodes.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectral::{partial, Grid2D, ScalarField, VectorField2};

/// Bilinear periodic interpolation of grid samples at `(x, y)`.
pub fn sample_bilinear(grid: &Grid2D, values: &[f64], x: f64, y: f64) -> f64 {
    let n = grid.n();
    let h = grid.spacing();
    let (u, v) = (x / h, y / h);
    let (fu, fv) = (u.floor(), v.floor());
    let (s, t) = (u - fu, v - fv);
    let wrap = |k: f64| -> usize {
        let mut i = k as i64;
        let m = n as i64;
        if !(0..m).contains(&i) {
            i = i.rem_euclid(m);
        }
        i as usize
    };
    let (i0, j0) = (wrap(fu), wrap(fv));
    let i1 = if i0 + 1 == n { 0 } else { i0 + 1 };
    let j1 = if j0 + 1 == n { 0 } else { j0 + 1 };
    let (r0, r1) = (j0 * n, j1 * n);
    let a = values[r0 + i0];
    let b = values[r0 + i1];
    let c = values[r1 + i0];
    let d = values[r1 + i1];
    (1.0 - t) * ((1.0 - s) * a + s * b) + t * ((1.0 - s) * c + s * d)
}

fn sample_vec(v: &VectorField2, x: f64, y: f64) -> [f64; 2] {
    let g = v.grid();
    [
        sample_bilinear(g, v.x().values(), x, y),
        sample_bilinear(g, v.y().values(), x, y),
    ]
}

/// Largest displacement per step allowed, in grid cells.
pub const CFL_LIMIT: f64 = 0.5;

/// Checks `max|u| dt <= safety * h` for every supplied velocity.
pub fn check_cfl(us: &[&VectorField2], dt: f64, safety: f64) -> Result<()> {
    let Some(first) = us.first() else {
        return Ok(());
    };
    let h = first.grid().spacing();
    let umax = us
        .iter()
        .map(|u| u.magnitude().max_abs())
        .fold(0.0, f64::max);
    let displacement = umax * dt;
    let limit = safety * h;
    if displacement > limit {
        return Err(Error::Cfl {
            displacement,
            limit,
            suggested_dt: 0.9 * limit / umax,
        });
    }
    Ok(())
}

/// Forward and inverse characteristics at time `t`.
#[derive(Debug, Clone)]
pub struct FlowMap {
    t: f64,
    forward: VectorField2,
    inverse: VectorField2,
}

impl FlowMap {
    pub fn identity(grid: &Grid2D) -> Self {
        Self {
            t: 0.0,
            forward: VectorField2::zeros(grid),
            inverse: VectorField2::zeros(grid),
        }
    }

    /// Rebuilds a map from stored displacements.
    pub fn from_displacements(t: f64, forward: VectorField2, inverse: VectorField2) -> Result<Self> {
        forward.x().check_same_grid(inverse.x())?;
        Ok(Self {
            t,
            forward,
            inverse,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn grid(&self) -> &Grid2D {
        self.forward.grid()
    }

    /// `psi(x) - x` on the grid.
    pub fn forward_displacement(&self) -> &VectorField2 {
        &self.forward
    }

    /// `psi^{-1}(x) - x` on the grid.
    pub fn inverse_displacement(&self) -> &VectorField2 {
        &self.inverse
    }

    /// `psi` at node `(ix, iy)` (not wrapped into the box).
    pub fn forward_at(&self, ix: usize, iy: usize) -> (f64, f64) {
        let (x, y) = self.grid().coord(ix, iy);
        (x + self.forward.x().at(ix, iy), y + self.forward.y().at(ix, iy))
    }

    /// `psi^{-1}` at node `(ix, iy)` (not wrapped into the box).
    pub fn inverse_at(&self, ix: usize, iy: usize) -> (f64, f64) {
        let (x, y) = self.grid().coord(ix, iy);
        (x + self.inverse.x().at(ix, iy), y + self.inverse.y().at(ix, iy))
    }

    /// `psi` at an arbitrary point, by bilinear interpolation of `D`.
    pub fn forward_point(&self, x: f64, y: f64) -> (f64, f64) {
        let d = sample_vec(&self.forward, x, y);
        (x + d[0], y + d[1])
    }

    /// `psi^{-1}` at an arbitrary point, by bilinear interpolation of `E`.
    pub fn inverse_point(&self, x: f64, y: f64) -> (f64, f64) {
        let d = sample_vec(&self.inverse, x, y);
        (x + d[0], y + d[1])
    }

    /// Advances both maps from `t` to `t + dt`. The velocity is `u_now` at
    /// `t` and `u_next` at `t + dt`, interpolated linearly in time and
    /// bilinearly in space; trajectories use the RK2 midpoint rule.
    pub fn advance(&self, u_now: &VectorField2, u_next: &VectorField2, dt: f64) -> Result<Self> {
        self.advance_with_safety(u_now, u_next, dt, CFL_LIMIT)
    }

    pub fn advance_with_safety(
        &self,
        u_now: &VectorField2,
        u_next: &VectorField2,
        dt: f64,
        safety: f64,
    ) -> Result<Self> {
        let grid = self.grid().clone();
        u_now.x().check_same_grid(self.forward.x())?;
        u_next.x().check_same_grid(self.forward.x())?;
        check_cfl(&[u_now, u_next], dt, safety)?;
        let u_half = u_now.add(u_next)?.scale(0.5);
        let n = grid.n();

        let fwd: Vec<[f64; 2]> = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let (px, py) = self.forward_at(i % n, i / n);
                let a = sample_vec(u_now, px, py);
                let (mx, my) = (px + 0.5 * dt * a[0], py + 0.5 * dt * a[1]);
                let b = sample_vec(&u_half, mx, my);
                [self.forward.x().values()[i] + dt * b[0], self.forward.y().values()[i] + dt * b[1]]
            })
            .collect();

        let inv: Vec<[f64; 2]> = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let (x, y) = grid.coord(i % n, i / n);
                let a = [u_next.x().values()[i], u_next.y().values()[i]];
                let (mx, my) = (x - 0.5 * dt * a[0], y - 0.5 * dt * a[1]);
                let b = sample_vec(&u_half, mx, my);
                let (dx, dy) = (x - dt * b[0], y - dt * b[1]);
                let e = sample_vec(&self.inverse, dx, dy);
                [dx + e[0] - x, dy + e[1] - y]
            })
            .collect();

        let split = |v: Vec<[f64; 2]>| -> VectorField2 {
            let (a, b): (Vec<f64>, Vec<f64>) = v.into_iter().map(|p| (p[0], p[1])).unzip();
            VectorField2::new(
                ScalarField::new(&grid, a).expect("grid length"),
                ScalarField::new(&grid, b).expect("grid length"),
            )
            .expect("same grid")
        };
        Ok(Self {
            t: self.t + dt,
            forward: split(fwd),
            inverse: split(inv),
        })
    }

    /// Centred finite-difference Jacobian of `psi` at every node, as
    /// `[[d1 psi1, d2 psi1], [d1 psi2, d2 psi2]]` fields.
    pub fn forward_jacobian(&self) -> [[ScalarField; 2]; 2] {
        [0, 1].map(|i| {
            [0, 1].map(|j| {
                let d = centred_difference(self.forward.component(i), j);
                if i == j {
                    d.map(|v| v + 1.0)
                } else {
                    d
                }
            })
        })
    }

    /// `det D psi` at every node.
    pub fn jacobian_determinant(&self) -> ScalarField {
        let [[a, b], [c, d]] = self.forward_jacobian();
        let ad = a.mul(&d).expect("same grid");
        let bc = b.mul(&c).expect("same grid");
        ad.sub(&bc).expect("same grid")
    }

    /// Largest `|psi^{-1}(psi(x)) - x|` over the nodes, in grid cells.
    pub fn composition_defect(&self) -> f64 {
        let grid = self.grid();
        let n = grid.n();
        let h = grid.spacing();
        (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let (x, y) = grid.coord(i % n, i / n);
                let (px, py) = self.forward_at(i % n, i / n);
                let (qx, qy) = self.inverse_point(px, py);
                (qx - x).hypot(qy - y) / h
            })
            .reduce(|| 0.0, f64::max)
    }
}

/// Second-order centred difference along `axis`.
pub fn centred_difference(f: &ScalarField, axis: usize) -> ScalarField {
    let grid = f.grid();
    let n = grid.n();
    let inv = 0.5 / grid.spacing();
    let v = f.values();
    let out = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let (ix, iy) = (i % n, i / n);
            let (p, m) = if axis == 0 {
                (iy * n + (ix + 1) % n, iy * n + (ix + n - 1) % n)
            } else {
                (((iy + 1) % n) * n + ix, ((iy + n - 1) % n) * n + ix)
            };
            (v[p] - v[m]) * inv
        })
        .collect();
    ScalarField::new(grid, out).expect("grid length")
}

/// `f0 o psi^{-1}` by bilinear interpolation of `f0`.
pub fn transport_scalar(f0: &ScalarField, fm: &FlowMap) -> Result<ScalarField> {
    f0.check_same_grid(fm.forward.x())?;
    let grid = fm.grid();
    let n = grid.n();
    let out = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let (x, y) = fm.inverse_at(i % n, i / n);
            sample_bilinear(grid, f0.values(), x, y)
        })
        .collect();
    ScalarField::new(grid, out)
}

/// `f0 o psi^{-1}` with `f0` evaluated exactly at the back-traced points.
pub fn transport_fn(f0: &(dyn Fn(f64, f64) -> f64 + Sync), fm: &FlowMap) -> ScalarField {
    let grid = fm.grid();
    let n = grid.n();
    let out = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let (x, y) = fm.inverse_at(i % n, i / n);
            f0(x, y)
        })
        .collect();
    ScalarField::new(grid, out).expect("grid length")
}

/// `X(t) = (d_{X0} psi) o psi^{-1}`: the finite-difference Jacobian of the
/// forward map applied to `X0`, then composed with the inverse map.
pub fn transport_vector_formula(x0: &VectorField2, fm: &FlowMap) -> Result<VectorField2> {
    x0.x().check_same_grid(fm.forward.x())?;
    let jac = fm.forward_jacobian();
    let push = |i: usize| -> Result<ScalarField> {
        let a = jac[i][0].mul(x0.x())?;
        a.add(&jac[i][1].mul(x0.y())?)
    };
    let pushed = VectorField2::new(push(0)?, push(1)?)?;
    VectorField2::new(
        transport_scalar(pushed.x(), fm)?,
        transport_scalar(pushed.y(), fm)?,
    )
}

/// `X(t) = grad^perp (G0 o psi^{-1})` for `X0 = grad^perp G0`.
///
/// For an area-preserving flow this equals `(d_{X0} psi) o psi^{-1}`; `G0`
/// is evaluated exactly at the back-traced points, so the result is
/// divergence free to round-off and needs no interpolation of `X0`.
pub fn transport_vector_stream(g0: &(dyn Fn(f64, f64) -> f64 + Sync), fm: &FlowMap) -> VectorField2 {
    crate::spectral::perp_gradient(&transport_fn(g0, fm))
}

/// `(X . grad) u` with spectral derivatives of `u`, not dealiased.
pub fn directional_source(x: &VectorField2, u: &VectorField2) -> Result<VectorField2> {
    let comp = |i: usize| -> Result<ScalarField> {
        let a = x.x().mul(&partial(u.component(i), 0))?;
        a.add(&x.y().mul(&partial(u.component(i), 1))?)
    };
    VectorField2::new(comp(0)?, comp(1)?)
}

/// One semi-Lagrangian step of `d_t X + u . grad X = d_X u` with a frozen
/// velocity.
pub fn transport_vector_pde(x: &VectorField2, u: &VectorField2, dt: f64) -> Result<VectorField2> {
    transport_vector_pde_between(x, u, u, dt)
}

/// Semi-Lagrangian step of `d_t X + u . grad X = d_X u` from `t` to `t + dt`.
///
/// The departure point comes from the midpoint back-trace used by
/// [`FlowMap::advance`]; the source `d_X u` is integrated with Heun's rule,
/// `X(t, x_d) + dt/2 [(d_X u)(t, x_d) + (d_{X*} u)(t + dt, x)]` with the
/// explicit predictor `X* = X(t, x_d) + dt (d_X u)(t, x_d)`.
pub fn transport_vector_pde_between(
    x: &VectorField2,
    u_now: &VectorField2,
    u_next: &VectorField2,
    dt: f64,
) -> Result<VectorField2> {
    x.x().check_same_grid(u_now.x())?;
    check_cfl(&[u_now, u_next], dt, CFL_LIMIT)?;
    let grid = x.grid().clone();
    let n = grid.n();
    let u_half = u_now.add(u_next)?.scale(0.5);
    let src = directional_source(x, u_now)?;
    let grad_next: [[ScalarField; 2]; 2] =
        [0, 1].map(|i| [0, 1].map(|j| partial(u_next.component(i), j)));
    let out: Vec<[f64; 2]> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let (px, py) = grid.coord(i % n, i / n);
            let a = [u_next.x().values()[i], u_next.y().values()[i]];
            let (mx, my) = (px - 0.5 * dt * a[0], py - 0.5 * dt * a[1]);
            let b = sample_vec(&u_half, mx, my);
            let (dx, dy) = (px - dt * b[0], py - dt * b[1]);
            let xd = sample_vec(x, dx, dy);
            let sd = sample_vec(&src, dx, dy);
            let pred = [xd[0] + dt * sd[0], xd[1] + dt * sd[1]];
            let g = |r: usize, c: usize| grad_next[r][c].values()[i];
            let s1 = [
                pred[0] * g(0, 0) + pred[1] * g(0, 1),
                pred[0] * g(1, 0) + pred[1] * g(1, 1),
            ];
            [
                xd[0] + 0.5 * dt * (sd[0] + s1[0]),
                xd[1] + 0.5 * dt * (sd[1] + s1[1]),
            ]
        })
        .collect();
    let (a, b): (Vec<f64>, Vec<f64>) = out.into_iter().map(|p| (p[0], p[1])).unzip();
    VectorField2::new(ScalarField::new(&grid, a)?, ScalarField::new(&grid, b)?)
}

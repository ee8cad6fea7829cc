//! Striated norms, boundary regularity and invariant residuals of a state.
//!
//! Every report is a pure function of a [`StateView`], so rows recomputed
//! from reloaded snapshots match the originals bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{
    besov_norm_vector, holder_norm_vector, multiplier_norm_probe, standard_probes, BesovIndex,
};
use crate::paradiff::ParaConfig;
use crate::patch::{boundary_holder, extract_loops, Contour};
use crate::solver::SimulationState;
use crate::spectral::{divergence, gradient, partial, snapshot, Grid2D, ScalarField, VectorField2};

/// Settings shared by every diagnostic row of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsConfig {
    /// Holder exponent of the striated regularity.
    pub eps: f64,
    /// Lebesgue exponent of the Besov indices.
    pub p: f64,
    /// Half width of the boundary band `|f_t| < band` for the tangency check.
    pub band: f64,
    /// Seed of the multiplier probe family.
    pub seed: u64,
    /// Random probes per dyadic shell (0 disables the multiplier column).
    pub probes_per_shell: usize,
    /// Boundary points used as centres of localised probes.
    pub probe_centers: usize,
    /// `|X| > support_threshold * max|X|` defines the support of `X`.
    pub support_threshold: f64,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            eps: 0.5,
            p: 3.0,
            band: 0.25,
            seed: 0,
            probes_per_shell: 2,
            probe_centers: 4,
            support_threshold: 1e-3,
        }
    }
}

impl DiagnosticsConfig {
    /// `B^{2/p + eps - 2}_{p,1}`, the space of `d_X u`.
    pub fn striated_index(&self) -> BesovIndex {
        BesovIndex::homogeneous(2.0 / self.p + self.eps - 2.0, self.p, 1.0)
    }

    /// `B^{2/p - 1}_{p,1}`, the critical velocity space.
    pub fn velocity_index(&self) -> BesovIndex {
        BesovIndex::homogeneous(2.0 / self.p - 1.0, self.p, 1.0)
    }
}

/// The fields a diagnostic row depends on.
#[derive(Debug, Clone, Copy)]
pub struct StateView<'a> {
    pub t: f64,
    pub rho: &'a ScalarField,
    pub u: &'a VectorField2,
    pub x: Option<&'a VectorField2>,
    pub level: Option<&'a ScalarField>,
}

impl SimulationState {
    pub fn view(&self) -> StateView<'_> {
        StateView {
            t: self.t,
            rho: &self.rho,
            u: &self.u,
            x: self.x.as_ref(),
            level: self.level.as_ref(),
        }
    }
}

/// Norms along the tangent field and of the patch boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StriatedReport {
    pub holder_x: f64,
    pub besov_dxu: f64,
    pub besov_txu: f64,
    /// Norm of `d_X u - T_X u` in the same space.
    pub bony_residual: f64,
    pub boundary_holder: f64,
    pub multiplier_probe: f64,
}

/// Residuals of the identities the flow should preserve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub div_u: f64,
    pub div_x: f64,
    pub tangency: f64,
    pub mass: f64,
    pub energy: f64,
    pub area: f64,
    pub supp_x_diam: f64,
    /// Number of zero contours of `f_t` (1 for an intact patch).
    pub components: usize,
}

/// `(X . grad) v` per component, with exact spectral derivatives.
pub fn directional_vector(x: &VectorField2, v: &VectorField2) -> Result<VectorField2> {
    let comp = |i: usize| -> Result<ScalarField> {
        let c = v.component(i);
        x.x().mul(&partial(c, 0))?.add(&x.y().mul(&partial(c, 1))?)
    };
    VectorField2::new(comp(0)?, comp(1)?)
}

fn mean_free(v: &VectorField2) -> VectorField2 {
    v.map_components(ScalarField::without_mean)
}

/// The single zero contour of `level`, or `None` when it split or vanished.
fn boundary(level: &ScalarField) -> (Option<Contour>, usize) {
    let loops = extract_loops(level);
    let k = loops.len();
    match loops.first() {
        Some(c) if k == 1 && c.is_closed() => (Some(c.resample_uniform(level.grid().spacing())), k),
        _ => (None, k),
    }
}

pub fn striated_report(view: &StateView<'_>, cfg: &DiagnosticsConfig) -> Result<StriatedReport> {
    let idx = cfg.striated_index();
    let (holder_x, besov_dxu, besov_txu, bony_residual) = match view.x {
        Some(x) => {
            // the means carry no homogeneous norm; they vanish analytically
            // when div X = 0 and are removed explicitly here
            let dxu = mean_free(&directional_vector(x, view.u)?);
            let txu = mean_free(&ParaConfig::default().para_vector_field_vec(x, view.u)?);
            (
                holder_norm_vector(x, cfg.eps)?,
                besov_norm_vector(&dxu, &idx)?,
                besov_norm_vector(&txu, &idx)?,
                besov_norm_vector(&dxu.sub(&txu)?, &idx)?,
            )
        }
        None => (f64::NAN, f64::NAN, f64::NAN, f64::NAN),
    };
    let contour = view.level.map(boundary);
    let boundary_holder = match &contour {
        Some((Some(c), _)) => boundary_holder(c, cfg.eps),
        _ => f64::NAN,
    };
    let multiplier_probe = if cfg.probes_per_shell == 0 {
        f64::NAN
    } else {
        let grid = view.rho.grid();
        let centers: Vec<(f64, f64)> = match &contour {
            Some((Some(c), _)) if cfg.probe_centers > 0 => {
                let m = c.len();
                (0..cfg.probe_centers)
                    .map(|i| {
                        let q = c.points()[i * m / cfg.probe_centers];
                        (q[0], q[1])
                    })
                    .collect()
            }
            _ => Vec::new(),
        };
        let probes = standard_probes(grid, cfg.seed, cfg.probes_per_shell, &centers);
        let phi = view.rho.map(|r| r - 1.0);
        let vi = cfg.velocity_index();
        multiplier_norm_probe(&phi, &vi, &vi, &probes)?
    };
    Ok(StriatedReport {
        holder_x,
        besov_dxu,
        besov_txu,
        bony_residual,
        boundary_holder,
        multiplier_probe,
    })
}

/// `sup_band |X . grad f| / (|X|_inf sup_band |grad f|)` over `|f| < band`.
pub fn tangency_residual(x: &VectorField2, level: &ScalarField, band: f64) -> Result<f64> {
    let g = gradient(level);
    let dot = x.dot(&g)?;
    let gm = g.magnitude();
    let (mut num, mut den) = (0.0f64, 0.0f64);
    for (i, &f) in level.values().iter().enumerate() {
        if f.abs() < band {
            num = num.max(dot.values()[i].abs());
            den = den.max(gm.values()[i]);
        }
    }
    let xm = x.magnitude().max_abs();
    if den == 0.0 || xm == 0.0 {
        return Ok(0.0);
    }
    Ok(num / (xm * den))
}

/// Diameter of `{|v| > threshold * max|v|}`, measured in coordinates
/// centred on the box and taken as the largest width over 64 directions.
pub fn support_diameter(v: &VectorField2, threshold: f64) -> f64 {
    let grid = v.grid();
    let n = grid.n();
    let mag = v.magnitude();
    let cut = threshold * mag.max_abs();
    if cut == 0.0 {
        return 0.0;
    }
    let length = grid.length();
    let (cx, cy) = grid.center();
    const DIRS: usize = 64;
    let mut lo = [f64::INFINITY; DIRS];
    let mut hi = [f64::NEG_INFINITY; DIRS];
    for (i, &m) in mag.values().iter().enumerate() {
        if m <= cut {
            continue;
        }
        let (x, y) = grid.coord(i % n, i / n);
        let (dx, dy) = (
            crate::lp::wrap(x - cx, length),
            crate::lp::wrap(y - cy, length),
        );
        for d in 0..DIRS {
            let a = std::f64::consts::PI * d as f64 / DIRS as f64;
            let s = dx * a.cos() + dy * a.sin();
            lo[d] = lo[d].min(s);
            hi[d] = hi[d].max(s);
        }
    }
    (0..DIRS).map(|d| hi[d] - lo[d]).fold(0.0, f64::max)
}

pub fn invariant_report(view: &StateView<'_>, cfg: &DiagnosticsConfig) -> Result<InvariantReport> {
    let div_u = divergence(view.u).max_abs();
    let (div_x, supp_x_diam) = match view.x {
        Some(x) => (divergence(x).max_abs(), support_diameter(x, cfg.support_threshold)),
        None => (f64::NAN, f64::NAN),
    };
    let tangency = match (view.x, view.level) {
        (Some(x), Some(f)) => tangency_residual(x, f, cfg.band)?,
        _ => f64::NAN,
    };
    let (area, components) = match view.level.map(boundary) {
        Some((Some(c), k)) => (c.area(), k),
        Some((None, k)) => (f64::NAN, k),
        None => (f64::NAN, 0),
    };
    let grid = view.rho.grid();
    let mass = view.rho.integral() - grid.length().powi(2);
    let energy = {
        let e2 = view.u.x().mul(view.u.x())?.add(&view.u.y().mul(view.u.y())?)?;
        0.5 * view.rho.mul(&e2)?.integral()
    };
    Ok(InvariantReport {
        div_u,
        div_x,
        tangency,
        mass,
        energy,
        area,
        supp_x_diam,
        components,
    })
}

/// One line of `series.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub t: f64,
    pub striated: StriatedReport,
    pub invariants: InvariantReport,
}

impl SeriesRow {
    pub const HEADER: &'static str = "t,holder_X,besov_dXu,besov_TXu,bony_residual,boundary_holder,div_u,div_X,tangency,mass,energy,area,suppX_diam,multiplier_probe";

    /// Both reports from fresh copies of the fields, so that cached spectra
    /// of in-memory states cannot make the row differ from one recomputed
    /// after a reload.
    pub fn compute(view: &StateView<'_>, cfg: &DiagnosticsConfig) -> Result<Self> {
        let (rho, u) = (view.rho.uncached(), view.u.uncached());
        let x = view.x.map(VectorField2::uncached);
        let level = view.level.map(ScalarField::uncached);
        let view = &StateView {
            t: view.t,
            rho: &rho,
            u: &u,
            x: x.as_ref(),
            level: level.as_ref(),
        };
        Ok(Self {
            t: view.t,
            striated: striated_report(view, cfg)?,
            invariants: invariant_report(view, cfg)?,
        })
    }

    /// Values in CSV column order.
    pub fn values(&self) -> [f64; 14] {
        let s = &self.striated;
        let i = &self.invariants;
        [
            self.t,
            s.holder_x,
            s.besov_dxu,
            s.besov_txu,
            s.bony_residual,
            s.boundary_holder,
            i.div_u,
            i.div_x,
            i.tangency,
            i.mass,
            i.energy,
            i.area,
            i.supp_x_diam,
            s.multiplier_probe,
        ]
    }

    /// Comma-separated values in shortest round-trip form.
    pub fn csv_line(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.values().iter().enumerate() {
            if k > 0 {
                s.push(',');
            }
            write!(s, "{v:e}").expect("write to string");
        }
        s
    }
}

/// Running time integrals (trapezoid rule) and suprema of the striated
/// quantities: the offline reconstruction of the aggregate bound.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KappaAccumulator {
    last: Option<(f64, [f64; 3])>,
    integrals: [f64; 3],
    sup_holder: f64,
    sup_boundary: f64,
}

impl KappaAccumulator {
    pub const HEADER: &'static str =
        "t,int_besov_dXu,int_besov_TXu,int_bony_residual,sup_holder_X,sup_boundary_holder,kappa";

    /// Adds a row and returns the corresponding `kappa.csv` line.
    pub fn push(&mut self, row: &SeriesRow) -> String {
        let s = &row.striated;
        let now = [s.besov_dxu, s.besov_txu, s.bony_residual];
        if let Some((t0, prev)) = self.last {
            let dt = row.t - t0;
            for k in 0..3 {
                self.integrals[k] += 0.5 * dt * (prev[k] + now[k]);
            }
        }
        self.last = Some((row.t, now));
        self.sup_holder = self.sup_holder.max(s.holder_x);
        self.sup_boundary = self.sup_boundary.max(s.boundary_holder);
        let kappa = self.sup_holder + self.integrals[0];
        format!(
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            row.t,
            self.integrals[0],
            self.integrals[1],
            self.integrals[2],
            self.sup_holder,
            self.sup_boundary,
            kappa
        )
    }
}

/// Fields of a state read back from disk.
#[derive(Debug, Clone)]
pub struct LoadedState {
    pub t: f64,
    pub rho: ScalarField,
    pub u: VectorField2,
    pub p: ScalarField,
    pub x: Option<VectorField2>,
    pub x_pde: Option<VectorField2>,
    pub level: Option<ScalarField>,
}

impl LoadedState {
    pub fn view(&self) -> StateView<'_> {
        StateView {
            t: self.t,
            rho: &self.rho,
            u: &self.u,
            x: self.x.as_ref(),
            level: self.level.as_ref(),
        }
    }

    pub fn grid(&self) -> &Grid2D {
        self.rho.grid()
    }
}

/// Writes every field of `state` into `dir` as `<name>.snap`.
pub fn save_state(dir: &Path, state: &SimulationState) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let t = state.t;
    let put = |name: &str, f: &ScalarField| snapshot::write(&dir.join(format!("{name}.snap")), f, name, t);
    put("rho", &state.rho)?;
    put("u_x", state.u.x())?;
    put("u_y", state.u.y())?;
    put("p", &state.p)?;
    if let Some(x) = &state.x {
        put("x_x", x.x())?;
        put("x_y", x.y())?;
    }
    if let Some(x) = &state.x_pde {
        put("xpde_x", x.x())?;
        put("xpde_y", x.y())?;
    }
    if let Some(f) = &state.level {
        put("level", f)?;
    }
    let fwd = state.flow.forward_displacement();
    let inv = state.flow.inverse_displacement();
    put("fwd_x", fwd.x())?;
    put("fwd_y", fwd.y())?;
    put("inv_x", inv.x())?;
    put("inv_y", inv.y())?;
    Ok(())
}

/// Reads the fields written by [`save_state`].
pub fn load_state(dir: &Path) -> Result<LoadedState> {
    let get = |name: &str| -> Result<Option<snapshot::Snapshot>> {
        let path = dir.join(format!("{name}.snap"));
        if path.exists() {
            snapshot::read(&path).map(Some)
        } else {
            Ok(None)
        }
    };
    let need = |name: &str| -> Result<snapshot::Snapshot> {
        get(name)?.ok_or_else(|| Error::Snapshot {
            path: dir.join(format!("{name}.snap")),
            message: "missing".into(),
        })
    };
    let pair = |a: &str, b: &str| -> Result<Option<VectorField2>> {
        match (get(a)?, get(b)?) {
            (Some(x), Some(y)) => Ok(Some(VectorField2::new(x.field, y.field)?)),
            _ => Ok(None),
        }
    };
    let rho = need("rho")?;
    Ok(LoadedState {
        t: rho.header.t,
        u: VectorField2::new(need("u_x")?.field, need("u_y")?.field)?,
        p: need("p")?.field,
        x: pair("x_x", "x_y")?,
        x_pde: pair("xpde_x", "xpde_y")?,
        level: get("level")?.map(|s| s.field),
        rho: rho.field,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biot_savart::velocity_from_vorticity;
    use crate::patch::{make_patch, patch_vorticity, tangent_field, PatchShape};
    use crate::solver::{SimulationState, SolverConfig};

    fn state() -> SimulationState {
        let g = Grid2D::new(128, 8.0).unwrap();
        let p = make_patch(PatchShape::Disc { radius: 1.0 }, 0.05, 0.5, &g).unwrap();
        let omega = patch_vorticity(&p, &ScalarField::constant(&g, 0.2)).unwrap();
        SimulationState::from_patch(&p, velocity_from_vorticity(&omega).unwrap()).unwrap()
    }

    #[test]
    fn initial_row_matches_patch_construction() {
        let s = state();
        let cfg = DiagnosticsConfig::default();
        let row = SeriesRow::compute(&s.view(), &cfg).unwrap();
        let g = s.grid().clone();
        let p = make_patch(PatchShape::Disc { radius: 1.0 }, 0.05, 0.5, &g).unwrap();
        let x0 = tangent_field(&p);
        assert_eq!(row.striated.holder_x, holder_norm_vector(&x0, 0.5).unwrap());
        assert_eq!(row.striated.boundary_holder, boundary_holder(p.contour(), 0.5));
        assert!(row.invariants.div_u < 1e-10);
        assert!(row.invariants.div_x < 1e-10);
        assert!(row.invariants.tangency < 1e-6, "{}", row.invariants.tangency);
        assert_eq!(row.invariants.components, 1);
        assert!((row.invariants.area - p.area()).abs() < 1e-12);
        assert!(row.striated.multiplier_probe.is_finite());
        assert_eq!(SeriesRow::HEADER.split(',').count(), row.values().len());
        assert_eq!(row.csv_line().split(',').count(), 14);
    }

    #[test]
    fn reload_reproduces_row() {
        let s = state().step(&SolverConfig::new(0.01, 1.0).unwrap()).unwrap();
        let cfg = DiagnosticsConfig::default();
        let dir = tempfile::tempdir().unwrap();
        save_state(dir.path(), &s).unwrap();
        let loaded = load_state(dir.path()).unwrap();
        let a = SeriesRow::compute(&s.view(), &cfg).unwrap().csv_line();
        let b = SeriesRow::compute(&loaded.view(), &cfg).unwrap().csv_line();
        assert_eq!(a, b);
    }

    #[test]
    fn frozen_flow_keeps_x_norms() {
        let s = state();
        let g = s.grid().clone();
        let frozen = SimulationState::new(VectorField2::zeros(&g), s.density_model().clone())
            .unwrap()
            .with_tangent(s.tangent_model().unwrap().clone())
            .unwrap();
        let cfg = DiagnosticsConfig {
            probes_per_shell: 0,
            ..Default::default()
        };
        let r0 = striated_report(&frozen.view(), &cfg).unwrap();
        let end = frozen
            .run(&SolverConfig::new(0.01, 0.03).unwrap(), 0, |_| Ok(()))
            .unwrap();
        let r1 = striated_report(&end.view(), &cfg).unwrap();
        assert_eq!(r0.holder_x, r1.holder_x);
        assert_eq!(r0.boundary_holder, r1.boundary_holder);
    }

    #[test]
    fn kappa_integrates_trapezoid() {
        let mut k = KappaAccumulator::default();
        let mut row = SeriesRow {
            t: 0.0,
            striated: StriatedReport {
                holder_x: 1.0,
                besov_dxu: 2.0,
                besov_txu: 1.0,
                bony_residual: 0.0,
                boundary_holder: 0.4,
                multiplier_probe: 0.0,
            },
            invariants: InvariantReport {
                div_u: 0.0,
                div_x: 0.0,
                tangency: 0.0,
                mass: 0.0,
                energy: 0.0,
                area: 0.0,
                supp_x_diam: 0.0,
                components: 1,
            },
        };
        k.push(&row);
        row.t = 0.5;
        row.striated.besov_dxu = 4.0;
        let line = k.push(&row);
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(v[1], 1.5);
        assert_eq!(v[6], 2.5);
    }

    #[test]
    fn support_of_a_bump() {
        let g = Grid2D::new(128, 8.0).unwrap();
        let (cx, cy) = g.center();
        let v = VectorField2::from_fn(&g, |x, y| {
            let r = (x - cx).hypot(y - cy);
            [if r < 1.0 { 1.0 } else { 0.0 }, 0.0]
        });
        let d = support_diameter(&v, 1e-3);
        assert!((d - 2.0).abs() < 3.0 * g.spacing(), "{d}");
    }
}

//! The persistence experiment: a density patch with a Holder-perturbed
//! boundary, carried by a small vortical flow, tracked together with its
//! tangent field.
//!
//! The run collects everything the persistence and transport checks need,
//! so the same data serves the CLI (`reproduce persistence`) and the
//! acceptance test target.

use serde::{Deserialize, Serialize};

use crate::biot_savart::velocity_from_vorticity;
use crate::diagnostics::{DiagnosticsConfig, KappaAccumulator, SeriesRow};
use crate::error::Result;
use crate::patch::{make_patch, patch_vorticity, Patch, PatchShape};
use crate::solver::{SimulationState, SolverConfig};
use crate::spectral::{divergence, gradient, Grid2D, ScalarField, VectorField2};
use crate::transport::sample_bilinear;

/// Parameters of the persistence run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersistenceSetup {
    pub n: usize,
    pub length: f64,
    pub shape: PatchShape,
    pub eta: f64,
    pub eps: f64,
    /// Vorticity inside the patch is `amplitude (1 + strain (x - c1)(y - c2) / R^2)`.
    pub vorticity_amplitude: f64,
    pub vorticity_strain: f64,
    pub solver: SolverConfig,
    /// Full diagnostics every this many steps.
    pub every: usize,
    pub diagnostics: DiagnosticsConfig,
}

impl Default for PersistenceSetup {
    fn default() -> Self {
        Self {
            n: 256,
            length: 8.0,
            shape: PatchShape::PerturbedDisc {
                radius: 1.0,
                eps: 0.5,
                amplitude: 0.05,
                modes: 4,
            },
            eta: 0.05,
            eps: 0.5,
            vorticity_amplitude: 0.2,
            vorticity_strain: 0.5,
            solver: SolverConfig {
                dt: 0.01,
                t_end: 2.0,
                ..SolverConfig::default()
            },
            every: 10,
            diagnostics: DiagnosticsConfig::default(),
        }
    }
}

impl PersistenceSetup {
    pub fn with_resolution(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn grid(&self) -> Result<Grid2D> {
        Grid2D::new(self.n, self.length)
    }

    /// Patch, initial vorticity and the state built from them.
    pub fn initial_state(&self) -> Result<(Patch, SimulationState)> {
        let grid = self.grid()?;
        let patch = make_patch(self.shape, self.eta, self.eps, &grid)?;
        let (cx, cy) = patch.center();
        let r = self.shape.nominal_radius();
        let (a, s) = (self.vorticity_amplitude, self.vorticity_strain);
        let profile =
            ScalarField::from_fn(&grid, |x, y| a * (1.0 + s * (x - cx) * (y - cy) / (r * r)));
        let omega = patch_vorticity(&patch, &profile)?;
        let u0 = velocity_from_vorticity(&omega)?;
        let state = SimulationState::from_patch(&patch, u0)?;
        Ok((patch, state))
    }

    /// Diagnostics settings with the band of `patch`.
    pub fn diagnostics_for(&self, patch: &Patch) -> DiagnosticsConfig {
        DiagnosticsConfig {
            band: patch.band(),
            eps: self.eps,
            ..self.diagnostics
        }
    }
}

/// Quantities sampled at diagnostic times beyond the CSV columns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtraRow {
    pub t: f64,
    /// Relative `L^2` difference between the PDE and formula realisations of `X`.
    pub pde_formula_l2: f64,
    /// `sup |(d_X rho)(t) o psi_t - d_{X0} rho0|` over the mollified patch.
    pub dx_rho: f64,
    pub components: usize,
    pub composition_cells: f64,
}

/// Everything recorded by [`run_persistence`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PersistenceRun {
    pub setup: PersistenceSetup,
    pub rows: Vec<SeriesRow>,
    pub extras: Vec<ExtraRow>,
    pub kappa: Vec<String>,
    /// `(t, max|div u|)` after every step.
    pub div_u: Vec<(f64, f64)>,
    /// `(t, energy)` after every step.
    pub energy: Vec<(f64, f64)>,
    /// `(t, mass)` after every step.
    pub mass: Vec<(f64, f64)>,
    pub seconds: f64,
}

/// `X . grad rho` with spectral derivatives.
fn dx_of(x: &VectorField2, rho: &ScalarField) -> Result<ScalarField> {
    x.dot(&gradient(rho))
}

/// Runs the experiment, calling `progress` with each new diagnostic row.
pub fn run_persistence(
    setup: &PersistenceSetup,
    progress: impl FnMut(&SeriesRow, &ExtraRow),
) -> Result<PersistenceRun> {
    Ok(run_persistence_with_state(setup, progress)?.0)
}

/// [`run_persistence`] that also hands back the final state.
pub fn run_persistence_with_state(
    setup: &PersistenceSetup,
    mut progress: impl FnMut(&SeriesRow, &ExtraRow),
) -> Result<(PersistenceRun, SimulationState)> {
    let start = std::time::Instant::now();
    let (patch, state) = setup.initial_state()?;
    let diag = setup.diagnostics_for(&patch);
    let x0 = state.x.clone().expect("patch state carries X");
    let dx_rho0 = dx_of(&x0, &state.rho)?;
    let mollified: Vec<bool> = patch
        .level_set()
        .f
        .values()
        .iter()
        .map(|f| f.abs() < 5.0 * patch.mollification_width())
        .collect();
    let every = setup.every.max(1);

    let mut out = PersistenceRun {
        setup: *setup,
        rows: Vec::new(),
        extras: Vec::new(),
        kappa: Vec::new(),
        div_u: Vec::new(),
        energy: Vec::new(),
        mass: Vec::new(),
        seconds: 0.0,
    };
    let mut kappa = KappaAccumulator::default();
    let steps = setup.solver.steps_from(0.0);
    let end = state.run(&setup.solver, 1, |s| {
        out.div_u.push((s.t, divergence(&s.u).max_abs()));
        out.energy.push((s.t, s.energy()));
        out.mass.push((s.t, s.mass()));
        let k = s.steps as usize;
        if !k.is_multiple_of(every) && k != steps {
            return Ok(());
        }
        let row = SeriesRow::compute(&s.view(), &diag)?;
        let x = s.x.as_ref().expect("patch state carries X");
        let formula = s.x_formula().expect("patch state carries X")?;
        let pde = s.x_pde.as_ref().expect("patch state carries X");
        let pde_formula_l2 = pde.sub(&formula)?.l2_norm() / formula.l2_norm();
        let dx_rho = {
            let a = dx_of(x, &s.rho)?;
            let grid = s.grid();
            let n = grid.n();
            let mut worst: f64 = 0.0;
            for (i, &inside) in mollified.iter().enumerate() {
                if inside {
                    let (px, py) = s.flow.forward_at(i % n, i / n);
                    let v = sample_bilinear(grid, a.values(), px, py);
                    worst = worst.max((v - dx_rho0.values()[i]).abs());
                }
            }
            worst
        };
        let extra = ExtraRow {
            t: s.t,
            pde_formula_l2,
            dx_rho,
            components: row.invariants.components,
            composition_cells: s.flow.composition_defect(),
        };
        out.kappa.push(kappa.push(&row));
        progress(&row, &extra);
        out.rows.push(row);
        out.extras.push(extra);
        Ok(())
    })?;
    out.seconds = start.elapsed().as_secs_f64();
    Ok((out, end))
}

impl PersistenceRun {
    /// `series.csv` contents.
    pub fn series_csv(&self) -> String {
        let mut s = String::from(SeriesRow::HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.csv_line());
            s.push('\n');
        }
        s
    }

    /// `kappa.csv` contents.
    pub fn kappa_csv(&self) -> String {
        let mut s = String::from(KappaAccumulator::HEADER);
        s.push('\n');
        for line in &self.kappa {
            s.push_str(line);
            s.push('\n');
        }
        s
    }
}

/// One measured quantity and the bound it must respect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measure {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

impl Measure {
    /// Passes when `value <= limit` (NaN fails).
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            passed: value <= limit,
        }
    }

    /// Passes when `value >= limit`.
    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            passed: value >= limit,
        }
    }

    /// A yes/no condition, reported as 1 or 0 against a limit of 1.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            limit: 1.0,
            passed: ok,
        }
    }
}

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub id: u32,
    pub title: String,
    pub measures: Vec<Measure>,
    pub seconds: f64,
    /// Wall-clock budget; `None` when the criterion sets none.
    pub budget: Option<f64>,
}

impl Verdict {
    fn new(id: u32, title: &str, measures: Vec<Measure>, seconds: f64, budget: Option<f64>) -> Self {
        let mut measures = measures;
        if let Some(b) = budget {
            measures.push(Measure::at_most("runtime_s", seconds, b));
        }
        Self {
            id,
            title: title.to_string(),
            measures,
            seconds,
            budget,
        }
    }

    pub fn passed(&self) -> bool {
        self.measures.iter().all(|m| m.passed)
    }

    /// `PASS criterion 3: ... | name=value (<= limit) ...`
    pub fn line(&self) -> String {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let parts: Vec<String> = self
            .measures
            .iter()
            .map(|m| {
                let mark = if m.passed { "" } else { " !" };
                format!("{}={:.3e} [{:.3e}]{}", m.name, m.value, m.limit, mark)
            })
            .collect();
        format!(
            "{status} criterion {:>2} {} ({:.1} s) | {}",
            self.id,
            self.title,
            self.seconds,
            parts.join(" ")
        )
    }
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = std::time::Instant::now();
    let out = f()?;
    Ok((out, start.elapsed().as_secs_f64()))
}

/// Ratio of the largest to the smallest entry.
pub fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Dyadic partition of unity at `n = 256`.
pub fn criterion_partition() -> Result<Verdict> {
    let (res, secs) = timed(|| {
        let g = Grid2D::new(256, 2.0 * std::f64::consts::PI)?;
        let a = crate::lp::partition_residual(&g);
        let b = crate::lp::partition_residual(&Grid2D::new(256, 8.0)?);
        Ok(a.max(b))
    })?;
    Ok(Verdict::new(
        1,
        "Littlewood-Paley partition of unity",
        vec![Measure::at_most("max_residual", res, 1e-10)],
        secs,
        Some(1.0),
    ))
}

/// Bony decomposition with the low-frequency correction, 20 random pairs.
pub fn criterion_bony() -> Result<Verdict> {
    use crate::paradiff::{bony_low_correction, ParaConfig};
    use crate::random::random_band_limited;
    use crate::spectral::dealiased_product;
    let (worst, secs) = timed(|| {
        let g = Grid2D::new(256, 2.0 * std::f64::consts::PI)?;
        let cfg = ParaConfig::default();
        let mut worst: f64 = 0.0;
        for pair in 0..20u64 {
            let u = random_band_limited(&g, 1000 + 2 * pair, 80.0);
            let v = random_band_limited(&g, 1001 + 2 * pair, 80.0).map(|x| x + 0.3);
            let [tuv, tvu, r] = cfg.bony(&u, &v)?;
            let mut sum = tuv.add(&tvu)?.add(&r)?;
            sum.add_in_place(&bony_low_correction(&u, &v)?)?;
            let uv = dealiased_product(&u, &v)?;
            worst = worst.max(sum.sub(&uv)?.max_abs() / uv.max_abs());
        }
        Ok(worst)
    })?;
    Ok(Verdict::new(
        2,
        "Bony decomposition exactness",
        vec![Measure::at_most("max_relative_residual", worst, 1e-9)],
        secs,
        Some(10.0),
    ))
}

/// A divergence-free field with `||Delta_j X||_inf ~ 2^{-j eps}` on every
/// shell from `2^j_lo` up to the dealiasing limit: a generic element of the
/// Holder class `C^eps`, not smoother.
pub fn rough_solenoidal(grid: &Grid2D, seed: u64, eps: f64, j_lo: i32) -> VectorField2 {
    use crate::random::random_solenoidal;
    let kmax = grid.max_wavenumber() * 2.0 / 3.0;
    let mut x = VectorField2::zeros(grid);
    let mut j = j_lo;
    while (j as f64).exp2() < kmax {
        let lo = (j as f64).exp2();
        let hi = (2.0 * lo).min(kmax);
        let shell = random_solenoidal(grid, seed.wrapping_add(j as u64 * 7919), lo, hi);
        x = x.add(&shell.scale((-eps * j as f64).exp2())).expect("same grid");
        j += 1;
    }
    x
}

/// Frequency scales `2^q` of the source field in the para-vector field suite.
pub const PARA_SCALES: [i32; 3] = [4, 5, 6];
/// Scales of `u` in the Laplacian commutator suite. The paraproduct only sees
/// `S_{j-4} X`, so the lowest scale must sit well above `2^4` times the
/// lowest lattice frequency before the ratio settles.
pub const LAPLACIAN_SCALES: [i32; 3] = [5, 6, 7];
/// Scales of `v` in the material commutator suite; one lower than the
/// Laplacian ones because the quadratic terms double the frequency.
pub const MATERIAL_SCALES: [i32; 3] = [4, 5, 6];
/// Grid of the commutator suites, wide enough for the top scales above.
pub const COMMUTATOR_N: usize = 512;
const PAIRS_PER_SCALE: u64 = 4;
/// Random pairs per scale in the commutator suites; sized to the time budget.
const COMMUTATOR_PAIRS: u64 = 3;

/// `sup_pairs ||(T_X - d_X) f|| / (||f|| ||X||_eps)` at each scale.
pub fn para_vector_field_ratios(n: usize, scales: &[i32]) -> Result<Vec<f64>> {
    use crate::lp::{besov_norm, holder_norm_vector, BesovIndex};
    use crate::paradiff::ParaConfig;
    use crate::random::random_annulus;
    let (eps, p) = (0.5, 3.0);
    let g = Grid2D::new(n, 2.0 * std::f64::consts::PI)?;
    let out_idx = BesovIndex::homogeneous(2.0 / p + eps - 2.0, p, 1.0);
    let in_idx = BesovIndex::homogeneous(2.0 / p - 1.0, p, 1.0);
    let cfg = ParaConfig::default();
    let mut ratios = Vec::new();
    for &q in scales {
        let k = (q as f64).exp2();
        let mut sup: f64 = 0.0;
        for s in 0..PAIRS_PER_SCALE {
            let seed = 40 + 10 * q as u64 + s;
            let x = rough_solenoidal(&g, seed, eps, 0);
            let f = random_annulus(&g, seed + 500, 0.8 * k, 1.25 * k);
            let defect = cfg.directional_defect(&x, &f)?.without_mean();
            let num = besov_norm(&defect, &out_idx)?;
            let den = besov_norm(&f, &in_idx)? * holder_norm_vector(&x, eps)?;
            sup = sup.max(num / den);
        }
        ratios.push(sup);
    }
    Ok(ratios)
}

/// Para-vector field versus directional derivative across frequency scales.
pub fn criterion_para_vector_field() -> Result<Verdict> {
    let (ratios, secs) = timed(|| para_vector_field_ratios(256, &PARA_SCALES))?;
    let mut m: Vec<Measure> = ratios
        .iter()
        .zip(PARA_SCALES)
        .map(|(r, q)| Measure::at_most(format!("ratio_2^{q}"), *r, f64::INFINITY))
        .collect();
    m.push(Measure::at_most("spread", spread(&ratios), 4.0));
    Ok(Verdict::new(
        3,
        "para-vector field estimate is scale uniform",
        m,
        secs,
        Some(60.0),
    ))
}

/// Biot-Savart round trip and the analytic `sin sin` case.
pub fn criterion_biot_savart() -> Result<Verdict> {
    use crate::biot_savart::velocity_from_vorticity;
    use crate::random::random_band_limited;
    use crate::spectral::curl;
    let ((round, analytic), secs) = timed(|| {
        let g = Grid2D::new(256, 7.0)?;
        let omega = random_band_limited(&g, 77, 150.0);
        let back = curl(&velocity_from_vorticity(&omega)?);
        let round = back.sub(&omega)?.max_abs() / omega.max_abs();
        let l = 2.0 * std::f64::consts::PI;
        let g = Grid2D::new(256, l)?;
        let omega = ScalarField::from_fn(&g, |x, y| x.sin() * y.sin());
        let u = velocity_from_vorticity(&omega)?;
        // psi = -sin x sin y / 2 and u = (-d_y psi, d_x psi)
        let exact = VectorField2::from_fn(&g, |x, y| {
            [0.5 * x.sin() * y.cos(), -0.5 * x.cos() * y.sin()]
        });
        let analytic = u.sub(&exact)?.max_abs() / exact.max_abs();
        Ok((round, analytic))
    })?;
    Ok(Verdict::new(
        4,
        "Biot-Savart round trip",
        vec![
            Measure::at_most("curl_round_trip", round, 1e-10),
            Measure::at_most("sin_sin_error", analytic, 1e-10),
        ],
        secs,
        Some(1.0),
    ))
}

/// Relative `L^2` error of the Taylor-Green run to `t = 1` at `n = 128`.
pub fn taylor_green_error(dt: f64) -> Result<f64> {
    use crate::solver::{taylor_green, DensityModel};
    let g = Grid2D::new(128, 2.0 * std::f64::consts::PI)?;
    let s = SimulationState::new(taylor_green(&g, 0.0), DensityModel::Uniform)?;
    let end = s.run(&SolverConfig::new(dt, 1.0)?, 0, |_| Ok(()))?;
    let exact = taylor_green(&g, end.t);
    Ok(end.u.sub(&exact)?.l2_norm() / exact.l2_norm())
}

/// Taylor-Green decay and temporal order.
pub fn criterion_taylor_green() -> Result<Verdict> {
    let ((e1, e2), secs) = timed(|| Ok((taylor_green_error(1e-3)?, taylor_green_error(5e-4)?)))?;
    Ok(Verdict::new(
        5,
        "Taylor-Green regression",
        vec![
            Measure::at_most("rel_l2_error_dt1e-3", e1, 1e-5),
            Measure::at_least("observed_order", (e1 / e2).log2(), 1.8),
        ],
        secs,
        Some(120.0),
    ))
}

/// Transport identities along the persistence run.
pub fn criterion_transport(run: &PersistenceRun) -> Verdict {
    let max_div_u = run.div_u.iter().map(|d| d.1).fold(0.0, f64::max);
    let max_div_x = run.rows.iter().map(|r| r.invariants.div_x).fold(0.0, f64::max);
    let max_tan = run.rows.iter().map(|r| r.invariants.tangency).fold(0.0, f64::max);
    let a0 = run.rows.first().map_or(f64::NAN, |r| r.invariants.area);
    let area = run
        .rows
        .iter()
        .map(|r| (r.invariants.area / a0 - 1.0).abs())
        .fold(0.0, f64::max);
    let energy_rise = run
        .energy
        .windows(2)
        .map(|w| w[1].1 - w[0].1)
        .fold(f64::NEG_INFINITY, f64::max);
    let dx_rho = run.extras.iter().map(|e| e.dx_rho).fold(0.0, f64::max);
    Verdict::new(
        6,
        "transport identities over the patch run",
        vec![
            Measure::at_most("max_div_u", max_div_u, 1e-8),
            Measure::at_most("max_div_X", max_div_x, 1e-3),
            Measure::at_most("max_tangency", max_tan, 1e-3),
            Measure::at_most("area_drift", area, 5e-3),
            Measure::at_most("max_energy_increase", energy_rise, 1e-10),
            Measure::at_most("dX_rho_defect", dx_rho, 1e-3),
        ],
        run.seconds,
        Some(900.0),
    )
}

/// Largest relative difference of two series sampled at the same times.
fn series_change(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() || a.is_empty() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| (y - x).abs() / x.abs())
        .fold(0.0, f64::max)
}

/// Boundary and tangent-field regularity along the run, and its stability
/// under resolution doubling when `refined` is given.
pub fn criterion_persistence(run: &PersistenceRun, refined: Option<&PersistenceRun>) -> Verdict {
    let holder: Vec<f64> = run.rows.iter().map(|r| r.striated.holder_x).collect();
    let bnd: Vec<f64> = run.rows.iter().map(|r| r.striated.boundary_holder).collect();
    let growth = |s: &[f64]| s.iter().map(|v| v / s[0]).fold(0.0, f64::max);
    let simple = run
        .rows
        .iter()
        .all(|r| r.invariants.components == 1 && r.striated.boundary_holder.is_finite());
    let mut m = vec![
        Measure::at_most("boundary_holder_growth", growth(&bnd), 3.0),
        Measure::at_most("holder_X_growth", growth(&holder), 3.0),
        Measure::holds("single_simple_contour", simple),
    ];
    let mut secs = run.seconds;
    match refined {
        Some(fine) => {
            let fh: Vec<f64> = fine.rows.iter().map(|r| r.striated.holder_x).collect();
            let fb: Vec<f64> = fine.rows.iter().map(|r| r.striated.boundary_holder).collect();
            m.push(Measure::at_most("refinement_change_holder_X", series_change(&holder, &fh), 0.3));
            m.push(Measure::at_most("refinement_change_boundary", series_change(&bnd, &fb), 0.3));
            secs += fine.seconds;
        }
        None => m.push(Measure::holds("refinement_run_present", false)),
    }
    Verdict::new(7, "persistence of the boundary regularity", m, secs, None)
}

/// Agreement of the two realisations of `X` at the end of the run.
pub fn criterion_pde_formula(run: &PersistenceRun) -> Verdict {
    let last = run.extras.last().map_or(f64::NAN, |e| e.pde_formula_l2);
    Verdict::new(
        8,
        "PDE versus formula for X at the final time",
        vec![Measure::at_most("relative_l2_difference", last, 1e-2)],
        0.0,
        None,
    )
}

/// Runs `(u0, L, T)` and `(lambda u0(lambda .), L / lambda, T / lambda^2)` at
/// constant density and returns the relative mismatch under the rescaling.
pub fn scaling_mismatch(n: usize, lambda: f64) -> Result<f64> {
    use crate::solver::DensityModel;
    let setup = PersistenceSetup::default().with_resolution(n);
    let (_, patch_state) = setup.initial_state()?;
    let u0 = patch_state.u;
    let (length, t_end, dt) = (setup.length, 0.5, 0.005);
    let big = SimulationState::new(u0.clone(), DensityModel::Uniform)?;
    let big = big.run(&SolverConfig::new(dt, t_end)?, 0, |_| Ok(()))?;
    let small_grid = Grid2D::new(n, length / lambda)?;
    let rescale = |f: &ScalarField, c: f64| ScalarField::new(&small_grid, f.values().iter().map(|v| c * v).collect());
    let u0s = VectorField2::new(rescale(u0.x(), lambda)?, rescale(u0.y(), lambda)?)?;
    let small = SimulationState::new(u0s, DensityModel::Uniform)?;
    let l2 = lambda * lambda;
    let small = small.run(&SolverConfig::new(dt / l2, t_end / l2)?, 0, |_| Ok(()))?;
    let expect = VectorField2::new(rescale(big.u.x(), lambda)?, rescale(big.u.y(), lambda)?)?;
    Ok(small.u.sub(&expect)?.l2_norm() / expect.l2_norm())
}

/// Scaling invariance for `lambda = 2`.
pub fn criterion_scaling() -> Result<Verdict> {
    let (mismatch, secs) = timed(|| scaling_mismatch(128, 2.0))?;
    Ok(Verdict::new(
        9,
        "scaling invariance",
        vec![Measure::at_most("relative_mismatch", mismatch, 0.03)],
        secs,
        Some(300.0),
    ))
}

/// The rough vector fields shared by every scale of the commutator checks,
/// with `||X||_{C^eps}` and `max_i ||grad X^i||_{C^{eps-1}}` alongside.
fn rough_family(g: &Grid2D, eps: f64, pairs: u64) -> Result<Vec<(VectorField2, f64, f64)>> {
    use crate::lp::{besov_norm_vector, holder_norm_vector, BesovIndex};
    let grad_idx = BesovIndex::holder(eps - 1.0);
    (0..pairs)
        .map(|s| {
            let x = rough_solenoidal(g, 900 + s, eps, 0);
            let holder = holder_norm_vector(&x, eps)?;
            let grad = besov_norm_vector(&gradient(x.x()), &grad_idx)?
                .max(besov_norm_vector(&gradient(x.y()), &grad_idx)?);
            Ok((x, holder, grad))
        })
        .collect()
}

/// `sup_pairs` of the commutator-with-Laplacian ratio at each scale.
pub fn laplacian_commutator_ratios(n: usize, scales: &[i32], pairs: u64) -> Result<Vec<f64>> {
    use crate::lp::{besov_norm, besov_norm_vector, BesovIndex};
    use crate::paradiff::ParaConfig;
    use crate::random::random_annulus;
    let (eps, p) = (0.5, 3.0);
    let g = Grid2D::new(n, 2.0 * std::f64::consts::PI)?;
    let out_idx = BesovIndex::homogeneous(2.0 / p + eps - 2.0, p, 1.0);
    let grad_u_idx = BesovIndex::homogeneous(2.0 / p, p, 1.0);
    let cfg = ParaConfig::default();
    let family = rough_family(&g, eps, pairs)?;
    let mut ratios = Vec::new();
    for &q in scales {
        let k = (q as f64).exp2();
        let mut sup: f64 = 0.0;
        for (s, (x, _, gx)) in family.iter().enumerate() {
            let u = random_annulus(&g, 1400 + 10 * q as u64 + s as u64, 0.8 * k, 1.25 * k);
            let c = cfg.commutator_laplacian(x, &u)?.without_mean();
            let gu = besov_norm_vector(&gradient(&u), &grad_u_idx)?;
            sup = sup.max(besov_norm(&c, &out_idx)? / (gx * gu));
        }
        ratios.push(sup);
    }
    Ok(ratios)
}

/// `sup_pairs` of the material-commutator ratio at each scale of `v`.
pub fn material_commutator_ratios(n: usize, scales: &[i32], pairs: u64) -> Result<Vec<f64>> {
    use crate::lp::{besov_norm_vector, BesovIndex};
    use crate::paradiff::ParaConfig;
    use crate::random::random_solenoidal;
    let (eps, p) = (0.5, 3.0);
    let g = Grid2D::new(n, 2.0 * std::f64::consts::PI)?;
    let b = |s: f64| BesovIndex::homogeneous(s, p, 1.0);
    let cfg = ParaConfig::default();
    let family = rough_family(&g, eps, pairs)?;
    let mut ratios = Vec::new();
    for &q in scales {
        let k = (q as f64).exp2();
        let mut sup: f64 = 0.0;
        for (s, (x, x_holder, _)) in family.iter().enumerate() {
            let v = random_solenoidal(&g, 800 + 10 * q as u64 + s as u64, 0.8 * k, 1.25 * k);
            let lhs = besov_norm_vector(
                &cfg.commutator_material(x, &v)?.map_components(ScalarField::without_mean),
                &b(2.0 / p + eps - 2.0),
            )?;
            let txv = cfg.para_vector_field_vec(x, &v)?.map_components(ScalarField::without_mean);
            let v_hi = besov_norm_vector(&v, &b(2.0 / p + 1.0))?;
            let v_lo = besov_norm_vector(&v, &b(2.0 / p - 1.0))?;
            let rhs = x_holder * v_hi * v_lo
                + besov_norm_vector(&v, &BesovIndex::holder(-1.0))?
                    * besov_norm_vector(&txv, &b(2.0 / p + eps))?
                + v_hi * besov_norm_vector(&txv, &BesovIndex::holder(eps - 2.0))?;
            sup = sup.max(lhs / rhs);
        }
        ratios.push(sup);
    }
    Ok(ratios)
}

/// Commutator estimates across frequency scales.
pub fn criterion_commutators() -> Result<Verdict> {
    let ((lap, mat), secs) = timed(|| {
        Ok((
            laplacian_commutator_ratios(COMMUTATOR_N, &LAPLACIAN_SCALES, COMMUTATOR_PAIRS)?,
            material_commutator_ratios(COMMUTATOR_N, &MATERIAL_SCALES, COMMUTATOR_PAIRS)?,
        ))
    })?;
    let mut m = Vec::new();
    for (name, r, scales) in [("laplacian", &lap, LAPLACIAN_SCALES), ("material", &mat, MATERIAL_SCALES)] {
        for (v, q) in r.iter().zip(scales) {
            m.push(Measure::at_most(format!("{name}_ratio_2^{q}"), *v, f64::INFINITY));
        }
        m.push(Measure::at_most(format!("{name}_spread"), spread(r), 4.0));
    }
    Ok(Verdict::new(10, "commutator estimates are scale uniform", m, secs, Some(120.0)))
}

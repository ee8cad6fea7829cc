//! Property suites behind the `verify` subcommand.
//!
//! Each suite returns [`Verdict`]s built from the same checks as the
//! acceptance criteria, plus a few quick structural identities.

use std::str::FromStr;

use crate::acceptance::{self, Measure, Verdict};
use crate::error::{Error, Result};
use crate::spectral::{divergence, leray_project, partial, snapshot, Grid2D, ScalarField, VectorField2};
use crate::transport::{transport_vector_formula, transport_vector_pde, transport_vector_stream, FlowMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Spectral,
    Paradiff,
    Transport,
    Solver,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "spectral" => Suite::Spectral,
            "paradiff" => Suite::Paradiff,
            "transport" => Suite::Transport,
            "solver" => Suite::Solver,
            "all" => Suite::All,
            other => {
                return Err(Error::config(
                    "--suite",
                    format!("`{other}` is not one of spectral, paradiff, transport, solver, all"),
                ))
            }
        })
    }
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Spectral => "spectral",
            Suite::Paradiff => "paradiff",
            Suite::Transport => "transport",
            Suite::Solver => "solver",
            Suite::All => "all",
        }
    }
}

fn check(title: &str, measures: Vec<Measure>, start: std::time::Instant) -> Verdict {
    Verdict {
        id: 0,
        title: title.to_string(),
        measures,
        seconds: start.elapsed().as_secs_f64(),
        budget: None,
    }
}

/// Exact derivatives, projection and snapshot round trip.
fn spectral_identities() -> Result<Verdict> {
    let start = std::time::Instant::now();
    let g = Grid2D::new(128, 3.0)?;
    let k = 2.0 * std::f64::consts::PI / 3.0;
    let f = ScalarField::from_fn(&g, |x, y| (3.0 * k * x).sin() * (2.0 * k * y).cos());
    let fx = ScalarField::from_fn(&g, |x, y| 3.0 * k * (3.0 * k * x).cos() * (2.0 * k * y).cos());
    let deriv = partial(&f, 0).sub(&fx)?.max_abs() / fx.max_abs();
    let v = crate::random::random_vector(&g, 11, 40.0);
    let div = divergence(&leray_project(&v)).max_abs() / v.max_abs();
    let bytes = snapshot::encode(&f, "f", 0.5)?;
    let back = snapshot::decode(&bytes, std::path::Path::new("memory"))?;
    let exact = back.field.values() == f.values();
    Ok(check(
        "spectral identities",
        vec![
            Measure::at_most("derivative_error", deriv, 1e-12),
            Measure::at_most("projected_divergence", div, 1e-12),
            Measure::holds("snapshot_round_trip", exact),
        ],
        start,
    ))
}

/// Flow map and tangent-field transport in a steady cellular flow.
fn cellular_transport() -> Result<Verdict> {
    let start = std::time::Instant::now();
    let g = Grid2D::new(128, 2.0 * std::f64::consts::PI)?;
    let u = VectorField2::from_fn(&g, |x, y| [0.5 * x.sin() * y.cos(), -0.5 * x.cos() * y.sin()]);
    let dt = 0.01;
    let stream = |x: f64, y: f64| x.sin() + (y + 1.0).cos();
    let x0 = crate::spectral::perp_gradient(&ScalarField::from_fn(&g, stream));
    let mut fm = FlowMap::identity(&g);
    let mut xp = x0.clone();
    for _ in 0..100 {
        fm = fm.advance(&u, &u, dt)?;
        xp = transport_vector_pde(&xp, &u, dt)?;
    }
    let det = fm.jacobian_determinant().map(|d| d - 1.0).max_abs();
    let xf = transport_vector_formula(&x0, &fm)?;
    let xs = transport_vector_stream(&stream, &fm);
    Ok(check(
        "cellular-flow transport",
        vec![
            Measure::at_most("jacobian_defect", det, 1e-3),
            Measure::at_most("composition_defect_cells", fm.composition_defect(), 2.0),
            Measure::at_most("pde_vs_formula", xf.sub(&xp)?.l2_norm() / xf.l2_norm(), 1e-2),
            Measure::at_most("stream_vs_formula", xf.sub(&xs)?.l2_norm() / xf.l2_norm(), 1e-2),
            Measure::at_most("stream_divergence", divergence(&xs).max_abs(), 1e-10),
        ],
        start,
    ))
}

/// A state at rest stays at rest, whatever the density.
fn rest_state() -> Result<Verdict> {
    use crate::patch::{make_patch, PatchShape};
    use crate::solver::{SimulationState, SolverConfig};
    let start = std::time::Instant::now();
    let g = Grid2D::new(128, 8.0)?;
    let p = make_patch(PatchShape::Disc { radius: 1.0 }, 0.05, 0.5, &g)?;
    let s = SimulationState::from_patch(&p, VectorField2::zeros(&g))?;
    let end = s.clone().run(&SolverConfig::new(0.01, 0.1)?, 0, |_| Ok(()))?;
    Ok(check(
        "rest state",
        vec![
            Measure::at_most("max_velocity", end.u.max_abs(), 0.0),
            Measure::at_most("density_change", end.rho.sub(&s.rho)?.max_abs(), 0.0),
        ],
        start,
    ))
}

/// Runs one suite (or all of them), reporting each finished check to `report`.
pub fn run_suite(suite: Suite, mut report: impl FnMut(&str, &Verdict)) -> Result<Vec<(String, Verdict)>> {
    let suites = match suite {
        Suite::All => vec![Suite::Spectral, Suite::Paradiff, Suite::Transport, Suite::Solver],
        s => vec![s],
    };
    let mut out = Vec::new();
    for s in suites {
        let jobs: Vec<fn() -> Result<Verdict>> = match s {
            Suite::Spectral => vec![
                acceptance::criterion_partition,
                acceptance::criterion_biot_savart,
                spectral_identities,
            ],
            Suite::Paradiff => vec![
                acceptance::criterion_bony,
                acceptance::criterion_para_vector_field,
                acceptance::criterion_commutators,
            ],
            Suite::Transport => vec![cellular_transport],
            Suite::Solver => vec![rest_state, acceptance::criterion_taylor_green, acceptance::criterion_scaling],
            Suite::All => unreachable!(),
        };
        for job in jobs {
            let v = job()?;
            report(s.name(), &v);
            out.push((s.name().to_string(), v));
        }
    }
    Ok(out)
}

/// `suite,check,measure,value,limit,status` lines.
pub const CSV_HEADER: &str = "suite,check,measure,value,limit,status";

pub fn csv_lines(suite: &str, v: &Verdict) -> Vec<String> {
    v.measures
        .iter()
        .map(|m| {
            format!(
                "{suite},{},{},{:e},{:e},{}",
                v.title,
                m.name,
                m.value,
                m.limit,
                if m.passed { "PASS" } else { "FAIL" }
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in [Suite::Spectral, Suite::Paradiff, Suite::Transport, Suite::Solver, Suite::All] {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("fluids".parse::<Suite>().unwrap_err().to_string().contains("--suite"));
    }

    #[test]
    fn spectral_suite_passes() {
        let mut lines = 0;
        let out = run_suite(Suite::Spectral, |s, v| lines += csv_lines(s, v).len()).unwrap();
        assert!(out.iter().all(|(_, v)| v.passed()), "{out:?}");
        assert!(lines >= 5);
    }
}

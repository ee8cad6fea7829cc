//! Flat `section.key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored; a trailing `# ...`
//! after a value is a comment too. Unknown keys are rejected so that typos
//! cannot silently fall back to defaults.

use std::collections::BTreeMap;
use std::path::Path;

use crate::acceptance::PersistenceSetup;
use crate::error::{Error, Result};
use crate::patch::PatchShape;

/// Keys understood by [`RunConfig::parse`].
pub const KEYS: &[&str] = &[
    "grid.n",
    "grid.L",
    "solver.dt",
    "solver.t_end",
    "solver.pressure_iter_tol",
    "solver.pressure_max_iter",
    "solver.cfl_safety",
    "patch.shape",
    "patch.radius",
    "patch.semi_x",
    "patch.semi_y",
    "patch.eps",
    "patch.amplitude",
    "patch.modes",
    "patch.eta",
    "vorticity.amplitude",
    "vorticity.strain",
    "diagnostics.every",
    "diagnostics.p",
    "diagnostics.probes_per_shell",
    "diagnostics.probe_centers",
    "output.snapshots",
    "seed",
];

/// A parsed configuration: the experiment plus output options.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub setup: PersistenceSetup,
    /// Write the final state as snapshot files next to the CSV.
    pub snapshots: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            setup: PersistenceSetup::default(),
            snapshots: true,
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::config(key, format!("cannot parse `{raw}`")))
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Parses the text, starting from the defaults of the persistence run.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::config(
                    line,
                    format!("line {}: expected `key = value`", lineno + 1),
                ));
            };
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(Error::config(key, "unknown key"));
            }
            if map.insert(key.to_string(), value.to_string()).is_some() {
                return Err(Error::config(key, "given twice"));
            }
        }
        let mut cfg = Self::default();
        let s = &mut cfg.setup;
        let get = |k: &str| map.get(k).map(String::as_str);

        if let Some(v) = get("grid.n") {
            s.n = parse_value("grid.n", v)?;
        }
        if let Some(v) = get("grid.L") {
            s.length = parse_value("grid.L", v)?;
        }
        if let Some(v) = get("solver.dt") {
            s.solver.dt = parse_value("solver.dt", v)?;
        }
        if let Some(v) = get("solver.t_end") {
            s.solver.t_end = parse_value("solver.t_end", v)?;
        }
        if let Some(v) = get("solver.pressure_iter_tol") {
            s.solver.pressure_iter_tol = parse_value("solver.pressure_iter_tol", v)?;
        }
        if let Some(v) = get("solver.pressure_max_iter") {
            s.solver.pressure_max_iter = parse_value("solver.pressure_max_iter", v)?;
        }
        if let Some(v) = get("solver.cfl_safety") {
            s.solver.cfl_safety = parse_value("solver.cfl_safety", v)?;
        }

        let num = |k: &str, default: f64| -> Result<f64> {
            get(k).map_or(Ok(default), |v| parse_value(k, v))
        };
        let (r0, eps0, amp0, modes0) = match s.shape {
            PatchShape::PerturbedDisc {
                radius,
                eps,
                amplitude,
                modes,
            } => (radius, eps, amplitude, modes),
            _ => unreachable!("default shape is a perturbed disc"),
        };
        let radius = num("patch.radius", r0)?;
        s.eps = num("patch.eps", eps0)?;
        s.shape = match get("patch.shape").unwrap_or("perturbed_disc") {
            "disc" => PatchShape::Disc { radius },
            "ellipse" => PatchShape::Ellipse {
                semi_x: num("patch.semi_x", radius)?,
                semi_y: num("patch.semi_y", radius)?,
            },
            "perturbed_disc" => PatchShape::PerturbedDisc {
                radius,
                eps: s.eps,
                amplitude: num("patch.amplitude", amp0)?,
                modes: get("patch.modes").map_or(Ok(modes0), |v| parse_value("patch.modes", v))?,
            },
            other => {
                return Err(Error::config(
                    "patch.shape",
                    format!("`{other}` is not one of disc, ellipse, perturbed_disc"),
                ))
            }
        };
        s.eta = num("patch.eta", s.eta)?;
        s.vorticity_amplitude = num("vorticity.amplitude", s.vorticity_amplitude)?;
        s.vorticity_strain = num("vorticity.strain", s.vorticity_strain)?;
        if let Some(v) = get("diagnostics.every") {
            s.every = parse_value("diagnostics.every", v)?;
        }
        s.diagnostics.p = num("diagnostics.p", s.diagnostics.p)?;
        if let Some(v) = get("diagnostics.probes_per_shell") {
            s.diagnostics.probes_per_shell = parse_value("diagnostics.probes_per_shell", v)?;
        }
        if let Some(v) = get("diagnostics.probe_centers") {
            s.diagnostics.probe_centers = parse_value("diagnostics.probe_centers", v)?;
        }
        if let Some(v) = get("seed") {
            s.diagnostics.seed = parse_value("seed", v)?;
        }
        if let Some(v) = get("output.snapshots") {
            cfg.snapshots = parse_value("output.snapshots", v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Range checks that need no grid.
    pub fn validate(&self) -> Result<()> {
        let s = &self.setup;
        if s.n < crate::spectral::Grid2D::MIN_POINTS || !s.n.is_multiple_of(2) {
            return Err(Error::config("grid.n", format!("must be even and at least 32, got {}", s.n)));
        }
        if !(s.length.is_finite() && s.length > 0.0) {
            return Err(Error::config("grid.L", format!("must be positive, got {}", s.length)));
        }
        s.solver.validate()?;
        if !(s.eps > 0.0 && s.eps < 1.0) {
            return Err(Error::config("patch.eps", format!("must lie in ]0,1[, got {}", s.eps)));
        }
        if !(s.eta.abs() < 1.0) {
            return Err(Error::config("patch.eta", format!("|eta| must be < 1, got {}", s.eta)));
        }
        let radius = s.shape.nominal_radius();
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::config("patch.radius", "must be positive"));
        }
        if s.every == 0 {
            return Err(Error::config("diagnostics.every", "must be at least 1"));
        }
        if !(s.diagnostics.p >= 1.0) {
            return Err(Error::config("diagnostics.p", "must be at least 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let cfg = RunConfig::parse("# comment\n\ngrid.n = 128\nsolver.dt=0.02 # inline\nseed = 7\n").unwrap();
        assert_eq!(cfg.setup.n, 128);
        assert_eq!(cfg.setup.solver.dt, 0.02);
        assert_eq!(cfg.setup.diagnostics.seed, 7);
        assert_eq!(cfg.setup.length, 8.0);
    }

    #[test]
    fn shapes() {
        let cfg = RunConfig::parse("patch.shape = disc\npatch.radius = 0.5").unwrap();
        assert_eq!(cfg.setup.shape, PatchShape::Disc { radius: 0.5 });
        let cfg = RunConfig::parse("patch.shape = ellipse\npatch.semi_x = 1.2\npatch.semi_y = 0.8").unwrap();
        assert_eq!(
            cfg.setup.shape,
            PatchShape::Ellipse {
                semi_x: 1.2,
                semi_y: 0.8
            }
        );
    }

    #[test]
    fn errors_name_the_key() {
        for (text, key) in [
            ("grid.n = many", "grid.n"),
            ("solver.dt = -1", "solver.dt"),
            ("patch.colour = red", "patch.colour"),
            ("patch.shape = star", "patch.shape"),
            ("patch.eta = 1.5", "patch.eta"),
            ("grid.n = 64\ngrid.n = 64", "grid.n"),
            ("diagnostics.every = 0", "diagnostics.every"),
        ] {
            let err = RunConfig::parse(text).unwrap_err();
            assert!(err.is_input_error());
            assert!(err.to_string().contains(key), "{text}: {err}");
        }
    }
}

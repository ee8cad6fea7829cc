//! Offline norm analysis of a single snapshot field.
//!
//! A norm request is a `;`-separated list of items:
//!
//! ```text
//! besov(s, p, r)       homogeneous B^s_{p,r}
//! besov_inh(s, p, r)   inhomogeneous B^s_{p,r}
//! holder(eps)          C^{0,eps}, 0 < eps < 1
//! ```
//!
//! `p` and `r` accept `inf`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{besov_norm, block_lp_norms, holder_norm, BesovIndex, DyadicDecomposition};
use crate::spectral::ScalarField;

/// One requested norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum NormSpec {
    Besov(BesovIndex),
    Holder(f64),
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormSpec::Besov(i) => {
                let name = if i.homogeneous { "besov" } else { "besov_inh" };
                write!(f, "{name}({},{},{})", i.s, i.p, i.r)
            }
            NormSpec::Holder(e) => write!(f, "holder({e})"),
        }
    }
}

fn number(item: &str, raw: &str) -> Result<f64> {
    let raw = raw.trim();
    if raw.eq_ignore_ascii_case("inf") {
        return Ok(f64::INFINITY);
    }
    raw.parse()
        .map_err(|_| Error::config("--norms", format!("`{item}`: cannot parse `{raw}`")))
}

impl FromStr for NormSpec {
    type Err = Error;

    fn from_str(item: &str) -> Result<Self> {
        let item = item.trim();
        let bad = || Error::config("--norms", format!("`{item}` is not besov(s,p,r), besov_inh(s,p,r) or holder(eps)"));
        let (name, rest) = item.split_once('(').ok_or_else(bad)?;
        let args = rest.strip_suffix(')').ok_or_else(bad)?;
        let args: Vec<f64> = args.split(',').map(|a| number(item, a)).collect::<Result<_>>()?;
        let spec = match (name.trim(), args.as_slice()) {
            ("besov", &[s, p, r]) => NormSpec::Besov(BesovIndex::homogeneous(s, p, r)),
            ("besov_inh", &[s, p, r]) => NormSpec::Besov(BesovIndex::inhomogeneous(s, p, r)),
            ("holder", &[e]) => NormSpec::Holder(e),
            _ => return Err(bad()),
        };
        match spec {
            NormSpec::Besov(i) => i
                .validate()
                .map_err(|e| Error::config("--norms", format!("`{item}`: {e}")))?,
            NormSpec::Holder(e) if !(e > 0.0 && e < 1.0) => {
                return Err(Error::config("--norms", format!("`{item}`: eps must lie in ]0,1[")))
            }
            NormSpec::Holder(_) => {}
        }
        Ok(spec)
    }
}

/// Parses a `;`-separated list of norm items.
pub fn parse_norms(text: &str) -> Result<Vec<NormSpec>> {
    let specs: Vec<NormSpec> = text
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    if specs.is_empty() {
        return Err(Error::config("--norms", "no norm requested"));
    }
    Ok(specs)
}

/// Per-block row: `(norm, j, ||Delta_j f||_p, 2^{js} ||Delta_j f||_p)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockRow {
    pub norm: String,
    pub j: i32,
    pub block_lp: f64,
    pub weighted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormValue {
    pub norm: String,
    pub value: f64,
}

/// Block table and totals for every requested norm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Analysis {
    pub rows: Vec<BlockRow>,
    pub summary: Vec<NormValue>,
}

impl Analysis {
    pub const CSV_HEADER: &'static str = "norm,j,block_lp,weighted";

    pub fn csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!("{},{},{:e},{:e}\n", r.norm, r.j, r.block_lp, r.weighted));
        }
        out
    }
}

/// Evaluates every spec on `f`.
pub fn analyze(f: &ScalarField, specs: &[NormSpec]) -> Result<Analysis> {
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for spec in specs {
        let label = spec.to_string();
        let (idx, value) = match *spec {
            NormSpec::Besov(idx) => (idx, besov_norm(f, &idx)?),
            NormSpec::Holder(eps) => (BesovIndex::inhomogeneous(eps, f64::INFINITY, f64::INFINITY), holder_norm(f, eps)?),
        };
        let d = if idx.homogeneous {
            DyadicDecomposition::new(f)?
        } else {
            DyadicDecomposition::inhomogeneous(f)?
        };
        for (j, a) in block_lp_norms(&d, idx.p) {
            rows.push(BlockRow {
                norm: label.clone(),
                j,
                block_lp: a,
                weighted: (idx.s * j as f64).exp2() * a,
            });
        }
        summary.push(NormValue { norm: label, value });
    }
    Ok(Analysis { rows, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid2D;

    #[test]
    fn parses_items() {
        let s = parse_norms("besov(-0.5, 3, 1); holder(0.5);besov_inh(0.2,inf,inf)").unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s[0], NormSpec::Besov(BesovIndex::homogeneous(-0.5, 3.0, 1.0)));
        assert_eq!(s[1], NormSpec::Holder(0.5));
        assert!(matches!(s[2], NormSpec::Besov(i) if !i.homogeneous && i.p.is_infinite()));
        for bad in ["", "besov(1,2)", "holder(1.5)", "sobolev(1)", "besov(a,2,2)", "besov(0,0.5,1)"] {
            let err = parse_norms(bad).unwrap_err();
            assert!(err.to_string().contains("--norms"), "{bad}: {err}");
        }
    }

    #[test]
    fn single_mode_norms() {
        // cos(16 x) on [0, 2 pi) lives in blocks 3 and 4, whose weights sum to
        // one at |xi| = 16, so the norm lies between 2^1.5 and 2^2
        let g = Grid2D::new(128, 2.0 * std::f64::consts::PI).unwrap();
        let f = ScalarField::from_fn(&g, |x, _| (16.0 * x).cos());
        let a = analyze(&f, &parse_norms("besov(0.5,inf,1);holder(0.5)").unwrap()).unwrap();
        let v = a.summary[0].value;
        assert!(v >= 2f64.powf(1.5) - 1e-9 && v <= 4.0 + 1e-9, "{v}");
        assert!(a.summary[1].value >= 1.0);
        assert!(a.csv().starts_with(Analysis::CSV_HEADER));
        let total: f64 = a.rows.iter().filter(|r| r.norm.starts_with("besov")).map(|r| r.weighted).sum();
        assert!((total - a.summary[0].value).abs() < 1e-12);
    }
}

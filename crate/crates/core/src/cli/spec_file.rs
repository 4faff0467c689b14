//! The JSON spec-file format. Weights are rational strings (`"p/q"` or an
//! integer) so that exact verdicts survive I/O.

use crate::degeneration::{AtlasChart, DegenerationSpec, Incidence, RhoModel, ToroidalAtlas};
use crate::error::{Error, Result};
use crate::lattice::LatticeVector;
use crate::qmat::Q;
use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

fn default_eta() -> f64 {
    10.0
}

fn default_tau_grid() -> Vec<f64> {
    vec![1e3, 1e4, 1e5, 1e6, 1e7]
}

fn default_rho() -> String {
    "one".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartBlock {
    pub name: String,
    pub rays: Vec<Vec<i64>>,
    pub weights: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncidenceBlock {
    pub from: String,
    pub to: String,
    /// Pairs `[ray in from, image ray in to]`.
    pub ray_map: Vec<(Vec<i64>, Vec<i64>)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtlasBlock {
    pub charts: Vec<ChartBlock>,
    #[serde(default)]
    pub incidences: Vec<IncidenceBlock>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub rank: usize,
    pub rays: Vec<Vec<i64>>,
    pub weights: Vec<String>,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_tau_grid")]
    pub tau_grid: Vec<f64>,
    #[serde(default = "default_rho")]
    pub rho: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atlas: Option<AtlasBlock>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub analysis: Vec<String>,
}

/// 1-based line of the first occurrence of `"key"` in `text`.
fn line_of(text: &str, key: &str) -> usize {
    let pat = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&pat)).map_or(1, |i| i + 1)
}

/// Parses `"p/q"`, `"-p/q"` or `"p"` into a reduced rational.
pub fn parse_rational(s: &str) -> std::result::Result<Q, String> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| format!("bad numerator in '{s}'"))?;
    let d: BigInt = d.parse().map_err(|_| format!("bad denominator in '{s}'"))?;
    if d.is_zero() {
        return Err(format!("zero denominator in '{s}'"));
    }
    Ok(Q::new(n, d))
}

pub fn format_rational(q: &Q) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn check_rays(text: &str, key: &str, rank: usize, rays: &[Vec<i64>], weights: &[String]) -> Result<Vec<Q>> {
    if let Some((i, r)) = rays.iter().enumerate().find(|(_, r)| r.len() != rank) {
        return Err(Error::Parse {
            line: line_of(text, key),
            msg: format!("ray {i} has {} coordinates, rank is {rank}", r.len()),
        });
    }
    if rays.len() != weights.len() {
        return Err(Error::Parse {
            line: line_of(text, "weights"),
            msg: format!("{} rays but {} weights", rays.len(), weights.len()),
        });
    }
    weights
        .iter()
        .map(|w| parse_rational(w).map_err(|msg| Error::Parse { line: line_of(text, "weights"), msg }))
        .collect()
}

impl SpecFile {
    /// Parses and normalizes a spec document. Syntax and shape errors carry
    /// the line they refer to.
    pub fn parse(text: &str) -> Result<SpecFile> {
        let mut f: SpecFile =
            serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line().max(1), msg: e.to_string() })?;
        if f.rank == 0 {
            return Err(Error::Parse { line: line_of(text, "rank"), msg: "rank must be positive".into() });
        }
        let ws = check_rays(text, "rays", f.rank, &f.rays, &f.weights)?;
        f.weights = ws.iter().map(format_rational).collect();
        if !(f.eta > 0.0 && f.eta.is_finite()) {
            return Err(Error::Parse { line: line_of(text, "eta"), msg: format!("eta must be positive, got {}", f.eta) });
        }
        if f.tau_grid.is_empty() || f.tau_grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::Parse { line: line_of(text, "tau_grid"), msg: "tau_grid must be non-empty and positive".into() });
        }
        if RhoModel::parse(&f.rho).is_none() {
            return Err(Error::Parse { line: line_of(text, "rho"), msg: format!("unknown rho profile '{}'", f.rho) });
        }
        if let Some(atlas) = &mut f.atlas {
            for c in &mut atlas.charts {
                let ws = check_rays(text, "charts", f.rank, &c.rays, &c.weights)?;
                c.weights = ws.iter().map(format_rational).collect();
            }
            for inc in &atlas.incidences {
                if inc.ray_map.iter().any(|(a, b)| a.len() != f.rank || b.len() != f.rank) {
                    return Err(Error::Parse {
                        line: line_of(text, "ray_map"),
                        msg: format!("ray map {} -> {} has wrong dimension", inc.from, inc.to),
                    });
                }
            }
        }
        Ok(f)
    }

    pub fn to_text(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn lattice_rays(&self) -> Vec<LatticeVector> {
        self.rays.iter().map(|r| LatticeVector::from_i64(r)).collect()
    }

    pub fn rational_weights(&self) -> Vec<Q> {
        self.weights.iter().map(|w| parse_rational(w).expect("normalized on parse")).collect()
    }

    pub fn rho_model(&self) -> RhoModel {
        RhoModel::parse(&self.rho).expect("validated on parse")
    }

    /// The validated degeneration spec.
    pub fn degeneration(&self) -> Result<DegenerationSpec> {
        DegenerationSpec::new(self.lattice_rays(), self.rational_weights())?
            .with_eta(self.eta)?
            .with_tau_grid(self.tau_grid.clone())
            .map(|s| s.with_rho(self.rho_model()))
    }

    pub fn toroidal_atlas(&self) -> Result<Option<ToroidalAtlas>> {
        let Some(block) = &self.atlas else { return Ok(None) };
        let mut charts = Vec::new();
        for c in &block.charts {
            let rays = c.rays.iter().map(|r| LatticeVector::from_i64(r)).collect();
            let ws = c.weights.iter().map(|w| parse_rational(w).expect("normalized on parse")).collect();
            charts.push(AtlasChart { name: c.name.clone(), spec: DegenerationSpec::new(rays, ws)? });
        }
        let incidences = block
            .incidences
            .iter()
            .map(|i| Incidence {
                from: i.from.clone(),
                to: i.to.clone(),
                ray_map: i.ray_map.iter().map(|(a, b)| (LatticeVector::from_i64(a), LatticeVector::from_i64(b))).collect(),
            })
            .collect();
        Ok(Some(ToroidalAtlas { charts, incidences }))
    }

    /// Spec file with the given rays and weights and this file's settings.
    pub fn with_rays(&self, rays: &[LatticeVector], weights: &[Q]) -> SpecFile {
        SpecFile {
            rays: rays
                .iter()
                .map(|r| r.coords().iter().map(|c| c.to_string().parse().expect("small coordinates")).collect())
                .collect(),
            weights: weights.iter().map(format_rational).collect(),
            ..self.clone()
        }
    }
}

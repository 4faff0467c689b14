//! Toroidal atlases: local toric models glued along injective ray maps.

use super::{minimal_base_extension, DegenerationSpec};
use crate::error::{Error, Result};
use crate::lattice::LatticeVector;
use num_integer::Integer;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Clone, Debug)]
pub struct AtlasChart {
    pub name: String,
    pub spec: DegenerationSpec,
}

/// Ray map `e_pq` from the rays of chart `from` into the rays of chart `to`.
#[derive(Clone, Debug, PartialEq)]
pub struct Incidence {
    pub from: String,
    pub to: String,
    pub ray_map: Vec<(LatticeVector, LatticeVector)>,
}

impl Incidence {
    fn image(&self, m: &LatticeVector) -> Option<&LatticeVector> {
        self.ray_map.iter().find(|(a, _)| a == m).map(|(_, b)| b)
    }
}

#[derive(Clone, Debug, Default)]
pub struct ToroidalAtlas {
    pub charts: Vec<AtlasChart>,
    pub incidences: Vec<Incidence>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AtlasReport {
    pub valid: bool,
    pub charts: usize,
    pub incidences: usize,
    pub chains_checked: usize,
    pub violations: Vec<String>,
}

fn chart<'a>(atlas: &'a ToroidalAtlas, name: &str) -> Result<&'a AtlasChart> {
    atlas
        .charts
        .iter()
        .find(|c| c.name == name)
        .ok_or_else(|| Error::DanglingStratum(name.to_string()))
}

/// Checks totality and injectivity of every ray map, weight compatibility
/// along each map, and the cocycle condition on every chain `p -> q -> q'`
/// whose composite incidence `p -> q'` is also present.
pub fn validate_atlas(atlas: &ToroidalAtlas) -> Result<AtlasReport> {
    if atlas.charts.is_empty() {
        return Err(Error::EmptyAtlas);
    }
    let mut names = BTreeMap::new();
    for c in &atlas.charts {
        if names.insert(c.name.as_str(), ()).is_some() {
            return Err(Error::InvalidParameter(format!("duplicate chart name {}", c.name)));
        }
    }
    for inc in &atlas.incidences {
        chart(atlas, &inc.from)?;
        chart(atlas, &inc.to)?;
    }
    let mut violations = Vec::new();
    for inc in &atlas.incidences {
        let p = &chart(atlas, &inc.from)?.spec;
        let q = &chart(atlas, &inc.to)?.spec;
        let tag = format!("e[{}->{}]", inc.from, inc.to);
        for m in p.rays() {
            match inc.image(m) {
                None => violations.push(format!("{tag}: ray {m} has no image")),
                Some(im) => match (p.weight_of(m), q.weight_of(im)) {
                    (_, None) => violations.push(format!("{tag}: image {im} of ray {m} is not a ray of {}", inc.to)),
                    (Some(a), Some(b)) if a != b => {
                        violations.push(format!("{tag}: weight of ray {m} is {a} but of its image {im} is {b}"))
                    }
                    _ => {}
                },
            }
        }
        for (a, _) in &inc.ray_map {
            if p.weight_of(a).is_none() {
                violations.push(format!("{tag}: ray {a} is not a ray of {}", inc.from));
            }
        }
        for (i, (a, x)) in inc.ray_map.iter().enumerate() {
            for (b, y) in &inc.ray_map[i + 1..] {
                if a == b && x != y {
                    violations.push(format!("{tag}: ray {a} has two images"));
                } else if a != b && x == y {
                    violations.push(format!("{tag}: rays {a} and {b} share the image {x}, map not injective"));
                }
            }
        }
    }
    let mut chains = 0;
    for e1 in &atlas.incidences {
        for e2 in atlas.incidences.iter().filter(|e| e.from == e1.to) {
            let Some(e3) = atlas.incidences.iter().find(|e| e.from == e1.from && e.to == e2.to) else {
                continue;
            };
            chains += 1;
            for (m, im) in &e1.ray_map {
                let composed = e2.image(im);
                let direct = e3.image(m);
                if composed != direct {
                    let show = |v: Option<&LatticeVector>| v.map_or("none".to_string(), |x| x.to_string());
                    violations.push(format!(
                        "cocycle {}->{}->{}: ray {m} maps to {} directly but {} through {}",
                        e1.from,
                        e1.to,
                        e2.to,
                        show(direct),
                        show(composed),
                        e1.to
                    ));
                }
            }
        }
    }
    Ok(AtlasReport {
        valid: violations.is_empty(),
        charts: atlas.charts.len(),
        incidences: atlas.incidences.len(),
        chains_checked: chains,
        violations,
    })
}

/// Least common multiple of the minimal base extensions of all charts.
pub fn toroidal_min_extension(atlas: &ToroidalAtlas) -> Result<u64> {
    if atlas.charts.is_empty() {
        return Err(Error::EmptyAtlas);
    }
    let mut d = 1u64;
    for c in &atlas.charts {
        d = d.lcm(&minimal_base_extension(&c.spec)?);
    }
    Ok(d)
}

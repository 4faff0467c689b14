//! The constants `lambda_1`, `lambda_2` controlling which monomials can be
//! simultaneously small.
//!
//! In positive log coordinates write `y = a / tau` and
//! `g_m(y) = a_m / tau = w_m + <m, y>`. The region where every monomial has
//! modulus at most one is the polytope `P = {y : g_m(y) >= 0}`.
//!
//! * `lambda_2` bounds every `g_m` on `P` from above: if `-m = sum b_k m_k`
//!   on the cone containing `-m`, then `g_m + sum b_k g_{m_k}` is the constant
//!   `w_m + sum b_k w_{m_k}`.
//! * `lambda_1` is half the smallest value of `max_{m in S} g_m` over `P`
//!   among sets `S` of rays not contained in a single maximal cone, so the
//!   rays with `g_m <= lambda_1` always lie in one maximal cone.

use super::DegenerationSpec;
use crate::error::Result;
use crate::fan_pl::itertools_free::combinations;
use crate::fan_pl::{locate, to_q};
use crate::lattice::LatticeVector;
use crate::qmat::{dot, QMatrix, Q};
use num_traits::{Signed, Zero};
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LambdaConstants {
    #[serde(serialize_with = "crate::scalar::ser_rational")]
    pub lambda1: Q,
    #[serde(serialize_with = "crate::scalar::ser_rational")]
    pub lambda2: Q,
    /// `2 lambda_1`: the exact threshold below which containment holds.
    #[serde(serialize_with = "crate::scalar::ser_rational")]
    pub lambda_star: Q,
    /// A minimal non-cone ray set attaining `lambda_star` (empty when every
    /// ray set lies in a maximal cone).
    pub binding_set: Vec<LatticeVector>,
}

/// `min max_{m in S} g_m(y)` over the polytope `P`, by vertex enumeration.
fn min_max_over_polytope(q: &[Vec<Q>], w: &[Q], s: &[usize]) -> Q {
    let n = q[0].len();
    // constraints a . (y, z) >= b
    let mut rows: Vec<(Vec<Q>, Q)> = Vec::new();
    for &i in s {
        let mut a: Vec<Q> = q[i].iter().map(|x| -x.clone()).collect();
        a.push(Q::from_integer(1.into()));
        rows.push((a, w[i].clone()));
    }
    for (m, wm) in q.iter().zip(w) {
        let mut a = m.clone();
        a.push(Q::zero());
        rows.push((a, -wm.clone()));
    }
    let mut best: Option<Q> = None;
    for active in combinations(rows.len(), n + 1) {
        let a = QMatrix::from_rows(active.iter().map(|&k| rows[k].0.clone()).collect(), n + 1);
        let b: Vec<Q> = active.iter().map(|&k| rows[k].1.clone()).collect();
        let Some(x) = a.solve(&b) else { continue };
        if rows.iter().all(|(r, rb)| dot(r, &x) >= *rb) {
            let z = x[n].clone();
            if best.as_ref().is_none_or(|v| z < *v) {
                best = Some(z);
            }
        }
    }
    best.expect("the polytope is bounded and nonempty")
}

pub fn lambda_constants(spec: &DegenerationSpec) -> Result<LambdaConstants> {
    let q: Vec<Vec<Q>> = spec.rays().iter().map(to_q).collect();
    let w = spec.weights();
    let mut lambda2: Option<Q> = None;
    for (m, wm) in q.iter().zip(w) {
        let neg: Vec<Q> = m.iter().map(|x| -x.clone()).collect();
        let (cone, coef) = locate(spec.fan(), &neg)?;
        let mut v = wm.clone();
        for (r, b) in cone.rays().iter().zip(&coef) {
            v += b * spec.weight_of(r).expect("fan ray carries a weight");
        }
        if lambda2.as_ref().is_none_or(|x| v > *x) {
            lambda2 = Some(v);
        }
    }
    let lambda2 = lambda2.expect("at least one ray");

    // minimal ray sets not contained in any maximal cone
    let in_cone: Vec<Vec<bool>> = spec
        .fan()
        .maximal()
        .iter()
        .map(|c| spec.rays().iter().map(|r| c.rays().contains(r)).collect())
        .collect();
    let contained = |s: &[usize]| in_cone.iter().any(|c| s.iter().all(|&i| c[i]));
    let mut bad: Vec<Vec<usize>> = Vec::new();
    for k in 2..=q.len() {
        for s in combinations(q.len(), k) {
            if contained(&s) || bad.iter().any(|b| b.iter().all(|i| s.contains(i))) {
                continue;
            }
            bad.push(s);
        }
    }
    let mut lambda_star: Option<(Q, Vec<usize>)> = None;
    for s in &bad {
        let v = min_max_over_polytope(&q, w, s);
        if lambda_star.as_ref().is_none_or(|(x, _)| v < *x) {
            lambda_star = Some((v, s.clone()));
        }
    }
    let (lambda_star, binding) = match lambda_star {
        Some((v, s)) => (v, s),
        // every ray set fits in a cone: any threshold works
        None => (lambda2.clone(), vec![]),
    };
    debug_assert!(lambda_star.is_positive());
    Ok(LambdaConstants {
        lambda1: &lambda_star / Q::from_integer(2.into()),
        lambda2,
        lambda_star,
        binding_set: binding.iter().map(|&i| spec.rays()[i].clone()).collect(),
    })
}

//! Toric degeneration data: a complete fan with a strictly convex
//! piecewise-linear weight, plus the quantities derived from it.

mod atlas;
mod lambda;

pub use atlas::{toroidal_min_extension, validate_atlas, AtlasChart, AtlasReport, Incidence, ToroidalAtlas};
pub use lambda::{lambda_constants, LambdaConstants};

use crate::error::{Error, Result};
use crate::fan_pl::{build_fan, faces, to_q, Cone, DropReason, Fan, PLWeight};
use crate::lattice::{integer_kernel, parallelepiped_points, sublattice_index, IntegerMatrix, LatticeVector};
use crate::qmat::{dot, Q};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Bounded factor of the model volume form.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RhoModel {
    /// `rho = 1`.
    #[default]
    One,
    /// `log rho = sum_m log(1 + exp(-a_m))`: bounded, smooth, and equal to 1
    /// up to exponentially small terms deep in the chart.
    Fs,
}

impl RhoModel {
    pub fn name(self) -> &'static str {
        match self {
            RhoModel::One => "one",
            RhoModel::Fs => "fs",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "one" => Some(RhoModel::One),
            "fs" => Some(RhoModel::Fs),
            _ => None,
        }
    }
}

/// A toric degeneration given by rays and rational weights.
///
/// Construction convexifies the weights; rays that do not survive are kept
/// in `dropped` for reference.
#[derive(Clone, Debug)]
pub struct DegenerationSpec {
    rank: usize,
    /// Surviving rays in input order.
    rays: Vec<LatticeVector>,
    weights: Vec<Q>,
    input_rays: Vec<LatticeVector>,
    input_weights: Vec<Q>,
    dropped: Vec<(LatticeVector, Q, DropReason)>,
    fan: Fan,
    weight: PLWeight,
    pub eta: f64,
    pub tau_grid: Vec<f64>,
    pub rho: RhoModel,
}

pub const DEFAULT_ETA: f64 = 10.0;

impl DegenerationSpec {
    pub fn new(rays: Vec<LatticeVector>, weights: Vec<Q>) -> Result<Self> {
        let hull = build_fan(&rays, &weights)?;
        if !hull.fan.is_complete() {
            return Err(Error::FanNotComplete(
                "the convexified fan does not cover the whole space".into(),
            ));
        }
        let rank = hull.fan.rank();
        let mut kept_rays = Vec::new();
        let mut kept_weights = Vec::new();
        for (r, w) in rays.iter().zip(&weights) {
            if hull.weight.rays.contains(r) && !kept_rays.contains(r) {
                kept_rays.push(r.clone());
                kept_weights.push(w.clone());
            }
        }
        // interior-t: normalized against any maximal cone, the weight must be
        // strictly positive off that cone
        for (c, l) in hull.fan.maximal().iter().zip(&hull.weight.pieces) {
            for (r, w) in kept_rays.iter().zip(&kept_weights) {
                if !c.rays().contains(r) && (w - dot(l, &to_q(r))) <= Q::zero() {
                    return Err(Error::NotStrictlyConvex);
                }
            }
        }
        Ok(DegenerationSpec {
            rank,
            rays: kept_rays,
            weights: kept_weights,
            input_rays: rays,
            input_weights: weights,
            dropped: hull.dropped,
            fan: hull.fan,
            weight: hull.weight,
            eta: DEFAULT_ETA,
            tau_grid: vec![1e3, 1e4, 1e5, 1e6, 1e7],
            rho: RhoModel::One,
        })
    }

    pub fn from_i64(rays: &[&[i64]], weights: &[Q]) -> Result<Self> {
        Self::new(rays.iter().map(|r| LatticeVector::from_i64(r)).collect(), weights.to_vec())
    }

    pub fn with_eta(mut self, eta: f64) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::InvalidParameter(format!("eta must be positive, got {eta}")));
        }
        self.eta = eta;
        Ok(self)
    }

    pub fn with_tau_grid(mut self, grid: Vec<f64>) -> Result<Self> {
        if grid.is_empty() || grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::InvalidParameter("tau grid must be nonempty and positive".into()));
        }
        self.tau_grid = grid;
        Ok(self)
    }

    pub fn with_rho(mut self, rho: RhoModel) -> Self {
        self.rho = rho;
        self
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rays(&self) -> &[LatticeVector] {
        &self.rays
    }

    pub fn weights(&self) -> &[Q] {
        &self.weights
    }

    pub fn input_rays(&self) -> &[LatticeVector] {
        &self.input_rays
    }

    pub fn input_weights(&self) -> &[Q] {
        &self.input_weights
    }

    pub fn dropped(&self) -> &[(LatticeVector, Q, DropReason)] {
        &self.dropped
    }

    /// True iff convexification left the input unchanged.
    pub fn input_was_convex(&self) -> bool {
        self.dropped.is_empty()
    }

    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    pub fn weight(&self) -> &PLWeight {
        &self.weight
    }

    pub fn weight_of(&self, ray: &LatticeVector) -> Option<&Q> {
        self.rays.iter().position(|r| r == ray).map(|i| &self.weights[i])
    }

    /// Linear piece of the weight on maximal cone `sigma`.
    pub fn linear_piece(&self, sigma: &Cone) -> Result<&[Q]> {
        let i = self.fan.maximal_index(sigma).ok_or(Error::NotMaximal)?;
        Ok(&self.weight.pieces[i])
    }
}

/// The `d`-fold base extension: every weight multiplied by `d`.
pub fn scale_weights(spec: &DegenerationSpec, d: u64) -> Result<DegenerationSpec> {
    if d == 0 {
        return Err(Error::InvalidParameter("scale factor must be positive".into()));
    }
    let f = Q::from_integer(BigInt::from(d));
    let mut out = DegenerationSpec::new(
        spec.input_rays.clone(),
        spec.input_weights.iter().map(|w| w * &f).collect(),
    )?;
    out.eta = spec.eta;
    out.tau_grid = spec.tau_grid.clone();
    out.rho = spec.rho;
    Ok(out)
}

fn integral(q: &Q) -> bool {
    q.denom().is_one()
}

/// Lattice points of `sigma` on which integrality of a linear function must
/// be checked: an `n`-subset basis of its rays plus the points of that
/// basis' fundamental parallelepiped.
fn integrality_witnesses(sigma: &Cone) -> Result<Vec<LatticeVector>> {
    let n = sigma.ambient();
    let q: Vec<Vec<Q>> = sigma.rays().iter().map(to_q).collect();
    let basis_idx = crate::fan_pl::itertools_free::combinations(q.len(), n)
        .into_iter()
        .find(|s| crate::qmat::rank_of(&s.iter().map(|&i| q[i].clone()).collect::<Vec<_>>()) == n)
        .ok_or(Error::NotMaximal)?;
    let basis: Vec<LatticeVector> = basis_idx.iter().map(|&i| sigma.rays()[i].clone()).collect();
    let mut pts = parallelepiped_points(&basis)?;
    pts.extend(basis);
    Ok(pts)
}

/// True iff the weight's linear piece on every maximal cone is integral on
/// the lattice.
pub fn is_simple(spec: &DegenerationSpec) -> Result<bool> {
    for (c, l) in spec.fan.maximal().iter().zip(&spec.weight.pieces) {
        for p in integrality_witnesses(c)? {
            if !integral(&dot(l, &to_q(&p))) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Smallest `d >= 1` such that the `d`-fold base extension is simple.
pub fn minimal_base_extension(spec: &DegenerationSpec) -> Result<u64> {
    // bounded by the lcm of all denominators of the linear pieces
    let bound = spec
        .weight
        .pieces
        .iter()
        .flatten()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let bound = bound.to_u64().ok_or_else(|| Error::InvalidParameter("denominator overflow".into()))?;
    for d in 1..=bound {
        if is_simple(&scale_weights(spec, d)?)? {
            return Ok(d);
        }
    }
    Ok(bound)
}

/// Multiplicity of the central fibre along the divisor of maximal cone
/// `sigma`: the index in `M` of `{x : l_sigma(x) in Z}`.
pub fn divisor_multiplicity(spec: &DegenerationSpec, sigma: &Cone) -> Result<BigInt> {
    let l = spec.linear_piece(sigma)?;
    let n = spec.rank;
    let den = l.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    // integer points (x, k) with c.x - den k = 0, projected to x
    let mut row: Vec<BigInt> = l.iter().map(|x| (x * Q::from_integer(den.clone())).to_integer()).collect();
    row.push(-den);
    let kernel = integer_kernel(&IntegerMatrix::from_rows(&[row]));
    let proj: Vec<LatticeVector> = kernel.iter().map(|v| LatticeVector::new(v.0[..n].to_vec())).collect();
    sublattice_index(&proj)
}

/// One stratum of the central fibre (a cone of the fan).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StratumNode {
    pub id: usize,
    pub dim: usize,
    pub rays: Vec<LatticeVector>,
    /// Divisor multiplicity, for maximal cones.
    pub multiplicity: Option<u64>,
}

/// Cones of the fan ordered by the face relation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrataPoset {
    pub rank: usize,
    pub nodes: Vec<StratumNode>,
    /// Covering relations `(face, cone)` with `dim cone = dim face + 1`.
    pub edges: Vec<(usize, usize)>,
    pub census: Vec<usize>,
}

impl StrataPoset {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

pub fn strata(spec: &DegenerationSpec) -> Result<StrataPoset> {
    let cones = spec.fan.all_cones();
    let mut nodes = Vec::with_capacity(cones.len());
    for (id, c) in cones.iter().enumerate() {
        let multiplicity = if c.rank() == spec.rank {
            Some(divisor_multiplicity(spec, c)?.to_u64().unwrap_or(u64::MAX))
        } else {
            None
        };
        nodes.push(StratumNode { id, dim: c.rank(), rays: c.rays().to_vec(), multiplicity });
    }
    let mut edges = Vec::new();
    for (j, c) in cones.iter().enumerate() {
        if c.rank() == 0 {
            continue;
        }
        for f in faces(c, c.rank() - 1)? {
            let i = cones.iter().position(|x| *x == f).expect("fan closed under faces");
            edges.push((i, j));
        }
    }
    edges.sort_unstable();
    Ok(StrataPoset { rank: spec.rank, nodes, edges, census: spec.fan.census() })
}

/// The monomials `t^{w_m} z^m` for every ray, principal branch for
/// fractional powers of `t`.
pub fn monomial_family(spec: &DegenerationSpec, t: Complex64, z: &[Complex64]) -> Result<Vec<Complex64>> {
    if z.len() != spec.rank {
        return Err(Error::DimensionMismatch { expected: spec.rank, found: z.len() });
    }
    if t == Complex64::zero() || z.iter().any(|x| *x == Complex64::zero()) {
        return Err(Error::ZeroArgument);
    }
    let log_t = t.ln();
    Ok(spec
        .rays
        .iter()
        .zip(&spec.weights)
        .map(|(m, w)| {
            let tw = (log_t * crate::scalar::rational_to_f64(w)).exp();
            m.0.iter().zip(z).fold(tw, |acc, (e, zj)| {
                acc * zj.powi(e.to_i32().expect("small exponent"))
            })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q_frac, q_int};

    pub(crate) fn rank_one(w1: Q) -> DegenerationSpec {
        DegenerationSpec::from_i64(&[&[1], &[-1]], &[q_int(0), w1]).unwrap()
    }

    pub(crate) fn example_one() -> DegenerationSpec {
        DegenerationSpec::from_i64(&[&[1, 0], &[-1, 0], &[0, 1], &[0, -1]], &[q_int(0), q_int(1), q_int(0), q_int(1)])
            .unwrap()
    }

    pub(crate) fn example_two() -> DegenerationSpec {
        DegenerationSpec::from_i64(&[&[1, 0], &[-1, 0], &[0, 1], &[1, -1]], &[q_int(0), q_int(1), q_int(0), q_int(1)])
            .unwrap()
    }

    #[test]
    fn construction_checks() {
        assert!(matches!(
            DegenerationSpec::from_i64(&[&[1, 0], &[0, 1], &[1, 1]], &[q_int(0), q_int(0), q_int(1)]),
            Err(Error::FanNotComplete(_))
        ));
        let s = example_two();
        assert_eq!(s.fan().maximal().len(), 4);
        assert!(s.input_was_convex());
    }

    #[test]
    fn simplicity_examples() {
        assert!(is_simple(&rank_one(q_int(1))).unwrap());
        assert!(is_simple(&example_one()).unwrap());
        assert!(is_simple(&example_two()).unwrap());
        // the cone spanned by (1,0),(1,2) with w = (0,1) has l = (0, 1/2)
        let s = DegenerationSpec::from_i64(
            &[&[1, 0], &[1, 2], &[-1, 0], &[0, -1]],
            &[q_int(0), q_int(1), q_int(1), q_int(1)],
        )
        .unwrap();
        let sigma = Cone::new(2, &[LatticeVector::from_i64(&[1, 0]), LatticeVector::from_i64(&[1, 2])]).unwrap();
        assert_eq!(s.linear_piece(&sigma).unwrap(), &[q_int(0), q_frac(1, 2)]);
        assert!(!is_simple(&s).unwrap());
        assert_eq!(divisor_multiplicity(&s, &sigma).unwrap(), BigInt::from(2));
        assert_eq!(minimal_base_extension(&s).unwrap(), 2);
    }

    #[test]
    fn base_extension_examples() {
        assert_eq!(minimal_base_extension(&rank_one(q_frac(1, 2))).unwrap(), 2);
        let s = DegenerationSpec::from_i64(&[&[1], &[-1]], &[q_frac(1, 3), q_frac(1, 2)]).unwrap();
        assert_eq!(minimal_base_extension(&s).unwrap(), 6);
        assert_eq!(minimal_base_extension(&example_one()).unwrap(), 1);
    }

    #[test]
    fn multiplicity_examples() {
        let s = rank_one(q_int(1));
        for c in s.fan().maximal() {
            assert_eq!(divisor_multiplicity(&s, c).unwrap(), BigInt::one());
        }
        let s = DegenerationSpec::from_i64(&[&[1], &[-1]], &[q_frac(1, 2), q_int(0)]).unwrap();
        let plus = Cone::new(1, &[LatticeVector::from_i64(&[1])]).unwrap();
        assert_eq!(divisor_multiplicity(&s, &plus).unwrap(), BigInt::from(2));
        let origin = Cone::origin(1);
        assert_eq!(divisor_multiplicity(&s, &origin).unwrap_err(), Error::NotMaximal);
    }

    #[test]
    fn strata_census() {
        assert_eq!(strata(&example_one()).unwrap().census, vec![1, 4, 4]);
        assert_eq!(strata(&example_two()).unwrap().census, vec![1, 4, 4]);
        let p = strata(&rank_one(q_int(1))).unwrap();
        assert_eq!(p.census, vec![1, 2]);
        assert_eq!(p.edges, vec![(0, 1), (0, 2)]);
        let back: StrataPoset = serde_json::from_str(&p.to_json()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn monomials() {
        let s = rank_one(q_int(1));
        let v = monomial_family(&s, Complex64::new(0.1, 0.0), &[Complex64::new(0.5, 0.0)]).unwrap();
        assert!((v[0] - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((v[1] - Complex64::new(0.2, 0.0)).norm() < 1e-15);
        let s = example_two();
        let v = monomial_family(&s, Complex64::new(0.01, 0.0), &[Complex64::new(0.3, 0.0), Complex64::new(0.4, 0.0)])
            .unwrap();
        let want = [0.3, 0.01 / 0.3, 0.4, 0.0075];
        for (a, b) in v.iter().zip(want) {
            assert!((a.re - b).abs() < 1e-15 && a.im.abs() < 1e-15);
        }
        assert_eq!(
            monomial_family(&s, Complex64::zero(), &[Complex64::one(), Complex64::one()]).unwrap_err(),
            Error::ZeroArgument
        );
    }
}

//! Cones, complete fans and piecewise-linear weights on them.
//!
//! Convexification is the lower convex hull of the rays lifted by their
//! weights into `M x Q`, computed exactly. A lower facet is a linear
//! functional `l` with `w_m >= l(m)` for every ray and equality on a set of
//! rays spanning `M ⊗ R`; its tight rays generate a maximal cone of the fan
//! of linearity domains.

use crate::error::{Error, Result};
use crate::lattice::{primitivize, LatticeVector};
use crate::qmat::{coords_in, dot, rank_of, QMatrix, Q};
use itertools_free::combinations;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

pub(crate) mod itertools_free {
    /// All `k`-element index subsets of `0..n` in lexicographic order.
    pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        if k > n {
            return out;
        }
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            out.push(idx.clone());
            let mut i = k;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if idx[i] != i + n - k {
                    break;
                }
                if i == 0 && idx[0] == n - k {
                    return out;
                }
            }
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
}

pub(crate) fn to_q(v: &LatticeVector) -> Vec<Q> {
    v.0.iter().cloned().map(Q::from_integer).collect()
}

/// Is `x` a nonnegative combination of `gens`? Returns one such combination
/// (indexed like `gens`) found through Carathéodory's theorem.
pub fn cone_membership(gens: &[Vec<Q>], x: &[Q]) -> Option<Vec<Q>> {
    if x.iter().all(|c| c.is_zero()) {
        return Some(vec![Q::zero(); gens.len()]);
    }
    let d = rank_of(gens);
    for k in 1..=d.min(gens.len()) {
        for subset in combinations(gens.len(), k) {
            let basis: Vec<Vec<Q>> = subset.iter().map(|&i| gens[i].clone()).collect();
            if rank_of(&basis) < k {
                continue;
            }
            if let Some(c) = coords_in(&basis, x) {
                if c.iter().all(|v| !v.is_negative()) {
                    let mut full = vec![Q::zero(); gens.len()];
                    for (&i, v) in subset.iter().zip(c) {
                        full[i] = v;
                    }
                    return Some(full);
                }
            }
        }
    }
    None
}

/// True iff the cone generated by `gens` contains no line.
pub fn is_pointed(gens: &[Vec<Q>]) -> bool {
    // A line exists iff 0 is a nontrivial nonnegative combination, i.e. some
    // circuit has a nullspace vector of constant sign.
    let d = rank_of(gens);
    for k in 2..=(d + 1).min(gens.len()) {
        for subset in combinations(gens.len(), k) {
            let vs: Vec<Vec<Q>> = subset.iter().map(|&i| gens[i].clone()).collect();
            if rank_of(&vs) != k - 1 {
                continue;
            }
            let m = QMatrix::from_rows(vs, gens[0].len()).transpose();
            let ns = m.nullspace();
            if ns.len() == 1 {
                let v = &ns[0];
                if v.iter().all(|c| c.is_positive()) || v.iter().all(|c| c.is_negative()) {
                    return false;
                }
            }
        }
    }
    true
}

/// A strongly convex rational polyhedral cone given by its extreme rays.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cone {
    rays: Vec<LatticeVector>,
    rank: usize,
    ambient: usize,
}

impl Cone {
    /// The zero cone in an ambient lattice of rank `ambient`.
    pub fn origin(ambient: usize) -> Self {
        Cone { rays: vec![], rank: 0, ambient }
    }

    /// Builds a cone from generators: primitivizes, deduplicates, keeps only
    /// extreme rays, and rejects cones containing a line.
    pub fn new(ambient: usize, generators: &[LatticeVector]) -> Result<Self> {
        let mut set = BTreeSet::new();
        for g in generators {
            if g.dim() != ambient {
                return Err(Error::DimensionMismatch { expected: ambient, found: g.dim() });
            }
            set.insert(primitivize(g)?);
        }
        let all: Vec<LatticeVector> = set.into_iter().collect();
        let q: Vec<Vec<Q>> = all.iter().map(to_q).collect();
        if !is_pointed(&q) {
            return Err(Error::InvalidParameter("cone contains a line".into()));
        }
        let rays: Vec<LatticeVector> = (0..all.len())
            .filter(|&i| {
                let others: Vec<Vec<Q>> =
                    (0..all.len()).filter(|&j| j != i).map(|j| q[j].clone()).collect();
                cone_membership(&others, &q[i]).is_none()
            })
            .map(|i| all[i].clone())
            .collect();
        let rank = rank_of(&rays.iter().map(to_q).collect::<Vec<_>>());
        Ok(Cone { rays, rank, ambient })
    }

    fn from_sorted_extreme(ambient: usize, mut rays: Vec<LatticeVector>) -> Self {
        rays.sort();
        let rank = rank_of(&rays.iter().map(to_q).collect::<Vec<_>>());
        Cone { rays, rank, ambient }
    }

    pub fn rays(&self) -> &[LatticeVector] {
        &self.rays
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn is_simplicial(&self) -> bool {
        self.rays.len() == self.rank
    }

    pub fn contains(&self, x: &[Q]) -> Option<Vec<Q>> {
        let gens: Vec<Vec<Q>> = self.rays.iter().map(to_q).collect();
        cone_membership(&gens, x)
    }

    /// True if every ray of `self` is a ray of `other` and `self` is a face.
    pub fn is_face_of(&self, other: &Cone) -> bool {
        self.rays.iter().all(|r| other.rays.contains(r))
            && face_lattice(other).iter().any(|f| {
                f.len() == self.rays.len() && f.iter().all(|&i| self.rays.contains(&other.rays[i]))
            })
    }
}

/// All faces of `c` as index sets into `c.rays()`, including the empty face
/// (origin) and `c` itself.
pub fn face_lattice(c: &Cone) -> Vec<Vec<usize>> {
    let n = c.rays.len();
    let d = c.rank;
    let all: Vec<usize> = (0..n).collect();
    if d == 0 {
        return vec![vec![]];
    }
    if d == 1 {
        return vec![vec![], all];
    }
    // coordinates in a basis of the span
    let q: Vec<Vec<Q>> = c.rays.iter().map(to_q).collect();
    let basis_idx = combinations(n, d)
        .into_iter()
        .find(|s| rank_of(&s.iter().map(|&i| q[i].clone()).collect::<Vec<_>>()) == d)
        .expect("rank-d subset exists");
    let basis: Vec<Vec<Q>> = basis_idx.iter().map(|&i| q[i].clone()).collect();
    let local: Vec<Vec<Q>> = q.iter().map(|r| coords_in(&basis, r).expect("in span")).collect();

    let mut facets: BTreeSet<Vec<usize>> = BTreeSet::new();
    for subset in combinations(n, d - 1) {
        let vs: Vec<Vec<Q>> = subset.iter().map(|&i| local[i].clone()).collect();
        if rank_of(&vs) != d - 1 {
            continue;
        }
        let ns = QMatrix::from_rows(vs, d).nullspace();
        let mut u = ns[0].clone();
        let vals: Vec<Q> = local.iter().map(|r| dot(&u, r)).collect();
        let pos = vals.iter().any(|v| v.is_positive());
        let neg = vals.iter().any(|v| v.is_negative());
        if pos && neg {
            continue;
        }
        if neg {
            u = u.into_iter().map(|x| -x).collect();
        }
        let tight: Vec<usize> = (0..n).filter(|&i| dot(&u, &local[i]).is_zero()).collect();
        facets.insert(tight);
    }
    let mut faces: BTreeSet<Vec<usize>> = facets.clone();
    faces.insert(all);
    loop {
        let current: Vec<Vec<usize>> = faces.iter().cloned().collect();
        let mut grew = false;
        for f in &current {
            for g in &facets {
                let inter: Vec<usize> = f.iter().copied().filter(|i| g.contains(i)).collect();
                if faces.insert(inter) {
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
    }
    faces.insert(vec![]);
    faces.into_iter().collect()
}

/// All `k`-dimensional faces of `c`.
pub fn faces(c: &Cone, k: usize) -> Result<Vec<Cone>> {
    if k > c.rank {
        return Err(Error::FaceDimension { k, rank: c.rank });
    }
    let mut out: Vec<Cone> = face_lattice(c)
        .into_iter()
        .map(|idx| Cone::from_sorted_extreme(c.ambient, idx.iter().map(|&i| c.rays[i].clone()).collect()))
        .filter(|f| f.rank == k)
        .collect();
    out.sort();
    out.dedup();
    Ok(out)
}

/// Piecewise-linear weight: values on rays plus the linear piece on each
/// maximal cone of the associated fan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PLWeight {
    pub rays: Vec<LatticeVector>,
    pub values: Vec<Q>,
    /// Linear functional of the function on each maximal cone (aligned with
    /// `Fan::maximal`).
    pub pieces: Vec<Vec<Q>>,
    /// The linear function subtracted by [`PLWeight::normalized`], if any.
    pub normalization: Option<Vec<Q>>,
}

impl PLWeight {
    pub fn value_of(&self, ray: &LatticeVector) -> Option<&Q> {
        self.rays.iter().position(|r| r == ray).map(|i| &self.values[i])
    }

    /// Evaluates the piecewise-linear function at `x` (any rational vector in
    /// the support) as the maximum over linear pieces; on a convex weight this
    /// agrees with the piece of the cone containing `x`.
    pub fn eval(&self, x: &[Q]) -> Q {
        self.pieces.iter().map(|l| dot(l, x)).max().expect("at least one piece")
    }

    /// Subtracts the linear piece of maximal cone `idx`, so the weight
    /// vanishes on that cone's rays.
    pub fn normalized(&self, idx: usize) -> PLWeight {
        let l = self.pieces[idx].clone();
        let values = self.rays.iter().zip(&self.values).map(|(r, v)| v - dot(&l, &to_q(r))).collect();
        let pieces = self
            .pieces
            .iter()
            .map(|p| p.iter().zip(&l).map(|(a, b)| a - b).collect())
            .collect();
        PLWeight { rays: self.rays.clone(), values, pieces, normalization: Some(l) }
    }

    /// Multiplies every value by `d` (the `d`-fold base extension).
    pub fn scaled(&self, d: &Q) -> PLWeight {
        PLWeight {
            rays: self.rays.clone(),
            values: self.values.iter().map(|v| v * d).collect(),
            pieces: self.pieces.iter().map(|p| p.iter().map(|x| x * d).collect()).collect(),
            normalization: self.normalization.as_ref().map(|p| p.iter().map(|x| x * d).collect()),
        }
    }
}

/// A fan given by its maximal cones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fan {
    rank: usize,
    maximal: Vec<Cone>,
    complete: bool,
}

impl Fan {
    pub fn new(rank: usize, mut maximal: Vec<Cone>) -> Self {
        maximal.sort();
        let complete = check_complete(rank, &maximal);
        Fan { rank, maximal, complete }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn maximal(&self) -> &[Cone] {
        &self.maximal
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// Distinct rays of the fan.
    pub fn rays(&self) -> Vec<LatticeVector> {
        let set: BTreeSet<LatticeVector> = self.maximal.iter().flat_map(|c| c.rays.iter().cloned()).collect();
        set.into_iter().collect()
    }

    /// Every cone of the fan (closed under faces), sorted by dimension.
    pub fn all_cones(&self) -> Vec<Cone> {
        let mut set = BTreeSet::new();
        for c in &self.maximal {
            for idx in face_lattice(c) {
                set.insert(Cone::from_sorted_extreme(
                    self.rank,
                    idx.iter().map(|&i| c.rays[i].clone()).collect(),
                ));
            }
        }
        let mut out: Vec<Cone> = set.into_iter().collect();
        out.sort_by(|a, b| (a.rank, &a.rays).cmp(&(b.rank, &b.rays)));
        out
    }

    /// Number of cones per dimension `0..=rank`.
    pub fn census(&self) -> Vec<usize> {
        let mut c = vec![0; self.rank + 1];
        for cone in self.all_cones() {
            c[cone.rank] += 1;
        }
        c
    }

    pub fn maximal_index(&self, c: &Cone) -> Option<usize> {
        self.maximal.iter().position(|m| m == c)
    }
}

fn check_complete(rank: usize, maximal: &[Cone]) -> bool {
    if maximal.is_empty() || maximal.iter().any(|c| c.rank != rank) {
        return false;
    }
    // every facet shared by exactly two maximal cones
    let mut counts: std::collections::BTreeMap<Vec<LatticeVector>, usize> = Default::default();
    for c in maximal {
        for f in faces(c, rank - 1).expect("rank >= 1") {
            *counts.entry(f.rays.clone()).or_default() += 1;
        }
    }
    if counts.values().any(|&k| k != 2) {
        return false;
    }
    // plus point location of the +- standard basis directions
    (0..rank).all(|i| {
        [1i64, -1].iter().all(|&s| {
            let mut e = vec![Q::zero(); rank];
            e[i] = Q::from_integer(s.into());
            maximal.iter().any(|c| c.contains(&e).is_some())
        })
    })
}

/// The unique minimal cone of `fan` containing `v`, with a nonnegative
/// representation of `v` on that cone's rays.
pub fn locate(fan: &Fan, v: &[Q]) -> Result<(Cone, Vec<Q>)> {
    if v.len() != fan.rank {
        return Err(Error::DimensionMismatch { expected: fan.rank, found: v.len() });
    }
    for c in fan.all_cones() {
        if let Some(coef) = c.contains(v) {
            return Ok((c, coef));
        }
    }
    let shown: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    Err(Error::NotCovered(format!("({})", shown.join(","))))
}

pub fn is_simplicial(fan: &Fan) -> bool {
    fan.maximal.iter().all(|c| c.rays.len() == fan.rank)
}

/// Why a ray did not survive convexification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DropReason {
    /// The lifted ray lies strictly above the lower hull.
    AboveHull,
    /// On the hull but inside the cone of other tight rays.
    NonExtremal,
}

/// Output of [`build_fan`].
#[derive(Clone, Debug)]
pub struct HullResult {
    pub fan: Fan,
    pub weight: PLWeight,
    pub convex: bool,
    pub dropped: Vec<(LatticeVector, Q, DropReason)>,
}

fn validate_input(rays: &[LatticeVector], weights: &[Q]) -> Result<(usize, Vec<LatticeVector>, Vec<Q>)> {
    if rays.len() != weights.len() {
        return Err(Error::DimensionMismatch { expected: rays.len(), found: weights.len() });
    }
    let n = rays.first().ok_or(Error::EmptyGenerators)?.dim();
    let mut seen: Vec<(LatticeVector, Q)> = Vec::new();
    for (r, w) in rays.iter().zip(weights) {
        if r.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: r.dim() });
        }
        let p = primitivize(r)?;
        if &p != r {
            return Err(Error::InvalidParameter(format!("ray {r} is not primitive")));
        }
        match seen.iter().find(|(s, _)| s == r) {
            Some((_, w0)) if w0 != w => return Err(Error::ConflictingWeights { ray: r.to_string() }),
            Some(_) => {}
            None => seen.push((r.clone(), w.clone())),
        }
    }
    let (rs, ws): (Vec<_>, Vec<_>) = seen.into_iter().unzip();
    if rank_of(&rs.iter().map(to_q).collect::<Vec<_>>()) != n {
        return Err(Error::RaysNotSpanning);
    }
    Ok((n, rs, ws))
}

/// Lower facets of the lifted ray configuration: `(functional, tight rays)`.
fn lower_facets(n: usize, q: &[Vec<Q>], w: &[Q]) -> Vec<(Vec<Q>, Vec<usize>)> {
    let mut out: Vec<(Vec<Q>, Vec<usize>)> = Vec::new();
    for subset in combinations(q.len(), n) {
        let a = QMatrix::from_rows(subset.iter().map(|&i| q[i].clone()).collect(), n);
        let b: Vec<Q> = subset.iter().map(|&i| w[i].clone()).collect();
        let Some(l) = a.solve(&b) else { continue };
        let slack: Vec<Q> = q.iter().zip(w).map(|(m, wm)| wm - dot(&l, m)).collect();
        if slack.iter().any(|s| s.is_negative()) {
            continue;
        }
        let tight: Vec<usize> = (0..q.len()).filter(|&i| slack[i].is_zero()).collect();
        if !out.iter().any(|(_, t)| *t == tight) {
            out.push((l, tight));
        }
    }
    out
}

/// Lower convex hull of the rays lifted by their weights; returns the fan of
/// linearity domains of the largest convex minorant.
pub fn build_fan(rays: &[LatticeVector], weights: &[Q]) -> Result<HullResult> {
    let (n, rays, weights) = validate_input(rays, weights)?;
    let mut order: Vec<usize> = (0..rays.len()).collect();
    order.sort_by(|&a, &b| rays[a].cmp(&rays[b]));
    let rays: Vec<LatticeVector> = order.iter().map(|&i| rays[i].clone()).collect();
    let weights: Vec<Q> = order.iter().map(|&i| weights[i].clone()).collect();
    let q: Vec<Vec<Q>> = rays.iter().map(to_q).collect();
    let facets = lower_facets(n, &q, &weights);
    if facets.is_empty() {
        return Err(Error::UnboundedBelow);
    }
    let mut extremal = vec![false; rays.len()];
    let mut tight_any = vec![false; rays.len()];
    let mut cones: Vec<(Cone, Vec<Q>)> = Vec::new();
    for (l, tight) in &facets {
        let gens: Vec<Vec<Q>> = tight.iter().map(|&i| q[i].clone()).collect();
        if !is_pointed(&gens) {
            return Err(Error::NotStrictlyConvex);
        }
        let mut ext = Vec::new();
        for (k, &i) in tight.iter().enumerate() {
            tight_any[i] = true;
            let others: Vec<Vec<Q>> =
                gens.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, g)| g.clone()).collect();
            if cone_membership(&others, &q[i]).is_none() {
                extremal[i] = true;
                ext.push(rays[i].clone());
            }
        }
        cones.push((Cone::from_sorted_extreme(n, ext), l.clone()));
    }
    cones.sort_by(|a, b| a.0.cmp(&b.0));
    let (maximal, pieces): (Vec<Cone>, Vec<Vec<Q>>) = cones.into_iter().unzip();

    let mut dropped = Vec::new();
    let mut kept_rays = Vec::new();
    let mut kept_vals = Vec::new();
    for i in 0..rays.len() {
        if extremal[i] {
            kept_rays.push(rays[i].clone());
            kept_vals.push(weights[i].clone());
        } else {
            let why = if tight_any[i] { DropReason::NonExtremal } else { DropReason::AboveHull };
            dropped.push((rays[i].clone(), weights[i].clone(), why));
        }
    }
    let fan = Fan { rank: n, complete: check_complete(n, &maximal), maximal };
    let weight = PLWeight { rays: kept_rays, values: kept_vals, pieces, normalization: None };
    Ok(HullResult { convex: dropped.is_empty(), fan, weight, dropped })
}

/// Largest convex function below the piecewise-linear function given by
/// `weights` on `rays`: the surviving rays and their induced weight.
pub fn convexify(rays: &[LatticeVector], weights: &[Q]) -> Result<(Vec<LatticeVector>, PLWeight)> {
    let h = build_fan(rays, weights)?;
    Ok((h.weight.rays.clone(), h.weight))
}

/// True iff no ray is tight on every lower facet, i.e. the lifted cone is
/// strongly convex with the marked direction in its interior.
pub fn is_strictly_convex(fan: &Fan, weight: &PLWeight) -> bool {
    weight.rays.iter().zip(&weight.values).all(|(r, w)| {
        let m = to_q(r);
        weight.pieces.iter().any(|l| &dot(l, &m) != w)
    }) && fan.maximal.len() == weight.pieces.len()
}

//! The integration domain of a chart as a union of convex cells.
//!
//! In chart coordinates every `a_m` is affine, so the domain
//! `{a_m >= eta for all m, A_sigma >= A_sigma' for all sigma'}` splits into
//! polytopes indexed by the ordering prefix that decides the owning chart:
//! a set `P` of basis rays with the smallest values followed by the first
//! ray `q` that no chart containing `P` also contains.

use crate::linalg::{solve, Mat};
use crate::model_metrics::Chart;
use crate::scalar::Real;
use rand::Rng;

/// `a . x >= b`.
#[derive(Clone, Debug, PartialEq)]
pub struct Halfspace<T> {
    pub a: Vec<T>,
    pub b: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cell<T> {
    pub chart: usize,
    /// Rays ordered first (all basis rays of the chart).
    pub prefix: Vec<usize>,
    /// The first ray outside every chart containing the prefix.
    pub next: usize,
    pub constraints: Vec<Halfspace<T>>,
    pub vertices: Vec<Vec<T>>,
}

fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u64..(1u64 << n)).map(move |mask| (0..n).filter(|&i| mask >> i & 1 == 1).collect())
}

/// Vertices of `{x : a.x >= b}` in dimension `dim`, deduplicated.
pub fn vertices<T: Real>(cons: &[Halfspace<T>], dim: usize, scale: T) -> Vec<Vec<T>> {
    let tol = T::c(1e-9) * scale.max(T::one());
    let mut out: Vec<Vec<T>> = Vec::new();
    if dim == 0 {
        return if cons.iter().all(|h| h.b <= tol) { vec![vec![]] } else { vec![] };
    }
    for idx in crate::fan_pl::itertools_free::combinations(cons.len(), dim) {
        let m: Mat<T> = idx.iter().map(|&i| cons[i].a.clone()).collect();
        let b: Vec<T> = idx.iter().map(|&i| cons[i].b).collect();
        let Ok(x) = solve(&m, &b) else { continue };
        if !x.iter().all(|v| v.is_finite()) {
            continue;
        }
        let feasible = cons.iter().all(|h| {
            let lhs: T = h.a.iter().zip(&x).map(|(&p, &q)| p * q).sum();
            lhs >= h.b - tol
        });
        if feasible && !out.iter().any(|v| v.iter().zip(&x).all(|(&p, &q)| (p - q).abs() <= tol)) {
            out.push(x);
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

/// Affine form of `a_m` in chart coordinates: `(gradient, constant)`.
fn affine<T: Real>(chart: &Chart<T>, m: usize, tau: T) -> (Vec<T>, T) {
    (chart.coords[m].clone(), chart.wprime[m] * tau)
}

/// The cells of the domain owned by `chart` at `tau`, with lower cutoff
/// `eta` on every raw `a_m`.
pub fn chart_cells<T: Real>(chart: &Chart<T>, tau: T, eta: T) -> Vec<Cell<T>> {
    let n = chart.rank;
    let nr = chart.nrays();
    let bases = &chart.all_bases;
    let mine = &bases[chart.index];
    let mut cells = Vec::new();
    for sub in subsets(mine.len()) {
        let prefix: Vec<usize> = sub.iter().map(|&i| mine[i]).collect();
        let owner = bases.iter().position(|b| prefix.iter().all(|p| b.contains(p)));
        if owner != Some(chart.index) {
            continue;
        }
        for q in 0..nr {
            if prefix.contains(&q) {
                continue;
            }
            if bases.iter().any(|b| b.contains(&q) && prefix.iter().all(|p| b.contains(p))) {
                continue;
            }
            let mut cons = Vec::new();
            for m in 0..nr {
                let (g, c) = affine(chart, m, tau);
                cons.push(Halfspace { a: g, b: eta - c });
            }
            let (gq, cq) = affine(chart, q, tau);
            for &p in &prefix {
                let (gp, cp) = affine(chart, p, tau);
                cons.push(Halfspace { a: gq.iter().zip(&gp).map(|(&x, &y)| x - y).collect(), b: cp - cq });
            }
            for m in 0..nr {
                if m == q || prefix.contains(&m) {
                    continue;
                }
                let (gm, cm) = affine(chart, m, tau);
                cons.push(Halfspace { a: gm.iter().zip(&gq).map(|(&x, &y)| x - y).collect(), b: cq - cm });
            }
            let verts = vertices(&cons, n, tau);
            if verts.len() > n {
                cells.push(Cell { chart: chart.index, prefix: prefix.clone(), next: q, constraints: cons, vertices: verts });
            }
        }
    }
    cells
}

/// Vertex sets of convex pieces covering the closed domain
/// `{a_m >= eta, A_sigma >= A_sigma' for all sigma'}`, ties included.
///
/// A piece fixes the ray `m*` attaining `A_sigma` and a minimal set `W` of
/// rays with `a_w <= a_{m*}` meeting the complement of every other chart's
/// basis that contains `m*`.
fn closed_domain_vertices<T: Real>(chart: &Chart<T>, tau: T, eta: T) -> Vec<Vec<Vec<T>>> {
    let (n, nr) = (chart.rank, chart.nrays());
    let bases = &chart.all_bases;
    let mine = &bases[chart.index];
    let diff = |p: usize, q: usize| {
        let ((gp, cp), (gq, cq)) = (affine(chart, p, tau), affine(chart, q, tau));
        Halfspace { a: gp.iter().zip(&gq).map(|(&x, &y)| x - y).collect(), b: cq - cp }
    };
    let mut out = Vec::new();
    for star in (0..nr).filter(|m| !mine.contains(m)) {
        let rivals: Vec<&Vec<usize>> =
            bases.iter().enumerate().filter(|&(k, b)| k != chart.index && b.contains(&star)).map(|(_, b)| b).collect();
        let hits = |w: &[usize]| rivals.iter().all(|b| w.iter().any(|x| !b.contains(x)));
        let candidates: Vec<Vec<usize>> = subsets(nr).filter(|w| !w.contains(&star) && hits(w)).collect();
        let minimal = candidates.iter().filter(|w| {
            !candidates.iter().any(|v| v.len() < w.len() && v.iter().all(|x| w.contains(x)))
        });
        for w in minimal {
            let mut cons: Vec<Halfspace<T>> = (0..nr)
                .map(|m| {
                    let (g, c) = affine(chart, m, tau);
                    Halfspace { a: g, b: eta - c }
                })
                .collect();
            cons.extend((0..nr).filter(|m| !mine.contains(m) && *m != star).map(|m| diff(m, star)));
            cons.extend(w.iter().map(|&x| diff(star, x)));
            let verts = vertices(&cons, n, tau);
            if !verts.is_empty() {
                out.push(verts);
            }
        }
    }
    out
}

/// Upper bound `1 + C(w)` for the largest eigenvalue of the exact model
/// metric (unshifted) on the closed chart domain: the trace bound
/// `sum_j (1 + sum_{m not in S} (m^j)^2 sup (a_j / a_m)^2)`, with each
/// supremum of a linear-fractional function attained at a vertex.
pub fn metric_bound<T: Real>(chart: &Chart<T>, tau: T, eta: T) -> T {
    let pieces = closed_domain_vertices(chart, tau, eta);
    let mut total = T::zero();
    for j in 0..chart.rank {
        total = total + T::one();
        for m in 0..chart.nrays() {
            if chart.is_basis(m).is_some() || chart.coords[m][j] == T::zero() {
                continue;
            }
            let mut sup = T::zero();
            for v in pieces.iter().flatten() {
                let raw = chart.raw_unchecked(v, tau);
                sup = sup.max(raw[chart.basis[j]] / raw[m]);
            }
            let mj = chart.coords[m][j];
            total = total + mj * mj * sup * sup;
        }
    }
    total
}

/// `n` chart points drawn log-uniformly from `[eta, tau]^rank` and kept
/// when they lie in the chart's domain with every raw `a_m >= eta`. Gives up
/// after `1000 n` draws.
pub fn sample_points<T: Real, R: Rng>(chart: &Chart<T>, tau: T, eta: T, n: usize, rng: &mut R) -> Vec<Vec<T>> {
    let (lo, hi) = (eta.ln().f64(), tau.ln().f64());
    let mut out = Vec::with_capacity(n);
    let mut tries = 0;
    while out.len() < n && tries < 1000 * n.max(1) {
        tries += 1;
        let a: Vec<T> = (0..chart.rank).map(|_| T::c(rng.gen_range(lo..hi).exp())).collect();
        let raw = chart.raw_unchecked(&a, tau);
        if raw.iter().all(|&r| r >= eta) && chart.in_domain(&raw) {
            out.push(a);
        }
    }
    out
}

//! Brute-force oracles sharing nothing with the crate beyond its input types.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use std::collections::BTreeSet;

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(n.into())
}

pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// Solves the square system `a x = b` by Gaussian elimination; `None` when
/// singular.
pub fn solve(a: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    let n = a.len();
    let mut m: Vec<Vec<Q>> = a.iter().zip(b).map(|(r, v)| r.iter().cloned().chain([v.clone()]).collect()).collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = &m[r][col] / &m[col][col];
                for c in col..=n {
                    let v = &f * &m[col][c];
                    m[r][c] -= v;
                }
            }
        }
    }
    Some((0..n).map(|i| &m[i][n] / &m[i][i]).collect())
}

pub fn dot(x: &[Q], y: &[Q]) -> Q {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn transpose(cols: &[Vec<Q>]) -> Vec<Vec<Q>> {
    (0..cols[0].len()).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect()
}

/// True iff `x` is a nonnegative combination of `gens` (Carathéodory over
/// linearly independent subsets).
pub fn in_cone(gens: &[Vec<Q>], x: &[Q]) -> bool {
    if x.iter().all(|v| v.is_zero()) {
        return true;
    }
    let n = x.len();
    for k in 1..=n.min(gens.len()) {
        for s in subsets(gens.len(), k) {
            let cols: Vec<Vec<Q>> = s.iter().map(|&i| gens[i].clone()).collect();
            // least-squares free: pick k independent coordinates
            for rows in subsets(n, k) {
                let a: Vec<Vec<Q>> = rows.iter().map(|&r| cols.iter().map(|c| c[r].clone()).collect()).collect();
                let b: Vec<Q> = rows.iter().map(|&r| x[r].clone()).collect();
                let Some(c) = solve(&a, &b) else { continue };
                let fits = (0..n).all(|r| cols.iter().zip(&c).map(|(g, ci)| &g[r] * ci).sum::<Q>() == x[r]);
                if fits && c.iter().all(|v| !v.is_negative()) {
                    return true;
                }
            }
        }
    }
    false
}

/// A lower facet of the lifted configuration `{(m, w_m)}`: its linear
/// functional and the extreme rays on it.
#[derive(Clone, Debug)]
pub struct Facet {
    pub l: Vec<Q>,
    pub rays: BTreeSet<Vec<i64>>,
}

/// Lower hull of the cone over the lifted rays by enumerating every
/// `n`-subset: `l` is a facet iff `l(m) <= w_m` for all rays.
pub fn lower_hull(rays: &[Vec<i64>], w: &[Q]) -> Vec<Facet> {
    let n = rays[0].len();
    let rq: Vec<Vec<Q>> = rays.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect();
    let mut seen: BTreeSet<Vec<Q>> = BTreeSet::new();
    let mut out = Vec::new();
    for s in subsets(rays.len(), n) {
        let a: Vec<Vec<Q>> = s.iter().map(|&i| rq[i].clone()).collect();
        let b: Vec<Q> = s.iter().map(|&i| w[i].clone()).collect();
        let Some(l) = solve(&a, &b) else { continue };
        if !rq.iter().zip(w).all(|(m, wm)| dot(&l, m) <= *wm) || !seen.insert(l.clone()) {
            continue;
        }
        let on: Vec<usize> = (0..rays.len()).filter(|&i| dot(&l, &rq[i]) == w[i]).collect();
        let extreme: BTreeSet<Vec<i64>> = on
            .iter()
            .filter(|&&i| {
                let others: Vec<Vec<Q>> = on.iter().filter(|&&j| j != i).map(|&j| rq[j].clone()).collect();
                !in_cone(&others, &rq[i])
            })
            .map(|&i| rays[i].clone())
            .collect();
        out.push(Facet { l, rays: extreme });
    }
    out
}

/// True iff the cone spanned by `rays` contains no line: no generator's
/// negative lies in the cone of the others.
pub fn pointed(rays: &BTreeSet<Vec<i64>>) -> bool {
    let rq: Vec<Vec<Q>> = rays.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect();
    (0..rq.len()).all(|i| {
        let others: Vec<Vec<Q>> = (0..rq.len()).filter(|&j| j != i).map(|j| rq[j].clone()).collect();
        let neg: Vec<Q> = rq[i].iter().map(|x| -x.clone()).collect();
        !in_cone(&others, &neg)
    })
}

/// Lattice points of the half-open parallelepiped spanned by `basis`.
pub fn parallelepiped(basis: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = basis.len();
    let lo: Vec<i64> = (0..n).map(|i| basis.iter().map(|b| b[i].min(0)).sum()).collect();
    let hi: Vec<i64> = (0..n).map(|i| basis.iter().map(|b| b[i].max(0)).sum()).collect();
    let cols: Vec<Vec<Q>> = basis.iter().map(|b| b.iter().map(|&x| q(x)).collect()).collect();
    let a = transpose(&cols);
    let mut out = Vec::new();
    let mut x = lo.clone();
    loop {
        let xq: Vec<Q> = x.iter().map(|&v| q(v)).collect();
        if let Some(c) = solve(&a, &xq) {
            if c.iter().all(|v| !v.is_negative() && *v < Q::one()) {
                out.push(x.clone());
            }
        }
        let mut i = 0;
        loop {
            if i == n {
                return out;
            }
            if x[i] < hi[i] {
                x[i] += 1;
                break;
            }
            x[i] = lo[i];
            i += 1;
        }
    }
}

/// Smallest `d` making every facet functional integral on the lattice,
/// checked on basis rays plus parallelepiped points of each facet.
pub fn base_extension_oracle(facets: &[Facet]) -> u64 {
    let mut d = BigInt::one();
    for f in facets {
        let rays: Vec<Vec<i64>> = f.rays.iter().cloned().collect();
        let n = rays[0].len();
        let basis = subsets(rays.len(), n)
            .into_iter()
            .map(|s| s.iter().map(|&i| rays[i].clone()).collect::<Vec<_>>())
            .find(|b| {
                let cols: Vec<Vec<Q>> = b.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect();
                solve(&transpose(&cols), &vec![Q::zero(); n]).is_some()
            })
            .expect("full-dimensional facet");
        let mut pts = parallelepiped(&basis);
        pts.extend(basis);
        for p in pts {
            let v = dot(&f.l, &p.iter().map(|&x| q(x)).collect::<Vec<_>>());
            d = d.lcm(v.denom());
        }
    }
    d.to_u64().expect("small extension")
}

fn primitive(v: &[i64]) -> Vec<i64> {
    let g = v.iter().fold(0i64, |acc, &x| acc.gcd(&x));
    v.iter().map(|&x| x / g).collect()
}

/// A complete ray configuration of rank `n <= 3` with at most 7 rays: the
/// coordinate cross plus random primitive extras.
pub fn random_rays<R: Rng>(rng: &mut R, n: usize) -> Vec<Vec<i64>> {
    let mut rays: Vec<Vec<i64>> = Vec::new();
    for i in 0..n {
        for s in [1, -1] {
            let mut e = vec![0; n];
            e[i] = s;
            rays.push(e);
        }
    }
    let extra = rng.gen_range(0..=(7 - 2 * n));
    for _ in 0..extra {
        let v: Vec<i64> = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
        if v.iter().all(|&x| x == 0) {
            continue;
        }
        let p = primitive(&v);
        if !rays.contains(&p) {
            rays.push(p);
        }
    }
    rays
}

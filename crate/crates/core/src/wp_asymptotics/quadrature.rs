//! Deterministic composite Gauss–Legendre quadrature over convex polytopes,
//! iterated one coordinate at a time, with panels graded geometrically
//! toward every breakpoint.

use crate::error::{Error, Result};
use crate::region::{vertices, Cell, Halfspace};
use crate::scalar::{pairwise_sum, Real};

/// Panel rule: geometric panels per decade of distance to a breakpoint and
/// Gauss–Legendre order per panel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PanelRule {
    pub per_decade: usize,
    pub order: usize,
}

impl Default for PanelRule {
    fn default() -> Self {
        PanelRule { per_decade: 4, order: 10 }
    }
}

impl PanelRule {
    pub fn refined(self) -> Self {
        PanelRule { per_decade: 2 * self.per_decade, ..self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    /// `|I(2P) - I(P)|` for panel density `P`.
    pub error: T,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Panel endpoints on `[lo, hi]`, graded geometrically toward both ends
/// down to width `fine`.
pub fn graded_panels<T: Real>(lo: T, hi: T, fine: T, per_decade: usize) -> Vec<T> {
    let len = hi - lo;
    if !(len > T::zero()) {
        return vec![];
    }
    let half = len / T::c(2.0);
    let f = fine.min(half / T::c(2.0)).max(half * T::c(1e-14));
    let ratio = T::c(10f64.powf(1.0 / per_decade.max(1) as f64));
    let mut offs = vec![T::zero()];
    let mut d = f;
    while d < half / ratio.sqrt() {
        offs.push(d);
        d = d * ratio;
    }
    let mut pts: Vec<T> = offs.iter().map(|&o| lo + o).collect();
    pts.push(lo + half);
    pts.extend(offs.iter().rev().map(|&o| hi - o));
    pts
}

pub(crate) struct Integrator<'a, T> {
    pub rule: PanelRule,
    pub fine: T,
    pub scale: T,
    nodes: (Vec<T>, Vec<T>),
    f: &'a dyn Fn(&[T]) -> Result<T>,
}

impl<'a, T: Real> Integrator<'a, T> {
    pub fn new(rule: PanelRule, fine: T, scale: T, f: &'a dyn Fn(&[T]) -> Result<T>) -> Self {
        let (x, w) = gauss_legendre(rule.order);
        Integrator { rule, fine, scale, nodes: (x.into_iter().map(T::c).collect(), w.into_iter().map(T::c).collect()), f }
    }

    fn interval(&self, lo: T, hi: T, mut g: impl FnMut(T) -> Result<T>) -> Result<T> {
        let pts = graded_panels(lo, hi, self.fine, self.rule.per_decade);
        let mut parts = Vec::with_capacity(pts.len());
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (c, r) = ((a + b) / T::c(2.0), (b - a) / T::c(2.0));
            let mut vals = Vec::with_capacity(self.nodes.0.len());
            for (&x, &wt) in self.nodes.0.iter().zip(&self.nodes.1) {
                vals.push(wt * g(c + r * x)?);
            }
            parts.push(r * pairwise_sum(&vals));
        }
        Ok(pairwise_sum(&parts))
    }

    /// Integral over `{x : a.x >= b}` with the leading coordinates fixed to
    /// `prefix`.
    fn polytope(&self, cons: &[Halfspace<T>], prefix: &mut Vec<T>) -> Result<T> {
        let dim = cons.first().map_or(0, |h| h.a.len());
        if dim == 0 {
            let v = (self.f)(prefix)?;
            if !v.is_finite() {
                let shown: Vec<String> = prefix.iter().map(|x| format!("{x}")).collect();
                return Err(Error::NonFiniteIntegrand(format!("({})", shown.join(","))));
            }
            return Ok(v);
        }
        let breaks: Vec<T> = if dim == 1 {
            let (mut lo, mut hi) = (T::neg_infinity(), T::infinity());
            for h in cons {
                let a = h.a[0];
                if a > T::zero() {
                    lo = lo.max(h.b / a);
                } else if a < T::zero() {
                    hi = hi.min(h.b / a);
                } else if h.b > T::c(1e-9) * self.scale {
                    return Ok(T::zero());
                }
            }
            if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
                return Ok(T::zero());
            }
            vec![lo, hi]
        } else {
            let vs = vertices(cons, dim, self.scale);
            let mut xs: Vec<T> = vs.iter().map(|v| v[0]).collect();
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let tol = T::c(1e-9) * self.scale.max(T::one());
            xs.dedup_by(|a, b| (*a - *b).abs() <= tol);
            xs
        };
        let mut parts = Vec::new();
        for w in breaks.windows(2) {
            let v = self.interval(w[0], w[1], |x| {
                let sub: Vec<Halfspace<T>> = cons
                    .iter()
                    .map(|h| Halfspace { a: h.a[1..].to_vec(), b: h.b - h.a[0] * x })
                    .filter(|h| dim > 1 || !h.a.is_empty())
                    .collect();
                prefix.push(x);
                let r = if dim == 1 { self.polytope(&[], prefix) } else { self.polytope(&sub, prefix) };
                prefix.pop();
                r
            })?;
            parts.push(v);
        }
        Ok(pairwise_sum(&parts))
    }
}

/// Single-pass [`integrate_region`] without the refinement estimate.
pub fn integrate_region_once<T: Real>(cells: &[Cell<T>], f: &dyn Fn(&[T]) -> Result<T>, rule: PanelRule, fine: T, scale: T) -> Result<T> {
    let q = Integrator::new(rule, fine, scale, f);
    let mut parts = Vec::with_capacity(cells.len());
    for c in cells {
        parts.push(q.polytope(&c.constraints, &mut Vec::new())?);
    }
    Ok(pairwise_sum(&parts))
}

/// Integral of `f` over the union of `cells`, with the error estimated by
/// doubling the panel density. `fine` is the smallest panel width near
/// breakpoints, `scale` the coordinate magnitude used for tolerances.
pub fn integrate_region<T: Real>(
    cells: &[Cell<T>],
    f: &dyn Fn(&[T]) -> Result<T>,
    rule: PanelRule,
    fine: T,
    scale: T,
) -> Result<QuadResult<T>> {
    let coarse = integrate_region_once(cells, f, rule, fine, scale)?;
    let finer = integrate_region_once(cells, f, rule.refined(), fine, scale)?;
    Ok(QuadResult { value: finer, error: (finer - coarse).abs() })
}

/// One-dimensional integral on `[lo, hi]`.
pub fn integrate_interval<T: Real>(lo: T, hi: T, f: &dyn Fn(T) -> Result<T>, rule: PanelRule, fine: T) -> Result<QuadResult<T>> {
    let g = |x: &[T]| f(x[0]);
    let once = |r: PanelRule| -> Result<T> {
        let q = Integrator::new(r, fine, hi.abs().max(lo.abs()), &g);
        q.interval(lo, hi, f)
    };
    let coarse = once(rule)?;
    let finer = once(rule.refined())?;
    Ok(QuadResult { value: finer, error: (finer - coarse).abs() })
}

/// An axis-aligned box as a single cell.
pub fn box_cell<T: Real>(lo: &[T], hi: &[T]) -> Cell<T> {
    let n = lo.len();
    let mut cons = Vec::new();
    for j in 0..n {
        let mut e = vec![T::zero(); n];
        e[j] = T::one();
        cons.push(Halfspace { a: e.clone(), b: lo[j] });
        cons.push(Halfspace { a: e.iter().map(|&x| -x).collect(), b: -hi[j] });
    }
    let verts = vertices(&cons, n, hi.iter().fold(T::one(), |m, &x| m.max(x.abs())));
    Cell { chart: 0, prefix: vec![], next: 0, constraints: cons, vertices: verts }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_exact_for_polynomials() {
        let (x, w) = gauss_legendre(10);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let i: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((i - 2.0 / 19.0).abs() < 1e-14);
        let (x1, w1) = gauss_legendre(1);
        assert!(x1[0].abs() < 1e-15 && (w1[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn inverse_square_interval() {
        let r = integrate_interval(10.0, 1e4, &|a: f64| Ok(1.0 / (a * a)), PanelRule::default(), 10.0).unwrap();
        assert!((r.value - (0.1 - 1e-4)).abs() < 1e-14, "{}", r.value);
        assert!(r.error < 1e-12);
    }

    #[test]
    fn product_box_is_square() {
        let one = integrate_region(&[box_cell(&[10.0], &[1e4])], &|a: &[f64]| Ok(1.0 / (a[0] * a[0])), PanelRule::default(), 10.0, 1e4)
            .unwrap()
            .value;
        let two = integrate_region(
            &[box_cell(&[10.0, 10.0], &[1e4, 1e4])],
            &|a: &[f64]| Ok(1.0 / (a[0] * a[0] * a[1] * a[1])),
            PanelRule::default(),
            10.0,
            1e4,
        )
        .unwrap()
        .value;
        assert!((two - one * one).abs() < 1e-15);
    }

    #[test]
    fn triangle_area() {
        let h = |a: Vec<f64>, b: f64| Halfspace { a, b };
        let cons = vec![h(vec![1.0, 0.0], 0.0), h(vec![0.0, 1.0], 0.0), h(vec![-1.0, -1.0], -1.0)];
        let verts = vertices(&cons, 2, 1.0);
        let cell = Cell { chart: 0, prefix: vec![], next: 0, constraints: cons, vertices: verts };
        let r = integrate_region(&[cell], &|x: &[f64]| Ok(x[0] * x[1]), PanelRule::default(), 0.1, 1.0).unwrap();
        assert!((r.value - 1.0 / 24.0).abs() < 1e-14);
    }

    #[test]
    fn non_finite_reported() {
        let e = integrate_interval(0.0, 1.0, &|x: f64| Ok(1.0 / x - 1.0 / x), PanelRule::default(), 0.1);
        assert!(e.is_ok());
        let e = integrate_region(&[box_cell(&[0.0], &[1.0])], &|_x: &[f64]| Ok(f64::NAN), PanelRule::default(), 0.1, 1.0);
        assert!(matches!(e, Err(Error::NonFiniteIntegrand(_))));
    }

    #[test]
    fn deterministic() {
        let f = |a: &[f64]| Ok((a[0] * 0.37).sin() / (1.0 + a[0]));
        let c = [box_cell(&[1.0], &[50.0])];
        let r1 = integrate_region(&c, &f, PanelRule::default(), 1.0, 50.0).unwrap();
        let r2 = integrate_region(&c, &f, PanelRule::default(), 1.0, 50.0).unwrap();
        assert_eq!(r1.value.to_bits(), r2.value.to_bits());
    }
}

//! Weil–Petersson ratios over chart domains, chart volumes, the limiting
//! constants `B_j`, `C = 4 eta sum_j B_j`, and decay fits.

use super::ks::{dbar_norm_exact, dbar_norm_raw};
use super::quadrature::{integrate_interval, integrate_region, PanelRule, QuadResult};
use crate::degeneration::DegenerationSpec;
use crate::error::{Error, Result};
use crate::model_metrics::{Chart, ChartPoint};
use crate::qmat::Q;
use crate::region::chart_cells;
use crate::scalar::Real;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

/// Which `||dbar W||^2` enters the numerator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum WpIntegrand {
    /// The leading-order closed form.
    #[default]
    ClosedForm,
    /// The exact toric field from the linear solve.
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WpRatio<T> {
    pub numerator: QuadResult<T>,
    pub denominator: QuadResult<T>,
    pub ratio: T,
    /// Propagated relative quadrature error of the ratio.
    pub rel_error: T,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn volume_weight<T: Real>(chart: &Chart<T>, raw: &[T]) -> T {
    let prod = chart.basis.iter().fold(T::one(), |acc, &b| acc / (raw[b] * raw[b]));
    chart.log_rho(raw).exp() * prod
}

fn fine<T: Real>(chart: &Chart<T>) -> T {
    chart.eta
}

/// `n! 2^n int rho prod da_j / a_j^2` over the chart domain.
pub fn chart_volume<T: Real>(chart: &Chart<T>, tau: T, rule: PanelRule) -> Result<QuadResult<T>> {
    let cells = chart_cells(chart, tau, chart.eta);
    let f = |a: &[T]| Ok(volume_weight(chart, &chart.raw_unchecked(a, tau)));
    let r = integrate_region(&cells, &f, rule, fine(chart), tau)?;
    let k = T::c(factorial(chart.rank) * 2f64.powi(chart.rank as i32));
    Ok(QuadResult { value: k * r.value, error: k * r.error })
}

/// `int ||dbar W||^2 omega^n / int omega^n` over the chart domain.
pub fn wp_ratio<T: Real>(chart: &Chart<T>, tau: T, rule: PanelRule, integrand: WpIntegrand) -> Result<WpRatio<T>> {
    if !(tau >= T::c(10.0) * chart.eta * chart.eta) {
        return Err(Error::InvalidParameter(format!("wp_ratio needs tau >= 10 eta^2, got tau = {tau}")));
    }
    let cells = chart_cells(chart, tau, chart.eta);
    let num = |a: &[T]| -> Result<T> {
        let raw = chart.raw_unchecked(a, tau);
        let d = match integrand {
            WpIntegrand::ClosedForm => dbar_norm_raw(chart, &raw),
            WpIntegrand::Exact => {
                dbar_norm_exact(chart, &ChartPoint::new(chart.index, a.to_vec(), tau))? * chart.log_rho(&raw).exp()
            }
        };
        Ok(d * volume_weight(chart, &raw))
    };
    let den = |a: &[T]| Ok(volume_weight(chart, &chart.raw_unchecked(a, tau)));
    let numerator = integrate_region(&cells, &num, rule, fine(chart), tau)?;
    let denominator = integrate_region(&cells, &den, rule, fine(chart), tau)?;
    let ratio = numerator.value / denominator.value;
    let rel_error = numerator.error / numerator.value.abs() + denominator.error / denominator.value.abs();
    Ok(WpRatio { numerator, denominator, ratio, rel_error })
}

/// The boundary of the limiting domain along one chart axis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxisBoundary {
    /// `c_j` as an exact rational.
    #[serde(serialize_with = "crate::scalar::ser_rational")]
    pub c: Q,
    /// Ray outside the chart whose a-value is the chart's `A` at `c_j`.
    pub binding_ray: usize,
    /// The competing chart that takes over beyond `c_j`.
    pub competitor: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BConstants<T> {
    pub axes: Vec<AxisBoundary>,
    pub b: Vec<T>,
    pub b_error: Vec<T>,
    /// `C = 4 eta sum_j B_j`.
    pub c_const: T,
}

/// Axis values `g_m(b) = w'_m + m^j b` of every ray in the `tau -> infinity`
/// limit, on the `j`-th axis of `chart`.
fn axis_lines<T: Real>(chart: &Chart<T>, j: usize) -> Vec<(Q, Q)> {
    chart.coords_q.iter().zip(&chart.wprime_q).map(|(c, w)| (w.clone(), c[j].clone())).collect()
}

fn eval(l: &(Q, Q), b: &Q) -> Q {
    &l.0 + &l.1 * b
}

/// Owner of the limiting axis point `b` and the first ray outside it, by the
/// same ordering rule as the chart cells: rays sorted by value (ties broken by
/// the sum of the remaining basis coordinates, i.e. equal small offsets off
/// the axis), the longest prefix contained in some chart decides, and the
/// lowest-index chart containing it owns the point.
fn limit_owner<T: Real>(chart: &Chart<T>, lines: &[(Q, Q)], j: usize, b: &Q) -> (usize, usize) {
    let mut order: Vec<(Q, Q, usize)> = lines
        .iter()
        .enumerate()
        .map(|(m, l)| {
            let off: Q = (0..chart.rank).filter(|&k| k != j).map(|k| chart.coords_q[m][k].clone()).sum();
            (eval(l, b), off, m)
        })
        .collect();
    order.sort();
    let bases = &chart.all_bases;
    let mut prefix: Vec<usize> = Vec::new();
    let mut next = order.last().map_or(0, |o| o.2);
    for (_, _, m) in &order {
        if bases.iter().any(|bs| bs.contains(m) && prefix.iter().all(|p| bs.contains(p))) {
            prefix.push(*m);
        } else {
            next = *m;
            break;
        }
    }
    let owner = bases.iter().position(|bs| prefix.iter().all(|p| bs.contains(p))).unwrap_or(chart.index);
    (owner, next)
}

/// Derives `c_j` from the limiting domain: the largest `b` such that the
/// axis segment `(0, b)` stays in the chart's domain with every `a_m >= 0`.
pub fn axis_boundary<T: Real>(chart: &Chart<T>, j: usize) -> Result<AxisBoundary> {
    let lines = axis_lines(chart, j);
    let holds = |b: &Q| -> bool {
        !lines.iter().any(|l| eval(l, b).is_negative()) && limit_owner(chart, &lines, j, b).0 == chart.index
    };
    let mut cuts: Vec<Q> = Vec::new();
    for (i, l) in lines.iter().enumerate() {
        if !l.1.is_zero() {
            cuts.push(-&l.0 / &l.1);
        }
        for m in &lines[i + 1..] {
            let ds = &l.1 - &m.1;
            if !ds.is_zero() {
                cuts.push((&m.0 - &l.0) / ds);
            }
        }
    }
    cuts.retain(|c| c.is_positive());
    cuts.sort();
    cuts.dedup();
    let two = Q::from_integer(2.into());
    let mut prev = Q::zero();
    let mut lo = Q::zero();
    let mut end = None;
    for c in &cuts {
        let mid = (&lo + c) / &two;
        if !holds(&mid) {
            end = Some((lo.clone(), mid));
            break;
        }
        prev = lo;
        lo = c.clone();
    }
    let (c, beyond) = match end {
        Some(e) => e,
        None => {
            let far = &lo + Q::one();
            if holds(&far) {
                return Err(Error::DegenerateChartBoundary(format!("axis {j} unbounded")));
            }
            (lo, far)
        }
    };
    if !c.is_positive() {
        return Err(Error::DegenerateChartBoundary(format!("{c} on axis {j}")));
    }
    let basis = &chart.all_bases[chart.index];
    if (0..lines.len()).any(|m| !basis.contains(&m) && eval(&lines[m], &c).is_zero()) {
        return Err(Error::DegenerateChartBoundary(format!("{c} on axis {j}: a ray outside the chart vanishes")));
    }
    let binding_ray = limit_owner(chart, &lines, j, &((&prev + &c) / &two)).1;
    let competitor = limit_owner(chart, &lines, j, &beyond).0;
    Ok(AxisBoundary { c, binding_ray, competitor })
}

/// `B_j = int_0^{c_j} |sum_{m not in S} w'_m m^j / (w'_m + m^j b)^2|^2 db`
/// with `rho_j = 1`, and `C = 4 eta sum_j B_j`.
pub fn b_constants<T: Real>(chart: &Chart<T>, rule: PanelRule) -> Result<BConstants<T>> {
    let mut axes = Vec::new();
    let mut b = Vec::new();
    let mut b_error = Vec::new();
    for j in 0..chart.rank {
        let ax = axis_boundary(chart, j)?;
        let cj = T::from_rational(&ax.c);
        let f = |x: T| -> Result<T> {
            let s: T = (0..chart.nrays())
                .filter(|m| chart.is_basis(*m).is_none())
                .map(|m| {
                    let mj = chart.coords[m][j];
                    let d = chart.wprime[m] + mj * x;
                    chart.wprime[m] * mj / (d * d)
                })
                .sum();
            Ok(s * s)
        };
        let r = integrate_interval(T::zero(), cj, &f, rule, cj)?;
        axes.push(ax);
        b.push(r.value);
        b_error.push(r.error);
    }
    let c_const = T::c(4.0) * chart.eta * b.iter().copied().sum::<T>();
    Ok(BConstants { axes, b, b_error, c_const })
}

/// Least-squares slope of `log ratio` against `log tau` over the points in
/// the top four decades of the grid.
pub fn fit_exponent<T: Real>(taus: &[T], ratios: &[T]) -> Option<T> {
    let top = taus.iter().copied().fold(T::neg_infinity(), T::max);
    let cut = top.log10() - T::c(3.0) - T::c(1e-9);
    let pts: Vec<(T, T)> = taus
        .iter()
        .zip(ratios)
        .filter(|(t, r)| t.log10() >= cut && **r > T::zero())
        .map(|(t, r)| (t.ln(), r.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = T::c(pts.len() as f64);
    let mx = pts.iter().map(|p| p.0).sum::<T>() / k;
    let my = pts.iter().map(|p| p.1).sum::<T>() / k;
    let sxy: T = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: T = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

/// Smallest `K` with `|ratio tau^3 - C| <= K log(tau) / tau` on the grid.
pub fn fit_k<T: Real>(taus: &[T], ratios: &[T], c: T) -> T {
    taus.iter()
        .zip(ratios)
        .map(|(&t, &r)| (r * t * t * t - c).abs() * t / t.ln())
        .fold(T::zero(), T::max)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WpRow {
    pub tau: f64,
    pub volume: f64,
    pub volume_error: f64,
    pub ratio: f64,
    pub ratio_tau3: f64,
    pub quad_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WpDecay {
    pub chart: usize,
    pub eta: f64,
    pub rows: Vec<WpRow>,
    pub c_const: f64,
    pub b: Vec<f64>,
    pub axes: Vec<AxisBoundary>,
    pub exponent: Option<f64>,
    pub k_fit: f64,
}

/// Ratios over the spec's tau grid for one chart, with fits against `C`.
pub fn wp_decay(spec: &DegenerationSpec, chart: usize, rule: PanelRule) -> Result<WpDecay> {
    let c = Chart::<f64>::new(spec, chart)?;
    let bc = b_constants(&c, rule)?;
    let mut rows = Vec::new();
    for &tau in &spec.tau_grid {
        let r = wp_ratio(&c, tau, rule, WpIntegrand::ClosedForm)?;
        let v = chart_volume(&c, tau, rule)?;
        rows.push(WpRow {
            tau,
            volume: v.value,
            volume_error: v.error,
            ratio: r.ratio,
            ratio_tau3: r.ratio * tau.powi(3),
            quad_error: r.rel_error,
        });
    }
    let taus: Vec<f64> = rows.iter().map(|r| r.tau).collect();
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    Ok(WpDecay {
        chart,
        eta: spec.eta,
        exponent: fit_exponent(&taus, &ratios),
        k_fit: fit_k(&taus, &ratios, bc.c_const),
        c_const: bc.c_const,
        b: bc.b,
        axes: bc.axes,
        rows,
    })
}

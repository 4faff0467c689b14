//! The glued horizontal field `W = sum_p mu_p W_p` and its transition-shell
//! term `sum_p dbar mu_p (W_p - W_0)`, where `W_p` is the horizontal lift for
//! the stratum potential `log h_p + log rho` and `W_0` the origin's.

use super::ks::contract;
use super::quadrature::{integrate_region_once, PanelRule};
use super::wp::{chart_volume, fit_exponent, wp_ratio, WpIntegrand};
use crate::degeneration::{DegenerationSpec, RhoModel};
use crate::error::Result;
use crate::linalg::{inverse, solve, sym_eigenvalues, Mat};
use crate::model_metrics::{dbar_mu, fd_step, Chart, ChartPoint, Convention};
use crate::region::{chart_cells, sample_points};
use crate::scalar::Real;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Second `raw`-derivative of `log rho` per ray.
fn rho_curvature<T: Real>(chart: &Chart<T>, raw: T) -> T {
    match chart.rho {
        RhoModel::One => T::zero(),
        RhoModel::Fs => {
            let e = (-raw).exp();
            e / ((T::one() + e) * (T::one() + e))
        }
    }
}

/// Horizontal coefficients `q_p` in the log frame for stratum `s`; `None`
/// when the stratum potential is degenerate in the fibre directions.
pub fn stratum_field<T: Real>(chart: &Chart<T>, raw: &[T], shifted: &[T], s: usize) -> Option<Vec<T>> {
    let n = chart.rank;
    let st = &chart.strata[s];
    let mut h = vec![vec![T::zero(); n]; n];
    let mut b = vec![T::zero(); n];
    for (m, c) in chart.coords.iter().enumerate() {
        let mut k = rho_curvature(chart, raw[m]);
        if st.star.contains(&m) || st.own.contains(&m) {
            let d1 = chart.model.shifted_prime(raw[m]) / shifted[m];
            let d2 = chart.model.shifted_second(raw[m]) / shifted[m];
            k = k + T::c(2.0) * (d1 * d1 - d2);
        }
        for j in 0..n {
            b[j] = b[j] + k * chart.wprime[m] * c[j];
            for l in 0..n {
                h[j][l] = h[j][l] + k * c[j] * c[l];
            }
        }
    }
    let d: Vec<T> = chart.basis.iter().map(|&i| raw[i]).collect();
    let proper: Mat<T> = (0..n).map(|j| (0..n).map(|l| d[j] * h[j][l] * d[l]).collect()).collect();
    let ev = sym_eigenvalues(&proper);
    if !(ev[0] > T::c(1e-12) * ev[n - 1].abs().max(T::c(1e-300))) {
        return None;
    }
    let q = solve(&h, &b).ok()?;
    Some(q.into_iter().map(|x| -x).collect())
}

fn partition_at<T: Real>(chart: &Chart<T>, a: &[T], tau: T) -> Result<Vec<T>> {
    let raw = chart.raw_unchecked(a, tau);
    chart.partition_from(&chart.convert(&raw, Convention::Shifted), tau)
}

/// `||sum_p dbar mu_p (W_p - W_0)||^2` at chart coordinates `a`, with the
/// number of degenerate strata that entered with `q_p = 0`.
pub fn shell_norm<T: Real>(chart: &Chart<T>, a: &[T], tau: T) -> Result<(T, usize)> {
    let n = chart.rank;
    let raw = chart.raw_unchecked(a, tau);
    let shifted = chart.convert(&raw, Convention::Shifted);
    let ns = chart.strata.len();
    let mut grad = vec![vec![T::zero(); n]; ns];
    for k in 0..n {
        let h = fd_step(a[k]);
        let mut xp = a.to_vec();
        let mut xm = a.to_vec();
        xp[k] = a[k] + h;
        xm[k] = a[k] - h;
        let (mp, mm) = (partition_at(chart, &xp, tau)?, partition_at(chart, &xm, tau)?);
        for s in 0..ns {
            grad[s][k] = (mp[s] - mm[s]) / (T::c(2.0) * h);
        }
    }
    let origin = chart.origin_stratum();
    let mut degenerate = 0;
    let mut field = |s: usize| {
        stratum_field(chart, &raw, &shifted, s).unwrap_or_else(|| {
            degenerate += 1;
            vec![T::zero(); n]
        })
    };
    let q0 = field(origin);
    let mut t = vec![vec![T::zero(); n]; n];
    for s in 0..ns {
        if s == origin || grad[s].iter().all(|g| *g == T::zero()) {
            continue;
        }
        let qs = field(s);
        for j in 0..n {
            for k in 0..n {
                t[j][k] = t[j][k] - (qs[j] - q0[j]) * grad[s][k];
            }
        }
    }
    let mut g = vec![vec![T::zero(); n]; n];
    for (m, c) in chart.coords.iter().enumerate() {
        let inv2 = T::one() / (shifted[m] * shifted[m]);
        for j in 0..n {
            for k in 0..n {
                g[j][k] = g[j][k] + c[j] * c[k] * inv2;
            }
        }
    }
    let ginv = inverse(&g)?;
    Ok((contract(&g, &ginv, &t), degenerate))
}

/// The shell integrand is supported on thin transition layers and only its
/// scaling in `tau` is reported, so a single coarse pass suffices.
const SHELL_RULE: PanelRule = PanelRule { per_decade: 2, order: 6 };

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GluedRow {
    pub tau: f64,
    /// `sup ||dbar mu_p|| log tau` over sampled points of every chart.
    pub sup_dbar_mu_log_tau: f64,
    /// Max over charts of the model ratio times `tau^3`.
    pub model_tau3: f64,
    /// Max over charts of the shell ratio.
    pub shell_ratio: f64,
    pub shell_tau3_log_tau: f64,
    /// `model_tau3 + shell_ratio tau^3`.
    pub c_bound: f64,
    /// Integrand samples where a degenerate stratum field was replaced by 0.
    pub degenerate_samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GluedReport {
    pub rows: Vec<GluedRow>,
    /// Bound constant at the largest tau.
    pub c_global: f64,
    /// Relative change of the bound constant over the top two grid points.
    pub top_variation: f64,
    /// Fitted exponent `s` in `shell tau^3 ~ (log tau)^s`.
    pub shell_log_exponent: Option<f64>,
}

/// Evaluates the glued field's `dbar` on every chart over `taus`.
pub fn glued_field_check(spec: &DegenerationSpec, taus: &[f64], rule: PanelRule, samples: usize, seed: u64) -> Result<GluedReport> {
    let charts = Chart::<f64>::all(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for &tau in taus {
        let mut sup_mu = 0f64;
        let mut model = 0f64;
        let mut shell = 0f64;
        let mut degenerate = 0usize;
        for c in &charts {
            for a in sample_points(c, tau, c.eta, samples, &mut rng) {
                let d = dbar_mu(c, &ChartPoint::new(c.index, a, tau))?;
                sup_mu = d.into_iter().fold(sup_mu, f64::max);
            }
            model = model.max(wp_ratio(c, tau, rule, WpIntegrand::ClosedForm)?.ratio * tau.powi(3));
            let count = std::cell::Cell::new(0usize);
            let f = |a: &[f64]| -> Result<f64> {
                let raw = c.raw_unchecked(a, tau);
                let (v, k) = shell_norm(c, a, tau)?;
                count.set(count.get() + k);
                let prod = c.basis.iter().fold(1.0, |acc, &b| acc / (raw[b] * raw[b]));
                Ok(v * c.log_rho(&raw).exp() * prod)
            };
            let num = integrate_region_once(&chart_cells(c, tau, c.eta), &f, SHELL_RULE, c.eta, tau)?;
            let vol = chart_volume(c, tau, rule)?;
            let norm = (1..=c.rank).map(|k| (2 * k) as f64).product::<f64>();
            shell = shell.max(num * norm / vol.value);
            degenerate += count.get();
        }
        let lt = tau.ln();
        rows.push(GluedRow {
            tau,
            sup_dbar_mu_log_tau: sup_mu * lt,
            model_tau3: model,
            shell_ratio: shell,
            shell_tau3_log_tau: shell * tau.powi(3) * lt,
            c_bound: model + shell * tau.powi(3),
            degenerate_samples: degenerate,
        });
    }
    let k = rows.len();
    let c_global = rows.last().map_or(0.0, |r| r.c_bound);
    let top_variation = if k >= 2 { (rows[k - 1].c_bound - rows[k - 2].c_bound).abs() / c_global } else { 0.0 };
    let lx: Vec<f64> = rows.iter().map(|r| r.tau.ln()).collect();
    let ly: Vec<f64> = rows.iter().map(|r| r.shell_ratio * r.tau.powi(3)).collect();
    let shell_log_exponent = if ly.iter().all(|&y| y > 0.0) { fit_exponent(&lx, &ly) } else { None };
    Ok(GluedReport { rows, c_global, top_variation, shell_log_exponent })
}

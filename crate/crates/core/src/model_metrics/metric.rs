//! The model metric in the proper frame `W_j = a_j z_j d/dz_j`, its volume
//! density, and the Monge–Ampère defect.

use super::chart::{Chart, ChartPoint, Convention};
use crate::error::{Error, Result};
use crate::linalg::{det, inverse, sym_eigenvalues, Mat};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MetricMode {
    /// Closed form of the toric model: `g = I + sum_{m not in S} v v^T`.
    #[default]
    Exact,
    /// Hessian of the glued potential `sum mu_p log h_p + log rho`,
    /// by central differences.
    Glued,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricSample<T> {
    pub g: Mat<T>,
    pub min_eig: T,
    pub max_eig: T,
    pub det: T,
    /// Coefficient of `prod da_j dtheta_j` in `omega^n`.
    pub volume_density: T,
    /// Glued potential factor `h = exp(sum mu_p log h_p)`.
    pub h: T,
    /// Background factor `rho`.
    pub rho: T,
    pub phi: T,
}

/// `g_jk = a_j a_k sum_m m^j m^k / a_m^2` from a-values of all rays.
pub fn exact_metric<T: Real>(chart: &Chart<T>, a: &[T]) -> Mat<T> {
    let n = chart.rank;
    let mut g = vec![vec![T::zero(); n]; n];
    for (m, coords) in chart.coords.iter().enumerate() {
        let inv2 = T::one() / (a[m] * a[m]);
        for j in 0..n {
            for k in 0..n {
                g[j][k] = g[j][k] + coords[j] * coords[k] * inv2;
            }
        }
    }
    for j in 0..n {
        for k in 0..n {
            g[j][k] = g[j][k] * a[chart.basis[j]] * a[chart.basis[k]];
        }
    }
    g
}

/// `sum_p mu_p log h_p` at shifted values.
pub fn log_h_glued<T: Real>(chart: &Chart<T>, shifted: &[T], tau: T) -> Result<T> {
    let mu = chart.partition_from(shifted, tau)?;
    Ok(mu
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > T::zero())
        .map(|(s, &w)| w * chart.log_h_from(shifted, tau, s))
        .sum())
}

/// The glued potential `F(a)` in raw chart coordinates.
pub fn potential<T: Real>(chart: &Chart<T>, a: &[T], tau: T) -> Result<T> {
    let raw = chart.raw(&ChartPoint::new(chart.index, a.to_vec(), tau))?;
    let shifted = chart.convert(&raw, Convention::Shifted);
    Ok(log_h_glued(chart, &shifted, tau)? + chart.log_rho(&raw))
}

/// Finite-difference step for coordinate value `x`.
pub fn fd_step<T: Real>(x: T) -> T {
    T::c(1e-4) * x.abs().max(T::one())
}

/// Hessian by central differences with one Richardson extrapolation.
pub fn fd_hessian<T: Real, F>(f: F, x: &[T]) -> Result<Mat<T>>
where
    F: Fn(&[T]) -> Result<T>,
{
    let n = x.len();
    let h: Vec<T> = x.iter().map(|&v| fd_step(v)).collect();
    let eval = |dj: (usize, T), dk: (usize, T)| -> Result<T> {
        let mut y = x.to_vec();
        y[dj.0] = y[dj.0] + dj.1;
        y[dk.0] = y[dk.0] + dk.1;
        f(&y)
    };
    let f0 = f(x)?;
    let second = |j: usize, k: usize, s: T| -> Result<T> {
        let (hj, hk) = (h[j] * s, h[k] * s);
        if j == k {
            let p = eval((j, hj), (j, T::zero()))?;
            let m = eval((j, -hj), (j, T::zero()))?;
            Ok((p - T::c(2.0) * f0 + m) / (hj * hj))
        } else {
            let pp = eval((j, hj), (k, hk))?;
            let pm = eval((j, hj), (k, -hk))?;
            let mp = eval((j, -hj), (k, hk))?;
            let mm = eval((j, -hj), (k, -hk))?;
            Ok((pp - pm - mp + mm) / (T::c(4.0) * hj * hk))
        }
    };
    let mut out = vec![vec![T::zero(); n]; n];
    for j in 0..n {
        for k in j..n {
            let d1 = second(j, k, T::one())?;
            let d2 = second(j, k, T::c(2.0))?;
            let v = (T::c(4.0) * d1 - d2) / T::c(3.0);
            out[j][k] = v;
            out[k][j] = v;
        }
    }
    Ok(out)
}

/// Gradient by central differences with one Richardson extrapolation.
pub fn fd_gradient<T: Real, F>(f: F, x: &[T]) -> Result<Vec<T>>
where
    F: Fn(&[T]) -> Result<T>,
{
    let mut out = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        let d = |s: T| -> Result<T> {
            let hj = fd_step(x[j]) * s;
            let mut p = x.to_vec();
            let mut m = x.to_vec();
            p[j] = p[j] + hj;
            m[j] = m[j] - hj;
            Ok((f(&p)? - f(&m)?) / (T::c(2.0) * hj))
        };
        out.push((T::c(4.0) * d(T::one())? - d(T::c(2.0))?) / T::c(3.0));
    }
    Ok(out)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// The metric matrix in the proper frame plus derived scalars.
///
/// `conv` selects the a-values for [`MetricMode::Exact`]; the glued mode
/// always works with the shifted model norms.
pub fn metric_matrix<T: Real>(
    chart: &Chart<T>,
    p: &ChartPoint<T>,
    mode: MetricMode,
    conv: Convention,
) -> Result<MetricSample<T>> {
    let raw = chart.raw(p)?;
    let conv = if mode == MetricMode::Glued { Convention::Shifted } else { conv };
    let a = chart.convert(&raw, conv);
    let g = match mode {
        MetricMode::Exact => exact_metric(chart, &a),
        MetricMode::Glued => {
            let hess = fd_hessian(|x| potential(chart, x, p.tau), &p.a)?;
            let n = chart.rank;
            (0..n)
                .map(|j| {
                    (0..n)
                        .map(|k| T::c(0.5) * a[chart.basis[j]] * a[chart.basis[k]] * hess[j][k])
                        .collect()
                })
                .collect()
        }
    };
    let ev = sym_eigenvalues(&g);
    let (min_eig, max_eig) = (ev[0], ev[ev.len() - 1]);
    if !(min_eig > T::zero()) || !ev.iter().all(|v| v.is_finite()) {
        let shown: Vec<String> = p.a.iter().map(|x| format!("{x}")).collect();
        return Err(Error::PositivityFailure(format!(
            "chart {} a=({}) tau={} min eigenvalue {}",
            chart.index,
            shown.join(","),
            p.tau,
            min_eig
        )));
    }
    let d = det(&g);
    let n = chart.rank;
    let shifted = chart.convert(&raw, Convention::Shifted);
    let prod: T = chart.basis.iter().fold(T::one(), |acc, &b| acc / (a[b] * a[b]));
    let volume_density = T::c(factorial(n) / std::f64::consts::PI.powi(n as i32)) * d * prod;
    let (h, log_h) = if p.tau > chart.eta * chart.eta {
        let lh = log_h_glued(chart, &shifted, p.tau)?;
        (lh.exp(), lh)
    } else {
        (T::one(), T::zero())
    };
    let log_rho = chart.log_rho(&raw);
    let phi = -(volume_density.ln() - log_h - log_rho);
    Ok(MetricSample { g, min_eig, max_eig, det: d, volume_density, h, rho: log_rho.exp(), phi })
}

/// Monge–Ampère defect `phi = -log(v / (h rho))`.
pub fn phi<T: Real>(chart: &Chart<T>, p: &ChartPoint<T>, mode: MetricMode) -> Result<T> {
    Ok(metric_matrix(chart, p, mode, Convention::Shifted)?.phi)
}

/// Norm of `dbar mu_p` in the proper frame for every stratum.
pub fn dbar_mu<T: Real>(chart: &Chart<T>, p: &ChartPoint<T>) -> Result<Vec<T>> {
    let raw = chart.raw(p)?;
    let a = chart.convert(&raw, Convention::Shifted);
    let ginv = inverse(&exact_metric(chart, &a))?;
    let n = chart.rank;
    let mut out = Vec::with_capacity(chart.strata.len());
    for s in 0..chart.strata.len() {
        let grad = fd_gradient(
            |x| {
                let r = chart.raw(&ChartPoint::new(chart.index, x.to_vec(), p.tau))?;
                Ok(chart.partition_from(&chart.convert(&r, Convention::Shifted), p.tau)?[s])
            },
            &p.a,
        )?;
        let w: Vec<T> = (0..n).map(|j| -a[chart.basis[j]] * grad[j]).collect();
        let mut norm2 = T::zero();
        for j in 0..n {
            for k in 0..n {
                norm2 = norm2 + ginv[j][k] * w[j] * w[k];
            }
        }
        out.push(norm2.max(T::zero()).sqrt());
    }
    Ok(out)
}

/// Frame derivatives of the exact metric and of `phi`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometryReport<T> {
    pub order: usize,
    pub max_g: T,
    pub max_phi: T,
    /// `max |W_j g_kl|`, `max |W_j phi|` (order >= 1).
    pub max_dg: Option<T>,
    pub max_dphi: Option<T>,
    /// `max |W_i W_j g_kl|`, `max |W_i W_j phi|` (order 2).
    pub max_ddg: Option<T>,
    pub max_ddphi: Option<T>,
    /// `W_k a_j` for basis rays (shifted values).
    pub frame_da: Mat<T>,
    /// Gaussian curvature of the exact chart metric, rank one only.
    pub curvature: Option<T>,
}

/// Samples of `g` (exact, shifted) and `phi` with their derivatives along
/// `W_j = -a_j d/da_j` up to `order`.
pub fn bounded_geometry_sample<T: Real>(chart: &Chart<T>, p: &ChartPoint<T>, order: usize) -> Result<GeometryReport<T>> {
    if order > 2 {
        return Err(Error::InvalidParameter(format!("order {order} > 2")));
    }
    let n = chart.rank;
    let tau = p.tau;
    let shifted_at = |x: &[T]| -> Result<Vec<T>> {
        let r = chart.raw(&ChartPoint::new(chart.index, x.to_vec(), tau))?;
        Ok(chart.convert(&r, Convention::Shifted))
    };
    // scalar functions: every g_kl, then phi
    let nf = n * n + 1;
    let funcs = |x: &[T]| -> Result<Vec<T>> {
        let a = shifted_at(x)?;
        let g = exact_metric(chart, &a);
        let mut v: Vec<T> = g.into_iter().flatten().collect();
        v.push(metric_matrix(chart, &ChartPoint::new(chart.index, x.to_vec(), tau), MetricMode::Exact, Convention::Shifted)?.phi);
        Ok(v)
    };
    let w_derivs = |x: &[T]| -> Result<Vec<Vec<T>>> {
        let a = shifted_at(x)?;
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            let h = fd_step(x[j]);
            if !(h > T::zero()) || x[j] - T::c(2.0) * h == x[j] {
                return Err(Error::StepUnderflow);
            }
            let shift = |s: T| -> Result<Vec<T>> {
                let mut y = x.to_vec();
                y[j] = y[j] + s;
                funcs(&y)
            };
            let (p1, m1, p2, m2) = (shift(h)?, shift(-h)?, shift(T::c(2.0) * h)?, shift(T::c(-2.0) * h)?);
            let aj = a[chart.basis[j]];
            out.push(
                (0..nf)
                    .map(|i| {
                        let d1 = (p1[i] - m1[i]) / (T::c(2.0) * h);
                        let d2 = (p2[i] - m2[i]) / (T::c(4.0) * h);
                        -aj * (T::c(4.0) * d1 - d2) / T::c(3.0)
                    })
                    .collect(),
            );
        }
        Ok(out)
    };
    let split_max = |v: &[T]| -> (T, T) {
        let g = v[..n * n].iter().fold(T::zero(), |m, x| m.max(x.abs()));
        (g, v[n * n].abs())
    };
    let f0 = funcs(&p.a)?;
    let (max_g, max_phi) = split_max(&f0);
    let mut rep = GeometryReport {
        order,
        max_g,
        max_phi,
        max_dg: None,
        max_dphi: None,
        max_ddg: None,
        max_ddphi: None,
        frame_da: frame_da(chart, &p.a, tau)?,
        curvature: if n == 1 { Some(curvature_rank_one(chart, &shifted_at(&p.a)?)) } else { None },
    };
    if order >= 1 {
        let d = w_derivs(&p.a)?;
        let (mut mg, mut mp) = (T::zero(), T::zero());
        for row in &d {
            let (g, ph) = split_max(row);
            mg = mg.max(g);
            mp = mp.max(ph);
        }
        rep.max_dg = Some(mg);
        rep.max_dphi = Some(mp);
    }
    if order == 2 {
        let a = shifted_at(&p.a)?;
        let (mut mg, mut mp) = (T::zero(), T::zero());
        for i in 0..n {
            let h = fd_step(p.a[i]);
            let shift = |s: T| -> Result<Vec<Vec<T>>> {
                let mut y = p.a.clone();
                y[i] = y[i] + s;
                w_derivs(&y)
            };
            let (dp, dm) = (shift(h)?, shift(-h)?);
            for j in 0..n {
                let row: Vec<T> = (0..nf)
                    .map(|k| -a[chart.basis[i]] * (dp[j][k] - dm[j][k]) / (T::c(2.0) * h))
                    .collect();
                let (g, ph) = split_max(&row);
                mg = mg.max(g);
                mp = mp.max(ph);
            }
        }
        rep.max_ddg = Some(mg);
        rep.max_ddphi = Some(mp);
    }
    Ok(rep)
}

/// `W_k a_j = -a_k d a_j / d a_k` for the shifted basis values.
pub fn frame_da<T: Real>(chart: &Chart<T>, a: &[T], tau: T) -> Result<Mat<T>> {
    let raw = chart.raw(&ChartPoint::new(chart.index, a.to_vec(), tau))?;
    let shifted = chart.convert(&raw, Convention::Shifted);
    let n = chart.rank;
    Ok((0..n)
        .map(|k| {
            (0..n)
                .map(|j| {
                    let b = chart.basis[j];
                    let d = if j == k { chart.model.shifted_prime(raw[b]) } else { T::zero() };
                    -shifted[chart.basis[k]] * d
                })
                .collect()
        })
        .collect())
}

/// Gaussian curvature `-4 (log F'')'' / F''` of the rank-one exact metric,
/// with `F'' = 2 sum_m m^2 / a_m^2` and `a_m` affine in the coordinate.
pub fn curvature_rank_one<T: Real>(chart: &Chart<T>, a: &[T]) -> T {
    let (mut s0, mut s1, mut s2) = (T::zero(), T::zero(), T::zero());
    for (m, c) in chart.coords.iter().enumerate() {
        let x = c[0];
        let am = a[m];
        s0 = s0 + x * x / (am * am);
        s1 = s1 - T::c(2.0) * x * x * x / (am * am * am);
        s2 = s2 + T::c(6.0) * x * x * x * x / (am * am * am * am);
    }
    let log2 = s2 / s0 - (s1 / s0) * (s1 / s0);
    -T::c(4.0) * log2 / (T::c(2.0) * s0)
}

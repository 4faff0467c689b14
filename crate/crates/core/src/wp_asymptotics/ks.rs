//! The horizontal lift `W` of `t d/dt` in the exact toric model and the
//! norm of its `dbar`.
//!
//! With `A_m` the raw a-values, the fibre metric in the log frame
//! `z_j d/dz_j` is `H = sum_m m m^T / A_m^2`, and contracting `t d/dt` gives
//! `r = -sum_m w'_m m / A_m^2`. Then `W = t d/dt + sum_j q_j z_j d/dz_j`
//! with `H q = r`.

use crate::error::Result;
use crate::linalg::{inverse, mat_vec, solve, Mat};
use crate::model_metrics::{Chart, ChartPoint};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct HorizontalField<T> {
    /// Coefficients of `W - t d/dt` in the frame `z_j d/dz_j`.
    pub q: Vec<T>,
    /// The same coefficients in the proper frame `a_j z_j d/dz_j`.
    pub q_frame: Vec<T>,
    /// Max-norm residual of the contraction system in the proper frame.
    pub residual: T,
}

fn system<T: Real>(chart: &Chart<T>, raw: &[T]) -> (Mat<T>, Vec<T>) {
    let n = chart.rank;
    let mut h = vec![vec![T::zero(); n]; n];
    let mut r = vec![T::zero(); n];
    for (m, c) in chart.coords.iter().enumerate() {
        let inv2 = T::one() / (raw[m] * raw[m]);
        for j in 0..n {
            r[j] = r[j] - chart.wprime[m] * c[j] * inv2;
            for k in 0..n {
                h[j][k] = h[j][k] + c[j] * c[k] * inv2;
            }
        }
    }
    (h, r)
}

/// Solves the contraction identity at `p`.
pub fn ks_field<T: Real>(chart: &Chart<T>, p: &ChartPoint<T>) -> Result<HorizontalField<T>> {
    let raw = chart.raw(p)?;
    let n = chart.rank;
    let (h, r) = system(chart, &raw);
    let d: Vec<T> = chart.basis.iter().map(|&b| raw[b]).collect();
    let m: Mat<T> = (0..n).map(|j| (0..n).map(|k| d[j] * h[j][k] * d[k]).collect()).collect();
    let rhs: Vec<T> = (0..n).map(|j| d[j] * r[j]).collect();
    let q_frame = solve(&m, &rhs)?;
    let lhs = mat_vec(&m, &q_frame);
    let residual = lhs.iter().zip(&rhs).map(|(&x, &y)| (x - y).abs()).fold(T::zero(), T::max);
    let q = (0..n).map(|j| d[j] * q_frame[j]).collect();
    Ok(HorizontalField { q, q_frame, residual })
}

/// Leading-order coefficients `q_j = -sum_{m not in S} w'_m m^j a_j^2 / a_m^2`.
pub fn ks_leading<T: Real>(chart: &Chart<T>, p: &ChartPoint<T>) -> Result<Vec<T>> {
    let raw = chart.raw(p)?;
    Ok((0..chart.rank)
        .map(|j| {
            let aj = raw[chart.basis[j]];
            -chart
                .coords
                .iter()
                .enumerate()
                .map(|(m, c)| chart.wprime[m] * c[j] * aj * aj / (raw[m] * raw[m]))
                .sum::<T>()
        })
        .collect())
}

/// Closed form `||dbar W||^2 = sum_j 4 a_j^2 rho |sum_{m not in S} w'_m m^j / a_m^2|^2`.
pub fn dbar_norm<T: Real>(chart: &Chart<T>, p: &ChartPoint<T>) -> Result<T> {
    let raw = chart.raw(p)?;
    Ok(dbar_norm_raw(chart, &raw))
}

pub(crate) fn dbar_norm_raw<T: Real>(chart: &Chart<T>, raw: &[T]) -> T {
    let rho = chart.log_rho(raw).exp();
    let mut total = T::zero();
    for j in 0..chart.rank {
        let aj = raw[chart.basis[j]];
        let s: T = chart
            .coords
            .iter()
            .enumerate()
            .map(|(m, c)| chart.wprime[m] * c[j] / (raw[m] * raw[m]))
            .sum();
        total = total + T::c(4.0) * aj * aj * rho * s * s;
    }
    total
}

/// Jacobian `J_jk = d q_j / d a_k` of the exact field, from differentiating
/// `H q = r`.
pub fn ks_jacobian<T: Real>(chart: &Chart<T>, p: &ChartPoint<T>) -> Result<Mat<T>> {
    let raw = chart.raw(p)?;
    let n = chart.rank;
    let (h, r) = system(chart, &raw);
    let q = solve(&h, &r)?;
    let mut jac = vec![vec![T::zero(); n]; n];
    for k in 0..n {
        let mut rhs = vec![T::zero(); n];
        for (m, c) in chart.coords.iter().enumerate() {
            let f = T::c(2.0) * c[k] / (raw[m] * raw[m] * raw[m]);
            let cq: T = c.iter().zip(&q).map(|(&x, &y)| x * y).sum();
            for j in 0..n {
                // d_k r_j = 2 w' m^j m^k / A^3, d_k H q = -2 m^k (m.q) m / A^3
                rhs[j] = rhs[j] + f * c[j] * (chart.wprime[m] + cq);
            }
        }
        let col = solve(&h, &rhs)?;
        for j in 0..n {
            jac[j][k] = col[j];
        }
    }
    Ok(jac)
}

/// `||dbar W||^2` of the exact field: `tr(H J H^{-1} J^T)`.
pub fn dbar_norm_exact<T: Real>(chart: &Chart<T>, p: &ChartPoint<T>) -> Result<T> {
    let raw = chart.raw(p)?;
    let (h, _) = system(chart, &raw);
    let hinv = inverse(&h)?;
    let jac = ks_jacobian(chart, p)?;
    Ok(contract(&h, &hinv, &jac))
}

pub(crate) fn contract<T: Real>(g: &Mat<T>, ginv: &Mat<T>, t: &Mat<T>) -> T {
    let n = g.len();
    let mut s = T::zero();
    for j in 0..n {
        for jp in 0..n {
            for k in 0..n {
                for kp in 0..n {
                    s = s + g[j][jp] * ginv[k][kp] * t[j][k] * t[jp][kp];
                }
            }
        }
    }
    s.max(T::zero())
}

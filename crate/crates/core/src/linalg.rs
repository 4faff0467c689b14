//! Small dense linear algebra over a generic float scalar.

use crate::error::{Error, Result};
use crate::scalar::Real;

pub type Mat<T> = Vec<Vec<T>>;

pub fn identity<T: Real>(n: usize) -> Mat<T> {
    (0..n).map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect()).collect()
}

pub fn mat_vec<T: Real>(a: &Mat<T>, x: &[T]) -> Vec<T> {
    a.iter().map(|row| row.iter().zip(x).map(|(&p, &q)| p * q).sum()).collect()
}

/// LU factorization with partial pivoting, returning the permuted factors
/// and the permutation sign.
fn lu<T: Real>(a: &Mat<T>) -> Result<(Mat<T>, Vec<usize>, T)> {
    let n = a.len();
    let mut m = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = T::one();
    let scale = a.iter().flatten().fold(T::zero(), |s, &x| s.max(x.abs()));
    if scale == T::zero() && n > 0 {
        return Err(Error::SingularMatrix);
    }
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i][k].abs().partial_cmp(&m[j][k].abs()).unwrap()).unwrap();
        if m[p][k].abs() <= T::epsilon() * scale * T::c(1e-3) {
            return Err(Error::SingularMatrix);
        }
        if p != k {
            m.swap(p, k);
            perm.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            m[i][k] = f;
            for j in k + 1..n {
                let v = m[k][j];
                m[i][j] = m[i][j] - f * v;
            }
        }
    }
    Ok((m, perm, sign))
}

pub fn solve<T: Real>(a: &Mat<T>, b: &[T]) -> Result<Vec<T>> {
    let n = a.len();
    let (m, perm, _) = lu(a)?;
    let mut y: Vec<T> = perm.iter().map(|&p| b[p]).collect();
    for i in 0..n {
        for j in 0..i {
            y[i] = y[i] - m[i][j] * y[j];
        }
    }
    for i in (0..n).rev() {
        for j in i + 1..n {
            y[i] = y[i] - m[i][j] * y[j];
        }
        y[i] = y[i] / m[i][i];
    }
    Ok(y)
}

pub fn det<T: Real>(a: &Mat<T>) -> T {
    match lu(a) {
        Ok((m, _, sign)) => (0..a.len()).fold(sign, |acc, i| acc * m[i][i]),
        Err(_) => T::zero(),
    }
}

pub fn inverse<T: Real>(a: &Mat<T>) -> Result<Mat<T>> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![T::zero(); n];
        e[j] = T::one();
        cols.push(solve(a, &e)?);
    }
    Ok((0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect())
}

/// Eigenvalues of a symmetric matrix (cyclic Jacobi), ascending.
pub fn sym_eigenvalues<T: Real>(a: &Mat<T>) -> Vec<T> {
    let n = a.len();
    let mut m = a.clone();
    for _sweep in 0..100 {
        let off: T = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i][j] * m[i][j]).sum();
        let diag: T = (0..n).map(|i| m[i][i] * m[i][i]).sum();
        if off <= T::epsilon() * T::epsilon() * diag || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q] == T::zero() {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (T::c(2.0) * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<T> = (0..n).map(|i| m[i][i]).collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

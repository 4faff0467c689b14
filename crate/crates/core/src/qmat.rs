//! Small exact rational linear algebra used by the fan and degeneration code.

use crate::lattice::IntegerMatrix;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Q = BigRational;

#[derive(Clone, Debug, PartialEq)]
pub struct QMatrix {
    pub rows: Vec<Vec<Q>>,
    pub ncols: usize,
}

impl QMatrix {
    pub fn from_rows(rows: Vec<Vec<Q>>, ncols: usize) -> Self {
        debug_assert!(rows.iter().all(|r| r.len() == ncols));
        QMatrix { rows, ncols }
    }

    pub fn from_integer(m: &IntegerMatrix) -> Self {
        let rows = (0..m.nrows())
            .map(|i| m.row(i).into_iter().map(Q::from_integer).collect())
            .collect();
        QMatrix { rows, ncols: m.ncols() }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn mul_vec(&self, x: &[Q]) -> Vec<Q> {
        self.rows
            .iter()
            .map(|r| r.iter().zip(x).fold(Q::zero(), |acc, (a, b)| acc + a * b))
            .collect()
    }

    pub fn transpose(&self) -> QMatrix {
        let rows = (0..self.ncols).map(|j| self.rows.iter().map(|r| r[j].clone()).collect()).collect();
        QMatrix { rows, ncols: self.nrows() }
    }

    /// Reduced row echelon form; returns (rref, pivot columns).
    pub fn rref(&self) -> (QMatrix, Vec<usize>) {
        let mut a = self.rows.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.ncols {
            let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else { continue };
            a.swap(r, p);
            let inv = Q::one() / a[r][c].clone();
            for x in a[r].iter_mut() {
                *x = &*x * &inv;
            }
            for i in 0..a.len() {
                if i != r && !a[i][c].is_zero() {
                    let f = a[i][c].clone();
                    for j in 0..self.ncols {
                        let v = &a[r][j] * &f;
                        a[i][j] -= v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
            if r == a.len() {
                break;
            }
        }
        (QMatrix { rows: a, ncols: self.ncols }, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right nullspace `{x : A x = 0}`.
    pub fn nullspace(&self) -> Vec<Vec<Q>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.ncols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut x = vec![Q::zero(); self.ncols];
                x[f] = Q::one();
                for (row, &pc) in pivots.iter().enumerate() {
                    x[pc] = -r.rows[row][f].clone();
                }
                x
            })
            .collect()
    }

    /// Solves `A x = b` for square nonsingular `A`.
    pub fn solve(&self, b: &[Q]) -> Option<Vec<Q>> {
        let n = self.nrows();
        if n != self.ncols {
            return None;
        }
        let aug: Vec<Vec<Q>> = self
            .rows
            .iter()
            .zip(b)
            .map(|(r, bi)| {
                let mut row = r.clone();
                row.push(bi.clone());
                row
            })
            .collect();
        let (r, piv) = QMatrix { rows: aug, ncols: n + 1 }.rref();
        if piv.len() != n || piv.iter().any(|&p| p >= n) {
            return None;
        }
        Some(r.rows.iter().map(|row| row[n].clone()).collect())
    }

    /// Solves `A x = b` when a solution exists (A may be rectangular with
    /// independent columns). Returns `None` if inconsistent or underdetermined.
    pub fn solve_least(&self, b: &[Q]) -> Option<Vec<Q>> {
        let n = self.ncols;
        let aug: Vec<Vec<Q>> = self
            .rows
            .iter()
            .zip(b)
            .map(|(r, bi)| {
                let mut row = r.clone();
                row.push(bi.clone());
                row
            })
            .collect();
        let (r, piv) = QMatrix { rows: aug, ncols: n + 1 }.rref();
        if piv.contains(&n) || piv.len() != n {
            return None;
        }
        Some((0..n).map(|i| r.rows[i][n].clone()).collect())
    }

    pub fn inverse(&self) -> Option<QMatrix> {
        let n = self.nrows();
        if n != self.ncols {
            return None;
        }
        let aug: Vec<Vec<Q>> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut row = r.clone();
                row.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
                row
            })
            .collect();
        let (r, piv) = QMatrix { rows: aug, ncols: 2 * n }.rref();
        if piv.len() < n || piv[n - 1] >= n {
            return None;
        }
        Some(QMatrix { rows: r.rows.iter().map(|row| row[n..].to_vec()).collect(), ncols: n })
    }
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

/// Rank of a list of vectors of equal length.
pub fn rank_of(vs: &[Vec<Q>]) -> usize {
    match vs.first() {
        None => 0,
        Some(v) => QMatrix::from_rows(vs.to_vec(), v.len()).rank(),
    }
}

/// Writes `x` as a linear combination of `basis` (which must be independent);
/// `None` if `x` is outside their span.
pub fn coords_in(basis: &[Vec<Q>], x: &[Q]) -> Option<Vec<Q>> {
    if basis.is_empty() {
        return if x.iter().all(|c| c.is_zero()) { Some(vec![]) } else { None };
    }
    // columns = basis vectors
    let m = QMatrix::from_rows(basis.to_vec(), x.len()).transpose();
    m.solve_least(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q_frac, q_int};

    #[test]
    fn inverse_and_solve() {
        let a = QMatrix::from_rows(vec![vec![q_int(2), q_int(1)], vec![q_int(1), q_int(1)]], 2);
        let inv = a.inverse().unwrap();
        assert_eq!(inv.rows, vec![vec![q_int(1), q_int(-1)], vec![q_int(-1), q_int(2)]]);
        assert_eq!(a.solve(&[q_int(3), q_int(2)]).unwrap(), vec![q_int(1), q_int(1)]);
    }

    #[test]
    fn nullspace_and_coords() {
        let a = QMatrix::from_rows(vec![vec![q_int(1), q_int(2), q_int(3)]], 3);
        let ns = a.nullspace();
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(dot(&a.rows[0], v).is_zero());
        }
        let c = coords_in(&[vec![q_int(1), q_int(0)], vec![q_int(1), q_int(2)]], &[q_int(2), q_int(1)]).unwrap();
        assert_eq!(c, vec![q_frac(3, 2), q_frac(1, 2)]);
        assert!(coords_in(&[vec![q_int(1), q_int(1)]], &[q_int(1), q_int(0)]).is_none());
    }
}

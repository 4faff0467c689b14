//! Exact integer linear algebra on the character lattice.
//!
//! Everything here is over `BigInt`; no floating point enters this module.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

/// A vector of the lattice `M = Z^n` in a fixed basis.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeVector(pub Vec<BigInt>);

/// Coordinates serialize as JSON integers when they fit in `i64` and as
/// decimal strings otherwise.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Coord {
    Small(i64),
    Big(String),
}

impl Serialize for LatticeVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use num_traits::ToPrimitive;
        let v: Vec<Coord> =
            self.0.iter().map(|c| c.to_i64().map_or_else(|| Coord::Big(c.to_string()), Coord::Small)).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LatticeVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<Coord>::deserialize(d)?;
        v.into_iter()
            .map(|c| match c {
                Coord::Small(x) => Ok(BigInt::from(x)),
                Coord::Big(s) => s.parse().map_err(serde::de::Error::custom),
            })
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(LatticeVector)
    }
}

impl LatticeVector {
    pub fn new(coords: Vec<BigInt>) -> Self {
        LatticeVector(coords)
    }

    pub fn from_i64(coords: &[i64]) -> Self {
        LatticeVector(coords.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    pub fn neg(&self) -> LatticeVector {
        LatticeVector(self.0.iter().map(|c| -c).collect())
    }

    /// gcd of the coordinates (0 for the zero vector).
    pub fn content(&self) -> BigInt {
        self.0.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    pub fn to_i64(&self) -> Vec<i64> {
        use num_traits::ToPrimitive;
        self.0.iter().map(|c| c.to_i64().expect("coordinate fits in i64")).collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        use num_traits::ToPrimitive;
        self.0.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
    }
}

impl fmt::Debug for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Divides `v` by the gcd of its coordinates. Signs are preserved.
pub fn primitivize(v: &LatticeVector) -> Result<LatticeVector> {
    let g = v.content();
    if g.is_zero() {
        return Err(Error::NotADirection);
    }
    Ok(LatticeVector(v.0.iter().map(|c| c / &g).collect()))
}

/// Dense integer matrix stored row-major.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IntegerMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntegerMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntegerMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<BigInt>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix");
            for (j, x) in row.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        m
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let rows: Vec<Vec<BigInt>> =
            rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        Self::from_rows(&rows)
    }

    /// Matrix whose rows are the given vectors.
    pub fn from_vectors(vs: &[LatticeVector]) -> Self {
        let rows: Vec<Vec<BigInt>> = vs.iter().map(|v| v.0.clone()).collect();
        Self::from_rows(&rows)
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> Vec<BigInt> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntegerMatrix) -> IntegerMatrix {
        assert_eq!(self.cols, other.rows, "shape mismatch in product");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self[(i, k)].is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let p = &self[(i, k)] * &other[(k, j)];
                    out[(i, j)] += p;
                }
            }
        }
        out
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[(k, k)].is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !a[(i, k)].is_zero()) else {
                    return BigInt::zero();
                };
                a.swap_rows(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[(i, j)] * &a[(k, k)] - &a[(i, k)] * &a[(k, j)]) / &prev;
                    a[(i, j)] = v;
                }
            }
            prev = a[(k, k)].clone();
        }
        sign * a[(n - 1, n - 1)].clone()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += k * row[src]
    fn add_row(&mut self, dst: usize, src: usize, k: &BigInt) {
        for j in 0..self.cols {
            let v = &self[(src, j)] * k;
            self[(dst, j)] += v;
        }
    }

    /// col[dst] += k * col[src]
    fn add_col(&mut self, dst: usize, src: usize, k: &BigInt) {
        for i in 0..self.rows {
            let v = &self[(i, src)] * k;
            self[(i, dst)] += v;
        }
    }

    fn neg_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -&self[(i, j)];
            self[(i, j)] = v;
        }
    }

    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)].clone()).collect()
    }
}

impl std::ops::Index<(usize, usize)> for IntegerMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntegerMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

/// Result of [`smith_normal_form`]: `u * a * v == d`.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub u: IntegerMatrix,
    pub d: IntegerMatrix,
    pub v: IntegerMatrix,
}

impl SmithForm {
    /// Nonzero invariant factors d_1 | d_2 | ...
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        self.d.diagonal().into_iter().filter(|x| !x.is_zero()).collect()
    }

    pub fn rank(&self) -> usize {
        self.invariant_factors().len()
    }
}

/// Smith normal form by row/column gcd elimination.
///
/// Returns unimodular `U`, `V` and diagonal `D` with `U·A·V = D` and a
/// divisibility chain on the nonnegative diagonal.
pub fn smith_normal_form(a: &IntegerMatrix) -> SmithForm {
    let (r, c) = (a.nrows(), a.ncols());
    let mut d = a.clone();
    let mut u = IntegerMatrix::identity(r);
    let mut v = IntegerMatrix::identity(c);

    for t in 0..r.min(c) {
        // smallest nonzero entry of the trailing block becomes the pivot
        let pivot = (t..r)
            .flat_map(|i| (t..c).map(move |j| (i, j)))
            .filter(|&(i, j)| !d[(i, j)].is_zero())
            .min_by(|&x, &y| d[x].abs().cmp(&d[y].abs()));
        let Some((pi, pj)) = pivot else { break };
        d.swap_rows(t, pi);
        u.swap_rows(t, pi);
        d.swap_cols(t, pj);
        v.swap_cols(t, pj);

        loop {
            let mut dirty = false;
            for i in t + 1..r {
                if d[(i, t)].is_zero() {
                    continue;
                }
                let q = d[(i, t)].div_floor(&d[(t, t)]);
                let nq = -q;
                d.add_row(i, t, &nq);
                u.add_row(i, t, &nq);
                if !d[(i, t)].is_zero() {
                    d.swap_rows(t, i);
                    u.swap_rows(t, i);
                    dirty = true;
                }
            }
            for j in t + 1..c {
                if d[(t, j)].is_zero() {
                    continue;
                }
                let q = d[(t, j)].div_floor(&d[(t, t)]);
                let nq = -q;
                d.add_col(j, t, &nq);
                v.add_col(j, t, &nq);
                if !d[(t, j)].is_zero() {
                    d.swap_cols(t, j);
                    v.swap_cols(t, j);
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            // divisibility: fold an offending row into the pivot row
            let offending = (t + 1..r)
                .flat_map(|i| (t + 1..c).map(move |j| (i, j)))
                .find(|&(i, j)| !d[(i, j)].is_multiple_of(&d[(t, t)]));
            match offending {
                Some((i, _)) => {
                    let one = BigInt::one();
                    d.add_row(t, i, &one);
                    u.add_row(t, i, &one);
                }
                None => break,
            }
        }
        if d[(t, t)].is_negative() {
            d.neg_row(t);
            u.neg_row(t);
        }
    }
    SmithForm { u, d, v }
}

/// Index of the lattice generated by `generators` inside the saturation of its
/// real span: the product of the nonzero Smith invariant factors.
pub fn sublattice_index(generators: &[LatticeVector]) -> Result<BigInt> {
    let first = generators.first().ok_or(Error::EmptyGenerators)?;
    let n = first.dim();
    if let Some(bad) = generators.iter().find(|g| g.dim() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: bad.dim() });
    }
    let snf = smith_normal_form(&IntegerMatrix::from_vectors(generators));
    Ok(snf.invariant_factors().iter().fold(BigInt::one(), |acc, d| acc * d))
}

/// Basis of the integer kernel `{x in Z^c : A x = 0}`, read off the Smith
/// column transform.
pub fn integer_kernel(a: &IntegerMatrix) -> Vec<LatticeVector> {
    let snf = smith_normal_form(a);
    let rank = snf.rank();
    (rank..a.ncols())
        .map(|j| LatticeVector((0..a.ncols()).map(|i| snf.v[(i, j)].clone()).collect()))
        .collect()
}

/// Representatives of `Z^n / B·Z^n` reduced into the half-open fundamental
/// parallelepiped of the columns of the square nonsingular matrix `basis`
/// (given as rows here: each vector is a generator).
pub fn parallelepiped_points(generators: &[LatticeVector]) -> Result<Vec<LatticeVector>> {
    use crate::qmat::QMatrix;
    let n = generators.first().ok_or(Error::EmptyGenerators)?.dim();
    if generators.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: generators.len() });
    }
    // columns of `b` are the generators
    let b = IntegerMatrix::from_vectors(generators).transpose();
    if b.det().is_zero() {
        return Err(Error::RaysNotSpanning);
    }
    let snf = smith_normal_form(&b);
    // Z^n / B Z^n  ~  (+) Z/d_i via x -> U x; representatives x = U^{-1} y.
    let uinv = QMatrix::from_integer(&snf.u).inverse().expect("unimodular");
    let bq = QMatrix::from_integer(&b);
    let binv = bq.inverse().expect("nonsingular");
    let factors = snf.d.diagonal();
    let mut out = Vec::new();
    let mut y = vec![BigInt::zero(); n];
    loop {
        let yq: Vec<_> = y.iter().map(|c| num_rational::BigRational::from_integer(c.clone())).collect();
        let x = uinv.mul_vec(&yq);
        let lambda = binv.mul_vec(&x);
        let frac: Vec<_> = lambda.iter().map(|l| l - l.floor()).collect();
        let p = bq.mul_vec(&frac);
        out.push(LatticeVector(p.iter().map(|c| c.to_integer()).collect()));
        // odometer over prod [0, d_i)
        let mut k = 0;
        loop {
            if k == n {
                out.sort();
                return Ok(out);
            }
            y[k] += 1;
            if y[k] < factors[k] {
                break;
            }
            y[k] = BigInt::zero();
            k += 1;
        }
    }
}

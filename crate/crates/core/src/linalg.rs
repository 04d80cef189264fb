//! Dense and sparse matrices over a [`Scalar`] field.
//!
//! Everything here is exact when the scalar is: elimination never rounds, and
//! an inconsistent `solve` is reported separately from rank deficiency.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::scalar::{Qi, Rational, Scalar};

#[derive(Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        let v = out[(i, j)].clone() + a.clone() * b.clone();
                        out[(i, j)] = v;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[S]) -> Result<Vec<S>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "{}x{} times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect())
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    pub fn rref_in_place(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self[(i, c)].is_negligible()) else {
                continue;
            };
            self.swap_rows(r, p);
            let inv = S::one() / self[(r, c)].clone();
            for j in c..self.cols {
                let v = self[(r, j)].clone() * inv.clone();
                self[(r, j)] = v;
            }
            let pivot_row: Vec<S> = self.row(r).to_vec();
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let f = self[(i, c)].clone();
                if f.is_zero() {
                    continue;
                }
                for j in c..self.cols {
                    if !pivot_row[j].is_zero() {
                        let v = self[(i, j)].clone() - f.clone() * pivot_row[j].clone();
                        self[(i, j)] = v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let p = m.rref_in_place();
        (m, p)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right nullspace, one vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<S>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![S::zero(); self.cols];
                v[f] = S::one();
                for (k, &pc) in pivots.iter().enumerate() {
                    v[pc] = -r[(k, f)].clone();
                }
                v
            })
            .collect()
    }

    /// One solution of `self * x = b`.
    ///
    /// Returns [`Error::Inconsistent`] when no solution exists; a rank
    /// deficient but consistent system yields the solution with free
    /// variables set to zero.
    pub fn solve(&self, b: &[S]) -> Result<Vec<S>> {
        if b.len() != self.rows {
            return Err(Error::Dimension(format!(
                "right-hand side of length {} for {} rows",
                b.len(),
                self.rows
            )));
        }
        let aug = Self::from_fn(self.rows, self.cols + 1, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                b[i].clone()
            }
        });
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return Err(Error::Inconsistent(format!(
                "{}x{} system has no solution",
                self.rows, self.cols
            )));
        }
        let mut x = vec![S::zero(); self.cols];
        for (k, &pc) in pivots.iter().enumerate() {
            x[pc] = r[(k, self.cols)].clone();
        }
        Ok(x)
    }

    /// Solve requiring a unique solution.
    pub fn solve_unique(&self, b: &[S]) -> Result<Vec<S>> {
        let x = self.solve(b)?;
        let rank = self.rank();
        if rank < self.cols {
            return Err(Error::RankDeficient(format!(
                "rank {rank} < {} unknowns",
                self.cols
            )));
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::Dimension("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let aug = Self::from_fn(n, 2 * n, |i, j| {
            if j < n {
                self[(i, j)].clone()
            } else if j - n == i {
                S::one()
            } else {
                S::zero()
            }
        });
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] >= n {
            return Err(Error::RankDeficient("singular matrix".into()));
        }
        Ok(Self::from_fn(n, n, |i, j| r[(i, n + j)].clone()))
    }

    /// Pivots `d_k` of the factorization `A = L D L^*` of a Hermitian matrix,
    /// computed without pivoting. Returns `None` if a zero pivot appears
    /// before the end (the leading minors are not all nonzero).
    pub fn hermitian_pivots(&self) -> Option<Vec<S>> {
        self.hermitian_ldl().map(|(_, d)| d)
    }

    /// `A = L D L^*` with `L` unit lower triangular, without pivoting.
    pub fn hermitian_ldl(&self) -> Option<(Matrix<S>, Vec<S>)> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut l = Matrix::identity(n);
        let mut pivots = Vec::with_capacity(n);
        for k in 0..n {
            let d = a[(k, k)].clone();
            if d.is_negligible() {
                return None;
            }
            let inv = S::one() / d.clone();
            let col: Vec<S> = (k + 1..n).map(|i| a[(i, k)].clone()).collect();
            for (ii, i) in (k + 1..n).enumerate() {
                if col[ii].is_zero() {
                    continue;
                }
                let f = col[ii].clone() * inv.clone();
                for j in k + 1..n {
                    let akj = a[(k, j)].clone();
                    if !akj.is_zero() {
                        let v = a[(i, j)].clone() - f.clone() * akj;
                        a[(i, j)] = v;
                    }
                }
                l[(i, k)] = f;
            }
            pivots.push(d);
        }
        Some((l, pivots))
    }

    pub fn is_hermitian(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (i..self.cols).all(|j| self[(i, j)] == self[(j, i)].conj()))
    }

    /// Fraction-free (Bareiss) rank. Divisions are exact, so intermediate
    /// entries stay integral when the input is.
    pub fn bareiss_rank(&self) -> usize {
        let mut a = self.clone();
        let mut prev = S::one();
        let mut rank = 0;
        let mut row = 0;
        for c in 0..a.cols {
            if row == a.rows {
                break;
            }
            let Some(p) = (row..a.rows).find(|&i| !a[(i, c)].is_zero()) else {
                continue;
            };
            a.swap_rows(row, p);
            let piv = a[(row, c)].clone();
            for i in row + 1..a.rows {
                let aic = a[(i, c)].clone();
                for j in c + 1..a.cols {
                    let v = (piv.clone() * a[(i, j)].clone() - aic.clone() * a[(row, j)].clone())
                        / prev.clone();
                    a[(i, j)] = v;
                }
                a[(i, c)] = S::zero();
            }
            prev = piv;
            row += 1;
            rank += 1;
        }
        rank
    }
}

impl<S> std::ops::Index<(usize, usize)> for Matrix<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> std::ops::IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

impl<S: Scalar> fmt::Debug for Matrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}

/// Column-sparse matrix, used for the graded operators on the orbit ring.
#[derive(Clone, PartialEq)]
pub struct SparseMatrix<S> {
    rows: usize,
    cols: usize,
    columns: Vec<Vec<(usize, S)>>,
}

impl<S: Scalar> SparseMatrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            cols,
            columns: vec![Vec::new(); cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            rows: n,
            cols: n,
            columns: (0..n).map(|i| vec![(i, S::one())]).collect(),
        }
    }

    /// Build from dense columns, dropping zeros.
    pub fn from_columns(rows: usize, cols: Vec<Vec<S>>) -> Self {
        let columns: Vec<Vec<(usize, S)>> = cols
            .into_iter()
            .map(|c| {
                assert_eq!(c.len(), rows);
                c.into_iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .collect()
            })
            .collect();
        SparseMatrix {
            rows,
            cols: columns.len(),
            columns,
        }
    }

    pub fn from_sparse_columns(rows: usize, columns: Vec<Vec<(usize, S)>>) -> Self {
        SparseMatrix {
            rows,
            cols: columns.len(),
            columns,
        }
    }

    pub fn from_dense(m: &Matrix<S>) -> Self {
        Self::from_columns(m.rows(), (0..m.cols()).map(|j| m.column(j)).collect())
    }

    pub fn to_dense(&self) -> Matrix<S> {
        let mut m = Matrix::zeros(self.rows, self.cols);
        for (j, col) in self.columns.iter().enumerate() {
            for (i, v) in col {
                m[(*i, j)] = v.clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> &[(usize, S)] {
        &self.columns[j]
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(Vec::is_empty)
    }

    pub fn apply(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.cols, "operator applied to a vector of the wrong length");
        let mut out = vec![S::zero(); self.rows];
        for (j, x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (i, a) in &self.columns[j] {
                out[*i] = out[*i].clone() + a.clone() * x.clone();
            }
        }
        out
    }

    /// Row vector times matrix.
    pub fn apply_left(&self, row: &[S]) -> Vec<S> {
        assert_eq!(row.len(), self.rows);
        self.columns
            .iter()
            .map(|col| {
                col.iter()
                    .filter(|(i, _)| !row[*i].is_zero())
                    .fold(S::zero(), |acc, (i, a)| acc + row[*i].clone() * a.clone())
            })
            .collect()
    }

    /// `self * other`.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "operator composition dimension mismatch");
        let columns = other
            .columns
            .par_iter()
            .map(|col| {
                let mut dense = vec![S::zero(); self.rows];
                let mut touched = vec![false; self.rows];
                for (k, b) in col {
                    for (i, a) in &self.columns[*k] {
                        dense[*i] = dense[*i].clone() + a.clone() * b.clone();
                        touched[*i] = true;
                    }
                }
                dense
                    .into_iter()
                    .enumerate()
                    .filter(|(i, v)| touched[*i] && !v.is_zero())
                    .collect()
            })
            .collect();
        SparseMatrix {
            rows: self.rows,
            cols: other.cols,
            columns,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.lin_comb(&S::one(), other, &S::one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.lin_comb(&S::one(), other, &-S::one())
    }

    /// `a * self + b * other`.
    pub fn lin_comb(&self, a: &S, other: &Self, b: &S) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let columns = self
            .columns
            .iter()
            .zip(&other.columns)
            .map(|(x, y)| {
                let mut merged: std::collections::BTreeMap<usize, S> = Default::default();
                for (i, v) in x {
                    merged.insert(*i, a.clone() * v.clone());
                }
                for (i, v) in y {
                    let cur = merged.remove(i).unwrap_or_else(S::zero);
                    merged.insert(*i, cur + b.clone() * v.clone());
                }
                merged.into_iter().filter(|(_, v)| !v.is_zero()).collect()
            })
            .collect();
        SparseMatrix {
            rows: self.rows,
            cols: self.cols,
            columns,
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        self.lin_comb(c, &Self::zeros(self.rows, self.cols), &S::zero())
    }

    pub fn conj(&self) -> Self {
        SparseMatrix {
            rows: self.rows,
            cols: self.cols,
            columns: self
                .columns
                .iter()
                .map(|c| c.iter().map(|(i, v)| (*i, v.conj())).collect())
                .collect(),
        }
    }
}

impl<S: Scalar> fmt::Debug for SparseMatrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SparseMatrix {}x{} ({} nonzeros)", self.rows, self.cols, self.nnz())
    }
}

/// Product of Gaussian-rational matrices through Gaussian integers: clear
/// denominators, multiply without gcds, divide once.
pub fn matmul_qi(a: &Matrix<Qi>, b: &Matrix<Qi>) -> Result<Matrix<Qi>> {
    if a.cols != b.rows {
        return Err(Error::Dimension(format!("{}x{} times {}x{}", a.rows, a.cols, b.rows, b.cols)));
    }
    let (ia, da) = integral(a);
    let (ib, db) = integral(b);
    let zero = Complex::new(BigInt::zero(), BigInt::zero());
    let mut out = vec![zero.clone(); a.rows * b.cols];
    for i in 0..a.rows {
        let row = &mut out[i * b.cols..(i + 1) * b.cols];
        for k in 0..a.cols {
            let x = &ia[i * a.cols + k];
            if x.is_zero() {
                continue;
            }
            for (j, acc) in row.iter_mut().enumerate() {
                let y = &ib[k * b.cols + j];
                if !y.is_zero() {
                    *acc += x * y;
                }
            }
        }
    }
    let den = da * db;
    let data = out
        .into_iter()
        .map(|z| Complex::new(Rational::new(z.re, den.clone()), Rational::new(z.im, den.clone())))
        .collect();
    Ok(Matrix { rows: a.rows, cols: b.cols, data })
}

/// Exact rank of a Gaussian-rational matrix: rows scaled to Gaussian
/// integers, then fraction-free elimination with exact integer divisions.
pub fn rank_qi(m: &Matrix<Qi>) -> usize {
    let mut a: Vec<Vec<Complex<BigInt>>> = (0..m.rows)
        .map(|i| {
            let row = &m.data[i * m.cols..(i + 1) * m.cols];
            let den = row.iter().fold(BigInt::one(), |acc, z| acc.lcm(z.re.denom()).lcm(z.im.denom()));
            row.iter()
                .map(|z| Complex::new(z.re.numer() * (&den / z.re.denom()), z.im.numer() * (&den / z.im.denom())))
                .collect()
        })
        .collect();
    let mut prev = Complex::new(BigInt::one(), BigInt::zero());
    let mut row = 0;
    for c in 0..m.cols {
        if row == m.rows {
            break;
        }
        let Some(p) = (row..m.rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        let piv = a[row][c].clone();
        let (top, rest) = a.split_at_mut(row + 1);
        let pivot_row = &top[row];
        for r in rest.iter_mut() {
            let aic = r[c].clone();
            for j in c + 1..m.cols {
                r[j] = (&piv * &r[j] - &aic * &pivot_row[j]) / &prev;
            }
            r[c] = Complex::new(BigInt::zero(), BigInt::zero());
        }
        prev = piv;
        row += 1;
    }
    row
}

fn integral(m: &Matrix<Qi>) -> (Vec<Complex<BigInt>>, BigInt) {
    let den = m
        .data
        .iter()
        .fold(BigInt::one(), |acc, z| acc.lcm(z.re.denom()).lcm(z.im.denom()));
    let scale = |r: &Rational| r.numer() * (&den / r.denom());
    (m.data.iter().map(|z| Complex::new(scale(&z.re), scale(&z.im))).collect(), den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{qi, qi_parts, rat, Qi};

    fn m(rows: &[&[i64]]) -> Matrix<Qi> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| qi(x, 1)).collect()).collect())
    }

    #[test]
    fn nullspace_of_coordinate_projection() {
        let a = m(&[&[1, 0, 0], &[0, 1, 0]]);
        let ns = a.nullspace();
        assert_eq!(ns, vec![vec![qi(0, 1), qi(0, 1), qi(1, 1)]]);
    }

    #[test]
    fn inconsistent_solve_is_distinct_from_rank_deficiency() {
        let a = m(&[&[1, 1], &[2, 2]]);
        assert!(matches!(a.solve(&[qi(1, 1), qi(3, 1)]), Err(Error::Inconsistent(_))));
        let x = a.solve(&[qi(1, 1), qi(2, 1)]).unwrap();
        assert_eq!(a.mul_vec(&x).unwrap(), vec![qi(1, 1), qi(2, 1)]);
        assert!(matches!(
            a.solve_unique(&[qi(1, 1), qi(2, 1)]),
            Err(Error::RankDeficient(_))
        ));
    }

    #[test]
    fn integer_matmul_matches_generic() {
        let a = Matrix::from_fn(3, 4, |i, j| qi_parts(rat(i as i64 - 1, j as i64 + 2), rat(j as i64, 3)));
        let b = Matrix::from_fn(4, 2, |i, j| qi_parts(rat(1, (i + j + 1) as i64), rat(-(i as i64), 5)));
        assert_eq!(matmul_qi(&a, &b).unwrap(), a.matmul(&b).unwrap());
        assert!(matmul_qi(&b, &b).is_err());
    }

    #[test]
    fn ldl_reconstructs() {
        let a = Matrix::from_fn(3, 3, |i, j| qi_parts(rat((i * j) as i64 + 1, 1), rat(i as i64 - j as i64, 2)));
        let h = a.conj_transpose().matmul(&a).unwrap();
        let h = Matrix::from_fn(3, 3, |i, j| h[(i, j)].clone() + if i == j { qi(1, 1) } else { qi(0, 1) });
        let (l, d) = h.hermitian_ldl().unwrap();
        let dm = Matrix::from_fn(3, 3, |i, j| if i == j { d[i].clone() } else { qi(0, 1) });
        assert_eq!(l.matmul(&dm).unwrap().matmul(&l.conj_transpose()).unwrap(), h);
    }

    #[test]
    fn gaussian_inverse() {
        let i = qi_parts(rat(0, 1), rat(1, 1));
        let a = Matrix::from_rows(vec![vec![qi(1, 1), i.clone()], vec![-i, qi(2, 1)]]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.matmul(&inv).unwrap(), Matrix::identity(2));
        assert!(a.is_hermitian());
        assert_eq!(a.hermitian_pivots().unwrap(), vec![qi(1, 1), qi(1, 1)]);
    }

    #[test]
    fn bareiss_matches_rref_rank() {
        let a = m(&[&[2, 4, 6], &[1, 3, 5], &[3, 7, 11]]);
        assert_eq!(a.bareiss_rank(), 2);
        assert_eq!(a.rank(), 2);
    }

    #[test]
    fn sparse_compose_matches_dense() {
        let a = m(&[&[1, 2], &[0, 3], &[4, 0]]);
        let b = m(&[&[0, 1, 5], &[2, 0, 1]]);
        let sa = SparseMatrix::from_dense(&a);
        let sb = SparseMatrix::from_dense(&b);
        assert_eq!(sa.compose(&sb).to_dense(), a.matmul(&b).unwrap());
        let v = vec![qi(1, 1), qi(-1, 2), qi(3, 1)];
        assert_eq!(sb.apply(&v), b.mul_vec(&v).unwrap());
    }
}

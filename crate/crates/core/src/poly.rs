//! Sparse multivariate polynomials over a [`Scalar`] field.
//!
//! Monomials are dense exponent vectors ordered graded-lexicographically:
//! total degree first, then exponent vectors compared left to right with a
//! larger exponent in an earlier variable counting as larger.

use std::collections::BTreeMap;
use std::fmt;

use smallvec::SmallVec;

use crate::scalar::Scalar;

pub type Exponents = SmallVec<[u8; 32]>;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    // Field order matters: the derived `Ord` is graded lex.
    degree: u32,
    exps: Exponents,
}

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial {
            degree: 0,
            exps: smallvec::smallvec![0; nvars],
        }
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut m = Self::one(nvars);
        m.exps[i] = 1;
        m.degree = 1;
        m
    }

    pub fn from_exponents(exps: &[u8]) -> Self {
        Monomial {
            degree: exps.iter().map(|&e| e as u32).sum(),
            exps: exps.iter().copied().collect(),
        }
    }

    /// Monomial `x_{i1} x_{i2} ...` from a list of variable indices.
    pub fn from_indices(nvars: usize, indices: &[usize]) -> Self {
        let mut m = Self::one(nvars);
        for &i in indices {
            m.exps[i] += 1;
        }
        m.degree = indices.len() as u32;
        m
    }

    pub fn degree(&self) -> usize {
        self.degree as usize
    }

    pub fn nvars(&self) -> usize {
        self.exps.len()
    }

    pub fn exponents(&self) -> &[u8] {
        &self.exps
    }

    pub fn exponent(&self, i: usize) -> u8 {
        self.exps[i]
    }

    /// Variable indices with multiplicity, ascending.
    pub fn indices(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.degree());
        for (i, &e) in self.exps.iter().enumerate() {
            out.extend(std::iter::repeat(i).take(e as usize));
        }
        out
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial {
            degree: self.degree + other.degree,
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Divide by `x_i`, returning the exponent that was removed.
    pub fn div_var(&self, i: usize) -> Option<(u8, Monomial)> {
        let e = self.exps[i];
        if e == 0 {
            return None;
        }
        let mut m = self.clone();
        m.exps[i] -= 1;
        m.degree -= 1;
        Some((e, m))
    }

    pub fn evaluate<S: Scalar>(&self, point: &[S]) -> S {
        let mut acc = S::one();
        for (x, &e) in point.iter().zip(&self.exps) {
            for _ in 0..e {
                acc = acc * x.clone();
            }
        }
        acc
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree == 0 {
            return write!(f, "1");
        }
        let mut first = true;
        for (i, &e) in self.exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "x{i}")?;
            } else {
                write!(f, "x{i}^{e}")?;
            }
        }
        Ok(())
    }
}

/// All monomials of total degree `d` in `nvars` variables, ascending.
pub fn monomials_of_degree(nvars: usize, d: usize) -> Vec<Monomial> {
    fn rec(nvars: usize, var: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Monomial>) {
        if var + 1 == nvars {
            cur[var] = left as u8;
            out.push(Monomial::from_exponents(cur));
            cur[var] = 0;
            return;
        }
        for e in 0..=left {
            cur[var] = e as u8;
            rec(nvars, var + 1, left - e, cur, out);
        }
        cur[var] = 0;
    }
    if nvars == 0 {
        return if d == 0 { vec![Monomial::one(0)] } else { vec![] };
    }
    let mut out = Vec::new();
    rec(nvars, 0, d, &mut vec![0; nvars], &mut out);
    out.sort();
    out
}

#[derive(Clone, PartialEq)]
pub struct Polynomial<S> {
    nvars: usize,
    terms: BTreeMap<Monomial, S>,
}

impl<S: Scalar> Polynomial<S> {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: S) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::one(nvars), c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, S::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        Self::monomial(Monomial::var(nvars, i), S::one())
    }

    pub fn monomial(m: Monomial, c: S) -> Self {
        let mut p = Self::zero(m.nvars());
        p.add_term(m, c);
        p
    }

    /// The linear form `sum_i coeffs[i] x_i`.
    pub fn linear(coeffs: &[S]) -> Self {
        let n = coeffs.len();
        let mut p = Self::zero(n);
        for (i, c) in coeffs.iter().enumerate() {
            p.add_term(Monomial::var(n, i), c.clone());
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &S)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> S {
        self.terms.get(m).cloned().unwrap_or_else(S::zero)
    }

    /// Add `c * m`, dropping the term if it cancels.
    pub fn add_term(&mut self, m: Monomial, c: S) {
        debug_assert_eq!(m.nvars(), self.nvars);
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = o.get().clone() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(Monomial::degree);
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    pub fn homogeneous_part(&self, d: usize) -> Self {
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == d)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, a)| (m.clone(), a.clone() * c.clone()))
                .collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &Self, c: &S) {
        for (m, a) in &other.terms {
            self.add_term(m.clone(), a.clone() * c.clone());
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (ma, a) in &self.terms {
            for (mb, b) in &other.terms {
                out.add_term(ma.mul(mb), a.clone() * b.clone());
            }
        }
        out
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut acc = Self::one(self.nvars);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            if let Some((e, q)) = m.div_var(i) {
                out.add_term(q, c.clone() * S::from_i64(e as i64));
            }
        }
        out
    }

    /// Euler operator: multiplies each degree-`d` term by `d`.
    pub fn euler(&self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.clone() * S::from_i64(m.degree() as i64));
        }
        out
    }

    pub fn evaluate(&self, point: &[S]) -> S {
        assert_eq!(point.len(), self.nvars, "evaluation point has wrong length");
        self.terms
            .iter()
            .fold(S::zero(), |acc, (m, c)| acc + c.clone() * m.evaluate(point))
    }

    /// Conjugate every coefficient.
    pub fn conj_coeffs(&self) -> Self {
        self.map_coeffs(|c| c.conj())
    }

    pub fn map_coeffs<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Polynomial<T> {
        let mut out = Polynomial::zero(self.nvars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    /// Substitute `x_i -> images[i]` (images may live in another ring).
    pub fn substitute(&self, images: &[Polynomial<S>]) -> Polynomial<S> {
        assert_eq!(images.len(), self.nvars);
        let target = images.first().map_or(0, |p| p.nvars);
        let mut out = Polynomial::zero(target);
        for (m, c) in &self.terms {
            let mut t = Polynomial::constant(target, c.clone());
            for (i, &e) in m.exponents().iter().enumerate() {
                for _ in 0..e {
                    t = t.mul(&images[i]);
                }
            }
            out.add_scaled(&t, &S::one());
        }
        out
    }

    /// Poisson bracket `{f, g} = sum_{ij} B_ij d_i f d_j g` for the bivector `B`.
    pub fn poisson(&self, other: &Self, bivector: &Bivector<S>) -> Self {
        assert_eq!(self.nvars, bivector.nvars(), "variable-count mismatch");
        assert_eq!(other.nvars, bivector.nvars(), "variable-count mismatch");
        let n = self.nvars;
        let df: Vec<_> = (0..n).map(|i| self.derivative(i)).collect();
        let dg: Vec<_> = (0..n).map(|j| other.derivative(j)).collect();
        let mut out = Self::zero(n);
        for (i, dfi) in df.iter().enumerate() {
            if dfi.is_zero() {
                continue;
            }
            for (j, dgj) in dg.iter().enumerate() {
                if dgj.is_zero() {
                    continue;
                }
                if let Some(b) = bivector.entry(i, j) {
                    out.add_scaled(&b.mul(dfi).mul(dgj), &S::one());
                }
            }
        }
        out
    }
}

impl<S: Scalar> std::ops::Add for &Polynomial<S> {
    type Output = Polynomial<S>;
    fn add(self, rhs: Self) -> Polynomial<S> {
        let mut out = self.clone();
        out.add_scaled(rhs, &S::one());
        out
    }
}

impl<S: Scalar> std::ops::Sub for &Polynomial<S> {
    type Output = Polynomial<S>;
    fn sub(self, rhs: Self) -> Polynomial<S> {
        let mut out = self.clone();
        out.add_scaled(rhs, &-S::one());
        out
    }
}

impl<S: Scalar> std::ops::Mul for &Polynomial<S> {
    type Output = Polynomial<S>;
    fn mul(self, rhs: Self) -> Polynomial<S> {
        Polynomial::mul(self, rhs)
    }
}

impl<S: Scalar> std::ops::Neg for &Polynomial<S> {
    type Output = Polynomial<S>;
    fn neg(self) -> Polynomial<S> {
        self.scale(&-S::one())
    }
}

impl<S: Scalar + fmt::Debug> fmt::Debug for Polynomial<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c:?})*{m:?}")?;
        }
        Ok(())
    }
}

/// A Poisson bivector: `{x_i, x_j}` as a polynomial for each ordered pair.
#[derive(Clone)]
pub struct Bivector<S> {
    nvars: usize,
    entries: Vec<Option<Polynomial<S>>>,
}

impl<S: Scalar> Bivector<S> {
    pub fn new(nvars: usize) -> Self {
        Bivector {
            nvars,
            entries: vec![None; nvars * nvars],
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn set(&mut self, i: usize, j: usize, p: Polynomial<S>) {
        self.entries[i * self.nvars + j] = if p.is_zero() { None } else { Some(p) };
    }

    pub fn entry(&self, i: usize, j: usize) -> Option<&Polynomial<S>> {
        self.entries[i * self.nvars + j].as_ref()
    }

    /// Linear Lie–Poisson bivector `{x_i, x_j} = sum_k c_ij^k x_k`.
    pub fn lie_poisson(structure: &[Vec<Vec<(usize, S)>>]) -> Self {
        let n = structure.len();
        let mut b = Self::new(n);
        for (i, row) in structure.iter().enumerate() {
            for (j, entry) in row.iter().enumerate() {
                let mut p = Polynomial::zero(n);
                for (k, c) in entry {
                    p.add_term(Monomial::var(n, *k), c.clone());
                }
                b.set(i, j, p);
            }
        }
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{qi, Qi};

    fn x(n: usize, i: usize) -> Polynomial<Qi> {
        Polynomial::var(n, i)
    }

    #[test]
    fn graded_lex_order() {
        let a = Monomial::from_indices(3, &[0, 0]);
        let b = Monomial::from_indices(3, &[0, 1]);
        let c = Monomial::from_indices(3, &[2]);
        assert!(a > b);
        assert!(b > c, "higher degree wins");
        let all = monomials_of_degree(3, 2);
        assert_eq!(all.len(), 6);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn euler_scales_by_degree() {
        let n = 3;
        assert!(Polynomial::<Qi>::one(n).euler().is_zero());
        assert_eq!(x(n, 0).euler(), x(n, 0));
        let f = x(n, 0).pow(2).mul(&x(n, 1));
        assert_eq!(f.euler(), f.scale(&qi(3, 1)));
    }

    #[test]
    fn grading_of_products() {
        let n = 4;
        let f = &x(n, 0).pow(2) + &x(n, 1).mul(&x(n, 2));
        let g = &x(n, 3).pow(3) + &x(n, 0).pow(3);
        let fg = f.mul(&g);
        assert!(fg.is_homogeneous());
        assert_eq!(fg.degree(), Some(5));
    }

    #[test]
    fn zero_coefficients_never_stored() {
        let n = 2;
        let f = &x(n, 0) - &x(n, 0);
        assert!(f.is_zero());
        assert_eq!(f.len(), 0);
    }

    #[test]
    fn substitution_is_a_homomorphism() {
        let n = 2;
        let images = vec![&x(n, 0) + &x(n, 1), &x(n, 0) - &x(n, 1)];
        let f = x(n, 0).mul(&x(n, 1));
        let g = &x(n, 0).pow(2) + &x(n, 1);
        assert_eq!(
            f.mul(&g).substitute(&images),
            f.substitute(&images).mul(&g.substitute(&images))
        );
    }
}

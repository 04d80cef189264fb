//! Classical simple Lie algebras in their defining representation.
//!
//! Every basis element is a weight vector: root vectors for all roots plus a
//! Cartan basis. The highest root vector `X` and lowest root vector `Y` are
//! basis elements, rescaled so that `(X, h, Y)` is an sl2-triple with
//! `sigma(Y) = -X`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::poly::Bivector;
use crate::scalar::{qi, qi_from_rational, qi_i, qi_real, rat, Qi, Rational, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    Sl,
    So,
    Sp,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Sl => "sl",
            Family::So => "so",
            Family::Sp => "sp",
        })
    }
}

/// Cartan type of the root system, with its rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RootKind {
    A(usize),
    B(usize),
    C(usize),
    D(usize),
}

impl RootKind {
    /// Ambient dimension of the epsilon coordinates.
    pub fn coords(self) -> usize {
        match self {
            RootKind::A(r) => r + 1,
            RootKind::B(r) | RootKind::C(r) | RootKind::D(r) => r,
        }
    }

    pub fn positive_roots(self) -> Vec<Vec<i64>> {
        let n = self.coords();
        let e = |i: usize| {
            let mut v = vec![0; n];
            v[i] = 1;
            v
        };
        let add = |a: &[i64], b: &[i64], s: i64| -> Vec<i64> {
            a.iter().zip(b).map(|(x, y)| x + s * y).collect()
        };
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                out.push(add(&e(i), &e(j), -1));
                if !matches!(self, RootKind::A(_)) {
                    out.push(add(&e(i), &e(j), 1));
                }
            }
            match self {
                RootKind::B(_) => out.push(e(i)),
                RootKind::C(_) => out.push(add(&e(i), &e(i), 1)),
                _ => {}
            }
        }
        out
    }

    pub fn highest_root(self) -> Vec<i64> {
        let n = self.coords();
        let mut v = vec![0; n];
        match self {
            RootKind::A(_) => {
                v[0] = 1;
                v[n - 1] = -1;
            }
            RootKind::C(_) => v[0] = 2,
            RootKind::B(_) | RootKind::D(_) => {
                v[0] = 1;
                v[1] = 1;
            }
        }
        v
    }

    /// Half the sum of the positive roots.
    pub fn rho(self) -> Vec<Rational> {
        let n = self.coords();
        let mut acc = vec![Rational::zero(); n];
        for r in self.positive_roots() {
            for (a, x) in acc.iter_mut().zip(r) {
                *a += Rational::from_integer(x.into());
            }
        }
        acc.into_iter().map(|a| a / rat(2, 1)).collect()
    }

    /// Dimension of the irreducible module of highest weight `d` times the
    /// highest root (Weyl dimension formula).
    pub fn cartan_power_dim(self, d: usize) -> BigInt {
        let rho = self.rho();
        let theta = self.highest_root();
        let lam: Vec<Rational> = theta
            .iter()
            .zip(&rho)
            .map(|(t, r)| Rational::from_integer((t * d as i64).into()) + r)
            .collect();
        let dot = |a: &[Rational], b: &[i64]| {
            a.iter()
                .zip(b)
                .fold(Rational::zero(), |s, (x, y)| s + x * Rational::from_integer((*y).into()))
        };
        let mut num = Rational::one();
        for alpha in self.positive_roots() {
            num = num * dot(&lam, &alpha) / dot(&rho, &alpha);
        }
        debug_assert!(num.is_integer());
        num.to_integer()
    }

    /// `(rho, theta^vee) - 1`, i.e. the dual Coxeter number minus two.
    pub fn m(self) -> Rational {
        let rho = self.rho();
        let theta = self.highest_root();
        let tt: i64 = theta.iter().map(|t| t * t).sum();
        let rt = rho
            .iter()
            .zip(&theta)
            .fold(Rational::zero(), |s, (r, t)| s + r * Rational::from_integer((*t).into()));
        rt * rat(2, tt) - Rational::one()
    }
}

/// A classical simple Lie algebra with the data the orbit construction needs.
#[derive(Clone)]
pub struct AlgebraSpec {
    pub family: Family,
    /// Matrix size of the defining representation.
    pub size: usize,
    pub root_kind: RootKind,
    pub labels: Vec<String>,
    /// Basis elements as matrices of the defining representation.
    pub matrices: Vec<Matrix<Qi>>,
    /// Weight of each basis element in epsilon coordinates (zero on the Cartan).
    pub weights: Vec<Vec<i64>>,
    /// `structure[i][j]` lists `(k, c)` with `[e_i, e_j] = sum c e_k`.
    pub structure: Vec<Vec<Vec<(usize, Qi)>>>,
    pub killing: Matrix<Qi>,
    pub killing_inverse: Matrix<Qi>,
    /// `kappa(a, b) = trace_scale * tr(a b)` in the defining representation.
    pub trace_scale: Qi,
    pub x: usize,
    pub y: usize,
    pub h: Vec<Qi>,
    pub epsilon: Rational,
    pub m: Rational,
    /// Column `j` holds the coordinates of `sigma(e_j)`.
    pub sigma: Matrix<Qi>,
    /// Column `j` holds the coordinates of `theta(e_j)`.
    pub theta: Matrix<Qi>,
    /// The group element with `theta = Ad(weyl_element)`.
    pub weyl_element: Matrix<Qi>,
    coord_rows: Vec<(usize, usize)>,
    coord_inverse: Matrix<Qi>,
}

impl fmt::Debug for AlgebraSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}) dim {}", self.family, self.size, self.dim())
    }
}

/// Algebra names accepted on the command line.
pub const SUPPORTED: [&str; 7] = ["sl3", "sl4", "so6", "so7", "so8", "sp2", "sp4"];

/// Parse names such as `sl3`, `so7`, `sp4` into a family and matrix size.
pub fn parse_algebra(name: &str) -> Result<(Family, usize)> {
    let name = name.trim().to_ascii_lowercase();
    let (fam, rest) = name.split_at(name.len().min(2));
    let family = match fam {
        "sl" => Family::Sl,
        "so" => Family::So,
        "sp" => Family::Sp,
        _ => return Err(Error::Config(format!("unknown algebra `{name}`"))),
    };
    let size = usize::from_str(rest).map_err(|_| Error::Config(format!("unknown algebra `{name}`")))?;
    Ok((family, size))
}

fn unit(k: usize, i: usize, j: usize) -> Matrix<Qi> {
    let mut m = Matrix::zeros(k, k);
    m[(i, j)] = qi(1, 1);
    m
}

fn lin(terms: &[(i64, &Matrix<Qi>)]) -> Matrix<Qi> {
    let k = terms[0].1.rows();
    Matrix::from_fn(k, k, |i, j| {
        terms
            .iter()
            .fold(Qi::zero(), |s, (c, m)| s + qi(*c, 1) * m[(i, j)].clone())
    })
}

fn commutator(a: &Matrix<Qi>, b: &Matrix<Qi>) -> Matrix<Qi> {
    let ab = a.matmul(b).expect("square");
    let ba = b.matmul(a).expect("square");
    Matrix::from_fn(a.rows(), a.cols(), |i, j| ab[(i, j)].clone() - ba[(i, j)].clone())
}

fn scale_matrix(m: &Matrix<Qi>, c: &Qi) -> Matrix<Qi> {
    m.map(|v| v.clone() * c.clone())
}

fn trace(m: &Matrix<Qi>) -> Qi {
    (0..m.rows()).fold(Qi::zero(), |s, i| s + m[(i, i)].clone())
}

fn rational_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    (&n * &n == *r.numer() && &d * &d == *r.denom()).then(|| Rational::new(n, d))
}

struct Raw {
    kind: RootKind,
    labels: Vec<String>,
    weights: Vec<Vec<i64>>,
    matrices: Vec<Matrix<Qi>>,
}

impl Raw {
    fn new(kind: RootKind) -> Self {
        Raw {
            kind,
            labels: Vec::new(),
            weights: Vec::new(),
            matrices: Vec::new(),
        }
    }

    fn root(&mut self, weight: Vec<i64>, m: Matrix<Qi>) {
        let label = format!(
            "e[{}]",
            weight.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(",")
        );
        self.labels.push(label);
        self.weights.push(weight);
        self.matrices.push(m);
    }

    fn cartan(&mut self, idx: usize, m: Matrix<Qi>) {
        self.labels.push(format!("h{}", idx + 1));
        self.weights.push(vec![0; self.kind.coords()]);
        self.matrices.push(m);
    }
}

fn eps(n: usize, terms: &[(usize, i64)]) -> Vec<i64> {
    let mut v = vec![0; n];
    for &(i, c) in terms {
        v[i] += c;
    }
    v
}

fn raw_sl(k: usize) -> Raw {
    let mut raw = Raw::new(RootKind::A(k - 1));
    for i in 0..k {
        for j in 0..k {
            if i != j {
                raw.root(eps(k, &[(i, 1), (j, -1)]), unit(k, i, j));
            }
        }
    }
    for i in 0..k - 1 {
        raw.cartan(i, lin(&[(1, &unit(k, i, i)), (-1, &unit(k, i + 1, i + 1))]));
    }
    raw
}

fn raw_sp(n: usize) -> Raw {
    let k = 2 * n;
    let u = |i, j| unit(k, i, j);
    let mut raw = Raw::new(RootKind::C(n));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                raw.root(eps(n, &[(i, 1), (j, -1)]), lin(&[(1, &u(i, j)), (-1, &u(n + j, n + i))]));
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            raw.root(eps(n, &[(i, 1), (j, 1)]), lin(&[(1, &u(i, n + j)), (1, &u(j, n + i))]));
            raw.root(eps(n, &[(i, -1), (j, -1)]), lin(&[(1, &u(n + i, j)), (1, &u(n + j, i))]));
        }
        // Sign chosen so that X = -E_{1,n+1} matches -w_1^2 / 2 in the Weyl model.
        raw.root(eps(n, &[(i, 2)]), lin(&[(-1, &u(i, n + i))]));
        raw.root(eps(n, &[(i, -2)]), lin(&[(-1, &u(n + i, i))]));
    }
    for i in 0..n {
        raw.cartan(i, lin(&[(1, &u(i, i)), (-1, &u(n + i, n + i))]));
    }
    raw
}

/// so(k) for the split form `B(a_j, b_j) = 1 (= B(c, c) for odd k)`, then
/// conjugated into the algebra of the identity form.
fn raw_so(k: usize) -> Result<Raw> {
    let r = k / 2;
    let odd = k % 2 == 1;
    let kind = if odd { RootKind::B(r) } else { RootKind::D(r) };
    let (a, b, c) = (|j: usize| j, |j: usize| r + j, 2 * r);
    let u = |i, j| unit(k, i, j);
    let mut raw = Raw::new(kind);
    for i in 0..r {
        for j in 0..r {
            if i != j {
                raw.root(eps(r, &[(i, 1), (j, -1)]), lin(&[(1, &u(a(i), a(j))), (-1, &u(b(j), b(i)))]));
            }
        }
    }
    for i in 0..r {
        for j in i + 1..r {
            raw.root(eps(r, &[(i, 1), (j, 1)]), lin(&[(1, &u(a(i), b(j))), (-1, &u(a(j), b(i)))]));
            raw.root(eps(r, &[(i, -1), (j, -1)]), lin(&[(1, &u(b(i), a(j))), (-1, &u(b(j), a(i)))]));
        }
        if odd {
            raw.root(eps(r, &[(i, 1)]), lin(&[(1, &u(a(i), c)), (-1, &u(c, b(i)))]));
            raw.root(eps(r, &[(i, -1)]), lin(&[(1, &u(b(i), c)), (-1, &u(c, a(i)))]));
        }
    }
    for i in 0..r {
        raw.cartan(i, lin(&[(1, &u(a(i), a(i))), (-1, &u(b(i), b(i)))]));
    }
    // Q^T Q = B, so A -> Q A Q^{-1} carries so(B) onto so(identity).
    let mut q = Matrix::zeros(k, k);
    for j in 0..r {
        q[(a(j), a(j))] = qi(1, 1);
        q[(b(j), a(j))] = qi_i();
        q[(a(j), b(j))] = qi(1, 2);
        q[(b(j), b(j))] = -qi_i() * qi(1, 2);
    }
    if odd {
        q[(c, c)] = qi(1, 1);
    }
    let qinv = q.inverse()?;
    for m in raw.matrices.iter_mut() {
        *m = q.matmul(m)?.matmul(&qinv)?;
    }
    Ok(raw)
}

impl AlgebraSpec {
    pub fn dim(&self) -> usize {
        self.matrices.len()
    }

    /// Size of the defining representation.
    pub fn rep_dim(&self) -> usize {
        self.size
    }

    pub fn name(&self) -> String {
        format!("{}{}", self.family, self.size)
    }

    pub fn basis_vector(&self, i: usize) -> Vec<Qi> {
        let mut v = vec![Qi::zero(); self.dim()];
        v[i] = qi(1, 1);
        v
    }

    pub fn x_vec(&self) -> Vec<Qi> {
        self.basis_vector(self.x)
    }

    pub fn y_vec(&self) -> Vec<Qi> {
        self.basis_vector(self.y)
    }

    pub fn h_vec(&self) -> Vec<Qi> {
        self.h.clone()
    }

    fn check_len(&self, v: &[Qi]) -> Result<()> {
        if v.len() == self.dim() {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "vector of length {} for an algebra of dimension {}",
                v.len(),
                self.dim()
            )))
        }
    }

    /// Matrix of `sum v_i e_i` in the defining representation.
    pub fn matrix_of(&self, v: &[Qi]) -> Result<Matrix<Qi>> {
        self.check_len(v)?;
        let k = self.size;
        let mut m = Matrix::<Qi>::zeros(k, k);
        for (c, e) in v.iter().zip(&self.matrices) {
            if c.is_zero() {
                continue;
            }
            for i in 0..k {
                for j in 0..k {
                    if !e[(i, j)].is_zero() {
                        let val = m[(i, j)].clone() + c.clone() * e[(i, j)].clone();
                        m[(i, j)] = val;
                    }
                }
            }
        }
        Ok(m)
    }

    /// Coordinates of a matrix in the basis; fails if it is not in the algebra.
    pub fn coords(&self, a: &Matrix<Qi>) -> Result<Vec<Qi>> {
        let rhs: Vec<Qi> = self.coord_rows.iter().map(|&(i, j)| a[(i, j)].clone()).collect();
        let v = self.coord_inverse.mul_vec(&rhs)?;
        if &self.matrix_of(&v)? != a {
            return Err(Error::Dimension("matrix is not in the Lie algebra".into()));
        }
        Ok(v)
    }

    pub fn bracket(&self, x: &[Qi], y: &[Qi]) -> Result<Vec<Qi>> {
        self.check_len(x)?;
        self.check_len(y)?;
        let mut out = vec![Qi::zero(); self.dim()];
        for (i, a) in x.iter().enumerate().filter(|(_, a)| !a.is_zero()) {
            for (j, b) in y.iter().enumerate().filter(|(_, b)| !b.is_zero()) {
                let ab = a.clone() * b.clone();
                for (k, c) in &self.structure[i][j] {
                    out[*k] = out[*k].clone() + ab.clone() * c.clone();
                }
            }
        }
        Ok(out)
    }

    pub fn killing(&self, x: &[Qi], y: &[Qi]) -> Result<Qi> {
        self.check_len(x)?;
        self.check_len(y)?;
        let ky = self.killing.mul_vec(y)?;
        Ok(x.iter().zip(&ky).fold(Qi::zero(), |s, (a, b)| s + a.clone() * b.clone()))
    }

    /// The antilinear involution fixing the compact form.
    pub fn sigma(&self, x: &[Qi]) -> Result<Vec<Qi>> {
        self.check_len(x)?;
        let cx: Vec<Qi> = x.iter().map(Scalar::conj).collect();
        self.sigma.mul_vec(&cx)
    }

    pub fn theta(&self, x: &[Qi]) -> Result<Vec<Qi>> {
        self.check_len(x)?;
        self.theta.mul_vec(x)
    }

    /// Dual basis vectors `e^i` with `kappa(e_i, e^j) = delta_ij`.
    pub fn dual_basis(&self) -> Vec<Vec<Qi>> {
        (0..self.dim()).map(|i| self.killing_inverse.column(i)).collect()
    }

    /// Casimir as index pairs: `Q = sum_{ij} w_ij e_i e_j`.
    pub fn dual_basis_pairs(&self) -> Vec<(usize, usize, Qi)> {
        let n = self.dim();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let w = self.killing_inverse[(i, j)].clone();
                if !w.is_zero() {
                    out.push((i, j, w));
                }
            }
        }
        out
    }

    pub fn is_cartan(&self, i: usize) -> bool {
        self.weights[i].iter().all(|w| *w == 0)
    }

    /// Whether basis element `i` is a negative root vector.
    pub fn is_negative_root(&self, i: usize) -> bool {
        let w = &self.weights[i];
        let neg: Vec<i64> = w.iter().map(|x| -x).collect();
        !self.is_cartan(i) && self.root_kind.positive_roots().contains(&neg)
    }

    pub fn weyl_dim_cartan_power(&self, d: usize) -> BigInt {
        self.root_kind.cartan_power_dim(d)
    }

    /// Linear Poisson bivector on the momentum coordinates.
    pub fn bivector(&self) -> Bivector<Qi> {
        Bivector::lie_poisson(&self.structure)
    }

    /// Matrix of `ad(x)` on coordinates.
    pub fn ad(&self, x: &[Qi]) -> Result<Matrix<Qi>> {
        let n = self.dim();
        let cols: Vec<Vec<Qi>> = (0..n)
            .map(|j| self.bracket(x, &self.basis_vector(j)))
            .collect::<Result<_>>()?;
        Ok(Matrix::from_fn(n, n, |i, j| cols[j][i].clone()))
    }

    /// Weight of a nonzero weight vector given in coordinates.
    pub fn weight_of(&self, v: &[Qi]) -> Option<Vec<i64>> {
        let mut w = None;
        for (i, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            match &w {
                None => w = Some(self.weights[i].clone()),
                Some(w0) if *w0 != self.weights[i] => return None,
                _ => {}
            }
        }
        w
    }
}

/// Build the algebra and its triple, forms and involutions.
pub fn build_algebra(family: Family, size: usize) -> Result<AlgebraSpec> {
    let raw = match family {
        Family::Sl if size >= 3 => raw_sl(size),
        Family::So if size >= 6 => raw_so(size)?,
        Family::Sp if size >= 2 && size % 2 == 0 => raw_sp(size / 2),
        _ => {
            return Err(Error::Config(format!(
                "unsupported algebra {family}({size})"
            )))
        }
    };
    let Raw {
        kind,
        labels,
        weights,
        mut matrices,
    } = raw;
    let n = matrices.len();
    let k = size;

    let theta_w = kind.highest_root();
    let neg_theta: Vec<i64> = theta_w.iter().map(|t| -t).collect();
    let xi = weights.iter().position(|w| *w == theta_w).expect("highest root vector");
    let yi = weights.iter().position(|w| *w == neg_theta).expect("lowest root vector");

    // Y0 = -sigma(X0) lies in the lowest root space; rescale both by s with
    // s^2 = 2 / lambda where [h0, X0] = lambda X0.
    let x0 = matrices[xi].clone();
    let y0 = x0.conj_transpose();
    let h0 = commutator(&x0, &y0);
    let hx = commutator(&h0, &x0);
    let (pi, pj) = (0..k)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .find(|&(i, j)| !x0[(i, j)].is_zero())
        .expect("nonzero root vector");
    let lambda = qi_real(&(hx[(pi, pj)].clone() / x0[(pi, pj)].clone()))
        .filter(|l| l.is_positive())
        .ok_or_else(|| Error::Inconsistent("highest root has no real positive h-eigenvalue".into()))?;
    let s = rational_sqrt(&(rat(2, 1) / lambda))
        .ok_or_else(|| Error::Inconsistent("triple rescaling is not rational".into()))?;
    let s = qi_from_rational(s);
    matrices[xi] = scale_matrix(&x0, &s);
    matrices[yi] = scale_matrix(&y0, &s);

    // Coordinate extraction: pick n independent matrix positions.
    let positions: Vec<(usize, usize)> = (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).collect();
    let flat = Matrix::from_fn(n, positions.len(), |b, p| {
        let (i, j) = positions[p];
        matrices[b][(i, j)].clone()
    });
    let (_, piv) = flat.rref();
    if piv.len() != n {
        return Err(Error::RankDeficient("basis matrices are dependent".into()));
    }
    let coord_rows: Vec<(usize, usize)> = piv.iter().map(|&p| positions[p]).collect();
    let sub = Matrix::from_fn(n, n, |r, b| {
        let (i, j) = coord_rows[r];
        matrices[b][(i, j)].clone()
    });
    let coord_inverse = sub.inverse()?;

    let mut spec = AlgebraSpec {
        family,
        size,
        root_kind: kind,
        labels,
        matrices,
        weights,
        structure: Vec::new(),
        killing: Matrix::zeros(n, n),
        killing_inverse: Matrix::zeros(n, n),
        trace_scale: Qi::zero(),
        x: xi,
        y: yi,
        h: Vec::new(),
        epsilon: match family {
            Family::Sl => Rational::zero(),
            Family::So => Rational::one(),
            Family::Sp => rat(-1, 2),
        },
        m: kind.m(),
        sigma: Matrix::zeros(n, n),
        theta: Matrix::zeros(n, n),
        weyl_element: Matrix::identity(k),
        coord_rows,
        coord_inverse,
    };

    let mut structure = vec![vec![Vec::new(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let c = commutator(&spec.matrices[i], &spec.matrices[j]);
            let v = spec.coords(&c)?;
            structure[i][j] = v
                .into_iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .collect();
        }
    }
    spec.structure = structure;

    let xm = &spec.matrices[xi];
    let ym = &spec.matrices[yi];
    let txy = trace(&xm.matmul(ym)?);
    spec.trace_scale = qi(1, 2) / txy;
    spec.killing = Matrix::from_fn(n, n, |i, j| {
        spec.trace_scale.clone() * trace(&spec.matrices[i].matmul(&spec.matrices[j]).expect("square"))
    });
    spec.killing_inverse = spec.killing.inverse()?;
    spec.h = spec.bracket(&spec.x_vec(), &spec.y_vec())?;

    let sig_cols: Vec<Vec<Qi>> = (0..n)
        .map(|j| {
            let m = spec.matrices[j].conj_transpose().map(|v| -v.clone());
            spec.coords(&m)
        })
        .collect::<Result<_>>()?;
    spec.sigma = Matrix::from_fn(n, n, |i, j| sig_cols[j][i].clone());

    // g_w = exp(X) exp(-Y) exp(X); X and Y square to zero here.
    let id = Matrix::<Qi>::identity(k);
    let ex = lin(&[(1, &id), (1, &spec.matrices[xi])]);
    let emy = lin(&[(1, &id), (-1, &spec.matrices[yi])]);
    if !spec.matrices[xi].matmul(&spec.matrices[xi])?.is_zero() {
        return Err(Error::Inconsistent("highest root vector is not square-zero".into()));
    }
    let g = ex.matmul(&emy)?.matmul(&ex)?;
    let ginv = g.inverse()?;
    let th_cols: Vec<Vec<Qi>> = (0..n)
        .map(|j| spec.coords(&g.matmul(&spec.matrices[j])?.matmul(&ginv)?))
        .collect::<Result<_>>()?;
    spec.theta = Matrix::from_fn(n, n, |i, j| th_cols[j][i].clone());
    spec.weyl_element = g;
    Ok(spec)
}

/// Build from a name like `sl3`.
pub fn build_named(name: &str) -> Result<AlgebraSpec> {
    let (f, s) = parse_algebra(name)?;
    build_algebra(f, s)
}

/// Linear isomorphism `sl(4) -> so(6)` through the action on the exterior
/// square of `C^4`, with a unitary change of basis so that it intertwines
/// the compact-form involutions. Column `j` holds the so(6) coordinates of
/// the image of the `j`-th sl(4) basis element.
pub fn sl4_to_so6(sl4: &AlgebraSpec, so6: &AlgebraSpec) -> Result<Matrix<Qi>> {
    if sl4.name() != "sl4" || so6.name() != "so6" {
        return Err(Error::Config("coincidence map needs sl4 and so6".into()));
    }
    let pairs: [(usize, usize); 6] = [(0, 1), (2, 3), (0, 2), (1, 3), (0, 3), (1, 2)];
    let signs = [1i64, -1, 1];
    let idx = |a: usize, b: usize| -> (usize, i64) {
        let (lo, hi, s) = if a < b { (a, b, 1) } else { (b, a, -1) };
        (pairs.iter().position(|&p| p == (lo, hi)).expect("pair"), s)
    };
    // Action of A on e_a ^ e_b.
    let wedge = |a: &Matrix<Qi>| -> Matrix<Qi> {
        let mut w = Matrix::<Qi>::zeros(6, 6);
        for (col, &(p, q)) in pairs.iter().enumerate() {
            for r in 0..4 {
                for (src, other, first) in [(p, q, true), (q, p, false)] {
                    let c = a[(r, src)].clone();
                    if c.is_zero() || r == other {
                        continue;
                    }
                    let (row, s) = if first { idx(r, other) } else { idx(other, r) };
                    let v = w[(row, col)].clone() + c * qi(s, 1);
                    w[(row, col)] = v;
                }
            }
        }
        w
    };
    // Columns f1 = a u + s conj(a) v, f2 = a i u - s a v per pair (u, v).
    let a = qi(1, 2) + qi_i() * qi(1, 2);
    let abar = Scalar::conj(&a);
    let mut p = Matrix::zeros(6, 6);
    for (t, &s) in signs.iter().enumerate() {
        let (u, v) = (2 * t, 2 * t + 1);
        let sq = qi(s, 1);
        p[(u, u)] = a.clone();
        p[(v, u)] = sq.clone() * abar.clone();
        p[(u, v)] = a.clone() * qi_i();
        p[(v, v)] = -(sq * a.clone());
    }
    let pinv = p.conj_transpose();
    let cols: Vec<Vec<Qi>> = sl4
        .matrices
        .iter()
        .map(|m| so6.coords(&pinv.matmul(&wedge(m))?.matmul(&p)?))
        .collect::<Result<_>>()?;
    Ok(Matrix::from_fn(15, 15, |i, j| cols[j][i].clone()))
}

fn first_failure(mut f: impl FnMut() -> Result<Option<serde_json::Value>>) -> (bool, Option<serde_json::Value>) {
    match f() {
        Ok(None) => (true, None),
        Ok(Some(w)) => (false, Some(w)),
        Err(e) => (false, Some(serde_json::json!({ "error": e.to_string() }))),
    }
}

/// Structure checks on the generated algebra: Jacobi, invariance of `kappa`,
/// the involutions, the sl2-triple and the orbit dimension.
pub fn verify_structure(g: &AlgebraSpec, report: &mut crate::report::Report) {
    use serde_json::json;
    use std::time::Instant;
    const SUITE: &str = "lie";
    let name = g.name();
    let n = g.dim();
    let e: Vec<Vec<Qi>> = (0..n).map(|i| g.basis_vector(i)).collect();
    let is_zero = |v: &[Qi]| v.iter().all(Zero::is_zero);
    let neg = |v: &[Qi]| v.iter().map(|c| -c.clone()).collect::<Vec<_>>();

    let t = Instant::now();
    let (ok, w) = first_failure(|| {
        for i in 0..n {
            for j in i + 1..n {
                let eij = g.bracket(&e[i], &e[j])?;
                for k in j + 1..n {
                    let a = g.bracket(&e[i], &g.bracket(&e[j], &e[k])?)?;
                    let b = g.bracket(&e[j], &g.bracket(&e[k], &e[i])?)?;
                    let c = g.bracket(&e[k], &eij)?;
                    if !a.iter().zip(&b).zip(&c).all(|((a, b), c)| (a.clone() + b.clone() + c.clone()).is_zero()) {
                        return Ok(Some(json!({ "i": i, "j": j, "k": k })));
                    }
                }
            }
        }
        Ok(None)
    });
    report.check(SUITE, format!("{name}: Jacobi identity"), "[a,[b,c]] + cyclic = 0", ok, w, t);

    let t = Instant::now();
    let (ok, w) = first_failure(|| {
        for i in 0..n {
            for j in 0..n {
                if g.killing(&e[i], &e[j])? != g.killing(&e[j], &e[i])? {
                    return Ok(Some(json!({ "symmetric": false, "i": i, "j": j })));
                }
                for k in 0..n {
                    let inv = g.killing(&g.bracket(&e[k], &e[i])?, &e[j])? + g.killing(&e[i], &g.bracket(&e[k], &e[j])?)?;
                    if !inv.is_zero() {
                        return Ok(Some(json!({ "i": i, "j": j, "k": k })));
                    }
                }
            }
        }
        Ok(None)
    });
    report.check(SUITE, format!("{name}: kappa symmetric and invariant"), "kappa([z,x],y) + kappa(x,[z,y]) = 0", ok, w, t);

    let t = Instant::now();
    let (ok, w) = first_failure(|| {
        for i in 0..n {
            let si = g.sigma(&e[i])?;
            if g.sigma(&si)? != e[i] {
                return Ok(Some(json!({ "involution": i })));
            }
            for j in 0..n {
                let eij = g.bracket(&e[i], &e[j])?;
                let sj = g.sigma(&e[j])?;
                if g.sigma(&eij)? != g.bracket(&si, &sj)? {
                    return Ok(Some(json!({ "sigma_bracket": [i, j] })));
                }
                if g.theta(&eij)? != g.bracket(&g.theta(&e[i])?, &g.theta(&e[j])?)? {
                    return Ok(Some(json!({ "theta_bracket": [i, j] })));
                }
                if g.killing(&si, &sj)? != Scalar::conj(&g.killing(&e[i], &e[j])?) {
                    return Ok(Some(json!({ "sigma_kappa": [i, j] })));
                }
            }
        }
        Ok(None)
    });
    report.check(SUITE, format!("{name}: sigma involutive, sigma and theta automorphisms"), "sigma antilinear, kappa(sigma x, sigma y) = conj kappa(x, y)", ok, w, t);

    let t = Instant::now();
    let (ok, w) = first_failure(|| {
        let (x, h, y) = (g.x_vec(), g.h_vec(), g.y_vec());
        let two = |v: &[Qi]| v.iter().map(|c| c.clone() * qi(2, 1)).collect::<Vec<_>>();
        let checks = [
            ("[X,Y] = h", g.bracket(&x, &y)? == h),
            ("[h,X] = 2X", g.bracket(&h, &x)? == two(&x)),
            ("[h,Y] = -2Y", g.bracket(&h, &y)? == neg(&two(&y))),
            ("kappa(X,Y) = 1/2", g.killing(&x, &y)? == qi(1, 2)),
            ("sigma(Y) = -X", g.sigma(&y)? == neg(&x)),
            ("[X,X] = 0", is_zero(&g.bracket(&x, &x)?)),
        ];
        Ok(checks.iter().find(|c| !c.1).map(|c| json!({ "failed": c.0 })))
    });
    report.check(SUITE, format!("{name}: sl2-triple through the highest root"), "(X, h, Y) with kappa(X, Y) = 1/2 and sigma(Y) = -X", ok, w, t);

    let t = Instant::now();
    let (ok, w) = first_failure(|| {
        let rank = g.ad(&g.x_vec())?.rank();
        let expect = g.m.clone() * rat(2, 1) + rat(2, 1);
        Ok((rat(rank as i64, 1) != expect).then(|| json!({ "rank_ad_X": rank, "2m+2": expect.to_string() })))
    });
    report.check(SUITE, format!("{name}: dim O_min = 2m + 2"), "m from the orbit dimension", ok, w, t);
    report.info(
        SUITE,
        format!("{name}: parameters"),
        "m, epsilon, dim g",
        json!({ "dim": n, "m": g.m.to_string(), "epsilon": g.epsilon.to_string() }),
    );

    if name == "sl4" || name == "so6" {
        let t = Instant::now();
        let (ok, w) = first_failure(|| {
            let (sl4, so6) = if name == "sl4" {
                (g.clone(), build_named("so6")?)
            } else {
                (build_named("sl4")?, g.clone())
            };
            let phi = sl4_to_so6(&sl4, &so6)?;
            if phi.rank() != 15 {
                return Ok(Some(json!({ "rank": phi.rank() })));
            }
            let map = |v: &[Qi]| phi.mul_vec(v);
            for i in 0..15 {
                let ei = sl4.basis_vector(i);
                if map(&sl4.sigma(&ei)?)? != so6.sigma(&map(&ei)?)? {
                    return Ok(Some(json!({ "sigma": i })));
                }
                for j in 0..15 {
                    let ej = sl4.basis_vector(j);
                    if map(&sl4.bracket(&ei, &ej)?)? != so6.bracket(&map(&ei)?, &map(&ej)?)?
                        || sl4.killing(&ei, &ej)? != so6.killing(&map(&ei)?, &map(&ej)?)?
                    {
                        return Ok(Some(json!({ "i": i, "j": j })));
                    }
                }
            }
            Ok(None)
        });
        report.check(SUITE, "sl4 -> so6 isomorphism", "bracket, kappa and sigma preserved", ok, w, t);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all() -> Vec<AlgebraSpec> {
        SUPPORTED.iter().map(|n| build_named(n).unwrap()).collect()
    }

    #[test]
    fn structure_reports_pass() {
        for name in ["sl3", "sp4", "sl4"] {
            let mut r = crate::report::Report::default();
            verify_structure(&build_named(name).unwrap(), &mut r);
            assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
            assert!(r.summary().pass >= 5);
        }
    }

    #[test]
    fn dimensions_and_m() {
        let expect = [("sl3", 8, 1), ("sl4", 15, 2), ("so6", 15, 2), ("so7", 21, 3), ("so8", 28, 4), ("sp2", 3, 0), ("sp4", 10, 1)];
        for (name, n, m) in expect {
            let g = build_named(name).unwrap();
            assert_eq!(g.dim(), n, "{name}");
            assert_eq!(g.m, rat(m, 1), "{name}");
        }
        assert_eq!(build_named("sp2").unwrap().epsilon, rat(-1, 2));
        assert_eq!(build_named("so7").unwrap().epsilon, rat(1, 1));
    }

    #[test]
    fn orbit_dimension_is_2m_plus_2() {
        for g in all() {
            let rank = g.ad(&g.x_vec()).unwrap().rank();
            assert_eq!(rat(rank as i64, 1), g.m.clone() * rat(2, 1) + rat(2, 1), "{:?}", g);
        }
    }

    #[test]
    fn rejects_unsupported() {
        assert!(build_algebra(Family::Sl, 2).is_err());
        assert!(build_algebra(Family::So, 5).is_err());
        assert!(build_algebra(Family::Sp, 3).is_err());
        assert!(parse_algebra("gl3").is_err());
    }

    #[test]
    fn triple_and_normalizations() {
        for g in all() {
            let (x, h, y) = (g.x_vec(), g.h_vec(), g.y_vec());
            assert_eq!(g.bracket(&x, &y).unwrap(), h);
            let two = |v: &[Qi]| v.iter().map(|c| c.clone() * qi(2, 1)).collect::<Vec<_>>();
            let neg = |v: &[Qi]| v.iter().map(|c| -c.clone()).collect::<Vec<_>>();
            assert_eq!(g.bracket(&h, &x).unwrap(), two(&x));
            assert_eq!(g.bracket(&h, &y).unwrap(), neg(&two(&y)));
            assert_eq!(g.killing(&x, &y).unwrap(), qi(1, 2));
            assert_eq!(g.sigma(&y).unwrap(), neg(&x));
            assert_eq!(g.theta(&x).unwrap(), neg(&y));
            assert_eq!(g.theta(&y).unwrap(), neg(&x));
            assert_eq!(g.theta(&h).unwrap(), neg(&h));
            for v in [&x, &h, &y] {
                assert_eq!(&g.theta(&g.theta(v).unwrap()).unwrap(), v);
            }
        }
    }

    #[test]
    fn jacobi_invariance_and_involutions() {
        for g in all() {
            let n = g.dim();
            let e: Vec<Vec<Qi>> = (0..n).map(|i| g.basis_vector(i)).collect();
            for i in 0..n {
                for j in 0..n {
                    let eij = g.bracket(&e[i], &e[j]).unwrap();
                    assert_eq!(g.killing(&e[i], &e[j]).unwrap(), g.killing(&e[j], &e[i]).unwrap());
                    assert_eq!(g.sigma(&g.sigma(&e[i]).unwrap()).unwrap(), e[i]);
                    let s = g.bracket(&g.sigma(&e[i]).unwrap(), &g.sigma(&e[j]).unwrap()).unwrap();
                    assert_eq!(g.sigma(&eij).unwrap(), s);
                    let t = g.bracket(&g.theta(&e[i]).unwrap(), &g.theta(&e[j]).unwrap()).unwrap();
                    assert_eq!(g.theta(&eij).unwrap(), t);
                    for k in 0..n {
                        let a = g.bracket(&e[i], &g.bracket(&e[j], &e[k]).unwrap()).unwrap();
                        let b = g.bracket(&e[j], &g.bracket(&e[k], &e[i]).unwrap()).unwrap();
                        let c = g.bracket(&e[k], &eij).unwrap();
                        assert!(a.iter().zip(&b).zip(&c).all(|((a, b), c)| (a.clone() + b.clone() + c.clone()).is_zero()));
                        let inv = g.killing(&g.bracket(&e[k], &e[i]).unwrap(), &e[j]).unwrap()
                            + g.killing(&e[i], &g.bracket(&e[k], &e[j]).unwrap()).unwrap();
                        assert!(inv.is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn basis_elements_are_weight_vectors() {
        for g in all() {
            let n = g.dim();
            for i in 0..n {
                for j in 0..n {
                    let b = g.bracket(&g.basis_vector(i), &g.basis_vector(j)).unwrap();
                    if b.iter().all(Zero::is_zero) {
                        continue;
                    }
                    let w: Vec<i64> = g.weights[i].iter().zip(&g.weights[j]).map(|(a, b)| a + b).collect();
                    assert_eq!(g.weight_of(&b), Some(w));
                }
            }
        }
    }

    #[test]
    fn weyl_dimensions() {
        let sl3 = build_named("sl3").unwrap();
        let dims: Vec<BigInt> = (0..4).map(|d| sl3.weyl_dim_cartan_power(d)).collect();
        assert_eq!(dims, [1, 8, 27, 64].map(BigInt::from));
        for g in all() {
            assert_eq!(g.weyl_dim_cartan_power(1), BigInt::from(g.dim()));
        }
        let sp2 = build_named("sp2").unwrap();
        assert_eq!(sp2.weyl_dim_cartan_power(5), BigInt::from(11));
        let sp4 = build_named("sp4").unwrap();
        assert_eq!(sp4.weyl_dim_cartan_power(2), BigInt::from(35));
        let sl4 = build_named("sl4").unwrap();
        let so6 = build_named("so6").unwrap();
        for d in 0..5 {
            assert_eq!(sl4.weyl_dim_cartan_power(d), so6.weyl_dim_cartan_power(d));
        }
    }

    #[test]
    fn coincidence_map_is_an_isomorphism() {
        let sl4 = build_named("sl4").unwrap();
        let so6 = build_named("so6").unwrap();
        let phi = sl4_to_so6(&sl4, &so6).unwrap();
        assert_eq!(phi.rank(), 15);
        let map = |v: &[Qi]| phi.mul_vec(v).unwrap();
        for i in 0..15 {
            let ei = sl4.basis_vector(i);
            for j in 0..15 {
                let ej = sl4.basis_vector(j);
                let lhs = map(&sl4.bracket(&ei, &ej).unwrap());
                assert_eq!(lhs, so6.bracket(&map(&ei), &map(&ej)).unwrap());
                assert_eq!(sl4.killing(&ei, &ej).unwrap(), so6.killing(&map(&ei), &map(&ej)).unwrap());
            }
            assert_eq!(map(&sl4.sigma(&ei).unwrap()), so6.sigma(&map(&ei)).unwrap());
        }
    }
}

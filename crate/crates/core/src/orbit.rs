//! The coordinate ring of the minimal nilpotent orbit.
//!
//! `R^d` is realized as the image of degree-`d` polynomials in the momentum
//! coordinates under evaluation at exact orbit points. The evaluation rank is
//! certified against the Weyl dimension of the Cartan power, so the kernel of
//! evaluation is exactly the degree-`d` part of the orbit ideal.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lie::AlgebraSpec;
use crate::linalg::{Matrix, SparseMatrix};
use crate::modular::{gaussian_primes, rref_multimodular, ModMatrix};
use crate::poly::{monomials_of_degree, Monomial, Polynomial};
use crate::scalar::{qi, qi_from_rational, Qi};

/// A point of the orbit, as coordinates of an element of `g`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitPoint {
    pub coords: Vec<Qi>,
}

impl OrbitPoint {
    /// Values `mu_{e_i}(z) = kappa(e_i, z)` of the momentum coordinates.
    pub fn mu_values(&self, spec: &AlgebraSpec) -> Vec<Qi> {
        spec.killing.mul_vec(&self.coords).expect("point has algebra dimension")
    }
}

fn mat_exp_nilpotent(m: &Matrix<Qi>) -> Result<Matrix<Qi>> {
    let k = m.rows();
    let mut out = Matrix::identity(k);
    let mut term = Matrix::identity(k);
    for n in 1..=k {
        term = term.matmul(m)?.map(|v| v.clone() * qi(1, n as i64));
        if term.is_zero() {
            return Ok(out);
        }
        out = Matrix::from_fn(k, k, |i, j| out[(i, j)].clone() + term[(i, j)].clone());
    }
    if term.is_zero() {
        Ok(out)
    } else {
        Err(Error::Sampling("exponential of a non-nilpotent matrix".into()))
    }
}

/// `Ad(exp(c_1 e_{i_1}) ... exp(c_k e_{i_k})) X` for a word of root vectors.
pub fn orbit_point(spec: &AlgebraSpec, word: &[(usize, i64)]) -> Result<OrbitPoint> {
    let mut a = spec.matrices[spec.x].clone();
    for &(i, c) in word.iter().rev() {
        let e = spec.matrices[i].map(|v| v.clone() * qi(c, 1));
        let g = mat_exp_nilpotent(&e)?;
        let ginv = mat_exp_nilpotent(&e.map(|v| -v.clone()))?;
        a = g.matmul(&a)?.matmul(&ginv)?;
    }
    Ok(OrbitPoint {
        coords: spec.coords(&a)?,
    })
}

/// Scale so that all momentum values are Gaussian integers.
fn integralize(spec: &AlgebraSpec, p: OrbitPoint) -> OrbitPoint {
    let mu = p.mu_values(spec);
    let l = mu.iter().fold(BigInt::one(), |acc, z| {
        acc.lcm(z.re.denom()).lcm(z.im.denom())
    });
    let s = qi_from_rational(num_rational::BigRational::from_integer(l));
    OrbitPoint {
        coords: p.coords.into_iter().map(|c| c * s.clone()).collect(),
    }
}

/// Deterministic pseudo-random orbit points `Ad(n) X` with `n` in the
/// unipotent group of the negative roots. The sequence for a seed is prefix
/// stable: asking for more points never changes the earlier ones.
pub fn sample_orbit(spec: &AlgebraSpec, count: usize, seed: u64) -> Result<Vec<OrbitPoint>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let negs: Vec<usize> = (0..spec.dim()).filter(|&i| spec.is_negative_root(i)).collect();
    let mut out: Vec<OrbitPoint> = Vec::with_capacity(count);
    // Widen the coefficient box when there are few negative roots.
    let mut radius = 2i64;
    while ((2 * radius + 1) as f64).powi(negs.len() as i32) < 4.0 * count as f64 {
        radius += 1;
    }
    let mut failures = 0;
    while out.len() < count {
        let k = spec.size;
        let mut m = Matrix::<Qi>::zeros(k, k);
        for &i in &negs {
            let c: i64 = rng.gen_range(-radius..=radius);
            if c != 0 {
                m = Matrix::from_fn(k, k, |r, s| {
                    m[(r, s)].clone() + spec.matrices[i][(r, s)].clone() * qi(c, 1)
                });
            }
        }
        let g = mat_exp_nilpotent(&m)?;
        let ginv = mat_exp_nilpotent(&m.map(|v| -v.clone()))?;
        let a = g.matmul(&spec.matrices[spec.x])?.matmul(&ginv)?;
        let p = integralize(spec, OrbitPoint { coords: spec.coords(&a)? });
        if out.contains(&p) {
            failures += 1;
            if failures > 64 + 4 * count {
                return Err(Error::Sampling(format!(
                    "could not draw {count} distinct orbit points"
                )));
            }
            continue;
        }
        out.push(p);
    }
    Ok(out)
}

/// The degree-`d` component with its monomial basis and normal-form table.
#[derive(Clone, Debug)]
pub struct RingBasis {
    pub degree: usize,
    pub nvars: usize,
    /// All monomials of degree `d`, ascending.
    pub monomials: Vec<Monomial>,
    /// Positions in `monomials` of the standard monomials `B_d`.
    pub standard: Vec<usize>,
    /// Normal form of every monomial as sparse coordinates in `B_d`.
    pub nf: Vec<Vec<(usize, Qi)>>,
    /// Weight of each standard monomial.
    pub weights: Vec<Vec<i64>>,
    /// Number of sample points used.
    pub samples: usize,
    index: HashMap<Monomial, usize>,
}

impl RingBasis {
    pub fn dim(&self) -> usize {
        self.standard.len()
    }

    pub fn basis_monomial(&self, k: usize) -> &Monomial {
        &self.monomials[self.standard[k]]
    }

    pub fn monomial_index(&self, m: &Monomial) -> Option<usize> {
        self.index.get(m).copied()
    }

    /// Coordinates of a single monomial.
    pub fn nf_monomial(&self, m: &Monomial) -> &[(usize, Qi)] {
        &self.nf[self.index[m]]
    }

    /// Assemble from a standard set and normal-form table (e.g. from cache).
    pub fn from_parts(
        spec: &AlgebraSpec,
        degree: usize,
        standard: Vec<usize>,
        nf: Vec<Vec<(usize, Qi)>>,
        samples: usize,
    ) -> Result<Self> {
        let nvars = spec.dim();
        let monomials = monomials_of_degree(nvars, degree);
        if nf.len() != monomials.len() || standard.iter().any(|&s| s >= monomials.len()) {
            return Err(Error::Dimension(format!("inconsistent ring basis data at degree {degree}")));
        }
        let index = monomials.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let weights = standard
            .iter()
            .map(|&s| monomial_weight(spec, &monomials[s]))
            .collect();
        Ok(RingBasis {
            degree,
            nvars,
            monomials,
            standard,
            nf,
            weights,
            samples,
            index,
        })
    }
}

pub fn monomial_weight(spec: &AlgebraSpec, m: &Monomial) -> Vec<i64> {
    let mut w = vec![0i64; spec.root_kind.coords()];
    for (i, &e) in m.exponents().iter().enumerate() {
        for (a, b) in w.iter_mut().zip(&spec.weights[i]) {
            *a += e as i64 * b;
        }
    }
    w
}

/// Build `R^d` from the given samples.
///
/// Fails with [`Error::RankDeficient`] if the evaluation rank differs from
/// the Weyl dimension; callers may retry with more samples.
pub fn build_ring_basis(
    spec: &AlgebraSpec,
    d: usize,
    samples: &[OrbitPoint],
    seed: u64,
) -> Result<RingBasis> {
    let n = spec.dim();
    let target = spec
        .weyl_dim_cartan_power(d)
        .to_usize()
        .ok_or_else(|| Error::Config("ring component too large".into()))?;
    let monomials = monomials_of_degree(n, d);
    let mcount = monomials.len();
    if d == 0 {
        return RingBasis::from_parts(spec, 0, vec![0], vec![vec![(0, qi(1, 1))]], samples.len());
    }
    if samples.len() < target {
        return Err(Error::Sampling(format!(
            "{} samples cannot reach dimension {target}",
            samples.len()
        )));
    }
    let mus: Vec<Vec<Qi>> = samples.iter().map(|p| p.mu_values(spec)).collect();

    // Rank, standard monomials and an independent set of rows, modulo a prime.
    let gp = gaussian_primes(1, seed ^ 0x5eed)[0];
    let reduced: Vec<Vec<u64>> = mus
        .iter()
        .map(|mu| mu.iter().map(|z| gp.reduce(z).expect("integral values")).collect())
        .collect();
    let mut e = ModMatrix::zeros(gp.p, samples.len(), mcount);
    for (r, mu) in reduced.iter().enumerate() {
        for (c, m) in monomials.iter().enumerate() {
            let mut v = 1u64;
            for (i, &k) in m.exponents().iter().enumerate() {
                for _ in 0..k {
                    v = crate::modular::mul_mod(v, mu[i], gp.p);
                }
            }
            e.set(r, c, v);
        }
    }
    let mut full = e.clone();
    let standard = full.rref_in_place();
    if standard.len() != target {
        return Err(Error::RankDeficient(format!(
            "evaluation rank {} at degree {d}, expected {target}",
            standard.len()
        )));
    }
    let mut et = ModMatrix::zeros(gp.p, target, samples.len());
    for r in 0..samples.len() {
        for (k, &c) in standard.iter().enumerate() {
            et.set(k, r, e.get(r, c));
        }
    }
    let rows = et.rref_in_place();

    let exact: Vec<Vec<Qi>> = rows
        .iter()
        .map(|&r| monomials.iter().map(|m| m.evaluate(&mus[r])).collect())
        .collect();
    let check = |piv: &[usize], cand: &[Vec<Qi>]| verify_relations(&exact, piv, cand);
    let (pivots, rref) = rref_multimodular(&exact, target, seed, check)?;
    if pivots != standard {
        return Err(Error::Inconsistent("standard monomials differ between primes".into()));
    }
    let mut nf = Vec::with_capacity(mcount);
    let mut pos = vec![usize::MAX; mcount];
    for (k, &c) in standard.iter().enumerate() {
        pos[c] = k;
    }
    for j in 0..mcount {
        if pos[j] != usize::MAX {
            nf.push(vec![(pos[j], qi(1, 1))]);
        } else {
            nf.push(
                (0..target)
                    .filter(|&k| !rref[k][j].is_zero())
                    .map(|k| (k, rref[k][j].clone()))
                    .collect(),
            );
        }
    }
    RingBasis::from_parts(spec, d, standard, nf, samples.len())
}

/// Exact check that every non-pivot column of `e` is the stated combination
/// of pivot columns. Gaussian-integer arithmetic after clearing denominators.
fn verify_relations(e: &[Vec<Qi>], pivots: &[usize], rref: &[Vec<Qi>]) -> bool {
    type G = (BigInt, BigInt);
    let to_g = |z: &Qi| -> Option<G> {
        (z.re.is_integer() && z.im.is_integer()).then(|| (z.re.to_integer(), z.im.to_integer()))
    };
    let Some(eg): Option<Vec<Vec<G>>> = e.iter().map(|r| r.iter().map(to_g).collect()).collect() else {
        return false;
    };
    let cols = e.first().map_or(0, Vec::len);
    for j in 0..cols {
        if pivots.contains(&j) {
            continue;
        }
        let den = rref.iter().fold(BigInt::one(), |acc, row| {
            acc.lcm(row[j].re.denom()).lcm(row[j].im.denom())
        });
        let coeffs: Vec<G> = rref
            .iter()
            .map(|row| {
                let z = &row[j];
                (
                    (&z.re * num_rational::BigRational::from_integer(den.clone())).to_integer(),
                    (&z.im * num_rational::BigRational::from_integer(den.clone())).to_integer(),
                )
            })
            .collect();
        for row in &eg {
            let (mut sr, mut si) = (BigInt::zero(), BigInt::zero());
            for (k, &pc) in pivots.iter().enumerate() {
                let (a, b) = &coeffs[k];
                if a.is_zero() && b.is_zero() {
                    continue;
                }
                let (c, d) = &row[pc];
                sr += a * c - b * d;
                si += a * d + b * c;
            }
            if sr != &den * &row[j].0 || si != &den * &row[j].1 {
                return false;
            }
        }
    }
    true
}

/// An element of a single graded piece `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct RingElement {
    pub degree: usize,
    pub coords: Vec<Qi>,
}

impl RingElement {
    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }
}

/// The graded ring up to a top degree, with its multiplication and
/// Hamiltonian operators.
#[derive(Clone, Debug)]
pub struct OrbitRing {
    pub spec: Arc<AlgebraSpec>,
    pub seed: u64,
    pub bases: Vec<RingBasis>,
    /// `mul_ops[d][i]`: multiplication by `mu_{e_i}`, `R^d -> R^{d+1}`.
    pub mul_ops: Vec<Vec<SparseMatrix<Qi>>>,
    /// `eta_ops[d][i]`: `{mu_{e_i}, .}` on `R^d`.
    pub eta_ops: Vec<Vec<SparseMatrix<Qi>>>,
}

/// Sample count for a target dimension with the given margin.
pub fn sample_count(target: usize, margin: f64) -> usize {
    ((target as f64) * margin.max(1.0)).ceil() as usize + 2
}

impl OrbitRing {
    /// Build all components up to degree `top`.
    pub fn build(spec: Arc<AlgebraSpec>, top: usize, seed: u64, margin: f64) -> Result<Self> {
        let bases = (0..=top)
            .map(|d| build_component(&spec, d, seed, margin))
            .collect::<Result<Vec<_>>>()?;
        Self::from_bases(spec, seed, bases)
    }

    /// Assemble from prebuilt components and derive the operators.
    pub fn from_bases(spec: Arc<AlgebraSpec>, seed: u64, bases: Vec<RingBasis>) -> Result<Self> {
        let n = spec.dim();
        let top = bases.len() - 1;
        let mut ring = OrbitRing {
            spec,
            seed,
            bases,
            mul_ops: Vec::new(),
            eta_ops: Vec::new(),
        };
        for d in 0..top {
            let ops = (0..n).map(|i| ring.build_mul_op(d, i)).collect();
            ring.mul_ops.push(ops);
        }
        for d in 0..=top {
            let ops = (0..n).map(|i| ring.build_eta_op(d, i)).collect();
            ring.eta_ops.push(ops);
        }
        Ok(ring)
    }

    pub fn top(&self) -> usize {
        self.bases.len() - 1
    }

    pub fn nvars(&self) -> usize {
        self.spec.dim()
    }

    pub fn dim(&self, d: usize) -> usize {
        self.bases[d].dim()
    }

    fn build_mul_op(&self, d: usize, i: usize) -> SparseMatrix<Qi> {
        let src = &self.bases[d];
        let dst = &self.bases[d + 1];
        let var = Monomial::var(self.nvars(), i);
        let cols = (0..src.dim())
            .map(|k| dst.nf_monomial(&src.basis_monomial(k).mul(&var)).to_vec())
            .collect();
        SparseMatrix::from_sparse_columns(dst.dim(), cols)
    }

    fn build_eta_op(&self, d: usize, i: usize) -> SparseMatrix<Qi> {
        let basis = &self.bases[d];
        let n = self.nvars();
        let cols = (0..basis.dim())
            .map(|k| {
                let m = basis.basis_monomial(k);
                let mut acc: Vec<Qi> = vec![Qi::zero(); basis.dim()];
                for j in 0..n {
                    let Some((e, rest)) = m.div_var(j) else {
                        continue;
                    };
                    for (l, c) in &self.spec.structure[i][j] {
                        let mono = rest.mul(&Monomial::var(n, *l));
                        let f = c.clone() * qi(e as i64, 1);
                        for (t, v) in basis.nf_monomial(&mono) {
                            acc[*t] = acc[*t].clone() + f.clone() * v.clone();
                        }
                    }
                }
                acc.into_iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .collect()
            })
            .collect();
        SparseMatrix::from_sparse_columns(basis.dim(), cols)
    }

    fn check_degree(&self, d: usize) -> Result<()> {
        if d > self.top() {
            Err(Error::DegreeOverflow { degree: d, cap: self.top() })
        } else {
            Ok(())
        }
    }

    /// Normal form of a homogeneous polynomial.
    pub fn normal_form(&self, f: &Polynomial<Qi>) -> Result<RingElement> {
        if f.nvars() != self.nvars() {
            return Err(Error::Dimension("polynomial in the wrong number of variables".into()));
        }
        let d = match f.degree() {
            None => 0,
            Some(d) => d,
        };
        if !f.is_homogeneous() {
            return Err(Error::Dimension("normal form of a non-homogeneous polynomial".into()));
        }
        self.normal_form_in_degree(f, d)
    }

    /// Normal form of a polynomial known to be homogeneous of degree `d`
    /// (the zero polynomial is accepted in every degree).
    pub fn normal_form_in_degree(&self, f: &Polynomial<Qi>, d: usize) -> Result<RingElement> {
        self.check_degree(d)?;
        let basis = &self.bases[d];
        let mut coords = vec![Qi::zero(); basis.dim()];
        for (m, c) in f.terms() {
            if m.degree() != d {
                return Err(Error::Dimension(format!("term of degree {} in degree {d}", m.degree())));
            }
            for (k, v) in basis.nf_monomial(m) {
                coords[*k] = coords[*k].clone() + c.clone() * v.clone();
            }
        }
        Ok(RingElement { degree: d, coords })
    }

    pub fn ideal_member(&self, f: &Polynomial<Qi>) -> Result<bool> {
        Ok(self.normal_form(f)?.is_zero())
    }

    /// The standard-monomial representative.
    pub fn lift(&self, a: &RingElement) -> Polynomial<Qi> {
        let basis = &self.bases[a.degree];
        let mut p = Polynomial::zero(self.nvars());
        for (k, c) in a.coords.iter().enumerate() {
            if !c.is_zero() {
                p.add_term(basis.basis_monomial(k).clone(), c.clone());
            }
        }
        p
    }

    pub fn element(&self, d: usize, coords: Vec<Qi>) -> RingElement {
        assert_eq!(coords.len(), self.dim(d));
        RingElement { degree: d, coords }
    }

    pub fn one(&self) -> RingElement {
        self.element(0, vec![qi(1, 1)])
    }

    /// Class of `mu_x` for a coefficient vector `x`.
    pub fn mu(&self, x: &[Qi]) -> Result<RingElement> {
        self.normal_form_in_degree(&Polynomial::linear(x), 1)
    }

    pub fn mu_x(&self) -> RingElement {
        self.mu(&self.spec.x_vec()).expect("degree one exists")
    }

    pub fn mu_y(&self) -> RingElement {
        self.mu(&self.spec.y_vec()).expect("degree one exists")
    }

    pub fn mu_h(&self) -> RingElement {
        self.mu(&self.spec.h_vec()).expect("degree one exists")
    }

    pub fn ring_mul(&self, a: &RingElement, b: &RingElement) -> Result<RingElement> {
        let d = a.degree + b.degree;
        self.check_degree(d)?;
        self.normal_form_in_degree(&self.lift(a).mul(&self.lift(b)), d)
    }

    pub fn pow(&self, a: &RingElement, e: usize) -> Result<RingElement> {
        let mut acc = self.one();
        for _ in 0..e {
            acc = self.ring_mul(&acc, a)?;
        }
        Ok(acc)
    }

    pub fn ring_poisson(&self, a: &RingElement, b: &RingElement) -> Result<RingElement> {
        let d = (a.degree + b.degree).saturating_sub(1);
        self.check_degree(d)?;
        let p = self.lift(a).poisson(&self.lift(b), &self.spec.bivector());
        self.normal_form_in_degree(&p, d)
    }

    /// `mu_x * a` via the multiplication operators.
    pub fn mul_mu(&self, x: &[Qi], a: &RingElement) -> Result<RingElement> {
        self.check_degree(a.degree + 1)?;
        Ok(RingElement {
            degree: a.degree + 1,
            coords: combine(&self.mul_ops[a.degree], x, &a.coords),
        })
    }

    /// `eta^x a = {mu_x, a}`.
    pub fn eta_apply(&self, x: &[Qi], a: &RingElement) -> RingElement {
        RingElement {
            degree: a.degree,
            coords: combine(&self.eta_ops[a.degree], x, &a.coords),
        }
    }

    /// Operator `sum_i x_i ops[i]`.
    pub fn op_combination(ops: &[SparseMatrix<Qi>], x: &[Qi]) -> SparseMatrix<Qi> {
        let mut acc: Option<SparseMatrix<Qi>> = None;
        for (op, c) in ops.iter().zip(x) {
            if c.is_zero() {
                continue;
            }
            acc = Some(match acc {
                None => op.scale(c),
                Some(a) => a.lin_comb(&qi(1, 1), op, c),
            });
        }
        acc.unwrap_or_else(|| SparseMatrix::zeros(ops[0].rows(), ops[0].cols()))
    }

    /// Evaluate a ring element at an orbit point.
    pub fn evaluate(&self, a: &RingElement, p: &OrbitPoint) -> Qi {
        let mu = p.mu_values(&self.spec);
        let basis = &self.bases[a.degree];
        a.coords
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .fold(Qi::zero(), |s, (k, c)| s + c.clone() * basis.basis_monomial(k).evaluate(&mu))
    }

    /// The invariant quadratic `sum_i mu_{x_i} mu_{x^i}`.
    pub fn casimir_polynomial(&self) -> Polynomial<Qi> {
        let n = self.nvars();
        let mut p = Polynomial::zero(n);
        for (i, j, w) in self.spec.dual_basis_pairs() {
            p.add_term(Monomial::from_indices(n, &[i, j]), w);
        }
        p
    }
}

fn combine(ops: &[SparseMatrix<Qi>], x: &[Qi], v: &[Qi]) -> Vec<Qi> {
    let mut out = vec![Qi::zero(); ops[0].rows()];
    for (op, c) in ops.iter().zip(x) {
        if c.is_zero() {
            continue;
        }
        for (o, val) in out.iter_mut().zip(op.apply(v)) {
            *o = o.clone() + c.clone() * val;
        }
    }
    out
}

/// Build one component, adding samples until the Weyl dimension is reached.
pub fn build_component(spec: &AlgebraSpec, d: usize, seed: u64, margin: f64) -> Result<RingBasis> {
    let target = spec.weyl_dim_cartan_power(d).to_usize().unwrap_or(usize::MAX);
    let mut count = sample_count(target, margin);
    let mut last = None;
    for _ in 0..4 {
        let samples = sample_orbit(spec, count, seed)?;
        match build_ring_basis(spec, d, &samples, seed) {
            Ok(b) => return Ok(b),
            Err(e @ Error::RankDeficient(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
        count = count * 3 / 2 + 1;
    }
    Err(last.unwrap_or_else(|| Error::Sampling("no samples".into())))
}

fn small_random(ring: &OrbitRing, d: usize, rng: &mut impl Rng) -> RingElement {
    let coords = (0..ring.dim(d)).map(|_| qi(rng.gen_range(-3..=3), 1)).collect();
    ring.element(d, coords)
}

fn add_signed(a: &RingElement, b: &RingElement, sign: i64) -> RingElement {
    let s = qi(sign, 1);
    RingElement {
        degree: a.degree,
        coords: a.coords.iter().zip(&b.coords).map(|(x, y)| x.clone() + y.clone() * s.clone()).collect(),
    }
}

/// Ring-level checks: dimensions, the orbit relations, the quotient
/// multiplication and the Hamiltonian operators `eta^x`.
pub fn verify_ring(ring: &OrbitRing, seed: u64, report: &mut crate::report::Report) -> Result<()> {
    use serde_json::json;
    use std::time::Instant;
    const SUITE: &str = "lie";
    let spec = &ring.spec;
    let name = spec.name();
    let top = ring.top();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5a5a);

    let t = Instant::now();
    let dims: Vec<usize> = (0..=top).map(|d| ring.dim(d)).collect();
    let weyl: Vec<BigInt> = (0..=top).map(|d| spec.weyl_dim_cartan_power(d)).collect();
    let ok = dims.iter().zip(&weyl).all(|(a, b)| BigInt::from(*a) == *b);
    report.check(SUITE, format!("{name}: dim R^d equals the Weyl dimension, d <= {top}"), "R^d is the Cartan power of g", ok, Some(json!({ "evaluation": dims, "weyl": weyl.iter().map(|b| b.to_string()).collect::<Vec<_>>() })), t);

    let t = Instant::now();
    let cas = ring.casimir_polynomial();
    let points = sample_orbit(spec, 8, seed ^ 0x77)?;
    let bad_point = points.iter().position(|p| !cas.evaluate(&p.mu_values(spec)).is_zero());
    let ok = bad_point.is_none() && (top < 2 || ring.ideal_member(&cas)?);
    report.check(SUITE, format!("{name}: invariant quadratic vanishes on the orbit"), "sum_i mu_{x_i} mu_{x^i} lies in I", ok, Some(json!({ "sample": bad_point })), t);

    let t = Instant::now();
    let zero_power = (1..=top).find(|&d| ring.pow(&ring.mu_x(), d).map(|p| p.is_zero()).unwrap_or(true));
    report.check(SUITE, format!("{name}: mu_X^d nonzero in R"), "highest-weight lines are nonzero", zero_power.is_none(), Some(json!({ "degree": zero_power })), t);

    let t = Instant::now();
    let mut bad = None;
    'hom: for a in 1..top {
        for b in 1..=(top - a).min(a) {
            for _ in 0..3 {
                let (f, g) = (small_random(ring, a, &mut rng), small_random(ring, b, &mut rng));
                let (fl, gl) = (ring.lift(&f), ring.lift(&g));
                let lhs = ring.normal_form_in_degree(&fl.mul(&gl), a + b)?;
                let rhs = ring.ring_mul(&f, &g)?;
                let mut shifted = fl.clone();
                if a >= 2 {
                    let extra = Polynomial::var(ring.nvars(), rng.gen_range(0..ring.nvars())).pow(a - 2);
                    shifted.add_scaled(&cas.mul(&extra), &Qi::one());
                }
                let lift_free = ring.normal_form_in_degree(&shifted, a)? == f;
                if lhs != rhs || !lift_free {
                    bad = Some(json!({ "degrees": [a, b], "lift_free": lift_free }));
                    break 'hom;
                }
            }
        }
    }
    report.check(SUITE, format!("{name}: normal form is a ring homomorphism"), "nf(fg) = nf(f) nf(g), independent of lifts", bad.is_none(), bad, t);

    let t = Instant::now();
    let mut bad = None;
    let n = ring.nvars();
    'eta: for d in 1..top {
        for _ in 0..3 {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            let (x, y) = (spec.basis_vector(i), spec.basis_vector(j));
            let f = small_random(ring, d, &mut rng);
            let g = small_random(ring, 1, &mut rng);
            let lhs = ring.eta_apply(&x, &ring.ring_mul(&f, &g)?);
            let rhs = add_signed(&ring.ring_mul(&ring.eta_apply(&x, &f), &g)?, &ring.ring_mul(&f, &ring.eta_apply(&x, &g))?, 1);
            let comm = add_signed(&ring.eta_apply(&x, &ring.eta_apply(&y, &f)), &ring.eta_apply(&y, &ring.eta_apply(&x, &f)), -1);
            let xy = ring.eta_apply(&spec.bracket(&x, &y)?, &f);
            if lhs != rhs || comm != xy {
                bad = Some(json!({ "degree": d, "i": i, "j": j, "derivation": lhs == rhs }));
                break 'eta;
            }
        }
    }
    report.check(SUITE, format!("{name}: eta^x are derivations with [eta^x, eta^y] = eta^[x,y]"), "eta^x = {mu_x, .}", bad.is_none(), bad, t);

    let t = Instant::now();
    let (mx, my, mh) = (ring.mu_x(), ring.mu_y(), ring.mu_h());
    let mut bad = None;
    for s in 0..=top {
        for t_ in 0..=top - s {
            let f = ring.ring_mul(&ring.pow(&mx, s)?, &ring.pow(&my, t_)?)?;
            let c = qi(2 * (s as i64 - t_ as i64), 1);
            let expect: Vec<Qi> = f.coords.iter().map(|v| v.clone() * c.clone()).collect();
            if ring.eta_apply(&spec.h_vec(), &f).coords != expect {
                bad.get_or_insert(json!({ "eta_h": [s, t_] }));
            }
            // In the symplectic family mu_X mu_Y = -mu_h^2 / 4 on the orbit.
            if s >= 1 && t_ >= 1 && spec.family != crate::lie::Family::Sp {
                let g = ring.ring_mul(&ring.ring_mul(&ring.pow(&mx, s - 1)?, &ring.pow(&my, t_ - 1)?)?, &ring.pow(&mh, 2)?)?;
                let m = Matrix::from_fn(f.coords.len(), 2, |r, c| if c == 0 { f.coords[r].clone() } else { g.coords[r].clone() });
                if m.rank() != 2 {
                    bad.get_or_insert(json!({ "dependent": [s, t_] }));
                }
            }
        }
    }
    if top >= 3 {
        let s = 3usize;
        let y = spec.y_vec();
        let lhs = ring.eta_apply(&y, &ring.eta_apply(&y, &ring.pow(&mx, s)?));
        let a = ring.ring_mul(&ring.ring_mul(&mx, &my)?, &ring.pow(&mx, s - 2)?)?;
        let b = ring.ring_mul(&ring.pow(&mh, 2)?, &ring.pow(&mx, s - 2)?)?;
        let (ca, cb) = (qi(-2 * s as i64, 1), qi((s * (s - 1)) as i64, 1));
        let rhs: Vec<Qi> = a.coords.iter().zip(&b.coords).map(|(u, v)| u.clone() * ca.clone() + v.clone() * cb.clone()).collect();
        if lhs.coords != rhs {
            bad.get_or_insert(json!({ "eta_Y_squared": s }));
        }
    }
    report.check(
        SUITE,
        format!("{name}: weights and independence on mu_X^s mu_Y^t"),
        "eta^h = 2(s-t); mu_X^s mu_Y^t and mu_X^(s-1) mu_Y^(t-1) mu_h^2 independent; (eta^Y)^2 mu_X^3",
        bad.is_none(),
        bad,
        t,
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::build_named;

    fn ring(name: &str, top: usize) -> OrbitRing {
        OrbitRing::build(Arc::new(build_named(name).unwrap()), top, 11, 1.25).unwrap()
    }

    #[test]
    fn ring_reports_pass() {
        for (name, top) in [("sl3", 3), ("sp2", 4), ("so7", 2)] {
            let mut rep = crate::report::Report::default();
            verify_ring(&ring(name, top), 3, &mut rep).unwrap();
            assert!(rep.passed(), "{:?}", rep.failures().collect::<Vec<_>>());
        }
    }

    #[test]
    fn trivial_word_is_x() {
        let g = build_named("sl3").unwrap();
        assert_eq!(orbit_point(&g, &[]).unwrap().coords, g.x_vec());
    }

    #[test]
    fn sl3_samples_are_rank_one_square_zero() {
        let g = build_named("sl3").unwrap();
        for p in sample_orbit(&g, 10, 5).unwrap() {
            let m = g.matrix_of(&p.coords).unwrap();
            assert!(m.matmul(&m).unwrap().is_zero());
            assert_eq!(m.rank(), 1);
        }
    }

    #[test]
    fn dimensions_match_weyl_formula() {
        let r = ring("sl3", 3);
        assert_eq!((0..=3).map(|d| r.dim(d)).collect::<Vec<_>>(), [1, 8, 27, 64]);
        assert_eq!(r.bases[2].monomials.len(), 36);
        assert_eq!(ring("sp2", 4).dim(2), 5);
    }

    #[test]
    fn casimir_and_powers() {
        let r = ring("sl3", 3);
        assert!(r.ideal_member(&r.casimir_polynomial()).unwrap());
        let x = r.mu_x();
        for d in 1..=3 {
            assert!(!r.pow(&x, d).unwrap().is_zero());
        }
        for p in sample_orbit(&r.spec, 3, 99).unwrap() {
            assert!(r.casimir_polynomial().evaluate(&p.mu_values(&r.spec)).is_zero());
        }
    }

    #[test]
    fn eta_h_on_highest_lines() {
        let r = ring("sl3", 3);
        let (x, y) = (r.mu_x(), r.mu_y());
        for (s, t) in [(1, 1), (2, 1), (1, 2), (3, 0)] {
            let f = r.ring_mul(&r.pow(&x, s).unwrap(), &r.pow(&y, t).unwrap()).unwrap();
            let lhs = r.eta_apply(&r.spec.h_vec(), &f);
            let c = qi(2 * (s as i64 - t as i64), 1);
            assert_eq!(lhs.coords, f.coords.iter().map(|v| v.clone() * c.clone()).collect::<Vec<_>>());
        }
    }
}

//! The operators `Lambda^x : R^p -> R^{p-1}`.
//!
//! `Lambda^Y` is solved first as the lowest-weight vector of weight `-theta`
//! in `Hom(R^p, R^{p-1})`, normalized by `Lambda^Y(mu_X^p) = zeta_p mu_X^{p-1}`.
//! The other operators follow from `Lambda^{[u,x]} = [eta^u, Lambda^x]`. The
//! full equivariance nullspace is the fallback.

use std::collections::HashMap;
use std::time::Instant;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::constants::ConstantsContext;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, SparseMatrix};
use crate::modular::{gaussian_primes, SparseSystem};
use crate::orbit::{OrbitRing, RingElement};
use crate::poly::Monomial;
use crate::report::Report;
use crate::scalar::{qi, qi_from_rational, Qi};

const SUITE: &str = "lambda";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Propagation,
    Nullspace,
}

/// All `Lambda^{e_i}` on one degree.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaSlice {
    pub degree: usize,
    /// `ops[i]`: `R^degree -> R^{degree-1}`.
    pub ops: Vec<SparseMatrix<Qi>>,
    /// Scale between the normalized solution and the unnormalized one whose
    /// first nonzero entry is 1.
    pub multiplier: Qi,
    /// Dimension of the solution space before normalization.
    pub nullity: usize,
    pub strategy: Strategy,
}

/// `Lambda` on degrees `1..=cap`.
#[derive(Clone, Debug)]
pub struct LambdaFamily {
    pub slices: Vec<LambdaSlice>,
}

impl LambdaFamily {
    pub fn solve(ring: &OrbitRing, cap: usize, seed: u64) -> Result<Self> {
        let ctx = ConstantsContext::from_spec(&ring.spec);
        let slices = (1..=cap)
            .map(|p| solve_lambda(ring, &ctx, p, seed))
            .collect::<Result<Vec<_>>>()?;
        Ok(LambdaFamily { slices })
    }

    pub fn cap(&self) -> usize {
        self.slices.len()
    }

    /// `Lambda^{e_i}` on `R^p`, `p >= 1`.
    pub fn op(&self, i: usize, p: usize) -> Result<&SparseMatrix<Qi>> {
        if p == 0 || p > self.cap() {
            return Err(Error::DegreeOverflow { degree: p, cap: self.cap() });
        }
        Ok(&self.slices[p - 1].ops[i])
    }

    /// `Lambda^x(a)`; `None` for `a` of degree 0.
    pub fn apply(&self, x: &[Qi], a: &RingElement) -> Result<Option<RingElement>> {
        if a.degree == 0 {
            return Ok(None);
        }
        let ops = &self.slices.get(a.degree - 1).ok_or(Error::DegreeOverflow { degree: a.degree, cap: self.cap() })?.ops;
        let mut out = vec![Qi::zero(); ops[0].rows()];
        for (op, c) in ops.iter().zip(x) {
            if c.is_zero() {
                continue;
            }
            for (o, v) in out.iter_mut().zip(op.apply(&a.coords)) {
                *o = o.clone() + c.clone() * v;
            }
        }
        Ok(Some(RingElement { degree: a.degree - 1, coords: out }))
    }

    /// `Lambda^x` on `R^p` as one operator.
    pub fn combination(&self, x: &[Qi], p: usize) -> Result<SparseMatrix<Qi>> {
        self.op(0, p)?;
        Ok(OrbitRing::op_combination(&self.slices[p - 1].ops, x))
    }
}

fn weight_sum(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Unknown entries `(row, col)` of an operator `R^p -> R^{p-1}` shifting
/// weight by `shift`.
fn unknown_positions(ring: &OrbitRing, p: usize, shift: &[i64]) -> Vec<(usize, usize)> {
    let src = &ring.bases[p];
    let dst = &ring.bases[p - 1];
    let mut by_weight: HashMap<&[i64], Vec<usize>> = HashMap::new();
    for (r, w) in dst.weights.iter().enumerate() {
        by_weight.entry(w.as_slice()).or_default().push(r);
    }
    let mut out = Vec::new();
    for (c, w) in src.weights.iter().enumerate() {
        let target = weight_sum(w, shift);
        if let Some(rows) = by_weight.get(target.as_slice()) {
            out.extend(rows.iter().map(|&r| (r, c)));
        }
    }
    out
}

/// Rows of `eta_{p-1} L - L eta_p` (or with a right-hand operator) in the
/// entries of `L`, keyed by output position.
fn commutator_rows(
    positions: &[(usize, usize)],
    offset: usize,
    eta_low: &SparseMatrix<Qi>,
    eta_high: &SparseMatrix<Qi>,
    out: &mut HashMap<(usize, usize), Vec<(usize, Qi)>>,
) {
    // (eta_low L)[r', c] = sum_r eta_low[r', r] L[r, c]
    // (L eta_high)[r, c'] = sum_c L[r, c] eta_high[c, c']
    let eta_high_rows = transpose_sparse(eta_high);
    for (k, &(r, c)) in positions.iter().enumerate() {
        for (r2, v) in eta_low.column(r) {
            out.entry((*r2, c)).or_default().push((offset + k, v.clone()));
        }
        for (c2, v) in &eta_high_rows[c] {
            out.entry((r, *c2)).or_default().push((offset + k, -v.clone()));
        }
    }
}

/// Row lists of a sparse column matrix.
fn transpose_sparse(m: &SparseMatrix<Qi>) -> Vec<Vec<(usize, Qi)>> {
    let mut rows = vec![Vec::new(); m.rows()];
    for c in 0..m.cols() {
        for (r, v) in m.column(c) {
            rows[*r].push((c, v.clone()));
        }
    }
    rows
}

fn merge_row(mut row: Vec<(usize, Qi)>) -> Vec<(usize, Qi)> {
    row.sort_by_key(|e| e.0);
    let mut out: Vec<(usize, Qi)> = Vec::with_capacity(row.len());
    for (j, v) in row {
        match out.last_mut() {
            Some((lj, lv)) if *lj == j => *lv = lv.clone() + v,
            _ => out.push((j, v)),
        }
    }
    out.retain(|(_, v)| !v.is_zero());
    out
}

fn to_sparse(rows: usize, cols: usize, positions: &[(usize, usize)], values: &[Qi]) -> SparseMatrix<Qi> {
    let mut columns = vec![Vec::new(); cols];
    for (&(r, c), v) in positions.iter().zip(values) {
        if !v.is_zero() {
            columns[c].push((r, v.clone()));
        }
    }
    for col in &mut columns {
        col.sort_by_key(|e| e.0);
    }
    SparseMatrix::from_sparse_columns(rows, columns)
}

/// Exact nullity of a homogeneous system known to have a nonzero solution:
/// the smallest nullity over a few primes.
fn nullity(sys: &SparseSystem, seed: u64) -> Result<usize> {
    gaussian_primes(3, seed ^ 0x6e75_6c6c)
        .into_iter()
        .filter_map(|gp| sys.nullity_mod(gp))
        .min()
        .ok_or_else(|| Error::Reconstruction("no usable prime for the nullity".into()))
}

/// Normalization rows `L(mu_X^p) = zeta_p mu_X^{p-1}` for the operator at
/// `positions` starting at `offset`.
fn push_normalization(
    sys: &mut SparseSystem,
    ring: &OrbitRing,
    ctx: &ConstantsContext,
    p: usize,
    positions: &[(usize, usize)],
    offset: usize,
) -> Result<()> {
    let src = ring.pow(&ring.mu_x(), p)?;
    let dst = ring.pow(&ring.mu_x(), p - 1)?;
    let zeta = qi_from_rational(ctx.zeta(p));
    let mut rows: Vec<Vec<(usize, Qi)>> = vec![Vec::new(); ring.dim(p - 1)];
    for (k, &(r, c)) in positions.iter().enumerate() {
        if !src.coords[c].is_zero() {
            rows[r].push((offset + k, src.coords[c].clone()));
        }
    }
    for (r, row) in rows.into_iter().enumerate() {
        sys.push(row, zeta.clone() * dst.coords[r].clone());
    }
    Ok(())
}

/// The unnormalized generator is the solution scaled to first nonzero entry 1.
fn first_nonzero_ratio(solution: &[Qi]) -> Qi {
    solution.iter().find(|v| !v.is_zero()).cloned().unwrap_or_else(Qi::zero)
}

/// Solve `Lambda` on `R^p`, propagation first.
pub fn solve_lambda(ring: &OrbitRing, ctx: &ConstantsContext, p: usize, seed: u64) -> Result<LambdaSlice> {
    if p == 0 || p > ring.top() {
        return Err(Error::DegreeOverflow { degree: p, cap: ring.top() });
    }
    let (ly, nullity, multiplier) = solve_lowest(ring, ctx, p, seed)?;
    match propagate(ring, p, &ly) {
        Some(ops) => Ok(LambdaSlice {
            degree: p,
            ops,
            multiplier,
            nullity,
            strategy: Strategy::Propagation,
        }),
        None => solve_lambda_nullspace(ring, ctx, p, seed),
    }
}

/// `Lambda^Y` on `R^p` with the nullity of its defining system.
fn solve_lowest(ring: &OrbitRing, ctx: &ConstantsContext, p: usize, seed: u64) -> Result<(SparseMatrix<Qi>, usize, Qi)> {
    let spec = &ring.spec;
    let shift = &spec.weights[spec.y];
    let positions = unknown_positions(ring, p, shift);
    if positions.is_empty() {
        return Err(Error::IntertwinerDimension { degree: p, found: 0 });
    }
    let mut sys = SparseSystem::new(positions.len());
    for u in (0..spec.dim()).filter(|&u| spec.is_negative_root(u)) {
        let mut rows = HashMap::new();
        commutator_rows(&positions, 0, &ring.eta_ops[p - 1][u], &ring.eta_ops[p][u], &mut rows);
        let mut rows: Vec<_> = rows.into_iter().collect();
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        for (_, row) in rows {
            sys.push(merge_row(row), Qi::zero());
        }
    }
    let nullity = nullity(&sys, seed)?;
    if nullity != 1 {
        return Err(Error::IntertwinerDimension { degree: p, found: nullity });
    }
    push_normalization(&mut sys, ring, ctx, p, &positions, 0)?;
    let sol = sys.solve_unique(seed ^ p as u64)?;
    let multiplier = first_nonzero_ratio(&sol);
    Ok((to_sparse(ring.dim(p - 1), ring.dim(p), &positions, &sol), nullity, multiplier))
}

/// Spread `Lambda^Y` over a basis of `g` with `Lambda^{[u,x]} = [eta^u, Lambda^x]`.
fn propagate(ring: &OrbitRing, p: usize, ly: &SparseMatrix<Qi>) -> Option<Vec<SparseMatrix<Qi>>> {
    let spec = &ring.spec;
    let n = spec.dim();
    let mut span: Vec<Vec<Qi>> = Vec::new();
    let mut ops: Vec<SparseMatrix<Qi>> = Vec::new();
    let mut echelon = Echelon::new(n);
    let y = spec.y_vec();
    echelon.insert(&y);
    span.push(y);
    ops.push(ly.clone());
    let mut k = 0;
    while k < span.len() && span.len() < n {
        for u in 0..n {
            let br = spec.bracket(&spec.basis_vector(u), &span[k]).ok()?;
            if br.iter().all(Zero::is_zero) || !echelon.insert(&br) {
                continue;
            }
            let op = ring.eta_ops[p - 1][u].compose(&ops[k]).sub(&ops[k].compose(&ring.eta_ops[p][u]));
            span.push(br);
            ops.push(op);
            if span.len() == n {
                break;
            }
        }
        k += 1;
    }
    if span.len() < n {
        return None;
    }
    // Column j of `span` matrix holds span[j]; solve for each basis vector.
    let m = Matrix::from_fn(n, n, |i, j| span[j][i].clone());
    let inv = m.inverse().ok()?;
    let out = (0..n)
        .map(|i| {
            let coeffs = inv.column(i);
            OrbitRing::op_combination(&ops, &coeffs)
        })
        .collect();
    Some(out)
}

/// Incremental row echelon form for independence tests.
struct Echelon {
    rows: Vec<(usize, Vec<Qi>)>,
    n: usize,
}

impl Echelon {
    fn new(n: usize) -> Self {
        Echelon { rows: Vec::new(), n }
    }

    /// Insert if independent; returns whether it was.
    fn insert(&mut self, v: &[Qi]) -> bool {
        let mut v = v.to_vec();
        for (piv, row) in &self.rows {
            if !v[*piv].is_zero() {
                let f = v[*piv].clone();
                for j in 0..self.n {
                    v[j] = v[j].clone() - f.clone() * row[j].clone();
                }
            }
        }
        let Some(piv) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = Qi::one() / v[piv].clone();
        for x in &mut v {
            *x = x.clone() * inv.clone();
        }
        self.rows.push((piv, v));
        true
    }
}

/// Solve all `Lambda^{e_i}` on `R^p` at once from the equivariance
/// constraints `[eta^{e_j}, Lambda^{e_i}] = Lambda^{[e_j, e_i]}`.
pub fn solve_lambda_nullspace(ring: &OrbitRing, ctx: &ConstantsContext, p: usize, seed: u64) -> Result<LambdaSlice> {
    let spec = &ring.spec;
    let n = spec.dim();
    let mut offsets = Vec::with_capacity(n + 1);
    let mut positions = Vec::with_capacity(n);
    let mut total = 0;
    for i in 0..n {
        let pos = unknown_positions(ring, p, &spec.weights[i]);
        offsets.push(total);
        total += pos.len();
        positions.push(pos);
    }
    let index: Vec<HashMap<(usize, usize), usize>> = positions
        .iter()
        .zip(&offsets)
        .map(|(pos, off)| pos.iter().enumerate().map(|(k, &rc)| (rc, off + k)).collect())
        .collect();
    let mut sys = SparseSystem::new(total);
    for j in 0..n {
        for i in 0..n {
            let mut rows = HashMap::new();
            commutator_rows(&positions[i], offsets[i], &ring.eta_ops[p - 1][j], &ring.eta_ops[p][j], &mut rows);
            for (k, c) in &spec.structure[j][i] {
                for (&rc, &col) in &index[*k] {
                    rows.entry(rc).or_default().push((col, -c.clone()));
                }
            }
            // Entries outside the allowed weight pattern must vanish too; they
            // do automatically since every term above respects weights.
            let mut keys: Vec<_> = rows.into_iter().collect();
            keys.sort_by(|a, b| a.0.cmp(&b.0));
            for (_, row) in keys {
                sys.push(merge_row(row), Qi::zero());
            }
        }
    }
    let nullity = nullity(&sys, seed)?;
    if nullity != 1 {
        return Err(Error::IntertwinerDimension { degree: p, found: nullity });
    }
    push_normalization(&mut sys, ring, ctx, p, &positions[spec.y], offsets[spec.y])?;
    let sol = sys.solve_unique(seed ^ (p as u64) << 8)?;
    let multiplier = first_nonzero_ratio(&sol);
    let ops = (0..n)
        .map(|i| {
            let vals = &sol[offsets[i]..offsets[i] + positions[i].len()];
            to_sparse(ring.dim(p - 1), ring.dim(p), &positions[i], vals)
        })
        .collect();
    Ok(LambdaSlice {
        degree: p,
        ops,
        multiplier,
        nullity,
        strategy: Strategy::Nullspace,
    })
}

fn random_element(ring: &OrbitRing, d: usize, rng: &mut impl Rng) -> RingElement {
    let coords = (0..ring.dim(d)).map(|_| qi(rng.gen_range(-3i64..=3), 1)).collect();
    ring.element(d, coords)
}

fn random_vector(n: usize, rng: &mut impl Rng) -> Vec<Qi> {
    (0..n).map(|_| qi(rng.gen_range(-2i64..=2), 1)).collect()
}

fn sub(a: &RingElement, b: &RingElement) -> RingElement {
    RingElement {
        degree: a.degree,
        coords: a.coords.iter().zip(&b.coords).map(|(x, y)| x.clone() - y.clone()).collect(),
    }
}

fn add(a: &RingElement, b: &RingElement) -> RingElement {
    RingElement {
        degree: a.degree,
        coords: a.coords.iter().zip(&b.coords).map(|(x, y)| x.clone() + y.clone()).collect(),
    }
}

fn scale(a: &RingElement, c: &Qi) -> RingElement {
    RingElement {
        degree: a.degree,
        coords: a.coords.iter().map(|x| x.clone() * c.clone()).collect(),
    }
}

/// `Lambda^Y(mu_X^s mu_Y^t)` from the closed form of the lowest-weight
/// subalgebra.
pub fn dy_subalgebra(ctx: &ConstantsContext, s: usize, t: usize) -> (crate::scalar::Rational, crate::scalar::Rational) {
    (ctx.alpha(s, t), ctx.beta(s, t))
}

/// Operator identities of a solved family on all degrees up to its cap.
pub fn verify_lambda(ring: &OrbitRing, family: &LambdaFamily, seed: u64, report: &mut Report) -> Result<()> {
    let spec = &ring.spec;
    let n = spec.dim();
    let cap = family.cap();
    let name = spec.name();
    let ctx = ConstantsContext::from_spec(spec);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6c61_6d62);

    for s in &family.slices {
        report.check(
            SUITE,
            format!("{name}: intertwiner space is one-dimensional in degree {}", s.degree),
            "Hom_g(g (x) R^p, R^(p-1)) is a line",
            s.nullity == 1,
            Some(json!({"nullity": s.nullity})),
            Instant::now(),
        );
    }
    report.info(
        SUITE,
        format!("{name}: solver certificates"),
        "normalization multiplier per degree",
        json!(family
            .slices
            .iter()
            .map(|s| json!({"degree": s.degree, "nullity": s.nullity, "multiplier": s.multiplier.to_string(), "strategy": s.strategy}))
            .collect::<Vec<_>>()),
    );

    // Normalization.
    let t = Instant::now();
    let mut bad = None;
    for p in 1..=cap {
        let lhs = family.apply(&spec.y_vec(), &ring.pow(&ring.mu_x(), p)?)?.expect("p >= 1");
        let rhs = scale(&ring.pow(&ring.mu_x(), p - 1)?, &qi_from_rational(ctx.zeta(p)));
        if lhs != rhs {
            bad = Some(json!({"p": p}));
        }
    }
    report.check(SUITE, format!("{name}: Lambda^Y(mu_X^p) = zeta_p mu_X^(p-1)"), "normalization on the highest line", bad.is_none(), bad, t);

    // Adjoint equivariance.
    let t = Instant::now();
    let mut bad = None;
    'eq: for p in 1..=cap {
        for j in 0..n {
            for i in 0..n {
                let lhs = ring.eta_ops[p - 1][j]
                    .compose(family.op(i, p)?)
                    .sub(&family.op(i, p)?.compose(&ring.eta_ops[p][j]));
                let br = spec.bracket(&spec.basis_vector(j), &spec.basis_vector(i))?;
                let rhs = family.combination(&br, p)?;
                if !lhs.sub(&rhs).is_zero() {
                    bad = Some(json!({"p": p, "i": i, "j": j}));
                    break 'eq;
                }
            }
        }
    }
    report.check(SUITE, format!("{name}: adjoint equivariance"), "[eta^x, Lambda^y] = Lambda^[x,y]", bad.is_none(), bad, t);

    // Commutativity.
    let t = Instant::now();
    let mut bad = None;
    'cm: for p in 2..=cap {
        for i in 0..n {
            for j in i + 1..n {
                let a = family.op(i, p - 1)?.compose(family.op(j, p)?);
                let b = family.op(j, p - 1)?.compose(family.op(i, p)?);
                if !a.sub(&b).is_zero() {
                    bad = Some(json!({"p": p, "i": i, "j": j}));
                    break 'cm;
                }
            }
        }
    }
    report.check(SUITE, format!("{name}: Lambda operators commute"), "Lambda^x Lambda^y = Lambda^y Lambda^x", bad.is_none(), bad, t);

    // Nonvanishing.
    let t = Instant::now();
    let zero_ops: Vec<(usize, usize)> = (1..=cap)
        .flat_map(|p| (0..n).map(move |i| (p, i)))
        .filter(|&(p, i)| family.op(i, p).map(|o| o.is_zero()).unwrap_or(true))
        .collect();
    report.check(SUITE, format!("{name}: Lambda^x nonzero on R^p"), "Lambda^x does not vanish for p >= 1", zero_ops.is_empty(), Some(json!(zero_ops)), t);

    // Degree one: Lambda^x(mu_y) = c kappa(x, y) with c = 2 zeta_1.
    let t = Instant::now();
    let c = qi_from_rational(ctx.zeta(1) * crate::scalar::rint(2));
    let mut bad = None;
    'k: for i in 0..n {
        for j in 0..n {
            let mu = ring.mu(&spec.basis_vector(j))?;
            let v = family.apply(&spec.basis_vector(i), &mu)?.expect("degree 1");
            if v.coords[0] != c.clone() * spec.killing[(i, j)].clone() {
                bad = Some(json!({"i": i, "j": j, "value": v.coords[0].to_string()}));
                break 'k;
            }
        }
    }
    report.check(SUITE, format!("{name}: Lambda^x(mu_y) = 2 zeta_1 kappa(x, y)"), "c = 2 zeta_1", bad.is_none(), bad, t);

    // The commutator identity with multiplication operators, on the (X, Y)
    // pair and on random pairs.
    let t = Instant::now();
    let mut bad = None;
    let mut pairs = vec![(spec.x_vec(), spec.y_vec())];
    for _ in 0..4 {
        pairs.push((random_vector(n, &mut rng), random_vector(n, &mut rng)));
    }
    'e13: for (x, y) in &pairs {
        let z = spec.bracket(x, y)?;
        for p in 0..cap {
            for _ in 0..2 {
                let f = random_element(ring, p, &mut rng);
                let lhs = eq13_lhs(ring, family, x, y, &f)?;
                let rhs = scale(&ring.eta_apply(&z, &f), &qi(1, 4));
                if lhs != rhs {
                    bad = Some(json!({"p": p}));
                    break 'e13;
                }
            }
        }
    }
    report.check(
        SUITE,
        format!("{name}: [mu_x, Lambda^y] + [Lambda^x, mu_y] = eta^[x,y] / 4"),
        "commutator identity of Lambda with multiplication",
        bad.is_none(),
        bad,
        t,
    );

    // Lambda-words of ideal elements vanish.
    let t = Instant::now();
    let mut bad = None;
    if cap >= 2 {
        let basis2 = &ring.bases[2];
        'w: for (k, m) in basis2.monomials.iter().enumerate() {
            if basis2.standard.contains(&k) {
                continue;
            }
            // m - nf(m) lies in the ideal.
            let mut word: Vec<(Monomial, Qi)> = vec![(m.clone(), Qi::one())];
            for (s, c) in basis2.nf_monomial(m) {
                word.push((basis2.basis_monomial(*s).clone(), -c.clone()));
            }
            for q in 2..=cap {
                let g = random_element(ring, q, &mut rng);
                let mut acc = vec![Qi::zero(); ring.dim(q - 2)];
                for (mono, c) in &word {
                    let idx = mono.indices();
                    let inner = family.op(idx[1], q)?.apply(&g.coords);
                    let outer = family.op(idx[0], q - 1)?.apply(&inner);
                    for (a, v) in acc.iter_mut().zip(outer) {
                        *a = a.clone() + c.clone() * v;
                    }
                }
                if acc.iter().any(|v| !v.is_zero()) {
                    bad = Some(json!({"monomial": format!("{m:?}"), "q": q}));
                    break 'w;
                }
            }
        }
    }
    report.check(SUITE, format!("{name}: Lambda-words of ideal elements vanish"), "Lambda^f depends only on the class of f", bad.is_none(), bad, t);

    // Lowest-weight subalgebra identity.
    let t = Instant::now();
    let mut bad = None;
    let (mx, my, mh) = (ring.mu_x(), ring.mu_y(), ring.mu_h());
    'l72: for d in 1..=cap {
        for s in 0..=d {
            let tt = d - s;
            let f = ring.ring_mul(&ring.pow(&mx, s)?, &ring.pow(&my, tt)?)?;
            let lhs = family.apply(&spec.y_vec(), &f)?.expect("d >= 1");
            let (alpha, beta) = dy_subalgebra(&ctx, s, tt);
            let phi = qi_from_rational(ctx.phi(d - 1));
            let mut rhs = RingElement { degree: d - 1, coords: vec![Qi::zero(); ring.dim(d - 1)] };
            if s >= 1 {
                let a = ring.ring_mul(&ring.pow(&mx, s - 1)?, &ring.pow(&my, tt)?)?;
                rhs = add(&rhs, &scale(&a, &qi_from_rational(alpha.clone())));
            } else if !alpha.is_zero() {
                bad = Some(json!({"s": s, "t": tt, "alpha": alpha.to_string()}));
                break 'l72;
            }
            if s >= 2 && tt >= 1 {
                let b = ring.ring_mul(&ring.ring_mul(&ring.pow(&mx, s - 2)?, &ring.pow(&my, tt - 1)?)?, &ring.pow(&mh, 2)?)?;
                rhs = add(&rhs, &scale(&b, &qi_from_rational(beta.clone())));
            } else if !beta.is_zero() {
                bad = Some(json!({"s": s, "t": tt, "beta": beta.to_string()}));
                break 'l72;
            }
            let rhs = scale(&rhs, &phi);
            if lhs != rhs {
                bad = Some(json!({"s": s, "t": tt}));
                break 'l72;
            }
        }
    }
    report.check(
        SUITE,
        format!("{name}: Lambda^Y on mu_X^s mu_Y^t"),
        "Lambda^Y(mu_X^s mu_Y^t) = phi_(s+t-1) (alpha mu_X^(s-1) mu_Y^t + beta mu_X^(s-2) mu_Y^(t-1) mu_h^2)",
        bad.is_none(),
        bad,
        t,
    );
    Ok(())
}

/// `[mu_x, Lambda^y](f) + [Lambda^x, mu_y](f)` for `f` in `R^p`, `p < cap`.
pub fn eq13_lhs(ring: &OrbitRing, family: &LambdaFamily, x: &[Qi], y: &[Qi], f: &RingElement) -> Result<RingElement> {
    let zero = RingElement { degree: f.degree, coords: vec![Qi::zero(); ring.dim(f.degree)] };
    let lam = |v: &[Qi], a: &RingElement| -> Result<RingElement> {
        Ok(family.apply(v, a)?.unwrap_or_else(|| zero.clone()))
    };
    let mut acc = zero.clone();
    if f.degree >= 1 {
        acc = add(&acc, &ring.mul_mu(x, &lam(y, f)?)?);
        acc = sub(&acc, &ring.mul_mu(y, &lam(x, f)?)?);
    }
    acc = sub(&acc, &lam(y, &ring.mul_mu(x, f)?)?);
    acc = add(&acc, &lam(x, &ring.mul_mu(y, f)?)?);
    Ok(acc)
}

/// The Casimir scalar: the constant by which the image of
/// `sum_i mu_{x_i} mu_{x^i}` under the circle product acts, with the two
/// closed-form candidates `2 zeta_1 N` and the alternative.
pub fn casimir_action(ring: &OrbitRing, family: &LambdaFamily) -> Result<(crate::scalar::Rational, crate::scalar::Rational, crate::scalar::Rational)> {
    let spec = &ring.spec;
    let ctx = ConstantsContext::from_spec(spec);
    let mut acc = Qi::zero();
    for (i, j, w) in spec.dual_basis_pairs() {
        let mu = ring.mu(&spec.basis_vector(j))?;
        let v = family.apply(&spec.basis_vector(i), &mu)?.expect("degree 1");
        acc = acc + w * v.coords[0].clone();
    }
    let computed = crate::scalar::qi_real(&acc)
        .ok_or_else(|| Error::Inconsistent(format!("Casimir scalar {acc} is not real")))?;
    Ok((computed, ctx.casimir_from_zeta(spec.dim()), ctx.casimir_closed(spec.dim())))
}

/// For `sp(2n)`: the solved `Lambda^x` agree with `C_2(q_x, .)` of the Moyal
/// product, pulled back through `mu_{e_i} -> q_{e_i}`.
pub fn verify_against_moyal(ring: &OrbitRing, family: &LambdaFamily, report: &mut Report) -> Result<()> {
    let spec = &ring.spec;
    let quads = crate::moyal::quadratic_basis(spec)?;
    let image = |a: &RingElement| ring.lift(a).substitute(&quads);
    let t = Instant::now();
    let mut bad = None;
    'outer: for p in 1..=family.cap() {
        for k in 0..ring.dim(p) {
            let mut e = vec![Qi::zero(); ring.dim(p)];
            e[k] = Qi::one();
            let f = ring.element(p, e);
            let fi = image(&f);
            for (i, q) in quads.iter().enumerate() {
                let lhs = image(&family.apply(&spec.basis_vector(i), &f)?.expect("p >= 1"));
                let rhs = crate::moyal::moyal_c(2, q, &fi)?;
                if lhs != rhs {
                    bad = Some(json!({"p": p, "basis": k, "i": i}));
                    break 'outer;
                }
            }
        }
    }
    report.check(
        SUITE,
        format!("{}: solved Lambda equals the Moyal C_2 through degree {}", spec.name(), family.cap()),
        "Lambda^x = C_2(q_x, .) in the Weyl model",
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
    use crate::scalar::rat;
    use std::sync::Arc;

    fn ring(name: &str, top: usize) -> OrbitRing {
        OrbitRing::build(Arc::new(build_named(name).unwrap()), top, 11, 1.25).unwrap()
    }

    #[test]
    fn sl3_degree_one_and_two() {
        let r = ring("sl3", 2);
        let fam = LambdaFamily::solve(&r, 2, 5).unwrap();
        let lam = fam.apply(&r.spec.y_vec(), &r.mu_x()).unwrap().unwrap();
        assert_eq!(lam.coords, vec![qi(-3, 16)]);
        let sq = r.pow(&r.mu_x(), 2).unwrap();
        let lam2 = fam.apply(&r.spec.y_vec(), &sq).unwrap().unwrap();
        let expect = scale(&r.mu_x(), &qi(-5, 6));
        assert_eq!(lam2, expect);
        let (computed, two_zeta, closed) = casimir_action(&r, &fam).unwrap();
        assert_eq!(computed, rat(-3, 1));
        assert_eq!(two_zeta, rat(-3, 1));
        assert_eq!(closed, rat(-3, 2));
    }

    #[test]
    fn propagation_agrees_with_nullspace() {
        let r = ring("sl3", 2);
        let ctx = ConstantsContext::from_spec(&r.spec);
        for p in 1..=2 {
            let a = solve_lambda(&r, &ctx, p, 3).unwrap();
            let b = solve_lambda_nullspace(&r, &ctx, p, 3).unwrap();
            assert_eq!(a.strategy, Strategy::Propagation);
            assert_eq!(a.ops, b.ops);
            assert_eq!(b.nullity, 1);
        }
    }

    #[test]
    fn sp2_matches_moyal() {
        let r = ring("sp2", 6);
        let fam = LambdaFamily::solve(&r, 6, 5).unwrap();
        let mut rep = Report::default();
        verify_against_moyal(&r, &fam, &mut rep).unwrap();
        verify_lambda(&r, &fam, 2, &mut rep).unwrap();
        let fails: Vec<_> = rep.failures().collect();
        assert!(fails.is_empty(), "{fails:?}");
    }

    #[test]
    fn lemma_subalgebra_values() {
        let ctx = ConstantsContext::new(rat(1, 1), rat(0, 1));
        assert_eq!(dy_subalgebra(&ctx, 2, 1), (rat(26, 1), rat(-3, 1)));
        let (a, b) = dy_subalgebra(&ctx, 0, 3);
        assert!(a.is_zero() && b.is_zero());
        let (a, b) = dy_subalgebra(&ctx, 3, 0);
        assert_eq!((a, b), (ctx.gamma(3), rat(0, 1)));
    }

    #[test]
    fn sl3_identities_pass() {
        let r = ring("sl3", 3);
        let fam = LambdaFamily::solve(&r, 3, 5).unwrap();
        let mut rep = Report::default();
        verify_lambda(&r, &fam, 1, &mut rep).unwrap();
        let fails: Vec<_> = rep.failures().collect();
        assert!(fails.is_empty(), "{fails:?}");
    }
}

//! The star product built from `mu_x * f = mu_x f + t eta^x f / 2 + t^2 Lambda^x f`.
//!
//! Every element of `R` is a combination of circle-monomials
//! `L_{i1} ... L_{id}(1)`, where `L_i = mu_i + eta^i / 2 + Lambda^i` is the
//! left star multiplication at `t = 1`. Components are graded by degree, and
//! the power of `t` in a product of homogeneous factors is the degree drop,
//! so `t = 1` loses nothing.

use std::time::Instant;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::error::{Error, Result};
use crate::lambda::LambdaFamily;
use crate::orbit::{OrbitRing, RingElement};
use crate::report::Report;
use crate::scalar::{qi, Qi};

const SUITE: &str = "star";

/// An inhomogeneous element: `parts[d]` are coordinates in `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct Graded {
    pub parts: Vec<Vec<Qi>>,
}

impl Graded {
    pub fn zero(ring: &OrbitRing) -> Self {
        Graded {
            parts: (0..=ring.top()).map(|d| vec![Qi::zero(); ring.dim(d)]).collect(),
        }
    }

    pub fn from_element(ring: &OrbitRing, a: &RingElement) -> Self {
        let mut g = Self::zero(ring);
        g.parts[a.degree] = a.coords.clone();
        g
    }

    pub fn component(&self, d: usize) -> RingElement {
        RingElement { degree: d, coords: self.parts[d].clone() }
    }

    pub fn is_zero(&self) -> bool {
        self.parts.iter().all(|p| p.iter().all(Zero::is_zero))
    }

    /// Highest degree with a nonzero part.
    pub fn top_degree(&self) -> Option<usize> {
        (0..self.parts.len()).rev().find(|&d| self.parts[d].iter().any(|v| !v.is_zero()))
    }

    pub fn add_scaled(&mut self, other: &Graded, c: &Qi) {
        for (a, b) in self.parts.iter_mut().zip(&other.parts) {
            for (x, y) in a.iter_mut().zip(b) {
                if !y.is_zero() {
                    *x = x.clone() + c.clone() * y.clone();
                }
            }
        }
    }

    pub fn sub(&self, other: &Graded) -> Graded {
        let mut out = self.clone();
        out.add_scaled(other, &qi(-1, 1));
        out
    }
}

/// `f * g = sum_p C_p(f, g) t^p`; `components[p]` lies in `R^{k+l-p}`.
#[derive(Clone, Debug, PartialEq)]
pub struct StarSeries {
    pub components: Vec<RingElement>,
}

impl StarSeries {
    /// Nonzero coefficients beyond the last nonzero component are trimmed.
    pub fn order(&self) -> usize {
        self.components.iter().rposition(|c| !c.is_zero()).map_or(0, |p| p + 1)
    }
}

/// The orbit ring with a solved `Lambda` and the circle-monomial bases.
pub struct StarAlgebra<'a> {
    pub ring: &'a OrbitRing,
    pub lambda: &'a LambdaFamily,
    /// `words[d][b]`: the circle-monomial of the `b`-th standard monomial of degree `d`.
    words: Vec<Vec<Graded>>,
}

impl<'a> StarAlgebra<'a> {
    /// Products are available up to degree `min(ring.top(), lambda.cap() + 1)`.
    pub fn new(ring: &'a OrbitRing, lambda: &'a LambdaFamily) -> Result<Self> {
        let mut alg = StarAlgebra { ring, lambda, words: Vec::new() };
        let top = alg.top();
        let one = Graded::from_element(ring, &ring.one());
        alg.words.push(vec![one.clone()]);
        for d in 1..=top {
            let basis = &ring.bases[d];
            let mut row = Vec::with_capacity(basis.dim());
            for k in 0..basis.dim() {
                let idx = basis.basis_monomial(k).indices();
                // L_{i1}(L_{i2 .. id}(1)); the tail is standard when the monomial is.
                let tail = crate::poly::Monomial::from_indices(ring.nvars(), &idx[1..]);
                let pos = ring.bases[d - 1]
                    .monomial_index(&tail)
                    .and_then(|m| ring.bases[d - 1].standard.iter().position(|&s| s == m));
                let inner = match pos {
                    Some(p) => alg.words[d - 1][p].clone(),
                    None => {
                        let mut g = one.clone();
                        for &i in idx[1..].iter().rev() {
                            g = alg.apply_l(i, &g)?;
                        }
                        g
                    }
                };
                row.push(alg.apply_l(idx[0], &inner)?);
            }
            alg.words.push(row);
        }
        Ok(alg)
    }

    /// Highest degree products may reach.
    pub fn top(&self) -> usize {
        self.ring.top().min(self.lambda.cap() + 1)
    }

    /// `L_i(F) = mu_i F + eta^i F / 2 + Lambda^i F`.
    pub fn apply_l(&self, i: usize, f: &Graded) -> Result<Graded> {
        self.apply_l_bounded(i, f, usize::MAX)
    }

    /// `L_i(F)` keeping only output parts of degree `<= max_out`.
    fn apply_l_bounded(&self, i: usize, f: &Graded, max_out: usize) -> Result<Graded> {
        let ring = self.ring;
        let mut out = Graded::zero(ring);
        let half = qi(1, 2);
        for (d, part) in f.parts.iter().enumerate() {
            if part.iter().all(Zero::is_zero) {
                continue;
            }
            if d + 1 <= max_out {
                if d + 1 > self.top() {
                    return Err(Error::DegreeOverflow { degree: d + 1, cap: self.top() });
                }
                add_into(&mut out.parts[d + 1], &ring.mul_ops[d][i].apply(part), &qi(1, 1));
            }
            if d <= max_out {
                add_into(&mut out.parts[d], &ring.eta_ops[d][i].apply(part), &half);
            }
            if d >= 1 {
                add_into(&mut out.parts[d - 1], &self.lambda.op(i, d)?.apply(part), &qi(1, 1));
            }
        }
        Ok(out)
    }

    /// `L_x` for a coefficient vector.
    pub fn apply_l_vec(&self, x: &[Qi], f: &Graded) -> Result<Graded> {
        let mut out = Graded::zero(self.ring);
        for (i, c) in x.iter().enumerate() {
            if !c.is_zero() {
                out.add_scaled(&self.apply_l(i, f)?, c);
            }
        }
        Ok(out)
    }

    /// Expansion of `F` in circle-monomials: `(degree, standard index, coefficient)`.
    pub fn to_words(&self, f: &Graded) -> Result<Vec<(usize, usize, Qi)>> {
        let mut rest = f.clone();
        let mut out = Vec::new();
        for d in (0..rest.parts.len()).rev() {
            if rest.parts[d].iter().all(Zero::is_zero) {
                continue;
            }
            if d > self.top() {
                return Err(Error::DegreeOverflow { degree: d, cap: self.top() });
            }
            let coeffs = rest.parts[d].clone();
            for (b, c) in coeffs.into_iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                rest.add_scaled(&self.words[d][b], &-c.clone());
                out.push((d, b, c));
            }
        }
        Ok(out)
    }

    /// `F o G` at `t = 1`.
    pub fn circ(&self, f: &Graded, g: &Graded) -> Result<Graded> {
        let mut out = Graded::zero(self.ring);
        for (d, b, c) in self.to_words(f)? {
            let idx = self.ring.bases[d].basis_monomial(b).indices();
            let mut acc = g.clone();
            for &i in idx.iter().rev() {
                acc = self.apply_l(i, &acc)?;
            }
            out.add_scaled(&acc, &c);
        }
        Ok(out)
    }

    /// `f * g` for homogeneous `f`, `g`.
    pub fn star(&self, f: &RingElement, g: &RingElement) -> Result<StarSeries> {
        let total = f.degree + g.degree;
        if total > self.top() {
            return Err(Error::DegreeOverflow { degree: total, cap: self.top() });
        }
        let prod = self.circ(&Graded::from_element(self.ring, f), &Graded::from_element(self.ring, g))?;
        Ok(StarSeries {
            components: (0..=total).map(|p| prod.component(total - p)).collect(),
        })
    }

    /// `mu_x * f` as its three components.
    pub fn circ_mu(&self, x: &[Qi], f: &RingElement) -> Result<StarSeries> {
        let out = self.apply_l_vec(x, &Graded::from_element(self.ring, f))?;
        let total = f.degree + 1;
        Ok(StarSeries {
            components: (0..=total).map(|p| out.component(total - p)).collect(),
        })
    }

    /// Constant term of `F o G`, skipping parts that cannot reach degree 0.
    pub fn circ_constant_term(&self, f: &Graded, g: &Graded) -> Result<Qi> {
        let mut total = Qi::zero();
        for (d, b, c) in self.to_words(f)? {
            let idx = self.ring.bases[d].basis_monomial(b).indices();
            let mut acc = truncate(g, idx.len());
            for (k, &i) in idx.iter().rev().enumerate() {
                acc = self.apply_l_bounded(i, &acc, idx.len() - k - 1)?;
            }
            total = total + c * acc.parts[0][0].clone();
        }
        Ok(total)
    }

    /// `pi^{x,y}(f) = mu_{x-y} f + {mu_{x+y}, f} / 2 + Lambda^{x-y}(f)`.
    pub fn pi_apply(&self, x: &[Qi], y: &[Qi], f: &Graded) -> Result<Graded> {
        let ring = self.ring;
        let diff: Vec<Qi> = x.iter().zip(y).map(|(a, b)| a.clone() - b.clone()).collect();
        let sum: Vec<Qi> = x.iter().zip(y).map(|(a, b)| a.clone() + b.clone()).collect();
        let mut out = Graded::zero(ring);
        let half = qi(1, 2);
        let one = qi(1, 1);
        let diff_zero = diff.iter().all(Zero::is_zero);
        for (d, part) in f.parts.iter().enumerate() {
            if part.iter().all(Zero::is_zero) {
                continue;
            }
            if !diff_zero {
                if d + 1 > ring.top() {
                    return Err(Error::DegreeOverflow { degree: d + 1, cap: ring.top() });
                }
                let m = OrbitRing::op_combination(&ring.mul_ops[d], &diff);
                add_into(&mut out.parts[d + 1], &m.apply(part), &one);
                if d >= 1 {
                    add_into(&mut out.parts[d - 1], &self.lambda.combination(&diff, d)?.apply(part), &one);
                }
            }
            let e = OrbitRing::op_combination(&ring.eta_ops[d], &sum);
            add_into(&mut out.parts[d], &e.apply(part), &half);
        }
        Ok(out)
    }
}

fn add_into(dst: &mut [Qi], src: &[Qi], c: &Qi) {
    for (a, b) in dst.iter_mut().zip(src) {
        if !b.is_zero() {
            *a = a.clone() + c.clone() * b.clone();
        }
    }
}

fn truncate(f: &Graded, max_degree: usize) -> Graded {
    let mut out = f.clone();
    for (d, p) in out.parts.iter_mut().enumerate() {
        if d > max_degree {
            p.iter_mut().for_each(|v| *v = Qi::zero());
        }
    }
    out
}

pub fn random_element(ring: &OrbitRing, d: usize, rng: &mut impl Rng) -> RingElement {
    let coords = (0..ring.dim(d))
        .map(|_| if rng.gen_bool(0.5) { qi(rng.gen_range(-3i64..=3), 1) } else { Qi::zero() })
        .collect();
    ring.element(d, coords)
}

fn neg(a: &RingElement) -> RingElement {
    RingElement { degree: a.degree, coords: a.coords.iter().map(|v| -v.clone()).collect() }
}

fn diff(a: &RingElement, b: &RingElement) -> RingElement {
    RingElement {
        degree: a.degree,
        coords: a.coords.iter().zip(&b.coords).map(|(x, y)| x.clone() - y.clone()).collect(),
    }
}

/// Random degree pairs `(k, l)` with `k + l <= cap`.
fn degree_pair(rng: &mut impl Rng, cap: usize) -> (usize, usize) {
    let k = rng.gen_range(0..=cap);
    (k, rng.gen_range(0..=cap - k))
}

/// Axioms, equivariance and associativity of the star product.
pub fn verify_star(alg: &StarAlgebra, cap: usize, trials: usize, seed: u64, report: &mut Report) -> Result<()> {
    let ring = alg.ring;
    let spec = &ring.spec;
    let n = spec.dim();
    let name = spec.name();
    let cap = cap.min(alg.top());
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7374_6172);

    // Three-term structure.
    let t = Instant::now();
    let mut bad = None;
    'three: for d in 0..cap {
        for i in 0..n {
            let f = random_element(ring, d, &mut rng);
            let s = alg.circ_mu(&spec.basis_vector(i), &f)?;
            let extra = s.components.iter().skip(3).any(|c| !c.is_zero());
            if extra || s.components[0] != ring.mul_mu(&spec.basis_vector(i), &f)? {
                bad = Some(json!({"i": i, "degree": d}));
                break 'three;
            }
        }
    }
    let one = alg.circ_mu(&spec.x_vec(), &ring.one())?;
    let ok_one = one.components[0] == ring.mu_x() && one.components[1].is_zero();
    report.check(
        SUITE,
        format!("{name}: mu_x * f has three terms"),
        "mu_x * f = mu_x f + t {mu_x, f} / 2 + t^2 Lambda^x f",
        bad.is_none() && ok_one,
        bad,
        t,
    );

    // Covariance on the triple and the degree-one constant.
    let t = Instant::now();
    let xy = alg.star(&ring.mu_x(), &ring.mu_y())?;
    let yx = alg.star(&ring.mu_y(), &ring.mu_x())?;
    let ctx = crate::constants::ConstantsContext::from_spec(spec);
    let ok = diff(&xy.components[1], &yx.components[1]) == ring.mu_h()
        && xy.components[0] == yx.components[0]
        && xy.components[2] == yx.components[2]
        && yx.components[2].coords == vec![crate::scalar::qi_from_rational(ctx.zeta(1))];
    report.check(
        SUITE,
        format!("{name}: [mu_X, mu_Y] = t mu_h and C_2(mu_Y, mu_X) = zeta_1"),
        "covariance on the sl2 triple",
        ok,
        Some(json!({"C2(mu_Y, mu_X)": yx.components[2].coords.iter().map(|v| v.to_string()).collect::<Vec<_>>()})),
        t,
    );

    // Axioms (i)-(iv).
    let t = Instant::now();
    let mut bad = None;
    for _ in 0..trials {
        let (k, l) = degree_pair(&mut rng, cap);
        let f = random_element(ring, k, &mut rng);
        let g = random_element(ring, l, &mut rng);
        let fg = alg.star(&f, &g)?;
        let gf = alg.star(&g, &f)?;
        let c0 = fg.components[0] == ring.ring_mul(&f, &g)?;
        let c1 = k + l == 0 || diff(&fg.components[1], &gf.components[1]) == ring.ring_poisson(&f, &g)?;
        let parity = fg.components.iter().zip(&gf.components).enumerate().all(|(p, (a, b))| {
            if p % 2 == 0 {
                a == b
            } else {
                *a == neg(b)
            }
        });
        let graded = fg.components.iter().enumerate().all(|(p, c)| c.degree == k + l - p);
        if !(c0 && c1 && parity && graded) {
            bad = Some(json!({"k": k, "l": l, "c0": c0, "c1": c1, "parity": parity, "graded": graded}));
            break;
        }
    }
    report.check(
        SUITE,
        format!("{name}: star product axioms on {trials} random pairs"),
        "C_0 = fg, C_1 - C_1^op = {f,g}, C_p(f,g) = (-1)^p C_p(g,f), C_p lowers degree by p",
        bad.is_none(),
        bad,
        t,
    );

    // Strong invariance.
    let t = Instant::now();
    let mut bad = None;
    'eqv: for i in 0..n {
        for _ in 0..2 {
            let d = rng.gen_range(0..cap);
            let f = random_element(ring, d, &mut rng);
            let mu = ring.mu(&spec.basis_vector(i))?;
            let a = alg.star(&mu, &f)?;
            let b = alg.star(&f, &mu)?;
            let pb = ring.eta_apply(&spec.basis_vector(i), &f);
            let ok = a.components.iter().zip(&b.components).enumerate().all(|(p, (x, y))| {
                if p == 1 {
                    diff(x, y) == pb
                } else {
                    x == y
                }
            });
            if !ok {
                bad = Some(json!({"i": i, "degree": d}));
                break 'eqv;
            }
        }
    }
    report.check(SUITE, format!("{name}: G-equivariance"), "[mu_x, f]_* = t {mu_x, f}", bad.is_none(), bad, t);

    // Associativity.
    let t = Instant::now();
    let mut bad = None;
    let triples = trials.max(25);
    for _ in 0..triples {
        let k = rng.gen_range(0..=cap);
        let l = rng.gen_range(0..=cap - k);
        let m = rng.gen_range(0..=cap - k - l);
        let f = Graded::from_element(ring, &random_element(ring, k, &mut rng));
        let g = Graded::from_element(ring, &random_element(ring, l, &mut rng));
        let h = Graded::from_element(ring, &random_element(ring, m, &mut rng));
        let left = alg.circ(&alg.circ(&f, &g)?, &h)?;
        let right = alg.circ(&f, &alg.circ(&g, &h)?)?;
        if left != right {
            bad = Some(json!({"degrees": [k, l, m]}));
            break;
        }
    }
    report.check(
        SUITE,
        format!("{name}: associativity on {triples} random triples"),
        "(f * g) * h = f * (g * h)",
        bad.is_none(),
        bad,
        t,
    );

    // The representation pi.
    let t = Instant::now();
    let mut bad = None;
    if cap >= 2 {
        for _ in 0..(trials / 5).max(3) {
            let x = spec.basis_vector(rng.gen_range(0..n));
            let y = spec.basis_vector(rng.gen_range(0..n));
            let z = spec.bracket(&x, &y)?;
            let negx: Vec<Qi> = x.iter().map(|v| -v.clone()).collect();
            let negy: Vec<Qi> = y.iter().map(|v| -v.clone()).collect();
            let d = rng.gen_range(0..=cap - 2);
            let f = Graded::from_element(ring, &random_element(ring, d, &mut rng));
            let a = alg.pi_apply(&x, &negx, &alg.pi_apply(&y, &negy, &f)?)?;
            let b = alg.pi_apply(&y, &negy, &alg.pi_apply(&x, &negx, &f)?)?;
            let lhs = a.sub(&b);
            let rhs = alg.pi_apply(&z, &z, &f)?;
            let diag = alg.pi_apply(&x, &x, &f)?;
            let expect_diag = Graded::from_element(ring, &ring.eta_apply(&x, &f.component(d)));
            if lhs != rhs || diag != expect_diag {
                bad = Some(json!({"degree": d}));
                break;
            }
        }
    }
    report.check(
        SUITE,
        format!("{name}: pi is a representation"),
        "[pi^{x,-x}, pi^{y,-y}] = pi^{z,z} with z = [x,y]; pi^{x,x} = {mu_x, .}",
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
    use std::sync::Arc;

    #[test]
    fn sl3_star_product() {
        let ring = OrbitRing::build(Arc::new(build_named("sl3").unwrap()), 3, 3, 1.25).unwrap();
        let lam = LambdaFamily::solve(&ring, 3, 3).unwrap();
        let alg = StarAlgebra::new(&ring, &lam).unwrap();
        let s = alg.star(&ring.mu_y(), &ring.mu_x()).unwrap();
        assert_eq!(s.components[2].coords, vec![qi(-3, 16)]);
        let mut rep = Report::default();
        verify_star(&alg, 3, 25, 9, &mut rep).unwrap();
        let fails: Vec<_> = rep.failures().collect();
        assert!(fails.is_empty(), "{fails:?}");
    }
}

//! Conjugation, the invariant inner product, Gram matrices and the
//! reproducing kernel.

use std::time::Instant;

use num_complex::Complex;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::constants::ConstantsContext;
use crate::error::{Error, Result};
use crate::lambda::LambdaFamily;
use crate::linalg::{matmul_qi, Matrix};
use crate::orbit::{sample_orbit, OrbitPoint, OrbitRing, RingElement};
use crate::poly::Polynomial;
use crate::report::Report;
use crate::scalar::{format_qi, qi_from_rational, qi_real, qi_to_c64, Qi, Rational};
use crate::star::{random_element, Graded, StarAlgebra};

/// `conj(f)(z) = conj(f(sigma z))`: conjugate coefficients, then
/// `mu_{e_i} -> mu_{sigma e_i}`.
pub fn conj_fn(ring: &OrbitRing, f: &RingElement) -> Result<RingElement> {
    let spec = &ring.spec;
    let n = spec.dim();
    let images: Vec<Polynomial<Qi>> = (0..n)
        .map(|i| Polynomial::linear(&spec.sigma.column(i)))
        .collect();
    let p = ring.lift(f).conj_coeffs().substitute(&images);
    ring.normal_form_in_degree(&p, f.degree)
}

/// `Lambda^f(g)` for `f`, `g` of the same degree: a scalar.
pub fn lambda_word_pairing(ring: &OrbitRing, lambda: &LambdaFamily, f: &RingElement, g: &RingElement) -> Result<Qi> {
    if f.degree != g.degree {
        return Ok(Qi::zero());
    }
    let basis = &ring.bases[f.degree];
    let mut total = Qi::zero();
    for (k, c) in f.coords.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let mut v = g.coords.clone();
        let mut deg = g.degree;
        for &i in &basis.basis_monomial(k).indices() {
            v = lambda.op(i, deg)?.apply(&v);
            deg -= 1;
        }
        total = total + c.clone() * v[0].clone();
    }
    Ok(total)
}

/// `(f | g)` two ways: the constant term of `f o conj(g)` and `Lambda^f(conj(g))`.
pub fn inner(alg: &StarAlgebra, f: &RingElement, g: &RingElement) -> Result<(Qi, Qi)> {
    let ring = alg.ring;
    let gb = conj_fn(ring, g)?;
    let circ = alg.circ_constant_term(&Graded::from_element(ring, f), &Graded::from_element(ring, &gb))?;
    let word = lambda_word_pairing(ring, alg.lambda, f, &gb)?;
    Ok((circ, word))
}

#[derive(Clone, Debug, Serialize)]
pub struct GramReport {
    pub degree: usize,
    #[serde(skip)]
    pub matrix: Matrix<Qi>,
    pub pivots: Vec<String>,
    pub hermitian: bool,
    pub positive: bool,
}

/// Gram matrix `G_ab = (b_a | b_b)` in the standard-monomial basis of `R^d`.
pub fn gram_matrix(ring: &OrbitRing, lambda: &LambdaFamily, d: usize) -> Result<Matrix<Qi>> {
    let dim = ring.dim(d);
    let basis = &ring.bases[d];
    // Row functionals of the Lambda-words, then pair with conjugated basis vectors.
    let mut words: Vec<Vec<Qi>> = Vec::with_capacity(dim);
    for a in 0..dim {
        let idx = basis.basis_monomial(a).indices();
        let mut row = vec![Qi::one()];
        for (k, &i) in idx.iter().enumerate() {
            // Outermost Lambda acts on R^{k+1}.
            row = lambda.op(i, k + 1)?.apply_left(&row);
        }
        words.push(row);
    }
    let conj_cols: Vec<Vec<Qi>> = (0..dim)
        .map(|b| {
            let mut e = vec![Qi::zero(); dim];
            e[b] = Qi::one();
            conj_fn(ring, &ring.element(d, e)).map(|r| r.coords)
        })
        .collect::<Result<_>>()?;
    Ok(Matrix::from_fn(dim, dim, |a, b| {
        words[a]
            .iter()
            .zip(&conj_cols[b])
            .filter(|(x, _)| !x.is_zero())
            .fold(Qi::zero(), |s, (x, y)| s + x.clone() * y.clone())
    }))
}

pub fn gram(ring: &OrbitRing, lambda: &LambdaFamily, d: usize) -> Result<GramReport> {
    let matrix = gram_matrix(ring, lambda, d)?;
    let hermitian = matrix.is_hermitian();
    let piv = matrix.hermitian_pivots();
    let positive = piv
        .as_ref()
        .is_some_and(|p| p.iter().all(|v| qi_real(v).is_some_and(|r| r > Rational::zero())));
    Ok(GramReport {
        degree: d,
        pivots: piv.unwrap_or_default().iter().map(format_qi).collect(),
        matrix,
        hermitian,
        positive,
    })
}

/// `(F | G)` for graded elements from per-degree Gram matrices.
pub fn inner_graded(grams: &[Matrix<Qi>], f: &Graded, g: &Graded) -> Qi {
    let mut total = Qi::zero();
    for (d, gm) in grams.iter().enumerate() {
        let (Some(a), Some(b)) = (f.parts.get(d), g.parts.get(d)) else {
            continue;
        };
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if !y.is_zero() {
                    total = total + x.clone() * gm[(i, j)].clone() * y.conj();
                }
            }
        }
    }
    total
}

/// Gram positivity, the norm triple and orthogonality of degrees.
pub fn verify_gram(alg: &StarAlgebra, cap: usize, seed: u64, report: &mut Report) -> Result<Vec<GramReport>> {
    let ring = alg.ring;
    let spec = &ring.spec;
    let name = spec.name();
    let ctx = ConstantsContext::from_spec(spec);
    let cap = cap.min(alg.lambda.cap());
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6772_616d);
    let mut grams = Vec::new();

    for d in 0..=cap {
        let t = Instant::now();
        let g = gram(ring, alg.lambda, d)?;
        report.check(
            "gram",
            format!("{name}: Gram matrix in degree {d} is positive definite"),
            "(.|.) is a positive definite hermitian form",
            g.hermitian && g.positive,
            Some(json!({"hermitian": g.hermitian, "pivots": g.pivots})),
            t,
        );
        grams.push(g);
    }

    // (1|1) and the conjugation.
    let t = Instant::now();
    let (a, b) = inner(alg, &ring.one(), &ring.one())?;
    let conj_y = conj_fn(ring, &ring.mu_y())?;
    let minus_x = RingElement { degree: 1, coords: ring.mu_x().coords.iter().map(|v| -v.clone()).collect() };
    let f = random_element(ring, cap.min(2), &mut rng);
    let invol = conj_fn(ring, &conj_fn(ring, &f)?)? == f;
    let ok = a.is_one() && b.is_one() && conj_y == minus_x && invol;
    report.check(
        "gram",
        format!("{name}: (1|1) = 1, conj(mu_Y) = -mu_X, conjugation is an involution"),
        "conj(f)(z) = conj(f(sigma z))",
        ok,
        Some(json!({"(1|1)": [a.to_string(), b.to_string()], "involution": invol})),
        t,
    );

    // Norms of mu_Y^p three ways.
    let t = Instant::now();
    let mut rows = Vec::new();
    let mut ok = true;
    for p in 0..=cap {
        let f = ring.pow(&ring.mu_y(), p)?;
        let (e22, e23) = inner(alg, &f, &f)?;
        let closed = qi_from_rational(ctx.norm_closed(p));
        let prod = qi_from_rational(ctx.norm_product(p));
        ok &= e22 == closed && e23 == closed && prod == closed;
        rows.push(json!({"p": p, "circle": e22.to_string(), "lambda_word": e23.to_string(), "product": prod.to_string(), "closed": closed.to_string()}));
    }
    report.check(
        "gram",
        format!("{name}: norms of mu_Y^p"),
        "||mu_Y^p||^2 = p! (1+eps)_p (1-eps+m/2)_p / (4^p ((m+3)/2)_p) = prod gamma_i / ((2i+m-1)(2i+m+1))",
        ok,
        Some(json!(rows)),
        t,
    );

    // Both formulas agree on random pairs; different degrees are orthogonal.
    let t = Instant::now();
    let mut bad = None;
    for _ in 0..20 {
        let k = rng.gen_range(0..=cap);
        let l = rng.gen_range(0..=cap);
        let f = random_element(ring, k, &mut rng);
        let g = random_element(ring, l, &mut rng);
        let (a, b) = inner(alg, &f, &g)?;
        let via_gram = inner_graded(
            &grams.iter().map(|g| g.matrix.clone()).collect::<Vec<_>>(),
            &Graded::from_element(ring, &f),
            &Graded::from_element(ring, &g),
        );
        let ok = a == b && a == via_gram && (k == l || a.is_zero());
        if !ok {
            bad = Some(json!({"k": k, "l": l, "circle": a.to_string(), "lambda_word": b.to_string()}));
            break;
        }
    }
    report.check(
        "gram",
        format!("{name}: constant term of f o conj(g) equals Lambda^f(conj(g))"),
        "two formulas for (f|g); R^j is orthogonal to R^k",
        bad.is_none(),
        bad,
        t,
    );
    Ok(grams)
}

/// `(pi f | g) + (f | pi g) = 0` for `pi = pi^{x, sigma(x)}`.
pub fn skew_adjoint_check(alg: &StarAlgebra, grams: &[Matrix<Qi>], trials: usize, seed: u64, report: &mut Report) -> Result<()> {
    let ring = alg.ring;
    let spec = &ring.spec;
    let n = spec.dim();
    let name = spec.name();
    let cap = grams.len() - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x736b_6577);
    let t = Instant::now();
    let mut bad = None;
    let mut count = 0;
    for trial in 0..trials {
        let x: Vec<Qi> = match trial % 3 {
            0 => spec.y_vec(),
            1 => spec.basis_vector(rng.gen_range(0..n)),
            _ => (0..n)
                .map(|_| Complex::new(Rational::from_integer(rng.gen_range(-2i64..=2).into()), Rational::from_integer(rng.gen_range(-2i64..=2).into())))
                .collect(),
        };
        let sx = spec.sigma(&x)?;
        let k = rng.gen_range(0..cap);
        let l = match rng.gen_range(0..3) {
            0 if k > 0 => k - 1,
            1 => k + 1,
            _ => k,
        };
        let l = l.min(cap - 1);
        let f = Graded::from_element(ring, &random_element(ring, k, &mut rng));
        let g = Graded::from_element(ring, &random_element(ring, l, &mut rng));
        let pf = alg.pi_apply(&x, &sx, &f)?;
        let pg = alg.pi_apply(&x, &sx, &g)?;
        let total = inner_graded(grams, &pf, &g) + inner_graded(grams, &f, &pg);
        count += 1;
        if !total.is_zero() {
            bad = Some(json!({"trial": trial, "k": k, "l": l, "value": total.to_string()}));
            break;
        }
    }
    report.check(
        "gram",
        format!("{name}: pi^(x, sigma x) is skew-adjoint on {count} instances"),
        "(pi f | g) + (f | pi g) = 0",
        bad.is_none(),
        bad,
        t,
    );
    Ok(())
}

/// `T(x, y) = -kappa(x, sigma(y))`.
pub fn kernel_t(ring: &OrbitRing, x: &OrbitPoint, y: &OrbitPoint) -> Result<Qi> {
    let spec = &ring.spec;
    Ok(-spec.killing(&x.coords, &spec.sigma(&y.coords)?)?)
}

fn basis_values(ring: &OrbitRing, d: usize, p: &OrbitPoint) -> Vec<Qi> {
    let mu = p.mu_values(&ring.spec);
    (0..ring.dim(d)).map(|k| ring.bases[d].basis_monomial(k).evaluate(&mu)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelReport {
    pub degree_cap: usize,
    pub pairs: usize,
    pub exact_failures: Vec<serde_json::Value>,
    /// Deviation relative to `sum_i |f_i(x) f_i(y)|`.
    pub max_float_deviation: f64,
    /// Deviation relative to `|K(x, y)|` where that is nonzero.
    pub max_value_deviation: f64,
}

/// Exact `L^{-1} v` for unit lower triangular `L`.
fn unit_forward_solve(l: &Matrix<Qi>, v: Vec<Qi>) -> Vec<Qi> {
    let mut x = v;
    for i in 0..x.len() {
        let mut acc = x[i].clone();
        for (k, xk) in x.iter().enumerate().take(i) {
            let c = &l[(i, k)];
            if !c.is_zero() && !xk.is_zero() {
                acc = acc - c.clone() * xk.clone();
            }
        }
        x[i] = acc;
    }
    x
}

/// Degree-`p` part of the kernel in a Gram basis against `(T/2)^p / ||mu_Y^p||^2`.
pub fn kernel_compare(
    ring: &OrbitRing,
    grams: &[Matrix<Qi>],
    pairs: usize,
    seed: u64,
) -> Result<KernelReport> {
    let ctx = ConstantsContext::from_spec(&ring.spec);
    let cap = grams.len() - 1;
    let points = sample_orbit(&ring.spec, 2 * pairs, seed ^ 0x6b65_726e)?;
    // G = L D L^*, so G^{-1} = L^{-*} D^{-1} L^{-1}.
    let factors: Vec<(Matrix<Qi>, Vec<Qi>, Vec<f64>)> = grams
        .iter()
        .map(|g| {
            let (l, d) = g.hermitian_ldl().ok_or_else(|| Error::Inconsistent("Gram matrix has a zero pivot".into()))?;
            let roots = d.iter().map(|v| qi_to_c64(v).re.sqrt()).collect();
            Ok((l, d, roots))
        })
        .collect::<Result<_>>()?;
    let mut failures = Vec::new();
    let mut max_dev = 0.0f64;
    let mut max_value_dev = 0.0f64;
    for pair in 0..pairs {
        let (x, y) = (&points[2 * pair], &points[2 * pair + 1]);
        let t = kernel_t(ring, x, y)?;
        for p in 0..=cap {
            let bx = basis_values(ring, p, x);
            let by: Vec<Qi> = basis_values(ring, p, y).iter().map(|v| v.conj()).collect();
            // sum_ab b_a(x) (G^{-1})_{ba} conj(b_b(y)) = sum_i conj(u_i(x)) u_i(y) / d_i
            // with u = L^{-1} conj(b).
            let (l, pivots, roots) = &factors[p];
            let ux = unit_forward_solve(l, bx.iter().map(|v| v.conj()).collect());
            let uy = unit_forward_solve(l, by.clone());
            let mut k = Qi::zero();
            for ((a, b), d) in ux.iter().zip(&uy).zip(pivots) {
                k = k + a.conj() * b.clone() / d.clone();
            }
            let half_t = t.clone() / Qi::from(Rational::from_integer(2.into()));
            let mut pw = Qi::one();
            for _ in 0..p {
                pw = pw * half_t.clone();
            }
            let expected = pw / qi_from_rational(ctx.norm_closed(p));
            if k != expected {
                failures.push(json!({"pair": pair, "p": p, "basis": k.to_string(), "series": expected.to_string()}));
            }
            // Orthonormal basis f_i = conj(u_i) / sqrt(d_i), square roots in floats.
            let terms: Vec<Complex<f64>> = ux
                .iter()
                .zip(&uy)
                .zip(roots)
                .map(|((a, b), r)| (qi_to_c64(a).conj() / r) * (qi_to_c64(b) / r))
                .collect();
            let kf: Complex<f64> = terms.iter().sum();
            let ef = qi_to_c64(&expected);
            // Rounding in the sum is relative to sum_i |f_i(x) f_i(y)|, which
            // bounds |K(x, y)| and stays meaningful where K(x, y) = 0.
            let err = (kf - ef).norm();
            let scale = ef.norm().max(terms.iter().map(|t| t.norm()).sum::<f64>()).max(f64::MIN_POSITIVE);
            max_dev = max_dev.max(err / scale);
            if !expected.is_zero() {
                max_value_dev = max_value_dev.max(err / ef.norm());
            }
        }
    }
    Ok(KernelReport {
        degree_cap: cap,
        pairs,
        exact_failures: failures,
        max_float_deviation: max_dev,
        max_value_deviation: max_value_dev,
    })
}

/// Kernel checks, plus the closed form of the sp(2) kernel.
pub fn verify_kernel(ring: &OrbitRing, grams: &[Matrix<Qi>], pairs: usize, seed: u64, float_tol: f64, report: &mut Report) -> Result<KernelReport> {
    let spec = &ring.spec;
    let name = spec.name();
    let ctx = ConstantsContext::from_spec(spec);
    let t = Instant::now();
    let kr = kernel_compare(ring, grams, pairs, seed)?;
    report.check(
        "kernel",
        format!("{name}: kernel termwise at {pairs} exact pairs through degree {}", kr.degree_cap),
        "sum_i f_i(x) conj(f_i(y)) over R^p = (T/2)^p / ||mu_Y^p||^2",
        kr.exact_failures.is_empty(),
        Some(json!(kr.exact_failures)),
        t,
    );
    let t = Instant::now();
    report.check(
        "kernel",
        format!("{name}: float kernel deviation below {float_tol:e}"),
        "orthonormal basis with float square roots, deviation relative to sum_i |f_i(x) f_i(y)|",
        kr.max_float_deviation < float_tol,
        Some(json!({"max_relative_deviation": kr.max_float_deviation})),
        t,
    );
    report.info(
        "kernel",
        format!("{name}: float kernel deviation"),
        "relative to sum_i |f_i(x) f_i(y)| and to |K(x, y)|",
        json!({ "term_scale": kr.max_float_deviation, "value_scale": kr.max_value_deviation }),
    );

    // Hypergeometric coefficients from the Gram-computed norms.
    let t = Instant::now();
    let mut ok = true;
    let mut rows = Vec::new();
    for p in 0..grams.len() {
        let norm = gram_norm_mu_y(ring, grams, p)?;
        let four_p = Rational::from_integer(num_bigint::BigInt::from(4).pow(p as u32));
        let coef = Rational::one() / (four_p * &norm);
        ok &= coef == ctx.hypergeometric_coefficient(p);
        rows.push(json!({"p": p, "coefficient": coef.to_string()}));
    }
    report.check(
        "kernel",
        format!("{name}: kernel is 1F2((m+3)/2; 1+eps, 1-eps+m/2; 2T)"),
        "1 / (4^p ||mu_Y^p||^2) = ((m+3)/2)_p / ((1+eps)_p (1-eps+m/2)_p p!)",
        ok,
        Some(json!(rows)),
        t,
    );

    if name == "sp2" {
        let t = Instant::now();
        let mut ok = true;
        let mut rows = Vec::new();
        for p in 0..grams.len() {
            let norm = gram_norm_mu_y(ring, grams, p)?;
            let two_p = Rational::from_integer(num_bigint::BigInt::from(2).pow(p as u32));
            let lhs = Rational::one() / (two_p * norm);
            let rhs = Rational::from_integer(num_bigint::BigInt::from(8).pow(p as u32)) / crate::constants::factorial(2 * p);
            ok &= lhs == rhs;
            rows.push(json!({"p": p, "kernel": lhs.to_string(), "cosh": rhs.to_string()}));
        }
        report.check(
            "kernel",
            format!("sp2: kernel equals cosh(sqrt(8T)) through degree {}", grams.len() - 1),
            "1F2(3/2; 1/2, 3/2; 2T) = cosh(sqrt(8T))",
            ok,
            Some(json!(rows)),
            t,
        );
    }
    Ok(kr)
}

/// `||mu_Y^p||^2` read off the Gram matrix.
pub fn gram_norm_mu_y(ring: &OrbitRing, grams: &[Matrix<Qi>], p: usize) -> Result<Rational> {
    let f = ring.pow(&ring.mu_y(), p)?;
    let g = Graded::from_element(ring, &f);
    let v = inner_graded(grams, &g, &g);
    qi_real(&v).ok_or_else(|| Error::Inconsistent(format!("norm {v} is not real")))
}

/// Gram matrix of the so(6) form on the image of the sl(4) standard basis
/// under `mu_x -> mu_{phi x}`. `phi` has the so(6) coordinates of the image of
/// the `j`-th sl(4) basis element in column `j`.
pub fn transported_gram(sl: &OrbitRing, so: &OrbitRing, so_gram: &Matrix<Qi>, phi: &Matrix<Qi>, d: usize) -> Result<Matrix<Qi>> {
    let images: Vec<Polynomial<Qi>> = (0..sl.nvars()).map(|j| Polynomial::linear(&phi.column(j))).collect();
    let cols: Vec<Vec<Qi>> = (0..sl.dim(d))
        .map(|k| {
            let m = sl.bases[d].basis_monomial(k).clone();
            let p = Polynomial::monomial(m, Qi::one()).substitute(&images);
            so.normal_form_in_degree(&p, d).map(|e| e.coords)
        })
        .collect::<Result<_>>()?;
    let dim = so.dim(d);
    let m = Matrix::from_fn(dim, cols.len(), |i, a| cols[a][i].clone());
    let conj_m = m.map(|v| v.conj());
    matmul_qi(&m.transpose(), &matmul_qi(so_gram, &conj_m)?)
}

/// Sorted pivot strings, for multiset comparison.
pub fn pivot_multiset(m: &Matrix<Qi>) -> Vec<String> {
    let mut v: Vec<String> = m.hermitian_pivots().unwrap_or_default().iter().map(format_qi).collect();
    v.sort();
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::build_named;
    use crate::scalar::{qi, rat};
    use std::sync::Arc;

    #[test]
    fn sl4_and_so6_forms_agree() {
        let sl = OrbitRing::build(Arc::new(build_named("sl4").unwrap()), 2, 3, 1.25).unwrap();
        let so = OrbitRing::build(Arc::new(build_named("so6").unwrap()), 2, 3, 1.25).unwrap();
        let ls = LambdaFamily::solve(&sl, 2, 3).unwrap();
        let lo = LambdaFamily::solve(&so, 2, 3).unwrap();
        let phi = crate::lie::sl4_to_so6(&sl.spec, &so.spec).unwrap();
        for d in 0..=2 {
            let gs = gram_matrix(&sl, &ls, d).unwrap();
            let go = gram_matrix(&so, &lo, d).unwrap();
            let tr = transported_gram(&sl, &so, &go, &phi, d).unwrap();
            assert_eq!(tr, gs, "degree {d}");
            assert_eq!(pivot_multiset(&tr), pivot_multiset(&gs));
        }
    }

    #[test]
    fn sl3_unitarity_and_kernel() {
        let ring = OrbitRing::build(Arc::new(build_named("sl3").unwrap()), 3, 3, 1.25).unwrap();
        let lam = LambdaFamily::solve(&ring, 3, 3).unwrap();
        let alg = StarAlgebra::new(&ring, &lam).unwrap();
        let (a, b) = inner(&alg, &ring.mu_y(), &ring.mu_y()).unwrap();
        assert_eq!((a.clone(), b), (qi(3, 16), qi(3, 16)));
        let y2 = ring.pow(&ring.mu_y(), 2).unwrap();
        assert_eq!(inner(&alg, &y2, &y2).unwrap().0, qi(5, 32));
        let mut rep = Report::default();
        let grams = verify_gram(&alg, 3, 1, &mut rep).unwrap();
        let mats: Vec<_> = grams.iter().map(|g| g.matrix.clone()).collect();
        skew_adjoint_check(&alg, &mats, 20, 2, &mut rep).unwrap();
        verify_kernel(&ring, &mats, 3, 4, 1e-12, &mut rep).unwrap();
        let fails: Vec<_> = rep.failures().collect();
        assert!(fails.is_empty(), "{fails:?}");
        assert_eq!(ConstantsContext::from_spec(&ring.spec).norm_closed(1), rat(3, 16));
    }
}

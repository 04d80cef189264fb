//! Closed-form constant families and checks of the recursions they satisfy.
//!
//! Notation: `d_p = p + (m+1)/2`, `q_p = (p + m/2 + eps)(p + m/2 - eps)`,
//! `nu_p = (p + eps)(p - eps + m/2)`, `gamma_p = p d_{p-1} nu_p`,
//! `phi_p = -1 / (4 d_p (d_p + 1))`, `zeta_p = phi_{p-1} gamma_p`.

use std::time::Instant;

use num_traits::{One, Signed, Zero};
use serde_json::json;

use crate::lie::AlgebraSpec;
use crate::report::Report;
use crate::scalar::{format_rational, rat, Rational};

/// The two case parameters `m` and `epsilon`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantsContext {
    pub m: Rational,
    pub epsilon: Rational,
}

fn r(p: usize) -> Rational {
    Rational::from_integer((p as i64).into())
}

fn ri(p: i64) -> Rational {
    Rational::from_integer(p.into())
}

/// Rising factorial `(a)_p`.
pub fn pochhammer(a: &Rational, p: usize) -> Rational {
    (0..p).fold(Rational::one(), |acc, k| acc * (a + r(k)))
}

pub fn factorial(p: usize) -> Rational {
    (1..=p).fold(Rational::one(), |acc, k| acc * r(k))
}

impl ConstantsContext {
    pub fn new(m: Rational, epsilon: Rational) -> Self {
        ConstantsContext { m, epsilon }
    }

    pub fn from_spec(spec: &AlgebraSpec) -> Self {
        Self::new(spec.m.clone(), spec.epsilon.clone())
    }

    /// The symplectic fit: `m = n - 1`, `epsilon = -1/2` for sp(2n).
    pub fn symplectic(n: usize) -> Self {
        Self::new(r(n) - Rational::one(), rat(-1, 2))
    }

    fn half_m(&self) -> Rational {
        &self.m / ri(2)
    }

    pub fn d(&self, p: i64) -> Rational {
        ri(p) + (&self.m + Rational::one()) / ri(2)
    }

    pub fn q(&self, p: i64) -> Rational {
        let b = ri(p) + self.half_m();
        (&b + &self.epsilon) * (&b - &self.epsilon)
    }

    pub fn nu(&self, p: i64) -> Rational {
        (ri(p) + &self.epsilon) * (ri(p) - &self.epsilon + self.half_m())
    }

    pub fn gamma(&self, p: usize) -> Rational {
        let p = p as i64;
        ri(p) * self.d(p - 1) * self.nu(p)
    }

    pub fn phi(&self, p: usize) -> Rational {
        let d = self.d(p as i64);
        -Rational::one() / (ri(4) * &d * (d + Rational::one()))
    }

    /// Coefficient of `mu_X^{p-1}` in `Lambda^Y(mu_X^p)`.
    pub fn zeta(&self, p: usize) -> Rational {
        assert!(p >= 1, "zeta is defined for p >= 1");
        self.phi(p - 1) * self.gamma(p)
    }

    /// The alternative `-gamma_p / ((2p+m+1)(2p+m+3))`, kept for comparison.
    pub fn zeta_alternative(&self, p: usize) -> Rational {
        let two_p = r(2 * p);
        -self.gamma(p) / ((&two_p + &self.m + ri(1)) * (&two_p + &self.m + ri(3)))
    }

    pub fn alpha(&self, s: usize, t: usize) -> Rational {
        let g = self.gamma(s);
        let (s, t) = (r(s), r(t));
        g + rat(1, 2) * &s * &t * (ri(2) * &s + &t + &self.m)
    }

    pub fn beta(&self, s: usize, t: usize) -> Rational {
        let (s, t) = (r(s), r(t));
        -rat(1, 4) * (&s - ri(1)) * &s * &t * (ri(2) * &s + &t + &self.m)
    }

    /// `alpha` in the form `gamma_s + s (q_{s+t} - q_s) / 2`.
    pub fn alpha_via_q(&self, s: usize, t: usize) -> Rational {
        let (si, ti) = (s as i64, t as i64);
        self.gamma(s) + rat(1, 2) * ri(si) * (self.q(si + ti) - self.q(si))
    }

    /// `beta` in the form `-s (s-1) (q_{s+t} - q_s) / 4`.
    pub fn beta_via_q(&self, s: usize, t: usize) -> Rational {
        let (si, ti) = (s as i64, t as i64);
        -rat(1, 4) * ri(si) * ri(si - 1) * (self.q(si + ti) - self.q(si))
    }

    /// `lambda_p = 4 d_p (d_p + 1) phi_p`; identically `-1`.
    pub fn lambda(&self, p: usize) -> Rational {
        let d = self.d(p as i64);
        ri(4) * &d * (d + Rational::one()) * self.phi(p)
    }

    /// `||mu_Y^p||^2` as `p! (1+eps)_p (1-eps+m/2)_p / (4^p ((m+3)/2)_p)`.
    pub fn norm_closed(&self, p: usize) -> Rational {
        let one = Rational::one();
        factorial(p)
            * pochhammer(&(&one + &self.epsilon), p)
            * pochhammer(&(&one - &self.epsilon + self.half_m()), p)
            / (ri(4).pow(p as i32) * pochhammer(&((&self.m + ri(3)) / ri(2)), p))
    }

    /// `||mu_Y^p||^2` as `prod_{i<=p} gamma_i / ((2i+m-1)(2i+m+1))`.
    pub fn norm_product(&self, p: usize) -> Rational {
        (1..=p).fold(Rational::one(), |acc, i| {
            let two_i = r(2 * i);
            acc * self.gamma(i) / ((&two_i + &self.m - ri(1)) * (&two_i + &self.m + ri(1)))
        })
    }

    /// Coefficient of `(2T)^p` in `1F2((m+3)/2; 1+eps, 1-eps+m/2; 2T)`.
    pub fn hypergeometric_coefficient(&self, p: usize) -> Rational {
        let one = Rational::one();
        pochhammer(&((&self.m + ri(3)) / ri(2)), p)
            / (pochhammer(&(&one + &self.epsilon), p)
                * pochhammer(&(&one - &self.epsilon + self.half_m()), p)
                * factorial(p))
    }

    /// The closed-form Casimir scalar `-(1+eps)(m+2-2eps) N / (4(m+3))`.
    pub fn casimir_closed(&self, dim: usize) -> Rational {
        let one = Rational::one();
        -(&one + &self.epsilon) * (&self.m + ri(2) - ri(2) * &self.epsilon) * r(dim)
            / (ri(4) * (&self.m + ri(3)))
    }

    /// `2 zeta_1 N`.
    pub fn casimir_from_zeta(&self, dim: usize) -> Rational {
        ri(2) * self.zeta(1) * r(dim)
    }
}

/// One row of the exported constants table.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantsRow {
    pub p: usize,
    pub d: Rational,
    pub nu: Rational,
    pub gamma: Rational,
    pub phi: Rational,
    pub zeta: Option<Rational>,
    pub alpha_p1: Rational,
    pub beta_p1: Rational,
    pub norm: Rational,
}

pub fn constants_table(ctx: &ConstantsContext, p_max: usize) -> Vec<ConstantsRow> {
    (0..=p_max)
        .map(|p| ConstantsRow {
            p,
            d: ctx.d(p as i64),
            nu: ctx.nu(p as i64),
            gamma: ctx.gamma(p),
            phi: ctx.phi(p),
            zeta: (p >= 1).then(|| ctx.zeta(p)),
            alpha_p1: ctx.alpha(p, 1),
            beta_p1: ctx.beta(p, 1),
            norm: ctx.norm_closed(p),
        })
        .collect()
}

pub const CSV_HEADER: &str = "p,d_p,nu_p,gamma_p,phi_p,zeta_p,alpha_p1,beta_p1,norm_muY_p";

pub fn table_csv(rows: &[ConstantsRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let z = row.zeta.as_ref().map(format_rational).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            row.p,
            format_rational(&row.d),
            format_rational(&row.nu),
            format_rational(&row.gamma),
            format_rational(&row.phi),
            z,
            format_rational(&row.alpha_p1),
            format_rational(&row.beta_p1),
            format_rational(&row.norm)
        ));
    }
    out
}

/// The same table as JSON, rationals as `n/d` strings.
pub fn table_json(rows: &[ConstantsRow]) -> serde_json::Value {
    let f = format_rational;
    json!(rows
        .iter()
        .map(|row| json!({
            "p": row.p,
            "d_p": f(&row.d),
            "nu_p": f(&row.nu),
            "gamma_p": f(&row.gamma),
            "phi_p": f(&row.phi),
            "zeta_p": row.zeta.as_ref().map(f),
            "alpha_p1": f(&row.alpha_p1),
            "beta_p1": f(&row.beta_p1),
            "norm_muY_p": f(&row.norm),
        }))
        .collect::<Vec<_>>())
}

fn wit(items: &[(&str, &Rational)]) -> serde_json::Value {
    let map: serde_json::Map<String, serde_json::Value> = items
        .iter()
        .map(|(k, v)| (k.to_string(), json!(format_rational(v))))
        .collect();
    serde_json::Value::Object(map)
}

/// Check the recursions among `phi`, `gamma`, `alpha`, `beta`. Each
/// identity gets one record; a failure carries the first witness.
pub fn verify_recursions(ctx: &ConstantsContext, p_max: usize, report: &mut Report) {
    const SUITE: &str = "scalars";
    let tag = format!("m={},eps={}", format_rational(&ctx.m), format_rational(&ctx.epsilon));

    let mut run = |name: &str, anchor: &str, f: &mut dyn FnMut() -> Option<serde_json::Value>| {
        let t = Instant::now();
        let w = f();
        report.check(SUITE, format!("{name} [{tag}]"), anchor, w.is_none(), w, t);
    };

    run(
        "phi recursion, alpha part",
        "phi_{p-1}(a_{s,t}-a_{t,s}) - phi_p(a_{s+1,t}-a_{t+1,s}) = (s-t)/2, s,t >= 0",
        &mut || {
            for s in 0..=p_max {
                for t in 0..=p_max - s {
                    let p = s + t;
                    if p == 0 {
                        continue;
                    }
                    let lhs = ctx.phi(p - 1) * (ctx.alpha(s, t) - ctx.alpha(t, s))
                        - ctx.phi(p) * (ctx.alpha(s + 1, t) - ctx.alpha(t + 1, s));
                    let rhs = (r(s) - r(t)) / ri(2);
                    if lhs != rhs {
                        return Some(json!({"s": s, "t": t, "lhs": format_rational(&lhs), "rhs": format_rational(&rhs)}));
                    }
                }
            }
            None
        },
    );
    run(
        "phi recursion, beta part",
        "phi_{p-1}(b_{s,t}-b_{t,s}) - phi_p(b_{s+1,t}-b_{t+1,s}) = 0, s,t >= 1",
        &mut || {
            for s in 1..=p_max {
                for t in 1..=p_max.saturating_sub(s) {
                    let p = s + t;
                    let lhs = ctx.phi(p - 1) * (ctx.beta(s, t) - ctx.beta(t, s))
                        - ctx.phi(p) * (ctx.beta(s + 1, t) - ctx.beta(t + 1, s));
                    if !lhs.is_zero() {
                        return Some(json!({"s": s, "t": t, "lhs": format_rational(&lhs)}));
                    }
                }
            }
            None
        },
    );
    run(
        "beta antisymmetrizations",
        "b_{s,t}-b_{t,s} = -st(s-t)(2s+2t+m-1)/4 and b_{s+1,t}-b_{t+1,s} = -st(s-t)(2s+2t+m+3)/4",
        &mut || {
            for s in 0..=p_max {
                for t in 0..=p_max - s {
                    let (sr, tr) = (r(s), r(t));
                    let base = -rat(1, 4) * &sr * &tr * (&sr - &tr);
                    let e1 = &base * (ri(2) * (&sr + &tr) + &ctx.m - ri(1));
                    let e2 = &base * (ri(2) * (&sr + &tr) + &ctx.m + ri(3));
                    let a1 = ctx.beta(s, t) - ctx.beta(t, s);
                    let a2 = ctx.beta(s + 1, t) - ctx.beta(t + 1, s);
                    if a1 != e1 || a2 != e2 {
                        return Some(json!({"s": s, "t": t}));
                    }
                }
            }
            None
        },
    );
    run(
        "beta vanishing",
        "b_{s,t} = 0 for s in {0,1} or t = 0",
        &mut || {
            for k in 0..=p_max {
                for (s, t) in [(0, k), (1, k), (k, 0)] {
                    if !ctx.beta(s, t).is_zero() {
                        return Some(json!({"s": s, "t": t}));
                    }
                }
            }
            None
        },
    );
    run(
        "ratio recursion",
        "phi_p = (2p+m-1)/(2p+m+3) phi_{p-1}, p >= 3",
        &mut || {
            for p in 3..=p_max {
                let rhs = (r(2 * p) + &ctx.m - ri(1)) / (r(2 * p) + &ctx.m + ri(3)) * ctx.phi(p - 1);
                if ctx.phi(p) != rhs {
                    return Some(wit(&[("phi_p", &ctx.phi(p)), ("rhs", &rhs)]));
                }
            }
            None
        },
    );
    run(
        "closed solution of the ratio recursion",
        "phi_p = omega / (4 d_p (d_p+1)) with omega = (m+5)(m+7) phi_2 = -1, p >= 2",
        &mut || {
            let omega = (&ctx.m + ri(5)) * (&ctx.m + ri(7)) * ctx.phi(2);
            if omega != -Rational::one() {
                return Some(wit(&[("omega", &omega)]));
            }
            for p in 2..=p_max {
                let d = ctx.d(p as i64);
                let rhs = &omega / (ri(4) * &d * (&d + ri(1)));
                let alt = ctx.phi(2) * (&ctx.m + ri(5)) * (&ctx.m + ri(7))
                    / ((r(2 * p) + &ctx.m + ri(1)) * (r(2 * p) + &ctx.m + ri(3)));
                if ctx.phi(p) != rhs || ctx.phi(p) != alt {
                    return Some(json!({"p": p}));
                }
            }
            None
        },
    );
    run(
        "gamma factorization",
        "gamma_p = p d_{p-1} nu_p and gamma_{p+1} - a_{1,p} = p (d_p+1)(nu_p + 2 d_p)",
        &mut || {
            for p in 0..=p_max {
                let pi = p as i64;
                let g = ri(pi) * ctx.d(pi - 1) * ctx.nu(pi);
                let lhs = ctx.gamma(p + 1) - ctx.alpha(1, p);
                let rhs = ri(pi) * (ctx.d(pi) + ri(1)) * (ctx.nu(pi) + ri(2) * ctx.d(pi));
                if g != ctx.gamma(p) || lhs != rhs {
                    return Some(json!({"p": p}));
                }
            }
            None
        },
    );
    run(
        "phi recursion from t = 0",
        "phi_{p-1} gamma_p - phi_p (gamma_{p+1} - a_{1,p}) = p/2 and phi_p = (nu_p (d_p-1) phi_{p-1} - 1/2) / ((nu_p + 2 d_p)(d_p + 1))",
        &mut || {
            for p in 1..=p_max {
                let pi = p as i64;
                let lhs = ctx.phi(p - 1) * ctx.gamma(p) - ctx.phi(p) * (ctx.gamma(p + 1) - ctx.alpha(1, p));
                let d = ctx.d(pi);
                let nu = ctx.nu(pi);
                let rec = (&nu * (&d - ri(1)) * ctx.phi(p - 1) - rat(1, 2)) / ((&nu + ri(2) * &d) * (&d + ri(1)));
                if lhs != r(p) / ri(2) || rec != ctx.phi(p) {
                    return Some(json!({"p": p}));
                }
            }
            None
        },
    );
    run(
        "lambda recursion",
        "nu_p (lambda_p - lambda_{p-1}) = -2 d_p (lambda_p + 1) with lambda_p = -1",
        &mut || {
            for p in 0..=p_max {
                if ctx.lambda(p) != -Rational::one() {
                    return Some(json!({"p": p}));
                }
                if p >= 1 {
                    let pi = p as i64;
                    let lhs = ctx.nu(pi) * (ctx.lambda(p) - ctx.lambda(p - 1));
                    let rhs = -ri(2) * ctx.d(pi) * (ctx.lambda(p) + ri(1));
                    if lhs != rhs {
                        return Some(json!({"p": p}));
                    }
                }
            }
            None
        },
    );
    run(
        "alpha and beta through q",
        "a_{s,t} - gamma_s = s (q_{s+t} - q_s)/2 and b_{s,t} = -s(s-1)(q_{s+t} - q_s)/4",
        &mut || {
            for s in 0..=p_max {
                for t in 0..=p_max {
                    if ctx.alpha(s, t) != ctx.alpha_via_q(s, t) || ctx.beta(s, t) != ctx.beta_via_q(s, t) {
                        return Some(json!({"s": s, "t": t}));
                    }
                }
            }
            None
        },
    );
    run(
        "positivity",
        "d_p > 0 for p >= 0 and gamma_p > 0 for p >= 1",
        &mut || {
            for p in 0..=p_max {
                if !ctx.d(p as i64).is_positive() || (p >= 1 && !ctx.gamma(p).is_positive()) {
                    return Some(json!({"p": p}));
                }
            }
            None
        },
    );
    run(
        "zeta as a composition",
        "zeta_p = phi_{p-1} gamma_p = -gamma_p / ((2p+m-1)(2p+m+1))",
        &mut || {
            for p in 1..=p_max {
                let rhs = -ctx.gamma(p) / ((r(2 * p) + &ctx.m - ri(1)) * (r(2 * p) + &ctx.m + ri(1)));
                if ctx.zeta(p) != rhs {
                    return Some(json!({"p": p}));
                }
            }
            None
        },
    );
    run(
        "norm closed form",
        "prod_{i<=p} gamma_i/((2i+m-1)(2i+m+1)) = p!(1+eps)_p(1-eps+m/2)_p / (4^p ((m+3)/2)_p)",
        &mut || {
            for p in 0..=p_max {
                if ctx.norm_product(p) != ctx.norm_closed(p) {
                    return Some(wit(&[("product", &ctx.norm_product(p)), ("closed", &ctx.norm_closed(p))]));
                }
            }
            None
        },
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sl3() -> ConstantsContext {
        ConstantsContext::new(rat(1, 1), rat(0, 1))
    }

    #[test]
    fn sample_values() {
        let c = sl3();
        assert_eq!(c.gamma(0), rat(0, 1));
        assert_eq!(c.gamma(1), rat(3, 2));
        assert_eq!(c.gamma(2), rat(20, 1));
        assert_eq!(ConstantsContext::symplectic(1).gamma(1), rat(3, 8));
        assert_eq!(c.phi(0), rat(-1, 8));
        assert_eq!(c.phi(1), rat(-1, 24));
        assert_eq!(c.zeta(1), rat(-3, 16));
        assert_eq!(c.zeta(2), rat(-5, 6));
        assert_eq!(c.alpha(1, 1), rat(7, 2));
        assert_eq!(c.beta(2, 1), rat(-3, 1));
        assert_eq!((c.alpha(2, 1), c.beta(2, 1)), (rat(26, 1), rat(-3, 1)));
        assert_eq!(c.norm_closed(1), rat(3, 16));
        assert_eq!(c.norm_closed(2), rat(5, 32));
        assert_eq!(c.casimir_from_zeta(8), rat(-3, 1));
        assert_eq!(c.casimir_closed(8), rat(-3, 2));
        let sp = ConstantsContext::symplectic(1);
        assert_eq!(sp.norm_closed(2), rat(3, 32));
        for p in 1..=8usize {
            let pi = p as i64;
            assert_eq!(sp.zeta(p), rat(-pi * (2 * pi - 1), 8));
        }
        assert_eq!(sp.zeta(2), rat(-3, 4));
    }

    #[test]
    fn hand_checked_recursion_instances() {
        let c = sl3();
        let r1 = c.phi(0) * (c.alpha(1, 0) - c.alpha(0, 1)) - c.phi(1) * (c.alpha(2, 0) - c.alpha(1, 1));
        assert_eq!(r1, rat(1, 2));
        let r2 = c.phi(2) * (c.beta(2, 1) - c.beta(1, 2)) - c.phi(3) * (c.beta(3, 1) - c.beta(2, 2));
        assert!(r2.is_zero());
    }

    #[test]
    fn all_recursions_pass() {
        let mut rep = Report::default();
        for (m, e) in [(rat(1, 1), rat(0, 1)), (rat(2, 1), rat(0, 1)), (rat(2, 1), rat(1, 1)), (rat(3, 1), rat(1, 1)), (rat(4, 1), rat(1, 1)), (rat(0, 1), rat(-1, 2)), (rat(1, 1), rat(-1, 2))] {
            verify_recursions(&ConstantsContext::new(m, e), 12, &mut rep);
        }
        assert!(rep.passed(), "{:?}", rep.failures().collect::<Vec<_>>());
    }

    #[test]
    fn coincidence_epsilon_choice() {
        let a = ConstantsContext::new(rat(2, 1), rat(0, 1));
        let b = ConstantsContext::new(rat(2, 1), rat(1, 1));
        for p in 0..=12 {
            assert_eq!(a.gamma(p), b.gamma(p));
        }
    }

    #[test]
    fn alternative_zeta_differs() {
        let c = sl3();
        assert_ne!(c.zeta(1), c.zeta_alternative(1));
    }

    #[test]
    fn hypergeometric_matches_norms() {
        for c in [sl3(), ConstantsContext::symplectic(1), ConstantsContext::symplectic(2)] {
            for p in 0..8 {
                let lhs = c.hypergeometric_coefficient(p) * ri(2).pow(p as i32);
                let rhs = Rational::one() / (c.norm_closed(p) * ri(2).pow(p as i32));
                assert_eq!(lhs, rhs);
            }
        }
        assert_eq!(sl3().hypergeometric_coefficient(1) * ri(2), rat(8, 3));
    }
}

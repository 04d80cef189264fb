//! Acceptance run: one PASS/FAIL line per criterion.

use std::sync::Arc;
use std::time::{Duration, Instant};

use minorbit::constants::{constants_table, verify_recursions, ConstantsContext};
use minorbit::lambda::{casimir_action, verify_lambda, LambdaFamily};
use minorbit::lie::{build_named, sl4_to_so6};
use minorbit::linalg::Matrix;
use minorbit::moyal::{verify_gamma_oracle, verify_moyal_axioms};
use minorbit::orbit::OrbitRing;
use minorbit::report::{Report, Status};
use minorbit::scalar::{format_rational, rat, Qi};
use minorbit::star::{verify_star, StarAlgebra};
use minorbit::unitary::{gram_norm_mu_y, pivot_multiset, skew_adjoint_check, transported_gram, verify_gram, verify_kernel};
use minorbit::Result;

const SEED: u64 = 20;

struct Built {
    ring: OrbitRing,
    lambda: LambdaFamily,
}

fn build(name: &str, cap: usize) -> Result<Built> {
    let ring = OrbitRing::build(Arc::new(build_named(name)?), cap, SEED, 1.25)?;
    let lambda = LambdaFamily::solve(&ring, cap, SEED)?;
    Ok(Built { ring, lambda })
}

fn grams_of(b: &Built, report: &mut Report) -> Result<Vec<Matrix<Qi>>> {
    let alg = StarAlgebra::new(&b.ring, &b.lambda)?;
    Ok(verify_gram(&alg, b.lambda.cap(), SEED, report)?.into_iter().map(|g| g.matrix).collect())
}

fn failures(r: &Report) -> Vec<String> {
    r.failures().map(|c| format!("{} {}", c.name, c.witness.as_ref().map(|w| w.to_string()).unwrap_or_default())).collect()
}

fn count(r: &Report, needle: &str) -> usize {
    r.checks.iter().filter(|c| c.status == Status::Pass && c.name.contains(needle)).count()
}

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { ok, detail: detail.into() })
}

fn criterion(n: usize, title: &str, budget: Option<Duration>, f: impl FnOnce() -> Result<Outcome>) -> bool {
    let t = Instant::now();
    let (mut ok, mut detail) = match f() {
        Ok(o) => (o.ok, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    let elapsed = t.elapsed();
    if let Some(b) = budget {
        if elapsed > b {
            ok = false;
            detail = format!("{detail}; over the {:.0} s budget", b.as_secs_f64());
        }
    }
    println!(
        "criterion {n:>2} {}  {title}  ({:.2} s) {detail}",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    ok
}

fn main() {
    let t0 = Instant::now();
    let mut results = Vec::new();

    results.push(criterion(1, "scalar recursions, s + t <= 12", Some(Duration::from_secs(1)), || {
        let mut r = Report::default();
        let mut contexts: Vec<ConstantsContext> = ["sl3", "sl4", "so6", "so7", "so8"]
            .iter()
            .map(|n| Ok(ConstantsContext::from_spec(&build_named(n)?)))
            .collect::<Result<_>>()?;
        contexts.push(ConstantsContext::symplectic(1));
        contexts.push(ConstantsContext::symplectic(2));
        for ctx in &contexts {
            verify_recursions(ctx, 12, &mut r);
        }
        let f = failures(&r);
        outcome(f.is_empty(), format!("{} checks over {} parameter sets {f:?}", r.summary().pass, contexts.len()))
    }));

    results.push(criterion(2, "Moyal product on sp2 and sp4", Some(Duration::from_secs(30)), || {
        let mut r = Report::default();
        verify_moyal_axioms(1, 6, 100, SEED, &mut r)?;
        verify_moyal_axioms(2, 6, 100, SEED, &mut r)?;
        let f = failures(&r);
        let needed = ["C_2 on quadratic generators", "associativity on 100", "parity on 100", "equivariance"];
        let present = needed.iter().all(|n| count(&r, n) == 2);
        outcome(f.is_empty() && present, format!("{} checks, 100 triples and pairs each {f:?}", r.summary().pass))
    }));

    results.push(criterion(3, "zeta convention against the Weyl model", Some(Duration::from_secs(5)), || {
        let mut r = Report::default();
        verify_gamma_oracle(&[1, 2], 8, &mut r)?;
        let alt_unequal = r
            .checks
            .iter()
            .filter(|c| c.status == Status::Info)
            .all(|c| c.witness.as_ref().is_some_and(|w| w["equal_to_oracle"] == false));
        let f = failures(&r);
        outcome(f.is_empty() && alt_unequal && r.summary().pass == 2, format!("p <= 8, n in {{1, 2}}; alternative candidate unequal: {alt_unequal} {f:?}"))
    }));

    // Shared pipelines.
    let t = Instant::now();
    let sl3 = build("sl3", 3);
    let sl4 = build("sl4", 2);
    let so6 = build("so6", 2);
    let sp2 = build("sp2", 6);
    let build_time = t.elapsed();
    let all = |f: &dyn Fn(&Built, &Built, &Built, &Built) -> Result<Outcome>| -> Result<Outcome> {
        match (&sl3, &sl4, &so6, &sp2) {
            (Ok(a), Ok(b), Ok(c), Ok(d)) => f(a, b, c, d),
            _ => Err(minorbit::Error::Inconsistent("pipeline build failed".into())),
        }
    };

    results.push(criterion(4, "Lambda solver on sl3 (cap 3), sl4 and so6 (cap 2)", Some(Duration::from_secs(1800)), || {
        all(&|a, b, c, _| {
            let mut r = Report::default();
            for x in [a, b, c] {
                verify_lambda(&x.ring, &x.lambda, SEED, &mut r)?;
            }
            let lines = [a, b, c].iter().all(|x| x.lambda.slices.iter().all(|s| s.nullity == 1));
            let f = failures(&r);
            outcome(
                f.is_empty() && lines && count(&r, "eta^[x,y] / 4") == 3 && count(&r, "2 zeta_1 kappa") == 3,
                format!("{} checks, build {:.1} s {f:?}", r.summary().pass, build_time.as_secs_f64()),
            )
        })
    }));

    results.push(criterion(5, "star product on sl3", None, || {
        all(&|a, _, _, _| {
            let mut r = Report::default();
            let alg = StarAlgebra::new(&a.ring, &a.lambda)?;
            verify_star(&alg, 3, 25, SEED, &mut r)?;
            let f = failures(&r);
            outcome(f.is_empty() && count(&r, "associativity on 25") == 1 && count(&r, "G-equivariance") == 1, format!("{} checks {f:?}", r.summary().pass))
        })
    }));

    results.push(criterion(6, "Lambda^Y on mu_X^s mu_Y^t", None, || {
        all(&|a, b, c, d| {
            let mut r = Report::default();
            for x in [a, b, c, d] {
                verify_lambda(&x.ring, &x.lambda, SEED, &mut r)?;
            }
            let hits: Vec<bool> = r.checks.iter().filter(|c| c.name.contains("Lambda^Y on mu_X^s mu_Y^t")).map(|c| c.status == Status::Pass).collect();
            outcome(hits.len() == 4 && hits.iter().all(|x| *x), format!("sl3 s+t <= 3, sl4/so6 s+t <= 2, sp2 s+t <= 6: {hits:?}"))
        })
    }));

    results.push(criterion(7, "unitarity: positivity, norms, skew-adjointness", None, || {
        all(&|a, b, c, d| {
            let mut r = Report::default();
            let mut values = Vec::new();
            for x in [a, b, c, d] {
                let grams = grams_of(x, &mut r)?;
                let alg = StarAlgebra::new(&x.ring, &x.lambda)?;
                skew_adjoint_check(&alg, &grams, 50, SEED, &mut r)?;
                if x.ring.spec.name() == "sl3" {
                    values = (1..=2).map(|p| gram_norm_mu_y(&x.ring, &grams, p)).collect::<Result<_>>()?;
                }
            }
            let sl3_ok = values == [rat(3, 16), rat(5, 32)];
            let f = failures(&r);
            outcome(
                f.is_empty() && sl3_ok && count(&r, "skew-adjoint on 50") == 4 && count(&r, "norms of mu_Y^p") == 4,
                format!("{} checks; sl3 norms {:?} {f:?}", r.summary().pass, values.iter().map(format_rational).collect::<Vec<_>>()),
            )
        })
    }));

    results.push(criterion(8, "reproducing kernel", None, || {
        all(&|a, _, _, d| {
            let mut r = Report::default();
            let mut dev = 0.0f64;
            for x in [a, d] {
                let mut scratch = Report::default();
                let grams = grams_of(x, &mut scratch)?;
                dev = dev.max(verify_kernel(&x.ring, &grams, 10, SEED, 1e-12, &mut r)?.max_float_deviation);
            }
            let f = failures(&r);
            outcome(
                f.is_empty() && count(&r, "exact pairs") == 2 && count(&r, "cosh") == 1,
                format!("10 pairs each on sl3 and sp2, sp2 through degree 6, float deviation {dev:.1e} {f:?}"),
            )
        })
    }));

    results.push(criterion(9, "sl4 and so6 coincidence", None, || {
        all(&|_, b, c, _| {
            let sl_ctx = ConstantsContext::from_spec(&b.ring.spec);
            let so_ctx = ConstantsContext::from_spec(&c.ring.spec);
            let tables = constants_table(&sl_ctx, 12) == constants_table(&so_ctx, 12);
            let mut scratch = Report::default();
            let gs = grams_of(b, &mut scratch)?;
            let go = grams_of(c, &mut scratch)?;
            let phi = sl4_to_so6(&b.ring.spec, &c.ring.spec)?;
            let mut per_degree = Vec::new();
            for d in 0..gs.len() {
                let tr = transported_gram(&b.ring, &c.ring, &go[d], &phi, d)?;
                per_degree.push(tr == gs[d] && pivot_multiset(&tr) == pivot_multiset(&gs[d]));
            }
            outcome(tables && per_degree.iter().all(|x| *x), format!("constants tables equal: {tables}; Gram data per degree: {per_degree:?}"))
        })
    }));

    results.push(criterion(10, "Casimir scalar equals 2 zeta_1 N", None, || {
        all(&|a, b, c, d| {
            let mut rows = Vec::new();
            let mut ok = true;
            for x in [a, b, c, d] {
                let (computed, from_zeta, closed) = casimir_action(&x.ring, &x.lambda)?;
                ok &= computed == from_zeta;
                rows.push(format!(
                    "{}: {} (closed-form candidate {}{})",
                    x.ring.spec.name(),
                    format_rational(&computed),
                    format_rational(&closed),
                    if closed == computed { "" } else { ", differs" }
                ));
            }
            outcome(ok, rows.join("; "))
        })
    }));

    let passed = results.iter().filter(|x| **x).count();
    println!("acceptance: {passed}/{} criteria passed in {:.1} s", results.len(), t0.elapsed().as_secs_f64());
    if passed != results.len() {
        std::process::exit(1);
    }
}

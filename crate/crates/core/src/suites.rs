//! Runs the selected suites in dependency order and collects one report.

use std::sync::Arc;
use std::time::Instant;

use serde_json::json;

use crate::cache::{Cache, CacheEvent};
use crate::config::{RunConfig, Suite};
use crate::constants::{constants_table, table_csv, verify_recursions, ConstantsContext};
use crate::error::Result;
use crate::lambda::{casimir_action, solve_lambda_nullspace, verify_against_moyal, verify_lambda, LambdaFamily};
use crate::lie::{build_named, parse_algebra, sl4_to_so6, verify_structure, Family};
use crate::linalg::Matrix;
use crate::moyal::{verify_gamma_oracle, verify_moyal_axioms};
use crate::orbit::{verify_ring, OrbitRing};
use crate::report::Report;
use crate::scalar::{format_rational, Qi};
use crate::star::{verify_star, StarAlgebra};
use crate::unitary::{
    gram, gram_matrix, kernel_compare, pivot_multiset, skew_adjoint_check, transported_gram, verify_gram, verify_kernel, GramReport,
    KernelReport,
};

/// Recursion range for the scalar suite.
pub const SCALAR_RANGE: usize = 12;
pub const MOYAL_DEGREE: usize = 6;
pub const MOYAL_TRIALS: usize = 100;
pub const GAMMA_ORACLE_MAX: usize = 8;
pub const STAR_TRIPLES: usize = 25;
pub const SKEW_TRIALS: usize = 50;
pub const KERNEL_PAIRS: usize = 10;

/// Ring and `Lambda` for one algebra, built on first use.
struct Pipeline {
    ring: OrbitRing,
    sums: Vec<String>,
    lambda: Option<LambdaFamily>,
    grams: Option<Vec<Matrix<Qi>>>,
}

impl Pipeline {
    fn build(cache: &mut Cache, algebra: &str, config: &RunConfig) -> Result<Self> {
        let spec = Arc::new(build_named(algebra)?);
        let (ring, sums) = cache.ring(spec, config.max_degree, config.seed, config.samples_margin)?;
        Ok(Pipeline { ring, sums, lambda: None, grams: None })
    }

    fn lambda(&mut self, cache: &mut Cache, config: &RunConfig) -> Result<&LambdaFamily> {
        if self.lambda.is_none() {
            self.lambda = Some(cache.lambda(&self.ring, &self.sums, config.max_degree, config.seed)?);
        }
        Ok(self.lambda.as_ref().expect("just built"))
    }

    fn grams(&mut self, cache: &mut Cache, config: &RunConfig) -> Result<&[Matrix<Qi>]> {
        if self.grams.is_none() {
            self.lambda(cache, config)?;
            let lambda = self.lambda.as_ref().expect("built");
            let grams = (0..=lambda.cap()).map(|d| gram_matrix(&self.ring, lambda, d)).collect::<Result<Vec<_>>>()?;
            self.grams = Some(grams);
        }
        Ok(self.grams.as_deref().expect("just built"))
    }
}

fn twin(algebra: &str) -> Option<&'static str> {
    match algebra {
        "sl4" => Some("so6"),
        "so6" => Some("sl4"),
        _ => None,
    }
}

/// Run every suite in `config.suites` and return the report. Errors are
/// reserved for configuration problems; a computation that cannot complete
/// is recorded as a failed check.
pub fn run(config: &RunConfig) -> Result<Report> {
    let mut report = Report::new(serde_json::to_value(config)?);
    let (family, size) = parse_algebra(&config.algebra)?;
    let mut cache = Cache::new(config.cache_dir.clone());
    let mut main: Option<Pipeline> = None;

    for &suite in &config.suites {
        let t = Instant::now();
        let result = run_suite(suite, config, family, size, &mut cache, &mut main, &mut report);
        if let Err(e) = result {
            report.check(suite.name(), format!("{}: suite completed", config.algebra), "computation finished without error", false, Some(json!({ "error": e.to_string() })), t);
        }
    }

    for e in &cache.events {
        report.info("cache", e.entry.clone(), "cached artifact", json!({ "outcome": e.outcome, "cached": e.outcome == "hit" }));
    }
    report.artifacts.extend(cache.checksums.clone());
    Ok(report)
}

fn pipeline<'p>(main: &'p mut Option<Pipeline>, cache: &mut Cache, config: &RunConfig) -> Result<&'p mut Pipeline> {
    if main.is_none() {
        *main = Some(Pipeline::build(cache, &config.algebra, config)?);
    }
    Ok(main.as_mut().expect("just built"))
}

fn run_suite(
    suite: Suite,
    config: &RunConfig,
    family: Family,
    size: usize,
    cache: &mut Cache,
    main: &mut Option<Pipeline>,
    report: &mut Report,
) -> Result<()> {
    let algebra = config.algebra.as_str();
    let seed = config.seed;
    let cap = config.max_degree;
    match suite {
        Suite::Lie => {
            verify_structure(&build_named(algebra)?, report);
            let p = pipeline(main, cache, config)?;
            verify_ring(&p.ring, seed, report)?;
        }
        Suite::Scalars => {
            let spec = build_named(algebra)?;
            let ctx = ConstantsContext::from_spec(&spec);
            verify_recursions(&ctx, SCALAR_RANGE, report);
            let table = constants_table(&ctx, cap);
            report.info("scalars", format!("{algebra}: constants table"), "gamma, phi, zeta, alpha, beta, d, nu, ||mu_Y^p||^2", json!(table_csv(&table)));
            if let Some(other) = twin(algebra) {
                let t = Instant::now();
                let octx = ConstantsContext::from_spec(&build_named(other)?);
                let same = constants_table(&octx, SCALAR_RANGE) == constants_table(&ctx, SCALAR_RANGE);
                report.check("scalars", format!("{algebra}: constants table equals {other}'s"), "sl(4) = so(6): epsilon = 0 and epsilon = 1 give the same constants", same, Some(json!({ "other": table_csv(&constants_table(&octx, cap)) })), t);
            }
        }
        Suite::Moyal => {
            verify_gamma_oracle(&[1, 2], GAMMA_ORACLE_MAX, report)?;
            if family == Family::Sp {
                verify_moyal_axioms(size / 2, MOYAL_DEGREE, MOYAL_TRIALS, seed, report)?;
            }
        }
        Suite::Lambda => {
            let p = pipeline(main, cache, config)?;
            p.lambda(cache, config)?;
            let (ring, lambda) = (&p.ring, p.lambda.as_ref().expect("built"));
            verify_lambda(ring, lambda, seed, report)?;
            casimir_check(ring, lambda, report)?;
            if family == Family::Sp {
                verify_against_moyal(ring, lambda, report)?;
            }
            cross_check_nullspace(ring, lambda, seed, report)?;
        }
        Suite::Star => {
            let p = pipeline(main, cache, config)?;
            p.lambda(cache, config)?;
            let alg = StarAlgebra::new(&p.ring, p.lambda.as_ref().expect("built"))?;
            verify_star(&alg, cap, STAR_TRIPLES, seed, report)?;
        }
        Suite::Gram => {
            let p = pipeline(main, cache, config)?;
            p.lambda(cache, config)?;
            let alg = StarAlgebra::new(&p.ring, p.lambda.as_ref().expect("built"))?;
            let reports = verify_gram(&alg, cap, seed, report)?;
            let grams: Vec<Matrix<Qi>> = reports.iter().map(|r| r.matrix.clone()).collect();
            skew_adjoint_check(&alg, &grams, SKEW_TRIALS, seed, report)?;
            report.info("gram", format!("{algebra}: pivots"), "LDL* pivots per degree", json!(reports));
            p.grams = Some(grams);
            if let Some(other) = twin(algebra) {
                coincidence(config, cache, p, other, report)?;
            }
        }
        Suite::Kernel => {
            let p = pipeline(main, cache, config)?;
            p.grams(cache, config)?;
            verify_kernel(&p.ring, p.grams.as_deref().expect("built"), KERNEL_PAIRS, seed, config.float_tol, report)?;
        }
    }
    Ok(())
}

/// The Casimir scalar from the solved `Lambda` against `2 zeta_1 N`, with the
/// other closed form recorded for comparison.
fn casimir_check(ring: &OrbitRing, lambda: &LambdaFamily, report: &mut Report) -> Result<()> {
    let t = Instant::now();
    let name = ring.spec.name();
    let (computed, from_zeta, closed) = casimir_action(ring, lambda)?;
    report.check(
        "lambda",
        format!("{name}: Casimir acts by 2 zeta_1 N"),
        "sum_i Lambda^{x_i}(mu_{x^i}) = 2 zeta_1 dim g",
        computed == from_zeta,
        Some(json!({ "computed": format_rational(&computed), "2_zeta_1_N": format_rational(&from_zeta) })),
        t,
    );
    report.info(
        "lambda",
        format!("{name}: Casimir closed-form candidate"),
        "-(1+eps)(m+2-2eps) N / (4(m+3)) against the computed value",
        json!({
            "candidate": format_rational(&closed),
            "computed": format_rational(&computed),
            "agrees": closed == computed,
            "open_question": closed != computed,
        }),
    );
    Ok(())
}

/// Re-solve small degrees by the full equivariance nullspace and compare.
fn cross_check_nullspace(ring: &OrbitRing, lambda: &LambdaFamily, seed: u64, report: &mut Report) -> Result<()> {
    let ctx = ConstantsContext::from_spec(&ring.spec);
    let top = if ring.spec.dim() <= 10 { 2 } else { 1 };
    for p in 1..=top.min(lambda.cap()) {
        let t = Instant::now();
        let other = solve_lambda_nullspace(ring, &ctx, p, seed)?;
        let same = other.ops == lambda.slices[p - 1].ops;
        report.check(
            "lambda",
            format!("{}: degree {p} agrees with the full nullspace solve", ring.spec.name()),
            "the intertwiner is unique up to normalization",
            same,
            Some(json!({ "degree": p, "nullity": other.nullity })),
            t,
        );
    }
    Ok(())
}

/// sl(4) and so(6): identical Gram data after transport along the isomorphism.
fn coincidence(config: &RunConfig, cache: &mut Cache, mine: &mut Pipeline, other: &str, report: &mut Report) -> Result<()> {
    let mut theirs = Pipeline::build(cache, other, config)?;
    theirs.grams(cache, config)?;
    mine.grams(cache, config)?;
    let (sl, so): (&Pipeline, &Pipeline) = if other == "so6" { (&*mine, &theirs) } else { (&theirs, &*mine) };
    let phi = sl4_to_so6(&sl.ring.spec, &so.ring.spec)?;
    let sl_grams = sl.grams.as_deref().expect("built");
    let so_grams = so.grams.as_deref().expect("built");
    for d in 0..sl_grams.len().min(so_grams.len()) {
        let t = Instant::now();
        let transported = transported_gram(&sl.ring, &so.ring, &so_grams[d], &phi, d)?;
        let (ps, pt) = (pivot_multiset(&sl_grams[d]), pivot_multiset(&transported));
        report.check(
            "gram",
            format!("sl4 and so6 Gram data agree in degree {d}"),
            "sl(4) = so(6): same form on R^d, same pivot multiset",
            transported == sl_grams[d] && ps == pt,
            Some(json!({ "sl4_pivots": ps, "so6_pivots": pt })),
            t,
        );
    }
    Ok(())
}

/// Gram matrices and pivots for `d <= max_degree`.
pub fn gram_reports(config: &RunConfig) -> Result<Vec<GramReport>> {
    let mut cache = Cache::new(config.cache_dir.clone());
    let mut p = Pipeline::build(&mut cache, &config.algebra, config)?;
    p.lambda(&mut cache, config)?;
    let lambda = p.lambda.as_ref().expect("built");
    (0..=lambda.cap()).map(|d| gram(&p.ring, lambda, d)).collect()
}

/// `degree,index,pivot` rows.
pub fn pivots_csv(reports: &[GramReport]) -> String {
    let mut out = String::from("degree,index,pivot\n");
    for r in reports {
        for (i, v) in r.pivots.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", r.degree, i, v));
        }
    }
    out
}

/// Kernel comparison at `pairs` sample pairs.
pub fn kernel_report(config: &RunConfig, pairs: usize) -> Result<KernelReport> {
    let mut cache = Cache::new(config.cache_dir.clone());
    let mut p = Pipeline::build(&mut cache, &config.algebra, config)?;
    p.grams(&mut cache, config)?;
    kernel_compare(&p.ring, p.grams.as_deref().expect("built"), pairs, config.seed)
}

/// Build (or load) the ring and `Lambda` into the cache.
pub fn warm_cache(config: &RunConfig) -> Result<Vec<CacheEvent>> {
    let mut cache = Cache::new(config.cache_dir.clone());
    let mut p = Pipeline::build(&mut cache, &config.algebra, config)?;
    p.lambda(&mut cache, config)?;
    Ok(cache.events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Overrides;

    #[test]
    fn sp2_moyal_run_passes() {
        let config = Overrides {
            algebra: Some("sp2".into()),
            suites: Some("moyal".into()),
            max_degree: Some(6),
            ..Default::default()
        }
        .resolve()
        .unwrap();
        let r = run(&config).unwrap();
        assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
        assert!(r.checks.iter().any(|c| c.name.contains("C_2")));
    }
}

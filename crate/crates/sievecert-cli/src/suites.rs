//! Verification suites turned into report records.

use crate::config::Config;
use crate::report::{finite, verdict, ClaimRecord, FAIL, FALSIFICATION_PASSED};
use sievecert::buchstab::{build_omega, omega, omega_upper, PiecewiseOmega, EXP_NEG_EULER_GAMMA};
use sievecert::combinatorics::{self, CaseSpec};
use sievecert::decomposition::{self, CaseReport, VerifyOptions, BUDGET};
use sievecert::exponents::{self, certify_with, CertifyOptions, ClaimSpec, Status};
use sievecert::quadrature::OmegaSource;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("unknown {kind} '{id}'")]
    UnknownId { kind: &'static str, id: String },
    #[error("{0}")]
    Engine(String),
}

fn engine<E: std::fmt::Display>(e: E) -> SuiteError {
    SuiteError::Engine(e.to_string())
}

/// Tolerance for the claimed-bound checksum of each decomposition case.
pub const CHECKSUM_TOL: f64 = 1e-4;
/// Allowed deviation of ω(2.5) from its closed form.
pub const OMEGA_CLOSED_FORM_TOL: f64 = 1e-8;
/// Allowed deviation of ω from e^(−γ) for u ≥ 10.
pub const OMEGA_LIMIT_TOL: f64 = 1e-6;

pub fn omega_table(cfg: &Config) -> Result<PiecewiseOmega, SuiteError> {
    build_omega(cfg.omega_u_max, cfg.omega_step).map_err(engine)
}

fn record(id: &str, anchor: &str, kind: &str, value: f64, bound: f64, relation: &str, ok: bool) -> ClaimRecord {
    ClaimRecord {
        id: id.to_string(),
        anchor: anchor.to_string(),
        kind: kind.to_string(),
        value: finite(value),
        err: None,
        bound: Some(bound),
        relation: relation.to_string(),
        status: verdict(ok),
        margin: finite(bound - value),
    }
}

fn eval(t: &PiecewiseOmega, u: f64) -> Result<(f64, f64), SuiteError> {
    omega(t, u).map_err(engine)
}

/// Largest deviation from e^(−γ) over [k, k+1] on a 10⁻³ grid, with the largest error bound there.
fn window_deviation(t: &PiecewiseOmega, k: usize) -> Result<(f64, f64), SuiteError> {
    let mut dev: f64 = 0.0;
    let mut err: f64 = 0.0;
    for i in 0..=1000 {
        let (w, e) = eval(t, k as f64 + i as f64 / 1000.0)?;
        dev = dev.max((w - EXP_NEG_EULER_GAMMA).abs());
        err = err.max(e);
    }
    Ok((dev, err))
}

/// Checks on the tabulated Buchstab function.
pub fn omega_claims(t: &PiecewiseOmega) -> Result<Vec<ClaimRecord>, SuiteError> {
    let mut out = Vec::new();
    let mut dev: f64 = 0.0;
    for i in 0..=1000 {
        let u = 1.0 + i as f64 / 1000.0;
        dev = dev.max((eval(t, u)?.0 - 1.0 / u).abs());
    }
    out.push(record("omega-reciprocal-1-2", "omega(u) = 1/u on [1, 2]", "omega", dev, 0.0, "<=", dev == 0.0));

    let (w, e) = eval(t, 2.5)?;
    let dev = (w - (1.0 + 1.5f64.ln()) / 2.5).abs();
    let mut r = record(
        "omega-2.5",
        "omega(2.5) = (1 + ln 1.5)/2.5",
        "omega",
        dev,
        OMEGA_CLOSED_FORM_TOL,
        "<=",
        dev <= OMEGA_CLOSED_FORM_TOL,
    );
    r.err = Some(e);
    out.push(r);

    let (mut dev, mut err): (f64, f64) = (0.0, 0.0);
    let steps = ((t.u_max - 10.0) * 100.0).floor() as usize;
    for i in 0..=steps {
        let (w, e) = eval(t, 10.0 + i as f64 / 100.0)?;
        dev = dev.max((w - EXP_NEG_EULER_GAMMA).abs());
        err = err.max(e);
    }
    let mut r = record(
        "omega-limit",
        "omega(u) -> exp(-gamma), u >= 10",
        "omega",
        dev,
        OMEGA_LIMIT_TOL,
        "<=",
        dev <= OMEGA_LIMIT_TOL,
    );
    r.err = Some(err);
    out.push(r);

    let mut excess = f64::NEG_INFINITY;
    for i in 0..=10_000 {
        let u = 1.0 + (t.u_max - 1.0) * i as f64 / 10_000.0;
        let (w, e) = eval(t, u)?;
        excess = excess.max(w - e - omega_upper(u).map_err(engine)?);
    }
    out.push(record(
        "omega-upper-bound",
        "omega(u) <= max{0.6, 1/u}",
        "omega",
        excess,
        0.0,
        "<=",
        excess <= 0.0,
    ));

    let mut worst = f64::NEG_INFINITY;
    let mut prev = window_deviation(t, 4)?;
    for k in 5..(t.u_max as usize - 1) {
        let cur = window_deviation(t, k)?;
        worst = worst.max(cur.0 - prev.0 - 2.0 * (cur.1 + prev.1));
        prev = cur;
    }
    out.push(record(
        "omega-settling",
        "window deviation from exp(-gamma) non-increasing from u = 4",
        "omega",
        worst,
        0.0,
        "<=",
        worst <= 0.0,
    ));
    Ok(out)
}

/// Decomposition cases selected by key or label (all when `filter` is `None`).
pub fn decomposition_cases(filter: Option<&str>) -> Result<Vec<decomposition::DecompositionCase>, SuiteError> {
    match filter {
        None => Ok(decomposition::case_catalog()),
        Some(id) => decomposition::find_case(id).map(|c| vec![c]).ok_or(SuiteError::UnknownId {
            kind: "decomposition case",
            id: id.to_string(),
        }),
    }
}

pub fn verify_options(cfg: &Config) -> VerifyOptions {
    VerifyOptions {
        tol: cfg.quad_tol,
        eps1: cfg.epsilon1,
        refine: true,
    }
}

/// Records for one verified case: each term, the total, the budget and the checksum.
pub fn case_records(case: &decomposition::DecompositionCase, r: &CaseReport) -> Vec<ClaimRecord> {
    let mut out: Vec<ClaimRecord> = r
        .thetas
        .iter()
        .map(|t| ClaimRecord {
            id: format!("{} {}", r.key, t.id),
            anchor: t.anchor.clone(),
            kind: "theta".to_string(),
            value: finite(t.value),
            err: finite(t.err),
            bound: Some(t.claimed_bound),
            relation: "<".to_string(),
            status: verdict(t.pass),
            margin: finite(t.claimed_bound - t.value - t.err),
        })
        .collect();
    if let Some(reason) = &r.aborted {
        out.push(ClaimRecord {
            id: format!("{} aborted", r.key),
            anchor: reason.clone(),
            kind: "theta".to_string(),
            value: None,
            err: None,
            bound: None,
            relation: String::new(),
            status: FAIL.to_string(),
            margin: None,
        });
    }
    let upper = r.total_computed + r.total_err;
    for (suffix, bound, ok, anchor) in [
        ("total", r.claimed_total, r.total_pass, format!("case {} total", r.a_case)),
        ("budget", BUDGET, r.budget_pass, format!("case {} total within budget", r.a_case)),
    ] {
        out.push(ClaimRecord {
            id: format!("{} {suffix}", r.key),
            anchor,
            kind: format!("case-{suffix}"),
            value: finite(r.total_computed),
            err: finite(r.total_err),
            bound: Some(bound),
            relation: "<".to_string(),
            status: verdict(ok),
            margin: finite(bound - upper),
        });
    }
    let gap = (case.claimed_sum() - case.claimed_total).abs();
    out.push(record(
        &format!("{} checksum", r.key),
        &format!("case {} claimed bounds sum to the claimed total", r.a_case),
        "checksum",
        gap,
        CHECKSUM_TOL,
        "<=",
        gap <= CHECKSUM_TOL,
    ));
    out
}

/// Runs the decomposition cases; the per-case reports are returned for CSV output.
pub fn decomposition_claims(
    cfg: &Config,
    table: &PiecewiseOmega,
    filter: Option<&str>,
) -> Result<(Vec<ClaimRecord>, Vec<CaseReport>), SuiteError> {
    let opts = verify_options(cfg);
    let mut records = Vec::new();
    let mut reports = Vec::new();
    for case in decomposition_cases(filter)? {
        let start = Instant::now();
        let r = decomposition::verify_case_with(&case, OmegaSource::Table(table), &opts);
        eprintln!("decomposition {} {:.1}s", r.key, start.elapsed().as_secs_f64());
        records.extend(case_records(&case, &r));
        reports.push(r);
    }
    Ok((records, reports))
}

pub fn exponent_selection(filter: Option<&str>) -> Result<Vec<ClaimSpec>, SuiteError> {
    match filter {
        None => Ok(exponents::catalog_claims()),
        Some(id) => exponents::find_claim(id).map(|c| vec![c]).ok_or(SuiteError::UnknownId {
            kind: "exponent claim",
            id: id.to_string(),
        }),
    }
}

pub fn certify_options(cfg: &Config) -> CertifyOptions {
    CertifyOptions {
        min_width: cfg.certify_min_width,
        margin: cfg.certify_margin,
        ..CertifyOptions::default()
    }
}

/// Certifies each claim and records its verdict.
pub fn exponent_records(cfg: &Config, claims: &[ClaimSpec]) -> Vec<ClaimRecord> {
    let opts = certify_options(cfg);
    claims
        .iter()
        .map(|claim| {
            let start = Instant::now();
            let v = certify_with(&claim.with_eps1(cfg.epsilon1), &opts);
            eprintln!(
                "exponent {} {} {:.1}s",
                claim.id,
                v.status.label(),
                start.elapsed().as_secs_f64()
            );
            match &v.status {
                Status::Falsified { witness, .. } => eprintln!("  witness {witness:?}"),
                Status::Inconclusive { unresolved_count, .. } => {
                    eprintln!("  {unresolved_count} unresolved boxes")
                }
                Status::Certified => {}
            }
            ClaimRecord {
                id: claim.id.clone(),
                anchor: claim.anchor.clone(),
                kind: format!("exponent/{}", claim.family),
                value: finite(v.margin),
                err: None,
                bound: Some(0.0),
                relation: format!("slack {} 0", claim.relation.symbol()),
                status: v.status.label().to_string(),
                margin: finite(v.margin),
            }
        })
        .collect()
}

pub fn exponent_claims(cfg: &Config, filter: Option<&str>) -> Result<Vec<ClaimRecord>, SuiteError> {
    Ok(exponent_records(cfg, &exponent_selection(filter)?))
}

pub fn combinatorics_selection(filter: Option<&str>) -> Result<Vec<CaseSpec>, SuiteError> {
    match filter {
        None => Ok(combinatorics::case_catalog()),
        Some(id) => {
            let cases = combinatorics::find_cases(id);
            if cases.is_empty() {
                Err(SuiteError::UnknownId {
                    kind: "combinatorics case",
                    id: id.to_string(),
                })
            } else {
                Ok(cases)
            }
        }
    }
}

/// Falsification over every configured seed for each case.
pub fn combinatorics_records(cfg: &Config, cases: &[CaseSpec]) -> Result<Vec<ClaimRecord>, SuiteError> {
    let mut out = Vec::new();
    for case in cases {
        let table = combinatorics::judge_table(case, cfg.epsilon1).map_err(engine)?;
        let (mut found, mut undecided) = (0u64, 0u64);
        for &seed in &cfg.seeds {
            let r = combinatorics::falsify_case_against(case, &table, seed, cfg.falsify_count, cfg.epsilon1)
                .map_err(engine)?;
            found += r.counterexample_count;
            undecided += r.undecided;
            if let Some(s) = r.counterexamples.first() {
                eprintln!("combinatorics {} seed {seed}: counterexample {:?}", case.id, s.seq.values());
            }
        }
        if undecided > 0 {
            eprintln!("combinatorics {}: {undecided} samples left undecided", case.id);
        }
        out.push(ClaimRecord {
            id: format!("comb {}", case.id),
            anchor: case.anchor.clone(),
            kind: "falsification".to_string(),
            value: Some(found as f64),
            err: None,
            bound: Some(0.0),
            relation: "counterexamples <=".to_string(),
            status: if found == 0 { FALSIFICATION_PASSED } else { "FALSIFIED" }.to_string(),
            margin: None,
        });
    }
    Ok(out)
}

/// The narrowed-region mutant must yield a counterexample.
pub fn mutation_record(cfg: &Config) -> Result<ClaimRecord, SuiteError> {
    let case = combinatorics::find_cases("I.i r=1").remove(0);
    let table = combinatorics::narrowed_table(cfg.epsilon1).map_err(engine)?;
    let r = combinatorics::falsify_case_against(&case, &table, cfg.seeds[0], cfg.falsify_count, cfg.epsilon1)
        .map_err(engine)?;
    Ok(ClaimRecord {
        id: "comb mutant narrowed-chi1".to_string(),
        anchor: "case I(i) against chi1 = chi2 = chi3 = [0.30, 0.31]".to_string(),
        kind: "mutation".to_string(),
        value: Some(r.counterexample_count as f64),
        err: None,
        bound: Some(1.0),
        relation: "counterexamples >=".to_string(),
        status: verdict(r.counterexample_count >= 1),
        margin: None,
    })
}

pub fn combinatorics_claims(cfg: &Config, filter: Option<&str>) -> Result<Vec<ClaimRecord>, SuiteError> {
    let mut out = combinatorics_records(cfg, &combinatorics_selection(filter)?)?;
    if filter.is_none() {
        out.push(mutation_record(cfg)?);
    }
    Ok(out)
}

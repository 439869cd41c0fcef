//! Acceptance criteria 1–7. Each criterion prints one PASS/FAIL line; the
//! test passes when the failing sub-checks are exactly the known red set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sievecert::buchstab::{build_omega, PiecewiseOmega};
use sievecert::combinatorics::{case_catalog as comb_catalog, falsify_case, falsify_case_against, find_cases, narrowed_table};
use sievecert::decomposition::{case_catalog, find_case, verify_case, CaseReport, BUDGET};
use sievecert::exponents::{catalog_claims, certify_with, CertifyOptions};
use sievecert::sieve_sets::{buchstab_identity_check, sifted_count, SievedInterval};
use sievecert_cli::suites::omega_claims;
use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

/// Sub-checks expected to fail: two terms whose computed values exceed the
/// printed bounds, and the case total that the first of them pushes over.
const KNOWN_RED: [&str; 3] = ["0.53-0.545 Theta10", "0.53-0.545 total", "a>0.61 Theta12"];

const QUAD_TOL: f64 = 1e-4;
const MAX_THETA_ERR: f64 = 1e-4;
const THETA12_VALUE: f64 = 0.0387;
const THETA12_TOL: f64 = 1e-4;
const CASE_TOTAL: f64 = 0.887;
const CERTIFY_MARGIN: f64 = 1e-4;
const FALSIFY_COUNT: u64 = 100_000;
const SEEDS: [u64; 3] = [1, 42, 2024];
const SIEVE_CASES: usize = 200;
const LEGENDRE_MAX_LEN: u64 = 1_000;
const CHECKSUM_TOL: f64 = 1e-4;

const LIMIT_OMEGA: Duration = Duration::from_secs(5);
const LIMIT_CASE: Duration = Duration::from_secs(120);
const LIMIT_TOTALS: Duration = Duration::from_secs(15 * 60);
const LIMIT_CLAIM: Duration = Duration::from_secs(30);
const LIMIT_COMBINATORICS: Duration = Duration::from_secs(5 * 60);
const LIMIT_SIEVE: Duration = Duration::from_secs(60);

#[derive(Default)]
struct Criterion {
    failures: Vec<String>,
}

impl Criterion {
    fn check(&mut self, name: impl Into<String>, ok: bool) {
        if !ok {
            self.failures.push(name.into());
        }
    }

    fn within(&mut self, what: &str, start: Instant, limit: Duration) {
        let took = start.elapsed();
        self.check(format!("{what} runtime {took:.1?} over {limit:?}"), took < limit);
    }
}

fn report(number: usize, title: &str, c: &Criterion, all: &mut Vec<String>) {
    let status = if c.failures.is_empty() { "PASS" } else { "FAIL" };
    if c.failures.is_empty() {
        println!("{status} criterion {number}: {title}");
    } else {
        println!("{status} criterion {number}: {title} [{}]", c.failures.join("; "));
    }
    all.extend(c.failures.iter().cloned());
}

fn omega_table() -> PiecewiseOmega {
    build_omega(64.0, 1e-4).unwrap()
}

fn criterion_omega() -> Criterion {
    let mut c = Criterion::default();
    let start = Instant::now();
    let table = omega_table();
    for r in omega_claims(&table).unwrap() {
        c.check(r.id.clone(), r.passed());
    }
    c.within("omega", start, LIMIT_OMEGA);
    c
}

fn theta_checks(c: &mut Criterion, r: &CaseReport) {
    for t in &r.thetas {
        c.check(format!("{} {}", r.key, t.id), t.pass);
    }
}

fn criterion_case(table: &PiecewiseOmega) -> Criterion {
    let mut c = Criterion::default();
    let start = Instant::now();
    let case = find_case("0.53-0.545").unwrap();
    let r = verify_case(&case, table, QUAD_TOL);
    c.check("0.53-0.545 term count", r.thetas.len() == 12);
    theta_checks(&mut c, &r);
    for t in &r.thetas {
        c.check(format!("0.53-0.545 {} err {:.1e}", t.id, t.err), t.err <= MAX_THETA_ERR);
    }
    c.check("0.53-0.545 total", r.total_computed + r.total_err < CASE_TOTAL);
    let twelve = &r.thetas[11];
    c.check(
        format!("0.53-0.545 Theta12 = {:.5}", twelve.value),
        (twelve.value - THETA12_VALUE).abs() <= THETA12_TOL,
    );
    c.within("case (0.53,0.545]", start, LIMIT_CASE);
    c
}

fn criterion_totals(table: &PiecewiseOmega) -> (Criterion, Vec<CaseReport>) {
    let mut c = Criterion::default();
    let start = Instant::now();
    let reports: Vec<CaseReport> = case_catalog().iter().map(|k| verify_case(k, table, QUAD_TOL)).collect();
    for r in &reports {
        let upper = r.total_computed + r.total_err;
        c.check(format!("{} total", r.key), r.total_pass && upper < r.claimed_total);
        c.check(format!("{} budget", r.key), r.budget_pass && upper < BUDGET);
        if r.key != "0.53-0.545" {
            theta_checks(&mut c, r);
        }
    }
    c.within("six totals", start, LIMIT_TOTALS);
    (c, reports)
}

fn criterion_exponents() -> Criterion {
    let mut c = Criterion::default();
    let opts = CertifyOptions {
        margin: CERTIFY_MARGIN,
        ..CertifyOptions::default()
    };
    let claims = catalog_claims();
    for family in ["smoothfull", "largetau", "cases2"] {
        c.check(format!("{family} present"), claims.iter().any(|k| k.family == family));
    }
    for claim in &claims {
        let start = Instant::now();
        let v = certify_with(claim, &opts);
        c.check(
            format!("{} {} margin {:.2e}", claim.id, v.status.label(), v.margin),
            v.is_certified() && v.margin >= CERTIFY_MARGIN,
        );
        c.within(&claim.id, start, LIMIT_CLAIM);
    }
    c
}

fn criterion_combinatorics() -> Criterion {
    let mut c = Criterion::default();
    let start = Instant::now();
    let cases = comb_catalog();
    c.check("case count", cases.len() == 92);
    for case in &cases {
        for seed in SEEDS {
            let r = falsify_case(case, seed, FALSIFY_COUNT, 0.0).unwrap();
            c.check(
                format!("{} seed {seed}: {} counterexamples", case.id, r.counterexample_count),
                r.checked == FALSIFY_COUNT && r.passed(),
            );
        }
    }
    let mutant = falsify_case_against(
        &find_cases("I.i r=1")[0],
        &narrowed_table(0.0).unwrap(),
        SEEDS[0],
        FALSIFY_COUNT,
        0.0,
    )
    .unwrap();
    c.check("narrowed mutant caught", mutant.counterexample_count >= 1);
    c.within("combinatorics", start, LIMIT_COMBINATORICS);
    c
}

fn primes_below(z: f64) -> Vec<u64> {
    (2u64..)
        .take_while(|&p| (p as f64) < z)
        .filter(|&p| (2..p).take_while(|q| q * q <= p).all(|q| p % q != 0))
        .collect()
}

/// Σ over squarefree e built from primes below z of μ(e)·#{n ∈ [lo, hi] : d·e | n}.
fn legendre(lo: u64, hi: u64, d: u64, z: f64) -> i64 {
    fn walk(primes: &[u64], m: u64, sign: i64, lo: u64, hi: u64) -> i64 {
        let mut total = sign * ((hi / m) as i64 - ((lo - 1) / m) as i64);
        for (i, &p) in primes.iter().enumerate() {
            if m * p > hi {
                break;
            }
            total += walk(&primes[i + 1..], m * p, -sign, lo, hi);
        }
        total
    }
    walk(&primes_below(z), d, 1, lo, hi)
}

fn criterion_sieve() -> Criterion {
    let mut c = Criterion::default();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..SIEVE_CASES {
        let lo = rng.gen_range(2..500_000u64);
        let hi = lo + rng.gen_range(0..5_000u64);
        let d = rng.gen_range(1..=30u64);
        let z1 = rng.gen_range(2.0..80.0f64);
        let z2 = z1 + rng.gen_range(0.5..500.0f64);
        let iv = SievedInterval::new(lo, hi).unwrap();
        c.check(format!("identity case {i}"), buchstab_identity_check(iv, d, z1, z2).unwrap());
        let hi = lo + rng.gen_range(0..LEGENDRE_MAX_LEN);
        let z = rng.gen_range(2.0..40.0f64);
        let d = rng.gen_range(1..=12u64);
        let got = sifted_count(SievedInterval::new(lo, hi).unwrap(), d, z).unwrap() as i64;
        c.check(format!("legendre case {i}"), got == legendre(lo, hi, d, z));
    }
    c.within("sieve", start, LIMIT_SIEVE);
    c
}

fn cli_report(args: &[&str], dir: &std::path::Path, name: &str) -> Vec<String> {
    let out = Command::new(env!("CARGO_BIN_EXE_sievecert"))
        .args(args)
        .args(["--report", name])
        .current_dir(dir)
        .output()
        .unwrap();
    assert!(out.status.code().is_some());
    fs::read_to_string(dir.join(name))
        .unwrap()
        .lines()
        .filter(|l| !l.trim_start().starts_with("\"timestamp\""))
        .map(str::to_string)
        .collect()
}

fn criterion_determinism(coarse: &[CaseReport]) -> Criterion {
    let mut c = Criterion::default();
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["verify-decomposition", "--case", "0.53-0.545"][..],
        &["verify-exponents", "--claim", "largetau"][..],
        &["verify-omega"][..],
    ] {
        let first = cli_report(args, dir.path(), "one.json");
        let second = cli_report(args, dir.path(), "two.json");
        c.check(format!("identical reports for {}", args.join(" ")), first == second);
    }
    let fine = build_omega(64.0, 5e-5).unwrap();
    for (case, a) in case_catalog().iter().zip(coarse) {
        let b = verify_case(case, &fine, QUAD_TOL / 2.0);
        let verdicts = |r: &CaseReport| {
            (
                r.thetas.iter().map(|t| t.pass).collect::<Vec<_>>(),
                r.total_pass,
                r.budget_pass,
            )
        };
        c.check(format!("{} verdicts stable under doubling", case.key), verdicts(a) == verdicts(&b));
        let gap = (case.claimed_sum() - case.claimed_total).abs();
        c.check(format!("{} checksum gap {gap:.1e}", case.key), gap <= CHECKSUM_TOL);
    }
    c
}

fn main() {
    let mut failures = Vec::new();
    report(1, "Buchstab engine", &criterion_omega(), &mut failures);
    let table = omega_table();
    report(2, "case (0.53,0.545]", &criterion_case(&table), &mut failures);
    let (totals, reports) = criterion_totals(&table);
    report(3, "six case totals", &totals, &mut failures);
    report(4, "exponent certification", &criterion_exponents(), &mut failures);
    report(5, "combinatorics falsification", &criterion_combinatorics(), &mut failures);
    report(6, "sieve-set exactness", &criterion_sieve(), &mut failures);
    report(7, "determinism and robustness", &criterion_determinism(&reports), &mut failures);
    failures.sort();
    failures.dedup();
    let mut expected: Vec<String> = KNOWN_RED.iter().map(|s| s.to_string()).collect();
    expected.sort();
    let unexpected: Vec<&String> = failures.iter().filter(|f| !expected.contains(f)).collect();
    let missing: Vec<&String> = expected.iter().filter(|f| !failures.contains(f)).collect();
    println!("known red: {}", KNOWN_RED.join(", "));
    if unexpected.is_empty() && missing.is_empty() {
        println!("acceptance: failing sub-checks match the known red set");
    } else {
        println!("acceptance: unexpected failures {unexpected:?}, known red now passing {missing:?}");
        std::process::exit(1);
    }
}

use proptest::prelude::*;
use sievecert::enclosure::{Scratch, Tape};
use sievecert::exponents::{
    catalog_claims, certify, certify_with, find_claim, function_catalog, mutant_claim, ClaimSpec,
    CertifyOptions, Relation, Status, Thresholds, TupleClass, tuple_class, TUPLES,
};
use sievecert::expr::{c, v, Point, Var};
use std::time::Instant;

/// Independent numpy evaluations at (a, σ) = (0.55, 0.72), (0.6, 0.85), (0.7, 0.95).
const POINTS: [(f64, f64); 3] = [(0.55, 0.72), (0.6, 0.85), (0.7, 0.95)];
const FUNCTION_ORACLE: &[(&str, [f64; 3])] = &[
    ("B", [0.3400000000000001, 0.15000000000000002, 0.050000000000000044]),
    ("K", [0.745318352059925, 0.8666666666666666, 0.9555555555555553]),
    ("L", [0.7404580152671755, 0.9090909090909091, 0.9756097560975608]),
    ("E", [0.7404580152671755, 0.8666666666666666, 0.9555555555555553]),
    ("M", [0.7112068965517241, 0.5806451612903226, 0.5]),
    ("m1", [0.6175548589341695, 0.6817307692307691, 0.6325]),
    ("m2", [-3.7272727272727457, 0.682142857142857, 0.6561111111111111]),
    ("m3", [0.7524223187437354, 0.7147556390977443, 0.6472222222222223]),
    ("Lambda_Q", [0.3824451410658305, 0.31785714285714295, 0.35277777777777775]),
    ("Upsilon_Q", [0.2887931034482759, 0.4193548387096774, 0.5]),
    ("Upsilon_star", [0.5761764705882355, 0.5200000000000002, 0.5699999999999997]),
    ("Upsilon_2[1]", [0.51, 0.48666666666666664, 0.48666666666666664]),
    ("Upsilon_6[1]", [0.45242268041237116, 0.5365384615384615, 0.5912790697674419]),
    ("Lambda_*[2]", [0.21999999999999995, 0.17, 0.07000000000000003]),
    ("Upsilon_2[2]", [0.6799999999999999, 0.63, 0.53]),
    ("Upsilon_6[2]", [0.4763636363636367, 0.7396551724137934, 0.80546218487395]),
    ("Lambda_*[3]", [0.17306249999999967, 0.3374999999999998, 0.37857142857142817]),
    ("Upsilon_2[3]", [0.7145373134328354, 0.6479999999999996, 0.5279999999999995]),
    ("Upsilon_6[3]", [0.5704838709677421, 0.730645161290323, 0.7661157024793394]),
    ("Lambda_*[4]", [0.391044776119403, 0.3460000000000002, 0.18947368421052616]),
    ("Upsilon_2[4]", [0.51171875, 0.45249999999999996, 0.33750000000000013]),
    ("Upsilon_6[4]", [0.2886440677966111, 0.6072289156626509, 0.6705382436260628]),
    ("Lambda_*[5]", [0.38269662921348296, 0.30652173913043457, 0.14433962264150885]),
    ("Upsilon_2[5]", [0.5926190476190482, 0.5150000000000001, 0.4006097560975612]),
    ("Upsilon_6[5]", [0.24783783783783775, 0.6732558139534888, 0.7297927461139904]),
    ("Lambda_*[6]", [0.3837784679089027, 0.3472413793103449, 0.2686893203883491]),
    ("Upsilon_2[6]", [0.6062148962148964, 0.4838461538461538, 0.3242026266416512]),
    ("Upsilon_6[6]", [0.23301120448179338, 0.6589655172413793, 0.709007633587787]),
    ("Lambda_*[7]", [0.26999999999999985, 0.3625, 0.3875]),
    ("Upsilon_2[7]", [0.6300000000000001, 0.43750000000000006, 0.21250000000000008]),
    ("Upsilon_6[7]", [0.4222314049586781, 0.640086206896552, 0.685399159663866]),
    ("Lambda_*[8]", [0.32948484848484844, 0.29227941176470584, 0.23337765957446815]),
    ("Upsilon_2[8]", [1.081269841269841, 0.7329545454545454, 0.4527439024390243]),
    ("Upsilon_6[8]", [0.4366666666666641, 0.8144531249999998, 0.8326480263157903]),
    ("Lambda_*[9]", [0.32163082437275975, 0.3558823529411766, 0.37706043956043955]),
    ("Upsilon_2[9]", [2.7239682539682537, 0.8863636363636365, -0.38414634146341353]),
    ("Upsilon_6[9]", [1.673888888888912, 0.8614864864864872, 0.8241978609625676]),
];

/// Minimum slack of each claim on a 400 × 400 grid over its first two box
/// variables (three levels of the third), evaluated independently in numpy.
const GRID_ORACLE: &[(&str, f64)] = &[
    ("largetau", 0.0020671634242557246),
    ("largetau-high-upper", 0.0066702369341092305),
    ("largetau-high-lower", 0.007526463257710669),
    ("smoothfull-0.335", 0.0015827678757813213),
    ("smoothfull-0.33", 0.0038069975999241445),
    ("smoothfull-0.32", 0.008526528487465601),
    ("smalltau-1a-0.36", 0.004318637274549064),
    ("smalltau-1a-0.345", 0.0013276553106211786),
    ("smalltau-1a-0.375", 0.003906250000000111),
    ("smalltau-2a-0.29", 0.004273181565676409),
    ("smalltau-2a-0.315", 0.003499999999999892),
    ("smalltau-2a-0.285", 0.0006518010291596821),
    ("cases2-lambda-0.53", 0.0010250877042232154),
    ("cases2-upsilon-0.53", 0.0016666666666666496),
    ("cases2-upsilon6-0.53", 0.0016666666666666496),
    ("cases2-lambda-0.545", 0.0020363999999999938),
    ("cases2-upsilon-0.545", 0.0032556446115288296),
    ("cases2-upsilon6-0.545", 0.0039999999999995595),
    ("cases2-lambda-0.57", 0.0006541804511277505),
    ("cases2-upsilon-0.57", 0.0038559322033893673),
    ("cases2-upsilon6-0.57", 0.0005881731536689916),
    ("cases2-lambda-0.59", 0.00019154768731277638),
    ("cases2-upsilon-0.59", 0.0049590163934421505),
    ("cases2-upsilon6-0.59", 0.003613473317213567),
    ("mediumtau-0.57", 0.003976377952756016),
    ("mediumtau-0.59", 0.004812030075188101),
    ("mediumtau-0.61", 0.022425677186946547),
    ("mediumtau-0.64", 0.011609195402298766),
];

const GRID: usize = 400;
const REQUIRED_MARGIN: f64 = 1e-4;

fn required() -> CertifyOptions {
    CertifyOptions {
        margin: REQUIRED_MARGIN,
        min_width: 1e-5,
        ..CertifyOptions::default()
    }
}

/// Catalogue name used at `a` for an oracle row (the residual tuples switch
/// formula at a = 0.64).
fn catalogue_name(name: &str, a: f64) -> String {
    let residual = (1..=TUPLES.len())
        .filter(|&i| tuple_class(i - 1) == TupleClass::Residual)
        .any(|i| name.ends_with(&format!("[{i}]")));
    if a >= 0.64 && residual && (name.starts_with("Lambda_*") || name.starts_with("Upsilon_2")) {
        format!("{name} a>=0.64")
    } else {
        name.to_string()
    }
}

#[test]
fn catalogue_agrees_with_oracle() {
    let cat = function_catalog();
    for (name, values) in FUNCTION_ORACLE {
        for (&(a, s), want) in POINTS.iter().zip(values) {
            let key = catalogue_name(name, a);
            let e = cat.get(&key).unwrap_or_else(|| panic!("missing {key}"));
            let p = Point::with_constants(0.0).with(Var::A, a).with(Var::Sigma, s);
            let got = e.eval_point(&p).unwrap();
            assert!(
                (got - want).abs() <= 1e-12 * want.abs().max(1.0),
                "{key} at ({a},{s}): {got} vs {want}"
            );
        }
    }
}

#[test]
fn hand_evaluated_values() {
    let cat = function_catalog();
    let at = |name: &str, a: f64, s: f64| {
        let p = Point::with_constants(0.0).with(Var::A, a).with(Var::Sigma, s);
        cat.get(name).unwrap().eval_point(&p).unwrap()
    };
    assert!((at("E", 0.6, 0.8) - 0.81526).abs() < 1e-5);
    assert!((at("B", 0.6, 0.8) - 0.23).abs() < 1e-12);
    assert!((at("M", 0.6, 0.85) - 0.58065).abs() < 1e-5);
    assert!((at("sigma_o2", 0.6, 0.0) - 0.88).abs() < 1e-12);
    assert!((at("sigma_o1", 0.7, 0.0) - 1.0).abs() < 1e-12);
}

#[test]
fn catalogue_variables_stay_in_the_exponent_space() {
    let allowed = [Var::A, Var::Sigma, Var::EllI, Var::Beta, Var::Nu, Var::Eps1];
    let cat = function_catalog();
    assert_eq!(cat.tuples.len(), 9);
    for name in cat.names() {
        let vars = cat.get(name).unwrap().free_vars();
        assert!(vars.iter().all(|x| allowed.contains(x)), "{name}: {vars:?}");
    }
    let cat_b = cat.get("C3*[1]").unwrap();
    let p = Point::with_constants(0.0)
        .with(Var::A, 0.6)
        .with(Var::Sigma, 0.8)
        .with(Var::EllI, 0.4)
        .with(Var::Beta, 0.9);
    let want = 0.6 + 0.4 * (4.0 * 0.9 - 4.0) + 3.0 - 4.0 * 0.8 + 0.23;
    assert!((cat_b.eval_point(&p).unwrap() - want).abs() < 1e-12);
}

#[test]
fn claim_catalogue_shape() {
    let claims = catalog_claims();
    assert!(claims.len() >= 20);
    let mut ids: Vec<_> = claims.iter().map(|c| c.id.clone()).collect();
    ids.sort();
    ids.dedup();
    assert_eq!(ids.len(), claims.len());
    for fam in ["smoothfull", "largetau", "cases2", "smalltau", "mediumtau"] {
        assert!(claims.iter().any(|c| c.family == fam), "{fam}");
    }
    for c in &claims {
        assert!(!c.anchor.is_empty());
        assert!(c.region.len() <= 4 && !c.region.is_empty());
        assert!(c.region.iter().all(|&(_, lo, hi)| lo < hi));
        assert!(c.region.iter().all(|&(var, _, hi)| var != Var::Sigma || hi <= 1.0 - 1e-6));
    }
    assert!(find_claim("smoothfull-0.335").is_some());
    assert!(find_claim("nonexistent").is_none());
}

#[test]
fn every_claim_certifies_with_required_margin() {
    for claim in catalog_claims() {
        let t = Instant::now();
        let verdict = certify_with(&claim, &required());
        let secs = t.elapsed().as_secs_f64();
        assert!(verdict.is_certified(), "{}: {:?}", claim.id, verdict.status);
        assert!(verdict.margin >= REQUIRED_MARGIN, "{}: {}", claim.id, verdict.margin);
        assert!(secs < 30.0, "{} took {secs}s", claim.id);
    }
}

#[test]
fn finer_min_width_changes_no_verdict() {
    for claim in catalog_claims() {
        let coarse = certify(&claim, 64, 1e-5);
        let fine = certify(&claim, 64, 1e-6);
        assert_eq!(coarse.status.label(), fine.status.label(), "{}", claim.id);
        assert!(fine.is_certified(), "{}", claim.id);
    }
}

fn grid_minimum(claim: &ClaimSpec) -> f64 {
    let tape = Tape::compile(&claim.slack(), &claim.dims(), &claim.constants()).unwrap();
    let mut scratch = Scratch::default();
    let at = |k: usize, i: usize| {
        let (_, lo, hi) = claim.region[k];
        lo + (hi - lo) * i as f64 / (GRID - 1) as f64
    };
    let levels: Vec<f64> = match claim.region.get(2) {
        Some(&(_, lo, hi)) => vec![lo, (lo + hi) / 2.0, hi],
        None => vec![f64::NAN],
    };
    let mut worst = f64::INFINITY;
    for i in 0..GRID {
        for j in 0..if claim.region.len() > 1 { GRID } else { 1 } {
            for &z in &levels {
                let mut x = vec![at(0, i)];
                if claim.region.len() > 1 {
                    x.push(at(1, j));
                }
                if claim.region.len() > 2 {
                    x.push(z);
                }
                worst = worst.min(tape.eval_point(&x, &mut scratch));
            }
        }
    }
    worst
}

#[test]
fn grid_scans_find_no_violation_and_match_oracle() {
    let claims = catalog_claims();
    assert_eq!(GRID_ORACLE.len(), claims.len());
    for (claim, &(id, want)) in claims.iter().zip(GRID_ORACLE) {
        assert_eq!(claim.id, id);
        let got = grid_minimum(claim);
        assert!(got > 0.0, "{id}: violation {got}");
        assert!((got - want).abs() < 1e-9, "{id}: {got} vs {want}");
        let verdict = certify_with(claim, &required());
        assert!(verdict.margin <= got, "{id}: bound {} above sample {got}", verdict.margin);
    }
}

#[test]
fn mutant_is_falsified_with_a_genuine_witness() {
    let mutant = mutant_claim();
    let verdict = certify_with(&mutant, &required());
    let Status::Falsified { witness, slack } = &verdict.status else {
        panic!("mutant survived: {:?}", verdict.status);
    };
    assert!(*slack < 0.0);
    let x: Vec<f64> = witness.iter().map(|w| w.1).collect();
    let direct = mutant.slack().eval_point(&mutant.point(&x)).unwrap();
    assert!((direct - slack).abs() < 1e-12 && direct < 0.0);
}

#[test]
fn threshold_shift_flips_claims() {
    let shifted: Vec<(&str, f64)> = vec![
        ("smoothfull-0.335", 0.335),
        ("smalltau-1a-0.36", 0.36),
        ("cases2-lambda-0.57", 0.38),
        ("cases2-upsilon-0.53", 0.485),
    ];
    let mut flipped = 0;
    for (id, thr) in shifted {
        let claim = find_claim(id).unwrap();
        let harmful = match claim.relation {
            Relation::Le | Relation::Lt => thr - 0.05,
            _ if id.starts_with("smoothfull") => thr - 0.05,
            _ => thr + 0.05,
        };
        let mutated = claim.mutate_constant(thr, harmful);
        let verdict = certify_with(&mutated, &required());
        assert!(!verdict.is_certified(), "{id} survived a 0.05 shift");
        flipped += verdict.is_falsified() as usize;
    }
    assert!(flipped >= 1);
}

#[test]
fn strictness_is_respected_at_an_equality() {
    let equal = |relation| ClaimSpec {
        id: "equal".into(),
        family: "test",
        lhs: 0.5 * v(Var::A) + 0.25,
        relation,
        rhs: c(0.5),
        region: vec![(Var::A, 0.5, 0.5)],
        eps1: 0.0,
        anchor: "a/2 + 1/4 vs 1/2".into(),
    };
    assert!(certify(&equal(Relation::Gt), 64, 1e-9).is_falsified());
    assert!(!certify(&equal(Relation::Ge), 64, 1e-9).is_falsified());
    assert!(certify(&equal(Relation::Ge), 64, 1e-9).margin <= 0.0);
}

#[test]
fn vanishing_denominator_is_not_certified() {
    let claim = ClaimSpec {
        id: "pole".into(),
        family: "test",
        lhs: 1.0 / (v(Var::A) - 0.5),
        relation: Relation::Gt,
        rhs: c(0.0),
        region: vec![(Var::A, 0.0, 1.0)],
        eps1: 0.0,
        anchor: "pole".into(),
    };
    assert!(certify(&claim, 64, 1e-6).is_falsified());
}

#[test]
fn tiny_eps1_keeps_verdicts() {
    for claim in catalog_claims() {
        let verdict = certify(&claim.with_eps1(1e-9), 64, 1e-5);
        assert!(verdict.is_certified(), "{}", claim.id);
    }
}

#[test]
fn verdicts_are_deterministic() {
    for id in ["cases2-lambda-0.59", "mediumtau-0.57"] {
        let claim = find_claim(id).unwrap();
        assert_eq!(certify_with(&claim, &required()), certify_with(&claim, &required()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn sigma_exponent_is_a_proper_fraction_where_b_below_a(a in 0.47f64..0.77, s in 0.6f64..0.999999) {
        let th = Thresholds::new(v(Var::A), v(Var::Sigma));
        let p = Point::with_constants(0.0).with(Var::A, a).with(Var::Sigma, s);
        let b = th.b().eval_point(&p).unwrap();
        prop_assume!(b < a);
        let e = th.e_exponent().eval_point(&p).unwrap();
        prop_assert!(e > 0.0 && e < 1.0, "E = {}", e);
    }

    #[test]
    fn certified_claims_hold_at_random_points(k in 0usize..28, u in prop::collection::vec(0.0f64..=1.0, 3)) {
        let claim = &catalog_claims()[k];
        let x: Vec<f64> = claim.region.iter().zip(&u).map(|(&(_, lo, hi), t)| lo + t * (hi - lo)).collect();
        let slack = claim.slack().eval_point(&claim.point(&x)).unwrap();
        prop_assert!(slack >= REQUIRED_MARGIN, "{} at {:?}: {}", claim.id, x, slack);
    }
}

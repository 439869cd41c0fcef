//! Hypothesis checks for covering a target interval by subset sums, and a
//! falsification harness that samples structured length sequences for each
//! catalogued case and confirms that one of the options (1)–(3) holds.

use crate::expr::{c, max, max_all, min, v, BoundExpr, ExprError, Point, Var};
use crate::regions::{
    branch, check_options_in, EllSequence, RegionError, RegionSet, RegionTable,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

/// Stand-in for the ε/10¹⁰⁰ tolerance on subset sums and filler sizes.
pub const XI_TOLERANCE: f64 = 1e-9;
/// Largest number of entries in a sampled sequence.
pub const MAX_ITEMS: usize = 200;
/// Largest number of samples a single stream may produce.
pub const MAX_COUNT: u64 = 10_000_000;
/// Widening added to every region when judging samples, so that block sums
/// off their ℓ* by the sampling tolerance still count as hitting a region the
/// ℓ* themselves hit.
pub const JUDGE_SLACK: f64 = 1e-8;
/// Ratio ε/ε₁.
pub const EPS_OVER_EPS1: f64 = 1e5;
/// Floating-point slack for the threshold comparisons of the lemma.
const COMPARE_SLACK: f64 = 1e-12;
/// Proposals tried before a case is declared infeasible.
const MAX_PROPOSALS: u32 = 1_000_000;
/// Sequences generated per drawn (ℓ*, β).
const SEQUENCES_PER_DRAW: u64 = 4;

#[derive(Debug, Error, PartialEq)]
pub enum CombError {
    #[error("case {0}: no admissible (l*, beta) found in {1} proposals")]
    Infeasible(String, u32),
    #[error("count {0} exceeds the limit {MAX_COUNT}")]
    TooMany(u64),
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Which sifting family a case belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Family {
    /// Sifting up to x^β; leftover entries at most β except one.
    #[serde(rename = "R_star")]
    RStar,
    /// Sifting up to the last prime; leftover entries unconstrained.
    #[serde(rename = "R_star_star")]
    RStarStar,
}

/// How the sieving exponent is chosen in a case.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum BetaRule {
    Fixed(f64),
    AtMost(f64),
}

/// One transcribed case of the corollary.
#[derive(Clone, Debug)]
pub struct CaseSpec {
    /// e.g. "II.iii r=3" or "D.c r=4".
    pub id: String,
    pub family: Family,
    /// Range of a as (lower, upper]; the lower end is inclusive for the first branch.
    pub a_interval: (f64, f64),
    pub r: usize,
    /// Sieving exponent rule (first family only).
    pub beta: Option<BetaRule>,
    /// Lower bound on every ℓ*ᵢ before the ε₁/2 widening (second family only).
    pub min_part: Option<f64>,
    /// Each expression must be non-negative; variables ℓ*ᵢ = Ell(i), β = Beta, ε₁ = Eps1.
    pub constraints: Vec<BoundExpr>,
    pub anchor: String,
}

impl CaseSpec {
    /// A value of a inside the case's range.
    pub fn a_probe(&self) -> f64 {
        let (lo, hi) = self.a_interval;
        0.5 * (lo + hi)
    }

    pub fn sum_cap(&self) -> f64 {
        match self.family {
            Family::RStar => 0.75,
            Family::RStarStar => 0.99,
        }
    }

    /// Range of every ℓ*ᵢ at the given β and ε₁.
    fn part_range(&self, beta: f64, eps1: f64) -> (f64, f64) {
        let eps = EPS_OVER_EPS1 * eps1;
        match self.family {
            Family::RStar => (beta, 0.5 + eps),
            Family::RStarStar => {
                let floor = self.min_part.map_or(0.0, |m| m - eps1 / 2.0);
                ((0.01 - eps).max(floor), 0.5 + eps)
            }
        }
    }

    /// True when (ℓ*, β) meets the family invariants and every case constraint.
    pub fn admits(&self, lstar: &[f64], beta: f64, eps1: f64) -> Result<bool, CombError> {
        if lstar.len() != self.r {
            return Ok(false);
        }
        let beta_ok = match self.beta {
            Some(BetaRule::Fixed(b)) => beta == b,
            Some(BetaRule::AtMost(m)) => (0.01..=m.min(0.15)).contains(&beta),
            None => true,
        };
        if !beta_ok {
            return Ok(false);
        }
        let (lo, hi) = self.part_range(beta, eps1);
        if lstar.iter().any(|&x| x < lo || x > hi) || lstar.windows(2).any(|w| w[0] < w[1]) {
            return Ok(false);
        }
        if lstar.iter().sum::<f64>() > self.sum_cap() {
            return Ok(false);
        }
        let p = point(lstar, beta, eps1);
        for g in &self.constraints {
            if g.eval_point(&p)? < 0.0 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn point(lstar: &[f64], beta: f64, eps1: f64) -> Point {
    let mut p = Point::with_constants(eps1).with(Var::Beta, beta);
    for (k, &x) in lstar.iter().enumerate() {
        p.set(Var::Ell(k as u8 + 1), x);
    }
    p
}

/// Outcome of the five covering conditions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LemmaConditions {
    pub a: bool,
    pub b: bool,
    pub c: bool,
    pub d: bool,
    pub e: bool,
}

impl LemmaConditions {
    pub fn any(&self) -> bool {
        self.a || self.b || self.c || self.d || self.e
    }
}

/// Conditions (A)–(E) for covering χ = [a₁ − ε₁/2, a₂ + ε₁/2] with `lstar`
/// sorted in decreasing order.
pub fn lemma_conditions_check(
    lstar: &[f64],
    beta: f64,
    rho: f64,
    b1: f64,
    b2: f64,
    chi: [f64; 2],
    eps1: f64,
) -> LemmaConditions {
    let [a1, a2] = chi;
    let r = lstar.len();
    let le = |x: f64, y: f64| x <= y + COMPARE_SLACK;
    let total: f64 = lstar.iter().sum();
    let prefix = |k: usize| lstar[..k].iter().sum::<f64>();
    let wide = le(beta, a2 - a1);
    let a = wide && le(total, a2) && le(a1, 1.0 - rho);
    let b = wide
        && (2..=r).any(|k| {
            le(prefix(k - 1), a2)
                && le(lstar[k - 1], b1)
                && le(a1, 1.0 - rho - (r - k + 1) as f64 * b1)
        });
    let c = wide
        && r >= 1
        && le(total - lstar[0], a2)
        && le(lstar[0], b2)
        && le(a1, 1.0 - rho - b2);
    let d = wide
        && le(0.5 + eps1, a1)
        && le(total, 1.0 - rho - (2.0 * a1 - 1.0))
        && (1..=r).any(|k| {
            let s = prefix(k);
            le(1.0 - a2 - (2.0 * a1 - 1.0), s) && le(s, a2)
        });
    let e = (0u32..1 << r).any(|mask| {
        let s: f64 = (0..r).filter(|i| mask >> i & 1 == 1).map(|i| lstar[i]).sum();
        le(a1, s) && le(s, a2)
    });
    LemmaConditions { a, b, c, d, e }
}

/// How the non-block entries of a sample were generated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FillMode {
    /// Entries uniform in (0, β].
    Uniform,
    /// Entries equal to β plus tolerance.
    Hugging,
    /// One large leftover entry, the rest uniform.
    LargeLeftover,
    /// One leftover entry placed so that a block sum plus it sits just outside a target set.
    NearMiss,
}

const MODES: [FillMode; 4] = [
    FillMode::Uniform,
    FillMode::Hugging,
    FillMode::LargeLeftover,
    FillMode::NearMiss,
];

/// A sampled sequence with the disjoint index sets realising each ℓ*ₛ.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct XiSample {
    pub lstar: Vec<f64>,
    pub beta: Option<f64>,
    pub seq: EllSequence,
    /// Index sets X₁ … X_r into `seq`.
    pub blocks: Vec<Vec<usize>>,
    pub mode: FillMode,
}

impl XiSample {
    /// Indices not in any block.
    pub fn rest(&self) -> Vec<usize> {
        let mut used = vec![false; self.seq.len()];
        for b in &self.blocks {
            for &i in b {
                used[i] = true;
            }
        }
        (0..self.seq.len()).filter(|&i| !used[i]).collect()
    }

    /// Checks the structural conditions of the sample's family.
    pub fn is_structurally_valid(&self, family: Family) -> bool {
        let vals = self.seq.values();
        let sum: f64 = vals.iter().sum();
        if (sum - 1.0).abs() > XI_TOLERANCE || self.blocks.len() != self.lstar.len() {
            return false;
        }
        let mut seen = vec![false; vals.len()];
        for (b, &target) in self.blocks.iter().zip(&self.lstar) {
            for &i in b {
                if i >= vals.len() || seen[i] {
                    return false;
                }
                seen[i] = true;
            }
            let s: f64 = b.iter().map(|&i| vals[i]).sum();
            if (s - target).abs() > XI_TOLERANCE {
                return false;
            }
        }
        match (family, self.beta) {
            (Family::RStar, Some(beta)) => {
                self.rest()
                    .iter()
                    .filter(|&&i| vals[i] > beta + XI_TOLERANCE)
                    .count()
                    <= 1
            }
            (Family::RStar, None) => false,
            (Family::RStarStar, _) => true,
        }
    }
}

/// Deterministic stream of samples for one case.
pub struct XiSampler<'a> {
    case: &'a CaseSpec,
    table: RegionTable,
    eps1: f64,
    rng: ChaCha8Rng,
    remaining: u64,
    produced: u64,
    draw: (Vec<f64>, f64),
}

fn case_seed(seed: u64, id: &str) -> u64 {
    id.bytes().fold(seed ^ 0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Stream of `count` samples for `case` from `rng_seed`, at ε₁ = `eps1`.
pub fn sample_xi(case: &CaseSpec, rng_seed: u64, count: u64, eps1: f64) -> Result<XiSampler<'_>, CombError> {
    if count > MAX_COUNT {
        return Err(CombError::TooMany(count));
    }
    let table = RegionTable::at(case.a_probe(), eps1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(case_seed(rng_seed, &case.id));
    let draw = draw_parameters(case, eps1, &mut rng)?;
    Ok(XiSampler {
        case,
        table,
        eps1,
        rng,
        remaining: count,
        produced: 0,
        draw,
    })
}

impl Iterator for XiSampler<'_> {
    type Item = Result<XiSample, CombError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        if self.produced > 0 && self.produced.is_multiple_of(SEQUENCES_PER_DRAW) {
            match draw_parameters(self.case, self.eps1, &mut self.rng) {
                Ok(d) => self.draw = d,
                Err(e) => return Some(Err(e)),
            }
        }
        self.produced += 1;
        let (lstar, beta) = self.draw.clone();
        Some(build_sample(self.case, &self.table, lstar, beta, &mut self.rng))
    }
}

fn propose(case: &CaseSpec, eps1: f64, rng: &mut ChaCha8Rng) -> (Vec<f64>, f64) {
    let beta = match case.beta {
        Some(BetaRule::Fixed(b)) => b,
        Some(BetaRule::AtMost(m)) => rng.gen_range(0.01..=m),
        None => 0.0,
    };
    let (lo, hi) = case.part_range(beta, eps1);
    let cap = case.sum_cap();
    let mut lstar = Vec::with_capacity(case.r);
    let mut used = 0.0;
    let mut top = hi;
    for k in 0..case.r {
        let reserve = (case.r - k - 1) as f64 * lo;
        let upper = top.min(cap - used - reserve);
        let x = if upper > lo { rng.gen_range(lo..=upper) } else { lo };
        lstar.push(x);
        used += x;
        top = x;
    }
    (lstar, beta)
}

/// Moves an admissible point towards the boundary of the case region along a random direction.
fn push_to_boundary(
    case: &CaseSpec,
    eps1: f64,
    lstar: &[f64],
    beta: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<f64>, f64), CombError> {
    let dir: Vec<f64> = (0..lstar.len()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let dbeta = if matches!(case.beta, Some(BetaRule::AtMost(_))) {
        rng.gen_range(-1.0..=1.0)
    } else {
        0.0
    };
    let at = |t: f64| -> (Vec<f64>, f64) {
        (
            lstar.iter().zip(&dir).map(|(x, d)| x + t * d).collect(),
            beta + t * dbeta,
        )
    };
    let (mut ok, mut bad) = (0.0, 0.5);
    let (l, b) = at(bad);
    if case.admits(&l, b, eps1)? {
        return Ok((l, b));
    }
    for _ in 0..30 {
        let mid = 0.5 * (ok + bad);
        let (l, b) = at(mid);
        if case.admits(&l, b, eps1)? {
            ok = mid;
        } else {
            bad = mid;
        }
    }
    Ok(at(ok))
}

fn draw_parameters(case: &CaseSpec, eps1: f64, rng: &mut ChaCha8Rng) -> Result<(Vec<f64>, f64), CombError> {
    for _ in 0..MAX_PROPOSALS {
        let (lstar, beta) = propose(case, eps1, rng);
        if case.admits(&lstar, beta, eps1)? {
            if rng.gen_bool(0.5) {
                return push_to_boundary(case, eps1, &lstar, beta, rng);
            }
            return Ok((lstar, beta));
        }
    }
    Err(CombError::Infeasible(case.id.clone(), MAX_PROPOSALS))
}

/// Splits `total` into 1–4 non-negative pieces.
fn split(total: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let pieces = *[1usize, 1, 2, 3, 4].choose(rng).unwrap();
    let mut cuts: Vec<f64> = (1..pieces).map(|_| rng.gen_range(0.0..=total)).collect();
    cuts.push(0.0);
    cuts.push(total);
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Entries of size at most `cap` (uniform in [cap/4, cap], or all equal to
/// `cap` when `hug`) summing to `total`.
fn fillers(total: f64, cap: f64, hug: bool, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut out = Vec::new();
    let mut left = total;
    while left > cap {
        let x = if hug { cap } else { rng.gen_range(cap / 4.0..=cap) };
        out.push(x);
        left -= x;
    }
    if left > 0.0 {
        out.push(left);
    }
    out
}

fn target_edges(table: &RegionTable) -> Vec<f64> {
    [&table.chi1, &table.chi2, &table.chi3]
        .iter()
        .flat_map(|s| s.intervals().iter().flat_map(|&(lo, hi)| [lo, hi]))
        .collect()
}

fn build_sample(
    case: &CaseSpec,
    table: &RegionTable,
    lstar: Vec<f64>,
    beta: f64,
    rng: &mut ChaCha8Rng,
) -> Result<XiSample, CombError> {
    let mut values: Vec<f64> = Vec::new();
    let mut blocks = Vec::with_capacity(lstar.len());
    for &target in &lstar {
        let jitter = rng.gen_range(-XI_TOLERANCE..=XI_TOLERANCE) * 0.5;
        let parts = split((target + jitter).max(0.0), rng);
        blocks.push((values.len()..values.len() + parts.len()).collect::<Vec<_>>());
        values.extend(parts);
    }
    let left = (1.0 - values.iter().sum::<f64>()).max(0.0);
    let mode = *MODES.choose(rng).unwrap();
    let cap = match case.family {
        Family::RStar => beta + XI_TOLERANCE * 0.5,
        Family::RStarStar => left.max(1e-3),
    };
    let min_cap = left / (MAX_ITEMS - values.len() - 1) as f64;
    let cap = cap.max(min_cap);
    let mut rest = match mode {
        FillMode::Uniform => match case.family {
            Family::RStar => fillers(left, cap, false, rng),
            Family::RStarStar => split(left, rng),
        },
        FillMode::Hugging => fillers(left, cap, true, rng),
        FillMode::LargeLeftover | FillMode::NearMiss => {
            let big = if mode == FillMode::NearMiss {
                let edges = target_edges(table);
                let edge = *edges.choose(rng).unwrap();
                let base: f64 = (0..lstar.len())
                    .filter(|_| rng.gen_bool(0.5))
                    .map(|s| lstar[s])
                    .sum();
                let off = rng.gen_range(1e-7..1e-3) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                let want = edge + off - base;
                if (0.0..=left).contains(&want) {
                    want
                } else {
                    rng.gen_range(0.0..=left)
                }
            } else {
                rng.gen_range(0.0..=left)
            };
            let mut r = vec![big];
            r.extend(fillers(left - big, cap, rng.gen_bool(0.5), rng));
            r
        }
    };
    rest.retain(|&x| x > 0.0);
    values.extend(rest);
    // Absorb rounding so the entries sum to one.
    let sum: f64 = values.iter().sum();
    let last = values.len() - 1;
    values[last] = (values[last] + (1.0 - sum)).max(0.0);
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.shuffle(rng);
    let mut position = vec![0; values.len()];
    for (new, &old) in order.iter().enumerate() {
        position[old] = new;
    }
    let shuffled: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let blocks = blocks
        .into_iter()
        .map(|b| b.into_iter().map(|i| position[i]).collect())
        .collect();
    Ok(XiSample {
        lstar,
        beta: case.beta.map(|_| beta),
        seq: EllSequence::new(shuffled)?,
        blocks,
        mode,
    })
}

/// Verdict of the option check for one sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SampleVerdict {
    Covered,
    /// The grid method left an option open; not counted as a counterexample.
    Undecided,
    AllOptionsFail,
}

fn hits(set: &RegionSet, s: f64) -> bool {
    set.contains(s) || set.contains(1.0 - s)
}

/// Looks for subset sums built from whole blocks plus runs of the other entries.
fn constructive_witness(sample: &XiSample, table: &RegionTable) -> bool {
    let vals = sample.seq.values();
    let block_sums: Vec<f64> = sample
        .blocks
        .iter()
        .map(|b| b.iter().map(|&i| vals[i]).sum())
        .collect();
    let mut rest: Vec<f64> = sample.rest().iter().map(|&i| vals[i]).collect();
    let original = rest.clone();
    let (mut in2, mut in3) = (false, false);
    let mut check = |s: f64| -> bool {
        if hits(&table.chi1, s) {
            return true;
        }
        in2 |= hits(&table.chi2, s);
        in3 |= hits(&table.chi3, s);
        in2 && in3
    };
    for order in 0..3 {
        match order {
            0 => rest.clone_from(&original),
            1 => rest.sort_by(f64::total_cmp),
            _ => rest.reverse(),
        }
        for mask in 0u32..1 << block_sums.len() {
            let mut s: f64 = (0..block_sums.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| block_sums[i])
                .sum();
            if check(s) {
                return true;
            }
            for &x in &rest {
                s += x;
                if check(s) {
                    return true;
                }
            }
        }
    }
    false
}

/// Decides whether a sample satisfies one of the options under `table`.
pub fn judge(sample: &XiSample, table: &RegionTable) -> SampleVerdict {
    if sample.seq.values().iter().any(|&x| x >= table.chi0) || constructive_witness(sample, table) {
        return SampleVerdict::Covered;
    }
    let opts = check_options_in(&sample.seq, table);
    if opts.any() {
        SampleVerdict::Covered
    } else if opts.undecided {
        SampleVerdict::Undecided
    } else {
        SampleVerdict::AllOptionsFail
    }
}

/// Result of a falsification run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FalsifyReport {
    pub case_id: String,
    pub checked: u64,
    pub undecided: u64,
    /// Counterexamples (the first few are kept in full).
    pub counterexamples: Vec<XiSample>,
    pub counterexample_count: u64,
}

impl FalsifyReport {
    pub fn passed(&self) -> bool {
        self.counterexample_count == 0
    }
}

/// Counterexamples kept in a report.
const KEPT: usize = 8;

/// Samples `count` sequences for `case` and reports those meeting no option.
pub fn falsify_case(case: &CaseSpec, seed: u64, count: u64, eps1: f64) -> Result<FalsifyReport, CombError> {
    let table = judge_table(case, eps1)?;
    falsify_case_against(case, &table, seed, count, eps1)
}

/// Region table used to judge samples of `case`.
pub fn judge_table(case: &CaseSpec, eps1: f64) -> Result<RegionTable, CombError> {
    Ok(RegionTable::at(case.a_probe(), eps1 + JUDGE_SLACK)?)
}

/// As [`falsify_case`] with an explicit region table.
pub fn falsify_case_against(
    case: &CaseSpec,
    table: &RegionTable,
    seed: u64,
    count: u64,
    eps1: f64,
) -> Result<FalsifyReport, CombError> {
    let mut report = FalsifyReport {
        case_id: case.id.clone(),
        checked: 0,
        undecided: 0,
        counterexamples: Vec::new(),
        counterexample_count: 0,
    };
    for sample in sample_xi(case, seed, count, eps1)? {
        let sample = sample?;
        report.checked += 1;
        match judge(&sample, table) {
            SampleVerdict::Covered => {}
            SampleVerdict::Undecided => report.undecided += 1,
            SampleVerdict::AllOptionsFail => {
                report.counterexample_count += 1;
                if report.counterexamples.len() < KEPT {
                    report.counterexamples.push(sample);
                }
            }
        }
    }
    Ok(report)
}

/// Region table of the first branch with χ₁, χ₂ and χ₃ all narrowed to [0.30, 0.31].
pub fn narrowed_table(eps1: f64) -> Result<RegionTable, CombError> {
    let mut table = RegionTable::at(0.5, eps1)?;
    let narrow = RegionSet::new(vec![(0.30, 0.31)]);
    table.chi1 = narrow.clone();
    table.chi2 = narrow.clone();
    table.chi3 = narrow;
    Ok(table)
}

fn ell(k: u8) -> BoundExpr {
    v(Var::Ell(k))
}

fn half() -> BoundExpr {
    v(Var::Eps1) / 2.0
}

fn quarter() -> BoundExpr {
    v(Var::Eps1) / 4.0
}

/// x ≤ bound.
fn at_most(x: BoundExpr, bound: BoundExpr) -> BoundExpr {
    bound - x
}

/// x ≥ bound.
fn at_least(x: BoundExpr, bound: BoundExpr) -> BoundExpr {
    x - bound
}

/// x ∈ [lo − ε₁/2, hi + ε₁/2].
fn within(x: &BoundExpr, lo: BoundExpr, hi: BoundExpr) -> BoundExpr {
    min(&(x - (lo - half())), &((hi + half()) - x))
}

/// x in the union of the widened intervals [lo − ε₁/2, hi + ε₁/2].
fn within_any(x: &BoundExpr, ranges: &[(f64, f64)]) -> BoundExpr {
    max_all(ranges.iter().map(|&(lo, hi)| within(x, c(lo), c(hi))))
}

fn first_three() -> BoundExpr {
    ell(1) + ell(2) + ell(3)
}

/// ℓ*ₖ ≤ (cap − Σ_{i<k} ℓ*ᵢ)/2 + ε₁/4.
fn halved(k: u8, cap: f64, before: BoundExpr) -> BoundExpr {
    at_most(ell(k), (cap - before) / 2.0 + quarter())
}

struct Builder {
    cases: Vec<CaseSpec>,
}

impl Builder {
    #[allow(clippy::too_many_arguments)]
    fn add(
        &mut self,
        family: Family,
        label: &str,
        a_interval: (f64, f64),
        rs: &[usize],
        beta: Option<BetaRule>,
        min_part: Option<f64>,
        constraints: impl Fn(usize) -> Vec<BoundExpr>,
        anchor: &str,
    ) {
        for &r in rs {
            self.cases.push(CaseSpec {
                id: format!("{label} r={r}"),
                family,
                a_interval,
                r,
                beta,
                min_part,
                constraints: constraints(r),
                anchor: anchor.to_string(),
            });
        }
    }

    fn star(&mut self, label: &str, a: (f64, f64), rs: &[usize], beta: BetaRule, cons: impl Fn(usize) -> Vec<BoundExpr>, anchor: &str) {
        self.add(Family::RStar, label, a, rs, Some(beta), None, cons, anchor);
    }

    fn star_star(&mut self, label: &str, a: (f64, f64), rs: &[usize], min_part: f64, cons: impl Fn(usize) -> Vec<BoundExpr>, anchor: &str) {
        self.add(Family::RStarStar, label, a, rs, None, Some(min_part), cons, anchor);
    }
}

const A1: (f64, f64) = (0.475, 0.53);
const A2: (f64, f64) = (0.53, 0.545);
const A3: (f64, f64) = (0.545, 0.57);
const A4: (f64, f64) = (0.57, 0.59);
const A5: (f64, f64) = (0.59, 0.61);
const A6: (f64, f64) = (0.61, 0.77);

fn none(_: usize) -> Vec<BoundExpr> {
    Vec::new()
}

fn first_family(b: &mut Builder) {
    use BetaRule::{AtMost, Fixed};
    let h = half;
    // a ≤ 0.53
    b.star("I.i", A1, &[0, 1], Fixed(0.07), none, "case I(i): r <= 1");
    b.star("I.ii", A1, &[2, 3], Fixed(0.07), |_| vec![halved(2, 0.71, ell(1))], "case I(ii): l2 <= (0.71 - l1)/2");
    b.star("I.iii", A1, &[4, 5], Fixed(0.07), |_| vec![halved(4, 0.71, first_three())], "case I(iii): l4 <= (0.71 - l1 - l2 - l3)/2");
    // (0.53, 0.545]
    b.star("II.i", A2, &[0, 1], Fixed(0.08), none, "case II(i): r <= 1");
    b.star(
        "II.ii",
        A2,
        &[2, 3],
        AtMost(0.09),
        |_| {
            vec![
                at_least(ell(1), 0.474 + h()),
                at_most(ell(2), min(&(0.595 - ell(1) + h()), &((0.715 - ell(1)) / 2.0 + quarter()))),
            ]
        },
        "case II(ii): l1 >= 0.474, l2 <= min{0.595 - l1, (0.715 - l1)/2}",
    );
    b.star(
        "II.iii",
        A2,
        &[2, 3],
        Fixed(0.08),
        |_| vec![at_most(ell(1), 0.427 + h()), halved(2, 0.655, ell(1))],
        "case II(iii): l1 <= 0.427, l2 <= (0.655 - l1)/2",
    );
    b.star(
        "II.iv",
        A2,
        &[4, 5],
        Fixed(0.08),
        |_| {
            vec![
                at_most(ell(1), 0.285 + h()),
                halved(2, 0.655, ell(1)),
                halved(4, 0.655, first_three()),
            ]
        },
        "case II(iv): l1 <= 0.285, l2 <= (0.655 - l1)/2, l4 <= (0.655 - l1 - l2 - l3)/2",
    );
    // (0.545, 0.57]
    let beta3 = Fixed(0.075);
    b.star("III.i", A3, &[0, 1], beta3, none, "case III(i): r <= 1");
    b.star(
        "III.ii",
        A3,
        &[2, 3],
        beta3,
        |_| {
            vec![
                at_least(ell(2), 0.475 - ell(1) - h()),
                at_most(ell(2), min(&(0.525 - ell(1)), &c(0.14)) + h()),
            ]
        },
        "case III(ii): l2 in [0.475 - l1, min{0.525 - l1, 0.14}]",
    );
    b.star("III.iii", A3, &[2, 3], beta3, |_| vec![halved(2, 0.6, ell(1))], "case III(iii): l2 <= (0.6 - l1)/2");
    b.star(
        "III.iv",
        A3,
        &[4, 5],
        beta3,
        |_| vec![at_most(ell(2), 0.4 - ell(1) + h()), halved(4, 0.615, first_three())],
        "case III(iv): l2 <= 0.4 - l1, l4 <= (0.615 - l1 - l2 - l3)/2",
    );
    // (0.57, 0.59]
    let beta4 = Fixed(0.075);
    b.star("IV.i", A4, &[0, 1], beta4, none, "case IV(i): r <= 1");
    b.star(
        "IV.ii",
        A4,
        &[2, 3],
        beta4,
        |_| {
            vec![
                at_least(ell(1), 0.455 - h()),
                at_most(ell(2), min(&(0.58 - ell(1) + h()), &((0.685 - ell(1)) / 2.0 + quarter()))),
            ]
        },
        "case IV(ii): l1 >= 0.455, l2 <= min{0.58 - l1, (0.685 - l1)/2}",
    );
    b.star(
        "IV.iii",
        A4,
        &[2, 3],
        AtMost(0.105),
        |_| vec![within(&ell(1), c(0.42), c(0.455)), halved(2, 0.685, ell(1))],
        "case IV(iii): l1 in [0.42, 0.455], l2 <= (0.685 - l1)/2",
    );
    b.star(
        "IV.iv",
        A4,
        &[2, 3],
        beta4,
        |_| {
            vec![
                within(&ell(1), c(0.315), c(0.38)),
                at_most(ell(2), max(&(0.145 + h()), &((0.62 - ell(1)) / 2.0 + quarter()))),
            ]
        },
        "case IV(iv): l1 in [0.315, 0.38], l2 <= max{0.145, (0.62 - l1)/2}",
    );
    b.star(
        "IV.v",
        A4,
        &[2, 3],
        beta4,
        |_| vec![within(&ell(1), c(0.29), c(0.315)), halved(2, 0.62, ell(1))],
        "case IV(v): l1 in [0.29, 0.315], l2 <= (0.62 - l1)/2",
    );
    b.star(
        "IV.vi",
        A4,
        &[2, 3],
        beta4,
        |_| {
            vec![
                at_most(ell(1), 0.29 + h()),
                at_most(ell(2), min(&(0.2275 + h()), &((0.685 - ell(1)) / 2.0 + quarter()))),
            ]
        },
        "case IV(vi): l1 <= 0.29, l2 <= min{0.2275, (0.685 - l1)/2}",
    );
    b.star(
        "IV.vii",
        A4,
        &[2, 3],
        AtMost(0.105),
        |_| vec![at_most(ell(1), 0.29 + h()), within(&ell(2), 0.42 - ell(1), 0.455 - ell(1))],
        "case IV(vii): l1 <= 0.29, l2 in [0.42 - l1, 0.455 - l1]",
    );
    b.star(
        "IV.viii",
        A4,
        &[4, 5],
        beta4,
        |_| vec![at_most(ell(1), 0.29 + h()), halved(4, 0.62, first_three())],
        "case IV(viii): l1 <= 0.29, l4 <= (0.62 - l1 - l2 - l3)/2",
    );
    // (0.59, 0.61]
    let beta5 = Fixed(0.07);
    b.star("V.i", A5, &[0, 1], beta5, none, "case V(i): r <= 1");
    b.star(
        "V.ii",
        A5,
        &[2, 3],
        beta5,
        |_| {
            vec![
                at_least(ell(1), 0.435 - h()),
                at_most(ell(2), min(&(0.105 + h()), &((0.67 - ell(1)) / 2.0 + quarter()))),
            ]
        },
        "case V(ii): l1 >= 0.435, l2 <= min{0.105, (0.67 - l1)/2}",
    );
    b.star(
        "V.iii",
        A5,
        &[2, 3],
        AtMost(0.09),
        |_| vec![within(&ell(1), c(0.42), c(0.435)), halved(2, 0.67, ell(1))],
        "case V(iii): l1 in [0.42, 0.435], l2 <= (0.67 - l1)/2",
    );
    b.star(
        "V.iv",
        A5,
        &[2, 3],
        beta5,
        |_| vec![within(&ell(1), c(0.33), c(0.365)), at_most(ell(2), 0.1524 + h())],
        "case V(iv): l1 in [0.33, 0.365], l2 <= 0.1524",
    );
    b.star(
        "V.v",
        A5,
        &[2, 3],
        beta5,
        |_| vec![within(&ell(1), c(0.305), c(0.33)), halved(2, 0.635, ell(1))],
        "case V(v): l1 in [0.305, 0.33], l2 <= (0.635 - l1)/2",
    );
    b.star(
        "V.vi",
        A5,
        &[2, 3],
        beta5,
        |_| vec![at_most(ell(1), 0.305 + h()), at_most(ell(2), 0.2099 + h())],
        "case V(vi): l1 <= 0.305, l2 <= 0.2099",
    );
    b.star(
        "V.vii",
        A5,
        &[4, 5],
        beta5,
        |_| vec![at_most(ell(1), 0.305 + h()), halved(4, 0.635, first_three())],
        "case V(vii): l1 <= 0.305, l4 <= (0.635 - l1 - l2 - l3)/2",
    );
    // a > 0.61
    let beta6 = Fixed(0.065);
    b.star("VI.i", A6, &[0, 1], beta6, none, "case VI(i): r <= 1");
    b.star(
        "VI.ii",
        A6,
        &[2, 3],
        beta6,
        |_| {
            vec![
                at_least(ell(1), 0.42 - h()),
                at_most(ell(2), min(&(0.58 - ell(1)), &c(0.1)) + h()),
            ]
        },
        "case VI(ii): l1 >= 0.42, l2 <= min{0.58 - l1, 0.1}",
    );
    b.star(
        "VI.iii",
        A6,
        &[2, 3],
        beta6,
        |_| vec![within(&ell(1), c(0.325), c(0.355)), halved(2, 0.645, ell(1))],
        "case VI(iii): l1 in [0.325, 0.355], l2 <= (0.645 - l1)/2",
    );
    b.star(
        "VI.iv",
        A6,
        &[2, 3],
        beta6,
        |_| vec![at_most(ell(1), 0.325 + h()), at_most(ell(2), 0.2099 + h())],
        "case VI(iv): l1 <= 0.325, l2 <= 0.2099",
    );
    b.star(
        "VI.v",
        A6,
        &[4, 5],
        beta6,
        |_| vec![at_most(ell(1), 0.325 + h()), halved(4, 0.645, first_three())],
        "case VI(v): l1 <= 0.325, l4 <= (0.645 - l1 - l2 - l3)/2",
    );
    b.star(
        "VI.vi",
        A6,
        &[4, 5],
        beta6,
        |_| vec![at_most(ell(1), 0.325 + h()), halved(4, 0.42, ell(2) + ell(3))],
        "case VI(vi): l1 <= 0.325, l4 <= (0.42 - l2 - l3)/2",
    );
}

/// Some pair {ℓ*₁, ℓ*ᵢ}, i ≠ 1, has ℓ*₁ + ℓ*ᵢ in the widened ranges.
fn first_pair_in(r: usize, ranges: &[(f64, f64)]) -> BoundExpr {
    max_all((2..=r as u8).map(|i| within_any(&(ell(1) + ell(i)), ranges)))
}

fn second_family(b: &mut Builder) {
    let h = half;
    // a ≤ 0.53
    b.star_star("A.a", A1, &[2], 0.07, |_| vec![within(&ell(1), c(0.29), c(0.36))], "case A(a): l1 in [0.29, 0.36]");
    b.star_star(
        "A.b",
        A1,
        &[2],
        0.07,
        |_| vec![within(&ell(2), 0.64 - ell(1), 0.71 - ell(1))],
        "case A(b): l2 in [0.64 - l1, 0.71 - l1]",
    );
    b.star_star(
        "A.c",
        A1,
        &[4],
        0.07,
        |_| vec![halved(2, 0.71, ell(1)), at_least(ell(3), 0.64 - ell(1) - ell(2) - h())],
        "case A(c): l2 <= (0.71 - l1)/2, l3 >= 0.64 - l1 - l2",
    );
    b.star_star(
        "A.d",
        A1,
        &[4],
        0.07,
        |_| vec![within(&ell(1), c(0.22), c(0.29)), at_most(ell(4), 0.36 - ell(1) + h())],
        "case A(d): l1 in [0.22, 0.29], l4 <= 0.36 - l1",
    );
    b.star_star(
        "A.e",
        A1,
        &[6],
        0.07,
        |_| {
            let pairs = (1..=6u8).flat_map(|i| (i + 1..=6).map(move |j| (i, j)));
            vec![max_all(pairs.map(|(i, j)| within(&(ell(i) + ell(j)), c(0.29), c(0.36))))]
        },
        "case A(e): some l_i + l_j in [0.29, 0.36]",
    );
    b.star_star(
        "A.f",
        A1,
        &[6],
        0.07,
        |_| {
            vec![
                at_most(first_three() + ell(4) + ell(5), 0.71 + h()),
                at_least(ell(1), 0.18 - h()),
                within(&ell(3), c(0.145), c(0.29)),
            ]
        },
        "case A(f): l1 + ... + l5 <= 0.71, l1 >= 0.18, l3 in [0.145, 0.29]",
    );
    // (0.53, 0.545]
    b.star_star(
        "B.a",
        A2,
        &[2],
        0.08,
        |_| vec![within_any(&ell(1), &[(0.315, 0.345), (0.427, 0.474)])],
        "case B(a): l1 in [0.315, 0.345] or [0.427, 0.474]",
    );
    b.star_star(
        "B.b",
        A2,
        &[2],
        0.08,
        |_| vec![within_any(&(ell(1) + ell(2)), &[(0.427, 0.474), (0.526, 0.573), (0.655, 0.685)])],
        "case B(b): l1 + l2 in [0.427, 0.474], [0.526, 0.573] or [0.655, 0.685]",
    );
    b.star_star(
        "B.c",
        A2,
        &[2],
        0.08,
        |_| {
            vec![
                within(&ell(1), c(0.285), c(0.375)),
                within_any(&(ell(1) + ell(2)), &[(0.405, 0.485), (0.515, 0.595)]),
            ]
        },
        "case B(c): l1 in [0.285, 0.375], l1 + l2 in [0.405, 0.485] or [0.515, 0.595]",
    );
    // (0.545, 0.57]
    b.star_star("C.a", A3, &[2], 0.075, |_| vec![within(&ell(1), c(0.4), c(0.475))], "case C(a): l1 in [0.4, 0.475]");
    b.star_star(
        "C.b",
        A3,
        &[2],
        0.075,
        |_| vec![within_any(&(ell(1) + ell(2)), &[(0.4, 0.475), (0.525, 0.6)])],
        "case C(b): l2 in [0.4 - l1, 0.475 - l1] or [0.525 - l1, 0.6 - l1]",
    );
    b.star_star(
        "C.c",
        A3,
        &[4],
        0.075,
        |_| vec![within(&ell(4), 0.4 - ell(1) - ell(2), 0.475 - ell(1) - ell(2))],
        "case C(c): l4 in [0.4 - l1 - l2, 0.475 - l1 - l2]",
    );
    // (0.57, 0.59]
    b.star_star("D.a", A4, &[2], 0.075, |_| vec![within(&ell(1), c(0.38), c(0.42))], "case D(a): l1 in [0.38, 0.42]");
    b.star_star(
        "D.b",
        A4,
        &[2],
        0.075,
        |_| vec![within(&ell(1), c(0.42), c(0.455)), within(&ell(2), 0.58 - ell(1), 0.685 - ell(1))],
        "case D(b): l1 in [0.42, 0.455], l2 in [0.58 - l1, 0.685 - l1]",
    );
    b.star_star(
        "D.c",
        A4,
        &[2, 4],
        0.075,
        |r| {
            vec![
                within(&ell(1), c(0.315), c(0.38)),
                first_pair_in(r, &[(0.38, 0.455), (0.545, 0.62)]),
            ]
        },
        "case D(c): l1 in [0.315, 0.38], some l1 + l_i in [0.38, 0.455] or [0.545, 0.62]",
    );
    b.star_star(
        "D.d",
        A4,
        &[2, 4],
        0.075,
        |r| vec![first_pair_in(r, &[(0.38, 0.42), (0.58, 0.62)])],
        "case D(d): some l_i in [0.38 - l1, 0.42 - l1] or [0.58 - l1, 0.62 - l1]",
    );
    b.star_star(
        "D.e",
        A4,
        &[4],
        0.075,
        |_| {
            vec![
                within(&ell(2), 0.42 - ell(1), 0.455 - ell(1)),
                within(&ell(4), 0.315 - ell(1), 0.42 - ell(1)),
            ]
        },
        "case D(e): l2 in [0.42 - l1, 0.455 - l1], l4 in [0.315 - l1, 0.42 - l1]",
    );
    b.star_star(
        "D.f",
        A4,
        &[4],
        0.075,
        |_| {
            vec![
                at_most(ell(1), 0.29 + h()),
                within(&ell(2), 0.315 - ell(1), 0.38 - ell(1)),
                within(&(ell(1) + ell(2) + ell(4)), c(0.38), c(0.455)),
            ]
        },
        "case D(f): l1 <= 0.29, l2 in [0.315 - l1, 0.38 - l1], l1 + l2 + l4 in [0.38, 0.455]",
    );
    b.star_star(
        "D.g",
        A4,
        &[4],
        0.075,
        |_| {
            vec![
                at_most(ell(1), 0.29 + h()),
                within(&ell(2), 0.315 - ell(1), 0.38 - ell(1)),
                within(&(ell(2) + ell(3) + ell(4)), c(0.38), c(0.455)),
            ]
        },
        "case D(g): l1 <= 0.29, l2 in [0.315 - l1, 0.38 - l1], l2 + l3 + l4 in [0.38, 0.455]",
    );
    // (0.59, 0.61]
    b.star_star(
        "E.a",
        A5,
        &[2, 4],
        0.07,
        |r| {
            let subsets = (1u32..1 << r).map(|mask| {
                let s = (0..r as u8)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| ell(i + 1))
                    .reduce(|x, y| x + y)
                    .unwrap();
                within_any(&s, &[(0.365, 0.42), (0.58, 0.635)])
            });
            vec![max_all(subsets)]
        },
        "case E(a): some sub-sum in [0.365, 0.42] or [0.58, 0.635]",
    );
    b.star_star(
        "E.b",
        A5,
        &[2],
        0.07,
        |_| vec![within(&ell(1), c(0.42), c(0.435)), within(&ell(2), 0.58 - ell(1), 0.67 - ell(1))],
        "case E(b): l1 in [0.42, 0.435], l2 in [0.58 - l1, 0.67 - l1]",
    );
    b.star_star(
        "E.c",
        A5,
        &[2],
        0.07,
        |_| {
            vec![
                within(&ell(1), c(0.33), c(0.365)),
                within_any(&(ell(1) + ell(2)), &[(0.365, 0.435), (0.565, 0.635)]),
            ]
        },
        "case E(c): l1 in [0.33, 0.365], l1 + l2 in [0.365, 0.435] or [0.565, 0.635]",
    );
    // a > 0.61
    b.star_star("F.a", A6, &[2], 0.065, |_| vec![within(&ell(1), c(0.355), c(0.42))], "case F(a): l1 in [0.355, 0.42]");
    b.star_star(
        "F.b",
        A6,
        &[2, 4],
        0.065,
        |r| vec![first_pair_in(r, &[(0.355, 0.42), (0.58, 0.645)])],
        "case F(b): some l1 + l_i in [0.355, 0.42] or [0.58, 0.645]",
    );
}

/// Every transcribed case, first family then second, in source order.
pub fn case_catalog() -> Vec<CaseSpec> {
    let mut b = Builder { cases: Vec::new() };
    first_family(&mut b);
    second_family(&mut b);
    debug_assert!(b.cases.iter().all(|c| branch(c.a_probe()) == branch(c.a_interval.1)));
    b.cases
}

/// Cases whose id equals `id` or starts with `id` followed by " r=".
pub fn find_cases(id: &str) -> Vec<CaseSpec> {
    case_catalog()
        .into_iter()
        .filter(|c| c.id == id || c.id.strip_prefix(id).is_some_and(|rest| rest.starts_with(" r=")))
        .collect()
}

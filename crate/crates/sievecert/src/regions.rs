//! Piecewise region tables χ₀–χ₃ and the option (1)/(2)/(3) predicate on
//! finite length sequences.

use serde::Serialize;
use thiserror::Error;

/// Lowest admissible `a` when ε₁ = 0.
pub const A_MIN: f64 = 0.475;
/// Highest admissible `a`.
pub const A_MAX: f64 = 0.77;
/// Ratio ε/ε₁.
pub const EPS_OVER_EPS1: f64 = 1e5;
/// Tolerance on Σℓᵢ = 1.
pub const SUM_TOLERANCE: f64 = 1e-12;
/// Largest accepted sequence length.
pub const MAX_LEN: usize = 10_000;
/// Longest sequence decided by exhaustive subset enumeration.
pub const EXACT_LEN: usize = 24;
/// Cell width of the reachable-sum grid.
pub const GRID: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegionError {
    #[error("a = {0} is outside the admissible range")]
    AOutOfRange(f64),
    #[error("region index {0} is not in 0..=3")]
    BadIndex(usize),
    #[error("invalid sequence: {0}")]
    InvalidSequence(String),
}

/// A finite union of closed subintervals of [0, 1], kept sorted and merged.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionSet {
    intervals: Vec<(f64, f64)>,
}

impl RegionSet {
    pub fn new(mut intervals: Vec<(f64, f64)>) -> Self {
        for &(lo, hi) in &intervals {
            assert!(lo <= hi, "interval [{lo}, {hi}] is reversed");
        }
        intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
        for (lo, hi) in intervals {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        RegionSet { intervals: merged }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn contains(&self, s: f64) -> bool {
        self.intervals.iter().any(|&(lo, hi)| lo <= s && s <= hi)
    }

    pub fn intersects(&self, lo: f64, hi: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= hi && lo <= b)
    }

    /// The union with its image under s ↦ 1 − s.
    pub fn with_reflection(&self) -> RegionSet {
        let mut all = self.intervals.clone();
        all.extend(self.intervals.iter().map(|&(lo, hi)| (1.0 - hi, 1.0 - lo)));
        RegionSet::new(all)
    }

    /// A copy with every interval replaced by `f(lo, hi)`.
    pub fn map(&self, f: impl Fn(f64, f64) -> (f64, f64)) -> RegionSet {
        RegionSet::new(self.intervals.iter().map(|&(lo, hi)| f(lo, hi)).collect())
    }
}

/// Index of the a-branch: 0 for a ≤ 0.53, then (0.53,0.545], (0.545,0.57],
/// (0.57,0.59], (0.59,0.61], and 5 for a > 0.61.
pub fn branch(a: f64) -> usize {
    if a <= 0.53 {
        0
    } else if a <= 0.545 {
        1
    } else if a <= 0.57 {
        2
    } else if a <= 0.59 {
        3
    } else if a <= 0.61 {
        4
    } else {
        5
    }
}

fn check_a(a: f64, eps1: f64) -> Result<(), RegionError> {
    let eps = EPS_OVER_EPS1 * eps1;
    if !(a >= A_MIN - eps && a <= A_MAX) {
        return Err(RegionError::AOutOfRange(a));
    }
    Ok(())
}

const CHI0: [f64; 6] = [0.290, 0.315, 0.335, 0.330, 0.330, 0.320];

/// Option (1) threshold χ₀(a).
pub fn chi0(a: f64, eps1: f64) -> Result<f64, RegionError> {
    check_a(a, eps1)?;
    Ok(CHI0[branch(a)] - eps1)
}

fn widen(raw: &[(f64, f64)], eps1: f64) -> RegionSet {
    RegionSet::new(raw.iter().map(|&(lo, hi)| (lo - eps1, hi + eps1)).collect())
}

fn chi1_tilde(b: usize) -> &'static [(f64, f64)] {
    match b {
        0 => &[(0.290, 0.360)],
        1 => &[(0.315, 0.345), (0.427, 0.474)],
        2 => &[(0.400, 0.475)],
        3 => &[(0.380, 0.420)],
        4 => &[(0.365, 0.420)],
        _ => &[(0.355, 0.420)],
    }
}

fn chi1_set(b: usize, eps1: f64) -> RegionSet {
    widen(chi1_tilde(b), eps1).with_reflection()
}

/// Region χ_k(a) for k in 1..=3, or [χ₀(a), 1] for k = 0.
pub fn chi(k: usize, a: f64, eps1: f64) -> Result<RegionSet, RegionError> {
    check_a(a, eps1)?;
    let b = branch(a);
    Ok(match k {
        0 => RegionSet::new(vec![(CHI0[b] - eps1, 1.0)]),
        1 => chi1_set(b, eps1),
        2 => match b {
            1 => widen(&[(0.405, 0.485), (0.515, 0.595)], eps1),
            3 => widen(&[(0.380, 0.455), (0.545, 0.620)], eps1),
            4 => widen(&[(0.365, 0.435), (0.565, 0.635)], eps1),
            _ => chi1_set(b, eps1),
        },
        3 => match b {
            1 => widen(&[(0.285, 0.375), (0.625, 0.715)], eps1),
            3 => widen(&[(0.315, 0.420), (0.580, 0.685)], eps1),
            4 => widen(&[(0.330, 0.420), (0.580, 0.670)], eps1),
            _ => chi1_set(b, eps1),
        },
        _ => return Err(RegionError::BadIndex(k)),
    })
}

/// The full table for one `a`: threshold χ₀ and sets χ₁, χ₂, χ₃.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionTable {
    pub chi0: f64,
    pub chi1: RegionSet,
    pub chi2: RegionSet,
    pub chi3: RegionSet,
}

impl RegionTable {
    pub fn at(a: f64, eps1: f64) -> Result<Self, RegionError> {
        Ok(RegionTable {
            chi0: chi0(a, eps1)?,
            chi1: chi(1, a, eps1)?,
            chi2: chi(2, a, eps1)?,
            chi3: chi(3, a, eps1)?,
        })
    }
}

/// A validated finite sequence of length fractions summing to one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EllSequence {
    values: Vec<f64>,
}

impl EllSequence {
    pub fn new(values: Vec<f64>) -> Result<Self, RegionError> {
        if values.is_empty() || values.len() > MAX_LEN {
            return Err(RegionError::InvalidSequence(format!(
                "length {}",
                values.len()
            )));
        }
        if let Some(x) = values.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(RegionError::InvalidSequence(format!(
                "entry {x} outside [0, 1]"
            )));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(RegionError::InvalidSequence(format!(
                "sum {sum} differs from 1"
            )));
        }
        Ok(EllSequence { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Outcome of a subset-sum membership query.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Membership {
    Yes,
    /// The grid method could neither confirm nor exclude membership.
    Maybe,
    No,
}

impl Membership {
    fn and(self, o: Membership) -> Membership {
        use Membership::*;
        match (self, o) {
            (No, _) | (_, No) => No,
            (Yes, Yes) => Yes,
            _ => Maybe,
        }
    }
}

/// Which of options (1)–(3) hold. `undecided` is set when no option was
/// confirmed but the grid method left at least one of them open.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Options {
    pub opt1: bool,
    pub opt2: bool,
    pub opt3: bool,
    pub undecided: bool,
}

impl Options {
    pub fn any(&self) -> bool {
        self.opt1 || self.opt2 || self.opt3
    }

    /// True when every option is definitely violated.
    pub fn all_fail(&self) -> bool {
        !self.any() && !self.undecided
    }
}

/// Subset sums of a sequence, queried against region sets.
pub trait SubsetSums {
    fn membership(&self, target: &RegionSet) -> Membership;
}

/// Every subset sum, by meet-in-the-middle enumeration.
pub struct ExactSums {
    left: Vec<f64>,
    right: Vec<f64>,
}

fn all_sums(items: &[f64]) -> Vec<f64> {
    let mut sums = Vec::with_capacity(1 << items.len());
    sums.push(0.0);
    for &x in items {
        let n = sums.len();
        for i in 0..n {
            sums.push(sums[i] + x);
        }
    }
    sums
}

impl ExactSums {
    pub fn new(items: &[f64]) -> Self {
        assert!(
            items.len() <= 2 * EXACT_LEN,
            "enumeration limited to short sequences"
        );
        let (l, r) = items.split_at(items.len() / 2);
        let left = all_sums(l);
        let mut right = all_sums(r);
        right.sort_by(f64::total_cmp);
        ExactSums { left, right }
    }
}

impl SubsetSums for ExactSums {
    fn membership(&self, target: &RegionSet) -> Membership {
        for &x in &self.left {
            for &(lo, hi) in target.intervals() {
                let i = self.right.partition_point(|&y| x + y < lo);
                if i < self.right.len() && x + self.right[i] <= hi {
                    return Membership::Yes;
                }
            }
        }
        Membership::No
    }
}

#[derive(Clone, Copy)]
struct Cell {
    /// Enclosure of every subset sum that lands in this cell (empty if lo > hi).
    lo: f64,
    hi: f64,
    /// Smallest and largest subset sums known exactly (NaN if none).
    wit_lo: f64,
    wit_hi: f64,
}

const EMPTY: Cell = Cell {
    lo: f64::INFINITY,
    hi: f64::NEG_INFINITY,
    wit_lo: f64::NAN,
    wit_hi: f64::NAN,
};

impl Cell {
    fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    fn witness(&mut self, w: f64) {
        self.wit_lo = if self.wit_lo.is_nan() {
            w
        } else {
            self.wit_lo.min(w)
        };
        self.wit_hi = if self.wit_hi.is_nan() {
            w
        } else {
            self.wit_hi.max(w)
        };
    }
}

/// Reachable subset sums on a grid, with a sound enclosure per cell.
pub struct GridSums {
    cells: Vec<Cell>,
}

fn cell_index(s: f64, n: usize) -> usize {
    ((s / GRID).floor().max(0.0) as usize).min(n - 1)
}

impl GridSums {
    pub fn new(items: &[f64]) -> Self {
        let n = (1.0 / GRID).round() as usize + 2;
        let mut cells = vec![EMPTY; n];
        cells[0] = Cell {
            lo: 0.0,
            hi: 0.0,
            wit_lo: 0.0,
            wit_hi: 0.0,
        };
        let mut top = 0usize;
        for &x in items {
            // Descending order: a cell only feeds cells at or above itself,
            // so each source is read before it can be updated for this item.
            for i in (0..=top).rev() {
                let c = cells[i];
                if c.is_empty() {
                    continue;
                }
                let lo = c.lo + x;
                let hi = c.hi + x;
                let first = cell_index(lo, n);
                let last = cell_index(hi, n);
                for (k, e) in cells.iter_mut().enumerate().take(last + 1).skip(first) {
                    let cell_lo = if k == first {
                        lo
                    } else {
                        lo.max(k as f64 * GRID)
                    };
                    let cell_hi = if k == last {
                        hi
                    } else {
                        hi.min((k + 1) as f64 * GRID)
                    };
                    e.lo = e.lo.min(cell_lo);
                    e.hi = e.hi.max(cell_hi);
                }
                for w in [c.wit_lo + x, c.wit_hi + x] {
                    if !w.is_nan() {
                        cells[cell_index(w, n)].witness(w);
                    }
                }
                top = top.max(last);
            }
        }
        GridSums { cells }
    }
}

impl SubsetSums for GridSums {
    fn membership(&self, target: &RegionSet) -> Membership {
        let n = self.cells.len();
        let mut maybe = false;
        for &(lo, hi) in target.intervals() {
            let first = cell_index(lo, n).saturating_sub(1);
            let last = (cell_index(hi, n) + 1).min(n - 1);
            for c in self.cells[first..=last].iter().filter(|c| !c.is_empty()) {
                let hit = |w: f64| !w.is_nan() && lo <= w && w <= hi;
                if hit(c.wit_lo) || hit(c.wit_hi) {
                    return Membership::Yes;
                }
                if c.lo <= hi && lo <= c.hi {
                    maybe = true;
                }
            }
        }
        if maybe {
            Membership::Maybe
        } else {
            Membership::No
        }
    }
}

/// Evaluates the three options against precomputed subset sums.
pub fn options_with(seq: &EllSequence, table: &RegionTable, sums: &dyn SubsetSums) -> Options {
    let opt1 = seq.values().iter().any(|&l| l >= table.chi0);
    let m2 = sums.membership(&table.chi1);
    let m3 = sums
        .membership(&table.chi2)
        .and(sums.membership(&table.chi3));
    let opt2 = m2 == Membership::Yes;
    let opt3 = m3 == Membership::Yes;
    let any = opt1 || opt2 || opt3;
    Options {
        opt1,
        opt2,
        opt3,
        undecided: !any && (m2 == Membership::Maybe || m3 == Membership::Maybe),
    }
}

/// Decides options (1)–(3) for `seq` at `a`; exact for j ≤ 24, grid-based above.
pub fn check_options(seq: &EllSequence, a: f64, eps1: f64) -> Result<Options, RegionError> {
    let table = RegionTable::at(a, eps1)?;
    Ok(check_options_in(seq, &table))
}

/// As [`check_options`] with an explicit region table.
pub fn check_options_in(seq: &EllSequence, table: &RegionTable) -> Options {
    if seq.len() <= EXACT_LEN {
        options_with(seq, table, &ExactSums::new(seq.values()))
    } else {
        options_with(seq, table, &GridSums::new(seq.values()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merging_overlapping_intervals() {
        let r = RegionSet::new(vec![(0.5, 0.7), (0.1, 0.2), (0.15, 0.3)]);
        assert_eq!(r.intervals(), &[(0.1, 0.3), (0.5, 0.7)]);
    }

    #[test]
    fn grid_sums_confirm_simple_membership() {
        let g = GridSums::new(&[0.3, 0.7]);
        let t = RegionSet::new(vec![(0.29, 0.31)]);
        assert_eq!(g.membership(&t), Membership::Yes);
        let t = RegionSet::new(vec![(0.4, 0.6)]);
        assert_eq!(g.membership(&t), Membership::No);
    }
}

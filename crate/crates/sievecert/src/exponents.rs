//! Threshold functions of the exponent analysis as expression trees, the
//! catalogue of numeric inequalities they are claimed to satisfy, and a
//! branch-and-bound certifier for those inequalities.

use crate::enclosure::{Scratch, Tape};
use crate::expr::{c, max, max_all, min, min_all, v, BoundExpr, ExprError, ParamBox, Point, Var};
use crate::interval::Interval;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

/// Distance kept from the singular edges σ = (1 + ν)/2 and σ = 1.
pub const EDGE_OFFSET: f64 = 1e-6;
/// Lower end of the small-σ range, (1 + ν)/2.
pub const SIGMA_FLOOR: f64 = (1.0 + crate::expr::NU) / 2.0;

/// The nine exponent tuples (U, V, W, X, Y, Z) in their canonical order.
pub const TUPLES: [[f64; 6]; 9] = [
    [1.0, 4.0, 4.0, 3.0, 4.0, 1.0],
    [0.5, 2.0, 1.5, 1.5, 2.0, 0.5],
    [0.4, 16.0 / 5.0, 12.0 / 5.0, 12.0 / 5.0, 16.0 / 5.0, 0.8],
    [0.4, 0.8, 0.6, 1.2, 1.6, 0.4],
    [1.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0, 1.0, 4.0 / 3.0, 1.0 / 3.0],
    [2.0 / 7.0, 16.0 / 21.0, 8.0 / 21.0, 8.0 / 7.0, 32.0 / 21.0, 8.0 / 21.0],
    [3.0 / 8.0, 2.0, 1.5, 15.0 / 8.0, 2.5, 5.0 / 8.0],
    [0.25, 4.0 / 3.0, 2.0 / 3.0, 1.25, 5.0 / 3.0, 5.0 / 12.0],
    [1.0 / 9.0, 16.0 / 9.0, 8.0 / 9.0, 5.0 / 3.0, 20.0 / 9.0, 5.0 / 9.0],
];

/// Which family of the tuple partition a tuple index belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TupleClass {
    /// Indices 1 and 6.
    Linear,
    /// Index 0.
    Leading,
    /// Index 2.
    Fifths,
    /// The remaining five.
    Residual,
}

pub fn tuple_class(index: usize) -> TupleClass {
    match index {
        0 => TupleClass::Leading,
        1 | 6 => TupleClass::Linear,
        2 => TupleClass::Fifths,
        _ => TupleClass::Residual,
    }
}

/// Mean-value exponent pairs (λ, μ) used by the large-value estimates.
const PAIRS: [(f64, f64); 2] = [(1.0, 2.0), (4.0, 6.0)];
const PAIRS_WITH_HIGH: [(f64, f64); 3] = [(1.0, 2.0), (4.0, 6.0), (11.0, 14.0)];

/// Builder for the small-σ threshold functions at a given (a, σ, B).
#[derive(Clone)]
pub struct Thresholds {
    a: BoundExpr,
    s: BoundExpr,
    b: BoundExpr,
    nu: BoundExpr,
    eps: BoundExpr,
    k: BoundExpr,
    l: BoundExpr,
    e: BoundExpr,
    /// Selects the a ≥ 0.64 variants of Λ* and Υ₂ on the residual tuples.
    pub high_a: bool,
}

/// max(1 − σ − ε₁, a + 1 − 2σ + ν + 2ε₁).
pub fn b_bound(a: &BoundExpr, s: &BoundExpr) -> BoundExpr {
    let nu = v(Var::Nu);
    let eps = v(Var::Eps1);
    max(&(1.0 - s - &eps), &(a + 1.0 - 2.0 * s + &nu + 2.0 * &eps))
}

impl Thresholds {
    /// Thresholds with B given by [`b_bound`].
    pub fn new(a: BoundExpr, s: BoundExpr) -> Self {
        let b = b_bound(&a, &s);
        Self::with_b(a, s, b)
    }

    /// Thresholds with an explicit B(a, σ).
    pub fn with_b(a: BoundExpr, s: BoundExpr, b: BoundExpr) -> Self {
        let eps = v(Var::Eps1);
        let k = (3.0 * &a + &b - 2.0 * &eps) / (3.0 * &a + 3.0 * &b - 6.0 * &eps);
        let l = (3.0 * &a - 2.0 * &b + 4.0 * &eps) / (3.0 * &a - &b + 2.0 * &eps);
        let e = min(&k, &l);
        Thresholds {
            a,
            s,
            b,
            nu: v(Var::Nu),
            eps,
            k,
            l,
            e,
            high_a: false,
        }
    }

    pub fn b(&self) -> BoundExpr {
        self.b.clone()
    }

    /// (3a + B − 2ε₁)/(3a + 3B − 6ε₁).
    pub fn k_ratio(&self) -> BoundExpr {
        self.k.clone()
    }

    /// (3a − 2B + 4ε₁)/(3a − B + 2ε₁).
    pub fn l_ratio(&self) -> BoundExpr {
        self.l.clone()
    }

    /// E = min(k_ratio, l_ratio).
    pub fn e_exponent(&self) -> BoundExpr {
        self.e.clone()
    }

    /// X₁, X₂, X₃, Y₁, Y₂ of the smooth-factor analysis.
    pub fn smooth_parts(&self) -> [BoundExpr; 5] {
        let (a, s, b, e, nu) = (&self.a, &self.s, &self.b, &self.eps, &self.nu);
        let k = self.k_ratio();
        let l = self.l_ratio();
        let x1 = (s - a / 4.0 + b / 4.0 - &k - 2.0 * e) / (0.5 - &k);
        let x2 = (s - a / 4.0 + b / 4.0 - &l - 2.0 * e) / (0.5 - &l);
        let x3 = (s - a / 6.0 + b / 12.0 - &k - 2.0 * e) / (0.5 - &k);
        let y1 = (s - (5.0 * a / 24.0 - 7.0 / 24.0 + s / 3.0 - nu / 24.0 + 2.0 * e + &k)) / (0.5 - &k);
        let y2 = (s - (a / 6.0 - 1.0 / 3.0 + s / 3.0 + 2.0 * e + &k)) / (2.0 / 3.0 - &k);
        [x1, x2, x3, y1, y2]
    }

    /// min{X₁, X₂, X₃, max{Y₁, Y₂}}.
    pub fn smooth_minimum(&self) -> BoundExpr {
        let [x1, x2, x3, y1, y2] = self.smooth_parts();
        min_all([x1, x2, x3, max(&y1, &y2)])
    }

    /// Λ* for tuple `index` (not defined for the leading tuple).
    pub fn lambda_star(&self, index: usize) -> BoundExpr {
        let [u, vv, w, x, y, z] = TUPLES[index];
        let (a, s, b, e, nu) = (&self.a, &self.s, &self.b, &self.eps, &self.nu);
        match tuple_class(index) {
            TupleClass::Linear => {
                -2.0 * u * a - 2.0 * (x - 2.0) + 2.0 * (y - vv) * s - 2.0 * z * nu + 4.0 * e
            }
            TupleClass::Fifths => {
                let ee = self.e_exponent();
                let common = (2.0 * a + 2.0 + 4.0 * nu - 10.0 * e) / 6.0;
                let t1 = (2.0 * a + 2.0 + 4.0 * nu - 6.0 * &ee - 10.0 * e) / (6.0 * (1.0 / 3.0 - &ee));
                let t2 = (1.0 / (-2.0 / 3.0)) * (&common + b / 2.0 - 1.0 - e);
                let t3 = min_all(PAIRS.iter().map(|&(lam, mu)| {
                    (1.0 / (1.0 / 3.0 - lam / mu))
                        * (&common + b / mu - a / mu - lam / mu - 2.0 * e / mu)
                }));
                min(&t1, &max(&t2, &t3))
            }
            TupleClass::Residual => {
                let ee = self.e_exponent();
                let d1 = (u * a + (x - 2.0) - (y - vv) * s + z * nu - 2.0 * e) / (vv - 2.0);
                let cc = (w - 2.0) / (vv - 2.0);
                let p1 = (s - &d1) / (&ee - cc);
                if self.high_a {
                    return p1;
                }
                let q0 = (1.0 / (1.0 - cc)) * (-&d1 + (2.0 + 2.0 * s - 7.0 * e) / 4.0);
                let qs = min_all(PAIRS_WITH_HIGH.iter().map(|&(lam, mu)| {
                    (1.0 / ((lam + 2.0) / (mu + 2.0) - cc))
                        * (-&d1 + (2.0 + mu * s - a - 7.0 * e) / (2.0 + mu))
                }));
                min(&p1, &max(&q0, &qs))
            }
            TupleClass::Leading => panic!("no lower threshold for the leading tuple"),
        }
    }

    /// Υ₂ for tuple `index`.
    pub fn upsilon_two(&self, index: usize) -> BoundExpr {
        let [u, vv, w, x, y, z] = TUPLES[index];
        let (a, s, b, e, nu) = (&self.a, &self.s, &self.b, &self.eps, &self.nu);
        match tuple_class(index) {
            TupleClass::Linear => {
                2.0 * a * (u - 1.0) + 2.0 * (x - 1.0) - 2.0 * (y - vv) * s + 2.0 * z * nu - 4.0 * e
            }
            TupleClass::Leading | TupleClass::Fifths => {
                let ee = self.e_exponent();
                let t1 = (a * (u - 1.0) + (x - 1.0) + z * nu - (vv - 2.0) * &ee - 2.0 * e)
                    / ((w - 1.0) - (vv - 2.0) * &ee);
                let t2 = (1.0 / ((w - 4.0) / (vv - 6.0) - (w - 1.0) / (vv - 2.0)))
                    * (4.0 * a * (u - 1.0) + 4.0 * x - 3.0 * vv + 2.0 + 4.0 * z * nu - 8.0 * e)
                    / ((vv - 2.0) * (vv - 6.0));
                let base = (a * (u - 1.0) + (x - 1.0) + z * nu - 2.0 * e) / (vv - 2.0);
                let ratio = (w - 1.0) / (vv - 2.0);
                let t3 = (1.0 / (ratio - 1.0)) * (&base + b / 2.0 - 1.0 - e);
                let t4 = max_all(PAIRS.iter().map(|&(lam, mu)| {
                    (&base + (b - a - lam - 2.0 * e) / mu) / (ratio - lam / mu)
                }));
                max(&max(&t1, &t2), &min(&t3, &t4))
            }
            TupleClass::Residual => {
                let ee = self.e_exponent();
                let d2 = (a * (u - 1.0) + (x - 1.0) - (y - vv) * s + z * nu - 2.0 * e) / (vv - 2.0);
                let c2 = (w - 1.0) / (vv - 2.0);
                let r1 = (s - &d2) / (&ee - c2);
                if self.high_a {
                    return r1;
                }
                let r0 = (1.0 / (1.0 - c2)) * (-&d2 + (2.0 + 2.0 * s - 7.0 * e) / 4.0);
                let rs = max_all(PAIRS_WITH_HIGH.iter().map(|&(lam, mu)| {
                    (1.0 / ((lam + 2.0) / (mu + 2.0) - c2))
                        * (-&d2 + (2.0 + mu * s - a - 7.0 * e) / (2.0 + mu))
                }));
                max(&r1, &min(&r0, &rs))
            }
        }
    }

    /// Υ₆ for tuple `index`.
    pub fn upsilon_six(&self, index: usize) -> BoundExpr {
        let [u, vv, w, x, y, z] = TUPLES[index];
        let (a, s, e, nu) = (&self.a, &self.s, &self.eps, &self.nu);
        (a * (u - 1.0) + (x - 4.0) - (y - 6.0) * s + z * nu - 2.0 * e)
            / ((w - 4.0) - (vv - 6.0) * self.e_exponent())
    }

    /// Υ* of the leading tuple.
    pub fn upsilon_star(&self) -> BoundExpr {
        let (a, b, e, nu) = (&self.a, &self.b, &self.eps, &self.nu);
        let ee = self.e_exponent();
        let t1 = (a + 1.0 + nu - 2.0 * &ee - 2.0 * e) / (2.0 * (1.0 - &ee));
        let t2 = max_all(PAIRS.iter().map(|&(lam, mu)| {
            (1.0 / (1.0 - lam / mu))
                * ((a + 1.0 + nu - 2.0 * e) / 2.0 + b / mu - a / mu - lam / mu - 2.0 * e / mu)
        }));
        max(&t1, &t2)
    }

    /// Largest Λ* over every tuple except the leading one.
    pub fn lambda_max(&self) -> BoundExpr {
        max_all((1..TUPLES.len()).map(|i| self.lambda_star(i)))
    }

    /// min{Υ*, minᵢ Υ₂}, or with max{Υ₂, Υ₆} per tuple when `with_six`.
    pub fn upsilon_min(&self, with_six: bool) -> BoundExpr {
        let per_tuple = (0..TUPLES.len()).map(|i| {
            if with_six {
                max(&self.upsilon_two(i), &self.upsilon_six(i))
            } else {
                self.upsilon_two(i)
            }
        });
        min(&self.upsilon_star(), &min_all(per_tuple))
    }

    /// Λ_E = (1 − B/2 − σ + ε₁)/(1 − E).
    pub fn lambda_e(&self) -> BoundExpr {
        (1.0 - &self.b / 2.0 - &self.s + &self.eps) / (1.0 - self.e_exponent())
    }

    /// Υ_{E,1} = (1 − B + a − 2σ + 2ε₁)/(1 − 2E).
    pub fn upsilon_e1(&self) -> BoundExpr {
        let (a, s, b, e) = (&self.a, &self.s, &self.b, &self.eps);
        (1.0 - b + a - 2.0 * s + 2.0 * e) / (1.0 - 2.0 * self.e_exponent())
    }

    /// Υ_{E,2} = max{Υ_{E,1}, (4 − B + a − 6σ + 6ε₁)/(4 − 6E)}.
    pub fn upsilon_e2(&self) -> BoundExpr {
        let (a, s, b, e) = (&self.a, &self.s, &self.b, &self.eps);
        let other = (4.0 - b + a - 6.0 * s + 6.0 * e) / (4.0 - 6.0 * self.e_exponent());
        max(&self.upsilon_e1(), &other)
    }
}

/// σ°₁(a) = min{1, a + 1/3}.
pub fn sigma_o1(a: &BoundExpr) -> BoundExpr {
    min(&c(1.0), &(a + 1.0 / 3.0))
}

/// σ°₂(a) = max{0.3a + 0.7, a + 0.25}.
pub fn sigma_o2(a: &BoundExpr) -> BoundExpr {
    max(&(0.3 * a + 0.7), &(a + 0.25))
}

fn m_term(a: &BoundExpr, s: &BoundExpr, tail: &dyn Fn(&BoundExpr, &BoundExpr) -> BoundExpr) -> BoundExpr {
    (a - 3.0 - v(Var::Nu)) / (4.0 * (1.0 - 2.0 * s)) + tail(a, s)
}

/// m₁(a, σ).
pub fn m_one(a: &BoundExpr, s: &BoundExpr) -> BoundExpr {
    let tail = |a: &BoundExpr, s: &BoundExpr| a * (3.0 - 3.0 * s) / ((3.0 * s - 1.0) * (1.0 - 2.0 * s));
    min(&m_term(a, s, &tail), &m_term(a, &sigma_o1(a), &tail))
}

/// m₂(a, σ).
pub fn m_two(a: &BoundExpr, s: &BoundExpr) -> BoundExpr {
    let tail = |a: &BoundExpr, s: &BoundExpr| a * (3.0 - 3.0 * s) / ((10.0 * s - 7.0) * (1.0 - 2.0 * s));
    min(&m_term(a, s, &tail), &m_term(a, &sigma_o2(a), &tail))
}

/// m₃(a, σ).
pub fn m_three(a: &BoundExpr, s: &BoundExpr) -> BoundExpr {
    let tail = |a: &BoundExpr, s: &BoundExpr| a * (4.0 - 4.0 * s) / ((4.0 * s - 1.0) * (1.0 - 2.0 * s));
    min(&m_term(a, s, &tail), &m_term(a, &sigma_o2(a), &tail))
}

/// M(a, σ) = min{3a/(6σ − 2), max{3a/(20σ − 14), 2a/(4σ − 1)}}.
pub fn m_upper(a: &BoundExpr, s: &BoundExpr) -> BoundExpr {
    min(
        &(3.0 * a / (6.0 * s - 2.0)),
        &max(&(3.0 * a / (20.0 * s - 14.0)), &(2.0 * a / (4.0 * s - 1.0))),
    )
}

/// Λ_Q = 1 − max{m₁, min{m₂, m₃}}.
pub fn lambda_q(a: &BoundExpr, s: &BoundExpr) -> BoundExpr {
    1.0 - max(&m_one(a, s), &min(&m_two(a, s), &m_three(a, s)))
}

/// Υ_Q = 1 − M.
pub fn upsilon_q(a: &BoundExpr, s: &BoundExpr) -> BoundExpr {
    1.0 - m_upper(a, s)
}

/// 1 − min{3a/(4 − 2γ), 3a/(6γ − 2)}.
pub fn small_tau_lower(a: &BoundExpr, g: &BoundExpr) -> BoundExpr {
    1.0 - min(&(3.0 * a / (4.0 - 2.0 * g)), &(3.0 * a / (6.0 * g - 2.0)))
}

/// 1 − (a − 3 − ν)/(4(1 − 2γ)) − max{a(3 − 3γ)/((2 − γ)(1 − 2γ)), a(3 − 3γ)/((3γ − 1)(1 − 2γ))}.
pub fn small_tau_upper(a: &BoundExpr, g: &BoundExpr) -> BoundExpr {
    let nu = v(Var::Nu);
    let first = a * (3.0 - 3.0 * g) / ((2.0 - g) * (1.0 - 2.0 * g));
    let second = a * (3.0 - 3.0 * g) / ((3.0 * g - 1.0) * (1.0 - 2.0 * g));
    1.0 - (a - 3.0 - nu) / (4.0 * (1.0 - 2.0 * g)) - max(&first, &second)
}

/// Named threshold functions over a, σ, ℓ (the subproduct length), β (the
/// subproduct exponent), ν and ε₁.
#[derive(Clone)]
pub struct FunctionCatalog {
    pub entries: BTreeMap<String, BoundExpr>,
    pub tuples: [[f64; 6]; 9],
}

impl FunctionCatalog {
    pub fn get(&self, name: &str) -> Option<&BoundExpr> {
        self.entries.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

pub fn function_catalog() -> FunctionCatalog {
    let a = v(Var::A);
    let s = v(Var::Sigma);
    let ell = v(Var::EllI);
    let beta = v(Var::Beta);
    let nu = v(Var::Nu);
    let eps = v(Var::Eps1);
    let th = Thresholds::new(a.clone(), s.clone());
    let high = Thresholds { high_a: true, ..th.clone() };
    let mut m = BTreeMap::new();
    let mut put = |k: String, e: BoundExpr| {
        m.insert(k, e);
    };
    put("B".into(), th.b());
    put("K".into(), th.k_ratio());
    put("L".into(), th.l_ratio());
    put("E".into(), th.e_exponent());
    for (name, e) in ["X1", "X2", "X3", "Y1", "Y2"].iter().zip(th.smooth_parts()) {
        put((*name).into(), e);
    }
    put("M".into(), m_upper(&a, &s));
    put("m1".into(), m_one(&a, &s));
    put("m2".into(), m_two(&a, &s));
    put("m3".into(), m_three(&a, &s));
    put("sigma_o1".into(), sigma_o1(&a));
    put("sigma_o2".into(), sigma_o2(&a));
    put("Lambda_Q".into(), lambda_q(&a, &s));
    put("Upsilon_Q".into(), upsilon_q(&a, &s));
    put("Lambda_E".into(), th.lambda_e());
    put("Upsilon_E1".into(), th.upsilon_e1());
    put("Upsilon_E2".into(), th.upsilon_e2());
    put("Upsilon_star".into(), th.upsilon_star());
    for (i, t) in TUPLES.iter().enumerate() {
        let [u, vv, w, x, y, z] = *t;
        let log_rhs = u * &a + &ell * (vv * &beta - w) + x - y * &s + z * &nu + &eps / 2.0;
        put(format!("C3*[{}]", i + 1), log_rhs);
        if tuple_class(i) != TupleClass::Leading {
            put(format!("Lambda_*[{}]", i + 1), th.lambda_star(i));
        }
        if tuple_class(i) == TupleClass::Residual {
            put(format!("Lambda_*[{}] a>=0.64", i + 1), high.lambda_star(i));
            put(format!("Upsilon_2[{}] a>=0.64", i + 1), high.upsilon_two(i));
        }
        put(format!("Upsilon_2[{}]", i + 1), th.upsilon_two(i));
        put(format!("Upsilon_6[{}]", i + 1), th.upsilon_six(i));
    }
    put(
        "C4*[1]".into(),
        -0.25 * &a + &ell * (2.0 * &beta - 1.0) + 1.75 - 2.0 * &s + &nu / 4.0 - 4.0 * &eps,
    );
    put("C4*[2]".into(), &ell * (2.0 * &beta - 2.0) + 2.0 - 2.0 * &s - 4.0 * &eps);
    put("shape 2-2beta".into(), 2.0 - 2.0 * &beta);
    put("shape 1-2beta".into(), 1.0 - 2.0 * &beta);
    put("shape 4-6beta".into(), 4.0 - 6.0 * &beta);
    put("shape 11-14beta".into(), 11.0 - 14.0 * &beta);
    FunctionCatalog { entries: m, tuples: TUPLES }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
}

impl Relation {
    pub fn is_strict(self) -> bool {
        matches!(self, Relation::Lt | Relation::Gt)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Lt => "<",
            Relation::Ge => ">=",
            Relation::Gt => ">",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// One inequality `lhs relation rhs` to hold on a box.
#[derive(Clone, Debug)]
pub struct ClaimSpec {
    pub id: String,
    pub family: &'static str,
    pub lhs: BoundExpr,
    pub relation: Relation,
    pub rhs: BoundExpr,
    /// Box variables with their ranges.
    pub region: Vec<(Var, f64, f64)>,
    pub eps1: f64,
    pub anchor: String,
}

impl ClaimSpec {
    /// The quantity that must be positive (strict) or non-negative.
    pub fn slack(&self) -> BoundExpr {
        match self.relation {
            Relation::Ge | Relation::Gt => &self.lhs - &self.rhs,
            Relation::Le | Relation::Lt => &self.rhs - &self.lhs,
        }
    }

    pub fn dims(&self) -> Vec<Var> {
        self.region.iter().map(|r| r.0).collect()
    }

    pub fn constants(&self) -> ParamBox {
        ParamBox::with_constants(self.eps1)
    }

    /// The point with the given coordinates (one per region variable).
    pub fn point(&self, x: &[f64]) -> Point {
        let mut p = Point::with_constants(self.eps1);
        for ((var, _, _), &xi) in self.region.iter().zip(x) {
            p.set(*var, xi);
        }
        p
    }

    /// Replaces every constant equal to `from` by `to` in both sides.
    pub fn mutate_constant(&self, from: f64, to: f64) -> ClaimSpec {
        ClaimSpec {
            lhs: self.lhs.replace_constant(from, to),
            rhs: self.rhs.replace_constant(from, to),
            ..self.clone()
        }
    }

    pub fn with_eps1(&self, eps1: f64) -> ClaimSpec {
        ClaimSpec { eps1, ..self.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status")]
pub enum Status {
    #[serde(rename = "CERTIFIED")]
    Certified,
    #[serde(rename = "FALSIFIED")]
    Falsified {
        witness: Vec<(String, f64)>,
        slack: f64,
    },
    #[serde(rename = "INCONCLUSIVE")]
    Inconclusive {
        unresolved: Vec<Vec<(String, f64, f64)>>,
        unresolved_count: u64,
    },
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::Certified => "CERTIFIED",
            Status::Falsified { .. } => "FALSIFIED",
            Status::Inconclusive { .. } => "INCONCLUSIVE",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub status: Status,
    /// Smallest certified lower bound of the slack over accepted boxes; the
    /// witness slack when falsified.
    pub margin: f64,
    pub boxes_processed: u64,
}

impl Verdict {
    pub fn is_certified(&self) -> bool {
        self.status == Status::Certified
    }

    pub fn is_falsified(&self) -> bool {
        matches!(self.status, Status::Falsified { .. })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CertifyOptions {
    pub depth_limit: u32,
    pub min_width: f64,
    /// Required lower bound on the slack for a box to be accepted.
    pub margin: f64,
    pub max_boxes: u64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            depth_limit: 64,
            min_width: 1e-5,
            margin: 0.0,
            max_boxes: 20_000_000,
        }
    }
}

/// Unresolved boxes listed in an inconclusive verdict.
const LISTED_BOXES: usize = 16;

/// Branch-and-bound with default options and no extra margin.
pub fn certify(claim: &ClaimSpec, depth_limit: u32, min_width: f64) -> Verdict {
    certify_with(
        claim,
        &CertifyOptions {
            depth_limit,
            min_width,
            ..CertifyOptions::default()
        },
    )
}

/// Proves `claim` on every leaf box, finds a point violating it, or reports
/// the boxes that could be decided neither way.
pub fn certify_with(claim: &ClaimSpec, opts: &CertifyOptions) -> Verdict {
    let dims = claim.dims();
    let tape = match Tape::compile(&claim.slack(), &dims, &claim.constants()) {
        Ok(t) => t,
        Err(e) => return ill_formed(claim, e),
    };
    let strict = claim.relation.is_strict();
    let accepted = |lo: f64| lo > opts.margin || (!strict && lo >= opts.margin);
    let violated = |s: f64| s < 0.0 || (strict && s <= 0.0);
    let root: Vec<Interval> = claim.region.iter().map(|&(_, lo, hi)| Interval::new(lo, hi)).collect();
    let mut stack = vec![(root, 0u32)];
    let mut scratch = Scratch::default();
    let mut processed = 0u64;
    let mut margin = f64::INFINITY;
    let mut unresolved = Vec::new();
    let mut unresolved_count = 0u64;
    let mut worst_unresolved = f64::INFINITY;
    while let Some((bx, depth)) = stack.pop() {
        processed += 1;
        let enc = tape.enclose(&bx, &mut scratch);
        if accepted(enc.lo) {
            margin = margin.min(enc.lo);
            continue;
        }
        let center: Vec<f64> = bx.iter().map(Interval::mid).collect();
        let s = tape.eval_point(&center, &mut scratch);
        if violated(s) {
            return Verdict {
                status: Status::Falsified {
                    witness: named(&dims, &center),
                    slack: s,
                },
                margin: s,
                boxes_processed: processed,
            };
        }
        let (widest, width) = bx
            .iter()
            .enumerate()
            .map(|(k, iv)| (k, iv.width()))
            .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if depth >= opts.depth_limit || width < opts.min_width || processed >= opts.max_boxes {
            unresolved_count += 1;
            worst_unresolved = worst_unresolved.min(enc.lo);
            if unresolved.len() < LISTED_BOXES {
                unresolved.push(
                    dims.iter()
                        .zip(&bx)
                        .map(|(v, iv)| (v.name(), iv.lo, iv.hi))
                        .collect(),
                );
            }
            continue;
        }
        let (left, right) = bx[widest].bisect();
        let mut lo_box = bx.clone();
        lo_box[widest] = left;
        let mut hi_box = bx;
        hi_box[widest] = right;
        stack.push((hi_box, depth + 1));
        stack.push((lo_box, depth + 1));
    }
    if unresolved_count == 0 {
        Verdict {
            status: Status::Certified,
            margin,
            boxes_processed: processed,
        }
    } else {
        Verdict {
            status: Status::Inconclusive {
                unresolved,
                unresolved_count,
            },
            margin: worst_unresolved.min(margin),
            boxes_processed: processed,
        }
    }
}

fn ill_formed(claim: &ClaimSpec, e: ExprError) -> Verdict {
    Verdict {
        status: Status::Inconclusive {
            unresolved: vec![vec![(format!("{}: {e}", claim.id), f64::NAN, f64::NAN)]],
            unresolved_count: 1,
        },
        margin: f64::NEG_INFINITY,
        boxes_processed: 0,
    }
}

fn named(dims: &[Var], x: &[f64]) -> Vec<(String, f64)> {
    dims.iter().zip(x).map(|(v, &xi)| (v.name(), xi)).collect()
}

fn claim(
    id: String,
    family: &'static str,
    lhs: BoundExpr,
    relation: Relation,
    rhs: BoundExpr,
    region: Vec<(Var, f64, f64)>,
    anchor: String,
) -> ClaimSpec {
    ClaimSpec {
        id,
        family,
        lhs,
        relation,
        rhs,
        region,
        eps1: 0.0,
        anchor,
    }
}

/// (σ + B/2 − F)/(1 − F) with F = max{(3a + 7B)/(3a + 10B), (4a + B)/(4a + 4B)},
/// written as 1 − ((1 − σ)/B − 1/2)·B/(1 − F) so that no factor vanishes as σ → 1.
pub fn high_sigma_ceiling(a: &BoundExpr, s: &BoundExpr) -> BoundExpr {
    let nu = v(Var::Nu);
    let eps = v(Var::Eps1);
    let b = b_bound(a, s);
    let gap = 1.0 - s;
    let b_over_gap = max(&(1.0 - &eps / &gap), &(1.0 + (a + &nu - s + 2.0 * &eps) / &gap));
    let b_over_drop = max(&((3.0 * a + 10.0 * &b) / 3.0), &((4.0 * a + 4.0 * &b) / 3.0));
    1.0 - (1.0 / b_over_gap - 0.5) * b_over_drop
}

fn large_tau_claims() -> Vec<ClaimSpec> {
    let a = v(Var::A);
    let s = v(Var::Sigma);
    let ell = v(Var::EllI);
    let th = Thresholds::new(a.clone(), s.clone());
    let b = th.b();
    let mut out = vec![claim(
        "largetau".into(),
        "largetau",
        s.clone(),
        Relation::Ge,
        th.e_exponent(),
        vec![(Var::A, 0.685, 0.77), (Var::Sigma, 0.6, 0.88)],
        "sigma >= min{K, L} for a in [0.685,0.77], sigma in [0.6,0.88]".into(),
    )];
    let f = max(
        &((3.0 * &a + 7.0 * &b) / (3.0 * &a + 10.0 * &b)),
        &((4.0 * &a + &b) / (4.0 * &a + 4.0 * &b)),
    );
    let region = vec![
        (Var::A, 0.685, 0.77),
        (Var::Sigma, 0.88, 1.0 - EDGE_OFFSET),
        (Var::EllI, 0.35, 0.48),
    ];
    out.push(claim(
        "largetau-high-upper".into(),
        "largetau",
        ell.clone(),
        Relation::Le,
        high_sigma_ceiling(&a, &s),
        region.clone(),
        "l_I <= (sigma + B/2 - F)/(1 - F) for sigma in [0.88,1]".into(),
    ));
    out.push(claim(
        "largetau-high-lower".into(),
        "largetau",
        ell,
        Relation::Ge,
        (&s - &a / 14.0 + &b / 14.0 - &f) / (11.0 / 14.0 - &f),
        region,
        "l_I >= (sigma - a/14 + B/14 - F)/(11/14 - F) for sigma in [0.88,1]".into(),
    ));
    out
}

fn smooth_claims() -> Vec<ClaimSpec> {
    let a = v(Var::A);
    let s = v(Var::Sigma);
    let th = Thresholds::new(a.clone(), s.clone());
    let g = th.smooth_minimum();
    let gap = th.b() - &a;
    [(0.475, 0.57, 0.335), (0.57, 0.61, 0.33), (0.61, 0.77, 0.32)]
        .into_iter()
        .map(|(lo, hi, thr)| {
            claim(
                format!("smoothfull-{thr}"),
                "smoothfull",
                max(&gap, &(thr - &g)),
                Relation::Gt,
                c(0.0),
                vec![(Var::A, lo, hi), (Var::Sigma, SIGMA_FLOOR + EDGE_OFFSET, 1.0 - EDGE_OFFSET)],
                format!("min{{X1,X2,X3,max{{Y1,Y2}}}} < {thr} where B < a, a in [{lo},{hi}]"),
            )
        })
        .collect()
}

fn small_tau_claims() -> Vec<ClaimSpec> {
    let a = v(Var::A);
    let g = v(Var::Gamma);
    let t = v(Var::Param(0));
    let nu = v(Var::Nu);
    let mut out = Vec::new();
    for (lo, hi, thr) in [(0.47, 0.53, 0.36), (0.53, 0.545, 0.345)] {
        out.push(claim(
            format!("smalltau-1a-{thr}"),
            "smalltau",
            small_tau_lower(&a, &g),
            Relation::Gt,
            c(thr),
            vec![(Var::A, lo, hi), (Var::Gamma, 0.6, 1.0)],
            format!("1 - min{{3a/(4-2g), 3a/(6g-2)}} > {thr} for a in [{lo},{hi}], g in [0.6,1]"),
        ));
    }
    out.push(claim(
        "smalltau-1a-0.375".into(),
        "smalltau",
        1.0 - 3.0 * &a / (6.0 * (&a + &nu) - 2.0),
        Relation::Gt,
        c(0.375),
        vec![(Var::A, 0.53, 0.545)],
        "1 - 3a/(6(a+nu)-2) > 0.375 for a in [0.53,0.545]".into(),
    ));
    let from_floor = 0.6 + &t * (&a + 0.34 - 0.6);
    for (lo, hi, thr) in [(0.47, 0.53, 0.29), (0.53, 0.545, 0.315)] {
        out.push(claim(
            format!("smalltau-2a-{thr}"),
            "smalltau",
            small_tau_upper(&a, &from_floor),
            Relation::Lt,
            c(thr),
            vec![(Var::A, lo, hi), (Var::Param(0), 0.0, 1.0)],
            format!("case 2A bound < {thr} for a in [{lo},{hi}], g in [0.6,a+0.34]"),
        ));
    }
    let from_star = &a + &nu + &t * (0.34 - &nu);
    out.push(claim(
        "smalltau-2a-0.285".into(),
        "smalltau",
        small_tau_upper(&a, &from_star),
        Relation::Lt,
        c(0.285),
        vec![(Var::A, 0.53, 0.545), (Var::Param(0), 0.0, 1.0)],
        "case 2A bound < 0.285 for a in [0.53,0.545], g in [a+nu,a+0.34]".into(),
    ));
    out
}

/// The small-σ table rows: (a range, Λ ceiling, Υ floor).
pub const SMALL_SIGMA_ROWS: [(f64, f64, f64, f64); 4] = [
    (0.53, 0.545, 0.405, 0.485),
    (0.545, 0.57, 0.4, 0.475),
    (0.57, 0.59, 0.38, 0.455),
    (0.59, 0.61, 0.365, 0.435),
];

fn small_sigma_claims() -> Vec<ClaimSpec> {
    let a = v(Var::A);
    let t = v(Var::Param(0));
    let nu = v(Var::Nu);
    let eps = v(Var::Eps1);
    let floor = SIGMA_FLOOR + EDGE_OFFSET;
    let mut out = Vec::new();
    for (lo, hi, lam, ups) in SMALL_SIGMA_ROWS {
        let region = vec![(Var::A, lo, hi), (Var::Param(0), 0.0, 1.0)];
        let full = floor + &t * (&a + &nu - floor);
        out.push(claim(
            format!("cases2-lambda-{lo}"),
            "cases2",
            Thresholds::new(a.clone(), full).lambda_max(),
            Relation::Le,
            lam - &eps,
            region.clone(),
            format!("max Lambda_* <= {lam} - eps1 for a in [{lo},{hi}], sigma in [(1+nu)/2,a+nu]"),
        ));
        let lower = floor + &t * (0.75 - floor);
        out.push(claim(
            format!("cases2-upsilon-{lo}"),
            "cases2",
            Thresholds::new(a.clone(), lower).upsilon_min(false),
            Relation::Ge,
            ups + &eps,
            region.clone(),
            format!("min{{Upsilon_*, Upsilon_2}} >= {ups} + eps1 for a in [{lo},{hi}], sigma <= 0.75"),
        ));
        let upper = 0.75 + &t * (&a + &nu - 0.75);
        out.push(claim(
            format!("cases2-upsilon6-{lo}"),
            "cases2",
            Thresholds::new(a.clone(), upper).upsilon_min(true),
            Relation::Ge,
            ups + &eps,
            region,
            format!(
                "min{{Upsilon_*, max{{Upsilon_2, Upsilon_6}}}} >= {ups} + eps1 for a in [{lo},{hi}], sigma in [0.75,a+nu]"
            ),
        ));
    }
    out
}

fn medium_tau_claims() -> Vec<ClaimSpec> {
    let a = v(Var::A);
    let t = v(Var::Param(0));
    let ell = v(Var::EllI);
    let nu = v(Var::Nu);
    let s = &a + &nu + &t * (sigma_o2(&a) - &a - &nu);
    let mut out = Vec::new();
    for (lo, hi, ell_lo, high_a) in [
        (0.57, 0.59, 0.315, false),
        (0.59, 0.61, 0.33, false),
        (0.61, 0.64, 0.355, false),
        (0.64, 0.685, 0.355, true),
    ] {
        let th = Thresholds {
            high_a,
            ..Thresholds::with_b(a.clone(), s.clone(), 1.0 - &s)
        };
        let six = min_all((0..TUPLES.len()).map(|i| th.upsilon_six(i)));
        let first = min(
            &(&ell - max(&th.lambda_max(), &c(0.365))),
            &(six - &ell),
        );
        let second = min(&(&ell - lambda_q(&a, &s)), &(upsilon_q(&a, &s) - &ell));
        out.push(claim(
            format!("mediumtau-{lo}"),
            "mediumtau",
            max(&first, &second),
            Relation::Ge,
            c(0.0),
            vec![(Var::A, lo, hi), (Var::Param(0), 0.0, 1.0), (Var::EllI, ell_lo, 0.42)],
            format!(
                "l_I in [{ell_lo},0.420] covered for a in [{lo},{hi}], sigma in [a+nu, sigma_o2(a)]"
            ),
        ));
    }
    out
}

/// Every catalogued inequality, in a fixed order.
pub fn catalog_claims() -> Vec<ClaimSpec> {
    let mut out = large_tau_claims();
    out.extend(smooth_claims());
    out.extend(small_tau_claims());
    out.extend(small_sigma_claims());
    out.extend(medium_tau_claims());
    out
}

pub fn find_claim(id: &str) -> Option<ClaimSpec> {
    catalog_claims().into_iter().find(|c| c.id == id)
}

/// The deliberate mutant: the first small-σ Λ row with 0.305 for 0.405.
pub fn mutant_claim() -> ClaimSpec {
    let base = find_claim("cases2-lambda-0.53").expect("catalogued row");
    ClaimSpec {
        id: "cases2-lambda-0.53-mutant".into(),
        ..base.mutate_constant(0.405, 0.305)
    }
}

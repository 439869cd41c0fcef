//! Expression trees over named real variables with point and interval evaluation.

use crate::interval::Interval;
use serde::Serialize;
use std::collections::BTreeSet;
use std::fmt;
use std::ops;
use std::sync::Arc;
use thiserror::Error;

/// The global exponent constant ν.
pub const NU: f64 = 0.23;

/// Named variables an expression may reference.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Var {
    /// log_x τ.
    A,
    /// Mean real part of the Dirichlet polynomial.
    Sigma,
    /// Prime-size fraction ℓ*_k, k in 1..=6.
    Ell(u8),
    /// Combined length fraction of a subproduct.
    EllI,
    /// Sieving exponent or mean real part of a subproduct.
    Beta,
    /// Integration variable α_k, k in 1..=6.
    Alpha(u8),
    /// The constant ν, bound at evaluation time.
    Nu,
    /// The slack ε₁, bound at evaluation time.
    Eps1,
    /// Auxiliary real part γ.
    Gamma,
    /// Reparametrisation variable in [0, 1], k in 0..=3.
    Param(u8),
}

pub const NVARS: usize = 22;

impl Var {
    pub fn index(self) -> usize {
        match self {
            Var::A => 0,
            Var::Sigma => 1,
            Var::Ell(k) => {
                assert!((1..=6).contains(&k), "ell index out of range");
                1 + k as usize
            }
            Var::EllI => 8,
            Var::Beta => 9,
            Var::Alpha(k) => {
                assert!((1..=6).contains(&k), "alpha index out of range");
                9 + k as usize
            }
            Var::Nu => 16,
            Var::Eps1 => 17,
            Var::Gamma => 18,
            Var::Param(k) => {
                assert!(k <= 3, "param index out of range");
                19 + k as usize
            }
        }
    }

    pub fn name(self) -> String {
        match self {
            Var::A => "a".into(),
            Var::Sigma => "sigma".into(),
            Var::Ell(k) => format!("l{k}"),
            Var::EllI => "lI".into(),
            Var::Beta => "beta".into(),
            Var::Alpha(k) => format!("alpha{k}"),
            Var::Nu => "nu".into(),
            Var::Eps1 => "eps1".into(),
            Var::Gamma => "gamma".into(),
            Var::Param(k) => format!("t{k}"),
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("variable {0} is not bound")]
    Unbound(Var),
    #[error("division by zero")]
    DivisionByZero,
    #[error("denominator interval {0} contains zero")]
    DenominatorStraddlesZero(Interval),
}

#[derive(Debug)]
pub(crate) enum Node {
    Const(f64),
    Var(Var),
    Add(BoundExpr, BoundExpr),
    Sub(BoundExpr, BoundExpr),
    Mul(BoundExpr, BoundExpr),
    Div(BoundExpr, BoundExpr),
    Min(BoundExpr, BoundExpr),
    Max(BoundExpr, BoundExpr),
    Neg(BoundExpr),
}

/// Immutable, cheaply clonable expression tree.
#[derive(Clone, Debug)]
pub struct BoundExpr(Arc<Node>);

/// Variable assignment for point evaluation; unbound slots hold NaN.
#[derive(Clone, Copy, Debug)]
pub struct Point {
    vals: [f64; NVARS],
}

impl Default for Point {
    fn default() -> Self {
        Point {
            vals: [f64::NAN; NVARS],
        }
    }
}

impl Point {
    /// A point with ν and ε₁ bound and everything else free.
    pub fn with_constants(eps1: f64) -> Self {
        let mut p = Point::default();
        p.set(Var::Nu, NU);
        p.set(Var::Eps1, eps1);
        p
    }

    pub fn set(&mut self, v: Var, x: f64) {
        self.vals[v.index()] = x;
    }

    pub fn with(mut self, v: Var, x: f64) -> Self {
        self.set(v, x);
        self
    }

    pub fn get(&self, v: Var) -> Option<f64> {
        let x = self.vals[v.index()];
        (!x.is_nan()).then_some(x)
    }
}

/// Per-variable closed intervals for interval evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamBox {
    ivs: [Option<Interval>; NVARS],
}

impl Default for ParamBox {
    fn default() -> Self {
        ParamBox { ivs: [None; NVARS] }
    }
}

impl ParamBox {
    /// A box with ν and ε₁ bound to degenerate intervals.
    pub fn with_constants(eps1: f64) -> Self {
        let mut b = ParamBox::default();
        b.set(Var::Nu, Interval::point(NU));
        b.set(Var::Eps1, Interval::point(eps1));
        b
    }

    pub fn set(&mut self, v: Var, iv: Interval) {
        self.ivs[v.index()] = Some(iv);
    }

    pub fn with(mut self, v: Var, lo: f64, hi: f64) -> Self {
        self.set(v, Interval::new(lo, hi));
        self
    }

    pub fn get(&self, v: Var) -> Option<Interval> {
        self.ivs[v.index()]
    }

    /// Variables with non-degenerate extent, in index order.
    pub fn free_vars(&self) -> Vec<Var> {
        ALL_VARS
            .iter()
            .copied()
            .filter(|v| self.get(*v).is_some_and(|iv| iv.width() > 0.0))
            .collect()
    }

    /// The widest variable and its width.
    pub fn widest(&self) -> Option<(Var, f64)> {
        let mut best: Option<(Var, f64)> = None;
        for v in ALL_VARS.iter().copied() {
            if let Some(iv) = self.get(v) {
                let w = iv.width();
                if w > 0.0 && best.is_none_or(|(_, bw)| w > bw) {
                    best = Some((v, w));
                }
            }
        }
        best
    }

    /// Splits the box in half along `v`.
    pub fn bisect(&self, v: Var) -> (ParamBox, ParamBox) {
        let iv = self.get(v).expect("bisect along unbound variable");
        let (l, r) = iv.bisect();
        let mut a = *self;
        let mut b = *self;
        a.set(v, l);
        b.set(v, r);
        (a, b)
    }

    /// The point at the centre of the box.
    pub fn center(&self) -> Point {
        let mut p = Point::default();
        for v in ALL_VARS.iter().copied() {
            if let Some(iv) = self.get(v) {
                p.set(v, iv.mid());
            }
        }
        p
    }

    /// Maps unit coordinates (one per free variable, in `free_vars` order) to a point.
    pub fn point_at(&self, unit: &[f64]) -> Point {
        let mut p = self.center();
        for (v, t) in self.free_vars().into_iter().zip(unit) {
            let iv = self.get(v).unwrap();
            p.set(v, iv.lo + t * iv.width());
        }
        p
    }
}

/// Every variable, in index order.
pub const ALL_VARS: [Var; NVARS] = [
    Var::A,
    Var::Sigma,
    Var::Ell(1),
    Var::Ell(2),
    Var::Ell(3),
    Var::Ell(4),
    Var::Ell(5),
    Var::Ell(6),
    Var::EllI,
    Var::Beta,
    Var::Alpha(1),
    Var::Alpha(2),
    Var::Alpha(3),
    Var::Alpha(4),
    Var::Alpha(5),
    Var::Alpha(6),
    Var::Nu,
    Var::Eps1,
    Var::Gamma,
    Var::Param(0),
    Var::Param(1),
    Var::Param(2),
];

impl BoundExpr {
    pub(crate) fn node(&self) -> &Node {
        &self.0
    }

    /// Identity of the shared node, for deduplicating common subexpressions.
    pub(crate) fn node_id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn constant(x: f64) -> Self {
        BoundExpr(Arc::new(Node::Const(x)))
    }

    pub fn var(v: Var) -> Self {
        BoundExpr(Arc::new(Node::Var(v)))
    }

    pub fn min(&self, o: &BoundExpr) -> BoundExpr {
        BoundExpr(Arc::new(Node::Min(self.clone(), o.clone())))
    }

    pub fn max(&self, o: &BoundExpr) -> BoundExpr {
        BoundExpr(Arc::new(Node::Max(self.clone(), o.clone())))
    }

    /// The constant value when the tree is a bare constant.
    pub fn as_constant(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    /// Rewrites every occurrence of variable `v` with `by`.
    pub fn substitute(&self, v: Var, by: &BoundExpr) -> BoundExpr {
        let s = |e: &BoundExpr| e.substitute(v, by);
        match &*self.0 {
            Node::Const(_) => self.clone(),
            Node::Var(w) if *w == v => by.clone(),
            Node::Var(_) => self.clone(),
            Node::Add(x, y) => s(x) + s(y),
            Node::Sub(x, y) => s(x) - s(y),
            Node::Mul(x, y) => s(x) * s(y),
            Node::Div(x, y) => s(x) / s(y),
            Node::Min(x, y) => s(x).min(&s(y)),
            Node::Max(x, y) => s(x).max(&s(y)),
            Node::Neg(x) => -s(x),
        }
    }

    /// Replaces every numeric constant `from` (exact match) by `to`.
    pub fn replace_constant(&self, from: f64, to: f64) -> BoundExpr {
        let r = |e: &BoundExpr| e.replace_constant(from, to);
        match &*self.0 {
            Node::Const(c) if *c == from => BoundExpr::constant(to),
            Node::Const(_) | Node::Var(_) => self.clone(),
            Node::Add(x, y) => r(x) + r(y),
            Node::Sub(x, y) => r(x) - r(y),
            Node::Mul(x, y) => r(x) * r(y),
            Node::Div(x, y) => r(x) / r(y),
            Node::Min(x, y) => r(x).min(&r(y)),
            Node::Max(x, y) => r(x).max(&r(y)),
            Node::Neg(x) => -r(x),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match &*self.0 {
            Node::Const(_) => {}
            Node::Var(v) => {
                out.insert(*v);
            }
            Node::Add(x, y)
            | Node::Sub(x, y)
            | Node::Mul(x, y)
            | Node::Div(x, y)
            | Node::Min(x, y)
            | Node::Max(x, y) => {
                x.collect_vars(out);
                y.collect_vars(out);
            }
            Node::Neg(x) => x.collect_vars(out),
        }
    }

    /// Number of nodes in the tree (shared subtrees counted once per use).
    pub fn size(&self) -> usize {
        match &*self.0 {
            Node::Const(_) | Node::Var(_) => 1,
            Node::Add(x, y)
            | Node::Sub(x, y)
            | Node::Mul(x, y)
            | Node::Div(x, y)
            | Node::Min(x, y)
            | Node::Max(x, y) => 1 + x.size() + y.size(),
            Node::Neg(x) => 1 + x.size(),
        }
    }

    /// Recursive evaluation in round-to-nearest arithmetic.
    pub fn eval_point(&self, p: &Point) -> Result<f64, ExprError> {
        Ok(match &*self.0 {
            Node::Const(c) => *c,
            Node::Var(v) => p.get(*v).ok_or(ExprError::Unbound(*v))?,
            Node::Add(x, y) => x.eval_point(p)? + y.eval_point(p)?,
            Node::Sub(x, y) => x.eval_point(p)? - y.eval_point(p)?,
            Node::Mul(x, y) => x.eval_point(p)? * y.eval_point(p)?,
            Node::Div(x, y) => {
                let d = y.eval_point(p)?;
                if d == 0.0 {
                    return Err(ExprError::DivisionByZero);
                }
                x.eval_point(p)? / d
            }
            Node::Min(x, y) => x.eval_point(p)?.min(y.eval_point(p)?),
            Node::Max(x, y) => x.eval_point(p)?.max(y.eval_point(p)?),
            Node::Neg(x) => -x.eval_point(p)?,
        })
    }

    /// Natural interval extension with outward rounding.
    pub fn eval_interval(&self, b: &ParamBox) -> Result<Interval, ExprError> {
        Ok(match &*self.0 {
            Node::Const(c) => Interval::point(*c),
            Node::Var(v) => b.get(*v).ok_or(ExprError::Unbound(*v))?,
            Node::Add(x, y) => x.eval_interval(b)?.add(y.eval_interval(b)?),
            Node::Sub(x, y) => x.eval_interval(b)?.sub(y.eval_interval(b)?),
            Node::Mul(x, y) => x.eval_interval(b)?.mul(y.eval_interval(b)?),
            Node::Div(x, y) => {
                let d = y.eval_interval(b)?;
                x.eval_interval(b)?
                    .div(d)
                    .ok_or(ExprError::DenominatorStraddlesZero(d))?
            }
            Node::Min(x, y) => x.eval_interval(b)?.min(y.eval_interval(b)?),
            Node::Max(x, y) => x.eval_interval(b)?.max(y.eval_interval(b)?),
            Node::Neg(x) => x.eval_interval(b)?.neg(),
        })
    }
}

/// Constant node.
pub fn c(x: f64) -> BoundExpr {
    BoundExpr::constant(x)
}

/// Variable node.
pub fn v(x: Var) -> BoundExpr {
    BoundExpr::var(x)
}

/// Integration variable α_k.
pub fn alpha(k: u8) -> BoundExpr {
    BoundExpr::var(Var::Alpha(k))
}

pub fn min(x: &BoundExpr, y: &BoundExpr) -> BoundExpr {
    x.min(y)
}

pub fn max(x: &BoundExpr, y: &BoundExpr) -> BoundExpr {
    x.max(y)
}

/// Left fold of `min` over a non-empty list.
pub fn min_all<I: IntoIterator<Item = BoundExpr>>(items: I) -> BoundExpr {
    items
        .into_iter()
        .reduce(|a, b| a.min(&b))
        .expect("min over empty list")
}

/// Left fold of `max` over a non-empty list.
pub fn max_all<I: IntoIterator<Item = BoundExpr>>(items: I) -> BoundExpr {
    items
        .into_iter()
        .reduce(|a, b| a.max(&b))
        .expect("max over empty list")
}

macro_rules! binop {
    ($tr:ident, $method:ident, $node:ident) => {
        impl ops::$tr<BoundExpr> for BoundExpr {
            type Output = BoundExpr;
            fn $method(self, o: BoundExpr) -> BoundExpr {
                BoundExpr(Arc::new(Node::$node(self, o)))
            }
        }
        impl ops::$tr<&BoundExpr> for BoundExpr {
            type Output = BoundExpr;
            fn $method(self, o: &BoundExpr) -> BoundExpr {
                BoundExpr(Arc::new(Node::$node(self, o.clone())))
            }
        }
        impl ops::$tr<BoundExpr> for &BoundExpr {
            type Output = BoundExpr;
            fn $method(self, o: BoundExpr) -> BoundExpr {
                BoundExpr(Arc::new(Node::$node(self.clone(), o)))
            }
        }
        impl ops::$tr<&BoundExpr> for &BoundExpr {
            type Output = BoundExpr;
            fn $method(self, o: &BoundExpr) -> BoundExpr {
                BoundExpr(Arc::new(Node::$node(self.clone(), o.clone())))
            }
        }
        impl ops::$tr<f64> for BoundExpr {
            type Output = BoundExpr;
            fn $method(self, o: f64) -> BoundExpr {
                BoundExpr(Arc::new(Node::$node(self, c(o))))
            }
        }
        impl ops::$tr<f64> for &BoundExpr {
            type Output = BoundExpr;
            fn $method(self, o: f64) -> BoundExpr {
                BoundExpr(Arc::new(Node::$node(self.clone(), c(o))))
            }
        }
        impl ops::$tr<BoundExpr> for f64 {
            type Output = BoundExpr;
            fn $method(self, o: BoundExpr) -> BoundExpr {
                BoundExpr(Arc::new(Node::$node(c(self), o)))
            }
        }
        impl ops::$tr<&BoundExpr> for f64 {
            type Output = BoundExpr;
            fn $method(self, o: &BoundExpr) -> BoundExpr {
                BoundExpr(Arc::new(Node::$node(c(self), o.clone())))
            }
        }
    };
}

binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl ops::Neg for BoundExpr {
    type Output = BoundExpr;
    fn neg(self) -> BoundExpr {
        BoundExpr(Arc::new(Node::Neg(self)))
    }
}

impl ops::Neg for &BoundExpr {
    type Output = BoundExpr;
    fn neg(self) -> BoundExpr {
        BoundExpr(Arc::new(Node::Neg(self.clone())))
    }
}

impl fmt::Display for BoundExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Node::Const(x) => write!(f, "{x}"),
            Node::Var(v) => write!(f, "{v}"),
            Node::Add(x, y) => write!(f, "({x} + {y})"),
            Node::Sub(x, y) => write!(f, "({x} - {y})"),
            Node::Mul(x, y) => write!(f, "({x} * {y})"),
            Node::Div(x, y) => write!(f, "({x} / {y})"),
            Node::Min(x, y) => write!(f, "min({x}, {y})"),
            Node::Max(x, y) => write!(f, "max({x}, {y})"),
            Node::Neg(x) => write!(f, "-({x})"),
        }
    }
}

/// Evaluates at a point, panicking on error; for catalog construction and tests.
pub fn eval(e: &BoundExpr, p: &Point) -> f64 {
    e.eval_point(p)
        .unwrap_or_else(|err| panic!("evaluating {e}: {err}"))
}

//! Compiled expression tapes with a first-order range enclosure: every node's
//! natural interval extension is intersected with its mean-value form
//! f(c) + Σ gᵢ·(xᵢ − cᵢ), where gᵢ encloses ∂f/∂xᵢ over the box.

use crate::expr::{BoundExpr, ExprError, Node, ParamBox, Var};
use crate::interval::Interval;
use std::collections::HashMap;

/// Largest number of box dimensions a tape may carry.
pub const MAX_DIMS: usize = 4;

const ENTIRE: Interval = Interval {
    lo: f64::NEG_INFINITY,
    hi: f64::INFINITY,
};
/// Gradient/enclosure refinement rounds for a quotient node.
const QUOTIENT_PASSES: usize = 4;
const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };

#[derive(Clone, Copy, Debug)]
enum Op {
    Const(f64),
    Var(usize),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    Min(usize, usize),
    Max(usize, usize),
    Neg(usize),
}

/// A shared-subexpression-free instruction list for one expression.
#[derive(Clone, Debug)]
pub struct Tape {
    ops: Vec<Op>,
    dims: Vec<Var>,
}

#[derive(Clone, Copy, Debug)]
struct Cell {
    enc: Interval,
    mid: Interval,
    grad: [Interval; MAX_DIMS],
    smooth: bool,
}

impl Default for Cell {
    fn default() -> Self {
        Cell {
            enc: ZERO,
            mid: ZERO,
            grad: [ZERO; MAX_DIMS],
            smooth: true,
        }
    }
}

fn finite(x: Interval) -> bool {
    x.lo.is_finite() && x.hi.is_finite()
}

fn intersect(x: Interval, y: Interval) -> Interval {
    let lo = x.lo.max(y.lo);
    let hi = x.hi.min(y.hi);
    if lo <= hi {
        Interval { lo, hi }
    } else {
        x
    }
}

impl Tape {
    /// Compiles `e` for boxes over `dims`; any other variable must be bound
    /// to a degenerate interval in `constants`.
    pub fn compile(e: &BoundExpr, dims: &[Var], constants: &ParamBox) -> Result<Tape, ExprError> {
        assert!(dims.len() <= MAX_DIMS, "at most {MAX_DIMS} box dimensions");
        let mut tape = Tape {
            ops: Vec::new(),
            dims: dims.to_vec(),
        };
        let mut seen = HashMap::new();
        tape.push(e, constants, &mut seen)?;
        Ok(tape)
    }

    fn push(
        &mut self,
        e: &BoundExpr,
        constants: &ParamBox,
        seen: &mut HashMap<usize, usize>,
    ) -> Result<usize, ExprError> {
        if let Some(&i) = seen.get(&e.node_id()) {
            return Ok(i);
        }
        let mut bin = |x: &BoundExpr, y: &BoundExpr, me: &mut Tape| -> Result<(usize, usize), ExprError> {
            let i = me.push(x, constants, seen)?;
            let j = me.push(y, constants, seen)?;
            Ok((i, j))
        };
        let op = match e.node() {
            Node::Const(c) => Op::Const(*c),
            Node::Var(v) => match self.dims.iter().position(|d| d == v) {
                Some(k) => Op::Var(k),
                None => match constants.get(*v) {
                    Some(iv) if iv.width() == 0.0 => Op::Const(iv.lo),
                    _ => return Err(ExprError::Unbound(*v)),
                },
            },
            Node::Add(x, y) => {
                let (i, j) = bin(x, y, self)?;
                Op::Add(i, j)
            }
            Node::Sub(x, y) => {
                let (i, j) = bin(x, y, self)?;
                Op::Sub(i, j)
            }
            Node::Mul(x, y) => {
                let (i, j) = bin(x, y, self)?;
                Op::Mul(i, j)
            }
            Node::Div(x, y) => {
                let (i, j) = bin(x, y, self)?;
                Op::Div(i, j)
            }
            Node::Min(x, y) => {
                let (i, j) = bin(x, y, self)?;
                Op::Min(i, j)
            }
            Node::Max(x, y) => {
                let (i, j) = bin(x, y, self)?;
                Op::Max(i, j)
            }
            Node::Neg(x) => Op::Neg(self.push(x, constants, seen)?),
        };
        self.ops.push(op);
        let idx = self.ops.len() - 1;
        seen.insert(e.node_id(), idx);
        Ok(idx)
    }

    pub fn dims(&self) -> &[Var] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Round-to-nearest value at `x` (one coordinate per dimension); NaN or
    /// infinite on division by zero.
    pub fn eval_point(&self, x: &[f64], scratch: &mut Scratch) -> f64 {
        let scratch = &mut scratch.values;
        scratch.clear();
        for op in &self.ops {
            let r = match *op {
                Op::Const(c) => c,
                Op::Var(k) => x[k],
                Op::Add(i, j) => scratch[i] + scratch[j],
                Op::Sub(i, j) => scratch[i] - scratch[j],
                Op::Mul(i, j) => scratch[i] * scratch[j],
                Op::Div(i, j) => scratch[i] / scratch[j],
                Op::Min(i, j) => scratch[i].min(scratch[j]),
                Op::Max(i, j) => scratch[i].max(scratch[j]),
                Op::Neg(i) => -scratch[i],
            };
            scratch.push(r);
        }
        *scratch.last().expect("non-empty tape")
    }

    /// Guaranteed enclosure of the range over the box `b` (one interval per
    /// dimension). A denominator that may vanish yields the whole real line.
    pub fn enclose(&self, b: &[Interval], scratch: &mut Scratch) -> Interval {
        let scratch = &mut scratch.cells;
        let n = self.dims.len();
        let mut center = [0.0; MAX_DIMS];
        let mut dev = [ZERO; MAX_DIMS];
        for k in 0..n {
            center[k] = b[k].mid();
            let c = Interval::point(center[k]);
            dev[k] = Interval::point(b[k].lo).sub(c).hull(Interval::point(b[k].hi).sub(c));
        }
        scratch.clear();
        for op in &self.ops {
            let mut cell = Cell::default();
            match *op {
                Op::Const(c) => {
                    cell.enc = Interval::point(c);
                    cell.mid = cell.enc;
                }
                Op::Var(k) => {
                    cell.enc = b[k];
                    cell.mid = Interval::point(center[k]);
                    cell.grad[k] = Interval::point(1.0);
                }
                Op::Add(i, j) | Op::Sub(i, j) => {
                    let (x, y) = (&scratch[i], &scratch[j]);
                    let sub = matches!(op, Op::Sub(..));
                    let f = |p: Interval, q: Interval| if sub { p.sub(q) } else { p.add(q) };
                    if finite(x.enc) && finite(y.enc) {
                        cell.enc = f(x.enc, y.enc);
                        cell.mid = f(x.mid, y.mid);
                        cell.smooth = x.smooth && y.smooth;
                        for k in 0..n {
                            cell.grad[k] = f(x.grad[k], y.grad[k]);
                        }
                    } else {
                        cell = unbounded();
                    }
                }
                Op::Neg(i) => {
                    let x = &scratch[i];
                    cell.enc = x.enc.neg();
                    cell.mid = x.mid.neg();
                    cell.smooth = x.smooth;
                    for k in 0..n {
                        cell.grad[k] = x.grad[k].neg();
                    }
                }
                Op::Mul(i, j) => {
                    let (x, y) = (&scratch[i], &scratch[j]);
                    if finite(x.enc) && finite(y.enc) {
                        cell.enc = x.enc.mul(y.enc);
                        cell.mid = x.mid.mul(y.mid);
                        cell.smooth = x.smooth && y.smooth;
                        for k in 0..n {
                            cell.grad[k] = x.grad[k].mul(y.enc).add(x.enc.mul(y.grad[k]));
                        }
                    } else {
                        cell = unbounded();
                    }
                }
                Op::Div(i, j) => {
                    let (x, y) = (&scratch[i], &scratch[j]);
                    match (finite(x.enc), x.enc.div(y.enc), x.mid.div(y.mid)) {
                        (true, Some(q), Some(m)) => {
                            cell.enc = q;
                            cell.mid = m;
                            cell.smooth = x.smooth && y.smooth;
                            for pass in 0..QUOTIENT_PASSES {
                                for k in 0..n {
                                    cell.grad[k] = x.grad[k]
                                        .sub(cell.enc.mul(y.grad[k]))
                                        .div(y.enc)
                                        .expect("denominator checked above");
                                }
                                if !cell.smooth || pass + 1 == QUOTIENT_PASSES {
                                    break;
                                }
                                let before = cell.enc.width();
                                if let Some(mv) = mean_value(&cell, &dev, n) {
                                    cell.enc = intersect(cell.enc, mv);
                                }
                                if cell.enc.width() > 0.5 * before {
                                    break;
                                }
                            }
                        }
                        _ => cell = unbounded(),
                    }
                }
                Op::Min(i, j) | Op::Max(i, j) => {
                    let (x, y) = (&scratch[i], &scratch[j]);
                    let is_min = matches!(op, Op::Min(..));
                    if is_min {
                        cell.enc = x.enc.min(y.enc);
                        cell.mid = x.mid.min(y.mid);
                    } else {
                        cell.enc = x.enc.max(y.enc);
                        cell.mid = x.mid.max(y.mid);
                    }
                    let (x_wins, y_wins) = if is_min {
                        (x.enc.hi < y.enc.lo, y.enc.hi < x.enc.lo)
                    } else {
                        (x.enc.lo > y.enc.hi, y.enc.lo > x.enc.hi)
                    };
                    if x_wins {
                        cell.smooth = x.smooth;
                        cell.grad = x.grad;
                    } else if y_wins {
                        cell.smooth = y.smooth;
                        cell.grad = y.grad;
                    } else {
                        cell.smooth = x.smooth && y.smooth;
                        for k in 0..n {
                            cell.grad[k] = x.grad[k].hull(y.grad[k]);
                        }
                    }
                }
            }
            if let Some(mv) = mean_value(&cell, &dev, n) {
                cell.enc = intersect(cell.enc, mv);
            }
            scratch.push(cell);
        }
        scratch.last().expect("non-empty tape").enc
    }
}

/// f(c) + Σ gᵢ·(xᵢ − cᵢ), when every piece is finite.
fn mean_value(cell: &Cell, dev: &[Interval; MAX_DIMS], n: usize) -> Option<Interval> {
    if !cell.smooth || !finite(cell.mid) {
        return None;
    }
    let mut mv = cell.mid;
    for k in 0..n {
        mv = mv.add(cell.grad[k].mul(dev[k]));
    }
    finite(mv).then_some(mv)
}

fn unbounded() -> Cell {
    Cell {
        enc: ENTIRE,
        mid: ENTIRE,
        grad: [ENTIRE; MAX_DIMS],
        smooth: false,
    }
}

/// Reusable evaluation buffers for [`Tape::enclose`] and [`Tape::eval_point`].
#[derive(Default)]
pub struct Scratch {
    cells: Vec<Cell>,
    values: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{c, v};

    fn tape(e: &BoundExpr, dims: &[Var]) -> Tape {
        Tape::compile(e, dims, &ParamBox::with_constants(0.0)).unwrap()
    }

    #[test]
    fn cancellation_is_removed_by_the_mean_value_form() {
        let x = v(Var::A);
        let e = &x - &x;
        let t = tape(&e, &[Var::A]);
        let r = t.enclose(&[Interval::new(0.4, 0.6)], &mut Scratch::default());
        assert!(r.width() < 1e-12, "{r}");
    }

    #[test]
    fn small_positive_quotient_gap_is_resolved() {
        let x = v(Var::A);
        let d = v(Var::Sigma);
        let e = (&x + 4.0 * &d) / (2.0 * &x + 2.0 * &d) - 0.5;
        let t = tape(&e, &[Var::A, Var::Sigma]);
        let r = t.enclose(&[Interval::new(0.5, 0.52), Interval::new(1e-6, 2e-6)], &mut Scratch::default());
        assert!(r.lo > 0.0, "{r}");
    }

    #[test]
    fn shared_subexpressions_compile_once() {
        let x = v(Var::A) * 2.0;
        let e = &x + &x;
        assert_eq!(tape(&e, &[Var::A]).len(), 4);
    }

    #[test]
    fn vanishing_denominator_gives_whole_line() {
        let e = c(1.0) / v(Var::A);
        let t = tape(&e, &[Var::A]);
        let r = t.enclose(&[Interval::new(-1.0, 1.0)], &mut Scratch::default());
        assert_eq!(r, ENTIRE);
        let m = t.enclose(&[Interval::new(-1.0, 1.0)], &mut Scratch::default()).max(Interval::point(2.0));
        assert_eq!(m.lo, 2.0);
    }

    #[test]
    fn unbound_variable_is_rejected() {
        let e = v(Var::Gamma) + 1.0;
        assert!(Tape::compile(&e, &[Var::A], &ParamBox::with_constants(0.0)).is_err());
    }
}

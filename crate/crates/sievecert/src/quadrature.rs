//! Nested adaptive integration of Buchstab-kernel integrals with min/max
//! limits, closed-form log-power bounds and a six-fold box convolution.

use crate::buchstab::{BuchstabError, PiecewiseOmega};
use crate::expr::{alpha, BoundExpr, ExprError, ParamBox, Point, Var};
use crate::interval::Interval;
use serde::Serialize;
use thiserror::Error;

/// Smallest accepted tolerance.
pub const TOL_MIN: f64 = 1e-8;
/// Largest accepted tolerance.
pub const TOL_MAX: f64 = 1e-2;
/// Default cap on integrand evaluations per integral.
pub const MAX_EVALUATIONS: u64 = 200_000_000;
/// Largest number of integration variables.
pub const MAX_DIM: usize = 4;
const MAX_SEGMENTS: usize = 4_000;
const OUTER_PIECES: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("tolerance {0} outside [1e-8, 1e-2]")]
    BadTolerance(f64),
    #[error("ill-formed integral: {0}")]
    IllFormed(String),
    #[error("evaluation budget exhausted after {} evaluations (partial value {}, err {})", .0.evaluations, .0.value, .0.err)]
    Budget(IntegralResult),
    #[error("tolerance not reached (value {}, err {})", .0.value, .0.err)]
    ToleranceNotMet(IntegralResult),
    #[error(transparent)]
    Omega(#[from] BuchstabError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("invalid closed-form term: {0}")]
    InvalidTerm(String),
}

/// Integrand of an [`IntegralSpec`].
#[derive(Clone, Debug)]
pub enum Kernel {
    /// ω(argument) / denom.
    Omega {
        argument: BoundExpr,
        denom: BoundExpr,
    },
    /// A plain expression in the integration variables.
    ClosedForm(BoundExpr),
}

/// An iterated integral over `vars` (outermost first).
#[derive(Clone, Debug)]
pub struct IntegralSpec {
    pub vars: Vec<Var>,
    pub limits: Vec<(BoundExpr, BoundExpr)>,
    pub kernel: Kernel,
    pub prefactor: f64,
    buchstab_kernel: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntegralResult {
    pub value: f64,
    pub err: f64,
    pub evaluations: u64,
}

impl IntegralResult {
    pub const ZERO: IntegralResult = IntegralResult {
        value: 0.0,
        err: 0.0,
        evaluations: 0,
    };

    /// Sum of two results with errors added.
    pub fn plus(self, o: IntegralResult) -> IntegralResult {
        IntegralResult {
            value: self.value + o.value,
            err: self.err + o.err,
            evaluations: self.evaluations + o.evaluations,
        }
    }

    /// Upper end of the certified range.
    pub fn upper(&self) -> f64 {
        self.value + self.err
    }
}

/// Where ω values come from.
#[derive(Clone, Copy, Debug)]
pub enum OmegaSource<'a> {
    Table(&'a PiecewiseOmega),
    /// The crude bound max(0.6, 1/u).
    Upper,
}

impl OmegaSource<'_> {
    /// ω(u) with error; zero below 1.
    fn value(&self, u: f64) -> Result<(f64, f64), QuadError> {
        if u < 1.0 {
            return Ok((0.0, 0.0));
        }
        match self {
            OmegaSource::Table(t) => Ok(t.eval(u)?),
            OmegaSource::Upper => Ok(((1.0 / u).max(0.6), 0.0)),
        }
    }

    /// Certified lower and upper bounds of ω on [u_lo, u_hi] with 1 ≤ u_lo.
    fn range_on(&self, u_lo: f64, u_hi: f64) -> Result<(f64, f64), QuadError> {
        match self {
            OmegaSource::Table(t) => {
                let table_err = t.max_error() + 8.0 * f64::EPSILON;
                let (w0, _) = t.eval(u_lo)?;
                let (w1, _) = t.eval(u_hi)?;
                let slack = t.slope_bound(u_lo, u_hi) * (u_hi - u_lo) / 2.0;
                let mid = 0.5 * (w0 + w1);
                let dn = (w0.min(w1) - slack - table_err).max(0.0);
                let up = (mid + slack + table_err).min(1.0);
                Ok((dn, up))
            }
            OmegaSource::Upper => Ok((self.value(u_hi)?.0, self.value(u_lo)?.0)),
        }
    }

    /// ∫₁^u ω with error; zero for u ≤ 1.
    fn primitive(&self, u: f64) -> Result<(f64, f64), QuadError> {
        if u <= 1.0 {
            return Ok((0.0, 0.0));
        }
        match self {
            OmegaSource::Table(t) => Ok(t.integral(u)?),
            OmegaSource::Upper => {
                let knee = 5.0 / 3.0;
                let v = if u <= knee {
                    u.ln()
                } else {
                    knee.ln() + 0.6 * (u - knee)
                };
                Ok((v, 4.0 * f64::EPSILON * v))
            }
        }
    }
}

/// Tuning knobs for [`integrate_with`].
#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    /// Use the exact primitive of ω for the innermost variable of a Buchstab kernel.
    pub analytic_inner: bool,
    pub max_evaluations: u64,
    pub eps1: f64,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            analytic_inner: true,
            max_evaluations: MAX_EVALUATIONS,
            eps1: 0.0,
        }
    }
}

impl IntegralSpec {
    /// Validates limit dependencies and dimension.
    pub fn new(
        vars: Vec<Var>,
        limits: Vec<(BoundExpr, BoundExpr)>,
        kernel: Kernel,
        prefactor: f64,
    ) -> Result<Self, QuadError> {
        if vars.is_empty() || vars.len() > MAX_DIM {
            return Err(QuadError::IllFormed(format!("{} variables", vars.len())));
        }
        if vars.len() != limits.len() {
            return Err(QuadError::IllFormed(
                "one limit pair per variable required".into(),
            ));
        }
        for (k, (lo, hi)) in limits.iter().enumerate() {
            for e in [lo, hi] {
                for fv in e.free_vars() {
                    if !(vars[..k].contains(&fv) || matches!(fv, Var::Nu | Var::Eps1)) {
                        return Err(QuadError::IllFormed(format!(
                            "limit of {} refers to {fv}",
                            vars[k]
                        )));
                    }
                }
            }
        }
        Ok(IntegralSpec {
            vars,
            limits,
            kernel,
            prefactor,
            buchstab_kernel: false,
        })
    }

    /// ∫…∫ ω((1 − α₁ − … − α_k)/α_k) / (α₁⋯α_{k−1}·α_k²) over the given limits,
    /// with variables α₁…α_k.
    pub fn buchstab(limits: Vec<(BoundExpr, BoundExpr)>) -> Result<Self, QuadError> {
        let k = limits.len();
        if k == 0 || k > MAX_DIM {
            return Err(QuadError::IllFormed(format!("{k} variables")));
        }
        let vars: Vec<Var> = (1..=k as u8).map(Var::Alpha).collect();
        let last = alpha(k as u8);
        let total = (1..=k as u8)
            .map(alpha)
            .fold(BoundExpr::constant(0.0), |s, x| s + x);
        let argument = (1.0 - total) / &last;
        let denom = (1..k as u8).map(alpha).fold(&last * &last, |p, x| p * x);
        let mut spec = IntegralSpec::new(vars, limits, Kernel::Omega { argument, denom }, 1.0)?;
        spec.buchstab_kernel = true;
        spec.check_positive_lower_limits()?;
        Ok(spec)
    }

    pub fn with_prefactor(mut self, prefactor: f64) -> Self {
        self.prefactor = prefactor;
        self
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn is_buchstab_kernel(&self) -> bool {
        self.buchstab_kernel
    }

    /// Interval hull of each variable's range, outermost first.
    pub fn variable_ranges(&self, eps1: f64) -> Result<Vec<Interval>, QuadError> {
        let mut b = ParamBox::with_constants(eps1);
        let mut out = Vec::with_capacity(self.dim());
        for (v, (lo, hi)) in self.vars.iter().zip(&self.limits) {
            let l = lo.eval_interval(&b)?;
            let h = hi.eval_interval(&b)?;
            let range = Interval::new(l.lo, h.hi.max(l.lo));
            b.set(*v, range);
            out.push(range);
        }
        Ok(out)
    }

    /// Rejects constant lower limits that are not positive; variable ones are
    /// checked wherever the range is non-empty during integration.
    fn check_positive_lower_limits(&self) -> Result<(), QuadError> {
        for (v, (lo, _)) in self.vars.iter().zip(&self.limits) {
            if let Some(x) = lo.as_constant().filter(|x| *x <= 0.0) {
                return Err(QuadError::IllFormed(format!("{v} starts at {x}")));
            }
        }
        Ok(())
    }
}

/// Gauss–Kronrod 7/15 abscissae (non-negative half) and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
/// Gauss weights on the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    rule_err: f64,
    carried: f64,
}

/// One G7/K15 panel of an integrand returning (value, carried error).
fn gk15<F>(a: f64, b: f64, f: &mut F) -> Result<Segment, QuadError>
where
    F: FnMut(f64) -> Result<(f64, f64), QuadError>,
{
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut kron = 0.0;
    let mut gauss = 0.0;
    let mut carried = 0.0;
    for (i, (&x, &wk)) in XGK.iter().zip(&WGK).enumerate() {
        let nodes: &[f64] = if x == 0.0 { &[0.0] } else { &[-x, x] };
        for &t in nodes {
            let (fv, fe) = f(c + r * t)?;
            kron += wk * fv;
            carried += wk * fe;
            if i % 2 == 1 {
                gauss += WG[i / 2] * fv;
            }
        }
    }
    Ok(Segment {
        a,
        b,
        value: r * kron,
        rule_err: (r * (kron - gauss)).abs(),
        carried: r.abs() * carried,
    })
}

/// Adaptive bisection until the summed rule error is at most `tol`.
/// Returns (value, rule error, carried error).
fn adapt<F>(
    a: f64,
    b: f64,
    pieces: usize,
    tol: f64,
    f: &mut F,
) -> Result<(f64, f64, f64), QuadError>
where
    F: FnMut(f64) -> Result<(f64, f64), QuadError>,
{
    let step = (b - a) / pieces as f64;
    let mut segs = Vec::with_capacity(pieces);
    for i in 0..pieces {
        let hi = if i + 1 == pieces {
            b
        } else {
            a + (i + 1) as f64 * step
        };
        segs.push(gk15(a + i as f64 * step, hi, f)?);
    }
    loop {
        let rule: f64 = segs.iter().map(|s| s.rule_err).sum();
        if rule <= tol || segs.len() >= MAX_SEGMENTS {
            let value = segs.iter().map(|s| s.value).sum();
            let carried = segs.iter().map(|s| s.carried).sum();
            return Ok((value, rule, carried));
        }
        let worst = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.rule_err.total_cmp(&y.1.rule_err))
            .map(|(i, _)| i)
            .unwrap();
        let s = segs.swap_remove(worst);
        let m = 0.5 * (s.a + s.b);
        if m <= s.a || m >= s.b {
            segs.push(Segment {
                rule_err: 0.0,
                carried: s.carried + s.rule_err,
                ..s
            });
            continue;
        }
        segs.push(gk15(s.a, m, f)?);
        segs.push(gk15(m, s.b, f)?);
    }
}

struct Run<'a> {
    spec: &'a IntegralSpec,
    omega: OmegaSource<'a>,
    analytic: bool,
    evaluations: u64,
    budget: u64,
    exhausted: bool,
}

impl Run<'_> {
    /// Integral over variables `k..` at the outer point `p`, returning
    /// (value, error) with error = rule error + propagated errors.
    fn level(&mut self, k: usize, p: &mut Point, tol: f64) -> Result<(f64, f64), QuadError> {
        let (lo_e, hi_e) = &self.spec.limits[k];
        let lo = lo_e.eval_point(p)?;
        let hi = hi_e.eval_point(p)?;
        if !(hi > lo) {
            return Ok((0.0, 0.0));
        }
        if self.spec.buchstab_kernel && lo <= 0.0 {
            return Err(QuadError::IllFormed(format!(
                "{} starts at {lo} on a non-empty range",
                self.spec.vars[k]
            )));
        }
        let dim = self.spec.dim();
        if self.analytic && k + 1 == dim {
            return self.analytic_inner(p, lo, hi);
        }
        let var = self.spec.vars[k];
        let inner_tol = 0.25 * tol / (hi - lo);
        let mut cuts = vec![lo];
        if self.spec.buchstab_kernel && k + 1 == dim {
            // ω jumps at u = 1 and has derivative breaks at u = 2, 3.
            let rest = 1.0
                - self.spec.vars[..k]
                    .iter()
                    .map(|v| p.get(*v).unwrap())
                    .sum::<f64>();
            cuts.extend(
                [rest / 4.0, rest / 3.0, rest / 2.0]
                    .into_iter()
                    .filter(|&x| lo < x && x < hi),
            );
        }
        cuts.push(hi);
        let mut f = |x: f64| -> Result<(f64, f64), QuadError> {
            p.set(var, x);
            if k + 1 == dim {
                self.kernel(p)
            } else {
                self.level(k + 1, p, inner_tol)
            }
        };
        let (mut value, mut err) = (0.0, 0.0);
        for w in cuts.windows(2) {
            let share = 0.5 * tol * (w[1] - w[0]) / (hi - lo);
            let (v, rule, carried) = adapt(
                w[0],
                w[1],
                if k == 0 { OUTER_PIECES } else { 1 },
                share,
                &mut f,
            )?;
            value += v;
            err += rule + carried;
        }
        Ok((value, err))
    }

    fn tick(&mut self) -> Result<(), QuadError> {
        self.evaluations += 1;
        if self.evaluations > self.budget {
            self.exhausted = true;
            return Err(QuadError::Budget(IntegralResult::ZERO));
        }
        Ok(())
    }

    fn kernel(&mut self, p: &Point) -> Result<(f64, f64), QuadError> {
        self.tick()?;
        match &self.spec.kernel {
            Kernel::ClosedForm(e) => Ok((e.eval_point(p)?, 0.0)),
            Kernel::Omega { argument, denom } => {
                let u = argument.eval_point(p)?;
                let d = denom.eval_point(p)?;
                let (w, e) = self.omega.value(u)?;
                Ok((w / d, e / d.abs()))
            }
        }
    }

    /// ∫_lo^hi ω((1−S−α)/α)/(P·α²) dα = (W(u(lo)) − W(u(hi)))/(P·(1−S)).
    fn analytic_inner(&mut self, p: &Point, lo: f64, hi: f64) -> Result<(f64, f64), QuadError> {
        self.tick()?;
        let outer = &self.spec.vars[..self.spec.dim() - 1];
        let mut sum = 0.0;
        let mut prod = 1.0;
        for v in outer {
            let x = p.get(*v).expect("outer variable bound");
            sum += x;
            prod *= x;
        }
        let rest = 1.0 - sum;
        if rest <= 0.0 {
            return Ok((0.0, 0.0));
        }
        let (w_lo, e_lo) = self.omega.primitive(rest / lo - 1.0)?;
        let (w_hi, e_hi) = self.omega.primitive(rest / hi - 1.0)?;
        let scale = 1.0 / (prod * rest);
        let value = (w_lo - w_hi) * scale;
        let err = (e_lo + e_hi) * scale + 4.0 * f64::EPSILON * value.abs();
        Ok((value, err))
    }
}

fn check_tol(tol: f64) -> Result<(), QuadError> {
    if !(TOL_MIN..=TOL_MAX).contains(&tol) {
        return Err(QuadError::BadTolerance(tol));
    }
    Ok(())
}

/// Integrates `spec` with the tabulated ω to absolute tolerance `tol`.
pub fn integrate(
    spec: &IntegralSpec,
    omega: &PiecewiseOmega,
    tol: f64,
) -> Result<IntegralResult, QuadError> {
    integrate_with(
        spec,
        OmegaSource::Table(omega),
        tol,
        &QuadOptions::default(),
    )
}

/// Integrates `spec` with an explicit ω source and options.
pub fn integrate_with(
    spec: &IntegralSpec,
    omega: OmegaSource<'_>,
    tol: f64,
    opts: &QuadOptions,
) -> Result<IntegralResult, QuadError> {
    check_tol(tol)?;
    let scale = spec.prefactor.abs().max(f64::MIN_POSITIVE);
    let mut run = Run {
        spec,
        omega,
        analytic: opts.analytic_inner && spec.buchstab_kernel,
        evaluations: 0,
        budget: opts.max_evaluations,
        exhausted: false,
    };
    let mut p = Point::with_constants(opts.eps1);
    let outcome = run.level(0, &mut p, tol / scale);
    let (value, err) = match outcome {
        Ok(r) => r,
        Err(QuadError::Budget(_)) if run.exhausted => {
            return Err(QuadError::Budget(IntegralResult {
                value: f64::NAN,
                err: f64::INFINITY,
                evaluations: run.evaluations,
            }));
        }
        Err(e) => return Err(e),
    };
    let result = IntegralResult {
        value: spec.prefactor * value,
        err: scale * err,
        evaluations: run.evaluations,
    };
    if result.err > tol {
        return Err(QuadError::ToleranceNotMet(result));
    }
    Ok(result)
}

/// A product of log-powers divided by a constant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ArithTerm {
    /// (ratio, power) pairs contributing ln(ratio)^power.
    pub logs: Vec<(f64, u32)>,
    pub denominator: f64,
}

impl ArithTerm {
    pub fn new(logs: Vec<(f64, u32)>, denominator: f64) -> Self {
        ArithTerm { logs, denominator }
    }
}

/// Σ Π ln(ratio)^power / denominator over `terms`.
pub fn eval_arith_bound(terms: &[ArithTerm]) -> Result<f64, QuadError> {
    let mut total = 0.0;
    for t in terms {
        if !(t.denominator > 0.0) {
            return Err(QuadError::InvalidTerm(format!(
                "denominator {}",
                t.denominator
            )));
        }
        let mut prod = 1.0;
        for &(ratio, power) in &t.logs {
            if !(ratio > 1.0) {
                return Err(QuadError::InvalidTerm(format!("ratio {ratio}")));
            }
            prod *= ratio.ln().powi(power as i32);
        }
        total += prod / t.denominator;
    }
    Ok(total)
}

/// (1/scale)·∫ over a product of six boxes of ω((1 − Σα)/α₆)/(α₁⋯α₆).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoxConvolution {
    pub boxes: [(f64, f64); 6],
    pub scale: f64,
}

/// Cell masses ∫ dα/α of [lo, hi] cut at multiples of `h`; returns the first
/// grid index and the masses.
fn log_histogram(lo: f64, hi: f64, h: f64) -> (i64, Vec<f64>) {
    let k0 = (lo / h + 1e-9).floor() as i64;
    let k1 = (hi / h - 1e-9).ceil() as i64;
    let masses = (k0..k1)
        .map(|k| {
            let a = (k as f64 * h).max(lo);
            let b = ((k + 1) as f64 * h).min(hi);
            (b / a).ln()
        })
        .collect();
    (k0, masses)
}

fn convolve(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len() + y.len() - 1];
    for (i, &a) in x.iter().enumerate() {
        for (o, &b) in out[i..].iter_mut().zip(y) {
            *o += a * b;
        }
    }
    out
}

impl BoxConvolution {
    /// Certified lower and upper bounds at grid width `h` for the tabulated ω.
    pub fn bracket(&self, omega: &PiecewiseOmega, h: f64) -> Result<(f64, f64, u64), QuadError> {
        self.bracket_source(OmegaSource::Table(omega), h)
    }

    /// Certified lower and upper bounds at grid width `h`.
    pub fn bracket_source(
        &self,
        omega: OmegaSource<'_>,
        h: f64,
    ) -> Result<(f64, f64, u64), QuadError> {
        let mut first = 0i64;
        let mut mass = vec![1.0];
        for &(lo, hi) in &self.boxes[..5] {
            let (k0, w) = log_histogram(lo, hi, h);
            first += k0;
            mass = convolve(&mass, &w);
        }
        let (lo6, hi6) = self.boxes[5];
        let (k6, w6) = log_histogram(lo6, hi6, h);
        let mut lower = 0.0;
        let mut upper = 0.0;
        let mut evaluations = 0u64;
        for (j, &m6) in w6.iter().enumerate() {
            let a_lo = ((k6 + j as i64) as f64 * h).max(lo6);
            let a_hi = ((k6 + j as i64 + 1) as f64 * h).min(hi6);
            let (mut lo_sum, mut hi_sum) = (0.0, 0.0);
            for (i, &m) in mass.iter().enumerate() {
                let s = (first + i as i64) as f64 * h;
                let u_lo = (1.0 - (s + 5.0 * h) - a_hi) / a_hi;
                let u_hi = (1.0 - s - a_lo) / a_lo;
                let (dn, up) = if u_hi < 1.0 {
                    (0.0, 0.0)
                } else if u_lo < 1.0 {
                    (0.0, 1.0)
                } else {
                    evaluations += 2;
                    omega.range_on(u_lo, u_hi)?
                };
                lo_sum += m * dn;
                hi_sum += m * up;
            }
            lower += m6 * lo_sum;
            upper += m6 * hi_sum;
        }
        Ok((lower / self.scale, upper / self.scale, evaluations))
    }

    /// Halves the grid width from 10⁻³ until the bracket half-width is at most `tol`.
    pub fn integrate(&self, omega: &PiecewiseOmega, tol: f64) -> Result<IntegralResult, QuadError> {
        self.integrate_source(OmegaSource::Table(omega), tol)
    }

    /// As [`BoxConvolution::integrate`] for any ω source.
    pub fn integrate_source(
        &self,
        omega: OmegaSource<'_>,
        tol: f64,
    ) -> Result<IntegralResult, QuadError> {
        check_tol(tol)?;
        let mut h = 1e-3;
        let mut evaluations = 0;
        loop {
            let (lo, hi, n) = self.bracket_source(omega, h)?;
            evaluations += n;
            let result = IntegralResult {
                value: 0.5 * (lo + hi),
                err: 0.5 * (hi - lo) * (1.0 + 1e-12),
                evaluations,
            };
            if result.err <= tol {
                return Ok(result);
            }
            if h < 2e-5 {
                return Err(QuadError::ToleranceNotMet(result));
            }
            h /= 2.0;
        }
    }
}

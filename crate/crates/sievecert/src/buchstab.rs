//! Buchstab's function ω(u) on [1, u_max] with per-panel error bounds.
//!
//! The table is built by forward integration of `u·ω(u) = 1 + ∫₁^{u−1} ω(s) ds`
//! with the composite trapezoid rule on a grid of step `1/m`, so integers are
//! grid points. On [1, 2] and [2, 3] the closed forms `1/u` and
//! `(1 + ln(u−1))/u` are used directly.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use thiserror::Error;

/// e^(−γ), the limit of ω(u) as u → ∞.
pub const EXP_NEG_EULER_GAMMA: f64 = 0.561_459_483_566_885_2;

/// Largest step for which the first-order error certificate is stated.
pub const MAX_STEP: f64 = 0.01;

/// Largest supported table extent.
pub const MAX_U: f64 = 64.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BuchstabError {
    #[error("invalid table parameters: {0}")]
    InvalidParameters(String),
    #[error("u = {u} is outside the supported range [{lo}, {hi}]")]
    OutOfRange { u: f64, lo: f64, hi: f64 },
    #[error("malformed table dump: {0}")]
    Parse(String),
    #[error("i/o failure: {0}")]
    Io(String),
}

/// One unit-length (or final partial) slab of the table.
#[derive(Clone, Debug)]
pub struct Panel {
    pub u_lo: f64,
    pub u_hi: f64,
    /// Samples of ω at `u_lo + i·step`, both ends included.
    pub values: Vec<f64>,
    /// Certified bound on the error of every sample in `values`.
    pub max_error: f64,
    /// Bound on |ω''| inside the panel (safety factor included).
    second_derivative: f64,
    /// Bound on |ω'| inside the panel (safety factor included).
    slope: f64,
}

/// Tabulated Buchstab function.
#[derive(Clone, Debug)]
pub struct PiecewiseOmega {
    pub panels: Vec<Panel>,
    pub u_max: f64,
    /// The step requested at construction.
    pub step: f64,
    /// Number of grid cells per unit of u.
    per_unit: usize,
    /// Flattened grid values: `grid[i] ≈ ω(1 + i/per_unit)`.
    grid: Vec<f64>,
}

fn closed_form(u: f64) -> Option<f64> {
    if (1.0..=2.0).contains(&u) {
        Some(1.0 / u)
    } else if u > 2.0 && u <= 3.0 {
        Some((1.0 + (u - 1.0).ln()) / u)
    } else {
        None
    }
}

/// Rounds `x > 0` up to two significant decimal digits.
fn ceil_two_digits(x: f64) -> f64 {
    if x <= 0.0 || !x.is_finite() {
        return x.max(0.0);
    }
    let scale = 10f64.powi(x.log10().floor() as i32 - 1);
    (x / scale).ceil() * scale
}

/// Builds the table on [1, u_max] with grid step at most `step`.
pub fn build_omega(u_max: f64, step: f64) -> Result<PiecewiseOmega, BuchstabError> {
    if !u_max.is_finite() || !step.is_finite() {
        return Err(BuchstabError::InvalidParameters("non-finite input".into()));
    }
    if u_max <= 2.0 || u_max > MAX_U {
        return Err(BuchstabError::InvalidParameters(format!(
            "u_max = {u_max} must lie in (2, {MAX_U}]"
        )));
    }
    if step <= 0.0 || step > MAX_STEP {
        return Err(BuchstabError::InvalidParameters(format!(
            "step = {step} must lie in (0, {MAX_STEP}]"
        )));
    }
    let per_unit = (1.0 / step - 1e-9).ceil() as usize;
    let h = 1.0 / per_unit as f64;
    let cells = ((u_max - 1.0) * per_unit as f64 - 1e-9).ceil() as usize;
    let node = |i: usize| 1.0 + i as f64 / per_unit as f64;

    let mut grid = vec![0.0; cells + 1];
    // cumulative[i] = ∫₁^{u_i} ω
    let mut cumulative = vec![0.0; cells + 1];
    for i in 0..=cells {
        let u = node(i);
        grid[i] = match closed_form(u) {
            Some(w) => w,
            None => (1.0 + cumulative[i - per_unit]) / u,
        };
        if i > 0 {
            cumulative[i] = if i <= per_unit {
                u.ln()
            } else {
                cumulative[i - 1] + 0.5 * h * (grid[i - 1] + grid[i])
            };
        }
    }
    Ok(assemble(u_max, step, per_unit, grid))
}

/// Splits a flat grid into panels and derives all error metadata from it.
fn assemble(u_max: f64, step: f64, per_unit: usize, grid: Vec<f64>) -> PiecewiseOmega {
    let h = 1.0 / per_unit as f64;
    let cells = grid.len() - 1;
    let slabs = cells.div_ceil(per_unit);

    // Per-slab bound on |ω''| from second differences inside the slab.
    let mut second = vec![0.0f64; slabs];
    for (k, s) in second.iter_mut().enumerate() {
        let lo = k * per_unit;
        let hi = ((k + 1) * per_unit).min(cells);
        let mut m2 = 0.0f64;
        for i in lo + 1..hi {
            let d2 = (grid[i + 1] - 2.0 * grid[i] + grid[i - 1]).abs() / (h * h);
            m2 = m2.max(d2);
        }
        if k == 0 {
            // ω'' = 2/u³ on [1, 2].
            m2 = m2.max(2.0);
        }
        *s = 2.0 * m2;
    }

    // Propagated second-order error of the samples.
    let mut sample_err = vec![0.0f64; cells + 1];
    let mut cumulative_err = vec![0.0f64; cells + 1];
    for i in 1..=cells {
        let u = 1.0 + i as f64 / per_unit as f64;
        if u > 3.0 {
            sample_err[i] = cumulative_err[i - per_unit] / u;
        }
        if i > per_unit {
            let slab = (i - 1) / per_unit;
            cumulative_err[i] = cumulative_err[i - 1]
                + 0.5 * h * (sample_err[i - 1] + sample_err[i])
                + h * h * h / 12.0 * second[slab];
        }
    }

    let mut panels = Vec::with_capacity(slabs);
    let mut running = 0.0f64;
    for k in 0..slabs {
        let lo = k * per_unit;
        let hi = ((k + 1) * per_unit).min(cells);
        let u_lo = 1.0 + lo as f64 / per_unit as f64;
        let u_hi = 1.0 + hi as f64 / per_unit as f64;
        let max_error = if u_hi <= 3.0 {
            0.0
        } else {
            let local = sample_err[lo..=hi].iter().fold(0.0f64, |a, &b| a.max(b));
            running = running.max(local / (h * h));
            // First-order certificate valid for every step ≤ MAX_STEP.
            let first_order = h * MAX_STEP * ceil_two_digits(2.0 * running);
            let rounding = 4.0 * (hi + 1) as f64 * f64::EPSILON;
            first_order + rounding
        };
        let mut slope = 0.0f64;
        for i in lo..=hi {
            let u = 1.0 + i as f64 / per_unit as f64;
            let d = if u <= 2.0 {
                1.0 / (u * u)
            } else {
                (grid[i - per_unit] - grid[i]).abs() / u
            };
            slope = slope.max(d);
        }
        let slope = 1.05 * slope + h * second[k];
        panels.push(Panel {
            u_lo,
            u_hi,
            values: grid[lo..=hi].to_vec(),
            max_error,
            second_derivative: second[k],
            slope,
        });
    }
    PiecewiseOmega {
        panels,
        u_max,
        step,
        per_unit,
        grid,
    }
}

/// Fritsch–Carlson slope at an interior node given neighbouring secants.
fn pchip_slope(d_left: f64, d_right: f64) -> f64 {
    if d_left == 0.0 || d_right == 0.0 || d_left.signum() != d_right.signum() {
        0.0
    } else {
        2.0 / (1.0 / d_left + 1.0 / d_right)
    }
}

impl PiecewiseOmega {
    /// Grid step actually used.
    pub fn grid_step(&self) -> f64 {
        1.0 / self.per_unit as f64
    }

    fn check(&self, u: f64) -> Result<(), BuchstabError> {
        if !(1.0..=self.u_max).contains(&u) {
            return Err(BuchstabError::OutOfRange {
                u,
                lo: 1.0,
                hi: self.u_max,
            });
        }
        Ok(())
    }

    fn panel_at(&self, u: f64) -> &Panel {
        let slab = ((u - 1.0).floor() as usize).min(self.panels.len() - 1);
        &self.panels[slab]
    }

    /// Value and error bound of ω(u) for u in [1, u_max].
    pub fn eval(&self, u: f64) -> Result<(f64, f64), BuchstabError> {
        self.check(u)?;
        if u <= 2.0 {
            let w = 1.0 / u;
            let exact = w.mul_add(u, -1.0) == 0.0;
            return Ok((w, if exact { 0.0 } else { 0.5 * f64::EPSILON * w }));
        }
        if u <= 3.0 {
            let w = (1.0 + (u - 1.0).ln()) / u;
            return Ok((w, 4.0 * f64::EPSILON));
        }
        let panel = self.panel_at(u);
        let n = self.per_unit as f64;
        let x = (u - 1.0) * n;
        let last = self.grid.len() - 1;
        let i = (x.floor() as usize).min(last - 1);
        let t = x - i as f64;
        let h = self.grid_step();
        let y0 = self.grid[i];
        let y1 = self.grid[i + 1];
        let linear = y0 + t * (y1 - y0);
        // Slopes restricted to nodes of the same unit slab.
        let slab_lo = ((u - 1.0).floor() as usize) * self.per_unit;
        let slab_hi = (slab_lo + self.per_unit).min(last);
        let secant = |j: usize| (self.grid[j + 1] - self.grid[j]) / h;
        let d = secant(i);
        let m0 = if i > slab_lo {
            pchip_slope(secant(i - 1), d)
        } else {
            d
        };
        let m1 = if i + 1 < slab_hi {
            pchip_slope(d, secant(i + 1))
        } else {
            d
        };
        let t2 = t * t;
        let t3 = t2 * t;
        let value = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * h * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * h * m1;
        let interp = (value - linear).abs() + h * h * panel.second_derivative / 8.0;
        let rounding = 8.0 * f64::EPSILON;
        Ok((value, panel.max_error + interp + rounding))
    }

    /// ∫₁^v ω(s) ds with an error bound, for 1 ≤ v ≤ u_max − 1; zero for v ≤ 1.
    pub fn integral(&self, v: f64) -> Result<(f64, f64), BuchstabError> {
        if v <= 1.0 {
            return Ok((0.0, 0.0));
        }
        if v <= 2.0 {
            return Ok((v.ln(), f64::EPSILON));
        }
        let (w, e) = self.eval(v + 1.0)?;
        Ok(((v + 1.0) * w - 1.0, (v + 1.0) * e + 2.0 * f64::EPSILON))
    }

    /// Upper bound on |ω'| over [u_lo, u_hi] ∩ [1, u_max].
    pub fn slope_bound(&self, u_lo: f64, u_hi: f64) -> f64 {
        let lo = u_lo.max(1.0);
        let hi = u_hi.min(self.u_max);
        if lo > hi {
            return 0.0;
        }
        self.panels
            .iter()
            .filter(|p| p.u_hi >= lo && p.u_lo <= hi)
            .map(|p| p.slope)
            .fold(0.0, f64::max)
    }

    /// Largest per-panel construction error.
    pub fn max_error(&self) -> f64 {
        self.panels.iter().map(|p| p.max_error).fold(0.0, f64::max)
    }

    /// Writes the plain-text dump: header line then `u value` pairs.
    pub fn dump<W: Write>(&self, mut out: W) -> Result<(), BuchstabError> {
        let io = |e: std::io::Error| BuchstabError::Io(e.to_string());
        writeln!(out, "omega-table v1 {} {}", self.u_max, self.step).map_err(io)?;
        let mut line = String::new();
        for (i, w) in self.grid.iter().enumerate() {
            line.clear();
            let u = 1.0 + i as f64 / self.per_unit as f64;
            let _ = write!(line, "{u:.16e} {w:.16e}");
            writeln!(out, "{line}").map_err(io)?;
        }
        Ok(())
    }

    /// Reads a dump written by [`PiecewiseOmega::dump`].
    pub fn load<R: BufRead>(input: R) -> Result<PiecewiseOmega, BuchstabError> {
        let parse = |s: &str| BuchstabError::Parse(s.to_string());
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| parse("empty input"))?
            .map_err(|e| BuchstabError::Io(e.to_string()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 || fields[0] != "omega-table" || fields[1] != "v1" {
            return Err(parse("bad header"));
        }
        let u_max: f64 = fields[2].parse().map_err(|_| parse("bad u_max"))?;
        let step: f64 = fields[3].parse().map_err(|_| parse("bad step"))?;
        let reference = build_omega(u_max, step)?;
        let mut grid = Vec::with_capacity(reference.grid.len());
        for (k, line) in lines.enumerate() {
            let line = line.map_err(|e| BuchstabError::Io(e.to_string()))?;
            let mut it = line.split_whitespace();
            let (Some(us), Some(ws), None) = (it.next(), it.next(), it.next()) else {
                return Err(parse(&format!("bad line {}", k + 2)));
            };
            let u: f64 = us.parse().map_err(|_| parse("bad u"))?;
            let w: f64 = ws.parse().map_err(|_| parse("bad value"))?;
            let expected = 1.0 + grid.len() as f64 / reference.per_unit as f64;
            if (u - expected).abs() > 1e-12 {
                return Err(parse(&format!("grid mismatch at line {}", k + 2)));
            }
            grid.push(w);
        }
        if grid.len() != reference.grid.len() {
            return Err(parse("wrong number of samples"));
        }
        Ok(assemble(u_max, step, reference.per_unit, grid))
    }

    /// The flat grid of samples (u, ω(u)).
    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.per_unit as f64;
        self.grid
            .iter()
            .enumerate()
            .map(move |(i, &w)| (1.0 + i as f64 / n, w))
    }
}

/// Value and error of ω(u); errors outside [1, u_max].
pub fn omega(table: &PiecewiseOmega, u: f64) -> Result<(f64, f64), BuchstabError> {
    table.eval(u)
}

/// The bound max{0.6, 1/u}, valid for u ≥ 1.
pub fn omega_upper(u: f64) -> Result<f64, BuchstabError> {
    if u.is_nan() || u < 1.0 {
        return Err(BuchstabError::OutOfRange {
            u,
            lo: 1.0,
            hi: f64::INFINITY,
        });
    }
    Ok((1.0 / u).max(0.6))
}

//! Decay-law fitting on front traces, alignment of fronts up to shift, and
//! speed ordering between two laws.

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::TraceProfile;
use crate::nonlinearity::Nonlinearity;
use crate::solver::{solve_front, choose_weight, FrontSolution, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecaySide {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayQuantity {
    U,
    OneMinusU,
    MinusUy,
}

impl DecaySide {
    pub fn label(self) -> &'static str {
        match self {
            DecaySide::Plus => "plus",
            DecaySide::Minus => "minus",
        }
    }
}

impl DecayQuantity {
    pub fn label(self) -> &'static str {
        match self {
            DecayQuantity::U => "u",
            DecayQuantity::OneMinusU => "one_minus_u",
            DecayQuantity::MinusUy => "minus_u_y",
        }
    }
}

/// The four decay laws: `(side, quantity)` pairs with a model profile.
pub const DECAY_LAWS: [(DecaySide, DecayQuantity); 4] = [
    (DecaySide::Plus, DecayQuantity::MinusUy),
    (DecaySide::Plus, DecayQuantity::U),
    (DecaySide::Minus, DecayQuantity::MinusUy),
    (DecaySide::Minus, DecayQuantity::OneMinusU),
];

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub side: DecaySide,
    pub quantity: DecayQuantity,
    /// Geometric mean of the compensated quantity over the window.
    pub fitted_constant: f64,
    /// Smallest `b` with `C/b <= q/model <= C b` on every window sample.
    pub sandwich_b: f64,
    /// Smallest `b >= 1` with `q/model >= C/b` on every window sample.
    pub lower_b: f64,
    pub window: (f64, f64),
    /// Compensated samples `(y, q(y)/model(y))`.
    pub samples: Vec<(f64, f64)>,
}

impl fmt::Display for DecayReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "side = {}", self.side.label())?;
        writeln!(f, "quantity = {}", self.quantity.label())?;
        writeln!(f, "fitted_constant = {}", self.fitted_constant)?;
        writeln!(f, "sandwich_b = {}", self.sandwich_b)?;
        writeln!(f, "lower_b = {}", self.lower_b)?;
        writeln!(f, "window_lo = {}", self.window.0)?;
        writeln!(f, "window_hi = {}", self.window.1)?;
        writeln!(f, "samples = {}", self.samples.len())
    }
}

fn model(side: DecaySide, quantity: DecayQuantity, c: f64, y: f64) -> Result<f64> {
    match (side, quantity) {
        (DecaySide::Plus, DecayQuantity::MinusUy | DecayQuantity::U) => Ok((-c * y).exp() / y.powf(1.5)),
        (DecaySide::Minus, DecayQuantity::MinusUy) => Ok((-y).powf(-1.5)),
        (DecaySide::Minus, DecayQuantity::OneMinusU) => Ok((-y).powf(-0.5)),
        _ => Err(Error::Analysis(format!(
            "no decay law for {} on the {} side",
            quantity.label(),
            side.label()
        ))),
    }
}

/// Default window on one side: `|y| >= 1` and clear of the outer 15% of the
/// trace domain.
pub fn standard_window(trace: &TraceProfile, side: DecaySide) -> Result<(f64, f64)> {
    let (lo, hi) = (trace.y_nodes[0], trace.y_nodes[trace.len() - 1]);
    let margin = 0.15 * (hi - lo);
    let w = match side {
        DecaySide::Plus => (1.0, hi - margin),
        DecaySide::Minus => (lo + margin, -1.0),
    };
    if !(w.1 > w.0) {
        return Err(Error::Analysis(format!("trace on [{lo}, {hi}] leaves no {} window", side.label())));
    }
    Ok(w)
}

/// Centered differences of a trace, one-sided at the ends.
pub fn trace_derivative(trace: &TraceProfile) -> TraceProfile {
    let (y, v) = (&trace.y_nodes, &trace.values);
    let n = y.len();
    let d = (0..n)
        .map(|k| {
            let (a, b) = (k.saturating_sub(1), (k + 1).min(n - 1));
            (v[b] - v[a]) / (y[b] - y[a])
        })
        .collect();
    TraceProfile { y_nodes: y.clone(), values: d }
}

/// Compensates the trace (or its derivative) by the decay model on `window`
/// (or the standard window) and fits the constant.
pub fn fit_decay(
    trace: &TraceProfile,
    trace_dy: &TraceProfile,
    c: f64,
    side: DecaySide,
    quantity: DecayQuantity,
    window: Option<(f64, f64)>,
) -> Result<DecayReport> {
    if !(c > 0.0) {
        return Err(Error::Analysis(format!("speed must be positive, got {c}")));
    }
    let window = match window {
        Some(w) => w,
        None => standard_window(trace, side)?,
    };
    let (lo, hi) = (trace.y_nodes[0], trace.y_nodes[trace.len() - 1]);
    let margin = 0.15 * (hi - lo);
    if window.0 < lo + margin || window.1 > hi - margin {
        return Err(Error::Analysis(format!(
            "window [{}, {}] reaches the truncation margin of [{lo}, {hi}]",
            window.0, window.1
        )));
    }
    let source = match quantity {
        DecayQuantity::MinusUy => trace_dy,
        _ => trace,
    };
    let mut samples = Vec::new();
    for (&y, &v) in source.y_nodes.iter().zip(&source.values) {
        if y < window.0 || y > window.1 {
            continue;
        }
        let q = match quantity {
            DecayQuantity::U => v,
            DecayQuantity::OneMinusU => 1.0 - v,
            DecayQuantity::MinusUy => -v,
        };
        let r = q / model(side, quantity, c, y)?;
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Analysis(format!(
                "compensated {} is {r} at y = {y}",
                quantity.label()
            )));
        }
        samples.push((y, r));
    }
    if samples.len() < 2 {
        return Err(Error::Analysis("fewer than two trace nodes in the window".into()));
    }
    let fitted_constant = (samples.iter().map(|s| s.1.ln()).sum::<f64>() / samples.len() as f64).exp();
    let sandwich_b = samples
        .iter()
        .map(|s| (s.1 / fitted_constant).max(fitted_constant / s.1))
        .fold(1.0, f64::max);
    let lower_b = samples.iter().map(|s| fitted_constant / s.1).fold(1.0, f64::max);
    Ok(DecayReport { side, quantity, fitted_constant, sandwich_b, lower_b, window, samples })
}

/// Whether `C/b <= q/model <= C b` holds at every window sample.
pub fn sandwich_check(report: &DecayReport, b: f64) -> bool {
    let c = report.fitted_constant;
    // relative slack absorbs the rounding in sandwich_b itself
    let b = b * (1.0 + 1e-12);
    b >= 1.0 && report.samples.iter().all(|&(_, r)| r >= c / b && r <= c * b)
}

/// Whether the lower bound `q/model >= C/b` holds at every window sample.
pub fn lower_bound_check(report: &DecayReport, b: f64) -> bool {
    let c = report.fitted_constant;
    let b = b * (1.0 + 1e-12);
    b >= 1.0 && report.samples.iter().all(|&(_, r)| r >= c / b)
}

/// Shift `s` with `trace2(y + s)` crossing `1/2` where `trace1(y)` does, and
/// the sup distance between `trace1(y)` and `trace2(y + s)` on the overlap.
pub fn align_and_compare(trace1: &TraceProfile, trace2: &TraceProfile) -> Result<(f64, f64)> {
    let y1 = trace1
        .level_crossing(0.5)
        .ok_or_else(|| Error::Analysis("first trace never crosses 1/2".into()))?;
    let y2 = trace2
        .level_crossing(0.5)
        .ok_or_else(|| Error::Analysis("second trace never crosses 1/2".into()))?;
    let shift = y2 - y1;
    let lo = trace1.y_nodes[0].max(trace2.y_nodes[0] - shift);
    let hi = trace1.y_nodes[trace1.len() - 1].min(trace2.y_nodes[trace2.len() - 1] - shift);
    let mut dist: f64 = 0.0;
    for (&y, &v) in trace1.y_nodes.iter().zip(&trace1.values) {
        if y >= lo && y <= hi {
            dist = dist.max((v - trace2.eval(y + shift)).abs());
        }
    }
    for (&y, &v) in trace2.y_nodes.iter().zip(&trace2.values) {
        let y = y - shift;
        if y >= lo && y <= hi {
            dist = dist.max((trace1.eval(y) - v).abs());
        }
    }
    Ok((shift, dist))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedOrdering {
    pub c1: f64,
    pub c2: f64,
    pub ordered: bool,
    pub infimum1: f64,
    pub infimum2: f64,
    /// `I_{1,a} < I_{2,a}`.
    pub infima_ordered: bool,
    /// `f1 > f2` somewhere on the sample grid.
    pub strict: bool,
    pub a: f64,
    pub front1: FrontSolution,
    pub front2: FrontSolution,
}

const ORDER_SAMPLES: usize = 2000;
const ORDER_TOL: f64 = 1e-12;

/// Solves both laws with one weight and grid and compares speeds and infima.
pub fn speed_ordering(nl1: &Nonlinearity, nl2: &Nonlinearity, opts: &SolverOptions) -> Result<SpeedOrdering> {
    let mut strict = false;
    for k in 0..=ORDER_SAMPLES {
        let s = k as f64 / ORDER_SAMPLES as f64;
        let d = nl1.f(s) - nl2.f(s);
        if d < -ORDER_TOL {
            return Err(Error::Analysis(format!("first law falls below the second at s = {s} (by {:e})", -d)));
        }
        strict |= d > ORDER_TOL;
    }
    let a = match opts.a {
        Some(a) => a,
        None => choose_weight(nl1)?.min(choose_weight(nl2)?),
    };
    let opts = SolverOptions { a: Some(a), ..opts.clone() };
    let front1 = solve_front(nl1, &opts)?;
    let front2 = solve_front(nl2, &opts)?;
    Ok(SpeedOrdering {
        c1: front1.speed,
        c2: front2.speed,
        ordered: front1.speed > front2.speed,
        infimum1: front1.infimum,
        infimum2: front2.infimum,
        infima_ordered: front1.infimum < front2.infimum,
        strict,
        a,
        front1,
        front2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::make_combustion;

    fn profile(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> TraceProfile {
        let ys: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
        let vs = ys.iter().map(|&y| f(y)).collect();
        TraceProfile::new(ys, vs).unwrap()
    }

    #[test]
    fn exact_model_gives_unit_sandwich() {
        let c = 0.7;
        let tr = profile(|y| if y > 0.0 { 0.3 * (-c * y).exp() / y.powf(1.5) } else { 0.5 }, -40.0, 40.0, 800);
        let r = fit_decay(&tr, &trace_derivative(&tr), c, DecaySide::Plus, DecayQuantity::U, None).unwrap();
        assert!((r.fitted_constant - 0.3).abs() < 1e-12);
        assert!((r.sandwich_b - 1.0).abs() < 1e-12);
        assert!(sandwich_check(&r, r.sandwich_b));
        assert_eq!(r.window, (1.0, 28.0));
    }

    #[test]
    fn sandwich_b_is_tight() {
        let tr = profile(|y| if y < 0.0 { 1.0 - (2.0 + (0.3 * y).sin()) / (-y).sqrt() / 4.0 } else { 0.0 }, -60.0, 20.0, 800);
        let r = fit_decay(&tr, &trace_derivative(&tr), 1.0, DecaySide::Minus, DecayQuantity::OneMinusU, None).unwrap();
        assert!(r.sandwich_b > 1.5);
        assert!(sandwich_check(&r, r.sandwich_b));
        assert!(!sandwich_check(&r, 1.0));
        assert!(!sandwich_check(&r, 0.999 * r.sandwich_b));
        assert!(lower_bound_check(&r, r.lower_b));
        assert!(r.lower_b <= r.sandwich_b);
    }

    #[test]
    fn fit_rejects_margins_and_bad_pairs() {
        let tr = profile(|y| 1.0 / (1.0 + y.exp()), -20.0, 20.0, 400);
        let dy = trace_derivative(&tr);
        assert!(fit_decay(&tr, &dy, 1.0, DecaySide::Plus, DecayQuantity::U, Some((1.0, 19.0))).is_err());
        assert!(fit_decay(&tr, &dy, 1.0, DecaySide::Plus, DecayQuantity::OneMinusU, None).is_err());
        assert!(fit_decay(&tr, &dy, -1.0, DecaySide::Plus, DecayQuantity::U, None).is_err());
    }

    #[test]
    fn alignment_recovers_shift() {
        let base = |y: f64| 1.0 / (1.0 + (0.8 * y).exp());
        let t1 = profile(base, -30.0, 30.0, 1200);
        let t2 = profile(|y| base(y - 3.7), -30.0, 30.0, 1200);
        let (shift, d) = align_and_compare(&t1, &t2).unwrap();
        assert!((shift - 3.7).abs() < 1e-3, "{shift}");
        assert!(d < 1e-3, "{d}");
        let (s0, d0) = align_and_compare(&t1, &t1).unwrap();
        assert_eq!((s0, d0), (0.0, 0.0));
        let flat = profile(|_| 0.2, -1.0, 1.0, 10);
        assert!(align_and_compare(&t1, &flat).is_err());
    }

    #[test]
    fn ordering_precondition() {
        let weak = make_combustion(0.3, 1.0).unwrap();
        let strong = make_combustion(0.3, 1.5).unwrap();
        let opts = SolverOptions { max_iterations: 1, ..Default::default() };
        match speed_ordering(&weak, &strong, &opts) {
            Err(Error::Analysis(msg)) => assert!(msg.contains("falls below")),
            other => panic!("expected a precondition error, got {other:?}"),
        }
    }
}

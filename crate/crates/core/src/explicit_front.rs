//! Closed-form fronts built from the Bessel-type Poisson kernel of
//! `Δ + 2∂_y` on the half-plane `x > 0`.
//!
//! With `X = x + t` and `r = sqrt(X² + z²)`:
//!
//! * `G^t(x, z) = e^{-z} K_0(r) / (2π)`
//! * `P^t(x, z) = e^{-z} X K_1(r) / (π r)`
//! * `u^t(x, y) = ∫_y^∞ P^t(x, z) dz`, and `u^{t,c}(x, y) = u^t(cx/2, cy/2)`
//!
//! The factor `e^{-z-r}` is formed directly. For `z < 0` it is written as
//! `exp(-X² / (r + |z|))` so the cancellation between `|z|` and `r` never
//! happens in floating point.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec};
use crate::interp::HermiteTable;
use crate::nonlinearity::{Nonlinearity, NonlinearityDescriptor, NonlinearityKind, ScalarFn};
use crate::quad;
use crate::specfun::k01_scaled;

/// Right truncation of the defining integral beyond `max(y, 0)`; the tail is below `e^{-100}`.
const RIGHT_SPAN: f64 = 50.0;
/// Below this `y` the front is computed as `1 - ∫_{-∞}^y P`.
const LEFT_SWITCH: f64 = -1.0;
const REL_TOL: f64 = 1e-13;
const ABS_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExplicitFrontParams {
    pub t: f64,
    pub c: f64,
}

impl ExplicitFrontParams {
    pub fn new(t: f64, c: f64) -> Result<Self> {
        let p = ExplicitFrontParams { t, c };
        p.check()?;
        Ok(p)
    }

    fn check(&self) -> Result<()> {
        if !(self.t > 0.0 && self.t.is_finite() && self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Domain(format!("explicit front needs t > 0 and c > 0, got t={}, c={}", self.t, self.c)));
        }
        Ok(())
    }
}

impl Default for ExplicitFrontParams {
    fn default() -> Self {
        ExplicitFrontParams { t: 1.0, c: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

fn check_point(t: f64, x: f64, y: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("kernel offset t must be positive, got {t}")));
    }
    if !(x >= 0.0 && x.is_finite()) || y.is_nan() {
        return Err(Error::Domain(format!("kernel evaluated outside the closed half-plane at ({x}, {y})")));
    }
    Ok(())
}

/// `-z - sqrt(X² + z²)` without cancellation.
fn exponent(big_x: f64, z: f64, r: f64) -> f64 {
    if z >= 0.0 {
        -z - r
    } else {
        -big_x * big_x / (r - z)
    }
}

fn kernel_p(big_x: f64, z: f64) -> f64 {
    let r = big_x.hypot(z);
    let (_, k1) = k01_scaled(r);
    exponent(big_x, z, r).exp() * big_x / (PI * r) * k1
}

/// `G^t(x, y) = e^{-y} K_0(sqrt((x+t)² + y²)) / (2π)`.
pub fn green_g(t: f64, x: f64, y: f64) -> Result<f64> {
    check_point(t, x, y)?;
    let big_x = x + t;
    let r = big_x.hypot(y);
    let (k0, _) = k01_scaled(r);
    Ok(exponent(big_x, y, r).exp() * k0 / (2.0 * PI))
}

/// `P^t(x, y) = -2 ∂_x G^t(x, y)`.
pub fn poisson_kernel(t: f64, x: f64, y: f64) -> Result<f64> {
    check_point(t, x, y)?;
    Ok(kernel_p(x + t, y))
}

// ∫_{-∞}^{y} P(X, z) dz for y < 0 after z = -1/q², which turns the
// (-z)^{-3/2} tail into a bounded integrand on (0, 1/sqrt(-y)].
fn left_mass(big_x: f64, y: f64) -> Result<f64> {
    let limit = 2.0 * big_x / (2.0 * PI).sqrt();
    let integrand = |q: f64| {
        if q < 1e-50 {
            limit
        } else {
            let z = -1.0 / (q * q);
            2.0 / (q * q * q) * kernel_p(big_x, z)
        }
    };
    quad::integrate(integrand, 0.0, 1.0 / (-y).sqrt(), ABS_FLOOR, REL_TOL)
}

fn right_mass(big_x: f64, y: f64) -> Result<f64> {
    let top = y.max(0.0) + RIGHT_SPAN;
    quad::integrate(|z| kernel_p(big_x, z), y, top, ABS_FLOOR, REL_TOL)
}

/// `∫_a^b P^t(x, z) dz` with `a = -∞` allowed; used by normalization checks.
pub fn kernel_mass(t: f64, x: f64, a: f64, b: f64) -> Result<f64> {
    check_point(t, x, 0.0)?;
    let big_x = x + t;
    if a == f64::NEG_INFINITY {
        if b <= LEFT_SWITCH {
            return left_mass(big_x, b);
        }
        let head = left_mass(big_x, LEFT_SWITCH)?;
        return Ok(head + quad::integrate(|z| kernel_p(big_x, z), LEFT_SWITCH, b, ABS_FLOOR, REL_TOL)?);
    }
    if b == f64::INFINITY {
        return right_mass(big_x, a);
    }
    quad::integrate(|z| kernel_p(big_x, z), a, b, ABS_FLOOR, REL_TOL)
}

fn front_t(t: f64, x: f64, y: f64) -> Result<f64> {
    check_point(t, x, y)?;
    if y == f64::NEG_INFINITY {
        return Ok(1.0);
    }
    if y == f64::INFINITY {
        return Ok(0.0);
    }
    let big_x = x + t;
    if y >= LEFT_SWITCH {
        right_mass(big_x, y)
    } else {
        Ok(1.0 - left_mass(big_x, y)?)
    }
}

/// `u^{t,c}(x, y)`.
pub fn explicit_front(params: &ExplicitFrontParams, x: f64, y: f64) -> Result<f64> {
    params.check()?;
    let k = 0.5 * params.c;
    front_t(params.t, k * x, k * y)
}

/// `u^{t,c}(x, ·)` on ascending `ys`, accumulated cell by cell from the right.
pub fn explicit_front_column(params: &ExplicitFrontParams, x: f64, ys: &[f64]) -> Result<Vec<f64>> {
    params.check()?;
    if ys.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("column ordinates must be strictly increasing".into()));
    }
    let Some(&last) = ys.last() else {
        return Ok(Vec::new());
    };
    let k = 0.5 * params.c;
    let t = params.t;
    check_point(t, k * x, k * last)?;
    let big_x = k * x + t;
    let mut out = vec![0.0; ys.len()];
    let n = ys.len();
    out[n - 1] = front_t(t, k * x, k * last)?;
    for j in (0..n - 1).rev() {
        let cell = quad::integrate(|z| kernel_p(big_x, z), k * ys[j], k * ys[j + 1], ABS_FLOOR, REL_TOL)?;
        out[j] = out[j + 1] + cell;
    }
    Ok(out)
}

/// `u^{t,c}` on the tensor grid `xs × ys`, row-major by `x`.
pub fn explicit_front_grid(params: &ExplicitFrontParams, xs: &[f64], ys: &[f64]) -> Result<Vec<Vec<f64>>> {
    xs.par_iter().map(|&x| explicit_front_column(params, x, ys)).collect()
}

/// `u^{t,c}` sampled on the nodes of `spec`.
pub fn explicit_front_field(params: &ExplicitFrontParams, spec: GridSpec) -> Result<Field> {
    let cols = explicit_front_grid(params, &spec.xs(), &spec.ys())?;
    let mut f = Field::constant(spec, 0.0);
    for (i, col) in cols.iter().enumerate() {
        for (j, &v) in col.iter().enumerate() {
            f.values[[i, j]] = v;
        }
    }
    Ok(f)
}

/// `∂_y u^{t,c}(x, y) = -(c/2) P^t(cx/2, cy/2)`.
pub fn explicit_front_dy(params: &ExplicitFrontParams, x: f64, y: f64) -> Result<f64> {
    params.check()?;
    let k = 0.5 * params.c;
    Ok(-k * poisson_kernel(params.t, k * x, k * y)?)
}

/// `f^t` at the boundary point `(0, y)` of the `t`-front: `-u^t_x(0, y)`.
fn flux_t(t: f64, y: f64) -> f64 {
    let rho = t.hypot(y);
    let (k0, k1) = k01_scaled(rho);
    exponent(t, y, rho).exp() * (k0 - y / rho * k1) / PI
}

/// `(f^t)'` at `u^t(0, y)`: `(t/ρ) h^t(y)`.
fn flux_slope_t(t: f64, y: f64) -> f64 {
    let rho = t.hypot(y);
    let (k0, k1) = k01_scaled(rho);
    let k2 = k0 + 2.0 / rho * k1;
    let h = -rho / (t * t) + 1.0 / rho + (k0 + k2) / (2.0 * k1);
    t / rho * h
}

/// `h^t(y) = -ρ/t² + 1/ρ + (K_0 + K_2)/(2 K_1)(ρ)` with `ρ = sqrt(t² + y²)`.
pub fn slope_factor(t: f64, y: f64) -> Result<f64> {
    check_point(t, 0.0, y)?;
    Ok(flux_slope_t(t, y) * t.hypot(y) / t)
}

/// `-∂_x u^{t,c}(0, y)`, the boundary flux in closed form.
pub fn boundary_flux(params: &ExplicitFrontParams, y: f64) -> Result<f64> {
    params.check()?;
    let k = 0.5 * params.c;
    Ok(k * flux_t(params.t, k * y))
}

/// The `y` with `u^{t,c}(0, y) = s`, by bisection in `asinh(y/t)`.
pub fn invert_trace(params: &ExplicitFrontParams, s: f64) -> Result<f64> {
    params.check()?;
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!("trace level must lie in (0, 1), got {s}")));
    }
    let t = params.t;
    let u_at = |xi: f64| front_t(t, 0.0, t * xi.sinh());
    let mut lo = -4.0;
    let mut hi = 4.0;
    while u_at(lo)? <= s {
        lo *= 2.0;
        if lo < -400.0 {
            return Err(Error::Domain(format!("trace level {s} too close to 1 to invert")));
        }
    }
    while u_at(hi)? >= s {
        hi *= 2.0;
        if hi > 400.0 {
            return Err(Error::Domain(format!("trace level {s} too close to 0 to invert")));
        }
    }
    while hi - lo > 1e-14 * (1.0 + lo.abs().max(hi.abs())) {
        let mid = 0.5 * (lo + hi);
        if u_at(mid)? > s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(t * (0.5 * (lo + hi)).sinh() / (0.5 * params.c))
}

/// `f^{t,c}(s)`, obtained by inverting the boundary trace.
pub fn explicit_nonlinearity(params: &ExplicitFrontParams, s: f64) -> Result<f64> {
    params.check()?;
    if s == 0.0 || s == 1.0 {
        return Ok(0.0);
    }
    let y = invert_trace(params, s)?;
    let k = 0.5 * params.c;
    Ok(k * flux_t(params.t, k * y))
}

/// `(f^{t,c})'(s)`; the endpoints return the limit `-c/(2t)`.
pub fn explicit_nonlinearity_deriv(params: &ExplicitFrontParams, s: f64) -> Result<f64> {
    params.check()?;
    if s == 0.0 || s == 1.0 {
        return Ok(-params.c / (2.0 * params.t));
    }
    let y = invert_trace(params, s)?;
    let k = 0.5 * params.c;
    Ok(k * flux_slope_t(params.t, k * y))
}

/// `t / sqrt(π c)`, the coefficient in `-u_y(0, y) ~ C e^{-cy} y^{-3/2}` as
/// `y → +∞` and `-u_y(0, y) ~ C (-y)^{-3/2}` as `y → -∞`.
pub fn asymptotic_constant(params: &ExplicitFrontParams, _side: Side) -> f64 {
    params.t / (PI * params.c).sqrt()
}

/// `f^{t,c}` as a [`Nonlinearity`]: a cubic Hermite table in `s` built on
/// `y = t sinh(ξ)` nodes of the boundary trace, using the closed forms for
/// the values and slopes and the exact piecewise-cubic antiderivative.
pub fn tabulated_nonlinearity(params: &ExplicitFrontParams, nodes: usize) -> Result<Nonlinearity> {
    params.check()?;
    let nodes = nodes.max(200);
    let t = params.t;
    let k = 0.5 * params.c;
    let endpoint_slope = -params.c / (2.0 * t);
    let xi_lo = (-1e7 / t).asinh();
    let xi_hi = ((30.0 + t) / t).asinh();
    // ordinates of the t-front; the c-scaling only multiplies f by c/2
    let ys: Vec<f64> = (0..nodes)
        .map(|i| t * (xi_lo + (xi_hi - xi_lo) * i as f64 / (nodes - 1) as f64).sinh())
        .collect();
    let unit = ExplicitFrontParams { t, c: 2.0 };
    let us = explicit_front_column(&unit, 0.0, &ys)?;

    let mut s = vec![0.0];
    let mut v = vec![0.0];
    let mut d = vec![endpoint_slope];
    for (&y, &u) in ys.iter().zip(&us).rev() {
        if !(u > *s.last().unwrap() && u < 1.0) {
            continue;
        }
        s.push(u);
        v.push(k * flux_t(t, y));
        d.push(k * flux_slope_t(t, y));
    }
    s.push(1.0);
    v.push(0.0);
    d.push(endpoint_slope);
    let table = HermiteTable::new(s, v, d)?;

    let knots = table.knots();
    let vals = table.values();
    let slopes = table.slopes();
    let zero_cell = (1..knots.len() - 2)
        .find(|&i| vals[i] < 0.0 && vals[i + 1] >= 0.0)
        .ok_or_else(|| Error::InconsistentNonlinearity("tabulated explicit law has no interior zero".into()))?;
    let (mut a, mut b) = (knots[zero_cell], knots[zero_cell + 1]);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if table.eval(m) < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    let alpha = 0.5 * (a + b);
    let first_rise = slopes.iter().position(|&g| g > 0.0).unwrap_or(0);
    let last_rise = slopes.iter().rposition(|&g| g > 0.0).unwrap_or(knots.len() - 1);
    let gamma1 = knots[first_rise.saturating_sub(1)];
    let gamma2 = knots[(last_rise + 1).min(knots.len() - 1)];
    let delta = 0.9 * gamma1.min(1.0 - gamma2).min(0.49);

    let tf = table.clone();
    let tp = table.clone();
    let ta = table;
    let f: ScalarFn = std::sync::Arc::new(move |x: f64| tf.eval(x));
    let fp: ScalarFn = std::sync::Arc::new(move |x: f64| tp.deriv(x));
    let anti: ScalarFn = std::sync::Arc::new(move |x: f64| ta.integral(x));
    let mut nl = Nonlinearity::custom(f, fp, delta, Some(alpha), None)
        .with_antiderivative(anti)
        .with_kind(NonlinearityKind::Bistable)
        .with_extension_slopes(endpoint_slope, endpoint_slope)
        .with_descriptor(NonlinearityDescriptor::Explicit { t, c: params.c });
    let beta = crate::nonlinearity::ignition_point(&nl)?;
    nl = nl.with_beta(beta);
    Ok(nl)
}

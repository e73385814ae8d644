//! Truncated half-plane grids with the weight `e^{ay}` and the discrete
//! functionals on them.
//!
//! Nodes are `(x_i, y_j) = (i hx, y_min + j hy)`. The weighted Dirichlet
//! integral is assembled edge by edge:
//!
//! ```text
//! Γ = Σ_{x-edges} ω^y_j hy e^{a y_j} (Δ_x w)² / hx
//!   + Σ_{y-edges} ω^x_i hx ē_{j+1/2} (Δ_y w)² / hy
//! ```
//!
//! with trapezoid weights `ω` (1/2 on the outer nodes) and `ē` the mean of
//! the two nodal weights. The boundary term is `Σ_j ω^y_j hy e^{a y_j} G(w_{0,j})`.

use ndarray::{Array1, Array2, Axis};
use ndarray::parallel::prelude::*;

use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;

/// Largest admissible `a · y_max`.
pub const WEIGHT_EXPONENT_CAP: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
    pub a: f64,
}

impl GridSpec {
    pub fn new(x_max: f64, y_min: f64, y_max: f64, nx: usize, ny: usize, a: f64) -> Result<Self> {
        let spec = GridSpec { x_max, y_min, y_max, nx, ny, a };
        spec.check()?;
        Ok(spec)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.x_max > 0.0 && self.x_max.is_finite()) {
            return Err(Error::Grid(format!("x_max must be positive, got {}", self.x_max)));
        }
        if !(self.y_min < 0.0 && self.y_max > 0.0 && self.y_min.is_finite() && self.y_max.is_finite()) {
            return Err(Error::Grid(format!("need y_min < 0 < y_max, got [{}, {}]", self.y_min, self.y_max)));
        }
        if self.nx < 16 || self.ny < 64 {
            return Err(Error::Grid(format!("need nx >= 16 and ny >= 64, got {} x {}", self.nx, self.ny)));
        }
        if !(self.a >= 0.0 && self.a.is_finite()) {
            return Err(Error::Grid(format!("weight exponent must be nonnegative, got {}", self.a)));
        }
        if self.a * self.y_max > WEIGHT_EXPONENT_CAP {
            return Err(Error::Grid(format!(
                "a * y_max = {} exceeds the overflow guard {WEIGHT_EXPONENT_CAP}",
                self.a * self.y_max
            )));
        }
        Ok(())
    }

    /// Box `[0, 8/a] x [-40/a, 12/a]` with spacing close to `1/(16 a)`.
    pub fn for_weight(a: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::Grid(format!("weight exponent must be positive, got {a}")));
        }
        GridSpec::new(8.0 / a, -40.0 / a, 12.0 / a, 128, 832, a)
    }

    /// Same box with both spacings halved.
    pub fn refined(&self) -> Self {
        GridSpec { nx: 2 * self.nx, ny: 2 * self.ny, ..*self }
    }

    pub fn hx(&self) -> f64 {
        self.x_max / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        (self.y_max - self.y_min) / self.ny as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.hx()
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y_min + j as f64 * self.hy()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..=self.nx).map(|i| self.x(i)).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        (0..=self.ny).map(|j| self.y(j)).collect()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx + 1, self.ny + 1)
    }

    /// Nodal weights `e^{a y_j}`.
    pub fn weights(&self) -> Vec<f64> {
        (0..=self.ny).map(|j| (self.a * self.y(j)).exp()).collect()
    }

    /// Trapezoid measure of boundary node `j`: `ω_j hy e^{a y_j}`.
    pub fn boundary_measures(&self) -> Vec<f64> {
        let hy = self.hy();
        self.weights()
            .iter()
            .enumerate()
            .map(|(j, w)| trapezoid(j, self.ny) * hy * w)
            .collect()
    }

    /// Largest shift accepted by [`translate`].
    pub fn max_shift(&self) -> f64 {
        0.25 * (self.y_max - self.y_min)
    }
}

fn trapezoid(k: usize, n: usize) -> f64 {
    if k == 0 || k == n {
        0.5
    } else {
        1.0
    }
}

/// Sum with a fixed pairwise reduction tree.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

/// Nodal values on a [`GridSpec`], indexed `[i, j]` with `i` along `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub spec: GridSpec,
    pub values: Array2<f64>,
}

impl Field {
    pub fn new(spec: GridSpec, values: Array2<f64>) -> Result<Self> {
        if values.dim() != spec.shape() {
            return Err(Error::Grid(format!("field shape {:?} does not match grid {:?}", values.dim(), spec.shape())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Grid("field has non-finite entries".into()));
        }
        Ok(Field { spec, values })
    }

    pub fn constant(spec: GridSpec, value: f64) -> Self {
        Field { spec, values: Array2::from_elem(spec.shape(), value) }
    }

    pub fn from_fn<F: Fn(f64, f64) -> f64>(spec: GridSpec, f: F) -> Self {
        let values = Array2::from_shape_fn(spec.shape(), |(i, j)| f(spec.x(i), spec.y(j)));
        Field { spec, values }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[[i, j]]
    }

    /// Bilinear interpolation with constant extension outside the box.
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        let s = &self.spec;
        let fx = ((x / s.hx()).clamp(0.0, s.nx as f64)).min(s.nx as f64);
        let fy = (((y - s.y_min) / s.hy()).clamp(0.0, s.ny as f64)).min(s.ny as f64);
        let i = (fx.floor() as usize).min(s.nx - 1);
        let j = (fy.floor() as usize).min(s.ny - 1);
        let tx = fx - i as f64;
        let ty = fy - j as f64;
        let v = &self.values;
        (1.0 - tx) * ((1.0 - ty) * v[[i, j]] + ty * v[[i, j + 1]]) + tx * ((1.0 - ty) * v[[i + 1, j]] + ty * v[[i + 1, j + 1]])
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// The restriction of a field to `x = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceProfile {
    pub y_nodes: Vec<f64>,
    pub values: Vec<f64>,
}

impl TraceProfile {
    pub fn new(y_nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if y_nodes.len() != values.len() || y_nodes.len() < 2 {
            return Err(Error::Grid("trace needs matching node and value arrays of length >= 2".into()));
        }
        if y_nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Grid("trace nodes must be strictly increasing".into()));
        }
        Ok(TraceProfile { y_nodes, values })
    }

    pub fn len(&self) -> usize {
        self.y_nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y_nodes.is_empty()
    }

    /// Linear interpolation, constant beyond the end nodes.
    pub fn eval(&self, y: f64) -> f64 {
        let n = self.y_nodes.len();
        if y <= self.y_nodes[0] {
            return self.values[0];
        }
        if y >= self.y_nodes[n - 1] {
            return self.values[n - 1];
        }
        let k = self.y_nodes.partition_point(|&v| v <= y).clamp(1, n - 1) - 1;
        let t = (y - self.y_nodes[k]) / (self.y_nodes[k + 1] - self.y_nodes[k]);
        (1.0 - t) * self.values[k] + t * self.values[k + 1]
    }

    /// First `y` where the profile falls through `level`, by linear interpolation.
    pub fn level_crossing(&self, level: f64) -> Option<f64> {
        for k in 0..self.values.len() - 1 {
            let (v0, v1) = (self.values[k], self.values[k + 1]);
            if v0 >= level && v1 < level {
                let t = (v0 - level) / (v0 - v1);
                return Some(self.y_nodes[k] + t * (self.y_nodes[k + 1] - self.y_nodes[k]));
            }
        }
        None
    }

    /// Number of consecutive pairs with `v[k+1] > v[k] + tol`.
    pub fn monotonicity_violations(&self, tol: f64) -> usize {
        self.values.windows(2).filter(|w| w[1] > w[0] + tol).count()
    }
}

pub fn trace(w: &Field) -> TraceProfile {
    TraceProfile { y_nodes: w.spec.ys(), values: w.values.row(0).to_vec() }
}

/// Discrete `Γ_a(w)`.
pub fn dirichlet(w: &Field) -> f64 {
    let s = &w.spec;
    let (hx, hy) = (s.hx(), s.hy());
    let wt = s.weights();
    let ebar: Vec<f64> = wt.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect();
    let v = &w.values;
    let columns: Vec<f64> = (0..=s.nx)
        .into_par_iter()
        .map(|i| {
            let mut terms = Vec::with_capacity(2 * s.ny + 1);
            if i < s.nx {
                for j in 0..=s.ny {
                    let d = v[[i + 1, j]] - v[[i, j]];
                    terms.push(trapezoid(j, s.ny) * hy * wt[j] * d * d / hx);
                }
            }
            let wx = trapezoid(i, s.nx) * hx / hy;
            for j in 0..s.ny {
                let d = v[[i, j + 1]] - v[[i, j]];
                terms.push(wx * ebar[j] * d * d);
            }
            pairwise_sum(&terms)
        })
        .collect();
    pairwise_sum(&columns)
}

/// `Σ_j ω_j hy e^{a y_j} G(w(0, y_j))`.
pub fn boundary_potential(w: &Field, nl: &Nonlinearity) -> f64 {
    let m = w.spec.boundary_measures();
    let terms: Vec<f64> = m.iter().enumerate().map(|(j, mj)| mj * nl.potential(w.values[[0, j]])).collect();
    pairwise_sum(&terms)
}

/// Discrete `E_a(w) = Γ_a(w)/2 + Σ_j ω_j hy e^{a y_j} G(w_{0,j})`.
pub fn energy(w: &Field, nl: &Nonlinearity) -> f64 {
    0.5 * dirichlet(w) + boundary_potential(w, nl)
}

/// `(A w)` where `Γ_a(w) = wᵀ A w`.
pub fn apply_dirichlet_operator(w: &Field) -> Array2<f64> {
    let s = &w.spec;
    let (hx, hy) = (s.hx(), s.hy());
    let wt = s.weights();
    let ebar: Vec<f64> = wt.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect();
    let v = &w.values;
    let (nx, ny) = (s.nx, s.ny);
    let mut out = Array2::zeros(s.shape());
    out.axis_iter_mut(Axis(0)).into_par_iter().enumerate().for_each(|(i, mut row)| {
        let mx = trapezoid(i, nx) * hx;
        for j in 0..=ny {
            let dy = trapezoid(j, ny) * hy * wt[j] / hx;
            let mut kx = 0.0;
            if i > 0 {
                kx += v[[i, j]] - v[[i - 1, j]];
            }
            if i < nx {
                kx += v[[i, j]] - v[[i + 1, j]];
            }
            let mut ky = 0.0;
            if j > 0 {
                ky += ebar[j - 1] * (v[[i, j]] - v[[i, j - 1]]);
            }
            if j < ny {
                ky += ebar[j] * (v[[i, j]] - v[[i, j + 1]]);
            }
            row[j] = dy * kx + mx * ky / hy;
        }
    });
    out
}

/// Gradient of the discrete energy with respect to the nodal values.
pub fn energy_gradient(w: &Field, nl: &Nonlinearity) -> Array2<f64> {
    let mut g = apply_dirichlet_operator(w);
    let m = w.spec.boundary_measures();
    for j in 0..=w.spec.ny {
        g[[0, j]] -= m[j] * nl.f(w.values[[0, j]]);
    }
    g
}

/// `w^t(x, y) = w(x, y + t)` with linear interpolation and constant
/// extension of the first and last rows.
pub fn translate(w: &Field, t: f64) -> Result<Field> {
    let s = w.spec;
    if !t.is_finite() || t.abs() > s.max_shift() {
        return Err(Error::Translation { shift: t, bound: s.max_shift() });
    }
    if t == 0.0 {
        return Ok(w.clone());
    }
    let hy = s.hy();
    let shift = t / hy;
    let ny = s.ny;
    let mut out = Array2::zeros(s.shape());
    for j in 0..=ny {
        let pos = j as f64 + shift;
        let (k, frac) = if pos <= 0.0 {
            (0, 0.0)
        } else if pos >= ny as f64 {
            (ny - 1, 1.0)
        } else {
            let k = (pos.floor() as usize).min(ny - 1);
            (k, pos - k as f64)
        };
        for i in 0..=s.nx {
            out[[i, j]] = (1.0 - frac) * w.values[[i, k]] + frac * w.values[[i, k + 1]];
        }
    }
    Ok(Field { spec: s, values: out })
}

const PROJECTION_TOL: f64 = 1e-13;

/// Translates `w` so that `Γ_a = 1`; returns the field and the shift.
pub fn project_constraint(w: &Field) -> Result<(Field, f64)> {
    let g0 = dirichlet(w);
    if !(g0 > 0.0) || !g0.is_finite() {
        return Err(Error::Projection(format!("Dirichlet energy is {g0}")));
    }
    let a = w.spec.a;
    if !(a > 0.0) {
        return Err(Error::Projection("translation cannot change Γ when a = 0".into()));
    }
    if (g0 - 1.0).abs() <= PROJECTION_TOL {
        return Ok((w.clone(), 0.0));
    }
    let bound = w.spec.max_shift();
    let mut t = g0.ln() / a;
    for _ in 0..30 {
        if t.abs() > bound {
            break;
        }
        let shifted = translate(w, t)?;
        let g = dirichlet(&shifted);
        if (g - 1.0).abs() <= PROJECTION_TOL {
            return Ok((shifted, t));
        }
        if !(g > 0.0) {
            break;
        }
        t += g.ln() / a;
    }
    // Γ(translate(w, t)) is nonincreasing in t for fronts; bisect on it
    let gamma_at = |t: f64| -> Result<f64> { Ok(dirichlet(&translate(w, t)?) - 1.0) };
    let (mut lo, mut hi) = (-bound, bound);
    let (glo, ghi) = (gamma_at(lo)?, gamma_at(hi)?);
    if !(glo > 0.0 && ghi < 0.0) {
        return Err(Error::Projection(format!(
            "Γ - 1 does not change sign over shifts in [{lo}, {hi}] ({glo:e}, {ghi:e})"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let g = gamma_at(mid)?;
        if g.abs() <= PROJECTION_TOL {
            return Ok((translate(w, mid)?, mid));
        }
        if g > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Projection("bisection on the shift did not reach tolerance".into()))
}

/// Nonincreasing-in-`y` rearrangement of each column with respect to the
/// nodal measures `ω_j hy e^{a y_j}`. Each node takes the value of the sorted
/// distribution at the midpoint of its own cumulative-measure cell, so
/// monotone columns are fixed points. The flag reports whether any value had
/// to be clamped into `[0, 1]`.
pub fn rearrange_monotone(w: &Field) -> (Field, bool) {
    let s = w.spec;
    let m = s.boundary_measures();
    let mut cum = Vec::with_capacity(m.len() + 1);
    cum.push(0.0);
    for mj in &m {
        cum.push(cum.last().unwrap() + mj);
    }
    let mids: Vec<f64> = (0..m.len()).map(|j| 0.5 * (cum[j] + cum[j + 1])).collect();
    let mut out = Array2::zeros(s.shape());
    let clamped = std::sync::atomic::AtomicBool::new(false);
    out.axis_iter_mut(Axis(0)).into_par_iter().enumerate().for_each(|(i, mut row)| {
        let col = w.values.row(i);
        let mut order: Vec<usize> = (0..col.len()).collect();
        let clamp = |v: f64| {
            if !(0.0..=1.0).contains(&v) {
                clamped.store(true, std::sync::atomic::Ordering::Relaxed);
            }
            v.clamp(0.0, 1.0)
        };
        let vals: Vec<f64> = col.iter().map(|&v| clamp(v)).collect();
        // stable sort keeps equal values in their original order
        order.sort_by(|&p, &q| vals[q].partial_cmp(&vals[p]).unwrap());
        let mut acc = 0.0;
        let mut k = 0;
        for (j, &mid) in mids.iter().enumerate() {
            while k + 1 < order.len() && acc + m[order[k]] < mid {
                acc += m[order[k]];
                k += 1;
            }
            row[j] = vals[order[k]];
        }
    });
    (Field { spec: s, values: out }, clamped.into_inner())
}

/// `u_0(x, y) = e^{-dx} h(y)` with `h = 1` for `y <= 0` and `e^{-amy}` above.
pub fn seed_function(spec: GridSpec, a: f64, d: f64, m: f64) -> Result<Field> {
    if !(a > 0.0 && d > 0.0 && m >= 1.0) {
        return Err(Error::Domain(format!("seed needs a, d > 0 and m >= 1, got a={a}, d={d}, m={m}")));
    }
    Ok(Field::from_fn(spec, |x, y| {
        let h = if y <= 0.0 { 1.0 } else { (-a * m * y).exp() };
        (-d * x).exp() * h
    }))
}

/// Bilinear resampling of `w` at `(sx x, sy y)` on the nodes of `target`.
pub fn resample(w: &Field, target: GridSpec, sx: f64, sy: f64) -> Field {
    Field::from_fn(target, |x, y| w.sample(sx * x, sy * y))
}

/// `∫ e^{ay} w² dx dy` by the nodal trapezoid rule.
pub fn weighted_l2(w: &Field) -> f64 {
    let s = &w.spec;
    let m = s.boundary_measures();
    let hx = s.hx();
    let cols: Vec<f64> = (0..=s.nx)
        .map(|i| {
            let terms: Vec<f64> = (0..=s.ny).map(|j| m[j] * w.values[[i, j]].powi(2)).collect();
            trapezoid(i, s.nx) * hx * pairwise_sum(&terms)
        })
        .collect();
    pairwise_sum(&cols)
}

/// `∫ e^{ay} w(0, y)² dy`.
pub fn weighted_trace_l2(w: &Field) -> f64 {
    let m = w.spec.boundary_measures();
    let terms: Vec<f64> = m.iter().enumerate().map(|(j, mj)| mj * w.values[[0, j]].powi(2)).collect();
    pairwise_sum(&terms)
}

/// Values of column `i` as an owned vector.
pub fn column(w: &Field, i: usize) -> Array1<f64> {
    w.values.row(i).to_owned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::make_bistable_cubic;

    fn spec() -> GridSpec {
        GridSpec::new(4.0, -8.0, 6.0, 32, 112, 0.5).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(GridSpec::new(1.0, -1.0, 1.0, 8, 64, 1.0).is_err());
        assert!(GridSpec::new(1.0, 1.0, 2.0, 16, 64, 1.0).is_err());
        assert!(GridSpec::new(1.0, -1.0, 60.0, 16, 64, 1.0).is_err());
        let s = GridSpec::for_weight(0.25).unwrap();
        assert!((s.hx() - 0.25).abs() < 1e-15);
        assert!((s.hy() - 0.25).abs() < 1e-15);
        assert_eq!(s.refined().nx, 256);
    }

    #[test]
    fn zero_and_constant_fields() {
        let nl = make_bistable_cubic(0.25).unwrap();
        assert_eq!(energy(&Field::constant(spec(), 0.0), &nl), 0.0);
        assert_eq!(dirichlet(&Field::constant(spec(), 0.7)), 0.0);
        let tr = trace(&Field::constant(spec(), 0.3));
        assert!(tr.values.iter().all(|&v| v == 0.3));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let nl = make_bistable_cubic(0.25).unwrap();
        let s = spec();
        let w = Field::from_fn(s, |x, y| 0.5 * (1.0 - (y + 0.3 * x).tanh()) * (-0.1 * x).exp());
        let g = energy_gradient(&w, &nl);
        for &(i, j) in &[(0, 50), (0, 0), (3, 17), (32, 111), (10, 112)] {
            let h = 1e-6;
            let mut p = w.clone();
            p.values[[i, j]] += h;
            let mut q = w.clone();
            q.values[[i, j]] -= h;
            let fd = (energy(&p, &nl) - energy(&q, &nl)) / (2.0 * h);
            assert!((fd - g[[i, j]]).abs() < 1e-7 * (1.0 + g[[i, j]].abs()), "({i},{j}): {fd} vs {}", g[[i, j]]);
        }
        let gamma = dirichlet(&w);
        let aw = apply_dirichlet_operator(&w);
        let quad: f64 = w.values.iter().zip(aw.iter()).map(|(u, v)| u * v).sum();
        assert!((quad - gamma).abs() < 1e-12 * gamma);
    }

    #[test]
    fn translation_identities() {
        let s = spec();
        let w = Field::from_fn(s, |x, y| 0.5 * (1.0 - (y + 0.2 * x).tanh()));
        assert_eq!(translate(&w, 0.0).unwrap(), w);
        let back = translate(&translate(&w, 0.37).unwrap(), -0.37).unwrap();
        for i in 0..=s.nx {
            for j in 10..s.ny - 10 {
                assert!((back.values[[i, j]] - w.values[[i, j]]).abs() < 0.2 * s.hy() * s.hy());
            }
        }
        assert!(matches!(translate(&w, 100.0), Err(Error::Translation { .. })));
    }

    #[test]
    fn projection_reaches_unit_constraint() {
        let s = spec();
        let w = Field::from_fn(s, |x, y| 0.5 * (1.0 - (y + 0.2 * x).tanh()) * 1.3);
        let (p, t) = project_constraint(&w).unwrap();
        assert!((dirichlet(&p) - 1.0).abs() <= 1e-8);
        assert!(t != 0.0);
        let (again, t2) = project_constraint(&p).unwrap();
        assert_eq!(t2, 0.0);
        assert_eq!(again, p);
        assert!(project_constraint(&Field::constant(s, 0.5)).is_err());
    }

    #[test]
    fn rearrangement_fixed_point_and_order() {
        let s = spec();
        let w = Field::from_fn(s, |x, y| 0.5 * (1.0 - (y - x).tanh()));
        let (r, clamped) = rearrange_monotone(&w);
        assert!(!clamped);
        assert_eq!(r, w);
        let bumpy = Field::from_fn(s, |x, y| (0.5 + 0.4 * (y + x).sin()).clamp(0.0, 1.0));
        let (r, _) = rearrange_monotone(&bumpy);
        for i in 0..=s.nx {
            for j in 0..s.ny {
                assert!(r.values[[i, j + 1]] <= r.values[[i, j]]);
            }
        }
        let (_, flagged) = rearrange_monotone(&Field::constant(s, 1.5));
        assert!(flagged);
    }

    #[test]
    fn seed_values() {
        let s = GridSpec::new(10.0, -10.0, 10.0, 20, 80, 0.01).unwrap();
        let u = seed_function(s, 0.01, 0.02, 4.0).unwrap();
        assert_eq!(u.sample(0.0, -5.0), 1.0);
        for i in 0..=s.nx {
            let j = 40;
            assert_eq!(s.y(j), 0.0);
            assert!((u.values[[i, j]] - (-0.02 * s.x(i)).exp()).abs() < 1e-15);
        }
        assert_eq!(trace(&u).eval(0.0), 1.0);
        assert!(seed_function(s, 0.0, 0.1, 4.0).is_err());
    }

    #[test]
    fn trace_profile_helpers() {
        let tr = TraceProfile::new(vec![0.0, 1.0, 2.0, 3.0], vec![1.0, 0.8, 0.4, 0.0]).unwrap();
        assert!((tr.level_crossing(0.5).unwrap() - 1.75).abs() < 1e-15);
        assert_eq!(tr.eval(-1.0), 1.0);
        assert!((tr.eval(2.5) - 0.2).abs() < 1e-15);
        assert_eq!(tr.monotonicity_violations(0.0), 0);
        assert!(TraceProfile::new(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
    }
}

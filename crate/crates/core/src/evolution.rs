//! Time integration of `v_t = Δv` in the half-plane with `-v_x = f(v)` on
//! `x = 0`, and measurement of the invasion speed.
//!
//! Lumped-mass finite element diffusion (second order in space) integrated
//! by the second-order backward difference, with the reaction extrapolated
//! explicitly on the half cells of the boundary column. The rows `y_min` and
//! `y_max` carry the far-field states `1` and `0`; `x_max` is Neumann. The
//! window follows the front by grid-aligned shifts.

use ndarray::{s, Array2};

use crate::error::{Error, Result};
use crate::grid::{trace, Field, GridSpec};
use crate::nonlinearity::Nonlinearity;
use crate::poisson::{SymTridiag, TensorSolver};

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionState {
    pub field: Field,
    pub time: f64,
    /// Accumulated window shift: grid coordinate `y` is absolute `y + offset`.
    pub offset: f64,
}

impl EvolutionState {
    pub fn new(field: Field) -> Self {
        EvolutionState { field, time: 0.0, offset: 0.0 }
    }

    /// Absolute position where the boundary trace crosses `1/2`.
    pub fn level_position(&self) -> Option<f64> {
        trace(&self.field).level_crossing(0.5).map(|y| y + self.offset)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpeedTrace {
    pub times: Vec<f64>,
    pub level_positions: Vec<f64>,
}

impl SpeedTrace {
    pub fn push(&mut self, time: f64, level: f64) {
        self.times.push(time);
        self.level_positions.push(level);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    /// Time step; `None` picks half the stability bound.
    pub dt: Option<f64>,
    /// Time between recorded level positions.
    pub output_interval: f64,
    /// Recenter once the level passes this fraction of the window, measured
    /// from `y_max`.
    pub recenter_fraction: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions { dt: None, output_interval: 0.1, recenter_fraction: 0.2 }
    }
}

/// Largest `dt` for which the explicit boundary reaction stays stable:
/// `hx / max |f'|` over `[0, 1]`.
pub fn stability_bound(spec: &GridSpec, nl: &Nonlinearity) -> f64 {
    let lip = (0..=1000).map(|k| nl.f_prime(k as f64 / 1000.0).abs()).fold(0.0, f64::max);
    if lip > 0.0 {
        spec.hx() / lip
    } else {
        f64::INFINITY
    }
}

/// Prefactored implicit diffusion for a fixed grid and `dt`: backward Euler
/// and the second-order backward difference with extrapolated reaction.
pub struct Stepper {
    spec: GridSpec,
    dt: f64,
    euler: TensorSolver,
    bdf2: TensorSolver,
}

impl Stepper {
    pub fn new(spec: GridSpec, dt: f64) -> Result<Self> {
        spec.check()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Domain(format!("time step must be positive, got {dt}")));
        }
        let m = spec.ny - 1;
        let hy = spec.hy();
        let p = SymTridiag::diagonal(vec![dt * hy; m]);
        let solver = |gamma: f64| -> Result<TensorSolver> {
            let q = SymTridiag::new(vec![gamma * hy + 2.0 * dt / hy; m], vec![-dt / hy; m - 1])?;
            TensorSolver::new(spec.nx, spec.hx(), &p, &q)
        };
        Ok(Stepper { spec, dt, euler: solver(1.0)?, bdf2: solver(1.5)? })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Backward Euler step.
    pub fn step(&self, state: &EvolutionState, nl: &Nonlinearity) -> Result<EvolutionState> {
        self.advance(state, None, nl)
    }

    /// Second-order step from `state` and the state one `dt` earlier.
    pub fn step_bdf2(&self, state: &EvolutionState, previous: &EvolutionState, nl: &Nonlinearity) -> Result<EvolutionState> {
        self.advance(state, Some(previous), nl)
    }

    fn advance(&self, state: &EvolutionState, previous: Option<&EvolutionState>, nl: &Nonlinearity) -> Result<EvolutionState> {
        let spec = self.spec;
        if state.field.spec != spec || previous.is_some_and(|p| p.field.spec != spec) {
            return Err(Error::Grid("state grid differs from the stepper grid".into()));
        }
        let (nx, ny) = (spec.nx, spec.ny);
        let (hx, hy, dt) = (spec.hx(), spec.hy(), self.dt);
        let v = &state.field.values;
        let old = previous.map(|p| &p.field.values);
        // mass history and reaction extrapolation weights
        let (cur, prev) = if old.is_some() { (2.0, -0.5) } else { (1.0, 0.0) };
        let (fcur, fprev) = if old.is_some() { (2.0, -1.0) } else { (1.0, 0.0) };
        let mut rhs = Array2::zeros((nx + 1, ny - 1));
        for i in 0..=nx {
            let mx = if i == 0 || i == nx { 0.5 * hx } else { hx };
            for j in 1..ny {
                let hist = cur * v[[i, j]] + old.map_or(0.0, |o| prev * o[[i, j]]);
                rhs[[i, j - 1]] = mx * hy * hist;
            }
            rhs[[i, 0]] += mx * dt / hy * v[[i, 0]];
            rhs[[i, ny - 2]] += mx * dt / hy * v[[i, ny]];
        }
        for j in 1..ny {
            let react = fcur * nl.f(v[[0, j]]) + old.map_or(0.0, |o| fprev * nl.f(o[[0, j]]));
            rhs[[0, j - 1]] += dt * hy * react;
        }
        let solver = if old.is_some() { &self.bdf2 } else { &self.euler };
        let sol = solver.solve(rhs.view());
        if sol.iter().any(|x| !x.is_finite()) {
            return Err(Error::LinearSolve { iterations: 1 });
        }
        let mut values = v.clone();
        values.slice_mut(s![.., 1..ny]).assign(&sol);
        Ok(EvolutionState {
            field: Field { spec, values },
            time: state.time + dt,
            offset: state.offset,
        })
    }
}

/// One time step; refuses `dt` above [`stability_bound`].
pub fn step(state: &EvolutionState, dt: f64, nl: &Nonlinearity) -> Result<EvolutionState> {
    let bound = stability_bound(&state.field.spec, nl);
    if dt > bound {
        return Err(Error::Domain(format!("dt = {dt} exceeds the stability bound {bound}")));
    }
    Stepper::new(state.field.spec, dt)?.step(state, nl)
}

/// Shifts the field `k` cells towards `y_min`, extending by the value at `y_max`.
pub fn recenter(state: &EvolutionState, k: usize) -> EvolutionState {
    let spec = state.field.spec;
    let ny = spec.ny;
    let v = &state.field.values;
    let values = Array2::from_shape_fn(v.dim(), |(i, j)| v[[i, (j + k).min(ny)]]);
    EvolutionState {
        field: Field { spec, values },
        time: state.time,
        offset: state.offset + k as f64 * spec.hy(),
    }
}

/// Integrates to time `t_end`, recording the `1/2`-level of the trace every
/// `output_interval`.
pub fn evolve(initial: Field, nl: &Nonlinearity, t_end: f64, opts: &EvolveOptions) -> Result<(EvolutionState, SpeedTrace)> {
    if !(t_end > 0.0) {
        return Err(Error::Domain(format!("final time must be positive, got {t_end}")));
    }
    if initial.min() < 0.0 || initial.max() > 1.0 {
        return Err(Error::Domain("initial data must lie in [0, 1]".into()));
    }
    let spec = initial.spec;
    let bound = stability_bound(&spec, nl);
    let dt = match opts.dt {
        Some(dt) if dt > bound => {
            return Err(Error::Domain(format!("dt = {dt} exceeds the stability bound {bound}")));
        }
        Some(dt) => dt,
        None => (0.5 * bound).min(opts.output_interval),
    };
    let per_output = (opts.output_interval / dt).ceil().max(1.0) as usize;
    let n_steps = (t_end / dt).ceil() as usize;
    let dt = t_end / n_steps as f64;
    let stepper = Stepper::new(spec, dt)?;
    let trigger = spec.y_max - opts.recenter_fraction * (spec.y_max - spec.y_min);
    let centre = 0.5 * (spec.y_min + spec.y_max);

    let mut state = EvolutionState::new(initial);
    state.field.values.column_mut(0).fill(1.0);
    state.field.values.column_mut(spec.ny).fill(0.0);
    let mut speed = SpeedTrace::default();
    if let Some(y) = state.level_position() {
        speed.push(0.0, y);
    }
    let mut previous: Option<EvolutionState> = None;
    for n in 1..=n_steps {
        let next = match &previous {
            Some(p) => stepper.step_bdf2(&state, p, nl)?,
            None => stepper.step(&state, nl)?,
        };
        let (mut prev, mut cur) = (state, next);
        if let Some(y) = trace(&cur.field).level_crossing(0.5) {
            if y > trigger {
                let k = ((y - centre) / spec.hy()).floor().max(1.0) as usize;
                cur = recenter(&cur, k);
                prev = recenter(&prev, k);
            }
        }
        previous = Some(prev);
        state = cur;
        if n % per_output == 0 || n == n_steps {
            if let Some(y) = state.level_position() {
                speed.push(state.time, y);
            }
        }
    }
    Ok((state, speed))
}

/// Least-squares slope of level position against time after dropping the
/// first `burn_in_fraction` of the samples. The level moves towards
/// `y = +∞` as `1` invades `0`, so the slope is the speed.
pub fn measure_speed(trace: &SpeedTrace, burn_in_fraction: f64) -> Result<f64> {
    if trace.times.len() != trace.level_positions.len() {
        return Err(Error::Analysis("speed trace arrays differ in length".into()));
    }
    if !(0.0..1.0).contains(&burn_in_fraction) {
        return Err(Error::Domain(format!("burn-in fraction must be in [0, 1), got {burn_in_fraction}")));
    }
    let skip = (burn_in_fraction * trace.len() as f64).floor() as usize;
    let t = &trace.times[skip..];
    let y = &trace.level_positions[skip..];
    if t.len() < 10 {
        return Err(Error::Analysis(format!("need at least 10 samples after burn-in, have {}", t.len())));
    }
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxy: f64 = t.iter().zip(y).map(|(a, b)| (a - tm) * (b - ym)).sum();
    let sxx: f64 = t.iter().map(|a| (a - tm) * (a - tm)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Analysis("speed trace times are all equal".into()));
    }
    Ok(sxy / sxx)
}

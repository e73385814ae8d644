//! Properties of the discrete functionals, shared by the property tests and
//! the acceptance suite.

#![allow(dead_code)]

use frontforge::grid::{
    boundary_potential, dirichlet, energy, rearrange_monotone, seed_function, translate, weighted_l2, weighted_trace_l2,
    Field, GridSpec,
};
use frontforge::nonlinearity::make_bistable_cubic;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRng, RngAlgorithm, TestRunner};

pub const CASES: u32 = 24;
const N_PER_UNIT: usize = 16;

pub fn box_spec(a: f64) -> GridSpec {
    GridSpec::new(6.0, -6.0, 6.0, 6 * N_PER_UNIT, 12 * N_PER_UNIT, a).unwrap()
}

/// `(1 - ρ²)²` inside the unit disc.
fn bump(x: f64, y: f64) -> f64 {
    let r2 = x * x + y * y;
    if r2 < 1.0 {
        (1.0 - r2).powi(2)
    } else {
        0.0
    }
}

#[derive(Debug, Clone)]
pub struct Bump {
    x0: f64,
    y0: f64,
    radius: f64,
    amplitude: f64,
}

pub fn bumps() -> impl Strategy<Value = Vec<Bump>> {
    prop::collection::vec(
        (0.0..2.5f64, -3.0..3.0f64, 0.6..1.8f64, -1.0..1.0f64)
            .prop_map(|(x0, y0, radius, amplitude)| Bump { x0, y0, radius, amplitude }),
        1..4,
    )
}

pub fn field_of(spec: GridSpec, bs: &[Bump]) -> Field {
    Field::from_fn(spec, |x, y| bs.iter().map(|b| b.amplitude * bump((x - b.x0) / b.radius, (y - b.y0) / b.radius)).sum())
}

/// Monotone step with bumps, clamped into `[0, 1]`.
pub fn profile_of(spec: GridSpec, tilt: f64, bs: &[Bump]) -> Field {
    let step = Field::from_fn(spec, |x, y| 0.5 * (1.0 - (y + tilt * x).tanh()));
    let extra = field_of(spec, bs);
    let mut w = step;
    w.values.zip_mut_with(&extra.values, |u, e| *u = (*u + 0.5 * e).clamp(0.0, 1.0));
    w
}

fn distribution(values: &[f64], measures: &[f64], level: f64) -> f64 {
    values.iter().zip(measures).filter(|(v, _)| **v > level).map(|(_, m)| m).sum()
}

pub fn check_trace(a: f64, bs: &[Bump]) -> Result<(), TestCaseError> {
    let w = field_of(box_spec(a), bs);
    let h = 1.0 / N_PER_UNIT as f64;
    let rhs = weighted_l2(&w) + dirichlet(&w);
    prop_assert!(weighted_trace_l2(&w) <= rhs * (1.0 + h), "{} > {}", weighted_trace_l2(&w), rhs);
    Ok(())
}

pub fn check_poincare(a: f64, bs: &[Bump]) -> Result<(), TestCaseError> {
    let w = field_of(box_spec(a), bs);
    let h = 1.0 / N_PER_UNIT as f64;
    let rhs = 4.0 / (a * a) * dirichlet(&w);
    prop_assert!(weighted_l2(&w) <= rhs * (1.0 + h), "{} > {}", weighted_l2(&w), rhs);
    Ok(())
}

pub fn check_scaling(a: f64, t: f64, alpha: f64, bs: &[Bump]) -> Result<(), TestCaseError> {
    let nl = make_bistable_cubic(alpha).unwrap();
    let spec = box_spec(a);
    let mut w = field_of(spec, bs);
    w.values.mapv_inplace(|v| v.abs().min(1.0));
    let shifted = translate(&w, t).unwrap();
    let scale = (-a * t).exp();
    let h = spec.hy();
    let size = dirichlet(&w) + boundary_potential(&w, &nl).abs();
    prop_assert!((dirichlet(&shifted) - scale * dirichlet(&w)).abs() <= h * scale * size);
    prop_assert!((energy(&shifted, &nl) - scale * energy(&w, &nl)).abs() <= h * scale * size);
    Ok(())
}

pub fn check_equimeasurable(a: f64, tilt: f64, bs: &[Bump], levels: &[f64]) -> Result<(), TestCaseError> {
    let spec = box_spec(a);
    let w = profile_of(spec, tilt, bs);
    let (r, clamped) = rearrange_monotone(&w);
    prop_assert!(!clamped);
    let m = spec.boundary_measures();
    let cell = m.iter().cloned().fold(0.0, f64::max);
    for i in 0..=spec.nx {
        let before = w.values.row(i).to_vec();
        let after = r.values.row(i).to_vec();
        prop_assert!(after.windows(2).all(|p| p[1] <= p[0]));
        for &level in levels {
            let d = (distribution(&before, &m, level) - distribution(&after, &m, level)).abs();
            prop_assert!(d <= cell * (1.0 + 1e-12), "column {i} level {level}: {d} > {cell}");
        }
    }
    Ok(())
}

pub fn check_rearranged_energy(a: f64, tilt: f64, alpha: f64, bs: &[Bump]) -> Result<(), TestCaseError> {
    let nl = make_bistable_cubic(alpha).unwrap();
    let spec = box_spec(a);
    let w = profile_of(spec, tilt, bs);
    let (r, _) = rearrange_monotone(&w);
    let size = dirichlet(&w) + boundary_potential(&w, &nl).abs();
    prop_assert!(energy(&r, &nl) <= energy(&w, &nl) + spec.hy() * size, "{} > {}", energy(&r, &nl), energy(&w, &nl));
    Ok(())
}

/// `E_a(u_0)` for the cubic law in closed form.
pub fn seed_energy_closed_form(a: f64, d: f64, m: f64, alpha: f64) -> f64 {
    let p = 1.0 / m;
    let kinetic = 0.25 * d * (1.0 + 1.0 / (2.0 * m - 1.0)) + a * a * m * m / (4.0 * d * (2.0 * m - 1.0));
    let reaction = -1.0 / (4.0 - p) + (1.0 + alpha) / (3.0 - p) - alpha / (2.0 - p);
    (kinetic - reaction) / a
}

pub fn check_seed_energy(a: f64, ratio: f64, m: f64, alpha: f64) -> Result<(), TestCaseError> {
    let d = ratio * a;
    let closed = seed_energy_closed_form(a, d, m, alpha);
    prop_assume!(closed < 0.0);
    let x_max = 14.0 / d;
    let (y_min, y_max) = (-25.0 / a, 16.0 / ((2.0 * m - 1.0) * a));
    let (hx, hy) = (1.0 / (10.0 * d), 1.0 / (10.0 * m * a));
    let spec = GridSpec::new(x_max, y_min, y_max, (x_max / hx).ceil() as usize, ((y_max - y_min) / hy).ceil() as usize, a).unwrap();
    let e = energy(&seed_function(spec, a, d, m).unwrap(), &make_bistable_cubic(alpha).unwrap());
    prop_assert!(e < 0.0);
    prop_assert!((e / closed - 1.0).abs() < 0.05, "{e} vs {closed}");
    Ok(())
}

pub fn seed_inputs() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (0.002..0.01f64, 0.5..2.0f64, 4.0..8.0f64, 0.05..0.3f64)
}

/// Runs every property over `CASES` deterministic random cases.
pub fn run_suite() -> Vec<(&'static str, Result<(), String>)> {
    fn run<S: Strategy>(name: &'static str, s: S, f: impl Fn(S::Value) -> Result<(), TestCaseError>) -> (&'static str, Result<(), String>) {
        let rng = TestRng::deterministic_rng(RngAlgorithm::ChaCha);
        let mut runner = TestRunner::new_with_rng(Config { failure_persistence: None, ..Config::with_cases(CASES) }, rng);
        (name, runner.run(&s, f).map_err(|e| e.to_string()))
    }
    vec![
        run("trace inequality", (0.2..2.0f64, bumps()), |(a, bs)| check_trace(a, &bs)),
        run("poincare inequality", (0.5..2.0f64, bumps()), |(a, bs)| check_poincare(a, &bs)),
        run("scaling identity", (0.2..1.0f64, -1.0..1.0f64, 0.1..0.4f64, bumps()), |(a, t, al, bs)| check_scaling(a, t, al, &bs)),
        run(
            "rearrangement equimeasurability",
            (0.2..1.5f64, -0.5..0.5f64, bumps(), prop::collection::vec(0.01..0.99f64, 8)),
            |(a, tilt, bs, lv)| check_equimeasurable(a, tilt, &bs, &lv),
        ),
        run("rearrangement energy", (0.2..1.5f64, -0.5..0.5f64, 0.1..0.4f64, bumps()), |(a, tilt, al, bs)| check_rearranged_energy(a, tilt, al, &bs)),
        run("negative seed energy", seed_inputs(), |(a, r, m, al)| check_seed_energy(a, r, m, al)),
    ]
}

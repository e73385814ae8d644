//! Constrained minimization of `E_a` on `{Γ_a = 1}` and conversion of the
//! minimizer into a traveling front.
//!
//! Descent runs in the inner product `⟨v, w⟩_A = vᵀ A w` of the weighted
//! Dirichlet form, restricted to the unknowns between the Dirichlet rows
//! `u = 1` at `y_min` and `u = 0` at `y_max` (Neumann at `x_max`). With
//! `g = ∇E` the step direction is `p = A⁻¹g - θ ψ`, where
//! `ψ = A⁻¹(∇Γ/2)` spans the normal of the constraint and `θ` makes `p`
//! tangent. Each trial point is clamped to `[0, 1]` and pulled back onto the
//! constraint by a `y`-translation; Armijo backtracking controls the step.

use std::sync::Arc;

use ndarray::{s, Array2, Zip};

use crate::error::{Error, Result};
use crate::grid::{
    apply_dirichlet_operator, dirichlet, energy, energy_gradient, project_constraint, rearrange_monotone,
    seed_function, trace, Field, GridSpec, TraceProfile,
};
use crate::nonlinearity::{validate, Nonlinearity};
use crate::poisson::{SymTridiag, TensorSolver};

/// Progress snapshot passed to [`SolverOptions::progress`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationInfo {
    pub iteration: usize,
    pub energy: f64,
    pub relative_gradient: f64,
    pub step: f64,
    pub multiplier_estimate: f64,
}

pub type ProgressFn = Arc<dyn Fn(&IterationInfo) + Send + Sync>;

#[derive(Clone)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Stop when `‖p‖_A / (|θ| ‖ψ‖_A)` falls below this.
    pub tolerance: f64,
    /// Rearrangement period `K`.
    pub rearrange_every: usize,
    /// Number of grid halvings applied to the default grid.
    pub refinement: usize,
    /// Overrides the weight search.
    pub a: Option<f64>,
    /// Overrides the default grid; its `a` is replaced by the chosen weight.
    pub grid: Option<GridSpec>,
    pub progress: Option<ProgressFn>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iterations: 20_000,
            tolerance: 1e-7,
            rearrange_every: 10,
            refinement: 0,
            a: None,
            grid: None,
            progress: None,
        }
    }
}

impl std::fmt::Debug for SolverOptions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SolverOptions")
            .field("max_iterations", &self.max_iterations)
            .field("tolerance", &self.tolerance)
            .field("rearrange_every", &self.rearrange_every)
            .field("refinement", &self.refinement)
            .field("a", &self.a)
            .field("grid", &self.grid)
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizerResult {
    pub minimizer: Field,
    pub infimum: f64,
    pub multiplier: f64,
    pub a: f64,
    pub iterations: usize,
    pub converged: bool,
    pub relative_gradient: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    pub interior: f64,
    pub boundary: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontSolution {
    pub speed: f64,
    pub mu: f64,
    pub front: Field,
    /// Boundary trace on `y >= resolved_y_min`.
    pub trace: TraceProfile,
    /// `-20/c`: below it the weight `e^{cy}` is too small for the weighted
    /// descent to pin the front down pointwise.
    pub resolved_y_min: f64,
    pub residuals: Residuals,
    /// `a (1 - 2 I_a)`.
    pub speed_from_infimum: f64,
    pub multiplier: f64,
    pub infimum: f64,
    pub a: f64,
    pub iterations: usize,
    pub minimizer_grid: GridSpec,
}

const SEED_DECAY_FACTOR: f64 = 0.5;
const RESOLVED_WEIGHT_EXPONENT: f64 = 20.0;

const SEED_M: f64 = 8.0;
const WEIGHT_START: f64 = 0.5;
const WEIGHT_FLOOR: f64 = 1e-6;

/// Largest `a = 0.5 · 2^{-k}` whose seed `u_0(a, a/2, 8)` has negative energy
/// on the default grid for `a`.
pub fn choose_weight(nl: &Nonlinearity) -> Result<f64> {
    let mut a = WEIGHT_START;
    while a >= WEIGHT_FLOOR {
        let spec = GridSpec::for_weight(a)?;
        let seed = seed_function(spec, a, SEED_DECAY_FACTOR * a, SEED_M)?;
        if energy(&seed, nl) < 0.0 {
            return Ok(a);
        }
        a *= 0.5;
    }
    Err(Error::InvalidNonlinearity(
        "no weight a >= 1e-6 gives a seed of negative energy; the integral condition likely fails".into(),
    ))
}

struct Problem {
    spec: GridSpec,
    solver: TensorSolver,
    lift: Array2<f64>,
}

impl Problem {
    fn new(spec: GridSpec) -> Result<Self> {
        let ny = spec.ny;
        let hy = spec.hy();
        let w = spec.weights();
        let ebar: Vec<f64> = w.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect();
        let p = SymTridiag::diagonal((1..ny).map(|j| hy * w[j]).collect());
        let q = SymTridiag::new(
            (1..ny).map(|j| (ebar[j - 1] + ebar[j]) / hy).collect(),
            (1..ny - 1).map(|j| -ebar[j] / hy).collect(),
        )?;
        let solver = TensorSolver::new(spec.nx, spec.hx(), &p, &q)?;
        let mut rows = Field::constant(spec, 0.0);
        rows.values.column_mut(0).fill(1.0);
        let ab = apply_dirichlet_operator(&rows);
        let lift = solver.solve(ab.slice(s![.., 1..ny]));
        Ok(Problem { spec, solver, lift })
    }

    fn fix_rows(&self, w: &mut Field) {
        w.values.mapv_inplace(|v| v.clamp(0.0, 1.0));
        w.values.column_mut(0).fill(1.0);
        w.values.column_mut(self.spec.ny).fill(0.0);
    }

    fn retract(&self, mut w: Field, rearrange: bool) -> Result<Field> {
        self.fix_rows(&mut w);
        if rearrange {
            w = rearrange_monotone(&w).0;
            self.fix_rows(&mut w);
        }
        Ok(project_constraint(&w)?.0)
    }
}

fn dot(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    Zip::from(a).and(b).fold(0.0, |acc, x, y| acc + x * y)
}

/// `(D - B) / (2D)` with `D = Σ u (A u)` and `B = Σ ω hy e^{ay} f(u) u` over
/// the free nodes.
pub fn multiplier(w: &Field, nl: &Nonlinearity) -> f64 {
    let ny = w.spec.ny;
    let au = apply_dirichlet_operator(w);
    let d = dot(&w.values.slice(s![.., 1..ny]).to_owned(), &au.slice(s![.., 1..ny]).to_owned());
    let m = w.spec.boundary_measures();
    let b: f64 = (1..ny).map(|j| m[j] * nl.f(w.values[[0, j]]) * w.values[[0, j]]).sum();
    (d - b) / (2.0 * d)
}

/// Projected-gradient minimization of `E_a` on `Γ_a = 1`.
pub fn minimize(spec: GridSpec, nl: &Nonlinearity, opts: &SolverOptions, initial: Option<Field>) -> Result<MinimizerResult> {
    spec.check()?;
    let report = validate(nl, 1000);
    if !report.passed {
        return Err(Error::InvalidNonlinearity(format!(
            "refusing to minimize: violated {:?}",
            report.violations.iter().map(|v| v.condition.label()).collect::<Vec<_>>()
        )));
    }
    let a = spec.a;
    let ny = spec.ny;
    let problem = Problem::new(spec)?;
    let start = match initial {
        Some(f) if f.spec == spec => f,
        Some(f) => crate::grid::resample(&f, spec, 1.0, 1.0),
        None => seed_function(spec, a, SEED_DECAY_FACTOR * a, SEED_M)?,
    };
    let mut u = problem.retract(start, false)?;
    let mut e = energy(&u, nl);
    let mut tau: Option<f64> = None;
    let mut rel = f64::INFINITY;
    let mut theta = 0.0;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iterations {
        let g_full = energy_gradient(&u, nl);
        let g = g_full.slice(s![.., 1..ny]).to_owned();
        let au_full = apply_dirichlet_operator(&u);
        let au = au_full.slice(s![.., 1..ny]).to_owned();
        let sdir = problem.solver.solve(g.view());
        let psi = &u.values.slice(s![.., 1..ny]) + &problem.lift;
        let psi_psi = dot(&psi, &au);
        theta = dot(&sdir, &au) / psi_psi;
        let mut p = &sdir - &(theta * &psi);
        // A p = g - θ A u on the free nodes
        let ap = &g - &(theta * &au);
        // drop components that push against an active bound
        ndarray::Zip::from(&mut p).and(u.values.slice(s![.., 1..ny])).for_each(|pv, &uv| {
            if (uv <= 0.0 && *pv > 0.0) || (uv >= 1.0 && *pv < 0.0) {
                *pv = 0.0;
            }
        });
        let pnorm2 = dot(&p, &ap).max(0.0);
        rel = pnorm2.sqrt() / (theta.abs() * psi_psi.sqrt()).max(f64::MIN_POSITIVE);
        if rel < opts.tolerance {
            converged = true;
            break;
        }
        let mu_est = (1.0 - theta).abs().max(1.0);
        let mut step = tau.map(|t| 2.0 * t).unwrap_or(1.0 / mu_est);
        let accepted = loop {
            let mut trial = u.clone();
            trial.values.slice_mut(s![.., 1..ny]).scaled_add(-step, &p);
            let trial = problem.retract(trial, false)?;
            // merit is E - (θ/2)(Γ - 1), blind to leftover constraint drift
            let et = energy(&trial, nl);
            let merit = et - 0.5 * theta * (dirichlet(&trial) - 1.0);
            let merit0 = e - 0.5 * theta * (dirichlet(&u) - 1.0);
            if merit <= merit0 - 1e-4 * step * pnorm2 {
                break Some((trial, et));
            }
            step *= 0.5;
            if step < 1e-14 / mu_est {
                break None;
            }
        };
        iterations += 1;
        match accepted {
            Some((trial, et)) => {
                u = trial;
                e = et;
                tau = Some(step);
            }
            None => {
                if rel < 100.0 * opts.tolerance {
                    break;
                }
                return Err(Error::Divergence {
                    iterations,
                    reason: format!("line search failed at relative gradient {rel:e}"),
                });
            }
        }
        if opts.rearrange_every > 0 && iterations % opts.rearrange_every == 0 {
            u = problem.retract(u, true)?;
            e = energy(&u, nl);
        }
        if let Some(cb) = &opts.progress {
            cb(&IterationInfo {
                iteration: iterations,
                energy: e,
                relative_gradient: rel,
                step,
                multiplier_estimate: 0.5 * theta,
            });
        }
    }
    u = problem.retract(u, true)?;
    let infimum = energy(&u, nl);
    let lambda = multiplier(&u, nl);
    if lambda >= 0.5 {
        return Err(Error::DegenerateMultiplier(lambda));
    }
    let _ = theta;
    Ok(MinimizerResult {
        minimizer: u,
        infimum,
        multiplier: lambda,
        a,
        iterations,
        converged,
        relative_gradient: rel,
    })
}

/// `μ = 1 - 2λ_a`, `c = aμ` and `u(x, y) = ū(μx, μy)`; the front lives on
/// the minimizer grid scaled by `1/μ`, so its nodal values are those of `ū`.
pub fn extract_speed(result: &MinimizerResult, nl: &Nonlinearity) -> Result<FrontSolution> {
    if !(result.multiplier < 0.5) {
        return Err(Error::DegenerateMultiplier(result.multiplier));
    }
    let mu = 1.0 - 2.0 * result.multiplier;
    let speed = result.a * mu;
    let s = result.minimizer.spec;
    let front_spec = GridSpec::new(s.x_max / mu, s.y_min / mu, s.y_max / mu, s.nx, s.ny, speed)?;
    let front = Field::new(front_spec, result.minimizer.values.clone())?;
    let residuals = residual(&front, speed, nl);
    let resolved_y_min = (-RESOLVED_WEIGHT_EXPONENT / speed).max(front_spec.y_min);
    let full = trace(&front);
    let keep = full.y_nodes.partition_point(|&y| y < resolved_y_min);
    let trace = TraceProfile::new(full.y_nodes[keep..].to_vec(), full.values[keep..].to_vec())?;
    Ok(FrontSolution {
        speed,
        mu,
        trace,
        resolved_y_min,
        front,
        residuals,
        speed_from_infimum: result.a * (1.0 - 2.0 * result.infimum),
        multiplier: result.multiplier,
        infimum: result.infimum,
        a: result.a,
        iterations: result.iterations,
        minimizer_grid: s,
    })
}

/// Max of the centered residual of `Δu + c u_y` over interior nodes with a
/// two-cell margin, and max of `|-u_x(0, y) - f(u(0, y))|` with a one-sided
/// second-order difference.
pub fn residual(front: &Field, speed: f64, nl: &Nonlinearity) -> Residuals {
    let s = &front.spec;
    let (hx, hy) = (s.hx(), s.hy());
    let v = &front.values;
    let mut interior: f64 = 0.0;
    for i in 2..s.nx.saturating_sub(1) {
        for j in 2..s.ny.saturating_sub(1) {
            let lap = (v[[i + 1, j]] - 2.0 * v[[i, j]] + v[[i - 1, j]]) / (hx * hx)
                + (v[[i, j + 1]] - 2.0 * v[[i, j]] + v[[i, j - 1]]) / (hy * hy);
            let uy = (v[[i, j + 1]] - v[[i, j - 1]]) / (2.0 * hy);
            let weight = (0.5 * speed * s.y(j)).exp();
            interior = interior.max(weight * (lap + speed * uy).abs());
        }
    }
    let mut boundary: f64 = 0.0;
    for j in 2..s.ny.saturating_sub(1) {
        let ux = (-3.0 * v[[0, j]] + 4.0 * v[[1, j]] - v[[2, j]]) / (2.0 * hx);
        boundary = boundary.max((-ux - nl.f(v[[0, j]])).abs());
    }
    Residuals { interior, boundary }
}

/// Weight search, grid, seed, minimization and rescaling in one call.
pub fn solve_front(nl: &Nonlinearity, opts: &SolverOptions) -> Result<FrontSolution> {
    let report = validate(nl, 1000);
    if !report.passed {
        return Err(Error::InvalidNonlinearity(format!(
            "violated {:?}",
            report.violations.iter().map(|v| v.condition.label()).collect::<Vec<_>>()
        )));
    }
    let a = match opts.a {
        Some(a) => a,
        None => choose_weight(nl)?,
    };
    let mut spec = match opts.grid {
        Some(g) => GridSpec { a, ..g },
        None => GridSpec::for_weight(a)?,
    };
    for _ in 0..opts.refinement {
        spec = spec.refined();
    }
    spec.check()?;
    let result = minimize(spec, nl, opts, None)?;
    if !result.converged {
        return Err(Error::Divergence {
            iterations: result.iterations,
            reason: format!("relative gradient {:e} above tolerance {:e}", result.relative_gradient, opts.tolerance),
        });
    }
    extract_speed(&result, nl)
}

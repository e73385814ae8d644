//! Pinned reference cases. Each case is a `key = value` file naming a
//! generating command, the expected value, a tolerance and how to compare.
//!
//! Commands are whitespace-separated tokens; laws are written as in
//! [`crate::config::parse_law`], and `vs` separates two laws.

use std::fmt;
use std::path::Path;

use crate::analysis::{align_and_compare, fit_decay, trace_derivative, DECAY_LAWS};
use crate::config::{build_law, parse_law};
use crate::error::{Error, Result};
use crate::evolution::{evolve, measure_speed, EvolveOptions};
use crate::explicit_front::{asymptotic_constant, explicit_front, explicit_front_dy, explicit_front_field, Side, explicit_front_grid, explicit_nonlinearity, green_g, ExplicitFrontParams};
use crate::grid::{dirichlet, energy, project_constraint, seed_function, trace, Field, GridSpec, TraceProfile};
use crate::io::parse_kv;
use crate::nonlinearity::{ignition_point, validate, Nonlinearity};
use crate::solver::{choose_weight, extract_speed, minimize, solve_front, SolverOptions};
use crate::specfun::{bessel_k, bessel_k_asymptotic, BesselOrder};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    /// `|observed - expected| <= tolerance`.
    Absolute,
    /// `|observed - expected| <= tolerance |expected|`.
    Relative,
    /// `observed >= expected`.
    AtLeast,
    /// `observed <= expected`.
    AtMost,
}

impl Comparison {
    fn parse(s: &str) -> Result<Self> {
        match s {
            "abs" => Ok(Comparison::Absolute),
            "rel" => Ok(Comparison::Relative),
            "min" => Ok(Comparison::AtLeast),
            "max" => Ok(Comparison::AtMost),
            _ => Err(Error::Parse(format!("unknown comparison `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PinnedCase {
    pub id: String,
    pub command: String,
    pub expected: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    /// `paper`, `trivial` or `derived`, a colon, then the oracle or anchor.
    pub provenance: String,
}

impl PinnedCase {
    pub fn parse(text: &str) -> Result<Self> {
        let kv = parse_kv(text)?;
        let get = |k: &str| -> Result<String> {
            kv.iter()
                .find(|(key, _)| key == k)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| Error::Parse(format!("pinned case lacks `{k}`")))
        };
        for (k, _) in &kv {
            if !["id", "command", "expected", "tolerance", "comparison", "provenance"].contains(&k.as_str()) {
                return Err(Error::Parse(format!("unknown pinned-case key `{k}`")));
            }
        }
        let num = |k: &str| -> Result<f64> {
            let v = get(k)?;
            v.parse::<f64>().map_err(|_| Error::Parse(format!("`{k}` is not a number: `{v}`")))
        };
        let provenance = get("provenance")?;
        let tag = provenance.split(':').next().unwrap_or("").trim();
        if !["paper", "trivial", "derived"].contains(&tag) {
            return Err(Error::Parse(format!("provenance must start with paper:, trivial: or derived:, got `{provenance}`")));
        }
        Ok(PinnedCase {
            id: get("id")?,
            command: get("command")?,
            expected: num("expected")?,
            tolerance: num("tolerance")?,
            comparison: Comparison::parse(&get("comparison")?)?,
            provenance,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseOutcome {
    pub id: String,
    pub passed: bool,
    pub observed: Option<f64>,
    pub expected: f64,
    pub detail: String,
}

impl fmt::Display for CaseOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        match self.observed {
            Some(o) => write!(f, "{verdict} {} observed={o} expected={} {}", self.id, self.expected, self.detail),
            None => write!(f, "{verdict} {} {}", self.id, self.detail),
        }
    }
}

/// Reruns the case's command and compares.
pub fn check(case: &PinnedCase) -> CaseOutcome {
    match run_command(&case.command) {
        Err(e) => CaseOutcome {
            id: case.id.clone(),
            passed: false,
            observed: None,
            expected: case.expected,
            detail: format!("command failed: {e}"),
        },
        Ok(o) => {
            let (e, t) = (case.expected, case.tolerance);
            let passed = match case.comparison {
                Comparison::Absolute => (o - e).abs() <= t,
                Comparison::Relative => (o - e).abs() <= t * e.abs(),
                Comparison::AtLeast => o >= e,
                Comparison::AtMost => o <= e,
            };
            CaseOutcome {
                id: case.id.clone(),
                passed,
                observed: Some(o),
                expected: e,
                detail: format!("({:?}, tolerance {t})", case.comparison),
            }
        }
    }
}

/// All `*.case` files in `dir`, sorted by file name.
pub fn load_dir(dir: &Path) -> Result<Vec<PinnedCase>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "case"))
        .collect();
    paths.sort();
    paths.iter().map(|p| PinnedCase::load(p)).collect()
}

/// Directory of the cases shipped with the crate.
pub fn default_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/corpus"))
}

fn num(tokens: &[&str], k: usize) -> Result<f64> {
    let s = tokens.get(k).ok_or_else(|| Error::Parse(format!("command `{}` is missing argument {k}", tokens.join(" "))))?;
    s.parse::<f64>().map_err(|_| Error::Parse(format!("bad numeric argument `{s}`")))
}

fn law(tokens: &[&str]) -> Result<Nonlinearity> {
    build_law(&parse_law(tokens)?)
}

fn order(tokens: &[&str], k: usize) -> Result<BesselOrder> {
    match tokens.get(k).copied() {
        Some("0") => Ok(BesselOrder::Zero),
        Some("1") => Ok(BesselOrder::One),
        Some("2") => Ok(BesselOrder::Two),
        other => Err(Error::Parse(format!("Bessel order must be 0, 1 or 2, got {other:?}"))),
    }
}

/// Evaluates a corpus command to a single number.
pub fn run_command(command: &str) -> Result<f64> {
    let tokens: Vec<&str> = command.split_whitespace().collect();
    let (head, rest) = tokens.split_first().ok_or_else(|| Error::Parse("empty command".into()))?;
    match *head {
        "bessel-k" => Ok(bessel_k(order(rest, 0)?, num(rest, 1)?)?.value),
        "bessel-k-asymptotic" => bessel_k_asymptotic(order(rest, 0)?, num(rest, 1)?),
        "law-integral" => Ok(law(rest)?.integral()),
        "law-potential" => {
            let (s, l) = rest.split_last().ok_or_else(|| Error::Parse("law-potential needs a law and s".into()))?;
            Ok(law(l)?.potential(s.parse().map_err(|_| Error::Parse(format!("bad s `{s}`")))?))
        }
        "law-value" => {
            let (s, l) = rest.split_last().ok_or_else(|| Error::Parse("law-value needs a law and s".into()))?;
            Ok(law(l)?.f(s.parse().map_err(|_| Error::Parse(format!("bad s `{s}`")))?))
        }
        "law-beta" => law(rest)?.beta().ok_or_else(|| Error::Analysis("law records no ignition point".into())),
        "ignition-point" => ignition_point(&law(rest)?),
        "validate" => Ok(if validate(&law(rest)?, 1000).passed { 1.0 } else { 0.0 }),
        "green-g" => green_g(num(rest, 0)?, num(rest, 1)?, num(rest, 2)?),
        "explicit-front" => explicit_front(&ExplicitFrontParams::new(num(rest, 0)?, num(rest, 1)?)?, num(rest, 2)?, num(rest, 3)?),
        "asymptotic-ratio" => asymptotic_ratio(num(rest, 0)?, num(rest, 1)?, num(rest, 2)?),
        "seed-energy" => seed_energy(rest),
        "seed-dirichlet" => seed_dirichlet(num(rest, 0)?, num(rest, 1)?, num(rest, 2)?),
        "projection-defect" => projection_defect(),
        "choose-weight" => choose_weight(&law(rest)?),
        "explicit-residual-order" => Ok(explicit_residuals(num(rest, 0)?, num(rest, 1)?)?.min_order),
        "explicit-boundary-residual" => Ok(explicit_residuals(num(rest, 0)?, num(rest, 1)?)?.boundary_finest),
        "evolve-speed-ratio" => evolve_speed_ratio(rest),
        "evolve-speed-explicit" => evolve_speed_explicit(num(rest, 0)?, num(rest, 1)?, 8),
        "sandwich-max" => sandwich_max(rest),
        "uniqueness-distance" => uniqueness_distance(rest),
        "ordering-margin" => ordering_margin(rest),
        other => Err(Error::Parse(format!("unknown corpus command `{other}`"))),
    }
}

/// `-u_y(0, y)` of the explicit front over its decay model times `t / sqrt(π c)`.
pub fn asymptotic_ratio(t: f64, c: f64, y: f64) -> Result<f64> {
    let params = ExplicitFrontParams::new(t, c)?;
    let (side, model) = if y > 0.0 {
        (Side::Plus, (-c * y).exp() / y.powf(1.5))
    } else {
        (Side::Minus, (-y).powf(-1.5))
    };
    Ok(-explicit_front_dy(&params, 0.0, y)? / model / asymptotic_constant(&params, side))
}

/// `seed-energy LAW a d m`: `E_a(u_0)` on a box large enough for the tails.
fn seed_energy(rest: &[&str]) -> Result<f64> {
    let n = rest.len();
    if n < 4 {
        return Err(Error::Parse("seed-energy needs a law and a, d, m".into()));
    }
    let nl = law(&rest[..n - 3])?;
    let (a, d, m) = (num(rest, n - 3)?, num(rest, n - 2)?, num(rest, n - 1)?);
    let spec = seed_box(a, d, m)?;
    Ok(energy(&seed_function(spec, a, d, m)?, &nl))
}

fn seed_box(a: f64, d: f64, m: f64) -> Result<GridSpec> {
    // tails below 1e-11 on the left, 1e-7 on the right and 1e-12 at x_max,
    // with 25 nodes per decay length in each direction
    let x_max = 14.0 / d;
    let y_min = -25.0 / a;
    let y_max = 16.0 / ((2.0 * m - 1.0) * a);
    let (hx, hy) = (1.0 / (50.0 * d), 1.0 / (50.0 * m * a));
    GridSpec::new(x_max, y_min, y_max, (x_max / hx).ceil() as usize, ((y_max - y_min) / hy).ceil() as usize, a)
}

fn seed_dirichlet(a: f64, d: f64, m: f64) -> Result<f64> {
    Ok(dirichlet(&seed_function(seed_box(a, d, m)?, a, d, m)?))
}

/// `|Γ - 1|` after projecting a seed that starts far from the constraint.
fn projection_defect() -> Result<f64> {
    let spec = GridSpec::for_weight(0.05)?;
    let w = seed_function(spec, 0.05, 0.025, 8.0)?;
    let (p, _) = project_constraint(&w)?;
    Ok((dirichlet(&p) - 1.0).abs())
}

pub struct ExplicitResiduals {
    /// Interior max residuals at `h = 1/32, 1/64, 1/128`.
    pub interior: [f64; 3],
    pub min_order: f64,
    /// Max of `|-u_x - f(u)|` at `h = 1/128`, `u_x` by the fourth-order one-sided stencil.
    pub boundary_finest: f64,
}

/// Residuals of the sampled explicit front on `[0, 2] x [-10, 4]`.
pub fn explicit_residuals(t: f64, c: f64) -> Result<ExplicitResiduals> {
    let params = ExplicitFrontParams::new(t, c)?;
    let mut interior = [0.0; 3];
    let mut boundary_finest = 0.0;
    for (k, n) in [32usize, 64, 128].into_iter().enumerate() {
        let h = 1.0 / n as f64;
        let xs: Vec<f64> = (0..=2 * n).map(|i| i as f64 * h).collect();
        let ys: Vec<f64> = (0..=14 * n).map(|j| -10.0 + j as f64 * h).collect();
        let u = explicit_front_grid(&params, &xs, &ys)?;
        let mut r: f64 = 0.0;
        for i in 1..xs.len() - 1 {
            for j in 1..ys.len() - 1 {
                let lap = (u[i + 1][j] + u[i - 1][j] + u[i][j + 1] + u[i][j - 1] - 4.0 * u[i][j]) / (h * h);
                let uy = (u[i][j + 1] - u[i][j - 1]) / (2.0 * h);
                r = r.max((lap + c * uy).abs());
            }
        }
        interior[k] = r;
        if n == 128 {
            let mut b: f64 = 0.0;
            for (j, &u0) in u[0].iter().enumerate() {
                let ux = (-25.0 * u0 + 48.0 * u[1][j] - 36.0 * u[2][j] + 16.0 * u[3][j] - 3.0 * u[4][j]) / (12.0 * h);
                b = b.max((-ux - explicit_nonlinearity(&params, u0)?).abs());
            }
            boundary_finest = b;
        }
    }
    let min_order = (interior[0] / interior[1]).log2().min((interior[1] / interior[2]).log2());
    Ok(ExplicitResiduals { interior, min_order, boundary_finest })
}

/// Step-function evolution speed divided by the variational speed.
fn evolve_speed_ratio(rest: &[&str]) -> Result<f64> {
    let nl = law(rest)?;
    let c = solve_front(&nl, &SolverOptions::default())?.speed;
    let spec = GridSpec::new(40.0, -60.0, 60.0, 80, 240, 0.0)?;
    let f = Field::from_fn(spec, |_, y| if y < 0.0 { 1.0 } else { 0.0 });
    let (_, tr) = evolve(f, &nl, 300.0, &EvolveOptions { output_interval: 1.0, ..Default::default() })?;
    Ok(measure_speed(&tr, 0.7)? / c)
}

/// Measured speed of the explicit front evolved under its own law at `h = 1/n`.
pub fn evolve_speed_explicit(t: f64, c: f64, n: usize) -> Result<f64> {
    let (speed, _) = evolve_explicit(t, c, n, 8.0)?;
    Ok(speed)
}

/// Evolves the explicit front on `[0, 12] x [-24, 24]` at `h = 1/n` up to
/// `t_end`; returns the measured speed and the sup distance between the
/// initial and final traces after alignment.
pub fn evolve_explicit(t: f64, c: f64, n: usize, t_end: f64) -> Result<(f64, f64)> {
    let params = ExplicitFrontParams::new(t, c)?;
    let nl = build_law(&crate::nonlinearity::NonlinearityDescriptor::Explicit { t, c })?;
    let spec = GridSpec::new(12.0, -24.0, 24.0, 12 * n, 48 * n, 0.0)?;
    let f = explicit_front_field(&params, spec)?;
    let full = trace(&f);
    let (ys, vs): (Vec<f64>, Vec<f64>) = full.y_nodes.iter().zip(&full.values).filter(|(y, _)| y.abs() <= 12.0).unzip();
    let before = TraceProfile::new(ys, vs)?;
    let (state, tr) = evolve(f, &nl, t_end, &EvolveOptions { output_interval: 0.1, ..Default::default() })?;
    let (_, dist) = align_and_compare(&before, &trace(&state.field))?;
    Ok((measure_speed(&tr, 0.3)?, dist))
}

/// Largest `sandwich_b` over the four decay laws on the standard windows.
fn sandwich_max(rest: &[&str]) -> Result<f64> {
    let nl = law(rest)?;
    let sol = solve_front(&nl, &SolverOptions::default())?;
    let dy = trace_derivative(&sol.trace);
    DECAY_LAWS.iter().try_fold(1.0f64, |b, &(side, q)| Ok(b.max(fit_decay(&sol.trace, &dy, sol.speed, side, q, None)?.sandwich_b)))
}

/// Aligned trace distance between solves from the default seed and from
/// `u_0(a, a/4, 4)`.
fn uniqueness_distance(rest: &[&str]) -> Result<f64> {
    let nl = law(rest)?;
    let opts = SolverOptions::default();
    let first = solve_front(&nl, &opts)?;
    let spec = first.minimizer_grid;
    let seed = seed_function(spec, spec.a, 0.25 * spec.a, 4.0)?;
    let r = minimize(spec, &nl, &opts, Some(seed))?;
    if !r.converged {
        return Err(Error::Divergence { iterations: r.iterations, reason: "second seed did not converge".into() });
    }
    let second = extract_speed(&r, &nl)?;
    Ok(align_and_compare(&first.trace, &second.trace)?.1)
}

/// `c1 - c2` for `LAW1 vs LAW2`.
fn ordering_margin(rest: &[&str]) -> Result<f64> {
    let k = rest.iter().position(|&t| t == "vs").ok_or_else(|| Error::Parse("ordering-margin needs `vs`".into()))?;
    let r = crate::analysis::speed_ordering(&law(&rest[..k])?, &law(&rest[k + 1..])?, &SolverOptions::default())?;
    if !r.infima_ordered {
        return Err(Error::Analysis(format!("infima not ordered: {} vs {}", r.infimum1, r.infimum2)));
    }
    Ok(r.c1 - r.c2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_parsing() {
        let text = "id = k0\ncommand = bessel-k 0 1\nexpected = 0.42\ntolerance = 1e-9\ncomparison = rel\nprovenance = derived: quadrature\n";
        let c = PinnedCase::parse(text).unwrap();
        assert_eq!(c.comparison, Comparison::Relative);
        assert!(PinnedCase::parse(&text.replace("derived", "folklore")).is_err());
        assert!(PinnedCase::parse(&format!("{text}extra = 1\n")).is_err());
    }

    #[test]
    fn check_reports_failures() {
        let mut c = PinnedCase {
            id: "x".into(),
            command: "law-value cubic 0.25 0.5".into(),
            expected: 0.0625,
            tolerance: 1e-15,
            comparison: Comparison::Absolute,
            provenance: "trivial: direct evaluation".into(),
        };
        assert!(check(&c).passed);
        c.expected = 0.07;
        assert!(!check(&c).passed);
        c.command = "no-such-command".into();
        let out = check(&c);
        assert!(!out.passed && out.observed.is_none());
    }
}

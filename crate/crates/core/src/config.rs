//! Experiment configuration in the flat `key = value` format, and law
//! descriptors given as short token lists such as `cubic 0.25`.

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::evolution::EvolveOptions;
use crate::explicit_front::{explicit_front_field, tabulated_nonlinearity, ExplicitFrontParams};
use crate::grid::{Field, GridSpec};
use crate::io::parse_kv;
use crate::nonlinearity::{make_bistable_cubic, make_combustion, reflect, Nonlinearity, NonlinearityDescriptor};
use crate::solver::{solve_front, SolverOptions};

/// Hermite nodes used when tabulating the explicit law.
pub const EXPLICIT_TABLE_NODES: usize = 2000;

/// Parses `cubic ALPHA`, `combustion BETA AMPLITUDE`, `explicit T C`, each
/// optionally prefixed by `reflect`.
pub fn parse_law(tokens: &[&str]) -> Result<NonlinearityDescriptor> {
    let num = |k: usize| -> Result<f64> {
        let s = tokens.get(k).ok_or_else(|| Error::Parse(format!("law `{}` is missing parameters", tokens.join(" "))))?;
        s.parse::<f64>().map_err(|_| Error::Parse(format!("bad law parameter `{s}`")))
    };
    let (desc, used) = match tokens.first().copied() {
        Some("reflect") => return Ok(NonlinearityDescriptor::Reflected(Box::new(parse_law(&tokens[1..])?))),
        Some("cubic") => (NonlinearityDescriptor::Cubic { alpha: num(1)? }, 2),
        Some("combustion") => (NonlinearityDescriptor::Combustion { beta: num(1)?, amplitude: num(2)? }, 3),
        Some("explicit") => (NonlinearityDescriptor::Explicit { t: num(1)?, c: num(2)? }, 3),
        other => return Err(Error::Parse(format!("unknown law {other:?}"))),
    };
    if tokens.len() != used {
        return Err(Error::Parse(format!("trailing tokens in law `{}`", tokens.join(" "))));
    }
    Ok(desc)
}

pub fn build_law(desc: &NonlinearityDescriptor) -> Result<Nonlinearity> {
    match desc {
        NonlinearityDescriptor::Cubic { alpha } => make_bistable_cubic(*alpha),
        NonlinearityDescriptor::Combustion { beta, amplitude } => make_combustion(*beta, *amplitude),
        NonlinearityDescriptor::Explicit { t, c } => {
            tabulated_nonlinearity(&ExplicitFrontParams::new(*t, *c)?, EXPLICIT_TABLE_NODES)
        }
        NonlinearityDescriptor::Reflected(inner) => Ok(reflect(&build_law(inner)?)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialData {
    /// The explicit front for explicit laws, the variational front otherwise.
    Front,
    /// `1` below `y = 0`, `0` above.
    Step,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    pub grid: GridSpec,
    pub t_end: f64,
    pub dt: Option<f64>,
    pub output_interval: f64,
    pub burn_in: f64,
    pub initial: InitialData,
}

impl EvolutionConfig {
    pub fn options(&self) -> EvolveOptions {
        EvolveOptions { dt: self.dt, output_interval: self.output_interval, ..Default::default() }
    }

    /// Initial data on the evolution grid. A variational front is shifted so
    /// its 1/2-level sits at `y = 0`.
    pub fn initial_field(&self, law: &NonlinearityDescriptor, nl: &Nonlinearity, solver: &SolverOptions) -> Result<Field> {
        match (self.initial, law) {
            (InitialData::Step, _) => Ok(Field::from_fn(self.grid, |_, y| if y < 0.0 { 1.0 } else { 0.0 })),
            (InitialData::Front, NonlinearityDescriptor::Explicit { t, c }) => {
                explicit_front_field(&ExplicitFrontParams::new(*t, *c)?, self.grid)
            }
            (InitialData::Front, _) => {
                let sol = solve_front(nl, solver)?;
                let y0 = sol
                    .trace
                    .level_crossing(0.5)
                    .ok_or_else(|| Error::Analysis("variational trace never crosses 1/2".into()))?;
                Ok(Field::from_fn(self.grid, |x, y| sol.front.sample(x, y + y0)))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub law: NonlinearityDescriptor,
    pub solver: SolverOptions,
    pub evolution: EvolutionConfig,
    pub output_dir: Option<PathBuf>,
    pub seed: u64,
}

const KEYS: &[&str] = &[
    "nonlinearity.kind",
    "nonlinearity.alpha",
    "nonlinearity.beta",
    "nonlinearity.amplitude",
    "nonlinearity.t",
    "nonlinearity.c",
    "nonlinearity.reflect",
    "grid.x_max",
    "grid.y_min",
    "grid.y_max",
    "grid.nx",
    "grid.ny",
    "grid.refinement",
    "solver.a",
    "solver.tolerance",
    "solver.max_iterations",
    "solver.rearrange_every",
    "evolution.x_max",
    "evolution.y_min",
    "evolution.y_max",
    "evolution.nx",
    "evolution.ny",
    "evolution.t_end",
    "evolution.dt",
    "evolution.output_interval",
    "evolution.burn_in",
    "evolution.initial",
    "output.dir",
    "seed",
];

struct Lookup(Vec<(String, String)>);

impl Lookup {
    fn raw(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.raw(key)
            .map(|v| match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(Error::Parse(format!("`{key}` must be a finite number, got `{v}`"))),
            })
            .transpose()
    }

    fn usize(&self, key: &str) -> Result<Option<usize>> {
        self.raw(key)
            .map(|v| v.parse::<usize>().map_err(|_| Error::Parse(format!("`{key}` must be a nonnegative integer, got `{v}`"))))
            .transpose()
    }

    fn need(&self, key: &str) -> Result<f64> {
        self.f64(key)?.ok_or_else(|| Error::Parse(format!("missing `{key}`")))
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let kv = Lookup(parse_kv(text)?);
        if let Some((k, _)) = kv.0.iter().find(|(k, _)| !KEYS.contains(&k.as_str())) {
            return Err(Error::Parse(format!("unknown key `{k}`")));
        }
        let kind = kv.raw("nonlinearity.kind").ok_or_else(|| Error::Parse("missing `nonlinearity.kind`".into()))?;
        let mut law = match kind {
            "cubic" => NonlinearityDescriptor::Cubic { alpha: kv.need("nonlinearity.alpha")? },
            "combustion" => NonlinearityDescriptor::Combustion {
                beta: kv.need("nonlinearity.beta")?,
                amplitude: kv.f64("nonlinearity.amplitude")?.unwrap_or(1.0),
            },
            "explicit" => NonlinearityDescriptor::Explicit {
                t: kv.f64("nonlinearity.t")?.unwrap_or(1.0),
                c: kv.f64("nonlinearity.c")?.unwrap_or(2.0),
            },
            other => return Err(Error::Parse(format!("unknown nonlinearity.kind `{other}`"))),
        };
        match kv.raw("nonlinearity.reflect") {
            None | Some("false") => {}
            Some("true") => law = NonlinearityDescriptor::Reflected(Box::new(law)),
            Some(v) => return Err(Error::Parse(format!("`nonlinearity.reflect` must be true or false, got `{v}`"))),
        }

        let mut solver = SolverOptions::default();
        if let Some(v) = kv.f64("solver.a")? {
            if !(v > 0.0) {
                return Err(Error::Parse(format!("`solver.a` must be positive, got {v}")));
            }
            solver.a = Some(v);
        }
        if let Some(v) = kv.f64("solver.tolerance")? {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Parse(format!("`solver.tolerance` must lie in (0, 1), got {v}")));
            }
            solver.tolerance = v;
        }
        if let Some(v) = kv.usize("solver.max_iterations")? {
            if v == 0 {
                return Err(Error::Parse("`solver.max_iterations` must be positive".into()));
            }
            solver.max_iterations = v;
        }
        if let Some(v) = kv.usize("solver.rearrange_every")? {
            solver.rearrange_every = v;
        }
        if let Some(v) = kv.usize("grid.refinement")? {
            if v > 3 {
                return Err(Error::Parse(format!("`grid.refinement` above 3 is not supported, got {v}")));
            }
            solver.refinement = v;
        }
        let grid_keys = ["grid.x_max", "grid.y_min", "grid.y_max", "grid.nx", "grid.ny"];
        let given = grid_keys.iter().filter(|k| kv.raw(k).is_some()).count();
        if given == grid_keys.len() {
            // the weight is filled in by the solver
            let g = GridSpec {
                x_max: kv.need("grid.x_max")?,
                y_min: kv.need("grid.y_min")?,
                y_max: kv.need("grid.y_max")?,
                nx: kv.usize("grid.nx")?.unwrap_or(0),
                ny: kv.usize("grid.ny")?.unwrap_or(0),
                a: 0.0,
            };
            g.check()?;
            solver.grid = Some(g);
        } else if given > 0 {
            return Err(Error::Parse(format!("grid overrides need all of {}", grid_keys.join(", "))));
        }

        let explicit = matches!(law, NonlinearityDescriptor::Explicit { .. });
        let (bx, by, bn, t_default) = if explicit { (12.0, 24.0, 8.0, 8.0) } else { (40.0, 60.0, 2.0, 300.0) };
        let x_max = kv.f64("evolution.x_max")?.unwrap_or(bx);
        let y_min = kv.f64("evolution.y_min")?.unwrap_or(-by);
        let y_max = kv.f64("evolution.y_max")?.unwrap_or(by);
        let nx = kv.usize("evolution.nx")?.unwrap_or((x_max * bn).round() as usize);
        let ny = kv.usize("evolution.ny")?.unwrap_or(((y_max - y_min) * bn).round() as usize);
        let grid = GridSpec::new(x_max, y_min, y_max, nx, ny, 0.0)?;
        let t_end = kv.f64("evolution.t_end")?.unwrap_or(t_default);
        if !(t_end > 0.0) {
            return Err(Error::Parse(format!("`evolution.t_end` must be positive, got {t_end}")));
        }
        let dt = kv.f64("evolution.dt")?;
        if dt.is_some_and(|d| !(d > 0.0)) {
            return Err(Error::Parse("`evolution.dt` must be positive".into()));
        }
        let output_interval = kv.f64("evolution.output_interval")?.unwrap_or(if explicit { 0.1 } else { 1.0 });
        if !(output_interval > 0.0) {
            return Err(Error::Parse("`evolution.output_interval` must be positive".into()));
        }
        let burn_in = kv.f64("evolution.burn_in")?.unwrap_or(0.3);
        if !(0.0..1.0).contains(&burn_in) {
            return Err(Error::Parse(format!("`evolution.burn_in` must lie in [0, 1), got {burn_in}")));
        }
        let initial = match kv.raw("evolution.initial") {
            None => {
                if explicit {
                    InitialData::Front
                } else {
                    InitialData::Step
                }
            }
            Some("front") => InitialData::Front,
            Some("step") => InitialData::Step,
            Some(v) => return Err(Error::Parse(format!("`evolution.initial` must be front or step, got `{v}`"))),
        };
        let seed = match kv.raw("seed") {
            None => 0,
            Some(v) => v.parse::<u64>().map_err(|_| Error::Parse(format!("`seed` must be an unsigned integer, got `{v}`")))?,
        };
        Ok(ExperimentConfig {
            law,
            solver,
            evolution: EvolutionConfig { grid, t_end, dt, output_interval, burn_in, initial },
            output_dir: kv.raw("output.dir").map(PathBuf::from),
            seed,
        })
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn law_tokens() {
        assert_eq!(parse_law(&["cubic", "0.25"]).unwrap(), NonlinearityDescriptor::Cubic { alpha: 0.25 });
        assert_eq!(
            parse_law(&["reflect", "combustion", "0.3", "1"]).unwrap(),
            NonlinearityDescriptor::Reflected(Box::new(NonlinearityDescriptor::Combustion { beta: 0.3, amplitude: 1.0 }))
        );
        assert!(parse_law(&["cubic"]).is_err());
        assert!(parse_law(&["cubic", "0.25", "9"]).is_err());
        assert!(parse_law(&["quartic", "1"]).is_err());
    }

    #[test]
    fn config_defaults_and_overrides() {
        let cfg = ExperimentConfig::parse("nonlinearity.kind = explicit\nsolver.tolerance = 1e-6\n").unwrap();
        assert_eq!(cfg.law, NonlinearityDescriptor::Explicit { t: 1.0, c: 2.0 });
        assert_eq!(cfg.solver.tolerance, 1e-6);
        assert_eq!(cfg.evolution.initial, InitialData::Front);
        assert_eq!((cfg.evolution.grid.nx, cfg.evolution.grid.ny), (96, 384));
        let cfg = ExperimentConfig::parse(
            "nonlinearity.kind = combustion\nnonlinearity.beta = 0.3\nnonlinearity.amplitude = 1.5\n\
             grid.x_max = 10\ngrid.y_min = -50\ngrid.y_max = 10\ngrid.nx = 32\ngrid.ny = 128\n",
        )
        .unwrap();
        assert_eq!(cfg.law, NonlinearityDescriptor::Combustion { beta: 0.3, amplitude: 1.5 });
        assert_eq!(cfg.solver.grid.unwrap().ny, 128);
        assert_eq!(cfg.evolution.initial, InitialData::Step);
    }

    #[test]
    fn config_rejections() {
        assert!(ExperimentConfig::parse("nonlinearity.kind = cubic\n").is_err());
        assert!(ExperimentConfig::parse("nonlinearity.kind = cubic\nnonlinearity.alpha = 0.25\ncolour = red\n").is_err());
        assert!(ExperimentConfig::parse("nonlinearity.kind = cubic\nnonlinearity.alpha = 0.25\ngrid.nx = 40\n").is_err());
        assert!(ExperimentConfig::parse("nonlinearity.kind = cubic\nnonlinearity.alpha = 0.25\nsolver.tolerance = 2\n").is_err());
        assert!(ExperimentConfig::parse("nonlinearity.kind = cubic\nnonlinearity.alpha = 0.25\nevolution.initial = wave\n").is_err());
    }

    #[test]
    fn built_laws_carry_descriptors() {
        for tokens in [&["cubic", "0.25"][..], &["combustion", "0.3", "1"], &["reflect", "cubic", "0.25"]] {
            let desc = parse_law(tokens).unwrap();
            let nl = build_law(&desc).unwrap();
            assert_eq!(nl.descriptor(), Some(&desc));
        }
    }
}

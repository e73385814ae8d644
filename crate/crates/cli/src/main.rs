//! `frontforge` command-line driver.
//!
//! Exit codes: 0 on success, 1 on a numerical failure (a `failure.txt`
//! record is left in the output directory), 2 on invalid input.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use frontforge::analysis::{align_and_compare, fit_decay, speed_ordering, DecayReport, DECAY_LAWS};
use frontforge::config::{build_law, ExperimentConfig};
use frontforge::corpus;
use frontforge::evolution::{evolve, measure_speed};
use frontforge::explicit_front::{
    asymptotic_constant, boundary_flux, explicit_front_column, explicit_front_dy, ExplicitFrontParams, Side,
};
use frontforge::grid::TraceProfile;
use frontforge::io::{self, csv_number, format_kv};
use frontforge::solver::solve_front;

const OUT_ENV: &str = "FRONTFORGE_OUT";

#[derive(Parser)]
#[command(name = "frontforge", version, about = "Traveling fronts with nonlinear boundary reaction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutArg {
    /// Output directory; beats FRONTFORGE_OUT, which beats `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the closed-form front and its boundary law.
    ExplicitFront {
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        c: f64,
        #[arg(long, default_value_t = -200.0, allow_hyphen_values = true)]
        y_min: f64,
        #[arg(long, default_value_t = 100.0, allow_hyphen_values = true)]
        y_max: f64,
        /// Trace cells between `y_min` and `y_max`.
        #[arg(long, default_value_t = 4800)]
        ny: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Variational solve; writes trace.csv, meta.txt and field.csv.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Skip the full field snapshot.
        #[arg(long)]
        no_field: bool,
        #[command(flatten)]
        out: OutArg,
    },
    /// Parabolic run; writes speed_trace.csv and evolution.txt.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        /// Also write the final field.
        #[arg(long)]
        field: bool,
        #[command(flatten)]
        out: OutArg,
    },
    /// Fit the four decay laws to a `y,u,uy` trace.
    Asymptotics {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        c: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Speed ordering of two laws (two configs) or of two saved bundles.
    Compare {
        #[arg(long, num_args = 1)]
        config: Vec<PathBuf>,
        /// Bundle directories written by `solve`.
        #[arg(long, num_args = 1)]
        bundle: Vec<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Rerun the pinned reference cases and print a pass/fail table.
    Verify {
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
}

/// An error with its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
    out_dir: Option<PathBuf>,
}

fn classify(e: &anyhow::Error) -> u8 {
    use frontforge::Error as E;
    if e.downcast_ref::<clap::Error>().is_some() {
        return 2;
    }
    match e.chain().find_map(|c| c.downcast_ref::<E>()) {
        Some(E::Parse(_) | E::Domain(_) | E::InvalidNonlinearity(_) | E::Grid(_) | E::Io(_)) => 2,
        Some(_) => 1,
        None if e.chain().any(|c| c.downcast_ref::<std::io::Error>().is_some()) => 2,
        None => 1,
    }
}

fn out_dir(flag: &OutArg, config: Option<&Path>, fallback: &str) -> PathBuf {
    if let Some(p) = &flag.out {
        return p.clone();
    }
    if let Some(p) = std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(p);
    }
    config.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("frontforge-out").join(fallback))
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_config(path: &Path) -> anyhow::Result<ExperimentConfig> {
    ExperimentConfig::from_file(path).with_context(|| format!("reading config {}", path.display()))
}

fn explicit_front(t: f64, c: f64, y_min: f64, y_max: f64, ny: usize, dir: &Path) -> anyhow::Result<()> {
    let params = ExplicitFrontParams::new(t, c)?;
    if !(y_min < y_max) || ny < 2 {
        return Err(frontforge::Error::Domain(format!("need y_min < y_max and ny >= 2, got [{y_min}, {y_max}] with {ny}")).into());
    }
    let ys: Vec<f64> = (0..=ny).map(|j| y_min + (y_max - y_min) * j as f64 / ny as f64).collect();
    let u = explicit_front_column(&params, 0.0, &ys)?;
    let uy = ys.iter().map(|&y| explicit_front_dy(&params, 0.0, y)).collect::<frontforge::Result<Vec<_>>>()?;
    let flux = ys.iter().map(|&y| boundary_flux(&params, y)).collect::<frontforge::Result<Vec<_>>>()?;

    let trace = TraceProfile::new(ys.clone(), u.clone())?;
    let dy = TraceProfile::new(ys.clone(), uy)?;
    io::write_trace_csv(&dir.join("trace.csv"), &trace, &dy)?;

    let mut table = String::from("s,f\n");
    for k in (0..ys.len()).rev() {
        table.push_str(&format!("{},{}\n", csv_number(u[k]), csv_number(flux[k])));
    }
    write(&dir.join("nonlinearity.csv"), &table)?;

    let meta = format_kv(&[
        ("t", t.to_string()),
        ("c", c.to_string()),
        ("asymptotic_constant", asymptotic_constant(&params, Side::Plus).to_string()),
        ("y_min", y_min.to_string()),
        ("y_max", y_max.to_string()),
        ("ny", ny.to_string()),
    ]);
    write(&dir.join("meta.txt"), &meta)?;
    print!("{meta}");
    Ok(())
}

fn solve(config: &Path, no_field: bool, out: &OutArg) -> anyhow::Result<()> {
    let cfg = load_config(config)?;
    let dir = out_dir(out, cfg.output_dir.as_deref(), "solve");
    let run = || -> anyhow::Result<()> {
        let nl = build_law(&cfg.law)?;
        let sol = solve_front(&nl, &cfg.solver)?;
        io::write_front_bundle(&dir, &sol, !no_field)?;
        print!("{}", io::front_meta(&sol));
        println!("lambda_I_discrepancy = {}", (sol.multiplier - sol.infimum).abs());
        Ok(())
    };
    run().map_err(|e| with_dir(e, &dir))
}

fn evolve_cmd(config: &Path, field: bool, out: &OutArg) -> anyhow::Result<()> {
    let cfg = load_config(config)?;
    let dir = out_dir(out, cfg.output_dir.as_deref(), "evolve");
    let run = || -> anyhow::Result<()> {
        let nl = build_law(&cfg.law)?;
        let ev = &cfg.evolution;
        let initial = ev.initial_field(&cfg.law, &nl, &cfg.solver)?;
        let (state, trace) = evolve(initial, &nl, ev.t_end, &ev.options())?;
        io::write_speed_trace_csv(&dir.join("speed_trace.csv"), &trace)?;
        if field {
            io::write_field_csv(&dir.join("field.csv"), &state.field)?;
        }
        let speed = measure_speed(&trace, ev.burn_in)?;
        let summary = format_kv(&[
            ("speed", speed.to_string()),
            ("t_end", state.time.to_string()),
            ("offset", state.offset.to_string()),
            ("samples", trace.len().to_string()),
        ]);
        write(&dir.join("evolution.txt"), &summary)?;
        print!("{summary}");
        Ok(())
    };
    run().map_err(|e| with_dir(e, &dir))
}

fn asymptotics(input: &Path, c: f64, out: &OutArg) -> anyhow::Result<()> {
    let (trace, dy) = io::read_trace_csv(input).with_context(|| format!("reading {}", input.display()))?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(frontforge::Error::Domain(format!("speed must be positive, got {c}")).into());
    }
    let reports: Vec<(String, frontforge::Result<DecayReport>)> = DECAY_LAWS
        .iter()
        .map(|&(side, q)| (format!("{}.{}", side.label(), q.label()), fit_decay(&trace, &dy, c, side, q, None)))
        .collect();
    let mut text = String::new();
    let mut failed = Vec::new();
    for (name, r) in &reports {
        text.push_str(&format!("[{name}]\n"));
        match r {
            Ok(rep) => text.push_str(&rep.to_string()),
            Err(e) => {
                text.push_str(&format!("error = {e}\n"));
                failed.push(name.clone());
            }
        }
        text.push('\n');
    }
    print!("{text}");
    if out.out.is_some() || std::env::var_os(OUT_ENV).is_some() {
        let dir = out_dir(out, None, "asymptotics");
        write(&dir.join("decay.txt"), &text)?;
    }
    if !failed.is_empty() {
        bail!(frontforge::Error::Analysis(format!("decay fit failed for {}", failed.join(", "))));
    }
    Ok(())
}

fn read_bundle(dir: &Path) -> anyhow::Result<(f64, TraceProfile)> {
    let meta = io::read_kv_file(&dir.join("meta.txt")).with_context(|| format!("reading bundle {}", dir.display()))?;
    let c = meta.get("c").ok_or_else(|| frontforge::Error::Parse(format!("{} lacks key c", dir.display())))?;
    let c = io::parse_number(c)?;
    let (trace, _) = io::read_trace_csv(&dir.join("trace.csv"))?;
    Ok((c, trace))
}

fn compare(configs: &[PathBuf], bundles: &[PathBuf], out: &OutArg) -> anyhow::Result<()> {
    match (configs.len(), bundles.len()) {
        (2, 0) => {
            let cfg1 = load_config(&configs[0])?;
            let cfg2 = load_config(&configs[1])?;
            let dir = out_dir(out, cfg1.output_dir.as_deref(), "compare");
            let run = || -> anyhow::Result<()> {
                let r = speed_ordering(&build_law(&cfg1.law)?, &build_law(&cfg2.law)?, &cfg1.solver)?;
                io::write_front_bundle(&dir.join("front1"), &r.front1, false)?;
                io::write_front_bundle(&dir.join("front2"), &r.front2, false)?;
                let summary = format_kv(&[
                    ("a", r.a.to_string()),
                    ("c1", r.c1.to_string()),
                    ("c2", r.c2.to_string()),
                    ("ordered", r.ordered.to_string()),
                    ("I1", r.infimum1.to_string()),
                    ("I2", r.infimum2.to_string()),
                    ("infima_ordered", r.infima_ordered.to_string()),
                    ("strict", r.strict.to_string()),
                ]);
                write(&dir.join("compare.txt"), &summary)?;
                print!("{summary}");
                if !r.ordered || !r.infima_ordered {
                    bail!(frontforge::Error::Analysis("speeds or infima out of order".into()));
                }
                Ok(())
            };
            run().map_err(|e| with_dir(e, &dir))
        }
        (0, 2) => {
            let (c1, t1) = read_bundle(&bundles[0])?;
            let (c2, t2) = read_bundle(&bundles[1])?;
            let (shift, distance) = align_and_compare(&t1, &t2)?;
            let summary = format_kv(&[
                ("c1", c1.to_string()),
                ("c2", c2.to_string()),
                ("ordered", (c1 >= c2).to_string()),
                ("shift", shift.to_string()),
                ("distance", distance.to_string()),
            ]);
            print!("{summary}");
            if out.out.is_some() || std::env::var_os(OUT_ENV).is_some() {
                write(&out_dir(out, None, "compare").join("compare.txt"), &summary)?;
            }
            Ok(())
        }
        _ => Err(frontforge::Error::Parse("compare takes exactly two --config or two --bundle arguments".into()).into()),
    }
}

fn verify(jobs: usize, dir: Option<&Path>) -> anyhow::Result<()> {
    let dir = dir.unwrap_or_else(|| corpus::default_dir());
    let cases = corpus::load_dir(dir).with_context(|| format!("loading cases from {}", dir.display()))?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    let outcomes: Vec<_> = pool.install(|| cases.par_iter().map(corpus::check).collect());
    for o in &outcomes {
        println!("{o}");
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} passed, {failed} failed", outcomes.len() - failed);
    if failed > 0 {
        return Err(anyhow!(frontforge::Error::Analysis(format!("{failed} pinned cases failed"))));
    }
    Ok(())
}

fn with_dir(error: anyhow::Error, dir: &Path) -> anyhow::Error {
    error.context(DiagnosticDir(dir.to_path_buf()))
}

/// Marks where a numerical failure should leave its record.
#[derive(Debug)]
struct DiagnosticDir(PathBuf);

impl std::fmt::Display for DiagnosticDir {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "output directory {}", self.0.display())
    }
}

impl std::error::Error for DiagnosticDir {}

fn run(cli: Cli) -> Result<(), Failure> {
    let name = match &cli.command {
        Command::ExplicitFront { .. } => "explicit-front",
        Command::Solve { .. } => "solve",
        Command::Evolve { .. } => "evolve",
        Command::Asymptotics { .. } => "asymptotics",
        Command::Compare { .. } => "compare",
        Command::Verify { .. } => "verify",
    };
    let result = match &cli.command {
        Command::ExplicitFront { t, c, y_min, y_max, ny, out } => {
            let dir = out_dir(out, None, "explicit-front");
            explicit_front(*t, *c, *y_min, *y_max, *ny, &dir).map_err(|e| with_dir(e, &dir))
        }
        Command::Solve { config, no_field, out } => solve(config, *no_field, out),
        Command::Evolve { config, field, out } => evolve_cmd(config, *field, out),
        Command::Asymptotics { input, c, out } => asymptotics(input, *c, out),
        Command::Compare { config, bundle, out } => compare(config, bundle, out),
        Command::Verify { jobs, corpus } => verify(*jobs, corpus.as_deref()),
    };
    result.map_err(|error| {
        let code = classify(&error);
        let out_dir = error.downcast_ref::<DiagnosticDir>().map(|d| d.0.clone());
        Failure { code, error: error.context(format!("{name} failed")), out_dir }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            if f.code == 1 {
                if let Some(dir) = f.out_dir {
                    let record = format_kv(&[("exit_code", "1".into()), ("error", format!("{:#}", f.error))]);
                    if let Err(e) = write(&dir.join("failure.txt"), &record) {
                        eprintln!("could not write failure record: {e:#}");
                    }
                }
            }
            ExitCode::from(f.code)
        }
    }
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn frontforge(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frontforge"))
        .args(args)
        .current_dir(cwd)
        .env_remove("FRONTFORGE_OUT")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"))
        .parse()
        .unwrap()
}

/// Value of `key` inside the `[section]` block of an asymptotics report.
fn section_value(text: &str, section: &str, key: &str) -> f64 {
    let start = text.find(&format!("[{section}]")).unwrap();
    let block = &text[start..];
    let end = block[1..].find("\n[").map_or(block.len(), |k| k + 1);
    value(&block[..end], key)
}

#[test]
fn explicit_front_then_asymptotics_recovers_the_constant() {
    let dir = tempfile::tempdir().unwrap();
    let o = frontforge(&["explicit-front", "--t", "1", "--c", "2", "--out", "ef"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let k = value(&stdout(&o), "asymptotic_constant");
    assert!((k - 0.3989422804014327).abs() < 1e-15);
    for f in ["trace.csv", "nonlinearity.csv", "meta.txt"] {
        assert!(dir.path().join("ef").join(f).exists(), "{f}");
    }

    let o = frontforge(&["asymptotics", "--input", "ef/trace.csv", "--c", "2"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    for side in ["plus", "minus"] {
        let fitted = section_value(&text, &format!("{side}.minus_u_y"), "fitted_constant");
        assert!((fitted / k - 1.0).abs() < 0.05, "{side}: {fitted}");
    }
}

#[test]
fn nonlinearity_table_is_sorted_and_matches_the_slopes() {
    let dir = tempfile::tempdir().unwrap();
    let o = frontforge(&["explicit-front", "--t", "1", "--c", "2", "--y-min", "-40", "--y-max", "20", "--ny", "600", "--out", "ef"], dir.path());
    assert!(o.status.success());
    let text = fs::read_to_string(dir.path().join("ef/nonlinearity.csv")).unwrap();
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let (s, f) = l.split_once(',').unwrap();
            (s.parse().unwrap(), f.parse().unwrap())
        })
        .collect();
    assert!(text.starts_with("s,f\n"));
    assert!(rows.windows(2).all(|w| w[1].0 > w[0].0));
    // f(s) ≈ -s near 0 for t = 1, c = 2, approached like 1/|ln s|
    let (s0, f0) = rows[0];
    assert!((f0 / s0 + 1.0).abs() < 0.1, "{f0} / {s0}");
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "nonlinearity.kind = explicit\nevolution.t_end = 1.5\n";
    fs::write(dir.path().join("ex.cfg"), cfg).unwrap();
    for run in ["a", "b"] {
        assert!(frontforge(&["explicit-front", "--t", "1", "--c", "2", "--ny", "400", "--out", &format!("ef{run}")], dir.path()).status.success());
        assert!(frontforge(&["evolve", "--config", "ex.cfg", "--out", &format!("ev{run}")], dir.path()).status.success());
    }
    let read = |p: &str| fs::read(dir.path().join(p)).unwrap();
    assert_eq!(read("efa/trace.csv"), read("efb/trace.csv"));
    assert_eq!(read("efa/nonlinearity.csv"), read("efb/nonlinearity.csv"));
    assert_eq!(read("eva/speed_trace.csv"), read("evb/speed_trace.csv"));
    let trace = String::from_utf8(read("efa/trace.csv")).unwrap();
    assert!(!trace.contains('\r'));
    // 17 significant digits
    let first = trace.lines().nth(1).unwrap().split(',').next().unwrap();
    assert_eq!(first.split('e').next().unwrap().replace(['-', '.'], "").len(), 17);
}

#[test]
fn solve_explicit_law_recovers_speed_and_bundle_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("ex.cfg"), "nonlinearity.kind = explicit\n").unwrap();
    let o = frontforge(&["solve", "--config", "ex.cfg", "--out", "front", "--no-field"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!((value(&text, "c") - 2.0).abs() < 0.2);
    assert!(value(&text, "lambda_I_discrepancy") < 0.05 * value(&text, "lambda_a").abs());

    let o = frontforge(&["asymptotics", "--input", "front/trace.csv", "--c", &value(&text, "c").to_string()], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let o = frontforge(&["compare", "--bundle", "front", "--bundle", "front"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(value(&text, "shift"), 0.0);
    assert_eq!(value(&text, "distance"), 0.0);
}

#[test]
fn environment_overrides_the_config_directory() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("ex.cfg"), "nonlinearity.kind = explicit\nevolution.t_end = 1.5\noutput.dir = from_config\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_frontforge"))
        .args(["evolve", "--config", "ex.cfg"])
        .current_dir(dir.path())
        .env("FRONTFORGE_OUT", "from_env")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("from_env/speed_trace.csv").exists());
    assert!(!dir.path().join("from_config").exists());
    assert!(frontforge(&["evolve", "--config", "ex.cfg"], dir.path()).status.success());
    assert!(dir.path().join("from_config/evolution.txt").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| frontforge(args, dir.path()).status.code().unwrap();
    assert_eq!(code(&["no-such-subcommand"]), 2);
    assert_eq!(code(&["explicit-front", "--t", "-1", "--c", "2", "--out", "x"]), 2);
    assert_eq!(code(&["solve", "--config", "missing.cfg"]), 2);
    fs::write(dir.path().join("bad.cfg"), "nonlinearity.kind = cubic\nnonlinearity.alpha = 0.25\ncolour = red\n").unwrap();
    assert_eq!(code(&["solve", "--config", "bad.cfg"]), 2);
    assert_eq!(code(&["compare", "--bundle", "only-one"]), 2);

    fs::write(dir.path().join("short.cfg"), "nonlinearity.kind = cubic\nnonlinearity.alpha = 0.25\nsolver.max_iterations = 3\n").unwrap();
    assert_eq!(code(&["solve", "--config", "short.cfg", "--out", "short"]), 1);
    let record = fs::read_to_string(dir.path().join("short/failure.txt")).unwrap();
    assert!(record.contains("exit_code = 1") && record.contains("diverged"));
}

#[test]
fn verify_runs_a_corpus_directory() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    fs::create_dir(&corpus).unwrap();
    fs::write(
        corpus.join("a.case"),
        "id = k0\ncommand = bessel-k 0 1\nexpected = 0.42102443824070829\ntolerance = 1e-9\ncomparison = rel\nprovenance = derived: quadrature\n",
    )
    .unwrap();
    let o = frontforge(&["verify", "--jobs", "1", "--corpus", "corpus"], dir.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("PASS k0"));

    fs::write(
        corpus.join("b.case"),
        "id = wrong\ncommand = bessel-k 0 1\nexpected = 0.5\ntolerance = 1e-9\ncomparison = rel\nprovenance = derived: deliberately wrong\n",
    )
    .unwrap();
    let o = frontforge(&["verify", "--jobs", "2", "--corpus", "corpus"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL wrong"));
}

use std::path::Path;
use std::process::{Command, Output};

fn pfagp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pfagp")).current_dir(dir).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// `key=value` field of a summary line.
fn field<'a>(line: &'a str, key: &str) -> &'a str {
    line.split_whitespace()
        .find_map(|t| t.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in '{line}'"))
}

#[test]
fn no_arguments_lists_solvers_and_problems() {
    let dir = tempfile::tempdir().unwrap();
    let o = pfagp(dir.path(), &[]);
    assert_eq!(code(&o), 2);
    let text = stdout(&o) + &stderr(&o);
    for name in ["pf-agp-nsc", "pf-agp-nc", "pf-agp-nl", "rpf-agp-nsc", "agp", "robust-logistic", "quadratic-random"] {
        assert!(text.contains(name), "{name} missing from usage");
    }
    let o = pfagp(dir.path(), &["run", "--problem", "synthetic"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("pf-agp-nl"));
}

#[test]
fn synthetic_defaults_converge_and_trace_matches_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = pfagp(dir.path(), &["run", "--problem", "synthetic", "--solver", "pf-agp-nsc", "--eps", "1e-5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let line = stdout(&o);
    assert_eq!(field(&line, "status"), "converged");
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next().unwrap(), pfagp::TRACE_COLUMNS.join(","));
    let last = lines.last().unwrap();
    assert_eq!(last.split(',').nth(1).unwrap(), field(&line, "grad_calls"));
    // one record per step plus the final termination check
    let iterations: usize = field(&line, "iterations").parse().unwrap();
    assert_eq!(last.split(',').next().unwrap(), (iterations + 1).to_string());
}

#[test]
fn iteration_cap_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = pfagp(dir.path(), &["run", "--problem", "synthetic", "--solver", "pf-agp-nsc", "--max-iters", "1"]);
    assert_eq!(code(&o), 3);
    assert_eq!(field(&stdout(&o), "status"), "max_iters");
}

#[test]
fn structure_and_parameter_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 6] = [
        &["run", "--problem", "dirac-gan", "--solver", "pf-agp-nl"],
        &["run", "--problem", "quadratic", "--solver", "rpf-agp-nsc"],
        &["run", "--problem", "quadratic", "--solver", "pf-agp-nsc", "--eps", "abc"],
        &["run", "--problem", "quadratic", "--solver", "pf-agp-nsc", "--l0", "1", "--l12", "2"],
        &["run", "--problem", "synthetic", "--solver", "pf-agp-nsc", "--y-box", "none"],
        &["run", "--problem", "quadratic", "--solver", "pf-agp-nsc", "--x0", "1,2,3"],
    ];
    for args in cases {
        let o = pfagp(dir.path(), args);
        assert_eq!(code(&o), 2, "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn identical_runs_write_identical_traces() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a.csv", "b.csv"] {
        let o = pfagp(dir.path(), &["run", "--problem", "dirac-gan", "--solver", "pf-agp-nc", "--max-iters", "300", "--output", out]);
        assert_eq!(code(&o), 3);
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.csv")).unwrap());
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.cfg"),
        "# reference quadratic\nproblem=quadratic\nsolver=pf-agp-nsc\nl0=0.01\nmu0=4\nmax-iters=5\noutput=q.csv\n",
    )
    .unwrap();
    let o = pfagp(dir.path(), &["run", "--config", "run.cfg", "--max-iters", "7", "--l12", "1"]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert_eq!(field(&stdout(&o), "iterations"), "7");
    let trace = pfagp::read_trace(dir.path().join("q.csv")).unwrap();
    assert!(trace[0].l12.unwrap() >= 1.0);
    assert!(trace[0].l22.unwrap() < 1.0);

    std::fs::write(dir.path().join("bad.cfg"), "problem=quadratic\nsolver=agp\ncolour=blue\n").unwrap();
    let o = pfagp(dir.path(), &["run", "--config", "bad.cfg"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("colour"));

    std::fs::write(dir.path().join("both.cfg"), "problem=quadratic\nsolver=agp\nl0=1\nl11=2\n").unwrap();
    assert_eq!(code(&pfagp(dir.path(), &["run", "--config", "both.cfg"])), 2);
}

#[test]
fn json_trace_and_timing() {
    let dir = tempfile::tempdir().unwrap();
    let o = pfagp(
        dir.path(),
        &["run", "--problem", "dirac-gan", "--solver", "agp", "--format", "json", "--timing", "--max-iters", "20"],
    );
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("trace.json")).unwrap();
    let rows: Vec<serde_json::Value> = serde_json::from_str(&text).unwrap();
    assert_eq!(rows.len(), 21);
    assert!(rows[0]["elapsed_ms"].is_number());
    assert!(rows[0]["mu"].is_null());
}

#[test]
fn batch_runs_in_input_order() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, body: &str| std::fs::write(dir.path().join(name), body).unwrap();
    write("a.cfg", "problem=dirac-gan\nsolver=pf-agp-nc\noutput=a.csv\n");
    write("b.cfg", "problem=quadratic\nsolver=pf-agp-nsc\nmax-iters=3\noutput=b.csv\n");
    write("c.cfg", "problem=quadratic\nsolver=pf-agp-nc\noutput=a.csv\n");

    let o = pfagp(dir.path(), &["batch", "--jobs", "2", "a.cfg", "b.cfg"]);
    assert_eq!(code(&o), 3, "worst of converged and max_iters");
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].starts_with("a.cfg: ") && lines[1].starts_with("b.cfg: "));
    assert_eq!(field(lines[0], "status"), "converged");
    assert!(dir.path().join("a.csv").exists() && dir.path().join("b.csv").exists());

    let o = pfagp(dir.path(), &["batch", "a.cfg", "c.cfg"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("same trace"));
}

#[test]
fn plot_data_extracts_columns() {
    let dir = tempfile::tempdir().unwrap();
    let o = pfagp(dir.path(), &["run", "--problem", "quadratic", "--solver", "pf-agp-nsc", "--max-iters", "30"]);
    assert_eq!(code(&o), 3);
    let o = pfagp(dir.path(), &["plot-data", "trace.csv", "--x", "grad_calls", "--min-so-far"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "# grad_calls gap_norm");
    let ys: Vec<f64> = lines.map(|l| l.split(' ').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(ys.len(), 31);
    assert!(ys.windows(2).all(|w| w[1] <= w[0]));

    // c only applies to the nonconvex-concave solver
    let o = pfagp(dir.path(), &["plot-data", "trace.csv", "--y", "c"]);
    assert_eq!(stdout(&o).lines().count(), 1);
    assert_eq!(code(&pfagp(dir.path(), &["plot-data", "missing.csv"])), 1);
}

#[test]
fn gradient_check_passes_on_builtins() {
    let dir = tempfile::tempdir().unwrap();
    for p in ["synthetic", "dirac-gan", "robust-quadratic", "robust-logistic", "quadratic", "quadratic-random"] {
        let o = pfagp(dir.path(), &["check-gradients", "--problem", p, "--points", "10"]);
        assert_eq!(code(&o), 0, "{p}: {}{}", stdout(&o), stderr(&o));
        assert!(stdout(&o).ends_with("ok\n"));
    }
    let o = pfagp(dir.path(), &["check-gradients", "--problem", "synthetic", "--h", "0.5", "--tol", "1e-12"]);
    assert_ne!(code(&o), 0);
}

#[test]
fn single_precision_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = pfagp(
        dir.path(),
        &["run", "--problem", "quadratic", "--solver", "pf-agp-nsc", "--precision", "f32", "--mu0", "4", "--eps", "1e-3"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

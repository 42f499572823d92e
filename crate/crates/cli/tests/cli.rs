use std::path::Path;
use std::process::{Command, Output};

use gelfand::{GroupDescriptor, KernelSpec, KernelTerm, PairDescriptor, PdExpr, PdFunction, SphericalIndex};
use serde_json::Value;

fn gelfand(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gelfand")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn pd(group: GroupDescriptor, expr: PdExpr) -> PdFunction {
    PdFunction::new(group, expr).unwrap()
}

/// Kernel on S^2 x R built from certified leaves.
fn real_spec() -> KernelSpec {
    let g = GroupDescriptor::Euclidean { k: 1 };
    KernelSpec::new(
        PairDescriptor::RealSphere { d: 2 },
        g,
        vec![
            KernelTerm { index: SphericalIndex::Real { n: 0 }, pd_function: pd(g, PdExpr::Gaussian { a: 0.5 }) },
            KernelTerm { index: SphericalIndex::Real { n: 1 }, pd_function: pd(g, PdExpr::Exponential { a: 1.0 }) },
            KernelTerm {
                index: SphericalIndex::Real { n: 3 },
                pd_function: pd(g, PdExpr::Scale { r: 0.4, inner: Box::new(PdExpr::Cosine { omega: vec![0.8] }) }),
            },
        ],
    )
    .unwrap()
}

/// Kernel on (S^3 as a complex sphere) x (torus) x Z/5.
fn product_spec() -> KernelSpec {
    let g = GroupDescriptor::FiniteCyclic { m: 5 };
    let pair = PairDescriptor::product(PairDescriptor::ComplexSphere { q: 2 }, PairDescriptor::TorusGroup { n: 1 });
    let idx = |m, n, k| {
        SphericalIndex::product(SphericalIndex::Complex { m, n }, SphericalIndex::Torus { k: vec![k] })
    };
    KernelSpec::new(
        pair,
        g,
        vec![
            KernelTerm { index: idx(0, 0, 0), pd_function: pd(g, PdExpr::Constant { c: 1.0 }) },
            KernelTerm { index: idx(1, 0, -1), pd_function: pd(g, PdExpr::Character { index: vec![2.0] }) },
            KernelTerm { index: idx(1, 1, 2), pd_function: pd(g, PdExpr::Cosine { omega: vec![1.0] }) },
        ],
    )
    .unwrap()
}

fn write_spec(dir: &Path, spec: &KernelSpec) -> String {
    let path = dir.join("spec.json");
    std::fs::write(&path, spec.to_json().unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn validate_certified_spec_passes() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), &real_spec());
    let out = gelfand(&["validate", "--in", &spec, "--seed", "11", "--trials", "10"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = json(&out);
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["passed"], true);
    assert_eq!(report["result"]["kernel"]["report"]["verdict"], "pass");
    let coefficients = report["result"]["coefficients"].as_array().unwrap();
    assert_eq!(coefficients.len(), 3);
    assert!(coefficients.iter().all(|c| c["report"]["verdict"] == "pass"));
}

#[test]
fn orthotest_real_sphere_degree_ten() {
    let out = gelfand(&["orthotest", "--pair", "real:3", "--max-degree", "10"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = json(&out);
    let rows = report["result"]["residuals"].as_array().unwrap();
    assert_eq!(rows.len(), 11 * 12 / 2);
    for row in rows {
        assert!(row["residual"].as_f64().unwrap() <= 1e-11, "{row}");
    }
}

#[test]
fn failed_check_exits_two() {
    let out = gelfand(&["orthotest", "--pair", "complex:2", "--max-degree", "3", "--tolerance", "1e-300"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["passed"], false);
}

fn parse_grid_csv(text: &str) -> Vec<(String, String, f64, f64)> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("point,u,re,im"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f.len(), 4, "{l}");
            (f[0].to_string(), f[1].to_string(), f[2].parse().unwrap(), f[3].parse().unwrap())
        })
        .collect()
}

fn round_trip(spec: &KernelSpec, pair: &str, group: &str, us: &[&str], max_degree: &str) {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = write_spec(dir.path(), spec);
    let coeffs = dir.path().join("coeffs.csv");
    let coeffs = coeffs.to_str().unwrap();

    let mut args = vec!["expand", "--in", &spec_path, "--out", coeffs, "--max-degree", max_degree];
    for u in us {
        args.extend(["--u", u]);
    }
    let out = gelfand(&args);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = json(&out);
    assert!(report["result"]["tail_bound"].as_f64().unwrap() <= 1e-9, "{report}");

    let from_table = gelfand(&["synthesize", "--in", coeffs, "--pair", pair, "--group", group, "--grid", "6"]);
    assert_eq!(from_table.status.code(), Some(0), "{}", stderr(&from_table));

    let table_rows = parse_grid_csv(&stdout(&from_table));
    // synthesize the fixture on exactly the group elements of the table
    let mut u_args: Vec<String> = Vec::new();
    for row in &table_rows {
        if !u_args.contains(&row.1) {
            u_args.push(row.1.clone());
        }
    }
    assert_eq!(u_args.len(), us.len() + 1);
    let mut args = vec!["synthesize".to_string(), "--in".into(), spec_path.clone(), "--grid".into(), "6".into()];
    for u in &u_args {
        args.push("--u".into());
        args.push(u.clone());
    }
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let from_spec = gelfand(&refs);
    assert_eq!(from_spec.status.code(), Some(0), "{}", stderr(&from_spec));
    let spec_rows = parse_grid_csv(&stdout(&from_spec));

    assert_eq!(table_rows.len(), spec_rows.len());
    let mut worst = 0.0f64;
    for (a, b) in table_rows.iter().zip(&spec_rows) {
        assert_eq!((&a.0, &a.1), (&b.0, &b.1));
        worst = worst.max((a.2 - b.2).abs()).max((a.3 - b.3).abs());
    }
    assert!(worst <= 1e-9, "round-trip error {worst:e}");
}

#[test]
fn expand_then_synthesize_reproduces_fixture() {
    round_trip(&real_spec(), "real:2", "euclidean:1", &["0.7", "-1.3"], "4");
}

#[test]
fn expand_then_synthesize_product_pair() {
    round_trip(&product_spec(), "product:complex:2,torus:1", "cyclic:5", &["1", "3"], "3");
}

#[test]
fn config_errors_exit_one_with_field() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("command = \"orthotest\"\npair = { type = \"real_sphere\", d = 0 }\n", "d must be >= 1"),
        ("command = \"orthotest\"\npair = \"real:2\"\ncolour = \"red\"\n", "unknown field `colour`"),
        ("command = \"orthotest\"\npair = \"real:2\"\nmax_degree = 9\norder = 4\n", "2k-1"),
        ("command = \"orthotest\"\npair = \"real:2\"\ntrials = -3\n", "line 3"),
        ("command = \"expand\"\nin = \"same\"\nout = \"same\"\n", "out:"),
    ];
    for (i, (text, needle)) in cases.iter().enumerate() {
        let path = dir.path().join(format!("job{i}.toml"));
        std::fs::write(&path, text).unwrap();
        let out = gelfand(&["run", "--config", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(1), "{text}");
        assert!(stderr(&out).contains(needle), "{text}: {}", stderr(&out));
    }
    let out = gelfand(&["orthotest", "--pair", "real:0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("pair") && stderr(&out).contains("d must be >= 1"));
}

#[test]
fn flags_override_file_and_echo_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("job.toml");
    std::fs::write(&path, "command = \"feqtest\"\npair = \"real:3\"\nmax_degree = 3\nseed = 5\n").unwrap();
    let out = gelfand(&["feqtest", "--config", path.to_str().unwrap(), "--max-degree", "2", "--print-config"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let echo = stdout(&out);
    assert!(echo.contains("max_degree = 2") && echo.contains("seed = 5"), "{echo}");

    let echoed = dir.path().join("echo.toml");
    std::fs::write(&echoed, &echo).unwrap();
    let again = gelfand(&["run", "--config", echoed.to_str().unwrap(), "--print-config"]);
    assert_eq!(stdout(&again), echo);
}

#[test]
fn subcommand_must_match_config_command() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("job.toml");
    std::fs::write(&path, "command = \"orthotest\"\npair = \"real:3\"\n").unwrap();
    let out = gelfand(&["feqtest", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn randomized_commands_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), &real_spec());
    let mut previous: Option<(Vec<u8>, String, String)> = None;
    for run in 0..2 {
        let csv = dir.path().join(format!("field{run}.csv"));
        let csv = csv.to_str().unwrap();
        let out = gelfand(&["simulate", "--in", &spec, "--seed", "42", "--points", "6", "--out", csv]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        let sidecar: Value = serde_json::from_str(&std::fs::read_to_string(format!("{csv}.meta.json")).unwrap()).unwrap();
        assert_eq!(sidecar["seed"], 42);
        assert_eq!(sidecar["schema_version"], 1);
        let validate = gelfand(&["validate", "--in", &spec, "--seed", "42", "--trials", "3"]);
        let feq = gelfand(&["feqtest", "--pair", "complex:2", "--seed", "42", "--samples", "2000", "--max-degree", "2", "--tolerance", "0.2"]);
        assert_eq!(feq.status.code(), Some(0), "{}", stdout(&feq));
        let current = (std::fs::read(csv).unwrap(), stdout(&validate), stdout(&feq));
        if let Some(p) = &previous {
            assert_eq!(p, &current);
        }
        previous = Some(current);
    }
}

#[test]
fn missing_seed_is_generated_and_printed() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), &real_spec());
    let first = gelfand(&["validate", "--in", &spec, "--trials", "2"]);
    assert_eq!(first.status.code(), Some(0));
    let err = stderr(&first);
    let seed = err
        .lines()
        .find_map(|l| l.strip_prefix("seed: "))
        .unwrap_or_else(|| panic!("no seed printed: {err}"))
        .trim()
        .to_string();
    assert_eq!(json(&first)["seed"].as_u64().unwrap().to_string(), seed);
    let again = gelfand(&["validate", "--in", &spec, "--trials", "2", "--seed", &seed]);
    assert_eq!(stdout(&first), stdout(&again));
}

#[test]
fn catalog_lists_leaves() {
    let out = gelfand(&["catalog"]);
    assert_eq!(out.status.code(), Some(0));
    let listing = json(&out);
    assert_eq!(listing["schema_version"], 1);
    let leaves = listing["leaves"].as_array().unwrap();
    assert!(leaves.len() >= 6);
    assert!(leaves.iter().all(|l| !l["provenance"].as_str().unwrap().is_empty()));
}

#[test]
fn expand_report_goes_to_stderr_without_out() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), &real_spec());
    let out = gelfand(&["expand", "--in", &spec, "--max-degree", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("index,u,re,im\n"));
    let report: Value = serde_json::from_str(&stderr(&out)).unwrap();
    assert_eq!(report["check"], "expand");
    // degree-3 truncation holds every term, so nothing is missing
    assert!(report["result"]["tail_bound"].as_f64().unwrap() < 1e-12);
}

#[test]
fn expand_below_spec_degree_reports_the_missing_mass() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), &real_spec());
    let out = gelfand(&["expand", "--in", &spec, "--max-degree", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_str(&stderr(&out)).unwrap();
    // the degree-3 term carries 0.4 at the identity
    assert!((report["result"]["tail_bound"].as_f64().unwrap() - 0.4).abs() < 1e-12, "{report}");
}

//! Command implementations. Each returns a JSON or CSV artifact and whether
//! the job's checks passed.

use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};

use gelfand::expansion::ProductKernel;
use gelfand::format::{
    element_to_text, fmt_f64, group_to_text, index_to_text, pair_to_text, parse_element, point_to_text,
    COEFFICIENT_HEADER,
};
use gelfand::pd::{catalog, certify_pd_with, CertifyOptions};
use gelfand::seed::{stream, trial_seed};
use gelfand::tolerance::TAIL_SLACK;
use gelfand::verify::{functional_equation_residuals, KernelMatrixJob};
use gelfand::{
    expand_kernel, kernel_psd_check, orthogonality_residual, sample_sphere_points,
    CoefficientTable, Complex64, DoubleCosetPoint, Error, FieldSampler, GroupDescriptor, GroupElement, KernelSpec,
    PairDescriptor, VerificationReport, SCHEMA_VERSION,
};
use serde_json::json;

use crate::config::{Command, JobConfig};

/// Failure modes of a job, mapped to exit status 1 by the binary.
#[derive(Debug)]
pub enum JobError {
    Io(PathBuf, std::io::Error),
    Usage(String),
    Library(Error),
}

impl std::fmt::Display for JobError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            JobError::Io(path, e) => write!(f, "{}: {e}", path.display()),
            JobError::Usage(m) => write!(f, "{m}"),
            JobError::Library(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for JobError {}

impl From<Error> for JobError {
    fn from(e: Error) -> Self {
        JobError::Library(e)
    }
}

pub type JobResult<T> = Result<T, JobError>;

/// Where a text artifact goes.
#[derive(Debug, Clone, PartialEq)]
pub enum Sink {
    Stdout,
    Stderr,
    File(PathBuf),
}

/// Artifacts of a finished job, written in order by the caller.
#[derive(Debug)]
pub struct Outcome {
    pub passed: bool,
    pub artifacts: Vec<(Sink, String)>,
}

fn read(path: &Path) -> JobResult<String> {
    fs::read_to_string(path).map_err(|e| JobError::Io(path.to_path_buf(), e))
}

fn primary_sink(config: &JobConfig) -> Sink {
    config.out.clone().map_or(Sink::Stdout, Sink::File)
}

/// Secondary reports go to stdout when the primary artifact is in a file.
fn report_sink(config: &JobConfig) -> Sink {
    if config.out.is_some() {
        Sink::Stdout
    } else {
        Sink::Stderr
    }
}

fn seed_of(config: &JobConfig) -> u64 {
    config.seed.expect("randomized commands get a seed before running")
}

fn to_pretty(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn load_spec(config: &JobConfig) -> JobResult<KernelSpec> {
    let path = config.input.as_ref().ok_or_else(|| JobError::Usage("missing --in".into()))?;
    let spec = KernelSpec::from_json(&read(path)?)
        .map_err(|e| JobError::Usage(format!("{}: not a kernel spec: {e}", path.display())))?;
    check_matches(config, spec.pair(), spec.group())?;
    Ok(spec)
}

fn check_matches(config: &JobConfig, pair: &PairDescriptor, group: GroupDescriptor) -> JobResult<()> {
    if let Some(p) = &config.pair {
        if p != pair {
            return Err(JobError::Usage(format!(
                "--pair {} does not match the input pair {}",
                pair_to_text(p),
                pair_to_text(pair)
            )));
        }
    }
    if let Some(g) = config.group {
        if g != group {
            return Err(JobError::Usage(format!(
                "--group {} does not match the input group {}",
                group_to_text(g),
                group_to_text(group)
            )));
        }
    }
    Ok(())
}

fn parse_elements(config: &JobConfig, group: GroupDescriptor) -> JobResult<Vec<GroupElement>> {
    config
        .u
        .iter()
        .map(|t| parse_element(group, t).map_err(|e| JobError::Usage(format!("--u {t:?}: {e}"))))
        .collect()
}

fn envelope(config: &JobConfig, check: &str, result: serde_json::Value, passed: bool) -> String {
    to_pretty(&VerificationReport::new(check, config.to_json_value(), result, config.seed, passed))
}

pub fn run(config: &JobConfig) -> JobResult<Outcome> {
    match config.command {
        Command::Expand => expand(config),
        Command::Synthesize => synthesize(config),
        Command::Validate => validate(config),
        Command::Orthotest => orthotest(config),
        Command::Feqtest => feqtest(config),
        Command::Simulate => simulate(config),
        Command::Catalog => catalog_listing(config),
    }
}

fn expand(config: &JobConfig) -> JobResult<Outcome> {
    let spec = load_spec(config)?;
    let pair = spec.pair().clone();
    let group = spec.group();
    let mut us = vec![group.identity()];
    for u in parse_elements(config, group)? {
        if !us.contains(&u) {
            us.push(u);
        }
    }
    let indices = pair.enumerate_indices(config.max_degree);
    let rule = pair.rule_with_order(config.max_degree, config.order)?;
    let table = expand_kernel(&spec, &indices, &us, &rule)?;

    let full_mass = spec.eval(&pair.identity_point(), &group.identity())?.re;
    let extracted = table.identity_mass().unwrap_or(0.0);
    let tail = full_mass - extracted;
    let max_excess = table.max_excess.unwrap_or(0.0);
    let consistent = tail >= -TAIL_SLACK;
    let passed = consistent && max_excess <= config.tolerance;
    let result = json!({
        "pair": pair_to_text(&pair),
        "group": group_to_text(group),
        "indices": indices.len(),
        "group_elements": us.len(),
        "rows": table.entries.len(),
        "full_mass": full_mass,
        "extracted_mass": extracted,
        "tail_bound": tail.max(0.0),
        "tail_consistent": consistent,
        "max_excess": max_excess,
    });
    Ok(Outcome {
        passed,
        artifacts: vec![
            (primary_sink(config), table.to_csv()),
            (report_sink(config), envelope(config, "expand", result, passed)),
        ],
    })
}

/// Evaluation grid on the double-coset space: `n` points per real axis,
/// `n` radii times `n` angles on the disc, `n` angles per torus axis and
/// the tensor grid for products.
pub fn coset_grid(pair: &PairDescriptor, n: usize) -> Vec<DoubleCosetPoint> {
    let unit = |j: usize| if n == 1 { 1.0 } else { -1.0 + 2.0 * j as f64 / (n - 1) as f64 };
    match pair {
        PairDescriptor::RealSphere { .. } => (0..n).map(|j| DoubleCosetPoint::Real(unit(j))).collect(),
        PairDescriptor::ComplexSphere { .. } => {
            if n == 1 {
                return vec![DoubleCosetPoint::Complex(Complex64::new(1.0, 0.0))];
            }
            let mut out = vec![DoubleCosetPoint::Complex(Complex64::new(0.0, 0.0))];
            for i in 1..n {
                let r = i as f64 / (n - 1) as f64;
                for j in 0..n {
                    out.push(DoubleCosetPoint::Complex(Complex64::from_polar(r, TAU * j as f64 / n as f64)));
                }
            }
            out
        }
        PairDescriptor::TorusGroup { n: axes } => {
            let mut out = vec![Vec::new()];
            for _ in 0..*axes {
                out = out
                    .into_iter()
                    .flat_map(|prefix: Vec<f64>| {
                        (0..n).map(move |j| {
                            let mut p = prefix.clone();
                            p.push(TAU * j as f64 / n as f64);
                            p
                        })
                    })
                    .collect();
            }
            out.into_iter().map(DoubleCosetPoint::Torus).collect()
        }
        PairDescriptor::ProductPair { left, right } => {
            let rs = coset_grid(right, n);
            coset_grid(left, n)
                .into_iter()
                .flat_map(|l| rs.iter().map(move |r| DoubleCosetPoint::product(l.clone(), r.clone())))
                .collect()
        }
    }
}

fn synthesize(config: &JobConfig) -> JobResult<Outcome> {
    let path = config.input.as_ref().ok_or_else(|| JobError::Usage("missing --in".into()))?;
    let text = read(path)?;
    let grid_of = |pair: &PairDescriptor| coset_grid(pair, config.grid);
    let mut csv = String::from("point,u,re,im\n");
    let mut emit = |point: &DoubleCosetPoint, u: &GroupElement, v: Complex64| {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            point_to_text(point),
            element_to_text(u),
            fmt_f64(v.re),
            fmt_f64(v.im)
        ));
    };
    if text.starts_with(COEFFICIENT_HEADER) {
        let (Some(pair), Some(group)) = (&config.pair, config.group) else {
            return Err(JobError::Usage("a coefficient CSV input needs --pair and --group".into()));
        };
        let table = CoefficientTable::from_csv(pair, group, &text)
            .map_err(|e| JobError::Usage(format!("{}: {e}", path.display())))?;
        let us = if config.u.is_empty() { table.u_values() } else { parse_elements(config, group)? };
        let grid = grid_of(pair);
        for u in &us {
            for p in &grid {
                emit(p, u, table.synthesize(p, u)?);
            }
        }
    } else {
        let spec = KernelSpec::from_json(&text)
            .map_err(|e| JobError::Usage(format!("{}: neither a coefficient CSV nor a kernel spec: {e}", path.display())))?;
        check_matches(config, spec.pair(), spec.group())?;
        let group = spec.group();
        let us = if config.u.is_empty() { vec![group.identity()] } else { parse_elements(config, group)? };
        let grid = grid_of(spec.pair());
        for u in &us {
            for p in &grid {
                emit(p, u, gelfand::synthesize(&spec, p, u)?);
            }
        }
    }
    Ok(Outcome { passed: true, artifacts: vec![(primary_sink(config), csv)] })
}

fn validate(config: &JobConfig) -> JobResult<Outcome> {
    let spec = load_spec(config)?;
    let seed = seed_of(config);
    let job = KernelMatrixJob {
        kernel: &spec,
        n_points: config.points,
        trials: config.trials,
        seed,
        group_half_width: None,
        tolerance: Some(config.tolerance),
    };
    let outcome = kernel_psd_check(&job)?;
    let mut passed = outcome.report.passed();
    let mut kernel = json!({ "report": outcome.report });
    if !outcome.report.passed() {
        kernel["worst_points"] = serde_json::to_value(&outcome.worst_points).expect("points serialize");
    }
    let mut coefficients = Vec::new();
    for (i, term) in spec.terms().iter().enumerate() {
        let report = certify_pd_with(
            &term.pd_function,
            CertifyOptions {
                trials: config.trials,
                n_points: config.points,
                seed: trial_seed(seed, i as u64 + 1),
                half_width: None,
                tolerance: Some(config.tolerance),
            },
        )?;
        passed &= report.passed();
        coefficients.push(json!({
            "index": index_to_text(&term.index),
            "provenance": term.pd_function.provenance(),
            "report": report,
        }));
    }
    let result = json!({ "kernel": kernel, "coefficients": coefficients });
    Ok(Outcome { passed, artifacts: vec![(primary_sink(config), envelope(config, "validate", result, passed))] })
}

fn required_pair(config: &JobConfig) -> JobResult<&PairDescriptor> {
    config.pair.as_ref().ok_or_else(|| JobError::Usage(format!("{} needs --pair", config.command.name())))
}

fn orthotest(config: &JobConfig) -> JobResult<Outcome> {
    let pair = required_pair(config)?;
    let indices = pair.enumerate_indices(config.max_degree);
    let rule = pair.rule_with_order(config.max_degree, config.order)?;
    let mut rows = Vec::new();
    let mut max = 0.0f64;
    for (a, i) in indices.iter().enumerate() {
        for j in &indices[a..] {
            let r = orthogonality_residual(pair, i, j, &rule)?;
            max = max.max(r);
            rows.push(json!({ "left": index_to_text(i), "right": index_to_text(j), "residual": r }));
        }
    }
    let passed = max <= config.tolerance;
    let result = json!({
        "indices": indices.len(),
        "max_residual": max,
        "tolerance": config.tolerance,
        "residuals": rows,
    });
    Ok(Outcome { passed, artifacts: vec![(primary_sink(config), envelope(config, "orthotest", result, passed))] })
}

fn feqtest(config: &JobConfig) -> JobResult<Outcome> {
    let pair = required_pair(config)?;
    let seed = seed_of(config);
    let indices = pair.enumerate_indices(config.max_degree);
    let mut max = 0.0f64;
    let mut cases = Vec::new();
    for case in 0..config.points as u64 {
        let case_seed = trial_seed(seed, case);
        let xy = sample_sphere_points(pair, 2, case_seed)?;
        let residuals = functional_equation_residuals(pair, &indices, &xy[0], &xy[1], config.samples, trial_seed(case_seed, 0))?;
        max = residuals.iter().copied().fold(max, f64::max);
        cases.push(json!({
            "x": xy[0],
            "y": xy[1],
            "residuals": indices.iter().zip(&residuals).map(|(i, r)| json!({ "index": index_to_text(i), "residual": r })).collect::<Vec<_>>(),
        }));
    }
    let passed = max <= config.tolerance;
    let result = json!({
        "mc_samples": config.samples,
        "max_residual": max,
        "tolerance": config.tolerance,
        "cases": cases,
    });
    Ok(Outcome { passed, artifacts: vec![(primary_sink(config), envelope(config, "feqtest", result, passed))] })
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_os_string();
    name.push(".meta.json");
    PathBuf::from(name)
}

fn simulate(config: &JobConfig) -> JobResult<Outcome> {
    let spec = load_spec(config)?;
    let seed = seed_of(config);
    let pair = spec.pair();
    let group = spec.group();
    let sphere = sample_sphere_points(pair, config.points, trial_seed(seed, 0))?;
    let elements = if config.u.is_empty() {
        let mut rng = stream(trial_seed(seed, 1));
        (0..config.points).map(|_| group.sample(&mut rng, group.default_half_width())).collect()
    } else {
        let us = parse_elements(config, group)?;
        if us.len() != config.points {
            return Err(JobError::Usage(format!(
                "--u lists {} group elements but --points is {}",
                us.len(),
                config.points
            )));
        }
        us
    };
    let points = sphere.into_iter().zip(elements).collect();
    let sampler = match FieldSampler::new(&spec, points) {
        Ok(s) => s,
        Err(Error::Indefinite { report }) => {
            let result = json!({ "refused": "covariance matrix is indefinite", "report": report });
            return Ok(Outcome {
                passed: false,
                artifacts: vec![(Sink::Stdout, envelope(config, "simulate", result, false))],
            });
        }
        Err(e) => return Err(e.into()),
    };
    let sample = sampler.draw(seed);
    let sidecar = to_pretty(&sampler.sidecar(&sample));
    let sidecar_sink = config.out.as_deref().map_or(Sink::Stderr, |o| Sink::File(sidecar_path(o)));
    Ok(Outcome { passed: true, artifacts: vec![(primary_sink(config), sample.to_csv()), (sidecar_sink, sidecar)] })
}

fn catalog_listing(config: &JobConfig) -> JobResult<Outcome> {
    let listing = json!({ "schema_version": SCHEMA_VERSION, "leaves": catalog() });
    Ok(Outcome { passed: true, artifacts: vec![(primary_sink(config), to_pretty(&listing))] })
}

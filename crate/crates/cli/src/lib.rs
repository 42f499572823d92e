//! Batch jobs over the `gelfand` library: expansion, synthesis, kernel
//! validation, identity checks and field simulation.
//!
//! Exit status: 0 when every check passes, 2 when a verification check
//! fails, 1 on usage, configuration or input errors.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use commands::{JobError, Sink};
use config::{parse_config_file, ConfigFile, Descriptor, JobConfig};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "gelfand", version, about = "Positive definite kernels on Gelfand pairs times groups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Extract expansion coefficients of a kernel spec; writes a coefficient CSV and a tail-bound report
    Expand(JobArgs),
    /// Evaluate a kernel spec or a coefficient CSV on a grid of double cosets
    Synthesize(JobArgs),
    /// Random Gram-matrix test of a kernel spec and of each of its coefficient functions
    Validate(JobArgs),
    /// Orthogonality residuals of spherical functions under the quadrature rule
    Orthotest(JobArgs),
    /// Monte Carlo residuals of the spherical product formula
    Feqtest(JobArgs),
    /// Draw a Gaussian random field with a kernel spec as covariance
    Simulate(JobArgs),
    /// List the positive definite leaf functions
    Catalog(JobArgs),
    /// Run the command named in a config file
    Run(JobArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct JobArgs {
    /// TOML job file; flags override its keys
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// real:<d> | complex:<q> | torus:<N> | product:<pair>,<pair>
    #[arg(long)]
    pub pair: Option<String>,
    /// euclidean:<k> | integers:<k> | circle:<N> | cyclic:<M> | trivial
    #[arg(long)]
    pub group: Option<String>,
    /// Radial quadrature order (default max degree + 8)
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long)]
    pub max_degree: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Group element, e.g. `0.5;-1`; repeatable
    #[arg(long, allow_hyphen_values = true)]
    pub u: Vec<String>,
    /// Grid points per axis for synthesize
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Points per Gram matrix, (x, y) cases for feqtest, or field points for simulate
    #[arg(long)]
    pub points: Option<usize>,
    /// Monte Carlo samples for feqtest
    #[arg(long)]
    pub samples: Option<usize>,
    /// Print the effective configuration as TOML and exit
    #[arg(long)]
    pub print_config: bool,
}

impl JobArgs {
    fn to_file(&self, command: Option<&str>) -> ConfigFile {
        ConfigFile {
            command: command.map(str::to_string),
            pair: self.pair.clone().map(Descriptor::Text),
            group: self.group.clone().map(Descriptor::Text),
            order: self.order,
            max_degree: self.max_degree,
            seed: self.seed,
            tolerance: self.tolerance,
            input: self.input.clone(),
            out: self.out.clone(),
            u: if self.u.is_empty() { None } else { Some(self.u.clone()) },
            grid: self.grid,
            trials: self.trials,
            points: self.points,
            samples: self.samples,
        }
    }
}

/// Builds the effective configuration from a config file and flags.
pub fn resolve(command: Option<&str>, args: &JobArgs) -> Result<JobConfig, String> {
    let file = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            parse_config_file(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => ConfigFile::default(),
    };
    if let (Some(cmd), Some(file_cmd)) = (command, &file.command) {
        if cmd != file_cmd {
            return Err(format!("command: the config file names {file_cmd:?} but the subcommand is {cmd:?}"));
        }
    }
    JobConfig::from_file(file.overridden_by(args.to_file(command))).map_err(|e| e.to_string())
}

fn write_sink(sink: &Sink, text: &str) -> Result<(), JobError> {
    match sink {
        Sink::Stdout => std::io::stdout().write_all(text.as_bytes()).map_err(|e| JobError::Io("<stdout>".into(), e)),
        Sink::Stderr => std::io::stderr().write_all(text.as_bytes()).map_err(|e| JobError::Io("<stderr>".into(), e)),
        Sink::File(path) => std::fs::write(path, text).map_err(|e| JobError::Io(path.clone(), e)),
    }
}

/// Parses arguments, runs the job and returns the process exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    let (name, args) = match &cli.command {
        CliCommand::Expand(a) => (Some("expand"), a),
        CliCommand::Synthesize(a) => (Some("synthesize"), a),
        CliCommand::Validate(a) => (Some("validate"), a),
        CliCommand::Orthotest(a) => (Some("orthotest"), a),
        CliCommand::Feqtest(a) => (Some("feqtest"), a),
        CliCommand::Simulate(a) => (Some("simulate"), a),
        CliCommand::Catalog(a) => (Some("catalog"), a),
        CliCommand::Run(a) => (None, a),
    };
    let mut config = match resolve(name, args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if let Some(seed) = config.ensure_seed() {
        eprintln!("seed: {seed}");
    }
    if args.print_config {
        print!("{}", config.to_toml());
        return EXIT_PASS;
    }
    let outcome = match commands::run(&config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    for (sink, text) in &outcome.artifacts {
        if let Err(e) = write_sink(sink, text) {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    }
    if outcome.passed {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

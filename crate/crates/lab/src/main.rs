use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mfselect_core::control::{
    default_start_lattice, enumerate_stationary, value_function, DescentOptions, ShootingOptions,
};
use mfselect_core::meanfield::{io, FieldProblem, FieldSetup};
use mfselect_core::potentials::{InitialLaw, ModelFamily, ModelOptions, ModelSpec};
use mfselect_lab::{replay, scenarios, write_outputs, LabError, ScenarioConfig};

#[derive(Parser)]
#[command(name = "mfselect", version, about = "Selection experiments for finite-player potential mean-field games")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config; exit code 2 when a verdict fails.
    Run {
        config: PathBuf,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Also write an SVG chart of the key metric.
        #[arg(long)]
        plots: bool,
    },
    /// List the stationary points of the deterministic control problem.
    OcEnumerate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 0.0)]
        t0: f64,
    },
    /// Value function by shooting with a descent cross-check.
    OcValue {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 0.0)]
        t0: f64,
    },
    /// Decoupling-field solves and exports.
    #[command(subcommand)]
    Field(FieldCommand),
    /// Recompute a report row, given as `<csv>:<row>`, and compare it cell by cell.
    Replay { target: String },
}

#[derive(Subcommand)]
enum FieldCommand {
    /// Solve a field and save it in the binary field format.
    Solve {
        #[command(flatten)]
        model: ModelArgs,
        /// Number of players.
        #[arg(long, conflicts_with_all = ["eps", "limit"])]
        n: Option<usize>,
        /// Common-noise intensity.
        #[arg(long, conflicts_with = "limit")]
        eps: Option<f64>,
        /// Noiseless limit field.
        #[arg(long)]
        limit: bool,
        #[arg(long)]
        half_width: Option<f64>,
        #[arg(long, default_value_t = 0.02)]
        spacing: f64,
        #[arg(long, default_value_t = 1000)]
        max_levels: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the time slice `u(t, ·)` of a saved field as CSV.
    Export {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ModelArgs {
    /// Catalogue name such as `logcosh(4)` or `radial_logcosh(4,2)`.
    #[arg(long)]
    model: String,
    #[arg(long, default_value_t = 0.0)]
    drift: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    horizon: f64,
    /// Initial mean, one value or one per axis.
    #[arg(long, value_delimiter = ',', default_value = "0", allow_hyphen_values = true)]
    nu0: Vec<f64>,
    /// Initial law around the mean: `gaussian` or `dirac`.
    #[arg(long, default_value = "gaussian")]
    initial: String,
}

impl ModelArgs {
    fn spec(&self) -> Result<ModelSpec, LabError> {
        let initial = match self.initial.as_str() {
            "gaussian" => InitialLaw::default(),
            "dirac" => InitialLaw::Dirac,
            other => return Err(LabError::Config(format!("unknown initial law {other:?}"))),
        };
        let opts = ModelOptions {
            drift: self.drift,
            sigma: self.sigma,
            horizon: self.horizon,
            nu0: self.nu0.clone(),
            initial,
        };
        Ok(ModelFamily::parse(&self.model)?.build(&opts)?)
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(";")
}

fn run(cli: Cli) -> Result<ExitCode, LabError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| LabError::Config(e.to_string()))?;
    }
    match cli.command {
        Command::Run { config, seed, out_dir, plots } => {
            let mut cfg = ScenarioConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.scenario.seed = s;
            }
            let dir = out_dir
                .or_else(|| cfg.scenario.out_dir.as_ref().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("out"));
            let report = scenarios::run(&cfg)?;
            for f in write_outputs(&report, &cfg, &dir, plots)? {
                eprintln!("wrote {}", f.display());
            }
            print!("{}", report.summary());
            Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Command::OcEnumerate { model, t0 } => {
            let spec = model.spec()?;
            let starts = default_start_lattice(&spec, t0, &spec.nu0);
            let set = enumerate_stationary(&spec, t0, &spec.nu0, &starts, &ShootingOptions::default())?;
            println!("index,classification,cost,eta0,m_T,adjoint_variation,residual");
            for (i, s) in set.solutions.iter().enumerate() {
                println!(
                    "{i},{},{:?},{},{},{:?},{:?}",
                    s.classification.as_str(),
                    s.cost,
                    join(s.eta0().as_slice()),
                    join(s.terminal().as_slice()),
                    s.adjoint_variation(),
                    s.residual
                );
            }
            eprintln!("{} starts, {} failed, {} minimizer(s)", set.starts, set.failed_starts, set.multiplicity);
            Ok(ExitCode::SUCCESS)
        }
        Command::OcValue { model, t0 } => {
            let spec = model.spec()?;
            let report = value_function(&spec, t0, &spec.nu0, &ShootingOptions::default(), &DescentOptions::default())?;
            println!("value,{:?}", report.value);
            if let Some(d) = report.descent {
                println!("descent,{d:?}");
            }
            if let Some(w) = &report.warning {
                eprintln!("warning: {w}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Field(FieldCommand::Solve { model, n, eps, limit, half_width, spacing, max_levels, out }) => {
            let spec = model.spec()?;
            let problem = match (n, eps, limit) {
                (Some(n), None, false) => FieldProblem::players(&spec, n)?,
                (None, Some(e), false) => FieldProblem::common_noise(e)?,
                (None, None, true) => FieldProblem::limit(),
                _ => return Err(LabError::Config("choose exactly one of --n, --eps, --limit".into())),
            };
            let setup = FieldSetup { half_width, spacing, max_stored_levels: max_levels, ..Default::default() };
            let field = setup.solve(&spec, problem)?;
            io::save_field(&field, &out)?;
            eprintln!(
                "wrote {} ({} nodes, {} stored levels)",
                out.display(),
                field.grid.len(),
                field.values.len()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Field(FieldCommand::Export { input, t, out }) => {
            let field = io::load_field(&input)?;
            match out {
                Some(path) => io::write_field_slice(&field, t, std::fs::File::create(path)?)?,
                None => io::write_field_slice(&field, t, std::io::stdout().lock())?,
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Replay { target } => {
            let (path, row) = replay::parse_target(&target)?;
            let outcome = replay::replay(&path, row)?;
            if outcome.identical() {
                println!("row {row} ({}) reproduced exactly", outcome.label);
                Ok(ExitCode::SUCCESS)
            } else {
                for m in &outcome.mismatches {
                    println!("{}: recorded {} recomputed {}", m.column, m.recorded, m.recomputed);
                }
                Ok(ExitCode::from(2))
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

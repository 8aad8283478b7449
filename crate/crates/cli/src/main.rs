use std::fs::{self, File};
use std::io::{self, BufWriter};
use std::path::Path;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use markov_aloha_cli::csv::write_csv;
use markov_aloha_cli::experiment::{run_experiment, sweep_points};
use markov_aloha_cli::presets::{description, preset, PRESETS};
use markov_aloha_cli::spec::{parse_spec_with, ExperimentSpec};

#[derive(Parser)]
#[command(
    name = "markov-aloha",
    version,
    about = "Remote monitoring of Markov sources over slotted ALOHA"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep and write CSV.
    Run {
        /// Spec file, or the name of a bundled preset.
        spec: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Check a spec and print its sweep size.
    Validate {
        spec: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// List the bundled presets.
    ListPresets,
}

/// One flag per configuration key. Lists are comma separated; sources are
/// written `q01:q10`.
#[derive(Args, Default)]
struct Overrides {
    #[arg(long)]
    name: Option<String>,
    /// Output CSV path (stdout if absent here and in the config file).
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    nodes: Option<String>,
    #[arg(long)]
    sources: Option<String>,
    #[arg(long)]
    strategies: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    routes: Option<String>,
    #[arg(long)]
    llr_max: Option<String>,
    #[arg(long)]
    points: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    max_iter: Option<String>,
    #[arg(long)]
    projection: Option<String>,
    #[arg(long)]
    horizon: Option<String>,
    #[arg(long)]
    burn_in: Option<String>,
    #[arg(long)]
    replications: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    estimators: Option<String>,
}

impl Overrides {
    fn pairs(&self) -> Vec<(String, String)> {
        [
            ("name", &self.name),
            ("out", &self.out),
            ("nodes", &self.nodes),
            ("sources", &self.sources),
            ("strategies", &self.strategies),
            ("alpha", &self.alpha),
            ("routes", &self.routes),
            ("llr-max", &self.llr_max),
            ("points", &self.points),
            ("tol", &self.tol),
            ("max-iter", &self.max_iter),
            ("projection", &self.projection),
            ("horizon", &self.horizon),
            ("burn-in", &self.burn_in),
            ("replications", &self.replications),
            ("seed", &self.seed),
            ("estimators", &self.estimators),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
        .collect()
    }
}

fn load(spec: &str, overrides: &Overrides) -> Result<ExperimentSpec, String> {
    let text = if Path::new(spec).is_file() {
        fs::read_to_string(spec).map_err(|e| format!("{spec}: {e}"))?
    } else if let Some(t) = preset(spec) {
        t.to_string()
    } else {
        return Err(format!("{spec}: no such file or preset"));
    };
    parse_spec_with(&text, &overrides.pairs()).map_err(|e| format!("{spec}: {e}"))
}

fn run(spec: &ExperimentSpec) -> Result<bool, String> {
    let out = run_experiment(spec);
    match &spec.out {
        Some(path) => {
            let f = File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
            write_csv(BufWriter::new(f), &out.rows)
                .map_err(|e| format!("{}: {e}", path.display()))?;
            eprintln!("wrote {} rows to {}", out.rows.len(), path.display());
        }
        None => write_csv(io::stdout().lock(), &out.rows).map_err(|e| e.to_string())?,
    }
    for f in &out.failures {
        eprintln!("error: {f}");
    }
    Ok(out.failures.is_empty())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::ListPresets => {
            for (name, text) in PRESETS {
                println!("{name}\t{}", description(text));
            }
            Ok(true)
        }
        Command::Validate { spec, overrides } => load(&spec, &overrides).map(|s| {
            println!(
                "{}: {} sweep points, routes {}",
                s.name,
                sweep_points(&s).len(),
                s.routes
                    .iter()
                    .map(|r| r.name())
                    .collect::<Vec<_>>()
                    .join(",")
            );
            true
        }),
        Command::Run { spec, overrides } => load(&spec, &overrides).and_then(|s| run(&s)),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

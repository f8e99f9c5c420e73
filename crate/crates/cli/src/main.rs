use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use specavg::harness::{
    generate_dataset, generate_test_points, invariance_discrepancy, run_experiment, write_csv_file,
    DiscrepancyOptions, ExperimentConfig, MethodConfig, RunOptions,
};
use specavg::{fit, krr_fit, Error, Kernel, KrrModel, Predictor, Result, SpectralModel};

#[derive(Parser)]
#[command(
    name = "specavg",
    version,
    about = "Group-invariant spectral regression on the torus and circle"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one method on the first (n, seed) of a config and save the model.
    Fit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Method name as written in the CSV; defaults to the config's first method.
        #[arg(long)]
        method: Option<String>,
        /// Cutoff (Spec-Avg sweep) or ridge (KRR); defaults to the first listed.
        #[arg(long)]
        hyperparam: Option<f64>,
    },
    /// Evaluate a saved model at one point.
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// Comma-separated coordinates, e.g. "0.1,-0.4".
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Invariance discrepancy of a saved model on the config's test points.
    Discrepancy {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        config: PathBuf,
    },
    /// Run every cell of a config and write the metrics CSV.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record wall-clock time per fit (makes the CSV nondeterministic).
        #[arg(long)]
        timing: bool,
    },
    /// Run the numerical self-checks.
    Verify,
}

enum Model {
    Spectral(SpectralModel),
    Krr(KrrModel),
}

impl Model {
    fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        match SpectralModel::from_json(&text) {
            Ok(m) => Ok(Model::Spectral(m)),
            Err(spectral_err) => KrrModel::from_json(&text)
                .map(Model::Krr)
                .map_err(|krr_err| {
                    Error::Config(format!(
                    "{} is neither a spectral model ({spectral_err}) nor a KRR model ({krr_err})",
                    path.display()
                ))
                }),
        }
    }

    fn predictor(&self) -> &dyn Predictor {
        match self {
            Model::Spectral(m) => m,
            Model::Krr(m) => m,
        }
    }
}

fn parse_point(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidArgument(format!("bad coordinate {t:?}: {e}")))
        })
        .collect()
}

fn fit_command(
    config: &Path,
    out: &Path,
    method: Option<&str>,
    hyperparam: Option<f64>,
) -> Result<()> {
    let config = ExperimentConfig::load(config)?;
    let chosen = match method {
        None => &config.methods[0],
        Some(name) => config
            .methods
            .iter()
            .find(|m| m.name() == name)
            .ok_or_else(|| Error::Config(format!("no method named {name:?} in config")))?,
    };
    let (n, seed) = (config.n_train[0], config.seeds[0]);
    let data = generate_dataset(&config, n, seed)?;
    let json = match chosen {
        MethodConfig::SpecAvg { alpha, cutoffs, .. } => {
            let cutoff = match (hyperparam, cutoffs) {
                (Some(h), _) => Some(h as usize),
                (None, Some(c)) => Some(c[0]),
                (None, None) => None,
            };
            fit(
                &data,
                &config.manifold,
                &config.group,
                alpha.unwrap_or(2.0),
                cutoff,
            )?
            .to_json()?
        }
        MethodConfig::Krr { kernel, ridges, .. } => {
            let kernel = Kernel::new(
                kernel.to_spec(&config.manifold, &config.group)?,
                &config.manifold,
            )?;
            krr_fit(&data, &kernel, hyperparam.unwrap_or(ridges[0]))?.to_json()?
        }
    };
    std::fs::write(out, json)?;
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Fit {
            config,
            out,
            method,
            hyperparam,
        } => fit_command(&config, &out, method.as_deref(), hyperparam)?,
        Command::Predict { model, point } => {
            let model = Model::load(&model)?;
            let y = model.predictor().predict(&parse_point(&point)?)?;
            println!("{y:.17e}");
        }
        Command::Discrepancy { model, config } => {
            let model = Model::load(&model)?;
            let config = ExperimentConfig::load(&config)?;
            let test = generate_test_points(&config, config.seeds[0]);
            let opts = DiscrepancyOptions {
                seed: config.seeds[0],
                ..Default::default()
            };
            let d = invariance_discrepancy(model.predictor(), &test, &config.group, &opts)?;
            println!("invariance_discrepancy {:.17e}", d.value);
            println!("sampled {}", d.sampled);
        }
        Command::Experiment {
            config,
            out,
            timing,
        } => {
            let config = ExperimentConfig::load(&config)?;
            let opts = RunOptions {
                record_timing: timing,
                ..Default::default()
            };
            let rows = run_experiment(&config, &opts)?;
            let out = out.unwrap_or_else(|| config.output.clone());
            write_csv_file(&rows, &out)?;
            let failed = rows
                .iter()
                .filter(|r| !r.is_average() && r.error.is_some())
                .count();
            eprintln!("wrote {} rows to {}", rows.len(), out.display());
            if failed > 0 {
                eprintln!("{failed} cells failed; see the error column");
            }
        }
        Command::Verify => {
            let checks = specavg::verify::run_all()?;
            for c in &checks {
                println!("{c}");
            }
            return Ok(checks.iter().all(|c| c.passed));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

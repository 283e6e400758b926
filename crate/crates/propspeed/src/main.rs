use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use propspeed::pipeline::commands::{
    cmd_bem_gen, cmd_discover, cmd_estimate, cmd_evaluate, cmd_export_plot, cmd_fit, cmd_fit_eta,
    cmd_identify_gps,
};
use propspeed::pipeline::{ModelChoice, PipelineConfig, PipelineError, PlotKind};

/// Airspeed estimation for fixed-wing UAVs from propeller power and
/// rotational speed.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    /// Pipeline configuration file (flat key = value text).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Direct,
    Indirect,
}

impl From<ModelArg> for ModelChoice {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Direct => ModelChoice::Direct,
            ModelArg::Indirect => ModelChoice::Indirect,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PlotArg {
    CpJ,
    VaTime,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate the blade-element-momentum training grid CSV.
    BemGen {
        #[arg(long)]
        geometry: PathBuf,
        #[arg(long)]
        polar: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate the ESC-motor efficiency from BEM and flight data.
    FitEta {
        #[arg(long)]
        bem: PathBuf,
        #[arg(long)]
        flight: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Discover the sparse airspeed model structure with LASSO + CV.
    Discover {
        /// BEM dataset CSV or flight log CSV.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long)]
        out: PathBuf,
        /// Override the critical advance ratio used by the selection
        /// criterion instead of fitting it from the data.
        #[arg(long)]
        j_crit: Option<f64>,
    },
    /// Least-squares fit restricted to the published model supports.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        j_crit: Option<f64>,
    },
    /// Identify coefficients and wind from GPS earth-frame velocity.
    IdentifyGps {
        #[arg(long)]
        flight: PathBuf,
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long)]
        out: PathBuf,
        /// Use the recursive least-squares variant instead of the batch
        /// solve.
        #[arg(long)]
        rls: bool,
        /// Forgetting factor for --rls.
        #[arg(long, default_value_t = 1.0)]
        lambda_f: f64,
        /// Coefficient document used to seed the gate and the RLS state
        /// (e.g. a BEM-trained model).
        #[arg(long)]
        seed_coeffs: Option<PathBuf>,
    },
    /// Apply a coefficient document plus the runtime gate to a flight log.
    Estimate {
        #[arg(long)]
        flight: PathBuf,
        #[arg(long)]
        coeffs: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare an estimate CSV with pitot-corrected truth.
    Evaluate {
        #[arg(long)]
        flight: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Normalization range override for the NRMSE [m/s].
        #[arg(long)]
        range: Option<f64>,
    },
    /// Emit CSV series for external plotting.
    ExportPlot {
        #[arg(long, value_enum)]
        kind: PlotArg,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        flight: Option<PathBuf>,
        #[arg(long)]
        coeffs: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::from_file(path)
            .map_err(|e| PipelineError::Schema(e.to_string()))?,
        None => PipelineConfig::default(),
    };

    match cli.command {
        Command::BemGen { geometry, polar, out } => cmd_bem_gen(&geometry, &polar, &out, &cfg),
        Command::FitEta { bem, flight, out } => cmd_fit_eta(&bem, &flight, &out, &cfg),
        Command::Discover { data, model, out, j_crit } => {
            if j_crit.is_some() {
                cfg.j_crit_override = j_crit;
            }
            cmd_discover(&data, model.into(), &out, &cfg)
        }
        Command::Fit { data, model, out, j_crit } => {
            if j_crit.is_some() {
                cfg.j_crit_override = j_crit;
            }
            cmd_fit(&data, model.into(), &out, &cfg)
        }
        Command::IdentifyGps { flight, model, out, rls, lambda_f, seed_coeffs } => {
            cmd_identify_gps(
                &flight,
                model.into(),
                &out,
                &cfg,
                rls.then_some(lambda_f),
                seed_coeffs.as_deref(),
            )
        }
        Command::Estimate { flight, coeffs, out } => cmd_estimate(&flight, &coeffs, &out, &cfg),
        Command::Evaluate { flight, pred, out, range } => {
            cmd_evaluate(&flight, &pred, &out, &cfg, range).map(|_| ())
        }
        Command::ExportPlot { kind, data, flight, coeffs, out } => {
            let kind = match kind {
                PlotArg::CpJ => PlotKind::CpJ,
                PlotArg::VaTime => PlotKind::VaTime,
            };
            cmd_export_plot(kind, data.as_deref(), flight.as_deref(), coeffs.as_deref(), &out, &cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

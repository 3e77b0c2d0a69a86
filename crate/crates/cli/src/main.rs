use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nli_cli::analysis::run_analysis_to_dir;
use nli_cli::output::read_text;
use nli_cli::testset::write_testset;
use nli_cli::{run_compare, AnalyzeRequest, CliError, CompareRequest, CutSelection, ModelChoice, OracleChoice, TestSystemSpec};
use nli_core::engine::{CorrectionCoefficients, EngineSwitches, LossMode, RhoMode};
use nli_core::FintMode;

#[derive(Parser)]
#[command(name = "nli", version, about = "Closed-form GN-model nonlinear interference estimates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum LossArg {
    Auto,
    General,
    Flat,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Preset {
    Full,
    Desk,
}

#[derive(clap::Args)]
struct ModelArgs {
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(0..=1))]
    rho_coh: u8,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(0..=1))]
    rho_mci: u8,
    #[arg(long, default_value_t = RhoMode::Fitted)]
    rho_sci: RhoMode,
    #[arg(long, default_value_t = RhoMode::Fitted)]
    rho_xci: RhoMode,
    #[arg(long, default_value_t = FintMode::Asinh)]
    fint: FintMode,
    #[arg(long, value_enum, default_value_t = LossArg::Auto)]
    loss: LossArg,
    /// Whitespace-separated a1..a23; the built-in fit when omitted.
    #[arg(long)]
    coeffs: Option<PathBuf>,
}

impl ModelArgs {
    fn switches(&self) -> EngineSwitches {
        EngineSwitches {
            rho_coh: self.rho_coh == 1,
            rho_mci: self.rho_mci == 1,
            rho_sci: self.rho_sci,
            rho_xci: self.rho_xci,
            fint: self.fint,
            loss: match self.loss {
                LossArg::Auto => None,
                LossArg::General => Some(LossMode::General),
                LossArg::Flat => Some(LossMode::Flat),
            },
            ..EngineSwitches::default()
        }
    }

    fn coefficients(&self) -> Result<CorrectionCoefficients, CliError> {
        match &self.coeffs {
            Some(p) => Ok(CorrectionCoefficients::parse(&read_text(p)?)?),
            None => Ok(CorrectionCoefficients::default()),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// NLI and OSNR per channel of one link.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        /// Channel index, `all` or `config`.
        #[arg(long, default_value_t = CutSelection::All)]
        cut: CutSelection,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = OracleChoice::None)]
        oracle: OracleChoice,
        /// Fail with exit code 2 on model-validity warnings.
        #[arg(long)]
        strict: bool,
    },
    /// Randomized test systems as link configs.
    GenTestset {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        count: usize,
        /// TOML generator parameters; missing keys take the preset's values.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Preset::Full)]
        preset: Preset,
        #[arg(long)]
        out: PathBuf,
    },
    /// Closed form against the quadrature reference for every config in a directory.
    Compare {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = OracleChoice::Island)]
        oracle: OracleChoice,
        #[arg(long, value_enum, default_value_t = ModelChoice::Generic)]
        model: ModelChoice,
        #[command(flatten)]
        switches: CompareModel,
        #[arg(long)]
        rel_tol: Option<f64>,
    },
}

#[derive(clap::Args)]
struct CompareModel {
    #[arg(long, default_value_t = FintMode::Dilog)]
    fint: FintMode,
    #[arg(long)]
    coeffs: Option<PathBuf>,
}

fn spec_with_preset(preset: Preset, text: Option<&str>) -> Result<TestSystemSpec, CliError> {
    let base = match preset {
        Preset::Full => TestSystemSpec::default(),
        Preset::Desk => TestSystemSpec::desk(),
    };
    let Some(text) = text else { return Ok(base) };
    // keys in the file override the preset
    let mut merged: toml::Table = toml::from_str(&base.to_toml()).expect("spec serializes to a table");
    let user: toml::Table = toml::from_str(text).map_err(|e| CliError::Config(format!("test-set spec: {}", e.message())))?;
    merged.extend(user);
    TestSystemSpec::from_toml(&toml::to_string(&merged).expect("table serializes"))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze { config, cut, model, out, oracle, strict } => {
            let req = AnalyzeRequest {
                config_text: read_text(&config)?,
                cut,
                switches: model.switches(),
                coefficients: model.coefficients()?,
                oracle,
                strict,
            };
            let files = run_analysis_to_dir(&req, &out)?;
            for w in &files.warnings {
                eprintln!("warning: {w}");
            }
            eprintln!("wrote {} rows to {}", files.rows.len(), out.display());
        }
        Command::GenTestset { seed, count, spec, preset, out } => {
            let text = spec.as_deref().map(read_text).transpose()?;
            let mut spec = spec_with_preset(preset, text.as_deref())?;
            if let Some(seed) = seed {
                spec.seed = seed;
            }
            let systems = write_testset(&spec, count, &out)?;
            eprintln!("wrote {} systems to {}", systems.len(), out.display());
        }
        Command::Compare { input, out, oracle, model, switches, rel_tol } => {
            let coefficients = match &switches.coeffs {
                Some(p) => CorrectionCoefficients::parse(&read_text(p)?)?,
                None => CorrectionCoefficients::default(),
            };
            let req = CompareRequest { oracle, model, fint: switches.fint, coefficients, rel_tol, ..CompareRequest::default() };
            let (results, agg) = run_compare(&input, &out, &req)?;
            eprintln!(
                "{} systems, {} excluded; ERR mean {:.4} dB, std {:.4} dB, max |ERR| {:.4} dB",
                results.len(),
                agg.excluded,
                agg.mean_db,
                agg.std_db,
                agg.max_abs_db
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

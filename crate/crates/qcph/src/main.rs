use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use qcph::commands::{self, CommandError, InputFormat, ModelFile};
use qcph::RunConfig;
use qcph_core::verify::VerifyConfig;
use qcph_core::AtomSet;

/// Quotient-complex persistent homology descriptors for periodic crystals.
#[derive(Debug, Parser)]
#[command(name = "qcph", version)]
struct Cli {
    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for fold shuffles, tree subsampling and random instances.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct Descriptors {
    /// Atom-set tag, repeatable; replaces the configured list.
    #[arg(long = "atom-set")]
    atom_set: Vec<String>,
    /// Input format; guessed from the file extension otherwise.
    #[arg(long, value_enum)]
    format: Option<InputFormat>,
    /// Truncation scale T of the filtration, Å.
    #[arg(long)]
    max_filtration: Option<f64>,
    #[arg(long)]
    betti_bins: Option<usize>,
    #[arg(long)]
    max_dim: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the feature CSV of a set of structures.
    Features {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        descriptors: Descriptors,
        /// Structure files (.cif or .json).
        inputs: Vec<PathBuf>,
    },
    /// Write the plain and quotient barcodes of one structure or explicit filtration.
    Barcodes {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        descriptors: Descriptors,
        input: PathBuf,
    },
    /// Check the quotient barcode theorems on random instances.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 8)]
        max_points: usize,
        #[arg(long, default_value_t = 12)]
        grid_points: usize,
    },
    /// Fit a boosted-tree model on a feature CSV and a labels CSV.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        labels: PathBuf,
    },
    /// Predict with a trained model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeated k-fold cross-validation; writes a metrics JSON.
    Cv {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        folds: Option<usize>,
        #[arg(long)]
        repeats: Option<usize>,
    },
}

fn usage(msg: impl Into<String>) -> CommandError {
    CommandError::Usage(msg.into())
}

fn load_config(common: &Common) -> Result<RunConfig, CommandError> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("reading config {}: {e}", path.display())))?;
            RunConfig::from_json(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
        cfg.gbt.seed = seed;
    }
    Ok(cfg)
}

fn apply_descriptors(cfg: &mut RunConfig, d: &Descriptors) -> Result<Option<Vec<AtomSet>>, CommandError> {
    if let Some(t) = d.max_filtration {
        cfg.max_filtration = t;
    }
    if let Some(b) = d.betti_bins {
        cfg.betti_bins = b;
    }
    if let Some(m) = d.max_dim {
        cfg.max_dim = m;
    }
    let selection = if d.atom_set.is_empty() {
        None
    } else {
        cfg.atom_sets = d.atom_set.clone();
        Some(
            d.atom_set
                .iter()
                .map(|t| AtomSet::from_str(t).map_err(|_| usage(format!("unknown atom set {t:?}"))))
                .collect::<Result<Vec<_>, _>>()?,
        )
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(selection)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), CommandError> {
    let result = match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| anyhow::anyhow!("writing {}: {e}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes).and_then(|()| stdout.flush()).map_err(anyhow::Error::from)
        }
    };
    result.map_err(CommandError::Data)
}

fn run(command: Command) -> Result<(), CommandError> {
    let mut buf = Vec::new();
    let out = match command {
        Command::Features { common, descriptors, inputs } => {
            let mut cfg = load_config(&common)?;
            apply_descriptors(&mut cfg, &descriptors)?;
            let summary = commands::features(&inputs, descriptors.format, &cfg, &mut buf)?;
            log::info!("{} rows written, {} inputs skipped", summary.written, summary.skipped.len());
            common.out
        }
        Command::Barcodes { common, descriptors, input } => {
            let mut cfg = load_config(&common)?;
            let selection = apply_descriptors(&mut cfg, &descriptors)?;
            commands::barcodes(&input, descriptors.format, selection.as_deref(), &cfg, &mut buf)?;
            common.out
        }
        Command::Verify { common, trials, max_points, grid_points } => {
            let cfg = load_config(&common)?;
            if max_points < 2 || grid_points == 0 {
                return Err(usage("--max-points must be at least 2 and --grid-points at least 1"));
            }
            let vcfg = VerifyConfig { trials, seed: cfg.seed, grid_points, max_points, ..VerifyConfig::default() };
            let result = commands::verify(&vcfg, &mut buf);
            emit(common.out.as_deref(), &buf)?;
            return result.map(drop);
        }
        Command::Train { common, features, labels } => {
            let cfg = load_config(&common)?;
            cfg.validate().map_err(|e| usage(e.to_string()))?;
            let table = commands::read_feature_table(&features)?;
            let y = commands::aligned_labels(&table, &labels)?;
            let model = commands::train(&table, &y, &cfg)?;
            serde_json::to_writer(&mut buf, &model).map_err(|e| CommandError::Data(e.into()))?;
            buf.push(b'\n');
            common.out
        }
        Command::Predict { model, features, out } => {
            let text = std::fs::read_to_string(&model)
                .map_err(|e| CommandError::Data(anyhow::anyhow!("reading {}: {e}", model.display())))?;
            let model: ModelFile = serde_json::from_str(&text)
                .map_err(|e| CommandError::Data(anyhow::anyhow!("{}: {e}", model.display())))?;
            let table = commands::read_feature_table(&features)?;
            let predictions = commands::predict(&model, &table)?;
            qcph::formats::write_predictions(&mut buf, &table.ids, &predictions)
                .map_err(|e| CommandError::Data(e.into()))?;
            out
        }
        Command::Cv { common, features, labels, folds, repeats } => {
            let mut cfg = load_config(&common)?;
            if let Some(k) = folds {
                cfg.folds = k;
            }
            if let Some(r) = repeats {
                cfg.repeats = r;
            }
            let table = commands::read_feature_table(&features)?;
            let y = commands::aligned_labels(&table, &labels)?;
            let metrics = commands::cv(&table.x, &y, &cfg)?;
            serde_json::to_writer_pretty(&mut buf, &metrics).map_err(|e| CommandError::Data(e.into()))?;
            buf.push(b'\n');
            common.out
        }
    };
    emit(out.as_deref(), &buf)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

use std::error::Error as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aeaug_core::augment::AugmentMethod;
use aeaug_core::experiment::{
    load_dataset, prepare_splits, render_report, run_experiment, ExperimentConfig,
    ExperimentReport, RepetitionSeeds,
};
use aeaug_core::occ::DetectorKind;
use aeaug_core::{Error, Result};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "aeaug",
    version,
    about = "Latent augmentation experiments for one-class detectors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode, split and scale a dataset, writing train/val/test CSVs and
    /// the scaling parameters.
    Prepare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run every repetition and write report.json, boxplot.json,
    /// loss_history.csv and scores/.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to the config's `output`.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        repetitions: Option<usize>,
        /// Comma-separated subset of none,smote,adasyn,noise,ae_epochs.
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<AugmentMethod>>,
        /// Comma-separated subset of lof,kde,isf.
        #[arg(long, value_delimiter = ',')]
        detectors: Option<Vec<DetectorKind>>,
        /// Skip the per-run score files.
        #[arg(long)]
        no_scores: bool,
    },
    /// Print the aggregated table of a report (file or run directory).
    Report { path: PathBuf },
}

fn prepare(config: &Path, output: &Path, seed: Option<u64>) -> Result<()> {
    let mut cfg = ExperimentConfig::load(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.split.validate()?;
    let data = load_dataset(&cfg.dataset)?;
    // the same split repetition 0 of `run` would use
    let seeds = RepetitionSeeds::new(cfg.seed, 0);
    let spec = aeaug_core::data::SplitSpec {
        seed: seeds.split,
        ..cfg.split
    };
    let splits = prepare_splits(&data, &spec, cfg.train_subsample, seeds.subsample)?;
    splits.write(output)?;
    println!(
        "wrote {} train, {} val, {} test rows with {} features to {}",
        splits.train.n_rows(),
        splits.val.n_rows(),
        splits.test.n_rows(),
        splits.train.n_features(),
        output.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run(
    config: &Path,
    output: Option<PathBuf>,
    seed: Option<u64>,
    repetitions: Option<usize>,
    methods: Option<Vec<AugmentMethod>>,
    detectors: Option<Vec<DetectorKind>>,
    scores: bool,
) -> Result<()> {
    let mut cfg = ExperimentConfig::load(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(r) = repetitions {
        cfg.repetitions = r;
    }
    if let Some(m) = methods {
        cfg.methods = m;
    }
    if let Some(d) = detectors {
        cfg.detectors = d;
    }
    let output = output.or_else(|| cfg.output.clone()).ok_or_else(|| {
        Error::Config("no output directory: pass --output or set `output`".into())
    })?;
    let run = run_experiment(&cfg)?;
    run.write(&output, scores)?;
    print!("{}", render_report(&run.report));
    Ok(())
}

fn report(path: &Path) -> Result<()> {
    let file = if path.is_dir() {
        path.join("report.json")
    } else {
        path.to_path_buf()
    };
    let report = ExperimentReport::load(file)?;
    print!("{}", render_report(&report));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Prepare {
            config,
            output,
            seed,
        } => prepare(&config, &output, seed),
        Command::Run {
            config,
            output,
            seed,
            repetitions,
            methods,
            detectors,
            no_scores,
        } => run(
            &config,
            output,
            seed,
            repetitions,
            methods,
            detectors,
            !no_scores,
        ),
        Command::Report { path } => report(&path),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = e.source();
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}

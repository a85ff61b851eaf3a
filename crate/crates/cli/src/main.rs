//! `lowfault`: extract method metrics, train a low-fault-risk classifier,
//! predict and evaluate.

mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lowfault_core::PipelineConfig;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "lowfault", version, about = "Find methods with low fault risk using association rules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract per-method metrics from a tree of Java sources.
    Extract {
        source_dir: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Project name written to every row (default: the directory name).
        #[arg(long)]
        project: Option<String>,
    },
    /// Mark the methods listed in a label file (one method id per line) as faulty.
    Label {
        metrics: PathBuf,
        labels: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Train a classifier and write it as a model file.
    Train {
        dataset: PathBuf,
        /// Label file; without it the dataset's `faulty` column is used.
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Classify every method of a metrics CSV with a trained model.
    Predict {
        dataset: PathBuf,
        #[arg(short, long)]
        model: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run within-project cross-validation or cross-project prediction.
    Evaluate {
        mode: Mode,
        #[arg(required = true)]
        datasets: Vec<PathBuf>,
        /// Restrict within-project evaluation to these projects.
        #[arg(long)]
        project: Vec<String>,
        #[arg(short, long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Dump ranked rules, from a model or by mining a dataset.
    Rules {
        #[arg(long, conflicts_with = "dataset", required_unless_present = "dataset")]
        model: Option<PathBuf>,
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Write a labelled synthetic corpus with a planted low-risk pattern.
    Synth {
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long, default_value_t = 6)]
        projects: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Within,
    Cross,
}

/// A config file plus one override flag per config key.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// TOML file with any subset of the config keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, alias = "min_support")]
    min_support: Option<f64>,
    #[arg(long, alias = "min_confidence")]
    min_confidence: Option<f64>,
    #[arg(long, alias = "max_antecedent_len")]
    max_antecedent_len: Option<usize>,
    #[arg(long, alias = "selection_threshold")]
    selection_threshold: Option<f64>,
    #[arg(long, alias = "cv_folds")]
    cv_folds: Option<usize>,
    #[arg(long, alias = "smote_ratio")]
    smote_ratio: Option<f64>,
    #[arg(long, alias = "smote_k")]
    smote_k: Option<usize>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    undersample: Option<bool>,
    #[arg(long, alias = "smote_seed")]
    smote_seed: Option<u64>,
    #[arg(long, alias = "fold_seed")]
    fold_seed: Option<u64>,
    #[arg(long, alias = "allow_unbalanced", num_args = 0..=1, default_missing_value = "true")]
    allow_unbalanced: Option<bool>,
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<PipelineConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => PipelineConfig::load(path)?,
            None => PipelineConfig::default(),
        };
        macro_rules! apply {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field {
                    c.$field = v;
                })*
            };
        }
        apply!(
            min_support,
            min_confidence,
            max_antecedent_len,
            selection_threshold,
            cv_folds,
            smote_ratio,
            smote_k,
            undersample,
            smote_seed,
            fold_seed,
            allow_unbalanced
        );
        c.validate()?;
        Ok(c)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Extract { source_dir, out, project } => commands::extract(&source_dir, &out, project),
        Command::Label { metrics, labels, out } => commands::label(&metrics, &labels, &out),
        Command::Train {
            dataset,
            labels,
            out,
            config,
        } => commands::train(&dataset, labels.as_deref(), &out, &config.resolve()?),
        Command::Predict { dataset, model, out } => commands::predict(&dataset, &model, &out),
        Command::Evaluate {
            mode,
            datasets,
            project,
            out,
            config,
        } => commands::evaluate(mode, &datasets, &project, &out, &config.resolve()?),
        Command::Rules {
            model,
            dataset,
            out,
            config,
        } => commands::rules(model.as_deref(), dataset.as_deref(), out.as_deref(), &config),
        Command::Synth { out, projects, seed } => commands::synth(&out, projects, seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

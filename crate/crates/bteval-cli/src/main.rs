//! `bteval` — measure how speech recognition errors damage an NLU model
//! by looping every utterance through TTS and ASR and comparing the
//! model's outputs before and after.
//!
//! Workflow: `import` a dataset, `backtranscribe` it against the adapters
//! in a config file, then `evaluate`, `editops`, and `rank-errors` on the
//! result. `tts-audit` checks the synthesized audio itself; `wer` is a
//! standalone transcript scorer.
//!
//! Failures print one JSON line to stderr — `{"error":{"kind":...,
//! "message":...}}` — and exit nonzero, so wrappers never parse prose.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod error;

use commands::TaskArg;
use error::CliError;

#[derive(Parser)]
#[command(
    name = "bteval",
    version,
    about = "Back-transcription robustness evaluation for speech pipelines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a MASSIVE-style JSONL dump into a corpus file
    Import(ImportArgs),
    /// Run the TTS -> ASR -> NLU loop over a corpus
    Backtranscribe(BacktranscribeArgs),
    /// Report robustness metrics, change categories, and accuracy deltas
    Evaluate(EvaluateArgs),
    /// Rank recognition edit operations by frequency
    Editops(EditopsArgs),
    /// Rank recognition edit operations by learned damage
    RankErrors(RankErrorsArgs),
    /// Create or score blind audit sheets for TTS output quality
    TtsAudit(TtsAuditArgs),
    /// Score corpus-level word error rate between two transcript files
    Wer(WerArgs),
}

#[derive(clap::Args)]
pub struct ImportArgs {
    /// Dataset dump: one JSON record per line with id/utt/annot_utt/
    /// scenario/intent/partition fields
    #[arg(long)]
    pub input: PathBuf,
    /// Which gold annotation becomes the expected outcome
    #[arg(long, value_enum, default_value = "intent")]
    pub task: TaskArg,
    /// Keep only records from this partition (e.g. "test"); default keeps all
    #[arg(long)]
    pub partition: Option<String>,
    /// Corpus file to write
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(clap::Args)]
pub struct BacktranscribeArgs {
    /// Corpus file produced by `import` (or by hand, same schema)
    #[arg(long)]
    pub corpus: PathBuf,
    /// TOML file wiring the tts/asr/nlu adapters and run settings
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config's max_parallel_requests
    #[arg(long, value_name = "N")]
    pub parallel: Option<usize>,
    /// Corpus file to write, with hypotheses and outcomes filled in
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(clap::Args)]
pub struct EvaluateArgs {
    /// Back-transcribed corpus file
    #[arg(long)]
    pub corpus: PathBuf,
    /// Print just this metric's value (R123, R13, R12, R1, R123+, R13+)
    #[arg(long)]
    pub metric: Option<String>,
    /// Task used for the before/after accuracy table
    #[arg(long, value_enum, default_value = "intent")]
    pub task: TaskArg,
    /// Write the report here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct EditopsArgs {
    /// Back-transcribed corpus file
    #[arg(long)]
    pub corpus: PathBuf,
    /// Keep only the most frequent N operations (0 = all)
    #[arg(long, default_value_t = 0)]
    pub top: usize,
    /// Write the CSV here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct RankErrorsArgs {
    /// Back-transcribed corpus file
    #[arg(long)]
    pub corpus: PathBuf,
    /// Robustness policy deciding which outcome changes count as damage
    /// (R123, R13, R12, R1, R123+, R13+)
    #[arg(long, default_value = "R123")]
    pub policy: String,
    /// Keep only the most damaging N operations (0 = all)
    #[arg(long, default_value_t = 0)]
    pub top: usize,
    /// Write the CSV here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct TtsAuditArgs {
    #[command(subcommand)]
    pub command: TtsAuditCommand,
}

#[derive(Subcommand)]
pub enum TtsAuditCommand {
    /// Sample changed-text rows into a blind annotation sheet plus a
    /// hidden key file
    Make(TtsAuditMakeArgs),
    /// De-randomize a filled sheet through its key and report resemblance
    Score(TtsAuditScoreArgs),
}

#[derive(clap::Args)]
pub struct TtsAuditMakeArgs {
    /// Back-transcribed corpus file
    #[arg(long)]
    pub corpus: PathBuf,
    /// Fraction of changed-text samples to audit, in [0, 1]
    #[arg(long, default_value_t = 0.1)]
    pub fraction: f64,
    /// Sampling seed; reruns with the same seed are byte-identical
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Annotator-facing sheet CSV to write
    #[arg(long)]
    pub out: PathBuf,
    /// Hidden key CSV to write (default: the sheet path with a .key.csv
    /// extension)
    #[arg(long)]
    pub key: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct TtsAuditScoreArgs {
    /// Filled annotation sheet CSV
    #[arg(long)]
    pub sheet: PathBuf,
    /// Hidden key CSV written by `tts-audit make`
    #[arg(long)]
    pub key: PathBuf,
    /// Write the JSON result here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct WerArgs {
    /// Reference transcripts, one utterance per line
    #[arg(long)]
    pub refs: PathBuf,
    /// Hypothesis transcripts, line-aligned with --refs
    #[arg(long)]
    pub hyps: PathBuf,
    /// Write the value here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Import(args) => commands::import(args),
        Command::Backtranscribe(args) => commands::backtranscribe(args),
        Command::Evaluate(args) => commands::evaluate(args),
        Command::Editops(args) => commands::editops(args),
        Command::RankErrors(args) => commands::rank_damaging_errors(args),
        Command::TtsAudit(args) => commands::tts_audit(&args.command),
        Command::Wer(args) => commands::wer(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                // help and version are successes, rendered clap's way
                e.exit();
            }
            let usage = CliError::new("usage", e.render().to_string().trim_end());
            eprintln!("{}", usage.to_json());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}

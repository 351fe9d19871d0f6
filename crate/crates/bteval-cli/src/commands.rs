use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use bteval_core::audit::{compute_resemblance, make_annotation_sheet, AnnotationSheet};
use bteval_core::btpipe::{back_transcribe, word_error_rate};
use bteval_core::corpus::import_massive;
use bteval_core::errmodel::{rank_errors, rank_frequency, Hyperparams};
use bteval_core::robustness::{
    category_counts, category_counts_markdown, metrics_markdown, robustness_metric,
    standard_markdown, standard_metrics, MetricId,
};
use bteval_core::{Corpus, Error, NormalizationPolicy, Task};

use crate::config::{build_asr, build_nlu, build_tts, load_pipeline_config};
use crate::error::CliError;
use crate::{
    BacktranscribeArgs, EditopsArgs, EvaluateArgs, ImportArgs, RankErrorsArgs, TtsAuditCommand,
    TtsAuditMakeArgs, TtsAuditScoreArgs, WerArgs,
};

/// Writes `content` to `--out` when given, otherwise to stdout.
fn emit(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content).map_err(|e| CliError::io(path, e)),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Run outputs are loaded verbatim: the file already holds whatever
/// normalization produced it, and re-normalizing here could silently move
/// text comparisons.
fn load_corpus(path: &Path) -> Result<Corpus, CliError> {
    Ok(Corpus::load(path, &NormalizationPolicy::none())?)
}

fn parse_metric(name: &str) -> Result<MetricId, CliError> {
    Ok(MetricId::from_str(name)?)
}

/// Rows are rendered through a real CSV writer so operation anchors
/// containing commas or quotes stay parseable.
fn csv_table<V: std::fmt::Display>(header: [&str; 2], rows: &[(String, V)]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header).expect("writing to memory cannot fail");
    for (name, value) in rows {
        writer
            .write_record([name.as_str(), &value.to_string()])
            .expect("writing to memory cannot fail");
    }
    String::from_utf8(writer.into_inner().expect("no buffering errors on memory"))
        .expect("csv output is utf-8")
}

pub fn import(args: &ImportArgs) -> Result<(), CliError> {
    let corpus = import_massive(
        &args.input,
        args.task.into(),
        args.partition.as_deref(),
        &NormalizationPolicy::default(),
    )?;
    corpus.save(&args.out)?;
    eprintln!("imported {} samples into {}", corpus.len(), args.out.display());
    Ok(())
}

pub fn backtranscribe(args: &BacktranscribeArgs) -> Result<(), CliError> {
    let config = load_pipeline_config(&args.config)?;
    let mut run_config = config.run.clone();
    if let Some(parallel) = args.parallel {
        run_config.max_parallel_requests = parallel;
    }

    let corpus = Corpus::load(&args.corpus, &run_config.normalization)?;
    let tts = build_tts(&config.tts)?;
    let asr = build_asr(&config.asr)?;
    let nlu = build_nlu(&config.nlu)?;

    let (transcribed, report) =
        back_transcribe(&corpus, tts.as_ref(), asr.as_ref(), nlu.as_ref(), &run_config)?;
    transcribed.save(&args.out)?;
    // the report carries timestamps, so it goes to stderr as a log line and
    // the byte-reproducible artifact is the --out file alone
    eprintln!("{}", serde_json::to_string(&report).expect("report always serializes"));
    Ok(())
}

pub fn evaluate(args: &EvaluateArgs) -> Result<(), CliError> {
    let corpus = load_corpus(&args.corpus)?;

    if let Some(name) = &args.metric {
        let result = robustness_metric(&corpus, parse_metric(name)?)?;
        return emit(args.out.as_deref(), &format!("{:?}\n", result.value));
    }

    let mut computed = Vec::new();
    let mut empty = Vec::new();
    for metric in MetricId::ALL {
        match robustness_metric(&corpus, metric) {
            Ok(result) => computed.push(result),
            Err(Error::EmptyMetricDomain { .. }) => empty.push(metric.label()),
            Err(e) => return Err(e.into()),
        }
    }

    let mut report = String::from("# robustness\n\n");
    if computed.is_empty() {
        report.push_str("no metric has a non-empty domain on this corpus\n");
    } else {
        report.push_str(&metrics_markdown(&computed));
    }
    for label in empty {
        writeln!(report, "\n{label}: empty domain on this corpus").unwrap();
    }

    report.push_str("\n# changes\n\n");
    report.push_str(&category_counts_markdown(&category_counts(&corpus)?));

    report.push_str("\n# before/after\n\n");
    report.push_str(&standard_markdown(&standard_metrics(&corpus, args.task.into())?));

    emit(args.out.as_deref(), &report)
}

pub fn editops(args: &EditopsArgs) -> Result<(), CliError> {
    let corpus = load_corpus(&args.corpus)?;
    let ranked = rank_frequency(&corpus, args.top)?;
    emit(args.out.as_deref(), &csv_table(["op", "count"], &ranked))
}

pub fn rank_damaging_errors(args: &RankErrorsArgs) -> Result<(), CliError> {
    let corpus = load_corpus(&args.corpus)?;
    let policy = parse_metric(&args.policy)?.policy();
    let ranked = rank_errors(&corpus, &policy, &Hyperparams::default(), args.top)?;
    // weights print in round-trip precision, so reruns diff clean
    let rows: Vec<(String, String)> =
        ranked.into_iter().map(|(op, weight)| (op, format!("{weight:?}"))).collect();
    emit(args.out.as_deref(), &csv_table(["op", "weight"], &rows))
}

pub fn tts_audit(command: &TtsAuditCommand) -> Result<(), CliError> {
    match command {
        TtsAuditCommand::Make(args) => tts_audit_make(args),
        TtsAuditCommand::Score(args) => tts_audit_score(args),
    }
}

fn tts_audit_make(args: &TtsAuditMakeArgs) -> Result<(), CliError> {
    let corpus = load_corpus(&args.corpus)?;
    let sheet = make_annotation_sheet(&corpus, args.fraction, args.seed)?;
    let key_path: PathBuf =
        args.key.clone().unwrap_or_else(|| args.out.with_extension("key.csv"));
    sheet.save(&args.out, &key_path)?;
    eprintln!(
        "wrote {} rows to {} (hidden key: {})",
        sheet.len(),
        args.out.display(),
        key_path.display()
    );
    Ok(())
}

fn tts_audit_score(args: &TtsAuditScoreArgs) -> Result<(), CliError> {
    let sheet = AnnotationSheet::load(&args.sheet, &args.key)?;
    let result = compute_resemblance(&sheet)?;
    let line = serde_json::json!({
        "total": result.total,
        "utterance": result.utterance,
        "augmented": result.augmented,
        "both": result.both,
        "resemblance": result.resemblance,
    });
    emit(args.out.as_deref(), &format!("{line}\n"))
}

pub fn wer(args: &WerArgs) -> Result<(), CliError> {
    let read_lines = |path: &Path| -> Result<Vec<String>, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Ok(text.lines().map(str::to_string).collect())
    };
    let references = read_lines(&args.refs)?;
    let hypotheses = read_lines(&args.hyps)?;
    let result = word_error_rate(&references, &hypotheses)?;
    emit(args.out.as_deref(), &format!("{:?}\n", result.value))
}

/// Clap-facing task names; `Task` itself lives in the core crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum TaskArg {
    Domain,
    Intent,
    Slots,
}

impl From<TaskArg> for Task {
    fn from(value: TaskArg) -> Task {
        match value {
            TaskArg::Domain => Task::Domain,
            TaskArg::Intent => Task::Intent,
            TaskArg::Slots => Task::Slots,
        }
    }
}

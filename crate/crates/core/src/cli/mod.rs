//! Command-line front end. [`run`] parses arguments, dispatches to a
//! subcommand and renders its report; the `claimdecomp` binary is a thin
//! wrapper around it.

mod report;
mod retrieve;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregation::{
    aggregate_veracity, baseline, evaluate_classifier, score_to_label, AnswerVector, BaselineKind, ClassifierReport,
    UnknownPolicy,
};
use crate::codec::{convert_via_external, question_to_statements, StatementPair};
use crate::dataset::{parse_any, SplitManifest, Strictness};
use crate::evalkit::{
    cohen_kappa, fleiss_kappa, overlap_by_qtype, recall_report, set_similarity, unmatched_summary, MatchJudgment,
    OverlapAveraging, PairJudgment, RatingTable, RecallReport, SimilaritySpec, UnmatchedSummary,
};
use crate::model::{Answer, ClaimRecord, Source, VeracityLabel};
use crate::protocol::{ProtocolClient, DEFAULT_TIMEOUT};
use crate::retrieval::paragraph_label_stats;
use crate::stats::compute_stats;

pub use report::ReportFormat;
use report::{num, opt, pct, Report};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 20_231;
/// Environment variable naming the default external scorer command.
pub const SCORER_CMD_ENV: &str = "CLAIMDECOMP_SCORER_CMD";
/// Environment variable naming the default external converter command.
pub const CONVERTER_CMD_ENV: &str = "CLAIMDECOMP_CONVERTER_CMD";

#[derive(Debug, Error)]
pub(crate) enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 1,
        }
    }
}

pub(crate) type CliResult<T> = Result<T, CliError>;

fn data<E: std::fmt::Display>(context: impl std::fmt::Display) -> impl FnOnce(E) -> CliError {
    move |e| CliError::Data(format!("{context}: {e}"))
}

#[derive(Debug, Parser)]
#[command(name = "claimdecomp", version, about = "Claim decomposition toolkit: dataset statistics, veracity aggregation, evidence retrieval and decomposition metrics")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalOpts {
    /// Output format; json is the machine-readable form.
    #[arg(long, global = true, value_enum, default_value_t = ReportFormat::Pretty)]
    report: ReportFormat,
    /// Worker threads for per-claim work (0 = one per core).
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dataset statistics: corpus overview, question-type overlap, paragraph labels.
    Stats(StatsArgs),
    /// Veracity prediction from subquestion answers, and baselines.
    Aggregate(AggregateArgs),
    /// Evidence paragraph retrieval against gold paragraph judgments.
    Retrieve(retrieve::RetrieveArgs),
    /// Set-matching similarity and recall of generated decompositions.
    EvalDecomp(EvalDecompArgs),
    /// Unmatched-question agreement and kappa statistics.
    Agreement(AgreementArgs),
    /// Question to statement/negation conversion.
    Convert(ConvertArgs),
}

#[derive(Debug, Clone, Args)]
pub(crate) struct DataOpts {
    /// Dataset file, one claim record per line (native or released layout).
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Split to restrict to; ids come from the split manifest.
    #[arg(long)]
    split: Option<String>,
    /// Split manifest; defaults to splits.json next to the dataset.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Drop invalid records with a warning instead of failing.
    #[arg(long)]
    lenient: bool,
}

pub(crate) struct Ctx {
    pub seed: u64,
    pub warnings: Vec<String>,
}

fn open(path: &Path, what: &str) -> CliResult<File> {
    File::open(path).map_err(|e| CliError::Usage(format!("cannot open {what} {}: {e}", path.display())))
}

impl DataOpts {
    fn load(&self, ctx: &mut Ctx) -> CliResult<Vec<ClaimRecord>> {
        let path = self.dataset.as_ref().ok_or_else(|| CliError::Usage("--dataset is required".into()))?;
        let strictness = if self.lenient { Strictness::Lenient } else { Strictness::Strict };
        let parsed = parse_any(BufReader::new(open(path, "dataset")?), strictness).map_err(data(path.display()))?;
        for d in &parsed.dropped {
            ctx.warnings.push(format!("{}: dropped {d}", path.display()));
        }
        let Some(split) = &self.split else {
            return Ok(parsed.records);
        };
        let manifest_path = self.manifest.clone().unwrap_or_else(|| path.with_file_name("splits.json"));
        let manifest = SplitManifest::from_reader(open(&manifest_path, "split manifest")?)
            .map_err(data(manifest_path.display()))?;
        let selected = manifest.select(split, &parsed.records).map_err(data(manifest_path.display()))?;
        Ok(selected.into_iter().cloned().collect())
    }
}

/// Reads a file of one JSON object per line; blank lines are skipped.
pub(crate) fn read_jsonl<T: DeserializeOwned>(path: &Path, what: &str) -> CliResult<Vec<T>> {
    let reader = BufReader::new(open(path, what)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(data(path.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line).map_err(data(format_args!("{}: line {}", path.display(), i + 1)))?;
        out.push(value);
    }
    Ok(out)
}

/// Generated questions for one claim.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct DecompositionLine {
    pub claim_id: String,
    pub questions: Vec<String>,
}

pub(crate) fn read_decompositions(path: &Path) -> CliResult<BTreeMap<String, Vec<String>>> {
    let mut out = BTreeMap::new();
    for line in read_jsonl::<DecompositionLine>(path, "decomposition file")? {
        if out.insert(line.claim_id.clone(), line.questions).is_some() {
            return Err(CliError::Data(format!("{}: claim `{}` listed twice", path.display(), line.claim_id)));
        }
    }
    Ok(out)
}

/// Rule-based conversion with an optional external fallback.
pub(crate) struct Converter {
    client: Option<ProtocolClient>,
    cache: BTreeMap<String, Result<StatementPair, String>>,
}

impl Converter {
    pub fn new(command: Option<&str>, timeout: Duration) -> CliResult<Self> {
        let env = std::env::var(CONVERTER_CMD_ENV).ok().filter(|c| !c.trim().is_empty());
        let client = match command.map(str::to_string).or(env) {
            Some(cmd) => Some(ProtocolClient::spawn(&cmd, timeout).map_err(data("converter"))?),
            None => None,
        };
        Ok(Converter { client, cache: BTreeMap::new() })
    }

    /// `Ok(Err(reason))` when neither path can convert the question.
    pub fn convert(&mut self, question: &str) -> CliResult<Result<StatementPair, String>> {
        if let Some(hit) = self.cache.get(question) {
            return Ok(hit.clone());
        }
        let result = match (question_to_statements(question), self.client.as_mut()) {
            (Ok(pair), _) => Ok(pair),
            (Err(_), Some(client)) => Ok(convert_via_external(question, client).map_err(data("converter"))?),
            (Err(e), None) => Err(e.to_string()),
        };
        self.cache.insert(question.to_string(), result.clone());
        Ok(result)
    }
}

/// Parses arguments and runs one subcommand. Returns the process exit code:
/// 0 on success, 2 on usage errors, 1 on data or protocol errors.
pub fn run<I, T, O, E>(args: I, out: &mut O, err: &mut E) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    O: Write,
    E: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.global.jobs).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start worker pool: {e}");
            return 1;
        }
    };
    let mut ctx = Ctx { seed: cli.global.seed, warnings: Vec::new() };
    let result = pool.install(|| dispatch(cli.command, &mut ctx));
    for w in &ctx.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    match result {
        Ok(report) => match report.render(cli.global.report, out) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(err, "error: writing report: {e}");
                1
            }
        },
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code()
        }
    }
}

fn dispatch(command: Command, ctx: &mut Ctx) -> CliResult<Report> {
    match command {
        Command::Stats(a) => stats(a, ctx),
        Command::Aggregate(a) => aggregate(a, ctx),
        Command::Retrieve(a) => retrieve::run(a, ctx),
        Command::EvalDecomp(a) => eval_decomp(a, ctx),
        Command::Agreement(a) => agreement(a),
        Command::Convert(a) => convert(a, ctx),
    }
}

// ---------------------------------------------------------------------------
// stats

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Averaging {
    PerQuestion,
    Pooled,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[command(flatten)]
    data: DataOpts,
    /// 1: corpus overview, 4: lexical overlap by question type, 6: paragraph labels.
    #[arg(long, default_value = "1", value_parser = ["1", "4", "6"])]
    table: String,
    /// How `--table 4` combines question overlaps.
    #[arg(long, value_enum, default_value_t = Averaging::PerQuestion)]
    averaging: Averaging,
}

fn stats(args: StatsArgs, ctx: &mut Ctx) -> CliResult<Report> {
    let records = args.data.load(ctx)?;
    let split = args.data.split.clone();
    match args.table.as_str() {
        "4" => {
            let averaging = match args.averaging {
                Averaging::PerQuestion => OverlapAveraging::PerQuestion,
                Averaging::Pooled => OverlapAveraging::Pooled,
            };
            let t = overlap_by_qtype(&records, averaging);
            if t.typed_annotations == 0 {
                return Err(CliError::Data("no annotation carries question types".into()));
            }
            #[derive(Serialize)]
            struct J<'a> {
                table: u8,
                split: Option<String>,
                averaging: &'a str,
                overlap: crate::evalkit::OverlapTable,
            }
            let averaging = match averaging {
                OverlapAveraging::PerQuestion => "per-question",
                OverlapAveraging::Pooled => "pooled",
            };
            let mut r = Report::new(
                "Lexical overlap with the claim by question type",
                &J { table: 4, split, averaging, overlap: t },
                vec!["type", "questions", "per_annotation", "rouge1_p", "rouge2_p", "rougel_p"],
            );
            for (name, row) in [("literal", t.literal), ("implied", t.implied)] {
                r.row(vec![
                    name.into(),
                    row.n_questions.to_string(),
                    num(row.questions_per_annotation),
                    num(row.rouge1_p),
                    num(row.rouge2_p),
                    num(row.rougel_p),
                ]);
            }
            Ok(r)
        }
        "6" => {
            let s = paragraph_label_stats(&records).map_err(|e| CliError::Data(e.to_string()))?;
            #[derive(Serialize)]
            struct J {
                table: u8,
                split: Option<String>,
                paragraphs: crate::retrieval::ParagraphLabelStats,
            }
            let mut r = Report::new("Evidence paragraph labels", &J { table: 6, split, paragraphs: s.clone() }, vec!["statistic", "value"]);
            r.row(vec!["claims".into(), s.n_claims.to_string()]);
            r.row(vec!["avg paragraphs".into(), num(s.avg_paragraphs)]);
            for (scope, shares) in [("per subquestion", s.per_subquestion), ("per example", s.per_example)] {
                r.row(vec![format!("{scope} context %"), pct(shares.context)]);
                r.row(vec![format!("{scope} support %"), pct(shares.support)]);
                r.row(vec![format!("{scope} refute %"), pct(shares.refute)]);
            }
            r.row(vec!["fleiss kappa".into(), opt(s.fleiss_kappa)]);
            Ok(r)
        }
        _ => {
            let s = compute_stats(&records).map_err(|e| CliError::Data(e.to_string()))?;
            #[derive(Serialize)]
            struct J {
                table: u8,
                split: Option<String>,
                stats: crate::stats::DatasetStats,
            }
            let mut r = Report::new("Dataset overview", &J { table: 1, split, stats: s.clone() }, vec!["statistic", "value"]);
            r.row(vec!["claims".into(), s.n_claims.to_string()]);
            r.row(vec!["avg tokens per claim".into(), num(s.avg_tokens_per_claim)]);
            r.row(vec!["avg subquestions per annotation".into(), num(s.avg_subquestions_per_annotation)]);
            for a in Answer::ALL {
                r.row(vec![format!("answer {} %", a.name()), pct(s.answer_pct.get(&a).copied().unwrap_or(0.0))]);
            }
            for src in Source::ALL {
                r.row(vec![format!("source {} %", src.name()), pct(s.source_pct.get(&src).copied().unwrap_or(0.0))]);
            }
            for l in VeracityLabel::ALL {
                r.row(vec![format!("label {} %", l.name()), pct(s.label_dist.get(&l).copied().unwrap_or(0.0))]);
            }
            Ok(r)
        }
    }
}

// ---------------------------------------------------------------------------
// aggregate

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub(crate) enum AnnotationChoice {
    /// The annotation with more subquestions (first on ties).
    More,
    First,
    Second,
    /// Answers of all annotations together.
    Merge,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum UnknownArg {
    Count,
    Exclude,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BaselineArg {
    RandomUniform,
    RandomLabelDist,
    MostFrequent,
}

impl From<BaselineArg> for BaselineKind {
    fn from(b: BaselineArg) -> Self {
        match b {
            BaselineArg::RandomUniform => BaselineKind::RandomUniform,
            BaselineArg::RandomLabelDist => BaselineKind::RandomLabelDist,
            BaselineArg::MostFrequent => BaselineKind::MostFrequent,
        }
    }
}

#[derive(Debug, Args)]
struct AggregateArgs {
    #[command(flatten)]
    data: DataOpts,
    /// Relevance masks, one {"claim_id", "mask"} object per line.
    #[arg(long)]
    use_mask_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = UnknownArg::Count)]
    unknown: UnknownArg,
    /// Report a baseline instead of question aggregation.
    #[arg(long, value_enum)]
    baseline: Option<BaselineArg>,
    #[arg(long, value_enum, default_value_t = AnnotationChoice::More)]
    annotation: AnnotationChoice,
    /// 5: every baseline plus question aggregation.
    #[arg(long, value_parser = ["5"], conflicts_with = "baseline")]
    table: Option<String>,
    /// Include per-claim predictions in the json report.
    #[arg(long)]
    per_claim: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaskLine {
    claim_id: String,
    mask: Vec<bool>,
}

pub(crate) fn choose_annotation(record: &ClaimRecord, choice: AnnotationChoice) -> CliResult<Vec<usize>> {
    let missing = |i: usize| CliError::Data(format!("claim `{}` has no annotation {}", record.id, i + 1));
    match choice {
        AnnotationChoice::More => record.larger_annotation().map(|i| vec![i]).ok_or_else(|| missing(0)),
        AnnotationChoice::First => (!record.annotations.is_empty()).then(|| vec![0]).ok_or_else(|| missing(0)),
        AnnotationChoice::Second => (record.annotations.len() > 1).then(|| vec![1]).ok_or_else(|| missing(1)),
        AnnotationChoice::Merge => Ok((0..record.annotations.len()).collect()),
    }
}

#[derive(Serialize)]
struct MethodRow {
    method: String,
    #[serde(flatten)]
    scores: ClassifierReport,
}

#[derive(Serialize)]
struct Prediction {
    claim_id: String,
    gold: VeracityLabel,
    predicted: VeracityLabel,
    score: f64,
}

fn aggregate(args: AggregateArgs, ctx: &mut Ctx) -> CliResult<Report> {
    let records = args.data.load(ctx)?;
    if records.is_empty() {
        return Err(CliError::Data("no claims to evaluate".into()));
    }
    let masks: Option<BTreeMap<String, Vec<bool>>> = match &args.use_mask_file {
        Some(path) => {
            let mut m = BTreeMap::new();
            for line in read_jsonl::<MaskLine>(path, "mask file")? {
                if m.insert(line.claim_id.clone(), line.mask).is_some() {
                    return Err(CliError::Data(format!("{}: claim `{}` listed twice", path.display(), line.claim_id)));
                }
            }
            Some(m)
        }
        None => None,
    };
    let policy = match args.unknown {
        UnknownArg::Count => UnknownPolicy::Count,
        UnknownArg::Exclude => UnknownPolicy::Exclude,
    };
    let golds: Vec<VeracityLabel> = records.iter().map(|r| r.gold_label).collect();
    let evaluate = |method: &str, preds: &[VeracityLabel]| -> CliResult<MethodRow> {
        let scores = evaluate_classifier(preds, &golds).map_err(data(method))?;
        Ok(MethodRow { method: method.to_string(), scores })
    };
    let predict = |use_masks: bool| -> CliResult<Vec<(VeracityLabel, f64)>> {
        records
            .par_iter()
            .map(|r| {
                let indices = choose_annotation(r, args.annotation)?;
                let answers: Vec<Answer> = indices.iter().flat_map(|&i| r.annotations[i].answers()).collect();
                let mask = if use_masks { masks.as_ref().and_then(|m| m.get(&r.id)).cloned() } else { None };
                let claim = format!("claim `{}`", r.id);
                let v = match mask {
                    Some(m) => AnswerVector::with_mask(answers, m),
                    None => AnswerVector::new(answers),
                }
                .map_err(data(&claim))?;
                let score = aggregate_veracity(&v, policy).map_err(data(&claim))?;
                Ok((score_to_label(score).map_err(data(&claim))?, score))
            })
            .collect()
    };
    let seed = ctx.seed;
    let run_baseline = |b: BaselineArg| -> CliResult<MethodRow> {
        let kind = BaselineKind::from(b);
        let preds = baseline(kind, records.len(), None, seed).map_err(data("baseline"))?;
        evaluate(b.to_possible_value().expect("named").get_name(), &preds)
    };

    let mut rows = Vec::new();
    let mut predictions = None;
    if let Some(b) = args.baseline {
        rows.push(run_baseline(b)?);
    } else {
        if args.table.is_some() {
            for b in BaselineArg::value_variants() {
                rows.push(run_baseline(*b)?);
            }
        }
        if args.table.is_some() || masks.is_none() {
            let p = predict(false)?;
            let labels: Vec<VeracityLabel> = p.iter().map(|x| x.0).collect();
            rows.push(evaluate("question-aggregation", &labels)?);
            predictions = Some(p);
        }
        if masks.is_some() {
            let p = predict(true)?;
            let labels: Vec<VeracityLabel> = p.iter().map(|x| x.0).collect();
            rows.push(evaluate("question-aggregation-masked", &labels)?);
            predictions = Some(p);
        }
    }
    let predictions = predictions.filter(|_| args.per_claim).map(|p| {
        records
            .iter()
            .zip(p)
            .map(|(r, (predicted, score))| Prediction { claim_id: r.id.clone(), gold: r.gold_label, predicted, score })
            .collect::<Vec<_>>()
    });

    #[derive(Serialize)]
    struct J {
        table: Option<u8>,
        split: Option<String>,
        annotation: AnnotationChoice,
        unknown: &'static str,
        seed: u64,
        n_claims: usize,
        rows: Vec<MethodRow>,
        predictions: Option<Vec<Prediction>>,
    }
    let j = J {
        table: args.table.as_ref().map(|_| 5),
        split: args.data.split.clone(),
        annotation: args.annotation,
        unknown: match policy {
            UnknownPolicy::Count => "count",
            UnknownPolicy::Exclude => "exclude",
        },
        seed,
        n_claims: records.len(),
        rows,
        predictions,
    };
    let mut r = Report::new("Veracity prediction", &j, vec!["method", "macro_f1", "micro_f1", "mae"]);
    for row in &j.rows {
        r.row(vec![row.method.clone(), num(row.scores.macro_f1), num(row.scores.micro_f1), num(row.scores.mae)]);
    }
    Ok(r)
}

// ---------------------------------------------------------------------------
// eval-decomp

#[derive(Debug, Args)]
struct EvalDecompArgs {
    #[command(flatten)]
    data: DataOpts,
    /// Generated questions, one {"claim_id", "questions"} object per line.
    #[arg(long)]
    generated: Option<PathBuf>,
    /// rouge1p, rouge2p, rougelf, tokenf1, or matrix:FILE with one
    /// {"claim_id", "matrix"} object per line (rows = generated questions).
    #[arg(long, default_value = "rouge1p")]
    sim: String,
    /// Which annotation is the reference decomposition.
    #[arg(long, value_enum, default_value_t = AnnotationChoice::More)]
    reference: AnnotationChoice,
    /// Human match judgments, one {"claim_id", "ref_index", "matched", "qtype"} object per line.
    #[arg(long)]
    judgments: Option<PathBuf>,
    /// Include per-claim similarities in the json report.
    #[arg(long)]
    per_claim: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimMatrixLine {
    claim_id: String,
    matrix: Vec<Vec<f64>>,
}

enum SimSource {
    Builtin(SimilaritySpec),
    Matrices(BTreeMap<String, Vec<Vec<f64>>>),
}

fn parse_sim(sim: &str) -> CliResult<SimSource> {
    if let Some(path) = sim.strip_prefix("matrix:") {
        let path = Path::new(path);
        let mut m = BTreeMap::new();
        for line in read_jsonl::<SimMatrixLine>(path, "similarity matrix file")? {
            if m.insert(line.claim_id.clone(), line.matrix).is_some() {
                return Err(CliError::Data(format!("{}: claim `{}` listed twice", path.display(), line.claim_id)));
            }
        }
        return Ok(SimSource::Matrices(m));
    }
    sim.parse().map(SimSource::Builtin).map_err(CliError::Usage)
}

#[derive(Serialize)]
struct ClaimSimilarity {
    claim_id: String,
    generated: usize,
    reference: usize,
    similarity: f64,
}

#[derive(Serialize)]
struct MatchingReport {
    similarity: String,
    reference: AnnotationChoice,
    n_claims: usize,
    mean: f64,
    per_claim: Option<Vec<ClaimSimilarity>>,
}

fn eval_decomp(args: EvalDecompArgs, ctx: &mut Ctx) -> CliResult<Report> {
    if args.generated.is_none() && args.judgments.is_none() {
        return Err(CliError::Usage("eval-decomp needs --generated (with --dataset) and/or --judgments".into()));
    }
    let matching = match &args.generated {
        Some(path) => {
            let records = args.data.load(ctx)?;
            let by_id: BTreeMap<&str, &ClaimRecord> = records.iter().map(|r| (r.id.as_str(), r)).collect();
            let generated = read_jsonl::<DecompositionLine>(path, "decomposition file")?;
            if generated.is_empty() {
                return Err(CliError::Data(format!("{}: no decompositions", path.display())));
            }
            let source = parse_sim(&args.sim)?;
            let per_claim: Vec<ClaimSimilarity> = generated
                .par_iter()
                .map(|g| {
                    let record = by_id
                        .get(g.claim_id.as_str())
                        .ok_or_else(|| CliError::Data(format!("claim `{}` is not in the dataset", g.claim_id)))?;
                    let refs: Vec<String> = choose_annotation(record, args.reference)?
                        .into_iter()
                        .flat_map(|i| record.annotations[i].subquestions.iter().map(|q| q.text.clone()))
                        .collect();
                    let spec = match &source {
                        SimSource::Builtin(s) => s.clone(),
                        SimSource::Matrices(m) => SimilaritySpec::ExternalMatrix(
                            m.get(&g.claim_id)
                                .cloned()
                                .ok_or_else(|| CliError::Data(format!("no similarity matrix for claim `{}`", g.claim_id)))?,
                        ),
                    };
                    let similarity =
                        set_similarity(&g.questions, &refs, &spec).map_err(data(format_args!("claim `{}`", g.claim_id)))?;
                    Ok(ClaimSimilarity { claim_id: g.claim_id.clone(), generated: g.questions.len(), reference: refs.len(), similarity })
                })
                .collect::<CliResult<_>>()?;
            let mean = per_claim.iter().map(|c| c.similarity).sum::<f64>() / per_claim.len() as f64;
            let name = match &source {
                SimSource::Builtin(s) => s.name().to_string(),
                SimSource::Matrices(_) => "external-matrix".to_string(),
            };
            Some(MatchingReport {
                similarity: name,
                reference: args.reference,
                n_claims: per_claim.len(),
                mean,
                per_claim: args.per_claim.then_some(per_claim),
            })
        }
        None => None,
    };
    let recall = match &args.judgments {
        Some(path) => {
            let judgments = read_jsonl::<MatchJudgment>(path, "judgment file")?;
            Some(recall_report(&judgments).map_err(data(path.display()))?)
        }
        None => None,
    };

    #[derive(Serialize)]
    struct J {
        matching: Option<MatchingReport>,
        recall: Option<RecallReport>,
    }
    let j = J { matching, recall };
    let mut r = Report::new("Decomposition quality", &j, vec!["metric", "value", "n"]);
    if let Some(m) = &j.matching {
        r.row(vec![format!("matching {}", m.similarity), num(m.mean), m.n_claims.to_string()]);
    }
    if let Some(rc) = &j.recall {
        r.row(vec!["recall all".into(), num(rc.r_all), rc.n_all.to_string()]);
        r.row(vec!["recall literal".into(), opt(rc.r_literal), rc.n_literal.to_string()]);
        r.row(vec!["recall implied".into(), opt(rc.r_implied), rc.n_implied.to_string()]);
    }
    Ok(r)
}

// ---------------------------------------------------------------------------
// agreement

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum KappaKind {
    Fleiss,
    Cohen,
}

#[derive(Debug, Args)]
struct AgreementArgs {
    /// Pairwise unmatched-question records, one
    /// {"claim_id", "first_unmatched", "second_unmatched"} object per line.
    #[arg(long)]
    pairs: Option<PathBuf>,
    /// Ratings, one JSON array of category labels per item (raters in a fixed order).
    #[arg(long)]
    ratings: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = KappaKind::Fleiss)]
    kappa: KappaKind,
    /// Full category list, comma separated, when some categories never occur.
    #[arg(long, value_delimiter = ',')]
    categories: Option<Vec<String>>,
}

#[derive(Serialize)]
struct KappaReport {
    kind: KappaKind,
    items: usize,
    raters: usize,
    value: Option<f64>,
    undefined: Option<String>,
}

fn agreement(args: AgreementArgs) -> CliResult<Report> {
    if args.pairs.is_none() && args.ratings.is_none() {
        return Err(CliError::Usage("agreement needs --pairs and/or --ratings".into()));
    }
    let unmatched: Option<UnmatchedSummary> = match &args.pairs {
        Some(path) => {
            let pairs = read_jsonl::<PairJudgment>(path, "pair file")?;
            Some(unmatched_summary(&pairs).map_err(data(path.display()))?)
        }
        None => None,
    };
    let kappa = match &args.ratings {
        Some(path) => {
            let rows = read_jsonl::<Vec<String>>(path, "ratings file")?;
            let table = RatingTable::new(rows.clone(), args.categories.clone()).map_err(data(path.display()))?;
            let value = match args.kappa {
                KappaKind::Fleiss => fleiss_kappa(&table),
                KappaKind::Cohen => {
                    if table.raters() != 2 {
                        return Err(CliError::Data(format!(
                            "{}: cohen kappa needs exactly 2 raters per item, found {}",
                            path.display(),
                            table.raters()
                        )));
                    }
                    let a: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
                    let b: Vec<&str> = rows.iter().map(|r| r[1].as_str()).collect();
                    cohen_kappa(&a, &b)
                }
            };
            let (value, undefined) = match value {
                Ok(v) => (Some(v), None),
                Err(e @ crate::evalkit::KappaError::Undefined) => (None, Some(e.to_string())),
                Err(e) => return Err(CliError::Data(format!("{}: {e}", path.display()))),
            };
            Some(KappaReport { kind: args.kappa, items: table.items(), raters: table.raters(), value, undefined })
        }
        None => None,
    };

    #[derive(Serialize)]
    struct J {
        unmatched: Option<UnmatchedSummary>,
        kappa: Option<KappaReport>,
    }
    let j = J { unmatched, kappa };
    let mut r = Report::new("Annotator agreement", &j, vec!["statistic", "value"]);
    if let Some(u) = &j.unmatched {
        r.row(vec!["claims".into(), u.n_claims.to_string()]);
        r.row(vec!["unmatched % all".into(), pct(100.0 * u.mean.all)]);
        r.row(vec!["unmatched % more qs".into(), pct(100.0 * u.mean.more_qs)]);
        r.row(vec!["unmatched % fewer qs".into(), pct(100.0 * u.mean.fewer_qs)]);
        r.row(vec!["unmatched % all (pooled)".into(), pct(100.0 * u.all_pooled)]);
    }
    if let Some(k) = &j.kappa {
        let name = match k.kind {
            KappaKind::Fleiss => "fleiss kappa",
            KappaKind::Cohen => "cohen kappa",
        };
        r.row(vec![name.into(), k.value.map_or_else(|| "undefined".into(), num)]);
    }
    Ok(r)
}

// ---------------------------------------------------------------------------
// convert

#[derive(Debug, Args)]
struct ConvertArgs {
    /// Question to convert; repeatable.
    #[arg(long)]
    question: Vec<String>,
    #[command(flatten)]
    data: DataOpts,
    /// External converter command (wire protocol), used when the rules fail.
    #[arg(long)]
    converter: Option<String>,
    /// Seconds to wait for each converter reply.
    #[arg(long, default_value_t = DEFAULT_TIMEOUT.as_secs())]
    timeout: u64,
}

#[derive(Serialize)]
struct ConversionRow {
    claim_id: Option<String>,
    question: String,
    affirmative: Option<String>,
    negated: Option<String>,
    provenance: Option<crate::codec::Provenance>,
    error: Option<String>,
}

fn convert(args: ConvertArgs, ctx: &mut Ctx) -> CliResult<Report> {
    let mut items: Vec<(Option<String>, String)> = args.question.iter().map(|q| (None, q.clone())).collect();
    if args.data.dataset.is_some() {
        for r in args.data.load(ctx)? {
            for a in &r.annotations {
                items.extend(a.subquestions.iter().map(|q| (Some(r.id.clone()), q.text.clone())));
            }
        }
    }
    if items.is_empty() {
        return Err(CliError::Usage("convert needs --question or --dataset".into()));
    }
    let mut converter = Converter::new(args.converter.as_deref(), Duration::from_secs(args.timeout))?;
    let mut rows = Vec::with_capacity(items.len());
    for (claim_id, question) in items {
        let row = match converter.convert(&question)? {
            Ok(p) => ConversionRow {
                claim_id,
                question,
                affirmative: Some(p.affirmative),
                negated: Some(p.negated),
                provenance: Some(p.provenance),
                error: None,
            },
            Err(reason) => ConversionRow { claim_id, question, affirmative: None, negated: None, provenance: None, error: Some(reason) },
        };
        rows.push(row);
    }

    #[derive(Serialize)]
    struct J {
        conversions: Vec<ConversionRow>,
    }
    let j = J { conversions: rows };
    let mut r = Report::new("Question conversion", &j, vec!["question", "affirmative", "negated", "provenance"]);
    for c in &j.conversions {
        r.row(vec![
            c.question.clone(),
            c.affirmative.clone().unwrap_or_else(|| "-".into()),
            c.negated.clone().unwrap_or_else(|| "-".into()),
            match c.provenance {
                Some(crate::codec::Provenance::RuleBased) => "rule-based".into(),
                Some(crate::codec::Provenance::External) => "external".into(),
                None => "unconverted".into(),
            },
        ]);
    }
    Ok(r)
}

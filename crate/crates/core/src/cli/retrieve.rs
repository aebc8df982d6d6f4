use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{num, Report};
use super::{data, read_decompositions, read_jsonl, CliError, CliResult, Converter, Ctx, DataOpts, SCORER_CMD_ENV};
use crate::protocol::DEFAULT_TIMEOUT;
use crate::retrieval::{
    human_agreement, labels_to_selection, random_retrieval_baseline, retrieve_from_matrices, Bm25Scorer,
    ExternalScorer, F1Counts, GoldScope, GoldSets, Hypothesis, JudgedClaim, LexicalScorer, Mode, ScoreMatrix, Scorer,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Support,
    Refute,
    Merged,
    /// Every mode, one row each.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Granularity {
    /// One retrieval per claim over all its subquestions.
    Claim,
    /// One retrieval per judged subquestion.
    Subquestion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ScopeArg {
    ByMode,
    Relevant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum RetrievalBaseline {
    /// Labels drawn from the evidence label distribution.
    Random,
    /// Each annotator against the majority of the other two.
    Human,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum KArg {
    Gold,
    Fixed(usize),
}

impl Serialize for KArgRepr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            KArg::Gold => s.serialize_str("gold"),
            KArg::Fixed(n) => s.serialize_u64(n as u64),
        }
    }
}

struct KArgRepr(KArg);

fn parse_k(s: &str) -> Result<KArg, String> {
    if s == "gold" {
        return Ok(KArg::Gold);
    }
    s.parse().map(KArg::Fixed).map_err(|_| format!("expected `gold` or a count, got `{s}`"))
}

#[derive(Debug, Args)]
pub(crate) struct RetrieveArgs {
    #[command(flatten)]
    data: DataOpts,
    /// bm25, lexical, external[:CMD] (default command from the environment), or matrix:FILE.
    #[arg(long, default_value = "bm25")]
    scorer: String,
    #[arg(long, value_enum, default_value_t = ModeArg::Support)]
    mode: ModeArg,
    /// Paragraphs to select: `gold` (the number of support or refute paragraphs) or a count.
    #[arg(long, default_value = "gold", value_parser = parse_k)]
    k: KArg,
    /// Hypotheses: `gold` subquestions, the `claim` itself, or a decomposition FILE.
    #[arg(long, default_value = "gold")]
    decomp: String,
    #[arg(long, value_enum, default_value_t = Granularity::Claim)]
    granularity: Granularity,
    /// Gold set for support and refute modes: their own label, or every relevant paragraph.
    #[arg(long, value_enum, default_value_t = ScopeArg::ByMode)]
    gold_scope: ScopeArg,
    /// Report a reference point instead of a scorer.
    #[arg(long, value_enum)]
    baseline: Option<RetrievalBaseline>,
    /// External converter for questions the rules cannot negate.
    #[arg(long)]
    converter: Option<String>,
    /// Connections to an external scorer (default: --jobs, at least 1).
    #[arg(long)]
    pool: Option<usize>,
    /// Seconds to wait for each external reply.
    #[arg(long, default_value_t = DEFAULT_TIMEOUT.as_secs())]
    timeout: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Polarity {
    Affirmative,
    Negated,
}

/// A per-claim score matrix in a matrix file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClaimMatrixLine {
    claim_id: String,
    polarity: Polarity,
    paragraph_ids: Vec<String>,
    hypothesis_ids: Vec<String>,
    scores: Vec<f64>,
    #[serde(default)]
    scorer_name: String,
    #[serde(default)]
    bounded: bool,
}

enum ScoreSource {
    Live(Box<dyn Scorer>),
    Files(BTreeMap<(String, Polarity), ScoreMatrix>),
}

impl ScoreSource {
    fn name(&self) -> String {
        match self {
            ScoreSource::Live(s) => s.name().to_string(),
            ScoreSource::Files(m) => m.values().next().map_or("matrix", |x| x.scorer_name()).to_string(),
        }
    }
}

fn load_matrix_file(path: &Path) -> CliResult<BTreeMap<(String, Polarity), ScoreMatrix>> {
    let mut out = BTreeMap::new();
    for line in read_jsonl::<ClaimMatrixLine>(path, "score matrix file")? {
        let key = (line.claim_id.clone(), line.polarity);
        let m = ScoreMatrix::new(line.paragraph_ids, line.hypothesis_ids, line.scores, line.scorer_name, line.bounded)
            .map_err(data(format_args!("{}: claim `{}`", path.display(), line.claim_id)))?;
        if out.insert(key, m).is_some() {
            return Err(CliError::Data(format!("{}: claim `{}` has two {:?} matrices", path.display(), line.claim_id, line.polarity)));
        }
    }
    Ok(out)
}

fn make_scorer(args: &RetrieveArgs, jobs: usize) -> CliResult<ScoreSource> {
    let spec = args.scorer.as_str();
    if let Some(path) = spec.strip_prefix("matrix:") {
        return Ok(ScoreSource::Files(load_matrix_file(Path::new(path))?));
    }
    let external = |cmd: String| -> CliResult<ScoreSource> {
        let pool = args.pool.unwrap_or(jobs).max(1);
        let s = ExternalScorer::spawn(&cmd, pool, Duration::from_secs(args.timeout)).map_err(data("scorer"))?;
        Ok(ScoreSource::Live(Box::new(s)))
    };
    match spec {
        "bm25" => Ok(ScoreSource::Live(Box::new(Bm25Scorer::default()))),
        "lexical" => Ok(ScoreSource::Live(Box::new(LexicalScorer))),
        "external" => match std::env::var(SCORER_CMD_ENV) {
            Ok(cmd) if !cmd.trim().is_empty() => external(cmd),
            _ => Err(CliError::Usage(format!("--scorer external needs a command: external:CMD or {SCORER_CMD_ENV}"))),
        },
        _ => match spec.strip_prefix("external:") {
            Some(cmd) if !cmd.trim().is_empty() => external(cmd.to_string()),
            _ => Err(CliError::Usage(format!("unknown scorer `{spec}` (bm25, lexical, external[:CMD], matrix:FILE)"))),
        },
    }
}

enum Decomp {
    Gold,
    Claim,
    File(PathBuf),
}

/// One claim ready for retrieval.
struct Unitized<'a> {
    judged: JudgedClaim<'a>,
    hypotheses: Vec<Hypothesis>,
}

#[derive(Default, Clone, Copy)]
struct Tally {
    counts: F1Counts,
    f1_sum: f64,
    units: usize,
}

impl Tally {
    fn add(&mut self, selected: &BTreeSet<usize>, gold: &BTreeSet<usize>) {
        let c = F1Counts::new(selected, gold);
        self.counts.add(c);
        self.f1_sum += c.f1();
        self.units += 1;
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.counts.add(other.counts);
        self.f1_sum += other.f1_sum;
        self.units += other.units;
        self
    }
}

#[derive(Serialize)]
struct RetrieveReport {
    scorer: String,
    decomp: String,
    granularity: Granularity,
    gold_scope: ScopeArg,
    k: KArgRepr,
    seed: Option<u64>,
    split: Option<String>,
    n_claims: usize,
    n_units: usize,
    missing_negations: usize,
    rows: Vec<ModeRow>,
}

#[derive(Serialize)]
struct ModeRow {
    mode: &'static str,
    f1: f64,
    macro_f1: f64,
    /// Pooled counts; absent for the human reference point.
    true_positives: Option<usize>,
    selected: Option<usize>,
    gold: Option<usize>,
}

impl ModeRow {
    fn new(mode: &'static str, t: Tally) -> Self {
        ModeRow {
            mode,
            f1: t.counts.f1(),
            macro_f1: if t.units == 0 { 0.0 } else { t.f1_sum / t.units as f64 },
            true_positives: Some(t.counts.true_positives),
            selected: Some(t.counts.selected),
            gold: Some(t.counts.gold),
        }
    }
}

fn unit_seed(seed: u64, claim: usize, sub: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((claim as u64) << 20 | sub as u64)
}

fn column(m: &ScoreMatrix, col: Option<usize>) -> CliResult<ScoreMatrix> {
    let rows: Vec<Vec<f64>> = (0..m.rows()).map(|r| col.map(|c| vec![m.get(r, c)]).unwrap_or_default()).collect();
    ScoreMatrix::from_rows(&rows, m.scorer_name().to_string(), m.bounded()).map_err(data("score matrix"))
}

pub(crate) fn run(args: RetrieveArgs, ctx: &mut Ctx) -> CliResult<Report> {
    let decomp = match args.decomp.as_str() {
        "gold" => Decomp::Gold,
        "claim" => Decomp::Claim,
        path => Decomp::File(PathBuf::from(path)),
    };
    if args.granularity == Granularity::Subquestion && !matches!(decomp, Decomp::Gold) {
        return Err(CliError::Usage("--granularity subquestion needs --decomp gold".into()));
    }
    if args.baseline == Some(RetrievalBaseline::Human) && args.granularity == Granularity::Subquestion {
        return Err(CliError::Usage("--baseline human is computed per claim".into()));
    }
    if matches!(decomp, Decomp::Claim) && matches!(args.mode, ModeArg::Refute | ModeArg::Merged | ModeArg::All) && args.baseline.is_none() {
        return Err(CliError::Usage("a claim cannot be negated; use --mode support with --decomp claim".into()));
    }
    let records = args.data.load(ctx)?;
    let claims: Vec<JudgedClaim> = records
        .iter()
        .filter_map(JudgedClaim::new)
        .filter(|c| c.paragraph_count() > 0)
        .collect();
    if claims.is_empty() {
        return Err(CliError::Data("no claim has paragraphs with judgments".into()));
    }
    let scope = match args.gold_scope {
        ScopeArg::ByMode => GoldScope::ByMode,
        ScopeArg::Relevant => GoldScope::Relevant,
    };
    let modes: Vec<Mode> = match args.mode {
        ModeArg::Support => vec![Mode::Support],
        ModeArg::Refute => vec![Mode::Refute],
        ModeArg::Merged => vec![Mode::Merged],
        ModeArg::All => vec![Mode::Support, Mode::Refute, Mode::Merged],
    };

    let mut j = RetrieveReport {
        scorer: String::new(),
        decomp: args.decomp.clone(),
        granularity: args.granularity,
        gold_scope: args.gold_scope,
        k: KArgRepr(args.k),
        seed: None,
        split: args.data.split.clone(),
        n_claims: claims.len(),
        n_units: 0,
        missing_negations: 0,
        rows: Vec::new(),
    };

    if args.baseline == Some(RetrievalBaseline::Human) {
        let votes: Vec<Vec<Vec<bool>>> = claims
            .iter()
            .filter(|c| c.annotators().len() == 3)
            .map(|c| c.annotators().into_iter().map(|a| c.annotator_relevant(a)).collect())
            .collect();
        if votes.is_empty() {
            return Err(CliError::Data("human agreement needs claims judged by exactly 3 annotators".into()));
        }
        let f1 = human_agreement(&votes).map_err(data("human agreement"))?;
        j.scorer = "human".into();
        j.n_claims = votes.len();
        j.n_units = votes.len();
        j.rows.push(ModeRow { mode: "relevant", f1, macro_f1: f1, true_positives: None, selected: None, gold: None });
        return Ok(finish(j));
    }

    let random = args.baseline == Some(RetrievalBaseline::Random);
    let source = if random { None } else { Some(make_scorer(&args, rayon::current_num_threads())?) };
    let needs_hypotheses = matches!(source, Some(ScoreSource::Live(_)));

    // Hypotheses, converted serially so external conversions happen in a fixed order.
    let generated = match &decomp {
        Decomp::File(p) if needs_hypotheses => Some(read_decompositions(p)?),
        _ => None,
    };
    let needs_negation = modes.iter().any(|m| *m != Mode::Support);
    let mut converter = if needs_hypotheses && needs_negation && !matches!(decomp, Decomp::Claim) {
        Some(Converter::new(args.converter.as_deref(), Duration::from_secs(args.timeout))?)
    } else {
        None
    };
    let mut units = Vec::with_capacity(claims.len());
    for judged in claims {
        let record = judged.record;
        let questions: Vec<String> = if !needs_hypotheses {
            Vec::new()
        } else {
            match &decomp {
                Decomp::Gold => record.annotations[judged.annotation_index].subquestions.iter().map(|q| q.text.clone()).collect(),
                Decomp::Claim => Vec::new(),
                Decomp::File(p) => generated
                    .as_ref()
                    .and_then(|g| g.get(&record.id))
                    .cloned()
                    .ok_or_else(|| CliError::Data(format!("{}: no decomposition for claim `{}`", p.display(), record.id)))?,
            }
        };
        let mut hypotheses = Vec::with_capacity(questions.len().max(1));
        if matches!(decomp, Decomp::Claim) && needs_hypotheses {
            hypotheses.push(Hypothesis { affirmative: record.claim.clone(), negated: None });
        }
        for q in questions {
            let h = match converter.as_mut() {
                Some(c) => match c.convert(&q)? {
                    Ok(pair) => Hypothesis::from(pair),
                    Err(_) => {
                        j.missing_negations += 1;
                        Hypothesis { affirmative: q, negated: None }
                    }
                },
                None => match crate::codec::question_to_statements(&q) {
                    Ok(pair) => Hypothesis::from(pair),
                    Err(_) => Hypothesis { affirmative: q, negated: None },
                },
            };
            hypotheses.push(h);
        }
        units.push(Unitized { judged, hypotheses });
    }
    if j.missing_negations > 0 {
        ctx.warnings.push(format!(
            "{} question(s) could not be negated and are left out of refute scoring; pass --converter to cover them",
            j.missing_negations
        ));
    }
    let seed = ctx.seed;
    let k = args.k;
    let granularity = args.granularity;

    let per_claim: Vec<(Vec<Tally>, usize)> = units
        .par_iter()
        .enumerate()
        .map(|(ci, u)| -> CliResult<(Vec<Tally>, usize)> {
            let record = u.judged.record;
            let m = u.judged.paragraph_count();
            let claim_ctx = format!("claim `{}`", record.id);
            // Support and refute matrices, plus the refute column of each hypothesis.
            let (support, refute, refute_cols) = match &source {
                None => (None, None, Vec::new()),
                Some(ScoreSource::Files(files)) => {
                    let get = |p: Polarity| -> CliResult<Option<ScoreMatrix>> {
                        match files.get(&(record.id.clone(), p)) {
                            Some(mx) if mx.rows() != m => Err(CliError::Data(format!(
                                "{claim_ctx}: score matrix has {} rows for {m} paragraphs",
                                mx.rows()
                            ))),
                            other => Ok(other.cloned()),
                        }
                    };
                    let s = get(Polarity::Affirmative)?;
                    let r = get(Polarity::Negated)?;
                    let cols = r.as_ref().map_or(0, ScoreMatrix::cols);
                    (s, r, (0..cols).map(Some).collect())
                }
                Some(ScoreSource::Live(scorer)) => {
                    let paragraphs = &record.article_paragraphs;
                    let s = if modes.iter().any(|md| *md != Mode::Refute) {
                        let hs: Vec<String> = u.hypotheses.iter().map(|h| h.affirmative.clone()).collect();
                        Some(scorer.score(paragraphs, &hs).map_err(data(&claim_ctx))?)
                    } else {
                        None
                    };
                    let mut cols = Vec::with_capacity(u.hypotheses.len());
                    let mut negs = Vec::new();
                    for h in &u.hypotheses {
                        cols.push(h.negated.as_ref().map(|n| {
                            negs.push(n.clone());
                            negs.len() - 1
                        }));
                    }
                    let r = if needs_negation { Some(scorer.score(paragraphs, &negs).map_err(data(&claim_ctx))?) } else { None };
                    (s, r, cols)
                }
            };
            let missing = |what: &'static str| CliError::Data(format!("{claim_ctx}: no {what} score matrix"));

            // (support, refute, gold, unit index) for each retrieval unit.
            let mut unit_inputs: Vec<(Option<ScoreMatrix>, Option<ScoreMatrix>, GoldSets, usize)> = Vec::new();
            match granularity {
                Granularity::Claim => unit_inputs.push((support.clone(), refute.clone(), u.judged.claim_gold(), 0)),
                Granularity::Subquestion => {
                    for s in u.judged.judged_subquestions() {
                        let sup = match &support {
                            Some(mx) if s < mx.cols() => Some(column(mx, Some(s))?),
                            Some(_) => return Err(CliError::Data(format!("{claim_ctx}: no score column for subquestion {s}"))),
                            None => None,
                        };
                        let refc = match &refute {
                            Some(mx) => Some(column(mx, refute_cols.get(s).copied().flatten().filter(|&c| c < mx.cols()))?),
                            None => None,
                        };
                        unit_inputs.push((sup, refc, u.judged.subquestion_gold(s), s + 1));
                    }
                }
            }
            let mut tallies = vec![Tally::default(); modes.len()];
            for (sup, refc, gold, ui) in &unit_inputs {
                let kk = match k {
                    KArg::Gold => gold.relevant().len(),
                    KArg::Fixed(n) => n.min(m),
                };
                let labels = if source.is_none() {
                    Some(random_retrieval_baseline(m, None, unit_seed(seed, ci, *ui)).map_err(data(&claim_ctx))?)
                } else {
                    None
                };
                for (mi, mode) in modes.iter().enumerate() {
                    let selected = match &labels {
                        Some(l) => labels_to_selection(l, *mode),
                        None => {
                            if *mode != Mode::Refute && sup.is_none() {
                                return Err(missing("affirmative"));
                            }
                            if *mode != Mode::Support && refc.is_none() {
                                return Err(missing("negated"));
                            }
                            retrieve_from_matrices(sup.as_ref(), refc.as_ref(), *mode, kk).map_err(data(&claim_ctx))?.selected
                        }
                    };
                    tallies[mi].add(&selected, &gold.for_mode(*mode, scope));
                }
            }
            Ok((tallies, unit_inputs.len()))
        })
        .collect::<CliResult<_>>()?;

    let mut totals = vec![Tally::default(); modes.len()];
    for (tallies, n) in per_claim {
        j.n_units += n;
        for (t, x) in totals.iter_mut().zip(tallies) {
            *t = t.merge(x);
        }
    }
    j.scorer = match &source {
        None => {
            j.seed = Some(seed);
            "random".into()
        }
        Some(s) => s.name(),
    };
    j.rows = modes.iter().zip(totals).map(|(m, t)| ModeRow::new(m.name(), t)).collect();
    Ok(finish(j))
}

fn finish(j: RetrieveReport) -> Report {
    let mut r = Report::new("Evidence retrieval", &j, vec!["mode", "f1", "macro_f1", "true_pos", "selected", "gold"]);
    for row in &j.rows {
        r.row(vec![
            row.mode.to_string(),
            num(row.f1),
            num(row.macro_f1),
            count(row.true_positives),
            count(row.selected),
            count(row.gold),
        ]);
    }
    r
}

fn count(n: Option<usize>) -> String {
    n.map_or_else(|| "-".to_string(), |n| n.to_string())
}

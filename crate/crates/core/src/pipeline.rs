//! End-to-end orchestration: run configuration, stage functions, artifact
//! files and manifests.
//!
//! Every stage reads its inputs (the configured data files plus artifacts of
//! earlier stages in the output directory), writes its outputs atomically and
//! records a `manifest-<stage>.json` with the configuration hash, input and
//! output fingerprints and the tool version. Text outputs start with a
//! `# config-hash: ...` line.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{load_articles, load_debates, Article, Debate, DebateType, IngestWarning, SpeakerRole};
use crate::error::{Error, Result};
use crate::features::{default_battery, BowVocabulary, FeatureSchema, Featurizer, FlowConfig, FlowContext, LexiconSet, Stopwords, BOW_MIN_COUNT};
use crate::mediagraph::{fragmentation, load_party_map, write_fragmentation_csv, FragmentationRow, GraphConfig, Mode, Party};
use crate::ngramlm::{corpus_sentences, LmSet};
use crate::pairs::{build_pairs, read_pairs, split_train_test, write_pairs, PairConfig, PairRecord, Split};
use crate::quotematch::{build_quote_index, MatchConfig, QuoteIndex, QuoteMatch};
use crate::ranker::{evaluate, train, EvalItem, EvalReport, Model, TrainConfig};
use crate::stats::{aggregate_by_year, coverage_fractions, feature_battery, linear_trend, quote_decile_distribution, write_battery_csv, TestResult, DEFAULT_BATTERY_SIZE};

pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

const LM_SAMPLE: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/lexicons/lm_sample.txt"));

/// Where the language-model features come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LmSource {
    /// No language model; the three score features are zero.
    None,
    /// The small sample corpus shipped with the tool.
    Embedded,
    /// The plain-text file at `paths.lm_corpus`.
    Corpus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub transcripts: Option<PathBuf>,
    pub articles: Option<PathBuf>,
    /// Directory of `<name>.txt` lexicon files; embedded lists otherwise.
    pub lexicons: Option<PathBuf>,
    pub lm_corpus: Option<PathBuf>,
    pub party_map: Option<PathBuf>,
    pub output_dir: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            transcripts: None,
            articles: None,
            lexicons: None,
            lm_corpus: None,
            party_map: None,
            output_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub lm: LmSource,
    pub lm_min_count: u64,
    pub flow: FlowConfig,
    pub bag_of_words: bool,
    pub bow_min_count: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            lm: LmSource::Embedded,
            lm_min_count: 1,
            flow: FlowConfig::default(),
            bag_of_words: false,
            bow_min_count: BOW_MIN_COUNT,
        }
    }
}

/// Everything a run depends on. The global seed overrides the seeds of the
/// pair, training and graph sections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub paths: Paths,
    pub matching: MatchConfig,
    pub pairs: PairConfig,
    pub train: TrainConfig,
    pub graph: GraphConfig,
    pub features: FeatureConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            paths: Paths::default(),
            matching: MatchConfig::default(),
            pairs: PairConfig::default(),
            train: TrainConfig::default(),
            graph: GraphConfig::default(),
            features: FeatureConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(s: &str) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(s).map_err(|e| Error::InvalidInput(format!("config: {e}")))?;
        cfg.set_seed(cfg.seed);
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&s).map_err(|e| match e {
            Error::InvalidInput(m) => Error::InvalidInput(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidInput(format!("config: {e}")))
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.pairs.seed = seed;
        self.train.seed = seed;
        self.graph.seed = seed;
    }

    /// Hash of everything that can change results. The output directory is
    /// left out so identical runs into different directories agree.
    pub fn hash(&self) -> Result<String> {
        let mut c = self.clone();
        c.paths.output_dir = PathBuf::new();
        Ok(crate::short_hash([c.to_toml()?.as_str()]))
    }

    /// Check parameter ranges and that every configured path exists.
    pub fn validate(&self) -> Result<()> {
        self.matching.validate()?;
        self.pairs.validate()?;
        self.train.validate()?;
        self.graph.validate()?;
        self.features.flow.validate()?;
        let p = &self.paths;
        for (name, path) in [
            ("paths.transcripts", &p.transcripts),
            ("paths.articles", &p.articles),
            ("paths.lexicons", &p.lexicons),
            ("paths.lm_corpus", &p.lm_corpus),
            ("paths.party_map", &p.party_map),
        ] {
            if let Some(path) = path {
                if !path.exists() {
                    return Err(Error::InvalidInput(format!("{name}: {} does not exist", path.display())));
                }
            }
        }
        if self.features.lm == LmSource::Corpus && p.lm_corpus.is_none() {
            return Err(Error::InvalidInput("features.lm = \"corpus\" needs paths.lm_corpus".into()));
        }
        Ok(())
    }
}

/// Pipeline stages, in run order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Ingest,
    Match,
    Pairs,
    Featurize,
    Train,
    Evaluate,
    FeatureTest,
    Describe,
    Graph,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Match => "match",
            Stage::Pairs => "pairs",
            Stage::Featurize => "featurize",
            Stage::Train => "train",
            Stage::Evaluate => "evaluate",
            Stage::FeatureTest => "feature-test",
            Stage::Describe => "describe",
            Stage::Graph => "graph",
        }
    }
}

/// Artifact file names inside the output directory.
pub mod artifact {
    pub const INGEST: &str = "ingest.csv";
    pub const WARNINGS: &str = "ingest_warnings.csv";
    pub const QUOTE_INDEX: &str = "quote_index.csv";
    pub const MATCHES: &str = "matches.jsonl";
    pub const PAIRS: &str = "pairs.jsonl";
    pub const FEATURES: &str = "features.csv";
    pub const MODEL: &str = "model.json";
    pub const CV: &str = "cv.csv";
    pub const EVALUATION: &str = "evaluation.csv";
    pub const FEATURE_TESTS: &str = "feature_tests.csv";
    pub const DECILES: &str = "describe_deciles.csv";
    pub const COVERAGE: &str = "describe_coverage.csv";
    pub const YEARS: &str = "describe_years.csv";
    pub const TRENDS: &str = "describe_trends.csv";
    pub const FRAGMENTATION: &str = "fragmentation.csv";
    pub const PARTITIONS: &str = "partitions.csv";
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub stage: String,
    pub config_hash: String,
    pub inputs: Vec<Fingerprint>,
    pub outputs: Vec<Fingerprint>,
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Write via a temporary file in the same directory and rename into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidInput(e.to_string())
}

/// A run in progress: configuration, its hash and the files touched so far.
pub struct Run {
    pub cfg: RunConfig,
    pub hash: String,
    inputs: Vec<Fingerprint>,
    outputs: Vec<Fingerprint>,
}

impl Run {
    pub fn new(cfg: RunConfig) -> Result<Self> {
        cfg.validate()?;
        std::fs::create_dir_all(&cfg.paths.output_dir).map_err(|e| Error::io(&cfg.paths.output_dir, e))?;
        let hash = cfg.hash()?;
        Ok(Run { cfg, hash, inputs: vec![], outputs: vec![] })
    }

    pub fn out(&self, name: &str) -> PathBuf {
        self.cfg.paths.output_dir.join(name)
    }

    fn header(&self) -> String {
        format!("# config-hash: {}\n", self.hash)
    }

    /// Record an external input file.
    fn input(&mut self, path: &Path) -> Result<()> {
        let fp = Fingerprint { path: path.display().to_string(), sha256: sha256_file(path)? };
        if !self.inputs.contains(&fp) {
            self.inputs.push(fp);
        }
        Ok(())
    }

    /// Read an artifact of an earlier stage, naming the stage that makes it
    /// when it is missing.
    fn artifact(&mut self, name: &str, producer: &str) -> Result<String> {
        let path = self.out(name);
        if !path.exists() {
            return Err(Error::InvalidInput(format!(
                "missing {}: run `{producer}` first",
                path.display()
            )));
        }
        let s = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let fp = Fingerprint { path: name.to_string(), sha256: hex::encode(Sha256::digest(s.as_bytes())) };
        if !self.inputs.contains(&fp) {
            self.inputs.push(fp);
        }
        Ok(s)
    }

    fn emit(&mut self, name: &str, body: &[u8]) -> Result<()> {
        let mut bytes = self.header().into_bytes();
        bytes.extend_from_slice(body);
        write_atomic(&self.out(name), &bytes)?;
        self.outputs.push(Fingerprint { path: name.to_string(), sha256: hex::encode(Sha256::digest(&bytes)) });
        Ok(())
    }

    /// Close a stage: write its manifest and reset the file lists.
    fn finish(&mut self, stage: Stage) -> Result<Manifest> {
        let manifest = Manifest {
            tool: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
            stage: stage.as_str().into(),
            config_hash: self.hash.clone(),
            inputs: std::mem::take(&mut self.inputs),
            outputs: std::mem::take(&mut self.outputs),
        };
        let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::InvalidInput(e.to_string()))?;
        write_atomic(&self.out(&format!("manifest-{}.json", stage.as_str())), format!("{json}\n").as_bytes())?;
        Ok(manifest)
    }

    fn require<'a>(&self, path: &'a Option<PathBuf>, key: &str, stage: Stage) -> Result<&'a PathBuf> {
        path.as_ref()
            .ok_or_else(|| Error::InvalidInput(format!("`{}` needs {key}", stage.as_str())))
    }

    fn load_debates(&mut self, stage: Stage) -> Result<(Vec<Debate>, Vec<IngestWarning>)> {
        let path = self.require(&self.cfg.paths.transcripts.clone(), "paths.transcripts (--transcripts)", stage)?.clone();
        self.input(&path)?;
        load_debates(&path)
    }

    fn load_articles(&mut self, debates: &[Debate], stage: Stage) -> Result<(Vec<Article>, Vec<IngestWarning>)> {
        let path = self.require(&self.cfg.paths.articles.clone(), "paths.articles (--articles)", stage)?.clone();
        self.input(&path)?;
        let dates = debates.iter().map(|d| (d.id.clone(), d.date)).collect();
        load_articles(&path, &dates)
    }

    fn lexicons(&mut self) -> Result<LexiconSet> {
        match self.cfg.paths.lexicons.clone() {
            Some(dir) => LexiconSet::from_dir(&dir),
            None => Ok(LexiconSet::embedded()),
        }
    }

    fn quote_index(&mut self) -> Result<QuoteIndex> {
        let s = self.artifact(artifact::QUOTE_INDEX, "match")?;
        QuoteIndex::read_csv(s.as_bytes())
    }

    fn pair_records(&mut self) -> Result<Vec<PairRecord>> {
        let s = self.artifact(artifact::PAIRS, "pairs")?;
        let records = read_pairs(BufReader::new(strip_comments(&s).as_bytes()))?;
        if let Some(r) = records.iter().find(|r| r.config != self.cfg.pairs) {
            return Err(Error::InvalidInput(format!(
                "{} was built with a different pair configuration (pair {}); rerun `pairs`",
                artifact::PAIRS,
                r.pair.id
            )));
        }
        Ok(records)
    }

    fn features(&mut self) -> Result<FeatureTable> {
        let s = self.artifact(artifact::FEATURES, "featurize")?;
        FeatureTable::read_csv(&s)
    }
}

fn strip_comments(s: &str) -> String {
    s.lines().filter(|l| !l.starts_with('#')).fold(String::new(), |mut acc, l| {
        acc.push_str(l);
        acc.push('\n');
        acc
    })
}

/// Match every debate's articles and merge the per-debate quote indexes.
pub fn match_corpus(debates: &[Debate], articles: &[Article], lexicons: &LexiconSet, cfg: &MatchConfig) -> (QuoteIndex, Vec<QuoteMatch>, usize) {
    let outcomes: Vec<_> = debates.par_iter().map(|d| build_quote_index(d, articles, lexicons, cfg)).collect();
    let mut index = QuoteIndex::new();
    let mut matches = Vec::new();
    let mut quotations = 0;
    for o in outcomes {
        index.merge(&o.index);
        matches.extend(o.matches);
        quotations += o.quotations;
    }
    (index, matches, quotations)
}

/// Pairs for every debate, with a seeded train/test split over the whole set.
pub fn pair_records(debates: &[Debate], index: &QuoteIndex, cfg: &PairConfig) -> Vec<PairRecord> {
    let pairs: Vec<_> = debates.par_iter().flat_map_iter(|d| build_pairs(d, index, cfg)).collect();
    let (train, test) = split_train_test(&pairs, cfg);
    let mut records: Vec<PairRecord> = train
        .into_iter()
        .map(|pair| PairRecord { pair, split: Split::Train, config: cfg.clone() })
        .chain(test.into_iter().map(|pair| PairRecord { pair, split: Split::Test, config: cfg.clone() }))
        .collect();
    records.sort_by(|a, b| (&a.pair.debate_id, pair_number(&a.pair.id)).cmp(&(&b.pair.debate_id, pair_number(&b.pair.id))));
    records
}

fn pair_number(id: &str) -> usize {
    id.rsplit('#').next().and_then(|n| n.parse().ok()).unwrap_or(0)
}

/// Build the featurizer the configuration asks for.
pub fn build_featurizer(cfg: &FeatureConfig, lexicons: LexiconSet, lm_corpus: Option<&Path>, debates: &[Debate]) -> Result<Featurizer> {
    let lms = match cfg.lm {
        LmSource::None => None,
        LmSource::Embedded => Some(LmSet::train(&corpus_sentences(LM_SAMPLE), cfg.lm_min_count)?),
        LmSource::Corpus => {
            let path = lm_corpus.ok_or_else(|| Error::InvalidInput("language-model corpus path not set".into()))?;
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            Some(LmSet::train(&corpus_sentences(&text), cfg.lm_min_count)?)
        }
    };
    let bow = cfg.bag_of_words.then(|| {
        BowVocabulary::build(debates.iter().flat_map(|d| d.sentences().map(|s| s.tokens.as_slice())), cfg.bow_min_count)
    });
    Featurizer::new(lexicons, Stopwords::embedded(), lms, cfg.flow.clone(), bow)
}

/// One pair's difference vector, `first - second`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub pair_id: String,
    pub debate_id: String,
    pub debate_type: DebateType,
    pub split: Split,
    /// True when the first sentence is the highlight.
    pub label: bool,
    pub percentile: u32,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub schema: FeatureSchema,
    pub rows: Vec<FeatureRow>,
}

const FEATURE_META: [&str; 6] = ["pair_id", "debate_id", "debate_type", "split", "label", "percentile"];

impl FeatureTable {
    pub fn featurize(featurizer: &Featurizer, debates: &[Debate], records: &[PairRecord]) -> Result<Self> {
        let by_id: HashMap<&str, &Debate> = debates.iter().map(|d| (d.id.as_str(), d)).collect();
        let mut grouped: BTreeMap<&str, Vec<&PairRecord>> = BTreeMap::new();
        for r in records {
            grouped.entry(r.pair.debate_id.as_str()).or_default().push(r);
        }
        let parts: Vec<Result<Vec<(usize, FeatureRow)>>> = grouped
            .into_par_iter()
            .map(|(id, recs)| {
                let debate = by_id
                    .get(id)
                    .ok_or_else(|| Error::InvalidInput(format!("pairs mention unknown debate `{id}`")))?;
                let ctx = FlowContext::new(debate, &featurizer.stopwords);
                recs.into_iter()
                    .map(|r| {
                        let (values, label) = featurizer.pair_diff(&r.pair, debate, &ctx)?;
                        let order = records.iter().position(|x| std::ptr::eq(x, r)).unwrap_or(0);
                        Ok((
                            order,
                            FeatureRow {
                                pair_id: r.pair.id.clone(),
                                debate_id: r.pair.debate_id.clone(),
                                debate_type: r.pair.debate_type,
                                split: r.split,
                                label,
                                percentile: r.pair.highlight_percentile,
                                values,
                            },
                        ))
                    })
                    .collect()
            })
            .collect();
        let mut rows = Vec::with_capacity(records.len());
        for p in parts {
            rows.extend(p?);
        }
        rows.sort_by_key(|(i, _)| *i);
        Ok(FeatureTable { schema: featurizer.schema().clone(), rows: rows.into_iter().map(|(_, r)| r).collect() })
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &FeatureRow> {
        self.rows.iter().filter(move |r| r.split == split)
    }

    pub fn write_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(FEATURE_META.iter().copied().chain(self.schema.names.iter().map(String::as_str))).map_err(csv_err)?;
        for r in &self.rows {
            let mut rec = vec![
                r.pair_id.clone(),
                r.debate_id.clone(),
                r.debate_type.as_str().to_string(),
                split_name(r.split).to_string(),
                u8::from(r.label).to_string(),
                r.percentile.to_string(),
            ];
            rec.extend(r.values.iter().map(|v| v.to_string()));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))
    }

    pub fn read_csv(s: &str) -> Result<Self> {
        let path = artifact::FEATURES;
        let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(s.as_bytes());
        let header = rd.headers().map_err(|e| Error::parse(path, 1, e.to_string()))?.clone();
        if header.len() < FEATURE_META.len() || header.iter().zip(FEATURE_META).any(|(a, b)| a != b) {
            return Err(Error::parse(path, 1, "unexpected header"));
        }
        let names: Vec<String> = header.iter().skip(FEATURE_META.len()).map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, rec) in rd.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::parse(path, line, e.to_string()))?;
            let bad = |m: &str| Error::parse(path, line, m.to_string());
            let debate_type = DebateType::ALL
                .into_iter()
                .find(|t| t.as_str() == &rec[2])
                .ok_or_else(|| bad("unknown debate type"))?;
            let split = match &rec[3] {
                "train" => Split::Train,
                "test" => Split::Test,
                _ => return Err(bad("split must be train or test")),
            };
            let values = rec
                .iter()
                .skip(FEATURE_META.len())
                .map(|v| v.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| bad("feature value is not a number"))?;
            rows.push(FeatureRow {
                pair_id: rec[0].to_string(),
                debate_id: rec[1].to_string(),
                debate_type,
                split,
                label: &rec[4] == "1",
                percentile: rec[5].parse().map_err(|_| bad("bad percentile"))?,
                values,
            });
        }
        Ok(FeatureTable { schema: FeatureSchema::new(names), rows })
    }
}

fn split_name(s: Split) -> &'static str {
    match s {
        Split::Train => "train",
        Split::Test => "test",
    }
}

/// Fit the ranker on the training rows.
pub fn train_on(table: &FeatureTable, cfg: &TrainConfig) -> Result<Model> {
    let (x, y): (Vec<Vec<f64>>, Vec<bool>) = table.split(Split::Train).map(|r| (r.values.clone(), r.label)).unzip();
    if x.is_empty() {
        return Err(Error::Degenerate("no training pairs".into()));
    }
    train(&x, &y, &table.schema.names, &table.schema.id, cfg)
}

/// Held-out accuracy overall, by prominence and by debate type.
pub fn evaluate_on(model: &Model, table: &FeatureTable) -> Result<EvalReport> {
    let items: Vec<EvalItem> = table
        .split(Split::Test)
        .map(|r| EvalItem { x: r.values.clone(), label: r.label, percentile: r.percentile, debate_type: r.debate_type })
        .collect();
    evaluate(model, &items, &table.schema.id)
}

/// Paired one-sided tests of the default battery over all pairs, highlight
/// minus non-highlight, Bonferroni-corrected for the battery size.
pub fn feature_tests(table: &FeatureTable) -> Result<Vec<TestResult>> {
    let columns = default_battery()
        .into_iter()
        .map(|name| {
            let j = table
                .schema
                .index_of(&name)
                .ok_or_else(|| Error::InvalidInput(format!("feature `{name}` is not in the schema")))?;
            let diffs: Vec<f64> = table.rows.iter().map(|r| if r.label { r.values[j] } else { -r.values[j] }).collect();
            let zeros = vec![0.0; diffs.len()];
            Ok((name, diffs, zeros))
        })
        .collect::<Result<Vec<_>>>()?;
    feature_battery(&columns, DEFAULT_BATTERY_SIZE)
}

/// Which evaluation slices to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slice {
    All,
    Overall,
    Prominence,
    DebateType,
}

pub fn evaluation_csv(report: &EvalReport, slice: Slice) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["slice_kind", "slice", "n", "correct", "accuracy"]).map_err(csv_err)?;
    let mut groups = Vec::new();
    if matches!(slice, Slice::All | Slice::Overall) {
        groups.push(("overall", std::slice::from_ref(&report.overall)));
    }
    if matches!(slice, Slice::All | Slice::Prominence) {
        groups.push(("prominence", report.prominence.as_slice()));
    }
    if matches!(slice, Slice::All | Slice::DebateType) {
        groups.push(("debate_type", report.debate_type.as_slice()));
    }
    for (kind, rows) in groups {
        for s in rows {
            w.write_record([
                kind.to_string(),
                s.slice.clone(),
                s.n.to_string(),
                s.correct.to_string(),
                s.accuracy.map(|a| format!("{a:.6}")).unwrap_or_default(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))
}

/// Everything `report-all` produces, for callers that want numbers rather
/// than files.
#[derive(Debug, Clone)]
pub struct Report {
    pub debates: usize,
    pub articles: usize,
    pub quotations: usize,
    pub matches: usize,
    pub pairs: usize,
    pub model: Model,
    pub evaluation: EvalReport,
    pub feature_tests: Vec<TestResult>,
    pub fragmentation: Vec<FragmentationRow>,
    pub manifests: Vec<Manifest>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    config_hash: String,
    model: Model,
}

pub fn ingest(run: &mut Run) -> Result<(Vec<Debate>, Vec<Article>, Manifest)> {
    let (debates, mut warnings) = run.load_debates(Stage::Ingest)?;
    let (articles, w2) = run.load_articles(&debates, Stage::Ingest)?;
    warnings.extend(w2);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["debate_id", "election_year", "debate_type", "date", "turns", "sentences", "articles"]).map_err(csv_err)?;
    for d in &debates {
        let n_articles = articles.iter().filter(|a| a.debate_id == d.id).count();
        w.write_record([
            d.id.clone(),
            d.election_year.to_string(),
            d.debate_type.as_str().into(),
            d.date.to_string(),
            d.turns.len().to_string(),
            d.sentence_count().to_string(),
            n_articles.to_string(),
        ])
        .map_err(csv_err)?;
    }
    run.emit(artifact::INGEST, &w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["source", "line", "message"]).map_err(csv_err)?;
    for x in &warnings {
        log::warn!("{}:{}: {}", x.source, x.line, x.message);
        w.write_record([x.source.clone(), x.line.to_string(), x.message.clone()]).map_err(csv_err)?;
    }
    run.emit(artifact::WARNINGS, &w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?)?;
    let m = run.finish(Stage::Ingest)?;
    Ok((debates, articles, m))
}

pub fn match_stage(run: &mut Run) -> Result<(QuoteIndex, Vec<QuoteMatch>, usize, Manifest)> {
    let (debates, _) = run.load_debates(Stage::Match)?;
    let (articles, _) = run.load_articles(&debates, Stage::Match)?;
    let lexicons = run.lexicons()?;
    let (index, matches, quotations) = match_corpus(&debates, &articles, &lexicons, &run.cfg.matching);
    log::info!("{} of {quotations} quotations matched", matches.len());
    let mut buf = Vec::new();
    index.write_csv(&mut buf)?;
    run.emit(artifact::QUOTE_INDEX, &buf)?;
    let mut buf = String::new();
    for m in &matches {
        let line = serde_json::to_string(m).map_err(|e| Error::InvalidInput(e.to_string()))?;
        let _ = writeln!(buf, "{line}");
    }
    run.emit(artifact::MATCHES, buf.as_bytes())?;
    let manifest = run.finish(Stage::Match)?;
    Ok((index, matches, quotations, manifest))
}

pub fn pairs_stage(run: &mut Run) -> Result<(Vec<PairRecord>, Manifest)> {
    let (debates, _) = run.load_debates(Stage::Pairs)?;
    let index = run.quote_index()?;
    let records = pair_records(&debates, &index, &run.cfg.pairs);
    if records.is_empty() {
        log::warn!("no pairs could be built");
    }
    let mut buf = Vec::new();
    write_pairs(&records, &mut buf)?;
    run.emit(artifact::PAIRS, &buf)?;
    let m = run.finish(Stage::Pairs)?;
    Ok((records, m))
}

pub fn featurize_stage(run: &mut Run) -> Result<(FeatureTable, Manifest)> {
    let (debates, _) = run.load_debates(Stage::Featurize)?;
    let records = run.pair_records()?;
    let lexicons = run.lexicons()?;
    let lm_corpus = run.cfg.paths.lm_corpus.clone();
    if let (LmSource::Corpus, Some(p)) = (run.cfg.features.lm, &lm_corpus) {
        run.input(p)?;
    }
    let featurizer = build_featurizer(&run.cfg.features, lexicons, lm_corpus.as_deref(), &debates)?;
    let table = FeatureTable::featurize(&featurizer, &debates, &records)?;
    let body = table.write_csv()?;
    run.emit(artifact::FEATURES, &body)?;
    let m = run.finish(Stage::Featurize)?;
    Ok((table, m))
}

pub fn train_stage(run: &mut Run) -> Result<(Model, Manifest)> {
    let table = run.features()?;
    let model = train_on(&table, &run.cfg.train)?;
    let file = ModelFile { config_hash: run.hash.clone(), model };
    let json = serde_json::to_string_pretty(&file).map_err(|e| Error::InvalidInput(e.to_string()))?;
    write_atomic(&run.out(artifact::MODEL), format!("{json}\n").as_bytes())?;
    run.outputs.push(Fingerprint { path: artifact::MODEL.into(), sha256: sha256_file(&run.out(artifact::MODEL))? });
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["l2", "mean_accuracy", "fold_accuracy"]).map_err(csv_err)?;
    for r in &file.model.cv {
        let folds: Vec<String> = r.fold_accuracy.iter().map(|a| format!("{a:.6}")).collect();
        w.write_record([r.l2.to_string(), format!("{:.6}", r.mean_accuracy), folds.join(";")]).map_err(csv_err)?;
    }
    run.emit(artifact::CV, &w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?)?;
    let m = run.finish(Stage::Train)?;
    Ok((file.model, m))
}

pub fn evaluate_stage(run: &mut Run, slice: Slice) -> Result<(EvalReport, Manifest)> {
    let table = run.features()?;
    let s = run.artifact(artifact::MODEL, "train")?;
    let file: ModelFile = serde_json::from_str(&s).map_err(|e| Error::parse(artifact::MODEL, 1, e.to_string()))?;
    let report = evaluate_on(&file.model, &table)?;
    run.emit(artifact::EVALUATION, &evaluation_csv(&report, slice)?)?;
    let m = run.finish(Stage::Evaluate)?;
    Ok((report, m))
}

pub fn feature_test_stage(run: &mut Run) -> Result<(Vec<TestResult>, Manifest)> {
    let table = run.features()?;
    let results = feature_tests(&table)?;
    let mut buf = Vec::new();
    write_battery_csv(&results, &mut buf)?;
    run.emit(artifact::FEATURE_TESTS, &buf)?;
    let m = run.finish(Stage::FeatureTest)?;
    Ok((results, m))
}

pub fn describe_stage(run: &mut Run) -> Result<Manifest> {
    let (debates, _) = run.load_debates(Stage::Describe)?;
    let (articles, _) = run.load_articles(&debates, Stage::Describe)?;
    let index = run.quote_index()?;
    let matches: Vec<QuoteMatch> = run
        .artifact(artifact::MATCHES, "match")?
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::parse(artifact::MATCHES, i + 2, e.to_string())))
        .collect::<Result<_>>()?;

    let mut deciles = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["debate_id".to_string(), "election_year".into(), "debate_type".into(), "total_quotes".into()];
    header.extend((1..=10).map(|d| format!("decile_{d}")));
    deciles.write_record(&header).map_err(csv_err)?;
    let mut coverage = csv::Writer::from_writer(Vec::new());
    coverage
        .write_record(["debate_id", "election_year", "debate_type", "quoted_sentence_fraction", "quote_text_fraction"])
        .map_err(csv_err)?;
    let mut series: BTreeMap<String, Vec<(i32, f64)>> = BTreeMap::new();
    for d in &debates {
        let own_articles: Vec<Article> = articles.iter().filter(|a| a.debate_id == d.id).cloned().collect();
        let own_matches: Vec<QuoteMatch> = matches.iter().filter(|m| m.debate_id == d.id).cloned().collect();
        let dist = quote_decile_distribution(d, &index);
        let mut rec = vec![d.id.clone(), d.election_year.to_string(), d.debate_type.as_str().into(), dist.total_quotes.to_string()];
        rec.extend(dist.fractions.iter().map(|f| format!("{f:.6}")));
        deciles.write_record(&rec).map_err(csv_err)?;
        let c = coverage_fractions(d, &own_articles, &index, &own_matches);
        coverage
            .write_record([
                d.id.clone(),
                d.election_year.to_string(),
                d.debate_type.as_str().into(),
                format!("{:.6}", c.quoted_sentence_fraction),
                format!("{:.6}", c.quote_text_fraction),
            ])
            .map_err(csv_err)?;
        let group = if d.debate_type == DebateType::General || d.debate_type == DebateType::Vice { "general" } else { "primary" };
        series.entry(format!("quoted_sentence_fraction:{group}")).or_default().push((d.election_year, c.quoted_sentence_fraction));
        series.entry(format!("quote_text_fraction:{group}")).or_default().push((d.election_year, c.quote_text_fraction));
    }
    run.emit(artifact::DECILES, &deciles.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?)?;
    run.emit(artifact::COVERAGE, &coverage.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?)?;

    let mut years = csv::Writer::from_writer(Vec::new());
    years.write_record(["series", "year", "n", "mean", "se"]).map_err(csv_err)?;
    let mut trends = csv::Writer::from_writer(Vec::new());
    trends.write_record(["series", "slope", "intercept", "p_value", "n"]).map_err(csv_err)?;
    for (name, points) in &series {
        for y in aggregate_by_year(points) {
            years
                .write_record([name.clone(), y.year.to_string(), y.n.to_string(), format!("{:.6}", y.mean), format!("{:.6}", y.se)])
                .map_err(csv_err)?;
        }
        let (x, v): (Vec<f64>, Vec<f64>) = points.iter().map(|&(yr, v)| (yr as f64, v)).unzip();
        match linear_trend(&x, &v) {
            Ok(t) => trends
                .write_record([name.clone(), format!("{:.6}", t.slope), format!("{:.6}", t.intercept), format!("{:.6}", t.p_value), t.n.to_string()])
                .map_err(csv_err)?,
            Err(e) => log::info!("no trend for {name}: {e}"),
        }
    }
    run.emit(artifact::YEARS, &years.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?)?;
    run.emit(artifact::TRENDS, &trends.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?)?;
    run.finish(Stage::Describe)
}

/// Fragmentation statistics per election year and weighting mode. Min-cuts
/// use general-election sentences; clustering pools every debate of the year.
pub fn graph_stage(run: &mut Run) -> Result<(Vec<FragmentationRow>, Manifest)> {
    let party_path = run.require(&run.cfg.paths.party_map.clone(), "paths.party_map (--party-map)", Stage::Graph)?.clone();
    run.input(&party_path)?;
    let parties = load_party_map(&party_path)?;
    let (debates, _) = run.load_debates(Stage::Graph)?;
    let index = run.quote_index()?;
    let mut by_year: BTreeMap<i32, (Vec<(String, Option<Party>)>, Vec<(String, Option<Party>)>)> = BTreeMap::new();
    for d in &debates {
        let entry = by_year.entry(d.election_year).or_default();
        for t in d.turns.iter().filter(|t| t.speaker_role == SpeakerRole::Candidate) {
            let party = parties.get(&t.speaker).copied();
            for s in &t.sentences {
                if d.debate_type == DebateType::General {
                    entry.0.push((s.id.clone(), party));
                }
                entry.1.push((s.id.clone(), party));
            }
        }
    }
    let mut rows = Vec::new();
    let mut partitions = csv::Writer::from_writer(Vec::new());
    partitions.write_record(["election_year", "mode", "outlet", "side"]).map_err(csv_err)?;
    for (year, (general, pooled)) in &by_year {
        for mode in Mode::ALL {
            let (row, cut) = fragmentation(&index, *year, mode, general, pooled, &run.cfg.graph);
            if let Some(cut) = cut {
                for (side, outlets) in [("democratic", &cut.democratic_side), ("republican", &cut.republican_side)] {
                    for o in outlets {
                        partitions.write_record([year.to_string(), mode.as_str().into(), o.clone(), side.into()]).map_err(csv_err)?;
                    }
                }
            }
            rows.push(row);
        }
    }
    let mut buf = Vec::new();
    write_fragmentation_csv(&rows, &mut buf)?;
    run.emit(artifact::FRAGMENTATION, &buf)?;
    run.emit(artifact::PARTITIONS, &partitions.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?)?;
    let m = run.finish(Stage::Graph)?;
    Ok((rows, m))
}

/// Run every stage in order. The graph stage is skipped when no party map is
/// configured.
pub fn report_all(cfg: RunConfig) -> Result<Report> {
    let mut run = Run::new(cfg)?;
    let mut manifests = Vec::new();
    let (debates, articles, m) = ingest(&mut run)?;
    manifests.push(m);
    let (_, matches, quotations, m) = match_stage(&mut run)?;
    manifests.push(m);
    let (records, m) = pairs_stage(&mut run)?;
    manifests.push(m);
    manifests.push(featurize_stage(&mut run)?.1);
    let (model, m) = train_stage(&mut run)?;
    manifests.push(m);
    let (evaluation, m) = evaluate_stage(&mut run, Slice::All)?;
    manifests.push(m);
    let (feature_tests, m) = feature_test_stage(&mut run)?;
    manifests.push(m);
    manifests.push(describe_stage(&mut run)?);
    let fragmentation = if run.cfg.paths.party_map.is_some() {
        let (rows, m) = graph_stage(&mut run)?;
        manifests.push(m);
        rows
    } else {
        log::info!("no party map configured; skipping graph");
        vec![]
    };
    Ok(Report {
        debates: debates.len(),
        articles: articles.len(),
        quotations,
        matches: matches.len(),
        pairs: records.len(),
        model,
        evaluation,
        feature_tests,
        fragmentation,
        manifests,
    })
}

/// Read the pairs file a `pairs` run produced, ignoring comment lines.
pub fn load_pair_file(path: &Path) -> Result<Vec<PairRecord>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let text: String = BufReader::new(f)
        .lines()
        .map(|l| l.map_err(|e| Error::io(path, e)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l + "\n")
        .collect();
    read_pairs(text.as_bytes())
}

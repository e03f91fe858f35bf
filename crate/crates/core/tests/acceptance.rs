//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use debate_highlights::corpus::Debate;
use debate_highlights::features::{default_battery, jaccard, FlowContext, LexiconSet, Stopwords};
use debate_highlights::mediagraph::{mincut_fraction, MediaMatrix, Mode, Party};
use debate_highlights::ngramlm::{corpus_sentences, LanguageModel, UNK};
use debate_highlights::pairs::{check_pair, label_highlights, Pair, PairConfig};
use debate_highlights::pipeline::{self, build_featurizer, FeatureConfig, FeatureTable, LmSource, RunConfig};
use debate_highlights::quotematch::{build_quote_index, matcher_eval, MatchConfig, QuoteIndex};
use debate_highlights::ranker::{l2_grid, train_fixed, Objective, TrainConfig};
use debate_highlights::stats::{bonferroni, paired_t_one_sided, Tail, TTest};
use debate_highlights::synth::{self, flint_debate, generate, matcher_benchmark, Signal, SynthConfig};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, format!("took {took:.1?}, limit {limit:?}"))
}

// --- 1 ---------------------------------------------------------------------

/// Cut weight of every outlet assignment, minimized, straight from the
/// matrix entries.
fn brute_force_fraction(m: &MediaMatrix) -> f64 {
    let n = m.len();
    let total: f64 = m.values.iter().flat_map(|r| r.iter().zip(&m.party)).filter(|(_, p)| p.is_some()).map(|(v, _)| v).sum();
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << n) {
        let mut cut = 0.0;
        for (i, row) in m.values.iter().enumerate() {
            let on_dem_side = mask & (1 << i) != 0;
            for (v, p) in row.iter().zip(&m.party) {
                match p {
                    Some(Party::Democratic) if !on_dem_side => cut += v,
                    Some(Party::Republican) if on_dem_side => cut += v,
                    _ => {}
                }
            }
        }
        best = best.min(cut);
    }
    best / total
}

fn c1_mincut_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let outlets = rng.gen_range(1..=12);
        let sentences = rng.gen_range(2..=15);
        let mut party: Vec<Option<Party>> = (0..sentences)
            .map(|_| match rng.gen_range(0..5) {
                0 => None,
                1 | 2 => Some(Party::Democratic),
                _ => Some(Party::Republican),
            })
            .collect();
        party[0] = Some(Party::Democratic);
        party[1] = Some(Party::Republican);
        let mut rows: Vec<Vec<f64>> = (0..outlets)
            .map(|_| (0..sentences).map(|_| if rng.gen_bool(0.4) { 0.0 } else { rng.gen_range(0.0..5.0f64).floor() }).collect())
            .collect();
        rows[0][0] += 1.0;
        rows[outlets - 1][1] += 1.0;
        let m = MediaMatrix::from_rows(
            Mode::Count,
            (0..outlets).map(|i| format!("o{i}")).collect(),
            (0..sentences).map(|j| format!("s{j}")).collect(),
            party,
            rows,
        )
        .map_err(e2s)?;
        let flow = mincut_fraction(&m).map_err(e2s)?.fraction;
        let brute = brute_force_fraction(&m);
        ensure((0.0..=0.5).contains(&flow), format!("case {case}: fraction {flow} outside [0, 0.5]"))?;
        worst = worst.max((flow - brute).abs());
        ensure((flow - brute).abs() <= 1e-9, format!("case {case}: flow {flow} vs brute force {brute}"))?;
    }
    within(Duration::from_secs(10), start)?;
    Ok(format!("200 instances, max |flow - brute| = {worst:.1e}, {:.2?}", start.elapsed()))
}

// --- 2 ---------------------------------------------------------------------

fn c2_closed_form_cut() -> Outcome {
    let m = MediaMatrix {
        mode: Mode::Count,
        outlets: vec!["a".into(), "b".into(), "c".into()],
        sentences: vec!["dem".into(), "rep".into()],
        party: vec![Some(Party::Democratic), Some(Party::Republican)],
        values: vec![vec![0.9, 0.1], vec![0.2, 0.8], vec![0.5, 0.5]],
    };
    let c = mincut_fraction(&m).map_err(e2s)?;
    ensure(c.fraction == 0.8 / 3.0, format!("fraction {} != 0.8/3.0", c.fraction))?;
    Ok(format!("fraction = {} (cut {} of {})", c.fraction, c.cut_weight, c.total_weight))
}

// --- 3 ---------------------------------------------------------------------

fn c3_ranker_gradient_and_path() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let dim = 50;
    let n = 200;
    let x: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
    let truth: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let y: Vec<bool> = x
        .iter()
        .map(|r| {
            let z: f64 = r.iter().zip(&truth).map(|(a, b)| a * b).sum();
            rng.gen::<f64>() < 1.0 / (1.0 + (-z).exp())
        })
        .collect();
    let obj = Objective { x: &x, y: &y, l2: 0.05 };
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let theta: Vec<f64> = (0..obj.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g = obj.gradient(&theta);
        let h = 1e-5;
        let fd: Vec<f64> = (0..theta.len())
            .map(|k| {
                let mut p = theta.clone();
                let mut q = theta.clone();
                p[k] += h;
                q[k] -= h;
                (obj.value(&p) - obj.value(&q)) / (2.0 * h)
            })
            .collect();
        let diff: f64 = g.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let scale = g.iter().map(|a| a * a).sum::<f64>().sqrt().max(fd.iter().map(|a| a * a).sum::<f64>().sqrt());
        let rel = diff / scale;
        worst = worst.max(rel);
        ensure(rel <= 1e-4, format!("relative gradient error {rel:.2e}"))?;
    }
    let names: Vec<String> = (0..dim).map(|k| format!("f{k}")).collect();
    let cfg = TrainConfig { tol: 1e-10, ..Default::default() };
    let mut norms = Vec::new();
    for l2 in l2_grid() {
        norms.push(train_fixed(&x, &y, &names, "s", l2, &cfg).map_err(e2s)?.weight_norm());
    }
    for w in norms.windows(2) {
        ensure(w[1] <= w[0] * (1.0 + 1e-9), format!("weight norm rose from {} to {}", w[0], w[1]))?;
    }
    Ok(format!("max rel. gradient error {worst:.1e}; |w| {:.3} -> {:.3} over 20 grid points", norms[0], norms[19]))
}

// --- 4 ---------------------------------------------------------------------

fn run_dir(corpus: &synth::SynthCorpus, data: &Path, out: &Path, lm: LmSource) -> Result<RunConfig, String> {
    let (t, a, p) = corpus.write(data).map_err(e2s)?;
    let mut cfg = RunConfig::default();
    cfg.paths.transcripts = Some(t);
    cfg.paths.articles = Some(a);
    cfg.paths.party_map = Some(p);
    cfg.paths.output_dir = out.to_path_buf();
    cfg.features.lm = lm;
    Ok(cfg)
}

fn c4_planted_signal() -> Outcome {
    let start = Instant::now();
    let corpus = generate(&SynthConfig::default(), true).map_err(e2s)?;
    let dir = tempfile::tempdir().map_err(e2s)?;
    let cfg = run_dir(&corpus, &dir.path().join("data"), &dir.path().join("out"), LmSource::None)?;
    let report = pipeline::report_all(cfg).map_err(e2s)?;
    let acc = report.evaluation.overall.accuracy.unwrap_or(0.0);
    let significant: BTreeSet<&str> = report.feature_tests.iter().filter(|t| t.significant()).map(|t| t.feature.as_str()).collect();
    let planted: BTreeSet<&str> = ["length", "negemo", "jaccard_self_prev_1"].into();
    let detail = format!(
        "{} matches, {} pairs, held-out accuracy {acc:.3} (n={}), significant {:?}, {:.1?}",
        report.matches,
        report.pairs,
        report.evaluation.overall.n,
        significant,
        start.elapsed()
    );
    ensure(acc >= 0.90, format!("accuracy below 0.90: {detail}"))?;
    ensure(significant == planted, format!("significant set differs from {planted:?}: {detail}"))?;
    within(Duration::from_secs(120), start)?;
    Ok(detail)
}

// --- 5 ---------------------------------------------------------------------

fn in_memory_run(debates: &[Debate], index: &QuoteIndex) -> Result<(FeatureTable, f64, usize, Vec<String>), String> {
    let records = pipeline::pair_records(debates, index, &PairConfig::default());
    let features = FeatureConfig { lm: LmSource::None, ..Default::default() };
    let featurizer = build_featurizer(&features, LexiconSet::embedded(), None, debates).map_err(e2s)?;
    let table = FeatureTable::featurize(&featurizer, debates, &records).map_err(e2s)?;
    let model = pipeline::train_on(&table, &TrainConfig::default()).map_err(e2s)?;
    let eval = pipeline::evaluate_on(&model, &table).map_err(e2s)?;
    let tests = pipeline::feature_tests(&table).map_err(e2s)?;
    let sig = tests
        .iter()
        .filter(|t| t.significant())
        .map(|t| format!("{} (t={:.2})", t.feature, t.t.unwrap_or(0.0)))
        .collect();
    Ok((table, eval.overall.accuracy.unwrap_or(f64::NAN), eval.overall.n, sig))
}

fn c5_null_calibration() -> Outcome {
    // one sentence style, so the length-matched partner rule has no
    // two-population structure to pick from
    let cfg = SynthConfig { debates: 100, hot_rate: 0.0, signal: Signal::Null, seed: 11, ..Default::default() };
    let corpus = generate(&cfg, false).map_err(e2s)?;
    let (_, acc, n_test, sig) = in_memory_run(&corpus.debates, &corpus.direct_index())?;
    let n_sig = sig.len();
    let detail = format!("held-out accuracy {acc:.3} on {n_test} pairs, {n_sig} of 20 features significant {sig:?}");
    ensure(n_test >= 2000, format!("too few held-out pairs: {detail}"))?;
    ensure((0.45..=0.55).contains(&acc), format!("accuracy outside [0.45, 0.55]: {detail}"))?;
    ensure(n_sig <= 1, format!("too many significant features: {detail}"))?;
    Ok(detail)
}

// --- 6 ---------------------------------------------------------------------

fn c6_matcher() -> Outcome {
    let bench = matcher_benchmark(500, 500, 0.2, 6).map_err(e2s)?;
    let lexicons = LexiconSet::embedded();
    let mut rows = Vec::new();
    let mut previous: Option<BTreeSet<(String, String)>> = None;
    let mut f1_at_08 = 0.0;
    for step in 0..=5 {
        let theta = 0.5 + 0.1 * step as f64;
        let cfg = MatchConfig { theta, ..Default::default() };
        let out = build_quote_index(&bench.debate, &bench.articles, &lexicons, &cfg);
        let predicted: BTreeSet<(String, String)> = out
            .matches
            .iter()
            .flat_map(|m| m.matched_sentence_ids.iter().map(move |s| (m.article_id.clone(), s.clone())))
            .collect();
        let r = matcher_eval(&bench.gold, &predicted);
        if step == 3 {
            f1_at_08 = r.f1;
        }
        if let Some(prev) = &previous {
            ensure(predicted.is_subset(prev), format!("theta {theta:.1}: matches not nested in the lower threshold's"))?;
        }
        rows.push(format!("{theta:.1}:P{:.3}/R{:.3}", r.precision, r.recall));
        previous = Some(predicted);
    }
    ensure(f1_at_08 >= 0.95, format!("F1 at 0.8 = {f1_at_08:.4}; {}", rows.join(" ")))?;
    Ok(format!("F1 at 0.8 = {f1_at_08:.4}; {}", rows.join(" ")))
}

// --- 7 ---------------------------------------------------------------------

fn c7_statistics() -> Outcome {
    let d = [1.0, 2.0, 3.0, 4.0, 5.0];
    let (t, p) = match paired_t_one_sided(&d, &[0.0; 5], Tail::Upper).map_err(e2s)? {
        TTest::Computed { t, p, .. } => (t, p),
        TTest::Degenerate => return Err("degenerate test".into()),
    };
    ensure((t - 4.2426).abs() < 1e-4, format!("t = {t}"))?;
    ensure((p - 0.00661).abs() < 1e-3, format!("p = {p}"))?;
    let adj = bonferroni(&[0.001, 0.01, 0.2], 20).map_err(e2s)?;
    ensure((adj[0] - 0.02).abs() < 1e-12 && (adj[1] - 0.2).abs() < 1e-12 && adj[2] == 1.0, format!("bonferroni {adj:?}"))?;
    ensure(default_battery().len() == 20, "battery size is not 20")?;
    Ok(format!("t = {t:.4}, p = {p:.6}; Bonferroni x20 {adj:?}"))
}

// --- 8 ---------------------------------------------------------------------

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn c8_flow_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..500 {
        let a: BTreeSet<u32> = (0..rng.gen_range(0..10)).map(|_| rng.gen_range(0..20)).collect();
        let b: BTreeSet<u32> = (0..rng.gen_range(0..10)).map(|_| rng.gen_range(0..20)).collect();
        let j = jaccard(&a, &b);
        ensure((0.0..=1.0).contains(&j), format!("jaccard {j} out of range"))?;
        ensure(j == jaccard(&b, &a), "jaccard not symmetric")?;
        if !a.is_empty() {
            ensure(jaccard(&a, &a) == 1.0, "identity")?;
        }
        if a.is_disjoint(&b) {
            ensure(j == 0.0, "disjoint sets must score 0")?;
        }
    }
    ensure(jaccard::<u32>(&BTreeSet::new(), &BTreeSet::new()) == 0.0, "empty sets")?;

    let cfg = SynthConfig { debates: 10, blocks_per_debate: 40, post_echo_bias: 4.0, seed: 8, ..Default::default() };
    let corpus = generate(&cfg, false).map_err(e2s)?;
    let index = corpus.direct_index();
    let stop = Stopwords::embedded();
    let names = ["jaccard_self_prev_1", "jaccard_self_post_1", "jaccard_other_post_1"];
    let mut diffs: Vec<Vec<f64>> = vec![vec![]; 3];
    let features = FeatureConfig { lm: LmSource::None, ..Default::default() };
    let featurizer = build_featurizer(&features, LexiconSet::embedded(), None, &corpus.debates).map_err(e2s)?;
    let schema = featurizer.schema().clone();
    for d in &corpus.debates {
        let ctx = FlowContext::new(d, &stop);
        for pair in debate_highlights::pairs::build_pairs(d, &index, &PairConfig::default()) {
            let (v, first_is_h) = featurizer.pair_diff(&pair, d, &ctx).map_err(e2s)?;
            for (k, name) in names.iter().enumerate() {
                let x = v[schema.index_of(name).expect("flow feature")];
                diffs[k].push(if first_is_h { x } else { -x });
            }
        }
    }
    let mut out = Vec::new();
    for (k, name) in names.iter().enumerate() {
        let tail = if k == 0 { Tail::Lower } else { Tail::Upper };
        let p = match paired_t_one_sided(&diffs[k], &vec![0.0; diffs[k].len()], tail).map_err(e2s)? {
            TTest::Computed { p, .. } => p,
            TTest::Degenerate => 1.0,
        };
        let m = mean(&diffs[k]);
        ensure(p < 0.05 && (if k == 0 { m < 0.0 } else { m > 0.0 }), format!("{name}: mean diff {m:.4}, p {p:.3}"))?;
        out.push(format!("{name} {m:+.4} (p={p:.1e})"));
    }
    Ok(format!("set properties on 500 random pairs; highlight - other: {}", out.join(", ")))
}

// --- 9 ---------------------------------------------------------------------

fn c9_lm_normalization() -> Outcome {
    let corpus = corpus_sentences(include_str!("../lexicons/lm_sample.txt"));
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for order in 1..=3 {
        let lm = LanguageModel::train_tokens(&corpus, order, 1).map_err(e2s)?;
        let vocab: Vec<&str> = lm.vocabulary().collect();
        for _ in 0..100 {
            let len = rng.gen_range(0..4);
            let ctx: Vec<&str> = (0..len)
                .map(|_| if rng.gen_bool(0.1) { "neverseenword" } else { vocab[rng.gen_range(0..vocab.len())] })
                .collect();
            let sum: f64 = vocab.iter().map(|w| lm.prob(w, &ctx)).sum();
            worst = worst.max((sum - 1.0).abs());
            ensure((sum - 1.0).abs() <= 1e-9, format!("order {order}: sum {sum} for context {ctx:?}"))?;
        }
    }
    let toks = |s: &str| s.split_whitespace().map(str::to_string).collect::<Vec<_>>();
    let uni = LanguageModel::train_tokens(&[toks("a a b")], 1, 1).map_err(e2s)?;
    ensure(uni.prob("a", &[]) == 3.0 / 6.0, "P(a)")?;
    ensure(uni.prob("b", &[]) == 2.0 / 6.0, "P(b)")?;
    ensure(uni.prob(UNK, &[]) == 1.0 / 6.0, "P(<unk>)")?;
    ensure(uni.prob("zzz", &[]) == 1.0 / 6.0, "P(unseen)")?;
    Ok(format!("max |sum - 1| = {worst:.1e} over 300 contexts; add-one toy values exact"))
}

// --- 10 --------------------------------------------------------------------

fn read_dir_sorted(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .map_err(e2s)?
        .map(|e| {
            let e = e.map_err(e2s)?;
            Ok((e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).map_err(e2s)?))
        })
        .collect::<Result<_, String>>()?;
    files.sort();
    Ok(files)
}

fn c10_determinism() -> Outcome {
    let cfg = SynthConfig { debates: 8, blocks_per_debate: 15, seed: 10, ..Default::default() };
    let corpus = generate(&cfg, true).map_err(e2s)?;
    let dir = tempfile::tempdir().map_err(e2s)?;
    let data = dir.path().join("data");
    let a = run_dir(&corpus, &data, &dir.path().join("run-a"), LmSource::Embedded)?;
    let mut b = a.clone();
    b.paths.output_dir = dir.path().join("run-b");
    pipeline::report_all(a.clone()).map_err(e2s)?;
    pipeline::report_all(b.clone()).map_err(e2s)?;
    let fa = read_dir_sorted(&a.paths.output_dir)?;
    let fb = read_dir_sorted(&b.paths.output_dir)?;
    ensure(fa.len() >= 15, format!("only {} output files", fa.len()))?;
    let names_a: Vec<&str> = fa.iter().map(|f| f.0.as_str()).collect();
    let names_b: Vec<&str> = fb.iter().map(|f| f.0.as_str()).collect();
    ensure(names_a == names_b, "different file sets")?;
    for ((name, x), (_, y)) in fa.iter().zip(&fb) {
        ensure(x == y, format!("{name} differs between runs"))?;
    }
    Ok(format!("{} files byte-identical across two runs", fa.len()))
}

// --- 11 --------------------------------------------------------------------

fn c11_pair_contract() -> Outcome {
    let cfg = PairConfig::default();
    let (flint, flint_index) = flint_debate().map_err(e2s)?;
    let flint_pairs = debate_highlights::pairs::build_pairs(&flint, &flint_index, &cfg);
    ensure(flint_pairs.len() == 1, format!("Flint example gave {} pairs", flint_pairs.len()))?;
    let p = &flint_pairs[0];
    ensure(p.highlight().text == synth::FLINT_HIGHLIGHT && p.non_highlight().text == synth::FLINT_OTHER, "Flint example pair members")?;

    let corpus = generate(&SynthConfig { debates: 10, blocks_per_debate: 60, seed: 12, ..Default::default() }, false).map_err(e2s)?;
    let index = corpus.direct_index();
    let mut debates: Vec<(&Debate, &QuoteIndex)> = vec![(&flint, &flint_index)];
    debates.extend(corpus.debates.iter().map(|d| (d, &index)));

    let stop = Stopwords::embedded();
    let features = FeatureConfig { lm: LmSource::Embedded, ..Default::default() };
    let featurizer = build_featurizer(&features, LexiconSet::embedded(), None, &corpus.debates).map_err(e2s)?;
    let mut all: Vec<Pair> = Vec::new();
    for (d, idx) in &debates {
        let highlights = label_highlights(d, idx, cfg.t);
        let ctx = FlowContext::new(d, &stop);
        for pair in debate_highlights::pairs::build_pairs(d, idx, &cfg) {
            check_pair(&pair, d, &highlights, &cfg).map_err(|e| format!("{}: {e}", pair.id))?;
            let (v, l) = featurizer.pair_diff(&pair, d, &ctx).map_err(e2s)?;
            let (w, m) = featurizer.pair_diff(&pair.swapped(), d, &ctx).map_err(e2s)?;
            ensure(l != m, format!("{}: swapping did not flip the label", pair.id))?;
            ensure(v.iter().zip(&w).all(|(a, b)| *a == -*b), format!("{}: difference vector not antisymmetric", pair.id))?;
            all.push(pair);
        }
    }
    ensure(all.len() >= 1000, format!("only {} pairs", all.len()))?;
    let first = all.iter().filter(|p| p.first_is_highlight()).count() as f64 / all.len() as f64;
    ensure((0.45..=0.55).contains(&first), format!("label balance {first:.3}"))?;
    Ok(format!("{} pairs pass every invariant; first-is-highlight share {first:.3}; antisymmetry exact", all.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("min-cut equals brute force", c1_mincut_oracle),
        ("closed-form 3-outlet cut", c2_closed_form_cut),
        ("ranker gradient and regularization path", c3_ranker_gradient_and_path),
        ("planted signal recovered end to end", c4_planted_signal),
        ("null signal calibrated", c5_null_calibration),
        ("quote matcher robustness", c6_matcher),
        ("paired t-test and Bonferroni", c7_statistics),
        ("Jaccard and conversation-flow pattern", c8_flow_properties),
        ("language-model normalization", c9_lm_normalization),
        ("report-all determinism", c10_determinism),
        ("pair construction contract", c11_pair_contract),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        match outcome {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail} [{:.1?}]", start.elapsed()),
            Err(why) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {why} [{:.1?}]", start.elapsed());
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

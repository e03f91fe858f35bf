use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use debate_highlights::ngramlm::{corpus_sentences, LanguageModel};
use debate_highlights::pipeline::{self, RunConfig, Slice};
use debate_highlights::Error;

#[derive(Parser, Debug)]
#[command(name = "debate-highlights", version, about = "Which debate sentences does the press quote, and how do outlets split over them")]
struct Cli {
    /// TOML run configuration; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,

    #[command(flatten)]
    overrides: Overrides,

    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Overrides {
    #[arg(long, global = true)]
    transcripts: Option<PathBuf>,
    #[arg(long, global = true)]
    articles: Option<PathBuf>,
    #[arg(long, global = true)]
    lexicons: Option<PathBuf>,
    #[arg(long, global = true)]
    party_map: Option<PathBuf>,
    /// Match threshold.
    #[arg(long, global = true)]
    theta: Option<f64>,
    /// Shortest quotation considered, in tokens.
    #[arg(long, global = true)]
    min_len: Option<usize>,
    /// Tokens of article context kept on each side of a quotation.
    #[arg(long, global = true)]
    context_window: Option<usize>,
    /// Highlight percentage.
    #[arg(long, global = true)]
    t: Option<f64>,
    #[arg(long, global = true)]
    folds: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load and validate transcripts and articles.
    Ingest,
    /// Align quotations to debate sentences and write the quote index.
    Match,
    /// Build highlight / non-highlight pairs.
    Pairs,
    /// Compute pair difference vectors.
    Featurize,
    /// Cross-validate and fit the ranker.
    Train,
    /// Held-out accuracy.
    Evaluate {
        #[arg(long, value_enum, default_value_t = SliceArg::All)]
        slice: SliceArg,
    },
    /// Paired significance tests over the feature battery.
    FeatureTest,
    /// Quote distribution and coverage tables.
    Describe,
    /// Media fragmentation statistics.
    Graph,
    /// Run every stage in order.
    ReportAll,
    /// Language-model utilities.
    Lm {
        #[command(subcommand)]
        command: LmCommand,
    },
    /// Print the effective configuration as TOML.
    Config,
}

#[derive(Subcommand, Debug)]
enum LmCommand {
    /// Train an n-gram model on a plain-text corpus.
    Train {
        corpus: PathBuf,
        #[arg(long, default_value_t = 3)]
        order: usize,
        #[arg(long, default_value_t = 2)]
        min_count: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SliceArg {
    All,
    Overall,
    Prominence,
    DebateType,
}

impl From<SliceArg> for Slice {
    fn from(s: SliceArg) -> Self {
        match s {
            SliceArg::All => Slice::All,
            SliceArg::Overall => Slice::Overall,
            SliceArg::Prominence => Slice::Prominence,
            SliceArg::DebateType => Slice::DebateType,
        }
    }
}

/// Usage and configuration problems exit 1, data problems exit 2.
enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
}

fn build_config(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.set_seed(s);
    }
    if let Some(d) = &cli.output_dir {
        cfg.paths.output_dir = d.clone();
    }
    let o = &cli.overrides;
    let paths = &mut cfg.paths;
    for (slot, flag) in [
        (&mut paths.transcripts, &o.transcripts),
        (&mut paths.articles, &o.articles),
        (&mut paths.lexicons, &o.lexicons),
        (&mut paths.party_map, &o.party_map),
    ] {
        if flag.is_some() {
            slot.clone_from(flag);
        }
    }
    if let Some(v) = o.theta {
        cfg.matching.theta = v;
    }
    if let Some(v) = o.min_len {
        cfg.matching.min_len = v;
    }
    if let Some(v) = o.context_window {
        cfg.matching.context_window = v;
    }
    if let Some(v) = o.t {
        cfg.pairs.t = v;
    }
    if let Some(v) = o.folds {
        cfg.train.folds = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn data(e: Error) -> Failure {
    Failure::Data(e.into())
}

fn run(cli: Cli) -> Result<(), Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .context("thread pool")
        .map_err(Failure::Usage)?;

    if let Command::Lm { command: LmCommand::Train { corpus, order, min_count, output } } = &cli.command {
        let text = std::fs::read_to_string(corpus)
            .with_context(|| format!("reading {}", corpus.display()))
            .map_err(Failure::Data)?;
        let model = LanguageModel::train_tokens(&corpus_sentences(&text), *order, *min_count).map_err(data)?;
        model.save(output).map_err(data)?;
        println!("{}-gram model, {} word types -> {}", model.order(), model.vocab_size(), output.display());
        return Ok(());
    }

    let cfg = build_config(&cli).map_err(Failure::Usage)?;
    if let Command::Config = cli.command {
        print!("{}", cfg.to_toml().map_err(data)?);
        return Ok(());
    }
    let mut run = pipeline::Run::new(cfg).map_err(|e| Failure::Usage(e.into()))?;
    match cli.command {
        Command::Ingest => {
            let (d, a, _) = pipeline::ingest(&mut run).map_err(data)?;
            println!("{} debates, {} articles", d.len(), a.len());
        }
        Command::Match => {
            let (_, m, q, _) = pipeline::match_stage(&mut run).map_err(data)?;
            println!("{} of {q} quotations matched", m.len());
        }
        Command::Pairs => {
            let (p, _) = pipeline::pairs_stage(&mut run).map_err(data)?;
            println!("{} pairs", p.len());
        }
        Command::Featurize => {
            let (t, _) = pipeline::featurize_stage(&mut run).map_err(data)?;
            println!("{} rows, schema {} ({} features)", t.rows.len(), t.schema.id, t.schema.len());
        }
        Command::Train => {
            let (m, _) = pipeline::train_stage(&mut run).map_err(data)?;
            println!("l2 = {}, {} features kept", m.l2, m.weights.len());
        }
        Command::Evaluate { slice } => {
            let (r, _) = pipeline::evaluate_stage(&mut run, slice.into()).map_err(data)?;
            match r.overall.accuracy {
                Some(a) => println!("held-out accuracy {a:.4} on {} pairs", r.overall.n),
                None => println!("no held-out pairs"),
            }
        }
        Command::FeatureTest => {
            let (r, _) = pipeline::feature_test_stage(&mut run).map_err(data)?;
            for t in r.iter().filter(|t| t.significant()) {
                println!("{:<24} {} p_adj={:.3e}", t.feature, t.arrows(), t.p_adjusted);
            }
        }
        Command::Describe => {
            pipeline::describe_stage(&mut run).map_err(data)?;
        }
        Command::Graph => {
            let (rows, _) = pipeline::graph_stage(&mut run).map_err(data)?;
            println!("{} fragmentation rows", rows.len());
        }
        Command::ReportAll => {
            let cfg = run.cfg.clone();
            drop(run);
            let r = pipeline::report_all(cfg).map_err(data)?;
            println!(
                "{} debates, {} matches, {} pairs, held-out accuracy {}",
                r.debates,
                r.matches,
                r.pairs,
                r.evaluation.overall.accuracy.map(|a| format!("{a:.4}")).unwrap_or_else(|| "n/a".into())
            );
        }
        Command::Lm { .. } | Command::Config => unreachable!("handled above"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    env_logger::Builder::new()
        .filter_level(match cli.verbose {
            0 => log::LevelFilter::Warn,
            1 => log::LevelFilter::Info,
            _ => log::LevelFilter::Debug,
        })
        .parse_default_env()
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

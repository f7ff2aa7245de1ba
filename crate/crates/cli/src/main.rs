//! Command-line interface: corpus tooling, retrieval, explanation,
//! evaluation, and the scaling benchmark.

use anyhow::{bail, Context, Result};
use ccf::embed::{
    train_inductive, train_transductive, EmbeddingIndex, EmbeddingModel, InductiveRegime,
    NodeFeatureProvider,
};
use ccf::ged::synthetic::{default_roles, demo_taxonomy, generate_synthetic_graphs, SyntheticConfig};
use ccf::ged::{ged, GedConfig, GedMode};
use ccf::pipeline::{
    bench_scaling, emit_reports, ingest, run_experiment, write_corpus, BenchConfig, BenchRegime,
    Corpus, Engine, ExperimentConfig, IngestOptions, Tier,
};
use ccf::taxonomy::Taxonomy;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::collections::BTreeSet;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "ccf", version, about = "Multi-resolution conceptual counterfactual retrieval")]
struct Cli {
    /// Seed overriding the configuration file's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Experiment configuration file (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a corpus directory and print a summary.
    Ingest(CorpusArgs),
    /// Generate a synthetic corpus into the output directory.
    Gen(GenArgs),
    /// Compute the edit distance between two graphs of a corpus.
    Ged(GedArgs),
    /// Train an embedding engine and write the checkpoint.
    Train(TrainArgs),
    /// Rank counterfactual candidates for a query.
    Retrieve(RetrieveArgs),
    /// Retrieve the top counterfactual and write its explanation.
    Explain(ExplainArgs),
    /// Run experiments and emit metric and explanation reports.
    Evaluate(EvaluateArgs),
    /// Measure training-cost scaling across corpus sizes.
    Bench(BenchArgs),
}

#[derive(Args)]
struct CorpusArgs {
    /// Corpus directory (scene-graph JSON/JSONL plus taxonomy files).
    #[arg(long)]
    corpus: PathBuf,
    /// Concept taxonomy path; defaults to <corpus>/taxonomy.tsv.
    #[arg(long)]
    taxonomy: Option<PathBuf>,
    /// Role taxonomy path; defaults to <corpus>/roles.tsv if present.
    #[arg(long)]
    roles: Option<PathBuf>,
    /// Confusion table path; defaults to <corpus>/confusion.csv if present.
    #[arg(long)]
    confusion: Option<PathBuf>,
}

impl CorpusArgs {
    fn load(&self) -> Result<Corpus> {
        let options = IngestOptions {
            concept_taxonomy: self.taxonomy.clone(),
            role_taxonomy: self.roles.clone(),
            confusion: self.confusion.clone(),
        };
        ingest(&self.corpus, &options)
            .with_context(|| format!("ingesting corpus {}", self.corpus.display()))
    }
}

#[derive(Args)]
struct GenArgs {
    /// Number of graphs.
    #[arg(long, default_value_t = 40)]
    count: usize,
    #[arg(long, default_value_t = 3)]
    size_min: usize,
    #[arg(long, default_value_t = 8)]
    size_max: usize,
    #[arg(long, default_value_t = 0.25)]
    edge_prob: f64,
    /// Taxonomy file supplying the label vocabulary; a built-in demo
    /// hierarchy is used (and written out) when absent.
    #[arg(long)]
    taxonomy: Option<PathBuf>,
}

#[derive(Args)]
struct GedArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Instance id of the source graph.
    #[arg(long)]
    left: String,
    /// Instance id of the target graph.
    #[arg(long)]
    right: String,
    #[arg(long, value_enum, default_value_t = ModeArg::Approx)]
    mode: ModeArg,
    /// Also write the edit script as DOT into the output directory.
    #[arg(long)]
    dot: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Approx,
}

impl From<ModeArg> for GedMode {
    fn from(m: ModeArg) -> GedMode {
        match m {
            ModeArg::Exact => GedMode::Exact,
            ModeArg::Approx => GedMode::Approximate,
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long, value_enum)]
    engine: TrainEngine,
    /// Pretraining corpus for the inductive engines.
    #[arg(long)]
    pretrain: Option<PathBuf>,
    /// Optional finetuning corpus for the inductive engines.
    #[arg(long)]
    finetune: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TrainEngine {
    Transductive,
    InductiveVgae,
    InductiveGfa,
}

#[derive(Args)]
struct RetrieveArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long)]
    query: String,
    #[arg(long, value_enum)]
    tier: Option<TierArg>,
    /// Checkpoint for embedding-based retrieval.
    #[arg(long)]
    model: Option<PathBuf>,
    /// How many candidates to print.
    #[arg(long, default_value_t = 10)]
    k: usize,
}

#[derive(Args)]
struct ExplainArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long)]
    query: String,
    #[arg(long, value_enum)]
    tier: Option<TierArg>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Run all three tiers and emit the comparison table.
    #[arg(long)]
    all_tiers: bool,
    #[arg(long, value_enum)]
    tier: Option<TierArg>,
    #[arg(long, value_enum)]
    engine: Option<EngineArg>,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated corpus sizes, ascending.
    #[arg(long, value_delimiter = ',', default_values_t = vec![50, 100, 200])]
    sizes: Vec<usize>,
    #[arg(long, value_enum, default_value_t = RegimeArg::Both)]
    regime: RegimeArg,
    #[arg(long, default_value_t = 3)]
    reps: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum TierArg {
    Atomic,
    Relational,
    Structural,
}

impl From<TierArg> for Tier {
    fn from(t: TierArg) -> Tier {
        match t {
            TierArg::Atomic => Tier::Atomic,
            TierArg::Relational => Tier::Relational,
            TierArg::Structural => Tier::Structural,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Exact,
    Lap,
    Transductive,
    InductiveVgae,
    InductiveGfa,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Engine {
        match e {
            EngineArg::Exact => Engine::ExhaustiveExact,
            EngineArg::Lap => Engine::ExhaustiveApprox,
            EngineArg::Transductive => Engine::Transductive,
            EngineArg::InductiveVgae => Engine::InductiveVgae,
            EngineArg::InductiveGfa => Engine::InductiveGfa,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Transductive,
    Inductive,
    Both,
}

fn load_experiment_config(cli: &Cli, tier: Option<Tier>) -> Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing config {}", path.display()))?
        }
        None => ExperimentConfig::new(tier.unwrap_or(Tier::Structural)),
    };
    if let Some(tier) = tier {
        config.tier = tier;
        if tier != Tier::Structural {
            config.engine = None;
        }
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
        config.encoder.seed = seed;
    }
    Ok(config)
}

fn main() -> Result<()> {
    env_logger::init();
    let cli = Cli::parse();
    match &cli.command {
        Command::Ingest(args) => cmd_ingest(args),
        Command::Gen(args) => cmd_gen(&cli, args),
        Command::Ged(args) => cmd_ged(&cli, args),
        Command::Train(args) => cmd_train(&cli, args),
        Command::Retrieve(args) => cmd_retrieve(&cli, args),
        Command::Explain(args) => cmd_explain(&cli, args),
        Command::Evaluate(args) => cmd_evaluate(&cli, args),
        Command::Bench(args) => cmd_bench(&cli, args),
    }
}

fn cmd_ingest(args: &CorpusArgs) -> Result<()> {
    let corpus = args.load()?;
    let classes: BTreeSet<&str> = corpus.graphs.iter().map(|g| g.class.as_str()).collect();
    println!("graphs: {}", corpus.graphs.len());
    println!("classes: {}", classes.into_iter().collect::<Vec<_>>().join(", "));
    println!("concepts: {}", corpus.concepts.len());
    println!("roles: {}", corpus.roles.len());
    println!(
        "confusion table: {}",
        if corpus.confusion.is_some() { "present" } else { "absent" }
    );
    Ok(())
}

fn cmd_gen(cli: &Cli, args: &GenArgs) -> Result<()> {
    if args.size_min < 1 || args.size_min > args.size_max {
        bail!("invalid size range {}..{}", args.size_min, args.size_max);
    }
    let taxonomy = match &args.taxonomy {
        Some(path) => Taxonomy::load(path)?,
        None => demo_taxonomy(),
    };
    let config = SyntheticConfig {
        seed: cli.seed.unwrap_or(0),
        count: args.count,
        size_range: (args.size_min, args.size_max),
        edge_prob: args.edge_prob,
        roles: default_roles(),
    };
    let graphs = generate_synthetic_graphs(&config, &taxonomy)?;
    write_corpus(&cli.out, &graphs, &taxonomy, &config.roles)?;
    println!(
        "wrote {} graphs to {}",
        graphs.len(),
        cli.out.join("graphs.jsonl").display()
    );
    Ok(())
}

fn cmd_ged(cli: &Cli, args: &GedArgs) -> Result<()> {
    let corpus = args.corpus.load()?;
    let left = corpus
        .graph(&args.left)
        .with_context(|| format!("no graph with id {}", args.left))?;
    let right = corpus
        .graph(&args.right)
        .with_context(|| format!("no graph with id {}", args.right))?;
    let result = ged(
        left,
        right,
        &corpus.taxonomies(),
        args.mode.into(),
        &GedConfig::default(),
    )?;
    let summary = serde_json::json!({
        "left": args.left,
        "right": args.right,
        "mode": result.mode,
        "cost": result.cost,
        "node_edits": result.script.node_edit_count(),
        "edge_edits": result.script.edge_edit_count(),
    });
    println!("{summary}");
    print!("{}", result.script.to_json_lines());
    if args.dot {
        std::fs::create_dir_all(&cli.out)?;
        let path = cli.out.join(format!("ged-{}-{}.dot", args.left, args.right));
        std::fs::write(&path, result.script.to_dot(left))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_train(cli: &Cli, args: &TrainArgs) -> Result<()> {
    let corpus = args.corpus.load()?;
    let config = load_experiment_config(cli, Some(Tier::Structural))?;
    let provider = NodeFeatureProvider::hashed(config.feature_dim, config.seed);
    let mut encoder = config.encoder.clone();
    encoder.seed = config.seed;

    let (model, trace) = match args.engine {
        TrainEngine::Transductive => train_transductive(
            &corpus.graphs,
            &corpus.taxonomies(),
            &encoder,
            &config.transductive,
            &provider,
        )?,
        TrainEngine::InductiveVgae | TrainEngine::InductiveGfa => {
            let pretrain_dir = args
                .pretrain
                .as_ref()
                .context("inductive engines need --pretrain <dir>")?;
            let pretrain = ingest(pretrain_dir, &IngestOptions::default())?;
            let finetune = match &args.finetune {
                Some(dir) => Some(ingest(dir, &IngestOptions::default())?),
                None => None,
            };
            let mut icfg = config.inductive.clone();
            icfg.regime = match args.engine {
                TrainEngine::InductiveVgae => InductiveRegime::Vgae,
                _ => InductiveRegime::Gfa,
            };
            let eval_ids: Vec<String> = corpus.graphs.iter().map(|g| g.id.clone()).collect();
            train_inductive(
                &pretrain.graphs,
                finetune.as_ref().map(|c| c.graphs.as_slice()),
                &eval_ids,
                &encoder,
                &icfg,
                &provider,
            )?
        }
    };

    std::fs::create_dir_all(&cli.out)?;
    let model_path = cli.out.join("model.json");
    model.save(&model_path)?;
    let trace_path = cli.out.join("loss_trace.csv");
    std::fs::write(&trace_path, trace.to_csv())?;
    let last = trace.records.last().map(|r| r.mean_loss).unwrap_or(f64::NAN);
    println!("wrote {} ({} parameters)", model_path.display(), model.parameter_count());
    println!("wrote {} (final mean loss {last})", trace_path.display());
    Ok(())
}

fn cmd_retrieve(cli: &Cli, args: &RetrieveArgs) -> Result<()> {
    let corpus = args.corpus.load()?;
    let config = load_experiment_config(cli, args.tier.map(Into::into))?;
    let query = corpus
        .graph(&args.query)
        .with_context(|| format!("no graph with id {}", args.query))?;

    let ranking: Vec<(String, f64)> = if let Some(model_path) = &args.model {
        let model = EmbeddingModel::load(model_path)?;
        let provider = NodeFeatureProvider::hashed(config.feature_dim, config.seed);
        let index = EmbeddingIndex::build(&corpus.graphs, &model, &provider)?;
        index
            .retrieve_graph(query, &model, &provider)?
            .into_iter()
            .map(|h| (h.instance_id, h.similarity))
            .collect()
    } else {
        let tx = corpus.taxonomies();
        match config.tier {
            Tier::Atomic => {
                let q = ccf::atomic::ConceptSet::from_graph(query);
                let pool: Vec<_> = corpus
                    .graphs
                    .iter()
                    .filter(|g| g.id != query.id)
                    .map(ccf::atomic::ConceptSet::from_graph)
                    .collect();
                ccf::atomic::retrieve_atomic(
                    &q,
                    &pool,
                    &corpus.concepts,
                    &ccf::atomic::SetEditConfig::default(),
                )?
                .into_iter()
                .map(|r| (r.instance_id, r.cost.value().unwrap_or(f64::INFINITY)))
                .collect()
            }
            Tier::Relational => {
                let q = ccf::relational::roll_up(query);
                let pool: Vec<_> = corpus
                    .graphs
                    .iter()
                    .filter(|g| g.id != query.id)
                    .map(ccf::relational::roll_up)
                    .collect();
                ccf::relational::retrieve_relational(&q, &pool, &tx)?
                    .into_iter()
                    .map(|r| (r.instance_id, r.cost.value().unwrap_or(f64::INFINITY)))
                    .collect()
            }
            Tier::Structural => {
                let pool: Vec<_> = corpus
                    .graphs
                    .iter()
                    .filter(|g| g.id != query.id)
                    .cloned()
                    .collect();
                ccf::ged::retrieve_structural_exhaustive(
                    query,
                    &pool,
                    &tx,
                    config.gt_mode,
                    &GedConfig {
                        exact_cap: config.exact_cap,
                    },
                )?
                .into_iter()
                .map(|(id, r)| (id, r.cost.value().unwrap_or(f64::INFINITY)))
                .collect()
            }
        }
    };

    println!("rank,instance_id,score");
    for (rank, (id, score)) in ranking.iter().take(args.k).enumerate() {
        println!("{},{id},{score}", rank + 1);
    }
    Ok(())
}

fn cmd_explain(cli: &Cli, args: &ExplainArgs) -> Result<()> {
    let corpus = args.corpus.load()?;
    let mut config = load_experiment_config(cli, args.tier.map(Into::into))?;
    if config.tier != Tier::Structural {
        config.engine = None;
    }
    let output = run_experiment(&config, &corpus)?;
    let record = output
        .explanations
        .iter()
        .find(|r| r.query_id == args.query)
        .with_context(|| format!("no graph with id {}", args.query))?;

    std::fs::create_dir_all(&cli.out)?;
    let json_path = cli.out.join(format!("explanation-{}.json", args.query));
    std::fs::write(&json_path, serde_json::to_string_pretty(record)?)?;
    let dot_path = cli.out.join(format!("explanation-{}.dot", args.query));
    let source = corpus.graph(&record.query_id).expect("query exists");
    std::fs::write(&dot_path, record.script().to_dot(source))?;

    println!(
        "{} ({}) -> {} ({}): cost {}, {} node edits, {} edge edits",
        record.query_id,
        record.query_class,
        record.retrieved_id,
        record.retrieved_class,
        record.cost,
        record.node_edits,
        record.edge_edits
    );
    print!("{}", record.script().to_json_lines());
    println!("wrote {}", json_path.display());
    println!("wrote {}", dot_path.display());
    Ok(())
}

fn cmd_evaluate(cli: &Cli, args: &EvaluateArgs) -> Result<()> {
    let corpus = args.corpus.load()?;
    let mut outputs = Vec::new();
    if args.all_tiers {
        for tier in [Tier::Atomic, Tier::Relational, Tier::Structural] {
            let mut config = load_experiment_config(cli, Some(tier))?;
            if tier == Tier::Structural {
                if let Some(engine) = args.engine {
                    config.engine = Some(engine.into());
                }
            }
            outputs.push(run_experiment(&config, &corpus)?);
        }
    } else {
        let mut config = load_experiment_config(cli, args.tier.map(Into::into))?;
        if let Some(engine) = args.engine {
            config.tier = Tier::Structural;
            config.engine = Some(engine.into());
        }
        outputs.push(run_experiment(&config, &corpus)?);
    }

    let written = emit_reports(&outputs, &corpus, &cli.out)?;
    for path in &written {
        println!("wrote {}", path.display());
    }
    if outputs.len() >= 2 {
        let comparison = std::fs::read_to_string(cli.out.join("comparison.txt"))?;
        println!("\n{comparison}");
    } else {
        let output = &outputs[0];
        for (metric, k, value) in output.report.rows() {
            if k == 0 {
                println!("{} {metric} = {value:.3}", output.engine_label);
            } else {
                println!("{} {metric}@{k} = {value:.3}", output.engine_label);
            }
        }
    }
    Ok(())
}

fn cmd_bench(cli: &Cli, args: &BenchArgs) -> Result<()> {
    let config = BenchConfig {
        sizes: args.sizes.clone(),
        regime: match args.regime {
            RegimeArg::Transductive => BenchRegime::Transductive,
            RegimeArg::Inductive => BenchRegime::Inductive,
            RegimeArg::Both => BenchRegime::Both,
        },
        seed: cli.seed.unwrap_or(0),
        reps: args.reps,
        ..Default::default()
    };
    let taxonomy = demo_taxonomy();
    let roles = Taxonomy::flat(default_roles())?;
    let report = bench_scaling(&config, &taxonomy, &roles)?;

    std::fs::create_dir_all(&cli.out)?;
    let bench_path = cli.out.join("bench.csv");
    std::fs::write(&bench_path, report.to_csv())?;
    let slopes_path = cli.out.join("slopes.csv");
    std::fs::write(&slopes_path, report.slopes_csv())?;

    print!("{}", report.to_csv());
    for (regime, slope) in &report.slopes {
        println!("log-log slope {regime}: {slope:.3}");
    }
    println!("wrote {}", bench_path.display());
    println!("wrote {}", slopes_path.display());
    Ok(())
}

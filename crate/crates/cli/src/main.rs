use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rdfshard_core::allocator::allocate;
use rdfshard_core::partitioner::{extract_popular_subjects, grow_fragments, GrowthMode};
use rdfshard_core::pipeline::{
    round_robin_inc, run_pipeline, run_scaling, write_scaling_csv, GeneratorParams, PipelineConfig,
};
use rdfshard_core::plan::{FragmentFile, PlanFile};
use rdfshard_core::query_engine::{generate_workload, inc_report, read_workload, Cluster, HomePolicy, WorkloadCounts};
use rdfshard_core::replicator::{compute_centrality, derive_threshold, replicate, ThresholdMode};
use rdfshard_core::triple_io::{generate_lod_like, read_ntriples_file, serialize_ntriples, write_ntriples_file};

#[derive(Parser)]
#[command(name = "rdfshard", version, about = "Semantic-aware partitioning and replication of RDF triples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic sensor/observation dataset as N-Triples.
    Generate(GenerateArgs),
    /// Grow one fragment per popular subject.
    Partition(PartitionArgs),
    /// Place fragments on nodes.
    Allocate(AllocateArgs),
    /// Add replicas of high-centrality predicates to a plan.
    Replicate(ReplicateArgs),
    /// Run a query workload against a plan and report locality.
    Evaluate(EvaluateArgs),
    /// Run every stage and write all artifacts to a directory.
    Pipeline(PipelineArgs),
    /// Run the generator pipeline at several data scales.
    Scale(ScaleArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = GeneratorParams::default().sensors)]
    sensors: usize,
    #[arg(long, default_value_t = GeneratorParams::default().observations_per_sensor)]
    observations: usize,
    /// Multiplies the observations per sensor.
    #[arg(long, default_value_t = 1)]
    scale: usize,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PartitionArgs {
    /// N-Triples file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    single_pass: bool,
    /// Fragment file (JSON).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AllocateArgs {
    /// Fragment file written by `partition`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 3)]
    nodes: usize,
    /// Plan file (JSON).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReplicateArgs {
    /// N-Triples file the plan refers to.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    plan: PathBuf,
    /// Centrality threshold in (0, 1]; derived from the fragment masters when omitted.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    strict_threshold: bool,
    /// Per-predicate centrality CSV.
    #[arg(long)]
    centrality_report: Option<PathBuf>,
    /// Updated plan file (defaults to overwriting `--plan`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// N-Triples file the plan refers to.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    plan: PathBuf,
    /// Workload file (JSON); sampled from the data when omitted.
    #[arg(long)]
    workload: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Route every query to this node instead of the best one.
    #[arg(long)]
    home: Option<usize>,
    /// Also report a round-robin placement of the same data.
    #[arg(long)]
    compare_round_robin: bool,
    /// Per-query CSV report.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Overrides {
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    single_pass: bool,
    #[arg(long)]
    strict_threshold: bool,
    #[arg(long)]
    workload: Option<PathBuf>,
}

impl Overrides {
    fn config(&self) -> Result<PipelineConfig> {
        let mut c = match &self.config {
            Some(path) => PipelineConfig::from_toml_file(path)?,
            None => PipelineConfig::default(),
        };
        if let Some(v) = &self.input {
            c.input = Some(v.clone());
        }
        if let Some(v) = self.k {
            c.k = v;
        }
        if let Some(v) = self.nodes {
            c.m = v;
        }
        if let Some(v) = self.threshold {
            c.threshold = Some(v);
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if self.single_pass {
            c.growth = GrowthMode::SinglePass;
        }
        if self.strict_threshold {
            c.threshold_mode = ThresholdMode::Strict;
        }
        if let Some(v) = &self.workload {
            c.workload = Some(v.clone());
        }
        Ok(c)
    }
}

#[derive(Args)]
struct PipelineArgs {
    #[command(flatten)]
    overrides: Overrides,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScaleArgs {
    #[command(flatten)]
    overrides: Overrides,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    scales: Vec<usize>,
    /// Runs per scale; the fastest time per stage is kept.
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    /// CSV file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn generate(a: GenerateArgs) -> Result<()> {
    if a.scale == 0 {
        bail!("--scale must be positive");
    }
    let store = generate_lod_like(a.seed, a.sensors, a.observations * a.scale);
    match a.out {
        Some(path) => {
            write_ntriples_file(&store, &path)?;
            eprintln!("wrote {} triples to {}", store.len(), path.display());
        }
        None => io::stdout().lock().write_all(serialize_ntriples(&store).as_bytes())?,
    }
    Ok(())
}

fn partition(a: PartitionArgs) -> Result<()> {
    let store = read_ntriples_file(&a.input)?;
    let masters = extract_popular_subjects(&store, a.k)?;
    let mode = if a.single_pass { GrowthMode::SinglePass } else { GrowthMode::Fixpoint };
    let result = grow_fragments(&store, &masters, mode)?;
    let file = FragmentFile::from_partition(&result);
    file.write(&a.out)?;
    println!("fragment  size  master");
    for f in &result.fragments {
        println!("{:>8}  {:>4}  {}", f.id, f.members.len(), f.master);
    }
    println!("orphan triples: {} ({} groups)", result.orphan_count, result.orphan_groups);
    Ok(())
}

fn allocate_cmd(a: AllocateArgs) -> Result<()> {
    let fragments = FragmentFile::read(&a.input)?;
    let allocation = allocate(&fragments.sizes(), a.nodes)?;
    let plan = PlanFile::new(fragments.fragments, &allocation, None);
    plan.write(&a.out)?;
    for n in &allocation.nodes {
        println!("node {}: fragments {:?}, load {}", n.node_id, n.fragment_ids, n.load_triples);
    }
    Ok(())
}

fn replicate_cmd(a: ReplicateArgs) -> Result<()> {
    let store = read_ntriples_file(&a.input)?;
    let mut plan = PlanFile::read(&a.plan)?;
    let owner = plan.owner_map(store.len())?;
    let table = compute_centrality(&store)?;
    let masters: Vec<String> = plan.fragments.iter().map(|f| f.master.clone()).collect();
    let threshold = derive_threshold(&table, &store, &masters, a.threshold)?;
    let mode = if a.strict_threshold { ThresholdMode::Strict } else { ThresholdMode::Inclusive };
    let decision = replicate(&owner, plan.m, &table, threshold, mode, &store)?;
    plan.replicas = decision.replicas.clone();
    plan.validate(&store)?;
    plan.write(a.out.as_ref().unwrap_or(&a.plan))?;
    if let Some(path) = &a.centrality_report {
        table.write_csv(create(path)?)?;
    }
    println!("threshold: {threshold:.6}");
    for p in &decision.replicated_predicates {
        println!("replicated predicate: {p}");
    }
    println!(
        "replicated triples: {} ({:.2}% of {}), copies: {}",
        decision.replicated_positions.len(),
        decision.replication_level * 100.0,
        store.len(),
        decision.replica_copies()
    );
    Ok(())
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    let store = read_ntriples_file(&a.input)?;
    let plan = PlanFile::read(&a.plan)?;
    plan.validate(&store)?;
    let workload = match &a.workload {
        Some(path) => read_workload(path)?,
        None => generate_workload(&store, a.seed, WorkloadCounts::default())?,
    };
    let cluster = Cluster::from_plan(&store, &plan)?;
    let policy = a.home.map_or(HomePolicy::BestCase, HomePolicy::Fixed);
    let summary = inc_report(&cluster, &workload, policy)?;
    println!("{summary}");
    if a.compare_round_robin {
        let rr = round_robin_inc(&store, plan.m, &workload, policy)?;
        println!("round-robin placement answered locally: {:.1}%", rr.fraction_local * 100.0);
    }
    if let Some(path) = &a.out {
        summary.write_csv(create(path)?)?;
    }
    Ok(())
}

fn pipeline(a: PipelineArgs) -> Result<()> {
    let mut config = a.overrides.config()?;
    if let Some(out) = a.out {
        config.out = out;
    }
    let outcome = run_pipeline(&config)?;
    let r = &outcome.report;
    println!("triples: {}  fragments: {}  nodes: {}", r.triples, r.k, r.m);
    println!("fragment sizes: {:?}", r.fragment_sizes);
    println!("node loads: {:?}", r.node_loads);
    println!(
        "threshold: {:.6}  replicated: {} triples ({:.2}%)",
        r.threshold,
        r.replicated_triples,
        r.replication_level * 100.0
    );
    let timings: Vec<String> = ["extract", "grow", "allocate", "replicate", "evaluate"]
        .iter()
        .zip(r.aet.values())
        .map(|(n, v)| format!("{n} {v:.2} ms"))
        .collect();
    println!("AET: {}", timings.join(", "));
    println!("{}", r.inc);
    println!("artifacts written to {}", config.out.display());
    Ok(())
}

fn scale(a: ScaleArgs) -> Result<()> {
    let config = a.overrides.config()?;
    let rows = run_scaling(&config, &a.scales, a.repeats)?;
    match &a.out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
            }
            write_scaling_csv(&rows, create(path)?)?;
        }
        None => write_scaling_csv(&rows, io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::Generate(a) => generate(a),
        Command::Partition(a) => partition(a),
        Command::Allocate(a) => allocate_cmd(a),
        Command::Replicate(a) => replicate_cmd(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Pipeline(a) => pipeline(a),
        Command::Scale(a) => scale(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

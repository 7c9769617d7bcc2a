use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dbl_core::io::{self as dio, IdMap};
use dbl_core::label::snapshot::is_snapshot;
use dbl_core::workload::{
    self, apply_stream, parse_update_stream, BenchSpec, DistanceClass, ReplayOptions, StreamOptions,
    VerifySpec, VerifySummary,
};
use dbl_core::{
    query_batch, read_snapshot, write_snapshot, DblIndex, DeleteOptions, DynamicGraph, IndexConfig,
    LandmarkStrategy, QueryOptions,
};

const EXIT_VERIFY_FAILED: u8 = 2;
const EXIT_ERROR: u8 = 1;

#[derive(Parser)]
#[command(name = "dbl", version, about = "Dynamic reachability index over directed graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an index from an edge list and optionally save it.
    Build(BuildArgs),
    /// Answer `u v` queries from a file.
    Query(QueryArgs),
    /// Apply a `+ u v` / `- u v` / `? u v` stream.
    Update(UpdateArgs),
    /// Replay a timestamped edge list over a warm-started index.
    Replay(ReplayArgs),
    /// Build, apply random updates, run a query batch and report JSON.
    Bench(BenchArgs),
    /// Differential check against plain BFS; exits 2 on any disagreement.
    Verify(VerifyArgs),
}

#[derive(Args, Clone)]
struct IndexArgs {
    /// Number of landmarks (DL bits).
    #[arg(long, default_value_t = 64)]
    k: usize,
    /// Number of leaf buckets (BL bits).
    #[arg(long, default_value_t = 64)]
    kprime: usize,
    /// Landmark ranking: product, sum, max or min of in/out degree.
    #[arg(long, default_value = "product")]
    strategy: LandmarkStrategy,
    /// Leaf threshold r: vertices with |Pre|*|Suc| <= r become leaves.
    #[arg(long = "leaf-r", default_value_t = 0)]
    leaf_r: u64,
    /// Seed of the leaf bucket hash.
    #[arg(long = "hash-seed", default_value_t = 0)]
    hash_seed: u64,
}

impl IndexArgs {
    fn config(&self) -> IndexConfig {
        IndexConfig {
            k: self.k,
            k_prime: self.kprime,
            landmark_strategy: self.strategy,
            leaf_threshold: self.leaf_r,
            hash_seed: self.hash_seed,
        }
    }
}

#[derive(Args)]
struct BuildArgs {
    /// Edge list (`src dst` per line, optionally gzipped).
    graph: PathBuf,
    #[command(flatten)]
    index: IndexArgs,
    /// Seed of the leaf bucket hash (same as --hash-seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Write the index, with the graph embedded, to this file.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct QueryArgs {
    /// Edge list or saved index.
    input: PathBuf,
    /// Query pairs, one `u v` per line, in original ids.
    queries: PathBuf,
    #[command(flatten)]
    index: IndexArgs,
    /// Worker threads (default: available processors).
    #[arg(long, env = "DBL_WORKERS")]
    workers: Option<usize>,
    /// Output format for the answers.
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write results here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct UpdateArgs {
    /// Edge list or saved index.
    input: PathBuf,
    /// Update stream.
    stream: PathBuf,
    #[command(flatten)]
    index: IndexArgs,
    /// Accept `- u v` lines (experimental on cyclic graphs).
    #[arg(long)]
    allow_delete: bool,
    /// Rebuild the index when a deletion touches a cycle.
    #[arg(long)]
    rebuild_on_taint: bool,
    /// Print one JSON record per stream line before the summary.
    #[arg(long)]
    log: bool,
    /// Save the updated index, with the graph embedded.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    /// Temporal edge list: `src dst timestamp` per line.
    temporal: PathBuf,
    #[command(flatten)]
    index: IndexArgs,
    /// Fraction of the stream used for the initial build.
    #[arg(long, default_value_t = 0.5)]
    warm: f64,
    /// Emit cumulative timings every N replayed edges.
    #[arg(long, default_value_t = 10_000)]
    report_every: usize,
    /// Slide the window and delete edges that leave it (experimental).
    #[arg(long)]
    allow_delete: bool,
    /// Rebuild the index when a deletion touches a cycle.
    #[arg(long)]
    rebuild_on_taint: bool,
    /// Check the final labels against a fresh build; exits 2 on mismatch.
    #[arg(long)]
    verify: bool,
    /// Write the JSON report here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Edge list or saved index.
    input: PathBuf,
    #[command(flatten)]
    index: IndexArgs,
    /// Random queries in the batch.
    #[arg(long, default_value_t = 100_000)]
    queries: usize,
    /// Query pairs file; replaces the random batch.
    #[arg(long)]
    pairs: Option<PathBuf>,
    /// Random edge insertions before the query batch.
    #[arg(long, default_value_t = 0)]
    inserts: usize,
    /// Random edge deletions after the insertions (experimental).
    #[arg(long, default_value_t = 0)]
    deletes: usize,
    /// Rebuild the index when a deletion touches a cycle.
    #[arg(long)]
    rebuild_on_taint: bool,
    /// Workload seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for the query batch (default: available processors).
    #[arg(long, env = "DBL_WORKERS")]
    workers: Option<usize>,
    /// Distance classes for per-distance batches, e.g. `2,4,6,8,unreachable`.
    #[arg(long, value_delimiter = ',')]
    distances: Vec<DistanceClass>,
    /// Pairs per distance class.
    #[arg(long, default_value_t = 1000)]
    distance_count: usize,
    /// Keep only this label family, for ablation runs.
    #[arg(long, value_enum)]
    only: Option<Only>,
    /// Write the JSON report here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Only {
    Dl,
    Bl,
}

#[derive(Args)]
struct VerifyArgs {
    /// Edge list or saved index to check; omit to check random graphs only.
    input: Option<PathBuf>,
    #[command(flatten)]
    index: IndexArgs,
    /// Seed of the random graphs and insertions.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random graphs to check (default 50 without an input, 0 with one).
    #[arg(long)]
    graphs: Option<usize>,
    /// Largest random graph size.
    #[arg(long, default_value_t = 200)]
    max_n: usize,
    /// Random insertions applied before each second check.
    #[arg(long, default_value_t = 100)]
    inserts: usize,
}

fn default_workers(flag: Option<usize>) -> usize {
    flag.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let mut out = sink(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

struct Loaded {
    graph: DynamicGraph,
    ids: IdMap,
    index: DblIndex,
    build_ms: f64,
}

fn looks_like_snapshot(path: &Path) -> Result<bool> {
    let mut head = [0u8; 8];
    let mut f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut got = 0;
    while got < head.len() {
        match f.read(&mut head[got..])? {
            0 => break,
            k => got += k,
        }
    }
    Ok(is_snapshot(&head[..got]))
}

/// Reads a saved index, or loads an edge list and builds one.
fn load_input(path: &Path, index: &IndexArgs) -> Result<Loaded> {
    if looks_like_snapshot(path)? {
        let file = File::open(path)?;
        let snap = read_snapshot(io::BufReader::new(file))
            .with_context(|| format!("reading index {}", path.display()))?;
        let Some(lg) = snap.graph else {
            bail!("{} holds an index without its graph", path.display());
        };
        log::info!("loaded index over {} vertices", lg.graph.vertex_count());
        return Ok(Loaded {
            graph: lg.graph,
            ids: lg.ids,
            index: snap.index,
            build_ms: 0.0,
        });
    }
    let lg = dio::load_edge_list_file(path).with_context(|| format!("loading {}", path.display()))?;
    let t = Instant::now();
    let cfg = index.config().clamped(lg.graph.vertex_count());
    let idx = DblIndex::build(&lg.graph, cfg)?;
    Ok(Loaded {
        graph: lg.graph,
        ids: lg.ids,
        index: idx,
        build_ms: t.elapsed().as_secs_f64() * 1e3,
    })
}

fn save_index(path: &Path, l: &Loaded) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_snapshot(BufWriter::new(file), &l.index, Some((&l.graph, &l.ids)))?;
    Ok(())
}

#[derive(Serialize)]
struct BuildSummary {
    n: usize,
    m: usize,
    d_avg: f64,
    k: usize,
    k_prime: usize,
    landmarks: Vec<u64>,
    source_leaves: usize,
    sink_leaves: usize,
    index_bits: usize,
    build_ms: f64,
}

fn cmd_build(a: BuildArgs) -> Result<u8> {
    let mut index = a.index.clone();
    if let Some(s) = a.seed {
        index.hash_seed = s;
    }
    let l = load_input(&a.graph, &index)?;
    if let Some(p) = &a.output {
        save_index(p, &l)?;
    }
    let idx = &l.index;
    emit_json(
        &BuildSummary {
            n: l.graph.vertex_count(),
            m: l.graph.edge_count(),
            d_avg: l.graph.average_degree(),
            k: idx.config().k,
            k_prime: idx.config().k_prime,
            landmarks: idx.landmarks().as_slice().iter().map(|&x| l.ids.original(x)).collect(),
            source_leaves: idx.leaves().leaves_in().len(),
            sink_leaves: idx.leaves().leaves_out().len(),
            index_bits: idx.total_bits(),
            build_ms: l.build_ms,
        },
        None,
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct QueryRow {
    u: u64,
    v: u64,
    reachable: bool,
    answered_by: dbl_core::AnsweredBy,
    visited: u64,
}

fn cmd_query(a: QueryArgs) -> Result<u8> {
    let l = load_input(&a.input, &a.index)?;
    let pairs = dio::load_pairs(
        dio::open(&a.queries).with_context(|| format!("opening {}", a.queries.display()))?,
        &l.ids,
    )
    .with_context(|| format!("reading {}", a.queries.display()))?;
    let workers = default_workers(a.workers);
    let r = query_batch(&l.graph, &l.index, &pairs, workers, QueryOptions::default())?;
    let rows = pairs.iter().zip(&r.outcomes).map(|(&(u, v), o)| QueryRow {
        u: l.ids.original(u),
        v: l.ids.original(v),
        reachable: o.reachable,
        answered_by: o.answered_by,
        visited: o.visited,
    });
    match a.format {
        Format::Csv => {
            let mut out = sink(a.output.as_deref())?;
            writeln!(out, "u,v,reachable,answered_by,visited")?;
            for row in rows {
                writeln!(out, "{},{},{},{},{}", row.u, row.v, row.reachable, row.answered_by, row.visited)?;
            }
            out.flush()?;
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Out {
                outcomes: Vec<QueryRow>,
                stats: dbl_core::BatchStats,
            }
            emit_json(
                &Out {
                    outcomes: rows.collect(),
                    stats: r.stats.clone(),
                },
                a.output.as_deref(),
            )?;
        }
    }
    eprintln!(
        "{} queries, rho {:.4}, {:.3} ms on {workers} worker(s)",
        r.stats.queries, r.stats.rho, r.stats.total_ms
    );
    Ok(0)
}

fn cmd_update(a: UpdateArgs) -> Result<u8> {
    let mut l = load_input(&a.input, &a.index)?;
    let events = parse_update_stream(
        dio::open(&a.stream).with_context(|| format!("opening {}", a.stream.display()))?,
    )
    .with_context(|| format!("reading {}", a.stream.display()))?;
    let opts = StreamOptions {
        allow_delete: a.allow_delete,
        delete: DeleteOptions {
            rebuild_on_taint: a.rebuild_on_taint,
        },
        record: a.log,
    };
    let mut sum = apply_stream(&mut l.graph, &mut l.index, &mut l.ids, &events, opts)?;
    if a.log {
        let mut out = io::stdout().lock();
        for rec in &sum.records {
            serde_json::to_writer(&mut out, rec)?;
            writeln!(out)?;
        }
        sum.records.clear();
    }
    if sum.tainted > 0 && !a.rebuild_on_taint {
        log::warn!(
            "{} deletions touched cycles; labels may hold stale bits (see --rebuild-on-taint)",
            sum.tainted
        );
    }
    if let Some(p) = &a.output {
        save_index(p, &l)?;
    }
    emit_json(&sum, None)?;
    Ok(0)
}

fn cmd_replay(a: ReplayArgs) -> Result<u8> {
    let stream = dio::load_temporal_edge_list_file(&a.temporal)
        .with_context(|| format!("loading {}", a.temporal.display()))?;
    let opts = ReplayOptions {
        config: a.index.config(),
        warm_fraction: a.warm,
        report_every: a.report_every,
        allow_delete: a.allow_delete,
        delete: DeleteOptions {
            rebuild_on_taint: a.rebuild_on_taint,
        },
    };
    let r = workload::replay_temporal(&stream, &opts)?;
    emit_json(&r.report, a.output.as_deref())?;
    if a.verify {
        let report = dbl_core::verify_labels(&r.graph, &r.index, true)?;
        if !report.ok {
            eprintln!("{} label violations after replay", report.violations.len());
            return Ok(EXIT_VERIFY_FAILED);
        }
    }
    Ok(0)
}

fn cmd_bench(a: BenchArgs) -> Result<u8> {
    let l = load_input(&a.input, &a.index)?;
    let query_pairs = match &a.pairs {
        Some(p) => Some(
            dio::load_pairs(dio::open(p)?, &l.ids).with_context(|| format!("reading {}", p.display()))?,
        ),
        None => None,
    };
    let options = match a.only {
        None => QueryOptions::default(),
        Some(Only::Dl) => QueryOptions::dl_only(),
        Some(Only::Bl) => QueryOptions::bl_only(),
    };
    let spec = BenchSpec {
        config: l.index.config().clone(),
        queries: a.queries,
        inserts: a.inserts,
        deletes: a.deletes,
        delete: DeleteOptions {
            rebuild_on_taint: a.rebuild_on_taint,
        },
        seed: a.seed,
        workers: default_workers(a.workers),
        options,
        query_pairs,
        distance_classes: a.distances.clone(),
        distance_count: a.distance_count,
    };
    let report = workload::run_bench_prebuilt(l.graph, l.index, l.build_ms, &spec)?;
    emit_json(&report, a.output.as_deref())?;
    Ok(0)
}

fn cmd_verify(a: VerifyArgs) -> Result<u8> {
    let mut sum = VerifySummary::default();
    if let Some(path) = &a.input {
        let l = load_input(path, &a.index)?;
        sum.check(&path.display().to_string(), &l.graph, &l.index)?;
        sum.graphs += 1;
    }
    let graphs = a.graphs.unwrap_or(if a.input.is_some() { 0 } else { 50 });
    if graphs > 0 {
        let spec = VerifySpec {
            seed: a.seed,
            graphs,
            max_n: a.max_n,
            config: a.index.config(),
            inserts: a.inserts,
        };
        let r = workload::verify_random(&spec)?;
        sum.graphs += r.graphs;
        sum.pairs += r.pairs;
        sum.disagreements += r.disagreements;
        sum.label_violations += r.label_violations;
        sum.failures.extend(r.failures);
    }
    emit_json(&sum, None)?;
    if sum.ok() {
        Ok(0)
    } else {
        for f in &sum.failures {
            eprintln!("verification failed: {f}");
        }
        Ok(EXIT_VERIFY_FAILED)
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Build(a) => cmd_build(a),
        Command::Query(a) => cmd_query(a),
        Command::Update(a) => cmd_update(a),
        Command::Replay(a) => cmd_replay(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

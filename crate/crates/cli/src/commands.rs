use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use permkit::eval::{
    make_splits, projection_scatter, recall_vs_fraction_curve, run_benchmark, summarize, tune_method, BenchReport,
    MethodSummary, ProjectionDistance, TuneReport,
};
use permkit::index::{
    AccumulatorMetric, AnyIndex, Gamma, MethodConfig, PermDistance, PermFilterIndex, PermFilterParams, PermMode,
};
use permkit::io::{
    generate, load_dataset, load_snapshot, read_snapshot_header, save_dataset, save_snapshot, DataFormat, LoadOptions,
    LoadedData, SyntheticKind, SyntheticParams,
};
use permkit::spaces::diagnostics::{mu_defectiveness_probe, triangle_violation_rate, Transform};
use permkit::spaces::{CosineSpace, JsSpace, KlSpace, L2Space, LevenshteinSpace, QueryMode, SqfdSpace};
use permkit::{DataSet, Neighbor, Space, SpaceKind};
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::cli::{
    AnalyzeArgs, BenchArgs, BuildArgs, Command, DataArgs, DiagnoseArgs, GenerateArgs, MethodArgs, SearchArgs,
    TuneArgs, TuneSampleArgs,
};
use crate::config::{
    parse, parse_band, parse_format, parse_list, parse_space, resolve_methods, resolve_single_method, Report,
    RunConfig,
};
use crate::error::CliError;

/// Worker cap from `PERMKIT_THREADS`; 0 leaves the choice to rayon.
pub fn thread_cap() -> Result<usize, CliError> {
    match std::env::var("PERMKIT_THREADS") {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("PERMKIT_THREADS must be a non-negative integer, got `{v}`"))),
        _ => Ok(0),
    }
}

pub fn run(command: Command) -> Result<(), CliError> {
    let threads = thread_cap()?;
    permkit::index::with_threads(threads, || match command {
        Command::Build(a) => build(a, threads),
        Command::Search(a) => search(a),
        Command::Bench(a) => bench(a, threads),
        Command::Tune(a) => tune(a, threads),
        Command::Analyze(a) => analyze(a, threads),
        Command::Generate(a) => generate_cmd(a),
        Command::Diagnose(a) => diagnose(a),
    })
}

/// A computation over a typed space and data set.
trait SpaceTask {
    type Output;

    fn run<S>(self, space: S, data: DataSet<S::Object>, queries: Option<DataSet<S::Object>>) -> Result<Self::Output, CliError>
    where
        S: Space + Clone + 'static;
}

fn dispatch<T: SpaceTask>(
    kind: SpaceKind,
    mode: QueryMode,
    data: LoadedData,
    queries: Option<LoadedData>,
    task: T,
) -> Result<T::Output, CliError> {
    let mismatch = || CliError::internal("loaded objects do not match the space");
    macro_rules! go {
        ($variant:ident, $space:expr) => {{
            let LoadedData::$variant(d) = data else {
                return Err(mismatch());
            };
            let q = match queries {
                None => None,
                Some(LoadedData::$variant(q)) => Some(q),
                Some(_) => return Err(mismatch()),
            };
            task.run($space, d, q)
        }};
    }
    match kind {
        SpaceKind::L2 => go!(Dense, L2Space),
        SpaceKind::CosineSparse => go!(Sparse, CosineSpace),
        SpaceKind::KlDiv => go!(Histograms, KlSpace::new(mode)),
        SpaceKind::JsDiv => go!(Histograms, JsSpace),
        SpaceKind::NormLevenshtein => go!(Sequences, LevenshteinSpace),
        SpaceKind::Sqfd => go!(Signatures, SqfdSpace::default()),
    }
}

fn load(path: &Path, args: &DataArgs, kind: SpaceKind) -> Result<LoadedData, CliError> {
    load_with(path, parse_format(args, kind)?, kind, args.no_normalize)
}

fn load_with(path: &Path, format: DataFormat, kind: SpaceKind, no_normalize: bool) -> Result<LoadedData, CliError> {
    if !format.supports(kind) {
        return Err(CliError::usage(format!("format {format} cannot hold objects of space {kind}")));
    }
    let options = LoadOptions {
        normalize: !no_normalize,
        ..Default::default()
    };
    load_dataset(path, format, kind, &options).map_err(CliError::data)
}

fn require_data(args: &DataArgs) -> Result<&Path, CliError> {
    args.data.as_deref().ok_or_else(|| CliError::usage_with_help("missing --data"))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::internal(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::internal(format!("{}: {e}", path.display())))
}

/// Writes to `path`, or to standard output when it is absent.
fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(CliError::internal)
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value).map(|s| s + "\n").map_err(CliError::internal)
}

fn held_out<T: Clone>(data: &DataSet<T>, count: usize, seed: u64) -> Result<(DataSet<T>, Vec<T>), CliError> {
    let split = make_splits(data.len(), 1, count, seed)?.remove(0);
    Ok((data.subset(&split.index_ids), data.subset(&split.query_ids).into_objects()))
}

fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::internal(format!("{}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn method_label(config: &MethodConfig) -> String {
    match config {
        MethodConfig::BruteForce => "brute-force".into(),
        MethodConfig::PermFilter { m, gamma, .. } => format!("permfilter(m={m}, gamma={gamma})"),
        MethodConfig::MiFile {
            m, m_i, m_s, gamma, ..
        } => format!("mifile(m={m}, mi={m_i}, ms={m_s}, gamma={gamma})"),
        MethodConfig::Napp { m, m_i, t, .. } => format!("napp(m={m}, mi={m_i}, t={t})"),
        MethodConfig::VpTree { pruner, .. } => format!(
            "vptree(alpha_left={:.4}, alpha_right={:.4}, beta={})",
            pruner.alpha_left, pruner.alpha_right, pruner.beta
        ),
        MethodConfig::SwGraph {
            nn, search_attempts, ..
        } => format!("swgraph(nn={nn}, attempts={search_attempts})"),
    }
}

// ---------------------------------------------------------------- build

#[derive(Serialize)]
struct BuildStats {
    method: String,
    config: MethodConfig,
    num_objects: usize,
    build_time_ms: f64,
    index_bytes: usize,
    snapshot: PathBuf,
    snapshot_sha256: String,
    tune: Option<TuneReport>,
}

struct BuildTask<'a> {
    config: MethodConfig,
    args: &'a BuildArgs,
    band: (f64, f64),
    threads: usize,
}

impl SpaceTask for BuildTask<'_> {
    type Output = BuildStats;

    fn run<S>(self, space: S, data: DataSet<S::Object>, queries: Option<DataSet<S::Object>>) -> Result<BuildStats, CliError>
    where
        S: Space + Clone + 'static,
    {
        let (seed, k) = (self.args.data.seed, self.args.data.k);
        let mut config = self.config;
        let mut tuned = None;
        if self.args.tune {
            let (index_part, sample) = match queries {
                Some(q) => (data.clone(), q.into_objects()),
                None => held_out(&data, self.args.sample.tune_queries, seed)?,
            };
            let report = tune_method(&config, &space, Arc::new(index_part), &sample, k, self.band, seed, self.threads)?;
            config = report.best.clone();
            tuned = Some(report);
        }
        let data = Arc::new(data);
        let start = Instant::now();
        let index = AnyIndex::build(&config, space, data.clone(), seed, self.threads)?;
        let build_time_ms = start.elapsed().as_secs_f64() * 1e3;
        if let Some(dir) = self.args.output.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| CliError::internal(format!("{}: {e}", dir.display())))?;
        }
        save_snapshot(&index, &self.args.output).map_err(CliError::internal)?;
        Ok(BuildStats {
            method: config.name().to_string(),
            num_objects: data.len(),
            build_time_ms,
            index_bytes: index.index_bytes(),
            snapshot: self.args.output.clone(),
            snapshot_sha256: sha256_file(&self.args.output)?,
            tune: tuned,
            config,
        })
    }
}

fn stats_path(args: &BuildArgs) -> PathBuf {
    args.stats.clone().unwrap_or_else(|| {
        let mut p = args.output.clone().into_os_string();
        p.push(".stats.json");
        PathBuf::from(p)
    })
}

fn sample_options(sample: &TuneSampleArgs) -> serde_json::Value {
    json!({ "band": sample.band, "tune_queries": sample.tune_queries })
}

fn build(args: BuildArgs, threads: usize) -> Result<(), CliError> {
    let (kind, mode) = parse_space(&args.data)?;
    let config = resolve_single_method(&args.method, kind)?;
    let band = parse_band(&args.sample.band)?;
    let mut rc = RunConfig::with_data("build", &args.data, kind, mode);
    rc.methods = vec![config.clone()];
    rc.queries = args.sample.queries.clone();
    rc.outputs.insert("snapshot".into(), args.output.clone());
    rc.outputs.insert("stats".into(), stats_path(&args));
    rc.options = json!({ "tune": args.tune, "sample": sample_options(&args.sample) });

    let data = load(require_data(&args.data)?, &args.data, kind)?;
    let queries = match (&args.sample.queries, args.tune) {
        (Some(q), true) => Some(load(q, &args.data, kind)?),
        _ => None,
    };
    let stats = dispatch(
        kind,
        mode,
        data,
        queries,
        BuildTask {
            config,
            args: &args,
            band,
            threads,
        },
    )?;
    eprintln!(
        "built {} over {} objects in {:.1} ms, index {} bytes -> {}",
        method_label(&stats.config),
        stats.num_objects,
        stats.build_time_ms,
        stats.index_bytes,
        args.output.display()
    );
    let text = to_json(&Report::new(&rc, &stats))?;
    write_file(&stats_path(&args), &text)?;
    emit(None, &text)
}

// ---------------------------------------------------------------- search

#[derive(Serialize)]
struct QueryAnswer {
    query: usize,
    neighbors: Vec<Neighbor>,
    distance_computations: u64,
    candidates: usize,
}

#[derive(Serialize)]
struct SearchOutput {
    method: String,
    search_params: serde_json::Value,
    results: Vec<QueryAnswer>,
}

struct SearchTask<'a> {
    args: &'a SearchArgs,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn apply_overrides<S: Space>(index: &mut AnyIndex<S>, a: &MethodArgs) -> Result<serde_json::Value, CliError> {
    let gamma: Option<Gamma> = parse(&a.gamma)?;
    let distance: Option<PermDistance> = parse(&a.perm_distance)?;
    let metric: Option<AccumulatorMetric> = parse(&a.metric)?;
    let json = |v: &dyn erased::Json| v.to_value();
    Ok(match index {
        AnyIndex::BruteForce(_) => serde_json::Value::Null,
        AnyIndex::PermFilter(_, p) => {
            set(&mut p.gamma, gamma);
            set(&mut p.distance, distance);
            json(p)
        }
        AnyIndex::MiFile(_, p) => {
            set(&mut p.m_s, a.m_s);
            if a.max_position_diff.is_some() {
                p.max_position_diff = a.max_position_diff;
            }
            set(&mut p.gamma, gamma);
            set(&mut p.metric, metric);
            json(p)
        }
        AnyIndex::Napp(_, p) => {
            set(&mut p.t, a.t);
            if gamma.is_some() {
                p.gamma = gamma;
            }
            json(p)
        }
        AnyIndex::VpTree(_, p) => {
            set(&mut p.alpha_left, a.alpha_left);
            set(&mut p.alpha_right, a.alpha_right);
            set(&mut p.beta, a.beta);
            p.validate()?;
            json(p)
        }
        AnyIndex::SwGraph(_, p) => {
            set(&mut p.attempts, a.attempts);
            json(p)
        }
    })
}

mod erased {
    pub trait Json {
        fn to_value(&self) -> serde_json::Value;
    }

    impl<T: serde::Serialize> Json for T {
        fn to_value(&self) -> serde_json::Value {
            serde_json::to_value(self).unwrap_or(serde_json::Value::Null)
        }
    }
}

impl SpaceTask for SearchTask<'_> {
    type Output = SearchOutput;

    fn run<S>(self, space: S, data: DataSet<S::Object>, queries: Option<DataSet<S::Object>>) -> Result<SearchOutput, CliError>
    where
        S: Space + Clone + 'static,
    {
        let queries = queries.ok_or_else(|| CliError::internal("queries not loaded"))?;
        let mut index = load_snapshot(&self.args.index, space, Arc::new(data)).map_err(CliError::data)?;
        let search_params = apply_overrides(&mut index, &self.args.method)?;
        let k = self.args.data.k;
        let results = queries
            .iter()
            .enumerate()
            .map(|(i, q)| {
                let res = index.search(q, k)?;
                Ok(QueryAnswer {
                    query: i,
                    neighbors: res.neighbors,
                    distance_computations: res.stats.distance_computations,
                    candidates: res.stats.candidates,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(SearchOutput {
            method: index.method_name().to_string(),
            search_params,
            results,
        })
    }
}

fn search(args: SearchArgs) -> Result<(), CliError> {
    let (kind, mode) = parse_space(&args.data)?;
    let mut rc = RunConfig::with_data("search", &args.data, kind, mode);
    rc.index = Some(args.index.clone());
    rc.queries = Some(args.queries.clone());
    if let Some(o) = &args.output {
        rc.outputs.insert("results".into(), o.clone());
    }
    let data = load(require_data(&args.data)?, &args.data, kind)?;
    let queries = load(&args.queries, &args.data, kind)?;
    let out = dispatch(kind, mode, data, Some(queries), SearchTask { args: &args })?;
    rc.options = json!({ "search_params": out.search_params });
    let mean = out.results.iter().map(|r| r.distance_computations as f64).sum::<f64>() / out.results.len().max(1) as f64;
    eprintln!(
        "{} queries answered with {}, {:.1} distance computations per query",
        out.results.len(),
        out.method,
        mean
    );
    emit(args.output.as_deref(), &to_json(&Report::new(&rc, &out))?)
}

// ---------------------------------------------------------------- bench

struct BenchTask<'a> {
    methods: &'a [MethodConfig],
    args: &'a BenchArgs,
    threads: usize,
}

impl SpaceTask for BenchTask<'_> {
    type Output = Vec<BenchReport>;

    fn run<S>(self, space: S, data: DataSet<S::Object>, _: Option<DataSet<S::Object>>) -> Result<Vec<BenchReport>, CliError>
    where
        S: Space + Clone + 'static,
    {
        let a = self.args;
        let splits = make_splits(data.len(), a.splits, a.queries_per_split, a.data.seed)?;
        Ok(run_benchmark(self.methods, &space, &data, &splits, a.data.k, a.data.seed, self.threads)?)
    }
}

fn summary_table(summary: &[MethodSummary]) -> String {
    let mut s = format!(
        "{:<14} {:>6} {:>8} {:>12} {:>12} {:>14}\n",
        "method", "splits", "recall", "improvement", "query ms", "dist. comps"
    );
    for m in summary {
        s += &format!(
            "{:<14} {:>6} {:>8.4} {:>12.2} {:>12.4} {:>14.1}\n",
            m.method, m.splits, m.recall, m.improvement_in_efficiency, m.mean_query_time_ms, m.mean_distance_computations
        );
    }
    s
}

fn bench(args: BenchArgs, threads: usize) -> Result<(), CliError> {
    let (kind, mode) = parse_space(&args.data)?;
    let methods = resolve_methods(&args.method, kind)?;
    let jsonl = args.out_dir.join(format!("{}.jsonl", args.name));
    let csv = args.out_dir.join(format!("{}.csv", args.name));
    let mut rc = RunConfig::with_data("bench", &args.data, kind, mode);
    rc.methods = methods.clone();
    rc.outputs.insert("jsonl".into(), jsonl.clone());
    rc.outputs.insert("csv".into(), csv.clone());
    rc.options = json!({ "splits": args.splits, "queries_per_split": args.queries_per_split });

    let data = load(require_data(&args.data)?, &args.data, kind)?;
    let reports = dispatch(
        kind,
        mode,
        data,
        None,
        BenchTask {
            methods: &methods,
            args: &args,
            threads,
        },
    )?;

    let mut lines = String::new();
    let mut rows = format!("{}\n", BenchReport::CSV_HEADER);
    for r in &reports {
        lines += &serde_json::to_string(&Report::new(&rc, r)).map_err(CliError::internal)?;
        lines.push('\n');
        rows += &r.csv_row();
        rows.push('\n');
        if let Some(e) = &r.error {
            eprintln!("{} failed on split {}: {e}", r.method, r.split);
        }
    }
    write_file(&jsonl, &lines)?;
    write_file(&csv, &rows)?;
    let summary = summarize(&reports);
    eprint!("{}", summary_table(&summary));
    emit(None, &to_json(&Report::new(&rc, json!({ "summary": summary })))?)
}

// ---------------------------------------------------------------- tune

#[derive(Serialize)]
struct TuneOutput {
    status: &'static str,
    #[serde(flatten)]
    report: TuneReport,
}

struct TuneTask<'a> {
    base: MethodConfig,
    args: &'a TuneArgs,
    band: (f64, f64),
    threads: usize,
}

impl SpaceTask for TuneTask<'_> {
    type Output = TuneReport;

    fn run<S>(self, space: S, data: DataSet<S::Object>, queries: Option<DataSet<S::Object>>) -> Result<TuneReport, CliError>
    where
        S: Space + Clone + 'static,
    {
        let a = &self.args.data;
        let (index_part, sample) = match queries {
            Some(q) => (data, q.into_objects()),
            None => held_out(&data, self.args.sample.tune_queries, a.seed)?,
        };
        Ok(tune_method(&self.base, &space, Arc::new(index_part), &sample, a.k, self.band, a.seed, self.threads)?)
    }
}

fn tune(args: TuneArgs, threads: usize) -> Result<(), CliError> {
    let (kind, mode) = parse_space(&args.data)?;
    let base = resolve_single_method(&args.method, kind)?;
    let band = parse_band(&args.sample.band)?;
    let mut rc = RunConfig::with_data("tune", &args.data, kind, mode);
    rc.methods = vec![base.clone()];
    rc.queries = args.sample.queries.clone();
    if let Some(o) = &args.output {
        rc.outputs.insert("best".into(), o.clone());
    }
    rc.options = sample_options(&args.sample);

    let data = load(require_data(&args.data)?, &args.data, kind)?;
    let queries = args.sample.queries.as_deref().map(|q| load(q, &args.data, kind)).transpose()?;
    let report = dispatch(
        kind,
        mode,
        data,
        queries,
        TuneTask {
            base,
            args: &args,
            band,
            threads,
        },
    )?;
    let status = if report.reached { "reached" } else { "unreached" };
    eprintln!(
        "{status}: {} with recall {:.4}, efficiency {:.2} after {} trials",
        method_label(&report.best),
        report.recall,
        report.efficiency,
        report.trace.len()
    );
    let out = TuneOutput { status, report };
    emit(args.output.as_deref(), &to_json(&Report::new(&rc, &out))?)
}

// ---------------------------------------------------------------- analyze

struct AnalyzeTask<'a> {
    args: &'a AnalyzeArgs,
    threads: usize,
}

impl AnalyzeTask<'_> {
    fn pivots(&self) -> usize {
        self.args.method.m.unwrap_or(128)
    }

    fn perm_mode(&self) -> Result<PermMode, CliError> {
        let a = &self.args.method;
        match a.mode.as_deref() {
            None if a.threshold.is_some() => Ok(PermMode::Binary { threshold: a.threshold }),
            None | Some("full") => Ok(PermMode::Full),
            Some("binary") => Ok(PermMode::Binary { threshold: a.threshold }),
            Some(other) => Err(CliError::usage(format!("unknown permutation mode `{other}`"))),
        }
    }
}

impl SpaceTask for AnalyzeTask<'_> {
    type Output = String;

    fn run<S>(self, space: S, data: DataSet<S::Object>, _: Option<DataSet<S::Object>>) -> Result<String, CliError>
    where
        S: Space + Clone + 'static,
    {
        let a = self.args;
        let seed = a.data.seed;
        match a.what.as_str() {
            "scatter" => {
                let distance: ProjectionDistance = a.projection.parse().map_err(CliError::usage_from)?;
                let points = projection_scatter(&space, &data, self.pivots(), distance, a.pairs, seed)?;
                let mut csv = String::from("original,projected\n");
                for p in points {
                    csv += &format!("{},{}\n", p.original, p.projected);
                }
                Ok(csv)
            }
            "curve" => {
                let fractions = parse_list(&a.fractions)?;
                let (index_part, queries) = held_out(&data, a.queries_per_split, seed)?;
                let mode = self.perm_mode()?;
                let params = PermFilterParams {
                    m: self.pivots(),
                    mode,
                    seed,
                    threads: self.threads,
                };
                let index = PermFilterIndex::build(space, Arc::new(index_part), &params)?;
                let distance = match parse::<PermDistance>(&a.method.perm_distance)? {
                    Some(d) => d,
                    None => index.default_search(Gamma::Count(1)).distance,
                };
                let curve = recall_vs_fraction_curve(&index, &queries, a.data.k, &fractions, distance)?;
                let mut csv = String::from("fraction,gamma,recall\n");
                for c in curve {
                    csv += &format!("{},{},{}\n", c.fraction, c.gamma, c.recall);
                }
                Ok(csv)
            }
            "space-diagnostics" => {
                let rate = triangle_violation_rate(&data, &space, a.triples, seed)?;
                let mu = mu_defectiveness_probe(&data, &space, Transform::Identity, a.triples, seed)?;
                let mu_sqrt = mu_defectiveness_probe(&data, &space, Transform::Sqrt, a.triples, seed)?;
                Ok(format!(
                    "statistic,value\ntriangle_violation_rate,{rate}\nmu_identity,{mu}\nmu_sqrt,{mu_sqrt}\n"
                ))
            }
            other => Err(CliError::usage_with_help(format!(
                "unknown analysis `{other}` (expected scatter, curve or space-diagnostics)"
            ))),
        }
    }
}

fn analyze(args: AnalyzeArgs, threads: usize) -> Result<(), CliError> {
    let (kind, mode) = parse_space(&args.data)?;
    let mut rc = RunConfig::with_data("analyze", &args.data, kind, mode);
    rc.options = json!({
        "what": args.what,
        "m": args.method.m.unwrap_or(128),
        "mode": args.method.mode,
        "threshold": args.method.threshold,
        "perm_distance": args.method.perm_distance,
        "pairs": args.pairs,
        "projection": args.projection,
        "fractions": args.fractions,
        "queries_per_split": args.queries_per_split,
        "triples": args.triples,
    });
    let meta = args.output.as_ref().map(|o| {
        let mut p = o.clone().into_os_string();
        p.push(".meta.json");
        PathBuf::from(p)
    });
    if let (Some(o), Some(m)) = (&args.output, &meta) {
        rc.outputs.insert("csv".into(), o.clone());
        rc.outputs.insert("meta".into(), m.clone());
    }
    let data = load(require_data(&args.data)?, &args.data, kind)?;
    let csv = dispatch(kind, mode, data, None, AnalyzeTask { args: &args, threads })?;
    let report = to_json(&Report::new(&rc, json!({})))?;
    match &meta {
        Some(m) => write_file(m, &report)?,
        None => eprint!("{report}"),
    }
    emit(args.output.as_deref(), &csv)
}

// ---------------------------------------------------------------- generate

fn generate_cmd(args: GenerateArgs) -> Result<(), CliError> {
    let kind: SyntheticKind = args.kind.parse().map_err(CliError::usage_from)?;
    let d = SyntheticParams::default();
    let params = SyntheticParams {
        n: args.n.unwrap_or(d.n),
        dim: args.dim.unwrap_or(d.dim),
        clusters: args.clusters.unwrap_or(d.clusters),
        spread: args.spread.unwrap_or(d.spread),
        alpha: args.alpha.unwrap_or(d.alpha),
        nnz: args.nnz.unwrap_or(d.nnz),
        mean_length: args.mean_length.unwrap_or(d.mean_length),
        sd_length: args.sd_length.unwrap_or(d.sd_length),
        signature_clusters: args.signature_clusters.unwrap_or(d.signature_clusters),
    };
    let data = generate(kind, &params, args.seed)?;
    let format = match &args.format {
        Some(f) => f.parse().map_err(CliError::usage_from)?,
        None => match data {
            LoadedData::Dense(_) | LoadedData::Histograms(_) => DataFormat::DenseText,
            LoadedData::Sparse(_) => DataFormat::SparseText,
            LoadedData::Sequences(_) => DataFormat::StringLines,
            LoadedData::Signatures(_) => DataFormat::SignatureText,
        },
    };
    let mut rc = RunConfig::new("generate", args.config.clone(), args.seed);
    rc.format = Some(format.to_string());
    rc.outputs.insert("data".into(), args.output.clone());
    rc.options = json!({ "kind": kind.name(), "params": params });
    if let Some(dir) = args.output.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::internal(format!("{}: {e}", dir.display())))?;
    }
    save_dataset(&args.output, format, &data).map_err(|e| match e {
        permkit::Error::InvalidArgument(_) => CliError::usage_from(e),
        e => CliError::internal(e),
    })?;
    eprintln!("wrote {} {} objects -> {}", data.len(), kind.name(), args.output.display());
    let body = json!({
        "num_objects": data.len(),
        "content_hash": hex::encode(data.content_hash()),
        "file_sha256": sha256_file(&args.output)?,
    });
    emit(None, &to_json(&Report::new(&rc, body))?)
}

// ---------------------------------------------------------------- diagnose

struct VerifyTask<'a> {
    index: &'a Path,
}

impl SpaceTask for VerifyTask<'_> {
    type Output = (usize, usize);

    fn run<S>(self, space: S, data: DataSet<S::Object>, _: Option<DataSet<S::Object>>) -> Result<(usize, usize), CliError>
    where
        S: Space + Clone + 'static,
    {
        let n = data.len();
        let index = load_snapshot(self.index, space, Arc::new(data)).map_err(CliError::data)?;
        Ok((n, index.index_bytes()))
    }
}

fn diagnose(args: DiagnoseArgs) -> Result<(), CliError> {
    let header = read_snapshot_header(&args.index).map_err(CliError::data)?;
    let kind: SpaceKind = match &args.space {
        Some(s) => s.parse().map_err(CliError::usage_from)?,
        None => header.space,
    };
    let mode: QueryMode = args.query_mode.parse().map_err(CliError::usage_from)?;
    let mut rc = RunConfig::new("diagnose", args.config.clone(), header.seed.unwrap_or(0));
    rc.space = Some(kind);
    rc.index = Some(args.index.clone());
    rc.data = args.data.clone();
    rc.format = args.format.clone();

    let verification = match &args.data {
        Some(path) => {
            let format = match &args.format {
                Some(f) => f.parse().map_err(CliError::usage_from)?,
                None => DataFormat::default_for(kind),
            };
            let data = load_with(path, format, kind, args.no_normalize)?;
            let (n, bytes) = dispatch(kind, mode, data, None, VerifyTask { index: &args.index })?;
            eprintln!("snapshot verified against {} objects", n);
            json!({ "verified": true, "num_objects": n, "index_bytes": bytes })
        }
        None => json!({ "verified": false }),
    };
    eprintln!(
        "{} snapshot over {} objects, space {}, written by version {}",
        header.method, header.num_objects, header.space, header.library_version
    );
    let body = json!({
        "header": header,
        "data_hash": hex::encode(header.data_hash),
        "snapshot_sha256": sha256_file(&args.index)?,
        "verification": verification,
    });
    emit(None, &to_json(&Report::new(&rc, body))?)
}

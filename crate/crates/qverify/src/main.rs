use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qverify::config::Config;
use qverify::io::{self, IoError, RunManifest};
use qverify::report::{self, Versioned};
use qverify::server::{self, AppState};
use qverify_core::ansatz::Method;
use qverify_core::dataset::{generate_record, validate_record, GenOutcome, TaskRecord};
use qverify_core::metrics::{compute_metrics, evaluate_candidates, random_baseline, EvalOutcome};
use qverify_core::problems::ProblemKind;
use qverify_core::reward::{hierarchical_reward, RewardBreakdown, Task};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "qverify", version, about = "Verifiable rewards for quantum optimization circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ConfigArg {
    /// TOML config file. Falls back to $QVERIFY_CONFIG, then built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a ground-truth dataset.
    GenDataset(GenArgs),
    /// Score candidate circuits with the hierarchical reward.
    Verify(VerifyArgs),
    /// Pass@1 / Pass@k report over candidate circuits.
    Metrics(MetricsArgs),
    /// Ground truth against randomly re-parameterized circuits.
    Baseline(BaselineArgs),
    /// Run the HTTP reward server.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Comma-separated problem kinds, or `all`.
    #[arg(long, default_value = "all", value_parser = parse_kinds)]
    kinds: KindList,
    /// Node counts: `3-5` or `3,4,6`. Instance `i` uses `sizes[i % len]`.
    #[arg(long, default_value = "3-5", value_parser = parse_sizes)]
    sizes: SizeList,
    /// Instances attempted per kind.
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "vqe")]
    method: Method,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// JSONL of `{task_id, samples: [qasm, ...]}`.
    #[arg(long)]
    candidates: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    tau_js: Option<f64>,
    #[arg(long)]
    tau_ev: Option<f64>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    candidates: PathBuf,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    srev_tol: Option<f64>,
    #[arg(long)]
    hqcr_tol: Option<f64>,
    /// Also write the report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Debug, Args)]
struct BaselineArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Random re-parameterizations per record.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Overrides `server.listen`.
    #[arg(long)]
    listen: Option<String>,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Debug, Clone)]
struct KindList(Vec<ProblemKind>);

#[derive(Debug, Clone)]
struct SizeList(Vec<usize>);

fn parse_kinds(s: &str) -> Result<KindList, String> {
    if s == "all" {
        return Ok(KindList(ProblemKind::ALL.to_vec()));
    }
    s.split(',')
        .map(|k| k.trim().parse::<ProblemKind>().map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()
        .map(KindList)
}

fn parse_sizes(s: &str) -> Result<SizeList, String> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("invalid size `{t}`"));
    let sizes = match s.split_once('-') {
        Some((a, b)) => {
            let (a, b) = (num(a)?, num(b)?);
            if a > b {
                return Err(format!("empty range {s}"));
            }
            (a..=b).collect()
        }
        None => s.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
    };
    if sizes.is_empty() {
        return Err("no sizes given".into());
    }
    Ok(SizeList(sizes))
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Runtime(m) => m,
        }
    }
}

/// Missing inputs are usage errors; malformed lines are data errors.
fn input_error(e: IoError) -> CliError {
    match e {
        e if e.is_not_found() => CliError::Usage(e.to_string()),
        e @ IoError::Line { .. } => CliError::Data(e.to_string()),
        e => CliError::Runtime(e.to_string()),
    }
}

fn output_error(e: IoError) -> CliError {
    CliError::Runtime(e.to_string())
}

type CliResult<T = ()> = Result<T, CliError>;

fn load_config(arg: &ConfigArg) -> CliResult<(Config, Option<PathBuf>)> {
    Config::resolve(arg.config.as_deref()).map_err(|e| CliError::Usage(e.to_string()))
}

fn load_tasks(path: &Path, config: &Config) -> CliResult<(Vec<TaskRecord>, HashMap<String, Task>)> {
    let records = io::read_dataset(path).map_err(input_error)?;
    let mut tasks = HashMap::with_capacity(records.len());
    for r in &records {
        let task = validate_record(r, config.dataset.f_threshold).map_err(|e| CliError::Data(e.to_string()))?;
        if tasks.insert(r.id.clone(), task).is_some() {
            return Err(CliError::Data(format!("duplicate task id {}", r.id)));
        }
    }
    Ok((records, tasks))
}

struct Run {
    subcommand: &'static str,
    seed: Option<u64>,
    config: Config,
    config_path: Option<PathBuf>,
    inputs: Vec<PathBuf>,
    started: u128,
}

impl Run {
    fn new(subcommand: &'static str, seed: Option<u64>, config: Config, config_path: Option<PathBuf>, inputs: Vec<PathBuf>) -> Self {
        Self {
            subcommand,
            seed,
            config,
            config_path,
            inputs,
            started: io::unix_ms(),
        }
    }

    fn write_bytes(&self, out: &Path, bytes: &[u8]) -> CliResult {
        io::atomic_write(out, bytes).map_err(output_error)?;
        io::write_manifest(&RunManifest {
            v: 1,
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: self.subcommand.into(),
            seed: self.seed,
            config_digest: self.config.digest(),
            config_path: self.config_path.clone(),
            inputs: self.inputs.clone(),
            output: out.to_owned(),
            started_unix_ms: self.started,
            finished_unix_ms: io::unix_ms(),
        })
        .map_err(output_error)
    }

    fn write_json<T: Serialize>(&self, out: &Path, body: &T) -> CliResult {
        let mut bytes = serde_json::to_vec_pretty(&Versioned::new(body)).expect("report serializes");
        bytes.push(b'\n');
        self.write_bytes(out, &bytes)
    }
}

fn gen_dataset(args: GenArgs) -> CliResult {
    let (config, config_path) = load_config(&args.config)?;
    let jobs: Vec<(ProblemKind, usize, u64)> = args
        .kinds
        .0
        .iter()
        .flat_map(|&kind| {
            let sizes = &args.sizes.0;
            (0..args.count).map(move |i| (kind, sizes[i % sizes.len()], args.seed + i as u64))
        })
        .collect();
    let outcomes: Vec<(ProblemKind, GenOutcome)> = jobs
        .par_iter()
        .map(|&(kind, n, seed)| {
            let outcome = match generate_record(kind, n, seed, args.method, &config.dataset) {
                Ok(o) => o,
                Err(e) => GenOutcome::Rejected {
                    id: qverify_core::dataset::record_id(kind, n, seed, args.method),
                    reason: e.to_string(),
                },
            };
            (kind, outcome)
        })
        .collect();

    let mut counts: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    let mut records = Vec::new();
    for (kind, o) in outcomes {
        let c = counts.entry(kind.name()).or_default();
        match o {
            GenOutcome::Accepted(r) => {
                c.0 += 1;
                records.push(*r);
            }
            GenOutcome::Rejected { id, reason } => {
                c.1 += 1;
                eprintln!("rejected {id}: {reason}");
            }
        }
    }
    for (kind, (a, r)) in &counts {
        println!("{kind:<22} accepted {a:>4}  rejected {r:>4}");
    }
    println!("total accepted {}", records.len());
    let run = Run::new("gen-dataset", Some(args.seed), config, config_path, vec![]);
    run.write_bytes(&args.out, &io::to_jsonl(&records))
}

#[derive(Serialize)]
struct VerifyLine<'a> {
    v: u32,
    task_id: &'a str,
    index: usize,
    breakdown: RewardBreakdown,
}

/// Candidate sets whose task exists and that have samples; others are warned about.
fn usable_sets<'a>(
    sets: &'a [io::CandidateSet],
    tasks: &HashMap<String, Task>,
) -> Vec<&'a io::CandidateSet> {
    sets.iter()
        .filter(|s| {
            if !tasks.contains_key(&s.task_id) {
                eprintln!("warning: unknown task id {}, skipped", s.task_id);
                false
            } else if s.samples.is_empty() {
                eprintln!("warning: no candidates for {}, skipped", s.task_id);
                false
            } else {
                true
            }
        })
        .collect()
}

fn verify(args: VerifyArgs) -> CliResult {
    let (mut config, config_path) = load_config(&args.config)?;
    if let Some(t) = args.tau_js {
        config.reward.tau_js = t;
    }
    if let Some(t) = args.tau_ev {
        config.reward.tau_ev = t;
    }
    if let Some(m) = args.max_steps {
        config.reward.optimizer.max_steps = m;
    }
    let (_, tasks) = load_tasks(&args.dataset, &config)?;
    let sets = io::read_candidates(&args.candidates).map_err(input_error)?;
    let sets = usable_sets(&sets, &tasks);
    let jobs: Vec<(&str, usize, &str)> = sets
        .iter()
        .flat_map(|s| s.samples.iter().enumerate().map(|(i, q)| (s.task_id.as_str(), i, q.as_str())))
        .collect();
    let reward = config.reward;
    let lines: Vec<VerifyLine> = jobs
        .par_iter()
        .map(|&(id, index, qasm)| VerifyLine {
            v: 1,
            task_id: id,
            index,
            breakdown: hierarchical_reward(qasm, &tasks[id], &reward),
        })
        .collect();

    let n = lines.len();
    if n > 0 {
        let mean = |f: fn(&RewardBreakdown) -> f64| lines.iter().map(|l| f(&l.breakdown)).sum::<f64>() / n as f64;
        let scr = 100.0 * lines.iter().filter(|l| l.breakdown.syntax_ok).count() as f64 / n as f64;
        println!(
            "{n} candidates over {} tasks: mean reward {:.4}  mean r_entropy {:.4}  SCR {scr:.2}%",
            sets.len(),
            mean(|b| b.total),
            mean(|b| b.r_entropy.unwrap_or(0.0)),
        );
    } else {
        println!("no candidates scored");
    }
    let run = Run::new(
        "verify",
        None,
        config,
        config_path,
        vec![args.dataset.clone(), args.candidates.clone()],
    );
    run.write_bytes(&args.out, &io::to_jsonl(&lines))
}

fn metrics(args: MetricsArgs) -> CliResult {
    let (mut config, config_path) = load_config(&args.config)?;
    if let Some(k) = args.k {
        config.metrics.k = k;
    }
    if let Some(t) = args.srev_tol {
        config.metrics.srev_tol = t;
    }
    if let Some(t) = args.hqcr_tol {
        config.metrics.hqcr_tol = t;
    }
    let sets = io::read_candidates(&args.candidates).map_err(input_error)?;
    let (_, tasks) = load_tasks(&args.dataset, &config)?;
    let sets = usable_sets(&sets, &tasks);
    let mc = config.metrics;
    let outcomes: Vec<EvalOutcome> = sets
        .par_iter()
        .map(|s| evaluate_candidates(&s.task_id, &tasks[&s.task_id], &s.samples, &mc))
        .collect();
    let report = compute_metrics(&outcomes, mc.srev_tol, mc.hqcr_tol, mc.k).map_err(|e| CliError::Data(e.to_string()))?;
    print!("{}", report::metrics_table(&report));
    if let Some(out) = &args.out {
        let run = Run::new(
            "metrics",
            None,
            config,
            config_path,
            vec![args.dataset.clone(), args.candidates.clone()],
        );
        run.write_json(out, &report)?;
    }
    Ok(())
}

fn baseline(args: BaselineArgs) -> CliResult {
    let (config, config_path) = load_config(&args.config)?;
    let (records, _) = load_tasks(&args.dataset, &config)?;
    let report = random_baseline(&records, args.samples, args.seed, &config.metrics).map_err(|e| CliError::Data(e.to_string()))?;
    print!("{}", report::baseline_table(&report));
    if let Some(out) = &args.out {
        let run = Run::new("baseline", Some(args.seed), config, config_path, vec![args.dataset.clone()]);
        run.write_json(out, &report)?;
    }
    Ok(())
}

fn serve(args: ServeArgs) -> CliResult {
    let (mut config, _) = load_config(&args.config)?;
    if let Some(l) = args.listen {
        config.server.listen = l;
    }
    let records = io::read_dataset(&args.dataset).map_err(input_error)?;
    let state = AppState::new(&records, &config).map_err(|e| CliError::Data(e.to_string()))?;
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Runtime(e.to_string()))?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&config.server.listen)
            .await
            .map_err(|e| CliError::Runtime(format!("cannot listen on {}: {e}", config.server.listen)))?;
        let addr = listener.local_addr().map_err(|e| CliError::Runtime(e.to_string()))?;
        println!(
            "listening on {addr}  tasks {}  config digest {}",
            state.dataset_size(),
            state.digest()
        );
        server::serve(listener, state.into(), server::shutdown_signal())
            .await
            .map_err(|e| CliError::Runtime(e.to_string()))
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::GenDataset(a) => gen_dataset(a),
        Command::Verify(a) => verify(a),
        Command::Metrics(a) => metrics(a),
        Command::Baseline(a) => baseline(a),
        Command::Serve(a) => serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

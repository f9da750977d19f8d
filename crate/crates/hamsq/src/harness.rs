//! Experiment driver: sweeps (n, K) cells, runs seeded independent trials
//! (in parallel when the `parallel` feature is on), and emits one CSV row
//! per trial plus per-cell summaries. Everything recorded is a pure
//! function of the config and master seed; worker count may only change
//! wall_time_ms.

use crate::era::{
    run_era, splitmix64, sub_seed, EdgeMode, EraConfig, EraOutcome, HOST_STREAM,
};
use crate::generators::{min_degree_host, HostSpec, SprinkleParams};
use crate::graph::Graph;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::PathBuf;
use std::time::Instant;

pub const CSV_SCHEMA: &str = "hamsq-csv-v1";
const CSV_COLUMNS: &str =
    "n,alpha_declared,K,seed,success,failure_reason,rounds,realized_x_edges,pi_min_degree,gamma2_connected,wall_time_ms";

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub n: usize,
    pub alpha_declared: f64,
    pub k_const: f64,
    pub seed: u64,
    pub success: bool,
    /// Empty on success; otherwise matching, gadget, stuck_round, host
    /// (host sampling exhausted its budget), or internal (trial panicked).
    pub failure_reason: String,
    pub rounds: u32,
    pub realized_x_edges: usize,
    pub pi_min_degree: Option<usize>,
    pub gamma2_connected: Option<bool>,
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub host: HostSpec,
    /// Orders to sweep; may be empty when the host pins its own order.
    pub n_list: Vec<usize>,
    pub k_list: Vec<f64>,
    pub trials: u32,
    pub master_seed: u64,
    pub mode: EdgeMode,
    /// 0 = one worker per core, 1 = fully sequential.
    pub workers: usize,
    /// Off by default so reruns are byte-identical; on, wall_time_ms is
    /// measured instead of zero.
    pub record_timing: bool,
    pub trace_dir: Option<PathBuf>,
    pub max_rotations_per_round: Option<usize>,
    pub matching_effort: u32,
}

impl ExperimentConfig {
    pub fn new(host: HostSpec) -> ExperimentConfig {
        ExperimentConfig {
            host,
            n_list: Vec::new(),
            k_list: Vec::new(),
            trials: 20,
            master_seed: 1,
            mode: EdgeMode::Restricted,
            workers: 0,
            record_timing: false,
            trace_dir: None,
            max_rotations_per_round: None,
            matching_effort: 64,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("cell (n={n}, K={k}) is invalid: {msg}")]
    Cell { n: usize, k: f64, msg: String },
    #[error("host pins n={spec_n}, but the sweep requests n={requested}")]
    NConflict { spec_n: usize, requested: usize },
    #[error("{0}")]
    Config(String),
    #[error("host file `{path}`: {msg}")]
    HostFile { path: String, msg: String },
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("csv line {line}: {msg}")]
    Csv { line: usize, msg: String },
}

/// Per-trial seed: a stable hash of (master, n, K bits, trial index), so
/// any single record can be reproduced without running the whole sweep.
pub fn trial_seed(master: u64, n: u64, k_bits: u64, trial: u64) -> u64 {
    let mut h = splitmix64(master ^ 0x9e3779b97f4a7c15);
    h = splitmix64(h ^ n);
    h = splitmix64(h ^ k_bits);
    splitmix64(h ^ trial)
}

enum HostBase {
    Shared(Graph),
    CompletePerN,
    SampledPerTrial { alpha: f64 },
}

struct Job {
    n: usize,
    k_const: f64,
    seed: u64,
    alpha_declared: f64,
}

struct Plan {
    base: HostBase,
    jobs: Vec<Job>,
}

fn build_plan(cfg: &ExperimentConfig) -> Result<Plan, HarnessError> {
    if cfg.trials == 0 {
        return Err(HarnessError::Config("trials must be >= 1".into()));
    }
    if cfg.k_list.is_empty() {
        return Err(HarnessError::Config("at least one K value required".into()));
    }
    let (base, alpha_declared, intrinsic_n) = match &cfg.host {
        HostSpec::Gnp { n, alpha } => {
            if !(0.5 < *alpha && *alpha < 1.0) {
                return Err(HarnessError::Config(format!(
                    "gnp host alpha must lie in (1/2, 1), got {alpha}"
                )));
            }
            (HostBase::SampledPerTrial { alpha: *alpha }, *alpha, *n)
        }
        HostSpec::Complete { n } => match n {
            Some(n) => (HostBase::Shared(Graph::complete(*n)), 1.0, Some(*n)),
            None => (HostBase::CompletePerN, 1.0, None),
        },
        HostSpec::Kst { s, t } => {
            let g = crate::generators::complete_bipartite(*s, *t);
            let alpha = (*s.min(t)) as f64 / (s + t) as f64;
            (HostBase::Shared(g), alpha, Some(s + t))
        }
        HostSpec::File { path } => {
            let f = fs::File::open(path).map_err(|e| HarnessError::HostFile {
                path: path.clone(),
                msg: e.to_string(),
            })?;
            let g = Graph::read_edge_list(BufReader::new(f)).map_err(|e| {
                HarnessError::HostFile {
                    path: path.clone(),
                    msg: e.to_string(),
                }
            })?;
            let alpha = if g.n() > 0 {
                g.min_degree() as f64 / g.n() as f64
            } else {
                0.0
            };
            let n = g.n();
            (HostBase::Shared(g), alpha, Some(n))
        }
    };
    let n_list: Vec<usize> = match intrinsic_n {
        Some(n0) => {
            for &n in &cfg.n_list {
                if n != n0 {
                    return Err(HarnessError::NConflict {
                        spec_n: n0,
                        requested: n,
                    });
                }
            }
            vec![n0]
        }
        None => {
            if cfg.n_list.is_empty() {
                return Err(HarnessError::Config(
                    "this host needs explicit n values (--n)".into(),
                ));
            }
            cfg.n_list.clone()
        }
    };
    for &n in &n_list {
        for &k in &cfg.k_list {
            SprinkleParams::new(n, k).map_err(|e| HarnessError::Cell {
                n,
                k,
                msg: e.to_string(),
            })?;
        }
    }
    if let Some(dir) = &cfg.trace_dir {
        fs::create_dir_all(dir)?;
    }
    let mut jobs = Vec::with_capacity(n_list.len() * cfg.k_list.len() * cfg.trials as usize);
    for &n in &n_list {
        for &k in &cfg.k_list {
            for t in 0..cfg.trials {
                jobs.push(Job {
                    n,
                    k_const: k,
                    seed: trial_seed(cfg.master_seed, n as u64, k.to_bits(), t as u64),
                    alpha_declared,
                });
            }
        }
    }
    Ok(Plan { base, jobs })
}

fn failed_record(job: &Job, reason: &str) -> TrialRecord {
    TrialRecord {
        n: job.n,
        alpha_declared: job.alpha_declared,
        k_const: job.k_const,
        seed: job.seed,
        success: false,
        failure_reason: reason.to_string(),
        rounds: 0,
        realized_x_edges: 0,
        pi_min_degree: None,
        gamma2_connected: None,
        wall_time_ms: 0,
    }
}

fn record_from_outcome(job: &Job, out: &EraOutcome, wall_time_ms: u64) -> TrialRecord {
    TrialRecord {
        n: job.n,
        alpha_declared: job.alpha_declared,
        k_const: job.k_const,
        seed: job.seed,
        success: out.result.is_ok(),
        failure_reason: match &out.result {
            Ok(_) => String::new(),
            Err(r) => r.to_string(),
        },
        rounds: out.rounds,
        realized_x_edges: out.diag.realized_x_edges,
        pi_min_degree: out.diag.pi1_min_degree,
        gamma2_connected: out.diag.gamma2_connected,
        wall_time_ms,
    }
}

fn render_trace(job: &Job, cfg: &ExperimentConfig, out: &EraOutcome) -> String {
    let mut buf = Vec::new();
    let result = match &out.result {
        Ok(_) => "success".to_string(),
        Err(r) => r.to_string(),
    };
    out.trace
        .write(
            &mut buf,
            &[
                ("host", cfg.host.to_string()),
                ("n", job.n.to_string()),
                ("K", job.k_const.to_string()),
                ("seed", job.seed.to_string()),
                ("mode", cfg.mode.to_string()),
                ("result", result),
            ],
        )
        .expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("trace text is ascii")
}

fn run_one(job: &Job, cfg: &ExperimentConfig, base: &HostBase) -> (TrialRecord, Option<String>) {
    let body = || -> (TrialRecord, Option<String>) {
        let started = cfg.record_timing.then(Instant::now);
        let host = match base {
            HostBase::Shared(g) => g.clone(),
            HostBase::CompletePerN => Graph::complete(job.n),
            HostBase::SampledPerTrial { alpha } => {
                let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(job.seed, HOST_STREAM));
                match min_degree_host(job.n, *alpha, &mut rng) {
                    Ok(g) => g,
                    Err(_) => return (failed_record(job, "host"), None),
                }
            }
        };
        let era_cfg = EraConfig {
            alpha: job.alpha_declared,
            seed: job.seed,
            mode: cfg.mode,
            max_rotations_per_round: cfg.max_rotations_per_round,
            matching_effort: cfg.matching_effort,
            debug_validate: false,
        };
        let out = match run_era(&host, job.k_const, &era_cfg) {
            Ok(out) => out,
            // Cells are validated up front, so a parameter rejection here
            // is a bug worth surfacing in the record.
            Err(_) => return (failed_record(job, "internal"), None),
        };
        let wall = started.map_or(0, |t| t.elapsed().as_millis() as u64);
        let trace = cfg
            .trace_dir
            .is_some()
            .then(|| render_trace(job, cfg, &out));
        (record_from_outcome(job, &out, wall), trace)
    };
    guard_panic(job, body)
}

/// A panicking trial becomes failure_reason=internal instead of tearing
/// down the sweep.
fn guard_panic(
    job: &Job,
    body: impl FnOnce() -> (TrialRecord, Option<String>),
) -> (TrialRecord, Option<String>) {
    match std::panic::catch_unwind(std::panic::AssertUnwindSafe(body)) {
        Ok(r) => r,
        Err(_) => (failed_record(job, "internal"), None),
    }
}

#[cfg(feature = "parallel")]
fn execute(plan: &Plan, cfg: &ExperimentConfig) -> Vec<(TrialRecord, Option<String>)> {
    use rayon::prelude::*;
    if cfg.workers == 1 {
        return plan.jobs.iter().map(|j| run_one(j, cfg, &plan.base)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .expect("thread pool construction");
    pool.install(|| {
        plan.jobs
            .par_iter()
            .map(|j| run_one(j, cfg, &plan.base))
            .collect()
    })
}

#[cfg(not(feature = "parallel"))]
fn execute(plan: &Plan, cfg: &ExperimentConfig) -> Vec<(TrialRecord, Option<String>)> {
    plan.jobs.iter().map(|j| run_one(j, cfg, &plan.base)).collect()
}

/// Runs the whole sweep. Records come back in (n, K, trial) order no
/// matter how many workers ran them; trace files (one per trial) are
/// written before returning when trace_dir is set.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>, HarnessError> {
    let plan = build_plan(cfg)?;
    let results = execute(&plan, cfg);
    if let Some(dir) = &cfg.trace_dir {
        for (job, (_, trace)) in plan.jobs.iter().zip(&results) {
            if let Some(text) = trace {
                let name = format!("n{}_K{}_s{}.trace", job.n, job.k_const, job.seed);
                fs::write(dir.join(name), text)?;
            }
        }
    }
    Ok(results.into_iter().map(|(r, _)| r).collect())
}

fn fmt_opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_csv<W: Write>(records: &[TrialRecord], mut w: W) -> io::Result<()> {
    writeln!(w, "# {CSV_SCHEMA}")?;
    writeln!(w, "{CSV_COLUMNS}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.alpha_declared,
            r.k_const,
            r.seed,
            r.success,
            r.failure_reason,
            r.rounds,
            r.realized_x_edges,
            fmt_opt(&r.pi_min_degree),
            fmt_opt(&r.gamma2_connected),
            r.wall_time_ms
        )?;
    }
    Ok(())
}

pub fn read_csv<R: BufRead>(r: R) -> Result<Vec<TrialRecord>, HarnessError> {
    let mut lines = r.lines().enumerate();
    let schema = lines
        .next()
        .ok_or(HarnessError::Csv {
            line: 1,
            msg: "empty file".into(),
        })?
        .1?;
    if schema.trim() != format!("# {CSV_SCHEMA}") {
        return Err(HarnessError::Csv {
            line: 1,
            msg: format!("expected schema header `# {CSV_SCHEMA}`"),
        });
    }
    let header = lines
        .next()
        .ok_or(HarnessError::Csv {
            line: 2,
            msg: "missing column header".into(),
        })?
        .1?;
    if header.trim() != CSV_COLUMNS {
        return Err(HarnessError::Csv {
            line: 2,
            msg: "column header does not match the schema".into(),
        });
    }
    let mut out = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 11 {
            return Err(HarnessError::Csv {
                line: line_no,
                msg: format!("expected 11 fields, found {}", fields.len()),
            });
        }
        let err = |msg: String| HarnessError::Csv { line: line_no, msg };
        let parse_opt =
            |s: &str, what: &str| -> Result<Option<u64>, HarnessError> {
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse::<u64>()
                        .map(Some)
                        .map_err(|_| err(format!("bad {what} `{s}`")))
                }
            };
        let record = TrialRecord {
            n: fields[0]
                .parse()
                .map_err(|_| err(format!("bad n `{}`", fields[0])))?,
            alpha_declared: fields[1]
                .parse()
                .map_err(|_| err(format!("bad alpha `{}`", fields[1])))?,
            k_const: fields[2]
                .parse()
                .map_err(|_| err(format!("bad K `{}`", fields[2])))?,
            seed: fields[3]
                .parse()
                .map_err(|_| err(format!("bad seed `{}`", fields[3])))?,
            success: match fields[4] {
                "true" => true,
                "false" => false,
                other => return Err(err(format!("bad success `{other}`"))),
            },
            failure_reason: fields[5].to_string(),
            rounds: fields[6]
                .parse()
                .map_err(|_| err(format!("bad rounds `{}`", fields[6])))?,
            realized_x_edges: fields[7]
                .parse()
                .map_err(|_| err(format!("bad realized_x_edges `{}`", fields[7])))?,
            pi_min_degree: parse_opt(fields[8], "pi_min_degree")?.map(|v| v as usize),
            gamma2_connected: match fields[9] {
                "" => None,
                "true" => Some(true),
                "false" => Some(false),
                other => return Err(err(format!("bad gamma2_connected `{other}`"))),
            },
            wall_time_ms: parse_opt(fields[10], "wall_time_ms")?.unwrap_or(0),
        };
        if record.success && !record.failure_reason.is_empty() {
            return Err(err("success row carries a failure reason".into()));
        }
        out.push(record);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub n: usize,
    pub k_const: f64,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Mean over all trials in the cell, failures included.
    pub mean_rounds: f64,
    /// Fraction of trials whose stage-two contraction was connected.
    pub gamma2_connected_rate: f64,
}

/// Groups records into (n, K) cells in first-appearance order.
pub fn summarize(records: &[TrialRecord]) -> Vec<CellSummary> {
    let mut cells: Vec<CellSummary> = Vec::new();
    for r in records {
        let cell = match cells
            .iter_mut()
            .find(|c| c.n == r.n && c.k_const == r.k_const)
        {
            Some(c) => c,
            None => {
                cells.push(CellSummary {
                    n: r.n,
                    k_const: r.k_const,
                    trials: 0,
                    successes: 0,
                    success_rate: 0.0,
                    mean_rounds: 0.0,
                    gamma2_connected_rate: 0.0,
                });
                cells.last_mut().unwrap()
            }
        };
        cell.trials += 1;
        cell.successes += r.success as usize;
        // Accumulate sums; normalized below.
        cell.mean_rounds += r.rounds as f64;
        cell.gamma2_connected_rate += matches!(r.gamma2_connected, Some(true)) as u8 as f64;
    }
    for c in &mut cells {
        c.success_rate = c.successes as f64 / c.trials as f64;
        c.mean_rounds /= c.trials as f64;
        c.gamma2_connected_rate /= c.trials as f64;
    }
    cells
}

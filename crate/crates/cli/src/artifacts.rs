//! Run artifacts on disk.
//!
//! A run directory holds exactly four files:
//!
//! * config.json: the archived RunConfig, sufficient to reproduce the run;
//! * jobs.csv: one row per job record, fixed column order;
//! * backlog.csv: the piecewise-constant waiting-count trace;
//! * summary.json: the ServiceMetrics computed live.
//!
//! jobs.csv columns are frozen: job_id, kind, parent_id, arrival_ns,
//! deadline_ns, weight, compute_ns, memory_ns, service_ns, cutoff_hit,
//! start_ns, completion_ns, outcome, lateness_ns, rescue_triggered.
//! Times are integer nanoseconds; empty cells are fields that do not apply
//! (no parent, dropped before service). A log rebuilt from these files
//! recomputes the identical summary.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

use decsim_core::costmodel::ServiceBreakdown;
use decsim_core::engine::{BacklogPoint, JobRecord, Outcome, RunLog};
use decsim_core::metrics::{compute_metrics, ServiceMetrics};
use decsim_core::time::Nanos;
use decsim_core::workload::{Job, JobKind};
use decsim_core::RunConfig;

pub const JOBS_CSV_HEADER: [&str; 15] = [
    "job_id",
    "kind",
    "parent_id",
    "arrival_ns",
    "deadline_ns",
    "weight",
    "compute_ns",
    "memory_ns",
    "service_ns",
    "cutoff_hit",
    "start_ns",
    "completion_ns",
    "outcome",
    "lateness_ns",
    "rescue_triggered",
];

fn kind_str(kind: JobKind) -> &'static str {
    match kind {
        JobKind::Primary => "primary",
        JobKind::Rescue => "rescue",
    }
}

fn outcome_str(outcome: Outcome) -> &'static str {
    match outcome {
        Outcome::OnTime => "on_time",
        Outcome::Miss => "miss",
        Outcome::Drop => "drop",
    }
}

fn opt_ns(v: Option<Nanos>) -> String {
    v.map(|n| n.as_ns().to_string()).unwrap_or_default()
}

/// Serialize job records in the frozen column order.
pub fn write_jobs_csv(records: &[JobRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    w.write_record(JOBS_CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.job.id.to_string(),
            kind_str(r.job.kind).to_string(),
            r.job.parent_id.map(|p| p.to_string()).unwrap_or_default(),
            r.job.arrival.as_ns().to_string(),
            r.job.deadline.as_ns().to_string(),
            r.job.weight.map(|w| w.to_string()).unwrap_or_default(),
            opt_ns(r.service.map(|s| s.compute)),
            opt_ns(r.service.map(|s| s.memory)),
            opt_ns(r.service.map(|s| s.total)),
            r.service.map(|s| s.cutoff_hit.to_string()).unwrap_or_default(),
            opt_ns(r.start),
            opt_ns(r.completion),
            outcome_str(r.outcome).to_string(),
            opt_ns(r.lateness),
            r.rescue_triggered.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_backlog_csv(trace: &[BacklogPoint], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["time_ns", "queue"])?;
    for p in trace {
        w.write_record([p.time.as_ns().to_string(), p.queue.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Write the four run artifacts into `dir`, creating it if needed. Returns
/// the live summary.
pub fn emit_artifacts(log: &RunLog, dir: &Path) -> Result<ServiceMetrics> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let summary = compute_metrics(log).context("computing live summary")?;
    fs::write(
        dir.join("config.json"),
        serde_json::to_string_pretty(&log.config)? + "\n",
    )
    .with_context(|| format!("writing config.json in {}", dir.display()))?;
    write_jobs_csv(&log.records, &dir.join("jobs.csv"))?;
    write_backlog_csv(&log.backlog_trace, &dir.join("backlog.csv"))?;
    fs::write(
        dir.join("summary.json"),
        serde_json::to_string_pretty(&summary)? + "\n",
    )
    .with_context(|| format!("writing summary.json in {}", dir.display()))?;
    Ok(summary)
}

fn parse_opt<T: std::str::FromStr>(field: &str, name: &str, row: usize) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse::<T>()
        .map(Some)
        .map_err(|e| anyhow::anyhow!("jobs.csv row {row}: bad {name} '{field}': {e}"))
}

fn parse_ns(field: &str, name: &str, row: usize) -> Result<Option<Nanos>> {
    Ok(parse_opt::<i64>(field, name, row)?.map(Nanos))
}

/// Rebuild job records from a frozen-format jobs.csv.
pub fn read_jobs_csv(path: &Path) -> Result<Vec<JobRecord>> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let header = reader.headers()?.clone();
    if header.iter().ne(JOBS_CSV_HEADER) {
        bail!("{}: unexpected column set {:?}", path.display(), header);
    }
    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.with_context(|| format!("reading {} row {i}", path.display()))?;
        if row.len() != JOBS_CSV_HEADER.len() {
            bail!("{} row {i}: {} fields", path.display(), row.len());
        }
        let get = |idx: usize| row.get(idx).unwrap_or("");
        let kind = match get(1) {
            "primary" => JobKind::Primary,
            "rescue" => JobKind::Rescue,
            other => bail!("jobs.csv row {i}: unknown kind '{other}'"),
        };
        let outcome = match get(12) {
            "on_time" => Outcome::OnTime,
            "miss" => Outcome::Miss,
            "drop" => Outcome::Drop,
            other => bail!("jobs.csv row {i}: unknown outcome '{other}'"),
        };
        let job = Job {
            id: get(0)
                .parse()
                .map_err(|e| anyhow::anyhow!("jobs.csv row {i}: bad job_id: {e}"))?,
            kind,
            parent_id: parse_opt(get(2), "parent_id", i)?,
            arrival: parse_ns(get(3), "arrival_ns", i)?
                .ok_or_else(|| anyhow::anyhow!("jobs.csv row {i}: missing arrival_ns"))?,
            deadline: parse_ns(get(4), "deadline_ns", i)?
                .ok_or_else(|| anyhow::anyhow!("jobs.csv row {i}: missing deadline_ns"))?,
            weight: parse_opt(get(5), "weight", i)?,
        };
        let compute = parse_ns(get(6), "compute_ns", i)?;
        let memory = parse_ns(get(7), "memory_ns", i)?;
        let total = parse_ns(get(8), "service_ns", i)?;
        let cutoff_hit: Option<bool> = parse_opt(get(9), "cutoff_hit", i)?;
        let service = match (compute, memory, total, cutoff_hit) {
            (Some(compute), Some(memory), Some(total), Some(cutoff_hit)) => {
                Some(ServiceBreakdown { compute, memory, total, cutoff_hit })
            }
            (None, None, None, None) => None,
            _ => bail!("jobs.csv row {i}: partial service fields"),
        };
        let start = parse_ns(get(10), "start_ns", i)?;
        let completion = parse_ns(get(11), "completion_ns", i)?;
        let lateness = parse_ns(get(13), "lateness_ns", i)?;
        let rescue_triggered: bool = get(14)
            .parse()
            .map_err(|e| anyhow::anyhow!("jobs.csv row {i}: bad rescue_triggered: {e}"))?;
        records.push(JobRecord {
            tardiness: lateness.map(|l| l.max(Nanos::ZERO)),
            response: match (completion, job.arrival) {
                (Some(c), a) => Some(c - a),
                _ => None,
            },
            job,
            service,
            start,
            completion,
            outcome,
            lateness,
            rescue_triggered,
        });
    }
    Ok(records)
}

pub fn read_backlog_csv(path: &Path) -> Result<Vec<BacklogPoint>> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    if reader.headers()?.iter().ne(["time_ns", "queue"]) {
        bail!("{}: unexpected columns", path.display());
    }
    let mut trace = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let time: i64 = row
            .get(0)
            .unwrap_or("")
            .parse()
            .map_err(|e| anyhow::anyhow!("backlog.csv row {i}: bad time_ns: {e}"))?;
        let queue: u32 = row
            .get(1)
            .unwrap_or("")
            .parse()
            .map_err(|e| anyhow::anyhow!("backlog.csv row {i}: bad queue: {e}"))?;
        trace.push(BacklogPoint { time: Nanos(time), queue });
    }
    Ok(trace)
}

pub fn read_config(path: &Path) -> Result<RunConfig> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let config: RunConfig = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))?;
    Ok(config)
}

/// Rebuild a RunLog from an emitted run directory. Per-server busy times are
/// not persisted, so the rebuilt log derives pooled utilization from records.
pub fn read_run_dir(dir: &Path) -> Result<RunLog> {
    let config = read_config(&dir.join("config.json"))?;
    let records = read_jobs_csv(&dir.join("jobs.csv"))?;
    let backlog_trace = read_backlog_csv(&dir.join("backlog.csv"))?;
    let horizon = records
        .iter()
        .filter_map(|r| r.completion)
        .max()
        .unwrap_or(Nanos::ZERO);
    Ok(RunLog {
        seed: config.seed,
        config,
        records,
        backlog_trace,
        horizon,
        server_busy: Vec::new(),
    })
}

pub fn read_summary(dir: &Path) -> Result<ServiceMetrics> {
    let path = dir.join("summary.json");
    let text =
        fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?)
}

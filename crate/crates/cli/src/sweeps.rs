//! Built-in sweeps.
//!
//! Four regimes, each sweeping exactly its designated variables over a fixed
//! base configuration, all cells sharing one seed so compared cells see the
//! same arrival, weight, and jitter streams:
//!
//! * sram-fit: (code, state organization, on-chip budget) grid, evaluated
//!   directly through the traffic model (no queueing involved);
//! * tail: rescue policy x cutoff budget, heavy-tailed composite service;
//! * qos: on-period arrival rate x admission cap, bursty fixed service;
//! * capacity: server count at the stressed qos operating point, admission
//!   open.
//!
//! Parameters the workload description leaves open (arrival rates, the
//! weight-to-time slope, burst window lengths) are calibration choices, set
//! here so the regimes land in their intended operating ranges; they are
//! plain config fields, not hidden constants.
//!
//! Every simulated cell writes full run artifacts into cells/<name>/ inside
//! the sweep directory, plus one table CSV per sweep at the top. Cells are
//! reproducible from their archived config.json alone. The sram-fit sweep is
//! the exception: its cells are model evaluations, so it archives per-cell
//! configs and the table only.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

use decsim_core::codes::{fit_boundary, StateOrganization};
use decsim_core::config::{
    CodeRef, CompositeConfig, RunConfig, ServiceConfig, TrafficConfig, WeightConfig,
};
use decsim_core::costmodel::{
    excess_bytes, mem_time, offchip_traffic, ChmCompute, CombineRule, JitterParams, JitterTarget,
    WorkloadModelParams,
};
use decsim_core::engine::{run, RunLog};
use decsim_core::metrics::ServiceMetrics;
use decsim_core::policy::{
    AdmissionPolicy, PolicySet, RescuePolicy, RescueTrigger, SchedulerPolicy,
};
use decsim_core::time::Nanos;
use decsim_core::workload::ArrivalProcess;

use crate::artifacts::emit_artifacts;

pub const BUDGET_GRID: [u64; 7] = [128, 256, 512, 1024, 2048, 4096, 8192];
pub const SWEEP_CODES: [&str; 3] = ["bb72", "bb144", "bb288"];
pub const TAIL_CUTOFFS_US: [i64; 5] = [20, 30, 50, 70, 100];
pub const QOS_CAPS: [Option<u32>; 7] =
    [Some(10), Some(20), Some(40), Some(80), Some(160), Some(320), None];
pub const QOS_RATES_PER_SEC: [f64; 2] = [20_000.0, 80_000.0];
pub const CAPACITY_SERVERS: [u32; 3] = [1, 2, 4];

pub fn org_label(org: StateOrganization) -> &'static str {
    match org {
        StateOrganization::EdgeCentric => "edge_centric",
        StateOrganization::CachedSummary => "cached_summary",
    }
}

fn write_config(config: &RunConfig, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join("config.json"), serde_json::to_string_pretty(config)? + "\n")
        .with_context(|| format!("writing config.json in {}", dir.display()))?;
    Ok(())
}

fn run_cell(config: &RunConfig, cell_dir: &Path) -> Result<(RunLog, ServiceMetrics)> {
    let log = run(config).with_context(|| format!("cell {}", cell_dir.display()))?;
    let summary = emit_artifacts(&log, cell_dir)?;
    Ok((log, summary))
}

fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

fn p99_ns(summary: &ServiceMetrics) -> Result<i64> {
    summary
        .response_p99_ns
        .map(|n| n.as_ns())
        .context("no served jobs, p99 undefined")
}

// ── sram-fit ────────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq)]
pub struct SramFitRow {
    pub code: String,
    pub organization: StateOrganization,
    pub budget_bytes: u64,
    pub state_bytes: u64,
    pub excess_bytes: u64,
    pub offchip_per_iter_bytes: u64,
    pub offchip_total_bytes: u64,
    pub mem_time_ns: i64,
    pub service_total_ns: i64,
    /// Smallest grid budget holding the whole state; None when even the
    /// largest budget spills.
    pub boundary_bytes: Option<u64>,
}

/// Traffic-model operating point shared by the sram-fit cells.
pub fn sram_fit_traffic(budget_bytes: u64) -> TrafficConfig {
    TrafficConfig {
        iterations: 10,
        rw_amplification: 2.0,
        bandwidth_bytes_per_sec: 64_000_000_000,
        compute_floor: Nanos(500),
        sram_budget_bytes: budget_bytes,
    }
}

pub fn sram_fit_config(code: &str, org: StateOrganization, budget: u64, seed: u64) -> RunConfig {
    RunConfig {
        format_version: 1,
        seed,
        n_jobs: 5_000,
        n_servers: 1,
        code: CodeRef::Builtin(code.into()),
        organization: org,
        footprint: Default::default(),
        arrivals: ArrivalProcess::Poisson { rate_per_sec: 100_000.0 },
        slack_ns: Nanos::from_micros(50),
        weights: WeightConfig::default(),
        service: ServiceConfig::Traffic(sram_fit_traffic(budget)),
        policy: PolicySet::default(),
        out_dir: None,
    }
}

/// Evaluate the traffic model over the code x organization x budget grid.
pub fn run_sram_fit_sweep(dir: &Path, seed: u64) -> Result<Vec<SramFitRow>> {
    fs::create_dir_all(dir)?;
    let mut rows = Vec::new();
    for code in SWEEP_CODES {
        for org in [StateOrganization::EdgeCentric, StateOrganization::CachedSummary] {
            let boundary = {
                let resolved = sram_fit_config(code, org, BUDGET_GRID[0], seed).resolve()?;
                fit_boundary(resolved.state_bytes, &BUDGET_GRID)?.within()
            };
            for budget in BUDGET_GRID {
                let config = sram_fit_config(code, org, budget, seed);
                let resolved = config.resolve()?;
                let traffic = sram_fit_traffic(budget);
                let excess = excess_bytes(resolved.state_bytes, budget);
                let moved = offchip_traffic(excess, traffic.rw_amplification, traffic.iterations);
                let memory = mem_time(moved.total_bytes, traffic.bandwidth_bytes_per_sec);
                write_config(&config, &dir.join(format!("cells/{code}-{}-{budget}", org_label(org))))?;
                rows.push(SramFitRow {
                    code: code.into(),
                    organization: org,
                    budget_bytes: budget,
                    state_bytes: resolved.state_bytes,
                    excess_bytes: excess,
                    offchip_per_iter_bytes: moved.per_iteration_bytes,
                    offchip_total_bytes: moved.total_bytes,
                    mem_time_ns: memory.as_ns(),
                    service_total_ns: (traffic.compute_floor + memory).as_ns(),
                    boundary_bytes: boundary,
                });
            }
        }
    }
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.code.clone(),
                org_label(r.organization).into(),
                r.budget_bytes.to_string(),
                r.state_bytes.to_string(),
                r.excess_bytes.to_string(),
                r.offchip_per_iter_bytes.to_string(),
                r.offchip_total_bytes.to_string(),
                r.mem_time_ns.to_string(),
                r.service_total_ns.to_string(),
                r.boundary_bytes.map(|b| b.to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    write_table(
        &dir.join("sram_fit.csv"),
        &[
            "code",
            "organization",
            "budget_bytes",
            "state_bytes",
            "excess_bytes",
            "offchip_per_iter_bytes",
            "offchip_total_bytes",
            "mem_time_ns",
            "service_total_ns",
            "boundary_bytes",
        ],
        &table,
    )?;
    Ok(rows)
}

// ── tail ────────────────────────────────────────────────────────────────────

#[derive(Debug, Copy, Clone, PartialEq, Eq)]
pub enum TailPolicy {
    CutoffOnly,
    RescueBacklog,
    RescueSlack,
    RescueCutoffHit,
}

pub const TAIL_POLICIES: [TailPolicy; 4] = [
    TailPolicy::CutoffOnly,
    TailPolicy::RescueBacklog,
    TailPolicy::RescueSlack,
    TailPolicy::RescueCutoffHit,
];

impl TailPolicy {
    pub fn label(self) -> &'static str {
        match self {
            TailPolicy::CutoffOnly => "cutoff_only",
            TailPolicy::RescueBacklog => "rescue_backlog",
            TailPolicy::RescueSlack => "rescue_slack",
            TailPolicy::RescueCutoffHit => "rescue_cutoff_hit",
        }
    }

    fn rescue(self) -> RescuePolicy {
        let trigger = match self {
            TailPolicy::CutoffOnly => {
                return RescuePolicy { enabled: false, ..RescuePolicy::default() }
            }
            TailPolicy::RescueBacklog => RescueTrigger::Backlog { threshold: 2 },
            TailPolicy::RescueSlack => {
                RescueTrigger::Slack { threshold_ns: Nanos::from_micros(5) }
            }
            TailPolicy::RescueCutoffHit => RescueTrigger::CutoffHit,
        };
        RescuePolicy {
            enabled: true,
            trigger,
            budget: Nanos::from_micros(10),
            ..RescuePolicy::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailRow {
    pub policy: &'static str,
    pub cutoff_ns: i64,
    pub p99_ns: i64,
    pub miss_rate: f64,
    pub trigger_rate: f64,
}

/// Heavy-tail operating point: weight-affine compute under truncated-Pareto
/// jitter, state resident on-chip. Arrival rate and the per-unit slope are
/// calibration choices targeting moderate load with most raw services above
/// the largest cutoff.
pub fn tail_config(policy: TailPolicy, cutoff: Nanos, seed: u64) -> RunConfig {
    RunConfig {
        format_version: 1,
        seed,
        n_jobs: 10_000,
        n_servers: 1,
        code: CodeRef::Builtin("bb72".into()),
        organization: StateOrganization::EdgeCentric,
        footprint: Default::default(),
        arrivals: ArrivalProcess::Poisson { rate_per_sec: 5_000.0 },
        slack_ns: Nanos::from_micros(100),
        weights: WeightConfig::default(),
        service: ServiceConfig::Composite(CompositeConfig {
            compute: ChmCompute::Weighted(WorkloadModelParams {
                base: Nanos::from_micros(10),
                alpha_per_unit: Nanos::from_micros(13),
                cap: None,
            }),
            memory: sram_fit_traffic(2048),
            combine: CombineRule::Max,
            jitter: Some(JitterParams {
                shape: 2.0,
                truncation: 50.0,
                applies_to: JitterTarget::Compute,
            }),
        }),
        policy: PolicySet {
            scheduler: SchedulerPolicy::Edf,
            admission: AdmissionPolicy::Unbounded,
            cutoff_ns: Some(cutoff),
            rescue: policy.rescue(),
        },
        out_dir: None,
    }
}

/// Rescue-policy x cutoff grid under matched seeds.
pub fn run_tail_sweep(dir: &Path, seed: u64) -> Result<Vec<TailRow>> {
    fs::create_dir_all(dir)?;
    let mut rows = Vec::new();
    for policy in TAIL_POLICIES {
        for cutoff_us in TAIL_CUTOFFS_US {
            let cutoff = Nanos::from_micros(cutoff_us);
            let config = tail_config(policy, cutoff, seed);
            let cell = dir.join(format!("cells/{}-t{cutoff_us}us", policy.label()));
            let (_, summary) = run_cell(&config, &cell)?;
            rows.push(TailRow {
                policy: policy.label(),
                cutoff_ns: cutoff.as_ns(),
                p99_ns: p99_ns(&summary)?,
                miss_rate: summary.miss_rate,
                trigger_rate: summary.trigger_rate,
            });
        }
    }
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.policy.into(),
                r.cutoff_ns.to_string(),
                r.p99_ns.to_string(),
                r.miss_rate.to_string(),
                r.trigger_rate.to_string(),
            ]
        })
        .collect();
    write_table(
        &dir.join("tail.csv"),
        &["policy", "cutoff_ns", "p99_ns", "miss_rate", "trigger_rate"],
        &table,
    )?;
    Ok(rows)
}

// ── qos ─────────────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq)]
pub struct QosRow {
    pub rate_on_per_sec: f64,
    pub cap: Option<u32>,
    pub drop_rate: f64,
    pub miss_rate: f64,
    pub goodput: f64,
    pub max_backlog: u32,
    pub p99_ns: i64,
}

pub fn cap_label(cap: Option<u32>) -> String {
    cap.map(|c| c.to_string()).unwrap_or_else(|| "unbounded".into())
}

/// Bursty fixed-service operating point. Burst windows are a calibration
/// choice: at the stressed rate the on/off duty cycle slightly exceeds one
/// server's capacity, so backlog ratchets up across bursts into the hundreds
/// by the end of the run without crossing the largest finite cap.
pub fn qos_config(rate_on_per_sec: f64, cap: Option<u32>, seed: u64) -> RunConfig {
    RunConfig {
        format_version: 1,
        seed,
        n_jobs: 5_000,
        n_servers: 1,
        code: CodeRef::Builtin("bb144".into()),
        organization: StateOrganization::CachedSummary,
        footprint: Default::default(),
        arrivals: ArrivalProcess::BurstyOnOff {
            rate_on_per_sec,
            on_ns: Nanos::from_millis(2),
            off_ns: Nanos::from_micros(100),
        },
        slack_ns: Nanos::from_micros(100),
        weights: WeightConfig::default(),
        service: ServiceConfig::Fixed { service: Nanos::from_micros(20) },
        policy: PolicySet {
            scheduler: SchedulerPolicy::Edf,
            admission: match cap {
                Some(b_max) => AdmissionPolicy::Bounded { b_max },
                None => AdmissionPolicy::Unbounded,
            },
            ..PolicySet::default()
        },
        out_dir: None,
    }
}

/// Arrival-rate x admission-cap grid under matched seeds.
pub fn run_qos_sweep(dir: &Path, seed: u64) -> Result<Vec<QosRow>> {
    fs::create_dir_all(dir)?;
    let mut rows = Vec::new();
    for rate in QOS_RATES_PER_SEC {
        for cap in QOS_CAPS {
            let config = qos_config(rate, cap, seed);
            let cell = dir.join(format!("cells/lam{}-cap{}", rate as u64, cap_label(cap)));
            let (_, summary) = run_cell(&config, &cell)?;
            rows.push(QosRow {
                rate_on_per_sec: rate,
                cap,
                drop_rate: summary.drop_rate,
                miss_rate: summary.miss_rate,
                goodput: summary.goodput,
                max_backlog: summary.max_backlog,
                p99_ns: p99_ns(&summary)?,
            });
        }
    }
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                (r.rate_on_per_sec as u64).to_string(),
                cap_label(r.cap),
                r.drop_rate.to_string(),
                r.miss_rate.to_string(),
                r.goodput.to_string(),
                r.max_backlog.to_string(),
                r.p99_ns.to_string(),
            ]
        })
        .collect();
    write_table(
        &dir.join("qos.csv"),
        &[
            "rate_on_per_sec",
            "cap",
            "drop_rate",
            "miss_rate",
            "goodput",
            "max_backlog",
            "p99_ns",
        ],
        &table,
    )?;
    Ok(rows)
}

// ── capacity ────────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityRow {
    pub n_servers: u32,
    pub miss_rate: f64,
    pub max_backlog: u32,
    pub p99_ns: i64,
}

/// The stressed qos operating point with admission open; only the server
/// count varies.
pub fn capacity_config(n_servers: u32, seed: u64) -> RunConfig {
    RunConfig { n_servers, ..qos_config(80_000.0, None, seed) }
}

pub fn run_capacity_sweep(dir: &Path, seed: u64) -> Result<Vec<CapacityRow>> {
    fs::create_dir_all(dir)?;
    let mut rows = Vec::new();
    for n_servers in CAPACITY_SERVERS {
        let config = capacity_config(n_servers, seed);
        let cell = dir.join(format!("cells/servers{n_servers}"));
        let (_, summary) = run_cell(&config, &cell)?;
        rows.push(CapacityRow {
            n_servers,
            miss_rate: summary.miss_rate,
            max_backlog: summary.max_backlog,
            p99_ns: p99_ns(&summary)?,
        });
    }
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.n_servers.to_string(),
                r.miss_rate.to_string(),
                r.max_backlog.to_string(),
                r.p99_ns.to_string(),
            ]
        })
        .collect();
    write_table(
        &dir.join("capacity.csv"),
        &["n_servers", "miss_rate", "max_backlog", "p99_ns"],
        &table,
    )?;
    Ok(rows)
}

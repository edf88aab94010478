//! Service-level metrics over a run log.
//!
//! Counts are the source of truth: every primary arrival is on time, missed,
//! or dropped, exactly once, and the three rates are those counts over N.
//! Quantiles are nearest-rank (sort ascending, take element ceil(q*n),
//! 1-indexed), so results are exact order statistics.
//!
//! Every metric here is a pure function of the log, so recomputing from
//! archived files reproduces the live summary bit for bit. A log that fails
//! consistency checks (missing records, tampered timing fields, trace not
//! anchored at zero) is rejected outright rather than summarized partially.
//! The one permitted surgery is deleting rescue records, which zeroes the
//! trigger rate and leaves primary rates untouched.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::engine::{BacklogPoint, JobRecord, Outcome, RunLog};
use crate::policy::AdmissionPolicy;
use crate::time::Nanos;
use crate::workload::JobKind;
use crate::{Error, Result};

// ── Rates ───────────────────────────────────────────────────────────────────

#[derive(Debug, Copy, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub miss_rate: f64,
    pub drop_rate: f64,
    pub goodput: f64,
}

/// Outcome rates over primary records. Rescue records are ignored.
pub fn rates(records: &[JobRecord]) -> Result<Rates> {
    let mut n = 0u64;
    let mut missed = 0u64;
    let mut dropped = 0u64;
    for r in records.iter().filter(|r| r.job.kind == JobKind::Primary) {
        n += 1;
        match r.outcome {
            Outcome::Miss => missed += 1,
            Outcome::Drop => dropped += 1,
            Outcome::OnTime => {}
        }
    }
    if n == 0 {
        return Err(Error::Log(String::from("no primary records to rate")));
    }
    let on_time = n - missed - dropped;
    Ok(Rates {
        miss_rate: missed as f64 / n as f64,
        drop_rate: dropped as f64 / n as f64,
        goodput: on_time as f64 / n as f64,
    })
}

// ── Quantiles ───────────────────────────────────────────────────────────────

/// Nearest-rank quantile: sort ascending, return the element at 1-indexed
/// rank ceil(q * n). Requires nonempty samples and 0 < q <= 1.
pub fn quantile(samples: &[Nanos], q: f64) -> Result<Nanos> {
    if samples.is_empty() {
        return Err(Error::Log(String::from("quantile of empty sample set")));
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::Config(format!("quantile fraction must be in (0, 1] (got {q})")));
    }
    let mut sorted: Vec<Nanos> = samples.to_vec();
    sorted.sort_unstable();
    let rank = libm::ceil(q * sorted.len() as f64) as usize;
    Ok(sorted[rank.clamp(1, sorted.len()) - 1])
}

// ── Backlog ─────────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacklogStats {
    pub max_backlog: u32,
    /// Total duration with backlog at or above each threshold.
    pub time_above: BTreeMap<u32, Nanos>,
}

/// Peak backlog and per-threshold dwell times over a piecewise-constant
/// trace. The final segment extends to the horizon.
pub fn backlog_stats(trace: &[BacklogPoint], horizon: Nanos, thresholds: &[u32]) -> BacklogStats {
    let max_backlog = trace.iter().map(|p| p.queue).max().unwrap_or(0);
    let mut time_above: BTreeMap<u32, Nanos> =
        thresholds.iter().map(|&t| (t, Nanos::ZERO)).collect();
    for (i, point) in trace.iter().enumerate() {
        let end = match trace.get(i + 1) {
            Some(next) => next.time,
            None => horizon.max(point.time),
        };
        let duration = end - point.time;
        for (&threshold, acc) in time_above.iter_mut() {
            if point.queue >= threshold {
                *acc += duration;
            }
        }
    }
    BacklogStats { max_backlog, time_above }
}

/// Thresholds reported by default: 1, 10, and the admission cap when finite.
pub fn default_thresholds(config: &RunConfig) -> Vec<u32> {
    let mut thresholds = alloc::vec![1u32, 10];
    if let AdmissionPolicy::Bounded { b_max } = config.policy.admission {
        thresholds.push(b_max);
    }
    thresholds.sort_unstable();
    thresholds.dedup();
    thresholds
}

// ── Log validation ──────────────────────────────────────────────────────────

/// Reject inconsistent or truncated logs before computing anything.
pub fn validate_log(log: &RunLog) -> Result<()> {
    log.config.validate()?;
    let n_primary = log
        .records
        .iter()
        .filter(|r| r.job.kind == JobKind::Primary)
        .count() as u64;
    if n_primary != log.config.n_jobs {
        return Err(Error::Log(format!(
            "log truncated: {} primary records for {} arrivals",
            n_primary, log.config.n_jobs
        )));
    }
    for (i, r) in log.records.iter().enumerate() {
        let id = r.job.id;
        if id != i as u64 {
            return Err(Error::Log(format!("record {i} holds job id {id}")));
        }
        match r.job.kind {
            JobKind::Primary => {
                if r.job.parent_id.is_some() {
                    return Err(Error::Log(format!("primary {id} has a parent")));
                }
            }
            JobKind::Rescue => {
                let parent = r
                    .job
                    .parent_id
                    .and_then(|p| log.records.get(p as usize))
                    .ok_or_else(|| Error::Log(format!("rescue {id} has no parent record")))?;
                if parent.job.kind != JobKind::Primary {
                    return Err(Error::Log(format!("rescue {id} chained to a rescue")));
                }
                if r.outcome == Outcome::Drop {
                    return Err(Error::Log(format!("rescue {id} marked dropped")));
                }
                if r.rescue_triggered {
                    return Err(Error::Log(format!("rescue {id} spawned a rescue")));
                }
            }
        }
        match r.outcome {
            Outcome::Drop => {
                if r.service.is_some()
                    || r.start.is_some()
                    || r.completion.is_some()
                    || r.lateness.is_some()
                    || r.tardiness.is_some()
                    || r.response.is_some()
                    || r.rescue_triggered
                {
                    return Err(Error::Log(format!("dropped job {id} carries service fields")));
                }
            }
            Outcome::OnTime | Outcome::Miss => {
                let (Some(service), Some(start), Some(completion)) =
                    (r.service, r.start, r.completion)
                else {
                    return Err(Error::Log(format!("served job {id} missing timing fields")));
                };
                if start < r.job.arrival {
                    return Err(Error::Log(format!("job {id} starts before it arrives")));
                }
                if completion != start + service.total {
                    return Err(Error::Log(format!(
                        "job {id} violates non-preemptive service: {start} + {} != {completion}",
                        service.total
                    )));
                }
                let lateness = completion - r.job.deadline;
                if r.lateness != Some(lateness)
                    || r.tardiness != Some(lateness.max(Nanos::ZERO))
                    || r.response != Some(completion - r.job.arrival)
                {
                    return Err(Error::Log(format!("job {id} derived timing fields disagree")));
                }
                let missed = lateness.as_ns() > 0;
                if missed != (r.outcome == Outcome::Miss) {
                    return Err(Error::Log(format!("job {id} outcome contradicts lateness")));
                }
                if completion > log.horizon {
                    return Err(Error::Log(format!(
                        "job {id} completes at {completion}, beyond horizon {}",
                        log.horizon
                    )));
                }
            }
        }
    }
    if log.backlog_trace.is_empty() {
        return Err(Error::Log(String::from("backlog trace is empty")));
    }
    if log.backlog_trace[0].time != Nanos::ZERO {
        return Err(Error::Log(String::from("backlog trace does not start at t=0")));
    }
    if log.backlog_trace.windows(2).any(|w| w[0].time >= w[1].time) {
        return Err(Error::Log(String::from("backlog trace times not strictly increasing")));
    }
    if let Some(last) = log.backlog_trace.last() {
        if last.time > log.horizon {
            return Err(Error::Log(String::from("backlog trace extends beyond horizon")));
        }
    }
    if !log.server_busy.is_empty() {
        if log.server_busy.len() != log.config.n_servers as usize {
            return Err(Error::Log(format!(
                "{} busy counters for {} servers",
                log.server_busy.len(),
                log.config.n_servers
            )));
        }
        let busy: i64 = log.server_busy.iter().map(|b| b.as_ns()).sum();
        let served: i64 = log
            .records
            .iter()
            .filter_map(|r| r.service.map(|s| s.total.as_ns()))
            .sum();
        if busy != served {
            return Err(Error::Log(format!(
                "server busy time {busy} != summed service {served}"
            )));
        }
    }
    Ok(())
}

// ── Summary ─────────────────────────────────────────────────────────────────

/// The full metric summary emitted as summary.json. All `_ns` fields are
/// integer nanoseconds (or fractional means of them); fractions are in
/// [0, 1]. Option fields are null when undefined (no served primaries, or a
/// model without a traffic term).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceMetrics {
    pub n_jobs: u64,
    pub n_rescues: u64,
    pub n_on_time: u64,
    pub n_missed: u64,
    pub n_dropped: u64,
    pub miss_rate: f64,
    pub drop_rate: f64,
    pub goodput: f64,
    /// Rescue records over primary arrivals.
    pub trigger_rate: f64,
    pub response_p50_ns: Option<Nanos>,
    pub response_p95_ns: Option<Nanos>,
    pub response_p99_ns: Option<Nanos>,
    pub response_max_ns: Option<Nanos>,
    pub mean_response_ns: Option<f64>,
    pub mean_tardiness_ns: Option<f64>,
    pub max_tardiness_ns: Option<Nanos>,
    pub max_backlog: u32,
    pub time_above_ns: BTreeMap<u32, Nanos>,
    pub horizon_ns: Nanos,
    /// Summed service over n_servers * horizon, rescues included.
    pub utilization: f64,
    pub mean_compute_ns: Option<f64>,
    pub mean_memory_ns: Option<f64>,
    /// Nominal off-chip bytes one decode moves; models without a traffic
    /// term report null.
    pub offchip_bytes_per_job: Option<u64>,
    pub offchip_bytes_total: Option<u64>,
}

/// Compute the summary with the config's default backlog thresholds.
pub fn compute_metrics(log: &RunLog) -> Result<ServiceMetrics> {
    compute_metrics_with_thresholds(log, &default_thresholds(&log.config))
}

pub fn compute_metrics_with_thresholds(
    log: &RunLog,
    thresholds: &[u32],
) -> Result<ServiceMetrics> {
    validate_log(log)?;
    let resolved = log.config.resolve()?;
    let n_jobs = log.config.n_jobs;

    let mut n_rescues = 0u64;
    let mut n_on_time = 0u64;
    let mut n_missed = 0u64;
    let mut n_dropped = 0u64;
    let mut served_primaries = 0u64;
    let mut responses: Vec<Nanos> = Vec::new();
    let mut response_sum = 0i128;
    let mut tardiness_sum = 0i128;
    let mut max_tardiness: Option<Nanos> = None;
    let mut compute_sum = 0i128;
    let mut memory_sum = 0i128;
    let mut busy_total = 0i128;

    for r in &log.records {
        if let Some(service) = r.service {
            busy_total += service.total.as_ns() as i128;
        }
        if r.job.kind == JobKind::Rescue {
            n_rescues += 1;
            continue;
        }
        match r.outcome {
            Outcome::OnTime => n_on_time += 1,
            Outcome::Miss => n_missed += 1,
            Outcome::Drop => {
                n_dropped += 1;
                continue;
            }
        }
        served_primaries += 1;
        let service = r.service.expect("validated served record");
        let response = r.response.expect("validated served record");
        let tardiness = r.tardiness.expect("validated served record");
        responses.push(response);
        response_sum += response.as_ns() as i128;
        tardiness_sum += tardiness.as_ns() as i128;
        max_tardiness = Some(max_tardiness.map_or(tardiness, |m| m.max(tardiness)));
        compute_sum += service.compute.as_ns() as i128;
        memory_sum += service.memory.as_ns() as i128;
    }

    let mean_over_served =
        |sum: i128| (served_primaries > 0).then(|| sum as f64 / served_primaries as f64);
    let (response_p50_ns, response_p95_ns, response_p99_ns) = if responses.is_empty() {
        (None, None, None)
    } else {
        (
            Some(quantile(&responses, 0.50)?),
            Some(quantile(&responses, 0.95)?),
            Some(quantile(&responses, 0.99)?),
        )
    };
    let backlog = backlog_stats(&log.backlog_trace, log.horizon, thresholds);
    let horizon = log.horizon;
    let utilization = if horizon.as_ns() > 0 {
        busy_total as f64 / (log.config.n_servers as i128 * horizon.as_ns() as i128) as f64
    } else {
        0.0
    };
    let offchip_bytes_per_job = resolved.model.offchip_bytes_per_job();

    Ok(ServiceMetrics {
        n_jobs,
        n_rescues,
        n_on_time,
        n_missed,
        n_dropped,
        miss_rate: n_missed as f64 / n_jobs as f64,
        drop_rate: n_dropped as f64 / n_jobs as f64,
        goodput: n_on_time as f64 / n_jobs as f64,
        trigger_rate: n_rescues as f64 / n_jobs as f64,
        response_p50_ns,
        response_p95_ns,
        response_p99_ns,
        response_max_ns: responses.iter().copied().max(),
        mean_response_ns: mean_over_served(response_sum),
        mean_tardiness_ns: mean_over_served(tardiness_sum),
        max_tardiness_ns: max_tardiness,
        max_backlog: backlog.max_backlog,
        time_above_ns: backlog.time_above,
        horizon_ns: horizon,
        utilization,
        mean_compute_ns: mean_over_served(compute_sum),
        mean_memory_ns: mean_over_served(memory_sum),
        offchip_bytes_per_job,
        offchip_bytes_total: offchip_bytes_per_job.map(|b| b.saturating_mul(served_primaries)),
    })
}

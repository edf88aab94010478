//! Service-time cost models.
//!
//! Four models map a job onto a compute/memory service breakdown:
//!
//! * fixed: one constant service time;
//! * traffic: compute floor plus the time to stream off-chip state traffic,
//!   for working state that exceeds the on-chip budget;
//! * workload: affine in the job's syndrome weight, optionally capped;
//! * composite: weighted or budgeted compute, multiplicative heavy-tail
//!   jitter, combined with the traffic memory term by sum or max.
//!
//! A cutoff budget truncates the total service time and flags the hit; the
//! stored compute/memory components keep their pre-cutoff attribution.
//!
//! Off-chip traffic per iteration is the read/write amplification times the
//! excess state over the on-chip budget; total traffic scales with the
//! iteration count, and memory time is traffic over bandwidth, rounded
//! half-up to whole nanoseconds.

use alloc::format;
use alloc::string::String;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::time::{round_half_up, scale_nanos, secs_to_nanos, Nanos};
use crate::workload::Job;
use crate::{Error, Result};

// ── Traffic model ──────────────────────────────────────────────────────────

/// Parameters of the off-chip traffic service model, with the resolved state
/// footprint for the configured code and organization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficModelParams {
    pub iterations: u32,
    pub rw_amplification: f64,
    pub bandwidth_bytes_per_sec: u64,
    pub compute_floor: Nanos,
    pub sram_budget_bytes: u64,
    pub state_bytes: u64,
}

impl TrafficModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config(String::from("iterations must be > 0")));
        }
        if !(self.rw_amplification > 0.0) || !self.rw_amplification.is_finite() {
            return Err(Error::Config(format!(
                "rw_amplification must be finite and > 0 (got {})",
                self.rw_amplification
            )));
        }
        if self.bandwidth_bytes_per_sec == 0 {
            return Err(Error::Config(String::from("bandwidth must be > 0")));
        }
        if self.compute_floor.as_ns() < 0 {
            return Err(Error::Config(String::from("compute floor must be >= 0")));
        }
        Ok(())
    }
}

/// State bytes that do not fit in the on-chip budget.
pub fn excess_bytes(state_bytes: u64, sram_budget_bytes: u64) -> u64 {
    state_bytes.saturating_sub(sram_budget_bytes)
}

#[derive(Debug, Copy, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OffchipTraffic {
    pub per_iteration_bytes: u64,
    pub total_bytes: u64,
}

/// Bytes moved off-chip: amplification times excess per iteration, summed
/// over iterations. Fractional per-iteration traffic rounds half-up.
pub fn offchip_traffic(excess: u64, rw_amplification: f64, iterations: u32) -> OffchipTraffic {
    let per_iteration_bytes = round_half_up(rw_amplification * excess as f64) as u64;
    OffchipTraffic {
        per_iteration_bytes,
        total_bytes: per_iteration_bytes * iterations as u64,
    }
}

/// Time to move `total_bytes` at `bandwidth` bytes/s, rounded half-up to
/// whole nanoseconds. Exact integer arithmetic.
pub fn mem_time(total_bytes: u64, bandwidth_bytes_per_sec: u64) -> Nanos {
    let num = total_bytes as u128 * 1_000_000_000u128 + bandwidth_bytes_per_sec as u128 / 2;
    Nanos((num / bandwidth_bytes_per_sec as u128) as i64)
}

/// Compute/memory/total breakdown of one job's service time.
#[derive(Debug, Copy, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServiceBreakdown {
    pub compute: Nanos,
    pub memory: Nanos,
    pub total: Nanos,
    pub cutoff_hit: bool,
}

/// Traffic-model service: fixed compute floor plus off-chip streaming time.
/// Job-independent.
pub fn tm_service(p: &TrafficModelParams) -> ServiceBreakdown {
    let memory = tm_memory(p);
    ServiceBreakdown {
        compute: p.compute_floor,
        memory,
        total: p.compute_floor + memory,
        cutoff_hit: false,
    }
}

fn tm_memory(p: &TrafficModelParams) -> Nanos {
    let excess = excess_bytes(p.state_bytes, p.sram_budget_bytes);
    let traffic = offchip_traffic(excess, p.rw_amplification, p.iterations);
    mem_time(traffic.total_bytes, p.bandwidth_bytes_per_sec)
}

// ── Workload model ──────────────────────────────────────────────────────────

/// Affine weight-to-compute model: base + alpha * weight, capped if set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadModelParams {
    pub base: Nanos,
    /// Compute time added per unit of syndrome weight.
    pub alpha_per_unit: Nanos,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<Nanos>,
}

impl WorkloadModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.base.as_ns() < 0 || self.alpha_per_unit.as_ns() < 0 {
            return Err(Error::Config(String::from(
                "workload base and alpha must be >= 0",
            )));
        }
        if let Some(cap) = self.cap {
            if cap < self.base {
                return Err(Error::Config(String::from("cap must be >= base")));
            }
        }
        Ok(())
    }
}

/// Weight-driven compute time.
pub fn wm_compute(weight: u64, p: &WorkloadModelParams) -> Nanos {
    let raw = p.base + p.alpha_per_unit * weight as i64;
    match p.cap {
        Some(cap) => raw.min(cap),
        None => raw,
    }
}

// ── Jitter ──────────────────────────────────────────────────────────────────

#[derive(Debug, Copy, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JitterTarget {
    Compute,
    Total,
}

impl Default for JitterTarget {
    fn default() -> Self {
        JitterTarget::Compute
    }
}

/// Truncated-Pareto multiplicative jitter. Factors lie in [1, truncation].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JitterParams {
    pub shape: f64,
    pub truncation: f64,
    #[serde(default)]
    pub applies_to: JitterTarget,
}

impl JitterParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.shape > 0.0) || !self.shape.is_finite() {
            return Err(Error::Config(format!(
                "jitter shape must be finite and > 0 (got {})",
                self.shape
            )));
        }
        if !(self.truncation >= 1.0) || !self.truncation.is_finite() {
            return Err(Error::Config(format!(
                "jitter truncation must be finite and >= 1 (got {})",
                self.truncation
            )));
        }
        Ok(())
    }
}

/// Map a uniform draw u in [0, 1) onto a jitter factor:
/// min(truncation, (1 - u)^(-1/shape)).
pub fn jitter_factor(u: f64, shape: f64, truncation: f64) -> f64 {
    let factor = libm::pow(1.0 - u, -1.0 / shape);
    if factor > truncation {
        truncation
    } else {
        factor
    }
}

/// Draw one jitter factor from an RNG stream.
pub fn sample_jitter(rng: &mut impl Rng, p: &JitterParams) -> f64 {
    jitter_factor(rng.gen::<f64>(), p.shape, p.truncation)
}

// ── Composite model ─────────────────────────────────────────────────────────

/// Compute side of the composite model: weight-driven or a fixed work budget
/// consumed at a fixed rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChmCompute {
    Weighted(WorkloadModelParams),
    Budget {
        base: Nanos,
        work_units: f64,
        rate_units_per_sec: f64,
    },
}

impl ChmCompute {
    fn validate(&self) -> Result<()> {
        match self {
            ChmCompute::Weighted(p) => p.validate(),
            ChmCompute::Budget {
                base,
                work_units,
                rate_units_per_sec,
            } => {
                if base.as_ns() < 0 {
                    return Err(Error::Config(String::from("compute base must be >= 0")));
                }
                if !(*work_units >= 0.0) || !work_units.is_finite() {
                    return Err(Error::Config(String::from("work_units must be >= 0")));
                }
                if !(*rate_units_per_sec > 0.0) || !rate_units_per_sec.is_finite() {
                    return Err(Error::Config(String::from("compute rate must be > 0")));
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Copy, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombineRule {
    /// Serialized compute and memory phases.
    Sum,
    /// Fully overlapped compute and memory phases.
    Max,
}

/// Composite hardware model: compute term, traffic memory term, combine rule,
/// optional multiplicative jitter. The traffic term contributes streaming
/// time only; its compute floor is ignored here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChmParams {
    pub compute: ChmCompute,
    pub memory: TrafficModelParams,
    pub combine: CombineRule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jitter: Option<JitterParams>,
}

impl ChmParams {
    pub fn validate(&self) -> Result<()> {
        self.compute.validate()?;
        self.memory.validate()?;
        if let Some(j) = &self.jitter {
            j.validate()?;
        }
        Ok(())
    }
}

fn combine(rule: CombineRule, compute: Nanos, memory: Nanos) -> Nanos {
    match rule {
        CombineRule::Sum => compute + memory,
        CombineRule::Max => compute.max(memory),
    }
}

/// Composite service time for one job. `jitter_draw` is the pre-drawn factor
/// for this job when jitter is enabled.
pub fn chm_service(job: &Job, p: &ChmParams, jitter_draw: Option<f64>) -> ServiceBreakdown {
    let compute_raw = match &p.compute {
        ChmCompute::Weighted(wm) => wm_compute(job.weight.unwrap_or(0), wm),
        ChmCompute::Budget {
            base,
            work_units,
            rate_units_per_sec,
        } => *base + secs_to_nanos(work_units / rate_units_per_sec),
    };
    let memory = tm_memory(&p.memory);
    let target = p
        .jitter
        .as_ref()
        .map(|j| j.applies_to)
        .unwrap_or_default();
    let factor = jitter_draw.unwrap_or(1.0);
    let (compute, total) = match target {
        JitterTarget::Compute => {
            let compute = scale_nanos(compute_raw, factor);
            (compute, combine(p.combine, compute, memory))
        }
        JitterTarget::Total => (
            compute_raw,
            scale_nanos(combine(p.combine, compute_raw, memory), factor),
        ),
    };
    ServiceBreakdown {
        compute,
        memory,
        total,
        cutoff_hit: false,
    }
}

// ── Cutoff ──────────────────────────────────────────────────────────────────

/// Truncate a service time at the cutoff budget. Returns the effective time
/// and whether the budget was reached (equality counts as a hit).
pub fn apply_cutoff(total: Nanos, budget: Option<Nanos>) -> (Nanos, bool) {
    match budget {
        Some(b) if total >= b => (b, true),
        _ => (total, false),
    }
}

// ── Service model dispatch ──────────────────────────────────────────────────

/// The service model selected for a run, with all parameters resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ServiceModel {
    Fixed { service: Nanos },
    Traffic(TrafficModelParams),
    Workload(WorkloadModelParams),
    Composite(ChmParams),
}

impl ServiceModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            ServiceModel::Fixed { service } => {
                if service.as_ns() <= 0 {
                    return Err(Error::Config(String::from("fixed service must be > 0")));
                }
                Ok(())
            }
            ServiceModel::Traffic(p) => p.validate(),
            ServiceModel::Workload(p) => p.validate(),
            ServiceModel::Composite(p) => p.validate(),
        }
    }

    /// Jitter parameters, when the model has a stochastic service component.
    pub fn jitter(&self) -> Option<&JitterParams> {
        match self {
            ServiceModel::Composite(p) => p.jitter.as_ref(),
            _ => None,
        }
    }

    /// Pre-cutoff service breakdown for `job`.
    pub fn breakdown(&self, job: &Job, jitter_draw: Option<f64>) -> ServiceBreakdown {
        match self {
            ServiceModel::Fixed { service } => ServiceBreakdown {
                compute: *service,
                memory: Nanos::ZERO,
                total: *service,
                cutoff_hit: false,
            },
            ServiceModel::Traffic(p) => tm_service(p),
            ServiceModel::Workload(p) => {
                let compute = wm_compute(job.weight.unwrap_or(0), p);
                ServiceBreakdown {
                    compute,
                    memory: Nanos::ZERO,
                    total: compute,
                    cutoff_hit: false,
                }
            }
            ServiceModel::Composite(p) => chm_service(job, p, jitter_draw),
        }
    }

    /// Off-chip bytes one decode moves, when the model has a traffic term.
    pub fn offchip_bytes_per_job(&self) -> Option<u64> {
        let p = match self {
            ServiceModel::Traffic(p) => p,
            ServiceModel::Composite(c) => &c.memory,
            _ => return None,
        };
        let excess = excess_bytes(p.state_bytes, p.sram_budget_bytes);
        Some(offchip_traffic(excess, p.rw_amplification, p.iterations).total_bytes)
    }
}

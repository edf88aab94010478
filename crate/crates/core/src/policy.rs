//! Scheduling, admission, and rescue policies.
//!
//! Scheduling is non-preemptive: the policy only picks which waiting job a
//! freed server takes next. Admission compares the waiting count just before
//! an arrival against a fixed cap; jobs in service do not count. Rescue
//! spawns at most one bounded follow-up job per completed primary, bypassing
//! admission but occupying a queue slot like any other waiting job.

use alloc::string::String;

use serde::{Deserialize, Serialize};

use crate::engine::JobRecord;
use crate::time::Nanos;
use crate::workload::{Job, JobKind};
use crate::{Error, Result};

#[derive(Debug, Copy, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchedulerPolicy {
    /// Earliest deadline first; ties by (arrival, id).
    Edf,
    /// Arrival order; ties by id.
    Fifo,
}

#[derive(Debug, Copy, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AdmissionPolicy {
    Unbounded,
    Bounded { b_max: u32 },
}

#[derive(Debug, Copy, Clone, PartialEq, Eq)]
pub enum Admission {
    Admit,
    Drop,
}

/// Admission decision for an arrival seeing `queued_before` waiting jobs.
pub fn admit(queued_before: usize, policy: AdmissionPolicy) -> Admission {
    match policy {
        AdmissionPolicy::Unbounded => Admission::Admit,
        AdmissionPolicy::Bounded { b_max } => {
            if queued_before >= b_max as usize {
                Admission::Drop
            } else {
                Admission::Admit
            }
        }
    }
}

/// Pick the id of the next job to serve, or None when the queue is empty.
pub fn select_next(queue: &[Job], policy: SchedulerPolicy) -> Option<u64> {
    match policy {
        SchedulerPolicy::Edf => queue
            .iter()
            .min_by_key(|j| (j.deadline, j.arrival, j.id))
            .map(|j| j.id),
        SchedulerPolicy::Fifo => queue.iter().min_by_key(|j| (j.arrival, j.id)).map(|j| j.id),
    }
}

#[derive(Debug, Copy, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RescueTrigger {
    /// Fire when the waiting count at completion is at or above the
    /// threshold.
    Backlog { threshold: u32 },
    /// Fire when the completed job's remaining slack (deadline minus
    /// completion) is at or below the threshold.
    Slack { threshold_ns: Nanos },
    /// Fire when the completed job's service was truncated by the cutoff.
    CutoffHit,
}

#[derive(Debug, Copy, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RescueDeadlineRule {
    /// The rescue job inherits its parent's absolute deadline. A parent past
    /// its deadline yields a rescue whose deadline precedes its arrival.
    InheritParent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescuePolicy {
    pub enabled: bool,
    pub trigger: RescueTrigger,
    pub budget: Nanos,
    pub deadline_rule: RescueDeadlineRule,
}

impl Default for RescuePolicy {
    fn default() -> Self {
        RescuePolicy {
            enabled: false,
            trigger: RescueTrigger::Backlog { threshold: 2 },
            budget: Nanos::from_micros(10),
            deadline_rule: RescueDeadlineRule::InheritParent,
        }
    }
}

impl RescuePolicy {
    pub fn validate(&self) -> Result<()> {
        if self.enabled && self.budget.as_ns() <= 0 {
            return Err(Error::Config(String::from("rescue budget must be > 0")));
        }
        Ok(())
    }
}

/// The full policy selection for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySet {
    pub scheduler: SchedulerPolicy,
    pub admission: AdmissionPolicy,
    /// Service-time truncation budget.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff_ns: Option<Nanos>,
    #[serde(default)]
    pub rescue: RescuePolicy,
}

impl Default for PolicySet {
    fn default() -> Self {
        PolicySet {
            scheduler: SchedulerPolicy::Edf,
            admission: AdmissionPolicy::Unbounded,
            cutoff_ns: None,
            rescue: RescuePolicy::default(),
        }
    }
}

impl PolicySet {
    pub fn validate(&self) -> Result<()> {
        if let Some(cutoff) = self.cutoff_ns {
            if cutoff.as_ns() <= 0 {
                return Err(Error::Config(String::from("cutoff must be > 0")));
            }
        }
        self.rescue.validate()
    }
}

/// Decide whether a completion fires a rescue. `queued_now` is the waiting
/// count at the completion instant, before any rescue is queued. Completed
/// rescues never fire again.
pub fn rescue_trigger(record: &JobRecord, queued_now: usize, policy: &RescuePolicy) -> bool {
    if !policy.enabled || record.job.kind == JobKind::Rescue {
        return false;
    }
    let Some(completion) = record.completion else {
        return false;
    };
    match policy.trigger {
        RescueTrigger::Backlog { threshold } => queued_now >= threshold as usize,
        RescueTrigger::Slack { threshold_ns } => record.job.deadline - completion <= threshold_ns,
        RescueTrigger::CutoffHit => record.service.map(|s| s.cutoff_hit).unwrap_or(false),
    }
}

/// Build the rescue job for a completed primary. It arrives at the parent's
/// completion instant.
pub fn make_rescue_job(parent: &JobRecord, policy: &RescuePolicy, now: Nanos, id: u64) -> Job {
    let deadline = match policy.deadline_rule {
        RescueDeadlineRule::InheritParent => parent.job.deadline,
    };
    Job {
        id,
        kind: JobKind::Rescue,
        parent_id: Some(parent.job.id),
        arrival: now,
        deadline,
        weight: None,
    }
}

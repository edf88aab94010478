//! The serializable run configuration and its resolution into
//! simulation-ready parameters.
//!
//! A config names a code and state organization; the resolved state footprint
//! feeds the traffic-based service models, and the resolved check count feeds
//! the weight sampler. Everything a run needs is in this one struct, so an
//! archived config plus its seed reproduces the run bit for bit.
//!
//! All time-valued fields are integer nanoseconds.

use alloc::format;
use alloc::string::String;

use serde::{Deserialize, Serialize};

use crate::codes::{
    builtin, state_footprint, tanner_counts, CodeSpec, FootprintParams, StateOrganization,
    TannerCounts, BUILTIN_NAMES,
};
use crate::costmodel::{
    ChmCompute, ChmParams, CombineRule, JitterParams, ServiceModel, TrafficModelParams,
    WorkloadModelParams,
};
use crate::policy::PolicySet;
use crate::time::Nanos;
use crate::workload::{ArrivalProcess, WeightModel};
use crate::{Error, Result};

/// A code by built-in name ("bb72", "bb144", "bb288") or spelled out inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CodeRef {
    Builtin(String),
    Custom(CodeSpec),
}

impl CodeRef {
    pub fn resolve(&self) -> Result<CodeSpec> {
        match self {
            CodeRef::Builtin(name) => builtin(name).ok_or_else(|| {
                Error::Config(format!("unknown code '{name}' (builtins: {BUILTIN_NAMES:?})"))
            }),
            CodeRef::Custom(spec) => {
                spec.validate()?;
                Ok(spec.clone())
            }
        }
    }
}

/// Syndrome-weight sampling knobs. The per-round check count comes from the
/// resolved code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightConfig {
    /// Extraction rounds per window.
    #[serde(default = "default_rounds")]
    pub rounds: u32,
    /// Per-check firing probability per round.
    #[serde(default = "default_firing_prob")]
    pub firing_prob: f64,
}

fn default_rounds() -> u32 {
    10
}

fn default_firing_prob() -> f64 {
    0.01
}

impl Default for WeightConfig {
    fn default() -> Self {
        WeightConfig { rounds: default_rounds(), firing_prob: default_firing_prob() }
    }
}

/// Traffic-model section as configured: the state footprint is not a free
/// parameter, it is derived from the code and organization at resolve time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficConfig {
    pub iterations: u32,
    pub rw_amplification: f64,
    pub bandwidth_bytes_per_sec: u64,
    pub compute_floor: Nanos,
    pub sram_budget_bytes: u64,
}

impl TrafficConfig {
    fn resolve(&self, state_bytes: u64) -> TrafficModelParams {
        TrafficModelParams {
            iterations: self.iterations,
            rw_amplification: self.rw_amplification,
            bandwidth_bytes_per_sec: self.bandwidth_bytes_per_sec,
            compute_floor: self.compute_floor,
            sram_budget_bytes: self.sram_budget_bytes,
            state_bytes,
        }
    }
}

/// Composite-model section; memory is a traffic section resolved the same
/// way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeConfig {
    pub compute: ChmCompute,
    pub memory: TrafficConfig,
    pub combine: CombineRule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jitter: Option<JitterParams>,
}

/// Service model selection. Mirrors the resolved model, minus derived fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ServiceConfig {
    Fixed { service: Nanos },
    Traffic(TrafficConfig),
    Workload(WorkloadModelParams),
    Composite(CompositeConfig),
}

impl ServiceConfig {
    fn resolve(&self, state_bytes: u64) -> ServiceModel {
        match self {
            ServiceConfig::Fixed { service } => ServiceModel::Fixed { service: *service },
            ServiceConfig::Traffic(t) => ServiceModel::Traffic(t.resolve(state_bytes)),
            ServiceConfig::Workload(w) => ServiceModel::Workload(w.clone()),
            ServiceConfig::Composite(c) => ServiceModel::Composite(ChmParams {
                compute: c.compute.clone(),
                memory: c.memory.resolve(state_bytes),
                combine: c.combine,
                jitter: c.jitter.clone(),
            }),
        }
    }
}

/// Everything one run needs. Serialized verbatim into the archived config
/// snapshot; unknown fields are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_format_version")]
    pub format_version: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub n_jobs: u64,
    #[serde(default = "default_n_servers")]
    pub n_servers: u32,
    pub code: CodeRef,
    pub organization: StateOrganization,
    #[serde(default)]
    pub footprint: FootprintParams,
    pub arrivals: ArrivalProcess,
    /// Deadline slack: deadline = arrival + slack.
    pub slack_ns: Nanos,
    #[serde(default)]
    pub weights: WeightConfig,
    pub service: ServiceConfig,
    #[serde(default)]
    pub policy: PolicySet,
    /// Output directory override; never set inside archived sweep cells.
    #[serde(default)]
    pub out_dir: Option<String>,
}

pub const FORMAT_VERSION: u32 = 1;

fn default_format_version() -> u32 {
    FORMAT_VERSION
}

fn default_seed() -> u64 {
    1
}

fn default_n_servers() -> u32 {
    1
}

/// A config with code-derived quantities filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub code: CodeSpec,
    pub counts: TannerCounts,
    pub state_bytes: u64,
    pub model: ServiceModel,
    pub weight_model: WeightModel,
}

impl RunConfig {
    /// Full schema validation, including resolution of derived parameters.
    pub fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Config(format!(
                "format_version {} not supported (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        if self.n_jobs == 0 {
            return Err(Error::Config(String::from("n_jobs must be > 0")));
        }
        if self.n_servers == 0 {
            return Err(Error::Config(String::from("n_servers must be > 0")));
        }
        if self.slack_ns.as_ns() <= 0 {
            return Err(Error::Config(format!("slack must be > 0 (got {})", self.slack_ns)));
        }
        self.footprint.validate()?;
        self.arrivals.validate()?;
        self.policy.validate()?;
        self.resolve().map(|_| ())
    }

    /// Resolve the code into counts, footprint, service model, and weight
    /// model.
    pub fn resolve(&self) -> Result<Resolved> {
        let code = self.code.resolve()?;
        let counts = tanner_counts(&code);
        self.footprint.validate()?;
        let state_bytes = state_footprint(self.organization, &counts, &self.footprint);
        let weight_model = WeightModel {
            checks: counts.checks,
            rounds: self.weights.rounds,
            firing_prob: self.weights.firing_prob,
        };
        weight_model.validate()?;
        let model = self.service.resolve(state_bytes);
        model.validate()?;
        Ok(Resolved { code, counts, state_bytes, model, weight_model })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::SchedulerPolicy;

    fn base_config() -> RunConfig {
        RunConfig {
            format_version: FORMAT_VERSION,
            seed: 1,
            n_jobs: 100,
            n_servers: 1,
            code: CodeRef::Builtin(String::from("bb72")),
            organization: StateOrganization::EdgeCentric,
            footprint: FootprintParams::default(),
            arrivals: ArrivalProcess::Poisson { rate_per_sec: 10_000.0 },
            slack_ns: Nanos::from_micros(50),
            weights: WeightConfig::default(),
            service: ServiceConfig::Fixed { service: Nanos::from_micros(20) },
            policy: PolicySet::default(),
            out_dir: None,
        }
    }

    #[test]
    fn resolves_builtin_code_and_footprint() {
        let resolved = base_config().resolve().unwrap();
        assert_eq!(resolved.counts.checks, 72);
        assert_eq!(resolved.counts.edges, 432);
        assert_eq!(resolved.state_bytes, 1728);
        assert_eq!(resolved.weight_model.checks, 72);
        assert_eq!(resolved.weight_model.trials(), 720);

        let cached = RunConfig {
            organization: StateOrganization::CachedSummary,
            ..base_config()
        };
        assert_eq!(cached.resolve().unwrap().state_bytes, 320);
    }

    #[test]
    fn traffic_section_gets_derived_state_bytes() {
        let cfg = RunConfig {
            service: ServiceConfig::Traffic(TrafficConfig {
                iterations: 10,
                rw_amplification: 2.0,
                bandwidth_bytes_per_sec: 64_000_000_000,
                compute_floor: Nanos(500),
                sram_budget_bytes: 1024,
            }),
            ..base_config()
        };
        let resolved = cfg.resolve().unwrap();
        match &resolved.model {
            ServiceModel::Traffic(p) => {
                assert_eq!(p.state_bytes, 1728);
                assert_eq!(p.sram_budget_bytes, 1024);
            }
            other => panic!("wrong model: {other:?}"),
        }
        assert_eq!(resolved.model.offchip_bytes_per_job(), Some(14_080));
    }

    #[test]
    fn unknown_builtin_rejected() {
        let cfg = RunConfig { code: CodeRef::Builtin(String::from("bb9000")), ..base_config() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn custom_code_accepted() {
        let cfg = RunConfig {
            code: CodeRef::Custom(CodeSpec::bb(144, 12)),
            ..base_config()
        };
        assert_eq!(cfg.resolve().unwrap().state_bytes, 3456);
    }

    #[test]
    fn validation_rejects_degenerate_fields() {
        assert!(RunConfig { n_jobs: 0, ..base_config() }.validate().is_err());
        assert!(RunConfig { n_servers: 0, ..base_config() }.validate().is_err());
        assert!(RunConfig { slack_ns: Nanos::ZERO, ..base_config() }.validate().is_err());
        assert!(RunConfig { format_version: 2, ..base_config() }.validate().is_err());
        assert!(base_config().validate().is_ok());
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let cfg = RunConfig {
            policy: PolicySet {
                scheduler: SchedulerPolicy::Fifo,
                cutoff_ns: Some(Nanos::from_micros(100)),
                ..PolicySet::default()
            },
            ..base_config()
        };
        let json = serde_json::to_string_pretty(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn minimal_json_fills_defaults() {
        let json = r#"{
            "n_jobs": 10,
            "code": "bb144",
            "organization": "cached_summary",
            "arrivals": {"type": "poisson", "rate_per_sec": 5000.0},
            "slack_ns": 100000,
            "service": {"model": "fixed", "service": 20000}
        }"#;
        let cfg: RunConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg.format_version, 1);
        assert_eq!(cfg.seed, 1);
        assert_eq!(cfg.n_servers, 1);
        assert_eq!(cfg.weights, WeightConfig { rounds: 10, firing_prob: 0.01 });
        assert_eq!(cfg.footprint, FootprintParams::default());
        assert_eq!(cfg.policy, PolicySet::default());
        assert_eq!(cfg.code.resolve().unwrap().n_data, 144);
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_top_level_field_rejected() {
        let json = r#"{
            "n_jobs": 10,
            "code": "bb72",
            "organization": "edge_centric",
            "arrivals": {"type": "poisson", "rate_per_sec": 5000.0},
            "slack_ns": 100000,
            "service": {"model": "fixed", "service": 20000},
            "llack_ns": 1
        }"#;
        assert!(serde_json::from_str::<RunConfig>(json).is_err());
    }

    #[test]
    fn composite_config_resolves_memory_section() {
        let cfg = RunConfig {
            code: CodeRef::Builtin(String::from("bb72")),
            service: ServiceConfig::Composite(CompositeConfig {
                compute: ChmCompute::Weighted(WorkloadModelParams {
                    base: Nanos::from_micros(10),
                    alpha_per_unit: Nanos::from_micros(1),
                    cap: None,
                }),
                memory: TrafficConfig {
                    iterations: 10,
                    rw_amplification: 2.0,
                    bandwidth_bytes_per_sec: 64_000_000_000,
                    compute_floor: Nanos(500),
                    sram_budget_bytes: 2048,
                },
                combine: CombineRule::Max,
                jitter: Some(JitterParams {
                    shape: 2.0,
                    truncation: 50.0,
                    applies_to: Default::default(),
                }),
            }),
            ..base_config()
        };
        let resolved = cfg.resolve().unwrap();
        match &resolved.model {
            ServiceModel::Composite(p) => {
                assert_eq!(p.memory.state_bytes, 1728);
                // Resident state: no off-chip traffic.
                assert_eq!(resolved.model.offchip_bytes_per_job(), Some(0));
            }
            other => panic!("wrong model: {other:?}"),
        }
    }
}

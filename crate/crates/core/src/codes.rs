//! Code descriptions and decoder-state footprints.
//!
//! A code is summarized by the counts that drive decoder state sizing: data
//! variables, check nodes on the X and Z graphs, and a uniform check degree
//! (row weight). Two state organizations are modeled. Edge-centric decoding
//! keeps two directed messages per Tanner edge; cached-summary decoding keeps
//! one running summary per check plus one belief per variable. Footprints are
//! rounded up to the storage alignment.

use alloc::format;
use alloc::string::String;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Structural counts of a CSS-style code, as used for state sizing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSpec {
    pub name: String,
    pub n_data: u32,
    pub checks_x: u32,
    pub checks_z: u32,
    /// Uniform check degree on both graphs.
    pub row_weight: u32,
    /// Logical qubit count; metadata only, never used in sizing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_logical: Option<u32>,
}

impl CodeSpec {
    pub fn new(
        name: &str,
        n_data: u32,
        checks_x: u32,
        checks_z: u32,
        row_weight: u32,
        k_logical: Option<u32>,
    ) -> Result<Self> {
        let spec = CodeSpec {
            name: String::from(name),
            n_data,
            checks_x,
            checks_z,
            row_weight,
            k_logical,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Counts must describe a nonempty graph: data variables, a positive row
    /// weight, and at least one check across the two graphs (a single-graph
    /// code with zero checks on the other side is fine).
    pub fn validate(&self) -> Result<()> {
        if self.n_data == 0 {
            return Err(Error::Config(format!("code {}: n_data must be > 0", self.name)));
        }
        if self.row_weight == 0 {
            return Err(Error::Config(format!(
                "code {}: row_weight must be > 0",
                self.name
            )));
        }
        if self.checks_x == 0 && self.checks_z == 0 {
            return Err(Error::Config(format!(
                "code {}: at least one check node required",
                self.name
            )));
        }
        Ok(())
    }

    /// Bivariate-bicycle family member with n data qubits: n/2 checks per
    /// graph, weight-6 rows.
    pub fn bb(n_data: u32, k_logical: u32) -> Self {
        CodeSpec {
            name: format!("bb{n_data}"),
            n_data,
            checks_x: n_data / 2,
            checks_z: n_data / 2,
            row_weight: 6,
            k_logical: Some(k_logical),
        }
    }
}

/// Look up a built-in code by registry key.
pub fn builtin(name: &str) -> Option<CodeSpec> {
    match name {
        "bb72" => Some(CodeSpec::bb(72, 12)),
        "bb144" => Some(CodeSpec::bb(144, 12)),
        "bb288" => Some(CodeSpec::bb(288, 12)),
        _ => None,
    }
}

pub const BUILTIN_NAMES: [&str; 3] = ["bb72", "bb144", "bb288"];

/// Aggregate node and edge counts over both graphs.
#[derive(Debug, Copy, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TannerCounts {
    pub variables: u64,
    pub checks: u64,
    pub edges: u64,
}

/// Count variables, checks, and edges of the combined X/Z Tanner graph.
pub fn tanner_counts(code: &CodeSpec) -> TannerCounts {
    let variables = code.n_data as u64;
    let checks = code.checks_x as u64 + code.checks_z as u64;
    TannerCounts {
        variables,
        checks,
        edges: checks * code.row_weight as u64,
    }
}

/// How working state is laid out during decoding.
#[derive(Debug, Copy, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateOrganization {
    /// Two directed messages per Tanner edge.
    EdgeCentric,
    /// One summary per check plus one belief per variable.
    CachedSummary,
}

/// Value quantization and storage alignment for footprint sizing.
#[derive(Debug, Copy, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FootprintParams {
    pub value_bits: u32,
    pub alignment_bytes: u64,
}

impl Default for FootprintParams {
    fn default() -> Self {
        FootprintParams {
            value_bits: 16,
            alignment_bytes: 64,
        }
    }
}

impl FootprintParams {
    pub fn validate(&self) -> Result<()> {
        if !matches!(self.value_bits, 8 | 16 | 32) {
            return Err(Error::Config(format!(
                "value_bits must be 8, 16, or 32 (got {})",
                self.value_bits
            )));
        }
        if self.alignment_bytes == 0 || !self.alignment_bytes.is_power_of_two() {
            return Err(Error::Config(format!(
                "alignment_bytes must be a power of two (got {})",
                self.alignment_bytes
            )));
        }
        Ok(())
    }
}

fn align_up(bytes: u64, alignment: u64) -> u64 {
    bytes.div_ceil(alignment) * alignment
}

/// Working-state size in bytes for one decode, aligned upward.
pub fn state_footprint(
    org: StateOrganization,
    counts: &TannerCounts,
    params: &FootprintParams,
) -> u64 {
    let bytes_per_value = params.value_bits as u64 / 8;
    let raw = match org {
        StateOrganization::EdgeCentric => 2 * counts.edges * bytes_per_value,
        StateOrganization::CachedSummary => (counts.variables + counts.checks) * bytes_per_value,
    };
    align_up(raw, params.alignment_bytes)
}

/// Smallest budget on the grid at which the state fits entirely on-chip.
#[derive(Debug, Copy, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitBoundary {
    Within(u64),
    /// The state exceeds every budget on the grid.
    BeyondGrid,
}

impl FitBoundary {
    pub fn within(self) -> Option<u64> {
        match self {
            FitBoundary::Within(b) => Some(b),
            FitBoundary::BeyondGrid => None,
        }
    }
}

/// Find the smallest grid budget that holds `state_bytes`. The grid must be
/// nonempty and strictly increasing.
pub fn fit_boundary(state_bytes: u64, grid: &[u64]) -> Result<FitBoundary> {
    if grid.is_empty() {
        return Err(Error::Config(String::from("budget grid is empty")));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(String::from(
            "budget grid must be strictly increasing",
        )));
    }
    Ok(grid
        .iter()
        .copied()
        .find(|&b| b >= state_bytes)
        .map_or(FitBoundary::BeyondGrid, FitBoundary::Within))
}

#[cfg(test)]
mod tests {
    use super::*;

    const GRID: [u64; 7] = [128, 256, 512, 1024, 2048, 4096, 8192];

    #[test]
    fn builtin_counts() {
        // n/2 checks per graph, weight-6 rows: bb72 has 36+36 checks and
        // 72*6 = 432 edges.
        let cases = [
            ("bb72", 72, 72, 432),
            ("bb144", 144, 144, 864),
            ("bb288", 288, 288, 1728),
        ];
        for (name, v, c, e) in cases {
            let counts = tanner_counts(&builtin(name).unwrap());
            assert_eq!(counts.variables, v, "{name}");
            assert_eq!(counts.checks, c, "{name}");
            assert_eq!(counts.edges, e, "{name}");
        }
        assert!(builtin("bb73").is_none());
    }

    #[test]
    fn toy_single_graph_code() {
        let toy = CodeSpec::new("toy", 1, 1, 0, 1, None).unwrap();
        let counts = tanner_counts(&toy);
        assert_eq!(counts, TannerCounts { variables: 1, checks: 1, edges: 1 });
    }

    #[test]
    fn rejects_degenerate_codes() {
        assert!(CodeSpec::new("z", 0, 1, 1, 6, None).is_err());
        assert!(CodeSpec::new("z", 4, 0, 0, 6, None).is_err());
        assert!(CodeSpec::new("z", 4, 2, 2, 0, None).is_err());
    }

    #[test]
    fn footprints_at_16bit_64byte() {
        let p = FootprintParams::default();
        let c72 = tanner_counts(&builtin("bb72").unwrap());
        // 2 * 432 edges * 2 B = 1728 B, already 64 B aligned.
        assert_eq!(state_footprint(StateOrganization::EdgeCentric, &c72, &p), 1728);
        // (72 + 72) * 2 B = 288 B, aligned up to 320 B.
        assert_eq!(state_footprint(StateOrganization::CachedSummary, &c72, &p), 320);
    }

    #[test]
    fn alignment_rounds_up() {
        let counts = TannerCounts { variables: 1, checks: 1, edges: 1 };
        let p = FootprintParams { value_bits: 8, alignment_bytes: 64 };
        assert_eq!(state_footprint(StateOrganization::EdgeCentric, &counts, &p), 64);
        assert_eq!(state_footprint(StateOrganization::CachedSummary, &counts, &p), 64);
    }

    #[test]
    fn fit_boundaries_of_builtins() {
        let p = FootprintParams::default();
        let expect = [
            ("bb72", 2048, 512),
            ("bb144", 4096, 1024),
            ("bb288", 8192, 2048),
        ];
        for (name, edge_boundary, cached_boundary) in expect {
            let counts = tanner_counts(&builtin(name).unwrap());
            let edge = state_footprint(StateOrganization::EdgeCentric, &counts, &p);
            let cached = state_footprint(StateOrganization::CachedSummary, &counts, &p);
            assert_eq!(
                fit_boundary(edge, &GRID).unwrap(),
                FitBoundary::Within(edge_boundary),
                "{name} edge-centric"
            );
            assert_eq!(
                fit_boundary(cached, &GRID).unwrap(),
                FitBoundary::Within(cached_boundary),
                "{name} cached-summary"
            );
        }
    }

    #[test]
    fn fit_boundary_edge_cases() {
        assert_eq!(fit_boundary(128, &GRID).unwrap(), FitBoundary::Within(128));
        assert_eq!(fit_boundary(8193, &GRID).unwrap(), FitBoundary::BeyondGrid);
        assert_eq!(fit_boundary(0, &GRID).unwrap(), FitBoundary::Within(128));
        assert!(fit_boundary(1, &[]).is_err());
        assert!(fit_boundary(1, &[128, 128]).is_err());
        assert!(fit_boundary(1, &[256, 128]).is_err());
    }

    #[test]
    fn footprint_params_validation() {
        assert!(FootprintParams { value_bits: 12, alignment_bytes: 64 }.validate().is_err());
        assert!(FootprintParams { value_bits: 16, alignment_bytes: 48 }.validate().is_err());
        assert!(FootprintParams { value_bits: 16, alignment_bytes: 0 }.validate().is_err());
        assert!(FootprintParams::default().validate().is_ok());
    }
}

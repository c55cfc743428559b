//! Closed-form space bounds: the block-granular lower bound, the single
//! wide TCAM baseline, the savings ceiling, and the lean-level tiling check.
//! Everything here is integer or exact rational arithmetic.

use num_rational::Ratio;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numfmt::{fmt_decimal, Rational};
use crate::tiler::{ceil_log2, GrainSpec};
use crate::trie::LeanLevelTable;

/// `ceil(N / D) * D * W`: no arrangement of `N` entries in whole blocks
/// uses fewer bits.
pub fn lower_bound_bits(n: u64, grain: GrainSpec) -> u64 {
    n.div_ceil(grain.depth as u64) * grain.block_bits()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Baseline {
    pub blocks: u64,
    pub bits: u64,
}

/// One logical TCAM holding all `n` entries at `width_needed` bits:
/// `ceil(N / D)` rows of `ceil(width / W)` stitched blocks.
pub fn single_tcam_baseline(n: u64, width_needed: usize, grain: GrainSpec) -> Baseline {
    let blocks = n.div_ceil(grain.depth as u64) * width_needed.div_ceil(grain.width) as u64;
    Baseline {
        blocks,
        bits: blocks * grain.block_bits(),
    }
}

/// `ceil(M / W)`, never below 1.
pub fn max_savings_factor(m: usize, w: usize) -> u64 {
    m.div_ceil(w).max(1) as u64
}

fn decimal6<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_decimal(*r, 6))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TilingCondition {
    /// First-stride length tested as the lean level.
    pub level: usize,
    /// Non-leaf nodes at `level` as a percentage of `N`.
    #[serde(serialize_with = "decimal6")]
    pub b: Rational,
    /// `M - level + ceil(log2 D)`; negative when the level is past `M`.
    pub lhs: i64,
    pub width: usize,
    pub feasible: bool,
    /// `2b / 100`.
    #[serde(serialize_with = "decimal6")]
    pub epsilon_bound: Rational,
}

/// Checks `M - L(b) + ceil(log2 D) < W` for an explicit `b`.
pub fn tiling_condition_for(m: usize, level: usize, b: Rational, grain: GrainSpec) -> TilingCondition {
    let lhs = m as i64 - level as i64 + ceil_log2(grain.depth as u64) as i64;
    TilingCondition {
        level,
        b,
        lhs,
        width: grain.width,
        feasible: lhs < grain.width as i64,
        epsilon_bound: b * Ratio::from_integer(2) / Ratio::from_integer(100),
    }
}

/// Tiling check at `level` with `b` read from the lean-level table.
pub fn tiling_condition(m: usize, lean: &LeanLevelTable, grain: GrainSpec, level: usize) -> Result<TilingCondition> {
    let l = lean.level(level).ok_or(Error::LevelOutOfRange {
        level,
        max: lean.max_depth(),
    })?;
    Ok(tiling_condition_for(m, level, l.b, grain))
}

/// `baseline_bits / plan_bits <= ceil(width / W)`, compared as integers.
pub fn savings_within_bound(baseline_bits: u64, plan_bits: u64, width: usize, grain: GrainSpec) -> bool {
    baseline_bits as u128 <= max_savings_factor(width, grain.width) as u128 * plan_bits as u128
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundsReport {
    pub n: u64,
    /// Shortest length covering the configured fraction of prefixes.
    pub m: usize,
    /// Longest prefix length.
    pub max: usize,
    pub w: usize,
    pub d: usize,
    pub lower_bound_bits: u64,
    /// Width of the single-TCAM baseline (the stride coverage).
    pub baseline_width: usize,
    pub baseline_blocks: u64,
    pub baseline_bits: u64,
    /// `ceil(M / W)`.
    pub max_savings_factor: u64,
    /// `ceil(baseline_width / W)`.
    pub max_savings_factor_vs_baseline: u64,
    pub tiling_condition: Option<TilingCondition>,
}

impl BoundsReport {
    pub fn new(
        n: u64,
        m: usize,
        max: usize,
        baseline_width: usize,
        grain: GrainSpec,
        tiling_condition: Option<TilingCondition>,
    ) -> Self {
        let baseline = single_tcam_baseline(n, baseline_width, grain);
        BoundsReport {
            n,
            m,
            max,
            w: grain.width,
            d: grain.depth,
            lower_bound_bits: lower_bound_bits(n, grain),
            baseline_width,
            baseline_blocks: baseline.blocks,
            baseline_bits: baseline.bits,
            max_savings_factor: max_savings_factor(m, grain.width),
            max_savings_factor_vs_baseline: max_savings_factor(baseline_width, grain.width),
            tiling_condition,
        }
    }
}

use itertools::Itertools;
use serde::Serialize;

use super::{GrainSpec, StrideList};
use crate::error::{Error, Result};
use crate::trie::LeanLevelTable;

/// Which pointer count weights the last segment's overhead term.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FinalSegment {
    /// Pointers leaving the coverage length `L` (non-leaf nodes at depth `L`).
    #[default]
    TerminalLevel,
    /// Pointers at the last chosen cut, charged a second time.
    LastChosenLevel,
}

impl FinalSegment {
    pub fn describe(self) -> &'static str {
        match self {
            FinalSegment::TerminalLevel => "final segment weighted by non-leaf count at the coverage length",
            FinalSegment::LastChosenLevel => "final segment weighted by non-leaf count at the last chosen cut",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StrideSearchConfig {
    /// Tree height (number of strides).
    pub height: usize,
    /// Coverage length the strides must add up to.
    pub coverage: usize,
    /// Accept combinations whose overhead is strictly below this.
    pub budget: u64,
    pub grain: GrainSpec,
    pub tag_bits: usize,
    pub final_segment: FinalSegment,
}

impl StrideSearchConfig {
    pub fn new(height: usize, coverage: usize, budget: u64, grain: GrainSpec) -> Self {
        StrideSearchConfig {
            height,
            coverage,
            budget,
            grain,
            tag_bits: grain.default_tag_bits(),
            final_segment: FinalSegment::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StrideCandidate {
    pub strides: StrideList,
    pub overhead: u64,
}

/// Scores one set of interior cut levels.
pub fn stride_overhead(cuts: &[usize], cfg: &StrideSearchConfig, lean: &LeanLevelTable) -> u64 {
    let w = cfg.grain.width;
    let tag = cfg.tag_bits;
    let mut overhead = 0u64;
    let mut prev = 0usize;
    for &lvl in cuts {
        let words = (lvl + tag - prev).div_ceil(w) as u64;
        overhead += (words + 1) * lean.nonleaf_count(lvl);
        prev = lvl;
    }
    let weight_level = match cfg.final_segment {
        FinalSegment::TerminalLevel => cfg.coverage,
        FinalSegment::LastChosenLevel => prev,
    };
    let words = (cfg.coverage + tag - prev).div_ceil(w) as u64;
    overhead + (words + 1) * lean.nonleaf_count(weight_level)
}

/// Enumerates every choice of `height - 1` cut levels in `1..coverage` and
/// returns those with overhead under the budget, cheapest first.
pub fn choose_strides(cfg: &StrideSearchConfig, lean: &LeanLevelTable) -> Result<Vec<StrideCandidate>> {
    if cfg.height < 2 {
        return Err(Error::InvalidConfig("stride search needs a height of at least 2".into()));
    }
    if cfg.height > cfg.coverage {
        return Err(Error::InvalidConfig(format!(
            "cannot cut {} bits into {} strides",
            cfg.coverage, cfg.height
        )));
    }
    if cfg.coverage > lean.max_depth() {
        return Err(Error::LevelOutOfRange {
            level: cfg.coverage,
            max: lean.max_depth(),
        });
    }
    if cfg.budget == 0 {
        return Err(Error::BudgetZero);
    }
    let mut out = Vec::new();
    for cuts in (1..cfg.coverage).combinations(cfg.height - 1) {
        let overhead = stride_overhead(&cuts, cfg, lean);
        if overhead < cfg.budget {
            out.push(StrideCandidate {
                strides: StrideList::from_cuts(&cuts, cfg.coverage)?,
                overhead,
            });
        }
    }
    out.sort_by(|a, b| a.overhead.cmp(&b.overhead).then_with(|| a.strides.cmp(&b.strides)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prefixdb::parse_database;
    use crate::trie::{build_unibit_trie, compute_lean_levels};

    fn lean() -> LeanLevelTable {
        let db = parse_database("1/1 A\n1000/4 B\n10001/5 C\n10010/5 D\n100110/6 E\n100111/6 F\n", 6).unwrap();
        compute_lean_levels(&build_unibit_trie(&db), db.len()).unwrap()
    }

    fn cfg(budget: u64) -> StrideSearchConfig {
        StrideSearchConfig::new(2, 6, budget, GrainSpec::default())
    }

    #[test]
    fn split_at_three_scores_two() {
        // (ceil((3 + 9 - 0) / 44) + 1) * LL[3] = 2, plus (ceil((6 + 9 - 3) / 44) + 1) * LL[6] = 0
        assert_eq!(stride_overhead(&[3], &cfg(10), &lean()), 2);
        let got = choose_strides(&cfg(10), &lean()).unwrap();
        let three = got.iter().find(|c| c.strides.to_string() == "3-3").unwrap();
        assert_eq!(three.overhead, 2);
    }

    #[test]
    fn last_chosen_level_charges_the_cut_twice() {
        let mut c = cfg(10);
        c.final_segment = FinalSegment::LastChosenLevel;
        assert_eq!(stride_overhead(&[3], &c, &lean()), 4);
    }

    #[test]
    fn tight_budget_rejects_everything() {
        // every cut in 1..6 has LL >= 1, so every score is >= 2
        assert!(choose_strides(&cfg(1), &lean()).unwrap().is_empty());
        assert_eq!(choose_strides(&cfg(0), &lean()), Err(Error::BudgetZero));
    }

    #[test]
    fn deepest_level_contributes_nothing() {
        let l = lean();
        assert_eq!(l.nonleaf_count(6), 0);
        // a cut at 5 charges LL[5] = 1 once; the final segment weights LL[6] = 0
        assert_eq!(stride_overhead(&[5], &cfg(10), &l), 2);
    }

    #[test]
    fn results_sorted_and_complete() {
        let got = choose_strides(&cfg(100), &lean()).unwrap();
        assert_eq!(got.len(), 5);
        assert!(got.windows(2).all(|w| w[0].overhead <= w[1].overhead));
        // LL[4] = 2 makes 4-2 the most expensive two-level split
        assert_eq!(got.last().unwrap().strides.to_string(), "4-2");
        assert_eq!(got.last().unwrap().overhead, 4);
    }

    #[test]
    fn bad_heights() {
        let mut c = cfg(10);
        c.height = 1;
        assert!(choose_strides(&c, &lean()).is_err());
        c.height = 7;
        assert!(choose_strides(&c, &lean()).is_err());
    }
}

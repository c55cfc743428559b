//! Placement of super-tables and SRAM pages onto a staged pipeline, and the
//! overflow buffer that absorbs entries the placed structure cannot take.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize, Serializer};

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::packing::SuperTableId;
use crate::prefixdb::{NextHop, Prefix};

/// Per-stage resources of a pipeline. The default is a synthetic 16-stage
/// profile totalling 384 TCAM blocks and 1280 SRAM pages.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineProfile {
    pub name: String,
    pub stage_count: usize,
    pub tcam_blocks_per_stage: u64,
    pub sram_pages_per_stage: u64,
    /// Per-stage figures are invented rather than taken from a datasheet.
    #[serde(default)]
    pub synthetic: bool,
}

impl Default for PipelineProfile {
    fn default() -> Self {
        PipelineProfile {
            name: "synthetic-16x24x80".into(),
            stage_count: 16,
            tcam_blocks_per_stage: 24,
            sram_pages_per_stage: 80,
            synthetic: true,
        }
    }
}

impl PipelineProfile {
    pub fn new(stage_count: usize, tcam_blocks_per_stage: u64, sram_pages_per_stage: u64) -> Self {
        PipelineProfile {
            name: format!("custom-{stage_count}x{tcam_blocks_per_stage}x{sram_pages_per_stage}"),
            stage_count,
            tcam_blocks_per_stage,
            sram_pages_per_stage,
            synthetic: true,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let p: PipelineProfile =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(format!("pipeline profile: {e}")))?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("reading profile {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.stage_count == 0 {
            return Err(Error::InvalidConfig("pipeline needs at least one stage".into()));
        }
        Ok(())
    }

    pub fn total_tcam_blocks(&self) -> u64 {
        self.tcam_blocks_per_stage * self.stage_count as u64
    }

    pub fn total_sram_pages(&self) -> u64 {
        self.sram_pages_per_stage * self.stage_count as u64
    }
}

/// Something that occupies pipeline resources: a super-table's blocks or
/// one level's pooled SRAM pages.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Unit {
    Tcam(SuperTableId),
    Sram(usize),
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Unit::Tcam(id) => write!(f, "st{}", id.0),
            Unit::Sram(level) => write!(f, "sram-l{level}"),
        }
    }
}

impl Serialize for Unit {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// `count` consecutive blocks (or pages) starting at `first` in `stage`.
/// Stages are numbered from 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Span {
    pub stage: usize,
    pub first: u64,
    pub count: u64,
}

/// Resources one tree level asks for.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LevelDemand {
    pub level: usize,
    /// Super-tables in placement order with their block counts.
    pub tcam: Vec<(SuperTableId, u64)>,
    pub sram_pages: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Resource {
    Tcam,
    Sram,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelinePlan {
    pub profile: PipelineProfile,
    tcam_used: Vec<u64>,
    sram_used: Vec<u64>,
    placements: BTreeMap<Unit, Vec<Span>>,
    unit_level: BTreeMap<Unit, usize>,
    edges: BTreeSet<(Unit, Unit)>,
}

/// Places level after level. A level starts one stage past the last stage
/// any shallower level used; within a level, super-tables fill stages in
/// order and spill into the next stage, and the level's SRAM pages do the
/// same on their own cursor.
pub fn map_to_pipeline(
    demands: &[LevelDemand],
    edges: impl IntoIterator<Item = (Unit, Unit)>,
    profile: &PipelineProfile,
) -> Result<PipelinePlan> {
    profile.validate()?;
    let blocks: u64 = demands.iter().flat_map(|d| d.tcam.iter().map(|t| t.1)).sum();
    let pages: u64 = demands.iter().map(|d| d.sram_pages).sum();
    let blocks_short = blocks.saturating_sub(profile.total_tcam_blocks());
    let pages_short = pages.saturating_sub(profile.total_sram_pages());
    if blocks_short > 0 || pages_short > 0 {
        return Err(Error::CapacityExceeded {
            blocks_short,
            pages_short,
        });
    }
    let mut plan = PipelinePlan {
        profile: profile.clone(),
        tcam_used: Vec::new(),
        sram_used: Vec::new(),
        placements: BTreeMap::new(),
        unit_level: BTreeMap::new(),
        edges: edges.into_iter().collect(),
    };
    let mut sorted: Vec<&LevelDemand> = demands.iter().collect();
    sorted.sort_by_key(|d| d.level);
    let mut start = 0;
    for d in sorted {
        let mut last = None;
        let mut cursor = start;
        for &(id, n) in &d.tcam {
            let unit = Unit::Tcam(id);
            plan.unit_level.insert(unit, d.level);
            let spans = plan.fill(Resource::Tcam, cursor, usize::MAX, n).expect("unbounded band");
            if let Some(s) = spans.last() {
                cursor = s.stage;
                last = last.max(Some(s.stage));
            }
            plan.commit(unit, Resource::Tcam, spans);
        }
        if d.sram_pages > 0 {
            let unit = Unit::Sram(d.level);
            plan.unit_level.insert(unit, d.level);
            let spans = plan.fill(Resource::Sram, start, usize::MAX, d.sram_pages).expect("unbounded band");
            last = last.max(spans.last().map(|s| s.stage));
            plan.commit(unit, Resource::Sram, spans);
        }
        if let Some(l) = last {
            start = l + 1;
        }
    }
    let needed = plan.tcam_used.len().max(plan.sram_used.len());
    if needed > profile.stage_count {
        return Err(Error::StageDepthExceeded {
            needed,
            available: profile.stage_count,
        });
    }
    plan.tcam_used.resize(profile.stage_count, 0);
    plan.sram_used.resize(profile.stage_count, 0);
    Ok(plan)
}

impl PipelinePlan {
    fn capacity(&self, r: Resource) -> u64 {
        match r {
            Resource::Tcam => self.profile.tcam_blocks_per_stage,
            Resource::Sram => self.profile.sram_pages_per_stage,
        }
    }

    fn used(&self, r: Resource) -> &Vec<u64> {
        match r {
            Resource::Tcam => &self.tcam_used,
            Resource::Sram => &self.sram_used,
        }
    }

    /// Spans for `n` units first-fit over stages `lo..=hi`, or the shortfall.
    fn fill(&self, r: Resource, lo: usize, hi: usize, n: u64) -> std::result::Result<Vec<Span>, u64> {
        let cap = self.capacity(r);
        let used = self.used(r);
        let mut spans = Vec::new();
        let mut left = n;
        let mut stage = lo;
        while left > 0 && stage <= hi {
            let u = used.get(stage).copied().unwrap_or(0);
            let take = cap.saturating_sub(u).min(left);
            if take > 0 {
                spans.push(Span {
                    stage,
                    first: u,
                    count: take,
                });
                left -= take;
            }
            if cap == 0 && hi == usize::MAX {
                return Err(left);
            }
            stage += 1;
        }
        if left > 0 {
            Err(left)
        } else {
            Ok(spans)
        }
    }

    fn commit(&mut self, unit: Unit, r: Resource, spans: Vec<Span>) {
        let used = match r {
            Resource::Tcam => &mut self.tcam_used,
            Resource::Sram => &mut self.sram_used,
        };
        for s in &spans {
            if used.len() <= s.stage {
                used.resize(s.stage + 1, 0);
            }
            used[s.stage] += s.count;
        }
        self.placements.entry(unit).or_default().extend(spans);
    }

    pub fn placements(&self) -> &BTreeMap<Unit, Vec<Span>> {
        &self.placements
    }

    pub fn spans(&self, unit: Unit) -> &[Span] {
        self.placements.get(&unit).map_or(&[], Vec::as_slice)
    }

    pub fn edges(&self) -> &BTreeSet<(Unit, Unit)> {
        &self.edges
    }

    pub fn add_edge(&mut self, parent: Unit, child: Unit) {
        self.edges.insert((parent, child));
    }

    pub fn tcam_used(&self) -> &[u64] {
        &self.tcam_used
    }

    pub fn sram_used(&self) -> &[u64] {
        &self.sram_used
    }

    pub fn stages_used(&self) -> usize {
        self.placements
            .values()
            .flatten()
            .map(|s| s.stage + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn stage_range(&self, unit: Unit) -> Option<(usize, usize)> {
        let spans = self.spans(unit);
        let lo = spans.iter().map(|s| s.stage).min()?;
        let hi = spans.iter().map(|s| s.stage).max()?;
        Some((lo, hi))
    }

    /// Stages a level may use without breaking the ordering against the
    /// levels around it.
    pub fn band(&self, level: usize) -> Option<(usize, usize)> {
        let mut lo = 0;
        let mut hi = self.profile.stage_count - 1;
        for (unit, &l) in &self.unit_level {
            let Some((a, b)) = self.stage_range(*unit) else { continue };
            if l < level {
                lo = lo.max(b + 1);
            } else if l > level {
                if a == 0 {
                    return None;
                }
                hi = hi.min(a - 1);
            }
        }
        (lo <= hi).then_some((lo, hi))
    }

    /// Allocates `n` more blocks (or pages) for `unit` inside its level's
    /// band. Nothing changes on failure.
    pub fn grow(&mut self, unit: Unit, level: usize, n: u64) -> Result<()> {
        if n == 0 {
            return Ok(());
        }
        let r = match unit {
            Unit::Tcam(_) => Resource::Tcam,
            Unit::Sram(_) => Resource::Sram,
        };
        let short = |left| match r {
            Resource::Tcam => Error::CapacityExceeded {
                blocks_short: left,
                pages_short: 0,
            },
            Resource::Sram => Error::CapacityExceeded {
                blocks_short: 0,
                pages_short: left,
            },
        };
        let (lo, hi) = self.band(level).ok_or_else(|| short(n))?;
        let spans = self.fill(r, lo, hi, n).map_err(short)?;
        self.unit_level.insert(unit, level);
        self.commit(unit, r, spans);
        Ok(())
    }

    /// Edges whose child does not start strictly after its parent ends.
    pub fn dependency_violations(&self) -> Vec<(Unit, Unit)> {
        self.edges
            .iter()
            .copied()
            .filter(|&(a, b)| match (self.stage_range(a), self.stage_range(b)) {
                (Some((_, a_hi)), Some((b_lo, _))) => a_hi >= b_lo,
                _ => false,
            })
            .collect()
    }

    /// Per-stage usage never exceeds the profile.
    pub fn within_capacity(&self) -> bool {
        self.tcam_used.iter().all(|&u| u <= self.profile.tcam_blocks_per_stage)
            && self.sram_used.iter().all(|&u| u <= self.profile.sram_pages_per_stage)
            && self.tcam_used.len() <= self.profile.stage_count
            && self.sram_used.len() <= self.profile.stage_count
    }
}

/// Small side table holding prefixes the planned structure cannot take,
/// searched by explicit length comparison.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OverflowBuffer {
    capacity: usize,
    entries: BTreeMap<Bits, NextHop>,
}

pub const DEFAULT_OVERFLOW_CAPACITY: usize = 512;

impl Default for OverflowBuffer {
    fn default() -> Self {
        OverflowBuffer::new(DEFAULT_OVERFLOW_CAPACITY)
    }
}

impl OverflowBuffer {
    pub fn new(capacity: usize) -> Self {
        OverflowBuffer {
            capacity,
            entries: BTreeMap::new(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, bits: Bits) -> bool {
        self.entries.contains_key(&bits)
    }

    pub fn insert(&mut self, p: &Prefix) -> Result<()> {
        if self.contains(p.bits) {
            return Err(Error::DuplicatePrefix {
                line: 0,
                prefix: format!("{}/{}", p.bits, p.len()),
            });
        }
        if self.entries.len() >= self.capacity {
            return Err(Error::OverflowFull {
                capacity: self.capacity,
            });
        }
        self.entries.insert(p.bits, p.next_hop.clone());
        Ok(())
    }

    pub fn remove(&mut self, bits: Bits) -> Option<Prefix> {
        self.entries.remove(&bits).map(|hop| Prefix::new(bits, hop))
    }

    /// Longest stored prefix of `address` with its length.
    pub fn lookup(&self, address: Bits) -> Option<(&NextHop, usize)> {
        self.entries
            .iter()
            .filter(|(b, _)| b.is_prefix_of(address))
            .max_by_key(|(b, _)| b.len())
            .map(|(b, h)| (h, b.len()))
    }

    pub fn prefixes(&self) -> impl Iterator<Item = Prefix> + '_ {
        self.entries.iter().map(|(b, h)| Prefix::new(*b, h.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(i: usize) -> Unit {
        Unit::Tcam(SuperTableId(i))
    }

    fn demand(level: usize, blocks: &[(usize, u64)]) -> LevelDemand {
        LevelDemand {
            level,
            tcam: blocks.iter().map(|&(i, n)| (SuperTableId(i), n)).collect(),
            sram_pages: 0,
        }
    }

    #[test]
    fn two_levels_need_two_stages() {
        let d = [demand(0, &[(0, 1)]), demand(1, &[(1, 1)])];
        let plan = map_to_pipeline(&d, [(st(0), st(1))], &PipelineProfile::new(2, 4, 4)).unwrap();
        assert_eq!(plan.stage_range(st(0)), Some((0, 0)));
        assert_eq!(plan.stage_range(st(1)), Some((1, 1)));
        assert!(plan.dependency_violations().is_empty());
        assert!(matches!(
            map_to_pipeline(&d, [], &PipelineProfile::new(1, 4, 4)),
            Err(Error::StageDepthExceeded { needed: 2, available: 1 })
        ));
    }

    #[test]
    fn wide_level_spills_and_pushes_the_next() {
        let d = [
            demand(0, &[(0, 1)]),
            demand(1, &[(1, 20), (2, 10)]),
            demand(2, &[(3, 5)]),
        ];
        let plan = map_to_pipeline(&d, [(st(0), st(1)), (st(1), st(3))], &PipelineProfile::default()).unwrap();
        // stages counted from 0: level 1 spans 1-2, level 2 starts at 3
        assert_eq!(plan.spans(st(1)), &[Span { stage: 1, first: 0, count: 20 }]);
        assert_eq!(
            plan.spans(st(2)),
            &[Span { stage: 1, first: 20, count: 4 }, Span { stage: 2, first: 0, count: 6 }]
        );
        assert_eq!(plan.stage_range(st(3)), Some((3, 3)));
        assert!(plan.dependency_violations().is_empty());
        assert!(plan.within_capacity());
        assert_eq!(plan.band(1), Some((1, 2)));
    }

    #[test]
    fn totals_checked_first() {
        let d = [demand(0, &[(0, 400)])];
        assert!(matches!(
            map_to_pipeline(&d, [], &PipelineProfile::default()),
            Err(Error::CapacityExceeded { blocks_short: 16, pages_short: 0 })
        ));
    }

    #[test]
    fn sram_uses_own_cursor() {
        let mut d = [demand(0, &[(0, 1)]), demand(1, &[(1, 2)])];
        d[1].sram_pages = 100;
        let plan = map_to_pipeline(&d, [], &PipelineProfile::default()).unwrap();
        assert_eq!(plan.stage_range(Unit::Sram(1)), Some((1, 2)));
        assert_eq!(plan.stage_range(st(1)), Some((1, 1)));
    }

    #[test]
    fn growth_stays_in_band() {
        let d = [demand(0, &[(0, 23)]), demand(1, &[(1, 1)])];
        let mut plan = map_to_pipeline(&d, [(st(0), st(1))], &PipelineProfile::new(2, 24, 0)).unwrap();
        plan.grow(st(0), 0, 1).unwrap();
        let before = plan.clone();
        assert!(matches!(plan.grow(st(0), 0, 1), Err(Error::CapacityExceeded { blocks_short: 1, .. })));
        assert_eq!(plan.tcam_used(), before.tcam_used());
        plan.grow(st(1), 1, 23).unwrap();
        assert!(plan.dependency_violations().is_empty());
        assert!(plan.grow(Unit::Sram(1), 1, 1).is_err());
    }

    #[test]
    fn profile_from_toml() {
        let p = PipelineProfile::from_toml_str(
            "name = \"lab\"\nstage_count = 4\ntcam_blocks_per_stage = 8\nsram_pages_per_stage = 2\n",
        )
        .unwrap();
        assert_eq!(p.total_tcam_blocks(), 32);
        assert!(!p.synthetic);
        assert!(PipelineProfile::from_toml_str("stage_count = 0").is_err());
        assert_eq!(PipelineProfile::default().total_tcam_blocks(), 384);
        assert_eq!(PipelineProfile::default().total_sram_pages(), 1280);
    }

    #[test]
    fn overflow_longest_wins() {
        let mut o = OverflowBuffer::new(2);
        o.insert(&Prefix::parse("10", "a")).unwrap();
        o.insert(&Prefix::parse("1011", "b")).unwrap();
        assert!(matches!(o.insert(&Prefix::parse("0", "c")), Err(Error::OverflowFull { capacity: 2 })));
        let a = Bits::parse_binary("101101").unwrap();
        assert_eq!(o.lookup(a).map(|(h, l)| (h.as_str(), l)), Some(("b", 4)));
        o.remove(Bits::parse_binary("1011").unwrap()).unwrap();
        assert_eq!(o.lookup(a).map(|x| x.1), Some(2));
    }
}

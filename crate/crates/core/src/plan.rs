//! A complete plan: tree, SRAM conversion, packing and pipeline placement,
//! kept consistent under inserts and deletes, plus the correctness harness
//! that checks it against the reference lookup.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bits::{mask, Bits};
use crate::bounds::{tiling_condition, BoundsReport};
use crate::error::{Error, Result};
use crate::numfmt::Rational;
use crate::packing::{
    hybridize, resource_totals, sram_entry_total, tag_and_pack, HybridizationConfig, HybridizationSummary, Packing,
    PackingConfig, ResourceReport, SuperTableId,
};
use crate::pipeline::{
    map_to_pipeline, LevelDemand, OverflowBuffer, PipelinePlan, PipelineProfile, Unit, DEFAULT_OVERFLOW_CAPACITY,
};
use crate::prefixdb::{
    hop_or_default, max_threshold_length, LengthIndexedOracle, NextHop, Prefix, PrefixDatabase, DEFAULT_COVERAGE,
};
use crate::tiler::{build_tree, GrainSpec, Hit, StrideList, TableId, TableKind, TcamTree};
use crate::trie::{build_unibit_trie, compute_lean_levels};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlanConfig {
    pub address_width: usize,
    pub strides: StrideList,
    pub grain: GrainSpec,
    /// Defaults to `ceil(log2 D)`.
    pub tag_bits: Option<usize>,
    pub hybridization: HybridizationConfig,
    pub profile: PipelineProfile,
    /// Fraction of prefixes the threshold length `M` must cover.
    #[serde(serialize_with = "crate::numfmt::serialize_rational")]
    pub coverage: Rational,
    pub overflow_capacity: usize,
    pub max_group_entries: Option<usize>,
}

impl PlanConfig {
    pub fn new(address_width: usize, strides: StrideList) -> Self {
        PlanConfig {
            address_width,
            strides,
            grain: GrainSpec::default(),
            tag_bits: None,
            hybridization: HybridizationConfig::default(),
            profile: PipelineProfile::default(),
            coverage: Rational::new(DEFAULT_COVERAGE.0, DEFAULT_COVERAGE.1),
            overflow_capacity: DEFAULT_OVERFLOW_CAPACITY,
            max_group_entries: None,
        }
    }

    pub fn tag_bits(&self) -> usize {
        self.tag_bits.unwrap_or_else(|| self.grain.default_tag_bits())
    }

    pub fn validate(&self) -> Result<()> {
        self.hybridization.validate()?;
        self.profile.validate()?;
        if self.coverage > Rational::from_integer(1) || self.coverage == Rational::from_integer(0) {
            return Err(Error::InvalidCoverage(self.coverage.to_string()));
        }
        if self.strides.coverage() > self.address_width {
            return Err(Error::InvalidStrides(format!(
                "strides {} cover {} bits but addresses have {}",
                self.strides,
                self.strides.coverage(),
                self.address_width
            )));
        }
        Ok(())
    }
}

/// Where an inserted prefix ended up.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    Tree,
    Overflow,
}

/// A lookup result: the next hop and the length of the prefix it came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Match<'a> {
    pub hop: &'a NextHop,
    pub len: usize,
}

#[derive(Clone, Debug)]
pub struct Plan {
    config: PlanConfig,
    db: PrefixDatabase,
    tree: TcamTree,
    hybrid: HybridizationSummary,
    packing: Packing,
    pipeline: PipelinePlan,
    overflow: OverflowBuffer,
    /// SRAM pages reserved per level.
    sram_pages: BTreeMap<usize, u64>,
}

enum Step {
    AddRow(SuperTableId),
    Join(SuperTableId),
    Open,
}

impl Plan {
    /// Builds the tree, converts SRAM-eligible tables, packs, and places
    /// everything on the pipeline. Prefixes longer than the stride coverage
    /// go to the overflow buffer.
    pub fn build(db: &PrefixDatabase, config: PlanConfig) -> Result<Plan> {
        config.validate()?;
        if db.address_width() != config.address_width {
            return Err(Error::BadAddressWidth(db.address_width()));
        }
        let coverage = config.strides.coverage();
        let mut overflow = OverflowBuffer::new(config.overflow_capacity);
        let mut short = PrefixDatabase::new(db.address_width())?;
        for p in db.entries() {
            if p.len() > coverage {
                overflow.insert(p)?;
            } else {
                short.push(p.clone())?;
            }
        }
        let mut tree = build_tree(&short, &config.strides)?;
        let tag_bits = config.tag_bits();
        let hybrid = hybridize(&mut tree, &config.hybridization, tag_bits)?;
        let packing = tag_and_pack(&tree, config.grain, packing_config(&config))?;
        let mut sram_pages = BTreeMap::new();
        let demands: Vec<LevelDemand> = (0..tree.levels().len())
            .map(|level| {
                let entries: u64 = tree.levels()[level]
                    .iter()
                    .filter_map(|&t| tree.table(t).sram_image())
                    .map(|i| i.len() as u64)
                    .sum();
                let pages = config.hybridization.sram.pages_for(entries);
                if pages > 0 {
                    sram_pages.insert(level, pages);
                }
                LevelDemand {
                    level,
                    tcam: packing
                        .at_level(level)
                        .map(|s| (s.id, s.block_count(config.grain)))
                        .collect(),
                    sram_pages: pages,
                }
            })
            .collect();
        let pipeline = map_to_pipeline(&demands, edges(&tree, &packing), &config.profile)?;
        Ok(Plan {
            db: db.clone(),
            config,
            tree,
            hybrid,
            packing,
            pipeline,
            overflow,
            sram_pages,
        })
    }

    pub fn config(&self) -> &PlanConfig {
        &self.config
    }

    /// Every prefix the plan currently answers for, tree and overflow.
    pub fn database(&self) -> &PrefixDatabase {
        &self.db
    }

    pub fn tree(&self) -> &TcamTree {
        &self.tree
    }

    pub fn packing(&self) -> &Packing {
        &self.packing
    }

    pub fn pipeline(&self) -> &PipelinePlan {
        &self.pipeline
    }

    pub fn overflow(&self) -> &OverflowBuffer {
        &self.overflow
    }

    pub fn hybridization(&self) -> &HybridizationSummary {
        &self.hybrid
    }

    pub fn sram_pages_reserved(&self) -> u64 {
        self.sram_pages.values().sum()
    }

    fn unit_of(&self, table: TableId) -> Option<Unit> {
        unit_of(&self.tree, &self.packing, table)
    }

    /// Lookup through the physical structures: super-table indexes keyed by
    /// tag and chunk, SRAM images, then the overflow buffer. The overflow
    /// result wins when its prefix is at least as long.
    pub fn search(&self, address: Bits) -> Option<Match<'_>> {
        debug_assert_eq!(address.len(), self.config.address_width);
        let mut id = TableId(0);
        let mut best = None;
        loop {
            let t = self.tree.table(id);
            let chunk = address.slice(t.start_bit, t.stride_width);
            let hit = match t.kind {
                TableKind::Sram => t.lookup(chunk),
                TableKind::Tcam => self.packing.lookup(&self.tree, id, chunk).map(|e| Hit {
                    bmp: e.bmp.as_ref(),
                    child: e.child,
                }),
            };
            let Some(hit) = hit else { break };
            if let Some(b) = hit.bmp {
                best = Some(Match { hop: &b.hop, len: b.len });
            }
            match hit.child {
                Some(c) => id = c.table,
                None => break,
            }
        }
        match (self.overflow.lookup(address), best) {
            (Some((hop, len)), Some(b)) if len >= b.len => Some(Match { hop, len }),
            (Some((hop, len)), None) => Some(Match { hop, len }),
            _ => best,
        }
    }

    /// Next hop label for `address`, `"default"` on a miss.
    pub fn search_hop(&self, address: Bits) -> &str {
        hop_or_default(self.search(address).map(|m| m.hop))
    }

    /// Inserts into the tree when every affected super-table and SRAM level
    /// can grow inside its stage band; otherwise into the overflow buffer.
    /// Nothing changes when the buffer is full as well.
    pub fn insert_prefix(&mut self, p: Prefix) -> Result<Placement> {
        if p.len() > self.config.address_width {
            return Err(Error::LengthOutOfRange {
                line: 0,
                length: p.len(),
                max: self.config.address_width,
            });
        }
        if self.db.contains(p.bits) {
            return Err(Error::DuplicatePrefix {
                line: 0,
                prefix: format!("{}/{}", p.bits, p.len()),
            });
        }
        let reserved = if p.len() > self.tree.coverage() {
            None
        } else {
            self.reserve(&p).ok()
        };
        let Some((pipeline, steps, pages)) = reserved else {
            self.overflow.insert(&p)?;
            self.db.push(p)?;
            return Ok(Placement::Overflow);
        };
        let out = self.tree.insert(&p)?;
        let mut created = out.created.iter().copied();
        let mut rows = Vec::new();
        for step in steps {
            match step {
                Step::AddRow(sid) => rows.push(sid),
                Step::Join(sid) => {
                    let t = created.next().expect("created table");
                    self.packing.join(&self.tree, sid, t);
                }
                Step::Open => {
                    let t = created.next().expect("created table");
                    self.packing.open_single(&self.tree, t);
                }
            }
        }
        for t in self.packing.refresh(&self.tree, &out.grown) {
            self.packing.open_single(&self.tree, t);
        }
        for sid in rows {
            self.packing.supertable_mut(sid).rows += 1;
        }
        for (level, n) in pages {
            *self.sram_pages.entry(level).or_default() += n;
        }
        self.pipeline = pipeline;
        self.db.push(p)?;
        debug_assert!(self.packing.supertables().iter().all(|s| self.packing.missing_rows(s.id) == 0));
        Ok(Placement::Tree)
    }

    /// Dry run of a tree insert against a copy of the pipeline: returns the
    /// grown pipeline, the packing steps in creation order, and extra SRAM
    /// pages per level.
    #[allow(clippy::type_complexity)]
    fn reserve(&self, p: &Prefix) -> Result<(PipelinePlan, Vec<Step>, Vec<(usize, u64)>)> {
        let grain = self.config.grain;
        let fp = self.tree.insert_footprint(p);
        let mut pipe = self.pipeline.clone();
        let mut steps = Vec::new();
        let mut pages = Vec::new();
        let mut next_sid = self.packing.supertables().len();
        let mut parent_unit = None;

        if let Some((id, key)) = fp.grows {
            let t = self.tree.table(id);
            match (t.kind, self.packing.location(id)) {
                (TableKind::Sram, _) => {
                    let level = t.level_index;
                    let current: u64 = self.tree.levels()[level]
                        .iter()
                        .filter_map(|&x| self.tree.table(x).sram_image())
                        .map(|i| i.len() as u64)
                        .sum();
                    let delta = t.expanded_size_with(key) as u64 - t.sram_image().map_or(0, |i| i.len() as u64);
                    let need = self.config.hybridization.sram.pages_for(current + delta);
                    let have = self.sram_pages.get(&level).copied().unwrap_or(0);
                    if need > have {
                        pipe.grow(Unit::Sram(level), level, need - have)?;
                        pages.push((level, need - have));
                    }
                    parent_unit = Some(Unit::Sram(level));
                }
                (TableKind::Tcam, Some((sid, _))) => {
                    let st = self.packing.supertable(sid);
                    if st.total_entries + 1 > st.rows * grain.depth {
                        pipe.grow(Unit::Tcam(sid), st.level_index, st.column_blocks(grain))?;
                        steps.push(Step::AddRow(sid));
                    }
                    parent_unit = Some(Unit::Tcam(sid));
                }
                (TableKind::Tcam, None) => {
                    // an emptied table waiting for collection gets its own super-table
                    let sid = SuperTableId(next_sid);
                    next_sid += 1;
                    pipe.grow(Unit::Tcam(sid), t.level_index, t.stride_width.div_ceil(grain.width) as u64)?;
                    if let Some(pu) = t.parent.and_then(|x| self.unit_of(x)) {
                        pipe.add_edge(pu, Unit::Tcam(sid));
                    }
                    parent_unit = Some(Unit::Tcam(sid));
                }
            }
        }
        if parent_unit.is_none() && !fp.created_levels.is_empty() {
            // the path reuses an existing entry; its table is the parent
            parent_unit = self.unit_of(self.deepest_on_path(p));
        }
        let cap = self.packing.config.max_group_entries;
        for &level in &fp.created_levels {
            let stride = self.tree.stride_list().strides()[level];
            let open = self.packing.open_supertable(level).filter(|&sid| {
                let st = self.packing.supertable(sid);
                st.effective_width >= st.tag_bits + stride && cap.is_none_or(|c| st.total_entries < c)
            });
            let unit = match open {
                Some(sid) => {
                    let st = self.packing.supertable(sid);
                    if st.total_entries + 1 > st.rows * grain.depth {
                        pipe.grow(Unit::Tcam(sid), level, st.column_blocks(grain))?;
                        steps.push(Step::AddRow(sid));
                    }
                    steps.push(Step::Join(sid));
                    Unit::Tcam(sid)
                }
                None => {
                    let sid = SuperTableId(next_sid);
                    next_sid += 1;
                    pipe.grow(Unit::Tcam(sid), level, stride.div_ceil(grain.width) as u64)?;
                    steps.push(Step::Open);
                    Unit::Tcam(sid)
                }
            };
            if let Some(pu) = parent_unit {
                pipe.add_edge(pu, unit);
            }
            parent_unit = Some(unit);
        }
        if !pipe.dependency_violations().is_empty() {
            return Err(Error::StageDepthExceeded {
                needed: pipe.stages_used() + 1,
                available: self.config.profile.stage_count,
            });
        }
        Ok((pipe, steps, pages))
    }

    /// Deepest existing table on the walk toward `p`.
    fn deepest_on_path(&self, p: &Prefix) -> TableId {
        let mut at = TableId(0);
        loop {
            let t = self.tree.table(at);
            if p.len() <= t.start_bit + t.stride_width {
                return at;
            }
            match t.get(p.bits.slice(t.start_bit, t.stride_width)).and_then(|e| e.child) {
                Some(c) => at = c.table,
                None => return at,
            }
        }
    }

    /// Removes a prefix from the overflow buffer or the tree. Blocks and
    /// pages stay reserved; emptied tables wait for
    /// [`Plan::collect_garbage`].
    pub fn delete_prefix(&mut self, bits: Bits) -> Result<()> {
        if self.overflow.remove(bits).is_some() {
            self.db.remove(bits);
            return Ok(());
        }
        let out = self.tree.remove(bits)?;
        self.packing.refresh(&self.tree, &[out.table]);
        self.db.remove(bits);
        Ok(())
    }

    pub fn collect_garbage(&mut self) -> usize {
        let removed = self.tree.collect_garbage();
        let all: Vec<TableId> = self.tree.tables().iter().map(|t| t.id).collect();
        for t in self.packing.refresh(&self.tree, &all) {
            self.packing.open_single(&self.tree, t);
        }
        removed
    }

    /// Corrupts the next hop of the longest prefix stored in the tree so
    /// the verifier has something to find. Returns the prefix touched.
    pub fn inject_fault(&mut self) -> Option<Prefix> {
        let victim = self
            .tree
            .prefixes()
            .into_iter()
            .max_by(|a, b| a.len().cmp(&b.len()).then_with(|| b.bits.cmp(&a.bits)))?;
        let bad = NextHop::new(&format!("{}!fault", victim.next_hop));
        self.tree.corrupt_hop(victim.bits, bad).ok()?;
        Some(victim)
    }

    pub fn resources(&self) -> ResourceReport {
        let n = self.db.len() as u64;
        let baseline = crate::bounds::single_tcam_baseline(n, self.tree.coverage(), self.config.grain);
        resource_totals(
            &self.tree,
            &self.packing,
            sram_entry_total(&self.tree),
            self.config.hybridization.sram,
            baseline.blocks,
        )
    }

    /// Bounds for the current database. The tiling check is evaluated at
    /// the first stride when the tree has at least two levels.
    pub fn bounds(&self) -> Result<BoundsReport> {
        let m = if self.db.is_empty() {
            0
        } else {
            max_threshold_length(&self.db, self.config.coverage)?.m
        };
        let tiling = match self.config.strides.strides() {
            [first, _, ..] if !self.db.is_empty() => {
                let lean = compute_lean_levels(&build_unibit_trie(&self.db), self.db.len())?;
                tiling_condition(m, &lean, self.config.grain, *first).ok()
            }
            _ => None,
        };
        Ok(BoundsReport::new(
            self.db.len() as u64,
            m,
            self.db.max_len(),
            self.tree.coverage(),
            self.config.grain,
            tiling,
        ))
    }

    /// Empty TCAM entries per level across its super-tables, with the
    /// super-table count.
    pub fn packing_waste(&self) -> BTreeMap<usize, (u64, usize)> {
        let mut out: BTreeMap<usize, (u64, usize)> = BTreeMap::new();
        for st in self.packing.supertables() {
            let e = out.entry(st.level_index).or_default();
            e.0 += st.empty_entries(self.config.grain);
            e.1 += 1;
        }
        out
    }

    /// Compares the plan against the reference lookup on the chosen
    /// address set.
    pub fn verify(&self, mode: VerifyMode) -> Result<VerifyReport> {
        let addresses = self.verify_addresses(mode)?;
        let oracle = LengthIndexedOracle::new(&self.db);
        let mut report = VerifyReport {
            mode,
            checked: 0,
            mismatch_count: 0,
            mismatches: Vec::new(),
        };
        let mut check = |a: Bits| {
            report.checked += 1;
            let want = hop_or_default(oracle.lookup(a).map(|p| &p.next_hop));
            let got = self.search_hop(a);
            if got != want {
                report.mismatch_count += 1;
                if report.mismatches.len() < MAX_REPORTED_MISMATCHES {
                    report.mismatches.push(Mismatch {
                        address: a.to_string(),
                        got: got.to_string(),
                        expected: want.to_string(),
                    });
                }
            }
        };
        match addresses {
            Addresses::All(w) => (0..1u128 << w).for_each(|a| check(Bits::new(a, w))),
            Addresses::List(list) => list.into_iter().for_each(check),
        }
        Ok(report)
    }

    fn verify_addresses(&self, mode: VerifyMode) -> Result<Addresses> {
        let w = self.config.address_width;
        match mode {
            VerifyMode::Exhaustive => {
                if w > MAX_EXHAUSTIVE_WIDTH {
                    return Err(Error::InvalidConfig(format!(
                        "exhaustive verification is limited to {MAX_EXHAUSTIVE_WIDTH}-bit addresses"
                    )));
                }
                Ok(Addresses::All(w))
            }
            VerifyMode::Sampled { samples, seed } => Ok(Addresses::List(sample_addresses(&self.db, samples, seed))),
        }
    }
}

/// `samples` seeded random addresses plus both ends of every prefix's range,
/// deduplicated and sorted.
pub fn sample_addresses(db: &PrefixDatabase, samples: usize, seed: u64) -> Vec<Bits> {
    let w = db.address_width();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set = BTreeSet::new();
    for _ in 0..samples {
        set.insert(rng.gen::<u128>() & mask(w as u32));
    }
    for p in db.entries() {
        set.insert(p.bits.pad_to(w, false).value());
        set.insert(p.bits.pad_to(w, true).value());
    }
    set.into_iter().map(|v| Bits::new(v, w)).collect()
}

pub const MAX_EXHAUSTIVE_WIDTH: usize = 24;
pub const MAX_REPORTED_MISMATCHES: usize = 20;

enum Addresses {
    All(usize),
    List(Vec<Bits>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum VerifyMode {
    Exhaustive,
    Sampled { samples: usize, seed: u64 },
}

impl VerifyMode {
    /// Exhaustive up to 16-bit addresses, sampled beyond.
    pub fn auto(address_width: usize, samples: usize, seed: u64) -> Self {
        if address_width <= 16 {
            VerifyMode::Exhaustive
        } else {
            VerifyMode::Sampled { samples, seed }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub address: String,
    pub got: String,
    pub expected: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    #[serde(flatten)]
    pub mode: VerifyMode,
    pub checked: u64,
    pub mismatch_count: u64,
    /// The first few mismatches.
    pub mismatches: Vec<Mismatch>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.mismatch_count == 0
    }
}

fn packing_config(config: &PlanConfig) -> PackingConfig {
    PackingConfig {
        max_group_entries: config.max_group_entries,
        ..PackingConfig::new(config.tag_bits())
    }
}

fn unit_of(tree: &TcamTree, packing: &Packing, table: TableId) -> Option<Unit> {
    let t = tree.table(table);
    match t.kind {
        TableKind::Sram => Some(Unit::Sram(t.level_index)),
        TableKind::Tcam => packing.location(table).map(|l| Unit::Tcam(l.0)),
    }
}

/// Parent-to-child dependencies between placed units.
fn edges(tree: &TcamTree, packing: &Packing) -> BTreeSet<(Unit, Unit)> {
    tree.tables()
        .iter()
        .filter_map(|t| Some((unit_of(tree, packing, t.parent?)?, unit_of(tree, packing, t.id)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prefixdb::parse_database;

    fn six_prefixes() -> PrefixDatabase {
        parse_database("1/1 A\n1000/4 B\n10001/5 C\n10010/5 D\n100110/6 E\n100111/6 F\n", 6).unwrap()
    }

    fn b(s: &str) -> Bits {
        Bits::parse_binary(s).unwrap()
    }

    fn plan(strides: &str) -> Plan {
        Plan::build(&six_prefixes(), PlanConfig::new(6, strides.parse().unwrap())).unwrap()
    }

    #[test]
    fn search_examples() {
        let p = plan("3-3");
        assert_eq!(p.search_hop(b("100110")), "E");
        assert_eq!(p.search_hop(b("101111")), "A");
        assert_eq!(p.search_hop(b("000000")), "default");
        assert!(p.verify(VerifyMode::Exhaustive).unwrap().passed());
        assert_eq!(p.verify(VerifyMode::Exhaustive).unwrap().checked, 64);
    }

    #[test]
    fn six_prefix_plan_resources() {
        let p = plan("3-3");
        let r = p.resources();
        assert_eq!(r.tcam_blocks_pre_tag, 2);
        assert_eq!(r.tcam_blocks_post_tag, 2);
        assert_eq!(p.pipeline().stages_used(), 2);
        assert!(p.pipeline().dependency_violations().is_empty());
        let small = PlanConfig {
            profile: PipelineProfile::new(1, 4, 4),
            ..PlanConfig::new(6, "3-3".parse().unwrap())
        };
        assert!(matches!(
            Plan::build(&six_prefixes(), small),
            Err(Error::StageDepthExceeded { needed: 2, available: 1 })
        ));
    }

    #[test]
    fn updates_follow_oracle() {
        let mut p = plan("3-3");
        assert_eq!(p.insert_prefix(Prefix::parse("101", "G")).unwrap(), Placement::Tree);
        assert_eq!(p.search_hop(b("101000")), "G");
        assert!(matches!(p.insert_prefix(Prefix::parse("1000", "B")), Err(Error::DuplicatePrefix { .. })));
        p.insert_prefix(Prefix::parse("0110", "Z")).unwrap();
        p.insert_prefix(Prefix::parse("011011", "Y")).unwrap();
        assert!(p.verify(VerifyMode::Exhaustive).unwrap().passed());
        p.delete_prefix(b("100110")).unwrap();
        assert_eq!(p.search_hop(b("100110")), "A");
        p.delete_prefix(b("1")).unwrap();
        assert_eq!(p.search_hop(b("111111")), "default");
        assert!(matches!(p.delete_prefix(b("1")), Err(Error::NotFound(_))));
        assert!(p.verify(VerifyMode::Exhaustive).unwrap().passed());
        p.collect_garbage();
        assert!(p.verify(VerifyMode::Exhaustive).unwrap().passed());
        assert!(p.pipeline().dependency_violations().is_empty());
    }

    #[test]
    fn long_prefixes_use_overflow() {
        let mut db = six_prefixes();
        db.push(Prefix::parse("01101", "L")).unwrap();
        let cfg = PlanConfig::new(6, "2-2".parse().unwrap());
        let mut p = Plan::build(&db, cfg).unwrap();
        assert_eq!(p.overflow().len(), 5);
        assert_eq!(p.search_hop(b("100110")), "E");
        assert_eq!(p.search_hop(b("011010")), "L");
        assert!(p.verify(VerifyMode::Exhaustive).unwrap().passed());
        assert_eq!(p.insert_prefix(Prefix::parse("111111", "T")).unwrap(), Placement::Overflow);
        p.delete_prefix(b("01101")).unwrap();
        assert!(p.verify(VerifyMode::Exhaustive).unwrap().passed());
    }

    #[test]
    fn full_structure_spills_to_overflow() {
        let cfg = PlanConfig {
            profile: PipelineProfile::new(2, 1, 0),
            overflow_capacity: 1,
            ..PlanConfig::new(6, "3-3".parse().unwrap())
        };
        let mut p = Plan::build(&six_prefixes(), cfg).unwrap();
        // a new level-1 table needs a block the profile does not have
        assert_eq!(p.insert_prefix(Prefix::parse("0101", "N")).unwrap(), Placement::Overflow);
        assert!(matches!(
            p.insert_prefix(Prefix::parse("0110", "O")),
            Err(Error::OverflowFull { capacity: 1 })
        ));
        // fits in an existing table
        assert_eq!(p.insert_prefix(Prefix::parse("011", "P")).unwrap(), Placement::Tree);
        assert!(p.verify(VerifyMode::Exhaustive).unwrap().passed());
    }

    #[test]
    fn new_row_when_supertable_fills() {
        let mut prefixes = Vec::new();
        for j in 0..512u128 {
            prefixes.push(Prefix::new(Bits::new(1, 2).concat(Bits::new(j, 10)), "x"));
        }
        let db = PrefixDatabase::from_prefixes(12, prefixes).unwrap();
        let mut p = Plan::build(&db, PlanConfig::new(12, "2-10".parse().unwrap())).unwrap();
        let before = p.resources().tcam_blocks_post_tag;
        p.insert_prefix(Prefix::new(Bits::new(1, 2).concat(Bits::new(1, 1)), "y")).unwrap();
        assert_eq!(p.resources().tcam_blocks_post_tag, before + 1);
        assert!(p.verify(VerifyMode::Exhaustive).unwrap().passed());
    }

    #[test]
    fn hybrid_plan_searches() {
        let mut cfg = PlanConfig::new(6, "3-3".parse().unwrap());
        cfg.hybridization = HybridizationConfig::with_factor(Rational::from_integer(3));
        let mut p = Plan::build(&six_prefixes(), cfg).unwrap();
        assert_eq!(p.tree().table(TableId(1)).kind, TableKind::Sram);
        assert!(p.verify(VerifyMode::Exhaustive).unwrap().passed());
        p.insert_prefix(Prefix::parse("100001", "Q")).unwrap();
        p.insert_prefix(Prefix::parse("0", "R")).unwrap();
        assert!(p.verify(VerifyMode::Exhaustive).unwrap().passed());
        assert!(p.pipeline().dependency_violations().is_empty());
    }

    #[test]
    fn fault_is_caught() {
        let mut p = plan("2-2-2");
        let victim = p.inject_fault().unwrap();
        assert_eq!(victim.len(), 6);
        let r = p.verify(VerifyMode::Exhaustive).unwrap();
        assert!(!r.passed());
        assert_eq!(r.mismatches[0].expected, victim.next_hop.as_str());
    }

    #[test]
    fn sampling_is_deterministic() {
        let db = six_prefixes();
        let a = sample_addresses(&db, 10, 7);
        assert_eq!(a, sample_addresses(&db, 10, 7));
        assert!(a.contains(&b("100000")) && a.contains(&b("111111")));
        let p = plan("3-3");
        let r = p.verify(VerifyMode::Sampled { samples: 10, seed: 7 }).unwrap();
        assert!(r.passed());
        assert_eq!(r.checked as usize, a.len());
    }
}

//! SRAM conversion of tree tables and tagged packing of the rest into
//! super-tables.

use std::cmp::Reverse;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::bits::{pow2_saturating, Bits, MAX_WIDTH};
use crate::error::{Error, Result};
use crate::numfmt::{fmt_fraction, Rational};
use crate::tiler::{blocks_for_table, GrainSpec, TableEntry, TableId, TableKind, TcamTree};

/// SRAM page geometry: `page_width` bits by `page_depth` entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SramPageSpec {
    pub page_width: usize,
    pub page_depth: usize,
}

impl Default for SramPageSpec {
    fn default() -> Self {
        SramPageSpec {
            page_width: 128,
            page_depth: 1024,
        }
    }
}

impl fmt::Display for SramPageSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.page_width, self.page_depth)
    }
}

impl FromStr for SramPageSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let g: GrainSpec = s
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("sram page `{s}` is not WIDTHxDEPTH")))?;
        Ok(SramPageSpec {
            page_width: g.width,
            page_depth: g.depth,
        })
    }
}

impl SramPageSpec {
    pub fn pages_for(&self, entries: u64) -> u64 {
        entries.div_ceil(self.page_depth as u64)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HybridizationConfig {
    pub enabled: bool,
    /// Conversion factor: a table converts when its expansion is at most
    /// `factor` times its entry count.
    #[serde(serialize_with = "crate::numfmt::serialize_rational")]
    pub factor: Rational,
    pub sram: SramPageSpec,
    /// Bits stored per SRAM entry for the next hop and child pointer.
    pub value_bits: usize,
}

impl Default for HybridizationConfig {
    fn default() -> Self {
        HybridizationConfig {
            enabled: false,
            factor: Ratio::from_integer(3),
            sram: SramPageSpec::default(),
            value_bits: 16,
        }
    }
}

impl HybridizationConfig {
    pub fn with_factor(factor: Rational) -> Self {
        HybridizationConfig {
            enabled: true,
            factor,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.factor < Ratio::from_integer(1) {
            return Err(Error::InvalidConfig(format!(
                "conversion factor {} must be at least 1",
                self.factor
            )));
        }
        if self.sram.page_width == 0 || self.sram.page_depth == 0 {
            return Err(Error::InvalidConfig(format!("sram page {} must be at least 1x1", self.sram)));
        }
        Ok(())
    }

    /// `expanded <= factor * entries`, exactly.
    pub fn accepts(&self, expanded: u128, entries: usize) -> bool {
        expanded * *self.factor.denom() as u128 <= *self.factor.numer() as u128 * entries as u128
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct HybridizationSummary {
    pub converted: Vec<TableId>,
    pub sram_entries: u64,
}

/// Marks every table whose expansion to its longest local length stays
/// within the conversion factor (and whose expanded word fits a page) as
/// SRAM, flags the parent pointers, and installs the exact-match images.
/// Tables are judged independently, so the result does not depend on visit
/// order.
pub fn hybridize(tree: &mut TcamTree, cfg: &HybridizationConfig, tag_bits: usize) -> Result<HybridizationSummary> {
    cfg.validate()?;
    let mut summary = HybridizationSummary::default();
    if !cfg.enabled {
        return Ok(summary);
    }
    let convert: Vec<TableId> = tree
        .tables()
        .iter()
        .filter(|t| !t.is_empty() && t.kind == TableKind::Tcam)
        .filter(|t| tag_bits + t.max_local_length() + cfg.value_bits <= cfg.sram.page_width)
        .filter(|t| cfg.accepts(t.expanded_size(), t.len()))
        .map(|t| t.id)
        .collect();
    for &id in &convert {
        tree.table_mut(id).set_kind(TableKind::Sram);
        if let Some(parent) = tree.table(id).parent {
            tree.table_mut(parent).set_child_kind(id, TableKind::Sram);
        }
    }
    for &id in &convert {
        let img = tree.table(id).expand();
        summary.sram_entries += img.len() as u64;
        tree.table_mut(id).set_sram_image(img);
    }
    summary.converted = convert;
    Ok(summary)
}

/// Expanded entries currently held by SRAM tables.
pub fn sram_entry_total(tree: &TcamTree) -> u64 {
    tree.tables()
        .iter()
        .filter_map(|t| t.sram_image())
        .map(|img| img.len() as u64)
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PackingConfig {
    pub tag_bits: usize,
    /// Close a group early once adding the next table would exceed this
    /// many entries.
    pub max_group_entries: Option<usize>,
    /// With grouping disabled a level must fit one super-table.
    pub grouping: bool,
}

impl PackingConfig {
    pub fn new(tag_bits: usize) -> Self {
        PackingConfig {
            tag_bits,
            max_group_entries: None,
            grouping: true,
        }
    }

    /// Members one tagged super-table can hold.
    pub fn capacity(&self) -> u128 {
        pow2_saturating(self.tag_bits as u32)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SuperTableId(pub usize);

/// Same-level TCAM tables sharing one block set. Keys are the member's tag
/// followed by the member's local key; a lone member needs no tag.
#[derive(Clone, Debug)]
pub struct SuperTable {
    pub id: SuperTableId,
    pub level_index: usize,
    pub tag_bits: usize,
    /// `(tag, table)` in tag order.
    pub members: Vec<(u64, TableId)>,
    pub effective_width: usize,
    pub total_entries: usize,
    /// Block rows allocated; at least `ceil(total_entries / D)`.
    pub rows: usize,
    index: FxHashMap<Bits, (TableId, Bits)>,
    probe: Vec<usize>,
}

impl SuperTable {
    pub fn column_blocks(&self, grain: GrainSpec) -> u64 {
        self.effective_width.div_ceil(grain.width) as u64
    }

    pub fn block_count(&self, grain: GrainSpec) -> u64 {
        self.column_blocks(grain) * self.rows as u64
    }

    /// Blocks the members need with no slack rows.
    pub fn required_blocks(&self, grain: GrainSpec) -> u64 {
        blocks_for_table(self.effective_width, self.total_entries, grain)
    }

    /// Empty entry slots across the allocated rows.
    pub fn empty_entries(&self, grain: GrainSpec) -> u64 {
        (self.rows * grain.depth).saturating_sub(self.total_entries) as u64
    }

    pub fn tag_of(&self, table: TableId) -> Option<u64> {
        self.members.iter().find(|m| m.1 == table).map(|m| m.0)
    }

    pub fn member(&self, tag: u64) -> Option<TableId> {
        self.members.iter().find(|m| m.0 == tag).map(|m| m.1)
    }

    pub fn has_free_tag(&self, cfg: &PackingConfig) -> bool {
        self.tag_bits > 0 && (self.members.len() as u128) < cfg.capacity()
    }

    fn free_tag(&self) -> u64 {
        (0u64..)
            .find(|t| self.members.iter().all(|m| m.0 != *t))
            .expect("tag space not exhausted")
    }

    fn tag_key(&self, tag: u64) -> Bits {
        Bits::new(tag as u128, self.tag_bits)
    }

    /// Physical match: the tag-prefixed key against every member entry,
    /// longest specified key first. Returns the owning table and the local
    /// key of the hit.
    pub fn lookup(&self, tag: u64, chunk: Bits) -> Option<(TableId, Bits)> {
        let key = self.tag_key(tag).concat(chunk);
        self.probe
            .iter()
            .filter(|&&l| l <= key.len())
            .find_map(|&l| self.index.get(&key.prefix(l)).copied())
    }

    /// Rebuilds widths, counts and the physical index from the tree.
    fn reindex(&mut self, tree: &TcamTree) {
        self.index.clear();
        let mut lens = std::collections::BTreeSet::new();
        let mut total = 0;
        let mut width = 0;
        for &(tag, id) in &self.members {
            let t = tree.table(id);
            total += t.len();
            width = width.max(t.stride_width);
            let prefix = self.tag_key(tag);
            for e in t.entries() {
                let key = prefix.concat(e.key.bits);
                lens.insert(key.len());
                self.index.insert(key, (id, e.key.bits));
            }
        }
        self.probe = lens.into_iter().rev().collect();
        self.total_entries = total;
        self.effective_width = self.tag_bits + width;
    }
}

/// Super-tables for every level plus the table-to-tag map.
#[derive(Clone, Debug)]
pub struct Packing {
    pub grain: GrainSpec,
    pub config: PackingConfig,
    supertables: Vec<SuperTable>,
    member_of: FxHashMap<TableId, (SuperTableId, u64)>,
}

impl Packing {
    pub fn supertables(&self) -> &[SuperTable] {
        &self.supertables
    }

    pub fn supertable(&self, id: SuperTableId) -> &SuperTable {
        &self.supertables[id.0]
    }

    pub fn location(&self, table: TableId) -> Option<(SuperTableId, u64)> {
        self.member_of.get(&table).copied()
    }

    pub fn at_level(&self, level: usize) -> impl Iterator<Item = &SuperTable> + '_ {
        self.supertables.iter().filter(move |s| s.level_index == level)
    }

    pub fn post_tag_blocks(&self) -> u64 {
        self.supertables.iter().map(|s| s.block_count(self.grain)).sum()
    }

    /// Resolves a tree table's entry for `chunk` through its super-table.
    pub fn lookup<'t>(&self, tree: &'t TcamTree, table: TableId, chunk: Bits) -> Option<&'t TableEntry> {
        let (sid, tag) = self.location(table)?;
        let (owner, local) = self.supertable(sid).lookup(tag, chunk)?;
        debug_assert_eq!(owner, table, "tag aliasing");
        tree.table(owner).get(local)
    }

    /// Brings membership and counts in line with the tree after updates.
    /// Tables that became SRAM or empty leave their super-table; tables
    /// with no super-table are returned for the caller to place.
    pub fn refresh(&mut self, tree: &TcamTree, touched: &[TableId]) -> Vec<TableId> {
        let mut dirty = Vec::new();
        let mut unplaced = Vec::new();
        for &id in touched {
            let t = tree.table(id);
            let live = t.kind == TableKind::Tcam && !t.is_empty();
            match (self.location(id), live) {
                (Some((sid, _)), true) => dirty.push(sid),
                (Some((sid, _)), false) => {
                    self.supertables[sid.0].members.retain(|m| m.1 != id);
                    self.member_of.remove(&id);
                    dirty.push(sid);
                }
                (None, true) => unplaced.push(id),
                (None, false) => {}
            }
        }
        dirty.sort();
        dirty.dedup();
        for sid in dirty {
            self.supertables[sid.0].reindex(tree);
        }
        unplaced
    }

    /// Super-table at `level` that can take one more member, if any.
    pub fn open_supertable(&self, level: usize) -> Option<SuperTableId> {
        self.at_level(level).find(|s| s.has_free_tag(&self.config)).map(|s| s.id)
    }

    /// Adds `table` under the lowest free tag of `sid`.
    pub fn join(&mut self, tree: &TcamTree, sid: SuperTableId, table: TableId) -> u64 {
        let st = &mut self.supertables[sid.0];
        let tag = st.free_tag();
        st.members.push((tag, table));
        st.members.sort();
        st.reindex(tree);
        self.member_of.insert(table, (sid, tag));
        tag
    }

    /// Opens a new untagged super-table holding only `table`.
    pub fn open_single(&mut self, tree: &TcamTree, table: TableId) -> SuperTableId {
        let id = SuperTableId(self.supertables.len());
        let level = tree.table(table).level_index;
        let mut st = SuperTable {
            id,
            level_index: level,
            tag_bits: 0,
            members: vec![(0, table)],
            effective_width: 0,
            total_entries: 0,
            rows: 0,
            index: FxHashMap::default(),
            probe: Vec::new(),
        };
        st.reindex(tree);
        st.rows = st.total_entries.div_ceil(self.grain.depth);
        self.supertables.push(st);
        self.member_of.insert(table, (id, 0));
        id
    }

    pub(crate) fn supertable_mut(&mut self, id: SuperTableId) -> &mut SuperTable {
        &mut self.supertables[id.0]
    }

    /// Rows a super-table needs beyond what it holds.
    pub fn missing_rows(&self, id: SuperTableId) -> usize {
        let st = self.supertable(id);
        st.total_entries.div_ceil(self.grain.depth).saturating_sub(st.rows)
    }
}

/// Groups each level's non-empty TCAM tables into super-tables. Tables are
/// taken largest first (ties by id) and a group closes at `2^tag_bits`
/// members or at the optional entry cap. A group whose packed cost would
/// exceed its members' stand-alone costs is split into untagged
/// single-table super-tables, so packing never costs more than the per-table
/// sum. The root is always alone and untagged.
pub fn tag_and_pack(tree: &TcamTree, grain: GrainSpec, cfg: PackingConfig) -> Result<Packing> {
    let widest = tree.stride_list().strides().iter().copied().max().unwrap_or(0);
    if cfg.tag_bits + widest > MAX_WIDTH || cfg.tag_bits >= 64 {
        return Err(Error::InvalidConfig(format!(
            "{} tag bits plus a {widest}-bit stride exceed the {MAX_WIDTH}-bit key limit",
            cfg.tag_bits
        )));
    }
    let mut packing = Packing {
        grain,
        config: cfg,
        supertables: Vec::new(),
        member_of: FxHashMap::default(),
    };
    let cap = cfg.capacity();
    for (level, ids) in tree.levels().iter().enumerate() {
        let mut tables: Vec<TableId> = ids
            .iter()
            .copied()
            .filter(|&id| {
                let t = tree.table(id);
                t.kind == TableKind::Tcam && !t.is_empty()
            })
            .collect();
        if level == 0 {
            for id in tables {
                packing.open_single(tree, id);
            }
            continue;
        }
        if !cfg.grouping && tables.len() as u128 > cap {
            return Err(Error::TagOverflow {
                level,
                tables: tables.len(),
                capacity: cap.min(u64::MAX as u128) as u64,
            });
        }
        tables.sort_by_key(|&id| (Reverse(tree.table(id).len()), id));
        let mut group: Vec<TableId> = Vec::new();
        let mut entries = 0;
        for id in tables {
            let n = tree.table(id).len();
            let over_cap = cfg
                .max_group_entries
                .is_some_and(|c| !group.is_empty() && entries + n > c);
            if over_cap || group.len() as u128 == cap {
                packing.close_group(tree, level, std::mem::take(&mut group));
                entries = 0;
            }
            group.push(id);
            entries += n;
        }
        packing.close_group(tree, level, group);
    }
    Ok(packing)
}

impl Packing {
    fn close_group(&mut self, tree: &TcamTree, level: usize, group: Vec<TableId>) {
        if group.is_empty() {
            return;
        }
        let tag_bits = self.config.tag_bits;
        let width = group.iter().map(|&id| tree.table(id).stride_width).max().unwrap_or(0);
        let entries: usize = group.iter().map(|&id| tree.table(id).len()).sum();
        let packed = blocks_for_table(tag_bits + width, entries, self.grain);
        let alone: u64 = group.iter().map(|&id| tree.table(id).blocks(self.grain)).sum();
        if group.len() == 1 || packed > alone {
            for id in group {
                self.open_single(tree, id);
            }
            return;
        }
        let id = SuperTableId(self.supertables.len());
        let mut st = SuperTable {
            id,
            level_index: level,
            tag_bits,
            members: group.iter().enumerate().map(|(i, &t)| (i as u64, t)).collect(),
            effective_width: 0,
            total_entries: 0,
            rows: 0,
            index: FxHashMap::default(),
            probe: Vec::new(),
        };
        st.reindex(tree);
        st.rows = st.total_entries.div_ceil(self.grain.depth);
        for &(tag, t) in &st.members {
            self.member_of.insert(t, (id, tag));
        }
        self.supertables.push(st);
    }
}

/// Improvement over a baseline, `baseline / post_tag`; infinite when the
/// plan uses no TCAM blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Improvement {
    Factor { baseline: u64, post_tag: u64 },
    Infinite,
}

impl Improvement {
    pub fn new(baseline: u64, post_tag: u64) -> Self {
        if post_tag == 0 {
            Improvement::Infinite
        } else {
            Improvement::Factor { baseline, post_tag }
        }
    }
}

impl fmt::Display for Improvement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Improvement::Factor { baseline, post_tag } => {
                f.write_str(&fmt_fraction(baseline as u128, post_tag as u128, 3))
            }
            Improvement::Infinite => f.write_str("infinite"),
        }
    }
}

impl Serialize for Improvement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResourceReport {
    pub tcam_blocks_pre_tag: u64,
    pub tcam_blocks_post_tag: u64,
    pub tcam_bits: u64,
    pub sram_entries: u64,
    pub sram_pages: u64,
    pub baseline_blocks: u64,
    pub improvement_factor: Improvement,
}

pub fn resource_totals(
    tree: &TcamTree,
    packing: &Packing,
    sram_entries: u64,
    sram: SramPageSpec,
    baseline_blocks: u64,
) -> ResourceReport {
    let grain = packing.grain;
    let post = packing.post_tag_blocks();
    ResourceReport {
        tcam_blocks_pre_tag: tree.blocks_pre_tag(grain),
        tcam_blocks_post_tag: post,
        tcam_bits: post * grain.block_bits(),
        sram_entries,
        sram_pages: sram.pages_for(sram_entries),
        baseline_blocks,
        improvement_factor: Improvement::new(baseline_blocks, post),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prefixdb::{oracle_lookup, parse_database, Prefix, PrefixDatabase};
    use crate::tiler::build_tree;

    fn six_prefixes() -> PrefixDatabase {
        parse_database("1/1 A\n1000/4 B\n10001/5 C\n10010/5 D\n100110/6 E\n100111/6 F\n", 6).unwrap()
    }

    fn factor(s: &str) -> HybridizationConfig {
        HybridizationConfig::with_factor(crate::numfmt::parse_rational(s).unwrap())
    }

    fn assert_oracle(db: &PrefixDatabase, tree: &TcamTree) {
        for a in 0..(1u128 << db.address_width()) {
            let a = Bits::new(a, db.address_width());
            let want = oracle_lookup(db, a).map(|p| p.len());
            assert_eq!(tree.search(a).map(|b| b.len), want, "{a}");
        }
    }

    #[test]
    fn child_converts_at_three_not_one_and_a_half() {
        let db = six_prefixes();
        let mut tree = build_tree(&db, &"3-3".parse().unwrap()).unwrap();
        assert_eq!(tree.table(TableId(1)).expanded_size(), 8);

        let mut stay = tree.clone();
        let s = hybridize(&mut stay, &factor("1.5"), 9).unwrap();
        assert!(!s.converted.contains(&TableId(1)));

        let s = hybridize(&mut tree, &factor("3"), 9).unwrap();
        assert!(s.converted.contains(&TableId(1)));
        let stub = tree.root().entries().find(|e| e.child.is_some()).unwrap();
        assert_eq!(stub.child.unwrap().kind, TableKind::Sram);
        assert_eq!(tree.table(TableId(1)).sram_image().unwrap().len(), 8);
        assert_oracle(&db, &tree);
    }

    #[test]
    fn page_width_blocks_conversion() {
        let db = six_prefixes();
        let mut tree = build_tree(&db, &"3-3".parse().unwrap()).unwrap();
        let mut cfg = factor("8");
        cfg.sram.page_width = 9 + 3 + 16 - 1;
        assert!(hybridize(&mut tree, &cfg, 9).unwrap().converted.is_empty());
        assert!(hybridize(&mut tree, &factor("0.5"), 9).is_err());
    }

    #[test]
    fn disabled_hybridization_is_identity() {
        let db = six_prefixes();
        let mut tree = build_tree(&db, &"3-3".parse().unwrap()).unwrap();
        let mut cfg = factor("8");
        cfg.enabled = false;
        assert_eq!(hybridize(&mut tree, &cfg, 9).unwrap(), HybridizationSummary::default());
        assert!(tree.tables().iter().all(|t| t.kind == TableKind::Tcam));
    }

    #[test]
    fn sram_image_follows_updates() {
        let mut db = six_prefixes();
        let mut tree = build_tree(&db, &"3-3".parse().unwrap()).unwrap();
        hybridize(&mut tree, &factor("8"), 9).unwrap();
        for (bits, hop) in [("1010", "X"), ("0", "Z"), ("100101", "Y")] {
            let p = Prefix::parse(bits, hop);
            tree.insert(&p).unwrap();
            db.push(p).unwrap();
            assert_oracle(&db, &tree);
        }
        for bits in ["100110", "1010", "1"] {
            let b = Bits::parse_binary(bits).unwrap();
            tree.remove(b).unwrap();
            db.remove(b);
            assert_oracle(&db, &tree);
        }
        assert_eq!(sram_entry_total(&tree) as usize, tree.tables().iter().filter_map(|t| t.sram_image()).map(|i| i.len()).sum::<usize>());
    }

    /// A level-1 table with `n` entries under a distinct root stub.
    fn tree_with_children(sizes: &[usize], stride: usize) -> TcamTree {
        let mut prefixes = Vec::new();
        for (i, &n) in sizes.iter().enumerate() {
            for j in 0..n {
                let bits = Bits::new(i as u128, 8).concat(Bits::new(j as u128, stride));
                prefixes.push(Prefix::new(bits, "h"));
            }
        }
        let db = PrefixDatabase::from_prefixes(8 + stride, prefixes).unwrap();
        build_tree(&db, &format!("8-{stride}").parse().unwrap()).unwrap()
    }

    #[test]
    fn five_tables_pack_into_three_blocks() {
        let tree = tree_with_children(&[300, 300, 300, 300, 100], 29);
        let p = tag_and_pack(&tree, GrainSpec::default(), PackingConfig::new(9)).unwrap();
        let level1: Vec<_> = p.at_level(1).collect();
        assert_eq!(level1.len(), 1);
        assert_eq!(level1[0].effective_width, 38);
        assert_eq!(level1[0].total_entries, 1300);
        assert_eq!(level1[0].block_count(p.grain), 3);
        assert_eq!(tree.blocks_pre_tag(p.grain), 1 + 5);
        assert_eq!(p.post_tag_blocks(), 1 + 3);
    }

    #[test]
    fn exact_fit_is_one_block() {
        let tree = tree_with_children(&[512], 26);
        let p = tag_and_pack(&tree, GrainSpec::default(), PackingConfig::new(9)).unwrap();
        let st = p.at_level(1).next().unwrap();
        assert_eq!(st.block_count(p.grain), 1);
        assert_eq!(st.empty_entries(p.grain), 0);
    }

    #[test]
    fn tags_unique_and_resolvable() {
        let tree = tree_with_children(&[5, 4, 3, 2, 1, 1, 1], 6);
        let p = tag_and_pack(&tree, GrainSpec::default(), PackingConfig::new(2)).unwrap();
        let level1: Vec<_> = p.at_level(1).collect();
        assert_eq!(level1.len(), 2);
        assert_eq!(level1[0].members.len(), 4);
        for st in &level1 {
            let mut tags: Vec<_> = st.members.iter().map(|m| m.0).collect();
            tags.dedup();
            assert_eq!(tags.len(), st.members.len());
            for &(tag, id) in &st.members {
                assert_eq!(p.location(id), Some((st.id, tag)));
                assert_eq!(st.member(tag), Some(id));
            }
        }
        // every entry is reachable through its tag
        for t in tree.tables() {
            for e in t.entries() {
                let chunk = e.key.bits.pad_to(t.stride_width, false);
                assert!(p.lookup(&tree, t.id, chunk).is_some());
            }
        }
    }

    #[test]
    fn grouping_disabled_overflows() {
        let tree = tree_with_children(&[1, 1, 1], 6);
        let mut cfg = PackingConfig::new(1);
        cfg.grouping = false;
        assert!(matches!(
            tag_and_pack(&tree, GrainSpec::default(), cfg),
            Err(Error::TagOverflow { level: 1, tables: 3, capacity: 2 })
        ));
    }

    #[test]
    fn costly_group_splits() {
        // 40-bit stride plus 9 tag bits needs two columns; two 300-entry
        // tables cost 2 alone but 4 packed
        let tree = tree_with_children(&[300, 300], 40);
        let p = tag_and_pack(&tree, GrainSpec::default(), PackingConfig::new(9)).unwrap();
        assert_eq!(p.at_level(1).count(), 2);
        assert!(p.at_level(1).all(|s| s.tag_bits == 0));
        assert_eq!(p.post_tag_blocks(), tree.blocks_pre_tag(p.grain));
    }

    #[test]
    fn entry_cap_closes_groups() {
        let tree = tree_with_children(&[300, 300, 300], 10);
        let mut cfg = PackingConfig::new(9);
        cfg.max_group_entries = Some(600);
        let p = tag_and_pack(&tree, GrainSpec::default(), cfg).unwrap();
        let sizes: Vec<_> = p.at_level(1).map(|s| s.total_entries).collect();
        assert_eq!(sizes, vec![600, 300]);
    }

    #[test]
    fn report_formats() {
        assert_eq!(Improvement::new(574, 287).to_string(), "2.000");
        assert_eq!(Improvement::new(1762, 235).to_string(), "7.498");
        assert_eq!(Improvement::new(5, 0).to_string(), "infinite");
        assert_eq!(SramPageSpec::default().pages_for(0), 0);
        assert_eq!(SramPageSpec::default().pages_for(1025), 2);

        let tree = build_tree(&six_prefixes(), &"3-3".parse().unwrap()).unwrap();
        let p = tag_and_pack(&tree, GrainSpec::default(), PackingConfig::new(9)).unwrap();
        let r = resource_totals(&tree, &p, 0, SramPageSpec::default(), 1);
        assert_eq!(r.tcam_blocks_pre_tag, 2);
        assert_eq!(r.tcam_blocks_post_tag, 2);
        assert_eq!(r.tcam_bits, 2 * 44 * 512);
        assert_eq!(r.sram_pages, 0);
        assert_eq!(r.improvement_factor.to_string(), "0.500");
    }
}

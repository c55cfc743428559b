use std::cmp::Reverse;
use std::collections::BTreeSet;
use std::fmt;

use rustc_hash::FxHashMap;
use serde::Serialize;

use super::{blocks_for_table, GrainSpec, StrideList};
use crate::bits::{mask, Bits};
use crate::error::{Error, Result};
use crate::prefixdb::{NextHop, Prefix, PrefixDatabase};
use crate::trie::{expand_prefixes, expansion_size};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TableId(pub usize);

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TableKind {
    Tcam,
    Sram,
}

/// A ternary key: `bits` are the specified leading bits, the remaining
/// `width - bits.len()` positions are don't-cares.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct TernaryKey {
    pub bits: Bits,
    pub width: usize,
}

impl TernaryKey {
    pub fn specified(&self) -> usize {
        self.bits.len()
    }

    pub fn matches(&self, key: Bits) -> bool {
        self.bits.is_prefix_of(key)
    }
}

impl fmt::Display for TernaryKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bits)?;
        for _ in self.bits.len()..self.width {
            f.write_str("*")?;
        }
        Ok(())
    }
}

impl fmt::Debug for TernaryKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Best matching prefix carried by an entry: the next hop and the absolute
/// length of the database prefix it came from.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Bmp {
    pub hop: NextHop,
    pub len: usize,
}

impl Bmp {
    fn of(p: &Prefix) -> Self {
        Bmp {
            hop: p.next_hop.clone(),
            len: p.len(),
        }
    }
}

/// Pointer to a child table. `kind` is the bit telling the next stage
/// whether to run a TCAM or an SRAM lookup.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ChildRef {
    pub table: TableId,
    pub kind: TableKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableEntry {
    pub key: TernaryKey,
    pub bmp: Option<Bmp>,
    /// A database prefix ends at this entry (as opposed to a stub that only
    /// inherits the local best match).
    pub terminal: bool,
    pub child: Option<ChildRef>,
    /// Insertion sequence; breaks priority ties in database order.
    pub seq: u64,
}

impl TableEntry {
    pub fn is_stub(&self) -> bool {
        self.child.is_some()
    }

    fn rank(&self) -> Rank {
        (Reverse(self.key.specified()), self.seq, self.key.bits)
    }
}

type Rank = (Reverse<usize>, u64, Bits);

/// Result of one table lookup.
#[derive(Clone, Copy, Debug)]
pub struct Hit<'a> {
    pub bmp: Option<&'a Bmp>,
    pub child: Option<ChildRef>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SramSlot {
    pub bmp: Option<Bmp>,
    pub child: Option<ChildRef>,
}

/// Exact-match image of a table whose entries were expanded to `key_len`
/// bits.
#[derive(Clone, Debug, Default)]
pub struct SramImage {
    pub key_len: usize,
    pub slots: FxHashMap<u128, SramSlot>,
}

impl SramImage {
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }
}

/// One node of the tree: a match table over `stride_width` address bits
/// starting at `start_bit`.
#[derive(Clone, Debug)]
pub struct TreeTable {
    pub id: TableId,
    pub level_index: usize,
    pub start_bit: usize,
    pub stride_width: usize,
    pub kind: TableKind,
    pub parent: Option<TableId>,
    slots: FxHashMap<Bits, TableEntry>,
    order: BTreeSet<Rank>,
    len_counts: Vec<u32>,
    probe: Vec<usize>,
    stubs: BTreeSet<u128>,
    sram: Option<SramImage>,
}

impl TreeTable {
    fn new(id: TableId, level_index: usize, start_bit: usize, stride_width: usize, parent: Option<TableId>) -> Self {
        TreeTable {
            id,
            level_index,
            start_bit,
            stride_width,
            kind: TableKind::Tcam,
            parent,
            slots: FxHashMap::default(),
            order: BTreeSet::new(),
            len_counts: vec![0; stride_width + 1],
            probe: Vec::new(),
            stubs: BTreeSet::new(),
            sram: None,
        }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Entries in TCAM priority order: most specified bits first, then
    /// insertion order.
    pub fn entries(&self) -> impl Iterator<Item = &TableEntry> + '_ {
        self.order.iter().map(move |r| &self.slots[&r.2])
    }

    pub fn get(&self, bits: Bits) -> Option<&TableEntry> {
        self.slots.get(&bits)
    }

    pub fn stub_count(&self) -> usize {
        self.stubs.len()
    }

    pub fn terminal_count(&self) -> usize {
        self.slots.values().filter(|e| e.terminal).count()
    }

    /// Longest specified length among entries.
    pub fn max_local_length(&self) -> usize {
        self.probe.first().copied().unwrap_or(0)
    }

    pub fn sram_image(&self) -> Option<&SramImage> {
        self.sram.as_ref()
    }

    /// Block cost as a stand-alone TCAM table.
    pub fn blocks(&self, grain: GrainSpec) -> u64 {
        blocks_for_table(self.stride_width, self.len(), grain)
    }

    /// First-match TCAM semantics over the `stride_width`-bit chunk.
    pub fn tcam_lookup(&self, chunk: Bits) -> Option<&TableEntry> {
        debug_assert_eq!(chunk.len(), self.stride_width);
        self.probe.iter().find_map(|&l| self.slots.get(&chunk.prefix(l)))
    }

    /// Lookup honouring the table kind.
    pub fn lookup(&self, chunk: Bits) -> Option<Hit<'_>> {
        match (&self.kind, &self.sram) {
            (TableKind::Sram, Some(img)) => img.slots.get(&chunk.prefix(img.key_len).value()).map(|s| Hit {
                bmp: s.bmp.as_ref(),
                child: s.child,
            }),
            _ => self.tcam_lookup(chunk).map(|e| Hit {
                bmp: e.bmp.as_ref(),
                child: e.child,
            }),
        }
    }

    /// Longest terminal entry that is a proper prefix of `key`.
    fn terminal_lpm(&self, key: Bits) -> Option<Bmp> {
        self.probe
            .iter()
            .filter(|&&l| l < key.len())
            .find_map(|&l| self.slots.get(&key.prefix(l)).filter(|e| e.terminal))
            .and_then(|e| e.bmp.clone())
    }

    fn insert_entry(&mut self, e: TableEntry) {
        let l = e.key.specified();
        self.len_counts[l] += 1;
        if self.len_counts[l] == 1 {
            self.reprobe();
        }
        if e.child.is_some() {
            self.stubs.insert(e.key.bits.value());
        }
        self.order.insert(e.rank());
        self.slots.insert(e.key.bits, e);
    }

    fn remove_entry(&mut self, bits: Bits) -> Option<TableEntry> {
        let e = self.slots.remove(&bits)?;
        self.order.remove(&e.rank());
        if e.child.is_some() {
            self.stubs.remove(&bits.value());
        }
        let l = e.key.specified();
        self.len_counts[l] -= 1;
        if self.len_counts[l] == 0 {
            self.reprobe();
        }
        Some(e)
    }

    fn reprobe(&mut self) {
        self.probe = (0..self.len_counts.len()).rev().filter(|&l| self.len_counts[l] > 0).collect();
    }

    fn set_child(&mut self, bits: Bits, child: ChildRef) {
        let e = self.slots.get_mut(&bits).expect("entry exists");
        e.child = Some(child);
        self.stubs.insert(bits.value());
    }

    /// Stub keys covered by the local prefix `local`, excluding `local` itself.
    fn covered_stubs(&self, local: Bits) -> Vec<Bits> {
        let free = (self.stride_width - local.len()) as u32;
        let lo = local.pad_to(self.stride_width, false).value();
        let hi = lo | mask(free);
        self.stubs
            .range(lo..=hi)
            .map(|&v| Bits::new(v, self.stride_width))
            .filter(|&b| b != local)
            .collect()
    }

    pub(crate) fn set_kind(&mut self, kind: TableKind) {
        self.kind = kind;
        if kind == TableKind::Tcam {
            self.sram = None;
        }
    }

    pub(crate) fn set_child_kind(&mut self, child: TableId, kind: TableKind) {
        for e in self.slots.values_mut() {
            if let Some(c) = e.child.as_mut().filter(|c| c.table == child) {
                c.kind = kind;
            }
        }
    }

    /// Number of distinct keys the entries cover once expanded to the
    /// longest local length.
    pub fn expanded_size(&self) -> u128 {
        expansion_size(self.slots.keys().copied(), self.max_local_length()).expect("entries fit the stride")
    }

    /// Expands every entry (stubs included) to the longest local length.
    pub fn expand(&self) -> SramImage {
        let key_len = self.max_local_length();
        let entries: Vec<(Bits, SramSlot)> = self
            .entries()
            .map(|e| {
                (
                    e.key.bits,
                    SramSlot {
                        bmp: e.bmp.clone(),
                        child: e.child,
                    },
                )
            })
            .collect();
        let slots = expand_prefixes(&entries, key_len)
            .expect("entries fit the stride")
            .into_iter()
            .collect();
        SramImage { key_len, slots }
    }

    /// [`TreeTable::expanded_size`] as if `extra` were also an entry.
    pub fn expanded_size_with(&self, extra: Bits) -> u128 {
        let target = self.max_local_length().max(extra.len());
        expansion_size(self.slots.keys().copied().chain([extra]), target).expect("entries fit the stride")
    }

    pub(crate) fn set_sram_image(&mut self, img: SramImage) {
        self.sram = Some(img);
    }

    fn refresh_sram(&mut self) {
        if self.kind == TableKind::Sram {
            self.sram = Some(self.expand());
        }
    }
}

/// What a tree-level insert touched.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InsertOutcome {
    /// Existing tables that gained an entry.
    pub grown: Vec<TableId>,
    /// Tables created for the new path, shallowest first.
    pub created: Vec<TableId>,
    /// Existing tables whose entries changed without growing (merges and
    /// stub best-match updates).
    pub touched: Vec<TableId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RemoveOutcome {
    pub table: TableId,
    /// False when the entry stayed behind as a stub.
    pub shrank: bool,
}

/// Tables an insert would grow or create, computed without mutating.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Footprint {
    /// Existing table that gains one entry, with the new local key.
    pub grows: Option<(TableId, Bits)>,
    /// Levels of tables the insert creates, shallowest first; each starts
    /// with one entry.
    pub created_levels: Vec<usize>,
}

/// Tree of match tables produced from a database and a stride list.
#[derive(Clone, Debug)]
pub struct TcamTree {
    address_width: usize,
    strides: StrideList,
    bounds: Vec<usize>,
    tables: Vec<TreeTable>,
    levels: Vec<Vec<TableId>>,
    next_seq: u64,
}

/// Builds the tree by inserting prefixes shortest first. A prefix that ends
/// inside a table becomes a (possibly don't-care padded) entry there; one
/// that crosses the table's boundary leaves a fully specified stub carrying
/// the table's local best match and continues in the stub's child.
pub fn build_tree(db: &PrefixDatabase, strides: &StrideList) -> Result<TcamTree> {
    let mut tree = TcamTree::empty(db.address_width(), strides.clone())?;
    let coverage = strides.coverage();
    if let Some(p) = db.entries().iter().find(|p| p.len() > coverage) {
        return Err(Error::PrefixExceedsCoverage {
            prefix: format!("{}/{}", p.bits, p.len()),
            coverage,
        });
    }
    let mut order: Vec<usize> = (0..db.len()).collect();
    order.sort_by_key(|&i| db.entries()[i].len());
    for i in order {
        tree.insert_with_seq(&db.entries()[i], i as u64)?;
    }
    tree.next_seq = db.len() as u64;
    Ok(tree)
}

impl TcamTree {
    pub fn empty(address_width: usize, strides: StrideList) -> Result<Self> {
        if strides.coverage() > address_width {
            return Err(Error::InvalidStrides(format!(
                "strides {strides} cover {} bits but addresses have {address_width}",
                strides.coverage()
            )));
        }
        let bounds = strides.cumulative();
        let root = TreeTable::new(TableId(0), 0, 0, strides.strides()[0], None);
        let mut levels = vec![Vec::new(); strides.height()];
        levels[0].push(TableId(0));
        Ok(TcamTree {
            address_width,
            strides,
            bounds,
            tables: vec![root],
            levels,
            next_seq: 0,
        })
    }

    pub fn address_width(&self) -> usize {
        self.address_width
    }

    pub fn stride_list(&self) -> &StrideList {
        &self.strides
    }

    pub fn coverage(&self) -> usize {
        self.strides.coverage()
    }

    pub fn root(&self) -> &TreeTable {
        &self.tables[0]
    }

    pub fn table(&self, id: TableId) -> &TreeTable {
        &self.tables[id.0]
    }

    pub(crate) fn table_mut(&mut self, id: TableId) -> &mut TreeTable {
        &mut self.tables[id.0]
    }

    pub fn tables(&self) -> &[TreeTable] {
        &self.tables
    }

    /// Table ids per level, in creation order.
    pub fn levels(&self) -> &[Vec<TableId>] {
        &self.levels
    }

    pub fn terminal_count(&self) -> usize {
        self.tables.iter().map(TreeTable::terminal_count).sum()
    }

    pub fn entry_count(&self) -> usize {
        self.tables.iter().map(TreeTable::len).sum()
    }

    /// Entries carrying a child pointer, per level. Level `k`'s stubs sit on
    /// the boundary at bit `cumulative[k + 1]`.
    pub fn stub_counts(&self) -> Vec<usize> {
        self.levels
            .iter()
            .map(|ids| ids.iter().map(|&t| self.table(t).stub_count()).sum())
            .collect()
    }

    /// Entries that exist only as pointers (no database prefix ends there).
    pub fn pure_stub_count(&self) -> usize {
        self.tables
            .iter()
            .flat_map(|t| t.slots.values())
            .filter(|e| e.is_stub() && !e.terminal)
            .count()
    }

    /// Per-table block sum before any packing.
    pub fn blocks_pre_tag(&self, grain: GrainSpec) -> u64 {
        self.tables
            .iter()
            .filter(|t| t.kind == TableKind::Tcam)
            .map(|t| t.blocks(grain))
            .sum()
    }

    fn chunk(&self, address: Bits, table: &TreeTable) -> Bits {
        address.slice(table.start_bit, table.stride_width)
    }

    /// Walks from the root: on a hit, take the entry's best match if it has
    /// one and descend to its child; stop on a miss or at a leaf.
    pub fn search(&self, address: Bits) -> Option<&Bmp> {
        debug_assert_eq!(address.len(), self.address_width);
        let mut table = self.root();
        let mut best = None;
        loop {
            let Some(hit) = table.lookup(self.chunk(address, table)) else {
                return best;
            };
            if hit.bmp.is_some() {
                best = hit.bmp;
            }
            match hit.child {
                Some(c) => table = self.table(c.table),
                None => return best,
            }
        }
    }

    fn new_table(&mut self, level: usize, parent: TableId) -> TableId {
        let id = TableId(self.tables.len());
        self.tables.push(TreeTable::new(
            id,
            level,
            self.bounds[level],
            self.strides.strides()[level],
            Some(parent),
        ));
        self.levels[level].push(id);
        id
    }

    /// Inserts one prefix. Tables are created on demand; stubs covered by a
    /// new terminal entry pick it up as their best match when it is longer.
    pub fn insert(&mut self, p: &Prefix) -> Result<InsertOutcome> {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.insert_with_seq(p, seq)
    }

    fn insert_with_seq(&mut self, p: &Prefix, seq: u64) -> Result<InsertOutcome> {
        if p.len() > self.coverage() {
            return Err(Error::PrefixExceedsCoverage {
                prefix: format!("{}/{}", p.bits, p.len()),
                coverage: self.coverage(),
            });
        }
        if self.contains(p.bits) {
            return Err(Error::DuplicatePrefix {
                line: 0,
                prefix: format!("{}/{}", p.bits, p.len()),
            });
        }
        let mut out = InsertOutcome::default();
        let mut at = TableId(0);
        loop {
            let (start, stride, level) = {
                let t = self.table(at);
                (t.start_bit, t.stride_width, t.level_index)
            };
            if p.len() <= start + stride {
                let local = p.bits.skip(start);
                let bmp = Bmp::of(p);
                let t = self.table_mut(at);
                if let Some(e) = t.slots.get_mut(&local) {
                    debug_assert!(!e.terminal);
                    e.bmp = Some(bmp.clone());
                    e.terminal = true;
                    out.touched.push(at);
                } else {
                    t.insert_entry(TableEntry {
                        key: TernaryKey { bits: local, width: stride },
                        bmp: Some(bmp.clone()),
                        terminal: true,
                        child: None,
                        seq,
                    });
                    if !out.created.contains(&at) {
                        out.grown.push(at);
                    }
                }
                let mut updated = false;
                for s in t.covered_stubs(local) {
                    let e = t.slots.get_mut(&s).expect("stub");
                    if e.bmp.as_ref().is_none_or(|b| b.len < bmp.len) {
                        e.bmp = Some(bmp.clone());
                        updated = true;
                    }
                }
                if updated && !out.touched.contains(&at) {
                    out.touched.push(at);
                }
                for id in out.grown.iter().chain(&out.touched).copied().collect::<Vec<_>>() {
                    self.table_mut(id).refresh_sram();
                }
                return Ok(out);
            }
            let stub = p.bits.slice(start, stride);
            let existing = self.table(at).get(stub).map(|e| e.child);
            at = match existing {
                Some(Some(c)) => c.table,
                Some(None) => {
                    let child = self.new_table(level + 1, at);
                    self.table_mut(at).set_child(
                        stub,
                        ChildRef {
                            table: child,
                            kind: TableKind::Tcam,
                        },
                    );
                    out.touched.push(at);
                    out.created.push(child);
                    child
                }
                None => {
                    let child = self.new_table(level + 1, at);
                    let t = self.table_mut(at);
                    let bmp = t.terminal_lpm(stub);
                    t.insert_entry(TableEntry {
                        key: TernaryKey { bits: stub, width: stride },
                        bmp,
                        terminal: false,
                        child: Some(ChildRef {
                            table: child,
                            kind: TableKind::Tcam,
                        }),
                        seq,
                    });
                    if !out.created.contains(&at) {
                        out.grown.push(at);
                    }
                    out.created.push(child);
                    child
                }
            };
        }
    }

    /// What [`TcamTree::insert`] would do for `p`, assuming it is neither a
    /// duplicate nor longer than the coverage.
    pub fn insert_footprint(&self, p: &Prefix) -> Footprint {
        let mut fp = Footprint::default();
        let mut at = TableId(0);
        loop {
            let t = self.table(at);
            let end = t.start_bit + t.stride_width;
            let key = if p.len() <= end {
                p.bits.skip(t.start_bit)
            } else {
                p.bits.slice(t.start_bit, t.stride_width)
            };
            let existing = t.get(key);
            if existing.is_none() {
                fp.grows = Some((at, key));
            }
            if p.len() <= end {
                return fp;
            }
            match existing.and_then(|e| e.child) {
                Some(c) => at = c.table,
                None => {
                    let last = self.bounds.iter().position(|&b| b >= p.len()).expect("within coverage") - 1;
                    fp.created_levels = (t.level_index + 1..=last).collect();
                    return fp;
                }
            }
        }
    }

    /// Rewrites the next hop of a terminal entry in place, leaving stubs
    /// that copied it untouched. Used to plant faults for negative tests.
    pub fn corrupt_hop(&mut self, bits: Bits, hop: NextHop) -> Result<()> {
        let at = self
            .locate(bits)
            .ok_or_else(|| Error::NotFound(format!("{bits}/{}", bits.len())))?;
        let t = self.table_mut(at);
        let local = bits.skip(t.start_bit);
        t.slots.get_mut(&local).and_then(|e| e.bmp.as_mut()).expect("terminal").hop = hop;
        t.refresh_sram();
        Ok(())
    }

    /// Table holding the terminal entry for `bits`, if present.
    pub fn locate(&self, bits: Bits) -> Option<TableId> {
        if bits.len() > self.coverage() {
            return None;
        }
        let mut at = TableId(0);
        loop {
            let t = self.table(at);
            let end = t.start_bit + t.stride_width;
            if bits.len() <= end {
                let local = bits.skip(t.start_bit);
                return t.get(local).filter(|e| e.terminal).map(|_| at);
            }
            at = t.get(bits.slice(t.start_bit, t.stride_width))?.child?.table;
        }
    }

    pub fn contains(&self, bits: Bits) -> bool {
        self.locate(bits).is_some()
    }

    /// Removes a terminal entry. An entry that also carries a child reverts
    /// to a stub holding the local best match; emptied child tables are left
    /// in place until [`TcamTree::collect_garbage`].
    pub fn remove(&mut self, bits: Bits) -> Result<RemoveOutcome> {
        let at = self
            .locate(bits)
            .ok_or_else(|| Error::NotFound(format!("{bits}/{}", bits.len())))?;
        let t = self.table_mut(at);
        let local = bits.skip(t.start_bit);
        let shrank = if t.get(local).is_some_and(TableEntry::is_stub) {
            let lpm = t.terminal_lpm(local);
            let e = t.slots.get_mut(&local).expect("entry");
            e.terminal = false;
            e.bmp = lpm;
            false
        } else {
            t.remove_entry(local);
            true
        };
        for s in t.covered_stubs(local) {
            if t.get(s).and_then(|e| e.bmp.as_ref()).is_some_and(|b| b.len == bits.len()) {
                let lpm = t.terminal_lpm(s);
                t.slots.get_mut(&s).expect("stub").bmp = lpm;
            }
        }
        t.refresh_sram();
        Ok(RemoveOutcome { table: at, shrank })
    }

    /// Drops stub-only entries whose child tables hold nothing, bottom-up.
    /// Detached tables stay in the arena, empty. Returns the number of stubs
    /// removed.
    pub fn collect_garbage(&mut self) -> usize {
        let mut removed = 0;
        for level in (0..self.levels.len()).rev() {
            for id in self.levels[level].clone() {
                let dead: Vec<Bits> = self
                    .table(id)
                    .slots
                    .values()
                    .filter(|e| !e.terminal)
                    .filter(|e| e.child.is_some_and(|c| self.table(c.table).is_empty()))
                    .map(|e| e.key.bits)
                    .collect();
                for bits in &dead {
                    let child = self.table(id).get(*bits).and_then(|e| e.child).expect("stub");
                    self.table_mut(id).remove_entry(*bits);
                    self.table_mut(child.table).parent = None;
                    removed += 1;
                }
                if !dead.is_empty() {
                    self.table_mut(id).refresh_sram();
                }
            }
        }
        removed
    }

    /// Database prefixes currently stored in the tree, in table order.
    pub fn prefixes(&self) -> Vec<Prefix> {
        let mut out = Vec::new();
        for t in &self.tables {
            for e in t.entries().filter(|e| e.terminal) {
                let bmp = e.bmp.as_ref().expect("terminal has bmp");
                let path = self.path_to(t.id);
                out.push(Prefix::new(path.concat(e.key.bits), bmp.hop.clone()));
            }
        }
        out
    }

    /// Address bits leading to a table: the concatenated stub keys above it.
    pub fn path_to(&self, id: TableId) -> Bits {
        let mut parts = Vec::new();
        let mut at = id;
        while let Some(parent) = self.table(at).parent {
            let key = self
                .table(parent)
                .slots
                .values()
                .find(|e| e.child.is_some_and(|c| c.table == at))
                .map(|e| e.key.bits)
                .expect("parent points at child");
            parts.push(key);
            at = parent;
        }
        parts.into_iter().rev().fold(Bits::EMPTY, Bits::concat)
    }
}

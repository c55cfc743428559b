//! Unibit trie, lean-level statistics and controlled prefix expansion.

use std::collections::BTreeMap;
use std::io::Write;

use crate::bits::{pow2_saturating, Bits};
use crate::error::{Error, Result};
use crate::numfmt::{fmt_decimal, Rational};
use crate::prefixdb::{NextHop, PrefixDatabase};

const NONE: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub struct TrieNode {
    pub depth: usize,
    children: [u32; 2],
    pub stored_value: Option<NextHop>,
}

impl TrieNode {
    pub fn child(&self, bit: bool) -> Option<usize> {
        let c = self.children[bit as usize];
        (c != NONE).then_some(c as usize)
    }

    pub fn is_leaf(&self) -> bool {
        self.children == [NONE, NONE]
    }
}

/// Binary trie over a prefix database. Node 0 is the root.
#[derive(Clone, Debug)]
pub struct UnibitTrie {
    width: usize,
    nodes: Vec<TrieNode>,
}

pub fn build_unibit_trie(db: &PrefixDatabase) -> UnibitTrie {
    let mut nodes = vec![TrieNode {
        depth: 0,
        children: [NONE, NONE],
        stored_value: None,
    }];
    for p in db.entries() {
        let mut at = 0usize;
        for i in 0..p.len() {
            let bit = p.bits.bit(i) as usize;
            let next = nodes[at].children[bit];
            at = if next == NONE {
                let id = nodes.len();
                nodes.push(TrieNode {
                    depth: i + 1,
                    children: [NONE, NONE],
                    stored_value: None,
                });
                nodes[at].children[bit] = id as u32;
                id
            } else {
                next as usize
            };
        }
        nodes[at].stored_value = Some(p.next_hop.clone());
    }
    UnibitTrie {
        width: db.address_width(),
        nodes,
    }
}

impl UnibitTrie {
    pub fn address_width(&self) -> usize {
        self.width
    }

    pub fn root(&self) -> &TrieNode {
        &self.nodes[0]
    }

    pub fn node(&self, id: usize) -> &TrieNode {
        &self.nodes[id]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Follows `path` from the root.
    pub fn find(&self, path: Bits) -> Option<&TrieNode> {
        let mut at = 0;
        for i in 0..path.len() {
            at = self.nodes[at].child(path.bit(i))?;
        }
        Some(&self.nodes[at])
    }

    /// Walks the address and returns the deepest stored value and its depth.
    pub fn lookup(&self, address: Bits) -> Option<(&NextHop, usize)> {
        let mut best = self.nodes[0].stored_value.as_ref().map(|v| (v, 0));
        let mut at = 0;
        for i in 0..address.len() {
            match self.nodes[at].child(address.bit(i)) {
                Some(c) => at = c,
                None => break,
            }
            if let Some(v) = &self.nodes[at].stored_value {
                best = Some((v, i + 1));
            }
        }
        best
    }

    /// Non-leaf node count per depth, `0..=address_width`.
    pub fn nonleaf_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.width + 1];
        for n in &self.nodes {
            if !n.is_leaf() {
                counts[n.depth] += 1;
            }
        }
        counts
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeanLevel {
    pub depth: usize,
    pub nonleaf_count: u64,
    /// `100 * nonleaf_count / N`, kept exact.
    pub b: Rational,
    pub worst_overhead_percent: Rational,
}

/// Per-depth pointer overhead of cutting the trie at that depth.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeanLevelTable {
    n: u64,
    levels: Vec<LeanLevel>,
}

pub fn compute_lean_levels(trie: &UnibitTrie, n: usize) -> Result<LeanLevelTable> {
    if n == 0 {
        return Err(Error::EmptyDatabase);
    }
    let n = n as u64;
    let levels = trie
        .nonleaf_counts()
        .into_iter()
        .enumerate()
        .map(|(depth, c)| {
            let b = Rational::new(100 * c, n);
            LeanLevel {
                depth,
                nonleaf_count: c,
                b,
                worst_overhead_percent: b * 2,
            }
        })
        .collect();
    Ok(LeanLevelTable { n, levels })
}

impl LeanLevelTable {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn max_depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, depth: usize) -> Option<&LeanLevel> {
        self.levels.get(depth)
    }

    pub fn levels(&self) -> &[LeanLevel] {
        &self.levels
    }

    pub fn nonleaf_count(&self, depth: usize) -> u64 {
        self.levels.get(depth).map_or(0, |l| l.nonleaf_count)
    }

    /// Writes `level,b_percent,worst_overhead_percent` rows for depths
    /// `1..=max_level`, rounded to two decimals.
    pub fn write_csv<W: Write>(&self, max_level: usize, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["level", "b_percent", "worst_overhead_percent"]).map_err(io)?;
        for l in self.levels.iter().skip(1).take(max_level) {
            w.write_record([
                l.depth.to_string(),
                fmt_decimal(l.b, 2),
                fmt_decimal(l.worst_overhead_percent, 2),
            ])
            .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Number of distinct `target`-bit keys covered by at least one entry,
/// computed without materializing the expansion. Saturates at `u128::MAX`.
pub fn expansion_size(entries: impl IntoIterator<Item = Bits>, target: usize) -> Result<u128> {
    let mut spans = Vec::new();
    for e in entries {
        if e.len() > target {
            return Err(Error::TargetTooShort {
                length: e.len(),
                target,
            });
        }
        spans.push(e);
    }
    // Prefix ranges are either nested or disjoint: a sorted sweep that skips
    // anything inside the last kept range counts the union.
    spans.sort_by_key(|b| (b.pad_to(target, false).value(), b.len()));
    let mut total = 0u128;
    let mut last: Option<Bits> = None;
    for s in spans {
        if last.is_some_and(|l| l.is_prefix_of(s)) {
            continue;
        }
        total = total.saturating_add(pow2_saturating((target - s.len()) as u32));
        last = Some(s);
    }
    Ok(total)
}

/// Rewrites variable-length entries as fixed `target`-bit keys. A key
/// produced by several entries takes the value of the longest one; among
/// equal lengths the earliest entry wins.
pub fn expand_prefixes<V: Clone>(entries: &[(Bits, V)], target: usize) -> Result<BTreeMap<u128, V>> {
    if let Some((b, _)) = entries.iter().find(|(b, _)| b.len() > target) {
        return Err(Error::TargetTooShort {
            length: b.len(),
            target,
        });
    }
    let mut order: Vec<usize> = (0..entries.len()).collect();
    // Longest first, so each key is written once by its winner.
    order.sort_by_key(|&i| std::cmp::Reverse(entries[i].0.len()));
    let mut out = BTreeMap::new();
    for i in order {
        let (bits, v) = &entries[i];
        let free = (target - bits.len()) as u32;
        let base = bits.pad_to(target, false).value();
        let span = pow2_saturating(free);
        let mut k = 0u128;
        while k < span {
            out.entry(base + k).or_insert_with(|| v.clone());
            if k == u128::MAX {
                break;
            }
            k += 1;
        }
    }
    Ok(out)
}

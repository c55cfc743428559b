//! Prefix databases: the canonical text format, validation, and the
//! brute-force longest-prefix-match oracle every plan is checked against.
//!
//! The canonical line format is
//!
//! ```text
//! <bits>/<len> <next_hop>     # comment
//! ```
//!
//! where `<bits>` is a string of `0`/`1` (trailing `*` allowed past `len`),
//! a dotted IPv4 address (width 32 only) or an IPv6 address (the first
//! `address_width` bits are kept). Bits past `len` are ignored.

use std::collections::HashSet;
use std::fmt;
use std::net::{Ipv4Addr, Ipv6Addr};
use std::sync::Arc;

use rustc_hash::FxHashMap;
use serde::{Serialize, Serializer};

use crate::bits::{Bits, MAX_WIDTH};
use crate::error::{Error, Result};
use crate::numfmt::Rational;

/// Label reported when no prefix matches.
pub const DEFAULT_HOP: &str = "default";

/// Opaque next-hop label. Cheap to clone.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NextHop(Arc<str>);

impl NextHop {
    pub fn new(s: &str) -> Self {
        NextHop(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for NextHop {
    fn from(s: &str) -> Self {
        NextHop::new(s)
    }
}

impl From<String> for NextHop {
    fn from(s: String) -> Self {
        NextHop::new(&s)
    }
}

impl fmt::Display for NextHop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for NextHop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl Serialize for NextHop {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

/// Renders a lookup result, mapping a miss to [`DEFAULT_HOP`].
pub fn hop_or_default(hop: Option<&NextHop>) -> &str {
    hop.map_or(DEFAULT_HOP, NextHop::as_str)
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Prefix {
    pub bits: Bits,
    pub next_hop: NextHop,
}

impl Prefix {
    pub fn new(bits: Bits, next_hop: impl Into<NextHop>) -> Self {
        Prefix {
            bits,
            next_hop: next_hop.into(),
        }
    }

    /// Shorthand for tests and examples: `Prefix::parse("1000", "B")`.
    pub fn parse(bits: &str, next_hop: &str) -> Self {
        Prefix::new(Bits::parse_binary(bits).expect("binary string"), next_hop)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn matches(&self, address: Bits) -> bool {
        self.bits.is_prefix_of(address)
    }

    /// `100***` style rendering at the given width.
    pub fn ternary(&self, width: usize) -> String {
        let mut s = self.bits.to_string();
        s.extend(std::iter::repeat_n('*', width.saturating_sub(self.len())));
        s
    }
}

impl fmt::Debug for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{} {}", self.bits, self.len(), self.next_hop)
    }
}

/// An ordered, duplicate-free set of prefixes over a fixed address width.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrefixDatabase {
    address_width: usize,
    entries: Vec<Prefix>,
    /// Bits of every entry; mirrors `entries`.
    keys: HashSet<Bits>,
}

impl PrefixDatabase {
    pub fn new(address_width: usize) -> Result<Self> {
        if address_width == 0 || address_width > MAX_WIDTH {
            return Err(Error::BadAddressWidth(address_width));
        }
        Ok(PrefixDatabase {
            address_width,
            entries: Vec::new(),
            keys: HashSet::new(),
        })
    }

    /// Builds from prefixes, rejecting duplicates and over-long entries.
    /// Error line numbers are 1-based positions in `prefixes`.
    pub fn from_prefixes(address_width: usize, prefixes: impl IntoIterator<Item = Prefix>) -> Result<Self> {
        let mut db = PrefixDatabase::new(address_width)?;
        for (i, p) in prefixes.into_iter().enumerate() {
            db.insert_checked(p, i + 1)?;
        }
        Ok(db)
    }

    fn insert_checked(&mut self, p: Prefix, line: usize) -> Result<()> {
        if p.len() > self.address_width {
            return Err(Error::LengthOutOfRange {
                line,
                length: p.len(),
                max: self.address_width,
            });
        }
        if p.next_hop.as_str().is_empty() {
            return Err(Error::MalformedLine {
                line,
                reason: "empty next hop".into(),
            });
        }
        if !self.keys.insert(p.bits) {
            return Err(Error::DuplicatePrefix {
                line,
                prefix: format!("{}/{}", p.bits, p.len()),
            });
        }
        self.entries.push(p);
        Ok(())
    }

    pub fn address_width(&self) -> usize {
        self.address_width
    }

    pub fn entries(&self) -> &[Prefix] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Longest prefix length present (`Max`); 0 for an empty database.
    pub fn max_len(&self) -> usize {
        self.entries.iter().map(Prefix::len).max().unwrap_or(0)
    }

    pub fn contains(&self, bits: Bits) -> bool {
        self.keys.contains(&bits)
    }

    /// Appends a prefix, rejecting duplicates.
    pub fn push(&mut self, p: Prefix) -> Result<()> {
        let line = self.entries.len() + 1;
        self.insert_checked(p, line)
    }

    /// Removes the prefix with these bits, returning it.
    pub fn remove(&mut self, bits: Bits) -> Option<Prefix> {
        if !self.keys.remove(&bits) {
            return None;
        }
        let i = self.entries.iter().position(|p| p.bits == bits)?;
        Some(self.entries.remove(i))
    }

    /// Canonical text form: bits zero-padded to the address width, LF endings.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for p in &self.entries {
            out.push_str(&format!(
                "{}/{} {}\n",
                p.bits.pad_to(self.address_width, false),
                p.len(),
                p.next_hop
            ));
        }
        out
    }
}

/// Parses the canonical text format. File order is preserved.
pub fn parse_database(text: &str, address_width: usize) -> Result<PrefixDatabase> {
    let mut db = PrefixDatabase::new(address_width)?;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let p = parse_line(content, line, address_width)?;
        db.insert_checked(p, line)?;
    }
    Ok(db)
}

fn parse_line(content: &str, line: usize, width: usize) -> Result<Prefix> {
    let malformed = |reason: &str| Error::MalformedLine {
        line,
        reason: reason.to_string(),
    };
    let mut tokens = content.split_whitespace();
    let (Some(prefix), Some(hop), None) = (tokens.next(), tokens.next(), tokens.next()) else {
        return Err(malformed("expected `<bits>/<len> <next_hop>`"));
    };
    let (addr, len) = prefix
        .split_once('/')
        .ok_or_else(|| malformed("missing `/<len>`"))?;
    let len: usize = len.parse().map_err(|_| malformed("prefix length is not an integer"))?;
    if len > width {
        return Err(Error::LengthOutOfRange {
            line,
            length: len,
            max: width,
        });
    }
    let bits = if addr.contains(':') || addr.contains('.') {
        parse_address(addr, width).map_err(malformed)?
    } else {
        if addr.len() > width {
            return Err(malformed("bit string longer than address width"));
        }
        if let Some(star) = addr.find('*') {
            if star < len || addr[star..].chars().any(|c| c != '*') {
                return Err(malformed("`*` inside the specified bits"));
            }
        }
        let digits = addr.trim_end_matches('*');
        let bits = Bits::parse_binary(digits).ok_or_else(|| malformed("bits must be 0, 1 or trailing *"))?;
        if bits.len() < len {
            return Err(malformed("fewer bits than the prefix length"));
        }
        bits
    };
    Ok(Prefix::new(bits.prefix(len), hop))
}

/// Parses one full-width address: `width` binary digits, dotted IPv4
/// (width 32 only), or IPv6 (its top `width` bits).
pub fn parse_address(token: &str, width: usize) -> std::result::Result<Bits, &'static str> {
    if token.contains(':') {
        let v6: Ipv6Addr = token.parse().map_err(|_| "bad IPv6 address")?;
        Ok(Bits::new(u128::from(v6), 128).prefix(width))
    } else if token.contains('.') {
        if width != 32 {
            return Err("dotted IPv4 needs address width 32");
        }
        let v4: Ipv4Addr = token.parse().map_err(|_| "bad IPv4 address")?;
        Ok(Bits::new(u32::from(v4) as u128, 32))
    } else {
        let bits = Bits::parse_binary(token).ok_or("bits must be 0 or 1")?;
        if bits.len() != width {
            return Err("binary address must have exactly the address width");
        }
        Ok(bits)
    }
}

/// Address trace: one address per line, `#` comments and blank lines
/// ignored.
pub fn parse_trace(text: &str, width: usize) -> Result<Vec<Bits>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        out.push(parse_address(content, width).map_err(|reason| Error::MalformedLine {
            line: i + 1,
            reason: reason.to_string(),
        })?);
    }
    Ok(out)
}

/// Reference longest-prefix match: a linear scan keeping the longest hit.
pub fn oracle_lookup(db: &PrefixDatabase, address: Bits) -> Option<&Prefix> {
    debug_assert_eq!(address.len(), db.address_width());
    let mut best: Option<&Prefix> = None;
    for p in db.entries() {
        if p.matches(address) && best.is_none_or(|b| p.len() > b.len()) {
            best = Some(p);
        }
    }
    best
}

/// The same semantics as [`oracle_lookup`], indexed by prefix length so it
/// can answer millions of queries. Probes lengths from longest to shortest.
#[derive(Clone, Debug)]
pub struct LengthIndexedOracle {
    width: usize,
    by_len: Vec<FxHashMap<u128, Prefix>>,
    lengths: Vec<usize>,
}

impl LengthIndexedOracle {
    pub fn new(db: &PrefixDatabase) -> Self {
        let mut by_len = vec![FxHashMap::default(); db.address_width() + 1];
        for p in db.entries() {
            by_len[p.len()].insert(p.bits.value(), p.clone());
        }
        let lengths = (0..by_len.len()).rev().filter(|&l| !by_len[l].is_empty()).collect();
        LengthIndexedOracle {
            width: db.address_width(),
            by_len,
            lengths,
        }
    }

    pub fn lookup(&self, address: Bits) -> Option<&Prefix> {
        debug_assert_eq!(address.len(), self.width);
        self.lengths
            .iter()
            .find_map(|&l| self.by_len[l].get(&address.prefix(l).value()))
    }
}

/// `M`: the smallest length covering at least `coverage` of the entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MaxThreshold {
    pub m: usize,
    pub coverage: Rational,
}

pub const DEFAULT_COVERAGE: (u64, u64) = (99, 100);

pub fn max_threshold_length(db: &PrefixDatabase, coverage: Rational) -> Result<MaxThreshold> {
    if *coverage.numer() == 0 || coverage > Rational::from_integer(1) {
        return Err(Error::InvalidCoverage(coverage.to_string()));
    }
    if db.is_empty() {
        return Err(Error::EmptyDatabase);
    }
    let mut per_len = vec![0u64; db.address_width() + 1];
    for p in db.entries() {
        per_len[p.len()] += 1;
    }
    let n = db.len() as u128;
    let (num, den) = (*coverage.numer() as u128, *coverage.denom() as u128);
    let mut covered = 0u128;
    for (m, count) in per_len.iter().enumerate() {
        covered += *count as u128;
        if covered * den >= num * n {
            return Ok(MaxThreshold { m, coverage });
        }
    }
    unreachable!("coverage <= 1 is always reached at the longest length")
}

//! Fixed-stride trees of match tables and their block costs.

mod choose;
mod tree;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

pub use choose::{choose_strides, FinalSegment, StrideCandidate, StrideSearchConfig};
pub use tree::{
    build_tree, Bmp, ChildRef, Footprint, Hit, InsertOutcome, RemoveOutcome, SramImage, SramSlot, TableEntry, TableId,
    TableKind, TcamTree, TernaryKey, TreeTable,
};

/// Physical TCAM block geometry: `width` ternary bits by `depth` entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct GrainSpec {
    pub width: usize,
    pub depth: usize,
}

impl GrainSpec {
    pub fn new(width: usize, depth: usize) -> Result<Self> {
        if width == 0 || depth == 0 {
            return Err(Error::InvalidConfig(format!("grain {width}x{depth} must be at least 1x1")));
        }
        Ok(GrainSpec { width, depth })
    }

    /// `ceil(log2 D)`: enough tag bits to tell `D` tables apart.
    pub fn default_tag_bits(&self) -> usize {
        ceil_log2(self.depth as u64)
    }

    pub fn block_bits(&self) -> u64 {
        (self.width * self.depth) as u64
    }
}

impl Default for GrainSpec {
    fn default() -> Self {
        GrainSpec { width: 44, depth: 512 }
    }
}

impl fmt::Display for GrainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.depth)
    }
}

impl FromStr for GrainSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("grain `{s}` is not WIDTHxDEPTH"));
        let (w, d) = s.split_once(['x', 'X']).ok_or_else(bad)?;
        GrainSpec::new(w.trim().parse().map_err(|_| bad())?, d.trim().parse().map_err(|_| bad())?)
    }
}

pub fn ceil_log2(x: u64) -> usize {
    if x <= 1 {
        0
    } else {
        (64 - (x - 1).leading_zeros()) as usize
    }
}

/// `ceil(width / W) * ceil(depth / D)`; an empty table costs nothing.
pub fn blocks_for_table(table_width: usize, table_depth: usize, grain: GrainSpec) -> u64 {
    if table_depth == 0 {
        return 0;
    }
    let x = table_width.div_ceil(grain.width);
    let y = table_depth.div_ceil(grain.depth);
    (x * y) as u64
}

/// Ordered stride widths; their sum is the number of address bits the tree
/// covers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(into = "String")]
pub struct StrideList {
    strides: Vec<usize>,
}

impl StrideList {
    pub fn new(strides: Vec<usize>) -> Result<Self> {
        if strides.is_empty() {
            return Err(Error::InvalidStrides("no strides".into()));
        }
        if strides.contains(&0) {
            return Err(Error::InvalidStrides("every stride must be at least 1".into()));
        }
        Ok(StrideList { strides })
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn height(&self) -> usize {
        self.strides.len()
    }

    pub fn coverage(&self) -> usize {
        self.strides.iter().sum()
    }

    /// Start bit of each level followed by the coverage: `[0, s0, s0+s1, ..]`.
    pub fn cumulative(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.strides.len() + 1);
        let mut acc = 0;
        out.push(0);
        for s in &self.strides {
            acc += s;
            out.push(acc);
        }
        out
    }

    /// Builds strides from interior cut points, e.g. cuts `[19, 48]` over 64
    /// bits gives `19-29-16`.
    pub fn from_cuts(cuts: &[usize], coverage: usize) -> Result<Self> {
        let mut prev = 0;
        let mut strides = Vec::with_capacity(cuts.len() + 1);
        for &c in cuts.iter().chain(std::iter::once(&coverage)) {
            if c <= prev {
                return Err(Error::InvalidStrides(format!("cut points must increase below {coverage}")));
            }
            strides.push(c - prev);
            prev = c;
        }
        StrideList::new(strides)
    }
}

impl fmt::Display for StrideList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.strides.iter().map(usize::to_string).collect();
        f.write_str(&parts.join("-"))
    }
}

impl From<StrideList> for String {
    fn from(s: StrideList) -> String {
        s.to_string()
    }
}

impl FromStr for StrideList {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let strides = s
            .split('-')
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::InvalidStrides(format!("`{s}` is not a hyphen-joined list of integers")))?;
        StrideList::new(strides)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_formula() {
        let g = GrainSpec::default();
        assert_eq!(blocks_for_table(64, 150_000, g), 2 * 293);
        assert_eq!(blocks_for_table(44, 512, g), 1);
        assert_eq!(blocks_for_table(48, 600, g), 4);
        assert_eq!(blocks_for_table(3, 0, g), 0);
        assert_eq!(blocks_for_table(0, 5, g), 0);
    }

    #[test]
    fn grain_parsing() {
        assert_eq!("44x512".parse::<GrainSpec>().unwrap(), GrainSpec::default());
        assert_eq!("22X256".parse::<GrainSpec>().unwrap(), GrainSpec { width: 22, depth: 256 });
        assert!("44".parse::<GrainSpec>().is_err());
        assert!("0x512".parse::<GrainSpec>().is_err());
        assert_eq!(GrainSpec::default().default_tag_bits(), 9);
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(600), 10);
    }

    #[test]
    fn stride_lists() {
        let s: StrideList = "19-29-16".parse().unwrap();
        assert_eq!(s.coverage(), 64);
        assert_eq!(s.cumulative(), vec![0, 19, 48, 64]);
        assert_eq!(s.to_string(), "19-29-16");
        assert_eq!(StrideList::from_cuts(&[19, 48], 64).unwrap(), s);
        assert!("19--16".parse::<StrideList>().is_err());
        assert!("0-6".parse::<StrideList>().is_err());
        assert!(StrideList::from_cuts(&[6], 6).is_err());
    }
}

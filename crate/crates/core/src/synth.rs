//! Synthetic prefix databases for tests, examples and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;
use rustc_hash::FxHashSet;

use crate::bits::{mask, Bits};
use crate::error::{Error, Result};
use crate::numfmt::Rational;
use crate::prefixdb::{Prefix, PrefixDatabase};
use crate::tiler::StrideList;

fn hop(i: usize) -> String {
    format!("h{i}")
}

/// Up to `n` distinct prefixes with lengths drawn uniformly from
/// `min_len..=width` and next hops from `hops` labels.
pub fn random_database<R: Rng>(rng: &mut R, width: usize, n: usize, min_len: usize, hops: usize) -> PrefixDatabase {
    let mut seen = FxHashSet::default();
    let mut prefixes = Vec::with_capacity(n);
    let mut attempts = 0;
    while prefixes.len() < n && attempts < n * 20 {
        attempts += 1;
        let len = rng.gen_range(min_len..=width);
        let bits = Bits::new(rng.gen::<u128>() & mask(len as u32), len);
        if seen.insert(bits) {
            prefixes.push(Prefix::new(bits, hop(rng.gen_range(0..hops.max(1)))));
        }
    }
    PrefixDatabase::from_prefixes(width, prefixes).expect("distinct prefixes within width")
}

/// Random composition of `coverage` into `height` positive strides.
pub fn random_strides<R: Rng>(rng: &mut R, coverage: usize, height: usize) -> StrideList {
    let height = height.clamp(1, coverage);
    let mut cuts: Vec<usize> = (1..coverage).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(height - 1).collect();
    cuts.sort_unstable();
    StrideList::from_cuts(&cuts, coverage).expect("increasing cuts")
}

/// Shape of a database with a known lean level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlantedLean {
    /// Address width; also the longest prefix length.
    pub width: usize,
    /// Depth whose non-leaf count is planted.
    pub cut: usize,
    pub n: usize,
    /// Non-leaf nodes at `cut` as a percentage of `n`.
    pub b: Rational,
}

impl PlantedLean {
    /// `floor(n * b / 100)`.
    pub fn roots(&self) -> usize {
        (Rational::from_integer(self.n as u64) * self.b / Rational::from_integer(100)).to_integer() as usize
    }

    /// Long prefixes hanging under the planted roots.
    pub fn long_count(&self) -> usize {
        self.n - self.short_count()
    }

    /// Prefixes ending at or above the cut: half a percent of `n`.
    pub fn short_count(&self) -> usize {
        self.n / 200
    }
}

/// Database whose trie has exactly `shape.roots()` non-leaf nodes at depth
/// `shape.cut`: every long prefix sits under one of that many random roots,
/// with lengths in the top five bits below the width so the width stays
/// the 99% threshold. A few short prefixes end above the cut.
pub fn planted_lean_database<R: Rng>(rng: &mut R, shape: PlantedLean) -> Result<PrefixDatabase> {
    let k = shape.roots();
    let tail = shape.width.saturating_sub(shape.cut);
    if k == 0 || shape.cut == 0 || tail < 5 || shape.cut > 64 || shape.width > 128 {
        return Err(Error::InvalidConfig(format!("cannot plant {k} roots at depth {} of {}", shape.cut, shape.width)));
    }
    if (k as u128) > (1u128 << shape.cut) {
        return Err(Error::InvalidConfig(format!("{k} roots do not fit at depth {}", shape.cut)));
    }
    let mut roots = FxHashSet::default();
    while roots.len() < k {
        roots.insert(rng.gen::<u128>() & mask(shape.cut as u32));
    }
    let mut roots: Vec<u128> = roots.into_iter().collect();
    roots.sort_unstable();

    let mut seen = FxHashSet::default();
    let mut prefixes = Vec::with_capacity(shape.n);
    // every root gets at least one child so each is non-leaf
    for i in 0..shape.long_count() {
        let root = if i < k { roots[i] } else { roots[rng.gen_range(0..k)] };
        loop {
            let len = rng.gen_range(shape.width - 4..=shape.width);
            let rest = len - shape.cut;
            let bits = Bits::new(root, shape.cut).concat(Bits::new(rng.gen::<u128>() & mask(rest as u32), rest));
            if seen.insert(bits) {
                prefixes.push(Prefix::new(bits, hop(i % 16)));
                break;
            }
        }
    }
    while prefixes.len() < shape.n {
        let len = rng.gen_range(shape.cut / 2..=shape.cut);
        let bits = Bits::new(rng.gen::<u128>() & mask(len as u32), len);
        if seen.insert(bits) {
            prefixes.push(Prefix::new(bits, hop(prefixes.len() % 16)));
        }
    }
    PrefixDatabase::from_prefixes(shape.width, prefixes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trie::{build_unibit_trie, compute_lean_levels};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_database_is_distinct() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let db = random_database(&mut rng, 12, 500, 0, 4);
        assert_eq!(db.len(), 500);
        assert!(db.entries().iter().all(|p| p.len() <= 12));
    }

    #[test]
    fn random_strides_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for h in 1..6 {
            let s = random_strides(&mut rng, 14, h);
            assert_eq!((s.coverage(), s.height()), (14, h));
        }
    }

    #[test]
    fn planted_level_has_planted_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let shape = PlantedLean {
            width: 40,
            cut: 12,
            n: 3000,
            b: Rational::new(1, 2),
        };
        let db = planted_lean_database(&mut rng, shape).unwrap();
        assert_eq!(db.len(), 3000);
        let lean = compute_lean_levels(&build_unibit_trie(&db), db.len()).unwrap();
        assert_eq!(lean.nonleaf_count(12), 15);
    }
}

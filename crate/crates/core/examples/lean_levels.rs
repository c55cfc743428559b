//! Per-depth non-leaf counts of the unibit trie for a synthetic database
//! with a planted lean level at depth 12.
//!
//! cargo run --example lean_levels

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tiletree::numfmt::{fmt_decimal, Rational};
use tiletree::synth::{planted_lean_database, PlantedLean};
use tiletree::trie::{build_unibit_trie, compute_lean_levels};

fn main() -> tiletree::Result<()> {
    let shape = PlantedLean {
        width: 40,
        cut: 12,
        n: 3000,
        b: Rational::from_integer(1),
    };
    let db = planted_lean_database(&mut ChaCha8Rng::seed_from_u64(7), shape)?;
    let lean = compute_lean_levels(&build_unibit_trie(&db), db.len())?;
    println!("depth  nonleaf  b%      worst%");
    for l in lean.levels().iter().filter(|l| l.depth <= 16) {
        println!(
            "{:>5}  {:>7}  {:>6}  {:>6}",
            l.depth,
            l.nonleaf_count,
            fmt_decimal(l.b, 2),
            fmt_decimal(l.worst_overhead_percent, 2)
        );
    }
    println!("planted: {} roots at depth {}", shape.roots(), shape.cut);
    Ok(())
}

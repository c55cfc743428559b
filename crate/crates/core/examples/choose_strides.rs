//! Enumerates three-level stride lists for a random 24-bit database and
//! keeps the ones whose pointer overhead stays under a budget.
//!
//! cargo run --example choose_strides

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tiletree::synth::random_database;
use tiletree::tiler::{choose_strides, FinalSegment, GrainSpec, StrideSearchConfig};
use tiletree::trie::{build_unibit_trie, compute_lean_levels};

fn main() -> tiletree::Result<()> {
    let db = random_database(&mut ChaCha8Rng::seed_from_u64(11), 24, 20_000, 8, 16);
    let lean = compute_lean_levels(&build_unibit_trie(&db), db.len())?;
    let mut cfg = StrideSearchConfig::new(3, 24, 50_000, GrainSpec::default());
    for rule in [FinalSegment::TerminalLevel, FinalSegment::LastChosenLevel] {
        cfg.final_segment = rule;
        let found = choose_strides(&cfg, &lean)?;
        println!("{} ({} candidates)", rule.describe(), found.len());
        for c in found.iter().take(5) {
            println!("  {:<10} overhead {}", c.strides.to_string(), c.overhead);
        }
    }
    Ok(())
}

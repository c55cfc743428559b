//! Checks a plan against the reference lookup exhaustively and by
//! sampling, then corrupts one entry and shows the check catching it.
//!
//! cargo run --example verify

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tiletree::plan::{Plan, PlanConfig, VerifyMode};
use tiletree::synth::random_database;

fn main() -> tiletree::Result<()> {
    let db = random_database(&mut ChaCha8Rng::seed_from_u64(2), 16, 5000, 4, 8);
    let mut plan = Plan::build(&db, PlanConfig::new(16, "8-8".parse().unwrap()))?;
    for mode in [VerifyMode::Exhaustive, VerifyMode::Sampled { samples: 10_000, seed: 4 }] {
        let r = plan.verify(mode)?;
        println!("{mode:?}: {} checked, passed {}", r.checked, r.passed());
    }
    let victim = plan.inject_fault().expect("non-empty database");
    let r = plan.verify(VerifyMode::Exhaustive)?;
    println!("after corrupting {}: {} mismatches", victim.bits, r.mismatch_count);
    if let Some(m) = r.mismatches.first() {
        println!("  {} got {} expected {}", m.address, m.got, m.expected);
    }
    Ok(())
}

//! Inserts and deletes prefixes on a plan with a nearly full pipeline.
//! Inserts that do not fit spill to the overflow buffer; lookups stay
//! correct throughout.
//!
//! cargo run --example updates

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tiletree::bits::mask;
use tiletree::pipeline::PipelineProfile;
use tiletree::plan::{Placement, Plan, PlanConfig, VerifyMode};
use tiletree::prefixdb::Prefix;
use tiletree::synth::random_database;
use tiletree::tiler::GrainSpec;
use tiletree::Bits;

fn main() -> tiletree::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let db = random_database(&mut rng, 12, 300, 0, 4);
    let mut cfg = PlanConfig {
        grain: GrainSpec::new(16, 16)?,
        ..PlanConfig::new(12, "4-6".parse().unwrap())
    };
    // give each stage only what the initial plan needs, so growth soon runs out
    let first = Plan::build(&db, cfg.clone())?;
    let used = first.pipeline().tcam_used().iter().copied().max().unwrap_or(1);
    cfg.profile = PipelineProfile::new(first.pipeline().stages_used(), used, 4);
    let mut plan = Plan::build(&db, cfg)?;
    println!("start: {} in overflow (longer than 10 bits)", plan.overflow().len());
    let (mut tree, mut spilled, mut deleted) = (0, 0, 0);
    for i in 0..300 {
        if i % 3 == 2 {
            let victim = plan.database().entries()[rng.gen_range(0..plan.database().len())].bits;
            plan.delete_prefix(victim)?;
            deleted += 1;
            continue;
        }
        let len = rng.gen_range(4..=10);
        let bits = Bits::new(rng.gen::<u128>() & mask(len), len as usize);
        match plan.insert_prefix(Prefix::new(bits, format!("n{}", i % 5))) {
            Ok(Placement::Tree) => tree += 1,
            Ok(Placement::Overflow) => spilled += 1,
            Err(tiletree::Error::DuplicatePrefix { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    println!("inserted {tree} into the tree, {spilled} into overflow; deleted {deleted}");
    println!("reclaimed {} dead stubs", plan.collect_garbage());
    let report = plan.verify(VerifyMode::Exhaustive)?;
    println!("exhaustive check: {} addresses, {} mismatches", report.checked, report.mismatch_count);
    Ok(())
}

//! Packs the tables of a 3-level tree into tagged super-tables and places
//! them on a pipeline loaded from TOML.
//!
//! cargo run --example pack_and_map

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tiletree::pipeline::{PipelineProfile, Unit};
use tiletree::plan::{Plan, PlanConfig};
use tiletree::synth::random_database;
use tiletree::tiler::GrainSpec;

fn main() -> tiletree::Result<()> {
    let db = random_database(&mut ChaCha8Rng::seed_from_u64(3), 16, 3000, 4, 8);
    let cfg = PlanConfig {
        grain: GrainSpec::new(16, 64)?,
        profile: PipelineProfile::from_toml_str(include_str!("../data/small-profile.toml"))?,
        ..PlanConfig::new(16, "6-5-5".parse().unwrap())
    };
    let plan = Plan::build(&db, cfg)?;
    let grain = plan.config().grain;
    for st in plan.packing().supertables() {
        let spans: Vec<String> = plan
            .pipeline()
            .spans(Unit::Tcam(st.id))
            .iter()
            .map(|s| format!("stage {} x{}", s.stage, s.count))
            .collect();
        println!(
            "level {} {}: {} tables, {} tag bits, {} entries, {} blocks, {} empty [{}]",
            st.level_index,
            Unit::Tcam(st.id),
            st.members.len(),
            st.tag_bits,
            st.total_entries,
            st.block_count(grain),
            st.empty_entries(grain),
            spans.join(", ")
        );
    }
    let r = plan.resources();
    println!(
        "blocks {} -> {}; stages used {}; per-stage {:?}",
        r.tcam_blocks_pre_tag,
        r.tcam_blocks_post_tag,
        plan.pipeline().stages_used(),
        plan.pipeline().tcam_used()
    );
    Ok(())
}

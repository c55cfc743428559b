//! Converts dense tables to SRAM at several expansion factors and shows
//! the TCAM and SRAM totals of each plan.
//!
//! cargo run --example hybridize

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tiletree::numfmt::Rational;
use tiletree::packing::HybridizationConfig;
use tiletree::plan::{Plan, PlanConfig, VerifyMode};
use tiletree::synth::random_database;

fn main() -> tiletree::Result<()> {
    let db = random_database(&mut ChaCha8Rng::seed_from_u64(5), 20, 30_000, 10, 16);
    let strides: tiletree::tiler::StrideList = "8-4-8".parse().unwrap();
    println!("factor  converted  tcam_blocks  sram_entries  sram_pages  verified");
    for factor in [None, Some((3, 2)), Some((3, 1)), Some((8, 1))] {
        let mut cfg = PlanConfig::new(20, strides.clone());
        if let Some((a, b)) = factor {
            cfg.hybridization = HybridizationConfig {
                enabled: true,
                ..HybridizationConfig::with_factor(Rational::new(a, b))
            };
        }
        let plan = Plan::build(&db, cfg)?;
        let r = plan.resources();
        let ok = plan.verify(VerifyMode::Sampled { samples: 20_000, seed: 1 })?.passed();
        let label = factor.map_or("off".to_string(), |(a, b)| Rational::new(a, b).to_string());
        println!(
            "{label:>6}  {:>9}  {:>11}  {:>12}  {:>10}  {ok}",
            plan.hybridization().converted.len(),
            r.tcam_blocks_post_tag,
            r.sram_entries,
            r.sram_pages
        );
    }
    Ok(())
}

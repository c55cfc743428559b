//! Single-TCAM versus tiled bits across grain widths at constant block
//! area, as CSV, on a database with a lean level at depth 22.
//!
//! cargo run --example grain_sweep

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tiletree::cli::cmd_sweep_grain;
use tiletree::numfmt::Rational;
use tiletree::plan::PlanConfig;
use tiletree::report::DepthRule;
use tiletree::synth::{planted_lean_database, PlantedLean};
use tiletree::tiler::GrainSpec;

fn main() -> tiletree::Result<()> {
    let shape = PlantedLean {
        width: 56,
        cut: 22,
        n: 40_000,
        b: Rational::from_integer(1),
    };
    let db = planted_lean_database(&mut ChaCha8Rng::seed_from_u64(8), shape)?;
    let cfg = PlanConfig::new(56, "22-34".parse().unwrap());
    let widths = [18, 20, 24, 32, 44, 64];
    print!("{}", cmd_sweep_grain(&db, &cfg, &widths, DepthRule::ConstantArea, GrainSpec::default())?);
    Ok(())
}

//! Closed-form resource bounds: the single-TCAM baseline, the maximum
//! savings factor, and the tiling condition at a lean level.
//!
//! cargo run --example bounds

use tiletree::bounds::{lower_bound_bits, max_savings_factor, single_tcam_baseline, tiling_condition_for};
use tiletree::numfmt::{fmt_decimal, Rational};
use tiletree::tiler::GrainSpec;

fn main() {
    let grain = GrainSpec::new(44, 512).unwrap();
    let n = 287 * 512;
    for width in [64, 48, 32] {
        let b = single_tcam_baseline(n, width, grain);
        println!("baseline N={n} width {width}: {} blocks, {} bits", b.blocks, b.bits);
    }
    println!("lower bound: {} bits", lower_bound_bits(n, grain));
    for m in [24, 32, 48, 64] {
        println!("max savings factor M={m}: {}", max_savings_factor(m, grain.width));
    }
    let t = tiling_condition_for(48, 19, Rational::new(3, 10), grain);
    println!(
        "tiling at level {}: lhs {} < {} is {}; entries grow by at most {}",
        t.level,
        t.lhs,
        t.width,
        t.feasible,
        fmt_decimal(t.epsilon_bound, 3)
    );
}

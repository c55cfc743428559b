//! Builds the six-prefix example database as a 3-3 tree and prints every
//! table, then looks up a few addresses.
//!
//! cargo run --example walkthrough

use tiletree::plan::{Plan, PlanConfig};
use tiletree::prefixdb::parse_database;
use tiletree::Bits;

fn main() -> tiletree::Result<()> {
    let db = parse_database(include_str!("../data/six-prefixes.txt"), 6)?;
    let plan = Plan::build(&db, PlanConfig::new(6, "3-3".parse().unwrap()))?;
    let tree = plan.tree();
    for t in tree.tables() {
        println!("{} level {} path {} ({:?})", t.id, t.level_index, tree.path_to(t.id), t.kind);
        for e in t.entries() {
            let hop = e.bmp.as_ref().map_or("-".to_string(), |b| format!("{}/{}", b.hop, b.len));
            let child = e.child.map_or(String::new(), |c| format!(" -> {}", c.table));
            println!("  {}  {hop}{child}", e.key);
        }
    }
    for a in ["100110", "101111", "100000", "011111"] {
        let addr = Bits::parse_binary(a).unwrap();
        println!("{a} -> {}", plan.search_hop(addr));
    }
    let r = plan.resources();
    println!("blocks: {} before tagging, {} after", r.tcam_blocks_pre_tag, r.tcam_blocks_post_tag);
    Ok(())
}

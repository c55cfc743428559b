use std::collections::BTreeSet;

use proptest::prelude::*;
use tiletree::bits::mask;
use tiletree::numfmt::Rational;
use tiletree::packing::{HybridizationConfig, SramPageSpec};
use tiletree::pipeline::PipelineProfile;
use tiletree::plan::{Plan, PlanConfig, VerifyMode};
use tiletree::prefixdb::{
    max_threshold_length, oracle_lookup, parse_database, LengthIndexedOracle, Prefix, PrefixDatabase,
};
use tiletree::tiler::{build_tree, GrainSpec, StrideList, TableKind};
use tiletree::trie::{build_unibit_trie, compute_lean_levels, expand_prefixes, expansion_size};
use tiletree::Bits;

fn database(width: usize, max_n: usize) -> impl Strategy<Value = PrefixDatabase> {
    prop::collection::vec((0..=width, any::<u128>(), 0..6usize), 1..=max_n).prop_map(move |raw| {
        let mut seen = BTreeSet::new();
        let prefixes: Vec<Prefix> = raw
            .into_iter()
            .map(|(len, v, h)| (Bits::new(v & mask(len as u32), len), h))
            .filter(|(b, _)| seen.insert(*b))
            .map(|(b, h)| Prefix::new(b, format!("h{h}")))
            .collect();
        PrefixDatabase::from_prefixes(width, prefixes).unwrap()
    })
}

/// A database together with a stride list covering its full width.
fn db_and_strides(max_n: usize) -> impl Strategy<Value = (PrefixDatabase, StrideList)> {
    (4..=10usize).prop_flat_map(move |w| {
        let cuts = prop::collection::btree_set(1..w, 0..w.min(4));
        (database(w, max_n), cuts).prop_map(move |(db, cuts)| {
            let cuts: Vec<usize> = cuts.into_iter().collect();
            (db, StrideList::from_cuts(&cuts, w).unwrap())
        })
    })
}

fn all_addresses(width: usize) -> impl Iterator<Item = Bits> {
    (0..1u128 << width).map(move |v| Bits::new(v, width))
}

fn small_config(width: usize, strides: StrideList) -> PlanConfig {
    PlanConfig {
        grain: GrainSpec::new(8, 16).unwrap(),
        profile: PipelineProfile::new(32, 4096, 4096),
        ..PlanConfig::new(width, strides)
    }
}

fn hybrid(factor: Rational) -> HybridizationConfig {
    HybridizationConfig {
        enabled: true,
        sram: SramPageSpec {
            page_width: 128,
            page_depth: 64,
        },
        ..HybridizationConfig::with_factor(factor)
    }
}

fn expected(oracle: &LengthIndexedOracle, a: Bits) -> Option<(String, usize)> {
    oracle.lookup(a).map(|p| (p.next_hop.as_str().to_string(), p.len()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn oracles_agree(db in (4..=10usize).prop_flat_map(|w| database(w, 60))) {
        let indexed = LengthIndexedOracle::new(&db);
        let trie = build_unibit_trie(&db);
        for a in all_addresses(db.address_width()) {
            let scan = oracle_lookup(&db, a).map(|p| (p.next_hop.clone(), p.len()));
            prop_assert_eq!(indexed.lookup(a).map(|p| (p.next_hop.clone(), p.len())), scan.clone());
            prop_assert_eq!(trie.lookup(a).map(|(h, l)| (h.clone(), l)), scan);
        }
    }

    #[test]
    fn parse_inverts_serialize(db in (1..=32usize).prop_flat_map(|w| database(w, 40))) {
        let text = db.serialize();
        let back = parse_database(&text, db.address_width()).unwrap();
        prop_assert_eq!(back.serialize(), text);
        prop_assert_eq!(back.len(), db.len());
    }

    #[test]
    fn threshold_monotone_in_coverage(db in (4..=16usize).prop_flat_map(|w| database(w, 80)), a in 1u64..=100, b in 1u64..=100) {
        let (lo, hi) = (a.min(b), a.max(b));
        let m_lo = max_threshold_length(&db, Rational::new(lo, 100)).unwrap().m;
        let m_hi = max_threshold_length(&db, Rational::new(hi, 100)).unwrap().m;
        prop_assert!(m_lo <= m_hi);
        prop_assert!(m_hi <= db.max_len());
    }

    #[test]
    fn nonleaf_counts_bounded(db in (4..=12usize).prop_flat_map(|w| database(w, 80))) {
        let lean = compute_lean_levels(&build_unibit_trie(&db), db.len()).unwrap();
        for h in 0..=lean.max_depth() {
            prop_assert!(lean.nonleaf_count(h) <= (1u64 << h).min(db.len() as u64));
        }
    }

    #[test]
    fn expansion_is_lpm(db in (2..=9usize).prop_flat_map(|w| database(w, 30))) {
        let w = db.address_width();
        let entries: Vec<(Bits, String)> =
            db.entries().iter().map(|p| (p.bits, p.next_hop.as_str().to_string())).collect();
        let image = expand_prefixes(&entries, w).unwrap();
        prop_assert_eq!(expansion_size(entries.iter().map(|e| e.0), w).unwrap(), image.len() as u128);
        for a in all_addresses(w) {
            let want = oracle_lookup(&db, a).map(|p| p.next_hop.as_str().to_string());
            prop_assert_eq!(image.get(&a.value()).cloned(), want);
        }
    }

    #[test]
    fn tree_matches_oracle((db, strides) in db_and_strides(80)) {
        let tree = build_tree(&db, &strides).unwrap();
        let oracle = LengthIndexedOracle::new(&db);
        for a in all_addresses(db.address_width()) {
            prop_assert_eq!(tree.search(a).map(|b| (b.hop.as_str().to_string(), b.len)), expected(&oracle, a));
        }
        prop_assert_eq!(tree.terminal_count(), db.len());
    }

    #[test]
    fn packing_never_costs_blocks((db, strides) in db_and_strides(120)) {
        let plan = Plan::build(&db, small_config(db.address_width(), strides)).unwrap();
        let r = plan.resources();
        prop_assert!(r.tcam_blocks_post_tag <= r.tcam_blocks_pre_tag);
    }

    #[test]
    fn hybridization_preserves_lookups((db, strides) in db_and_strides(120), c in prop::sample::select(vec![(3u64, 2u64), (3, 1), (8, 1)])) {
        let w = db.address_width();
        let plain = Plan::build(&db, small_config(w, strides.clone())).unwrap();
        let cfg = PlanConfig { hybridization: hybrid(Rational::new(c.0, c.1)), ..small_config(w, strides) };
        let mixed = Plan::build(&db, cfg).unwrap();
        prop_assert!(mixed.verify(VerifyMode::Exhaustive).unwrap().passed());
        prop_assert!(mixed.resources().tcam_blocks_pre_tag <= plain.resources().tcam_blocks_pre_tag);
        for a in all_addresses(w) {
            prop_assert_eq!(mixed.search_hop(a), plain.search_hop(a));
        }
    }

    #[test]
    fn tags_unique_and_complete((db, strides) in db_and_strides(150)) {
        let plan = Plan::build(&db, small_config(db.address_width(), strides)).unwrap();
        let tree = plan.tree();
        let mut placed = BTreeSet::new();
        for st in plan.packing().supertables() {
            let tags: BTreeSet<u64> = st.members.iter().map(|m| m.0).collect();
            prop_assert_eq!(tags.len(), st.members.len());
            prop_assert!(st.members.len() <= 1 << st.tag_bits);
            for &(tag, t) in &st.members {
                prop_assert_eq!(st.member(tag), Some(t));
                prop_assert!(placed.insert(t));
                prop_assert_eq!(tree.table(t).level_index, st.level_index);
            }
        }
        for t in tree.tables() {
            if t.kind == TableKind::Tcam && !t.is_empty() {
                prop_assert!(placed.contains(&t.id));
            }
        }
    }

    #[test]
    fn pipeline_respects_dependencies((db, strides) in db_and_strides(150), hyb in any::<bool>()) {
        let w = db.address_width();
        let mut cfg = small_config(w, strides);
        if hyb {
            cfg.hybridization = hybrid(Rational::from_integer(3));
        }
        let plan = Plan::build(&db, cfg).unwrap();
        prop_assert!(plan.pipeline().dependency_violations().is_empty());
        prop_assert!(plan.pipeline().within_capacity());
    }
}

#[derive(Clone, Debug)]
enum Op {
    Insert(usize, u128, usize),
    Delete(usize),
}

fn ops() -> impl Strategy<Value = Vec<Op>> {
    prop::collection::vec(
        prop_oneof![
            3 => (0..=8usize, any::<u128>(), 0..4usize).prop_map(|(l, v, h)| Op::Insert(l, v, h)),
            2 => any::<prop::sample::Index>().prop_map(|i| Op::Delete(i.index(usize::MAX))),
        ],
        1..40,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn updates_track_oracle(db in database(8, 40), cuts in prop::collection::btree_set(1..6usize, 0..3), ops in ops(), hyb in any::<bool>()) {
        let cuts: Vec<usize> = cuts.into_iter().collect();
        // coverage 6 of 8 bits so long prefixes exercise the overflow buffer
        let mut cfg = small_config(8, StrideList::from_cuts(&cuts, 6).unwrap());
        cfg.overflow_capacity = 8;
        if hyb {
            cfg.hybridization = hybrid(Rational::from_integer(3));
        }
        let mut plan = match Plan::build(&db, cfg) {
            Ok(p) => p,
            Err(tiletree::Error::OverflowFull { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let mut mirror = db.clone();
        for op in ops {
            match op {
                Op::Insert(l, v, h) => {
                    let p = Prefix::new(Bits::new(v & mask(l as u32), l), format!("n{h}"));
                    let dup = mirror.contains(p.bits);
                    match plan.insert_prefix(p.clone()) {
                        Ok(_) => {
                            prop_assert!(!dup);
                            mirror.push(p).unwrap();
                        }
                        Err(tiletree::Error::DuplicatePrefix { .. }) => prop_assert!(dup),
                        Err(tiletree::Error::OverflowFull { .. }) => {}
                        Err(e) => return Err(TestCaseError::fail(e.to_string())),
                    }
                }
                Op::Delete(i) => {
                    if mirror.is_empty() {
                        continue;
                    }
                    let bits = mirror.entries()[i % mirror.len()].bits;
                    plan.delete_prefix(bits).unwrap();
                    mirror.remove(bits);
                }
            }
            let oracle = LengthIndexedOracle::new(&mirror);
            for a in all_addresses(8) {
                let want = expected(&oracle, a).map_or(tiletree::prefixdb::DEFAULT_HOP.to_string(), |e| e.0);
                prop_assert_eq!(plan.search_hop(a), want.as_str());
            }
            prop_assert!(plan.pipeline().dependency_violations().is_empty());
        }
    }
}

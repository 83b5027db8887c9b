mod common;

use hida_core::modsym::{boundary_map, build_space_for_level, CuspidalData};
use num_bigint::BigInt;
use num_traits::{One, Signed};

#[test]
fn ranks_match_genus_and_cusp_formulas() {
    for level in [11u64, 15, 33, 45] {
        let s = build_space_for_level(level).unwrap();
        let g = common::genus(level) as usize;
        let cusps = common::cusp_count(level) as usize;
        assert_eq!(s.symbols().len() as u64, common::symbol_classes(level), "level {level}");
        assert_eq!(s.rank(), 2 * g + cusps - 1, "level {level}");
        let (cs, b) = boundary_map(&s);
        assert_eq!(cs.len(), cusps, "level {level}");
        assert_eq!(b.rank(), cusps - 1, "level {level}");
    }
}

#[test]
fn pairing_is_alternating_and_unimodular() {
    for level in [11u64, 15, 33, 45] {
        let s = build_space_for_level(level).unwrap();
        let c = CuspidalData::new(&s).unwrap();
        assert_eq!(c.dim() as u64, 2 * common::genus(level));
        assert_eq!(c.pairing.transpose(), -&c.pairing, "level {level}");
        assert_eq!(c.pairing.det().abs(), BigInt::one(), "level {level}");
    }
}

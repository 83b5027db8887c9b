mod common;

use hida_core::modsym::{build_space, LevelParams};
use hida_core::ordinary::{stabilization_check, OrdinaryLevel};

fn level(tame: u64, p: u64, r: u32) -> OrdinaryLevel {
    let space = build_space(LevelParams::new(tame, p, r).unwrap()).unwrap();
    OrdinaryLevel::build(space, 20, None).unwrap()
}

#[test]
fn level_15_packet_matches_curve() {
    let lv = level(5, 3, 1);
    assert_eq!(lv.decomposition().rank(), 2);
    let h = lv.algebra().unwrap();
    assert!(h.is_commutative());
    let q = lv.qexp(&h).unwrap();
    assert_eq!(q.rank(), 1);
    assert_eq!(q.duality_valuation, Some(0));
    let packets = lv.packets(&h).unwrap();
    assert_eq!(packets.len(), 1);
    let ring = lv.ring();
    for (n, a) in [(2usize, common::trace_of_frobenius(common::CURVE_15A, 2)), (3, -1), (5, 1), (7, common::trace_of_frobenius(common::CURVE_15A, 7))] {
        assert_eq!(packets[0].a(n).unwrap(), ring.scalar_i64(a), "a_{n}");
    }
}

#[test]
fn level_11_stabilizes_at_33() {
    let lower = level(11, 3, 0);
    let h = lower.algebra().unwrap();
    let packets = lower.packets(&h).unwrap();
    assert_eq!(packets.len(), 1);
    let upper = level(11, 3, 1);
    let report = stabilization_check(&packets[0], &upper).unwrap();
    assert!(report.passed, "{report:?}");
    let alpha: i64 = report.observed.as_deref().unwrap().parse().unwrap();
    assert_eq!(alpha.rem_euclid(9), 2);
    assert_eq!(alpha.rem_euclid(27), 11);
}

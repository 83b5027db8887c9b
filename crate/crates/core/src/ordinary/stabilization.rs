use serde::{Deserialize, Serialize};

use super::level::OrdinaryLevel;
use super::packets::{unit_root, EigenPacket};
use super::Result;
use crate::arith::prime_factors;
use crate::exactlin::{is_prime, kernel_int, IntMatrix, ZpMatrix};

/// Outcome of comparing a level-N packet with the ordinary part at level Np.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilizationReport {
    pub level: u64,
    pub precision: u32,
    pub vacuous: bool,
    pub note: String,
    /// rank of the joint kernel of `T(l) - a_l`, `l` prime to `Np`
    pub old_rank: usize,
    /// rank mod p of its ordinary projection
    pub ordinary_rank: usize,
    pub alpha: Option<String>,
    /// the `T(p)`-eigenvalue on the ordinary projection, if it is a scalar
    pub observed: Option<String>,
    pub eigenvalue_matches: bool,
    pub non_unit_killed: bool,
    pub passed: bool,
}

/// Finds the p-old copies of `packet` at the level of `upper` by their
/// eigenvalues away from `Np`, projects them with the ordinary idempotent,
/// and checks that `T(p)` acts there by the unit root while the other
/// stabilization is killed.
///
/// The old subspace is cut out over `Z`, so the packet must have rational
/// eigenvalues.
pub fn stabilization_check(packet: &EigenPacket, upper: &OrdinaryLevel) -> Result<StabilizationReport> {
    let p = upper.prime();
    let ring = upper.ring();
    let mut report = StabilizationReport {
        level: upper.level(),
        precision: ring.precision(),
        vacuous: false,
        note: String::new(),
        old_rank: 0,
        ordinary_rank: 0,
        alpha: None,
        observed: None,
        eigenvalue_matches: false,
        non_unit_killed: false,
        passed: false,
    };
    let a_p = packet.a(p as usize).expect("packet covers T(p)");
    if !a_p.is_unit() {
        report.vacuous = true;
        report.passed = true;
        report.note = "a_p is not a unit: both stabilizations are killed by the projector, ordinary rank 0".into();
        return Ok(report);
    }
    let chi = packet.character_value(p as i64).expect("p is a unit mod the lower level");
    let alpha = unit_root(a_p, chi)?;
    report.alpha = Some(alpha.symmetric().to_string());

    let bad: Vec<u64> = prime_factors(upper.level());
    let n = upper.hecke().dim();
    let mut stacked = IntMatrix::zeros(0, n);
    for l in 2..=packet.coefficients.len() as u64 {
        if !is_prime(l) || bad.contains(&l) {
            continue;
        }
        let a_l = packet.a(l as usize).expect("within range").symmetric();
        let t = upper.hecke().t(l)?;
        let shifted = &t - &IntMatrix::identity(n).scale(&a_l);
        stacked = stacked.vstack(&shifted);
    }
    let old = kernel_int(&stacked).as_columns();
    report.old_rank = old.cols();
    if report.old_rank != 4 {
        report.note = format!("expected the two p-old copies (rank 4), found rank {}", report.old_rank);
        return Ok(report);
    }

    let e = upper.decomposition().idempotent();
    let old = ZpMatrix::from_int(ring, &old);
    let projected = e * &old;
    report.ordinary_rank = projected.rank_mod_p();
    let u = upper.operator(p)?;
    let shifted = &u - &ZpMatrix::identity(ring, n).scale(alpha.residue);
    report.eigenvalue_matches = report.ordinary_rank == 2 && (&shifted * &projected).is_zero();
    report.non_unit_killed = (e * &(&shifted * &old)).is_zero();

    let basis = projected.select_columns(&projected.independent_columns_mod_p());
    if basis.cols() > 0 {
        let rows = basis.transpose().independent_columns_mod_p();
        let x = &basis.select_rows(&rows).inverse()? * &(&u * &basis).select_rows(&rows);
        let a = x.get(0, 0);
        if x == ZpMatrix::identity(ring, basis.cols()).scale(a) {
            report.observed = Some(ring.symmetric(a).to_string());
        }
    }
    report.passed = report.eigenvalue_matches && report.non_unit_killed;
    if !report.passed {
        report.note = "T(p) does not act by the unit root on the ordinary projection".into();
    }
    Ok(report)
}

use std::collections::BTreeSet;
use std::time::Instant;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::CheckName;
use super::oracle::OracleTable;
use super::report::CheckEntry;
use super::run::LevelPipeline;
use super::{HarnessError, Result};
use crate::arith::{divisors, euler_phi, gcd, prime_factors};
use crate::exactlin::{IntMatrix, ZpMatrix};
use crate::hecke::{pullback_map, trace_map};
use crate::iwasawa::{control_check, IwasawaError, LambdaModule};
use crate::modsym::{CuspSpace, CuspidalData};
use crate::ordinary::{stabilization_check, EigenPacket, OrdinaryError};

/// Operators up to this index enter the identity and idempotent checks.
const IDENTITY_BOUND: u64 = 12;
/// Primes for the `T(l)^2 = T(l^2) + l <l>` recursion.
const RECURSION_PRIMES: [u64; 2] = [2, 7];

/// Every `T(n)` the identity checks ask for.
pub(crate) fn identity_operator_indices() -> BTreeSet<u64> {
    let mut out: BTreeSet<u64> = (2..=IDENTITY_BOUND).collect();
    for (n, m) in coprime_pairs() {
        out.insert(n * m);
    }
    out.extend(RECURSION_PRIMES.iter().map(|l| l * l));
    out
}

fn coprime_pairs() -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for n in 2..=IDENTITY_BOUND {
        for m in n + 1..=IDENTITY_BOUND {
            if gcd(n as i64, m as i64) == 1 {
                out.push((n, m));
            }
        }
    }
    out
}

struct Outcome {
    passed: bool,
    details: Value,
    witness: Option<Value>,
}

impl Outcome {
    fn new(passed: bool, details: Value, witness: impl FnOnce() -> Value) -> Self {
        let witness = (!passed).then(witness);
        Self { passed, details, witness }
    }
}

fn timed(check: CheckName, level: Option<u64>, precision: u32, f: impl FnOnce() -> Result<Outcome>) -> CheckEntry {
    let start = Instant::now();
    let outcome = f();
    let elapsed_ms = start.elapsed().as_millis() as u64;
    match outcome {
        Ok(o) => CheckEntry { check, level, passed: o.passed, precision, details: o.details, witness: o.witness, elapsed_ms },
        Err(e) => {
            log::warn!("{check} at level {level:?} failed to run: {e}");
            CheckEntry {
                check,
                level,
                passed: false,
                precision,
                details: json!({ "error": e.to_string() }),
                witness: Some(error_witness(&e)),
                elapsed_ms,
            }
        }
    }
}

fn error_witness(e: &HarnessError) -> Value {
    match e {
        HarnessError::Iwasawa(IwasawaError::NotFree { witness }) => {
            json!({ "kernel_vector_mod_p": witness.iter().map(|x| x.to_string()).collect::<Vec<_>>() })
        }
        HarnessError::Ordinary(OrdinaryError::EigenCollision { rank, precision }) => {
            json!({ "eigen_block_rank": rank, "precision": precision })
        }
        other => json!({ "error": other.to_string() }),
    }
}

fn matrix_json(m: &ZpMatrix) -> Value {
    serde_json::to_value(m.to_int()).expect("matrices serialize")
}

/// Closed-form counts for `X1(M)`, `M >= 5`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureCounts {
    /// `M^2 prod (1 - 1/l^2) / 2`, the number of Manin symbols up to sign
    pub classes: u64,
    pub cusps: u64,
    pub genus: u64,
}

pub fn structure_counts(m: u64) -> StructureCounts {
    let mut classes = m * m;
    for l in prime_factors(m) {
        classes = classes / (l * l) * (l * l - 1);
    }
    classes /= 2;
    let cusps = divisors(m).iter().map(|&d| euler_phi(d) * euler_phi(m / d)).sum::<u64>() / 2;
    let genus = (12 + classes - 6 * cusps) / 12;
    StructureCounts { classes, cusps, genus }
}

pub(crate) fn check_structure(pl: &LevelPipeline) -> Vec<CheckEntry> {
    let k = pl.precision();
    (1..=pl.instance().r_max)
        .map(|r| {
            timed(CheckName::Structure, Some(pl.level_number(r)), k, || {
                let space = pl.space(r)?;
                let m = space.level();
                let expected = structure_counts(m);
                let classes = space.symbols().len() as u64;
                let cusps = CuspSpace::new(m).len() as u64;
                let quotient = space.rank() as u64;
                let cuspidal = CuspidalData::new(&space)?.dim() as u64;
                let mut ok = classes == expected.classes
                    && cusps == expected.cusps
                    && quotient == 2 * expected.genus + expected.cusps - 1
                    && cuspidal == 2 * expected.genus;
                let mut details = json!({
                    "expected": expected,
                    "classes": classes,
                    "cusps": cusps,
                    "quotient_rank": quotient,
                    "cuspidal_rank": cuspidal,
                });
                if r >= 2 {
                    let lower = pl.space(r - 1)?;
                    let degree = classes / lower.symbols().len() as u64;
                    let composite = trace_map(&space, &lower)?.compose(&pullback_map(&lower, &space)?);
                    let scaled = IntMatrix::identity(lower.rank()).scale(&BigInt::from(degree));
                    let holds = composite.matrix == scaled;
                    ok &= holds && degree == pl.instance().prime.pow(2);
                    details["trace_after_pullback"] = json!({ "lower_level": lower.level(), "degree": degree, "scalar": holds });
                }
                Ok(Outcome::new(ok, details.clone(), || details))
            })
        })
        .collect()
}

pub(crate) fn check_hecke_identities(pl: &LevelPipeline) -> Vec<CheckEntry> {
    let k = pl.precision();
    (1..=pl.instance().r_max)
        .map(|r| {
            timed(CheckName::HeckeIdentities, Some(pl.level_number(r)), k, || {
                let level = pl.level(r)?;
                let h = level.hecke();
                let m = h.level();
                let mut ops: Vec<(String, IntMatrix)> = Vec::new();
                for n in 2..=IDENTITY_BOUND {
                    ops.push((format!("T({n})"), h.t(n)?));
                }
                ops.extend(h.diamond_generators()?);
                let mut failures = Vec::new();
                for (i, (a, x)) in ops.iter().enumerate() {
                    for (b, y) in &ops[i + 1..] {
                        if x * y != y * x {
                            failures.push(json!({ "identity": "commute", "left": a, "right": b }));
                        }
                    }
                }
                let pairs = coprime_pairs();
                for &(n, mm) in &pairs {
                    if h.t(n * mm)? != &h.t(n)? * &h.t(mm)? {
                        failures.push(json!({ "identity": "multiplicative", "n": n, "m": mm }));
                    }
                }
                let mut recursions = Vec::new();
                for l in RECURSION_PRIMES {
                    if m % l == 0 {
                        continue;
                    }
                    let t = h.t(l)?;
                    let rhs = &h.t(l * l)? + &h.diamond_unit(l as i64)?.scale(&BigInt::from(l));
                    if &t * &t != rhs {
                        failures.push(json!({ "identity": "prime-square", "l": l }));
                    }
                    recursions.push(l);
                }
                let details = json!({
                    "exact_over_integers": true,
                    "operators": ops.iter().map(|(l, _)| l.clone()).collect::<Vec<_>>(),
                    "multiplicative_pairs": pairs.len(),
                    "prime_square_checked": recursions,
                    "failures": failures.len(),
                });
                Ok(Outcome::new(failures.is_empty(), details, || json!({ "failures": failures })))
            })
        })
        .collect()
}

pub(crate) fn check_idempotent(pl: &LevelPipeline) -> Vec<CheckEntry> {
    let k = pl.precision();
    (1..=pl.instance().r_max)
        .map(|r| {
            timed(CheckName::Idempotent, Some(pl.level_number(r)), k, || {
                let level = pl.level(r)?;
                let d = level.decomposition();
                let e = d.idempotent();
                let square = &(e * e) == e;
                let mut noncommuting = Vec::new();
                for n in 2..=IDENTITY_BOUND {
                    let t = level.operator(n)?;
                    if (e * &t) != (&t * e) {
                        noncommuting.push(n);
                    }
                }
                let u = level.ordinary_operator(level.prime())?;
                let unit_rank = u.rank_mod_p();
                let invertible = unit_rank == d.rank();
                let details = json!({
                    "ambient_rank": d.ambient_rank(),
                    "ordinary_rank": d.rank(),
                    "idempotent": square,
                    "commutes_up_to": IDENTITY_BOUND,
                    "u_rank_mod_p": unit_rank,
                });
                let passed = square && noncommuting.is_empty() && invertible;
                Ok(Outcome::new(passed, details, || {
                    json!({
                        "idempotent_defect": (!square).then(|| matrix_json(&(&(e * e) - e))),
                        "noncommuting": noncommuting,
                        "u_rank_mod_p": unit_rank,
                    })
                }))
            })
        })
        .collect()
}

pub(crate) fn check_rank_duality(pl: &LevelPipeline) -> Vec<CheckEntry> {
    let k = pl.precision();
    (1..=pl.instance().r_max)
        .map(|r| {
            timed(CheckName::RankDuality, Some(pl.level_number(r)), k, || {
                let level = pl.level(r)?;
                let algebra = level.algebra()?;
                let forms = level.qexp(&algebra)?;
                let ordinary = level.decomposition().rank();
                let commutative = algebra.is_commutative();
                let details = json!({
                    "ordinary_rank": ordinary,
                    "form_rank": forms.rank(),
                    "algebra_rank": algebra.rank(),
                    "n_max": forms.n_max,
                    "duality_valuation": forms.duality_valuation,
                    "coefficient_precision": forms.ring.precision(),
                    "commutative": commutative,
                    // rank of the ordinary quotient predicted by the duality
                    "implied_quotient_rank": forms.rank(),
                });
                let passed = ordinary == 2 * forms.rank() && forms.is_perfect() && commutative;
                Ok(Outcome::new(passed, details, || {
                    json!({
                        "ordinary_rank": ordinary,
                        "form_rank": forms.rank(),
                        "duality_valuation": forms.duality_valuation,
                        "noncommuting": algebra.noncommuting_pairs(),
                    })
                }))
            })
        })
        .collect()
}

/// The control comparison along `t: M_upper -> M_lower`, requiring both
/// modules free of rank `d`. Exposed for negative tests.
pub fn check_control_with(upper: &LambdaModule, lower: &LambdaModule, t: &ZpMatrix, d: usize) -> (bool, Value, Option<Value>) {
    let free = |m: &LambdaModule| m.freeness().map(|b| b.rank);
    let (fu, fl) = (free(upper), free(lower));
    let witness_of = |f: &std::result::Result<usize, IwasawaError>| match f {
        Err(IwasawaError::NotFree { witness }) => Some(json!(witness.iter().map(|x| x.to_string()).collect::<Vec<_>>())),
        _ => None,
    };
    let report = control_check(upper, lower, t);
    let passed = fu == Ok(d) && fl == Ok(d) && report.as_ref().is_ok_and(|r| r.passed);
    let details = json!({
        "free_rank_upper": fu.as_ref().ok(),
        "free_rank_lower": fl.as_ref().ok(),
        "expected_free_rank": d,
        "control": report.as_ref().ok(),
        "control_error": report.as_ref().err().map(|e| e.to_string()),
    });
    let witness = (!passed).then(|| {
        json!({
            "upper_kernel_vector_mod_p": witness_of(&fu),
            "lower_kernel_vector_mod_p": witness_of(&fl),
            "map": matrix_json(t),
        })
    });
    (passed, details, witness)
}

pub(crate) fn check_control(pl: &LevelPipeline) -> Vec<CheckEntry> {
    let k = pl.precision();
    let r_max = pl.instance().r_max;
    let mut base_rank = None;
    let mut out = Vec::new();
    for r in 1..=r_max {
        out.push(timed(CheckName::Control, Some(pl.level_number(r)), k, || {
            let module = pl.lambda_module(r)?;
            if r == 1 {
                let basis = module.freeness()?;
                base_rank = Some(basis.rank);
                let details = json!({
                    "free_rank": basis.rank,
                    "z_rank": module.rank(),
                    "control": "identity map at the base level",
                });
                return Ok(Outcome::new(true, details, || Value::Null));
            }
            let d = base_rank.ok_or_else(|| HarnessError::Config("base level did not produce a free rank".into()))?;
            let lower = pl.lambda_module(r - 1)?;
            let (upper_level, lower_level) = (pl.level(r)?, pl.level(r - 1)?);
            let intertwines = upper_level.trace_intertwines(&lower_level)?;
            let t = upper_level.ordinary_trace(&lower_level)?;
            let (passed, mut details, witness) = check_control_with(&module, &lower, &t, d);
            details["z_rank"] = json!(module.rank());
            details["trace_intertwines_projectors"] = json!(intertwines);
            let passed = passed && intertwines;
            Ok(Outcome { passed, details, witness: (!passed).then(|| witness.unwrap_or(json!({ "trace_intertwines_projectors": false }))) })
        }));
    }
    out
}

pub(crate) fn check_stabilization(pl: &LevelPipeline) -> Vec<CheckEntry> {
    let k = pl.precision();
    let inst = pl.instance();
    vec![timed(CheckName::Stabilization, Some(pl.level_number(1)), k, || {
        let tame = inst.tame;
        if tame <= 4 || structure_counts(tame).genus == 0 {
            let details = json!({ "vacuous": true, "note": format!("no cusp forms of weight 2 at level {tame}") });
            return Ok(Outcome::new(true, details, || Value::Null));
        }
        let lower = pl.level(0)?;
        let algebra = lower.algebra()?;
        let packets = lower.packets(&algebra)?;
        if packets.is_empty() {
            let details = json!({ "vacuous": true, "note": format!("no ordinary packets at level {tame}") });
            return Ok(Outcome::new(true, details, || Value::Null));
        }
        let upper = pl.level(1)?;
        let mut reports = Vec::new();
        for packet in &packets {
            reports.push(stabilization_check(packet, &upper)?);
        }
        let passed = reports.iter().all(|r| r.passed);
        let details = json!({ "vacuous": false, "packets": packets.len(), "reports": reports });
        let failing: Vec<_> = reports.iter().filter(|r| !r.passed).cloned().collect();
        Ok(Outcome::new(passed, details, || json!({ "failing": failing })))
    })]
}

/// First coefficient index where `packet` disagrees with `expected` mod `p^k`.
fn first_mismatch(packet: &EigenPacket, expected: &std::collections::BTreeMap<u64, BigInt>) -> Option<(u64, BigInt, BigInt)> {
    let ring = packet.ring();
    expected.iter().find_map(|(&n, a)| {
        let got = packet.a(n as usize)?;
        (got.residue != ring.from_bigint(a)).then(|| (n, a.clone(), got.symmetric()))
    })
}

pub(crate) fn check_oracle(pl: &LevelPipeline, table: &OracleTable) -> Vec<CheckEntry> {
    let k = pl.precision();
    let inst = pl.instance();
    let mut out = Vec::new();
    let first = if inst.tame > 4 { 0 } else { 1 };
    for r in first..=inst.r_max {
        let m = pl.level_number(r);
        let Some(expected) = table.get(&m) else { continue };
        out.push(timed(CheckName::Oracle, Some(m), k, || {
            let p = inst.prime;
            if !m.is_multiple_of(p) {
                if let Some(a_p) = expected.get(&p) {
                    if a_p % BigInt::from(p) == BigInt::from(0) {
                        let details = json!({ "vacuous": true, "note": "oracle form is not ordinary at p" });
                        return Ok(Outcome::new(true, details, || Value::Null));
                    }
                }
            }
            let level = pl.level(r)?;
            let packets = level.packets(&level.algebra()?)?;
            let compared: Vec<u64> = expected.keys().copied().filter(|&n| n <= level.n_max()).collect();
            let matching = packets.iter().position(|pk| first_mismatch(pk, expected).is_none());
            let details = json!({
                "packets": packets.len(),
                "compared_indices": compared,
                "matched_packet": matching,
            });
            Ok(Outcome::new(matching.is_some() && !compared.is_empty(), details, || {
                let mismatches: Vec<Value> = packets
                    .iter()
                    .filter_map(|pk| first_mismatch(pk, expected))
                    .map(|(n, want, got)| json!({ "n": n, "expected": want.to_string(), "got": got.to_string() }))
                    .collect();
                json!({ "mismatches": mismatches, "packets": packets.len() })
            }))
        }));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iwasawa::LambdaRing;

    #[test]
    fn closed_form_counts() {
        assert_eq!(structure_counts(11), StructureCounts { classes: 60, cusps: 10, genus: 1 });
        assert_eq!(structure_counts(15), StructureCounts { classes: 96, cusps: 16, genus: 1 });
        assert_eq!(structure_counts(13).genus, 2);
        assert_eq!(structure_counts(5).genus, 0);
    }

    #[test]
    fn operator_indices_cover_products() {
        let idx = identity_operator_indices();
        assert!(idx.contains(&132) && idx.contains(&49) && idx.contains(&4));
        assert!(!idx.contains(&1));
    }

    #[test]
    fn zero_trace_fails_control() {
        let lower_ring = LambdaRing::new(3, 1, 8).unwrap();
        let upper_ring = LambdaRing::new(3, 2, 8).unwrap();
        let z = upper_ring.coefficients();
        // Lambda_2 itself: gamma permutes 3 basis vectors cyclically
        let mut g = ZpMatrix::zeros(z, 3, 3);
        for i in 0..3 {
            g.set((i + 1) % 3, i, 1);
        }
        let upper = LambdaModule::new(upper_ring, g).unwrap();
        let lower = LambdaModule::new(lower_ring, ZpMatrix::identity(z, 1)).unwrap();
        let augmentation = ZpMatrix::from_i64(z, 1, 3, &[1, 1, 1]);
        let (ok, _, witness) = check_control_with(&upper, &lower, &augmentation, 1);
        assert!(ok && witness.is_none());
        let (ok, _, witness) = check_control_with(&upper, &lower, &ZpMatrix::zeros(z, 1, 3), 1);
        assert!(!ok && witness.is_some());
    }
}

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::decomposition::hida_idempotent;
use super::{OrdinaryError, Result};
use crate::exactlin::{PadicScalar, Valuation, ZpMatrix, ZpRing};
use crate::hecke::HeckeAlgebra;

/// Where the unit root comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Level prime to p: the unit root is the Hensel root of the Hecke polynomial at p.
    PrimeToP,
    /// Level divisible by p: the unit root is the U-eigenvalue itself.
    PLevel,
}

/// Hecke eigenvalues of one rank-2 block of an ordinary summand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EigenPacket {
    pub level: u64,
    pub prime: u64,
    pub precision: u32,
    /// `a_1, a_2, ..., a_nmax`
    pub coefficients: Vec<PadicScalar>,
    /// eigenvalues of the diamond generators `<b>`, `b` a unit mod the level
    pub character: Vec<(i64, PadicScalar)>,
    pub unit_root: PadicScalar,
    pub provenance: Provenance,
}

impl EigenPacket {
    pub fn a(&self, n: usize) -> Option<PadicScalar> {
        n.checked_sub(1).and_then(|i| self.coefficients.get(i)).copied()
    }

    /// Character value at any unit, reached by walking the generators.
    pub fn character_value(&self, b: i64) -> Option<PadicScalar> {
        let m = self.level as i64;
        let target = b.rem_euclid(m);
        let ring = self.ring();
        let mut seen = HashMap::from([(1 % m, PadicScalar::one(&ring))]);
        let mut queue = VecDeque::from([1 % m]);
        while let Some(x) = queue.pop_front() {
            let vx = seen[&x];
            if x == target {
                return Some(vx);
            }
            for &(g, vg) in &self.character {
                let y = (x * g).rem_euclid(m);
                if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(y) {
                    e.insert(vx * vg);
                    queue.push_back(y);
                }
            }
        }
        None
    }

    pub fn ring(&self) -> ZpRing {
        ZpRing::new(self.prime, self.precision).expect("packet ring")
    }

    /// Export with residues lifted to the symmetric range.
    pub fn record(&self) -> PacketRecord {
        PacketRecord {
            level: self.level,
            prime: self.prime,
            precision: self.precision,
            a_n: self.coefficients.iter().map(|a| a.symmetric().to_string()).collect(),
            character: self.character.iter().map(|(b, v)| (*b, v.symmetric().to_string())).collect(),
            alpha: self.unit_root.symmetric().to_string(),
            provenance: self.provenance,
        }
    }
}

/// JSON form of an [`EigenPacket`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PacketRecord {
    pub level: u64,
    pub prime: u64,
    pub precision: u32,
    pub a_n: Vec<String>,
    pub character: Vec<(i64, String)>,
    pub alpha: String,
    pub provenance: Provenance,
}

/// The root of `X^2 - a_p X + p chi_p` congruent to `a_p` mod `p`, by
/// Newton iteration.
pub fn unit_root(a_p: PadicScalar, chi_p: PadicScalar) -> Result<PadicScalar> {
    let (Valuation::Exact(v) | Valuation::AtLeast(v)) = a_p.valuation();
    if v > 0 {
        return Err(OrdinaryError::NotOrdinary { valuation: v });
    }
    let ring = a_p.ring();
    let p = ring.scalar(ring.from_i128(ring.p() as i128));
    let two = ring.scalar(ring.from_i128(2));
    let c = p * chi_p;
    let mut x = a_p;
    // the derivative stays a unit, so each step doubles the precision
    for _ in 0..=ring.precision().ilog2() + 1 {
        let f = x * x - a_p * x + c;
        if f.is_zero() {
            break;
        }
        let df = (two * x - a_p).inv().expect("derivative is a unit");
        x = x - f * df;
    }
    Ok(x)
}

/// Splits the summand by simultaneous generalized eigenspaces mod `p` of
/// the algebra generators and reads the eigenvalues off each rank-2 block.
pub fn eigen_packets(algebra: &HeckeAlgebra, prime: u64, n_max: u64) -> Result<Vec<EigenPacket>> {
    let ring = algebra.ring();
    let d = algebra.size();
    if d == 0 {
        return Ok(Vec::new());
    }
    let id = ZpMatrix::identity(ring, d);
    let mut blocks = vec![id.clone()];
    for (_, t) in algebra.generators() {
        if blocks.iter().all(|b| b.rank_mod_p() <= 2) {
            break;
        }
        let mut next = Vec::new();
        for b in blocks {
            if b.rank_mod_p() <= 2 {
                next.push(b);
                continue;
            }
            let mut rest = b.clone();
            for lambda in 0..prime {
                let shifted = t - &id.scale(lambda as u128);
                let f = &id - &hida_idempotent(&shifted)?;
                let piece = &b * &f;
                if piece.rank_mod_p() > 0 {
                    rest = &rest - &piece;
                    next.push(piece);
                }
            }
            // eigenvalues outside F_p stay together
            if rest.rank_mod_p() > 0 {
                next.push(rest);
            }
        }
        blocks = next;
    }
    if let Some(b) = blocks.iter().find(|b| b.rank_mod_p() != 2) {
        return Err(OrdinaryError::EigenCollision { rank: b.rank_mod_p(), precision: ring.precision() });
    }

    let level = algebra.level();
    let p_divides = level.is_multiple_of(prime);
    let mut packets = Vec::new();
    for b in &blocks {
        let basis = b.select_columns(&b.independent_columns_mod_p());
        let rows = basis.transpose().independent_columns_mod_p();
        let pivot_inv = basis.select_rows(&rows).inverse()?;
        let eigenvalue = |t: &ZpMatrix| -> Result<PadicScalar> {
            let image = t * &basis;
            let x = &pivot_inv * &image.select_rows(&rows);
            let a = x.get(0, 0);
            if x != id_scaled(ring, 2, a) || &basis * &x != image {
                return Err(OrdinaryError::EigenCollision { rank: 2, precision: ring.precision() });
            }
            Ok(ring.scalar(a))
        };
        let mut coefficients = vec![PadicScalar::one(&ring)];
        for n in 2..=n_max {
            let label = format!("T({n})");
            let t = algebra.generator(&label).ok_or(OrdinaryError::MissingOperator(label))?;
            coefficients.push(eigenvalue(t)?);
        }
        let mut character = Vec::new();
        for (label, t) in algebra.generators() {
            if let Some(unit) = label.strip_prefix('<').and_then(|s| s.strip_suffix('>')) {
                let unit: i64 = unit.parse().map_err(|_| OrdinaryError::MissingOperator(label.clone()))?;
                character.push((unit, eigenvalue(t)?));
            }
        }
        let mut packet = EigenPacket {
            level,
            prime,
            precision: ring.precision(),
            coefficients,
            character,
            unit_root: PadicScalar::zero(&ring),
            provenance: if p_divides { Provenance::PLevel } else { Provenance::PrimeToP },
        };
        let a_p = packet.a(prime as usize).ok_or_else(|| OrdinaryError::MissingOperator(format!("T({prime})")))?;
        packet.unit_root = if p_divides {
            if !a_p.is_unit() {
                return Err(OrdinaryError::NotOrdinary { valuation: ring.valuation(a_p.residue) });
            }
            a_p
        } else {
            let chi = packet.character_value(prime as i64).expect("p is a unit mod the level");
            unit_root(a_p, chi)?
        };
        packets.push(packet);
    }
    packets.sort_by_key(|p| p.coefficients.iter().map(|a| a.symmetric()).collect::<Vec<_>>());
    Ok(packets)
}

fn id_scaled(ring: ZpRing, n: usize, a: u128) -> ZpMatrix {
    ZpMatrix::identity(ring, n).scale(a)
}

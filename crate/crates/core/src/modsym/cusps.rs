use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::SymbolSpace;
use crate::arith::gcd;
use crate::exactlin::IntMatrix;

/// A cusp `num/den` in lowest terms; `den = 0` is infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cusp {
    pub num: i64,
    pub den: i64,
}

impl std::fmt::Display for Cusp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.den == 0 {
            write!(f, "oo")
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// `Gamma1(M)`-classes of cusps, each with a fixed representative.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CuspRecord")]
pub struct CuspSpace {
    level: u64,
    cusps: Vec<Cusp>,
    #[serde(skip)]
    index: HashMap<(i64, i64), usize>,
}

impl CuspSpace {
    /// Representatives by scanning denominators `1..=M`, numerators in
    /// `[0, den)`; the first hit of each class is kept.
    pub fn new(level: u64) -> Self {
        let m = level as i64;
        let mut cusps = Vec::new();
        let mut index = HashMap::new();
        for c in 1..=m {
            for a in 0..c {
                if gcd(a, c) != 1 {
                    continue;
                }
                let key = class_key(a, c, m);
                if let std::collections::hash_map::Entry::Vacant(e) = index.entry(key) {
                    e.insert(cusps.len());
                    cusps.push(Cusp { num: a, den: c });
                }
            }
        }
        Self { level, cusps, index }
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.cusps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cusps.is_empty()
    }

    pub fn cusps(&self) -> &[Cusp] {
        &self.cusps
    }

    /// Class of the cusp `num/den` (any coprime pair, `den` may be 0).
    pub fn class_of(&self, num: i64, den: i64) -> usize {
        let key = class_key(num, den, self.level as i64);
        self.index[&key]
    }
}

#[derive(Deserialize)]
struct CuspRecord {
    level: u64,
    cusps: Vec<Cusp>,
}

impl TryFrom<CuspRecord> for CuspSpace {
    type Error = String;
    fn try_from(r: CuspRecord) -> Result<Self, String> {
        let space = CuspSpace::new(r.level);
        if space.cusps != r.cusps {
            return Err(format!("cusp list does not match level {}", r.level));
        }
        Ok(space)
    }
}

/// `(c mod M, a mod gcd(c, M))` up to simultaneous sign.
fn class_key(a: i64, c: i64, m: i64) -> (i64, i64) {
    let c0 = c.rem_euclid(m);
    let g = gcd(c0, m);
    let key = (c0, a.rem_euclid(g));
    let neg = ((-c0).rem_euclid(m), (-a).rem_euclid(g));
    key.min(neg)
}

/// Boundary of each basis element: `(c:d) -> [a/c] - [b/d]`.
pub fn boundary_map(space: &SymbolSpace) -> (CuspSpace, IntMatrix) {
    let cusps = CuspSpace::new(space.level());
    let mut m = IntMatrix::zeros(cusps.len(), space.rank());
    for i in 0..space.rank() {
        let mut col = vec![0i64; cusps.len()];
        for &(class, x) in space.basis_lift(i) {
            let [a, b, c, d] = space.sl2_lift(class);
            col[cusps.class_of(a, c)] += x;
            col[cusps.class_of(b, d)] -= x;
        }
        for (j, v) in col.into_iter().enumerate() {
            m[(j, i)] = v.into();
        }
    }
    (cusps, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modsym::build_space_for_level;
    use num_traits::Zero;

    #[test]
    fn infinity_and_one_over_level_agree() {
        let c = CuspSpace::new(15);
        assert_eq!(c.class_of(1, 0), c.class_of(1, 15));
        assert_eq!(c.class_of(2, 3), c.class_of(-2, -3));
    }

    #[test]
    fn boundary_has_degree_zero() {
        for level in [11, 15, 21] {
            let s = build_space_for_level(level).unwrap();
            let (_, b) = boundary_map(&s);
            for j in 0..b.cols() {
                let sum = b.column(j).into_iter().fold(num_bigint::BigInt::zero(), |a, x| a + x);
                assert!(sum.is_zero());
            }
        }
    }

    #[test]
    fn boundary_of_path_is_difference_of_cusps() {
        let s = build_space_for_level(11).unwrap();
        let (cusps, b) = boundary_map(&s);
        let v: Vec<num_bigint::BigInt> =
            s.chain_coords(&s.path_from_zero(3, 7)).into_iter().map(Into::into).collect();
        let img = b.mul_vec(&v);
        let mut expect = vec![0i64; cusps.len()];
        expect[cusps.class_of(3, 7)] += 1;
        expect[cusps.class_of(0, 1)] -= 1;
        let expect: Vec<num_bigint::BigInt> = expect.into_iter().map(Into::into).collect();
        assert_eq!(img, expect);
    }
}

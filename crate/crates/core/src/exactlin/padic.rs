use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{is_prime, LinAlgError, Result};

/// The ring `Z/p^k`, used as a working-precision model of `Z_p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RingParams", into = "RingParams")]
pub struct ZpRing {
    p: u64,
    k: u32,
    modulus: u128,
}

#[derive(Serialize, Deserialize)]
struct RingParams {
    p: u64,
    k: u32,
}

impl TryFrom<RingParams> for ZpRing {
    type Error = LinAlgError;
    fn try_from(r: RingParams) -> Result<Self> {
        ZpRing::new(r.p, r.k)
    }
}

impl From<ZpRing> for RingParams {
    fn from(r: ZpRing) -> Self {
        RingParams { p: r.p, k: r.k }
    }
}

/// Arithmetic tier chosen from the size of the modulus.
#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Tier {
    /// modulus < 2^32: products fit in u64
    Small,
    /// modulus < 2^64: products fit in u128
    Medium,
    Large,
}

impl ZpRing {
    pub fn new(p: u64, k: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(LinAlgError::NotPrime(p));
        }
        if k == 0 {
            return Err(LinAlgError::ZeroPrecision);
        }
        let mut modulus: u128 = 1;
        for _ in 0..k {
            modulus = modulus
                .checked_mul(p as u128)
                .filter(|m| *m < (1u128 << 126))
                .ok_or(LinAlgError::PrecisionTooLarge { p, k })?;
        }
        Ok(Self { p, k, modulus })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.k
    }

    pub fn modulus(&self) -> u128 {
        self.modulus
    }

    /// Same prime at a different precision.
    pub fn with_precision(&self, k: u32) -> Result<Self> {
        Self::new(self.p, k)
    }

    pub(crate) fn tier(&self) -> Tier {
        if self.modulus <= u32::MAX as u128 {
            Tier::Small
        } else if self.modulus <= u64::MAX as u128 {
            Tier::Medium
        } else {
            Tier::Large
        }
    }

    pub fn from_i128(&self, x: i128) -> u128 {
        let m = self.modulus as i128;
        x.rem_euclid(m) as u128
    }

    pub fn from_bigint(&self, x: &BigInt) -> u128 {
        let m = BigInt::from(self.modulus);
        x.mod_floor(&m).to_u128().expect("residue below modulus")
    }

    pub fn add(&self, a: u128, b: u128) -> u128 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    pub fn sub(&self, a: u128, b: u128) -> u128 {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }

    pub fn neg(&self, a: u128) -> u128 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    pub fn mul(&self, a: u128, b: u128) -> u128 {
        match self.tier() {
            Tier::Small => ((a as u64 * b as u64) % self.modulus as u64) as u128,
            Tier::Medium => (a * b) % self.modulus,
            Tier::Large => {
                let r = (BigUint::from(a) * BigUint::from(b)) % BigUint::from(self.modulus);
                r.to_u128().expect("residue below modulus")
            }
        }
    }

    pub fn pow(&self, mut base: u128, mut e: u128) -> u128 {
        let mut acc = 1 % self.modulus;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// `v_p(a)`, with `k` standing for "at least k" (the residue is zero).
    pub fn valuation(&self, a: u128) -> u32 {
        if a == 0 {
            return self.k;
        }
        let mut v = 0;
        let mut x = a;
        let p = self.p as u128;
        while x.is_multiple_of(p) {
            x /= p;
            v += 1;
        }
        v
    }

    pub fn is_unit(&self, a: u128) -> bool {
        !a.is_multiple_of(self.p as u128)
    }

    /// Inverse of a unit.
    pub fn inv(&self, a: u128) -> Option<u128> {
        if !self.is_unit(a) {
            return None;
        }
        let g = BigInt::from(a).extended_gcd(&BigInt::from(self.modulus));
        debug_assert!(g.gcd.is_one());
        Some(self.from_bigint(&g.x))
    }

    /// Representative in `(-p^k/2, p^k/2]`.
    pub fn symmetric(&self, a: u128) -> BigInt {
        if a > self.modulus / 2 {
            BigInt::from(a) - BigInt::from(self.modulus)
        } else {
            BigInt::from(a)
        }
    }

    pub fn p_pow(&self, e: u32) -> u128 {
        if e >= self.k {
            0
        } else {
            (self.p as u128).pow(e)
        }
    }

    pub fn scalar(&self, residue: u128) -> PadicScalar {
        PadicScalar { p: self.p, k: self.k, residue: residue % self.modulus }
    }

    pub fn scalar_i64(&self, x: i64) -> PadicScalar {
        self.scalar(self.from_i128(x as i128))
    }
}

/// `v_p` of a residue: exact below the precision, a lower bound at it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Valuation {
    Exact(u32),
    AtLeast(u32),
}

impl Valuation {
    pub fn is_zero(&self) -> bool {
        matches!(self, Valuation::Exact(0))
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Exact(v) => write!(f, "{v}"),
            Valuation::AtLeast(v) => write!(f, ">={v}"),
        }
    }
}

/// An element of `Z_p` known modulo `p^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PadicScalar {
    pub p: u64,
    pub k: u32,
    pub residue: u128,
}

impl PadicScalar {
    pub fn new(p: u64, k: u32, value: i128) -> Result<Self> {
        let ring = ZpRing::new(p, k)?;
        Ok(ring.scalar(ring.from_i128(value)))
    }

    pub fn ring(&self) -> ZpRing {
        ZpRing::new(self.p, self.k).expect("scalar built from a valid ring")
    }

    pub fn zero(ring: &ZpRing) -> Self {
        ring.scalar(0)
    }

    pub fn one(ring: &ZpRing) -> Self {
        ring.scalar(1)
    }

    pub fn valuation(&self) -> Valuation {
        if self.residue == 0 {
            Valuation::AtLeast(self.k)
        } else {
            Valuation::Exact(self.ring().valuation(self.residue))
        }
    }

    pub fn is_unit(&self) -> bool {
        !self.residue.is_multiple_of(self.p as u128)
    }

    pub fn inv(&self) -> Option<Self> {
        let r = self.ring();
        r.inv(self.residue).map(|x| r.scalar(x))
    }

    pub fn symmetric(&self) -> BigInt {
        self.ring().symmetric(self.residue)
    }

    /// Reduction to a lower precision.
    pub fn truncate(&self, k: u32) -> Self {
        assert!(k <= self.k, "cannot raise precision by truncation");
        let r = ZpRing::new(self.p, k).expect("lower precision is valid");
        r.scalar(self.residue % r.modulus())
    }

    pub fn is_zero(&self) -> bool {
        self.residue.is_zero()
    }

    fn check(&self, other: &Self) {
        assert!(self.p == other.p && self.k == other.k, "mixed p-adic rings");
    }
}

impl fmt::Display for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + O({}^{})", self.residue, self.p, self.k)
    }
}

impl Add for PadicScalar {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.check(&rhs);
        let r = self.ring();
        r.scalar(r.add(self.residue, rhs.residue))
    }
}

impl Sub for PadicScalar {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.check(&rhs);
        let r = self.ring();
        r.scalar(r.sub(self.residue, rhs.residue))
    }
}

impl Mul for PadicScalar {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.check(&rhs);
        let r = self.ring();
        r.scalar(r.mul(self.residue, rhs.residue))
    }
}

impl Neg for PadicScalar {
    type Output = Self;
    fn neg(self) -> Self {
        let r = self.ring();
        r.scalar(r.neg(self.residue))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn valuation_reports_lower_bound_at_zero() {
        let r = ZpRing::new(3, 5).unwrap();
        assert_eq!(r.scalar(0).valuation(), Valuation::AtLeast(5));
        assert_eq!(r.scalar(18).valuation(), Valuation::Exact(2));
        assert_eq!(r.scalar_i64(-1).residue, 242);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(ZpRing::new(4, 3), Err(LinAlgError::NotPrime(4)));
        assert_eq!(ZpRing::new(3, 0), Err(LinAlgError::ZeroPrecision));
        assert!(matches!(ZpRing::new(11, 40), Err(LinAlgError::PrecisionTooLarge { .. })));
    }

    #[test]
    fn all_tiers_agree_with_bigint() {
        for (p, k) in [(3u64, 20u32), (11, 18), (11, 20), (5, 50)] {
            let r = ZpRing::new(p, k).unwrap();
            let m = BigUint::from(r.modulus());
            let a = r.modulus() - 12345;
            let b = r.modulus() / 3 + 7;
            let expect = (BigUint::from(a) * BigUint::from(b)) % &m;
            assert_eq!(BigUint::from(r.mul(a, b)), expect, "p={p} k={k}");
        }
    }

    #[test]
    fn inverse_of_unit() {
        let r = ZpRing::new(11, 20).unwrap();
        let x = r.from_i128(-7);
        let y = r.inv(x).unwrap();
        assert_eq!(r.mul(x, y), 1);
        assert!(r.inv(r.from_i128(22)).is_none());
    }

    proptest! {
        #[test]
        fn ring_laws(a in any::<i64>(), b in any::<i64>(), c in any::<i64>()) {
            let r = ZpRing::new(5, 30).unwrap();
            let (x, y, z) = (r.scalar_i64(a), r.scalar_i64(b), r.scalar_i64(c));
            prop_assert_eq!(x * (y + z), x * y + x * z);
            prop_assert_eq!((x - y) + y, x);
            prop_assert_eq!(x * y, y * x);
        }
    }
}

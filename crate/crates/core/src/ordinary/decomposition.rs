use num_bigint::BigUint;

use super::{OrdinaryError, Result};
use crate::exactlin::ZpMatrix;

/// Upper bound on p-th power steps before giving up.
const MAX_STEPS: usize = 1 << 14;

/// `lim U^(n!)` modulo `p^k`.
///
/// The sequence `U, U^p, U^(p^2), ...` is eventually periodic. Brent's
/// method finds a term `A` on the cycle together with the period `l`, so
/// `A^(p^l) = A` and `A^(p^l - 1)` is the idempotent.
pub fn hida_idempotent(u: &ZpMatrix) -> Result<ZpMatrix> {
    assert!(u.is_square(), "idempotent of a non-square matrix");
    let p = u.ring().p();
    let step = |m: &ZpMatrix| m.pow_u64(p);
    let mut power = 1usize;
    let mut period = 1usize;
    let mut tortoise = u.clone();
    let mut hare = step(u);
    let mut steps = 1;
    while tortoise != hare {
        if power == period {
            tortoise = hare.clone();
            power *= 2;
            period = 0;
        }
        hare = step(&hare);
        period += 1;
        steps += 1;
        if steps > MAX_STEPS {
            return Err(OrdinaryError::NonStabilization { steps });
        }
    }
    let exponent = BigUint::from(p).pow(period as u32) - 1u32;
    let e = hare.pow(&exponent);
    if &e * &e != e {
        return Err(OrdinaryError::NotIdempotent);
    }
    Ok(e)
}

/// Splitting of `(Z/p^k)^n` into the image of an idempotent and its
/// complement, with the change of basis to `[summand | complement]`.
#[derive(Clone, Debug)]
pub struct OrdinaryDecomposition {
    level: u64,
    idempotent: ZpMatrix,
    change: ZpMatrix,
    change_inv: ZpMatrix,
    rank: usize,
}

/// Saturated image of `e` and of `1 - e`.
pub fn ordinary_summand(level: u64, e: ZpMatrix) -> Result<OrdinaryDecomposition> {
    OrdinaryDecomposition::new(level, e)
}

impl OrdinaryDecomposition {
    pub fn new(level: u64, e: ZpMatrix) -> Result<Self> {
        if !e.is_square() || &e * &e != e {
            return Err(OrdinaryError::NotIdempotent);
        }
        let ring = e.ring();
        let n = e.rows();
        let complement = &ZpMatrix::identity(ring, n) - &e;
        let im = e.select_columns(&e.independent_columns_mod_p());
        let co = complement.select_columns(&complement.independent_columns_mod_p());
        let rank = im.cols();
        let change = im.hstack(&co);
        // image and kernel of an idempotent are complementary summands
        let change_inv = change.inverse()?;
        Ok(Self { level, idempotent: e, change, change_inv, rank })
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn idempotent(&self) -> &ZpMatrix {
        &self.idempotent
    }

    /// Rank of the ordinary summand.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn ambient_rank(&self) -> usize {
        self.idempotent.rows()
    }

    pub fn complement_rank(&self) -> usize {
        self.ambient_rank() - self.rank
    }

    /// Summand basis as columns in ambient coordinates.
    pub fn summand_basis(&self) -> ZpMatrix {
        self.change.select_columns(&(0..self.rank).collect::<Vec<_>>())
    }

    pub fn complement_basis(&self) -> ZpMatrix {
        self.change.select_columns(&(self.rank..self.ambient_rank()).collect::<Vec<_>>())
    }

    pub fn commutes_with(&self, t: &ZpMatrix) -> bool {
        &self.idempotent * t == t * &self.idempotent
    }

    /// Action of a commuting operator on the summand basis.
    pub fn restrict(&self, t: &ZpMatrix) -> ZpMatrix {
        Self::restrict_between(self, self, t)
    }

    /// Block of `t: upper -> lower` between the two summands, for a map that
    /// intertwines the idempotents.
    pub fn restrict_between(upper: &Self, lower: &Self, t: &ZpMatrix) -> ZpMatrix {
        let full = &(&lower.change_inv * t) * &upper.change;
        full.submatrix(0, 0, lower.rank, upper.rank)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlin::ZpRing;
    use proptest::prelude::*;

    #[test]
    fn unit_and_nilpotent_extremes() {
        let r = ZpRing::new(3, 10).unwrap();
        let u = ZpMatrix::from_i64(r, 2, 2, &[2, 1, 1, 1]);
        assert_eq!(hida_idempotent(&u).unwrap(), ZpMatrix::identity(r, 2));
        let z = ZpMatrix::from_i64(r, 2, 2, &[3, 6, 9, -3]);
        assert!(hida_idempotent(&z).unwrap().is_zero());
        let d = ZpMatrix::from_i64(r, 2, 2, &[5, 0, 0, 3 * 7]);
        assert_eq!(hida_idempotent(&d).unwrap(), ZpMatrix::from_i64(r, 2, 2, &[1, 0, 0, 0]));
    }

    #[test]
    fn zero_idempotent_gives_empty_summand() {
        let r = ZpRing::new(5, 4).unwrap();
        let dec = ordinary_summand(1, ZpMatrix::zeros(r, 3, 3)).unwrap();
        assert_eq!(dec.rank(), 0);
        assert_eq!(dec.complement_rank(), 3);
    }

    proptest! {
        #[test]
        fn idempotent_contract(entries in prop::collection::vec(-20i64..20, 16), p in prop::sample::select(vec![2u64, 3, 5, 11])) {
            let r = ZpRing::new(p, 12).unwrap();
            let u = ZpMatrix::from_i64(r, 4, 4, &entries);
            let e = hida_idempotent(&u).unwrap();
            prop_assert_eq!(&e * &e, e.clone());
            prop_assert_eq!(&e * &u, &u * &e);
            let dec = ordinary_summand(1, e).unwrap();
            prop_assert_eq!(dec.rank() + dec.complement_rank(), 4);
            // U is invertible on the summand and topologically nilpotent off it
            prop_assert_eq!(dec.restrict(&u).rank_mod_p(), dec.rank());
            let off = &(&ZpMatrix::identity(r, 4) - dec.idempotent()) * &u;
            prop_assert!(off.pow_u64(4).reduce(1).unwrap().is_zero());
        }
    }
}

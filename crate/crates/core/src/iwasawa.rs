//! Finite-level Iwasawa algebras `Z_p[Delta_1/Delta_r]` and modules over
//! them given by the action of a generator, with freeness and control tests.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactlin::{IntMatrix, Lattice, LinAlgError, ZpMatrix, ZpRing};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IwasawaError {
    #[error("level index must be at least 1")]
    ZeroLevel,
    #[error("cannot map level {from} to level {to}")]
    LevelOrder { from: u32, to: u32 },
    #[error("not a Lambda_{r}-action: gamma^{order} differs from the identity")]
    NotAnAction { r: u32, order: u64 },
    #[error("module is not free; kernel witness mod p {witness:?}")]
    NotFree { witness: Vec<u128> },
    #[error("map does not intertwine the generator actions")]
    NotIntertwining,
    #[error("group order {0} is too large")]
    TooLarge(u128),
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
}

pub type Result<T> = std::result::Result<T, IwasawaError>;

/// `Z/p^k [<gamma>]` with `gamma = 1 + p` of order `p^(r-1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LambdaRing {
    coeffs: ZpRing,
    r: u32,
}

impl LambdaRing {
    pub fn new(p: u64, r: u32, k: u32) -> Result<Self> {
        if r == 0 {
            return Err(IwasawaError::ZeroLevel);
        }
        let coeffs = ZpRing::new(p, k)?;
        match (p as u128).checked_pow(r - 1) {
            Some(order) if order <= 1 << 20 => {}
            other => return Err(IwasawaError::TooLarge(other.unwrap_or(u128::MAX))),
        }
        Ok(Self { coeffs, r })
    }

    pub fn coefficients(&self) -> ZpRing {
        self.coeffs
    }

    pub fn p(&self) -> u64 {
        self.coeffs.p()
    }

    pub fn level_index(&self) -> u32 {
        self.r
    }

    pub fn precision(&self) -> u32 {
        self.coeffs.precision()
    }

    /// `|Delta_1 / Delta_r| = p^(r-1)`.
    pub fn group_order(&self) -> usize {
        (self.p() as usize).pow(self.r - 1)
    }

    /// The integer `1 + p` whose image generates the group.
    pub fn gamma(&self) -> u64 {
        1 + self.p()
    }

    /// For `p = 2` the generator convention is a guess.
    pub fn experimental(&self) -> bool {
        self.p() == 2
    }

    pub fn one(&self) -> LambdaElement {
        self.group_element(0)
    }

    /// `gamma^j`.
    pub fn group_element(&self, j: usize) -> LambdaElement {
        let mut coeffs = vec![0; self.group_order()];
        coeffs[j % self.group_order()] = 1 % self.coeffs.modulus();
        LambdaElement { ring: *self, coeffs }
    }

    pub fn element(&self, coeffs: &[i64]) -> LambdaElement {
        let n = self.group_order();
        let mut out = vec![0u128; n];
        for (j, &c) in coeffs.iter().enumerate() {
            out[j % n] = self.coeffs.add(out[j % n], self.coeffs.from_i128(c as i128));
        }
        LambdaElement { ring: *self, coeffs: out }
    }
}

/// `sum_j c_j gamma^j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaElement {
    ring: LambdaRing,
    coeffs: Vec<u128>,
}

impl LambdaElement {
    pub fn ring(&self) -> LambdaRing {
        self.ring
    }

    pub fn coefficients(&self) -> &[u128] {
        &self.coeffs
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.ring, other.ring, "mixed rings");
        let r = self.ring.coeffs;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| r.add(a, b)).collect();
        Self { ring: self.ring, coeffs }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.ring, other.ring, "mixed rings");
        let r = self.ring.coeffs;
        let n = self.coeffs.len();
        let mut out = vec![0u128; n];
        for (i, &a) in self.coeffs.iter().enumerate().filter(|(_, a)| **a != 0) {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[(i + j) % n] = r.add(out[(i + j) % n], r.mul(a, b));
            }
        }
        Self { ring: self.ring, coeffs: out }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Image under `Lambda_r -> Lambda_s`, `gamma_r -> gamma_s`.
    pub fn augment(&self, s: u32) -> Result<Self> {
        let r = self.ring.r;
        if s == 0 || s >= r {
            return Err(IwasawaError::LevelOrder { from: r, to: s });
        }
        let target = LambdaRing { coeffs: self.ring.coeffs, r: s };
        let n = target.group_order();
        let z = self.ring.coeffs;
        let mut out = vec![0u128; n];
        for (j, &c) in self.coeffs.iter().enumerate() {
            out[j % n] = z.add(out[j % n], c);
        }
        Ok(Self { ring: target, coeffs: out })
    }
}

/// A free `Z_p`-module of finite rank with a `Lambda_r`-action given by the
/// matrix of `gamma`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaModule {
    ring: LambdaRing,
    gamma: ZpMatrix,
}

impl LambdaModule {
    pub fn new(ring: LambdaRing, gamma: ZpMatrix) -> Result<Self> {
        if !gamma.is_square() {
            return Err(LinAlgError::Dimension("action matrix must be square".into()).into());
        }
        if gamma.ring() != ring.coeffs {
            return Err(LinAlgError::Dimension("action and ring differ in precision".into()).into());
        }
        let order = ring.group_order() as u64;
        if gamma.pow_u64(order) != ZpMatrix::identity(ring.coeffs, gamma.rows()) {
            return Err(IwasawaError::NotAnAction { r: ring.r, order });
        }
        Ok(Self { ring, gamma })
    }

    /// Restricts an ambient integral action `g` to the lattice `l`.
    pub fn from_lattice(ring: LambdaRing, l: &Lattice, g: &IntMatrix) -> Result<Self> {
        let c = l.as_columns();
        let gc = g * &c;
        let coords = crate::exactlin::solve_int_many(&c, &gc)
            .map_err(|_| LinAlgError::NoSolution("action does not preserve the lattice".into()))?;
        Self::new(ring, ZpMatrix::from_int(ring.coeffs, &coords))
    }

    pub fn ring(&self) -> LambdaRing {
        self.ring
    }

    pub fn gamma(&self) -> &ZpMatrix {
        &self.gamma
    }

    /// `Z_p`-rank.
    pub fn rank(&self) -> usize {
        self.gamma.rows()
    }

    /// Matrix of a group-ring element.
    pub fn act(&self, x: &LambdaElement) -> ZpMatrix {
        assert_eq!(x.ring, self.ring, "element from another ring");
        let z = self.ring.coeffs;
        let n = self.rank();
        let mut out = ZpMatrix::zeros(z, n, n);
        let mut power = ZpMatrix::identity(z, n);
        for &c in &x.coeffs {
            if c != 0 {
                out = &out + &power.scale(c);
            }
            power = &power * &self.gamma;
        }
        out
    }

    /// Tries to exhibit the module as `Lambda_r^d`. Generators lift a basis
    /// of `M / (p, gamma - 1) M`; the induced map `Lambda_r^d -> M` is always
    /// onto, so freeness is injectivity, tested mod `p`.
    pub fn freeness(&self) -> Result<FreeBasis> {
        let z = self.ring.coeffs;
        let n = self.rank();
        let m = self.ring.group_order();
        let aug = &self.gamma - &ZpMatrix::identity(z, n);
        let stacked = aug.hstack(&ZpMatrix::identity(z, n));
        let generators: Vec<usize> = stacked.independent_columns_mod_p().into_iter().filter(|&j| j >= n).map(|j| j - n).collect();
        let d = generators.len();
        let mut columns = Vec::with_capacity(d * m);
        for &g in &generators {
            let mut v = vec![0u128; n];
            v[g] = 1 % z.modulus();
            for _ in 0..m {
                let next = self.gamma.mul_vec(&v);
                columns.push(std::mem::replace(&mut v, next));
            }
        }
        let phi = ZpMatrix::from_columns(z, n, &columns);
        if d * m == n && phi.rank_mod_p() == n {
            return Ok(FreeBasis { rank: d, generators, matrix: phi });
        }
        let witness = phi.kernel_vector_mod_p().expect("more columns than rank");
        Err(IwasawaError::NotFree { witness })
    }

    /// Serializable snapshot.
    pub fn record(&self) -> LambdaModuleRecord {
        LambdaModuleRecord {
            p: self.ring.p(),
            r: self.ring.r,
            k: self.ring.precision(),
            gamma: self.gamma.to_int(),
        }
    }

    pub fn from_record(rec: &LambdaModuleRecord) -> Result<Self> {
        let ring = LambdaRing::new(rec.p, rec.r, rec.k)?;
        Self::new(ring, ZpMatrix::from_int(ring.coeffs, &rec.gamma))
    }
}

/// A `Lambda_r`-basis: the standard vectors `generators`, and the matrix of
/// `(i, j) -> gamma^j e_i` whose columns form a `Z_p`-basis.
#[derive(Clone, Debug)]
pub struct FreeBasis {
    pub rank: usize,
    pub generators: Vec<usize>,
    pub matrix: ZpMatrix,
}

/// On-disk form of a [`LambdaModule`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LambdaModuleRecord {
    pub p: u64,
    pub r: u32,
    pub k: u32,
    pub gamma: IntMatrix,
}

/// Outcome of comparing `M_r (x) Lambda_s` with `M_s` along a map `t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlReport {
    pub rank_upper: usize,
    pub rank_lower: usize,
    pub surjective: bool,
    pub kills_augmentation: bool,
    /// rank mod p of `gamma_r^(p^(s-1)) - 1`
    pub augmentation_rank: usize,
    pub passed: bool,
}

/// Whether `t: M_r -> M_s` induces `M_r (x)_{Lambda_r} Lambda_s = M_s`.
///
/// The map is onto iff it is onto mod `p`. Its kernel is then a saturated
/// summand of rank `n_r - n_s`; it equals `J M_r`, `J` the kernel of
/// `Lambda_r -> Lambda_s`, iff `t` kills `J M_r` and `J M_r` has that rank mod `p`.
pub fn control_check(upper: &LambdaModule, lower: &LambdaModule, t: &ZpMatrix) -> Result<ControlReport> {
    let (ru, rl) = (upper.ring, lower.ring);
    if ru.p() != rl.p() || rl.r > ru.r || ru.precision() != rl.precision() {
        return Err(IwasawaError::LevelOrder { from: ru.r, to: rl.r });
    }
    let (nu, nl) = (upper.rank(), lower.rank());
    if t.shape() != (nl, nu) {
        return Err(LinAlgError::Dimension(format!("map of shape {:?} between ranks {nu} and {nl}", t.shape())).into());
    }
    if (t * &upper.gamma) != (&lower.gamma * t) {
        return Err(IwasawaError::NotIntertwining);
    }
    let z = ru.coeffs;
    let step = rl.group_order() as u64;
    let j = &upper.gamma.pow_u64(step) - &ZpMatrix::identity(z, nu);
    let surjective = t.rank_mod_p() == nl;
    let kills_augmentation = (t * &j).is_zero();
    let augmentation_rank = j.rank_mod_p();
    let passed = surjective && kills_augmentation && nu >= nl && augmentation_rank >= nu - nl;
    Ok(ControlReport { rank_upper: nu, rank_lower: nl, surjective, kills_augmentation, augmentation_rank, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cyclic(ring: LambdaRing) -> ZpMatrix {
        let n = ring.group_order();
        let mut g = ZpMatrix::zeros(ring.coefficients(), n, n);
        for i in 0..n {
            g.set((i + 1) % n, i, 1);
        }
        g
    }

    #[test]
    fn group_orders() {
        assert_eq!(LambdaRing::new(3, 1, 10).unwrap().group_order(), 1);
        assert_eq!(LambdaRing::new(3, 2, 10).unwrap().group_order(), 3);
        assert_eq!(LambdaRing::new(11, 2, 6).unwrap().group_order(), 11);
        let r = LambdaRing::new(3, 2, 10).unwrap();
        assert_eq!(r.group_element(1).mul(&r.group_element(2)), r.one());
        assert!(LambdaRing::new(2, 3, 10).unwrap().experimental());
        assert!(matches!(LambdaRing::new(3, 0, 10), Err(IwasawaError::ZeroLevel)));
    }

    #[test]
    fn augmentation_examples() {
        let r = LambdaRing::new(3, 2, 10).unwrap();
        let one = LambdaRing::new(3, 1, 10).unwrap();
        assert_eq!(r.group_element(1).augment(1).unwrap(), one.one());
        assert_eq!(r.element(&[1, 1, 1]).augment(1).unwrap(), one.element(&[3]));
        assert!(r.element(&[]).augment(1).unwrap().is_zero());
        assert!(r.one().augment(2).is_err());
    }

    #[test]
    fn regular_representation_is_free() {
        let r = LambdaRing::new(3, 2, 8).unwrap();
        let m = LambdaModule::new(r, cyclic(r)).unwrap();
        assert_eq!(m.freeness().unwrap().rank, 1);
        // base change to Lambda_1 via the augmentation
        let lower = LambdaModule::new(LambdaRing::new(3, 1, 8).unwrap(), ZpMatrix::identity(r.coefficients(), 1)).unwrap();
        let t = ZpMatrix::from_i64(r.coefficients(), 1, 3, &[1, 1, 1]);
        assert!(control_check(&m, &lower, &t).unwrap().passed);
        let zero = ZpMatrix::zeros(r.coefficients(), 1, 3);
        assert!(!control_check(&m, &lower, &zero).unwrap().passed);
    }

    #[test]
    fn trivial_action_is_not_free() {
        let r = LambdaRing::new(3, 2, 8).unwrap();
        let m = LambdaModule::new(r, ZpMatrix::identity(r.coefficients(), 1)).unwrap();
        match m.freeness() {
            Err(IwasawaError::NotFree { witness }) => {
                assert_eq!(witness.len(), 3);
                assert!(witness.iter().any(|&w| w != 0));
            }
            other => panic!("expected NotFree, got {other:?}"),
        }
    }

    #[test]
    fn non_action_is_rejected() {
        let r = LambdaRing::new(3, 2, 8).unwrap();
        let g = ZpMatrix::from_i64(r.coefficients(), 2, 2, &[1, 1, 0, 1]);
        assert!(matches!(LambdaModule::new(r, g), Err(IwasawaError::NotAnAction { .. })));
    }

    #[test]
    fn record_roundtrip() {
        let r = LambdaRing::new(5, 2, 6).unwrap();
        let m = LambdaModule::new(r, cyclic(r)).unwrap();
        let json = serde_json::to_string(&m.record()).unwrap();
        let back: LambdaModuleRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(LambdaModule::from_record(&back).unwrap(), m);
    }

    fn ring_elements() -> impl Strategy<Value = (Vec<i64>, Vec<i64>)> {
        (prop::collection::vec(-50i64..50, 9), prop::collection::vec(-50i64..50, 9))
    }

    proptest! {
        #[test]
        fn augmentation_is_a_ring_map((a, b) in ring_elements()) {
            let r = LambdaRing::new(3, 3, 6).unwrap();
            let (x, y) = (r.element(&a), r.element(&b));
            for s in [1, 2] {
                let lhs = x.mul(&y).augment(s).unwrap();
                let rhs = x.augment(s).unwrap().mul(&y.augment(s).unwrap());
                prop_assert_eq!(lhs, rhs);
                prop_assert_eq!(x.add(&y).augment(s).unwrap(), x.augment(s).unwrap().add(&y.augment(s).unwrap()));
            }
        }

        #[test]
        fn free_modules_have_full_rank_and_control(d in 1usize..3, seed in 0u64..1000) {
            // Lambda_2^d twisted by a random invertible change of basis
            let r = LambdaRing::new(3, 2, 6).unwrap();
            let z = r.coefficients();
            let n = 3 * d;
            let mut g = ZpMatrix::zeros(z, n, n);
            for b in 0..d {
                for i in 0..3 {
                    g.set(3 * b + (i + 1) % 3, 3 * b + i, 1);
                }
            }
            let mut q = ZpMatrix::identity(z, n);
            let mut s = seed;
            for i in 0..n {
                for j in 0..n {
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    if i < j {
                        q.set(i, j, (s >> 33) as u128 % 729);
                    }
                }
            }
            let gamma = &(&q * &g) * &q.inverse().unwrap();
            let m = LambdaModule::new(r, gamma).unwrap();
            let free = m.freeness().unwrap();
            prop_assert_eq!(free.rank * r.group_order(), m.rank());
            // own base change: M / (gamma - 1) M, reached through the free basis
            let lower_ring = LambdaRing::new(3, 1, 6).unwrap();
            let lower = LambdaModule::new(lower_ring, ZpMatrix::identity(z, d)).unwrap();
            let inv = free.matrix.inverse().unwrap();
            let mut sum = ZpMatrix::zeros(z, d, n);
            for i in 0..d {
                for j in 0..3 {
                    sum.set(i, 3 * i + j, 1);
                }
            }
            let t = &sum * &inv;
            prop_assert!(control_check(&m, &lower, &t).unwrap().passed);
        }
    }
}

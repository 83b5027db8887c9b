//! Weight-2 Manin symbols for `Gamma1(M)`: the quotient presentation, cusps,
//! boundary map, cuspidal lattice and intersection pairing.

mod cusps;
mod pairing;
mod space;
mod symbols;

pub use cusps::{boundary_map, Cusp, CuspSpace};
pub use pairing::{cuspidal_lattice, intersection_pairing, CuspidalData};
pub use space::{build_space, build_space_for_level, SpaceRecord, SymbolSpace};
pub use symbols::{ManinSymbols, Symbol};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactlin::{is_prime, LinAlgError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModSymError {
    #[error("level {0} is not supported (need M > 4)")]
    UnsupportedLevel(u64),
    #[error("invalid level parameters: {0}")]
    InvalidLevel(String),
    #[error("({c}:{d}) is not a Manin symbol at level {level}")]
    InvalidSymbol { c: i64, d: i64, level: u64 },
    #[error("symbol quotient has torsion invariants {0:?}")]
    Torsion(Vec<String>),
    #[error("coefficient overflow while eliminating relations")]
    Overflow,
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
}

pub type Result<T> = std::result::Result<T, ModSymError>;

/// Symbol tables are dense in `M^2`, so levels stay well below this.
pub const MAX_LEVEL: u64 = 1 << 14;

/// Tame level, prime and p-power exponent; the level is `tame * prime^exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LevelParams {
    pub tame: u64,
    pub prime: u64,
    pub exponent: u32,
}

impl LevelParams {
    pub fn new(tame: u64, prime: u64, exponent: u32) -> Result<Self> {
        if !is_prime(prime) {
            return Err(ModSymError::InvalidLevel(format!("{prime} is not prime")));
        }
        if tame == 0 || tame.is_multiple_of(prime) {
            return Err(ModSymError::InvalidLevel(format!("tame level {tame} must be prime to {prime}")));
        }
        if tame * prime <= 4 {
            return Err(ModSymError::InvalidLevel(format!("need tame * p > 4, got {tame} * {prime}")));
        }
        prime
            .checked_pow(exponent)
            .and_then(|q| q.checked_mul(tame))
            .filter(|&m| m < MAX_LEVEL)
            .ok_or_else(|| ModSymError::InvalidLevel("level too large".into()))?;
        Ok(Self { tame, prime, exponent })
    }

    pub fn level(&self) -> u64 {
        self.tame * self.prime_power()
    }

    pub fn prime_power(&self) -> u64 {
        self.prime.pow(self.exponent)
    }

    /// Same tame level and prime at another exponent.
    pub fn with_exponent(&self, exponent: u32) -> Result<Self> {
        Self::new(self.tame, self.prime, exponent)
    }
}

impl std::fmt::Display for LevelParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}*{}^{}", self.tame, self.prime, self.exponent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_validation() {
        assert_eq!(LevelParams::new(5, 3, 2).unwrap().level(), 45);
        assert!(LevelParams::new(3, 3, 1).is_err());
        assert!(LevelParams::new(1, 3, 2).is_err());
        assert!(LevelParams::new(5, 4, 1).is_err());
        assert_eq!(LevelParams::new(1, 11, 1).unwrap().level(), 11);
    }
}

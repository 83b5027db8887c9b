//! Exact linear algebra over the integers and over `Z/p^k`.
//!
//! Integer matrices carry arbitrary-precision entries. Anything reduced
//! modulo a prime power goes through [`ZpRing`] so the working precision is
//! always attached to the value.

mod int_matrix;
mod isotropic;
mod lattice;
mod padic;
mod snf;
mod zp_matrix;
mod zp_span;

pub use int_matrix::IntMatrix;
pub use isotropic::{isotropic_summand_report, IsotropicReport};
pub use lattice::{hermite_rows, kernel_int, saturate, solve_int, solve_int_many, Lattice};
pub use padic::{PadicScalar, Valuation, ZpRing};
pub use snf::{snf, SmithForm};
pub use zp_matrix::{lift_vector, ZpMatrix};
pub use zp_span::ZpSpan;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinAlgError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("lattice basis is linearly dependent (rank {rank} < {len} vectors)")]
    DependentBasis { rank: usize, len: usize },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("precision p^k = {p}^{k} does not fit the residue type")]
    PrecisionTooLarge { p: u64, k: u32 },
    #[error("precision must be at least 1")]
    ZeroPrecision,
    #[error("matrix is not invertible modulo p")]
    Singular,
    #[error("pairing is not perfect at {p}: det = {det}")]
    NotPerfect { p: u64, det: String },
    #[error("rank mismatch: ambient rank {ambient} is not twice the sublattice rank {sub}")]
    RankMismatch { ambient: usize, sub: usize },
    #[error("sublattice is not isotropic: pairing of basis vectors {i} and {j} is {value}")]
    NotIsotropic { i: usize, j: usize, value: String },
    #[error("no integral solution: {0}")]
    NoSolution(String),
    #[error("malformed matrix data: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, LinAlgError>;

/// Trial-division primality test; the primes handled here are small.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

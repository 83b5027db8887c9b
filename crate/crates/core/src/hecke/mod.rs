//! Hecke and diamond operators on Manin symbols, level-changing maps, the
//! Atkin-Lehner involution and the Hecke algebra they generate.

mod algebra;
mod operators;
mod restricted;

pub use algebra::HeckeAlgebra;
pub use operators::{
    atkin_lehner, diamond, diamond_unit, heilbronn, hecke_t, pullback_map, trace_map, twisted_pairing,
    OperatorMatrix,
};
pub use restricted::CuspidalHecke;

use thiserror::Error;

use crate::exactlin::LinAlgError;
use crate::modsym::ModSymError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HeckeError {
    #[error("{a} is not a unit modulo {modulus}")]
    NotUnit { a: i64, modulus: u64 },
    #[error("level {from} does not cover level {to}")]
    LevelOrder { from: u64, to: u64 },
    #[error("operation needs tame level and prime, but the space was built from a bare level")]
    MissingParams,
    #[error("pairing is not self-adjoint for {label}")]
    NotSelfAdjoint { label: String },
    #[error("{label} does not preserve the cuspidal lattice")]
    NotCuspidal { label: String },
    #[error(transparent)]
    ModSym(#[from] ModSymError),
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
}

pub type Result<T> = std::result::Result<T, HeckeError>;

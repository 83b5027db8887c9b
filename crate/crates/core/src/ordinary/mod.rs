//! Hida's ordinary projector, ordinary summands, eigen packets, q-expansion
//! lattices with their Hecke duality, unit roots and p-stabilization.

mod decomposition;
mod level;
mod packets;
mod qexp;
mod stabilization;

pub use decomposition::{hida_idempotent, ordinary_summand, OrdinaryDecomposition};
pub use level::{default_coefficient_bound, OrdinaryLevel};
pub use packets::{eigen_packets, unit_root, EigenPacket, PacketRecord, Provenance};
pub use qexp::{qexp_basis, CuspFormLattice};
pub use stabilization::{stabilization_check, StabilizationReport};

use thiserror::Error;

use crate::exactlin::LinAlgError;
use crate::hecke::HeckeError;
use crate::modsym::ModSymError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrdinaryError {
    #[error("matrix is not idempotent modulo p^k")]
    NotIdempotent,
    #[error("powers of the operator did not stabilize after {steps} p-th powers")]
    NonStabilization { steps: usize },
    #[error("a_p has positive valuation {valuation}; no unit root")]
    NotOrdinary { valuation: u32 },
    #[error("eigen block of rank {rank} could not be split at precision {precision}; raise the precision or the coefficient bound")]
    EigenCollision { rank: usize, precision: u32 },
    #[error("operator {0} is missing from the algebra")]
    MissingOperator(String),
    #[error("no precision left for coordinates in the algebra basis")]
    PrecisionExhausted,
    #[error(transparent)]
    Hecke(#[from] HeckeError),
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
    #[error(transparent)]
    ModSym(#[from] ModSymError),
}

pub type Result<T> = std::result::Result<T, OrdinaryError>;

//! Exact modular symbols for `Gamma1(M)`, Hecke operators, Hida ordinary
//! projectors and Iwasawa-module checks at small levels.

pub mod arith;
pub mod exactlin;
pub mod harness;
pub mod hecke;
pub mod iwasawa;
pub mod modsym;
pub mod ordinary;

use std::collections::HashMap;
use std::sync::Mutex;

use super::operators::{atkin_lehner, diamond, diamond_unit, hecke_t};
use super::{HeckeError, OperatorMatrix, Result};
use crate::arith::unit_generators;
use crate::exactlin::IntMatrix;
use crate::modsym::{CuspidalData, SymbolSpace};

/// A symbol space together with its cuspidal lattice, handing out operators
/// already restricted to that lattice. Restrictions are memoized.
#[derive(Debug)]
pub struct CuspidalHecke {
    space: SymbolSpace,
    cusp: CuspidalData,
    hecke: Mutex<HashMap<u64, IntMatrix>>,
    diamonds: Mutex<HashMap<i64, IntMatrix>>,
}

impl CuspidalHecke {
    pub fn new(space: SymbolSpace) -> Result<Self> {
        let cusp = CuspidalData::new(&space)?;
        Ok(Self { space, cusp, hecke: Mutex::default(), diamonds: Mutex::default() })
    }

    pub fn space(&self) -> &SymbolSpace {
        &self.space
    }

    pub fn cuspidal(&self) -> &CuspidalData {
        &self.cusp
    }

    pub fn level(&self) -> u64 {
        self.space.level()
    }

    /// Twice the genus.
    pub fn dim(&self) -> usize {
        self.cusp.dim()
    }

    /// Restriction of a full-space operator to the cuspidal lattice.
    pub fn restrict(&self, op: &OperatorMatrix) -> Result<IntMatrix> {
        self.cusp.restrict(&op.matrix).ok_or_else(|| HeckeError::NotCuspidal { label: op.label.clone() })
    }

    /// Restriction of a map from this space to `target`, between the two
    /// cuspidal lattices.
    pub fn restrict_to(&self, target: &CuspidalHecke, op: &OperatorMatrix) -> Result<IntMatrix> {
        let image = &op.matrix * &self.cusp.basis;
        let coords = &target.cusp.left_inverse * &image;
        if &target.cusp.basis * &coords != image {
            return Err(HeckeError::NotCuspidal { label: op.label.clone() });
        }
        Ok(coords)
    }

    /// Memoizes `T(n)` from a precomputed full-space matrix.
    pub fn seed_t(&self, n: u64, op: &OperatorMatrix) -> Result<()> {
        let m = self.restrict(op)?;
        self.hecke.lock().expect("operator memo").insert(n, m);
        Ok(())
    }

    pub fn t(&self, n: u64) -> Result<IntMatrix> {
        if let Some(m) = self.hecke.lock().expect("operator memo").get(&n) {
            return Ok(m.clone());
        }
        let m = self.restrict(&hecke_t(&self.space, n))?;
        self.hecke.lock().expect("operator memo").insert(n, m.clone());
        Ok(m)
    }

    /// Diamond operator of a unit modulo the full level.
    pub fn diamond_unit(&self, b: i64) -> Result<IntMatrix> {
        let b = b.rem_euclid(self.level() as i64);
        if let Some(m) = self.diamonds.lock().expect("operator memo").get(&b) {
            return Ok(m.clone());
        }
        let m = self.restrict(&diamond_unit(&self.space, b)?)?;
        self.diamonds.lock().expect("operator memo").insert(b, m.clone());
        Ok(m)
    }

    /// Diamond operator of a unit modulo `p^r`, lifted trivially at the tame level.
    pub fn diamond(&self, a: i64) -> Result<IntMatrix> {
        self.restrict(&diamond(&self.space, a)?)
    }

    pub fn atkin_lehner(&self) -> Result<IntMatrix> {
        self.restrict(&atkin_lehner(&self.space))
    }

    /// Labelled diamonds for a generating set of `(Z/M)^x`.
    pub fn diamond_generators(&self) -> Result<Vec<(String, IntMatrix)>> {
        unit_generators(self.level() as i64)
            .into_iter()
            .map(|b| Ok((format!("<{b}>"), self.diamond_unit(b)?)))
            .collect()
    }
}

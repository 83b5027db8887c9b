use super::decomposition::{hida_idempotent, OrdinaryDecomposition};
use super::packets::{eigen_packets, EigenPacket};
use super::qexp::{qexp_basis, CuspFormLattice};
use super::Result;
use crate::exactlin::{ZpMatrix, ZpRing};
use crate::hecke::{trace_map, CuspidalHecke, HeckeAlgebra, HeckeError};
use crate::modsym::{LevelParams, SymbolSpace};

/// Coefficient bound: the Sturm bound `[PSL2(Z) : Gamma1(M)] / 6` plus one,
/// raised to at least `p` and 12.
pub fn default_coefficient_bound(space: &SymbolSpace, prime: u64) -> u64 {
    let sturm = space.symbols().len() as u64 / 6 + 1;
    sturm.max(prime).max(12)
}

/// Everything ordinary at one level: cuspidal Hecke operators, the
/// projector for `T(p)` and the summand it cuts out.
#[derive(Debug)]
pub struct OrdinaryLevel {
    params: LevelParams,
    hecke: CuspidalHecke,
    ring: ZpRing,
    n_max: u64,
    decomposition: OrdinaryDecomposition,
}

impl OrdinaryLevel {
    pub fn build(space: SymbolSpace, precision: u32, n_max: Option<u64>) -> Result<Self> {
        let hecke = CuspidalHecke::new(space)?;
        Self::from_hecke(hecke, precision, n_max)
    }

    pub fn from_hecke(hecke: CuspidalHecke, precision: u32, n_max: Option<u64>) -> Result<Self> {
        let params = hecke.space().params().ok_or(HeckeError::MissingParams)?;
        let ring = ZpRing::new(params.prime, precision)?;
        let n_max = n_max.unwrap_or_else(|| default_coefficient_bound(hecke.space(), params.prime));
        let u = ZpMatrix::from_int(ring, &hecke.t(params.prime)?);
        let e = hida_idempotent(&u)?;
        let decomposition = OrdinaryDecomposition::new(hecke.level(), e)?;
        Ok(Self { params, hecke, ring, n_max, decomposition })
    }

    pub fn params(&self) -> LevelParams {
        self.params
    }

    pub fn level(&self) -> u64 {
        self.params.level()
    }

    pub fn prime(&self) -> u64 {
        self.params.prime
    }

    pub fn ring(&self) -> ZpRing {
        self.ring
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    pub fn hecke(&self) -> &CuspidalHecke {
        &self.hecke
    }

    pub fn decomposition(&self) -> &OrdinaryDecomposition {
        &self.decomposition
    }

    /// `T(n)` on the cuspidal lattice, mod `p^k`.
    pub fn operator(&self, n: u64) -> Result<ZpMatrix> {
        Ok(ZpMatrix::from_int(self.ring, &self.hecke.t(n)?))
    }

    pub fn ordinary_operator(&self, n: u64) -> Result<ZpMatrix> {
        Ok(self.decomposition.restrict(&self.operator(n)?))
    }

    /// `<1 + p>` on the ordinary summand: the generator of the group-ring action.
    pub fn gamma_action(&self) -> Result<ZpMatrix> {
        let g = self.hecke.diamond(1 + self.params.prime as i64)?;
        Ok(self.decomposition.restrict(&ZpMatrix::from_int(self.ring, &g)))
    }

    /// Generated by `T(2..=n_max)` and diamonds for generators of the units,
    /// all restricted to the ordinary summand.
    pub fn algebra(&self) -> Result<HeckeAlgebra> {
        let mut gens = Vec::new();
        for n in 2..=self.n_max {
            gens.push((format!("T({n})"), self.ordinary_operator(n)?));
        }
        for (label, d) in self.hecke.diamond_generators()? {
            gens.push((label, self.decomposition.restrict(&ZpMatrix::from_int(self.ring, &d))));
        }
        Ok(HeckeAlgebra::generate(self.level(), self.ring, self.decomposition.rank(), gens)?)
    }

    pub fn packets(&self, algebra: &HeckeAlgebra) -> Result<Vec<EigenPacket>> {
        eigen_packets(algebra, self.params.prime, self.n_max)
    }

    pub fn qexp(&self, algebra: &HeckeAlgebra) -> Result<CuspFormLattice> {
        qexp_basis(algebra, self.n_max)
    }

    /// Trace to a lower level in the same tower, between the ordinary summands.
    pub fn ordinary_trace(&self, lower: &OrdinaryLevel) -> Result<ZpMatrix> {
        let op = trace_map(self.hecke.space(), lower.hecke.space())?;
        let t = ZpMatrix::from_int(self.ring, &self.hecke.restrict_to(&lower.hecke, &op)?);
        Ok(OrdinaryDecomposition::restrict_between(&self.decomposition, &lower.decomposition, &t))
    }

    /// Whether the full trace intertwines the two projectors.
    pub fn trace_intertwines(&self, lower: &OrdinaryLevel) -> Result<bool> {
        let op = trace_map(self.hecke.space(), lower.hecke.space())?;
        let t = ZpMatrix::from_int(self.ring, &self.hecke.restrict_to(&lower.hecke, &op)?);
        Ok(&t * self.decomposition.idempotent() == lower.decomposition.idempotent() * &t)
    }
}

use super::{OrdinaryError, Result};
use crate::exactlin::{Valuation, ZpMatrix, ZpRing};
use crate::hecke::HeckeAlgebra;

/// q-expansions `(a_1, ..., a_nmax)` of the forms dual to a Hecke algebra,
/// one basis vector per column, in echelon form by index.
#[derive(Clone, Debug)]
pub struct CuspFormLattice {
    pub level: u64,
    pub n_max: u64,
    /// precision of the coefficients, after dividing by the algebra pivots
    pub ring: ZpRing,
    pub basis: ZpMatrix,
    /// valuation of the determinant of `(T, f) -> a_1(T f)`; `None` when
    /// the pairing is degenerate at this precision
    pub duality_valuation: Option<u32>,
}

impl CuspFormLattice {
    pub fn rank(&self) -> usize {
        self.basis.cols()
    }

    pub fn is_perfect(&self) -> bool {
        self.duality_valuation == Some(0)
    }
}

/// Coordinates of `T(1), ..., T(n_max)` in the algebra basis form an
/// `n_max x h` matrix `C`. A functional `phi` on the algebra has
/// q-expansion `(phi(T(n)))_n`, so the lattice is the column span of `C`,
/// and the pairing with the algebra is perfect iff `C` has unit
/// elementary divisors.
pub fn qexp_basis(algebra: &HeckeAlgebra, n_max: u64) -> Result<CuspFormLattice> {
    let prec = algebra.coordinate_precision();
    if prec == 0 {
        return Err(OrdinaryError::PrecisionExhausted);
    }
    let ring = algebra.ring().with_precision(prec)?;
    let h = algebra.rank();
    let size = algebra.size();
    let mut rows = Vec::with_capacity(n_max as usize * h);
    for n in 1..=n_max {
        let t = if n == 1 {
            ZpMatrix::identity(algebra.ring(), size)
        } else if size == 0 {
            ZpMatrix::zeros(algebra.ring(), 0, 0)
        } else {
            let label = format!("T({n})");
            algebra.generator(&label).ok_or(OrdinaryError::MissingOperator(label))?.clone()
        };
        let coords = algebra.coordinates(&t).ok_or_else(|| OrdinaryError::MissingOperator(format!("T({n}) in span")))?;
        rows.extend(coords);
    }
    let c = ZpMatrix::from_residues(ring, n_max as usize, h, rows)?;
    let duality_valuation = if n_max as usize >= h { c.elementary_divisor_valuations() } else { Default::default() }
        .into_iter()
        .try_fold(0u32, |acc, v| match v {
            Valuation::Exact(x) => Some(acc + x),
            Valuation::AtLeast(_) => None,
        })
        .filter(|_| n_max as usize >= h);
    let basis = echelon_by_index(&c);
    Ok(CuspFormLattice { level: algebra.level(), n_max, ring, basis, duality_valuation })
}

/// Column echelon form walking the rows in order: each pivot has minimal
/// valuation in its row, is normalized to a power of `p`, and is cleared
/// from the remaining columns.
fn echelon_by_index(c: &ZpMatrix) -> ZpMatrix {
    let ring = c.ring();
    let (n, h) = c.shape();
    let mut cols: Vec<Vec<u128>> = (0..h).map(|j| c.column(j)).collect();
    let mut done = Vec::new();
    for i in 0..n {
        if cols.is_empty() {
            break;
        }
        let Some((j, v)) = cols
            .iter()
            .enumerate()
            .filter(|(_, col)| col[i] != 0)
            .map(|(j, col)| (j, ring.valuation(col[i])))
            .min_by_key(|&(_, v)| v)
        else {
            continue;
        };
        let mut pivot = cols.swap_remove(j);
        let pv = ring.p_pow(v);
        let unit_inv = ring.inv(pivot[i] / pv).expect("unit part");
        for x in pivot.iter_mut() {
            *x = ring.mul(*x, unit_inv);
        }
        for col in cols.iter_mut() {
            if col[i] == 0 {
                continue;
            }
            let f = col[i] / pv;
            for (x, &y) in col.iter_mut().zip(&pivot) {
                *x = ring.sub(*x, ring.mul(f, y));
            }
        }
        done.push(pivot);
    }
    // columns that vanish mod p^prec still count toward the rank
    done.extend(cols);
    ZpMatrix::from_columns(ring, n, &done)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_algebra_duality() {
        let r = ZpRing::new(5, 6).unwrap();
        // T(2) = diag(1, 2), T(3) = diag(3, 3): q-expansions (1,1,3) and (1,2,3)
        let t2 = ZpMatrix::from_i64(r, 2, 2, &[1, 0, 0, 2]);
        let t3 = ZpMatrix::from_i64(r, 2, 2, &[3, 0, 0, 3]);
        let h = HeckeAlgebra::generate(7, r, 2, vec![("T(2)".into(), t2), ("T(3)".into(), t3)]).unwrap();
        let q = qexp_basis(&h, 3).unwrap();
        assert_eq!(q.rank(), 2);
        assert!(q.is_perfect());
        assert_eq!(q.basis.get(0, 0), 1);
    }

    #[test]
    fn operator_outside_the_hecke_span_breaks_duality() {
        let r = ZpRing::new(5, 6).unwrap();
        // T(2) = diag(1, 6) sees the two lines only mod 5; <2> = diag(1, 2)
        // separates them, so T(1), T(2) have index 5 in the algebra
        let t2 = ZpMatrix::from_i64(r, 2, 2, &[1, 0, 0, 6]);
        let d2 = ZpMatrix::from_i64(r, 2, 2, &[1, 0, 0, 2]);
        let h = HeckeAlgebra::generate(7, r, 2, vec![("T(2)".into(), t2), ("<2>".into(), d2)]).unwrap();
        let q = qexp_basis(&h, 2).unwrap();
        assert_eq!(q.rank(), 2);
        assert_eq!(q.duality_valuation, Some(1));
    }

    #[test]
    fn empty_algebra() {
        let r = ZpRing::new(3, 4).unwrap();
        let h = HeckeAlgebra::generate(5, r, 0, vec![]).unwrap();
        let q = qexp_basis(&h, 4).unwrap();
        assert_eq!(q.rank(), 0);
        assert!(q.is_perfect());
    }
}

use super::{LinAlgError, Result, ZpRing};

/// Echelon basis of the `Z_p`-span of some vectors in `(Z/p^k)^dim`.
///
/// Basis vector `t` has pivot row `rows[t]` holding `p^vals[t]` times a
/// unit, and every later basis vector vanishes on that row.
#[derive(Clone, Debug)]
pub struct ZpSpan {
    ring: ZpRing,
    dim: usize,
    basis: Vec<Vec<u128>>,
    rows: Vec<usize>,
    vals: Vec<u32>,
}

impl ZpSpan {
    pub fn new(ring: ZpRing, dim: usize, vectors: Vec<Vec<u128>>) -> Result<Self> {
        if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
            return Err(LinAlgError::Dimension(format!("vector of length {} in dimension {dim}", v.len())));
        }
        let r = ring;
        let mut cols = vectors;
        let mut used = vec![false; dim];
        let (mut basis, mut rows, mut vals) = (Vec::new(), Vec::new(), Vec::new());
        loop {
            let mut best: Option<(usize, usize, u32)> = None;
            'scan: for (j, c) in cols.iter().enumerate() {
                for (i, &x) in c.iter().enumerate() {
                    if used[i] || x == 0 {
                        continue;
                    }
                    let v = r.valuation(x);
                    if best.is_none_or(|(_, _, b)| v < b) {
                        best = Some((j, i, v));
                        if v == 0 {
                            break 'scan;
                        }
                    }
                }
            }
            let Some((j, i, v)) = best else { break };
            let pivot = cols.swap_remove(j);
            let pv = (r.p() as u128).pow(v);
            let unit_inv = r.inv(pivot[i] / pv).expect("unit part");
            for c in cols.iter_mut() {
                if c[i] == 0 {
                    continue;
                }
                let f = r.mul(c[i] / pv, unit_inv);
                for (x, &y) in c.iter_mut().zip(&pivot) {
                    *x = r.sub(*x, r.mul(f, y));
                }
            }
            used[i] = true;
            basis.push(pivot);
            rows.push(i);
            vals.push(v);
        }
        Ok(Self { ring, dim, basis, rows, vals })
    }

    pub fn ring(&self) -> ZpRing {
        self.ring
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<u128>] {
        &self.basis
    }

    /// Valuations of the pivots: the elementary divisors of the span inside
    /// the ambient lattice.
    pub fn valuations(&self) -> &[u32] {
        &self.vals
    }

    /// Precision left after dividing by every pivot.
    pub fn coordinate_precision(&self) -> u32 {
        self.ring.precision().saturating_sub(self.vals.iter().sum())
    }

    /// Coefficients of `y` in the basis, modulo `p^coordinate_precision()`;
    /// `None` when `y` is not in the span at that precision.
    pub fn coordinates(&self, y: &[u128]) -> Option<Vec<u128>> {
        assert_eq!(y.len(), self.dim, "vector length");
        let r = self.ring;
        let prec = self.coordinate_precision();
        if prec == 0 {
            return None;
        }
        let out_mod = (r.p() as u128).pow(prec);
        let mut y = y.to_vec();
        let mut coeffs = Vec::with_capacity(self.rank());
        for t in 0..self.rank() {
            let (i, v) = (self.rows[t], self.vals[t]);
            let x = y[i];
            if x != 0 && r.valuation(x) < v {
                return None;
            }
            let pv = (r.p() as u128).pow(v);
            let unit_inv = r.inv(self.basis[t][i] / pv).expect("unit part");
            let f = r.mul(x / pv, unit_inv);
            for (a, &b) in y.iter_mut().zip(&self.basis[t]) {
                *a = r.sub(*a, r.mul(f, b));
            }
            coeffs.push(f % out_mod);
        }
        y.iter().all(|&a| a % out_mod == 0).then_some(coeffs)
    }

    pub fn contains(&self, y: &[u128]) -> bool {
        self.coordinates(y).is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn span_with_nonunit_pivot() {
        let r = ZpRing::new(3, 6).unwrap();
        // span{(1,1), (0,9)}: index 9 in Z^2
        let s = ZpSpan::new(r, 2, vec![vec![1, 1], vec![1, 10]]).unwrap();
        assert_eq!(s.rank(), 2);
        let mut v = s.valuations().to_vec();
        v.sort();
        assert_eq!(v, vec![0, 2]);
        assert!(s.contains(&[2, 20]));
        assert!(!s.contains(&[0, 1]));
        assert_eq!(s.coordinate_precision(), 4);
    }

    #[test]
    fn dependent_vectors_collapse() {
        let r = ZpRing::new(5, 4).unwrap();
        let s = ZpSpan::new(r, 3, vec![vec![1, 2, 3], vec![2, 4, 6], vec![0, 0, 0]]).unwrap();
        assert_eq!(s.rank(), 1);
        let c = s.coordinates(&[3, 6, 9]).unwrap();
        assert_eq!(c, vec![3]);
    }
}

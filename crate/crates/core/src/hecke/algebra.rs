use super::{HeckeError, Result};
use crate::exactlin::{LinAlgError, ZpMatrix, ZpRing, ZpSpan};

/// The `Z_p`-algebra generated by a commuting family of operators, kept as
/// an echelon basis of flattened matrices modulo `p^k`.
#[derive(Clone, Debug)]
pub struct HeckeAlgebra {
    level: u64,
    ring: ZpRing,
    size: usize,
    generators: Vec<(String, ZpMatrix)>,
    span: ZpSpan,
}

impl HeckeAlgebra {
    /// Span of the identity, the generators and their products, closed
    /// under multiplication by generators until the span stops growing.
    pub fn generate(level: u64, ring: ZpRing, size: usize, generators: Vec<(String, ZpMatrix)>) -> Result<Self> {
        if let Some((label, g)) = generators.iter().find(|(_, g)| g.shape() != (size, size) || g.ring() != ring) {
            return Err(HeckeError::LinAlg(LinAlgError::Dimension(format!(
                "generator {label} has shape {:?}, expected {size}x{size} at the same precision",
                g.shape()
            ))));
        }
        let dim = size * size;
        let mut vectors: Vec<Vec<u128>> = vec![ZpMatrix::identity(ring, size).entries().to_vec()];
        vectors.extend(generators.iter().map(|(_, g)| g.entries().to_vec()));
        let mut span = ZpSpan::new(ring, dim, vectors)?;
        let mut signature = (span.rank(), span.valuations().iter().sum::<u32>());
        loop {
            let basis: Vec<ZpMatrix> = span
                .basis()
                .iter()
                .map(|v| ZpMatrix::from_residues(ring, size, size, v.clone()))
                .collect::<std::result::Result<_, _>>()?;
            let mut vectors: Vec<Vec<u128>> = span.basis().to_vec();
            for b in &basis {
                for (_, g) in &generators {
                    vectors.push((b * g).entries().to_vec());
                }
            }
            span = ZpSpan::new(ring, dim, vectors)?;
            let next = (span.rank(), span.valuations().iter().sum::<u32>());
            if next == signature {
                break;
            }
            signature = next;
        }
        Ok(Self { level, ring, size, generators, span })
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn ring(&self) -> ZpRing {
        self.ring
    }

    /// Side length of the operator matrices.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn rank(&self) -> usize {
        self.span.rank()
    }

    pub fn generators(&self) -> &[(String, ZpMatrix)] {
        &self.generators
    }

    pub fn generator(&self, label: &str) -> Option<&ZpMatrix> {
        self.generators.iter().find(|(l, _)| l == label).map(|(_, g)| g)
    }

    pub fn basis(&self) -> Vec<ZpMatrix> {
        self.span
            .basis()
            .iter()
            .map(|v| ZpMatrix::from_residues(self.ring, self.size, self.size, v.clone()).expect("reduced residues"))
            .collect()
    }

    /// Elementary divisor valuations of the algebra inside all matrices.
    pub fn valuations(&self) -> &[u32] {
        self.span.valuations()
    }

    /// Precision to which basis coordinates are determined.
    pub fn coordinate_precision(&self) -> u32 {
        self.span.coordinate_precision()
    }

    pub fn coordinates(&self, t: &ZpMatrix) -> Option<Vec<u128>> {
        self.span.coordinates(t.entries())
    }

    pub fn contains(&self, t: &ZpMatrix) -> bool {
        self.span.contains(t.entries())
    }

    /// Labels of generator pairs whose commutator is nonzero mod `p^k`.
    pub fn noncommuting_pairs(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (i, (la, a)) in self.generators.iter().enumerate() {
            for (lb, b) in &self.generators[i + 1..] {
                if a * b != b * a {
                    out.push((la.clone(), lb.clone()));
                }
            }
        }
        out
    }

    pub fn is_commutative(&self) -> bool {
        self.noncommuting_pairs().is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_algebra() {
        let r = ZpRing::new(3, 5).unwrap();
        // diag(1, 4) generates all diagonal matrices, but only with index 3
        let t = ZpMatrix::from_i64(r, 2, 2, &[1, 0, 0, 4]);
        let h = HeckeAlgebra::generate(7, r, 2, vec![("T".into(), t.clone())]).unwrap();
        assert_eq!(h.rank(), 2);
        assert!(h.is_commutative());
        assert!(h.contains(&ZpMatrix::identity(r, 2)));
        assert!(h.contains(&t.pow_u64(5)));
        let mut v = h.valuations().to_vec();
        v.sort();
        assert_eq!(v, vec![0, 1]);
    }

    #[test]
    fn detects_noncommuting_generators() {
        let r = ZpRing::new(5, 3).unwrap();
        let a = ZpMatrix::from_i64(r, 2, 2, &[0, 1, 0, 0]);
        let b = ZpMatrix::from_i64(r, 2, 2, &[0, 0, 1, 0]);
        let h = HeckeAlgebra::generate(1, r, 2, vec![("a".into(), a), ("b".into(), b)]).unwrap();
        assert_eq!(h.noncommuting_pairs(), vec![("a".to_string(), "b".to_string())]);
        assert_eq!(h.rank(), 4);
    }
}

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{snf, IntMatrix, LinAlgError, Result};

/// A sublattice of `Z^ambient` given by a basis of row vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice {
    ambient: usize,
    basis: Vec<Vec<BigInt>>,
}

impl Lattice {
    /// Checks lengths and linear independence.
    pub fn new(ambient: usize, basis: Vec<Vec<BigInt>>) -> Result<Self> {
        if let Some(v) = basis.iter().find(|v| v.len() != ambient) {
            return Err(LinAlgError::Dimension(format!(
                "basis vector of length {} in ambient rank {ambient}",
                v.len()
            )));
        }
        let lat = Self { ambient, basis };
        let rank = lat.as_rows().rank();
        if rank < lat.basis.len() {
            return Err(LinAlgError::DependentBasis { rank, len: lat.basis.len() });
        }
        Ok(lat)
    }

    pub fn from_i64(ambient: usize, basis: &[&[i64]]) -> Result<Self> {
        Self::new(ambient, basis.iter().map(|v| v.iter().map(|&x| BigInt::from(x)).collect()).collect())
    }

    pub fn full(ambient: usize) -> Self {
        let basis = (0..ambient)
            .map(|i| (0..ambient).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
            .collect();
        Self { ambient, basis }
    }

    pub fn zero(ambient: usize) -> Self {
        Self { ambient, basis: Vec::new() }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<BigInt>] {
        &self.basis
    }

    /// Basis vectors as matrix rows.
    pub fn as_rows(&self) -> IntMatrix {
        let mut m = IntMatrix::zeros(self.basis.len(), self.ambient);
        for (i, v) in self.basis.iter().enumerate() {
            for (j, x) in v.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        m
    }

    /// Basis vectors as matrix columns.
    pub fn as_columns(&self) -> IntMatrix {
        IntMatrix::from_columns(self.ambient, &self.basis)
    }

    /// Integer coordinates of `v` in this basis, if `v` lies in the lattice.
    pub fn coordinates(&self, v: &[BigInt]) -> Option<Vec<BigInt>> {
        solve_int(&self.as_columns(), v).ok()
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        self.coordinates(v).is_some()
    }

    pub fn is_saturated(&self) -> bool {
        match saturate(self) {
            Ok(s) => s.basis.iter().all(|v| self.contains(v)),
            Err(_) => false,
        }
    }
}

impl Serialize for Lattice {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Rec<'a> {
            ambient: usize,
            basis: &'a IntMatrix,
        }
        Rec { ambient: self.ambient, basis: &self.as_rows() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Lattice {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        #[derive(Deserialize)]
        struct Rec {
            ambient: usize,
            basis: IntMatrix,
        }
        let rec = Rec::deserialize(d)?;
        if rec.basis.rows() > 0 && rec.basis.cols() != rec.ambient {
            return Err(D::Error::custom("basis width differs from ambient rank"));
        }
        let basis = (0..rec.basis.rows()).map(|i| rec.basis.row(i).to_vec()).collect();
        Lattice::new(rec.ambient, basis).map_err(D::Error::custom)
    }
}

/// Saturated basis of `{x : a x = 0}`, in row Hermite form.
pub fn kernel_int(a: &IntMatrix) -> Lattice {
    let n = a.cols();
    let s = snf(a);
    let basis: Vec<Vec<BigInt>> = (s.rank..n).map(|j| s.v.column(j)).collect();
    Lattice { ambient: n, basis: hermite_rows(basis) }
}

/// The rational span of `l` intersected with the integer lattice.
pub fn saturate(l: &Lattice) -> Result<Lattice> {
    let rank = l.as_rows().rank();
    if rank < l.rank() {
        return Err(LinAlgError::DependentBasis { rank, len: l.rank() });
    }
    if l.rank() == 0 {
        return Ok(Lattice::zero(l.ambient));
    }
    // the saturation is the kernel of the orthogonal complement
    let perp = kernel_int(&l.as_rows());
    if perp.rank() == 0 {
        return Ok(Lattice::full(l.ambient));
    }
    Ok(kernel_int(&perp.as_rows()))
}

/// Solves `a x = b` over the integers.
pub fn solve_int(a: &IntMatrix, b: &[BigInt]) -> Result<Vec<BigInt>> {
    if b.len() != a.rows() {
        return Err(LinAlgError::Dimension(format!("rhs of length {} for {} rows", b.len(), a.rows())));
    }
    let s = snf(a);
    let ub = s.u.mul_vec(b);
    let mut y = vec![BigInt::zero(); a.cols()];
    for (i, x) in ub.iter().enumerate() {
        if i < s.rank {
            let d = &s.d[(i, i)];
            if !x.is_multiple_of(d) {
                return Err(LinAlgError::NoSolution(format!("component {i} not divisible by {d}")));
            }
            y[i] = x / d;
        } else if !x.is_zero() {
            return Err(LinAlgError::NoSolution("rhs outside the column span".into()));
        }
    }
    Ok(s.v.mul_vec(&y))
}

/// Solves `a x = b_j` for every column `b_j` of `b`, sharing one SNF.
pub fn solve_int_many(a: &IntMatrix, b: &IntMatrix) -> Result<IntMatrix> {
    if b.rows() != a.rows() {
        return Err(LinAlgError::Dimension(format!("rhs has {} rows for {} rows", b.rows(), a.rows())));
    }
    let s = snf(a);
    let ub = &s.u * b;
    let mut y = IntMatrix::zeros(a.cols(), b.cols());
    for j in 0..b.cols() {
        for i in 0..a.rows() {
            let x = &ub[(i, j)];
            if i < s.rank {
                let d = &s.d[(i, i)];
                if !x.is_multiple_of(d) {
                    return Err(LinAlgError::NoSolution(format!("column {j}: component {i} not divisible by {d}")));
                }
                y[(i, j)] = x / d;
            } else if !x.is_zero() {
                return Err(LinAlgError::NoSolution(format!("column {j} outside the column span")));
            }
        }
    }
    Ok(&s.v * &y)
}

/// Row Hermite normal form: echelon rows with positive pivots and entries
/// above each pivot reduced into `[0, pivot)`. Zero rows are dropped.
pub fn hermite_rows(rows: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
    let Some(width) = rows.first().map(Vec::len) else {
        return rows;
    };
    let mut m = rows;
    let mut r = 0;
    for col in 0..width {
        if r == m.len() {
            break;
        }
        // gcd-combine every row below into row r
        for i in r + 1..m.len() {
            if m[i][col].is_zero() {
                continue;
            }
            if m[r][col].is_zero() {
                m.swap(r, i);
                continue;
            }
            let a = m[r][col].clone();
            let b = m[i][col].clone();
            let e = a.extended_gcd(&b);
            let (g, x, y) = (e.gcd, e.x, e.y);
            let (ag, bg) = (&a / &g, &b / &g);
            let (top, bottom): (Vec<BigInt>, Vec<BigInt>) = m[r]
                .iter()
                .zip(&m[i])
                .map(|(u, v)| (&x * u + &y * v, &ag * v - &bg * u))
                .unzip();
            m[r] = top;
            m[i] = bottom;
        }
        if m[r][col].is_zero() {
            continue;
        }
        if m[r][col].is_negative() {
            for x in m[r].iter_mut() {
                *x = -x.clone();
            }
        }
        let pivot = m[r][col].clone();
        for i in 0..r {
            let q = m[i][col].div_floor(&pivot);
            if q.is_zero() {
                continue;
            }
            let pr = m[r].clone();
            for (x, p) in m[i].iter_mut().zip(&pr) {
                *x -= &q * p;
            }
        }
        r += 1;
    }
    m.truncate(r);
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn kernel_of_identity_is_trivial() {
        assert_eq!(kernel_int(&IntMatrix::identity(3)).rank(), 0);
    }

    #[test]
    fn kernel_of_row_one_one() {
        let k = kernel_int(&IntMatrix::from_rows(&[[1, 1]]));
        assert_eq!(k.basis(), &[v(&[1, -1])]);
    }

    #[test]
    fn kernel_is_saturated() {
        let k = kernel_int(&IntMatrix::from_rows(&[[2, 4]]));
        assert_eq!(k.basis(), &[v(&[2, -1])]);
        assert!(k.is_saturated());
    }

    #[test]
    fn saturate_removes_scaling() {
        let l = Lattice::from_i64(2, &[&[3, 0]]).unwrap();
        assert_eq!(saturate(&l).unwrap().basis(), &[v(&[1, 0])]);
    }

    #[test]
    fn saturate_is_identity_on_saturated() {
        let l = Lattice::from_i64(3, &[&[1, 2, 0], &[0, 0, 1]]).unwrap();
        let s = saturate(&l).unwrap();
        assert_eq!(s.basis(), l.basis());
    }

    #[test]
    fn saturate_matches_enumeration() {
        // integer points of the rational span of (2,2),(0,4), enumerated in a box
        let l = Lattice::from_i64(2, &[&[2, 2], &[0, 4]]).unwrap();
        let s = saturate(&l).unwrap();
        let span = l.as_rows();
        for x in -4i64..=4 {
            for y in -4i64..=4 {
                let p = v(&[x, y]);
                let in_span = span.vstack(&IntMatrix::from_rows(&[[x, y]])).rank() == span.rank();
                assert_eq!(in_span, s.contains(&p), "point ({x},{y})");
            }
        }
        assert_eq!(s.rank(), 2);
    }

    #[test]
    fn dependent_basis_rejected() {
        let err = Lattice::from_i64(2, &[&[1, 2], &[2, 4]]).unwrap_err();
        assert!(matches!(err, LinAlgError::DependentBasis { .. }));
    }

    #[test]
    fn solve_many_matches_single() {
        let a = IntMatrix::from_rows(&[[2, 1], [0, 3], [1, 1]]);
        let b = IntMatrix::from_rows(&[[4, 1], [6, 3], [3, 1]]);
        let x = solve_int_many(&a, &b).unwrap();
        assert_eq!(&a * &x, b);
        assert!(solve_int_many(&a, &IntMatrix::from_rows(&[[1], [0], [0]])).is_err());
    }

    #[test]
    fn solve_detects_non_integral() {
        let a = IntMatrix::from_rows(&[[2, 0], [0, 2]]);
        assert!(solve_int(&a, &v(&[1, 0])).is_err());
        assert_eq!(solve_int(&a, &v(&[4, -2])).unwrap(), v(&[2, -1]));
    }

    proptest! {
        #[test]
        fn saturation_is_idempotent(entries in proptest::collection::vec(-6i64..7, 8)) {
            let rows: Vec<Vec<BigInt>> = entries.chunks(4).map(v).collect();
            if let Ok(l) = Lattice::new(4, rows) {
                let s = saturate(&l).unwrap();
                let ss = saturate(&s).unwrap();
                prop_assert_eq!(&s, &ss);
                for b in l.basis() {
                    prop_assert!(s.contains(b));
                }
            }
        }

        #[test]
        fn kernel_vectors_are_annihilated(entries in proptest::collection::vec(-5i64..6, 15)) {
            let a = IntMatrix::from_i64(3, 5, &entries);
            let k = kernel_int(&a);
            prop_assert_eq!(k.rank() + a.rank(), 5);
            for b in k.basis() {
                prop_assert!(a.mul_vec(b).iter().all(Zero::is_zero));
            }
            prop_assert!(k.is_saturated());
        }
    }
}

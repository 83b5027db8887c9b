use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};

use super::{IntMatrix, LinAlgError, Result, Valuation, ZpRing};

/// A matrix over `Z/p^k`, row-major residues in `[0, p^k)`.
#[derive(Clone, PartialEq, Eq)]
pub struct ZpMatrix {
    ring: ZpRing,
    rows: usize,
    cols: usize,
    entries: Vec<u128>,
}

impl ZpMatrix {
    pub fn zeros(ring: ZpRing, rows: usize, cols: usize) -> Self {
        Self { ring, rows, cols, entries: vec![0; rows * cols] }
    }

    pub fn identity(ring: ZpRing, n: usize) -> Self {
        let mut m = Self::zeros(ring, n, n);
        for i in 0..n {
            m.entries[i * n + i] = 1 % ring.modulus();
        }
        m
    }

    pub fn from_residues(ring: ZpRing, rows: usize, cols: usize, entries: Vec<u128>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(LinAlgError::Dimension(format!(
                "{} residues for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        let m = ring.modulus();
        Ok(Self { ring, rows, cols, entries: entries.into_iter().map(|x| x % m).collect() })
    }

    pub fn from_i64(ring: ZpRing, rows: usize, cols: usize, entries: &[i64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count");
        let entries = entries.iter().map(|&x| ring.from_i128(x as i128)).collect();
        Self { ring, rows, cols, entries }
    }

    pub fn from_int(ring: ZpRing, a: &IntMatrix) -> Self {
        let entries = a.entries().iter().map(|x| ring.from_bigint(x)).collect();
        Self { ring, rows: a.rows(), cols: a.cols(), entries }
    }

    /// Lift with entries in the symmetric range.
    pub fn to_int(&self) -> IntMatrix {
        let entries = self.entries.iter().map(|&x| self.ring.symmetric(x)).collect();
        IntMatrix::new(self.rows, self.cols, entries).expect("shape preserved")
    }

    pub fn ring(&self) -> ZpRing {
        self.ring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn entries(&self) -> &[u128] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> u128 {
        self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: u128) {
        self.entries[i * self.cols + j] = x % self.ring.modulus();
    }

    pub fn column(&self, j: usize) -> Vec<u128> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn row(&self, i: usize) -> &[u128] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&x| x == 0)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.ring, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.entries[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn from_columns(ring: ZpRing, len: usize, columns: &[Vec<u128>]) -> Self {
        let mut m = Self::zeros(ring, len, columns.len());
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), len, "column length");
            for (i, &x) in c.iter().enumerate() {
                m.set(i, j, x);
            }
        }
        m
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let columns: Vec<Vec<u128>> = cols.iter().map(|&j| self.column(j)).collect();
        Self::from_columns(self.ring, self.rows, &columns)
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut entries = Vec::with_capacity(rows.len() * self.cols);
        for &i in rows {
            entries.extend_from_slice(self.row(i));
        }
        Self { ring: self.ring, rows: rows.len(), cols: self.cols, entries }
    }

    /// The `rows x cols` block starting at `(r0, c0)`.
    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols, "block out of range");
        let mut entries = Vec::with_capacity(rows * cols);
        for i in r0..r0 + rows {
            entries.extend_from_slice(&self.entries[i * self.cols + c0..i * self.cols + c0 + cols]);
        }
        Self { ring: self.ring, rows, cols, entries }
    }

    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows, "hstack row count");
        let mut m = Self::zeros(self.ring, self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.get(i, j));
            }
            for j in 0..other.cols {
                m.set(i, self.cols + j, other.get(i, j));
            }
        }
        m
    }

    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols, "vstack column count");
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        Self { ring: self.ring, rows: self.rows + other.rows, cols: self.cols, entries }
    }

    pub fn scale(&self, c: u128) -> Self {
        let r = self.ring;
        Self { entries: self.entries.iter().map(|&x| r.mul(x, c)).collect(), ..self.clone() }
    }

    pub fn mul_vec(&self, v: &[u128]) -> Vec<u128> {
        assert_eq!(v.len(), self.cols, "vector length");
        (0..self.rows)
            .map(|i| {
                self.row(i).iter().zip(v).fold(0, |acc, (&a, &b)| self.ring.add(acc, self.ring.mul(a, b)))
            })
            .collect()
    }

    /// Same matrix at a lower precision.
    pub fn reduce(&self, k: u32) -> Result<Self> {
        let ring = self.ring.with_precision(k)?;
        if k > self.ring.precision() {
            return Err(LinAlgError::Dimension("cannot raise precision by reduction".into()));
        }
        let m = ring.modulus();
        Ok(Self { ring, rows: self.rows, cols: self.cols, entries: self.entries.iter().map(|x| x % m).collect() })
    }

    pub fn pow(&self, e: &BigUint) -> Self {
        assert!(self.is_square(), "power of a non-square matrix");
        let mut acc = Self::identity(self.ring, self.rows);
        let bits = e.bits();
        for b in (0..bits).rev() {
            acc = &acc * &acc;
            if e.bit(b) {
                acc = &acc * self;
            }
        }
        acc
    }

    pub fn pow_u64(&self, e: u64) -> Self {
        self.pow(&BigUint::from(e))
    }

    /// Reduced row echelon form modulo `p` and its pivot columns.
    fn rref_mod_p(&self) -> (Vec<Vec<u128>>, Vec<usize>) {
        let p = self.ring.p() as u128;
        let fp = ZpRing::new(self.ring.p(), 1).expect("prime");
        let mut m: Vec<Vec<u128>> = (0..self.rows).map(|i| self.row(i).iter().map(|x| x % p).collect()).collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| m[i][c] != 0) else { continue };
            m.swap(r, pr);
            let inv = fp.inv(m[r][c]).expect("nonzero mod p");
            for x in m[r].iter_mut() {
                *x = fp.mul(*x, inv);
            }
            let top = m[r].clone();
            for (i, row) in m.iter_mut().enumerate() {
                if i != r && row[c] != 0 {
                    let f = row[c];
                    for (x, &t) in row.iter_mut().zip(&top) {
                        *x = fp.sub(*x, fp.mul(f, t));
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn pivots_mod_p(&self) -> Vec<usize> {
        self.rref_mod_p().1
    }

    pub fn rank_mod_p(&self) -> usize {
        self.pivots_mod_p().len()
    }

    /// Greedy left-to-right choice of columns independent modulo `p`.
    pub fn independent_columns_mod_p(&self) -> Vec<usize> {
        self.pivots_mod_p()
    }

    /// Inverse over `Z/p^k`; fails unless the reduction mod `p` is invertible.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(LinAlgError::Dimension("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        self.solve(&Self::identity(self.ring, n))
    }

    /// Solves `self * x = b` for square `self` invertible mod `p`.
    pub fn solve(&self, b: &Self) -> Result<Self> {
        if !self.is_square() || b.rows != self.rows {
            return Err(LinAlgError::Dimension("solve shape".into()));
        }
        let r = self.ring;
        let n = self.rows;
        let w = n + b.cols;
        let mut m: Vec<Vec<u128>> = (0..n)
            .map(|i| {
                let mut row = self.row(i).to_vec();
                row.extend_from_slice(b.row(i));
                row
            })
            .collect();
        for c in 0..n {
            let pr = (c..n).find(|&i| r.is_unit(m[i][c])).ok_or(LinAlgError::Singular)?;
            m.swap(c, pr);
            let inv = r.inv(m[c][c]).expect("unit pivot");
            for x in m[c].iter_mut() {
                *x = r.mul(*x, inv);
            }
            let top = m[c].clone();
            for (i, row) in m.iter_mut().enumerate() {
                if i == c || row[c] == 0 {
                    continue;
                }
                let f = row[c];
                for j in 0..w {
                    row[j] = r.sub(row[j], r.mul(f, top[j]));
                }
            }
        }
        let entries = m.into_iter().flat_map(|row| row[n..].to_vec()).collect();
        Ok(Self { ring: r, rows: n, cols: b.cols, entries })
    }

    /// Valuations of the elementary divisors over `Z/p^k`, ascending.
    /// Length is `min(rows, cols)`; zero divisors are reported as `AtLeast(k)`.
    pub fn elementary_divisor_valuations(&self) -> Vec<Valuation> {
        let r = self.ring;
        let k = r.precision();
        let (rows, cols) = self.shape();
        let mut m: Vec<Vec<u128>> = (0..rows).map(|i| self.row(i).to_vec()).collect();
        let mut out = Vec::with_capacity(rows.min(cols));
        for t in 0..rows.min(cols) {
            let mut best: Option<(usize, usize, u32)> = None;
            'search: for (i, row) in m.iter().enumerate().skip(t) {
                for (j, &x) in row.iter().enumerate().skip(t) {
                    if x == 0 {
                        continue;
                    }
                    let v = r.valuation(x);
                    if best.is_none_or(|(_, _, bv)| v < bv) {
                        best = Some((i, j, v));
                        if v == 0 {
                            break 'search;
                        }
                    }
                }
            }
            let Some((pi, pj, v)) = best else {
                out.extend((t..rows.min(cols)).map(|_| Valuation::AtLeast(k)));
                break;
            };
            m.swap(t, pi);
            for row in m.iter_mut() {
                row.swap(t, pj);
            }
            // pivot = p^v * unit; every other entry in the block is divisible by p^v
            let pv = (r.p() as u128).pow(v);
            let unit_inv = r.inv(m[t][t] / pv).expect("unit part");
            let top = m[t].clone();
            for row in m.iter_mut().skip(t + 1) {
                if row[t] == 0 {
                    continue;
                }
                let f = r.mul(row[t] / pv, unit_inv);
                for j in t..cols {
                    row[j] = r.sub(row[j], r.mul(f, top[j]));
                }
            }
            for j in t + 1..cols {
                if m[t][j] == 0 {
                    continue;
                }
                let f = r.mul(m[t][j] / pv, unit_inv);
                for row in m.iter_mut().skip(t) {
                    let x = row[t];
                    row[j] = r.sub(row[j], r.mul(f, x));
                }
            }
            out.push(Valuation::Exact(v));
        }
        out
    }

    /// Determinant over `Z/p^k` by elimination with minimal-valuation pivots.
    pub fn det(&self) -> u128 {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let r = self.ring;
        let n = self.rows;
        let mut m: Vec<Vec<u128>> = (0..n).map(|i| self.row(i).to_vec()).collect();
        let mut det = 1 % r.modulus();
        for c in 0..n {
            let Some(pr) = (c..n).filter(|&i| m[i][c] != 0).min_by_key(|&i| r.valuation(m[i][c])) else {
                return 0;
            };
            if pr != c {
                m.swap(c, pr);
                det = r.neg(det);
            }
            let v = r.valuation(m[c][c]);
            let pv = (r.p() as u128).pow(v);
            det = r.mul(det, m[c][c]);
            let unit_inv = r.inv(m[c][c] / pv).expect("unit part");
            let top = m[c].clone();
            for row in m.iter_mut().skip(c + 1) {
                if row[c] == 0 {
                    continue;
                }
                // row[c] has valuation >= v, so the quotient is exact
                let f = r.mul(row[c] / pv, unit_inv);
                for j in c..n {
                    row[j] = r.sub(row[j], r.mul(f, top[j]));
                }
            }
        }
        det
    }

    /// A vector in the kernel mod `p` with a unit coordinate, if the
    /// reduction mod `p` has a nontrivial kernel.
    pub fn kernel_vector_mod_p(&self) -> Option<Vec<u128>> {
        let fp = ZpRing::new(self.ring.p(), 1).expect("prime");
        let (m, pivots) = self.rref_mod_p();
        let free = (0..self.cols).find(|c| !pivots.contains(c))?;
        let mut v = vec![0u128; self.cols];
        v[free] = 1;
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = fp.neg(m[row][free]);
        }
        Some(v)
    }
}

impl Mul for &ZpMatrix {
    type Output = ZpMatrix;
    fn mul(self, rhs: &ZpMatrix) -> ZpMatrix {
        assert_eq!(self.ring, rhs.ring, "mixed rings");
        assert_eq!(self.cols, rhs.rows, "product shape");
        let r = self.ring;
        let (n, m, q) = (self.rows, self.cols, rhs.cols);
        let mut out = vec![0u128; n * q];
        let small = r.modulus() <= u32::MAX as u128;
        if small {
            // accumulate unreduced u128 sums; each product is below 2^64
            let md = r.modulus();
            for i in 0..n {
                let mut acc = vec![0u128; q];
                for t in 0..m {
                    let a = self.entries[i * m + t];
                    if a == 0 {
                        continue;
                    }
                    let brow = &rhs.entries[t * q..(t + 1) * q];
                    for (s, &b) in acc.iter_mut().zip(brow) {
                        *s += a * b;
                    }
                    if t % 1024 == 1023 {
                        for s in acc.iter_mut() {
                            *s %= md;
                        }
                    }
                }
                for (o, s) in out[i * q..(i + 1) * q].iter_mut().zip(acc) {
                    *o = s % md;
                }
            }
        } else {
            for i in 0..n {
                for t in 0..m {
                    let a = self.entries[i * m + t];
                    if a == 0 {
                        continue;
                    }
                    for j in 0..q {
                        let b = rhs.entries[t * q + j];
                        if b != 0 {
                            out[i * q + j] = r.add(out[i * q + j], r.mul(a, b));
                        }
                    }
                }
            }
        }
        ZpMatrix { ring: r, rows: n, cols: q, entries: out }
    }
}

impl Add for &ZpMatrix {
    type Output = ZpMatrix;
    fn add(self, rhs: &ZpMatrix) -> ZpMatrix {
        assert_eq!(self.shape(), rhs.shape(), "sum shape");
        let r = self.ring;
        let entries = self.entries.iter().zip(&rhs.entries).map(|(&a, &b)| r.add(a, b)).collect();
        ZpMatrix { entries, ..self.clone() }
    }
}

impl Sub for &ZpMatrix {
    type Output = ZpMatrix;
    fn sub(self, rhs: &ZpMatrix) -> ZpMatrix {
        assert_eq!(self.shape(), rhs.shape(), "difference shape");
        let r = self.ring;
        let entries = self.entries.iter().zip(&rhs.entries).map(|(&a, &b)| r.sub(a, b)).collect();
        ZpMatrix { entries, ..self.clone() }
    }
}

impl Neg for &ZpMatrix {
    type Output = ZpMatrix;
    fn neg(self) -> ZpMatrix {
        let r = self.ring;
        ZpMatrix { entries: self.entries.iter().map(|&a| r.neg(a)).collect(), ..self.clone() }
    }
}

impl fmt::Debug for ZpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ZpMatrix {}x{} mod {}^{}", self.rows, self.cols, self.ring.p(), self.ring.precision())?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}

/// Symmetric lift of a residue vector.
pub fn lift_vector(ring: &ZpRing, v: &[u128]) -> Vec<BigInt> {
    v.iter().map(|&x| ring.symmetric(x)).collect()
}


#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ring(p: u64, k: u32) -> ZpRing {
        ZpRing::new(p, k).unwrap()
    }

    #[test]
    fn inverse_roundtrip() {
        let r = ring(3, 6);
        let a = ZpMatrix::from_i64(r, 2, 2, &[2, 3, 1, 5]);
        let inv = a.inverse().unwrap();
        assert_eq!(&a * &inv, ZpMatrix::identity(r, 2));
    }

    #[test]
    fn singular_mod_p_rejected() {
        let a = ZpMatrix::from_i64(ring(3, 4), 2, 2, &[3, 0, 0, 1]);
        assert_eq!(a.inverse(), Err(LinAlgError::Singular));
    }

    #[test]
    fn divisor_valuations_of_diagonal() {
        let a = ZpMatrix::from_i64(ring(5, 4), 3, 3, &[25, 0, 0, 0, 7, 0, 0, 0, 0]);
        assert_eq!(
            a.elementary_divisor_valuations(),
            vec![Valuation::Exact(0), Valuation::Exact(2), Valuation::AtLeast(4)]
        );
    }

    #[test]
    fn kernel_witness_mod_p() {
        let a = ZpMatrix::from_i64(ring(3, 2), 2, 3, &[1, 1, 0, 0, 0, 3]);
        let v = a.kernel_vector_mod_p().unwrap();
        let img = a.mul_vec(&v);
        assert!(img.iter().all(|x| x % 3 == 0));
        assert!(v.iter().any(|x| x % 3 != 0));
    }

    #[test]
    fn large_tier_products() {
        let r = ring(11, 20);
        let a = ZpMatrix::from_i64(r, 2, 2, &[-1, 2, 3, -4]);
        let b = a.pow_u64(5);
        let exact = IntMatrix::from_rows(&[[-1, 2], [3, -4]]).pow(5);
        assert_eq!(b, ZpMatrix::from_int(r, &exact));
    }

    proptest! {
        #[test]
        fn det_matches_integer_det(entries in proptest::collection::vec(-20i64..21, 9)) {
            let r = ring(3, 8);
            let a = IntMatrix::from_i64(3, 3, &entries);
            let z = ZpMatrix::from_int(r, &a);
            prop_assert_eq!(z.det(), r.from_bigint(&a.det()));
        }

        #[test]
        fn divisor_valuations_match_snf(entries in proptest::collection::vec(-30i64..31, 12)) {
            let r = ring(3, 6);
            let a = IntMatrix::from_i64(3, 4, &entries);
            let s = super::super::snf(&a);
            let expect: Vec<Valuation> = (0..3)
                .map(|i| {
                    let d = r.from_bigint(&s.d[(i, i)]);
                    if d == 0 { Valuation::AtLeast(6) } else { Valuation::Exact(r.valuation(d)) }
                })
                .collect();
            prop_assert_eq!(ZpMatrix::from_int(r, &a).elementary_divisor_valuations(), expect);
        }

        #[test]
        fn rank_mod_p_matches_divisors(entries in proptest::collection::vec(-4i64..5, 16)) {
            let r = ring(2, 3);
            let a = ZpMatrix::from_i64(r, 4, 4, &entries);
            let units = a.elementary_divisor_valuations().iter().filter(|v| v.is_zero()).count();
            prop_assert_eq!(a.rank_mod_p(), units);
        }
    }
}

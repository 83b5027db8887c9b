use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::IntMatrix;

/// `u * a * v == d` with `u`, `v` unimodular and `d` diagonal, `d_i | d_{i+1}`.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
    /// Number of nonzero diagonal entries.
    pub rank: usize,
}

impl SmithForm {
    pub fn invariants(&self) -> Vec<BigInt> {
        (0..self.rank).map(|i| self.d[(i, i)].clone()).collect()
    }
}

/// Smith normal form with a smallest-absolute-value pivot at every step.
pub fn snf(a: &IntMatrix) -> SmithForm {
    let (m, n) = a.shape();
    let mut d = a.clone();
    let mut u = IntMatrix::identity(m);
    let mut v = IntMatrix::identity(n);
    let mut rank = 0;

    for t in 0..m.min(n) {
        loop {
            let Some((pi, pj)) = min_pivot(&d, t) else {
                finish(&mut d, &mut u, rank);
                return SmithForm { u, d, v, rank };
            };
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            d.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let pivot = d[(t, t)].clone();
            let mut clean = true;
            for i in t + 1..m {
                if d[(i, t)].is_zero() {
                    continue;
                }
                let q = -d[(i, t)].div_floor(&pivot);
                d.add_row_multiple(i, t, &q);
                u.add_row_multiple(i, t, &q);
                if !d[(i, t)].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..n {
                if d[(t, j)].is_zero() {
                    continue;
                }
                let q = -d[(t, j)].div_floor(&pivot);
                d.add_col_multiple(j, t, &q);
                v.add_col_multiple(j, t, &q);
                if !d[(t, j)].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // divisibility: fold a row with a non-multiple into the pivot row
            let bad = (t + 1..m).find(|&i| (t + 1..n).any(|j| !d[(i, j)].is_multiple_of(&pivot)));
            match bad {
                Some(i) => {
                    let one = BigInt::from(1);
                    d.add_row_multiple(t, i, &one);
                    u.add_row_multiple(t, i, &one);
                }
                None => break,
            }
        }
        rank = t + 1;
    }
    finish(&mut d, &mut u, rank);
    SmithForm { u, d, v, rank }
}

fn finish(d: &mut IntMatrix, u: &mut IntMatrix, rank: usize) {
    for t in 0..rank {
        if d[(t, t)].is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
    }
}

fn min_pivot(d: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, BigInt)> = None;
    for i in t..d.rows() {
        for j in t..d.cols() {
            let x = &d[(i, j)];
            if x.is_zero() {
                continue;
            }
            let ax = x.abs();
            let better = match &best {
                None => true,
                Some((_, _, b)) => ax < *b,
            };
            if better {
                let unit = ax == BigInt::from(1);
                best = Some((i, j, ax));
                if unit {
                    return best.map(|(i, j, _)| (i, j));
                }
            }
        }
    }
    best.map(|(i, j, _)| (i, j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn check(a: &IntMatrix) -> SmithForm {
        let s = snf(a);
        assert_eq!(&(&s.u * a) * &s.v, s.d);
        assert_eq!(s.u.det().abs(), BigInt::from(1));
        assert_eq!(s.v.det().abs(), BigInt::from(1));
        for i in 0..s.d.rows() {
            for j in 0..s.d.cols() {
                if i != j {
                    assert!(s.d[(i, j)].is_zero());
                }
            }
        }
        for i in 1..s.rank {
            assert!(s.d[(i, i)].is_multiple_of(&s.d[(i - 1, i - 1)]));
        }
        s
    }

    #[test]
    fn zero_matrix_is_its_own_form() {
        let s = check(&IntMatrix::zeros(2, 2));
        assert_eq!(s.rank, 0);
        assert_eq!(s.u, IntMatrix::identity(2));
        assert_eq!(s.v, IntMatrix::identity(2));
    }

    #[test]
    fn diag_two_three_becomes_one_six() {
        let s = check(&IntMatrix::from_rows(&[[2, 0], [0, 3]]));
        assert_eq!(s.invariants(), vec![BigInt::from(1), BigInt::from(6)]);
    }

    #[test]
    fn identity_is_fixed() {
        let s = check(&IntMatrix::identity(4));
        assert_eq!(s.d, IntMatrix::identity(4));
    }

    proptest! {
        #[test]
        fn snf_contract_holds(rows in 1usize..6, cols in 1usize..6, seed in proptest::collection::vec(-9i64..10, 36)) {
            let a = IntMatrix::from_i64(rows, cols, &seed[..rows * cols]);
            let s = check(&a);
            prop_assert_eq!(s.rank, a.rank());
        }
    }
}

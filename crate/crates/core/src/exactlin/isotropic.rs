use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{is_prime, kernel_int, snf, IntMatrix, Lattice, LinAlgError, Result, ZpMatrix, ZpRing};

/// Four conditions on an isotropic sublattice `N` of a perfectly paired
/// lattice `M` of twice its rank, each computed along its own route.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsotropicReport {
    /// `N` is a direct summand of `M` over `Z_p`.
    pub is_summand: bool,
    /// `N/pN -> M/pM` is injective.
    pub modp_injective: bool,
    /// `M -> Hom(N, Z_p)`, `x -> <x, ->`, is surjective.
    pub dual_surjective: bool,
    /// `0 -> N -> M -> Hom(N, Z_p) -> 0` is exact.
    pub sequence_exact: bool,
}

impl IsotropicReport {
    pub fn consistent(&self) -> bool {
        let v = [self.is_summand, self.modp_injective, self.dual_surjective, self.sequence_exact];
        v.iter().all(|&b| b == v[0])
    }
}

fn p_unit(x: &BigInt, p: &BigInt) -> bool {
    !x.is_zero() && !x.is_multiple_of(p)
}

/// Builds the report for the pairing `g` on `Z^m` and the sublattice `n`.
pub fn isotropic_summand_report(g: &IntMatrix, n: &Lattice, p: u64) -> Result<IsotropicReport> {
    if !is_prime(p) {
        return Err(LinAlgError::NotPrime(p));
    }
    if !g.is_square() || g.rows() != n.ambient() {
        return Err(LinAlgError::Dimension(format!(
            "pairing is {}x{} on a lattice in rank {}",
            g.rows(),
            g.cols(),
            n.ambient()
        )));
    }
    let pb = BigInt::from(p);
    let det = g.det();
    if !p_unit(&det, &pb) {
        return Err(LinAlgError::NotPerfect { p, det: det.to_string() });
    }
    let m = g.rows();
    let r = n.rank();
    if m != 2 * r {
        return Err(LinAlgError::RankMismatch { ambient: m, sub: r });
    }
    let b = n.as_columns();
    let dual = &b.transpose() * g;
    let gram = &dual * &b;
    for i in 0..r {
        for j in 0..r {
            if !gram[(i, j)].is_zero() {
                return Err(LinAlgError::NotIsotropic { i, j, value: gram[(i, j)].to_string() });
            }
        }
    }

    // summand: the basis matrix has p-unit invariant factors
    let is_summand = snf(&b).invariants().iter().all(|d| p_unit(d, &pb));

    // reduction mod p keeps full rank
    let fp = ZpRing::new(p, 1)?;
    let modp_injective = ZpMatrix::from_int(fp, &b).rank_mod_p() == r;

    // the r x r minors of the dual map generate the unit ideal at p
    let dual_surjective = minors_gcd(&dual).is_some_and(|d| p_unit(&d, &pb));

    // exactness: cokernel free at p, and N of index prime to p in the kernel
    let sequence_exact = {
        let coker_free = snf(&dual).invariants().iter().all(|d| p_unit(d, &pb));
        let kernel = kernel_int(&dual);
        coker_free && kernel.rank() == r && {
            let coords: Option<Vec<Vec<BigInt>>> =
                n.basis().iter().map(|v| kernel.coordinates(v)).collect();
            match coords {
                Some(cols) => p_unit(&IntMatrix::from_columns(r, &cols).det(), &pb),
                None => false,
            }
        }
    };

    Ok(IsotropicReport { is_summand, modp_injective, dual_surjective, sequence_exact })
}

/// gcd of all maximal row-count minors of a wide matrix.
fn minors_gcd(a: &IntMatrix) -> Option<BigInt> {
    let (r, c) = a.shape();
    if r > c {
        return None;
    }
    let rows: Vec<usize> = (0..r).collect();
    let mut choice: Vec<usize> = (0..r).collect();
    let mut acc = BigInt::zero();
    loop {
        let minor = a.submatrix(&rows, &choice).det();
        acc = acc.gcd(&minor);
        if acc.is_one() {
            return Some(acc);
        }
        // next r-combination of 0..c
        let mut i = r;
        loop {
            if i == 0 {
                return Some(acc);
            }
            i -= 1;
            if choice[i] < c - r + i {
                break;
            }
        }
        choice[i] += 1;
        for j in i + 1..r {
            choice[j] = choice[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn hyperbolic() -> IntMatrix {
        IntMatrix::from_rows(&[[0, 1], [1, 0]])
    }

    #[test]
    fn hyperbolic_summand_is_all_true() {
        let n = Lattice::from_i64(2, &[&[1, 0]]).unwrap();
        let r = isotropic_summand_report(&hyperbolic(), &n, 3).unwrap();
        assert!(r.is_summand && r.modp_injective && r.dual_surjective && r.sequence_exact);
    }

    #[test]
    fn scaled_line_is_all_false() {
        let n = Lattice::from_i64(2, &[&[3, 0]]).unwrap();
        let r = isotropic_summand_report(&hyperbolic(), &n, 3).unwrap();
        assert!(!r.is_summand && !r.modp_injective && !r.dual_surjective && !r.sequence_exact);
    }

    #[test]
    fn distinct_errors() {
        let n = Lattice::from_i64(2, &[&[1, 0]]).unwrap();
        let g = IntMatrix::from_rows(&[[0, 3], [3, 0]]);
        assert!(matches!(isotropic_summand_report(&g, &n, 3), Err(LinAlgError::NotPerfect { .. })));
        let diag = IntMatrix::identity(2);
        assert!(matches!(isotropic_summand_report(&diag, &n, 3), Err(LinAlgError::NotIsotropic { .. })));
        let g4 = IntMatrix::identity(4);
        let n4 = Lattice::from_i64(4, &[&[1, 0, 0, 0]]).unwrap();
        assert!(matches!(isotropic_summand_report(&g4, &n4, 3), Err(LinAlgError::RankMismatch { .. })));
    }

    #[test]
    fn minors_of_small_matrix() {
        let a = IntMatrix::from_rows(&[[2, 0, 4], [0, 2, 6]]);
        assert_eq!(minors_gcd(&a), Some(BigInt::from(4)));
    }

    /// Random isotropic instance: a standard split form with `N` inside the
    /// first Lagrangian, both moved by a random unimodular change of basis.
    pub(crate) fn random_instance(rng: &mut StdRng, p: u64) -> (IntMatrix, Lattice) {
        let half = rng.gen_range(1..=4usize);
        let m = 2 * half;
        let sign: i64 = if rng.gen_bool(0.5) { 1 } else { -1 };
        let mut g0 = IntMatrix::zeros(m, m);
        for i in 0..half {
            g0[(i, half + i)] = BigInt::one();
            g0[(half + i, i)] = BigInt::from(sign);
        }
        // N0 = columns of [C; 0]; C sometimes loses rank mod p
        let c = loop {
            let mut c = IntMatrix::zeros(half, half);
            for i in 0..half {
                for j in 0..half {
                    c[(i, j)] = BigInt::from(rng.gen_range(-3i64..=3));
                }
            }
            if rng.gen_bool(0.5) {
                let j = rng.gen_range(0..half);
                for i in 0..half {
                    c[(i, j)] *= BigInt::from(p);
                }
            }
            if !c.det().is_zero() {
                break c;
            }
        };
        let mut b0 = IntMatrix::zeros(m, half);
        for i in 0..half {
            for j in 0..half {
                b0[(i, j)] = c[(i, j)].clone();
            }
        }
        // Q unimodular with inverse tracked alongside
        let mut q = IntMatrix::identity(m);
        let mut qinv = IntMatrix::identity(m);
        for _ in 0..3 * m {
            let i = rng.gen_range(0..m);
            let j = rng.gen_range(0..m);
            if i == j {
                continue;
            }
            let t = BigInt::from(rng.gen_range(-2i64..=2));
            q.add_row_multiple(i, j, &t);
            qinv.add_col_multiple(j, i, &-t);
        }
        let g = &(&q.transpose() * &g0) * &q;
        let b = &qinv * &b0;
        let basis = (0..half).map(|j| b.column(j)).collect();
        (g, Lattice::new(m, basis).unwrap())
    }

    #[test]
    fn four_conditions_agree_on_random_instances() {
        let mut rng = StdRng::seed_from_u64(0x6a11);
        let mut true_count = 0;
        for t in 0..1200 {
            let p = [3u64, 5, 11][t % 3];
            let (g, n) = random_instance(&mut rng, p);
            let r = isotropic_summand_report(&g, &n, p).unwrap();
            assert!(r.consistent(), "instance {t}: {r:?}");
            true_count += r.is_summand as usize;
        }
        // both outcomes must be exercised
        assert!(true_count > 100 && true_count < 1100, "true in {true_count} of 1200");
    }
}

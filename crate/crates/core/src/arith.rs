//! Word-sized elementary number theory shared by the symbol and Hecke code.

pub fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `(g, x, y)` with `a x + b y = g = gcd(a, b) >= 0`.
pub fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i64, 0i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// Inverse of `a` modulo `m`, if it exists. `m = 1` gives 0.
pub fn inv_mod(a: i64, m: i64) -> Option<i64> {
    let (g, x, _) = ext_gcd(a.rem_euclid(m), m);
    (g == 1).then(|| x.rem_euclid(m))
}

/// Distinct prime divisors in increasing order.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn divisors(n: u64) -> Vec<u64> {
    (1..=n).filter(|d| n.is_multiple_of(*d)).collect()
}

pub fn euler_phi(n: u64) -> u64 {
    prime_factors(n).iter().fold(n, |acc, p| acc / p * (p - 1))
}

/// `x` with `x = a mod m1` and `x = b mod m2`, for coprime moduli.
pub fn crt(a: i64, m1: i64, b: i64, m2: i64) -> Option<i64> {
    let inv = inv_mod(m1, m2)?;
    let t = ((b - a).rem_euclid(m2) as i128 * inv as i128).rem_euclid(m2 as i128) as i64;
    Some((a + m1 * t).rem_euclid(m1 * m2))
}

/// A generating set of `(Z/m)^x`, chosen greedily by smallest residue.
pub fn unit_generators(m: i64) -> Vec<i64> {
    let mut reached = vec![false; m as usize];
    reached[(1 % m) as usize] = true;
    let mut gens = Vec::new();
    for a in 2..m {
        if gcd(a, m) != 1 || reached[a as usize] {
            continue;
        }
        gens.push(a);
        // close the subgroup under multiplication by a
        let mut frontier: Vec<i64> = (0..m).filter(|&x| reached[x as usize]).collect();
        while let Some(x) = frontier.pop() {
            let y = (x * a).rem_euclid(m);
            if !reached[y as usize] {
                reached[y as usize] = true;
                frontier.push(y);
            }
        }
    }
    gens
}

/// Multiplicative order of a unit modulo `m`.
pub fn unit_order(a: i64, m: i64) -> Option<u64> {
    inv_mod(a, m)?;
    let mut x = a.rem_euclid(m);
    let mut k = 1;
    while x != 1 % m {
        x = (x as i128 * a as i128).rem_euclid(m as i128) as i64;
        k += 1;
    }
    Some(k)
}

#[cfg(test)]
mod tests {

    #[test]
    fn unit_generators_generate() {
        for m in [5i64, 9, 15, 33, 45] {
            let gens = unit_generators(m);
            let mut seen = std::collections::HashSet::from([1i64]);
            let mut frontier = vec![1i64];
            while let Some(x) = frontier.pop() {
                for &g in &gens {
                    let y = x * g % m;
                    if seen.insert(y) {
                        frontier.push(y);
                    }
                }
            }
            assert_eq!(seen.len() as u64, euler_phi(m as u64));
        }
    }
    use super::*;

    #[test]
    fn extended_gcd_identity() {
        for (a, b) in [(240, 46), (-7, 3), (0, 5), (5, 0), (-4, -6)] {
            let (g, x, y) = ext_gcd(a, b);
            assert_eq!(a * x + b * y, g);
            assert_eq!(g, gcd(a, b));
        }
    }

    #[test]
    fn crt_lift_for_diamond() {
        assert_eq!(crt(4, 9, 1, 5), Some(31));
    }

    #[test]
    fn phi_and_factors() {
        assert_eq!(prime_factors(45), vec![3, 5]);
        assert_eq!(euler_phi(45), 24);
        assert_eq!(unit_order(2, 9), Some(6));
        assert_eq!(inv_mod(3, 9), None);
    }
}

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use super::{HeckeError, Result};
use crate::arith::{crt, gcd};
use crate::exactlin::IntMatrix;
use crate::modsym::{CuspidalData, SymbolSpace};

/// A labelled linear map between symbol spaces, identified by level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorMatrix {
    pub label: String,
    pub source: u64,
    pub target: u64,
    pub matrix: IntMatrix,
}

impl OperatorMatrix {
    pub fn new(label: impl Into<String>, source: u64, target: u64, matrix: IntMatrix) -> Self {
        Self { label: label.into(), source, target, matrix }
    }

    /// `self` after `other`.
    pub fn compose(&self, other: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(other.target, self.source, "composition across different levels");
        OperatorMatrix {
            label: format!("{} . {}", self.label, other.label),
            source: other.source,
            target: self.target,
            matrix: &self.matrix * &other.matrix,
        }
    }
}

type HeilbronnSet = Arc<Vec<[i64; 4]>>;

/// Merel's set: `[[a,b],[c,d]]` with `a > b >= 0`, `d > c >= 0`, `ad - bc = n`.
pub fn heilbronn(n: u64) -> HeilbronnSet {
    static CACHE: OnceLock<Mutex<HashMap<u64, HeilbronnSet>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().expect("heilbronn cache").get(&n) {
        return v.clone();
    }
    let n = n as i64;
    let mut out = Vec::new();
    for a in 1..=n {
        for b in 0..a {
            // d > c >= 0 forces c (a - b) < n
            let mut c = 0;
            while c * (a - b) < n {
                let rhs = n + b * c;
                if rhs % a == 0 {
                    let d = rhs / a;
                    if d > c {
                        out.push([a, b, c, d]);
                    }
                }
                c += 1;
            }
        }
    }
    let v = Arc::new(out);
    cache.lock().expect("heilbronn cache").insert(n as u64, v.clone());
    v
}

/// `T(n)` on the full symbol quotient; symbols that stop being unimodular
/// modulo the level are dropped.
pub fn hecke_t(space: &SymbolSpace, n: u64) -> OperatorMatrix {
    assert!(n >= 1, "T(n) needs n >= 1");
    let level = space.level();
    if n == 1 {
        return OperatorMatrix::new("T(1)", level, level, IntMatrix::identity(space.rank()));
    }
    let mats = heilbronn(n);
    let syms = space.symbols();
    let m = space.induced_matrix(space, |class| {
        mats.iter().filter_map(|&h| syms.act(class, h)).map(|c| (c, 1)).collect()
    });
    OperatorMatrix::new(format!("T({n})"), level, level, m)
}

/// `(c:d) -> (bc:bd)` for a unit `b` modulo the level.
pub fn diamond_unit(space: &SymbolSpace, b: i64) -> Result<OperatorMatrix> {
    let level = space.level();
    let m = level as i64;
    if gcd(b, m) != 1 {
        return Err(HeckeError::NotUnit { a: b, modulus: level });
    }
    let b = b.rem_euclid(m);
    let syms = space.symbols();
    let mat = space.induced_matrix(space, |class| {
        let s = syms.symbol(class);
        let image = syms.class_of(b * s.c as i64, b * s.d as i64).expect("units permute symbols");
        vec![(image, 1)]
    });
    Ok(OperatorMatrix::new(format!("<{b}>"), level, level, mat))
}

/// Diamond operator of a unit modulo `p^r`, lifted to the level by
/// `b = a mod p^r`, `b = 1 mod N`.
pub fn diamond(space: &SymbolSpace, a: i64) -> Result<OperatorMatrix> {
    let params = space.params().ok_or(HeckeError::MissingParams)?;
    let q = params.prime_power() as i64;
    if a.rem_euclid(params.prime as i64) == 0 {
        return Err(HeckeError::NotUnit { a, modulus: q as u64 });
    }
    let b = crt(a.rem_euclid(q), q, 1, params.tame as i64).expect("coprime moduli");
    diamond_unit(space, b)
}

fn check_cover(from: &SymbolSpace, to: &SymbolSpace) -> Result<()> {
    let (mr, ms) = (from.level(), to.level());
    let same_family = match (from.params(), to.params()) {
        (Some(a), Some(b)) => a.tame == b.tame && a.prime == b.prime && a.exponent > b.exponent,
        _ => true,
    };
    if mr <= ms || mr % ms != 0 || !same_family {
        return Err(HeckeError::LevelOrder { from: mr, to: ms });
    }
    Ok(())
}

/// Pushforward along `X1(M_r) -> X1(M_s)`: reduce symbols modulo `M_s`.
pub fn trace_map(upper: &SymbolSpace, lower: &SymbolSpace) -> Result<OperatorMatrix> {
    check_cover(upper, lower)?;
    let (su, sl) = (upper.symbols(), lower.symbols());
    let mat = upper.induced_matrix(lower, |class| {
        let s = su.symbol(class);
        vec![(sl.class_of(s.c as i64, s.d as i64).expect("reduction stays unimodular"), 1)]
    });
    Ok(OperatorMatrix::new(
        format!("trace_{}->{}", upper.level(), lower.level()),
        upper.level(),
        lower.level(),
        mat,
    ))
}

/// Pullback along `X1(M_r) -> X1(M_s)`: sum over all lifts of a symbol.
pub fn pullback_map(lower: &SymbolSpace, upper: &SymbolSpace) -> Result<OperatorMatrix> {
    check_cover(upper, lower)?;
    let (ms, mr) = (lower.level() as i64, upper.level() as i64);
    let steps = mr / ms;
    let (sl, su) = (lower.symbols(), upper.symbols());
    let mat = lower.induced_matrix(upper, |class| {
        let s = sl.symbol(class);
        let mut out = Vec::new();
        for i in 0..steps {
            for j in 0..steps {
                if let Some(t) = su.class_of(s.c as i64 + i * ms, s.d as i64 + j * ms) {
                    out.push((t, 1));
                }
            }
        }
        out
    });
    Ok(OperatorMatrix::new(
        format!("pullback_{}->{}", lower.level(), upper.level()),
        lower.level(),
        upper.level(),
        mat,
    ))
}

/// The involution induced by `z -> -1/(M z)`.
pub fn atkin_lehner(space: &SymbolSpace) -> OperatorMatrix {
    let m = space.level() as i64;
    let mat = space.induced_matrix(space, |class| {
        let [a, b, c, d] = space.sl2_lift(class);
        // {b/d, a/c} -> {-d/(M b), -c/(M a)}
        space.path((-d, m * b), (-c, m * a))
    });
    OperatorMatrix::new("W", space.level(), space.level(), mat)
}

/// `G W` on the cuspidal lattice, checked to make every listed operator
/// self-adjoint: `T^t (G W) = (G W) T`.
pub fn twisted_pairing(space: &SymbolSpace, cusp: &CuspidalData, operators: &[OperatorMatrix]) -> Result<IntMatrix> {
    let w = atkin_lehner(space);
    let wc = cusp.restrict(&w.matrix).ok_or(HeckeError::NotCuspidal { label: w.label })?;
    let gw = &cusp.pairing * &wc;
    for op in operators {
        let t = cusp.restrict(&op.matrix).ok_or_else(|| HeckeError::NotCuspidal { label: op.label.clone() })?;
        if &t.transpose() * &gw != &gw * &t {
            return Err(HeckeError::NotSelfAdjoint { label: op.label.clone() });
        }
    }
    Ok(gw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modsym::{build_space, build_space_for_level, LevelParams};

    #[test]
    fn heilbronn_sets() {
        // |X_1| = 1 and the determinant condition everywhere
        assert_eq!(heilbronn(1).len(), 1);
        for n in 2..20u64 {
            for &[a, b, c, d] in heilbronn(n).iter() {
                assert_eq!(a * d - b * c, n as i64);
                assert!(a > b && b >= 0 && d > c && c >= 0);
            }
        }
    }

    #[test]
    fn diamond_crt_lift() {
        let s = build_space(LevelParams::new(5, 3, 2).unwrap()).unwrap();
        let d = diamond(&s, 4).unwrap();
        assert_eq!(d.label, "<31>");
        assert!(matches!(diamond(&s, 3), Err(HeckeError::NotUnit { .. })));
        assert_eq!(diamond(&s, 1).unwrap().matrix, IntMatrix::identity(s.rank()));
    }

    #[test]
    fn trace_after_pullback_is_degree() {
        let upper = build_space_for_level(33).unwrap();
        let lower = build_space_for_level(11).unwrap();
        let t = trace_map(&upper, &lower).unwrap();
        let p = pullback_map(&lower, &upper).unwrap();
        let degree = (upper.symbols().len() / lower.symbols().len()) as i64;
        assert_eq!(t.compose(&p).matrix, IntMatrix::identity(lower.rank()).scale(&degree.into()));
        assert!(trace_map(&lower, &upper).is_err());
    }

    #[test]
    fn atkin_lehner_is_an_involution() {
        for level in [11, 15] {
            let s = build_space_for_level(level).unwrap();
            let w = atkin_lehner(&s);
            assert_eq!(w.compose(&w).matrix, IntMatrix::identity(s.rank()));
        }
    }

    #[test]
    fn twisted_pairing_is_hecke_self_adjoint() {
        use num_traits::Signed;
        for level in [11u64, 13, 15] {
            let s = build_space_for_level(level).unwrap();
            let cusp = CuspidalData::new(&s).unwrap();
            let mut ops: Vec<OperatorMatrix> = [2u64, 3, 5, 7].iter().map(|&n| hecke_t(&s, n)).collect();
            ops.push(diamond_unit(&s, 2).unwrap());
            let gw = twisted_pairing(&s, &cusp, &ops).unwrap();
            assert_eq!(gw.det().abs(), num_bigint::BigInt::from(1));
        }
    }
}

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{LevelParams, ManinSymbols, ModSymError, Result, Symbol};
use crate::arith::{ext_gcd, gcd};
use crate::exactlin::{snf, IntMatrix};

/// Sparse integer combination of symbol classes (or of variables).
pub type Chain = Vec<(usize, i64)>;

/// The free abelian group on Manin symbol classes modulo the two-term and
/// three-term relations, with a chosen basis.
#[derive(Clone, Debug)]
pub struct SymbolSpace {
    params: Option<LevelParams>,
    symbols: ManinSymbols,
    rank: usize,
    /// class-major, `rank` entries per class
    coords: Vec<i64>,
    /// nonzero entries of `coords`, per class
    sparse: Vec<Chain>,
    lifts: Vec<Chain>,
    relations: Vec<Chain>,
}

fn sparse_coords(coords: &[i64], classes: usize, rank: usize) -> Vec<Chain> {
    if rank == 0 {
        return vec![Vec::new(); classes];
    }
    coords
        .chunks(rank)
        .map(|row| row.iter().enumerate().filter(|(_, &x)| x != 0).map(|(i, &x)| (i, x)).collect())
        .collect()
}

pub fn build_space(level: LevelParams) -> Result<SymbolSpace> {
    let mut s = build_space_for_level(level.level())?;
    s.params = Some(level);
    Ok(s)
}

/// Space for a bare level, without tame/prime bookkeeping.
pub fn build_space_for_level(level: u64) -> Result<SymbolSpace> {
    let symbols = ManinSymbols::new(level)?;
    Presentation::new(symbols).finish()
}

struct Presentation {
    symbols: ManinSymbols,
    /// symbol class -> (variable, sign) after the two-term relations
    var_of: Vec<(usize, i64)>,
    /// variable -> representative class
    reps: Vec<usize>,
    relations: Vec<Chain>,
}

impl Presentation {
    fn new(symbols: ManinSymbols) -> Self {
        let n = symbols.len();
        let mut var_of = vec![(usize::MAX, 0i64); n];
        let mut reps = Vec::with_capacity(n / 2);
        let mut relations = Vec::with_capacity(n / 2 + n / 3);
        for i in 0..n {
            let j = symbols.s_image(i);
            if i < j {
                var_of[i] = (reps.len(), 1);
                var_of[j] = (reps.len(), -1);
                reps.push(i);
                relations.push(vec![(i, 1), (j, 1)]);
            }
        }
        let mut seen = vec![false; n];
        for i in 0..n {
            if seen[i] {
                continue;
            }
            let j = symbols.tau_image(i);
            let k = symbols.tau_image(j);
            seen[i] = true;
            seen[j] = true;
            seen[k] = true;
            relations.push(vec![(i, 1), (j, 1), (k, 1)]);
        }
        Self { symbols, var_of, reps, relations }
    }

    fn finish(self) -> Result<SymbolSpace> {
        let nvars = self.reps.len();
        let mut expr: Vec<Option<BTreeMap<usize, i64>>> = vec![None; nvars];
        let mut order = Vec::new();
        let mut residual = Vec::new();

        for rel in self.relations.iter().filter(|r| r.len() == 3) {
            let mut row = BTreeMap::new();
            for &(class, c) in rel {
                let (v, s) = self.var_of[class];
                add_term(&mut row, v, c * s)?;
            }
            substitute(&mut row, &expr)?;
            if row.is_empty() {
                continue;
            }
            // eliminate the largest variable carrying a unit coefficient
            let pivot = row.iter().rev().find(|(_, c)| c.abs() == 1).map(|(&v, &c)| (v, c));
            match pivot {
                Some((v, c)) => {
                    row.remove(&v);
                    let e = row.into_iter().map(|(w, x)| (w, -c * x)).collect();
                    expr[v] = Some(e);
                    order.push(v);
                }
                None => residual.push(row),
            }
        }
        // back-substitute so every expression is in free variables only
        for &v in order.iter().rev() {
            let mut e = expr[v].take().expect("eliminated variable");
            substitute(&mut e, &expr)?;
            expr[v] = Some(e);
        }
        let free: Vec<usize> = (0..nvars).filter(|&v| expr[v].is_none()).collect();
        let mut free_pos = vec![usize::MAX; nvars];
        for (i, &v) in free.iter().enumerate() {
            free_pos[v] = i;
        }

        // leftover relations among free variables go through SNF
        let mut rows = Vec::new();
        for mut r in residual {
            substitute(&mut r, &expr)?;
            if !r.is_empty() {
                rows.push(r);
            }
        }
        let nf = free.len();
        let (free_coords, free_lifts, rank) = if rows.is_empty() {
            let coords: Vec<Vec<i64>> =
                (0..nf).map(|i| (0..nf).map(|j| (i == j) as i64).collect()).collect();
            let lifts: Vec<Chain> = (0..nf).map(|i| vec![(i, 1)]).collect();
            (coords, lifts, nf)
        } else {
            let mut r = IntMatrix::zeros(rows.len(), nf);
            for (i, row) in rows.iter().enumerate() {
                for (&v, &c) in row {
                    r[(i, free_pos[v])] = BigInt::from(c);
                }
            }
            let s = snf(&r);
            let torsion: Vec<String> =
                s.invariants().iter().filter(|d| !d.is_one()).map(|d| d.to_string()).collect();
            if !torsion.is_empty() {
                return Err(ModSymError::Torsion(torsion));
            }
            let t = s.rank;
            let vinv = inverse_unimodular(&s.v);
            let coords = (0..nf)
                .map(|j| (t..nf).map(|c| small(&s.v[(j, c)])).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            let lifts = (t..nf)
                .map(|row| {
                    (0..nf)
                        .filter(|&j| !vinv[(row, j)].is_zero())
                        .map(|j| Ok((j, small(&vinv[(row, j)])?)))
                        .collect::<Result<Chain>>()
                })
                .collect::<Result<Vec<_>>>()?;
            (coords, lifts, nf - t)
        };

        let n = self.symbols.len();
        let mut coords = vec![0i64; n * rank];
        for class in 0..n {
            let (v, sign) = self.var_of[class];
            let out = &mut coords[class * rank..(class + 1) * rank];
            let terms: Chain = match &expr[v] {
                None => vec![(v, 1)],
                Some(e) => e.iter().map(|(&w, &c)| (w, c)).collect(),
            };
            for (w, c) in terms {
                let fc = &free_coords[free_pos[w]];
                for (o, &x) in out.iter_mut().zip(fc) {
                    *o = checked_axpy(*o, sign * c, x)?;
                }
            }
        }
        let lifts = free_lifts
            .into_iter()
            .map(|l| l.into_iter().map(|(j, c)| (self.reps[free[j]], c)).collect())
            .collect();
        let sparse = sparse_coords(&coords, n, rank);
        Ok(SymbolSpace { params: None, symbols: self.symbols, rank, coords, sparse, lifts, relations: self.relations })
    }
}

fn small(x: &BigInt) -> Result<i64> {
    x.to_i64().ok_or(ModSymError::Overflow)
}

fn checked_axpy(acc: i64, a: i64, x: i64) -> Result<i64> {
    a.checked_mul(x).and_then(|y| acc.checked_add(y)).ok_or(ModSymError::Overflow)
}

fn add_term(row: &mut BTreeMap<usize, i64>, v: usize, c: i64) -> Result<()> {
    let e = row.entry(v).or_insert(0);
    *e = e.checked_add(c).ok_or(ModSymError::Overflow)?;
    if *e == 0 {
        row.remove(&v);
    }
    Ok(())
}

fn substitute(row: &mut BTreeMap<usize, i64>, expr: &[Option<BTreeMap<usize, i64>>]) -> Result<()> {
    loop {
        let Some((v, c)) = row.iter().find(|(v, _)| expr[**v].is_some()).map(|(&v, &c)| (v, c)) else {
            return Ok(());
        };
        row.remove(&v);
        for (&w, &x) in expr[v].as_ref().expect("checked") {
            add_term(row, w, c.checked_mul(x).ok_or(ModSymError::Overflow)?)?;
        }
    }
}

/// Inverse of a unimodular matrix via its Smith form `U V W = I`.
fn inverse_unimodular(v: &IntMatrix) -> IntMatrix {
    let s = snf(v);
    debug_assert_eq!(s.d, IntMatrix::identity(v.rows()));
    &s.v * &s.u
}

impl SymbolSpace {
    pub fn level(&self) -> u64 {
        self.symbols.level()
    }

    pub fn params(&self) -> Option<LevelParams> {
        self.params
    }

    pub fn symbols(&self) -> &ManinSymbols {
        &self.symbols
    }

    /// Rank of the quotient.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Quotient coordinates of a symbol class.
    pub fn coords(&self, class: usize) -> &[i64] {
        &self.coords[class * self.rank..(class + 1) * self.rank]
    }

    /// Basis element `i` as a combination of symbol classes.
    pub fn basis_lift(&self, i: usize) -> &[(usize, i64)] {
        &self.lifts[i]
    }

    pub fn basis_lifts(&self) -> &[Chain] {
        &self.lifts
    }

    /// Two-term and three-term relations as sparse combinations of classes.
    pub fn relations(&self) -> &[Chain] {
        &self.relations
    }

    pub fn chain_coords(&self, chain: &[(usize, i64)]) -> Vec<i64> {
        let mut out = vec![0i64; self.rank];
        for &(class, c) in chain {
            for &(i, x) in &self.sparse[class] {
                out[i] += c * x;
            }
        }
        out
    }

    /// Quotient coordinates of a raw pair `(c:d)`.
    pub fn pair_coords(&self, c: i64, d: i64) -> Result<Vec<i64>> {
        let class = self.symbols.try_class_of(c, d)?;
        Ok(self.coords(class).to_vec())
    }

    /// The path `{0, num/den}` as a chain of classes (Manin's continued
    /// fraction trick). `den = 0` is the cusp at infinity.
    pub fn path_from_zero(&self, num: i64, den: i64) -> Chain {
        let (mut num, mut den) = (num, den);
        if den < 0 {
            num = -num;
            den = -den;
        }
        let g = gcd(num, den);
        if g > 1 {
            num /= g;
            den /= g;
        }
        if den == 0 {
            return vec![(self.class(0, 1), 1)];
        }
        // convergents with p_{-2}/q_{-2} = 0/1 and p_{-1}/q_{-1} = 1/0
        let (mut q_prev2, mut q_prev) = (1i64, 0i64);
        let mut chain = vec![(self.class(0, 1), 1)];
        let (mut a, mut b) = (num, den);
        let mut j = 0usize;
        while b != 0 {
            let t = a.div_euclid(b);
            (a, b) = (b, a - t * b);
            let q = t * q_prev + q_prev2;
            // j counts from 0; sign (-1)^(j-1)
            let sign = if j.is_multiple_of(2) { -1 } else { 1 };
            chain.push((self.class(sign * q, q_prev), 1));
            (q_prev2, q_prev) = (q_prev, q);
            j += 1;
        }
        chain
    }

    /// The path `{alpha, beta}` between two cusps given as `(num, den)`.
    pub fn path(&self, from: (i64, i64), to: (i64, i64)) -> Chain {
        let mut chain = self.path_from_zero(to.0, to.1);
        chain.extend(self.path_from_zero(from.0, from.1).into_iter().map(|(c, x)| (c, -x)));
        chain
    }

    fn class(&self, c: i64, d: i64) -> usize {
        self.symbols.class_of(c, d).expect("unimodular bottom row")
    }

    /// A matrix in `SL2(Z)` with bottom row congruent to the class
    /// representative modulo `M`.
    pub fn sl2_lift(&self, class: usize) -> [i64; 4] {
        let Symbol { c, d } = self.symbols.symbol(class);
        let m = self.level() as i64;
        let c0 = if c == 0 { m } else { c as i64 };
        let mut d0 = d as i64;
        while gcd(c0, d0) != 1 {
            d0 += m;
        }
        let (_, x, y) = ext_gcd(d0, c0);
        // a d0 - b c0 = 1 with a = x, b = -y
        [x, -y, c0, d0]
    }

    /// Matrix of the endomorphism sending basis element `i` to the
    /// quotient image of `f` applied to its lift, class by class.
    pub fn induced_matrix<F>(&self, target: &SymbolSpace, f: F) -> IntMatrix
    where
        F: Fn(usize) -> Chain,
    {
        let mut entries = vec![0i64; target.rank * self.rank];
        let mut counts = vec![0i64; target.symbols.len()];
        let mut touched = Vec::new();
        for (i, lift) in self.lifts.iter().enumerate() {
            for &(class, c) in lift {
                for (t, x) in f(class) {
                    if counts[t] == 0 {
                        touched.push(t);
                    }
                    counts[t] += c * x;
                }
            }
            for t in touched.drain(..) {
                let k = std::mem::take(&mut counts[t]);
                for &(row, y) in &target.sparse[t] {
                    entries[row * self.rank + i] += k * y;
                }
            }
        }
        IntMatrix::from_i64(target.rank, self.rank, &entries)
    }

    /// Serializable snapshot for caches.
    pub fn record(&self) -> SpaceRecord {
        SpaceRecord {
            level: self.level(),
            params: self.params,
            symbols: self.symbols.classes().iter().map(|s| [s.c, s.d]).collect(),
            relations: self.relations.clone(),
            rank: self.rank,
            basis: self.lifts.clone(),
            coordinates: IntMatrix::from_i64(self.symbols.len(), self.rank, &self.coords),
        }
    }

    /// Rebuilds a space from a snapshot, checking it against the level.
    pub fn from_record(rec: SpaceRecord) -> Result<Self> {
        let symbols = ManinSymbols::new(rec.level)?;
        let listed: Vec<[u32; 2]> = symbols.classes().iter().map(|s| [s.c, s.d]).collect();
        if listed != rec.symbols {
            return Err(ModSymError::InvalidLevel("cached symbol list differs from the level".into()));
        }
        if rec.coordinates.shape() != (symbols.len(), rec.rank) || rec.basis.len() != rec.rank {
            return Err(ModSymError::InvalidLevel("cached presentation has the wrong shape".into()));
        }
        let coords = rec.coordinates.to_i64().ok_or(ModSymError::Overflow)?;
        let sparse = sparse_coords(&coords, symbols.len(), rec.rank);
        Ok(Self {
            params: rec.params,
            symbols,
            rank: rec.rank,
            coords,
            sparse,
            lifts: rec.basis,
            relations: rec.relations,
        })
    }
}

/// On-disk form of a [`SymbolSpace`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceRecord {
    pub level: u64,
    pub params: Option<LevelParams>,
    pub symbols: Vec<[u32; 2]>,
    pub relations: Vec<Chain>,
    pub rank: usize,
    pub basis: Vec<Chain>,
    pub coordinates: IntMatrix,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relations_vanish_in_quotient() {
        let s = build_space_for_level(15).unwrap();
        for rel in s.relations() {
            assert!(s.chain_coords(rel).iter().all(|&x| x == 0));
        }
    }

    #[test]
    fn lifts_map_to_unit_vectors() {
        let s = build_space_for_level(11).unwrap();
        for i in 0..s.rank() {
            let v = s.chain_coords(s.basis_lift(i));
            for (j, &x) in v.iter().enumerate() {
                assert_eq!(x, (i == j) as i64);
            }
        }
    }

    #[test]
    fn quotient_ranks_small_levels() {
        assert_eq!(build_space_for_level(11).unwrap().rank(), 11);
        assert_eq!(build_space_for_level(15).unwrap().rank(), 17);
        assert!(matches!(build_space_for_level(3), Err(ModSymError::UnsupportedLevel(3))));
    }

    #[test]
    fn continued_fraction_recovers_symbols() {
        // g{0, oo} = {b/d, a/c} is the symbol (c:d)
        let s = build_space_for_level(15).unwrap();
        for i in 0..s.symbols().len() {
            let [a, b, c, d] = s.sl2_lift(i);
            let path = s.chain_coords(&s.path((b, d), (a, c)));
            assert_eq!(path, s.coords(i), "class {i}");
        }
        assert!(s.chain_coords(&s.path_from_zero(0, 1)).iter().all(|&x| x == 0));
    }

    #[test]
    fn sl2_lifts_are_unimodular() {
        let s = build_space_for_level(15).unwrap();
        for i in 0..s.symbols().len() {
            let [a, b, c, d] = s.sl2_lift(i);
            assert_eq!(a * d - b * c, 1);
            assert_eq!(s.symbols().class_of(c, d), Some(i));
        }
    }

    #[test]
    fn record_roundtrip() {
        let s = build_space_for_level(11).unwrap();
        let json = serde_json::to_string(&s.record()).unwrap();
        let back = SymbolSpace::from_record(serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back.record(), s.record());
    }
}

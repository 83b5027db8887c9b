use serde::{Deserialize, Serialize};

use super::{ModSymError, Result, MAX_LEVEL};
use crate::arith::gcd;

/// A Manin symbol `(c:d)`: the bottom row of a matrix in `SL2(Z)` modulo `M`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Symbol {
    pub c: u32,
    pub d: u32,
}

const NONE: u32 = u32::MAX;

/// Classes of Manin symbols under `(c,d) ~ (-c,-d)`, with a dense lookup
/// table over `(Z/M)^2`.
#[derive(Clone, Debug)]
pub struct ManinSymbols {
    level: u32,
    classes: Vec<Symbol>,
    index: Vec<u32>,
}

impl ManinSymbols {
    pub fn new(level: u64) -> Result<Self> {
        if level <= 4 || level >= MAX_LEVEL {
            return Err(ModSymError::UnsupportedLevel(level));
        }
        let m = level as u32;
        let mut classes = Vec::new();
        let mut index = vec![NONE; (m * m) as usize];
        for c in 0..m {
            for d in 0..m {
                if gcd(gcd(c as i64, d as i64), m as i64) != 1 {
                    continue;
                }
                let neg = ((m - c) % m, (m - d) % m);
                if (c, d) <= neg {
                    let i = classes.len() as u32;
                    classes.push(Symbol { c, d });
                    index[(c * m + d) as usize] = i;
                    index[(neg.0 * m + neg.1) as usize] = i;
                }
            }
        }
        Ok(Self { level: m, classes, index })
    }

    pub fn level(&self) -> u64 {
        self.level as u64
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn classes(&self) -> &[Symbol] {
        &self.classes
    }

    pub fn symbol(&self, i: usize) -> Symbol {
        self.classes[i]
    }

    /// Class of `(c:d)` for arbitrary integers, or `None` when
    /// `gcd(c, d, M) != 1`.
    pub fn class_of(&self, c: i64, d: i64) -> Option<usize> {
        let m = self.level as i64;
        let (c, d) = (c.rem_euclid(m) as u32, d.rem_euclid(m) as u32);
        let i = self.index[(c * self.level + d) as usize];
        (i != NONE).then_some(i as usize)
    }

    pub fn try_class_of(&self, c: i64, d: i64) -> Result<usize> {
        self.class_of(c, d).ok_or(ModSymError::InvalidSymbol { c, d, level: self.level() })
    }

    /// `(c,d) S = (d,-c)`.
    pub fn s_image(&self, i: usize) -> usize {
        let Symbol { c, d } = self.classes[i];
        self.class_of(d as i64, -(c as i64)).expect("S permutes symbols")
    }

    /// `(c,d) tau = (d,-c-d)`.
    pub fn tau_image(&self, i: usize) -> usize {
        let Symbol { c, d } = self.classes[i];
        self.class_of(d as i64, -(c as i64) - d as i64).expect("tau permutes symbols")
    }

    /// Right action of an integer matrix `[[a,b],[c,d]]`.
    pub fn act(&self, i: usize, h: [i64; 4]) -> Option<usize> {
        let Symbol { c, d } = self.classes[i];
        let (c, d) = (c as i64, d as i64);
        self.class_of(c * h[0] + d * h[2], c * h[1] + d * h[3])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_counts() {
        assert_eq!(ManinSymbols::new(11).unwrap().len(), 60);
        assert_eq!(ManinSymbols::new(15).unwrap().len(), 96);
        assert!(matches!(ManinSymbols::new(4), Err(ModSymError::UnsupportedLevel(4))));
    }

    #[test]
    fn s_and_tau_have_no_fixed_points() {
        let s = ManinSymbols::new(15).unwrap();
        for i in 0..s.len() {
            assert_ne!(s.s_image(i), i);
            assert_eq!(s.s_image(s.s_image(i)), i);
            assert_ne!(s.tau_image(i), i);
            assert_eq!(s.tau_image(s.tau_image(s.tau_image(i))), i);
        }
    }

    #[test]
    fn sign_identification() {
        let s = ManinSymbols::new(11).unwrap();
        assert_eq!(s.class_of(3, 4), s.class_of(-3, -4));
        assert_eq!(s.class_of(0, 11), None);
    }
}

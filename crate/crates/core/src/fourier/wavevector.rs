use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer lattice point `(k1, k2)` indexing a Fourier mode `exp(i k·X)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WaveVector {
    pub k1: i64,
    pub k2: i64,
}

impl WaveVector {
    pub const ZERO: WaveVector = WaveVector { k1: 0, k2: 0 };

    pub const fn new(k1: i64, k2: i64) -> Self {
        Self { k1, k2 }
    }

    pub fn is_zero(self) -> bool {
        self.k1 == 0 && self.k2 == 0
    }

    pub fn norm2(self) -> i64 {
        self.k1 * self.k1 + self.k2 * self.k2
    }

    pub fn norm(self) -> f64 {
        (self.norm2() as f64).sqrt()
    }

    /// Determinant of the 2x2 matrix with columns `self`, `other`.
    pub fn det(self, other: WaveVector) -> i64 {
        self.k1 * other.k2 - self.k2 * other.k1
    }

    pub fn is_parallel(self, other: WaveVector) -> bool {
        self.det(other) == 0
    }

    /// Lexicographically positive half of the lattice: `k1 > 0`, or `k1 == 0`
    /// and `k2 > 0`. Exactly one of `k`, `-k` satisfies this for `k != 0`.
    pub fn is_positive_half(self) -> bool {
        self.k1 > 0 || (self.k1 == 0 && self.k2 > 0)
    }

    /// Representative of `{k, -k}` in the positive half lattice.
    pub fn canonical(self) -> WaveVector {
        if self.is_positive_half() {
            self
        } else {
            -self
        }
    }

    pub(crate) fn require_nonzero(self) -> Result<Self> {
        if self.is_zero() {
            Err(Error::Domain("zero wavevector used as a mode index".into()))
        } else {
            Ok(self)
        }
    }
}

impl fmt::Display for WaveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.k1, self.k2)
    }
}

impl Add for WaveVector {
    type Output = WaveVector;
    fn add(self, rhs: WaveVector) -> WaveVector {
        WaveVector::new(self.k1 + rhs.k1, self.k2 + rhs.k2)
    }
}

impl Sub for WaveVector {
    type Output = WaveVector;
    fn sub(self, rhs: WaveVector) -> WaveVector {
        WaveVector::new(self.k1 - rhs.k1, self.k2 - rhs.k2)
    }
}

impl Neg for WaveVector {
    type Output = WaveVector;
    fn neg(self) -> WaveVector {
        WaveVector::new(-self.k1, -self.k2)
    }
}

impl Mul<WaveVector> for i64 {
    type Output = WaveVector;
    fn mul(self, rhs: WaveVector) -> WaveVector {
        WaveVector::new(self * rhs.k1, self * rhs.k2)
    }
}

/// The lattice line `{base + n * direction}` along which the linearization
/// about the single-mode fixed point decouples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassIndex {
    pub base: WaveVector,
    pub direction: WaveVector,
}

impl ClassIndex {
    pub fn new(base: WaveVector, direction: WaveVector) -> Result<Self> {
        direction.require_nonzero()?;
        Ok(Self { base, direction })
    }

    pub fn member(&self, n: i64) -> WaveVector {
        self.base + n * self.direction
    }

    /// The class runs parallel to its direction (every coupling vanishes).
    pub fn is_degenerate(&self) -> bool {
        self.base.is_parallel(self.direction)
    }

    /// Whether some member lies in the closed disk `|k| <= |p|`.
    pub fn meets_closed_disk(&self) -> bool {
        let p = self.direction;
        let p2 = p.norm2();
        // |base + n p|^2 is a convex quadratic in n; only n near the vertex
        // can land inside the disk.
        let n_star = -(self.base.k1 * p.k1 + self.base.k2 * p.k2) as f64 / p2 as f64;
        let lo = n_star.floor() as i64 - 2;
        let hi = n_star.ceil() as i64 + 2;
        (lo..=hi).any(|n| {
            let k = self.member(n);
            !k.is_zero() && k.norm2() <= p2
        })
    }
}

/// Members `base + n p` for `n` in `range`, skipping the origin.
pub fn class_members(
    cls: &ClassIndex,
    range: std::ops::RangeInclusive<i64>,
) -> Vec<(i64, WaveVector)> {
    range
        .map(|n| (n, cls.member(n)))
        .filter(|(_, k)| !k.is_zero())
        .collect()
}

/// Number of lattice points `q != 0` in the open disk `|q| < |p|` that are not
/// parallel to `p`.
pub fn zeta(p: WaveVector) -> Result<usize> {
    p.require_nonzero()?;
    let r2 = p.norm2();
    let r = (r2 as f64).sqrt().ceil() as i64;
    let mut count = 0;
    for q1 in -r..=r {
        for q2 in -r..=r {
            let q = WaveVector::new(q1, q2);
            if !q.is_zero() && q.norm2() < r2 && !q.is_parallel(p) {
                count += 1;
            }
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wv(a: i64, b: i64) -> WaveVector {
        WaveVector::new(a, b)
    }

    #[test]
    fn class_members_examples() {
        let cls = ClassIndex::new(wv(-3, -2), wv(1, 1)).unwrap();
        let got: Vec<_> = class_members(&cls, 0..=3)
            .into_iter()
            .map(|(_, k)| k)
            .collect();
        assert_eq!(got, vec![wv(-3, -2), wv(-2, -1), wv(-1, 0), wv(0, 1)]);

        let cls = ClassIndex::new(wv(1, 0), wv(1, 0)).unwrap();
        let got = class_members(&cls, -2..=0);
        assert_eq!(got, vec![(-2, wv(-1, 0)), (0, wv(1, 0))]);

        #[allow(clippy::reversed_empty_ranges)]
        let empty = class_members(&cls, 3..=2);
        assert!(empty.is_empty());
    }

    #[test]
    fn zeta_examples() {
        assert_eq!(zeta(wv(1, 1)).unwrap(), 4);
        assert_eq!(zeta(wv(1, 0)).unwrap(), 0);
        assert_eq!(zeta(wv(2, 1)).unwrap(), 12);
        assert!(zeta(WaveVector::ZERO).is_err());
    }

    #[test]
    fn disk_test() {
        let p = wv(1, 1);
        assert!(ClassIndex::new(wv(-3, -2), p).unwrap().meets_closed_disk());
        assert!(!ClassIndex::new(wv(10, 0), p).unwrap().meets_closed_disk());
        // brute force over a window of n
        for b1 in -6..=6 {
            for b2 in -6..=6 {
                let cls = ClassIndex::new(wv(b1, b2), wv(2, 1)).unwrap();
                let brute = (-50..=50).any(|n| {
                    let k = cls.member(n);
                    !k.is_zero() && k.norm2() <= 5
                });
                assert_eq!(brute, cls.meets_closed_disk(), "{}", cls.base);
            }
        }
    }

    #[test]
    fn canonical_half() {
        assert_eq!(wv(-1, 2).canonical(), wv(1, -2));
        assert_eq!(wv(0, -3).canonical(), wv(0, 3));
        assert!(wv(0, 3).is_positive_half());
    }
}

//! Elements of `Z^n` under the right lexicographic order.
//!
//! Values are integer tuples; index 0 is the *least* significant coordinate
//! and the last index is the most significant one, so comparisons scan from
//! the right. The minimal positive element is `(1,0,...,0)`. This indexing is
//! the number-one source of bugs when reading tuples off paper notation:
//! `(0,1)` is "one step at height two", not "one step then nothing".

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Largest supported rank. The completion pipeline recurses on the rank, so
/// this bound also caps that recursion depth.
pub const MAX_RANK: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrdVecError {
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("rank {0} out of range 1..={MAX_RANK}")]
    RankOutOfRange(usize),
    #[error("empty segment: lower bound exceeds upper bound")]
    EmptySegment,
    #[error("value is not divisible by {0}")]
    NotDivisible(BigInt),
    #[error("cannot parse `{0}` as a Z^n value")]
    Parse(String),
}

/// An element of `Z^n`, right-lexicographically ordered.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrdVec {
    coords: Vec<BigInt>,
}

impl Serialize for OrdVec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for OrdVec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl OrdVec {
    pub fn new(coords: Vec<BigInt>) -> Result<Self, OrdVecError> {
        if coords.is_empty() || coords.len() > MAX_RANK {
            return Err(OrdVecError::RankOutOfRange(coords.len()));
        }
        Ok(OrdVec { coords })
    }

    pub fn from_i64s(coords: &[i64]) -> Self {
        assert!(!coords.is_empty() && coords.len() <= MAX_RANK);
        OrdVec {
            coords: coords.iter().map(|&c| BigInt::from(c)).collect(),
        }
    }

    pub fn zero(rank: usize) -> Self {
        OrdVec {
            coords: vec![BigInt::zero(); rank],
        }
    }

    /// The minimal positive element `(1,0,...,0)`, written `1` on paper.
    pub fn one(rank: usize) -> Self {
        let mut v = Self::zero(rank);
        v.coords[0] = BigInt::from(1);
        v
    }

    pub fn rank(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> &BigInt {
        &self.coords[i]
    }

    /// First (least significant) coordinate.
    pub fn first(&self) -> &BigInt {
        &self.coords[0]
    }

    /// Last (most significant) coordinate.
    pub fn last(&self) -> &BigInt {
        &self.coords[self.coords.len() - 1]
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn is_positive(&self) -> bool {
        self.cmp(&Self::zero(self.rank())) == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.cmp(&Self::zero(self.rank())) == Ordering::Less
    }

    /// Index (1-based) of the most significant nonzero coordinate; 0 for zero.
    pub fn height(&self) -> usize {
        for i in (0..self.coords.len()).rev() {
            if !self.coords[i].is_zero() {
                return i + 1;
            }
        }
        0
    }

    pub fn checked_cmp(&self, other: &Self) -> Result<Ordering, OrdVecError> {
        if self.rank() != other.rank() {
            return Err(OrdVecError::RankMismatch(self.rank(), other.rank()));
        }
        Ok(self.cmp(other))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    pub fn neg(&self) -> Self {
        OrdVec {
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }

    /// Multiplies every coordinate by `m`.
    pub fn scale(&self, m: &BigInt) -> Self {
        OrdVec {
            coords: self.coords.iter().map(|c| c * m).collect(),
        }
    }

    pub fn scale_i64(&self, m: i64) -> Self {
        self.scale(&BigInt::from(m))
    }

    /// Componentwise exact division; fails if any coordinate is not divisible.
    pub fn div_exact(&self, m: &BigInt) -> Result<Self, OrdVecError> {
        let mut coords = Vec::with_capacity(self.coords.len());
        for c in &self.coords {
            let (q, r) = num_integer::Integer::div_rem(c, m);
            if !r.is_zero() {
                return Err(OrdVecError::NotDivisible(m.clone()));
            }
            coords.push(q);
        }
        Ok(OrdVec { coords })
    }

    /// Halves the value exactly, as needed for `c(g,f)`.
    pub fn halve(&self) -> Result<Self, OrdVecError> {
        self.div_exact(&BigInt::from(2))
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// `true` iff `lo <= self <= hi` in the right-lex order.
    pub fn segment_contains(&self, lo: &Self, hi: &Self) -> Result<bool, OrdVecError> {
        if lo.checked_cmp(hi)? == Ordering::Greater {
            return Err(OrdVecError::EmptySegment);
        }
        Ok(lo.checked_cmp(self)? != Ordering::Greater && self.checked_cmp(hi)? != Ordering::Greater)
    }

    fn zip(&self, other: &Self, f: impl Fn(&BigInt, &BigInt) -> BigInt) -> Self {
        assert_eq!(self.rank(), other.rank(), "OrdVec rank mismatch");
        OrdVec {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }
}

impl Ord for OrdVec {
    fn cmp(&self, other: &Self) -> Ordering {
        assert_eq!(self.rank(), other.rank(), "OrdVec rank mismatch");
        for i in (0..self.coords.len()).rev() {
            match self.coords[i].cmp(&other.coords[i]) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for OrdVec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for OrdVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rank() == 1 {
            return write!(f, "{}", self.coords[0]);
        }
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for OrdVec {
    type Err = OrdVecError;

    /// Parses `(a1,...,an)`; a bare integer is accepted as a rank-1 value.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let inner = if let Some(stripped) = s.strip_prefix('(') {
            stripped
                .strip_suffix(')')
                .ok_or_else(|| OrdVecError::Parse(s.to_string()))?
        } else {
            s
        };
        let coords: Result<Vec<BigInt>, _> = inner
            .split(',')
            .map(|p| BigInt::from_str(p.trim()).map_err(|_| OrdVecError::Parse(s.to_string())))
            .collect();
        OrdVec::new(coords?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[i64]) -> OrdVec {
        OrdVec::from_i64s(c)
    }

    #[test]
    fn right_lex_order() {
        assert_eq!(v(&[1, 0]).cmp(&v(&[0, 1])), Ordering::Less);
        assert_eq!(v(&[3, 2]).cmp(&v(&[3, 2])), Ordering::Equal);
        assert_eq!(v(&[-5, 1]).cmp(&v(&[4, 0])), Ordering::Greater);
    }

    #[test]
    fn rank_mismatch_is_error() {
        assert!(matches!(
            v(&[1]).checked_cmp(&v(&[1, 0])),
            Err(OrdVecError::RankMismatch(1, 2))
        ));
    }

    #[test]
    fn height_of_vectors() {
        assert_eq!(v(&[0, 0]).height(), 0);
        assert_eq!(v(&[7, 0]).height(), 1);
        assert_eq!(v(&[0, 3]).height(), 2);
    }

    #[test]
    fn arithmetic() {
        assert_eq!(v(&[1, 0]).add(&v(&[-1, 1])), v(&[0, 1]));
        assert_eq!(v(&[-2, 0]).abs(), v(&[2, 0]));
        assert_eq!(v(&[0, 1]).scale_i64(2), v(&[0, 2]));
        assert_eq!(v(&[3, 1]).sub(&v(&[1, 1])), v(&[2, 0]));
        assert_eq!(v(&[2, -1]).neg(), v(&[-2, 1]));
    }

    #[test]
    fn segments() {
        let lo = v(&[1, 0]);
        let hi = v(&[0, 1]);
        assert!(v(&[0, 1]).segment_contains(&lo, &hi).unwrap());
        assert!(!v(&[0, 0]).segment_contains(&lo, &hi).unwrap());
        // (1,0) <= (-3,1) <= (0,1): decided by the top coordinate.
        assert!(v(&[-3, 1]).segment_contains(&lo, &hi).unwrap());
        assert!(matches!(
            v(&[0, 0]).segment_contains(&hi, &lo),
            Err(OrdVecError::EmptySegment)
        ));
    }

    #[test]
    fn minimal_positive_element() {
        let one = OrdVec::one(2);
        assert!(one.is_positive());
        assert_eq!(one, v(&[1, 0]));
    }

    #[test]
    fn display_and_parse() {
        for s in ["(1,0)", "(-3,2)", "(0,0,1)"] {
            let p: OrdVec = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
        let r1: OrdVec = "5".parse().unwrap();
        assert_eq!(r1, v(&[5]));
        assert_eq!(r1.to_string(), "5");
    }

    #[test]
    fn height_subadditive() {
        let a = v(&[3, 1, 0]);
        let b = v(&[-3, -1, 0]);
        assert!(a.add(&b).height() <= a.height().max(b.height()));
        let c = v(&[0, 0, 2]);
        assert_eq!(a.add(&c).height(), 3);
    }
}

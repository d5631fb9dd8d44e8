//! Integer scalars backing the `Q/Z` arithmetic.
//!
//! Everything in [`crate::qz`] and [`crate::charset`] is generic over a
//! [`Scalar`]: machine words (`u32`, `u64`) for hot loops with bounded
//! denominators, [`BigUint`] when denominators are unbounded.

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{CheckedAdd, CheckedMul, FromPrimitive, ToPrimitive, Unsigned};

pub trait Scalar:
    Integer
    + Unsigned
    + Clone
    + Hash
    + Debug
    + Display
    + FromPrimitive
    + ToPrimitive
    + CheckedAdd
    + CheckedMul
    + Send
    + Sync
    + 'static
{
    /// `self * rhs mod m`, without intermediate overflow.
    fn mul_mod(&self, rhs: &Self, m: &Self) -> Self;

    fn to_biguint(&self) -> BigUint;

    fn from_biguint(b: &BigUint) -> Option<Self>;

    /// `(self + rhs) mod m` for operands already reduced mod `m`.
    fn add_mod(&self, rhs: &Self, m: &Self) -> Self {
        let gap = m.clone() - rhs.clone();
        if *self >= gap {
            self.clone() - gap
        } else {
            self.clone() + rhs.clone()
        }
    }
}

impl Scalar for u32 {
    fn mul_mod(&self, rhs: &Self, m: &Self) -> Self {
        ((*self as u64 * *rhs as u64) % *m as u64) as u32
    }
    fn to_biguint(&self) -> BigUint {
        BigUint::from(*self)
    }
    fn from_biguint(b: &BigUint) -> Option<Self> {
        b.to_u32()
    }
}

impl Scalar for u64 {
    fn mul_mod(&self, rhs: &Self, m: &Self) -> Self {
        ((*self as u128 * *rhs as u128) % *m as u128) as u64
    }
    fn to_biguint(&self) -> BigUint {
        BigUint::from(*self)
    }
    fn from_biguint(b: &BigUint) -> Option<Self> {
        b.to_u64()
    }
}

impl Scalar for BigUint {
    fn mul_mod(&self, rhs: &Self, m: &Self) -> Self {
        (self * rhs) % m
    }
    fn to_biguint(&self) -> BigUint {
        self.clone()
    }
    fn from_biguint(b: &BigUint) -> Option<Self> {
        Some(b.clone())
    }
}

/// `a * b mod m` on words.
#[inline]
pub(crate) fn mulmod64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut q = 2u32;
    while q.saturating_mul(q) <= p {
        if p.is_multiple_of(q) {
            return false;
        }
        q += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_mod_wraps() {
        assert_eq!(7u64.add_mod(&5, &11), 1);
        assert_eq!(u64::MAX.wrapping_sub(1).add_mod(&1, &u64::MAX), 0);
        let m = BigUint::from(11u32);
        assert_eq!(
            BigUint::from(7u32).add_mod(&BigUint::from(3u32), &m),
            BigUint::from(10u32)
        );
    }

    #[test]
    fn mul_mod_large_words() {
        let m = u64::MAX - 58; // prime 2^64 - 59
        assert_eq!((m - 1).mul_mod(&(m - 1), &m), 1);
    }

    #[test]
    fn primes() {
        let ps: Vec<u32> = (0..30).filter(|&p| is_prime(p)).collect();
        assert_eq!(ps, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
    }
}

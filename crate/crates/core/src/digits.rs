//! Base-`p` digit sums and the fixed-modulus V kernel used by the sweeps.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::qz::{mult_order_bounded, VValue};

/// Sum of the base-`p` digits of `n`.
///
/// Works limb by limb: for `p = 2` it is a popcount per 64-bit word; for other
/// `p` the number is peeled in chunks of the largest power of `p` that fits a
/// word and each chunk is folded on the machine.
pub fn digit_sum(p: u32, n: &BigUint) -> u64 {
    if p == 2 {
        return n.iter_u64_digits().map(|w| w.count_ones() as u64).sum();
    }
    let (chunk, chunk_digits) = word_power(p);
    let chunk_big = BigUint::from(chunk);
    let mut rest = n.clone();
    let mut total = 0u64;
    while !rest.is_zero() {
        let (q, r) = num_integer::Integer::div_rem(&rest, &chunk_big);
        let mut w = r.iter_u64_digits().next().unwrap_or(0);
        let mut digits = 0;
        while w > 0 && digits < chunk_digits {
            total += w % p as u64;
            w /= p as u64;
            digits += 1;
        }
        rest = q;
    }
    total
}

/// Digit sum of a single word.
#[inline]
pub fn digit_sum_u64(p: u32, mut n: u64) -> u64 {
    if p == 2 {
        return n.count_ones() as u64;
    }
    let p = p as u64;
    let mut s = 0;
    while n > 0 {
        s += n % p;
        n /= p;
    }
    s
}

fn word_power(p: u32) -> (u64, u32) {
    let mut acc = 1u64;
    let mut e = 0;
    while let Some(next) = acc.checked_mul(p as u64) {
        acc = next;
        e += 1;
    }
    (acc, e)
}

/// Popcount of `c * mult` where `mult` is little-endian limbs. No allocation.
#[inline]
fn popcount_scaled(c: u64, mult: &[u64]) -> u64 {
    let mut carry = 0u128;
    let mut ones = 0u64;
    for &limb in mult {
        let t = c as u128 * limb as u128 + carry;
        ones += (t as u64).count_ones() as u64;
        carry = t >> 64;
    }
    ones + (carry as u64).count_ones() as u64
}

/// Evaluates V on `(1/L)Z/Z` for one fixed modulus `L` prime to `p`.
///
/// With `k = ord_p(L)`, `V(c/L)` is the digit sum of `c * (p^k - 1)/L` over
/// `k(p-1)`. The multiplier is computed once; each evaluation is a word-by-limb
/// multiply folded through popcount. When `L = p^k - 1` itself the multiplier is
/// one and the digit sum is taken on `c` directly.
#[derive(Clone, Debug)]
pub struct Lattice {
    p: u32,
    modulus: u64,
    order: u32,
    mult: Vec<u64>,
    mult_big: BigUint,
    unit: bool,
}

/// Orders above this are rejected; the multiplier would not fit in memory
/// bandwidth for a useful sweep anyway.
pub const MAX_LATTICE_ORDER: u32 = 1 << 16;

impl Lattice {
    pub fn new(p: u32, modulus: u64) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::ZeroDenominator);
        }
        if modulus.is_multiple_of(p as u64) && modulus != 1 {
            return Err(Error::DenominatorNotCoprime {
                den: modulus.to_string(),
                p,
            });
        }
        let order = mult_order_bounded(p as u64, modulus, MAX_LATTICE_ORDER)?.ok_or(
            Error::Overflow("multiplicative order exceeds lattice limit"),
        )?;
        let full = BigUint::from(p).pow(order) - BigUint::one();
        let mult_big = full / BigUint::from(modulus);
        let mult: Vec<u64> = mult_big.iter_u64_digits().collect();
        let unit = mult_big.is_one();
        Ok(Self {
            p,
            modulus,
            order,
            mult,
            mult_big,
            unit,
        })
    }

    /// The lattice `(1/(p^k - 1))Z/Z` itself.
    pub fn full(p: u32, k: u32) -> Result<Self> {
        let m = (p as u128)
            .checked_pow(k)
            .filter(|v| *v <= u64::MAX as u128 + 1)
            .ok_or(Error::Overflow("p^k - 1 does not fit a word"))?;
        Self::new(p, (m - 1) as u64)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Denominator of every V value on this lattice: `k(p-1)`.
    pub fn weight(&self) -> u64 {
        self.order as u64 * (self.p as u64 - 1)
    }

    /// Digit sum representing `V(c/L) * weight`. `c` must be reduced mod `L`.
    #[inline]
    pub fn digit_sum(&self, c: u64) -> u64 {
        debug_assert!(c < self.modulus || self.modulus == 1);
        if self.unit {
            digit_sum_u64(self.p, c)
        } else if self.p == 2 {
            popcount_scaled(c, &self.mult)
        } else {
            digit_sum(self.p, &(&self.mult_big * BigUint::from(c)))
        }
    }

    pub fn v(&self, c: u64) -> VValue {
        VValue::new(self.digit_sum(c % self.modulus), self.weight())
    }

    /// `-c mod L`.
    #[inline]
    pub fn neg(&self, c: u64) -> u64 {
        if c == 0 {
            0
        } else {
            self.modulus - c
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_digit_sums() {
        assert_eq!(digit_sum(2, &BigUint::from(8u32)), 1);
        assert_eq!(digit_sum(2, &BigUint::from(15u32)), 4);
        assert_eq!(digit_sum(2, &BigUint::zero()), 0);
        assert_eq!(digit_sum(3, &BigUint::from(26u32)), 6); // 222_3
        assert_eq!(digit_sum(10, &BigUint::from(9_876_543_210u64)), 45);
    }

    #[test]
    fn all_ones_word_of_336_bits() {
        let n = (BigUint::one() << 336u32) - BigUint::one();
        assert_eq!(digit_sum(2, &n), 336);
    }

    #[test]
    fn base_three_multi_chunk() {
        // 3^100 - 1 is a hundred digits "2" in base 3.
        let n = BigUint::from(3u32).pow(100) - BigUint::one();
        assert_eq!(digit_sum(3, &n), 200);
    }

    #[test]
    fn lattice_matches_formula() {
        let lat = Lattice::new(2, 15).unwrap();
        assert_eq!(lat.order(), 4);
        assert!(lat.unit);
        assert_eq!(lat.v(8), VValue::new(1, 4));
        let lat = Lattice::new(2, 5).unwrap();
        assert_eq!(lat.v(1), VValue::new(1, 2));
        assert_eq!(lat.v(0), VValue::new(0, 1));
    }

    #[test]
    fn wide_multiplier_popcount() {
        let l = 257u64 * 129 * 65 * 17;
        let lat = Lattice::new(2, l).unwrap();
        assert_eq!(lat.order(), 336);
        for c in [1u64, 2, 12345, l - 1] {
            let direct = digit_sum(2, &(&lat.mult_big * BigUint::from(c)));
            assert_eq!(lat.digit_sum(c), direct);
        }
    }

    #[test]
    fn rejects_multiple_of_p() {
        assert!(Lattice::new(2, 6).is_err());
        assert!(Lattice::new(3, 6).is_err());
    }
}

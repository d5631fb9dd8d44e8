//! Explicit constructions used in the two-factor step of the induction.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::charset::two_part;
use crate::error::{Error, Result};
use crate::qz::{v_eval, QzOf, VValue};

/// `x(i1, i2) = i1/(2^{a1}+1) + i2/(2^{a2}+1)` with its V value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InductionWitness {
    /// Exponents after ordering so that the first has the larger 2-part.
    pub a1: u32,
    pub a2: u32,
    #[serde(serialize_with = "ser_big")]
    pub i1: BigUint,
    #[serde(serialize_with = "ser_big")]
    pub i2: BigUint,
    pub x: QzOf<BigUint>,
    pub v: VValue,
}

fn ser_big<S: serde::Serializer>(b: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&b.to_string())
}

fn pow2(e: u32) -> BigUint {
    BigUint::one() << e
}

/// Builds `i1, i2` from the 2-parts `b1 > b2`:
///
/// ```text
/// i1 = (2^{a1}+1)/(2^{b1}+1) * (2^{b1/2}-1)(2^{b1/4}-1)...(2^{b2}-1)
/// i2 = (2^{a2}+1)/(2^{b2}+1)
/// ```
pub fn induction_witness(a1: u32, a2: u32) -> Result<InductionWitness> {
    if a1 == 0 || a2 == 0 {
        return Err(Error::Invalid("exponents must be positive".into()));
    }
    let (mut a1, mut a2) = (a1, a2);
    let (mut b1, mut b2) = (two_part(a1 as u64) as u32, two_part(a2 as u64) as u32);
    if b1 == b2 {
        return Err(Error::NotCoprime {
            p: format!("2^{a1}+1"),
            m: format!("2^{a2}+1"),
        });
    }
    if b1 < b2 {
        std::mem::swap(&mut a1, &mut a2);
        std::mem::swap(&mut b1, &mut b2);
    }
    let m1 = pow2(a1) + 1u32;
    let m2 = pow2(a2) + 1u32;
    let mut i1 = &m1 / (pow2(b1) + 1u32);
    let mut c = b1 / 2;
    while c >= b2 {
        i1 *= pow2(c) - 1u32;
        c /= 2;
    }
    let i2 = &m2 / (pow2(b2) + 1u32);
    debug_assert!(!i1.is_multiple_of(&m1) && !i2.is_multiple_of(&m2));
    let num = &i1 * &m2 + &i2 * &m1;
    let x = QzOf::new(num, &m1 * &m2, 2)?;
    let v = v_eval(2, &x);
    Ok(InductionWitness {
        a1,
        a2,
        i1,
        i2,
        x,
        v,
    })
}

/// The number `B` and the binary shape of `(2^{b2}-1) B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitPattern {
    pub b: BigUint,
    pub product: BigUint,
    pub ones: u64,
    pub fits: bool,
}

/// `B = (2^{b1}-1)(2^{b1/2}-1)...(2^{2b2}-1) + (2^{b1}+1)(2^{b1/2}+1)...(2^{2b2}+1)`.
pub fn digit_pattern(b1: u32, b2: u32) -> Option<DigitPattern> {
    if !(b1 > b2 && b2 > 0 && b1.is_power_of_two() && b2.is_power_of_two()) {
        return None;
    }
    let (mut minus, mut plus) = (BigUint::one(), BigUint::one());
    let mut c = b1;
    while c >= 2 * b2 {
        minus *= pow2(c) - 1u32;
        plus *= pow2(c) + 1u32;
        c /= 2;
    }
    let b = minus + plus;
    let product = (pow2(b2) - 1u32) * &b;
    let ones = product
        .iter_u64_digits()
        .map(|w| w.count_ones() as u64)
        .sum();
    let fits = product < pow2(2 * b1) - 1u32 && !product.is_zero();
    Some(DigitPattern {
        b,
        product,
        ones,
        fits,
    })
}

/// Whether `(2^{b2}-1) B` has exactly `b1/2` one bits and is below `2^{2 b1} - 1`.
pub fn digit_pattern_check(b1: u32, b2: u32) -> bool {
    digit_pattern(b1, b2).is_some_and(|d| d.fits && d.ones == (b1 / 2) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vtest::collapsed::{v_collapsed, CollapsedProfile};
    use num_rational::BigRational;

    #[test]
    fn small_witnesses() {
        let w = induction_witness(2, 1).unwrap();
        assert_eq!(
            (w.i1.clone(), w.i2.clone()),
            (BigUint::from(1u32), BigUint::from(1u32))
        );
        assert_eq!(w.x.to_string(), "8/15");
        assert_eq!(w.v, VValue::new(1, 4));
        let w = induction_witness(1, 4).unwrap();
        assert_eq!((w.a1, w.a2), (4, 1));
        assert_eq!(
            (w.i1.clone(), w.i2.clone()),
            (BigUint::from(3u32), BigUint::from(1u32))
        );
        assert_eq!(w.x.to_string(), "26/51");
        assert_eq!(w.v, VValue::new(1, 4));
        assert!(induction_witness(3, 1).is_err());
    }

    #[test]
    fn witness_value_is_not_minus_half() {
        let w = induction_witness(2, 1).unwrap();
        let prof = CollapsedProfile::new(vec![2, 1]).unwrap();
        assert_eq!(
            v_collapsed(&prof, &w.x),
            BigRational::new((-3).into(), 4.into())
        );
    }

    #[test]
    fn digit_patterns() {
        assert_eq!(digit_pattern(2, 1).unwrap().b, BigUint::from(8u32));
        assert_eq!(digit_pattern(4, 1).unwrap().b, BigUint::from(130u32));
        for (b1, b2) in [(2, 1), (4, 1), (4, 2), (8, 2), (8, 4), (16, 1)] {
            assert!(digit_pattern_check(b1, b2), "({b1},{b2})");
        }
        assert!(!digit_pattern_check(3, 1));
        assert!(!digit_pattern_check(1, 2));
    }
}

//! Lower bounds on `W/D` for listed sheaves, compared exactly against
//! numbers of the form `a - b sqrt(2)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::spec_json::ser_rational;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `r >= a - b sqrt(2)` for `b >= 0`.
pub fn ge_a_minus_b_sqrt2(r: &BigRational, a: &BigRational, b: &BigRational) -> bool {
    let gap = a - r;
    !gap.is_positive() || b * b * rat(2, 1) >= &gap * &gap
}

/// `r > a - b sqrt(2)` for `b >= 0`.
pub fn gt_a_minus_b_sqrt2(r: &BigRational, a: &BigRational, b: &BigRational) -> bool {
    let gap = a - r;
    if gap.is_negative() {
        return true;
    }
    if gap.is_zero() {
        return b.is_positive();
    }
    b * b * rat(2, 1) > &gap * &gap
}

/// Checks on one sheaf with wild part `W = D - M`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WildCheck {
    pub d: u128,
    pub w: u128,
    #[serde(serialize_with = "ser_rational")]
    pub ratio: BigRational,
    /// `W/D >= (2 - sqrt 2)/4`.
    pub general: bool,
    /// `W/D >= 7(2 - sqrt 2)/16`, present when `W` is even.
    pub even: Option<bool>,
    /// `W/D > ((2 - sqrt 2)/2)(1 - 1/W0)` with `W0` the odd part of `W`.
    pub odd_part: bool,
}

impl WildCheck {
    pub fn passed(&self) -> bool {
        self.general && self.even != Some(false) && self.odd_part
    }
}

pub fn wild_check(d: u128, m: u128) -> WildCheck {
    let w = d - m;
    let ratio = BigRational::new(BigInt::from(w), BigInt::from(d));
    let general = ge_a_minus_b_sqrt2(&ratio, &rat(1, 2), &rat(1, 4));
    let even = w
        .is_multiple_of(2)
        .then(|| ge_a_minus_b_sqrt2(&ratio, &rat(7, 8), &rat(7, 16)));
    let w0 = w >> w.trailing_zeros();
    let f = BigRational::one() - BigRational::new(BigInt::one(), BigInt::from(w0));
    let odd_part = gt_a_minus_b_sqrt2(&ratio, &f, &(&f / rat(2, 1)));
    WildCheck {
        d,
        w,
        ratio,
        general,
        even,
        odd_part,
    }
}

/// `(2 - sqrt 2)/4 > 0.146`.
pub fn general_bound_exceeds_0146() -> bool {
    !ge_a_minus_b_sqrt2(&rat(146, 1000), &rat(1, 2), &rat(1, 4))
}

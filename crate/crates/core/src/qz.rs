//! Exact arithmetic on `Q/Z` with denominators prime to `p`, and the Kubert
//! V-function.
//!
//! `V(a/(p^k - 1)) = s_p(a) / (k(p - 1))` where `s_p` is the base-`p` digit sum
//! and `0 <= a < p^k - 1`. Elements are stored reduced as `num/den`; the
//! `p^k - 1` form is produced only inside [`v_eval`].

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::digits::{digit_sum, Lattice, MAX_LATTICE_ORDER};
use crate::error::{Error, Result};
use crate::scalar::{is_prime, Scalar};

/// A class in `Q/Z`, `0 <= num < den`, `gcd(num, den) = 1`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct QzOf<T> {
    num: T,
    den: T,
}

impl<T: Scalar> QzOf<T> {
    pub fn zero() -> Self {
        Self {
            num: T::zero(),
            den: T::one(),
        }
    }

    /// Class of `num/den` for a nonnegative numerator, checked against `p`.
    pub fn new(num: T, den: T, p: u32) -> Result<Self> {
        let x = Self::reduce(num, den)?;
        check_coprime(&x.den, p)?;
        Ok(x)
    }

    /// Class of `a/m` for a signed numerator.
    pub fn from_signed(a: i64, m: T, p: u32) -> Result<Self> {
        if m.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let mag = T::from_u64(a.unsigned_abs()).ok_or(Error::Overflow("numerator"))?;
        let r = mag % m.clone();
        let r = if a < 0 && !r.is_zero() {
            m.clone() - r
        } else {
            r
        };
        Self::new(r, m, p)
    }

    /// Class of `a/m` for arbitrary-precision `a` and `m`.
    pub fn from_bigint(a: &BigInt, m: &BigUint, p: u32) -> Result<Self> {
        if m.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let mi = BigInt::from_biguint(Sign::Plus, m.clone());
        let r = a
            .mod_floor(&mi)
            .to_biguint()
            .expect("mod_floor is nonnegative");
        let num = T::from_biguint(&r).ok_or(Error::Overflow("numerator"))?;
        let den = T::from_biguint(m).ok_or(Error::Overflow("denominator"))?;
        Self::new(num, den, p)
    }

    fn reduce(num: T, den: T) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let num = num % den.clone();
        if num.is_zero() {
            return Ok(Self::zero());
        }
        let g = num.gcd(&den);
        Ok(Self {
            num: num / g.clone(),
            den: den / g,
        })
    }

    fn reduced_unchecked(num: T, den: T) -> Self {
        Self::reduce(num, den).expect("nonzero denominator")
    }

    pub fn num(&self) -> &T {
        &self.num
    }

    pub fn den(&self) -> &T {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Exact sum in `Q/Z`. Panics if the common denominator overflows `T`.
    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let g = self.den.gcd(&other.den);
        let l = (self.den.clone() / g)
            .checked_mul(&other.den)
            .expect("common denominator overflows the scalar type");
        let a = self.num.mul_mod(&(l.clone() / self.den.clone()), &l);
        let b = other.num.mul_mod(&(l.clone() / other.den.clone()), &l);
        Self::reduced_unchecked(a.add_mod(&b, &l), l)
    }

    pub fn neg(&self) -> Self {
        if self.is_zero() {
            self.clone()
        } else {
            Self {
                num: self.den.clone() - self.num.clone(),
                den: self.den.clone(),
            }
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// `n * x` for a signed word multiplier.
    pub fn scale(&self, n: i64) -> Self {
        let y = self.scale_by(&T::from_u64(n.unsigned_abs()).expect("word fits scalar"));
        if n < 0 {
            y.neg()
        } else {
            y
        }
    }

    /// `n * x` for a nonnegative multiplier of the scalar type.
    pub fn scale_by(&self, n: &T) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let n = n.clone() % self.den.clone();
        Self::reduced_unchecked(self.num.mul_mod(&n, &self.den), self.den.clone())
    }

    pub fn to_rational(&self) -> BigRational {
        Ratio::new(
            BigInt::from_biguint(Sign::Plus, self.num.to_biguint()),
            BigInt::from_biguint(Sign::Plus, self.den.to_biguint()),
        )
    }

    /// Re-express over another scalar type, if it fits.
    pub fn convert<U: Scalar>(&self) -> Option<QzOf<U>> {
        Some(QzOf {
            num: U::from_biguint(&self.num.to_biguint())?,
            den: U::from_biguint(&self.den.to_biguint())?,
        })
    }

    /// `[num, den]` as decimal strings.
    pub fn to_pair_strings(&self) -> (String, String) {
        (self.num.to_string(), self.den.to_string())
    }
}

impl<T: Scalar> Ord for QzOf<T> {
    /// Canonical order: by denominator, then numerator.
    fn cmp(&self, other: &Self) -> Ordering {
        self.den
            .cmp(&other.den)
            .then_with(|| self.num.cmp(&other.num))
    }
}

impl<T: Scalar> PartialOrd for QzOf<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> fmt::Display for QzOf<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            write!(f, "0")
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl<T: Scalar> Serialize for QzOf<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        crate::spec_json::serialize_pair(&self.num.to_biguint(), &self.den.to_biguint(), s)
    }
}

fn check_coprime<T: Scalar>(den: &T, p: u32) -> Result<()> {
    let pt = T::from_u32(p).ok_or(Error::Overflow("characteristic"))?;
    if !den.is_one() && den.gcd(&pt) != T::one() {
        return Err(Error::DenominatorNotCoprime {
            den: den.to_string(),
            p,
        });
    }
    Ok(())
}

/// Smallest `k >= 1` with `p^k = 1 (mod m)`.
pub fn mult_order<T: Scalar>(p: u32, m: &T) -> Result<u64> {
    if !is_prime(p) {
        return Err(Error::NotPrime { p });
    }
    if m.is_zero() {
        return Err(Error::ZeroDenominator);
    }
    if m.is_one() {
        return Ok(1);
    }
    let pt = T::from_u32(p).ok_or(Error::Overflow("characteristic"))?;
    if m.gcd(&pt) != T::one() {
        return Err(Error::NotCoprime {
            p: p.to_string(),
            m: m.to_string(),
        });
    }
    let base = pt % m.clone();
    let mut r = base.clone();
    let mut k = 1u64;
    while !r.is_one() {
        r = r.mul_mod(&base, m);
        k += 1;
    }
    Ok(k)
}

/// Word version of [`mult_order`] that gives up after `max` steps.
pub fn mult_order_bounded(p: u64, m: u64, max: u32) -> Result<Option<u32>> {
    if m == 0 {
        return Err(Error::ZeroDenominator);
    }
    if m == 1 {
        return Ok(Some(1));
    }
    if m.gcd(&p) != 1 {
        return Err(Error::NotCoprime {
            p: p.to_string(),
            m: m.to_string(),
        });
    }
    let base = p % m;
    let mut r = base;
    let mut k = 1u32;
    while r != 1 {
        if k >= max {
            return Ok(None);
        }
        r = crate::scalar::mulmod64(r, base, m);
        k += 1;
    }
    Ok(Some(k))
}

/// A value of the V-function: a reduced rational in `[0, 1)`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VValue(Ratio<u64>);

impl VValue {
    pub fn new(digit_sum: u64, weight: u64) -> Self {
        Self(Ratio::new(digit_sum, weight))
    }

    pub fn zero() -> Self {
        Self(Ratio::zero())
    }

    pub fn numer(&self) -> u64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> u64 {
        *self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn to_rational(&self) -> BigRational {
        Ratio::new(BigInt::from(self.numer()), BigInt::from(self.denom()))
    }
}

impl fmt::Display for VValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Serialize for VValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.numer(), self.denom()].serialize(s)
    }
}

impl<'de> Deserialize<'de> for VValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [n, m] = <[u64; 2]>::deserialize(d)?;
        if m == 0 || n >= m && n != 0 {
            return Err(serde::de::Error::custom("V value must lie in [0, 1)"));
        }
        Ok(Self::new(n, m))
    }
}

/// `V(x)` via the `p^k - 1` re-expansion of the denominator.
pub fn try_v_eval<T: Scalar>(p: u32, x: &QzOf<T>) -> Result<VValue> {
    if x.is_zero() {
        return Ok(VValue::zero());
    }
    let k = mult_order(p, x.den())?;
    let k32 = u32::try_from(k).map_err(|_| Error::Overflow("multiplicative order"))?;
    let full = BigUint::from(p).pow(k32) - BigUint::one();
    let a = x.num().to_biguint() * (full / x.den().to_biguint());
    Ok(VValue::new(digit_sum(p, &a), k * (p as u64 - 1)))
}

/// `V(x)`. Panics if `x` has a denominator divisible by `p` or `p` is not prime;
/// both are excluded by construction for values coming out of validated specs.
pub fn v_eval<T: Scalar>(p: u32, x: &QzOf<T>) -> VValue {
    try_v_eval(p, x).expect("V is defined on p'-torsion only")
}

/// `V(x)` by base-`p` long division of `num/den` over one period of the
/// expansion. Independent of the re-expansion route in [`v_eval`].
pub fn v_eval_long_division<T: Scalar>(p: u32, x: &QzOf<T>) -> Result<VValue> {
    if x.is_zero() {
        return Ok(VValue::zero());
    }
    check_coprime(x.den(), p)?;
    let num = x.num().to_biguint();
    let den = x.den().to_biguint();
    let pb = BigUint::from(p);
    let mut r = num.clone();
    let mut sum = 0u64;
    let mut period = 0u64;
    loop {
        r *= &pb;
        let (digit, rem) = r.div_rem(&den);
        sum += digit.to_u64().expect("digit < p");
        r = rem;
        period += 1;
        if r == num {
            break;
        }
    }
    Ok(VValue::new(sum, period * (p as u64 - 1)))
}

enum Plan {
    Word(Lattice),
    Wide { order: u64, mult: BigUint },
}

/// Evaluates V over many arguments, computing the per-denominator constants
/// (the order `k` and the multiplier `(p^k - 1)/den`) once per denominator.
/// Values are not memoized; every call redoes the digit sum.
pub struct VEvaluator<T> {
    p: u32,
    plans: HashMap<T, Plan>,
}

impl<T: Scalar> VEvaluator<T> {
    pub fn new(p: u32) -> Self {
        Self {
            p,
            plans: HashMap::new(),
        }
    }

    pub fn eval(&mut self, x: &QzOf<T>) -> VValue {
        if x.is_zero() {
            return VValue::zero();
        }
        let p = self.p;
        let plan = self.plans.entry(x.den().clone()).or_insert_with(|| {
            if let Some(l) = x.den().to_u64().and_then(|d| Lattice::new(p, d).ok()) {
                Plan::Word(l)
            } else {
                let order = mult_order(p, x.den()).expect("p'-denominator");
                let full = BigUint::from(p).pow(order as u32) - BigUint::one();
                Plan::Wide {
                    order,
                    mult: full / x.den().to_biguint(),
                }
            }
        });
        match plan {
            Plan::Word(l) => l.v(x.num().to_u64().expect("numerator below word denominator")),
            Plan::Wide { order, mult } => {
                let a = &*mult * x.num().to_biguint();
                VValue::new(digit_sum(p, &a), *order * (p as u64 - 1))
            }
        }
    }
}

/// Word-lattice order limit exported for callers that size sweeps.
pub const WORD_ORDER_LIMIT: u32 = MAX_LATTICE_ORDER;

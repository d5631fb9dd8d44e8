//! JSON form of hypergeometric data.
//!
//! ```json
//! {"p":2,"upstairs":{"product":[{"char_minus_one":5},{"char_minus_one":3}]},
//!  "downstairs":{"chars":[[0,1]]},"twist":[0,1]}
//! ```
//!
//! Rationals are `[num, den]` pairs. A `product` whose factors are all
//! `char_minus_one` of pairwise coprime moduli `2^a + 1` stays symbolic;
//! anything else is expanded into explicit characters.

use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize, Serializer};

use crate::charset::{CharSetOf, DownstairsShape, HypSpecOf, ProductProfile, Upstairs};
use crate::error::{Error, Result};
use crate::qz::QzOf;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SetExpr {
    Chars(Vec<(i64, u64)>),
    Char(u64),
    CharMinusOne(u64),
    Product(Vec<SetExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecJson {
    pub p: u32,
    pub upstairs: SetExpr,
    pub downstairs: SetExpr,
    #[serde(default = "zero_pair")]
    pub twist: (i64, u64),
}

fn zero_pair() -> (i64, u64) {
    (0, 1)
}

impl SetExpr {
    pub fn evaluate<T: Scalar>(&self, p: u32) -> Result<CharSetOf<T>> {
        let scalar = |n: u64| T::from_u64(n).ok_or(Error::Overflow("denominator"));
        match self {
            SetExpr::Chars(v) => CharSetOf::from_elems(
                v.iter()
                    .map(|&(a, m)| QzOf::from_signed(a, scalar(m)?, p))
                    .collect::<Result<Vec<_>>>()?,
            ),
            SetExpr::Char(n) => CharSetOf::full(&scalar(*n)?, p),
            SetExpr::CharMinusOne(n) => CharSetOf::full_minus_trivial(&scalar(*n)?, p),
            SetExpr::Product(fs) => {
                let mut acc = CharSetOf::full(&T::one(), p)?;
                for f in fs {
                    acc = acc.product(&f.evaluate(p)?)?;
                }
                Ok(acc)
            }
        }
    }

    /// The symbolic profile, when this is a product of `Char(2^a+1) \ {1}`.
    fn as_profile(&self, p: u32) -> Option<Result<ProductProfile>> {
        let SetExpr::Product(fs) = self else {
            return None;
        };
        if p != 2 || fs.is_empty() {
            return None;
        }
        let mut a = Vec::new();
        for f in fs {
            match f {
                SetExpr::CharMinusOne(m) if *m > 2 && (m - 1).is_power_of_two() => {
                    a.push((m - 1).trailing_zeros())
                }
                _ => return None,
            }
        }
        Some(ProductProfile::new(a))
    }
}

impl SpecJson {
    pub fn to_spec<T: Scalar>(&self) -> Result<HypSpecOf<T>> {
        let up = match self.upstairs.as_profile(self.p) {
            Some(prof) => Upstairs::Product(prof?),
            None => Upstairs::Explicit(self.upstairs.evaluate(self.p)?),
        };
        let down = self.downstairs.evaluate(self.p)?;
        let den = T::from_u64(self.twist.1).ok_or(Error::Overflow("denominator"))?;
        let twist = QzOf::from_signed(self.twist.0, den, self.p)?;
        HypSpecOf::with_twist(self.p, up, down, twist)
    }

    /// Canonical form of a validated spec.
    pub fn from_spec<T: Scalar>(spec: &HypSpecOf<T>) -> Result<Self> {
        let pair = |x: &QzOf<T>| -> Result<(i64, u64)> {
            let n = x.num().to_i64().ok_or(Error::Overflow("numerator"))?;
            let d = x.den().to_u64().ok_or(Error::Overflow("denominator"))?;
            Ok((n, d))
        };
        let chars = |s: &CharSetOf<T>| -> Result<SetExpr> {
            Ok(SetExpr::Chars(s.iter().map(pair).collect::<Result<_>>()?))
        };
        let upstairs = match spec.upstairs() {
            Upstairs::Product(prof) if prof.t() == 1 => SetExpr::CharMinusOne(prof.moduli()[0]),
            Upstairs::Product(prof) => SetExpr::Product(
                prof.moduli()
                    .into_iter()
                    .map(SetExpr::CharMinusOne)
                    .collect(),
            ),
            Upstairs::Explicit(s) => chars(s)?,
        };
        let downstairs = match spec.downstairs().shape() {
            DownstairsShape::Full(b) => SetExpr::Char(b),
            DownstairsShape::FullMinusTrivial(b) => SetExpr::CharMinusOne(b),
            DownstairsShape::Empty | DownstairsShape::Other => chars(spec.downstairs())?,
        };
        Ok(Self {
            p: spec.p(),
            upstairs,
            downstairs,
            twist: pair(spec.twist())?,
        })
    }
}

pub fn parse_spec<T: Scalar>(json: &str) -> Result<HypSpecOf<T>> {
    serde_json::from_str::<SpecJson>(json)?.to_spec()
}

/// Compact canonical JSON; equal specs give identical bytes.
pub fn canonical_json<T: Scalar>(spec: &HypSpecOf<T>) -> Result<String> {
    Ok(serde_json::to_string(&SpecJson::from_spec(spec)?)?)
}

/// Writes `[num, den]`, using strings for values beyond 64 bits.
pub(crate) fn serialize_pair<S: Serializer>(
    num: &BigUint,
    den: &BigUint,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    for v in [num, den] {
        match v.to_u64() {
            Some(w) => t.serialize_element(&w)?,
            None => t.serialize_element(&v.to_string())?,
        }
    }
    t.end()
}

/// `serialize_with` helper writing a rational as `[num, den]`.
pub fn ser_rational<S: Serializer>(
    r: &num_rational::BigRational,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    serialize_signed_pair(r.numer(), r.denom(), s)
}

fn serialize_signed_pair<S: Serializer>(
    num: &BigInt,
    den: &BigInt,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    match num.to_i64() {
        Some(w) => t.serialize_element(&w)?,
        None => t.serialize_element(&num.to_string())?,
    }
    match den.to_u64() {
        Some(w) => t.serialize_element(&w)?,
        None => t.serialize_element(&den.to_string())?,
    }
    t.end()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_round_trip() {
        let src = r#"{"p":2,"upstairs":{"product":[{"char_minus_one":5},{"char_minus_one":3}]},"downstairs":{"chars":[[0,1]]},"twist":[0,1]}"#;
        let spec = parse_spec::<u64>(src).unwrap();
        assert_eq!(spec.d(), 8);
        assert_eq!(spec.profile().unwrap().exponents(), &[2, 1]);
        let canon = canonical_json(&spec).unwrap();
        assert_eq!(
            canon,
            r#"{"p":2,"upstairs":{"product":[{"char_minus_one":5},{"char_minus_one":3}]},"downstairs":{"char":1},"twist":[0,1]}"#
        );
        assert_eq!(
            canonical_json(&parse_spec::<u64>(&canon).unwrap()).unwrap(),
            canon
        );
    }

    #[test]
    fn explicit_sets_are_sorted_and_reduced() {
        let src = r#"{"p":2,"upstairs":{"chars":[[4,6],[1,7],[-1,7]]},"downstairs":{"chars":[]}}"#;
        let spec = parse_spec::<u64>(src).unwrap();
        assert_eq!(
            canonical_json(&spec).unwrap(),
            r#"{"p":2,"upstairs":{"chars":[[2,3],[1,7],[6,7]]},"downstairs":{"chars":[]},"twist":[0,1]}"#
        );
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_spec::<u64>(
            r#"{"p":2,"upstairs":{"chars":[[1,2]]},"downstairs":{"chars":[]}}"#
        )
        .is_err());
        assert!(parse_spec::<u64>(
            r#"{"p":2,"upstairs":{"char_minus_one":3},"downstairs":{"char_minus_one":3}}"#
        )
        .is_err());
        assert!(parse_spec::<u64>(
            r#"{"p":2,"upstairs":{"chars":[]},"downstairs":{"chars":[]},"extra":1}"#
        )
        .is_err());
        assert!(parse_spec::<u64>("not json").is_err());
    }
}

//! Pointwise evaluation of the V-test.
//!
//! For `Hyp(x0 + {a_i}; x0 + {b_j})` and a point `(N, x)`:
//!
//! ```text
//! up(N, x)   = sum_i V(N(a_i + x0) + x) - D/2
//! down(N, x) = sum_j V(-N(b_j + x0) - x) - M/2
//! ```
//!
//! and the test asks `up + down + 1/2 >= 0`. The naive sums here evaluate
//! every term; all arguments of one side share the denominator
//! `lcm(characters, twist, x)`, so each side is one digit-sum kernel applied
//! term by term with no caching.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::charset::{DownstairsShape, HypSpecOf, Upstairs};
use crate::digits::{digit_sum, Lattice};
use crate::error::Result;
use crate::qz::{mult_order, v_eval, QzOf, VEvaluator};
use crate::scalar::{mulmod64, Scalar};

/// A point `(N, x)` of the V-test.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct VTestPoint<T> {
    pub n: u64,
    pub x: QzOf<T>,
}

impl<T: Scalar> VTestPoint<T> {
    pub fn new(n: u64, x: QzOf<T>) -> Self {
        Self { n, x }
    }
}

impl<T: Scalar> Serialize for VTestPoint<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("VTestPoint", 2)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("x", &self.x)?;
        st.end()
    }
}

pub(crate) fn half(k: u128) -> BigRational {
    BigRational::new(BigInt::from(k), BigInt::from(2))
}

/// `(D + M - 1) / 2`.
pub fn threshold<T: Scalar>(spec: &HypSpecOf<T>) -> BigRational {
    half(spec.d() + spec.m() - 1)
}

fn scaled<T: Scalar>(q: &QzOf<T>, lw: &BigUint) -> BigUint {
    q.num().to_biguint() * (lw / q.den().to_biguint())
}

/// The digit-sum kernel for one common denominator.
enum Frame {
    Word(Lattice),
    Wide { p: u32, order: u64, mult: BigUint },
}

impl Frame {
    fn new(p: u32, lw: &BigUint) -> Self {
        if let Some(l) = lw.to_u64().and_then(|w| Lattice::new(p, w).ok()) {
            return Frame::Word(l);
        }
        let order = mult_order(p, lw).expect("p'-denominator");
        let full = BigUint::from(p).pow(order as u32) - BigUint::one();
        Frame::Wide {
            p,
            order,
            mult: full / lw,
        }
    }

    fn weight(&self) -> u64 {
        match self {
            Frame::Word(l) => l.weight(),
            Frame::Wide { p, order, .. } => order * (*p as u64 - 1),
        }
    }
}

/// `sum V(sign * (N s + x + N x0))` over the untwisted set `s` of one side,
/// as an exact rational.
fn side_sum<T: Scalar>(spec: &HypSpecOf<T>, upstairs: bool, n: u64, x: &QzOf<T>) -> BigRational {
    let count = if upstairs { spec.d() } else { spec.m() };
    if count == 0 {
        return BigRational::zero();
    }
    let lw = spec
        .character_modulus()
        .lcm(&spec.twist().den().to_biguint())
        .lcm(&x.den().to_biguint());
    let frame = Frame::new(spec.p(), &lw);
    let nb = BigUint::from(n);
    let shift = (&nb * scaled(spec.twist(), &lw) + scaled(x, &lw)) % &lw;
    let explicit = match (upstairs, spec.upstairs()) {
        (true, Upstairs::Explicit(s)) => Some(s.elems()),
        (true, Upstairs::Product(_)) => None,
        (false, _) => Some(spec.downstairs().elems()),
    };
    let total: u128 = match &frame {
        Frame::Word(lat) => {
            let l = lat.modulus();
            let nw = n % l;
            let sw = shift.to_u64().expect("below word modulus");
            let term = |s: u64| {
                let c = mulmod64(nw, s, l).add_mod(&sw, &l);
                let c = if upstairs { c } else { lat.neg(c) };
                lat.digit_sum(c) as u128
            };
            match explicit {
                Some(elems) => elems
                    .par_iter()
                    .map(|q| term(scaled(q, &lw).to_u64().expect("below word modulus")))
                    .sum(),
                None => {
                    let prof = spec.profile().expect("product upstairs");
                    let gens: Vec<(u64, u64)> = prof
                        .exponents()
                        .iter()
                        .rev()
                        .map(|&a| (a, l / ((1u64 << a) + 1)))
                        .map(|(a, g)| (a as u64, g))
                        .collect();
                    (0..prof.size() as u64)
                        .into_par_iter()
                        .map(|mut idx| {
                            let mut s = 0u64;
                            for &(a, g) in &gens {
                                let j = (idx & ((1u64 << a) - 1)) + 1;
                                idx >>= a;
                                s = s.add_mod(&mulmod64(j, g, l), &l);
                            }
                            term(s)
                        })
                        .sum()
                }
            }
        }
        Frame::Wide { p, mult, .. } => {
            let term = |s: BigUint| {
                let c = (&nb * s + &shift) % &lw;
                let c = if upstairs || c.is_zero() { c } else { &lw - c };
                digit_sum(*p, &(c * mult)) as u128
            };
            match explicit {
                Some(elems) => elems.par_iter().map(|q| term(scaled(q, &lw))).sum(),
                None => {
                    let prof = spec.profile().expect("product upstairs");
                    let lp = prof.modulus();
                    let scale = &lw / &lp;
                    (0..prof.size())
                        .into_par_iter()
                        .map(|idx| term(prof.element_numerator(idx) * &scale))
                        .sum()
                }
            }
        }
    };
    BigRational::new(BigInt::from(total), BigInt::from(frame.weight()))
}

/// `sum_i V(N a_i + x) - D/2` over the twisted upstairs set, term by term.
pub fn v_up_naive<T: Scalar>(spec: &HypSpecOf<T>, pt: &VTestPoint<T>) -> BigRational {
    side_sum(spec, true, pt.n, &pt.x) - half(spec.d())
}

/// `sum_j V(-N b_j - x) - M/2` over the twisted downstairs set, term by term.
pub fn v_down_naive<T: Scalar>(spec: &HypSpecOf<T>, pt: &VTestPoint<T>) -> BigRational {
    side_sum(spec, false, pt.n, &pt.x) - half(spec.m())
}

/// The twisted argument `y = x + N x0`.
pub fn untwisted_argument<T: Scalar>(spec: &HypSpecOf<T>, pt: &VTestPoint<T>) -> QzOf<T> {
    let n = T::from_u64(pt.n).expect("word fits scalar");
    pt.x.add(&spec.twist().scale_by(&n))
}

/// Downstairs part, by closed form when the downstairs set is `{}`, `Char(B)`
/// or `Char(B) \ {1}` and `N` is prime to `B`; otherwise the naive sum.
pub fn v_down<T: Scalar>(spec: &HypSpecOf<T>, pt: &VTestPoint<T>) -> BigRational {
    let p = spec.p();
    let y = untwisted_argument(spec, pt);
    let v = |q: &QzOf<T>| v_eval(p, q).to_rational();
    let by = |b: u64| y.scale_by(&T::from_u64(b).expect("word fits scalar")).neg();
    match spec.downstairs().shape() {
        DownstairsShape::Empty => BigRational::zero(),
        DownstairsShape::Full(b) if pt.n.gcd(&b) == 1 => v(&by(b)) - half(1),
        DownstairsShape::FullMinusTrivial(b) if pt.n.gcd(&b) == 1 => v(&by(b)) - v(&y.neg()),
        _ => v_down_naive(spec, pt),
    }
}

/// `sum_i V(N a_i + x) + sum_j V(-N b_j - x)`.
pub fn vtest_lhs<T: Scalar>(spec: &HypSpecOf<T>, pt: &VTestPoint<T>) -> BigRational {
    side_sum(spec, true, pt.n, &pt.x) + side_sum(spec, false, pt.n, &pt.x)
}

/// `lhs - (D + M - 1)/2`; the test holds at the point iff this is `>= 0`.
pub fn vtest_slack<T: Scalar>(spec: &HypSpecOf<T>, pt: &VTestPoint<T>) -> BigRational {
    vtest_lhs(spec, pt) - threshold(spec)
}

pub fn vtest_holds<T: Scalar>(spec: &HypSpecOf<T>, pt: &VTestPoint<T>) -> bool {
    !vtest_slack(spec, pt).is_negative()
}

use num_traits::Signed;

/// `(1/D) sum_{i,j} V(N a_i - N b_j)`. The twist cancels in the differences.
pub fn katz_cross_term<T: Scalar>(spec: &HypSpecOf<T>, n: u64) -> Result<BigRational> {
    if spec.m() == 0 {
        return Ok(BigRational::zero());
    }
    let up = spec.upstairs_set()?;
    let down = spec.downstairs_set();
    let nt = T::from_u64(n).expect("word fits scalar");
    let mut ev = VEvaluator::<T>::new(spec.p());
    let mut num = 0u128;
    let mut lcm = 1u64;
    let mut parts = Vec::new();
    for a in up.iter() {
        for b in down.iter() {
            let v = ev.eval(&a.sub(b).scale_by(&nt));
            parts.push(v);
            lcm = lcm.lcm(&v.denom());
        }
    }
    for v in parts {
        num += (v.numer() * (lcm / v.denom())) as u128;
    }
    Ok(BigRational::new(
        BigInt::from(num),
        BigInt::from(lcm) * BigInt::from(spec.d()),
    ))
}

/// Left side of Katz's original form:
/// `sum V(N a_i + x) + sum V(-N b_j - x) - (1/D) sum_{i,j} V(N a_i - N b_j)`,
/// to be compared with `(D - 1)/2`.
pub fn katz_original_lhs<T: Scalar>(
    spec: &HypSpecOf<T>,
    pt: &VTestPoint<T>,
) -> Result<BigRational> {
    Ok(vtest_lhs(spec, pt) - katz_cross_term(spec, pt.n)?)
}

pub fn katz_original_holds<T: Scalar>(spec: &HypSpecOf<T>, pt: &VTestPoint<T>) -> Result<bool> {
    Ok(katz_original_lhs(spec, pt)? >= half(spec.d() - 1))
}

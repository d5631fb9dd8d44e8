//! `V(2; r_1, ..., r_t; x)`: the upstairs part of a full product sheaf
//! rewritten through Hasse-Davenport as a `2^t`-term signed sum,
//!
//! ```text
//! V(2; r; x) = sum_{S subset of 1..t} (-1)^{t-|S|} V(prod_{j in S} (2^{r_j}+1) x).
//! ```

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

pub use crate::charset::ProductProfile as CollapsedProfile;
use crate::qz::{v_eval, QzOf};
use crate::scalar::Scalar;

/// Evaluates the signed subset sum in characteristic 2.
pub fn v_collapsed<T: Scalar>(profile: &CollapsedProfile, x: &QzOf<T>) -> BigRational {
    let moduli = profile.moduli();
    let t = moduli.len();
    let mut total = BigRational::zero();
    for mask in 0u32..(1 << t) {
        let mut y = x.clone();
        for (j, &m) in moduli.iter().enumerate() {
            if mask >> j & 1 == 1 {
                y = y.scale_by(&T::from_u64(m).expect("modulus fits scalar"));
            }
        }
        let v = v_eval(2, &y);
        let term = BigRational::new(BigInt::from(v.numer()), BigInt::from(v.denom()));
        if (t - mask.count_ones() as usize).is_multiple_of(2) {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

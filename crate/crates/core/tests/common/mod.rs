//! Reference computations written without the library's digit kernels.
#![allow(dead_code)]

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `V(num/den)` in characteristic 2: find `k` with `den | 2^k - 1`, expand the
/// numerator over `2^k - 1` and count one bits in its binary string.
pub fn v(num: &BigInt, den: &BigUint) -> BigRational {
    assert!(den.is_odd(), "even denominator");
    let d = BigInt::from_biguint(Sign::Plus, den.clone());
    let a = num.mod_floor(&d).to_biguint().unwrap();
    if a.is_zero() {
        return BigRational::zero();
    }
    if let Some(dw) = den.to_u64() {
        // 2^k mod den, walked one step at a time.
        let (mut r, mut k) = (2u128 % dw as u128, 1u32);
        while r != 1 {
            r = r * 2 % dw as u128;
            k += 1;
        }
        if k <= 120 {
            let full = (1u128 << k) - 1;
            let c = a.to_u128().unwrap() * (full / dw as u128);
            return rat(c.count_ones() as i64, k as i64);
        }
        return wide(&a, den, k);
    }
    let mut r = BigUint::from(2u32) % den;
    let mut k = 1u32;
    while !r.is_one() {
        r = (r << 1u32) % den;
        k += 1;
    }
    wide(&a, den, k)
}

fn wide(a: &BigUint, den: &BigUint, k: u32) -> BigRational {
    let full = (BigUint::one() << k) - 1u32;
    let c = a * (full / den);
    let ones = c.to_str_radix(2).bytes().filter(|&b| b == b'1').count();
    rat(ones as i64, k as i64)
}

pub fn v64(num: i64, den: u64) -> BigRational {
    v(&BigInt::from(num), &BigUint::from(den))
}

/// `sum_S (-1)^{t-|S|} V(prod_{j in S} (2^{a_j}+1) x)`.
pub fn collapsed(a: &[u32], num: &BigInt, den: &BigUint) -> BigRational {
    let t = a.len();
    let mut total = BigRational::zero();
    for mask in 0u32..(1 << t) {
        let mut m = BigInt::one();
        for (j, &aj) in a.iter().enumerate() {
            if mask >> j & 1 == 1 {
                m *= (BigInt::one() << aj) + 1;
            }
        }
        let term = v(&(num * m), den);
        if (t as u32 - mask.count_ones()).is_multiple_of(2) {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

/// `sum_i V(a_i + x) - D/2` over the full product set, term by term.
pub fn up_direct(a: &[u32], num: i64, den: u64) -> BigRational {
    let moduli: Vec<u64> = a.iter().map(|&e| (1u64 << e) + 1).collect();
    let l = moduli.iter().product::<u64>().lcm(&den);
    let mut total = BigRational::zero();
    let mut idx = vec![1u64; moduli.len()];
    loop {
        let mut c = num.rem_euclid(den as i64) as u64 * (l / den);
        for (i, m) in idx.iter().zip(&moduli) {
            c += i * (l / m);
        }
        total += v64((c % l) as i64, l);
        let mut j = 0;
        loop {
            if j == idx.len() {
                let d: u64 = moduli.iter().map(|m| m - 1).product();
                return total - rat(d as i64, 2);
            }
            idx[j] += 1;
            if idx[j] < moduli[j] {
                break;
            }
            idx[j] = 1;
            j += 1;
        }
    }
}

//! Multiplicative characters as exponents in `Q/Z`, and hypergeometric data.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::qz::QzOf;
use crate::scalar::{is_prime, Scalar};

/// A finite set of distinct characters, sorted by `(den, num)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct CharSetOf<T> {
    elems: Vec<QzOf<T>>,
}

impl<T: Scalar> CharSetOf<T> {
    pub fn empty() -> Self {
        Self { elems: Vec::new() }
    }

    /// Builds a set, rejecting repeated characters.
    pub fn from_elems(elems: impl IntoIterator<Item = QzOf<T>>) -> Result<Self> {
        let mut v: Vec<QzOf<T>> = elems.into_iter().collect();
        v.sort();
        if let Some(w) = v.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateCharacter(w[0].to_string()));
        }
        Ok(Self { elems: v })
    }

    /// `Char(n) = {i/n : 0 <= i < n}`.
    pub fn full(n: &T, p: u32) -> Result<Self> {
        if n.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let pt = T::from_u32(p).ok_or(Error::Overflow("characteristic"))?;
        if !n.is_one() && n.gcd(&pt) != T::one() {
            return Err(Error::DenominatorNotCoprime {
                den: n.to_string(),
                p,
            });
        }
        let mut v = Vec::new();
        let mut i = T::zero();
        while i < *n {
            v.push(QzOf::new(i.clone(), n.clone(), p)?);
            i = i + T::one();
        }
        Self::from_elems(v)
    }

    /// `Char(n) \ {1}`: the nontrivial characters of order dividing `n`.
    pub fn full_minus_trivial(n: &T, p: u32) -> Result<Self> {
        let mut s = Self::full(n, p)?;
        s.elems.retain(|x| !x.is_zero());
        Ok(s)
    }

    /// All sums `a + b`; errors if two pairs give the same class.
    pub fn product(&self, other: &Self) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for a in &self.elems {
            for b in &other.elems {
                let s = a.add(b);
                if !seen.insert(s.clone()) {
                    return Err(Error::ProductCollision(s.to_string()));
                }
            }
        }
        Ok(Self {
            elems: seen.into_iter().collect(),
        })
    }

    /// Kummer twist: shift every character by `x0`.
    pub fn twist(&self, x0: &QzOf<T>) -> Self {
        let mut v: Vec<QzOf<T>> = self.elems.iter().map(|x| x.add(x0)).collect();
        v.sort();
        Self { elems: v }
    }

    pub fn negate(&self) -> Self {
        let mut v: Vec<QzOf<T>> = self.elems.iter().map(QzOf::neg).collect();
        v.sort();
        Self { elems: v }
    }

    pub fn contains(&self, x: &QzOf<T>) -> bool {
        self.elems.binary_search(x).is_ok()
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, QzOf<T>> {
        self.elems.iter()
    }

    pub fn elems(&self) -> &[QzOf<T>] {
        &self.elems
    }

    /// Least common multiple of the denominators (1 for the empty set).
    pub fn lcm_denominator(&self) -> T {
        self.elems.iter().fold(T::one(), |acc, x| acc.lcm(x.den()))
    }

    /// Recognizes `Char(B)` and `Char(B) \ {1}`.
    pub fn shape(&self) -> DownstairsShape {
        if self.is_empty() {
            return DownstairsShape::Empty;
        }
        let b = self.lcm_denominator();
        let Some(bw) = b.to_u64() else {
            return DownstairsShape::Other;
        };
        let has_zero = self.elems[0].is_zero();
        match (self.elems.len() as u64, has_zero) {
            (n, true) if n == bw => DownstairsShape::Full(bw),
            (n, false) if n + 1 == bw => DownstairsShape::FullMinusTrivial(bw),
            _ => DownstairsShape::Other,
        }
    }
}

impl<T: Scalar> fmt::Display for CharSetOf<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.elems.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

/// Downstairs sets with a closed-form V sum.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DownstairsShape {
    Empty,
    /// `Char(B)`; `B = 1` is the trivial character alone.
    Full(u64),
    /// `Char(B) \ {1}` with `B > 1`.
    FullMinusTrivial(u64),
    Other,
}

/// Largest power of two dividing `a`.
pub fn two_part(a: u64) -> u64 {
    assert!(a > 0, "two_part of zero");
    1 << a.trailing_zeros()
}

/// The set `(Char(2^{a_1}+1) \ {1}) x ... x (Char(2^{a_t}+1) \ {1})`, kept
/// symbolic. Exponents are stored in descending order and have pairwise
/// distinct 2-parts, so the moduli `2^{a_i}+1` are pairwise coprime.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ProductProfile {
    a: Vec<u32>,
}

impl ProductProfile {
    pub fn new(mut a: Vec<u32>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidProfile("no factors".into()));
        }
        if let Some(&bad) = a.iter().find(|&&x| x == 0 || x > 63) {
            return Err(Error::InvalidProfile(format!(
                "exponent {bad} outside 1..=63"
            )));
        }
        a.sort_unstable_by(|x, y| y.cmp(x));
        for i in 0..a.len() {
            for j in i + 1..a.len() {
                if two_part(a[i] as u64) == two_part(a[j] as u64) {
                    return Err(Error::InvalidProfile(format!(
                        "2^{}+1 and 2^{}+1 are not coprime",
                        a[i], a[j]
                    )));
                }
            }
        }
        Ok(Self { a })
    }

    pub fn exponents(&self) -> &[u32] {
        &self.a
    }

    pub fn t(&self) -> usize {
        self.a.len()
    }

    /// `2^{a_i} + 1` for each factor.
    pub fn moduli(&self) -> Vec<u64> {
        self.a.iter().map(|&a| (1u64 << a) + 1).collect()
    }

    /// `prod (2^{a_i} + 1)`, the common denominator of every element.
    pub fn modulus(&self) -> BigUint {
        self.moduli().into_iter().map(BigUint::from).product()
    }

    /// Number of elements, `2^{sum a_i}`.
    pub fn size(&self) -> u128 {
        1u128 << self.n()
    }

    pub fn n(&self) -> u32 {
        self.a.iter().sum()
    }

    /// Membership: an element is exactly a class of denominator `prod (2^{a_i}+1)`.
    pub fn contains<T: Scalar>(&self, x: &QzOf<T>) -> bool {
        x.den().to_biguint() == self.modulus()
    }

    /// Numerator over `modulus()` of the element with mixed-radix index `idx`
    /// (digit `i` ranges over `1..2^{a_i}`, last factor fastest).
    pub fn element_numerator(&self, mut idx: u128) -> BigUint {
        let l = self.modulus();
        let mut acc = BigUint::zero();
        for &a in self.a.iter().rev() {
            let radix = 1u128 << a;
            let j = (idx % radix) as u64 + 1;
            idx /= radix;
            let m = (1u64 << a) + 1;
            acc += (&l / BigUint::from(m)) * BigUint::from(j);
        }
        acc % l
    }

    /// Materializes the set. Intended for small profiles.
    pub fn materialize<T: Scalar>(&self, p: u32) -> Result<CharSetOf<T>> {
        let l = T::from_biguint(&self.modulus()).ok_or(Error::Overflow("product modulus"))?;
        let elems = (0..self.size())
            .map(|i| {
                let num = T::from_biguint(&self.element_numerator(i)).expect("below modulus");
                QzOf::new(num, l.clone(), p)
            })
            .collect::<Result<Vec<_>>>()?;
        CharSetOf::from_elems(elems)
    }
}

/// Upstairs data: an explicit set or a symbolic full product.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Upstairs<T> {
    Explicit(CharSetOf<T>),
    Product(ProductProfile),
}

/// `Hyp(x0 + upstairs; x0 + downstairs)` in characteristic `p`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HypSpecOf<T> {
    p: u32,
    upstairs: Upstairs<T>,
    downstairs: CharSetOf<T>,
    twist: QzOf<T>,
}

impl<T: Scalar> HypSpecOf<T> {
    /// Validates an untwisted datum.
    pub fn new(p: u32, upstairs: CharSetOf<T>, downstairs: CharSetOf<T>) -> Result<Self> {
        Self::with_twist(p, Upstairs::Explicit(upstairs), downstairs, QzOf::zero())
    }

    pub fn with_twist(
        p: u32,
        upstairs: Upstairs<T>,
        downstairs: CharSetOf<T>,
        twist: QzOf<T>,
    ) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime { p });
        }
        let upstairs = match upstairs {
            Upstairs::Explicit(s) => match recognize_profile(&s, p) {
                Some(prof) => Upstairs::Product(prof),
                None => Upstairs::Explicit(s),
            },
            u => u,
        };
        let pt = T::from_u32(p).ok_or(Error::Overflow("characteristic"))?;
        let coprime = |x: &QzOf<T>| x.den().is_one() || x.den().gcd(&pt).is_one();
        let check = |x: &QzOf<T>| -> Result<()> {
            if coprime(x) {
                Ok(())
            } else {
                Err(Error::DenominatorNotCoprime {
                    den: x.den().to_string(),
                    p,
                })
            }
        };
        check(&twist)?;
        for b in downstairs.iter() {
            check(b)?;
        }
        match &upstairs {
            Upstairs::Explicit(s) => {
                for a in s.iter() {
                    check(a)?;
                    if downstairs.contains(a) {
                        return Err(Error::Overlap(a.to_string()));
                    }
                }
            }
            Upstairs::Product(prof) => {
                if let Some(b) = downstairs.iter().find(|b| prof.contains(*b)) {
                    return Err(Error::Overlap(b.to_string()));
                }
            }
        }
        let spec = Self {
            p,
            upstairs,
            downstairs,
            twist,
        };
        let (d, m) = (spec.d(), spec.m());
        if d <= m {
            return Err(Error::RankOrder { d, m });
        }
        Ok(spec)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn upstairs(&self) -> &Upstairs<T> {
        &self.upstairs
    }

    /// Untwisted downstairs set.
    pub fn downstairs(&self) -> &CharSetOf<T> {
        &self.downstairs
    }

    pub fn twist(&self) -> &QzOf<T> {
        &self.twist
    }

    pub fn d(&self) -> u128 {
        match &self.upstairs {
            Upstairs::Explicit(s) => s.len() as u128,
            Upstairs::Product(prof) => prof.size(),
        }
    }

    pub fn m(&self) -> u128 {
        self.downstairs.len() as u128
    }

    /// `W = D - M`, the wild rank at infinity.
    pub fn w(&self) -> u128 {
        self.d() - self.m()
    }

    pub fn profile(&self) -> Option<&ProductProfile> {
        match &self.upstairs {
            Upstairs::Product(p) => Some(p),
            Upstairs::Explicit(_) => None,
        }
    }

    /// Lcm of all untwisted character denominators.
    pub fn character_modulus(&self) -> BigUint {
        let up = match &self.upstairs {
            Upstairs::Explicit(s) => s.lcm_denominator().to_biguint(),
            Upstairs::Product(prof) => prof.modulus(),
        };
        up.lcm(&self.downstairs.lcm_denominator().to_biguint())
    }

    /// Lcm of all twisted character denominators; the `2^d - 1` of the sweep
    /// is the smallest one divisible by this.
    pub fn twisted_modulus(&self) -> BigUint {
        self.character_modulus().lcm(&self.twist.den().to_biguint())
    }

    /// The upstairs set as explicit twisted characters.
    pub fn upstairs_set(&self) -> Result<CharSetOf<T>> {
        let base = match &self.upstairs {
            Upstairs::Explicit(s) => s.clone(),
            Upstairs::Product(prof) => prof.materialize(self.p)?,
        };
        Ok(base.twist(&self.twist))
    }

    pub fn downstairs_set(&self) -> CharSetOf<T> {
        self.downstairs.twist(&self.twist)
    }
}

/// `Char(2^a+1) \ {1}` given explicitly is the one-factor profile `[a]`.
fn recognize_profile<T: Scalar>(s: &CharSetOf<T>, p: u32) -> Option<ProductProfile> {
    if p != 2 {
        return None;
    }
    match s.shape() {
        DownstairsShape::FullMinusTrivial(b) if b > 2 && (b - 1).is_power_of_two() => {
            ProductProfile::new(vec![(b - 1).trailing_zeros()]).ok()
        }
        _ => None,
    }
}

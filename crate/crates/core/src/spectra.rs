//! Spectra of torus elements in extraspecial normalizers and the m2sp cases.
//!
//! A torus element is given by parts `(a_i, e_i, r_i)` and a twist `xi` of odd
//! order. A `-` part contributes the exponents `r j / (2^a + 1)` for
//! `j = 1..2^a`; a `+` part contributes `r j / (2^a - 1)` for `j = 0..2^a - 2`
//! together with one more `0`. The spectrum is the multiset of all sums plus
//! `twist_exp / twist_order`, as residues modulo an explicit modulus.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::charset::two_part;
use crate::error::{Error, Result};

/// Largest `n = sum a_i` accepted; the spectrum has `2^n` entries.
pub const MAX_TORUS_RANK: u32 = 24;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct TorusPart {
    pub a: u32,
    pub eps: Sign,
    pub r: u64,
}

impl TorusPart {
    /// `2^a + 1` for a `-` part, `2^a - 1` for a `+` part.
    pub fn modulus(&self) -> u64 {
        match self.eps {
            Sign::Minus => (1u64 << self.a) + 1,
            Sign::Plus => (1u64 << self.a) - 1,
        }
    }

    /// Exponent numerators over `modulus()` contributed by this part.
    fn exponents(&self) -> Vec<u64> {
        let m = self.modulus();
        let r = self.r % m;
        match self.eps {
            Sign::Minus => (1..m).map(|j| r * j % m).collect(),
            Sign::Plus => (0..m)
                .map(|j| r * j % m)
                .chain(std::iter::once(0))
                .collect(),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusSpec {
    pub parts: Vec<TorusPart>,
    #[serde(default = "one")]
    pub twist_order: u64,
    #[serde(default)]
    pub twist_exp: u64,
}

fn one() -> u64 {
    1
}

impl TorusSpec {
    pub fn new(parts: Vec<TorusPart>, twist_order: u64, twist_exp: u64) -> Result<Self> {
        let ts = Self {
            parts,
            twist_order,
            twist_exp,
        };
        ts.validate()?;
        Ok(ts)
    }

    /// All parts `-`, no twist.
    pub fn minus(a: &[u32], r: &[u64]) -> Result<Self> {
        if a.len() != r.len() {
            return Err(Error::InvalidTorus("a and r differ in length".into()));
        }
        let parts = a
            .iter()
            .zip(r)
            .map(|(&a, &r)| TorusPart {
                a,
                eps: Sign::Minus,
                r,
            })
            .collect();
        Self::new(parts, 1, 0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.parts.is_empty() {
            return Err(Error::InvalidTorus("no parts".into()));
        }
        if self.twist_order == 0 || self.twist_order.is_multiple_of(2) {
            return Err(Error::InvalidTorus("twist order must be odd".into()));
        }
        for p in &self.parts {
            if p.a == 0 || p.a > MAX_TORUS_RANK {
                return Err(Error::InvalidTorus(format!(
                    "a = {} outside 1..={MAX_TORUS_RANK}",
                    p.a
                )));
            }
            if p.r >= p.modulus().max(1) {
                return Err(Error::InvalidTorus(format!(
                    "r = {} must be below {}",
                    p.r,
                    p.modulus()
                )));
            }
        }
        if self.n() > MAX_TORUS_RANK {
            return Err(Error::InvalidTorus(format!(
                "n = {} exceeds {MAX_TORUS_RANK}",
                self.n()
            )));
        }
        if self.parts.iter().filter(|p| p.eps == Sign::Plus).count() > 1 {
            return Err(Error::InvalidTorus(
                "at most one part may have sign +".into(),
            ));
        }
        Ok(())
    }

    pub fn n(&self) -> u32 {
        self.parts.iter().map(|p| p.a).sum()
    }

    /// Parts reordered: the `+` part first, then `-` parts by `a` descending,
    /// ties by `r` descending.
    pub fn canonical_parts(&self) -> Vec<TorusPart> {
        let mut v = self.parts.clone();
        v.sort_by(|x, y| {
            (y.eps == Sign::Plus)
                .cmp(&(x.eps == Sign::Plus))
                .then(y.a.cmp(&x.a))
                .then(y.r.cmp(&x.r))
        });
        v
    }
}

impl fmt::Display for TorusSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            let s = if p.eps == Sign::Plus { '+' } else { '-' };
            write!(f, "({},{s},{})", p.a, p.r)?;
        }
        if self.twist_order > 1 {
            write!(f, " xi={}/{}", self.twist_exp, self.twist_order)?;
        }
        Ok(())
    }
}

/// Eigenvalue exponents `k / modulus` with multiplicities.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SpectrumMultiset {
    pub modulus: u64,
    pub counts: BTreeMap<u64, u64>,
}

impl Serialize for SpectrumMultiset {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("SpectrumMultiset", 2)?;
        st.serialize_field("modulus", &self.modulus)?;
        let pairs: Vec<[u64; 2]> = self.counts.iter().map(|(&k, &c)| [k, c]).collect();
        st.serialize_field("counts", &pairs)?;
        st.end()
    }
}

impl SpectrumMultiset {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn max_multiplicity(&self) -> u64 {
        self.counts.values().copied().max().unwrap_or(0)
    }

    pub fn is_m2sp(&self) -> bool {
        self.max_multiplicity() <= 2
    }

    pub fn is_ssp(&self) -> bool {
        self.max_multiplicity() == 1
    }
}

pub fn spectrum(ts: &TorusSpec) -> SpectrumMultiset {
    let modulus = ts
        .parts
        .iter()
        .fold(ts.twist_order, |m, p| m.lcm(&p.modulus()));
    let shift = (ts.twist_exp % ts.twist_order) * (modulus / ts.twist_order);
    let mut counts = BTreeMap::from([(shift % modulus, 1u64)]);
    for p in &ts.parts {
        let scale = modulus / p.modulus();
        let vals: Vec<u64> = p.exponents().into_iter().map(|e| e * scale).collect();
        let mut next = BTreeMap::new();
        for (&k, &c) in &counts {
            for &v in &vals {
                *next.entry((k + v) % modulus).or_insert(0) += c;
            }
        }
        counts = next;
    }
    SpectrumMultiset { modulus, counts }
}

pub fn max_multiplicity(sm: &SpectrumMultiset) -> u64 {
    sm.max_multiplicity()
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum M2spCase {
    A,
    B,
    C,
    D,
}

impl fmt::Display for M2spCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            M2spCase::A => "a",
            M2spCase::B => "b",
            M2spCase::C => "c",
            M2spCase::D => "d",
        })
    }
}

/// `gcd(2^a + 1, 2^b + 1) = 1`, decided by comparing 2-parts.
pub fn coprime_2pow(a: u32, b: u32) -> bool {
    two_part(a as u64) != two_part(b as u64)
}

fn pairwise_coprime(ms: &[u64]) -> bool {
    ms.iter()
        .enumerate()
        .all(|(i, x)| ms[i + 1..].iter().all(|y| x.gcd(y) == 1))
}

fn units_ok(parts: &[TorusPart]) -> bool {
    parts.iter().all(|p| p.r.gcd(&p.modulus()) == 1)
}

/// Matches the arithmetic conditions of the four m2sp cases on the canonical
/// part order. The twist does not enter.
pub fn classify_case(ts: &TorusSpec) -> Option<M2spCase> {
    let parts = ts.canonical_parts();
    let moduli: Vec<u64> = parts.iter().map(TorusPart::modulus).collect();
    if parts[0].eps == Sign::Plus {
        return (pairwise_coprime(&moduli) && units_ok(&parts)).then_some(M2spCase::D);
    }
    if pairwise_coprime(&moduli) && units_ok(&parts) {
        return Some(M2spCase::A);
    }
    let (last, head) = parts.split_last().expect("nonempty");
    if last.a != 1 || !pairwise_coprime(&moduli[..head.len()]) || !units_ok(head) {
        return None;
    }
    if last.r == 0 {
        return Some(M2spCase::B);
    }
    let odd = head.iter().filter(|p| p.a % 2 == 1).count();
    if last.r % 3 != 0 && odd == 1 && ts.n().is_multiple_of(2) {
        return Some(M2spCase::C);
    }
    None
}

/// Order of the element modulo scalars: `prod (2^{a_i}+1)` in case (a),
/// `prod (2^{a_i}+1) / 3` in cases (b) and (c), and in case (d) the lcm of the
/// orders of the factors `s_i^{r_i}`.
pub fn ord_bar(ts: &TorusSpec) -> Result<u64> {
    let case = classify_case(ts).ok_or(Error::Unclassified)?;
    let prod: u64 = ts.parts.iter().map(TorusPart::modulus).product();
    Ok(match case {
        M2spCase::A => prod,
        M2spCase::B | M2spCase::C => prod / 3,
        M2spCase::D => ts
            .parts
            .iter()
            .map(|p| p.modulus() / p.r.gcd(&p.modulus()))
            .fold(1, |acc: u64, o| acc.lcm(&o)),
    })
}

/// Partitions of `n` into parts `a_1 >= a_2 >= ...`.
fn partitions(n: u32, max: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if n == 0 {
        out.push(prefix.clone());
        return;
    }
    for a in (1..=n.min(max)).rev() {
        prefix.push(a);
        partitions(n - a, a, prefix, out);
        prefix.pop();
    }
}

/// Every untwisted spec of rank `n` with at most one `+` part, parts in
/// nonincreasing `a`.
pub fn enumerate_torus_specs(n: u32) -> Vec<TorusSpec> {
    let mut shapes = Vec::new();
    partitions(n, n, &mut Vec::new(), &mut shapes);
    let mut out = Vec::new();
    for a in shapes {
        let t = a.len();
        for plus in std::iter::once(None).chain((0..t).map(Some)) {
            let signs: Vec<Sign> = (0..t)
                .map(|i| {
                    if Some(i) == plus {
                        Sign::Plus
                    } else {
                        Sign::Minus
                    }
                })
                .collect();
            let mods: Vec<u64> = (0..t)
                .map(|i| {
                    TorusPart {
                        a: a[i],
                        eps: signs[i],
                        r: 0,
                    }
                    .modulus()
                })
                .collect();
            let total: u64 = mods.iter().product();
            for mut idx in 0..total {
                let mut r = vec![0u64; t];
                for i in (0..t).rev() {
                    r[i] = idx % mods[i];
                    idx /= mods[i];
                }
                let parts = (0..t)
                    .map(|i| TorusPart {
                        a: a[i],
                        eps: signs[i],
                        r: r[i],
                    })
                    .collect();
                out.push(TorusSpec {
                    parts,
                    twist_order: 1,
                    twist_exp: 0,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coprime_criterion() {
        assert!(coprime_2pow(2, 4));
        assert!(!coprime_2pow(1, 3));
        assert!(coprime_2pow(1, 2));
    }

    #[test]
    fn spectrum_examples() {
        let a = TorusSpec::minus(&[2], &[1]).unwrap();
        let s = spectrum(&a);
        assert_eq!(s.modulus, 5);
        assert_eq!(s.counts, BTreeMap::from([(1, 1), (2, 1), (3, 1), (4, 1)]));
        assert!(s.is_ssp());

        let b = TorusSpec::minus(&[2, 1], &[1, 0]).unwrap();
        let s = spectrum(&b);
        assert_eq!(s.counts, BTreeMap::from([(3, 2), (6, 2), (9, 2), (12, 2)]));
        assert_eq!(s.max_multiplicity(), 2);
        assert!(s.is_m2sp() && !s.is_ssp());

        let c = TorusSpec::minus(&[2, 1], &[1, 1]).unwrap();
        let s = spectrum(&c);
        assert_eq!(s.counts.len(), 8);
        assert!(s.is_ssp());
    }

    #[test]
    fn non_coprime_pairs_exceed_two() {
        // a = (1,3) with r = (1,1) still has multiplicity 2 (it is case (c));
        // equal 2-parts with both moduli above 3 give at least 3.
        let s = spectrum(&TorusSpec::minus(&[1, 3], &[1, 1]).unwrap());
        assert_eq!(s.max_multiplicity(), 2);
        assert!(spectrum(&TorusSpec::minus(&[5, 3], &[1, 1]).unwrap()).max_multiplicity() >= 3);
        assert!(spectrum(&TorusSpec::minus(&[3, 3], &[1, 1]).unwrap()).max_multiplicity() >= 3);
    }

    #[test]
    fn cases() {
        assert_eq!(
            classify_case(&TorusSpec::minus(&[4], &[1]).unwrap()),
            Some(M2spCase::A)
        );
        assert_eq!(
            classify_case(&TorusSpec::minus(&[3, 1], &[1, 0]).unwrap()),
            Some(M2spCase::B)
        );
        assert_eq!(
            classify_case(&TorusSpec::minus(&[2, 2], &[1, 1]).unwrap()),
            None
        );
        assert_eq!(
            classify_case(&TorusSpec::minus(&[1, 3], &[1, 1]).unwrap()),
            Some(M2spCase::C)
        );
        assert_eq!(
            ord_bar(&TorusSpec::minus(&[2, 1], &[1, 1]).unwrap()).unwrap(),
            15
        );
        assert_eq!(
            ord_bar(&TorusSpec::minus(&[3, 1], &[1, 0]).unwrap()).unwrap(),
            9
        );
        assert_eq!(ord_bar(&TorusSpec::minus(&[4], &[1]).unwrap()).unwrap(), 17);
        assert!(matches!(
            ord_bar(&TorusSpec::minus(&[2, 2], &[1, 1]).unwrap()),
            Err(Error::Unclassified)
        ));
    }

    #[test]
    fn validation() {
        assert!(TorusSpec::minus(&[2], &[5]).is_err());
        let two_plus = vec![
            TorusPart {
                a: 2,
                eps: Sign::Plus,
                r: 1,
            },
            TorusPart {
                a: 1,
                eps: Sign::Plus,
                r: 0,
            },
        ];
        assert!(TorusSpec::new(two_plus, 1, 0).is_err());
        assert!(TorusSpec::new(
            vec![TorusPart {
                a: 2,
                eps: Sign::Minus,
                r: 1
            }],
            2,
            0
        )
        .is_err());
    }

    #[test]
    fn twist_shifts_everything() {
        let base = spectrum(&TorusSpec::minus(&[2], &[1]).unwrap());
        let tw = spectrum(
            &TorusSpec::new(
                vec![TorusPart {
                    a: 2,
                    eps: Sign::Minus,
                    r: 1,
                }],
                3,
                1,
            )
            .unwrap(),
        );
        assert_eq!(tw.modulus, 15);
        assert_eq!(tw.max_multiplicity(), base.max_multiplicity());
        assert!(tw.counts.keys().all(|k| k % 3 == 2));
    }

    #[test]
    fn desk_scale_soundness_and_completeness() {
        for n in 1..=6 {
            let specs = enumerate_torus_specs(n);
            assert!(!specs.is_empty());
            for ts in specs {
                let s = spectrum(&ts);
                assert_eq!(s.total(), 1 << n);
                let mm = s.max_multiplicity();
                match classify_case(&ts) {
                    Some(c) => {
                        assert!(mm <= 2, "{ts} classified {c} with multiplicity {mm}");
                        let direct = ts
                            .parts
                            .iter()
                            .map(|p| p.modulus() / p.r.gcd(&p.modulus()))
                            .fold(1u64, |acc, o| acc.lcm(&o));
                        assert_eq!(ord_bar(&ts).unwrap(), direct, "{ts}");
                    }
                    None => assert!(mm > 2, "{ts} has multiplicity {mm} but no case"),
                }
            }
        }
    }
}

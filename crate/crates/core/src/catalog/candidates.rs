//! Candidate sheaves of extraspecial type and the expected verdict for each.

use std::fmt;

use serde::Serialize;

use crate::charset::{two_part, CharSetOf, HypSpecOf, ProductProfile, Upstairs};
use crate::error::Result;
use crate::qz::QzOf;
use crate::spectra::M2spCase;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    /// `Hyp(Char(2^a+1) \ {1}; {})`.
    Kloosterman { a: u32 },
    /// `Hyp(Char(2^a+1) \ {1}; Char(2^b+1) \ {1})`.
    TwoChar { a: u32, b: u32 },
    /// `Hyp(prod_i (Char(2^{a_i}+1) \ {1}); {1})`.
    ProductOverTriv { a: Vec<u32> },
    /// A small sheaf that passes the V-test but whose monodromy is a known
    /// finite group other than an extraspecial normalizer.
    Excluded { name: ExcludedSheaf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ExcludedSheaf {
    /// `Hyp(Char(3) \ {1}; {1})`, monodromy `S3`.
    S3,
    /// `Hyp(Char(5) \ {1}; Char(3))`, monodromy `S5`.
    S5,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Kloosterman { a } => write!(f, "Kloosterman({a})"),
            Family::TwoChar { a, b } => write!(f, "TwoChar({a},{b})"),
            Family::ProductOverTriv { a } => {
                let s: Vec<String> = a.iter().map(u32::to_string).collect();
                write!(f, "ProductOverTriv({})", s.join(","))
            }
            Family::Excluded { name } => write!(f, "Excluded({name:?})"),
        }
    }
}

/// Side conditions of the final list, recomputed from the family parameters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Constraints {
    pub distinct_two_parts: bool,
    /// `a > b` (two-character family only).
    pub a_gt_b: Option<bool>,
    /// `a + b >= 4`, where finiteness is known for the product family.
    pub sum_at_least_4: Option<bool>,
    /// `a + b >= 5`, required for list membership of the product family.
    pub sum_at_least_5: Option<bool>,
}

impl Constraints {
    pub fn satisfied(&self) -> bool {
        self.distinct_two_parts && self.a_gt_b != Some(false) && self.sum_at_least_5 != Some(false)
    }
}

/// What the final list predicts for a candidate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expected {
    Listed { case: ListCase },
    Excluded { group: String },
    Fails,
    Unlisted,
}

/// The three families of the final list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ListCase {
    A,
    B,
    C,
}

impl fmt::Display for ListCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ListCase::A => "a",
            ListCase::B => "b",
            ListCase::C => "c",
        })
    }
}

impl From<ListCase> for M2spCase {
    fn from(c: ListCase) -> Self {
        match c {
            ListCase::A => M2spCase::A,
            ListCase::B => M2spCase::B,
            ListCase::C => M2spCase::C,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CandidateSheaf {
    pub family: Family,
    pub spec: HypSpecOf<u64>,
    /// `n = log2 D`.
    pub n: u32,
    /// Part of the regression set rather than the enumerated families.
    pub regression: bool,
}

fn distinct_two_parts(a: &[u32]) -> bool {
    a.iter().enumerate().all(|(i, &x)| {
        a[i + 1..]
            .iter()
            .all(|&y| two_part(x as u64) != two_part(y as u64))
    })
}

fn char_minus_one(a: u32) -> Result<CharSetOf<u64>> {
    CharSetOf::full_minus_trivial(&((1u64 << a) + 1), 2)
}

impl CandidateSheaf {
    pub fn new(family: Family) -> Result<Self> {
        let (spec, n) = match &family {
            Family::Kloosterman { a } => (
                HypSpecOf::new(2, char_minus_one(*a)?, CharSetOf::empty())?,
                *a,
            ),
            Family::TwoChar { a, b } => (
                HypSpecOf::new(2, char_minus_one(*a)?, char_minus_one(*b)?)?,
                *a,
            ),
            Family::ProductOverTriv { a } => {
                let prof = ProductProfile::new(a.clone())?;
                let n = prof.n();
                let spec = HypSpecOf::with_twist(
                    2,
                    Upstairs::Product(prof),
                    CharSetOf::full(&1, 2)?,
                    QzOf::zero(),
                )?;
                (spec, n)
            }
            Family::Excluded {
                name: ExcludedSheaf::S3,
            } => (
                HypSpecOf::new(2, char_minus_one(1)?, CharSetOf::full(&1, 2)?)?,
                1,
            ),
            Family::Excluded {
                name: ExcludedSheaf::S5,
            } => (
                HypSpecOf::new(2, char_minus_one(2)?, CharSetOf::full(&3, 2)?)?,
                2,
            ),
        };
        Ok(Self {
            family,
            spec,
            n,
            regression: false,
        })
    }

    pub fn constraints(&self) -> Constraints {
        match &self.family {
            Family::Kloosterman { .. } | Family::Excluded { .. } => Constraints {
                distinct_two_parts: true,
                a_gt_b: None,
                sum_at_least_4: None,
                sum_at_least_5: None,
            },
            Family::TwoChar { a, b } => Constraints {
                distinct_two_parts: distinct_two_parts(&[*a, *b]),
                a_gt_b: Some(a > b),
                sum_at_least_4: None,
                sum_at_least_5: None,
            },
            Family::ProductOverTriv { a } => {
                let s: u32 = a.iter().sum();
                Constraints {
                    distinct_two_parts: distinct_two_parts(a),
                    a_gt_b: None,
                    sum_at_least_4: Some(s >= 4),
                    sum_at_least_5: Some(s >= 5),
                }
            }
        }
    }

    pub fn expected(&self) -> Expected {
        let ok = self.constraints().satisfied();
        match &self.family {
            Family::Kloosterman { .. } => Expected::Listed { case: ListCase::A },
            Family::TwoChar { .. } if ok => Expected::Listed { case: ListCase::B },
            Family::ProductOverTriv { a } if a.len() == 2 && ok => {
                Expected::Listed { case: ListCase::C }
            }
            Family::ProductOverTriv { a } if a == &[2, 1] => Expected::Excluded {
                group: "2A8".into(),
            },
            Family::ProductOverTriv { a } if a.len() >= 3 => Expected::Fails,
            Family::Excluded { name } => Expected::Excluded {
                group: format!("{name:?}"),
            },
            _ => Expected::Unlisted,
        }
    }

    /// Group name when the candidate is a known finite non-extraspecial case.
    pub fn excluded_group(&self) -> Option<String> {
        match self.expected() {
            Expected::Excluded { group } => Some(group),
            _ => None,
        }
    }

    /// The list case the candidate belongs to when its side conditions hold.
    pub fn list_case(&self) -> Option<ListCase> {
        match self.expected() {
            Expected::Listed { case } => Some(case),
            _ => None,
        }
    }
}

fn family_rank(f: &Family) -> u8 {
    match f {
        Family::Kloosterman { .. } => 0,
        Family::TwoChar { .. } => 1,
        Family::ProductOverTriv { .. } => 2,
        Family::Excluded { .. } => 3,
    }
}

/// Candidates with `n = log2 D <= n_max`: the one-character family for every
/// `a`, the two-character family for `a > b` with distinct 2-parts, the
/// two-factor product over the trivial character for `a > b` with distinct
/// 2-parts, and the two named small exclusions. Ordered by `n`, then family,
/// then parameters.
pub fn enumerate_candidates(n_max: u32) -> Result<Vec<CandidateSheaf>> {
    let mut fams = Vec::new();
    for a in 1..=n_max {
        fams.push(Family::Kloosterman { a });
        for b in 1..a {
            if two_part(a as u64) != two_part(b as u64) {
                fams.push(Family::TwoChar { a, b });
            }
        }
    }
    for s in 2..=n_max {
        for b in 1..s {
            let a = s - b;
            if a > b && two_part(a as u64) != two_part(b as u64) {
                fams.push(Family::ProductOverTriv { a: vec![a, b] });
            }
        }
    }
    if n_max >= 1 {
        fams.push(Family::Excluded {
            name: ExcludedSheaf::S3,
        });
    }
    if n_max >= 2 {
        fams.push(Family::Excluded {
            name: ExcludedSheaf::S5,
        });
    }
    let mut out = fams
        .into_iter()
        .map(CandidateSheaf::new)
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|x, y| {
        (x.n, family_rank(&x.family), &x.family).cmp(&(y.n, family_rank(&y.family), &y.family))
    });
    out.dedup_by(|x, y| x.family == y.family);
    Ok(out)
}

/// The four-factor product `(8,7,6,4)` over the trivial character, which
/// escapes the analytic argument and fails the test at an explicit point.
pub fn regression_candidates() -> Result<Vec<CandidateSheaf>> {
    let mut c = CandidateSheaf::new(Family::ProductOverTriv {
        a: vec![8, 7, 6, 4],
    })?;
    c.regression = true;
    Ok(vec![c])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: u32) -> Vec<String> {
        enumerate_candidates(n)
            .unwrap()
            .iter()
            .map(|c| c.family.to_string())
            .collect()
    }

    #[test]
    fn small_lists() {
        assert_eq!(names(1), vec!["Kloosterman(1)", "Excluded(S3)"]);
        assert_eq!(
            names(2),
            vec![
                "Kloosterman(1)",
                "Excluded(S3)",
                "Kloosterman(2)",
                "TwoChar(2,1)",
                "Excluded(S5)"
            ]
        );
        let three = names(3);
        assert!(three.contains(&"ProductOverTriv(2,1)".to_string()));
        assert!(!three.contains(&"TwoChar(3,1)".to_string()));
    }

    #[test]
    fn expectations() {
        let c = CandidateSheaf::new(Family::ProductOverTriv { a: vec![2, 1] }).unwrap();
        assert_eq!(c.excluded_group().as_deref(), Some("2A8"));
        assert_eq!(c.constraints().sum_at_least_5, Some(false));
        let c = CandidateSheaf::new(Family::ProductOverTriv { a: vec![4, 1] }).unwrap();
        assert_eq!(c.list_case(), Some(ListCase::C));
        assert_eq!((c.spec.d(), c.spec.m(), c.n), (32, 1, 5));
        let c = CandidateSheaf::new(Family::Excluded {
            name: ExcludedSheaf::S5,
        })
        .unwrap();
        assert_eq!((c.spec.d(), c.spec.m()), (4, 3));
        assert_eq!(
            regression_candidates().unwrap()[0].expected(),
            Expected::Fails
        );
    }
}

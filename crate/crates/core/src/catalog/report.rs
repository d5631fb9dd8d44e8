//! Verdict rows and the classification report.

use std::time::Instant;

use serde::Serialize;

use crate::catalog::candidates::{
    enumerate_candidates, regression_candidates, CandidateSheaf, Constraints, Expected, Family,
    ListCase,
};
use crate::error::{Error, Result};
use crate::spec_json::SpecJson;
use crate::vtest::{run_vtest, SweepConfig, SweepPath, Witness};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SheafVerdict {
    ListedExtraspecial {
        case: ListCase,
    },
    FiniteButExcluded {
        group: String,
    },
    VTestFailed {
        witness: Witness,
    },
    PassUpToBoundUnlisted,
    /// The sweep hit its budget before finishing.
    Unresolved {
        required: u128,
        budget: u64,
        completed_bound: u32,
        partial: String,
    },
}

impl SheafVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            SheafVerdict::ListedExtraspecial { .. } => "listed_extraspecial",
            SheafVerdict::FiniteButExcluded { .. } => "finite_but_excluded",
            SheafVerdict::VTestFailed { .. } => "vtest_failed",
            SheafVerdict::PassUpToBoundUnlisted => "pass_up_to_bound_unlisted",
            SheafVerdict::Unresolved { .. } => "unresolved",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassificationRow {
    pub family: Family,
    pub name: String,
    pub n: u32,
    #[serde(rename = "D")]
    pub d: u128,
    #[serde(rename = "M")]
    pub m: u128,
    pub spec: SpecJson,
    pub constraints: Constraints,
    pub expected: Expected,
    pub verdict: SheafVerdict,
    /// Largest layer fully swept without a violation.
    pub bound: u32,
    pub m_max: u32,
    pub points: Option<u128>,
    pub path: Option<SweepPath>,
    pub regression: bool,
    pub matches_expected: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<u64>,
}

fn matches(expected: &Expected, verdict: &SheafVerdict) -> bool {
    matches!(
        (expected, verdict),
        (
            Expected::Listed { .. },
            SheafVerdict::ListedExtraspecial { .. }
        ) | (
            Expected::Excluded { .. },
            SheafVerdict::FiniteButExcluded { .. }
        ) | (Expected::Fails, SheafVerdict::VTestFailed { .. })
            | (Expected::Unlisted, SheafVerdict::PassUpToBoundUnlisted)
    )
}

/// Runs the V-test on a candidate and combines the outcome with its side
/// conditions. A budget overrun becomes an `Unresolved` row carrying the
/// partial sweep; other errors propagate.
pub fn classify_sheaf(
    c: &CandidateSheaf,
    cfg: &SweepConfig,
    timings: bool,
) -> Result<ClassificationRow> {
    let start = Instant::now();
    let run = run_vtest(&c.spec, cfg);
    let wall_ms = timings.then(|| start.elapsed().as_millis() as u64);
    let (verdict, bound, points, path) = match run {
        Ok(v) => {
            let verdict = match (&v.witness, c.excluded_group(), c.list_case()) {
                (Some(w), _, _) => SheafVerdict::VTestFailed { witness: w.clone() },
                (None, Some(group), _) => SheafVerdict::FiniteButExcluded { group },
                (None, None, Some(case)) => SheafVerdict::ListedExtraspecial { case },
                (None, None, None) => SheafVerdict::PassUpToBoundUnlisted,
            };
            let bound = if v.passed() { v.bound } else { v.bound - 1 };
            (verdict, bound, Some(v.points), Some(v.path))
        }
        Err(Error::BudgetExceeded {
            required,
            budget,
            completed_bound,
            partial,
        }) => (
            SheafVerdict::Unresolved {
                required,
                budget,
                completed_bound,
                partial,
            },
            completed_bound,
            None,
            None,
        ),
        Err(e) => return Err(e),
    };
    let expected = c.expected();
    Ok(ClassificationRow {
        family: c.family.clone(),
        name: c.family.to_string(),
        n: c.n,
        d: c.spec.d(),
        m: c.spec.m(),
        spec: SpecJson::from_spec(&c.spec)?,
        constraints: c.constraints(),
        matches_expected: matches(&expected, &verdict),
        expected,
        verdict,
        bound,
        m_max: cfg.m_max,
        points,
        path,
        regression: c.regression,
        wall_ms,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReportSummary {
    pub total: usize,
    pub listed_extraspecial: usize,
    pub finite_but_excluded: usize,
    pub vtest_failed: usize,
    pub pass_up_to_bound_unlisted: usize,
    pub unresolved: Vec<String>,
    /// Rows whose verdict contradicts the expected list (unresolved rows excluded).
    pub mismatches: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassificationReport {
    pub schema_version: u32,
    pub n_max: u32,
    pub m_max: u32,
    pub budget: u64,
    pub rows: Vec<ClassificationRow>,
    pub summary: ReportSummary,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassifyOptions {
    pub n_max: u32,
    pub sweep: SweepConfig,
    pub timings: bool,
    /// Append the `(8,7,6,4)` regression candidate.
    pub regression: bool,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            n_max: 3,
            sweep: SweepConfig::default(),
            timings: false,
            regression: false,
        }
    }
}

pub fn classify(opts: &ClassifyOptions) -> Result<ClassificationReport> {
    if opts.n_max == 0 {
        return Err(Error::Invalid("n_max must be at least 1".into()));
    }
    let mut cands = enumerate_candidates(opts.n_max)?;
    if opts.regression {
        cands.extend(regression_candidates()?);
    }
    let rows = cands
        .iter()
        .map(|c| classify_sheaf(c, &opts.sweep, opts.timings))
        .collect::<Result<Vec<_>>>()?;
    let count = |l: &str| rows.iter().filter(|r| r.verdict.label() == l).count();
    let summary = ReportSummary {
        total: rows.len(),
        listed_extraspecial: count("listed_extraspecial"),
        finite_but_excluded: count("finite_but_excluded"),
        vtest_failed: count("vtest_failed"),
        pass_up_to_bound_unlisted: count("pass_up_to_bound_unlisted"),
        unresolved: rows
            .iter()
            .filter(|r| matches!(r.verdict, SheafVerdict::Unresolved { .. }))
            .map(|r| r.name.clone())
            .collect(),
        mismatches: rows
            .iter()
            .filter(|r| {
                !r.matches_expected && !matches!(r.verdict, SheafVerdict::Unresolved { .. })
            })
            .map(|r| r.name.clone())
            .collect(),
    };
    Ok(ClassificationReport {
        schema_version: SCHEMA_VERSION,
        n_max: opts.n_max,
        m_max: opts.sweep.m_max,
        budget: opts.sweep.budget,
        rows,
        summary,
    })
}

fn opt_bool(b: Option<bool>) -> String {
    b.map(|v| v.to_string()).unwrap_or_default()
}

impl ClassificationReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// One line per row. Rationals are split into numerator and denominator
    /// columns.
    pub fn to_csv(&self) -> Result<String> {
        let timings = self.rows.iter().any(|r| r.wall_ms.is_some());
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec![
            "schema_version",
            "name",
            "n",
            "D",
            "M",
            "expected",
            "verdict",
            "case_or_group",
            "bound",
            "m_max",
            "points",
            "path",
            "witness_n",
            "witness_x_num",
            "witness_x_den",
            "slack_num",
            "slack_den",
            "distinct_two_parts",
            "a_gt_b",
            "sum_at_least_4",
            "sum_at_least_5",
            "regression",
            "matches_expected",
        ];
        if timings {
            header.push("wall_ms");
        }
        w.write_record(&header)?;
        for r in &self.rows {
            let expected = match &r.expected {
                Expected::Listed { case } => format!("listed_{case}"),
                Expected::Excluded { group } => format!("excluded_{group}"),
                Expected::Fails => "fails".into(),
                Expected::Unlisted => "unlisted".into(),
            };
            let detail = match &r.verdict {
                SheafVerdict::ListedExtraspecial { case } => case.to_string(),
                SheafVerdict::FiniteButExcluded { group } => group.clone(),
                _ => String::new(),
            };
            let (wn, xn, xd, sn, sd) = match &r.verdict {
                SheafVerdict::VTestFailed { witness } => {
                    let (xn, xd) = witness.point.x.to_pair_strings();
                    (
                        witness.point.n.to_string(),
                        xn,
                        xd,
                        witness.slack.numer().to_string(),
                        witness.slack.denom().to_string(),
                    )
                }
                _ => Default::default(),
            };
            let mut rec = vec![
                self.schema_version.to_string(),
                r.name.clone(),
                r.n.to_string(),
                r.d.to_string(),
                r.m.to_string(),
                expected,
                r.verdict.label().to_string(),
                detail,
                r.bound.to_string(),
                r.m_max.to_string(),
                r.points.map(|p| p.to_string()).unwrap_or_default(),
                r.path.map(|p| p.to_string()).unwrap_or_default(),
                wn,
                xn,
                xd,
                sn,
                sd,
                r.constraints.distinct_two_parts.to_string(),
                opt_bool(r.constraints.a_gt_b),
                opt_bool(r.constraints.sum_at_least_4),
                opt_bool(r.constraints.sum_at_least_5),
                r.regression.to_string(),
                r.matches_expected.to_string(),
            ];
            if timings {
                rec.push(r.wall_ms.map(|t| t.to_string()).unwrap_or_default());
            }
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Invalid(e.to_string()))
    }
}

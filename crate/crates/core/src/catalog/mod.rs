//! Candidate generation, classification reports and lemma suites.

pub mod candidates;
pub mod report;
pub mod suites;
pub mod wild;

pub use candidates::{
    enumerate_candidates, regression_candidates, CandidateSheaf, Constraints, ExcludedSheaf,
    Expected, Family, ListCase,
};
pub use report::{
    classify, classify_sheaf, ClassificationReport, ClassificationRow, ClassifyOptions,
    ReportSummary, SheafVerdict, SCHEMA_VERSION,
};
pub use suites::{verify_lemmas, AssertionReport, LemmaBounds, SuiteReport, SUITES};
pub use wild::{wild_check, WildCheck};

//! The V-test: pointwise evaluation, the collapsed evaluator, bounded sweeps
//! and the explicit constructions from the two-factor lemma.

pub mod collapsed;
pub mod eval;
pub mod lemmas;
pub mod sweep;

pub use collapsed::{v_collapsed, CollapsedProfile};
pub use eval::{
    katz_cross_term, katz_original_holds, katz_original_lhs, threshold, v_down, v_down_naive,
    v_up_naive, vtest_holds, vtest_lhs, vtest_slack, VTestPoint,
};
pub use lemmas::{digit_pattern, digit_pattern_check, induction_witness, InductionWitness};
pub use sweep::{
    run_vtest, verify_witness, witness_search, Outcome, SweepConfig, SweepPath, Verdict, Witness,
    DEFAULT_BUDGET,
};

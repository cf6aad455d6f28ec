//! Bottom-up formula evaluation and coalition strategy synthesis.

mod synth;
mod until;

pub use synth::{
    check, check_pbound, synthesize, CheckConfig, CheckResult, PBoundReport, SearchInfo, Soundness,
    StrategyMode, Verdict, EPSILON,
};
pub use until::{prob_release, prob_until, Mode, ProbVector, UntilPlan, ViConfig};

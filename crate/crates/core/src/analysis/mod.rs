//! Analytic engine: stability checks and the transform-based mean response
//! time approximation for the threshold policy in the one-or-all case.

mod efs;
mod jet;
mod msfq;
mod stability;
mod transforms;
mod visits;

pub use efs::{efs_conditional_work, efs_empty_prob, efs_mean_work, Moments2};
pub use jet::Jet;
pub use msfq::{
    analyze_msfq, solve_phase_moments, solve_phase_moments_fixed_point, t1_large, t2_small,
    t3_small, t_excess, MsfqAnalysis, MsfqParams, MsfqTransforms, PhaseMoments,
};
pub use stability::{
    boundary_rate_necessary, boundary_rate_sufficient, stability_general, stability_one_or_all,
    GeneralStability, OneOrAllStability,
};
pub use transforms::{BusyPeriod, DrainLadder, TransitLadder};
pub use visits::{t3_small as t3_small_weighted, visit_counts};

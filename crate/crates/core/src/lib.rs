//! A laboratory for non-preemptive multiserver-job scheduling.
//!
//! A system of `k` servers receives a Poisson stream of jobs; a class-`i` job
//! occupies `i` servers for an exponentially distributed duration and cannot
//! be preempted once started. This crate provides:
//!
//! * [`workload`] — job classes, arrival/size generation with one independent
//!   RNG substream per class (so policy comparisons can share random numbers),
//!   and JSON/CSV class-table ingestion.
//! * [`policy`] — FCFS, First-Fit, MSF, MSFQ, Static/Adaptive Quickswap and a
//!   simplified nMSR baseline, implemented as decision procedures over the
//!   explicit system state `(n, u, z)`.
//! * [`sim`] — the event-driven simulator, per-job and per-phase measurement,
//!   and coupled (common-random-number) policy comparison.
//! * [`analysis`] — stability checks plus the transform-based mean response
//!   time approximation for MSFQ in the one-or-all case, built on second-order
//!   moment jets.
//! * [`metrics`] — response-time aggregation with batch-means confidence
//!   intervals and load-weighted means.
//!
//! The analytic core is generic over the scalar type via [`float::Scalar`];
//! the aliases below fix `f64` for ordinary use.

pub mod analysis;
pub mod error;
pub mod float;
pub mod metrics;
pub mod policy;
pub mod sim;
pub mod workload;

pub use error::{Error, Result};

/// Scalar type used by the simulator and the default analytic aliases.
pub type Real = f64;

pub type MsfqParams = analysis::MsfqParams<Real>;
pub type PhaseMoments = analysis::PhaseMoments<Real>;
pub type MsfqAnalysis = analysis::MsfqAnalysis<Real>;
pub type Jet = analysis::Jet<Real>;

//! M/G/1 with exceptional first service: mean workload and empty probability.
//!
//! Jobs arrive at rate λ with size distribution S, except that the job
//! starting each busy period draws its size from S'. Only the first two
//! moments of S and S' enter the formulas:
//!
//! ```text
//! E[W]  =  λE[S²] / 2(1-λE[S])  +  λ(E[S'²]-E[S²]) / 2(1-λE[S]+λE[S'])
//! p     =  (1-λE[S]) / (1-λE[S]+λE[S'])
//! ```
//!
//! where p is the probability an arrival finds the system empty (and so
//! receives the exceptional service).

use crate::error::{Error, Result};
use crate::float::{lit, Scalar};

/// First two raw moments of a (possibly formal) distribution.
#[derive(Debug, Clone, Copy)]
pub struct Moments2<F> {
    pub m1: F,
    pub m2: F,
}

impl<F: Scalar> Moments2<F> {
    pub fn new(m1: F, m2: F) -> Self {
        Moments2 { m1, m2 }
    }

    /// Moments of an exponential with the given rate.
    pub fn exponential(rate: F) -> Self {
        Moments2 {
            m1: F::one() / rate,
            m2: lit::<F>(2.0) / (rate * rate),
        }
    }
}

fn guards<F: Scalar>(lambda: F, s: Moments2<F>, sp: Moments2<F>) -> Result<(F, F)> {
    let slack = F::one() - lambda * s.m1;
    if !(slack > F::zero()) {
        return Err(Error::unstable(format!(
            "EFS overloaded: lambda*E[S] = {} >= 1",
            lambda * s.m1
        )));
    }
    let denom = slack + lambda * sp.m1;
    if !(denom > F::zero()) {
        return Err(Error::unstable(format!(
            "EFS degenerate: 1 - lambda*E[S] + lambda*E[S'] = {denom} <= 0"
        )));
    }
    Ok((slack, denom))
}

/// Time-average work in the EFS system.
pub fn efs_mean_work<F: Scalar>(lambda: F, s: Moments2<F>, sp: Moments2<F>) -> Result<F> {
    let (slack, denom) = guards(lambda, s, sp)?;
    let two = lit::<F>(2.0);
    Ok(lambda * s.m2 / (two * slack) + lambda * (sp.m2 - s.m2) / (two * denom))
}

/// Probability an arrival finds the system empty.
pub fn efs_empty_prob<F: Scalar>(lambda: F, s: Moments2<F>, sp: Moments2<F>) -> Result<F> {
    let (slack, denom) = guards(lambda, s, sp)?;
    Ok(slack / denom)
}

/// Conditional mean work seen by a non-exceptional arrival, `E[W]/(1-p)`.
/// Exceptional arrivals see zero work, so this is the conditioning used by
/// the phase-1 / phase-2 response time formulas. Algebraically it equals
/// `λE[S²]/2(1-λE[S]) + E[S'²]/2E[S']`; computing it that way avoids the
/// 0/0 cancellation as E[S'] → 0.
pub fn efs_conditional_work<F: Scalar>(lambda: F, s: Moments2<F>, sp: Moments2<F>) -> Result<F> {
    let (slack, _) = guards(lambda, s, sp)?;
    if sp.m1 == F::zero() && sp.m2 == F::zero() {
        // No exceptional work at all: plain M/G/1 workload seen by arrivals.
        return Ok(lambda * s.m2 / (lit::<F>(2.0) * slack));
    }
    let two = lit::<F>(2.0);
    Ok(lambda * s.m2 / (two * slack) + sp.m2 / (two * sp.m1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collapses_to_mm1_when_exceptional_equals_normal() {
        // S' = S = exp(1), lambda = 0.5: E[W] = 1, p = 0.5
        let s = Moments2::exponential(1.0);
        let w = efs_mean_work(0.5, s, s).unwrap();
        let p = efs_empty_prob(0.5, s, s).unwrap();
        assert!((w - 1.0).abs() < 1e-12);
        assert!((p - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_arrival_rate() {
        let s = Moments2::exponential(1.0);
        let sp = Moments2::new(3.0, 11.0);
        assert_eq!(efs_mean_work(0.0, s, sp).unwrap(), 0.0);
        assert_eq!(efs_empty_prob(0.0, s, sp).unwrap(), 1.0);
    }

    #[test]
    fn zero_exceptional_work_gives_empty_prob_one() {
        let s = Moments2::exponential(1.0);
        let sp = Moments2::new(0.0, 0.0);
        let p = efs_empty_prob(0.5, s, sp).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conditional_work_matches_ratio_form() {
        let s = Moments2::exponential(1.0);
        let sp = Moments2::new(2.5, 14.0);
        let lambda = 0.3;
        let w = efs_mean_work(lambda, s, sp).unwrap();
        let p = efs_empty_prob(lambda, s, sp).unwrap();
        let direct = efs_conditional_work(lambda, s, sp).unwrap();
        assert!((w / (1.0 - p) - direct).abs() < 1e-10);
    }

    #[test]
    fn rejects_overload() {
        let s = Moments2::exponential(1.0);
        assert!(efs_mean_work(1.0, s, s).is_err());
    }
}

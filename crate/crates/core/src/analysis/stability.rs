//! Stability-region membership checks.
//!
//! One-or-all: the system is stabilizable iff `λ₁/(kμ₁) + λ_k/μ_k < 1`, and
//! the threshold policy achieves this region for every threshold. The
//! boundary itself is unstable.
//!
//! General classes: Static Quickswap is stable when
//! `Σ_j λ_j/(⌊k/j⌋ μ_j) < 1` (sufficient), and no policy is stable when
//! `Σ_j λ_j/((k/j) μ_j) ≥ 1` (necessary). The two coincide when every need
//! divides k.

use serde::Serialize;

use crate::float::{int, Scalar};
use crate::workload::WorkloadSpec;

/// Verdict for the one-or-all case.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OneOrAllStability<F> {
    pub stable: bool,
    /// 1 - (λ₁/(kμ₁) + λ_k/μ_k); positive iff stable.
    pub margin: F,
}

pub fn stability_one_or_all<F: Scalar>(
    k: usize,
    lambda1: F,
    lambdak: F,
    mu1: F,
    muk: F,
) -> OneOrAllStability<F> {
    let load = lambda1 / (int::<F>(k) * mu1) + lambdak / muk;
    let margin = F::one() - load;
    OneOrAllStability {
        stable: margin > F::zero(),
        margin,
    }
}

/// Two-sided verdict for a general class mix.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GeneralStability {
    /// Static Quickswap sufficiency: Σ λ_j/(⌊k/j⌋ μ_j) < 1.
    pub sufficient_stable: bool,
    /// Universal infeasibility: Σ λ_j/((k/j) μ_j) ≥ 1.
    pub necessary_unstable: bool,
    /// 1 minus the floor-formula load.
    pub sufficient_margin: f64,
    /// 1 minus the fractional-formula load.
    pub necessary_margin: f64,
}

pub fn stability_general(spec: &WorkloadSpec) -> GeneralStability {
    let k = spec.k() as f64;
    let mut floor_load = 0.0;
    let mut frac_load = 0.0;
    for c in spec.classes() {
        let mu = 1.0 / c.mean_size;
        let slots = (spec.k() / c.need) as f64;
        floor_load += c.arrival_rate / (slots * mu);
        frac_load += c.arrival_rate / ((k / c.need as f64) * mu);
    }
    GeneralStability {
        sufficient_stable: floor_load < 1.0,
        necessary_unstable: frac_load >= 1.0,
        sufficient_margin: 1.0 - floor_load,
        necessary_margin: 1.0 - frac_load,
    }
}

/// Largest total rate λ for which the spec's class mix satisfies the
/// sufficient (floor-formula) condition; `None` when the mix carries no load.
pub fn boundary_rate_sufficient(spec: &WorkloadSpec) -> Option<f64> {
    let total = spec.total_rate();
    if total <= 0.0 {
        return None;
    }
    let mut per_unit = 0.0;
    for c in spec.classes() {
        let p = c.arrival_rate / total;
        let mu = 1.0 / c.mean_size;
        per_unit += p / ((spec.k() / c.need) as f64 * mu);
    }
    if per_unit > 0.0 {
        Some(1.0 / per_unit)
    } else {
        None
    }
}

/// Largest total rate λ satisfying the necessary (fractional) condition.
pub fn boundary_rate_necessary(spec: &WorkloadSpec) -> Option<f64> {
    let total = spec.total_rate();
    if total <= 0.0 {
        return None;
    }
    let k = spec.k() as f64;
    let mut per_unit = 0.0;
    for c in spec.classes() {
        let p = c.arrival_rate / total;
        let mu = 1.0 / c.mean_size;
        per_unit += p / ((k / c.need as f64) * mu);
    }
    if per_unit > 0.0 {
        Some(1.0 / per_unit)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::ClassSpec;

    #[test]
    fn one_or_all_margin() {
        // k=32, lambda1=6.75, lambda32=0.75, mu=1: margin = 1 - 0.9609375
        let v = stability_one_or_all::<f64>(32, 6.75, 0.75, 1.0, 1.0);
        assert!(v.stable);
        assert!((v.margin - 0.0390625).abs() < 1e-12);
    }

    #[test]
    fn one_or_all_zero_rates_and_boundary() {
        let v = stability_one_or_all::<f64>(4, 0.0, 0.0, 1.0, 1.0);
        assert!(v.stable);
        assert!((v.margin - 1.0).abs() < 1e-15);
        // exactly on the boundary: unstable (boundary excluded)
        let b = stability_one_or_all::<f64>(4, 2.0, 0.5, 1.0, 1.0);
        assert!(!b.stable);
        assert!(b.margin.abs() < 1e-15);
    }

    fn four_class(total: f64) -> WorkloadSpec {
        let fr = [(1usize, 0.5), (3, 0.25), (5, 0.2), (15, 0.05)];
        let classes = fr
            .iter()
            .map(|&(need, p)| ClassSpec {
                need,
                arrival_rate: p * total,
                mean_size: 1.0,
            })
            .collect();
        WorkloadSpec::new(15, classes).unwrap()
    }

    #[test]
    fn four_class_boundary_is_five() {
        let spec = four_class(4.0);
        let b = boundary_rate_sufficient(&spec).unwrap();
        assert!((b - 5.0).abs() < 1e-12);
        // needs divide k, so both verdicts coincide
        let bn = boundary_rate_necessary(&spec).unwrap();
        assert!((b - bn).abs() < 1e-12);

        let at_45 = stability_general(&four_class(4.5));
        assert!(at_45.sufficient_stable);
        assert!(!at_45.necessary_unstable);
        let at_5 = stability_general(&four_class(5.0));
        assert!(!at_5.sufficient_stable);
        assert!(at_5.necessary_unstable);
    }

    #[test]
    fn empty_load_has_unbounded_region() {
        let spec = WorkloadSpec::new(
            4,
            vec![ClassSpec {
                need: 1,
                arrival_rate: 0.0,
                mean_size: 1.0,
            }],
        )
        .unwrap();
        let g = stability_general(&spec);
        assert!(g.sufficient_stable);
        assert!((g.sufficient_margin - 1.0).abs() < 1e-15);
        assert!(boundary_rate_sufficient(&spec).is_none());
    }
}

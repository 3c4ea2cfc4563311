//! Closed-form transforms: M/M/1 busy periods and the draining-phase ladders.
//!
//! Service phases of the threshold policy reduce to three building blocks:
//!
//! * `B(s)` — the busy period of an M/M/1 queue with arrival rate λ and an
//!   effective service rate μ. For the small-job side the effective rate is
//!   `k·μ₁` (all k servers drain in parallel while at least k small jobs are
//!   present); for the large-job side it is `μ_k` (one job at a time).
//! * `H₄` — a pure-death drain of ℓ jobs in service: a sum of independent
//!   exponentials with rates `ℓμ₁, (ℓ-1)μ₁, …, μ₁`.
//! * `H₃` — the transit from k-1 jobs down to ℓ jobs with arrivals still
//!   admitted, via the one-step transit transforms
//!   `H₃ⱼ(s) = jμ₁ / (λ₁ + jμ₁ + s - λ₁·H₃ⱼ₊₁(s))`, anchored at
//!   `H₃ₖ = B(s)` with the k-busy effective rate.

use crate::error::{Error, Result};
use crate::float::{int, lit, Scalar};

use super::jet::Jet;

/// Busy period of an M/M/1 queue: arrival rate `lambda`, service rate `mu`,
/// started by a single service.
#[derive(Debug, Clone, Copy)]
pub struct BusyPeriod<F> {
    pub lambda: F,
    pub mu: F,
}

impl<F: Scalar> BusyPeriod<F> {
    pub fn new(lambda: F, mu: F) -> Result<Self> {
        if !(mu > F::zero()) || lambda < F::zero() {
            return Err(Error::unstable(format!(
                "busy period needs mu > 0 and lambda >= 0, got lambda={lambda}, mu={mu}"
            )));
        }
        if lambda >= mu {
            return Err(Error::unstable(format!(
                "busy period diverges: lambda={lambda} >= mu={mu}"
            )));
        }
        Ok(BusyPeriod { lambda, mu })
    }

    /// E[B] = E[S] / (1 - ρ).
    pub fn mean(&self) -> F {
        F::one() / (self.mu - self.lambda)
    }

    /// E[B²] = E[S²] / (1 - ρ)³.
    pub fn second_moment(&self) -> F {
        let rho = self.lambda / self.mu;
        let one_minus = F::one() - rho;
        lit::<F>(2.0) / (self.mu * self.mu) / (one_minus * one_minus * one_minus)
    }

    /// Laplace jet at s = 0.
    pub fn jet(&self) -> Jet<F> {
        Jet::laplace_from_moments(self.mean(), self.second_moment())
    }

    /// Transform value: the root of `λB² - (λ+μ+s)B + μ = 0` with `B(0) = 1`.
    pub fn eval(&self, s: F) -> F {
        if self.lambda == F::zero() {
            return self.mu / (self.mu + s);
        }
        let a = self.lambda + self.mu + s;
        let disc = a * a - lit::<F>(4.0) * self.lambda * self.mu;
        (a - disc.sqrt()) / (lit::<F>(2.0) * self.lambda)
    }
}

/// Phase-4 drain: ℓ small jobs in service complete with no replacements.
/// `H₄ = Σ_{j=1..ℓ} Exp(jμ₁)`; the empty sum (ℓ=0) is identically zero.
#[derive(Debug, Clone, Copy)]
pub struct DrainLadder<F> {
    pub ell: usize,
    pub mu1: F,
}

impl<F: Scalar> DrainLadder<F> {
    pub fn new(ell: usize, mu1: F) -> Self {
        DrainLadder { ell, mu1 }
    }

    pub fn mean(&self) -> F {
        let mut m = F::zero();
        for j in 1..=self.ell {
            m = m + F::one() / (int::<F>(j) * self.mu1);
        }
        m
    }

    pub fn variance(&self) -> F {
        let mut v = F::zero();
        for j in 1..=self.ell {
            let r = F::one() / (int::<F>(j) * self.mu1);
            v = v + r * r;
        }
        v
    }

    pub fn second_moment(&self) -> F {
        let m = self.mean();
        self.variance() + m * m
    }

    pub fn jet(&self) -> Jet<F> {
        Jet::laplace_from_moments(self.mean(), self.second_moment())
    }

    pub fn eval(&self, s: F) -> F {
        let mut p = F::one();
        for j in 1..=self.ell {
            let jm = int::<F>(j) * self.mu1;
            p = p * jm / (jm + s);
        }
        p
    }
}

/// Phase-3 transit: from k-1 small jobs in the system down to ℓ, with
/// arrivals admitted along the way. Empty when ℓ = k-1.
#[derive(Debug, Clone, Copy)]
pub struct TransitLadder<F> {
    pub k: usize,
    pub ell: usize,
    pub lambda1: F,
    pub mu1: F,
}

impl<F: Scalar> TransitLadder<F> {
    pub fn new(k: usize, ell: usize, lambda1: F, mu1: F) -> Result<Self> {
        if ell >= k {
            return Err(Error::policy(format!(
                "transit ladder needs ell < k, got ell={ell}, k={k}"
            )));
        }
        if lambda1 >= int::<F>(k) * mu1 {
            return Err(Error::unstable(format!(
                "small-job side overloaded: lambda1={lambda1} >= k*mu1={}",
                int::<F>(k) * mu1
            )));
        }
        Ok(TransitLadder { k, ell, lambda1, mu1 })
    }

    fn top_busy(&self) -> BusyPeriod<F> {
        // Transit k -> k-1 is a busy period at the k-busy effective rate.
        BusyPeriod {
            lambda: self.lambda1,
            mu: int::<F>(self.k) * self.mu1,
        }
    }

    /// Jets of the one-step transits H₃ⱼ for j = ℓ+1..k-1, computed downward
    /// from the anchor H₃ₖ.
    fn step_jets(&self) -> Vec<Jet<F>> {
        let mut steps = Vec::new();
        let mut upper = self.top_busy().jet();
        for j in (self.ell + 1..self.k).rev() {
            let jm = int::<F>(j) * self.mu1;
            // Denominator jet of λ₁ + jμ₁ + s - λ₁·H₃ⱼ₊₁(s) at s = 0.
            let denom = Jet::new(jm, F::one() - self.lambda1 * upper.d1, -self.lambda1 * upper.d2);
            let step = denom.recip() * Jet::new(jm, F::zero(), F::zero());
            steps.push(step);
            upper = step;
        }
        steps
    }

    /// Laplace jet of the whole phase-3 duration (product of the one-step
    /// transits; the empty range yields the jet of the zero duration).
    pub fn jet(&self) -> Jet<F> {
        let mut p = Jet::one();
        for step in self.step_jets() {
            p = p * step;
        }
        p
    }

    pub fn mean(&self) -> F {
        self.jet().mean_laplace()
    }

    pub fn eval(&self, s: F) -> F {
        let mut upper = self.top_busy().eval(s);
        let mut p = F::one();
        for j in (self.ell + 1..self.k).rev() {
            let jm = int::<F>(j) * self.mu1;
            let step = jm / (self.lambda1 + jm + s - self.lambda1 * upper);
            p = p * step;
            upper = step;
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn busy_period_closed_form_moments() {
        // lambda=0.5, mu=1: E[B] = 2, E[B^2] = E[S^2]/(1-rho)^3 = 2/0.125 = 16
        let b = BusyPeriod::new(0.5, 1.0).unwrap();
        assert!((b.mean() - 2.0).abs() < 1e-12);
        assert!((b.second_moment() - 16.0).abs() < 1e-12);
        assert!((b.eval(0.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn busy_period_without_arrivals_is_one_service() {
        let b = BusyPeriod::new(0.0, 2.0).unwrap();
        assert!((b.mean() - 0.5).abs() < 1e-12);
        assert!((b.eval(1.0) - 2.0 / 3.0).abs() < 1e-12);
        assert!((b.second_moment() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn busy_period_rejects_overload() {
        assert!(BusyPeriod::new(1.0, 1.0).is_err());
        assert!(BusyPeriod::new(2.0, 1.0).is_err());
    }

    #[test]
    fn drain_ladder_moments() {
        // ell=0: identically zero
        let d0 = DrainLadder::new(0, 1.0);
        assert_eq!(d0.mean(), 0.0);
        assert_eq!(d0.eval(3.0), 1.0);
        // ell=2, mu=1: E = 1.5, E[X^2] = (1 + 1/4) + 1.5^2 = 3.5
        let d2 = DrainLadder::new(2, 1.0);
        assert!((d2.mean() - 1.5).abs() < 1e-12);
        assert!((d2.second_moment() - 3.5).abs() < 1e-12);
        // ell=3, mu=2: E = (1/2)(1 + 1/2 + 1/3) = 11/12
        let d3 = DrainLadder::new(3, 2.0);
        assert!((d3.mean() - 11.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn transit_ladder_empty_when_ell_is_k_minus_one() {
        let t = TransitLadder::new(8, 7, 0.5, 1.0).unwrap();
        assert_eq!(t.mean(), 0.0);
        assert_eq!(t.eval(2.0), 1.0);
    }

    #[test]
    fn transit_ladder_two_servers_hand_value() {
        // k=2, ell=0, lambda=0.5, mu=1: E[B at rate 2] = 0.5/(1-0.25) = 2/3,
        // E[H3] = (1 + 0.5 * 2/3) / 1 = 4/3.
        let t = TransitLadder::new(2, 0, 0.5, 1.0).unwrap();
        assert!((t.mean() - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn transit_ladder_pure_death_limit() {
        // lambda1=0: E[H3] = sum_{j=ell+1}^{k-1} 1/(j mu1)
        let t = TransitLadder::new(5, 1, 0.0, 2.0).unwrap();
        let expect = (1.0 / 2.0 + 1.0 / 3.0 + 1.0 / 4.0) / 2.0;
        assert!((t.mean() - expect).abs() < 1e-12);
    }

    #[test]
    fn jets_match_finite_differences_of_evaluators() {
        let h = 1e-5;
        let check = |jet: Jet<f64>, eval: &dyn Fn(f64) -> f64, tol1: f64, tol2: f64| {
            let (fm, fp) = (eval(-h), eval(h));
            let d1 = (fp - fm) / (2.0 * h);
            let d2 = (fp - 2.0 * eval(0.0) + fm) / (h * h);
            assert!((jet.d1 - d1).abs() / d1.abs() < tol1, "{} vs {}", jet.d1, d1);
            assert!((jet.d2 - d2).abs() / d2.abs() < tol2, "{} vs {}", jet.d2, d2);
        };
        let b = BusyPeriod::new(0.6, 1.0).unwrap();
        check(b.jet(), &|s| b.eval(s), 1e-6, 1e-5);
        let d = DrainLadder::new(5, 0.8);
        check(d.jet(), &|s| d.eval(s), 1e-6, 1e-5);
        let t = TransitLadder::new(6, 2, 1.5, 0.7).unwrap();
        check(t.jet(), &|s| t.eval(s), 1e-6, 1e-5);
    }
}

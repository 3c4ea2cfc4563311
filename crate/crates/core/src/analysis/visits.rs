//! Expected visit counts of the phase-3 absorbing chain, and the conditional
//! mean response time of small jobs arriving during phase 3.
//!
//! During phase 3 the small-job count forms a birth–death chain started at
//! k-1 and absorbed at ℓ: arrivals at rate λ₁, departures at rate
//! `min(j, k)·μ₁`. `C_j` is the expected number of visits to state j before
//! absorption:
//!
//! ```text
//! C_{ℓ+1} = (λ₁+(ℓ+1)μ₁) / ((ℓ+1)μ₁) · 1{ℓ+1 ≤ k-1}
//! C_j     = C_{j-1}·λ₁(λ₁+jμ₁) / (jμ₁(λ₁+(j-1)μ₁)) + (λ₁+jμ₁)/(jμ₁)·1{j ≤ k-1}
//!                                                   for ℓ+1 < j ≤ k
//! C_j     = C_{j-1}·λ₁/(kμ₁)                        for j > k
//! ```
//!
//! The j > k tail is the per-step recursion from the derivation (each extra
//! up-crossing multiplies by λ₁/(kμ₁)), giving a geometric tail from C_k.
//! An arrival that sees j small jobs has conditional mean response
//! `(k + (j-k+1)⁺) / (kμ₁)`; weighting by expected time in state,
//! `C_j / (λ₁ + min(k,j)μ₁)`, yields E[T₃ˢ].

use crate::error::{Error, Result};
use crate::float::{int, lit, Scalar};

/// Expected visit counts `C_j` for j = ℓ+1 ..= j_max.
pub fn visit_counts<F: Scalar>(k: usize, ell: usize, lambda1: F, mu1: F, j_max: usize) -> Vec<F> {
    let lam = lambda1;
    let mut out = Vec::new();
    if ell + 1 > j_max {
        return out;
    }
    let mut prev = F::zero();
    for j in ell + 1..=j_max {
        let c = if j == ell + 1 {
            if ell + 1 <= k - 1 {
                let jm = int::<F>(j) * mu1;
                (lam + jm) / jm
            } else {
                F::zero()
            }
        } else if j <= k {
            let jm = int::<F>(j) * mu1;
            let jm_prev = int::<F>(j - 1) * mu1;
            let boundary = if j <= k - 1 { (lam + jm) / jm } else { F::zero() };
            prev * lam * (lam + jm) / (jm * (lam + jm_prev)) + boundary
        } else {
            prev * lam / (int::<F>(k) * mu1)
        };
        out.push(c);
        prev = c;
    }
    out
}

/// Mean response time of a small job arriving during phase 3. Returns an
/// error when ℓ = k-1 (the phase is empty; the caller drops the term).
pub fn t3_small<F: Scalar>(k: usize, ell: usize, lambda1: F, mu1: F) -> Result<F> {
    if ell + 1 >= k {
        return Err(Error::policy(
            "phase 3 is empty when ell = k-1; no arrivals are conditioned on it".to_string(),
        ));
    }
    if lambda1 >= int::<F>(k) * mu1 {
        return Err(Error::unstable(format!(
            "small-job side overloaded: lambda1={lambda1} >= k*mu1"
        )));
    }
    let kmu = int::<F>(k) * mu1;
    let tail_tol = lit::<F>(1e-12);
    let mut num = F::zero();
    let mut den = F::zero();
    let mut prev = F::zero();
    let mut j = ell + 1;
    loop {
        let c = if j == ell + 1 {
            debug_assert!(ell + 1 <= k - 1);
            let jm = int::<F>(j) * mu1;
            (lambda1 + jm) / jm
        } else if j <= k {
            let jm = int::<F>(j) * mu1;
            let jm_prev = int::<F>(j - 1) * mu1;
            let boundary = if j <= k - 1 { (lambda1 + jm) / jm } else { F::zero() };
            prev * lambda1 * (lambda1 + jm) / (jm * (lambda1 + jm_prev)) + boundary
        } else {
            prev * lambda1 / kmu
        };
        prev = c;

        let out_rate = lambda1 + int::<F>(j.min(k)) * mu1;
        let weight = c / out_rate;
        let excess = if j + 1 > k { int::<F>(j + 1 - k) } else { F::zero() };
        let response = (int::<F>(k) + excess) / kmu;
        num = num + weight * response;
        den = den + weight;

        if j > k && weight * response < tail_tol * num {
            break;
        }
        // Safety valve; the geometric tail always terminates well before this.
        if j > k + 10_000 {
            break;
        }
        j += 1;
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::SmallRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn hand_values_k2_ell0() {
        // k=2, ell=0, lambda=1, mu=1: C1=2, C2=1.5, C_j = 1.5 (1/2)^{j-2} beyond.
        let c = visit_counts::<f64>(2, 0, 1.0, 1.0, 6);
        assert!((c[0] - 2.0).abs() < 1e-12);
        assert!((c[1] - 1.5).abs() < 1e-12);
        assert!((c[2] - 0.75).abs() < 1e-12);
        assert!((c[3] - 0.375).abs() < 1e-12);
        assert!((c[4] - 0.1875).abs() < 1e-12);
    }

    #[test]
    fn ell_equals_k_minus_one_is_empty() {
        assert!(t3_small::<f64>(4, 3, 0.5, 1.0).is_err());
        let c = visit_counts::<f64>(4, 3, 0.5, 1.0, 8);
        assert!(c.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn light_traffic_limit_is_one_service() {
        // lambda1 -> 0: arrivals see j < k and just serve themselves.
        let t = t3_small::<f64>(8, 2, 1e-9, 1.0).unwrap();
        assert!((t - 1.0).abs() < 1e-6);
    }

    /// Monte-Carlo oracle: simulate the jump chain of the absorbing process
    /// and count visits per state.
    fn mc_visits(k: usize, ell: usize, lambda1: f64, mu1: f64, n_traj: usize, j_max: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = SmallRng::seed_from_u64(seed);
        let mut sums = vec![0.0f64; j_max - ell];
        let mut sumsq = vec![0.0f64; j_max - ell];
        let mut counts = vec![0u32; j_max - ell];
        for _ in 0..n_traj {
            for c in counts.iter_mut() {
                *c = 0;
            }
            let mut state = k - 1;
            while state > ell {
                if state <= j_max {
                    counts[state - ell - 1] += 1;
                }
                let dep = (state.min(k) as f64) * mu1;
                let p_up = lambda1 / (lambda1 + dep);
                if rng.random::<f64>() < p_up {
                    state += 1;
                } else {
                    state -= 1;
                }
            }
            for (i, &c) in counts.iter().enumerate() {
                sums[i] += c as f64;
                sumsq[i] += (c as f64) * (c as f64);
            }
        }
        let n = n_traj as f64;
        let means: Vec<f64> = sums.iter().map(|s| s / n).collect();
        let sigmas: Vec<f64> = sumsq
            .iter()
            .zip(&means)
            .map(|(sq, m)| ((sq / n - m * m).max(0.0) / n).sqrt())
            .collect();
        (means, sigmas)
    }

    #[test]
    fn recursion_matches_monte_carlo_small_case() {
        let (k, ell, lam, mu) = (3usize, 1usize, 1.8, 1.0);
        let j_max = k + 4;
        let exact = visit_counts::<f64>(k, ell, lam, mu, j_max);
        let (mc, sig) = mc_visits(k, ell, lam, mu, 200_000, j_max, 12345);
        for i in 0..exact.len() {
            let dev = (exact[i] - mc[i]).abs();
            assert!(
                dev <= 3.5 * sig[i] + 1e-9,
                "state {}: exact {} mc {} sigma {}",
                ell + 1 + i,
                exact[i],
                mc[i],
                sig[i]
            );
        }
    }
}

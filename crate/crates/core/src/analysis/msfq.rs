//! Mean response time approximation for the threshold policy in the
//! one-or-all case.
//!
//! Writing H₁..H₄ for the four phase durations, B^L / B^S for the large- and
//! small-side busy periods, N₁ᴸ for large jobs present when phase 1 starts
//! and N₂ˢ for small jobs present when phase 2 starts, the transforms close
//! the cycle:
//!
//! ```text
//! H̃₁(s)  = N̂₁ᴸ(B̃ᴸ(s))
//! H̃₂(s)  = N̂₂ˢ(B̃ˢ(s)) · B̃ˢ(s)^{1-k}
//! N̂₁ᴸ(z) = H̃₂(a)·H̃₃(a)·H̃₄(a),              a = λ_k(1-z)
//! N̂₂ˢ(z) = H̃₂(g)·H̃₃(g)·H̃₄(g + λ₁(1-z)),    g = λ_k(1-β(z)), β(z) = B̃ᴸ(λ₁(1-z))
//! ```
//!
//! H₃ and H₄ are the closed-form ladders of [`super::transforms`]. The H₂
//! equation is a fixed point in function space; at the expansion point its
//! first and second derivatives satisfy a *linear* system, which we extract
//! by probing the jet map and solve directly (first moments, then second
//! moments). A damped fixed-point iteration is kept as a cross-check.
//!
//! Response times condition on the arrival phase: exceptional-first-service
//! comparisons for phase-1 large and phase-2 small arrivals, age/excess of
//! the surrounding switch interval for the others, and the absorbing-chain
//! weights of [`super::visits`] for phase-3 small arrivals. The assembly
//! assumes at least one large job at each phase-1 start and at least k small
//! jobs at each phase-2 start; the solver reports how far the solved moments
//! are from honoring that, and the simulator measures the violation
//! frequency directly.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::float::{int, lit, Scalar};

use super::efs::{efs_conditional_work, Moments2};
use super::jet::Jet;
use super::stability::stability_one_or_all;
use super::transforms::{BusyPeriod, DrainLadder, TransitLadder};
use super::visits::t3_small as t3_small_raw;

/// One-or-all system parameters: k servers, small jobs (need 1) at rate
/// `lambda1` with service rate `mu1`, large jobs (need k) at rate `lambdak`
/// with service rate `muk`, and switch threshold `ell`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MsfqParams<F> {
    pub k: usize,
    pub ell: usize,
    pub lambda1: F,
    pub lambdak: F,
    pub mu1: F,
    pub muk: F,
}

impl<F: Scalar> MsfqParams<F> {
    pub fn new(k: usize, ell: usize, lambda1: F, lambdak: F, mu1: F, muk: F) -> Result<Self> {
        if k < 2 {
            return Err(Error::policy("one-or-all analysis needs k >= 2".to_string()));
        }
        if ell > k - 1 {
            return Err(Error::policy(format!("threshold ell={ell} must satisfy 0 <= ell <= k-1={}", k - 1)));
        }
        if lambda1 < F::zero() || lambdak < F::zero() {
            return Err(Error::policy("arrival rates must be nonnegative".to_string()));
        }
        if !(mu1 > F::zero()) || !(muk > F::zero()) {
            return Err(Error::policy("service rates must be positive".to_string()));
        }
        Ok(MsfqParams { k, ell, lambda1, lambdak, mu1, muk })
    }

    pub fn total_rate(&self) -> F {
        self.lambda1 + self.lambdak
    }

    /// 1 - (λ₁/(kμ₁) + λ_k/μ_k); positive iff stabilizable.
    pub fn stability_margin(&self) -> F {
        stability_one_or_all(self.k, self.lambda1, self.lambdak, self.mu1, self.muk).margin
    }

    fn require_analyzable(&self) -> Result<()> {
        if !(self.stability_margin() > F::zero()) {
            return Err(Error::unstable(format!(
                "load {} is not inside the stability region",
                F::one() - self.stability_margin()
            )));
        }
        if !(self.lambda1 > F::zero()) || !(self.lambdak > F::zero()) {
            return Err(Error::policy(
                "the cycle analysis needs both classes present (lambda1 > 0 and lambdak > 0)".to_string(),
            ));
        }
        Ok(())
    }
}

/// First and second moments of the phase durations and phase-start counts,
/// the joint second moments of the switch intervals, and the long-run phase
/// time fractions m₁..m₄.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseMoments<F> {
    pub e_h: [F; 4],
    pub e_h_sq: [F; 4],
    /// E[H₂+H₃+H₄] and E[(H₂+H₃+H₄)²]: the interval large jobs wait out.
    pub e_h234: F,
    pub e_h234_sq: F,
    /// E[H₄+H₁] and E[(H₄+H₁)²]: the interval small jobs wait out (the two
    /// phases are positively correlated; the joint moment comes from N₂ˢ).
    pub e_h41: F,
    pub e_h41_sq: F,
    pub e_n1l: F,
    pub e_n1l_sq: F,
    pub e_n2s: F,
    pub e_n2s_sq: F,
    pub m: [F; 4],
}

/// The transform set for a parameterization: closed-form pieces, the solved
/// jets of the cyclic pieces, and evaluators for all of them.
pub struct MsfqTransforms<F> {
    pub params: MsfqParams<F>,
    bl: BusyPeriod<F>,
    bs: BusyPeriod<F>,
    h3: TransitLadder<F>,
    h4: DrainLadder<F>,
    pub bl_jet: Jet<F>,
    pub bs_jet: Jet<F>,
    pub h1_jet: Jet<F>,
    pub h2_jet: Jet<F>,
    pub h3_jet: Jet<F>,
    pub h4_jet: Jet<F>,
    pub n1l_jet: Jet<F>,
    pub n2s_jet: Jet<F>,
}

/// Jet of H̃₂ reproduced by one pass of the cycle equations, given a trial
/// jet. Affine in the trial derivatives, which is what makes the direct
/// solve below exact.
fn h2_cycle_map<F: Scalar>(
    k: usize,
    lambda1: F,
    lambdak: F,
    bl_jet: Jet<F>,
    bs_jet: Jet<F>,
    h3_jet: Jet<F>,
    h4_jet: Jet<F>,
    y1: F,
    y2: F,
) -> (F, F) {
    let h2 = Jet::prob(y1, y2);
    let beta = bl_jet.compose(Jet::linear(-lambda1));
    let arg_a = Jet::new(F::zero(), -lambdak * beta.d1, -lambdak * beta.d2);
    let arg_b = Jet::new(F::zero(), arg_a.d1 - lambda1, arg_a.d2);
    let n2s = h2.compose(arg_a) * h3_jet.compose(arg_a) * h4_jet.compose(arg_b);
    let h2_next = n2s.compose(bs_jet) * bs_jet.powi(1 - k as i32);
    (h2_next.d1, h2_next.d2)
}

impl<F: Scalar> MsfqTransforms<F> {
    pub fn build(params: MsfqParams<F>) -> Result<Self> {
        params.require_analyzable()?;
        let MsfqParams { k, ell, lambda1, lambdak, mu1, muk } = params;
        let bl = BusyPeriod::new(lambdak, muk)?;
        let bs = BusyPeriod::new(lambda1, int::<F>(k) * mu1)?;
        let h3 = TransitLadder::new(k, ell, lambda1, mu1)?;
        let h4 = DrainLadder::new(ell, mu1);
        let (bl_jet, bs_jet, h3_jet, h4_jet) = (bl.jet(), bs.jet(), h3.jet(), h4.jet());

        // Probe the affine jet map y -> G(y) and solve (I - M) y = c.
        let probe = |y1: F, y2: F| {
            h2_cycle_map(k, lambda1, lambdak, bl_jet, bs_jet, h3_jet, h4_jet, y1, y2)
        };
        let c = probe(F::zero(), F::zero());
        let g1 = probe(F::one(), F::zero());
        let g2 = probe(F::zero(), F::one());
        let m11 = g1.0 - c.0;
        let m12 = g2.0 - c.0;
        let m21 = g1.1 - c.1;
        let m22 = g2.1 - c.1;
        let a11 = F::one() - m11;
        let a22 = F::one() - m22;
        let det = a11 * a22 - m12 * m21;
        if !(det > F::zero()) {
            return Err(Error::unstable(format!(
                "cycle moment system is singular (det={det}); parameters too close to the boundary"
            )));
        }
        let y1 = (c.0 * a22 + m12 * c.1) / det;
        let y2 = (c.1 * a11 + m21 * c.0) / det;
        let h2_jet = Jet::prob(y1, y2);

        let arg0 = Jet::linear(-lambdak);
        let n1l_jet = h2_jet.compose(arg0) * h3_jet.compose(arg0) * h4_jet.compose(arg0);
        let h1_jet = n1l_jet.compose(bl_jet);

        let beta = bl_jet.compose(Jet::linear(-lambda1));
        let arg_a = Jet::new(F::zero(), -lambdak * beta.d1, -lambdak * beta.d2);
        let arg_b = Jet::new(F::zero(), arg_a.d1 - lambda1, arg_a.d2);
        let n2s_jet = h2_jet.compose(arg_a) * h3_jet.compose(arg_a) * h4_jet.compose(arg_b);

        Ok(MsfqTransforms {
            params,
            bl,
            bs,
            h3,
            h4,
            bl_jet,
            bs_jet,
            h1_jet,
            h2_jet,
            h3_jet,
            h4_jet,
            n1l_jet,
            n2s_jet,
        })
    }

    pub fn eval_bl(&self, s: F) -> F {
        self.bl.eval(s)
    }
    pub fn eval_bs(&self, s: F) -> F {
        self.bs.eval(s)
    }
    pub fn eval_h3(&self, s: F) -> F {
        self.h3.eval(s)
    }
    pub fn eval_h4(&self, s: F) -> F {
        self.h4.eval(s)
    }
    fn beta(&self, z: F) -> F {
        self.bl.eval(self.params.lambda1 * (F::one() - z))
    }

    /// H̃₂(s) by unrolling the cycle equation: H̃₂(s) = H̃₂(g(s))·K(s) with
    /// g(s) = λ_k(1-β(B̃ˢ(s))). Under stability g contracts toward 0 with
    /// factor λ₁λ_k E[Bᴸ]E[Bˢ] < 1, so the product converges geometrically.
    pub fn eval_h2(&self, s: F) -> F {
        let p = &self.params;
        let mut prod = F::one();
        let mut x = s;
        let floor = lit::<F>(1e-18);
        for _ in 0..200_000 {
            if x.abs() < floor {
                break;
            }
            let z = self.bs.eval(x);
            let g = p.lambdak * (F::one() - self.beta(z));
            prod = prod
                * self.h3.eval(g)
                * self.h4.eval(g + p.lambda1 * (F::one() - z))
                * z.powi(1 - p.k as i32);
            x = g;
        }
        prod
    }

    pub fn eval_n1l(&self, z: F) -> F {
        let a = self.params.lambdak * (F::one() - z);
        self.eval_h2(a) * self.h3.eval(a) * self.h4.eval(a)
    }

    pub fn eval_n2s(&self, z: F) -> F {
        let p = &self.params;
        let g = p.lambdak * (F::one() - self.beta(z));
        self.eval_h2(g) * self.h3.eval(g) * self.h4.eval(g + p.lambda1 * (F::one() - z))
    }

    pub fn eval_h1(&self, s: F) -> F {
        self.eval_n1l(self.bl.eval(s))
    }

    /// Extract all phase moments from the solved jets. The joint second
    /// moments of the switch intervals come from inverting the Poisson-count
    /// relation E[N(N-1)] = λ²E[T²] over the respective interval.
    pub fn phase_moments(&self) -> PhaseMoments<F> {
        let p = &self.params;
        let e_h = [
            self.h1_jet.mean_laplace(),
            self.h2_jet.mean_laplace(),
            self.h3_jet.mean_laplace(),
            self.h4_jet.mean_laplace(),
        ];
        let e_h_sq = [
            self.h1_jet.second_laplace(),
            self.h2_jet.second_laplace(),
            self.h3_jet.second_laplace(),
            self.h4_jet.second_laplace(),
        ];
        let total = e_h[0] + e_h[1] + e_h[2] + e_h[3];
        let m = [e_h[0] / total, e_h[1] / total, e_h[2] / total, e_h[3] / total];
        PhaseMoments {
            e_h,
            e_h_sq,
            e_h234: e_h[1] + e_h[2] + e_h[3],
            e_h234_sq: self.n1l_jet.d2 / (p.lambdak * p.lambdak),
            e_h41: e_h[3] + e_h[0],
            e_h41_sq: self.n2s_jet.d2 / (p.lambda1 * p.lambda1),
            e_n1l: self.n1l_jet.mean_z(),
            e_n1l_sq: self.n1l_jet.second_z(),
            e_n2s: self.n2s_jet.mean_z(),
            e_n2s_sq: self.n2s_jet.second_z(),
            m,
        }
    }
}

/// Solve the cyclic moment system directly.
pub fn solve_phase_moments<F: Scalar>(params: MsfqParams<F>) -> Result<PhaseMoments<F>> {
    Ok(MsfqTransforms::build(params)?.phase_moments())
}

/// Damped fixed-point cross-check of the same system. Returns the moments
/// plus the final residual and iteration count.
pub fn solve_phase_moments_fixed_point<F: Scalar>(
    params: MsfqParams<F>,
    tol: F,
    max_iter: usize,
) -> Result<(PhaseMoments<F>, F, usize)> {
    params.require_analyzable()?;
    let MsfqParams { k, ell, lambda1, lambdak, mu1, muk } = params;
    let bl_jet = BusyPeriod::new(lambdak, muk)?.jet();
    let bs_jet = BusyPeriod::new(lambda1, int::<F>(k) * mu1)?.jet();
    let h3_jet = TransitLadder::new(k, ell, lambda1, mu1)?.jet();
    let h4_jet = DrainLadder::new(ell, mu1).jet();

    let damping = lit::<F>(0.7);
    let mut y1 = F::zero();
    let mut y2 = F::zero();
    let mut residual = F::infinity();
    let mut iterations = max_iter;
    for it in 1..=max_iter {
        let (g1, g2) = h2_cycle_map(k, lambda1, lambdak, bl_jet, bs_jet, h3_jet, h4_jet, y1, y2);
        let r1 = (g1 - y1).abs() / (F::one() + y1.abs());
        let r2 = (g2 - y2).abs() / (F::one() + y2.abs());
        residual = r1.max(r2);
        y1 = y1 + damping * (g1 - y1);
        y2 = y2 + damping * (g2 - y2);
        if residual < tol {
            iterations = it;
            break;
        }
    }
    if !(residual < tol) {
        return Err(Error::NonConvergence {
            residual: residual.to_f64().unwrap_or(f64::NAN),
            iterations: max_iter,
        });
    }
    // Rebuild the dependent jets from the converged H2 jet.
    let h2_jet = Jet::prob(y1, y2);
    let arg0 = Jet::linear(-lambdak);
    let n1l_jet = h2_jet.compose(arg0) * h3_jet.compose(arg0) * h4_jet.compose(arg0);
    let h1_jet = n1l_jet.compose(bl_jet);
    let beta = bl_jet.compose(Jet::linear(-lambda1));
    let arg_a = Jet::new(F::zero(), -lambdak * beta.d1, -lambdak * beta.d2);
    let arg_b = Jet::new(F::zero(), arg_a.d1 - lambda1, arg_a.d2);
    let n2s_jet = h2_jet.compose(arg_a) * h3_jet.compose(arg_a) * h4_jet.compose(arg_b);

    let e_h = [
        h1_jet.mean_laplace(),
        h2_jet.mean_laplace(),
        h3_jet.mean_laplace(),
        h4_jet.mean_laplace(),
    ];
    let total = e_h[0] + e_h[1] + e_h[2] + e_h[3];
    let pm = PhaseMoments {
        e_h,
        e_h_sq: [
            h1_jet.second_laplace(),
            h2_jet.second_laplace(),
            h3_jet.second_laplace(),
            h4_jet.second_laplace(),
        ],
        e_h234: e_h[1] + e_h[2] + e_h[3],
        e_h234_sq: n1l_jet.d2 / (lambdak * lambdak),
        e_h41: e_h[3] + e_h[0],
        e_h41_sq: n2s_jet.d2 / (lambda1 * lambda1),
        e_n1l: n1l_jet.mean_z(),
        e_n1l_sq: n1l_jet.second_z(),
        e_n2s: n2s_jet.mean_z(),
        e_n2s_sq: n2s_jet.second_z(),
        m: [e_h[0] / total, e_h[1] / total, e_h[2] / total, e_h[3] / total],
    };
    Ok((pm, residual, iterations))
}

/// Mean response time of large jobs arriving in phase 1, via the
/// exceptional-first-service comparison with S' = N₁ᴸ copies of S_k.
pub fn t1_large<F: Scalar>(params: &MsfqParams<F>, pm: &PhaseMoments<F>) -> Result<F> {
    let s = Moments2::exponential(params.muk);
    let sp = Moments2::new(
        pm.e_n1l / params.muk,
        (pm.e_n1l_sq + pm.e_n1l) / (params.muk * params.muk),
    );
    Ok(efs_conditional_work(params.lambdak, s, sp)? + F::one() / params.muk)
}

/// Mean response time of small jobs arriving in phase 2, via the same
/// comparison with service S₁/k and count N₂ˢ-k+1.
pub fn t2_small<F: Scalar>(params: &MsfqParams<F>, pm: &PhaseMoments<F>) -> Result<F> {
    let kmu = int::<F>(params.k) * params.mu1;
    let kf = int::<F>(params.k);
    let s = Moments2::exponential(kmu);
    let m1 = (pm.e_n2s - kf + F::one()) / kmu;
    let m2 = (pm.e_n2s_sq - (lit::<F>(2.0) * kf - lit::<F>(3.0)) * pm.e_n2s + kf * kf
        - lit::<F>(3.0) * kf
        + lit::<F>(2.0))
        / (kmu * kmu);
    Ok(efs_conditional_work(params.lambda1, s, Moments2::new(m1, m2))? + F::one() / params.mu1)
}

/// Age/excess terms: mean response of large jobs arriving in phases 2-4 and
/// of small jobs arriving in phases 4 or 1.
pub fn t_excess<F: Scalar>(params: &MsfqParams<F>, pm: &PhaseMoments<F>) -> Result<(F, F)> {
    if !(pm.e_h234 > F::zero()) || !(pm.e_h41 > F::zero()) {
        return Err(Error::unstable(
            "degenerate switch interval: nonpositive mean length".to_string(),
        ));
    }
    let two = lit::<F>(2.0);
    let large = (params.lambdak / params.muk + F::one()) * pm.e_h234_sq / (two * pm.e_h234)
        + F::one() / params.muk;
    let small = (params.lambda1 / (int::<F>(params.k) * params.mu1) + F::one()) * pm.e_h41_sq
        / (two * pm.e_h41)
        + F::one() / params.mu1;
    Ok((large, small))
}

/// Mean response time of small jobs arriving in phase 3; `None` when
/// ℓ = k-1 and the phase is empty (the caller drops the term, whose phase
/// fraction m₃ is zero).
pub fn t3_small<F: Scalar>(params: &MsfqParams<F>) -> Result<Option<F>> {
    if params.ell == params.k - 1 {
        return Ok(None);
    }
    t3_small_raw(params.k, params.ell, params.lambda1, params.mu1).map(Some)
}

/// Full analytic output: phase moments, per-phase conditional response
/// times, per-class and overall means, and the load-weighted mean.
#[derive(Debug, Clone, Serialize)]
pub struct MsfqAnalysis<F> {
    pub params: MsfqParams<F>,
    pub moments: PhaseMoments<F>,
    pub t1_large: F,
    pub t234_large: F,
    pub t14_small: F,
    pub t2_small: F,
    pub t3_small: Option<F>,
    /// Per-class conditional mixes: E[T] of small jobs and of large jobs.
    pub e_t_small: F,
    pub e_t_large: F,
    pub e_t: F,
    pub e_t_weighted: F,
    /// Solved E[N₁ᴸ] ≥ 1: the phase-1 approximation is self-consistent.
    pub assumes_large_present: bool,
    /// Solved E[N₂ˢ] ≥ k: the phase-2 approximation is self-consistent.
    pub assumes_small_backlog: bool,
}

pub fn analyze_msfq<F: Scalar>(params: MsfqParams<F>) -> Result<MsfqAnalysis<F>> {
    let transforms = MsfqTransforms::build(params)?;
    let pm = transforms.phase_moments();
    let t1 = t1_large(&params, &pm)?;
    let (t234, t14) = t_excess(&params, &pm)?;
    let t2 = t2_small(&params, &pm)?;
    let t3 = t3_small(&params)?;
    let m = pm.m;

    let e_t_large = t1 * m[0] + t234 * (m[1] + m[2] + m[3]);
    let mut e_t_small = t14 * (m[0] + m[3]) + t2 * m[1];
    if let Some(t3v) = t3 {
        e_t_small = e_t_small + t3v * m[2];
    }
    let lambda = params.total_rate();
    let e_t = (params.lambdak / lambda) * e_t_large + (params.lambda1 / lambda) * e_t_small;
    let rho_small = params.lambda1 / params.mu1;
    let rho_large = int::<F>(params.k) * params.lambdak / params.muk;
    let e_t_weighted = (rho_small * e_t_small + rho_large * e_t_large) / (rho_small + rho_large);

    Ok(MsfqAnalysis {
        params,
        t1_large: t1,
        t234_large: t234,
        t14_small: t14,
        t2_small: t2,
        t3_small: t3,
        e_t_small,
        e_t_large,
        e_t,
        e_t_weighted,
        assumes_large_present: pm.e_n1l >= F::one(),
        assumes_small_backlog: pm.e_n2s >= int::<F>(params.k),
        moments: pm,
    })
}

//! Second-order jets: (value, first derivative, second derivative) of a
//! transform at its expansion point.
//!
//! A Laplace–Stieltjes transform expanded at `s = 0` has jet
//! `(1, -E[X], E[X^2])`; a z-transform expanded at `z = 1` has jet
//! `(1, E[N], E[N(N-1)])`. Products and compositions of jets follow the
//! Leibniz and chain rules, so moments propagate exactly to second order
//! through arbitrarily deep transform compositions — no symbolic
//! differentiation and no finite-difference noise.

use std::ops::{Add, Mul, Sub};

use crate::float::{int, lit, Scalar};

/// Value and first two derivatives of a function at a fixed expansion point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet<F> {
    pub v: F,
    pub d1: F,
    pub d2: F,
}

impl<F: Scalar> Jet<F> {
    pub fn new(v: F, d1: F, d2: F) -> Self {
        Jet { v, d1, d2 }
    }

    /// Jet of the constant-one function.
    pub fn one() -> Self {
        Jet::new(F::one(), F::zero(), F::zero())
    }

    /// Jet of a probability transform with the given derivatives (value 1).
    pub fn prob(d1: F, d2: F) -> Self {
        Jet::new(F::one(), d1, d2)
    }

    /// Laplace jet of a distribution with the given first two moments.
    pub fn laplace_from_moments(m1: F, m2: F) -> Self {
        Jet::new(F::one(), -m1, m2)
    }

    /// Jet of the inner map `x ↦ c·x` (relative to the expansion point).
    pub fn linear(c: F) -> Self {
        Jet::new(F::zero(), c, F::zero())
    }

    /// E[X] read off a Laplace jet at 0.
    pub fn mean_laplace(&self) -> F {
        -self.d1
    }

    /// E[X²] read off a Laplace jet at 0.
    pub fn second_laplace(&self) -> F {
        self.d2
    }

    /// E[N] read off a z-jet at 1.
    pub fn mean_z(&self) -> F {
        self.d1
    }

    /// E[N²] read off a z-jet at 1 (d2 is the second factorial moment).
    pub fn second_z(&self) -> F {
        self.d2 + self.d1
    }

    /// Chain rule: jet of `self ∘ inner`. `inner`'s value at the expansion
    /// point must equal the point `self` is expanded at; only its derivatives
    /// enter the result.
    pub fn compose(&self, inner: Jet<F>) -> Self {
        Jet {
            v: self.v,
            d1: self.d1 * inner.d1,
            d2: self.d2 * inner.d1 * inner.d1 + self.d1 * inner.d2,
        }
    }

    /// Jet of `1/self`.
    pub fn recip(&self) -> Self {
        let v2 = self.v * self.v;
        let v3 = v2 * self.v;
        Jet {
            v: F::one() / self.v,
            d1: -self.d1 / v2,
            d2: (lit::<F>(2.0) * self.d1 * self.d1 - self.v * self.d2) / v3,
        }
    }

    /// Jet of `self^n` for any integer n (value must be nonzero for n < 0).
    pub fn powi(&self, n: i32) -> Self {
        let nf = if n >= 0 {
            int::<F>(n as usize)
        } else {
            -int::<F>((-n) as usize)
        };
        let vp = self.v.powi(n);
        let vp1 = self.v.powi(n - 1);
        let vp2 = self.v.powi(n - 2);
        Jet {
            v: vp,
            d1: nf * vp1 * self.d1,
            d2: nf * (nf - F::one()) * vp2 * self.d1 * self.d1 + nf * vp1 * self.d2,
        }
    }
}

impl<F: Scalar> Add for Jet<F> {
    type Output = Jet<F>;
    fn add(self, rhs: Jet<F>) -> Jet<F> {
        Jet::new(self.v + rhs.v, self.d1 + rhs.d1, self.d2 + rhs.d2)
    }
}

impl<F: Scalar> Sub for Jet<F> {
    type Output = Jet<F>;
    fn sub(self, rhs: Jet<F>) -> Jet<F> {
        Jet::new(self.v - rhs.v, self.d1 - rhs.d1, self.d2 - rhs.d2)
    }
}

impl<F: Scalar> Mul for Jet<F> {
    type Output = Jet<F>;
    fn mul(self, rhs: Jet<F>) -> Jet<F> {
        Jet {
            v: self.v * rhs.v,
            d1: self.v * rhs.d1 + self.d1 * rhs.v,
            d2: self.v * rhs.d2 + lit::<F>(2.0) * self.d1 * rhs.d1 + self.d2 * rhs.v,
        }
    }
}

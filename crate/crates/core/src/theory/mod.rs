//! Closed-form quantities for the mixture model: alternative and marginal
//! p-value CDFs, the LORD renewal rate `A(G, beta)` and the LOND
//! discovery lower bound.

pub mod special;

use crate::error::{invalid, Result};
use crate::scalar::{CompensatedSum, Real};
use crate::schedule::BetaSchedule;

use special::{normal_cdf, normal_isf};

/// Two-sided Gaussian alternative `theta = mu`, non-null with probability `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlternativeModel<T> {
    pub mu: T,
    pub epsilon: T,
}

impl<T: Real> AlternativeModel<T> {
    pub fn new(mu: T, epsilon: T) -> Result<Self> {
        if !mu.is_finite() {
            return invalid("mu", mu, "alternative mean must be finite");
        }
        if !(epsilon >= T::zero() && epsilon <= T::one()) {
            return invalid("epsilon", epsilon, "non-null probability must lie in [0, 1]");
        }
        Ok(Self { mu, epsilon })
    }
}

fn check_level<T: Real>(name: &'static str, x: T, open_at_zero: bool) -> Result<()> {
    let low_ok = if open_at_zero { x > T::zero() } else { x >= T::zero() };
    if low_ok && x <= T::one() {
        Ok(())
    } else {
        invalid(name, x, "argument must be a level in [0, 1]")
    }
}

/// `F(nu) = 2 - Phi(zeta + mu) - Phi(zeta - mu)` with `zeta = Phi^-1(1 - nu/2)`.
///
/// Evaluated as `Phi(-zeta - mu) + Phi(mu - zeta)` to keep precision at small `nu`.
pub fn alt_cdf<T: Real>(nu: T, model: &AlternativeModel<T>) -> Result<T> {
    check_level("nu", nu, true)?;
    let zeta = normal_isf(nu / T::lit(2.0))?;
    Ok((normal_cdf(-zeta - model.mu) + normal_cdf(model.mu - zeta)).min(T::one()))
}

/// Small-`nu` lower bound `(nu/4) exp(-mu^2/2) exp(mu sqrt(log(2/nu)))` on [`alt_cdf`].
pub fn alt_cdf_lower_bound<T: Real>(nu: T, model: &AlternativeModel<T>) -> Result<T> {
    check_level("nu", nu, true)?;
    let mu = model.mu;
    Ok(nu / T::lit(4.0) * (-(mu * mu) / T::lit(2.0)).exp() * (mu * (T::lit(2.0) / nu).ln().sqrt()).exp())
}

/// `G(x) = (1 - epsilon) x + epsilon F(x)`.
pub fn marginal_cdf<T: Real>(x: T, model: &AlternativeModel<T>) -> Result<T> {
    check_level("x", x, false)?;
    if x == T::zero() {
        return Ok(T::zero());
    }
    Ok((T::one() - model.epsilon) * x + model.epsilon * alt_cdf(x, model)?)
}

/// Truncation control for the renewal series.
pub const RATE_REL_TOL: f64 = 1e-12;
pub const RATE_MAX_TERMS: u64 = 100_000_000;

/// Value of `A(G, beta)` with its truncation certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LordRate<T> {
    /// `min(1, 1 / series)`.
    pub rate: T,
    /// `sum_k exp(-sum_{l<=k} G(beta_l))`, truncated.
    pub series: T,
    /// Geometric estimate of the omitted tail.
    pub tail_bound: T,
    pub terms: u64,
    /// False if the term cap was hit before the tail criterion held.
    pub converged: bool,
}

/// `A = (sum_{k>=1} exp(-sum_{l<=k} h_l))^-1` for an arbitrary hazard sequence `h_l = hazard(l)`.
///
/// Stops once the geometric tail `term r / (1 - r)`, `r = exp(-h_k)`, drops
/// below `RATE_REL_TOL` of the running total.
pub fn lord_rate_from_hazard<T, F>(mut hazard: F, max_terms: u64) -> Result<LordRate<T>>
where
    T: Real,
    F: FnMut(u64) -> Result<T>,
{
    let tol = T::lit(RATE_REL_TOL);
    let mut exponent = CompensatedSum::<T>::new();
    let mut series = CompensatedSum::<T>::new();
    let mut tail = T::infinity();
    let mut k = 0;
    let mut converged = false;
    while k < max_terms {
        k += 1;
        let h = hazard(k)?;
        exponent.add(h);
        let term = (-exponent.value()).exp();
        series.add(term);
        let r = (-h).exp();
        tail = if r < T::one() { term * r / (T::one() - r) } else { T::infinity() };
        if tail <= tol * series.value() {
            converged = true;
            break;
        }
    }
    let total = series.value();
    Ok(LordRate { rate: total.recip().min(T::one()), series: total, tail_bound: tail, terms: k, converged })
}

/// `A(G, beta)` for LORD under the mixture model.
pub fn lord_rate<T: Real>(schedule: &BetaSchedule<T>, model: &AlternativeModel<T>) -> Result<LordRate<T>> {
    let cap = schedule.horizon().map_or(RATE_MAX_TERMS, |h| h.min(RATE_MAX_TERMS));
    lord_rate_from_hazard(|l| marginal_cdf(schedule.eval(l)?, model), cap)
}

/// Mean gap between LORD discoveries, `1 + sum_{k>=1} prod_{l<=k} (1 - h_l)`,
/// for the renewal process whose `k`-th step after a discovery rejects with
/// probability `h_k`. Same truncation rule as [`lord_rate_from_hazard`].
pub fn renewal_mean_gap<T, F>(mut hazard: F, max_terms: u64) -> Result<(T, bool)>
where
    T: Real,
    F: FnMut(u64) -> Result<T>,
{
    let tol = T::lit(RATE_REL_TOL);
    let mut log_survival = CompensatedSum::<T>::new();
    let mut mean = CompensatedSum::<T>::new();
    mean.add(T::one());
    for k in 1..=max_terms {
        let h = hazard(k)?;
        if h >= T::one() {
            return Ok((mean.value(), true));
        }
        log_survival.add((-h).ln_1p());
        let survival = log_survival.value().exp();
        mean.add(survival);
        let r = T::one() - h;
        if survival * r / h <= tol * mean.value() {
            return Ok((mean.value(), true));
        }
    }
    Ok((mean.value(), false))
}

/// Parameters of the LOND discovery lower bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBoundParams<T> {
    /// `F(x) >= lambda x^kappa` near zero.
    pub lambda: T,
    pub kappa: T,
    /// Power-law exponent of `beta`, `1 < nu < 1/kappa`.
    pub nu: T,
    /// Constant from the bound's proof; not computable in closed form.
    pub c_tilde: T,
    pub delta: T,
}

impl<T: Real> RateBoundParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > T::zero()) {
            return invalid("lambda", self.lambda, "lambda must be positive");
        }
        if !(self.kappa > T::zero() && self.kappa < T::one()) {
            return invalid("kappa", self.kappa, "kappa must lie in (0, 1)");
        }
        if !(self.nu > T::one() && self.kappa * self.nu < T::one()) {
            return invalid("nu", self.nu, "need 1 < nu < 1/kappa");
        }
        if !(self.c_tilde > T::zero()) || !self.c_tilde.is_finite() {
            return invalid("c_tilde", self.c_tilde, "constant must be positive");
        }
        if !(self.delta > T::zero() && self.delta < T::one()) {
            return invalid("delta", self.delta, "delta must lie in (0, 1)");
        }
        Ok(())
    }

    /// `(1 - kappa nu) / (1 - kappa)`.
    pub fn exponent(&self) -> T {
        (T::one() - self.kappa * self.nu) / (T::one() - self.kappa)
    }
}

/// `(delta n / C~)^((1 - kappa nu) / (1 - kappa))`: with probability at least
/// `1 - delta`, LOND makes at least this many discoveries in `n` steps.
pub fn lond_rate_bound<T: Real>(params: &RateBoundParams<T>, n: u64) -> Result<T> {
    params.validate()?;
    if n == 0 {
        return invalid("n", n, "n must be positive");
    }
    Ok((params.delta * T::from_count(n) / params.c_tilde).powf(params.exponent()))
}

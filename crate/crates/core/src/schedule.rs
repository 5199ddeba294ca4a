//! Nonnegative level sequences `beta_l` with total mass `alpha`.
//!
//! Every family is `beta_l = alpha * w(l) / S`, where `w` is the family's
//! unnormalized weight and `S = sum_l w(l)`. With a finite horizon `n`
//! the sum runs to `n` and is exact up to rounding. Otherwise `S` is a
//! partial sum plus a two-sided bound on the remaining tail: for a
//! decreasing convex weight,
//!
//! ```text
//! int_{N+1}^inf w + w(N+1)/2  <=  sum_{l>N} w(l)  <=  int_{N+1/2}^inf w
//! ```
//!
//! The upper end of the bracket is used for normalization, so the true
//! mass never exceeds `alpha`; its distance below `alpha` is recorded on
//! the schedule and kept under `1e-9 * alpha`.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::scalar::{CompensatedSum, Real};

/// Relative bracket width aimed for before giving up on more terms.
const TARGET_REL_WIDTH: f64 = 1e-10;
/// Hard acceptance bound on the relative mass error.
pub const MASS_TOLERANCE: f64 = 1e-9;
const MIN_TERMS: u64 = 1 << 10;
pub const MAX_TERMS: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `w(l) = l^-a`, `a > 1`.
    PowerLaw { a: f64 },
    /// `w(l) = 1 / (l log^nu(max(l, 2)))`, `nu > 1`.
    LogPower { nu: f64 },
    /// `w(l) = log(l) / l^(1/kappa)`, `kappa in (0, 1)`. Note `w(1) = 0`.
    Example1 { kappa: f64 },
    /// `w(l) = 1 / (l log^a(l + 1))`, `a > 1`.
    Example2 { a: f64 },
}

impl Family {
    fn validate(&self) -> Result<()> {
        match *self {
            Family::PowerLaw { a } if !(a > 1.0) || !a.is_finite() => invalid("a", a, "power law needs a > 1"),
            Family::LogPower { nu } if !(nu > 1.0) || !nu.is_finite() => {
                invalid("nu", nu, "log-power family needs nu > 1")
            }
            Family::Example1 { kappa } if !(kappa > 0.0 && kappa < 1.0) => {
                invalid("kappa", kappa, "example 1 needs kappa in (0, 1)")
            }
            Family::Example2 { a } if !(a > 1.0) || !a.is_finite() => invalid("a", a, "example 2 needs a > 1"),
            _ => Ok(()),
        }
    }

    /// Unnormalized weight `w(l)`.
    pub fn weight(&self, ell: f64) -> f64 {
        match *self {
            Family::PowerLaw { a } => ell.powf(-a),
            Family::LogPower { nu } => 1.0 / (ell * ell.max(2.0).ln().powf(nu)),
            Family::Example1 { kappa } => ell.ln() * ell.powf(-1.0 / kappa),
            Family::Example2 { a } => 1.0 / (ell * ell.ln_1p().powf(a)),
        }
    }

    /// Bounds `(lower, upper)` on `int_x^inf w(t) dt`, for `x >= 2`.
    fn tail_integral(&self, x: f64) -> (f64, f64) {
        match *self {
            Family::PowerLaw { a } => {
                let v = x.powf(1.0 - a) / (a - 1.0);
                (v, v)
            }
            Family::LogPower { nu } => {
                let v = x.ln().powf(1.0 - nu) / (nu - 1.0);
                (v, v)
            }
            Family::Example1 { kappa } => {
                let p = 1.0 / kappa;
                let v = x.powf(1.0 - p) * (x.ln() / (p - 1.0) + 1.0 / ((p - 1.0) * (p - 1.0)));
                (v, v)
            }
            Family::Example2 { a } => {
                // With t = e^u: int_U^inf (u + log1p(e^-u))^-a du, U = log x.
                let u = x.ln();
                let upper = u.powf(1.0 - a) / (a - 1.0);
                let slack = a * (-u).exp() * u.powf(-a - 1.0);
                (upper - slack, upper)
            }
        }
    }

    /// First index from which the weight is strictly decreasing.
    pub fn monotone_from(&self) -> u64 {
        match *self {
            // log(x) x^-p decreases for x > e^(1/p) = e^kappa.
            Family::Example1 { kappa } => (kappa.exp().floor() as u64 + 1).max(2),
            _ => 2,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::PowerLaw { a } => write!(f, "power_law(a={a})"),
            Family::LogPower { nu } => write!(f, "log_power(nu={nu})"),
            Family::Example1 { kappa } => write!(f, "example1(kappa={kappa})"),
            Family::Example2 { a } => write!(f, "example2(a={a})"),
        }
    }
}

/// Bracketed value of the weight sum `S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSum {
    pub lower: f64,
    pub upper: f64,
    /// Number of explicitly summed terms.
    pub terms: u64,
}

impl WeightSum {
    pub fn relative_width(&self) -> f64 {
        (self.upper - self.lower) / self.lower
    }
}

/// Sum of the family weights, over `1..=horizon` or to infinity.
pub fn weight_sum(family: &Family, horizon: Option<u64>) -> Result<WeightSum> {
    family.validate()?;
    if let Some(n) = horizon {
        let s = (1..=n).map(|l| family.weight(l as f64)).collect::<CompensatedSum<f64>>().value();
        // Headroom for rounding in the scaled levels, so their float sum stays <= alpha.
        return Ok(WeightSum { lower: s, upper: s * (1.0 + 8.0 * f64::EPSILON), terms: n });
    }
    let mut partial = CompensatedSum::<f64>::new();
    let mut summed = 0u64;
    let mut target = MIN_TERMS;
    loop {
        while summed < target {
            summed += 1;
            partial.add(family.weight(summed as f64));
        }
        let n = summed as f64;
        let (lo_int, _) = family.tail_integral(n + 1.0);
        let (_, hi_int) = family.tail_integral(n + 0.5);
        let head = partial.value();
        let bracket =
            WeightSum { lower: head + lo_int + family.weight(n + 1.0) / 2.0, upper: head + hi_int, terms: summed };
        let width = bracket.relative_width();
        if width <= TARGET_REL_WIDTH || summed >= MAX_TERMS {
            if width > MASS_TOLERANCE {
                return Err(Error::NormalizerTolerance { width, terms: summed });
            }
            return Ok(bracket);
        }
        target = (target * 2).min(MAX_TERMS);
    }
}

/// Immutable level schedule `beta_1, beta_2, ...`.
#[derive(Debug, Clone)]
pub struct BetaSchedule<T> {
    family: Family,
    alpha: T,
    horizon: Option<u64>,
    sum: WeightSum,
    scale: f64,
    prefix: Vec<T>,
}

impl<T: Real> BetaSchedule<T> {
    pub fn new(family: Family, alpha: T, horizon: Option<u64>) -> Result<Self> {
        if !(alpha > T::zero() && alpha < T::one()) {
            return invalid("alpha", alpha, "alpha must lie in (0, 1)");
        }
        if horizon == Some(0) {
            return invalid("horizon", 0, "horizon must be positive");
        }
        let sum = weight_sum(&family, horizon)?;
        if !(sum.upper > 0.0) {
            return invalid("horizon", horizon.unwrap_or(0), "all weights vanish within the horizon");
        }
        Ok(Self { family, alpha, horizon, sum, scale: alpha.as_f64() / sum.upper, prefix: Vec::new() })
    }

    /// `beta_l = C / l^a`.
    pub fn power_law(alpha: T, a: f64, horizon: Option<u64>) -> Result<Self> {
        Self::new(Family::PowerLaw { a }, alpha, horizon)
    }

    /// `beta_l = C / (l log^nu(max(l, 2)))`.
    pub fn log_power(alpha: T, nu: f64, horizon: Option<u64>) -> Result<Self> {
        Self::new(Family::LogPower { nu }, alpha, horizon)
    }

    /// `beta_l = alpha log(l) / (C_* l^(1/kappa))`.
    pub fn example1(alpha: T, kappa: f64) -> Result<Self> {
        Self::new(Family::Example1 { kappa }, alpha, None)
    }

    /// `beta_l = alpha / (C_* l log^a(l + 1))`.
    pub fn example2(alpha: T, a: f64) -> Result<Self> {
        Self::new(Family::Example2 { a }, alpha, None)
    }

    /// Precomputes `beta_1..=beta_n` so that [`eval`](Self::eval) is a table lookup.
    pub fn with_prefix_cache(mut self, n: u64) -> Self {
        let n = self.horizon.map_or(n, |h| h.min(n));
        self.prefix = (1..=n).map(|l| self.compute(l)).collect();
        self
    }

    fn compute(&self, ell: u64) -> T {
        T::lit(self.scale * self.family.weight(ell as f64))
    }

    /// `beta_ell` for `ell >= 1`.
    pub fn eval(&self, ell: u64) -> Result<T> {
        if ell == 0 {
            return invalid("ell", 0, "schedule is indexed from 1");
        }
        if let Some(h) = self.horizon {
            if ell > h {
                return Err(Error::OutOfHorizon { ell, horizon: h });
            }
        }
        Ok(match self.prefix.get(ell as usize - 1) {
            Some(&b) => b,
            None => self.compute(ell),
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn horizon(&self) -> Option<u64> {
        self.horizon
    }

    pub fn weight_sum(&self) -> WeightSum {
        self.sum
    }

    /// The family's named constant: `C` for the power-law and log-power
    /// families (`beta_l = C w(l)`), `C_*` for the two worked examples
    /// (`beta_l = alpha w(l) / C_*`).
    pub fn normalizer(&self) -> f64 {
        match self.family {
            Family::PowerLaw { .. } | Family::LogPower { .. } => self.scale,
            Family::Example1 { .. } | Family::Example2 { .. } => self.sum.upper,
        }
    }

    /// Bracket `(lower, upper)` on the total mass `sum_l beta_l`.
    pub fn mass_bracket(&self) -> (f64, f64) {
        let alpha = self.alpha.as_f64();
        (alpha * self.sum.lower / self.sum.upper, alpha)
    }

    pub fn descriptor(&self) -> ScheduleDescriptor {
        ScheduleDescriptor { family: self.family, alpha: Some(self.alpha.as_f64()), horizon: self.horizon }
    }
}

/// Text form of a schedule, e.g. `log_power(nu=2)` or
/// `power_law(a=2,alpha=0.05,horizon=1000)`. A missing `alpha` is filled
/// from the surrounding experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleDescriptor {
    pub family: Family,
    pub alpha: Option<f64>,
    pub horizon: Option<u64>,
}

impl ScheduleDescriptor {
    pub fn build<T: Real>(&self, default_alpha: T) -> Result<BetaSchedule<T>> {
        let alpha = self.alpha.map(T::lit).unwrap_or(default_alpha);
        BetaSchedule::new(self.family, alpha, self.horizon)
    }
}

impl Default for ScheduleDescriptor {
    fn default() -> Self {
        Self { family: Family::LogPower { nu: 2.0 }, alpha: None, horizon: None }
    }
}

impl fmt::Display for ScheduleDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let family = self.family.to_string();
        let mut out = family.trim_end_matches(')').to_string();
        if let Some(alpha) = self.alpha {
            out.push_str(&format!(",alpha={alpha}"));
        }
        if let Some(h) = self.horizon {
            out.push_str(&format!(",horizon={h}"));
        }
        write!(f, "{out})")
    }
}

impl FromStr for ScheduleDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("malformed schedule descriptor `{s}`"));
        let s = s.trim();
        let (name, rest) = s.split_once('(').ok_or_else(bad)?;
        let body = rest.strip_suffix(')').ok_or_else(bad)?;
        let mut param = None;
        let mut alpha = None;
        let mut horizon = None;
        for kv in body.split(',').map(str::trim).filter(|kv| !kv.is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(bad)?;
            let num = || v.trim().parse::<f64>().map_err(|_| bad());
            match k.trim() {
                "alpha" => alpha = Some(num()?),
                "horizon" => match v.trim() {
                    "inf" | "none" => horizon = None,
                    h => horizon = Some(h.parse::<u64>().map_err(|_| bad())?),
                },
                "a" | "nu" | "kappa" => param = Some((k.trim().to_string(), num()?)),
                _ => return Err(bad()),
            }
        }
        let family = match (name.trim(), param) {
            ("power_law", Some((k, a))) if k == "a" => Family::PowerLaw { a },
            ("log_power", Some((k, nu))) if k == "nu" => Family::LogPower { nu },
            ("log_power", None) => Family::LogPower { nu: 2.0 },
            ("example1", Some((k, kappa))) if k == "kappa" => Family::Example1 { kappa },
            ("example2", Some((k, a))) if k == "a" => Family::Example2 { a },
            _ => return Err(bad()),
        };
        family.validate()?;
        Ok(Self { family, alpha, horizon })
    }
}

//! Online decision rules.
//!
//! Each rule maps the next p-value to a reject/accept decision using only
//! the state accumulated from earlier decisions. Levels are computed from
//! the state *before* the p-value is looked at, so replaying a prefix of a
//! stream always reproduces the same prefix of decisions.

use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::scalar::{CompensatedSum, Real};
use crate::schedule::BetaSchedule;

/// Mutable state carried between steps.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleState<T> {
    /// Index `i` of the hypothesis about to be tested (starts at 1).
    pub step_index: u64,
    /// Rejections among steps `1..i`.
    pub discovery_count: u64,
    /// Index of the most recent rejection before `i`, 0 if none.
    pub last_discovery: u64,
    /// Alpha-investing wealth `W(i-1)`; unused by the other rules.
    pub wealth: T,
    /// Alpha-investing halt flag, latched once wealth goes negative.
    pub halted: bool,
    /// Number of levels that had to be clamped into range.
    pub clamp_events: u64,
    /// `H_{i-1} = sum_{j<i} 1/j`, compensated.
    harmonic: CompensatedSum<T>,
}

impl<T: Real> RuleState<T> {
    pub fn new(initial_wealth: T) -> Self {
        Self {
            step_index: 1,
            discovery_count: 0,
            last_discovery: 0,
            wealth: initial_wealth,
            halted: false,
            clamp_events: 0,
            harmonic: CompensatedSum::new(),
        }
    }

    /// Harmonic number `H_i` for the current step.
    pub fn harmonic_at_step(&self) -> T {
        self.harmonic.peek_with(T::one() / T::from_count(self.step_index))
    }

    fn advance(&mut self, reject: bool) {
        self.harmonic.add(T::one() / T::from_count(self.step_index));
        if reject {
            self.discovery_count += 1;
            self.last_discovery = self.step_index;
        }
        self.step_index += 1;
    }
}

impl<T: Real> Default for RuleState<T> {
    fn default() -> Self {
        Self::new(T::zero())
    }
}

/// One processed hypothesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision<T> {
    pub index: u64,
    pub p_value: T,
    pub alpha_used: T,
    pub reject: bool,
}

/// The supported online rules, each carrying its parameters.
#[derive(Debug, Clone)]
pub enum RuleKind<T> {
    /// `alpha_i = beta_i (D(i-1) + 1)`.
    Lond(Arc<BetaSchedule<T>>),
    /// `alpha_i = beta_i max(D(i-1), 1)`.
    LondOr1(Arc<BetaSchedule<T>>),
    /// LOND with `beta_i / H_i`, valid under arbitrary dependence.
    LondAdjusted(Arc<BetaSchedule<T>>),
    /// `alpha_i = beta_{i - tau_i}`.
    Lord(Arc<BetaSchedule<T>>),
    /// `alpha_i = beta_i`.
    Bonferroni(Arc<BetaSchedule<T>>),
    /// `alpha_j = W / (1 + j - tau_j)` with wealth dynamics.
    AlphaInvesting { initial_wealth: T, omega: T },
}

impl<T: Real> RuleKind<T> {
    /// Alpha-investing with `W(0) = omega = alpha`.
    pub fn alpha_investing(alpha: T) -> Self {
        RuleKind::AlphaInvesting { initial_wealth: alpha, omega: alpha }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RuleKind::Lond(_) => "LOND",
            RuleKind::LondOr1(_) => "LOND_OR1",
            RuleKind::LondAdjusted(_) => "LOND_ADJ",
            RuleKind::Lord(_) => "LORD",
            RuleKind::Bonferroni(_) => "BONFERRONI",
            RuleKind::AlphaInvesting { .. } => "ALPHA_INVESTING",
        }
    }

    pub fn schedule(&self) -> Option<&BetaSchedule<T>> {
        match self {
            RuleKind::Lond(s)
            | RuleKind::LondOr1(s)
            | RuleKind::LondAdjusted(s)
            | RuleKind::Lord(s)
            | RuleKind::Bonferroni(s) => Some(s),
            RuleKind::AlphaInvesting { .. } => None,
        }
    }

    pub fn initial_state(&self) -> RuleState<T> {
        match self {
            RuleKind::AlphaInvesting { initial_wealth, .. } => RuleState::new(*initial_wealth),
            _ => RuleState::new(T::zero()),
        }
    }

    /// Level for the current step, before clamping.
    fn raw_level(&self, state: &RuleState<T>) -> Result<T> {
        let i = state.step_index;
        match self {
            RuleKind::Lond(s) => Ok(s.eval(i)? * T::from_count(state.discovery_count + 1)),
            RuleKind::LondOr1(s) => Ok(s.eval(i)? * T::from_count(state.discovery_count.max(1))),
            RuleKind::LondAdjusted(s) => {
                Ok(s.eval(i)? / state.harmonic_at_step() * T::from_count(state.discovery_count + 1))
            }
            RuleKind::Lord(s) => s.eval(i - state.last_discovery),
            RuleKind::Bonferroni(s) => s.eval(i),
            RuleKind::AlphaInvesting { .. } => Ok(alpha_investing_raw(state)),
        }
    }
}

fn alpha_investing_raw<T: Real>(state: &RuleState<T>) -> T {
    if state.halted {
        return T::zero();
    }
    let denom = T::from_count(1 + state.step_index) - T::from_count(state.last_discovery);
    state.wealth / denom
}

fn clamp<T: Real>(x: T, hi: T) -> (T, bool) {
    if x < T::zero() {
        (T::zero(), true)
    } else if x > hi {
        (hi, true)
    } else {
        (x, false)
    }
}

fn check_pre<T: Real>(state: &RuleState<T>) -> Result<()> {
    if state.step_index == 0 {
        return invalid("step_index", 0, "steps are numbered from 1");
    }
    Ok(())
}

/// LOND level `beta_i (D(i-1) + 1)`, or with `beta_i / H_i` when `adjusted`. Clamped to `[0, 1]`.
pub fn lond_alpha<T: Real>(state: &RuleState<T>, schedule: &BetaSchedule<T>, adjusted: bool) -> Result<T> {
    check_pre(state)?;
    let mut beta = schedule.eval(state.step_index)?;
    if adjusted {
        beta = beta / state.harmonic_at_step();
    }
    Ok(clamp(beta * T::from_count(state.discovery_count + 1), T::one()).0)
}

/// `beta_i max(D(i-1), 1)`, clamped to `[0, 1]`.
pub fn lond_or1_alpha<T: Real>(state: &RuleState<T>, schedule: &BetaSchedule<T>) -> Result<T> {
    check_pre(state)?;
    let beta = schedule.eval(state.step_index)?;
    Ok(clamp(beta * T::from_count(state.discovery_count.max(1)), T::one()).0)
}

/// `beta_{i - tau_i}`.
pub fn lord_alpha<T: Real>(state: &RuleState<T>, schedule: &BetaSchedule<T>) -> Result<T> {
    check_pre(state)?;
    if state.last_discovery >= state.step_index {
        return invalid("last_discovery", state.last_discovery, "last discovery must precede the current step");
    }
    schedule.eval(state.step_index - state.last_discovery)
}

/// `W / (1 + j - tau_j)` clamped to `[0, 1 - 2^-32]`; zero once halted.
pub fn alpha_investing_alpha<T: Real>(state: &RuleState<T>) -> T {
    clamp(alpha_investing_raw(state), T::max_level()).0
}

/// Wealth after observing `decision`: `+omega` on rejection,
/// `-alpha/(1 - alpha)` on acceptance. Latches `halted` once negative.
pub fn alpha_investing_update<T: Real>(state: &RuleState<T>, decision: &Decision<T>, omega: T) -> Result<RuleState<T>> {
    let mut next = state.clone();
    if state.halted {
        return Ok(next);
    }
    if decision.alpha_used >= T::one() {
        return Err(Error::UnitLevel);
    }
    next.wealth = if decision.reject {
        state.wealth + omega
    } else {
        state.wealth - decision.alpha_used / (T::one() - decision.alpha_used)
    };
    if next.wealth < T::zero() {
        next.halted = true;
    }
    Ok(next)
}

fn validate_p<T: Real>(p: T, index: u64) -> Result<()> {
    if p.is_finite() && p >= T::zero() && p <= T::one() {
        Ok(())
    } else {
        Err(Error::InvalidPValue { index: index as usize, value: p.to_f64().unwrap_or(f64::NAN) })
    }
}

/// Processes one p-value: level from the current state, `reject = p <= level`, then the state update.
pub fn step<T: Real>(rule: &RuleKind<T>, state: &RuleState<T>, p: T) -> Result<(Decision<T>, RuleState<T>)> {
    check_pre(state)?;
    validate_p(p, state.step_index)?;
    let ceiling = match rule {
        RuleKind::AlphaInvesting { .. } => T::max_level(),
        _ => T::one(),
    };
    let (alpha_used, clamped) = clamp(rule.raw_level(state)?, ceiling);
    let decision = Decision { index: state.step_index, p_value: p, alpha_used, reject: p <= alpha_used };
    let mut next = match rule {
        RuleKind::AlphaInvesting { omega, .. } => alpha_investing_update(state, &decision, *omega)?,
        _ => state.clone(),
    };
    if clamped {
        next.clamp_events += 1;
    }
    next.advance(decision.reject);
    Ok((decision, next))
}

/// A rule bundled with its running state.
#[derive(Debug, Clone)]
pub struct OnlineRule<T> {
    kind: RuleKind<T>,
    state: RuleState<T>,
}

impl<T: Real> OnlineRule<T> {
    pub fn new(kind: RuleKind<T>) -> Self {
        let state = kind.initial_state();
        Self { kind, state }
    }

    pub fn test(&mut self, p: T) -> Result<Decision<T>> {
        let (decision, next) = step(&self.kind, &self.state, p)?;
        self.state = next;
        Ok(decision)
    }

    pub fn run(&mut self, pvalues: &[T]) -> Result<Vec<Decision<T>>> {
        pvalues.iter().map(|&p| self.test(p)).collect()
    }

    pub fn kind(&self) -> &RuleKind<T> {
        &self.kind
    }

    pub fn state(&self) -> &RuleState<T> {
        &self.state
    }
}

/// Runs `rule` from a fresh state over the whole stream.
pub fn run_stream<T: Real>(rule: &RuleKind<T>, pvalues: &[T]) -> Result<Vec<Decision<T>>> {
    OnlineRule::new(rule.clone()).run(pvalues)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(i: u64, d: u64, tau: u64) -> RuleState<f64> {
        let mut s = RuleState::new(0.0);
        for _ in 1..i {
            s.advance(false);
        }
        s.discovery_count = d;
        s.last_discovery = tau;
        s
    }

    // Rescales a level computed from `sched` as if `beta_i` were `target`.
    fn beta_at(sched: &BetaSchedule<f64>, i: u64, target: f64) -> f64 {
        target / sched.eval(i).unwrap()
    }

    #[test]
    fn lond_examples() {
        let s = BetaSchedule::<f64>::power_law(0.05, 2.0, None).unwrap();
        let a = lond_alpha(&state(1, 0, 0), &s, false).unwrap();
        assert_eq!(a, s.eval(1).unwrap());
        let a5 = lond_alpha(&state(5, 2, 4), &s, false).unwrap();
        assert!((a5 - 3.0 * s.eval(5).unwrap()).abs() < 1e-18);
        let adj = lond_alpha(&state(3, 0, 0), &s, true).unwrap();
        assert!((adj - s.eval(3).unwrap() * 6.0 / 11.0).abs() < 1e-18);
        // beta_5 = 0.004, D = 2 -> 0.012
        assert!((beta_at(&s, 5, 0.004) * a5 - 0.012).abs() < 1e-15);
        // beta_3 = 0.011 adjusted -> 0.006
        assert!((beta_at(&s, 3, 0.011) * adj - 0.006).abs() < 1e-15);
    }

    #[test]
    fn lond_or1_examples() {
        let s = BetaSchedule::<f64>::power_law(0.05, 2.0, None).unwrap();
        assert_eq!(lond_or1_alpha(&state(1, 0, 0), &s).unwrap(), s.eval(1).unwrap());
        assert!((lond_or1_alpha(&state(4, 3, 3), &s).unwrap() - 3.0 * s.eval(4).unwrap()).abs() < 1e-18);
        let st = state(9, 1, 2);
        assert_eq!(lond_or1_alpha(&st, &s).unwrap(), s.eval(9).unwrap());
        assert_eq!(lond_alpha(&st, &s, false).unwrap(), 2.0 * s.eval(9).unwrap());
    }

    #[test]
    fn lond_clamps_to_one() {
        let s = BetaSchedule::<f64>::power_law(0.5, 2.0, Some(1)).unwrap();
        let st = state(1, 10, 0);
        assert_eq!(lond_alpha(&st, &s, false).unwrap(), 1.0);
    }

    #[test]
    fn lord_examples() {
        let s = BetaSchedule::<f64>::log_power(0.05, 2.0, None).unwrap();
        assert_eq!(lord_alpha(&state(3, 0, 0), &s).unwrap(), s.eval(3).unwrap());
        assert_eq!(lord_alpha(&state(7, 1, 5), &s).unwrap(), s.eval(2).unwrap());
        assert_eq!(lord_alpha(&state(6, 1, 5), &s).unwrap(), s.eval(1).unwrap());
        assert!(lord_alpha(&state(5, 1, 5), &s).is_err());
    }

    #[test]
    fn alpha_investing_levels() {
        let mut st = RuleState::<f64>::new(0.05);
        assert!((alpha_investing_alpha(&st) - 0.025).abs() < 1e-18);
        st.step_index = 3;
        st.last_discovery = 3;
        assert!((alpha_investing_alpha(&st) - 0.05).abs() < 1e-18);
        st.halted = true;
        assert_eq!(alpha_investing_alpha(&st), 0.0);
        let mut rich = RuleState::<f64>::new(5.0);
        rich.step_index = 2;
        rich.last_discovery = 1;
        assert_eq!(alpha_investing_alpha(&rich), 1.0 - 2f64.powi(-32));
    }

    #[test]
    fn alpha_investing_wealth_updates() {
        let st = RuleState::<f64>::new(0.05);
        let accept = Decision { index: 1, p_value: 0.5, alpha_used: 0.01, reject: false };
        let next = alpha_investing_update(&st, &accept, 0.05).unwrap();
        assert!((next.wealth - (0.05 - 0.01 / 0.99)).abs() < 1e-16);
        assert!((next.wealth - 0.039_899).abs() < 1e-6);

        let st = RuleState::<f64>::new(0.02);
        let reject = Decision { index: 1, p_value: 0.001, alpha_used: 0.05, reject: true };
        assert!((alpha_investing_update(&st, &reject, 0.05).unwrap().wealth - 0.07).abs() < 1e-16);

        let unit = Decision { index: 1, p_value: 0.5, alpha_used: 1.0, reject: true };
        assert!(matches!(alpha_investing_update(&st, &unit, 0.05), Err(Error::UnitLevel)));
    }

    #[test]
    fn alpha_investing_halts_and_stays_halted() {
        // Replay oracle: W = 0.001, accept at 0.01 -> 0.001 - 0.01/0.99.
        let expected: f64 = 0.001 - 0.01 / (1.0 - 0.01);
        assert!((expected + 0.009_101).abs() < 1e-6);
        let st = RuleState::new(0.001);
        let accept = Decision { index: 1, p_value: 0.5, alpha_used: 0.01, reject: false };
        let next = alpha_investing_update(&st, &accept, 0.05).unwrap();
        assert_eq!(next.wealth, expected);
        assert!(next.halted);
        let reject = Decision { index: 2, p_value: 0.0, alpha_used: 0.0, reject: true };
        let after = alpha_investing_update(&next, &reject, 0.05).unwrap();
        assert!(after.halted);
        assert_eq!(after.wealth, expected);
    }

    #[test]
    fn step_examples() {
        let s = Arc::new(BetaSchedule::<f64>::power_law(0.05, 2.0, None).unwrap());
        let rule = RuleKind::Lond(s.clone());
        let b1 = s.eval(1).unwrap();
        let (d, next) = step(&rule, &rule.initial_state(), b1 / 2.0).unwrap();
        assert!(d.reject);
        assert_eq!(next.discovery_count, 1);
        assert_eq!(next.last_discovery, 1);
        assert_eq!(next.step_index, 2);

        // Ties reject.
        let bonf = RuleKind::Bonferroni(s.clone());
        let mut st = bonf.initial_state();
        for i in 1..=5u64 {
            let (d, n) = step(&bonf, &st, s.eval(i).unwrap()).unwrap();
            assert!(d.reject);
            st = n;
        }

        let lord = RuleKind::Lord(s.clone());
        let decisions = run_stream(&lord, &[b1 * 0.75, b1 * 0.75]).unwrap();
        assert!(decisions[0].reject && decisions[1].reject);
        assert_eq!(decisions[1].alpha_used, b1);
    }

    #[test]
    fn step_rejects_bad_pvalues() {
        let s = Arc::new(BetaSchedule::<f64>::power_law(0.05, 2.0, None).unwrap());
        let rule = RuleKind::Lord(s);
        let st = rule.initial_state();
        for p in [-0.1, 1.5, f64::NAN, f64::INFINITY] {
            assert!(matches!(step(&rule, &st, p), Err(Error::InvalidPValue { .. })));
        }
    }

    #[test]
    fn all_ones_stream_keeps_levels_at_beta() {
        let s = Arc::new(BetaSchedule::<f64>::log_power(0.05, 2.0, None).unwrap());
        for rule in [RuleKind::Lond(s.clone()), RuleKind::Lord(s.clone())] {
            let ds = run_stream(&rule, &vec![1.0; 50]).unwrap();
            for d in ds {
                assert!(!d.reject);
                assert_eq!(d.alpha_used, s.eval(d.index).unwrap());
            }
        }
    }

    #[test]
    fn single_precision_rules_run() {
        let s = Arc::new(BetaSchedule::<f32>::log_power(0.05, 2.0, None).unwrap());
        let ds = run_stream(&RuleKind::LondAdjusted(s), &[0.0f32, 0.5, 0.001]).unwrap();
        assert!(ds[0].reject);
        assert!(!ds[1].reject);
    }
}

use online_fdr::schedule::{BetaSchedule, Family};

const ALPHA: f64 = 0.05;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn power_law_two_normalizes_by_zeta_two() {
    let s = BetaSchedule::power_law(ALPHA, 2.0, None).unwrap();
    let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
    assert!(rel(s.eval(1).unwrap(), ALPHA / zeta2) < 1e-9);
    assert!(rel(s.eval(7).unwrap(), ALPHA / zeta2 / 49.0) < 1e-9);
}

#[test]
fn example1_half_normalizes_by_zeta_derivative() {
    // sum log(l) / l^2 = -zeta'(2).
    const NEG_ZETA_PRIME_2: f64 = 0.937_548_254_315_843_8;
    let s = BetaSchedule::example1(ALPHA, 0.5).unwrap();
    assert_eq!(s.eval(1).unwrap(), 0.0);
    assert!(rel(s.eval(2).unwrap(), ALPHA * 2f64.ln() / (4.0 * NEG_ZETA_PRIME_2)) < 1e-9);
    assert!(rel(s.normalizer(), NEG_ZETA_PRIME_2) < 1e-9);
}

#[test]
fn log_power_matches_brute_force_sum() {
    // Direct summation to N, then the midpoint-rule tail int_{N+1/2}^inf dt / (t log^2 t).
    let n = 2_000_000u64;
    let mut s = 1.0 / 2f64.ln().powi(2);
    for l in (2..=n).rev() {
        let l = l as f64;
        s += 1.0 / (l * l.ln().powi(2));
    }
    s += 1.0 / (n as f64 + 0.5).ln();
    let sched = BetaSchedule::log_power(ALPHA, 2.0, None).unwrap();
    assert!(rel(sched.eval(1).unwrap(), ALPHA / s / 2f64.ln().powi(2)) < 1e-9);
}

#[test]
fn finite_horizon_mass_is_alpha() {
    for fam in [Family::PowerLaw { a: 1.5 }, Family::LogPower { nu: 1.5 }, Family::Example2 { a: 2.0 }] {
        let s = BetaSchedule::new(fam, ALPHA, Some(500)).unwrap();
        let total: f64 = (1..=500).map(|l| s.eval(l).unwrap()).sum();
        assert!(total <= ALPHA * (1.0 + 1e-12) && rel(total, ALPHA) < 1e-12, "{fam}: {total}");
        assert!(s.eval(501).is_err());
    }
}

#[test]
fn infinite_mass_bracket_contains_alpha() {
    for fam in [
        Family::PowerLaw { a: 1.1 },
        Family::LogPower { nu: 2.0 },
        Family::Example1 { kappa: 0.4 },
        Family::Example2 { a: 1.5 },
    ] {
        let s = BetaSchedule::new(fam, ALPHA, None).unwrap();
        let (lo, hi) = s.mass_bracket();
        assert!(lo <= hi && hi <= ALPHA * (1.0 + 1e-12), "{fam}: [{lo}, {hi}]");
        assert!(rel(lo, ALPHA) < 1e-9, "{fam}: {lo}");
    }
}

//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use online_fdr::rules::RuleKind;
use online_fdr::Decision;

/// Neumaier sum of `1/j` for `j = 1..=i`.
pub fn harmonic_oracle(i: u64) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for j in 1..=i {
        let x = 1.0 / j as f64;
        let t = s + x;
        c += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
        s = t;
    }
    s + c
}

/// Recomputes every level from the logged p-values and decisions alone,
/// each from scratch over the log prefix.
pub fn replay_levels(rule: &RuleKind<f64>, log: &[Decision]) -> Vec<f64> {
    (0..log.len()).map(|k| level_at(rule, &log[..k], k as u64 + 1)).collect()
}

fn level_at(rule: &RuleKind<f64>, past: &[Decision], i: u64) -> f64 {
    let d = past.iter().filter(|x| x.reject).count() as u64;
    let tau = past.iter().rev().find(|x| x.reject).map_or(0, |x| x.index);
    let beta = |l: u64| rule.schedule().expect("schedule").eval(l).unwrap();
    let unit = |x: f64| x.clamp(0.0, 1.0);
    match rule {
        RuleKind::Lond(_) => unit(beta(i) * (d + 1) as f64),
        RuleKind::LondOr1(_) => unit(beta(i) * d.max(1) as f64),
        RuleKind::LondAdjusted(_) => unit(beta(i) / harmonic_oracle(i) * (d + 1) as f64),
        RuleKind::Lord(_) => unit(beta(i - tau)),
        RuleKind::Bonferroni(_) => unit(beta(i)),
        RuleKind::AlphaInvesting { initial_wealth, omega } => {
            let ceiling = 1.0 - f64::EPSILON.max(2f64.powi(-32));
            let mut w = *initial_wealth;
            for x in past {
                w = if x.reject { w + omega } else { w - x.alpha_used / (1.0 - x.alpha_used) };
                if w < 0.0 {
                    return 0.0;
                }
            }
            (w / (1 + i - tau) as f64).clamp(0.0, ceiling)
        }
    }
}

/// BH by brute force: the largest self-consistent rejection set, where
/// every member satisfies `p <= alpha |S| / n`.
pub fn bh_exhaustive(p: &[f64], level: f64) -> Vec<bool> {
    let n = p.len();
    assert!(n <= 16, "exhaustive oracle is exponential");
    let mut best: (usize, u32) = (0, 0);
    for set in 0u32..(1 << n) {
        let size = set.count_ones() as usize;
        if size <= best.0 {
            continue;
        }
        let cut = level * size as f64 / n as f64;
        if (0..n).filter(|&i| set >> i & 1 == 1).all(|i| p[i] <= cut) {
            best = (size, set);
        }
    }
    (0..n).map(|i| best.1 >> i & 1 == 1).collect()
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50)
}

/// `Phi(x)` as `1/2 +- integral of the density between 0 and x`.
pub fn normal_cdf_quadrature(x: f64) -> f64 {
    let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    if x >= 0.0 {
        0.5 + simpson(&pdf, 0.0, x, 1e-14)
    } else {
        0.5 - simpson(&pdf, x, 0.0, 1e-14)
    }
}

/// Least-squares slope of `y` on `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

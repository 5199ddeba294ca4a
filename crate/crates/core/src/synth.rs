//! Synthetic mixture-model trials: ground truth, test statistics, p-values.

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::theory::special::two_sided_p;

/// Ground truth for one trial. `is_null[j]` iff `thetas[j] == 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialTruth {
    pub thetas: Vec<f64>,
    pub is_null: Vec<bool>,
}

impl TrialTruth {
    pub fn from_thetas(thetas: Vec<f64>) -> Self {
        let is_null = thetas.iter().map(|&t| t == 0.0).collect();
        Self { thetas, is_null }
    }

    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    pub fn null_count(&self) -> usize {
        self.is_null.iter().filter(|&&b| b).count()
    }
}

/// How non-null means are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruthModel {
    /// `theta ~ N(0, sigma2)` with probability `pi`, else 0.
    GaussianMixture { pi: f64, sigma2: f64 },
    /// `theta = mu` with probability `epsilon`, else 0.
    PointAlternative { epsilon: f64, mu: f64 },
}

/// `sigma^2 = 2 log n`.
pub fn default_sigma2(n: usize) -> f64 {
    2.0 * (n as f64).ln()
}

/// Draws `theta_j` independently: 0 w.p. `1 - pi`, else `N(0, sigma2)`.
pub fn sample_truth<R: Rng + ?Sized>(n: usize, pi: f64, sigma2: f64, rng: &mut R) -> Result<TrialTruth> {
    sample_truth_with(n, TruthModel::GaussianMixture { pi, sigma2 }, rng)
}

type Draw<R> = Box<dyn Fn(&mut R) -> f64>;

pub fn sample_truth_with<R: Rng + ?Sized>(n: usize, model: TruthModel, rng: &mut R) -> Result<TrialTruth> {
    if n == 0 {
        return invalid("n", n, "need at least one hypothesis");
    }
    let (prob, draw): (f64, Draw<R>) = match model {
        TruthModel::GaussianMixture { pi, sigma2 } => {
            if !(0.0..=1.0).contains(&pi) {
                return invalid("pi", pi, "mixing proportion must lie in [0, 1]");
            }
            if !(sigma2 > 0.0) || !sigma2.is_finite() {
                return invalid("sigma2", sigma2, "signal variance must be positive");
            }
            let sd = sigma2.sqrt();
            (pi, Box::new(move |r: &mut R| sd * r.sample::<f64, _>(StandardNormal)))
        }
        TruthModel::PointAlternative { epsilon, mu } => {
            if !(0.0..=1.0).contains(&epsilon) {
                return invalid("epsilon", epsilon, "non-null probability must lie in [0, 1]");
            }
            if !mu.is_finite() {
                return invalid("mu", mu, "alternative mean must be finite");
            }
            (epsilon, Box::new(move |_: &mut R| mu))
        }
    };
    let thetas = (0..n).map(|_| if rng.random::<f64>() < prob { draw(rng) } else { 0.0 }).collect();
    Ok(TrialTruth::from_thetas(thetas))
}

/// Noise structure of the test statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DependenceSpec {
    Independent,
    /// `Sigma = Lambda Sigma~ Lambda`, `Sigma~` with unit diagonal and `rho` elsewhere,
    /// `Lambda` a random sign diagonal redrawn per trial.
    EquicorrSigned {
        rho: f64,
    },
}

impl DependenceSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DependenceSpec::EquicorrSigned { rho } if !(0.0..1.0).contains(&rho) => {
                invalid("rho", rho, "correlation must lie in [0, 1)")
            }
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            DependenceSpec::Independent => "independent".into(),
            DependenceSpec::EquicorrSigned { rho } => format!("equicorr({rho})"),
        }
    }
}

/// Entry `(i, j)` of `Lambda Sigma~ Lambda` for the given signs.
pub fn equicorr_covariance(signs: &[i8], rho: f64, i: usize, j: usize) -> f64 {
    let base = if i == j { 1.0 } else { rho };
    f64::from(signs[i]) * f64::from(signs[j]) * base
}

#[derive(Debug, Clone, PartialEq)]
pub struct PvalueStream {
    pub pvalues: Vec<f64>,
    pub z: Vec<f64>,
    /// `order[k]` is the original index of the hypothesis now at position `k`.
    pub order: Vec<usize>,
    /// Diagonal of `Lambda`; empty for independent noise.
    pub signs: Vec<i8>,
}

/// `z = theta + noise`, `p = 2 Phi(-|z|)`.
///
/// The equicorrelated noise uses `sqrt(rho) u + sqrt(1 - rho) g_j` with one
/// shared `u`, which has exactly the `Sigma~` covariance in O(n).
pub fn sample_statistics<R: Rng + ?Sized>(
    truth: &TrialTruth,
    dep: DependenceSpec,
    rng: &mut R,
) -> Result<PvalueStream> {
    dep.validate()?;
    let n = truth.len();
    let (z, signs): (Vec<f64>, Vec<i8>) = match dep {
        DependenceSpec::Independent => {
            let z = truth.thetas.iter().map(|&t| t + rng.sample::<f64, _>(StandardNormal)).collect();
            (z, Vec::new())
        }
        DependenceSpec::EquicorrSigned { rho } => {
            let shared: f64 = rng.sample(StandardNormal);
            let (a, b) = (rho.sqrt(), (1.0 - rho).sqrt());
            let signs: Vec<i8> = (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
            let z = truth
                .thetas
                .iter()
                .zip(&signs)
                .map(|(&t, &s)| t + f64::from(s) * (a * shared + b * rng.sample::<f64, _>(StandardNormal)))
                .collect();
            (z, signs)
        }
    };
    let pvalues = z.iter().map(|&z| two_sided_p(z)).collect();
    Ok(PvalueStream { pvalues, z, order: (0..n).collect(), signs })
}

/// Presentation order of the hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Stream order as generated.
    I,
    /// Sorted by `|theta|` descending (stable), mimicking an investigator
    /// who tests the most promising hypotheses first.
    II,
}

impl Scenario {
    pub fn label(&self) -> &'static str {
        match self {
            Scenario::I => "I",
            Scenario::II => "II",
        }
    }
}

pub fn apply_scenario(
    stream: PvalueStream,
    truth: TrialTruth,
    scenario: Scenario,
) -> Result<(PvalueStream, TrialTruth)> {
    if stream.pvalues.len() != truth.len() {
        return Err(Error::LengthMismatch { what: "stream vs truth", left: stream.pvalues.len(), right: truth.len() });
    }
    match scenario {
        Scenario::I => Ok((stream, truth)),
        Scenario::II => {
            let mut perm: Vec<usize> = (0..truth.len()).collect();
            perm.sort_by(|&a, &b| truth.thetas[b].abs().total_cmp(&truth.thetas[a].abs()));
            let pick = |v: &[f64]| perm.iter().map(|&k| v[k]).collect::<Vec<_>>();
            let reordered = PvalueStream {
                pvalues: pick(&stream.pvalues),
                z: pick(&stream.z),
                order: perm.iter().map(|&k| stream.order[k]).collect(),
                signs: if stream.signs.is_empty() {
                    Vec::new()
                } else {
                    perm.iter().map(|&k| stream.signs[k]).collect()
                },
            };
            Ok((reordered, TrialTruth::from_thetas(pick(&truth.thetas))))
        }
    }
}

/// Writes `index,p,z,theta,is_null` rows (1-based index).
pub fn write_stream_csv<W: Write>(out: W, stream: &PvalueStream, truth: &TrialTruth) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "p", "z", "theta", "is_null"])?;
    for k in 0..truth.len() {
        w.write_record([
            (k + 1).to_string(),
            stream.pvalues[k].to_string(),
            stream.z[k].to_string(),
            truth.thetas[k].to_string(),
            u8::from(truth.is_null[k]).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

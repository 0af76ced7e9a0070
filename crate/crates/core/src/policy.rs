//! Defender channel-selection rules.
//!
//! Every randomized rule is written as a deterministic function of one uniform
//! draw so that different policies can be compared slot-for-slot under common
//! random numbers.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::BeliefVector;
use crate::error::{Error, Result};

/// Index of the channel sensed in a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SensingAction(pub usize);

impl SensingAction {
    pub fn channel(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicyKind {
    /// Sense the channel with the largest belief.
    Myopic,
    /// Two channels only: the larger belief with probability `q`, otherwise the other one.
    Bernoulli { q: f64 },
    /// Softmax over beliefs with temperature `tau`.
    Boltzmann { tau: f64 },
    /// Always the smallest belief. Used to validate the non-greedy transmission-period model.
    Contrarian,
}

/// When a randomized policy draws a fresh channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResampleMode {
    /// Only in the first slot after a failed transmission; stay on the channel otherwise.
    #[default]
    TpBoundary,
    /// Every slot.
    EverySlot,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    #[serde(default)]
    pub resample_mode: ResampleMode,
}

impl PolicySpec {
    pub fn new(kind: PolicyKind) -> Self {
        Self { kind, resample_mode: ResampleMode::TpBoundary }
    }

    pub fn myopic() -> Self {
        Self::new(PolicyKind::Myopic)
    }

    pub fn bernoulli(q: f64) -> Self {
        Self::new(PolicyKind::Bernoulli { q })
    }

    pub fn boltzmann(tau: f64) -> Self {
        Self::new(PolicyKind::Boltzmann { tau })
    }

    pub fn contrarian() -> Self {
        Self::new(PolicyKind::Contrarian)
    }

    pub fn with_resample_mode(mut self, mode: ResampleMode) -> Self {
        self.resample_mode = mode;
        self
    }

    /// Checks the policy parameters against a system of `n` channels.
    pub fn validate(&self, n: usize) -> Result<()> {
        if n < 2 {
            return Err(Error::TooFewChannels(n));
        }
        match self.kind {
            PolicyKind::Bernoulli { q } => {
                if n != 2 {
                    return Err(Error::InvalidParameter(format!(
                        "Bernoulli policy needs exactly two channels, got {n}"
                    )));
                }
                check_main_probability(q)
            }
            PolicyKind::Boltzmann { tau } => check_temperature(tau),
            PolicyKind::Myopic | PolicyKind::Contrarian => Ok(()),
        }
    }

    /// Probability of sensing each channel given the current beliefs.
    pub fn selection_probs(&self, beliefs: &BeliefVector) -> Result<Vec<f64>> {
        let n = beliefs.len();
        match self.kind {
            PolicyKind::Myopic => Ok(one_hot(n, myopic_select(beliefs).0)),
            PolicyKind::Contrarian => Ok(one_hot(n, argmin(beliefs.as_slice()))),
            PolicyKind::Bernoulli { q } => {
                self.validate(n)?;
                let best = myopic_select(beliefs).0;
                let mut probs = vec![1.0 - q; 2];
                probs[best] = q;
                Ok(probs)
            }
            PolicyKind::Boltzmann { tau } => boltzmann_probs(beliefs, tau),
        }
    }

    /// Picks a channel from one uniform draw `u` in `[0, 1)`.
    pub fn select_with(&self, beliefs: &BeliefVector, u: f64) -> Result<SensingAction> {
        match self.kind {
            PolicyKind::Myopic => Ok(myopic_select(beliefs)),
            PolicyKind::Contrarian => Ok(SensingAction(argmin(beliefs.as_slice()))),
            PolicyKind::Bernoulli { q } => {
                self.validate(beliefs.len())?;
                Ok(bernoulli_from_uniform(beliefs, q, u))
            }
            PolicyKind::Boltzmann { tau } => {
                let probs = boltzmann_probs(beliefs, tau)?;
                Ok(SensingAction(sample_index(&probs, u)))
            }
        }
    }

    pub fn select<R: Rng + ?Sized>(&self, beliefs: &BeliefVector, rng: &mut R) -> Result<SensingAction> {
        let u: f64 = rng.random();
        self.select_with(beliefs, u)
    }
}

fn check_main_probability(q: f64) -> Result<()> {
    if q.is_finite() && (0.5..=1.0).contains(&q) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("main probability q must lie in [0.5, 1], got {q}")))
    }
}

pub(crate) fn check_temperature(tau: f64) -> Result<()> {
    if tau.is_finite() && tau > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("temperature must be positive and finite, got {tau}")))
    }
}

/// Lowest index attaining the maximum.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Lowest index attaining the minimum.
pub(crate) fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn one_hot(n: usize, at: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[at] = 1.0;
    v
}

/// Inverse-CDF draw: the first index whose cumulative mass exceeds `u`.
///
/// Zero-mass entries are never returned, even when rounding leaves the total slightly below one.
pub(crate) fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last_positive = i;
        if u < acc {
            return i;
        }
    }
    last_positive
}

pub fn myopic_select(beliefs: &BeliefVector) -> SensingAction {
    SensingAction(argmax(beliefs.as_slice()))
}

fn bernoulli_from_uniform(beliefs: &BeliefVector, q: f64, u: f64) -> SensingAction {
    let best = myopic_select(beliefs).0;
    if u < q {
        SensingAction(best)
    } else {
        SensingAction(1 - best)
    }
}

/// Two-channel softmax: the larger belief with probability `q`.
pub fn bernoulli_select<R: Rng + ?Sized>(beliefs: &BeliefVector, q: f64, rng: &mut R) -> Result<SensingAction> {
    PolicySpec::bernoulli(q).select(beliefs, rng)
}

/// Boltzmann selection probabilities `exp(w_i / tau) / sum_j exp(w_j / tau)`.
pub fn boltzmann_probs(beliefs: &BeliefVector, tau: f64) -> Result<Vec<f64>> {
    check_temperature(tau)?;
    Ok(softmax(beliefs.as_slice(), tau))
}

pub(crate) fn softmax(values: &[f64], tau: f64) -> Vec<f64> {
    // Shift by the max so that exp never overflows at small temperatures.
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = values.iter().map(|&v| ((v - max) / tau).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

pub fn boltzmann_select<R: Rng + ?Sized>(beliefs: &BeliefVector, tau: f64, rng: &mut R) -> Result<SensingAction> {
    PolicySpec::boltzmann(tau).select(beliefs, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::selection_entropy;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bv(v: &[f64]) -> BeliefVector {
        BeliefVector::new(v.to_vec()).unwrap()
    }

    fn frequency(spec: PolicySpec, beliefs: &BeliefVector, channel: usize, n: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).filter(|_| spec.select(beliefs, &mut rng).unwrap().0 == channel).count() as f64 / n as f64
    }

    #[test]
    fn myopic_examples() {
        assert_eq!(myopic_select(&bv(&[0.2, 0.9])), SensingAction(1));
        assert_eq!(myopic_select(&bv(&[0.5, 0.5])), SensingAction(0));
        assert_eq!(myopic_select(&bv(&[0.7, 0.3, 0.7])), SensingAction(0));
    }

    #[test]
    fn bernoulli_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            assert_eq!(bernoulli_select(&bv(&[0.2, 0.9]), 1.0, &mut rng).unwrap(), SensingAction(1));
        }
        let n = 1_000_000;
        let f = frequency(PolicySpec::bernoulli(0.5), &bv(&[0.2, 0.9]), 1, n, 2);
        assert!((f - 0.5).abs() < 3.0 * (0.25 / n as f64).sqrt(), "{f}");
        let f = frequency(PolicySpec::bernoulli(0.7), &bv(&[0.9, 0.2]), 0, n, 3);
        assert!((f - 0.7).abs() < 3.0 * (0.21 / n as f64).sqrt(), "{f}");
    }

    #[test]
    fn bernoulli_rejects_bad_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(bernoulli_select(&bv(&[0.2, 0.9]), 0.4, &mut rng).is_err());
        assert!(bernoulli_select(&bv(&[0.2, 0.9]), 1.01, &mut rng).is_err());
        assert!(bernoulli_select(&bv(&[0.2, 0.9, 0.3]), 0.7, &mut rng).is_err());
    }

    #[test]
    fn boltzmann_prob_examples() {
        let p = boltzmann_probs(&bv(&[0.4, 0.4, 0.4]), 1.0).unwrap();
        for x in p {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
        let p = boltzmann_probs(&bv(&[0.9, 0.2]), 0.7).unwrap();
        let logistic = 1.0 / (1.0 + (-(0.9f64 - 0.2) / 0.7).exp());
        assert!((p[0] - logistic).abs() < 1e-15);
        assert!((p[0] - 0.7311).abs() < 5e-5 && (p[1] - 0.2689).abs() < 5e-5);
        let p = boltzmann_probs(&bv(&[0.9, 0.2]), 1e-6).unwrap();
        assert_eq!(p, vec![1.0, 0.0]);
        assert!(boltzmann_probs(&bv(&[0.9, 0.2]), 0.0).is_err());
        assert!(boltzmann_probs(&bv(&[0.9, 0.2]), -1.0).is_err());
    }

    #[test]
    fn boltzmann_select_examples() {
        let n = 1_000_000;
        let beliefs = bv(&[0.2, 0.9]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let hits = (0..n).filter(|_| boltzmann_select(&beliefs, 1e-6, &mut rng).unwrap().0 == 1).count();
        assert!(hits >= 999_990);

        let equal = bv(&[0.5; 4]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[boltzmann_select(&equal, 2.0, &mut rng).unwrap().0] += 1;
        }
        let se = (0.25f64 * 0.75 / n as f64).sqrt();
        for c in counts {
            assert!((c as f64 / n as f64 - 0.25).abs() < 3.0 * se);
        }

        assert_eq!(BeliefVector::new(vec![0.5]), Err(Error::TooFewChannels(1)));
    }

    #[test]
    fn sample_index_skips_zero_mass() {
        assert_eq!(sample_index(&[0.0, 1.0], 0.0), 1);
        assert_eq!(sample_index(&[0.5, 0.5, 0.0], 0.999_999_999_999), 1);
        assert_eq!(sample_index(&[0.3, 0.3, 0.3999999], 0.99999999), 2);
    }

    #[test]
    fn entropy_grows_with_temperature() {
        let beliefs = bv(&[0.2, 0.45, 0.6, 0.66, 0.9]);
        let mut last = -1.0;
        for k in -30..=30 {
            let tau = 10f64.powf(k as f64 / 10.0);
            let h = selection_entropy(&boltzmann_probs(&beliefs, tau).unwrap()).unwrap();
            assert!(h >= last - 1e-12, "tau = {tau}");
            last = h;
        }
    }

    fn belief_vec() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.0..=1.0f64, 2..=64)
    }

    proptest! {
        #[test]
        fn boltzmann_is_normalized_and_order_preserving(beliefs in belief_vec(), log_tau in -6.0..3.0f64) {
            let tau = 10f64.powf(log_tau);
            let b = BeliefVector::new(beliefs.clone()).unwrap();
            let p = boltzmann_probs(&b, tau).unwrap();
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for i in 0..p.len() {
                prop_assert!(p[i] >= 0.0);
                for j in 0..p.len() {
                    if beliefs[i] >= beliefs[j] {
                        prop_assert!(p[i] >= p[j]);
                    }
                }
            }
        }

        #[test]
        fn myopic_is_invariant_under_increasing_transforms(beliefs in belief_vec(), scale in 0.01..1.0f64, shift in -0.5..0.5f64) {
            let b = BeliefVector::new(beliefs.clone()).unwrap();
            let transformed: Vec<f64> = beliefs.iter().map(|&w| (scale * w.powi(3) + shift).exp() / 10.0).collect();
            let t = BeliefVector::new(transformed.iter().map(|x| x.min(1.0)).collect()).unwrap();
            // exp()/10 stays below 1 for these ranges, so the transform is strictly increasing.
            prop_assume!(transformed.iter().all(|&x| x < 1.0));
            prop_assert_eq!(myopic_select(&b), myopic_select(&t));
        }

        #[test]
        fn cold_boltzmann_matches_myopic(beliefs in proptest::collection::vec(0.0..=1.0f64, 2..=10), seed in any::<u64>()) {
            let mut sorted = beliefs.clone();
            sorted.sort_by(f64::total_cmp);
            prop_assume!(sorted.windows(2).all(|w| w[1] - w[0] >= 0.01));
            let b = BeliefVector::new(beliefs).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..1000 {
                prop_assert_eq!(boltzmann_select(&b, 1e-6, &mut rng).unwrap(), myopic_select(&b));
            }
        }
    }
}

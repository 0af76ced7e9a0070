//! Sequential probability ratio test on the failed-transmission indicator.
//!
//! Without an attack a transmission fails with probability `p10` (the idle channel
//! turned busy). A greedy attacker at rate α raises this to `1 - p11 (1 - α)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::AttackProbability;
use crate::channel::GilbertElliotParams;
use crate::error::{check_probability, Error, Result};

/// Failure rates under "no attack" and "attack".
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SprtHypotheses {
    theta0: f64,
    theta1: f64,
}

impl SprtHypotheses {
    /// `theta0` must lie strictly inside (0, 1); `theta1` may reach either end.
    pub fn new(theta0: f64, theta1: f64) -> Result<Self> {
        check_probability("theta0", theta0)?;
        check_probability("theta1", theta1)?;
        if theta0 <= 0.0 || theta0 >= 1.0 {
            return Err(Error::InvalidParameter(format!("theta0 must lie in (0, 1), got {theta0}")));
        }
        Ok(Self { theta0, theta1 })
    }

    pub fn under_attack(params: &GilbertElliotParams, alpha: AttackProbability) -> Result<Self> {
        // p10 + p11 alpha equals 1 - p11 (1 - alpha) and is exact at alpha = 0.
        Self::new(params.p10(), (params.p10() + params.p11() * alpha.value()).min(1.0))
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn theta1(&self) -> f64 {
        self.theta1
    }

    pub fn is_well_posed(&self) -> bool {
        self.theta0 < self.theta1 && self.theta1 < 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct SprtState {
    pub llr_sum: f64,
    pub samples_seen: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SprtThresholds {
    upper_a: f64,
    lower_b: f64,
}

impl SprtThresholds {
    pub fn new(upper_a: f64, lower_b: f64) -> Result<Self> {
        if upper_a.is_nan() || lower_b.is_nan() || lower_b >= upper_a {
            return Err(Error::InvalidParameter(format!(
                "thresholds need lower < upper, got lower = {lower_b}, upper = {upper_a}"
            )));
        }
        Ok(Self { upper_a, lower_b })
    }

    /// Never stops.
    pub fn open() -> Self {
        Self { upper_a: f64::INFINITY, lower_b: f64::NEG_INFINITY }
    }

    pub fn upper(&self) -> f64 {
        self.upper_a
    }

    pub fn lower(&self) -> f64 {
        self.lower_b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SprtDecision {
    AcceptH1,
    AcceptH0,
    Continue,
}

/// Log-likelihood ratio of one observation; `failed` is the failure indicator.
pub fn llr_increment(failed: bool, hyp: &SprtHypotheses) -> f64 {
    if hyp.theta1 == hyp.theta0 {
        return 0.0;
    }
    if failed {
        (hyp.theta1 / hyp.theta0).ln()
    } else {
        ((1.0 - hyp.theta1) / (1.0 - hyp.theta0)).ln()
    }
}

pub fn decide(llr_sum: f64, thresholds: &SprtThresholds) -> SprtDecision {
    if llr_sum >= thresholds.upper_a {
        SprtDecision::AcceptH1
    } else if llr_sum < thresholds.lower_b {
        SprtDecision::AcceptH0
    } else {
        SprtDecision::Continue
    }
}

pub fn sprt_step(
    state: SprtState,
    failed: bool,
    hyp: &SprtHypotheses,
    thresholds: &SprtThresholds,
) -> (SprtDecision, SprtState) {
    let next = SprtState {
        llr_sum: state.llr_sum + llr_increment(failed, hyp),
        samples_seen: state.samples_seen + 1,
    };
    (decide(next.llr_sum, thresholds), next)
}

/// Wald's approximate thresholds for target false-alarm and miss probabilities.
pub fn wald_thresholds(p_fa: f64, p_m: f64) -> Result<SprtThresholds> {
    for (name, p) in [("p_fa", p_fa), ("p_m", p_m)] {
        if !(p > 0.0 && p < 0.5) {
            return Err(Error::InvalidParameter(format!("{name} must lie in (0, 0.5), got {p}")));
        }
    }
    SprtThresholds::new(((1.0 - p_m) / p_fa).ln(), (p_m / (1.0 - p_fa)).ln())
}

/// Expected terminal log-likelihood under H1 when the boundaries are hit without overshoot.
pub fn wald_asn_constant(thresholds: &SprtThresholds, p_m: f64) -> f64 {
    (1.0 - p_m) * thresholds.upper_a + p_m * thresholds.lower_b
}

/// Default normalization constant `ln(1 / p10)`.
pub fn default_asn_constant(params: &GilbertElliotParams) -> Result<f64> {
    let p10 = params.p10();
    if p10 <= 0.0 || p10 >= 1.0 {
        return Err(Error::InvalidParameter(format!("p10 must lie in (0, 1), got {p10}")));
    }
    Ok((1.0 / p10).ln())
}

/// Kullback-Leibler divergence of Bernoulli(p) from Bernoulli(q).
pub fn bernoulli_kl(p: f64, q: f64) -> f64 {
    fn term(x: f64, y: f64) -> f64 {
        if x == 0.0 {
            0.0
        } else {
            x * (x / y).ln()
        }
    }
    term(p, q) + term(1.0 - p, 1.0 - q)
}

/// Average sample number under attack: `c / KL(theta1 || theta0)`.
pub fn asn_under_attack(alpha: AttackProbability, params: &GilbertElliotParams, c: f64) -> Result<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("ASN constant must be positive, got {c}")));
    }
    let hyp = SprtHypotheses::under_attack(params, alpha)?;
    let kl = bernoulli_kl(hyp.theta1, hyp.theta0);
    if kl.is_nan() || kl <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "hypotheses coincide at alpha = {} (theta0 = theta1 = {}); ASN is infinite",
            alpha.value(),
            hyp.theta0
        )));
    }
    Ok(c / kl)
}

/// Exact outcome law of the test on an i.i.d. Bernoulli(`rate`) stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SprtOutcomeLaw {
    pub expected_samples: f64,
    pub prob_accept_h1: f64,
    pub prob_accept_h0: f64,
    /// Probability mass still undecided when the recursion stopped.
    pub residual_mass: f64,
}

// Avoids 0 * inf when one of the increments is infinite.
fn scaled(count: u64, increment: f64) -> f64 {
    if count == 0 {
        0.0
    } else {
        count as f64 * increment
    }
}

/// Propagates the distribution of (failures, successes) counts until the undecided mass
/// drops below `tol` or `max_samples` is reached.
pub fn exact_outcome_law(
    hyp: &SprtHypotheses,
    thresholds: &SprtThresholds,
    rate: f64,
    tol: f64,
    max_samples: u64,
) -> SprtOutcomeLaw {
    let up = llr_increment(true, hyp);
    let down = llr_increment(false, hyp);
    // mass[k] = probability of k failures among n samples with no decision yet.
    let mut mass: Vec<f64> = vec![1.0];
    let mut expected = 0.0;
    let mut h1 = 0.0;
    let mut h0 = 0.0;
    let mut n = 0u64;
    let mut alive: f64 = 1.0;
    while alive > tol && n < max_samples {
        expected += alive;
        n += 1;
        let mut next = vec![0.0; mass.len() + 1];
        for (k, &m) in mass.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            next[k + 1] += m * rate;
            next[k] += m * (1.0 - rate);
        }
        alive = 0.0;
        for (k, m) in next.iter_mut().enumerate() {
            if *m == 0.0 {
                continue;
            }
            let s = scaled(k as u64, up) + scaled(n - k as u64, down);
            match decide(s, thresholds) {
                SprtDecision::AcceptH1 => {
                    h1 += *m;
                    *m = 0.0;
                }
                SprtDecision::AcceptH0 => {
                    h0 += *m;
                    *m = 0.0;
                }
                SprtDecision::Continue => alive += *m,
            }
        }
        mass = next;
    }
    SprtOutcomeLaw { expected_samples: expected, prob_accept_h1: h1, prob_accept_h0: h0, residual_mass: alive }
}

/// Runs one test on a fresh i.i.d. Bernoulli(`rate`) stream.
///
/// Returns `Continue` if no decision is reached within `max_samples`.
pub fn run_bernoulli_test<R: Rng + ?Sized>(
    hyp: &SprtHypotheses,
    thresholds: &SprtThresholds,
    rate: f64,
    max_samples: u64,
    rng: &mut R,
) -> (SprtDecision, u64) {
    let mut state = SprtState::default();
    while state.samples_seen < max_samples {
        let failed = rng.random::<f64>() < rate;
        let (decision, next) = sprt_step(state, failed, hyp, thresholds);
        state = next;
        if decision != SprtDecision::Continue {
            return (decision, state.samples_seen);
        }
    }
    (SprtDecision::Continue, state.samples_seen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn alpha(a: f64) -> AttackProbability {
        AttackProbability::new(a).unwrap()
    }

    #[test]
    fn llr_examples() {
        let hyp = SprtHypotheses::new(0.1, 0.55).unwrap();
        assert!((llr_increment(true, &hyp) - 5.5f64.ln()).abs() < 1e-15);
        assert!((llr_increment(true, &hyp) - 1.7047).abs() < 5e-5);
        assert!((llr_increment(false, &hyp) - 0.5f64.ln()).abs() < 1e-15);
        let same = SprtHypotheses::new(0.3, 0.3).unwrap();
        assert_eq!(llr_increment(true, &same), 0.0);
        assert_eq!(llr_increment(false, &same), 0.0);

        let base = SprtHypotheses::under_attack(&GilbertElliotParams::baseline(), alpha(0.5)).unwrap();
        assert!((base.theta0() - 0.1).abs() < 1e-15 && (base.theta1() - 0.55).abs() < 1e-15);
        assert!(SprtHypotheses::new(0.0, 0.5).is_err());
    }

    #[test]
    fn step_examples() {
        let hyp = SprtHypotheses::new(0.1, 0.55).unwrap();
        let thr = SprtThresholds::new(2.0, -2.0).unwrap();
        let state = SprtState { llr_sum: 1.9, samples_seen: 3 };
        let (d, s) = sprt_step(state, true, &hyp, &thr);
        assert_eq!(d, SprtDecision::AcceptH1);
        assert_eq!(s.samples_seen, 4);

        let (d, _) = sprt_step(SprtState { llr_sum: -1.5, samples_seen: 0 }, false, &hyp, &thr);
        assert_eq!(d, SprtDecision::AcceptH0);

        // lower boundary itself continues
        let at_lower = SprtThresholds::new(5.0, llr_increment(false, &hyp)).unwrap();
        let (d, _) = sprt_step(SprtState::default(), false, &hyp, &at_lower);
        assert_eq!(d, SprtDecision::Continue);

        let open = SprtThresholds::open();
        let mut state = SprtState::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100_000 {
            let (d, s) = sprt_step(state, rng.random::<bool>(), &hyp, &open);
            assert_eq!(d, SprtDecision::Continue);
            state = s;
        }
        assert!(SprtThresholds::new(-1.0, 1.0).is_err());
    }

    #[test]
    fn wald_threshold_examples() {
        let t = wald_thresholds(0.01, 0.01).unwrap();
        assert!((t.upper() - 99f64.ln()).abs() < 1e-15);
        assert!((t.lower() - (0.01f64 / 0.99).ln()).abs() < 1e-15);
        assert!((t.upper() - 4.595).abs() < 5e-4);
        let t = wald_thresholds(0.05, 0.05).unwrap();
        assert!((t.upper() - 2.944).abs() < 5e-4 && (t.lower() + 2.944).abs() < 5e-4);
        assert!(wald_thresholds(0.0, 0.01).is_err());
        assert!(wald_thresholds(0.01, 0.5).is_err());
    }

    #[test]
    fn asn_examples() {
        let base = GilbertElliotParams::baseline();
        let c = 10f64.ln();
        assert!((asn_under_attack(alpha(1.0), &base, c).unwrap() - 1.0).abs() < 1e-12);
        let denom = 0.55 * 5.5f64.ln() + 0.45 * 0.5f64.ln();
        assert!((denom - 0.62570).abs() < 5e-6);
        assert!((asn_under_attack(alpha(0.5), &base, c).unwrap() - c / denom).abs() < 1e-12);
        assert!((asn_under_attack(alpha(0.5), &base, c).unwrap() - 3.680).abs() < 5e-4);
        assert!(asn_under_attack(alpha(0.0), &base, c).is_err());

        let mut last = f64::INFINITY;
        for k in 1..=10 {
            let v = asn_under_attack(alpha(k as f64 / 10.0), &base, c).unwrap();
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn kl_is_nonnegative_and_zero_only_on_diagonal() {
        for i in 1..100 {
            for j in 1..100 {
                let (p, q) = (i as f64 / 100.0, j as f64 / 100.0);
                let kl = bernoulli_kl(p, q);
                assert!(kl >= 0.0);
                if i == j {
                    assert!(kl.abs() < 1e-15);
                } else {
                    assert!(kl > 0.0);
                }
            }
        }
    }

    #[test]
    fn exact_law_matches_monte_carlo() {
        let base = GilbertElliotParams::baseline();
        let thr = wald_thresholds(0.01, 0.01).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for a in [0.3, 0.5, 1.0] {
            let hyp = SprtHypotheses::under_attack(&base, alpha(a)).unwrap();
            let law = exact_outcome_law(&hyp, &thr, hyp.theta1(), 1e-15, 1_000_000);
            assert!(law.residual_mass < 1e-15);
            assert!((law.prob_accept_h1 + law.prob_accept_h0 - 1.0).abs() < 1e-12);
            let runs = 20_000;
            let samples: Vec<f64> = (0..runs)
                .map(|_| run_bernoulli_test(&hyp, &thr, hyp.theta1(), 1_000_000, &mut rng).1 as f64)
                .collect();
            let mean = samples.iter().sum::<f64>() / runs as f64;
            let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
            let se = (var / runs as f64).sqrt();
            assert!((mean - law.expected_samples).abs() < 3.0 * se.max(1e-9), "alpha {a}: {mean} vs {}", law.expected_samples);
        }
        let hyp = SprtHypotheses::under_attack(&base, alpha(1.0)).unwrap();
        let law = exact_outcome_law(&hyp, &thr, 1.0, 1e-15, 100);
        assert_eq!(law.expected_samples, 2.0);
    }

    #[test]
    fn error_rates_respect_wald_bounds() {
        let base = GilbertElliotParams::baseline();
        let thr = wald_thresholds(0.05, 0.05).unwrap();
        let hyp = SprtHypotheses::under_attack(&base, alpha(0.5)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let trials = 10_000;
        let missed = (0..trials)
            .filter(|_| run_bernoulli_test(&hyp, &thr, hyp.theta1(), 1_000_000, &mut rng).0 == SprtDecision::AcceptH0)
            .count();
        let false_alarm = (0..trials)
            .filter(|_| run_bernoulli_test(&hyp, &thr, hyp.theta0(), 1_000_000, &mut rng).0 == SprtDecision::AcceptH1)
            .count();
        assert!((missed as f64 / trials as f64) <= 0.10, "{missed}");
        assert!((false_alarm as f64 / trials as f64) <= 0.10, "{false_alarm}");
    }
}

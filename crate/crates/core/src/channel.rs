//! Two-state (Gilbert-Elliot) channel dynamics and per-channel belief tracking.
//!
//! Each channel is idle (1) or busy (0) and follows its own Markov chain.
//! The defender never observes the full state; it keeps, for every channel, the
//! conditional probability that the channel is idle given all past observations.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};

const ROW_TOLERANCE: f64 = 1e-9;

/// Per-slot transition probabilities of one channel.
///
/// `pij` is the probability of moving from state `i` to state `j`, with 1 = idle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GilbertElliotParams {
    p11: f64,
    p10: f64,
    p01: f64,
    p00: f64,
}

impl GilbertElliotParams {
    pub fn new(p11: f64, p10: f64, p01: f64, p00: f64) -> Result<Self> {
        check_probability("p11", p11)?;
        check_probability("p10", p10)?;
        check_probability("p01", p01)?;
        check_probability("p00", p00)?;
        let idle_row = p11 + p10;
        if (idle_row - 1.0).abs() > ROW_TOLERANCE {
            return Err(Error::RowSum { row: "idle (p11 + p10)", sum: idle_row });
        }
        let busy_row = p01 + p00;
        if (busy_row - 1.0).abs() > ROW_TOLERANCE {
            return Err(Error::RowSum { row: "busy (p01 + p00)", sum: busy_row });
        }
        Ok(Self { p11, p10, p01, p00 })
    }

    /// Builds the chain from the two "to idle" probabilities.
    pub fn from_idle_probs(p11: f64, p01: f64) -> Result<Self> {
        Self::new(p11, 1.0 - p11, p01, 1.0 - p01)
    }

    /// p11 = 0.9, p01 = 0.2: the identical-channel setting used throughout the experiments.
    pub fn baseline() -> Self {
        Self { p11: 0.9, p10: 0.1, p01: 0.2, p00: 0.8 }
    }

    /// The four heterogeneous channels of the attack-strategy comparison.
    pub fn table1() -> Vec<Self> {
        vec![
            Self { p11: 0.9, p10: 0.1, p01: 0.2, p00: 0.8 },
            Self { p11: 0.95, p10: 0.05, p01: 0.2, p00: 0.8 },
            Self { p11: 0.9, p10: 0.1, p01: 0.15, p00: 0.85 },
            Self { p11: 0.95, p10: 0.05, p01: 0.15, p00: 0.85 },
        ]
    }

    pub fn p11(&self) -> f64 {
        self.p11
    }

    pub fn p10(&self) -> f64 {
        self.p10
    }

    pub fn p01(&self) -> f64 {
        self.p01
    }

    pub fn p00(&self) -> f64 {
        self.p00
    }

    /// `p11 - p01`, the one-step correlation of the chain.
    pub fn correlation(&self) -> f64 {
        self.p11 - self.p01
    }

    pub fn is_positively_correlated(&self) -> bool {
        self.p11 > self.p01
    }

    pub(crate) fn require_positive_correlation(&self) -> Result<()> {
        if self.is_positively_correlated() {
            Ok(())
        } else {
            Err(Error::NotPositivelyCorrelated { p11: self.p11, p01: self.p01 })
        }
    }

    /// Stationary probability of the idle state, `p01 / (p01 + p10)`.
    pub fn stationary_occupancy(&self) -> Result<f64> {
        let denom = self.p01 + self.p10;
        if denom <= 0.0 {
            return Err(Error::DegenerateChain);
        }
        Ok(self.p01 / denom)
    }

    /// One-step prediction of an unobserved channel's belief.
    pub fn propagate_belief(&self, omega: f64) -> f64 {
        clamp_unit(omega * self.p11 + (1.0 - omega) * self.p01)
    }

    /// Bayes update of a channel's belief after one slot.
    pub fn update_belief(&self, omega: f64, observation: Observation) -> f64 {
        match observation {
            Observation::Sensed(ChannelState::Idle) => self.p11,
            Observation::Sensed(ChannelState::Busy) => self.p01,
            Observation::NotSensed => self.propagate_belief(omega),
        }
    }

    /// Probability of being idle `j` slots after being observed busy.
    pub fn k_step_idle_prob(&self, j: u32) -> f64 {
        let denom = self.p01 + self.p10;
        if denom <= 0.0 {
            // Busy is absorbing.
            return 0.0;
        }
        let omega0 = self.p01 / denom;
        clamp_unit(omega0 - omega0 * self.correlation().powi(j as i32))
    }

    /// Probability of being idle in the next slot given the current state.
    pub fn idle_prob_from(&self, state: ChannelState) -> f64 {
        match state {
            ChannelState::Idle => self.p11,
            ChannelState::Busy => self.p01,
        }
    }

    /// Samples the next state. Consumes exactly one uniform draw.
    pub fn step_state<R: Rng + ?Sized>(&self, state: ChannelState, rng: &mut R) -> ChannelState {
        let u: f64 = rng.random();
        self.next_state(state, u)
    }

    pub(crate) fn next_state(&self, state: ChannelState, u: f64) -> ChannelState {
        if u < self.idle_prob_from(state) {
            ChannelState::Idle
        } else {
            ChannelState::Busy
        }
    }
}

impl<'de> Deserialize<'de> for GilbertElliotParams {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            p11: f64,
            p10: f64,
            p01: f64,
            p00: f64,
        }
        let raw = Raw::deserialize(deserializer)?;
        Self::new(raw.p11, raw.p10, raw.p01, raw.p00).map_err(serde::de::Error::custom)
    }
}

/// True occupancy of a channel in one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChannelState {
    Busy = 0,
    Idle = 1,
}

impl ChannelState {
    pub fn is_idle(self) -> bool {
        self == ChannelState::Idle
    }

    pub fn from_bit(bit: u8) -> Result<Self> {
        match bit {
            0 => Ok(ChannelState::Busy),
            1 => Ok(ChannelState::Idle),
            other => Err(Error::InvalidParameter(format!("channel state must be 0 or 1, got {other}"))),
        }
    }

    pub fn bit(self) -> u8 {
        self as u8
    }
}

/// What the defender learned about one channel in a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observation {
    NotSensed,
    Sensed(ChannelState),
}

/// Conditional idle probabilities of all channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>")]
pub struct BeliefVector(Vec<f64>);

impl TryFrom<Vec<f64>> for BeliefVector {
    type Error = Error;

    fn try_from(beliefs: Vec<f64>) -> Result<Self> {
        Self::new(beliefs)
    }
}

impl BeliefVector {
    pub fn new(beliefs: Vec<f64>) -> Result<Self> {
        if beliefs.len() < 2 {
            return Err(Error::TooFewChannels(beliefs.len()));
        }
        for &b in &beliefs {
            check_probability("belief", b)?;
        }
        Ok(Self(beliefs))
    }

    /// Every channel at its stationary idle probability.
    pub fn stationary(channels: &[GilbertElliotParams]) -> Result<Self> {
        let beliefs = channels
            .iter()
            .map(GilbertElliotParams::stationary_occupancy)
            .collect::<Result<Vec<_>>>()?;
        Self::new(beliefs)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    /// Applies one slot of updates: `sensed` receives the observation, the rest propagate.
    pub(crate) fn update(&mut self, channels: &[GilbertElliotParams], sensed: usize, observed: ChannelState) {
        for (k, (belief, params)) in self.0.iter_mut().zip(channels).enumerate() {
            let obs = if k == sensed { Observation::Sensed(observed) } else { Observation::NotSensed };
            *belief = clamp_unit(params.update_belief(*belief, obs));
        }
    }
}

pub(crate) fn clamp_unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn matrix_power_01(p: &GilbertElliotParams, j: u32) -> f64 {
        // rows/cols ordered [busy, idle]
        let m = [[p.p00, p.p01], [p.p10, p.p11]];
        let mut acc = [[1.0, 0.0], [0.0, 1.0]];
        for _ in 0..j {
            let mut next = [[0.0; 2]; 2];
            for r in 0..2 {
                for c in 0..2 {
                    next[r][c] = acc[r][0] * m[0][c] + acc[r][1] * m[1][c];
                }
            }
            acc = next;
        }
        acc[0][1]
    }

    #[test]
    fn rejects_rows_off_by_more_than_tolerance() {
        assert!(matches!(GilbertElliotParams::new(0.9, 0.2, 0.2, 0.8), Err(Error::RowSum { .. })));
        assert!(matches!(GilbertElliotParams::new(0.9, 0.1, 0.2, 0.7), Err(Error::RowSum { .. })));
        assert!(GilbertElliotParams::new(0.9, 0.1 + 5e-10, 0.2, 0.8).is_ok());
        assert!(matches!(
            GilbertElliotParams::new(1.1, -0.1, 0.2, 0.8),
            Err(Error::ProbabilityOutOfRange { .. })
        ));
    }

    #[test]
    fn stationary_occupancy_examples() {
        let p = GilbertElliotParams::from_idle_probs(0.9, 0.2).unwrap();
        assert!((p.stationary_occupancy().unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let sym = GilbertElliotParams::from_idle_probs(0.5, 0.5).unwrap();
        assert_eq!(sym.stationary_occupancy().unwrap(), 0.5);
        let absorbing_busy = GilbertElliotParams::from_idle_probs(0.7, 0.0).unwrap();
        assert_eq!(absorbing_busy.stationary_occupancy().unwrap(), 0.0);
        let degenerate = GilbertElliotParams::from_idle_probs(1.0, 0.0).unwrap();
        assert_eq!(degenerate.stationary_occupancy(), Err(Error::DegenerateChain));
    }

    #[test]
    fn propagate_and_update_examples() {
        let p = GilbertElliotParams::baseline();
        let w0 = p.stationary_occupancy().unwrap();
        assert!((p.propagate_belief(w0) - w0).abs() < 1e-15);
        assert!((p.propagate_belief(1.0) - 0.9).abs() < 1e-15);
        assert!((p.propagate_belief(0.5) - 0.55).abs() < 1e-15);

        assert_eq!(p.update_belief(0.4, Observation::Sensed(ChannelState::Idle)), 0.9);
        assert_eq!(p.update_belief(0.4, Observation::Sensed(ChannelState::Busy)), 0.2);
        // 0.4 * 0.9 + 0.6 * 0.2
        assert!((p.update_belief(0.4, Observation::NotSensed) - 0.48).abs() < 1e-15);
    }

    #[test]
    fn k_step_examples() {
        let p = GilbertElliotParams::baseline();
        assert!((p.k_step_idle_prob(1) - 0.2).abs() < 1e-15);
        // 0->1->1 plus 0->0->1
        assert!((p.k_step_idle_prob(2) - (0.2 * 0.9 + 0.8 * 0.2)).abs() < 1e-15);
        assert!((p.k_step_idle_prob(200) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn k_step_matches_matrix_power() {
        for p in GilbertElliotParams::table1().into_iter().chain([
            GilbertElliotParams::baseline(),
            GilbertElliotParams::from_idle_probs(0.3, 0.6).unwrap(),
        ]) {
            for j in 1..=50 {
                assert!((p.k_step_idle_prob(j) - matrix_power_01(&p, j)).abs() < 1e-12, "j = {j}");
            }
        }
    }

    #[test]
    fn step_state_absorbing_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let idle_sticky = GilbertElliotParams::from_idle_probs(1.0, 0.3).unwrap();
        let busy_sticky = GilbertElliotParams::from_idle_probs(0.6, 0.0).unwrap();
        for _ in 0..1000 {
            assert_eq!(idle_sticky.step_state(ChannelState::Idle, &mut rng), ChannelState::Idle);
            assert_eq!(busy_sticky.step_state(ChannelState::Busy, &mut rng), ChannelState::Busy);
        }
    }

    #[test]
    fn step_state_frequency_and_stationarity() {
        let p = GilbertElliotParams::baseline();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let idle_after_idle =
            (0..n).filter(|_| p.step_state(ChannelState::Idle, &mut rng).is_idle()).count() as f64 / n as f64;
        let se = (0.9f64 * 0.1 / n as f64).sqrt();
        assert!((idle_after_idle - 0.9).abs() < 3.0 * se, "{idle_after_idle}");

        // Long-run occupancy; slots are correlated, so the standard error uses the
        // integrated autocorrelation factor (1 + r) / (1 - r).
        let mut state = ChannelState::Idle;
        let mut idle = 0u64;
        for _ in 0..n {
            state = p.step_state(state, &mut rng);
            idle += state.bit() as u64;
        }
        let w0 = p.stationary_occupancy().unwrap();
        let r = p.correlation();
        let se = (w0 * (1.0 - w0) / n as f64 * (1.0 + r) / (1.0 - r)).sqrt();
        assert!((idle as f64 / n as f64 - w0).abs() < 3.0 * se);
    }

    #[test]
    fn belief_vector_validation() {
        assert_eq!(BeliefVector::new(vec![0.5]), Err(Error::TooFewChannels(1)));
        assert!(BeliefVector::new(vec![0.5, 1.2]).is_err());
        let b = BeliefVector::stationary(&GilbertElliotParams::table1()).unwrap();
        assert_eq!(b.len(), 4);
        assert!((b.get(1) - 0.8).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn propagation_is_a_contraction(p11 in 0.0..1.0f64, p01 in 0.0..1.0f64, x in 0.0..1.0f64, y in 0.0..1.0f64) {
            let p = GilbertElliotParams::from_idle_probs(p11, p01).unwrap();
            let lhs = (p.propagate_belief(x) - p.propagate_belief(y)).abs();
            prop_assert!((lhs - (p11 - p01).abs() * (x - y).abs()).abs() < 1e-12);
            let lo = p01.min(p11);
            let hi = p01.max(p11);
            let g = p.propagate_belief(x);
            prop_assert!(g >= lo - 1e-15 && g <= hi + 1e-15);
        }

        #[test]
        fn iterated_propagation_error_is_geometric(p11 in 0.0..1.0f64, p01 in 0.0..1.0f64, start in 0.0..1.0f64) {
            prop_assume!((p11 - p01).abs() <= 0.99 && p01 + (1.0 - p11) > 0.0);
            let p = GilbertElliotParams::from_idle_probs(p11, p01).unwrap();
            let w0 = p.stationary_occupancy().unwrap();
            let r = (p11 - p01).abs();
            let mut w = start;
            for n in 1..=500 {
                w = p.propagate_belief(w);
                let bound = r.powi(n) * (start - w0).abs();
                prop_assert!((w - w0).abs() <= bound + 1e-13, "n = {n}");
            }
            if r <= 0.94 {
                prop_assert!((w - w0).abs() < 1e-12);
            }
        }
    }
}

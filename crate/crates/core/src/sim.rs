//! Slot-level Monte Carlo of the defender/attacker loop.
//!
//! Each slot draws, in this order: one uniform per channel (state evolution), one
//! uniform for the defender's policy and two for the attacker. The draws happen whether
//! or not they are used, so two configurations that differ only in policy or attacker
//! see the same channel realizations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::{attack_from_uniforms, AttackProbability, AttackStrategy, DivisionProbabilities};
use crate::channel::{BeliefVector, ChannelState, GilbertElliotParams};
use crate::error::{Error, Result};
use crate::policy::{PolicySpec, ResampleMode, SensingAction};
use crate::sprt::{sprt_step, SprtDecision, SprtHypotheses, SprtState, SprtThresholds};

/// Longest TP length tracked individually in the histogram; longer ones share the last bin.
pub const TP_HISTOGRAM_BINS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialBeliefs {
    #[default]
    Stationary,
    Explicit(Vec<f64>),
}

/// What a jam does to the channel the defender is using.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JamEffect {
    /// The slot fails and the channel is left busy; it then evolves from the busy state.
    #[default]
    ForcesBusy,
    /// The slot fails but the channel's occupancy is untouched.
    Transparent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackerSpec {
    pub strategy: AttackStrategy,
    pub alpha: AttackProbability,
}

impl AttackerSpec {
    pub fn new(strategy: AttackStrategy, alpha: f64) -> Result<Self> {
        strategy.validate()?;
        Ok(Self { strategy, alpha: AttackProbability::new(alpha)? })
    }

    pub fn none() -> Self {
        Self { strategy: AttackStrategy::Greedy, alpha: AttackProbability::none() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub channels: Vec<GilbertElliotParams>,
    pub policy: PolicySpec,
    pub attacker: AttackerSpec,
    pub horizon: u64,
    pub warmup: u64,
    pub replications: usize,
    pub seed: u64,
    #[serde(default)]
    pub initial_beliefs: InitialBeliefs,
    #[serde(default)]
    pub jam_effect: JamEffect,
}

impl SimConfig {
    pub const DEFAULT_HORIZON: u64 = 100_000;
    pub const DEFAULT_WARMUP: u64 = 10_000;
    pub const DEFAULT_REPLICATIONS: usize = 50;

    pub fn new(channels: Vec<GilbertElliotParams>, policy: PolicySpec, attacker: AttackerSpec) -> Self {
        Self {
            channels,
            policy,
            attacker,
            horizon: Self::DEFAULT_HORIZON,
            warmup: Self::DEFAULT_WARMUP,
            replications: Self::DEFAULT_REPLICATIONS,
            seed: 0,
            initial_beliefs: InitialBeliefs::Stationary,
            jam_effect: JamEffect::ForcesBusy,
        }
    }

    pub fn with_horizon(mut self, horizon: u64, warmup: u64) -> Self {
        self.horizon = horizon;
        self.warmup = warmup;
        self
    }

    pub fn with_replications(mut self, replications: usize) -> Self {
        self.replications = replications;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.channels.len();
        if n < 2 {
            return Err(Error::TooFewChannels(n));
        }
        self.policy.validate(n)?;
        self.attacker.strategy.validate()?;
        if self.horizon == 0 || self.warmup >= self.horizon {
            return Err(Error::InvalidParameter(format!(
                "warmup ({}) must be below the horizon ({})",
                self.warmup, self.horizon
            )));
        }
        if self.replications == 0 {
            return Err(Error::InvalidParameter("at least one replication is required".into()));
        }
        if let InitialBeliefs::Explicit(b) = &self.initial_beliefs {
            if b.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: b.len() });
            }
            BeliefVector::new(b.clone())?;
        }
        Ok(())
    }

    fn initial_beliefs(&self) -> Result<BeliefVector> {
        match &self.initial_beliefs {
            InitialBeliefs::Stationary => BeliefVector::stationary(&self.channels),
            InitialBeliefs::Explicit(b) => BeliefVector::new(b.clone()),
        }
    }

    /// Generator for replication `r`: the seeded ChaCha stream number `r`.
    pub fn replication_rng(&self, replication: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(replication);
        rng
    }
}

/// Mutable state of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub slot: u64,
    pub beliefs: BeliefVector,
    pub states: Vec<ChannelState>,
    /// Channel of the ongoing TP, `None` right after a failure.
    pub current: Option<usize>,
    pub division: DivisionProbabilities,
    pub tp_length: u64,
}

impl SimState {
    /// Draws the initial occupancy of every channel from its stationary law.
    pub fn initial<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let beliefs = config.initial_beliefs()?;
        let mut states = Vec::with_capacity(config.channels.len());
        for p in &config.channels {
            let idle = p.stationary_occupancy().unwrap_or(0.0);
            let u: f64 = rng.random();
            states.push(if u < idle { ChannelState::Idle } else { ChannelState::Busy });
        }
        let n = beliefs.len();
        Ok(Self {
            slot: 0,
            beliefs,
            states,
            current: None,
            division: DivisionProbabilities::new(vec![1.0 / n as f64; n])?,
            tp_length: 0,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlotRecord {
    pub slot: u64,
    pub beliefs_before: BeliefVector,
    pub action: SensingAction,
    pub jam_target: Option<usize>,
    pub true_states: Vec<ChannelState>,
    pub transmission_success: bool,
    pub reward: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct SlotOutcome {
    action: usize,
    jam_target: Option<usize>,
    success: bool,
    /// The slot continued a TP: same channel as the previous slot, which succeeded.
    continuation: bool,
}

fn step<R: Rng + ?Sized>(state: &mut SimState, config: &SimConfig, rng: &mut R) -> Result<SlotOutcome> {
    for (s, p) in state.states.iter_mut().zip(&config.channels) {
        let u: f64 = rng.random();
        *s = p.next_state(*s, u);
    }
    let u_policy: f64 = rng.random();
    let u_attack: f64 = rng.random();
    let u_target: f64 = rng.random();

    let continuing = state.current;
    let reselect = match config.policy.resample_mode {
        ResampleMode::TpBoundary => continuing.is_none(),
        ResampleMode::EverySlot => true,
    };
    let action = if reselect {
        let action = config.policy.select_with(&state.beliefs, u_policy)?.channel();
        let selection = if config.attacker.strategy == AttackStrategy::AlphaOptimal {
            config.policy.selection_probs(&state.beliefs)?
        } else {
            Vec::new()
        };
        state.division = config.attacker.strategy.division(&state.beliefs, &selection, config.attacker.alpha, &config.channels)?;
        action
    } else {
        continuing.expect("ongoing TP has a channel")
    };

    let jam_target = attack_from_uniforms(&state.division, config.attacker.alpha, u_attack, u_target);
    let jammed = jam_target == Some(action);
    let success = state.states[action].is_idle() && !jammed;
    if jammed && config.jam_effect == JamEffect::ForcesBusy {
        state.states[action] = ChannelState::Busy;
    }
    let observed = if success { ChannelState::Idle } else { ChannelState::Busy };
    state.beliefs.update(&config.channels, action, observed);

    let continuation = continuing == Some(action);
    state.slot += 1;
    if success {
        state.current = Some(action);
        state.tp_length += 1;
    } else {
        state.current = None;
        state.tp_length = 0;
    }
    Ok(SlotOutcome { action, jam_target, success, continuation })
}

/// Advances one slot and returns its full record.
pub fn run_slot<R: Rng + ?Sized>(state: &mut SimState, config: &SimConfig, rng: &mut R) -> Result<SlotRecord> {
    let beliefs_before = state.beliefs.clone();
    let slot = state.slot;
    let out = step(state, config, rng)?;
    Ok(SlotRecord {
        slot,
        beliefs_before,
        action: SensingAction(out.action),
        jam_target: out.jam_target,
        true_states: state.states.clone(),
        transmission_success: out.success,
        reward: out.success as u8,
    })
}

/// Full slot records of replication `replication`, warmup included.
pub fn run_trace(config: &SimConfig, replication: u64) -> Result<Vec<SlotRecord>> {
    let mut rng = config.replication_rng(replication);
    let mut state = SimState::initial(config, &mut rng)?;
    (0..config.horizon).map(|_| run_slot(&mut state, config, &mut rng)).collect()
}

/// Sensed channel in every slot of replication `replication`.
pub fn action_trace(config: &SimConfig, replication: u64) -> Result<Vec<usize>> {
    let mut rng = config.replication_rng(replication);
    let mut state = SimState::initial(config, &mut rng)?;
    (0..config.horizon).map(|_| step(&mut state, config, &mut rng).map(|o| o.action)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TpMeasurement {
    pub lengths: Vec<u64>,
    pub mean: f64,
}

/// Lengths of the completed TPs in a record sequence; a TP ends at every failed slot.
pub fn measure_tp_lengths(records: &[SlotRecord]) -> TpMeasurement {
    let mut lengths = Vec::new();
    let mut run = 0u64;
    for r in records {
        run += 1;
        if !r.transmission_success {
            lengths.push(run);
            run = 0;
        }
    }
    let mean = if lengths.is_empty() { f64::NAN } else { lengths.iter().sum::<u64>() as f64 / lengths.len() as f64 };
    TpMeasurement { lengths, mean }
}

/// Which transmissions feed the detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionScope {
    /// Only slots that continue a successful TP, where the no-attack failure rate is `p10`.
    #[default]
    ContinuationSlots,
    /// Every slot.
    AllSlots,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectionSettings {
    pub hypotheses: SprtHypotheses,
    pub thresholds: SprtThresholds,
    pub scope: DetectionScope,
    /// Completed tests to collect per replication; the episode stops early once reached.
    pub max_tests_per_replication: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionStats {
    pub tests: usize,
    pub accept_h1: usize,
    pub accept_h0: usize,
    pub mean_samples: f64,
    pub samples_stderr: f64,
}

impl DetectionStats {
    pub fn h1_rate(&self) -> f64 {
        self.accept_h1 as f64 / self.tests.max(1) as f64
    }

    pub fn h0_rate(&self) -> f64 {
        self.accept_h0 as f64 / self.tests.max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimSummary {
    pub replications: usize,
    pub measured_slots: u64,
    pub throughput_mean: f64,
    pub throughput_stderr: f64,
    pub tp_mean: f64,
    pub tp_stderr: f64,
    /// Completed TP counts by length `1..=TP_HISTOGRAM_BINS`.
    pub tp_histogram: Vec<u64>,
    pub attack_fraction: f64,
    pub attack_fraction_stderr: f64,
    pub detection: Option<DetectionStats>,
}

impl SimSummary {
    /// Throughput implied by the mean TP length.
    pub fn throughput_from_tp_mean(&self) -> f64 {
        1.0 - 1.0 / self.tp_mean
    }
}

#[derive(Debug, Clone, PartialEq)]
struct EpisodeStats {
    slots: u64,
    successes: u64,
    jams: u64,
    tp_count: u64,
    tp_total: u64,
    histogram: Vec<u64>,
    tests: Vec<(SprtDecision, u64)>,
}

fn run_episode(config: &SimConfig, replication: u64, detection: Option<&DetectionSettings>) -> Result<EpisodeStats> {
    let mut rng = config.replication_rng(replication);
    let mut state = SimState::initial(config, &mut rng)?;
    let mut stats = EpisodeStats {
        slots: 0,
        successes: 0,
        jams: 0,
        tp_count: 0,
        tp_total: 0,
        histogram: vec![0; TP_HISTOGRAM_BINS],
        tests: Vec::new(),
    };
    let mut run = 0u64;
    // TPs already underway at the end of warmup are not counted.
    let mut counting_tp = false;
    let mut sprt = SprtState::default();
    for t in 0..config.horizon {
        let measured = t >= config.warmup;
        let at_tp_start = state.current.is_none();
        if measured && at_tp_start {
            counting_tp = true;
        }
        let out = step(&mut state, config, &mut rng)?;
        if !measured {
            continue;
        }
        stats.slots += 1;
        stats.successes += out.success as u64;
        stats.jams += out.jam_target.is_some() as u64;
        run += 1;
        if !out.success {
            if counting_tp {
                stats.tp_count += 1;
                stats.tp_total += run;
                stats.histogram[(run as usize).min(TP_HISTOGRAM_BINS) - 1] += 1;
            }
            run = 0;
        }
        if let Some(det) = detection {
            let observe = match det.scope {
                DetectionScope::ContinuationSlots => out.continuation,
                DetectionScope::AllSlots => true,
            };
            if observe {
                let (decision, next) = sprt_step(sprt, !out.success, &det.hypotheses, &det.thresholds);
                sprt = next;
                if decision != SprtDecision::Continue {
                    stats.tests.push((decision, sprt.samples_seen));
                    sprt = SprtState::default();
                    if det.max_tests_per_replication.is_some_and(|m| stats.tests.len() >= m) {
                        break;
                    }
                }
            }
        }
    }
    Ok(stats)
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

fn summarize(episodes: &[EpisodeStats], with_detection: bool) -> SimSummary {
    let throughput: Vec<f64> = episodes.iter().map(|e| e.successes as f64 / e.slots as f64).collect();
    let attack: Vec<f64> = episodes.iter().map(|e| e.jams as f64 / e.slots as f64).collect();
    let tp: Vec<f64> = episodes.iter().filter(|e| e.tp_count > 0).map(|e| e.tp_total as f64 / e.tp_count as f64).collect();
    let (throughput_mean, throughput_stderr) = mean_and_stderr(&throughput);
    let (attack_fraction, attack_fraction_stderr) = mean_and_stderr(&attack);
    let (tp_mean, tp_stderr) = if tp.is_empty() { (f64::NAN, f64::NAN) } else { mean_and_stderr(&tp) };
    let mut tp_histogram = vec![0u64; TP_HISTOGRAM_BINS];
    for e in episodes {
        for (acc, c) in tp_histogram.iter_mut().zip(&e.histogram) {
            *acc += c;
        }
    }
    let detection = with_detection.then(|| {
        let samples: Vec<f64> = episodes.iter().flat_map(|e| e.tests.iter().map(|t| t.1 as f64)).collect();
        let count = |d: SprtDecision| episodes.iter().flat_map(|e| &e.tests).filter(|t| t.0 == d).count();
        let (mean_samples, samples_stderr) =
            if samples.is_empty() { (f64::NAN, f64::NAN) } else { mean_and_stderr(&samples) };
        DetectionStats {
            tests: samples.len(),
            accept_h1: count(SprtDecision::AcceptH1),
            accept_h0: count(SprtDecision::AcceptH0),
            mean_samples,
            samples_stderr,
        }
    });
    SimSummary {
        replications: episodes.len(),
        measured_slots: episodes.iter().map(|e| e.slots).sum(),
        throughput_mean,
        throughput_stderr,
        tp_mean,
        tp_stderr,
        tp_histogram,
        attack_fraction,
        attack_fraction_stderr,
        detection,
    }
}

fn run_all(config: &SimConfig, detection: Option<&DetectionSettings>) -> Result<SimSummary> {
    config.validate()?;
    let episodes = (0..config.replications as u64)
        .into_par_iter()
        .map(|r| run_episode(config, r, detection))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(&episodes, detection.is_some()))
}

/// Runs every replication (in parallel) and aggregates them in replication order.
pub fn run_replications(config: &SimConfig) -> Result<SimSummary> {
    run_all(config, None)
}

/// As [`run_replications`], with a detector restarted after every decision.
pub fn run_with_detection(config: &SimConfig, settings: &DetectionSettings) -> Result<SimSummary> {
    run_all(config, Some(settings))
}

/// Detector tuned to a greedy attack at `design_alpha` on `params`.
pub fn detection_for(params: &GilbertElliotParams, design_alpha: f64, thresholds: SprtThresholds) -> Result<DetectionSettings> {
    Ok(DetectionSettings {
        hypotheses: SprtHypotheses::under_attack(params, AttackProbability::new(design_alpha)?)?,
        thresholds,
        scope: DetectionScope::ContinuationSlots,
        max_tests_per_replication: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{contrarian_tp_length, myopic_tp_length, tp_chain_stationary, TpChainSpec};
    use crate::sprt::wald_thresholds;

    fn pair(strategy: AttackStrategy, alpha: f64, policy: PolicySpec) -> SimConfig {
        SimConfig::new(vec![GilbertElliotParams::baseline(); 2], policy, AttackerSpec::new(strategy, alpha).unwrap())
    }

    #[test]
    fn config_validation() {
        let ok = pair(AttackStrategy::Greedy, 0.3, PolicySpec::myopic());
        assert!(ok.validate().is_ok());
        assert!(ok.clone().with_horizon(100, 100).validate().is_err());
        assert!(ok.clone().with_replications(0).validate().is_err());
        let mut bad = ok.clone();
        bad.channels.pop();
        assert!(matches!(bad.validate(), Err(Error::TooFewChannels(1))));
        let mut bad = ok.clone();
        bad.initial_beliefs = InitialBeliefs::Explicit(vec![0.5; 3]);
        assert!(bad.validate().is_err());
        let mut bad = ok;
        bad.policy = PolicySpec::boltzmann(-1.0);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn full_greedy_jamming_blocks_every_slot() {
        let config = pair(AttackStrategy::Greedy, 1.0, PolicySpec::myopic()).with_horizon(5_000, 0);
        let trace = run_trace(&config, 0).unwrap();
        assert!(trace.iter().all(|r| !r.transmission_success && r.reward == 0));

        // A randomized user escapes whenever it picks a channel other than the best one.
        let config = pair(AttackStrategy::Greedy, 1.0, PolicySpec::boltzmann(0.5)).with_horizon(5_000, 0);
        let trace = run_trace(&config, 0).unwrap();
        assert!(trace.iter().all(|r| r.jam_target.is_some()));
        assert!(trace.iter().any(|r| r.transmission_success));
        assert!(trace.iter().filter(|r| r.jam_target == Some(r.action.channel())).all(|r| r.reward == 0));
    }

    #[test]
    fn absorbing_idle_channel_pays_every_slot() {
        let channels = vec![
            GilbertElliotParams::from_idle_probs(1.0, 0.5).unwrap(),
            GilbertElliotParams::baseline(),
        ];
        let mut config = SimConfig::new(channels, PolicySpec::myopic(), AttackerSpec::none()).with_horizon(2_000, 0);
        config.initial_beliefs = InitialBeliefs::Explicit(vec![1.0, 0.5]);
        for r in 0..20 {
            let trace = run_trace(&config, r).unwrap();
            let first = trace.iter().position(|s| s.transmission_success).unwrap();
            assert!(trace[first..].iter().all(|s| s.reward == 1));
        }
    }

    #[test]
    fn reward_matches_state_and_jam() {
        let config = pair(AttackStrategy::Uniform, 0.4, PolicySpec::boltzmann(0.3)).with_horizon(20_000, 0);
        for r in run_trace(&config, 3).unwrap() {
            let a = r.action.channel();
            if r.jam_target == Some(a) {
                assert_eq!(r.reward, 0);
                assert_eq!(r.true_states[a], ChannelState::Busy);
            } else {
                assert_eq!(r.reward == 1, r.true_states[a].is_idle());
            }
        }
    }

    #[test]
    fn tp_measurement_examples() {
        let config = pair(AttackStrategy::Greedy, 1.0, PolicySpec::myopic()).with_horizon(1_000, 0);
        let m = measure_tp_lengths(&run_trace(&config, 0).unwrap());
        assert_eq!(m.lengths.len(), 1_000);
        assert_eq!(m.mean, 1.0);
    }

    #[test]
    fn myopic_pair_matches_stationary_chain() {
        let config = pair(AttackStrategy::Greedy, 0.0, PolicySpec::myopic()).with_horizon(200_000, 10_000).with_replications(10);
        let s = run_replications(&config).unwrap();
        let chain = tp_chain_stationary(&TpChainSpec::new(GilbertElliotParams::baseline(), AttackProbability::none()).unwrap()).unwrap();
        assert!((s.tp_mean - chain.mean_length).abs() < 3.0 * s.tp_stderr, "{} ± {}", s.tp_mean, s.tp_stderr);
        let u = 1.0 - 1.0 / chain.mean_length;
        assert!((s.throughput_mean - u).abs() < 3.0 * s.throughput_stderr);
    }

    #[test]
    fn myopic_under_greedy_attack_matches_closed_form() {
        let a = 0.3;
        let config = pair(AttackStrategy::Greedy, a, PolicySpec::myopic()).with_horizon(200_000, 10_000).with_replications(10);
        let s = run_replications(&config).unwrap();
        let l = myopic_tp_length(&GilbertElliotParams::baseline(), AttackProbability::new(a).unwrap()).unwrap();
        assert!((s.tp_mean - l).abs() < 3.0 * s.tp_stderr, "{} ± {} vs {l}", s.tp_mean, s.tp_stderr);
        assert!((s.attack_fraction - a).abs() < 3.0 * s.attack_fraction_stderr);
    }

    #[test]
    fn contrarian_pair_matches_closed_form() {
        let config = pair(AttackStrategy::Greedy, 0.0, PolicySpec::contrarian()).with_horizon(100_000, 5_000).with_replications(10);
        let s = run_replications(&config).unwrap();
        let l = contrarian_tp_length(&GilbertElliotParams::baseline(), 0.0).unwrap();
        assert!((s.tp_mean - l).abs() < 3.0 * s.tp_stderr, "{} ± {}", s.tp_mean, s.tp_stderr);
    }

    #[test]
    fn throughput_identity_holds() {
        let config = pair(AttackStrategy::Uniform, 0.3, PolicySpec::boltzmann(1.0)).with_horizon(100_000, 5_000).with_replications(8);
        let s = run_replications(&config).unwrap();
        let implied = s.throughput_from_tp_mean();
        assert!((implied - s.throughput_mean).abs() < 3.0 * s.throughput_stderr.max(1e-4));
    }

    #[test]
    fn replications_are_reproducible_and_order_free() {
        let config = pair(AttackStrategy::AlphaOptimal, 0.4, PolicySpec::boltzmann(2.0)).with_horizon(20_000, 1_000).with_replications(6).with_seed(99);
        let a = run_replications(&config).unwrap();
        let b = run_replications(&config).unwrap();
        assert_eq!(a, b);

        let forward: Vec<_> = (0..6).map(|r| run_episode(&config, r, None).unwrap()).collect();
        let mut backward: Vec<_> = (0..6).rev().map(|r| run_episode(&config, r, None).unwrap()).collect();
        backward.reverse();
        assert_eq!(summarize(&forward, false), summarize(&backward, false));
        assert_eq!(summarize(&forward, false), a);
    }

    #[test]
    fn detection_records_tests() {
        let base = GilbertElliotParams::baseline();
        let config = pair(AttackStrategy::Greedy, 1.0, PolicySpec::myopic()).with_horizon(20_000, 0).with_replications(2);
        let det = detection_for(&base, 1.0, wald_thresholds(0.01, 0.01).unwrap()).unwrap();
        // Full jamming never continues a TP, so only the all-slot scope sees anything.
        let s = run_with_detection(&config, &det).unwrap();
        assert_eq!(s.detection.as_ref().unwrap().tests, 0);
        let all = DetectionSettings { scope: DetectionScope::AllSlots, ..det };
        let s = run_with_detection(&config, &all).unwrap();
        let d = s.detection.unwrap();
        assert_eq!(d.mean_samples, 2.0);
        assert_eq!(d.accept_h1, d.tests);
    }
}

//! Opportunistic spectrum access under belief-manipulation jamming.
//!
//! A cognitive user picks one of several Gilbert-Elliot channels per slot from its
//! beliefs about their occupancy; an attacker jams a fraction of the slots to push
//! the user's beliefs the wrong way. The crate provides the channel and belief model,
//! the user's selection policies, attacker strategies, a sequential detector,
//! analytic transmission-period results, the attacker/defender optimization problems
//! and a slot-level simulator.

pub mod adversary;
pub mod channel;
pub mod closed_form;
pub mod error;
pub mod optimize;
pub mod policy;
pub mod sim;
pub mod sprt;

pub use adversary::{
    attacker_cost, greedy_division, omega_division, optimal_division, sample_attack, uniform_division,
    AttackProbability, AttackStrategy, DivisionProbabilities,
};
pub use channel::{BeliefVector, ChannelState, GilbertElliotParams, Observation};
pub use closed_form::{
    contrarian_tp_length, myopic_formula_check, myopic_tp_length, myopic_tp_length_printed, per_channel_tp_length,
    performance, robustness, selection_entropy, softmax_dominance_alpha_threshold, softmax_dominance_temperature_bound,
    softmax_tp_length, throughput_from_tp, tp_chain_stationary, tp_chain_transition, MyopicFormulaCheck, Throughput,
    TpChainSpec, TpStatistics,
};
pub use error::{Error, Result};
pub use optimize::{
    attack_objective, brute_force_simplex, solve_attack_division, solve_defense, solve_two_channel_attack,
    solve_two_channel_defense, DefenseParametrization, SimplexPoint, SolverReport,
};
pub use policy::{boltzmann_probs, myopic_select, PolicyKind, PolicySpec, ResampleMode, SensingAction};
pub use sim::{
    run_replications, run_with_detection, AttackerSpec, DetectionScope, DetectionSettings, DetectionStats,
    InitialBeliefs, JamEffect, SimConfig, SimSummary, SlotRecord,
};
pub use sprt::{asn_under_attack, wald_thresholds, SprtDecision, SprtHypotheses, SprtState, SprtThresholds};

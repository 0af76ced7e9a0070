//! Shared fixtures for the benchmarks.

use cogjam_core::{boltzmann_probs, AttackStrategy, AttackerSpec, BeliefVector, GilbertElliotParams, PolicySpec, SimConfig};

/// Stationary beliefs and a τ = 2 Boltzmann selection on the table1 channel set.
pub fn table1_defender() -> (Vec<GilbertElliotParams>, Vec<f64>, Vec<f64>) {
    let channels = GilbertElliotParams::table1();
    let omega = BeliefVector::stationary(&channels).expect("valid channels");
    let q = boltzmann_probs(&omega, 2.0).expect("positive temperature");
    (channels, omega.as_slice().to_vec(), q)
}

/// Short Boltzmann-vs-greedy run on `n` baseline channels.
pub fn small_sim(n: usize, horizon: u64, replications: usize) -> SimConfig {
    let attacker = AttackerSpec::new(AttackStrategy::Greedy, 0.5).expect("valid attack probability");
    SimConfig::new(vec![GilbertElliotParams::baseline(); n], PolicySpec::boltzmann(2.0), attacker)
        .with_horizon(horizon, horizon / 10)
        .with_replications(replications)
        .with_seed(1)
}

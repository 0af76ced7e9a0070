//! Attacker strategies and the attacker-cost measure.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{BeliefVector, GilbertElliotParams};
use crate::error::{check_probability, Error, Result};
use crate::optimize::solve_attack_division;
use crate::policy::{argmax, check_temperature, one_hot, sample_index, softmax};
use crate::sprt::{bernoulli_kl, SprtHypotheses};

/// Long-run fraction of jammed slots.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct AttackProbability(f64);

impl AttackProbability {
    pub fn new(alpha: f64) -> Result<Self> {
        check_probability("alpha", alpha).map(Self)
    }

    pub fn none() -> Self {
        Self(0.0)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl<'de> Deserialize<'de> for AttackProbability {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = f64::deserialize(deserializer)?;
        Self::new(v).map_err(serde::de::Error::custom)
    }
}

/// Target distribution of a jam, conditional on the slot being attacked.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DivisionProbabilities(Vec<f64>);

pub(crate) const SIMPLEX_TOL: f64 = 1e-9;

impl DivisionProbabilities {
    pub fn new(d: Vec<f64>) -> Result<Self> {
        if d.len() < 2 {
            return Err(Error::TooFewChannels(d.len()));
        }
        for &x in &d {
            if !x.is_finite() || x < -SIMPLEX_TOL {
                return Err(Error::InvalidParameter(format!("division entry {x} is negative")));
            }
        }
        let total: f64 = d.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidParameter(format!("division sums to {total}, expected 1")));
        }
        Ok(Self(d.into_iter().map(|x| x.max(0.0)).collect()))
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

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AttackStrategy {
    /// All mass on the channel the defender believes best.
    Greedy,
    /// Equal mass on every channel.
    Uniform,
    /// Softmax over the beliefs with temperature `tau_a`.
    OmegaBoltzmann { tau_a: f64 },
    /// Minimizes the defender's expected transmission-period length for the given selection probabilities.
    AlphaOptimal,
}

impl AttackStrategy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            AttackStrategy::OmegaBoltzmann { tau_a } => check_temperature(tau_a),
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            AttackStrategy::Greedy => "greedy",
            AttackStrategy::Uniform => "uniform",
            AttackStrategy::OmegaBoltzmann { .. } => "omega",
            AttackStrategy::AlphaOptimal => "optimal",
        }
    }

    /// Division for the current beliefs. `selection` is the defender's channel-selection
    /// distribution, used only by the α-optimal attacker.
    pub fn division(
        &self,
        beliefs: &BeliefVector,
        selection: &[f64],
        alpha: AttackProbability,
        channels: &[GilbertElliotParams],
    ) -> Result<DivisionProbabilities> {
        match *self {
            AttackStrategy::Greedy => Ok(greedy_division(beliefs)),
            AttackStrategy::Uniform => uniform_division(beliefs.len()),
            AttackStrategy::OmegaBoltzmann { tau_a } => omega_division(beliefs, tau_a),
            AttackStrategy::AlphaOptimal => optimal_division(selection, beliefs, alpha, channels),
        }
    }
}

pub fn greedy_division(beliefs: &BeliefVector) -> DivisionProbabilities {
    DivisionProbabilities(one_hot(beliefs.len(), argmax(beliefs.as_slice())))
}

pub fn uniform_division(n: usize) -> Result<DivisionProbabilities> {
    if n < 2 {
        return Err(Error::TooFewChannels(n));
    }
    Ok(DivisionProbabilities(vec![1.0 / n as f64; n]))
}

pub fn omega_division(beliefs: &BeliefVector, tau_a: f64) -> Result<DivisionProbabilities> {
    check_temperature(tau_a)?;
    Ok(DivisionProbabilities(softmax(beliefs.as_slice(), tau_a)))
}

/// Division minimizing the defender's expected transmission-period length.
pub fn optimal_division(
    q: &[f64],
    beliefs: &BeliefVector,
    alpha: AttackProbability,
    channels: &[GilbertElliotParams],
) -> Result<DivisionProbabilities> {
    let report = solve_attack_division(q, beliefs.as_slice(), channels, alpha.value(), None)?;
    if !report.converged {
        return Err(Error::NonConvergence(format!(
            "attack division after {} iterations, residual {:.3e}",
            report.iterations, report.kkt_residual
        )));
    }
    Ok(DivisionProbabilities(report.solution))
}

/// Jam decision for one slot from two uniforms: `u_attack` decides whether to jam, `u_target` picks the channel.
pub fn attack_from_uniforms(d: &DivisionProbabilities, alpha: AttackProbability, u_attack: f64, u_target: f64) -> Option<usize> {
    if u_attack < alpha.value() {
        Some(sample_index(d.as_slice(), u_target))
    } else {
        None
    }
}

/// Jams with probability α, targeting a channel drawn from `d`.
///
/// Both uniforms are always drawn so the stream position does not depend on the outcome.
pub fn sample_attack<R: Rng + ?Sized>(d: &DivisionProbabilities, alpha: AttackProbability, rng: &mut R) -> Option<usize> {
    let u_attack: f64 = rng.random();
    let u_target: f64 = rng.random();
    attack_from_uniforms(d, alpha, u_attack, u_target)
}

/// Detection-normalized attack cost: the inverse of the SPRT sample count, scaled so that α = 1 costs 1.
pub fn attacker_cost(alpha: AttackProbability, params: &GilbertElliotParams) -> Result<f64> {
    let p10 = params.p10();
    if p10 <= 0.0 || p10 >= 1.0 {
        return Err(Error::InvalidParameter(format!("attacker cost needs p10 in (0, 1), got {p10}")));
    }
    let hyp = SprtHypotheses::under_attack(params, alpha)?;
    Ok(bernoulli_kl(hyp.theta1(), hyp.theta0()) / (1.0 / p10).ln())
}

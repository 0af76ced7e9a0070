//! Analytic transmission-period lengths, throughput and the derived measures.
//!
//! A transmission period (TP) is the run of slots a user spends on one channel, ending
//! with the first failed slot. Steady-state throughput is `1 - 1 / mean TP length`.

use serde::Serialize;

use crate::adversary::AttackProbability;
use crate::channel::GilbertElliotParams;
use crate::error::{check_probability, Error, Result};

const TAIL_MASS: f64 = 1e-12;
const MAX_TRUNCATION: usize = 1_000_000;
const STATIONARY_RESIDUAL: f64 = 1e-12;

/// Chain of successive myopic TP lengths on two identical channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TpChainSpec {
    params: GilbertElliotParams,
    alpha: AttackProbability,
    truncation_k: usize,
}

impl TpChainSpec {
    /// Picks the smallest truncation whose geometric tail mass is below 1e-12.
    pub fn new(params: GilbertElliotParams, alpha: AttackProbability) -> Result<Self> {
        params.require_positive_correlation()?;
        let rho = params.p11() * (1.0 - alpha.value());
        let k = if rho <= 0.0 {
            2
        } else if rho >= 1.0 {
            return Err(Error::Truncation(format!("TP lengths are unbounded (p11 (1 - alpha) = {rho})")));
        } else {
            let needed = (TAIL_MASS.ln() / rho.ln()).ceil() + 2.0;
            if needed > MAX_TRUNCATION as f64 {
                return Err(Error::Truncation(format!(
                    "tail ratio {rho} needs {needed} states, cap is {MAX_TRUNCATION}"
                )));
            }
            (needed as usize).max(2)
        };
        Ok(Self { params, alpha, truncation_k: k })
    }

    pub fn with_truncation(params: GilbertElliotParams, alpha: AttackProbability, truncation_k: usize) -> Result<Self> {
        params.require_positive_correlation()?;
        if truncation_k < 2 {
            return Err(Error::Truncation(format!("truncation must be at least 2, got {truncation_k}")));
        }
        Ok(Self { params, alpha, truncation_k })
    }

    pub fn params(&self) -> &GilbertElliotParams {
        &self.params
    }

    pub fn alpha(&self) -> AttackProbability {
        self.alpha
    }

    pub fn truncation_k(&self) -> usize {
        self.truncation_k
    }

    fn survival_ratio(&self) -> f64 {
        self.params.p11() * (1.0 - self.alpha.value())
    }

    /// Probability that the slot after a TP of length `i` succeeds on the other channel.
    fn first_success(&self, i: usize) -> f64 {
        self.params.k_step_idle_prob(i as u32 + 1) * (1.0 - self.alpha.value())
    }
}

/// Probability that a TP of length `i` is followed by one of length `j` (both from 1).
pub fn tp_chain_transition(spec: &TpChainSpec, i: usize, j: usize) -> Result<f64> {
    if i == 0 || j == 0 {
        return Err(Error::InvalidParameter("TP lengths start at 1".into()));
    }
    let start = spec.first_success(i);
    if j == 1 {
        return Ok(1.0 - start);
    }
    let rho = spec.survival_ratio();
    Ok(start * rho.powi(j as i32 - 2) * (1.0 - rho))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TpStatistics {
    pub mean_length: f64,
    /// Probability of lengths `1..=K`; the truncated tail is folded into the last entry.
    pub distribution: Vec<f64>,
}

/// Stationary law of the TP-length chain by power iteration on the truncated chain.
pub fn tp_chain_stationary(spec: &TpChainSpec) -> Result<TpStatistics> {
    if spec.alpha.value() >= 1.0 {
        return Ok(TpStatistics { mean_length: 1.0, distribution: vec![1.0] });
    }
    let k = spec.truncation_k;
    let rho = spec.survival_ratio();
    let start: Vec<f64> = (1..=k).map(|i| spec.first_success(i)).collect();
    // Column j >= 2 of every row is proportional to the same geometric shape, so one
    // scalar (the mass moving to a fresh successful slot) determines the next iterate.
    let mut shape = vec![0.0; k];
    let mut w = 1.0 - rho;
    for s in shape.iter_mut().skip(1) {
        *s = w;
        w *= rho;
    }
    let folded: f64 = shape.iter().sum();
    shape[k - 1] += 1.0 - folded;

    let mut lambda = vec![0.0; k];
    lambda[0] = 1.0;
    for _ in 0..1_000_000 {
        let moving: f64 = lambda.iter().zip(&start).map(|(l, s)| l * s).sum();
        let mut next = shape.iter().map(|s| moving * s).collect::<Vec<_>>();
        next[0] = 1.0 - moving;
        let residual: f64 = next.iter().zip(&lambda).map(|(a, b)| (a - b).abs()).sum();
        lambda = next;
        if residual < STATIONARY_RESIDUAL {
            let mean_length = lambda.iter().enumerate().map(|(i, l)| (i + 1) as f64 * l).sum();
            return Ok(TpStatistics { mean_length, distribution: lambda });
        }
    }
    Err(Error::NonConvergence("TP chain power iteration".into()))
}

fn myopic_terms(params: &GilbertElliotParams, alpha: f64) -> Result<(f64, f64, f64)> {
    params.require_positive_correlation()?;
    let omega0 = params.stationary_occupancy()?;
    let c = params.correlation();
    let rho = params.p11() * (1.0 - alpha);
    let two_step = params.k_step_idle_prob(2);
    let a_term = omega0 * (1.0 - alpha) * (1.0 - c.powi(3) * (1.0 - rho) / (1.0 - rho * c));
    Ok((two_step, a_term, rho))
}

/// Probability that the first slot on a freshly selected channel is a success, in steady state.
pub fn myopic_switch_success(params: &GilbertElliotParams, alpha: AttackProbability) -> Result<f64> {
    let a = alpha.value();
    let (two_step, a_term, _) = myopic_terms(params, a)?;
    Ok((1.0 - a) * two_step / ((1.0 - a) * two_step + 1.0 - a_term))
}

/// Mean myopic TP length on two identical channels.
pub fn myopic_tp_length(params: &GilbertElliotParams, alpha: AttackProbability) -> Result<f64> {
    if alpha.value() >= 1.0 {
        params.require_positive_correlation()?;
        return Ok(1.0);
    }
    let rho = params.p11() * (1.0 - alpha.value());
    Ok(1.0 + myopic_switch_success(params, alpha)? / (1.0 - rho))
}

/// The closed form with denominator `(1 - alpha) p01^(2) - A`, evaluated verbatim.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrintedMyopicForm {
    pub switch_success: f64,
    pub a_term: f64,
    pub tp_length: f64,
    pub in_range: bool,
}

pub fn myopic_tp_length_printed(params: &GilbertElliotParams, alpha: AttackProbability) -> Result<PrintedMyopicForm> {
    let a = alpha.value();
    let (two_step, a_term, rho) = myopic_terms(params, a)?;
    let switch_success = (1.0 - a) * two_step / ((1.0 - a) * two_step - a_term);
    Ok(PrintedMyopicForm {
        switch_success,
        a_term,
        tp_length: 1.0 + switch_success / (1.0 - rho),
        in_range: (0.0..=1.0).contains(&switch_success),
    })
}

/// Side-by-side comparison of both myopic closed forms with the numeric chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MyopicFormulaCheck {
    pub alpha: f64,
    pub printed: PrintedMyopicForm,
    pub corrected_switch_success: f64,
    pub corrected_tp_length: f64,
    pub chain_tp_length: f64,
}

impl MyopicFormulaCheck {
    pub fn printed_discrepancy(&self) -> f64 {
        (self.printed.tp_length - self.chain_tp_length).abs()
    }

    pub fn corrected_discrepancy(&self) -> f64 {
        (self.corrected_tp_length - self.chain_tp_length).abs()
    }
}

pub fn myopic_formula_check(params: &GilbertElliotParams, alpha: AttackProbability) -> Result<MyopicFormulaCheck> {
    let chain = tp_chain_stationary(&TpChainSpec::new(*params, alpha)?)?;
    Ok(MyopicFormulaCheck {
        alpha: alpha.value(),
        printed: myopic_tp_length_printed(params, alpha)?,
        corrected_switch_success: myopic_switch_success(params, alpha)?,
        corrected_tp_length: myopic_tp_length(params, alpha)?,
        chain_tp_length: chain.mean_length,
    })
}

/// Mean TP length of a user that always re-enters the channel it just failed on,
/// with that channel jammed at rate `x`.
pub fn contrarian_tp_length(params: &GilbertElliotParams, x: f64) -> Result<f64> {
    check_probability("x", x)?;
    // p10 + p11 x is 1 - p11 (1 - x), written so that x = 0 divides by p10 exactly.
    let leave = params.p10() + params.p11() * x;
    if leave <= 0.0 {
        return Err(Error::InvalidParameter(format!("p11 (1 - x) = {} gives unbounded TPs", 1.0 - leave)));
    }
    Ok(1.0 + params.p01() * (1.0 - x) / leave)
}

/// Two identical channels: the softmax user takes the better channel with probability `q`
/// and the attacker puts a share `d` of its jams there.
pub fn softmax_tp_length(params: &GilbertElliotParams, q: f64, d: f64, alpha: AttackProbability) -> Result<f64> {
    check_probability("q", q)?;
    check_probability("d", d)?;
    let a = alpha.value();
    let on_best = myopic_tp_length(params, AttackProbability::new(a * d)?)?;
    let on_other = contrarian_tp_length(params, a * (1.0 - d))?;
    Ok(q * on_best + (1.0 - q) * on_other)
}

/// Fraction of successful slots, in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Throughput(f64);

impl Throughput {
    pub fn new(value: f64) -> Result<Self> {
        check_probability("throughput", value).map(Self)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn throughput_from_tp(mean_tp: f64) -> Result<Throughput> {
    if !mean_tp.is_finite() || mean_tp < 1.0 {
        return Err(Error::InvalidParameter(format!("mean TP length must be at least 1, got {mean_tp}")));
    }
    Ok(Throughput(1.0 - 1.0 / mean_tp))
}

/// Mean TP length on one channel with belief `omega` when a fraction `effective_attack` of its slots is jammed.
pub fn per_channel_tp_length(omega: f64, p11: f64, effective_attack: f64) -> Result<f64> {
    check_probability("omega", omega)?;
    check_probability("p11", p11)?;
    check_probability("effective_attack", effective_attack)?;
    let keep = p11 * (1.0 - effective_attack);
    if keep >= 1.0 {
        return Err(Error::InvalidParameter(format!("p11 (1 - e) = {keep} gives unbounded TPs")));
    }
    Ok(1.0 + omega * (1.0 - effective_attack) / (1.0 - keep))
}

/// Shannon entropy (nats) of a selection distribution.
pub fn selection_entropy(probs: &[f64]) -> Result<f64> {
    let total: f64 = probs.iter().sum();
    if probs.iter().any(|&p| !(0.0..=1.0 + 1e-12).contains(&p)) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter("entropy needs a probability vector".into()));
    }
    Ok(0.0 - probs.iter().filter(|&&p| p > 0.0).map(|&p| p * p.ln()).sum::<f64>())
}

pub fn bernoulli_entropy(q: f64) -> Result<f64> {
    check_probability("q", q)?;
    selection_entropy(&[q, 1.0 - q])
}

fn identical_channel_inputs(params: &GilbertElliotParams, n: usize) -> Result<(f64, f64)> {
    params.require_positive_correlation()?;
    if n < 3 {
        return Err(Error::InvalidParameter(format!("dominance bounds need at least three channels, got {n}")));
    }
    Ok((params.stationary_occupancy()?, params.p01()))
}

/// Attack rate above which some Boltzmann temperature beats the myopic user on `n` identical channels.
pub fn softmax_dominance_alpha_threshold(params: &GilbertElliotParams, n: usize) -> Result<f64> {
    let (omega0, p01) = identical_channel_inputs(params, n)?;
    let n = n as f64;
    Ok((omega0 - p01) * n / (omega0 * n - p01))
}

/// Temperature above which the Boltzmann user beats the myopic one at attack rate `alpha`.
pub fn softmax_dominance_temperature_bound(params: &GilbertElliotParams, n: usize, alpha: AttackProbability) -> Result<f64> {
    let threshold = softmax_dominance_alpha_threshold(params, n)?;
    let (omega0, p01) = identical_channel_inputs(params, n)?;
    let a = alpha.value();
    if a <= threshold {
        return Err(Error::InvalidParameter(format!(
            "attack rate {a} is not above the dominance threshold {threshold}"
        )));
    }
    if a >= 1.0 {
        return Ok(0.0);
    }
    let n = n as f64;
    let log_arg = p01 * (n - a) / (omega0 * n * (1.0 - a));
    if log_arg.is_nan() || log_arg <= 1.0 {
        return Err(Error::InvalidParameter(format!("log argument {log_arg} is not above 1")));
    }
    Ok((omega0 - p01) / log_arg.ln())
}

/// Ratio of attacked to unattacked throughput.
pub fn robustness(u_zero: Throughput, u_alpha: Throughput) -> Result<f64> {
    if u_zero.0 <= 0.0 {
        return Err(Error::InvalidParameter("robustness needs positive unattacked throughput".into()));
    }
    Ok(1.0 - (u_zero.0 - u_alpha.0) / u_zero.0)
}

pub fn performance(u_zero: Throughput) -> Throughput {
    u_zero
}

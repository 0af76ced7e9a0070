//! Attacker and defender optimization.
//!
//! The attacker's problem is separable and convex on the simplex and is solved with
//! Newton's method after eliminating one coordinate, with an active set for the
//! nonnegativity bounds. The defender's problems are low-dimensional and are solved
//! by grid search followed by golden-section or pattern-search refinement.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::{AttackProbability, SIMPLEX_TOL};
use crate::channel::GilbertElliotParams;
use crate::closed_form::{per_channel_tp_length, softmax_tp_length, throughput_from_tp};
use crate::error::{check_probability, Error, Result};
use crate::policy::{argmax, softmax};

pub const DEFAULT_KKT_TOL: f64 = 1e-10;
const MAX_NEWTON_ITERATIONS: usize = 200;
const CURVATURE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverReport<T> {
    pub solution: T,
    pub objective_value: f64,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// A point on the probability simplex.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SimplexPoint(Vec<f64>);

impl SimplexPoint {
    pub fn new(coordinates: Vec<f64>) -> Result<Self> {
        check_simplex("point", &coordinates)?;
        Ok(Self(coordinates))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

fn check_simplex(name: &str, v: &[f64]) -> Result<()> {
    if v.iter().any(|&x| !x.is_finite() || x < -SIMPLEX_TOL) {
        return Err(Error::InvalidParameter(format!("{name} has a negative or non-finite entry")));
    }
    let total: f64 = v.iter().sum();
    if (total - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::InvalidParameter(format!("{name} sums to {total}, expected 1")));
    }
    Ok(())
}

fn check_dims(q: &[f64], omega: &[f64], channels: &[GilbertElliotParams]) -> Result<()> {
    let n = q.len();
    if n < 2 {
        return Err(Error::TooFewChannels(n));
    }
    for len in [omega.len(), channels.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, got: len });
        }
    }
    Ok(())
}

/// Defender's expected TP length `sum_i q_i L(omega_i, alpha d_i)` for attack division `d`.
pub fn attack_objective(d: &[f64], q: &[f64], omega: &[f64], channels: &[GilbertElliotParams], alpha: f64) -> Result<f64> {
    check_dims(q, omega, channels)?;
    if d.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: q.len(), got: d.len() });
    }
    let mut total = 0.0;
    for i in 0..d.len() {
        total += q[i] * per_channel_tp_length(omega[i], channels[i].p11(), alpha * d[i].clamp(0.0, 1.0))?;
    }
    Ok(total)
}

/// Partial derivatives of the attack objective.
pub fn attack_gradient(d: &[f64], q: &[f64], omega: &[f64], channels: &[GilbertElliotParams], alpha: f64) -> Vec<f64> {
    (0..d.len())
        .map(|i| {
            let den = 1.0 - channels[i].p11() * (1.0 - alpha * d[i]);
            -alpha * q[i] * omega[i] / (den * den)
        })
        .collect()
}

/// Diagonal of the Hessian; the objective is separable so the off-diagonal entries vanish.
pub fn attack_hessian_diagonal(d: &[f64], q: &[f64], omega: &[f64], channels: &[GilbertElliotParams], alpha: f64) -> Vec<f64> {
    (0..d.len())
        .map(|i| {
            let p = channels[i].p11();
            let den = 1.0 - p * (1.0 - alpha * d[i]);
            2.0 * q[i] * omega[i] * alpha * alpha * p / (den * den * den)
        })
        .collect()
}

struct AttackProblem<'a> {
    q: &'a [f64],
    omega: &'a [f64],
    channels: &'a [GilbertElliotParams],
    alpha: f64,
}

impl AttackProblem<'_> {
    fn value(&self, d: &[f64]) -> f64 {
        (0..d.len())
            .map(|i| {
                let y = 1.0 - self.alpha * d[i];
                self.q[i] * (1.0 + self.omega[i] * y / (1.0 - self.channels[i].p11() * y))
            })
            .sum()
    }

    fn gradient(&self, d: &[f64]) -> Vec<f64> {
        attack_gradient(d, self.q, self.omega, self.channels, self.alpha)
    }

    fn hessian(&self, d: &[f64]) -> Vec<f64> {
        attack_hessian_diagonal(d, self.q, self.omega, self.channels, self.alpha)
    }
}

/// Minimizes the defender's expected TP length over attack divisions.
///
/// `q` is the defender's channel-selection distribution and `omega` the current beliefs.
/// The reported residual is the infinity norm of the reduced gradient on the free set,
/// combined with any violated multiplier sign on the active set.
pub fn solve_attack_division(
    q: &[f64],
    omega: &[f64],
    channels: &[GilbertElliotParams],
    alpha: f64,
    tol: Option<f64>,
) -> Result<SolverReport<Vec<f64>>> {
    check_dims(q, omega, channels)?;
    check_simplex("selection distribution", q)?;
    check_probability("alpha", alpha)?;
    for &w in omega {
        check_probability("omega", w)?;
    }
    let tol = tol.unwrap_or(DEFAULT_KKT_TOL);
    let n = q.len();
    let problem = AttackProblem { q, omega, channels, alpha };

    // Channels whose term does not depend on d never receive mass.
    let live: Vec<usize> = (0..n).filter(|&i| alpha * q[i] * omega[i] > 0.0).collect();
    if live.is_empty() {
        let d = vec![1.0 / n as f64; n];
        return Ok(SolverReport { objective_value: problem.value(&d), solution: d, kkt_residual: 0.0, iterations: 0, converged: true });
    }
    for &i in &live {
        if channels[i].p11() >= 1.0 {
            return Err(Error::InvalidParameter(format!("channel {i} has p11 = 1; its TP length is unbounded")));
        }
    }

    let mut d = vec![0.0; n];
    for &i in &live {
        d[i] = 1.0 / live.len() as f64;
    }
    let mut free: Vec<usize> = live.clone();
    let mut iterations = 0;
    let mut residual = f64::INFINITY;

    while iterations < MAX_NEWTON_ITERATIONS {
        iterations += 1;
        let g = problem.gradient(&d);
        let pivot = free[argmax(&free.iter().map(|&i| d[i]).collect::<Vec<_>>())];
        let others: Vec<usize> = free.iter().copied().filter(|&i| i != pivot).collect();
        let reduced: Vec<f64> = others.iter().map(|&j| g[j] - g[pivot]).collect();
        let stationarity = reduced.iter().fold(0.0f64, |m, r| m.max(r.abs()));

        // Multiplier of a bound is g_i - g_pivot; it must be nonnegative at an optimum.
        let (worst_bound, worst_multiplier) = (0..n)
            .filter(|&i| !free.contains(&i))
            .map(|i| (i, g[i] - g[pivot]))
            .fold((usize::MAX, 0.0f64), |acc, (i, m)| if m < acc.1 { (i, m) } else { acc });
        residual = stationarity.max(-worst_multiplier);

        if stationarity <= tol {
            if worst_bound != usize::MAX && worst_multiplier < -tol {
                free.push(worst_bound);
                free.sort_unstable();
                continue;
            }
            break;
        }

        // Newton step in the eliminated coordinates: (D + h_p 1 1^T) dz = -r, solved by Sherman-Morrison.
        let h = problem.hessian(&d);
        let hp = h[pivot].max(CURVATURE_FLOOR);
        let inv: Vec<f64> = others.iter().map(|&j| 1.0 / h[j].max(CURVATURE_FLOOR)).collect();
        let inv_r: f64 = inv.iter().zip(&reduced).map(|(a, r)| a * r).sum();
        let inv_sum: f64 = inv.iter().sum();
        let coupling = hp * inv_r / (1.0 + hp * inv_sum);
        let dz: Vec<f64> = inv.iter().zip(&reduced).map(|(a, r)| -(a * r - a * coupling)).collect();
        let mut step = vec![0.0; n];
        for (k, &j) in others.iter().enumerate() {
            step[j] = dz[k];
        }
        step[pivot] = -dz.iter().sum::<f64>();

        let mut t_max = 1.0f64;
        let mut blocking = None;
        for &i in &free {
            if step[i] < 0.0 {
                let t = d[i] / -step[i];
                if t < t_max {
                    t_max = t;
                    blocking = Some(i);
                }
            }
        }

        let f0 = problem.value(&d);
        let slope: f64 = free.iter().map(|&i| g[i] * step[i]).sum();
        let mut t = t_max;
        let mut trial: Vec<f64>;
        loop {
            trial = d.iter().zip(&step).map(|(x, s)| x + t * s).collect();
            // Near the optimum the decrease falls below round-off, so allow a few ulps of slack.
            if problem.value(&trial) <= f0 + 1e-4 * t * slope + 8.0 * f64::EPSILON * f0.abs() || t < 1e-12 {
                break;
            }
            t *= 0.5;
            blocking = None;
        }
        d = trial;
        if let Some(i) = blocking {
            d[i] = 0.0;
            free.retain(|&j| j != i);
        }
        for x in d.iter_mut() {
            if *x < 0.0 {
                *x = 0.0;
            }
        }
        let total: f64 = d.iter().sum();
        for x in d.iter_mut() {
            *x /= total;
        }
    }

    let converged = residual <= tol;
    Ok(SolverReport { objective_value: problem.value(&d), solution: d, kkt_residual: residual, iterations, converged })
}

/// Exhaustive search over the simplex lattice with spacing `step`.
pub fn brute_force_simplex<F>(objective: F, n: usize, step: f64) -> Result<SolverReport<Vec<f64>>>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if !(2..=5).contains(&n) {
        return Err(Error::InvalidParameter(format!("lattice search supports 2 to 5 coordinates, got {n}")));
    }
    if !(1e-3..=1.0).contains(&step) {
        return Err(Error::InvalidParameter(format!("lattice step must lie in [1e-3, 1], got {step}")));
    }
    let m = (1.0 / step).round() as usize;
    let best = (0..=m)
        .into_par_iter()
        .map(|first| {
            let mut counts = vec![0usize; n];
            counts[0] = first;
            let mut point = vec![0.0; n];
            let mut best = (f64::INFINITY, Vec::new());
            lattice_walk(&mut counts, 1, m - first, m, &mut point, &objective, &mut best);
            best
        })
        .reduce(|| (f64::INFINITY, Vec::new()), |a, b| if b.0 < a.0 { b } else { a });
    let (value, point) = best;
    Ok(SolverReport { solution: point, objective_value: value, kkt_residual: f64::NAN, iterations: 0, converged: true })
}

fn lattice_walk<F: Fn(&[f64]) -> f64>(
    counts: &mut [usize],
    pos: usize,
    remaining: usize,
    m: usize,
    point: &mut [f64],
    objective: &F,
    best: &mut (f64, Vec<f64>),
) {
    let n = counts.len();
    if pos == n - 1 {
        counts[pos] = remaining;
        for (p, &c) in point.iter_mut().zip(counts.iter()) {
            *p = c as f64 / m as f64;
        }
        let v = objective(point);
        if v < best.0 {
            *best = (v, point.to_vec());
        }
        return;
    }
    for c in 0..=remaining {
        counts[pos] = c;
        lattice_walk(counts, pos + 1, remaining - c, m, point, objective, best);
    }
}

/// Pairwise mass-transfer pattern search from `start`, halving the step down to `final_step`.
pub fn refine_simplex_local<F>(objective: F, start: &[f64], initial_step: f64, final_step: f64) -> SolverReport<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    let n = start.len();
    let mut x = start.to_vec();
    let mut fx = objective(&x);
    let mut step = initial_step;
    let mut iterations = 0;
    while step >= final_step {
        let mut improved = false;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let moved = step.min(x[j]);
                if moved <= 0.0 {
                    continue;
                }
                let mut y = x.clone();
                y[i] += moved;
                y[j] -= moved;
                let fy = objective(&y);
                iterations += 1;
                if fy < fx {
                    x = y;
                    fx = fy;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    SolverReport { solution: x, objective_value: fx, kkt_residual: f64::NAN, iterations, converged: true }
}

/// Golden-section minimization on `[lo, hi]`; returns the better of the final bracket and the endpoints.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    for x in [lo, hi] {
        let fx = f(x);
        if fx < best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Uniform grid of `points` values on `[lo, hi]`, then golden-section on the bracket around the best.
///
/// Ties on the grid resolve to the smallest argument.
pub fn grid_then_golden<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, points: usize, tol: f64) -> (f64, f64) {
    let points = points.max(2);
    let h = (hi - lo) / (points - 1) as f64;
    let mut best = (lo, f(lo));
    for k in 1..points {
        let x = lo + h * k as f64;
        let fx = f(x);
        if fx < best.1 {
            best = (x, fx);
        }
    }
    let a = (best.0 - h).max(lo);
    let b = (best.0 + h).min(hi);
    let refined = golden_section(&f, a, b, tol);
    if refined.1 < best.1 {
        refined
    } else {
        best
    }
}

fn check_identical_pair(params: &GilbertElliotParams) -> Result<()> {
    params.require_positive_correlation()?;
    if params.p11() >= 1.0 {
        return Err(Error::InvalidParameter("p11 = 1 gives unbounded TPs".into()));
    }
    Ok(())
}

/// Two-channel softmax throughput when the attacker puts share `d` on the better channel.
pub fn two_channel_throughput(params: &GilbertElliotParams, q: f64, d: f64, alpha: f64) -> Result<f64> {
    Ok(throughput_from_tp(softmax_tp_length(params, q, d, AttackProbability::new(alpha)?)?)?.value())
}

const SCALAR_TOL: f64 = 1e-9;

/// Attacker share on the better of two identical channels that minimizes the softmax user's throughput.
pub fn solve_two_channel_attack(q: f64, alpha: f64, params: &GilbertElliotParams) -> Result<SolverReport<f64>> {
    check_identical_pair(params)?;
    check_probability("q", q)?;
    check_probability("alpha", alpha)?;
    if alpha == 0.0 {
        let v = two_channel_throughput(params, q, 0.5, 0.0)?;
        return Ok(SolverReport { solution: 0.5, objective_value: v, kkt_residual: 0.0, iterations: 0, converged: true });
    }
    two_channel_attack_on_grid(q, alpha, params, 10_001)
}

fn two_channel_attack_on_grid(q: f64, alpha: f64, params: &GilbertElliotParams, points: usize) -> Result<SolverReport<f64>> {
    let f = |d: f64| two_channel_throughput(params, q, d, alpha).unwrap_or(f64::INFINITY);
    let (d, v) = grid_then_golden(f, 0.0, 1.0, points, SCALAR_TOL);
    Ok(SolverReport { solution: d, objective_value: v, kkt_residual: f64::NAN, iterations: points, converged: v.is_finite() })
}

/// Main probability that maximizes the two-channel softmax throughput against the best attack.
///
/// `objective_value` is the throughput achieved at the returned main probability.
pub fn solve_two_channel_defense(alpha: f64, params: &GilbertElliotParams) -> Result<SolverReport<f64>> {
    check_identical_pair(params)?;
    check_probability("alpha", alpha)?;
    if alpha == 0.0 {
        let v = two_channel_throughput(params, 1.0, 1.0, 0.0)?;
        return Ok(SolverReport { solution: 1.0, objective_value: v, kkt_residual: 0.0, iterations: 0, converged: true });
    }
    let worst = |q: f64| -> f64 {
        two_channel_attack_on_grid(q, alpha, params, 10_001).map(|r| r.objective_value).unwrap_or(f64::NEG_INFINITY)
    };
    // Coarse outer grid in parallel, then golden-section around the best point.
    let grid: Vec<f64> = (0..=500).map(|k| 0.5 + k as f64 * 1e-3).collect();
    let values: Vec<f64> = grid.par_iter().map(|&q| worst(q)).collect();
    // Ties go to the greediest main probability.
    let mut best = (grid[grid.len() - 1], values[values.len() - 1]);
    for (&q, &v) in grid.iter().zip(&values).rev() {
        if v > best.1 {
            best = (q, v);
        }
    }
    let a = (best.0 - 1e-3).max(0.5);
    let b = (best.0 + 1e-3).min(1.0);
    let (q, neg) = golden_section(|q| -worst(q), a, b, 1e-7);
    let (q, v) = if -neg > best.1 { (q, -neg) } else { best };
    Ok(SolverReport { solution: q, objective_value: v, kkt_residual: f64::NAN, iterations: grid.len(), converged: v.is_finite() })
}

/// How the defender's selection distribution is parametrized when optimizing against the best attack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DefenseParametrization {
    /// Boltzmann over the beliefs; searches `log10 tau` on `[log10 tau_min, log10 tau_max]`.
    BoltzmannTau { tau_min: f64, tau_max: f64 },
    /// Any distribution; lattice search with `step` then local refinement. At most four channels.
    FullSimplex { step: f64 },
}

impl DefenseParametrization {
    pub fn boltzmann() -> Self {
        Self::BoltzmannTau { tau_min: 1e-3, tau_max: 1e2 }
    }

    pub fn full_simplex() -> Self {
        Self::FullSimplex { step: 0.02 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefenseSolution {
    pub selection: Vec<f64>,
    /// Optimal temperature for the Boltzmann parametrization.
    pub tau: Option<f64>,
    pub attack: Vec<f64>,
}

/// Expected TP length of selection `q` against its best attack.
pub fn defense_value(q: &[f64], omega: &[f64], channels: &[GilbertElliotParams], alpha: f64) -> Result<(f64, Vec<f64>)> {
    let inner = solve_attack_division(q, omega, channels, alpha, None)?;
    if !inner.converged {
        return Err(Error::NonConvergence(format!(
            "inner attack problem: residual {:.3e} after {} iterations",
            inner.kkt_residual, inner.iterations
        )));
    }
    Ok((inner.objective_value, inner.solution))
}

/// Maximizes the defender's expected TP length against the best response of the attacker.
pub fn solve_defense(
    omega: &[f64],
    channels: &[GilbertElliotParams],
    alpha: f64,
    parametrization: DefenseParametrization,
) -> Result<SolverReport<DefenseSolution>> {
    let n = omega.len();
    check_dims(&vec![0.0; n], omega, channels)?;
    check_probability("alpha", alpha)?;
    match parametrization {
        DefenseParametrization::BoltzmannTau { tau_min, tau_max } => {
            if !(tau_min > 0.0 && tau_max > tau_min && tau_max.is_finite()) {
                return Err(Error::InvalidParameter(format!("bad temperature range [{tau_min}, {tau_max}]")));
            }
            let value_at = |log_tau: f64| -> Result<f64> {
                let q = softmax(omega, 10f64.powf(log_tau));
                Ok(defense_value(&q, omega, channels, alpha)?.0)
            };
            let (lo, hi) = (tau_min.log10(), tau_max.log10());
            let points = 201;
            let grid: Vec<f64> = (0..points).map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64).collect();
            let values = grid.iter().map(|&x| value_at(x)).collect::<Result<Vec<_>>>()?;
            // Ties resolve to the lowest temperature.
            let mut best = 0;
            for k in 1..points {
                if values[k] > values[best] * (1.0 + 1e-12) {
                    best = k;
                }
            }
            let h = (hi - lo) / (points - 1) as f64;
            let a = (grid[best] - h).max(lo);
            let b = (grid[best] + h).min(hi);
            let (x, neg) = golden_section(|x| -value_at(x).unwrap_or(f64::NEG_INFINITY), a, b, 1e-9);
            let log_tau = if -neg > values[best] * (1.0 + 1e-12) { x } else { grid[best] };
            let tau = 10f64.powf(log_tau);
            let q = softmax(omega, tau);
            let (value, attack) = defense_value(&q, omega, channels, alpha)?;
            Ok(SolverReport {
                solution: DefenseSolution { selection: q, tau: Some(tau), attack },
                objective_value: value,
                kkt_residual: f64::NAN,
                iterations: points,
                converged: true,
            })
        }
        DefenseParametrization::FullSimplex { step } => {
            if n > 4 {
                return Err(Error::InvalidParameter(format!("full simplex search supports at most 4 channels, got {n}")));
            }
            if !(1e-3..=1.0).contains(&step) {
                return Err(Error::InvalidParameter(format!("lattice step must lie in [1e-3, 1], got {step}")));
            }
            let negated = |q: &[f64]| defense_value(q, omega, channels, alpha).map(|v| -v.0).unwrap_or(f64::INFINITY);
            let coarse = brute_force_simplex(negated, n, step)?;
            let fine = refine_simplex_local(negated, &coarse.solution, step / 2.0, 1e-6);
            let q = fine.solution;
            let (value, attack) = defense_value(&q, omega, channels, alpha)?;
            Ok(SolverReport {
                solution: DefenseSolution { selection: q, tau: None, attack },
                objective_value: value,
                kkt_residual: f64::NAN,
                iterations: fine.iterations,
                converged: true,
            })
        }
    }
}

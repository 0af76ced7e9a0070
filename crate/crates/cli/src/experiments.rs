//! Figure reproductions and the parameter sweep.

use cogjam_core::closed_form::bernoulli_entropy;
use cogjam_core::optimize::{defense_value, two_channel_throughput};
use cogjam_core::sprt::default_asn_constant;
use cogjam_core::{
    asn_under_attack, attacker_cost, myopic_tp_length, robustness, run_replications, selection_entropy, solve_defense,
    solve_two_channel_attack, solve_two_channel_defense, throughput_from_tp, AttackProbability, AttackStrategy,
    AttackerSpec, BeliefVector, DefenseParametrization, GilbertElliotParams, PolicySpec, SimConfig, SimSummary,
    SprtHypotheses, Throughput,
};

use crate::config::{grid, ChannelSet, ExperimentConfig};
use crate::output::{line_plot_svg, Series, Table};
use crate::CliError;

/// Tables and their optional plots.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub tables: Vec<Table>,
    /// (file stem, SVG document)
    pub plots: Vec<(String, String)>,
}

pub(crate) fn simulate(
    config: &ExperimentConfig,
    channels: Vec<GilbertElliotParams>,
    policy: PolicySpec,
    strategy: AttackStrategy,
    alpha: f64,
) -> Result<SimSummary, CliError> {
    let sim = &config.sim;
    let mut sc = SimConfig::new(channels, policy, AttackerSpec::new(strategy, alpha)?)
        .with_horizon(sim.horizon, sim.warmup)
        .with_replications(sim.replications)
        .with_seed(config.experiment.seed);
    sc.jam_effect = sim.jam_effect;
    Ok(run_replications(&sc)?)
}

fn first_channel(config: &ExperimentConfig) -> GilbertElliotParams {
    config.channels_or(ChannelSet::Baseline)[0]
}

fn curve(table: &Table, x: &str, y: &str, label: &str, filter: impl Fn(usize) -> bool) -> Series {
    let xs = table.values(x);
    let ys = table.values(y);
    let points = (0..xs.len()).filter(|&k| filter(k)).map(|k| (xs[k], ys[k])).collect();
    Series { label: label.into(), points }
}

pub fn figure3(config: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let params = first_channel(config);
    let alphas = config.sweep.alpha.clone().unwrap_or_else(|| grid(0.0, 1.0, 0.05));
    let mut t = Table::new("figure3", &["alpha", "u_myopic", "u_softmax_opt", "q_star", "d_star"]);
    for &a in &alphas {
        let u_myopic = throughput_from_tp(myopic_tp_length(&params, AttackProbability::new(a)?)?)?.value();
        let defense = solve_two_channel_defense(a, &params)?;
        let attack = solve_two_channel_attack(defense.solution, a, &params)?;
        t.push(vec![a.into(), u_myopic.into(), defense.objective_value.into(), defense.solution.into(), attack.solution.into()]);
    }
    let series = vec![
        curve(&t, "alpha", "u_myopic", "myopic", |_| true),
        curve(&t, "alpha", "u_softmax_opt", "softmax (q*)", |_| true),
    ];
    let svg = line_plot_svg("Throughput vs attack probability, N = 2", "alpha", "throughput", &series);
    Ok(Artifacts { tables: vec![t], plots: vec![("figure3".into(), svg)] })
}

pub fn figure4(config: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let params = first_channel(config);
    let alphas = config.sweep.alpha.clone().unwrap_or_else(|| vec![0.5]);
    let qs = config.sweep.q.clone().unwrap_or_else(|| grid(0.5, 1.0, 0.025).into_iter().rev().collect());
    let mut t = Table::new("figure4", &["alpha", "q", "entropy", "performance", "robustness", "u_attacked", "d_star"]);
    for &a in &alphas {
        for &q in &qs {
            let u0 = Throughput::new(two_channel_throughput(&params, q, 0.5, 0.0)?)?;
            let attacked = solve_two_channel_attack(q, a, &params)?;
            let ua = Throughput::new(attacked.objective_value)?;
            t.push(vec![
                a.into(),
                q.into(),
                bernoulli_entropy(q)?.into(),
                u0.value().into(),
                robustness(u0, ua)?.into(),
                ua.value().into(),
                attacked.solution.into(),
            ]);
        }
    }
    let alpha_col = t.values("alpha");
    let mut series = Vec::new();
    for &a in &alphas {
        let same = |k: usize| alpha_col[k] == a;
        series.push(curve(&t, "entropy", "performance", "performance", same));
        series.push(curve(&t, "entropy", "robustness", &format!("robustness (alpha {a})"), same));
    }
    let svg = line_plot_svg("Performance and robustness vs randomness, N = 2", "entropy H(q)", "value", &series);
    Ok(Artifacts { tables: vec![t], plots: vec![("figure4".into(), svg)] })
}

pub fn figure56(config: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let params = first_channel(config);
    let ns = config.sweep.n.clone().unwrap_or_else(|| vec![4, 10]);
    let alphas = config.sweep.alpha.clone().unwrap_or_else(|| grid(0.0, 1.0, 0.1));
    let tau = config.sim.defender_tau;
    let mut t = Table::new(
        "figure56",
        &["n", "alpha", "attacker", "tau", "u_myopic", "se_myopic", "u_softmax", "se_softmax"],
    );
    for &n in &ns {
        for strategy in [AttackStrategy::Greedy, AttackStrategy::AlphaOptimal] {
            for &a in &alphas {
                let channels = vec![params; n];
                let m = simulate(config, channels.clone(), PolicySpec::myopic(), strategy, a)?;
                let s = simulate(config, channels, PolicySpec::boltzmann(tau), strategy, a)?;
                t.push(vec![
                    n.into(),
                    a.into(),
                    strategy.label().into(),
                    tau.into(),
                    m.throughput_mean.into(),
                    m.throughput_stderr.into(),
                    s.throughput_mean.into(),
                    s.throughput_stderr.into(),
                ]);
            }
        }
    }
    let mut plots = Vec::new();
    let (n_col, attackers) = (t.values("n"), t.rows.iter().map(|r| r[2].clone()).collect::<Vec<_>>());
    for &n in &ns {
        let mut series = Vec::new();
        for strategy in [AttackStrategy::Greedy, AttackStrategy::AlphaOptimal] {
            let label = strategy.label();
            let keep = |k: usize| n_col[k] == n as f64 && attackers[k] == label.into();
            series.push(curve(&t, "alpha", "u_myopic", &format!("myopic, {label}"), keep));
            series.push(curve(&t, "alpha", "u_softmax", &format!("softmax, {label}"), keep));
        }
        let title = format!("Throughput vs attack probability, N = {n}");
        plots.push((format!("figure56_n{n}"), line_plot_svg(&title, "alpha", "throughput", &series)));
    }
    Ok(Artifacts { tables: vec![t], plots })
}

/// The four attack strategies in the order they appear as figure-7 columns.
pub fn strategies(tau_a: f64) -> [AttackStrategy; 4] {
    [AttackStrategy::Greedy, AttackStrategy::Uniform, AttackStrategy::OmegaBoltzmann { tau_a }, AttackStrategy::AlphaOptimal]
}

pub fn figure7(config: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let channels = config.channels_or(ChannelSet::Table1);
    let alphas = config.sweep.alpha.clone().unwrap_or_else(|| grid(0.1, 1.0, 0.1));
    let policy = PolicySpec::boltzmann(config.sim.defender_tau);
    let mut t = Table::new(
        "figure7",
        &["alpha", "u_greedy", "se_greedy", "u_uniform", "se_uniform", "u_omega", "se_omega", "u_optimal", "se_optimal"],
    );
    for &a in &alphas {
        let mut row = vec![a.into()];
        for strategy in strategies(config.sim.attacker_tau) {
            let s = simulate(config, channels.clone(), policy, strategy, a)?;
            row.push(s.throughput_mean.into());
            row.push(s.throughput_stderr.into());
        }
        t.push(row);
    }
    let series: Vec<Series> = ["greedy", "uniform", "omega", "optimal"]
        .iter()
        .map(|l| curve(&t, "alpha", &format!("u_{l}"), l, |_| true))
        .collect();
    let svg = line_plot_svg("Defender throughput by attack strategy", "alpha", "throughput", &series);
    Ok(Artifacts { tables: vec![t], plots: vec![("figure7".into(), svg)] })
}

pub fn figure8(config: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let channels = config.channels_or(ChannelSet::Table1);
    let omega = BeliefVector::stationary(&channels)?;
    let alphas = config.sweep.alpha.clone().unwrap_or_else(|| grid(0.0, 1.0, 0.05));
    let n = channels.len();
    let mut greedy_q = vec![0.0; n];
    greedy_q[cogjam_core::myopic_select(&omega).channel()] = 1.0;
    let mut t = Table::new("figure8", &["alpha", "tau_star", "entropy", "tp_star", "u_star", "u_myopic"]);
    for &a in &alphas {
        let report = solve_defense(omega.as_slice(), &channels, a, DefenseParametrization::boltzmann())?;
        let tau = report.solution.tau.unwrap_or(f64::NAN);
        let (myopic_tp, _) = defense_value(&greedy_q, omega.as_slice(), &channels, a)?;
        t.push(vec![
            a.into(),
            tau.into(),
            selection_entropy(&report.solution.selection)?.into(),
            report.objective_value.into(),
            throughput_from_tp(report.objective_value)?.value().into(),
            throughput_from_tp(myopic_tp)?.value().into(),
        ]);
    }
    let series = vec![curve(&t, "alpha", "tau_star", "tau*", |_| true)];
    let svg = line_plot_svg("Optimal temperature vs attack probability", "alpha", "tau*", &series);
    Ok(Artifacts { tables: vec![t], plots: vec![("figure8".into(), svg)] })
}

pub fn figure9(config: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let params = first_channel(config);
    let alphas = config.sweep.alpha.clone().unwrap_or_else(|| grid(0.0, 1.0, 0.05));
    let c = default_asn_constant(&params)?;
    let mut t = Table::new("figure9", &["alpha", "theta0", "theta1", "asn", "cost"]);
    for &a in &alphas {
        let alpha = AttackProbability::new(a)?;
        let hyp = SprtHypotheses::under_attack(&params, alpha)?;
        // Without an attack there is nothing to detect and the test never stops.
        let asn = if hyp.theta1() > hyp.theta0() { asn_under_attack(alpha, &params, c)? } else { f64::INFINITY };
        t.push(vec![
            a.into(),
            hyp.theta0().into(),
            hyp.theta1().into(),
            asn.into(),
            attacker_cost(alpha, &params)?.into(),
        ]);
    }
    let series = vec![curve(&t, "alpha", "cost", "cost", |_| true)];
    let svg = line_plot_svg("Attacker cost vs attack probability", "alpha", "normalized cost", &series);
    Ok(Artifacts { tables: vec![t], plots: vec![("figure9".into(), svg)] })
}

pub fn sweep(config: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let alphas = config.sweep.alpha.clone().unwrap_or_else(|| grid(0.0, 1.0, 0.25));
    let taus = config.sweep.tau.clone().unwrap_or_else(|| vec![0.5, 1.0, 2.0, 4.0]);
    let channel_sets: Vec<Vec<GilbertElliotParams>> = match config.channels.set {
        None | Some(ChannelSet::Baseline) => {
            let ns = config.sweep.n.clone().unwrap_or_else(|| vec![config.channels.count.unwrap_or(4)]);
            ns.into_iter().map(|n| vec![GilbertElliotParams::baseline(); n]).collect()
        }
        Some(_) => {
            if config.sweep.n.is_some() {
                return Err(CliError::Config("sweep.n applies to the baseline channel set only".into()));
            }
            vec![config.channels_or(ChannelSet::Baseline)]
        }
    };
    let strategy = config.sim.attacker;
    let mut t = Table::new(
        "sweep",
        &["n", "alpha", "policy", "tau", "attacker", "u", "se", "tp_mean", "tp_se", "attack_fraction"],
    );
    for channels in &channel_sets {
        let policies: Vec<(&str, f64, PolicySpec)> = std::iter::once(("myopic", 0.0, PolicySpec::myopic()))
            .chain(taus.iter().map(|&tau| ("boltzmann", tau, PolicySpec::boltzmann(tau))))
            .collect();
        for &a in &alphas {
            for (name, tau, policy) in &policies {
                let s = simulate(config, channels.clone(), *policy, strategy, a)?;
                t.push(vec![
                    channels.len().into(),
                    a.into(),
                    (*name).into(),
                    (*tau).into(),
                    strategy.label().into(),
                    s.throughput_mean.into(),
                    s.throughput_stderr.into(),
                    s.tp_mean.into(),
                    s.tp_stderr.into(),
                    s.attack_fraction.into(),
                ]);
            }
        }
    }
    Ok(Artifacts { tables: vec![t], plots: Vec::new() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> ExperimentConfig {
        let mut c = ExperimentConfig::default();
        c.sim.horizon = 2_000;
        c.sim.warmup = 100;
        c.sim.replications = 2;
        c
    }

    #[test]
    fn figure9_endpoints() {
        let a = figure9(&ExperimentConfig::default()).unwrap();
        let cost = a.tables[0].values("cost");
        assert_eq!(cost[0], 0.0);
        assert!((cost[cost.len() - 1] - 1.0).abs() < 1e-12);
        assert!(a.tables[0].values("asn")[0].is_infinite());
    }

    #[test]
    fn figure3_first_row() {
        let mut c = ExperimentConfig::default();
        c.sweep.alpha = Some(vec![0.0, 0.5]);
        let t = &figure3(&c).unwrap().tables[0];
        assert_eq!(t.values("q_star")[0], 1.0);
        assert!((t.values("u_myopic")[0] - 0.8222).abs() < 1e-4);
        assert_eq!(t.values("u_myopic")[0], t.values("u_softmax_opt")[0]);
        assert!(t.values("u_softmax_opt")[1] > t.values("u_myopic")[1]);
    }

    #[test]
    fn sweep_shapes() {
        let mut c = quick();
        c.sweep.alpha = Some(vec![0.2]);
        c.sweep.tau = Some(vec![1.0]);
        c.sweep.n = Some(vec![2, 3]);
        let t = &sweep(&c).unwrap().tables[0];
        assert_eq!(t.rows.len(), 4);
        assert_eq!(t.values("n"), vec![2.0, 2.0, 3.0, 3.0]);

        c.channels.set = Some(ChannelSet::Table1);
        assert!(matches!(sweep(&c), Err(CliError::Config(_))));
    }

    #[test]
    fn figure56_rows_cover_the_grid() {
        let mut c = quick();
        c.sweep.alpha = Some(vec![0.0, 0.5]);
        c.sweep.n = Some(vec![3]);
        let a = figure56(&c).unwrap();
        assert_eq!(a.tables[0].rows.len(), 4);
        assert_eq!(a.plots.len(), 1);
    }
}

//! Scripted experiment suite: convergence, cost versus load, cost versus
//! system size, heavy-tailed service sweeps, fairness, and the impact of the
//! power-optimal strategy on the other cost components.
//!
//! Every run solves the game and the equal-split baseline on the same
//! scenario and reports per-scheduler costs, normalized by the game scheme's
//! mean per-task power cost. A baseline that violates per-node stability at
//! high load is reported as infeasible with infinite cost rather than
//! aborting the sweep: an overloaded M/G/1 node has unbounded expected
//! waiting time, so the ordering claims remain meaningful.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::costs::{self, CostBreakdown};
use crate::equilibrium::{average_allocation, nash_iterate, SolveError, SolveOptions};
use crate::model::{GridConfig, StrategyMatrix, ValidationReport};
use crate::scenarios;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Game,
    Average,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Game => "game",
            Scheme::Average => "average",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentError {
    /// Fairness of an empty cost vector is undefined.
    EmptyInput,
    /// Fairness requires strictly positive costs.
    NonPositiveCost { index: usize, value: f64 },
    Solve(SolveError),
    Invalid(ValidationReport),
}

impl fmt::Display for ExperimentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExperimentError::EmptyInput => write!(f, "no costs supplied"),
            ExperimentError::NonPositiveCost { index, value } => {
                write!(f, "cost [{index}] must be positive, got {value}")
            }
            ExperimentError::Solve(e) => write!(f, "{e}"),
            ExperimentError::Invalid(r) => write!(f, "{r}"),
        }
    }
}

impl core::error::Error for ExperimentError {}

impl From<SolveError> for ExperimentError {
    fn from(e: SolveError) -> Self {
        ExperimentError::Solve(e)
    }
}

/// Jain's fairness index of a positive cost vector:
/// `(sum T)^2 / (n * sum T^2)`. Equals 1 exactly when all costs agree and
/// is bounded below by `1/n`.
pub fn fairness_index(costs: &[f64]) -> Result<f64, ExperimentError> {
    if costs.is_empty() {
        return Err(ExperimentError::EmptyInput);
    }
    if let Some((index, &value)) = costs.iter().enumerate().find(|(_, &c)| !(c > 0.0)) {
        return Err(ExperimentError::NonPositiveCost { index, value });
    }
    // Rescale by the largest cost; keeps the squares well-conditioned and
    // makes the equal-cost case exact.
    let scale = costs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for &c in costs {
        let r = c / scale;
        sum += r;
        sum_sq += r * r;
    }
    // Clamp away the one-ulp overshoot near-equal costs can produce.
    Ok((sum * sum / (costs.len() as f64 * sum_sq)).min(1.0))
}

/// One scheduler's costs under a scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchedulerOutcome {
    pub scheduler: usize,
    /// Aggregate cost components; all infinite when the scheme is infeasible.
    pub breakdown: CostBreakdown,
    /// Expected power cost per task, the game objective.
    pub per_task_power: f64,
    /// `per_task_power` divided by the game scheme's mean; filled by
    /// [`normalize`].
    pub normalized_power: f64,
}

/// Results of one scheme on one scenario point.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub scenario: String,
    pub scheme: Scheme,
    pub load: f64,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub iterations: usize,
    pub converged: bool,
    /// False when the scheme violates per-node stability on this point.
    pub feasible: bool,
    /// Fairness index over per-task power costs; NaN when infeasible.
    pub fairness: f64,
    pub per_scheduler: Vec<SchedulerOutcome>,
}

impl ExperimentReport {
    pub fn mean_per_task_power(&self) -> f64 {
        let n = self.per_scheduler.len().max(1);
        self.per_scheduler.iter().map(|s| s.per_task_power).sum::<f64>() / n as f64
    }
}

/// Game and baseline reports for the same scenario point.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRun {
    pub game: ExperimentReport,
    pub average: ExperimentReport,
}

const INFEASIBLE_BREAKDOWN: CostBreakdown = CostBreakdown {
    power: f64::INFINITY,
    network: f64::INFINITY,
    loss: f64::INFINITY,
    utilization: f64::INFINITY,
    total: f64::INFINITY,
};

fn evaluate_scheme(
    scenario: &str,
    scheme: Scheme,
    strategy: &StrategyMatrix,
    config: &GridConfig,
    iterations: usize,
    converged: bool,
) -> ExperimentReport {
    let n = config.scheduler_count();
    let mut per_scheduler = Vec::with_capacity(n);
    let mut feasible = true;
    for i in 0..n {
        let (breakdown, per_task) = match (
            costs::scheduler_cost(i, strategy, config),
            costs::per_task_power_cost(i, strategy, config),
        ) {
            (Ok(b), Ok(p)) => (b, p),
            _ => {
                feasible = false;
                (INFEASIBLE_BREAKDOWN, f64::INFINITY)
            }
        };
        per_scheduler.push(SchedulerOutcome {
            scheduler: i,
            breakdown,
            per_task_power: per_task,
            normalized_power: f64::NAN,
        });
    }
    let fairness = if feasible {
        let powers: Vec<f64> = per_scheduler.iter().map(|s| s.per_task_power).collect();
        fairness_index(&powers).unwrap_or(f64::NAN)
    } else {
        f64::NAN
    };
    ExperimentReport {
        scenario: String::from(scenario),
        scheme,
        load: config.system_load(),
        m: config.node_count(),
        n,
        seed: 0,
        iterations,
        converged,
        feasible,
        fairness,
        per_scheduler,
    }
}

fn infeasible_report(scenario: &str, scheme: Scheme, config: &GridConfig) -> ExperimentReport {
    let n = config.scheduler_count();
    ExperimentReport {
        scenario: String::from(scenario),
        scheme,
        load: config.system_load(),
        m: config.node_count(),
        n,
        seed: 0,
        iterations: 0,
        converged: true,
        feasible: false,
        fairness: f64::NAN,
        per_scheduler: (0..n)
            .map(|i| SchedulerOutcome {
                scheduler: i,
                breakdown: INFEASIBLE_BREAKDOWN,
                per_task_power: f64::INFINITY,
                normalized_power: f64::NAN,
            })
            .collect(),
    }
}

/// Divide every per-task cost in both reports by the game scheme's mean,
/// fixing the game scheme's normalized average at exactly 1.
pub fn normalize(game: &mut ExperimentReport, average: &mut ExperimentReport) {
    let base = game.mean_per_task_power();
    for outcome in game.per_scheduler.iter_mut().chain(average.per_scheduler.iter_mut()) {
        outcome.normalized_power = outcome.per_task_power / base;
    }
}

/// Solve both schemes on `config` (rescaled to `load` when given) and return
/// the normalized pair.
pub fn run_point(
    scenario: &str,
    config: &GridConfig,
    load: Option<f64>,
    options: &SolveOptions,
) -> Result<ScenarioRun, ExperimentError> {
    let scaled;
    let config = match load {
        Some(target) => {
            scaled = config.scale_to_load(target);
            &scaled
        }
        None => config,
    };

    let result = nash_iterate(config, None, options)?;
    let mut game = evaluate_scheme(
        scenario,
        Scheme::Game,
        &result.strategy,
        config,
        result.iterations,
        result.converged,
    );

    let mut average = match average_allocation(config) {
        Ok(strategy) => evaluate_scheme(scenario, Scheme::Average, &strategy, config, 0, true),
        Err(SolveError::Infeasible { .. }) => {
            infeasible_report(scenario, Scheme::Average, config)
        }
        Err(e) => return Err(e.into()),
    };

    normalize(&mut game, &mut average);
    Ok(ScenarioRun { game, average })
}

/// Convergence experiment: the benchmark point plus its per-round change
/// trace.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRun {
    pub run: ScenarioRun,
    pub trace: Vec<f64>,
}

pub fn run_convergence(
    scenario: &str,
    config: &GridConfig,
    load: Option<f64>,
    options: &SolveOptions,
) -> Result<ConvergenceRun, ExperimentError> {
    let scaled;
    let config = match load {
        Some(target) => {
            scaled = config.scale_to_load(target);
            &scaled
        }
        None => config,
    };
    let result = nash_iterate(config, None, options)?;
    let trace = result.change_trace.clone();
    let run = run_point(scenario, config, None, options)?;
    Ok(ConvergenceRun { run, trace })
}

/// Cost versus system load on a fixed scenario.
pub fn run_load_sweep(
    scenario: &str,
    config: &GridConfig,
    loads: &[f64],
    options: &SolveOptions,
) -> Result<Vec<ScenarioRun>, ExperimentError> {
    loads
        .iter()
        .map(|&load| run_point(scenario, config, Some(load), options))
        .collect()
}

/// Cost versus node count, at a fixed load, drawing service rates from the
/// extended benchmark set.
pub fn run_node_sweep(
    counts: &[usize],
    load: f64,
    options: &SolveOptions,
) -> Result<Vec<ScenarioRun>, ExperimentError> {
    counts
        .iter()
        .map(|&m| {
            let config = scenarios::grid_with_nodes(m);
            let id = alloc::format!("nodes{m:02}");
            run_point(&id, &config, Some(load), options)
        })
        .collect()
}

/// Cost versus scheduler count at a fixed total arrival rate, split equally
/// among the schedulers. The node set is the eight-node baseline.
pub fn run_scheduler_sweep(
    counts: &[usize],
    load: f64,
    options: &SolveOptions,
) -> Result<Vec<ScenarioRun>, ExperimentError> {
    counts
        .iter()
        .map(|&n| {
            assert!(n >= 1);
            let base = scenarios::baseline_grid();
            let total_mu: f64 = base.nodes.iter().map(|x| x.mu).sum();
            let total_lambda = load * total_mu;
            let schedulers = (0..n)
                .map(|i| crate::model::SchedulerSpec::new(i, total_lambda / n as f64))
                .collect();
            let config =
                GridConfig::new(base.nodes.clone(), schedulers, base.constants);
            let id = alloc::format!("schedulers{n:02}");
            run_point(&id, &config, None, options)
        })
        .collect()
}

/// Load sweep over the heavy-tailed benchmark grid.
pub fn run_pareto_sweep(
    loads: &[f64],
    options: &SolveOptions,
) -> Result<Vec<ScenarioRun>, ExperimentError> {
    run_load_sweep("heavy_tailed", &scenarios::heavy_tailed_grid(), loads, options)
}

/// Fairness tables: load sweeps and node sweeps for the heterogeneous
/// baseline mix and the synthetic low-spread mix.
pub fn run_fairness(
    loads: &[f64],
    node_counts: &[usize],
    load_for_counts: f64,
    options: &SolveOptions,
) -> Result<Vec<ScenarioRun>, ExperimentError> {
    let mut runs = Vec::new();
    runs.extend(run_load_sweep("baseline", &scenarios::baseline_grid(), loads, options)?);
    runs.extend(run_load_sweep("low_spread", &scenarios::low_spread_grid(), loads, options)?);
    for &m in node_counts {
        let id = alloc::format!("baseline_nodes{m:02}");
        let cfg = GridConfig::new(
            scenarios::grid_with_nodes(m).nodes,
            scenarios::baseline_grid().schedulers,
            Default::default(),
        );
        runs.push(run_point(&id, &cfg, Some(load_for_counts), options)?);
        let id = alloc::format!("low_spread_nodes{m:02}");
        let cfg = GridConfig::new(
            scenarios::grid_with_nodes(m).nodes,
            scenarios::low_spread_grid().schedulers,
            Default::default(),
        );
        runs.push(run_point(&id, &cfg, Some(load_for_counts), options)?);
    }
    Ok(runs)
}

/// Per-scheduler secondary costs (network, loss, utilization) under the
/// power-optimal equilibrium and the baseline, each component normalized by
/// the game scheme's mean of that component.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondaryCosts {
    pub scheduler: usize,
    pub scheme: Scheme,
    pub network: f64,
    pub loss: f64,
    pub utilization: f64,
    pub normalized_network: f64,
    pub normalized_loss: f64,
    pub normalized_utilization: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecondaryReport {
    pub run: ScenarioRun,
    pub rows: Vec<SecondaryCosts>,
}

pub fn run_secondary_costs(
    scenario: &str,
    config: &GridConfig,
    load: Option<f64>,
    options: &SolveOptions,
) -> Result<SecondaryReport, ExperimentError> {
    let run = run_point(scenario, config, load, options)?;
    let n = run.game.n.max(1) as f64;
    let mean = |report: &ExperimentReport, f: fn(&CostBreakdown) -> f64| -> f64 {
        report.per_scheduler.iter().map(|s| f(&s.breakdown)).sum::<f64>() / n
    };
    let base_network = mean(&run.game, |b| b.network);
    let base_loss = mean(&run.game, |b| b.loss);
    let base_util = mean(&run.game, |b| b.utilization);
    let mut rows = Vec::new();
    for report in [&run.game, &run.average] {
        for s in &report.per_scheduler {
            rows.push(SecondaryCosts {
                scheduler: s.scheduler,
                scheme: report.scheme,
                network: s.breakdown.network,
                loss: s.breakdown.loss,
                utilization: s.breakdown.utilization,
                normalized_network: s.breakdown.network / base_network,
                normalized_loss: s.breakdown.loss / base_loss,
                normalized_utilization: s.breakdown.utilization / base_util,
            });
        }
    }
    Ok(SecondaryReport { run, rows })
}

/// One CSV row of the fixed report schema.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub scenario: String,
    pub scheme: &'static str,
    pub load: f64,
    pub m: usize,
    pub n: usize,
    pub scheduler: usize,
    pub power: f64,
    pub network: f64,
    pub loss: f64,
    pub utilization: f64,
    pub total: f64,
    pub normalized_power: f64,
    pub fi: f64,
    pub iterations: usize,
}

/// Flatten reports into per-scheduler rows, in input order.
pub fn report_rows<'a>(reports: impl IntoIterator<Item = &'a ExperimentReport>) -> Vec<ReportRow> {
    let mut rows = Vec::new();
    for report in reports {
        for s in &report.per_scheduler {
            rows.push(ReportRow {
                scenario: report.scenario.clone(),
                scheme: report.scheme.as_str(),
                load: report.load,
                m: report.m,
                n: report.n,
                scheduler: s.scheduler,
                power: s.breakdown.power,
                network: s.breakdown.network,
                loss: s.breakdown.loss,
                utilization: s.breakdown.utilization,
                total: s.breakdown.total,
                normalized_power: s.normalized_power,
                fi: report.fairness,
                iterations: report.iterations,
            });
        }
    }
    rows
}

/// Rows for both schemes of each run, game first.
pub fn run_rows(runs: &[ScenarioRun]) -> Vec<ReportRow> {
    let mut rows = Vec::new();
    for run in runs {
        rows.extend(report_rows([&run.game]));
        rows.extend(report_rows([&run.average]));
    }
    rows
}

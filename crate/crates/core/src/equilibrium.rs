//! The game core: each scheduler's closed-form best response against the
//! others' fixed strategies, best-response dynamics to a Nash equilibrium,
//! and the equal-split baseline.
//!
//! A scheduler minimizes its expected per-task power cost, which is separable
//! over nodes. Writing `h` for a node's mean service time, `h2` for its
//! second moment, `c = u_ji` for the capacity left to scheduler `i` at node
//! `j`, and `q2 = c_p * p_idle_wait * h2`, stationarity of the Lagrangian
//! gives the allocation at multiplier `alpha`:
//!
//! ```text
//! a_ij = c / lambda_i - sqrt(q2 * c) / (lambda_i * sqrt(h * (q2 + 2h (alpha - c_p * p_busy * h))))
//! ```
//!
//! and the multiplier solves the budget equation `sum_j a_ij = 1` restricted
//! to the active set. The allocation for node `j` reaches zero exactly at the
//! node's potential power cost
//!
//! ```text
//! t_j = c_p * p_busy * h - q2 / (2h) + q2 / (2 h^2 c)
//! ```
//!
//! so nodes are sorted by `t_j` and the active set is the longest affordable
//! prefix. The right-hand side of the budget equation is strictly decreasing
//! in `alpha`, which makes bisection safe.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::costs;
use crate::model::{GridConfig, StrategyMatrix, ValidationReport};

#[derive(Debug, Clone, PartialEq)]
pub enum SolveError {
    /// Remaining capacity across all nodes cannot absorb the scheduler's
    /// stream.
    Infeasible { scheduler: usize, capacity: f64, lambda: f64 },
    /// The budget equation has no root on the active set.
    NoRoot { scheduler: usize },
    /// Potential cost is undefined for a node with no remaining capacity.
    NonPositiveCapacity { node: usize, capacity: f64 },
    /// Strategy matrices differ in shape.
    ShapeMismatch,
    /// Scenario failed validation.
    InvalidConfig(ValidationReport),
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::Infeasible { scheduler, capacity, lambda } => write!(
                f,
                "scheduler {scheduler}: available capacity {capacity} cannot absorb arrival rate {lambda}"
            ),
            SolveError::NoRoot { scheduler } => {
                write!(f, "scheduler {scheduler}: budget equation has no root")
            }
            SolveError::NonPositiveCapacity { node, capacity } => {
                write!(f, "node {node}: no remaining capacity ({capacity})")
            }
            SolveError::ShapeMismatch => write!(f, "strategy shapes differ"),
            SolveError::InvalidConfig(report) => write!(f, "invalid scenario: {report}"),
        }
    }
}

impl core::error::Error for SolveError {}

/// One scheduler's closed-form best response.
#[derive(Debug, Clone, PartialEq)]
pub struct BestResponse {
    /// Slice fractions over all nodes, in node order.
    pub row: Vec<f64>,
    /// Lagrange multiplier of the budget constraint.
    pub alpha: f64,
    /// Number of nodes with positive allocation.
    pub active_count: usize,
    /// Candidate nodes sorted by potential power cost; the first
    /// `active_count` entries received allocation.
    pub ordering: Vec<usize>,
}

/// Converged (or truncated) best-response dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumResult {
    pub strategy: StrategyMatrix,
    /// Full update rounds executed.
    pub iterations: usize,
    pub converged: bool,
    /// Convergence metric after each round.
    pub change_trace: Vec<f64>,
    /// Per-task power cost of each scheduler at the final strategy;
    /// infinite if a node ended up unstable.
    pub per_scheduler_cost: Vec<f64>,
}

/// Update order of the dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateSchedule {
    /// Sequential sweep in scheduler order; each response sees earlier
    /// updates of the same round.
    #[default]
    GaussSeidel,
    /// All schedulers respond to the same snapshot; updates apply together.
    Jacobi,
}

/// Knobs of [`nash_iterate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Convergence threshold on the relative L1 change per round.
    pub threshold: f64,
    pub max_iter: usize,
    pub schedule: UpdateSchedule,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { threshold: 1e-4, max_iter: 1000, schedule: UpdateSchedule::GaussSeidel }
    }
}

/// Service rate of node `j` left over for scheduler `i`: the node's rate
/// minus what all other schedulers currently send there. May be negative;
/// such nodes are excluded from the response.
pub fn available_capacity(
    j: usize,
    i: usize,
    strategy: &StrategyMatrix,
    config: &GridConfig,
) -> f64 {
    let other_load: f64 = strategy
        .rows()
        .iter()
        .zip(&config.schedulers)
        .enumerate()
        .filter(|(k, _)| *k != i)
        .map(|(_, (row, s))| row[j] * s.lambda)
        .sum();
    config.nodes[j].mu - other_load
}

/// Potential power cost `t_j`: the marginal per-task power cost of node `j`
/// at zero allocation, given remaining capacity `u_ji`. Nodes are ordered by
/// this threshold and a node receives allocation only when the multiplier
/// exceeds it.
pub fn potential_power_cost(
    j: usize,
    _i: usize,
    u_ji: f64,
    config: &GridConfig,
) -> Result<f64, SolveError> {
    if !(u_ji > 0.0) {
        return Err(SolveError::NonPositiveCapacity { node: j, capacity: u_ji });
    }
    let node = &config.nodes[j];
    let c_p = config.constants.c_p;
    let h = node.service.mean;
    let h2 = node.service.second_moment;
    let q2 = c_p * node.p_idle_wait * h2;
    Ok(c_p * node.p_busy * h - q2 / (2.0 * h) + q2 / (2.0 * h * h * u_ji))
}

/// Marginal per-task power cost of scheduler `i` at node `j` for allocation
/// `a_ij`, given remaining capacity `u_ji`. At an interior optimum this
/// equals the multiplier `alpha` for every active node.
pub fn power_marginal(j: usize, a_ij: f64, u_ji: f64, i: usize, config: &GridConfig) -> f64 {
    let node = &config.nodes[j];
    let c_p = config.constants.c_p;
    let h = node.service.mean;
    let h2 = node.service.second_moment;
    let lambda = config.schedulers[i].lambda;
    let slack = u_ji - a_ij * lambda;
    c_p * node.p_busy * h
        + c_p * node.p_idle_wait * (h2 * u_ji / (2.0 * h * h * slack * slack) - h2 / (2.0 * h))
}

/// One node's term on the right-hand side of the budget equation at
/// multiplier `alpha`; equals `u_ji - a_ij * lambda_i`.
fn budget_term(j: usize, alpha: f64, u_ji: f64, config: &GridConfig) -> f64 {
    let node = &config.nodes[j];
    let c_p = config.constants.c_p;
    let h = node.service.mean;
    let h2 = node.service.second_moment;
    let q2 = c_p * node.p_idle_wait * h2;
    let inner = h * (q2 + 2.0 * h * (alpha - c_p * node.p_busy * h));
    crate::math::sqrt(q2 * u_ji) / crate::math::sqrt(inner)
}

/// Iterations of the bisection in [`solve_alpha`]. The bracket halves each
/// step, so this drives the interval to machine precision.
const BISECT_ITERS: usize = 200;

/// Solve the budget equation for the multiplier on the given active node
/// set: find `alpha` above every active node's potential cost such that the
/// resulting allocations sum to one.
///
/// `capacities[j]` must hold `u_ji` for every node in `active`. The
/// right-hand side is strictly decreasing in `alpha`, so the root is
/// bracketed by doubling and then bisected.
pub fn solve_alpha(
    active: &[usize],
    i: usize,
    capacities: &[f64],
    config: &GridConfig,
) -> Result<f64, SolveError> {
    let lambda = config.schedulers[i].lambda;
    let target: f64 = active.iter().map(|&j| capacities[j]).sum::<f64>() - lambda;
    if active.is_empty() || !(target > 0.0) {
        return Err(SolveError::NoRoot { scheduler: i });
    }

    let mut t_max = f64::NEG_INFINITY;
    for &j in active {
        let t = potential_power_cost(j, i, capacities[j], config)?;
        t_max = t_max.max(t);
    }

    let rhs = |alpha: f64| -> f64 {
        active.iter().map(|&j| budget_term(j, alpha, capacities[j], config)).sum()
    };

    // At alpha = t_max the term of the max-threshold node equals its full
    // capacity, so rhs(t_max) >= target exactly when the prefix rule admits
    // this set. rhs decreases to zero, guaranteeing a bracket to the right.
    let mut lo = t_max;
    if rhs(lo) < target {
        return Err(SolveError::NoRoot { scheduler: i });
    }
    let scale = crate::math::abs(t_max).max(1.0);
    let mut step = scale * 1e-6;
    let mut hi = lo + step;
    let mut guard = 0;
    while rhs(hi) > target {
        step *= 2.0;
        hi = lo + step;
        guard += 1;
        if guard > 200 {
            return Err(SolveError::NoRoot { scheduler: i });
        }
    }
    for _ in 0..BISECT_ITERS {
        let mid = 0.5 * (lo + hi);
        if rhs(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * crate::math::abs(hi) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Closed-form best response of scheduler `i` against the other rows of
/// `strategy`.
///
/// Candidate nodes (those with remaining capacity) are sorted by potential
/// power cost; the active set is the largest affordable prefix; the
/// multiplier comes from [`solve_alpha`] on that prefix.
pub fn best_response(
    i: usize,
    strategy: &StrategyMatrix,
    config: &GridConfig,
) -> Result<BestResponse, SolveError> {
    let m = config.node_count();
    let lambda = config.schedulers[i].lambda;

    let capacities: Vec<f64> =
        (0..m).map(|j| available_capacity(j, i, strategy, config)).collect();
    let usable: f64 = capacities.iter().filter(|&&c| c > 0.0).sum();
    if !(usable > lambda) {
        return Err(SolveError::Infeasible { scheduler: i, capacity: usable, lambda });
    }

    let mut ordering: Vec<usize> = (0..m).filter(|&j| capacities[j] > 0.0).collect();
    let mut thresholds = vec![0.0; m];
    for &j in &ordering {
        thresholds[j] = potential_power_cost(j, i, capacities[j], config)?;
    }
    // Stable sort: nodes with identical thresholds keep index order.
    ordering.sort_by(|&a, &b| thresholds[a].total_cmp(&thresholds[b]));

    let waitless = ordering
        .iter()
        .all(|&j| config.constants.c_p * config.nodes[j].p_idle_wait * config.nodes[j].service.second_moment == 0.0);
    if waitless {
        return greedy_fill(i, &ordering, &capacities, &thresholds, config);
    }

    // Largest prefix whose cheapest-node thresholds can absorb the stream:
    // prefix d qualifies when sum of capacities minus lambda stays below the
    // right-hand side of the budget equation evaluated at the prefix's
    // maximum threshold.
    let mut active_count = 1;
    for d in 1..=ordering.len() {
        let prefix = &ordering[..d];
        let t_d = thresholds[*prefix.last().unwrap()];
        let lhs: f64 = prefix.iter().map(|&j| capacities[j]).sum::<f64>() - lambda;
        let rhs: f64 = prefix.iter().map(|&j| budget_term(j, t_d, capacities[j], config)).sum();
        if lhs <= rhs {
            active_count = d;
        }
    }

    let active = &ordering[..active_count];
    let alpha = solve_alpha(active, i, &capacities, config)?;

    let mut row = vec![0.0; m];
    for &j in active {
        let a = (capacities[j] - budget_term(j, alpha, capacities[j], config)) / lambda;
        // Roundoff can leave the boundary node a hair below zero.
        debug_assert!(a > -1e-9, "allocation {a} at node {j}");
        row[j] = a.max(0.0);
    }
    Ok(BestResponse { row, alpha, active_count, ordering })
}

/// Load headroom (relative to a node's rate) left when the greedy branch
/// fills a node "to capacity".
const GREEDY_SLACK: f64 = 1e-6;

/// Degenerate branch for nodes without waiting power draw: marginal cost is
/// the constant `t_j`, so the stream fills the cheapest nodes up to capacity.
fn greedy_fill(
    i: usize,
    ordering: &[usize],
    capacities: &[f64],
    thresholds: &[f64],
    config: &GridConfig,
) -> Result<BestResponse, SolveError> {
    let lambda = config.schedulers[i].lambda;
    let mut row = vec![0.0; capacities.len()];
    let mut remaining = 1.0;
    let mut active_count = 0;
    let mut alpha = f64::NEG_INFINITY;
    for &j in ordering {
        if remaining <= 0.0 {
            break;
        }
        // Keep the node strictly inside its stability region; the slack is
        // wider than the cost module's epsilon so a filled node still prices.
        let cap = (capacities[j] - GREEDY_SLACK * config.nodes[j].mu) / lambda;
        if cap <= 0.0 {
            continue;
        }
        let take = cap.min(remaining);
        row[j] = take;
        remaining -= take;
        active_count += 1;
        alpha = thresholds[j];
    }
    if remaining > 1e-12 {
        return Err(SolveError::Infeasible {
            scheduler: i,
            capacity: capacities.iter().filter(|&&c| c > 0.0).sum(),
            lambda,
        });
    }
    Ok(BestResponse { row, alpha, active_count, ordering: ordering.to_vec() })
}

/// Relative L1 change between consecutive strategies. From the all-zero
/// start the denominator falls back to the row count, making the first
/// round's change exactly 1.
pub fn convergence_metric(
    prev: &StrategyMatrix,
    next: &StrategyMatrix,
) -> Result<f64, SolveError> {
    if prev.n() != next.n() || prev.m() != next.m() {
        return Err(SolveError::ShapeMismatch);
    }
    let mut diff = 0.0;
    let mut base = 0.0;
    for i in 0..prev.n() {
        for j in 0..prev.m() {
            diff += crate::math::abs(next.get(i, j) - prev.get(i, j));
            base += crate::math::abs(prev.get(i, j));
        }
    }
    Ok(diff / base.max(prev.n() as f64))
}

/// Run best-response dynamics from `initial` (the all-zero matrix when
/// `None`) until the per-round change drops below the threshold.
///
/// A non-converged run is not an error: the result carries
/// `converged = false` and the full change trace.
pub fn nash_iterate(
    config: &GridConfig,
    initial: Option<&StrategyMatrix>,
    options: &SolveOptions,
) -> Result<EquilibriumResult, SolveError> {
    config.validate().map_err(SolveError::InvalidConfig)?;
    let (n, m) = (config.scheduler_count(), config.node_count());
    let mut strategy = match initial {
        Some(s) => {
            if s.n() != n || s.m() != m {
                return Err(SolveError::ShapeMismatch);
            }
            s.clone()
        }
        None => StrategyMatrix::zeros(n, m),
    };

    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < options.max_iter {
        let before = strategy.clone();
        match options.schedule {
            UpdateSchedule::GaussSeidel => {
                for i in 0..n {
                    let response = best_response(i, &strategy, config)?;
                    strategy.set_row(i, response.row);
                }
            }
            UpdateSchedule::Jacobi => {
                let snapshot = strategy.clone();
                for i in 0..n {
                    let response = best_response(i, &snapshot, config)?;
                    strategy.set_row(i, response.row);
                }
            }
        }
        iterations += 1;
        let change = convergence_metric(&before, &strategy)?;
        trace.push(change);
        if change < options.threshold {
            converged = true;
            break;
        }
    }

    let per_scheduler_cost = (0..n)
        .map(|i| costs::per_task_power_cost(i, &strategy, config).unwrap_or(f64::INFINITY))
        .collect();
    Ok(EquilibriumResult { strategy, iterations, converged, change_trace: trace, per_scheduler_cost })
}

/// The equal-split baseline: every scheduler sends `1/m` of its stream to
/// every node. Errors when some node cannot absorb its share of the total.
pub fn average_allocation(config: &GridConfig) -> Result<StrategyMatrix, SolveError> {
    let (n, m) = (config.scheduler_count(), config.node_count());
    let total_lambda: f64 = config.schedulers.iter().map(|s| s.lambda).sum();
    let share = total_lambda / m as f64;
    for node in &config.nodes {
        if !(node.mu > share) {
            return Err(SolveError::Infeasible {
                scheduler: usize::MAX,
                capacity: node.mu,
                lambda: share,
            });
        }
    }
    Ok(StrategyMatrix::uniform(n, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CostConstants, NodeSpec, SchedulerSpec};
    use alloc::vec;

    fn config(lambdas: &[f64], mus: &[f64]) -> GridConfig {
        let nodes = mus
            .iter()
            .enumerate()
            .map(|(j, &mu)| NodeSpec::exponential(j, mu).unwrap())
            .collect();
        let schedulers = lambdas
            .iter()
            .enumerate()
            .map(|(i, &l)| SchedulerSpec::new(i, l))
            .collect();
        GridConfig::new(nodes, schedulers, CostConstants::default())
    }

    fn benchmark() -> GridConfig {
        config(
            &[6.672, 2.78, 3.336, 6.672, 5.004],
            &[35.0, 46.0, 37.0, 28.0, 29.0, 30.0, 41.0, 32.0],
        )
    }

    #[test]
    fn available_capacity_cases() {
        let cfg = config(&[1.0], &[2.0]);
        let zero = StrategyMatrix::zeros(1, 1);
        assert_eq!(available_capacity(0, 0, &zero, &cfg), 2.0);

        // Competitor saturates the node.
        let cfg2 = config(&[1.0, 2.0], &[2.0]);
        let s = StrategyMatrix::from_rows(vec![vec![0.0], vec![1.0]]);
        assert_eq!(available_capacity(0, 0, &s, &cfg2), 0.0);

        // Cold start leaves the full rate everywhere.
        let bench = benchmark();
        let zero = StrategyMatrix::zeros(5, 8);
        for (j, node) in bench.nodes.iter().enumerate() {
            assert_eq!(available_capacity(j, 0, &zero, &bench), node.mu);
        }
    }

    #[test]
    fn potential_power_cost_cases() {
        let cfg = config(&[1.0], &[35.0]);
        // Exponential node u=35 with unit constants: t = c_p p1 h - c_p p2
        // h2/(2h) + c_p p2 h2 / (2 h^2 u) = 1/35 - 1/35 + 1/35 = 1/35.
        let t = potential_power_cost(0, 0, 35.0, &cfg).unwrap();
        assert!((t - 1.0 / 35.0).abs() < 1e-15, "t = {t}");

        // Without waiting draw the threshold is just busy power per task.
        let mut no_wait = config(&[1.0], &[35.0]);
        no_wait.nodes[0].p_idle_wait = 0.0;
        let t = potential_power_cost(0, 0, 35.0, &no_wait).unwrap();
        assert!((t - 1.0 / 35.0).abs() < 1e-15);

        // Large-capacity limit drops the last term.
        let t_inf = potential_power_cost(0, 0, 1e18, &cfg).unwrap();
        let h = 1.0 / 35.0;
        let h2 = 2.0 / (35.0 * 35.0);
        assert!((t_inf - (h - h2 / (2.0 * h))).abs() < 1e-12);

        assert!(matches!(
            potential_power_cost(0, 0, 0.0, &cfg),
            Err(SolveError::NonPositiveCapacity { node: 0, .. })
        ));
    }

    #[test]
    fn solve_alpha_single_node_substitution() {
        // With one active node the allocation at the root must be exactly 1.
        let cfg = config(&[1.0], &[2.0]);
        let capacities = vec![2.0];
        let alpha = solve_alpha(&[0], 0, &capacities, &cfg).unwrap();
        let a = (capacities[0] - budget_term(0, alpha, capacities[0], &cfg)) / 1.0;
        assert!((a - 1.0).abs() < 1e-10, "a = {a}");
    }

    #[test]
    fn solve_alpha_rejects_insufficient_capacity() {
        let cfg = config(&[3.0], &[2.0]);
        assert!(matches!(
            solve_alpha(&[0], 0, &[2.0], &cfg),
            Err(SolveError::NoRoot { scheduler: 0 })
        ));
    }

    #[test]
    fn best_response_single_node() {
        let cfg = config(&[1.0], &[2.0]);
        let zero = StrategyMatrix::zeros(1, 1);
        let br = best_response(0, &zero, &cfg).unwrap();
        assert_eq!(br.active_count, 1);
        assert!((br.row[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn best_response_symmetric_nodes_split_evenly() {
        let cfg = config(&[1.0], &[2.0, 2.0]);
        let zero = StrategyMatrix::zeros(1, 2);
        let br = best_response(0, &zero, &cfg).unwrap();
        assert!((br.row[0] - 0.5).abs() < 1e-10);
        assert!((br.row[1] - 0.5).abs() < 1e-10);
        assert_eq!(br.active_count, 2);
    }

    #[test]
    fn best_response_near_saturation_stays_feasible() {
        let mus = [2.0, 3.0, 1.5];
        let total: f64 = mus.iter().sum();
        let cfg = config(&[total * 0.95], &mus);
        let zero = StrategyMatrix::zeros(1, 3);
        let br = best_response(0, &zero, &cfg).unwrap();
        assert_eq!(br.active_count, 3);
        let lambda = cfg.schedulers[0].lambda;
        for j in 0..3 {
            assert!(br.row[j] * lambda < mus[j], "node {j} overloaded");
        }
        let sum: f64 = br.row.iter().sum();
        assert!((sum - 1.0).abs() < 1e-10);
    }

    #[test]
    fn best_response_skips_expensive_node_at_light_load() {
        // One fast cheap node and one slow node: at a light stream the slow
        // node's potential cost exceeds the multiplier and it gets nothing.
        let cfg = config(&[0.05], &[50.0, 0.2]);
        let zero = StrategyMatrix::zeros(1, 2);
        let br = best_response(0, &zero, &cfg).unwrap();
        assert_eq!(br.active_count, 1);
        assert_eq!(br.row[1], 0.0);
        assert!((br.row[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn best_response_infeasible_when_capacity_short() {
        // Competitor saturates node 0 and takes half of node 1, leaving
        // 0 + 0.5 of capacity for a stream of rate 1.0.
        let cfg2 = config(&[1.0, 2.5], &[2.0, 1.0]);
        let s = StrategyMatrix::from_rows(vec![vec![0.0, 0.0], vec![0.8, 0.2]]);
        let err = best_response(0, &s, &cfg2).unwrap_err();
        assert!(matches!(err, SolveError::Infeasible { scheduler: 0, .. }));
    }

    #[test]
    fn greedy_branch_without_waiting_draw() {
        let mut cfg = config(&[2.5], &[2.0, 3.0]);
        for node in &mut cfg.nodes {
            node.p_idle_wait = 0.0;
        }
        // Busy thresholds t = h: node 1 is faster, so cheaper, and can take
        // the whole stream (2.5 < 3).
        let zero = StrategyMatrix::zeros(1, 2);
        let br = best_response(0, &zero, &cfg).unwrap();
        assert_eq!(br.row, vec![0.0, 1.0]);

        // A heavier stream spills over: node 1 fills to (almost) capacity,
        // node 0 takes the rest.
        let mut heavy = config(&[4.0], &[2.0, 3.0]);
        for node in &mut heavy.nodes {
            node.p_idle_wait = 0.0;
        }
        let zero = StrategyMatrix::zeros(1, 2);
        let br = best_response(0, &zero, &heavy).unwrap();
        assert!((br.row[1] * 4.0 - 3.0).abs() < 1e-4, "row: {:?}", br.row);
        assert!((br.row[0] * 4.0 - 1.0).abs() < 1e-4);
        let sum: f64 = br.row.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        // Spilled node stays strictly inside its stability region.
        assert!(heavy.nodes[1].service.mean * br.row[1] * 4.0 < 1.0 - costs::STABILITY_EPSILON);
    }

    #[test]
    fn convergence_metric_cases() {
        let a = StrategyMatrix::uniform(2, 2);
        assert_eq!(convergence_metric(&a, &a).unwrap(), 0.0);

        let zero = StrategyMatrix::zeros(2, 2);
        assert_eq!(convergence_metric(&zero, &a).unwrap(), 1.0);

        let shifted = StrategyMatrix::from_rows(vec![vec![0.51, 0.49], vec![0.5, 0.5]]);
        let metric = convergence_metric(&a, &shifted).unwrap();
        assert!((metric - 0.01).abs() < 1e-12);

        let wrong = StrategyMatrix::zeros(1, 2);
        assert!(matches!(
            convergence_metric(&zero, &wrong),
            Err(SolveError::ShapeMismatch)
        ));
    }

    #[test]
    fn single_scheduler_converges_immediately() {
        let cfg = config(&[1.0], &[2.0, 3.0]);
        let result = nash_iterate(&cfg, None, &SolveOptions::default()).unwrap();
        assert!(result.converged);
        assert!(result.iterations <= 2);
        assert!(result.change_trace.len() <= 2);
        assert!((result.change_trace[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn benchmark_converges_geometrically() {
        // Sequential responses contract the change by roughly half per
        // round, reaching the 1e-4 threshold in 16 rounds on the benchmark.
        let result = nash_iterate(&benchmark(), None, &SolveOptions::default()).unwrap();
        assert!(result.converged);
        assert!(result.iterations <= 20, "took {} rounds", result.iterations);
        result.strategy.validate_for(&benchmark()).unwrap();
        let trace = &result.change_trace;
        for w in trace.windows(2) {
            assert!(w[1] < w[0], "change must shrink every round: {trace:?}");
        }
    }

    #[test]
    fn dynamics_are_deterministic() {
        let a = nash_iterate(&benchmark(), None, &SolveOptions::default()).unwrap();
        let b = nash_iterate(&benchmark(), None, &SolveOptions::default()).unwrap();
        assert_eq!(a.strategy, b.strategy);
        assert_eq!(a.change_trace, b.change_trace);
    }

    #[test]
    fn forced_non_convergence_is_reported() {
        let cfg = benchmark();
        let opts = SolveOptions { threshold: 0.0, max_iter: 3, ..Default::default() };
        let result = nash_iterate(&cfg, None, &opts).unwrap();
        assert!(!result.converged);
        assert_eq!(result.iterations, 3);
        assert_eq!(result.change_trace.len(), 3);
    }

    #[test]
    fn jacobi_schedule_runs_and_stays_feasible() {
        // Simultaneous responses overshoot on coupled instances; the
        // benchmark settles into a two-cycle instead of converging. The run
        // must still terminate gracefully with feasible strategies.
        let opts = SolveOptions {
            schedule: UpdateSchedule::Jacobi,
            max_iter: 40,
            ..Default::default()
        };
        let result = nash_iterate(&benchmark(), None, &opts).unwrap();
        assert!(!result.converged);
        result.strategy.validate_for(&benchmark()).unwrap();

        // Without competitors the schedules coincide and converge.
        let single = config(&[1.0], &[2.0, 3.0]);
        let result = nash_iterate(&single, None, &opts).unwrap();
        assert!(result.converged);
    }

    #[test]
    fn average_allocation_cases() {
        let cfg = config(&[1.0, 1.0], &[2.0, 2.0, 2.0, 2.0]);
        let avg = average_allocation(&cfg).unwrap();
        for i in 0..2 {
            for j in 0..4 {
                assert_eq!(avg.get(i, j), 0.25);
            }
        }

        let single = config(&[1.0], &[2.0]);
        assert_eq!(average_allocation(&single).unwrap().get(0, 0), 1.0);

        // Benchmark: total arrivals 24.464 split over 8 nodes is 3.058,
        // below the slowest node's 28.
        assert!(average_allocation(&benchmark()).is_ok());

        // One node too slow to take its share.
        let lopsided = config(&[3.0, 3.0], &[10.0, 2.9]);
        assert!(matches!(
            average_allocation(&lopsided),
            Err(SolveError::Infeasible { .. })
        ));
    }
}

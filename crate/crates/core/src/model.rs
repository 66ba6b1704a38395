//! Domain types for a grid scenario and validation of the feasibility
//! constraints every other module assumes: row-stochastic slice strategies,
//! aggregate stability (total arrivals below total service capacity), and
//! per-node stability.

use alloc::vec::Vec;
use core::fmt;

use crate::distributions::{
    bounded_pareto_moments, bounded_pareto_sample, exponential_moments, exponential_sample,
    BoundedParetoParams, DistributionError,
};

/// Tolerance on row sums of a slice strategy.
pub const ROW_SUM_TOL: f64 = 1e-9;

/// Relative tolerance between a node's `mu` and `1 / service.mean`.
pub const SERVICE_MEAN_TOL: f64 = 1e-9;

/// Shape of a service-time distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ServiceKind {
    Exponential { mu: f64 },
    BoundedPareto(BoundedParetoParams),
}

/// A service-time distribution reduced to what the cost model needs: its
/// first and second moments. The queueing simulator additionally samples
/// from the full distribution via [`ServiceDistribution::sample`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceDistribution {
    pub kind: ServiceKind,
    /// Mean service time, `> 0`.
    pub mean: f64,
    /// Second moment of the service time (not the variance).
    pub second_moment: f64,
}

impl ServiceDistribution {
    pub fn exponential(mu: f64) -> Result<Self, DistributionError> {
        let (mean, second_moment) = exponential_moments(mu)?;
        Ok(Self { kind: ServiceKind::Exponential { mu }, mean, second_moment })
    }

    pub fn bounded_pareto(params: BoundedParetoParams) -> Self {
        let (mean, second_moment) = bounded_pareto_moments(&params);
        Self { kind: ServiceKind::BoundedPareto(params), mean, second_moment }
    }

    /// Inverse-CDF sample: maps `uniform` in `[0, 1)` to a service time.
    pub fn sample(&self, uniform: f64) -> f64 {
        match self.kind {
            ServiceKind::Exponential { mu } => exponential_sample(mu, uniform),
            ServiceKind::BoundedPareto(params) => bounded_pareto_sample(&params, uniform),
        }
    }
}

/// A computational node: an M/G/1 server plus its cost parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    pub id: usize,
    /// Service rate (tasks per unit time).
    pub mu: f64,
    pub service: ServiceDistribution,
    /// Power draw while serving a task.
    pub p_busy: f64,
    /// Power draw attributed to tasks waiting in the queue.
    pub p_idle_wait: f64,
    /// Resource replacement cost.
    pub c_r: f64,
    /// Mean time to failure.
    pub mttf: f64,
    /// Fixed amortization cost.
    pub c_f: f64,
    /// Utilization factor of the node's resources.
    pub rho_util: f64,
    /// Computation supplied per task slot.
    pub compute_capacity: f64,
    /// Disk space in bits.
    pub disk_capacity: f64,
}

impl NodeSpec {
    /// Exponential-service node with all cost parameters at 1.0.
    pub fn exponential(id: usize, mu: f64) -> Result<Self, DistributionError> {
        Ok(Self::with_service(id, mu, ServiceDistribution::exponential(mu)?))
    }

    /// Bounded Pareto node; the service rate is the reciprocal of the mean
    /// service time.
    pub fn bounded_pareto(id: usize, params: BoundedParetoParams) -> Self {
        let service = ServiceDistribution::bounded_pareto(params);
        Self::with_service(id, 1.0 / service.mean, service)
    }

    pub fn with_service(id: usize, mu: f64, service: ServiceDistribution) -> Self {
        Self {
            id,
            mu,
            service,
            p_busy: 1.0,
            p_idle_wait: 1.0,
            c_r: 1.0,
            mttf: 1.0,
            c_f: 1.0,
            rho_util: 1.0,
            compute_capacity: 1.0,
            disk_capacity: 1.0,
        }
    }
}

/// A scheduler: an aggregated Poisson task stream to be sliced across nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SchedulerSpec {
    pub id: usize,
    /// Mean task arrival rate.
    pub lambda: f64,
    /// Mean task data length in bits.
    pub bits: f64,
    /// Mean computation demand per task.
    pub compute_demand: f64,
}

impl SchedulerSpec {
    pub fn new(id: usize, lambda: f64) -> Self {
        Self { id, lambda, bits: 1.0, compute_demand: 1.0 }
    }
}

/// Network link between a scheduler and a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSpec {
    pub scheduler: usize,
    pub node: usize,
    /// Transmission delay.
    pub delay: f64,
    /// Link bandwidth in bits per unit time.
    pub bandwidth: f64,
}

impl LinkSpec {
    /// Default link: zero delay, unit bandwidth.
    pub fn default_for(scheduler: usize, node: usize) -> Self {
        Self { scheduler, node, delay: 0.0, bandwidth: 1.0 }
    }
}

/// Global cost constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostConstants {
    /// Cost per Joule; must be positive (the best response divides by it).
    pub c_p: f64,
    /// Cost per unit bandwidth-time.
    pub c_bw: f64,
    /// Network utilization cost per unit time.
    pub c_n: f64,
}

impl Default for CostConstants {
    fn default() -> Self {
        Self { c_p: 1.0, c_bw: 1.0, c_n: 1.0 }
    }
}

/// A full scenario: nodes, schedulers, links, cost constants.
#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub nodes: Vec<NodeSpec>,
    pub schedulers: Vec<SchedulerSpec>,
    /// One entry per (scheduler, node) pair.
    pub links: Vec<LinkSpec>,
    pub constants: CostConstants,
}

impl GridConfig {
    /// Build a config with the default link for every pair.
    pub fn new(
        nodes: Vec<NodeSpec>,
        schedulers: Vec<SchedulerSpec>,
        constants: CostConstants,
    ) -> Self {
        let links = schedulers
            .iter()
            .flat_map(|s| nodes.iter().map(|n| LinkSpec::default_for(s.id, n.id)))
            .collect();
        Self { nodes, schedulers, links, constants }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn scheduler_count(&self) -> usize {
        self.schedulers.len()
    }

    /// Link between scheduler `i` and node `j`.
    ///
    /// Panics if the pair is missing; `validate` reports missing pairs
    /// without panicking.
    pub fn link(&self, i: usize, j: usize) -> &LinkSpec {
        let m = self.nodes.len();
        // Configs built by the constructors store links row-major.
        if let Some(l) = self.links.get(i * m + j) {
            if l.scheduler == i && l.node == j {
                return l;
            }
        }
        self.links
            .iter()
            .find(|l| l.scheduler == i && l.node == j)
            .unwrap_or_else(|| panic!("no link for scheduler {i}, node {j}"))
    }

    /// Offered-load ratio: total arrival rate over total service rate.
    pub fn system_load(&self) -> f64 {
        let total_lambda: f64 = self.schedulers.iter().map(|s| s.lambda).sum();
        let total_mu: f64 = self.nodes.iter().map(|n| n.mu).sum();
        total_lambda / total_mu
    }

    /// Rescale every arrival rate by a common factor so the system load hits
    /// `target`. Relative arrival proportions are preserved exactly.
    pub fn scale_to_load(&self, target: f64) -> GridConfig {
        assert!(target > 0.0 && target < 1.0, "target load must be in (0, 1), got {target}");
        let factor = target / self.system_load();
        let mut scaled = self.clone();
        for s in &mut scaled.schedulers {
            s.lambda *= factor;
        }
        scaled
    }

    /// Check every type invariant plus aggregate stability. Returns all
    /// violations, not just the first.
    pub fn validate(&self) -> Result<(), ValidationReport> {
        let mut errors = Vec::new();
        let (n, m) = (self.schedulers.len(), self.nodes.len());

        if m == 0 {
            errors.push(ValidationError::Empty { what: "nodes" });
        }
        if n == 0 {
            errors.push(ValidationError::Empty { what: "schedulers" });
        }

        for (j, node) in self.nodes.iter().enumerate() {
            if !(node.mu > 0.0) {
                errors.push(ValidationError::NonPositiveRate { what: "node mu", index: j, value: node.mu });
            }
            if !(node.mttf > 0.0) {
                errors.push(ValidationError::NonPositiveRate { what: "node mttf", index: j, value: node.mttf });
            }
            if !(node.compute_capacity > 0.0) {
                errors.push(ValidationError::NonPositiveRate {
                    what: "node compute_capacity",
                    index: j,
                    value: node.compute_capacity,
                });
            }
            if !(node.disk_capacity > 0.0) {
                errors.push(ValidationError::NonPositiveRate {
                    what: "node disk_capacity",
                    index: j,
                    value: node.disk_capacity,
                });
            }
            if node.mu > 0.0 {
                let expected = 1.0 / node.mu;
                if crate::math::abs(node.service.mean - expected) > SERVICE_MEAN_TOL * expected {
                    errors.push(ValidationError::ServiceMeanMismatch {
                        node: j,
                        mean: node.service.mean,
                        expected,
                    });
                }
            }
            let mean = node.service.mean;
            if node.service.second_moment < mean * mean * (1.0 - 1e-12) {
                errors.push(ValidationError::SecondMomentBelowMeanSquare { node: j });
            }
        }

        for (i, s) in self.schedulers.iter().enumerate() {
            if !(s.lambda > 0.0) {
                errors.push(ValidationError::NonPositiveRate { what: "scheduler lambda", index: i, value: s.lambda });
            }
            if !(s.bits > 0.0) {
                errors.push(ValidationError::NonPositiveRate { what: "scheduler bits", index: i, value: s.bits });
            }
            if !(s.compute_demand > 0.0) {
                errors.push(ValidationError::NonPositiveRate {
                    what: "scheduler compute_demand",
                    index: i,
                    value: s.compute_demand,
                });
            }
        }

        if !(self.constants.c_p > 0.0) {
            errors.push(ValidationError::NonPositiveRate { what: "c_p", index: 0, value: self.constants.c_p });
        }
        if self.constants.c_bw < 0.0 {
            errors.push(ValidationError::NonPositiveRate { what: "c_bw", index: 0, value: self.constants.c_bw });
        }
        if self.constants.c_n < 0.0 {
            errors.push(ValidationError::NonPositiveRate { what: "c_n", index: 0, value: self.constants.c_n });
        }

        // Each (scheduler, node) pair exactly once.
        let mut seen = alloc::vec![0u8; n * m];
        for l in &self.links {
            if l.scheduler >= n || l.node >= m {
                errors.push(ValidationError::LinkOutOfRange { scheduler: l.scheduler, node: l.node });
                continue;
            }
            let slot = &mut seen[l.scheduler * m + l.node];
            if *slot > 0 {
                errors.push(ValidationError::DuplicateLink { scheduler: l.scheduler, node: l.node });
            }
            *slot += 1;
            if l.delay < 0.0 {
                errors.push(ValidationError::NonPositiveRate {
                    what: "link delay",
                    index: l.scheduler * m + l.node,
                    value: l.delay,
                });
            }
            if !(l.bandwidth > 0.0) {
                errors.push(ValidationError::NonPositiveRate {
                    what: "link bandwidth",
                    index: l.scheduler * m + l.node,
                    value: l.bandwidth,
                });
            }
        }
        for i in 0..n {
            for j in 0..m {
                if seen[i * m + j] == 0 {
                    errors.push(ValidationError::MissingLink { scheduler: i, node: j });
                }
            }
        }

        let total_lambda: f64 = self.schedulers.iter().map(|s| s.lambda).sum();
        let total_mu: f64 = self.nodes.iter().map(|n| n.mu).sum();
        if !(total_lambda < total_mu) {
            errors.push(ValidationError::InfeasibleLoad { total_lambda, total_mu });
        }

        if errors.is_empty() {
            Ok(())
        } else {
            Err(ValidationReport { errors })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ValidationError {
    Empty { what: &'static str },
    NonPositiveRate { what: &'static str, index: usize, value: f64 },
    ServiceMeanMismatch { node: usize, mean: f64, expected: f64 },
    SecondMomentBelowMeanSquare { node: usize },
    MissingLink { scheduler: usize, node: usize },
    DuplicateLink { scheduler: usize, node: usize },
    LinkOutOfRange { scheduler: usize, node: usize },
    /// Total arrivals reach or exceed total service capacity.
    InfeasibleLoad { total_lambda: f64, total_mu: f64 },
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationError::Empty { what } => write!(f, "{what} must not be empty"),
            ValidationError::NonPositiveRate { what, index, value } => {
                write!(f, "{what} [{index}] must be positive, got {value}")
            }
            ValidationError::ServiceMeanMismatch { node, mean, expected } => write!(
                f,
                "node {node}: service mean {mean} does not match 1/mu = {expected}"
            ),
            ValidationError::SecondMomentBelowMeanSquare { node } => {
                write!(f, "node {node}: second moment below mean squared")
            }
            ValidationError::MissingLink { scheduler, node } => {
                write!(f, "missing link for scheduler {scheduler}, node {node}")
            }
            ValidationError::DuplicateLink { scheduler, node } => {
                write!(f, "duplicate link for scheduler {scheduler}, node {node}")
            }
            ValidationError::LinkOutOfRange { scheduler, node } => {
                write!(f, "link references unknown pair (scheduler {scheduler}, node {node})")
            }
            ValidationError::InfeasibleLoad { total_lambda, total_mu } => write!(
                f,
                "total arrival rate {total_lambda} must stay below total service rate {total_mu}"
            ),
        }
    }
}

/// Every constraint violated by a config, with indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub errors: Vec<ValidationError>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} constraint violation(s):", self.errors.len())?;
        for e in &self.errors {
            writeln!(f, "  - {e}")?;
        }
        Ok(())
    }
}

impl core::error::Error for ValidationReport {}

/// The game's decision variable: the n-by-m matrix of slice fractions.
/// Each row is a probability vector over nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyMatrix {
    rows: Vec<Vec<f64>>,
    m: usize,
}

impl StrategyMatrix {
    /// All-zero matrix, the conventional cold-start state before the first
    /// best-response round. Not row-stochastic.
    pub fn zeros(n: usize, m: usize) -> Self {
        Self { rows: alloc::vec![alloc::vec![0.0; m]; n], m }
    }

    /// Equal split: every entry `1/m`.
    pub fn uniform(n: usize, m: usize) -> Self {
        assert!(m > 0);
        Self { rows: alloc::vec![alloc::vec![1.0 / m as f64; m]; n], m }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let m = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == m), "ragged strategy rows");
        Self { rows, m }
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i][j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn set_row(&mut self, i: usize, row: Vec<f64>) {
        assert_eq!(row.len(), self.m, "row length mismatch");
        self.rows[i] = row;
    }

    /// Total arrival rate at node `j` under this strategy.
    pub fn node_arrival(&self, j: usize, config: &GridConfig) -> f64 {
        self.rows
            .iter()
            .zip(&config.schedulers)
            .map(|(row, s)| row[j] * s.lambda)
            .sum()
    }

    /// Utilization of node `j`: mean service time times total arrival rate.
    pub fn node_load(&self, j: usize, config: &GridConfig) -> f64 {
        config.nodes[j].service.mean * self.node_arrival(j, config)
    }

    /// Check row-stochasticity and per-node stability against `config`.
    pub fn validate_for(&self, config: &GridConfig) -> Result<(), StrategyError> {
        if self.n() != config.scheduler_count() || self.m() != config.node_count() {
            return Err(StrategyError::ShapeMismatch {
                got: (self.n(), self.m()),
                want: (config.scheduler_count(), config.node_count()),
            });
        }
        for (i, row) in self.rows.iter().enumerate() {
            if let Some(j) = row.iter().position(|&a| a < 0.0) {
                return Err(StrategyError::NegativeEntry { scheduler: i, node: j, value: row[j] });
            }
            let sum: f64 = row.iter().sum();
            if crate::math::abs(sum - 1.0) > ROW_SUM_TOL {
                return Err(StrategyError::RowSum { scheduler: i, sum });
            }
        }
        for j in 0..self.m() {
            let arrival = self.node_arrival(j, config);
            if !(arrival < config.nodes[j].mu) {
                return Err(StrategyError::NodeOverload { node: j, arrival, mu: config.nodes[j].mu });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StrategyError {
    ShapeMismatch { got: (usize, usize), want: (usize, usize) },
    NegativeEntry { scheduler: usize, node: usize, value: f64 },
    RowSum { scheduler: usize, sum: f64 },
    NodeOverload { node: usize, arrival: f64, mu: f64 },
}

impl fmt::Display for StrategyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyError::ShapeMismatch { got, want } => {
                write!(f, "strategy shape {got:?} does not match scenario {want:?}")
            }
            StrategyError::NegativeEntry { scheduler, node, value } => {
                write!(f, "strategy[{scheduler}][{node}] = {value} is negative")
            }
            StrategyError::RowSum { scheduler, sum } => {
                write!(f, "row {scheduler} sums to {sum}, expected 1")
            }
            StrategyError::NodeOverload { node, arrival, mu } => {
                write!(f, "node {node}: arrival rate {arrival} reaches service rate {mu}")
            }
        }
    }
}

impl core::error::Error for StrategyError {}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn simple_config(lambdas: &[f64], mus: &[f64]) -> GridConfig {
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

    #[test]
    fn validate_accepts_stable_config() {
        assert!(simple_config(&[1.0], &[2.0]).validate().is_ok());
    }

    #[test]
    fn validate_accepts_benchmark_tables() {
        let cfg = simple_config(
            &[6.672, 2.78, 3.336, 6.672, 5.004],
            &[35.0, 46.0, 37.0, 28.0, 29.0, 30.0, 41.0, 32.0],
        );
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn validate_rejects_overloaded_system() {
        let report = simple_config(&[3.0], &[2.0]).validate().unwrap_err();
        assert!(report
            .errors
            .iter()
            .any(|e| matches!(e, ValidationError::InfeasibleLoad { .. })));
    }

    #[test]
    fn validate_reports_every_violation() {
        let mut cfg = simple_config(&[3.0], &[2.0]);
        cfg.schedulers[0].bits = 0.0;
        cfg.links.clear();
        let report = cfg.validate().unwrap_err();
        assert!(report.errors.len() >= 3, "{report}");
        assert!(report
            .errors
            .iter()
            .any(|e| matches!(e, ValidationError::MissingLink { .. })));
    }

    #[test]
    fn validate_is_idempotent() {
        let cfg = simple_config(&[1.0, 2.0], &[4.0, 4.0]);
        assert_eq!(cfg.validate(), cfg.validate());
    }

    #[test]
    fn system_load_is_arrival_over_service() {
        assert_eq!(simple_config(&[1.0], &[2.0]).system_load(), 0.5);
        assert_eq!(simple_config(&[2.0, 2.0], &[4.0, 4.0]).system_load(), 0.5);
        let tables = simple_config(
            &[6.672, 2.78, 3.336, 6.672, 5.004],
            &[35.0, 46.0, 37.0, 28.0, 29.0, 30.0, 41.0, 32.0],
        );
        assert!((tables.system_load() - 24.464 / 278.0).abs() < 1e-12);
        assert!((tables.system_load() - 0.088).abs() < 1e-4);
    }

    #[test]
    fn scale_to_load_hits_target_and_keeps_ratios() {
        let cfg = simple_config(&[1.0, 3.0], &[8.0]);
        let scaled = cfg.scale_to_load(0.25);
        assert_eq!(scaled.schedulers[0].lambda, 0.5);
        assert_eq!(scaled.schedulers[1].lambda, 1.5);

        let noop = simple_config(&[1.0, 1.0], &[4.0]).scale_to_load(0.5);
        assert_eq!(noop.schedulers[0].lambda, 1.0);
        assert_eq!(noop.schedulers[1].lambda, 1.0);

        let tables = simple_config(
            &[6.672, 2.78, 3.336, 6.672, 5.004],
            &[35.0, 46.0, 37.0, 28.0, 29.0, 30.0, 41.0, 32.0],
        );
        let rescaled = tables.scale_to_load(0.2);
        assert!((rescaled.system_load() - 0.2).abs() < 1e-12);
        let factor = rescaled.schedulers[0].lambda / tables.schedulers[0].lambda;
        assert!((factor - 0.2 * 278.0 / 24.464).abs() < 1e-12);
        // Ratios survive exactly.
        assert_eq!(
            rescaled.schedulers[0].lambda / rescaled.schedulers[3].lambda,
            1.0
        );
    }

    #[test]
    fn strategy_validation_catches_bad_rows() {
        let cfg = simple_config(&[1.0, 1.0], &[4.0, 4.0]);
        assert!(StrategyMatrix::uniform(2, 2).validate_for(&cfg).is_ok());

        let bad_sum = StrategyMatrix::from_rows(vec![vec![0.6, 0.6], vec![0.5, 0.5]]);
        assert!(matches!(
            bad_sum.validate_for(&cfg),
            Err(StrategyError::RowSum { scheduler: 0, .. })
        ));

        let negative = StrategyMatrix::from_rows(vec![vec![1.2, -0.2], vec![0.5, 0.5]]);
        assert!(matches!(
            negative.validate_for(&cfg),
            Err(StrategyError::NegativeEntry { .. })
        ));
    }

    #[test]
    fn strategy_validation_catches_node_overload() {
        let cfg = simple_config(&[3.0, 3.0], &[4.0, 4.0]);
        let lopsided = StrategyMatrix::from_rows(vec![vec![1.0, 0.0], vec![1.0, 0.0]]);
        assert!(matches!(
            lopsided.validate_for(&cfg),
            Err(StrategyError::NodeOverload { node: 0, .. })
        ));
    }

    #[test]
    fn service_mean_must_match_rate() {
        let mut cfg = simple_config(&[1.0], &[2.0]);
        cfg.nodes[0].mu = 3.0; // service still says mean 0.5
        let report = cfg.validate().unwrap_err();
        assert!(report
            .errors
            .iter()
            .any(|e| matches!(e, ValidationError::ServiceMeanMismatch { node: 0, .. })));
    }
}

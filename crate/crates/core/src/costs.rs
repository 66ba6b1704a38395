//! Cost components of a task slice on a node, and their aggregation per
//! scheduler.
//!
//! The occupancy terms come from the M/G/1 view of a node. With `h` the mean
//! service time of node `j`, `h2` its second moment, and `A_j` the total
//! arrival rate at the node:
//!
//! ```text
//! service occupancy  F1 = h * a_ij * lambda_i
//! waiting occupancy  F2 = a_ij * lambda_i * h2 * A_j / (2 * (1 - h * A_j))
//! ```
//!
//! `F2`'s denominator is the Pollaczek-Khinchine singularity; any node whose
//! load `h * A_j` reaches `1 - STABILITY_EPSILON` is reported as unstable
//! rather than letting costs silently go negative or infinite.

use core::fmt;

use crate::model::{GridConfig, StrategyMatrix};

/// Margin below full utilization at which a node is declared unstable.
pub const STABILITY_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostError {
    /// Offered load at `node` reached `1 - STABILITY_EPSILON`.
    UnstableNode { node: usize, load: f64 },
}

impl fmt::Display for CostError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostError::UnstableNode { node, load } => {
                write!(f, "node {node} is unstable at offered load {load}")
            }
        }
    }
}

impl core::error::Error for CostError {}

/// Per-scheduler cost components and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CostBreakdown {
    pub power: f64,
    pub network: f64,
    pub loss: f64,
    pub utilization: f64,
    pub total: f64,
}

/// Transmission time of scheduler `i`'s slice to node `j`:
/// `(delay + bits / bandwidth) * a_ij`.
pub fn transmission_time(i: usize, j: usize, a_ij: f64, config: &GridConfig) -> f64 {
    let link = config.link(i, j);
    (link.delay + config.schedulers[i].bits / link.bandwidth) * a_ij
}

/// Network cost of the slice: `(c_bw * bandwidth + c_n)` per unit of
/// transmission time.
pub fn network_cost(i: usize, j: usize, a_ij: f64, config: &GridConfig) -> f64 {
    let link = config.link(i, j);
    let rate = config.constants.c_bw * link.bandwidth + config.constants.c_n;
    rate * (link.delay + config.schedulers[i].bits / link.bandwidth) * a_ij
}

/// Service occupancy `F1 = h_j * a_ij * lambda_i`.
pub fn service_occupancy(i: usize, j: usize, a_ij: f64, config: &GridConfig) -> f64 {
    config.nodes[j].service.mean * a_ij * config.schedulers[i].lambda
}

fn checked_node_state(j: usize, strategy: &StrategyMatrix, config: &GridConfig) -> Result<(f64, f64), CostError> {
    let arrival = strategy.node_arrival(j, config);
    let load = config.nodes[j].service.mean * arrival;
    if load >= 1.0 - STABILITY_EPSILON {
        Err(CostError::UnstableNode { node: j, load })
    } else {
        Ok((arrival, load))
    }
}

/// Waiting occupancy `F2` of scheduler `i`'s slice at node `j` under the full
/// strategy matrix.
pub fn waiting_occupancy(
    i: usize,
    j: usize,
    strategy: &StrategyMatrix,
    config: &GridConfig,
) -> Result<f64, CostError> {
    let (arrival, load) = checked_node_state(j, strategy, config)?;
    let node = &config.nodes[j];
    let a_ij = strategy.get(i, j);
    let lambda = config.schedulers[i].lambda;
    Ok(a_ij * lambda * node.service.second_moment * arrival / (2.0 * (1.0 - load)))
}

/// Power cost of the slice: busy draw over service occupancy plus waiting
/// draw over waiting occupancy, both priced at `c_p`.
pub fn power_cost(
    i: usize,
    j: usize,
    strategy: &StrategyMatrix,
    config: &GridConfig,
) -> Result<f64, CostError> {
    let node = &config.nodes[j];
    let c_p = config.constants.c_p;
    let f1 = service_occupancy(i, j, strategy.get(i, j), config);
    let f2 = waiting_occupancy(i, j, strategy, config)?;
    Ok(c_p * node.p_busy * f1 + c_p * node.p_idle_wait * f2)
}

/// Loss cost of the slice: occupancy scaled by replacement cost per failure
/// time.
pub fn loss_cost(
    i: usize,
    j: usize,
    strategy: &StrategyMatrix,
    config: &GridConfig,
) -> Result<f64, CostError> {
    let node = &config.nodes[j];
    let f1 = service_occupancy(i, j, strategy.get(i, j), config);
    let f2 = waiting_occupancy(i, j, strategy, config)?;
    Ok(node.c_r / node.mttf * (f1 + f2))
}

/// Utilization cost of the slice: CPU share during service plus disk share
/// during service and waiting. Both resource shares are themselves
/// proportional to `a_ij`, so the terms are quadratic in `a_ij`.
pub fn utilization_cost(
    i: usize,
    j: usize,
    strategy: &StrategyMatrix,
    config: &GridConfig,
) -> Result<f64, CostError> {
    let node = &config.nodes[j];
    let sched = &config.schedulers[i];
    let a_ij = strategy.get(i, j);
    let f1 = service_occupancy(i, j, a_ij, config);
    let f2 = waiting_occupancy(i, j, strategy, config)?;
    let cpu_share = sched.compute_demand / node.compute_capacity * a_ij;
    let disk_share = sched.bits / node.disk_capacity * a_ij;
    Ok(node.c_f * node.rho_util * (cpu_share * f1 + disk_share * (f1 + f2)))
}

/// Componentwise cost of scheduler `i` summed over all nodes.
pub fn scheduler_cost(
    i: usize,
    strategy: &StrategyMatrix,
    config: &GridConfig,
) -> Result<CostBreakdown, CostError> {
    let mut b = CostBreakdown::default();
    for j in 0..config.node_count() {
        b.power += power_cost(i, j, strategy, config)?;
        b.network += network_cost(i, j, strategy.get(i, j), config);
        b.loss += loss_cost(i, j, strategy, config)?;
        b.utilization += utilization_cost(i, j, strategy, config)?;
    }
    b.total = b.power + b.network + b.loss + b.utilization;
    Ok(b)
}

/// Expected power cost per task of scheduler `i`: the power component of
/// [`scheduler_cost`] with the scheduler's arrival rate divided out. This is
/// the objective each scheduler minimizes in the game.
pub fn per_task_power_cost(
    i: usize,
    strategy: &StrategyMatrix,
    config: &GridConfig,
) -> Result<f64, CostError> {
    let c_p = config.constants.c_p;
    let mut total = 0.0;
    for j in 0..config.node_count() {
        let (arrival, load) = checked_node_state(j, strategy, config)?;
        let node = &config.nodes[j];
        let a_ij = strategy.get(i, j);
        total += c_p * node.p_busy * node.service.mean * a_ij
            + c_p * node.p_idle_wait * a_ij * node.service.second_moment * arrival
                / (2.0 * (1.0 - load));
    }
    Ok(total)
}

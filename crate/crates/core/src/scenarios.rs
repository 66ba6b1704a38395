//! Bundled benchmark scenarios used throughout the experiment suite.
//!
//! All cost constants default to 1.0 and links to zero delay and unit
//! bandwidth; experiments that prescribe a system load rescale the arrival
//! rates with [`GridConfig::scale_to_load`].

use alloc::vec::Vec;

use crate::distributions::BoundedParetoParams;
use crate::model::{CostConstants, GridConfig, NodeSpec, SchedulerSpec};

/// Service rates of the eight-node benchmark grid.
pub const BASELINE_NODE_RATES: [f64; 8] = [35.0, 46.0, 37.0, 28.0, 29.0, 30.0, 41.0, 32.0];

/// Arrival rates of the five-scheduler benchmark mix.
pub const BASELINE_ARRIVALS: [f64; 5] = [6.672, 2.78, 3.336, 6.672, 5.004];

/// Service rates of the extended sixteen-node set used by the node sweep.
/// The first eight coincide with [`BASELINE_NODE_RATES`].
pub const EXTENDED_NODE_RATES: [f64; 16] = [
    35.0, 46.0, 37.0, 28.0, 29.0, 30.0, 41.0, 32.0, 35.0, 46.0, 40.0, 39.0, 41.0, 30.0, 41.0,
    32.0,
];

/// `(k, p_max)` support bounds of the heavy-tailed benchmark nodes.
pub const HEAVY_TAILED_SUPPORTS: [(f64, f64); 8] = [
    (0.001, 0.07),
    (0.001, 0.07),
    (0.002, 0.08),
    (0.002, 0.08),
    (0.003, 0.09),
    (0.003, 0.09),
    (0.004, 0.1),
    (0.004, 0.1),
];

/// Tail shape shared by all heavy-tailed benchmark nodes.
pub const HEAVY_TAILED_SHAPE: f64 = 1.1;

/// Synthetic low-spread arrival mix (every rate within 10% of the mean).
/// Unlike the other tables this one is not a published benchmark set; it
/// exists to contrast fairness against the heterogeneous baseline mix.
pub const LOW_SPREAD_ARRIVALS: [f64; 5] = [5.2, 4.6, 4.9, 5.1, 4.7];

fn exponential_nodes(rates: &[f64]) -> Vec<NodeSpec> {
    rates
        .iter()
        .enumerate()
        .map(|(j, &mu)| NodeSpec::exponential(j, mu).expect("positive rate"))
        .collect()
}

fn schedulers(arrivals: &[f64]) -> Vec<SchedulerSpec> {
    arrivals
        .iter()
        .enumerate()
        .map(|(i, &l)| SchedulerSpec::new(i, l))
        .collect()
}

/// The eight-node, five-scheduler benchmark grid with exponential service.
pub fn baseline_grid() -> GridConfig {
    GridConfig::new(
        exponential_nodes(&BASELINE_NODE_RATES),
        schedulers(&BASELINE_ARRIVALS),
        CostConstants::default(),
    )
}

/// Benchmark grid restricted or extended to the first `count` nodes of the
/// sixteen-node rate set (`1 <= count <= 16`).
pub fn grid_with_nodes(count: usize) -> GridConfig {
    assert!(count >= 1 && count <= EXTENDED_NODE_RATES.len());
    GridConfig::new(
        exponential_nodes(&EXTENDED_NODE_RATES[..count]),
        schedulers(&BASELINE_ARRIVALS),
        CostConstants::default(),
    )
}

/// Eight heavy-tailed (Bounded Pareto) nodes with the benchmark supports;
/// each node's rate is the reciprocal of its mean service time. Schedulers
/// are the baseline mix.
pub fn heavy_tailed_grid() -> GridConfig {
    let nodes = HEAVY_TAILED_SUPPORTS
        .iter()
        .enumerate()
        .map(|(j, &(k, p_max))| {
            let params =
                BoundedParetoParams::new(k, p_max, HEAVY_TAILED_SHAPE).expect("valid support");
            NodeSpec::bounded_pareto(j, params)
        })
        .collect();
    GridConfig::new(nodes, schedulers(&BASELINE_ARRIVALS), CostConstants::default())
}

/// The baseline nodes paired with the synthetic low-spread scheduler mix.
pub fn low_spread_grid() -> GridConfig {
    GridConfig::new(
        exponential_nodes(&BASELINE_NODE_RATES),
        schedulers(&LOW_SPREAD_ARRIVALS),
        CostConstants::default(),
    )
}

/// Trivial one-scheduler, one-node scenario.
pub fn single_pair() -> GridConfig {
    GridConfig::new(
        exponential_nodes(&[2.0]),
        schedulers(&[1.0]),
        CostConstants::default(),
    )
}

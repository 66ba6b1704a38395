//! Cost-based non-cooperative load balancing for computational grids.
//!
//! Schedulers split Poisson task streams across M/G/1 compute nodes, each
//! minimizing its own expected per-task power cost. This crate computes each
//! scheduler's best response in closed form from the KKT conditions, iterates
//! best responses to a Nash equilibrium, prices the resulting allocations
//! with a four-component cost model (power, network, loss, utilization), and
//! validates the queueing math with a discrete-event simulator.
//!
//! The crate is `no_std`-compatible (requires `alloc`); the `std` feature,
//! enabled by default, only switches float math from `libm` to the standard
//! library. IO, file formats, and the command-line front end live in the
//! companion `gridslice-cli` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod costs;
pub mod distributions;
pub mod equilibrium;
pub mod experiments;
mod math;
pub mod model;
pub mod queueing;
pub mod scenarios;

pub use costs::{CostBreakdown, CostError};
pub use distributions::{BoundedParetoParams, DistributionError};
pub use equilibrium::{
    BestResponse, EquilibriumResult, SolveError, SolveOptions, UpdateSchedule,
};
pub use experiments::{ExperimentError, ExperimentReport, ReportRow, ScenarioRun, Scheme};
pub use model::{
    CostConstants, GridConfig, LinkSpec, NodeSpec, SchedulerSpec, ServiceDistribution,
    ServiceKind, StrategyMatrix, ValidationReport,
};
pub use queueing::{DesConfig, DesStats, QueueError};

//! Discrete-event simulation of a single M/G/1 node, used as an independent
//! check on the analytic waiting-time term of the cost model.
//!
//! Arrivals are merged Poisson streams, service is FIFO with times drawn
//! from the node's service distribution by inverse CDF. Waiting-time
//! statistics come with a batch-means 95% confidence interval.

use alloc::collections::{BinaryHeap, VecDeque};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::costs::{CostError, STABILITY_EPSILON};
use crate::model::{NodeSpec, ServiceDistribution};

/// One simulation run: a node, its merged arrival streams, and the horizon.
#[derive(Debug, Clone)]
pub struct DesConfig {
    pub node: NodeSpec,
    /// `(rate, scheduler id)` per stream; rates add up to the node's total
    /// arrival rate.
    pub arrival_streams: Vec<(f64, usize)>,
    /// Number of tasks to simulate.
    pub horizon: usize,
    /// Tasks discarded before statistics start.
    pub warmup: usize,
    pub seed: u64,
}

impl DesConfig {
    /// Single merged stream at `rate`, warmup at 10% of the horizon.
    pub fn single_stream(node: NodeSpec, rate: f64, horizon: usize, seed: u64) -> Self {
        Self {
            node,
            arrival_streams: alloc::vec![(rate, 0)],
            horizon,
            warmup: horizon / 10,
            seed,
        }
    }

    pub fn total_rate(&self) -> f64 {
        self.arrival_streams.iter().map(|(r, _)| r).sum()
    }
}

/// Statistics over the post-warmup portion of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesStats {
    /// Mean time in queue before service starts.
    pub mean_wait: f64,
    pub mean_service: f64,
    /// Mean time in system (wait plus service).
    pub mean_sojourn: f64,
    /// Fraction of observed time the server was busy.
    pub utilization: f64,
    /// Half-width of the batch-means 95% confidence interval on the wait.
    pub ci95_wait: f64,
    /// Time-averaged number of tasks in the system.
    pub mean_in_system: f64,
    /// Tasks that contributed to the statistics.
    pub tasks_observed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum QueueError {
    /// Total arrival rate reaches the node's service rate.
    Unstable { rate: f64, mu: f64 },
    /// Horizon must exceed the warmup.
    BadHorizon { horizon: usize, warmup: usize },
}

impl fmt::Display for QueueError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QueueError::Unstable { rate, mu } => {
                write!(f, "arrival rate {rate} reaches service rate {mu}")
            }
            QueueError::BadHorizon { horizon, warmup } => {
                write!(f, "horizon {horizon} must exceed warmup {warmup}")
            }
        }
    }
}

impl core::error::Error for QueueError {}

/// Mean queueing delay of an M/G/1 node at total arrival rate `total_rate`:
/// `rate * m2 / (2 * (1 - rate * mean))`. This is the per-task form of the
/// cost model's waiting occupancy.
pub fn pk_mean_wait(total_rate: f64, service: &ServiceDistribution) -> Result<f64, CostError> {
    let load = total_rate * service.mean;
    if load >= 1.0 - STABILITY_EPSILON {
        return Err(CostError::UnstableNode { node: 0, load });
    }
    Ok(total_rate * service.second_moment / (2.0 * (1.0 - load)))
}

/// Batches for the confidence interval.
const BATCHES: usize = 32;

/// Two-sided 97.5% Student-t quantile at 31 degrees of freedom.
const T_975_DF31: f64 = 2.0395;

#[derive(Debug, PartialEq)]
enum Event {
    Arrival { time: f64 },
    Departure { time: f64 },
}

impl Event {
    fn time(&self) -> f64 {
        match self {
            Event::Arrival { time } | Event::Departure { time } => *time,
        }
    }

    /// Arrivals sort before departures at equal times.
    fn tie_rank(&self) -> u8 {
        match self {
            Event::Arrival { .. } => 0,
            Event::Departure { .. } => 1,
        }
    }
}

impl Eq for Event {}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap, we want earliest-first.
        other
            .time()
            .total_cmp(&self.time())
            .then_with(|| other.tie_rank().cmp(&self.tie_rank()))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Run one FIFO single-server simulation.
pub fn simulate_node(cfg: &DesConfig) -> Result<DesStats, QueueError> {
    let rate = cfg.total_rate();
    let mu = cfg.node.mu;
    if !(rate < mu * (1.0 - STABILITY_EPSILON)) {
        return Err(QueueError::Unstable { rate, mu });
    }
    if cfg.horizon == 0 || cfg.horizon <= cfg.warmup {
        return Err(QueueError::BadHorizon { horizon: cfg.horizon, warmup: cfg.warmup });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut events: BinaryHeap<Event> = BinaryHeap::new();
    let mut queue: VecDeque<f64> = VecDeque::new(); // arrival times of waiting tasks
    let mut server_busy = false;
    let mut service_start_of_current = 0.0;
    let mut current_arrival = 0.0;

    let mut arrivals_spawned = 1usize;
    let mut completed = 0usize;

    // Post-warmup accumulators.
    let mut waits: Vec<f64> = Vec::with_capacity(cfg.horizon - cfg.warmup);
    let mut sum_service = 0.0;
    let mut sum_sojourn = 0.0;
    let mut busy_time = 0.0;
    let mut area_in_system = 0.0;
    let mut in_system = 0usize;
    let mut measure_start = -1.0;
    let mut last_time = 0.0;

    let interarrival = |rng: &mut ChaCha8Rng| -> f64 {
        let u: f64 = rng.random();
        crate::distributions::exponential_sample(rate, u)
    };

    let first = interarrival(&mut rng);
    events.push(Event::Arrival { time: first });

    while let Some(event) = events.pop() {
        let now = event.time();
        let measuring = measure_start >= 0.0;
        if measuring {
            area_in_system += in_system as f64 * (now - last_time);
            if server_busy {
                busy_time += now - last_time;
            }
            last_time = now;
        }

        match event {
            Event::Arrival { time } => {
                in_system += 1;
                if server_busy {
                    queue.push_back(time);
                } else {
                    server_busy = true;
                    current_arrival = time;
                    service_start_of_current = time;
                    let u: f64 = rng.random();
                    let s = cfg.node.service.sample(u);
                    events.push(Event::Departure { time: time + s });
                }
                if arrivals_spawned < cfg.horizon {
                    arrivals_spawned += 1;
                    events.push(Event::Arrival { time: time + interarrival(&mut rng) });
                }
            }
            Event::Departure { time } => {
                in_system -= 1;
                completed += 1;
                if completed == cfg.warmup {
                    // Statistics start here.
                    measure_start = time;
                    last_time = time;
                    area_in_system = 0.0;
                    busy_time = 0.0;
                } else if completed > cfg.warmup {
                    let wait = service_start_of_current - current_arrival;
                    waits.push(wait);
                    sum_sojourn += time - current_arrival;
                    sum_service += time - service_start_of_current;
                }
                if let Some(arrival) = queue.pop_front() {
                    current_arrival = arrival;
                    service_start_of_current = time;
                    let u: f64 = rng.random();
                    let s = cfg.node.service.sample(u);
                    events.push(Event::Departure { time: time + s });
                } else {
                    server_busy = false;
                }
            }
        }

        if completed == cfg.horizon {
            break;
        }
    }

    let observed = waits.len();
    let span = last_time - measure_start;
    let n = observed.max(1) as f64;
    let mean_wait = waits.iter().sum::<f64>() / n;

    // Batch means over the observed waits.
    let ci95_wait = if observed >= BATCHES * 2 {
        let batch_len = observed / BATCHES;
        let mut means = [0.0; BATCHES];
        for (b, mean) in means.iter_mut().enumerate() {
            let chunk = &waits[b * batch_len..(b + 1) * batch_len];
            *mean = chunk.iter().sum::<f64>() / batch_len as f64;
        }
        let grand = means.iter().sum::<f64>() / BATCHES as f64;
        let var = means.iter().map(|m| (m - grand) * (m - grand)).sum::<f64>()
            / (BATCHES as f64 - 1.0);
        T_975_DF31 * crate::math::sqrt(var / BATCHES as f64)
    } else {
        f64::INFINITY
    };

    Ok(DesStats {
        mean_wait,
        mean_service: sum_service / n,
        mean_sojourn: sum_sojourn / n,
        utilization: if span > 0.0 { busy_time / span } else { 0.0 },
        ci95_wait,
        mean_in_system: if span > 0.0 { area_in_system / span } else { 0.0 },
        tasks_observed: observed,
    })
}

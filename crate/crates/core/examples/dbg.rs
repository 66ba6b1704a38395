use gridslice_core::equilibrium::SolveOptions;
use gridslice_core::experiments::run_load_sweep;
use gridslice_core::scenarios;

fn main() {
    let loads: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
    for threshold in [1e-4, 1e-7, 1e-10] {
        println!("== threshold {threshold:e} ==");
        let opts = SolveOptions { threshold, ..Default::default() };
        let runs =
            run_load_sweep("baseline", &scenarios::baseline_grid(), &loads, &opts).unwrap();
        let mut prev = f64::INFINITY;
        for (run, &load) in runs.iter().zip(&loads) {
            let fi = run.game.fairness;
            println!(
                "load {:.1}: game_fi {:.12} (1-fi {:.3e}) noninc={} avg_fi={:?} iters={}",
                load,
                fi,
                1.0 - fi,
                fi <= prev + 1e-12,
                run.average.fairness,
                run.game.iterations,
            );
            prev = fi;
        }
        // Exactness of the average scheme FI.
        for run in &runs {
            if run.average.feasible && run.average.fairness != 1.0 {
                println!("  avg FI not exactly 1.0 at load {}", run.average.load);
            }
        }
    }

    // Spread of per-scheduler costs at tight threshold.
    let opts = SolveOptions { threshold: 1e-10, ..Default::default() };
    let runs = run_load_sweep("baseline", &scenarios::baseline_grid(), &loads, &opts).unwrap();
    for (run, &load) in runs.iter().zip(&loads) {
        let costs: Vec<f64> =
            run.game.per_scheduler.iter().map(|s| s.per_task_power).collect();
        let min = costs.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = costs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        println!("load {:.1}: cost spread rel {:.3e}", load, (max - min) / min);
    }
}

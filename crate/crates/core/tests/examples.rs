#[allow(dead_code)]
#[path = "../examples/basis_tables.rs"]
mod basis_tables;
#[allow(dead_code)]
#[path = "../examples/empirical_increments.rs"]
mod empirical_increments;
#[allow(dead_code)]
#[path = "../examples/fit_estimator.rs"]
mod fit_estimator;
#[allow(dead_code)]
#[path = "../examples/limit_sets.rs"]
mod limit_sets;
#[allow(dead_code)]
#[path = "../examples/projection_kernel.rs"]
mod projection_kernel;
#[allow(dead_code)]
#[path = "../examples/resolution_schedules.rs"]
mod resolution_schedules;
#[allow(dead_code)]
#[path = "../examples/theorem1_monte_carlo.rs"]
mod theorem1_monte_carlo;
#[allow(dead_code)]
#[path = "../examples/theorem2_monte_carlo.rs"]
mod theorem2_monte_carlo;

#[test]
fn basis_tables_runs() {
    basis_tables::run().unwrap();
}

#[test]
fn projection_kernel_runs() {
    projection_kernel::run().unwrap();
}

#[test]
fn fit_estimator_runs() {
    fit_estimator::run().unwrap();
}

#[test]
fn empirical_increments_runs() {
    empirical_increments::run().unwrap();
}

#[test]
fn limit_sets_runs() {
    limit_sets::run().unwrap();
}

#[test]
fn resolution_schedules_runs() {
    resolution_schedules::run().unwrap();
}

#[test]
fn theorem1_small_run() {
    theorem1_monte_carlo::run(None).unwrap();
}

#[test]
fn theorem2_small_run() {
    theorem2_monte_carlo::run(None).unwrap();
}

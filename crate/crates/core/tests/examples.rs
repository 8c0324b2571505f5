#[path = "../examples/alpha_beta.rs"]
mod alpha_beta;
#[path = "../examples/cli_in_process.rs"]
mod cli_in_process;
#[path = "../examples/formulas.rs"]
mod formulas;
#[path = "../examples/hamiltonian.rs"]
mod hamiltonian;
#[path = "../examples/phase_estimation.rs"]
mod phase_estimation;
#[path = "../examples/rebalance.rs"]
mod rebalance;
#[path = "../examples/spectral_checks.rs"]
mod spectral_checks;
#[path = "../examples/szegedy_walk.rs"]
mod szegedy_walk;

#[test]
fn every_example_runs() {
    alpha_beta::run_example().unwrap();
    cli_in_process::run_example().unwrap();
    formulas::run_example().unwrap();
    hamiltonian::run_example().unwrap();
    phase_estimation::run_example().unwrap();
    rebalance::run_example().unwrap();
    spectral_checks::run_example().unwrap();
    szegedy_walk::run_example().unwrap();
}

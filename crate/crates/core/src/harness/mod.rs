//! Scenario files, the command line, and trajectory/report export.

mod cli;
mod report;
mod scenario;

pub use cli::{exit_code, init_logging, run_cli, EXIT_FAILURE, EXIT_NO_CONVERGENCE, EXIT_OK, EXIT_USAGE, LOG_ENV};
pub use report::{
    convergence_fit, linear_fit, run_scenario, write_trajectory_csv, CertificateSummary, Overrides,
    RunReport, ScenarioOutcome, ORACLE_TOL, RATE_FIT_WINDOW, REFERENCE_TOL, REPORT_FILE, TRAJECTORY_FILE,
};
pub use scenario::{
    builtin_scenario, load_scenario, AgentRef, AlgorithmSpec, ObjectiveSpec, ResourceSpec, Scenario,
    StepKeyword, StepSpec, TopologySpec, BUILTIN_NAMES, CASE1_JSON, CASE2_JSON, SCHEMA_VERSION,
};

//! Diamond-geometry experiments: geometry and source construction, initial
//! data, scenario configuration and batch execution.

pub mod continuum;
pub mod geometry;
pub mod init;
pub mod scenario;

pub use continuum::{
    bridge_studies, run_pde_scenario, write_bridge_report, BridgeReport, FieldInit, GridSection,
    PdeReport, PdeScenario, SourceSpec,
};
pub use geometry::{
    build_sources, generate_diamond, in_domain, Preset, DOMAIN_LOWER, DOMAIN_UPPER,
};
pub use init::{init_conductivities, spanning_tree, tree_from_pairs, InitSpec};
pub use scenario::{
    assign_output_dirs, execute_scenario, plot_data, run_scenario, sweep, write_artifacts,
    Classification, DynamicsSection, EnergySection, GeometrySpec, Report, ScenarioConfig,
    ScenarioRun, SweepConfig, TrajectorySummary,
};

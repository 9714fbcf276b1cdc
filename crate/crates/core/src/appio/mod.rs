//! Configuration, data tables, output files and config-level drivers.

pub mod config;
pub mod driver;
pub mod output;
pub mod tables;

pub use config::{
    config_to_string, load_config, parse_config, BoundaryConfig, CheckConfig, ConfigError,
    Forcing, LayerConfig, MaterialConfig, MeshConfig, MmsConfig, ModelKind, OutputConfig,
    RunConfig, TimeConfig,
};
pub use driver::{
    analyze_config_corners, check_materials, mesh_info, prepare, run_config, verify_config,
    AppError, MaterialCheck, MeshInfo, RunSummary, Setup,
};
pub use output::{
    write_convergence_report, write_probe_csv, write_step_report, write_vtk, write_vtk_to,
    ProbeSeries,
};
pub use tables::{load_climate_csv, load_curve_csv, load_surface_csv, TableError};

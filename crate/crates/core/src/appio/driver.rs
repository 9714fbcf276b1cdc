//! Config-level entry points used by the command-line tool.

use std::path::{Path, PathBuf};

use thiserror::Error;

use super::config::{ConfigError, Forcing, RunConfig};
use super::output::{
    write_convergence_report, write_probe_csv, write_step_report, write_vtk, ProbeSeries,
};
use super::tables::{load_climate_csv, TableError};
use crate::assembly::{BoundaryDrive, Field, LayerSource, SegmentDrive, TimeSeries};
use crate::domain::{
    admissibility_report, build_domain, triangulate, AdmissibilityReport, DomainError, LayerRect,
    LayeredDomain, Mesh,
};
use crate::linsolve::SolveOptions;
use crate::materials::{
    check_linear_conditions, check_structure_conditions, state_grid, LinearConditionReport,
    Material, MaterialError, MaterialModel, StateSample, StructureReport,
};
use crate::pencil::{analyze_corners, CornerVerdict, PencilError};
use crate::stepper::mms::MmsError;
use crate::stepper::{
    initial_mismatch, mms_verify, run, ConvergenceTable, MmsCase, Problem, RunOptions, StepError,
    StepOptions, Stepper, Trajectory,
};
use crate::Exec;

#[derive(Debug, Error)]
pub enum AppError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Step(#[from] StepError),
    #[error(transparent)]
    Mms(#[from] MmsError),
    #[error(transparent)]
    Pencil(#[from] PencilError),
    #[error("layer {layer}: {source}")]
    Material {
        layer: String,
        source: MaterialError,
    },
    #[error("{what} needs {section}")]
    Missing {
        what: &'static str,
        section: &'static str,
    },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> AppError + '_ {
    move |source| AppError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Everything a simulation needs, built from a config.
#[derive(Debug)]
pub struct Setup {
    pub domain: LayeredDomain,
    pub mesh: Mesh,
    /// Material of each layer.
    pub materials: Vec<Material>,
    pub drive: BoundaryDrive,
    pub source: LayerSource,
    pub initial: Field,
}

pub fn build_layers(cfg: &RunConfig) -> Result<LayeredDomain, AppError> {
    let rects = cfg
        .layers
        .iter()
        .map(|l| LayerRect::new(l.rect[0], l.rect[1], l.rect[2], l.rect[3], l.material.clone()))
        .collect();
    Ok(build_domain(rects)?)
}

pub fn build_mesh(cfg: &RunConfig) -> Result<(LayeredDomain, Mesh), AppError> {
    let mesh_cfg = cfg.mesh.as_ref().ok_or(AppError::Missing {
        what: "meshing",
        section: "[mesh]",
    })?;
    let domain = build_layers(cfg)?;
    let mesh = triangulate(&domain, mesh_cfg.h_target)?;
    Ok((domain, mesh))
}

pub fn layer_materials(cfg: &RunConfig) -> Result<Vec<Material>, AppError> {
    cfg.layers
        .iter()
        .map(|l| {
            let m = cfg.material(&l.material).ok_or_else(|| {
                ConfigError::Validation {
                    key: format!("layer.{}.material", l.name),
                    message: format!("no [material.{}] section", l.material),
                }
            })?;
            Ok(m.build(cfg)?)
        })
        .collect()
}

pub fn prepare(cfg: &RunConfig) -> Result<Setup, AppError> {
    let (domain, mesh) = build_mesh(cfg)?;
    let materials = layer_materials(cfg)?;
    let mut segments = Vec::with_capacity(domain.exterior.len());
    for seg in &domain.exterior {
        let drive = match cfg.boundary(seg.side) {
            Some(b) => SegmentDrive {
                alpha: b.alpha.unwrap_or_else(|| materials[seg.layer].alpha()),
                sigma: match &b.forcing {
                    Forcing::Climate(p) => load_climate_csv(&cfg.resolve(p))?,
                    Forcing::Constant(v) => TimeSeries::constant(*v),
                },
            },
            None => SegmentDrive {
                alpha: [0.0, 0.0],
                sigma: TimeSeries::constant([0.0, 0.0]),
            },
        };
        segments.push(drive);
    }
    let source = LayerSource(cfg.layers.iter().map(|l| l.source).collect());
    let initial = Field::from_fn(&mesh, |p, _| cfg.layers[mesh.node_layer[p]].initial);
    Ok(Setup {
        domain,
        mesh,
        materials,
        drive: BoundaryDrive { segments },
        source,
        initial,
    })
}

pub fn step_options(cfg: &RunConfig, exec: Exec) -> StepOptions {
    let mut opts = StepOptions {
        solve: SolveOptions {
            exec,
            ..Default::default()
        },
        ..Default::default()
    };
    if let Some(t) = &cfg.time {
        opts.eps_fp = t.eps_fp;
        opts.k_max = t.k_max;
        opts.solve.tol = t.solver_tol;
        opts.solve.max_iter = t.solver_max_iter;
    }
    opts
}

/// Stepper over a prepared setup.
pub fn make_stepper<'a>(setup: &'a Setup, opts: StepOptions) -> Stepper<'a> {
    let stepper = Stepper::new(
        Problem {
            mesh: &setup.mesh,
            materials: setup.materials.iter().map(|m| m as &dyn MaterialModel).collect(),
            drive: &setup.drive,
            source: &setup.source,
        },
        opts,
    );
    let linear: Option<Vec<_>> = setup.materials.iter().map(|m| m.as_linear().copied()).collect();
    match linear {
        Some(p) => stepper.with_linear_params(p),
        None => stepper,
    }
}

#[derive(Debug)]
pub struct RunSummary {
    pub trajectory: Trajectory,
    pub output_dir: PathBuf,
    pub files: Vec<PathBuf>,
}

/// Runs the configured simulation and writes snapshots, probes and the
/// per-step report to the output directory.
pub fn run_config(cfg: &RunConfig, exec: Exec) -> Result<RunSummary, AppError> {
    let time = cfg.time.as_ref().ok_or(AppError::Missing {
        what: "run",
        section: "[time]",
    })?;
    let setup = prepare(cfg)?;
    let mismatch = initial_mismatch(&setup.mesh, &setup.initial, &setup.drive);
    if mismatch.iter().any(|&d| d > 0.0) {
        log::warn!(
            "initial field differs from boundary data at t = 0 (max |u - sigma| = {:.3e}, {:.3e}); proceeding",
            mismatch[0],
            mismatch[1]
        );
    }
    let stepper = make_stepper(&setup, step_options(cfg, exec));
    let probes: Vec<usize> = cfg.output.probes.iter().map(|&p| setup.mesh.nearest_node(p)).collect();
    let trajectory = run(
        &stepper,
        setup.initial.clone(),
        &RunOptions {
            h_t: time.h_t,
            t_end: time.t_end,
            strategy: time.strategy,
            snapshot_times: cfg.output.snapshots.clone(),
            probes: probes.clone(),
        },
    )?;

    let dir = cfg.resolve(&cfg.output.dir);
    std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let mut files = Vec::new();
    if cfg.output.vtk {
        for s in &trajectory.snapshots {
            let p = dir.join(format!("snapshot_{:06}.vtk", s.n));
            write_vtk(&setup.mesh, &s.field, &p).map_err(io_err(&p))?;
            files.push(p);
        }
    }
    let series = ProbeSeries {
        names: probes
            .iter()
            .enumerate()
            .map(|(k, node)| format!("probe{k}_node{node}"))
            .collect(),
        times: trajectory.probe_times.clone(),
        values: trajectory.probe_values.clone(),
    };
    let p = dir.join("probes.csv");
    write_probe_csv(&series, &p).map_err(io_err(&p))?;
    files.push(p);
    let p = dir.join("steps.csv");
    write_step_report(&trajectory.probe_times[1..], &trajectory.reports, &p).map_err(io_err(&p))?;
    files.push(p);
    Ok(RunSummary {
        trajectory,
        output_dir: dir,
        files,
    })
}

pub fn mms_case(name: &str) -> Option<MmsCase> {
    Some(match name {
        "constant" => MmsCase::constant([1.5, 0.5]),
        "linear_x" => MmsCase::linear_x(),
        "two_layer_spatial" => MmsCase::two_layer_spatial(),
        "two_layer_temporal" => MmsCase::two_layer_temporal(),
        _ => return None,
    })
}

/// Runs the configured manufactured-solution study and writes
/// `convergence.csv`.
pub fn verify_config(cfg: &RunConfig, exec: Exec) -> Result<(ConvergenceTable, PathBuf), AppError> {
    let m = cfg.mms.as_ref().ok_or(AppError::Missing {
        what: "verify-mms",
        section: "[mms]",
    })?;
    let case = mms_case(&m.case).ok_or_else(|| ConfigError::Validation {
        key: "mms.case".into(),
        message: format!("unknown case '{}'", m.case),
    })?;
    let ht_list = if m.ht_list.is_empty() {
        vec![case.t_end / 32.0]
    } else {
        m.ht_list.clone()
    };
    let table = mms_verify(&case, &m.h_list, &ht_list, exec)?;
    let dir = cfg.resolve(&cfg.output.dir);
    std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let p = dir.join("convergence.csv");
    write_convergence_report(&table, &p).map_err(io_err(&p))?;
    Ok((table, p))
}

#[derive(Debug)]
pub struct MaterialCheck {
    pub name: String,
    pub kind: &'static str,
    pub structure: StructureReport,
    pub linear: Option<LinearConditionReport>,
}

/// Structure conditions of every configured material on the check grid.
pub fn check_materials(cfg: &RunConfig) -> Result<Vec<MaterialCheck>, AppError> {
    let theta = cfg.check.theta.unwrap_or([273.0, 313.0]);
    let m = cfg.check.m.unwrap_or([0.05, 0.95]);
    let grid = state_grid(theta, m, cfg.check.n, cfg.check.n);
    cfg.materials
        .iter()
        .map(|mc| {
            let mat = mc.build(cfg)?;
            Ok(MaterialCheck {
                name: mc.name.clone(),
                kind: mat.kind(),
                structure: check_structure_conditions(&mat, &grid),
                linear: mat.as_linear().map(check_linear_conditions),
            })
        })
        .collect()
}

/// Corner verdicts with conductivities frozen at each layer's initial state.
pub fn analyze_config_corners(cfg: &RunConfig) -> Result<Vec<CornerVerdict>, AppError> {
    let domain = build_layers(cfg)?;
    let materials = layer_materials(cfg)?;
    let mut eps = Vec::with_capacity(materials.len());
    for (l, (mat, lc)) in materials.iter().zip(&cfg.layers).enumerate() {
        let (s, _) = mat.bounds().clamp(StateSample::from_array(lc.initial));
        let c = mat.evaluate(s).map_err(|source| AppError::Material {
            layer: cfg.layers[l].name.clone(),
            source,
        })?;
        eps.push(c.a);
    }
    Ok(analyze_corners(&domain.boundary_corners(), |l| eps[l])?)
}

#[derive(Debug)]
pub struct MeshInfo {
    pub domain: LayeredDomain,
    pub admissibility: AdmissibilityReport,
    pub nodes: usize,
    pub triangles: usize,
    pub h_mesh: f64,
    pub exterior_edges: usize,
    pub interface_edges: usize,
}

pub fn mesh_info(cfg: &RunConfig) -> Result<MeshInfo, AppError> {
    let (domain, mesh) = build_mesh(cfg)?;
    Ok(MeshInfo {
        admissibility: admissibility_report(&domain),
        nodes: mesh.node_count(),
        triangles: mesh.triangles.len(),
        h_mesh: mesh.h_mesh,
        exterior_edges: mesh.exterior_edges.len(),
        interface_edges: mesh.interface_edges.len(),
        domain,
    })
}

impl std::fmt::Display for MeshInfo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "layers: {}", self.domain.layers.len())?;
        for (i, l) in self.domain.layers.iter().enumerate() {
            writeln!(
                f,
                "  {i}: [{}, {}] x [{}, {}] material {}",
                l.x0, l.x1, l.y0, l.y1, l.material
            )?;
        }
        writeln!(f, "interface segments: {}", self.domain.interfaces.len())?;
        writeln!(f, "exterior segments: {}", self.domain.exterior.len())?;
        writeln!(f, "nodes: {}", self.nodes)?;
        writeln!(f, "triangles: {}", self.triangles)?;
        writeln!(f, "h_mesh: {}", self.h_mesh)?;
        writeln!(f, "exterior edges: {}", self.exterior_edges)?;
        writeln!(f, "interface edges: {}", self.interface_edges)?;
        write!(f, "{}", self.admissibility)
    }
}

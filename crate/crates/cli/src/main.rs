use std::path::PathBuf;

#[cfg(feature = "parallel")]
use anyhow::Context;
use anyhow::Result;
use clap::{Parser, Subcommand};

use hygrotherm::appio::{self, load_config};
use hygrotherm::Exec;

#[derive(Parser)]
#[command(name = "hygrotherm", version, about = "Coupled heat and moisture transport in layered walls")]
struct Cli {
    /// Worker threads; 1 runs everything sequentially.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    /// error, warn, info, debug or trace.
    #[arg(long, global = true, default_value = "info")]
    log_level: log::LevelFilter,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time-march the configured wall and write snapshots and probes.
    Run { config: PathBuf },
    /// Manufactured-solution convergence study.
    VerifyMms { config: PathBuf },
    /// Structure conditions of every material on the check grid.
    CheckMaterials { config: PathBuf },
    /// Corner regularity verdicts of the layered domain.
    AnalyzeCorner { config: PathBuf },
    /// Mesh statistics and domain admissibility.
    MeshInfo { config: PathBuf },
}

fn exec_for(threads: usize) -> Result<Exec> {
    if threads > 1 {
        #[cfg(feature = "parallel")]
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("cannot start the thread pool")?;
        #[cfg(not(feature = "parallel"))]
        {
            log::warn!("built without parallel support; running sequentially");
            return Ok(Exec::Sequential);
        }
    }
    Ok(Exec::from_threads(threads))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(cli.log_level)
        .format_timestamp(None)
        .init();
    let exec = exec_for(cli.threads)?;

    match cli.command {
        Command::Run { config } => {
            let cfg = load_config(&config)?;
            let summary = appio::run_config(&cfg, exec)?;
            let traj = &summary.trajectory;
            let max_picard = traj.reports.iter().map(|r| r.picard_iters).max().unwrap_or(0);
            println!("steps: {}", traj.reports.len());
            println!("final time: {}", traj.probe_times.last().copied().unwrap_or(0.0));
            println!("max picard iterations: {max_picard}");
            println!("output: {}", summary.output_dir.display());
            for f in &summary.files {
                log::debug!("wrote {}", f.display());
            }
        }
        Command::VerifyMms { config } => {
            let cfg = load_config(&config)?;
            let (table, path) = appio::verify_config(&cfg, exec)?;
            print!("{table}");
            println!("report: {}", path.display());
        }
        Command::CheckMaterials { config } => {
            let cfg = load_config(&config)?;
            let mut all_pass = true;
            for check in appio::check_materials(&cfg)? {
                println!("material {} ({})", check.name, check.kind);
                print!("{}", check.structure);
                if let Some(lin) = &check.linear {
                    print!("{lin}");
                }
                all_pass &= check.structure.all_pass();
            }
            if !all_pass {
                println!("some conditions fail; see above");
            }
        }
        Command::AnalyzeCorner { config } => {
            let cfg = load_config(&config)?;
            for v in appio::analyze_config_corners(&cfg)? {
                println!("{v}");
            }
        }
        Command::MeshInfo { config } => {
            let cfg = load_config(&config)?;
            print!("{}", appio::mesh_info(&cfg)?);
        }
    }
    Ok(())
}

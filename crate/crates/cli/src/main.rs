use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use mshdg::harness::{run_convergence, write_solution_vtk, ErrorReport, Study, StudyConfig};
use mshdg::homogenization::homogenized_tensor;
use mshdg::mesh::{build_structured_with, validate, Rect};
use mshdg::Error;

#[derive(Parser)]
#[command(name = "mshdg", version, about = "Two-level HDG solver for heterogeneous elliptic problems")]
struct Cli {
    /// Only print warnings and errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Study configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the configured one.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one level and write the solution and its error report.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Level of the mesh lists to solve.
        #[arg(long, default_value_t = 0)]
        level: usize,
        /// Also write u_h as legacy VTK.
        #[arg(long)]
        vtk: bool,
    },
    /// Run every level and write the convergence table as CSV.
    Convergence {
        #[command(flatten)]
        common: Common,
    },
    /// Solve the periodic cell problems and print the effective tensor.
    Cell {
        #[command(flatten)]
        common: Common,
    },
    /// Build the mesh of every level and report violations.
    ValidateMesh {
        #[command(flatten)]
        common: Common,
    },
}

/// Failure classes mapped to exit codes.
enum Failure {
    Validation(anyhow::Error),
    Solver(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidMesh(_) | Error::Nesting { .. } | Error::InvalidArgument(_) => {
                Self::Validation(e.into())
            }
            other => Self::Solver(other.into()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::Solver(e.into())
    }
}

fn load(common: &Common) -> Result<(StudyConfig, PathBuf), Failure> {
    let cfg = StudyConfig::load(&common.config)?;
    let out = common.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    Ok((cfg, out))
}

fn create(path: &Path) -> Result<BufWriter<fs::File>, Failure> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let f = fs::File::create(path).with_context(|| format!("creating {}", path.display())).map_err(Failure::Solver)?;
    Ok(BufWriter::new(f))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Failure::Solver(e.into()))?;
    w.flush()?;
    Ok(())
}

fn solve(common: &Common, level: usize, vtk: bool, quiet: bool) -> Result<bool, Failure> {
    let (cfg, out) = load(common)?;
    let write_vtk = vtk || cfg.output.vtk;
    let mut study = Study::new(cfg)?.with_cache_dir(out.join("cache"));
    study.validate_meshes()?;
    let run = study.solve_level(level)?;
    let report = ErrorReport::new(run.norms, &run.report);
    write_json(&out.join("solution.json"), &run.report.solution)?;
    write_json(&out.join("errors.json"), &report)?;
    if write_vtk {
        let mut w = create(&out.join("solution.vtk"))?;
        write_solution_vtk(&run.mesh, &run.report.solution, &mut w)?;
        w.flush()?;
    }
    let d = run.report.diagnostics;
    if !quiet {
        let s = run.mesh.scales;
        println!("level {level}: L = {:.6e}, H = {:.6e}, h = {:.6e}, tau = {:.6e}", s.big_l, s.big_h, s.h, run.tau);
        println!("coarse dimension {}, iterations {}", run.report.coarse_dim, run.report.iterations);
        if let Some(n) = run.norms {
            println!("err_q_alpha {:.6e}  err_q_l2 {:.6e}  err_u_l2 {:.6e}", n.q_alpha, n.q_l2, n.u_l2);
        }
        println!("jump_max {:.3e}  cons_max {:.3e}", d.jump_max, d.cons_max);
    }
    Ok(d.jump_ok() && d.cons_ok())
}

fn convergence(common: &Common, quiet: bool) -> Result<bool, Failure> {
    let (cfg, out) = load(common)?;
    let csv = out.join(&cfg.output.csv);
    let mut study = Study::new(cfg)?.with_cache_dir(out.join("cache"));
    let result = run_convergence(&mut study)?;
    result.write_csv(&csv)?;
    if !quiet {
        print!("{}", result.to_csv());
        println!("wrote {}", csv.display());
    }
    for row in &result.rows {
        if let mshdg::harness::RowStatus::SolverFailed(msg) = &row.status {
            eprintln!("level {} FAIL: {msg}", row.level);
        } else if row.status != mshdg::harness::RowStatus::Ok {
            eprintln!("level {} FAIL: flux diagnostics above tolerance", row.level);
        }
    }
    Ok(result.passed())
}

fn cell(common: &Common, quiet: bool) -> Result<bool, Failure> {
    let (cfg, out) = load(common)?;
    let mut study = Study::new(cfg)?;
    let cell = study.cell_solution()?;
    let a = homogenized_tensor(&cell);
    let mut w = create(&out.join("chi.csv"))?;
    cell.write_chi_csv(&mut w)?;
    w.flush()?;
    if !quiet {
        // Round-off below the printed precision would show as "-0.000000".
        let f = |v: f64| format!("{:.6}", if v.abs() < 5e-7 { 0.0 } else { v });
        println!("alpha0 = [[{}, {}], [{}, {}]]", f(a[0][0]), f(a[0][1]), f(a[1][0]), f(a[1][1]));
        println!("arithmetic mean {:.6}, harmonic mean {:.6}", cell.arithmetic_mean, cell.harmonic_mean);
        println!("wrote {}", out.join("chi.csv").display());
    }
    Ok(true)
}

fn validate_mesh(common: &Common, quiet: bool) -> Result<bool, Failure> {
    let (cfg, _) = load(common)?;
    let mut valid = true;
    for (i, p) in cfg.levels().into_iter().enumerate() {
        match build_structured_with(Rect::UNIT, p.n_sub, p.n_seg, &[p.n_fine], cfg.mesh.diagonal) {
            Ok(mesh) => {
                let violations = validate(&mesh);
                if !quiet {
                    println!(
                        "level {i}: {} subdomains, {} elements, {} skeleton segments, {} violations",
                        mesh.subdomains.len(),
                        mesh.n_elements(),
                        mesh.skeleton_segments.len(),
                        violations.len()
                    );
                }
                for v in &violations {
                    println!("level {i}: {v}");
                }
                valid &= violations.is_empty();
            }
            Err(e) => {
                println!("level {i}: {e}");
                valid = false;
            }
        }
    }
    if valid {
        Ok(true)
    } else {
        Err(Failure::Validation(anyhow::anyhow!("mesh validation failed")))
    }
}

fn configure_threads() {
    let Ok(v) = std::env::var("MSHDG_THREADS") else {
        return;
    };
    match v.trim().parse::<usize>() {
        Ok(n) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("MSHDG_THREADS ignored: {e}");
            }
        }
        Err(_) => log::warn!("MSHDG_THREADS = '{v}' is not a thread count"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    configure_threads();
    let q = cli.quiet;
    let outcome = match &cli.command {
        Command::Solve { common, level, vtk } => solve(common, *level, *vtk, q),
        Command::Convergence { common } => convergence(common, q),
        Command::Cell { common } => cell(common, q),
        Command::ValidateMesh { common } => validate_mesh(common, q),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(Failure::Validation(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Solver(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

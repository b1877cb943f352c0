use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};

use clap::{Parser, Subcommand, ValueEnum};

use esfem::mesh::{extract_faces, format_mesh, parse_mesh};
use esfem::scenarios::{build_problem, generate_cube_mesh, mean_relative_error, run_problem, MeshKind};
use esfem::verify::{constitutive_suite, patch_suite, tangents_suite, volumes_suite};
use esfem::{Error, Mesh, Method, OutputCurve, ScenarioConfig};

#[derive(Parser)]
#[command(name = "esfem", version, about = "Electromechanical FEM and smoothed FEM benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario and write the curve CSV, VTK snapshots and a timing report.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_parser = parse_method)]
        method: Option<Method>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the time increment [ms].
        #[arg(long)]
        dt: Option<f64>,
        /// Skip the VTK snapshots.
        #[arg(long)]
        no_vtk: bool,
        /// Suppress the per-step progress lines.
        #[arg(long)]
        quiet: bool,
    },
    /// Run every method as a separate process and compare each against HEX.
    RunAll {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        no_vtk: bool,
    },
    /// Print the mean relative error of a curve against a reference curve.
    Compare {
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long)]
        test: PathBuf,
    },
    /// Run one of the self-check suites.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        /// Tet mesh for the volumes and patch suites (default: 5×5×5-node cube, l = 10 mm).
        #[arg(long)]
        mesh: Option<PathBuf>,
    },
    /// Summarise a mesh file.
    MeshInfo {
        #[arg(long)]
        mesh: PathBuf,
    },
    /// Write a structured cube mesh.
    MeshGen {
        #[arg(long, default_value_t = 10.0)]
        length: f64,
        #[arg(long, default_value_t = 6)]
        nodes: usize,
        #[arg(long, value_enum, default_value_t = Kind::Tet)]
        kind: Kind,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Volumes,
    Patch,
    Constitutive,
    Tangents,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Tet,
    Hex,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Numerical(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Run {
            config,
            method,
            out,
            dt,
            no_vtk,
            quiet,
        } => run(&config, method, out, dt, no_vtk, quiet),
        Cmd::RunAll { config, out, no_vtk } => run_all(&config, &out, no_vtk),
        Cmd::Compare { reference, test } => {
            let r = OutputCurve::read(&reference)?;
            let t = OutputCurve::read(&test)?;
            println!("{}", mean_relative_error(&t, &r)?);
            Ok(())
        }
        Cmd::Verify { suite, mesh } => verify(suite, mesh),
        Cmd::MeshInfo { mesh } => mesh_info(&mesh),
        Cmd::MeshGen {
            length,
            nodes,
            kind,
            out,
        } => {
            let kind = match kind {
                Kind::Tet => MeshKind::Tet,
                Kind::Hex => MeshKind::Hex,
            };
            let mesh = generate_cube_mesh(length, nodes, kind)?;
            std::fs::write(&out, format_mesh(&mesh)).map_err(|e| io_err(&out, e))
        }
    }
}

fn run(
    config: &Path,
    method: Option<Method>,
    out: Option<PathBuf>,
    dt: Option<f64>,
    no_vtk: bool,
    quiet: bool,
) -> Result<(), Failure> {
    let mut cfg = ScenarioConfig::from_file(config)?;
    if let Some(m) = method {
        cfg.method = m;
    }
    if let Some(dt) = dt {
        cfg.dt = dt;
    }
    let out = out
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out).map_err(|e| io_err(&out, e))?;
    let vtk_dir = (!no_vtk).then(|| out.join("vtk"));
    if let Some(d) = &vtk_dir {
        std::fs::create_dir_all(d).map_err(|e| io_err(d, e))?;
    }
    let problem = build_problem(&cfg)?;
    let mut progress = |log: &esfem::solver::StepLog| {
        if !quiet {
            println!("{log}");
        }
    };
    let result = run_problem(&problem, vtk_dir, &mut progress)?;
    let csv = out.join("curve.csv");
    result.curve.write(&csv)?;
    let mut report = String::new();
    let _ = writeln!(report, "method = {}", cfg.method);
    let _ = writeln!(report, "scenario = {:?}", cfg.scenario);
    let _ = writeln!(report, "nodes = {}", problem.disc.num_nodes());
    let _ = writeln!(report, "elements = {}", problem.disc.mesh().num_elements());
    let _ = writeln!(report, "increments = {}", result.logs.len());
    let _ = writeln!(report, "newton_iterations = {}", result.total_iterations());
    let _ = writeln!(report, "wall_time_s = {:.3}", result.wall_time.as_secs_f64());
    let timing = out.join("timing.txt");
    std::fs::write(&timing, &report).map_err(|e| io_err(&timing, e))?;
    if !quiet {
        print!("{report}");
    }
    Ok(())
}

fn run_all(config: &Path, out: &Path, no_vtk: bool) -> Result<(), Failure> {
    ScenarioConfig::from_file(config)?;
    let exe = std::env::current_exe().map_err(|e| Failure::Usage(e.to_string()))?;
    let children: Vec<_> = Method::ALL
        .iter()
        .map(|m| {
            let dir = out.join(m.name());
            let mut cmd = Command::new(&exe);
            cmd.arg("run")
                .arg("--config")
                .arg(config)
                .arg("--method")
                .arg(m.name())
                .arg("--out")
                .arg(&dir)
                .arg("--quiet");
            if no_vtk {
                cmd.arg("--no-vtk");
            }
            cmd.spawn().map(|c| (*m, c)).map_err(|e| Failure::Usage(e.to_string()))
        })
        .collect::<Result<_, _>>()?;
    let mut failed = Vec::new();
    for (m, mut child) in children {
        let status = child.wait().map_err(|e| Failure::Usage(e.to_string()))?;
        if !status.success() {
            failed.push(m.name());
        }
    }
    if !failed.is_empty() {
        return Err(Failure::Numerical(format!("methods failed: {}", failed.join(", "))));
    }
    let reference = OutputCurve::read(&out.join("hex").join("curve.csv"))?;
    println!("method,e_r_vs_hex,peak_mm");
    for m in Method::ALL {
        let c = OutputCurve::read(&out.join(m.name()).join("curve.csv"))?;
        let peak = c.peak().map_or(0.0, |p| p.1);
        println!("{},{},{peak}", m.name(), mean_relative_error(&c, &reference)?);
    }
    Ok(())
}

fn default_cube() -> Result<esfem::TetMesh, Failure> {
    Ok(esfem::scenarios::cube_tet_mesh(10.0, 5)?)
}

fn load_tet(path: Option<PathBuf>) -> Result<esfem::TetMesh, Failure> {
    match path {
        None => default_cube(),
        Some(p) => {
            let text = std::fs::read_to_string(&p).map_err(|e| io_err(&p, e))?;
            match parse_mesh(&text).map_err(Error::from)? {
                Mesh::Tet(t) => Ok(t),
                Mesh::Hex(_) => Err(Failure::Usage("this suite needs a tet mesh".into())),
            }
        }
    }
}

fn verify(suite: Suite, mesh: Option<PathBuf>) -> Result<(), Failure> {
    let report = match suite {
        Suite::Volumes => volumes_suite(&load_tet(mesh)?)?,
        Suite::Patch => patch_suite(&load_tet(mesh)?, 1)?,
        Suite::Constitutive => constitutive_suite(100, 1)?,
        Suite::Tangents => tangents_suite(5, 1)?,
    };
    print!("{report}");
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Numerical(format!("suite {} failed", report.suite)))
    }
}

fn mesh_info(path: &Path) -> Result<(), Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mesh = parse_mesh(&text).map_err(Error::from)?;
    println!("kind = {}", mesh.kind_name());
    println!("nodes = {}", mesh.nodes().len());
    println!("elements = {}", mesh.num_elements());
    println!("volume = {}", mesh.total_volume());
    let (lo, hi) = mesh.bounds();
    println!("bounds = [{}, {}, {}] .. [{}, {}, {}]", lo.x, lo.y, lo.z, hi.x, hi.y, hi.z);
    if let Mesh::Tet(t) = &mesh {
        let faces = extract_faces(t).map_err(Error::from)?;
        let interior = faces.iter().filter(|(_, e)| e.len() == 2).count();
        println!("faces = {} ({} interior, {} boundary)", faces.len(), interior, faces.len() - interior);
        println!("node_domains = {}", t.num_nodes());
    }
    for (name, ids) in mesh.node_sets() {
        println!("set {name} = {} nodes", ids.len());
    }
    Ok(())
}

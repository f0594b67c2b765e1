//! Command-line driver for the demo applications and the scaling harness.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use iga::assembly::Partition;
use iga::demos::{
    self, CahnHilliardProblem, ChemicalPotential, HyperelasticProblem, PoissonProblem,
    ScalingOptions,
};
use iga::geometry::{quarter_annulus, quarter_annulus_interpolated, NurbsPatch};
use iga::solvers::SolverConfig;
use iga::space::{AxisSpec, TensorSpace};
use iga::sparse::write_vector;

#[derive(Parser)]
#[command(name = "iga", about = "Tensor-product NURBS Galerkin demos", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a demo application.
    Run(RunArgs),
    /// Write a builtin geometry to a patch file.
    Patch(PatchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Demo {
    Poisson,
    CahnHilliard,
    Hyperelastic,
    Bench,
}

#[derive(Args)]
struct RunArgs {
    #[arg(value_enum)]
    demo: Demo,
    /// Elements per parametric direction.
    #[arg(short = 'N', long, default_value_t = 16)]
    elements: usize,
    /// Polynomial degree.
    #[arg(short = 'p', long, default_value_t = 2)]
    degree: usize,
    /// Interior continuity (defaults to degree - 1).
    #[arg(short = 'c', long)]
    continuity: Option<usize>,
    /// Periodic axes (implied for cahn-hilliard).
    #[arg(long)]
    periodic: bool,
    /// Spectral radius of the time integrator.
    #[arg(long, default_value_t = 0.5)]
    rho_inf: f64,
    /// Time step.
    #[arg(long, default_value_t = 1e-4)]
    dt: f64,
    /// Time steps, or load steps for the hyperelastic demo.
    #[arg(long)]
    steps: Option<usize>,
    /// Assembly/solver workers.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Geometry patch file (defaults to the flat unit domain).
    #[arg(long)]
    patch: Option<PathBuf>,
    /// Output directory for VTK fields and CSV monitors.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Export assembled matrix and right-hand side (Matrix Market / text).
    #[arg(long)]
    dump_matrix: bool,
    /// Fixed iteration budget (2 Newton x 30 GMRES) instead of tolerances.
    #[arg(long)]
    fixed_iters: bool,
    /// Logarithmic chemical potential for the Cahn-Hilliard demo.
    #[arg(long)]
    log_potential: bool,
    /// Samples per axis in VTK output.
    #[arg(long, default_value_t = 33)]
    samples: usize,
    /// Seed for random initial data.
    #[arg(long, default_value_t = 4242)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum BuiltinPatch {
    Flat,
    Annulus,
}

#[derive(Args)]
struct PatchArgs {
    #[arg(value_enum)]
    kind: BuiltinPatch,
    #[arg(short = 'N', long, default_value_t = 4)]
    elements: usize,
    #[arg(short = 'p', long, default_value_t = 2)]
    degree: usize,
    #[arg(short = 'c', long)]
    continuity: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Patch(args) => write_builtin_patch(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.category() as u8)
        }
    }
}

fn solver_config(args: &RunArgs) -> SolverConfig {
    if args.fixed_iters {
        SolverConfig::fixed_budget(2, 30)
    } else {
        SolverConfig::default()
    }
}

fn ensure_out(dir: &Option<PathBuf>) -> Result<Option<PathBuf>, iga::Error> {
    if let Some(d) = dir {
        std::fs::create_dir_all(d).map_err(demos::DemoError::Io)?;
        Ok(Some(d.clone()))
    } else {
        Ok(None)
    }
}

fn flat_space_and_patch(
    args: &RunArgs,
    dof_per_node: usize,
    periodic: bool,
) -> Result<(TensorSpace, NurbsPatch), iga::Error> {
    let c = args.continuity.unwrap_or(args.degree.saturating_sub(1));
    let axis = if periodic {
        AxisSpec::periodic(args.elements, args.degree, c, c)
    } else {
        AxisSpec::open(args.elements, args.degree, c)
    };
    let space = TensorSpace::build(&[axis, axis], dof_per_node)?;
    let patch = NurbsPatch::greville_identity(&space);
    Ok((space, patch))
}

fn load_space_and_patch(
    args: &RunArgs,
    dof_per_node: usize,
    periodic: bool,
) -> Result<(TensorSpace, NurbsPatch), iga::Error> {
    match &args.patch {
        Some(path) => Ok(demos::read_patch(path, dof_per_node)?),
        None => flat_space_and_patch(args, dof_per_node, periodic),
    }
}

fn run(args: RunArgs) -> Result<(), iga::Error> {
    let out = ensure_out(&args.out)?;
    match args.demo {
        Demo::Poisson => run_poisson(&args, out),
        Demo::CahnHilliard => run_cahn_hilliard(&args, out),
        Demo::Hyperelastic => run_hyperelastic(&args, out),
        Demo::Bench => run_bench(&args, out),
    }
}

fn reject_periodic(args: &RunArgs, demo: &str) -> Result<(), iga::Error> {
    if args.periodic {
        return Err(iga::Error::Demo(demos::DemoError::InvalidConfig(format!(
            "the {demo} demo imposes boundary data; omit --periodic"
        ))));
    }
    Ok(())
}

fn run_poisson(args: &RunArgs, out: Option<PathBuf>) -> Result<(), iga::Error> {
    reject_periodic(args, "poisson")?;
    let (space, patch) = load_space_and_patch(args, 1, false)?;
    let part = Partition::new(&space, args.workers)?;
    let problem = PoissonProblem::manufactured_sine(space.dim());
    let report = demos::poisson_run(&space, &patch, &part, &problem, &solver_config(args))?;
    println!(
        "poisson: {} dofs, {} GMRES iterations, residual {:.3e}",
        report.dofs, report.gmres_iterations, report.final_residual
    );
    if let Some(e) = report.errors {
        println!("errors: L2 {:.6e}, H1 {:.6e}", e.l2, e.h1);
    }
    if let Some(dir) = out {
        demos::write_vtk(
            &space,
            &patch,
            &report.solution,
            args.samples,
            "u",
            &dir.join("solution.vtk"),
        )?;
        let rows: Vec<String> = report
            .residual_history
            .iter()
            .enumerate()
            .map(|(i, r)| format!("0,{i},{r:e}"))
            .collect();
        write_csv(&dir.join("residuals.csv"), "step,iteration,residual", &rows)?;
        if args.dump_matrix {
            dump_system(&dir, &report.matrix, &report.rhs)?;
        }
    }
    Ok(())
}

fn run_cahn_hilliard(args: &RunArgs, out: Option<PathBuf>) -> Result<(), iga::Error> {
    let (space, patch) = flat_space_and_patch(args, 1, true)?;
    let part = Partition::new(&space, args.workers)?;
    let problem = CahnHilliardProblem {
        potential: if args.log_potential {
            ChemicalPotential::Logarithmic { theta: 1.5 }
        } else {
            ChemicalPotential::DoubleWell
        },
        seed: args.seed,
        ..Default::default()
    };
    let steps = args.steps.unwrap_or(50);
    let cfg = if args.fixed_iters {
        SolverConfig::fixed_budget(2, 30)
    } else {
        demos::cahn_hilliard_config()
    };
    let report = demos::cahn_hilliard_run(
        &space,
        &patch,
        &part,
        &problem,
        args.dt,
        steps,
        args.rho_inf,
        &cfg,
    )?;
    let last = report.monitors.last().expect("at least the initial monitor");
    println!(
        "cahn-hilliard: {} dofs, {} steps, mass drift {:.3e}, final energy {:.6e}",
        space.dof_count(),
        steps,
        report.mass_drift,
        last.energy
    );
    if let Some(dir) = out {
        let rows: Vec<String> = report
            .monitors
            .iter()
            .map(|m| {
                format!(
                    "{},{:e},{:e},{:e},{},{},{:e}",
                    m.step, m.t, m.mass, m.energy, m.newton_iterations, m.gmres_iterations,
                    m.residual
                )
            })
            .collect();
        write_csv(
            &dir.join("monitors.csv"),
            "step,t,mass,energy,newton_iterations,gmres_iterations,residual",
            &rows,
        )?;
        demos::write_vtk(
            &space,
            &patch,
            &report.state.u,
            args.samples,
            "concentration",
            &dir.join("concentration.vtk"),
        )?;
    }
    Ok(())
}

fn run_hyperelastic(args: &RunArgs, out: Option<PathBuf>) -> Result<(), iga::Error> {
    reject_periodic(args, "hyperelastic")?;
    let (space, patch) = load_space_and_patch(args, 2, false)?;
    let part = Partition::new(&space, args.workers)?;
    let problem = HyperelasticProblem {
        load_steps: args.steps.unwrap_or(15),
        ..Default::default()
    };
    let report = demos::neohookean_run(&space, &patch, &part, &problem, &solver_config(args))?;
    let max_newton =
        report.monitors.iter().map(|m| m.newton_iterations).max().unwrap_or(0);
    println!(
        "hyperelastic: {} dofs, {} load steps, max {} Newton iterations, strain energy {:.6e}",
        space.dof_count(),
        problem.load_steps,
        max_newton,
        report.strain_energy
    );
    if let Some(dir) = out {
        let rows: Vec<String> = report
            .monitors
            .iter()
            .map(|m| {
                format!(
                    "{},{:e},{},{:e},{:e}",
                    m.step, m.factor, m.newton_iterations, m.residual, m.energy
                )
            })
            .collect();
        write_csv(
            &dir.join("loadsteps.csv"),
            "step,factor,newton_iterations,residual,energy",
            &rows,
        )?;
        demos::write_vtk(
            &space,
            &patch,
            &report.displacement,
            args.samples,
            "displacement",
            &dir.join("displacement.vtk"),
        )?;
    }
    Ok(())
}

fn run_bench(args: &RunArgs, out: Option<PathBuf>) -> Result<(), iga::Error> {
    let mut counts = vec![1usize];
    let mut w = 2;
    while w < args.workers.max(1) {
        counts.push(w);
        w *= 2;
    }
    if args.workers > 1 {
        counts.push(args.workers);
    }
    let opts = ScalingOptions {
        elements_per_dim: args.elements.max(8),
        degree: args.degree,
        steps: args.steps.unwrap_or(10),
        dt: args.dt,
        rho_inf: args.rho_inf,
        worker_counts: counts,
        seed: args.seed,
        ..Default::default()
    };
    let report = demos::scaling_bench(&opts)?;
    print!("{report}");
    if let Some(dir) = out {
        let rows: Vec<String> = report
            .rows
            .iter()
            .map(|r| format!("{},{:e},{:e}", r.workers, r.seconds, r.efficiency))
            .collect();
        write_csv(&dir.join("bench.csv"), "workers,seconds,efficiency", &rows)?;
    }
    Ok(())
}

fn write_builtin_patch(args: PatchArgs) -> Result<(), iga::Error> {
    let c = args.continuity.unwrap_or(args.degree.saturating_sub(1));
    let (space, patch) = match args.kind {
        BuiltinPatch::Flat => {
            let axis = AxisSpec::open(args.elements, args.degree, c);
            let space = TensorSpace::build(&[axis, axis], 1)?;
            let patch = NurbsPatch::greville_identity(&space);
            (space, patch)
        }
        BuiltinPatch::Annulus => {
            if args.degree == 2 {
                quarter_annulus(args.elements, args.elements, 1)?
            } else {
                let axis = AxisSpec::open(args.elements, args.degree, c);
                let space = TensorSpace::build(&[axis, axis], 1)?;
                let patch = quarter_annulus_interpolated(&space)?;
                (space, patch)
            }
        }
    };
    demos::write_patch(&args.out, &space, &patch)?;
    println!("wrote {} ({} control points)", args.out.display(), patch.homogeneous().len());
    Ok(())
}

fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<(), iga::Error> {
    use std::io::Write;
    let do_write = || -> std::io::Result<()> {
        let mut f = std::fs::File::create(path)?;
        writeln!(f, "{header}")?;
        for row in rows {
            writeln!(f, "{row}")?;
        }
        Ok(())
    };
    do_write().map_err(|e| iga::Error::Demo(demos::DemoError::Io(e)))
}

fn dump_system(
    dir: &Path,
    matrix: &iga::sparse::CsrMatrix,
    rhs: &[f64],
) -> Result<(), iga::Error> {
    let io_err = |e: std::io::Error| iga::Error::Demo(demos::DemoError::Io(e));
    let mut m = std::fs::File::create(dir.join("matrix.mtx")).map_err(io_err)?;
    matrix.write_matrix_market(&mut m).map_err(io_err)?;
    let mut v = std::fs::File::create(dir.join("rhs.txt")).map_err(io_err)?;
    write_vector(rhs, &mut v).map_err(io_err)?;
    Ok(())
}

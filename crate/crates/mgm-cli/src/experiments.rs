//! Solver runs and the study drivers behind `solve`, `table`, `accuracy`,
//! and `curves`.

use crate::output::{write_csv, write_metadata, CsvTable};
use crate::{AccuracyArgs, CurvesArgs, SolveArgs, TableArgs};
use anyhow::{bail, Context, Result};
use mgm::discretize::{
    assemble_lbo, shifted_operator, DiscretizationConfig, ProblemKind,
};
use mgm::geom::{PointCloud, SurfaceSpec};
use mgm::krylov::{
    bicgstab_right, gmres_right, hierarchy_operator, mgm_preconditioner, IdentityOperator,
    SolveReport,
};
use mgm::la::{norm2, CsrMatrix};
use mgm::multilevel::{augment_poisson, Hierarchy, MgmConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverKind {
    Mgm,
    MgmGmres,
    MgmBicgstab,
    Gmres,
    Bicgstab,
}

impl FromStr for SolverKind {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<SolverKind> {
        Ok(match s {
            "mgm" => SolverKind::Mgm,
            "mgm-gmres" => SolverKind::MgmGmres,
            "mgm-bicgstab" => SolverKind::MgmBicgstab,
            "gmres" => SolverKind::Gmres,
            "bicgstab" => SolverKind::Bicgstab,
            other => bail!(
                "unknown solver '{other}' (expected mgm, mgm-gmres, mgm-bicgstab, gmres, bicgstab)"
            ),
        })
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SolverKind::Mgm => "mgm",
            SolverKind::MgmGmres => "mgm-gmres",
            SolverKind::MgmBicgstab => "mgm-bicgstab",
            SolverKind::Gmres => "gmres",
            SolverKind::Bicgstab => "bicgstab",
        };
        write!(f, "{name}")
    }
}

impl SolverKind {
    fn uses_hierarchy(&self) -> bool {
        matches!(
            self,
            SolverKind::Mgm | SolverKind::MgmGmres | SolverKind::MgmBicgstab
        )
    }
}

pub struct RunSpec {
    pub config: DiscretizationConfig,
    pub problem: ProblemKind,
    pub mu: f64,
    pub solver: SolverKind,
    pub tol: f64,
    pub maxit: usize,
    pub restart: Option<usize>,
    pub mgm: MgmConfig,
}

pub struct RunOutcome {
    /// Iterations under the reporting rule: V-cycles for the standalone
    /// solver, iterations for GMRES, preconditioner applications for
    /// BiCGSTAB.
    pub iterations: usize,
    pub converged: bool,
    pub final_residual: f64,
    pub history: Vec<f64>,
    pub setup_seconds: f64,
    pub solve_seconds: f64,
    /// Physical solution values (Lagrange multiplier stripped).
    pub solution: Vec<f64>,
}

fn reported_iterations(kind: SolverKind, report: &SolveReport) -> usize {
    match kind {
        SolverKind::MgmBicgstab | SolverKind::Bicgstab => report.preconditioner_applications,
        _ => report.iterations,
    }
}

/// Assemble, set up, and solve one configuration with the physical
/// right-hand side `f`.
pub fn run_one(spec: &RunSpec, cloud: &PointCloud, f: &[f64]) -> Result<RunOutcome> {
    let setup_start = Instant::now();
    let d = assemble_lbo(cloud, &spec.config)?;
    let l = match spec.problem {
        ProblemKind::Poisson => d,
        ProblemKind::Shifted => shifted_operator(&d, spec.mu)?,
    };
    let hierarchy = if spec.solver.uses_hierarchy() {
        Some(Hierarchy::setup(&l, cloud, spec.mgm, spec.problem)?)
    } else {
        None
    };
    // system matrix for the unpreconditioned solvers
    let system: Option<CsrMatrix> = if spec.solver.uses_hierarchy() {
        None
    } else {
        Some(match spec.problem {
            ProblemKind::Poisson => augment_poisson(&l)?,
            ProblemKind::Shifted => l.clone(),
        })
    };
    let setup_seconds = setup_start.elapsed().as_secs_f64();

    let mut rhs = f.to_vec();
    if spec.problem == ProblemKind::Poisson {
        rhs.push(0.0);
    }

    let solve_start = Instant::now();
    let (solution, report) = match spec.solver {
        SolverKind::Mgm => {
            let h = hierarchy.as_ref().unwrap();
            h.solve_standalone(&rhs, spec.tol, spec.maxit)?
        }
        SolverKind::MgmGmres => {
            let h = hierarchy.as_ref().unwrap();
            let a = hierarchy_operator(h);
            let m = mgm_preconditioner(h);
            gmres_right(&a, &rhs, &m, spec.tol, spec.maxit, spec.restart)?
        }
        SolverKind::MgmBicgstab => {
            let h = hierarchy.as_ref().unwrap();
            let a = hierarchy_operator(h);
            let m = mgm_preconditioner(h);
            bicgstab_right(&a, &rhs, &m, spec.tol, spec.maxit)?
        }
        SolverKind::Gmres => {
            let a = system.as_ref().unwrap();
            let m = IdentityOperator(a.nrows());
            gmres_right(a, &rhs, &m, spec.tol, spec.maxit, spec.restart)?
        }
        SolverKind::Bicgstab => {
            let a = system.as_ref().unwrap();
            let m = IdentityOperator(a.nrows());
            bicgstab_right(a, &rhs, &m, spec.tol, spec.maxit)?
        }
    };
    let solve_seconds = solve_start.elapsed().as_secs_f64();

    let mut solution = solution;
    solution.truncate(cloud.len());
    Ok(RunOutcome {
        iterations: reported_iterations(spec.solver, &report),
        converged: report.converged,
        final_residual: *report.residual_history.last().unwrap(),
        history: report.residual_history,
        setup_seconds,
        solve_seconds,
        solution,
    })
}

/// Uniform [-1, 1] right-hand side from the seeded generator.
pub fn random_rhs(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect()
}

/// The degree-5 harmonic z(x^4 - 6x^2y^2 + y^4); its surface Laplacian on the
/// unit sphere is -30 times itself.
pub fn harmonic_y54(cloud: &PointCloud) -> Vec<f64> {
    cloud
        .points()
        .iter()
        .map(|p| {
            let (x, y, z) = (p[0], p[1], p[2]);
            z * (x.powi(4) - 6.0 * x * x * y * y + y.powi(4))
        })
        .collect()
}

/// Relative 2-norm error after removing the mean of both vectors.
pub fn mean_free_error(u: &[f64], exact: &[f64]) -> f64 {
    let n = u.len() as f64;
    let mu: f64 = u.iter().sum::<f64>() / n;
    let me: f64 = exact.iter().sum::<f64>() / n;
    let diff: Vec<f64> = u
        .iter()
        .zip(exact)
        .map(|(a, b)| (a - mu) - (b - me))
        .collect();
    let base: Vec<f64> = exact.iter().map(|b| b - me).collect();
    norm2(&diff) / norm2(&base)
}

fn solve_spec(args: &SolveArgs) -> Result<RunSpec> {
    Ok(RunSpec {
        config: args.disc.build(args.disc.method, args.disc.ell)?,
        problem: args.problem,
        mu: args.mu,
        solver: args.solver,
        tol: args.tol,
        maxit: args.maxit,
        restart: args.restart,
        mgm: args.mgm.build()?,
    })
}

fn solve_rhs(args: &SolveArgs, cloud: &PointCloud) -> Result<Vec<f64>> {
    match &args.rhs {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            let f = mgm::io::parse_vector(&text)?;
            if f.len() != cloud.len() {
                bail!(
                    "right-hand side has {} entries for a cloud of {} points",
                    f.len(),
                    cloud.len()
                );
            }
            Ok(f)
        }
        None => Ok(random_rhs(cloud.len(), args.seed)),
    }
}

pub fn run_solve(args: &SolveArgs) -> Result<ExitCode> {
    let cloud = args.surface.0.build()?;
    let spec = solve_spec(args)?;
    let f = solve_rhs(args, &cloud)?;
    let outcome = run_one(&spec, &cloud, &f)?;
    println!(
        "{} on {} (N = {}): {} in {} iterations, final relative residual {:.3e} (setup {:.2}s, solve {:.2}s)",
        spec.solver,
        args.surface.0,
        cloud.len(),
        if outcome.converged { "converged" } else { "NOT converged" },
        outcome.iterations,
        outcome.final_residual,
        outcome.setup_seconds,
        outcome.solve_seconds,
    );
    if let Some(path) = &args.out_solution {
        let mut file = std::fs::File::create(path)?;
        mgm::io::write_vector(&outcome.solution, &mut file)?;
    }
    if let Some(path) = &args.history {
        let mut table = CsvTable::new(&["iteration", "relative_residual"]);
        for (i, r) in outcome.history.iter().enumerate() {
            table.row(&[i.to_string(), r.to_string()]);
        }
        write_csv(path, &table)?;
    }
    if let Some(path) = &args.summary {
        // the summary needs a hierarchy; rebuild only when the solver had one
        if args.solver.uses_hierarchy() {
            let d = assemble_lbo(&cloud, &spec.config)?;
            let l = match spec.problem {
                ProblemKind::Poisson => d,
                ProblemKind::Shifted => shifted_operator(&d, spec.mu)?,
            };
            let h = Hierarchy::setup(&l, &cloud, spec.mgm, spec.problem)?;
            let json = serde_json::to_string_pretty(&h.summary())?;
            std::fs::write(path, json)?;
        } else {
            bail!("--summary requires an mgm-based solver");
        }
    }
    Ok(if outcome.converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

const TABLE_HEADER: &[&str] = &[
    "n",
    "ell",
    "method",
    "solver",
    "iterations",
    "final_residual",
    "setup_seconds",
    "solve_seconds",
    "error_2norm",
    "status",
];

pub fn run_table(args: &TableArgs) -> Result<ExitCode> {
    let mgm_config = args.mgm.build()?;
    let mut table = CsvTable::new(TABLE_HEADER);
    let mut any_failed = false;

    for surface in &args.surface {
        let cloud = match surface.0.build() {
            Ok(c) => c,
            Err(e) => {
                // a bad surface fails every row of its block
                for method in &args.method {
                    for &ell in &args.ell {
                        for solver in &args.solver {
                            any_failed = true;
                            table.row(&[
                                String::new(),
                                ell.to_string(),
                                method.to_string(),
                                solver.to_string(),
                                String::new(),
                                String::new(),
                                String::new(),
                                String::new(),
                                String::new(),
                                format!("error: {e}").replace(',', ";"),
                            ]);
                        }
                    }
                }
                continue;
            }
        };
        let f = random_rhs(cloud.len(), args.seed);
        for method in &args.method {
            for &ell in &args.ell {
                for solver in &args.solver {
                    let spec = match DiscretizationConfig::new(*method, ell)
                        .and_then(|c| c.with_alpha(args.alpha))
                    {
                        Ok(config) => RunSpec {
                            config,
                            problem: args.problem,
                            mu: args.mu,
                            solver: *solver,
                            tol: args.tol,
                            maxit: args.maxit,
                            restart: args.restart,
                            mgm: mgm_config,
                        },
                        Err(e) => {
                            any_failed = true;
                            table.row(&[
                                cloud.len().to_string(),
                                ell.to_string(),
                                method.to_string(),
                                solver.to_string(),
                                String::new(),
                                String::new(),
                                String::new(),
                                String::new(),
                                String::new(),
                                format!("error: {e}").replace(',', ";"),
                            ]);
                            continue;
                        }
                    };
                    match run_one(&spec, &cloud, &f) {
                        Ok(outcome) => {
                            let status = if outcome.converged {
                                "ok".to_string()
                            } else {
                                "not-converged".to_string()
                            };
                            table.row(&[
                                cloud.len().to_string(),
                                ell.to_string(),
                                method.to_string(),
                                solver.to_string(),
                                outcome.iterations.to_string(),
                                outcome.final_residual.to_string(),
                                outcome.setup_seconds.to_string(),
                                outcome.solve_seconds.to_string(),
                                String::new(),
                                status,
                            ]);
                        }
                        Err(e) => {
                            any_failed = true;
                            table.row(&[
                                cloud.len().to_string(),
                                ell.to_string(),
                                method.to_string(),
                                solver.to_string(),
                                String::new(),
                                String::new(),
                                String::new(),
                                String::new(),
                                String::new(),
                                format!("error: {e}").replace(',', ";"),
                            ]);
                        }
                    }
                }
            }
        }
    }
    write_csv(&args.out, &table)?;
    write_metadata(
        &args.out,
        &serde_json::json!({
            "command": "table",
            "surfaces": args.surface.iter().map(|s| s.0.to_string()).collect::<Vec<_>>(),
            "methods": args.method.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
            "ells": args.ell,
            "solvers": args.solver.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
            "problem": args.problem.to_string(),
            "mu": args.mu,
            "alpha": args.alpha,
            "tol": args.tol,
            "maxit": args.maxit,
            "restart": args.restart,
            "seed": args.seed,
            "rhs_distribution": "uniform[-1,1]",
        }),
    )?;
    println!("wrote {}", args.out.display());
    Ok(if any_failed {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

/// Sphere sizes must be icosahedral counts 10 * 4^k + 2.
fn refinement_for(n: usize) -> Result<u32> {
    for k in 0..=12u32 {
        if 10usize * 4usize.pow(k) + 2 == n {
            return Ok(k);
        }
    }
    bail!("{n} is not an icosahedral node count (10 * 4^k + 2)")
}

pub fn run_accuracy(args: &AccuracyArgs) -> Result<ExitCode> {
    let mgm_config = args.mgm.build()?;
    let mut table = CsvTable::new(TABLE_HEADER);
    let mut any_failed = false;
    for &n in &args.n {
        let k = refinement_for(n)?;
        let cloud = SurfaceSpec::Sphere { k }.build()?;
        let exact = harmonic_y54(&cloud);
        let f: Vec<f64> = exact.iter().map(|v| -30.0 * v).collect();
        for method in &args.method {
            for &ell in &args.ell {
                for &cap in &args.caps {
                    let spec = RunSpec {
                        config: DiscretizationConfig::new(*method, ell)?
                            .with_alpha(args.alpha)?,
                        problem: ProblemKind::Poisson,
                        mu: 0.0,
                        solver: SolverKind::MgmGmres,
                        tol: 1e-14,
                        maxit: cap,
                        restart: None,
                        mgm: mgm_config,
                    };
                    match run_one(&spec, &cloud, &f) {
                        Ok(outcome) => {
                            let err = mean_free_error(&outcome.solution, &exact);
                            table.row(&[
                                n.to_string(),
                                ell.to_string(),
                                method.to_string(),
                                "mgm-gmres".to_string(),
                                outcome.iterations.to_string(),
                                outcome.final_residual.to_string(),
                                outcome.setup_seconds.to_string(),
                                outcome.solve_seconds.to_string(),
                                err.to_string(),
                                "ok".to_string(),
                            ]);
                        }
                        Err(e) => {
                            any_failed = true;
                            table.row(&[
                                n.to_string(),
                                ell.to_string(),
                                method.to_string(),
                                "mgm-gmres".to_string(),
                                cap.to_string(),
                                String::new(),
                                String::new(),
                                String::new(),
                                String::new(),
                                format!("error: {e}").replace(',', ";"),
                            ]);
                        }
                    }
                }
            }
        }
    }
    write_csv(&args.out, &table)?;
    write_metadata(
        &args.out,
        &serde_json::json!({
            "command": "accuracy",
            "ns": args.n,
            "ells": args.ell,
            "caps": args.caps,
            "methods": args.method.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
            "alpha": args.alpha,
            "problem": "poisson",
            "exact_solution": "z(x^4 - 6x^2y^2 + y^4)",
        }),
    )?;
    println!("wrote {}", args.out.display());
    Ok(if any_failed {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

pub fn run_curves(args: &CurvesArgs) -> Result<ExitCode> {
    let cloud = args.solve.surface.0.build()?;
    let spec = solve_spec(&args.solve)?;
    let f = solve_rhs(&args.solve, &cloud)?;
    let outcome = run_one(&spec, &cloud, &f)?;
    let mut table = CsvTable::new(&["iteration", "relative_residual"]);
    for (i, r) in outcome.history.iter().enumerate() {
        table.row(&[i.to_string(), r.to_string()]);
    }
    write_csv(&args.out, &table)?;
    write_metadata(
        &args.out,
        &serde_json::json!({
            "command": "curves",
            "surface": args.solve.surface.0.to_string(),
            "method": args.solve.disc.method.to_string(),
            "ell": args.solve.disc.ell,
            "solver": args.solve.solver.to_string(),
            "problem": args.solve.problem.to_string(),
            "mu": args.solve.mu,
            "tol": args.solve.tol,
            "seed": args.solve.seed,
            "rhs_distribution": "uniform[-1,1]",
        }),
    )?;
    println!(
        "wrote {} ({} iterations, converged: {})",
        args.out.display(),
        outcome.iterations,
        outcome.converged
    );
    Ok(ExitCode::SUCCESS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solver_names_round_trip() {
        for name in ["mgm", "mgm-gmres", "mgm-bicgstab", "gmres", "bicgstab"] {
            assert_eq!(SolverKind::from_str(name).unwrap().to_string(), name);
        }
        assert!(SolverKind::from_str("cg").is_err());
    }

    #[test]
    fn icosahedral_counts_recognized() {
        assert_eq!(refinement_for(12).unwrap(), 0);
        assert_eq!(refinement_for(2562).unwrap(), 4);
        assert_eq!(refinement_for(10242).unwrap(), 5);
        assert!(refinement_for(1000).is_err());
    }

    #[test]
    fn rhs_is_deterministic_and_in_range() {
        let a = random_rhs(100, 7);
        let b = random_rhs(100, 7);
        assert_eq!(a, b);
        assert!(a.iter().all(|v| (-1.0..=1.0).contains(v)));
        assert_ne!(random_rhs(100, 8), a);
    }

    #[test]
    fn mean_free_error_ignores_constant_shift() {
        let exact = vec![1.0, 2.0, 3.0, 4.0];
        let shifted: Vec<f64> = exact.iter().map(|v| v + 10.0).collect();
        assert!(mean_free_error(&shifted, &exact) < 1e-15);
    }
}

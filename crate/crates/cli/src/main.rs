//! Command-line front end: validate instances, inspect the hull, run
//! the combinatorial and simplex solvers, decompose points, separate
//! cuts, and minimize.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 bound-only
//! (degraded) result, 3 numerical failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use drsubmod_core::bruteforce::{
    max_violation_over_permutations, min_over_extreme_points, min_over_lattice, EnumerationBudget,
};
use drsubmod_core::cuts::separate;
use drsubmod_core::forest::{check_dr_submodularity, user_coords, ForestInstance, ValueOracle};
use drsubmod_core::hull::{cz_rows, enumerate_subsets, extreme_point, CutTag};
use drsubmod_core::io::{
    build_oracle, load_instance, to_json_precise, LoadedInstance, ObjectiveSpec,
};
use drsubmod_core::linopt::solve_forest;
use drsubmod_core::perm::decompose;
use drsubmod_core::solver::{minimize, SolveOptions, SolveStatus, UnevenBoundsPolicy};
use drsubmod_core::{Error, Point};

#[derive(Parser)]
#[command(
    name = "drsubmod",
    version,
    about = "DR-submodular minimization over mixed-integer forests"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for any randomized step (sampling checks).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Separation tolerance for solve/separate.
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Write a machine-readable JSON report here.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse an instance and report its structure and assumptions.
    Validate { instance: PathBuf },
    /// Inspect the hull description.
    Hull {
        #[command(subcommand)]
        what: HullCommand,
    },
    /// Minimize a linear objective over the hull with dual certificates.
    Linopt {
        instance: PathBuf,
        /// JSON array with one coefficient per vertex.
        #[arg(long)]
        objective: PathBuf,
        /// Write the dual certificate here.
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Express a hull point as a convex combination of extreme points.
    Decompose {
        instance: PathBuf,
        /// JSON array with one coordinate per vertex.
        #[arg(long)]
        point: PathBuf,
    },
    /// Most violated epigraph cut at a point.
    Separate {
        instance: PathBuf,
        #[arg(long)]
        point: PathBuf,
        /// Epigraph value at the point.
        #[arg(long, allow_hyphen_values = true)]
        w: f64,
    },
    /// Cutting-plane minimization of the instance objective.
    Solve {
        instance: PathBuf,
        #[arg(long)]
        max_iters: Option<usize>,
        /// On uneven bounds below a fractional bound, relax and report a
        /// lower bound instead of refusing.
        #[arg(long)]
        relax_uneven_bounds: bool,
    },
    /// Exhaustive reference oracles.
    Oracle {
        instance: PathBuf,
        #[arg(long, value_enum)]
        mode: OracleMode,
        /// Grid resolution for continuous coordinates (lattice mode).
        #[arg(long, default_value_t = 0.5)]
        grid_step: f64,
        /// Point for permutation mode.
        #[arg(long)]
        point: Option<PathBuf>,
        /// Epigraph value for permutation mode.
        #[arg(long, allow_hyphen_values = true)]
        w: Option<f64>,
    },
    /// Diminishing-returns check of the instance objective.
    CheckDr {
        instance: PathBuf,
        #[arg(long, default_value_t = 500)]
        samples: usize,
    },
}

#[derive(Subcommand)]
enum HullCommand {
    /// Stream every generating subset with its extreme point (guarded).
    Vertices { instance: PathBuf },
    /// Print the full inequality description.
    Rows { instance: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleMode {
    Extreme,
    Lattice,
    Perms,
}

fn main() -> ExitCode {
    // Usage problems exit 1; clap's default of 2 is reserved for
    // degraded solves here.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::NumericalFailure(_)
                | Error::IterationLimit { .. }
                | Error::DecompositionResidual { .. } => ExitCode::from(3),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, Error> {
    match &cli.command {
        Command::Validate { instance } => validate(cli, instance),
        Command::Hull { what } => match what {
            HullCommand::Vertices { instance } => hull_vertices(instance),
            HullCommand::Rows { instance } => hull_rows(instance),
        },
        Command::Linopt {
            instance,
            objective,
            certificate,
        } => linopt(cli, instance, objective, certificate.as_deref()),
        Command::Decompose { instance, point } => run_decompose(cli, instance, point),
        Command::Separate { instance, point, w } => run_separate(cli, instance, point, *w),
        Command::Solve {
            instance,
            max_iters,
            relax_uneven_bounds,
        } => solve(cli, instance, *max_iters, *relax_uneven_bounds),
        Command::Oracle {
            instance,
            mode,
            grid_step,
            point,
            w,
        } => oracle_cmd(cli, instance, *mode, *grid_step, point.as_deref(), *w),
        Command::CheckDr { instance, samples } => check_dr(cli, instance, *samples),
    }
}

fn load(path: &Path) -> Result<LoadedInstance, Error> {
    load_instance(path)
}

fn read_vector(path: &Path, n: usize, what: &str) -> Result<Vec<f64>, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    let values: Vec<f64> = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("{what} must be a JSON array: {e}")))?;
    if values.len() != n {
        return Err(Error::InvalidInput(format!(
            "{what} has {} entries for an instance with {n} vertices",
            values.len()
        )));
    }
    Ok(values)
}

fn instance_point(inst: &ForestInstance, path: &Path) -> Result<Point, Error> {
    let coords = read_vector(path, inst.vertex_count(), "point")?;
    inst.point_from_user(&coords)
}

fn required_oracle(loaded: &LoadedInstance) -> Result<ValueOracle, Error> {
    let spec = loaded
        .objective
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("instance file carries no objective".into()))?;
    build_oracle(spec, &loaded.instance)
}

fn write_report<T: Serialize>(cli: &Cli, payload: &T) -> Result<(), Error> {
    if let Some(path) = &cli.report {
        let text = to_json_precise(payload)?;
        std::fs::write(path, text)
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))?;
        println!("report written to {}", path.display());
    }
    Ok(())
}

fn fmt_set(vs: impl IntoIterator<Item = usize>) -> String {
    let items: Vec<String> = vs.into_iter().map(|v| v.to_string()).collect();
    format!("{{{}}}", items.join(", "))
}

// ---------------------------------------------------------------------

#[derive(Serialize)]
struct ValidateReport {
    n: usize,
    arcs: usize,
    roots: Vec<usize>,
    integer_vertices: Vec<usize>,
    psi: Vec<usize>,
    single_child_normalized: bool,
    assumption1: bool,
    assumption2: bool,
    defaulted_roots: Vec<usize>,
    objective: Option<String>,
}

fn validate(cli: &Cli, path: &Path) -> Result<ExitCode, Error> {
    let loaded = load(path)?;
    let inst = &loaded.instance;
    let a1 = inst.check_assumption1();
    let a2 = inst.check_assumption2();
    println!(
        "instance: {} vertices, {} arcs, roots {}",
        inst.vertex_count(),
        inst.arcs().count(),
        fmt_set(inst.roots().iter().copied())
    );
    println!("integer vertices: {}", fmt_set(inst.integer_vertices()));
    println!("psi = {}", fmt_set(inst.psi_set().iter().copied()));
    println!(
        "single-child normalization: {}",
        if inst.property1_holds() {
            "holds"
        } else {
            "needs insertion"
        }
    );
    match &a1 {
        Ok(()) => println!("assumption 1 (unique fractional bound per path): OK"),
        Err(v) => println!("assumption 1 violated: {v}"),
    }
    match &a2 {
        Ok(()) => println!("assumption 2 (flat bounds below fractional): OK"),
        Err(v) => println!("assumption 2 violated: {v}"),
    }
    if !loaded.defaulted_roots.is_empty() {
        println!(
            "note: unbounded roots {} received the fallback bound 1",
            fmt_set(loaded.defaulted_roots.iter().copied())
        );
    }
    write_report(
        cli,
        &ValidateReport {
            n: inst.vertex_count(),
            arcs: inst.arcs().count(),
            roots: inst.roots().to_vec(),
            integer_vertices: inst.integer_vertices().collect(),
            psi: inst.psi_set().to_vec(),
            single_child_normalized: inst.property1_holds(),
            assumption1: a1.is_ok(),
            assumption2: a2.is_ok(),
            defaulted_roots: loaded.defaulted_roots.clone(),
            objective: loaded.objective.as_ref().map(|o| match o {
                ObjectiveSpec::Quadratic { .. } => "quadratic".to_string(),
                ObjectiveSpec::Table { .. } => "table".to_string(),
            }),
        },
    )?;
    if a1.is_err() {
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn hull_vertices(path: &Path) -> Result<ExitCode, Error> {
    let loaded = load(path)?;
    let inst = &loaded.instance;
    for s in enumerate_subsets(inst, 20)? {
        let p = extreme_point(inst, &s)?;
        let coords: Vec<String> = user_coords(&p).iter().map(|x| format!("{x}")).collect();
        println!("{} -> [{}]", fmt_set(s.iter()), coords.join(", "));
    }
    Ok(ExitCode::SUCCESS)
}

fn hull_rows(path: &Path) -> Result<ExitCode, Error> {
    let loaded = load(path)?;
    let inst = &loaded.instance;
    for row in cz_rows(inst) {
        let mut terms = Vec::new();
        for v in 1..=inst.vertex_count() {
            let c = row.coeffs[v];
            if c != 0.0 {
                terms.push(format!("{c:+} z{v}"));
            }
        }
        let tag = match row.tag {
            CutTag::Box => "box",
            CutTag::NonNeg => "nonneg",
            CutTag::Monotone => "monotone",
            CutTag::Mir => "mir",
            CutTag::Dr => "dr",
        };
        println!("[{tag}] {} <= {}", terms.join(" "), row.rhs);
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct CertificateReport {
    objective: f64,
    point: Vec<f64>,
    generating_set: Vec<usize>,
    p: Vec<f64>,
    q: Vec<QEntry>,
    r: Vec<REntry>,
    cases: Vec<String>,
}

#[derive(Serialize)]
struct QEntry {
    arc: [usize; 2],
    value: f64,
}

#[derive(Serialize)]
struct REntry {
    vertex: usize,
    value: f64,
}

fn linopt(
    cli: &Cli,
    instance: &Path,
    objective: &Path,
    certificate: Option<&Path>,
) -> Result<ExitCode, Error> {
    let loaded = load(instance)?;
    let inst = &loaded.instance;
    let coeffs = read_vector(objective, inst.vertex_count(), "objective")?;
    let a: Vec<f64> = std::iter::once(0.0).chain(coeffs).collect();
    let solve = solve_forest(inst, &a)?;
    let coords: Vec<String> = user_coords(&solve.point)
        .iter()
        .map(|x| format!("{x}"))
        .collect();
    println!("optimal point: [{}]", coords.join(", "));
    println!("objective: {}", solve.objective);
    println!("generating set: {}", fmt_set(solve.generating_set.iter()));
    for (psi, case) in &solve.cases {
        println!("subtree at {psi}: {case:?}");
    }
    let dual = solve.certificate.dual_objective(inst);
    println!("dual objective: {dual}");

    let cert_report = CertificateReport {
        objective: solve.objective,
        point: user_coords(&solve.point).to_vec(),
        generating_set: solve.generating_set.iter().collect(),
        p: solve.certificate.p[1..].to_vec(),
        q: inst
            .arcs()
            .map(|(i, j)| QEntry {
                arc: [i, j],
                value: solve.certificate.q_in[j],
            })
            .collect(),
        r: inst
            .psi_set()
            .iter()
            .map(|&v| REntry {
                vertex: v,
                value: solve.certificate.r[v],
            })
            .collect(),
        cases: solve
            .cases
            .iter()
            .map(|(v, c)| format!("{v}:{c:?}"))
            .collect(),
    };
    if let Some(path) = certificate {
        std::fs::write(path, to_json_precise(&cert_report)?)
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))?;
        println!("certificate written to {}", path.display());
    }
    write_report(cli, &cert_report)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct DecomposeReport {
    order: Vec<usize>,
    t: Vec<f64>,
    weights: Vec<f64>,
    points: Vec<Vec<f64>>,
}

fn run_decompose(cli: &Cli, instance: &Path, point: &Path) -> Result<ExitCode, Error> {
    let loaded = load(instance)?;
    let inst = &loaded.instance;
    let z = instance_point(inst, point)?;
    let dec = decompose(inst, &z)?;
    println!("order: {:?}", dec.permutation.order());
    println!("t: {:?}", dec.t);
    println!("weights: {:?}", dec.weights);
    for k in dec.support() {
        let coords: Vec<String> = user_coords(&dec.points[k])
            .iter()
            .map(|x| format!("{x}"))
            .collect();
        println!(
            "  lambda_{k} = {} at [{}]",
            dec.weights[k],
            coords.join(", ")
        );
    }
    write_report(
        cli,
        &DecomposeReport {
            order: dec.permutation.order().to_vec(),
            t: dec.t.clone(),
            weights: dec.weights.clone(),
            points: dec.points.iter().map(|p| user_coords(p).to_vec()).collect(),
        },
    )?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SeparateReport {
    order: Vec<usize>,
    coefficients: Vec<f64>,
    violation: f64,
    separated: bool,
}

fn run_separate(cli: &Cli, instance: &Path, point: &Path, w: f64) -> Result<ExitCode, Error> {
    let loaded = load(instance)?;
    let inst = &loaded.instance;
    let oracle = required_oracle(&loaded)?;
    let z = instance_point(inst, point)?;
    let cut = separate(inst, &oracle, &z, w)?;
    let violation = cut.violation(&z, w);
    let epsilon = cli.epsilon.unwrap_or(drsubmod_core::tol::SEPARATION);
    println!("cut order: {:?}", cut.permutation.order());
    println!("coefficients: {:?}", &cut.pi[1..]);
    println!("violation at (point, {w}): {violation}");
    println!("separated: {}", violation > epsilon);
    write_report(
        cli,
        &SeparateReport {
            order: cut.permutation.order().to_vec(),
            coefficients: cut.pi[1..].to_vec(),
            violation,
            separated: violation > epsilon,
        },
    )?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SolveJsonReport {
    status: String,
    point: Vec<f64>,
    value: f64,
    master_bound: f64,
    iterations: usize,
    cuts: usize,
    recovery_index: usize,
    final_violation: f64,
    certified_exact: bool,
    epsilon: f64,
    recovery_order: Vec<usize>,
    recovery_weights: Vec<f64>,
}

fn solve(
    cli: &Cli,
    instance: &Path,
    max_iters: Option<usize>,
    relax_uneven: bool,
) -> Result<ExitCode, Error> {
    let loaded = load(instance)?;
    let inst = &loaded.instance;
    let oracle = required_oracle(&loaded)?;
    let epsilon = cli.epsilon.unwrap_or(drsubmod_core::tol::SEPARATION);
    let options = SolveOptions {
        epsilon,
        max_iterations: max_iters,
        uneven_bounds: if relax_uneven {
            UnevenBoundsPolicy::RelaxAndBound
        } else {
            UnevenBoundsPolicy::Error
        },
        ..SolveOptions::default()
    };
    let report = minimize(inst, &oracle, &options)?;
    let coords: Vec<String> = user_coords(&report.point)
        .iter()
        .map(|x| format!("{x}"))
        .collect();
    match report.status {
        SolveStatus::Optimal => {
            println!(
                "optimum {} at [{}]",
                report.value + oracle.base_value(),
                coords.join(", ")
            );
        }
        SolveStatus::LowerBoundOnly => {
            println!(
                "lower bound {} (degraded mode); best feasible value {}{}",
                report.master_bound + oracle.base_value(),
                report.value + oracle.base_value(),
                if report.certified_exact {
                    " [certified exact]"
                } else {
                    ""
                }
            );
        }
    }
    println!(
        "iterations: {}, cuts: {}, final violation: {:.3e}, wall time: {:?}",
        report.iterations, report.cuts_generated, report.final_violation, report.wall_time
    );
    write_report(
        cli,
        &SolveJsonReport {
            status: match report.status {
                SolveStatus::Optimal => "optimal".into(),
                SolveStatus::LowerBoundOnly => "lower_bound_only".into(),
            },
            point: user_coords(&report.point).to_vec(),
            value: report.value + oracle.base_value(),
            master_bound: report.master_bound + oracle.base_value(),
            iterations: report.iterations,
            cuts: report.cuts_generated,
            recovery_index: report.recovery_index,
            final_violation: report.final_violation,
            certified_exact: report.certified_exact,
            epsilon,
            recovery_order: report.recovery_order.clone(),
            recovery_weights: report.recovery_weights.clone(),
        },
    )?;
    match report.status {
        SolveStatus::Optimal => Ok(ExitCode::SUCCESS),
        SolveStatus::LowerBoundOnly => Ok(ExitCode::from(2)),
    }
}

#[derive(Serialize)]
struct OracleReport {
    mode: String,
    value: f64,
    point: Option<Vec<f64>>,
    generating_set: Option<Vec<usize>>,
    order: Option<Vec<usize>>,
}

fn oracle_cmd(
    cli: &Cli,
    instance: &Path,
    mode: OracleMode,
    grid_step: f64,
    point: Option<&Path>,
    w: Option<f64>,
) -> Result<ExitCode, Error> {
    let loaded = load(instance)?;
    let inst = &loaded.instance;
    let oracle = required_oracle(&loaded)?;
    let budget = EnumerationBudget::default();
    let report = match mode {
        OracleMode::Extreme => {
            let (set, value) = min_over_extreme_points(inst, &oracle, &budget)?;
            println!(
                "minimum over extreme points: {} at {}",
                value + oracle.base_value(),
                fmt_set(set.iter())
            );
            OracleReport {
                mode: "extreme".into(),
                value: value + oracle.base_value(),
                point: None,
                generating_set: Some(set.iter().collect()),
                order: None,
            }
        }
        OracleMode::Lattice => {
            let (z, value) = min_over_lattice(inst, &oracle, grid_step, &budget)?;
            println!(
                "minimum over the grid (step {grid_step}): {} at {:?}",
                value + oracle.base_value(),
                user_coords(&z)
            );
            OracleReport {
                mode: "lattice".into(),
                value: value + oracle.base_value(),
                point: Some(user_coords(&z).to_vec()),
                generating_set: None,
                order: None,
            }
        }
        OracleMode::Perms => {
            let point_path = point
                .ok_or_else(|| Error::InvalidInput("permutation mode needs --point".into()))?;
            let w = w.ok_or_else(|| Error::InvalidInput("permutation mode needs --w".into()))?;
            let z = instance_point(inst, point_path)?;
            let (cut, violation) = max_violation_over_permutations(inst, &oracle, &z, w, &budget)?;
            println!("max violation over valid permutations: {violation}");
            println!("attained by order {:?}", cut.permutation.order());
            OracleReport {
                mode: "perms".into(),
                value: violation,
                point: None,
                generating_set: None,
                order: Some(cut.permutation.order().to_vec()),
            }
        }
    };
    write_report(cli, &report)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct DrCheckReportJson {
    method: String,
    passes: bool,
    worst: f64,
    samples: usize,
}

fn check_dr(cli: &Cli, instance: &Path, samples: usize) -> Result<ExitCode, Error> {
    let loaded = load(instance)?;
    let inst = &loaded.instance;
    let spec = loaded
        .objective
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("instance file carries no objective".into()))?;
    let report = match spec {
        ObjectiveSpec::Quadratic { q, .. } => {
            // Exact criterion: every second-order coefficient must be
            // non-positive.
            let worst = q
                .iter()
                .flatten()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max);
            let passes = worst <= 0.0;
            println!(
                "quadratic objective: second-order coefficients {} (worst entry {worst})",
                if passes {
                    "all non-positive"
                } else {
                    "contain positive entries"
                }
            );
            DrCheckReportJson {
                method: "hessian".into(),
                passes,
                worst,
                samples: 0,
            }
        }
        _ => {
            let oracle = required_oracle(&loaded)?;
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let rep = check_dr_submodularity(inst, &oracle, samples, 1e-7, &mut rng)?;
            println!(
                "sampled check over {} increments: worst margin {}",
                rep.samples_used, rep.worst_margin
            );
            DrCheckReportJson {
                method: "sampled".into(),
                passes: rep.passes,
                worst: rep.worst_margin,
                samples: rep.samples_used,
            }
        }
    };
    println!(
        "diminishing returns: {}",
        if report.passes { "PASS" } else { "FAIL" }
    );
    let passes = report.passes;
    write_report(cli, &report)?;
    Ok(if passes {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

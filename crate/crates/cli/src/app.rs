//! Command implementations: analyze, stability, verify, export-fixture.
//! Exit codes: 0 success, 1 usage, 2 parse/file, 3 numerical
//! (rank-deficiency or infeasible exclusion).

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use gspp_core::{
    compute_structured_be, default_relative_weights, gepp_solve, gmres, load_fixture, residuals,
    rigal_gaches, stability_report, verify_perturbation, BackwardErrorReport, CandidateSolution,
    Error, FixtureId, GsppSystem, PerturbationSet, StructureCase, Weight, Weights,
};
use serde::{Deserialize, Serialize};

use crate::mm;
use crate::report::{self, num};

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Numerical(String),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) => 1,
            AppError::Parse(_) => 2,
            AppError::Numerical(_) => 3,
        }
    }
}

impl From<mm::MmError> for AppError {
    fn from(e: mm::MmError) -> Self {
        AppError::Parse(e.to_string())
    }
}

impl From<gspp_core::Error> for AppError {
    fn from(e: gspp_core::Error) -> Self {
        match e {
            Error::RankDeficient { .. } | Error::Infeasible { .. } | Error::SingularPivot { .. } => {
                AppError::Numerical(e.to_string())
            }
            other => AppError::Parse(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CaseArg {
    I,
    Ii,
    Iii,
}

impl From<CaseArg> for StructureCase {
    fn from(c: CaseArg) -> Self {
        match c {
            CaseArg::I => StructureCase::CaseI,
            CaseArg::Ii => StructureCase::CaseII,
            CaseArg::Iii => StructureCase::CaseIII,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SparsityArg {
    Preserve,
    Ignore,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Gmres,
    Gepp,
}

#[derive(Debug, Parser)]
#[command(
    name = "gspp",
    about = "Backward-error analysis for generalized saddle point problems",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute unstructured and structured backward errors of a stored
    /// solution against a stored system.
    Analyze(AnalyzeArgs),
    /// Solve a system with a reference solver and classify its backward
    /// stability.
    Stability(StabilityArgs),
    /// Check a stored perturbation set against a system and solution.
    Verify(VerifyArgs),
    /// Write a built-in fixture as Matrix Market files.
    ExportFixture(ExportArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Directory holding E.mtx F.mtx [H.mtx] G.mtx q.mtx r.mtx u.mtx p.mtx
    #[arg(long)]
    pub dir: PathBuf,
    #[arg(long, value_enum)]
    pub case: CaseArg,
    #[arg(long, value_enum, default_value = "both")]
    pub sparsity: SparsityArg,
    /// 'relative' or a JSON weights file
    #[arg(long, default_value = "relative")]
    pub weights: String,
    /// Exclude right-hand-side perturbations when q or r has zero norm
    #[arg(long)]
    pub exclude_zero_rhs: bool,
    /// Write the optimal perturbation blocks under this directory
    #[arg(long)]
    pub emit_perturbations: Option<PathBuf>,
    /// Report path (JSON); stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    /// Built-in fixture: example1, example3, example4
    #[arg(long, conflicts_with = "dir")]
    pub fixture: Option<String>,
    /// Grid parameter for example4 (single value)
    #[arg(long)]
    pub t: Option<usize>,
    /// Inclusive grid range for example4, e.g. 4..8
    #[arg(long, value_name = "A..B")]
    pub t_range: Option<String>,
    /// Directory with system files; the right-hand side [q; r] is solved
    #[arg(long)]
    pub dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub case: Option<CaseArg>,
    #[arg(long, value_enum, default_value = "gmres")]
    pub solver: SolverArg,
    #[arg(long, default_value_t = 1e-11)]
    pub tol: f64,
    #[arg(long)]
    pub maxit: Option<usize>,
    /// Stability threshold; defaults to machine epsilon times the factor
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Scale factor on machine epsilon for the default threshold
    #[arg(long, default_value_t = 100.0)]
    pub threshold_factor: f64,
    #[arg(long, default_value = "relative")]
    pub weights: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Directory with the system and solution files
    #[arg(long)]
    pub dir: PathBuf,
    #[arg(long, value_enum)]
    pub case: CaseArg,
    /// Directory with dE.mtx dF.mtx [dH.mtx] dG.mtx dq.mtx dr.mtx
    #[arg(long)]
    pub perturbations: PathBuf,
    #[arg(long, default_value = "relative")]
    pub weights: String,
    #[arg(long)]
    pub exclude_zero_rhs: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// example1, example3, example4, random
    #[arg(long)]
    pub fixture: String,
    #[arg(long)]
    pub t: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub density: Option<f64>,
    #[arg(long, value_enum)]
    pub case: Option<CaseArg>,
    #[arg(long)]
    pub out: PathBuf,
}

/// JSON weights file: numbers or the string "excluded" per entry; alpha4 only
/// for case (iii).
#[derive(Debug, Serialize, Deserialize)]
struct WeightsFile {
    alpha1: WeightSpec,
    alpha2: WeightSpec,
    alpha3: WeightSpec,
    #[serde(default)]
    alpha4: Option<WeightSpec>,
    beta1: WeightSpec,
    beta2: WeightSpec,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum WeightSpec {
    Value(f64),
    Tag(String),
}

impl WeightSpec {
    fn to_weight(&self, name: &str) -> Result<Weight, AppError> {
        match self {
            WeightSpec::Value(v) => Ok(Weight::Finite(*v)),
            WeightSpec::Tag(s) if s == "excluded" => Ok(Weight::Excluded),
            WeightSpec::Tag(s) => Err(AppError::Parse(format!(
                "weight {}: expected a number or \"excluded\", got \"{}\"",
                name, s
            ))),
        }
    }
}

fn resolve_weights(
    spec: &str,
    system: &GsppSystem,
    exclude_zero_rhs: bool,
) -> Result<Weights, AppError> {
    if spec == "relative" {
        return Ok(default_relative_weights(system, exclude_zero_rhs)?);
    }
    let path = Path::new(spec);
    let text = fs::read_to_string(path)
        .map_err(|e| AppError::Parse(format!("{}: {}", path.display(), e)))?;
    let wf: WeightsFile = serde_json::from_str(&text)
        .map_err(|e| AppError::Parse(format!("{}: {}", path.display(), e)))?;
    let alpha4 = match (&wf.alpha4, system.case()) {
        (Some(w), _) => Some(w.to_weight("alpha4")?),
        (None, StructureCase::CaseIII) => {
            return Err(AppError::Parse(
                "weights file must provide alpha4 for case iii".into(),
            ));
        }
        (None, _) => None,
    };
    let w = Weights {
        alpha1: wf.alpha1.to_weight("alpha1")?,
        alpha2: wf.alpha2.to_weight("alpha2")?,
        alpha3: wf.alpha3.to_weight("alpha3")?,
        alpha4,
        beta1: wf.beta1.to_weight("beta1")?,
        beta2: wf.beta2.to_weight("beta2")?,
    };
    w.validate(system.case())?;
    Ok(w)
}

fn read_system(dir: &Path, case: StructureCase) -> Result<GsppSystem, AppError> {
    let e = mm::read_matrix(&dir.join("E.mtx"))?;
    let f = mm::read_matrix(&dir.join("F.mtx"))?;
    let g = mm::read_matrix(&dir.join("G.mtx"))?;
    let q = mm::read_vector(&dir.join("q.mtx"))?;
    let r = mm::read_vector(&dir.join("r.mtx"))?;
    let h_path = dir.join("H.mtx");
    let system = if h_path.exists() {
        let h = mm::read_matrix(&h_path)?;
        GsppSystem::new(case, e, f, h, g, q, r)?
    } else if case.shares_f() {
        GsppSystem::with_shared_f(case, e, f, g, q, r)?
    } else {
        return Err(AppError::Parse(format!(
            "{}: case iii requires H.mtx",
            dir.display()
        )));
    };
    Ok(system)
}

fn read_solution(dir: &Path, system: &GsppSystem) -> Result<CandidateSolution, AppError> {
    let u = mm::read_vector(&dir.join("u.mtx"))?;
    let p = mm::read_vector(&dir.join("p.mtx"))?;
    let sol = CandidateSolution::new(u, p);
    sol.check_dims(system)?;
    Ok(sol)
}

fn weights_used(w: &Weights) -> report::WeightsUsed {
    report::WeightsUsed {
        alpha1: w.alpha1.value(),
        alpha2: w.alpha2.value(),
        alpha3: w.alpha3.value(),
        alpha4: w.alpha4.map(|a| a.value()),
        beta1: w.beta1.value(),
        beta2: w.beta2.value(),
    }
}

fn write_report<T: Serialize>(out: &Option<PathBuf>, value: &T) -> Result<(), AppError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| AppError::Parse(format!("report serialization failed: {}", e)))?;
    match out {
        Some(path) => {
            mm::write_atomic(path, &(text + "\n"))?;
        }
        None => println!("{}", text),
    }
    Ok(())
}

fn emit_perturbations(
    dir: &Path,
    report: &BackwardErrorReport,
) -> Result<String, AppError> {
    let sub = if report.sparsity_preserved { "sparse" } else { "plain" };
    let target = dir.join(sub);
    fs::create_dir_all(&target)
        .map_err(|e| AppError::Parse(format!("{}: {}", target.display(), e)))?;
    let p = &report.perturbations;
    let herm_e = report.case.hermitian_e();
    let herm_g = report.case.hermitian_g();
    mm::write_matrix(&target.join("dE.mtx"), &p.de, herm_e)?;
    mm::write_matrix(&target.join("dF.mtx"), &p.df, false)?;
    mm::write_matrix(&target.join("dH.mtx"), &p.dh, false)?;
    mm::write_matrix(&target.join("dG.mtx"), &p.dg, herm_g)?;
    mm::write_vector(&target.join("dq.mtx"), &p.dq)?;
    mm::write_vector(&target.join("dr.mtx"), &p.dr)?;
    Ok(target.display().to_string())
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), AppError> {
    let case = args.case.into();
    let system = read_system(&args.dir, case)?;
    let sol = read_solution(&args.dir, &system)?;
    let w = resolve_weights(&args.weights, &system, args.exclude_zero_rhs)?;

    let modes: &[bool] = match args.sparsity {
        SparsityArg::Preserve => &[true],
        SparsityArg::Ignore => &[false],
        SparsityArg::Both => &[true, false],
    };

    let unstructured = rigal_gaches(&system, &sol)?;
    let res_norm = residuals(&system, &sol)?.norm2();

    let mut structured = Vec::new();
    for &preserve in modes {
        let rep = compute_structured_be(&system, &sol, &w, preserve)?;
        let diag = verify_perturbation(&system, &sol, &rep.perturbations, &w)?;
        let pert_dir = match &args.emit_perturbations {
            Some(dir) => Some(emit_perturbations(dir, &rep)?),
            None => None,
        };
        structured.push(report::StructuredResult {
            sparsity_preserved: preserve,
            xi: num(rep.xi),
            weighted_norm_of_perturbations: num(rep.weighted_norm_of_perturbations),
            perturbed_residual_norm: num(rep.perturbed_residual_norm),
            mask_violations: diag.mask_violations,
            hermitian_deviation_e: num(diag.herm_deviation_e),
            hermitian_deviation_g: num(diag.herm_deviation_g),
            perturbation_dir: pert_dir,
        });
    }

    let out = report::AnalyzeReport {
        case: case.to_string(),
        n: system.n(),
        m: system.m(),
        unstructured_be: num(unstructured),
        residual_norm: num(res_norm),
        weights: weights_used(&w),
        structured,
    };
    write_report(&args.out, &out)
}

fn parse_range(spec: &str) -> Result<(usize, usize), AppError> {
    let parts: Vec<&str> = spec.split("..").collect();
    if parts.len() != 2 {
        return Err(AppError::Usage(format!(
            "invalid range '{}', expected A..B",
            spec
        )));
    }
    let a = parts[0]
        .parse()
        .map_err(|_| AppError::Usage(format!("invalid range start '{}'", parts[0])))?;
    let b = parts[1]
        .parse()
        .map_err(|_| AppError::Usage(format!("invalid range end '{}'", parts[1])))?;
    if a > b {
        return Err(AppError::Usage(format!("empty range '{}'", spec)));
    }
    Ok((a, b))
}

fn solve_one(
    system: &GsppSystem,
    solver: SolverArg,
    tol: f64,
    maxit: Option<usize>,
) -> Result<(CandidateSolution, String, usize, bool, Option<f64>), AppError> {
    let f = system.rhs_flat();
    match solver {
        SolverArg::Gmres => {
            let maxit = maxit.unwrap_or(system.n() + system.m());
            let trace = gmres(system, &f, tol, maxit)?;
            let final_res = trace.relative_residual_history.last().copied();
            Ok((
                trace.solution,
                "gmres".into(),
                trace.iterations,
                trace.converged,
                final_res,
            ))
        }
        SolverArg::Gepp => {
            let sol = gepp_solve(system, &f)?;
            Ok((sol, "gepp".into(), 1, true, None))
        }
    }
}

fn stability_row(
    system: &GsppSystem,
    t: Option<usize>,
    args: &StabilityArgs,
    threshold: f64,
) -> Result<report::StabilityRow, AppError> {
    let (sol, solver, iterations, converged, final_res) =
        solve_one(system, args.solver, args.tol, args.maxit)?;
    let w = resolve_weights(&args.weights, system, false)?;
    let rep = stability_report(system, &sol, &w, threshold)?;
    Ok(report::StabilityRow {
        t,
        size: system.n() + system.m(),
        solver,
        iterations,
        converged,
        final_relative_residual: final_res.map(num),
        unstructured_be: num(rep.unstructured),
        structured_be_sparse: num(rep.structured_sparse),
        structured_be_plain: num(rep.structured_plain),
        backward_stable: rep.backward_stable,
        strongly_backward_stable: rep.strongly_backward_stable,
    })
}

pub fn cmd_stability(args: &StabilityArgs) -> Result<(), AppError> {
    let threshold = args
        .threshold
        .unwrap_or(f64::EPSILON * args.threshold_factor);
    let mut rows = Vec::new();
    match (&args.fixture, &args.dir) {
        (Some(name), None) => match name.as_str() {
            "example1" => {
                let fx = load_fixture(FixtureId::Example1)?;
                rows.push(stability_row(&fx.system, None, args, threshold)?);
            }
            "example3" => {
                let fx = load_fixture(FixtureId::Example3)?;
                rows.push(stability_row(&fx.system, None, args, threshold)?);
            }
            "example4" => {
                let ts: Vec<usize> = if let Some(range) = &args.t_range {
                    let (a, b) = parse_range(range)?;
                    (a..=b).collect()
                } else {
                    vec![args.t.ok_or_else(|| {
                        AppError::Usage("example4 requires --t or --t-range".into())
                    })?]
                };
                for t in ts {
                    let fx = load_fixture(FixtureId::Example4 { t })?;
                    rows.push(stability_row(&fx.system, Some(t), args, threshold)?);
                }
            }
            other => {
                return Err(AppError::Usage(format!(
                    "unknown fixture '{}'; expected example1, example3 or example4",
                    other
                )));
            }
        },
        (None, Some(dir)) => {
            let case = args
                .case
                .ok_or_else(|| AppError::Usage("--dir requires --case".into()))?;
            let system = read_system(dir, case.into())?;
            rows.push(stability_row(&system, None, args, threshold)?);
        }
        _ => {
            return Err(AppError::Usage(
                "exactly one of --fixture or --dir is required".into(),
            ));
        }
    }
    let out = report::StabilityReportFile {
        threshold: num(threshold),
        rows,
    };
    write_report(&args.out, &out)
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<(), AppError> {
    let case = args.case.into();
    let system = read_system(&args.dir, case)?;
    let sol = read_solution(&args.dir, &system)?;
    let w = resolve_weights(&args.weights, &system, args.exclude_zero_rhs)?;

    let pdir = &args.perturbations;
    let de = mm::read_matrix(&pdir.join("dE.mtx"))?;
    let df = mm::read_matrix(&pdir.join("dF.mtx"))?;
    let dg = mm::read_matrix(&pdir.join("dG.mtx"))?;
    let dq = mm::read_vector(&pdir.join("dq.mtx"))?;
    let dr = mm::read_vector(&pdir.join("dr.mtx"))?;
    let dh_path = pdir.join("dH.mtx");
    let dh = if dh_path.exists() {
        mm::read_matrix(&dh_path)?
    } else {
        df.clone()
    };
    let p = PerturbationSet {
        de,
        df,
        dh,
        dg,
        dq,
        dr,
    };
    p.check_dims(system.n(), system.m())?;

    let diag = verify_perturbation(&system, &sol, &p, &w)?;
    let out = report::VerifyReport {
        residual_norm: num(diag.residual_norm),
        hermitian_deviation_e: num(diag.herm_deviation_e),
        hermitian_deviation_g: num(diag.herm_deviation_g),
        mask_violations: diag.mask_violations,
        excluded_violations: diag.excluded_violations,
        weighted_norm: num(diag.weighted_norm),
    };
    write_report(&args.out, &out)
}

#[derive(Debug, Serialize)]
struct FixtureMeta {
    name: String,
    case: String,
    n: usize,
    m: usize,
    has_solution: bool,
}

pub fn cmd_export_fixture(args: &ExportArgs) -> Result<(), AppError> {
    let (fixture, name) = match args.fixture.as_str() {
        "example1" => (load_fixture(FixtureId::Example1)?, "example1".to_string()),
        "example3" => (load_fixture(FixtureId::Example3)?, "example3".to_string()),
        "example4" => {
            let t = args
                .t
                .ok_or_else(|| AppError::Usage("example4 requires --t".into()))?;
            (load_fixture(FixtureId::Example4 { t })?, format!("example4_t{}", t))
        }
        "random" => {
            let (seed, n, m, density, case) = match (args.seed, args.n, args.m, args.density, args.case)
            {
                (Some(s), Some(n), Some(m), Some(d), Some(c)) => (s, n, m, d, c),
                _ => {
                    return Err(AppError::Usage(
                        "random fixture requires --seed --n --m --density --case".into(),
                    ));
                }
            };
            (
                load_fixture(FixtureId::RandomSparse {
                    seed,
                    n,
                    m,
                    density,
                    case: case.into(),
                })?,
                format!("random_{}", seed),
            )
        }
        other => {
            return Err(AppError::Usage(format!(
                "unknown fixture '{}'; expected example1, example3, example4 or random",
                other
            )));
        }
    };

    let system = &fixture.system;
    let dir = &args.out;
    fs::create_dir_all(dir).map_err(|e| AppError::Parse(format!("{}: {}", dir.display(), e)))?;
    mm::write_matrix(&dir.join("E.mtx"), system.e(), system.case().hermitian_e())?;
    mm::write_matrix(&dir.join("F.mtx"), system.f(), false)?;
    if !system.case().shares_f() {
        mm::write_matrix(&dir.join("H.mtx"), system.h(), false)?;
    }
    mm::write_matrix(&dir.join("G.mtx"), system.g(), system.case().hermitian_g())?;
    mm::write_vector(&dir.join("q.mtx"), system.q())?;
    mm::write_vector(&dir.join("r.mtx"), system.r())?;
    let solution = fixture.solution.clone().or_else(|| {
        fixture
            .exact_solution
            .clone()
            .map(|x| CandidateSolution::from_flat(&x, system.n()))
    });
    if let Some(sol) = &solution {
        mm::write_vector(&dir.join("u.mtx"), &sol.u)?;
        mm::write_vector(&dir.join("p.mtx"), &sol.p)?;
    }
    let meta = FixtureMeta {
        name,
        case: system.case().to_string(),
        n: system.n(),
        m: system.m(),
        has_solution: solution.is_some(),
    };
    let text = serde_json::to_string_pretty(&meta)
        .map_err(|e| AppError::Parse(format!("metadata serialization failed: {}", e)))?;
    mm::write_atomic(&dir.join("fixture.json"), &(text + "\n"))?;
    Ok(())
}

pub fn run(cli: Cli) -> Result<(), AppError> {
    match &cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Stability(args) => cmd_stability(args),
        Command::Verify(args) => cmd_verify(args),
        Command::ExportFixture(args) => cmd_export_fixture(args),
    }
}

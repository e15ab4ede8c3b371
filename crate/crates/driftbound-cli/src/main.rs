//! `driftbound`: Lyapunov certificates, stationary level sets and moment
//! bounds for reaction-network CTMCs, with a built-in simulation oracle.
//!
//! Exit codes: 0 success (and PASS for `verify`), 1 analysis infeasible or
//! verification FAIL, 2 input error, 3 numerical failure.

use anyhow::{anyhow, Result};
use clap::{Args, Parser, Subcommand};
use driftbound::{
    empirical_mass, empirical_moments, ergodicity_certificate, parse_model, probability_bound,
    shift_for_mass, solve_levelset_problem, solve_moment_problem, AnalysisError, AnalysisOptions,
    LyapunovCertificate, QuadraticForm, ReactionNetwork, RegionD, SimulationConfig, SsaError,
};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_INFEASIBLE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "driftbound",
    about = "Quadratic Lyapunov certificates for reaction-network CTMCs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the level-set problem and report the ergodicity certificate.
    Analyze(AnalyzeArgs),
    /// Shifted level sets with guaranteed stationary mass; optional QV grid.
    Levelset(LevelsetArgs),
    /// Upper bounds on stationary moments.
    Moments(MomentsArgs),
    /// Gillespie simulation; writes samples and prints empirical means.
    Simulate(SimulateArgs),
    /// End to end: solve, shift, simulate, compare certified vs empirical.
    Verify(VerifyArgs),
}

#[derive(Args, Clone)]
struct RegionFlags {
    /// Ball region centre, comma-separated coordinates.
    #[arg(long, value_name = "C1,C2,...")]
    ball: Option<String>,
    /// Squared radius for --ball.
    #[arg(long, value_name = "R2")]
    radius2: Option<f64>,
    /// Box region, one lo:hi pair per axis, comma-separated.
    #[arg(long, value_name = "LO:HI,...")]
    r#box: Option<String>,
    /// Use one S-procedure multiplier per box face pair instead of the
    /// enclosing ball.
    #[arg(long)]
    face_pairs: bool,
}

#[derive(Args, Clone)]
struct SolverFlags {
    /// Solver tolerance (also via DRIFTBOUND_TOL).
    #[arg(long)]
    tol: Option<f64>,
    /// Canonical trace of the reported certificate.
    #[arg(long, default_value_t = 1e-12)]
    trace_scale: f64,
}

#[derive(Args)]
struct AnalyzeArgs {
    model: PathBuf,
    #[command(flatten)]
    region: RegionFlags,
    #[command(flatten)]
    solver: SolverFlags,
    /// Write the certificate JSON (schema 1) to this file.
    #[arg(long, value_name = "FILE")]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct LevelsetArgs {
    model: PathBuf,
    /// Guaranteed stationary masses in (0,1), comma-separated; each level
    /// m yields the shifted set with pi >= m (eps = 1 - m).
    #[arg(long, value_name = "M1,M2,...")]
    mass: String,
    /// Rectangular lattice lo:hi:step per axis for a QV grid export.
    #[arg(long, value_name = "LO:HI:STEP,...")]
    grid: Option<String>,
    /// Output CSV for --grid (default: grid.csv).
    #[arg(long, default_value = "grid.csv")]
    grid_out: PathBuf,
    #[command(flatten)]
    region: RegionFlags,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Args)]
struct MomentsArgs {
    model: PathBuf,
    /// Moment functions, e.g. `m,p,m^2,p^2,m*p` (degree <= 2).
    #[arg(long, value_name = "EXPR,...")]
    f: String,
    #[command(flatten)]
    solver: SolverFlags,
    /// Write the bounds as JSON to this file.
    #[arg(long, value_name = "FILE")]
    json: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SimFlags {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100.0)]
    burnin: f64,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 1.0)]
    dt: f64,
    #[arg(long, default_value_t = 8)]
    trajectories: usize,
    /// Initial state, comma-separated counts (default: all zero).
    #[arg(long, value_name = "X1,X2,...")]
    initial: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    model: PathBuf,
    #[command(flatten)]
    sim: SimFlags,
    /// Sample CSV output path; a JSON config sidecar is written next to it.
    #[arg(long, default_value = "samples.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    model: PathBuf,
    /// Guaranteed stationary mass in (0,1) for the shifted-set check.
    #[arg(long, default_value_t = 0.8)]
    mass: f64,
    /// Verify a previously written certificate file instead of solving.
    #[arg(long, value_name = "FILE")]
    certificate: Option<PathBuf>,
    #[command(flatten)]
    region: RegionFlags,
    #[command(flatten)]
    solver: SolverFlags,
    #[command(flatten)]
    sim: SimFlags,
}

/// Error carrying the process exit code.
struct CmdError {
    code: u8,
    message: String,
}

impl CmdError {
    fn input(message: impl ToString) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.to_string(),
        }
    }
}

type CmdResult = std::result::Result<u8, CmdError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Levelset(a) => cmd_levelset(a),
        Command::Moments(a) => cmd_moments(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn load_model(path: &Path) -> std::result::Result<ReactionNetwork, CmdError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CmdError::input(format!("{}: {e}", path.display())))?;
    parse_model(&text).map_err(|e| CmdError::input(format!("{}:{e}", path.display())))
}

fn parse_floats(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| anyhow!("`{t}`: {e}")))
        .collect()
}

fn region_from_flags(
    flags: &RegionFlags,
    network: &ReactionNetwork,
) -> std::result::Result<RegionD, CmdError> {
    let n = network.dim();
    match (&flags.ball, &flags.r#box) {
        (Some(_), Some(_)) => Err(CmdError::input("--ball and --box are mutually exclusive")),
        (Some(ball), None) => {
            let center = parse_floats(ball).map_err(CmdError::input)?;
            if center.len() != n {
                return Err(CmdError::input(format!(
                    "--ball has {} coordinates, model has {n} species",
                    center.len()
                )));
            }
            let radius2 = flags
                .radius2
                .ok_or_else(|| CmdError::input("--ball requires --radius2"))?;
            if radius2 <= 0.0 {
                return Err(CmdError::input("--radius2 must be positive"));
            }
            Ok(RegionD::ball(&center, radius2))
        }
        (None, Some(bx)) => {
            let mut lower = Vec::new();
            let mut upper = Vec::new();
            for part in bx.split(',') {
                let (lo, hi) = part
                    .split_once(':')
                    .ok_or_else(|| CmdError::input(format!("box axis `{part}` is not lo:hi")))?;
                let lo: f64 = lo.trim().parse().map_err(CmdError::input)?;
                let hi: f64 = hi.trim().parse().map_err(CmdError::input)?;
                if hi <= lo {
                    return Err(CmdError::input(format!("box axis `{part}` is empty")));
                }
                lower.push(lo);
                upper.push(hi);
            }
            if lower.len() != n {
                return Err(CmdError::input(format!(
                    "--box has {} axes, model has {n} species",
                    lower.len()
                )));
            }
            Ok(RegionD::box_region(&lower, &upper))
        }
        (None, None) => Ok(RegionD::default_for(network)),
    }
}

fn analysis_options(flags: &SolverFlags, face_pairs: bool) -> AnalysisOptions {
    let mut opts = AnalysisOptions {
        trace_scale: flags.trace_scale,
        ..AnalysisOptions::default()
    };
    if let Some(t) = flags.tol {
        opts.tolerance = t;
    } else if let Ok(env) = std::env::var("DRIFTBOUND_TOL") {
        if let Ok(t) = env.parse::<f64>() {
            opts.tolerance = t;
        }
    }
    if face_pairs {
        opts.box_mode = driftbound::analysis::BoxMode::FacePairs;
    }
    opts
}

fn solve_cert(
    network: &ReactionNetwork,
    region: &RegionD,
    opts: &AnalysisOptions,
) -> std::result::Result<LyapunovCertificate, CmdError> {
    solve_levelset_problem(network, region, opts).map_err(analysis_err)
}

fn analysis_err(e: AnalysisError) -> CmdError {
    let code = match &e {
        AnalysisError::Infeasible | AnalysisError::CertificationImpossible { .. } => {
            EXIT_INFEASIBLE
        }
        AnalysisError::NumericalFailure(_) => EXIT_NUMERICAL,
        _ => EXIT_INPUT,
    };
    CmdError {
        code,
        message: e.to_string(),
    }
}

fn sim_config(
    flags: &SimFlags,
    network: &ReactionNetwork,
) -> std::result::Result<SimulationConfig, CmdError> {
    let initial = match &flags.initial {
        Some(text) => {
            let vals = parse_floats(text).map_err(CmdError::input)?;
            if vals.len() != network.dim() {
                return Err(CmdError::input("--initial length does not match species"));
            }
            vals.iter().map(|&v| v as i64).collect()
        }
        None => Vec::new(),
    };
    Ok(SimulationConfig {
        seed: flags.seed,
        burn_in: flags.burnin,
        samples: flags.samples,
        dt: flags.dt,
        trajectories: flags.trajectories,
        initial_state: initial,
    })
}

fn ssa_err(e: SsaError) -> CmdError {
    let code = match e {
        SsaError::AbsorbedState { .. } | SsaError::Overflow { .. } => EXIT_NUMERICAL,
        _ => EXIT_INPUT,
    };
    CmdError {
        code,
        message: e.to_string(),
    }
}

fn print_certificate(cert: &LyapunovCertificate, network: &ReactionNetwork) {
    println!("status: optimal");
    println!("b' (max drift)     : {:.6e}", cert.b_prime);
    println!("b = b' + 1         : {:.12}", cert.b());
    println!(
        "pi(C) >= 1/b       : {:.12}  (C = {{x : QV(x) >= -1}})",
        probability_bound(cert)
    );
    match cert.spec.x0.as_ref() {
        Some(x0) => {
            let coords: Vec<String> = cert
                .species
                .iter()
                .zip(x0.iter())
                .map(|(s, v)| format!("{s} = {v:.4}"))
                .collect();
            println!("x0 (centre)        : {}", coords.join(", "));
        }
        None => println!("x0                 : unavailable (R singular); y0 form kept"),
    }
    println!(
        "region             : {}",
        match &cert.region {
            RegionD::Ball { center, radius2 } =>
                format!("ball centre {center:?}, radius^2 {radius2}"),
            RegionD::Box { lower, upper } => format!("box {lower:?} .. {upper:?}"),
        }
    );
    if cert.region_active {
        println!(
            "region margin      : QV <= -{:.3e} outside D (lambda {:?})",
            cert.margin, cert.lambda
        );
    } else {
        println!("region margin      : none (region constraint vacuous for this D)");
    }
    let report = ergodicity_certificate(cert, network);
    println!(
        "ergodicity checks  : psd {}  drift {}  radially-unbounded {}  order-2-eliminated {}",
        ok(report.psd_ok),
        ok(report.drift_ok),
        ok(report.radially_unbounded),
        ok(report.nonlinear_eliminated)
    );
    for d in &report.details {
        println!("  ! {d}");
    }
    println!(
        "solver             : {} iterations, duality gap {:.2e}, tol {:.1e}",
        cert.solver_stats.iterations, cert.solver_stats.duality_gap, cert.tolerances.solver
    );
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAIL"
    }
}

fn cmd_analyze(args: AnalyzeArgs) -> CmdResult {
    let network = load_model(&args.model)?;
    let region = region_from_flags(&args.region, &network)?;
    let opts = analysis_options(&args.solver, args.region.face_pairs);
    let cert = solve_cert(&network, &region, &opts)?;
    print_certificate(&cert, &network);
    if let Some(path) = args.json {
        let json = serde_json::to_string_pretty(&cert.to_json()).expect("serialise");
        fs::write(&path, json).map_err(|e| CmdError::input(format!("{}: {e}", path.display())))?;
        println!("certificate JSON   : {}", path.display());
    }
    Ok(0)
}

fn cmd_levelset(args: LevelsetArgs) -> CmdResult {
    let network = load_model(&args.model)?;
    let region = region_from_flags(&args.region, &network)?;
    let opts = analysis_options(&args.solver, args.region.face_pairs);
    let masses = parse_floats(&args.mass).map_err(CmdError::input)?;
    for &m in &masses {
        if !(m > 0.0 && m < 1.0) {
            return Err(CmdError::input(format!("mass level {m} not in (0,1)")));
        }
    }
    let cert = solve_cert(&network, &region, &opts)?;

    let mut sets = Vec::new();
    for &m in &masses {
        let set = shift_for_mass(&cert, 1.0 - m).map_err(analysis_err)?;
        println!(
            "mass {m}: guaranteed >= {:.3}, delta = {:.12e}, set {{QV >= {:.6e}}}",
            set.guaranteed_mass, set.delta, set.threshold
        );
        match &set.set {
            Some(e) => {
                let center: Vec<String> = e.center.iter().map(|v| format!("{v:.4}")).collect();
                let axes: Vec<String> = e.semi_axes().iter().map(|v| format!("{v:.4}")).collect();
                println!(
                    "  ellipsoid centre ({}), semi-axes ({})",
                    center.join(", "),
                    axes.join(", ")
                );
            }
            None => {
                println!("  set is unbounded in R^n (degenerate quadratic; finite on the orthant)")
            }
        }
        sets.push(set);
    }
    // Nesting sanity: higher guaranteed mass must give the larger set.
    for w in sets.windows(2) {
        if let (Some(a), Some(b)) = (&w[0].set, &w[1].set) {
            let eps_down = w[0].epsilon > w[1].epsilon;
            let grew = b.radius2 > a.radius2;
            if w[0].epsilon != w[1].epsilon && eps_down != grew {
                return Err(CmdError {
                    code: EXIT_NUMERICAL,
                    message: "level sets failed to nest".into(),
                });
            }
        }
    }

    if let Some(grid) = &args.grid {
        let axes: Vec<(f64, f64, f64)> = grid
            .split(',')
            .map(|part| {
                let fields: Vec<&str> = part.split(':').collect();
                if fields.len() != 3 {
                    return Err(CmdError::input(format!(
                        "grid axis `{part}` is not lo:hi:step"
                    )));
                }
                let lo: f64 = fields[0].parse().map_err(CmdError::input)?;
                let hi: f64 = fields[1].parse().map_err(CmdError::input)?;
                let step: f64 = fields[2].parse().map_err(CmdError::input)?;
                if step <= 0.0 || hi < lo {
                    return Err(CmdError::input(format!("grid axis `{part}` is empty")));
                }
                Ok((lo, hi, step))
            })
            .collect::<std::result::Result<_, _>>()?;
        if axes.len() != network.dim() {
            return Err(CmdError::input("grid axis count does not match species"));
        }
        let counts: Vec<usize> = axes
            .iter()
            .map(|&(lo, hi, step)| ((hi - lo) / step).floor() as usize + 1)
            .collect();
        let total: usize = counts.iter().product();
        let mut out = String::new();
        for s in network.species() {
            out.push_str(&s.name);
            out.push(',');
        }
        out.push_str("qv\n");
        let mut idx = vec![0usize; axes.len()];
        for _ in 0..total {
            let x = nalgebra::DVector::from_iterator(
                axes.len(),
                idx.iter()
                    .zip(&axes)
                    .map(|(&i, &(lo, _, step))| lo + i as f64 * step),
            );
            for v in x.iter() {
                out.push_str(&format!("{v},"));
            }
            out.push_str(&format!("{}\n", cert.qv.eval(&x)));
            for k in (0..idx.len()).rev() {
                idx[k] += 1;
                if idx[k] < counts[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        fs::write(&args.grid_out, out)
            .map_err(|e| CmdError::input(format!("{}: {e}", args.grid_out.display())))?;
        println!("grid: {} rows -> {}", total, args.grid_out.display());
    }
    Ok(0)
}

/// Species lookup for moment expressions: exact name first, then a unique
/// case-insensitive match.
fn resolve_species(network: &ReactionNetwork, name: &str) -> Result<usize> {
    if let Some(i) = network.species_index(name) {
        return Ok(i);
    }
    let lower = name.to_lowercase();
    let hits: Vec<usize> = network
        .species()
        .iter()
        .filter(|s| s.name.to_lowercase() == lower)
        .map(|s| s.index)
        .collect();
    match hits.as_slice() {
        [i] => Ok(*i),
        [] => Err(anyhow!("unknown species `{name}`")),
        _ => Err(anyhow!("species name `{name}` is ambiguous")),
    }
}

/// Parse one moment expression: sums of `c`, `c*S`, `S^2`, `S*S'` terms.
fn parse_moment_expr(expr: &str, network: &ReactionNetwork) -> Result<QuadraticForm> {
    let n = network.dim();
    let mut form = QuadraticForm::zero(n);
    for term in expr.split('+') {
        let term = term.trim();
        if term.is_empty() {
            return Err(anyhow!("empty term in `{expr}`"));
        }
        let mut coeff = 1.0;
        let mut species: Vec<usize> = Vec::new();
        for factor in term.split('*') {
            let factor = factor.trim();
            if let Ok(c) = factor.parse::<f64>() {
                coeff *= c;
                continue;
            }
            let (name, power) = match factor.split_once('^') {
                Some((name, pow)) => {
                    let p: u32 = pow
                        .parse()
                        .map_err(|_| anyhow!("bad exponent in `{factor}`"))?;
                    (name.trim(), p)
                }
                None => (factor, 1),
            };
            let idx = resolve_species(network, name)?;
            for _ in 0..power {
                species.push(idx);
            }
        }
        if species.len() > 2 {
            return Err(anyhow!("`{term}` has degree {} (max 2)", species.len()));
        }
        let monomial = match species.as_slice() {
            [] => QuadraticForm::constant(n, 1.0),
            [i] => QuadraticForm::mean(n, *i),
            [i, j] if i == j => QuadraticForm::second_moment(n, *i),
            [i, j] => QuadraticForm::cross_moment(n, *i, *j),
            _ => unreachable!(),
        };
        form = form.add(&monomial.scale(coeff));
    }
    Ok(form)
}

fn cmd_moments(args: MomentsArgs) -> CmdResult {
    let network = load_model(&args.model)?;
    let opts = analysis_options(&args.solver, false);
    let mut rows = Vec::new();
    for expr in args.f.split(',') {
        let expr = expr.trim();
        let f = parse_moment_expr(expr, &network).map_err(CmdError::input)?;
        let bound = solve_moment_problem(&network, &f, &opts).map_err(analysis_err)?;
        println!("pi({expr}) <= {:.6}", bound.bound);
        rows.push(serde_json::json!({ "f": expr, "bound": bound.bound }));
    }
    if let Some(path) = args.json {
        let json = serde_json::to_string_pretty(&serde_json::json!({ "bounds": rows }))
            .expect("serialise");
        fs::write(&path, json).map_err(|e| CmdError::input(format!("{}: {e}", path.display())))?;
    }
    Ok(0)
}

fn cmd_simulate(args: SimulateArgs) -> CmdResult {
    let network = load_model(&args.model)?;
    let config = sim_config(&args.sim, &network)?;
    let samples = driftbound::simulate(&network, &config).map_err(ssa_err)?;

    let names: Vec<String> = network.species().iter().map(|s| s.name.clone()).collect();
    let mut csv = Vec::new();
    samples
        .write_csv(&names, &mut csv)
        .map_err(|e| CmdError::input(e.to_string()))?;
    fs::write(&args.out, csv)
        .map_err(|e| CmdError::input(format!("{}: {e}", args.out.display())))?;
    let sidecar = args.out.with_extension("json");
    fs::write(
        &sidecar,
        serde_json::to_string_pretty(&config).expect("serialise"),
    )
    .map_err(|e| CmdError::input(format!("{}: {e}", sidecar.display())))?;

    println!("samples: {} -> {}", samples.len(), args.out.display());
    for (i, name) in names.iter().enumerate() {
        let est =
            empirical_moments(&samples, &QuadraticForm::mean(network.dim(), i)).map_err(ssa_err)?;
        println!("mean {name}: {:.4} +/- {:.4}", est.estimate, est.std_error);
    }
    Ok(0)
}

fn cmd_verify(args: VerifyArgs) -> CmdResult {
    let network = load_model(&args.model)?;
    if !(args.mass > 0.0 && args.mass < 1.0) {
        return Err(CmdError::input(format!(
            "mass level {} not in (0,1)",
            args.mass
        )));
    }
    let opts = analysis_options(&args.solver, args.region.face_pairs);

    let cert = match &args.certificate {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CmdError::input(format!("{}: {e}", path.display())))?;
            let value: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| CmdError::input(format!("{}: {e}", path.display())))?;
            LyapunovCertificate::from_json(&value).map_err(CmdError::input)?
        }
        None => {
            let region = region_from_flags(&args.region, &network)?;
            solve_cert(&network, &region, &opts)?
        }
    };

    let mut failures: Vec<String> = cert.validate(&network);
    if !failures.is_empty() {
        println!("certificate self-check: FAIL");
        for f in &failures {
            println!("  ! {f}");
        }
        println!("verdict: FAIL");
        return Ok(EXIT_INFEASIBLE);
    }
    println!(
        "certificate self-check: ok (b = {:.9}, margin {:.3e})",
        cert.b(),
        cert.margin
    );

    let shifted = shift_for_mass(&cert, 1.0 - args.mass).map_err(analysis_err)?;
    let config = sim_config(&args.sim, &network)?;
    let samples = driftbound::simulate(&network, &config).map_err(ssa_err)?;

    let mass = empirical_mass(&samples, &cert.qv, shifted.threshold).map_err(ssa_err)?;
    let mass_ok = mass + 1e-12 >= shifted.guaranteed_mass;
    println!(
        "mass   : guaranteed >= {:.4}  empirical {:.4}  {}",
        shifted.guaranteed_mass,
        mass,
        if mass_ok { "PASS" } else { "FAIL" }
    );
    if !mass_ok {
        failures.push("empirical mass below guarantee".into());
    }

    // Moment bounds vs empirical estimates for each mean and second moment.
    let n = network.dim();
    let mut checks: Vec<(String, QuadraticForm)> = Vec::new();
    for (i, s) in network.species().iter().enumerate() {
        checks.push((s.name.clone(), QuadraticForm::mean(n, i)));
        checks.push((format!("{}^2", s.name), QuadraticForm::second_moment(n, i)));
    }
    for (name, f) in checks {
        let bound = match solve_moment_problem(&network, &f, &opts) {
            Ok(b) => b,
            Err(AnalysisError::Infeasible) => {
                println!("moment {name}: no bound (infeasible)");
                continue;
            }
            Err(e) => return Err(analysis_err(e)),
        };
        let est = empirical_moments(&samples, &f).map_err(ssa_err)?;
        let pass = est.estimate - 3.0 * est.std_error <= bound.bound;
        println!(
            "moment {name}: bound {:.4}  empirical {:.4} +/- {:.4}  {}",
            bound.bound,
            est.estimate,
            est.std_error,
            if pass { "PASS" } else { "FAIL" }
        );
        if !pass {
            failures.push(format!("empirical moment {name} exceeds its bound"));
        }
    }

    if failures.is_empty() {
        println!("verdict: PASS");
        Ok(0)
    } else {
        println!("verdict: FAIL");
        Ok(EXIT_INFEASIBLE)
    }
}

//! `sfp` — decay points of monotone gain operators and the Lyapunov
//! constructions built on them.
//!
//! Exit codes: 0 on success, 2 when the algorithm does not converge
//! (refinement exhausted, pivot budget, no decay point), 3 on input or
//! validation errors.

mod ops;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use sfp_core::bench::{run_suite, BenchFamily, SuiteParams};
use sfp_core::euclidean_norm;
use sfp_core::gains::check_small_gain_sampled;
use sfp_core::omega::{iterate_decay, straight_line_violations, OmegaError, OmegaPath};
use sfp_core::opfile::{DecayResultFile, SchemaError};
use sfp_core::solver::{provable_delta, sfp_run_traced, DecayResult, SfpConfig, SfpError};

use ops::OperatorSource;

#[derive(Debug)]
pub enum CliError {
    /// Bad input: files, flags, validation. Exit 3.
    Input(String),
    /// The algorithm ran and did not converge. Exit 2.
    Algorithm(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 3,
            CliError::Algorithm(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(msg) => write!(f, "input error: {msg}"),
            CliError::Algorithm(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<SfpError> for CliError {
    fn from(e: SfpError) -> Self {
        match &e {
            SfpError::RefinementExhausted { .. } | SfpError::PivotBudgetExceeded { .. } => {
                CliError::Algorithm(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<OmegaError> for CliError {
    fn from(e: OmegaError) -> Self {
        match &e {
            OmegaError::NotDecayPoint { .. }
            | OmegaError::NoConvergence { .. }
            | OmegaError::DecreaseStalled { .. } => CliError::Algorithm(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<SchemaError> for CliError {
    fn from(e: SchemaError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(format!("io: {e}"))
    }
}

#[derive(Parser)]
#[command(
    name = "sfp",
    version,
    about = "Decay points of monotone gain operators via a simplicial fixed-point homotopy"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a certified decay point w with Γ_μ(w) ≪ w
    Solve(SolveArgs),
    /// Build the decreasing orbit and the interpolated path from 0 to w
    Path(PathArgs),
    /// Composite Lyapunov value max_i σ_i⁻¹(V_i) for given subsystem values
    Lyap(LyapArgs),
    /// Run benchmark suites with timing and iteration statistics
    Bench(BenchArgs),
    /// Operator diagnostics: irreducibility, sampled small gain, guaranteed grid scale
    Check(CheckArgs),
}

#[derive(Args, Clone)]
struct OperatorArg {
    /// Operator description file, or builtin:bccm-perturbed-3d,
    /// builtin:bccm-chain:N:THETA:ZETA, builtin:qms:N:SEED
    #[arg(long)]
    operator: String,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Target decay-point norm
    #[arg(long)]
    norm: f64,
    /// Override κ_h (default 2·norm)
    #[arg(long)]
    kappa_h: Option<f64>,
    /// Override κ_Γ (default κ_h + 1)
    #[arg(long)]
    kappa_gamma: Option<f64>,
    /// Override κ_0 (default 1)
    #[arg(long)]
    kappa_0: Option<f64>,
    /// Override the initial grid scale δ (default κ_h/N)
    #[arg(long)]
    delta: Option<f64>,
    /// Override the homotopy center, comma-separated
    #[arg(long, value_delimiter = ',')]
    c: Option<Vec<f64>>,
    /// Certificate strictness margin (default 0)
    #[arg(long)]
    dom_margin: Option<f64>,
    #[arg(long)]
    max_refinements: Option<u32>,
    #[arg(long)]
    max_pivots: Option<u64>,
    /// Start from the grid scale with the a-priori convergence guarantee
    /// instead of the default κ_h/N
    #[arg(long)]
    provable_delta: bool,
}

impl ConfigArgs {
    fn build(&self, op: &sfp_core::MonotoneOperator) -> Result<SfpConfig, CliError> {
        let n = op.dim();
        if !(self.norm > 0.0) || !self.norm.is_finite() {
            return Err(CliError::Input(format!(
                "norm must be positive, got {}",
                self.norm
            )));
        }
        let mut cfg = SfpConfig::defaults(self.norm, n);
        if let Some(kappa_h) = self.kappa_h {
            cfg.kappa_h = kappa_h;
            cfg.kappa_gamma = kappa_h + 1.0;
            cfg.c = vec![0.99 * kappa_h / (2.0 * (n as f64).sqrt()); n];
            cfg.delta = kappa_h / n as f64;
        }
        if let Some(kappa_gamma) = self.kappa_gamma {
            cfg.kappa_gamma = kappa_gamma;
        }
        if let Some(kappa_0) = self.kappa_0 {
            cfg.kappa_0 = kappa_0;
        }
        if let Some(delta) = self.delta {
            cfg.delta = delta;
        }
        if let Some(c) = &self.c {
            cfg.c = c.clone();
        }
        if let Some(margin) = self.dom_margin {
            cfg.dom_margin = margin;
        }
        if let Some(r) = self.max_refinements {
            cfg.max_refinements = r;
        }
        if let Some(p) = self.max_pivots {
            cfg.max_pivots_per_level = p;
        }
        // Reject invalid boxes before any computation.
        cfg.validate(n).map_err(|e| CliError::Input(e.to_string()))?;
        if self.provable_delta {
            cfg.delta = provable_delta(op, &cfg)?;
            cfg.validate(n).map_err(|e| CliError::Input(e.to_string()))?;
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    operator: OperatorArg,
    #[command(flatten)]
    config: ConfigArgs,
    /// Output directory (created if missing)
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Stream one JSON record per pivot to <out>/trace.jsonl
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct PathArgs {
    #[command(flatten)]
    operator: OperatorArg,
    /// Reuse the decay point from a previous solve output
    #[arg(long)]
    from_solve: Option<PathBuf>,
    /// Target norm for an inline solve when --from-solve is absent
    #[arg(long)]
    norm: Option<f64>,
    /// Orbit termination threshold ‖Γ_μ^k(w)‖ < tol
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    max_k: usize,
    /// Number of grid points for the path table and the line diagnostic
    #[arg(long, default_value_t = 100)]
    grid_points: usize,
    /// Table format: csv or json
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct LyapArgs {
    #[command(flatten)]
    operator: OperatorArg,
    #[arg(long)]
    from_solve: Option<PathBuf>,
    #[arg(long)]
    norm: Option<f64>,
    /// Subsystem Lyapunov values V_i(x_i), comma-separated
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Optional output file for the evaluation record
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// qms or bccm
    #[arg(long)]
    family: String,
    /// Comma-separated dimensions
    #[arg(long, value_delimiter = ',', required = true)]
    dims: Vec<usize>,
    #[arg(long)]
    trials: u32,
    #[arg(long)]
    norm: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for trial fan-out
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Chain gain parameter θ (bccm family)
    #[arg(long, default_value_t = 0.75)]
    theta: f64,
    /// Chain gain parameter ζ (bccm family; default 60% of the window)
    #[arg(long)]
    zeta: Option<f64>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    operator: OperatorArg,
    #[command(flatten)]
    config: ConfigArgs,
    /// Sample count for the small-gain screen
    #[arg(long, default_value_t = 256)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let outcome = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Path(args) => cmd_path(args),
        Command::Lyap(args) => cmd_lyap(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Check(args) => cmd_check(args),
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("sfp: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn run_solver(
    op: &sfp_core::MonotoneOperator,
    cfg: &SfpConfig,
    trace_path: Option<&Path>,
) -> Result<DecayResult, CliError> {
    match trace_path {
        Some(path) => {
            let mut sink = std::io::BufWriter::new(fs::File::create(path)?);
            let result = sfp_run_traced(op, cfg, Some(&mut sink))?;
            Ok(result)
        }
        None => Ok(sfp_run_traced(op, cfg, None)?),
    }
}

fn cmd_solve(args: SolveArgs) -> Result<i32, CliError> {
    let source = OperatorSource::parse(&args.operator.operator)?;
    let (op, description) = source.load()?;
    // Fail early with the block structure when the coupling graph is not
    // strongly connected.
    if !op.gamma().is_irreducible() {
        return Err(CliError::Input(format!(
            "operator is reducible; strongly connected blocks: {:?}",
            op.gamma().strongly_connected_components()
        )));
    }
    let cfg = args.config.build(&op)?;
    ensure_dir(&args.out)?;
    let trace_path = args.trace.then(|| args.out.join("trace.jsonl"));
    let result = run_solver(&op, &cfg, trace_path.as_deref())?;

    let file = DecayResultFile::new(&result, &cfg, args.config.provable_delta);
    let out_path = args.out.join("decay.json");
    file.write(&out_path)?;

    println!("operator: {description} (N = {})", op.dim());
    println!("decay point w = {:?}", result.w);
    println!("image  Γμ(w) = {:?}", result.gamma_w);
    println!("margins      = {:?}", file.margins);
    println!("‖w‖ = {:.6}", file.norm_w);
    println!(
        "pivots = {}, refinements = {}, final δ = {:.6e}, wall = {:.3} ms",
        result.pivots, result.refinements, result.final_delta, file.wall_ms
    );
    println!("wrote {}", out_path.display());
    if let Some(p) = &trace_path {
        println!("wrote {}", p.display());
    }
    Ok(0)
}

fn obtain_decay_point(
    op: &sfp_core::MonotoneOperator,
    operator_flag: &str,
    from_solve: &Option<PathBuf>,
    norm: Option<f64>,
) -> Result<Vec<f64>, CliError> {
    if let Some(path) = from_solve {
        let file = DecayResultFile::read(path)?;
        if file.w.len() != op.dim() {
            return Err(CliError::Input(format!(
                "decay point in {} has dimension {}, operator {operator_flag} has {}",
                path.display(),
                file.w.len(),
                op.dim()
            )));
        }
        return Ok(file.w);
    }
    let norm = norm.ok_or_else(|| {
        CliError::Input("either --from-solve or --norm is required".into())
    })?;
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(CliError::Input(format!("norm must be positive, got {norm}")));
    }
    let cfg = SfpConfig::defaults(norm, op.dim());
    Ok(sfp_run_traced(op, &cfg, None)?.w)
}

fn write_table(
    path: &Path,
    format: &str,
    header: &[String],
    rows: &[Vec<f64>],
) -> Result<(), CliError> {
    match format {
        "csv" => {
            let mut text = header.join(",");
            text.push('\n');
            for row in rows {
                let cells: Vec<String> = row.iter().map(|x| format!("{x}")).collect();
                text.push_str(&cells.join(","));
                text.push('\n');
            }
            fs::write(path, text)?;
        }
        "json" => {
            let value = serde_json::json!({ "columns": header, "rows": rows });
            fs::write(path, serde_json::to_string_pretty(&value).unwrap())?;
        }
        other => {
            return Err(CliError::Input(format!(
                "unknown format {other:?}, expected csv or json"
            )))
        }
    }
    Ok(())
}

fn cmd_path(args: PathArgs) -> Result<i32, CliError> {
    if args.grid_points == 0 {
        return Err(CliError::Input("grid-points must be positive".into()));
    }
    let source = OperatorSource::parse(&args.operator.operator)?;
    let (op, description) = source.load()?;
    let w = obtain_decay_point(&op, &args.operator.operator, &args.from_solve, args.norm)?;
    let path = iterate_decay(&op, &w, args.tol, args.max_k)?;
    ensure_dir(&args.out)?;
    let ext = if args.format == "json" { "json" } else { "csv" };

    // Raw orbit points.
    let mut header: Vec<String> = vec!["k".into()];
    header.extend((1..=op.dim()).map(|i| format!("x{i}")));
    header.push("norm".into());
    let orbit_rows: Vec<Vec<f64>> = path
        .points()
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let mut row = vec![k as f64];
            row.extend_from_slice(p);
            row.push(euclidean_norm(p));
            row
        })
        .collect();
    let orbit_path = args.out.join(format!("orbit.{ext}"));
    write_table(&orbit_path, &args.format, &header, &orbit_rows)?;

    // Interpolated path over the r-grid, endpoints included.
    let mut header: Vec<String> = vec!["r".into()];
    header.extend((1..=op.dim()).map(|i| format!("sigma{i}")));
    let mut sigma_rows = Vec::with_capacity(args.grid_points + 1);
    for i in 0..=args.grid_points {
        let r = i as f64 / args.grid_points as f64;
        let mut row = vec![r];
        row.extend(path.sigma(r).map_err(|e| CliError::Input(e.to_string()))?);
        sigma_rows.push(row);
    }
    let sigma_path = args.out.join(format!("sigma.{ext}"));
    write_table(&sigma_path, &args.format, &header, &sigma_rows)?;

    // Straight-segment diagnostic on the same grid (t = 0 excluded).
    let grid: Vec<f64> = (1..=args.grid_points)
        .map(|i| i as f64 / args.grid_points as f64)
        .collect();
    let violations = straight_line_violations(&op, &w, &grid)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let line_rows: Vec<Vec<f64>> = grid
        .iter()
        .map(|&t| vec![t, if violations.contains(&t) { 0.0 } else { 1.0 }])
        .collect();
    let line_path = args.out.join(format!("line_check.{ext}"));
    write_table(
        &line_path,
        &args.format,
        &["t".into(), "inside_decay_set".into()],
        &line_rows,
    )?;

    let summary = serde_json::json!({
        "schema": "omega-path/v1",
        "operator": description,
        "w": w,
        "tol": args.tol,
        "k_step": path.k_step(),
        "straight_line_violations": violations,
        "files": {
            "orbit": orbit_path.display().to_string(),
            "sigma": sigma_path.display().to_string(),
            "line_check": line_path.display().to_string(),
        },
    });
    let summary_path = args.out.join("path.json");
    fs::write(&summary_path, serde_json::to_string_pretty(&summary).unwrap())?;

    println!("k_step = {} (‖Γμ^k(w)‖ < {:.1e})", path.k_step(), args.tol);
    println!(
        "straight line from 0 to w leaves the decay set at {} of {} grid points",
        violations.len(),
        grid.len()
    );
    println!("wrote {}", summary_path.display());
    Ok(0)
}

fn cmd_lyap(args: LyapArgs) -> Result<i32, CliError> {
    let source = OperatorSource::parse(&args.operator.operator)?;
    let (op, _) = source.load()?;
    if args.values.len() != op.dim() {
        return Err(CliError::Input(format!(
            "got {} subsystem values for an operator of dimension {}",
            args.values.len(),
            op.dim()
        )));
    }
    let w = obtain_decay_point(&op, &args.operator.operator, &args.from_solve, args.norm)?;
    let path: OmegaPath = iterate_decay(&op, &w, args.tol, 1_000_000)?;
    let value = path
        .lyapunov_value(&args.values)
        .map_err(|e| CliError::Input(e.to_string()))?;
    println!("V = {value:.12}");
    if let Some(out) = &args.out {
        let record = serde_json::json!({
            "schema": "lyapunov-value/v1",
            "w": w,
            "subsystem_values": args.values,
            "value": value,
        });
        fs::write(out, serde_json::to_string_pretty(&record).unwrap())?;
        println!("wrote {}", out.display());
    }
    Ok(0)
}

fn cmd_bench(args: BenchArgs) -> Result<i32, CliError> {
    let family = match args.family.as_str() {
        "qms" => BenchFamily::Qms,
        "bccm" => BenchFamily::Bccm,
        other => {
            return Err(CliError::Input(format!(
                "unknown family {other:?}, expected qms or bccm"
            )))
        }
    };
    if args.trials == 0 {
        return Err(CliError::Input("trials must be positive".into()));
    }
    if args.jobs == 0 {
        return Err(CliError::Input("jobs must be positive".into()));
    }
    let mut params = SuiteParams::new(family, args.dims.clone(), args.trials, args.norm, args.seed);
    params.jobs = args.jobs;
    params.theta = args.theta;
    params.zeta = args.zeta;
    let report = run_suite(&params).map_err(|e| CliError::Input(e.to_string()))?;

    ensure_dir(&args.out)?;
    let table = report.table();
    fs::write(args.out.join("report.txt"), &table)?;
    fs::write(args.out.join("trials.csv"), report.records_csv())?;
    print!("{table}");
    println!("wrote {} and trials.csv", args.out.join("report.txt").display());
    if report.failures() > 0 {
        let mut detail = String::new();
        for r in report.records.iter().filter(|r| r.error.is_some()) {
            let _ = writeln!(
                detail,
                "  dim {} trial {}: {}",
                r.dim,
                r.trial,
                r.error.as_deref().unwrap_or("")
            );
        }
        Err(CliError::Algorithm(format!(
            "{} of {} trials failed\n{detail}",
            report.failures(),
            report.records.len()
        )))
    } else {
        Ok(0)
    }
}

fn cmd_check(args: CheckArgs) -> Result<i32, CliError> {
    let source = OperatorSource::parse(&args.operator.operator)?;
    let (op, description) = source.load()?;
    let cfg = args.config.build(&op)?;
    let n = op.dim();
    println!("operator: {description} (N = {n})");

    let irreducible = op.gamma().is_irreducible();
    println!("irreducible: {}", if irreducible { "yes" } else { "no" });
    if !irreducible {
        println!(
            "  strongly connected blocks: {:?}",
            op.gamma().strongly_connected_components()
        );
    }

    // Sample points with norms spread over the monitored bands.
    let radius = cfg.kappa_gamma + cfg.kappa_0 + cfg.delta;
    let mut rng = ChaCha20Rng::seed_from_u64(args.seed);
    let points: Vec<Vec<f64>> = (0..args.samples.max(1))
        .map(|i| {
            let target = radius * (i + 1) as f64 / args.samples.max(1) as f64;
            let mut direction: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
            let scale = target / euclidean_norm(&direction);
            direction.iter_mut().for_each(|x| *x *= scale);
            direction
        })
        .collect();
    match check_small_gain_sampled(&op, &points).map_err(|e| CliError::Input(e.to_string()))? {
        None => println!(
            "sampled small gain: ok ({} samples, radius ≤ {radius:.3})",
            points.len()
        ),
        Some(witness) => {
            println!("sampled small gain: VIOLATED");
            println!("  witness s     = {:?}", witness.point);
            println!("  image   Γμ(s) = {:?}", witness.image);
        }
    }

    let bound = provable_delta(&op, &cfg)?;
    println!("guaranteed grid scale δ = {bound:.6e} (defaults use δ = {:.6e})", cfg.delta);
    Ok(0)
}

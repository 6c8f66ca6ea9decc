//! Command-line surface: `solve`, `cluster`, `synth`, `rankfig`, `rerun`.
//!
//! Exit codes: 0 success, 1 input/config/numerical error, 2 solver ran to
//! the iteration cap without reaching its tolerance (outputs still
//! written). Every command writes a `*_manifest.txt` with the original
//! argv, a config echo, per-stage wall-clock times, and a trace summary;
//! `arm rerun --manifest <file>` replays the recorded invocation.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;

use crate::affinity::{DEFAULT_ALPHA, DEFAULT_SVD_REL_TOL};
use crate::error::{Error, Result};
use crate::eval::{
    corrupt, generate_subspaces, rank_approx_profile, CorruptionModel, CorruptionSpec,
    SubspaceMode, SubspaceSpec,
};
use crate::io::{load_labels, load_matrix, save_labels, save_matrix, MatrixFormat};
use crate::manifest::RunManifest;
use crate::solver::{solve_arm, solve_lrr_baseline, ErrorModel, SolveResult, SolverConfig};
use crate::spectral::SpectralConfig;
use crate::{cluster_from_representation, clustering_error};

#[derive(Parser)]
#[command(
    name = "arm",
    version,
    about = "Robust subspace clustering via arctangent rank minimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the self-expressive representation of a data matrix.
    Solve(SolveArgs),
    /// Full pipeline: solve, build the affinity graph, run normalized cuts.
    Cluster(ClusterArgs),
    /// Generate synthetic union-of-subspaces data with optional corruption.
    Synth(SynthArgs),
    /// Emit figure data: the surrogate surface or a lambda sweep.
    Rankfig(RankfigArgs),
    /// Replay a previous run from its manifest.
    Rerun(RerunArgs),
}

/// Solver parameters shared by `solve`, `cluster`, and the lambda sweep.
#[derive(Args, Clone)]
struct SolverFlags {
    /// Named parameter set: "motion" (lambda=2, mu0=10, rho=1.05, l21)
    /// or "face" (lambda=1e-5, mu0=1.7, rho=1.03, l1).
    #[arg(long, value_parser = ["motion", "face"])]
    preset: Option<String>,
    /// Residual penalty weight (overrides the preset).
    #[arg(long)]
    lambda: Option<f64>,
    /// Initial penalty mu0.
    #[arg(long)]
    mu0: Option<f64>,
    /// Penalty growth factor per sweep.
    #[arg(long)]
    rho: Option<f64>,
    /// Residual norm: fro, l1, or l21.
    #[arg(long = "error-model")]
    error_model: Option<String>,
    /// Relative feasibility tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Sweep cap.
    #[arg(long = "max-iters")]
    max_iters: Option<usize>,
}

impl SolverFlags {
    fn to_config(&self) -> Result<SolverConfig> {
        let mut cfg = match self.preset.as_deref() {
            None | Some("motion") => SolverConfig::motion(),
            Some("face") => SolverConfig::face(),
            Some(other) => return Err(Error::Config(format!("unknown preset {other:?}"))),
        };
        if let Some(v) = self.lambda {
            cfg.lambda = v;
        }
        if let Some(v) = self.mu0 {
            cfg.mu0 = v;
        }
        if let Some(v) = self.rho {
            cfg.rho = v;
        }
        if let Some(ref v) = self.error_model {
            cfg.error_model = ErrorModel::from_str(v)?;
        }
        if let Some(v) = self.tol {
            cfg.rel_tol = v;
        }
        if let Some(v) = self.max_iters {
            cfg.max_iters = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Input data matrix (columns are samples).
    #[arg(long)]
    input: PathBuf,
    /// Input encoding: csv or mm (MatrixMarket array).
    #[arg(long, default_value = "csv")]
    format: String,
    #[command(flatten)]
    solver: SolverFlags,
    /// arm (arctangent surrogate) or lrr (nuclear-norm baseline).
    #[arg(long, default_value = "arm", value_parser = ["arm", "lrr"])]
    method: String,
    /// Output path prefix; defaults to the input path minus its extension.
    #[arg(long = "out-prefix")]
    out_prefix: Option<PathBuf>,
}

#[derive(Args)]
struct ClusterArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "csv")]
    format: String,
    /// Number of clusters.
    #[arg(long)]
    k: usize,
    #[command(flatten)]
    solver: SolverFlags,
    #[arg(long, default_value = "arm", value_parser = ["arm", "lrr"])]
    method: String,
    /// Affinity sharpening exponent.
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: u32,
    /// Relative singular-value cutoff for the skinny SVD of the
    /// representation.
    #[arg(long = "svd-tol", default_value_t = DEFAULT_SVD_REL_TOL)]
    svd_tol: f64,
    /// Seed for the k-means stage.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// k-means restarts.
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    /// Ground-truth labels; when given, the clustering error is printed.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long = "out-prefix")]
    out_prefix: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Ambient dimension.
    #[arg(long)]
    m: usize,
    /// Number of subspaces.
    #[arg(long)]
    k: usize,
    /// Intrinsic dimension per subspace.
    #[arg(long)]
    dim: usize,
    /// Points per subspace.
    #[arg(long)]
    points: usize,
    /// none, gaussian, sparse, or sample.
    #[arg(long, default_value = "none")]
    corruption: String,
    /// Std-dev (gaussian), entry fraction (sparse), or column fraction
    /// (sample).
    #[arg(long, default_value_t = 0.0)]
    level: f64,
    /// Corruption magnitude (replacement scale).
    #[arg(long, default_value_t = 1.0)]
    magnitude: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// independent or dependent subspace construction.
    #[arg(long, default_value = "independent")]
    mode: String,
    #[arg(long = "out-prefix", default_value = "synth")]
    out_prefix: PathBuf,
}

#[derive(Args)]
struct RankfigArgs {
    /// surface (surrogate grid) or lambda-sweep (error vs lambda).
    #[arg(long, value_parser = ["surface", "lambda-sweep"])]
    mode: String,
    /// Grid upper bound (surface mode).
    #[arg(long = "sigma-max", default_value_t = 20.0)]
    sigma_max: f64,
    /// Grid points per axis (surface mode).
    #[arg(long, default_value_t = 21)]
    steps: usize,
    /// Data matrix for the sweep.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
    /// Ground-truth labels for the sweep (also fixes k).
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Comma-separated lambda values, e.g. "1,1.5,2,2.5,3".
    #[arg(long)]
    lambdas: Option<String>,
    #[command(flatten)]
    solver: SolverFlags,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: u32,
    #[arg(long = "svd-tol", default_value_t = DEFAULT_SVD_REL_TOL)]
    svd_tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Concurrent sweep instances (capped by ARM_NUM_THREADS).
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Output CSV path.
    #[arg(long, default_value = "rankfig.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct RerunArgs {
    /// Manifest written by a previous run.
    #[arg(long)]
    manifest: PathBuf,
}

enum Outcome {
    Success,
    NonConverged,
}

/// Parses `argv` and runs the selected command, returning the process exit
/// code. `argv[0]` is the program name.
pub fn run<I>(argv: I) -> u8
where
    I: IntoIterator,
    I::Item: ToString,
{
    let argv: Vec<String> = argv.into_iter().map(|a| a.to_string()).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return code;
        }
    };
    let command_argv: Vec<String> = argv.iter().skip(1).cloned().collect();
    let outcome = match cli.command {
        Command::Solve(args) => cmd_solve(&args, &command_argv),
        Command::Cluster(args) => cmd_cluster(&args, &command_argv),
        Command::Synth(args) => cmd_synth(&args, &command_argv),
        Command::Rankfig(args) => cmd_rankfig(&args, &command_argv),
        Command::Rerun(args) => return cmd_rerun(&args),
    };
    match outcome {
        Ok(Outcome::Success) => 0,
        Ok(Outcome::NonConverged) => 2,
        Err(err) => {
            eprintln!("error: {err}");
            1
        }
    }
}

fn parse_format(s: &str) -> Result<MatrixFormat> {
    MatrixFormat::from_str(s)
}

fn default_prefix(input: &Path) -> PathBuf {
    input.with_extension("")
}

fn suffixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(suffix);
    prefix.with_file_name(name)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn echo_solver_config(man: &mut RunManifest, cfg: &SolverConfig, method: &str) {
    man.set("method", method);
    man.set("lambda", cfg.lambda);
    man.set("mu0", cfg.mu0);
    man.set("rho", cfg.rho);
    man.set("error_model", cfg.error_model.as_str());
    man.set("rel_tol", cfg.rel_tol);
    man.set("max_iters", cfg.max_iters);
    man.set("dc_tol", cfg.dc.tol);
    man.set("dc_max_iters", cfg.dc.max_iters);
}

fn echo_trace_summary(man: &mut RunManifest, result: &SolveResult) {
    man.set("iterations", result.iterations);
    man.set("converged", result.converged);
    if let Some(last) = result.trace.last() {
        man.set("final_objective", last.objective);
        man.set("final_r1", last.r1);
        man.set("final_r2", last.r2);
        man.set("final_mu", last.mu);
    }
    man.set("dc_iters_total", result.trace.iter().map(|r| r.dc_iters).sum::<usize>());
    man.set("arctan_rank", result.arctan_rank);
    man.set("nuclear_norm", result.nuclear_norm);
    man.set("x_sigma_min", result.x_sigma_min);
    man.set("x_sigma_max", result.x_sigma_max);
}

fn trace_csv(result: &SolveResult) -> String {
    let mut text = String::from("iter,objective,r1,r2,mu,dc_iters\n");
    for r in &result.trace {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{}",
            r.iter, r.objective, r.r1, r.r2, r.mu, r.dc_iters
        );
    }
    text
}

fn solve_with_method(x: &DMatrix<f64>, cfg: &SolverConfig, method: &str) -> Result<SolveResult> {
    match method {
        "arm" => solve_arm(x, cfg),
        "lrr" => solve_lrr_baseline(x, cfg),
        other => Err(Error::Config(format!("unknown method {other:?}"))),
    }
}

fn cmd_solve(args: &SolveArgs, argv: &[String]) -> Result<Outcome> {
    let cfg = args.solver.to_config()?;
    let format = parse_format(&args.format)?;
    let prefix = args
        .out_prefix
        .clone()
        .unwrap_or_else(|| default_prefix(&args.input));

    let t_load = Instant::now();
    let x = load_matrix(&args.input, format)?;
    let load_ms = t_load.elapsed().as_millis();

    let t_solve = Instant::now();
    let result = solve_with_method(&x, &cfg, &args.method)?;
    let solve_ms = t_solve.elapsed().as_millis();

    let t_write = Instant::now();
    let z_path = suffixed(&prefix, "_Z.csv");
    let e_path = suffixed(&prefix, "_E.csv");
    let trace_path = suffixed(&prefix, "_trace.csv");
    save_matrix(&result.z, &z_path, MatrixFormat::Csv)?;
    save_matrix(&result.e, &e_path, MatrixFormat::Csv)?;
    write_text(&trace_path, &trace_csv(&result))?;
    let write_ms = t_write.elapsed().as_millis();

    let mut man = RunManifest::new();
    man.set("command", "solve");
    man.set_argv(argv);
    man.set("input", args.input.display());
    man.set("format", &args.format);
    echo_solver_config(&mut man, &cfg, &args.method);
    man.set("out_z", z_path.display());
    man.set("out_e", e_path.display());
    man.set("out_trace", trace_path.display());
    echo_trace_summary(&mut man, &result);
    man.set("wall_ms_load", load_ms);
    man.set("wall_ms_solve", solve_ms);
    man.set("wall_ms_write", write_ms);
    man.write(&suffixed(&prefix, "_manifest.txt"))?;

    let last = result.trace.last().expect("at least one sweep");
    println!(
        "{} {} in {} sweeps (r1={:.3e}, r2={:.3e}, objective={:.6})",
        args.method,
        if result.converged { "converged" } else { "hit max-iters" },
        result.iterations,
        last.r1,
        last.r2,
        last.objective
    );
    Ok(if result.converged {
        Outcome::Success
    } else {
        Outcome::NonConverged
    })
}

fn cmd_cluster(args: &ClusterArgs, argv: &[String]) -> Result<Outcome> {
    let cfg = args.solver.to_config()?;
    let format = parse_format(&args.format)?;
    let prefix = args
        .out_prefix
        .clone()
        .unwrap_or_else(|| default_prefix(&args.input));
    let spectral = SpectralConfig {
        k: args.k,
        seed: args.seed,
        restarts: args.restarts,
        kmeans_max_iters: 300,
    };

    let t_load = Instant::now();
    let x = load_matrix(&args.input, format)?;
    let truth = args.truth.as_ref().map(|p| load_labels(p)).transpose()?;
    let load_ms = t_load.elapsed().as_millis();

    let t_solve = Instant::now();
    let result = solve_with_method(&x, &cfg, &args.method)?;
    let solve_ms = t_solve.elapsed().as_millis();

    let t_cluster = Instant::now();
    let (w, ncuts_out) =
        cluster_from_representation(&result.z, args.alpha, args.svd_tol, &spectral)?;
    let cluster_ms = t_cluster.elapsed().as_millis();

    let error = truth
        .as_ref()
        .map(|t| clustering_error(&ncuts_out.labels, t))
        .transpose()?;

    let t_write = Instant::now();
    let labels_path = suffixed(&prefix, "_labels.txt");
    let w_path = suffixed(&prefix, "_W.csv");
    save_labels(&ncuts_out.labels, &labels_path)?;
    save_matrix(&w, &w_path, MatrixFormat::Csv)?;
    let write_ms = t_write.elapsed().as_millis();

    let mut man = RunManifest::new();
    man.set("command", "cluster");
    man.set_argv(argv);
    man.set("input", args.input.display());
    man.set("format", &args.format);
    if let Some(t) = &args.truth {
        man.set("truth", t.display());
    }
    echo_solver_config(&mut man, &cfg, &args.method);
    man.set("k", spectral.k);
    man.set("seed", spectral.seed);
    man.set("restarts", spectral.restarts);
    man.set("kmeans_max_iters", spectral.kmeans_max_iters);
    man.set("alpha", args.alpha);
    man.set("svd_tol", args.svd_tol);
    man.set("out_labels", labels_path.display());
    man.set("out_w", w_path.display());
    echo_trace_summary(&mut man, &result);
    man.set("isolated_vertices", ncuts_out.isolated);
    man.set("kmeans_degenerate", ncuts_out.degenerate);
    if let Some(e) = error {
        man.set("clustering_error", e);
    }
    man.set("wall_ms_load", load_ms);
    man.set("wall_ms_solve", solve_ms);
    man.set("wall_ms_cluster", cluster_ms);
    man.set("wall_ms_write", write_ms);
    man.write(&suffixed(&prefix, "_manifest.txt"))?;

    if let Some(e) = error {
        println!("clustering error: {:.2}%", e * 100.0);
    }
    println!(
        "clustered {} samples into {} groups ({})",
        ncuts_out.labels.len(),
        args.k,
        if result.converged { "solver converged" } else { "solver hit max-iters" }
    );
    Ok(if result.converged {
        Outcome::Success
    } else {
        Outcome::NonConverged
    })
}

fn cmd_synth(args: &SynthArgs, argv: &[String]) -> Result<Outcome> {
    let mode = SubspaceMode::from_str(&args.mode)?;
    let spec = SubspaceSpec::uniform(args.m, args.k, args.dim, args.points, args.seed, mode);
    let t_gen = Instant::now();
    let (x_clean, labels) = generate_subspaces(&spec)?;
    let (x, e_true) = if args.corruption == "none" {
        let shape = x_clean.shape();
        (x_clean, DMatrix::zeros(shape.0, shape.1))
    } else {
        let cspec = CorruptionSpec {
            model: CorruptionModel::from_str(&args.corruption)?,
            level: args.level,
            magnitude: args.magnitude,
            seed: args.seed,
        };
        corrupt(&x_clean, &cspec)?
    };
    let gen_ms = t_gen.elapsed().as_millis();

    let t_write = Instant::now();
    let x_path = suffixed(&args.out_prefix, "_X.csv");
    let labels_path = suffixed(&args.out_prefix, "_labels.txt");
    let e_path = suffixed(&args.out_prefix, "_Etrue.csv");
    save_matrix(&x, &x_path, MatrixFormat::Csv)?;
    save_labels(&labels, &labels_path)?;
    save_matrix(&e_true, &e_path, MatrixFormat::Csv)?;
    let write_ms = t_write.elapsed().as_millis();

    let mut man = RunManifest::new();
    man.set("command", "synth");
    man.set_argv(argv);
    man.set("m", args.m);
    man.set("k", args.k);
    man.set("dim", args.dim);
    man.set("points", args.points);
    man.set("corruption", &args.corruption);
    man.set("level", args.level);
    man.set("magnitude", args.magnitude);
    man.set("seed", args.seed);
    man.set("mode", &args.mode);
    man.set("out_x", x_path.display());
    man.set("out_labels", labels_path.display());
    man.set("out_etrue", e_path.display());
    man.set("wall_ms_generate", gen_ms);
    man.set("wall_ms_write", write_ms);
    man.write(&suffixed(&args.out_prefix, "_manifest.txt"))?;

    println!(
        "wrote {} samples in {} dims across {} subspaces",
        labels.len(),
        args.m,
        args.k
    );
    Ok(Outcome::Success)
}

/// Caps `jobs` by the ARM_NUM_THREADS environment variable when set.
fn effective_jobs(requested: usize) -> Result<usize> {
    let requested = requested.max(1);
    match std::env::var("ARM_NUM_THREADS") {
        Ok(raw) => {
            let cap: usize = raw.parse().map_err(|_| {
                Error::Config(format!("ARM_NUM_THREADS must be a positive integer, got {raw:?}"))
            })?;
            if cap == 0 {
                return Err(Error::Config("ARM_NUM_THREADS must be >= 1".into()));
            }
            Ok(requested.min(cap))
        }
        Err(_) => Ok(requested),
    }
}

fn cmd_rankfig(args: &RankfigArgs, argv: &[String]) -> Result<Outcome> {
    match args.mode.as_str() {
        "surface" => rankfig_surface(args, argv),
        "lambda-sweep" => rankfig_sweep(args, argv),
        other => Err(Error::Config(format!("unknown rankfig mode {other:?}"))),
    }
}

fn rankfig_surface(args: &RankfigArgs, argv: &[String]) -> Result<Outcome> {
    let t = Instant::now();
    let rows = rank_approx_profile(args.sigma_max, args.steps)?;
    let mut text = String::from("sigma1,sigma2,rank,arctan_scaled,nuclear\n");
    for r in &rows {
        let _ = writeln!(
            text,
            "{},{},{},{},{}",
            r.sigma1, r.sigma2, r.rank, r.arctan_scaled, r.nuclear
        );
    }
    write_text(&args.out, &text)?;

    let mut man = RunManifest::new();
    man.set("command", "rankfig");
    man.set_argv(argv);
    man.set("mode", "surface");
    man.set("sigma_max", args.sigma_max);
    man.set("steps", args.steps);
    man.set("out", args.out.display());
    man.set("rows", rows.len());
    man.set("wall_ms_total", t.elapsed().as_millis());
    man.write(&suffixed(&args.out.with_extension(""), "_manifest.txt"))?;

    println!("wrote {} grid rows", rows.len());
    Ok(Outcome::Success)
}

fn rankfig_sweep(args: &RankfigArgs, argv: &[String]) -> Result<Outcome> {
    let input = args
        .input
        .as_ref()
        .ok_or_else(|| Error::Config("lambda-sweep requires --input".into()))?;
    let truth_path = args
        .truth
        .as_ref()
        .ok_or_else(|| Error::Config("lambda-sweep requires --truth".into()))?;
    let lambda_list = args
        .lambdas
        .as_ref()
        .ok_or_else(|| Error::Config("lambda-sweep requires --lambdas".into()))?;
    let lambdas: Vec<f64> = lambda_list
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("invalid lambda {tok:?}")))
        })
        .collect::<Result<_>>()?;
    if lambdas.is_empty() {
        return Err(Error::Config("need at least one lambda".into()));
    }
    let base_cfg = args.solver.to_config()?;
    let format = parse_format(&args.format)?;

    let t_load = Instant::now();
    let x = load_matrix(input, format)?;
    let truth = load_labels(truth_path)?;
    if truth.len() != x.ncols() {
        return Err(Error::Dimension(format!(
            "{} truth labels for {} samples",
            truth.len(),
            x.ncols()
        )));
    }
    let load_ms = t_load.elapsed().as_millis();
    let spectral = SpectralConfig {
        k: truth.k(),
        seed: args.seed,
        restarts: 20,
        kmeans_max_iters: 300,
    };

    let jobs = effective_jobs(args.jobs)?;
    let t_sweep = Instant::now();
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<(f64, bool)>>>> =
        Mutex::new((0..lambdas.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(lambdas.len()) {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= lambdas.len() {
                    break;
                }
                let mut cfg = base_cfg.clone();
                cfg.lambda = lambdas[idx];
                let outcome = solve_arm(&x, &cfg).and_then(|result| {
                    let (_, nc) = cluster_from_representation(
                        &result.z,
                        args.alpha,
                        args.svd_tol,
                        &spectral,
                    )?;
                    Ok((clustering_error(&nc.labels, &truth)?, result.converged))
                });
                results.lock().unwrap()[idx] = Some(outcome);
            });
        }
    });
    let sweep_ms = t_sweep.elapsed().as_millis();

    let collected = results.into_inner().unwrap();
    let mut rows = Vec::with_capacity(lambdas.len());
    let mut all_converged = true;
    for (lambda, slot) in lambdas.iter().zip(collected) {
        let (error, converged) = slot.expect("every index visited")?;
        all_converged &= converged;
        rows.push((*lambda, error));
    }

    let mut text = String::from("lambda,clustering_error\n");
    for (lambda, error) in &rows {
        let _ = writeln!(text, "{lambda},{error}");
    }
    write_text(&args.out, &text)?;

    let mut man = RunManifest::new();
    man.set("command", "rankfig");
    man.set_argv(argv);
    man.set("mode", "lambda-sweep");
    man.set("input", input.display());
    man.set("truth", truth_path.display());
    man.set("lambdas", lambda_list);
    echo_solver_config(&mut man, &base_cfg, "arm");
    man.set("k", spectral.k);
    man.set("seed", spectral.seed);
    man.set("alpha", args.alpha);
    man.set("svd_tol", args.svd_tol);
    man.set("jobs", jobs);
    man.set("all_converged", all_converged);
    man.set("out", args.out.display());
    man.set("wall_ms_load", load_ms);
    man.set("wall_ms_sweep", sweep_ms);
    man.write(&suffixed(&args.out.with_extension(""), "_manifest.txt"))?;

    for (lambda, error) in &rows {
        println!("lambda={lambda}: error {:.2}%", error * 100.0);
    }
    Ok(if all_converged {
        Outcome::Success
    } else {
        Outcome::NonConverged
    })
}

fn cmd_rerun(args: &RerunArgs) -> u8 {
    let manifest = match RunManifest::load(&args.manifest) {
        Ok(m) => m,
        Err(err) => {
            eprintln!("error: {err}");
            return 1;
        }
    };
    let argv = match manifest.argv() {
        Ok(argv) => argv,
        Err(err) => {
            eprintln!("error: {err}");
            return 1;
        }
    };
    if argv.first().map(String::as_str) == Some("rerun") {
        eprintln!("error: refusing to replay a rerun manifest");
        return 1;
    }
    let mut full = vec!["arm".to_string()];
    full.extend(argv);
    run(full)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solver_flags_compose_with_presets() {
        let flags = SolverFlags {
            preset: Some("face".into()),
            lambda: Some(0.5),
            mu0: None,
            rho: None,
            error_model: Some("l21".into()),
            tol: None,
            max_iters: Some(40),
        };
        let cfg = flags.to_config().unwrap();
        assert_eq!(cfg.lambda, 0.5); // override wins
        assert_eq!(cfg.mu0, 1.7); // preset survives
        assert_eq!(cfg.error_model, ErrorModel::L21);
        assert_eq!(cfg.max_iters, 40);
    }

    #[test]
    fn suffixed_paths_extend_the_stem() {
        assert_eq!(
            suffixed(Path::new("/tmp/run"), "_Z.csv"),
            PathBuf::from("/tmp/run_Z.csv")
        );
        assert_eq!(default_prefix(Path::new("/tmp/x.csv")), PathBuf::from("/tmp/x"));
    }

    #[test]
    fn bad_flag_values_are_config_errors() {
        let flags = SolverFlags {
            preset: None,
            lambda: Some(-1.0),
            mu0: None,
            rho: None,
            error_model: None,
            tol: None,
            max_iters: None,
        };
        assert!(flags.to_config().is_err());
    }
}

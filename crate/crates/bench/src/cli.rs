//! Subcommands of the `inclusion-bench` binary. Each returns the process exit code:
//! 0 success, 1 configuration error, 2 divergence, 3 failed audit or assertion.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use inclusion_core::algorithms::{Algorithm, AlgorithmConfig, Termination};
use inclusion_core::analysis::{verify_identity_dims, verify_sequence_bound, AuditReport, Identity};
use inclusion_core::certify::{certify_regime, CertifyReport, RegimeProperty, DEFAULT_RADIUS};
use inclusion_core::Regime;
use ndarray::Array1;

use crate::config::{AlgorithmEntry, ExperimentConfig, ProblemSpec};
use crate::error::BenchError;
use crate::experiment::{run_all, AuditKind, RunOutcome};
use crate::output::write_artifacts;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_DIVERGENCE: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;

pub const IDENTITY_DIMS: [usize; 4] = [1, 2, 8, 64];

#[derive(Debug, Parser)]
#[command(name = "inclusion-bench", version, about = "Run, audit and verify single-call splitting methods")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment and write CSV, JSON and SVG artifacts.
    Solve(SolveArgs),
    /// Rerun the EG-versus-RG comparison on the antidiagonal problem.
    Reproduce(ReproduceArgs),
    /// Check the algebraic identities, the sequence bound, or a problem's regime.
    Verify(VerifyArgs),
    /// Run a solver and print the audits that apply to it.
    Audit(AuditArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// JSON experiment configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Problem specification, e.g. `antidiagonal:n=100` or `rotation:L=1,costheta=-0.5`.
    #[arg(long)]
    pub problem: Option<String>,
    /// Algorithm: eg, peg, og, rg or arg.
    #[arg(long)]
    pub algo: Option<String>,
    /// Step size; defaults to the admissible value for OG and ARG, 0.4/L otherwise.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Iteration budget T.
    #[arg(long = "max-iters")]
    pub max_iters: Option<usize>,
    /// Stop once the certified residual is at most this (0 disables).
    #[arg(long)]
    pub eps: Option<f64>,
    /// Output directory for the artifacts.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed recorded with the run.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write every k-th trajectory record to CSV (the last is always kept).
    #[arg(long = "record-every")]
    pub record_every: Option<usize>,
    /// Audits to run (comma separated); `all` selects every applicable audit.
    #[arg(long, value_delimiter = ',')]
    pub audit: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// Problem dimension.
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Iteration budget per run.
    #[arg(long = "max-iters", default_value_t = 100_000)]
    pub max_iters: usize,
    /// Write artifacts here (the accelerated runs go to `<out>/accelerated`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Check both sum-of-squares identities in dimensions 1, 2, 8 and 64.
    #[arg(long)]
    pub identities: bool,
    /// Check the recursion bound on extremal and random sequences.
    #[arg(long = "sequence-bound")]
    pub sequence_bound: bool,
    /// Constant C1 of the recursion.
    #[arg(long, default_value_t = 1.0)]
    pub c1: f64,
    /// Parameter p of the recursion, in (0, 1/3).
    #[arg(long, default_value_t = 0.1)]
    pub p: f64,
    /// Sequence length K.
    #[arg(long, default_value_t = 10_000)]
    pub horizon: usize,
    /// Certify the declared regime of this problem by sampling.
    #[arg(long)]
    pub regime: Option<String>,
    /// Sampling radius for regime certification.
    #[arg(long, default_value_t = DEFAULT_RADIUS)]
    pub radius: f64,
    /// Random trials per check.
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    /// Problem specification, as for `solve`.
    #[arg(long)]
    pub problem: String,
    /// Algorithm: eg, peg, og, rg or arg.
    #[arg(long)]
    pub algo: String,
    /// Step size; same defaults as `solve`.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Iteration budget T.
    #[arg(long = "max-iters", default_value_t = 10_000)]
    pub max_iters: usize,
    /// Stop once the certified residual is at most this.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Audits to run (comma separated); defaults to every applicable audit.
    #[arg(long, value_delimiter = ',')]
    pub audits: Vec<String>,
}

pub fn execute(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Reproduce(a) => reproduce(a),
        Command::Verify(a) => verify(a),
        Command::Audit(a) => audit(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

fn parse_audits(names: &[String], algorithms: &[Algorithm]) -> Result<Vec<AuditKind>, BenchError> {
    if names.iter().any(|n| n == "all") {
        return Ok(AuditKind::ALL
            .into_iter()
            .filter(|a| algorithms.contains(&a.algorithm()))
            .collect());
    }
    names.iter().map(|n| AuditKind::from_name(n)).collect()
}

fn parse_algorithm(name: &str) -> Result<Algorithm, BenchError> {
    Algorithm::from_name(name).map_err(|e| BenchError::config("algo", e.to_string()))
}

/// Merges `--config` with the command-line overrides.
pub fn solve_config(args: &SolveArgs) -> Result<ExperimentConfig, BenchError> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig {
            problem: String::new(),
            algorithms: Vec::new(),
            audits: Vec::new(),
            output_dir: PathBuf::from("out"),
            record_every: 1,
            seed: 0,
        },
    };
    if let Some(p) = &args.problem {
        cfg.problem = p.clone();
    }
    if cfg.problem.is_empty() {
        return Err(BenchError::config("problem", "no problem given (use --problem or a config file)"));
    }
    if let Some(a) = &args.algo {
        cfg.algorithms = vec![AlgorithmEntry::new(parse_algorithm(a)?)];
    }
    for entry in &mut cfg.algorithms {
        if let Some(eta) = args.eta {
            entry.eta = Some(eta);
        }
        if let Some(t) = args.max_iters {
            entry.max_iterations = t;
        }
        if let Some(eps) = args.eps {
            entry.stop_epsilon = eps;
        }
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(r) = args.record_every {
        cfg.record_every = r;
    }
    if !args.audit.is_empty() {
        cfg.audits = args.audit.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_audit(report: &AuditReport) {
    println!(
        "{:<22} {:<4} worst={:+.3e} at={} tol={:.1e}{}",
        report.audit_name,
        if report.passed { "PASS" } else { "FAIL" },
        report.worst_violation,
        report.worst_iteration,
        report.tolerance,
        if report.hypotheses_met { "" } else { " (hypotheses not met)" }
    );
    for note in &report.notes {
        println!("    {note}");
    }
}

fn print_run(run: &RunOutcome) {
    let s = &run.summary;
    println!(
        "{:<4} eta={:<10} iters={:<7} grad_calls={:<7} resolvent_calls={:<7} residual={:.3e} stop={}",
        s.algorithm.name(),
        s.eta,
        s.iterations_used,
        s.gradient_calls,
        s.resolvent_calls,
        s.final_residual,
        s.terminated_by.name()
    );
    for w in &s.warnings {
        println!("    warning: {w}");
    }
}

pub fn solve(args: SolveArgs) -> Result<i32, BenchError> {
    let cfg = solve_config(&args)?;
    let problem = ProblemSpec::parse(&cfg.problem)?.build()?;
    let configs = cfg
        .algorithms
        .iter()
        .map(|e| e.resolve(&problem, cfg.seed))
        .collect::<Result<Vec<_>, _>>()?;
    let algorithms: Vec<Algorithm> = configs.iter().map(|c| c.algorithm).collect();
    let audits = parse_audits(&cfg.audits, &algorithms)?;
    let runs = run_all(&problem, &configs, &audits)?;
    write_artifacts(&cfg.output_dir, &cfg.problem, cfg.seed, cfg.record_every, &runs)?;
    for run in &runs {
        print_run(run);
        run.summary.audits.iter().for_each(print_audit);
    }
    if runs.iter().any(|r| r.summary.terminated_by == Termination::Divergence) {
        return Ok(EXIT_DIVERGENCE);
    }
    if runs.iter().any(|r| !r.summary.audits_passed()) {
        return Ok(EXIT_FAILURE);
    }
    Ok(EXIT_OK)
}

/// Measured outcome of the comparison run by `reproduce`.
#[derive(Debug)]
pub struct Reproduction {
    pub main: Vec<RunOutcome>,
    pub accelerated: RunOutcome,
}

impl Reproduction {
    pub fn find(&self, algorithm: Algorithm, eta: f64) -> Option<&RunOutcome> {
        self.main
            .iter()
            .find(|r| r.summary.algorithm == algorithm && r.summary.eta == eta)
    }

    /// The qualitative claims: RG(0.4) needs fewer gradient calls than EG(0.4),
    /// and RG(0.7) diverges. Returns the failed claims.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        let eg = self.find(Algorithm::Eg, 0.4).expect("EG(0.4) run");
        let rg = self.find(Algorithm::Rg, 0.4).expect("RG(0.4) run");
        let rg_big = self.find(Algorithm::Rg, 0.7).expect("RG(0.7) run");
        for r in [eg, rg] {
            if r.summary.terminated_by != Termination::Epsilon {
                out.push(format!(
                    "{}(eta={}) stopped by {} instead of reaching the tolerance",
                    r.summary.algorithm,
                    r.summary.eta,
                    r.summary.terminated_by.name()
                ));
            }
        }
        if rg.summary.gradient_calls >= eg.summary.gradient_calls {
            out.push(format!(
                "RG(0.4) used {} gradient calls, EG(0.4) used {}",
                rg.summary.gradient_calls, eg.summary.gradient_calls
            ));
        }
        if rg_big.summary.terminated_by != Termination::Divergence {
            out.push(format!("RG(0.7) stopped by {}, expected divergence", rg_big.summary.terminated_by.name()));
        }
        out
    }
}

pub fn run_reproduction(n: usize, max_iters: usize, seed: u64) -> Result<Reproduction, BenchError> {
    let spec = format!("antidiagonal:n={n}");
    let problem = ProblemSpec::parse(&spec)?.build()?;
    let z0 = Array1::ones(n);
    let cfg = |alg, eta, eps| {
        AlgorithmConfig::new(alg, eta, max_iters, Array1::clone(&z0))
            .with_epsilon(eps)
            .with_seed(seed)
    };
    let configs = vec![
        cfg(Algorithm::Eg, 0.4, 1e-3),
        cfg(Algorithm::Rg, 0.4, 1e-3),
        cfg(Algorithm::Eg, 0.7, 1e-3),
        cfg(Algorithm::Rg, 0.7, 1e-3),
        cfg(Algorithm::Arg, 0.5, 1e-2),
    ];
    let mut runs = run_all(&problem, &configs, &[])?;
    let accelerated = runs.pop().expect("five runs");
    Ok(Reproduction { main: runs, accelerated })
}

pub fn reproduce(args: ReproduceArgs) -> Result<i32, BenchError> {
    let rep = run_reproduction(args.n, args.max_iters, args.seed)?;
    println!("antidiagonal n={}, z0 = ones", args.n);
    println!(
        "{:<5} {:>6} {:>8} {:>10} {:>11} {:>15} {:>14} {:>12}",
        "algo", "eta", "eps", "iters", "grad_calls", "resolvent_calls", "terminated", "wall_time_s"
    );
    for r in rep.main.iter().chain(std::iter::once(&rep.accelerated)) {
        let s = &r.summary;
        println!(
            "{:<5} {:>6} {:>8.0e} {:>10} {:>11} {:>15} {:>14} {:>12.6}",
            s.algorithm.name(),
            s.eta,
            s.stop_epsilon,
            s.iterations_used,
            s.gradient_calls,
            s.resolvent_calls,
            s.terminated_by.name(),
            s.wall_time_seconds
        );
    }
    if let Some(out) = &args.out {
        let spec = format!("antidiagonal:n={}", args.n);
        write_artifacts(out, &spec, args.seed, 1, &rep.main)?;
        write_artifacts(&out.join("accelerated"), &spec, args.seed, 1, std::slice::from_ref(&rep.accelerated))?;
    }
    let failures = rep.failures();
    if failures.is_empty() {
        println!("RG(0.4) reaches the tolerance with fewer gradient calls than EG(0.4); RG(0.7) diverges");
        Ok(EXIT_OK)
    } else {
        for f in &failures {
            println!("FAIL: {f}");
        }
        Ok(EXIT_FAILURE)
    }
}

fn print_certify(report: &CertifyReport) {
    println!(
        "{:<22} {:<4} worst_margin={:+.3e} rho={} samples={} tol={:.1e}",
        format!("regime_{}", report.property.name()),
        if report.passed { "PASS" } else { "FAIL" },
        report.worst_margin,
        report.rho,
        report.samples,
        report.tolerance
    );
}

pub fn verify(args: VerifyArgs) -> Result<i32, BenchError> {
    if !args.identities && !args.sequence_bound && args.regime.is_none() {
        return Err(BenchError::config(
            "verify",
            "nothing to verify; pass --identities, --sequence-bound or --regime",
        ));
    }
    let mut ok = true;
    if args.identities {
        for which in [Identity::First, Identity::Second] {
            let r = verify_identity_dims(which, args.trials, &IDENTITY_DIMS, args.seed)?;
            print_audit(&r);
            ok &= r.passed;
        }
    }
    if args.sequence_bound {
        let r = verify_sequence_bound(args.c1, args.p, args.horizon, args.seed)
            .map_err(|e| BenchError::config("p", e.to_string()))?;
        print_audit(&r);
        ok &= r.passed;
    }
    if let Some(spec) = &args.regime {
        let problem = ProblemSpec::parse(spec)?.build()?;
        let mut properties = vec![RegimeProperty::Lipschitz];
        match problem.regime() {
            Regime::Monotone => properties.push(RegimeProperty::Monotone),
            Regime::Comonotone { .. } => {
                properties.extend([RegimeProperty::Comonotone, RegimeProperty::WeakMvi])
            }
            Regime::WeakMvi { .. } => properties.push(RegimeProperty::WeakMvi),
        }
        for property in properties {
            let r = certify_regime(&problem, property, args.trials, args.radius, args.seed)?;
            print_certify(&r);
            ok &= r.passed;
        }
    }
    Ok(if ok { EXIT_OK } else { EXIT_FAILURE })
}

pub fn audit(args: AuditArgs) -> Result<i32, BenchError> {
    let problem = ProblemSpec::parse(&args.problem)?.build()?;
    let algorithm = parse_algorithm(&args.algo)?;
    let mut entry = AlgorithmEntry::new(algorithm);
    entry.eta = args.eta;
    entry.max_iterations = args.max_iters;
    entry.stop_epsilon = args.eps.unwrap_or(0.0);
    let config = entry.resolve(&problem, 0)?;
    let audits = if args.audits.is_empty() {
        AuditKind::for_algorithm(algorithm)
    } else {
        parse_audits(&args.audits, &[algorithm])?
    };
    if let Some(a) = audits.iter().find(|a| a.algorithm() != algorithm) {
        return Err(BenchError::config("audits", format!("`{}` does not apply to {algorithm}", a.name())));
    }
    let runs = run_all(&problem, std::slice::from_ref(&config), &audits)?;
    let run = &runs[0];
    print_run(run);
    run.summary.audits.iter().for_each(print_audit);
    if run.summary.terminated_by == Termination::Divergence {
        return Ok(EXIT_DIVERGENCE);
    }
    Ok(if run.summary.audits_passed() { EXIT_OK } else { EXIT_FAILURE })
}

//! Running solver configurations (concurrently) and attaching audits.

use std::time::Instant;

use inclusion_core::algorithms::{run, Algorithm, AlgorithmConfig, Termination, Trajectory};
use inclusion_core::analysis::{
    self, audit_arg_initial, audit_arg_lower_bound, audit_arg_potential, audit_best_iterate_sums,
    audit_rg_potential, audit_theorem_bound, potential_p, potential_v, AuditReport, Theorem,
};
use inclusion_core::InclusionProblem;
use serde::Serialize;

use crate::error::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditKind {
    RgPotential,
    ArgPotential,
    ArgInitial,
    ArgLowerBound,
    OgThm,
    ArgThm,
    RgThm,
    BestIterateSums,
}

impl AuditKind {
    pub const ALL: [AuditKind; 8] = [
        AuditKind::RgPotential,
        AuditKind::ArgPotential,
        AuditKind::ArgInitial,
        AuditKind::ArgLowerBound,
        AuditKind::OgThm,
        AuditKind::ArgThm,
        AuditKind::RgThm,
        AuditKind::BestIterateSums,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AuditKind::RgPotential => "rg_potential",
            AuditKind::ArgPotential => "arg_potential",
            AuditKind::ArgInitial => "arg_initial",
            AuditKind::ArgLowerBound => "arg_lower_bound",
            AuditKind::OgThm => "og_thm",
            AuditKind::ArgThm => "arg_thm",
            AuditKind::RgThm => "rg_thm",
            AuditKind::BestIterateSums => "best_iterate_sums",
        }
    }

    pub fn from_name(s: &str) -> Result<Self, BenchError> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| BenchError::config("audits", format!("unknown audit `{s}`")))
    }

    pub fn algorithm(self) -> Algorithm {
        match self {
            AuditKind::RgPotential | AuditKind::RgThm | AuditKind::BestIterateSums => Algorithm::Rg,
            AuditKind::ArgPotential | AuditKind::ArgInitial | AuditKind::ArgLowerBound | AuditKind::ArgThm => {
                Algorithm::Arg
            }
            AuditKind::OgThm => Algorithm::Og,
        }
    }

    pub fn run(self, traj: &Trajectory) -> Result<AuditReport, BenchError> {
        let report = match self {
            AuditKind::RgPotential => audit_rg_potential(traj),
            AuditKind::ArgPotential => audit_arg_potential(traj),
            AuditKind::ArgInitial => audit_arg_initial(traj),
            AuditKind::ArgLowerBound => audit_arg_lower_bound(traj),
            AuditKind::OgThm => audit_theorem_bound(traj, Theorem::OgThm),
            AuditKind::ArgThm => audit_theorem_bound(traj, Theorem::ArgThm),
            AuditKind::RgThm => audit_theorem_bound(traj, Theorem::RgThm),
            AuditKind::BestIterateSums => audit_best_iterate_sums(traj),
        }?;
        Ok(report)
    }

    /// Audits that apply to `algorithm`.
    pub fn for_algorithm(algorithm: Algorithm) -> Vec<AuditKind> {
        Self::ALL.into_iter().filter(|a| a.algorithm() == algorithm).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub algorithm: Algorithm,
    pub eta: f64,
    pub max_iterations: usize,
    pub stop_epsilon: f64,
    pub iterations_used: usize,
    pub gradient_calls: u64,
    pub resolvent_calls: u64,
    /// Certified residual at the last record, or the natural residual when none is certified.
    pub final_residual: f64,
    pub wall_time_seconds: f64,
    pub terminated_by: Termination,
    pub fitted_slope: Option<f64>,
    pub audits: Vec<AuditReport>,
    pub warnings: Vec<String>,
}

impl RunSummary {
    pub fn audits_passed(&self) -> bool {
        self.audits.iter().all(|a| a.passed)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: RunSummary,
    pub trajectory: Trajectory,
    /// `P_t` (RG) or `V_t` (ARG) per record, when audits were requested.
    pub potentials: Option<Vec<Option<f64>>>,
}

fn potentials(traj: &Trajectory) -> Option<Vec<Option<f64>>> {
    let f: fn(&Trajectory, usize) -> inclusion_core::Result<f64> = match traj.algorithm() {
        Algorithm::Rg => potential_p,
        Algorithm::Arg => potential_v,
        _ => return None,
    };
    Some((0..traj.records.len()).map(|t| f(traj, t).ok()).collect())
}

/// Slope of the residual curve over the last decade of iterations.
fn fitted_slope(traj: &Trajectory) -> Option<f64> {
    let last = traj.iterations();
    if last < 20 || traj.terminated_by == Termination::Divergence {
        return None;
    }
    analysis::fit_rate(traj, ((last / 10).max(1), last)).ok().map(|f| f.slope)
}

/// Runs one configuration and the requested audits that apply to it.
pub fn run_one(
    problem: &InclusionProblem,
    config: &AlgorithmConfig,
    audits: &[AuditKind],
) -> Result<RunOutcome, BenchError> {
    let start = Instant::now();
    let traj = run(problem, config)?;
    let wall_time_seconds = start.elapsed().as_secs_f64();
    let mut reports = Vec::new();
    for audit in audits.iter().filter(|a| a.algorithm() == config.algorithm) {
        reports.push(audit.run(&traj)?);
    }
    let last = traj.last();
    let summary = RunSummary {
        algorithm: config.algorithm,
        eta: config.eta,
        max_iterations: config.max_iterations,
        stop_epsilon: config.stop_epsilon,
        iterations_used: traj.iterations(),
        gradient_calls: last.gradient_calls,
        resolvent_calls: last.resolvent_calls,
        final_residual: last.residuals.certified.unwrap_or(last.residuals.natural),
        wall_time_seconds,
        terminated_by: traj.terminated_by,
        fitted_slope: fitted_slope(&traj),
        audits: reports,
        warnings: traj.warnings.iter().map(|w| w.to_string()).collect(),
    };
    let potentials = if audits.is_empty() { None } else { potentials(&traj) };
    Ok(RunOutcome {
        summary,
        trajectory: traj,
        potentials,
    })
}

/// Runs every configuration on its own thread; results come back in input order.
pub fn run_all(
    problem: &InclusionProblem,
    configs: &[AlgorithmConfig],
    audits: &[AuditKind],
) -> Result<Vec<RunOutcome>, BenchError> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|cfg| scope.spawn(move || run_one(problem, cfg, audits)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("solver thread panicked"))
            .collect()
    })
}

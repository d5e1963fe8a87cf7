//! EG, PEG, OG, RG and ARG as deterministic step engines, and the `run`
//! driver that turns them into recorded trajectories.

mod steps;
mod stepsize;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::point::{dist, is_finite, norm, Point};
use crate::problem::InclusionProblem;
use crate::residuals::ResidualReport;

pub use steps::{step_arg, step_eg, step_og, step_peg, step_rg, SolverState, StepOutput};
pub use stepsize::{
    arg_condition, arg_rho_bound, og_constant, og_rho_bound, rg_eta_bound, stepsize_arg,
    stepsize_og,
};

/// Iterates whose norm exceeds this end the run as divergent.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Eg,
    Peg,
    Og,
    Rg,
    Arg,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Eg,
        Algorithm::Peg,
        Algorithm::Og,
        Algorithm::Rg,
        Algorithm::Arg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Eg => "eg",
            Algorithm::Peg => "peg",
            Algorithm::Og => "og",
            Algorithm::Rg => "rg",
            Algorithm::Arg => "arg",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown algorithm `{s}`")))
    }

    /// `F` evaluations per iteration.
    pub fn gradient_calls_per_iteration(self) -> u64 {
        match self {
            Algorithm::Eg => 2,
            _ => 1,
        }
    }

    /// Resolvent evaluations per iteration.
    pub fn resolvent_calls_per_iteration(self) -> u64 {
        match self {
            Algorithm::Eg | Algorithm::Peg => 2,
            _ => 1,
        }
    }

    /// `F` evaluations made before the first iteration (`F(z_{-1/2}) = F(z_0)`).
    pub fn initial_gradient_calls(self) -> u64 {
        match self {
            Algorithm::Peg | Algorithm::Og => 1,
            _ => 0,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmConfig {
    pub algorithm: Algorithm,
    pub eta: f64,
    pub max_iterations: usize,
    /// Stop once the certified residual is at most this; 0 disables the rule.
    pub stop_epsilon: f64,
    pub initial_point: Point,
    /// Carried for provenance of artifacts; the solvers themselves are deterministic.
    pub seed: u64,
}

impl AlgorithmConfig {
    pub fn new(algorithm: Algorithm, eta: f64, max_iterations: usize, initial_point: Point) -> Self {
        Self {
            algorithm,
            eta,
            max_iterations,
            stop_epsilon: 0.0,
            initial_point,
            seed: 0,
        }
    }

    pub fn with_epsilon(mut self, eps: f64) -> Self {
        self.stop_epsilon = eps;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "step size must be positive and finite, got {}",
                self.eta
            )));
        }
        if !(self.stop_epsilon >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "stop_epsilon must be nonnegative, got {}",
                self.stop_epsilon
            )));
        }
        if !is_finite(&self.initial_point) {
            return Err(Error::InvalidArgument("initial point has non-finite entries".into()));
        }
        Ok(())
    }
}

/// A step-size or regime condition of the convergence analysis that the
/// configuration does not meet. Runs proceed regardless.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityWarning {
    pub condition: String,
    pub detail: String,
}

impl fmt::Display for AdmissibilityWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.condition, self.detail)
    }
}

fn warning(condition: &str, detail: String) -> AdmissibilityWarning {
    AdmissibilityWarning {
        condition: condition.to_string(),
        detail,
    }
}

/// Checks `eta` against the conditions under which each method's rate is proven.
pub fn check_admissibility(
    problem: &InclusionProblem,
    algorithm: Algorithm,
    eta: f64,
) -> Vec<AdmissibilityWarning> {
    let l = problem.lipschitz();
    let rho = problem.regime().effective_rho();
    let mut out = Vec::new();
    match algorithm {
        Algorithm::Og => {
            if eta >= 1.0 / (2.0 * l) {
                out.push(warning("og_eta", format!("eta = {eta} is not below 1/(2L) = {}", 1.0 / (2.0 * l))));
            }
            let c = og_constant(eta, rho, l);
            if c <= 0.0 {
                out.push(warning("og_constant", format!("C = {c} is not positive")));
            }
            if rho <= og_rho_bound(l) {
                out.push(warning("og_rho", format!("rho = {rho} is not above {}", og_rho_bound(l))));
            }
        }
        Algorithm::Arg => {
            let lhs = arg_condition(eta, rho, l);
            if lhs < 0.0 {
                out.push(warning("arg_eta", format!("step-size condition evaluates to {lhs} < 0")));
            }
            if rho < arg_rho_bound(l) {
                out.push(warning("arg_rho", format!("rho = {rho} is below {}", arg_rho_bound(l))));
            }
        }
        Algorithm::Rg => {
            let bound = rg_eta_bound(l);
            if eta >= bound {
                out.push(warning("rg_eta", format!("eta = {eta} is not below 1/((1+sqrt 2)L) = {bound}")));
            }
            if rho < 0.0 {
                out.push(warning("rg_regime", format!("analysis assumes a monotone problem, rho = {rho}")));
            }
        }
        Algorithm::Eg | Algorithm::Peg => {}
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub t: usize,
    pub z: Point,
    /// `F(z_t)`, evaluated for measurement only (not counted as a call).
    pub fz: Point,
    /// `z_{t+1/2}`; absent on the last record.
    pub z_half: Option<Point>,
    /// `F(z_{t+1/2})`
    pub f_half: Option<Point>,
    /// `c_t ∈ A(z_t)` reconstructed by the update; absent at `t = 0` and for OG.
    pub certificate: Option<Point>,
    /// OG only: the element of `A(z_{t+1/2})` exposed by the resolvent step.
    pub half_certificate: Option<Point>,
    /// At `z_t`, except for OG where every record but the last is measured at
    /// `z_{t+1/2}` with `certified = |z_t - z_{t+1}| / η`.
    pub residuals: ResidualReport,
    /// Cumulative `F` calls spent to reach `z_t`.
    pub gradient_calls: u64,
    /// Cumulative resolvent calls spent to reach `z_t`.
    pub resolvent_calls: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    MaxIterations,
    Epsilon,
    Divergence,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::MaxIterations => "max_iterations",
            Termination::Epsilon => "epsilon",
            Termination::Divergence => "divergence",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub config: AlgorithmConfig,
    pub problem: InclusionProblem,
    pub records: Vec<TrajectoryRecord>,
    pub terminated_by: Termination,
    pub warnings: Vec<AdmissibilityWarning>,
}

impl Trajectory {
    pub fn algorithm(&self) -> Algorithm {
        self.config.algorithm
    }

    pub fn eta(&self) -> f64 {
        self.config.eta
    }

    pub fn iterations(&self) -> usize {
        self.records.len() - 1
    }

    pub fn last(&self) -> &TrajectoryRecord {
        self.records.last().expect("a trajectory has at least one record")
    }

    /// The residual the stopping rule looks at.
    pub fn stop_residual(&self, t: usize) -> Option<f64> {
        self.records.get(t).and_then(|r| r.residuals.certified)
    }
}

fn diverged(z: &Point) -> bool {
    !is_finite(z) || norm(z) > DIVERGENCE_THRESHOLD
}

fn initial_record(problem: &InclusionProblem, state: &SolverState) -> Result<TrajectoryRecord> {
    let fz = problem.evaluate(&state.z)?;
    let residuals = ResidualReport::evaluate(problem, &state.z, &fz, None)?;
    Ok(TrajectoryRecord {
        t: 0,
        z: state.z.clone(),
        fz,
        z_half: None,
        f_half: None,
        certificate: None,
        half_certificate: None,
        residuals,
        gradient_calls: state.gradient_calls,
        resolvent_calls: state.resolvent_calls,
    })
}

/// Iterates until `max_iterations`, the stopping tolerance, or divergence.
pub fn run(problem: &InclusionProblem, config: &AlgorithmConfig) -> Result<Trajectory> {
    config.validate()?;
    check_dim(problem.dim(), config.initial_point.len())?;
    let warnings = check_admissibility(problem, config.algorithm, config.eta);
    let is_og = config.algorithm == Algorithm::Og;
    let eps = config.stop_epsilon;
    let stop = |r: &TrajectoryRecord| eps > 0.0 && r.residuals.certified.is_some_and(|v| v <= eps);

    let mut state = SolverState::new(problem, config.algorithm, config.eta, config.initial_point.clone())?;
    let mut records = vec![initial_record(problem, &state)?];
    let mut terminated_by = Termination::MaxIterations;
    if !is_og && stop(&records[0]) {
        terminated_by = Termination::Epsilon;
    }

    while terminated_by == Termination::MaxIterations && state.t < config.max_iterations {
        let out = state.step(problem)?;
        let prev = records.last_mut().expect("nonempty");
        prev.z_half = Some(out.z_half.clone());
        prev.f_half = Some(out.f_half.clone());
        if is_og {
            let a = out.half_certificate.as_ref().expect("OG exposes a half-point certificate");
            let mut residuals = ResidualReport::evaluate(problem, &out.z_half, &out.f_half, Some(a))?;
            residuals.certified = Some(dist(&prev.z, &out.z_next) / config.eta);
            prev.residuals = residuals;
            prev.half_certificate = out.half_certificate.clone();
        }
        let og_stop = is_og && stop(prev);

        if diverged(&out.z_next) {
            terminated_by = Termination::Divergence;
        }
        let fz = problem.evaluate(&out.z_next)?;
        let residuals = if terminated_by == Termination::Divergence {
            ResidualReport {
                natural: f64::INFINITY,
                forward_backward: f64::INFINITY,
                fb_alpha: crate::residuals::DEFAULT_FB_ALPHA,
                tangent_exact: None,
                certified: None,
            }
        } else {
            ResidualReport::evaluate(problem, &out.z_next, &fz, out.certificate.as_ref())?
        };
        records.push(TrajectoryRecord {
            t: state.t,
            z: out.z_next,
            fz,
            z_half: None,
            f_half: None,
            certificate: out.certificate,
            half_certificate: None,
            residuals,
            gradient_calls: state.gradient_calls,
            resolvent_calls: state.resolvent_calls,
        });
        if terminated_by == Termination::MaxIterations
            && (og_stop || (!is_og && stop(records.last().expect("nonempty"))))
        {
            terminated_by = Termination::Epsilon;
        }
    }

    Ok(Trajectory {
        config: config.clone(),
        problem: problem.clone(),
        records,
        terminated_by,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{MaximalMonotoneOperator, SingleValuedOperator};
    use crate::problem::{make_antidiagonal_problem, make_bilinear_box_problem, Regime};
    use crate::residuals::certified_residual;
    use ndarray::{array, Array1};

    #[test]
    fn zero_iterations_gives_initial_record() {
        let p = make_antidiagonal_problem(4).unwrap();
        for alg in Algorithm::ALL {
            let cfg = AlgorithmConfig::new(alg, 0.1, 0, Array1::ones(4));
            let traj = run(&p, &cfg).unwrap();
            assert_eq!(traj.records.len(), 1);
            assert_eq!(traj.terminated_by, Termination::MaxIterations);
        }
    }

    #[test]
    fn stationary_at_solution() {
        let p = make_antidiagonal_problem(6).unwrap();
        for alg in Algorithm::ALL {
            let cfg = AlgorithmConfig::new(alg, 0.2, 25, Array1::zeros(6));
            let traj = run(&p, &cfg).unwrap();
            assert!(traj.records.iter().all(|r| r.z == Array1::<f64>::zeros(6)), "{alg}");
        }
    }

    #[test]
    fn call_counts() {
        let p = make_bilinear_box_problem(4, 1.0).unwrap();
        let t = 37;
        for alg in Algorithm::ALL {
            let cfg = AlgorithmConfig::new(alg, 0.2, t, Array1::from_elem(4, 0.7));
            let traj = run(&p, &cfg).unwrap();
            for w in traj.records.windows(2) {
                assert_eq!(w[1].gradient_calls - w[0].gradient_calls, alg.gradient_calls_per_iteration());
                assert_eq!(w[1].resolvent_calls - w[0].resolvent_calls, alg.resolvent_calls_per_iteration());
            }
            let last = traj.last();
            let init = alg.initial_gradient_calls();
            assert_eq!(last.gradient_calls, init + t as u64 * alg.gradient_calls_per_iteration());
            assert_eq!(last.resolvent_calls, t as u64 * alg.resolvent_calls_per_iteration());
        }
    }

    #[test]
    fn deterministic() {
        let p = make_antidiagonal_problem(10).unwrap();
        for alg in Algorithm::ALL {
            let cfg = AlgorithmConfig::new(alg, 0.1, 200, Array1::ones(10));
            let a = run(&p, &cfg).unwrap();
            let b = run(&p, &cfg).unwrap();
            assert_eq!(a.records, b.records);
        }
    }

    #[test]
    fn certificates_lie_in_normal_cone() {
        let p = make_bilinear_box_problem(4, 1.0).unwrap();
        let set = p.monotone_part().feasible_set().unwrap().clone();
        for alg in [Algorithm::Rg, Algorithm::Arg, Algorithm::Eg, Algorithm::Peg] {
            let cfg = AlgorithmConfig::new(alg, 0.3, 300, array![1.0, 0.5, -0.8, 1.0]);
            let traj = run(&p, &cfg).unwrap();
            for r in &traj.records[1..] {
                let c = r.certificate.as_ref().unwrap();
                assert!(set.normal_cone_contains(&r.z, c, 1e-10).unwrap(), "{alg} t={}", r.t);
            }
        }
    }

    #[test]
    fn og_key_observation() {
        let p = make_bilinear_box_problem(2, 1.0).unwrap();
        let eta = 0.25;
        let cfg = AlgorithmConfig::new(Algorithm::Og, eta, 500, array![1.0, 1.0]);
        let traj = run(&p, &cfg).unwrap();
        for w in traj.records.windows(2) {
            let lhs = dist(&w[0].z, &w[1].z) / eta;
            let a = w[0].half_certificate.as_ref().unwrap();
            let rhs = certified_residual(w[0].f_half.as_ref().unwrap(), a).unwrap();
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1.0), "t={} {lhs} {rhs}", w[0].t);
        }
    }

    #[test]
    fn epsilon_stop() {
        let p = make_antidiagonal_problem(100).unwrap();
        let cfg = AlgorithmConfig::new(Algorithm::Rg, 0.4, 10_000, Array1::ones(100)).with_epsilon(1e-3);
        let traj = run(&p, &cfg).unwrap();
        assert_eq!(traj.terminated_by, Termination::Epsilon);
        assert!(traj.last().residuals.certified.unwrap() <= 1e-3);
        assert!(traj.records[..traj.records.len() - 1]
            .iter()
            .all(|r| r.residuals.certified.unwrap() > 1e-3));
    }

    #[test]
    fn rg_large_step_warns_and_diverges() {
        let p = make_antidiagonal_problem(100).unwrap();
        let cfg = AlgorithmConfig::new(Algorithm::Rg, 1.0, 10_000, Array1::ones(100));
        let traj = run(&p, &cfg).unwrap();
        assert!(traj.warnings.iter().any(|w| w.condition == "rg_eta"));
        let cfg = AlgorithmConfig::new(Algorithm::Rg, 0.7, 10_000, Array1::ones(100)).with_epsilon(1e-3);
        let traj = run(&p, &cfg).unwrap();
        assert_eq!(traj.terminated_by, Termination::Divergence);
        assert!(traj.records.len() <= 10_001);
    }

    #[test]
    fn admissible_steps_have_no_warnings() {
        let p = make_antidiagonal_problem(4).unwrap();
        assert!(check_admissibility(&p, Algorithm::Og, stepsize_og(1.0, 0.0).unwrap()).is_empty());
        assert!(check_admissibility(&p, Algorithm::Arg, 1.0 / 12.0).is_empty());
        assert!(check_admissibility(&p, Algorithm::Rg, 0.4).is_empty());
        assert!(!check_admissibility(&p, Algorithm::Og, 0.6).is_empty());
    }

    #[test]
    fn rejects_bad_config() {
        let p = make_antidiagonal_problem(4).unwrap();
        assert!(run(&p, &AlgorithmConfig::new(Algorithm::Eg, 0.0, 5, Array1::ones(4))).is_err());
        assert!(matches!(
            run(&p, &AlgorithmConfig::new(Algorithm::Eg, 0.1, 5, Array1::ones(3))),
            Err(Error::DimensionMismatch { .. })
        ));
        let f = SingleValuedOperator::identity(1);
        let q = crate::problem::InclusionProblem::new("id", f, MaximalMonotoneOperator::Zero, Regime::Monotone).unwrap();
        let cfg = AlgorithmConfig::new(Algorithm::Eg, 0.1, 5, array![f64::NAN]);
        assert!(run(&q, &cfg).is_err());
    }

    #[test]
    fn algorithm_names_round_trip() {
        for alg in Algorithm::ALL {
            assert_eq!(Algorithm::from_name(alg.name()).unwrap(), alg);
        }
        assert!(Algorithm::from_name("feg").is_err());
    }
}

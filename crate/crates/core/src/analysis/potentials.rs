//! The RG potential `P_t`, the ARG potential `V_t`, and the per-iteration
//! inequalities they satisfy.

use crate::algorithms::{arg_condition, rg_eta_bound, Algorithm, Trajectory};
use crate::error::{Error, Result};
use crate::operators::MaximalMonotoneOperator;
use crate::point::{dist, dist_sq, dot, norm_sq, Point};
use crate::problem::Regime;

use super::{constants, AuditReport, Tracker, AUDIT_RTOL};

pub(crate) fn expect_algorithm(traj: &Trajectory, expected: Algorithm) -> Result<()> {
    if traj.algorithm() == expected {
        Ok(())
    } else {
        Err(Error::WrongAlgorithm {
            expected: expected.name().into(),
            found: traj.algorithm().name().into(),
        })
    }
}

fn check_index(traj: &Trajectory, t: usize) -> Result<()> {
    if t == 0 || t >= traj.records.len() {
        return Err(Error::InvalidArgument(format!(
            "potential index {t} outside 1..={}",
            traj.records.len().saturating_sub(1)
        )));
    }
    Ok(())
}

/// `(F(z_t) + c_t, F(z_t) - F(z_{t-1/2}))` from the records.
fn parts(traj: &Trajectory, t: usize) -> (Point, Point) {
    let rec = &traj.records[t];
    let c = rec.certificate.as_ref().expect("records after t = 0 carry c_t");
    let f_prev = traj.records[t - 1].f_half.as_ref().expect("z_{t-1/2} was recorded");
    (&rec.fz + c, &rec.fz - f_prev)
}

/// `P_t = |F(z_t) + c_t|^2 + |F(z_t) - F(z_{t-1/2})|^2` for an RG trajectory.
pub fn potential_p(traj: &Trajectory, t: usize) -> Result<f64> {
    expect_algorithm(traj, Algorithm::Rg)?;
    check_index(traj, t)?;
    let (r, d) = parts(traj, t);
    Ok(norm_sq(&r) + norm_sq(&d))
}

/// `V_t = t(t+1)/2 (|η(F(z_t)+c_t)|^2 + |η(F(z_t) - F(z_{t-1/2}))|^2) + t<η(F(z_t)+c_t), z_t - z_0>`
/// for an ARG trajectory.
pub fn potential_v(traj: &Trajectory, t: usize) -> Result<f64> {
    expect_algorithm(traj, Algorithm::Arg)?;
    check_index(traj, t)?;
    let eta = traj.eta();
    let (r, d) = parts(traj, t);
    let (r, d) = (r * eta, d * eta);
    let tf = t as f64;
    let dz = &traj.records[t].z - &traj.records[0].z;
    Ok(tf * (tf + 1.0) / 2.0 * (norm_sq(&r) + norm_sq(&d)) + tf * dot(&r, &dz))
}

fn scaled_residual_sq(traj: &Trajectory, t: usize) -> f64 {
    let (r, _) = parts(traj, t);
    traj.eta() * traj.eta() * norm_sq(&r)
}

fn is_cone_or_zero(a: &MaximalMonotoneOperator) -> bool {
    a.is_zero() || a.feasible_set().is_some()
}

/// Checks `P_{t+1} <= P_t` for every `t >= 1` with slack `1e-9 max(1, P_1)`.
pub fn audit_rg_potential(traj: &Trajectory) -> Result<AuditReport> {
    expect_algorithm(traj, Algorithm::Rg)?;
    let problem = &traj.problem;
    let (eta, l) = (traj.eta(), problem.lipschitz());
    let mut notes = Vec::new();
    let monotone = problem.regime().rho() >= 0.0 && !matches!(problem.regime(), Regime::WeakMvi { .. });
    if !monotone {
        notes.push(format!("regime mismatch: {} problem, decrease assumes monotone", problem.regime().name()));
    }
    if eta >= rg_eta_bound(l) {
        notes.push(format!("step {eta} is not below 1/((1+sqrt 2)L)"));
    }
    if !is_cone_or_zero(problem.monotone_part()) {
        notes.push("decrease is only guaranteed for variational inequalities".into());
    }
    let hypotheses_met = notes.is_empty();

    let n = traj.records.len();
    let p1 = if n > 1 { potential_p(traj, 1)? } else { 0.0 };
    let tolerance = AUDIT_RTOL * p1.max(1.0);
    let mut tracker = Tracker::new();
    let mut prev = p1;
    for t in 2..n {
        let p = potential_p(traj, t)?;
        tracker.observe(p - prev, t - 1);
        prev = p;
    }
    Ok(tracker.finish(
        "rg_potential",
        tolerance,
        constants([("P1", p1), ("eta", eta), ("L", l)]),
        hypotheses_met,
        notes,
    ))
}

fn arg_hypotheses(traj: &Trajectory) -> (bool, Vec<String>) {
    let problem = &traj.problem;
    let rho = problem.regime().effective_rho();
    let mut notes = Vec::new();
    if matches!(problem.regime(), Regime::WeakMvi { .. }) {
        notes.push("regime mismatch: weak MVI problem, decrease assumes comonotone".into());
    }
    let lhs = arg_condition(traj.eta(), rho, problem.lipschitz());
    if lhs < 0.0 {
        notes.push(format!("step-size condition fails ({lhs})"));
    }
    (notes.is_empty(), notes)
}

/// Checks `V_{t+1} <= V_t + |η(F(z_{t+1}) + c_{t+1})|^2 / 8` for every `t >= 1`
/// with slack `1e-9 max(1, |V_1|)`.
pub fn audit_arg_potential(traj: &Trajectory) -> Result<AuditReport> {
    expect_algorithm(traj, Algorithm::Arg)?;
    let (hypotheses_met, notes) = arg_hypotheses(traj);
    let n = traj.records.len();
    let v1 = if n > 1 { potential_v(traj, 1)? } else { 0.0 };
    let tolerance = AUDIT_RTOL * v1.abs().max(1.0);
    let mut tracker = Tracker::new();
    let mut prev = v1;
    for t in 2..n {
        let v = potential_v(traj, t)?;
        tracker.observe(v - prev - scaled_residual_sq(traj, t) / 8.0, t - 1);
        prev = v;
    }
    let rho = traj.problem.regime().effective_rho();
    Ok(tracker.finish(
        "arg_potential",
        tolerance,
        constants([("V1", v1), ("eta", traj.eta()), ("rho_over_eta", rho / traj.eta())]),
        hypotheses_met,
        notes,
    ))
}

/// The three bounds on the first ARG step:
/// `|z_1 - z_0| <= η r_tan(z_0)` (when the tangent residual is available),
/// `|η(F(z_1) + c_1)| <= (1 + ηL)|z_1 - z_0|` and `V_1 <= 4|z_1 - z_0|^2`,
/// each with absolute slack 1e-10.
pub fn audit_arg_initial(traj: &Trajectory) -> Result<AuditReport> {
    expect_algorithm(traj, Algorithm::Arg)?;
    let (hypotheses_met, mut notes) = arg_hypotheses(traj);
    let tolerance = 1e-10;
    let mut tracker = Tracker::new();
    if traj.records.len() < 2 {
        notes.push("no iterations recorded".into());
        return Ok(tracker.finish("arg_initial", tolerance, Default::default(), hypotheses_met, notes));
    }
    let eta = traj.eta();
    let l = traj.problem.lipschitz();
    let step = dist(&traj.records[1].z, &traj.records[0].z);
    match traj.records[0].residuals.tangent_exact {
        Some(r_tan) => tracker.observe(step - eta * r_tan, 0),
        None => notes.push("tangent residual unavailable at z_0; first bound skipped".into()),
    }
    tracker.observe(scaled_residual_sq(traj, 1).sqrt() - (1.0 + eta * l) * step, 1);
    let v1 = potential_v(traj, 1)?;
    tracker.observe(v1 - 4.0 * step * step, 1);
    Ok(tracker.finish(
        "arg_initial",
        tolerance,
        constants([("V1", v1), ("step", step), ("eta", eta), ("L", l)]),
        hypotheses_met,
        notes,
    ))
}

/// Checks `t(t+1/2)/4 |η(F(z_t) + c_t)|^2 <= V_t + |z* - z_0|^2` for every
/// `t >= 1`; margins are divided by `max(1, |rhs|)` and compared against 1e-9.
pub fn audit_arg_lower_bound(traj: &Trajectory) -> Result<AuditReport> {
    expect_algorithm(traj, Algorithm::Arg)?;
    let z_star = traj.problem.known_solution().ok_or(Error::MissingSolution)?;
    let (hypotheses_met, notes) = arg_hypotheses(traj);
    let h = dist_sq(z_star, &traj.records[0].z);
    let mut tracker = Tracker::new();
    for t in 1..traj.records.len() {
        let tf = t as f64;
        let lhs = tf * (tf + 0.5) / 4.0 * scaled_residual_sq(traj, t);
        let rhs = potential_v(traj, t)? + h;
        tracker.observe((lhs - rhs) / rhs.abs().max(1.0), t);
    }
    Ok(tracker.finish(
        "arg_lower_bound",
        AUDIT_RTOL,
        constants([("dist0_sq", h), ("eta", traj.eta())]),
        hypotheses_met,
        notes,
    ))
}

/// `|z_t - z_{t-1}|` for `t >= 1`; used by the best-iterate sums.
pub(crate) fn step_length(traj: &Trajectory, t: usize) -> f64 {
    dist(&traj.records[t].z, &traj.records[t - 1].z)
}

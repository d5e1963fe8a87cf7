//! One-iteration step engines.
//!
//! Each `step_*` advances a [`SolverState`] from `z_t` to `z_{t+1}` and
//! returns the intermediate point along with the certificate the update
//! produces for free: an element of `A` at the new point (or, for OG, at the
//! half point). Calls to `F` and to the resolvent are counted on the state.

use crate::error::{check_dim, Result};
use crate::point::{axpy, Point};
use crate::problem::InclusionProblem;

use super::Algorithm;

#[derive(Debug, Clone)]
pub struct SolverState {
    pub algorithm: Algorithm,
    pub eta: f64,
    /// Index of the current iterate `z`.
    pub t: usize,
    pub z0: Point,
    pub z: Point,
    /// `z_{t-1}`; equal to `z_0` at `t = 0`.
    pub z_prev: Point,
    /// `F(z_{t-1/2})`, carried between iterations by PEG and OG.
    pub f_half_prev: Option<Point>,
    pub gradient_calls: u64,
    pub resolvent_calls: u64,
}

#[derive(Debug, Clone)]
pub struct StepOutput {
    /// `z_{t+1/2}`
    pub z_half: Point,
    /// `F(z_{t+1/2})`
    pub f_half: Point,
    /// `z_{t+1}`
    pub z_next: Point,
    /// An element of `A(z_{t+1})` reconstructed from the update.
    pub certificate: Option<Point>,
    /// An element of `A(z_{t+1/2})` (OG only).
    pub half_certificate: Option<Point>,
}

impl SolverState {
    /// Initial state at `z_0`. PEG and OG evaluate `F(z_{-1/2}) = F(z_0)` here.
    pub fn new(
        problem: &InclusionProblem,
        algorithm: Algorithm,
        eta: f64,
        z0: Point,
    ) -> Result<Self> {
        check_dim(problem.dim(), z0.len())?;
        let mut state = Self {
            algorithm,
            eta,
            t: 0,
            z: z0.clone(),
            z_prev: z0.clone(),
            z0,
            f_half_prev: None,
            gradient_calls: 0,
            resolvent_calls: 0,
        };
        if matches!(algorithm, Algorithm::Peg | Algorithm::Og) {
            let f0 = state.call_f(problem, &state.z0.clone())?;
            state.f_half_prev = Some(f0);
        }
        Ok(state)
    }

    fn call_f(&mut self, problem: &InclusionProblem, x: &Point) -> Result<Point> {
        self.gradient_calls += 1;
        problem.evaluate(x)
    }

    fn call_resolvent(&mut self, problem: &InclusionProblem, x: &Point) -> Result<Point> {
        self.resolvent_calls += 1;
        problem.resolvent(self.eta, x)
    }

    fn advance(&mut self, z_next: &Point) {
        self.z_prev = std::mem::replace(&mut self.z, z_next.clone());
        self.t += 1;
    }

    pub fn step(&mut self, problem: &InclusionProblem) -> Result<StepOutput> {
        match self.algorithm {
            Algorithm::Eg => step_eg(problem, self),
            Algorithm::Peg => step_peg(problem, self),
            Algorithm::Og => step_og(problem, self),
            Algorithm::Rg => step_rg(problem, self),
            Algorithm::Arg => step_arg(problem, self),
        }
    }
}

/// `(w - J(w)) / η`, the element of `A(J(w))` exposed by a resolvent step.
fn certificate(w: &Point, z: &Point, eta: f64) -> Point {
    (w - z) / eta
}

/// Extragradient:
/// `z_{t+1/2} = J[z_t - ηF(z_t)]`, `z_{t+1} = J[z_t - ηF(z_{t+1/2})]`.
pub fn step_eg(problem: &InclusionProblem, s: &mut SolverState) -> Result<StepOutput> {
    let eta = s.eta;
    let z = s.z.clone();
    let fz = s.call_f(problem, &z)?;
    let z_half = s.call_resolvent(problem, &axpy(&z, -eta, &fz))?;
    let f_half = s.call_f(problem, &z_half)?;
    let w = axpy(&z, -eta, &f_half);
    let z_next = s.call_resolvent(problem, &w)?;
    let c = certificate(&w, &z_next, eta);
    s.advance(&z_next);
    Ok(StepOutput {
        z_half,
        f_half,
        z_next,
        certificate: Some(c),
        half_certificate: None,
    })
}

/// Past extragradient (Popov):
/// `z_{t+1/2} = J[z_t - ηF(z_{t-1/2})]`, `z_{t+1} = J[z_t - ηF(z_{t+1/2})]`.
pub fn step_peg(problem: &InclusionProblem, s: &mut SolverState) -> Result<StepOutput> {
    let eta = s.eta;
    let z = s.z.clone();
    let f_prev = s.f_half_prev.take().expect("PEG state carries F(z_{t-1/2})");
    let z_half = s.call_resolvent(problem, &axpy(&z, -eta, &f_prev))?;
    let f_half = s.call_f(problem, &z_half)?;
    let w = axpy(&z, -eta, &f_half);
    let z_next = s.call_resolvent(problem, &w)?;
    let c = certificate(&w, &z_next, eta);
    s.f_half_prev = Some(f_half.clone());
    s.advance(&z_next);
    Ok(StepOutput {
        z_half,
        f_half,
        z_next,
        certificate: Some(c),
        half_certificate: None,
    })
}

/// Optimistic gradient (forward-reflected-backward):
/// `z_{t+1/2} = J[z_t - ηF(z_{t-1/2})]`,
/// `z_{t+1} = z_{t+1/2} + ηF(z_{t-1/2}) - ηF(z_{t+1/2})`.
///
/// `(z_t - z_{t+1})/η` lies in `F(z_{t+1/2}) + A(z_{t+1/2})`; the `A` part
/// is returned as the half-point certificate.
pub fn step_og(problem: &InclusionProblem, s: &mut SolverState) -> Result<StepOutput> {
    let eta = s.eta;
    let z = s.z.clone();
    let f_prev = s.f_half_prev.take().expect("OG state carries F(z_{t-1/2})");
    let w = axpy(&z, -eta, &f_prev);
    let z_half = s.call_resolvent(problem, &w)?;
    let f_half = s.call_f(problem, &z_half)?;
    let mut z_next = z_half.clone();
    z_next.scaled_add(eta, &f_prev);
    z_next.scaled_add(-eta, &f_half);
    let a_half = certificate(&w, &z_half, eta);
    s.f_half_prev = Some(f_half.clone());
    s.advance(&z_next);
    Ok(StepOutput {
        z_half,
        f_half,
        z_next,
        certificate: None,
        half_certificate: Some(a_half),
    })
}

/// Reflected gradient:
/// `z_{t+1/2} = 2z_t - z_{t-1}`, `z_{t+1} = J[z_t - ηF(z_{t+1/2})]`.
pub fn step_rg(problem: &InclusionProblem, s: &mut SolverState) -> Result<StepOutput> {
    let eta = s.eta;
    let z = s.z.clone();
    let z_half = &z * 2.0 - &s.z_prev;
    let f_half = s.call_f(problem, &z_half)?;
    let w = axpy(&z, -eta, &f_half);
    let z_next = s.call_resolvent(problem, &w)?;
    let c = certificate(&w, &z_next, eta);
    s.advance(&z_next);
    Ok(StepOutput {
        z_half,
        f_half,
        z_next,
        certificate: Some(c),
        half_certificate: None,
    })
}

/// Accelerated reflected gradient (anchored to `z_0`). At `t = 0`,
/// `z_{1/2} = z_0` and `z_1 = J[z_0 - ηF(z_0)]`; for `t >= 1`
/// `z_{t+1/2} = 2z_t - z_{t-1} + (z_0 - z_t)/(t+1) - (z_0 - z_{t-1})/t`,
/// `z_{t+1} = J[z_t - ηF(z_{t+1/2}) + (z_0 - z_t)/(t+1)]`.
pub fn step_arg(problem: &InclusionProblem, s: &mut SolverState) -> Result<StepOutput> {
    let eta = s.eta;
    let t = s.t;
    let z = s.z.clone();
    let anchor_now = 1.0 / (t as f64 + 1.0);
    let z_half = if t == 0 {
        s.z0.clone()
    } else {
        let anchor_prev = 1.0 / t as f64;
        let mut h = &z * 2.0 - &s.z_prev;
        h.scaled_add(anchor_now, &(&s.z0 - &z));
        h.scaled_add(-anchor_prev, &(&s.z0 - &s.z_prev));
        h
    };
    let f_half = s.call_f(problem, &z_half)?;
    let mut w = axpy(&z, -eta, &f_half);
    if t > 0 {
        w.scaled_add(anchor_now, &(&s.z0 - &z));
    }
    let z_next = s.call_resolvent(problem, &w)?;
    let c = certificate(&w, &z_next, eta);
    s.advance(&z_next);
    Ok(StepOutput {
        z_half,
        f_half,
        z_next,
        certificate: Some(c),
        half_certificate: None,
    })
}

//! Audits of recorded trajectories against potential monotonicity and the
//! worst-case rate bounds, plus numeric verifiers for the auxiliary identities
//! and the sequence recursion bound.

mod bounds;
mod fit;
mod identities;
mod potentials;

use std::collections::BTreeMap;

use serde::Serialize;

pub use bounds::{audit_best_iterate_sums, audit_theorem_bound, Theorem};
pub use fit::{fit_power_law, fit_rate, RateFit};
pub use identities::{
    identity_residual, identity_sides, verify_identity, verify_identity_dims,
    verify_sequence_bound, Identity, IdentityInputs,
};
pub use potentials::{
    audit_arg_initial, audit_arg_lower_bound, audit_arg_potential, audit_rg_potential,
    potential_p, potential_v,
};

/// Relative slack used by the trajectory audits.
pub const AUDIT_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub audit_name: String,
    /// `worst_violation <= tolerance`.
    pub passed: bool,
    /// Largest signed margin `lhs - rhs` seen (after any normalisation noted in `notes`).
    pub worst_violation: f64,
    pub worst_iteration: usize,
    pub constants: BTreeMap<String, f64>,
    pub tolerance: f64,
    /// Whether the trajectory meets the hypotheses under which the inequality is proven.
    pub hypotheses_met: bool,
    pub notes: Vec<String>,
}

/// Accumulates the worst margin over a sequence of checks.
#[derive(Debug)]
pub(crate) struct Tracker {
    worst: f64,
    at: usize,
    checked: usize,
}

impl Tracker {
    pub(crate) fn new() -> Self {
        Self {
            worst: 0.0,
            at: 0,
            checked: 0,
        }
    }

    pub(crate) fn observe(&mut self, violation: f64, t: usize) {
        // NaN margins count as violations.
        let v = if violation.is_nan() { f64::INFINITY } else { violation };
        if self.checked == 0 || v > self.worst {
            self.worst = v;
            self.at = t;
        }
        self.checked += 1;
    }

    pub(crate) fn finish(
        self,
        name: &str,
        tolerance: f64,
        constants: BTreeMap<String, f64>,
        hypotheses_met: bool,
        notes: Vec<String>,
    ) -> AuditReport {
        AuditReport {
            audit_name: name.to_string(),
            passed: self.worst <= tolerance,
            worst_violation: self.worst,
            worst_iteration: self.at,
            constants,
            tolerance,
            hypotheses_met,
            notes,
        }
    }
}

pub(crate) fn constants<const N: usize>(pairs: [(&str, f64); N]) -> BTreeMap<String, f64> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

//! Numeric checks of the two sum-of-squares identities behind the potential
//! decrease and of the recursion bound `a_k <= 4C_1/((1-3p)k^2)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::{dot, norm_sq, Point};

use super::{constants, AuditReport, Tracker};

pub const IDENTITY_RTOL: f64 = 1e-9;
pub const DEFAULT_IDENTITY_DIM: usize = 8;
/// Random sequences drawn by [`verify_sequence_bound`] on top of the extremal one.
pub const RANDOM_SEQUENCES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Identity {
    /// The identity behind the RG potential (`x_3 = x_2 - y_1 - u_2`, `x_4 = x_2 - y_3 - u_4`).
    First,
    /// The anchored identity behind the ARG potential.
    Second,
}

impl Identity {
    pub fn name(self) -> &'static str {
        match self {
            Identity::First => "first",
            Identity::Second => "second",
        }
    }
}

/// Free variables of the identities; `x_3` and `x_4` are derived.
#[derive(Debug, Clone)]
pub struct IdentityInputs {
    pub x0: Point,
    pub x2: Point,
    pub y: [Point; 4],
    pub u2: Point,
    pub u4: Point,
    pub k: f64,
    pub q: f64,
}

impl IdentityInputs {
    pub fn zeros(dim: usize) -> Self {
        let z = Point::zeros(dim);
        Self {
            x0: z.clone(),
            x2: z.clone(),
            y: [z.clone(), z.clone(), z.clone(), z.clone()],
            u2: z.clone(),
            u4: z,
            k: 1.0,
            q: 0.5,
        }
    }

    fn random(dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut v = || -> Point { (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect() };
        let (x0, x2) = (v(), v());
        let y = [v(), v(), v(), v()];
        let (u2, u4) = (v(), v());
        let k = rng.gen_range(1..=10) as f64;
        let q = loop {
            let q: f64 = rng.gen();
            if q > 0.0 {
                break q;
            }
        };
        Self { x0, x2, y, u2, u4, k, q }
    }
}

/// Returns `(lhs, rhs)` of the chosen identity.
pub fn identity_sides(which: Identity, v: &IdentityInputs) -> (f64, f64) {
    let [y1, y2, y3, y4] = &v.y;
    let (x0, x2, u2, u4) = (&v.x0, &v.x2, &v.u2, &v.u4);
    match which {
        Identity::First => {
            let x3 = x2 - y1 - u2;
            let x4 = x2 - y3 - u4;
            let lhs = norm_sq(&(y2 + u2)) + norm_sq(&(y2 - y1))
                - norm_sq(&(y4 + u4))
                - norm_sq(&(y4 - y3))
                - 2.0 * dot(&(y4 - y2), &(&x4 - x2))
                - 2.0 * (0.25 * norm_sq(&(&x4 - &x3)) - norm_sq(&(y4 - y3)))
                - 2.0 * dot(&(u4 - u2), &(&x4 - x2));
            let rhs = norm_sq(&((&x3 - &x4) / 2.0 + y1 - y2))
                + norm_sq(&((&x3 + &x4) / 2.0 - x2 + y2 + u2));
            (lhs, rhs)
        }
        Identity::Second => {
            let (k, q) = (v.k, v.q);
            let anchor = (x0 - x2) / (k + 1.0);
            let x3 = x2 - y1 - u2 + &anchor;
            let x4 = x2 - y3 - u4 + &anchor;
            let kk = k * (k + 1.0);
            let lhs = kk / 2.0 * (norm_sq(&(y2 + u2)) + norm_sq(&(y2 - y1)))
                + k * dot(&(y2 + u2), &(x2 - x0))
                - (k + 1.0) * (k + 2.0) / 2.0 * (norm_sq(&(y4 + u4)) + norm_sq(&(y4 - y3)))
                - (k + 1.0) * dot(&(y4 + u4), &(&x4 - x0))
                - kk * dot(&(y4 + u4 - y2 - u2), &(&x4 - x2))
                - kk / (4.0 * q) * (q * norm_sq(&(&x4 - &x3)) - norm_sq(&(y4 - y3)));
            let rhs = kk / 4.0 * norm_sq(&(u4 - u2 + y1 - y2 * 2.0 + y3))
                + ((1.0 - 4.0 * q) * k - 4.0 * q) / (4.0 * q) * (k + 1.0) * norm_sq(&(y3 - y4))
                + (k + 1.0) * dot(&(y3 - y4), &(y4 + u4));
            (lhs, rhs)
        }
    }
}

/// `|lhs - rhs| / (1 + |lhs|)`
pub fn identity_residual(which: Identity, v: &IdentityInputs) -> f64 {
    let (lhs, rhs) = identity_sides(which, v);
    (lhs - rhs).abs() / (1.0 + lhs.abs())
}

/// Checks the identity on `trials` random draws in R^8.
pub fn verify_identity(which: Identity, trials: usize, seed: u64) -> Result<AuditReport> {
    verify_identity_dims(which, trials, &[DEFAULT_IDENTITY_DIM], seed)
}

/// Checks the identity on `trials` random draws in each listed dimension.
pub fn verify_identity_dims(
    which: Identity,
    trials: usize,
    dims: &[usize],
    seed: u64,
) -> Result<AuditReport> {
    if trials == 0 || dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidArgument(
            "identity check needs at least one trial and positive dimensions".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tracker = Tracker::new();
    let mut trial = 0;
    for &dim in dims {
        for _ in 0..trials {
            let v = IdentityInputs::random(dim, &mut rng);
            tracker.observe(identity_residual(which, &v), trial);
            trial += 1;
        }
    }
    Ok(tracker.finish(
        &format!("identity_{}", which.name()),
        IDENTITY_RTOL,
        constants([("trials", trial as f64), ("max_dim", *dims.iter().max().unwrap() as f64)]),
        true,
        vec!["violation is |lhs - rhs| / (1 + |lhs|)".into()],
    ))
}

/// Builds `a_2..=a_horizon` with `a_k = θ_k (4/k^2)(C_1 + p/(1-p) Σ_{t=2}^{k-1} a_t)`;
/// `θ_k = 1` gives the sequence that saturates the hypothesis.
fn build_sequence(c1: f64, p: f64, horizon: usize, mut theta: impl FnMut() -> f64) -> Vec<f64> {
    let ratio = p / (1.0 - p);
    let mut sum = 0.0;
    let mut out = Vec::with_capacity(horizon.saturating_sub(1));
    for k in 2..=horizon {
        let kf = k as f64;
        let a = theta() * 4.0 / (kf * kf) * (c1 + ratio * sum);
        out.push(a);
        sum += a;
    }
    out
}

/// Checks `a_k <= 4C_1/((1-3p)k^2)` for `k = 2..=horizon` on the extremal sequence
/// and on [`RANDOM_SEQUENCES`] seeded random sequences meeting the hypothesis.
/// Margins are `(a_k - bound_k)/bound_k` (or `a_k` when the bound is 0) against 1e-12.
pub fn verify_sequence_bound(c1: f64, p: f64, horizon: usize, seed: u64) -> Result<AuditReport> {
    if !(p > 0.0 && p < 1.0 / 3.0) {
        return Err(Error::InvalidArgument(format!("p must lie in (0, 1/3), got {p}")));
    }
    if !(c1 >= 0.0 && c1.is_finite()) {
        return Err(Error::InvalidArgument(format!("C1 must be nonnegative, got {c1}")));
    }
    if horizon < 2 {
        return Err(Error::InvalidArgument(format!("horizon must be at least 2, got {horizon}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 4.0 * c1 / (1.0 - 3.0 * p);
    let mut tracker = Tracker::new();
    let check = |seq: &[f64], tracker: &mut Tracker| {
        for (i, a) in seq.iter().enumerate() {
            let k = (i + 2) as f64;
            let bound = scale / (k * k);
            let margin = if bound > 0.0 { (a - bound) / bound } else { *a };
            tracker.observe(margin, i + 2);
        }
    };
    let extremal = build_sequence(c1, p, horizon, || 1.0);
    check(&extremal, &mut tracker);
    for _ in 0..RANDOM_SEQUENCES {
        let seq = build_sequence(c1, p, horizon, || rng.gen::<f64>());
        check(&seq, &mut tracker);
    }
    Ok(tracker.finish(
        "sequence_bound",
        1e-12,
        constants([("C1", c1), ("p", p), ("horizon", horizon as f64), ("bound_scale", scale)]),
        true,
        vec![format!("extremal plus {RANDOM_SEQUENCES} random sequences")],
    ))
}

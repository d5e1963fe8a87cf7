//! Sampled certification of the structural assumptions on `F + A`.
//!
//! This is a probabilistic check: it can refute a declared regime with a
//! concrete witness, never prove it.

use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::point::{dot, norm, norm_sq, Point};
use crate::problem::InclusionProblem;

pub const DEFAULT_RADIUS: f64 = 10.0;
/// Normalised margins below `-CERTIFY_TOL` count as violations.
pub const CERTIFY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeProperty {
    Lipschitz,
    Monotone,
    Comonotone,
    WeakMvi,
}

impl RegimeProperty {
    pub fn name(self) -> &'static str {
        match self {
            RegimeProperty::Lipschitz => "lipschitz",
            RegimeProperty::Monotone => "monotone",
            RegimeProperty::Comonotone => "comonotone",
            RegimeProperty::WeakMvi => "weak_mvi",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "lipschitz" => Ok(RegimeProperty::Lipschitz),
            "monotone" => Ok(RegimeProperty::Monotone),
            "comonotone" => Ok(RegimeProperty::Comonotone),
            "weak_mvi" => Ok(RegimeProperty::WeakMvi),
            other => Err(Error::InvalidArgument(format!("unknown property `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CertifyReport {
    pub property: RegimeProperty,
    /// ρ used for comonotone / weak MVI checks.
    pub rho: f64,
    pub samples: usize,
    pub passed: bool,
    /// Smallest sampled margin, normalised by the magnitude of the terms involved.
    pub worst_margin: f64,
    /// The pair of points attaining the worst margin.
    pub witness: Option<(Point, Point)>,
    pub tolerance: f64,
}

/// A sampled element `(z, u)` of the graph of `F + A`.
struct GraphPoint {
    z: Point,
    u: Point,
}

fn sample_graph_point(
    problem: &InclusionProblem,
    rng: &mut ChaCha8Rng,
    center: &Point,
    radius: f64,
) -> Result<GraphPoint> {
    let x: Point = center.mapv(|c| c + rng.gen_range(-radius..=radius));
    let a = problem.monotone_part();
    let z = a.resolvent(1.0, &x)?;
    let mut c = &x - &z;
    if a.feasible_set().is_some() {
        // N_Z(z) is a cone, so any nonnegative multiple is also a graph element.
        c *= rng.gen_range(0.0..2.0);
    }
    let u = problem.evaluate(&z)? + &c;
    Ok(GraphPoint { z, u })
}

/// Draws `samples` graph pairs within `radius` (L∞) of the anchor (or the
/// origin) and evaluates the defining inequality of `property`.
pub fn certify_regime(
    problem: &InclusionProblem,
    property: RegimeProperty,
    samples: usize,
    radius: f64,
    seed: u64,
) -> Result<CertifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rho = problem.regime().rho();
    let center = match property {
        RegimeProperty::WeakMvi => problem.anchor().cloned().ok_or(Error::MissingAnchor)?,
        _ => problem
            .anchor()
            .cloned()
            .unwrap_or_else(|| Array1::zeros(problem.dim())),
    };
    let lipschitz = problem.lipschitz();

    let mut worst = f64::INFINITY;
    let mut witness = None;
    for _ in 0..samples {
        let (margin, pair) = match property {
            RegimeProperty::Lipschitz => {
                let z: Point = center.mapv(|c| c + rng.gen_range(-radius..=radius));
                let zp: Point = center.mapv(|c| c + rng.gen_range(-radius..=radius));
                let df = problem.evaluate(&z)? - problem.evaluate(&zp)?;
                let bound = lipschitz * crate::point::dist(&z, &zp);
                ((bound - norm(&df)) / bound.max(1.0), (z, zp))
            }
            RegimeProperty::Monotone | RegimeProperty::Comonotone => {
                let p = sample_graph_point(problem, &mut rng, &center, radius)?;
                let q = sample_graph_point(problem, &mut rng, &center, radius)?;
                let du = &p.u - &q.u;
                let dz = &p.z - &q.z;
                let r = if property == RegimeProperty::Monotone { 0.0 } else { rho };
                let raw = dot(&du, &dz) - r * norm_sq(&du);
                let scale = norm(&du) * norm(&dz) + r.abs() * norm_sq(&du);
                (raw / scale.max(1.0), (p.z, q.z))
            }
            RegimeProperty::WeakMvi => {
                let p = sample_graph_point(problem, &mut rng, &center, radius)?;
                let dz = &p.z - &center;
                let raw = dot(&p.u, &dz) - rho * norm_sq(&p.u);
                let scale = norm(&p.u) * norm(&dz) + rho.abs() * norm_sq(&p.u);
                (raw / scale.max(1.0), (p.z, center.clone()))
            }
        };
        if margin < worst {
            worst = margin;
            witness = Some(pair);
        }
    }
    if samples == 0 {
        worst = 0.0;
    }
    Ok(CertifyReport {
        property,
        rho,
        samples,
        passed: worst >= -CERTIFY_TOL,
        worst_margin: worst,
        witness,
        tolerance: CERTIFY_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::*;
    use std::f64::consts::PI;

    #[test]
    fn antidiagonal_is_monotone() {
        let p = make_antidiagonal_problem(4).unwrap();
        let r = certify_regime(&p, RegimeProperty::Monotone, 10_000, DEFAULT_RADIUS, 1).unwrap();
        assert!(r.passed);
        assert!(r.worst_margin >= -1e-12);
        let r = certify_regime(&p, RegimeProperty::Lipschitz, 10_000, DEFAULT_RADIUS, 1).unwrap();
        assert!(r.passed);
    }

    #[test]
    fn rotation_comonotone_at_declared_rho() {
        let p = make_rotation_problem_from_cos(1.0, -1.0 / 60.0).unwrap();
        let r = certify_regime(&p, RegimeProperty::Comonotone, 10_000, DEFAULT_RADIUS, 9).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.worst_margin.abs() < 1e-12);
        let r = certify_regime(&p, RegimeProperty::WeakMvi, 10_000, DEFAULT_RADIUS, 9).unwrap();
        assert!(r.passed);
    }

    #[test]
    fn obtuse_rotation_is_not_monotone() {
        let p = make_rotation_problem(1.0, 2.0 * PI / 3.0).unwrap();
        let r = certify_regime(&p, RegimeProperty::Monotone, 100, DEFAULT_RADIUS, 4).unwrap();
        assert!(!r.passed);
        let (z, zp) = r.witness.unwrap();
        let du = p.evaluate(&z).unwrap() - p.evaluate(&zp).unwrap();
        assert!(dot(&du, &(&z - &zp)) < 0.0);
    }

    #[test]
    fn constrained_bilinear_is_monotone() {
        let p = make_bilinear_box_problem(2, 1.0).unwrap();
        let r = certify_regime(&p, RegimeProperty::Monotone, 5_000, 3.0, 2).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn weak_mvi_needs_anchor() {
        use crate::operators::*;
        let f = SingleValuedOperator::identity(1);
        let p = InclusionProblem::new("id", f, MaximalMonotoneOperator::Zero, crate::problem::Regime::Monotone)
            .unwrap();
        assert_eq!(
            certify_regime(&p, RegimeProperty::WeakMvi, 10, 1.0, 0).unwrap_err(),
            Error::MissingAnchor
        );
    }
}

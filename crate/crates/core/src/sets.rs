//! Closed convex sets with closed-form Euclidean projections.
//!
//! Every variant also answers two local questions at a point `z` of the set:
//! whether a vector lies in the normal cone `N(z)`, and what the projection of
//! a vector onto the tangent cone `T(z)` is. By Moreau's decomposition,
//! `dist(-g, N(z)) = |Π_{T(z)}(-g)|`, which is how tangent residuals are
//! evaluated exactly.

use ndarray::Array1;
use rand::Rng;

use crate::error::{check_dim, Error, Result};
use crate::point::{dot, norm, Point};

/// Relative slack used to decide whether a constraint is active at a point.
const ACTIVE_TOL: f64 = 1e-12;

fn slack(scale: f64) -> f64 {
    ACTIVE_TOL * scale.abs().max(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet {
    FullSpace { dim: usize },
    /// Coordinate-wise bounds; infinite bounds are allowed.
    Box { lower: Point, upper: Point },
    EuclideanBall { center: Point, radius: f64 },
    NonnegOrthant { dim: usize },
    /// `{ x : <normal, x> <= offset }`
    Halfspace { normal: Point, offset: f64 },
}

impl FeasibleSet {
    pub fn full_space(dim: usize) -> Self {
        FeasibleSet::FullSpace { dim }
    }

    pub fn nonneg_orthant(dim: usize) -> Self {
        FeasibleSet::NonnegOrthant { dim }
    }

    pub fn boxed(lower: Point, upper: Point) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        if lower.iter().zip(upper.iter()).any(|(l, u)| !(l <= u)) {
            return Err(Error::InvalidArgument(
                "box requires lower <= upper in every coordinate".into(),
            ));
        }
        Ok(FeasibleSet::Box { lower, upper })
    }

    /// The box `[lo, hi]^dim`.
    pub fn uniform_box(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::boxed(Array1::from_elem(dim, lo), Array1::from_elem(dim, hi))
    }

    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        Ok(FeasibleSet::EuclideanBall { center, radius })
    }

    pub fn halfspace(normal: Point, offset: f64) -> Result<Self> {
        if !(norm(&normal) > 0.0) {
            return Err(Error::InvalidArgument(
                "halfspace normal must be nonzero".into(),
            ));
        }
        Ok(FeasibleSet::Halfspace { normal, offset })
    }

    pub fn dim(&self) -> usize {
        match self {
            FeasibleSet::FullSpace { dim } | FeasibleSet::NonnegOrthant { dim } => *dim,
            FeasibleSet::Box { lower, .. } => lower.len(),
            FeasibleSet::EuclideanBall { center, .. } => center.len(),
            FeasibleSet::Halfspace { normal, .. } => normal.len(),
        }
    }

    pub fn project(&self, x: &Point) -> Result<Point> {
        check_dim(self.dim(), x.len())?;
        Ok(match self {
            FeasibleSet::FullSpace { .. } => x.clone(),
            FeasibleSet::Box { lower, upper } => {
                let mut out = x.clone();
                for ((v, l), u) in out.iter_mut().zip(lower.iter()).zip(upper.iter()) {
                    *v = v.max(*l).min(*u);
                }
                out
            }
            FeasibleSet::NonnegOrthant { .. } => x.mapv(|v| v.max(0.0)),
            FeasibleSet::EuclideanBall { center, radius } => {
                let d = x - center;
                let r = norm(&d);
                if r <= *radius {
                    x.clone()
                } else {
                    center + &(d * (*radius / r))
                }
            }
            FeasibleSet::Halfspace { normal, offset } => {
                let excess = dot(normal, x) - offset;
                if excess <= 0.0 {
                    x.clone()
                } else {
                    let mut out = x.clone();
                    out.scaled_add(-excess / dot(normal, normal), normal);
                    out
                }
            }
        })
    }

    /// Euclidean distance from `x` to the set.
    pub fn distance(&self, x: &Point) -> Result<f64> {
        let p = self.project(x)?;
        Ok(crate::point::dist(x, &p))
    }

    pub fn contains(&self, x: &Point, tol: f64) -> Result<bool> {
        Ok(self.distance(x)? <= tol)
    }

    fn require_member(&self, z: &Point) -> Result<()> {
        let d = self.distance(z)?;
        if d <= slack(norm(z)) * 1e2 {
            Ok(())
        } else {
            Err(Error::InfeasiblePoint { distance: d })
        }
    }

    /// Projection of `v` onto the tangent cone of the set at `z`.
    pub fn tangent_project(&self, z: &Point, v: &Point) -> Result<Point> {
        check_dim(self.dim(), v.len())?;
        self.require_member(z)?;
        Ok(match self {
            FeasibleSet::FullSpace { .. } => v.clone(),
            FeasibleSet::Box { lower, upper } => {
                let mut out = v.clone();
                for i in 0..out.len() {
                    let (at_lo, at_hi) = box_activity(z[i], lower[i], upper[i]);
                    out[i] = match (at_lo, at_hi) {
                        (true, true) => 0.0,
                        (true, false) => out[i].max(0.0),
                        (false, true) => out[i].min(0.0),
                        (false, false) => out[i],
                    };
                }
                out
            }
            FeasibleSet::NonnegOrthant { .. } => {
                let mut out = v.clone();
                for (o, zi) in out.iter_mut().zip(z.iter()) {
                    if *zi <= slack(0.0) {
                        *o = o.max(0.0);
                    }
                }
                out
            }
            FeasibleSet::EuclideanBall { center, radius } => {
                let d = z - center;
                let rz = norm(&d);
                if rz < radius - slack(*radius) || rz == 0.0 {
                    v.clone()
                } else {
                    let n = d / rz;
                    let s = dot(v, &n);
                    if s > 0.0 {
                        let mut out = v.clone();
                        out.scaled_add(-s, &n);
                        out
                    } else {
                        v.clone()
                    }
                }
            }
            FeasibleSet::Halfspace { normal, offset } => {
                let lhs = dot(normal, z);
                if lhs < offset - slack(offset.abs().max(norm(normal) * norm(z))) {
                    v.clone()
                } else {
                    let s = dot(v, normal);
                    if s > 0.0 {
                        let mut out = v.clone();
                        out.scaled_add(-s / dot(normal, normal), normal);
                        out
                    } else {
                        v.clone()
                    }
                }
            }
        })
    }

    /// Closed-form test of `c ∈ N(z)`, up to `tol` (scaled by the size of `c`).
    pub fn normal_cone_contains(&self, z: &Point, c: &Point, tol: f64) -> Result<bool> {
        check_dim(self.dim(), c.len())?;
        if self.require_member(z).is_err() {
            return Ok(false);
        }
        let tol = tol * norm(c).max(1.0);
        Ok(match self {
            FeasibleSet::FullSpace { .. } => norm(c) <= tol,
            FeasibleSet::Box { lower, upper } => (0..c.len()).all(|i| {
                match box_activity(z[i], lower[i], upper[i]) {
                    (true, true) => true,
                    (true, false) => c[i] <= tol,
                    (false, true) => c[i] >= -tol,
                    (false, false) => c[i].abs() <= tol,
                }
            }),
            FeasibleSet::NonnegOrthant { .. } => c
                .iter()
                .zip(z.iter())
                .all(|(ci, zi)| if *zi <= slack(0.0) { *ci <= tol } else { ci.abs() <= tol }),
            FeasibleSet::EuclideanBall { center, radius } => {
                let d = z - center;
                let rz = norm(&d);
                if rz < radius - slack(*radius) {
                    norm(c) <= tol
                } else {
                    let n = d / rz;
                    let along = dot(c, &n);
                    let mut perp = c.clone();
                    perp.scaled_add(-along, &n);
                    along >= -tol && norm(&perp) <= tol
                }
            }
            FeasibleSet::Halfspace { normal, offset } => {
                let lhs = dot(normal, z);
                if lhs < offset - slack(offset.abs().max(norm(normal) * norm(z))) {
                    norm(c) <= tol
                } else {
                    let nn = dot(normal, normal);
                    let along = dot(c, normal) / nn;
                    let mut perp = c.clone();
                    perp.scaled_add(-along, normal);
                    along >= -tol && norm(&perp) <= tol
                }
            }
        })
    }

    /// A point of the set near which samples are drawn.
    pub fn reference_point(&self) -> Point {
        match self {
            FeasibleSet::EuclideanBall { center, .. } => center.clone(),
            FeasibleSet::Box { lower, upper } => lower
                .iter()
                .zip(upper.iter())
                .map(|(l, u)| match (l.is_finite(), u.is_finite()) {
                    (true, true) => 0.5 * (l + u),
                    (true, false) => *l,
                    (false, true) => *u,
                    (false, false) => 0.0,
                })
                .collect(),
            _ => Array1::zeros(self.dim()),
        }
    }

    /// Draws a point uniformly from the L∞ ball of `radius` around the
    /// reference point and projects it onto the set. Projection puts
    /// positive mass on faces, which exercises the boundary cases.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R, radius: f64) -> Point {
        let reference = self.reference_point();
        let x: Point = reference.mapv(|c| c + rng.gen_range(-radius..=radius));
        self.project(&x).expect("dimension matches by construction")
    }
}

fn box_activity(z: f64, lo: f64, hi: f64) -> (bool, bool) {
    let at_lo = lo.is_finite() && z <= lo + slack(lo);
    let at_hi = hi.is_finite() && z >= hi - slack(hi);
    (at_lo, at_hi)
}

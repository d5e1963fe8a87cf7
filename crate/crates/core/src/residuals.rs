//! Convergence measures: natural, forward-backward, tangent and certified
//! residuals, and the restricted gap function.
//!
//! For any `c ∈ A(z)` these are ordered as
//! `natural, forward_backward(α) <= tangent <= |F(z) + c|`, and with `A = 0`
//! all of them collapse to `|F(z)|`.

use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::operators::MaximalMonotoneOperator;
use crate::point::{dist, dot, norm, Point};
use crate::problem::InclusionProblem;
use crate::sets::FeasibleSet;

/// Forward-backward step used in reports. At α = 1 it coincides with the natural residual.
pub const DEFAULT_FB_ALPHA: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub natural: f64,
    pub forward_backward: f64,
    pub fb_alpha: f64,
    /// Present only when `A` admits an exact tangent computation at the point.
    pub tangent_exact: Option<f64>,
    /// `|F(z) + c|` for an algorithm-certified `c ∈ A(z)`.
    pub certified: Option<f64>,
}

impl ResidualReport {
    /// Evaluates every residual at `z`. `fz` is `F(z)` and `certificate` an
    /// element of `A(z)`; pass `None` for either to skip.
    pub fn evaluate(
        problem: &InclusionProblem,
        z: &Point,
        fz: &Point,
        certificate: Option<&Point>,
    ) -> Result<Self> {
        let natural = natural_residual_given(problem, z, fz)?;
        let tangent_exact = match tangent_residual_given(problem, z, fz) {
            Ok(v) => Some(v),
            Err(Error::Unsupported(_)) | Err(Error::InfeasiblePoint { .. }) => None,
            Err(e) => return Err(e),
        };
        let certified = match certificate {
            Some(c) => Some(certified_residual(fz, c)?),
            None if problem.monotone_part().is_zero() => Some(norm(fz)),
            None => None,
        };
        Ok(Self {
            natural,
            forward_backward: natural,
            fb_alpha: DEFAULT_FB_ALPHA,
            tangent_exact,
            certified,
        })
    }
}

/// `|z - J_A(z - F(z))|`
pub fn natural_residual(problem: &InclusionProblem, z: &Point) -> Result<f64> {
    let fz = problem.evaluate(z)?;
    natural_residual_given(problem, z, &fz)
}

fn natural_residual_given(problem: &InclusionProblem, z: &Point, fz: &Point) -> Result<f64> {
    let step = problem.resolvent(1.0, &(z - fz))?;
    Ok(dist(z, &step))
}

/// `|z - J_{αA}(z - α F(z))| / α`
pub fn forward_backward_residual(problem: &InclusionProblem, alpha: f64, z: &Point) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "forward-backward step must be positive, got {alpha}"
        )));
    }
    let fz = problem.evaluate(z)?;
    let mut x = z.clone();
    x.scaled_add(-alpha, &fz);
    let step = problem.resolvent(alpha, &x)?;
    Ok(dist(z, &step) / alpha)
}

/// `min_{c ∈ A(z)} |F(z) + c|`, for `A = 0` and normal cones of the supported sets.
pub fn tangent_residual_exact(problem: &InclusionProblem, z: &Point) -> Result<f64> {
    let fz = problem.evaluate(z)?;
    tangent_residual_given(problem, z, &fz)
}

fn tangent_residual_given(problem: &InclusionProblem, z: &Point, fz: &Point) -> Result<f64> {
    let a = problem.monotone_part();
    if a.is_zero() {
        return Ok(norm(fz));
    }
    match a.feasible_set() {
        // dist(-F(z), N(z)) = |Π_{T(z)}(-F(z))|
        Some(set) => Ok(norm(&set.tangent_project(z, &(-fz))?)),
        None => Err(Error::Unsupported(format!(
            "exact tangent residual for `{}` operators",
            a.kind_name()
        ))),
    }
}

/// `|F(z) + c|`
pub fn certified_residual(fz: &Point, c: &Point) -> Result<f64> {
    check_dim(fz.len(), c.len())?;
    Ok(fz.iter().zip(c.iter()).map(|(a, b)| (a + b) * (a + b)).sum::<f64>().sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapResult {
    /// The exact restricted gap when `is_exact`, otherwise the upper bound `D·r_tan(z)`.
    pub value: f64,
    pub is_exact: bool,
}

/// `max_{z' ∈ Z ∩ B(z, D)} <F(z), z - z'>`.
///
/// Exact for the full space and for balls; for other sets returns the bound
/// `D·|F(z) + c|` with the tangent-minimising `c`.
pub fn restricted_gap(problem: &InclusionProblem, radius: f64, z: &Point) -> Result<GapResult> {
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "gap radius must be positive, got {radius}"
        )));
    }
    let a = problem.monotone_part();
    let full = FeasibleSet::full_space(problem.dim());
    let set = match a {
        MaximalMonotoneOperator::Zero => &full,
        _ => a.feasible_set().ok_or_else(|| {
            Error::Unsupported(format!("gap function for `{}` operators", a.kind_name()))
        })?,
    };
    let d = set.distance(z)?;
    if d > 1e-10 * norm(z).max(1.0) {
        return Err(Error::InfeasiblePoint { distance: d });
    }
    let fz = problem.evaluate(z)?;
    match set {
        FeasibleSet::FullSpace { .. } => Ok(GapResult {
            value: radius * norm(&fz),
            is_exact: true,
        }),
        FeasibleSet::EuclideanBall { center, radius: r } => {
            // Shift so that z is the origin; maximise <-F, x> over B(0, D) ∩ B(center - z, r).
            let g = -&fz;
            let value = max_linear_over_two_balls(&g, radius, &(center - z), *r);
            Ok(GapResult {
                value,
                is_exact: true,
            })
        }
        _ => Ok(GapResult {
            value: radius * tangent_residual_given(problem, z, &fz)?,
            is_exact: false,
        }),
    }
}

/// `max <g, x>` over `B(0, r1) ∩ B(c2, r2)`, assuming the intersection contains the origin.
fn max_linear_over_two_balls(g: &Point, r1: f64, c2: &Point, r2: f64) -> f64 {
    let gn = norm(g);
    if gn == 0.0 {
        return 0.0;
    }
    let dir = g / gn;
    // Only the first ball active.
    let cand = &dir * r1;
    if dist(&cand, c2) <= r2 {
        return gn * r1;
    }
    // Only the second ball active.
    let cand = c2 + &(&dir * r2);
    if norm(&cand) <= r1 {
        return dot(g, &cand);
    }
    // Both active: the optimum lies on the (n-2)-sphere where the two spheres meet.
    let delta = norm(c2);
    let u = c2 / delta;
    let along = (delta * delta + r1 * r1 - r2 * r2) / (2.0 * delta);
    let h = (r1 * r1 - along * along).max(0.0).sqrt();
    let g_u = dot(g, &u);
    let mut g_perp = g.clone();
    g_perp.scaled_add(-g_u, &u);
    g_u * along + h * norm(&g_perp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{MaximalMonotoneOperator, SingleValuedOperator};
    use crate::problem::{make_antidiagonal_problem, Regime};
    use ndarray::{array, Array1, Array2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn shifted_identity_on(set: FeasibleSet, shift: f64) -> InclusionProblem {
        let n = set.dim();
        let f = SingleValuedOperator::affine(Array2::eye(n), Array1::from_elem(n, -shift), 1.0).unwrap();
        InclusionProblem::variational_inequality("shifted", f, set, Regime::Monotone).unwrap()
    }

    fn constant_on(set: FeasibleSet, value: Point) -> InclusionProblem {
        let n = set.dim();
        let f = SingleValuedOperator::new(n, 1.0, move |_| value.clone()).unwrap();
        InclusionProblem::variational_inequality("const", f, set, Regime::Monotone).unwrap()
    }

    #[test]
    fn unconstrained_collapse() {
        let p = make_antidiagonal_problem(4).unwrap();
        let z = array![1.0, -2.0, 0.5, 3.0];
        let fz = p.evaluate(&z).unwrap();
        let nf = norm(&fz);
        assert!((natural_residual(&p, &z).unwrap() - nf).abs() <= 1e-12);
        for alpha in [0.1, 0.5, 1.0, 2.0] {
            assert!((forward_backward_residual(&p, alpha, &z).unwrap() - nf).abs() <= 1e-12);
        }
        assert_eq!(tangent_residual_exact(&p, &z).unwrap(), nf);
        assert_eq!(certified_residual(&fz, &Array1::zeros(4)).unwrap(), nf);
        assert_eq!(natural_residual(&p, &Array1::zeros(4)).unwrap(), 0.0);
    }

    /// Brute force over z' in [0, 1] for the 1-D VI with F(z) = z - 2.
    fn brute_force_vi_violation(z: f64) -> f64 {
        (0..=100_000)
            .map(|k| k as f64 / 100_000.0)
            .map(|zp| (z - 2.0) * (z - zp))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn box_fixed_point_has_zero_residuals() {
        let p = shifted_identity_on(FeasibleSet::uniform_box(1, 0.0, 1.0).unwrap(), 2.0);
        let z = array![1.0];
        // z = 1 solves the VI: <F(1), 1 - z'> <= 0 on the whole interval.
        assert!(brute_force_vi_violation(1.0) <= 0.0);
        assert_eq!(natural_residual(&p, &z).unwrap(), 0.0);
        assert_eq!(forward_backward_residual(&p, 0.5, &z).unwrap(), 0.0);
        assert_eq!(tangent_residual_exact(&p, &z).unwrap(), 0.0);
    }

    /// min over c in [-100, 0] of |f + c| on a dense grid.
    fn brute_force_orthant_tangent(f: f64) -> f64 {
        (0..=1_000_000)
            .map(|k| -100.0 * k as f64 / 1_000_000.0)
            .map(|c| (f + c).abs())
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn orthant_tangent_residual() {
        for (f, expected) in [(3.0, 0.0), (-3.0, 3.0)] {
            let p = constant_on(FeasibleSet::nonneg_orthant(1), array![f]);
            let exact = tangent_residual_exact(&p, &array![0.0]).unwrap();
            assert!((exact - brute_force_orthant_tangent(f)).abs() < 1e-6);
            assert_eq!(exact, expected);
        }
    }

    #[test]
    fn tangent_matches_discretised_normal_cone_2d() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        // Box corner: N = {c : c0 <= 0, c1 >= 0} at z = (lo, hi).
        let set = FeasibleSet::uniform_box(2, -1.0, 1.0).unwrap();
        let z = array![-1.0, 1.0];
        for _ in 0..20 {
            // Multiples of the grid spacing, so the optimal c lies on the grid.
            let f: Point = (0..2).map(|_| rng.gen_range(-500i32..=500) as f64 / 100.0).collect();
            let p = constant_on(set.clone(), f.clone());
            let exact = tangent_residual_exact(&p, &z).unwrap();
            let steps = 1000;
            let mut best = f64::INFINITY;
            for i in 0..=steps {
                for j in 0..=steps {
                    let c = array![-10.0 * i as f64 / steps as f64, 10.0 * j as f64 / steps as f64];
                    best = best.min(norm(&(&f + &c)));
                }
            }
            assert!((exact - best).abs() < 1e-6, "{f} {exact} {best}");
        }
        // Ball boundary: N = {μ (z - center) : μ >= 0}.
        let set = FeasibleSet::ball(array![0.0, 0.0], 2.0).unwrap();
        let z = array![2.0f64.sqrt(), 2.0f64.sqrt()];
        for _ in 0..20 {
            let f: Point = (0..2).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let p = constant_on(set.clone(), f.clone());
            let exact = tangent_residual_exact(&p, &z).unwrap();
            let n = &z / 2.0;
            let best = (0..=2_000_000)
                .map(|k| 10.0 * k as f64 / 2_000_000.0)
                .map(|mu| norm(&(&f + &(&n * mu))))
                .fold(f64::INFINITY, f64::min);
            assert!((exact - best).abs() < 1e-6, "{f} {exact} {best}");
        }
    }

    #[test]
    fn certified_dimension_mismatch() {
        assert!(certified_residual(&array![1.0], &array![1.0, 2.0]).is_err());
        assert_eq!(certified_residual(&array![1.0, -2.0], &array![-1.0, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn unsupported_tangent_for_subgradients() {
        let f = SingleValuedOperator::identity(2);
        let p = InclusionProblem::new(
            "l1",
            f,
            MaximalMonotoneOperator::Subgradient(crate::prox::ProxFunction::L1Norm),
            Regime::Monotone,
        )
        .unwrap();
        assert!(matches!(tangent_residual_exact(&p, &array![1.0, 0.0]), Err(Error::Unsupported(_))));
        let r = ResidualReport::evaluate(&p, &array![1.0, 0.0], &array![1.0, 0.0], None).unwrap();
        assert!(r.tangent_exact.is_none() && r.certified.is_none());
    }

    #[test]
    fn gap_full_space_and_solution() {
        let p = make_antidiagonal_problem(2).unwrap();
        let z = array![3.0, 4.0];
        let g = restricted_gap(&p, 2.0, &z).unwrap();
        assert!(g.is_exact);
        assert!((g.value - 10.0).abs() < 1e-12);
        assert_eq!(restricted_gap(&p, 1.0, &array![0.0, 0.0]).unwrap().value, 0.0);
    }

    #[test]
    fn gap_box_uses_tangent_bound() {
        let p = constant_on(FeasibleSet::uniform_box(2, 0.0, 1.0).unwrap(), array![1.0, -2.0]);
        let z = array![0.5, 0.5];
        let g = restricted_gap(&p, 3.0, &z).unwrap();
        assert!(!g.is_exact);
        assert!((g.value - 3.0 * 5.0f64.sqrt()).abs() < 1e-12);
        // At the corner the cone absorbs both components.
        let g = restricted_gap(&p, 3.0, &array![0.0, 1.0]).unwrap();
        assert_eq!(g.value, 0.0);
        assert!(matches!(
            restricted_gap(&p, 1.0, &array![2.0, 0.0]),
            Err(Error::InfeasiblePoint { .. })
        ));
    }

    /// Maximises <F(z), z - z'> over rays from z, stepping to the boundary of Z ∩ B(z, D).
    /// A second pass refines around the best coarse angle, since the
    /// optimum may sit on a kink where the two spheres meet.
    fn ray_search_gap(fz: &Point, z: &Point, center: &Point, r: f64, d: f64, directions: usize) -> f64 {
        let w = z - center;
        let value = |phi: f64| {
            let dir = array![phi.cos(), phi.sin()];
            // |w + s dir| = r  ->  s^2 + 2 s <w,dir> + |w|^2 - r^2 = 0
            let b = dot(&w, &dir);
            let s_ball = -b + (b * b - dot(&w, &w) + r * r).max(0.0).sqrt();
            -s_ball.min(d) * dot(fz, &dir)
        };
        let step = 2.0 * std::f64::consts::PI / directions as f64;
        let (best_phi, coarse) = (0..directions)
            .map(|k| k as f64 * step)
            .map(|phi| (phi, value(phi)))
            .fold((0.0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
        (0..=directions)
            .map(|k| best_phi - step + 2.0 * step * k as f64 / directions as f64)
            .map(value)
            .fold(coarse, f64::max)
    }

    #[test]
    fn gap_ball_matches_ray_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let center = array![0.5, -0.25];
        let set = FeasibleSet::ball(center.clone(), 1.5).unwrap();
        for _ in 0..30 {
            let f: Point = (0..2).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let p = constant_on(set.clone(), f.clone());
            let z = set.sample_point(&mut rng, 2.0);
            let d = rng.gen_range(0.1..4.0);
            let exact = restricted_gap(&p, d, &z).unwrap();
            assert!(exact.is_exact);
            let search = ray_search_gap(&f, &z, &center, 1.5, d, 100_000);
            assert!(
                (exact.value - search).abs() <= 1e-6 * exact.value.abs().max(1.0),
                "z={z} f={f} d={d}: {} vs {search}",
                exact.value
            );
        }
    }

    #[test]
    fn residual_ordering_on_random_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let sets = [
            FeasibleSet::uniform_box(3, -1.0, 1.0).unwrap(),
            FeasibleSet::ball(array![0.2, 0.0, -0.3], 1.0).unwrap(),
            FeasibleSet::nonneg_orthant(3),
        ];
        for set in sets {
            for _ in 0..1000 {
                let m = Array2::from_shape_fn((3, 3), |_| rng.gen_range(-2.0..2.0));
                let b: Point = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let f = SingleValuedOperator::affine(m, b, 10.0).unwrap();
                let p = InclusionProblem::variational_inequality("s", f, set.clone(), Regime::Monotone).unwrap();
                let z = set.sample_point(&mut rng, 2.0);
                let tan = tangent_residual_exact(&p, &z).unwrap();
                assert!(tan >= natural_residual(&p, &z).unwrap() - 1e-10);
                for alpha in [0.1, 0.5, 1.0, 2.0] {
                    assert!(tan >= forward_backward_residual(&p, alpha, &z).unwrap() - 1e-10);
                }
            }
        }
    }
}

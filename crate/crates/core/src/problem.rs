//! Inclusion problems `0 ∈ F(z) + A(z)` and the built-in test instances.

use std::f64::consts::PI;

use ndarray::Array1;

use crate::error::{check_dim, Error, Result};
use crate::operators::{MaximalMonotoneOperator, SingleValuedOperator};
use crate::point::{dist, Point};
use crate::sets::FeasibleSet;

/// Largest natural residual accepted for a declared solution.
pub const SOLUTION_TOL: f64 = 1e-9;

/// The structural assumption a problem is declared to satisfy.
#[derive(Debug, Clone, PartialEq)]
pub enum Regime {
    Monotone,
    /// `<u - u', z - z'> >= rho |u - u'|^2` on the graph of `F + A`.
    Comonotone { rho: f64 },
    /// `<u, z - z*> >= rho |u|^2` on the graph of `F + A`, for the given anchor.
    WeakMvi { rho: f64, anchor: Point },
}

impl Regime {
    /// The declared ρ; 0 for monotone problems.
    pub fn rho(&self) -> f64 {
        match self {
            Regime::Monotone => 0.0,
            Regime::Comonotone { rho } | Regime::WeakMvi { rho, .. } => *rho,
        }
    }

    /// ρ clipped to be nonpositive. A cocoercive operator (ρ > 0) is also 0-comonotone.
    pub fn effective_rho(&self) -> f64 {
        self.rho().min(0.0)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Regime::Monotone => "monotone",
            Regime::Comonotone { .. } => "comonotone",
            Regime::WeakMvi { .. } => "weak_mvi",
        }
    }
}

#[derive(Debug, Clone)]
pub struct InclusionProblem {
    name: String,
    f: SingleValuedOperator,
    a: MaximalMonotoneOperator,
    regime: Regime,
    known_solution: Option<Point>,
}

impl InclusionProblem {
    pub fn new(
        name: impl Into<String>,
        f: SingleValuedOperator,
        a: MaximalMonotoneOperator,
        regime: Regime,
    ) -> Result<Self> {
        if let Some(set) = a.feasible_set() {
            check_dim(f.dim(), set.dim())?;
        }
        if let Regime::WeakMvi { rho, anchor } = &regime {
            check_dim(f.dim(), anchor.len())?;
            if *rho > 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "weak MVI requires rho <= 0, got {rho}"
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            f,
            a,
            regime,
            known_solution: None,
        })
    }

    /// A variational inequality over `set`: `A` is the normal cone of `set`.
    pub fn variational_inequality(
        name: impl Into<String>,
        f: SingleValuedOperator,
        set: FeasibleSet,
        regime: Regime,
    ) -> Result<Self> {
        Self::new(name, f, MaximalMonotoneOperator::NormalCone(set), regime)
    }

    /// Attaches a solution, rejecting it unless its natural residual is at most 1e-9.
    pub fn with_known_solution(mut self, z: Point) -> Result<Self> {
        check_dim(self.dim(), z.len())?;
        let fz = self.f.evaluate(&z)?;
        let step = self.a.resolvent(1.0, &(&z - &fz))?;
        let residual = dist(&z, &step);
        if residual > SOLUTION_TOL {
            return Err(Error::InvalidArgument(format!(
                "declared solution has natural residual {residual:e}"
            )));
        }
        self.known_solution = Some(z);
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    pub fn operator(&self) -> &SingleValuedOperator {
        &self.f
    }

    pub fn monotone_part(&self) -> &MaximalMonotoneOperator {
        &self.a
    }

    pub fn regime(&self) -> &Regime {
        &self.regime
    }

    pub fn lipschitz(&self) -> f64 {
        self.f.lipschitz()
    }

    pub fn known_solution(&self) -> Option<&Point> {
        self.known_solution.as_ref()
    }

    /// The anchor for weak-MVI checks: the regime's anchor, else the known solution.
    pub fn anchor(&self) -> Option<&Point> {
        match &self.regime {
            Regime::WeakMvi { anchor, .. } => Some(anchor),
            _ => self.known_solution.as_ref(),
        }
    }

    pub fn evaluate(&self, z: &Point) -> Result<Point> {
        self.f.evaluate(z)
    }

    pub fn resolvent(&self, eta: f64, x: &Point) -> Result<Point> {
        self.a.resolvent(eta, x)
    }
}

/// `F(z) = M z` with `M(i, n+1-i) = +1` above the anti-diagonal midpoint and
/// `-1` below it; unconstrained, monotone, `L = 1`, solution `0`.
pub fn make_antidiagonal_problem(n: usize) -> Result<InclusionProblem> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "antidiagonal problem needs an even positive dimension, got {n}"
        )));
    }
    let f = SingleValuedOperator::new(n, 1.0, move |z: &Point| {
        Array1::from_shape_fn(n, |i| {
            let j = n - 1 - i;
            if j > i {
                z[j]
            } else {
                -z[j]
            }
        })
    })?;
    InclusionProblem::new(
        format!("antidiagonal:n={n}"),
        f,
        MaximalMonotoneOperator::Zero,
        Regime::Monotone,
    )?
    .with_known_solution(Array1::zeros(n))
}

/// `F(z) = L R_θ z` in the plane. Comonotone with `ρ = cos θ / L`.
///
/// `θ = π/2` is accepted as the monotone boundary case.
pub fn make_rotation_problem(lipschitz: f64, theta: f64) -> Result<InclusionProblem> {
    if !(PI / 2.0..PI).contains(&theta) {
        return Err(Error::InvalidArgument(format!(
            "rotation angle must lie in [pi/2, pi), got {theta}"
        )));
    }
    rotation(lipschitz, theta.cos(), theta.sin(), format!("rotation:L={lipschitz},theta={theta}"))
}

/// Same instance parameterised by `cos θ ∈ (-1, 0]`, so that `ρ = cos θ / L` is exact.
pub fn make_rotation_problem_from_cos(lipschitz: f64, cos_theta: f64) -> Result<InclusionProblem> {
    if !(cos_theta > -1.0 && cos_theta <= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "cos(theta) must lie in (-1, 0], got {cos_theta}"
        )));
    }
    let sin_theta = (1.0 - cos_theta * cos_theta).sqrt();
    rotation(
        lipschitz,
        cos_theta,
        sin_theta,
        format!("rotation:L={lipschitz},costheta={cos_theta}"),
    )
}

fn rotation(lipschitz: f64, c: f64, s: f64, name: String) -> Result<InclusionProblem> {
    if !(lipschitz > 0.0 && lipschitz.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "rotation scale must be positive, got {lipschitz}"
        )));
    }
    let (a, b) = (lipschitz * c, lipschitz * s);
    let f = SingleValuedOperator::new(2, lipschitz, move |z: &Point| {
        ndarray::array![a * z[0] - b * z[1], b * z[0] + a * z[1]]
    })?;
    let rho = (c / lipschitz).min(0.0);
    InclusionProblem::new(name, f, MaximalMonotoneOperator::Zero, Regime::Comonotone { rho })?
        .with_known_solution(Array1::zeros(2))
}

/// Bilinear saddle `min_x max_y <x, y>` over the box `[-bound, bound]^n`:
/// `F(x, y) = (y, -x)`, monotone, `L = 1`, solution `0`.
pub fn make_bilinear_box_problem(n: usize, bound: f64) -> Result<InclusionProblem> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "bilinear problem needs an even positive dimension, got {n}"
        )));
    }
    if !(bound > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "box bound must be positive, got {bound}"
        )));
    }
    let half = n / 2;
    let f = SingleValuedOperator::new(n, 1.0, move |z: &Point| {
        Array1::from_shape_fn(n, |i| if i < half { z[i + half] } else { -z[i - half] })
    })?;
    InclusionProblem::variational_inequality(
        format!("bilinear_box:n={n},bound={bound}"),
        f,
        FeasibleSet::uniform_box(n, -bound, bound)?,
        Regime::Monotone,
    )?
    .with_known_solution(Array1::zeros(n))
}

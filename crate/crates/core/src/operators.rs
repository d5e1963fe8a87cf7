//! Single-valued operators `F` and maximally monotone operators `A`.
//!
//! `A` is only ever touched through its resolvent `J_{ηA} = (I + ηA)^{-1}`
//! and, where the kind supports it, a graph-membership query.

use std::fmt;
use std::sync::Arc;

use ndarray::Array2;

use crate::error::{check_dim, Error, Result};
use crate::point::{norm, Point};
use crate::prox::{prox_catalog, ProxFunction};
use crate::sets::FeasibleSet;

type EvalFn = dyn Fn(&Point) -> Point + Send + Sync;
type ResolventFn = dyn Fn(f64, &Point) -> Point + Send + Sync;

/// A single-valued operator with a declared Lipschitz constant.
///
/// The constant is problem knowledge and is not verified here; see
/// [`crate::certify::certify_regime`] for a sampled check.
#[derive(Clone)]
pub struct SingleValuedOperator {
    dim: usize,
    lipschitz: f64,
    eval: Arc<EvalFn>,
}

impl fmt::Debug for SingleValuedOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SingleValuedOperator")
            .field("dim", &self.dim)
            .field("lipschitz", &self.lipschitz)
            .finish_non_exhaustive()
    }
}

impl SingleValuedOperator {
    pub fn new<F>(dim: usize, lipschitz: f64, eval: F) -> Result<Self>
    where
        F: Fn(&Point) -> Point + Send + Sync + 'static,
    {
        if !(lipschitz > 0.0 && lipschitz.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "Lipschitz constant must be positive and finite, got {lipschitz}"
            )));
        }
        Ok(Self {
            dim,
            lipschitz,
            eval: Arc::new(eval),
        })
    }

    /// `F(z) = M z`.
    pub fn linear(matrix: Array2<f64>, lipschitz: f64) -> Result<Self> {
        let (rows, cols) = matrix.dim();
        check_dim(rows, cols)?;
        Self::new(rows, lipschitz, move |z| matrix.dot(z))
    }

    /// `F(z) = M z + b`.
    pub fn affine(matrix: Array2<f64>, offset: Point, lipschitz: f64) -> Result<Self> {
        let (rows, cols) = matrix.dim();
        check_dim(rows, cols)?;
        check_dim(rows, offset.len())?;
        Self::new(rows, lipschitz, move |z| matrix.dot(z) + &offset)
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(dim, 1.0, |z| z.clone()).expect("unit Lipschitz constant")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn evaluate(&self, z: &Point) -> Result<Point> {
        check_dim(self.dim, z.len())?;
        Ok((self.eval)(z))
    }
}

/// A maximally monotone operator, represented by its resolvent.
#[derive(Clone)]
pub enum MaximalMonotoneOperator {
    /// `A = 0`; the unconstrained problem.
    Zero,
    /// `A = N_Z`, the normal cone of a closed convex set.
    NormalCone(FeasibleSet),
    /// `A = ∂g` for a catalog function `g`.
    Subgradient(ProxFunction),
    /// A user-supplied operator. Without a resolvent callback it cannot be used.
    Custom {
        name: String,
        resolvent: Option<Arc<ResolventFn>>,
    },
}

impl fmt::Debug for MaximalMonotoneOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "Zero"),
            Self::NormalCone(set) => f.debug_tuple("NormalCone").field(set).finish(),
            Self::Subgradient(g) => f.debug_tuple("Subgradient").field(g).finish(),
            Self::Custom { name, resolvent } => f
                .debug_struct("Custom")
                .field("name", name)
                .field("has_resolvent", &resolvent.is_some())
                .finish(),
        }
    }
}

impl MaximalMonotoneOperator {
    pub fn custom<R>(name: impl Into<String>, resolvent: R) -> Self
    where
        R: Fn(f64, &Point) -> Point + Send + Sync + 'static,
    {
        Self::Custom {
            name: name.into(),
            resolvent: Some(Arc::new(resolvent)),
        }
    }

    pub fn kind_name(&self) -> &str {
        match self {
            Self::Zero => "zero",
            Self::NormalCone(_) => "normal_cone",
            Self::Subgradient(_) => "subgradient",
            Self::Custom { .. } => "custom",
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Zero)
    }

    /// The set whose normal cone this operator is, if any.
    pub fn feasible_set(&self) -> Option<&FeasibleSet> {
        match self {
            Self::NormalCone(set) | Self::Subgradient(ProxFunction::Indicator(set)) => Some(set),
            _ => None,
        }
    }

    /// `J_{ηA}(x)`.
    pub fn resolvent(&self, eta: f64, x: &Point) -> Result<Point> {
        resolvent_apply(self, eta, x)
    }

    /// Tests `c ∈ A(z)` for kinds with a closed-form graph.
    pub fn graph_contains(&self, z: &Point, c: &Point, tol: f64) -> Result<bool> {
        check_dim(z.len(), c.len())?;
        let scale = tol * norm(c).max(1.0);
        match self {
            Self::Zero => Ok(norm(c) <= tol),
            Self::NormalCone(set) | Self::Subgradient(ProxFunction::Indicator(set)) => {
                set.normal_cone_contains(z, c, tol)
            }
            Self::Subgradient(ProxFunction::L1Norm) => Ok(z.iter().zip(c.iter()).all(|(zi, ci)| {
                if *zi > 0.0 {
                    (ci - 1.0).abs() <= scale
                } else if *zi < 0.0 {
                    (ci + 1.0).abs() <= scale
                } else {
                    ci.abs() <= 1.0 + scale
                }
            })),
            Self::Subgradient(ProxFunction::L2Norm) => {
                let nz = norm(z);
                if nz > 0.0 {
                    Ok(crate::point::dist(&(z / nz), c) <= scale)
                } else {
                    Ok(norm(c) <= 1.0 + scale)
                }
            }
            Self::Subgradient(ProxFunction::SquaredL2) => Ok(crate::point::dist(z, c) <= scale),
            Self::Custom { name, .. } => Err(Error::Unsupported(format!(
                "graph membership for custom operator `{name}`"
            ))),
        }
    }
}

/// Applies the resolvent `J_{ηA}` to `x`.
pub fn resolvent_apply(a: &MaximalMonotoneOperator, eta: f64, x: &Point) -> Result<Point> {
    if !(eta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "resolvent parameter must be positive, got {eta}"
        )));
    }
    match a {
        MaximalMonotoneOperator::Zero => Ok(x.clone()),
        MaximalMonotoneOperator::NormalCone(set) => set.project(x),
        MaximalMonotoneOperator::Subgradient(g) => prox_catalog(g, eta, x),
        MaximalMonotoneOperator::Custom {
            resolvent: Some(r), ..
        } => Ok(r(eta, x)),
        MaximalMonotoneOperator::Custom {
            name,
            resolvent: None,
        } => Err(Error::Unsupported(format!(
            "custom operator `{name}` has no resolvent"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_resolvent_is_identity() {
        let x = array![1.0, 2.0];
        for eta in [0.1, 1.0, 10.0] {
            assert_eq!(resolvent_apply(&MaximalMonotoneOperator::Zero, eta, &x).unwrap(), x);
        }
    }

    #[test]
    fn normal_cone_resolvent_projects_for_every_eta() {
        let a = MaximalMonotoneOperator::NormalCone(FeasibleSet::uniform_box(2, 0.0, 1.0).unwrap());
        for eta in [0.5, 1.0, 3.0] {
            assert_eq!(a.resolvent(eta, &array![2.0, -1.0]).unwrap(), array![1.0, 0.0]);
        }
    }

    #[test]
    fn subgradient_l1_resolvent() {
        let a = MaximalMonotoneOperator::Subgradient(ProxFunction::L1Norm);
        assert_eq!(a.resolvent(1.0, &array![3.0, -0.5]).unwrap(), array![2.0, 0.0]);
    }

    #[test]
    fn custom_without_resolvent_is_unsupported() {
        let a = MaximalMonotoneOperator::Custom {
            name: "mystery".into(),
            resolvent: None,
        };
        assert!(matches!(a.resolvent(1.0, &array![1.0]), Err(Error::Unsupported(_))));
        let shrink = MaximalMonotoneOperator::custom("shrink", |eta, x: &Point| x / (1.0 + eta));
        assert_eq!(shrink.resolvent(1.0, &array![2.0]).unwrap(), array![1.0]);
    }

    #[test]
    fn nonpositive_eta_rejected() {
        assert!(resolvent_apply(&MaximalMonotoneOperator::Zero, 0.0, &array![1.0]).is_err());
    }

    fn catalog(n: usize) -> Vec<MaximalMonotoneOperator> {
        vec![
            MaximalMonotoneOperator::Zero,
            MaximalMonotoneOperator::NormalCone(FeasibleSet::uniform_box(n, -1.0, 1.0).unwrap()),
            MaximalMonotoneOperator::NormalCone(
                FeasibleSet::ball(ndarray::Array1::from_elem(n, 0.3), 2.0).unwrap(),
            ),
            MaximalMonotoneOperator::NormalCone(FeasibleSet::nonneg_orthant(n)),
            MaximalMonotoneOperator::NormalCone(
                FeasibleSet::halfspace(ndarray::Array1::from_elem(n, 1.0), 0.5).unwrap(),
            ),
            MaximalMonotoneOperator::Subgradient(ProxFunction::L1Norm),
            MaximalMonotoneOperator::Subgradient(ProxFunction::L2Norm),
            MaximalMonotoneOperator::Subgradient(ProxFunction::SquaredL2),
        ]
    }

    #[test]
    fn resolvents_are_nonexpansive() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 3;
        for a in catalog(n) {
            for _ in 0..10_000 {
                let eta = rng.gen_range(0.01..5.0);
                let u: Point = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
                let v: Point = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
                let du = crate::point::dist(&u, &v);
                let dj = crate::point::dist(&a.resolvent(eta, &u).unwrap(), &a.resolvent(eta, &v).unwrap());
                assert!(dj <= du * (1.0 + 1e-12), "{a:?}");
            }
        }
    }

    #[test]
    fn resolvent_graph_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 2;
        for a in catalog(n) {
            for _ in 0..2_000 {
                let eta = rng.gen_range(0.05..4.0);
                let x: Point = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
                let z = a.resolvent(eta, &x).unwrap();
                let c = (&x - &z) / eta;
                assert!(a.graph_contains(&z, &c, 1e-9).unwrap(), "{a:?} x={x}");
                if let Some(set) = a.feasible_set() {
                    for _ in 0..5 {
                        let zp = set.sample_point(&mut rng, 10.0);
                        assert!(crate::point::dot(&c, &(&zp - &z)) <= 1e-10 * norm(&c).max(1.0));
                    }
                }
            }
        }
    }

    #[test]
    fn operator_dimension_checked() {
        let f = SingleValuedOperator::identity(2);
        assert!(f.evaluate(&array![1.0]).is_err());
        assert!(SingleValuedOperator::new(2, -1.0, |z| z.clone()).is_err());
    }
}

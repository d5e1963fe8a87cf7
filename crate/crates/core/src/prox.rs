//! Closed-form proximal operators `prox_{λg}(v) = argmin_z g(z) + |z - v|^2 / (2λ)`.

use crate::error::{check_dim, Error, Result};
use crate::point::{norm, Point};
use crate::sets::FeasibleSet;

#[derive(Debug, Clone, PartialEq)]
pub enum ProxFunction {
    /// `|z|_1`, prox is element-wise soft-thresholding.
    L1Norm,
    /// `|z|_2`, prox is block soft-thresholding.
    L2Norm,
    /// `|z|^2 / 2`
    SquaredL2,
    /// Indicator of a closed convex set, prox is the projection.
    Indicator(FeasibleSet),
}

impl ProxFunction {
    /// Parses a catalog name. Indicators are built programmatically.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "l1" | "l1_norm" => Ok(ProxFunction::L1Norm),
            "l2" | "l2_norm" => Ok(ProxFunction::L2Norm),
            "squared_l2" | "sq_l2" => Ok(ProxFunction::SquaredL2),
            other => Err(Error::Unsupported(format!(
                "no closed-form proximal operator for `{other}`"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProxFunction::L1Norm => "l1_norm",
            ProxFunction::L2Norm => "l2_norm",
            ProxFunction::SquaredL2 => "squared_l2",
            ProxFunction::Indicator(_) => "indicator",
        }
    }

    /// Function value; `+inf` outside the set for indicators.
    pub fn value(&self, z: &Point) -> f64 {
        match self {
            ProxFunction::L1Norm => z.iter().map(|v| v.abs()).sum(),
            ProxFunction::L2Norm => norm(z),
            ProxFunction::SquaredL2 => 0.5 * z.dot(z),
            ProxFunction::Indicator(set) => match set.contains(z, 1e-12) {
                Ok(true) => 0.0,
                _ => f64::INFINITY,
            },
        }
    }

    pub fn prox(&self, lambda: f64, v: &Point) -> Result<Point> {
        prox_catalog(self, lambda, v)
    }
}

pub fn prox_catalog(g: &ProxFunction, lambda: f64, v: &Point) -> Result<Point> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "prox parameter must be positive, got {lambda}"
        )));
    }
    Ok(match g {
        ProxFunction::L1Norm => v.mapv(|vi| (vi - lambda).max(0.0) - (-vi - lambda).max(0.0)),
        ProxFunction::L2Norm => {
            let r = norm(v);
            if r <= lambda {
                v.mapv(|_| 0.0)
            } else {
                v * (1.0 - lambda / r)
            }
        }
        ProxFunction::SquaredL2 => v / (1.0 + lambda),
        ProxFunction::Indicator(set) => {
            check_dim(set.dim(), v.len())?;
            set.project(v)?
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn soft_thresholding() {
        let p = prox_catalog(&ProxFunction::L1Norm, 1.0, &array![3.0, -0.5]).unwrap();
        assert_eq!(p, array![2.0, 0.0]);
        let p = prox_catalog(&ProxFunction::L1Norm, 0.5, &array![-3.0, 0.25]).unwrap();
        assert_eq!(p, array![-2.5, 0.0]);
    }

    #[test]
    fn indicator_is_projection() {
        let set = FeasibleSet::uniform_box(2, 0.0, 1.0).unwrap();
        for lambda in [0.1, 1.0, 7.0] {
            let p = prox_catalog(&ProxFunction::Indicator(set.clone()), lambda, &array![2.0, -1.0])
                .unwrap();
            assert_eq!(p, array![1.0, 0.0]);
        }
    }

    /// Minimises `g(z) + (z - v)^2 / (2λ)` coordinate-wise on a fine grid.
    fn grid_prox_1d(g: impl Fn(f64) -> f64, lambda: f64, v: f64) -> f64 {
        let (lo, hi, steps) = (v - 10.0, v + 10.0, 2_000_000);
        let h = (hi - lo) / steps as f64;
        (0..=steps)
            .map(|k| lo + k as f64 * h)
            .map(|z| (g(z) + (z - v) * (z - v) / (2.0 * lambda), z))
            .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a })
            .1
    }

    #[test]
    fn squared_l2_matches_grid_oracle() {
        // g(z) = z^2/2 is separable, so the 1-D grid minimiser per coordinate is the prox.
        let oracle = grid_prox_1d(|z| 0.5 * z * z, 1.0, 2.0);
        assert!((oracle - 1.0).abs() < 1e-5);
        let p = prox_catalog(&ProxFunction::SquaredL2, 1.0, &array![2.0, 2.0]).unwrap();
        assert_eq!(p, array![1.0, 1.0]);
        for (lambda, v) in [(0.3, -1.7), (2.5, 4.0)] {
            let exact = prox_catalog(&ProxFunction::SquaredL2, lambda, &array![v]).unwrap()[0];
            assert!((exact - grid_prox_1d(|z| 0.5 * z * z, lambda, v)).abs() < 1e-5);
        }
    }

    #[test]
    fn l1_matches_grid_oracle() {
        for (lambda, v) in [(1.0, 3.0), (1.0, -0.5), (0.7, -2.2)] {
            let exact = prox_catalog(&ProxFunction::L1Norm, lambda, &array![v]).unwrap()[0];
            assert!((exact - grid_prox_1d(f64::abs, lambda, v)).abs() < 1e-5);
        }
    }

    #[test]
    fn l2_block_shrinkage() {
        let p = prox_catalog(&ProxFunction::L2Norm, 1.0, &array![3.0, 4.0]).unwrap();
        assert!((p[0] - 2.4).abs() < 1e-15 && (p[1] - 3.2).abs() < 1e-15);
        let p = prox_catalog(&ProxFunction::L2Norm, 6.0, &array![3.0, 4.0]).unwrap();
        assert_eq!(p, array![0.0, 0.0]);
    }

    #[test]
    fn unknown_name_is_unsupported() {
        assert!(matches!(ProxFunction::from_name("log_barrier"), Err(Error::Unsupported(_))));
        assert!(prox_catalog(&ProxFunction::L1Norm, 0.0, &array![1.0]).is_err());
    }
}

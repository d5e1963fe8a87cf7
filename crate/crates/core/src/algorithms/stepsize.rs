//! Admissible constant step sizes for OG and ARG, and the conditions behind them.

use crate::error::{Error, Result};

/// `C = 1/2 + 2ρ/η - 2η²L²`; OG's rate constant, which must be positive.
pub fn og_constant(eta: f64, rho: f64, lipschitz: f64) -> f64 {
    0.5 + 2.0 * rho / eta - 2.0 * eta * eta * lipschitz * lipschitz
}

/// Left-hand side of ARG's step-size condition
/// `1/2 - (12 - 4ρ/η)η²L² + 2ρ/η >= 0`.
pub fn arg_condition(eta: f64, rho: f64, lipschitz: f64) -> f64 {
    0.5 - (12.0 - 4.0 * rho / eta) * eta * eta * lipschitz * lipschitz + 2.0 * rho / eta
}

/// Smallest (excluded) ρ for which OG has an admissible step: `-1/(12√3 L)`.
pub fn og_rho_bound(lipschitz: f64) -> f64 {
    -1.0 / (12.0 * 3f64.sqrt() * lipschitz)
}

/// Smallest (included) ρ covered by the ARG analysis: `-1/(60 L)`.
pub fn arg_rho_bound(lipschitz: f64) -> f64 {
    -1.0 / (60.0 * lipschitz)
}

/// Upper (excluded) step bound for RG: `1/((1+√2)L)`.
pub fn rg_eta_bound(lipschitz: f64) -> f64 {
    1.0 / ((1.0 + 2f64.sqrt()) * lipschitz)
}

fn check_lipschitz(lipschitz: f64) -> Result<()> {
    if lipschitz > 0.0 && lipschitz.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "Lipschitz constant must be positive, got {lipschitz}"
        )))
    }
}

/// `η = 1/(2√3 L)`, which keeps `C > 0` for every `ρ > -1/(12√3 L)`.
///
/// Positive ρ is treated as 0.
pub fn stepsize_og(lipschitz: f64, rho: f64) -> Result<f64> {
    check_lipschitz(lipschitz)?;
    let bound = og_rho_bound(lipschitz);
    if !(rho > bound) {
        return Err(Error::InfeasibleStepsize { rho, bound });
    }
    Ok(1.0 / (2.0 * 3f64.sqrt() * lipschitz))
}

/// `η = 1/(12 L)`, which satisfies the ARG condition for every `ρ >= -1/(60 L)`
/// and hence also `ρ/η >= -1/4`.
///
/// Positive ρ is treated as 0.
pub fn stepsize_arg(lipschitz: f64, rho: f64) -> Result<f64> {
    check_lipschitz(lipschitz)?;
    let bound = arg_rho_bound(lipschitz);
    if !(rho >= bound) {
        return Err(Error::InfeasibleStepsize { rho, bound });
    }
    let rho = rho.min(0.0);
    let eta = 1.0 / (12.0 * lipschitz);
    if arg_condition(eta, rho, lipschitz) < 0.0 || rho / eta < -0.25 {
        return Err(Error::InfeasibleStepsize { rho, bound });
    }
    Ok(eta)
}

//! Least-squares power-law fits of residual curves.

use serde::Serialize;

use crate::algorithms::Trajectory;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub r_squared: f64,
}

/// Fits `log y = a + slope · log x`.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<RateFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidWindow(format!(
            "need at least two paired samples, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    if let Some((x, y)) = xs.iter().zip(ys).find(|(x, y)| !(**x > 0.0 && **y > 0.0)) {
        return Err(Error::InvalidWindow(format!("nonpositive sample ({x}, {y})")));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidWindow("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(RateFit { slope, r_squared })
}

/// Fits the certified residual (natural residual where no certificate exists)
/// against `t` over the inclusive window `[lo, hi]`.
pub fn fit_rate(traj: &Trajectory, window: (usize, usize)) -> Result<RateFit> {
    let (lo, hi) = window;
    let last = traj.records.len() - 1;
    if lo == 0 || lo >= hi || hi > last {
        return Err(Error::InvalidWindow(format!(
            "[{lo}, {hi}] is not a valid window inside [1, {last}]"
        )));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = traj.records[lo..=hi]
        .iter()
        .map(|r| (r.t as f64, r.residuals.certified.unwrap_or(r.residuals.natural)))
        .unzip();
    fit_power_law(&xs, &ys)
}

//! Problem specifications (`name:key=value,...`) and experiment configuration files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use inclusion_core::algorithms::{stepsize_arg, stepsize_og, Algorithm, AlgorithmConfig};
use inclusion_core::problem::{
    make_antidiagonal_problem, make_bilinear_box_problem, make_rotation_problem,
    make_rotation_problem_from_cos,
};
use inclusion_core::{InclusionProblem, Point};
use ndarray::Array1;
use serde::Deserialize;

use crate::error::BenchError;

pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    Antidiagonal { n: usize },
    Rotation { lipschitz: f64, angle: RotationAngle },
    BilinearBox { n: usize, bound: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RotationAngle {
    Theta(f64),
    CosTheta(f64),
}

fn parse_params(spec: &str, body: &str) -> Result<BTreeMap<String, String>, BenchError> {
    let mut out = BTreeMap::new();
    for part in body.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| {
            BenchError::config("problem", format!("`{part}` in `{spec}` is not key=value"))
        })?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn take<T: std::str::FromStr>(
    params: &mut BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>, BenchError> {
    match params.remove(key) {
        None => Ok(None),
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|_| BenchError::config(key, format!("cannot parse `{v}`"))),
    }
}

impl ProblemSpec {
    pub fn parse(spec: &str) -> Result<Self, BenchError> {
        let (name, body) = spec.split_once(':').unwrap_or((spec, ""));
        let mut params = parse_params(spec, body)?;
        let parsed = match name.trim() {
            "antidiagonal" => ProblemSpec::Antidiagonal {
                n: take(&mut params, "n")?.unwrap_or(100),
            },
            "rotation" => {
                let lipschitz = take(&mut params, "L")?.unwrap_or(1.0);
                let theta: Option<f64> = take(&mut params, "theta")?;
                let cos: Option<f64> = take(&mut params, "costheta")?;
                let angle = match (theta, cos) {
                    (Some(t), None) => RotationAngle::Theta(t),
                    (None, Some(c)) => RotationAngle::CosTheta(c),
                    _ => {
                        return Err(BenchError::config(
                            "problem",
                            "rotation needs exactly one of theta= or costheta=",
                        ))
                    }
                };
                ProblemSpec::Rotation { lipschitz, angle }
            }
            "bilinear_box" => ProblemSpec::BilinearBox {
                n: take(&mut params, "n")?.unwrap_or(2),
                bound: take(&mut params, "bound")?.unwrap_or(1.0),
            },
            other => {
                return Err(BenchError::config("problem", format!("unknown problem `{other}`")));
            }
        };
        if let Some(key) = params.keys().next() {
            return Err(BenchError::config(key, format!("unknown parameter for `{name}`")));
        }
        Ok(parsed)
    }

    pub fn build(&self) -> Result<InclusionProblem, BenchError> {
        let p = match *self {
            ProblemSpec::Antidiagonal { n } => make_antidiagonal_problem(n),
            ProblemSpec::Rotation { lipschitz, angle: RotationAngle::Theta(t) } => {
                make_rotation_problem(lipschitz, t)
            }
            ProblemSpec::Rotation { lipschitz, angle: RotationAngle::CosTheta(c) } => {
                make_rotation_problem_from_cos(lipschitz, c)
            }
            ProblemSpec::BilinearBox { n, bound } => make_bilinear_box_problem(n, bound),
        };
        p.map_err(|e| BenchError::config("problem", e.to_string()))
    }
}

/// One solver entry of an experiment. Missing step sizes fall back to
/// [`default_eta`], missing initial points to the all-ones vector.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmEntry {
    pub algorithm: Algorithm,
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default)]
    pub stop_epsilon: f64,
    #[serde(default)]
    pub initial_point: Option<Vec<f64>>,
}

fn default_max_iterations() -> usize {
    DEFAULT_MAX_ITERATIONS
}

fn default_record_every() -> usize {
    1
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: String,
    pub algorithms: Vec<AlgorithmEntry>,
    #[serde(default)]
    pub audits: Vec<String>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::config("config", format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| BenchError::config("config", e.to_string()))
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.algorithms.is_empty() {
            return Err(BenchError::config("algorithms", "at least one algorithm is required"));
        }
        if self.record_every == 0 {
            return Err(BenchError::config("record_every", "must be at least 1"));
        }
        for name in self.audits.iter().filter(|n| *n != "all") {
            crate::experiment::AuditKind::from_name(name)?;
        }
        ProblemSpec::parse(&self.problem)?;
        Ok(())
    }
}

/// Step size used when none is configured: the admissible constants for OG
/// and ARG, `0.4/L` for the others.
pub fn default_eta(problem: &InclusionProblem, algorithm: Algorithm) -> Result<f64, BenchError> {
    let l = problem.lipschitz();
    let rho = problem.regime().effective_rho();
    match algorithm {
        Algorithm::Og => stepsize_og(l, rho).map_err(|e| BenchError::config("eta", e.to_string())),
        Algorithm::Arg => stepsize_arg(l, rho).map_err(|e| BenchError::config("eta", e.to_string())),
        Algorithm::Eg | Algorithm::Peg | Algorithm::Rg => Ok(0.4 / l),
    }
}

impl AlgorithmEntry {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            eta: None,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            stop_epsilon: 0.0,
            initial_point: None,
        }
    }

    pub fn resolve(&self, problem: &InclusionProblem, seed: u64) -> Result<AlgorithmConfig, BenchError> {
        let eta = match self.eta {
            Some(e) if e > 0.0 && e.is_finite() => e,
            Some(e) => return Err(BenchError::config("eta", format!("must be positive, got {e}"))),
            None => default_eta(problem, self.algorithm)?,
        };
        if !(self.stop_epsilon >= 0.0) {
            return Err(BenchError::config("stop_epsilon", "must be nonnegative"));
        }
        let z0: Point = match &self.initial_point {
            Some(v) if v.len() == problem.dim() => Array1::from_vec(v.clone()),
            Some(v) => {
                return Err(BenchError::config(
                    "initial_point",
                    format!("has {} entries, problem dimension is {}", v.len(), problem.dim()),
                ))
            }
            None => Array1::ones(problem.dim()),
        };
        Ok(AlgorithmConfig::new(self.algorithm, eta, self.max_iterations, z0)
            .with_epsilon(self.stop_epsilon)
            .with_seed(seed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_problem_specs() {
        assert_eq!(ProblemSpec::parse("antidiagonal:n=100").unwrap(), ProblemSpec::Antidiagonal { n: 100 });
        assert_eq!(
            ProblemSpec::parse("rotation:L=1,costheta=-0.0166667").unwrap(),
            ProblemSpec::Rotation { lipschitz: 1.0, angle: RotationAngle::CosTheta(-0.0166667) }
        );
        assert_eq!(
            ProblemSpec::parse("bilinear_box:n=2,bound=1").unwrap(),
            ProblemSpec::BilinearBox { n: 2, bound: 1.0 }
        );
        assert_eq!(ProblemSpec::parse("antidiagonal").unwrap(), ProblemSpec::Antidiagonal { n: 100 });
    }

    #[test]
    fn errors_name_the_key() {
        let e = ProblemSpec::parse("antidiagonal:n=abc").unwrap_err();
        assert!(e.to_string().contains("`n`"), "{e}");
        let e = ProblemSpec::parse("antidiagonal:m=4").unwrap_err();
        assert!(e.to_string().contains("`m`"), "{e}");
        assert!(ProblemSpec::parse("rotation:L=1").is_err());
        assert!(ProblemSpec::parse("nope").is_err());
        assert!(ProblemSpec::parse("antidiagonal:n=3").unwrap().build().is_err());
    }

    #[test]
    fn experiment_config_json() {
        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"problem": "antidiagonal:n=4", "algorithms": [{"algorithm": "rg", "eta": 0.3}],
                "audits": ["rg_potential"], "output_dir": "x", "record_every": 2}"#,
        )
        .unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.algorithms[0].max_iterations, DEFAULT_MAX_ITERATIONS);
        let bad: Result<ExperimentConfig, _> =
            serde_json::from_str(r#"{"problem": "antidiagonal", "algorithms": [], "bogus": 1}"#);
        assert!(bad.unwrap_err().to_string().contains("bogus"));
    }

    #[test]
    fn default_steps() {
        let p = ProblemSpec::parse("rotation:L=1,costheta=-0.0166").unwrap().build().unwrap();
        assert_eq!(default_eta(&p, Algorithm::Arg).unwrap(), 1.0 / 12.0);
        let p = ProblemSpec::parse("rotation:L=1,costheta=-0.5").unwrap().build().unwrap();
        assert!(default_eta(&p, Algorithm::Og).is_err());
    }
}

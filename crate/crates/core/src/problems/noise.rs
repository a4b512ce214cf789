//! Stochastic noise applied to residual vectors.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::LeastSquaresProblem;
use crate::error::{DfolsError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    None,
    /// `(1 + e_i) r_i`
    MultGaussian,
    /// `r_i + e_i`
    AddGaussian,
    /// `sqrt(r_i^2 + e_i^2)`
    AddChi2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub sigma: f64,
}

impl NoiseModel {
    pub const NONE: NoiseModel = NoiseModel { kind: NoiseKind::None, sigma: 0.0 };

    pub fn new(kind: NoiseKind, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(DfolsError::InvalidParameter(format!("noise sigma must be finite and >= 0, got {sigma}")));
        }
        if kind == NoiseKind::None && sigma != 0.0 {
            return Err(DfolsError::InvalidParameter("noise kind none takes sigma = 0".into()));
        }
        Ok(NoiseModel { kind, sigma })
    }

    pub fn is_deterministic(&self) -> bool {
        self.kind == NoiseKind::None || self.sigma == 0.0
    }

    /// Noisy residuals from exact residuals `r`, drawing one `N(0, sigma^2)`
    /// variate per component.
    pub fn apply<R: Rng + ?Sized>(&self, r: &[f64], rng: &mut R) -> Vec<f64> {
        if self.is_deterministic() {
            return r.to_vec();
        }
        r.iter()
            .map(|&ri| {
                let e: f64 = self.sigma * rng.sample::<f64, _>(StandardNormal);
                match self.kind {
                    NoiseKind::None => ri,
                    NoiseKind::MultGaussian => (1.0 + e) * ri,
                    NoiseKind::AddGaussian => ri + e,
                    NoiseKind::AddChi2 => (ri * ri + e * e).sqrt(),
                }
            })
            .collect()
    }

    /// `E[|r~|^2]` given `f = |r|^2` and `m` residuals.
    pub fn expected_objective(&self, f: f64, m: usize) -> f64 {
        let s2 = self.sigma * self.sigma;
        match self.kind {
            NoiseKind::None => f,
            NoiseKind::MultGaussian => (1.0 + s2) * f,
            NoiseKind::AddGaussian | NoiseKind::AddChi2 => f + m as f64 * s2,
        }
    }
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            NoiseKind::None => return write!(f, "none"),
            NoiseKind::MultGaussian => "mult_gaussian",
            NoiseKind::AddGaussian => "add_gaussian",
            NoiseKind::AddChi2 => "add_chi2",
        };
        write!(f, "{kind}:{}", self.sigma)
    }
}

/// Parses `none` or `kind:sigma`.
impl FromStr for NoiseModel {
    type Err = DfolsError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || DfolsError::InvalidParameter(format!("cannot parse noise '{s}', expected kind:sigma"));
        if s == "none" {
            return Ok(NoiseModel::NONE);
        }
        let (kind, sigma) = s.split_once(':').ok_or_else(bad)?;
        let kind = match kind {
            "none" => NoiseKind::None,
            "mult_gaussian" | "mult" => NoiseKind::MultGaussian,
            "add_gaussian" | "add" => NoiseKind::AddGaussian,
            "add_chi2" | "chi2" => NoiseKind::AddChi2,
            _ => return Err(bad()),
        };
        let sigma: f64 = sigma.parse().map_err(|_| bad())?;
        NoiseModel::new(kind, sigma)
    }
}

/// Generator for one evaluation: keyed by the run seed and problem id,
/// with the evaluation index selecting the stream.
pub(crate) fn evaluation_rng(seed: u64, problem_id: u32, domain: u8, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..12].copy_from_slice(&problem_id.to_le_bytes());
    key[12] = domain;
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

const DOMAIN_EVAL: u8 = 1;
const DOMAIN_STD: u8 = 2;

/// A problem seen through a noise model. Evaluation `k` (counting from 0)
/// always draws the same noise, independent of the evaluation points.
#[derive(Debug, Clone)]
pub struct NoisyProblem<'a> {
    pub base: &'a LeastSquaresProblem,
    pub noise: NoiseModel,
    pub seed: u64,
}

impl<'a> NoisyProblem<'a> {
    pub fn new(base: &'a LeastSquaresProblem, noise: NoiseModel, seed: u64) -> Self {
        NoisyProblem { base, noise, seed }
    }

    /// Noisy residuals at `x` for evaluation number `index`. Non-finite base
    /// residuals pass through unchanged so the solver sees a failure.
    pub fn evaluate(&self, x: &[f64], index: u64) -> Vec<f64> {
        let r = self.base.residual(x);
        if r.iter().any(|v| !v.is_finite()) {
            return r;
        }
        let mut rng = evaluation_rng(self.seed, self.base.id, DOMAIN_EVAL, index);
        self.noise.apply(&r, &mut rng)
    }

    /// Closure evaluating with consecutive indices `0, 1, 2, ...`.
    pub fn residual_fn(&self) -> impl FnMut(&[f64]) -> Vec<f64> + '_ {
        let mut index = 0u64;
        move |x: &[f64]| {
            let r = self.evaluate(x, index);
            index += 1;
            r
        }
    }
}

/// `E[f~(x)]` in closed form.
pub fn expected_noisy_objective(problem: &LeastSquaresProblem, noise: &NoiseModel, x: &[f64]) -> f64 {
    noise.expected_objective(problem.objective(x), problem.m)
}

/// Sample standard deviation of `f~(x)` over `n_samples` draws.
pub fn noise_std_at(problem: &LeastSquaresProblem, noise: &NoiseModel, x: &[f64], n_samples: usize, seed: u64) -> f64 {
    noise_std_of_residuals(&problem.residual(x), noise, n_samples, seed, problem.id)
}

/// As [`noise_std_at`] for a given exact residual vector.
pub fn noise_std_of_residuals(r: &[f64], noise: &NoiseModel, n_samples: usize, seed: u64, problem_id: u32) -> f64 {
    if noise.is_deterministic() || n_samples < 2 {
        return 0.0;
    }
    let mut rng = evaluation_rng(seed, problem_id, DOMAIN_STD, 0);
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for k in 0..n_samples {
        let f: f64 = noise.apply(r, &mut rng).iter().map(|v| v * v).sum();
        let delta = f - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (f - mean);
    }
    (m2 / (n_samples - 1) as f64).sqrt()
}

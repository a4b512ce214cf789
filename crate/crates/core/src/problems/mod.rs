//! Test problems: the 53 Moré-Wild instances, scalable medium-size
//! problems, and noise wrappers.

pub mod functions;
pub mod noise;
mod reference;

use serde::{Deserialize, Serialize};

use crate::bounds::Bounds;
use crate::error::{DfolsError, Result};
pub use functions::Family;
pub use noise::{
    expected_noisy_objective, noise_std_at, noise_std_of_residuals, NoiseKind, NoiseModel, NoisyProblem,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Collection {
    /// Low-dimensional problems, `2 <= n <= 12`.
    MoreWild,
    /// Generalised Rosenbrock, Broyden and linear problems at `n` in {25, 50, 100}.
    Scalable,
}

#[derive(Debug, Clone)]
pub struct LeastSquaresProblem {
    /// Position in the catalog, used to key random streams.
    pub id: u32,
    pub name: String,
    pub family: Family,
    pub collection: Collection,
    pub n: usize,
    pub m: usize,
    pub x0: Vec<f64>,
    pub bounds: Option<Bounds>,
    pub f_star: f64,
    /// A minimiser attaining `f_star`, where one is recorded.
    pub x_star: Option<Vec<f64>>,
    pub zero_residual: bool,
}

impl LeastSquaresProblem {
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        self.family.residual(x, self.m)
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        crate::numerics::sum_squares(&self.residual(x))
    }

    pub fn f0(&self) -> f64 {
        self.objective(&self.x0)
    }

    /// Exact residuals at the recorded minimiser; zeros for zero-residual
    /// problems without one.
    pub fn residual_at_solution(&self) -> Option<Vec<f64>> {
        match &self.x_star {
            Some(x) => Some(self.residual(x)),
            None if self.zero_residual => Some(vec![0.0; self.m]),
            None => None,
        }
    }

    /// Default evaluation budget in units of `n + 1`.
    pub fn budget_multiplier(&self) -> usize {
        match self.collection {
            Collection::MoreWild => 10_000,
            Collection::Scalable => 50,
        }
    }
}

/// `(family, n, m, x0 scaled by 10)` for each Moré-Wild instance in order.
const MORE_WILD: [(Family, usize, usize, bool); 53] = [
    (Family::LinearFullRank, 9, 45, false),
    (Family::LinearFullRank, 9, 45, true),
    (Family::LinearRank1, 7, 35, false),
    (Family::LinearRank1, 7, 35, true),
    (Family::LinearRank1ZeroCols, 7, 35, false),
    (Family::LinearRank1ZeroCols, 7, 35, true),
    (Family::Rosenbrock, 2, 2, false),
    (Family::Rosenbrock, 2, 2, true),
    (Family::HelicalValley, 3, 3, false),
    (Family::HelicalValley, 3, 3, true),
    (Family::PowellSingular, 4, 4, false),
    (Family::PowellSingular, 4, 4, true),
    (Family::FreudensteinRoth, 2, 2, false),
    (Family::FreudensteinRoth, 2, 2, true),
    (Family::Bard, 3, 15, false),
    (Family::Bard, 3, 15, true),
    (Family::KowalikOsborne, 4, 11, false),
    (Family::Meyer, 3, 16, false),
    (Family::Watson, 6, 31, false),
    (Family::Watson, 6, 31, true),
    (Family::Watson, 9, 31, false),
    (Family::Watson, 9, 31, true),
    (Family::Watson, 12, 31, false),
    (Family::Watson, 12, 31, true),
    (Family::Box3d, 3, 10, false),
    (Family::JennrichSampson, 2, 10, false),
    (Family::BrownDennis, 4, 20, false),
    (Family::BrownDennis, 4, 20, true),
    (Family::Chebyquad, 6, 6, false),
    (Family::Chebyquad, 7, 7, false),
    (Family::Chebyquad, 8, 8, false),
    (Family::Chebyquad, 9, 9, false),
    (Family::Chebyquad, 10, 10, false),
    (Family::Chebyquad, 11, 11, false),
    (Family::BrownAlmostLinear, 10, 10, false),
    (Family::Osborne1, 5, 33, false),
    (Family::Osborne2, 11, 65, false),
    (Family::Osborne2, 11, 65, true),
    (Family::Bdqrtic, 8, 8, false),
    (Family::Bdqrtic, 10, 12, false),
    (Family::Bdqrtic, 11, 14, false),
    (Family::Bdqrtic, 12, 16, false),
    (Family::Cube, 5, 5, false),
    (Family::Cube, 6, 6, false),
    (Family::Cube, 8, 8, false),
    (Family::Mancino, 5, 5, false),
    (Family::Mancino, 5, 5, true),
    (Family::Mancino, 8, 8, false),
    (Family::Mancino, 10, 10, false),
    (Family::Mancino, 12, 12, false),
    (Family::Mancino, 12, 12, true),
    (Family::Heart8, 8, 8, false),
    (Family::Heart8, 8, 8, true),
];

const SCALABLE_FAMILIES: [Family; 4] =
    [Family::GeneralizedRosenbrock, Family::BroydenTridiagonal, Family::BroydenBanded, Family::LinearFullRank];

pub const SCALABLE_DIMS: [usize; 3] = [25, 50, 100];

/// Families with more than one dimension in the Moré-Wild set carry `n` in
/// their name.
fn has_several_dims(family: Family) -> bool {
    matches!(family, Family::Watson | Family::Chebyquad | Family::Bdqrtic | Family::Cube | Family::Mancino)
}

fn more_wild_problem(index: usize) -> LeastSquaresProblem {
    let (family, n, m, scaled) = MORE_WILD[index];
    let mut name = family.slug().to_string();
    if has_several_dims(family) {
        name.push_str(&n.to_string());
    }
    if scaled {
        name.push_str("_x10");
    }
    let mut x0 = family.start(n);
    if scaled {
        x0.iter_mut().for_each(|v| *v *= 10.0);
    }
    let rec = reference::more_wild(index);
    LeastSquaresProblem {
        id: index as u32 + 1,
        name,
        family,
        collection: Collection::MoreWild,
        n,
        m,
        x0,
        bounds: None,
        f_star: rec.f_star,
        x_star: Some(rec.x_star.to_vec()),
        zero_residual: rec.f_star == 0.0,
    }
}

fn scalable_problem(family: Family, n: usize, id: u32) -> LeastSquaresProblem {
    let (m, f_star, x_star) = match family {
        Family::GeneralizedRosenbrock => (2 * (n - 1), 0.0, Some(vec![1.0; n])),
        Family::LinearFullRank => (2 * n, n as f64, Some(vec![-1.0; n])),
        _ => (n, 0.0, None),
    };
    LeastSquaresProblem {
        id,
        name: format!("{}_n{n}", family.slug()),
        family,
        collection: Collection::Scalable,
        n,
        m,
        x0: family.start(n),
        bounds: None,
        f_star,
        x_star,
        zero_residual: f_star == 0.0,
    }
}

fn scalable_problems() -> Vec<LeastSquaresProblem> {
    let mut out = Vec::new();
    for (fi, &family) in SCALABLE_FAMILIES.iter().enumerate() {
        for (di, &n) in SCALABLE_DIMS.iter().enumerate() {
            out.push(scalable_problem(family, n, 100 + (fi * SCALABLE_DIMS.len() + di) as u32));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemFilter {
    #[default]
    All,
    MoreWild,
    Scalable,
    Names(Vec<String>),
}

/// The problems selected by `filter`, in catalog order (or the order of the
/// names given).
pub fn catalog(filter: &ProblemFilter) -> Result<Vec<LeastSquaresProblem>> {
    let mw = || (0..MORE_WILD.len()).map(more_wild_problem);
    Ok(match filter {
        ProblemFilter::All => mw().chain(scalable_problems()).collect(),
        ProblemFilter::MoreWild => mw().collect(),
        ProblemFilter::Scalable => scalable_problems(),
        ProblemFilter::Names(names) => names.iter().map(|n| problem(n)).collect::<Result<_>>()?,
    })
}

/// Looks a problem up by name, or by `mwNN` for the `NN`-th Moré-Wild
/// instance.
pub fn problem(name: &str) -> Result<LeastSquaresProblem> {
    if let Some(k) = name.strip_prefix("mw").and_then(|s| s.parse::<usize>().ok()) {
        if (1..=MORE_WILD.len()).contains(&k) {
            return Ok(more_wild_problem(k - 1));
        }
    }
    (0..MORE_WILD.len())
        .map(more_wild_problem)
        .chain(scalable_problems())
        .find(|p| p.name == name)
        .ok_or_else(|| DfolsError::UnknownProblem(name.to_string()))
}

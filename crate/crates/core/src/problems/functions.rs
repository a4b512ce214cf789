//! Residual functions of the test problems.

use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    LinearFullRank,
    LinearRank1,
    LinearRank1ZeroCols,
    Rosenbrock,
    HelicalValley,
    PowellSingular,
    FreudensteinRoth,
    Bard,
    KowalikOsborne,
    Meyer,
    Watson,
    Box3d,
    JennrichSampson,
    BrownDennis,
    Chebyquad,
    BrownAlmostLinear,
    Osborne1,
    Osborne2,
    Bdqrtic,
    Cube,
    Mancino,
    Heart8,
    GeneralizedRosenbrock,
    BroydenTridiagonal,
    BroydenBanded,
}

impl Family {
    pub fn slug(&self) -> &'static str {
        match self {
            Family::LinearFullRank => "linear_full_rank",
            Family::LinearRank1 => "linear_rank1",
            Family::LinearRank1ZeroCols => "linear_rank1_zero",
            Family::Rosenbrock => "rosenbrock",
            Family::HelicalValley => "helical_valley",
            Family::PowellSingular => "powell_singular",
            Family::FreudensteinRoth => "freudenstein_roth",
            Family::Bard => "bard",
            Family::KowalikOsborne => "kowalik_osborne",
            Family::Meyer => "meyer",
            Family::Watson => "watson",
            Family::Box3d => "box3d",
            Family::JennrichSampson => "jennrich_sampson",
            Family::BrownDennis => "brown_dennis",
            Family::Chebyquad => "chebyquad",
            Family::BrownAlmostLinear => "brown_almost_linear",
            Family::Osborne1 => "osborne1",
            Family::Osborne2 => "osborne2",
            Family::Bdqrtic => "bdqrtic",
            Family::Cube => "cube",
            Family::Mancino => "mancino",
            Family::Heart8 => "heart8",
            Family::GeneralizedRosenbrock => "rosenbrock_gen",
            Family::BroydenTridiagonal => "broyden_tridiagonal",
            Family::BroydenBanded => "broyden_banded",
        }
    }

    /// Standard starting point for dimension `n`.
    pub fn start(&self, n: usize) -> Vec<f64> {
        match self {
            Family::LinearFullRank | Family::LinearRank1 | Family::LinearRank1ZeroCols | Family::Bard => vec![1.0; n],
            Family::Rosenbrock => vec![-1.2, 1.0],
            Family::HelicalValley => vec![-1.0, 0.0, 0.0],
            Family::PowellSingular => vec![3.0, -1.0, 0.0, 1.0],
            Family::FreudensteinRoth => vec![0.5, -2.0],
            Family::KowalikOsborne => vec![0.25, 0.39, 0.415, 0.39],
            Family::Meyer => vec![0.02, 4000.0, 250.0],
            Family::Watson => vec![0.5; n],
            Family::Box3d => vec![0.0, 10.0, 20.0],
            Family::JennrichSampson => vec![0.3, 0.4],
            Family::BrownDennis => vec![25.0, 5.0, -5.0, -1.0],
            Family::Chebyquad => (1..=n).map(|j| j as f64 / (n + 1) as f64).collect(),
            Family::BrownAlmostLinear | Family::Cube => vec![0.5; n],
            Family::Osborne1 => vec![0.5, 1.5, -1.0, 0.01, 0.02],
            Family::Osborne2 => vec![1.3, 0.65, 0.65, 0.7, 0.6, 3.0, 5.0, 7.0, 2.0, 4.5, 5.5],
            Family::Bdqrtic => vec![1.0; n],
            Family::Mancino => (1..=n)
                .map(|i| {
                    let ss: f64 = (1..=n)
                        .map(|j| {
                            let v = (i as f64 / j as f64).sqrt();
                            v * (v.ln().sin().powi(5) + v.ln().cos().powi(5))
                        })
                        .sum();
                    -8.710996e-4 * ((i as f64 - 50.0).powi(3) + ss)
                })
                .collect(),
            Family::Heart8 => vec![-0.3, -0.39, 0.3, -0.344, -1.2, 2.69, 1.59, -1.5],
            Family::GeneralizedRosenbrock => (0..n).map(|i| if i % 2 == 0 { -1.2 } else { 1.0 }).collect(),
            Family::BroydenTridiagonal | Family::BroydenBanded => vec![-1.0; n],
        }
    }

    /// Residuals `r(x)` with `m` components.
    pub fn residual(&self, x: &[f64], m: usize) -> Vec<f64> {
        let n = x.len();
        match self {
            Family::LinearFullRank => {
                let t = 2.0 * x.iter().sum::<f64>() / m as f64;
                (0..m).map(|i| if i < n { x[i] - t - 1.0 } else { -t - 1.0 }).collect()
            }
            Family::LinearRank1 => {
                let s: f64 = x.iter().enumerate().map(|(j, v)| (j + 1) as f64 * v).sum();
                (1..=m).map(|i| i as f64 * s - 1.0).collect()
            }
            Family::LinearRank1ZeroCols => {
                let s: f64 = (1..n - 1).map(|j| (j + 1) as f64 * x[j]).sum();
                (1..=m).map(|i| if i < m { (i - 1) as f64 * s - 1.0 } else { -1.0 }).collect()
            }
            Family::Rosenbrock => vec![10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]],
            Family::HelicalValley => {
                let th = if x[0] > 0.0 {
                    (x[1] / x[0]).atan() / (2.0 * PI)
                } else if x[0] < 0.0 {
                    (x[1] / x[0]).atan() / (2.0 * PI) + 0.5
                } else {
                    0.25
                };
                let r = x[0].hypot(x[1]);
                vec![10.0 * (x[2] - 10.0 * th), 10.0 * (r - 1.0), x[2]]
            }
            Family::PowellSingular => vec![
                x[0] + 10.0 * x[1],
                5f64.sqrt() * (x[2] - x[3]),
                (x[1] - 2.0 * x[2]).powi(2),
                10f64.sqrt() * (x[0] - x[3]).powi(2),
            ],
            Family::FreudensteinRoth => vec![
                -13.0 + x[0] + ((5.0 - x[1]) * x[1] - 2.0) * x[1],
                -29.0 + x[0] + ((1.0 + x[1]) * x[1] - 14.0) * x[1],
            ],
            Family::Bard => (0..15)
                .map(|k| {
                    let i = (k + 1) as f64;
                    let (t1, t2) = (i, 16.0 - i);
                    let t3 = t1.min(t2);
                    BARD_Y[k] - (x[0] + t1 / (x[1] * t2 + x[2] * t3))
                })
                .collect(),
            Family::KowalikOsborne => (0..11)
                .map(|i| {
                    let v = KOWALIK_V[i];
                    KOWALIK_Y[i] - x[0] * (v * v + x[1] * v) / (v * v + x[2] * v + x[3])
                })
                .collect(),
            Family::Meyer => (0..16)
                .map(|i| {
                    let t = 45.0 + 5.0 * (i + 1) as f64;
                    x[0] * (x[1] / (t + x[2])).exp() - MEYER_Y[i]
                })
                .collect(),
            Family::Watson => {
                let mut r = Vec::with_capacity(31);
                for i in 1..=29 {
                    let div = i as f64 / 29.0;
                    let mut s1 = 0.0;
                    let mut dx = 1.0;
                    for (j, xj) in x.iter().enumerate().skip(1) {
                        s1 += j as f64 * dx * xj;
                        dx *= div;
                    }
                    let mut s2 = 0.0;
                    dx = 1.0;
                    for xj in x {
                        s2 += dx * xj;
                        dx *= div;
                    }
                    r.push(s1 - s2 * s2 - 1.0);
                }
                r.push(x[0]);
                r.push(x[1] - x[0] * x[0] - 1.0);
                r
            }
            Family::Box3d => (1..=m)
                .map(|i| {
                    let t = i as f64 / 10.0;
                    (-t * x[0]).exp() - (-t * x[1]).exp() + ((-(i as f64)).exp() - (-t).exp()) * x[2]
                })
                .collect(),
            Family::JennrichSampson => (1..=m)
                .map(|i| {
                    let i = i as f64;
                    2.0 + 2.0 * i - ((i * x[0]).exp() + (i * x[1]).exp())
                })
                .collect(),
            Family::BrownDennis => (1..=m)
                .map(|i| {
                    let t = i as f64 / 5.0;
                    let a = x[0] + t * x[1] - t.exp();
                    let b = x[2] + t.sin() * x[3] - t.cos();
                    a * a + b * b
                })
                .collect(),
            Family::Chebyquad => {
                let mut r = vec![0.0; m];
                for xj in x {
                    let mut t1 = 1.0;
                    let mut t2 = 2.0 * xj - 1.0;
                    let t = 2.0 * t2;
                    for ri in r.iter_mut() {
                        *ri += t2;
                        let th = t * t2 - t1;
                        t1 = t2;
                        t2 = th;
                    }
                }
                for (i, ri) in r.iter_mut().enumerate() {
                    *ri /= n as f64;
                    let k = (i + 1) as f64;
                    if (i + 1) % 2 == 0 {
                        *ri += 1.0 / (k * k - 1.0);
                    }
                }
                r
            }
            Family::BrownAlmostLinear => {
                let s = x.iter().sum::<f64>() - (n + 1) as f64;
                let prod: f64 = x.iter().product();
                (0..n).map(|i| if i + 1 < n { x[i] + s } else { prod - 1.0 }).collect()
            }
            Family::Osborne1 => (0..33)
                .map(|i| {
                    let t = 10.0 * i as f64;
                    OSBORNE1_Y[i] - (x[0] + x[1] * (-t * x[3]).exp() + x[2] * (-t * x[4]).exp())
                })
                .collect(),
            Family::Osborne2 => (0..65)
                .map(|i| {
                    let t = i as f64 / 10.0;
                    OSBORNE2_Y[i]
                        - (x[0] * (-t * x[4]).exp()
                            + x[1] * (-(t - x[8]).powi(2) * x[5]).exp()
                            + x[2] * (-(t - x[9]).powi(2) * x[6]).exp()
                            + x[3] * (-(t - x[10]).powi(2) * x[7]).exp())
                })
                .collect(),
            Family::Bdqrtic => {
                let k = n - 4;
                let mut r = vec![0.0; 2 * k];
                for i in 0..k {
                    r[i] = -4.0 * x[i] + 3.0;
                    r[k + i] = x[i].powi(2)
                        + 2.0 * x[i + 1].powi(2)
                        + 3.0 * x[i + 2].powi(2)
                        + 4.0 * x[i + 3].powi(2)
                        + 5.0 * x[n - 1].powi(2);
                }
                r
            }
            Family::Cube => {
                let mut r = vec![x[0] - 1.0];
                r.extend((1..n).map(|i| 10.0 * (x[i] - x[i - 1].powi(3))));
                r
            }
            Family::Mancino => (1..=n)
                .map(|i| {
                    let xi = x[i - 1];
                    let ss: f64 = (1..=n)
                        .map(|j| {
                            let v = (xi * xi + i as f64 / j as f64).sqrt();
                            v * (v.ln().sin().powi(5) + v.ln().cos().powi(5))
                        })
                        .sum();
                    1400.0 * xi + (i as f64 - 50.0).powi(3) + ss
                })
                .collect(),
            Family::Heart8 => heart8(x),
            Family::GeneralizedRosenbrock => {
                let mut r = Vec::with_capacity(2 * (n - 1));
                for i in 0..n - 1 {
                    r.push(10.0 * (x[i + 1] - x[i] * x[i]));
                    r.push(1.0 - x[i]);
                }
                r
            }
            Family::BroydenTridiagonal => (0..n)
                .map(|i| {
                    let prev = if i > 0 { x[i - 1] } else { 0.0 };
                    let next = if i + 1 < n { x[i + 1] } else { 0.0 };
                    (3.0 - 2.0 * x[i]) * x[i] - prev - 2.0 * next + 1.0
                })
                .collect(),
            Family::BroydenBanded => (0..n)
                .map(|i| {
                    let lo = i.saturating_sub(5);
                    let hi = (i + 1).min(n - 1);
                    let band: f64 = (lo..=hi).filter(|&j| j != i).map(|j| x[j] * (1.0 + x[j])).sum();
                    x[i] * (2.0 + 5.0 * x[i] * x[i]) + 1.0 - band
                })
                .collect(),
        }
    }
}

fn heart8(x: &[f64]) -> Vec<f64> {
    let (a, b, c, d, t, u, v, w) = (x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7]);
    vec![
        a + b + 0.69,
        c + d + 0.044,
        t * a + u * b - v * c - w * d + 1.57,
        v * a + w * b + t * c + u * d + 1.31,
        a * (t * t - v * v) - 2.0 * c * t * v + b * (u * u - w * w) - 2.0 * d * u * w + 2.65,
        c * (t * t - v * v) + 2.0 * a * t * v + d * (u * u - w * w) + 2.0 * b * u * w - 2.0,
        a * t * (t * t - 3.0 * v * v) + c * v * (v * v - 3.0 * t * t) + b * u * (u * u - 3.0 * w * w)
            + d * w * (w * w - 3.0 * u * u)
            + 12.0,
        c * t * (t * t - 3.0 * v * v) - a * v * (v * v - 3.0 * t * t) + d * u * (u * u - 3.0 * w * w)
            - b * w * (w * w - 3.0 * u * u)
            - 9.48,
    ]
}

const BARD_Y: [f64; 15] = [0.14, 0.18, 0.22, 0.25, 0.29, 0.32, 0.35, 0.39, 0.37, 0.58, 0.73, 0.96, 1.34, 2.10, 4.39];

const KOWALIK_V: [f64; 11] = [4.0, 2.0, 1.0, 0.5, 0.25, 0.167, 0.125, 0.1, 0.0833, 0.0714, 0.0625];
const KOWALIK_Y: [f64; 11] =
    [0.1957, 0.1947, 0.1735, 0.16, 0.0844, 0.0627, 0.0456, 0.0342, 0.0323, 0.0235, 0.0246];

const MEYER_Y: [f64; 16] = [
    34780.0, 28610.0, 23650.0, 19630.0, 16370.0, 13720.0, 11540.0, 9744.0, 8261.0, 7030.0, 6005.0, 5147.0, 4427.0,
    3820.0, 3307.0, 2872.0,
];

const OSBORNE1_Y: [f64; 33] = [
    0.844, 0.908, 0.932, 0.936, 0.925, 0.908, 0.881, 0.850, 0.818, 0.784, 0.751, 0.718, 0.685, 0.658, 0.628, 0.603,
    0.580, 0.558, 0.538, 0.522, 0.506, 0.490, 0.478, 0.467, 0.457, 0.448, 0.438, 0.431, 0.424, 0.420, 0.414, 0.411,
    0.406,
];

const OSBORNE2_Y: [f64; 65] = [
    1.366, 1.191, 1.112, 1.013, 0.991, 0.885, 0.831, 0.847, 0.786, 0.725, 0.746, 0.679, 0.608, 0.655, 0.616, 0.606,
    0.602, 0.626, 0.651, 0.724, 0.649, 0.649, 0.694, 0.644, 0.624, 0.661, 0.612, 0.558, 0.533, 0.495, 0.500, 0.423,
    0.395, 0.375, 0.372, 0.391, 0.396, 0.405, 0.428, 0.429, 0.523, 0.562, 0.607, 0.653, 0.672, 0.708, 0.633, 0.668,
    0.645, 0.632, 0.591, 0.559, 0.597, 0.625, 0.739, 0.710, 0.729, 0.720, 0.636, 0.581, 0.428, 0.292, 0.162, 0.098,
    0.054,
];

//! Regression targets with known spectral coefficients.

use std::collections::HashMap;
use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::{EigenIndex, ManifoldKind, ManifoldSpec, Trig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralTerm {
    pub frequencies: Vec<u32>,
    pub trig_pattern: Vec<Trig>,
    pub coefficient: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSpec {
    /// `f(x) = (1/d) sum_i i x_i^2` on the flat torus.
    WeightedSquares,
    /// A finite combination of basis functions.
    SyntheticSpectral { coefficients: Vec<SpectralTerm> },
}

impl TargetSpec {
    pub fn check(&self, manifold: &ManifoldSpec) -> Result<()> {
        self.compile(manifold).map(|_| ())
    }

    pub fn compile(&self, manifold: &ManifoldSpec) -> Result<Target> {
        manifold.validate()?;
        let kind = match self {
            TargetSpec::WeightedSquares => {
                if manifold.kind != ManifoldKind::FlatTorus {
                    return Err(Error::Config(
                        "weighted_squares target needs the flat torus".into(),
                    ));
                }
                TargetKind::WeightedSquares
            }
            TargetSpec::SyntheticSpectral { coefficients } => {
                let mut terms = HashMap::new();
                for t in coefficients {
                    let idx = EigenIndex::new(t.frequencies.clone(), t.trig_pattern.clone())?;
                    if idx.dimension() != manifold.dimension {
                        return Err(Error::DimensionMismatch {
                            expected: manifold.dimension,
                            got: idx.dimension(),
                        });
                    }
                    if !t.coefficient.is_finite() {
                        return Err(Error::NonFinite("target coefficient"));
                    }
                    *terms.entry(idx).or_insert(0.0) += t.coefficient;
                }
                let mut terms: Vec<(EigenIndex, f64)> = terms.into_iter().collect();
                terms.sort_by(|a, b| a.0.cmp(&b.0));
                TargetKind::Spectral(terms)
            }
        };
        Ok(Target {
            manifold: manifold.clone(),
            kind,
        })
    }
}

#[derive(Clone, Debug)]
enum TargetKind {
    WeightedSquares,
    Spectral(Vec<(EigenIndex, f64)>),
}

/// A target bound to its manifold.
#[derive(Clone, Debug)]
pub struct Target {
    manifold: ManifoldSpec,
    kind: TargetKind,
}

impl Target {
    pub fn manifold(&self) -> &ManifoldSpec {
        &self.manifold
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.manifold.check_point(x)?;
        Ok(match &self.kind {
            TargetKind::WeightedSquares => weighted_squares(x),
            TargetKind::Spectral(terms) => terms
                .iter()
                .map(|(idx, c)| c * eval_index(&self.manifold, idx, x))
                .sum(),
        })
    }

    /// `<f, phi_index>` under the uniform probability measure.
    pub fn coefficient(&self, index: &EigenIndex) -> f64 {
        match &self.kind {
            TargetKind::WeightedSquares => {
                if !index.is_cosine() {
                    return 0.0;
                }
                let d = index.dimension() as f64;
                let nonzero: Vec<usize> = (0..index.dimension())
                    .filter(|&i| index.frequencies[i] != 0)
                    .collect();
                match nonzero.as_slice() {
                    [] => {
                        let weights: f64 = (1..=index.dimension()).map(|i| i as f64).sum();
                        weights / d * square_moment(2)
                    }
                    [i] => (*i + 1) as f64 / d * square_cosine_coefficient(index.frequencies[*i]),
                    _ => 0.0,
                }
            }
            TargetKind::Spectral(terms) => terms
                .binary_search_by(|(idx, _)| idx.cmp(index))
                .map_or(0.0, |k| terms[k].1),
        }
    }

    /// `||f||^2` under the uniform probability measure.
    pub fn norm_sq(&self) -> f64 {
        match &self.kind {
            TargetKind::WeightedSquares => {
                let d = self.manifold.dimension;
                let (m2, m4) = (square_moment(2), square_moment(4));
                let mut total = 0.0;
                for i in 1..=d {
                    for j in 1..=d {
                        let moment = if i == j { m4 } else { m2 * m2 };
                        total += (i * j) as f64 * moment;
                    }
                }
                total / (d * d) as f64
            }
            TargetKind::Spectral(terms) => terms.iter().map(|(_, c)| c * c).sum(),
        }
    }
}

/// `(1/d) sum_i i x_i^2`, without a domain check.
pub fn weighted_squares(x: &[f64]) -> f64 {
    let d = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(i, &v)| (i + 1) as f64 * v * v)
        .sum::<f64>()
        / d
}

fn eval_index(manifold: &ManifoldSpec, idx: &EigenIndex, x: &[f64]) -> f64 {
    let scale = match manifold.kind {
        ManifoldKind::FlatTorus => std::f64::consts::PI,
        ManifoldKind::Circle => 1.0,
    };
    idx.frequencies
        .iter()
        .zip(&idx.pattern)
        .zip(x)
        .map(|((&l, &t), &xi)| {
            if l == 0 {
                1.0
            } else {
                let a = l as f64 * scale * xi;
                match t {
                    Trig::Cos => SQRT_2 * a.cos(),
                    Trig::Sin => SQRT_2 * a.sin(),
                }
            }
        })
        .product()
}

/// `(1/2) int_{-1}^{1} x^p dx`, by quadrature.
fn square_moment(p: i32) -> f64 {
    integrate_uniform(|x| x.powi(p), 1)
}

/// `<x^2, sqrt(2) cos(pi k x)>` on `[-1, 1)` with the uniform probability
/// measure, by quadrature.
pub fn square_cosine_coefficient(k: u32) -> f64 {
    if k == 0 {
        return square_moment(2);
    }
    let kf = k as f64;
    integrate_uniform(
        |x| x * x * SQRT_2 * (std::f64::consts::PI * kf * x).cos(),
        k as usize + 1,
    )
}

const GL_ORDER: usize = 20;

/// `(1/2) int_{-1}^{1} f` by composite Gauss–Legendre on `panels` panels.
fn integrate_uniform(f: impl Fn(f64) -> f64, panels: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(GL_ORDER);
    let width = 2.0 / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = -1.0 + width * (p as f64 + 0.5);
        let half = width / 2.0;
        let panel: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(&t, &w)| w * f(mid + half * t))
            .sum();
        total += panel * half;
    }
    total / 2.0
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(z) and its derivative
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let step = p0 / dp;
            z -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

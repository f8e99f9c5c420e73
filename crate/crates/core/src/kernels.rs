//! Kernel ridge regression baselines.
//!
//! Kernels are bound to a manifold when compiled. Every base kernel factors as
//! a cheap per-point embedding plus a pairing of two embeddings, which lets a
//! fitted model cache its training embeddings:
//!
//! * von Mises: `exp(eta sum_i cos(s (x_i - y_i)))` with `s = pi` on the torus
//!   and `1` on the circle, written as `exp(eta <e(x), e(y)>)` for
//!   `e(x) = (cos s x_i, sin s x_i)_i`;
//! * truncated Sobolev: `sum_j D_lambda(j)^-alpha phi_j(x) phi_j(y)`;
//! * group averaged: `(1/|G|) sum_g K(g x, y)` over the enumerated group.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spec_avg::LabeledDataset;
use crate::spectra::{ManifoldKind, ManifoldSpec, TruncatedBasis};
use crate::symmetry::{GroupElement, GroupSpec, DEFAULT_CLOSURE_CAP};
use crate::Predictor;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    VonMises {
        eta: f64,
    },
    TruncatedSobolev {
        basis: TruncatedBasis,
        alpha: f64,
    },
    GroupAveraged {
        inner: Box<KernelSpec>,
        group: GroupSpec,
    },
}

#[derive(Clone, Debug)]
enum Base {
    VonMises {
        eta: f64,
        scale: f64,
    },
    Sobolev {
        basis: TruncatedBasis,
        weights: Vec<f64>,
    },
}

impl Base {
    fn embed(&self, manifold: &ManifoldSpec, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Base::VonMises { scale, .. } => {
                manifold.check_point(x)?;
                Ok(x.iter()
                    .flat_map(|&v| {
                        let (s, c) = (scale * v).sin_cos();
                        [c, s]
                    })
                    .collect())
            }
            Base::Sobolev { basis, .. } => basis.eval(x),
        }
    }

    fn pair(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Base::VonMises { eta, .. } => {
                let dot: f64 = a.iter().zip(b).map(|(u, v)| u * v).sum();
                (eta * dot).exp()
            }
            Base::Sobolev { weights, .. } => a
                .iter()
                .zip(b)
                .zip(weights)
                .map(|((u, v), w)| w * u * v)
                .sum(),
        }
    }
}

/// A kernel compiled against a manifold.
#[derive(Clone, Debug)]
pub struct Kernel {
    spec: KernelSpec,
    manifold: ManifoldSpec,
    base: Base,
    /// Present for group-averaged kernels.
    averaging: Option<(GroupSpec, Vec<GroupElement>)>,
}

impl Kernel {
    pub fn new(spec: KernelSpec, manifold: &ManifoldSpec) -> Result<Self> {
        Self::with_cap(spec, manifold, DEFAULT_CLOSURE_CAP)
    }

    /// As [`Kernel::new`], enumerating averaging groups up to `cap` elements.
    pub fn with_cap(spec: KernelSpec, manifold: &ManifoldSpec, cap: usize) -> Result<Self> {
        manifold.validate()?;
        let (base_spec, averaging) = match &spec {
            KernelSpec::GroupAveraged { inner, group } => {
                group.check_manifold(manifold)?;
                if matches!(**inner, KernelSpec::GroupAveraged { .. }) {
                    return Err(Error::InvalidArgument("nested group averaging".into()));
                }
                (&**inner, Some((group.clone(), group.elements(cap)?)))
            }
            other => (other, None),
        };
        let base = match base_spec {
            KernelSpec::VonMises { eta } => {
                if !(*eta > 0.0) || !eta.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "von Mises eta must be > 0, got {eta}"
                    )));
                }
                let scale = match manifold.kind {
                    ManifoldKind::FlatTorus => PI,
                    ManifoldKind::Circle => 1.0,
                };
                Base::VonMises { eta: *eta, scale }
            }
            KernelSpec::TruncatedSobolev { basis, alpha } => {
                if basis.manifold() != manifold {
                    return Err(Error::InvalidArgument(
                        "Sobolev basis built for another manifold".into(),
                    ));
                }
                let weights = basis
                    .function_cumulative_dims()
                    .iter()
                    .map(|&d| (d as f64).powf(-alpha))
                    .collect();
                Base::Sobolev {
                    basis: basis.clone(),
                    weights,
                }
            }
            KernelSpec::GroupAveraged { .. } => unreachable!("rejected above"),
        };
        Ok(Self {
            spec,
            manifold: manifold.clone(),
            base,
            averaging,
        })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn manifold(&self) -> &ManifoldSpec {
        &self.manifold
    }

    /// Number of base-kernel terms in one evaluation.
    pub fn terms_per_eval(&self) -> usize {
        self.averaging.as_ref().map_or(1, |(_, e)| e.len())
    }

    /// Embeddings of the points whose kernel values are averaged for `x` in
    /// the first slot (just `x` unless group-averaged).
    fn left_embeddings(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        match &self.averaging {
            None => Ok(vec![self.base.embed(&self.manifold, x)?]),
            Some((group, elements)) => {
                self.manifold.check_point(x)?;
                elements
                    .iter()
                    .map(|g| self.base.embed(&self.manifold, &group.apply(g, x)?))
                    .collect()
            }
        }
    }

    fn right_embedding(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.base.embed(&self.manifold, y)
    }

    fn pair_averaged(&self, left: &[Vec<f64>], right: &[f64]) -> f64 {
        let sum: f64 = left.iter().map(|l| self.base.pair(l, right)).sum();
        sum / left.len() as f64
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let left = self.left_embeddings(x)?;
        let right = self.right_embedding(y)?;
        Ok(self.pair_averaged(&left, &right))
    }

    /// Gram matrix, computed on the upper triangle and mirrored.
    pub fn gram(&self, points: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        let right = points
            .iter()
            .map(|y| self.right_embedding(y))
            .collect::<Result<Vec<_>>>()?;
        let n = points.len();
        let rows = points
            .par_iter()
            .enumerate()
            .map(|(i, x)| {
                let left = self.left_embeddings(x)?;
                Ok((i..n)
                    .map(|j| self.pair_averaged(&left, &right[j]))
                    .collect::<Vec<_>>())
            })
            .collect::<Result<Vec<_>>>()?;
        let mut k = DMatrix::zeros(n, n);
        for (i, row) in rows.into_iter().enumerate() {
            for (off, v) in row.into_iter().enumerate() {
                k[(i, i + off)] = v;
                k[(i + off, i)] = v;
            }
        }
        Ok(k)
    }
}

/// Kernel plus cached training embeddings, shared by every model fitted on
/// the same points.
#[derive(Debug)]
struct TrainedKernel {
    kernel: Kernel,
    points: Vec<Vec<f64>>,
    embeddings: Vec<Vec<f64>>,
}

impl TrainedKernel {
    fn new(kernel: Kernel, points: Vec<Vec<f64>>) -> Result<Self> {
        let embeddings = points
            .iter()
            .map(|y| kernel.right_embedding(y))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            kernel,
            points,
            embeddings,
        })
    }

    /// `K(x, x_i)` for every training point.
    fn row(&self, x: &[f64]) -> Result<Vec<f64>> {
        let left = self.kernel.left_embeddings(x)?;
        Ok(self
            .embeddings
            .iter()
            .map(|r| self.kernel.pair_averaged(&left, r))
            .collect())
    }
}

#[derive(Clone, Debug)]
pub struct KrrModel {
    trained: Arc<TrainedKernel>,
    /// Dual weights `a` solving `(K + n ridge I) a = y`.
    pub weights: Vec<f64>,
    pub ridge: f64,
    /// Base-kernel evaluations spent on the Gram matrix.
    pub kernel_evals: u64,
}

impl KrrModel {
    pub fn kernel(&self) -> &Kernel {
        &self.trained.kernel
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.trained.points
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        let row = self.trained.row(x)?;
        Ok(row.iter().zip(&self.weights).map(|(k, a)| k * a).sum())
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = KrrDocument {
            manifold: self.kernel().manifold().clone(),
            kernel: self.kernel().spec().clone(),
            ridge: self.ridge,
            points: self.points().to_vec(),
            weights: self.weights.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: KrrDocument = serde_json::from_str(s)?;
        if doc.points.len() != doc.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: doc.points.len(),
                got: doc.weights.len(),
            });
        }
        let kernel = Kernel::new(doc.kernel, &doc.manifold)?;
        Ok(Self {
            trained: Arc::new(TrainedKernel::new(kernel, doc.points)?),
            weights: doc.weights,
            ridge: doc.ridge,
            kernel_evals: 0,
        })
    }
}

impl Predictor for KrrModel {
    fn predict(&self, x: &[f64]) -> Result<f64> {
        KrrModel::predict(self, x)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KrrDocument {
    manifold: ManifoldSpec,
    kernel: KernelSpec,
    ridge: f64,
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

/// Models for several ridge values fitted on one Gram matrix.
#[derive(Clone, Debug)]
pub struct KrrPath {
    pub models: Vec<KrrModel>,
}

impl KrrPath {
    /// Predictions of every model at `x`, sharing one kernel row.
    pub fn predict_all(&self, x: &[f64]) -> Result<Vec<f64>> {
        let Some(first) = self.models.first() else {
            return Ok(Vec::new());
        };
        let row = first.trained.row(x)?;
        Ok(self
            .models
            .iter()
            .map(|m| row.iter().zip(&m.weights).map(|(k, a)| k * a).sum())
            .collect())
    }
}

pub fn krr_fit(dataset: &LabeledDataset, kernel: &Kernel, ridge: f64) -> Result<KrrModel> {
    let mut path = krr_fit_path(dataset, kernel, &[ridge])?;
    Ok(path.models.remove(0))
}

/// Solves `(K + n ridge I) a = y` for each ridge by Cholesky factorization.
/// A failed factorization is retried once with `1e-10 trace / n` added to
/// the diagonal.
pub fn krr_fit_path(dataset: &LabeledDataset, kernel: &Kernel, ridges: &[f64]) -> Result<KrrPath> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    for &r in ridges {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "ridge must be > 0, got {r}"
            )));
        }
    }
    let n = dataset.len();
    let gram = kernel.gram(&dataset.points)?;
    let kernel_evals = ((n * (n + 1) / 2) * kernel.terms_per_eval()) as u64;
    let trained = Arc::new(TrainedKernel::new(kernel.clone(), dataset.points.clone())?);
    let y = DVector::from_column_slice(&dataset.labels);

    let models = ridges
        .iter()
        .map(|&ridge| {
            let weights = solve_regularized(&gram, ridge * n as f64, &y)?;
            if weights.iter().any(|w| !w.is_finite()) {
                return Err(Error::NonFinite("KRR weights"));
            }
            Ok(KrrModel {
                trained: Arc::clone(&trained),
                weights: weights.as_slice().to_vec(),
                ridge,
                kernel_evals,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(KrrPath { models })
}

fn solve_regularized(gram: &DMatrix<f64>, shift: f64, y: &DVector<f64>) -> Result<DVector<f64>> {
    let n = gram.nrows();
    let mut a = gram.clone();
    for i in 0..n {
        a[(i, i)] += shift;
    }
    if let Some(chol) = Cholesky::new(a.clone()) {
        return Ok(chol.solve(y));
    }
    let jitter = 1e-10 * a.trace() / n as f64;
    for i in 0..n {
        a[(i, i)] += jitter;
    }
    Cholesky::new(a).map(|chol| chol.solve(y)).ok_or_else(|| {
        Error::Factorization("regularized Gram matrix is not positive definite".into())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::build_basis;

    fn torus(d: usize) -> ManifoldSpec {
        ManifoldSpec::flat_torus(d)
    }

    #[test]
    fn von_mises_examples() {
        let k = Kernel::new(KernelSpec::VonMises { eta: 1.0 }, &torus(3)).unwrap();
        let x = [0.2, -0.7, 0.5];
        assert!((k.eval(&x, &x).unwrap() - 3f64.exp()).abs() < 1e-12);
        let k1 = Kernel::new(KernelSpec::VonMises { eta: 1.0 }, &torus(1)).unwrap();
        assert!((k1.eval(&[0.25], &[-0.25]).unwrap() - 1.0).abs() < 1e-15);
        assert!(Kernel::new(KernelSpec::VonMises { eta: 0.0 }, &torus(1)).is_err());
    }

    #[test]
    fn sobolev_kernel_matches_definition() {
        let m = torus(2);
        let basis = build_basis(&m, 13).unwrap();
        let k = Kernel::new(
            KernelSpec::TruncatedSobolev {
                basis: basis.clone(),
                alpha: 2.0,
            },
            &m,
        )
        .unwrap();
        let (x, y) = ([0.3, -0.1], [0.8, 0.45]);
        let (px, py) = (basis.eval(&x).unwrap(), basis.eval(&y).unwrap());
        let dims = basis.function_cumulative_dims();
        let expected: f64 = (0..basis.len())
            .map(|j| px[j] * py[j] / (dims[j] as f64).powi(2))
            .sum();
        assert!((k.eval(&x, &y).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn single_point_fit() {
        let m = torus(2);
        let k = Kernel::new(KernelSpec::VonMises { eta: 0.5 }, &m).unwrap();
        let x = vec![0.1, 0.4];
        let d = LabeledDataset::new(vec![x.clone()], vec![2.0], 0.0).unwrap();
        let model = krr_fit(&d, &k, 0.3).unwrap();
        let k0 = 1f64.exp();
        assert!((model.weights[0] - 2.0 / (k0 + 0.3)).abs() < 1e-13);
        assert!((model.predict(&x).unwrap() - 2.0 * k0 / (k0 + 0.3)).abs() < 1e-13);
    }

    #[test]
    fn zero_labels_zero_model() {
        let m = torus(1);
        let k = Kernel::new(KernelSpec::VonMises { eta: 1.0 }, &m).unwrap();
        let d = LabeledDataset::new(vec![vec![0.1], vec![0.6]], vec![0.0, 0.0], 0.0).unwrap();
        let model = krr_fit(&d, &k, 0.1).unwrap();
        assert!(model.weights.iter().all(|&w| w == 0.0));
        assert_eq!(model.predict(&[0.33]).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_ridge_and_nested_averaging() {
        let m = torus(1);
        let k = Kernel::new(KernelSpec::VonMises { eta: 1.0 }, &m).unwrap();
        let d = LabeledDataset::new(vec![vec![0.1]], vec![1.0], 0.0).unwrap();
        assert!(krr_fit(&d, &k, 0.0).is_err());
        let g = GroupSpec::sign_flips(1).unwrap();
        let inner = KernelSpec::GroupAveraged {
            inner: Box::new(KernelSpec::VonMises { eta: 1.0 }),
            group: g.clone(),
        };
        let nested = KernelSpec::GroupAveraged {
            inner: Box::new(inner),
            group: g,
        };
        assert!(Kernel::new(nested, &m).is_err());
    }

    #[test]
    fn group_averaged_kernel_too_large() {
        let m = torus(8);
        let spec = KernelSpec::GroupAveraged {
            inner: Box::new(KernelSpec::VonMises { eta: 1.0 }),
            group: GroupSpec::coordinate_permutations(8).unwrap(),
        };
        assert!(matches!(
            Kernel::new(spec, &m),
            Err(Error::GroupTooLarge { .. })
        ));
    }

    #[test]
    fn json_round_trip() {
        let m = torus(2);
        let spec = KernelSpec::GroupAveraged {
            inner: Box::new(KernelSpec::VonMises { eta: 1.5 }),
            group: GroupSpec::sign_flips(2).unwrap(),
        };
        let k = Kernel::new(spec, &m).unwrap();
        let d = LabeledDataset::new(
            vec![vec![0.1, 0.2], vec![-0.6, 0.3], vec![0.9, -0.9]],
            vec![1.0, 0.0, -1.0],
            0.0,
        )
        .unwrap();
        let model = krr_fit(&d, &k, 0.05).unwrap();
        let back = KrrModel::from_json(&model.to_json().unwrap()).unwrap();
        assert_eq!(back.weights, model.weights);
        assert_eq!(
            back.predict(&[0.4, 0.4]).unwrap(),
            model.predict(&[0.4, 0.4]).unwrap()
        );
    }
}

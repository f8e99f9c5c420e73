//! The spectral averaging estimator.
//!
//! Fitting takes three steps: pick a cutoff `D`, estimate every coefficient in
//! the eigenspaces with `D_lambda <= D` by the empirical mean of
//! `y phi(x)`, and project each eigenspace onto its invariant subspace. The
//! result is invariant to rounding error for every group element, not just
//! the generators.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::projection::{constraints_for, project, FEASIBILITY_TOL};
use crate::spectra::{
    build_basis, build_basis_within, EigenIndex, ManifoldSpec, Trig, TruncatedBasis,
};
use crate::symmetry::GroupSpec;
use crate::Predictor;

const REDUCTION_CHUNK: usize = 256;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub points: Vec<Vec<f64>>,
    pub labels: Vec<f64>,
    pub noise_std: f64,
}

impl LabeledDataset {
    pub fn new(points: Vec<Vec<f64>>, labels: Vec<f64>, noise_std: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if points.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                got: labels.len(),
            });
        }
        if !(noise_std >= 0.0) {
            return Err(Error::InvalidArgument(
                "noise_std must be nonnegative".into(),
            ));
        }
        Ok(Self {
            points,
            labels,
            noise_std,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn check_manifold(&self, manifold: &ManifoldSpec) -> Result<()> {
        self.points.iter().try_for_each(|x| manifold.check_point(x))
    }

    /// Same points, different labels.
    pub fn with_labels(&self, labels: Vec<f64>) -> Result<Self> {
        Self::new(self.points.clone(), labels, self.noise_std)
    }
}

/// `max(1, floor(n^(1/(1+alpha))))`.
pub fn cutoff_dimension(n: usize, alpha: f64) -> Result<usize> {
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "alpha must be a finite value > 1, got {alpha}"
        )));
    }
    let exponent = 1.0 + alpha;
    let nf = n as f64;
    let mut d = nf.powf(1.0 / exponent).floor();
    // correct floor() against rounding in powf at exact powers
    if (d + 1.0).powf(exponent) <= nf {
        d += 1.0;
    } else if d > 1.0 && d.powf(exponent) > nf {
        d -= 1.0;
    }
    Ok((d as usize).max(1))
}

/// `(1/n) sum_i y_i phi_j(x_i)` for every basis function `j`.
pub fn empirical_coefficients(
    dataset: &LabeledDataset,
    basis: &TruncatedBasis,
) -> Result<Vec<f64>> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let dim = basis.len();
    // Fixed chunking keeps the floating-point summation order deterministic.
    let partials = dataset
        .points
        .par_chunks(REDUCTION_CHUNK)
        .zip(dataset.labels.par_chunks(REDUCTION_CHUNK))
        .map(|(xs, ys)| {
            let mut acc = vec![0.0; dim];
            let mut phi = vec![0.0; dim];
            for (x, &y) in xs.iter().zip(ys) {
                basis.eval_into(x, &mut phi)?;
                for (a, p) in acc.iter_mut().zip(&phi) {
                    *a += y * p;
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = vec![0.0; dim];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    let n = dataset.len() as f64;
    total.iter_mut().for_each(|t| *t /= n);
    Ok(total)
}

/// Oracle usage of a fit: eigenfunction evaluations and representation-block
/// entries computed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleCalls {
    pub eigenfunction_evals: u64,
    pub rep_block_entries: u64,
}

impl OracleCalls {
    pub fn total(&self) -> u64 {
        self.eigenfunction_evals + self.rep_block_entries
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralModel {
    pub basis: TruncatedBasis,
    /// Projected coefficients, aligned with `basis`.
    pub coefficients: Vec<f64>,
    pub alpha: f64,
    /// Requested cutoff `D`; `basis.len() <= cutoff_dim` unless only the
    /// constant eigenspace fits.
    pub cutoff_dim: usize,
    pub group: GroupSpec,
    /// Empirical coefficients before projection.
    pub raw_coefficients: Option<Vec<f64>>,
    pub oracle_calls: OracleCalls,
    /// Largest `||B f_hat||_inf` over eigenspaces.
    pub max_residual: f64,
}

/// Fits the invariant spectral estimator.
///
/// With `cutoff_override` the cutoff `D` is taken as given and `alpha` is only
/// recorded; otherwise `D = cutoff_dimension(n, alpha)`.
pub fn fit(
    dataset: &LabeledDataset,
    manifold: &ManifoldSpec,
    group: &GroupSpec,
    alpha: f64,
    cutoff_override: Option<usize>,
) -> Result<SpectralModel> {
    manifold.validate()?;
    group.check_manifold(manifold)?;
    dataset.check_manifold(manifold)?;
    let cutoff_dim = match cutoff_override {
        Some(0) => return Err(Error::InvalidArgument("cutoff must be positive".into())),
        Some(d) => d,
        None => cutoff_dimension(dataset.len(), alpha)?,
    };
    let basis = build_basis_within(manifold, cutoff_dim)?;
    let raw = empirical_coefficients(dataset, &basis)?;

    let blocks = (0..basis.eigenspaces().len())
        .into_par_iter()
        .map(|k| {
            let constraints = constraints_for(group, &basis, k)?;
            let range = basis.eigenspace_range(k);
            project(&raw[range], &constraints)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut coefficients = Vec::with_capacity(basis.len());
    let mut max_residual: f64 = 0.0;
    for b in &blocks {
        max_residual = max_residual.max(b.residual);
        coefficients.extend(b.projected.iter());
    }
    if max_residual > FEASIBILITY_TOL {
        return Err(Error::Infeasible(max_residual));
    }

    let generators = group.generators().len() as u64;
    let rep_block_entries = basis
        .eigenspaces()
        .iter()
        .map(|e| generators * (e.multiplicity() as u64).pow(2))
        .sum();
    let oracle_calls = OracleCalls {
        eigenfunction_evals: (dataset.len() * basis.len()) as u64,
        rep_block_entries,
    };

    Ok(SpectralModel {
        basis,
        coefficients,
        alpha,
        cutoff_dim,
        group: group.clone(),
        raw_coefficients: Some(raw),
        oracle_calls,
        max_residual,
    })
}

impl SpectralModel {
    /// A model with given coefficients and no fit history.
    pub fn from_coefficients(
        basis: TruncatedBasis,
        coefficients: Vec<f64>,
        group: GroupSpec,
        alpha: f64,
    ) -> Result<Self> {
        if coefficients.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                got: coefficients.len(),
            });
        }
        group.check_manifold(basis.manifold())?;
        Ok(Self {
            cutoff_dim: basis.len(),
            basis,
            coefficients,
            alpha,
            group,
            raw_coefficients: None,
            oracle_calls: OracleCalls::default(),
            max_residual: 0.0,
        })
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        let phi = self.basis.eval(x)?;
        Ok(phi.iter().zip(&self.coefficients).map(|(p, c)| p * c).sum())
    }

    pub fn manifold(&self) -> &ManifoldSpec {
        self.basis.manifold()
    }

    pub fn sobolev_norm_sq(&self) -> f64 {
        sobolev_norm_sq(&self.basis, &self.coefficients, self.alpha)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelDocument::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str::<ModelDocument>(s)?.try_into()
    }
}

impl Predictor for SpectralModel {
    fn predict(&self, x: &[f64]) -> Result<f64> {
        SpectralModel::predict(self, x)
    }
}

/// `sum_j D_lambda(j)^alpha f_j^2`.
pub fn sobolev_norm_sq(basis: &TruncatedBasis, coefficients: &[f64], alpha: f64) -> f64 {
    assert_eq!(
        basis.len(),
        coefficients.len(),
        "coefficients not aligned with basis"
    );
    basis
        .function_cumulative_dims()
        .iter()
        .zip(coefficients)
        .map(|(&dim, &f)| (dim as f64).powf(alpha) * f * f)
        .sum()
}

/// `sum_{j : D_lambda(j) > cutoff} f_j^2`.
pub fn tail_energy(basis: &TruncatedBasis, coefficients: &[f64], cutoff: usize) -> f64 {
    assert_eq!(
        basis.len(),
        coefficients.len(),
        "coefficients not aligned with basis"
    );
    basis
        .function_cumulative_dims()
        .iter()
        .zip(coefficients)
        .filter(|(&dim, _)| dim > cutoff)
        .map(|(_, &f)| f * f)
        .sum()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoefficientEntry {
    frequencies: Vec<u32>,
    trig_pattern: Vec<Trig>,
    coefficient: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    manifold: ManifoldSpec,
    group: GroupSpec,
    alpha: f64,
    cutoff: usize,
    coefficients: Vec<CoefficientEntry>,
}

impl From<&SpectralModel> for ModelDocument {
    fn from(m: &SpectralModel) -> Self {
        Self {
            manifold: m.manifold().clone(),
            group: m.group.clone(),
            alpha: m.alpha,
            cutoff: m.cutoff_dim,
            coefficients: m
                .basis
                .indices()
                .zip(&m.coefficients)
                .map(|(idx, &c)| CoefficientEntry {
                    frequencies: idx.frequencies.clone(),
                    trig_pattern: idx.pattern.clone(),
                    coefficient: c,
                })
                .collect(),
        }
    }
}

impl TryFrom<ModelDocument> for SpectralModel {
    type Error = Error;

    fn try_from(doc: ModelDocument) -> Result<Self> {
        let basis = build_basis(&doc.manifold, doc.coefficients.len().max(1))?;
        if basis.len() != doc.coefficients.len() {
            return Err(Error::InvalidArgument(
                "model coefficients do not cover whole eigenspaces".into(),
            ));
        }
        let mut coefficients = vec![0.0; basis.len()];
        let mut seen = vec![false; basis.len()];
        for entry in doc.coefficients {
            let idx = EigenIndex::new(entry.frequencies, entry.trig_pattern)?;
            let j = basis.position_of(&idx).ok_or_else(|| {
                Error::InvalidArgument(format!("index {idx:?} not in the model basis"))
            })?;
            if std::mem::replace(&mut seen[j], true) {
                return Err(Error::InvalidArgument(format!("duplicate index {idx:?}")));
            }
            coefficients[j] = entry.coefficient;
        }
        let mut model =
            SpectralModel::from_coefficients(basis, coefficients, doc.group, doc.alpha)?;
        model.cutoff_dim = doc.cutoff;
        Ok(model)
    }
}

//! Invariance discrepancy and excess risk.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::harness::target::Target;
use crate::spec_avg::SpectralModel;
use crate::symmetry::{GroupElement, GroupSpec, DEFAULT_CLOSURE_CAP};
use crate::Predictor;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscrepancyOptions {
    pub closure_cap: usize,
    /// Random group words drawn when the closure exceeds the cap.
    pub max_group_sample: usize,
    pub seed: u64,
}

impl Default for DiscrepancyOptions {
    fn default() -> Self {
        Self {
            closure_cap: DEFAULT_CLOSURE_CAP,
            max_group_sample: 256,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Discrepancy {
    pub value: f64,
    /// The sup ran over sampled group elements and is only a lower bound.
    pub sampled: bool,
}

/// Group elements the discrepancy runs over: the closure, or generators plus
/// random words when the closure exceeds the cap.
pub fn discrepancy_elements(
    group: &GroupSpec,
    opts: &DiscrepancyOptions,
) -> Result<(Vec<GroupElement>, bool)> {
    match group.elements(opts.closure_cap) {
        Ok(all) => Ok((all, false)),
        Err(Error::GroupTooLarge { .. }) => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            let max_len = 4 * group.generators().len().max(1);
            let mut elements = group.generators().to_vec();
            elements.extend(
                (0..opts.max_group_sample).map(|_| group.random_element(&mut rng, max_len)),
            );
            Ok((elements, true))
        }
        Err(e) => Err(e),
    }
}

/// `max_{x, g} |f(x) - f(g x)|` over test points and group elements.
pub fn invariance_discrepancy<P: Predictor + ?Sized>(
    predictor: &P,
    test_points: &[Vec<f64>],
    group: &GroupSpec,
    opts: &DiscrepancyOptions,
) -> Result<Discrepancy> {
    let (values, sampled) = invariance_discrepancy_multi(
        |x: &[f64]| Ok(vec![predictor.predict(x)?]),
        1,
        test_points,
        group,
        opts,
    )?;
    Ok(Discrepancy {
        value: values[0],
        sampled,
    })
}

/// Discrepancy of several predictors evaluated together (`outputs` values per
/// call), e.g. a ridge path sharing one kernel row.
pub fn invariance_discrepancy_multi<F>(
    predict_all: F,
    outputs: usize,
    test_points: &[Vec<f64>],
    group: &GroupSpec,
    opts: &DiscrepancyOptions,
) -> Result<(Vec<f64>, bool)>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    if test_points.is_empty() {
        return Err(Error::InvalidArgument("no test points".into()));
    }
    let (elements, sampled) = discrepancy_elements(group, opts)?;
    let per_point = test_points
        .par_iter()
        .map(|x| {
            let base = predict_all(x)?;
            let mut worst = vec![0.0f64; outputs];
            for g in &elements {
                let moved = predict_all(&group.apply(g, x)?)?;
                for ((w, a), b) in worst.iter_mut().zip(&base).zip(&moved) {
                    *w = w.max((a - b).abs());
                }
            }
            Ok(worst)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut worst = vec![0.0f64; outputs];
    for p in per_point {
        for (w, v) in worst.iter_mut().zip(p) {
            *w = w.max(v);
        }
    }
    Ok((worst, sampled))
}

/// Mean of `(f(x) - f*(x))^2` over the test points.
pub fn empirical_excess_risk<P: Predictor + ?Sized>(
    predictor: &P,
    target: &Target,
    test_points: &[Vec<f64>],
) -> Result<f64> {
    let (values, _) =
        empirical_excess_risk_multi(|x| Ok(vec![predictor.predict(x)?]), 1, target, test_points)?;
    Ok(values[0])
}

/// Returns the per-predictor mean squared error and its per-sample squared
/// errors' standard deviation.
pub fn empirical_excess_risk_multi<F>(
    predict_all: F,
    outputs: usize,
    target: &Target,
    test_points: &[Vec<f64>],
) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    if test_points.is_empty() {
        return Err(Error::InvalidArgument("no test points".into()));
    }
    let errors = test_points
        .par_iter()
        .map(|x| {
            let truth = target.eval(x)?;
            Ok(predict_all(x)?
                .into_iter()
                .map(|p| (p - truth).powi(2))
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let n = test_points.len() as f64;
    let mut mean = vec![0.0; outputs];
    for e in &errors {
        for (m, v) in mean.iter_mut().zip(e) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; outputs];
    for e in &errors {
        for ((s, v), m) in var.iter_mut().zip(e).zip(&mean) {
            *s += (v - m).powi(2);
        }
    }
    let std = var.into_iter().map(|s| (s / n).sqrt()).collect();
    Ok((mean, std))
}

/// `||f_hat - f*||^2` in L2 via Parseval on the model's basis plus the
/// target's energy outside it.
pub fn exact_excess_risk(model: &SpectralModel, target: &Target) -> Result<f64> {
    if model.manifold() != target.manifold() {
        return Err(Error::InvalidArgument(
            "model and target live on different manifolds".into(),
        ));
    }
    let mut inside = 0.0;
    let mut captured = 0.0;
    for (idx, &c) in model.basis.indices().zip(&model.coefficients) {
        let t = target.coefficient(idx);
        inside += (c - t).powi(2);
        captured += t * t;
    }
    Ok(inside + (target.norm_sq() - captured).max(0.0))
}

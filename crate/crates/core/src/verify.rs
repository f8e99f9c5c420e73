//! Self-checks of the numerical core against independent computations.
//!
//! Each check returns a [`Check`] with the observed deviation and the
//! tolerance it was held to. [`run_all`] covers a fixed set of small
//! manifold/group configurations and is what `specavg verify` prints.

use std::fmt;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::harness::data::uniform_points;
use crate::harness::metrics::{invariance_discrepancy, DiscrepancyOptions};
use crate::projection::{averaging_projector, constraints_for, project};
use crate::spec_avg::{fit, LabeledDataset};
use crate::spectra::{build_basis, ManifoldKind, ManifoldSpec, TruncatedBasis};
use crate::symmetry::{
    representation_block, verify_representation, GroupSpec, DEFAULT_CLOSURE_CAP,
};

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: {:.3e} (tol {:.1e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.tolerance
        )
    }
}

/// Tensor grid of `per_axis^d` equispaced nodes; exact for trigonometric
/// polynomials of degree below `per_axis`.
fn grid(manifold: &ManifoldSpec, per_axis: usize) -> Vec<Vec<f64>> {
    let (lo, width) = match manifold.kind {
        ManifoldKind::FlatTorus => (-1.0, 2.0),
        ManifoldKind::Circle => (-std::f64::consts::PI, 2.0 * std::f64::consts::PI),
    };
    let d = manifold.dimension;
    let total = per_axis.pow(d as u32);
    (0..total)
        .map(|mut flat| {
            (0..d)
                .map(|_| {
                    let j = flat % per_axis;
                    flat /= per_axis;
                    lo + width * j as f64 / per_axis as f64
                })
                .collect()
        })
        .collect()
}

fn quadrature_nodes(basis: &TruncatedBasis) -> usize {
    2 * basis.max_frequency() as usize + 2
}

/// Max entry of `|Gram - I|` with the Gram matrix computed on a grid.
pub fn orthonormality_deviation(basis: &TruncatedBasis) -> Result<f64> {
    let nodes = grid(basis.manifold(), quadrature_nodes(basis));
    let m = basis.len();
    let mut gram = DMatrix::zeros(m, m);
    for x in &nodes {
        let phi = nalgebra::DVector::from_vec(basis.eval(x)?);
        gram += &phi * phi.transpose();
    }
    gram /= nodes.len() as f64;
    Ok((gram - DMatrix::identity(m, m)).amax())
}

/// Max relative error of `-Laplacian phi = lambda phi` by central differences
/// at interior sample points.
pub fn eigenfunction_deviation(basis: &TruncatedBasis, points: &[Vec<f64>], h: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (k, space) in basis.eigenspaces().iter().enumerate() {
        for (idx, _) in space.members.iter().zip(basis.eigenspace_range(k)) {
            for x in points {
                let center = basis.eval_index(idx, x)?;
                let mut lap = 0.0;
                let mut y = x.clone();
                for i in 0..x.len() {
                    y[i] = x[i] + h;
                    let plus = basis.eval_index(idx, &y)?;
                    y[i] = x[i] - h;
                    let minus = basis.eval_index(idx, &y)?;
                    y[i] = x[i];
                    lap += (plus - 2.0 * center + minus) / (h * h);
                }
                let err = (-lap - space.eigenvalue * center).abs() / (1.0 + space.eigenvalue);
                worst = worst.max(err);
            }
        }
    }
    Ok(worst)
}

/// Max difference between closed-form blocks and `<phi_j(g .), phi_i>` by
/// quadrature, over all group elements and eigenspaces.
pub fn block_quadrature_deviation(group: &GroupSpec, basis: &TruncatedBasis) -> Result<f64> {
    let nodes = grid(basis.manifold(), quadrature_nodes(basis));
    let elements = group.elements(DEFAULT_CLOSURE_CAP)?;
    let values: Vec<Vec<f64>> = nodes.iter().map(|x| basis.eval(x)).collect::<Result<_>>()?;
    let mut worst: f64 = 0.0;
    for g in &elements {
        let moved: Vec<Vec<f64>> = nodes
            .iter()
            .map(|x| basis.eval(&group.apply(g, x)?))
            .collect::<Result<_>>()?;
        for k in 0..basis.eigenspaces().len() {
            let range = basis.eigenspace_range(k);
            let analytic = representation_block(group, g, basis, k)?.matrix;
            for (i, a) in range.clone().enumerate() {
                for (j, b) in range.clone().enumerate() {
                    let q: f64 = values
                        .iter()
                        .zip(&moved)
                        .map(|(v, w)| w[b] * v[a])
                        .sum::<f64>()
                        / nodes.len() as f64;
                    worst = worst.max((q - analytic[(i, j)]).abs());
                }
            }
        }
    }
    Ok(worst)
}

/// Max entry difference between the constrained projection (applied to each
/// unit vector) and the group-averaging projector.
pub fn projector_deviation(group: &GroupSpec, basis: &TruncatedBasis) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in 0..basis.eigenspaces().len() {
        let constraints = constraints_for(group, basis, k)?;
        let average = averaging_projector(group, basis, k, DEFAULT_CLOSURE_CAP)?;
        let m = constraints.dim();
        for j in 0..m {
            let mut e = vec![0.0; m];
            e[j] = 1.0;
            let p = project(&e, &constraints)?.projected;
            worst = worst.max((p - average.column(j)).amax());
        }
    }
    Ok(worst)
}

/// Invariance discrepancy of a model fitted to random labels.
pub fn fitted_invariance(
    manifold: &ManifoldSpec,
    group: &GroupSpec,
    n: usize,
    cutoff: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = uniform_points(manifold, n, &mut rng);
    let labels = uniform_points(&ManifoldSpec::flat_torus(1), n, &mut rng)
        .into_iter()
        .map(|v| v[0])
        .collect();
    let data = LabeledDataset::new(points, labels, 0.0)?;
    let model = fit(&data, manifold, group, 2.0, Some(cutoff))?;
    let test = uniform_points(manifold, 64, &mut rng);
    let d = invariance_discrepancy(&model, &test, group, &DiscrepancyOptions::default())?;
    Ok(d.value)
}

fn cases() -> Result<Vec<(String, ManifoldSpec, GroupSpec, usize)>> {
    let mut out = vec![
        (
            "circle/Z8".to_string(),
            ManifoldSpec::circle(),
            GroupSpec::cyclic_rotation(8)?,
            17,
        ),
        (
            "torus2/S2".to_string(),
            ManifoldSpec::flat_torus(2),
            GroupSpec::coordinate_permutations(2)?,
            30,
        ),
        (
            "torus4/S4".to_string(),
            ManifoldSpec::flat_torus(4),
            GroupSpec::coordinate_permutations(4)?,
            60,
        ),
    ];
    for d in 1..=3 {
        out.push((
            format!("torus{d}/signs"),
            ManifoldSpec::flat_torus(d),
            GroupSpec::sign_flips(d)?,
            30,
        ));
    }
    Ok(out)
}

/// Runs every check; an `Err` means a check could not be carried out at all.
pub fn run_all() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for (label, manifold, group, dim) in cases()? {
        let basis = build_basis(&manifold, dim)?;
        checks.push(Check::at_most(
            format!("{label} basis orthonormality"),
            orthonormality_deviation(&basis)?,
            1e-12,
        ));
        let interior: Vec<Vec<f64>> = uniform_points(&manifold, 4, &mut rng)
            .into_iter()
            .map(|x| x.into_iter().map(|v| 0.9 * v).collect())
            .collect();
        checks.push(Check::at_most(
            format!("{label} eigenfunction equation"),
            eigenfunction_deviation(&basis, &interior, 1e-4)?,
            1e-5,
        ));
        checks.push(Check::at_most(
            format!("{label} blocks match quadrature"),
            block_quadrature_deviation(&group, &basis)?,
            1e-12,
        ));
        let report = verify_representation(&group, &basis, DEFAULT_CLOSURE_CAP, 64, &mut rng)?;
        checks.push(Check::at_most(
            format!("{label} representation laws"),
            report.max_deviation(),
            1e-10,
        ));
        checks.push(Check::at_most(
            format!("{label} projector equivalence"),
            projector_deviation(&group, &basis)?,
            1e-8,
        ));
        checks.push(Check::at_most(
            format!("{label} generator count bound"),
            if group.generator_bound_holds() {
                0.0
            } else {
                1.0
            },
            0.0,
        ));
        checks.push(Check::at_most(
            format!("{label} fitted model invariance"),
            fitted_invariance(&manifold, &group, 50, dim, 5)?,
            1e-9,
        ));
    }
    Ok(checks)
}

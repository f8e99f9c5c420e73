//! Projection of an eigenspace coefficient vector onto the subspace fixed by
//! a group.
//!
//! Invariance under every generator `g` in `S` is the linear system
//! `(D(g) - I) f = 0`; stacking these blocks gives `B`, whose null space is the
//! invariant subspace. The closest feasible point to `f` is
//! `f - B^T (B B^T)^+ B f`. [`averaging_projector`] computes the same projector
//! by summing `D(g)` over the whole group and is kept as an independent check.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::spectra::TruncatedBasis;
use crate::symmetry::{representation_block, GroupSpec, RepresentationBlock};

/// Relative cutoff on singular values of `B`.
pub const RANK_RTOL: f64 = 1e-12;

/// Feasibility tolerance on `||B f_hat||_inf`.
pub const FEASIBILITY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintStack {
    pub eigenvalue: f64,
    /// `(|S| m) x m`, blocks `D(g) - I` stacked in generator order.
    pub matrix: DMatrix<f64>,
}

impl ConstraintStack {
    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionResult {
    pub projected: DVector<f64>,
    /// `||B f_hat||_inf`.
    pub residual: f64,
    pub effective_rank: usize,
}

/// Stacks `D(g) - I` over the generator blocks. With no blocks the stack has
/// zero rows, which leaves every vector feasible.
pub fn build_constraints(blocks: &[RepresentationBlock], dim: usize) -> Result<ConstraintStack> {
    let eigenvalue = blocks.first().map_or(0.0, |b| b.eigenvalue);
    let mut matrix = DMatrix::zeros(blocks.len() * dim, dim);
    for (s, block) in blocks.iter().enumerate() {
        let (r, c) = block.matrix.shape();
        if r != dim || c != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: if r != dim { r } else { c },
            });
        }
        if block.eigenvalue != eigenvalue {
            return Err(Error::InvalidArgument(
                "constraint blocks belong to different eigenspaces".into(),
            ));
        }
        let mut rows = matrix.rows_mut(s * dim, dim);
        rows.copy_from(&block.matrix);
        for i in 0..dim {
            rows[(i, i)] -= 1.0;
        }
    }
    Ok(ConstraintStack { eigenvalue, matrix })
}

/// Constraint stack of eigenspace `k` from the group's generators.
pub fn constraints_for(
    group: &GroupSpec,
    basis: &TruncatedBasis,
    k: usize,
) -> Result<ConstraintStack> {
    let blocks = group
        .generators()
        .iter()
        .map(|g| representation_block(group, g, basis, k))
        .collect::<Result<Vec<_>>>()?;
    build_constraints(&blocks, basis.eigenspaces()[k].multiplicity())
}

/// Euclidean projection of `f_tilde` onto `null(B)`.
pub fn project(f_tilde: &[f64], constraints: &ConstraintStack) -> Result<ProjectionResult> {
    let b = &constraints.matrix;
    if f_tilde.len() != b.ncols() {
        return Err(Error::DimensionMismatch {
            expected: b.ncols(),
            got: f_tilde.len(),
        });
    }
    if f_tilde.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("coefficient vector"));
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("constraint matrix"));
    }
    let f = DVector::from_column_slice(f_tilde);
    if b.nrows() == 0 {
        return Ok(ProjectionResult {
            projected: f,
            residual: 0.0,
            effective_rank: 0,
        });
    }

    let (v, effective_rank) = row_space(b);
    let projected = &f - &v * (v.transpose() * &f);
    let residual = (b * &projected).amax();
    Ok(ProjectionResult {
        projected,
        residual,
        effective_rank,
    })
}

/// Orthonormal basis of the row space of `b`, so that
/// `B^T (B B^T)^+ B = V V^T`. Singular values of `B` at or below
/// `max(dims) * max(s_max, 1) * RANK_RTOL` count as zero.
fn row_space(b: &DMatrix<f64>) -> (DMatrix<f64>, usize) {
    let dims = b.nrows().max(b.ncols()) as f64;
    let m = b.ncols();
    let nonzero: Vec<usize> = (0..b.nrows())
        .filter(|&i| b.row(i).iter().any(|&v| v != 0.0))
        .collect();
    if nonzero.is_empty() {
        return (DMatrix::zeros(m, 0), 0);
    }
    let mut reduced = b.select_rows(&nonzero);
    if reduced.nrows() > m {
        reduced = reduced.qr().r();
    }
    let svd = reduced.svd(false, true);
    let tau = dims * svd.singular_values.max().max(1.0) * RANK_RTOL;
    let v_t = svd.v_t.expect("requested V^T");
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > tau)
        .collect();
    (v_t.select_rows(&keep).transpose(), keep.len())
}

/// `(1/|G|) sum_g D(g)` over the enumerated group.
pub fn averaging_projector(
    group: &GroupSpec,
    basis: &TruncatedBasis,
    k: usize,
    cap: usize,
) -> Result<DMatrix<f64>> {
    let elements = group.elements(cap)?;
    let m = basis
        .eigenspaces()
        .get(k)
        .ok_or_else(|| Error::InvalidArgument(format!("eigenspace {k} not in basis")))?
        .multiplicity();
    let mut sum = DMatrix::zeros(m, m);
    for g in &elements {
        sum += representation_block(group, g, basis, k)?.matrix;
    }
    Ok(sum / elements.len() as f64)
}

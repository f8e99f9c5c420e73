//! Exactly group-invariant regression on compact manifolds.
//!
//! The estimator works in a truncated Laplace–Beltrami eigenbasis: it forms
//! empirical spectral coefficients from labeled samples and projects each
//! eigenspace onto its invariant subspace, using only the generators of the
//! symmetry group. The projection is a small equality-constrained least
//! squares problem solved in closed form per eigenspace.
//!
//! | module | contents |
//! |--------|----------|
//! | [`spectra`] | eigenbases of the flat torus and the circle |
//! | [`symmetry`] | finite groups, actions, closure, representation blocks |
//! | [`projection`] | constrained projection and the group-averaging projector |
//! | [`spec_avg`] | the spectral averaging estimator |
//! | [`kernels`] | von Mises / Sobolev / group-averaged kernel ridge regression |
//! | [`harness`] | data generation, metrics, experiments, CSV output |
//!
//! ```
//! use specavg::{fit, GroupSpec, LabeledDataset, ManifoldSpec};
//!
//! let manifold = ManifoldSpec::flat_torus(2);
//! let group = GroupSpec::sign_flips(2).unwrap();
//! let points = vec![vec![0.1, -0.3], vec![0.5, 0.2], vec![-0.7, 0.9]];
//! let labels = vec![1.0, 0.5, -0.2];
//! let data = LabeledDataset::new(points, labels, 0.0).unwrap();
//! let model = fit(&data, &manifold, &group, 2.0, Some(9)).unwrap();
//! let a = model.predict(&[0.25, 0.4]).unwrap();
//! let b = model.predict(&[-0.25, 0.4]).unwrap();
//! assert!((a - b).abs() < 1e-12);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod kernels;
pub mod projection;
pub mod spec_avg;
pub mod spectra;
pub mod symmetry;
pub mod verify;

pub use error::{Error, Result};
pub use kernels::{krr_fit, krr_fit_path, Kernel, KernelSpec, KrrModel, KrrPath};
pub use projection::{
    averaging_projector, build_constraints, project, ConstraintStack, ProjectionResult,
};
pub use spec_avg::{
    cutoff_dimension, empirical_coefficients, fit, sobolev_norm_sq, LabeledDataset, SpectralModel,
};
pub use spectra::{
    build_basis, BasisMode, EigenIndex, ManifoldKind, ManifoldSpec, Trig, TruncatedBasis,
};
pub use symmetry::{
    closure, representation_block, GroupElement, GroupKind, GroupSpec, RepresentationBlock,
};

/// Anything that maps a manifold point to a real prediction.
pub trait Predictor: Sync {
    fn predict(&self, x: &[f64]) -> Result<f64>;
}

impl<F> Predictor for F
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    fn predict(&self, x: &[f64]) -> Result<f64> {
        self(x)
    }
}

//! Laplace–Beltrami eigenbases for the built-in manifolds.
//!
//! The flat torus `[-1, 1)^d` has eigenfunctions that are products of
//! `sqrt(2) cos(pi l x)` / `sqrt(2) sin(pi l x)` factors (and `1` for a zero
//! frequency); the circle, parametrized by an angle in `[-pi, pi)`, has
//! `sqrt(2) cos(k theta)` and `sqrt(2) sin(k theta)`. All functions are
//! orthonormal with respect to the uniform probability measure.
//!
//! Functions sharing `sum l_i^2` form one eigenspace. A [`TruncatedBasis`]
//! always holds whole eigenspaces, ordered by eigenvalue, each listed in
//! lexicographic `(frequencies, pattern)` order with `cos < sin`.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on lattice nodes visited while enumerating frequencies.
pub const DEFAULT_LATTICE_BUDGET: usize = 20_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifoldKind {
    FlatTorus,
    Circle,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisMode {
    #[default]
    FullFourier,
    CosineOnly,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldSpec {
    pub kind: ManifoldKind,
    pub dimension: usize,
    #[serde(default)]
    pub basis_mode: BasisMode,
}

impl ManifoldSpec {
    pub fn flat_torus(dimension: usize) -> Self {
        Self {
            kind: ManifoldKind::FlatTorus,
            dimension,
            basis_mode: BasisMode::FullFourier,
        }
    }

    pub fn flat_torus_cosine(dimension: usize) -> Self {
        Self {
            kind: ManifoldKind::FlatTorus,
            dimension,
            basis_mode: BasisMode::CosineOnly,
        }
    }

    pub fn circle() -> Self {
        Self {
            kind: ManifoldKind::Circle,
            dimension: 1,
            basis_mode: BasisMode::FullFourier,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::InvalidArgument(
                "manifold dimension must be positive".into(),
            ));
        }
        if self.kind == ManifoldKind::Circle {
            if self.dimension != 1 {
                return Err(Error::InvalidArgument("circle requires dimension 1".into()));
            }
            if self.basis_mode == BasisMode::CosineOnly {
                return Err(Error::InvalidArgument(
                    "cosine-only basis is only available on the flat torus".into(),
                ));
            }
        }
        Ok(())
    }

    /// Half-open coordinate range `[lo, lo + period)`.
    fn chart(&self) -> (f64, f64) {
        match self.kind {
            ManifoldKind::FlatTorus => (-1.0, 2.0),
            ManifoldKind::Circle => (-PI, 2.0 * PI),
        }
    }

    /// Angular frequency multiplier: `pi` on the torus, `1` on the circle.
    fn angular_scale(&self) -> f64 {
        match self.kind {
            ManifoldKind::FlatTorus => PI,
            ManifoldKind::Circle => 1.0,
        }
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: x.len(),
            });
        }
        let (lo, period) = self.chart();
        for (i, &xi) in x.iter().enumerate() {
            if !xi.is_finite() || xi < lo || xi >= lo + period {
                return Err(Error::Domain(format!(
                    "coordinate {i} = {xi} outside [{lo}, {})",
                    lo + period
                )));
            }
        }
        Ok(())
    }

    /// Wraps every coordinate into the canonical chart.
    pub fn canonicalize(&self, x: &[f64]) -> Vec<f64> {
        let (lo, period) = self.chart();
        x.iter().map(|&v| wrap(v, lo, period)).collect()
    }

    /// Geodesic distance: Euclidean norm of coordinatewise wrapped differences.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let (_, period) = self.chart();
        a.iter()
            .zip(b)
            .map(|(&u, &v)| {
                let diff = wrap(u - v, -period / 2.0, period);
                diff * diff
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Laplace–Beltrami eigenvalue of an index: `pi^2 sum l_i^2` on the torus,
    /// `k^2` on the circle.
    pub fn eigenvalue_of(&self, index: &EigenIndex) -> f64 {
        let scale = self.angular_scale();
        scale * scale * index.shell() as f64
    }
}

pub(crate) fn wrap(v: f64, lo: f64, period: f64) -> f64 {
    if v >= lo && v < lo + period {
        return v;
    }
    let mut r = (v - lo).rem_euclid(period);
    if r >= period {
        r = 0.0;
    }
    let out = lo + r;
    if out >= lo + period {
        lo
    } else {
        out
    }
}

/// Torus eigenvalue `pi^2 sum l_i^2` of an index.
pub fn eigenvalue_of(index: &EigenIndex) -> f64 {
    PI * PI * index.shell() as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trig {
    Cos,
    Sin,
}

/// Frequencies plus a per-coordinate trig factor. The derived ordering is
/// lexicographic on `(frequencies, pattern)` with `Cos < Sin`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EigenIndex {
    pub frequencies: Vec<u32>,
    pub pattern: Vec<Trig>,
}

impl EigenIndex {
    pub fn new(frequencies: Vec<u32>, pattern: Vec<Trig>) -> Result<Self> {
        if frequencies.len() != pattern.len() {
            return Err(Error::DimensionMismatch {
                expected: frequencies.len(),
                got: pattern.len(),
            });
        }
        if frequencies
            .iter()
            .zip(&pattern)
            .any(|(&l, &t)| l == 0 && t == Trig::Sin)
        {
            return Err(Error::InvalidArgument(
                "sin factor requires a nonzero frequency".into(),
            ));
        }
        Ok(Self {
            frequencies,
            pattern,
        })
    }

    pub fn cosine(frequencies: Vec<u32>) -> Self {
        let pattern = vec![Trig::Cos; frequencies.len()];
        Self {
            frequencies,
            pattern,
        }
    }

    pub fn constant(dimension: usize) -> Self {
        Self::cosine(vec![0; dimension])
    }

    /// `sum l_i^2`; equal shells means same eigenspace.
    pub fn shell(&self) -> u64 {
        self.frequencies
            .iter()
            .map(|&l| (l as u64) * (l as u64))
            .sum()
    }

    pub fn is_cosine(&self) -> bool {
        self.pattern.iter().all(|&t| t == Trig::Cos)
    }

    pub fn dimension(&self) -> usize {
        self.frequencies.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Eigenspace {
    pub eigenvalue: f64,
    pub shell: u64,
    pub members: Vec<EigenIndex>,
}

impl Eigenspace {
    pub fn multiplicity(&self) -> usize {
        self.members.len()
    }
}

/// Whole eigenspaces of a manifold up to some cutoff.
///
/// Serialized as `{manifold, total_dim}` and rebuilt on load; the basis is a
/// deterministic function of those two values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BasisDescriptor", into = "BasisDescriptor")]
pub struct TruncatedBasis {
    manifold: ManifoldSpec,
    eigenspaces: Vec<Eigenspace>,
    cumulative_dims: Vec<usize>,
    max_frequency: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BasisDescriptor {
    manifold: ManifoldSpec,
    total_dim: usize,
}

impl From<TruncatedBasis> for BasisDescriptor {
    fn from(b: TruncatedBasis) -> Self {
        Self {
            total_dim: b.len(),
            manifold: b.manifold,
        }
    }
}

impl TryFrom<BasisDescriptor> for TruncatedBasis {
    type Error = Error;

    fn try_from(d: BasisDescriptor) -> Result<Self> {
        let basis = build_basis(&d.manifold, d.total_dim)?;
        if basis.len() != d.total_dim {
            return Err(Error::InvalidArgument(format!(
                "total_dim {} is not an eigenspace boundary",
                d.total_dim
            )));
        }
        Ok(basis)
    }
}

impl TruncatedBasis {
    pub fn manifold(&self) -> &ManifoldSpec {
        &self.manifold
    }

    pub fn eigenspaces(&self) -> &[Eigenspace] {
        &self.eigenspaces
    }

    /// `D_lambda` for each eigenspace, in order.
    pub fn cumulative_dims(&self) -> &[usize] {
        &self.cumulative_dims
    }

    pub fn len(&self) -> usize {
        self.cumulative_dims.last().copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn max_frequency(&self) -> u32 {
        self.max_frequency
    }

    /// Positions of eigenspace `k` within the flat function ordering.
    pub fn eigenspace_range(&self, k: usize) -> Range<usize> {
        let end = self.cumulative_dims[k];
        end - self.eigenspaces[k].multiplicity()..end
    }

    /// All indices in basis order.
    pub fn indices(&self) -> impl Iterator<Item = &EigenIndex> {
        self.eigenspaces.iter().flat_map(|e| e.members.iter())
    }

    /// `D_lambda` of the eigenspace containing each basis function.
    pub fn function_cumulative_dims(&self) -> Vec<usize> {
        self.eigenspaces
            .iter()
            .zip(&self.cumulative_dims)
            .flat_map(|(e, &dim)| std::iter::repeat_n(dim, e.multiplicity()))
            .collect()
    }

    pub fn position_of(&self, index: &EigenIndex) -> Option<usize> {
        let shell = index.shell();
        let k = self
            .eigenspaces
            .binary_search_by(|e| e.shell.cmp(&shell))
            .ok()?;
        let within = self.eigenspaces[k].members.binary_search(index).ok()?;
        Some(self.eigenspace_range(k).start + within)
    }

    /// Largest prefix of whole eigenspaces with `D_lambda <= max_dim`, keeping
    /// at least the first eigenspace.
    pub fn truncate_within(&self, max_dim: usize) -> TruncatedBasis {
        let keep = self
            .cumulative_dims
            .iter()
            .take_while(|&&d| d <= max_dim)
            .count()
            .max(1)
            .min(self.eigenspaces.len());
        let eigenspaces = self.eigenspaces[..keep].to_vec();
        let max_frequency = max_frequency_of(&eigenspaces);
        TruncatedBasis {
            manifold: self.manifold.clone(),
            eigenspaces,
            cumulative_dims: self.cumulative_dims[..keep].to_vec(),
            max_frequency,
        }
    }

    /// Values of every basis function at `x`.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len()];
        self.eval_into(x, &mut out)?;
        Ok(out)
    }

    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.manifold.check_point(x)?;
        if out.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: out.len(),
            });
        }
        let tables = FactorTables::new(&self.manifold, self.max_frequency, x);
        for (slot, index) in out.iter_mut().zip(self.indices()) {
            *slot = tables.product(index);
        }
        Ok(())
    }

    /// Evaluates a single basis function.
    pub fn eval_index(&self, index: &EigenIndex, x: &[f64]) -> Result<f64> {
        self.manifold.check_point(x)?;
        let scale = self.manifold.angular_scale();
        Ok(index
            .frequencies
            .iter()
            .zip(&index.pattern)
            .zip(x)
            .map(|((&l, &t), &xi)| factor(l, t, scale * xi))
            .product())
    }
}

fn factor(l: u32, t: Trig, angle: f64) -> f64 {
    if l == 0 {
        return 1.0;
    }
    let a = l as f64 * angle;
    match t {
        Trig::Cos => SQRT_2 * a.cos(),
        Trig::Sin => SQRT_2 * a.sin(),
    }
}

/// Per-coordinate lookup of `sqrt(2) cos(l a)` and `sqrt(2) sin(l a)`.
struct FactorTables {
    stride: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl FactorTables {
    fn new(manifold: &ManifoldSpec, max_frequency: u32, x: &[f64]) -> Self {
        let stride = max_frequency as usize + 1;
        let scale = manifold.angular_scale();
        let mut cos = vec![1.0; stride * x.len()];
        let mut sin = vec![0.0; stride * x.len()];
        for (i, &xi) in x.iter().enumerate() {
            for l in 1..stride {
                let (s, c) = (l as f64 * scale * xi).sin_cos();
                cos[i * stride + l] = SQRT_2 * c;
                sin[i * stride + l] = SQRT_2 * s;
            }
        }
        Self { stride, cos, sin }
    }

    fn product(&self, index: &EigenIndex) -> f64 {
        let mut v = 1.0;
        for (i, (&l, &t)) in index.frequencies.iter().zip(&index.pattern).enumerate() {
            if l == 0 {
                continue;
            }
            let at = i * self.stride + l as usize;
            v *= match t {
                Trig::Cos => self.cos[at],
                Trig::Sin => self.sin[at],
            };
        }
        v
    }
}

fn max_frequency_of(eigenspaces: &[Eigenspace]) -> u32 {
    eigenspaces
        .iter()
        .flat_map(|e| e.members.iter())
        .flat_map(|m| m.frequencies.iter().copied())
        .max()
        .unwrap_or(0)
}

/// Smallest prefix of whole eigenspaces with total dimension `>= min_total_dim`.
pub fn build_basis(manifold: &ManifoldSpec, min_total_dim: usize) -> Result<TruncatedBasis> {
    build_basis_with_budget(manifold, min_total_dim, DEFAULT_LATTICE_BUDGET)
}

/// Largest prefix of whole eigenspaces with total dimension `<= max_total_dim`
/// (never smaller than the constant eigenspace).
pub fn build_basis_within(manifold: &ManifoldSpec, max_total_dim: usize) -> Result<TruncatedBasis> {
    let basis = build_basis(manifold, max_total_dim.max(1) + 1)?;
    Ok(basis.truncate_within(max_total_dim))
}

pub fn build_basis_with_budget(
    manifold: &ManifoldSpec,
    min_total_dim: usize,
    budget: usize,
) -> Result<TruncatedBasis> {
    manifold.validate()?;
    if min_total_dim == 0 {
        return Err(Error::InvalidArgument(
            "min_total_dim must be at least 1".into(),
        ));
    }
    let d = manifold.dimension;
    let full = manifold.basis_mode == BasisMode::FullFourier;

    // Grow the shell radius until the enumerated (complete) shells hold enough
    // functions; every shell <= max_shell is enumerated exhaustively.
    let mut max_shell: u64 = 1;
    loop {
        let mut shells: BTreeMap<u64, Vec<Vec<u32>>> = BTreeMap::new();
        let mut visited = 0usize;
        let mut current = vec![0u32; d];
        enumerate_lattice(
            0,
            max_shell,
            &mut current,
            &mut shells,
            &mut visited,
            budget,
        )?;

        let mut total = 0usize;
        let mut cut = None;
        for (&shell, points) in &shells {
            total += points
                .iter()
                .map(|l| functions_per_point(l, full))
                .sum::<usize>();
            if total >= min_total_dim {
                cut = Some(shell);
                break;
            }
        }
        if let Some(cut) = cut {
            return Ok(assemble(manifold, shells.range(..=cut), full));
        }
        max_shell = max_shell
            .checked_mul(2)
            .ok_or_else(|| Error::BudgetExceeded("shell radius overflow".into()))?;
    }
}

fn functions_per_point(l: &[u32], full: bool) -> usize {
    if full {
        1 << l.iter().filter(|&&v| v != 0).count()
    } else {
        1
    }
}

fn enumerate_lattice(
    pos: usize,
    remaining: u64,
    current: &mut Vec<u32>,
    shells: &mut BTreeMap<u64, Vec<Vec<u32>>>,
    visited: &mut usize,
    budget: usize,
) -> Result<()> {
    *visited += 1;
    if *visited > budget {
        return Err(Error::BudgetExceeded(format!(
            "frequency lattice search exceeded {budget} nodes"
        )));
    }
    if pos == current.len() {
        let shell = current.iter().map(|&l| (l as u64) * (l as u64)).sum();
        shells.entry(shell).or_default().push(current.clone());
        return Ok(());
    }
    let mut l = 0u32;
    while (l as u64) * (l as u64) <= remaining {
        current[pos] = l;
        enumerate_lattice(
            pos + 1,
            remaining - (l as u64) * (l as u64),
            current,
            shells,
            visited,
            budget,
        )?;
        l += 1;
    }
    current[pos] = 0;
    Ok(())
}

fn assemble<'a>(
    manifold: &ManifoldSpec,
    shells: impl Iterator<Item = (&'a u64, &'a Vec<Vec<u32>>)>,
    full: bool,
) -> TruncatedBasis {
    let mut eigenspaces = Vec::new();
    let mut cumulative_dims = Vec::new();
    let mut total = 0;
    for (&shell, points) in shells {
        let mut members: Vec<EigenIndex> =
            points.iter().flat_map(|l| patterns_for(l, full)).collect();
        members.sort();
        total += members.len();
        eigenspaces.push(Eigenspace {
            eigenvalue: manifold.eigenvalue_of(&members[0]),
            shell,
            members,
        });
        cumulative_dims.push(total);
    }
    let max_frequency = max_frequency_of(&eigenspaces);
    TruncatedBasis {
        manifold: manifold.clone(),
        eigenspaces,
        cumulative_dims,
        max_frequency,
    }
}

fn patterns_for(l: &[u32], full: bool) -> Vec<EigenIndex> {
    if !full {
        return vec![EigenIndex::cosine(l.to_vec())];
    }
    let nonzero: Vec<usize> = (0..l.len()).filter(|&i| l[i] != 0).collect();
    (0..1usize << nonzero.len())
        .map(|mask| {
            let mut pattern = vec![Trig::Cos; l.len()];
            for (bit, &i) in nonzero.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    pattern[i] = Trig::Sin;
                }
            }
            EigenIndex {
                frequencies: l.to_vec(),
                pattern,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn constant_only_basis() {
        let b = build_basis(&ManifoldSpec::flat_torus(1), 1).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b.eigenspaces()[0].eigenvalue, 0.0);
        assert_eq!(b.eval(&[0.37]).unwrap(), vec![1.0]);
    }

    #[test]
    fn first_circle_block_on_torus() {
        let b = build_basis(&ManifoldSpec::flat_torus(1), 2).unwrap();
        assert_eq!(b.len(), 3);
        assert_eq!(b.cumulative_dims(), &[1, 3]);
        let members = &b.eigenspaces()[1].members;
        assert_eq!(
            members[0],
            EigenIndex::new(vec![1], vec![Trig::Cos]).unwrap()
        );
        assert_eq!(
            members[1],
            EigenIndex::new(vec![1], vec![Trig::Sin]).unwrap()
        );
        let v = b.eval(&[0.0]).unwrap();
        assert!(close(v[1], SQRT_2, 1e-15));
        assert!(close(v[2], 0.0, 1e-15));
    }

    #[test]
    fn circle_blocks_are_sin_cos_pairs() {
        let b = build_basis(&ManifoldSpec::circle(), 3).unwrap();
        assert_eq!(b.cumulative_dims(), &[1, 3]);
        let b = build_basis(&ManifoldSpec::circle(), 7).unwrap();
        assert_eq!(b.cumulative_dims(), &[1, 3, 5, 7]);
        for (k, e) in b.eigenspaces().iter().enumerate().skip(1) {
            assert_eq!(e.multiplicity(), 2);
            assert_eq!(e.eigenvalue, (k * k) as f64);
        }
    }

    #[test]
    fn eval_examples() {
        let b = build_basis(&ManifoldSpec::flat_torus(2), 9).unwrap();
        let idx = EigenIndex::cosine(vec![1, 1]);
        let v = b.eval_index(&idx, &[0.5, 0.5]).unwrap();
        assert!(close(v, 0.0, 1e-15));
        let j = b.position_of(&idx).unwrap();
        assert!(close(b.eval(&[0.5, 0.5]).unwrap()[j], 0.0, 1e-15));
    }

    #[test]
    fn eigenvalue_examples() {
        assert_eq!(eigenvalue_of(&EigenIndex::constant(3)), 0.0);
        assert!(close(
            eigenvalue_of(&EigenIndex::cosine(vec![1])),
            PI * PI,
            1e-12
        ));
        assert!(close(
            eigenvalue_of(&EigenIndex::cosine(vec![1, 2])),
            5.0 * PI * PI,
            1e-12
        ));
    }

    #[test]
    fn strict_domain_and_canonicalize() {
        let b = build_basis(&ManifoldSpec::flat_torus(2), 4).unwrap();
        assert!(matches!(b.eval(&[1.0, 0.0]), Err(Error::Domain(_))));
        assert!(matches!(
            b.eval(&[0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        let m = ManifoldSpec::flat_torus(2);
        assert_eq!(m.canonicalize(&[1.0, -3.5]), vec![-1.0, 0.5]);
        let c = ManifoldSpec::circle();
        let w = c.canonicalize(&[3.0 * PI]);
        assert!(close(w[0], -PI, 1e-12));
    }

    #[test]
    fn invalid_manifolds_rejected() {
        let mut c = ManifoldSpec::circle();
        c.basis_mode = BasisMode::CosineOnly;
        assert!(build_basis(&c, 3).is_err());
        let mut c = ManifoldSpec::circle();
        c.dimension = 2;
        assert!(build_basis(&c, 3).is_err());
        assert!(build_basis(&ManifoldSpec::flat_torus(2), 0).is_err());
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let err = build_basis_with_budget(&ManifoldSpec::flat_torus(6), 100_000, 10_000);
        assert!(matches!(err, Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn cosine_d10_shells_reach_176() {
        let b = build_basis(&ManifoldSpec::flat_torus_cosine(10), 176).unwrap();
        assert_eq!(b.cumulative_dims(), &[1, 11, 56, 176]);
        assert!(b.indices().all(EigenIndex::is_cosine));
    }

    #[test]
    fn truncate_within_keeps_whole_eigenspaces() {
        let b = build_basis(&ManifoldSpec::flat_torus(2), 30).unwrap();
        let t = b.truncate_within(12);
        assert_eq!(t.cumulative_dims(), &[1, 5, 9]);
        let t = b.truncate_within(0);
        assert_eq!(t.len(), 1);
        let w = build_basis_within(&ManifoldSpec::flat_torus(2), 13).unwrap();
        assert_eq!(w.len(), 13);
    }

    #[test]
    fn circle_matches_rescaled_torus() {
        let c = build_basis(&ManifoldSpec::circle(), 9).unwrap();
        let t = build_basis(&ManifoldSpec::flat_torus(1), 9).unwrap();
        for &x in &[-0.9, -0.2, 0.0, 0.33, 0.99] {
            let vc = c.eval(&[PI * x]).unwrap();
            let vt = t.eval(&[x]).unwrap();
            for (a, b) in vc.iter().zip(&vt) {
                assert!(close(*a, *b, 1e-12));
            }
        }
    }

    #[test]
    fn serde_round_trip() {
        let b = build_basis(&ManifoldSpec::flat_torus(3), 20).unwrap();
        let s = serde_json::to_string(&b).unwrap();
        let back: TruncatedBasis = serde_json::from_str(&s).unwrap();
        assert_eq!(b, back);
        let bad = r#"{"manifold":{"kind":"flat_torus","dimension":1},"total_dim":2}"#;
        assert!(serde_json::from_str::<TruncatedBasis>(bad).is_err());
    }
}

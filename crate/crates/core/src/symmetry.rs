//! Finite groups acting isometrically on the built-in manifolds, and the
//! orthogonal matrices by which they act on each eigenspace.
//!
//! Convention: `T_g f = f(g .)`, and the coefficient vector of `T_g f` inside an
//! eigenspace is `D(g) f`. Composition [`GroupSpec::compose`]`(a, b)` is the
//! element that acts as `a` first and then `b`, so that
//! `D(compose(a, b)) = D(a) D(b)`.

use std::collections::{HashSet, VecDeque};
use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::{wrap, EigenIndex, ManifoldKind, ManifoldSpec, Trig, TruncatedBasis};

/// Default cap on enumerated group sizes.
pub const DEFAULT_CLOSURE_CAP: usize = 10_000;

const MAX_PERMUTATION_DIM: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupElement {
    Identity,
    /// Coordinatewise signs in `{-1, +1}`.
    Signs(Vec<i8>),
    /// `perm[i]` is the destination slot of coordinate `i`.
    Permutation(Vec<usize>),
    /// Rotation by `2 pi step / order`.
    Rotation {
        step: u32,
        order: u32,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GroupKind {
    SignFlips { dimension: usize },
    CoordinatePermutations { dimension: usize },
    CyclicRotation { order: u32 },
    Trivial { dimension: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GroupDescriptor", into = "GroupDescriptor")]
pub struct GroupSpec {
    kind: GroupKind,
    generators: Vec<GroupElement>,
    explicit_generators: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum GroupKindTag {
    SignFlips,
    CoordinatePermutations,
    CyclicRotation,
    Trivial,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupDescriptor {
    kind: GroupKindTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dimension: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    order: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generators: Option<Vec<GroupElement>>,
}

impl From<GroupSpec> for GroupDescriptor {
    fn from(g: GroupSpec) -> Self {
        let generators = g.explicit_generators.then_some(g.generators);
        match g.kind {
            GroupKind::SignFlips { dimension } => Self {
                kind: GroupKindTag::SignFlips,
                dimension: Some(dimension),
                order: None,
                generators,
            },
            GroupKind::CoordinatePermutations { dimension } => Self {
                kind: GroupKindTag::CoordinatePermutations,
                dimension: Some(dimension),
                order: None,
                generators,
            },
            GroupKind::CyclicRotation { order } => Self {
                kind: GroupKindTag::CyclicRotation,
                dimension: None,
                order: Some(order),
                generators,
            },
            GroupKind::Trivial { dimension } => Self {
                kind: GroupKindTag::Trivial,
                dimension: Some(dimension),
                order: None,
                generators,
            },
        }
    }
}

impl TryFrom<GroupDescriptor> for GroupSpec {
    type Error = Error;

    fn try_from(d: GroupDescriptor) -> Result<Self> {
        let need_dim = || {
            d.dimension
                .ok_or_else(|| Error::Config("group requires \"dimension\"".into()))
        };
        let spec = match d.kind {
            GroupKindTag::SignFlips => GroupSpec::sign_flips(need_dim()?)?,
            GroupKindTag::CoordinatePermutations => {
                GroupSpec::coordinate_permutations(need_dim()?)?
            }
            GroupKindTag::Trivial => GroupSpec::trivial(need_dim()?)?,
            GroupKindTag::CyclicRotation => GroupSpec::cyclic_rotation(
                d.order
                    .ok_or_else(|| Error::Config("cyclic_rotation requires \"order\"".into()))?,
            )?,
        };
        match d.generators {
            Some(gens) => spec.with_generators(gens),
            None => Ok(spec),
        }
    }
}

impl GroupSpec {
    /// `{+-1}^d` generated by the `d` single-coordinate flips.
    pub fn sign_flips(dimension: usize) -> Result<Self> {
        if dimension == 0 || dimension > 62 {
            return Err(Error::InvalidArgument(format!(
                "sign flip dimension {dimension} outside 1..=62"
            )));
        }
        let generators = (0..dimension)
            .map(|i| {
                let mut s = vec![1i8; dimension];
                s[i] = -1;
                GroupElement::Signs(s)
            })
            .collect();
        Ok(Self {
            kind: GroupKind::SignFlips { dimension },
            generators,
            explicit_generators: false,
        })
    }

    /// `S_d` generated by the transposition `(1 2)` and the cycle `(1 2 ... d)`.
    pub fn coordinate_permutations(dimension: usize) -> Result<Self> {
        if dimension == 0 || dimension > MAX_PERMUTATION_DIM {
            return Err(Error::InvalidArgument(format!(
                "permutation dimension {dimension} outside 1..={MAX_PERMUTATION_DIM}"
            )));
        }
        let mut generators = Vec::new();
        if dimension >= 2 {
            let mut swap: Vec<usize> = (0..dimension).collect();
            swap.swap(0, 1);
            generators.push(GroupElement::Permutation(swap));
        }
        if dimension >= 3 {
            let cycle = (0..dimension).map(|i| (i + 1) % dimension).collect();
            generators.push(GroupElement::Permutation(cycle));
        }
        Ok(Self {
            kind: GroupKind::CoordinatePermutations { dimension },
            generators,
            explicit_generators: false,
        })
    }

    /// Rotations of the circle by multiples of `2 pi / order`.
    pub fn cyclic_rotation(order: u32) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidArgument(
                "rotation order must be positive".into(),
            ));
        }
        Ok(Self {
            kind: GroupKind::CyclicRotation { order },
            generators: vec![GroupElement::Rotation {
                step: 1 % order,
                order,
            }],
            explicit_generators: false,
        })
    }

    pub fn trivial(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        Ok(Self {
            kind: GroupKind::Trivial { dimension },
            generators: Vec::new(),
            explicit_generators: false,
        })
    }

    /// Replaces the implied generators with an explicit list.
    pub fn with_generators(mut self, generators: Vec<GroupElement>) -> Result<Self> {
        for g in &generators {
            self.check_element(g)?;
        }
        self.generators = generators;
        self.explicit_generators = true;
        Ok(self)
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    /// `|G|` implied by the kind.
    pub fn declared_order(&self) -> u64 {
        match self.kind {
            GroupKind::SignFlips { dimension } => 1u64 << dimension,
            GroupKind::CoordinatePermutations { dimension } => (1..=dimension as u64).product(),
            GroupKind::CyclicRotation { order } => order as u64,
            GroupKind::Trivial { .. } => 1,
        }
    }

    /// Whether `|S| <= log2 |G|` holds for the current generator set.
    pub fn generator_bound_holds(&self) -> bool {
        (self.generators.len() as f64) <= (self.declared_order() as f64).log2() + 1e-12
    }

    pub fn point_dimension(&self) -> usize {
        match self.kind {
            GroupKind::SignFlips { dimension }
            | GroupKind::CoordinatePermutations { dimension }
            | GroupKind::Trivial { dimension } => dimension,
            GroupKind::CyclicRotation { .. } => 1,
        }
    }

    pub fn identity(&self) -> GroupElement {
        match self.kind {
            GroupKind::SignFlips { dimension } => GroupElement::Signs(vec![1; dimension]),
            GroupKind::CoordinatePermutations { dimension } => {
                GroupElement::Permutation((0..dimension).collect())
            }
            GroupKind::CyclicRotation { order } => GroupElement::Rotation { step: 0, order },
            GroupKind::Trivial { .. } => GroupElement::Identity,
        }
    }

    pub fn check_manifold(&self, manifold: &ManifoldSpec) -> Result<()> {
        let ok = match self.kind {
            GroupKind::SignFlips { dimension }
            | GroupKind::CoordinatePermutations { dimension } => {
                manifold.kind == ManifoldKind::FlatTorus && manifold.dimension == dimension
            }
            GroupKind::CyclicRotation { .. } => manifold.kind == ManifoldKind::Circle,
            GroupKind::Trivial { dimension } => manifold.dimension == dimension,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::GroupMismatch(format!(
                "{:?} does not act on {:?} of dimension {}",
                self.kind, manifold.kind, manifold.dimension
            )))
        }
    }

    pub fn check_element(&self, g: &GroupElement) -> Result<()> {
        let ok = match (&self.kind, g) {
            (_, GroupElement::Identity) => true,
            (GroupKind::SignFlips { dimension }, GroupElement::Signs(s)) => {
                s.len() == *dimension && s.iter().all(|&v| v == 1 || v == -1)
            }
            (GroupKind::CoordinatePermutations { dimension }, GroupElement::Permutation(p)) => {
                p.len() == *dimension && is_permutation(p)
            }
            (GroupKind::CyclicRotation { order }, GroupElement::Rotation { step, order: o }) => {
                o == order && step < order
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::GroupMismatch(format!(
                "element {g:?} does not belong to {:?}",
                self.kind
            )))
        }
    }

    /// The element acting as `a` first, then `b`.
    pub fn compose(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        use GroupElement::*;
        match (a, b) {
            (Identity, x) | (x, Identity) => x.clone(),
            (Signs(x), Signs(y)) => Signs(x.iter().zip(y).map(|(u, v)| u * v).collect()),
            (Permutation(p), Permutation(q)) => Permutation(p.iter().map(|&i| q[i]).collect()),
            (Rotation { step: s, order }, Rotation { step: t, .. }) => Rotation {
                step: (s + t) % order,
                order: *order,
            },
            _ => panic!("composing elements of different groups: {a:?}, {b:?}"),
        }
    }

    pub fn inverse(&self, a: &GroupElement) -> GroupElement {
        use GroupElement::*;
        match a {
            Identity => Identity,
            Signs(s) => Signs(s.clone()),
            Permutation(p) => {
                let mut inv = vec![0; p.len()];
                for (i, &j) in p.iter().enumerate() {
                    inv[j] = i;
                }
                Permutation(inv)
            }
            Rotation { step, order } => Rotation {
                step: (order - step) % order,
                order: *order,
            },
        }
    }

    /// `g . x`.
    pub fn apply(&self, g: &GroupElement, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.point_dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.point_dimension(),
                got: x.len(),
            });
        }
        self.check_element(g)?;
        Ok(match g {
            GroupElement::Identity => x.to_vec(),
            GroupElement::Signs(s) => x
                .iter()
                .zip(s)
                .map(|(&v, &si)| wrap(si as f64 * v, -1.0, 2.0))
                .collect(),
            GroupElement::Permutation(p) => {
                let mut y = vec![0.0; x.len()];
                for (i, &dest) in p.iter().enumerate() {
                    y[dest] = x[i];
                }
                y
            }
            GroupElement::Rotation { step, order } => {
                vec![wrap(
                    x[0] + 2.0 * PI * *step as f64 / *order as f64,
                    -PI,
                    2.0 * PI,
                )]
            }
        })
    }

    /// Full group by closure over the current generators.
    pub fn elements(&self, cap: usize) -> Result<Vec<GroupElement>> {
        closure_from(self, &self.identity(), &self.generators, cap)
    }

    /// Product of a random word over generators and their inverses.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R, max_len: usize) -> GroupElement {
        let mut g = self.identity();
        if self.generators.is_empty() {
            return g;
        }
        let len = rng.random_range(1..=max_len.max(1));
        for _ in 0..len {
            let s = &self.generators[rng.random_range(0..self.generators.len())];
            let s = if rng.random_bool(0.5) {
                self.inverse(s)
            } else {
                s.clone()
            };
            g = self.compose(&g, &s);
        }
        g
    }
}

fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter()
        .all(|&j| j < p.len() && !std::mem::replace(&mut seen[j], true))
}

/// Breadth-first closure of `generators` under composition and inversion.
pub fn closure(
    group: &GroupSpec,
    generators: &[GroupElement],
    cap: usize,
) -> Result<Vec<GroupElement>> {
    for g in generators {
        group.check_element(g)?;
    }
    closure_from(group, &group.identity(), generators, cap)
}

fn closure_from(
    group: &GroupSpec,
    identity: &GroupElement,
    generators: &[GroupElement],
    cap: usize,
) -> Result<Vec<GroupElement>> {
    let mut steps: Vec<GroupElement> = Vec::with_capacity(2 * generators.len());
    for g in generators {
        for s in [g.clone(), group.inverse(g)] {
            if !steps.contains(&s) {
                steps.push(s);
            }
        }
    }
    let mut seen: HashSet<GroupElement> = HashSet::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    seen.insert(identity.clone());
    queue.push_back(identity.clone());
    while let Some(e) = queue.pop_front() {
        order.push(e.clone());
        for s in &steps {
            let next = group.compose(&e, s);
            if seen.insert(next.clone()) {
                if seen.len() > cap {
                    return Err(Error::GroupTooLarge { cap });
                }
                queue.push_back(next);
            }
        }
    }
    Ok(order)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RepresentationBlock {
    pub eigenvalue: f64,
    pub matrix: DMatrix<f64>,
}

/// `D(g)` on eigenspace `k` of `basis`: entry `(i, j)` is
/// `<phi_j(g .), phi_i>`.
pub fn representation_block(
    group: &GroupSpec,
    g: &GroupElement,
    basis: &TruncatedBasis,
    k: usize,
) -> Result<RepresentationBlock> {
    group.check_manifold(basis.manifold())?;
    group.check_element(g)?;
    let space = basis
        .eigenspaces()
        .get(k)
        .ok_or_else(|| Error::InvalidArgument(format!("eigenspace {k} not in basis")))?;
    let members = &space.members;
    let m = members.len();
    let mut matrix = DMatrix::zeros(m, m);
    match g {
        GroupElement::Identity => matrix.fill_with_identity(),
        GroupElement::Signs(s) => {
            for (j, idx) in members.iter().enumerate() {
                let flips = idx
                    .pattern
                    .iter()
                    .zip(s)
                    .filter(|(&t, &si)| t == Trig::Sin && si == -1)
                    .count();
                matrix[(j, j)] = if flips % 2 == 0 { 1.0 } else { -1.0 };
            }
        }
        GroupElement::Permutation(p) => {
            for (j, idx) in members.iter().enumerate() {
                let image = EigenIndex {
                    frequencies: p.iter().map(|&pi| idx.frequencies[pi]).collect(),
                    pattern: p.iter().map(|&pi| idx.pattern[pi]).collect(),
                };
                let i = members.binary_search(&image).map_err(|_| {
                    Error::GroupMismatch("eigenspace not closed under permutation".into())
                })?;
                matrix[(i, j)] = 1.0;
            }
        }
        GroupElement::Rotation { step, order } => {
            let angle = 2.0 * PI * *step as f64 / *order as f64;
            // Members come in (cos k, sin k) pairs; the constant is fixed.
            let mut j = 0;
            while j < m {
                let idx = &members[j];
                let freq = idx.frequencies[0];
                if freq == 0 {
                    matrix[(j, j)] = 1.0;
                    j += 1;
                    continue;
                }
                let (s, c) = (freq as f64 * angle).sin_cos();
                matrix[(j, j)] = c;
                matrix[(j, j + 1)] = s;
                matrix[(j + 1, j)] = -s;
                matrix[(j + 1, j + 1)] = c;
                j += 2;
            }
        }
    }
    Ok(RepresentationBlock {
        eigenvalue: space.eigenvalue,
        matrix,
    })
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RepresentationReport {
    pub elements_checked: usize,
    pub pairs_checked: usize,
    pub max_orthogonality_deviation: f64,
    pub max_law_deviation: f64,
    /// Elements came from random words rather than the full closure.
    pub sampled: bool,
}

impl RepresentationReport {
    pub fn max_deviation(&self) -> f64 {
        self.max_orthogonality_deviation.max(self.max_law_deviation)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_deviation() <= tol
    }
}

/// Checks orthogonality of every block and `D(ab) = D(a) D(b)` on all pairs of
/// the closure, or on `sample` random pairs when the closure exceeds `cap`.
pub fn verify_representation<R: Rng + ?Sized>(
    group: &GroupSpec,
    basis: &TruncatedBasis,
    cap: usize,
    sample: usize,
    rng: &mut R,
) -> Result<RepresentationReport> {
    let (pairs, elements, sampled): (Vec<(GroupElement, GroupElement)>, Vec<GroupElement>, bool) =
        match group.elements(cap) {
            Ok(all) => {
                let pairs = all
                    .iter()
                    .flat_map(|a| all.iter().map(move |b| (a.clone(), b.clone())))
                    .collect();
                (pairs, all, false)
            }
            Err(Error::GroupTooLarge { .. }) => {
                let max_len = 4 * group.generators().len().max(1);
                let pairs: Vec<_> = (0..sample)
                    .map(|_| {
                        (
                            group.random_element(rng, max_len),
                            group.random_element(rng, max_len),
                        )
                    })
                    .collect();
                let elements = pairs
                    .iter()
                    .flat_map(|(a, b)| [a.clone(), b.clone()])
                    .collect();
                (pairs, elements, true)
            }
            Err(e) => return Err(e),
        };

    let mut report = RepresentationReport {
        elements_checked: elements.len(),
        pairs_checked: pairs.len(),
        sampled,
        ..Default::default()
    };
    for k in 0..basis.eigenspaces().len() {
        for g in &elements {
            let d = representation_block(group, g, basis, k)?.matrix;
            let m = d.nrows();
            let dev = (d.transpose() * &d - DMatrix::identity(m, m)).amax();
            report.max_orthogonality_deviation = report.max_orthogonality_deviation.max(dev);
        }
        for (a, b) in &pairs {
            let ab = group.compose(a, b);
            let lhs = representation_block(group, &ab, basis, k)?.matrix;
            let rhs = representation_block(group, a, basis, k)?.matrix
                * representation_block(group, b, basis, k)?.matrix;
            report.max_law_deviation = report.max_law_deviation.max((lhs - rhs).amax());
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::build_basis;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_action() {
        let g = GroupSpec::sign_flips(3).unwrap();
        let x = [0.1, -0.4, 0.9];
        assert_eq!(g.apply(&g.identity(), &x).unwrap(), x.to_vec());
        assert_eq!(g.apply(&GroupElement::Identity, &x).unwrap(), x.to_vec());
    }

    #[test]
    fn sign_flip_action() {
        let g = GroupSpec::sign_flips(2).unwrap();
        let y = g
            .apply(&GroupElement::Signs(vec![-1, 1]), &[0.3, 0.7])
            .unwrap();
        assert_eq!(y, vec![-0.3, 0.7]);
        let y = g
            .apply(&GroupElement::Signs(vec![-1, 1]), &[-1.0, 0.0])
            .unwrap();
        assert_eq!(y, vec![-1.0, 0.0]);
    }

    #[test]
    fn rotation_action() {
        let g = GroupSpec::cyclic_rotation(4).unwrap();
        let y = g
            .apply(&GroupElement::Rotation { step: 1, order: 4 }, &[0.0])
            .unwrap();
        assert!((y[0] - PI / 2.0).abs() < 1e-15);
        let y = g
            .apply(&GroupElement::Rotation { step: 2, order: 4 }, &[0.0])
            .unwrap();
        assert!((y[0] + PI).abs() < 1e-15);
    }

    #[test]
    fn permutation_action_moves_coordinates() {
        let g = GroupSpec::coordinate_permutations(3).unwrap();
        // cycle 1 -> 2 -> 3 -> 1 moves x_1 into slot 2
        let y = g.apply(&g.generators()[1], &[0.1, 0.2, 0.3]).unwrap();
        assert_eq!(y, vec![0.3, 0.1, 0.2]);
    }

    #[test]
    fn apply_rejects_mismatch() {
        let g = GroupSpec::sign_flips(2).unwrap();
        assert!(matches!(
            g.apply(&g.identity(), &[0.1]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(g
            .apply(&GroupElement::Permutation(vec![1, 0]), &[0.1, 0.2])
            .is_err());
    }

    #[test]
    fn closure_sizes() {
        let t = GroupSpec::trivial(2).unwrap();
        assert_eq!(t.elements(10).unwrap(), vec![GroupElement::Identity]);
        let s4 = GroupSpec::coordinate_permutations(4).unwrap();
        let gens = vec![
            GroupElement::Permutation(vec![1, 0, 2, 3]),
            GroupElement::Permutation(vec![1, 2, 3, 0]),
        ];
        assert_eq!(closure(&s4, &gens, 100).unwrap().len(), 24);
        let z2 = GroupSpec::sign_flips(3).unwrap();
        assert_eq!(z2.elements(100).unwrap().len(), 8);
        let id_only = closure(&z2, &[z2.identity()], 100).unwrap();
        assert_eq!(id_only.len(), 1);
    }

    #[test]
    fn closure_cap_is_enforced() {
        let s6 = GroupSpec::coordinate_permutations(6).unwrap();
        assert!(matches!(
            s6.elements(100),
            Err(Error::GroupTooLarge { cap: 100 })
        ));
    }

    #[test]
    fn generator_counts_respect_log_bound() {
        for d in 1..=10 {
            let g = GroupSpec::sign_flips(d).unwrap();
            assert_eq!(g.generators().len(), d);
            assert!(g.generator_bound_holds());
        }
        for d in 2..=8 {
            assert!(GroupSpec::coordinate_permutations(d)
                .unwrap()
                .generator_bound_holds());
        }
    }

    #[test]
    fn blocks_for_identity_and_rotation() {
        let basis = build_basis(&ManifoldSpec::circle(), 9).unwrap();
        let g = GroupSpec::cyclic_rotation(8).unwrap();
        for k in 0..basis.eigenspaces().len() {
            let b = representation_block(&g, &g.identity(), &basis, k).unwrap();
            let m = b.matrix.nrows();
            assert_eq!(b.matrix, DMatrix::identity(m, m));
        }
        let b = representation_block(&g, &g.generators()[0], &basis, 2).unwrap();
        let a = 2.0 * 2.0 * PI / 8.0;
        let expected = DMatrix::from_row_slice(2, 2, &[a.cos(), a.sin(), -a.sin(), a.cos()]);
        assert!((b.matrix - expected).amax() < 1e-15);
    }

    #[test]
    fn sign_block_on_first_torus_eigenspace() {
        let basis = build_basis(&ManifoldSpec::flat_torus(1), 3).unwrap();
        let g = GroupSpec::sign_flips(1).unwrap();
        let b = representation_block(&g, &g.generators()[0], &basis, 1).unwrap();
        assert_eq!(
            b.matrix,
            DMatrix::from_diagonal(&nalgebra::dvector![1.0, -1.0])
        );
    }

    #[test]
    fn block_rejects_wrong_manifold() {
        let basis = build_basis(&ManifoldSpec::circle(), 3).unwrap();
        let g = GroupSpec::sign_flips(1).unwrap();
        assert!(matches!(
            representation_block(&g, &g.identity(), &basis, 0),
            Err(Error::GroupMismatch(_))
        ));
    }

    #[test]
    fn representation_laws_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let basis = build_basis(&ManifoldSpec::flat_torus(3), 40).unwrap();
        let g = GroupSpec::coordinate_permutations(3).unwrap();
        let r = verify_representation(&g, &basis, 100, 0, &mut rng).unwrap();
        assert_eq!(r.pairs_checked, 36);
        assert!(r.passes(1e-12));

        let t = GroupSpec::trivial(3).unwrap();
        let r = verify_representation(&t, &basis, 100, 0, &mut rng).unwrap();
        assert_eq!(r.max_deviation(), 0.0);
    }

    #[test]
    fn sampled_verification_when_closure_too_large() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let basis = build_basis(&ManifoldSpec::flat_torus(7), 20).unwrap();
        let g = GroupSpec::coordinate_permutations(7).unwrap();
        let r = verify_representation(&g, &basis, 100, 25, &mut rng).unwrap();
        assert!(r.sampled);
        assert_eq!(r.pairs_checked, 25);
        assert!(r.passes(1e-12));
    }

    #[test]
    fn serde_round_trip() {
        let g = GroupSpec::coordinate_permutations(4).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"kind":"coordinate_permutations","dimension":4}"#);
        assert_eq!(serde_json::from_str::<GroupSpec>(&s).unwrap(), g);

        let s = r#"{"kind":"sign_flips","dimension":2,"generators":[{"signs":[-1,-1]}]}"#;
        let g: GroupSpec = serde_json::from_str(s).unwrap();
        assert_eq!(g.generators().len(), 1);
        assert_eq!(serde_json::to_string(&g).unwrap(), s);

        assert!(serde_json::from_str::<GroupSpec>(r#"{"kind":"cyclic_rotation"}"#).is_err());
        assert!(
            serde_json::from_str::<GroupSpec>(r#"{"kind":"trivial","dimension":1,"x":1}"#).is_err()
        );
    }
}

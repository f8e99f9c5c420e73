use nalgebra::DVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use specavg::harness::data::{sample_dataset, uniform_points};
use specavg::harness::{invariance_discrepancy, DiscrepancyOptions, TargetSpec};
use specavg::projection::constraints_for;
use specavg::spec_avg::tail_energy;
use specavg::symmetry::DEFAULT_CLOSURE_CAP;
use specavg::{
    averaging_projector, build_basis, empirical_coefficients, fit, krr_fit, project,
    representation_block, sobolev_norm_sq, GroupSpec, Kernel, KernelSpec, LabeledDataset,
    ManifoldSpec, SpectralModel, TruncatedBasis,
};

fn cases() -> Vec<(ManifoldSpec, GroupSpec, usize)> {
    vec![
        (
            ManifoldSpec::circle(),
            GroupSpec::cyclic_rotation(8).unwrap(),
            17,
        ),
        (
            ManifoldSpec::circle(),
            GroupSpec::cyclic_rotation(3).unwrap(),
            13,
        ),
        (
            ManifoldSpec::flat_torus(1),
            GroupSpec::sign_flips(1).unwrap(),
            9,
        ),
        (
            ManifoldSpec::flat_torus(2),
            GroupSpec::sign_flips(2).unwrap(),
            30,
        ),
        (
            ManifoldSpec::flat_torus(2),
            GroupSpec::coordinate_permutations(2).unwrap(),
            30,
        ),
        (
            ManifoldSpec::flat_torus(3),
            GroupSpec::sign_flips(3).unwrap(),
            40,
        ),
        (
            ManifoldSpec::flat_torus(3),
            GroupSpec::coordinate_permutations(3).unwrap(),
            40,
        ),
        (
            ManifoldSpec::flat_torus(4),
            GroupSpec::coordinate_permutations(4).unwrap(),
            60,
        ),
    ]
}

fn eigenspace(case: usize, k: usize) -> (GroupSpec, TruncatedBasis, usize) {
    let (m, g, dim) = cases().swap_remove(case % 8);
    let basis = build_basis(&m, dim).unwrap();
    let k = k % basis.eigenspaces().len();
    (g, basis, k)
}

fn norm(v: &DVector<f64>) -> f64 {
    v.norm()
}

/// Wrapped distance on the torus `[-1, 1)^d`.
fn torus_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let t = (a - b).rem_euclid(2.0);
            t.min(2.0 - t).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projection_is_idempotent_feasible_and_contracting(
        case in 0usize..8,
        k in 0usize..32,
        raw in prop::collection::vec(-10.0f64..10.0, 32),
    ) {
        let (group, basis, k) = eigenspace(case, k);
        let c = constraints_for(&group, &basis, k).unwrap();
        let f = &raw[..c.dim()];
        let once = project(f, &c).unwrap().projected;
        let twice = project(once.as_slice(), &c).unwrap().projected;
        prop_assert!((&twice - &once).amax() <= 1e-10);
        prop_assert!(norm(&once) <= DVector::from_column_slice(f).norm() + 1e-12);
        for g in group.elements(DEFAULT_CLOSURE_CAP).unwrap() {
            let d = representation_block(&group, &g, &basis, k).unwrap().matrix;
            prop_assert!((&d * &once - &once).amax() <= 1e-8);
        }
        let p = averaging_projector(&group, &basis, k, DEFAULT_CLOSURE_CAP).unwrap();
        prop_assert!((&p * DVector::from_column_slice(f) - &once).amax() <= 1e-8);
    }

    #[test]
    fn projection_is_the_nearest_feasible_vector(
        case in 0usize..8,
        k in 0usize..32,
        raw in prop::collection::vec(-10.0f64..10.0, 32),
        others in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 32), 50),
    ) {
        let (group, basis, k) = eigenspace(case, k);
        let c = constraints_for(&group, &basis, k).unwrap();
        let m = c.dim();
        let f = DVector::from_column_slice(&raw[..m]);
        let best = (&f - project(f.as_slice(), &c).unwrap().projected).norm();
        let p = averaging_projector(&group, &basis, k, DEFAULT_CLOSURE_CAP).unwrap();
        for w in &others {
            let v = &p * DVector::from_column_slice(&w[..m]);
            prop_assert!(best <= (&f - v).norm() + 1e-10);
        }
    }

    #[test]
    fn group_actions_preserve_torus_distance(
        case in 2usize..8,
        seed in any::<u64>(),
    ) {
        let (m, group, _) = cases().swap_remove(case);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = uniform_points(&m, 8, &mut rng);
        for g in group.elements(DEFAULT_CLOSURE_CAP).unwrap() {
            for x in &pts {
                for y in &pts {
                    let gx = group.apply(&g, x).unwrap();
                    let gy = group.apply(&g, y).unwrap();
                    prop_assert!((torus_distance(&gx, &gy) - torus_distance(x, y)).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn fitted_models_are_exactly_invariant(
        case in 0usize..8,
        seed in any::<u64>(),
        n in 1usize..80,
    ) {
        let (m, group, dim) = cases().swap_remove(case);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = uniform_points(&m, n, &mut rng);
        let labels = uniform_points(&ManifoldSpec::flat_torus(1), n, &mut rng).into_iter().map(|v| 5.0 * v[0]).collect();
        let model = fit(&LabeledDataset::new(points, labels, 0.0).unwrap(), &m, &group, 2.0, Some(dim)).unwrap();
        prop_assert!(model.max_residual <= 1e-8);
        let test = uniform_points(&m, 100, &mut rng);
        for g in group.elements(DEFAULT_CLOSURE_CAP).unwrap() {
            for x in &test {
                let moved = model.predict(&group.apply(&g, x).unwrap()).unwrap();
                prop_assert!((moved - model.predict(x).unwrap()).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn fit_is_linear_in_labels(
        case in 0usize..8,
        seed in any::<u64>(),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let (m, group, dim) = cases().swap_remove(case);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 40;
        let points = uniform_points(&m, n, &mut rng);
        let noise = uniform_points(&ManifoldSpec::flat_torus(2), n, &mut rng);
        let y1: Vec<f64> = noise.iter().map(|v| v[0]).collect();
        let y2: Vec<f64> = noise.iter().map(|v| v[1]).collect();
        let mix: Vec<f64> = y1.iter().zip(&y2).map(|(p, q)| a * p + b * q).collect();
        let base = LabeledDataset::new(points, y1, 0.0).unwrap();
        let fit_of = |d: &LabeledDataset| fit(d, &m, &group, 2.0, Some(dim)).unwrap().coefficients;
        let (f1, f2, fm) = (fit_of(&base), fit_of(&base.with_labels(y2).unwrap()), fit_of(&base.with_labels(mix).unwrap()));
        for j in 0..fm.len() {
            prop_assert!((fm[j] - (a * f1[j] + b * f2[j])).abs() <= 1e-12);
        }
    }

    #[test]
    fn tail_energy_is_bounded_by_sobolev_norm(
        d in 1usize..4,
        raw in prop::collection::vec(-1.0f64..1.0, 200),
        alpha in 0.5f64..4.0,
    ) {
        let basis = build_basis(&ManifoldSpec::flat_torus(d), 150).unwrap();
        let dims = basis.function_cumulative_dims();
        // Decaying coefficients keep the Sobolev norm of the same order for every alpha.
        let f: Vec<f64> = raw.iter().zip(dims.iter()).take(basis.len()).map(|(v, &dj)| v / (dj as f64).powf(alpha / 2.0 + 0.5)).collect();
        let norm = sobolev_norm_sq(&basis, &f, alpha);
        for &cut in basis.cumulative_dims() {
            prop_assert!(tail_energy(&basis, &f, cut) <= (cut as f64).powf(-alpha) * norm);
        }
    }

    #[test]
    fn projection_does_not_move_away_from_invariant_target(
        seed in any::<u64>(),
        n in 5usize..200,
        cutoff in 5usize..60,
    ) {
        let m = ManifoldSpec::flat_torus(2);
        let group = GroupSpec::sign_flips(2).unwrap();
        let target = TargetSpec::WeightedSquares.compile(&m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = sample_dataset(&target, n, 0.0, &mut rng).unwrap();
        let model = fit(&data, &m, &group, 2.0, Some(cutoff)).unwrap();
        let raw = empirical_coefficients(&data, &model.basis).unwrap();
        let truth: Vec<f64> = model.basis.indices().map(|i| target.coefficient(i)).collect();
        let dist = |f: &[f64]| f.iter().zip(&truth).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        prop_assert!(dist(&model.coefficients) <= dist(&raw) + 1e-12);
    }

    #[test]
    fn canonicalize_lands_in_domain(x in prop::collection::vec(-1e6f64..1e6, 1..5)) {
        let m = ManifoldSpec::flat_torus(x.len());
        let y = m.canonicalize(&x);
        prop_assert!(y.iter().all(|v| (-1.0..1.0).contains(v)));
        prop_assert!(build_basis(&m, 5).unwrap().eval(&y).is_ok());
        let c = ManifoldSpec::circle().canonicalize(&x[..1]);
        prop_assert!((-std::f64::consts::PI..std::f64::consts::PI).contains(&c[0]));
    }

    #[test]
    fn build_basis_is_deterministic(d in 1usize..5, dim in 1usize..300, cosine in any::<bool>()) {
        let m = if cosine { ManifoldSpec::flat_torus_cosine(d) } else { ManifoldSpec::flat_torus(d) };
        let a = build_basis(&m, dim).unwrap();
        prop_assert!(a.len() >= dim);
        prop_assert_eq!(a, build_basis(&m, dim).unwrap());
    }

    #[test]
    fn spectral_model_json_round_trips_exactly(case in 0usize..8, coeffs in prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 64)) {
        let (m, group, dim) = cases().swap_remove(case);
        let basis = build_basis(&m, dim).unwrap();
        let c = coeffs[..basis.len().min(64)].iter().copied().chain(std::iter::repeat(0.0)).take(basis.len()).collect();
        let model = SpectralModel::from_coefficients(basis, c, group, 2.0).unwrap();
        let back = SpectralModel::from_json(&model.to_json().unwrap()).unwrap();
        prop_assert_eq!(back.coefficients, model.coefficients);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn plain_krr_is_not_invariant(seed in any::<u64>()) {
        let m = ManifoldSpec::flat_torus(2);
        let group = GroupSpec::sign_flips(2).unwrap();
        let target = TargetSpec::WeightedSquares.compile(&m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = sample_dataset(&target, 100, 0.1, &mut rng).unwrap();
        let model = krr_fit(&data, &Kernel::new(KernelSpec::VonMises { eta: 1.0 }, &m).unwrap(), 1e-4).unwrap();
        let test = uniform_points(&m, 50, &mut rng);
        let d = invariance_discrepancy(&model, &test, &group, &DiscrepancyOptions::default()).unwrap();
        prop_assert!(d.value >= 1e-6);
    }

    #[test]
    fn gram_matrices_are_psd(seed in any::<u64>(), eta in 0.1f64..5.0, n in 2usize..200) {
        let m = ManifoldSpec::flat_torus(3);
        let pts = uniform_points(&m, n, &mut ChaCha8Rng::seed_from_u64(seed));
        let gram = Kernel::new(KernelSpec::VonMises { eta }, &m).unwrap().gram(&pts).unwrap();
        prop_assert_eq!(&gram, &gram.transpose());
        prop_assert!(gram.clone().symmetric_eigenvalues().min() >= -1e-8 * gram.trace());
    }
}

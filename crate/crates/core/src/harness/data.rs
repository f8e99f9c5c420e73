//! Seeded data generation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::target::Target;
use crate::spec_avg::LabeledDataset;
use crate::spectra::{ManifoldKind, ManifoldSpec};

const TRAIN_STREAM: u64 = 0x7472_6169_6e00_0000;
const TEST_STREAM: u64 = 0x7465_7374_0000_0000;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent generator for a `(seed, stream, n)` triple.
pub fn stream_rng(seed: u64, stream: u64, n: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(splitmix64(seed ^ stream) ^ n))
}

/// `n` i.i.d. uniform points on the manifold's chart.
pub fn uniform_points<R: Rng + ?Sized>(
    manifold: &ManifoldSpec,
    n: usize,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    let (lo, hi) = match manifold.kind {
        ManifoldKind::FlatTorus => (-1.0, 1.0),
        ManifoldKind::Circle => (-std::f64::consts::PI, std::f64::consts::PI),
    };
    (0..n)
        .map(|_| {
            (0..manifold.dimension)
                .map(|_| rng.random_range(lo..hi))
                .collect()
        })
        .collect()
}

/// Uniform points labelled `f*(x) + N(0, noise_std^2)`.
pub fn sample_dataset<R: Rng + ?Sized>(
    target: &Target,
    n: usize,
    noise_std: f64,
    rng: &mut R,
) -> Result<LabeledDataset> {
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let points = uniform_points(target.manifold(), n, rng);
    let noise = if noise_std > 0.0 {
        Some(Normal::new(0.0, noise_std).map_err(|e| Error::InvalidArgument(e.to_string()))?)
    } else {
        None
    };
    let labels = points
        .iter()
        .map(|x| {
            let eps = noise.as_ref().map_or(0.0, |d| d.sample(rng));
            Ok(target.eval(x)? + eps)
        })
        .collect::<Result<Vec<_>>>()?;
    LabeledDataset::new(points, labels, noise_std)
}

/// Training set for `(n, seed)`; deterministic in both.
pub fn generate_dataset(config: &ExperimentConfig, n: usize, seed: u64) -> Result<LabeledDataset> {
    let target = config.target.compile(&config.manifold)?;
    let mut rng = stream_rng(seed, TRAIN_STREAM, n as u64);
    sample_dataset(&target, n, config.noise_std, &mut rng)
}

/// Test points for `seed`, shared by every `n` and method.
pub fn generate_test_points(config: &ExperimentConfig, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = stream_rng(seed, TEST_STREAM, config.n_test as u64);
    uniform_points(&config.manifold, config.n_test, &mut rng)
}

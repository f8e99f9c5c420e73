use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::target::TargetSpec;
use crate::kernels::KernelSpec;
use crate::spectra::{build_basis, ManifoldSpec};
use crate::symmetry::GroupSpec;

/// Top-level experiment description, read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub manifold: ManifoldSpec,
    pub group: GroupSpec,
    pub target: TargetSpec,
    pub methods: Vec<MethodConfig>,
    pub n_train: Vec<usize>,
    pub n_test: usize,
    pub noise_std: f64,
    pub seeds: Vec<u64>,
    pub output: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum MethodConfig {
    /// Spectral averaging. Without `cutoffs` the cutoff follows the
    /// `n^(1/(1+alpha))` schedule; with `cutoffs` each listed `D` is fitted and
    /// `alpha` (default 2) only weights the Sobolev norm.
    SpecAvg {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cutoffs: Option<Vec<usize>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
    Krr {
        kernel: KernelConfig,
        ridges: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
}

/// Kernel choice in a config; the averaging group is the experiment's group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelConfig {
    VonMises { eta: f64 },
    TruncatedSobolev { min_dim: usize, alpha: f64 },
    GroupAveraged { inner: Box<KernelConfig> },
}

impl KernelConfig {
    pub fn to_spec(&self, manifold: &ManifoldSpec, group: &GroupSpec) -> Result<KernelSpec> {
        Ok(match self {
            KernelConfig::VonMises { eta } => KernelSpec::VonMises { eta: *eta },
            KernelConfig::TruncatedSobolev { min_dim, alpha } => KernelSpec::TruncatedSobolev {
                basis: build_basis(manifold, *min_dim)?,
                alpha: *alpha,
            },
            KernelConfig::GroupAveraged { inner } => KernelSpec::GroupAveraged {
                inner: Box::new(inner.to_spec(manifold, group)?),
                group: group.clone(),
            },
        })
    }

    fn label(&self) -> String {
        match self {
            KernelConfig::VonMises { .. } => "von_mises".into(),
            KernelConfig::TruncatedSobolev { .. } => "sobolev".into(),
            KernelConfig::GroupAveraged { inner } => format!("group_averaged_{}", inner.label()),
        }
    }
}

impl MethodConfig {
    /// Name written to the `method` CSV column.
    pub fn name(&self) -> String {
        match self {
            MethodConfig::SpecAvg { name: Some(n), .. }
            | MethodConfig::Krr { name: Some(n), .. } => n.clone(),
            MethodConfig::SpecAvg {
                cutoffs: Some(_), ..
            } => "spec_avg".into(),
            MethodConfig::SpecAvg { .. } => "spec_avg_schedule".into(),
            MethodConfig::Krr { kernel, .. } => format!("krr_{}", kernel.label()),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            MethodConfig::SpecAvg { alpha, cutoffs, .. } => {
                if let Some(a) = alpha {
                    if !(*a > 1.0) || !a.is_finite() {
                        return Err(Error::Config(format!(
                            "spec_avg alpha must exceed 1, got {a}"
                        )));
                    }
                }
                match cutoffs {
                    None if alpha.is_none() => Err(Error::Config(
                        "spec_avg needs \"alpha\" (schedule) or \"cutoffs\" (sweep)".into(),
                    )),
                    Some(c) if c.is_empty() || c.contains(&0) => Err(Error::Config(
                        "cutoffs must be a nonempty list of positive integers".into(),
                    )),
                    _ => Ok(()),
                }
            }
            MethodConfig::Krr { ridges, .. } => {
                if ridges.is_empty() || ridges.iter().any(|r| !(*r > 0.0)) {
                    Err(Error::Config(
                        "ridges must be a nonempty list of positive values".into(),
                    ))
                } else {
                    Ok(())
                }
            }
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.manifold.validate()?;
        self.group.check_manifold(&self.manifold)?;
        self.target.check(&self.manifold)?;
        if self.methods.is_empty() {
            return Err(Error::Config("no methods".into()));
        }
        if self.n_train.is_empty() || self.n_train.contains(&0) {
            return Err(Error::Config(
                "n_train must be a nonempty list of positive sizes".into(),
            ));
        }
        if self.n_test == 0 {
            return Err(Error::Config("n_test must be at least 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("no seeds".into()));
        }
        if !(self.noise_std >= 0.0) {
            return Err(Error::Config("noise_std must be nonnegative".into()));
        }
        self.methods.iter().try_for_each(MethodConfig::validate)
    }
}

//! Experiment runner and CSV output.
//!
//! Every `(n, seed)` cell draws one training set and one test set, shared by
//! all methods. Cells run on the rayon pool; rows are gathered and sorted by
//! `(method, hyperparameter, n, seed)` in config order before writing, and
//! each `(method, hyperparameter, n)` group is followed by its seed average.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::harness::config::{ExperimentConfig, MethodConfig};
use crate::harness::data::{generate_dataset, generate_test_points};
use crate::harness::metrics::{
    empirical_excess_risk_multi, exact_excess_risk, invariance_discrepancy_multi,
    DiscrepancyOptions,
};
use crate::harness::target::Target;
use crate::kernels::{krr_fit_path, Kernel};
use crate::spec_avg::{fit, LabeledDataset};

pub const CSV_HEADER: [&str; 11] = [
    "method",
    "hyperparam",
    "n",
    "seed",
    "invariance_discrepancy",
    "id_sampled",
    "excess_risk_empirical",
    "excess_risk_exact",
    "wall_time_ms",
    "oracle_calls",
    "error",
];

/// Alpha recorded on models fitted with an explicit cutoff and no alpha.
const DEFAULT_SWEEP_ALPHA: f64 = 2.0;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Off by default: with timing left out the CSV is a pure function of the
    /// config and `wall_time_ms` is empty.
    pub record_timing: bool,
    pub discrepancy: DiscrepancyOptions,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub method: String,
    pub hyperparam: f64,
    pub n: usize,
    /// `None` marks a seed-averaged row.
    pub seed: Option<u64>,
    pub invariance_discrepancy: Option<f64>,
    pub id_sampled: Option<bool>,
    pub excess_risk_empirical: Option<f64>,
    /// Parseval risk; only spectral models have one.
    pub excess_risk_exact: Option<f64>,
    pub wall_time_ms: Option<f64>,
    pub oracle_calls: Option<f64>,
    pub error: Option<String>,
}

impl MetricsRow {
    fn failed(method: String, hyperparam: f64, n: usize, seed: u64, err: &Error) -> Self {
        Self {
            method,
            hyperparam,
            n,
            seed: Some(seed),
            invariance_discrepancy: None,
            id_sampled: None,
            excess_risk_empirical: None,
            excess_risk_exact: None,
            wall_time_ms: None,
            oracle_calls: None,
            error: Some(err.to_string()),
        }
    }

    pub fn is_average(&self) -> bool {
        self.seed.is_none()
    }

    fn record(&self) -> Vec<String> {
        let num = |v: Option<f64>| v.map(fmt_float).unwrap_or_default();
        vec![
            self.method.clone(),
            fmt_float(self.hyperparam),
            self.n.to_string(),
            self.seed
                .map_or_else(|| "avg".to_string(), |s| s.to_string()),
            num(self.invariance_discrepancy),
            self.id_sampled.map(|b| b.to_string()).unwrap_or_default(),
            num(self.excess_risk_empirical),
            num(self.excess_risk_exact),
            num(self.wall_time_ms),
            num(self.oracle_calls),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

/// 17 significant digits, round-trip exact.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Ordering key: method index, hyperparameter index, n index, seed index.
type RowKey = (usize, usize, usize, usize);

struct Cell<'a> {
    config: &'a ExperimentConfig,
    target: &'a Target,
    opts: &'a RunOptions,
    n: usize,
    seed: u64,
    data: LabeledDataset,
    test: Vec<Vec<f64>>,
}

impl Cell<'_> {
    fn elapsed_ms(&self, start: Instant, share: usize) -> Option<f64> {
        self.opts
            .record_timing
            .then(|| start.elapsed().as_secs_f64() * 1e3 / share as f64)
    }

    fn discrepancy_opts(&self) -> DiscrepancyOptions {
        DiscrepancyOptions {
            seed: self.seed,
            ..self.opts.discrepancy
        }
    }

    fn spec_avg_row(
        &self,
        name: &str,
        alpha: f64,
        cutoff: Option<usize>,
        hyperparam: f64,
    ) -> Result<MetricsRow> {
        let start = Instant::now();
        let model = fit(
            &self.data,
            &self.config.manifold,
            &self.config.group,
            alpha,
            cutoff,
        )?;
        let wall_time_ms = self.elapsed_ms(start, 1);
        let predict = |x: &[f64]| Ok(vec![model.predict(x)?]);
        let (id, sampled) = invariance_discrepancy_multi(
            predict,
            1,
            &self.test,
            &self.config.group,
            &self.discrepancy_opts(),
        )?;
        let (risk, _) = empirical_excess_risk_multi(predict, 1, self.target, &self.test)?;
        Ok(MetricsRow {
            method: name.to_string(),
            hyperparam,
            n: self.n,
            seed: Some(self.seed),
            invariance_discrepancy: Some(id[0]),
            id_sampled: Some(sampled),
            excess_risk_empirical: Some(risk[0]),
            excess_risk_exact: Some(exact_excess_risk(&model, self.target)?),
            wall_time_ms,
            oracle_calls: Some(model.oracle_calls.total() as f64),
            error: None,
        })
    }

    fn krr_rows(
        &self,
        name: &str,
        kernel: &crate::harness::config::KernelConfig,
        ridges: &[f64],
    ) -> Result<Vec<MetricsRow>> {
        let start = Instant::now();
        let spec = kernel.to_spec(&self.config.manifold, &self.config.group)?;
        let kernel = Kernel::with_cap(
            spec,
            &self.config.manifold,
            self.opts.discrepancy.closure_cap,
        )?;
        let path = krr_fit_path(&self.data, &kernel, ridges)?;
        let wall_time_ms = self.elapsed_ms(start, ridges.len());
        let predict = |x: &[f64]| path.predict_all(x);
        let (ids, sampled) = invariance_discrepancy_multi(
            predict,
            ridges.len(),
            &self.test,
            &self.config.group,
            &self.discrepancy_opts(),
        )?;
        let (risks, _) =
            empirical_excess_risk_multi(predict, ridges.len(), self.target, &self.test)?;
        Ok(path
            .models
            .iter()
            .enumerate()
            .map(|(i, m)| MetricsRow {
                method: name.to_string(),
                hyperparam: m.ridge,
                n: self.n,
                seed: Some(self.seed),
                invariance_discrepancy: Some(ids[i]),
                id_sampled: Some(sampled),
                excess_risk_empirical: Some(risks[i]),
                excess_risk_exact: None,
                wall_time_ms,
                oracle_calls: Some(m.kernel_evals as f64),
                error: None,
            })
            .collect())
    }

    fn run(&self, ni: usize, si: usize) -> Vec<(RowKey, MetricsRow)> {
        let mut out = Vec::new();
        for (mi, method) in self.config.methods.iter().enumerate() {
            let name = method.name();
            match method {
                MethodConfig::SpecAvg {
                    alpha,
                    cutoffs: None,
                    ..
                } => {
                    let alpha = alpha.expect("validated");
                    let row = self
                        .spec_avg_row(&name, alpha, None, alpha)
                        .unwrap_or_else(|e| {
                            MetricsRow::failed(name.clone(), alpha, self.n, self.seed, &e)
                        });
                    out.push(((mi, 0, ni, si), row));
                }
                MethodConfig::SpecAvg {
                    alpha,
                    cutoffs: Some(cutoffs),
                    ..
                } => {
                    let alpha = alpha.unwrap_or(DEFAULT_SWEEP_ALPHA);
                    for (hi, &d) in cutoffs.iter().enumerate() {
                        let row = self
                            .spec_avg_row(&name, alpha, Some(d), d as f64)
                            .unwrap_or_else(|e| {
                                MetricsRow::failed(name.clone(), d as f64, self.n, self.seed, &e)
                            });
                        out.push(((mi, hi, ni, si), row));
                    }
                }
                MethodConfig::Krr { kernel, ridges, .. } => {
                    match self.krr_rows(&name, kernel, ridges) {
                        Ok(rows) => out.extend(
                            rows.into_iter()
                                .enumerate()
                                .map(|(hi, r)| ((mi, hi, ni, si), r)),
                        ),
                        Err(e) => out.extend(ridges.iter().enumerate().map(|(hi, &r)| {
                            (
                                (mi, hi, ni, si),
                                MetricsRow::failed(name.clone(), r, self.n, self.seed, &e),
                            )
                        })),
                    }
                }
            }
        }
        out
    }
}

/// Runs every `(method, hyperparameter, n, seed)` cell and returns seed rows
/// interleaved with their averages.
pub fn run_experiment(config: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<MetricsRow>> {
    config.validate()?;
    let target = config.target.compile(&config.manifold)?;
    let cells: Vec<(usize, usize)> = (0..config.n_train.len())
        .flat_map(|ni| (0..config.seeds.len()).map(move |si| (ni, si)))
        .collect();

    let mut keyed: Vec<(RowKey, MetricsRow)> = cells
        .par_iter()
        .map(|&(ni, si)| {
            let (n, seed) = (config.n_train[ni], config.seeds[si]);
            let test = generate_test_points(config, seed);
            match generate_dataset(config, n, seed) {
                Ok(data) => Cell {
                    config,
                    target: &target,
                    opts,
                    n,
                    seed,
                    data,
                    test,
                }
                .run(ni, si),
                Err(e) => vec![(
                    (usize::MAX, 0, ni, si),
                    MetricsRow::failed("data".into(), 0.0, n, seed, &e),
                )],
            }
        })
        .flatten()
        .collect();
    keyed.sort_by_key(|(k, _)| *k);

    let mut rows = Vec::with_capacity(keyed.len() + keyed.len() / config.seeds.len().max(1));
    let mut i = 0;
    while i < keyed.len() {
        let group_key = (keyed[i].0 .0, keyed[i].0 .1, keyed[i].0 .2);
        let start = i;
        while i < keyed.len() && (keyed[i].0 .0, keyed[i].0 .1, keyed[i].0 .2) == group_key {
            i += 1;
        }
        let group: Vec<MetricsRow> = keyed[start..i].iter().map(|(_, r)| r.clone()).collect();
        let avg = average_rows(&group);
        rows.extend(group);
        rows.push(avg);
    }
    Ok(rows)
}

/// Mean over the successful seed rows of one `(method, hyperparam, n)` group.
pub fn average_rows(group: &[MetricsRow]) -> MetricsRow {
    let first = &group[0];
    let ok: Vec<&MetricsRow> = group.iter().filter(|r| r.error.is_none()).collect();
    let mean = |f: fn(&MetricsRow) -> Option<f64>| -> Option<f64> {
        if ok.is_empty() {
            return None;
        }
        let vals: Option<Vec<f64>> = ok.iter().map(|r| f(r)).collect();
        vals.map(|v| v.iter().sum::<f64>() / v.len() as f64)
    };
    let failed = group.len() - ok.len();
    MetricsRow {
        method: first.method.clone(),
        hyperparam: first.hyperparam,
        n: first.n,
        seed: None,
        invariance_discrepancy: mean(|r| r.invariance_discrepancy),
        id_sampled: (!ok.is_empty()).then(|| ok.iter().any(|r| r.id_sampled == Some(true))),
        excess_risk_empirical: mean(|r| r.excess_risk_empirical),
        excess_risk_exact: mean(|r| r.excess_risk_exact),
        wall_time_ms: mean(|r| r.wall_time_ms),
        oracle_calls: mean(|r| r.oracle_calls),
        error: (failed > 0).then(|| format!("{failed} of {} seeds failed", group.len())),
    }
}

pub fn write_csv<W: Write>(rows: &[MetricsRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let to_io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(CSV_HEADER).map_err(to_io)?;
    for row in rows {
        w.write_record(row.record()).map_err(to_io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(rows: &[MetricsRow], path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    let file = std::fs::File::create(path)?;
    write_csv(rows, std::io::BufWriter::new(file))
}

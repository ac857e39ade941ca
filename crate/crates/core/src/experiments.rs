//! Sequential Bayesian estimation with random measurement bases, and the
//! batch harness that aggregates it.
//!
//! One experiment draws an ensemble from its own stream, then for each of
//! `N` rounds draws a basis (Haar-random or uniform from a design), samples
//! an outcome from the posterior predictive distribution, and updates the
//! posterior. Sampling from the predictive distribution rather than from a
//! fixed true state means no particular state is committed to.
//!
//! The reported average fidelity is evaluated on the last basis `U`, with
//! `w` the posterior before its outcome is observed:
//!
//! ```text
//! F = sum_a v_a sum_x p_U(x|a) F(rho_a, rho_hat(x)),
//! rho_hat(x) = sum_b w_b p_U(x|b) rho_b / sum_b w_b p_U(x|b)
//! ```
//!
//! where `v` is either the prior or `w` itself (see [`RiskWeighting`]). For
//! `N = 1` the two coincide.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayes::{likelihood_table, Posterior};
use crate::designs::{clifford_group_qubit, pauli_group, qubit_2design, sample_from_set, UnitarySet};
use crate::error::{Error, Result};
use crate::fidelity::fidelity;
use crate::sampling::{build_ensemble, haar_unitary, sample_index, RngStream};
use crate::state::{DensityMatrix, Ensemble, EnsembleKind, Povm, Unitary};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeasurementSource {
    #[serde(rename = "haar")]
    Haar,
    #[serde(rename = "pauli")]
    Pauli,
    #[serde(rename = "2design")]
    TwoDesign,
    #[serde(rename = "clifford")]
    Clifford,
}

impl MeasurementSource {
    pub const ALL: [MeasurementSource; 4] = [
        MeasurementSource::Pauli,
        MeasurementSource::TwoDesign,
        MeasurementSource::Clifford,
        MeasurementSource::Haar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MeasurementSource::Haar => "haar",
            MeasurementSource::Pauli => "pauli",
            MeasurementSource::TwoDesign => "2design",
            MeasurementSource::Clifford => "clifford",
        }
    }
}

impl std::fmt::Display for MeasurementSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for MeasurementSource {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown measurement source '{s}'")))
    }
}

/// Which distribution over true states the final fidelity is averaged over.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RiskWeighting {
    /// The posterior before the last measurement.
    #[default]
    Posterior,
    /// The ensemble prior.
    Prior,
}

/// Largest dimension accepted by [`ExperimentConfig::validate`].
pub const MAX_DIM: usize = 64;

fn default_bins() -> usize {
    40
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub d: usize,
    #[serde(rename = "L")]
    pub ensemble_size: usize,
    /// Number of measurements. Zero evaluates the prior mean alone.
    #[serde(rename = "N")]
    pub n_shots: usize,
    #[serde(rename = "I")]
    pub experiments: usize,
    pub ensemble: EnsembleKind,
    pub source: MeasurementSource,
    pub master_seed: u64,
    #[serde(default)]
    pub weighting: RiskWeighting,
    #[serde(default = "default_bins")]
    pub bins: usize,
    /// Worker threads; `None` uses every available core.
    #[serde(default)]
    pub workers: Option<usize>,
    /// Applied process-wide by the front end before a run.
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
}

impl ExperimentConfig {
    pub fn new(d: usize, ensemble: EnsembleKind, ensemble_size: usize, n_shots: usize, experiments: usize) -> Self {
        Self {
            d,
            ensemble_size,
            n_shots,
            experiments,
            ensemble,
            source: MeasurementSource::Haar,
            master_seed: 0,
            weighting: RiskWeighting::default(),
            bins: default_bins(),
            workers: None,
            tolerances: None,
        }
    }

    pub fn with_source(mut self, source: MeasurementSource) -> Self {
        self.source = source;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn with_weighting(mut self, weighting: RiskWeighting) -> Self {
        self.weighting = weighting;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("d", self.d),
            ("L", self.ensemble_size),
            ("I", self.experiments),
            ("bins", self.bins),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::InvalidConfig(format!("{name} must be positive")));
        }
        if self.d > MAX_DIM {
            return Err(Error::InvalidConfig(format!("d = {} exceeds the limit of {MAX_DIM}", self.d)));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidConfig("workers must be positive".into()));
        }
        if self.ensemble == EnsembleKind::Custom {
            return Err(Error::InvalidConfig("custom ensembles cannot be sampled".into()));
        }
        if self.source != MeasurementSource::Haar && self.d != 2 {
            return Err(Error::InvalidConfig(format!(
                "measurement source '{}' is only defined for d = 2",
                self.source
            )));
        }
        Ok(())
    }
}

/// Source of measurement bases for one batch.
#[derive(Debug, Clone)]
pub enum BasisSampler {
    Haar { d: usize },
    Design(UnitarySet<f64>),
}

impl BasisSampler {
    pub fn for_config(cfg: &ExperimentConfig) -> Result<Self> {
        Ok(match cfg.source {
            MeasurementSource::Haar => BasisSampler::Haar { d: cfg.d },
            MeasurementSource::Pauli => BasisSampler::Design(pauli_group()),
            MeasurementSource::TwoDesign => BasisSampler::Design(qubit_2design()?),
            MeasurementSource::Clifford => BasisSampler::Design(clifford_group_qubit()?),
        })
    }

    pub fn draw(&self, rng: &mut RngStream) -> Result<Unitary<f64>> {
        match self {
            BasisSampler::Haar { d } => haar_unitary(*d, rng),
            BasisSampler::Design(set) => Ok(sample_from_set(set, rng).clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub stream_index: u64,
    pub outcomes: Vec<usize>,
    /// Posterior after all `N` updates.
    pub posterior: Vec<f64>,
    pub average_fidelity: f64,
    pub wall_time: Duration,
}

pub fn run_experiment(cfg: &ExperimentConfig, stream_index: u64) -> Result<ExperimentRecord> {
    cfg.validate()?;
    run_with_sampler(cfg, &BasisSampler::for_config(cfg)?, stream_index)
}

pub fn run_with_sampler(cfg: &ExperimentConfig, sampler: &BasisSampler, stream_index: u64) -> Result<ExperimentRecord> {
    let start = Instant::now();
    let mut rng = RngStream::new(cfg.master_seed, stream_index);
    let ensemble: Ensemble<f64> = build_ensemble(cfg.ensemble, cfg.d, cfg.ensemble_size, &mut rng)?;
    let mut posterior = Posterior::prior(&ensemble);
    let mut outcomes = Vec::with_capacity(cfg.n_shots);
    let mut average_fidelity = if cfg.n_shots == 0 { Some(prior_only_fidelity(&ensemble)?) } else { None };

    for round in 0..cfg.n_shots {
        let basis = sampler.draw(&mut rng)?;
        let povm = Povm::from_basis(&basis);
        let table = likelihood_table(&povm, &ensemble)?;
        if round + 1 == cfg.n_shots {
            average_fidelity = Some(final_fidelity(&ensemble, &posterior, &table, cfg.weighting)?);
        }
        let predictive: Vec<f64> = table.iter().map(|row| posterior.predictive(row)).collect();
        let x = sample_index(&predictive, &mut rng)?;
        posterior.update_in_place(&table[x], x)?;
        outcomes.push(x);
    }

    Ok(ExperimentRecord {
        stream_index,
        outcomes,
        posterior: posterior.weights().to_vec(),
        average_fidelity: average_fidelity.expect("set on the last round"),
        wall_time: start.elapsed(),
    })
}

/// Expected fidelity of the Bayes estimate over the outcomes of one basis.
///
/// `table[x][a] = p(x|a)`; `posterior` is the belief before the outcome.
/// An outcome with zero predictive probability keeps the current posterior
/// mean as its estimate.
pub fn final_fidelity(
    ensemble: &Ensemble<f64>,
    posterior: &Posterior<f64>,
    table: &[Vec<f64>],
    weighting: RiskWeighting,
) -> Result<f64> {
    let w = posterior.weights();
    let fallback = DensityMatrix::mixture(w, ensemble.states())?;
    let estimates = table
        .iter()
        .map(|row| {
            let q = posterior.predictive(row);
            if q > 0.0 {
                let post: Vec<f64> = w.iter().zip(row).map(|(wa, l)| wa * l / q).collect();
                DensityMatrix::mixture(&post, ensemble.states())
            } else {
                Ok(fallback.clone())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let v = match weighting {
        RiskWeighting::Prior => ensemble.prior().as_slice(),
        RiskWeighting::Posterior => w,
    };
    let mut total = 0.0;
    for (a, (&va, rho)) in v.iter().zip(ensemble.states()).enumerate() {
        if va == 0.0 {
            continue;
        }
        let mut inner = 0.0;
        for (row, est) in table.iter().zip(&estimates) {
            let p = row[a];
            if p > 0.0 {
                inner += p * fidelity(rho, est)?;
            }
        }
        total += va * inner;
    }
    Ok(total.clamp(0.0, 1.0))
}

/// `sum_a p_a F(rho_a, rho_bar)` for the prior mean `rho_bar`: the average
/// fidelity before any measurement.
pub fn prior_only_fidelity(ensemble: &Ensemble<f64>) -> Result<f64> {
    let mean = ensemble.average_state();
    let mut total = 0.0;
    for (p, rho) in ensemble.prior().as_slice().iter().zip(ensemble.states()) {
        total += p * fidelity(rho, &mean)?;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` increasing edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// Uniform bins spanning the observed range. The last bin is closed.
    pub fn uniform(values: &[f64], bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidConfig("bins must be positive".into()));
        }
        if values.is_empty() {
            return Err(Error::InvalidConfig("no values to bin".into()));
        }
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let mut hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::NonFinite);
        }
        if hi <= lo {
            hi = lo + 1e-12_f64.max(lo.abs() * 1e-12);
        }
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|k| if k == bins { hi } else { lo + width * k as f64 }).collect();
        let mut counts = vec![0; bins];
        for &v in values {
            let k = (((v - lo) / width).floor() as usize).min(bins - 1);
            counts[k] += 1;
        }
        Ok(Self { edges, counts })
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

#[derive(Debug, Clone)]
pub struct BatchSummary {
    pub config: ExperimentConfig,
    /// Ordered by stream index.
    pub records: Vec<ExperimentRecord>,
    pub mean: f64,
    pub std: f64,
    pub histogram: Histogram,
}

impl BatchSummary {
    pub fn from_records(config: ExperimentConfig, mut records: Vec<ExperimentRecord>) -> Result<Self> {
        records.sort_by_key(|r| r.stream_index);
        let fidelities: Vec<f64> = records.iter().map(|r| r.average_fidelity).collect();
        let (mean, std) = mean_std(&fidelities);
        let histogram = Histogram::uniform(&fidelities, config.bins)?;
        Ok(Self { config, records, mean, std, histogram })
    }

    pub fn fidelities(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.average_fidelity).collect()
    }

    pub fn standard_error(&self) -> f64 {
        self.std / (self.records.len() as f64).sqrt()
    }

    pub fn min(&self) -> f64 {
        self.fidelities().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.fidelities().into_iter().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn thread_pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w);
    }
    builder
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))
}

/// Runs experiments on streams `0..I` and aggregates them in stream order.
pub fn run_batch(cfg: &ExperimentConfig) -> Result<BatchSummary> {
    cfg.validate()?;
    let sampler = BasisSampler::for_config(cfg)?;
    let pool = thread_pool(cfg.workers)?;
    let records = pool.install(|| {
        (0..cfg.experiments as u64)
            .into_par_iter()
            .map(|i| run_with_sampler(cfg, &sampler, i))
            .collect::<Result<Vec<_>>>()
    })?;
    BatchSummary::from_records(cfg.clone(), records)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceRow {
    pub source: MeasurementSource,
    #[serde(rename = "N")]
    pub n_shots: usize,
    pub mean: f64,
    pub std: f64,
    pub standard_error: f64,
}

/// Batch mean fidelity for every `(source, N)` pair.
///
/// Stream `i` draws the same ensemble under every source, so differences
/// between sources come from the measurements alone.
pub fn compare_sources(base: &ExperimentConfig, n_grid: &[usize], sources: &[MeasurementSource]) -> Result<Vec<SourceRow>> {
    let mut rows = Vec::with_capacity(n_grid.len() * sources.len());
    for &source in sources {
        for &n in n_grid {
            let cfg = ExperimentConfig { source, n_shots: n, ..base.clone() };
            let batch = run_batch(&cfg)?;
            rows.push(SourceRow {
                source,
                n_shots: n,
                mean: batch.mean,
                std: batch.std,
                standard_error: batch.standard_error(),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_state_ensemble_is_estimated_perfectly() {
        for kind in [EnsembleKind::PureHaar, EnsembleKind::Ginibre] {
            for n in [1, 3, 7] {
                let cfg = ExperimentConfig::new(2, kind, 1, n, 1).with_seed(5);
                let rec = run_experiment(&cfg, 0).unwrap();
                assert!((rec.average_fidelity - 1.0).abs() < 1e-10, "{kind} {n}: {}", rec.average_fidelity);
                assert_eq!(rec.outcomes.len(), n);
            }
        }
    }

    #[test]
    fn records_are_reproducible() {
        let cfg = ExperimentConfig::new(3, EnsembleKind::Ginibre, 50, 4, 1).with_seed(99);
        let a = run_experiment(&cfg, 3).unwrap();
        let b = run_experiment(&cfg, 3).unwrap();
        assert_eq!(a.outcomes, b.outcomes);
        assert_eq!(a.posterior, b.posterior);
        assert_eq!(a.average_fidelity, b.average_fidelity);
    }

    #[test]
    fn weightings_agree_for_one_measurement() {
        let cfg = ExperimentConfig::new(3, EnsembleKind::MixedRank, 30, 1, 1).with_seed(2);
        let a = run_experiment(&cfg.clone().with_weighting(RiskWeighting::Prior), 0).unwrap();
        let b = run_experiment(&cfg.with_weighting(RiskWeighting::Posterior), 0).unwrap();
        assert!((a.average_fidelity - b.average_fidelity).abs() < 1e-14);
    }

    #[test]
    fn config_validation() {
        let cfg = ExperimentConfig::new(3, EnsembleKind::Ginibre, 10, 1, 1).with_source(MeasurementSource::Pauli);
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
        let cfg = ExperimentConfig::new(2, EnsembleKind::Ginibre, 0, 1, 1);
        assert!(cfg.validate().is_err());
        let cfg = ExperimentConfig::new(2, EnsembleKind::Custom, 3, 1, 1);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn single_record_batch() {
        let cfg = ExperimentConfig::new(2, EnsembleKind::Ginibre, 20, 2, 1).with_seed(1);
        let batch = run_batch(&cfg).unwrap();
        assert_eq!(batch.mean, batch.records[0].average_fidelity);
        assert_eq!(batch.std, 0.0);
        assert_eq!(batch.histogram.total(), 1);
    }

    #[test]
    fn histogram_edges_and_counts() {
        let h = Histogram::uniform(&[0.0, 0.25, 0.5, 1.0], 4).unwrap();
        assert_eq!(h.edges, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(h.counts, vec![1, 1, 1, 1]);
        let h = Histogram::uniform(&[0.3, 0.3], 40).unwrap();
        assert_eq!(h.total(), 2);
        assert!(Histogram::uniform(&[], 4).is_err());
    }

    #[test]
    fn source_names_round_trip() {
        for s in MeasurementSource::ALL {
            assert_eq!(s.name().parse::<MeasurementSource>().unwrap(), s);
            let json = serde_json::to_string(&s).unwrap();
            assert_eq!(json, format!("\"{}\"", s.name()));
        }
    }
}

//! The six subcommands. Each resolves its settings, validates them before
//! touching the filesystem, writes the manifest, then its outputs.

use std::path::Path;
use std::time::Duration;

use bme_core::bounds::{multi_shot_infidelity_bound, single_shot_pure_infidelity};
use bme_core::experiments::{run_batch, BatchSummary, ExperimentConfig, Histogram, MeasurementSource, SourceRow};
use bme_core::pgm::{build_pgm, identity_corpus, naive_vs_bayes, verify_identities, InputState};
use bme_core::sampling::{build_ensemble, EnsembleFile, RngStream};
use bme_core::{Ensemble, EnsembleKind, Tolerances};
use serde_json::json;

use crate::error::CliError;
use crate::output::{fmt_g, round12, Run};
use crate::settings::Settings;
use crate::svg;

/// Identity deviations above this fail `pgm --verify`.
pub const VERIFY_THRESHOLD: f64 = 1e-8;

fn apply_tolerances(s: &Settings) {
    if let Some(t) = s.tolerances {
        Tolerances::set_global(t);
    }
}

fn nonempty(name: &str, v: &[usize]) -> Result<(), CliError> {
    if v.is_empty() {
        return Err(CliError::Usage(format!("{name} list is empty")));
    }
    Ok(())
}

fn single(name: &str, v: &[usize]) -> Result<usize, CliError> {
    match v {
        [x] => Ok(*x),
        _ => Err(CliError::Usage(format!("{name} takes a single value here, got {v:?}"))),
    }
}

fn wall_ms(s: &Settings, t: Duration) -> String {
    if s.timing {
        t.as_millis().to_string()
    } else {
        "0".into()
    }
}

fn batch_config(s: &Settings, d: usize, n: usize, source: MeasurementSource) -> Result<ExperimentConfig, CliError> {
    let cfg = ExperimentConfig {
        d,
        ensemble_size: s.ensemble_size.expect("resolved"),
        n_shots: n,
        experiments: s.experiments.expect("resolved"),
        ensemble: s.ensemble.expect("resolved"),
        source,
        master_seed: s.seed,
        weighting: s.weighting,
        bins: s.bins.expect("resolved"),
        workers: s.workers,
        tolerances: s.tolerances,
    };
    cfg.validate().map_err(|e| CliError::from_core("invalid configuration", e))?;
    Ok(cfg)
}

fn cell_file(d: usize, n: usize) -> String {
    format!("run_d{d}_N{n}.csv")
}

fn summary_entry(batch: &BatchSummary) -> serde_json::Value {
    let c = &batch.config;
    json!({
        "d": c.d,
        "N": c.n_shots,
        "I": c.experiments,
        "mean": round12(batch.mean),
        "std": round12(batch.std),
        "standard_error": round12(batch.standard_error()),
        "min": round12(batch.min()),
        "max": round12(batch.max()),
        "histogram": {
            "edges": batch.histogram.edges.iter().map(|&e| round12(e)).collect::<Vec<_>>(),
            "counts": batch.histogram.counts,
        },
    })
}

pub fn run_haar(mut s: Settings, out: &Path) -> Result<(), CliError> {
    let ds = s.d.get_or_insert_with(|| vec![2]).clone();
    let ns = s.n_shots.get_or_insert_with(|| vec![1]).clone();
    s.ensemble.get_or_insert(EnsembleKind::PureHaar);
    s.ensemble_size.get_or_insert(10_000);
    s.experiments.get_or_insert(100);
    s.bins.get_or_insert(40);
    nonempty("d", &ds)?;
    nonempty("N", &ns)?;
    let mut cells = Vec::new();
    for &d in &ds {
        for &n in &ns {
            cells.push(batch_config(&s, d, n, MeasurementSource::Haar)?);
        }
    }

    let mut outputs: Vec<String> = cells.iter().map(|c| cell_file(c.d, c.n_shots)).collect();
    outputs.extend(["summary.json".into(), "figure.csv".into()]);
    if s.svg {
        outputs.push("figure.svg".into());
    }
    let run = Run::start("run-haar", &s, out, outputs)?;
    apply_tolerances(&s);

    let mut summaries = Vec::new();
    let mut figure = Vec::new();
    for cfg in &cells {
        let batch = run_batch(cfg).map_err(|e| CliError::from_core("experiment failed", e))?;
        let rows: Vec<Vec<String>> = batch
            .records
            .iter()
            .map(|r| {
                vec![r.stream_index.to_string(), fmt_g(r.average_fidelity), r.outcomes.len().to_string(), wall_ms(&s, r.wall_time)]
            })
            .collect();
        run.write_csv(&cell_file(cfg.d, cfg.n_shots), &["stream_index", "avg_fidelity", "n_outcomes", "wall_ms"], &rows)?;
        figure.push(vec![cfg.d.to_string(), cfg.n_shots.to_string(), fmt_g(batch.mean), fmt_g(batch.std)]);
        summaries.push(batch);
    }
    run.write_json(
        "summary.json",
        &json!({
            "version": bme_core::VERSION,
            "config": &s,
            "cells": summaries.iter().map(summary_entry).collect::<Vec<_>>(),
        }),
    )?;
    run.write_csv("figure.csv", &["d", "N", "mean_fidelity", "std"], &figure)?;
    if s.svg {
        let series: Vec<(String, Vec<(f64, f64)>)> = ds
            .iter()
            .map(|&d| {
                let pts = summaries
                    .iter()
                    .filter(|b| b.config.d == d)
                    .map(|b| (b.config.n_shots as f64, b.mean))
                    .collect();
                (format!("d={d}"), pts)
            })
            .collect();
        run.write_text("figure.svg", &svg::line_plot(&series, "N", "average fidelity"))?;
    }
    for b in &summaries {
        println!("d={} N={} mean={} std={}", b.config.d, b.config.n_shots, fmt_g(b.mean), fmt_g(b.std));
    }
    run.finish()
}

pub fn compare_designs(mut s: Settings, out: &Path) -> Result<(), CliError> {
    let d = single("d", s.d.get_or_insert_with(|| vec![2]))?;
    let ns = s.n_shots.get_or_insert_with(|| vec![1, 10, 50, 100]).clone();
    let sources = s.sources.get_or_insert_with(|| MeasurementSource::ALL.to_vec()).clone();
    s.ensemble.get_or_insert(EnsembleKind::Ginibre);
    s.ensemble_size.get_or_insert(10_000);
    s.experiments.get_or_insert(100);
    s.bins.get_or_insert(40);
    nonempty("N", &ns)?;
    if sources.is_empty() {
        return Err(CliError::Usage("source list is empty".into()));
    }
    let mut cells = Vec::new();
    for &source in &sources {
        for &n in &ns {
            cells.push(batch_config(&s, d, n, source)?);
        }
    }

    let mut outputs = vec!["compare.csv".to_string()];
    if s.svg {
        outputs.push("compare.svg".into());
    }
    let run = Run::start("compare-designs", &s, out, outputs)?;
    apply_tolerances(&s);

    // Same master seed for every source: stream i sees the same ensemble.
    let mut rows = Vec::new();
    for cfg in &cells {
        let batch = run_batch(cfg).map_err(|e| CliError::from_core("experiment failed", e))?;
        rows.push(SourceRow {
            source: cfg.source,
            n_shots: cfg.n_shots,
            mean: batch.mean,
            std: batch.std,
            standard_error: batch.standard_error(),
        });
    }
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.source.to_string(), r.n_shots.to_string(), fmt_g(r.mean), fmt_g(r.std)])
        .collect();
    run.write_csv("compare.csv", &["source", "N", "mean", "std"], &table)?;
    if s.svg {
        let series: Vec<(String, Vec<(f64, f64)>)> = sources
            .iter()
            .map(|&src| {
                let pts = rows.iter().filter(|r| r.source == src).map(|r| (r.n_shots as f64, r.mean)).collect();
                (src.to_string(), pts)
            })
            .collect();
        run.write_text("compare.svg", &svg::line_plot(&series, "N", "average fidelity"))?;
    }
    for r in &rows {
        println!("{} N={} mean={} std={}", r.source, r.n_shots, fmt_g(r.mean), fmt_g(r.std));
    }
    run.finish()
}

fn load_ensemble(path: &Path) -> Result<Ensemble, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read ensemble {}: {e}", path.display())))?;
    let file = EnsembleFile::from_json(&text).map_err(|e| CliError::Usage(format!("ensemble {}: {e}", path.display())))?;
    file.to_ensemble().map_err(|e| CliError::Usage(format!("ensemble {}: {e}", path.display())))
}

pub fn pgm(mut s: Settings, out: &Path, verify: bool) -> Result<(), CliError> {
    if verify {
        return pgm_verify(s, out);
    }
    let trials = *s.trials.get_or_insert(1000);
    if trials == 0 {
        return Err(CliError::Usage("trials must be positive".into()));
    }
    let mut rng = RngStream::new(s.seed, s.stream);
    let ensemble = match &s.ensemble_file {
        Some(path) => load_ensemble(path)?,
        None => {
            let d = single("d", s.d.get_or_insert_with(|| vec![2]))?;
            let kind = *s.ensemble.get_or_insert(EnsembleKind::Ginibre);
            let len = *s.ensemble_size.get_or_insert(1000);
            if kind == EnsembleKind::Custom {
                return Err(CliError::Usage("custom ensembles must come from --ensemble-file".into()));
            }
            build_ensemble(kind, d, len, &mut rng).map_err(|e| CliError::from_core("cannot build ensemble", e))?
        }
    };
    let input = match s.rho0 {
        Some(i) if i >= ensemble.len() => {
            return Err(CliError::Usage(format!("rho0 index {i} out of range for {} states", ensemble.len())))
        }
        Some(i) => InputState::Fixed(ensemble.state(i).clone()),
        None => InputState::FromEnsemble,
    };

    let mut outputs = vec!["scatter.csv".to_string(), "pgm_summary.json".into()];
    if s.svg {
        outputs.push("scatter.svg".into());
    }
    let run = Run::start("pgm", &s, out, outputs)?;
    apply_tolerances(&s);

    let pgm = build_pgm(&ensemble).map_err(|e| CliError::from_core("cannot build measurement", e))?;
    let points = naive_vs_bayes(&pgm, &input, &mut rng, trials).map_err(|e| CliError::from_core("trial failed", e))?;
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| vec![p.trial.to_string(), p.outcome.to_string(), fmt_g(p.f_naive), fmt_g(p.f_bayes)])
        .collect();
    run.write_csv("scatter.csv", &["trial", "outcome", "f_naive", "f_bayes"], &rows)?;
    let n = points.len() as f64;
    let naive = points.iter().map(|p| p.f_naive).sum::<f64>() / n;
    let bayes = points.iter().map(|p| p.f_bayes).sum::<f64>() / n;
    run.write_json(
        "pgm_summary.json",
        &json!({
            "version": bme_core::VERSION,
            "d": ensemble.dim(),
            "L": ensemble.len(),
            "trials": trials,
            "mean_f_naive": round12(naive),
            "mean_f_bayes": round12(bayes),
            "margin": round12(bayes - naive),
            "support_rank": pgm.support_rank(),
        }),
    )?;
    if s.svg {
        let pts: Vec<(f64, f64)> = points.iter().map(|p| (p.f_naive, p.f_bayes)).collect();
        run.write_text("scatter.svg", &svg::scatter_plot(&pts, "F(rho0, rho_x)", "F(rho0, Bayes estimate)"))?;
    }
    println!("mean F naive={} bayes={} margin={}", fmt_g(naive), fmt_g(bayes), fmt_g(bayes - naive));
    run.finish()
}

fn pgm_verify(mut s: Settings, out: &Path) -> Result<(), CliError> {
    let count = *s.corpus.get_or_insert(100);
    if count == 0 {
        return Err(CliError::Usage("corpus must be positive".into()));
    }
    let run = Run::start("pgm", &s, out, vec!["verify.json".into()])?;
    apply_tolerances(&s);
    let corpus: Vec<Ensemble> = identity_corpus(s.seed, count).map_err(|e| CliError::from_core("cannot build corpus", e))?;
    let report = verify_identities(&corpus).map_err(|e| CliError::from_core("verification failed", e))?;
    run.write_json(
        "verify.json",
        &json!({
            "version": bme_core::VERSION,
            "ensembles": report.ensembles,
            "posterior_deviation": report.posterior,
            "marginal_deviation": report.marginal,
            "petz_deviation": report.petz,
            "completeness_defect": report.completeness,
            "residual_weight": report.residual_weight,
            "worst": report.worst(),
            "threshold": VERIFY_THRESHOLD,
        }),
    )?;
    println!(
        "{} ensembles: posterior {} marginal {} petz {} completeness {}",
        report.ensembles,
        fmt_g(report.posterior),
        fmt_g(report.marginal),
        fmt_g(report.petz),
        fmt_g(report.completeness)
    );
    run.finish()?;
    if report.worst() > VERIFY_THRESHOLD {
        return Err(CliError::Verification(format!(
            "identity deviation {} exceeds {}",
            fmt_g(report.worst()),
            fmt_g(VERIFY_THRESHOLD)
        )));
    }
    Ok(())
}

pub fn bounds(mut s: Settings, out: &Path) -> Result<(), CliError> {
    let ds = s.d.get_or_insert_with(|| vec![2]).clone();
    let ns = s.n_shots.get_or_insert_with(|| vec![1]).clone();
    nonempty("d", &ds)?;
    nonempty("N", &ns)?;
    let mut rows = Vec::new();
    for &d in &ds {
        let single = single_shot_pure_infidelity(d).map_err(|e| CliError::from_core("bounds", e))?;
        for &n in &ns {
            let bound = multi_shot_infidelity_bound(d, n).map_err(|e| CliError::from_core("bounds", e))?;
            rows.push(vec![d.to_string(), n.to_string(), fmt_g(bound), fmt_g(single)]);
        }
    }
    let run = Run::start("bounds", &s, out, vec!["bounds.csv".into()])?;
    let header = ["d", "N", "multi_shot_infidelity_bound", "single_shot_pure_infidelity"];
    run.write_csv("bounds.csv", &header, &rows)?;
    println!("{:>4} {:>6} {:>16} {:>16}", "d", "N", "bound", "single-shot");
    for r in &rows {
        println!("{:>4} {:>6} {:>16} {:>16}", r[0], r[1], r[2], r[3]);
    }
    run.finish()
}

fn read_fidelity_column(path: &Path) -> Result<Vec<f64>, CliError> {
    let usage = |msg: String| CliError::Usage(format!("{}: {msg}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| usage(e.to_string()))?;
    let headers = reader.headers().map_err(|e| usage(e.to_string()))?.clone();
    let col = headers
        .iter()
        .position(|h| h == "avg_fidelity")
        .ok_or_else(|| usage("no avg_fidelity column".into()))?;
    let mut values = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| usage(e.to_string()))?;
        let field = record.get(col).ok_or_else(|| usage(format!("row {} is short", line + 1)))?;
        values.push(field.trim().parse::<f64>().map_err(|_| usage(format!("row {}: '{field}' is not a number", line + 1)))?);
    }
    if values.is_empty() {
        return Err(usage("no data rows".into()));
    }
    Ok(values)
}

pub fn histogram(mut s: Settings, out: &Path) -> Result<(), CliError> {
    let input = s.input.clone().ok_or_else(|| CliError::Usage("histogram needs an input CSV".into()))?;
    let bins = *s.bins.get_or_insert(40);
    let values = read_fidelity_column(&input)?;
    let hist = Histogram::uniform(&values, bins).map_err(|e| CliError::from_core("histogram", e))?;
    let run = Run::start("histogram", &s, out, vec!["histogram.csv".into()])?;
    let rows: Vec<Vec<String>> = hist
        .counts
        .iter()
        .enumerate()
        .map(|(k, c)| vec![fmt_g(hist.edges[k]), fmt_g(hist.edges[k + 1]), c.to_string()])
        .collect();
    run.write_csv("histogram.csv", &["bin_lo", "bin_hi", "count"], &rows)?;
    println!("{} values in {bins} bins", hist.total());
    run.finish()
}

pub fn gen_ensemble(mut s: Settings, out: &Path) -> Result<(), CliError> {
    let d = single("d", s.d.get_or_insert_with(|| vec![2]))?;
    let kind = *s.ensemble.get_or_insert(EnsembleKind::PureHaar);
    let len = *s.ensemble_size.get_or_insert(1000);
    if kind == EnsembleKind::Custom {
        return Err(CliError::Usage("custom ensembles cannot be sampled".into()));
    }
    if d == 0 || len == 0 {
        return Err(CliError::Usage("d and L must be positive".into()));
    }
    let run = Run::start("gen-ensemble", &s, out, vec!["ensemble.json".into()])?;
    let mut rng = RngStream::new(s.seed, s.stream);
    let ensemble: Ensemble = build_ensemble(kind, d, len, &mut rng).map_err(|e| CliError::from_core("cannot build ensemble", e))?;
    let text = EnsembleFile::from_ensemble(&ensemble, Some(s.seed))
        .to_json()
        .map_err(|e| CliError::from_core("cannot serialize ensemble", e))?;
    run.write_text("ensemble.json", &(text + "\n"))?;
    println!("wrote {} {kind} states of dimension {d} to {}", len, run.path("ensemble.json").display());
    run.finish()
}

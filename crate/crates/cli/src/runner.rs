//! Experiment orchestration: expand the configured scenario matrix into
//! jobs, run them on a bounded worker pool, and emit reports, summary
//! tables, and the run manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use rayon::prelude::*;

use loadcast_core::features::{FeatureKind, RawSources};
use loadcast_core::ingest::{file_digest, parse_daily_csv, parse_hourly_csv, SourceKind, SourceSpec};
use loadcast_core::neural::Architecture;
use loadcast_core::scenarios::{
    run_scenario, ScenarioConfig, ScenarioKind, ScenarioReport,
};

use crate::config::RunConfig;
use crate::manifest::{RunManifest, MANIFEST_SCHEMA_VERSION};

/// One (scenario × feature set × architecture × seed) combination.
#[derive(Debug, Clone)]
pub struct Job {
    pub kind: ScenarioKind,
    pub features: Vec<FeatureKind>,
    pub architecture: Architecture,
    pub seed: u64,
}

impl Job {
    /// Stable file stem for this job's outputs.
    pub fn stem(&self) -> String {
        let features = match self.kind {
            ScenarioKind::Rolling => {
                let names: Vec<&str> = self.features.iter().map(|f| f.name()).collect();
                format!("_{}", names.join("+"))
            }
            _ => String::new(),
        };
        format!("{}{features}_{}_seed{}", self.kind, self.architecture, self.seed)
    }

    fn scenario_config(&self, cfg: &RunConfig) -> ScenarioConfig {
        let mut train = cfg.train.clone();
        train.seed = self.seed;
        ScenarioConfig {
            kind: self.kind,
            features: self.features.clone(),
            split: cfg.split.clone(),
            train,
            architecture: self.architecture,
        }
    }
}

/// Benchmark and weekend runs use the weather feature set; rolling runs fan
/// out one job per configured feature.
pub fn enumerate_jobs(cfg: &RunConfig) -> Vec<Job> {
    let mut jobs = Vec::new();
    for &kind in &cfg.scenario.kinds {
        let feature_sets: Vec<Vec<FeatureKind>> = match kind {
            ScenarioKind::Rolling => cfg.scenario.features.iter().map(|&f| vec![f]).collect(),
            _ => vec![vec![FeatureKind::Weather]],
        };
        for features in feature_sets {
            for &architecture in &cfg.scenario.architectures {
                for &seed in &cfg.scenario.seeds {
                    jobs.push(Job {
                        kind,
                        features: features.clone(),
                        architecture,
                        seed,
                    });
                }
            }
        }
    }
    jobs
}

pub struct RunOutcome {
    pub report_paths: Vec<PathBuf>,
    pub manifest_path: PathBuf,
    /// Job stem → error message for every job that did not complete.
    pub failures: Vec<(String, String)>,
}

pub fn load_sources(cfg: &RunConfig) -> Result<(RawSources, BTreeMap<String, String>)> {
    let mut digests = BTreeMap::new();
    let mut digest_of = |path: &Path| -> Result<()> {
        digests.insert(path.display().to_string(), file_digest(path)?);
        Ok(())
    };

    let load_spec = SourceSpec::new(SourceKind::Load, &cfg.data.load);
    let load = parse_hourly_csv(&load_spec)?.remove(0);
    digest_of(&cfg.data.load)?;

    let weather_spec = SourceSpec::new(SourceKind::Weather, &cfg.data.weather);
    let weather = parse_hourly_csv(&weather_spec)?;
    digest_of(&cfg.data.weather)?;

    let covid = match &cfg.data.covid {
        Some(path) => {
            digest_of(path)?;
            parse_daily_csv(&SourceSpec::new(SourceKind::Covid, path))?
        }
        None => Vec::new(),
    };
    let mobility = match &cfg.data.mobility {
        Some(path) => {
            digest_of(path)?;
            parse_daily_csv(&SourceSpec::new(SourceKind::Mobility, path))?
        }
        None => Vec::new(),
    };

    Ok((
        RawSources {
            load,
            weather,
            covid,
            mobility,
        },
        digests,
    ))
}

/// Run every configured job and write reports, `summary.csv`, `summary.txt`,
/// and `manifest.json` under `out_dir`.
pub fn execute(cfg: &RunConfig, out_dir: &Path, verbose: bool) -> Result<RunOutcome> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;

    let mut stages_ms = BTreeMap::new();
    let t0 = Instant::now();
    let (sources, data_digests) = load_sources(cfg)?;
    stages_ms.insert("parse_inputs".to_string(), t0.elapsed().as_millis());

    let jobs = enumerate_jobs(cfg);
    if verbose {
        eprintln!("running {} scenario job(s) on {} worker(s)", jobs.len(), cfg.run.workers);
    }

    let t1 = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.run.workers)
        .build()
        .context("building worker pool")?;
    let results: Vec<Result<ScenarioReport, String>> = pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                run_scenario(&job.scenario_config(cfg), &sources).map_err(|e| e.to_string())
            })
            .collect()
    });
    stages_ms.insert("scenario_runs".to_string(), t1.elapsed().as_millis());

    let t2 = Instant::now();
    let mut outputs = BTreeMap::new();
    let mut report_paths = Vec::new();
    let mut failures = Vec::new();
    let mut completed: Vec<(&Job, ScenarioReport)> = Vec::new();
    for (job, result) in jobs.iter().zip(results) {
        match result {
            Ok(report) => {
                let stem = job.stem();
                let report_path = out_dir.join(format!("{stem}.report.json"));
                report.save(&report_path)?;
                let csv_path = out_dir.join(format!("{stem}.daily_mape.csv"));
                report.write_daily_csv(&csv_path)?;
                for path in [&report_path, &csv_path] {
                    outputs.insert(
                        path.file_name().unwrap().to_string_lossy().into_owned(),
                        file_digest(path)?,
                    );
                }
                if verbose {
                    eprintln!("{stem}: overall MAPE {:.3}%", report.overall_mape_pct);
                }
                report_paths.push(report_path);
                completed.push((job, report));
            }
            Err(message) => failures.push((job.stem(), message)),
        }
    }

    let summary_csv = out_dir.join("summary.csv");
    write_summary_csv(&summary_csv, &completed)?;
    outputs.insert("summary.csv".to_string(), file_digest(&summary_csv)?);
    let summary_txt = out_dir.join("summary.txt");
    std::fs::write(&summary_txt, render_summary_text(&completed))
        .with_context(|| format!("writing {}", summary_txt.display()))?;
    outputs.insert("summary.txt".to_string(), file_digest(&summary_txt)?);
    stages_ms.insert("write_outputs".to_string(), t2.elapsed().as_millis());

    let manifest = RunManifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        data_digests,
        seeds: cfg.scenario.seeds.clone(),
        stages_ms,
        outputs,
    };
    let manifest_path = out_dir.join("manifest.json");
    manifest.save(&manifest_path)?;

    Ok(RunOutcome {
        report_paths,
        manifest_path,
        failures,
    })
}

fn write_summary_csv(path: &Path, completed: &[(&Job, ScenarioReport)]) -> Result<()> {
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
    );
    writeln!(out, "kind,features,architecture,seed,overall_mape_pct")?;
    for (job, report) in completed {
        let features: Vec<&str> = job.features.iter().map(|f| f.name()).collect();
        writeln!(
            out,
            "{},{},{},{},{}",
            job.kind,
            features.join("+"),
            job.architecture,
            job.seed,
            report.overall_mape_pct
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Seed statistics for one table cell.
#[derive(Debug, Default, Clone)]
struct CellStats {
    values: Vec<f64>,
}

impl CellStats {
    fn render(&self) -> String {
        if self.values.is_empty() {
            return "-".to_string();
        }
        let mean = self.values.iter().sum::<f64>() / self.values.len() as f64;
        if self.values.len() == 1 {
            return format!("{mean:.2}");
        }
        let min = self.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        format!("{mean:.2} [{min:.2}..{max:.2}]")
    }
}

/// Human-readable tables: scenarios × architectures, and for rolling runs
/// architectures × feature sets.
pub fn render_summary_text(completed: &[(&Job, ScenarioReport)]) -> String {
    let architectures: Vec<Architecture> = {
        let mut seen = Vec::new();
        for (job, _) in completed {
            if !seen.contains(&job.architecture) {
                seen.push(job.architecture);
            }
        }
        seen
    };

    let mut text = String::from("overall MAPE (%), mean over seeds [min..max]\n");

    // Benchmark/weekend block: one row per scenario kind.
    let single: Vec<&(&Job, ScenarioReport)> = completed
        .iter()
        .filter(|(j, _)| j.kind != ScenarioKind::Rolling)
        .collect();
    if !single.is_empty() {
        let mut rows: Vec<(String, Vec<CellStats>)> = Vec::new();
        for (job, report) in &single {
            let row_label = job.kind.to_string();
            let row = match rows.iter_mut().find(|(l, _)| *l == row_label) {
                Some((_, row)) => row,
                None => {
                    rows.push((row_label, vec![CellStats::default(); architectures.len()]));
                    &mut rows.last_mut().expect("just pushed").1
                }
            };
            let col = architectures.iter().position(|a| *a == job.architecture).expect("known");
            row[col].values.push(report.overall_mape_pct);
        }
        text.push('\n');
        text.push_str(&render_table("scenario", &architectures, &rows));
    }

    // Rolling block: one row per architecture, one column per feature set.
    let rolling: Vec<&(&Job, ScenarioReport)> = completed
        .iter()
        .filter(|(j, _)| j.kind == ScenarioKind::Rolling)
        .collect();
    if !rolling.is_empty() {
        let mut feature_cols: Vec<String> = Vec::new();
        for (job, _) in &rolling {
            let label: Vec<&str> = job.features.iter().map(|f| f.name()).collect();
            let label = label.join("+");
            if !feature_cols.contains(&label) {
                feature_cols.push(label);
            }
        }
        let mut rows: Vec<(String, Vec<CellStats>)> = architectures
            .iter()
            .map(|a| (a.to_string(), vec![CellStats::default(); feature_cols.len()]))
            .collect();
        for (job, report) in &rolling {
            let label: Vec<&str> = job.features.iter().map(|f| f.name()).collect();
            let label = label.join("+");
            let col = feature_cols.iter().position(|c| *c == label).expect("known");
            let row = rows
                .iter_mut()
                .find(|(l, _)| *l == job.architecture.to_string())
                .expect("known");
            row.1[col].values.push(report.overall_mape_pct);
        }
        text.push_str("\nrolling, by auxiliary feature\n");
        let cols: Vec<String> = feature_cols;
        text.push_str(&render_table_with_labels("architecture", &cols, &rows));
    }

    text
}

fn render_table(
    corner: &str,
    architectures: &[Architecture],
    rows: &[(String, Vec<CellStats>)],
) -> String {
    let cols: Vec<String> = architectures.iter().map(|a| a.to_string()).collect();
    render_table_with_labels(corner, &cols, rows)
}

fn render_table_with_labels(
    corner: &str,
    cols: &[String],
    rows: &[(String, Vec<CellStats>)],
) -> String {
    let rendered: Vec<(String, Vec<String>)> = rows
        .iter()
        .map(|(label, cells)| (label.clone(), cells.iter().map(CellStats::render).collect()))
        .collect();
    let mut widths: Vec<usize> = Vec::with_capacity(cols.len() + 1);
    widths.push(
        rendered
            .iter()
            .map(|(l, _)| l.len())
            .chain([corner.len()])
            .max()
            .unwrap_or(0),
    );
    for (i, col) in cols.iter().enumerate() {
        let w = rendered
            .iter()
            .map(|(_, cells)| cells[i].len())
            .chain([col.len()])
            .max()
            .unwrap_or(0);
        widths.push(w);
    }

    let mut out = String::new();
    let _ = write!(out, "{corner:<width$}", width = widths[0]);
    for (i, col) in cols.iter().enumerate() {
        let _ = write!(out, "  {col:>width$}", width = widths[i + 1]);
    }
    out.push('\n');
    for (label, cells) in &rendered {
        let _ = write!(out, "{label:<width$}", width = widths[0]);
        for (i, cell) in cells.iter().enumerate() {
            let _ = write!(out, "  {cell:>width$}", width = widths[i + 1]);
        }
        out.push('\n');
    }
    out
}

//! `loadcast` — synthetic data generation, scenario runs, data validation,
//! and report plotting for day-ahead load forecasting experiments.

mod config;
mod manifest;
mod runner;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{ArgAction, Parser, Subcommand};

use loadcast_core::ingest::{
    generate_synthetic, parse_daily_csv, parse_hourly_csv, write_bundle, SourceKind, SourceSpec,
};
use loadcast_core::plot::render_daily_mape_svg;
use loadcast_core::scenarios::ScenarioReport;

use config::{RunConfig, SynthFileConfig, OUT_DIR_ENV};
use manifest::RunManifest;

#[derive(Parser)]
#[command(
    name = "loadcast",
    version,
    about = "Day-ahead load forecasting experiments around a demand regime shift"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Print per-job progress to stderr.
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic data set (four CSVs plus manifest.json).
    Synth {
        /// TOML file with a `[synth]` section.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (default: config, then $LOADCAST_OUT_DIR, then ./out).
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Override the configured seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the configured scenario matrix and write reports and summaries.
    Run {
        /// TOML run configuration.
        #[arg(long, required_unless_present = "from_manifest", conflicts_with = "from_manifest")]
        config: Option<PathBuf>,
        /// Re-run the resolved configuration stored in a previous manifest.
        #[arg(long)]
        from_manifest: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Override the configured seed list with a single seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Render daily-MAPE curves from one or more reports into an SVG.
    Plot {
        /// Output SVG path.
        #[arg(long)]
        out: PathBuf,
        /// Report files (one polyline each).
        #[arg(required = true)]
        reports: Vec<PathBuf>,
    },
    /// Schema and gap checks for data files; no forecasting.
    ValidateData {
        #[arg(long)]
        load: Option<PathBuf>,
        #[arg(long)]
        weather: Option<PathBuf>,
        #[arg(long)]
        covid: Option<PathBuf>,
        #[arg(long)]
        mobility: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let verbose = cli.verbose > 0;
    match dispatch(cli.command, verbose) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let summary = serde_json::json!({
                "status": "error",
                "errors": err.chain().map(|c| c.to_string()).collect::<Vec<_>>(),
            });
            eprintln!("{summary}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command, verbose: bool) -> Result<()> {
    match command {
        Command::Synth {
            config,
            out_dir,
            seed,
        } => cmd_synth(&config, out_dir.as_deref(), seed, verbose),
        Command::Run {
            config,
            from_manifest,
            out_dir,
            seed,
        } => cmd_run(config.as_deref(), from_manifest.as_deref(), out_dir.as_deref(), seed, verbose),
        Command::Plot { out, reports } => cmd_plot(&out, &reports),
        Command::ValidateData {
            load,
            weather,
            covid,
            mobility,
        } => cmd_validate(load, weather, covid, mobility),
    }
}

fn default_out_dir(flag: Option<&Path>) -> PathBuf {
    if let Some(dir) = flag {
        return dir.to_path_buf();
    }
    match std::env::var(OUT_DIR_ENV) {
        Ok(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => PathBuf::from("out"),
    }
}

fn cmd_synth(config: &Path, out_dir: Option<&Path>, seed: Option<u64>, verbose: bool) -> Result<()> {
    let mut cfg = SynthFileConfig::load(config)?;
    if let Some(seed) = seed {
        cfg.synth.seed = seed;
    }
    let dir = default_out_dir(out_dir);
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let bundle = generate_synthetic(&cfg.synth)?;
    let manifest = write_bundle(&bundle, &dir)?;
    if verbose {
        eprintln!(
            "wrote {} synthetic days (shift at day {}) to {}",
            cfg.synth.n_days,
            cfg.synth.shift_day,
            dir.display()
        );
    }
    println!("{}", dir.join("manifest.json").display());
    let _ = manifest;
    Ok(())
}

fn cmd_run(
    config: Option<&Path>,
    from_manifest: Option<&Path>,
    out_dir: Option<&Path>,
    seed: Option<u64>,
    verbose: bool,
) -> Result<()> {
    let mut cfg: RunConfig = match (config, from_manifest) {
        (Some(path), None) => RunConfig::load(path)?,
        (None, Some(path)) => RunManifest::load(path)?.config,
        _ => unreachable!("clap enforces exactly one source"),
    };
    if let Some(seed) = seed {
        cfg.scenario.seeds = vec![seed];
    }
    cfg.validate()?;

    let dir = cfg.resolve_out_dir(out_dir);
    let outcome = runner::execute(&cfg, &dir, verbose)?;
    println!("{}", outcome.manifest_path.display());
    if !outcome.failures.is_empty() {
        let summary = serde_json::json!({
            "status": "error",
            "failed_jobs": outcome
                .failures
                .iter()
                .map(|(stem, message)| serde_json::json!({ "job": stem, "error": message }))
                .collect::<Vec<_>>(),
            "completed": outcome.report_paths.len(),
        });
        anyhow::bail!("{summary}");
    }
    Ok(())
}

fn cmd_plot(out: &Path, report_paths: &[PathBuf]) -> Result<()> {
    let reports = report_paths
        .iter()
        .map(|p| ScenarioReport::load(p).with_context(|| format!("loading {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&ScenarioReport> = reports.iter().collect();
    let svg = render_daily_mape_svg(&refs)?;
    std::fs::write(out, svg).with_context(|| format!("writing {}", out.display()))?;
    println!("{}", out.display());
    Ok(())
}

fn cmd_validate(
    load: Option<PathBuf>,
    weather: Option<PathBuf>,
    covid: Option<PathBuf>,
    mobility: Option<PathBuf>,
) -> Result<()> {
    let mut checked = 0;
    let mut problems = Vec::new();
    let mut check_hourly = |kind: SourceKind, path: Option<PathBuf>| {
        if let Some(path) = path {
            checked += 1;
            match parse_hourly_csv(&SourceSpec::new(kind, &path)) {
                Ok(series) => println!(
                    "{}: ok ({} columns x {} hours)",
                    path.display(),
                    series.len(),
                    series.first().map_or(0, |s| s.len())
                ),
                Err(e) => problems.push(e.to_string()),
            }
        }
    };
    check_hourly(SourceKind::Load, load);
    check_hourly(SourceKind::Weather, weather);
    let mut check_daily = |kind: SourceKind, path: Option<PathBuf>| {
        if let Some(path) = path {
            checked += 1;
            match parse_daily_csv(&SourceSpec::new(kind, &path)) {
                Ok(series) => println!(
                    "{}: ok ({} columns x {} days)",
                    path.display(),
                    series.len(),
                    series.first().map_or(0, |s| s.len())
                ),
                Err(e) => problems.push(e.to_string()),
            }
        }
    };
    check_daily(SourceKind::Covid, covid);
    check_daily(SourceKind::Mobility, mobility);

    if checked == 0 {
        anyhow::bail!("no files given; pass --load/--weather/--covid/--mobility");
    }
    if !problems.is_empty() {
        for p in &problems {
            eprintln!("{p}");
        }
        anyhow::bail!("{} of {checked} file(s) failed validation", problems.len());
    }
    Ok(())
}

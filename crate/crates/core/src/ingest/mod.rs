//! CSV ingestion for the four source formats, plus the synthetic generator.
//!
//! All files are UTF-8, comma-separated, `.` decimal point, with a required
//! header row:
//!
//! - `load.csv`     — `timestamp,load_mw` (`YYYY-MM-DDTHH:00`)
//! - `weather.csv`  — `timestamp,air_temp_c,dew_point_c,wind_speed_ms,rel_humidity_pct`
//! - `covid.csv`    — `date,new_cases,new_deaths` (`YYYY-MM-DD`)
//! - `mobility.csv` — `date,workplaces_pct_change,residential_pct_change`
//!
//! Hourly files may have short gaps (missing rows or empty fields): up to 3
//! consecutive missing hours are filled by linear interpolation, longer gaps
//! are rejected, and the first and last rows must be present so interpolation
//! never extrapolates. A row repeating the previous wall-clock hour (the DST
//! fall-back artifact in raw market data) is dropped. Daily files must be
//! contiguous.

mod synthetic;

pub use synthetic::{
    file_digest, generate_synthetic, write_bundle, SynthConfig, SynthManifest, SyntheticBundle,
};

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::series::{Date, DailySeries, HourlySeries, SeriesError, Timestamp};

/// Which of the four source schemas a file follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Load,
    Weather,
    Covid,
    Mobility,
}

impl SourceKind {
    pub fn header(self) -> &'static [&'static str] {
        match self {
            SourceKind::Load => &["timestamp", "load_mw"],
            SourceKind::Weather => &[
                "timestamp",
                "air_temp_c",
                "dew_point_c",
                "wind_speed_ms",
                "rel_humidity_pct",
            ],
            SourceKind::Covid => &["date", "new_cases", "new_deaths"],
            SourceKind::Mobility => &["date", "workplaces_pct_change", "residential_pct_change"],
        }
    }

    pub fn is_hourly(self) -> bool {
        matches!(self, SourceKind::Load | SourceKind::Weather)
    }

    /// COVID case/death counts cannot be negative; mobility percentages can.
    fn forbids_negative(self) -> bool {
        matches!(self, SourceKind::Covid)
    }

    pub fn file_name(self) -> &'static str {
        match self {
            SourceKind::Load => "load.csv",
            SourceKind::Weather => "weather.csv",
            SourceKind::Covid => "covid.csv",
            SourceKind::Mobility => "mobility.csv",
        }
    }
}

/// A source file together with its expected schema.
#[derive(Debug, Clone)]
pub struct SourceSpec {
    pub kind: SourceKind,
    pub path: PathBuf,
}

impl SourceSpec {
    pub fn new(kind: SourceKind, path: impl Into<PathBuf>) -> Self {
        SourceSpec {
            kind,
            path: path.into(),
        }
    }
}

/// Longest run of consecutive missing hours that interpolation will bridge.
pub const MAX_GAP_HOURS: usize = 3;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        source: csv::Error,
    },
    #[error("{path}: expected header {expected:?}, found {found:?}")]
    Header {
        path: PathBuf,
        expected: String,
        found: String,
    },
    #[error("{path}:{line}: {message}")]
    MalformedRow {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{path}:{line}: timestamps not increasing ({prev} then {next})")]
    NonMonotone {
        path: PathBuf,
        line: u64,
        prev: String,
        next: String,
    },
    #[error(
        "{path}: column {column:?} has a {hours}h gap over [{from}, {to}] \
         (at most {MAX_GAP_HOURS}h is interpolated)"
    )]
    GapTooLong {
        path: PathBuf,
        column: String,
        hours: usize,
        from: Timestamp,
        to: Timestamp,
    },
    #[error("{path}: column {column:?} is missing its {which} value; interpolation never extrapolates")]
    MissingEdge {
        path: PathBuf,
        column: String,
        which: &'static str,
    },
    #[error("{path}: missing day {missing}; daily files must be contiguous")]
    MissingDay { path: PathBuf, missing: Date },
    #[error("{path}:{line}: negative count {value} in column {column:?}")]
    NegativeCount {
        path: PathBuf,
        line: u64,
        column: String,
        value: f64,
    },
    #[error("{path}: file has no data rows")]
    Empty { path: PathBuf },
    #[error("source {path} is {actual:?} data, expected {expected}")]
    WrongKind {
        path: PathBuf,
        actual: SourceKind,
        expected: &'static str,
    },
    #[error("invalid synthetic config: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Parse an hourly file (load or weather) into one series per value column.
pub fn parse_hourly_csv(spec: &SourceSpec) -> Result<Vec<HourlySeries>, IngestError> {
    if !spec.kind.is_hourly() {
        return Err(IngestError::WrongKind {
            path: spec.path.clone(),
            actual: spec.kind,
            expected: "hourly (load or weather)",
        });
    }
    let mut reader = open_checked(spec)?;
    let columns: Vec<String> = spec.kind.header()[1..].iter().map(|s| s.to_string()).collect();

    let mut start: Option<Timestamp> = None;
    let mut prev: Option<Timestamp> = None;
    let mut grid: Vec<Vec<Option<f64>>> = vec![Vec::new(); columns.len()];

    let mut record = csv::StringRecord::new();
    while reader
        .read_record(&mut record)
        .map_err(|source| IngestError::Csv {
            path: spec.path.clone(),
            source,
        })?
    {
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != columns.len() + 1 {
            return Err(malformed(
                spec,
                line,
                format!("expected {} fields, found {}", columns.len() + 1, record.len()),
            ));
        }
        let ts: Timestamp = record[0]
            .parse()
            .map_err(|e: SeriesError| malformed(spec, line, e.to_string()))?;

        if let Some(p) = prev {
            if ts == p {
                // Repeated wall-clock hour (DST fall-back): keep the first row.
                continue;
            }
            if ts < p {
                return Err(IngestError::NonMonotone {
                    path: spec.path.clone(),
                    line,
                    prev: p.to_string(),
                    next: ts.to_string(),
                });
            }
            let missing = ts.hours_since(p) - 1;
            for col in &mut grid {
                for _ in 0..missing {
                    col.push(None);
                }
            }
        } else {
            start = Some(ts);
        }
        prev = Some(ts);

        for (i, col) in grid.iter_mut().enumerate() {
            let field = &record[i + 1];
            if field.is_empty() {
                col.push(None);
            } else {
                col.push(Some(parse_value(spec, line, &columns[i], field)?));
            }
        }
    }

    let start = start.ok_or_else(|| IngestError::Empty {
        path: spec.path.clone(),
    })?;

    columns
        .iter()
        .zip(grid)
        .map(|(name, col)| {
            let filled = fill_gaps(spec, name, start, col)?;
            HourlySeries::new(name.clone(), start, filled).map_err(IngestError::from)
        })
        .collect()
}

/// Parse a daily file (covid or mobility) into one series per value column.
pub fn parse_daily_csv(spec: &SourceSpec) -> Result<Vec<DailySeries>, IngestError> {
    if spec.kind.is_hourly() {
        return Err(IngestError::WrongKind {
            path: spec.path.clone(),
            actual: spec.kind,
            expected: "daily (covid or mobility)",
        });
    }
    let mut reader = open_checked(spec)?;
    let columns: Vec<String> = spec.kind.header()[1..].iter().map(|s| s.to_string()).collect();

    let mut start: Option<Date> = None;
    let mut prev: Option<Date> = None;
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); columns.len()];

    let mut record = csv::StringRecord::new();
    while reader
        .read_record(&mut record)
        .map_err(|source| IngestError::Csv {
            path: spec.path.clone(),
            source,
        })?
    {
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != columns.len() + 1 {
            return Err(malformed(
                spec,
                line,
                format!("expected {} fields, found {}", columns.len() + 1, record.len()),
            ));
        }
        let date: Date = record[0]
            .parse()
            .map_err(|e: SeriesError| malformed(spec, line, e.to_string()))?;

        if let Some(p) = prev {
            if date <= p {
                return Err(IngestError::NonMonotone {
                    path: spec.path.clone(),
                    line,
                    prev: p.to_string(),
                    next: date.to_string(),
                });
            }
            if date.days_since(p) > 1 {
                return Err(IngestError::MissingDay {
                    path: spec.path.clone(),
                    missing: p.add_days(1),
                });
            }
        } else {
            start = Some(date);
        }
        prev = Some(date);

        for (i, col) in values.iter_mut().enumerate() {
            let v = parse_value(spec, line, &columns[i], &record[i + 1])?;
            if spec.kind.forbids_negative() && v < 0.0 {
                return Err(IngestError::NegativeCount {
                    path: spec.path.clone(),
                    line,
                    column: columns[i].clone(),
                    value: v,
                });
            }
            col.push(v);
        }
    }

    let start = start.ok_or_else(|| IngestError::Empty {
        path: spec.path.clone(),
    })?;

    columns
        .iter()
        .zip(values)
        .map(|(name, col)| DailySeries::new(name.clone(), start, col).map_err(IngestError::from))
        .collect()
}

/// Write hourly channels back out in the schema of `kind`. Channel order must
/// match the schema's value columns; all channels must share the same range.
pub fn write_hourly_csv(
    kind: SourceKind,
    path: &Path,
    channels: &[&HourlySeries],
) -> Result<(), IngestError> {
    assert!(kind.is_hourly(), "write_hourly_csv needs an hourly kind");
    let header = kind.header();
    assert_eq!(channels.len(), header.len() - 1, "channel count vs schema");
    let first = channels[0];
    assert!(
        channels.iter().all(|c| c.start() == first.start() && c.len() == first.len()),
        "channels must share one range"
    );

    let mut out = writer(path)?;
    let io = |source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    };
    writeln!(out, "{}", header.join(",")).map_err(io)?;
    for i in 0..first.len() {
        write!(out, "{}", first.start().add_hours(i as i64)).map_err(io)?;
        for c in channels {
            write!(out, ",{}", c.values()[i]).map_err(io)?;
        }
        writeln!(out).map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Daily counterpart of [`write_hourly_csv`].
pub fn write_daily_csv(
    kind: SourceKind,
    path: &Path,
    channels: &[&DailySeries],
) -> Result<(), IngestError> {
    assert!(!kind.is_hourly(), "write_daily_csv needs a daily kind");
    let header = kind.header();
    assert_eq!(channels.len(), header.len() - 1, "channel count vs schema");
    let first = channels[0];
    assert!(
        channels
            .iter()
            .all(|c| c.start_date() == first.start_date() && c.len() == first.len()),
        "channels must share one range"
    );

    let mut out = writer(path)?;
    let io = |source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    };
    writeln!(out, "{}", header.join(",")).map_err(io)?;
    for i in 0..first.len() {
        write!(out, "{}", first.start_date().add_days(i as i64)).map_err(io)?;
        for c in channels {
            write!(out, ",{}", c.values()[i]).map_err(io)?;
        }
        writeln!(out).map_err(io)?;
    }
    out.flush().map_err(io)
}

fn open_checked(spec: &SourceSpec) -> Result<csv::Reader<BufReader<File>>, IngestError> {
    let file = File::open(&spec.path).map_err(|source| IngestError::Io {
        path: spec.path.clone(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(BufReader::new(file));
    let found = reader
        .headers()
        .map_err(|source| IngestError::Csv {
            path: spec.path.clone(),
            source,
        })?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    let expected = spec.kind.header().join(",");
    if found != expected {
        return Err(IngestError::Header {
            path: spec.path.clone(),
            expected,
            found,
        });
    }
    Ok(reader)
}

fn writer(path: &Path) -> Result<BufWriter<File>, IngestError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| IngestError::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn malformed(spec: &SourceSpec, line: u64, message: String) -> IngestError {
    IngestError::MalformedRow {
        path: spec.path.clone(),
        line,
        message,
    }
}

fn parse_value(spec: &SourceSpec, line: u64, column: &str, field: &str) -> Result<f64, IngestError> {
    let v: f64 = field
        .parse()
        .map_err(|_| malformed(spec, line, format!("column {column:?}: bad number {field:?}")))?;
    if !v.is_finite() {
        return Err(malformed(
            spec,
            line,
            format!("column {column:?}: non-finite value {field:?}"),
        ));
    }
    Ok(v)
}

/// Fill interior missing runs of at most [`MAX_GAP_HOURS`] by linear
/// interpolation between the bracketing present values.
fn fill_gaps(
    spec: &SourceSpec,
    column: &str,
    start: Timestamp,
    col: Vec<Option<f64>>,
) -> Result<Vec<f64>, IngestError> {
    if col.first().is_none_or(|v| v.is_none()) {
        return Err(IngestError::MissingEdge {
            path: spec.path.clone(),
            column: column.to_string(),
            which: "first",
        });
    }
    if col.last().is_none_or(|v| v.is_none()) {
        return Err(IngestError::MissingEdge {
            path: spec.path.clone(),
            column: column.to_string(),
            which: "last",
        });
    }

    let mut filled = Vec::with_capacity(col.len());
    let mut i = 0;
    while i < col.len() {
        match col[i] {
            Some(v) => {
                filled.push(v);
                i += 1;
            }
            None => {
                let run_start = i;
                while col[i].is_none() {
                    i += 1;
                }
                let run = i - run_start;
                if run > MAX_GAP_HOURS {
                    return Err(IngestError::GapTooLong {
                        path: spec.path.clone(),
                        column: column.to_string(),
                        hours: run,
                        from: start.add_hours(run_start as i64),
                        to: start.add_hours(i as i64 - 1),
                    });
                }
                let left = filled[run_start - 1];
                let right = col[i].expect("run ends at a present value");
                for k in 0..run {
                    let frac = (k + 1) as f64 / (run + 1) as f64;
                    filled.push(left + frac * (right - left));
                }
            }
        }
    }
    Ok(filled)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_temp(contents: &str) -> tempfile::NamedTempFile {
        let f = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(f.path(), contents).unwrap();
        f
    }

    fn load_spec(f: &tempfile::NamedTempFile) -> SourceSpec {
        SourceSpec::new(SourceKind::Load, f.path())
    }

    #[test]
    fn parses_two_row_load_file() {
        let f = write_temp("timestamp,load_mw\n2020-01-01T00:00,100.0\n2020-01-01T01:00,110.0\n");
        let series = parse_hourly_csv(&load_spec(&f)).unwrap();
        assert_eq!(series.len(), 1);
        assert_eq!(series[0].values(), &[100.0, 110.0]);
        assert_eq!(series[0].name(), "load_mw");
    }

    #[test]
    fn interpolates_single_missing_hour() {
        let f = write_temp("timestamp,load_mw\n2020-01-01T00:00,100\n2020-01-01T02:00,120\n");
        let series = parse_hourly_csv(&load_spec(&f)).unwrap();
        assert_eq!(series[0].values(), &[100.0, 110.0, 120.0]);
    }

    #[test]
    fn interpolates_empty_field_as_missing() {
        let f = write_temp(
            "timestamp,load_mw\n2020-01-01T00:00,100\n2020-01-01T01:00,\n2020-01-01T02:00,120\n",
        );
        let series = parse_hourly_csv(&load_spec(&f)).unwrap();
        assert_eq!(series[0].values(), &[100.0, 110.0, 120.0]);
    }

    #[test]
    fn rejects_gap_longer_than_three_hours() {
        let f = write_temp("timestamp,load_mw\n2020-01-01T00:00,100\n2020-01-01T05:00,150\n");
        let err = parse_hourly_csv(&load_spec(&f)).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("4h gap"), "{msg}");
        assert!(msg.contains("2020-01-01T01:00") && msg.contains("2020-01-01T04:00"), "{msg}");
    }

    #[test]
    fn accepts_three_hour_gap() {
        let f = write_temp("timestamp,load_mw\n2020-01-01T00:00,100\n2020-01-01T04:00,180\n");
        let series = parse_hourly_csv(&load_spec(&f)).unwrap();
        assert_eq!(series[0].values(), &[100.0, 120.0, 140.0, 160.0, 180.0]);
    }

    #[test]
    fn rejects_non_monotone_timestamps() {
        let f = write_temp(
            "timestamp,load_mw\n2020-01-01T02:00,100\n2020-01-01T01:00,90\n",
        );
        assert!(matches!(
            parse_hourly_csv(&load_spec(&f)).unwrap_err(),
            IngestError::NonMonotone { line: 3, .. }
        ));
    }

    #[test]
    fn drops_repeated_hour() {
        // DST fall-back leaves a duplicated wall-clock hour; first row wins.
        let f = write_temp(
            "timestamp,load_mw\n2020-11-01T01:00,100\n2020-11-01T01:00,999\n2020-11-01T02:00,120\n",
        );
        let series = parse_hourly_csv(&load_spec(&f)).unwrap();
        assert_eq!(series[0].values(), &[100.0, 120.0]);
    }

    #[test]
    fn malformed_row_reports_line_number() {
        let f = write_temp("timestamp,load_mw\n2020-01-01T00:00,100\n2020-01-01T01:00,oops\n");
        let err = parse_hourly_csv(&load_spec(&f)).unwrap_err();
        assert!(matches!(err, IngestError::MalformedRow { line: 3, .. }), "{err}");
    }

    #[test]
    fn header_mismatch_rejected() {
        let f = write_temp("time,load\n2020-01-01T00:00,100\n");
        assert!(matches!(
            parse_hourly_csv(&load_spec(&f)).unwrap_err(),
            IngestError::Header { .. }
        ));
    }

    #[test]
    fn weather_file_yields_four_equal_length_series() {
        let mut body = String::from(
            "timestamp,air_temp_c,dew_point_c,wind_speed_ms,rel_humidity_pct\n",
        );
        for h in 0..48 {
            body.push_str(&format!(
                "2020-01-{:02}T{:02}:00,{},{},{},{}\n",
                1 + h / 24,
                h % 24,
                10.0 + h as f64 * 0.1,
                8.0,
                3.5,
                60.0
            ));
        }
        let f = write_temp(&body);
        let spec = SourceSpec::new(SourceKind::Weather, f.path());
        let series = parse_hourly_csv(&spec).unwrap();
        assert_eq!(series.len(), 4);
        assert!(series.iter().all(|s| s.len() == 48));
        assert_eq!(series[0].name(), "air_temp_c");
        assert_eq!(series[3].name(), "rel_humidity_pct");
    }

    #[test]
    fn parses_covid_daily_file() {
        let f = write_temp("date,new_cases,new_deaths\n2020-03-01,5,0\n2020-03-02,9,1\n2020-03-03,20,1\n");
        let spec = SourceSpec::new(SourceKind::Covid, f.path());
        let series = parse_daily_csv(&spec).unwrap();
        assert_eq!(series.len(), 2);
        assert_eq!(series[0].values(), &[5.0, 9.0, 20.0]);
        assert_eq!(series[1].name(), "new_deaths");
    }

    #[test]
    fn parses_signed_mobility_percentages() {
        let f = write_temp(
            "date,workplaces_pct_change,residential_pct_change\n2020-03-01,-35.0,12.0\n",
        );
        let spec = SourceSpec::new(SourceKind::Mobility, f.path());
        let series = parse_daily_csv(&spec).unwrap();
        assert_eq!(series[0].values(), &[-35.0]);
        assert_eq!(series[1].values(), &[12.0]);
    }

    #[test]
    fn skipped_date_names_missing_day() {
        let f = write_temp("date,new_cases,new_deaths\n2020-03-01,5,0\n2020-03-03,9,1\n");
        let spec = SourceSpec::new(SourceKind::Covid, f.path());
        let err = parse_daily_csv(&spec).unwrap_err();
        assert!(err.to_string().contains("2020-03-02"), "{err}");
    }

    #[test]
    fn negative_case_count_rejected() {
        let f = write_temp("date,new_cases,new_deaths\n2020-03-01,-5,0\n");
        let spec = SourceSpec::new(SourceKind::Covid, f.path());
        assert!(matches!(
            parse_daily_csv(&spec).unwrap_err(),
            IngestError::NegativeCount { .. }
        ));
    }

    #[test]
    fn hourly_round_trip_is_exact() {
        let f = write_temp(
            "timestamp,load_mw\n2020-01-01T00:00,100.125\n2020-01-01T01:00,110.0625\n2020-01-01T02:00,97.3\n",
        );
        let series = parse_hourly_csv(&load_spec(&f)).unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        write_hourly_csv(SourceKind::Load, out.path(), &[&series[0]]).unwrap();
        let back = parse_hourly_csv(&SourceSpec::new(SourceKind::Load, out.path())).unwrap();
        assert_eq!(back[0], series[0]);
    }

    #[test]
    fn daily_round_trip_is_exact() {
        let f = write_temp(
            "date,workplaces_pct_change,residential_pct_change\n2020-03-01,-35.4,12.2\n2020-03-02,-36.75,13.0\n",
        );
        let spec = SourceSpec::new(SourceKind::Mobility, f.path());
        let series = parse_daily_csv(&spec).unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        write_daily_csv(SourceKind::Mobility, out.path(), &[&series[0], &series[1]]).unwrap();
        let back = parse_daily_csv(&SourceSpec::new(SourceKind::Mobility, out.path())).unwrap();
        assert_eq!(back, series);
    }
}

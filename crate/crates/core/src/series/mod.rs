//! Time-indexed series types and alignment primitives.
//!
//! Everything here is immutable after construction and safe to share across
//! threads. Hourly data lives on a gapless grid: an [`HourlySeries`] stores a
//! start timestamp and a dense value vector, so the timestamp of `values[i]`
//! is always `start + i` hours. Missing values are not representable; they
//! must be resolved at ingestion.
//!
//! Intervals are half-open `[from, to)` throughout.

mod timestamp;

pub use timestamp::{Date, Timestamp, Weekday};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("invalid calendar date {year:04}-{month:02}-{day:02}")]
    InvalidDate { year: i64, month: u32, day: u32 },
    #[error("hour {0} out of range 0..=23")]
    InvalidHour(u32),
    #[error("cannot parse date {0:?} (expected YYYY-MM-DD)")]
    DateParse(String),
    #[error("cannot parse timestamp {0:?} (expected YYYY-MM-DDTHH:00)")]
    TimestampParse(String),
    #[error("non-finite value at index {index} in channel {name:?}")]
    NonFinite { name: String, index: usize },
    #[error("slice bound {bound} outside series range [{start}, {end}) of {name:?}")]
    SliceOutOfRange {
        name: String,
        bound: Timestamp,
        start: Timestamp,
        end: Timestamp,
    },
    #[error("slice bounds reversed: {from} > {to}")]
    SliceReversed { from: Timestamp, to: Timestamp },
    #[error("channel ranges have empty intersection: {0}")]
    EmptyIntersection(String),
    #[error("duplicate channel name {0:?}")]
    DuplicateChannel(String),
    #[error("target channel {0:?} not present")]
    MissingTarget(String),
    #[error("no channels to align")]
    NoChannels,
}

/// One named channel sampled every hour, with no gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct HourlySeries {
    name: String,
    start: Timestamp,
    values: Vec<f64>,
}

impl HourlySeries {
    pub fn new(
        name: impl Into<String>,
        start: Timestamp,
        values: Vec<f64>,
    ) -> Result<Self, SeriesError> {
        let name = name.into();
        check_finite(&name, &values)?;
        Ok(HourlySeries { name, start, values })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn start(&self) -> Timestamp {
        self.start
    }

    /// One past the last sampled hour.
    pub fn end(&self) -> Timestamp {
        self.start.add_hours(self.values.len() as i64)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at(&self, ts: Timestamp) -> Option<f64> {
        let offset = ts.hours_since(self.start);
        if offset < 0 || offset >= self.values.len() as i64 {
            return None;
        }
        Some(self.values[offset as usize])
    }

    /// Contiguous sub-series covering `[from, to)`.
    pub fn slice(&self, from: Timestamp, to: Timestamp) -> Result<HourlySeries, SeriesError> {
        if from > to {
            return Err(SeriesError::SliceReversed { from, to });
        }
        let out_of_range = |bound| SeriesError::SliceOutOfRange {
            name: self.name.clone(),
            bound,
            start: self.start,
            end: self.end(),
        };
        if from < self.start || from > self.end() {
            return Err(out_of_range(from));
        }
        if to > self.end() {
            return Err(out_of_range(to));
        }
        let lo = from.hours_since(self.start) as usize;
        let hi = to.hours_since(self.start) as usize;
        Ok(HourlySeries {
            name: self.name.clone(),
            start: from,
            values: self.values[lo..hi].to_vec(),
        })
    }

    /// Rename without copying values.
    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// One named channel sampled once per calendar day.
#[derive(Debug, Clone, PartialEq)]
pub struct DailySeries {
    name: String,
    start_date: Date,
    values: Vec<f64>,
}

impl DailySeries {
    pub fn new(
        name: impl Into<String>,
        start_date: Date,
        values: Vec<f64>,
    ) -> Result<Self, SeriesError> {
        let name = name.into();
        check_finite(&name, &values)?;
        Ok(DailySeries {
            name,
            start_date,
            values,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn start_date(&self) -> Date {
        self.start_date
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Whether a channel is the forecast target or an auxiliary input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelRole {
    Target,
    Exogenous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    name: String,
    role: ChannelRole,
    values: Vec<f64>,
}

impl Channel {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn role(&self) -> ChannelRole {
        self.role
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Multi-channel hourly matrix with a shared, strictly increasing time index.
///
/// [`align`] and range restriction always produce a contiguous index (step of
/// exactly one hour). Row filtering (see `features::filter_weekends`) keeps
/// the index strictly increasing but may introduce gaps; window construction
/// is responsible for handling those.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedDataset {
    index: Vec<Timestamp>,
    channels: Vec<Channel>,
}

impl AlignedDataset {
    pub fn index(&self) -> &[Timestamp] {
        &self.index
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn n_rows(&self) -> usize {
        self.index.len()
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn channel(&self, name: &str) -> Option<&Channel> {
        self.channels.iter().find(|c| c.name == name)
    }

    /// Position of the (unique) target channel.
    pub fn target_position(&self) -> usize {
        self.channels
            .iter()
            .position(|c| c.role == ChannelRole::Target)
            .expect("aligned dataset always carries exactly one target channel")
    }

    pub fn target(&self) -> &Channel {
        &self.channels[self.target_position()]
    }

    /// True when consecutive index entries are exactly one hour apart.
    pub fn is_contiguous(&self) -> bool {
        self.index.windows(2).all(|w| w[1].hours_since(w[0]) == 1)
    }

    /// Rows whose timestamp satisfies the predicate, in original order.
    pub fn select_rows(&self, keep: impl Fn(Timestamp) -> bool) -> AlignedDataset {
        let kept: Vec<usize> = (0..self.index.len())
            .filter(|&i| keep(self.index[i]))
            .collect();
        AlignedDataset {
            index: kept.iter().map(|&i| self.index[i]).collect(),
            channels: self
                .channels
                .iter()
                .map(|c| Channel {
                    name: c.name.clone(),
                    role: c.role,
                    values: kept.iter().map(|&i| c.values[i]).collect(),
                })
                .collect(),
        }
    }

    /// Restriction to `[from, to)`.
    pub fn restrict(&self, from: Timestamp, to: Timestamp) -> AlignedDataset {
        self.select_rows(|ts| ts >= from && ts < to)
    }

    /// Value of a channel at a timestamp, if that row exists.
    pub fn value_at(&self, channel_pos: usize, ts: Timestamp) -> Option<f64> {
        self.row_of(ts).map(|row| self.channels[channel_pos].values[row])
    }

    /// Row index of a timestamp. For contiguous datasets this is O(1)-ish via
    /// binary search; filtered datasets also stay sorted, so it still applies.
    pub fn row_of(&self, ts: Timestamp) -> Option<usize> {
        self.index.binary_search(&ts).ok()
    }
}

/// Join hourly channels on the intersection of their time ranges.
///
/// Channel order is preserved; the channel named `target_name` is tagged as
/// the target and all others as exogenous.
pub fn align(channels: &[HourlySeries], target_name: &str) -> Result<AlignedDataset, SeriesError> {
    if channels.is_empty() {
        return Err(SeriesError::NoChannels);
    }
    for (i, c) in channels.iter().enumerate() {
        if channels[..i].iter().any(|other| other.name() == c.name()) {
            return Err(SeriesError::DuplicateChannel(c.name().to_string()));
        }
    }
    if !channels.iter().any(|c| c.name() == target_name) {
        return Err(SeriesError::MissingTarget(target_name.to_string()));
    }

    let start = channels.iter().map(|c| c.start()).max().expect("non-empty");
    let end = channels.iter().map(|c| c.end()).min().expect("non-empty");
    if start >= end {
        let ranges = channels
            .iter()
            .map(|c| format!("{} [{}, {})", c.name(), c.start(), c.end()))
            .collect::<Vec<_>>()
            .join(", ");
        return Err(SeriesError::EmptyIntersection(ranges));
    }

    let n = end.hours_since(start) as usize;
    let index: Vec<Timestamp> = (0..n).map(|i| start.add_hours(i as i64)).collect();
    let channels = channels
        .iter()
        .map(|c| {
            let lo = start.hours_since(c.start()) as usize;
            Channel {
                name: c.name().to_string(),
                role: if c.name() == target_name {
                    ChannelRole::Target
                } else {
                    ChannelRole::Exogenous
                },
                values: c.values()[lo..lo + n].to_vec(),
            }
        })
        .collect();

    Ok(AlignedDataset { index, channels })
}

fn check_finite(name: &str, values: &[f64]) -> Result<(), SeriesError> {
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(SeriesError::NonFinite {
            name: name.to_string(),
            index,
        });
    }
    Ok(())
}

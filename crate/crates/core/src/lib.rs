//! Day-ahead electricity load forecasting around an abrupt demand regime
//! shift, as seen after the March 2020 stay-at-home orders.
//!
//! The crate covers the full desk-scale workflow:
//!
//! - [`series`] — hourly/daily series types, calendar math, alignment
//! - [`ingest`] — CSV parsing for the four source formats and a seeded
//!   synthetic generator with a configurable regime shift
//! - [`features`] — the data-preparation rules (24h weather shift, daily
//!   upsampling, zero prefix fill), pre/post splits, weekend filtering,
//!   supervised windowing, and normalization
//! - [`neural`] — a small reverse-mode autodiff engine and the three
//!   forecasters (FCDNN, LSTM, GRU) with a shared deterministic train loop
//! - [`scenarios`] — the benchmark, weekend-trained, and rolling-retrain
//!   experiments with MAPE evaluation and report assembly
//! - [`plot`] — SVG emission for daily-MAPE curves
//!
//! Everything is deterministic given a seed; see [`rng`] for the portable
//! PRNG contract and [`SplitMix64`](rng::SplitMix64) for the algorithms.

pub mod features;
pub mod ingest;
pub mod neural;
pub mod plot;
pub mod rng;
pub mod scenarios;
pub mod series;

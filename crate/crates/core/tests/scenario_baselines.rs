//! Sanity floor for the learned forecasters: without any regime shift, a
//! trained benchmark model must stay within 2x of the seasonal-naive
//! baseline on the same test days.

use loadcast_core::features::{prepare_dataset, FeatureKind, RawSources, SplitConfig};
use loadcast_core::ingest::{generate_synthetic, SynthConfig};
use loadcast_core::neural::{Architecture, TrainConfig};
use loadcast_core::scenarios::{
    day_actuals, mape, run_benchmark, seasonal_naive, ScenarioConfig, ScenarioKind,
};
use loadcast_core::series::Timestamp;

#[test]
fn benchmark_tracks_seasonal_naive_without_regime_shift() {
    for seed in 1..=10u64 {
        let bundle = generate_synthetic(&SynthConfig {
            seed,
            n_days: 240,
            base_mw: 15_000.0,
            weekday_amp: 6_000.0,
            weekend_amp: 3_500.0,
            shift_day: 168,
            // Post-shift weekdays keep the weekday amplitude: no shift at all.
            post_shift_weekday_amp: Some(6_000.0),
            weather_coupling: 40.0,
            noise_sd: 150.0,
        })
        .unwrap();
        let sources = RawSources {
            load: bundle.load,
            weather: vec![bundle.weather],
            covid: vec![],
            mobility: vec![],
        };
        let split = SplitConfig {
            train_start: Timestamp::from_ymdh(2019, 1, 1, 0).unwrap(),
            ..SplitConfig::default()
        };

        let cfg = ScenarioConfig {
            kind: ScenarioKind::Benchmark,
            features: vec![FeatureKind::Weather],
            split: split.clone(),
            train: TrainConfig {
                seed,
                epochs: 300,
                batch_size: 32,
                learning_rate: 0.01,
                patience: 30,
                val_fraction: 0.15,
                hidden_fcdnn: vec![16, 16],
                hidden_rnn: 16,
            },
            architecture: Architecture::Gru,
        };
        let report = run_benchmark(&cfg, &sources).unwrap();

        // Seasonal-naive over the identical post-period days.
        let ds = prepare_dataset(&sources, &[]).unwrap();
        let mut actual = Vec::new();
        let mut naive = Vec::new();
        for day in &report.days {
            actual.extend(day_actuals(&ds, day.date).unwrap());
            naive.extend(seasonal_naive(&ds, day.date).unwrap());
        }
        let naive_mape = mape(&actual, &naive).unwrap();

        eprintln!(
            "seed {seed}: benchmark {:.2}% vs seasonal-naive {:.2}%",
            report.overall_mape_pct, naive_mape
        );
        assert!(
            report.overall_mape_pct < 2.0 * naive_mape,
            "seed {seed}: benchmark {:.2}% vs seasonal-naive {:.2}%",
            report.overall_mape_pct,
            naive_mape
        );
    }
}

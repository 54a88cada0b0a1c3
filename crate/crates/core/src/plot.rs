//! Daily-MAPE line charts as self-contained SVG text: one polyline per
//! report, day index on the x-axis, MAPE % on the y-axis, no external assets.

use thiserror::Error;

use crate::scenarios::ScenarioReport;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("no reports to plot")]
    Empty,
    #[error("report {0:?} has no daily values")]
    NoDays(String),
}

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 28.0;
const MARGIN_BOTTOM: f64 = 52.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// Render the daily MAPE curves of one or more reports into one chart.
///
/// The y-axis always reaches at least the largest daily value; legend labels
/// carry the architecture, plus the scenario kind when the reports mix kinds.
pub fn render_daily_mape_svg(reports: &[&ScenarioReport]) -> Result<String, PlotError> {
    if reports.is_empty() {
        return Err(PlotError::Empty);
    }
    for r in reports {
        if r.daily_mape_pct.is_empty() {
            return Err(PlotError::NoDays(format!("{} {}", r.kind, r.architecture)));
        }
    }

    let n_days = reports.iter().map(|r| r.daily_mape_pct.len()).max().expect("non-empty");
    let max_mape = reports
        .iter()
        .flat_map(|r| r.daily_mape_pct.iter())
        .fold(0.0f64, |m, &v| m.max(v));
    // Headroom above the peak, and never a degenerate axis.
    let y_max = (max_mape * 1.08).max(1.0);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_of = |day: usize| {
        let span = (n_days - 1).max(1) as f64;
        MARGIN_LEFT + plot_w * day as f64 / span
    };
    let y_of = |mape: f64| MARGIN_TOP + plot_h * (1.0 - mape / y_max);

    let mixed_kinds = reports.iter().any(|r| r.kind != reports[0].kind);
    let label = |r: &ScenarioReport| {
        if mixed_kinds {
            format!("{} {}", r.kind, r.architecture)
        } else {
            r.architecture.to_string()
        }
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" data-y-max=\"{y_max}\" data-days=\"{n_days}\">\n"
    ));
    svg.push_str(&format!(
        "  <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));

    // Horizontal gridlines with y labels.
    for tick in 0..=4 {
        let value = y_max * f64::from(tick) / 4.0;
        let y = y_of(value);
        svg.push_str(&format!(
            "  <line x1=\"{MARGIN_LEFT}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" \
             stroke=\"#dddddd\" stroke-width=\"1\"/>\n",
            MARGIN_LEFT + plot_w
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"end\" \
             fill=\"#444444\">{value:.1}</text>\n",
            MARGIN_LEFT - 8.0,
            y + 4.0
        ));
    }

    // X ticks once a week.
    let mut day = 0;
    while day < n_days {
        let x = x_of(day);
        svg.push_str(&format!(
            "  <line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" \
             stroke=\"#bbbbbb\" stroke-width=\"1\"/>\n",
            MARGIN_TOP + plot_h,
            MARGIN_TOP + plot_h + 5.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{x:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\" \
             fill=\"#444444\">{}</text>\n",
            MARGIN_TOP + plot_h + 20.0,
            day + 1
        ));
        day += 7;
    }

    // Axes.
    svg.push_str(&format!(
        "  <line x1=\"{MARGIN_LEFT}\" y1=\"{MARGIN_TOP}\" x2=\"{MARGIN_LEFT}\" y2=\"{:.2}\" \
         stroke=\"#222222\" stroke-width=\"1.5\"/>\n",
        MARGIN_TOP + plot_h
    ));
    svg.push_str(&format!(
        "  <line x1=\"{MARGIN_LEFT}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" \
         stroke=\"#222222\" stroke-width=\"1.5\"/>\n",
        MARGIN_TOP + plot_h,
        MARGIN_LEFT + plot_w,
        MARGIN_TOP + plot_h
    ));
    svg.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\" \
         fill=\"#222222\">day after split</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    ));
    svg.push_str(&format!(
        "  <text x=\"16\" y=\"{:.2}\" font-size=\"13\" fill=\"#222222\" \
         transform=\"rotate(-90 16 {:.2})\" text-anchor=\"middle\">daily MAPE (%)</text>\n",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    ));

    // One polyline per report, plus its legend entry.
    for (i, r) in reports.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = r
            .daily_mape_pct
            .iter()
            .enumerate()
            .map(|(d, &m)| format!("{:.2},{:.2}", x_of(d), y_of(m)))
            .collect();
        svg.push_str(&format!(
            "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\" points=\"{}\"/>\n",
            points.join(" ")
        ));

        let ly = MARGIN_TOP + 16.0 + 20.0 * i as f64;
        let lx = MARGIN_LEFT + plot_w + 14.0;
        svg.push_str(&format!(
            "  <line x1=\"{lx:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" \
             stroke=\"{color}\" stroke-width=\"1.8\"/>\n",
            ly - 4.0,
            lx + 22.0,
            ly - 4.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{ly:.2}\" font-size=\"12\" fill=\"#222222\">{}</text>\n",
            lx + 28.0,
            label(r)
        ));
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

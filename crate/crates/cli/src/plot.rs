//! Minimal SVG line plots of sweep columns against γt.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chronocorr::robustness::Measure;

use crate::config::Column;
use crate::output::{format_number, write_file};
use crate::sweep::SweepTable;
use crate::CliError;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const COLORS: [&str; 2] = ["#1f4e9c", "#c0392b"];
const DASHES: [&str; 3] = ["", "8,5", "2,4"];

/// Measures drawn on one panel.
pub struct Family {
    pub name: &'static str,
    pub title: &'static str,
    pub columns: Vec<Column>,
}

pub fn families() -> Vec<Family> {
    vec![
        Family {
            name: "causality",
            title: "causality monotone f and separability g",
            columns: vec![Column::Measure(Measure::F), Column::Measure(Measure::G)],
        },
        Family {
            name: "entanglement",
            title: "entanglement robustness TER and ER",
            columns: vec![Column::Measure(Measure::Ter), Column::Measure(Measure::Er)],
        },
        Family {
            name: "steering",
            title: "temporal steering robustness",
            columns: vec![Column::Measure(Measure::Tsr)],
        },
        Family {
            name: "nonlocality",
            title: "temporal nonlocality robustness TNR and LHV-TNR",
            columns: vec![Column::Measure(Measure::Tnr), Column::Measure(Measure::LhvTnr)],
        },
        Family {
            name: "nsit",
            title: "NSIT violation",
            columns: vec![Column::Nsit],
        },
    ]
}

#[derive(Debug, Default)]
pub struct PlotReport {
    pub written: Vec<PathBuf>,
    pub notice: Option<String>,
}

fn nice_max(v: f64) -> f64 {
    if v.is_nan() || v <= 0.0 {
        return 1.0;
    }
    let mag = 10f64.powf(v.log10().floor());
    [1.0, 2.0, 2.5, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|&c| c >= v * (1.0 - 1e-12))
        .unwrap_or(10.0 * mag)
}

fn short_name(state: &str) -> &str {
    match state {
        "balanced_superposition" => "balanced",
        "maximally_mixed" => "mixed",
        other => other,
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// SVG text for one family, or `None` when no requested column belongs to it.
pub fn render(family: &Family, tables: &[SweepTable]) -> Option<String> {
    let first = tables.first()?;
    let present: Vec<(usize, Column)> = family
        .columns
        .iter()
        .filter_map(|c| first.columns.iter().position(|x| x == c).map(|i| (i, *c)))
        .collect();
    if present.is_empty() {
        return None;
    }
    let xs: Vec<f64> = first.rows.iter().map(|r| r.gamma_t).collect();
    let (x0, x1) = (xs[0], xs[xs.len() - 1]);
    let ymax = tables
        .iter()
        .flat_map(|t| t.rows.iter())
        .flat_map(|r| present.iter().map(move |(i, _)| r.values[*i]))
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max);
    let ymax = nice_max(ymax);
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - y / ymax * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + pw / 2.0,
        escape(family.title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for k in 0..=5 {
        let fx = x0 + (x1 - x0) * k as f64 / 5.0;
        let fy = ymax * k as f64 / 5.0;
        let (px, py) = (sx(fx), sy(fy));
        let _ = writeln!(
            s,
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#,
            TOP + ph,
            TOP + ph + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + ph + 19.0,
            format_number((fx * 1e6).round() / 1e6)
        );
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/>"#,
            LEFT - 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 8.0,
            py + 4.0,
            format_number((fy * 1e9).round() / 1e9)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">γt</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 12.0
    );

    let mut legend_y = TOP + 10.0;
    for (ti, table) in tables.iter().enumerate() {
        let dash = DASHES[ti % DASHES.len()];
        for (ci, (col_idx, col)) in present.iter().enumerate() {
            let color = COLORS[ci % COLORS.len()];
            let dash_attr = if dash.is_empty() {
                String::new()
            } else {
                format!(r#" stroke-dasharray="{dash}""#)
            };
            let mut segment = Vec::new();
            let flush = |seg: &mut Vec<String>, s: &mut String| {
                if seg.len() > 1 {
                    let _ = writeln!(
                        s,
                        r#"<polyline fill="none" stroke="{color}" stroke-width="1.8"{dash_attr} points="{}"/>"#,
                        seg.join(" ")
                    );
                }
                seg.clear();
            };
            for row in &table.rows {
                let v = row.values[*col_idx];
                if v.is_finite() {
                    segment.push(format!("{:.2},{:.2}", sx(row.gamma_t), sy(v.min(ymax))));
                } else {
                    flush(&mut segment, &mut s);
                }
            }
            flush(&mut segment, &mut s);
            let lx = WIDTH - RIGHT + 12.0;
            let _ = writeln!(
                s,
                r#"<line x1="{lx}" y1="{legend_y}" x2="{}" y2="{legend_y}" stroke="{color}" stroke-width="1.8"{dash_attr}/>"#,
                lx + 28.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}">{} {}</text>"#,
                lx + 34.0,
                legend_y + 4.0,
                col.label(),
                escape(short_name(&table.state))
            );
            legend_y += 18.0;
        }
    }
    s.push_str("</svg>\n");
    Some(s)
}

/// One SVG per measure family; skipped with a notice when fewer than two grid points exist.
pub fn emit_plots(tables: &[SweepTable], dir: &Path) -> Result<PlotReport, CliError> {
    let rows = tables.first().map_or(0, |t| t.rows.len());
    if rows < 2 {
        return Ok(PlotReport {
            written: Vec::new(),
            notice: Some(format!("plots skipped: {rows} grid point(s), at least 2 needed")),
        });
    }
    let mut report = PlotReport::default();
    for family in families() {
        if let Some(svg) = render(&family, tables) {
            let path = dir.join(format!("{}.svg", family.name));
            write_file(&path, &svg)?;
            report.written.push(path);
        }
    }
    Ok(report)
}

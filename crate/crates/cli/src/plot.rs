//! Static SVG plots rendered from the exported CSV files.
//!
//! Plots read the CSVs back rather than in-memory results, so a figure can
//! always be regenerated from the data next to it.

use std::path::{Path, PathBuf};

use lvpatch::export::{SCAN_HEADER, TRAJECTORY_HEADER};
use plotters::prelude::*;

use crate::error::CliError;

/// Series longer than this are decimated by a fixed stride before drawing.
const MAX_POINTS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// One trajectory CSV, four components against time.
    TimeSeries,
    /// Several trajectory CSVs, one panel per component.
    Overlay,
    /// One scan CSV: defect against shift, accepted shifts marked.
    Defect,
}

impl std::str::FromStr for PlotKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "timeseries" => Ok(PlotKind::TimeSeries),
            "overlay" => Ok(PlotKind::Overlay),
            "defect" => Ok(PlotKind::Defect),
            other => Err(format!("unknown plot kind {other:?} (timeseries, overlay, defect)")),
        }
    }
}

struct Table {
    columns: Vec<Vec<f64>>,
    flags: Vec<bool>,
}

fn read_table(path: &Path, header: &str) -> Result<Table, CliError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Plot(format!("{}: {e}", path.display())))?;
    let found = reader
        .headers()
        .map_err(|e| CliError::Plot(format!("{}: {e}", path.display())))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if found != header {
        return Err(CliError::Plot(format!(
            "{}: expected columns `{header}`, found `{found}`",
            path.display()
        )));
    }
    let names: Vec<&str> = header.split(',').collect();
    let boolean_tail = names.last() == Some(&"accepted");
    let numeric = if boolean_tail { names.len() - 1 } else { names.len() };
    let mut table = Table { columns: vec![Vec::new(); numeric], flags: Vec::new() };
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Plot(format!("{}: {e}", path.display())))?;
        for (k, column) in table.columns.iter_mut().enumerate() {
            let v: f64 = record[k].parse().map_err(|_| {
                CliError::Plot(format!("{}: row {}: `{}` is not a number", path.display(), row + 1, &record[k]))
            })?;
            column.push(v);
        }
        if boolean_tail {
            let flag = record[numeric].parse().map_err(|_| {
                CliError::Plot(format!("{}: row {}: `{}` is not a boolean", path.display(), row + 1, &record[numeric]))
            })?;
            table.flags.push(flag);
        }
    }
    if table.columns[0].is_empty() {
        return Err(CliError::Plot(format!("{}: no data rows", path.display())));
    }
    Ok(table)
}

fn decimate(t: &[f64], v: &[f64]) -> Vec<(f64, f64)> {
    let stride = t.len().div_ceil(MAX_POINTS).max(1);
    let mut pts: Vec<(f64, f64)> = t.iter().zip(v).step_by(stride).map(|(a, b)| (*a, *b)).collect();
    if !(t.len() - 1).is_multiple_of(stride) {
        pts.push((t[t.len() - 1], v[v.len() - 1]));
    }
    pts
}

fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if hi > lo {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

const COMPONENTS: [&str; 4] = ["x1", "y1", "x2", "y2"];
const PALETTE: [RGBColor; 6] = [
    RGBColor(31, 119, 180),
    RGBColor(255, 127, 14),
    RGBColor(44, 160, 44),
    RGBColor(214, 39, 40),
    RGBColor(148, 103, 189),
    RGBColor(140, 86, 75),
];

fn plot_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Plot(e.to_string())
}

/// Renders `inputs` as an SVG at `out`.
pub fn emit_plot(inputs: &[PathBuf], kind: PlotKind, title: &str, out: &Path) -> Result<(), CliError> {
    match kind {
        PlotKind::TimeSeries => {
            let [input] = inputs else {
                return Err(CliError::Plot("time-series plot takes exactly one CSV".into()));
            };
            let table = read_table(input, TRAJECTORY_HEADER)?;
            time_series(&table, title, out)
        }
        PlotKind::Overlay => {
            if inputs.is_empty() {
                return Err(CliError::Plot("overlay plot needs at least one CSV".into()));
            }
            let tables = inputs
                .iter()
                .map(|p| read_table(p, TRAJECTORY_HEADER))
                .collect::<Result<Vec<_>, _>>()?;
            overlay(&tables, title, out)
        }
        PlotKind::Defect => {
            let [input] = inputs else {
                return Err(CliError::Plot("defect plot takes exactly one CSV".into()));
            };
            let table = read_table(input, SCAN_HEADER)?;
            defect_curve(&table, title, out)
        }
    }
}

fn time_series(table: &Table, title: &str, out: &Path) -> Result<(), CliError> {
    let t = &table.columns[0];
    let root = SVGBackend::new(out, (960, 540)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let (y0, y1) = span(table.columns[1..].iter().flatten().copied());
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(10)
        .x_label_area_size(35)
        .y_label_area_size(50)
        .build_cartesian_2d(t[0]..t[t.len() - 1].max(t[0] + 1e-9), y0..y1)
        .map_err(plot_err)?;
    chart.configure_mesh().x_desc("t").y_desc("density").draw().map_err(plot_err)?;
    for (k, name) in COMPONENTS.iter().enumerate() {
        let color = PALETTE[k];
        chart
            .draw_series(LineSeries::new(decimate(t, &table.columns[k + 1]), &color))
            .map_err(plot_err)?
            .label(*name)
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)
}

fn overlay(tables: &[Table], title: &str, out: &Path) -> Result<(), CliError> {
    let root = SVGBackend::new(out, (1200, 800)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let root = root.titled(title, ("sans-serif", 22)).map_err(plot_err)?;
    let panels = root.split_evenly((2, 2));
    let t_lo = tables.iter().map(|tb| tb.columns[0][0]).fold(f64::INFINITY, f64::min);
    let t_hi = tables.iter().map(|tb| *tb.columns[0].last().unwrap()).fold(f64::NEG_INFINITY, f64::max);
    for (k, panel) in panels.iter().enumerate() {
        let (y0, y1) = span(tables.iter().flat_map(|tb| tb.columns[k + 1].iter().copied()));
        let mut chart = ChartBuilder::on(panel)
            .caption(COMPONENTS[k], ("sans-serif", 16))
            .margin(8)
            .x_label_area_size(30)
            .y_label_area_size(45)
            .build_cartesian_2d(t_lo..t_hi.max(t_lo + 1e-9), y0..y1)
            .map_err(plot_err)?;
        chart.configure_mesh().x_desc("t").draw().map_err(plot_err)?;
        for (i, tb) in tables.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            chart
                .draw_series(LineSeries::new(decimate(&tb.columns[0], &tb.columns[k + 1]), &color))
                .map_err(plot_err)?
                .label(format!("IC {}", i + 1))
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
        }
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .draw()
            .map_err(plot_err)?;
    }
    root.present().map_err(plot_err)
}

fn defect_curve(table: &Table, title: &str, out: &Path) -> Result<(), CliError> {
    let (shift, defect) = (&table.columns[0], &table.columns[1]);
    let root = SVGBackend::new(out, (960, 540)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let (y0, y1) = span(defect.iter().copied());
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(10)
        .x_label_area_size(35)
        .y_label_area_size(50)
        .build_cartesian_2d(shift[0]..shift[shift.len() - 1].max(shift[0] + 1e-9), y0.max(0.0)..y1)
        .map_err(plot_err)?;
    chart.configure_mesh().x_desc("shift T").y_desc("defect").draw().map_err(plot_err)?;
    chart
        .draw_series(LineSeries::new(decimate(shift, defect), &PALETTE[0]))
        .map_err(plot_err)?
        .label("sup-norm defect")
        .legend(|(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], PALETTE[0]));
    let accepted: Vec<(f64, f64)> = shift
        .iter()
        .zip(defect)
        .zip(&table.flags)
        .filter(|(_, &ok)| ok)
        .map(|((s, d), _)| (*s, *d))
        .collect();
    let step = accepted.len().div_ceil(MAX_POINTS).max(1);
    chart
        .draw_series(accepted.into_iter().step_by(step).map(|p| Circle::new(p, 2, PALETTE[3].filled())))
        .map_err(plot_err)?
        .label("accepted (defect <= epsilon)")
        .legend(|(x, y)| Circle::new((x + 10, y), 3, PALETTE[3].filled()));
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)
}

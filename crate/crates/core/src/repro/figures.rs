//! Figure presets: per-panel CSV tables plus a matplotlib script that lays
//! the panels out.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use toml::Value;

use super::config::{Flat, ScenarioConfig};
use super::{sweep_table, trajectory_table, Series};
use crate::error::{Error, Result};

/// Coupling of the left (weak coupling) column of every figure.
pub const BAD_CAVITY_R: f64 = 0.4;
/// Coupling of the right (strong coupling) column.
pub const GOOD_CAVITY_R: f64 = 10.0;

pub const FIGURES: [u32; 8] = [2, 3, 4, 5, 6, 7, 8, 9];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PanelKind {
    Trajectory,
    Sweep,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub name: String,
    pub kind: PanelKind,
    /// Keys set by the preset; user layers go on top.
    pub preset: Flat,
    pub series: Vec<Series>,
    /// Parameters chosen here rather than read off a caption.
    pub inferred: Vec<String>,
    /// Grid slot in the plot layout, or the panel this one is inset into.
    pub slot: Slot,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Slot {
    Grid(usize),
    Inset(String),
}

fn flat(pairs: &[(&str, Value)]) -> Flat {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn s(x: &str) -> Value {
    Value::String(x.into())
}

fn f(x: f64) -> Value {
    Value::Float(x)
}

fn i(n: i64) -> Value {
    Value::Integer(n)
}

fn delta_series(deltas: &[f64]) -> Vec<Series> {
    deltas
        .iter()
        .map(|&d| Series::new(format!("d{d}"), &[("deltaA", f(d)), ("deltaB", f(d))]))
        .collect()
}

fn delta_b_series(delta_a: f64, deltas_b: &[f64]) -> Vec<Series> {
    deltas_b
        .iter()
        .map(|&d| Series::new(format!("dB{d}"), &[("deltaA", f(delta_a)), ("deltaB", f(d))]))
        .collect()
}

fn horizon_note(h_bad: f64, h_good: f64) -> String {
    format!("horizon {h_bad} (R = {BAD_CAVITY_R}) and {h_good} (R = {GOOD_CAVITY_R}) chosen to show the dynamics")
}

fn r_note() -> String {
    format!("weak-coupling R = {BAD_CAVITY_R} inferred from the quoted vanishing times and thresholds")
}

/// Six trajectory panels: rows differ in `r_A^2`, columns in `R`.
fn bell_grid(measure: &str, ra2: [f64; 3], grid_points: i64, ra_note: &str) -> Vec<Panel> {
    let names = ["a", "b", "c", "d", "e", "f"];
    let (h_bad, h_good) = (20.0, 2.0);
    let mut panels = Vec::new();
    for (slot, name) in names.iter().enumerate() {
        let bad = slot % 2 == 0;
        let (r, h) = if bad { (BAD_CAVITY_R, h_bad) } else { (GOOD_CAVITY_R, h_good) };
        let mut inferred = vec![horizon_note(h_bad, h_good), ra_note.to_string()];
        if bad {
            inferred.push(r_note());
        }
        panels.push(Panel {
            name: name.to_string(),
            kind: PanelKind::Trajectory,
            preset: flat(&[
                ("initial_state", s("psi+")),
                ("R", f(r)),
                ("rA2", f(ra2[slot / 2])),
                ("horizon", f(h)),
                ("grid_points", i(grid_points)),
                ("measures", Value::Array(vec![s(measure)])),
            ]),
            series: delta_series(&[0.0, 10.0, 20.0, 30.0]),
            inferred,
            slot: Slot::Grid(slot),
        });
    }
    panels
}

/// Six trajectory panels with unequal detunings at `r_A^2 = 1/2`.
fn detuning_grid(measure: &str) -> Vec<Panel> {
    let names = ["a", "b", "c", "d", "e", "f"];
    let (h_bad, h_good) = (20.0, 2.0);
    let mut panels = Vec::new();
    for (slot, name) in names.iter().enumerate() {
        let bad = slot % 2 == 0;
        let (r, h) = if bad { (BAD_CAVITY_R, h_bad) } else { (GOOD_CAVITY_R, h_good) };
        let mut inferred = vec![horizon_note(h_bad, h_good)];
        let series = match slot / 2 {
            0 => delta_b_series(0.0, &[0.0, 10.0, 20.0]),
            row => {
                let da = 10.0 * row as f64;
                inferred.push(format!("deltaA = {da} for panels {}", if row == 1 { "c, d" } else { "e, f" }));
                delta_b_series(da, &[-da, 0.0, da])
            }
        };
        if bad {
            inferred.push(r_note());
        }
        panels.push(Panel {
            name: name.to_string(),
            kind: PanelKind::Trajectory,
            preset: flat(&[
                ("initial_state", s("psi+")),
                ("R", f(r)),
                ("rA2", f(0.5)),
                ("horizon", f(h)),
                ("grid_points", i(1001)),
                ("measures", Value::Array(vec![s(measure)])),
            ]),
            series,
            inferred,
            slot: Slot::Grid(slot),
        });
    }
    panels
}

/// Generation from `|10>`: trajectories on top, maxima versus detuning at
/// the bottom, maxima versus `r_A^2` as insets.
fn generation_grid(measure: &str, reducer: &str, threshold: Option<f64>) -> Vec<Panel> {
    let (h_bad, h_good) = (500.0, 10.0);
    let mut panels = Vec::new();
    for (slot, (name, r, h, points)) in [("a", BAD_CAVITY_R, h_bad, 5001), ("b", GOOD_CAVITY_R, h_good, 2001)]
        .into_iter()
        .enumerate()
    {
        let mut inferred = vec![horizon_note(h_bad, h_good)];
        if r == BAD_CAVITY_R {
            inferred.push(r_note());
        }
        panels.push(Panel {
            name: name.into(),
            kind: PanelKind::Trajectory,
            preset: flat(&[
                ("initial_state", s("10")),
                ("R", f(r)),
                ("rA2", f(0.5)),
                ("horizon", f(h)),
                ("grid_points", i(points)),
                ("measures", Value::Array(vec![s(measure)])),
            ]),
            series: delta_series(&[0.0, 10.0, 20.0, 30.0]),
            inferred,
            slot: Slot::Grid(slot),
        });
    }
    let sweep_keys = |r: f64, variable: &str, start: f64, stop: f64, points: i64| {
        let mut m = flat(&[
            ("initial_state", s("10")),
            ("R", f(r)),
            ("rA2", f(0.5)),
            ("sweep.variable", s(variable)),
            ("sweep.start", f(start)),
            ("sweep.stop", f(stop)),
            ("sweep.points", i(points)),
            ("sweep.reducer", s(reducer)),
            ("sweep.measure", s("tr")),
        ]);
        if let Some(t) = threshold {
            m.insert("sweep.threshold".into(), f(t));
        }
        m
    };
    for (slot, (name, r)) in [("c", BAD_CAVITY_R), ("d", GOOD_CAVITY_R)].into_iter().enumerate() {
        let mut inferred = vec!["detuning range 0..80 in steps of 0.5".to_string()];
        if r == BAD_CAVITY_R {
            inferred.push(r_note());
        }
        panels.push(Panel {
            name: name.into(),
            kind: PanelKind::Sweep,
            preset: sweep_keys(r, "delta", 0.0, 80.0, 161),
            series: vec![Series::base()],
            inferred: inferred.clone(),
            slot: Slot::Grid(slot + 2),
        });
        panels.push(Panel {
            name: format!("{name}_inset"),
            kind: PanelKind::Sweep,
            preset: sweep_keys(r, "rA2", 0.02, 0.98, 25),
            series: delta_series(&[0.0, 20.0]),
            inferred: vec!["r_A^2 grid 0.02..0.98 in steps of 0.04".to_string()],
            slot: Slot::Inset(name.into()),
        });
    }
    panels
}

pub fn preset_panels(figure: u32) -> Result<Vec<Panel>> {
    let ra_text = "r_A^2 = 0.75, 0.5, 0.25 for rows (a, b), (c, d), (e, f)";
    Ok(match figure {
        2 => bell_grid("tr", [0.75, 0.5, 0.25], 1001, ra_text),
        3 => bell_grid("re", [0.75, 0.5, 0.25], 401, ra_text),
        4 => bell_grid("g", [0.75, 0.5, 0.25], 401, ra_text),
        5 => detuning_grid("tr"),
        6 => generation_grid("tr", "naqi_max", None),
        7 => bell_grid("fa", [1.0, 0.75, 0.5], 1001, "r_A^2 = 1, 0.75, 0.5 for rows (a, b), (c, d), (e, f)"),
        8 => detuning_grid("fa"),
        9 => generation_grid("fa", "dia_max", Some(0.98)),
        other => {
            return Err(Error::config(
                "figure",
                format!("no preset for figure {other}; choose one of {FIGURES:?}"),
            ))
        }
    })
}

fn layout(panels: &[Panel]) -> (usize, usize) {
    let slots = panels
        .iter()
        .filter_map(|p| match p.slot {
            Slot::Grid(k) => Some(k + 1),
            Slot::Inset(_) => None,
        })
        .max()
        .unwrap_or(1);
    (slots.div_ceil(2), 2)
}

/// Tables for every panel of `figure`, in panel order.
pub fn figure_tables(figure: u32, user: &Flat) -> Result<Vec<(Panel, super::ResultTable)>> {
    let panels = preset_panels(figure)?;
    let tables = panels
        .par_iter()
        .map(|p| {
            let cfg = ScenarioConfig::from_layers(&[&p.preset, user])?;
            let mut table = match p.kind {
                PanelKind::Trajectory => trajectory_table(&cfg, &p.series)?,
                PanelKind::Sweep => sweep_table(&cfg, &p.series)?,
            };
            table.set_meta("preset.figure", figure.to_string());
            table.set_meta("preset.panel", p.name.clone());
            let notes = Value::Array(p.inferred.iter().map(|n| s(n)).collect());
            table.set_meta("preset.inferred", notes.to_string());
            Ok(table)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(panels.into_iter().zip(tables).collect())
}

/// Writes `fig<k>_<panel>.csv` for each panel and `fig<k>_plot.py`.
pub fn run_figure(figure: u32, user: &Flat, out: &Path) -> Result<Vec<PathBuf>> {
    let tables = figure_tables(figure, user)?;
    std::fs::create_dir_all(out)?;
    let mut written = Vec::new();
    for (panel, table) in &tables {
        let path = out.join(format!("fig{figure}_{}.csv", panel.name));
        table.write(&path)?;
        written.push(path);
    }
    let panels: Vec<Panel> = tables.into_iter().map(|(p, _)| p).collect();
    let script = out.join(format!("fig{figure}_plot.py"));
    std::fs::write(&script, plot_script(figure, &panels))?;
    written.push(script);
    Ok(written)
}

pub fn plot_script(figure: u32, panels: &[Panel]) -> String {
    let (rows, cols) = layout(panels);
    let mut listing = String::new();
    for p in panels {
        let kind = match p.kind {
            PanelKind::Trajectory => "trajectory",
            PanelKind::Sweep => "sweep",
        };
        let (slot, host) = match &p.slot {
            Slot::Grid(k) => (k.to_string(), "None".to_string()),
            Slot::Inset(h) => ("None".to_string(), format!("\"{h}\"")),
        };
        writeln!(listing, "    (\"{}\", \"{kind}\", {slot}, {host}),", p.name).expect("string write");
    }
    PLOT_TEMPLATE
        .replace("{figure}", &figure.to_string())
        .replace("{rows}", &rows.to_string())
        .replace("{cols}", &cols.to_string())
        .replace("{panels}", listing.trim_end())
}

const PLOT_TEMPLATE: &str = r##""""Lay out the panels of figure {figure} from the CSV files next to this script."""
import csv
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = pathlib.Path(__file__).resolve().parent
FIGURE = {figure}
LAYOUT = ({rows}, {cols})
PANELS = [
{panels}
]
STYLES = ["-k", "--r", "-.b", ":g"]
MARKERS = ["s", "D", "o", "^"]
SKIP = ("t_max", "at_boundary")


def load(name):
    with open(HERE / f"fig{FIGURE}_{name}.csv") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    data = [[float(x) for x in row] for row in reader]
    return header, list(zip(*data))


def draw(ax, name, kind):
    header, cols = load(name)
    x = cols[0]
    k = 0
    for j, h in enumerate(header[1:], start=1):
        if h.startswith("bound_"):
            ax.axhline(cols[j][0], ls="--", color="gray", lw=0.8)
        elif h.split("[")[0] not in SKIP:
            if kind == "trajectory":
                ax.plot(x, cols[j], STYLES[k % len(STYLES)], lw=1, label=h)
            else:
                ax.plot(x, cols[j], marker=MARKERS[k % len(MARKERS)], ms=3, lw=0.8, label=h)
            k += 1
    ax.set_xlabel(header[0])
    ax.set_title(f"({name})", fontsize=8)
    ax.legend(fontsize=6)


fig, axes = plt.subplots(*LAYOUT, figsize=(4.5 * LAYOUT[1], 3.2 * LAYOUT[0]), squeeze=False)
axes = axes.ravel()
hosts = {}
for name, kind, slot, host in PANELS:
    if host is None:
        draw(axes[slot], name, kind)
        hosts[name] = axes[slot]
for name, kind, slot, host in PANELS:
    if host is not None:
        draw(hosts[host].inset_axes([0.55, 0.12, 0.4, 0.4]), name, kind)
fig.tight_layout()
fig.savefig(HERE / f"fig{FIGURE}.pdf")
"##;

//! Reproduction harness: trajectories, sweeps, bounds, Zeno tables, figure
//! presets and a verifier that re-derives rows of emitted tables.

pub mod config;
pub mod figures;
pub mod table;

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use toml::Value;

use crate::cavity::{stationary_amplitudes, zeno_rate, zeno_survival, ZenoSpec};
use crate::dia::assisted_fidelity;
use crate::error::{Error, Result};
use crate::measures::{mub_sum_bound, verify_bound, MeasureKind};
use crate::naqi::NaqiOptimizer;
use crate::optim::{bisect, golden_max};
use crate::qstate::{assemble_single_excitation, TwoQubitState};
use crate::scenario::{dia_max_over_time, naqi_max_over_time, Engine, TimeMax};

pub use config::{linspace, Flat, Quantity, Reducer, ScenarioConfig, SweepVariable};
pub use table::ResultTable;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A labelled variant of a base config. Each series contributes its own
/// group of columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub overrides: Flat,
}

impl Series {
    pub fn base() -> Self {
        Self {
            label: String::new(),
            overrides: Flat::new(),
        }
    }

    pub fn new(label: impl Into<String>, pairs: &[(&str, Value)]) -> Self {
        Self {
            label: label.into(),
            overrides: pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
        }
    }

    fn column(&self, name: &str) -> String {
        if self.label.is_empty() {
            name.to_string()
        } else {
            format!("{name}[{}]", self.label)
        }
    }

    fn resolve(&self, base: &ScenarioConfig) -> Result<ScenarioConfig> {
        if self.overrides.is_empty() {
            Ok(base.clone())
        } else {
            base.with(&self.overrides)
        }
    }
}

fn stamp(table: &mut ResultTable, command: &str, cfg: &ScenarioConfig, series: &[Series]) {
    table.set_meta("command", command);
    table.set_meta("version", VERSION);
    table.set_meta("seed", cfg.seed.to_string());
    for (k, v) in cfg.to_flat() {
        table.set_meta(format!("config.{k}"), v.to_string());
    }
    if series.len() > 1 || series.first().is_some_and(|s| !s.label.is_empty()) {
        let labels = Value::Array(series.iter().map(|s| Value::String(s.label.clone())).collect());
        table.set_meta("series", labels.to_string());
        for s in series {
            table.set_meta(format!("series.{}", s.label), config::render_inline(&s.overrides));
        }
    }
}

fn naqi_kinds(cfg: &ScenarioConfig) -> Vec<MeasureKind> {
    let mut kinds = Vec::new();
    for q in &cfg.measures {
        if let Quantity::Naqi(k) = q {
            if !kinds.contains(k) {
                kinds.push(*k);
            }
        }
    }
    kinds
}

fn optimizer(cfg: &ScenarioConfig) -> Result<NaqiOptimizer> {
    NaqiOptimizer::new(cfg.naqi_config()).map_err(|e| Error::config("optimizer", e.to_string()))
}

fn quantity_value(q: Quantity, state: &TwoQubitState, opt: &NaqiOptimizer) -> f64 {
    match q {
        Quantity::Naqi(k) => opt.value(state, k),
        Quantity::Fidelity => assisted_fidelity(state).fidelity,
    }
}

/// One vector per requested quantity, evaluated on `times`.
pub fn trajectory_values(cfg: &ScenarioConfig, times: &[f64]) -> Result<Vec<Vec<f64>>> {
    let dynamics = cfg.dynamics()?;
    let traj = dynamics.trajectory(times)?;
    let opt = optimizer(cfg)?;
    Ok(cfg
        .measures
        .iter()
        .map(|&q| traj.states.par_iter().map(|s| quantity_value(q, s, &opt)).collect())
        .collect())
}

fn check_shared_grid(base: &ScenarioConfig, cfg: &ScenarioConfig) -> Result<()> {
    if cfg.horizon != base.horizon || cfg.grid_points != base.grid_points || cfg.measures != base.measures {
        return Err(Error::config("series", "series may not change horizon, grid_points or measures"));
    }
    Ok(())
}

fn trajectory_columns(base: &ScenarioConfig, series: &[Series]) -> Vec<String> {
    let mut cols = vec!["lambda_t".to_string()];
    for s in series {
        cols.extend(base.measures.iter().map(|q| s.column(&q.column())));
    }
    cols.extend(naqi_kinds(base).iter().map(|k| format!("bound_{}", k.short_name())));
    cols
}

/// Quantities versus `λt`: columns `lambda_t`, one per quantity and series,
/// then one bound column per NAQI measure.
pub fn trajectory_table(base: &ScenarioConfig, series: &[Series]) -> Result<ResultTable> {
    let times = base.times();
    let mut groups = Vec::with_capacity(series.len());
    for s in series {
        let cfg = s.resolve(base)?;
        check_shared_grid(base, &cfg)?;
        groups.push(trajectory_values(&cfg, &times)?);
    }
    let bounds: Vec<f64> = naqi_kinds(base).into_iter().map(mub_sum_bound).collect();
    let mut table = ResultTable::new(trajectory_columns(base, series));
    for (i, &t) in times.iter().enumerate() {
        let mut row = vec![t];
        for g in &groups {
            row.extend(g.iter().map(|col| col[i]));
        }
        row.extend(&bounds);
        table.push_row(row)?;
    }
    stamp(&mut table, "trajectory", base, series);
    Ok(table)
}

pub fn run_trajectory(cfg: &ScenarioConfig) -> Result<ResultTable> {
    trajectory_table(cfg, &[Series::base()])
}

fn trajectory_row(base: &ScenarioConfig, series: &[Series], row: usize) -> Result<Vec<f64>> {
    let times = base.times();
    let t = *times
        .get(row)
        .ok_or_else(|| Error::Table(format!("row {row} beyond the time grid")))?;
    let mut out = vec![t];
    for s in series {
        let cfg = s.resolve(base)?;
        // The integrator must retrace the same steps, so it replays the prefix.
        let span = if cfg.engine == Engine::Pseudomode {
            &times[..=row]
        } else {
            &times[row..=row]
        };
        out.extend(trajectory_values(&cfg, span)?.iter().map(|v| *v.last().expect("non-empty span")));
    }
    out.extend(naqi_kinds(base).into_iter().map(mub_sum_bound));
    Ok(out)
}

/// Located sweep feature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feature {
    pub x: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub x: f64,
    pub rising: bool,
}

/// Local minimum of a sweep. `prominence` is the drop from the lower of
/// the highest samples on either side, up to the neighbouring minima.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cusp {
    pub x: f64,
    pub value: f64,
    pub prominence: f64,
}

fn first_rising(crossings: &[Crossing]) -> Option<f64> {
    crossings.iter().find(|c| c.rising).map(|c| c.x)
}

fn sustained(crossings: &[Crossing]) -> Option<f64> {
    crossings.last().filter(|c| c.rising).map(|c| c.x)
}

/// Evaluates the sweep reducer of a config at single points.
pub struct SweepEvaluator {
    cfg: ScenarioConfig,
    coarse: NaqiOptimizer,
    full: NaqiOptimizer,
}

impl SweepEvaluator {
    pub fn new(cfg: &ScenarioConfig) -> Result<Self> {
        let coarse =
            NaqiOptimizer::new(cfg.coarse_naqi_config()).map_err(|e| Error::config("optimizer", e.to_string()))?;
        Ok(Self {
            cfg: cfg.clone(),
            coarse,
            full: optimizer(cfg)?,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn columns(&self) -> Vec<String> {
        let m = self.cfg.sweep.measure.short_name();
        match self.cfg.sweep.reducer {
            Reducer::NaqiMax => vec![format!("N_{m}_max"), "t_max".into(), "at_boundary".into()],
            Reducer::DiaMax => vec!["F_a_max".into(), "t_max".into(), "at_boundary".into()],
            Reducer::NaqiStationary => vec![format!("N_{m}_stat")],
            Reducer::DiaStationary => vec!["F_a_stat".into()],
        }
    }

    /// Config with the sweep variable set to `x`.
    pub fn config_at(&self, x: f64) -> Result<ScenarioConfig> {
        let mut c = self.cfg.clone();
        match self.cfg.sweep.variable {
            SweepVariable::Delta => {
                c.delta_a = x;
                c.delta_b = x;
            }
            SweepVariable::DeltaB => c.delta_b = x,
            SweepVariable::RA2 => c.r_a2 = x,
            SweepVariable::RA => c.r_a2 = x * x,
        }
        c.validate()?;
        Ok(c)
    }

    /// Reducer outputs at `x`, in the order of [`Self::columns`].
    pub fn eval(&self, x: f64) -> Result<Vec<f64>> {
        let c = self.config_at(x)?;
        let kind = self.cfg.sweep.measure;
        let pack = |m: TimeMax| vec![m.value, m.time, if m.at_boundary { 1.0 } else { 0.0 }];
        match self.cfg.sweep.reducer {
            Reducer::NaqiMax => {
                let dynamics = c.dynamics()?;
                let scan = c.time_scan()?;
                Ok(pack(naqi_max_over_time(&dynamics, kind, &scan, &self.coarse, &self.full)?))
            }
            Reducer::DiaMax => {
                let dynamics = c.dynamics()?;
                Ok(pack(dia_max_over_time(&dynamics, &c.time_scan()?)?))
            }
            Reducer::NaqiStationary | Reducer::DiaStationary => {
                let (c10, c20) = c
                    .initial
                    .single_excitation()
                    .ok_or_else(|| Error::config("initial_state", "stationary sweeps need a single-excitation state"))?;
                let params = c.params()?;
                if !params.equal_detunings() {
                    return Err(Error::config("deltaB", "stationary limit needs equal detunings"));
                }
                let (s1, s2) = stationary_amplitudes(c10, c20, &params);
                let rho = assemble_single_excitation(s1, s2)?;
                Ok(vec![if self.cfg.sweep.reducer == Reducer::NaqiStationary {
                    self.full.value(&rho, kind)
                } else {
                    assisted_fidelity(&rho).fidelity
                }])
            }
        }
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        Ok(self.eval(x)?[0])
    }

    fn xtol(&self) -> f64 {
        1e-5 * (self.cfg.sweep.stop - self.cfg.sweep.start).abs().max(1.0)
    }

    /// Every crossing of `level` between neighbouring samples, refined by
    /// bisection.
    pub fn crossings(&self, xs: &[f64], values: &[f64], level: f64) -> Result<Vec<Crossing>> {
        let mut out = Vec::new();
        for i in 0..values.len().saturating_sub(1) {
            let rising = values[i] <= level && values[i + 1] > level;
            let falling = values[i] > level && values[i + 1] <= level;
            if !(rising || falling) {
                continue;
            }
            let mut err = None;
            let root = bisect(
                |x| match self.value(x) {
                    Ok(v) => v - level,
                    Err(e) => {
                        err.get_or_insert(e);
                        0.0
                    }
                },
                xs[i],
                xs[i + 1],
                self.xtol(),
            );
            if let Some(e) = err {
                return Err(e);
            }
            if let Some(x) = root {
                out.push(Crossing { x, rising });
            }
        }
        Ok(out)
    }

    /// First upward crossing of `level`, the point past which the reduced
    /// quantity first exceeds it.
    pub fn threshold(&self, xs: &[f64], values: &[f64], level: f64) -> Result<Option<f64>> {
        Ok(first_rising(&self.crossings(xs, values, level)?))
    }

    /// Start of the final stretch above `level`: the last crossing, provided
    /// it is upward.
    pub fn onset(&self, xs: &[f64], values: &[f64], level: f64) -> Result<Option<f64>> {
        Ok(sustained(&self.crossings(xs, values, level)?))
    }

    fn refine(&self, xs: &[f64], i: usize, sign: f64) -> Result<Feature> {
        let lo = i.saturating_sub(1);
        let hi = (i + 1).min(xs.len() - 1);
        let mut err = None;
        let (x, v) = golden_max(
            |x| match self.value(x) {
                Ok(v) => sign * v,
                Err(e) => {
                    err.get_or_insert(e);
                    f64::NEG_INFINITY
                }
            },
            xs[lo],
            xs[hi],
            self.xtol(),
        );
        if let Some(e) = err {
            return Err(e);
        }
        Ok(Feature { x, value: sign * v })
    }

    /// Global maximum of the samples refined by golden-section search.
    pub fn peak(&self, xs: &[f64], values: &[f64]) -> Result<Feature> {
        let i = (0..values.len())
            .max_by(|&a, &b| values[a].total_cmp(&values[b]).then(b.cmp(&a)))
            .ok_or_else(|| Error::Table("empty sweep".into()))?;
        let f = self.refine(xs, i, 1.0)?;
        Ok(if values[i] >= f.value {
            Feature { x: xs[i], value: values[i] }
        } else {
            f
        })
    }

    /// Interior local minima of the samples, each refined.
    pub fn cusps(&self, xs: &[f64], values: &[f64]) -> Result<Vec<Cusp>> {
        let minima: Vec<usize> = (1..values.len().saturating_sub(1))
            .filter(|&i| values[i] < values[i - 1] && values[i] <= values[i + 1])
            .collect();
        let span_max = |a: usize, b: usize| values[a..=b].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        minima
            .iter()
            .enumerate()
            .map(|(j, &i)| {
                let f = self.refine(xs, i, -1.0)?;
                let f = if values[i] <= f.value {
                    Feature { x: xs[i], value: values[i] }
                } else {
                    f
                };
                let lo = if j == 0 { 0 } else { minima[j - 1] };
                let hi = minima.get(j + 1).copied().unwrap_or(values.len() - 1);
                Ok(Cusp {
                    x: f.x,
                    value: f.value,
                    prominence: span_max(lo, i).min(span_max(i, hi)) - f.value,
                })
            })
            .collect()
    }

    /// Crossing level used for tables: explicit, else the bound for NAQI.
    pub fn default_level(&self) -> Option<f64> {
        self.cfg.sweep.threshold.or(match self.cfg.sweep.reducer {
            Reducer::NaqiMax => Some(mub_sum_bound(self.cfg.sweep.measure)),
            _ => None,
        })
    }
}

fn feature_value(f: &Feature) -> String {
    Value::Array(vec![Value::Float(f.x), Value::Float(f.value)]).to_string()
}

/// Reduced quantity versus the sweep variable, one column group per series.
/// Threshold, peak and cusp locations are recorded under `analysis.*`.
pub fn sweep_table(base: &ScenarioConfig, series: &[Series]) -> Result<ResultTable> {
    let s = &base.sweep;
    let xs = linspace(s.start, s.stop, s.points);
    let mut cols = vec![s.variable.name().to_string()];
    let mut groups = Vec::with_capacity(series.len());
    let mut analysis = Vec::new();
    for ser in series {
        let cfg = ser.resolve(base)?;
        if cfg.sweep != base.sweep {
            return Err(Error::config("series", "series may not change sweep settings"));
        }
        let ev = SweepEvaluator::new(&cfg)?;
        cols.extend(ev.columns().iter().map(|c| ser.column(c)));
        let rows = xs.par_iter().map(|&x| ev.eval(x)).collect::<Result<Vec<_>>>()?;
        let values: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        let tag = if ser.label.is_empty() { "main" } else { ser.label.as_str() };
        if xs.len() >= 3 {
            if let Some(level) = ev.default_level() {
                let crossings = ev.crossings(&xs, &values, level)?;
                let text = |x: Option<f64>| x.map_or_else(|| "none".to_string(), |x| Value::Float(x).to_string());
                analysis.push((format!("analysis.{tag}.threshold"), text(first_rising(&crossings))));
                analysis.push((format!("analysis.{tag}.onset"), text(sustained(&crossings))));
                let list: Vec<String> = crossings
                    .iter()
                    .map(|c| format!("[{}, {}]", Value::Float(c.x), if c.rising { 1 } else { -1 }))
                    .collect();
                analysis.push((format!("analysis.{tag}.crossings"), format!("[{}]", list.join(", "))));
            }
            analysis.push((format!("analysis.{tag}.peak"), feature_value(&ev.peak(&xs, &values)?)));
            let cusps = ev.cusps(&xs, &values)?;
            let list: Vec<String> = cusps
                .iter()
                .map(|c| Value::Array(vec![Value::Float(c.x), Value::Float(c.value), Value::Float(c.prominence)]).to_string())
                .collect();
            analysis.push((format!("analysis.{tag}.cusps"), format!("[{}]", list.join(", "))));
        }
        groups.push(rows);
    }
    let mut table = ResultTable::new(cols);
    for (i, &x) in xs.iter().enumerate() {
        let mut row = vec![x];
        for g in &groups {
            row.extend(&g[i]);
        }
        table.push_row(row)?;
    }
    stamp(&mut table, "sweep", base, series);
    for (k, v) in analysis {
        table.set_meta(k, v);
    }
    Ok(table)
}

pub fn run_sweep(cfg: &ScenarioConfig) -> Result<ResultTable> {
    sweep_table(cfg, &[Series::base()])
}

fn sweep_row(base: &ScenarioConfig, series: &[Series], row: usize) -> Result<Vec<f64>> {
    let s = &base.sweep;
    let xs = linspace(s.start, s.stop, s.points);
    let x = *xs
        .get(row)
        .ok_or_else(|| Error::Table(format!("row {row} beyond the sweep grid")))?;
    let mut out = vec![x];
    for ser in series {
        out.extend(SweepEvaluator::new(&ser.resolve(base)?)?.eval(x)?);
    }
    Ok(out)
}

/// MUB-sum bounds with their numerical verification, one row per measure
/// (`measure` = 0 trace norm, 1 relative entropy, 2 geometric).
pub fn run_bounds(cfg: &ScenarioConfig) -> Result<ResultTable> {
    let mut table = ResultTable::new(
        ["measure", "mub_sum_bound", "verified", "bloch_x", "bloch_y", "bloch_z", "converged"]
            .map(String::from)
            .to_vec(),
    );
    let rows: Vec<Vec<f64>> = MeasureKind::ALL.par_iter().map(|&k| bounds_row(k)).collect();
    for r in rows {
        table.push_row(r)?;
    }
    stamp(&mut table, "bounds", cfg, &[Series::base()]);
    table.set_meta("measure_order", "[\"tr\", \"re\", \"g\"]");
    Ok(table)
}

fn bounds_row(kind: MeasureKind) -> Vec<f64> {
    let idx = MeasureKind::ALL.iter().position(|&k| k == kind).expect("listed") as f64;
    let check = verify_bound(kind);
    vec![
        idx,
        mub_sum_bound(kind),
        check.value,
        check.bloch[0],
        check.bloch[1],
        check.bloch[2],
        if check.converged { 1.0 } else { 0.0 },
    ]
}

fn zeno_inputs(cfg: &ScenarioConfig) -> Result<(C64, C64, crate::cavity::CavityParams)> {
    let (c10, c20) = cfg
        .initial
        .single_excitation()
        .ok_or_else(|| Error::config("initial_state", "Zeno tables need a single-excitation state"))?;
    let params = cfg.params()?;
    if !params.equal_detunings() {
        return Err(Error::config("deltaB", "Zeno tables need equal detunings"));
    }
    Ok((c10, c20, params))
}

fn zeno_row(cfg: &ScenarioConfig, n: u32) -> Result<Vec<f64>> {
    let (c10, c20, params) = zeno_inputs(cfg)?;
    let t = cfg.zeno.interval;
    let spec = ZenoSpec::new(t, n, c10, c20)?;
    let rate = zeno_rate(t, &params, c10, c20)?;
    let total = n as f64 * t;
    Ok(vec![n as f64, total, zeno_survival(&spec, &params)?, (-rate * total).exp(), rate])
}

/// Survival under `N = 1..count` projective checks at the configured interval.
pub fn run_zeno(cfg: &ScenarioConfig) -> Result<ResultTable> {
    let mut table = ResultTable::new(
        ["n", "lambda_t", "survival", "exp_rate", "rate"].map(String::from).to_vec(),
    );
    for n in 1..=cfg.zeno.count {
        table.push_row(zeno_row(cfg, n)?)?;
    }
    stamp(&mut table, "zeno", cfg, &[Series::base()]);
    Ok(table)
}

/// Config and series recovered from a table's metadata.
pub fn table_config(table: &ResultTable) -> Result<(ScenarioConfig, Vec<Series>)> {
    let mut flat = Flat::new();
    for (k, v) in &table.meta {
        if let Some(key) = k.strip_prefix("config.") {
            let (_, value) = config::parse_assignment(&format!("x = {v}"))?;
            flat.insert(key.to_string(), value);
        }
    }
    if flat.is_empty() {
        return Err(Error::Table("table carries no config".into()));
    }
    let cfg = ScenarioConfig::from_layers(&[&flat])?;
    let series = match table.meta_value("series") {
        None => vec![Series::base()],
        Some(list) => {
            let (_, labels) = config::parse_assignment(&format!("x = {list}"))?;
            let Value::Array(labels) = labels else {
                return Err(Error::Table("series must be a list".into()));
            };
            labels
                .iter()
                .map(|l| {
                    let label = l.as_str().ok_or_else(|| Error::Table("series labels are strings".into()))?;
                    let key = format!("series.{label}");
                    let raw = table
                        .meta_value(&key)
                        .ok_or_else(|| Error::Table(format!("missing `{key}`")))?;
                    Ok(Series {
                        label: label.to_string(),
                        overrides: config::parse_inline(raw)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok((cfg, series))
}

/// Recomputes one row of a table from its embedded config.
pub fn rederive_row(table: &ResultTable, row: usize) -> Result<Vec<f64>> {
    let (cfg, series) = table_config(table)?;
    match table.meta_value("command") {
        Some("trajectory") => trajectory_row(&cfg, &series, row),
        Some("sweep") => sweep_row(&cfg, &series, row),
        Some("bounds") => {
            let kind = *MeasureKind::ALL
                .get(row)
                .ok_or_else(|| Error::Table(format!("row {row} beyond the bounds table")))?;
            Ok(bounds_row(kind))
        }
        Some("zeno") => {
            let n = u32::try_from(row + 1).map_err(|_| Error::Table("row out of range".into()))?;
            zeno_row(&cfg, n)
        }
        other => Err(Error::Table(format!("cannot verify command {other:?}"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub rows: Vec<usize>,
    /// Largest absolute difference over the checked entries.
    pub max_deviation: f64,
    pub tolerance: f64,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.max_deviation <= self.tolerance
    }
}

/// Re-derives `count` rows picked with the table's seed and compares them
/// entry by entry.
pub fn verify_table(table: &ResultTable, count: usize, tolerance: f64) -> Result<VerifyReport> {
    let (cfg, _) = table_config(table)?;
    let n = table.rows.len();
    if n == 0 {
        return Err(Error::Table("table has no rows".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = rand::seq::index::sample(&mut rng, n, count.min(n)).into_vec();
    rows.sort_unstable();
    let mut max_deviation: f64 = 0.0;
    for &r in &rows {
        let fresh = rederive_row(table, r)?;
        if fresh.len() != table.columns.len() {
            return Err(Error::Table(format!(
                "re-derived row has {} values for {} columns",
                fresh.len(),
                table.columns.len()
            )));
        }
        for (a, b) in fresh.iter().zip(&table.rows[r]) {
            let d = if a.is_nan() && b.is_nan() { 0.0 } else { (a - b).abs() };
            max_deviation = max_deviation.max(if d.is_nan() { f64::INFINITY } else { d });
        }
    }
    Ok(VerifyReport {
        rows,
        max_deviation,
        tolerance,
    })
}

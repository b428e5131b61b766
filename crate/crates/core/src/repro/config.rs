//! Flat key-value scenario configuration.
//!
//! Files are TOML; nested tables and dotted keys flatten to the same dotted
//! names that `--set key=value` uses, so
//!
//! ```toml
//! R = 10.0
//! optimizer.starts = 4
//! [sweep]
//! variable = "delta"
//! ```
//!
//! and `--set optimizer.starts=4 --set sweep.variable=delta` are equivalent.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use toml::Value;

use crate::cavity::CavityParams;
use crate::error::{Error, Result};
use crate::measures::MeasureKind;
use crate::naqi::NaqiConfig;
use crate::scenario::{Dynamics, Engine, InitialState, Scenario, TimeScan};

/// Dotted key to value, the form every layer is reduced to.
pub type Flat = BTreeMap<String, Value>;

/// A quantity evaluated along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Naqi(MeasureKind),
    Fidelity,
}

impl Quantity {
    pub fn column(self) -> String {
        match self {
            Quantity::Naqi(k) => format!("N_{}", k.short_name()),
            Quantity::Fidelity => "F_a".into(),
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Naqi(k) => f.write_str(k.short_name()),
            Quantity::Fidelity => f.write_str("fa"),
        }
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fa" | "f_a" | "dia" | "fidelity" => Ok(Quantity::Fidelity),
            other => other
                .trim_start_matches("n_")
                .parse::<MeasureKind>()
                .map(Quantity::Naqi)
                .map_err(|_| Error::InvalidParams(format!("unknown quantity `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// Common detuning `δ_A = δ_B`.
    Delta,
    DeltaB,
    RA2,
    RA,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::Delta => "delta",
            SweepVariable::DeltaB => "deltaB",
            SweepVariable::RA2 => "rA2",
            SweepVariable::RA => "rA",
        }
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "delta" => Ok(SweepVariable::Delta),
            "deltaB" => Ok(SweepVariable::DeltaB),
            "rA2" => Ok(SweepVariable::RA2),
            "rA" => Ok(SweepVariable::RA),
            other => Err(Error::InvalidParams(format!("unknown sweep variable `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reducer {
    /// Maximum NAQI over time.
    NaqiMax,
    /// Maximum assisted fidelity over time.
    DiaMax,
    /// NAQI of the long-time state.
    NaqiStationary,
    /// Assisted fidelity of the long-time state.
    DiaStationary,
}

impl Reducer {
    pub fn name(self) -> &'static str {
        match self {
            Reducer::NaqiMax => "naqi_max",
            Reducer::DiaMax => "dia_max",
            Reducer::NaqiStationary => "naqi_stationary",
            Reducer::DiaStationary => "dia_stationary",
        }
    }
}

impl FromStr for Reducer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "naqi_max" => Ok(Reducer::NaqiMax),
            "dia_max" => Ok(Reducer::DiaMax),
            "naqi_stationary" => Ok(Reducer::NaqiStationary),
            "dia_stationary" => Ok(Reducer::DiaStationary),
            other => Err(Error::InvalidParams(format!("unknown reducer `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerSettings {
    pub theta_points: usize,
    pub phi_points: usize,
    pub twist_points: usize,
    pub starts: usize,
    pub top_k: usize,
    pub tolerance: f64,
    pub third_angle: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub reducer: Reducer,
    pub measure: MeasureKind,
    /// Lower limit of the automatic time horizon of each sweep point.
    pub horizon_floor: f64,
    /// Largest amplitude change between time samples.
    pub resolution: f64,
    /// Crossing level reported for the sweep; `None` means the NAQI bound
    /// for `naqi_max` and nothing otherwise.
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZenoSettings {
    pub interval: f64,
    pub count: u32,
}

/// Fully resolved scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub initial: InitialState,
    /// `R = 𝓡/λ`.
    pub coupling: f64,
    pub r_a2: f64,
    pub delta_a: f64,
    pub delta_b: f64,
    pub engine: Engine,
    /// Final `λt`.
    pub horizon: f64,
    pub grid_points: usize,
    pub measures: Vec<Quantity>,
    pub seed: u64,
    pub optimizer: OptimizerSettings,
    pub n_max: Option<usize>,
    pub step: Option<f64>,
    pub sweep: SweepSettings,
    pub zeno: ZenoSettings,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let nc = NaqiConfig::default();
        Self {
            initial: InitialState::PsiPlus,
            coupling: 10.0,
            r_a2: 0.5,
            delta_a: 0.0,
            delta_b: 0.0,
            engine: Engine::Amplitudes,
            horizon: 5.0,
            grid_points: 501,
            measures: vec![
                Quantity::Naqi(MeasureKind::TraceNorm),
                Quantity::Naqi(MeasureKind::RelativeEntropy),
                Quantity::Naqi(MeasureKind::Geometric),
                Quantity::Fidelity,
            ],
            seed: nc.seed,
            optimizer: OptimizerSettings {
                theta_points: nc.theta_points,
                phi_points: nc.phi_points,
                twist_points: nc.twist_points,
                starts: nc.starts,
                top_k: nc.top_k,
                tolerance: nc.tolerance,
                third_angle: nc.third_angle,
            },
            n_max: None,
            step: None,
            sweep: SweepSettings {
                variable: SweepVariable::Delta,
                start: 0.0,
                stop: 80.0,
                points: 81,
                reducer: Reducer::NaqiMax,
                measure: MeasureKind::TraceNorm,
                horizon_floor: 1.0,
                resolution: 5e-3,
                threshold: None,
            },
            zeno: ZenoSettings {
                interval: 0.1,
                count: 50,
            },
        }
    }
}

fn flatten_into(prefix: &str, table: &toml::Table, out: &mut Flat) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Table(t) => flatten_into(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

/// Flattens TOML text into dotted keys.
pub fn parse_flat(text: &str) -> Result<Flat> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::config("<file>", e.message().to_string()))?;
    let mut out = Flat::new();
    flatten_into("", &table, &mut out);
    Ok(out)
}

/// Parses one `key=value` override. Values that are not TOML literals are
/// taken as bare strings, so `initial_state=psi+` works unquoted.
pub fn parse_assignment(s: &str) -> Result<(String, Value)> {
    let (key, raw) = s
        .split_once('=')
        .ok_or_else(|| Error::config(s.trim(), "expected key=value"))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(Error::config(s, "empty key"));
    }
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("single key"),
        Err(_) => Value::String(raw.to_string()),
    };
    Ok((key.to_string(), value))
}

/// Reads an optional config file and applies `--set` overrides on top.
pub fn load_flat(path: Option<&Path>, sets: &[String]) -> Result<Flat> {
    let mut flat = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::config("--config", format!("{}: {e}", p.display())))?;
            parse_flat(&text)?
        }
        None => Flat::new(),
    };
    for s in sets {
        let (k, v) = parse_assignment(s)?;
        flat.insert(k, v);
    }
    Ok(flat)
}

/// Renders a flat map as one inline TOML table.
pub fn render_inline(flat: &Flat) -> String {
    let body: Vec<String> = flat
        .iter()
        .map(|(k, v)| format!("{} = {}", quote_key(k), v))
        .collect();
    format!("{{ {} }}", body.join(", "))
}

fn quote_key(k: &str) -> String {
    if k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
        k.to_string()
    } else {
        format!("\"{k}\"")
    }
}

/// Inverse of [`render_inline`]; quoted dotted keys stay flat.
pub fn parse_inline(s: &str) -> Result<Flat> {
    let mut t = format!("v = {s}")
        .parse::<toml::Table>()
        .map_err(|e| Error::Table(format!("bad inline table `{s}`: {}", e.message())))?;
    match t.remove("v") {
        Some(Value::Table(inner)) => {
            let mut out = Flat::new();
            flatten_into("", &inner, &mut out);
            Ok(out)
        }
        _ => Err(Error::Table(format!("expected an inline table, got `{s}`"))),
    }
}

fn as_f64(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        Value::String(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::config(key, format!("expected a number, got `{s}`"))),
        other => Err(Error::config(key, format!("expected a number, got {other}"))),
    }
}

fn as_usize(key: &str, v: &Value) -> Result<usize> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        Value::String(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::config(key, format!("expected a non-negative integer, got `{s}`"))),
        other => Err(Error::config(key, format!("expected a non-negative integer, got {other}"))),
    }
}

fn as_u64(key: &str, v: &Value) -> Result<u64> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        // Seeds above i64::MAX travel as strings.
        Value::String(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::config(key, format!("expected an unsigned integer, got `{s}`"))),
        other => Err(Error::config(key, format!("expected an unsigned integer, got {other}"))),
    }
}

fn as_bool(key: &str, v: &Value) -> Result<bool> {
    match v {
        Value::Boolean(b) => Ok(*b),
        Value::String(s) if s == "true" || s == "false" => Ok(s == "true"),
        other => Err(Error::config(key, format!("expected true or false, got {other}"))),
    }
}

fn as_str<'a>(key: &str, v: &'a Value) -> Result<&'a str> {
    match v {
        Value::String(s) => Ok(s),
        other => Err(Error::config(key, format!("expected a string, got {other}"))),
    }
}

fn is_auto(v: &Value) -> bool {
    matches!(v, Value::String(s) if s == "auto")
}

fn as_complex(key: &str, v: &Value) -> Result<C64> {
    match v {
        Value::Array(a) if a.len() == 2 => Ok(C64::new(as_f64(key, &a[0])?, as_f64(key, &a[1])?)),
        other => as_f64(key, other)
            .map(C64::from)
            .map_err(|_| Error::config(key, "expected [re, im] or a real number")),
    }
}

fn parse_with<T: FromStr<Err = Error>>(key: &str, v: &Value) -> Result<T> {
    as_str(key, v)?.parse().map_err(|e: Error| Error::config(key, e.to_string()))
}

fn complex_value(c: C64) -> Value {
    Value::Array(vec![Value::Float(c.re), Value::Float(c.im)])
}

impl ScenarioConfig {
    /// Defaults overlaid with each layer in turn.
    pub fn from_layers(layers: &[&Flat]) -> Result<Self> {
        let mut cfg = Self::default();
        let mut c10 = None;
        let mut c20 = None;
        let mut custom = false;
        for layer in layers {
            for (k, v) in layer.iter() {
                match k.as_str() {
                    "c10" => c10 = Some(as_complex(k, v)?),
                    "c20" => c20 = Some(as_complex(k, v)?),
                    "initial_state" => {
                        // `10` and `11` arrive as integers from unquoted overrides.
                        let name = match v {
                            Value::Integer(n) => n.to_string(),
                            other => as_str(k, other)?.to_string(),
                        };
                        custom = name.trim().eq_ignore_ascii_case("custom");
                        if !custom {
                            cfg.initial = name.parse().map_err(|e: Error| Error::config(k, e.to_string()))?;
                        }
                    }
                    _ => cfg.set(k, v)?,
                }
            }
        }
        if custom {
            let (c10, c20) = match (c10, c20) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(Error::config("c10", "custom initial state needs both c10 and c20")),
            };
            cfg.initial = InitialState::Custom { c10, c20 };
        } else if c10.is_some() || c20.is_some() {
            return Err(Error::config("c10", "c10/c20 require initial_state = \"custom\""));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// This config with `layer` applied on top.
    pub fn with(&self, layer: &Flat) -> Result<Self> {
        Self::from_layers(&[&self.to_flat(), layer])
    }

    fn set(&mut self, key: &str, v: &Value) -> Result<()> {
        match key {
            "R" => self.coupling = as_f64(key, v)?,
            "rA2" => self.r_a2 = as_f64(key, v)?,
            "deltaA" => self.delta_a = as_f64(key, v)?,
            "deltaB" => self.delta_b = as_f64(key, v)?,
            "engine" => self.engine = parse_with(key, v)?,
            "horizon" => self.horizon = as_f64(key, v)?,
            "grid_points" => self.grid_points = as_usize(key, v)?,
            "seed" => self.seed = as_u64(key, v)?,
            "measures" => {
                let items: Vec<&Value> = match v {
                    Value::Array(a) => a.iter().collect(),
                    single => vec![single],
                };
                let mut out = Vec::new();
                for item in items {
                    for name in as_str(key, item)?.split(',').filter(|s| !s.trim().is_empty()) {
                        out.push(name.parse().map_err(|e: Error| Error::config(key, e.to_string()))?);
                    }
                }
                self.measures = out;
            }
            "optimizer.theta_points" => self.optimizer.theta_points = as_usize(key, v)?,
            "optimizer.phi_points" => self.optimizer.phi_points = as_usize(key, v)?,
            "optimizer.twist_points" => self.optimizer.twist_points = as_usize(key, v)?,
            "optimizer.starts" => self.optimizer.starts = as_usize(key, v)?,
            "optimizer.top_k" => self.optimizer.top_k = as_usize(key, v)?,
            "optimizer.tolerance" => self.optimizer.tolerance = as_f64(key, v)?,
            "optimizer.third_angle" => self.optimizer.third_angle = as_bool(key, v)?,
            "optimizer.seed" => self.seed = as_u64(key, v)?,
            "lindblad.n_max" => self.n_max = if is_auto(v) { None } else { Some(as_usize(key, v)?) },
            "lindblad.step" => self.step = if is_auto(v) { None } else { Some(as_f64(key, v)?) },
            "sweep.variable" => self.sweep.variable = parse_with(key, v)?,
            "sweep.start" => self.sweep.start = as_f64(key, v)?,
            "sweep.stop" => self.sweep.stop = as_f64(key, v)?,
            "sweep.points" => self.sweep.points = as_usize(key, v)?,
            "sweep.reducer" => self.sweep.reducer = parse_with(key, v)?,
            "sweep.measure" => self.sweep.measure = parse_with(key, v)?,
            "sweep.horizon_floor" => self.sweep.horizon_floor = as_f64(key, v)?,
            "sweep.resolution" => self.sweep.resolution = as_f64(key, v)?,
            "sweep.threshold" => self.sweep.threshold = if is_auto(v) { None } else { Some(as_f64(key, v)?) },
            "zeno.interval" => self.zeno.interval = as_f64(key, v)?,
            "zeno.count" => {
                let n = as_usize(key, v)?;
                self.zeno.count = u32::try_from(n).map_err(|_| Error::config(key, "count too large"))?;
            }
            other => return Err(Error::config(other, "unknown key")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |key: &str, x: f64| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::config(key, format!("{x} is not finite")))
            }
        };
        for (k, x) in [("R", self.coupling), ("deltaA", self.delta_a), ("deltaB", self.delta_b)] {
            finite(k, x)?;
        }
        if !(self.coupling > 0.0) {
            return Err(Error::config("R", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.r_a2) {
            return Err(Error::config("rA2", format!("{} not in [0, 1]", self.r_a2)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::config("horizon", "must be positive"));
        }
        if self.grid_points < 2 {
            return Err(Error::config("grid_points", "need at least 2 points"));
        }
        if self.measures.is_empty() {
            return Err(Error::config("measures", "empty list"));
        }
        if let InitialState::Custom { .. } = self.initial {
            self.initial.ket().map_err(|e| Error::config("c10", e.to_string()))?;
        }
        let o = &self.optimizer;
        for (k, n) in [
            ("optimizer.theta_points", o.theta_points.saturating_sub(1)),
            ("optimizer.phi_points", o.phi_points),
            ("optimizer.twist_points", o.twist_points),
            ("optimizer.starts", o.starts),
            ("optimizer.top_k", o.top_k),
        ] {
            if n == 0 {
                return Err(Error::config(k, "too small"));
            }
        }
        if !(o.tolerance > 0.0) {
            return Err(Error::config("optimizer.tolerance", "must be positive"));
        }
        if let Some(step) = self.step {
            if !(step > 0.0 && step.is_finite()) {
                return Err(Error::config("lindblad.step", "must be positive"));
            }
        }
        if let Some(n) = self.n_max {
            if n < self.initial.excitations() {
                return Err(Error::config(
                    "lindblad.n_max",
                    format!("{n} cannot hold {} excitations", self.initial.excitations()),
                ));
            }
        }
        let s = &self.sweep;
        finite("sweep.start", s.start)?;
        finite("sweep.stop", s.stop)?;
        if s.points == 0 || (s.points == 1 && s.start != s.stop) || s.stop < s.start {
            return Err(Error::config("sweep.points", "need start <= stop and at least 2 points for a range"));
        }
        if matches!(s.variable, SweepVariable::RA2 | SweepVariable::RA) && (s.start < 0.0 || s.stop > 1.0) {
            return Err(Error::config("sweep.start", "coupling sweeps must stay in [0, 1]"));
        }
        if !(s.horizon_floor > 0.0) {
            return Err(Error::config("sweep.horizon_floor", "must be positive"));
        }
        if !(s.resolution > 0.0) {
            return Err(Error::config("sweep.resolution", "must be positive"));
        }
        if !(self.zeno.interval > 0.0 && self.zeno.interval.is_finite()) {
            return Err(Error::config("zeno.interval", "must be positive"));
        }
        if self.zeno.count == 0 {
            return Err(Error::config("zeno.count", "must be at least 1"));
        }
        Ok(())
    }

    /// Every key with its resolved value; feeding this back reproduces the
    /// config exactly.
    pub fn to_flat(&self) -> Flat {
        let mut m = Flat::new();
        let mut put = |k: &str, v: Value| {
            m.insert(k.to_string(), v);
        };
        let f = Value::Float;
        let i = |n: usize| Value::Integer(n as i64);
        match self.initial {
            InitialState::Custom { c10, c20 } => {
                put("initial_state", Value::String("custom".into()));
                put("c10", complex_value(c10));
                put("c20", complex_value(c20));
            }
            other => put("initial_state", Value::String(other.to_string())),
        }
        put("R", f(self.coupling));
        put("rA2", f(self.r_a2));
        put("deltaA", f(self.delta_a));
        put("deltaB", f(self.delta_b));
        put("engine", Value::String(self.engine.to_string()));
        put("horizon", f(self.horizon));
        put("grid_points", i(self.grid_points));
        put(
            "measures",
            Value::Array(self.measures.iter().map(|q| Value::String(q.to_string())).collect()),
        );
        put("seed", Value::String(self.seed.to_string()));
        let o = &self.optimizer;
        put("optimizer.theta_points", i(o.theta_points));
        put("optimizer.phi_points", i(o.phi_points));
        put("optimizer.twist_points", i(o.twist_points));
        put("optimizer.starts", i(o.starts));
        put("optimizer.top_k", i(o.top_k));
        put("optimizer.tolerance", f(o.tolerance));
        put("optimizer.third_angle", Value::Boolean(o.third_angle));
        let auto = || Value::String("auto".into());
        put("lindblad.n_max", self.n_max.map_or_else(auto, i));
        put("lindblad.step", self.step.map_or_else(auto, f));
        let s = &self.sweep;
        put("sweep.variable", Value::String(s.variable.name().into()));
        put("sweep.start", f(s.start));
        put("sweep.stop", f(s.stop));
        put("sweep.points", i(s.points));
        put("sweep.reducer", Value::String(s.reducer.name().into()));
        put("sweep.measure", Value::String(s.measure.short_name().into()));
        put("sweep.horizon_floor", f(s.horizon_floor));
        put("sweep.resolution", f(s.resolution));
        put("sweep.threshold", s.threshold.map_or_else(auto, f));
        put("zeno.interval", f(self.zeno.interval));
        put("zeno.count", i(self.zeno.count as usize));
        m
    }

    pub fn params(&self) -> Result<CavityParams> {
        CavityParams::new(1.0, self.coupling, self.r_a2.sqrt(), self.delta_a, self.delta_b)
            .map_err(|e| Error::config("R", e.to_string()))
    }

    pub fn naqi_config(&self) -> NaqiConfig {
        let o = &self.optimizer;
        NaqiConfig {
            theta_points: o.theta_points,
            phi_points: o.phi_points,
            twist_points: o.twist_points,
            starts: o.starts,
            top_k: o.top_k,
            seed: self.seed,
            tolerance: o.tolerance,
            third_angle: o.third_angle,
        }
    }

    /// Screening settings for long time scans, seeded like the full ones.
    pub fn coarse_naqi_config(&self) -> NaqiConfig {
        NaqiConfig {
            seed: self.seed,
            third_angle: self.optimizer.third_angle,
            ..NaqiConfig::coarse()
        }
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let mut sc = Scenario::new(self.initial, self.params()?, self.engine);
        sc.step = self.step;
        sc.n_max = self.n_max;
        Ok(sc)
    }

    pub fn dynamics(&self) -> Result<Dynamics> {
        self.scenario()?.dynamics().map_err(|e| match e {
            Error::InvalidParams(m) => Error::config("engine", m),
            other => other,
        })
    }

    /// Uniform grid on `[0, horizon]`.
    pub fn times(&self) -> Vec<f64> {
        linspace(0.0, self.horizon, self.grid_points)
    }

    /// Sampling plan for maxima over time.
    pub fn time_scan(&self) -> Result<TimeScan> {
        let params = self.params()?;
        let mut scan = TimeScan::auto(&params, self.sweep.horizon_floor);
        scan.resolution = self.sweep.resolution;
        if self.engine == Engine::Pseudomode {
            scan.horizon = self.horizon;
            scan.min_points = self.grid_points;
        }
        Ok(scan)
    }
}

/// `n` evenly spaced points with exact end points.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n)
            .map(|k| if k + 1 == n { b } else { a + (b - a) * k as f64 / (n - 1) as f64 })
            .collect(),
    }
}

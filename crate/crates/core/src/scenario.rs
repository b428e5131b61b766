//! Initial states, dynamics engines and maximization along trajectories.

use std::fmt;
use std::str::FromStr;

use nalgebra::Vector4;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::cavity::{amplitudes_equal_detuning, check_normalized, AmplitudePair, CavityParams, Propagator};
use crate::dia::assisted_fidelity;
use crate::error::{Error, Result};
use crate::measures::{mub_sum_bound, MeasureKind};
use crate::naqi::{last_crossing, NaqiOptimizer};
use crate::optim::{bisect, golden_max};
use crate::pseudomode::{
    initial_state, reduce_to_qubits, to_interaction_picture, LindbladConfig, PseudomodeEvolver,
    PseudomodeState,
};
use crate::qstate::{assemble_single_excitation, TwoQubitState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    Excited11,
    Excited10,
    Excited01,
    Custom { c10: C64, c20: C64 },
}

impl InitialState {
    /// Amplitudes on `{|11>, |10>, |01>, |00>}`.
    pub fn ket(&self) -> Result<Vector4<C64>> {
        let h = C64::from(std::f64::consts::FRAC_1_SQRT_2);
        let z = C64::from(0.0);
        let one = C64::from(1.0);
        Ok(match *self {
            InitialState::PhiPlus => Vector4::new(h, z, z, h),
            InitialState::PhiMinus => Vector4::new(h, z, z, -h),
            InitialState::PsiPlus => Vector4::new(z, h, h, z),
            InitialState::Excited11 => Vector4::new(one, z, z, z),
            InitialState::Excited10 => Vector4::new(z, one, z, z),
            InitialState::Excited01 => Vector4::new(z, z, one, z),
            InitialState::Custom { c10, c20 } => {
                check_normalized(c10, c20)?;
                Vector4::new(z, c10, c20, z)
            }
        })
    }

    pub fn excitations(&self) -> usize {
        match self {
            InitialState::PhiPlus | InitialState::PhiMinus | InitialState::Excited11 => 2,
            _ => 1,
        }
    }

    /// `(c10, c20)` for states in the single-excitation sector.
    pub fn single_excitation(&self) -> Option<(C64, C64)> {
        let h = C64::from(std::f64::consts::FRAC_1_SQRT_2);
        match *self {
            InitialState::PsiPlus => Some((h, h)),
            InitialState::Excited10 => Some((C64::from(1.0), C64::from(0.0))),
            InitialState::Excited01 => Some((C64::from(0.0), C64::from(1.0))),
            InitialState::Custom { c10, c20 } => Some((c10, c20)),
            _ => None,
        }
    }
}

impl fmt::Display for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialState::PhiPlus => f.write_str("phi+"),
            InitialState::PhiMinus => f.write_str("phi-"),
            InitialState::PsiPlus => f.write_str("psi+"),
            InitialState::Excited11 => f.write_str("11"),
            InitialState::Excited10 => f.write_str("10"),
            InitialState::Excited01 => f.write_str("01"),
            InitialState::Custom { .. } => f.write_str("custom"),
        }
    }
}

impl FromStr for InitialState {
    type Err = Error;

    /// Named states only; custom amplitudes are built directly.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "phi+" | "phiplus" | "phi_plus" => Ok(InitialState::PhiPlus),
            "phi-" | "phiminus" | "phi_minus" => Ok(InitialState::PhiMinus),
            "psi+" | "psiplus" | "psi_plus" | "bell" => Ok(InitialState::PsiPlus),
            "11" => Ok(InitialState::Excited11),
            "10" => Ok(InitialState::Excited10),
            "01" => Ok(InitialState::Excited01),
            _ => Err(Error::UnknownState(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Amplitudes,
    Pseudomode,
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "amplitudes" | "amplitude" => Ok(Engine::Amplitudes),
            "pseudomode" => Ok(Engine::Pseudomode),
            other => Err(Error::InvalidParams(format!("unknown engine `{other}`"))),
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Amplitudes => "amplitudes",
            Engine::Pseudomode => "pseudomode",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub initial: InitialState,
    pub params: CavityParams,
    pub engine: Engine,
    /// Pseudomode step override (units of `1/λ`).
    pub step: Option<f64>,
    /// Pseudomode truncation override.
    pub n_max: Option<usize>,
}

impl Scenario {
    pub fn new(initial: InitialState, params: CavityParams, engine: Engine) -> Self {
        Self {
            initial,
            params,
            engine,
            step: None,
            n_max: None,
        }
    }

    pub fn dynamics(&self) -> Result<Dynamics> {
        match self.engine {
            Engine::Amplitudes => {
                let (c10, c20) = self.initial.single_excitation().ok_or_else(|| {
                    Error::InvalidParams(format!(
                        "initial state `{}` leaves the single-excitation sector; use the pseudomode engine",
                        self.initial
                    ))
                })?;
                check_normalized(c10, c20)?;
                let propagator = (!self.params.equal_detunings()).then(|| Propagator::new(&self.params));
                Ok(Dynamics::Amplitudes {
                    c10,
                    c20,
                    params: self.params,
                    propagator,
                })
            }
            Engine::Pseudomode => {
                let n_max = self.n_max.unwrap_or(self.initial.excitations());
                let mut config = LindbladConfig::new(n_max, self.params);
                if let Some(step) = self.step {
                    config.step = step;
                }
                let evolver = PseudomodeEvolver::new(config)?;
                let init = initial_state(&self.initial, n_max)?;
                Ok(Dynamics::Pseudomode {
                    evolver: Box::new(evolver),
                    init: Box::new(init),
                    params: self.params,
                })
            }
        }
    }
}

/// A resolved engine ready to produce states at given times.
#[derive(Debug, Clone)]
pub enum Dynamics {
    Amplitudes {
        c10: C64,
        c20: C64,
        params: CavityParams,
        propagator: Option<Propagator>,
    },
    Pseudomode {
        evolver: Box<PseudomodeEvolver>,
        init: Box<PseudomodeState>,
        params: CavityParams,
    },
}

/// States on a time grid, with integrator snapshots for later refinement.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<TwoQubitState>,
    snapshots: Option<Vec<PseudomodeState>>,
}

impl Dynamics {
    pub fn params(&self) -> &CavityParams {
        match self {
            Dynamics::Amplitudes { params, .. } | Dynamics::Pseudomode { params, .. } => params,
        }
    }

    /// Interaction-picture amplitudes (amplitude engine only).
    pub fn amplitudes_at(&self, t: f64) -> Option<AmplitudePair> {
        match self {
            Dynamics::Amplitudes {
                c10,
                c20,
                params,
                propagator,
            } => Some(match propagator {
                Some(p) => p.amplitudes(t, *c10, *c20),
                None => amplitudes_equal_detuning(t, *c10, *c20, params).expect("validated inputs"),
            }),
            Dynamics::Pseudomode { .. } => None,
        }
    }

    fn reduce(&self, snap: &PseudomodeState) -> Result<TwoQubitState> {
        to_interaction_picture(&reduce_to_qubits(snap)?, self.params(), snap.t)
    }

    pub fn trajectory(&self, times: &[f64]) -> Result<Trajectory> {
        match self {
            Dynamics::Amplitudes { .. } => {
                let states = times
                    .iter()
                    .map(|&t| {
                        let a = self.amplitudes_at(t).expect("amplitude engine");
                        assemble_single_excitation(a.c1, a.c2)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Trajectory {
                    times: times.to_vec(),
                    states,
                    snapshots: None,
                })
            }
            Dynamics::Pseudomode { evolver, init, .. } => {
                let snaps = evolver.sample(init, times)?;
                let states = snaps.iter().map(|s| self.reduce(s)).collect::<Result<Vec<_>>>()?;
                Ok(Trajectory {
                    times: times.to_vec(),
                    states,
                    snapshots: Some(snaps),
                })
            }
        }
    }

    /// State at `t ≥ traj.times[i]`, continuing from the stored snapshot when
    /// the engine is an integrator.
    pub fn state_after(&self, traj: &Trajectory, i: usize, t: f64) -> Result<TwoQubitState> {
        match (self, &traj.snapshots) {
            (Dynamics::Pseudomode { evolver, .. }, Some(snaps)) => self.reduce(&evolver.evolve(&snaps[i], t)?),
            _ => {
                let a = self.amplitudes_at(t).expect("amplitude engine");
                assemble_single_excitation(a.c1, a.c2)
            }
        }
    }

    /// Sample times for maximization: adaptive in state change for the
    /// amplitude engine, uniform for the integrator.
    pub fn scan_times(&self, scan: &TimeScan) -> Vec<f64> {
        let uniform = |n: usize| -> Vec<f64> {
            (0..n).map(|k| scan.horizon * k as f64 / (n - 1) as f64).collect()
        };
        if matches!(self, Dynamics::Pseudomode { .. }) {
            return uniform(scan.min_points);
        }
        let h_max = scan.horizon / (scan.min_points - 1) as f64;
        let h_min = scan.horizon / (scan.max_points - 1) as f64;
        let amp = |t: f64| self.amplitudes_at(t).expect("amplitude engine");
        let mut times = vec![0.0];
        let mut last = amp(0.0);
        let mut t = 0.0;
        let mut h = h_max;
        while t < scan.horizon {
            let mut next = (t + h).min(scan.horizon);
            let mut cand = amp(next);
            let mut dist = (cand.c1 - last.c1).norm() + (cand.c2 - last.c2).norm();
            while dist > scan.resolution && h > h_min {
                h = (0.5 * h).max(h_min);
                next = (t + h).min(scan.horizon);
                cand = amp(next);
                dist = (cand.c1 - last.c1).norm() + (cand.c2 - last.c2).norm();
            }
            times.push(next);
            t = next;
            last = cand;
            if dist < 0.25 * scan.resolution {
                h = (2.0 * h).min(h_max);
            }
        }
        times
    }
}

/// Sampling plan for a maximum over time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeScan {
    /// Final time in units of `1/λ`.
    pub horizon: f64,
    pub min_points: usize,
    pub max_points: usize,
    /// Largest allowed change `|Δc1| + |Δc2|` between samples.
    pub resolution: f64,
    /// Local maxima refined, taken in order of sampled value.
    pub candidates: usize,
    /// Local maxima further than this below the best sample are skipped.
    pub slack: f64,
}

impl TimeScan {
    pub fn new(horizon: f64, min_points: usize) -> Result<Self> {
        let scan = Self {
            horizon,
            min_points,
            max_points: 400_000,
            resolution: 5e-3,
            candidates: 4,
            slack: 0.05,
        };
        scan.validate()?;
        Ok(scan)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidParams(format!("horizon {} must be positive", self.horizon)));
        }
        if self.min_points < 2 || self.max_points < self.min_points {
            return Err(Error::InvalidParams("need 2 <= min_points <= max_points".into()));
        }
        if !(self.resolution > 0.0) || self.candidates == 0 {
            return Err(Error::InvalidParams("resolution and candidates must be positive".into()));
        }
        Ok(())
    }

    /// Horizon long enough for a full turn of the slow dispersive phase and
    /// for the bright mode to decay, never shorter than `floor`.
    pub fn auto_horizon(params: &CavityParams, floor: f64) -> f64 {
        let delta = params.delta_a.abs().max(params.delta_b.abs()) / params.lambda;
        let r = params.coupling.max(1e-3);
        let share = (params.r_a * params.r_b()).max(1e-3);
        let h = 4.0 * std::f64::consts::PI * delta.hypot(1.0) / (r * r * share) + 10.0 / r;
        floor.max(h / params.lambda)
    }

    pub fn auto(params: &CavityParams, floor: f64) -> Self {
        Self {
            horizon: Self::auto_horizon(params, floor),
            min_points: 2001,
            max_points: 400_000,
            resolution: 5e-3,
            candidates: 4,
            slack: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeMax {
    pub value: f64,
    pub time: f64,
    /// Best sample sits at the end of the horizon.
    pub at_boundary: bool,
    pub samples: usize,
}

fn local_maxima(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    (0..n)
        .filter(|&i| {
            let left = i == 0 || values[i] >= values[i - 1];
            let right = i + 1 == n || values[i] >= values[i + 1];
            left && right
        })
        .collect()
}

/// Maximum of `coarse` along the trajectory, refined with `fine` by
/// golden-section search around the best local maxima.
pub fn max_over_time<C, F>(dynamics: &Dynamics, scan: &TimeScan, coarse: C, fine: F) -> Result<TimeMax>
where
    C: Fn(&TwoQubitState) -> f64 + Sync,
    F: Fn(&TwoQubitState) -> f64 + Sync,
{
    scan.validate()?;
    let times = dynamics.scan_times(scan);
    let traj = dynamics.trajectory(&times)?;
    let values: Vec<f64> = traj.states.par_iter().map(&coarse).collect();
    let best = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    let mut peaks = local_maxima(&values);
    peaks.retain(|&i| values[i] >= best - scan.slack);
    peaks.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    peaks.truncate(scan.candidates);

    let n = times.len();
    let refined: Vec<Result<(f64, f64, bool)>> = peaks
        .par_iter()
        .map(|&i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(n - 1);
            let mut err = None;
            let mut eval = |t: f64| match dynamics.state_after(&traj, lo, t) {
                Ok(s) => fine(&s),
                Err(e) => {
                    err.get_or_insert(e);
                    f64::NEG_INFINITY
                }
            };
            let at_i = fine(&traj.states[i]);
            let (t, v) = if hi > lo {
                golden_max(&mut eval, times[lo], times[hi], 1e-9 * scan.horizon.max(1.0))
            } else {
                (times[i], at_i)
            };
            if let Some(e) = err {
                return Err(e);
            }
            let (t, v) = if at_i >= v { (times[i], at_i) } else { (t, v) };
            Ok((v, t, i + 1 == n))
        })
        .collect();

    let mut out: Option<TimeMax> = None;
    for r in refined {
        let (value, time, at_boundary) = r?;
        if out.is_none_or(|o| value > o.value + 1e-12) {
            out = Some(TimeMax {
                value,
                time,
                at_boundary,
                samples: n,
            });
        }
    }
    out.ok_or(Error::NoCrossing)
}

/// Maximum NAQI along a trajectory: `scan` optimizer for sampling, `full`
/// for refinement.
pub fn naqi_max_over_time(
    dynamics: &Dynamics,
    kind: MeasureKind,
    scan: &TimeScan,
    coarse: &NaqiOptimizer,
    full: &NaqiOptimizer,
) -> Result<TimeMax> {
    max_over_time(dynamics, scan, |s| coarse.value(s, kind), |s| full.value(s, kind))
}

pub fn dia_max_over_time(dynamics: &Dynamics, scan: &TimeScan) -> Result<TimeMax> {
    let f = |s: &TwoQubitState| assisted_fidelity(s).fidelity;
    max_over_time(dynamics, scan, f, f)
}

/// Time after which the NAQI stays at or below the bound on `times`,
/// refined by bisection to `tol`.
pub fn vanishing_time(
    dynamics: &Dynamics,
    kind: MeasureKind,
    times: &[f64],
    optimizer: &NaqiOptimizer,
    tol: f64,
) -> Result<f64> {
    let traj = dynamics.trajectory(times)?;
    let bound = mub_sum_bound(kind);
    let values: Vec<f64> = traj.states.par_iter().map(|s| optimizer.value(s, kind)).collect();
    let i = last_crossing(&values, bound)?;
    let mut err = None;
    let root = bisect(
        |t| match dynamics.state_after(&traj, i, t) {
            Ok(s) => optimizer.value(&s, kind) - bound,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        },
        times[i],
        times[i + 1],
        tol,
    );
    if let Some(e) = err {
        return Err(e);
    }
    root.ok_or(Error::NoCrossing)
}

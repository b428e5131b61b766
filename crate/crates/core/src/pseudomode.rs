//! Two qubits plus one damped pseudomode: a Markovian embedding of the
//! Lorentzian reservoir valid for any number of excitations.

use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64 as C64;

use crate::cavity::CavityParams;
use crate::error::{Error, Result};
use crate::qstate::TwoQubitState;
use crate::scenario::InitialState;

/// Richardson error budget per unit time.
pub const STEP_ERROR_RATE: f64 = 1e-8;
/// Population allowed above the initial excitation number.
pub const TRUNCATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindbladConfig {
    pub n_max: usize,
    /// Fixed step in units of `1/λ`.
    pub step: f64,
    pub params: CavityParams,
}

impl LindbladConfig {
    /// Default step: `1e-3` for strong coupling, `1e-2` otherwise.
    pub fn new(n_max: usize, params: CavityParams) -> Self {
        let step = if params.coupling > 1.0 { 1e-3 } else { 1e-2 };
        Self {
            n_max,
            step: step / params.lambda,
            params,
        }
    }

    pub fn dim(&self) -> usize {
        4 * (self.n_max + 1)
    }
}

/// Joint density operator, index `(2 q_A + q_B)(n_max + 1) + k` with `q = 0`
/// the excited level and `k` the photon number.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudomodeState {
    pub rho: DMatrix<C64>,
    pub n_max: usize,
    pub t: f64,
    /// Excitation number of the initial state; bounds the Fock levels in use.
    pub excitations: usize,
}

impl PseudomodeState {
    /// Both qubits in `|0>`, no photons.
    pub fn vacuum(n_max: usize) -> Self {
        let f = n_max + 1;
        let mut rho = DMatrix::zeros(4 * f, 4 * f);
        rho[(3 * f, 3 * f)] = C64::from(1.0);
        Self {
            rho,
            n_max,
            t: 0.0,
            excitations: 0,
        }
    }

    fn fock_dim(&self) -> usize {
        self.n_max + 1
    }

    /// Population of photon numbers above `excitations`.
    pub fn leaked_population(&self) -> f64 {
        let f = self.fock_dim();
        let mut total = 0.0;
        for q in 0..4 {
            for k in (self.excitations + 1)..f {
                total += self.rho[(q * f + k, q * f + k)].re;
            }
        }
        total
    }

    /// `<σ+σ-_A + σ+σ-_B + b†b>`.
    pub fn excitation_number(&self) -> f64 {
        let f = self.fock_dim();
        let mut total = 0.0;
        for qa in 0..2 {
            for qb in 0..2 {
                let q = 2 * qa + qb;
                let atoms = (qa == 0) as usize + (qb == 0) as usize;
                for k in 0..f {
                    total += (atoms + k) as f64 * self.rho[(q * f + k, q * f + k)].re;
                }
            }
        }
        total
    }
}

/// The named two-qubit pure state tensored with the pseudomode vacuum.
pub fn initial_state(init: &InitialState, n_max: usize) -> Result<PseudomodeState> {
    let psi = init.ket()?;
    let excitations = init.excitations();
    if n_max < excitations {
        return Err(Error::Truncation(format!(
            "n_max = {n_max} below the initial excitation number {excitations}"
        )));
    }
    let f = n_max + 1;
    let mut rho = DMatrix::zeros(4 * f, 4 * f);
    for i in 0..4 {
        for j in 0..4 {
            rho[(i * f, j * f)] = psi[i] * psi[j].conj();
        }
    }
    Ok(PseudomodeState {
        rho,
        n_max,
        t: 0.0,
        excitations,
    })
}

/// Partial trace over the pseudomode. Positivity is checked against the
/// accumulated step-error budget.
pub fn reduce_to_qubits(state: &PseudomodeState) -> Result<TwoQubitState> {
    let f = state.n_max + 1;
    let m = Matrix4::from_fn(|i, j| (0..f).map(|k| state.rho[(i * f + k, j * f + k)]).sum());
    TwoQubitState::with_tolerance(m, STEP_ERROR_RATE * state.t.max(1.0))
}

/// Moves a state from the cavity-rotating frame to the per-qubit interaction
/// pictures used by the amplitude engine (`c_n = a_n e^{i δ_n t}`).
pub fn to_interaction_picture(rho: &TwoQubitState, params: &CavityParams, t: f64) -> Result<TwoQubitState> {
    let z = C64::from(0.0);
    let one = C64::from(1.0);
    let ua = Matrix2::new(C64::from_polar(1.0, params.delta_a * t), z, z, one);
    let ub = Matrix2::new(C64::from_polar(1.0, params.delta_b * t), z, z, one);
    rho.local_unitary(&ua, &ub)
}

/// Precomputed Liouvillian pieces for one parameter set.
#[derive(Debug, Clone)]
pub struct PseudomodeEvolver {
    config: LindbladConfig,
    h_eff: DMatrix<C64>,
    h_eff_adj: DMatrix<C64>,
    b: DMatrix<C64>,
    b_adj: DMatrix<C64>,
}

impl PseudomodeEvolver {
    pub fn new(config: LindbladConfig) -> Result<Self> {
        if !(config.step > 0.0 && config.step.is_finite()) {
            return Err(Error::InvalidParams(format!("step {} must be positive", config.step)));
        }
        let f = config.n_max + 1;
        let dim = 4 * f;
        let p = &config.params;
        let idx = |qa: usize, qb: usize, k: usize| (2 * qa + qb) * f + k;

        let mut h = DMatrix::<C64>::zeros(dim, dim);
        let mut b = DMatrix::<C64>::zeros(dim, dim);
        let g = [p.rabi() * p.r_a, p.rabi() * p.r_b()];
        for qa in 0..2 {
            for qb in 0..2 {
                for k in 0..f {
                    let i = idx(qa, qb, k);
                    let mut diag = 0.0;
                    if qa == 0 {
                        diag += p.delta_a;
                    }
                    if qb == 0 {
                        diag += p.delta_b;
                    }
                    h[(i, i)] = C64::from(diag);
                    if k > 0 {
                        b[(idx(qa, qb, k - 1), i)] = C64::from((k as f64).sqrt());
                    }
                    // σ+ b: absorb a photon, excite the qubit.
                    if k > 0 {
                        let amp = (k as f64).sqrt();
                        if qa == 1 {
                            let j = idx(0, qb, k - 1);
                            h[(j, i)] += C64::from(g[0] * amp);
                            h[(i, j)] += C64::from(g[0] * amp);
                        }
                        if qb == 1 {
                            let j = idx(qa, 0, k - 1);
                            h[(j, i)] += C64::from(g[1] * amp);
                            h[(i, j)] += C64::from(g[1] * amp);
                        }
                    }
                }
            }
        }
        let b_adj = b.adjoint();
        let h_eff = &h - (&b_adj * &b) * C64::new(0.0, p.lambda);
        Ok(Self {
            h_eff_adj: h_eff.adjoint(),
            h_eff,
            b,
            b_adj,
            config,
        })
    }

    pub fn config(&self) -> &LindbladConfig {
        &self.config
    }

    fn rhs(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let mi = C64::new(0.0, -1.0);
        let coherent = (&self.h_eff * rho - rho * &self.h_eff_adj) * mi;
        coherent + (&self.b * rho * &self.b_adj) * C64::from(2.0 * self.config.params.lambda)
    }

    fn rk4(&self, rho: &DMatrix<C64>, h: f64) -> DMatrix<C64> {
        let hc = C64::from(h);
        let half = C64::from(0.5 * h);
        let k1 = self.rhs(rho);
        let k2 = self.rhs(&(rho + &k1 * half));
        let k3 = self.rhs(&(rho + &k2 * half));
        let k4 = self.rhs(&(rho + &k3 * hc));
        rho + (k1 + k2 * C64::from(2.0) + k3 * C64::from(2.0) + k4) * C64::from(h / 6.0)
    }

    /// One step of length `h` with a halved-step consistency check.
    fn step(&self, rho: &DMatrix<C64>, h: f64) -> Result<DMatrix<C64>> {
        let full = self.rk4(rho, h);
        let halves = self.rk4(&self.rk4(rho, 0.5 * h), 0.5 * h);
        let err = (&halves - &full).camax() / 15.0;
        let rate = err / h;
        if rate > STEP_ERROR_RATE {
            return Err(Error::StepRejected {
                rate,
                limit: STEP_ERROR_RATE,
            });
        }
        Ok(halves)
    }

    fn check(&self, state: &PseudomodeState) -> Result<()> {
        let leaked = state.leaked_population();
        if leaked > TRUNCATION_TOL {
            return Err(Error::Truncation(format!(
                "population {leaked:e} above {} photons at t = {}",
                state.excitations, state.t
            )));
        }
        Ok(())
    }

    fn validate_initial(&self, state: &PseudomodeState) -> Result<()> {
        if state.n_max != self.config.n_max {
            return Err(Error::InvalidParams(format!(
                "state has n_max = {}, evolver expects {}",
                state.n_max, self.config.n_max
            )));
        }
        if state.n_max < state.excitations {
            return Err(Error::Truncation(format!(
                "n_max = {} below the initial excitation number {}",
                state.n_max, state.excitations
            )));
        }
        Ok(())
    }

    /// Evolves to time `t` (absolute).
    pub fn evolve(&self, state: &PseudomodeState, t: f64) -> Result<PseudomodeState> {
        Ok(self.sample(state, &[t])?.pop().expect("one sample"))
    }

    /// Snapshots at ascending absolute times, integrating once.
    pub fn sample(&self, state: &PseudomodeState, times: &[f64]) -> Result<Vec<PseudomodeState>> {
        self.validate_initial(state)?;
        let mut out = Vec::with_capacity(times.len());
        let mut rho = state.rho.clone();
        let mut t = state.t;
        for &target in times {
            if target < t - 1e-12 {
                return Err(Error::InvalidParams(format!(
                    "sample times must ascend from {t}; got {target}"
                )));
            }
            while target - t > 1e-12 {
                let h = self.config.step.min(target - t);
                rho = self.step(&rho, h)?;
                t += h;
            }
            let snap = PseudomodeState {
                rho: rho.clone(),
                n_max: state.n_max,
                t: target,
                excitations: state.excitations,
            };
            self.check(&snap)?;
            out.push(snap);
            t = target;
        }
        Ok(out)
    }
}

pub fn evolve(state: &PseudomodeState, t: f64, config: &LindbladConfig) -> Result<PseudomodeState> {
    PseudomodeEvolver::new(*config)?.evolve(state, t)
}

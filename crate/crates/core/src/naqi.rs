//! Nonlocal advantage of quantum imaginarity: the steered MUB sum and its
//! maximization over Alice's measurements and Bob's reference triple.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::measures::{measure, measure_from_bloch, mub_sum_bound, MeasureKind, MubTriple};
use crate::optim::{nelder_mead, NmOptions};
use crate::qstate::{
    dot3, norm3, wrap_sphere_angles, MeasurementDirection, Outcome, PauliTensor, TwoQubitState,
    DEGENERATE_PROB,
};

/// Alice's three measurement directions and the angles of Bob's MUB triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementAngles {
    pub theta: [f64; 3],
    pub phi: [f64; 3],
    pub theta4: f64,
    pub phi4: f64,
    /// Optional residual phase of the triple; zero in the two-angle family.
    pub twist: f64,
}

impl MeasurementAngles {
    pub fn new(theta: [f64; 3], phi: [f64; 3], theta4: f64, phi4: f64) -> Result<Self> {
        for i in 0..3 {
            MeasurementDirection::new(theta[i], phi[i])?;
        }
        MubTriple::new(theta4, phi4)?;
        Ok(Self {
            theta,
            phi,
            theta4,
            phi4,
            twist: 0.0,
        })
    }

    pub fn with_twist(self, twist: f64) -> Self {
        Self {
            twist: twist.rem_euclid(2.0 * std::f64::consts::PI),
            ..self
        }
    }

    pub fn directions(&self) -> [MeasurementDirection; 3] {
        [0, 1, 2].map(|i| MeasurementDirection::wrapped(self.theta[i], self.phi[i]))
    }

    pub fn mub(&self) -> MubTriple {
        MubTriple::from_angles(self.theta4, self.phi4, self.twist)
    }

    /// Flat `[θ1, φ1, θ2, φ2, θ3, φ3, θ4, φ4, χ]`.
    pub fn to_array(&self) -> [f64; 9] {
        [
            self.theta[0], self.phi[0], self.theta[1], self.phi[1], self.theta[2], self.phi[2],
            self.theta4, self.phi4, self.twist,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaqiResult {
    pub value: f64,
    pub argmax: MeasurementAngles,
    /// `value > mub_sum_bound(measure)`.
    pub witness: bool,
    pub measure: MeasureKind,
    pub converged: bool,
}

/// Steered sum evaluated by explicit projection: conditional states are
/// built as matrices and measured in the bases of the triple. Outcomes of
/// vanishing probability contribute zero.
pub fn steered_sum(rho: &TwoQubitState, angles: &MeasurementAngles, kind: MeasureKind) -> Result<f64> {
    let triple = angles.mub();
    let mut total = 0.0;
    for (dir, basis) in angles.directions().iter().zip(triple.bases()) {
        for outcome in Outcome::BOTH {
            match rho.conditional_state(dir, outcome) {
                Ok((p, q)) => total += p * measure(&q, basis, kind),
                Err(Error::DegenerateOutcome(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(total)
}

/// Outcome probability and Bob's Bloch vector for a single-excitation state
/// `c1|10> + c2|01> + c0|00>`, from closed-form matrix elements.
pub fn conditional_bloch_fast(
    c1: C64,
    c2: C64,
    dir: &MeasurementDirection,
    outcome: Outcome,
) -> Result<(f64, [f64; 3])> {
    let x = c1.norm_sqr();
    let y = c2.norm_sqr();
    if x + y > 1.0 + 1e-10 {
        return Err(Error::NormViolation(x + y));
    }
    let z = c1 * c2.conj();
    let (st, ct) = dir.theta().sin_cos();
    let s = outcome.sign();
    let p = 0.5 * (1.0 + s * (2.0 * x - 1.0) * ct);
    if p < DEGENERATE_PROB {
        return Err(Error::DegenerateOutcome(p));
    }
    let rot = z * C64::from_polar(1.0, dir.phi());
    let numer = [
        s * 2.0 * st * rot.re,
        s * 2.0 * st * rot.im,
        (2.0 * y - 1.0) + s * (1.0 - 2.0 * x - 2.0 * y) * ct,
    ];
    Ok((p, numer.map(|u| 0.5 * u / p)))
}

/// Steered sum for single-excitation amplitudes via [`conditional_bloch_fast`].
pub fn steered_sum_single_excitation(
    c1: C64,
    c2: C64,
    angles: &MeasurementAngles,
    kind: MeasureKind,
) -> Result<f64> {
    let axes = angles.mub().axes();
    let mut total = 0.0;
    for (dir, e) in angles.directions().iter().zip(&axes) {
        for outcome in Outcome::BOTH {
            match conditional_bloch_fast(c1, c2, dir, outcome) {
                Ok((p, b)) => total += p * measure_from_bloch(kind, norm3(&b), dot3(&b, e)),
                Err(Error::DegenerateOutcome(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(total)
}

/// Correlation data of a two-qubit state as seen by the steering map:
/// `p± b± = (β ± T^T n)/2`, `p± = (1 ± a·n)/2`.
#[derive(Debug, Clone, Copy)]
struct Steering {
    a: [f64; 3],
    beta: [f64; 3],
    t: [[f64; 3]; 3],
}

impl Steering {
    fn new(v: &PauliTensor) -> Self {
        Self {
            a: [1, 2, 3].map(|k| v.get(k, 0)),
            beta: [1, 2, 3].map(|l| v.get(0, l)),
            t: [1, 2, 3].map(|k| [1, 2, 3].map(|l| v.get(k, l))),
        }
    }

    /// `Σ± p± I(b±)` for one direction and one imaginarity axis.
    fn branch(&self, n: &[f64; 3], e: &[f64; 3], kind: MeasureKind) -> f64 {
        let an = dot3(&self.a, n);
        let mut tn = [0.0; 3];
        for l in 0..3 {
            tn[l] = n[0] * self.t[0][l] + n[1] * self.t[1][l] + n[2] * self.t[2][l];
        }
        let mut total = 0.0;
        for s in [1.0, -1.0] {
            let p = 0.5 * (1.0 + s * an);
            if p < DEGENERATE_PROB {
                continue;
            }
            let u = [0, 1, 2].map(|l| 0.5 * (self.beta[l] + s * tn[l]));
            let ue = dot3(&u, e);
            total += match kind {
                MeasureKind::TraceNorm => ue.abs(),
                _ => p * measure_from_bloch(kind, norm3(&u) / p, ue / p),
            };
        }
        total
    }

    /// Exact maximum over directions for the trace norm:
    /// `Σ± |u±·e| = max(|β·e|, |n·w|)` with `w = T e`.
    fn trace_norm_exact(&self, e: &[f64; 3]) -> (f64, [f64; 3]) {
        let w = [0, 1, 2].map(|k| dot3(&self.t[k], e));
        let x = dot3(&self.beta, e).abs();
        let wn = norm3(&w);
        if wn > x && wn > 0.0 {
            (wn, w.map(|c| c / wn))
        } else {
            (x, [0.0, 0.0, 1.0])
        }
    }

    fn candidate_directions(&self, e: &[f64; 3], extra: &[[f64; 3]]) -> Vec<[f64; 3]> {
        let mut out = Vec::with_capacity(extra.len() + 4);
        let w = [0, 1, 2].map(|k| dot3(&self.t[k], e));
        for v in [w, self.a] {
            let n = norm3(&v);
            if n > 1e-12 {
                out.push(v.map(|c| c / n));
                out.push(v.map(|c| -c / n));
            }
        }
        out.extend_from_slice(extra);
        out
    }
}

/// Optimizer settings.
#[derive(Debug, Clone, PartialEq)]
pub struct NaqiConfig {
    /// Outer grid points in `θ4 ∈ [0, π]`.
    pub theta_points: usize,
    /// Outer grid points in `φ4 ∈ [0, 2π)`.
    pub phi_points: usize,
    /// Outer grid points in the twist angle when `third_angle` is set.
    pub twist_points: usize,
    /// Multistart count for each inner direction problem.
    pub starts: usize,
    /// Number of best grid points refined.
    pub top_k: usize,
    pub seed: u64,
    /// Stagnation tolerance of the simplex searches.
    pub tolerance: f64,
    /// Optimize the residual phase of the triple as well.
    pub third_angle: bool,
}

impl Default for NaqiConfig {
    fn default() -> Self {
        Self {
            theta_points: 48,
            phi_points: 96,
            twist_points: 8,
            starts: 8,
            top_k: 4,
            seed: 7,
            tolerance: 1e-10,
            third_angle: false,
        }
    }
}

impl NaqiConfig {
    /// A light setting for long time scans.
    pub fn coarse() -> Self {
        Self {
            theta_points: 12,
            phi_points: 24,
            twist_points: 4,
            starts: 3,
            top_k: 2,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.theta_points < 2 || self.phi_points < 1 || self.starts < 1 || self.top_k < 1 {
            return Err(Error::InvalidParams("optimizer grid sizes must be positive".into()));
        }
        if self.third_angle && self.twist_points < 1 {
            return Err(Error::InvalidParams("twist_points must be positive".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParams("optimizer tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct OuterPoint {
    theta4: f64,
    phi4: f64,
    twist: f64,
    axes: [[f64; 3]; 3],
    /// Positions of `axes` in the optimizer's list of distinct axes.
    slots: [usize; 3],
}

/// Reusable optimizer with the outer grid of imaginarity axes precomputed.
#[derive(Debug, Clone)]
pub struct NaqiOptimizer {
    config: NaqiConfig,
    grid: Vec<OuterPoint>,
    /// Distinct axes up to sign; the measures only see `|b·e|`.
    unique_axes: Vec<[f64; 3]>,
    probes: Vec<[f64; 3]>,
}

fn axis_key(e: &[f64; 3]) -> [i64; 3] {
    let lead = e.iter().copied().find(|c| c.abs() > 1e-9).unwrap_or(1.0);
    let s = lead.signum();
    e.map(|c| (s * c * 1e9).round() as i64)
}

fn unit(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

fn angles_of(n: &[f64; 3]) -> (f64, f64) {
    let d = MeasurementDirection::from_vector(*n);
    (d.theta(), d.phi())
}

/// Fibonacci lattice on the sphere.
fn sphere_points(count: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let a = golden * i as f64;
            [r * a.cos(), r * a.sin(), z]
        })
        .collect()
}

impl NaqiOptimizer {
    pub fn new(config: NaqiConfig) -> Result<Self> {
        config.validate()?;
        let pi = std::f64::consts::PI;
        let twists: Vec<f64> = if config.third_angle {
            (0..config.twist_points)
                .map(|k| pi * k as f64 / config.twist_points as f64)
                .collect()
        } else {
            vec![0.0]
        };
        let mut grid = Vec::with_capacity(config.theta_points * config.phi_points * twists.len());
        let mut unique_axes = Vec::new();
        let mut seen = std::collections::HashMap::new();
        for j in 0..config.theta_points {
            let theta4 = pi * j as f64 / (config.theta_points - 1) as f64;
            for k in 0..config.phi_points {
                let phi4 = 2.0 * pi * k as f64 / config.phi_points as f64;
                for &twist in &twists {
                    let axes = MubTriple::from_angles(theta4, phi4, twist).axes();
                    let slots = axes.map(|e| {
                        *seen.entry(axis_key(&e)).or_insert_with(|| {
                            unique_axes.push(e);
                            unique_axes.len() - 1
                        })
                    });
                    grid.push(OuterPoint {
                        theta4,
                        phi4,
                        twist,
                        axes,
                        slots,
                    });
                }
            }
        }
        Ok(Self {
            config,
            grid,
            unique_axes,
            probes: sphere_points(24),
        })
    }

    pub fn config(&self) -> &NaqiConfig {
        &self.config
    }

    pub fn naqi(&self, rho: &TwoQubitState, kind: MeasureKind) -> NaqiResult {
        self.maximize(&Steering::new(&rho.pauli_decompose()), kind)
    }

    pub fn value(&self, rho: &TwoQubitState, kind: MeasureKind) -> f64 {
        self.naqi(rho, kind).value
    }

    fn nm_options(&self) -> NmOptions {
        NmOptions {
            ftol: self.config.tolerance,
            xtol: 1e-7,
            max_iter: 3000,
        }
    }

    fn screen_axis(&self, st: &Steering, e: &[f64; 3], kind: MeasureKind) -> f64 {
        match kind {
            MeasureKind::TraceNorm => st.trace_norm_exact(e).0,
            _ => st
                .candidate_directions(e, &self.probes)
                .iter()
                .map(|n| st.branch(n, e, kind))
                .fold(0.0, f64::max),
        }
    }

    fn maximize(&self, st: &Steering, kind: MeasureKind) -> NaqiResult {
        let per_axis: Vec<f64> = self.unique_axes.iter().map(|e| self.screen_axis(st, e, kind)).collect();
        let scores: Vec<f64> = self
            .grid
            .iter()
            .map(|p| p.slots.iter().map(|&i| per_axis[i]).sum())
            .collect();
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));

        let mut best: Option<(f64, MeasurementAngles, bool)> = None;
        for (rank, &idx) in order.iter().take(self.config.top_k).enumerate() {
            let (value, angles, converged) = match kind {
                MeasureKind::TraceNorm => self.refine_trace_norm(st, &self.grid[idx]),
                _ => self.refine_general(st, &self.grid[idx], kind, rank as u64),
            };
            if best.as_ref().is_none_or(|b| value > b.0 + 1e-12) {
                best = Some((value, angles, converged));
            }
        }
        let (value, argmax, converged) = best.expect("grid is non-empty");
        NaqiResult {
            value,
            argmax,
            witness: value > mub_sum_bound(kind),
            measure: kind,
            converged,
        }
    }

    fn triple_params(&self, x: &[f64]) -> (f64, f64, f64) {
        let twist = if self.config.third_angle { x[2] } else { 0.0 };
        (x[0], x[1], twist)
    }

    fn refine_trace_norm(&self, st: &Steering, start: &OuterPoint) -> (f64, MeasurementAngles, bool) {
        let objective = |x: &[f64]| {
            let (t4, p4, tw) = self.triple_params(x);
            let axes = MubTriple::from_angles(t4, p4, tw).axes();
            -axes.iter().map(|e| st.trace_norm_exact(e).0).sum::<f64>()
        };
        let mut x0 = vec![start.theta4, start.phi4];
        if self.config.third_angle {
            x0.push(start.twist);
        }
        let step = std::f64::consts::PI / self.config.theta_points as f64;
        let res = nelder_mead(objective, &x0, step, &self.nm_options());
        let (t4, p4, tw) = self.triple_params(&res.x);
        let axes = MubTriple::from_angles(t4, p4, tw).axes();
        let dirs = axes.map(|e| st.trace_norm_exact(&e).1);
        (-res.fx, self.assemble_angles(&dirs, t4, p4, tw), res.converged)
    }

    fn refine_general(
        &self,
        st: &Steering,
        start: &OuterPoint,
        kind: MeasureKind,
        rank: u64,
    ) -> (f64, MeasurementAngles, bool) {
        let opts = self.nm_options();
        let mut converged = true;
        let mut x = Vec::with_capacity(9);
        for (i, e) in start.axes.iter().enumerate() {
            let seed = self
                .config
                .seed
                .wrapping_mul(0x9e37_79b9_7f4a_7c15)
                .wrapping_add(rank * 3 + i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let screened = st
                .candidate_directions(e, &self.probes)
                .into_iter()
                .max_by(|a, b| st.branch(a, e, kind).total_cmp(&st.branch(b, e, kind)))
                .unwrap_or([0.0, 0.0, 1.0]);
            let mut inner_best: Option<(f64, Vec<f64>)> = None;
            for s in 0..self.config.starts {
                let (t0, p0) = if s == 0 {
                    angles_of(&screened)
                } else {
                    (
                        rng.random::<f64>().mul_add(2.0, -1.0).acos(),
                        rng.random_range(0.0..2.0 * std::f64::consts::PI),
                    )
                };
                let res = nelder_mead(|y| -st.branch(&unit(y[0], y[1]), e, kind), &[t0, p0], 0.4, &opts);
                converged &= res.converged;
                if inner_best.as_ref().is_none_or(|b| res.fx < b.0 - 1e-12) {
                    inner_best = Some((res.fx, res.x));
                }
            }
            x.extend(inner_best.expect("at least one start").1);
        }
        x.push(start.theta4);
        x.push(start.phi4);
        if self.config.third_angle {
            x.push(start.twist);
        }

        let objective = |y: &[f64]| {
            let (t4, p4, tw) = self.triple_params(&y[6..]);
            let axes = MubTriple::from_angles(t4, p4, tw).axes();
            -(0..3)
                .map(|i| st.branch(&unit(y[2 * i], y[2 * i + 1]), &axes[i], kind))
                .sum::<f64>()
        };
        let polish = nelder_mead(objective, &x, 0.05, &opts);
        converged &= polish.converged;
        let y = polish.x;
        let (t4, p4, tw) = self.triple_params(&y[6..]);
        let dirs = [0, 1, 2].map(|i| unit(y[2 * i], y[2 * i + 1]));
        (-polish.fx, self.assemble_angles(&dirs, t4, p4, tw), converged)
    }

    fn assemble_angles(&self, dirs: &[[f64; 3]; 3], theta4: f64, phi4: f64, twist: f64) -> MeasurementAngles {
        let mut theta = [0.0; 3];
        let mut phi = [0.0; 3];
        for i in 0..3 {
            (theta[i], phi[i]) = angles_of(&dirs[i]);
        }
        let (theta4, phi4) = wrap_sphere_angles(theta4, phi4);
        MeasurementAngles {
            theta,
            phi,
            theta4,
            phi4,
            twist: twist.rem_euclid(2.0 * std::f64::consts::PI),
        }
    }
}

/// One-shot maximization with a fresh optimizer.
pub fn naqi(rho: &TwoQubitState, kind: MeasureKind, config: &NaqiConfig) -> Result<NaqiResult> {
    Ok(NaqiOptimizer::new(config.clone())?.naqi(rho, kind))
}

/// Index `i` of the last sample above `bound` such that every later sample
/// is at or below it. `NoCrossing` if no sample exceeds the bound or the
/// final sample still does.
pub fn last_crossing(values: &[f64], bound: f64) -> Result<usize> {
    let last_above = values.iter().rposition(|&v| v > bound).ok_or(Error::NoCrossing)?;
    if last_above + 1 == values.len() {
        return Err(Error::NoCrossing);
    }
    Ok(last_above)
}

//! Single-excitation dynamics of two qubits coupled to a common lossy cavity
//! with a Lorentzian spectral density.
//!
//! Time is measured in units of `1/λ` wherever it is serialized; internally
//! all rates share the unit of `lambda`.

use nalgebra::Matrix3;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::Exponential;

/// Tolerance for the equal-detuning precondition.
pub const DETUNING_TOL: f64 = 1e-12;
/// Tolerance on normalization of the initial amplitudes.
pub const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams {
    /// Spectral width (cavity loss rate).
    pub lambda: f64,
    /// Dimensionless coupling `R`; the vacuum Rabi frequency is `R λ`.
    pub coupling: f64,
    /// Relative coupling of qubit A; `r_B = sqrt(1 - r_A^2)`.
    pub r_a: f64,
    pub delta_a: f64,
    pub delta_b: f64,
}

impl CavityParams {
    pub fn new(lambda: f64, coupling: f64, r_a: f64, delta_a: f64, delta_b: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParams(format!("lambda = {lambda} must be positive")));
        }
        if !(coupling >= 0.0 && coupling.is_finite()) {
            return Err(Error::InvalidParams(format!("R = {coupling} must be non-negative")));
        }
        if !(0.0..=1.0).contains(&r_a) {
            return Err(Error::InvalidParams(format!("r_A = {r_a} not in [0, 1]")));
        }
        if !delta_a.is_finite() || !delta_b.is_finite() {
            return Err(Error::InvalidParams("detunings must be finite".into()));
        }
        Ok(Self {
            lambda,
            coupling,
            r_a,
            delta_a,
            delta_b,
        })
    }

    /// Unit `λ`, equal detunings.
    pub fn resonant_family(coupling: f64, r_a: f64, delta: f64) -> Result<Self> {
        Self::new(1.0, coupling, r_a, delta, delta)
    }

    pub fn r_b(&self) -> f64 {
        (1.0 - self.r_a * self.r_a).max(0.0).sqrt()
    }

    /// Vacuum Rabi frequency `𝓡 = R λ`.
    pub fn rabi(&self) -> f64 {
        self.coupling * self.lambda
    }

    pub fn equal_detunings(&self) -> bool {
        (self.delta_a - self.delta_b).abs() <= DETUNING_TOL
    }

    pub fn with_detunings(&self, delta_a: f64, delta_b: f64) -> Self {
        Self {
            delta_a,
            delta_b,
            ..*self
        }
    }

    pub fn with_r_a(&self, r_a: f64) -> Self {
        Self { r_a, ..*self }
    }

    /// Generator `-i M` of the rotating-frame amplitudes `(a_A, a_B, a_c)`.
    pub fn generator(&self) -> Matrix3<C64> {
        let g_a = self.rabi() * self.r_a;
        let g_b = self.rabi() * self.r_b();
        let z = C64::from(0.0);
        let m = Matrix3::new(
            C64::from(self.delta_a), z, C64::from(g_a),
            z, C64::from(self.delta_b), C64::from(g_b),
            C64::from(g_a), C64::from(g_b), C64::new(0.0, -self.lambda),
        );
        m * C64::new(0.0, -1.0)
    }
}

/// Interaction-picture amplitudes of `|10>` and `|01>` at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudePair {
    pub c1: C64,
    pub c2: C64,
    pub t: f64,
}

impl AmplitudePair {
    pub fn norm_sqr(&self) -> f64 {
        self.c1.norm_sqr() + self.c2.norm_sqr()
    }
}

pub(crate) fn check_normalized(c10: C64, c20: C64) -> Result<()> {
    let n = c10.norm_sqr() + c20.norm_sqr();
    if (n - 1.0).abs() > NORM_TOL {
        return Err(Error::NormViolation(n));
    }
    Ok(())
}

/// `sinh(z)/z`, accurate near the origin.
fn sinhc(z: C64) -> C64 {
    if z.norm() < 1e-3 {
        let z2 = z * z;
        C64::from(1.0) + z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sinh() / z
    }
}

/// Evaluates the decay function for a chosen square root `d` of
/// `(λ - iδ)^2 - 4 𝓡^2`. Both roots give the same value.
fn p_with_root(t: f64, l: C64, d: C64) -> C64 {
    let x = d * (0.5 * t);
    if x.re.abs() < 20.0 {
        (-l * (0.5 * t)).exp() * (x.cosh() + l * (0.5 * t) * sinhc(x))
    } else {
        // Exponential form avoids overflow in cosh/sinh for large t.
        let d = if d.re < 0.0 { -d } else { d };
        let ratio = l / d;
        0.5 * ((1.0 + ratio) * ((d - l) * (0.5 * t)).exp()
            + (1.0 - ratio) * (-(d + l) * (0.5 * t)).exp())
    }
}

fn decay_root(params: &CavityParams) -> (C64, C64) {
    let l = C64::new(params.lambda, -params.delta_a);
    let r = params.rabi();
    let d = (l * l - 4.0 * r * r).sqrt();
    (l, d)
}

/// Decay function `p(t)` of the bright mode at equal detunings.
pub fn p_equal_detuning(t: f64, params: &CavityParams) -> Result<C64> {
    if !params.equal_detunings() {
        return Err(Error::InvalidParams(format!(
            "equal detunings required (delta_A = {}, delta_B = {})",
            params.delta_a, params.delta_b
        )));
    }
    let (l, d) = decay_root(params);
    Ok(p_with_root(t, l, d))
}

/// Closed-form amplitudes at equal detunings.
pub fn amplitudes_equal_detuning(
    t: f64,
    c10: C64,
    c20: C64,
    params: &CavityParams,
) -> Result<AmplitudePair> {
    check_normalized(c10, c20)?;
    let p = p_equal_detuning(t, params)?;
    Ok(combine(t, p, c10, c20, params))
}

fn combine(t: f64, p: C64, c10: C64, c20: C64, params: &CavityParams) -> AmplitudePair {
    let (ra, rb) = (params.r_a, params.r_b());
    let mix = ra * rb * (1.0 - p);
    AmplitudePair {
        c1: (rb * rb + ra * ra * p) * c10 - mix * c20,
        c2: (ra * ra + rb * rb * p) * c20 - mix * c10,
        t,
    }
}

/// Exact propagator for arbitrary detunings, precomputed once per parameter set.
#[derive(Debug, Clone)]
pub struct Propagator {
    params: CavityParams,
    exp: Exponential,
}

impl Propagator {
    pub fn new(params: &CavityParams) -> Self {
        Self {
            params: *params,
            exp: Exponential::new(params.generator()),
        }
    }

    pub fn params(&self) -> &CavityParams {
        &self.params
    }

    /// Rotating-frame amplitudes `(a_A, a_B, a_c)`.
    pub fn field(&self, t: f64, c10: C64, c20: C64) -> [C64; 3] {
        let u = self.exp.at(t);
        [0, 1, 2].map(|i| u[(i, 0)] * c10 + u[(i, 1)] * c20)
    }

    pub fn amplitudes(&self, t: f64, c10: C64, c20: C64) -> AmplitudePair {
        let [a1, a2, _] = self.field(t, c10, c20);
        AmplitudePair {
            c1: a1 * C64::from_polar(1.0, self.params.delta_a * t),
            c2: a2 * C64::from_polar(1.0, self.params.delta_b * t),
            t,
        }
    }
}

pub fn propagate_general(t: f64, c10: C64, c20: C64, params: &CavityParams) -> Result<AmplitudePair> {
    check_normalized(c10, c20)?;
    Ok(Propagator::new(params).amplitudes(t, c10, c20))
}

/// Effective dispersive-limit couplings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dispersive {
    pub stark_a: f64,
    pub stark_b: f64,
    pub dipole_a: f64,
    pub dipole_b: f64,
}

pub fn dispersive_params(params: &CavityParams) -> Result<Dispersive> {
    if params.delta_a == 0.0 || params.delta_b == 0.0 {
        return Err(Error::ZeroDetuning);
    }
    let r2 = params.rabi().powi(2);
    let (ra, rb) = (params.r_a, params.r_b());
    Ok(Dispersive {
        stark_a: r2 * ra * ra / params.delta_a,
        stark_b: r2 * rb * rb / params.delta_b,
        dipole_a: r2 * ra * rb / (2.0 * params.delta_a),
        dipole_b: r2 * ra * rb / (2.0 * params.delta_b),
    })
}

/// Envelope value with a flag telling whether the dispersive approximation
/// behind it applies (equal detunings, symmetric coupling, `|δ| ≫ λ ≫ 𝓡`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub value: f64,
    pub valid: bool,
}

fn envelope_validity(params: &CavityParams) -> bool {
    params.equal_detunings()
        && (params.r_a - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9
        && params.delta_a.abs() >= 10.0 * params.lambda
        && params.lambda >= 10.0 * params.rabi()
}

fn dispersive_exponent(t: f64, params: &CavityParams) -> f64 {
    (params.rabi() / params.delta_a).powi(2) * params.lambda * t
}

pub fn naqi_envelope(t: f64, params: &CavityParams) -> Envelope {
    Envelope {
        value: 3.0 * (-2.0 * dispersive_exponent(t, params)).exp(),
        valid: envelope_validity(params),
    }
}

pub fn dia_envelope(t: f64, params: &CavityParams) -> Envelope {
    Envelope {
        value: (-dispersive_exponent(t, params)).exp(),
        valid: envelope_validity(params),
    }
}

/// Long-time amplitudes at equal detunings: only the dark component survives.
pub fn stationary_amplitudes(c10: C64, c20: C64, params: &CavityParams) -> (C64, C64) {
    let (ra, rb) = (params.r_a, params.r_b());
    let beta_minus = rb * c10 - ra * c20;
    (rb * beta_minus, -ra * beta_minus)
}

/// Repeated projective checks of the initial state at interval `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZenoSpec {
    pub interval: f64,
    pub count: u32,
    pub c10: C64,
    pub c20: C64,
}

impl ZenoSpec {
    pub fn new(interval: f64, count: u32, c10: C64, c20: C64) -> Result<Self> {
        if !(interval > 0.0 && interval.is_finite()) {
            return Err(Error::InvalidParams(format!("interval {interval} must be positive")));
        }
        if count == 0 {
            return Err(Error::InvalidParams("measurement count must be at least 1".into()));
        }
        check_normalized(c10, c20)?;
        Ok(Self {
            interval,
            count,
            c10,
            c20,
        })
    }
}

/// Single-interval survival probability `|β+^2 p(T) + β-^2|^2`.
fn single_survival(interval: f64, c10: C64, c20: C64, params: &CavityParams) -> Result<f64> {
    let (ra, rb) = (params.r_a, params.r_b());
    let beta_plus = ra * c10 + rb * c20;
    let beta_minus = rb * c10 - ra * c20;
    let p = p_equal_detuning(interval, params)?;
    Ok((beta_plus.norm_sqr() * p + beta_minus.norm_sqr()).norm_sqr())
}

pub fn zeno_survival(spec: &ZenoSpec, params: &CavityParams) -> Result<f64> {
    let s = single_survival(spec.interval, spec.c10, spec.c20, params)?;
    Ok(s.powf(spec.count as f64))
}

/// Effective decay rate `γ0(T)` such that `P^(N)(NT) = exp(-γ0 N T)`.
pub fn zeno_rate(interval: f64, params: &CavityParams, c10: C64, c20: C64) -> Result<f64> {
    let spec = ZenoSpec::new(interval, 1, c10, c20)?;
    let s = single_survival(spec.interval, c10, c20, params)?;
    Ok(-s.ln() / interval)
}

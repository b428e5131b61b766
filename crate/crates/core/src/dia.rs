//! Distillable imaginarity of assistance: the assisted fidelity of
//! imaginarity in closed form.

use num_complex::Complex64 as C64;

use crate::cavity::check_normalized;
use crate::error::{Error, Result};
use crate::qstate::{norm3, TwoQubitState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiaResult {
    pub fidelity: f64,
    /// `|s| > |v02|`: Alice's assistance beats Bob acting alone.
    pub advantage: bool,
    /// `(v12, v22, v32)`.
    pub s: [f64; 3],
    pub v02: f64,
}

/// `F_a = (1 + max{|v02|, |s|})/2` with `s = (v12, v22, v32)`.
pub fn assisted_fidelity(rho: &TwoQubitState) -> DiaResult {
    let v = rho.pauli_decompose();
    let s = [v.get(1, 2), v.get(2, 2), v.get(3, 2)];
    let v02 = v.get(0, 2);
    let sn = norm3(&s);
    DiaResult {
        fidelity: 0.5 * (1.0 + sn.max(v02.abs())),
        advantage: sn > v02.abs(),
        s,
        v02,
    }
}

/// Single-excitation specialization: `1/2 + |c1 c2*|`.
pub fn assisted_fidelity_amplitudes(c1: C64, c2: C64) -> Result<f64> {
    let n = c1.norm_sqr() + c2.norm_sqr();
    if !n.is_finite() || n > 1.0 + 1e-10 {
        return Err(Error::NormViolation(n));
    }
    Ok(0.5 + (c1 * c2.conj()).norm())
}

/// Infinite-time limit at equal detunings: `1/2 + r_A r_B |r_B c10 - r_A c20|^2`.
pub fn dia_asymptotic(r_a: f64, c10: C64, c20: C64) -> Result<f64> {
    check_normalized(c10, c20)?;
    if !(0.0..=1.0).contains(&r_a) {
        return Err(Error::InvalidParams(format!("r_A = {r_a} not in [0, 1]")));
    }
    let r_b = (1.0 - r_a * r_a).max(0.0).sqrt();
    Ok(0.5 + r_a * r_b * (r_b * c10 - r_a * c20).norm_sqr())
}

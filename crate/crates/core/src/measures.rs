//! Qubit imaginarity measures, mutually unbiased reference bases and the
//! single-qubit upper bounds on their MUB sums.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::optim::{nelder_mead, NmOptions};
use crate::qstate::{pauli, QubitState, QUBIT_TOL};

/// Which imaginarity measure to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasureKind {
    /// Trace norm (equal to the robustness of imaginarity).
    TraceNorm,
    RelativeEntropy,
    Geometric,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 3] = [
        MeasureKind::TraceNorm,
        MeasureKind::RelativeEntropy,
        MeasureKind::Geometric,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            MeasureKind::TraceNorm => "tr",
            MeasureKind::RelativeEntropy => "re",
            MeasureKind::Geometric => "g",
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tr" | "trace" | "tracenorm" | "trace_norm" => Ok(MeasureKind::TraceNorm),
            "re" | "relative_entropy" | "relativeentropy" => Ok(MeasureKind::RelativeEntropy),
            "g" | "geometric" => Ok(MeasureKind::Geometric),
            other => Err(Error::InvalidParams(format!("unknown measure `{other}`"))),
        }
    }
}

/// An ordered orthonormal pair of kets. Imaginarity is defined relative to
/// the matrix elements in this basis, so ket phases matter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceBasis {
    kets: [Vector2<C64>; 2],
}

impl ReferenceBasis {
    pub fn new(first: Vector2<C64>, second: Vector2<C64>) -> Result<Self> {
        let n0 = first.norm_squared();
        let n1 = second.norm_squared();
        let overlap = first.dotc(&second).norm();
        if (n0 - 1.0).abs() > QUBIT_TOL || (n1 - 1.0).abs() > QUBIT_TOL || overlap > QUBIT_TOL {
            return Err(Error::InvalidParams(format!(
                "basis not orthonormal (norms {n0}, {n1}; overlap {overlap:e})"
            )));
        }
        Ok(Self {
            kets: [first, second],
        })
    }

    /// `{|1>, |0>}`.
    pub fn computational() -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        Self {
            kets: [Vector2::new(one, zero), Vector2::new(zero, one)],
        }
    }

    pub fn kets(&self) -> &[Vector2<C64>; 2] {
        &self.kets
    }

    /// Columns are the basis kets.
    pub fn unitary(&self) -> Matrix2<C64> {
        Matrix2::from_columns(&self.kets)
    }

    /// Bloch direction whose component is the imaginary part in this basis:
    /// the Bloch vector of `U σ_2 U^†`.
    pub fn imaginarity_axis(&self) -> [f64; 3] {
        let u = self.unitary();
        let s = u * pauli(2) * u.adjoint();
        [1, 2, 3].map(|k| 0.5 * (s * pauli(k)).trace().re)
    }

    pub fn apply(&self, u: &Matrix2<C64>) -> Self {
        Self {
            kets: [u * self.kets[0], u * self.kets[1]],
        }
    }
}

/// Three mutually unbiased bases `M_1, M_2, M_3` generated from a ket pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MubTriple {
    bases: [ReferenceBasis; 3],
}

impl MubTriple {
    /// The two-angle family:
    /// `M_1^+ = cos(θ/2)|1> + e^{iφ} sin(θ/2)|0>`,
    /// `M_1^- = sin(θ/2)|1> - e^{iφ} cos(θ/2)|0>`,
    /// `M_2^± = (M_1^+ ± M_1^-)/√2`, `M_3^± = (M_1^+ ± i M_1^-)/√2`.
    pub fn new(theta4: f64, phi4: f64) -> Result<Self> {
        let pi = std::f64::consts::PI;
        if !(-QUBIT_TOL..=pi + QUBIT_TOL).contains(&theta4) {
            return Err(Error::AngleRange(format!("theta4 = {theta4} not in [0, pi]")));
        }
        if !(-QUBIT_TOL..=2.0 * pi + QUBIT_TOL).contains(&phi4) {
            return Err(Error::AngleRange(format!("phi4 = {phi4} not in [0, 2pi]")));
        }
        Ok(Self::from_angles(theta4, phi4, 0.0))
    }

    /// Adds a residual phase `e^{iχ}` on `M_1^-`, which rotates the frame about
    /// the `M_1` axis and makes the family span the full unitary class.
    pub fn with_twist(theta4: f64, phi4: f64, twist: f64) -> Result<Self> {
        let base = Self::new(theta4, phi4)?;
        if twist == 0.0 {
            return Ok(base);
        }
        Ok(Self::from_angles(theta4, phi4, twist))
    }

    /// No range checks; used by the optimizer, which explores unbounded angles.
    pub(crate) fn from_angles(theta4: f64, phi4: f64, twist: f64) -> Self {
        let (s, c) = (0.5 * theta4).sin_cos();
        let w = C64::from_polar(1.0, phi4);
        let plus = Vector2::new(C64::new(c, 0.0), w * s);
        let minus = Vector2::new(C64::new(s, 0.0), -w * c) * C64::from_polar(1.0, twist);
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let i = C64::new(0.0, 1.0);
        let basis = |a: Vector2<C64>, b: Vector2<C64>| ReferenceBasis { kets: [a, b] };
        Self {
            bases: [
                basis(plus, minus),
                basis((plus + minus) * h, (plus - minus) * h),
                basis((plus + minus * i) * h, (plus - minus * i) * h),
            ],
        }
    }

    pub fn bases(&self) -> &[ReferenceBasis; 3] {
        &self.bases
    }

    pub fn axes(&self) -> [[f64; 3]; 3] {
        self.bases.map(|b| b.imaginarity_axis())
    }
}

/// Binary entropy in bits, `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    term(p) + term(1.0 - p)
}

/// Von Neumann entropy (bits) of a 2x2 Hermitian unit-trace matrix.
fn entropy2(m: &Matrix2<C64>) -> f64 {
    let tr = m.trace().re;
    let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    binary_entropy(0.5 * (tr + disc) / tr)
}

/// Uhlmann fidelity of two 2x2 density matrices:
/// `F = tr(ρσ) + 2 sqrt(det ρ det σ)`.
fn fidelity2(a: &Matrix2<C64>, b: &Matrix2<C64>) -> f64 {
    let det = |m: &Matrix2<C64>| (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re.max(0.0);
    ((a * b).trace().re + 2.0 * (det(a) * det(b)).sqrt()).clamp(0.0, 1.0)
}

/// Trace norm of a 2x2 matrix: `sqrt(|A|_F^2 + 2|det A|)`.
fn trace_norm2(a: &Matrix2<C64>) -> f64 {
    let det = (a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)]).norm();
    (a.norm_squared() + 2.0 * det).max(0.0).sqrt()
}

/// Imaginarity of `rho` with respect to `basis`, evaluated from the matrix
/// written in that basis.
pub fn measure(rho: &QubitState, basis: &ReferenceBasis, kind: MeasureKind) -> f64 {
    let u = basis.unitary();
    let m = u.adjoint() * rho.matrix() * u;
    let mt = m.transpose();
    match kind {
        MeasureKind::TraceNorm => 0.5 * trace_norm2(&(m - mt)),
        MeasureKind::RelativeEntropy => {
            let real = (m + mt) * C64::new(0.5, 0.0);
            (entropy2(&real) - entropy2(&m)).max(0.0)
        }
        MeasureKind::Geometric => 0.5 * (1.0 - fidelity2(&m, &mt).sqrt()),
    }
}

/// Same quantity from the Bloch length `r` and the component `b_axis` along
/// the basis' imaginarity axis. All three measures depend on nothing else.
pub fn measure_from_bloch(kind: MeasureKind, r: f64, b_axis: f64) -> f64 {
    let r = r.min(1.0);
    let b_axis = b_axis.abs().min(r);
    match kind {
        MeasureKind::TraceNorm => b_axis,
        MeasureKind::RelativeEntropy => {
            let r_real = (r * r - b_axis * b_axis).max(0.0).sqrt();
            (binary_entropy(0.5 * (1.0 + r_real)) - binary_entropy(0.5 * (1.0 + r))).max(0.0)
        }
        MeasureKind::Geometric => 0.5 * (1.0 - (1.0 - b_axis * b_axis).max(0.0).sqrt()),
    }
}

/// Single-qubit upper bound on the sum of a measure over three MUBs.
pub fn mub_sum_bound(kind: MeasureKind) -> f64 {
    match kind {
        MeasureKind::TraceNorm => 5f64.sqrt(),
        // Five decimals as published; `verify_bound` recomputes it.
        MeasureKind::RelativeEntropy => 2.02685,
        MeasureKind::Geometric => 1.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub value: f64,
    pub bloch: [f64; 3],
    pub converged: bool,
}

/// Numerically maximizes the MUB sum over the Bloch ball for the fixed
/// triple at `θ4 = φ4 = 0`. Maximizing over bases and over the unitary orbit
/// of states are equivalent, so this recovers the bound.
pub fn verify_bound(kind: MeasureKind) -> BoundCheck {
    let triple = MubTriple::from_angles(0.0, 0.0, 0.0);
    let bloch_of = |x: &[f64]| -> [f64; 3] {
        let r = x[0].sin().powi(2);
        let (st, ct) = x[1].sin_cos();
        let (sp, cp) = x[2].sin_cos();
        [r * st * cp, r * st * sp, r * ct]
    };
    let objective = |x: &[f64]| -> f64 {
        let Ok(q) = QubitState::from_bloch(bloch_of(x)) else {
            return f64::INFINITY;
        };
        -triple.bases().iter().map(|b| measure(&q, b, kind)).sum::<f64>()
    };
    let opts = NmOptions {
        ftol: 1e-15,
        xtol: 1e-11,
        max_iter: 4000,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut best: Option<crate::optim::NmResult> = None;
    for start in 0..16 {
        let x0 = if start == 0 {
            vec![1.2, 1.3, 1.4]
        } else {
            vec![
                rng.random_range(0.2..1.5),
                rng.random_range(0.0..std::f64::consts::PI),
                rng.random_range(0.0..2.0 * std::f64::consts::PI),
            ]
        };
        let res = nelder_mead(objective, &x0, 0.3, &opts);
        if best.as_ref().is_none_or(|b| res.fx < b.fx - 1e-14) {
            best = Some(res);
        }
    }
    let best = best.expect("at least one start");
    BoundCheck {
        value: -best.fx,
        bloch: bloch_of(&best.x),
        converged: best.converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{random_qubit_state, random_unitary2};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn maximally_imaginary_state() {
        // (|0> + i|1>)/√2 has b_2 = -1 in the {|1>,|0>} ordering.
        let ket = Vector2::new(C64::new(0.0, FRAC_1_SQRT_2), C64::new(FRAC_1_SQRT_2, 0.0));
        let m = ket * ket.adjoint();
        let q = QubitState::from_matrix(&m).unwrap();
        let z = ReferenceBasis::computational();
        assert!((measure(&q, &z, MeasureKind::TraceNorm) - 1.0).abs() < 1e-12);
        assert!((measure(&q, &z, MeasureKind::RelativeEntropy) - 1.0).abs() < 1e-12);
        assert!((measure(&q, &z, MeasureKind::Geometric) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn real_states_have_zero_imaginarity() {
        let z = ReferenceBasis::computational();
        let q = QubitState::from_bloch([0.3, 0.0, -0.6]).unwrap();
        for kind in MeasureKind::ALL {
            assert!(measure(&q, &z, kind).abs() < 1e-14);
        }
    }

    #[test]
    fn pure_state_example_against_eigenvalue_oracle() {
        let q = QubitState::from_bloch([0.0, 0.6, 0.8]).unwrap();
        let z = ReferenceBasis::computational();
        // ρ_R has Bloch (0, 0, 0.8): eigenvalues 0.9, 0.1; ρ is pure.
        let oracle = -(0.9f64 * 0.9f64.log2() + 0.1 * 0.1f64.log2());
        assert!((measure(&q, &z, MeasureKind::TraceNorm) - 0.6).abs() < 1e-12);
        assert!((measure(&q, &z, MeasureKind::RelativeEntropy) - oracle).abs() < 1e-12);
        assert!((measure(&q, &z, MeasureKind::Geometric) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn matrix_route_matches_bloch_route() {
        let mut r = rng(10);
        for _ in 0..500 {
            let q = random_qubit_state(&mut r);
            let t = MubTriple::new(r.random_range(0.0..PI), r.random_range(0.0..2.0 * PI)).unwrap();
            for b in t.bases() {
                let e = b.imaginarity_axis();
                let be = crate::qstate::dot3(&q.bloch(), &e);
                for kind in MeasureKind::ALL {
                    let a = measure(&q, b, kind);
                    let f = measure_from_bloch(kind, q.bloch_length(), be);
                    assert!((a - f).abs() < 1e-10, "{kind}: {a} vs {f}");
                }
            }
        }
    }

    #[test]
    fn mub_triple_at_origin_is_computational() {
        let t = MubTriple::new(0.0, 0.0).unwrap();
        let k = t.bases()[0].kets();
        assert!((k[0] - Vector2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0))).norm() < 1e-15);
        // |1> then -|0>: the same rays as the computational basis.
        assert!((k[1] - Vector2::new(C64::new(0.0, 0.0), C64::new(-1.0, 0.0))).norm() < 1e-15);
    }

    #[test]
    fn mub_triple_explicit_expansion() {
        // θ4 = π/2, φ4 = π/3: cos = sin = 1/√2, w = 1/2 + i√3/2.
        let t = MubTriple::new(PI / 2.0, PI / 3.0).unwrap();
        let h = FRAC_1_SQRT_2;
        let w = C64::new(0.5, 3f64.sqrt() / 2.0);
        let plus = Vector2::new(C64::new(h, 0.0), w * h);
        let minus = Vector2::new(C64::new(h, 0.0), -w * h);
        let k = t.bases();
        assert!((k[0].kets()[0] - plus).norm() < 1e-15);
        assert!((k[0].kets()[1] - minus).norm() < 1e-15);
        // M_2^+ = (plus + minus)/√2 = |1>; M_2^- = w|0>.
        assert!((k[1].kets()[0] - Vector2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0))).norm() < 1e-15);
        assert!((k[1].kets()[1] - Vector2::new(C64::new(0.0, 0.0), w)).norm() < 1e-15);
        // M_3^+ = ((1+i)|1> + (1-i) w |0>)/2.
        let m3p = Vector2::new(C64::new(0.5, 0.5), C64::new(0.5, -0.5) * w);
        assert!((k[2].kets()[0] - m3p).norm() < 1e-15);
    }

    #[test]
    fn mub_triples_are_unbiased() {
        let mut r = rng(11);
        for _ in 0..200 {
            let t = MubTriple::with_twist(
                r.random_range(0.0..PI),
                r.random_range(0.0..2.0 * PI),
                r.random_range(0.0..2.0 * PI),
            )
            .unwrap();
            let b = t.bases();
            for i in 0..3 {
                assert!(ReferenceBasis::new(b[i].kets()[0], b[i].kets()[1]).is_ok());
                for j in 0..3 {
                    if i == j {
                        continue;
                    }
                    for u in b[i].kets() {
                        for v in b[j].kets() {
                            assert!((u.dotc(v).norm_sqr() - 0.5).abs() < 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_out_of_range_angles() {
        assert!(MubTriple::new(-0.1, 0.0).is_err());
        assert!(MubTriple::new(0.0, 7.0).is_err());
    }

    #[test]
    fn bound_values() {
        assert_eq!(mub_sum_bound(MeasureKind::TraceNorm), 5f64.sqrt());
        assert_eq!(mub_sum_bound(MeasureKind::Geometric), 1.0);
        assert_eq!(mub_sum_bound(MeasureKind::RelativeEntropy), 2.02685);
    }

    #[test]
    fn verify_trace_norm_bound() {
        let c = verify_bound(MeasureKind::TraceNorm);
        assert!((c.value - 5f64.sqrt()).abs() < 1e-6, "{}", c.value);
        // Lagrange optimum of 2|b_2| + |b_1| on the unit disc.
        let b = c.bloch.map(f64::abs);
        assert!((b[0] - 1.0 / 5f64.sqrt()).abs() < 1e-3);
        assert!((b[1] - 2.0 / 5f64.sqrt()).abs() < 1e-3);
        assert!(b[2] < 1e-3);
    }

    #[test]
    fn verify_geometric_bound() {
        let c = verify_bound(MeasureKind::Geometric);
        assert!((c.value - 1.0).abs() < 1e-6, "{}", c.value);
        assert!(c.bloch[0].abs() < 1e-3 && (c.bloch[1].abs() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn verify_relative_entropy_bound() {
        let c = verify_bound(MeasureKind::RelativeEntropy);
        assert!((c.value - 2.02685).abs() < 1e-4, "{}", c.value);
    }

    #[test]
    fn faithfulness() {
        let mut r = rng(12);
        let z = ReferenceBasis::computational();
        for _ in 0..1000 {
            let q = random_qubit_state(&mut r);
            let real = QubitState::from_bloch([q.bloch()[0], 0.0, q.bloch()[2]]).unwrap();
            for kind in MeasureKind::ALL {
                assert!(measure(&real, &z, kind).abs() < 1e-12);
                let v = measure(&q, &z, kind);
                assert!(v > 0.0, "{kind}: b2 = {} gave {v}", q.bloch()[1]);
            }
        }
    }

    #[test]
    fn mixing_convexity() {
        let mut r = rng(13);
        let z = ReferenceBasis::computational();
        for _ in 0..500 {
            let states: Vec<_> = (0..3).map(|_| random_qubit_state(&mut r)).collect();
            let w: Vec<f64> = (0..3).map(|_| r.random::<f64>()).collect();
            let total: f64 = w.iter().sum();
            let mut mix = [0.0; 3];
            for (q, wi) in states.iter().zip(&w) {
                for k in 0..3 {
                    mix[k] += wi / total * q.bloch()[k];
                }
            }
            let mix = QubitState::from_bloch(mix).unwrap();
            for kind in MeasureKind::ALL {
                let avg: f64 = states.iter().zip(&w).map(|(q, wi)| wi / total * measure(q, &z, kind)).sum();
                assert!(measure(&mix, &z, kind) <= avg + 1e-10);
            }
        }
    }

    #[test]
    fn basis_covariance() {
        let mut r = rng(14);
        for _ in 0..300 {
            let q = random_qubit_state(&mut r);
            let u = random_unitary2(&mut r);
            let rotated = QubitState::from_matrix(&(u * q.matrix() * u.adjoint())).unwrap();
            let basis = MubTriple::new(r.random_range(0.0..PI), r.random_range(0.0..2.0 * PI))
                .unwrap()
                .bases()[2];
            for kind in MeasureKind::ALL {
                let a = measure(&q, &basis, kind);
                let b = measure(&rotated, &basis.apply(&u), kind);
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn geometric_equal_in_sigma1_and_sigma3_eigenbases() {
        let mut r = rng(15);
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        let x_basis = ReferenceBasis::new(Vector2::new(h, h), Vector2::new(h, -h)).unwrap();
        let z = ReferenceBasis::computational();
        for _ in 0..500 {
            let q = random_qubit_state(&mut r);
            let gx = measure(&q, &x_basis, MeasureKind::Geometric);
            let gz = measure(&q, &z, MeasureKind::Geometric);
            assert!((gx - gz).abs() < 1e-12);
        }
    }

    #[test]
    fn relative_entropy_of_pure_state_is_entropy_of_real_part() {
        let mut r = rng(16);
        let z = ReferenceBasis::computational();
        for _ in 0..200 {
            let v: [f64; 3] = std::array::from_fn(|_| r.random_range(-1.0..1.0));
            let n = crate::qstate::norm3(&v);
            let q = QubitState::from_bloch(v.map(|x| x / n)).unwrap();
            let m = q.matrix();
            let real = (m + m.transpose()) * C64::new(0.5, 0.0);
            assert!((measure(&q, &z, MeasureKind::RelativeEntropy) - entropy2(&real)).abs() < 1e-9);
        }
    }
}

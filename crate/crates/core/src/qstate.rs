//! One- and two-qubit density operators.
//!
//! Basis ordering is `{|1>, |0>}` for a single qubit and
//! `{|11>, |10>, |01>, |00>}` for two qubits (qubit A first), with
//! `sigma_3 |1> = +|1>` and `sigma_3 |0> = -|0>`. This is the opposite of the
//! common `sigma_z = diag(1, -1)`-on-`|0>` convention, and it is the one under
//! which the single-excitation population `|c1|^2` sits at matrix index
//! `(1, 1)` (zero-based) and the steered Bloch vectors take their textbook
//! form.

use std::sync::OnceLock;

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Entrywise tolerance for Hermiticity and trace of single-qubit states.
pub const QUBIT_TOL: f64 = 1e-12;
/// Eigenvalues in `[-CLIP_TOL, 0)` are clipped to zero; below that is an error.
pub const CLIP_TOL: f64 = 1e-10;
/// Outcome probabilities below this leave the conditional state undefined.
pub const DEGENERATE_PROB: f64 = 1e-12;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Pauli matrix `sigma_k` (`k = 0` is the identity) in the `{|1>, |0>}` ordering.
pub fn pauli(k: usize) -> Matrix2<C64> {
    match k {
        0 => Matrix2::new(ONE, ZERO, ZERO, ONE),
        1 => Matrix2::new(ZERO, ONE, ONE, ZERO),
        2 => Matrix2::new(ZERO, -I, I, ZERO),
        3 => Matrix2::new(ONE, ZERO, ZERO, -ONE),
        _ => panic!("pauli index {k} out of range"),
    }
}

fn pauli_products() -> &'static [[Matrix4<C64>; 4]; 4] {
    static TABLE: OnceLock<[[Matrix4<C64>; 4]; 4]> = OnceLock::new();
    TABLE.get_or_init(|| {
        std::array::from_fn(|k| std::array::from_fn(|l| pauli(k).kronecker(&pauli(l))))
    })
}

/// `Re tr(a b)` without forming the product.
fn trace_product_re(a: &Matrix4<C64>, b: &Matrix4<C64>) -> f64 {
    let mut acc = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

/// Single-qubit density operator, stored as its Bloch vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    bloch: [f64; 3],
}

impl QubitState {
    pub fn from_bloch(bloch: [f64; 3]) -> Result<Self> {
        let r = norm3(&bloch);
        if !r.is_finite() || r > 1.0 + QUBIT_TOL {
            return Err(Error::InvalidState(format!("Bloch vector length {r} exceeds 1")));
        }
        Ok(Self { bloch })
    }

    /// Accepts round-off overshoot up to `CLIP_TOL` on the eigenvalues and
    /// projects it back onto the Bloch sphere.
    pub(crate) fn from_bloch_clipped(bloch: [f64; 3]) -> Result<Self> {
        let r = norm3(&bloch);
        if !r.is_finite() || r > 1.0 + 2.0 * CLIP_TOL {
            return Err(Error::InvalidState(format!("Bloch vector length {r} exceeds 1")));
        }
        if r > 1.0 {
            return Ok(Self {
                bloch: bloch.map(|x| x / r),
            });
        }
        Ok(Self { bloch })
    }

    pub fn from_matrix(m: &Matrix2<C64>) -> Result<Self> {
        let herm = (m - m.adjoint()).camax();
        if herm > QUBIT_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = m.trace();
        if (tr - ONE).norm() > QUBIT_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let bloch = [1, 2, 3].map(|k| (m * pauli(k)).trace().re);
        Self::from_bloch(bloch)
    }

    pub fn maximally_mixed() -> Self {
        Self { bloch: [0.0; 3] }
    }

    pub fn bloch(&self) -> [f64; 3] {
        self.bloch
    }

    pub fn bloch_length(&self) -> f64 {
        norm3(&self.bloch)
    }

    pub fn matrix(&self) -> Matrix2<C64> {
        let [b1, b2, b3] = self.bloch;
        (pauli(0) + pauli(1) * C64::from(b1) + pauli(2) * C64::from(b2) + pauli(3) * C64::from(b3)) * C64::from(0.5)
    }
}

/// Two-qubit density operator in the `{|11>, |10>, |01>, |00>}` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    m: Matrix4<C64>,
}

impl TwoQubitState {
    /// Validates Hermiticity, unit trace and positivity. Eigenvalues in
    /// `[-1e-10, 0)` are clipped and the result renormalized.
    pub fn new(m: Matrix4<C64>) -> Result<Self> {
        Self::with_tolerance(m, CLIP_TOL)
    }

    /// As [`Self::new`] with a caller-chosen tolerance, for matrices carrying
    /// a known numerical error such as integrator output.
    pub fn with_tolerance(m: Matrix4<C64>, tol: f64) -> Result<Self> {
        let tol = tol.max(CLIP_TOL);
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite matrix entry".into()));
        }
        let herm = (m - m.adjoint()).camax();
        if herm > tol {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:e})")));
        }
        let m = (m + m.adjoint()) * C64::new(0.5, 0.0);
        let tr = m.trace().re;
        if (tr - 1.0).abs() > tol {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let m = m / C64::new(tr, 0.0);

        let eig = m.symmetric_eigen();
        let min = eig.eigenvalues.min();
        if min < -tol {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        if min >= 0.0 {
            return Ok(Self { m });
        }
        let clipped = eig.eigenvalues.map(|x| x.max(0.0));
        let total = clipped.sum();
        let mut rebuilt = Matrix4::zeros();
        for (k, &w) in clipped.iter().enumerate() {
            let v = eig.eigenvectors.column(k);
            rebuilt += v * v.adjoint() * C64::new(w / total, 0.0);
        }
        Ok(Self { m: rebuilt })
    }

    pub fn maximally_mixed() -> Self {
        Self {
            m: Matrix4::identity() * C64::new(0.25, 0.0),
        }
    }

    /// `|psi><psi|` for a (not necessarily normalized) state vector.
    pub fn pure(psi: &Vector4<C64>) -> Result<Self> {
        let n = psi.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let psi = psi / C64::new(n, 0.0);
        Self::new(psi * psi.adjoint())
    }

    pub fn product(a: &QubitState, b: &QubitState) -> Self {
        Self {
            m: a.matrix().kronecker(&b.matrix()),
        }
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.m
    }

    /// `(U_A ⊗ U_B) rho (U_A ⊗ U_B)^†`.
    pub fn local_unitary(&self, ua: &Matrix2<C64>, ub: &Matrix2<C64>) -> Result<Self> {
        let u = ua.kronecker(ub);
        Self::new(u * self.m * u.adjoint())
    }

    pub fn reduced_a(&self) -> QubitState {
        let v = self.pauli_decompose();
        QubitState {
            bloch: [v.get(1, 0), v.get(2, 0), v.get(3, 0)],
        }
    }

    pub fn reduced_b(&self) -> QubitState {
        let v = self.pauli_decompose();
        QubitState {
            bloch: [v.get(0, 1), v.get(0, 2), v.get(0, 3)],
        }
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        let e = self.m.symmetric_eigenvalues();
        [e[0], e[1], e[2], e[3]]
    }

    pub fn pauli_decompose(&self) -> PauliTensor {
        let table = pauli_products();
        let v = std::array::from_fn(|k| std::array::from_fn(|l| trace_product_re(&self.m, &table[k][l])));
        PauliTensor { v }
    }

    pub fn from_pauli(v: &PauliTensor) -> Result<Self> {
        Self::new(v.recompose())
    }

    /// Bob's state after Alice measures along `n` and obtains `outcome`,
    /// computed by explicit projection and partial trace.
    pub fn conditional_state(
        &self,
        n: &MeasurementDirection,
        outcome: Outcome,
    ) -> Result<(f64, QubitState)> {
        let proj = n.projector(outcome).kronecker(&pauli(0));
        let post = proj * self.m * proj;
        let mut b = Matrix2::<C64>::zeros();
        for a in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    b[(i, j)] += post[(2 * a + i, 2 * a + j)];
                }
            }
        }
        let p = b.trace().re;
        if p < DEGENERATE_PROB {
            return Err(Error::DegenerateOutcome(p));
        }
        let bloch = [1, 2, 3].map(|k| (b * pauli(k)).trace().re / p);
        Ok((p, QubitState::from_bloch_clipped(bloch)?))
    }
}

/// Expansion coefficients `v_kl = tr(rho sigma_k ⊗ sigma_l)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliTensor {
    v: [[f64; 4]; 4],
}

impl PauliTensor {
    pub fn new(v: [[f64; 4]; 4]) -> Self {
        Self { v }
    }

    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.v[k][l]
    }

    pub fn entries(&self) -> &[[f64; 4]; 4] {
        &self.v
    }

    /// `rho = 1/4 sum_kl v_kl sigma_k ⊗ sigma_l`.
    pub fn recompose(&self) -> Matrix4<C64> {
        let table = pauli_products();
        let mut m = Matrix4::zeros();
        for k in 0..4 {
            for l in 0..4 {
                m += table[k][l] * C64::new(0.25 * self.v[k][l], 0.0);
            }
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }
}

/// Unit vector `n = (sin θ cos φ, sin θ sin φ, cos θ)` with `θ ∈ [0, π]`, `φ ∈ [0, 2π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementDirection {
    theta: f64,
    phi: f64,
}

impl MeasurementDirection {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        let pi = std::f64::consts::PI;
        if !(-QUBIT_TOL..=pi + QUBIT_TOL).contains(&theta) {
            return Err(Error::AngleRange(format!("theta = {theta} not in [0, pi]")));
        }
        if !(-QUBIT_TOL..=2.0 * pi + QUBIT_TOL).contains(&phi) {
            return Err(Error::AngleRange(format!("phi = {phi} not in [0, 2pi]")));
        }
        Ok(Self { theta, phi })
    }

    /// Folds arbitrary real angles into the canonical ranges without
    /// changing the direction.
    pub fn wrapped(theta: f64, phi: f64) -> Self {
        let (theta, phi) = wrap_sphere_angles(theta, phi);
        Self { theta, phi }
    }

    pub fn from_vector(v: [f64; 3]) -> Self {
        let r = norm3(&v);
        if r == 0.0 {
            return Self { theta: 0.0, phi: 0.0 };
        }
        let theta = (v[2] / r).clamp(-1.0, 1.0).acos();
        let phi = v[1].atan2(v[0]).rem_euclid(2.0 * std::f64::consts::PI);
        Self { theta, phi }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    /// `Π^± = (1 ± n·σ)/2`.
    pub fn projector(&self, outcome: Outcome) -> Matrix2<C64> {
        let [n1, n2, n3] = self.unit_vector();
        let s = outcome.sign();
        (pauli(0) + (pauli(1) * C64::from(n1) + pauli(2) * C64::from(n2) + pauli(3) * C64::from(n3)) * C64::from(s)) * C64::from(0.5)
    }
}

/// Canonical `(θ, φ)` for arbitrary reals: `θ ∈ [0, π]`, `φ ∈ [0, 2π)`.
pub(crate) fn wrap_sphere_angles(theta: f64, phi: f64) -> (f64, f64) {
    let pi = std::f64::consts::PI;
    let mut theta = theta.rem_euclid(2.0 * pi);
    let mut phi = phi;
    if theta > pi {
        theta = 2.0 * pi - theta;
        phi += pi;
    }
    (theta, phi.rem_euclid(2.0 * pi))
}

/// `rho` for `c1 |10> + c2 |01> + (vacuum remainder) |00>`, with the reservoir
/// excitation traced out into the `|00>` population.
pub fn assemble_single_excitation(c1: C64, c2: C64) -> Result<TwoQubitState> {
    let norm = c1.norm_sqr() + c2.norm_sqr();
    if !norm.is_finite() || norm > 1.0 + CLIP_TOL {
        return Err(Error::NormViolation(norm));
    }
    let mut m = Matrix4::zeros();
    m[(1, 1)] = C64::new(c1.norm_sqr(), 0.0);
    m[(2, 2)] = C64::new(c2.norm_sqr(), 0.0);
    m[(1, 2)] = c1 * c2.conj();
    m[(2, 1)] = c2 * c1.conj();
    m[(3, 3)] = C64::new((1.0 - norm).max(0.0), 0.0);
    let tr = m.trace().re;
    Ok(TwoQubitState {
        m: m / C64::new(tr, 0.0),
    })
}

pub(crate) fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

pub(crate) fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Haar-ish random mixed state: `G G^† / tr` for a complex Ginibre matrix.
pub fn random_two_qubit_state<R: Rng + ?Sized>(rng: &mut R) -> TwoQubitState {
    let g = Matrix4::from_fn(|_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let m = g * g.adjoint();
    let tr = m.trace();
    TwoQubitState { m: m / tr }
}

/// Random single-qubit state (Ginibre 2x2).
pub fn random_qubit_state<R: Rng + ?Sized>(rng: &mut R) -> QubitState {
    let g = Matrix2::from_fn(|_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let m = g * g.adjoint();
    let m = m / m.trace();
    let bloch = [1, 2, 3].map(|k| (m * pauli(k)).trace().re);
    QubitState { bloch }
}

/// Random 2x2 unitary from the QR of a Ginibre matrix.
pub fn random_unitary2<R: Rng + ?Sized>(rng: &mut R) -> Matrix2<C64> {
    let g = Matrix2::from_fn(|_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = Matrix2::from_diagonal(&nalgebra::Vector2::new(
        r[(0, 0)] / r[(0, 0)].norm(),
        r[(1, 1)] / r[(1, 1)].norm(),
    ));
    q * phases
}

//! Python bindings for `imaginarity_core`.

use imaginarity_core::cavity::{self, CavityParams as CoreParams, ZenoSpec};
use imaginarity_core::dia;
use imaginarity_core::measures::{self, MeasureKind, MubTriple, ReferenceBasis};
use imaginarity_core::naqi::{NaqiConfig, NaqiOptimizer};
use imaginarity_core::qstate::{assemble_single_excitation, QubitState, TwoQubitState as CoreState};
use imaginarity_core::repro::{self, Flat, ResultTable, ScenarioConfig};
use imaginarity_core::scenario::InitialState;
use imaginarity_core::Error;
use nalgebra::Matrix4;
use num_complex::Complex64 as C64;
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyTypeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyFloat, PyInt, PyList, PyString};

create_exception!(imaginarity, ConvergenceError, PyRuntimeError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::StepRejected { .. }
        | Error::Truncation(_)
        | Error::NormViolation(_)
        | Error::DegenerateOutcome(_)
        | Error::NoCrossing => ConvergenceError::new_err(e.to_string()),
        Error::Io(_) | Error::Csv(_) | Error::Table(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn kind(name: &str) -> PyResult<MeasureKind> {
    name.parse().map_err(to_py)
}

/// Cavity and coupling parameters. Rates are in units of the cavity width.
#[pyclass(frozen, module = "imaginarity")]
struct CavityParams {
    inner: CoreParams,
}

#[pymethods]
impl CavityParams {
    #[new]
    #[pyo3(signature = (coupling, r_a, delta_a = 0.0, delta_b = None, lam = 1.0))]
    fn new(coupling: f64, r_a: f64, delta_a: f64, delta_b: Option<f64>, lam: f64) -> PyResult<Self> {
        let inner = CoreParams::new(lam, coupling, r_a, delta_a, delta_b.unwrap_or(delta_a)).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn coupling(&self) -> f64 {
        self.inner.coupling
    }

    #[getter]
    fn r_a(&self) -> f64 {
        self.inner.r_a
    }

    #[getter]
    fn r_b(&self) -> f64 {
        self.inner.r_b()
    }

    #[getter]
    fn delta_a(&self) -> f64 {
        self.inner.delta_a
    }

    #[getter]
    fn delta_b(&self) -> f64 {
        self.inner.delta_b
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "CavityParams(coupling={}, r_a={}, delta_a={}, delta_b={}, lam={})",
            p.coupling, p.r_a, p.delta_a, p.delta_b, p.lambda
        )
    }
}

/// Two-qubit density matrix in the basis |11>, |10>, |01>, |00>.
#[pyclass(frozen, module = "imaginarity")]
struct TwoQubitState {
    inner: CoreState,
}

#[pymethods]
impl TwoQubitState {
    #[new]
    fn new(matrix: Vec<Vec<C64>>) -> PyResult<Self> {
        if matrix.len() != 4 || matrix.iter().any(|r| r.len() != 4) {
            return Err(PyValueError::new_err("expected a 4x4 matrix"));
        }
        let m = Matrix4::from_fn(|i, j| matrix[i][j]);
        Ok(Self {
            inner: CoreState::new(m).map_err(to_py)?,
        })
    }

    /// `phi+`, `phi-`, `psi+`, `11`, `10` or `01`.
    #[staticmethod]
    fn named(name: &str) -> PyResult<Self> {
        let init: InitialState = name.parse().map_err(to_py)?;
        let ket = init.ket().map_err(to_py)?;
        Ok(Self {
            inner: CoreState::pure(&ket).map_err(to_py)?,
        })
    }

    /// `c1|10> + c2|01>` with the missing norm on |00>.
    #[staticmethod]
    fn single_excitation(c1: C64, c2: C64) -> PyResult<Self> {
        Ok(Self {
            inner: assemble_single_excitation(c1, c2).map_err(to_py)?,
        })
    }

    fn matrix(&self) -> Vec<Vec<C64>> {
        let m = self.inner.matrix();
        (0..4).map(|i| (0..4).map(|j| m[(i, j)]).collect()).collect()
    }

    fn eigenvalues(&self) -> Vec<f64> {
        self.inner.eigenvalues().to_vec()
    }

    /// `v[k][l] = tr(rho sigma_k ⊗ sigma_l)`.
    fn pauli(&self) -> Vec<Vec<f64>> {
        self.inner.pauli_decompose().entries().iter().map(|r| r.to_vec()).collect()
    }

    fn bloch_a(&self) -> [f64; 3] {
        self.inner.reduced_a().bloch()
    }

    fn bloch_b(&self) -> [f64; 3] {
        self.inner.reduced_b().bloch()
    }

    /// Maximal steered MUB sum. Returns `(value, witness, angles)` with
    /// `angles = [θ1, φ1, θ2, φ2, θ3, φ3, θ4, φ4, twist]`.
    #[pyo3(signature = (measure = "tr", seed = 7, third_angle = false))]
    fn naqi(&self, py: Python<'_>, measure: &str, seed: u64, third_angle: bool) -> PyResult<(f64, bool, [f64; 9])> {
        let kind = kind(measure)?;
        let config = NaqiConfig {
            seed,
            third_angle,
            ..NaqiConfig::default()
        };
        let opt = NaqiOptimizer::new(config).map_err(to_py)?;
        let r = py.detach(|| opt.naqi(&self.inner, kind));
        Ok((r.value, r.witness, r.argmax.to_array()))
    }

    /// Assisted fidelity of imaginarity. Returns `(fidelity, advantage)`.
    fn assisted_fidelity(&self) -> (f64, bool) {
        let r = dia::assisted_fidelity(&self.inner);
        (r.fidelity, r.advantage)
    }

    fn __repr__(&self) -> String {
        format!("TwoQubitState(eigenvalues={:?})", self.inner.eigenvalues())
    }
}

/// Imaginarity of a qubit with Bloch vector `bloch` in the computational
/// basis, or in basis `basis` (1-3) of the MUB triple at `(theta4, phi4)`.
#[pyfunction]
#[pyo3(name = "measure", signature = (bloch, measure = "tr", basis = None, theta4 = 0.0, phi4 = 0.0))]
fn measure_qubit(bloch: [f64; 3], measure: &str, basis: Option<usize>, theta4: f64, phi4: f64) -> PyResult<f64> {
    let q = QubitState::from_bloch(bloch).map_err(to_py)?;
    let kind = kind(measure)?;
    let reference = match basis {
        None => ReferenceBasis::computational(),
        Some(i @ 1..=3) => MubTriple::new(theta4, phi4).map_err(to_py)?.bases()[i - 1].clone(),
        Some(i) => return Err(PyValueError::new_err(format!("basis index {i} not in 1..=3"))),
    };
    Ok(measures::measure(&q, &reference, kind))
}

#[pyfunction]
#[pyo3(signature = (measure = "tr"))]
fn mub_sum_bound(measure: &str) -> PyResult<f64> {
    Ok(measures::mub_sum_bound(kind(measure)?))
}

/// Numerical maximum of the MUB sum over the Bloch ball.
#[pyfunction]
#[pyo3(signature = (measure = "tr"))]
fn verify_bound(measure: &str) -> PyResult<f64> {
    Ok(measures::verify_bound(kind(measure)?).value)
}

#[pyfunction]
fn p_equal_detuning(t: f64, params: &CavityParams) -> PyResult<C64> {
    cavity::p_equal_detuning(t, &params.inner).map_err(to_py)
}

/// Interaction-picture amplitudes `(c1, c2)` at time `t`.
#[pyfunction]
fn amplitudes(t: f64, c10: C64, c20: C64, params: &CavityParams) -> PyResult<(C64, C64)> {
    let a = cavity::propagate_general(t, c10, c20, &params.inner).map_err(to_py)?;
    Ok((a.c1, a.c2))
}

#[pyfunction]
fn dia_asymptotic(r_a: f64, c10: C64, c20: C64) -> PyResult<f64> {
    dia::dia_asymptotic(r_a, c10, c20).map_err(to_py)
}

#[pyfunction]
fn zeno_survival(interval: f64, count: u32, c10: C64, c20: C64, params: &CavityParams) -> PyResult<f64> {
    let spec = ZenoSpec::new(interval, count, c10, c20).map_err(to_py)?;
    cavity::zeno_survival(&spec, &params.inner).map_err(to_py)
}

fn toml_value(v: &Bound<'_, PyAny>) -> PyResult<toml::Value> {
    if v.is_instance_of::<PyBool>() {
        Ok(toml::Value::Boolean(v.extract()?))
    } else if v.is_instance_of::<PyInt>() {
        Ok(toml::Value::Integer(v.extract()?))
    } else if v.is_instance_of::<PyFloat>() {
        Ok(toml::Value::Float(v.extract()?))
    } else if v.is_instance_of::<PyString>() {
        Ok(toml::Value::String(v.extract()?))
    } else if let Ok(list) = v.cast::<PyList>() {
        list.iter().map(|x| toml_value(&x)).collect::<PyResult<Vec<_>>>().map(toml::Value::Array)
    } else {
        Err(PyTypeError::new_err(format!("unsupported config value {v}")))
    }
}

fn resolve(config: Option<&Bound<'_, PyDict>>) -> PyResult<ScenarioConfig> {
    let mut flat = Flat::new();
    if let Some(d) = config {
        for (k, v) in d.iter() {
            flat.insert(k.extract::<String>()?, toml_value(&v)?);
        }
    }
    ScenarioConfig::from_layers(&[&flat]).map_err(to_py)
}

/// Numeric table with named columns and run metadata.
#[pyclass(frozen, module = "imaginarity")]
struct Table {
    inner: ResultTable,
}

#[pymethods]
impl Table {
    #[getter]
    fn columns(&self) -> Vec<String> {
        self.inner.columns.clone()
    }

    #[getter]
    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.rows.clone()
    }

    #[getter]
    fn meta(&self) -> Vec<(String, String)> {
        self.inner.meta.clone()
    }

    fn column(&self, name: &str) -> PyResult<Vec<f64>> {
        self.inner
            .column(name)
            .ok_or_else(|| PyValueError::new_err(format!("no column `{name}`")))
    }

    fn to_csv(&self) -> PyResult<String> {
        self.inner.to_csv_string().map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.inner.rows.len()
    }

    fn __repr__(&self) -> String {
        format!("Table(columns={:?}, rows={})", self.inner.columns, self.inner.rows.len())
    }
}

/// Config keys are the same as the command-line `--set` keys.
#[pyfunction]
#[pyo3(signature = (config = None))]
fn trajectory(py: Python<'_>, config: Option<&Bound<'_, PyDict>>) -> PyResult<Table> {
    let cfg = resolve(config)?;
    let inner = py.detach(|| repro::run_trajectory(&cfg)).map_err(to_py)?;
    Ok(Table { inner })
}

#[pyfunction]
#[pyo3(signature = (config = None))]
fn sweep(py: Python<'_>, config: Option<&Bound<'_, PyDict>>) -> PyResult<Table> {
    let cfg = resolve(config)?;
    let inner = py.detach(|| repro::run_sweep(&cfg)).map_err(to_py)?;
    Ok(Table { inner })
}

#[pyfunction]
#[pyo3(signature = (config = None))]
fn zeno(config: Option<&Bound<'_, PyDict>>) -> PyResult<Table> {
    let cfg = resolve(config)?;
    Ok(Table {
        inner: repro::run_zeno(&cfg).map_err(to_py)?,
    })
}

#[pymodule]
fn imaginarity(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<CavityParams>()?;
    m.add_class::<TwoQubitState>()?;
    m.add_class::<Table>()?;
    m.add("ConvergenceError", m.py().get_type::<ConvergenceError>())?;
    m.add_function(wrap_pyfunction!(measure_qubit, m)?)?;
    m.add_function(wrap_pyfunction!(mub_sum_bound, m)?)?;
    m.add_function(wrap_pyfunction!(verify_bound, m)?)?;
    m.add_function(wrap_pyfunction!(p_equal_detuning, m)?)?;
    m.add_function(wrap_pyfunction!(amplitudes, m)?)?;
    m.add_function(wrap_pyfunction!(dia_asymptotic, m)?)?;
    m.add_function(wrap_pyfunction!(zeno_survival, m)?)?;
    m.add_function(wrap_pyfunction!(trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(zeno, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

//! Python module `wqed`: thin wrappers returning plain dicts and lists.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use wqed::dynamics::{
    classify_regime_and_windows, evolve_fixed_k, evolve_localized, markov_rate,
    photon_spectrum_and_directionality, position_observables,
};
use wqed::model::DEFAULT_SIZE_BUDGET;
use wqed::{Branch, Momentum, WqedError};

create_exception!(wqed, NumericalError, PyRuntimeError);

fn to_py(e: WqedError) -> PyErr {
    if e.is_numerical() {
        NumericalError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn parse_branch(name: &str) -> Result<Branch, WqedError> {
    match name {
        "lower" | "-" => Ok(Branch::Lower),
        "upper" | "+" => Ok(Branch::Upper),
        other => Err(WqedError::InvalidParams(format!(
            "branch must be 'lower' or 'upper' (got {other:?})"
        ))),
    }
}

/// Model parameters; validated on construction.
#[pyclass(name = "ModelParams", module = "wqed", frozen, from_py_object)]
#[derive(Clone)]
struct PyModelParams {
    inner: wqed::ModelParams,
}

#[pymethods]
impl PyModelParams {
    #[new]
    #[pyo3(signature = (jp, delta, omega, l = wqed::DEFAULT_L, j = 1.0))]
    fn new(jp: f64, delta: f64, omega: f64, l: usize, j: f64) -> PyResult<Self> {
        let inner = wqed::ModelParams::new(j, jp, delta, omega, l).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn j(&self) -> f64 {
        self.inner.j
    }

    #[getter]
    fn jp(&self) -> f64 {
        self.inner.jp
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.inner.delta
    }

    #[getter]
    fn omega(&self) -> f64 {
        self.inner.omega
    }

    #[getter]
    fn l(&self) -> usize {
        self.inner.l
    }

    /// Effective qubit level `E_{K,Δ}`.
    fn effective_gap(&self, k: f64) -> f64 {
        self.inner.effective_gap(k)
    }

    /// Effective band half-width `2|z(K)|`.
    fn band_halfwidth(&self, k: f64) -> f64 {
        self.inner.band_halfwidth(k)
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "ModelParams(jp={}, delta={}, omega={}, l={}, j={})",
            p.jp, p.delta, p.omega, p.l, p.j
        )
    }
}

/// Scattering amplitudes for one incoming photon `p_i` and qubit `k_i`.
#[pyfunction]
fn scatter<'py>(py: Python<'py>, params: PyModelParams, k_i: f64, p_i: f64) -> PyResult<Bound<'py, PyDict>> {
    let s = wqed::scatter(&params.inner, Momentum::new(k_i), Momentum::new(p_i));
    let d = PyDict::new(py);
    d.set_item("t", s.t)?;
    d.set_item("r", s.r)?;
    d.set_item("T", s.transmission())?;
    d.set_item("R", s.reflection())?;
    d.set_item("p_f2", s.p_f2.value())?;
    d.set_item("k_f2", s.k_f2.value())?;
    d.set_item("detuning", s.detuning)?;
    d.set_item("gamma", s.gamma)?;
    d.set_item("degenerate", s.degenerate)?;
    d.set_item("branch_corrected", s.branch_corrected)?;
    Ok(d)
}

/// Column-wise `(k_i, p_i)` sweep over `[-π, π]²`, row-major with `k_i` outer.
#[pyfunction]
fn sweep_scattering<'py>(
    py: Python<'py>,
    params: PyModelParams,
    n_k: usize,
    n_p: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let rows = py.detach(|| wqed::sweep_scattering(&params.inner, n_k, n_p));
    let d = PyDict::new(py);
    d.set_item("k_i", rows.iter().map(|r| r.k_i).collect::<Vec<_>>())?;
    d.set_item("p_i", rows.iter().map(|r| r.p_i).collect::<Vec<_>>())?;
    d.set_item("T", rows.iter().map(|r| r.transmission).collect::<Vec<_>>())?;
    d.set_item("R", rows.iter().map(|r| r.reflection).collect::<Vec<_>>())?;
    d.set_item("p_f2", rows.iter().map(|r| r.p_f2).collect::<Vec<_>>())?;
    d.set_item("k_f2", rows.iter().map(|r| r.k_f2).collect::<Vec<_>>())?;
    d.set_item("dE_qb", rows.iter().map(|r| r.de_qb).collect::<Vec<_>>())?;
    d.set_item("degenerate", rows.iter().map(|r| r.degenerate).collect::<Vec<_>>())?;
    Ok(d)
}

/// Bound state of one branch at total momentum `k`, with its photon profile for `|x| ≤ x_max`.
#[pyfunction]
#[pyo3(signature = (params, k, branch = "upper", x_max = 50))]
fn bound_state<'py>(
    py: Python<'py>,
    params: PyModelParams,
    k: f64,
    branch: &str,
    x_max: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let branch = parse_branch(branch).map_err(to_py)?;
    let b = wqed::solve_bound_state(&params.inner, Momentum::new(k), branch).map_err(to_py)?;
    let w = wqed::bound_wavefunctions(&params.inner, &b, x_max);
    let d = PyDict::new(py);
    d.set_item("energy", b.energy)?;
    d.set_item("u", b.u)?;
    d.set_item("y_in", b.y_in)?;
    d.set_item("loc_length", b.loc_length)?;
    d.set_item("residual", b.residual)?;
    d.set_item("f_p", w.f_p)?;
    d.set_item("x", w.field.x)?;
    d.set_item("f_x", w.field.amp)?;
    d.set_item("photon_density", w.photon_density)?;
    d.set_item("cloud_weight", w.cloud_weight)?;
    d.set_item("one_sided_weight", w.one_sided_weight)?;
    Ok(d)
}

/// Both bound-state branches over `n_k` points of `[-π, π]` plus the flatness fit near `K = π`.
#[pyfunction]
fn band_scan<'py>(py: Python<'py>, params: PyModelParams, n_k: usize) -> PyResult<Bound<'py, PyDict>> {
    let scan = py.detach(|| wqed::band_scan(&params.inner, n_k)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("K", scan.rows.iter().map(|r| r.k).collect::<Vec<_>>())?;
    d.set_item("E_minus", scan.rows.iter().map(|r| r.e_minus).collect::<Vec<_>>())?;
    d.set_item("E_plus", scan.rows.iter().map(|r| r.e_plus).collect::<Vec<_>>())?;
    d.set_item("band_min", scan.rows.iter().map(|r| r.band_min).collect::<Vec<_>>())?;
    d.set_item("band_max", scan.rows.iter().map(|r| r.band_max).collect::<Vec<_>>())?;
    d.set_item("c2", scan.flatness.c2)?;
    d.set_item("c4", scan.flatness.c4)?;
    d.set_item("quartic", scan.flatness.is_quartic())?;
    Ok(d)
}

/// Emission regime, decaying `K` windows and critical couplings.
#[pyfunction]
fn emission_windows<'py>(py: Python<'py>, params: PyModelParams) -> PyResult<Bound<'py, PyDict>> {
    let w = classify_regime_and_windows(&params.inner);
    let d = PyDict::new(py);
    d.set_item("regime", format!("{:?}", w.regime))?;
    d.set_item("windows", w.windows)?;
    d.set_item("w_minus", w.w_minus)?;
    d.set_item("w_plus", w.w_plus)?;
    d.set_item("embedded_fraction", w.embedded_fraction)?;
    d.set_item("jc_minus", w.jc_minus)?;
    d.set_item("jc_plus", w.jc_plus)?;
    d.set_item("jc_minus_perturbative", w.jc_minus_perturbative)?;
    d.set_item("jc_plus_perturbative", w.jc_plus_perturbative)?;
    Ok(d)
}

/// Decay of `|K⟩`: excited population at every time and the photon spectrum at the last one.
#[pyfunction]
fn emit_fixed_k<'py>(
    py: Python<'py>,
    params: PyModelParams,
    k: f64,
    times: Vec<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let km = Momentum::new(k);
    let traj = py
        .detach(|| evolve_fixed_k(&params.inner, km, &times, DEFAULT_SIZE_BUDGET))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("t", &traj.times)?;
    d.set_item("P_e", traj.excited_population())?;
    let last = traj.times[traj.times.len() - 1];
    match photon_spectrum_and_directionality(&traj, last) {
        Ok(s) => {
            d.set_item("p", s.p)?;
            d.set_item("N_p", s.n_p)?;
            d.set_item("directionality", s.directionality)?;
        }
        Err(WqedError::NotApplicable(_)) => d.set_item("directionality", py.None())?,
        Err(e) => return Err(to_py(e)),
    }
    d.set_item("markov_rate", markov_rate(&params.inner, km).ok())?;
    Ok(d)
}

/// Decay of a qubit excited at site `x0`; position profiles at each snapshot time.
#[pyfunction]
#[pyo3(signature = (params, times, snapshot_times = Vec::new(), x0 = 0))]
fn emit_localized<'py>(
    py: Python<'py>,
    params: PyModelParams,
    times: Vec<f64>,
    snapshot_times: Vec<f64>,
    x0: i64,
) -> PyResult<Bound<'py, PyDict>> {
    let run = py
        .detach(|| evolve_localized(&params.inner, x0, &times, &snapshot_times, DEFAULT_SIZE_BUDGET))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("t", &run.times)?;
    d.set_item("P_e_total", run.excited_population())?;
    let mut snaps = Vec::new();
    for &t in &snapshot_times {
        let obs = position_observables(&run, t).map_err(to_py)?;
        let s = PyDict::new(py);
        s.set_item("t", t)?;
        s.set_item("x", obs.x)?;
        s.set_item("N", obs.n)?;
        s.set_item("P_g", obs.p_g)?;
        s.set_item("P_e", obs.p_e)?;
        snaps.push(s);
    }
    d.set_item("snapshots", snaps)?;
    Ok(d)
}

#[pymodule]
#[pyo3(name = "wqed")]
fn wqed_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add_class::<PyModelParams>()?;
    m.add_function(wrap_pyfunction!(scatter, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_scattering, m)?)?;
    m.add_function(wrap_pyfunction!(bound_state, m)?)?;
    m.add_function(wrap_pyfunction!(band_scan, m)?)?;
    m.add_function(wrap_pyfunction!(emission_windows, m)?)?;
    m.add_function(wrap_pyfunction!(emit_fixed_k, m)?)?;
    m.add_function(wrap_pyfunction!(emit_localized, m)?)?;
    Ok(())
}

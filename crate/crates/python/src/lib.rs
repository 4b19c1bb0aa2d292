//! Python bindings. Reports come back as plain dicts; parameter sets and
//! transfer functions are wrapped classes.

use mamrealize_core as core;
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde::Serialize;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn tolerances(
    tol_im: Option<f64>,
    tol_sep: Option<f64>,
    tol_verify: Option<f64>,
) -> PyResult<core::Tolerances> {
    let mut t = core::Tolerances::default();
    for (name, v, slot) in [
        ("tol_im", tol_im, &mut t.tol_im),
        ("tol_sep", tol_sep, &mut t.tol_sep),
        ("tol_verify", tol_verify, &mut t.tol_verify),
    ] {
        if let Some(v) = v {
            if !(v.is_finite() && v > 0.0) {
                return Err(PyValueError::new_err(format!("{name} must be positive")));
            }
            *slot = v;
        }
    }
    Ok(t)
}

fn trajectory<'py>(py: Python<'py>, tr: &core::Trajectory) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("t", &tr.t)?;
    d.set_item("y", &tr.y)?;
    d.set_item("states", &tr.states)?;
    Ok(d)
}

/// `num(s) / den(s)`, normalized to a monic denominator.
#[pyclass(
    name = "TransferFunction",
    module = "mamrealize",
    frozen,
    skip_from_py_object
)]
#[derive(Clone)]
struct PyTransferFunction(core::TransferFunction);

#[pymethods]
impl PyTransferFunction {
    #[new]
    fn new(num: Vec<f64>, den: Vec<f64>) -> PyResult<Self> {
        core::TransferFunction::from_coeffs(num, den)
            .map(Self)
            .map_err(err)
    }

    #[getter]
    fn num(&self) -> Vec<f64> {
        self.0.num().coeffs().to_vec()
    }

    #[getter]
    fn den(&self) -> Vec<f64> {
        self.0.den().coeffs().to_vec()
    }

    #[getter]
    fn order(&self) -> usize {
        self.0.order()
    }

    #[getter]
    fn relative_degree(&self) -> usize {
        self.0.relative_degree()
    }

    #[getter]
    fn gain(&self) -> f64 {
        self.0.gain()
    }

    fn eval(&self, s: Complex64) -> Complex64 {
        self.0.eval(s)
    }

    #[pyo3(signature = (tol_im = 1e-9, tol_sep = 1e-7))]
    fn poles<'py>(
        &self,
        py: Python<'py>,
        tol_im: f64,
        tol_sep: f64,
    ) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0.poles(tol_im, tol_sep).map_err(err)?)
    }

    #[pyo3(signature = (tol_im = 1e-9, tol_sep = 1e-7))]
    fn zeros<'py>(
        &self,
        py: Python<'py>,
        tol_im: f64,
        tol_sep: f64,
    ) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0.zeros(tol_im, tol_sep).map_err(err)?)
    }

    fn coefficient_residual(&self, other: &PyTransferFunction) -> f64 {
        self.0.coefficient_residual(&other.0)
    }

    fn __repr__(&self) -> String {
        format!(
            "TransferFunction(num={:?}, den={:?})",
            self.num(),
            self.den()
        )
    }
}

#[pyclass(
    name = "MammillaryParams",
    module = "mamrealize",
    frozen,
    skip_from_py_object
)]
#[derive(Clone)]
struct PyMammillaryParams(core::MammillaryParams);

#[pymethods]
impl PyMammillaryParams {
    /// Peripheral pairs may be given in any order; they are sorted by
    /// increasing `k_to_center`.
    #[new]
    fn new(k10: f64, k_to_center: Vec<f64>, k_from_center: Vec<f64>) -> PyResult<Self> {
        core::MammillaryParams::from_unordered(k10, k_to_center, k_from_center)
            .map(|(p, _)| Self(p))
            .map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn k10(&self) -> f64 {
        self.0.k10()
    }

    #[getter]
    fn k_to_center(&self) -> Vec<f64> {
        self.0.k_to_center().to_vec()
    }

    #[getter]
    fn k_from_center(&self) -> Vec<f64> {
        self.0.k_from_center().to_vec()
    }

    fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    fn max_relative_error(&self, other: &PyMammillaryParams) -> f64 {
        self.0.max_relative_error(&other.0)
    }

    fn transfer_function(&self) -> PyTransferFunction {
        PyTransferFunction(self.0.transfer_function())
    }

    #[pyo3(signature = (t_end, dt))]
    fn simulate<'py>(&self, py: Python<'py>, t_end: f64, dt: f64) -> PyResult<Bound<'py, PyDict>> {
        let tr =
            core::simulate_impulse(&core::build_mammillary(&self.0), t_end, dt).map_err(err)?;
        trajectory(py, &tr)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0)
    }

    fn __eq__(&self, other: &PyMammillaryParams) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        format!(
            "MammillaryParams(k10={:?}, k_to_center={:?}, k_from_center={:?})",
            self.0.k10(),
            self.0.k_to_center(),
            self.0.k_from_center()
        )
    }
}

#[pyclass(
    name = "PkPdParams",
    module = "mamrealize",
    frozen,
    skip_from_py_object
)]
#[derive(Clone)]
struct PyPkPdParams(core::PkPdParams);

#[pymethods]
impl PyPkPdParams {
    #[new]
    fn new(
        k1e_over_v1: f64,
        k10: f64,
        k12: f64,
        k13: f64,
        k21: f64,
        k31: f64,
        ke0: f64,
    ) -> PyResult<Self> {
        core::PkPdParams::new(k1e_over_v1, k10, k12, k13, k21, k31, ke0)
            .map(Self)
            .map_err(err)
    }

    /// The published propofol parameter set.
    #[staticmethod]
    fn schnider() -> Self {
        Self(core::schnider_fixture())
    }

    #[getter]
    fn k1e_over_v1(&self) -> f64 {
        self.0.k1e_over_v1()
    }

    #[getter]
    fn k10(&self) -> f64 {
        self.0.k10()
    }

    #[getter]
    fn k12(&self) -> f64 {
        self.0.k12()
    }

    #[getter]
    fn k13(&self) -> f64 {
        self.0.k13()
    }

    #[getter]
    fn k21(&self) -> f64 {
        self.0.k21()
    }

    #[getter]
    fn k31(&self) -> f64 {
        self.0.k31()
    }

    #[getter]
    fn ke0(&self) -> f64 {
        self.0.ke0()
    }

    /// `[k1e/V1, k10, k12, k13, k21, k31, ke0]`
    fn to_list(&self) -> Vec<f64> {
        self.0.to_array().to_vec()
    }

    fn apply_swap(&self) -> Self {
        Self(self.0.apply_swap())
    }

    fn normalized(&self) -> Self {
        Self(self.0.normalized())
    }

    fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    fn max_relative_error(&self, other: &PyPkPdParams) -> f64 {
        self.0.max_relative_error(&other.0)
    }

    fn transfer_function(&self) -> PyTransferFunction {
        PyTransferFunction(self.0.transfer_function())
    }

    #[pyo3(signature = (t_end, dt))]
    fn simulate<'py>(&self, py: Python<'py>, t_end: f64, dt: f64) -> PyResult<Bound<'py, PyDict>> {
        let tr = core::simulate_impulse(&core::build_pkpd(&self.0), t_end, dt).map_err(err)?;
        trajectory(py, &tr)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0)
    }

    fn __eq__(&self, other: &PyPkPdParams) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        format!("PkPdParams({:?})", self.0.to_array())
    }
}

/// Condition report for `mode` in `auto`, `mammillary`, `order3`, `pkpd`.
#[pyfunction]
#[pyo3(signature = (h, mode = "auto", *, tol_im = None, tol_sep = None, tol_verify = None))]
fn check_conditions<'py>(
    py: Python<'py>,
    h: &PyTransferFunction,
    mode: &str,
    tol_im: Option<f64>,
    tol_sep: Option<f64>,
    tol_verify: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let tol = tolerances(tol_im, tol_sep, tol_verify)?;
    let h = &h.0;
    let report = match mode {
        "auto" if h.order() == 4 && h.relative_degree() == 2 => {
            core::check_conditions_pkpd(h, &tol).map_err(err)?
        }
        "auto" | "mammillary" => core::check_conditions(h, &tol),
        "order3" => core::check_conditions3(h, &tol).map_err(err)?,
        "pkpd" => core::check_conditions_pkpd(h, &tol).map_err(err)?,
        other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    };
    to_py(py, &report)
}

/// `{"verdict", "report", "params", "verification_residual"}`; `params` is
/// `None` when no realization exists.
#[pyfunction]
#[pyo3(signature = (h, order3 = false, *, tol_im = None, tol_sep = None, tol_verify = None))]
fn realize<'py>(
    py: Python<'py>,
    h: &PyTransferFunction,
    order3: bool,
    tol_im: Option<f64>,
    tol_sep: Option<f64>,
    tol_verify: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let tol = tolerances(tol_im, tol_sep, tol_verify)?;
    let result = if order3 {
        core::realize3(&h.0, &tol)
    } else {
        core::realize(&h.0, &tol)
    };
    let out = PyDict::new(py);
    match result {
        Ok(r) => {
            out.set_item("verdict", to_py(py, &r.report.verdict)?)?;
            out.set_item("report", to_py(py, &r.report)?)?;
            out.set_item("params", PyMammillaryParams(r.params))?;
            out.set_item("verification_residual", r.verification_residual)?;
        }
        Err(core::RealizationError::ConditionsFailed(report)) => {
            out.set_item("verdict", to_py(py, &report.verdict)?)?;
            out.set_item("report", to_py(py, &*report)?)?;
            out.set_item("params", py.None())?;
            out.set_item("verification_residual", py.None())?;
        }
        Err(e) => return Err(err(e)),
    }
    Ok(out)
}

/// Enumerates effect-site branches. `accepted` holds `PkPdParams` objects in
/// the order of the accepted branches (decreasing `ke0`).
#[pyfunction]
#[pyo3(signature = (h, ref_ke0 = None, *, tol_im = None, tol_sep = None, tol_verify = None))]
fn realize_pkpd<'py>(
    py: Python<'py>,
    h: &PyTransferFunction,
    ref_ke0: Option<f64>,
    tol_im: Option<f64>,
    tol_sep: Option<f64>,
    tol_verify: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let tol = tolerances(tol_im, tol_sep, tol_verify)?;
    let out = PyDict::new(py);
    match core::realize_pkpd(&h.0, ref_ke0, &tol) {
        Ok(e) => {
            out.set_item("verdict", to_py(py, &e.report.verdict)?)?;
            out.set_item("report", to_py(py, &e.report)?)?;
            out.set_item("branches", to_py(py, &e.branches)?)?;
            let accepted: Vec<PyPkPdParams> =
                e.accepted_params().into_iter().map(PyPkPdParams).collect();
            out.set_item("accepted", PyList::new(py, accepted)?)?;
            let selected = e.selected.and_then(|i| e.branches[i].params.clone());
            out.set_item("selected", selected.map(PyPkPdParams))?;
        }
        Err(core::RealizationError::ConditionsFailed(report)) => {
            out.set_item("verdict", to_py(py, &report.verdict)?)?;
            out.set_item("report", to_py(py, &*report)?)?;
            out.set_item("branches", PyList::empty(py))?;
            out.set_item("accepted", PyList::empty(py))?;
            out.set_item("selected", py.None())?;
        }
        Err(e) => return Err(err(e)),
    }
    Ok(out)
}

#[pymodule]
fn mamrealize(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyTransferFunction>()?;
    m.add_class::<PyMammillaryParams>()?;
    m.add_class::<PyPkPdParams>()?;
    m.add_function(wrap_pyfunction!(check_conditions, m)?)?;
    m.add_function(wrap_pyfunction!(realize, m)?)?;
    m.add_function(wrap_pyfunction!(realize_pkpd, m)?)?;
    Ok(())
}

//! Python bindings: `import mnfield`.
//!
//! Rationals cross the boundary as strings such as `"1/6"`, field elements as
//! strings such as `"2*g+1"`.

mod convert;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use mn_core::exact_arith::fmt_rat;
use mn_core::expansions::{self as ex, Named, VerificationReport};
use mn_core::mn_series::{MNElement, MnCtx};
use mn_core::newton::newton_cyclotomic;
use mn_core::sigma_ring::SigmaElement;

fn err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "MnCtx", frozen)]
#[derive(Clone)]
struct PyCtx {
    inner: MnCtx,
}

#[pymethods]
impl PyCtx {
    #[new]
    fn new(p: i64) -> PyResult<Self> {
        Ok(PyCtx { inner: MnCtx::new(p).map_err(err)? })
    }

    #[getter]
    fn p(&self) -> u64 {
        self.inner.p()
    }

    #[getter]
    fn modulus(&self) -> String {
        self.inner.field().modulus_string()
    }

    fn zero(&self, trunc: &str) -> PyResult<PyMn> {
        Ok(PyMn { inner: MNElement::zero(&self.inner, convert::rat_arg(trunc).map_err(err)?) })
    }

    fn one(&self, trunc: &str) -> PyResult<PyMn> {
        Ok(PyMn { inner: MNElement::one(&self.inner, convert::rat_arg(trunc).map_err(err)?) })
    }

    fn rational(&self, q: &str, trunc: &str) -> PyResult<PyMn> {
        let q = convert::rat_arg(q).map_err(err)?;
        Ok(PyMn { inner: MNElement::from_rational(&self.inner, &q, convert::rat_arg(trunc).map_err(err)?) })
    }

    fn monomial(&self, exp: &str, digit: &str, trunc: &str) -> PyResult<PyMn> {
        Ok(PyMn { inner: convert::monomial(&self.inner, exp, digit, trunc).map_err(err)? })
    }

    fn from_terms(&self, terms: Vec<(String, String)>, trunc: &str) -> PyResult<PyMn> {
        Ok(PyMn { inner: convert::from_terms(&self.inner, &terms, trunc).map_err(err)? })
    }

    fn from_json(&self, text: &str) -> PyResult<PyMn> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(err)?;
        Ok(PyMn { inner: MNElement::from_json(&self.inner, &v).map_err(err)? })
    }

    fn __repr__(&self) -> String {
        format!("MnCtx(p={}, modulus={})", self.inner.p(), self.modulus())
    }
}

#[pyclass(name = "MNElement", frozen)]
#[derive(Clone)]
struct PyMn {
    inner: MNElement,
}

#[pymethods]
impl PyMn {
    #[getter]
    fn trunc(&self) -> String {
        fmt_rat(self.inner.trunc())
    }

    fn terms(&self) -> convert::Terms {
        convert::terms(&self.inner)
    }

    fn valuation(&self) -> PyResult<String> {
        self.inner.valuation().map(|v| fmt_rat(&v)).map_err(err)
    }

    fn is_zero(&self) -> bool {
        self.inner.is_empty()
    }

    fn inv(&self) -> PyResult<PyMn> {
        Ok(PyMn { inner: self.inner.inv().map_err(err)? })
    }

    fn pow(&self, k: i64) -> PyResult<PyMn> {
        Ok(PyMn { inner: self.inner.pow_i(k).map_err(err)? })
    }

    fn pth_root(&self) -> PyResult<PyMn> {
        Ok(PyMn { inner: self.inner.pth_root().map_err(err)? })
    }

    fn truncate(&self, t: &str) -> PyResult<PyMn> {
        Ok(PyMn { inner: self.inner.truncate(&convert::rat_arg(t).map_err(err)?) })
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    fn __add__(&self, o: &Self) -> PyMn {
        PyMn { inner: self.inner.add(&o.inner) }
    }

    fn __sub__(&self, o: &Self) -> PyMn {
        PyMn { inner: self.inner.sub(&o.inner) }
    }

    fn __mul__(&self, o: &Self) -> PyMn {
        PyMn { inner: self.inner.mul(&o.inner) }
    }

    fn __neg__(&self) -> PyMn {
        PyMn { inner: self.inner.neg() }
    }

    fn __eq__(&self, o: &Self) -> bool {
        self.inner == o.inner
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("MNElement({})", self.inner)
    }
}

#[pyclass(name = "SigmaElement", frozen)]
#[derive(Clone)]
struct PySigma {
    inner: SigmaElement,
}

#[pymethods]
impl PySigma {
    #[getter]
    fn level(&self) -> u32 {
        self.inner.level()
    }

    #[getter]
    fn trunc(&self) -> String {
        fmt_rat(self.inner.trunc())
    }

    fn coeffs(&self) -> Vec<PyMn> {
        self.inner.coeffs().iter().map(|c| PyMn { inner: c.clone() }).collect()
    }

    /// `(value, exact)`.
    fn valuation(&self) -> PyResult<(String, bool)> {
        let v = self.inner.valuation_resolved(2).map_err(err)?;
        Ok((fmt_rat(&v.value), v.exact))
    }

    fn substitute(&self, k: u32) -> PyResult<PyMn> {
        Ok(PyMn { inner: self.inner.substitute(k).map_err(err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }
}

#[pyclass(name = "Report", frozen, get_all)]
struct PyReport {
    id: String,
    p: i64,
    status: String,
    witness: Vec<convert::WitnessRow>,
    error: Option<String>,
    json: String,
}

#[pymethods]
impl PyReport {
    fn passed(&self) -> bool {
        self.status == "PASS"
    }

    fn __str__(&self) -> String {
        format!("{} p={} {}", self.id, self.p, self.status)
    }
}

impl From<VerificationReport> for PyReport {
    fn from(r: VerificationReport) -> Self {
        PyReport {
            witness: convert::witness_rows(&r),
            json: r.to_json().to_string(),
            status: r.status.to_string(),
            id: r.id,
            p: r.p,
            error: r.error,
        }
    }
}

#[pyfunction]
fn registry_ids() -> Vec<&'static str> {
    ex::registry().iter().map(|e| e.id).collect()
}

#[pyfunction]
fn verify_identity(id: &str, p: i64) -> PyReport {
    ex::verify_identity(id, p).into()
}

#[pyfunction]
#[pyo3(signature = (p, n, sigma_terms = 3))]
fn residual_check(p: i64, n: u32, sigma_terms: u32) -> PyReport {
    ex::residual_check(p, n, sigma_terms).into()
}

/// `(element, valuation)`; the valuation is `None` if it could not be certified.
#[pyfunction]
fn uniformizer(p: i64, m: u32) -> PyResult<(PySigma, Option<String>)> {
    let u = ex::uniformizer(p, m).map_err(err)?;
    Ok((PySigma { inner: u.element }, u.valuation.as_ref().map(fmt_rat)))
}

#[pyfunction]
#[pyo3(signature = (name, p, n = 2, beta = 1, sigma_terms = 3, trunc = "3"))]
fn build_named(py: Python<'_>, name: &str, p: i64, n: u32, beta: i64, sigma_terms: u32, trunc: &str) -> PyResult<PyObject> {
    let params = convert::named_params(n, beta, sigma_terms, trunc).map_err(err)?;
    Ok(match ex::build_named(name, p, &params).map_err(err)? {
        Named::Mn(a) => PyMn { inner: a }.into_py(py),
        Named::Sigma(s) => PySigma { inner: s }.into_py(py),
    })
}

/// Runs the Newton loop on `Phi_(p^n)`; returns the approximation and the
/// trace as JSON text.
#[pyfunction]
#[pyo3(signature = (p, n, steps, trunc = None))]
fn newton(p: i64, n: u32, steps: usize, trunc: Option<&str>) -> PyResult<(PyMn, String)> {
    let ctx = MnCtx::new(p).map_err(err)?;
    let work = trunc.map(convert::rat_arg).transpose().map_err(err)?;
    let (root, trace) = newton_cyclotomic(&ctx, n, steps, work.as_ref()).map_err(err)?;
    Ok((PyMn { inner: root }, trace.to_json(&ctx).to_string()))
}

#[pymodule]
fn mnfield(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCtx>()?;
    m.add_class::<PyMn>()?;
    m.add_class::<PySigma>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(registry_ids, m)?)?;
    m.add_function(wrap_pyfunction!(verify_identity, m)?)?;
    m.add_function(wrap_pyfunction!(residual_check, m)?)?;
    m.add_function(wrap_pyfunction!(uniformizer, m)?)?;
    m.add_function(wrap_pyfunction!(build_named, m)?)?;
    m.add_function(wrap_pyfunction!(newton, m)?)?;
    Ok(())
}

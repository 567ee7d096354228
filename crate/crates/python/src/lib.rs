//! Python bindings. Big integers cross as Python `int`; rationals and
//! quadratic components cross as `"p/q"` strings; structured reports come
//! back as plain dicts decoded from the same JSON the CLI writes.

use num_bigint::BigUint;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyModule;
use serde::Serialize;

use ::prodap::apcore::{gcd_bound_audit, reduce_ap, ApDescriptor};
use ::prodap::construct::{coverage_check, theorem2_set};
use ::prodap::exactnum::{default_sieve, json, QuadElem, QuadField};
use ::prodap::harness::instance::to_pretty_json;
use ::prodap::harness::pipeline::{quadratic_demo_instance, theorem2_instance};
use ::prodap::harness::{concavity_demo, pipeline, Instance, PipelineOptions};
use ::prodap::irregular::irregular_audit;
use ::prodap::prodset::{build_rep_graph, longest_ap, product_set, SearchLimits, SearchMode};
use ::prodap::Error;

create_exception!(prodap, ProdapError, PyException);
create_exception!(prodap, InputError, ProdapError);
create_exception!(prodap, CapacityError, ProdapError);
create_exception!(prodap, FalsificationError, ProdapError);

fn to_py(e: Error) -> PyErr {
    match e.exit_code() {
        2 => InputError::new_err(e.to_string()),
        3 => CapacityError::new_err(e.to_string()),
        4 => FalsificationError::new_err(e.to_string()),
        _ => ProdapError::new_err(e.to_string()),
    }
}

fn to_dict<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = to_pretty_json(value).map_err(to_py)?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn mode(name: &str) -> PyResult<SearchMode> {
    match name {
        "exact" => Ok(SearchMode::Exact),
        "oracle" => Ok(SearchMode::Oracle),
        other => Err(InputError::new_err(format!("unknown mode {other:?}"))),
    }
}

/// `D·(r + d·i)` for `i = 0..L-1`.
#[pyclass(name = "Descriptor", frozen, eq, hash, skip_from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PyDescriptor(ApDescriptor);

#[pymethods]
impl PyDescriptor {
    #[new]
    #[pyo3(signature = (D, r, d, L))]
    #[allow(non_snake_case)]
    fn new(D: BigUint, r: BigUint, d: BigUint, L: usize) -> PyResult<Self> {
        ApDescriptor::new(D, r, d, L).map(PyDescriptor).map_err(to_py)
    }

    /// Descriptor of an explicit list of terms (`D = 1`).
    #[staticmethod]
    fn from_terms(terms: Vec<BigUint>) -> PyResult<Self> {
        ApDescriptor::from_terms(&terms).map(PyDescriptor).map_err(to_py)
    }

    #[getter(D)]
    fn common(&self) -> BigUint {
        self.0.common.clone()
    }

    #[getter]
    fn r(&self) -> BigUint {
        self.0.start.clone()
    }

    #[getter]
    fn d(&self) -> BigUint {
        self.0.step.clone()
    }

    #[getter(L)]
    fn len(&self) -> usize {
        self.0.len
    }

    fn term(&self, i: usize) -> BigUint {
        self.0.term(i)
    }

    fn terms(&self) -> Vec<BigUint> {
        self.0.terms()
    }

    fn is_reduced(&self) -> bool {
        self.0.is_reduced()
    }

    fn gcd_audit(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_dict(py, &gcd_bound_audit(&self.0).map_err(to_py)?)
    }

    fn concavity(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_dict(py, &concavity_demo(&self.0).map_err(to_py)?)
    }

    fn __repr__(&self) -> String {
        format!("Descriptor(D={}, r={}, d={}, L={})", self.0.common, self.0.start, self.0.step, self.0.len)
    }
}

/// `a + b√m` with exact rational `a`, `b`.
#[pyclass(name = "QuadElem", frozen, eq, hash, skip_from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PyQuadElem(QuadElem);

#[pymethods]
impl PyQuadElem {
    #[new]
    fn new(a: &str, b: &str, m: i64) -> PyResult<Self> {
        let field = QuadField::new(m.into()).map_err(to_py)?;
        Ok(PyQuadElem(field.elem(json::parse_rat(a).map_err(to_py)?, json::parse_rat(b).map_err(to_py)?)))
    }

    #[getter]
    fn a(&self) -> String {
        json::fmt_rat(self.0.a())
    }

    #[getter]
    fn b(&self) -> String {
        json::fmt_rat(self.0.b())
    }

    #[getter]
    fn m(&self) -> String {
        self.0.radicand().to_string()
    }

    fn norm(&self) -> String {
        json::fmt_rat(&self.0.norm())
    }

    fn conj(&self) -> Self {
        PyQuadElem(self.0.conj())
    }

    fn is_rational(&self) -> bool {
        self.0.is_rational()
    }

    fn __add__(&self, other: &Self) -> PyResult<Self> {
        self.0.checked_add(&other.0).map(PyQuadElem).map_err(to_py)
    }

    fn __sub__(&self, other: &Self) -> PyResult<Self> {
        self.0.checked_sub(&other.0).map(PyQuadElem).map_err(to_py)
    }

    fn __mul__(&self, other: &Self) -> PyResult<Self> {
        self.0.checked_mul(&other.0).map(PyQuadElem).map_err(to_py)
    }

    fn __truediv__(&self, other: &Self) -> PyResult<Self> {
        self.0.checked_div(&other.0).map(PyQuadElem).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("QuadElem({:?}, {:?}, {})", self.a(), self.b(), self.m())
    }
}

/// A base set plus an optional claimed progression, in instance-file form.
#[pyclass(name = "Instance", frozen)]
struct PyInstance(Instance);

#[pymethods]
impl PyInstance {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Instance::from_json(text).map(PyInstance).map_err(to_py)
    }

    #[staticmethod]
    fn theorem2(n: u64) -> PyResult<Self> {
        theorem2_instance(n, default_sieve()).map(PyInstance).map_err(to_py)
    }

    #[staticmethod]
    fn quadratic_demo() -> PyResult<Self> {
        quadratic_demo_instance(default_sieve()).map(PyInstance).map_err(to_py)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    fn __len__(&self) -> usize {
        self.0.elements.len()
    }

    /// Runs every audit stage; the report's `green` flag summarises them.
    #[pyo3(signature = (k = 5, mode = "exact"))]
    fn pipeline(&self, py: Python<'_>, k: usize, mode: &str) -> PyResult<Py<PyAny>> {
        let opts = PipelineOptions { k, mode: self::mode(mode)?, limits: SearchLimits::default() };
        let report = py.detach(|| pipeline(&self.0, &opts, default_sieve())).map_err(to_py)?;
        to_dict(py, &report)
    }
}

#[pyfunction(name = "product_set")]
fn py_product_set(base: Vec<BigUint>) -> PyResult<Vec<BigUint>> {
    product_set(&base).map_err(to_py)
}

/// Longest progression inside a sorted set of naturals.
#[pyfunction(name = "longest_ap")]
#[pyo3(signature = (values, mode = "exact"))]
fn py_longest_ap(py: Python<'_>, mut values: Vec<BigUint>, mode: &str) -> PyResult<Py<PyAny>> {
    values.sort();
    values.dedup();
    let found = longest_ap(&values, self::mode(mode)?, SearchLimits::default()).map_err(to_py)?;
    to_dict(py, &found)
}

#[pyfunction(name = "theorem2_set")]
fn py_theorem2_set(n: u64) -> PyResult<Vec<u64>> {
    Ok(theorem2_set(n, default_sieve()).map_err(to_py)?.base)
}

/// Factor-pair witnesses for every `x ≤ ⌊n ln n⌋`.
#[pyfunction(name = "coverage_check")]
fn py_coverage_check(py: Python<'_>, n: u64) -> PyResult<Py<PyAny>> {
    let result = py.detach(|| coverage_check(n, default_sieve())).map_err(to_py)?;
    to_dict(py, &result)
}

#[pyfunction(name = "reduce_ap")]
fn py_reduce_ap(py: Python<'_>, terms: Vec<BigUint>, base: Vec<BigUint>) -> PyResult<Py<PyAny>> {
    to_dict(py, &reduce_ap(&terms, &base, default_sieve()).map_err(to_py)?)
}

/// Irregularity report for a reduced progression represented in `base.base`.
#[pyfunction(name = "irregular_audit")]
fn py_irregular_audit(py: Python<'_>, base: Vec<BigUint>, desc: &PyDescriptor) -> PyResult<Py<PyAny>> {
    let g = build_rep_graph(&base, &desc.0.terms()).map_err(to_py)?;
    to_dict(py, &irregular_audit(&g, &desc.0, default_sieve()).map_err(to_py)?)
}

#[pymodule]
#[pyo3(name = "prodap")]
fn prodap_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("ProdapError", py.get_type::<ProdapError>())?;
    m.add("InputError", py.get_type::<InputError>())?;
    m.add("CapacityError", py.get_type::<CapacityError>())?;
    m.add("FalsificationError", py.get_type::<FalsificationError>())?;
    m.add_class::<PyDescriptor>()?;
    m.add_class::<PyQuadElem>()?;
    m.add_class::<PyInstance>()?;
    m.add_function(wrap_pyfunction!(py_product_set, m)?)?;
    m.add_function(wrap_pyfunction!(py_longest_ap, m)?)?;
    m.add_function(wrap_pyfunction!(py_theorem2_set, m)?)?;
    m.add_function(wrap_pyfunction!(py_coverage_check, m)?)?;
    m.add_function(wrap_pyfunction!(py_reduce_ap, m)?)?;
    m.add_function(wrap_pyfunction!(py_irregular_audit, m)?)?;
    Ok(())
}

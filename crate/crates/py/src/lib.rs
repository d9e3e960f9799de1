//! Python bindings for `qcspectra`.
//!
//! Maps are wrapped as `Map` objects built from the same descriptor strings
//! the command line accepts; structured results come back as plain `dict`s
//! carrying the JSON layout of the Rust reports. Parameter errors raise
//! `ValueError`, numerical failures `RuntimeError`.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use qcspectra::bounds::{self, Beta};
use qcspectra::discquad::{self, QuadratureSpec};
use qcspectra::eigsolver::{minimize_eigen, EigenOptions};
use qcspectra::maps;
use qcspectra::mesh::{mesh_disc_spec, push_forward, MeshSpec};
use qcspectra::quasidisc::{mp_constant, quasidisc_lower_bound};
use qcspectra::verify::{theoretical_bound, verify_bound, VerifyOptions, VerifyVariant};
use qcspectra::{Error, LogValue, MapDescriptor};
use serde::Serialize;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Parameter(_) | Error::Parse(_) | Error::OutsideDisc(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for qcspectra::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

/// Converts any serialisable report into Python objects through `json`.
fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn parse_beta(beta: &str) -> PyResult<Beta> {
    beta.parse().py()
}

fn parse_variant(variant: &str) -> PyResult<VerifyVariant> {
    variant.parse().py()
}

fn quadrature(radial: Option<usize>, angular: Option<usize>) -> PyResult<QuadratureSpec> {
    let mut spec = QuadratureSpec::default();
    if let Some(n) = radial {
        spec.radial_nodes = n;
    }
    if let Some(n) = angular {
        spec.angular_nodes = n;
    }
    spec.validate().py()?;
    Ok(spec)
}

fn log_dict<'py>(py: Python<'py>, v: &LogValue) -> PyResult<Bound<'py, PyAny>> {
    let value = serde_json::json!({
        "ln": v.ln_abs(),
        "value": v.to_f64(),
        "decimal": v.to_decimal_string(),
    });
    to_py(py, &value)
}

/// A quasiconformal map of the unit disc from the catalog.
///
/// `Map("identity")`, `Map("epicycloid:A=2,B=1,n=3")`, `Map("ellipse-shear:a=0.5")`,
/// `Map("rose-petal")`, `Map("linear-shear:a=1,profile=sine,amp=0.5,freq=2")`.
#[pyclass(name = "Map", module = "qcspectra_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyMap {
    inner: MapDescriptor,
}

#[pymethods]
impl PyMap {
    #[new]
    fn new(descriptor: &str) -> PyResult<Self> {
        Ok(PyMap {
            inner: descriptor.parse().py()?,
        })
    }

    /// Builds a map from its JSON record, as found in saved outputs.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text)
            .map(|inner| PyMap { inner })
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind_name()
    }

    #[getter(K)]
    fn k(&self) -> f64 {
        self.inner.info().k
    }

    /// Closed-form image area, or `None` when it needs quadrature.
    #[getter]
    fn area(&self) -> Option<f64> {
        self.inner.info().area
    }

    #[getter]
    fn measure_preserving(&self) -> bool {
        self.inner.info().measure_preserving
    }

    fn info<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.info())
    }

    fn evaluate(&self, z: Complex64) -> PyResult<Complex64> {
        self.inner.evaluate(z).py()
    }

    fn jacobian(&self, z: Complex64) -> PyResult<f64> {
        self.inner.jacobian(z).py()
    }

    fn local_distortion(&self, z: Complex64) -> PyResult<f64> {
        self.inner.local_distortion(z).py()
    }

    /// Image of `n` equally spaced points of the unit circle.
    #[pyo3(signature = (n = 256))]
    fn boundary(&self, n: usize) -> Vec<Complex64> {
        self.inner.boundary(n)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Map('{}')", self.inner)
    }
}

/// The catalog maps with their default parameters.
#[pyfunction]
fn catalog() -> Vec<PyMap> {
    maps::catalog().into_iter().map(|inner| PyMap { inner }).collect()
}

/// `π_p`, half the length of the p-circle.
#[pyfunction]
fn pi_p(p: f64) -> PyResult<f64> {
    bounds::pi_p(p).py()
}

/// `(π_p/d)^p`, the lower bound for convex domains of diameter `d`.
#[pyfunction]
fn convex_lower_bound(p: f64, diameter: f64) -> PyResult<f64> {
    bounds::convex_lower_bound(p, diameter).py()
}

/// Lower bound for μ_p of `map(D)` without an eigenvalue solve.
///
/// `variant` is `auto`, `inf-regular`, `quasidisc`, `beta-regular:<β>`,
/// `measure-preserving[:<β|inf>]` or `intro-form[:<β|inf>]`.
#[pyfunction]
#[pyo3(signature = (map, p, variant = "auto", quad_radial = None, quad_angular = None))]
fn bound<'py>(
    py: Python<'py>,
    map: &PyMap,
    p: f64,
    variant: &str,
    quad_radial: Option<usize>,
    quad_angular: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let variant = parse_variant(variant)?;
    let spec = quadrature(quad_radial, quad_angular)?;
    let (resolved, theory) = py.detach(|| theoretical_bound(&map.inner, p, variant, &spec)).py()?;
    let out = to_py(py, &theory)?;
    out.set_item("variant", resolved.to_string())?;
    out.set_item("mu_lower_log", log_dict(py, &theory.mu_lower())?)?;
    Ok(out)
}

/// Quasidisc constants `M_p(K)` and `M_p*(K)`, and the bound for an area.
#[pyfunction]
#[pyo3(name = "quasidisc", signature = (k, p, area = None))]
fn quasidisc_constants<'py>(py: Python<'py>, k: f64, p: f64, area: Option<f64>) -> PyResult<Bound<'py, PyAny>> {
    let c = py.detach(|| mp_constant(k, p)).py()?;
    let out = to_py(py, &c)?;
    out.set_item("M_p_log", log_dict(py, &c.mp)?)?;
    out.set_item("M_p_star_log", log_dict(py, &c.mp_star)?)?;
    if let Some(a) = area {
        let b = py.detach(|| quasidisc_lower_bound(k, p, a)).py()?;
        out.set_item("mu_lower_log", log_dict(py, &b.mu_lower)?)?;
    }
    Ok(out)
}

/// `‖J_φ | L_β(D)‖`; `beta` is a number ≥ 1 or `"inf"`.
#[pyfunction]
#[pyo3(signature = (map, beta, quad_radial = None, quad_angular = None))]
fn jacobian_norm(
    py: Python<'_>,
    map: &PyMap,
    beta: &Bound<'_, PyAny>,
    quad_radial: Option<usize>,
    quad_angular: Option<usize>,
) -> PyResult<f64> {
    let beta = match beta.extract::<f64>() {
        Ok(b) if b.is_infinite() => Beta::Infinite,
        Ok(b) => Beta::Finite(b),
        Err(_) => parse_beta(&beta.extract::<String>()?)?,
    };
    let spec = quadrature(quad_radial, quad_angular)?;
    py.detach(|| match beta {
        Beta::Finite(b) => discquad::jacobian_norm(&map.inner, b, &spec),
        Beta::Infinite => discquad::jacobian_sup(&map.inner, &spec).map(|s| s.value),
    })
    .py()
}

/// Area of `map(D)` by quadrature.
#[pyfunction]
#[pyo3(signature = (map, quad_radial = None, quad_angular = None))]
fn image_area(py: Python<'_>, map: &PyMap, quad_radial: Option<usize>, quad_angular: Option<usize>) -> PyResult<f64> {
    let spec = quadrature(quad_radial, quad_angular)?;
    py.detach(|| discquad::image_area(&map.inner, &spec)).py()
}

fn eigen_options(tol: f64, starts: usize, seed: u64, max_iter: usize) -> EigenOptions {
    EigenOptions {
        tolerance: tol,
        max_iter,
        starts,
        seed,
    }
}

/// First non-trivial Neumann eigenvalue of the p-Laplacian on `map(D)`.
///
/// The result holds `mu`, the minimising field on the mesh vertices, the
/// Rayleigh trace and a summary of every start.
#[pyfunction]
#[pyo3(signature = (map, p, rings = 64, tol = 1e-8, starts = 3, seed = 0, max_iter = 5000))]
#[allow(clippy::too_many_arguments)]
fn eigen<'py>(
    py: Python<'py>,
    map: &PyMap,
    p: f64,
    rings: usize,
    tol: f64,
    starts: usize,
    seed: u64,
    max_iter: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let opts = eigen_options(tol, starts, seed, max_iter);
    let (mesh, result) = py
        .detach(|| {
            let mesh = push_forward(&mesh_disc_spec(&MeshSpec::for_map(rings, &map.inner))?, &map.inner)?;
            let r = minimize_eigen(&mesh, p, &opts)?;
            Ok((mesh, r))
        })
        .py()?;
    let out = to_py(py, &result)?;
    out.set_item("field", result.field.values())?;
    out.set_item("rings", rings)?;
    out.set_item("trace_monotone", result.trace_is_monotone())?;
    let vertices: Vec<(f64, f64)> = mesh.vertices.iter().map(|v| (v[0], v[1])).collect();
    out.set_item("vertices", vertices)?;
    Ok(out)
}

/// Compares a lower bound with the computed eigenvalue; the result's
/// `status` is `pass`, `fail` or `inconclusive`.
#[pyfunction]
#[pyo3(signature = (map, p, variant = "auto", rings = 64, tol = 1e-8, starts = 3, seed = 0, max_iter = 5000))]
#[allow(clippy::too_many_arguments)]
fn verify<'py>(
    py: Python<'py>,
    map: &PyMap,
    p: f64,
    variant: &str,
    rings: usize,
    tol: f64,
    starts: usize,
    seed: u64,
    max_iter: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let variant = parse_variant(variant)?;
    let opts = VerifyOptions {
        rings,
        eigen: eigen_options(tol, starts, seed, max_iter),
        quadrature: QuadratureSpec::default(),
    };
    let (report, _) = py.detach(|| verify_bound(&map.inner, p, variant, &opts)).py()?;
    to_py(py, &report)
}

#[pymodule]
fn qcspectra_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMap>()?;
    m.add_function(wrap_pyfunction!(catalog, m)?)?;
    m.add_function(wrap_pyfunction!(pi_p, m)?)?;
    m.add_function(wrap_pyfunction!(convex_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(bound, m)?)?;
    m.add_function(wrap_pyfunction!(quasidisc_constants, m)?)?;
    m.add_function(wrap_pyfunction!(jacobian_norm, m)?)?;
    m.add_function(wrap_pyfunction!(image_area, m)?)?;
    m.add_function(wrap_pyfunction!(eigen, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

//! Python module `hida`: symbol spaces, ordinary levels, unit roots and
//! verification runs.

use hida_core::exactlin::ZpRing;
use hida_core::harness::{self, VerificationConfig};
use hida_core::hecke::hecke_t;
use hida_core::modsym::{build_space, CuspidalData, LevelParams};
use hida_core::ordinary;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Round-trips through the `json` module so nested results arrive as plain
/// dicts and lists.
fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(value_error)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn int_rows(m: &hida_core::exactlin::IntMatrix) -> PyResult<Vec<Vec<i64>>> {
    let flat = m.to_i64().ok_or_else(|| value_error("matrix entry exceeds 64 bits"))?;
    Ok(flat.chunks(m.cols().max(1)).take(m.rows()).map(<[i64]>::to_vec).collect())
}

/// Weight-2 Manin symbols for `Gamma1(tame * prime^exponent)`.
#[pyclass(name = "SymbolSpace", frozen)]
struct PySymbolSpace {
    inner: hida_core::modsym::SymbolSpace,
}

#[pymethods]
impl PySymbolSpace {
    #[new]
    fn new(py: Python<'_>, tame: u64, prime: u64, exponent: u32) -> PyResult<Self> {
        let params = LevelParams::new(tame, prime, exponent).map_err(value_error)?;
        let inner = py.detach(|| build_space(params)).map_err(value_error)?;
        Ok(Self { inner })
    }

    #[getter]
    fn level(&self) -> u64 {
        self.inner.level()
    }

    /// Manin symbols up to sign.
    #[getter]
    fn symbol_classes(&self) -> usize {
        self.inner.symbols().len()
    }

    /// Rank of the symbol quotient.
    #[getter]
    fn rank(&self) -> usize {
        self.inner.rank()
    }

    fn cuspidal_rank(&self, py: Python<'_>) -> PyResult<usize> {
        py.detach(|| CuspidalData::new(&self.inner)).map(|c| c.dim()).map_err(value_error)
    }

    /// `T(n)` on the full quotient, as rows.
    fn hecke_matrix(&self, py: Python<'_>, n: u64) -> PyResult<Vec<Vec<i64>>> {
        if n == 0 {
            return Err(value_error("n must be positive"));
        }
        int_rows(&py.detach(|| hecke_t(&self.inner, n)).matrix)
    }

    fn __repr__(&self) -> String {
        format!("SymbolSpace(level={}, rank={})", self.inner.level(), self.inner.rank())
    }
}

/// The ordinary part of the cuspidal lattice at one level.
#[pyclass(name = "OrdinaryLevel", frozen)]
struct PyOrdinaryLevel {
    inner: ordinary::OrdinaryLevel,
}

#[pymethods]
impl PyOrdinaryLevel {
    #[new]
    #[pyo3(signature = (tame, prime, exponent, precision = harness::DEFAULT_PRECISION, n_max = None))]
    fn new(py: Python<'_>, tame: u64, prime: u64, exponent: u32, precision: u32, n_max: Option<u64>) -> PyResult<Self> {
        let params = LevelParams::new(tame, prime, exponent).map_err(value_error)?;
        let inner = py
            .detach(|| -> Result<_, String> {
                let space = build_space(params).map_err(|e| e.to_string())?;
                ordinary::OrdinaryLevel::build(space, precision, n_max).map_err(|e| e.to_string())
            })
            .map_err(value_error)?;
        Ok(Self { inner })
    }

    #[getter]
    fn level(&self) -> u64 {
        self.inner.level()
    }

    #[getter]
    fn prime(&self) -> u64 {
        self.inner.prime()
    }

    #[getter]
    fn precision(&self) -> u32 {
        self.inner.ring().precision()
    }

    #[getter]
    fn n_max(&self) -> u64 {
        self.inner.n_max()
    }

    #[getter]
    fn cuspidal_rank(&self) -> usize {
        self.inner.hecke().dim()
    }

    #[getter]
    fn ordinary_rank(&self) -> usize {
        self.inner.decomposition().rank()
    }

    /// `T(n)` on the ordinary summand, entries as residues mod `p^k`.
    fn ordinary_operator(&self, py: Python<'_>, n: u64) -> PyResult<Vec<Vec<String>>> {
        let m = py.detach(|| self.inner.ordinary_operator(n)).map_err(value_error)?;
        Ok((0..m.rows()).map(|i| m.row(i).iter().map(|x| x.to_string()).collect()).collect())
    }

    /// Ordinary rank, rank of the dual form lattice and the valuation of
    /// the duality determinant.
    fn rank_duality<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let (rank, forms) = py
            .detach(|| -> Result<_, ordinary::OrdinaryError> {
                let algebra = self.inner.algebra()?;
                let forms = self.inner.qexp(&algebra)?;
                Ok((algebra.rank(), forms))
            })
            .map_err(value_error)?;
        let summary = serde_json::json!({
            "ordinary_rank": self.inner.decomposition().rank(),
            "algebra_rank": rank,
            "form_rank": forms.rank(),
            "duality_valuation": forms.duality_valuation,
        });
        to_py(py, &summary)
    }

    /// Eigen packets as dicts, coefficients in the symmetric residue range.
    fn packets<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let records = py
            .detach(|| -> Result<Vec<_>, ordinary::OrdinaryError> {
                let algebra = self.inner.algebra()?;
                Ok(self.inner.packets(&algebra)?.iter().map(|p| p.record()).collect())
            })
            .map_err(value_error)?;
        to_py(py, &records)
    }

    fn __repr__(&self) -> String {
        format!("OrdinaryLevel(level={}, ordinary_rank={})", self.inner.level(), self.inner.decomposition().rank())
    }
}

/// The root of `X^2 - a_p X + p chi_p` that is a unit, in the symmetric range mod `p^k`.
#[pyfunction]
#[pyo3(signature = (a_p, chi_p, prime, precision = harness::DEFAULT_PRECISION))]
fn unit_root(a_p: i64, chi_p: i64, prime: u64, precision: u32) -> PyResult<String> {
    let ring = ZpRing::new(prime, precision).map_err(value_error)?;
    let root = ordinary::unit_root(ring.scalar_i64(a_p), ring.scalar_i64(chi_p)).map_err(value_error)?;
    Ok(root.symmetric().to_string())
}

/// The default verification configuration as a dict.
#[pyfunction]
fn default_config(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &VerificationConfig::default())
}

/// Runs the checks described by a JSON configuration (the default one when
/// omitted) and returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (config_json = None))]
fn verify<'py>(py: Python<'py>, config_json: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let config: VerificationConfig = match config_json {
        Some(text) => serde_json::from_str(text).map_err(value_error)?,
        None => VerificationConfig::default(),
    };
    let report = py.detach(|| harness::run(&config)).map_err(value_error)?;
    to_py(py, &report)
}

#[pymodule]
fn hida(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySymbolSpace>()?;
    m.add_class::<PyOrdinaryLevel>()?;
    m.add_function(wrap_pyfunction!(unit_root, m)?)?;
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}

//! Python bindings for twistlab.

use std::sync::Arc;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyTuple};

use twistlab::expr::{self, Bindings};
use twistlab::relations::{mutation_sweep, Catalog};
use twistlab::{
    abelianize, braid_with, commutes, double_cover_h1, find_triangle, first_difference, mc_equal, run_suite,
    transvection_rank_lower_bound, validate_table, ElementaryTable, Error, SurfaceModel, WordError,
};

create_exception!(twistlab, TwistlabError, PyException, "Base class for twistlab errors.");
create_exception!(twistlab, ParseError, TwistlabError, "Malformed factorization.");
create_exception!(twistlab, WordLengthError, TwistlabError, "A word grew past the length guard.");

fn err(e: Error) -> PyErr {
    match e {
        Error::Word(WordError::Overflow { .. }) => WordLengthError::new_err(e.to_string()),
        Error::Parse(_) => ParseError::new_err(e.to_string()),
        _ => TwistlabError::new_err(e.to_string()),
    }
}

fn to_py_json<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(value).map_err(|e| TwistlabError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (s,))
}

/// The model surface N_{k,1} with its elementary table.
#[pyclass(frozen, module = "twistlab")]
struct Surface {
    table: Arc<ElementaryTable>,
}

#[pymethods]
impl Surface {
    /// Accepts a crosscap count or a string such as "N5,1".
    #[new]
    fn new(model_arg: &Bound<'_, PyAny>) -> PyResult<Self> {
        let model = match model_arg.extract::<usize>() {
            Ok(k) => SurfaceModel::new(k).map_err(err)?,
            Err(_) => {
                let s: String = model_arg.extract()?;
                s.parse::<SurfaceModel>().map_err(err)?
            }
        };
        Ok(Surface { table: Arc::new(ElementaryTable::standard(model)) })
    }

    #[getter]
    fn crosscaps(&self) -> usize {
        self.table.model().crosscaps()
    }

    #[getter]
    fn rank(&self) -> usize {
        self.table.model().rank()
    }

    #[getter]
    fn boundary(&self) -> String {
        self.table.model().boundary().to_string()
    }

    fn two_sided_intervals(&self) -> Vec<(usize, usize)> {
        self.table.model().two_sided_intervals().iter().map(|iv| (iv.i, iv.j)).collect()
    }

    fn identity(&self) -> MappingClass {
        MappingClass { inner: twistlab::MappingClass::identity(self.table.clone()) }
    }

    fn twist(&self, i: usize, j: usize) -> PyResult<MappingClass> {
        let inner = twistlab::MappingClass::twist(self.table.clone(), i, j).map_err(err)?;
        Ok(MappingClass { inner })
    }

    /// Parses a factorization. Keyword arguments bind names to expressions or mapping classes,
    /// in order, so later ones may refer to earlier ones.
    #[pyo3(signature = (src, **bindings))]
    fn parse(&self, src: &str, bindings: Option<&Bound<'_, PyDict>>) -> PyResult<MappingClass> {
        let mut env = Bindings::new();
        if let Some(d) = bindings {
            for (name, value) in d.iter() {
                let name: String = name.extract()?;
                let mc = match value.cast::<MappingClass>() {
                    Ok(m) => m.get().inner.with_table(self.table.clone()).map_err(err)?,
                    Err(_) => expr::mapping_class(&value.extract::<String>()?, &self.table, &env).map_err(err)?,
                };
                env.insert(name, mc);
            }
        }
        let inner = expr::mapping_class(src, &self.table, &env).map_err(err)?;
        Ok(MappingClass { inner })
    }

    /// Runs the table self-checks and returns the report as a dict.
    fn validate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py_json(py, &validate_table(&self.table))
    }

    fn describe<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py_json(py, &self.table.describe())
    }

    fn __str__(&self) -> String {
        self.table.model().to_string()
    }

    fn __repr__(&self) -> String {
        format!("Surface('{}')", self.table.model())
    }
}

/// A mapping class given as a product of twists, the transposition and the boundary twist.
#[pyclass(frozen, module = "twistlab")]
struct MappingClass {
    inner: twistlab::MappingClass,
}

#[pymethods]
impl MappingClass {
    #[getter]
    fn crosscaps(&self) -> usize {
        self.inner.crosscaps()
    }

    /// Images of x1..xk under the induced automorphism.
    fn images(&self) -> PyResult<Vec<String>> {
        let w = self.inner.witness().map_err(err)?;
        Ok(w.forward().images().iter().map(|w| w.to_string()).collect())
    }

    fn inverse(&self) -> MappingClass {
        MappingClass { inner: self.inner.inverse() }
    }

    fn conjugate(&self, inner: &MappingClass) -> PyResult<MappingClass> {
        Ok(MappingClass { inner: self.inner.conjugate(&inner.inner).map_err(err)? })
    }

    fn is_identity(&self) -> PyResult<bool> {
        self.inner.is_identity().map_err(err)
    }

    fn equals(&self, other: &MappingClass) -> PyResult<bool> {
        mc_equal(&self.inner, &other.inner).map_err(err)
    }

    /// Index of the first generator whose images differ, or None.
    fn first_difference(&self, other: &MappingClass) -> PyResult<Option<usize>> {
        first_difference(&self.inner, &other.inner).map_err(err)
    }

    fn commutes(&self, other: &MappingClass) -> PyResult<bool> {
        commutes(&self.inner, &other.inner).map_err(err)
    }

    fn braids_with(&self, other: &MappingClass) -> PyResult<bool> {
        braid_with(&self.inner, &other.inner).map_err(err)
    }

    /// Action on H1 of the orientation double cover, or of the surface itself with base=True.
    #[pyo3(signature = (modulus = None, base = false))]
    fn homology(&self, modulus: Option<i64>, base: bool) -> PyResult<Vec<Vec<i64>>> {
        if let Some(m) = modulus {
            if m < 2 {
                return Err(err(Error::InvalidModulus(m)));
            }
        }
        let raw = if base {
            abelianize(self.inner.witness().map_err(err)?.forward())
        } else {
            double_cover_h1(&self.inner).map_err(err)?
        };
        Ok(modulus.map_or(raw.clone(), |m| raw.reduce_mod(m)).to_rows())
    }

    fn __mul__(&self, other: &MappingClass) -> PyResult<MappingClass> {
        Ok(MappingClass { inner: self.inner.mul(&other.inner).map_err(err)? })
    }

    fn __pow__(&self, n: i64, _modulo: Option<Py<PyAny>>) -> MappingClass {
        MappingClass { inner: self.inner.power(n) }
    }

    fn __eq__(&self, other: &Bound<'_, PyAny>) -> PyResult<bool> {
        match other.cast::<MappingClass>() {
            Ok(o) => mc_equal(&self.inner, &o.get().inner).map_err(err),
            Err(_) => Ok(false),
        }
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("MappingClass('{}', '{}')", self.inner.model(), self.inner)
    }
}

/// Runs the bundled relation catalog and returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (filter = None, parallel = true, mutations = false))]
fn suite<'py>(py: Python<'py>, filter: Option<&str>, parallel: bool, mutations: bool) -> PyResult<Bound<'py, PyAny>> {
    let cat = Catalog::builtin();
    let report = run_suite(&cat, filter, parallel);
    let out = to_py_json(py, &report)?;
    if mutations {
        out.set_item("mutations", to_py_json(py, &mutation_sweep(&cat, filter))?)?;
    }
    Ok(out)
}

/// Searches for a triangle witness up to the given pushing depth.
#[pyfunction]
#[pyo3(signature = (surface, depth = 3))]
fn triangle<'py>(py: Python<'py>, surface: &Surface, depth: usize) -> PyResult<Option<Bound<'py, PyTuple>>> {
    match find_triangle(&surface.table, depth).map_err(err)? {
        Some(t) => Ok(Some(PyTuple::new(py, t.describe())?)),
        None => Ok(None),
    }
}

/// Rank of the span of M - I over the given pairwise commuting classes.
#[pyfunction]
fn rank_lower_bound(classes: Vec<PyRef<'_, MappingClass>>) -> PyResult<usize> {
    let v: Vec<_> = classes.iter().map(|c| c.inner.clone()).collect();
    transvection_rank_lower_bound(&v).map_err(err)
}

#[pyfunction]
fn set_max_word_length(n: usize) {
    twistlab::word::set_max_word_length(n);
}

#[pyfunction]
fn max_word_length() -> usize {
    twistlab::word::max_word_length()
}

#[pymodule]
#[pyo3(name = "twistlab")]
fn twistlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add_class::<Surface>()?;
    m.add_class::<MappingClass>()?;
    m.add_function(wrap_pyfunction!(suite, m)?)?;
    m.add_function(wrap_pyfunction!(triangle, m)?)?;
    m.add_function(wrap_pyfunction!(rank_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(set_max_word_length, m)?)?;
    m.add_function(wrap_pyfunction!(max_word_length, m)?)?;
    m.add("TwistlabError", py.get_type::<TwistlabError>())?;
    m.add("ParseError", py.get_type::<ParseError>())?;
    m.add("WordLengthError", py.get_type::<WordLengthError>())?;
    Ok(())
}

//! Python bindings: systems, analysis, sampling, property checks and census.

use std::str::FromStr;

use maltsev_models::algebra::FiniteAlgebra;
use maltsev_models::analysis::analyze;
use maltsev_models::asymptotics::parameters;
use maltsev_models::builtins::{builtin_system, BuiltinId};
use maltsev_models::census::{parse_property_list, sample_algebra, sweep_census, to_csv, Experiment};
use maltsev_models::cli::{analysis_json, load_system};
use maltsev_models::factory::{build_dispatch, FamilyLayout};
use maltsev_models::kelly::entails_identity;
use maltsev_models::syntax::{parse_identity, parse_system, render_system, SystemSpec};
use maltsev_models::{props, Budget, Error};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

create_exception!(maltsev_py, MaltsevError, PyException);

fn py_err(e: Error) -> PyErr {
    MaltsevError::new_err(e.to_string())
}

/// A linear system of identities.
#[pyclass(module = "maltsev_py", frozen)]
pub struct System {
    spec: SystemSpec,
}

#[pymethods]
impl System {
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(System {
            spec: parse_system(text).map_err(py_err)?,
        })
    }

    /// A builtin such as `"hagemann-mitschke:3"`, or a path to a .mlt file.
    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        let spec = match BuiltinId::from_str(name) {
            Ok(id) => builtin_system(&id),
            Err(_) => load_system(name),
        }
        .map_err(py_err)?;
        Ok(System { spec })
    }

    #[getter]
    fn name(&self) -> String {
        self.spec.name.clone()
    }

    fn render(&self) -> String {
        render_system(&self.spec)
    }

    /// The analysis report as a JSON string.
    fn analyze(&self) -> PyResult<String> {
        let doc = analysis_json(&self.spec, &Budget::default()).map_err(py_err)?;
        Ok(doc.to_string())
    }

    fn entails(&self, identity: &str) -> PyResult<bool> {
        let id = parse_identity(&self.spec.signature, identity).map_err(py_err)?;
        let e = entails_identity(&self.spec, &id, &Budget::default()).map_err(py_err)?;
        Ok(e.entailed)
    }

    fn d_min(&self) -> PyResult<usize> {
        let a = analyze(&self.spec, &Budget::default()).map_err(py_err)?;
        Ok(parameters(&a.transversal).map_err(py_err)?.d_min)
    }

    fn p_of_k(&self, k: u64) -> PyResult<u64> {
        let a = analyze(&self.spec, &Budget::default()).map_err(py_err)?;
        parameters(&a.transversal).map_err(py_err)?.p(k).map_err(py_err)
    }

    /// Whether random finite models are almost surely idemprimal.
    fn almost_surely_idemprimal(&self) -> PyResult<bool> {
        let a = analyze(&self.spec, &Budget::default()).map_err(py_err)?;
        let v = parameters(&a.transversal).map_err(py_err)?.idemprimality_verdict().map_err(py_err)?;
        Ok(v.almost_surely)
    }

    /// Uniformly random models on `n` elements; sample `j` uses stream `j` of `seed`.
    #[pyo3(signature = (n, seed, count = 1))]
    fn sample(&self, n: usize, seed: u64, count: u64) -> PyResult<Vec<Algebra>> {
        let budget = Budget::default();
        let a = analyze(&self.spec, &budget).map_err(py_err)?;
        let dispatch = build_dispatch(&a).map_err(py_err)?;
        let layout = FamilyLayout::new(&a, &dispatch, n, &budget).map_err(py_err)?;
        Ok((0..count)
            .map(|j| Algebra {
                inner: sample_algebra(&layout, seed, j),
            })
            .collect())
    }

    fn __repr__(&self) -> String {
        format!("System({:?})", self.spec.name)
    }
}

/// A finite algebra given by operation tables.
#[pyclass(module = "maltsev_py", frozen)]
pub struct Algebra {
    inner: FiniteAlgebra,
}

#[pymethods]
impl Algebra {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Algebra {
            inner: FiniteAlgebra::from_json(text).map_err(py_err)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    fn table(&self, operation: usize) -> PyResult<Vec<u32>> {
        self.inner
            .operations
            .get(operation)
            .map(|o| o.table.clone())
            .ok_or_else(|| MaltsevError::new_err(format!("no operation {operation}")))
    }

    fn is_subuniverse(&self, subset: Vec<u32>) -> PyResult<bool> {
        Ok(props::is_subuniverse(&self.inner, &subset).map_err(py_err)?.holds)
    }

    fn has_proper_subalgebra(&self) -> PyResult<bool> {
        Ok(props::has_proper_subalgebra_size_gt1(&self.inner).map_err(py_err)?.holds)
    }

    fn has_nontrivial_automorphism(&self) -> PyResult<bool> {
        Ok(props::has_nontrivial_automorphism(&self.inner, &Budget::default())
            .map_err(py_err)?
            .holds)
    }

    fn has_compatible_cross(&self) -> PyResult<bool> {
        Ok(props::has_compatible_cross(&self.inner).map_err(py_err)?.holds)
    }

    fn is_idemprimal(&self) -> PyResult<bool> {
        Ok(props::is_idemprimal(&self.inner, &Budget::default()).map_err(py_err)?.holds)
    }

    fn __repr__(&self) -> String {
        format!("Algebra(n={}, operations={})", self.inner.n, self.inner.operations.len())
    }
}

/// Monte Carlo census over the given carrier sizes, returned as CSV text.
#[pyfunction]
#[pyo3(signature = (system, sizes, samples, seed, properties, threads = 1))]
fn census(
    py: Python<'_>,
    system: &System,
    sizes: Vec<usize>,
    samples: u64,
    seed: u64,
    properties: &str,
    threads: usize,
) -> PyResult<String> {
    let first = *sizes
        .first()
        .ok_or_else(|| MaltsevError::new_err("no carrier sizes given"))?;
    let exp = Experiment {
        spec: system.spec.clone(),
        n: first,
        samples,
        master_seed: seed,
        properties: parse_property_list(properties).map_err(py_err)?,
        threads,
        budget: Budget::default(),
    };
    py.detach(|| sweep_census(&exp, &sizes).and_then(|r| to_csv(&r)))
        .map_err(py_err)
}

#[pymodule]
pub fn maltsev_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<System>()?;
    m.add_class::<Algebra>()?;
    m.add_function(wrap_pyfunction!(census, m)?)?;
    m.add("MaltsevError", m.py().get_type::<MaltsevError>())?;
    Ok(())
}

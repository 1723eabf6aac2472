//! Python bindings for `deco_state`.

use std::collections::BTreeMap;

use deco_state::corpus;
use deco_state::decorations::{has_kind, infer_kind, Kind};
use deco_state::kernel::{Equation as CoreEquation, Mode};
use deco_state::memory::{MemorySignature, Store};
use deco_state::script::{check_script, replay, ProofScript};
use deco_state::semantics::{check_semantic, enumerate_values, eval, SemanticVerdict};
use deco_state::sweep::{sweep as run_sweep, SweepConfig, DEFAULT_SEED};
use deco_state::syntax::{parse_equation, parse_signature, parse_term};
use deco_state::terms::Term as CoreTerm;
use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn kind_from(name: &str) -> PyResult<Kind> {
    Kind::ALL
        .into_iter()
        .find(|k| k.as_str() == name)
        .ok_or_else(|| PyValueError::new_err(format!("unknown kind {name:?}")))
}

/// Locations with their finite value carriers.
#[pyclass(frozen, skip_from_py_object, module = "deco_state_py")]
#[derive(Clone)]
pub struct Signature(MemorySignature);

#[pymethods]
impl Signature {
    /// `Signature({"i": ["0", "1"], "j": ["0", "1"]})`; keys keep insertion order.
    #[new]
    fn new(locations: &Bound<'_, PyDict>) -> PyResult<Self> {
        let mut entries = Vec::new();
        for (k, v) in locations.iter() {
            entries.push((k.extract::<String>()?, v.extract::<Vec<String>>()?));
        }
        MemorySignature::from_pairs(entries).map(Signature).map_err(value_error)
    }

    #[staticmethod]
    fn parse(src: &str) -> PyResult<Self> {
        parse_signature(src).map(Signature).map_err(value_error)
    }

    #[staticmethod]
    fn default() -> Self {
        Signature(corpus::default_signature())
    }

    #[getter]
    fn locations(&self) -> Vec<String> {
        self.0.locations().iter().map(|l| l.to_string()).collect()
    }

    fn carrier(&self, loc: &str) -> PyResult<Vec<String>> {
        let l = loc.into();
        self.0
            .carrier(&l)
            .map(|c| c.iter().map(|v| v.to_string()).collect())
            .ok_or_else(|| PyKeyError::new_err(loc.to_string()))
    }

    fn store_count(&self) -> usize {
        self.0.store_count()
    }

    /// Every store as a `{location: value}` dict.
    fn stores(&self) -> Vec<BTreeMap<String, String>> {
        self.0.stores().map(|s| store_dict(&self.0, &s)).collect()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Signature.parse({:?})", self.0.to_string())
    }
}

fn store_dict(sig: &MemorySignature, s: &Store) -> BTreeMap<String, String> {
    sig.locations()
        .iter()
        .enumerate()
        .map(|(n, l)| (l.to_string(), s.get(n).to_string()))
        .collect()
}

/// A well-typed term.
#[pyclass(frozen, eq, hash, skip_from_py_object, module = "deco_state_py")]
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Term(CoreTerm);

#[pymethods]
impl Term {
    #[staticmethod]
    #[pyo3(signature = (src, sig = None))]
    fn parse(src: &str, sig: Option<&Signature>) -> PyResult<Self> {
        let sig = sig.map_or_else(corpus::default_signature, |s| s.0.clone());
        parse_term(src, &sig).map(Term).map_err(value_error)
    }

    #[getter]
    fn dom(&self) -> String {
        self.0.dom().to_string()
    }

    #[getter]
    fn cod(&self) -> String {
        self.0.cod().to_string()
    }

    /// Least decoration: `"pure"`, `"ro"` or `"rw"`.
    #[getter]
    fn kind(&self) -> &'static str {
        infer_kind(&self.0).as_str()
    }

    fn has_kind(&self, kind: &str) -> PyResult<bool> {
        Ok(has_kind(&self.0, kind_from(kind)?))
    }

    #[getter]
    fn depth(&self) -> usize {
        self.0.depth()
    }

    /// The whole graph as `(input, store, result, final_store)` tuples.
    #[pyo3(signature = (sig = None))]
    #[allow(clippy::type_complexity)]
    fn graph(
        &self,
        sig: Option<&Signature>,
    ) -> PyResult<Vec<(String, BTreeMap<String, String>, String, BTreeMap<String, String>)>> {
        let sig = sig.map_or_else(corpus::default_signature, |s| s.0.clone());
        let mut out = Vec::new();
        for x in enumerate_values(&sig, self.0.dom()) {
            for s in sig.stores() {
                let (r, s1) = eval(&sig, &self.0, &x, &s).map_err(value_error)?;
                out.push((x.to_string(), store_dict(&sig, &s), r.to_string(), store_dict(&sig, &s1)));
            }
        }
        Ok(out)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Term.parse({:?})", self.0.to_string())
    }
}

/// A strong (`==`) or weak (`~`) equation.
#[pyclass(frozen, eq, hash, skip_from_py_object, module = "deco_state_py")]
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Equation(CoreEquation);

#[pymethods]
impl Equation {
    #[staticmethod]
    #[pyo3(signature = (src, sig = None))]
    fn parse(src: &str, sig: Option<&Signature>) -> PyResult<Self> {
        let sig = sig.map_or_else(corpus::default_signature, |s| s.0.clone());
        parse_equation(src, &sig).map(Equation).map_err(value_error)
    }

    #[getter]
    fn lhs(&self) -> Term {
        Term(self.0.lhs().clone())
    }

    #[getter]
    fn rhs(&self) -> Term {
        Term(self.0.rhs().clone())
    }

    #[getter]
    fn strong(&self) -> bool {
        self.0.mode() == Mode::Strong
    }

    /// `None` if the equation holds on every input and store, otherwise a
    /// counterexample dict.
    #[pyo3(signature = (sig = None))]
    fn counterexample<'py>(
        &self,
        py: Python<'py>,
        sig: Option<&Signature>,
    ) -> PyResult<Option<Bound<'py, PyDict>>> {
        let sig = sig.map_or_else(corpus::default_signature, |s| s.0.clone());
        match check_semantic(&sig, &self.0).map_err(value_error)? {
            SemanticVerdict::Holds => Ok(None),
            SemanticVerdict::Counterexample(c) => {
                let d = PyDict::new(py);
                d.set_item("input", c.input.to_string())?;
                d.set_item("store", store_dict(&sig, &c.store))?;
                d.set_item("lhs", (c.lhs_out.0.to_string(), store_dict(&sig, &c.lhs_out.1)))?;
                d.set_item("rhs", (c.rhs_out.0.to_string(), store_dict(&sig, &c.rhs_out.1)))?;
                Ok(Some(d))
            }
        }
    }

    #[pyo3(signature = (sig = None))]
    fn holds(&self, sig: Option<&Signature>) -> PyResult<bool> {
        let sig = sig.map_or_else(corpus::default_signature, |s| s.0.clone());
        Ok(check_semantic(&sig, &self.0).map_err(value_error)?.holds())
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Equation.parse({:?})", self.0.to_string())
    }
}

/// Checks a proof script. Returns a dict with `accepted`, and either the
/// proof shape or the rejection reason and failing path.
#[pyfunction]
#[pyo3(signature = (src, sig = None))]
fn check_proof<'py>(py: Python<'py>, src: &str, sig: Option<&Signature>) -> PyResult<Bound<'py, PyDict>> {
    let script = ProofScript::parse(src).map_err(value_error)?;
    let sig = script
        .resolve_signature(sig.map(|s| &s.0))
        .map_err(value_error)?;
    let d = PyDict::new(py);
    match check_script(&script, &sig) {
        Ok(c) => {
            d.set_item("accepted", true)?;
            d.set_item("goal", c.goal.to_string())?;
            d.set_item("top_rule", c.proof.rule.camel_name())?;
            d.set_item("nodes", c.proof.size())?;
            d.set_item("labels", c.proof.labels())?;
        }
        Err(e) => {
            d.set_item("accepted", false)?;
            d.set_item("reason", e.code())?;
            d.set_item("message", e.to_string())?;
            d.set_item("failing_path", e.failing_path())?;
        }
    }
    Ok(d)
}

/// Checks a script against its `expect` line and the semantic oracle.
#[pyfunction]
#[pyo3(signature = (src, sig = None))]
fn replay_ok(src: &str, sig: Option<&Signature>) -> PyResult<bool> {
    let script = ProofScript::parse(src).map_err(value_error)?;
    let sig = script
        .resolve_signature(sig.map(|s| &s.0))
        .map_err(value_error)?;
    Ok(replay(&script, &sig).ok)
}

/// Source of the update/lookup commutation proof for two distinct locations.
#[pyfunction]
fn commutation_script(i: &str, j: &str) -> PyResult<String> {
    corpus::commutation_update_lookup(&i.into(), &j.into())
        .map(|s| s.source)
        .map_err(value_error)
}

/// Runs the rule soundness sweep; returns `{rule: (accepted, violations)}`.
#[pyfunction]
#[pyo3(signature = (per_rule = 1000, seed = DEFAULT_SEED))]
fn sweep(per_rule: usize, seed: u64) -> BTreeMap<String, (usize, usize)> {
    let cfg = SweepConfig { seed, per_rule, ..SweepConfig::default() };
    run_sweep(&corpus::default_signature(), &cfg)
        .rules
        .iter()
        .map(|r| (r.rule.clone(), (r.accepted, r.violations.len())))
        .collect()
}

#[pymodule]
pub fn deco_state_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Signature>()?;
    m.add_class::<Term>()?;
    m.add_class::<Equation>()?;
    m.add_function(wrap_pyfunction!(check_proof, m)?)?;
    m.add_function(wrap_pyfunction!(replay_ok, m)?)?;
    m.add_function(wrap_pyfunction!(commutation_script, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    Ok(())
}

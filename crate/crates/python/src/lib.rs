//! Python bindings: nets, queries, checking, the LP prefilter, witness replay
//! and benchmark generation.

use std::collections::BTreeMap;
use std::time::Duration;

use hyperpn::checker::{self, Options};
use hyperpn::encodings::{self, BenchmarkKind, SampleParams, TopologyFormat};
use hyperpn::formula::{self, HyperQuery};
use hyperpn::io;
use hyperpn::lp::{self, PrefilterOutcome};
use hyperpn::net::{Marking, Step};
use pyo3::exceptions::{PyRuntimeError, PyTimeoutError, PyValueError};
use pyo3::prelude::*;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "Net", module = "hyperpn_py", frozen)]
pub struct PyNet {
    pub inner: hyperpn::net::Net,
}

#[pymethods]
impl PyNet {
    /// Parses the native line format.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        io::parse_net(text).map(|inner| PyNet { inner }).map_err(value_err)
    }

    #[staticmethod]
    fn from_pnml(text: &str) -> PyResult<Self> {
        io::parse_pnml(text).map(|inner| PyNet { inner }).map_err(value_err)
    }

    #[staticmethod]
    fn read(path: std::path::PathBuf) -> PyResult<Self> {
        io::read_net(&path).map(|inner| PyNet { inner }).map_err(value_err)
    }

    fn to_text(&self) -> String {
        io::write_net(&self.inner)
    }

    #[getter]
    fn places(&self) -> Vec<String> {
        self.inner.places().map(|p| self.inner.place_name(p).to_string()).collect()
    }

    #[getter]
    fn transitions(&self) -> Vec<String> {
        self.inner.transitions().map(|t| self.inner.transition_name(t).to_string()).collect()
    }

    #[getter]
    fn initial_marking(&self) -> Vec<u64> {
        self.inner.initial_marking().tokens().to_vec()
    }

    /// `(transition or None for stutter, marking)` per successor of `marking`.
    fn successors(&self, marking: Vec<u64>) -> PyResult<Vec<(Option<String>, Vec<u64>)>> {
        let m = Marking::new(marking);
        self.inner.check_marking(&m).map_err(value_err)?;
        let succ = self.inner.successors(&m).map_err(value_err)?;
        Ok(succ
            .into_iter()
            .map(|(s, m)| {
                let t = match s {
                    Step::Fire(t) => Some(self.inner.transition_name(t).to_string()),
                    Step::Stutter => None,
                };
                (t, m.into_inner())
            })
            .collect())
    }

    fn __repr__(&self) -> String {
        format!("Net({} places, {} transitions)", self.inner.place_count(), self.inner.transition_count())
    }
}

#[pyclass(name = "Query", module = "hyperpn_py", frozen)]
pub struct PyQuery {
    pub inner: HyperQuery,
}

#[pymethods]
impl PyQuery {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        io::parse_query_file(text).map(|inner| PyQuery { inner }).map_err(value_err)
    }

    #[getter]
    fn existential(&self) -> bool {
        self.inner.quantifier == formula::Quantifier::Exists
    }

    #[getter]
    fn vars(&self) -> Vec<String> {
        self.inner.vars.clone()
    }

    fn negate(&self) -> Self {
        PyQuery {
            inner: formula::negate_query(&self.inner),
        }
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Query({:?})", self.inner.to_string())
    }
}

#[pyclass(name = "Verdict", module = "hyperpn_py", frozen, get_all)]
pub struct PyVerdict {
    satisfied: bool,
    configurations_explored: usize,
    peak_stored: usize,
    buchi_states: usize,
    wall_time: f64,
    refuted_by_lp: bool,
    /// Witness in the XML result format, if any.
    witness_xml: Option<String>,
}

#[pymethods]
impl PyVerdict {
    fn __bool__(&self) -> bool {
        self.satisfied
    }

    fn __repr__(&self) -> String {
        format!(
            "Verdict(satisfied={}, configurations_explored={}, refuted_by_lp={})",
            self.satisfied, self.configurations_explored, self.refuted_by_lp
        )
    }
}

/// Decides `query` on `net`. Raises `TimeoutError` on timeout and
/// `RuntimeError` when the configuration cap is hit.
#[pyfunction]
#[pyo3(signature = (net, query, lp_prefilter = true, timeout = None, config_cap = 10_000_000))]
fn check(
    py: Python<'_>,
    net: &PyNet,
    query: &PyQuery,
    lp_prefilter: bool,
    timeout: Option<f64>,
    config_cap: usize,
) -> PyResult<PyVerdict> {
    let opts = Options {
        lp_prefilter,
        config_cap,
        timeout: timeout.map(Duration::from_secs_f64),
    };
    let (n, q) = (&net.inner, &query.inner);
    let v = py.detach(|| checker::check(n, q, &opts)).map_err(|e| match e {
        checker::CheckError::Timeout { .. } => PyTimeoutError::new_err(e.to_string()),
        checker::CheckError::ConfigCap { .. } => PyRuntimeError::new_err(e.to_string()),
        e => value_err(e),
    })?;
    Ok(PyVerdict {
        satisfied: v.satisfied,
        configurations_explored: v.stats.configurations_explored,
        peak_stored: v.stats.peak_stored,
        buchi_states: v.stats.buchi_states,
        wall_time: v.stats.wall_time.as_secs_f64(),
        refuted_by_lp: v.stats.refuted_by_lp,
        witness_xml: v
            .witness
            .as_ref()
            .map(|w| io::write_witness_xml(n, v.satisfied, v.stats.configurations_explored, w)),
    })
}

/// `(refuted, reason)`; the reason is empty when refuted.
#[pyfunction]
fn prefilter(net: &PyNet, query: &PyQuery) -> (bool, String) {
    match lp::prefilter(&net.inner, &query.inner) {
        PrefilterOutcome::Refuted => (true, String::new()),
        PrefilterOutcome::Inconclusive(r) => (false, r),
    }
}

/// Replays a witness; raises `ValueError` describing the first illegal step.
#[pyfunction]
fn replay(net: &PyNet, witness_xml: &str) -> PyResult<()> {
    let doc = io::parse_witness_xml(witness_xml, &net.inner).map_err(value_err)?;
    doc.witness.replay(&net.inner).map(|_| ()).map_err(value_err)
}

type Instance = (PyNet, PyQuery, BTreeMap<String, String>);

/// Samples benchmark instances from a topology given as GraphML or edge-list
/// text. Returns `(net, query, metadata)` triples.
#[pyfunction]
#[pyo3(signature = (topology, kind, k = 2, l = 1, scale = 1, count = 5, seed = 0, graphml = false))]
#[allow(clippy::too_many_arguments)]
fn sample_instances(
    topology: &str,
    kind: &str,
    k: usize,
    l: u64,
    scale: u64,
    count: usize,
    seed: u64,
    graphml: bool,
) -> PyResult<Vec<Instance>> {
    let format = if graphml { TopologyFormat::GraphMl } else { TopologyFormat::EdgeList };
    let topo = encodings::parse_topology(topology.as_bytes(), format).map_err(value_err)?;
    let kind = match kind {
        "congestion" => BenchmarkKind::Congestion,
        "latency" => BenchmarkKind::Latency,
        "selfcompose" => BenchmarkKind::SelfComposed,
        other => return Err(value_err(format!("unknown kind `{other}`"))),
    };
    let insts = encodings::sample_instances(&topo, kind, SampleParams { k, l, scale }, count, seed).map_err(value_err)?;
    Ok(insts
        .into_iter()
        .map(|i| {
            let meta = io::write_metadata(&i.metadata)
                .lines()
                .filter_map(|l| l.split_once(": "))
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect();
            (PyNet { inner: i.net }, PyQuery { inner: i.query }, meta)
        })
        .collect())
}

#[pymodule]
fn hyperpn_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNet>()?;
    m.add_class::<PyQuery>()?;
    m.add_class::<PyVerdict>()?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(prefilter, m)?)?;
    m.add_function(wrap_pyfunction!(replay, m)?)?;
    m.add_function(wrap_pyfunction!(sample_instances, m)?)?;
    Ok(())
}

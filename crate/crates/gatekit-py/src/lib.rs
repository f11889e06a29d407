//! Python bindings: AIG parsing and analysis, simulation, the embedding
//! model, dataset construction, training, SAT sweeping and solving.

use gatekit::aig;
use gatekit::dataset;
use gatekit::model;
use gatekit::sat;
use gatekit::sim;
use gatekit::sweep as sweep_mod;
use gatekit::train;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use std::path::PathBuf;

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_to_py<'py>(py: Python<'py>, v: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    use serde_json::Value;
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_pyobject(py)?.into_any()
            } else if let Some(u) = n.as_u64() {
                u.into_pyobject(py)?.into_any()
            } else {
                n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any()
            }
        }
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, val) in map {
                dict.set_item(k, json_to_py(py, val)?)?;
            }
            dict.into_any()
        }
    })
}

fn to_py_dict<'py, T: serde::Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let json = serde_json::to_value(v).map_err(runtime_err)?;
    json_to_py(py, &json)
}

/// An immutable And-Inverter Graph.
#[pyclass(name = "Aig", frozen)]
struct PyAig {
    inner: aig::Aig,
}

#[pymethods]
impl PyAig {
    /// Parse an ASCII AIGER (`aag`) document.
    #[staticmethod]
    fn from_aiger(text: &str) -> PyResult<Self> {
        Ok(PyAig {
            inner: aig::parse_aiger(text).map_err(value_err)?,
        })
    }

    fn to_aiger(&self) -> String {
        aig::write_aiger(&self.inner)
    }

    #[getter]
    fn num_nodes(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn num_pis(&self) -> usize {
        self.inner.num_pis()
    }

    #[getter]
    fn num_ands(&self) -> usize {
        self.inner.num_ands()
    }

    #[getter]
    fn num_nots(&self) -> usize {
        self.inner.num_nots()
    }

    #[getter]
    fn num_pos(&self) -> usize {
        self.inner.pos().len()
    }

    #[getter]
    fn depth(&self) -> u32 {
        self.inner.depth()
    }

    fn levels(&self) -> Vec<u32> {
        self.inner.levels().to_vec()
    }

    /// PI node ids in the transitive fan-in of `node`.
    fn support(&self, node: usize) -> PyResult<Vec<usize>> {
        let cone = self.inner.support(node).map_err(value_err)?;
        Ok(cone.support.into_iter().collect())
    }

    fn has_common_predecessor(&self, i: usize, j: usize) -> PyResult<bool> {
        self.inner.has_common_predecessor(i, j).map_err(value_err)
    }

    /// Extract the cone of `root` as a standalone circuit.
    fn extract_cone(&self, root: usize) -> PyResult<Self> {
        let ext = self.inner.extract_cone(root).map_err(value_err)?;
        Ok(PyAig { inner: ext.aig })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Aig(pis={}, ands={}, nots={}, pos={}, depth={})",
            self.inner.num_pis(),
            self.inner.num_ands(),
            self.inner.num_nots(),
            self.inner.pos().len(),
            self.inner.depth()
        )
    }
}

/// Generate a seeded random AIG (testing and experimentation).
#[pyfunction]
#[pyo3(signature = (num_pi, num_gates, seed=0, not_prob=0.3, strash=false))]
fn random_aig(num_pi: usize, num_gates: usize, seed: u64, not_prob: f64, strash: bool) -> PyAig {
    PyAig {
        inner: aig::random_aig(&aig::RandomAigConfig {
            num_pi,
            num_gates,
            not_prob,
            locality: 0.5,
            strash,
            seed,
        }),
    }
}

fn sim_config(patterns: usize, seed: u64) -> sim::SimConfig {
    sim::SimConfig {
        num_patterns: patterns,
        seed,
        exhaustive_when_small: true,
    }
}

/// Simulated logic-1 probability per node.
#[pyfunction]
#[pyo3(signature = (aig, patterns=15000, seed=0))]
fn simulate_probs(aig: &PyAig, patterns: usize, seed: u64) -> PyResult<Vec<f64>> {
    let plan = sim_config(patterns, seed).patterns_for(aig.inner.num_pis());
    let pi_sigs = plan.generate(aig.inner.num_pis());
    let sigs = sim::simulate(&aig.inner, &pi_sigs).map_err(runtime_err)?;
    Ok(sigs.iter().map(sim::logic_prob).collect())
}

/// Normalized truth-table distance between two nodes under simulation.
#[pyfunction]
#[pyo3(signature = (aig, i, j, patterns=15000, seed=0))]
fn tt_distance(aig: &PyAig, i: usize, j: usize, patterns: usize, seed: u64) -> PyResult<f64> {
    let n = aig.inner.len();
    if i >= n || j >= n {
        return Err(value_err(format!("node out of range for {n} nodes")));
    }
    let plan = sim_config(patterns, seed).patterns_for(aig.inner.num_pis());
    let pi_sigs = plan.generate(aig.inner.num_pis());
    let sigs = sim::simulate(&aig.inner, &pi_sigs).map_err(runtime_err)?;
    sim::tt_distance(&sigs[i], &sigs[j]).map_err(runtime_err)
}

/// The one-round embedding model.
#[pyclass(name = "Model")]
struct PyModel {
    params: model::ModelParams,
}

#[pymethods]
impl PyModel {
    #[new]
    #[pyo3(signature = (dim=64, hidden=32, pie_enabled=true, seed=0))]
    fn new(dim: usize, hidden: usize, pie_enabled: bool, seed: u64) -> Self {
        PyModel {
            params: model::ModelParams::init(&model::ModelConfig {
                dim,
                hidden,
                pie_enabled,
                seed,
            }),
        }
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(PyModel {
            params: model::load_checkpoint(&path).map_err(runtime_err)?,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        model::save_checkpoint(&self.params, &path).map_err(runtime_err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.params.config.dim
    }

    /// Per-node functional embeddings (one row per node).
    fn embeddings(&self, aig: &PyAig) -> PyResult<Vec<Vec<f64>>> {
        model::functional_embeddings(&aig.inner, &self.params).map_err(runtime_err)
    }

    /// Predicted logic-1 probability per node (PIs fixed at 0.5).
    fn predict_probs(&self, aig: &PyAig) -> PyResult<Vec<f64>> {
        model::predict_probs(&aig.inner, &self.params).map_err(runtime_err)
    }

    /// Cosine similarity of the functional embeddings of two nodes.
    fn similarity(&self, aig: &PyAig, i: usize, j: usize) -> PyResult<f64> {
        let emb = model::functional_embeddings(&aig.inner, &self.params).map_err(runtime_err)?;
        let n = aig.inner.len();
        if i >= n || j >= n {
            return Err(value_err(format!("node out of range for {n} nodes")));
        }
        let dot: f64 = emb[i].iter().zip(&emb[j]).map(|(a, b)| a * b).sum();
        let ni: f64 = emb[i].iter().map(|x| x * x).sum::<f64>().sqrt();
        let nj: f64 = emb[j].iter().map(|x| x * x).sum::<f64>().sqrt();
        if ni == 0.0 || nj == 0.0 {
            return Err(runtime_err("zero embedding vector"));
        }
        Ok(dot / (ni * nj))
    }
}

/// Build a labeled dataset file from AIGER texts.
#[pyfunction]
#[pyo3(signature = (aiger_texts, path, patterns=15000, max_pairs=1000, seed=0))]
fn build_dataset(
    aiger_texts: Vec<String>,
    path: PathBuf,
    patterns: usize,
    max_pairs: usize,
    seed: u64,
) -> PyResult<usize> {
    let mut records = Vec::with_capacity(aiger_texts.len());
    for (i, text) in aiger_texts.iter().enumerate() {
        let circuit = aig::parse_aiger(text).map_err(value_err)?;
        let record = dataset::CircuitRecord::build(
            circuit,
            &sim_config(patterns, seed),
            max_pairs,
            seed + i as u64,
        )
        .map_err(runtime_err)?;
        records.push(record);
    }
    dataset::write_dataset(&records, &path).map_err(runtime_err)?;
    Ok(records.len())
}

/// Train on a dataset file; writes a checkpoint and returns the held-out
/// evaluation report as a dict (or None when the split has no positives).
#[pyfunction]
#[pyo3(signature = (dataset_path, ckpt_path, dim=64, hidden=32, epochs_stage1=20,
    epochs_stage2=40, batch=16, lr=1e-4, weight_decay=1e-10, pie_enabled=true,
    multistage_enabled=true, seed=0))]
#[allow(clippy::too_many_arguments)]
fn train_model<'py>(
    py: Python<'py>,
    dataset_path: PathBuf,
    ckpt_path: PathBuf,
    dim: usize,
    hidden: usize,
    epochs_stage1: usize,
    epochs_stage2: usize,
    batch: usize,
    lr: f64,
    weight_decay: f64,
    pie_enabled: bool,
    multistage_enabled: bool,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let records = dataset::read_dataset(&dataset_path).map_err(runtime_err)?;
    let (train_split, val_split, test_split) = gatekit::cli::split_corpus(records, seed);
    let config = train::TrainConfig {
        epochs_stage1,
        epochs_stage2,
        batch_size: batch,
        lr,
        weight_decay,
        multistage_enabled,
        seed,
        ..train::TrainConfig::default()
    };
    let params = model::ModelParams::init(&model::ModelConfig {
        dim,
        hidden,
        pie_enabled,
        seed,
    });
    let outcome =
        train::train_multistage(&train_split, &[], params, &config).map_err(runtime_err)?;
    model::save_checkpoint(&outcome.params, &ckpt_path).map_err(runtime_err)?;
    match train::evaluate(&outcome.params, &val_split, &test_split) {
        Ok(report) => to_py_dict(py, &report),
        Err(train::TrainError::NoPositivePairs) => Ok(py.None().into_bound(py)),
        Err(e) => Err(runtime_err(e)),
    }
}

/// Evaluate a checkpoint against a dataset file.
#[pyfunction]
#[pyo3(signature = (ckpt_path, dataset_path, seed=0))]
fn evaluate_model<'py>(
    py: Python<'py>,
    ckpt_path: PathBuf,
    dataset_path: PathBuf,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let params = model::load_checkpoint(&ckpt_path).map_err(runtime_err)?;
    let records = dataset::read_dataset(&dataset_path).map_err(runtime_err)?;
    let (_, val_split, test_split) = gatekit::cli::split_corpus(records, seed);
    let report = train::evaluate(&params, &val_split, &test_split).map_err(runtime_err)?;
    to_py_dict(py, &report)
}

/// SAT-sweep a circuit; returns `(swept_aig, stats_dict)`.
#[pyfunction]
#[pyo3(signature = (aig, model=None, patterns=64, seed=0, pair_conflicts=10000))]
fn sweep<'py>(
    py: Python<'py>,
    aig: &PyAig,
    model: Option<&PyModel>,
    patterns: usize,
    seed: u64,
    pair_conflicts: u64,
) -> PyResult<(PyAig, Bound<'py, PyAny>)> {
    let budgets = sweep_mod::SweepBudgets {
        pair_conflicts,
        max_sat_calls: None,
    };
    let outcome = sweep_mod::sweep(
        &aig.inner,
        model.map(|m| &m.params),
        &sim_config(patterns, seed),
        &budgets,
    )
    .map_err(runtime_err)?;
    Ok((PyAig { inner: outcome.aig }, to_py_dict(py, &outcome.stats)?))
}

/// Decide a DIMACS CNF; returns `(status, model_or_None, stats_dict)`.
#[pyfunction]
#[pyo3(signature = (text, max_conflicts=None))]
fn solve_dimacs<'py>(
    py: Python<'py>,
    text: &str,
    max_conflicts: Option<u64>,
) -> PyResult<(String, Option<Vec<bool>>, Bound<'py, PyAny>)> {
    let cnf = sat::parse_dimacs(text).map_err(value_err)?;
    let limits = sat::SolveLimits { max_conflicts };
    let result = sat::solve(&cnf, None, &limits).map_err(runtime_err)?;
    let status = match result.status {
        sat::SolveStatus::Sat => "sat",
        sat::SolveStatus::Unsat => "unsat",
        sat::SolveStatus::Unknown => "unknown",
    };
    Ok((status.to_string(), result.model, to_py_dict(py, &result.stats)?))
}

/// Assert a PO of a circuit and decide satisfiability, optionally with the
/// similarity decision hook driven by a model's embeddings.
#[pyfunction]
#[pyo3(signature = (aig, assert_value=true, model=None, delta=1e-5, max_conflicts=None))]
fn solve_aiger<'py>(
    py: Python<'py>,
    aig: &PyAig,
    assert_value: bool,
    model: Option<&PyModel>,
    delta: f64,
    max_conflicts: Option<u64>,
) -> PyResult<(String, Option<Vec<bool>>, Bound<'py, PyAny>)> {
    let po = *aig
        .inner
        .pos()
        .first()
        .ok_or_else(|| value_err("circuit has no primary output"))?;
    let cnf = sat::tseitin(&aig.inner, po, assert_value).map_err(value_err)?;
    let index = match model {
        Some(m) => {
            let emb =
                model::functional_embeddings(&aig.inner, &m.params).map_err(runtime_err)?;
            let var_embeddings: Vec<(usize, Vec<f64>)> = cnf
                .var_of_node
                .iter()
                .map(|(&node, &var)| (var, emb[node].clone()))
                .collect();
            Some(sat::SimilarityIndex::build(
                cnf.num_vars,
                &var_embeddings,
                delta,
            ))
        }
        None => None,
    };
    let limits = sat::SolveLimits { max_conflicts };
    let result = sat::solve(&cnf, index.as_ref(), &limits).map_err(runtime_err)?;
    let status = match result.status {
        sat::SolveStatus::Sat => "sat",
        sat::SolveStatus::Unsat => "unsat",
        sat::SolveStatus::Unknown => "unknown",
    };
    Ok((status.to_string(), result.model, to_py_dict(py, &result.stats)?))
}

#[pymodule]
fn gatekit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyAig>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(random_aig, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_probs, m)?)?;
    m.add_function(wrap_pyfunction!(tt_distance, m)?)?;
    m.add_function(wrap_pyfunction!(build_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(train_model, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_model, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(solve_dimacs, m)?)?;
    m.add_function(wrap_pyfunction!(solve_aiger, m)?)?;
    Ok(())
}

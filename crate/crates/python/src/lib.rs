//! Python bindings: metric extraction, datasets, training, prediction and
//! evaluation.

use std::path::PathBuf;

use lowfault_core::classifier::LowRiskClassifier;
use lowfault_core::config::ConfigError;
use lowfault_core::dataset::{self, MethodRecord};
use lowfault_core::discretize::itemset_names;
use lowfault_core::evaluation::{EvaluationReport, RiskRatio};
use lowfault_core::parser::analyze_source as analyze;
use lowfault_core::synthetic::{generate_corpus, CorpusConfig};
use lowfault_core::{
    classify, cross_project_eval, pipeline, within_project_eval, CategoryId, CountMetricId, MetricVector,
    NumericMetricId, PipelineConfig,
};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyList};
use pyo3::IntoPyObjectExt;

create_exception!(lowfault, LowfaultError, PyException);

fn err(e: impl std::fmt::Display) -> PyErr {
    LowfaultError::new_err(e.to_string())
}

fn config_err(e: ConfigError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn pipeline_err(e: pipeline::Error) -> PyErr {
    match e {
        pipeline::Error::Config(c) => config_err(c),
        other => err(other),
    }
}

fn metrics_dict(m: &MetricVector, d: &Bound<'_, PyDict>) -> PyResult<()> {
    for id in NumericMetricId::ALL {
        d.set_item(id.column(), m.numeric(*id))?;
    }
    for id in CountMetricId::ALL {
        d.set_item(id.column(), m.count(*id))?;
    }
    for c in CategoryId::ALL {
        d.set_item(c.column(), m.has(*c))?;
    }
    Ok(())
}

/// Pipeline thresholds and seeds. Keyword arguments override the defaults.
#[pyclass(name = "Config", module = "lowfault", skip_from_py_object)]
#[derive(Clone)]
struct PyConfig {
    inner: PipelineConfig,
}

impl PyConfig {
    fn apply(&mut self, kwargs: &Bound<'_, PyDict>) -> PyResult<()> {
        for (k, v) in kwargs.iter() {
            let key: String = k.extract()?;
            let text = if v.is_instance_of::<PyBool>() {
                v.extract::<bool>()?.to_string()
            } else {
                v.str()?.to_string()
            };
            self.inner.set(&key, &text).map_err(config_err)?;
        }
        Ok(())
    }
}

fn resolve(config: Option<&PyConfig>) -> PipelineConfig {
    config.map(|c| c.inner.clone()).unwrap_or_default()
}

#[pymethods]
impl PyConfig {
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut c = PyConfig {
            inner: PipelineConfig::default(),
        };
        if let Some(kw) = kwargs {
            c.apply(kw)?;
        }
        Ok(c)
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        PipelineConfig::from_toml(text)
            .map(|inner| PyConfig { inner })
            .map_err(config_err)
    }

    fn to_toml(&self) -> String {
        self.inner.to_toml()
    }

    /// A copy with some keys changed.
    #[pyo3(signature = (**kwargs))]
    fn replace(&self, kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut c = self.clone();
        if let Some(kw) = kwargs {
            c.apply(kw)?;
        }
        Ok(c)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for key in PipelineConfig::KEYS {
            d.set_item(key, self.get(py, key)?)?;
        }
        Ok(d)
    }

    fn __getattr__(&self, py: Python<'_>, name: &str) -> PyResult<Py<PyAny>> {
        self.get(py, name)
    }

    fn __repr__(&self) -> String {
        let body: Vec<String> = self.inner.to_toml().lines().map(|l| l.replace(" = ", "=")).collect();
        format!("Config({})", body.join(", "))
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

impl PyConfig {
    fn get(&self, py: Python<'_>, key: &str) -> PyResult<Py<PyAny>> {
        let c = &self.inner;
        match key {
            "min_support" => c.min_support.into_py_any(py),
            "min_confidence" => c.min_confidence.into_py_any(py),
            "max_antecedent_len" => c.max_antecedent_len.into_py_any(py),
            "selection_threshold" => c.selection_threshold.into_py_any(py),
            "cv_folds" => c.cv_folds.into_py_any(py),
            "smote_ratio" => c.smote_ratio.into_py_any(py),
            "smote_k" => c.smote_k.into_py_any(py),
            "undersample" => c.undersample.into_py_any(py),
            "smote_seed" => c.smote_seed.into_py_any(py),
            "fold_seed" => c.fold_seed.into_py_any(py),
            "allow_unbalanced" => c.allow_unbalanced.into_py_any(py),
            other => Err(pyo3::exceptions::PyAttributeError::new_err(format!("Config has no key `{other}`"))),
        }
    }
}

/// Method records of one or more projects.
#[pyclass(name = "Dataset", module = "lowfault", skip_from_py_object)]
#[derive(Clone)]
struct PyDataset {
    records: Vec<MethodRecord>,
}

#[pymethods]
impl PyDataset {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        dataset::load_records(&path).map(|records| PyDataset { records }).map_err(err)
    }

    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        dataset::read_records(text.as_bytes())
            .map(|records| PyDataset { records })
            .map_err(err)
    }

    /// Extract the methods of one source file.
    #[staticmethod]
    #[pyo3(signature = (source, file_path, project = "project"))]
    fn from_source(source: &str, file_path: &str, project: &str) -> PyResult<Self> {
        let methods = analyze(source, file_path).map_err(err)?;
        let records = methods
            .into_iter()
            .map(|m| MethodRecord::new(project, m.span.method_id(), m.metrics))
            .collect();
        Ok(PyDataset { records })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        dataset::save_records(&path, &self.records).map_err(err)
    }

    fn to_csv(&self) -> PyResult<String> {
        let mut out = Vec::new();
        dataset::write_records(&mut out, &self.records).map_err(err)?;
        String::from_utf8(out).map_err(err)
    }

    /// Set fault flags from a list of method ids; returns ids matching nothing.
    fn attach_labels(&mut self, labels: Vec<String>) -> Vec<String> {
        dataset::attach_labels(&mut self.records, &labels).unmatched
    }

    fn projects(&self) -> Vec<String> {
        dataset::group_by_project(self.records.clone())
            .into_iter()
            .map(|d| d.project)
            .collect()
    }

    /// Records of one project only.
    fn project(&self, name: &str) -> Self {
        PyDataset {
            records: self.records.iter().filter(|r| r.project == name).cloned().collect(),
        }
    }

    #[getter]
    fn n_faulty(&self) -> usize {
        self.records.iter().filter(|r| r.faulty).count()
    }

    fn records<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyList>> {
        let list = PyList::empty(py);
        for r in &self.records {
            let d = PyDict::new(py);
            d.set_item("project", &r.project)?;
            d.set_item("method_id", &r.method_id)?;
            metrics_dict(&r.metrics, &d)?;
            d.set_item("faulty", r.faulty)?;
            list.append(d)?;
        }
        Ok(list)
    }

    fn __len__(&self) -> usize {
        self.records.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset({} methods, {} faulty, projects={:?})",
            self.records.len(),
            self.n_faulty(),
            self.projects()
        )
    }
}

/// A trained low-fault-risk classifier.
#[pyclass(name = "Model", module = "lowfault")]
struct PyModel {
    classifier: LowRiskClassifier,
    config: Option<PipelineConfig>,
    #[pyo3(get)]
    warnings: Vec<String>,
}

#[pymethods]
impl PyModel {
    #[getter]
    fn n(&self) -> usize {
        self.classifier.n()
    }

    #[getter]
    fn candidate_rules(&self) -> usize {
        self.classifier.candidate_rules
    }

    #[getter]
    fn selection_threshold(&self) -> f64 {
        self.classifier.selection_threshold
    }

    #[getter]
    fn matched_faulty_share(&self) -> f64 {
        self.classifier.matched_faulty_share()
    }

    #[getter]
    fn config(&self) -> Option<PyConfig> {
        self.config.clone().map(|inner| PyConfig { inner })
    }

    fn rules<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyList>> {
        let list = PyList::empty(py);
        for (k, r) in self.classifier.rules.iter().enumerate() {
            let d = PyDict::new(py);
            d.set_item("rank", k + 1)?;
            d.set_item("antecedent", itemset_names(r.antecedent))?;
            d.set_item("n_match", r.n_match)?;
            d.set_item("n_match_notfaulty", r.n_match_notfaulty)?;
            d.set_item("support", r.support())?;
            d.set_item("confidence", r.confidence())?;
            list.append(d)?;
        }
        Ok(list)
    }

    /// One dict per record: project, method_id, verdict, matched_rule.
    fn predict<'py>(&self, py: Python<'py>, data: &PyDataset) -> PyResult<Bound<'py, PyList>> {
        let list = PyList::empty(py);
        for r in &data.records {
            let p = classify(r, &self.classifier);
            let d = PyDict::new(py);
            d.set_item("project", &r.project)?;
            d.set_item("method_id", &p.method_id)?;
            d.set_item("verdict", p.verdict.as_str())?;
            d.set_item("matched_rule", p.matched_rule)?;
            list.append(d)?;
        }
        Ok(list)
    }

    fn to_toml(&self) -> String {
        self.classifier.to_toml(self.config.as_ref())
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        let (classifier, config) = LowRiskClassifier::from_toml(text).map_err(err)?;
        Ok(PyModel {
            classifier,
            config,
            warnings: Vec::new(),
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        std::fs::write(&path, self.to_toml()).map_err(err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let text = std::fs::read_to_string(&path).map_err(err)?;
        Self::from_toml(&text)
    }

    fn __repr__(&self) -> String {
        format!("Model(n={}, candidates={})", self.classifier.n(), self.classifier.candidate_rules)
    }
}

/// Metrics of every method in a Java source string.
#[pyfunction]
#[pyo3(signature = (source, file_path = "<memory>"))]
fn analyze_source<'py>(py: Python<'py>, source: &str, file_path: &str) -> PyResult<Bound<'py, PyList>> {
    let list = PyList::empty(py);
    for m in analyze(source, file_path).map_err(err)? {
        let d = PyDict::new(py);
        d.set_item("method_id", m.span.method_id())?;
        d.set_item("qualified_name", &m.span.qualified_name)?;
        d.set_item("start_line", m.span.start_line)?;
        d.set_item("end_line", m.span.end_line)?;
        let categories: Vec<&str> = m.metrics.categories.iter().map(|c| c.name()).collect();
        d.set_item("categories", categories)?;
        metrics_dict(&m.metrics, &d)?;
        list.append(d)?;
    }
    Ok(list)
}

/// Nearest-rank tertile boundaries `(t1, t2)`.
#[pyfunction]
fn compute_tertiles(values: Vec<u32>) -> PyResult<(u32, u32)> {
    lowfault_core::compute_tertiles(&values).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Labelled corpus with a planted low-risk method population.
#[pyfunction]
#[pyo3(signature = (n_projects = 6, seed = 42, methods_per_project = (1900, 2100)))]
fn synthetic_corpus(n_projects: usize, seed: u64, methods_per_project: (usize, usize)) -> PyDataset {
    let corpus = generate_corpus(&CorpusConfig {
        n_projects,
        seed,
        methods_per_project,
        ..Default::default()
    });
    PyDataset {
        records: corpus.into_iter().flat_map(|p| p.dataset.records).collect(),
    }
}

#[pyfunction]
#[pyo3(signature = (data, config = None))]
fn train(py: Python<'_>, data: &PyDataset, config: Option<&PyConfig>) -> PyResult<PyModel> {
    let cfg = resolve(config);
    let records = &data.records;
    let outcome = py.detach(|| pipeline::train(records, &cfg)).map_err(pipeline_err)?;
    Ok(PyModel {
        classifier: outcome.classifier,
        config: Some(cfg),
        warnings: outcome.warnings,
    })
}

fn ratio(r: RiskRatio) -> Option<f64> {
    r.value()
}

fn report_dict<'py>(py: Python<'py>, r: &EvaluationReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("scope", r.scope.kind())?;
    d.set_item("project", r.scope.project())?;
    d.set_item("fold", r.scope.fold())?;
    d.set_item("n_methods", r.n_methods)?;
    d.set_item("n_lfr_methods", r.n_lfr_methods)?;
    d.set_item("sloc_total", r.sloc_total)?;
    d.set_item("sloc_lfr", r.sloc_lfr)?;
    d.set_item("n_faulty", r.n_faulty)?;
    d.set_item("n_faulty_in_lfr", r.n_faulty_in_lfr)?;
    d.set_item("pct_methods_lfr", r.pct_methods_lfr())?;
    d.set_item("pct_sloc_lfr", r.pct_sloc_lfr())?;
    d.set_item("pct_faults_in_lfr", r.pct_faults_in_lfr())?;
    d.set_item("risk_ratio_methods", ratio(r.risk_ratio_methods()))?;
    d.set_item("risk_ratio_sloc", ratio(r.risk_ratio_sloc()))?;
    Ok(d)
}

/// Stratified cross-validation of every project: fold rows, then an
/// aggregate row per project.
#[pyfunction]
#[pyo3(signature = (data, config = None))]
fn evaluate_within<'py>(py: Python<'py>, data: &PyDataset, config: Option<&PyConfig>) -> PyResult<Bound<'py, PyList>> {
    let cfg = resolve(config);
    let projects = dataset::group_by_project(data.records.clone());
    let list = PyList::empty(py);
    for ds in &projects {
        let result = py.detach(|| within_project_eval(ds, &cfg)).map_err(pipeline_err)?;
        for r in result.folds.iter().chain([&result.aggregate]) {
            list.append(report_dict(py, r)?)?;
        }
    }
    Ok(list)
}

/// Leave-one-project-out prediction: one row per target project.
#[pyfunction]
#[pyo3(signature = (data, config = None))]
fn evaluate_cross<'py>(py: Python<'py>, data: &PyDataset, config: Option<&PyConfig>) -> PyResult<Bound<'py, PyList>> {
    let cfg = resolve(config);
    let projects = dataset::group_by_project(data.records.clone());
    let result = py.detach(|| cross_project_eval(&projects, &cfg)).map_err(pipeline_err)?;
    let list = PyList::empty(py);
    for r in &result.targets {
        list.append(report_dict(py, r)?)?;
    }
    Ok(list)
}

#[pymodule]
fn lowfault(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("LowfaultError", m.py().get_type::<LowfaultError>())?;
    m.add_class::<PyConfig>()?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(analyze_source, m)?)?;
    m.add_function(wrap_pyfunction!(compute_tertiles, m)?)?;
    m.add_function(wrap_pyfunction!(synthetic_corpus, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_within, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_cross, m)?)?;
    Ok(())
}

//! Labelled method records and their CSV persistence.
//!
//! Columns, in order:
//!
//! ```text
//! project, method_id, sloc, cyclomatic, max_nesting, num_params, num_statements,
//! cnt_loops, cnt_conditions, cnt_switch_cases, cnt_try, cnt_returns, cnt_throws,
//! cnt_casts, cnt_logical, cnt_arith, cnt_locals, cat_getter, cat_setter,
//! cat_constructor, cat_empty, cat_delegation, cat_eqhash, faulty
//! ```
//!
//! Booleans are `0`/`1`; the header row is mandatory. Fault labels come in a
//! separate file with one `method_id` per line.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::metric::{CategoryId, CountMetricId, MetricVector, NumericMetricId};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MethodRecord {
    pub project: String,
    /// `file_path::qualified_name`; unique within a project.
    pub method_id: String,
    pub metrics: MetricVector,
    /// Whether the method was faulty at least once.
    pub faulty: bool,
}

impl MethodRecord {
    pub fn new(project: impl Into<String>, method_id: impl Into<String>, metrics: MetricVector) -> Self {
        MethodRecord {
            project: project.into(),
            method_id: method_id.into(),
            metrics,
            faulty: false,
        }
    }

    pub fn sloc(&self) -> u32 {
        self.metrics.sloc()
    }
}

/// All records of one project in canonical (on-disk) order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectDataset {
    pub project: String,
    pub records: Vec<MethodRecord>,
}

impl ProjectDataset {
    pub fn new(project: impl Into<String>, records: Vec<MethodRecord>) -> Self {
        ProjectDataset {
            project: project.into(),
            records,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn n_faulty(&self) -> usize {
        self.records.iter().filter(|r| r.faulty).count()
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column(s): {}", .0.join(", "))]
    MissingColumns(Vec<String>),
    #[error("unknown column(s): {}", .0.join(", "))]
    UnknownColumns(Vec<String>),
    #[error("row {row}: column `{column}`: {reason} (value `{value}`)")]
    InvalidValue {
        row: usize,
        column: String,
        value: String,
        reason: &'static str,
    },
    #[error("row {row}: duplicate method_id `{method_id}` in project `{project}`")]
    DuplicateMethodId {
        row: usize,
        project: String,
        method_id: String,
    },
    #[error("expected a single project, found {}", .0.join(", "))]
    MultipleProjects(Vec<String>),
    #[error("dataset has no records")]
    Empty,
}

impl DatasetError {
    fn io(path: &Path, source: io::Error) -> Self {
        DatasetError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Column names in file order.
pub fn columns() -> Vec<&'static str> {
    let mut cols = vec!["project", "method_id"];
    cols.extend(NumericMetricId::ALL.iter().map(|m| m.column()));
    cols.extend(CountMetricId::ALL.iter().map(|m| m.column()));
    cols.extend(CategoryId::ALL.iter().map(|m| m.column()));
    cols.push("faulty");
    cols
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

pub fn write_records<W: Write>(out: W, records: &[MethodRecord]) -> Result<(), DatasetError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns())?;
    let mut row: Vec<String> = Vec::with_capacity(columns().len());
    for r in records {
        row.clear();
        row.push(r.project.clone());
        row.push(r.method_id.clone());
        row.extend(r.metrics.numeric.iter().map(u32::to_string));
        row.extend(r.metrics.counts.iter().map(u32::to_string));
        row.extend(CategoryId::ALL.iter().map(|c| flag(r.metrics.has(*c)).to_string()));
        row.push(flag(r.faulty).to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| DatasetError::Csv(e.into()))?;
    Ok(())
}

/// Parse records, keeping the `faulty` column. A missing `faulty` column
/// reads as unlabelled; lines starting with `#` are skipped.
pub fn read_records<R: Read>(input: R) -> Result<Vec<MethodRecord>, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let expected = columns();

    let unknown: Vec<String> = header
        .iter()
        .filter(|h| !expected.contains(&h.as_str()))
        .cloned()
        .collect();
    if !unknown.is_empty() {
        return Err(DatasetError::UnknownColumns(unknown));
    }
    let missing: Vec<String> = expected
        .iter()
        .filter(|c| **c != "faulty" && !header.iter().any(|h| h == *c))
        .map(|c| c.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(DatasetError::MissingColumns(missing));
    }
    let pos: HashMap<&str, usize> = header.iter().enumerate().map(|(i, h)| (h.as_str(), i)).collect();

    let mut records = Vec::new();
    let mut seen: HashSet<(String, String)> = HashSet::new();
    for (k, result) in rdr.records().enumerate() {
        let row = k + 1;
        let rec = result?;
        let field = |col: &str| rec.get(pos[col]).unwrap_or("");
        let int = |col: &str| -> Result<u32, DatasetError> {
            let raw = field(col);
            let invalid = |reason| DatasetError::InvalidValue {
                row,
                column: col.to_string(),
                value: raw.to_string(),
                reason,
            };
            let v: i64 = raw.trim().parse().map_err(|_| invalid("not an integer"))?;
            if v < 0 {
                return Err(invalid("negative value"));
            }
            u32::try_from(v).map_err(|_| invalid("value too large"))
        };
        let boolean = |col: &str| -> Result<bool, DatasetError> {
            match field(col).trim() {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(DatasetError::InvalidValue {
                    row,
                    column: col.to_string(),
                    value: other.to_string(),
                    reason: "expected 0 or 1",
                }),
            }
        };

        let mut metrics = MetricVector::default();
        for m in NumericMetricId::ALL {
            metrics.set_numeric(*m, int(m.column())?);
        }
        for m in CountMetricId::ALL {
            metrics.set_count(*m, int(m.column())?);
        }
        for c in CategoryId::ALL {
            metrics.categories.set(*c, boolean(c.column())?);
        }
        let project = field("project").to_string();
        let method_id = field("method_id").to_string();
        if method_id.is_empty() {
            return Err(DatasetError::InvalidValue {
                row,
                column: "method_id".into(),
                value: String::new(),
                reason: "empty method id",
            });
        }
        if !seen.insert((project.clone(), method_id.clone())) {
            return Err(DatasetError::DuplicateMethodId {
                row,
                project,
                method_id,
            });
        }
        records.push(MethodRecord {
            project,
            method_id,
            metrics,
            faulty: pos.contains_key("faulty") && boolean("faulty")?,
        });
    }
    Ok(records)
}

fn open(path: &Path) -> Result<File, DatasetError> {
    File::open(path).map_err(|e| DatasetError::io(path, e))
}

/// Load metric rows as unlabelled records (`faulty` is reset to false).
pub fn load_metrics_csv(path: impl AsRef<Path>) -> Result<Vec<MethodRecord>, DatasetError> {
    let mut records = read_records(open(path.as_ref())?)?;
    for r in &mut records {
        r.faulty = false;
    }
    Ok(records)
}

/// Load labelled records, possibly from several projects.
pub fn load_records(path: impl AsRef<Path>) -> Result<Vec<MethodRecord>, DatasetError> {
    read_records(open(path.as_ref())?)
}

pub fn save_records(path: impl AsRef<Path>, records: &[MethodRecord]) -> Result<(), DatasetError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| DatasetError::io(path, e))?;
    write_records(io::BufWriter::new(file), records)
}

pub fn save_dataset(dataset: &ProjectDataset, path: impl AsRef<Path>) -> Result<(), DatasetError> {
    save_records(path, &dataset.records)
}

/// Load a single-project dataset.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<ProjectDataset, DatasetError> {
    let mut sets = group_by_project(load_records(path)?);
    match sets.len() {
        0 => Err(DatasetError::Empty),
        1 => Ok(sets.remove(0)),
        _ => Err(DatasetError::MultipleProjects(
            sets.into_iter().map(|d| d.project).collect(),
        )),
    }
}

/// Split records into per-project datasets, in order of first appearance and
/// keeping record order within each project.
pub fn group_by_project(records: Vec<MethodRecord>) -> Vec<ProjectDataset> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut sets: Vec<ProjectDataset> = Vec::new();
    for r in records {
        let k = *index.entry(r.project.clone()).or_insert_with(|| {
            sets.push(ProjectDataset::new(r.project.clone(), Vec::new()));
            sets.len() - 1
        });
        sets[k].records.push(r);
    }
    sets
}

/// Outcome of [`attach_labels`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelReport {
    pub n_faulty: usize,
    /// Label ids matching no record, deduplicated, in order of appearance.
    pub unmatched: Vec<String>,
}

/// Set `faulty` to membership in `labels`. A method listed several times is
/// still just faulty; unknown ids are reported, not rejected.
pub fn attach_labels<S: AsRef<str>>(records: &mut [MethodRecord], labels: &[S]) -> LabelReport {
    let wanted: HashSet<&str> = labels.iter().map(|s| s.as_ref()).collect();
    let mut matched: HashSet<&str> = HashSet::new();
    let mut n_faulty = 0;
    for r in records.iter_mut() {
        r.faulty = wanted.contains(r.method_id.as_str());
        if r.faulty {
            n_faulty += 1;
        }
    }
    for r in records.iter() {
        if let Some(&l) = wanted.get(r.method_id.as_str()) {
            matched.insert(l);
        }
    }
    let mut unmatched = Vec::new();
    let mut reported = HashSet::new();
    for l in labels {
        let l = l.as_ref();
        if !matched.contains(l) && reported.insert(l) {
            unmatched.push(l.to_string());
        }
    }
    LabelReport { n_faulty, unmatched }
}

/// Read a fault-label file: one method id per line, blank lines ignored.
pub fn read_label_file(path: impl AsRef<Path>) -> Result<Vec<String>, DatasetError> {
    let path = path.as_ref();
    let reader = BufReader::new(open(path)?);
    let mut labels = Vec::new();
    for line in reader.lines() {
        let line = line.map_err(|e| DatasetError::io(path, e))?;
        let id = line.trim();
        if !id.is_empty() {
            labels.push(id.to_string());
        }
    }
    Ok(labels)
}

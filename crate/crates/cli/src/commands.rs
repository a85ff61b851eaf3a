use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use lowfault_core::classifier::write_rules_csv;
use lowfault_core::dataset::{
    group_by_project, load_metrics_csv, load_records, read_label_file, save_records, DatasetError,
};
use lowfault_core::evaluation::{render_table, write_reports_csv, EvaluationReport};
use lowfault_core::parser::analyze_source;
use lowfault_core::synthetic::{generate_corpus, CorpusConfig};
use lowfault_core::{
    attach_labels, classify, cross_project_eval, discretize, pipeline, within_project_eval, LowRiskClassifier,
    MethodRecord, PipelineConfig, ProjectDataset, Verdict,
};
use walkdir::WalkDir;

use crate::error::CliError;
use crate::{ConfigArgs, Mode};

fn data(err: DatasetError) -> CliError {
    CliError::Data(err.to_string())
}

fn warn(msg: impl std::fmt::Display) {
    eprintln!("warning: {msg}");
}

/// `# lowfault <version>` followed by the config as comment lines.
fn preamble(config: Option<&PipelineConfig>) -> String {
    let mut s = format!("# lowfault {}\n", env!("CARGO_PKG_VERSION"));
    if let Some(c) = config {
        s.push_str(&c.comment_lines());
    }
    s
}

/// Write to stdout; a closed pipe (`| head`) ends output quietly.
fn emit(text: &str) -> Result<(), CliError> {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(CliError::Internal(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::write(path, e))
}

fn finish(mut w: impl Write, path: &Path) -> Result<(), CliError> {
    w.flush().map_err(|e| CliError::write(path, e))
}

fn save(path: &Path, records: &[MethodRecord]) -> Result<(), CliError> {
    save_records(path, records).map_err(|e| match e {
        DatasetError::Io { .. } => CliError::write(path, e),
        other => CliError::Internal(other.to_string()),
    })
}

pub fn extract(source_dir: &Path, out: &Path, project: Option<String>) -> Result<(), CliError> {
    if !source_dir.is_dir() {
        return Err(CliError::Data(format!("{} is not a directory", source_dir.display())));
    }
    let project = project.unwrap_or_else(|| {
        source_dir
            .canonicalize()
            .ok()
            .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .unwrap_or_else(|| "project".into())
    });

    let mut files: Vec<PathBuf> = Vec::new();
    for entry in WalkDir::new(source_dir).sort_by_file_name() {
        match entry {
            Ok(e) if e.file_type().is_file() && e.path().extension().is_some_and(|x| x == "java") => {
                files.push(e.into_path())
            }
            Ok(_) => {}
            Err(e) => warn(e),
        }
    }

    let mut records = Vec::new();
    let mut failed = 0;
    for path in &files {
        let rel = path.strip_prefix(source_dir).unwrap_or(path);
        let rel = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                warn(format!("{rel}: {e}"));
                failed += 1;
                continue;
            }
        };
        match analyze_source(&text, &rel) {
            Ok(methods) => records.extend(
                methods
                    .into_iter()
                    .map(|m| MethodRecord::new(project.clone(), m.span.method_id(), m.metrics)),
            ),
            Err(e) => {
                warn(e);
                failed += 1;
            }
        }
    }

    if files.is_empty() {
        warn(format!("no .java files under {}", source_dir.display()));
    } else if failed == files.len() {
        return Err(CliError::Data(format!("none of the {} files could be processed", files.len())));
    }
    save(out, &records)?;
    eprintln!(
        "{} methods from {} of {} files",
        records.len(),
        files.len() - failed,
        files.len()
    );
    Ok(())
}

fn labelled(metrics: &Path, labels: &Path) -> Result<Vec<MethodRecord>, CliError> {
    let mut records = load_metrics_csv(metrics).map_err(data)?;
    let ids = read_label_file(labels).map_err(data)?;
    let report = attach_labels(&mut records, &ids);
    if !report.unmatched.is_empty() {
        warn(format!(
            "{} label id(s) match no method, e.g. `{}`",
            report.unmatched.len(),
            report.unmatched[0]
        ));
    }
    Ok(records)
}

pub fn label(metrics: &Path, labels: &Path, out: &Path) -> Result<(), CliError> {
    let records = labelled(metrics, labels)?;
    save(out, &records)?;
    eprintln!(
        "{} of {} methods labelled faulty",
        records.iter().filter(|r| r.faulty).count(),
        records.len()
    );
    Ok(())
}

const RULES_SHOWN: usize = 20;

fn rule_table(classifier: &LowRiskClassifier) -> String {
    let mut s = format!("{:>4}  {:>10}  {:>8}  {:>7}  antecedent\n", "rank", "confidence", "support", "matches");
    for (k, r) in classifier.rules.iter().enumerate().take(RULES_SHOWN) {
        s.push_str(&format!(
            "{:>4}  {:>10.4}  {:>8.4}  {:>7}  {}\n",
            k + 1,
            r.confidence(),
            r.support(),
            r.n_match,
            discretize::itemset_names(r.antecedent).join(", ")
        ));
    }
    if classifier.n() > RULES_SHOWN {
        s.push_str(&format!("... {} more (see `lowfault rules`)\n", classifier.n() - RULES_SHOWN));
    }
    s
}

pub fn train(dataset: &Path, labels: Option<&Path>, out: &Path, config: &PipelineConfig) -> Result<(), CliError> {
    let records = match labels {
        Some(l) => labelled(dataset, l)?,
        None => load_records(dataset).map_err(data)?,
    };
    if records.is_empty() {
        return Err(CliError::Data(format!("{} has no records", dataset.display())));
    }
    let outcome = pipeline::train(&records, config)?;
    outcome.warnings.iter().for_each(warn);
    let clf = &outcome.classifier;
    fs::write(out, clf.to_toml(Some(config))).map_err(|e| CliError::write(out, e))?;

    let summary = format!(
        "n = {} of {} candidate rules\ntraining faulty share: {:.4} ({} of {} methods)\nfaulty share among matched: {:.4} ({} of {} methods)\n",
        clf.n(),
        clf.candidate_rules,
        clf.training_faulty_share(),
        clf.training_faulty,
        clf.training_methods,
        clf.matched_faulty_share(),
        clf.training_matched_faulty,
        clf.training_matched
    );
    emit(&(summary + &rule_table(clf)))
}

fn load_model(path: &Path) -> Result<(LowRiskClassifier, Option<PipelineConfig>), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::read(path, e))?;
    LowRiskClassifier::from_toml(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn predict(dataset: &Path, model: &Path, out: &Path) -> Result<(), CliError> {
    let records = load_metrics_csv(dataset).map_err(data)?;
    let (clf, config) = load_model(model)?;

    let mut w = create(out)?;
    let io_err = |e: io::Error| CliError::write(out, e);
    w.write_all(preamble(config.as_ref()).as_bytes()).map_err(io_err)?;
    let mut csv = csv::Writer::from_writer(w);
    let csv_err = |e: csv::Error| CliError::write(out, e);
    csv.write_record(["project", "method_id", "verdict", "matched_rule"]).map_err(csv_err)?;
    let mut n_low = 0;
    for r in &records {
        let p = classify(r, &clf);
        n_low += usize::from(p.verdict == Verdict::LowFaultRisk);
        let rule = p.matched_rule.map(|k| k.to_string()).unwrap_or_default();
        csv.write_record([r.project.as_str(), &p.method_id, p.verdict.as_str(), &rule])
            .map_err(csv_err)?;
    }
    let w = csv.into_inner().map_err(|e| CliError::write(out, e.error()))?;
    finish(w, out)?;
    eprintln!("{n_low} of {} methods have low fault risk", records.len());
    Ok(())
}

fn load_projects(paths: &[PathBuf]) -> Result<Vec<ProjectDataset>, CliError> {
    let mut records = Vec::new();
    for p in paths {
        records.extend(load_records(p).map_err(data)?);
    }
    let mut seen = HashSet::new();
    for r in &records {
        if !seen.insert((r.project.as_str(), r.method_id.as_str())) {
            return Err(CliError::Data(format!(
                "method `{}` of project `{}` appears in more than one input",
                r.method_id, r.project
            )));
        }
    }
    Ok(group_by_project(records))
}

pub fn evaluate(
    mode: Mode,
    paths: &[PathBuf],
    only: &[String],
    out: &Path,
    config: &PipelineConfig,
) -> Result<(), CliError> {
    let mut projects = load_projects(paths)?;
    let mut reports: Vec<EvaluationReport> = Vec::new();
    match mode {
        Mode::Within => {
            if !only.is_empty() {
                if let Some(missing) = only.iter().find(|p| !projects.iter().any(|d| &d.project == *p)) {
                    return Err(CliError::Data(format!("no project named `{missing}` in the input")));
                }
                projects.retain(|d| only.contains(&d.project));
            }
            if projects.is_empty() {
                return Err(CliError::Data("the input has no records".into()));
            }
            for ds in &projects {
                let result = within_project_eval(ds, config)?;
                for w in &result.warnings {
                    warn(format!("{}: {w}", ds.project));
                }
                reports.extend(result.folds);
                reports.push(result.aggregate);
            }
        }
        Mode::Cross => {
            if !only.is_empty() {
                return Err(CliError::Usage("--project applies to within-project evaluation only".into()));
            }
            let result = cross_project_eval(&projects, config)?;
            result.warnings.iter().for_each(warn);
            reports = result.targets;
        }
    }
    let mut w = create(out)?;
    write_reports_csv(&mut w, &preamble(Some(config)), &reports).map_err(|e| CliError::write(out, e))?;
    finish(w, out)?;
    emit(&render_table(&reports))
}

pub fn rules(
    model: Option<&Path>,
    dataset: Option<&Path>,
    out: Option<&Path>,
    config_args: &ConfigArgs,
) -> Result<(), CliError> {
    let (rules, n, config) = match (model, dataset) {
        (Some(m), _) => {
            let (clf, config) = load_model(m)?;
            let n = clf.n();
            (clf.rules, n, config)
        }
        (None, Some(d)) => {
            let config = config_args.resolve()?;
            let records = load_records(d).map_err(data)?;
            if records.is_empty() {
                return Err(CliError::Data(format!("{} has no records", d.display())));
            }
            let outcome = pipeline::train(&records, &config)?;
            outcome.warnings.iter().for_each(warn);
            (outcome.ranked, outcome.classifier.n(), Some(config))
        }
        (None, None) => return Err(CliError::Usage("give --model or --dataset".into())),
    };
    let head = preamble(config.as_ref());
    match out {
        Some(path) => {
            let mut w = create(path)?;
            write_rules_csv(&mut w, &head, &rules, n).map_err(|e| CliError::write(path, e))?;
            finish(w, path)
        }
        None => {
            let mut buf = Vec::new();
            write_rules_csv(&mut buf, &head, &rules, n).map_err(|e| CliError::Internal(e.to_string()))?;
            emit(&String::from_utf8_lossy(&buf))
        }
    }
}

pub fn synth(out: &Path, projects: usize, seed: u64) -> Result<(), CliError> {
    if projects == 0 {
        return Err(CliError::Usage("--projects must be at least 1".into()));
    }
    let corpus = generate_corpus(&CorpusConfig {
        n_projects: projects,
        seed,
        ..Default::default()
    });
    let records: Vec<MethodRecord> = corpus.into_iter().flat_map(|p| p.dataset.records).collect();
    save(out, &records)?;
    eprintln!("{} methods in {projects} projects", records.len());
    Ok(())
}

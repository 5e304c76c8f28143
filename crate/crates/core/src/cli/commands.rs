use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::json;

use super::{CliError, ReportArgs, ReportFormat, RunArgs, SpectrogramArgs, SynthArgs};
use crate::csi_data::{
    load_csi, load_reference, load_series, save_series, write_atomic, CsiFormat, DEFAULT_SUBCARRIERS,
};
use crate::dsp::{render_png, spectrogram, Spectrogram};
use crate::error::Error;
use crate::evaluation::{build_report, EvaluationReport, ReportSet};
use crate::manifest::{Manifest, ManifestFile};
use crate::pipeline::{process_record, RecordInput, RecordOutput};
use crate::respiration::write_epochs_csv;
use crate::selection::Method;
use crate::synth::{default_profiles, subject_suite, write_suite, SubjectProfile, SuiteSpec};

type CliResult<T> = Result<T, CliError>;

fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Failed(Error::from(e).in_file(dir)))
}

fn write_text(path: &Path, text: &str) -> crate::Result<()> {
    write_atomic(path, |w| Ok(w.write_all(text.as_bytes())?))
}

/// Record id from a file name: `a.csi.csv` and `a.ndjson` both give `a`.
pub fn record_id(path: &Path) -> String {
    let name = path.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
    for suffix in [".csi.csv", ".csi.ndjson", ".csi.jsonl", ".ndjson", ".jsonl", ".csv"] {
        if let Some(stem) = name.strip_suffix(suffix) {
            return stem.to_string();
        }
    }
    name
}

pub fn cmd_synth(args: &SynthArgs) -> CliResult<Manifest> {
    if args.subjects == 0 || args.postures.is_empty() {
        return Err(CliError::Usage("need at least one subject and one posture".into()));
    }
    let defaults = default_profiles();
    let profiles: Vec<SubjectProfile> = (0..args.subjects)
        .map(|i| SubjectProfile {
            id: (i + 1).to_string(),
            ..defaults[i % defaults.len()].clone()
        })
        .collect();
    let mut suite = SuiteSpec {
        profiles,
        postures: args.postures.clone(),
        duration: args.duration,
        noise_snr_db: Some(args.snr),
        seed: args.seed,
        n_subcarriers: DEFAULT_SUBCARRIERS,
        complex: args.complex,
        ..SuiteSpec::default()
    };
    if args.noiseless {
        suite.noise_snr_db = None;
        suite.jitter_std = 0.0;
        suite.outlier_rate = 0.0;
    }
    let records = subject_suite(&suite)?;
    let manifest = write_suite(&records, &suite, &args.out.out)?;
    eprintln!("wrote {} records to {}", records.len(), args.out.out.display());
    Ok(manifest)
}

struct Job {
    id: String,
    csi: PathBuf,
    reference: Option<PathBuf>,
}

fn dataset_jobs(dir: &Path) -> CliResult<Vec<Job>> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::Failed(Error::from(e).in_file(dir)))?;
    let mut jobs = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| CliError::Failed(Error::from(e).in_file(dir)))?.path();
        let name = path.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
        if name.ends_with(".csi.csv") || name.ends_with(".csi.ndjson") || name.ends_with(".csi.jsonl") {
            let id = record_id(&path);
            let r = dir.join(format!("{id}.ref.csv"));
            jobs.push(Job {
                id,
                csi: path,
                reference: r.is_file().then_some(r),
            });
        }
    }
    jobs.sort_by(|a, b| a.id.cmp(&b.id));
    if jobs.is_empty() {
        return Err(CliError::Failed(Error::InvalidInput(format!(
            "no *.csi.csv files in {}",
            dir.display()
        ))));
    }
    Ok(jobs)
}

fn run_jobs(args: &RunArgs) -> CliResult<Vec<Job>> {
    if args.dataset.is_some() && !args.csi.is_empty() {
        return Err(CliError::Usage("use either --dataset or --csi, not both".into()));
    }
    let jobs = match &args.dataset {
        Some(dir) => {
            if !args.refs.is_empty() {
                return Err(CliError::Usage("--ref cannot be combined with --dataset".into()));
            }
            dataset_jobs(dir)?
        }
        None => {
            if args.csi.is_empty() {
                return Err(CliError::Usage("give --csi files or a --dataset directory".into()));
            }
            if !args.refs.is_empty() && args.refs.len() != args.csi.len() {
                return Err(CliError::Usage(format!(
                    "{} --ref files for {} --csi files",
                    args.refs.len(),
                    args.csi.len()
                )));
            }
            args.csi
                .iter()
                .enumerate()
                .map(|(i, p)| Job {
                    id: record_id(p),
                    csi: p.clone(),
                    reference: args.refs.get(i).cloned(),
                })
                .collect()
        }
    };
    let mut ids: Vec<&str> = jobs.iter().map(|j| j.id.as_str()).collect();
    ids.sort_unstable();
    if ids.windows(2).any(|w| w[0] == w[1]) {
        return Err(CliError::Usage("record ids (file stems) must be unique".into()));
    }
    if Method::from(args.method) == Method::Correlation && jobs.iter().all(|j| j.reference.is_none()) {
        return Err(CliError::Usage("--method correlation requires --ref".into()));
    }
    Ok(jobs)
}

fn process_job(job: &Job, args: &RunArgs) -> crate::Result<RecordOutput> {
    let record = load_csi(&job.csi, CsiFormat::from_path(&job.csi))?;
    let reference = job
        .reference
        .as_ref()
        .map(|p| load_reference(p, args.ref_rate))
        .transpose()?;
    let input = RecordInput {
        id: job.id.clone(),
        record,
        reference,
    };
    process_record(&input, &args.pipeline_config())
}

fn write_record(out: &RecordOutput, dir: &Path, args: &RunArgs) -> crate::Result<Vec<String>> {
    let id = &out.id;
    let mut files = Vec::new();
    let waveform = format!("{id}.waveform.csv");
    save_series(&out.extraction.signal, dir.join(&waveform))?;
    files.push(waveform.clone());

    let epochs = format!("{id}.epochs.csv");
    write_atomic(dir.join(&epochs), |w| write_epochs_csv(&out.epochs, w))?;
    files.push(epochs);

    let extraction = format!("{id}.extraction.json");
    let mut text = serde_json::to_string_pretty(&out.extraction.summary(waveform))?;
    text.push('\n');
    write_text(&dir.join(&extraction), &text)?;
    files.push(extraction);

    if let (Some(r), Some(re)) = (&out.reference, &out.reference_epochs) {
        let name = format!("{id}.reference.csv");
        save_series(r, dir.join(&name))?;
        files.push(name);
        let name = format!("{id}.reference_epochs.csv");
        write_atomic(dir.join(&name), |w| write_epochs_csv(re, w))?;
        files.push(name);
    }
    if let Some(report) = &out.report {
        let name = format!("{id}.report.json");
        let mut text = serde_json::to_string_pretty(report)?;
        text.push('\n');
        write_text(&dir.join(&name), &text)?;
        files.push(name);
        if args.format.contains(&ReportFormat::Text) {
            let name = format!("{id}.report.txt");
            write_text(&dir.join(&name), &report.render_text())?;
            files.push(name);
        }
    }
    if args.plot {
        let mut panels: Vec<Spectrogram> = vec![spectrogram(&out.extraction.signal, 30.0, 0.5)?];
        if let Some(r) = &out.reference {
            panels.push(spectrogram(r, 30.0, 0.5)?);
        }
        let name = format!("{id}.spectrogram.png");
        render_png(&panels.iter().collect::<Vec<_>>(), Some(1.0), 4, &dir.join(&name))?;
        files.push(name);
    }
    Ok(files)
}

fn write_report_set(set: &ReportSet, formats: &[ReportFormat], dir: &Path) -> crate::Result<Vec<String>> {
    let mut files = Vec::new();
    if formats.contains(&ReportFormat::Json) {
        let mut text = set.to_json()?;
        text.push('\n');
        write_text(&dir.join("report.json"), &text)?;
        files.push("report.json".to_string());
    }
    if formats.contains(&ReportFormat::Text) {
        write_text(&dir.join("report.txt"), &set.render_text())?;
        files.push("report.txt".to_string());
    }
    if formats.contains(&ReportFormat::Csv) {
        write_atomic(dir.join("histogram.csv"), |w| set.write_histogram_csv(w))?;
        files.push("histogram.csv".to_string());
    }
    Ok(files)
}

pub struct RunOutcome {
    pub reports: Option<ReportSet>,
    pub manifest: Manifest,
    pub failures: Vec<(String, String)>,
}

/// Processes every record, writes per-record and aggregate outputs plus a
/// manifest, and fails (after writing what succeeded) if any record failed.
pub fn cmd_run(args: &RunArgs) -> CliResult<RunOutcome> {
    let config = args.pipeline_config();
    config
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let jobs = run_jobs(args)?;
    let dir = &args.out.out;
    create_dir(dir)?;

    let results: Vec<crate::Result<(RecordOutput, Vec<String>)>> = jobs
        .par_iter()
        .map(|job| {
            let out = process_job(job, args)?;
            let files = write_record(&out, dir, args)?;
            Ok((out, files))
        })
        .collect();

    let mut outputs = Vec::new();
    let mut reports: Vec<EvaluationReport> = Vec::new();
    let mut failures = Vec::new();
    let mut first_error: Option<Error> = None;
    for (job, result) in jobs.iter().zip(results) {
        match result {
            Ok((out, files)) => {
                outputs.extend(files);
                reports.extend(out.report);
            }
            Err(e) => {
                eprintln!("wifi-resp: record {}: {e}", job.id);
                failures.push((job.id.clone(), e.to_string()));
                first_error.get_or_insert(e);
            }
        }
    }

    let set = if reports.is_empty() {
        None
    } else {
        let set = build_report(reports)?;
        outputs.extend(write_report_set(&set, &args.format, dir)?);
        if args.format.contains(&ReportFormat::Text) {
            print!("{}", set.render_text());
        }
        Some(set)
    };

    let mut manifest = Manifest::new(
        "run",
        json!({
            "pipeline": config,
            "formats": args.format,
            "plot": args.plot,
            "ref_rate": args.ref_rate,
            "failures": failures,
        }),
    );
    for job in &jobs {
        let csi_name = job.csi.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
        if let Ok(f) = ManifestFile::hash(&job.csi, csi_name) {
            manifest.inputs.push(f);
        }
        if let Some(r) = &job.reference {
            let name = r.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
            if let Ok(f) = ManifestFile::hash(r, name) {
                manifest.inputs.push(f);
            }
        }
    }
    for name in &outputs {
        manifest.outputs.push(ManifestFile::hash(dir.join(name), name.clone())?);
    }
    manifest.save(dir.join("manifest.json"))?;

    match first_error {
        Some(e) => Err(CliError::Failed(e)),
        None => Ok(RunOutcome {
            reports: set,
            manifest,
            failures,
        }),
    }
}

pub fn cmd_spectrogram(args: &SpectrogramArgs) -> CliResult<Vec<Spectrogram>> {
    if !(0.0..1.0).contains(&args.overlap) {
        return Err(CliError::Usage(format!("--overlap must lie in [0, 1), got {}", args.overlap)));
    }
    let dir = &args.out.out;
    create_dir(dir)?;
    let mut out = Vec::new();
    for path in &args.inputs {
        let series = load_series(path)?;
        let s = spectrogram(&series, args.window, args.overlap).map_err(|e| e.in_file(path))?;
        let stem = path
            .file_name()
            .map_or_else(String::new, |n| n.to_string_lossy().into_owned());
        let stem = stem.strip_suffix(".csv").unwrap_or(&stem).to_string();
        write_atomic(dir.join(format!("{stem}.spectrogram.csv")), |w| s.write_csv(w))?;
        out.push(s);
    }
    if !args.no_png {
        render_png(
            &out.iter().collect::<Vec<_>>(),
            Some(args.max_freq),
            args.scale,
            &dir.join("spectrogram.png"),
        )?;
    }
    Ok(out)
}

fn report_files(inputs: &[PathBuf]) -> CliResult<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| CliError::Failed(Error::from(e).in_file(p)))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.to_string_lossy().ends_with(".report.json"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    if files.is_empty() {
        return Err(CliError::Failed(Error::InvalidInput("no report files found".into())));
    }
    Ok(files)
}

/// Rebuilds tables from per-record reports or earlier report sets.
pub fn cmd_report(args: &ReportArgs) -> CliResult<ReportSet> {
    let mut records: Vec<EvaluationReport> = Vec::new();
    for path in report_files(&args.inputs)? {
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::Failed(Error::from(e).in_file(&path)))?;
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::from(e).in_file(&path))?;
        if value.get("records").is_some() {
            records.extend(ReportSet::from_json(&text).map_err(|e| e.in_file(&path))?.records);
        } else {
            records.push(serde_json::from_value(value).map_err(|e| Error::from(e).in_file(&path))?);
        }
    }
    let set = build_report(records)?;
    let dir = &args.out.out;
    create_dir(dir)?;
    write_report_set(&set, &args.format, dir)?;
    if args.format.contains(&ReportFormat::Text) {
        print!("{}", set.render_text());
    }
    Ok(set)
}

use std::fs;
use std::path::{Path, PathBuf};

use crosscheck_core::io::{build_report, schedule_document, serialize_explanation, serialize_schedule, to_canonical_string};
use crosscheck_core::{parse_plan, run_scheduler, ExplainError, Issue, Plan, PlanError, Strictness};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Plan { path: PathBuf, source: PlanError },
    #[error("--set {0}: expected KEY=VALUE")]
    Override(String),
    #[error(transparent)]
    Explain(#[from] ExplainError),
    #[error("--step {step} is past the last step ({last})")]
    Step { step: usize, last: usize },
}

/// Reads a plan file, applying `KEY=VALUE` config overrides before
/// validation. Values are parsed as JSON and fall back to strings.
pub fn load_plan(path: &Path, overrides: &[String], strictness: Strictness) -> Result<(Plan, Vec<Issue>), InputError> {
    let io_err = |source| InputError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut bytes = fs::read(path).map_err(io_err)?;
    if !overrides.is_empty() {
        let plan_err = |source| InputError::Plan {
            path: path.to_path_buf(),
            source,
        };
        let mut doc: serde_json::Value =
            serde_json::from_slice(&bytes).map_err(|e| plan_err(PlanError::single("$", e.to_string())))?;
        let Some(root) = doc.as_object_mut() else {
            return Err(plan_err(PlanError::single("$", "expected an object")));
        };
        let config = root
            .entry("config")
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
        for item in overrides {
            let (key, raw) = item.split_once('=').ok_or_else(|| InputError::Override(item.clone()))?;
            let value = serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
            match config.as_object_mut() {
                Some(obj) => {
                    obj.insert(key.to_string(), value);
                }
                None => return Err(plan_err(PlanError::single("$.config", "expected an object"))),
            }
        }
        bytes = serde_json::to_vec(&doc).expect("JSON values serialize");
    }
    let parsed = parse_plan(&bytes, strictness).map_err(|source| InputError::Plan {
        path: path.to_path_buf(),
        source,
    })?;
    Ok((parsed.plan, parsed.warnings))
}

/// `foo.plan.json` -> `foo`, `foo.json` -> `foo`.
fn stem(path: &Path) -> String {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    for suffix in [".plan.json", ".json"] {
        if let Some(s) = name.strip_suffix(suffix) {
            return s.to_string();
        }
    }
    name
}

#[derive(Clone, Debug, Default)]
pub struct RunArgs {
    pub plan: PathBuf,
    pub out: Option<PathBuf>,
    pub activity: Option<String>,
    pub step: Option<usize>,
    pub overrides: Vec<String>,
    pub strictness: Strictness,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub complete: bool,
    pub schedule_path: PathBuf,
    pub explanation_path: PathBuf,
    /// Canonical partial schedule after `--step`, when requested.
    pub step_dump: Option<String>,
    pub warnings: Vec<Issue>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.complete {
            0
        } else {
            2
        }
    }
}

pub fn run_command(args: &RunArgs) -> Result<RunOutcome, InputError> {
    let (plan, warnings) = load_plan(&args.plan, &args.overrides, args.strictness)?;
    let schedule = run_scheduler(&plan);
    tracing::info!(
        activities = plan.len(),
        failed = schedule.failed().count(),
        "scheduled {}",
        args.plan.display()
    );
    let step_dump = match args.step {
        Some(k) if k > plan.len() => {
            return Err(InputError::Step {
                step: k,
                last: plan.len(),
            })
        }
        Some(k) => Some(to_canonical_string(&schedule_document(&schedule.at_step(k), plan.config()))),
        None => None,
    };
    let report = build_report(&plan, &schedule, args.activity.as_deref())?;

    let dir = match &args.out {
        Some(dir) => dir.clone(),
        None => args.plan.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let write = |name: String, text: String| -> Result<PathBuf, InputError> {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|source| InputError::Io {
            path: path.clone(),
            source,
        })?;
        Ok(path)
    };
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).map_err(|source| InputError::Io {
            path: dir.clone(),
            source,
        })?;
    }
    let base = stem(&args.plan);
    let schedule_path = write(format!("{base}.sched.json"), serialize_schedule(&schedule, plan.config()))?;
    let explanation_path = write(format!("{base}.explain.json"), serialize_explanation(&report))?;
    Ok(RunOutcome {
        complete: schedule.is_complete(),
        schedule_path,
        explanation_path,
        step_dump,
        warnings,
    })
}

#[derive(Clone, Debug, Default)]
pub struct ExplainArgs {
    pub plan: PathBuf,
    pub activity: Option<String>,
    pub overrides: Vec<String>,
    pub strictness: Strictness,
}

/// Explanation report text for one activity, or all failed ones.
pub fn explain_command(args: &ExplainArgs) -> Result<String, InputError> {
    let (plan, _) = load_plan(&args.plan, &args.overrides, args.strictness)?;
    let schedule = run_scheduler(&plan);
    let report = build_report(&plan, &schedule, args.activity.as_deref())?;
    Ok(serialize_explanation(&report))
}

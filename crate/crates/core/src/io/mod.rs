//! Versioned JSON documents for plans, schedules and explanation reports.

mod canonical;
mod report;

use serde::{Deserialize, Serialize};

use crate::error::{Issue, PlanError};
use crate::model::{Activity, Plan, PlanConfig};

pub use canonical::{canonical_value, to_canonical_string};
pub use report::{
    build_report, schedule_document, serialize_explanation, serialize_schedule, ExplanationReport, PlacedEntry,
    ProfileDigest, ScheduleDocument, StepSummary,
};

pub const FORMAT_VERSION: u32 = 1;

/// On-disk plan: config plus activities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanDocument {
    pub format_version: u32,
    #[serde(default)]
    pub config: PlanConfig,
    #[serde(default)]
    pub activities: Vec<Activity>,
}

impl PlanDocument {
    pub fn from_plan(plan: &Plan) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            config: plan.config().clone(),
            activities: plan.activities().to_vec(),
        }
    }

    pub fn into_plan(self) -> Result<Plan, PlanError> {
        Plan::new(self.config, self.activities)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Strictness {
    /// Unknown fields are errors.
    #[default]
    Strict,
    /// Unknown fields are reported as warnings and otherwise ignored.
    Lenient,
}

#[derive(Clone, Debug)]
pub struct ParsedPlan {
    pub plan: Plan,
    pub warnings: Vec<Issue>,
}

fn json_path(serde_path: &str) -> String {
    if serde_path == "." || serde_path.is_empty() {
        "$".to_string()
    } else {
        format!("$.{serde_path}")
    }
}

fn ignored_path(path: &serde_ignored::Path) -> String {
    use serde_ignored::Path;
    match path {
        Path::Root => "$".to_string(),
        Path::Seq { parent, index } => format!("{}[{index}]", ignored_path(parent)),
        Path::Map { parent, key } => format!("{}.{key}", ignored_path(parent)),
        Path::Some { parent } | Path::NewtypeStruct { parent } | Path::NewtypeVariant { parent } => {
            ignored_path(parent)
        }
    }
}

/// Parses and validates a plan document.
pub fn parse_plan(bytes: &[u8], strictness: Strictness) -> Result<ParsedPlan, PlanError> {
    let mut unknown = Vec::new();
    let doc: PlanDocument = {
        let mut json = serde_json::Deserializer::from_slice(bytes);
        let mut record = |p: serde_ignored::Path| unknown.push(ignored_path(&p));
        let de = serde_ignored::Deserializer::new(&mut json, &mut record);
        let doc = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = json_path(&e.path().to_string());
            PlanError::single(path, e.into_inner().to_string())
        })?;
        json.end().map_err(|e| PlanError::single("$", e.to_string()))?;
        doc
    };

    let unknown: Vec<Issue> = unknown
        .into_iter()
        .map(|path| Issue::new(path, "unknown field"))
        .collect();
    let mut issues = Vec::new();
    if strictness == Strictness::Strict {
        issues.extend(unknown.iter().cloned());
    }
    if doc.format_version != FORMAT_VERSION {
        issues.push(Issue::new(
            "$.format_version",
            format!("unsupported format version {} (expected {FORMAT_VERSION})", doc.format_version),
        ));
    }
    let plan = match doc.into_plan() {
        Ok(plan) if issues.is_empty() => plan,
        Ok(_) => return Err(PlanError { issues }),
        Err(e) => {
            issues.extend(e.issues);
            return Err(PlanError { issues });
        }
    };
    let warnings = if strictness == Strictness::Lenient { unknown } else { Vec::new() };
    Ok(ParsedPlan { plan, warnings })
}

/// Canonical `.plan.json` text.
pub fn serialize_plan(plan: &Plan) -> String {
    to_canonical_string(&PlanDocument::from_plan(plan))
}

/// Parses, validates and re-serializes plan text.
pub fn canonicalize_plan(bytes: &[u8], strictness: Strictness) -> Result<String, PlanError> {
    parse_plan(bytes, strictness).map(|p| serialize_plan(&p.plan))
}

mod common;

use common::*;
use crosscheck_core::io::{build_report, serialize_explanation, serialize_schedule};
use crosscheck_core::{parse_plan, run_scheduler, serialize_plan, Strictness};

const SCENARIOS: [&str; 6] = ["uhf_window", "dependency_resource", "state_requirement", "low_energy", "peak_power", "preheat_operability"];

#[test]
fn plan_files_round_trip() {
    for name in ["desk"].into_iter().chain(SCENARIOS) {
        let plan = load_plan(name);
        let text = serialize_plan(&plan);
        let again = parse_plan(text.as_bytes(), Strictness::Strict).unwrap().plan;
        assert_eq!(plan, again, "{name}");
        assert_eq!(text, serialize_plan(&again), "{name}");
    }
}

#[test]
fn desk_schedule_matches_golden() {
    let plan = load_plan("desk");
    let text = serialize_schedule(&run_scheduler(&plan), plan.config());
    assert!(check_golden("desk.sched.json", &text));
}

#[test]
fn explanations_match_goldens() {
    for name in SCENARIOS {
        let plan = load_plan(name);
        let schedule = run_scheduler(&plan);
        let report = build_report(&plan, &schedule, None).unwrap();
        assert!(!report.explanations.is_empty(), "{name}");
        assert!(check_golden(&format!("{name}.explain.json"), &serialize_explanation(&report)), "{name}");
    }
}

#[test]
fn lenient_parse_reports_unknown_fields() {
    let bytes = std::fs::read(data_dir().join("desk.plan.json")).unwrap();
    let mut doc: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
    doc["activities"][0]["colour"] = serde_json::json!("red");
    let bytes = serde_json::to_vec(&doc).unwrap();
    let err = parse_plan(&bytes, Strictness::Strict).unwrap_err();
    assert!(err.issues.iter().any(|i| i.path.contains("colour")));
    let parsed = parse_plan(&bytes, Strictness::Lenient).unwrap();
    assert_eq!(parsed.warnings.len(), 1);
    assert_eq!(parsed.plan, load_plan("desk"));
}

#[test]
fn every_tag_is_documented() {
    use crosscheck_core::explain::ConsumerKind;
    use crosscheck_core::scheduler::GeneratedKind;
    use crosscheck_core::{ConstraintKind, FailurePhase, Phase2Reason, UhfMode};

    let doc = std::fs::read_to_string(std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/tags.md")).unwrap();
    let mut tags: Vec<String> = Vec::new();
    tags.extend(ConstraintKind::ALL.iter().map(|k| k.tag().to_string()));
    tags.extend(Phase2Reason::ALL.iter().map(|r| r.tag().to_string()));
    tags.extend([FailurePhase::Phase1, FailurePhase::Phase2].iter().map(|p| p.tag().to_string()));
    let serde_tags = [
        serde_json::to_value(GeneratedKind::Preheat),
        serde_json::to_value(GeneratedKind::Maintenance),
        serde_json::to_value(GeneratedKind::Wakeup),
        serde_json::to_value(GeneratedKind::Awake),
        serde_json::to_value(GeneratedKind::Shutdown),
        serde_json::to_value(ConsumerKind::Activity),
        serde_json::to_value(ConsumerKind::Asleep),
        serde_json::to_value(UhfMode::RequiredConcurrent),
        serde_json::to_value(UhfMode::ForbiddenConcurrent),
    ];
    tags.extend(serde_tags.into_iter().map(|v| v.unwrap().as_str().unwrap().to_string()));
    tags.extend(["scheduled", "failed_phase1", "failed_phase2"].map(String::from));
    for tag in tags {
        assert!(doc.contains(&format!("| `{tag}` |")), "{tag} missing from docs/tags.md");
    }
    for k in ConstraintKind::ALL {
        assert_eq!(serde_json::to_value(k).unwrap(), k.tag());
    }
    for r in Phase2Reason::ALL {
        assert_eq!(serde_json::to_value(r).unwrap(), r.tag());
    }
}

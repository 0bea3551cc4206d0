use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use crosscheck_core::io::{build_report, serialize_explanation};
use crosscheck_core::{explain, parse_plan, run_scheduler, serialize_plan, ExplainError, Explanation, Plan, Schedule, Strictness};

/// One scheduled revision of a session's plan. Everything derived from the
/// plan lives here, so replacing the snapshot invalidates it all at once.
#[derive(Debug)]
pub struct Snapshot {
    pub revision: u64,
    pub plan: Plan,
    pub schedule: Schedule,
    explanations: Mutex<HashMap<String, Arc<Explanation>>>,
    report: OnceLock<String>,
}

impl Snapshot {
    pub fn build(plan: Plan, revision: u64) -> Self {
        let schedule = run_scheduler(&plan);
        Self {
            revision,
            plan,
            schedule,
            explanations: Mutex::new(HashMap::new()),
            report: OnceLock::new(),
        }
    }

    /// Explanation for a failed activity, computed on first request.
    pub fn explanation(&self, id: &str) -> Result<Arc<Explanation>, ExplainError> {
        if let Some(e) = self.explanations.lock().unwrap().get(id) {
            return Ok(e.clone());
        }
        if self.schedule.failed().all(|r| r.activity != id) {
            return Err(match self.plan.get(id) {
                None => ExplainError::UnknownActivity(id.to_string()),
                Some(_) => ExplainError::NotFailed(id.to_string()),
            });
        }
        let e = Arc::new(explain(&self.plan, id)?);
        self.explanations.lock().unwrap().insert(id.to_string(), e.clone());
        Ok(e)
    }

    pub fn cached_explanations(&self) -> usize {
        self.explanations.lock().unwrap().len()
    }

    /// Full `.explain.json` text, as `crosscheck run` writes it.
    pub fn report(&self) -> Result<String, ExplainError> {
        if let Some(r) = self.report.get() {
            return Ok(r.clone());
        }
        let text = serialize_explanation(&build_report(&self.plan, &self.schedule, None)?);
        Ok(self.report.get_or_init(|| text).clone())
    }
}

#[derive(Debug)]
pub struct Session {
    pub id: String,
    /// Held for the whole edit-and-reschedule of a PATCH.
    pub writer: tokio::sync::Mutex<()>,
    current: RwLock<Arc<Snapshot>>,
}

impl Session {
    fn new(id: String, snapshot: Snapshot) -> Self {
        Self {
            id,
            writer: tokio::sync::Mutex::new(()),
            current: RwLock::new(Arc::new(snapshot)),
        }
    }

    /// Last completed revision.
    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.current.read().unwrap().clone()
    }

    pub fn replace(&self, snapshot: Arc<Snapshot>) {
        *self.current.write().unwrap() = snapshot;
    }
}

/// In-memory sessions, optionally mirrored to `<persist>/<id>/rev-<n>.plan.json`.
#[derive(Debug, Default)]
pub struct Store {
    sessions: RwLock<HashMap<String, Arc<Session>>>,
    persist: Option<PathBuf>,
}

impl Store {
    pub fn new() -> Self {
        Self::default()
    }

    /// Store backed by `dir`; sessions already saved there are reloaded at
    /// their latest revision.
    pub fn persistent(dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let store = Self {
            sessions: RwLock::default(),
            persist: Some(dir.clone()),
        };
        for entry in fs::read_dir(&dir)? {
            let entry = entry?;
            if !entry.file_type()?.is_dir() {
                continue;
            }
            let id = entry.file_name().to_string_lossy().into_owned();
            match latest_revision(&entry.path()) {
                Ok(Some((revision, plan))) => {
                    tracing::info!(session = %id, revision, "reloaded session");
                    store.insert(Session::new(id, Snapshot::build(plan, revision)));
                }
                Ok(None) => {}
                Err(e) => tracing::warn!(session = %id, "skipping saved session: {e}"),
            }
        }
        Ok(store)
    }

    fn insert(&self, session: Session) -> Arc<Session> {
        let session = Arc::new(session);
        self.sessions
            .write()
            .unwrap()
            .insert(session.id.clone(), session.clone());
        session
    }

    pub fn get(&self, id: &str) -> Option<Arc<Session>> {
        self.sessions.read().unwrap().get(id).cloned()
    }

    pub fn len(&self) -> usize {
        self.sessions.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn create(&self, snapshot: Snapshot) -> std::io::Result<Arc<Session>> {
        let id = uuid::Uuid::new_v4().simple().to_string();
        self.save(&id, &snapshot)?;
        Ok(self.insert(Session::new(id, snapshot)))
    }

    pub fn save(&self, id: &str, snapshot: &Snapshot) -> std::io::Result<()> {
        let Some(dir) = &self.persist else {
            return Ok(());
        };
        let dir = dir.join(id);
        fs::create_dir_all(&dir)?;
        fs::write(
            dir.join(format!("rev-{}.plan.json", snapshot.revision)),
            serialize_plan(&snapshot.plan),
        )
    }
}

fn latest_revision(dir: &Path) -> std::io::Result<Option<(u64, Plan)>> {
    let mut best: Option<(u64, PathBuf)> = None;
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let Some(rev) = name
            .strip_prefix("rev-")
            .and_then(|r| r.strip_suffix(".plan.json"))
            .and_then(|r| r.parse::<u64>().ok())
        else {
            continue;
        };
        if best.as_ref().is_none_or(|(b, _)| rev > *b) {
            best = Some((rev, path));
        }
    }
    let Some((rev, path)) = best else {
        return Ok(None);
    };
    let plan = parse_plan(&fs::read(&path)?, Strictness::Strict)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()))?
        .plan;
    Ok(Some((rev, plan)))
}

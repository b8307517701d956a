//! Background jobs for ingest and training, and the per-artifact write
//! claims that keep two writers off the same id.

use std::collections::{BTreeMap, HashSet};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use tokio::sync::Notify;

use crate::error::{ApiError, ErrorBody};
use crate::provenance::ArtifactKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobStatus {
    Running,
    Succeeded,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobView {
    pub job_id: String,
    pub kind: String,
    pub artifact_kind: ArtifactKind,
    pub artifact_id: String,
    pub status: JobStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorBody>,
}

struct Job {
    view: Mutex<JobView>,
    done: Notify,
}

type Key = (ArtifactKind, String);

#[derive(Default)]
pub struct Jobs {
    next: AtomicU64,
    jobs: Mutex<BTreeMap<String, Arc<Job>>>,
    claimed: Arc<Mutex<HashSet<Key>>>,
}

/// Exclusive right to write one artifact id; released on drop.
pub struct Claim {
    key: Key,
    claimed: Arc<Mutex<HashSet<Key>>>,
}

impl Drop for Claim {
    fn drop(&mut self) {
        self.claimed.lock().expect("claims").remove(&self.key);
    }
}

pub const MAX_WAIT_MS: u64 = 30_000;

impl Jobs {
    pub fn claim(&self, kind: ArtifactKind, id: &str) -> Result<Claim, ApiError> {
        let key = (kind, id.to_owned());
        if !self.claimed.lock().expect("claims").insert(key.clone()) {
            return Err(ApiError::conflict(
                "job_in_progress",
                format!("{} {id:?} is already being written", kind.as_str()),
            ));
        }
        Ok(Claim {
            key,
            claimed: Arc::clone(&self.claimed),
        })
    }

    /// Runs `work` on the blocking pool while holding the artifact's claim.
    pub fn submit<F>(&self, kind: &str, claim: Claim, work: F) -> JobView
    where
        F: FnOnce() -> Result<serde_json::Value, ApiError> + Send + 'static,
    {
        let n = self.next.fetch_add(1, Ordering::SeqCst) + 1;
        let view = JobView {
            job_id: format!("job-{n}"),
            kind: kind.to_owned(),
            artifact_kind: claim.key.0,
            artifact_id: claim.key.1.clone(),
            status: JobStatus::Running,
            result: None,
            error: None,
        };
        let job = Arc::new(Job {
            view: Mutex::new(view.clone()),
            done: Notify::new(),
        });
        self.jobs
            .lock()
            .expect("jobs")
            .insert(view.job_id.clone(), Arc::clone(&job));
        let handle = tokio::task::spawn_blocking(work);
        tokio::spawn(async move {
            let outcome = match handle.await {
                Ok(r) => r,
                Err(e) => Err(ApiError::internal(format!("job panicked: {e}"))),
            };
            // Release before announcing completion so a client that saw
            // "succeeded" can immediately write the same id again.
            drop(claim);
            {
                let mut v = job.view.lock().expect("job");
                match outcome {
                    Ok(result) => {
                        v.status = JobStatus::Succeeded;
                        v.result = Some(result);
                    }
                    Err(e) => {
                        log::warn!("{} failed: {e}", v.job_id);
                        v.status = JobStatus::Failed;
                        v.error = Some(e.body);
                    }
                }
            }
            job.done.notify_waiters();
        });
        view
    }

    /// Current view of a job, waiting up to `wait` for it to finish.
    pub async fn get(&self, id: &str, wait: Duration) -> Option<JobView> {
        let job = self.jobs.lock().expect("jobs").get(id).cloned()?;
        let notified = job.done.notified();
        tokio::pin!(notified);
        notified.as_mut().enable();
        if job.view.lock().expect("job").status == JobStatus::Running && !wait.is_zero() {
            let _ = tokio::time::timeout(wait, notified).await;
        }
        let view = job.view.lock().expect("job").clone();
        Some(view)
    }
}

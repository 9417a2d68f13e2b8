//! File-backed session snapshots, one JSON file per revision.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, MutexGuard};

use thiserror::Error;

use routerisk_core::sequential::{SequentialSession, SessionError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StoreError {
    #[error("no session {0}")]
    NotFound(String),
    #[error("stale revision {expected}; the session is at revision {current}")]
    Stale { expected: u64, current: u64 },
    #[error("session {0} already exists")]
    Exists(String),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error("storage: {0}")]
    Io(String),
    #[error("unreadable snapshot {path}: {message}")]
    Corrupt { path: String, message: String },
}

impl From<io::Error> for StoreError {
    fn from(e: io::Error) -> Self {
        StoreError::Io(e.to_string())
    }
}

/// Session ids double as file name stems.
pub fn valid_session_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_')
}

fn file_name(id: &str, revision: u64) -> String {
    format!("{id}.r{revision:010}.json")
}

fn parse_file_name(name: &str) -> Option<(&str, u64)> {
    let stem = name.strip_suffix(".json")?;
    let (id, rev) = stem.rsplit_once(".r")?;
    if !valid_session_id(id) || rev.len() != 10 {
        return None;
    }
    Some((id, rev.parse().ok()?))
}

/// Parses one persisted snapshot.
pub fn decode_snapshot(bytes: &[u8]) -> Result<SequentialSession, String> {
    let s: SequentialSession = serde_json::from_slice(bytes).map_err(|e| e.to_string())?;
    if !valid_session_id(&s.session_id) {
        return Err(format!("invalid session id {:?}", s.session_id));
    }
    if s.revision == 0 {
        return Err("revision must be at least 1".into());
    }
    Ok(s)
}

/// Serializes one snapshot in the on-disk form.
pub fn encode_snapshot(session: &SequentialSession) -> String {
    serde_json::to_string_pretty(session).expect("sessions serialize")
}

#[derive(Debug)]
pub struct SessionStore {
    dir: PathBuf,
    latest: Mutex<HashMap<String, SequentialSession>>,
}

impl SessionStore {
    /// Opens `dir`, creating it if needed, and loads the newest revision of
    /// every session found there.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let mut latest: HashMap<String, SequentialSession> = HashMap::new();
        for entry in fs::read_dir(&dir)? {
            let entry = entry?;
            let name = entry.file_name();
            let Some(name) = name.to_str() else { continue };
            if name.starts_with('.') && name.ends_with(".tmp") {
                // leftover from an interrupted write that never got linked
                let _ = fs::remove_file(entry.path());
                continue;
            }
            let Some((id, rev)) = parse_file_name(name) else { continue };
            if latest.get(id).is_some_and(|s| s.revision >= rev) {
                continue;
            }
            let path = entry.path();
            let session = decode_snapshot(&fs::read(&path)?).map_err(|message| StoreError::Corrupt {
                path: path.display().to_string(),
                message,
            })?;
            if session.session_id != id || session.revision != rev {
                return Err(StoreError::Corrupt {
                    path: path.display().to_string(),
                    message: format!("contents say {} r{}", session.session_id, session.revision),
                });
            }
            latest.insert(id.to_string(), session);
        }
        Ok(Self {
            dir,
            latest: Mutex::new(latest),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn lock(&self) -> MutexGuard<'_, HashMap<String, SequentialSession>> {
        self.latest.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn get(&self, id: &str) -> Option<SequentialSession> {
        self.lock().get(id).cloned()
    }

    pub fn len(&self) -> usize {
        self.lock().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Persisted revisions of one session, ascending.
    pub fn revisions(&self, id: &str) -> Result<Vec<u64>, StoreError> {
        let mut out = Vec::new();
        for entry in fs::read_dir(&self.dir)? {
            let name = entry?.file_name();
            if let Some((sid, rev)) = name.to_str().and_then(parse_file_name) {
                if sid == id {
                    out.push(rev);
                }
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    pub fn create(&self, session: SequentialSession) -> Result<SequentialSession, StoreError> {
        let mut map = self.lock();
        if map.contains_key(&session.session_id) {
            return Err(StoreError::Exists(session.session_id));
        }
        self.persist(&session).map_err(|e| match e {
            StoreError::Stale { .. } => StoreError::Exists(session.session_id.clone()),
            other => other,
        })?;
        map.insert(session.session_id.clone(), session.clone());
        Ok(session)
    }

    /// Applies `step` to the session at `expected` revision and commits the
    /// result. Fails with `Stale` when another writer got there first.
    pub fn advance<F>(&self, id: &str, expected: u64, step: F) -> Result<SequentialSession, StoreError>
    where
        F: FnOnce(&SequentialSession) -> Result<SequentialSession, SessionError>,
    {
        let mut map = self.lock();
        let current = map.get(id).ok_or_else(|| StoreError::NotFound(id.to_string()))?;
        if current.revision != expected {
            return Err(StoreError::Stale {
                expected,
                current: current.revision,
            });
        }
        let next = step(current)?;
        if next.revision <= current.revision || next.session_id != current.session_id {
            return Err(StoreError::Io(format!(
                "refusing to store revision {} over {}",
                next.revision, current.revision
            )));
        }
        self.persist(&next)?;
        map.insert(id.to_string(), next.clone());
        Ok(next)
    }

    /// Writes to a temporary file, then hard-links it into place so an
    /// existing revision is never overwritten.
    fn persist(&self, session: &SequentialSession) -> Result<(), StoreError> {
        let bytes = encode_snapshot(session).into_bytes();
        let tmp = self.dir.join(format!(
            ".{}.{}.tmp",
            session.session_id,
            uuid::Uuid::new_v4().simple()
        ));
        let target = self.dir.join(file_name(&session.session_id, session.revision));
        let result = (|| {
            let mut f = OpenOptions::new().write(true).create_new(true).open(&tmp)?;
            f.write_all(&bytes)?;
            f.sync_all()?;
            fs::hard_link(&tmp, &target)
        })();
        let _ = fs::remove_file(&tmp);
        match result {
            Ok(()) => {
                if let Ok(d) = File::open(&self.dir) {
                    let _ = d.sync_all();
                }
                Ok(())
            }
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => Err(StoreError::Stale {
                expected: session.revision - 1,
                current: session.revision,
            }),
            Err(e) => Err(e.into()),
        }
    }
}

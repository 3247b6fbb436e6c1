//! Session registry backed by one append-only JSONL log per session.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard, RwLock};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use crate::session::{CreateSession, Event, Session, SessionError};

pub type SharedSession = Arc<Mutex<Session>>;

#[derive(Debug)]
pub struct Store {
    dir: PathBuf,
    ttl: Option<Duration>,
    sessions: RwLock<HashMap<String, SharedSession>>,
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error("storage failure: {0}")]
    Io(#[from] std::io::Error),
}

pub fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

/// Locks a session; a panic in another handler does not poison it for good.
pub fn lock(session: &SharedSession) -> MutexGuard<'_, Session> {
    session.lock().unwrap_or_else(|e| e.into_inner())
}

fn read_log(path: &Path) -> Result<Vec<Event>, String> {
    let file = File::open(path).map_err(|e| e.to_string())?;
    let mut events = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        if line.trim().is_empty() {
            continue;
        }
        events.push(serde_json::from_str(&line).map_err(|e| format!("line {}: {e}", i + 1))?);
    }
    Ok(events)
}

impl Store {
    /// Opens `dir`, replaying every session log found there. Logs that fail
    /// to replay are skipped with a warning and left on disk untouched.
    pub fn open(dir: impl Into<PathBuf>, ttl: Option<Duration>) -> std::io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(dir.join("sessions"))?;
        let mut sessions = HashMap::new();
        let mut paths: Vec<PathBuf> = fs::read_dir(dir.join("sessions"))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        paths.sort();
        for path in paths {
            match read_log(&path).and_then(|ev| Session::replay(&ev).map_err(|e| e.to_string())) {
                Ok(s) => {
                    sessions.insert(s.id().to_string(), Arc::new(Mutex::new(s)));
                }
                Err(e) => {
                    tracing::warn!(path = %path.display(), error = %e, "skipping session log")
                }
            }
        }
        tracing::info!(count = sessions.len(), dir = %dir.display(), "sessions restored");
        Ok(Self {
            dir,
            ttl,
            sessions: RwLock::new(sessions),
        })
    }

    pub fn ttl(&self) -> Option<Duration> {
        self.ttl
    }

    fn log_path(&self, id: &str) -> PathBuf {
        self.dir.join("sessions").join(format!("{id}.jsonl"))
    }

    fn append(&self, id: &str, events: &[Event], create: bool) -> std::io::Result<()> {
        let mut opts = OpenOptions::new();
        if create {
            opts.write(true).create_new(true);
        } else {
            opts.append(true);
        }
        let mut file = opts.open(self.log_path(id))?;
        let mut buf = Vec::new();
        for e in events {
            serde_json::to_writer(&mut buf, e)?;
            buf.push(b'\n');
        }
        file.write_all(&buf)?;
        file.sync_data()
    }

    pub fn create(&self, request: CreateSession) -> Result<SharedSession, StoreError> {
        let settings = request.resolve()?;
        let id = uuid::Uuid::new_v4().simple().to_string();
        let session = Session::start(id.clone(), settings, now_ms())?;
        self.append(&id, session.events(), true)?;
        let shared = Arc::new(Mutex::new(session));
        self.sessions
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .insert(id, shared.clone());
        Ok(shared)
    }

    pub fn get(&self, id: &str) -> Result<SharedSession, StoreError> {
        self.sessions
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| StoreError::UnknownSession(id.into()))
    }

    pub fn ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self
            .sessions
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .keys()
            .cloned()
            .collect();
        ids.sort();
        ids
    }

    /// Runs `command` on a locked session and persists whatever events it
    /// appended before returning. If persisting fails, the session is rebuilt
    /// from its log so memory never runs ahead of disk.
    pub fn update<T>(
        &self,
        session: &mut Session,
        command: impl FnOnce(&mut Session, u64) -> Result<T, SessionError>,
    ) -> Result<T, StoreError> {
        let now = now_ms();
        let before = session.events().len();
        session.expire_if_due(self.ttl, now);
        let result = command(session, now);
        let new = &session.events()[before..];
        if !new.is_empty() {
            if let Err(e) = self.append(session.id(), new, false) {
                tracing::error!(session = session.id(), error = %e, "append failed; restoring from log");
                let restored = read_log(&self.log_path(session.id()))
                    .and_then(|ev| Session::replay(&ev).map_err(|e| e.to_string()));
                match restored {
                    Ok(s) => *session = s,
                    Err(re) => {
                        tracing::error!(session = session.id(), error = %re, "restore failed")
                    }
                }
                return Err(e.into());
            }
        }
        Ok(result?)
    }
}

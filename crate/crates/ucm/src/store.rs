//! One JSON file per session under the data directory.
//!
//! Writes go to a temp file in the same directory and are renamed into
//! place. Files that fail to parse are moved to `.quarantine/`.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use ucm_core::{Session, Stage};

const QUARANTINE: &str = ".quarantine";

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("E-IO: {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("E-CORRUPT: session file {path} is unreadable ({message}); moved to {quarantined}")]
    Corrupt {
        path: PathBuf,
        quarantined: PathBuf,
        message: String,
    },
    #[error("E-NOT-FOUND: no session `{0}`")]
    NotFound(String),
}

impl StoreError {
    pub fn code(&self) -> &'static str {
        match self {
            StoreError::Io { .. } => "E-IO",
            StoreError::Corrupt { .. } => "E-CORRUPT",
            StoreError::NotFound(_) => "E-NOT-FOUND",
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionSummary {
    pub id: String,
    pub title: String,
    pub stage: Stage,
}

#[derive(Debug, Clone)]
pub struct SessionStore {
    dir: PathBuf,
}

/// Session ids double as file names.
fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= 128
        && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

impl SessionStore {
    /// Opens `dir`, creating it if needed, and checks that it is writable.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        tempfile::NamedTempFile::new_in(&dir).map_err(io_err(&dir))?;
        Ok(SessionStore { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_of(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    pub fn quarantine_dir(&self) -> PathBuf {
        self.dir.join(QUARANTINE)
    }

    pub fn save(&self, session: &Session) -> Result<(), StoreError> {
        if !valid_id(&session.id) {
            return Err(StoreError::NotFound(session.id.clone()));
        }
        let path = self.path_of(&session.id);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(io_err(&self.dir))?;
        serde_json::to_writer_pretty(&mut tmp, session)
            .map_err(io::Error::from)
            .and_then(|()| tmp.write_all(b"\n"))
            .and_then(|()| tmp.as_file().sync_all())
            .map_err(io_err(tmp.path()))?;
        tmp.persist(&path).map_err(|e| StoreError::Io {
            path: path.clone(),
            source: e.error,
        })?;
        Ok(())
    }

    pub fn load(&self, id: &str) -> Result<Session, StoreError> {
        if !valid_id(id) {
            return Err(StoreError::NotFound(id.into()));
        }
        let path = self.path_of(id);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                return Err(StoreError::NotFound(id.into()))
            }
            Err(e) => return Err(io_err(&path)(e)),
        };
        match serde_json::from_slice::<Session>(&bytes) {
            Ok(s) if s.id == id => Ok(s),
            Ok(s) => Err(self.quarantine(&path, format!("file holds session `{}`", s.id))),
            Err(e) => Err(self.quarantine(&path, e.to_string())),
        }
    }

    fn quarantine(&self, path: &Path, message: String) -> StoreError {
        let qdir = self.quarantine_dir();
        let stamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_millis());
        let name = path.file_name().map_or_else(Default::default, |n| n.to_string_lossy().into_owned());
        let target = qdir.join(format!("{stamp}-{name}"));
        if let Err(e) = fs::create_dir_all(&qdir).and_then(|()| fs::rename(path, &target)) {
            return StoreError::Io {
                path: path.to_path_buf(),
                source: e,
            };
        }
        StoreError::Corrupt {
            path: path.to_path_buf(),
            quarantined: target,
            message,
        }
    }

    /// Ids of every stored session, sorted.
    pub fn ids(&self) -> Result<Vec<String>, StoreError> {
        let mut ids: Vec<String> = fs::read_dir(&self.dir)
            .map_err(io_err(&self.dir))?
            .filter_map(|e| e.ok())
            .filter_map(|e| {
                let name = e.file_name().into_string().ok()?;
                let id = name.strip_suffix(".json")?;
                valid_id(id).then(|| id.to_string())
            })
            .collect();
        ids.sort();
        Ok(ids)
    }

    /// Summaries of every readable session. Corrupt files are quarantined
    /// and skipped.
    pub fn list(&self) -> Result<Vec<SessionSummary>, StoreError> {
        let mut out = Vec::new();
        for id in self.ids()? {
            match self.load(&id) {
                Ok(s) => out.push(SessionSummary {
                    id: s.id,
                    title: s.requirements.title,
                    stage: s.stage,
                }),
                Err(StoreError::Corrupt { .. } | StoreError::NotFound(_)) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    }
}

//! Persistent store for shared workspace states.
//!
//! States live in an append-only log, one record per line:
//! `<id>\t<byte length>\t<canonical json>\n`. Each save is written with a
//! single `write_all` and synced before the id is handed out. On open the
//! log is replayed; a torn trailing record (crash mid-write) is cut off so
//! readers never see a partial state.

use super::state::{StateError, WorkspaceState};
use std::collections::HashMap;
use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Mutex, RwLock};
use thiserror::Error;
use uuid::Uuid;

/// Opaque, unguessable share identifier (122 random bits).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShareId(Uuid);

impl ShareId {
    pub fn random() -> Self {
        Self(Uuid::new_v4())
    }
}

impl fmt::Display for ShareId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.hyphenated())
    }
}

impl FromStr for ShareId {
    type Err = StoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Uuid::try_parse(s)
            .map(Self)
            .map_err(|_| StoreError::NotFound(s.to_string()))
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("no saved state with id '{0}'")]
    NotFound(String),
    #[error(transparent)]
    InvalidState(#[from] StateError),
    #[error("state log {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("state log {path} line {line} is corrupt: {reason}")]
    Corrupt { path: PathBuf, line: usize, reason: String },
}

struct LogFile {
    path: PathBuf,
    file: File,
    len: u64,
}

pub struct StateStore {
    log: Option<Mutex<LogFile>>,
    states: RwLock<HashMap<ShareId, String>>,
}

/// `<base>/share/<id>?mode=view|edit`
pub fn share_url(base: &str, id: ShareId, view_mode: bool) -> String {
    let mode = if view_mode { "view" } else { "edit" };
    format!("{}/share/{id}?mode={mode}", base.trim_end_matches('/'))
}

fn parse_record(line: &str) -> Result<(ShareId, String), String> {
    let mut parts = line.splitn(3, '\t');
    let (Some(id), Some(len), Some(json)) = (parts.next(), parts.next(), parts.next()) else {
        return Err("expected 3 tab-separated fields".into());
    };
    let id = Uuid::try_parse(id).map_err(|e| format!("bad id: {e}"))?;
    let len: usize = len.parse().map_err(|_| format!("bad length '{len}'"))?;
    if json.len() != len {
        return Err(format!("length {} does not match header {len}", json.len()));
    }
    WorkspaceState::from_json(json).map_err(|e| e.to_string())?;
    Ok((ShareId(id), json.to_string()))
}

impl StateStore {
    /// A store that forgets everything when dropped.
    pub fn in_memory() -> Self {
        Self {
            log: None,
            states: RwLock::new(HashMap::new()),
        }
    }

    /// Opens or creates the log at `path` and replays it.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let path = path.as_ref().to_path_buf();
        let io_err = |source| StoreError::Io {
            path: path.clone(),
            source,
        };
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(&path)
            .map_err(io_err)?;

        let mut states = HashMap::new();
        let mut good_len = 0u64;
        let mut reader = BufReader::new(&mut file);
        let mut line = String::new();
        let mut line_no = 0;
        loop {
            line.clear();
            let n = reader.read_line(&mut line).map_err(io_err)?;
            if n == 0 {
                break;
            }
            line_no += 1;
            let Some(body) = line.strip_suffix('\n') else {
                // torn final write; drop it below
                break;
            };
            let (id, json) = parse_record(body).map_err(|reason| StoreError::Corrupt {
                path: path.clone(),
                line: line_no,
                reason,
            })?;
            states.insert(id, json);
            good_len += n as u64;
        }
        drop(reader);
        if file.seek(SeekFrom::End(0)).map_err(io_err)? != good_len {
            file.set_len(good_len).map_err(io_err)?;
            file.sync_all().map_err(io_err)?;
        }
        Ok(Self {
            log: Some(Mutex::new(LogFile {
                path,
                file,
                len: good_len,
            })),
            states: RwLock::new(states),
        })
    }

    pub fn len(&self) -> usize {
        self.states.read().expect("store lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Validates and persists `state`, returning a fresh id. Identical states
    /// saved twice get two ids.
    pub fn save(&self, state: &WorkspaceState) -> Result<ShareId, StoreError> {
        state.validate()?;
        let json = state.to_canonical_json();
        let id = ShareId::random();
        if let Some(log) = &self.log {
            let mut log = log.lock().expect("log lock");
            let record = format!("{id}\t{}\t{json}\n", json.len());
            let written = log
                .file
                .write_all(record.as_bytes())
                .and_then(|_| log.file.sync_data());
            if let Err(source) = written {
                // roll back so a later save does not follow a partial record
                let len = log.len;
                let _ = log.file.set_len(len);
                return Err(StoreError::Io {
                    path: log.path.clone(),
                    source,
                });
            }
            log.len += record.len() as u64;
        }
        self.states.write().expect("store lock").insert(id, json);
        Ok(id)
    }

    /// The saved state with `view_mode` overridden for this load only.
    pub fn load(&self, id: &str, view_mode: Option<bool>) -> Result<WorkspaceState, StoreError> {
        let key: ShareId = id.parse()?;
        let json = {
            let states = self.states.read().expect("store lock");
            states.get(&key).cloned().ok_or_else(|| StoreError::NotFound(id.into()))?
        };
        let mut state = WorkspaceState::from_json(&json)?;
        if let Some(v) = view_mode {
            state.view_mode = v;
        }
        Ok(state)
    }
}

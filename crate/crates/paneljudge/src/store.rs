//! Append-only JSONL persistence for session records.
//!
//! One record per line, schema version on every line, records keyed by
//! (run label, task, persona, condition). A truncated final line, the
//! signature of a crash mid-append, is moved aside on open so the store
//! stays loadable; damage anywhere else is refused outright.

use std::collections::BTreeSet;
use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::session::{Condition, SessionError, SessionRecord};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("store io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        source: serde_json::Error,
    },
    #[error("line {line}: {source}")]
    Invalid {
        line: usize,
        #[source]
        source: SessionError,
    },
    #[error(transparent)]
    Record(#[from] SessionError),
    #[error("duplicate session for run '{run}', task '{task}', persona {persona}, condition {condition}")]
    Duplicate {
        run: String,
        task: String,
        persona: u32,
        condition: String,
    },
}

type Key = (String, String, u32, Condition);

fn key_of(record: &SessionRecord) -> Key {
    (
        record.run_label.clone(),
        record.task_id.clone(),
        record.persona_id,
        record.condition,
    )
}

/// Note left behind when open() finds a partial final line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuarantineNote {
    /// 1-based line number that was removed.
    pub line: usize,
    /// Where the damaged bytes were moved.
    pub path: PathBuf,
    pub bytes: usize,
}

pub struct SessionStore {
    path: Option<PathBuf>,
    file: Option<File>,
    records: Vec<SessionRecord>,
    keys: BTreeSet<Key>,
    quarantine: Option<QuarantineNote>,
}

impl SessionStore {
    /// Opens (creating if absent) a JSONL store and loads every record.
    ///
    /// A final line that fails to parse is treated as a crash remnant: its
    /// bytes move to `<path>.quarantine` and the store file is truncated
    /// back to the last good record. A parse or validation failure on any
    /// earlier line is corruption and refuses the whole file.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let path = path.as_ref().to_path_buf();
        let mut raw = String::new();
        let mut file = OpenOptions::new()
            .read(true)
            .create(true)
            .append(true)
            .open(&path)?;
        file.seek(SeekFrom::Start(0))?;
        file.read_to_string(&mut raw)?;

        let mut store = SessionStore {
            path: Some(path.clone()),
            file: None,
            records: Vec::new(),
            keys: BTreeSet::new(),
            quarantine: None,
        };

        let mut offset = 0usize;
        let mut line_no = 0usize;
        let mut lines = raw.split_inclusive('\n').peekable();
        while let Some(line) = lines.next() {
            line_no += 1;
            let is_last = lines.peek().is_none();
            let body = line.trim_end_matches('\n');
            if body.is_empty() {
                offset += line.len();
                continue;
            }
            match serde_json::from_str::<SessionRecord>(body) {
                Ok(record) => {
                    record
                        .validate()
                        .map_err(|source| StoreError::Invalid { line: line_no, source })?;
                    let key = key_of(&record);
                    if !store.keys.insert(key) {
                        return Err(StoreError::Duplicate {
                            run: record.run_label,
                            task: record.task_id,
                            persona: record.persona_id,
                            condition: record.condition.as_str().to_string(),
                        });
                    }
                    store.records.push(record);
                    offset += line.len();
                }
                Err(_) if is_last => {
                    // Crash remnant: preserve the bytes, then cut them off.
                    let qpath = quarantine_path(&path);
                    let mut qfile = OpenOptions::new()
                        .create(true)
                        .append(true)
                        .open(&qpath)?;
                    qfile.write_all(line.as_bytes())?;
                    if !line.ends_with('\n') {
                        qfile.write_all(b"\n")?;
                    }
                    qfile.sync_data()?;
                    file.set_len(offset as u64)?;
                    file.sync_data()?;
                    store.quarantine = Some(QuarantineNote {
                        line: line_no,
                        path: qpath,
                        bytes: line.len(),
                    });
                }
                Err(source) => {
                    return Err(StoreError::Parse {
                        line: line_no,
                        source,
                    });
                }
            }
        }

        file.seek(SeekFrom::End(0))?;
        store.file = Some(file);
        Ok(store)
    }

    /// A store that never touches disk; useful for pipelines over generated
    /// records.
    pub fn in_memory() -> Self {
        SessionStore {
            path: None,
            file: None,
            records: Vec::new(),
            keys: BTreeSet::new(),
            quarantine: None,
        }
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    /// Set when open() had to remove a partial final line.
    pub fn quarantined(&self) -> Option<&QuarantineNote> {
        self.quarantine.as_ref()
    }

    pub fn records(&self) -> &[SessionRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn contains(&self, record: &SessionRecord) -> bool {
        self.keys.contains(&key_of(record))
    }

    /// Validates, checks key uniqueness, and appends one record as a single
    /// line, flushed to disk before returning.
    pub fn append(&mut self, record: &SessionRecord) -> Result<(), StoreError> {
        record.validate()?;
        let key = key_of(record);
        if self.keys.contains(&key) {
            return Err(StoreError::Duplicate {
                run: record.run_label.clone(),
                task: record.task_id.clone(),
                persona: record.persona_id,
                condition: record.condition.as_str().to_string(),
            });
        }
        if let Some(file) = self.file.as_mut() {
            let mut line = serde_json::to_string(record).expect("record serializes");
            line.push('\n');
            file.write_all(line.as_bytes())?;
            file.flush()?;
        }
        self.keys.insert(key);
        self.records.push(record.clone());
        Ok(())
    }

    pub fn append_all<'a>(
        &mut self,
        records: impl IntoIterator<Item = &'a SessionRecord>,
    ) -> Result<usize, StoreError> {
        let mut n = 0;
        for r in records {
            self.append(r)?;
            n += 1;
        }
        Ok(n)
    }

    /// Everything durably on disk before returning.
    pub fn sync(&mut self) -> Result<(), StoreError> {
        if let Some(file) = self.file.as_mut() {
            file.sync_data()?;
        }
        Ok(())
    }
}

fn quarantine_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".quarantine");
    path.with_file_name(name)
}

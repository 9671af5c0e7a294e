//! On-disk layout: one append-only JSON Lines log plus a disposable index snapshot.

use std::fs::{self, File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::index::SurrogateIndex;
use crate::error::Result;

pub const LOG_FILE: &str = "archive.kwsp.jsonl";
pub const INDEX_FILE: &str = "surrogates.index.json";

pub(crate) struct LogFile {
    dir: PathBuf,
    file: File,
}

/// Index cache tagged with the log position it was derived from.
#[derive(Serialize, Deserialize)]
pub(crate) struct IndexSnapshot {
    pub through_sequence: u64,
    pub last_line: String,
    pub index: SurrogateIndex,
}

impl LogFile {
    /// Opens (creating if needed) the log in `dir` and returns its complete
    /// lines. A trailing line without a newline is an unacknowledged append
    /// and is cut off.
    pub fn open(dir: &Path) -> Result<(LogFile, Vec<String>)> {
        fs::create_dir_all(dir)?;
        let path = dir.join(LOG_FILE);
        let mut file = OpenOptions::new()
            .read(true)
            .write(true)
            .create(true)
            .truncate(false)
            .open(&path)?;
        let mut text = String::new();
        file.read_to_string(&mut text)?;
        let complete = text.rfind('\n').map_or(0, |i| i + 1);
        if complete < text.len() {
            file.set_len(complete as u64)?;
            file.sync_data()?;
        }
        file.seek(SeekFrom::End(0))?;
        let lines = text[..complete]
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(str::to_owned)
            .collect();
        Ok((
            LogFile {
                dir: dir.to_owned(),
                file,
            },
            lines,
        ))
    }

    /// Appends pre-rendered lines and syncs them to disk before returning.
    pub fn append(&mut self, text: &str) -> Result<()> {
        self.file.write_all(text.as_bytes())?;
        self.file.sync_data()?;
        Ok(())
    }

    pub fn read_snapshot(&self) -> Option<IndexSnapshot> {
        let raw = fs::read_to_string(self.dir.join(INDEX_FILE)).ok()?;
        serde_json::from_str(&raw).ok()
    }

    pub fn write_snapshot(&self, snapshot: &IndexSnapshot) -> Result<()> {
        let tmp = self.dir.join(format!("{INDEX_FILE}.tmp"));
        fs::write(&tmp, serde_json::to_vec(snapshot).expect("index serializes"))?;
        fs::rename(tmp, self.dir.join(INDEX_FILE))?;
        Ok(())
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

//! The service facade: one archive plus the session state derived from it.
//! Every write goes through [`Platform::commit`], so the derived state can
//! always be rebuilt by replaying the archive.

use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::archive::{Archive, ArchiveRecord};
use crate::definitions::{self, Registration, TaskTypeDefinition};
use crate::error::{Error, Result};
use crate::ids::RecordId;
use crate::model::{InformationalElement, Link, LinkType, ViolationCode};
use crate::workspace::SessionTable;

/// Outcome of loading a definition document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefinitionLoad {
    pub id: String,
    pub version: u32,
    pub registration: Registration,
}

#[derive(Debug, Default)]
pub struct Platform {
    pub(crate) archive: Archive,
    pub(crate) sessions: SessionTable,
}

impl Platform {
    pub fn in_memory() -> Self {
        Platform::default()
    }

    /// Opens (or creates) the durable archive in `dir`.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        Ok(Platform::from_archive(Archive::open(dir)?))
    }

    /// Wraps an archive, deriving session state by replaying it.
    pub fn from_archive(archive: Archive) -> Self {
        let mut sessions = SessionTable::default();
        for (_, record) in archive.records() {
            sessions.observe(record);
        }
        Platform { archive, sessions }
    }

    pub fn archive(&self) -> &Archive {
        &self.archive
    }

    pub fn into_archive(self) -> Archive {
        self.archive
    }

    /// Appends records atomically and updates derived state.
    pub(crate) fn commit(&mut self, records: Vec<ArchiveRecord>) -> Result<Vec<u64>> {
        let seqs = self.archive.append_batch(records.clone())?;
        for record in &records {
            self.sessions.observe(record);
        }
        Ok(seqs)
    }

    /// Parses, validates and registers a definition document.
    pub fn load_definition(&mut self, document: &str) -> Result<DefinitionLoad> {
        let def = definitions::load_definition(document)?;
        let (id, version) = (def.id.clone(), def.version);
        let registration = self.register_definition(def)?;
        Ok(DefinitionLoad {
            id,
            version,
            registration,
        })
    }

    /// Registers an already-built definition. Re-registering identical
    /// content is a no-op.
    pub fn register_definition(&mut self, def: TaskTypeDefinition) -> Result<Registration> {
        match self.archive.definitions().check(&def)? {
            Registration::Unchanged => Ok(Registration::Unchanged),
            Registration::Added => {
                self.commit(vec![ArchiveRecord::Definition(def)])?;
                Ok(Registration::Added)
            }
        }
    }

    /// Latest registered version of a task type.
    pub fn definition(&self, task_type: &str) -> Result<Arc<TaskTypeDefinition>> {
        self.archive
            .definitions()
            .latest(task_type)
            .ok_or_else(|| Error::UnknownTaskType(task_type.to_owned()))
    }

    pub fn definition_version(&self, task_type: &str, version: u32) -> Result<Arc<TaskTypeDefinition>> {
        self.archive
            .definitions()
            .get(task_type, version)
            .ok_or_else(|| Error::UnknownTaskType(format!("{task_type} v{version}")))
    }

    pub fn get(&self, id: &RecordId) -> Option<&ArchiveRecord> {
        self.archive.get(id)
    }

    pub fn element(&self, id: &RecordId) -> Result<&InformationalElement> {
        self.archive.element(id).ok_or_else(|| Error::UnknownRecord(id.clone()))
    }

    /// Creates a typed link between existing records.
    pub fn link(
        &mut self,
        link_type: LinkType,
        source: RecordId,
        target: RecordId,
        note: Option<String>,
    ) -> Result<Link> {
        let mut link = Link::new(link_type, source, target);
        link.note = note;
        self.commit(vec![ArchiveRecord::Link(link.clone())])
            .map_err(ds_cycle_as_error)?;
        Ok(link)
    }

    /// Records a correction: `replacement` is appended together with a
    /// supersedes link to `original`. The original stays untouched.
    pub fn supersede(&mut self, original: &RecordId, replacement: InformationalElement) -> Result<Link> {
        self.element(original)?;
        let link = Link::new(LinkType::Supersedes, replacement.id.clone(), original.clone());
        self.commit(vec![ArchiveRecord::Element(replacement), ArchiveRecord::Link(link.clone())])?;
        Ok(link)
    }

    pub fn export_to<W: Write>(&self, out: W) -> Result<()> {
        self.archive.export_to(out)
    }

    pub fn export_string(&self) -> String {
        self.archive.export_string()
    }

    /// Imports an export into this empty platform.
    pub fn import_from<R: BufRead>(&mut self, input: R) -> Result<usize> {
        let count = self.archive.import_from(input)?;
        *self = Platform::from_archive(std::mem::take(&mut self.archive));
        Ok(count)
    }

    /// Persists the index snapshot.
    pub fn flush(&self) -> Result<()> {
        self.archive.flush()
    }

    #[cfg(test)]
    pub(crate) fn session_table(&self) -> &SessionTable {
        &self.sessions
    }
}

/// Turns a rejected demand-satisfaction cycle into its dedicated error.
pub(crate) fn ds_cycle_as_error(err: Error) -> Error {
    if err.has_violation(ViolationCode::DsCycle) {
        Error::DsCycle
    } else {
        err
    }
}

//! Task-instance sessions. The activity graph guides a session but never
//! blocks it: any transition to a known activity is accepted and flagged as
//! a deviation when it leaves the nominal structure.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::archive::ArchiveRecord;
use crate::definitions::{Edge, TaskTypeDefinition};
use crate::error::{Error, Result};
use crate::ids::{RecordId, Timestamp};
use crate::platform::Platform;

/// Number of recently produced element ids carried in the situational context.
pub const RECENT_ELEMENTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    Open,
    Completed,
    Abandoned,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionEvent {
    pub from_activity: Option<String>,
    pub to_activity: String,
    pub deviation: bool,
    pub at: Timestamp,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkspaceSession {
    pub session_id: RecordId,
    pub worker: String,
    pub task_type: String,
    pub definition_version: u32,
    pub task_instance: String,
    pub current_activity: Option<String>,
    pub status: SessionStatus,
    pub history: Vec<TransitionEvent>,
    pub opened_at: Timestamp,
}

/// Archived change to a session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionEvent {
    pub session_id: RecordId,
    pub at: Timestamp,
    pub change: SessionChange,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SessionChange {
    Opened {
        worker: String,
        task_type: String,
        definition_version: u32,
        task_instance: String,
    },
    Advanced {
        from_activity: Option<String>,
        to_activity: String,
        deviation: bool,
        note: Option<String>,
    },
    Completed,
    Abandoned,
}

/// What the workspace knows about where the worker currently is.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SituationalContext {
    pub session_id: RecordId,
    pub task_type: String,
    pub definition_version: u32,
    pub task_instance: String,
    pub current_activity: Option<String>,
    pub corresponding_ie_type_nodes: Vec<String>,
    /// Newest first.
    pub recent_element_ids: Vec<RecordId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeUsage {
    pub from: String,
    pub to: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionUsage {
    pub from: Option<String>,
    pub to: String,
    pub count: u64,
}

/// Nominal structure of a task type against the transitions actually
/// performed in its sessions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub task_type: String,
    pub definition_version: u32,
    /// Nominal entries into a start activity, zero included.
    pub starts: Vec<TransitionUsage>,
    /// Every nominal edge with its traversal count, zero included.
    pub nominal_edges: Vec<EdgeUsage>,
    /// Every observed non-nominal transition.
    pub deviations: Vec<TransitionUsage>,
    /// Nominal transitions performed, start entries included.
    pub nominal_total: u64,
    pub deviant_total: u64,
}

/// Live sessions, derived entirely from archived session events and elements.
#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct SessionTable {
    sessions: BTreeMap<RecordId, WorkspaceSession>,
    open_by_instance: HashMap<(String, String), RecordId>,
    produced: HashMap<RecordId, Vec<RecordId>>,
}

impl SessionTable {
    pub fn observe(&mut self, record: &ArchiveRecord) {
        match record {
            ArchiveRecord::SessionEvent(ev) => self.apply_event(ev),
            ArchiveRecord::Element(e) => {
                if let Some(session) = &e.provenance.session {
                    self.produced.entry(session.clone()).or_default().push(e.id.clone());
                }
            }
            _ => {}
        }
    }

    fn apply_event(&mut self, ev: &SessionEvent) {
        match &ev.change {
            SessionChange::Opened {
                worker,
                task_type,
                definition_version,
                task_instance,
            } => {
                self.open_by_instance
                    .insert((task_type.clone(), task_instance.clone()), ev.session_id.clone());
                self.sessions.insert(
                    ev.session_id.clone(),
                    WorkspaceSession {
                        session_id: ev.session_id.clone(),
                        worker: worker.clone(),
                        task_type: task_type.clone(),
                        definition_version: *definition_version,
                        task_instance: task_instance.clone(),
                        current_activity: None,
                        status: SessionStatus::Open,
                        history: Vec::new(),
                        opened_at: ev.at,
                    },
                );
            }
            SessionChange::Advanced {
                from_activity,
                to_activity,
                deviation,
                note,
            } => {
                if let Some(s) = self.sessions.get_mut(&ev.session_id) {
                    s.current_activity = Some(to_activity.clone());
                    s.history.push(TransitionEvent {
                        from_activity: from_activity.clone(),
                        to_activity: to_activity.clone(),
                        deviation: *deviation,
                        at: ev.at,
                        note: note.clone(),
                    });
                }
            }
            SessionChange::Completed | SessionChange::Abandoned => {
                if let Some(s) = self.sessions.get_mut(&ev.session_id) {
                    s.status = if ev.change == SessionChange::Completed {
                        SessionStatus::Completed
                    } else {
                        SessionStatus::Abandoned
                    };
                    let key = (s.task_type.clone(), s.task_instance.clone());
                    if self.open_by_instance.get(&key) == Some(&ev.session_id) {
                        self.open_by_instance.remove(&key);
                    }
                }
            }
        }
    }

    pub fn get(&self, id: &RecordId) -> Option<&WorkspaceSession> {
        self.sessions.get(id)
    }

    pub fn all(&self) -> impl Iterator<Item = &WorkspaceSession> {
        self.sessions.values()
    }

    pub fn open_on(&self, task_type: &str, instance: &str) -> Option<&RecordId> {
        self.open_by_instance.get(&(task_type.to_owned(), instance.to_owned()))
    }

    /// Elements produced in `session`, oldest first.
    pub fn produced(&self, session: &RecordId) -> &[RecordId] {
        self.produced.get(session).map(Vec::as_slice).unwrap_or(&[])
    }
}

impl Platform {
    pub fn session(&self, id: &RecordId) -> Result<&WorkspaceSession> {
        self.sessions.get(id).ok_or_else(|| Error::UnknownSession(id.clone()))
    }

    /// Session that must still be open.
    pub(crate) fn open_session_ref(&self, id: &RecordId) -> Result<&WorkspaceSession> {
        let s = self.session(id)?;
        if s.status != SessionStatus::Open {
            return Err(Error::SessionClosed(id.clone()));
        }
        Ok(s)
    }

    pub fn sessions(&self) -> impl Iterator<Item = &WorkspaceSession> {
        self.sessions.all()
    }

    /// The definition version a session was opened under.
    pub fn pinned_definition(&self, session: &WorkspaceSession) -> Arc<TaskTypeDefinition> {
        self.archive
            .definitions()
            .get(&session.task_type, session.definition_version)
            .expect("sessions only open against registered versions")
    }

    pub fn open_session(&mut self, worker: &str, task_type: &str, task_instance: &str) -> Result<WorkspaceSession> {
        let def = self.definition(task_type)?;
        if self.sessions.open_on(task_type, task_instance).is_some() {
            return Err(Error::InstanceBusy(task_instance.to_owned()));
        }
        let session_id = RecordId::fresh();
        self.commit(vec![ArchiveRecord::SessionEvent(SessionEvent {
            session_id: session_id.clone(),
            at: Timestamp::now(),
            change: SessionChange::Opened {
                worker: worker.to_owned(),
                task_type: task_type.to_owned(),
                definition_version: def.version,
                task_instance: task_instance.to_owned(),
            },
        })])?;
        Ok(self.session(&session_id)?.clone())
    }

    /// Moves the session to `to_activity`. Never refused for a known activity.
    pub fn advance(&mut self, session_id: &RecordId, to_activity: &str, note: Option<&str>) -> Result<TransitionEvent> {
        let session = self.open_session_ref(session_id)?;
        let def = self.pinned_definition(session);
        if def.activity(to_activity).is_none() {
            return Err(Error::UnknownActivity(to_activity.to_owned()));
        }
        let from = session.current_activity.clone();
        let deviation = !def.is_nominal_transition(from.as_deref(), to_activity);
        self.commit(vec![ArchiveRecord::SessionEvent(SessionEvent {
            session_id: session_id.clone(),
            at: Timestamp::now(),
            change: SessionChange::Advanced {
                from_activity: from,
                to_activity: to_activity.to_owned(),
                deviation,
                note: note.map(str::to_owned),
            },
        })])?;
        Ok(self
            .session(session_id)?
            .history
            .last()
            .cloned()
            .expect("transition just recorded"))
    }

    pub fn current_context(&self, session_id: &RecordId) -> Result<SituationalContext> {
        let session = self.open_session_ref(session_id)?;
        let def = self.pinned_definition(session);
        let corresponding = match &session.current_activity {
            Some(a) => def.correspondences_of(a)?.into_iter().map(str::to_owned).collect(),
            None => Vec::new(),
        };
        let recent = self
            .sessions
            .produced(session_id)
            .iter()
            .rev()
            .take(RECENT_ELEMENTS)
            .cloned()
            .collect();
        Ok(SituationalContext {
            session_id: session.session_id.clone(),
            task_type: session.task_type.clone(),
            definition_version: session.definition_version,
            task_instance: session.task_instance.clone(),
            current_activity: session.current_activity.clone(),
            corresponding_ie_type_nodes: corresponding,
            recent_element_ids: recent,
        })
    }

    pub fn complete_session(&mut self, session_id: &RecordId) -> Result<WorkspaceSession> {
        self.close_session(session_id, SessionChange::Completed)
    }

    pub fn abandon_session(&mut self, session_id: &RecordId) -> Result<WorkspaceSession> {
        self.close_session(session_id, SessionChange::Abandoned)
    }

    fn close_session(&mut self, session_id: &RecordId, change: SessionChange) -> Result<WorkspaceSession> {
        self.open_session_ref(session_id)?;
        self.commit(vec![ArchiveRecord::SessionEvent(SessionEvent {
            session_id: session_id.clone(),
            at: Timestamp::now(),
            change,
        })])?;
        Ok(self.session(session_id)?.clone())
    }

    /// Compares the latest definition's nominal edges with the transitions
    /// recorded across every session of the task type.
    pub fn deviation_report(&self, task_type: &str) -> Result<DeviationReport> {
        let def = self.definition(task_type)?;
        let mut nominal: BTreeMap<Edge, u64> = def.activities.edges.iter().map(|e| (e.clone(), 0)).collect();
        let mut starts: BTreeMap<String, u64> = def.activities.start.iter().map(|s| (s.clone(), 0)).collect();
        let mut deviant: BTreeMap<(Option<String>, String), u64> = BTreeMap::new();
        for session in self.sessions().filter(|s| s.task_type == task_type) {
            for t in &session.history {
                match (&t.from_activity, t.deviation) {
                    (_, true) => *deviant.entry((t.from_activity.clone(), t.to_activity.clone())).or_default() += 1,
                    (None, false) => *starts.entry(t.to_activity.clone()).or_default() += 1,
                    (Some(from), false) => *nominal.entry(Edge::new(from.clone(), t.to_activity.clone())).or_default() += 1,
                }
            }
        }
        let nominal_edges: Vec<EdgeUsage> = nominal
            .into_iter()
            .map(|(e, count)| EdgeUsage {
                from: e.from,
                to: e.to,
                count,
            })
            .collect();
        let deviations: Vec<TransitionUsage> = deviant
            .into_iter()
            .map(|((from, to), count)| TransitionUsage { from, to, count })
            .collect();
        let starts: Vec<TransitionUsage> = starts
            .into_iter()
            .map(|(to, count)| TransitionUsage { from: None, to, count })
            .collect();
        Ok(DeviationReport {
            task_type: task_type.to_owned(),
            definition_version: def.version,
            nominal_total: nominal_edges.iter().map(|e| e.count).sum::<u64>() + starts.iter().map(|s| s.count).sum::<u64>(),
            starts,
            deviant_total: deviations.iter().map(|d| d.count).sum(),
            nominal_edges,
            deviations,
        })
    }
}

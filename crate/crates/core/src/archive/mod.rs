//! The contextualized information space: an append-only log of elements,
//! links, definitions, argument nodes and session events, with surrogate
//! indexes derived from it.
//!
//! Every append is validated before anything is written. A batch is
//! validated as a whole against the archive plus the records staged ahead
//! of it, then written with a single synced write, so either all of its
//! records become visible or none do.

mod index;
mod storage;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use index::{element_tokens, extract_terms, SurrogateFilter, SurrogateIndex};
pub use storage::{INDEX_FILE, LOG_FILE};

use crate::argumentation::ArgumentNode;
use crate::definitions::{DefinitionRegistry, NodeRole, Registration, TaskTypeDefinition};
use crate::error::{Error, Result};
use crate::ids::RecordId;
use crate::model::{
    check_link_legal, validate_element, InformationalElement, Link, LinkType, RecordKind, Violation,
    ViolationCode,
};
use crate::workspace::{SessionChange, SessionEvent};
use storage::{IndexSnapshot, LogFile};

/// One archived record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "record_type", rename_all = "snake_case")]
pub enum ArchiveRecord {
    Element(InformationalElement),
    Link(Link),
    Definition(TaskTypeDefinition),
    ArgumentNode(ArgumentNode),
    SessionEvent(SessionEvent),
}

impl ArchiveRecord {
    /// Identifier under which `get` finds the record, if it has one.
    pub fn id(&self) -> Option<&RecordId> {
        match self {
            ArchiveRecord::Element(e) => Some(&e.id),
            ArchiveRecord::Link(l) => Some(&l.id),
            ArchiveRecord::ArgumentNode(n) => Some(&n.id),
            ArchiveRecord::Definition(_) | ArchiveRecord::SessionEvent(_) => None,
        }
    }
}

/// A record with its position in the log, as exported.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchiveEntry {
    pub sequence_number: u64,
    #[serde(flatten)]
    pub record: ArchiveRecord,
}

#[derive(Serialize)]
struct EntryRef<'a> {
    sequence_number: u64,
    #[serde(flatten)]
    record: &'a ArchiveRecord,
}

fn render_line(sequence_number: u64, record: &ArchiveRecord) -> String {
    serde_json::to_string(&EntryRef {
        sequence_number,
        record,
    })
    .expect("archive records serialize")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Out,
    In,
    Both,
}

struct StoredEntry {
    record: ArchiveRecord,
    line: String,
}

#[derive(Default)]
struct State {
    entries: Vec<StoredEntry>,
    by_id: HashMap<RecordId, usize>,
    links_out: HashMap<RecordId, Vec<usize>>,
    links_in: HashMap<RecordId, Vec<usize>>,
    sessions: HashSet<RecordId>,
    definitions: DefinitionRegistry,
    index: SurrogateIndex,
}

pub struct Archive {
    log: Option<LogFile>,
    state: State,
}

impl std::fmt::Debug for Archive {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Archive")
            .field("records", &self.state.entries.len())
            .field("durable", &self.log.is_some())
            .finish()
    }
}

impl Default for Archive {
    fn default() -> Self {
        Self::in_memory()
    }
}

impl Archive {
    pub fn in_memory() -> Self {
        Archive {
            log: None,
            state: State::default(),
        }
    }

    /// Opens the archive stored in `dir`, creating an empty one if absent.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        let (log, lines) = LogFile::open(dir.as_ref())?;
        let snapshot = log
            .read_snapshot()
            .filter(|s| s.through_sequence == lines.len() as u64 && lines.last() == Some(&s.last_line));
        let mut archive = Archive {
            log: None,
            state: State::default(),
        };
        let maintain_index = snapshot.is_none();
        for (i, line) in lines.iter().enumerate() {
            let entry = parse_entry(line, i as u64 + 1)
                .map_err(|e| Error::Storage(format!("corrupt log at line {}: {e}", i + 1)))?;
            archive
                .validate_batch(std::slice::from_ref(&entry.record))
                .map_err(|e| Error::Storage(format!("corrupt log at line {}: {e}", i + 1)))?;
            archive.state.apply(entry.record, line.clone(), maintain_index);
        }
        if let Some(snapshot) = snapshot {
            archive.state.index = snapshot.index;
        }
        archive.log = Some(log);
        Ok(archive)
    }

    pub fn len(&self) -> usize {
        self.state.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.state.entries.is_empty()
    }

    pub fn last_sequence(&self) -> u64 {
        self.state.entries.len() as u64
    }

    pub fn is_durable(&self) -> bool {
        self.log.is_some()
    }

    pub fn append(&mut self, record: ArchiveRecord) -> Result<u64> {
        Ok(self.append_batch(vec![record])?[0])
    }

    /// Appends all records or none of them.
    pub fn append_batch(&mut self, records: Vec<ArchiveRecord>) -> Result<Vec<u64>> {
        self.validate_batch(&records)?;
        let first = self.last_sequence() + 1;
        let lines: Vec<String> = records
            .iter()
            .enumerate()
            .map(|(i, r)| render_line(first + i as u64, r))
            .collect();
        if let Some(log) = &mut self.log {
            let mut text = String::new();
            for line in &lines {
                text.push_str(line);
                text.push('\n');
            }
            log.append(&text)?;
        }
        let mut seqs = Vec::with_capacity(records.len());
        for (record, line) in records.into_iter().zip(lines) {
            seqs.push(self.state.apply(record, line, true));
        }
        Ok(seqs)
    }

    /// Checks a batch without appending it.
    pub fn validate_batch(&self, records: &[ArchiveRecord]) -> Result<()> {
        let mut staged = Staged::new(&self.state);
        for record in records {
            staged.check(record)?;
            staged.stage(record);
        }
        Ok(())
    }

    pub fn get(&self, id: &RecordId) -> Option<&ArchiveRecord> {
        self.state.by_id.get(id).map(|&i| &self.state.entries[i].record)
    }

    pub fn sequence_of(&self, id: &RecordId) -> Option<u64> {
        self.state.by_id.get(id).map(|&i| i as u64 + 1)
    }

    pub fn element(&self, id: &RecordId) -> Option<&InformationalElement> {
        match self.get(id) {
            Some(ArchiveRecord::Element(e)) => Some(e),
            _ => None,
        }
    }

    pub fn link(&self, id: &RecordId) -> Option<&Link> {
        match self.get(id) {
            Some(ArchiveRecord::Link(l)) => Some(l),
            _ => None,
        }
    }

    pub fn argument_node(&self, id: &RecordId) -> Option<&ArgumentNode> {
        match self.get(id) {
            Some(ArchiveRecord::ArgumentNode(n)) => Some(n),
            _ => None,
        }
    }

    /// Stored JSON line of a record, exactly as exported.
    pub fn raw_line(&self, id: &RecordId) -> Option<&str> {
        self.state.by_id.get(id).map(|&i| self.state.entries[i].line.as_str())
    }

    pub fn record_kind(&self, id: &RecordId) -> Option<RecordKind> {
        self.state.record_kind(id)
    }

    pub fn definitions(&self) -> &DefinitionRegistry {
        &self.state.definitions
    }

    /// Records in sequence order.
    pub fn records(&self) -> impl Iterator<Item = (u64, &ArchiveRecord)> {
        self.state
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| (i as u64 + 1, &e.record))
    }

    pub fn elements(&self) -> impl Iterator<Item = &InformationalElement> {
        self.records().filter_map(|(_, r)| match r {
            ArchiveRecord::Element(e) => Some(e),
            _ => None,
        })
    }

    pub fn links(&self) -> impl Iterator<Item = &Link> {
        self.records().filter_map(|(_, r)| match r {
            ArchiveRecord::Link(l) => Some(l),
            _ => None,
        })
    }

    pub fn session_events(&self) -> impl Iterator<Item = &SessionEvent> {
        self.records().filter_map(|(_, r)| match r {
            ArchiveRecord::SessionEvent(e) => Some(e),
            _ => None,
        })
    }

    /// Ids of elements matching every clause, in creation order.
    pub fn query_surrogates(&self, filter: &SurrogateFilter) -> Vec<RecordId> {
        self.query_index(&self.state.index, filter)
    }

    /// Same as `query_surrogates`, against a caller-supplied index.
    pub fn query_index(&self, index: &SurrogateIndex, filter: &SurrogateFilter) -> Vec<RecordId> {
        index
            .query(filter)
            .into_iter()
            .filter_map(|seq| self.state.entries.get(seq as usize - 1))
            .filter_map(|e| e.record.id().cloned())
            .collect()
    }

    pub fn index(&self) -> &SurrogateIndex {
        &self.state.index
    }

    /// Derives the surrogate index from the log alone.
    pub fn rebuild_index(&self) -> SurrogateIndex {
        let mut replay = State::default();
        for entry in &self.state.entries {
            replay.apply(entry.record.clone(), String::new(), true);
        }
        replay.index
    }

    /// Drops the live index and replaces it with one rebuilt from the log.
    pub fn reindex(&mut self) {
        self.state.index = self.rebuild_index();
    }

    /// Links touching `id`, creation ascending. An empty `types` means every type.
    pub fn links_of(&self, id: &RecordId, direction: Direction, types: &[LinkType]) -> Result<Vec<&Link>> {
        if self.state.record_kind(id).is_none() {
            return Err(Error::UnknownRecord(id.clone()));
        }
        let mut positions: Vec<usize> = Vec::new();
        if matches!(direction, Direction::Out | Direction::Both) {
            positions.extend(self.state.links_out.get(id).into_iter().flatten());
        }
        if matches!(direction, Direction::In | Direction::Both) {
            positions.extend(self.state.links_in.get(id).into_iter().flatten());
        }
        positions.sort_unstable();
        positions.dedup();
        Ok(positions
            .into_iter()
            .filter_map(|i| match &self.state.entries[i].record {
                ArchiveRecord::Link(l) if types.is_empty() || types.contains(&l.link_type) => Some(l),
                _ => None,
            })
            .collect())
    }

    /// Writes every record in sequence order as JSON Lines.
    pub fn export_to<W: Write>(&self, mut out: W) -> Result<()> {
        for entry in &self.state.entries {
            out.write_all(entry.line.as_bytes())?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn export_string(&self) -> String {
        let mut buf = Vec::new();
        self.export_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("export is UTF-8")
    }

    /// Loads an export into this empty archive. Any bad line aborts the
    /// import and leaves the archive empty.
    pub fn import_from<R: BufRead>(&mut self, input: R) -> Result<usize> {
        if !self.is_empty() {
            return Err(Error::NonEmptyTarget);
        }
        match self.import_lines(input) {
            Ok(text) => {
                if let Some(log) = &mut self.log {
                    if let Err(e) = log.append(&text) {
                        self.state = State::default();
                        return Err(e);
                    }
                }
                Ok(self.len())
            }
            Err(e) => {
                self.state = State::default();
                Err(e)
            }
        }
    }

    fn import_lines<R: BufRead>(&mut self, input: R) -> Result<String> {
        let mut text = String::new();
        for (i, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
            if line.trim().is_empty() {
                continue;
            }
            let expected = self.last_sequence() + 1;
            let entry = parse_entry(&line, expected).map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
            self.validate_batch(std::slice::from_ref(&entry.record))
                .map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
            let canonical = render_line(expected, &entry.record);
            text.push_str(&canonical);
            text.push('\n');
            self.state.apply(entry.record, canonical, true);
        }
        Ok(text)
    }

    /// Writes the index snapshot next to the log.
    pub fn flush(&self) -> Result<()> {
        if let Some(log) = &self.log {
            log.write_snapshot(&IndexSnapshot {
                through_sequence: self.last_sequence(),
                last_line: self.state.entries.last().map(|e| e.line.clone()).unwrap_or_default(),
                index: self.state.index.clone(),
            })?;
        }
        Ok(())
    }

    pub fn data_dir(&self) -> Option<&Path> {
        self.log.as_ref().map(LogFile::dir)
    }

    /// Full referential-integrity audit of the stored records. It recomputes
    /// each invariant from the stored records rather than trusting the
    /// incremental checks.
    pub fn audit(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut ds_edges: Vec<(&RecordId, &RecordId)> = Vec::new();
        for (seq, record) in self.records() {
            match record {
                ArchiveRecord::Element(e) => {
                    if !e.provenance.is_complete() {
                        out.push(Violation::new(
                            ViolationCode::MissingProvenance,
                            format!("#{seq}.provenance"),
                            format!("element {} has no session or source", e.id),
                        ));
                    }
                    let versions = self.state.definitions.versions_of(&e.task_type);
                    let any_ok = versions.iter().any(|v| {
                        let def = self.state.definitions.get(&e.task_type, *v).expect("listed");
                        validate_element(e, &def).is_empty()
                    });
                    if !any_ok {
                        out.push(Violation::new(
                            ViolationCode::UnknownTaskType,
                            format!("#{seq}"),
                            format!("element {} matches no registered definition", e.id),
                        ));
                    }
                }
                ArchiveRecord::Link(l) => {
                    let source = self.state.record_kind(&l.source);
                    let target = self.state.record_kind(&l.target);
                    match (source, target) {
                        (Some(s), Some(t)) => {
                            if !check_link_legal(l.link_type, s, t) {
                                out.push(Violation::new(
                                    ViolationCode::IllegalLink,
                                    format!("#{seq}"),
                                    format!("{:?} {s:?} -> {t:?}", l.link_type),
                                ));
                            }
                        }
                        _ => out.push(Violation::new(
                            ViolationCode::DanglingEdge,
                            format!("#{seq}"),
                            format!("link {} has an unresolved endpoint", l.id),
                        )),
                    }
                    if l.source == l.target {
                        out.push(Violation::new(ViolationCode::SelfLink, format!("#{seq}"), l.id.to_string()));
                    }
                    if l.link_type == LinkType::DemandSatisfaction {
                        ds_edges.push((&l.source, &l.target));
                    }
                }
                ArchiveRecord::ArgumentNode(n) => {
                    if n.text.trim().is_empty() {
                        out.push(Violation::new(ViolationCode::EmptyText, format!("#{seq}"), n.id.to_string()));
                    }
                }
                ArchiveRecord::Definition(_) | ArchiveRecord::SessionEvent(_) => {}
            }
        }
        if has_cycle(&ds_edges) {
            out.push(Violation::new(
                ViolationCode::DsCycle,
                "links",
                "demand-satisfaction links contain a cycle",
            ));
        }
        out
    }
}

fn parse_entry(line: &str, expected_seq: u64) -> std::result::Result<ArchiveEntry, String> {
    let entry: ArchiveEntry = serde_json::from_str(line).map_err(|e| e.to_string())?;
    if entry.sequence_number != expected_seq {
        return Err(format!(
            "sequence number {} where {expected_seq} was expected",
            entry.sequence_number
        ));
    }
    Ok(entry)
}

/// Depth-first search with colours over an explicit edge list.
fn has_cycle(edges: &[(&RecordId, &RecordId)]) -> bool {
    let mut adjacency: BTreeMap<&RecordId, Vec<&RecordId>> = BTreeMap::new();
    for (from, to) in edges {
        adjacency.entry(from).or_default().push(to);
    }
    #[derive(Clone, Copy, PartialEq)]
    enum Colour {
        Grey,
        Black,
    }
    let mut colour: HashMap<&RecordId, Colour> = HashMap::new();
    for &root in adjacency.keys() {
        if colour.contains_key(root) {
            continue;
        }
        let mut stack: Vec<(&RecordId, usize)> = vec![(root, 0)];
        colour.insert(root, Colour::Grey);
        while let Some((node, next)) = stack.pop() {
            let children = adjacency.get(node).map(Vec::as_slice).unwrap_or(&[]);
            if next < children.len() {
                stack.push((node, next + 1));
                let child = children[next];
                match colour.get(child) {
                    Some(Colour::Grey) => return true,
                    Some(Colour::Black) => {}
                    None => {
                        colour.insert(child, Colour::Grey);
                        stack.push((child, 0));
                    }
                }
            } else {
                colour.insert(node, Colour::Black);
            }
        }
    }
    false
}

impl State {
    fn record_kind(&self, id: &RecordId) -> Option<RecordKind> {
        if let Some(&i) = self.by_id.get(id) {
            return Some(match &self.entries[i].record {
                ArchiveRecord::Element(e) => RecordKind::Element(e.kind),
                ArchiveRecord::ArgumentNode(n) => RecordKind::Argument(n.node_kind),
                _ => RecordKind::Link,
            });
        }
        let (task_type, node) = id.as_node_ref()?;
        self.definitions
            .node_role(task_type, node)
            .map(|_| RecordKind::DefinitionNode)
    }

    fn apply(&mut self, record: ArchiveRecord, line: String, maintain_index: bool) -> u64 {
        let pos = self.entries.len();
        let seq = pos as u64 + 1;
        if let Some(id) = record.id() {
            self.by_id.insert(id.clone(), pos);
        }
        match &record {
            ArchiveRecord::Element(e) => {
                if maintain_index {
                    self.index.insert_element(seq, e);
                }
            }
            ArchiveRecord::Link(l) => {
                self.links_out.entry(l.source.clone()).or_default().push(pos);
                self.links_in.entry(l.target.clone()).or_default().push(pos);
                if maintain_index && l.link_type == LinkType::CategorizedAs {
                    if let (Some(&src), Some((task_type, node))) = (self.by_id.get(&l.source), l.target.as_node_ref()) {
                        match self.definitions.node_role(task_type, node) {
                            Some(NodeRole::Activity) => self.index.insert_activity(src as u64 + 1, task_type, node),
                            Some(NodeRole::InfoType) => self.index.insert_ie_type(src as u64 + 1, task_type, node),
                            None => {}
                        }
                    }
                }
            }
            ArchiveRecord::Definition(d) => self.definitions.insert(d.clone()),
            ArchiveRecord::SessionEvent(ev) => {
                if matches!(ev.change, SessionChange::Opened { .. }) {
                    self.sessions.insert(ev.session_id.clone());
                }
            }
            ArchiveRecord::ArgumentNode(_) => {}
        }
        self.entries.push(StoredEntry { record, line });
        seq
    }
}

/// Archive state plus the records staged ahead of it in a batch.
struct Staged<'a> {
    state: &'a State,
    kinds: HashMap<RecordId, RecordKind>,
    ds_out: HashMap<RecordId, Vec<RecordId>>,
    sessions: HashSet<RecordId>,
    definitions: Option<DefinitionRegistry>,
}

impl<'a> Staged<'a> {
    fn new(state: &'a State) -> Self {
        Staged {
            state,
            kinds: HashMap::new(),
            ds_out: HashMap::new(),
            sessions: HashSet::new(),
            definitions: None,
        }
    }

    fn definitions(&self) -> &DefinitionRegistry {
        self.definitions.as_ref().unwrap_or(&self.state.definitions)
    }

    fn kind_of(&self, id: &RecordId) -> Option<RecordKind> {
        if let Some(k) = self.kinds.get(id) {
            return Some(*k);
        }
        if self.definitions.is_some() {
            if let Some((tt, node)) = id.as_node_ref() {
                return self.definitions().node_role(tt, node).map(|_| RecordKind::DefinitionNode);
            }
        }
        self.state.record_kind(id)
    }

    fn id_taken(&self, id: &RecordId) -> bool {
        self.kinds.contains_key(id) || self.state.by_id.contains_key(id)
    }

    fn session_known(&self, id: &RecordId) -> bool {
        self.sessions.contains(id) || self.state.sessions.contains(id)
    }

    /// Whether `to` is reachable from `from` along DS links.
    fn ds_reaches(&self, from: &RecordId, to: &RecordId) -> bool {
        let mut stack = vec![from.clone()];
        let mut seen = HashSet::new();
        while let Some(node) = stack.pop() {
            if &node == to {
                return true;
            }
            if !seen.insert(node.clone()) {
                continue;
            }
            for &pos in self.state.links_out.get(&node).into_iter().flatten() {
                if let ArchiveRecord::Link(l) = &self.state.entries[pos].record {
                    if l.link_type == LinkType::DemandSatisfaction {
                        stack.push(l.target.clone());
                    }
                }
            }
            stack.extend(self.ds_out.get(&node).into_iter().flatten().cloned());
        }
        false
    }

    fn check(&self, record: &ArchiveRecord) -> Result<()> {
        let rejected = |code, field: &str, msg: String| Err(Error::ValidationFailed(vec![Violation::new(code, field, msg)]));
        if let Some(id) = record.id() {
            if self.id_taken(id) {
                return rejected(ViolationCode::DuplicateId, "id", format!("`{id}` already exists"));
            }
        }
        match record {
            ArchiveRecord::Element(e) => {
                let registry = self.definitions();
                let versions = registry.versions_of(&e.task_type);
                if versions.is_empty() {
                    return rejected(
                        ViolationCode::UnknownTaskType,
                        "task_type",
                        format!("`{}` is not registered", e.task_type),
                    );
                }
                let mut last = Vec::new();
                for v in versions.iter().rev() {
                    let def = registry.get(&e.task_type, *v).expect("listed version");
                    let violations = validate_element(e, &def);
                    if violations.is_empty() {
                        return Ok(());
                    }
                    if last.is_empty() {
                        last = violations;
                    }
                }
                Err(Error::ValidationFailed(last))
            }
            ArchiveRecord::Link(l) => {
                if l.source == l.target {
                    return rejected(ViolationCode::SelfLink, "target", "a link cannot join a record to itself".into());
                }
                let source = self.kind_of(&l.source).ok_or_else(|| Error::DanglingEndpoint(l.source.clone()))?;
                let target = self.kind_of(&l.target).ok_or_else(|| Error::DanglingEndpoint(l.target.clone()))?;
                if !check_link_legal(l.link_type, source, target) {
                    return rejected(
                        ViolationCode::IllegalLink,
                        "link_type",
                        format!("{:?} cannot join {source:?} to {target:?}", l.link_type),
                    );
                }
                if l.link_type == LinkType::DemandSatisfaction && self.ds_reaches(&l.target, &l.source) {
                    return rejected(
                        ViolationCode::DsCycle,
                        "target",
                        format!("{} -> {} closes a demand-satisfaction cycle", l.source, l.target),
                    );
                }
                Ok(())
            }
            ArchiveRecord::Definition(d) => match self.definitions().check(d)? {
                Registration::Added => Ok(()),
                Registration::Unchanged => Err(Error::StaleVersion {
                    id: d.id.clone(),
                    offered: d.version,
                    registered: d.version,
                }),
            },
            ArchiveRecord::ArgumentNode(n) => {
                if n.text.trim().is_empty() {
                    return rejected(ViolationCode::EmptyText, "text", "argument text is empty".into());
                }
                Ok(())
            }
            ArchiveRecord::SessionEvent(ev) => match &ev.change {
                SessionChange::Opened {
                    task_type,
                    definition_version,
                    ..
                } => {
                    if self.session_known(&ev.session_id) {
                        return rejected(ViolationCode::DuplicateId, "session_id", ev.session_id.to_string());
                    }
                    if self.definitions().get(task_type, *definition_version).is_none() {
                        return rejected(
                            ViolationCode::UnknownTaskType,
                            "task_type",
                            format!("{task_type} v{definition_version}"),
                        );
                    }
                    Ok(())
                }
                _ if !self.session_known(&ev.session_id) => rejected(
                    ViolationCode::UnknownSession,
                    "session_id",
                    format!("session `{}` was never opened", ev.session_id),
                ),
                _ => Ok(()),
            },
        }
    }

    fn stage(&mut self, record: &ArchiveRecord) {
        match record {
            ArchiveRecord::Element(e) => {
                self.kinds.insert(e.id.clone(), RecordKind::Element(e.kind));
            }
            ArchiveRecord::ArgumentNode(n) => {
                self.kinds.insert(n.id.clone(), RecordKind::Argument(n.node_kind));
            }
            ArchiveRecord::Link(l) => {
                self.kinds.insert(l.id.clone(), RecordKind::Link);
                if l.link_type == LinkType::DemandSatisfaction {
                    self.ds_out.entry(l.source.clone()).or_default().push(l.target.clone());
                }
            }
            ArchiveRecord::Definition(d) => {
                let mut registry = self.definitions().clone();
                registry.insert(d.clone());
                self.definitions = Some(registry);
            }
            ArchiveRecord::SessionEvent(ev) => {
                if matches!(ev.change, SessionChange::Opened { .. }) {
                    self.sessions.insert(ev.session_id.clone());
                }
            }
        }
    }
}

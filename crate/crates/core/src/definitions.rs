//! Task type definitions: the nominal activity structure, the
//! informational-relation structure, the domain vocabulary and the
//! correspondences joining activities to element types.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ElementKind, Violation, ViolationCode};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskTypeDefinition {
    pub id: String,
    pub name: String,
    pub generic_task_type: String,
    pub application_area: String,
    pub tangible_outcome: String,
    pub activities: ActivityGraph,
    pub info_relations: InfoRelationGraph,
    #[serde(default)]
    pub vocabulary: Vec<VocabularyEntry>,
    #[serde(default)]
    pub correspondences: Vec<Correspondence>,
    pub version: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivityGraph {
    pub nodes: Vec<ActivityNode>,
    #[serde(default)]
    pub edges: Vec<Edge>,
    #[serde(default)]
    pub start: Vec<String>,
    #[serde(default)]
    pub end: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivityNode {
    pub id: String,
    pub label: String,
    #[serde(default)]
    pub description: String,
}

/// Nominal transition between two activities.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub from: String,
    pub to: String,
}

impl Edge {
    pub fn new(from: impl Into<String>, to: impl Into<String>) -> Self {
        Edge {
            from: from.into(),
            to: to.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfoRelationGraph {
    pub nodes: Vec<InfoTypeNode>,
    #[serde(default)]
    pub edges: Vec<InfoRelationEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfoTypeNode {
    pub id: String,
    pub label: String,
    pub kind: ElementKind,
}

/// Type-level relation between element types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum InfoRelation {
    #[serde(rename = "DS")]
    DemandSatisfaction,
    #[serde(rename = "RS")]
    ReferenceSupport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfoRelationEdge {
    pub from: String,
    pub to: String,
    pub relation: InfoRelation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabularyEntry {
    pub term: String,
    #[serde(default)]
    pub definition: String,
    #[serde(default)]
    pub synonyms: Vec<String>,
    #[serde(default)]
    pub maps_to: Vec<String>,
}

/// Joins an activity node to an informational-element type node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Correspondence {
    pub activity: String,
    pub info_relation: String,
}

impl TaskTypeDefinition {
    pub fn activity(&self, id: &str) -> Option<&ActivityNode> {
        self.activities.nodes.iter().find(|n| n.id == id)
    }

    pub fn info_node(&self, id: &str) -> Option<&InfoTypeNode> {
        self.info_relations.nodes.iter().find(|n| n.id == id)
    }

    pub fn has_node(&self, id: &str) -> bool {
        self.activity(id).is_some() || self.info_node(id).is_some()
    }

    pub fn is_start(&self, activity: &str) -> bool {
        self.activities.start.iter().any(|s| s == activity)
    }

    pub fn is_nominal_edge(&self, from: &str, to: &str) -> bool {
        self.activities.edges.iter().any(|e| e.from == from && e.to == to)
    }

    /// Whether moving from `from` (`None` before the first activity) to `to`
    /// follows the nominal structure.
    pub fn is_nominal_transition(&self, from: Option<&str>, to: &str) -> bool {
        match from {
            None => self.is_start(to),
            Some(from) => self.is_nominal_edge(from, to),
        }
    }

    /// Nominal successors of `activity`, in edge order, without duplicates.
    pub fn successors(&self, activity: &str) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.activities
            .edges
            .iter()
            .filter(|e| e.from == activity)
            .map(|e| e.to.as_str())
            .filter(|to| seen.insert(*to))
            .collect()
    }

    /// Case-insensitive lookup over terms and synonyms.
    pub fn lookup_term(&self, term: &str) -> Option<&VocabularyEntry> {
        let needle = term.trim().to_lowercase();
        self.vocabulary.iter().find(|entry| {
            entry.term.to_lowercase() == needle
                || entry.synonyms.iter().any(|s| s.to_lowercase() == needle)
        })
    }

    /// Nodes joined to `node` by a correspondence, in either direction.
    pub fn correspondences_of(&self, node: &str) -> Result<Vec<&str>> {
        if !self.has_node(node) {
            return Err(Error::UnknownNode(node.to_owned()));
        }
        let mut out: Vec<&str> = Vec::new();
        for c in &self.correspondences {
            let other = if c.activity == node {
                Some(c.info_relation.as_str())
            } else if c.info_relation == node {
                Some(c.activity.as_str())
            } else {
                None
            };
            if let Some(other) = other {
                if !out.contains(&other) {
                    out.push(other);
                }
            }
        }
        Ok(out)
    }

    /// Canonical JSON text of this definition.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("definition serializes")
    }
}

/// Parses and validates a definition document.
pub fn load_definition(document: &str) -> Result<TaskTypeDefinition> {
    let def: TaskTypeDefinition =
        serde_json::from_str(document).map_err(|e| Error::Parse(e.to_string()))?;
    let violations = validate_definition(&def);
    if violations.is_empty() {
        Ok(def)
    } else {
        Err(Error::Validation(violations))
    }
}

pub fn validate_definition(def: &TaskTypeDefinition) -> Vec<Violation> {
    let mut out = Vec::new();
    let v = |code, field: &str, msg: String| Violation::new(code, field, msg);

    for (field, value) in [
        ("id", &def.id),
        ("name", &def.name),
        ("generic_task_type", &def.generic_task_type),
        ("application_area", &def.application_area),
        ("tangible_outcome", &def.tangible_outcome),
    ] {
        if value.trim().is_empty() {
            out.push(v(ViolationCode::EmptyField, field, format!("{field} is empty")));
        }
    }
    if def.id.contains(crate::ids::NODE_REF_SEPARATOR) {
        out.push(v(ViolationCode::EmptyField, "id", "id must not contain `#`".into()));
    }

    let mut seen = HashSet::new();
    let all_ids = def
        .activities
        .nodes
        .iter()
        .map(|n| ("activities.nodes", n.id.as_str()))
        .chain(def.info_relations.nodes.iter().map(|n| ("info_relations.nodes", n.id.as_str())));
    for (field, id) in all_ids {
        if id.trim().is_empty() {
            out.push(v(ViolationCode::EmptyField, field, "node id is empty".into()));
        } else if !seen.insert(id) {
            out.push(v(ViolationCode::DuplicateNodeId, field, format!("`{id}` is declared twice")));
        }
    }

    let activity_ids: HashSet<&str> = def.activities.nodes.iter().map(|n| n.id.as_str()).collect();
    let info_ids: HashSet<&str> = def.info_relations.nodes.iter().map(|n| n.id.as_str()).collect();

    if def.activities.start.is_empty() {
        out.push(v(ViolationCode::NoStartNode, "activities.start", "no start node".into()));
    }
    if def.activities.end.is_empty() {
        out.push(v(ViolationCode::NoEndNode, "activities.end", "no end node".into()));
    }
    for s in &def.activities.start {
        if !activity_ids.contains(s.as_str()) {
            out.push(v(ViolationCode::UnknownStartNode, "activities.start", format!("`{s}`")));
        }
    }
    for e in &def.activities.end {
        if !activity_ids.contains(e.as_str()) {
            out.push(v(ViolationCode::UnknownEndNode, "activities.end", format!("`{e}`")));
        }
    }
    for edge in &def.activities.edges {
        for end in [&edge.from, &edge.to] {
            if !activity_ids.contains(end.as_str()) {
                out.push(v(
                    ViolationCode::DanglingEdge,
                    "activities.edges",
                    format!("{} -> {} names unknown `{end}`", edge.from, edge.to),
                ));
            }
        }
    }

    // Reachability from the start nodes along nominal edges.
    let mut adjacency: HashMap<&str, Vec<&str>> = HashMap::new();
    for edge in &def.activities.edges {
        adjacency.entry(edge.from.as_str()).or_default().push(edge.to.as_str());
    }
    let mut reached: HashSet<&str> = HashSet::new();
    let mut queue: VecDeque<&str> = def
        .activities
        .start
        .iter()
        .map(String::as_str)
        .filter(|s| activity_ids.contains(s))
        .collect();
    while let Some(node) = queue.pop_front() {
        if reached.insert(node) {
            queue.extend(adjacency.get(node).into_iter().flatten().copied());
        }
    }
    let mut reported = HashSet::new();
    for node in &def.activities.nodes {
        if !reached.contains(node.id.as_str()) && reported.insert(node.id.as_str()) {
            out.push(v(
                ViolationCode::UnreachableActivity,
                "activities.nodes",
                format!("`{}` is not reachable from a start node", node.id),
            ));
        }
    }

    for edge in &def.info_relations.edges {
        for end in [&edge.from, &edge.to] {
            if !info_ids.contains(end.as_str()) {
                out.push(v(
                    ViolationCode::DanglingEdge,
                    "info_relations.edges",
                    format!("{} -> {} names unknown `{end}`", edge.from, edge.to),
                ));
            }
        }
    }
    if has_ds_cycle(&def.info_relations) {
        out.push(v(
            ViolationCode::DsCycle,
            "info_relations.edges",
            "demand-satisfaction edges form a cycle".into(),
        ));
    }

    for c in &def.correspondences {
        if !activity_ids.contains(c.activity.as_str()) || !info_ids.contains(c.info_relation.as_str()) {
            out.push(v(
                ViolationCode::DanglingCorrespondence,
                "correspondences",
                format!("{} <-> {} does not join an activity and an element type", c.activity, c.info_relation),
            ));
        }
    }

    let mut terms = HashSet::new();
    for entry in &def.vocabulary {
        if entry.term.trim().is_empty() {
            out.push(v(ViolationCode::EmptyField, "vocabulary.term", "empty term".into()));
        } else if !terms.insert(entry.term.to_lowercase()) {
            out.push(v(ViolationCode::DuplicateTerm, "vocabulary.term", format!("`{}`", entry.term)));
        }
        for target in &entry.maps_to {
            if !activity_ids.contains(target.as_str()) && !info_ids.contains(target.as_str()) {
                out.push(v(
                    ViolationCode::DanglingVocabularyMapping,
                    "vocabulary.maps_to",
                    format!("`{}` maps to unknown `{target}`", entry.term),
                ));
            }
        }
    }
    out
}

/// Kahn's algorithm over the DS edges; leftover nodes mean a cycle.
fn has_ds_cycle(graph: &InfoRelationGraph) -> bool {
    let ds: Vec<(&str, &str)> = graph
        .edges
        .iter()
        .filter(|e| e.relation == InfoRelation::DemandSatisfaction)
        .map(|e| (e.from.as_str(), e.to.as_str()))
        .collect();
    let mut indegree: HashMap<&str, usize> = HashMap::new();
    for (from, to) in &ds {
        indegree.entry(from).or_default();
        *indegree.entry(to).or_default() += 1;
    }
    let mut ready: Vec<&str> = indegree.iter().filter(|(_, d)| **d == 0).map(|(n, _)| *n).collect();
    let mut removed = 0;
    while let Some(node) = ready.pop() {
        removed += 1;
        for (from, to) in &ds {
            if *from == node {
                let d = indegree.get_mut(to).expect("indexed");
                *d -= 1;
                if *d == 0 {
                    ready.push(to);
                }
            }
        }
    }
    removed != indegree.len()
}

/// Result of registering a definition version.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Registration {
    /// A new id or a higher version was stored.
    Added,
    /// The identical version was already registered.
    Unchanged,
}

#[derive(Debug, Clone)]
struct StoredDefinition {
    definition: Arc<TaskTypeDefinition>,
    canonical: String,
}

/// All registered versions of all definitions. Older versions are kept
/// verbatim so that running task instances keep their frame of reference.
#[derive(Debug, Clone, Default)]
pub struct DefinitionRegistry {
    versions: BTreeMap<String, BTreeMap<u32, StoredDefinition>>,
}

impl DefinitionRegistry {
    /// Decides what registering `def` would do, without storing it.
    pub fn check(&self, def: &TaskTypeDefinition) -> Result<Registration> {
        let violations = validate_definition(def);
        if !violations.is_empty() {
            return Err(Error::Validation(violations));
        }
        let Some(versions) = self.versions.get(&def.id) else {
            return Ok(Registration::Added);
        };
        match versions.last_key_value() {
            None => Ok(Registration::Added),
            Some((&latest, _)) if def.version > latest => Ok(Registration::Added),
            Some((&latest, _)) => {
                let same = versions
                    .get(&def.version)
                    .is_some_and(|s| s.canonical == def.to_canonical_json());
                if same {
                    Ok(Registration::Unchanged)
                } else {
                    Err(Error::StaleVersion {
                        id: def.id.clone(),
                        offered: def.version,
                        registered: latest,
                    })
                }
            }
        }
    }

    pub(crate) fn insert(&mut self, def: TaskTypeDefinition) {
        let canonical = def.to_canonical_json();
        self.versions.entry(def.id.clone()).or_default().insert(
            def.version,
            StoredDefinition {
                definition: Arc::new(def),
                canonical,
            },
        );
    }

    pub fn latest(&self, id: &str) -> Option<Arc<TaskTypeDefinition>> {
        self.versions
            .get(id)
            .and_then(|v| v.last_key_value())
            .map(|(_, s)| Arc::clone(&s.definition))
    }

    pub fn get(&self, id: &str, version: u32) -> Option<Arc<TaskTypeDefinition>> {
        self.versions
            .get(id)
            .and_then(|v| v.get(&version))
            .map(|s| Arc::clone(&s.definition))
    }

    /// Canonical bytes of a stored version.
    pub fn canonical_bytes(&self, id: &str, version: u32) -> Option<&str> {
        self.versions
            .get(id)
            .and_then(|v| v.get(&version))
            .map(|s| s.canonical.as_str())
    }

    pub fn contains(&self, id: &str) -> bool {
        self.versions.contains_key(id)
    }

    /// Latest version of every registered definition, by id.
    pub fn list(&self) -> Vec<Arc<TaskTypeDefinition>> {
        self.versions.keys().filter_map(|id| self.latest(id)).collect()
    }

    /// All versions of `id`, ascending.
    pub fn versions_of(&self, id: &str) -> Vec<u32> {
        self.versions
            .get(id)
            .map(|v| v.keys().copied().collect())
            .unwrap_or_default()
    }

    /// Whether any registered version of `task_type` declares `node`, and if
    /// so whether the newest such version declares it as an activity.
    pub fn node_role(&self, task_type: &str, node: &str) -> Option<NodeRole> {
        let versions = self.versions.get(task_type)?;
        versions.values().rev().find_map(|s| {
            if s.definition.activity(node).is_some() {
                Some(NodeRole::Activity)
            } else if s.definition.info_node(node).is_some() {
                Some(NodeRole::InfoType)
            } else {
                None
            }
        })
    }

    pub fn ids(&self) -> BTreeSet<&str> {
        self.versions.keys().map(String::as_str).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRole {
    Activity,
    InfoType,
}

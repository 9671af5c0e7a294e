//! Record vocabulary of the archive: informational elements, links and
//! provenance, plus the endpoint typing rules for links.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::argumentation::ArgumentNodeKind;
use crate::definitions::TaskTypeDefinition;
use crate::error::{Error, Result};
use crate::ids::{RecordId, Timestamp};

/// Generic informational element containers. Task types rename these
/// through their vocabulary; they never add new ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    Observation,
    Finding,
    Analysis,
    Hypothesis,
    Decision,
    Plan,
}

impl ElementKind {
    pub const ALL: [ElementKind; 6] = [
        ElementKind::Observation,
        ElementKind::Finding,
        ElementKind::Analysis,
        ElementKind::Hypothesis,
        ElementKind::Decision,
        ElementKind::Plan,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ElementKind::Observation => "observation",
            ElementKind::Finding => "finding",
            ElementKind::Analysis => "analysis",
            ElementKind::Hypothesis => "hypothesis",
            ElementKind::Decision => "decision",
            ElementKind::Plan => "plan",
        }
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ElementKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ElementKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidKind(s.to_owned()))
    }
}

/// Compact searchable stand-in for an element.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Surrogate {
    pub title: String,
    #[serde(default)]
    pub terms: Vec<String>,
}

impl Surrogate {
    pub fn new(title: impl Into<String>, terms: &[&str]) -> Self {
        Surrogate {
            title: title.into(),
            terms: terms.iter().map(|t| (*t).to_owned()).collect(),
        }
    }

    pub fn titled(title: impl Into<String>) -> Self {
        Surrogate {
            title: title.into(),
            terms: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub author: String,
    #[serde(default)]
    pub session: Option<RecordId>,
    #[serde(default)]
    pub source_document: Option<String>,
    #[serde(default)]
    pub situational_note: String,
}

impl Provenance {
    pub fn is_complete(&self) -> bool {
        self.session.is_some() || self.source_document.is_some()
    }
}

/// Where an element sits in the task performance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementContext {
    pub task_type: String,
    pub task_instance: String,
    pub activity_node: Option<String>,
    pub ie_type_node: Option<String>,
}

/// Immutable granular unit of articulated knowledge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InformationalElement {
    pub id: RecordId,
    pub kind: ElementKind,
    pub task_type: String,
    pub task_instance: String,
    #[serde(default)]
    pub activity_node: Option<String>,
    #[serde(default)]
    pub ie_type_node: Option<String>,
    pub content: String,
    pub surrogate: Surrogate,
    pub provenance: Provenance,
    pub created_at: Timestamp,
}

/// Builds an element with a fresh id and timestamp. The element is not persisted.
pub fn new_element(
    kind: ElementKind,
    content: impl Into<String>,
    surrogate: Surrogate,
    context: ElementContext,
    provenance: Provenance,
) -> Result<InformationalElement> {
    let content = content.into();
    if content.trim().is_empty() || surrogate.title.trim().is_empty() {
        return Err(Error::EmptyContent);
    }
    if !provenance.is_complete() {
        return Err(Error::MissingProvenance);
    }
    Ok(InformationalElement {
        id: RecordId::fresh(),
        kind,
        task_type: context.task_type,
        task_instance: context.task_instance,
        activity_node: context.activity_node,
        ie_type_node: context.ie_type_node,
        content,
        surrogate,
        provenance,
        created_at: Timestamp::now(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkType {
    DemandSatisfaction,
    ReferenceSupport,
    CategorizedAs,
    CorrespondsTo,
    Supersedes,
    RespondsTo,
    Supports,
    ObjectsTo,
    EvidencedBy,
}

impl LinkType {
    pub const ALL: [LinkType; 9] = [
        LinkType::DemandSatisfaction,
        LinkType::ReferenceSupport,
        LinkType::CategorizedAs,
        LinkType::CorrespondsTo,
        LinkType::Supersedes,
        LinkType::RespondsTo,
        LinkType::Supports,
        LinkType::ObjectsTo,
        LinkType::EvidencedBy,
    ];

    /// DS and RS: the relations that carry support and provenance.
    pub fn is_support(self) -> bool {
        matches!(self, LinkType::DemandSatisfaction | LinkType::ReferenceSupport)
    }
}

impl FromStr for LinkType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_owned()))
            .map_err(|_| Error::Parse(format!("unknown link type `{s}`")))
    }
}

/// Typed directed edge between archive records. For support relations the
/// source is the contributing record and the target the one it contributes to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    pub id: RecordId,
    pub link_type: LinkType,
    pub source: RecordId,
    pub target: RecordId,
    pub created_at: Timestamp,
    #[serde(default)]
    pub note: Option<String>,
}

impl Link {
    pub fn new(link_type: LinkType, source: RecordId, target: RecordId) -> Self {
        Link {
            id: RecordId::fresh(),
            link_type,
            source,
            target,
            created_at: Timestamp::now(),
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// What an identifier resolves to, as far as link typing is concerned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordKind {
    Element(ElementKind),
    DefinitionNode,
    Argument(ArgumentNodeKind),
    Link,
}

/// The endpoint legality table.
pub fn check_link_legal(link_type: LinkType, source: RecordKind, target: RecordKind) -> bool {
    use ArgumentNodeKind::{Argument, Issue, Position};
    use RecordKind as K;
    match link_type {
        LinkType::DemandSatisfaction => matches!((source, target), (K::Element(_), K::Element(_))),
        LinkType::ReferenceSupport => matches!(
            (source, target),
            (K::Element(_), K::Element(_)) | (K::Argument(Position), K::Element(_))
        ),
        LinkType::CategorizedAs => matches!((source, target), (K::Element(_), K::DefinitionNode)),
        LinkType::CorrespondsTo => {
            matches!((source, target), (K::DefinitionNode, K::DefinitionNode))
        }
        LinkType::Supersedes => matches!(
            (source, target),
            (K::Element(a), K::Element(b)) if a == b
        ),
        LinkType::RespondsTo => {
            matches!((source, target), (K::Argument(Position), K::Argument(Issue)))
        }
        LinkType::Supports | LinkType::ObjectsTo => {
            matches!((source, target), (K::Argument(Argument), K::Argument(Position)))
        }
        LinkType::EvidencedBy => matches!((source, target), (K::Argument(Argument), K::Element(_))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ViolationCode {
    EmptyContent,
    EmptySurrogateTitle,
    MissingProvenance,
    TaskTypeMismatch,
    UnknownTaskType,
    UnknownActivityNode,
    UnknownIeTypeNode,
    DuplicateId,
    SelfLink,
    IllegalLink,
    DsCycle,
    EmptyText,
    UnknownSession,
    EmptyField,
    DuplicateNodeId,
    NoStartNode,
    NoEndNode,
    UnknownStartNode,
    UnknownEndNode,
    DanglingEdge,
    UnreachableActivity,
    DanglingCorrespondence,
    DuplicateTerm,
    DanglingVocabularyMapping,
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// One broken invariant, with the field it concerns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub field: String,
    pub message: String,
}

impl Violation {
    pub fn new(code: ViolationCode, field: impl Into<String>, message: impl Into<String>) -> Self {
        Violation {
            code,
            field: field.into(),
            message: message.into(),
        }
    }
}

/// Checks an element against the definition its `task_type` names.
pub fn validate_element(element: &InformationalElement, def: &TaskTypeDefinition) -> Vec<Violation> {
    let mut out = Vec::new();
    if element.content.trim().is_empty() {
        out.push(Violation::new(ViolationCode::EmptyContent, "content", "content is empty"));
    }
    if element.surrogate.title.trim().is_empty() {
        out.push(Violation::new(
            ViolationCode::EmptySurrogateTitle,
            "surrogate.title",
            "surrogate title is empty",
        ));
    }
    if !element.provenance.is_complete() {
        out.push(Violation::new(
            ViolationCode::MissingProvenance,
            "provenance",
            "neither session nor source_document is set",
        ));
    }
    if element.task_type != def.id {
        out.push(Violation::new(
            ViolationCode::TaskTypeMismatch,
            "task_type",
            format!("element names `{}`, definition is `{}`", element.task_type, def.id),
        ));
    }
    if let Some(node) = &element.activity_node {
        if def.activity(node).is_none() {
            out.push(Violation::new(
                ViolationCode::UnknownActivityNode,
                "activity_node",
                format!("`{node}` is not an activity of `{}`", def.id),
            ));
        }
    }
    if let Some(node) = &element.ie_type_node {
        if def.info_node(node).is_none() {
            out.push(Violation::new(
                ViolationCode::UnknownIeTypeNode,
                "ie_type_node",
                format!("`{node}` is not an informational element type of `{}`", def.id),
            ));
        }
    }
    out
}

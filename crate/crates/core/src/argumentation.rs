//! Issue / position / argument graphs whose arguments point at archived
//! elements as evidence. Verification only walks the graph and reports what
//! it finds; it never weighs objections.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::archive::{ArchiveRecord, Direction};
use crate::contextualization::{ArticulationRequest, Articulated};
use crate::error::{Error, Result};
use crate::ids::{RecordId, Timestamp};
use crate::model::{ElementKind, Link, LinkType, Surrogate};
use crate::platform::Platform;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArgumentNodeKind {
    Issue,
    Position,
    Argument,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgumentNode {
    pub id: RecordId,
    pub node_kind: ArgumentNodeKind,
    pub text: String,
    pub author: String,
    pub created_at: Timestamp,
    pub task_instance: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stance {
    Supports,
    Objects,
}

impl Stance {
    pub fn link_type(self) -> LinkType {
        match self {
            Stance::Supports => LinkType::Supports,
            Stance::Objects => LinkType::ObjectsTo,
        }
    }
}

/// A node together with the links created alongside it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgumentPosted {
    pub node: ArgumentNode,
    pub links: Vec<Link>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportingArgument {
    pub argument: RecordId,
    pub evidence: Vec<RecordId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub position: RecordId,
    /// At least one supporting argument, and each one cites evidence that
    /// resolves to an archived element.
    pub grounded: bool,
    pub supports: Vec<SupportingArgument>,
    pub objections: Vec<RecordId>,
}

fn node(kind: ArgumentNodeKind, text: &str, author: &str, task_instance: &str) -> Result<ArgumentNode> {
    if text.trim().is_empty() {
        return Err(Error::EmptyText);
    }
    Ok(ArgumentNode {
        id: RecordId::fresh(),
        node_kind: kind,
        text: text.to_owned(),
        author: author.to_owned(),
        created_at: Timestamp::now(),
        task_instance: task_instance.to_owned(),
    })
}

impl Platform {
    fn parent_node(&self, id: &RecordId, kind: ArgumentNodeKind) -> Result<&ArgumentNode> {
        self.archive
            .argument_node(id)
            .filter(|n| n.node_kind == kind)
            .ok_or_else(|| Error::UnknownParent(id.clone()))
    }

    fn post_node(&mut self, node: ArgumentNode, links: Vec<Link>) -> Result<ArgumentPosted> {
        let mut records = vec![ArchiveRecord::ArgumentNode(node.clone())];
        records.extend(links.iter().cloned().map(ArchiveRecord::Link));
        self.commit(records)?;
        Ok(ArgumentPosted { node, links })
    }

    /// Opens an issue in the task instance of `session_id`, authored by its worker.
    pub fn raise_issue(&mut self, session_id: &RecordId, text: &str) -> Result<ArgumentPosted> {
        let session = self.open_session_ref(session_id)?;
        let issue = node(ArgumentNodeKind::Issue, text, &session.worker, &session.task_instance)?;
        self.post_node(issue, Vec::new())
    }

    pub fn take_position(&mut self, issue_id: &RecordId, text: &str, author: &str) -> Result<ArgumentPosted> {
        let issue = self.parent_node(issue_id, ArgumentNodeKind::Issue)?;
        let position = node(ArgumentNodeKind::Position, text, author, &issue.task_instance)?;
        let link = Link::new(LinkType::RespondsTo, position.id.clone(), issue_id.clone());
        self.post_node(position, vec![link])
    }

    pub fn argue(
        &mut self,
        position_id: &RecordId,
        stance: Stance,
        text: &str,
        author: &str,
        evidence: &[RecordId],
    ) -> Result<ArgumentPosted> {
        let position = self.parent_node(position_id, ArgumentNodeKind::Position)?;
        let argument = node(ArgumentNodeKind::Argument, text, author, &position.task_instance)?;
        if let Some(missing) = evidence.iter().find(|e| self.archive.element(e).is_none()) {
            return Err(Error::DanglingEvidence(missing.clone()));
        }
        let mut links = vec![Link::new(stance.link_type(), argument.id.clone(), position_id.clone())];
        let mut seen = BTreeSet::new();
        for e in evidence.iter().filter(|e| seen.insert(*e)) {
            links.push(Link::new(LinkType::EvidencedBy, argument.id.clone(), e.clone()));
        }
        self.post_node(argument, links)
    }

    /// Walks the arguments around a position. Read-only.
    pub fn verify(&self, position_id: &RecordId) -> Result<VerificationReport> {
        if self
            .archive
            .argument_node(position_id)
            .is_none_or(|n| n.node_kind != ArgumentNodeKind::Position)
        {
            return Err(Error::UnknownNode(position_id.to_string()));
        }
        let mut supports = Vec::new();
        let mut objections = Vec::new();
        for link in self
            .archive
            .links_of(position_id, Direction::In, &[LinkType::Supports, LinkType::ObjectsTo])?
        {
            if link.link_type == LinkType::ObjectsTo {
                objections.push(link.source.clone());
                continue;
            }
            let evidence = self
                .archive
                .links_of(&link.source, Direction::Out, &[LinkType::EvidencedBy])?
                .into_iter()
                .filter(|l| self.archive.element(&l.target).is_some())
                .map(|l| l.target.clone())
                .collect();
            supports.push(SupportingArgument {
                argument: link.source.clone(),
                evidence,
            });
        }
        let grounded = !supports.is_empty() && supports.iter().all(|s| !s.evidence.is_empty());
        Ok(VerificationReport {
            position: position_id.clone(),
            grounded,
            supports,
            objections,
        })
    }

    /// Brings a grounded position into the workspace as a decision element
    /// supported by the evidence behind it.
    pub fn conclude(&mut self, position_id: &RecordId, session_id: &RecordId) -> Result<Articulated> {
        let report = self.verify(position_id)?;
        if !report.grounded {
            return Err(Error::NotGrounded(position_id.clone()));
        }
        let text = self
            .archive
            .argument_node(position_id)
            .expect("verified position")
            .text
            .clone();
        let title = self
            .archive
            .links_of(position_id, Direction::Out, &[LinkType::RespondsTo])?
            .first()
            .and_then(|l| self.archive.argument_node(&l.target))
            .map_or_else(|| text.clone(), |issue| issue.text.clone());
        let mut supports: Vec<RecordId> = Vec::new();
        for id in report.supports.iter().flat_map(|s| &s.evidence) {
            if !supports.contains(id) {
                supports.push(id.clone());
            }
        }
        let request = ArticulationRequest {
            session_id: session_id.clone(),
            kind: ElementKind::Decision,
            surrogate: Surrogate::titled(title),
            content: text,
            supports,
            satisfies: Vec::new(),
            ie_type_node: None,
            note: Some(format!("concluded from position {position_id}")),
        };
        self.articulate_with(request, Some(position_id))
    }
}

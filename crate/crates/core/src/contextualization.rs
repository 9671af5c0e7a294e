//! Producing elements with their context attached: articulation inside a
//! running session, and transcription of legacy documents after the fact.

use serde::{Deserialize, Serialize};

use crate::archive::ArchiveRecord;
use crate::error::{Error, Result};
use crate::ids::RecordId;
use crate::model::{new_element, ElementContext, ElementKind, InformationalElement, Link, LinkType, Provenance, Surrogate};
use crate::platform::{ds_cycle_as_error, Platform};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticulationRequest {
    pub session_id: RecordId,
    pub kind: ElementKind,
    pub content: String,
    pub surrogate: Surrogate,
    /// Existing elements the new one rests on.
    #[serde(default)]
    pub supports: Vec<RecordId>,
    /// Existing elements whose demand the new one satisfies.
    #[serde(default)]
    pub satisfies: Vec<RecordId>,
    #[serde(default)]
    pub ie_type_node: Option<String>,
    /// Free text appended to the generated situational note.
    #[serde(default)]
    pub note: Option<String>,
}

impl ArticulationRequest {
    pub fn new(session_id: RecordId, kind: ElementKind, content: impl Into<String>, surrogate: Surrogate) -> Self {
        ArticulationRequest {
            session_id,
            kind,
            content: content.into(),
            surrogate,
            supports: Vec::new(),
            satisfies: Vec::new(),
            ie_type_node: None,
            note: None,
        }
    }

    pub fn supported_by(mut self, ids: impl IntoIterator<Item = RecordId>) -> Self {
        self.supports.extend(ids);
        self
    }

    pub fn satisfying(mut self, ids: impl IntoIterator<Item = RecordId>) -> Self {
        self.satisfies.extend(ids);
        self
    }

    pub fn as_ie_type(mut self, node: impl Into<String>) -> Self {
        self.ie_type_node = Some(node.into());
        self
    }
}

/// A new element and every link written with it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Articulated {
    pub element: InformationalElement,
    pub links: Vec<Link>,
}

impl Platform {
    /// Records an element at the session's current activity.
    pub fn articulate(&mut self, request: ArticulationRequest) -> Result<Articulated> {
        self.articulate_with(request, None)
    }

    /// Articulation with an extra reference-support source that need not be
    /// an element, as used when concluding an argument.
    pub(crate) fn articulate_with(
        &mut self,
        request: ArticulationRequest,
        extra_source: Option<&RecordId>,
    ) -> Result<Articulated> {
        let session = self.open_session_ref(&request.session_id)?;
        let activity = session.current_activity.clone().ok_or(Error::NoCurrentActivity)?;
        let def = self.pinned_definition(session);
        let ie_type = match &request.ie_type_node {
            Some(node) if def.info_node(node).is_some() => node.clone(),
            Some(node) => return Err(Error::UnknownNode(node.clone())),
            None => {
                let candidates: Vec<&str> = def
                    .correspondences_of(&activity)?
                    .into_iter()
                    .filter(|n| def.info_node(n).is_some())
                    .collect();
                match candidates.as_slice() {
                    [only] => (*only).to_owned(),
                    _ => {
                        return Err(Error::AmbiguousIeType {
                            activity,
                            candidates: candidates.into_iter().map(str::to_owned).collect(),
                        })
                    }
                }
            }
        };
        if let Some(missing) = request
            .supports
            .iter()
            .chain(&request.satisfies)
            .find(|id| self.archive.element(id).is_none())
        {
            return Err(Error::DanglingSupport(missing.clone()));
        }

        let previous = session
            .history
            .iter()
            .rev()
            .nth(1)
            .map(|t| t.to_activity.as_str())
            .unwrap_or("none");
        let mut note = format!(
            "{} v{} / instance {} / activity {activity} (previous: {previous}) / {} transitions so far",
            def.id,
            def.version,
            session.task_instance,
            session.history.len()
        );
        if let Some(extra) = &request.note {
            note.push_str(" / ");
            note.push_str(extra);
        }
        let element = new_element(
            request.kind,
            request.content,
            request.surrogate,
            ElementContext {
                task_type: def.id.clone(),
                task_instance: session.task_instance.clone(),
                activity_node: Some(activity.clone()),
                ie_type_node: Some(ie_type.clone()),
            },
            Provenance {
                author: session.worker.clone(),
                session: Some(session.session_id.clone()),
                source_document: None,
                situational_note: note,
            },
        )?;

        let id = element.id.clone();
        let mut links = vec![
            Link::new(LinkType::CategorizedAs, id.clone(), RecordId::node(&def.id, &activity)),
            Link::new(LinkType::CategorizedAs, id.clone(), RecordId::node(&def.id, &ie_type)),
        ];
        let mut supports: Vec<&RecordId> = Vec::new();
        for s in request.supports.iter().chain(extra_source) {
            if !supports.contains(&s) {
                supports.push(s);
            }
        }
        links.extend(
            supports
                .into_iter()
                .map(|s| Link::new(LinkType::ReferenceSupport, s.clone(), id.clone())),
        );
        let mut satisfied: Vec<&RecordId> = Vec::new();
        for s in &request.satisfies {
            if !satisfied.contains(&s) {
                satisfied.push(s);
            }
        }
        links.extend(
            satisfied
                .into_iter()
                .map(|s| Link::new(LinkType::DemandSatisfaction, id.clone(), s.clone())),
        );

        let mut records = vec![ArchiveRecord::Element(element.clone())];
        records.extend(links.iter().cloned().map(ArchiveRecord::Link));
        self.commit(records).map_err(ds_cycle_as_error)?;
        Ok(Articulated { element, links })
    }
}

/// A proposed segment: trimmed text with its byte span in the source.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateSegment {
    pub start: usize,
    pub end: usize,
    pub text: String,
}

/// Splits `text` into paragraphs at blank lines.
pub fn segment_document(text: &str) -> Vec<CandidateSegment> {
    fn push(out: &mut Vec<CandidateSegment>, text: &str, start: usize, end: usize) {
        let raw = &text[start..end];
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            return;
        }
        let s = start + (raw.len() - raw.trim_start().len());
        out.push(CandidateSegment {
            start: s,
            end: s + trimmed.len(),
            text: trimmed.to_owned(),
        });
    }
    let mut out = Vec::new();
    let mut paragraph: Option<(usize, usize)> = None;
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let end = offset + line.len();
        if line.trim().is_empty() {
            if let Some((s, e)) = paragraph.take() {
                push(&mut out, text, s, e);
            }
        } else {
            paragraph = Some((paragraph.map_or(offset, |(s, _)| s), end));
        }
        offset = end;
    }
    if let Some((s, e)) = paragraph {
        push(&mut out, text, s, e);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceDocument {
    pub text: String,
    pub reference: String,
}

/// Where a segment link points: another segment of the same job, or an
/// element already in the archive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentTarget {
    Segment(usize),
    Element(RecordId),
}

/// Link from the segment it is listed under to `target`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentLink {
    pub link_type: LinkType,
    #[serde(flatten)]
    pub target: SegmentTarget,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentSpec {
    /// Byte offset of the first byte.
    pub start: usize,
    /// Byte offset one past the last byte.
    pub end: usize,
    pub kind: ElementKind,
    #[serde(default)]
    pub title: Option<String>,
    #[serde(default)]
    pub terms: Vec<String>,
    /// Definition nodes of the job's task type to categorize the segment under.
    #[serde(default)]
    pub category_nodes: Vec<String>,
    #[serde(default)]
    pub links: Vec<SegmentLink>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptionJob {
    pub source: SourceDocument,
    pub task_type: String,
    /// Defaults to `transcription:<reference>`.
    #[serde(default)]
    pub task_instance: Option<String>,
    /// Defaults to `transcriber`.
    #[serde(default)]
    pub author: Option<String>,
    pub segments: Vec<SegmentSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcribed {
    pub elements: Vec<InformationalElement>,
    pub links: Vec<Link>,
}

fn default_title(text: &str) -> String {
    const MAX: usize = 60;
    let first_line = text.lines().next().unwrap_or_default().trim();
    match first_line.char_indices().nth(MAX) {
        Some((cut, _)) => format!("{}...", &first_line[..cut]),
        None => first_line.to_owned(),
    }
}

impl Platform {
    /// Moves segments of a legacy document into the archive, all or nothing.
    pub fn transcribe(&mut self, job: TranscriptionJob) -> Result<Transcribed> {
        let def = self.definition(&job.task_type)?;
        let text = &job.source.text;
        let mut previous_end = 0;
        for (index, seg) in job.segments.iter().enumerate() {
            let invalid = |reason: &str| Error::InvalidSegment {
                index,
                reason: reason.to_owned(),
            };
            if seg.start >= seg.end || seg.end > text.len() {
                return Err(invalid("span is empty or outside the source text"));
            }
            if !text.is_char_boundary(seg.start) || !text.is_char_boundary(seg.end) {
                return Err(invalid("span does not fall on character boundaries"));
            }
            if index > 0 && seg.start < previous_end {
                return Err(Error::OverlappingSegments { index });
            }
            previous_end = seg.end;
            if text[seg.start..seg.end].trim().is_empty() {
                return Err(invalid("span holds only whitespace"));
            }
            if let Some(node) = seg.category_nodes.iter().find(|n| !def.has_node(n)) {
                return Err(Error::UnknownNode(node.clone()));
            }
            for link in &seg.links {
                if !link.link_type.is_support() {
                    return Err(invalid("segment links must be demand_satisfaction or reference_support"));
                }
                match &link.target {
                    SegmentTarget::Segment(j) if *j >= job.segments.len() || *j == index => {
                        return Err(invalid("link names a missing segment or the segment itself"))
                    }
                    SegmentTarget::Element(id) if self.archive.element(id).is_none() => {
                        return Err(Error::DanglingSupport(id.clone()))
                    }
                    _ => {}
                }
            }
        }

        let instance = job
            .task_instance
            .clone()
            .unwrap_or_else(|| format!("transcription:{}", job.source.reference));
        let author = job.author.clone().unwrap_or_else(|| "transcriber".to_owned());
        let mut elements = Vec::with_capacity(job.segments.len());
        for seg in &job.segments {
            let content = text[seg.start..seg.end].trim().to_owned();
            let title = seg.title.clone().unwrap_or_else(|| default_title(&content));
            elements.push(new_element(
                seg.kind,
                content,
                Surrogate {
                    title,
                    terms: seg.terms.clone(),
                },
                ElementContext {
                    task_type: def.id.clone(),
                    task_instance: instance.clone(),
                    activity_node: None,
                    ie_type_node: None,
                },
                Provenance {
                    author: author.clone(),
                    session: None,
                    source_document: Some(job.source.reference.clone()),
                    situational_note: format!(
                        "transcribed from {} bytes {}..{}",
                        job.source.reference, seg.start, seg.end
                    ),
                },
            )?);
        }
        let mut links = Vec::new();
        for (seg, element) in job.segments.iter().zip(&elements) {
            for node in &seg.category_nodes {
                links.push(Link::new(
                    LinkType::CategorizedAs,
                    element.id.clone(),
                    RecordId::node(&def.id, node),
                ));
            }
            for link in &seg.links {
                let target = match &link.target {
                    SegmentTarget::Segment(j) => elements[*j].id.clone(),
                    SegmentTarget::Element(id) => id.clone(),
                };
                links.push(Link::new(link.link_type, element.id.clone(), target));
            }
        }
        let mut records: Vec<ArchiveRecord> = elements.iter().cloned().map(ArchiveRecord::Element).collect();
        records.extend(links.iter().cloned().map(ArchiveRecord::Link));
        self.commit(records).map_err(ds_cycle_as_error)?;
        Ok(Transcribed { elements, links })
    }
}

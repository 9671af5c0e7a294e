#![allow(dead_code)]

use kwsp_core::model::{new_element, ElementContext, Provenance};
use kwsp_core::{fixtures, Archive, ArchiveRecord, ElementKind, InformationalElement, Link, LinkType, RecordId, Surrogate};

pub const EXAM: &str = "examination";
pub const DETERMINATION: &str = "determination-of-possible-diseases";

pub fn archive() -> Archive {
    let mut a = Archive::in_memory();
    a.append(ArchiveRecord::Definition(fixtures::patient_care())).unwrap();
    a
}

pub fn element(kind: ElementKind, content: &str, instance: &str, activity: Option<&str>, ie_type: Option<&str>) -> InformationalElement {
    new_element(
        kind,
        content,
        Surrogate::titled(format!("note {}", content.split_whitespace().next().unwrap_or("x"))),
        ElementContext {
            task_type: "patient-care".into(),
            task_instance: instance.into(),
            activity_node: activity.map(str::to_owned),
            ie_type_node: ie_type.map(str::to_owned),
        },
        Provenance {
            author: "tester".into(),
            session: None,
            source_document: Some("generated".into()),
            situational_note: String::new(),
        },
    )
    .unwrap()
}

pub fn plain(content: &str) -> InformationalElement {
    element(ElementKind::Observation, content, "P1", Some(EXAM), None)
}

pub fn link(link_type: LinkType, source: &RecordId, target: &RecordId) -> ArchiveRecord {
    ArchiveRecord::Link(Link::new(link_type, source.clone(), target.clone()))
}

/// Reference tokenizer: lowercase, split on anything not alphanumeric,
/// keep tokens of at least two characters.
pub fn tokens(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    let mut out = Vec::new();
    let mut current = String::new();
    for c in lower.chars() {
        if c.is_alphanumeric() {
            current.push(c);
        } else {
            if current.chars().count() >= 2 {
                out.push(current.clone());
            }
            current.clear();
        }
    }
    if current.chars().count() >= 2 {
        out.push(current);
    }
    out
}

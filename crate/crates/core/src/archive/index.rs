//! Surrogate indexes over archived elements. Everything here is derivable
//! from the record log; the archive may drop and rebuild it at any time.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::model::{ElementKind, InformationalElement};

/// Lowercase, split on non-alphanumerics, keep tokens of two or more characters.
pub fn extract_terms(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() >= 2)
        .map(str::to_lowercase)
        .collect()
}

/// Every indexed token of an element: content, surrogate title and terms.
pub fn element_tokens(element: &InformationalElement) -> Vec<String> {
    let mut tokens = extract_terms(&element.content);
    tokens.extend(extract_terms(&element.surrogate.title));
    for term in &element.surrogate.terms {
        tokens.extend(extract_terms(term));
    }
    tokens
}

/// Conjunctive filter over surrogate attributes. An absent clause matches everything.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurrogateFilter {
    #[serde(default)]
    pub terms: Vec<String>,
    #[serde(default)]
    pub task_type: Option<String>,
    #[serde(default)]
    pub activity_node: Option<String>,
    #[serde(default)]
    pub ie_type_node: Option<String>,
    #[serde(default)]
    pub kind: Option<ElementKind>,
    #[serde(default)]
    pub task_instance: Option<String>,
}

impl SurrogateFilter {
    pub fn task_type(mut self, task_type: impl Into<String>) -> Self {
        self.task_type = Some(task_type.into());
        self
    }

    pub fn activity(mut self, node: impl Into<String>) -> Self {
        self.activity_node = Some(node.into());
        self
    }

    pub fn ie_type(mut self, node: impl Into<String>) -> Self {
        self.ie_type_node = Some(node.into());
        self
    }

    pub fn kind(mut self, kind: ElementKind) -> Self {
        self.kind = Some(kind);
        self
    }

    pub fn instance(mut self, instance: impl Into<String>) -> Self {
        self.task_instance = Some(instance.into());
        self
    }

    pub fn term(mut self, term: impl Into<String>) -> Self {
        self.terms.push(term.into());
        self
    }

    /// Normalized required tokens.
    pub fn normalized_terms(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for t in self.terms.iter().flat_map(|t| extract_terms(t)) {
            if !out.contains(&t) {
                out.push(t);
            }
        }
        out
    }
}

type Postings = BTreeSet<u64>;

/// Lookups from surrogate attributes to element sequence numbers.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurrogateIndex {
    all: Postings,
    terms: BTreeMap<String, Postings>,
    task_types: BTreeMap<String, Postings>,
    activities: BTreeMap<String, BTreeMap<String, Postings>>,
    ie_types: BTreeMap<String, BTreeMap<String, Postings>>,
    kinds: BTreeMap<ElementKind, Postings>,
    instances: BTreeMap<String, Postings>,
}

impl SurrogateIndex {
    pub(crate) fn insert_element(&mut self, seq: u64, element: &InformationalElement) {
        self.all.insert(seq);
        for token in element_tokens(element) {
            self.terms.entry(token).or_default().insert(seq);
        }
        self.task_types.entry(element.task_type.clone()).or_default().insert(seq);
        if let Some(node) = &element.activity_node {
            self.insert_activity(seq, &element.task_type, node);
        }
        if let Some(node) = &element.ie_type_node {
            self.insert_ie_type(seq, &element.task_type, node);
        }
        self.kinds.entry(element.kind).or_default().insert(seq);
        self.instances.entry(element.task_instance.clone()).or_default().insert(seq);
    }

    pub(crate) fn insert_activity(&mut self, seq: u64, task_type: &str, node: &str) {
        self.activities
            .entry(task_type.to_owned())
            .or_default()
            .entry(node.to_owned())
            .or_default()
            .insert(seq);
    }

    pub(crate) fn insert_ie_type(&mut self, seq: u64, task_type: &str, node: &str) {
        self.ie_types
            .entry(task_type.to_owned())
            .or_default()
            .entry(node.to_owned())
            .or_default()
            .insert(seq);
    }

    /// Sequence numbers of elements matching every clause, ascending.
    pub fn query(&self, filter: &SurrogateFilter) -> BTreeSet<u64> {
        let mut result = self.all.clone();
        let mut narrow = |set: Postings| {
            result = result.intersection(&set).copied().collect();
        };
        for term in filter.normalized_terms() {
            narrow(self.terms.get(&term).cloned().unwrap_or_default());
        }
        if let Some(tt) = &filter.task_type {
            narrow(self.task_types.get(tt).cloned().unwrap_or_default());
        }
        if let Some(node) = &filter.activity_node {
            narrow(node_postings(&self.activities, filter.task_type.as_deref(), node));
        }
        if let Some(node) = &filter.ie_type_node {
            narrow(node_postings(&self.ie_types, filter.task_type.as_deref(), node));
        }
        if let Some(kind) = filter.kind {
            narrow(self.kinds.get(&kind).cloned().unwrap_or_default());
        }
        if let Some(instance) = &filter.task_instance {
            narrow(self.instances.get(instance).cloned().unwrap_or_default());
        }
        result
    }

    pub fn len(&self) -> usize {
        self.all.len()
    }

    pub fn is_empty(&self) -> bool {
        self.all.is_empty()
    }
}

fn node_postings(
    map: &BTreeMap<String, BTreeMap<String, Postings>>,
    task_type: Option<&str>,
    node: &str,
) -> Postings {
    match task_type {
        Some(tt) => map.get(tt).and_then(|m| m.get(node)).cloned().unwrap_or_default(),
        None => map.values().filter_map(|m| m.get(node)).flatten().copied().collect(),
    }
}

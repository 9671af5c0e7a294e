//! Reading the archive back: ranked term search inside a surrogate filter,
//! support and provenance navigation, per-node history, and retrieval metrics.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::archive::{element_tokens, extract_terms, Direction, SurrogateFilter};
use crate::error::{Error, Result};
use crate::ids::RecordId;
use crate::model::{InformationalElement, Link, LinkType};
use crate::platform::Platform;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchRequest {
    pub terms: Vec<String>,
    #[serde(default)]
    pub filter: SurrogateFilter,
    pub limit: usize,
}

impl SearchRequest {
    pub fn new(terms: &[&str], filter: SurrogateFilter, limit: usize) -> Self {
        SearchRequest {
            terms: terms.iter().map(|t| (*t).to_owned()).collect(),
            filter,
            limit,
        }
    }

    /// Query tokens after normalization, first occurrence kept.
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

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedResult {
    pub id: RecordId,
    pub score: f64,
    pub rank: usize,
}

/// Term frequencies of one element.
pub(crate) fn term_counts(element: &InformationalElement) -> HashMap<String, usize> {
    let mut tf = HashMap::new();
    for token in element_tokens(element) {
        *tf.entry(token).or_insert(0) += 1;
    }
    tf
}

/// Smoothed inverse document frequency.
pub(crate) fn idf(n: usize, df: usize) -> f64 {
    ((n as f64 + 1.0) / (df as f64 + 1.0)).ln() + 1.0
}

/// Subgraph reached by walking support links backwards from `root`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenanceGraph {
    pub root: RecordId,
    /// Creation order. Usually elements; a decision concluded from an
    /// argument also reaches the position it came from.
    pub nodes: Vec<RecordId>,
    /// Creation order.
    pub links: Vec<Link>,
}

impl Platform {
    pub fn search(&self, request: &SearchRequest) -> Result<Vec<RankedResult>> {
        if request.limit == 0 {
            return Err(Error::InvalidLimit);
        }
        let terms = request.normalized_terms();
        if terms.is_empty() {
            return Ok(Vec::new());
        }
        let candidates: Vec<(&InformationalElement, HashMap<String, usize>)> = self
            .archive
            .query_surrogates(&request.filter)
            .iter()
            .filter_map(|id| self.archive.element(id))
            .map(|e| (e, term_counts(e)))
            .collect();
        let n = candidates.len();
        let weights: Vec<f64> = terms
            .iter()
            .map(|t| idf(n, candidates.iter().filter(|(_, tf)| tf.contains_key(t)).count()))
            .collect();
        let mut scored: Vec<(&InformationalElement, f64)> = candidates
            .iter()
            .map(|(e, tf)| {
                let score = terms
                    .iter()
                    .zip(&weights)
                    .map(|(t, w)| *tf.get(t).unwrap_or(&0) as f64 * w)
                    .sum();
                (*e, score)
            })
            .filter(|(_, s)| *s > 0.0)
            .collect();
        scored.sort_by(|(a, sa), (b, sb)| {
            sb.total_cmp(sa)
                .then(a.created_at.cmp(&b.created_at))
                .then(a.id.cmp(&b.id))
        });
        Ok(scored
            .into_iter()
            .take(request.limit)
            .enumerate()
            .map(|(i, (e, score))| RankedResult {
                id: e.id.clone(),
                score,
                rank: i + 1,
            })
            .collect())
    }

    /// Sources of support links into `id`, creation ascending.
    pub fn support_set(&self, id: &RecordId) -> Result<Vec<RecordId>> {
        let mut out: Vec<RecordId> = Vec::new();
        for link in self.support_links(id)? {
            if !out.contains(&link.source) {
                out.push(link.source.clone());
            }
        }
        Ok(out)
    }

    fn support_links(&self, id: &RecordId) -> Result<Vec<&Link>> {
        self.archive.links_of(
            id,
            Direction::In,
            &[LinkType::DemandSatisfaction, LinkType::ReferenceSupport],
        )
    }

    /// Everything `id` rests on, transitively, up to `max_depth` hops.
    pub fn provenance_closure(&self, id: &RecordId, max_depth: Option<usize>) -> Result<ProvenanceGraph> {
        if self.archive.get(id).is_none() {
            return Err(Error::UnknownRecord(id.clone()));
        }
        let mut visited: HashSet<RecordId> = HashSet::from([id.clone()]);
        let mut links: BTreeSet<(u64, RecordId)> = BTreeSet::new();
        let mut queue = VecDeque::from([(id.clone(), 0usize)]);
        while let Some((node, depth)) = queue.pop_front() {
            if max_depth.is_some_and(|max| depth >= max) {
                continue;
            }
            for link in self.support_links(&node)? {
                links.insert((self.archive.sequence_of(&link.id).expect("archived"), link.id.clone()));
                if visited.insert(link.source.clone()) {
                    queue.push_back((link.source.clone(), depth + 1));
                }
            }
        }
        let mut nodes: Vec<(u64, RecordId)> = visited
            .into_iter()
            .map(|n| (self.archive.sequence_of(&n).unwrap_or(0), n))
            .collect();
        nodes.sort();
        Ok(ProvenanceGraph {
            root: id.clone(),
            nodes: nodes.into_iter().map(|(_, n)| n).collect(),
            links: links
                .into_iter()
                .map(|(_, l)| self.archive.link(&l).expect("archived").clone())
                .collect(),
        })
    }

    /// Elements categorized under a definition node, across every instance.
    pub fn instances_under(&self, task_type: &str, node: &str) -> Result<Vec<RecordId>> {
        self.definition(task_type)?;
        if self.archive.definitions().node_role(task_type, node).is_none() {
            return Err(Error::UnknownNode(node.to_owned()));
        }
        Ok(self.categorized_under(task_type, node))
    }

    /// Elements with a categorized-as link to the node, creation ascending.
    pub(crate) fn categorized_under(&self, task_type: &str, node: &str) -> Vec<RecordId> {
        let mut out: Vec<RecordId> = Vec::new();
        let links = self
            .archive
            .links_of(&RecordId::node(task_type, node), Direction::In, &[LinkType::CategorizedAs])
            .unwrap_or_default();
        for link in links {
            if self.archive.element(&link.source).is_some() && !out.contains(&link.source) {
                out.push(link.source.clone());
            }
        }
        out
    }
}

/// Share of retrieved items that are relevant.
pub fn precision<T: Eq + std::hash::Hash>(retrieved: &HashSet<T>, relevant: &HashSet<T>) -> Result<f64> {
    if retrieved.is_empty() {
        return Err(Error::EmptyDenominator);
    }
    Ok(retrieved.intersection(relevant).count() as f64 / retrieved.len() as f64)
}

/// Share of relevant items that were retrieved.
pub fn recall<T: Eq + std::hash::Hash>(retrieved: &HashSet<T>, relevant: &HashSet<T>) -> Result<f64> {
    if relevant.is_empty() {
        return Err(Error::EmptyDenominator);
    }
    Ok(retrieved.intersection(relevant).count() as f64 / relevant.len() as f64)
}

//! Advisory hints for a running session. Nothing in here writes to the archive.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::archive::Direction;
use crate::error::{Error, Result};
use crate::exploration::{idf, term_counts};
use crate::ids::RecordId;
use crate::model::{InformationalElement, LinkType};
use crate::platform::Platform;
use crate::workspace::{SessionStatus, RECENT_ELEMENTS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecommendationKind {
    NextActivity,
    RelatedElement,
    CompletenessWarning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub kind: RecommendationKind,
    /// Activity or informational element type node id, or element id.
    pub subject: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    pub rationale: String,
}

fn times(n: u64) -> String {
    if n == 1 {
        "once".to_owned()
    } else {
        format!("{n} times")
    }
}

impl Platform {
    /// Likely next activities, nominal successors first.
    pub fn next_activities(&self, session_id: &RecordId) -> Result<Vec<Recommendation>> {
        let session = self.open_session_ref(session_id)?;
        let def = self.pinned_definition(session);
        let current = session.current_activity.as_deref();
        let nominal: Vec<&str> = match current {
            Some(a) => def.successors(a),
            None => def.activities.start.iter().map(String::as_str).collect(),
        };

        let mut observed: HashMap<&str, u64> = HashMap::new();
        for other in self
            .sessions()
            .filter(|s| s.task_type == session.task_type && s.status == SessionStatus::Completed)
        {
            for t in other.history.iter().filter(|t| t.from_activity.as_deref() == current) {
                *observed.entry(t.to_activity.as_str()).or_default() += 1;
            }
        }
        let deviant: BTreeSet<&str> = observed
            .keys()
            .copied()
            .filter(|to| !nominal.contains(to) && def.activity(to).is_some())
            .collect();
        let count = |to: &str| observed.get(to).copied().unwrap_or(0);
        let total: u64 = nominal.iter().map(|c| 1 + count(c)).sum::<u64>() + deviant.iter().map(|c| count(c)).sum::<u64>();
        let from = current.unwrap_or("the start");

        let mut ranked: Vec<(f64, &str, String)> = nominal
            .iter()
            .map(|c| {
                let n = count(c);
                (
                    (1 + n) as f64 / total as f64,
                    *c,
                    format!("nominal successor of {from}; taken {} in completed sessions", times(n)),
                )
            })
            .collect();
        ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(b.1)));
        let mut deviations: Vec<(f64, &str, String)> = deviant
            .iter()
            .map(|c| {
                let n = count(c);
                (
                    n as f64 / total as f64,
                    *c,
                    format!("deviation: not a nominal successor of {from}, but taken {} in completed sessions", times(n)),
                )
            })
            .collect();
        deviations.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(b.1)));
        ranked.extend(deviations);

        Ok(ranked
            .into_iter()
            .map(|(score, subject, rationale)| Recommendation {
                kind: RecommendationKind::NextActivity,
                subject: subject.to_owned(),
                score: Some(score),
                rationale,
            })
            .collect())
    }

    /// Elements from other instances of the same task type, filed under the
    /// element types of the current activity, most similar to recent work first.
    pub fn related_elements(&self, session_id: &RecordId, limit: usize) -> Result<Vec<Recommendation>> {
        if limit == 0 {
            return Err(Error::InvalidLimit);
        }
        let session = self.open_session_ref(session_id)?;
        let activity = session.current_activity.as_deref().ok_or(Error::NoCurrentActivity)?;
        let def = self.pinned_definition(session);

        let mut seen = HashSet::new();
        let mut candidates: Vec<&InformationalElement> = Vec::new();
        for node in def.correspondences_of(activity)?.into_iter().filter(|n| def.info_node(n).is_some()) {
            for id in self.categorized_under(&session.task_type, node) {
                let Some(e) = self.archive.element(&id) else { continue };
                if e.task_instance != session.task_instance && seen.insert(id) {
                    candidates.push(e);
                }
            }
        }
        if candidates.is_empty() {
            return Ok(Vec::new());
        }

        let mut query: HashMap<String, usize> = HashMap::new();
        for id in self.sessions.produced(session_id).iter().rev().take(RECENT_ELEMENTS) {
            if let Some(e) = self.archive.element(id) {
                for (t, c) in term_counts(e) {
                    *query.entry(t).or_default() += c;
                }
            }
        }
        let docs: Vec<HashMap<String, usize>> = candidates.iter().map(|e| term_counts(e)).collect();
        let n = candidates.len();
        let mut df: HashMap<&str, usize> = HashMap::new();
        for doc in &docs {
            for t in doc.keys() {
                *df.entry(t).or_default() += 1;
            }
        }
        let weight = |t: &str, tf: usize| tf as f64 * idf(n, df.get(t).copied().unwrap_or(0));
        let query_vec: HashMap<&str, f64> = query.iter().map(|(t, c)| (t.as_str(), weight(t, *c))).collect();
        let query_norm = query_vec.values().map(|w| w * w).sum::<f64>().sqrt();

        let mut scored: Vec<(f64, &InformationalElement, Vec<&str>)> = candidates
            .iter()
            .zip(&docs)
            .map(|(e, doc)| {
                let mut dot = 0.0;
                let mut norm = 0.0;
                let mut shared: Vec<&str> = Vec::new();
                for (t, c) in doc {
                    let w = weight(t, *c);
                    norm += w * w;
                    if let Some(q) = query_vec.get(t.as_str()) {
                        dot += w * q;
                        shared.push(t);
                    }
                }
                shared.sort_unstable();
                let cosine = if dot > 0.0 { dot / (norm.sqrt() * query_norm) } else { 0.0 };
                (cosine, *e, shared)
            })
            .collect();
        scored.sort_by(|(sa, a, _), (sb, b, _)| {
            let overlap = (*sb > 0.0).cmp(&(*sa > 0.0));
            overlap.then_with(|| {
                if *sa > 0.0 {
                    sb.total_cmp(sa)
                        .then(a.created_at.cmp(&b.created_at))
                        .then(a.id.cmp(&b.id))
                } else {
                    b.created_at.cmp(&a.created_at).then(b.id.cmp(&a.id))
                }
            })
        });

        Ok(scored
            .into_iter()
            .take(limit)
            .map(|(score, e, shared)| Recommendation {
                kind: RecommendationKind::RelatedElement,
                subject: e.id.to_string(),
                score: Some(score),
                rationale: if shared.is_empty() {
                    format!("filed under {} in instance {}; no terms shared with recent work", e.ie_type_node.as_deref().unwrap_or(activity), e.task_instance)
                } else {
                    format!("instance {} shares terms: {}", e.task_instance, shared.join(", "))
                },
            })
            .collect())
    }

    /// Element types expected at visited activities that this instance has
    /// not produced yet.
    pub fn completeness_warnings(&self, session_id: &RecordId) -> Result<Vec<Recommendation>> {
        let session = self.open_session_ref(session_id)?;
        let def = self.pinned_definition(session);

        let mut instantiated: HashSet<String> = HashSet::new();
        for e in self
            .archive
            .elements()
            .filter(|e| e.task_type == session.task_type && e.task_instance == session.task_instance)
        {
            instantiated.extend(e.ie_type_node.iter().cloned());
            for link in self.archive.links_of(&e.id, Direction::Out, &[LinkType::CategorizedAs])? {
                if let Some((tt, node)) = link.target.as_node_ref() {
                    if tt == session.task_type {
                        instantiated.insert(node.to_owned());
                    }
                }
            }
        }

        let mut out: Vec<Recommendation> = Vec::new();
        let mut warned: HashSet<&str> = HashSet::new();
        let mut visited: Vec<&str> = Vec::new();
        for t in &session.history {
            if !visited.contains(&t.to_activity.as_str()) {
                visited.push(&t.to_activity);
            }
        }
        for activity in visited {
            for node in def.correspondences_of(activity)?.into_iter().filter(|n| def.info_node(n).is_some()) {
                if !instantiated.contains(node) && warned.insert(node) {
                    out.push(Recommendation {
                        kind: RecommendationKind::CompletenessWarning,
                        subject: node.to_owned(),
                        score: None,
                        rationale: format!("{activity} was visited but no {node} has been recorded for {}", session.task_instance),
                    });
                }
            }
        }
        Ok(out)
    }
}

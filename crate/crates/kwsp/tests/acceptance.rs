//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit when any
//! criterion fails.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::{BufRead, BufReader};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Child, Command, Stdio};
use std::time::{Duration, Instant};

use kwsp_core::argumentation::Stance;
use kwsp_core::contextualization::ArticulationRequest;
use kwsp_core::exploration::SearchRequest;
use kwsp_core::fixtures::{self, LoanScenario, PatientCareScenario};
use kwsp_core::model::{new_element, ElementContext, Provenance};
use kwsp_core::workspace::SessionChange;
use kwsp_core::{
    precision, Archive, ArchiveRecord, ElementKind, Link, LinkType, Platform, RecordId, Surrogate, SurrogateFilter,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

// ---------------------------------------------------------------- fixtures

struct World {
    p: Platform,
    patient: PatientCareScenario,
    loan: LoanScenario,
    /// Elements articulated in the interleaved sessions.
    interleaved: Vec<RecordId>,
    cross_link: Link,
}

/// Both fixture scenarios, then a patient and a loan session worked in
/// alternation, then an RS link across the two task types.
fn world() -> Result<World, String> {
    let mut p = Platform::in_memory();
    let patient = ok(fixtures::seed_patient_care_scenario(&mut p))?;
    let loan = ok(fixtures::seed_loan_scenario(&mut p))?;
    let ps = ok(p.open_session("dr_c", "patient-care", "P3"))?.session_id;
    let ls = ok(p.open_session("officer_diaz", "loan-appraisal", "L3"))?.session_id;
    let say = |p: &mut Platform, s: &RecordId, kind, content: &str, supports: &[RecordId]| {
        let req = ArticulationRequest::new(s.clone(), kind, content, Surrogate::titled(content))
            .supported_by(supports.iter().cloned());
        p.articulate(req).map(|a| a.element.id).map_err(|e| e.to_string())
    };
    ok(p.advance(&ps, "examination", None))?;
    ok(p.advance(&ls, "application-intake", None))?;
    let a = say(&mut p, &ps, ElementKind::Observation, "fever and a spreading rash", &[])?;
    let b = say(&mut p, &ls, ElementKind::Observation, "retired applicant asking for a bridging loan", &[])?;
    ok(p.advance(&ps, "determination-of-possible-diseases", None))?;
    ok(p.advance(&ls, "credit-assessment", None))?;
    let c = say(&mut p, &ps, ElementKind::Hypothesis, "measles", std::slice::from_ref(&a))?;
    let d = say(&mut p, &ls, ElementKind::Finding, "credit score 700 with stable pension", std::slice::from_ref(&b))?;
    ok(p.complete_session(&ps))?;
    ok(p.complete_session(&ls))?;
    let cross_link = ok(p.link(
        LinkType::ReferenceSupport,
        patient.p1_plan.clone(),
        d.clone(),
        Some("treatment costs weighed in the appraisal".into()),
    ))?;
    Ok(World {
        p,
        patient,
        loan,
        interleaved: vec![a, b, c, d],
        cross_link,
    })
}

struct Case {
    task_type: &'static str,
    instance: &'static str,
    activity: &'static str,
    term: &'static str,
    term_node: &'static str,
}

const PATIENT: Case = Case {
    task_type: "patient-care",
    instance: "P1",
    activity: "examination",
    term: "first impression",
    term_node: "results-of-examination",
};

const LOAN: Case = Case {
    task_type: "loan-appraisal",
    instance: "L1",
    activity: "credit-assessment",
    term: "credit score",
    term_node: "credit-history-findings",
};

fn categorized_nodes(p: &Platform, id: &RecordId) -> Vec<String> {
    p.archive()
        .links()
        .filter(|l| l.link_type == LinkType::CategorizedAs && &l.source == id)
        .map(|l| l.target.to_string())
        .collect()
}

fn articulated(w: &World) -> Vec<RecordId> {
    let mut ids = w.patient.articulated.clone();
    ids.extend(w.loan.articulated.iter().cloned());
    ids.extend(w.interleaved.iter().cloned());
    ids
}

// ---------------------------------------------------------------- per task type checks

fn granularity(w: &World, case: &Case) -> Outcome {
    let p = &w.p;
    let filter = SurrogateFilter::default().instance(case.instance).activity(case.activity);
    let started = Instant::now();
    let got = p.archive().query_surrogates(&filter);
    let elapsed = started.elapsed();
    let node = RecordId::node(case.task_type, case.activity).to_string();
    let expected: Vec<RecordId> = p
        .archive()
        .elements()
        .filter(|e| e.task_instance == case.instance)
        .filter(|e| e.activity_node.as_deref() == Some(case.activity) || categorized_nodes(p, &e.id).contains(&node))
        .map(|e| e.id.clone())
        .collect();
    ensure!(!expected.is_empty(), "{}: nothing was produced at {}", case.task_type, case.activity);
    ensure!(got == expected, "{}: query {got:?} differs from scan {expected:?}", case.task_type);
    for id in &got {
        let e = ok(p.element(id))?;
        ensure!(
            e.content != w.patient.referral_text && e.content.len() < w.patient.referral_text.len(),
            "{id} holds a whole source document"
        );
    }
    ensure!(elapsed < Duration::from_secs(1), "query took {elapsed:?}");
    Ok(format!("{} elements for {}/{} in {elapsed:?}", got.len(), case.instance, case.activity))
}

fn historical_access(w: &World, case: &Case) -> Outcome {
    let p = &w.p;
    let def = ok(p.definition(case.task_type))?;
    let nodes: Vec<String> = def
        .activities
        .nodes
        .iter()
        .map(|n| n.id.clone())
        .chain(def.info_relations.nodes.iter().map(|n| n.id.clone()))
        .collect();
    let mut instances = BTreeSet::new();
    for node in &nodes {
        let target = RecordId::node(case.task_type, node);
        let mut expected: Vec<RecordId> = Vec::new();
        for l in p.archive().links() {
            if l.link_type == LinkType::CategorizedAs && l.target == target && !expected.contains(&l.source) {
                expected.push(l.source.clone());
            }
        }
        let got = ok(p.instances_under(case.task_type, node))?;
        ensure!(got == expected, "{}#{node}: {got:?} vs scan {expected:?}", case.task_type);
        for id in &got {
            if let Some(e) = p.archive().element(id) {
                instances.insert(e.task_instance.clone());
            }
        }
    }
    ensure!(instances.len() >= 3, "{}: only instances {instances:?}", case.task_type);
    Ok(format!("{} nodes, {} instances, exact", nodes.len(), instances.len()))
}

fn request_to_query(w: &World, case: &Case) -> Outcome {
    let p = &w.p;
    let def = ok(p.definition(case.task_type))?;
    let mut executed = 0;
    for entry in &def.vocabulary {
        let filters = def
            .activities
            .nodes
            .iter()
            .map(|n| SurrogateFilter::default().task_type(case.task_type).activity(n.id.clone()))
            .chain(entry.maps_to.iter().filter(|n| def.info_node(n).is_some()).map(|n| {
                SurrogateFilter::default().task_type(case.task_type).ie_type(n.clone())
            }))
            .chain(def.info_relations.nodes.iter().map(|n| SurrogateFilter::default().ie_type(n.id.clone())));
        for filter in filters {
            let terms: Vec<&str> = std::iter::once(entry.term.as_str()).chain(entry.synonyms.iter().map(String::as_str)).collect();
            ok(p.search(&SearchRequest::new(&terms, filter, 10)))?;
            executed += 1;
        }
    }
    let entry = def.lookup_term(case.term).ok_or(format!("`{}` does not resolve", case.term))?;
    ensure!(entry.maps_to.first().map(String::as_str) == Some(case.term_node), "`{}` maps to {:?}", case.term, entry.maps_to);
    let filter = SurrogateFilter::default().task_type(case.task_type).ie_type(entry.maps_to[0].clone());
    let hits = p.archive().query_surrogates(&filter);
    let node = RecordId::node(case.task_type, case.term_node).to_string();
    ensure!(!hits.is_empty(), "no element under {node}");
    for id in &hits {
        ensure!(categorized_nodes(p, id).contains(&node), "{id} is not under {node}");
    }
    Ok(format!("{executed} generated requests ran; `{}` filters {} elements", case.term, hits.len()))
}

fn surrogate_filters(case: &Case) -> Vec<SurrogateFilter> {
    let base = SurrogateFilter::default;
    let mut out = vec![
        base(),
        base().task_type(case.task_type),
        base().instance(case.instance),
        base().instance(case.instance).activity(case.activity),
        base().activity(case.activity),
        base().ie_type(case.term_node),
        base().task_type(case.task_type).ie_type(case.term_node),
        base().term("nothing-matches-this"),
        base().instance("P2"),
        base().instance("L2"),
        base().instance("P3").activity("examination"),
        base().instance("L3").activity("credit-assessment"),
        base().term("credit"),
        base().term("fever"),
        base().term("influenza").task_type("patient-care"),
        base().activity("diagnosis"),
        base().activity("lending-decision").term("loan"),
        base().ie_type("follow-up-notes"),
        base().ie_type("risk-analysis-report"),
    ];
    for kind in ElementKind::ALL {
        out.push(base().kind(kind));
        out.push(base().task_type(case.task_type).kind(kind));
    }
    out
}

fn surrogate_rebuild(w: &World, case: &Case) -> Outcome {
    let archive = w.p.archive();
    let rebuilt = archive.rebuild_index();
    let filters = surrogate_filters(case);
    ensure!(filters.len() >= 20, "only {} filters", filters.len());
    for f in &filters {
        let live = ok(serde_json::to_string(&archive.query_surrogates(f)))?;
        let fresh = ok(serde_json::to_string(&archive.query_index(&rebuilt, f)))?;
        ensure!(live == fresh, "filter {f:?} differs after rebuild");
    }
    ensure!(*archive.index() == rebuilt, "live index differs from a rebuild");
    Ok(format!("{} filters byte-identical", filters.len()))
}

fn contextualized_production(w: &World, case: &Case) -> Outcome {
    let p = &w.p;
    let mut count = 0;
    for id in articulated(w) {
        let e = ok(p.element(&id))?;
        if e.task_type != case.task_type {
            continue;
        }
        count += 1;
        let nodes = categorized_nodes(p, &id);
        ensure!(nodes.len() >= 2, "{id} has categorizations {nodes:?}");
        let activity = e.activity_node.clone().ok_or(format!("{id} has no activity"))?;
        ensure!(nodes.contains(&RecordId::node(case.task_type, &activity).to_string()), "{id} not under its activity");
        let session = e.provenance.session.clone().ok_or(format!("{id} names no session"))?;
        let worker = ok(p.session(&session))?.worker.clone();
        ensure!(e.provenance.is_complete() && e.provenance.author == worker, "{id} provenance {:?}", e.provenance);
        ensure!(!e.provenance.situational_note.is_empty(), "{id} has no situational note");
    }
    ensure!(count >= 4, "{}: only {count} articulated elements", case.task_type);
    let violations = p.archive().audit();
    ensure!(violations.is_empty(), "audit: {violations:?}");
    Ok(format!("{count} articulated elements contextualized, audit clean"))
}

// ---------------------------------------------------------------- criteria

fn criterion_granularity() -> Outcome {
    granularity(&world()?, &PATIENT)
}

fn criterion_historical_access() -> Outcome {
    historical_access(&world()?, &PATIENT)
}

fn criterion_request_to_query() -> Outcome {
    request_to_query(&world()?, &PATIENT)
}

fn criterion_surrogates() -> Outcome {
    surrogate_rebuild(&world()?, &PATIENT)
}

fn criterion_contextualized_production() -> Outcome {
    let w = world()?;
    let p = &w.p;
    let patients: BTreeSet<&str> = w
        .patient
        .articulated
        .iter()
        .filter_map(|id| p.archive().element(id))
        .map(|e| e.task_instance.as_str())
        .collect();
    ensure!(patients.len() >= 2, "scenario covers {patients:?}");
    ensure!(w.patient.articulated.len() >= 10, "scenario has {} elements", w.patient.articulated.len());
    ensure!(ok(p.verify(&w.patient.position))?.grounded, "scenario argument graph is not grounded");
    contextualized_production(&w, &PATIENT)
}

fn criterion_multi_type() -> Outcome {
    let w = world()?;
    ensure!(w.p.archive().definitions().list().len() == 2, "expected two registered task types");
    let mut details = Vec::new();
    for case in [&PATIENT, &LOAN] {
        for (name, check) in [
            ("granularity", granularity as fn(&World, &Case) -> Outcome),
            ("historical access", historical_access),
            ("request to query", request_to_query),
            ("surrogates", surrogate_rebuild),
            ("contextualized production", contextualized_production),
        ] {
            check(&w, case).map_err(|e| format!("{} {name}: {e}", case.task_type))?;
        }
        details.push(case.task_type);
    }
    let source = ok(w.p.element(&w.cross_link.source))?;
    let target = ok(w.p.element(&w.cross_link.target))?;
    ensure!(source.task_type != target.task_type, "link does not cross task types");
    ensure!(
        ok(w.p.support_set(&w.cross_link.target))?.contains(&w.cross_link.source),
        "cross-type support is not visible"
    );
    let graph = ok(w.p.provenance_closure(&w.cross_link.target, None))?;
    ensure!(graph.nodes.contains(&w.cross_link.source), "provenance does not cross into the other task type");
    Ok(format!("all suites pass for {details:?}; cross-type RS link accepted"))
}

// ---------------------------------------------------------------- precision

struct TypeSpec {
    task_type: &'static str,
    prefix: &'static str,
    words: [&'static str; 10],
}

const SHARED: [&str; 5] = ["history", "review", "pending", "approved", "urgent"];

fn corpus_activities(p: &Platform, task_type: &str) -> Result<Vec<(String, String, ElementKind)>, String> {
    let def = ok(p.definition(task_type))?;
    let mut out = Vec::new();
    for n in &def.activities.nodes {
        let nodes = ok(def.correspondences_of(&n.id))?;
        if let Some(first) = nodes.first() {
            let kind = def.info_node(first).map(|i| i.kind).ok_or("missing info node")?;
            out.push((n.id.clone(), first.to_string(), kind));
        }
    }
    Ok(out)
}

fn criterion_precision() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut p = Platform::in_memory();
    ok(p.load_definition(fixtures::PATIENT_CARE_JSON))?;
    ok(p.load_definition(fixtures::LOAN_APPRAISAL_JSON))?;
    let specs = [
        TypeSpec {
            task_type: "patient-care",
            prefix: "EP",
            words: ["fever", "cough", "rash", "pain", "influenza", "asthma", "antibiotics", "rest", "xray", "bloodwork"],
        },
        TypeSpec {
            task_type: "loan-appraisal",
            prefix: "EL",
            words: ["income", "collateral", "default", "credit", "property", "salary", "risk", "sanction", "repayment", "valuation"],
        },
    ];
    // (task type, activity, id, content words) for every generated element.
    let mut corpus: Vec<(&str, String, RecordId, Vec<String>)> = Vec::new();
    for spec in &specs {
        let steps = corpus_activities(&p, spec.task_type)?;
        for i in 0..12 {
            let s = ok(p.open_session("evaluator", spec.task_type, &format!("{}{i}", spec.prefix)))?.session_id;
            for (activity, ie_type, kind) in &steps {
                ok(p.advance(&s, activity, None))?;
                for _ in 0..2 {
                    let words: Vec<String> = (0..4)
                        .map(|_| {
                            if rng.random_bool(0.3) {
                                SHARED[rng.random_range(0..SHARED.len())].to_owned()
                            } else {
                                spec.words[rng.random_range(0..spec.words.len())].to_owned()
                            }
                        })
                        .collect();
                    let text = words.join(" ");
                    let req = ArticulationRequest::new(s.clone(), *kind, text.clone(), Surrogate::titled(format!("note {}", words[0])))
                        .as_ie_type(ie_type.clone());
                    let id = ok(p.articulate(req))?.element.id;
                    corpus.push((spec.task_type, activity.clone(), id, words));
                }
            }
            ok(p.complete_session(&s))?;
        }
    }
    ensure!(corpus.len() >= 200, "corpus has {} elements", corpus.len());

    let mut lines = Vec::new();
    let mut strictly_better = 0;
    for q in 0..10 {
        let (task_type, activity, _, words) = corpus[rng.random_range(0..corpus.len())].clone();
        let term = if q % 2 == 0 {
            words.iter().find(|w| SHARED.contains(&w.as_str())).unwrap_or(&words[0]).clone()
        } else {
            words[0].clone()
        };
        let relevant: HashSet<RecordId> = corpus
            .iter()
            .filter(|(t, a, _, ws)| *t == task_type && *a == activity && ws.contains(&term))
            .map(|(_, _, id, _)| id.clone())
            .collect();
        let run = |filter: SurrogateFilter| -> Result<HashSet<RecordId>, String> {
            Ok(ok(p.search(&SearchRequest::new(&[term.as_str()], filter, 10)))?
                .into_iter()
                .map(|r| r.id)
                .collect())
        };
        let plain = run(SurrogateFilter::default())?;
        let scoped = run(SurrogateFilter::default().task_type(task_type).activity(activity.clone()))?;
        let without = ok(precision(&plain, &relevant))?;
        let with = ok(precision(&scoped, &relevant))?;
        ensure!(with >= without, "query {q} `{term}` at {task_type}/{activity}: {with:.2} < {without:.2}");
        if with > without {
            strictly_better += 1;
        }
        lines.push(format!("{with:.2}>={without:.2}"));
    }
    let elapsed = started.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "suite took {elapsed:?}");
    Ok(format!(
        "{} elements, 10 queries [{}], {strictly_better} strictly better, {elapsed:?}",
        corpus.len(),
        lines.join(" ")
    ))
}

// ---------------------------------------------------------------- oracle equivalences

fn raw_element(content: &str) -> kwsp_core::InformationalElement {
    new_element(
        ElementKind::Observation,
        content,
        Surrogate::titled(content),
        ElementContext {
            task_type: "patient-care".into(),
            task_instance: "P1".into(),
            activity_node: Some("examination".into()),
            ie_type_node: None,
        },
        Provenance {
            author: "generator".into(),
            session: None,
            source_document: Some("generated".into()),
            situational_note: String::new(),
        },
    )
    .expect("generated element is valid")
}

fn provenance_oracle(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let mut checked = 0;
    for _ in 0..80 {
        let n = rng.random_range(1..=16);
        let mut a = Archive::in_memory();
        ok(a.append(ArchiveRecord::Definition(fixtures::patient_care())))?;
        let ids: Vec<RecordId> = (0..n)
            .map(|i| {
                let e = raw_element(&format!("element {i}"));
                let id = e.id.clone();
                a.append(ArchiveRecord::Element(e)).map(|_| id).map_err(|e| e.to_string())
            })
            .collect::<Result<_, _>>()?;
        let mut links: Vec<(usize, usize, RecordId)> = Vec::new();
        for _ in 0..rng.random_range(0..33) {
            let (s, t, ds) = (rng.random_range(0..n), rng.random_range(0..n), rng.random_bool(0.5));
            if s == t || (ds && s <= t) {
                continue;
            }
            let lt = if ds { LinkType::DemandSatisfaction } else { LinkType::ReferenceSupport };
            let link = Link::new(lt, ids[s].clone(), ids[t].clone());
            links.push((s, t, link.id.clone()));
            ok(a.append(ArchiveRecord::Link(link)))?;
        }
        ensure!(a.len() <= 50, "archive of {} records", a.len());
        let p = Platform::from_archive(a);
        for root in 0..n {
            let depth = if rng.random_bool(0.5) { Some(rng.random_range(0..5)) } else { None };
            let hops = depth.unwrap_or(n);
            // Reachability by fixpoint iteration, one hop per round.
            let mut levels = vec![BTreeSet::from([root])];
            for _ in 0..hops {
                let mut next = levels.last().unwrap().clone();
                for (s, t, _) in &links {
                    if levels.last().unwrap().contains(t) {
                        next.insert(*s);
                    }
                }
                levels.push(next);
            }
            let expanded = if hops == 0 { BTreeSet::new() } else { levels[hops - 1].clone() };
            let expected_links: BTreeSet<RecordId> =
                links.iter().filter(|(_, t, _)| expanded.contains(t)).map(|(_, _, id)| id.clone()).collect();
            let graph = ok(p.provenance_closure(&ids[root], depth))?;
            let nodes: BTreeSet<usize> = graph.nodes.iter().filter_map(|id| ids.iter().position(|x| x == id)).collect();
            let got_links: BTreeSet<RecordId> = graph.links.iter().map(|l| l.id.clone()).collect();
            ensure!(nodes == levels[hops], "closure nodes differ for root {root}");
            ensure!(got_links == expected_links, "closure links differ for root {root}");
            checked += 1;
        }
    }
    Ok(checked)
}

fn grounded_oracle(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let mut checked = 0;
    for _ in 0..60 {
        let mut p = Platform::in_memory();
        ok(p.load_definition(fixtures::PATIENT_CARE_JSON))?;
        let s = ok(p.open_session("dr_a", "patient-care", "P1"))?.session_id;
        ok(p.advance(&s, "examination", None))?;
        let evidence: Vec<RecordId> = (0..rng.random_range(1..4))
            .map(|i| {
                p.articulate(ArticulationRequest::new(s.clone(), ElementKind::Observation, format!("finding {i}"), Surrogate::titled("finding")))
                    .map(|a| a.element.id)
                    .map_err(|e| e.to_string())
            })
            .collect::<Result<_, _>>()?;
        let issue = ok(p.raise_issue(&s, "what is going on?"))?.node.id;
        let positions: Vec<RecordId> = (0..rng.random_range(1..6))
            .map(|i| p.take_position(&issue, &format!("answer {i}"), "dr_a").map(|x| x.node.id).map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
        let args = rng.random_range(0..(30 - 1 - positions.len()));
        for _ in 0..args {
            let target = &positions[rng.random_range(0..positions.len())];
            let stance = if rng.random_bool(0.6) { Stance::Supports } else { Stance::Objects };
            let ev: Vec<RecordId> = (0..rng.random_range(0..3)).map(|_| evidence[rng.random_range(0..evidence.len())].clone()).collect();
            ok(p.argue(target, stance, "because", "dr_a", &ev))?;
        }
        ensure!(1 + positions.len() + args <= 30, "graph too large");
        let links: Vec<Link> = p.archive().links().cloned().collect();
        let elements: HashSet<RecordId> = p.archive().elements().map(|e| e.id.clone()).collect();
        for position in &positions {
            let supporting: Vec<&RecordId> = links
                .iter()
                .filter(|l| l.link_type == LinkType::Supports && &l.target == position)
                .map(|l| &l.source)
                .collect();
            let expected = !supporting.is_empty()
                && supporting.iter().all(|arg| {
                    links
                        .iter()
                        .any(|l| l.link_type == LinkType::EvidencedBy && &l.source == *arg && elements.contains(&l.target))
                });
            ensure!(ok(p.verify(position))?.grounded == expected, "grounded differs for {position}");
            checked += 1;
        }
    }
    Ok(checked)
}

const ACTIVITIES: [&str; 6] = [
    "examination",
    "determination-of-possible-diseases",
    "diagnostic-testing",
    "diagnosis",
    "treatment-planning",
    "follow-up",
];

fn next_activity_oracle(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let def = fixtures::patient_care();
    let mut checked = 0;
    for _ in 0..30 {
        let mut p = Platform::in_memory();
        ok(p.load_definition(fixtures::PATIENT_CARE_JSON))?;
        let sessions = rng.random_range(0..50);
        for i in 0..sessions {
            let s = ok(p.open_session("w", "patient-care", &format!("H{i}")))?.session_id;
            for _ in 0..rng.random_range(0..7) {
                ok(p.advance(&s, ACTIVITIES[rng.random_range(0..ACTIVITIES.len())], None))?;
            }
            match rng.random_range(0..3) {
                0 => drop(ok(p.complete_session(&s))?),
                1 => drop(ok(p.abandon_session(&s))?),
                _ => {}
            }
        }
        let probe = ok(p.open_session("probe", "patient-care", "PROBE"))?.session_id;
        let mut current = None;
        for _ in 0..rng.random_range(0..4) {
            let a = ACTIVITIES[rng.random_range(0..ACTIVITIES.len())];
            ok(p.advance(&probe, a, None))?;
            current = Some(a);
        }
        // Recount straight from the archived session events.
        let completed: HashSet<RecordId> = p
            .archive()
            .session_events()
            .filter(|ev| matches!(ev.change, SessionChange::Completed))
            .map(|ev| ev.session_id.clone())
            .collect();
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        for ev in p.archive().session_events() {
            if let SessionChange::Advanced { from_activity, to_activity, .. } = &ev.change {
                if completed.contains(&ev.session_id) && from_activity.as_deref() == current {
                    *counts.entry(to_activity.clone()).or_default() += 1;
                }
            }
        }
        let nominal: Vec<String> = match current {
            Some(a) => def.activities.edges.iter().filter(|e| e.from == a).map(|e| e.to.clone()).collect(),
            None => def.activities.start.clone(),
        };
        let c = |k: &String| counts.get(k).copied().unwrap_or(0);
        let deviant: Vec<String> = counts.keys().filter(|k| !nominal.contains(k)).cloned().collect();
        let total = nominal.iter().map(|k| 1 + c(k)).sum::<u64>() + deviant.iter().map(c).sum::<u64>();
        let by_score = |a: &(String, f64), b: &(String, f64)| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0));
        let mut expected: Vec<(String, f64)> = nominal.iter().map(|k| (k.clone(), (1 + c(k)) as f64 / total as f64)).collect();
        expected.sort_by(by_score);
        let mut tail: Vec<(String, f64)> = deviant.iter().map(|k| (k.clone(), c(k) as f64 / total as f64)).collect();
        tail.sort_by(by_score);
        expected.extend(tail);
        let got: Vec<(String, f64)> = ok(p.next_activities(&probe))?
            .into_iter()
            .map(|r| (r.subject, r.score.unwrap_or(f64::NAN)))
            .collect();
        ensure!(got == expected, "ranking {got:?} differs from recount {expected:?}");
        checked += 1;
    }
    Ok(checked)
}

fn criterion_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let closures = provenance_oracle(&mut rng)?;
    let grounded = grounded_oracle(&mut rng)?;
    let rankings = next_activity_oracle(&mut rng)?;
    Ok(format!(
        "{closures} closures, {grounded} verifications, {rankings} rankings matched exactly"
    ))
}

// ---------------------------------------------------------------- durability

struct Service {
    child: Child,
    base: String,
}

impl Service {
    fn start(data: &Path) -> Result<Service, String> {
        let mut child = ok(Command::new(env!("CARGO_BIN_EXE_kwsp"))
            .args(["serve", "--addr", "127.0.0.1:0", "--data"])
            .arg(data)
            .env_remove("KWSP_TOKEN")
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn())?;
        let stdout = child.stdout.take().ok_or("no stdout")?;
        let mut line = String::new();
        ok(BufReader::new(stdout).read_line(&mut line))?;
        let addr = line.trim().strip_prefix("listening on ").ok_or(format!("unexpected banner `{line}`"))?;
        Ok(Service {
            child,
            base: format!("http://{addr}"),
        })
    }

    fn kill(mut self) -> Result<(), String> {
        ok(self.child.kill())?;
        ok(self.child.wait())?;
        Ok(())
    }
}

fn http() -> reqwest::blocking::Client {
    reqwest::blocking::Client::builder().timeout(Duration::from_secs(10)).build().expect("client builds")
}

fn send(req: reqwest::blocking::RequestBuilder) -> Result<(u16, Value), String> {
    let resp = ok(req.send())?;
    let status = resp.status().as_u16();
    let text = ok(resp.text())?;
    Ok((status, serde_json::from_str(&text).unwrap_or(Value::String(text))))
}

fn criterion_durability() -> Outcome {
    let mut p = Platform::in_memory();
    ok(fixtures::seed_patient_care_scenario(&mut p))?;
    ok(fixtures::seed_loan_scenario(&mut p))?;
    let first = p.export_string();
    let mut q = Platform::in_memory();
    ok(q.import_from(first.as_bytes()))?;
    ensure!(q.export_string() == first, "export after import differs");

    let dir = ok(tempfile::tempdir())?;
    let data = dir.path().join("served");
    let client = http();
    let service = Service::start(&data)?;
    let base = service.base.clone();
    let (status, _) = send(client.put(format!("{base}/task-types")).body(fixtures::PATIENT_CARE_JSON))?;
    ensure!(status == 201, "definition load answered {status}");
    let (_, session) = send(client.post(format!("{base}/sessions")).json(&json!({
        "worker": "dr_k", "task_type": "patient-care", "task_instance": "PK"
    })))?;
    let sid = session["session_id"].as_str().ok_or("no session id")?.to_owned();
    send(client.post(format!("{base}/sessions/{sid}/advance")).json(&json!({"to_activity": "examination"})))?;
    let mut acknowledged: Vec<(String, Value)> = Vec::new();
    let articulate = |acknowledged: &mut Vec<(String, Value)>, base: &str, i: usize| -> Result<(), String> {
        let (status, body) = send(client.post(format!("{base}/sessions/{sid}/elements")).json(&json!({
            "kind": "observation",
            "content": format!("reading {i}: temperature {}", 36 + i % 4),
            "surrogate": {"title": format!("reading {i}"), "terms": ["temperature"]},
        })))?;
        ensure!(status == 201, "append {i} answered {status}: {body}");
        let id = body["element"]["id"].as_str().ok_or("no element id")?.to_owned();
        acknowledged.push((id, body["element"].clone()));
        Ok(())
    };
    for i in 0..25 {
        articulate(&mut acknowledged, &base, i)?;
    }
    let (_, before) = send(client.get(format!("{base}/search?q=temperature&limit=100")))?;
    service.kill()?;

    let service = Service::start(&data)?;
    let base = service.base.clone();
    for (id, element) in &acknowledged {
        let (status, got) = send(client.get(format!("{base}/elements/{id}")))?;
        ensure!(status == 200 && &got == element, "acknowledged {id} lost after kill ({status})");
    }
    let (_, after) = send(client.get(format!("{base}/search?q=temperature&limit=100")))?;
    ensure!(before == after, "search results changed across the restart");
    // The session survived too: keep working in it, then kill again.
    for i in 25..40 {
        articulate(&mut acknowledged, &base, i)?;
    }
    let exported = ok(ok(client.get(format!("{base}/export")).send())?.text())?;
    service.kill()?;

    let reopened = ok(Platform::open(&data))?;
    ensure!(reopened.export_string() == exported, "archive on disk differs from the last export");
    for (id, _) in &acknowledged {
        ensure!(reopened.archive().element(&RecordId::new(id.as_str())).is_some(), "{id} missing on disk");
    }
    ensure!(reopened.archive().audit().is_empty(), "audit after restart is not clean");
    Ok(format!(
        "export round trip byte-identical ({} lines); {} acknowledged appends survived two kills",
        first.lines().count(),
        acknowledged.len()
    ))
}

// ---------------------------------------------------------------- double loop

fn criterion_double_loop() -> Outcome {
    let mut p = Platform::in_memory();
    ok(p.load_definition(fixtures::PATIENT_CARE_JSON))?;
    let s = ok(p.open_session("dr_a", "patient-care", "P1"))?.session_id;
    for step in ["examination", "determination-of-possible-diseases", "diagnostic-testing"] {
        ensure!(!ok(p.advance(&s, step, None))?.deviation, "{step} flagged as deviation");
    }
    ensure!(ok(p.advance(&s, "follow-up", Some("patient discharged early")))?.deviation, "jump not flagged");
    ok(p.complete_session(&s))?;
    let report = ok(p.deviation_report("patient-care"))?;
    ensure!(report.nominal_total == 3, "nominal total {}", report.nominal_total);
    ensure!(report.deviant_total == 1, "deviant total {}", report.deviant_total);
    let jump = report.deviations.iter().find(|d| d.to == "follow-up").ok_or("deviation not listed")?;
    ensure!(jump.from.as_deref() == Some("diagnostic-testing") && jump.count == 1, "deviation {jump:?}");
    Ok(format!("{} nominal, {} deviant", report.nominal_total, report.deviant_total))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("granularity", criterion_granularity),
        ("historical access", criterion_historical_access),
        ("request to query", criterion_request_to_query),
        ("surrogates", criterion_surrogates),
        ("contextualized production", criterion_contextualized_production),
        ("multiple task types", criterion_multi_type),
        ("precision with context", criterion_precision),
        ("oracle equivalences", criterion_oracles),
        ("durability", criterion_durability),
        ("double-loop report", criterion_double_loop),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(reason) => {
                failures += 1;
                println!("FAIL {name}: {reason}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}

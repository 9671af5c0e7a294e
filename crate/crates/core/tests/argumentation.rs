use std::collections::{BTreeSet, HashSet};

use kwsp_core::argumentation::Stance;
use kwsp_core::contextualization::ArticulationRequest;
use kwsp_core::{fixtures, ElementKind, LinkType, Platform, RecordId, Surrogate};
use proptest::prelude::*;

struct Graph {
    platform: Platform,
    positions: Vec<RecordId>,
    nodes: usize,
}

/// One issue, `positions` positions, and one argument per entry of `args`
/// as (position index, supports?, evidence element indexes).
fn build(observations: usize, positions: usize, args: &[(usize, bool, Vec<usize>)]) -> Graph {
    let mut p = Platform::in_memory();
    p.load_definition(fixtures::PATIENT_CARE_JSON).unwrap();
    let s = p.open_session("dr_a", "patient-care", "P1").unwrap().session_id;
    p.advance(&s, "examination", None).unwrap();
    let evidence: Vec<RecordId> = (0..observations)
        .map(|i| {
            p.articulate(ArticulationRequest::new(
                s.clone(),
                ElementKind::Observation,
                format!("finding {i}"),
                Surrogate::titled("finding"),
            ))
            .unwrap()
            .element
            .id
        })
        .collect();
    let issue = p.raise_issue(&s, "what is going on?").unwrap().node.id;
    let position_ids: Vec<RecordId> = (0..positions)
        .map(|i| p.take_position(&issue, &format!("answer {i}"), "dr_a").unwrap().node.id)
        .collect();
    for (pos, supports, ev) in args {
        let stance = if *supports { Stance::Supports } else { Stance::Objects };
        let ev: Vec<RecordId> = ev.iter().map(|i| evidence[*i].clone()).collect();
        p.argue(&position_ids[*pos], stance, "because", "dr_a", &ev).unwrap();
    }
    Graph {
        platform: p,
        positions: position_ids,
        nodes: 1 + positions + args.len(),
    }
}

fn graphs() -> impl Strategy<Value = (usize, usize, Vec<(usize, bool, Vec<usize>)>)> {
    (1usize..4, 1usize..6).prop_flat_map(|(obs, pos)| {
        (
            Just(obs),
            Just(pos),
            prop::collection::vec((0..pos, any::<bool>(), prop::collection::vec(0..obs, 0..3)), 0..23),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn grounded_matches_brute_force((obs, pos, args) in graphs()) {
        let g = build(obs, pos, &args);
        prop_assert!(g.nodes <= 30);
        let archive = g.platform.archive();
        let links: Vec<_> = archive.links().cloned().collect();
        let elements: HashSet<RecordId> = archive.elements().map(|e| e.id.clone()).collect();
        for position in &g.positions {
            let supporting: Vec<&RecordId> = links
                .iter()
                .filter(|l| l.link_type == LinkType::Supports && &l.target == position)
                .map(|l| &l.source)
                .collect();
            let expected = !supporting.is_empty()
                && supporting.iter().all(|a| {
                    links.iter().any(|l| l.link_type == LinkType::EvidencedBy && &l.source == *a && elements.contains(&l.target))
                });
            let objections: BTreeSet<&RecordId> = links
                .iter()
                .filter(|l| l.link_type == LinkType::ObjectsTo && &l.target == position)
                .map(|l| &l.source)
                .collect();

            let report = g.platform.verify(position).unwrap();
            prop_assert_eq!(report.grounded, expected);
            prop_assert_eq!(report.supports.len(), supporting.len());
            prop_assert_eq!(report.objections.iter().collect::<BTreeSet<_>>(), objections);
            prop_assert_eq!(&report, &g.platform.verify(position).unwrap());
        }
        prop_assert!(archive.audit().is_empty());
    }
}

#[test]
fn verify_does_not_write() {
    let g = build(2, 2, &[(0, true, vec![0]), (1, false, vec![1])]);
    let before = g.platform.export_string();
    for p in &g.positions {
        g.platform.verify(p).unwrap();
    }
    assert_eq!(g.platform.export_string(), before);
}

//! Bundled task-type definitions and a scripted demonstration history.
//! Used by tests, the CLI `seed` command, and anyone who wants a populated
//! archive to look at.

use crate::contextualization::{ArticulationRequest, SegmentSpec, SourceDocument, TranscriptionJob};
use crate::definitions::{load_definition, TaskTypeDefinition};
use crate::error::Result;
use crate::ids::RecordId;
use crate::argumentation::Stance;
use crate::model::{ElementKind, Surrogate};
use crate::platform::Platform;

pub const PATIENT_CARE_JSON: &str = include_str!("../fixtures/patient-care.json");
pub const LOAN_APPRAISAL_JSON: &str = include_str!("../fixtures/loan-appraisal.json");

pub fn patient_care() -> TaskTypeDefinition {
    load_definition(PATIENT_CARE_JSON).expect("bundled definition is valid")
}

pub fn loan_appraisal() -> TaskTypeDefinition {
    load_definition(LOAN_APPRAISAL_JSON).expect("bundled definition is valid")
}

/// Ids produced by [`seed_patient_care_scenario`].
#[derive(Debug, Clone)]
pub struct PatientCareScenario {
    pub p1_session: RecordId,
    pub p2_session: RecordId,
    pub p1_fever: RecordId,
    pub p1_throat: RecordId,
    pub p1_influenza: RecordId,
    pub p1_cold: RecordId,
    pub p1_decision: RecordId,
    pub p1_plan: RecordId,
    pub p2_cough: RecordId,
    pub p2_bronchitis: RecordId,
    pub p2_plan: RecordId,
    pub p2_follow_up: RecordId,
    pub issue: RecordId,
    pub position: RecordId,
    pub supporting_argument: RecordId,
    pub objection: RecordId,
    /// Elements from the transcribed referral letter of P1.
    pub referral: Vec<RecordId>,
    pub referral_text: String,
    /// Every element created through articulation, in creation order.
    pub articulated: Vec<RecordId>,
}

fn say(
    p: &mut Platform,
    session: &RecordId,
    kind: ElementKind,
    content: &str,
    title: &str,
    terms: &[&str],
    supports: &[&RecordId],
) -> Result<RecordId> {
    let request = ArticulationRequest::new(session.clone(), kind, content, Surrogate::new(title, terms))
        .supported_by(supports.iter().map(|id| (*id).clone()));
    Ok(p.articulate(request)?.element.id)
}

/// Two treated patients: P1 along the nominal path with a diagnostic
/// argument, P2 skipping straight from possible diseases to treatment.
/// Sessions are completed, so both histories feed recommendations.
pub fn seed_patient_care_scenario(p: &mut Platform) -> Result<PatientCareScenario> {
    p.load_definition(PATIENT_CARE_JSON)?;

    let s1 = p.open_session("dr_adams", "patient-care", "P1")?.session_id;
    p.advance(&s1, "examination", None)?;
    let p1_fever = say(
        p,
        &s1,
        ElementKind::Observation,
        "high temperature, headache",
        "exam findings",
        &["fever", "headache"],
        &[],
    )?;
    let p1_throat = say(
        p,
        &s1,
        ElementKind::Observation,
        "throat redness and body ache since yesterday",
        "throat and muscles",
        &["sore throat"],
        &[],
    )?;
    p.advance(&s1, "determination-of-possible-diseases", None)?;
    let p1_influenza = say(
        p,
        &s1,
        ElementKind::Hypothesis,
        "influenza",
        "possible disease",
        &["flu"],
        &[&p1_fever],
    )?;
    let p1_cold = say(
        p,
        &s1,
        ElementKind::Hypothesis,
        "common cold",
        "possible disease",
        &[],
        &[&p1_throat],
    )?;
    let issue = p.raise_issue(&s1, "which disease explains the symptoms?")?.node.id;
    let position = p.take_position(&issue, "influenza", "dr_adams")?.node.id;
    let supporting_argument = p
        .argue(
            &position,
            Stance::Supports,
            "high fever with headache is typical of influenza",
            "dr_adams",
            std::slice::from_ref(&p1_fever),
        )?
        .node
        .id;
    let objection = p
        .argue(
            &position,
            Stance::Objects,
            "no known contact with influenza patients",
            "dr_adams",
            &[],
        )?
        .node
        .id;
    p.advance(&s1, "diagnosis", None)?;
    let p1_decision = p.conclude(&position, &s1)?.element.id;
    p.advance(&s1, "treatment-planning", None)?;
    let plan = ArticulationRequest::new(
        s1.clone(),
        ElementKind::Plan,
        "bed rest, fluids, antiviral course for five days",
        Surrogate::new("treatment", &["antiviral"]),
    )
    .satisfying([p1_decision.clone()]);
    let p1_plan = p.articulate(plan)?.element.id;
    p.complete_session(&s1)?;

    let referral_text = "Referred by the school nurse: temperature of 39C measured at noon.\n\n\
                         Nurse suspects a seasonal virus going around the class."
        .to_owned();
    let first_end = referral_text.find("\n\n").expect("two paragraphs");
    let referral = p
        .transcribe(TranscriptionJob {
            source: SourceDocument {
                text: referral_text.clone(),
                reference: "referral-letter-P1.txt".into(),
            },
            task_type: "patient-care".into(),
            task_instance: Some("P1".into()),
            author: Some("records_clerk".into()),
            segments: vec![
                SegmentSpec {
                    start: 0,
                    end: first_end,
                    kind: ElementKind::Observation,
                    title: Some("referral temperature".into()),
                    terms: vec!["fever".into()],
                    category_nodes: vec!["results-of-examination".into()],
                    links: vec![],
                },
                SegmentSpec {
                    start: first_end + 2,
                    end: referral_text.len(),
                    kind: ElementKind::Finding,
                    title: Some("referral suspicion".into()),
                    terms: vec![],
                    category_nodes: vec![],
                    links: vec![],
                },
            ],
        })?
        .elements
        .into_iter()
        .map(|e| e.id)
        .collect();

    let s2 = p.open_session("dr_baker", "patient-care", "P2")?.session_id;
    p.advance(&s2, "examination", None)?;
    let p2_cough = say(
        p,
        &s2,
        ElementKind::Observation,
        "persistent dry cough, mild fever",
        "exam findings",
        &["cough"],
        &[],
    )?;
    p.advance(&s2, "determination-of-possible-diseases", None)?;
    let p2_bronchitis = say(
        p,
        &s2,
        ElementKind::Hypothesis,
        "acute bronchitis",
        "possible disease",
        &[],
        &[&p2_cough],
    )?;
    p.advance(&s2, "treatment-planning", Some("symptoms clear enough to treat directly"))?;
    let p2_plan = say(
        p,
        &s2,
        ElementKind::Plan,
        "cough syrup and review in one week",
        "treatment",
        &[],
        &[&p2_bronchitis],
    )?;
    p.advance(&s2, "follow-up", None)?;
    let follow_up = ArticulationRequest::new(
        s2.clone(),
        ElementKind::Finding,
        "cough resolved after a week",
        Surrogate::titled("follow-up visit"),
    )
    .supported_by([p2_plan.clone()])
    .as_ie_type("follow-up-notes");
    let p2_follow_up = p.articulate(follow_up)?.element.id;
    p.complete_session(&s2)?;

    Ok(PatientCareScenario {
        articulated: vec![
            p1_fever.clone(),
            p1_throat.clone(),
            p1_influenza.clone(),
            p1_cold.clone(),
            p1_decision.clone(),
            p1_plan.clone(),
            p2_cough.clone(),
            p2_bronchitis.clone(),
            p2_plan.clone(),
            p2_follow_up.clone(),
        ],
        p1_session: s1,
        p2_session: s2,
        p1_fever,
        p1_throat,
        p1_influenza,
        p1_cold,
        p1_decision,
        p1_plan,
        p2_cough,
        p2_bronchitis,
        p2_plan,
        p2_follow_up,
        issue,
        position,
        supporting_argument,
        objection,
        referral,
        referral_text,
    })
}

/// Ids produced by [`seed_loan_scenario`].
#[derive(Debug, Clone)]
pub struct LoanScenario {
    pub sessions: Vec<RecordId>,
    pub articulated: Vec<RecordId>,
    pub l1_credit: RecordId,
}

/// Two loan applications worked through the appraisal task type.
pub fn seed_loan_scenario(p: &mut Platform) -> Result<LoanScenario> {
    p.load_definition(LOAN_APPRAISAL_JSON)?;
    let mut articulated = Vec::new();
    let mut sessions = Vec::new();
    let mut l1_credit = None;
    for (instance, profile, credit, decision) in [
        (
            "L1",
            "salaried applicant requesting a 20000 home improvement loan",
            "credit score 780, no missed payments",
            "sanction the loan at standard rate",
        ),
        (
            "L2",
            "self-employed applicant requesting 150000 for equipment",
            "credit score 610, two late payments last year",
            "decline pending additional collateral",
        ),
    ] {
        let s = p.open_session("officer_chen", "loan-appraisal", instance)?.session_id;
        p.advance(&s, "application-intake", None)?;
        let a = say(p, &s, ElementKind::Observation, profile, "applicant profile", &[], &[])?;
        p.advance(&s, "credit-assessment", None)?;
        let b = say(p, &s, ElementKind::Finding, credit, "credit history", &["credit score"], &[&a])?;
        p.advance(&s, "risk-analysis", None)?;
        let c = say(
            p,
            &s,
            ElementKind::Analysis,
            "repayment capacity weighed against history",
            "risk view",
            &[],
            &[&b],
        )?;
        p.advance(&s, "lending-decision", None)?;
        let d = say(p, &s, ElementKind::Decision, decision, "lending decision", &["sanction"], &[&c])?;
        p.complete_session(&s)?;
        l1_credit.get_or_insert(b.clone());
        articulated.extend([a, b, c, d]);
        sessions.push(s);
    }
    Ok(LoanScenario {
        sessions,
        articulated,
        l1_credit: l1_credit.expect("two applications seeded"),
    })
}

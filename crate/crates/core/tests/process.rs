mod common;

use common::sessions::{never_satisfied, scripted_client, seed_attribute};
use decision_core::formulation::ProblemStatement;
use decision_core::process::{
    apply_step, init_session, run_process, OracleAnswer, OracleQuery, ScriptedOracle, Status,
};
use decision_core::relation::eid;
use decision_core::Error;

#[test]
fn scripted_session_ends_satisfied_with_lineage() {
    let mut s = init_session(&seed_attribute(), ProblemStatement::ranking()).unwrap();
    let p = run_process(&mut s, &mut scripted_client(), None).unwrap();
    assert_eq!(s.status, Status::Satisfied);
    assert_eq!(s.iterations(), 4);
    s.check_lineage().unwrap();
    // Only descendants of the kept top class survive the venue extension.
    assert!(p.elements().all(|e| e.as_str().starts_with("level=high;")));
    assert_eq!(p.elements().count(), 2);
}

#[test]
fn replay_is_deterministic() {
    let mut a = init_session(&seed_attribute(), ProblemStatement::ranking()).unwrap();
    let pa = run_process(&mut a, &mut scripted_client(), None).unwrap();
    let mut b = init_session(&seed_attribute(), ProblemStatement::ranking()).unwrap();
    let pb = run_process(&mut b, &mut ScriptedOracle::from_transcript(&a.transcript), None).unwrap();
    assert_eq!(pa, pb);
    assert_eq!(a.transcript, b.transcript);
    assert_eq!(a.history, b.history);
}

#[test]
fn never_satisfied_client_exhausts_the_budget() {
    let mut s = init_session(&seed_attribute(), ProblemStatement::ranking()).unwrap();
    run_process(&mut s, &mut never_satisfied, Some(7)).unwrap();
    assert_eq!(s.status, Status::Exhausted);
    assert_eq!(s.iterations(), 7);
    let mut d = init_session(&seed_attribute(), ProblemStatement::ranking()).unwrap();
    run_process(&mut d, &mut never_satisfied, None).unwrap();
    assert_eq!((d.status, d.iterations()), (Status::Exhausted, 50));
}

#[test]
fn wrong_answers_leave_the_session_untouched() {
    let mut s = init_session(&seed_attribute(), ProblemStatement::ranking()).unwrap();
    let before = s.clone();
    let err = apply_step(&mut s, OracleAnswer::Attribute { attribute: seed_attribute() }).unwrap_err();
    assert!(matches!(err, Error::ProtocolViolation(_)));
    assert_eq!(s, before);
    let err = apply_step(&mut s, OracleAnswer::no_keeping(&[9], &[])).unwrap_err();
    assert!(matches!(err, Error::ProtocolViolation(_)));
    assert_eq!(s, before);
}

#[test]
fn short_scripts_can_be_resumed() {
    let mut full = init_session(&seed_attribute(), ProblemStatement::ranking()).unwrap();
    run_process(&mut full, &mut scripted_client(), None).unwrap();
    let answers: Vec<OracleAnswer> = full.transcript.iter().map(|e| e.answer.clone()).collect();

    let mut s = init_session(&seed_attribute(), ProblemStatement::ranking()).unwrap();
    let err = run_process(&mut s, &mut ScriptedOracle::new(answers[..3].to_vec()), None).unwrap_err();
    assert!(matches!(err, Error::IncompleteElicitation(_)));
    assert_eq!(s.transcript.len(), 3);
    let p = run_process(&mut s, &mut ScriptedOracle::new(answers[3..].to_vec()), None).unwrap();
    assert_eq!(Some(p), full.current);
    assert_eq!(s.status, Status::Satisfied);
}

#[test]
fn elicited_dimensions_are_asked_pairwise() {
    let mut s = init_session(&seed_attribute(), ProblemStatement::ranking()).unwrap();
    let mut client = scripted_client();
    let mut asked = 0;
    while s.status == Status::Running {
        let q = s.pending.front().cloned().unwrap();
        if let OracleQuery::Pairwise { x, y, .. } = &q {
            assert_ne!(x, y);
            asked += 1;
        }
        apply_step(&mut s, client(&q).unwrap()).unwrap();
    }
    // The seed reads its own scale, so only the comfort pair is asked.
    assert_eq!(asked, 1);
    assert!(s.judgements["comfort"].contains(&(eid("level=high;venue=far"), eid("level=high;venue=near"))));
}

#[test]
fn rating_sessions_are_refused() {
    let st = ProblemStatement::new(decision_core::formulation::StatementKind::Rating);
    assert!(matches!(init_session(&seed_attribute(), st), Err(Error::UnsupportedStatement(_))));
}

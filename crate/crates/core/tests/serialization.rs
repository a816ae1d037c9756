mod common;

use tempq::eval::Pipeline;
use tempq::ground::GroundingConfig;
use tempq::kg::{EntityId, PredicateId};
use tempq::query::{serialize, Pattern, QueryGraph, SerializeMode, Term};
use tempq::rank::ScorerModel;

#[test]
fn selected_queries_match_golden_files() {
    let g = common::graph();
    let p = Pipeline::new(&g, GroundingConfig::default(), ScorerModel::untrained());
    for q in common::benchmark() {
        let path = format!("{}/tests/golden/{}.txt", env!("CARGO_MANIFEST_DIR"), q.id);
        let golden = std::fs::read_to_string(&path).unwrap();
        let (ranking, debug) = golden.split_once('\n').unwrap();
        let a = p.answer(&q.question);
        assert_eq!(a.query.as_deref(), Some(ranking), "{}", q.id);
        assert_eq!(a.debug.as_deref(), Some(debug.trim_end()), "{}", q.id);
    }
}

#[test]
fn lennon_ranking_text() {
    let g = common::graph();
    let q = QueryGraph::new(vec![
        Pattern::stmt_fact("s", Term::entity(&EntityId::new("Murder_of_John_Lennon")), &PredicateId::new("location"), Term::var("ans")),
        Pattern::fact(
            Term::entity(&EntityId::new("Murder_of_John_Lennon")),
            &PredicateId::new("murder_of"),
            Term::entity(&EntityId::new("John_Lennon")),
        ),
    ]);
    assert_eq!(serialize(&q, &g, SerializeMode::Ranking), "ANS location Murder of John Lennon murder of John Lennon");
}

#[test]
fn single_triple_debug() {
    let g = common::graph();
    let q = QueryGraph::new(vec![Pattern::fact(
        Term::entity(&EntityId::new("Alfred_Hitchcock")),
        &PredicateId::new("director"),
        Term::var("ans"),
    )]);
    assert_eq!(serialize(&q, &g, SerializeMode::Debug), "SELECT ?ans WHERE {\n  Alfred_Hitchcock <director> ?ans .\n}");
}

#[test]
fn variable_names_do_not_matter() {
    let g = common::graph();
    let build = |s: &str, m: &str| {
        QueryGraph::new(vec![
            Pattern::stmt_fact(s, Term::var(m), &PredicateId::new("location"), Term::var("ans")),
            Pattern::fact(Term::var(m), &PredicateId::new("murder_of"), Term::entity(&EntityId::new("John_Lennon"))),
        ])
    };
    for mode in [SerializeMode::Ranking, SerializeMode::Debug] {
        assert_eq!(serialize(&build("s", "m"), &g, mode), serialize(&build("zz", "aa"), &g, mode));
    }
    let renamed = build("s", "m").rename_apart("x");
    assert_eq!(serialize(&renamed, &g, SerializeMode::Debug), serialize(&build("s", "m"), &g, SerializeMode::Debug));
}

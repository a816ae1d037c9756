mod common;

use std::collections::BTreeSet;

use tempq::annotate::OrdinalDirection;
use tempq::evoke::{evoke_interpretations, InterpretationTemplate, Structure, TemporalConstraint};
use tempq::ground::*;
use tempq::kg::{EntityId, KnowledgeGraph, PredicateId};
use tempq::query::{execute, serialize, SerializeMode};
use tempq::time::TimeMlRelType;

fn ctx<'g>(g: &'g KnowledgeGraph, q: &str) -> GroundingContext<'g> {
    GroundingContext::new(g, q, GroundingConfig::default())
}

fn answers(c: &Candidate, g: &KnowledgeGraph) -> BTreeSet<String> {
    execute(&c.graph, g).unwrap().to_strings()
}

fn out(anchor: &str, predicate: &str) -> Path {
    Path::Out { anchor: EntityId::new(anchor), predicate: PredicateId::new(predicate) }
}

#[test]
fn every_worked_example_has_its_target_query() {
    let g = common::graph();
    let expected = [
        (common::HITCHCOCK, "Psycho", Structure::Is1Comparison),
        (common::HENRY, "1506", Structure::Is2Ordering),
        (common::POTTER, "Harry_Potter_and_the_Deathly_Hallows", Structure::Is3Direct),
        (common::LENNON, "The_Dakota", Structure::Is4SameEntity),
        (common::FISHBURNE, "Best_Featured_Actor", Structure::Is5PartOf),
        (common::KENNEDY, "Lyndon_B._Johnson", Structure::Is6Sequent),
    ];
    for (q, gold, structure) in expected {
        let cands = generate_candidates(&ctx(&g, q));
        let hit = cands
            .iter()
            .any(|c| c.structures().contains(&structure) && answers(c, &g) == common::strings(&[gold]));
        assert!(hit, "{q}");
    }
}

#[test]
fn president_when_shot_joins_two_times_with_overlaps() {
    let g = common::graph();
    let cands = generate_candidates(&ctx(&g, common::CARTER));
    let c = cands
        .iter()
        .find(|c| answers(c, &g) == common::strings(&["Jimmy_Carter"]))
        .expect("a candidate answers the president");
    let debug = serialize(&c.graph, &g, SerializeMode::Debug);
    assert!(debug.contains("FILTER(OVERLAPS(?v"), "{debug}");
    assert!(c.structures().contains(&Structure::Is1Comparison));
}

#[test]
fn plans_replay_to_identical_graphs() {
    let g = common::graph();
    let mut n = 0;
    for q in [common::HITCHCOCK, common::HENRY, common::POTTER, common::LENNON, common::FISHBURNE, common::KENNEDY, common::CARTER] {
        let c = ctx(&g, q);
        for cand in generate_candidates(&c).into_iter().chain(ground_basic(&c)) {
            assert_eq!(replay(&g, &cand.plan).unwrap(), cand.graph, "{q}: {:?}", cand.plan);
            assert!(!cand.plan.slot_log().is_empty());
            for p in &cand.provenance {
                assert!(p.constraint < c.constraints.len());
                let evoked: Vec<String> =
                    evoke_interpretations(&c.constraints[p.constraint]).iter().map(|t| t.to_string()).collect();
                assert!(evoked.contains(&p.template), "{q}: {} not in {evoked:?}", p.template);
            }
            n += 1;
        }
    }
    assert!(n > 100, "{n}");
}

#[test]
fn replay_rejects_bad_fills() {
    let g = common::graph();
    let bad_entity = Plan::Basic { path: out("Nobody", "spouse") };
    assert!(matches!(replay(&g, &bad_entity), Err(GroundError::UnknownEntity(_))));
    let unflagged = Plan::PartOf {
        path: out("Laurence_Fishburne", "award_received"),
        qualifier: PredicateId::new("point_in_time"),
        event: EntityId::new("46th_Tony_Awards"),
    };
    assert!(matches!(replay(&g, &unflagged), Err(GroundError::MissingFlag { .. })));
    let no_link = Plan::SameEntity {
        event: EntityId::new("Psycho"),
        link: PredicateId::new("murder_of"),
        anchor: EntityId::new("John_Lennon"),
        answer: out("Psycho", "genre"),
    };
    assert!(matches!(replay(&g, &no_link), Err(GroundError::MissingStatement(_))));
}

#[test]
fn disabling_intrinsic_structures_leaves_the_rest() {
    let g = common::graph();
    let off = [Structure::Is4SameEntity, Structure::Is5PartOf, Structure::Is6Sequent];
    for q in [common::HITCHCOCK, common::HENRY, common::POTTER, common::LENNON, common::FISHBURNE, common::KENNEDY, common::CARTER] {
        let full = generate_candidates(&ctx(&g, q));
        let ablated = generate_candidates(&GroundingContext::new(&g, q, GroundingConfig::default().without(&off)));
        assert!(ablated.iter().all(|c| off.iter().all(|s| !c.structures().contains(s))), "{q}");
        let extrinsic = |cs: &[Candidate]| -> Vec<String> {
            cs.iter()
                .filter(|c| !c.provenance.is_empty() && off.iter().all(|s| !c.structures().contains(s)))
                .map(|c| serialize(&c.graph, &g, SerializeMode::Debug))
                .collect()
        };
        assert_eq!(extrinsic(&full), extrinsic(&ablated), "{q}");
    }
}

#[test]
fn basic_paths() {
    let g = common::graph();
    let hitchcock = ground_basic(&ctx(&g, common::HITCHCOCK));
    assert!(hitchcock.iter().any(|c| c.plan == Plan::Basic { path: out("Alfred_Hitchcock", "director") }));
    let lennon = ground_basic(&ctx(&g, common::LENNON));
    let two_hop = Path::TwoHop {
        anchor: EntityId::new("John_Lennon"),
        first: PredicateId::new("murder_of"),
        first_forward: false,
        second: PredicateId::new("location"),
        second_forward: true,
    };
    let c = lennon.iter().find(|c| c.plan == Plan::Basic { path: two_hop.clone() }).expect("two-hop candidate");
    assert_eq!(answers(c, &g), common::strings(&["The_Dakota"]));
    assert!(ground_basic(&ctx(&g, "Tell me about Isolated Entity")).is_empty());
}

#[test]
fn unlinked_questions_have_no_candidates() {
    let g = common::graph();
    assert!(generate_candidates(&ctx(&g, "blorp zang quux?")).is_empty());
}

#[test]
fn unconstrained_questions_get_basic_graphs() {
    let g = common::graph();
    let c = ctx(&g, "Who is the spouse of Alfred Hitchcock?");
    assert!(c.constraints.is_empty());
    let cands = generate_candidates(&c);
    assert!(!cands.is_empty() && cands.iter().all(|c| c.provenance.is_empty()));
    assert!(cands.iter().any(|c| answers(c, &g) == common::strings(&["Alma_Reville"])));
}

#[test]
fn ordering_edges() {
    let g = common::graph();
    let order = |anchor: &str, predicate: &str, rank| Plan::Order {
        path: out(anchor, predicate),
        rank,
        direction: OrdinalDirection::FromFirst,
    };
    let q = order("Henry_VIII", "spouse", 1).build().unwrap();
    assert_eq!(execute(&q, &g).unwrap().to_strings(), common::strings(&["Catherine_of_Aragon"]));
    let q = order("Henry_VIII", "position_held", 1).build().unwrap();
    assert_eq!(execute(&q, &g).unwrap().to_strings(), common::strings(&["King_of_England"]));
    let q = order("Henry_VIII", "spouse", 9).build().unwrap();
    assert!(execute(&q, &g).unwrap().is_empty());
    let last = Plan::Order { path: out("Henry_VIII", "spouse"), rank: 1, direction: OrdinalDirection::FromLast };
    assert_eq!(execute(&last.build().unwrap(), &g).unwrap().to_strings(), common::strings(&["Catherine_Parr"]));
}

#[test]
fn henry_combines_projection_and_ordinal_in_one_graph() {
    let g = common::graph();
    let cands = generate_candidates(&ctx(&g, common::HENRY));
    let c = cands.iter().find(|c| answers(c, &g) == common::strings(&["1506"])).unwrap();
    assert!(c.graph.ordinal.is_some());
    assert!(matches!(&c.plan, Plan::Project { inner } if matches!(**inner, Plan::Order { .. })));
}

#[test]
fn direct_value_needs_a_matching_attribute() {
    let g = common::graph();
    let c = ctx(&g, "What was the 9th Harry Potter book?");
    let t = evoke_interpretations(&c.constraints[0]).into_iter().find(|t| t.structure == Structure::Is3Direct).unwrap();
    assert!(ground_is3(&c, &t).is_empty());
    let c = ctx(&g, common::POTTER);
    let t = evoke_interpretations(&c.constraints[0]).into_iter().find(|t| t.structure == Structure::Is3Direct).unwrap();
    let found = ground_is3(&c, &t);
    assert_eq!(found.len(), 1);
    assert_eq!(answers(&found[0], &g), common::strings(&["Harry_Potter_and_the_Deathly_Hallows"]));
}

fn template(c: &GroundingContext, structure: Structure) -> InterpretationTemplate {
    c.constraints
        .iter()
        .flat_map(evoke_interpretations)
        .find(|t| t.structure == structure)
        .unwrap_or_else(|| panic!("{structure} not evoked"))
}

#[test]
fn same_entity_enumerates_event_attributes() {
    let g = common::graph();
    let c = ctx(&g, common::LENNON);
    let found = ground_is4(&c, &template(&c, Structure::Is4SameEntity));
    let preds: BTreeSet<String> = found
        .iter()
        .filter_map(|c| match &c.plan {
            Plan::SameEntity { event, answer: Path::Out { predicate, .. }, .. } if event.as_str() == "Murder_of_John_Lennon" => {
                Some(predicate.0.clone())
            }
            _ => None,
        })
        .collect();
    assert_eq!(preds, common::strings(&["location", "perpetrator", "time"]));

    // An anchor nothing points at grounds nothing.
    let mut lonely = ctx(&g, common::LENNON);
    for (_, e) in &mut lonely.links {
        *e = EntityId::new("Isolated_Entity");
    }
    assert!(ground_is4(&lonely, &template(&lonely, Structure::Is4SameEntity)).is_empty());
}

#[test]
fn part_of_keeps_only_the_qualified_award() {
    let g = common::graph();
    let c = ctx(&g, common::FISHBURNE);
    let found = ground_is5(&c, &template(&c, Structure::Is5PartOf));
    assert!(!found.is_empty());
    for cand in &found {
        assert_eq!(answers(cand, &g), common::strings(&["Best_Featured_Actor"]));
        assert!(cand.plan.slot_log().iter().any(|l| l.contains("subject_of") && l.contains("PART_OF")));
    }
}

#[test]
fn sequent_direction_follows_the_relation() {
    let g = common::graph();
    let c = ctx(&g, common::KENNEDY);
    let after = template(&c, Structure::Is6Sequent);
    let got: BTreeSet<String> = ground_is6(&c, &after).iter().flat_map(|c| answers(c, &g)).collect();
    assert_eq!(got, common::strings(&["Lyndon_B._Johnson"]));
    let TemporalConstraint::RelationEe { e1, e2, .. } = after.constraint else { panic!() };
    let before = InterpretationTemplate {
        constraint: TemporalConstraint::RelationEe { reltype: TimeMlRelType::Before, e1, e2 },
        ..after
    };
    let got: BTreeSet<String> = ground_is6(&c, &before).iter().flat_map(|c| answers(c, &g)).collect();
    assert_eq!(got, common::strings(&["Dwight_D._Eisenhower"]));
}

#[test]
fn generation_is_deterministic() {
    let g = common::graph();
    for q in [common::LENNON, common::CARTER, common::FISHBURNE] {
        let a: Vec<_> = generate_candidates(&ctx(&g, q)).into_iter().map(|c| c.graph).collect();
        let b: Vec<_> = generate_candidates(&ctx(&g, q)).into_iter().map(|c| c.graph).collect();
        assert_eq!(a, b);
    }
}

#[test]
fn config_round_trips() {
    let c = GroundingConfig::from_json(r#"{"enabled_is":[1,2,3],"beam_width":4}"#).unwrap();
    assert_eq!(c.enabled.len(), 3);
    assert_eq!((c.beam_width, c.max_hops), (4, 2));
    let back = GroundingConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
    assert_eq!(back, c);
    assert!(GroundingConfig::from_json(r#"{"enabled_is":[7]}"#).is_err());
}

mod common;

use common::{names, Model};
use epicomp::composition::{derive, Schema, SequentialSchema};
use epicomp::properties::{property_holds, PropertySpec};
use epicomp::scenarios::{mixer_chain, MixStage, PartitionPolicy};
use epicomp::{Action, AgentId};

fn derived_model(
    n: usize,
    first: MixStage,
    second: MixStage,
    policy: PartitionPolicy,
) -> (epicomp::InterpretedSystem, Model) {
    let sys = mixer_chain(n, &first, &second, policy).unwrap();
    let schema = Schema::Sequential(SequentialSchema::bulletin_board(&sys));
    let derived = derive(&sys, &schema).unwrap();
    let oracle = Model::of(&sys).with_submits(&names("i", n), &names("k", n), &names("c", n));
    assert_eq!(Model::of(&derived).runs, oracle.runs);
    (derived, oracle)
}

#[test]
fn inverse_mixers_reveal_every_sender() {
    for n in 1..=4 {
        let (derived, m) = derived_model(
            n,
            MixStage::All,
            MixStage::InverseOfFirst,
            PartitionPolicy::SingleBlock,
        );
        let j = AgentId::new("j");
        for x in 1..=n {
            let (i, c) = (format!("i{x}"), format!("c{x}"));
            let submit = format!("submit({c})");
            assert!((0..m.runs.len()).all(|r| m.has(r, &i, &submit)));
            assert!(m.max_onym(&i, &submit, "j"));
            let spec =
                PropertySpec::maximally_onymous(&AgentId::new(&i), &Action::new("submit", &c), &j);
            assert!(property_holds(&derived, &spec).unwrap());
        }
    }
}

#[test]
fn independent_mixers_hide_every_sender() {
    for n in 1..=3 {
        let (derived, m) = derived_model(
            n,
            MixStage::All,
            MixStage::All,
            PartitionPolicy::SingleBlock,
        );
        let everyone = names("i", n);
        let j = AgentId::new("j");
        for i in &everyone {
            for c in names("c", n) {
                let submit = format!("submit({c})");
                assert!(m.anon_upto(i, &submit, &everyone, "j"));
                let ids: Vec<AgentId> = everyone.iter().map(AgentId::new).collect();
                let spec = PropertySpec::anonymous_up_to(
                    &AgentId::new(i),
                    &Action::new("submit", &c),
                    &ids,
                    &j,
                );
                assert!(property_holds(&derived, &spec).unwrap());
            }
        }
    }
}

#[test]
fn a_fixed_second_mixer_still_hides_senders() {
    let (_, m) = derived_model(
        3,
        MixStage::All,
        MixStage::Fixed(vec![2, 0, 1]),
        PartitionPolicy::SingleBlock,
    );
    let everyone = names("i", 3);
    for i in &everyone {
        for c in names("c", 3) {
            assert!(m.anon_upto(i, &format!("submit({c})"), &everyone, "j"));
        }
    }
}

#[test]
fn a_watched_mixer_hides_nothing() {
    let (_, m) = derived_model(3, MixStage::All, MixStage::All, PartitionPolicy::Discrete);
    for i in names("i", 3) {
        for c in names("c", 3) {
            assert!(m.max_onym(&i, &format!("submit({c})"), "j"));
        }
    }
}

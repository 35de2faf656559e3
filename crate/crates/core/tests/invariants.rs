mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use icnsim::harness::{run, trace_to_string, RunOptions, Scenario, TraceEvent};

use common::{attach, build, fetch, join};

const POAS: [&str; 3] = ["A", "B", "C"];

#[derive(Debug, Clone)]
struct Plan {
    seed: u64,
    mobility: bool,
    ues: Vec<(usize, bool)>,
    fetches: Vec<(usize, usize, u64)>,
    moves: Vec<(usize, usize, u64)>,
}

fn plan() -> impl Strategy<Value = Plan> {
    (1usize..5).prop_flat_map(|n| {
        (
            any::<u64>(),
            any::<bool>(),
            prop::collection::vec((0..3usize, any::<bool>()), n),
            prop::collection::vec((0..n, 0..n, 1..15u64), 0..4),
            prop::collection::vec((0..n, 0..3usize, 300_000..1_500_000u64), 0..3),
        )
            .prop_map(|(seed, mobility, ues, fetches, moves)| Plan {
                seed,
                mobility,
                ues,
                fetches,
                moves,
            })
    })
}

fn mobility_intent() -> &'static str {
    "\n[[timeline]]\nat = 1000\naction = \"submit_intent\"\n[timeline.intent]\nservice_type = \"mobility\"\nnetwork_services = [\"mobility\"]\n"
}

fn scenario(p: &Plan) -> Scenario {
    let names: Vec<String> = (0..p.ues.len()).map(|i| format!("u{i}")).collect();
    let mut t = common::conference_intents(None);
    if p.mobility {
        // mobility intent goes between base and conference
        let split = t.find("\n[[timeline]]\nat = 2000").unwrap();
        t.insert_str(split, mobility_intent());
    }
    for (i, (poa, _)) in p.ues.iter().enumerate() {
        t += &attach(10_000, &names[i], POAS[*poa]);
    }
    let producers: Vec<usize> = (0..p.ues.len()).filter(|&i| p.ues[i].1).collect();
    for &i in &producers {
        t += &join(20_000, &names[i]);
    }
    if p.mobility && !producers.is_empty() {
        let prefixes: Vec<String> = producers.iter().map(|&i| format!("\"/conf1/{}\"", names[i])).collect();
        t += &format!(
            "\n[[timeline]]\nat = 100000\naction = \"enable_mobility\"\nslice = \"/conf1\"\nprefixes = [{}]\n",
            prefixes.join(", ")
        );
    }
    for &(c, target, chunks) in &p.fetches {
        if c != target && producers.contains(&target) {
            t += &fetch(200_000, &names[c], &format!("/conf1/{}", names[target]), chunks);
        }
    }
    let mut moves = p.moves.clone();
    moves.sort_by_key(|m| m.2);
    let mut moved = BTreeSet::new();
    for (ue, to, at) in moves {
        if moved.insert(ue) {
            t += &format!(
                "\n[[timeline]]\nat = {at}\naction = \"ue_move\"\nue = \"{}\"\nto = \"{}\"\n",
                names[ue], POAS[to]
            );
        }
    }
    build(p.seed, 2_000_000, &names, &t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn random_sessions_hold_invariants(p in plan()) {
        let s = scenario(&p);
        let out = run(&s, RunOptions::default());
        prop_assert_eq!(out.violation.clone(), None);
        prop_assert!(out.report.check().is_empty(), "{:?}", out.report.check());
        prop_assert_eq!(out.report.failed_actions, 0);

        // time is monotone and each chunk is delivered at most once per flow
        let mut delivered = BTreeSet::new();
        let mut last = 0;
        for r in &out.trace {
            prop_assert!(r.t >= last);
            last = r.t;
            if let TraceEvent::ConsumerData { flow, seq, latency_us, .. } = &r.event {
                prop_assert!(*latency_us > 0);
                prop_assert!(delivered.insert((flow.clone(), *seq)));
            }
        }
        // without mobility no resolution is ever invoked
        if !p.mobility {
            prop_assert_eq!(out.report.network.msa_resolutions, 0);
        }

        let again = run(&s, RunOptions::default());
        prop_assert_eq!(trace_to_string(&out.trace), trace_to_string(&again.trace));
    }

    #[test]
    fn stationary_sessions_lose_nothing(p in plan()) {
        let p = Plan { moves: Vec::new(), ..p };
        let out = run(&scenario(&p), RunOptions::default());
        prop_assert_eq!(out.violation, None);
        for (flow, f) in &out.report.flows {
            prop_assert_eq!(f.lost, 0, "{}", flow);
            prop_assert_eq!(f.received, f.sent - f.timeouts, "{}", flow);
        }
        let producers: Vec<usize> = (0..p.ues.len()).filter(|&i| p.ues[i].1).collect();
        let requested: u64 = p
            .fetches
            .iter()
            .filter(|(c, t, _)| c != t && producers.contains(t))
            .map(|f| f.2)
            .sum();
        prop_assert_eq!(out.report.interests.satisfied, requested);
    }
}

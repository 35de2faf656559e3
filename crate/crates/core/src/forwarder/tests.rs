use super::*;
use crate::icn::Data;

fn n(s: &str) -> Name {
    Name::parse(s).unwrap()
}

fn key() -> Name {
    n("/k")
}

/// Forwarder with `faces` faces, trusting `/k`.
fn fwd(faces: usize) -> (Forwarder, Vec<FaceId>) {
    let mut f = Forwarder::new(ForwarderConfig::default());
    f.add_trust_anchor(key());
    let ids = (0..faces).map(|_| f.add_face()).collect();
    (f, ids)
}

fn hop(face: FaceId) -> Vec<NextHop> {
    vec![NextHop { face, cost: 0 }]
}

fn interest(name: &str, nonce: u32) -> Interest {
    Interest::new(n(name), nonce).with_lifetime(100)
}

fn data(name: &str) -> Data {
    Data::signed(n(name), b"x".to_vec(), 1_000, key())
}

fn sends(actions: &[ForwardAction]) -> usize {
    actions
        .iter()
        .filter(|a| matches!(a, ForwardAction::SendInterest { .. }))
        .count()
}

#[test]
fn aggregation_sends_one_upstream_and_fans_out() {
    let (mut f, faces) = fwd(3);
    let (f1, f2, up) = (faces[0], faces[1], faces[2]);
    f.install_fib(n("/a"), hop(up)).unwrap();

    let first = f.on_interest(f1, interest("/a/1", 1), 0).unwrap();
    let second = f.on_interest(f2, interest("/a/1", 2), 1).unwrap();
    assert_eq!(sends(&first), 1);
    assert!(second.is_empty());
    let entry = f.pit().get(&n("/a/1")).unwrap();
    let in_faces: Vec<FaceId> = entry.in_records.iter().map(|r| r.face).collect();
    assert_eq!(in_faces, vec![f1, f2]);

    let out = f.on_data(up, data("/a/1"), 2).unwrap();
    assert_eq!(
        out,
        vec![
            ForwardAction::SendData { face: f1, data: data("/a/1") },
            ForwardAction::SendData { face: f2, data: data("/a/1") },
        ]
    );
    assert!(f.pit().is_empty());
}

#[test]
fn cache_hit_answers_without_pit_change() {
    let (mut f, faces) = fwd(2);
    f.install_fib(n("/a"), hop(faces[1])).unwrap();
    f.on_interest(faces[0], interest("/a/1", 1), 0).unwrap();
    f.on_data(faces[1], data("/a/1"), 1).unwrap();

    let out = f.on_interest(faces[0], interest("/a/1", 2), 2).unwrap();
    assert_eq!(out, vec![ForwardAction::SendData { face: faces[0], data: data("/a/1") }]);
    assert!(f.pit().is_empty());
}

#[test]
fn resolution_rule_triggers_and_can_be_removed() {
    let (mut f, faces) = fwd(2);
    f.install_fib(n("/conf"), hop(faces[1])).unwrap();
    f.set_resolution_rule(n("/conf/alice"));

    let out = f.on_interest(faces[0], interest("/conf/alice/seg1", 1), 0).unwrap();
    assert!(matches!(out[..], [ForwardAction::InvokeResolution { in_face, .. }] if in_face == faces[0]));
    assert!(f.pit().is_empty());

    f.unset_resolution_rule(&n("/conf/alice")).unwrap();
    let out = f.on_interest(faces[0], interest("/conf/alice/seg1", 2), 1).unwrap();
    assert_eq!(sends(&out), 1);
    assert_eq!(
        f.unset_resolution_rule(&n("/conf/alice")),
        Err(ForwarderError::NotFound(n("/conf/alice")))
    );
}

#[test]
fn hinted_interest_routes_on_hint_and_skips_resolution() {
    let (mut f, faces) = fwd(3);
    f.install_fib(n("/conf"), hop(faces[1])).unwrap();
    f.install_fib(n("/poa/B"), hop(faces[2])).unwrap();
    f.set_resolution_rule(n("/conf/alice"));
    let i = interest("/conf/alice/1", 5).with_hint(n("/poa/B"));
    let out = f.on_interest(faces[0], i, 0).unwrap();
    match &out[..] {
        [ForwardAction::SendInterest { face, interest }] => {
            assert_eq!(*face, faces[2]);
            assert_eq!(interest.name, n("/conf/alice/1"));
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn local_hint_routes_by_name_and_redirect_rewrites_it() {
    let (mut f, faces) = fwd(3);
    f.add_local_locator(n("/poa/A"));
    f.install_fib(n("/conf/alice"), hop(faces[1])).unwrap();
    f.install_fib(n("/poa/B"), hop(faces[2])).unwrap();

    let out = f
        .process_interest(faces[0], interest("/conf/alice/1", 1).with_hint(n("/poa/A")), 0)
        .unwrap();
    assert_eq!(out.disposition, Disposition::Forwarded { redirected: false });
    assert!(matches!(out.actions[..], [ForwardAction::SendInterest { face, .. }] if face == faces[1]));

    f.install_redirect(RedirectEntry {
        name: n("/conf/alice"),
        new_locator: n("/poa/B"),
        expiry: 50,
    });
    let out = f
        .process_interest(faces[0], interest("/conf/alice/2", 2).with_hint(n("/poa/A")), 10)
        .unwrap();
    assert_eq!(out.disposition, Disposition::Forwarded { redirected: true });
    match &out.actions[..] {
        [ForwardAction::SendInterest { face, interest }] => {
            assert_eq!(*face, faces[2]);
            assert_eq!(interest.forwarding_hint, Some(n("/poa/B")));
            assert_eq!(interest.name, n("/conf/alice/2"));
        }
        other => panic!("unexpected {other:?}"),
    }

    // after expiry the stale hint is routed by name again
    let out = f
        .process_interest(faces[0], interest("/conf/alice/3", 3).with_hint(n("/poa/A")), 50)
        .unwrap();
    assert_eq!(out.disposition, Disposition::Forwarded { redirected: false });
}

#[test]
fn hop_limit_and_duplicate_nonce() {
    let (mut f, faces) = fwd(2);
    f.install_fib(n("/a"), hop(faces[1])).unwrap();
    let out = f.on_interest(faces[0], interest("/a", 1).with_hop_limit(1), 0).unwrap();
    assert!(matches!(out[..], [ForwardAction::Drop { reason: DropReason::HopLimitExceeded, .. }]));

    f.on_interest(faces[0], interest("/a", 7), 0).unwrap();
    let out = f.on_interest(faces[1], interest("/a", 7), 1).unwrap();
    assert!(matches!(out[..], [ForwardAction::Drop { reason: DropReason::DuplicateNonce, .. }]));

    // the nonce is remembered after the entry is satisfied
    f.on_data(faces[1], data("/a"), 2).unwrap();
    let out = f.on_interest(faces[0], interest("/a", 7), 3).unwrap();
    assert!(matches!(out[..], [ForwardAction::Drop { reason: DropReason::DuplicateNonce, .. }]));
}

#[test]
fn never_forwards_back_out_the_arrival_face() {
    let (mut f, faces) = fwd(1);
    f.install_fib(n("/a"), hop(faces[0])).unwrap();
    let out = f.on_interest(faces[0], interest("/a", 1), 0).unwrap();
    assert!(matches!(out[..], [ForwardAction::Drop { reason: DropReason::NoRoute, .. }]));
}

#[test]
fn retransmission_on_same_face_is_forwarded_again() {
    let (mut f, faces) = fwd(2);
    f.install_fib(n("/a"), hop(faces[1])).unwrap();
    assert_eq!(sends(&f.on_interest(faces[0], interest("/a", 1), 0).unwrap()), 1);
    assert_eq!(sends(&f.on_interest(faces[0], interest("/a", 2), 10).unwrap()), 1);
    let e = f.pit().get(&n("/a")).unwrap();
    assert_eq!(e.in_records, vec![InRecord { face: faces[0], nonce: 2 }]);
    assert_eq!(e.expiry, 110);
}

#[test]
fn data_pipeline_gates() {
    let (mut f, faces) = fwd(2);
    let unsolicited = f.on_data(faces[1], data("/a"), 0).unwrap();
    assert!(matches!(unsolicited[..], [ForwardAction::Drop { reason: DropReason::Unsolicited, .. }]));
    assert!(f.cs().is_empty());

    f.install_fib(n("/a"), hop(faces[1])).unwrap();
    f.on_interest(faces[0], interest("/a", 1), 0).unwrap();
    let untrusted = Data::signed(n("/a"), b"x".to_vec(), 1000, n("/mallory"));
    let out = f.on_data(faces[1], untrusted, 1).unwrap();
    assert!(matches!(out[..], [ForwardAction::Drop { reason: DropReason::ProvenanceFailed, .. }]));
    assert!(f.cs().is_empty());
    assert_eq!(f.pit().len(), 1);
}

#[test]
fn rule_management() {
    let (mut f, faces) = fwd(2);
    f.install_fib(n("/a"), hop(faces[0])).unwrap();
    f.install_fib(n("/a"), hop(faces[1])).unwrap();
    assert_eq!(f.fib_lookup(&n("/a")).unwrap().nexthops()[0].face, faces[1]);
    assert_eq!(f.remove_fib(&n("/z")), Err(ForwarderError::NotFound(n("/z"))));
    assert_eq!(
        f.install_fib(n("/b"), hop(FaceId(99))),
        Err(ForwarderError::UnknownFace(FaceId(99)))
    );
    assert_eq!(
        f.on_interest(FaceId(99), interest("/a", 1), 0),
        Err(ForwarderError::UnknownFace(FaceId(99)))
    );
}

#[test]
fn removing_face_prunes_pit_and_routes() {
    let (mut f, faces) = fwd(3);
    f.install_fib(n("/a"), hop(faces[2])).unwrap();
    f.install_fib(n("/ue"), hop(faces[0])).unwrap();
    f.on_interest(faces[0], interest("/a/1", 1), 0).unwrap();
    f.on_interest(faces[1], interest("/a/1", 2), 0).unwrap();
    f.on_interest(faces[0], interest("/a/2", 3), 0).unwrap();
    let removal = f.remove_face(faces[0]).unwrap();
    assert_eq!(removal.routes_dropped, vec![n("/ue")]);
    assert_eq!(removal.pit_entries_dropped, vec![n("/a/2")]);
    assert_eq!(f.pit().get(&n("/a/1")).unwrap().in_records.len(), 1);
}

#[test]
fn expire_pit_boundary() {
    let (mut f, faces) = fwd(2);
    f.install_fib(n("/a"), hop(faces[1])).unwrap();
    f.on_interest(faces[0], Interest::new(n("/a"), 1).with_lifetime(10), 0).unwrap();
    assert!(f.expire_pit(9).is_empty());
    assert_eq!(f.expire_pit(10), vec![n("/a")]);
}

mod props {
    use super::*;
    use proptest::prelude::*;

    fn arb_name() -> impl Strategy<Value = Name> {
        prop::collection::vec(prop::sample::select(vec!["a", "b", "c"]), 1..5)
            .prop_map(|c| Name::from_components(c).unwrap())
    }

    proptest! {
        #[test]
        fn n_distinct_faces_aggregate_to_one_upstream(count in 1usize..12, order in any::<u64>()) {
            let (mut f, faces) = fwd(count + 1);
            let up = faces[count];
            f.install_fib(n("/a"), hop(up)).unwrap();
            let mut downstream: Vec<FaceId> = faces[..count].to_vec();
            // deterministic shuffle
            let len = downstream.len();
            for i in 0..len {
                downstream.swap(i, (order as usize).wrapping_add(i * 7) % len);
            }
            let mut upstream = 0;
            for (i, face) in downstream.iter().enumerate() {
                upstream += sends(&f.on_interest(*face, interest("/a/1", i as u32 + 1), i as u64).unwrap());
            }
            prop_assert_eq!(upstream, 1);
            let out = f.on_data(up, data("/a/1"), 50).unwrap();
            prop_assert_eq!(out.len(), count);
        }

        #[test]
        fn cs_never_exceeds_capacity(ops in prop::collection::vec((arb_name(), 0usize..400, any::<bool>()), 1..60)) {
            let mut f = Forwarder::new(ForwarderConfig { cs_capacity_bytes: 1000, ..Default::default() });
            f.add_trust_anchor(key());
            let down = f.add_face();
            let up = f.add_face();
            f.install_fib(n("/a"), hop(up)).unwrap();
            f.install_fib(n("/b"), hop(up)).unwrap();
            f.install_fib(n("/c"), hop(up)).unwrap();
            for (t, (name, size, lookup)) in ops.into_iter().enumerate() {
                let t = t as u64;
                if lookup {
                    f.on_interest(down, Interest::new(name.clone(), t as u32), t).unwrap();
                }
                f.on_data(up, Data::signed(name, vec![1; size], 10_000, key()), t).unwrap();
                prop_assert!(f.cs().used_bytes() <= 1000);
            }
        }

        #[test]
        fn interests_never_leave_by_arrival_face(names in prop::collection::vec((arb_name(), 0usize..4), 1..40)) {
            let (mut f, faces) = fwd(4);
            f.install_fib(n("/a"), vec![NextHop { face: faces[0], cost: 0 }, NextHop { face: faces[1], cost: 3 }]).unwrap();
            f.install_fib(n("/b"), hop(faces[2])).unwrap();
            for (i, (name, face)) in names.into_iter().enumerate() {
                let in_face = faces[face];
                for a in f.on_interest(in_face, Interest::new(name, i as u32), i as u64).unwrap() {
                    if let ForwardAction::SendInterest { face, .. } = a {
                        prop_assert_ne!(face, in_face);
                    }
                }
            }
        }

        #[test]
        fn fib_lookup_matches_linear_scan(
            prefixes in prop::collection::vec(arb_name(), 0..30),
            probes in prop::collection::vec(arb_name(), 1..30),
        ) {
            let (mut f, faces) = fwd(1);
            for p in &prefixes {
                f.install_fib(p.clone(), hop(faces[0])).unwrap();
            }
            for probe in probes {
                let oracle = prefixes
                    .iter()
                    .filter(|p| p.is_prefix_of(&probe))
                    .max_by_key(|p| p.len());
                prop_assert_eq!(f.fib_lookup(&probe).map(|e| &e.prefix), oracle);
            }
        }

        #[test]
        fn expire_pit_matches_filter(lifetimes in prop::collection::vec(1u64..100, 1..100), now in 0u64..120) {
            let (mut f, faces) = fwd(2);
            f.install_fib(n("/p"), hop(faces[1])).unwrap();
            let mut expected = Vec::new();
            for (i, lifetime) in lifetimes.iter().enumerate() {
                let name = n("/p").child(i.to_string());
                f.on_interest(faces[0], Interest::new(name.clone(), i as u32).with_lifetime(*lifetime), 0).unwrap();
                if *lifetime <= now {
                    expected.push(name);
                }
            }
            expected.sort();
            prop_assert_eq!(f.expire_pit(now), expected);
        }

        #[test]
        fn identical_inputs_identical_actions(seq in prop::collection::vec((arb_name(), 0usize..3, any::<bool>()), 1..40)) {
            let run = || {
                let (mut f, faces) = fwd(3);
                f.install_fib(n("/a"), hop(faces[2])).unwrap();
                f.install_fib(n("/b"), hop(faces[1])).unwrap();
                let mut all = Vec::new();
                for (i, (name, face, is_data)) in seq.iter().enumerate() {
                    let t = i as u64;
                    let out = if *is_data {
                        f.on_data(faces[*face], Data::signed(name.clone(), vec![], 500, key()), t)
                    } else {
                        f.on_interest(faces[*face], Interest::new(name.clone(), i as u32), t)
                    };
                    all.push(out.unwrap());
                }
                all
            };
            prop_assert_eq!(run(), run());
        }
    }
}

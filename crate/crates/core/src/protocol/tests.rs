use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::*;
use crate::channel::{derive_session_key, SealedPayload};
use crate::matching::{oracle_match, DEFAULT_ENUMERATION_LIMIT};
use crate::profile::{Attribute, PopulationStats, Profile, RequestSpec};

fn tags(vals: &[&str]) -> Vec<Attribute> {
    vals.iter().map(|v| Attribute::tag(v).unwrap()).collect()
}

fn profile(vals: &[&str]) -> Profile {
    Profile::new(tags(vals)).unwrap()
}

fn participant(id: NodeId, vals: &[&str]) -> ParticipantState {
    ParticipantState::new(id, profile(vals), None, ParticipantConfig::default(), 9).unwrap()
}

fn spec() -> RequestSpec {
    // alpha = 1, beta = 2, gamma = 1
    RequestSpec::new(tags(&["chess"]), tags(&["jazz", "hiking", "sushi"]), 2).unwrap()
}

fn arrive(replier: NodeId, at: SimTime, pkg: ReplyPackage) -> ReceivedReply {
    ReceivedReply {
        replier,
        arrived_at: at,
        package: pkg,
    }
}

#[test]
fn perfect_request_has_no_hint_and_is_deterministic() {
    let s = RequestSpec::new(tags(&["a", "b"]), tags(&["c"]), 1).unwrap();
    let params = RequestParams::new(11, 5);
    let (pkg, _) = create_request(&s, ProtocolId::P2, &params).unwrap();
    assert!(pkg.hint.is_none());
    let (again, _) = create_request(&s, ProtocolId::P2, &params).unwrap();
    assert_eq!(encode_request(&pkg), encode_request(&again));
    let (other, _) = create_request(&s, ProtocolId::P2, &RequestParams::new(11, 6)).unwrap();
    assert_ne!(encode_request(&pkg), encode_request(&other));
}

#[test]
fn request_size_near_reference_average() {
    let vals = ["a", "b", "c", "d", "e", "f"];
    let s = RequestSpec::with_threshold(vec![], tags(&vals), 0.6).unwrap();
    assert_eq!((s.beta(), s.gamma()), (4, 2));
    let (pkg, _) = create_request(&s, ProtocolId::P1, &RequestParams::new(11, 1)).unwrap();
    let len = encode_request(&pkg).len();
    assert_eq!(len, 44 + 24 + 4 * 2 * 4 + 33 * 2 + 16 + 48);
    assert!(len <= 380, "{len}");
}

#[test]
fn bad_modulus_is_rejected() {
    assert!(create_request(&spec(), ProtocolId::P1, &RequestParams::new(4, 0)).is_err());
    assert!(create_request(&spec(), ProtocolId::P1, &RequestParams::new(3, 0)).is_err());
}

#[test]
fn non_candidate_forwards_without_acks() {
    let (pkg, _) = create_request(&spec(), ProtocolId::P1, &RequestParams::new(13, 3)).unwrap();
    let mut p = participant(1, &["opera"]);
    let (action, report) = p.handle_request(&pkg, 0, 0);
    assert_eq!(action, Action::Forward(Some(pkg.with_ttl(pkg.ttl - 1))));
    assert_eq!(report.acks, 0);
}

#[test]
fn ttl_is_spent_after_one_hop() {
    let mut params = RequestParams::new(13, 3);
    params.ttl = 1;
    let (pkg, _) = create_request(&spec(), ProtocolId::P1, &params).unwrap();
    let mut p = participant(1, &["opera"]);
    assert_eq!(p.handle_request(&pkg, 0, 0).0, Action::Forward(None));
}

#[test]
fn p1_matcher_replies_once_and_agrees_on_session_key() {
    let (pkg, mut init) =
        create_request(&spec(), ProtocolId::P1, &RequestParams::new(13, 4)).unwrap();
    let mut p = participant(7, &["chess", "jazz", "sushi", "opera"]);
    assert!(oracle_match(init.spec(), p.profile()).is_match());
    let (action, report) = p.handle_request(&pkg, 0, 10);
    let Action::Reply { reply, forward } = action else {
        panic!("{action:?}")
    };
    assert!(forward.is_none(), "P1 matchers stop relaying by default");
    assert_eq!(reply.acks.len(), 1);
    assert_eq!(report.acks, 1);

    let got = init.collect_replies(&[arrive(7, 20, reply)]);
    assert_eq!(got.matches.len(), 1);
    let m = &got.matches[0];
    assert_eq!(m.claimed_intersection(), Some(3));
    let confirm = init.confirm(m);
    let key = p
        .confirm_session(&decode_confirm(&encode_confirm(&confirm)).unwrap())
        .unwrap();
    assert_eq!(key, m.session_key);
    assert_eq!(p.session(&init.request_id()), Some(&key));
}

#[test]
fn p1_can_keep_relaying() {
    let (pkg, _) = create_request(&spec(), ProtocolId::P1, &RequestParams::new(13, 4)).unwrap();
    let config = ParticipantConfig {
        stop_on_match: Some(false),
        ..ParticipantConfig::default()
    };
    let mut p =
        ParticipantState::new(7, profile(&["chess", "jazz", "sushi"]), None, config, 1).unwrap();
    assert!(p.handle_request(&pkg, 0, 0).0.forward().is_some());
}

#[test]
fn p2_acks_every_candidate_key() {
    // p = 5 with a large profile leaves many residue-consistent candidates
    let s = RequestSpec::new(vec![], tags(&["a1", "a2", "a3", "a4"]), 2).unwrap();
    let mut vals: Vec<alloc::string::String> = (0..16).map(|i| alloc::format!("x{i}")).collect();
    vals.push("a1".to_string());
    vals.push("a3".to_string());
    let refs: Vec<&str> = vals.iter().map(|s| s.as_str()).collect();
    let mut seen_multi = false;
    for seed in 0..20 {
        let (pkg, mut init) =
            create_request(&s, ProtocolId::P2, &RequestParams::new(5, seed)).unwrap();
        let mut p = participant(3, &refs);
        let (action, report) = p.handle_request(&pkg, 0, 0);
        let Action::Reply { reply, forward } = action else {
            panic!("true matcher must reply")
        };
        assert!(forward.is_some(), "P2 candidates keep relaying");
        assert_eq!(reply.acks.len(), report.candidate_keys);
        assert!(reply.acks.len() <= DEFAULT_ENUMERATION_LIMIT);
        seen_multi |= reply.acks.len() > 1;
        init.collect_replies(&[arrive(3, 0, reply)]);
        assert_eq!(init.matches().len(), 1);
    }
    assert!(seen_multi);
}

#[test]
fn replies_late_or_oversized_are_excluded() {
    let mut params = RequestParams::new(13, 8);
    params.created_at = 100;
    params.window = 50;
    params.kappa_max = Some(2);
    let (pkg, mut init) = create_request(&spec(), ProtocolId::P2, &params).unwrap();
    let mut p = participant(2, &["chess", "jazz", "hiking"]);
    let reply = p.handle_request(&pkg, 0, 100).0.reply().unwrap().clone();

    let late = init.collect_replies(&[arrive(2, 151, reply.clone())]);
    assert_eq!(late.rejected, vec![(2, Rejection::Late)]);

    let mut padded = reply.clone();
    let filler = SealedPayload {
        nonce: crate::channel::Nonce([1; 16]),
        ciphertext: vec![0; 48],
    };
    padded.acks.resize(3, filler);
    let big = init.collect_replies(&[arrive(2, 120, padded.clone())]);
    assert_eq!(big.rejected, vec![(2, Rejection::TooManyAcks)]);
    padded.acks.truncate(2);
    assert_eq!(
        init.collect_replies(&[arrive(2, 120, padded)])
            .matches
            .len(),
        1
    );
    let again = init.collect_replies(&[arrive(2, 130, reply)]);
    assert_eq!(again.rejected, vec![(2, Rejection::Duplicate)]);
}

#[test]
fn forged_reply_is_not_a_match() {
    let (_, mut init) =
        create_request(&spec(), ProtocolId::P2, &RequestParams::new(13, 8)).unwrap();
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(1);
    let wrong = crate::digest::Digest::random(&mut rng);
    let ack = crate::channel::make_ack(&wrong, &wrong, &[], &mut rng);
    let reply = ReplyPackage {
        request_id: init.request_id(),
        acks: vec![ack],
    };
    let got = init.collect_replies(&[arrive(4, 0, reply)]);
    assert_eq!(got.rejected, vec![(4, Rejection::NoValidAck)]);
}

#[test]
fn expired_duplicate_and_rate_limited_requests_drop() {
    let mut params = RequestParams::new(13, 1);
    params.expiry = 1000;
    let (pkg, _) = create_request(&spec(), ProtocolId::P1, &params).unwrap();
    let mut p = participant(1, &["opera"]);
    assert_eq!(
        p.handle_request(&pkg, 0, 1001).0,
        Action::Drop(DropReason::Expired)
    );
    assert!(matches!(
        p.handle_request(&pkg, 0, 1000).0,
        Action::Forward(_)
    ));
    assert_eq!(
        p.handle_request(&pkg, 0, 1000).0,
        Action::Drop(DropReason::Duplicate)
    );

    params.seed = 2;
    let (second, _) = create_request(&spec(), ProtocolId::P1, &params).unwrap();
    assert_eq!(
        p.handle_request(&second, 0, 1000).0,
        Action::Drop(DropReason::RateLimited)
    );
    params.seed = 3;
    let (third, _) = create_request(&spec(), ProtocolId::P1, &params).unwrap();
    assert!(matches!(
        p.handle_request(&third, 5, 1000).0,
        Action::Forward(_)
    ));
}

#[test]
fn p3_respects_entropy_budget() {
    let mut counts = alloc::collections::BTreeMap::new();
    let tag: alloc::collections::BTreeMap<_, _> =
        ["chess", "jazz", "hiking", "sushi", "opera", "a", "b", "c"]
            .iter()
            .map(|v| (v.to_string(), 1u64))
            .collect();
    counts.insert("tag".to_string(), tag);
    let stats = Arc::new(PopulationStats::from_counts(8, counts));
    let vals = ["chess", "jazz", "hiking"];
    for (phi, replies) in [(0.0, false), (2.9, false), (3.0, true)] {
        let (pkg, _) = create_request(&spec(), ProtocolId::P3, &RequestParams::new(13, 2)).unwrap();
        let config = ParticipantConfig {
            phi,
            ..ParticipantConfig::default()
        };
        let mut p =
            ParticipantState::new(1, profile(&vals), Some(stats.clone()), config, 0).unwrap();
        let (action, report) = p.handle_request(&pkg, 0, 0);
        assert_eq!(action.reply().is_some(), replies, "phi {phi}");
        assert!(report.leaked_entropy.unwrap() <= phi);
    }
}

#[test]
fn dynamic_salt_variant_matches_salted_request() {
    let salt = crate::digest::Digest::hash(b"somewhere");
    let mut params = RequestParams::new(13, 4);
    params.dynamic_salt = Some(salt);
    let (pkg, mut init) = create_request(&spec(), ProtocolId::P1, &params).unwrap();
    let mut plain = participant(1, &["chess", "jazz", "hiking"]);
    assert!(plain.handle_request(&pkg, 0, 0).0.reply().is_none());
    let mut salted = participant(2, &["chess", "jazz", "hiking"]);
    salted.add_dynamic_salt(&salt).unwrap();
    let reply = salted.handle_request(&pkg, 0, 0).0.reply().unwrap().clone();
    let got = init.collect_replies(&[arrive(2, 0, reply)]);
    assert_eq!(
        got.matches[0].session_key,
        derive_session_key(init.secret(), &got.matches[0].y)
    );
}

#[test]
fn kappa_default_bounds_honest_key_sets() {
    assert_eq!(default_kappa_max(2, 2, 11), 222);
    assert_eq!(default_kappa_max(1, 0, 13), 10);
    assert_eq!(default_kappa_max(0, 1, 101), 8);
    assert_eq!(default_kappa_max(6, 6, 3), DEFAULT_ENUMERATION_LIMIT);
}

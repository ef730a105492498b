use sealedbottle_core::matching::oracle_match;
use sealedbottle_core::profile::{
    generate_population, uniqueness_fraction, Attribute, PopulationParams, Profile, RequestSpec,
};
use sealedbottle_core::protocol::{
    create_request, Action, ParticipantConfig, ParticipantState, ProtocolId, ReceivedReply,
    RequestParams,
};

fn tag(v: &str) -> Attribute {
    Attribute::tag(v).unwrap()
}

#[test]
fn default_population_is_mostly_unique() {
    let pop = generate_population(&PopulationParams {
        n: 20_000,
        ..PopulationParams::default()
    })
    .unwrap();
    assert_eq!(pop.len(), 20_000);
    assert!(uniqueness_fraction(&pop.profiles) > 0.9);
}

#[test]
fn population_is_seed_deterministic() {
    let params = PopulationParams {
        n: 500,
        seed: 42,
        ..PopulationParams::default()
    };
    let a = generate_population(&params).unwrap();
    let b = generate_population(&params).unwrap();
    assert_eq!(a.profiles, b.profiles);
    let c = generate_population(&PopulationParams { seed: 43, ..params }).unwrap();
    assert_ne!(a.profiles, c.profiles);
}

fn exchange(spec: &RequestSpec, protocol: ProtocolId, profile: &Profile) -> bool {
    let (pkg, mut init) = create_request(spec, protocol, &RequestParams::new(13, 7)).unwrap();
    let mut node =
        ParticipantState::new(1, profile.clone(), None, ParticipantConfig::default(), 0).unwrap();
    match node.handle_request(&pkg, 0, 0).0 {
        Action::Reply { reply, .. } => !init
            .collect_replies(&[ReceivedReply {
                replier: 1,
                arrived_at: 0,
                package: reply,
            }])
            .matches
            .is_empty(),
        _ => false,
    }
}

#[test]
fn protocols_accept_exactly_the_oracle_matches() {
    let spec = RequestSpec::new(
        vec![tag("chess")],
        vec![tag("jazz"), tag("go"), tag("tea")],
        2,
    )
    .unwrap();
    let users = [
        vec!["chess", "jazz", "go"],
        vec!["chess", "jazz", "tea", "go", "rain"],
        vec!["chess", "jazz"],
        vec!["jazz", "go", "tea"],
        vec!["rain", "snow"],
    ];
    for attrs in users {
        let profile = Profile::new(attrs.iter().map(|a| tag(a))).unwrap();
        let truth = oracle_match(&spec, &profile).is_match();
        for protocol in [ProtocolId::P1, ProtocolId::P2] {
            assert_eq!(
                exchange(&spec, protocol, &profile),
                truth,
                "{attrs:?} {protocol:?}"
            );
        }
    }
}

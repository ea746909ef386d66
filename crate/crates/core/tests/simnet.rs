mod support;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wsdisco_core::adverts::PeerId;
use wsdisco_core::scenario::{phone_relay_scenario, Action, ScenarioConfig, ScheduledAction, ServiceSpec};
use wsdisco_core::simnet::{render_trace, run_scenario, TraceStyle};

fn zero_jitter(mut s: ScenarioConfig) -> ScenarioConfig {
    for p in &mut s.peers {
        for l in &mut p.links {
            l.jitter_ms = 0;
        }
    }
    s.defaults.latency.jitter_ms = 0;
    s
}

#[test]
fn same_seed_same_trace_and_report() {
    let s = phone_relay_scenario();
    let a = run_scenario(&s, 42).unwrap();
    let b = run_scenario(&s, 42).unwrap();
    assert_eq!(render_trace(&a.trace, TraceStyle::Event), render_trace(&b.trace, TraceStyle::Event));
    assert_eq!(a.report().to_json(), b.report().to_json());
}

#[test]
fn different_seeds_change_jitter_only() {
    let s = phone_relay_scenario();
    let traces: Vec<String> =
        (0..5).map(|seed| render_trace(&run_scenario(&s, seed).unwrap().trace, TraceStyle::Event)).collect();
    assert!(traces.windows(2).any(|w| w[0] != w[1]));
    for seed in 0..20 {
        let out = run_scenario(&s, seed).unwrap();
        assert!(out.metrics.violations().is_empty());
        assert_eq!(out.metrics.queries_completed, 1);
        let latency = out.metrics.discovery_latencies[0];
        assert!((440..=440 + 4 * 5).contains(&latency), "{latency}");
    }
}

#[test]
fn phone_relay_finds_only_the_weather_service() {
    let out = run_scenario(&phone_relay_scenario(), 7).unwrap();
    let q = &out.metrics.queries[0];
    assert_eq!(q.originator, PeerId::derive("phoneB"));
    assert_eq!(q.hits.len(), 1);
    assert_eq!(q.hits[0].responder, PeerId::derive("rdv1"));
    let report = out.report();
    assert_eq!(report.queries, 1);
    assert_eq!(report.stale_results, 0);
    // two edges, two hops each
    assert_eq!(report.messages["register"], 4);
}

#[test]
fn trace_uses_peer_names() {
    let out = run_scenario(&zero_jitter(phone_relay_scenario()), 0).unwrap();
    let text = render_trace(&out.trace, TraceStyle::Event);
    assert!(text.lines().any(|l| l.starts_with("t=200 ") && l.contains(" relayed phoneA->relay ")), "{text}");
    let delivery = render_trace(&out.trace, TraceStyle::Delivery);
    assert!(delivery.lines().any(|l| l.starts_with("220 | relay -> rdv1 | relayed | ")), "{delivery}");
}

#[test]
fn invalid_scenario_is_rejected_before_running() {
    let mut s = phone_relay_scenario();
    s.schedule[3].action = Action::Discover {
        peer: "nobody".into(),
        terms: "weather".into(),
        group: None,
        k: None,
        hop_limit: None,
        timeout_ms: None,
    };
    let err = run_scenario(&s, 0).unwrap_err();
    assert_eq!(err.field_path(), Some("schedule[3].peer"));
}

#[test]
fn expired_entries_are_not_returned_after_switch() {
    let mut s = zero_jitter(phone_relay_scenario());
    for item in &mut s.schedule {
        if let Action::Publish { lifetime_ms, .. } = &mut item.action {
            *lifetime_ms = Some(3_000);
        }
    }
    s.peers.push(wsdisco_core::scenario::PeerSpec {
        neighbors: vec!["rdv1".into()],
        ..wsdisco_core::scenario::PeerSpec::new("rdv3", wsdisco_core::scenario::RoleSpec::Rendezvous)
    });
    s.schedule.push(ScheduledAction {
        at_ms: 500,
        action: Action::Switch { peer: "phoneA".into(), rendezvous: "rdv3".into() },
    });
    let discover = s.schedule[3].clone();
    s.schedule.push(ScheduledAction { at_ms: 6_000, ..discover });
    s.horizon_ms = 8_000;
    let out = run_scenario(&s, 3).unwrap();
    assert_eq!(out.metrics.stale_results, 0);
    assert_eq!(out.metrics.queries.len(), 2);
    assert_eq!(out.metrics.queries[0].hits.len(), 1);
    assert!(out.metrics.queries[1].hits.is_empty());
    assert!(out.metrics.expired_count >= 3);
}

#[test]
fn republish_after_switch_reaches_new_rendezvous() {
    let mut s = zero_jitter(phone_relay_scenario());
    s.peers.push(wsdisco_core::scenario::PeerSpec {
        neighbors: vec!["rdv2".into()],
        ..wsdisco_core::scenario::PeerSpec::new("rdv3", wsdisco_core::scenario::RoleSpec::Rendezvous)
    });
    for item in &mut s.schedule {
        if let Action::Publish { lifetime_ms, .. } = &mut item.action {
            *lifetime_ms = Some(3_000);
        }
    }
    s.schedule.push(ScheduledAction {
        at_ms: 500,
        action: Action::Switch { peer: "phoneA".into(), rendezvous: "rdv3".into() },
    });
    s.schedule.push(ScheduledAction {
        at_ms: 1_000,
        action: Action::Republish {
            peer: "phoneA".into(),
            service: "WeatherService".into(),
            lifetime_ms: Some(20_000),
        },
    });
    let discover = s.schedule[3].clone();
    s.schedule.push(ScheduledAction { at_ms: 6_000, ..discover });
    s.horizon_ms = 8_000;
    let out = run_scenario(&s, 0).unwrap();
    assert_eq!(out.report().messages["republish-rejected"], 2);
    let late = &out.metrics.queries[1];
    assert_eq!(late.hits.len(), 1);
    assert_eq!(late.hits[0].responder, PeerId::derive("rdv3"));
    assert_eq!(out.metrics.stale_results, 0);
}

#[test]
fn messages_to_departed_peers_are_dropped_and_counted() {
    let mut s = zero_jitter(phone_relay_scenario());
    s.schedule.push(ScheduledAction { at_ms: 2_100, action: Action::Leave { peer: "phoneB".into() } });
    let out = run_scenario(&s, 0).unwrap();
    let m = &out.metrics;
    assert_eq!(m.messages_dropped, 1);
    assert!(m.violations().is_empty(), "{:?}", m.violations());
    assert_eq!(m.messages_sent, m.messages_delivered + m.messages_dropped + m.messages_in_flight);
    assert_eq!(m.queries_completed, 0);
}

#[test]
fn xml_services_are_published_verbatim() {
    let mut s = phone_relay_scenario();
    let class = wsdisco_core::adverts::ModuleClassId::derive(wsdisco_core::scenario::DEFAULT_CLASS_NAME);
    let host = PeerId::derive("phoneA");
    let ops = vec!["getStatus".to_string()];
    let msa = wsdisco_core::adverts::ServiceSketch {
        class_id: &class,
        host: &host,
        name: "ParkingWeather",
        description: "free spaces",
        operations: &ops,
    }
    .build()
    .unwrap();
    s.schedule[1].action = Action::Publish {
        peer: "phoneA".into(),
        service: ServiceSpec::Xml { xml: msa.to_xml() },
        lifetime_ms: None,
        group: None,
    };
    let out = run_scenario(&s, 0).unwrap();
    let hits: Vec<_> = out.metrics.queries[0].hits.iter().map(|h| h.hit.msid.clone()).collect();
    assert_eq!(hits.len(), 2);
    assert!(hits.contains(&msa.msid));
}

#[test]
fn churn_sample_has_no_stale_or_abandoned_hits() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut queries = 0;
    for i in 0..40 {
        let churn = support::churn_scenario(&mut rng);
        let out = run_scenario(&churn.config, i).unwrap_or_else(|e| panic!("scenario {i}: {e}"));
        assert!(out.metrics.violations().is_empty(), "scenario {i}: {:?}", out.metrics.violations());
        let bad = support::abandoned_hits(&churn, &out);
        assert!(bad.is_empty(), "scenario {i}: {bad:?}");
        queries += out.metrics.queries.len();
    }
    assert!(queries > 100);
}

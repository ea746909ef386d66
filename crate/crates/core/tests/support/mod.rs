#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use wsdisco_core::adverts::{
    ModuleClassId, ModuleSpecAdvertisement, ModuleSpecId, PeerId, PipeAdvertisement, PipeType, ServiceSketch,
    WsdlDocument, WsdlMessage, WsdlOperation, WsdlPart, WsdlPortType,
};
use wsdisco_core::groups::GroupId;
use wsdisco_core::index::FieldWeights;
use wsdisco_core::overlay::{Message, OverlayError, PeerRole, PeerState, QueryId, ResponseHit};
use wsdisco_core::scenario::{
    Action, Defaults, LatencySpec, LinkSpec, PeerSpec, RoleSpec, ScenarioConfig, ScheduledAction, ServiceSpec,
    WeightsSpec,
};
use wsdisco_core::simnet::SimOutput;
use wsdisco_core::Millis;

pub const VOCAB: &[&str] = &[
    "forecast",
    "picture",
    "photo",
    "camera",
    "health",
    "sensor",
    "heart",
    "rate",
    "map",
    "traffic",
    "music",
    "news",
    "gps",
    "location",
    "temperature",
    "battery",
    "contact",
    "calendar",
    "sms",
    "alarm",
];

// ---- brute-force search oracle ----

/// Splits into ASCII alphanumeric runs, breaks runs before an uppercase
/// letter that follows a lowercase one, lowercases, keeps tokens of length
/// two or more and all-digit tokens.
pub fn oracle_tokens(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut pieces: Vec<String> = Vec::new();
    let mut start = None;
    for i in 0..=chars.len() {
        let alnum = i < chars.len() && chars[i].is_ascii_alphanumeric();
        let camel = alnum && i > 0 && chars[i].is_ascii_uppercase() && chars[i - 1].is_ascii_lowercase();
        if let Some(s) = start {
            if !alnum || camel {
                pieces.push(chars[s..i].iter().collect());
                start = None;
            }
        }
        if alnum && start.is_none() {
            start = Some(i);
        }
    }
    pieces
        .into_iter()
        .map(|p| p.to_ascii_lowercase())
        .filter(|p| p.len() >= 2 || p.chars().all(|c| c.is_ascii_digit()))
        .collect()
}

fn oracle_wsdl_text(w: &WsdlDocument) -> String {
    let mut words = vec![w.service_name.clone()];
    for pt in &w.port_types {
        words.push(pt.name.clone());
    }
    for pt in &w.port_types {
        for op in &pt.operations {
            words.push(op.name.clone());
        }
    }
    for m in &w.messages {
        words.push(m.name.clone());
    }
    for m in &w.messages {
        for p in &m.parts {
            words.push(p.name.clone());
        }
    }
    words.push(w.target_namespace.clone());
    words.join(" ")
}

fn oracle_tf(doc: &ModuleSpecAdvertisement, weights: &FieldWeights, token: &str) -> f64 {
    let mut tf = 0.0;
    for (text, w) in [
        (doc.name.clone(), weights.name),
        (doc.description.clone(), weights.description),
        (oracle_wsdl_text(&doc.wsdl), weights.wsdl),
    ] {
        for t in oracle_tokens(&text) {
            if t == token {
                tf += w;
            }
        }
    }
    tf
}

/// Full scan: returns the top-k (msid, score) and the number of matches.
pub fn oracle_rank(
    docs: &[ModuleSpecAdvertisement],
    weights: &FieldWeights,
    query: &str,
    k: usize,
) -> (Vec<(ModuleSpecId, f64)>, usize) {
    let terms: BTreeSet<String> = oracle_tokens(query).into_iter().collect();
    let n = docs.len() as f64;
    let mut scores: BTreeMap<ModuleSpecId, f64> = BTreeMap::new();
    for term in &terms {
        let tfs: Vec<f64> = docs.iter().map(|d| oracle_tf(d, weights, term)).collect();
        let df = tfs.iter().filter(|&&tf| tf > 0.0).count() as f64;
        let idf = (1.0 + n / (1.0 + df)).ln();
        for (doc, tf) in docs.iter().zip(tfs) {
            if tf > 0.0 {
                *scores.entry(doc.msid.clone()).or_insert(0.0) += tf * idf;
            }
        }
    }
    let total = scores.len();
    let mut ranked: Vec<(ModuleSpecId, f64)> = scores.into_iter().collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    ranked.truncate(k);
    (ranked, total)
}

// ---- corpora ----

fn camel(words: &[&str]) -> String {
    words
        .iter()
        .map(|w| {
            let mut c = w.chars();
            let first = c.next().unwrap().to_ascii_uppercase();
            std::iter::once(first).chain(c).collect::<String>()
        })
        .collect()
}

fn pick<'a>(rng: &mut ChaCha8Rng, vocab: &[&'a str], lo: usize, hi: usize) -> Vec<&'a str> {
    let n = rng.gen_range(lo..=hi);
    (0..n).map(|_| *vocab.choose(rng).unwrap()).collect()
}

pub fn sketch_doc(i: usize, name: &str, description: &str, operations: &[String]) -> ModuleSpecAdvertisement {
    let class = ModuleClassId::derive("MobileWebServices");
    let host = PeerId::derive(&format!("host{i}"));
    ServiceSketch { class_id: &class, host: &host, name, description, operations }.build().unwrap()
}

pub fn random_doc(rng: &mut ChaCha8Rng, i: usize, vocab: &[&str]) -> ModuleSpecAdvertisement {
    let name = camel(&pick(rng, vocab, 1, 3));
    let description = pick(rng, vocab, 0, 12).join(if rng.gen_bool(0.5) { " " } else { ", " });
    let ops: Vec<String> = (0..rng.gen_range(0..4))
        .map(|_| format!("get{}", camel(&pick(rng, vocab, 1, 2))))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    sketch_doc(i, &name, &description, &ops)
}

pub fn random_corpus(rng: &mut ChaCha8Rng, n: usize) -> Vec<ModuleSpecAdvertisement> {
    (0..n).map(|i| random_doc(rng, i, VOCAB)).collect()
}

pub fn random_query(rng: &mut ChaCha8Rng) -> String {
    let mut words = pick(rng, VOCAB, 1, 3).into_iter().map(String::from).collect::<Vec<_>>();
    if rng.gen_bool(0.2) {
        words.push("zzqx".into());
    }
    if rng.gen_bool(0.2) {
        words.push("service".into());
    }
    words.join(" ")
}

/// `total` documents; exactly the first `matching` mention `token`, which
/// appears nowhere else.
pub fn funnel_corpus(rng: &mut ChaCha8Rng, total: usize, matching: usize, token: &str) -> Vec<ModuleSpecAdvertisement> {
    let vocab: Vec<&str> = VOCAB.iter().copied().filter(|w| !w.contains(token)).collect();
    (0..total)
        .map(|i| {
            let mut doc = random_doc(rng, i, &vocab);
            if i < matching {
                doc.description = format!("{} {token} {}", doc.description, pick(rng, &vocab, 0, 3).join(" "));
            }
            doc
        })
        .collect()
}

// ---- arbitrary MSAs for serialization ----

const TEXT_CHARS: &[char] = &[
    'a', 'b', 'Z', '0', '9', ' ', ' ', '&', '<', '>', '"', '\'', '\t', '\n', '\r', 'é', '日', '-', '_', ':', '/', ';',
    '#', '=',
];

fn random_text(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> String {
    let n = rng.gen_range(lo..=hi);
    (0..n).map(|_| *TEXT_CHARS.choose(rng).unwrap()).collect()
}

fn random_ident(rng: &mut ChaCha8Rng) -> String {
    let base = camel(&pick(rng, VOCAB, 1, 2));
    format!("{base}{}", random_text(rng, 0, 3))
}

pub fn random_msa(rng: &mut ChaCha8Rng) -> ModuleSpecAdvertisement {
    let class = ModuleClassId::derive(&format!("class{}", rng.gen_range(0..5)));
    let msid = ModuleSpecId::derive(&class, &format!("{}", rng.gen::<u64>()));
    let mut messages: Vec<WsdlMessage> = Vec::new();
    for _ in 0..rng.gen_range(0..5) {
        let parts = (0..rng.gen_range(0..3))
            .map(|_| WsdlPart { name: random_ident(rng), type_name: format!("xsd:{}", random_ident(rng)) })
            .collect();
        messages.push(WsdlMessage { name: random_ident(rng), parts });
    }
    let mut port_types = Vec::new();
    if !messages.is_empty() {
        for _ in 0..rng.gen_range(0..3) {
            let operations = (0..rng.gen_range(0..4))
                .map(|_| WsdlOperation {
                    name: random_ident(rng),
                    input_message: messages.choose(rng).unwrap().name.clone(),
                    output_message: messages.choose(rng).unwrap().name.clone(),
                })
                .collect();
            port_types.push(WsdlPortType { name: random_ident(rng), operations });
        }
    }
    let mut peer = PeerId::derive(&format!("p{}", rng.gen::<u32>()));
    if rng.gen_bool(0.5) {
        let digits: String = (0..rng.gen_range(3..=15)).map(|_| char::from(b'0' + rng.gen_range(0..10))).collect();
        peer = peer.with_phone(&format!("+{digits}")).unwrap();
    }
    let pipe_type = *[PipeType::Unicast, PipeType::UnicastSecure, PipeType::Propagate].choose(rng).unwrap();
    let msa = ModuleSpecAdvertisement {
        msid,
        name: random_ident(rng),
        creator: random_text(rng, 0, 10),
        spec_uri: format!("urn:x:{}", random_text(rng, 0, 6)),
        version: random_text(rng, 0, 4),
        description: random_text(rng, 0, 40),
        wsdl: WsdlDocument {
            target_namespace: format!("urn:{}", random_ident(rng)),
            messages,
            port_types,
            service_name: random_ident(rng),
            port_address: format!("http://{}", random_text(rng, 0, 10)),
        },
        pipe: PipeAdvertisement { pipe_id: format!("urn:jxta:{}", random_ident(rng)), pipe_type, endpoint_peer: peer },
        proxy: random_text(rng, 0, 8),
        auth: random_text(rng, 0, 8),
    };
    msa.validate().expect("generator emits valid adverts");
    msa
}

// ---- churn scenarios ----

#[derive(Debug, Clone)]
pub struct ChurnScenario {
    pub config: ScenarioConfig,
    /// Upper bound on any advertisement lifetime in the schedule.
    pub max_lifetime: Millis,
    /// Upper bound on one message's delay from an edge to its rendezvous.
    pub delivery_bound: Millis,
}

const SERVICE_NAMES: &[&str] = &["Weather", "Picture", "HealthSensor", "Traffic", "Music", "Calendar"];

pub fn churn_scenario(rng: &mut ChaCha8Rng) -> ChurnScenario {
    let n_rdv = rng.gen_range(2..=5);
    let n_relay = rng.gen_range(0..=2);
    let n_edge = rng.gen_range(2..=50 - n_rdv - n_relay).min(rng.gen_range(2..=30));
    let horizon = 60_000;
    let mut max_hop = 25;
    let mut link = |rng: &mut ChaCha8Rng, to: &str, lo: u64, hi: u64| {
        let base = rng.gen_range(lo..=hi);
        let jitter = rng.gen_range(0..=30);
        max_hop = max_hop.max(base + jitter);
        LinkSpec { to: to.into(), base_ms: base, jitter_ms: jitter }
    };

    let rdv_names: Vec<String> = (0..n_rdv).map(|i| format!("r{i}")).collect();
    let relay_names: Vec<String> = (0..n_relay).map(|i| format!("y{i}")).collect();
    let edge_names: Vec<String> = (0..n_edge).map(|i| format!("e{i}")).collect();
    let mut peers = Vec::new();
    for (i, name) in rdv_names.iter().enumerate() {
        let role = if rng.gen_bool(0.3) { RoleSpec::Super } else { RoleSpec::Rendezvous };
        let mut spec = PeerSpec::new(name, role);
        if i + 1 < n_rdv {
            spec.neighbors.push(rdv_names[i + 1].clone());
            spec.links.push(link(rng, &rdv_names[i + 1], 5, 60));
        }
        if n_rdv > 2 && rng.gen_bool(0.3) {
            let other = rdv_names.choose(rng).unwrap();
            if other != name {
                spec.neighbors.push(other.clone());
            }
        }
        spec.cache_capacity = rng.gen_bool(0.2).then(|| rng.gen_range(2..=8));
        peers.push(spec);
    }
    for name in &relay_names {
        let mut spec = PeerSpec::new(name, RoleSpec::Relay);
        for r in &rdv_names {
            if rng.gen_bool(0.5) {
                spec.links.push(link(rng, r, 5, 60));
            }
        }
        peers.push(spec);
    }
    // relays also route through supers
    let relay_capable: Vec<String> =
        peers.iter().filter(|p| matches!(p.role, RoleSpec::Relay | RoleSpec::Super)).map(|p| p.name.clone()).collect();
    for (i, name) in edge_names.iter().enumerate() {
        let mut spec = PeerSpec::new(name, RoleSpec::Edge);
        spec.rendezvous = Some(rdv_names.choose(rng).unwrap().clone());
        if !relay_capable.is_empty() && rng.gen_bool(0.5) {
            let relay = relay_capable.choose(rng).unwrap().clone();
            spec.links.push(link(rng, &relay, 20, 250));
            spec.relay = Some(relay);
        } else {
            let r = spec.rendezvous.clone().unwrap();
            spec.links.push(link(rng, &r, 20, 250));
        }
        if rng.gen_bool(0.2) {
            spec.phone = Some(format!("+35840{i:07}"));
        }
        spec.online = rng.gen_bool(0.95);
        peers.push(spec);
    }

    let groups = vec!["/a".to_string(), "/b".to_string(), "/a/x".to_string()];
    let group_choices = ["/", "/a", "/b", "/a/x"];
    let mut schedule = Vec::new();
    let mut published: Vec<(String, String, Millis)> = Vec::new();
    let mut max_lifetime = 0;
    let n_events = rng.gen_range(10..=200);
    for _ in 0..n_events {
        let at = rng.gen_range(0..horizon - 5_000);
        let edge = edge_names.choose(rng).unwrap().clone();
        let roll = rng.gen_range(0..100);
        let action = if roll < 30 {
            let service = format!("{}{}", SERVICE_NAMES.choose(rng).unwrap(), rng.gen_range(0..3));
            let lifetime = rng.gen_range(1_000..=15_000);
            max_lifetime = max_lifetime.max(lifetime);
            published.push((edge.clone(), service.clone(), at));
            let words: Vec<String> = pick(rng, VOCAB, 0, 4).into_iter().map(String::from).collect();
            Action::Publish {
                peer: edge,
                service: ServiceSpec::Inline {
                    name: service.clone(),
                    description: words.join(" "),
                    operations: vec![format!("get{service}")],
                    class: None,
                },
                lifetime_ms: Some(lifetime),
                group: Some(group_choices.choose(rng).unwrap().to_string()),
            }
        } else if roll < 45 && !published.is_empty() {
            let (peer, service, t) = published.choose(rng).unwrap().clone();
            let lifetime = rng.gen_range(1_000..=15_000);
            max_lifetime = max_lifetime.max(lifetime);
            let at = rng.gen_range(t + 1..horizon - 4_000);
            schedule.push(ScheduledAction {
                at_ms: at,
                action: Action::Republish { peer, service, lifetime_ms: Some(lifetime) },
            });
            continue;
        } else if roll < 75 {
            let terms: Vec<&str> =
                pick(rng, &["weather", "picture", "health", "sensor", "traffic", "music", "forecast"], 1, 2);
            Action::Discover {
                peer: edge,
                terms: terms.join(" "),
                group: Some(group_choices.choose(rng).unwrap().to_string()),
                k: Some(rng.gen_range(1..=10)),
                hop_limit: Some(rng.gen_range(0..=7)),
                timeout_ms: Some(rng.gen_range(500..=3_000)),
            }
        } else if roll < 88 {
            Action::Switch { peer: edge, rendezvous: rdv_names.choose(rng).unwrap().clone() }
        } else if roll < 94 {
            let peer = if rng.gen_bool(0.8) { edge } else { rdv_names.choose(rng).unwrap().clone() };
            Action::Leave { peer }
        } else {
            let peer = if rng.gen_bool(0.8) { edge } else { rdv_names.choose(rng).unwrap().clone() };
            Action::Join { peer }
        };
        schedule.push(ScheduledAction { at_ms: at, action });
    }
    let default_latency = LatencySpec { base_ms: 20, jitter_ms: 5 };
    let config = ScenarioConfig {
        peers,
        groups,
        classes: Vec::new(),
        schedule,
        horizon_ms: horizon,
        sweep_interval_ms: rng.gen_range(200..=2_000),
        field_weights: WeightsSpec::default(),
        defaults: Defaults { latency: default_latency, ..Defaults::default() },
    };
    ChurnScenario { config, max_lifetime, delivery_bound: 2 * max_hop }
}

/// Hits returned by a rendezvous the publisher had left more than one
/// lifetime plus delivery delay before the query was issued, and did not
/// return to while the query was open.
pub fn abandoned_hits(churn: &ChurnScenario, out: &SimOutput) -> Vec<String> {
    let cfg = &churn.config;
    let id = |name: &str| PeerId::derive(name);
    // attachment timeline per edge: (from time, rendezvous)
    let mut attached: BTreeMap<PeerId, Vec<(Millis, PeerId)>> = BTreeMap::new();
    for p in &cfg.peers {
        if let Some(r) = &p.rendezvous {
            attached.entry(id(&p.name)).or_default().push((0, id(r)));
        }
    }
    let mut switches: Vec<(Millis, usize, PeerId, PeerId)> = Vec::new();
    for (i, item) in cfg.schedule.iter().enumerate() {
        if let Action::Switch { peer, rendezvous } = &item.action {
            switches.push((item.at_ms, i, id(peer), id(rendezvous)));
        }
    }
    switches.sort();
    for (at, _, peer, rdv) in switches {
        attached.get_mut(&peer).unwrap().push((at, rdv));
    }
    let window = churn.max_lifetime + churn.delivery_bound;
    let mut bad = Vec::new();
    for q in &out.metrics.queries {
        for hit in &q.hits {
            let timeline = &attached[&hit.publisher];
            let from = q.issued_at.saturating_sub(window);
            let recent = timeline.iter().enumerate().any(|(i, (start, rdv))| {
                let end = timeline.get(i + 1).map_or(Millis::MAX, |n| n.0);
                *rdv == hit.responder && *start <= q.collected_at && end >= from
            });
            if !recent {
                bad.push(format!(
                    "query {} at {} got {} from {}",
                    q.query_id, q.issued_at, hit.hit.msid, hit.responder
                ));
            }
        }
    }
    bad
}

// ---- super peer equivalence ----

fn random_plain_message(
    rng: &mut ChaCha8Rng,
    edges: &[PeerId],
    others: &[PeerId],
    pool: &[ModuleSpecAdvertisement],
) -> Message {
    let group = || ["/", "/a"];
    let everyone: Vec<PeerId> = edges.iter().chain(others).cloned().collect();
    let qid =
        |rng: &mut ChaCha8Rng| QueryId { originator: edges.choose(rng).unwrap().clone(), seq: rng.gen_range(1..=3) };
    match rng.gen_range(0..7) {
        0 => Message::Register { edge: edges.choose(rng).unwrap().clone() },
        1 | 2 => Message::PublishRequest {
            advert: Box::new(pool.choose(rng).unwrap().clone()),
            lifetime_ms: rng.gen_range(1..=5_000),
            group: GroupId::parse(group().choose(rng).unwrap()).unwrap(),
        },
        3 => Message::RepublishRequest {
            msid: pool.choose(rng).unwrap().msid.clone(),
            lifetime_ms: rng.gen_range(1..=5_000),
        },
        4 => Message::DiscoveryQuery {
            query_id: qid(rng),
            originator: edges.choose(rng).unwrap().clone(),
            terms: ["weather", "picture sensor", "service", "zzz"].choose(rng).unwrap().to_string(),
            group: GroupId::parse(group().choose(rng).unwrap()).unwrap(),
            k: rng.gen_range(1..=3),
            hops_remaining: rng.gen_range(0..=3),
        },
        5 => {
            let hits = if rng.gen_bool(0.5) {
                let advert = pool.choose(rng).unwrap().clone();
                vec![ResponseHit {
                    hit: wsdisco_core::index::ScoredHit {
                        msid: advert.msid.clone(),
                        score: 1.5,
                        matched_terms: BTreeSet::new(),
                    },
                    advert,
                    group: GroupId::root(),
                    publisher: edges[0].clone(),
                    expires_at: 10_000_000,
                }]
            } else {
                Vec::new()
            };
            Message::DiscoveryResponse { query_id: qid(rng), responder: everyone.choose(rng).unwrap().clone(), hits }
        }
        _ => Message::RepublishRejected { msid: pool.choose(rng).unwrap().msid.clone() },
    }
}

fn roll_back_check(label: &str, before: &PeerState, after: &PeerState) -> Result<(), String> {
    if before != after {
        return Err(format!("{label}: failed transition changed state"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SuperStats {
    pub emitted: usize,
    pub silent: usize,
    pub unexpected: usize,
    pub failed: usize,
}

impl std::ops::AddAssign for SuperStats {
    fn add_assign(&mut self, o: Self) {
        self.emitted += o.emitted;
        self.silent += o.silent;
        self.unexpected += o.unexpected;
        self.failed += o.failed;
    }
}

/// Replays a random message sequence against a super peer and, in
/// lockstep, against a pure rendezvous and a pure relay with the same id.
/// The super peer must produce the rendezvous output followed by the relay
/// output, fail whenever either fails for a reason other than not handling
/// the message, and keep its rendezvous and relay state equal to theirs.
pub fn check_super_equivalence(seed: u64) -> Result<SuperStats, String> {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let me = PeerId::derive("super");
    let edges: Vec<PeerId> = (0..3).map(|i| PeerId::derive(&format!("edge{i}"))).collect();
    let rdvs = vec![PeerId::derive("rdvA"), PeerId::derive("rdvB")];
    let stranger = PeerId::derive("stranger");
    let mut others = rdvs.clone();
    others.push(stranger.clone());
    let class = ModuleClassId::derive("MobileWebServices");
    let pool: Vec<ModuleSpecAdvertisement> = ["WeatherService", "PictureService", "HealthSensorService", "WeatherMap"]
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let host = &edges[i % edges.len()];
            let ops = vec![format!("get{name}")];
            ServiceSketch { class_id: &class, host, name, description: "sensor data", operations: &ops }
                .build()
                .unwrap()
        })
        .collect();

    let capacity = rng.gen_range(1..=4);
    let setup = |role: PeerRole| {
        let mut s = PeerState::new(me.clone(), role).with_cache_capacity(capacity);
        if role.is_rendezvous() {
            for r in &rdvs {
                s.add_neighbor(r.clone());
            }
        }
        if role.is_relay() {
            s.add_route(rdvs[0].clone(), rdvs[0].clone());
            s.add_route(edges[0].clone(), edges[0].clone());
        }
        s
    };
    let mut sup = setup(PeerRole::Super);
    let mut rdv = setup(PeerRole::Rendezvous);
    let mut relay = setup(PeerRole::Relay);

    let senders: Vec<PeerId> = edges.iter().chain(&others).cloned().collect();
    let targets: Vec<PeerId> = vec![me.clone(), edges[0].clone(), edges[1].clone(), rdvs[0].clone(), stranger.clone()];
    let steps = rng.gen_range(1..=40);
    let mut now: Millis = 0;
    let mut stats = SuperStats::default();
    for step in 0..steps {
        now += rng.gen_range(0..=1_500);
        if rng.gen_bool(0.1) {
            let a = sup.sweep(now);
            let b = rdv.sweep(now);
            if a != b {
                return Err(format!("step {step}: sweep removed {a:?} vs {b:?}"));
            }
            relay.sweep(now);
        }
        let from = senders.choose(&mut rng).unwrap().clone();
        let mut msg = random_plain_message(&mut rng, &edges, &others, &pool);
        for _ in 0..rng.gen_range(0..=2) {
            if rng.gen_bool(0.5) {
                msg = Message::Relayed {
                    source: senders.choose(&mut rng).unwrap().clone(),
                    target: targets.choose(&mut rng).unwrap().clone(),
                    inner: Box::new(msg),
                };
            }
        }

        let (sup0, rdv0, relay0) = (sup.clone(), rdv.clone(), relay.clone());
        let got = sup.handle_message(&from, msg.clone(), now);
        let r = rdv.handle_message(&from, msg.clone(), now);
        let y = relay.handle_message(&from, msg.clone(), now);
        let hard = |res: &Result<_, OverlayError>| matches!(res, Err(e) if !e.is_unexpected());
        let expected: Result<Vec<_>, OverlayError> = if hard(&y) {
            Err(y.clone().unwrap_err())
        } else if hard(&r) {
            Err(r.clone().unwrap_err())
        } else if r.is_err() && y.is_err() {
            Err(OverlayError::Unexpected { role: PeerRole::Super, kind: msg.kind() })
        } else {
            let mut out = r.clone().unwrap_or_default();
            out.extend(y.clone().unwrap_or_default());
            Ok(out)
        };
        if got != expected {
            return Err(format!("step {step}: {} from {from}: super gave {got:?}, expected {expected:?}", msg.kind()));
        }
        match &got {
            Ok(out) if out.is_empty() => stats.silent += 1,
            Ok(_) => stats.emitted += 1,
            Err(e) if e.is_unexpected() => stats.unexpected += 1,
            Err(_) => stats.failed += 1,
        }
        if got.is_err() {
            roll_back_check(&format!("step {step}"), &sup0, &sup)?;
            rdv = rdv0;
            relay = relay0;
        }
        if sup.cache != rdv.cache
            || sup.index != rdv.index
            || sup.edges != rdv.edges
            || sup.seen_queries != rdv.seen_queries
            || sup.route_table != relay.route_table
        {
            return Err(format!("step {step}: state diverged after {}", msg.kind()));
        }
    }
    Ok(stats)
}

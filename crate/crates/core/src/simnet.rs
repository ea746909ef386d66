//! Deterministic discrete-event simulation of the overlay.
//!
//! Events are ordered by `(time, sequence)`; every random draw (link jitter)
//! comes from one ChaCha8 stream seeded by the caller, so a scenario and a
//! seed fully determine the trace and the report.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::adverts::{ModuleSpecId, PeerId};
use crate::overlay::{Envelope, Message, OverlayError, PeerRole, PeerState, QueryId, ReceivedHit};
use crate::scenario::{link_key, LatencySpec, ResolvedAction, ResolvedScenario, ScenarioConfig, ScenarioError};
use crate::Millis;

/// Per-link delay: `base + uniform(0..=jitter)`.
#[derive(Debug, Clone)]
pub struct LatencyModel {
    links: BTreeMap<(PeerId, PeerId), LatencySpec>,
    default: LatencySpec,
}

impl LatencyModel {
    pub fn new(links: BTreeMap<(PeerId, PeerId), LatencySpec>, default: LatencySpec) -> Self {
        Self { links, default }
    }

    pub fn link(&self, a: &PeerId, b: &PeerId) -> LatencySpec {
        self.links.get(&link_key(a, b)).copied().unwrap_or(self.default)
    }

    pub fn sample(&self, a: &PeerId, b: &PeerId, rng: &mut ChaCha8Rng) -> Millis {
        let spec = self.link(a, b);
        spec.base_ms + rng.gen_range(0..=spec.jitter_ms)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimEventKind {
    Deliver { from: PeerId, to: PeerId, message: Message },
    PeerJoin(PeerId),
    PeerLeave(PeerId),
    NetworkSwitch { peer: PeerId, rendezvous: PeerId },
    Action(usize),
    SweepTick(PeerId),
    Collect { peer: PeerId, query_id: QueryId },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimEvent {
    pub at: Millis,
    pub seq: u64,
    pub kind: SimEventKind,
}

impl Eq for SimEvent {}

impl PartialOrd for SimEvent {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SimEvent {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.at, self.seq).cmp(&(other.at, other.seq))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub at: Millis,
    pub seq: u64,
    pub kind: String,
    pub src: String,
    pub dst: String,
    pub summary: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceStyle {
    /// `t=<ms> seq=<n> <kind> <src>-><dst> <summary>`
    #[default]
    Event,
    /// `<ms> | <src> -> <dst> | <kind> | <summary>`
    Delivery,
}

impl TraceRecord {
    pub fn render(&self, style: TraceStyle) -> String {
        match style {
            TraceStyle::Event => {
                let line =
                    format!("t={} seq={} {} {}->{} {}", self.at, self.seq, self.kind, self.src, self.dst, self.summary);
                line.trim_end().to_string()
            }
            TraceStyle::Delivery => {
                format!("{} | {} -> {} | {} | {}", self.at, self.src, self.dst, self.kind, self.summary)
            }
        }
    }
}

pub fn render_trace(records: &[TraceRecord], style: TraceStyle) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&r.render(style));
        out.push('\n');
    }
    out
}

/// One query as seen by its originator at the deadline.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryRecord {
    pub query_id: QueryId,
    pub originator: PeerId,
    pub terms: String,
    pub issued_at: Millis,
    pub collected_at: Millis,
    pub last_response_at: Option<Millis>,
    pub hits: Vec<ReceivedHit>,
}

impl QueryRecord {
    pub fn latency(&self) -> Option<Millis> {
        if self.hits.is_empty() {
            return None;
        }
        self.last_response_at.map(|t| t - self.issued_at)
    }
}

/// A response hit that a rendezvous sent after the entry's lifetime ended.
#[derive(Debug, Clone, PartialEq)]
pub struct StaleHit {
    pub at: Millis,
    pub responder: PeerId,
    pub msid: ModuleSpecId,
    pub expired_at: Option<Millis>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metrics {
    pub queries_issued: u64,
    pub queries_completed: u64,
    pub hits_returned: u64,
    pub discovery_latencies: Vec<Millis>,
    pub queries: Vec<QueryRecord>,
    pub stale_results: u64,
    pub stale_hits: Vec<StaleHit>,
    pub messages_by_kind: BTreeMap<String, u64>,
    pub expired_count: u64,
    pub handler_errors: u64,
    pub messages_sent: u64,
    pub messages_delivered: u64,
    pub messages_dropped: u64,
    pub messages_in_flight: u64,
}

impl Metrics {
    pub fn messages_total(&self) -> u64 {
        self.messages_by_kind.values().sum()
    }

    /// Broken invariants, empty when the run is sound.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.stale_results > 0 {
            out.push(format!("{} stale result(s) returned", self.stale_results));
        }
        let accounted = self.messages_delivered + self.messages_dropped + self.messages_in_flight;
        if self.messages_sent != accounted {
            out.push(format!(
                "message conservation: sent {} != delivered {} + dropped {} + in flight {}",
                self.messages_sent, self.messages_delivered, self.messages_dropped, self.messages_in_flight
            ));
        }
        if self.queries_completed > self.queries_issued {
            out.push("more queries completed than issued".into());
        }
        out
    }
}

/// Nearest-rank percentile: the value at 1-based rank `ceil(p/100 * n)`.
pub fn percentile(sorted: &[Millis], p: u32) -> Option<Millis> {
    if sorted.is_empty() {
        return None;
    }
    let n = sorted.len();
    let rank = (p as usize * n).div_ceil(100).max(1);
    Some(sorted[rank.min(n) - 1])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub p50_ms: Option<Millis>,
    pub p95_ms: Option<Millis>,
    pub max_ms: Option<Millis>,
    pub queries: u64,
    pub completed: u64,
    pub hits: u64,
    pub stale_results: u64,
    pub messages: BTreeMap<String, u64>,
    pub messages_total: u64,
    pub expired: u64,
    pub delivered: u64,
    pub dropped: u64,
    pub in_flight: u64,
    pub errors: u64,
}

impl Report {
    pub fn from_metrics(m: &Metrics) -> Self {
        let mut sorted = m.discovery_latencies.clone();
        sorted.sort_unstable();
        Self {
            p50_ms: percentile(&sorted, 50),
            p95_ms: percentile(&sorted, 95),
            max_ms: sorted.last().copied(),
            queries: m.queries_issued,
            completed: m.queries_completed,
            hits: m.hits_returned,
            stale_results: m.stale_results,
            messages: m.messages_by_kind.clone(),
            messages_total: m.messages_total(),
            expired: m.expired_count,
            delivered: m.messages_delivered,
            dropped: m.messages_dropped,
            in_flight: m.messages_in_flight,
            errors: m.handler_errors,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let ms = |v: Option<Millis>| v.map_or("n/a".to_string(), |v| format!("{v} ms"));
        let mut out = String::new();
        let _ = writeln!(out, "discovery latency (nearest rank)");
        let _ = writeln!(out, "  p50: {}", ms(self.p50_ms));
        let _ = writeln!(out, "  p95: {}", ms(self.p95_ms));
        let _ = writeln!(out, "  max: {}", ms(self.max_ms));
        let _ = writeln!(out, "queries: {} issued, {} with hits", self.queries, self.completed);
        let _ = writeln!(out, "hits returned: {}", self.hits);
        let _ = writeln!(out, "stale results: {}", self.stale_results);
        let _ = writeln!(out, "expired entries: {}", self.expired);
        let _ = writeln!(out, "messages: {}", self.messages_total);
        for (kind, n) in &self.messages {
            let _ = writeln!(out, "  {kind}: {n}");
        }
        let _ = writeln!(
            out,
            "delivered {}, dropped {}, in flight {}, handler errors {}",
            self.delivered, self.dropped, self.in_flight, self.errors
        );
        out
    }
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub metrics: Metrics,
    pub trace: Vec<TraceRecord>,
}

impl SimOutput {
    pub fn report(&self) -> Report {
        Report::from_metrics(&self.metrics)
    }
}

pub struct Simulation {
    scenario: ResolvedScenario,
    rng: ChaCha8Rng,
    queue: BinaryHeap<Reverse<SimEvent>>,
    next_seq: u64,
    now: Millis,
    online: BTreeMap<PeerId, PeerState>,
    offline: BTreeMap<PeerId, PeerState>,
    names: BTreeMap<PeerId, String>,
    latency: LatencyModel,
    /// Last scheduled arrival per directed link; links deliver in order.
    link_clock: BTreeMap<(PeerId, PeerId), Millis>,
    /// Independent record of what each rendezvous should hold: expiry per
    /// (rendezvous, msid).
    ledger: BTreeMap<(PeerId, ModuleSpecId), Millis>,
    query_terms: BTreeMap<QueryId, String>,
    metrics: Metrics,
    trace: Vec<TraceRecord>,
}

impl Simulation {
    pub fn new(scenario: ResolvedScenario, seed: u64) -> Self {
        let latency = LatencyModel::new(scenario.link_latency.clone(), scenario.default_latency);
        let mut sim = Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            queue: BinaryHeap::new(),
            next_seq: 0,
            now: 0,
            online: BTreeMap::new(),
            offline: BTreeMap::new(),
            names: BTreeMap::new(),
            latency,
            link_clock: BTreeMap::new(),
            ledger: BTreeMap::new(),
            query_terms: BTreeMap::new(),
            metrics: Metrics::default(),
            trace: Vec::new(),
            scenario,
        };
        sim.build_peers();
        sim
    }

    fn build_peers(&mut self) {
        let rendezvous: Vec<PeerId> =
            self.scenario.peers.iter().filter(|p| p.role.is_rendezvous()).map(|p| p.id.clone()).collect();
        let mut to_register = Vec::new();
        for spec in &self.scenario.peers {
            self.names.insert(spec.id.clone(), spec.name.clone());
            let mut state = PeerState::new(spec.id.clone(), spec.role).with_weights(self.scenario.weights);
            state = if spec.role.is_rendezvous() {
                state.with_cache_capacity(spec.cache_capacity)
            } else {
                state.with_local_cache_capacity(spec.cache_capacity)
            };
            if let Some(relay) = &spec.relay {
                state = state.behind_relay(relay.clone());
            }
            for n in &spec.neighbors {
                state.add_neighbor(n.clone());
            }
            if spec.role.is_relay() {
                // direct links plus every rendezvous, which is publicly reachable
                for dst in spec.links.iter().chain(rendezvous.iter()) {
                    if *dst != spec.id {
                        state.add_route(dst.clone(), dst.clone());
                    }
                }
            }
            if let Some(r) = &spec.rendezvous {
                to_register.push((spec.id.clone(), r.clone()));
            }
            if spec.online {
                self.online.insert(spec.id.clone(), state);
            } else {
                self.offline.insert(spec.id.clone(), state);
            }
        }
        for (edge, rdv) in to_register {
            let state = self.online.get_mut(&edge).or_else(|| self.offline.get_mut(&edge)).expect("peer exists");
            let envelope = state.register_edge(rdv).expect("edge role checked at resolution");
            if self.online.contains_key(&edge) {
                self.send(&edge, envelope);
            }
        }
        let interval = self.scenario.sweep_interval_ms;
        let caching: Vec<PeerId> = self.online.keys().filter(|p| self.role(p) != PeerRole::Relay).cloned().collect();
        for peer in caching {
            self.push(interval, SimEventKind::SweepTick(peer));
        }
        let actions: Vec<(Millis, SimEventKind)> = self
            .scenario
            .schedule
            .iter()
            .enumerate()
            .map(|(i, (at, action))| {
                let kind = match action {
                    ResolvedAction::Switch { peer, rendezvous } => {
                        SimEventKind::NetworkSwitch { peer: peer.clone(), rendezvous: rendezvous.clone() }
                    }
                    ResolvedAction::Join { peer } => SimEventKind::PeerJoin(peer.clone()),
                    ResolvedAction::Leave { peer } => SimEventKind::PeerLeave(peer.clone()),
                    _ => SimEventKind::Action(i),
                };
                (*at, kind)
            })
            .collect();
        for (at, kind) in actions {
            self.push(at, kind);
        }
    }

    fn role(&self, peer: &PeerId) -> PeerRole {
        self.online.get(peer).or_else(|| self.offline.get(peer)).map(|s| s.role).expect("peer exists")
    }

    fn name(&self, peer: &PeerId) -> String {
        self.names.get(peer).cloned().unwrap_or_else(|| peer.to_string())
    }

    fn push(&mut self, at: Millis, kind: SimEventKind) -> u64 {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.queue.push(Reverse(SimEvent { at, seq, kind }));
        seq
    }

    /// Replaces peer ids in `text` with scenario names.
    fn with_names(&self, text: String) -> String {
        const PREFIX: &str = "peer:";
        const LEN: usize = PREFIX.len() + 16;
        if !text.contains(PREFIX) {
            return text;
        }
        let mut out = String::with_capacity(text.len());
        let mut rest = text.as_str();
        while let Some(pos) = rest.find(PREFIX) {
            out.push_str(&rest[..pos]);
            let candidate = rest.get(pos..pos + LEN).and_then(|c| PeerId::parse(c).ok());
            match candidate.and_then(|id| self.names.get(&id)) {
                Some(name) => {
                    out.push_str(name);
                    rest = &rest[pos + LEN..];
                }
                None => {
                    out.push_str(PREFIX);
                    rest = &rest[pos + PREFIX.len()..];
                }
            }
        }
        out.push_str(rest);
        out
    }

    fn record(&mut self, seq: u64, kind: impl Into<String>, src: &PeerId, dst: &PeerId, summary: impl Into<String>) {
        let record = TraceRecord {
            at: self.now,
            seq,
            kind: kind.into(),
            src: self.name(src),
            dst: self.name(dst),
            summary: self.with_names(summary.into()),
        };
        self.trace.push(record);
    }

    fn send(&mut self, from: &PeerId, envelope: Envelope) {
        let delay = self.latency.sample(from, &envelope.to, &mut self.rng);
        let clock = self.link_clock.entry((from.clone(), envelope.to.clone())).or_insert(0);
        let at = (self.now + delay).max(*clock);
        *clock = at;
        self.metrics.messages_sent += 1;
        *self.metrics.messages_by_kind.entry(envelope.message.payload().kind().to_string()).or_insert(0) += 1;
        self.push(at, SimEventKind::Deliver { from: from.clone(), to: envelope.to, message: envelope.message });
    }

    /// Moves an edge to another rendezvous and registers it there.
    pub fn network_switch(&mut self, peer: &PeerId, rendezvous: &PeerId) -> Result<(), OverlayError> {
        let Some(state) = self.online.get_mut(peer) else {
            // an offline phone re-registers on join
            if let Some(state) = self.offline.get_mut(peer) {
                state.register_edge(rendezvous.clone())?;
            }
            return Ok(());
        };
        let envelope = state.register_edge(rendezvous.clone())?;
        self.send(peer, envelope);
        Ok(())
    }

    fn run_until(&mut self, until: Millis) {
        while let Some(Reverse(event)) = self.queue.peek() {
            if event.at > until {
                break;
            }
            let Reverse(event) = self.queue.pop().expect("peeked");
            self.now = event.at;
            self.dispatch(event);
        }
    }

    pub fn run(mut self) -> SimOutput {
        self.run_until(self.scenario.horizon_ms);
        self.metrics.messages_in_flight =
            self.queue.iter().filter(|Reverse(e)| matches!(e.kind, SimEventKind::Deliver { .. })).count() as u64;
        SimOutput { metrics: self.metrics, trace: self.trace }
    }

    fn dispatch(&mut self, event: SimEvent) {
        let seq = event.seq;
        match event.kind {
            SimEventKind::Deliver { from, to, message } => self.deliver(seq, from, to, message),
            SimEventKind::PeerJoin(peer) => {
                let Some(state) = self.offline.remove(&peer) else {
                    self.record(seq, "join", &peer, &peer, "already online");
                    return;
                };
                let rendezvous = state.rendezvous_of.clone();
                let role = state.role;
                self.online.insert(peer.clone(), state);
                self.record(seq, "join", &peer, &peer, "");
                if role != PeerRole::Relay {
                    let interval = self.scenario.sweep_interval_ms;
                    let next = (self.now / interval + 1) * interval;
                    self.push(next, SimEventKind::SweepTick(peer.clone()));
                }
                if let Some(rdv) = rendezvous {
                    let envelope = self.online.get_mut(&peer).expect("inserted").register_edge(rdv).expect("edge");
                    self.send(&peer, envelope);
                }
            }
            SimEventKind::PeerLeave(peer) => match self.online.remove(&peer) {
                Some(state) => {
                    self.offline.insert(peer.clone(), state);
                    self.record(seq, "leave", &peer, &peer, "");
                }
                None => self.record(seq, "leave", &peer, &peer, "already offline"),
            },
            SimEventKind::NetworkSwitch { peer, rendezvous } => {
                let summary = format!("rendezvous={}", self.name(&rendezvous));
                match self.network_switch(&peer, &rendezvous) {
                    Ok(()) => self.record(seq, "switch", &peer, &rendezvous, summary),
                    Err(e) => {
                        self.metrics.handler_errors += 1;
                        self.record(seq, "error:switch", &peer, &rendezvous, e.to_string());
                    }
                }
            }
            SimEventKind::Action(i) => self.action(seq, i),
            SimEventKind::SweepTick(peer) => {
                let Some(state) = self.online.get_mut(&peer) else { return };
                let removed = state.sweep(self.now);
                if !removed.is_empty() {
                    self.metrics.expired_count += removed.len() as u64;
                    self.record(seq, "sweep", &peer, &peer, format!("expired={}", removed.len()));
                }
                let next = self.now + self.scenario.sweep_interval_ms;
                self.push(next, SimEventKind::SweepTick(peer));
            }
            SimEventKind::Collect { peer, query_id } => self.collect(seq, peer, query_id),
        }
    }

    fn action(&mut self, seq: u64, i: usize) {
        let now = self.now;
        let (_, action) = self.scenario.schedule[i].clone();
        let peer = match &action {
            ResolvedAction::Publish { peer, .. }
            | ResolvedAction::Republish { peer, .. }
            | ResolvedAction::Discover { peer, .. } => peer.clone(),
            _ => unreachable!("scheduled as their own event kinds"),
        };
        let Some(state) = self.online.get_mut(&peer) else {
            self.record(seq, "skip", &peer, &peer, "peer offline");
            return;
        };
        let result = match action {
            ResolvedAction::Publish { advert, lifetime_ms, group, .. } => {
                state.publish_service(*advert, lifetime_ms, group).map(|e| (e, None))
            }
            ResolvedAction::Republish { msid, lifetime_ms, .. } => {
                state.republish_service(&msid, lifetime_ms).map(|e| (e, None))
            }
            ResolvedAction::Discover { terms, group, k, hop_limit, timeout_ms, .. } => state
                .discover(&terms, group, k, hop_limit, timeout_ms, now)
                .map(|(qid, e)| (e, Some((qid, terms, now + timeout_ms)))),
            _ => unreachable!(),
        };
        match result {
            Ok((envelope, query)) => {
                let summary = format!("{} {}", envelope.message.payload().kind(), envelope.message.payload().summary());
                self.record(seq, "action", &peer, &envelope.to, summary);
                if let Some((query_id, terms, deadline)) = query {
                    self.metrics.queries_issued += 1;
                    self.query_terms.insert(query_id.clone(), terms);
                    self.push(deadline, SimEventKind::Collect { peer: peer.clone(), query_id });
                }
                self.send(&peer, envelope);
            }
            Err(e) => {
                self.metrics.handler_errors += 1;
                self.record(seq, "error:action", &peer, &peer, e.to_string());
            }
        }
    }

    fn collect(&mut self, seq: u64, peer: PeerId, query_id: QueryId) {
        let now = self.now;
        let state = self.online.get_mut(&peer).or_else(|| self.offline.get_mut(&peer)).expect("peer exists");
        let outcome = match state.collect_outcome(&query_id, now) {
            Ok(o) => o,
            Err(e) => {
                self.metrics.handler_errors += 1;
                self.record(seq, "error:collect", &peer, &peer, e.to_string());
                return;
            }
        };
        let record = QueryRecord {
            query_id: query_id.clone(),
            originator: peer.clone(),
            terms: self.query_terms.remove(&query_id).unwrap_or_default(),
            issued_at: outcome.issued_at,
            collected_at: now,
            last_response_at: outcome.last_response_at,
            hits: outcome.sources,
        };
        let latency = record.latency();
        if let Some(latency) = latency {
            self.metrics.queries_completed += 1;
            self.metrics.discovery_latencies.push(latency);
        }
        self.metrics.hits_returned += record.hits.len() as u64;
        let summary = format!(
            "q={query_id} hits={} latency={}",
            record.hits.len(),
            latency.map_or("none".to_string(), |l| l.to_string())
        );
        self.record(seq, "collect", &peer, &peer, summary);
        self.metrics.queries.push(record);
    }

    fn deliver(&mut self, seq: u64, from: PeerId, to: PeerId, message: Message) {
        let kind = message.kind();
        let Some(state) = self.online.get_mut(&to) else {
            self.metrics.messages_dropped += 1;
            let summary = message.summary();
            self.record(seq, format!("drop:{kind}"), &from, &to, summary);
            return;
        };
        self.metrics.messages_delivered += 1;
        let summary = message.summary();
        let is_rendezvous = state.role.is_rendezvous();
        let addressed = addressed_payload(&message, &to).cloned();
        let now = self.now;
        match state.handle_message(&from, message, now) {
            Ok(out) => {
                self.record(seq, kind, &from, &to, summary);
                if is_rendezvous {
                    if let Some(payload) = &addressed {
                        self.update_ledger(&to, payload, &out);
                    }
                }
                for envelope in out {
                    self.send(&to, envelope);
                }
            }
            Err(e) => {
                self.metrics.handler_errors += 1;
                self.record(seq, format!("error:{kind}"), &from, &to, e.to_string());
            }
        }
    }

    /// Mirrors cache effects in the ledger and checks every hit a rendezvous
    /// answers with against it.
    fn update_ledger(&mut self, me: &PeerId, payload: &Message, out: &[Envelope]) {
        let now = self.now;
        match payload {
            Message::PublishRequest { advert, lifetime_ms, .. } => {
                self.ledger.insert((me.clone(), advert.msid.clone()), now + lifetime_ms);
            }
            Message::RepublishRequest { msid, lifetime_ms } => {
                let key = (me.clone(), msid.clone());
                if self.ledger.get(&key).is_some_and(|&exp| exp > now) {
                    self.ledger.insert(key, now + lifetime_ms);
                }
            }
            Message::DiscoveryQuery { .. } => {
                for envelope in out {
                    let Message::DiscoveryResponse { responder, hits, .. } = envelope.message.payload() else {
                        continue;
                    };
                    if responder != me {
                        continue;
                    }
                    for rh in hits {
                        let expiry = self.ledger.get(&(me.clone(), rh.hit.msid.clone())).copied();
                        if !expiry.is_some_and(|exp| exp > now) {
                            self.metrics.stale_results += 1;
                            self.metrics.stale_hits.push(StaleHit {
                                at: now,
                                responder: me.clone(),
                                msid: rh.hit.msid.clone(),
                                expired_at: expiry,
                            });
                        }
                    }
                }
            }
            _ => {}
        }
    }
}

/// The message `me` consumes itself, unwrapping relay envelopes addressed to it.
fn addressed_payload<'a>(message: &'a Message, me: &PeerId) -> Option<&'a Message> {
    match message {
        Message::Relayed { target, inner, .. } => {
            if target == me {
                addressed_payload(inner, me)
            } else {
                None
            }
        }
        other => Some(other),
    }
}

/// Validates `scenario` and runs it to its horizon.
pub fn run_scenario(scenario: &ScenarioConfig, seed: u64) -> Result<SimOutput, ScenarioError> {
    let resolved = scenario.resolve()?;
    Ok(Simulation::new(resolved, seed).run())
}

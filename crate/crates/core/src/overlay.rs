//! Peer roles and the publish/republish/discover protocol.
//!
//! Each peer is a [`PeerState`] driven by [`PeerState::handle_message`]: a
//! deterministic transition from (state, sender, message, time) to a new
//! state plus outbound envelopes. A failed transition leaves the state
//! untouched.
//!
//! Roles:
//! - edge: registers with one rendezvous (optionally through a relay),
//!   publishes services, issues queries and merges their responses;
//! - rendezvous: caches and indexes advertisements from its edges, answers
//!   queries and floods them to neighbouring rendezvous peers;
//! - relay: forwards [`Message::Relayed`] envelopes for peers it can route to;
//! - super: rendezvous and relay at once.
//!
//! Responses to flooded queries travel back along the reverse query path.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::adverts::{ModuleSpecAdvertisement, ModuleSpecId, PeerId};
use crate::cache::{AdvertCache, CacheError, DEFAULT_EDGE_CAPACITY, DEFAULT_RENDEZVOUS_CAPACITY};
use crate::groups::{in_scope, GroupId};
use crate::index::{rank_order, tokenize, FieldWeights, IndexError, InvertedIndex, ScoredHit};
use crate::Millis;

pub const DEFAULT_HOP_LIMIT: u32 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PeerRole {
    Edge,
    Rendezvous,
    Relay,
    Super,
}

impl PeerRole {
    pub fn is_rendezvous(self) -> bool {
        matches!(self, PeerRole::Rendezvous | PeerRole::Super)
    }

    pub fn is_relay(self) -> bool {
        matches!(self, PeerRole::Relay | PeerRole::Super)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PeerRole::Edge => "edge",
            PeerRole::Rendezvous => "rendezvous",
            PeerRole::Relay => "relay",
            PeerRole::Super => "super",
        }
    }
}

impl fmt::Display for PeerRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QueryId {
    pub originator: PeerId,
    pub seq: u64,
}

impl fmt::Display for QueryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.originator, self.seq)
    }
}

/// One search hit shipped with the full advertisement so the receiver can
/// cache it.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseHit {
    pub hit: ScoredHit,
    pub advert: ModuleSpecAdvertisement,
    pub group: GroupId,
    pub publisher: PeerId,
    pub expires_at: Millis,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    Register {
        edge: PeerId,
    },
    PublishRequest {
        advert: Box<ModuleSpecAdvertisement>,
        lifetime_ms: Millis,
        group: GroupId,
    },
    RepublishRequest {
        msid: ModuleSpecId,
        lifetime_ms: Millis,
    },
    /// The rendezvous holds no live entry; the publisher must send the full
    /// advertisement again.
    RepublishRejected {
        msid: ModuleSpecId,
    },
    DiscoveryQuery {
        query_id: QueryId,
        originator: PeerId,
        terms: String,
        group: GroupId,
        k: usize,
        hops_remaining: u32,
    },
    DiscoveryResponse {
        query_id: QueryId,
        responder: PeerId,
        hits: Vec<ResponseHit>,
    },
    Relayed {
        source: PeerId,
        target: PeerId,
        inner: Box<Message>,
    },
}

impl Message {
    pub fn kind(&self) -> &'static str {
        match self {
            Message::Register { .. } => "register",
            Message::PublishRequest { .. } => "publish",
            Message::RepublishRequest { .. } => "republish",
            Message::RepublishRejected { .. } => "republish-rejected",
            Message::DiscoveryQuery { .. } => "query",
            Message::DiscoveryResponse { .. } => "response",
            Message::Relayed { .. } => "relayed",
        }
    }

    /// One-line human-readable description used in traces.
    pub fn summary(&self) -> String {
        match self {
            Message::Register { edge } => format!("edge={edge}"),
            Message::PublishRequest { advert, lifetime_ms, group } => {
                format!("msid={} name={} lifetime={lifetime_ms} group={group}", advert.msid, advert.name)
            }
            Message::RepublishRequest { msid, lifetime_ms } => format!("msid={msid} lifetime={lifetime_ms}"),
            Message::RepublishRejected { msid } => format!("msid={msid}"),
            Message::DiscoveryQuery { query_id, terms, group, k, hops_remaining, .. } => {
                format!("q={query_id} terms={terms:?} group={group} k={k} hops={hops_remaining}")
            }
            Message::DiscoveryResponse { query_id, responder, hits } => {
                format!("q={query_id} responder={responder} hits={}", hits.len())
            }
            Message::Relayed { source, target, inner } => {
                format!("source={source} target={target} inner={} {}", inner.kind(), inner.summary())
            }
        }
    }

    /// The innermost payload of a (possibly nested) relay envelope.
    pub fn payload(&self) -> &Message {
        match self {
            Message::Relayed { inner, .. } => inner.payload(),
            other => other,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub to: PeerId,
    pub message: Message,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OverlayError {
    #[error("no route to {0}")]
    UnroutableTarget(PeerId),
    #[error("edge is not registered with a rendezvous")]
    NotRegistered,
    #[error("operation requires role {expected}, peer is {actual}")]
    RoleMismatch { expected: PeerRole, actual: PeerRole },
    #[error("query has no searchable tokens")]
    EmptyQuery,
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("unknown query {0}")]
    UnknownQuery(QueryId),
    #[error("query deadline {deadline} not reached")]
    DeadlineNotReached { deadline: Millis },
    #[error("{role} peer does not handle {kind} messages")]
    Unexpected { role: PeerRole, kind: &'static str },
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error(transparent)]
    Index(#[from] IndexError),
}

impl OverlayError {
    fn unexpected(role: PeerRole, msg: &Message) -> Self {
        OverlayError::Unexpected { role, kind: msg.kind() }
    }

    pub fn is_unexpected(&self) -> bool {
        matches!(self, OverlayError::Unexpected { .. })
    }
}

/// A hit as received by the querying edge, with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedHit {
    pub hit: ScoredHit,
    pub responder: PeerId,
    pub publisher: PeerId,
    pub expires_at: Millis,
    pub received_at: Millis,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PendingQuery {
    pub k: usize,
    pub issued_at: Millis,
    pub deadline: Millis,
    pub hits: Vec<ReceivedHit>,
    pub last_response_at: Option<Millis>,
}

/// Merged result of one query at its deadline.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryOutcome {
    pub query_id: QueryId,
    pub issued_at: Millis,
    pub deadline: Millis,
    pub last_response_at: Option<Millis>,
    /// Final ranked hits; `sources[i]` is where `hits[i]` came from.
    pub hits: Vec<ScoredHit>,
    pub sources: Vec<ReceivedHit>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PublishedService {
    pub advert: ModuleSpecAdvertisement,
    pub group: GroupId,
    pub lifetime_ms: Millis,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeerState {
    pub id: PeerId,
    pub role: PeerRole,
    /// Edge: current rendezvous.
    pub rendezvous_of: Option<PeerId>,
    /// Edge: relay through which the rendezvous is reached.
    pub relay: Option<PeerId>,
    /// Rendezvous: rendezvous-to-rendezvous links.
    pub neighbors: BTreeSet<PeerId>,
    /// Rendezvous: known edges and the hop (the edge itself or a relay) to reach them.
    pub edges: BTreeMap<PeerId, PeerId>,
    /// Relay: destination to next hop.
    pub route_table: BTreeMap<PeerId, PeerId>,
    pub cache: AdvertCache,
    pub index: InvertedIndex,
    pub weights: FieldWeights,
    /// Edge: copies of discovered advertisements.
    pub local_cache: AdvertCache,
    /// Rendezvous: queries already handled and the hop they arrived from.
    pub seen_queries: BTreeMap<QueryId, PeerId>,
    pub pending_queries: BTreeMap<QueryId, PendingQuery>,
    /// Edge: services it publishes, kept to answer republish rejections.
    pub published: BTreeMap<ModuleSpecId, PublishedService>,
    next_query_seq: u64,
}

/// Route-learning and forwarding decided by the relay capability.
struct RelayPlan {
    learn: (PeerId, PeerId),
    out: Vec<Envelope>,
}

impl PeerState {
    pub fn new(id: PeerId, role: PeerRole) -> Self {
        let cache_capacity = if role.is_rendezvous() { DEFAULT_RENDEZVOUS_CAPACITY } else { DEFAULT_EDGE_CAPACITY };
        Self {
            id,
            role,
            rendezvous_of: None,
            relay: None,
            neighbors: BTreeSet::new(),
            edges: BTreeMap::new(),
            route_table: BTreeMap::new(),
            cache: AdvertCache::new(cache_capacity),
            index: InvertedIndex::new(),
            weights: FieldWeights::default(),
            local_cache: AdvertCache::new(DEFAULT_EDGE_CAPACITY),
            seen_queries: BTreeMap::new(),
            pending_queries: BTreeMap::new(),
            published: BTreeMap::new(),
            next_query_seq: 1,
        }
    }

    pub fn with_cache_capacity(mut self, capacity: usize) -> Self {
        self.cache = AdvertCache::new(capacity);
        self
    }

    pub fn with_local_cache_capacity(mut self, capacity: usize) -> Self {
        self.local_cache = AdvertCache::new(capacity);
        self
    }

    pub fn with_weights(mut self, weights: FieldWeights) -> Self {
        self.weights = weights;
        self
    }

    pub fn behind_relay(mut self, relay: PeerId) -> Self {
        self.relay = Some(relay);
        self
    }

    pub fn add_neighbor(&mut self, peer: PeerId) {
        if peer != self.id {
            self.neighbors.insert(peer);
        }
    }

    pub fn add_route(&mut self, destination: PeerId, next_hop: PeerId) {
        self.route_table.insert(destination, next_hop);
    }

    fn require_role(&self, expected: PeerRole) -> Result<(), OverlayError> {
        if self.role == expected {
            Ok(())
        } else {
            Err(OverlayError::RoleMismatch { expected, actual: self.role })
        }
    }

    /// Processes one message received from `from` at time `now`.
    pub fn handle_message(&mut self, from: &PeerId, msg: Message, now: Millis) -> Result<Vec<Envelope>, OverlayError> {
        match self.role {
            PeerRole::Edge => self.edge_receive(from, msg, now),
            PeerRole::Rendezvous => self.rendezvous_receive(from, from, msg, now),
            PeerRole::Relay => {
                let plan = self.relay_plan(from, &msg)?;
                Ok(self.apply_relay_plan(plan))
            }
            PeerRole::Super => {
                let relay = self.relay_plan(from, &msg);
                if let Err(e) = &relay {
                    if !e.is_unexpected() {
                        return Err(relay.err().expect("checked"));
                    }
                }
                let rendezvous = self.rendezvous_receive(from, from, msg, now);
                match (rendezvous, relay) {
                    (Err(e), _) if !e.is_unexpected() => Err(e),
                    (Ok(mut out), Ok(plan)) => {
                        out.extend(self.apply_relay_plan(plan));
                        Ok(out)
                    }
                    (Ok(out), Err(_)) => Ok(out),
                    (Err(_), Ok(plan)) => Ok(self.apply_relay_plan(plan)),
                    (Err(_), Err(e)) => Err(match e {
                        OverlayError::Unexpected { kind, .. } => OverlayError::Unexpected { role: self.role, kind },
                        other => other,
                    }),
                }
            }
        }
    }

    /// Drops expired entries from the caches (and the index). Returns the
    /// removed MSIDs.
    pub fn sweep(&mut self, now: Millis) -> Vec<ModuleSpecId> {
        let mut removed = self.cache.expire_sweep(now);
        for msid in &removed {
            self.index.remove_advert(msid);
        }
        removed.extend(self.local_cache.expire_sweep(now));
        removed
    }

    // ---- relay ----

    fn relay_plan(&self, from: &PeerId, msg: &Message) -> Result<RelayPlan, OverlayError> {
        let Message::Relayed { source, target, .. } = msg else {
            return Err(OverlayError::unexpected(PeerRole::Relay, msg));
        };
        let learn = (source.clone(), from.clone());
        if *target == self.id {
            // addressed to us: nothing to forward
            return Ok(RelayPlan { learn, out: Vec::new() });
        }
        let next_hop = self.route_table.get(target).ok_or_else(|| OverlayError::UnroutableTarget(target.clone()))?;
        Ok(RelayPlan { learn, out: vec![Envelope { to: next_hop.clone(), message: msg.clone() }] })
    }

    fn apply_relay_plan(&mut self, plan: RelayPlan) -> Vec<Envelope> {
        let (destination, hop) = plan.learn;
        if destination != self.id {
            self.route_table.insert(destination, hop);
        }
        plan.out
    }

    // ---- rendezvous ----

    /// Sends to `dst`, wrapping in a relay envelope when `dst` is an edge
    /// reached through a relay.
    fn send_to(&self, dst: &PeerId, message: Message) -> Envelope {
        match self.edges.get(dst) {
            Some(via) if via != dst => Envelope {
                to: via.clone(),
                message: Message::Relayed { source: self.id.clone(), target: dst.clone(), inner: Box::new(message) },
            },
            _ => Envelope { to: dst.clone(), message },
        }
    }

    fn learn_edge(&mut self, edge: &PeerId, via: &PeerId) {
        if !self.neighbors.contains(edge) && *edge != self.id {
            self.edges.insert(edge.clone(), via.clone());
        }
    }

    /// `from` is the logical sender, `via` the peer that physically delivered it.
    fn rendezvous_receive(
        &mut self,
        from: &PeerId,
        via: &PeerId,
        msg: Message,
        now: Millis,
    ) -> Result<Vec<Envelope>, OverlayError> {
        if !self.role.is_rendezvous() {
            return Err(OverlayError::unexpected(self.role, &msg));
        }
        match msg {
            Message::Register { edge } => {
                self.learn_edge(&edge, via);
                Ok(Vec::new())
            }
            Message::PublishRequest { advert, lifetime_ms, group } => {
                let advert = *advert;
                let msid = advert.msid.clone();
                let evicted = self.cache.publish(advert, from.clone(), group, lifetime_ms, now)?;
                if let Some(victim) = evicted {
                    self.index.remove_advert(&victim.advert.msid);
                }
                self.index.remove_advert(&msid);
                let entry = self.cache.lookup(&msid, now).expect("just published");
                self.index.index_advert(&entry.advert, &self.weights)?;
                self.learn_edge(from, via);
                Ok(Vec::new())
            }
            Message::RepublishRequest { msid, lifetime_ms } => {
                let result = self.cache.republish(&msid, lifetime_ms, now);
                self.learn_edge(from, via);
                match result {
                    Ok(_) => Ok(Vec::new()),
                    Err(CacheError::NotFound(_)) => Ok(vec![self.send_to(from, Message::RepublishRejected { msid })]),
                    Err(e) => Err(e.into()),
                }
            }
            Message::DiscoveryQuery { query_id, originator, terms, group, k, hops_remaining } => {
                if self.seen_queries.contains_key(&query_id) {
                    return Ok(Vec::new());
                }
                let cache = &self.cache;
                let result = self.index.search_filtered(&terms, k, |msid| {
                    cache.lookup(msid, now).is_some_and(|entry| in_scope(&group, &entry.group))
                })?;
                self.learn_edge(from, via);
                self.seen_queries.insert(query_id.clone(), from.clone());

                let mut out = Vec::new();
                if !result.hits.is_empty() {
                    let hits = result
                        .hits
                        .into_iter()
                        .map(|hit| {
                            let entry = self.cache.lookup(&hit.msid, now).expect("filtered on liveness");
                            ResponseHit {
                                advert: entry.advert.clone(),
                                group: entry.group.clone(),
                                publisher: entry.publisher.clone(),
                                expires_at: entry.expires_at,
                                hit,
                            }
                        })
                        .collect();
                    let response =
                        Message::DiscoveryResponse { query_id: query_id.clone(), responder: self.id.clone(), hits };
                    out.push(self.send_to(from, response));
                }
                if hops_remaining > 0 {
                    for neighbor in self.neighbors.iter().filter(|n| *n != from) {
                        out.push(Envelope {
                            to: neighbor.clone(),
                            message: Message::DiscoveryQuery {
                                query_id: query_id.clone(),
                                originator: originator.clone(),
                                terms: terms.clone(),
                                group: group.clone(),
                                k,
                                hops_remaining: hops_remaining - 1,
                            },
                        });
                    }
                }
                Ok(out)
            }
            Message::DiscoveryResponse { ref query_id, .. } => match self.seen_queries.get(query_id) {
                Some(back) if back != from => {
                    let back = back.clone();
                    Ok(vec![self.send_to(&back, msg)])
                }
                _ => Ok(Vec::new()),
            },
            Message::Relayed { source, target, inner } if target == self.id => {
                self.rendezvous_receive(&source, from, *inner, now)
            }
            other => Err(OverlayError::unexpected(self.role, &other)),
        }
    }

    // ---- edge ----

    fn toward_rendezvous(&self, message: Message) -> Result<Envelope, OverlayError> {
        let rendezvous = self.rendezvous_of.clone().ok_or(OverlayError::NotRegistered)?;
        Ok(self.via_relay(rendezvous, message))
    }

    fn via_relay(&self, target: PeerId, message: Message) -> Envelope {
        match &self.relay {
            Some(relay) if *relay != target => Envelope {
                to: relay.clone(),
                message: Message::Relayed { source: self.id.clone(), target, inner: Box::new(message) },
            },
            _ => Envelope { to: target, message },
        }
    }

    /// Attaches this edge to `rendezvous`, replacing any previous one. The old
    /// rendezvous is not notified.
    pub fn register_edge(&mut self, rendezvous: PeerId) -> Result<Envelope, OverlayError> {
        self.require_role(PeerRole::Edge)?;
        self.rendezvous_of = Some(rendezvous.clone());
        Ok(self.via_relay(rendezvous, Message::Register { edge: self.id.clone() }))
    }

    pub fn publish_service(
        &mut self,
        advert: ModuleSpecAdvertisement,
        lifetime_ms: Millis,
        group: GroupId,
    ) -> Result<Envelope, OverlayError> {
        self.require_role(PeerRole::Edge)?;
        if lifetime_ms == 0 {
            return Err(OverlayError::InvalidArgument("lifetime must be positive"));
        }
        let envelope = self.toward_rendezvous(Message::PublishRequest {
            advert: Box::new(advert.clone()),
            lifetime_ms,
            group: group.clone(),
        })?;
        self.published.insert(advert.msid.clone(), PublishedService { advert, group, lifetime_ms });
        Ok(envelope)
    }

    pub fn republish_service(&mut self, msid: &ModuleSpecId, lifetime_ms: Millis) -> Result<Envelope, OverlayError> {
        self.require_role(PeerRole::Edge)?;
        if lifetime_ms == 0 {
            return Err(OverlayError::InvalidArgument("lifetime must be positive"));
        }
        let envelope = self.toward_rendezvous(Message::RepublishRequest { msid: msid.clone(), lifetime_ms })?;
        if let Some(service) = self.published.get_mut(msid) {
            service.lifetime_ms = lifetime_ms;
        }
        Ok(envelope)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn discover(
        &mut self,
        terms: &str,
        group: GroupId,
        k: usize,
        hop_limit: u32,
        timeout_ms: Millis,
        now: Millis,
    ) -> Result<(QueryId, Envelope), OverlayError> {
        self.require_role(PeerRole::Edge)?;
        if tokenize(terms).is_empty() {
            return Err(OverlayError::EmptyQuery);
        }
        if k == 0 {
            return Err(OverlayError::InvalidArgument("k must be at least 1"));
        }
        let query_id = QueryId { originator: self.id.clone(), seq: self.next_query_seq };
        let envelope = self.toward_rendezvous(Message::DiscoveryQuery {
            query_id: query_id.clone(),
            originator: self.id.clone(),
            terms: terms.to_string(),
            group,
            k,
            hops_remaining: hop_limit,
        })?;
        self.next_query_seq += 1;
        self.pending_queries.insert(
            query_id.clone(),
            PendingQuery {
                k,
                issued_at: now,
                deadline: now.saturating_add(timeout_ms),
                hits: Vec::new(),
                last_response_at: None,
            },
        );
        Ok((query_id, envelope))
    }

    /// Merges every response received for `query_id`: one hit per MSID
    /// (highest score wins), best-first, at most k.
    pub fn collect_results(&mut self, query_id: &QueryId, now: Millis) -> Result<Vec<ScoredHit>, OverlayError> {
        self.collect_outcome(query_id, now).map(|o| o.hits)
    }

    pub fn collect_outcome(&mut self, query_id: &QueryId, now: Millis) -> Result<QueryOutcome, OverlayError> {
        let pending = self.pending_queries.get(query_id).ok_or_else(|| OverlayError::UnknownQuery(query_id.clone()))?;
        if now < pending.deadline {
            return Err(OverlayError::DeadlineNotReached { deadline: pending.deadline });
        }
        let pending = self.pending_queries.remove(query_id).expect("checked above");
        let mut best: BTreeMap<&ModuleSpecId, &ReceivedHit> = BTreeMap::new();
        for received in &pending.hits {
            best.entry(&received.hit.msid)
                .and_modify(|cur| {
                    if received.hit.score > cur.hit.score {
                        *cur = received;
                    }
                })
                .or_insert(received);
        }
        let mut merged: Vec<ReceivedHit> = best.into_values().cloned().collect();
        merged.sort_by(|a, b| rank_order(&a.hit, &b.hit));
        merged.truncate(pending.k);
        Ok(QueryOutcome {
            query_id: query_id.clone(),
            issued_at: pending.issued_at,
            deadline: pending.deadline,
            last_response_at: pending.last_response_at,
            hits: merged.iter().map(|r| r.hit.clone()).collect(),
            sources: merged,
        })
    }

    fn edge_receive(&mut self, _from: &PeerId, msg: Message, now: Millis) -> Result<Vec<Envelope>, OverlayError> {
        match msg {
            Message::Relayed { source, target, inner } if target == self.id => self.edge_receive(&source, *inner, now),
            Message::DiscoveryResponse { query_id, responder, hits } => {
                for rh in &hits {
                    if rh.expires_at > now {
                        // capacity is validated at construction, a failure here only skips the copy
                        let _ = self.local_cache.publish(
                            rh.advert.clone(),
                            rh.publisher.clone(),
                            rh.group.clone(),
                            rh.expires_at - now,
                            now,
                        );
                    }
                }
                if let Some(pending) = self.pending_queries.get_mut(&query_id) {
                    pending.last_response_at = Some(now);
                    pending.hits.extend(hits.into_iter().map(|rh| ReceivedHit {
                        hit: rh.hit,
                        responder: responder.clone(),
                        publisher: rh.publisher,
                        expires_at: rh.expires_at,
                        received_at: now,
                    }));
                }
                Ok(Vec::new())
            }
            Message::RepublishRejected { msid } => match self.published.get(&msid) {
                Some(service) => {
                    let message = Message::PublishRequest {
                        advert: Box::new(service.advert.clone()),
                        lifetime_ms: service.lifetime_ms,
                        group: service.group.clone(),
                    };
                    Ok(vec![self.toward_rendezvous(message)?])
                }
                None => Ok(Vec::new()),
            },
            other => Err(OverlayError::unexpected(self.role, &other)),
        }
    }
}

/// Resolves either a peer id string or a phone alias to a known peer.
#[derive(Debug, Clone, Default)]
pub struct AddressBook {
    by_phone: BTreeMap<String, PeerId>,
    peers: BTreeSet<PeerId>,
}

impl AddressBook {
    pub fn insert(&mut self, peer: PeerId) {
        if let Some(phone) = peer.phone_alias() {
            self.by_phone.insert(phone.to_string(), peer.clone());
        }
        self.peers.insert(peer);
    }

    pub fn resolve(&self, key: &str) -> Option<PeerId> {
        if let Some(peer) = self.by_phone.get(key) {
            return Some(peer.clone());
        }
        let id = PeerId::parse(key).ok()?;
        self.peers.get(&id).cloned()
    }
}

//! Scenario documents: topology, groups, service classes and a timed
//! workload, stored as JSON.
//!
//! [`ScenarioConfig::resolve`] validates a scenario and turns every name
//! reference into peer ids and concrete advertisements. Validation errors
//! carry the path of the first offending field, e.g.
//! `schedule[3].peer: unknown peer "X"`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adverts::{
    parse_advert, Advertisement, ModuleClassAdvertisement, ModuleClassId, ModuleSpecAdvertisement, PeerId,
    ServiceSketch,
};
use crate::cache::{DEFAULT_EDGE_CAPACITY, DEFAULT_RENDEZVOUS_CAPACITY};
use crate::groups::{GroupId, GroupTree};
use crate::index::{tokenize, FieldWeights, DEFAULT_K};
use crate::overlay::{AddressBook, PeerRole, DEFAULT_HOP_LIMIT};
use crate::Millis;

pub const DEFAULT_CLASS_NAME: &str = "MobileWebServices";

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {reason}")]
    Invalid { path: String, reason: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse scenario: {0}")]
    Syntax(#[from] serde_json::Error),
}

impl ScenarioError {
    fn invalid(path: impl Into<String>, reason: impl Into<String>) -> Self {
        ScenarioError::Invalid { path: path.into(), reason: reason.into() }
    }

    /// Field path of a validation failure.
    pub fn field_path(&self) -> Option<&str> {
        match self {
            ScenarioError::Invalid { path, .. } => Some(path),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoleSpec {
    Edge,
    Rendezvous,
    Relay,
    Super,
}

impl From<RoleSpec> for PeerRole {
    fn from(role: RoleSpec) -> Self {
        match role {
            RoleSpec::Edge => PeerRole::Edge,
            RoleSpec::Rendezvous => PeerRole::Rendezvous,
            RoleSpec::Relay => PeerRole::Relay,
            RoleSpec::Super => PeerRole::Super,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatencySpec {
    pub base_ms: Millis,
    pub jitter_ms: Millis,
}

impl Default for LatencySpec {
    fn default() -> Self {
        Self { base_ms: 20, jitter_ms: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSpec {
    pub to: String,
    pub base_ms: Millis,
    pub jitter_ms: Millis,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeerSpec {
    pub name: String,
    pub role: RoleSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phone: Option<String>,
    /// Edge: initial rendezvous.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rendezvous: Option<String>,
    /// Edge: relay used to reach the rendezvous.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relay: Option<String>,
    /// Rendezvous/super: overlay neighbours (made symmetric).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub neighbors: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub links: Vec<LinkSpec>,
    #[serde(default = "yes")]
    pub online: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_capacity: Option<usize>,
}

impl PeerSpec {
    pub fn new(name: &str, role: RoleSpec) -> Self {
        Self {
            name: name.to_string(),
            role,
            phone: None,
            rendezvous: None,
            relay: None,
            neighbors: Vec::new(),
            links: Vec::new(),
            online: true,
            cache_capacity: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassSpec {
    pub name: String,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ServiceSpec {
    Inline {
        name: String,
        #[serde(default)]
        description: String,
        #[serde(default)]
        operations: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        class: Option<String>,
    },
    Xml {
        xml: String,
    },
    File {
        file: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    Publish {
        peer: String,
        service: ServiceSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lifetime_ms: Option<Millis>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        group: Option<String>,
    },
    Republish {
        peer: String,
        /// Name of a service this peer published earlier.
        service: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lifetime_ms: Option<Millis>,
    },
    Discover {
        peer: String,
        terms: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        group: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hop_limit: Option<u32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        timeout_ms: Option<Millis>,
    },
    Switch {
        peer: String,
        rendezvous: String,
    },
    Join {
        peer: String,
    },
    Leave {
        peer: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduledAction {
    pub at_ms: Millis,
    #[serde(flatten)]
    pub action: Action,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsSpec {
    pub name: f64,
    pub description: f64,
    pub wsdl: f64,
}

impl Default for WeightsSpec {
    fn default() -> Self {
        let w = FieldWeights::default();
        Self { name: w.name, description: w.description, wsdl: w.wsdl }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Defaults {
    pub lifetime_ms: Millis,
    pub k: usize,
    pub hop_limit: u32,
    pub timeout_ms: Millis,
    pub latency: LatencySpec,
    pub rendezvous_capacity: usize,
    pub edge_capacity: usize,
}

impl Default for Defaults {
    fn default() -> Self {
        Self {
            lifetime_ms: 300_000,
            k: DEFAULT_K,
            hop_limit: DEFAULT_HOP_LIMIT,
            timeout_ms: 1_000,
            latency: LatencySpec::default(),
            rendezvous_capacity: DEFAULT_RENDEZVOUS_CAPACITY,
            edge_capacity: DEFAULT_EDGE_CAPACITY,
        }
    }
}

fn default_sweep() -> Millis {
    1_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub peers: Vec<PeerSpec>,
    #[serde(default)]
    pub groups: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub classes: Vec<ClassSpec>,
    #[serde(default)]
    pub schedule: Vec<ScheduledAction>,
    pub horizon_ms: Millis,
    #[serde(default = "default_sweep")]
    pub sweep_interval_ms: Millis,
    #[serde(default)]
    pub field_weights: WeightsSpec,
    #[serde(default)]
    pub defaults: Defaults,
}

// ---- resolved form ----

#[derive(Debug, Clone)]
pub struct ResolvedPeer {
    pub id: PeerId,
    pub name: String,
    pub role: PeerRole,
    pub rendezvous: Option<PeerId>,
    pub relay: Option<PeerId>,
    pub neighbors: BTreeSet<PeerId>,
    pub links: BTreeSet<PeerId>,
    pub online: bool,
    pub cache_capacity: usize,
}

#[derive(Debug, Clone)]
pub enum ResolvedAction {
    Publish { peer: PeerId, advert: Box<ModuleSpecAdvertisement>, lifetime_ms: Millis, group: GroupId },
    Republish { peer: PeerId, msid: crate::adverts::ModuleSpecId, lifetime_ms: Millis },
    Discover { peer: PeerId, terms: String, group: GroupId, k: usize, hop_limit: u32, timeout_ms: Millis },
    Switch { peer: PeerId, rendezvous: PeerId },
    Join { peer: PeerId },
    Leave { peer: PeerId },
}

#[derive(Debug, Clone)]
pub struct ResolvedScenario {
    pub peers: Vec<ResolvedPeer>,
    pub groups: GroupTree,
    pub classes: Vec<ModuleClassAdvertisement>,
    /// Actions in execution order (by time, then file order).
    pub schedule: Vec<(Millis, ResolvedAction)>,
    /// Unordered peer pair to (base, jitter).
    pub link_latency: BTreeMap<(PeerId, PeerId), LatencySpec>,
    pub default_latency: LatencySpec,
    pub horizon_ms: Millis,
    pub sweep_interval_ms: Millis,
    pub weights: FieldWeights,
}

pub fn link_key(a: &PeerId, b: &PeerId) -> (PeerId, PeerId) {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Reads a scenario file and inlines every `file` service reference,
    /// resolved relative to the scenario's directory.
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let io = |p: &Path, source| ScenarioError::Io { path: p.display().to_string(), source };
        let text = fs::read_to_string(path).map_err(|e| io(path, e))?;
        let mut scenario = Self::from_json(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        for item in &mut scenario.schedule {
            if let Action::Publish { service, .. } = &mut item.action {
                if let ServiceSpec::File { file } = service {
                    let full = base.join(&*file);
                    let xml = fs::read_to_string(&full).map_err(|e| io(&full, e))?;
                    *service = ServiceSpec::Xml { xml };
                }
            }
        }
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.resolve().map(|_| ())
    }

    pub fn resolve(&self) -> Result<ResolvedScenario, ScenarioError> {
        Resolver::new(self)?.run()
    }
}

struct Resolver<'a> {
    cfg: &'a ScenarioConfig,
    by_name: BTreeMap<&'a str, usize>,
    ids: Vec<PeerId>,
    book: AddressBook,
}

impl<'a> Resolver<'a> {
    fn new(cfg: &'a ScenarioConfig) -> Result<Self, ScenarioError> {
        if cfg.peers.is_empty() {
            return Err(ScenarioError::invalid("peers", "at least one peer is required"));
        }
        let mut by_name = BTreeMap::new();
        let mut ids = Vec::new();
        let mut book = AddressBook::default();
        let mut taken = BTreeSet::new();
        for (i, peer) in cfg.peers.iter().enumerate() {
            let path = format!("peers[{i}].name");
            if peer.name.is_empty() {
                return Err(ScenarioError::invalid(path, "must not be empty"));
            }
            if by_name.insert(peer.name.as_str(), i).is_some() {
                return Err(ScenarioError::invalid(path, format!("duplicate peer {:?}", peer.name)));
            }
            let mut id = PeerId::derive(&peer.name);
            if !taken.insert(id.clone()) {
                return Err(ScenarioError::invalid(path, "derived peer id collides with another peer"));
            }
            if let Some(phone) = &peer.phone {
                id = id
                    .with_phone(phone)
                    .map_err(|e| ScenarioError::invalid(format!("peers[{i}].phone"), e.to_string()))?;
                if book.resolve(phone).is_some() {
                    return Err(ScenarioError::invalid(format!("peers[{i}].phone"), "duplicate phone alias"));
                }
            }
            book.insert(id.clone());
            ids.push(id);
        }
        Ok(Self { cfg, by_name, ids, book })
    }

    /// Resolves a peer by scenario name or phone alias.
    fn peer(&self, path: &str, key: &str) -> Result<usize, ScenarioError> {
        if let Some(&i) = self.by_name.get(key) {
            return Ok(i);
        }
        if let Some(id) = self.book.resolve(key) {
            if let Some(i) = self.ids.iter().position(|p| *p == id) {
                return Ok(i);
            }
        }
        Err(ScenarioError::invalid(path, format!("unknown peer {key:?}")))
    }

    fn peer_with(
        &self,
        path: &str,
        key: &str,
        ok: impl Fn(PeerRole) -> bool,
        what: &str,
    ) -> Result<usize, ScenarioError> {
        let i = self.peer(path, key)?;
        let role: PeerRole = self.cfg.peers[i].role.into();
        if !ok(role) {
            return Err(ScenarioError::invalid(path, format!("peer {key:?} is a {role} peer, expected {what}")));
        }
        Ok(i)
    }

    fn group(&self, tree: &GroupTree, path: &str, group: Option<&str>) -> Result<GroupId, ScenarioError> {
        let Some(raw) = group else { return Ok(GroupId::root()) };
        let id = GroupId::parse(raw).map_err(|e| ScenarioError::invalid(path, e.to_string()))?;
        if !tree.contains(&id) {
            return Err(ScenarioError::invalid(path, format!("undeclared group {id}")));
        }
        Ok(id)
    }

    fn run(self) -> Result<ResolvedScenario, ScenarioError> {
        let cfg = self.cfg;
        let defaults = &cfg.defaults;
        if cfg.sweep_interval_ms == 0 {
            return Err(ScenarioError::invalid("sweep_interval_ms", "must be positive"));
        }
        let weights = FieldWeights::new(cfg.field_weights.name, cfg.field_weights.description, cfg.field_weights.wsdl)
            .map_err(|e| ScenarioError::invalid("field_weights", e.to_string()))?;
        if defaults.k == 0 {
            return Err(ScenarioError::invalid("defaults.k", "must be at least 1"));
        }
        if defaults.lifetime_ms == 0 {
            return Err(ScenarioError::invalid("defaults.lifetime_ms", "must be positive"));
        }
        if defaults.rendezvous_capacity == 0 || defaults.edge_capacity == 0 {
            return Err(ScenarioError::invalid("defaults", "cache capacities must be positive"));
        }

        let mut peers = Vec::new();
        let mut link_latency = BTreeMap::new();
        for (i, spec) in cfg.peers.iter().enumerate() {
            let role: PeerRole = spec.role.into();
            let id = self.ids[i].clone();
            let mut resolved = ResolvedPeer {
                id: id.clone(),
                name: spec.name.clone(),
                role,
                rendezvous: None,
                relay: None,
                neighbors: BTreeSet::new(),
                links: BTreeSet::new(),
                online: spec.online,
                cache_capacity: spec.cache_capacity.unwrap_or(if role.is_rendezvous() {
                    defaults.rendezvous_capacity
                } else {
                    defaults.edge_capacity
                }),
            };
            if resolved.cache_capacity == 0 {
                return Err(ScenarioError::invalid(format!("peers[{i}].cache_capacity"), "must be positive"));
            }
            match (role, &spec.rendezvous) {
                (PeerRole::Edge, Some(r)) => {
                    let path = format!("peers[{i}].rendezvous");
                    let j = self.peer_with(&path, r, PeerRole::is_rendezvous, "rendezvous or super")?;
                    resolved.rendezvous = Some(self.ids[j].clone());
                }
                (PeerRole::Edge, None) => {
                    return Err(ScenarioError::invalid(
                        format!("peers[{i}].rendezvous"),
                        "edge peers need a rendezvous",
                    ))
                }
                (_, Some(_)) => {
                    return Err(ScenarioError::invalid(format!("peers[{i}].rendezvous"), "only edge peers register"))
                }
                (_, None) => {}
            }
            if let Some(relay) = &spec.relay {
                let path = format!("peers[{i}].relay");
                if role != PeerRole::Edge {
                    return Err(ScenarioError::invalid(path, "only edge peers sit behind a relay"));
                }
                let j = self.peer_with(&path, relay, PeerRole::is_relay, "relay or super")?;
                resolved.relay = Some(self.ids[j].clone());
            }
            for (n, neighbor) in spec.neighbors.iter().enumerate() {
                let path = format!("peers[{i}].neighbors[{n}]");
                if !role.is_rendezvous() {
                    return Err(ScenarioError::invalid(path, "only rendezvous peers have overlay neighbours"));
                }
                let j = self.peer_with(&path, neighbor, PeerRole::is_rendezvous, "rendezvous or super")?;
                if j == i {
                    return Err(ScenarioError::invalid(path, "a peer cannot neighbour itself"));
                }
                resolved.neighbors.insert(self.ids[j].clone());
            }
            for (n, link) in spec.links.iter().enumerate() {
                let path = format!("peers[{i}].links[{n}].to");
                let j = self.peer(&path, &link.to)?;
                if j == i {
                    return Err(ScenarioError::invalid(path, "a peer cannot link to itself"));
                }
                resolved.links.insert(self.ids[j].clone());
                link_latency.insert(
                    link_key(&id, &self.ids[j]),
                    LatencySpec { base_ms: link.base_ms, jitter_ms: link.jitter_ms },
                );
            }
            peers.push(resolved);
        }
        // neighbour relation and links are symmetric
        for i in 0..peers.len() {
            for other in peers[i].neighbors.clone() {
                let j = self.ids.iter().position(|p| *p == other).expect("resolved");
                let id = peers[i].id.clone();
                peers[j].neighbors.insert(id);
            }
            for other in peers[i].links.clone() {
                let j = self.ids.iter().position(|p| *p == other).expect("resolved");
                let id = peers[i].id.clone();
                peers[j].links.insert(id);
            }
        }

        let mut groups = GroupTree::new();
        let mut declared: Vec<(usize, GroupId)> = Vec::new();
        for (i, raw) in cfg.groups.iter().enumerate() {
            let id = GroupId::parse(raw).map_err(|e| ScenarioError::invalid(format!("groups[{i}]"), e.to_string()))?;
            declared.push((i, id));
        }
        declared.sort_by_key(|(_, g)| g.segments().len());
        for (i, id) in declared {
            groups.create_group(id).map_err(|e| ScenarioError::invalid(format!("groups[{i}]"), e.to_string()))?;
        }

        let class_specs = if cfg.classes.is_empty() {
            vec![ClassSpec { name: DEFAULT_CLASS_NAME.into(), description: String::new() }]
        } else {
            cfg.classes.clone()
        };
        let mut classes = Vec::new();
        for (i, class) in class_specs.iter().enumerate() {
            let path = format!("classes[{i}]");
            if classes.iter().any(|c: &ModuleClassAdvertisement| c.name == class.name) {
                return Err(ScenarioError::invalid(path, format!("duplicate class {:?}", class.name)));
            }
            let mca =
                ModuleClassAdvertisement::new(ModuleClassId::derive(&class.name), &class.name, &class.description)
                    .map_err(|e| ScenarioError::invalid(path, e.to_string()))?;
            classes.push(mca);
        }

        let mut order: Vec<usize> = (0..cfg.schedule.len()).collect();
        order.sort_by_key(|&i| cfg.schedule[i].at_ms);
        let mut published: BTreeMap<(usize, String), crate::adverts::ModuleSpecId> = BTreeMap::new();
        let mut schedule = Vec::new();
        let mut last_at = 0;
        for i in order {
            let item = &cfg.schedule[i];
            let base = format!("schedule[{i}]");
            last_at = last_at.max(item.at_ms);
            let is_edge = |r: PeerRole| r == PeerRole::Edge;
            let action = match &item.action {
                Action::Publish { peer, service, lifetime_ms, group } => {
                    let p = self.peer_with(&format!("{base}.peer"), peer, is_edge, "edge")?;
                    let lifetime_ms =
                        positive(&format!("{base}.lifetime_ms"), lifetime_ms.unwrap_or(defaults.lifetime_ms))?;
                    let group = self.group(&groups, &format!("{base}.group"), group.as_deref())?;
                    let advert = self.build_service(&format!("{base}.service"), service, &classes, &self.ids[p])?;
                    published.insert((p, advert.name.clone()), advert.msid.clone());
                    ResolvedAction::Publish { peer: self.ids[p].clone(), advert: Box::new(advert), lifetime_ms, group }
                }
                Action::Republish { peer, service, lifetime_ms } => {
                    let p = self.peer_with(&format!("{base}.peer"), peer, is_edge, "edge")?;
                    let lifetime_ms =
                        positive(&format!("{base}.lifetime_ms"), lifetime_ms.unwrap_or(defaults.lifetime_ms))?;
                    let msid = published.get(&(p, service.clone())).cloned().ok_or_else(|| {
                        ScenarioError::invalid(
                            format!("{base}.service"),
                            format!("{peer:?} has not published {service:?}"),
                        )
                    })?;
                    ResolvedAction::Republish { peer: self.ids[p].clone(), msid, lifetime_ms }
                }
                Action::Discover { peer, terms, group, k, hop_limit, timeout_ms } => {
                    let p = self.peer_with(&format!("{base}.peer"), peer, is_edge, "edge")?;
                    if tokenize(terms).is_empty() {
                        return Err(ScenarioError::invalid(format!("{base}.terms"), "query has no searchable tokens"));
                    }
                    let k = k.unwrap_or(defaults.k);
                    if k == 0 {
                        return Err(ScenarioError::invalid(format!("{base}.k"), "must be at least 1"));
                    }
                    ResolvedAction::Discover {
                        peer: self.ids[p].clone(),
                        terms: terms.clone(),
                        group: self.group(&groups, &format!("{base}.group"), group.as_deref())?,
                        k,
                        hop_limit: hop_limit.unwrap_or(defaults.hop_limit),
                        timeout_ms: timeout_ms.unwrap_or(defaults.timeout_ms),
                    }
                }
                Action::Switch { peer, rendezvous } => {
                    let p = self.peer_with(&format!("{base}.peer"), peer, is_edge, "edge")?;
                    let r = self.peer_with(
                        &format!("{base}.rendezvous"),
                        rendezvous,
                        PeerRole::is_rendezvous,
                        "rendezvous or super",
                    )?;
                    ResolvedAction::Switch { peer: self.ids[p].clone(), rendezvous: self.ids[r].clone() }
                }
                Action::Join { peer } => {
                    ResolvedAction::Join { peer: self.ids[self.peer(&format!("{base}.peer"), peer)?].clone() }
                }
                Action::Leave { peer } => {
                    ResolvedAction::Leave { peer: self.ids[self.peer(&format!("{base}.peer"), peer)?].clone() }
                }
            };
            schedule.push((item.at_ms, action));
        }
        if cfg.horizon_ms < last_at {
            return Err(ScenarioError::invalid(
                "horizon_ms",
                format!("horizon {} ends before the last action at {last_at}", cfg.horizon_ms),
            ));
        }

        Ok(ResolvedScenario {
            peers,
            groups,
            classes,
            schedule,
            link_latency,
            default_latency: defaults.latency,
            horizon_ms: cfg.horizon_ms,
            sweep_interval_ms: cfg.sweep_interval_ms,
            weights,
        })
    }

    fn build_service(
        &self,
        path: &str,
        service: &ServiceSpec,
        classes: &[ModuleClassAdvertisement],
        host: &PeerId,
    ) -> Result<ModuleSpecAdvertisement, ScenarioError> {
        match service {
            ServiceSpec::Inline { name, description, operations, class } => {
                let class = match class {
                    None => &classes[0],
                    Some(c) => classes.iter().find(|m| m.name == *c).ok_or_else(|| {
                        ScenarioError::invalid(format!("{path}.class"), format!("unknown class {c:?}"))
                    })?,
                };
                ServiceSketch { class_id: &class.mcid, host, name, description, operations }
                    .build()
                    .map_err(|e| ScenarioError::invalid(path, e.to_string()))
            }
            ServiceSpec::Xml { xml } => match parse_advert(xml) {
                Ok(Advertisement::Spec(msa)) => {
                    if !classes.iter().any(|c| msa.refines(c)) {
                        return Err(ScenarioError::invalid(
                            path,
                            format!("{} does not refine any declared class", msa.msid),
                        ));
                    }
                    Ok(msa)
                }
                Ok(Advertisement::Class(_)) => Err(ScenarioError::invalid(path, "expected an MSA, found an MCA")),
                Err(e) => Err(ScenarioError::invalid(path, e.to_string())),
            },
            ServiceSpec::File { file } => {
                Err(ScenarioError::invalid(format!("{path}.file"), format!("unresolved file reference {file:?}")))
            }
        }
    }
}

fn positive(path: &str, value: Millis) -> Result<Millis, ScenarioError> {
    if value == 0 {
        return Err(ScenarioError::invalid(path, "must be positive"));
    }
    Ok(value)
}

fn inline(name: &str, description: &str, operations: &[&str]) -> ServiceSpec {
    ServiceSpec::Inline {
        name: name.into(),
        description: description.into(),
        operations: operations.iter().map(|s| s.to_string()).collect(),
        class: None,
    }
}

/// The evaluation topology: two phones behind one relay, the relay attached
/// to a rendezvous that links to a second rendezvous. Phone A publishes a
/// weather, a picture and a health-sensor service; phone B searches for
/// "weather" two seconds later.
pub fn phone_relay_scenario() -> ScenarioConfig {
    let edge = |name: &str, phone: &str| PeerSpec {
        phone: Some(phone.into()),
        rendezvous: Some("rdv1".into()),
        relay: Some("relay".into()),
        links: vec![LinkSpec { to: "relay".into(), base_ms: 200, jitter_ms: 5 }],
        ..PeerSpec::new(name, RoleSpec::Edge)
    };
    let relay = PeerSpec {
        links: vec![LinkSpec { to: "rdv1".into(), base_ms: 20, jitter_ms: 5 }],
        ..PeerSpec::new("relay", RoleSpec::Relay)
    };
    let rdv1 = PeerSpec {
        neighbors: vec!["rdv2".into()],
        links: vec![LinkSpec { to: "rdv2".into(), base_ms: 20, jitter_ms: 5 }],
        ..PeerSpec::new("rdv1", RoleSpec::Rendezvous)
    };
    let rdv2 = PeerSpec::new("rdv2", RoleSpec::Rendezvous);
    let publish = |service: ServiceSpec, group: &str| ScheduledAction {
        at_ms: 0,
        action: Action::Publish {
            peer: "phoneA".into(),
            service,
            lifetime_ms: Some(300_000),
            group: Some(group.into()),
        },
    };
    ScenarioConfig {
        peers: vec![edge("phoneA", "+358401000001"), edge("phoneB", "+358401000002"), relay, rdv1, rdv2],
        groups: vec!["/weather".into(), "/pictures".into(), "/health".into()],
        classes: vec![ClassSpec {
            name: DEFAULT_CLASS_NAME.into(),
            description: "Web services hosted on smart phones".into(),
        }],
        schedule: vec![
            publish(
                inline(
                    "WeatherService",
                    "Current conditions and forecast from the phone's sensors",
                    &["getForecast", "getTemperature"],
                ),
                "/weather",
            ),
            publish(
                inline("PictureService", "Pictures taken by the smart phone camera", &["listPictures", "getPicture"]),
                "/pictures",
            ),
            publish(
                inline(
                    "HealthSensorService",
                    "Sensor readings for personal health care monitoring",
                    &["getHeartRate", "getActivity"],
                ),
                "/health",
            ),
            ScheduledAction {
                at_ms: 2_000,
                action: Action::Discover {
                    peer: "phoneB".into(),
                    terms: "weather".into(),
                    group: Some("/".into()),
                    k: Some(10),
                    hop_limit: Some(7),
                    timeout_ms: Some(1_000),
                },
            },
        ],
        horizon_ms: 5_000,
        sweep_interval_ms: 1_000,
        field_weights: WeightsSpec::default(),
        defaults: Defaults::default(),
    }
}

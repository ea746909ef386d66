//! Lifetime-aware advertisement store.
//!
//! Every entry carries an absolute expiry. An entry is dead once
//! `expires_at <= now`; dead entries are never returned by [`AdvertCache::lookup`]
//! even before a sweep physically removes them.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::adverts::{ModuleSpecAdvertisement, ModuleSpecId, PeerId};
use crate::groups::GroupId;
use crate::Millis;

pub const DEFAULT_RENDEZVOUS_CAPACITY: usize = 10_000;
pub const DEFAULT_EDGE_CAPACITY: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CacheError {
    #[error("cache capacity is zero")]
    CapacityZero,
    #[error("lifetime must be positive")]
    InvalidLifetime,
    #[error("no live entry for {0}")]
    NotFound(ModuleSpecId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CachedEntry {
    pub advert: ModuleSpecAdvertisement,
    pub publisher: PeerId,
    pub group: GroupId,
    pub published_at: Millis,
    pub expires_at: Millis,
}

impl CachedEntry {
    pub fn is_live(&self, now: Millis) -> bool {
        self.expires_at > now
    }

    pub fn remaining(&self, now: Millis) -> Millis {
        self.expires_at.saturating_sub(now)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdvertCache {
    capacity: usize,
    entries: BTreeMap<ModuleSpecId, CachedEntry>,
    // (expires_at, msid), kept in step with `entries`; first element is the eviction victim.
    by_expiry: BTreeSet<(Millis, ModuleSpecId)>,
}

impl AdvertCache {
    pub fn new(capacity: usize) -> Self {
        Self { capacity, entries: BTreeMap::new(), by_expiry: BTreeSet::new() }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Number of stored entries, including dead ones not yet swept.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Stores `advert` until `now + lifetime_ms`, replacing any entry with the
    /// same MSID. When the cache is full the entry with the smallest expiry
    /// (ties by MSID) is evicted first and returned.
    pub fn publish(
        &mut self,
        advert: ModuleSpecAdvertisement,
        publisher: PeerId,
        group: GroupId,
        lifetime_ms: Millis,
        now: Millis,
    ) -> Result<Option<CachedEntry>, CacheError> {
        if self.capacity == 0 {
            return Err(CacheError::CapacityZero);
        }
        if lifetime_ms == 0 {
            return Err(CacheError::InvalidLifetime);
        }
        let msid = advert.msid.clone();
        let mut evicted = None;
        if let Some(old) = self.entries.remove(&msid) {
            self.by_expiry.remove(&(old.expires_at, msid.clone()));
        } else if self.entries.len() >= self.capacity {
            if let Some((_, victim)) = self.by_expiry.pop_first() {
                evicted = self.entries.remove(&victim);
            }
        }
        let expires_at = now.saturating_add(lifetime_ms);
        self.by_expiry.insert((expires_at, msid.clone()));
        self.entries.insert(msid, CachedEntry { advert, publisher, group, published_at: now, expires_at });
        Ok(evicted)
    }

    /// Renews a live entry to expire at `now + lifetime_ms`.
    ///
    /// `NotFound` tells the publisher it has to publish the full
    /// advertisement again.
    pub fn republish(&mut self, msid: &ModuleSpecId, lifetime_ms: Millis, now: Millis) -> Result<Millis, CacheError> {
        if lifetime_ms == 0 {
            return Err(CacheError::InvalidLifetime);
        }
        let entry = match self.entries.get_mut(msid) {
            Some(entry) if entry.is_live(now) => entry,
            _ => return Err(CacheError::NotFound(msid.clone())),
        };
        self.by_expiry.remove(&(entry.expires_at, msid.clone()));
        entry.expires_at = now.saturating_add(lifetime_ms);
        self.by_expiry.insert((entry.expires_at, msid.clone()));
        Ok(entry.expires_at)
    }

    /// Removes every dead entry, returning their MSIDs in ascending order.
    pub fn expire_sweep(&mut self, now: Millis) -> Vec<ModuleSpecId> {
        let mut removed = Vec::new();
        while let Some((expires_at, _)) = self.by_expiry.first() {
            if *expires_at > now {
                break;
            }
            let (_, msid) = self.by_expiry.pop_first().expect("checked non-empty");
            self.entries.remove(&msid);
            removed.push(msid);
        }
        removed.sort();
        removed
    }

    pub fn lookup(&self, msid: &ModuleSpecId, now: Millis) -> Option<&CachedEntry> {
        self.entries.get(msid).filter(|e| e.is_live(now))
    }

    /// Live entries in MSID order.
    pub fn live(&self, now: Millis) -> impl Iterator<Item = &CachedEntry> {
        self.entries.values().filter(move |e| e.is_live(now))
    }

    /// Earliest expiry among stored entries, if any.
    pub fn next_expiry(&self) -> Option<Millis> {
        self.by_expiry.first().map(|(t, _)| *t)
    }
}

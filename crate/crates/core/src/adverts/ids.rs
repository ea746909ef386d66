use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use super::AdvertError;

const MCID_PREFIX: &str = "mcid:";
const MSID_PREFIX: &str = "msid:";
const PEER_PREFIX: &str = "peer:";

fn is_lower_hex(s: &str, len: usize) -> bool {
    s.len() == len && s.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
}

fn digest_hex(label: &str, bytes: usize) -> String {
    let digest = Sha256::digest(label.as_bytes());
    digest[..bytes].iter().map(|b| format!("{b:02x}")).collect()
}

/// Identifier of a module class advertisement: `mcid:<32 lowercase hex>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModuleClassId(String);

impl ModuleClassId {
    pub fn parse(s: &str) -> Result<Self, AdvertError> {
        match s.strip_prefix(MCID_PREFIX) {
            Some(hex) if is_lower_hex(hex, 32) => Ok(Self(s.to_string())),
            _ => Err(AdvertError::invalid("MCID", format!("{s:?} is not mcid:<32 hex>"))),
        }
    }

    /// Derives a stable class id from a human-readable label.
    pub fn derive(label: &str) -> Self {
        Self(format!("{MCID_PREFIX}{}", digest_hex(label, 16)))
    }

    pub fn hex(&self) -> &str {
        &self.0[MCID_PREFIX.len()..]
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ModuleClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for ModuleClassId {
    type Err = AdvertError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

/// Identifier of a module specification advertisement.
///
/// The canonical form `msid:<class hex>:<suffix hex>` embeds the class id
/// of the MCA the specification refines. Ordering is the byte order of the
/// canonical string.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModuleSpecId(String);

impl ModuleSpecId {
    pub fn new(class_id: &ModuleClassId, suffix: &str) -> Result<Self, AdvertError> {
        if !is_lower_hex(suffix, 32) {
            return Err(AdvertError::invalid("MSID", format!("suffix {suffix:?} is not 32 hex")));
        }
        Ok(Self(format!("{MSID_PREFIX}{}:{suffix}", class_id.hex())))
    }

    pub fn parse(s: &str) -> Result<Self, AdvertError> {
        let bad = || AdvertError::invalid("MSID", format!("{s:?} is not msid:<32 hex>:<32 hex>"));
        let rest = s.strip_prefix(MSID_PREFIX).ok_or_else(bad)?;
        let (class_hex, suffix) = rest.split_once(':').ok_or_else(bad)?;
        if !is_lower_hex(class_hex, 32) || !is_lower_hex(suffix, 32) {
            return Err(bad());
        }
        Ok(Self(s.to_string()))
    }

    /// Derives a stable spec id under `class_id` from a label.
    pub fn derive(class_id: &ModuleClassId, label: &str) -> Self {
        Self(format!("{MSID_PREFIX}{}:{}", class_id.hex(), digest_hex(label, 16)))
    }

    pub fn class_id(&self) -> ModuleClassId {
        ModuleClassId(format!("{MCID_PREFIX}{}", &self.0[MSID_PREFIX.len()..MSID_PREFIX.len() + 32]))
    }

    pub fn suffix(&self) -> &str {
        &self.0[MSID_PREFIX.len() + 33..]
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ModuleSpecId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for ModuleSpecId {
    type Err = AdvertError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

/// Peer identity `peer:<16 lowercase hex>`, optionally reachable by a phone
/// number alias. Equality, ordering and hashing use the id value only.
#[derive(Debug, Clone)]
pub struct PeerId {
    value: String,
    phone_alias: Option<String>,
}

impl PeerId {
    pub fn parse(s: &str) -> Result<Self, AdvertError> {
        match s.strip_prefix(PEER_PREFIX) {
            Some(hex) if is_lower_hex(hex, 16) => Ok(Self { value: s.to_string(), phone_alias: None }),
            _ => Err(AdvertError::invalid("PeerId", format!("{s:?} is not peer:<16 hex>"))),
        }
    }

    /// Derives a stable peer id from a display name.
    pub fn derive(name: &str) -> Self {
        Self { value: format!("{PEER_PREFIX}{}", digest_hex(name, 8)), phone_alias: None }
    }

    /// Attaches an E.164-like alias (`+` optional, then 3..=15 digits).
    pub fn with_phone(mut self, phone: &str) -> Result<Self, AdvertError> {
        let digits = phone.strip_prefix('+').unwrap_or(phone);
        if !(3..=15).contains(&digits.len()) || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(AdvertError::invalid("phone", format!("{phone:?} is not an E.164-like number")));
        }
        self.phone_alias = Some(phone.to_string());
        Ok(self)
    }

    pub fn as_str(&self) -> &str {
        &self.value
    }

    pub fn phone_alias(&self) -> Option<&str> {
        self.phone_alias.as_deref()
    }
}

impl PartialEq for PeerId {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl Eq for PeerId {}

impl Hash for PeerId {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.value.hash(state);
    }
}

impl PartialOrd for PeerId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PeerId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value.cmp(&other.value)
    }
}

impl fmt::Display for PeerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.value)
    }
}

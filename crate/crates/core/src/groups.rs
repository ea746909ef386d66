//! Hierarchical peer groups used to categorize advertisements.
//!
//! A query scoped to a group sees advertisements published in that group and
//! in all of its descendants; the root group `/` sees everything.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("invalid group path {0:?}")]
    InvalidPath(String),
    #[error("parent of {0} does not exist")]
    OrphanGroup(GroupId),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct GroupId {
    path: Vec<String>,
}

fn valid_segment(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-' || b == b'_')
}

impl GroupId {
    pub fn root() -> Self {
        Self::default()
    }

    pub fn parse(s: &str) -> Result<Self, GroupError> {
        let rest = s.strip_prefix('/').ok_or_else(|| GroupError::InvalidPath(s.to_string()))?;
        if rest.is_empty() {
            return Ok(Self::root());
        }
        let path: Vec<String> = rest.split('/').map(str::to_string).collect();
        if !path.iter().all(|seg| valid_segment(seg)) {
            return Err(GroupError::InvalidPath(s.to_string()));
        }
        Ok(Self { path })
    }

    pub fn child(&self, segment: &str) -> Result<Self, GroupError> {
        if !valid_segment(segment) {
            return Err(GroupError::InvalidPath(format!("{self}/{segment}")));
        }
        let mut path = self.path.clone();
        path.push(segment.to_string());
        Ok(Self { path })
    }

    pub fn is_root(&self) -> bool {
        self.path.is_empty()
    }

    pub fn parent(&self) -> Option<Self> {
        let (_, parent) = self.path.split_last()?;
        Some(Self { path: parent.to_vec() })
    }

    pub fn segments(&self) -> &[String] {
        &self.path
    }

    /// Whether `self` is `other` or one of its ancestors.
    pub fn contains(&self, other: &GroupId) -> bool {
        other.path.starts_with(&self.path)
    }
}

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            return f.write_str("/");
        }
        for seg in &self.path {
            write!(f, "/{seg}")?;
        }
        Ok(())
    }
}

impl FromStr for GroupId {
    type Err = GroupError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

/// True iff a query scoped to `query_group` may see an advertisement
/// published in `advert_group`.
pub fn in_scope(query_group: &GroupId, advert_group: &GroupId) -> bool {
    query_group.contains(advert_group)
}

/// Set of groups closed under the parent relation; always holds the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupTree {
    nodes: BTreeSet<GroupId>,
}

impl Default for GroupTree {
    fn default() -> Self {
        Self { nodes: BTreeSet::from([GroupId::root()]) }
    }
}

impl GroupTree {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn create_group(&mut self, id: GroupId) -> Result<(), GroupError> {
        match id.parent() {
            None => Ok(()),
            Some(parent) if self.nodes.contains(&parent) => {
                self.nodes.insert(id);
                Ok(())
            }
            Some(_) => Err(GroupError::OrphanGroup(id)),
        }
    }

    pub fn contains(&self, id: &GroupId) -> bool {
        self.nodes.contains(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &GroupId> {
        self.nodes.iter()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

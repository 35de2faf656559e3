use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NameError {
    #[error("name must start with '/'")]
    MissingLeadingSlash,
    #[error("name has no components")]
    Empty,
    #[error("empty component at position {0}")]
    EmptyComponent(usize),
    #[error("component {0:?} contains '/'")]
    SlashInComponent(String),
}

/// Hierarchical identifier: a non-empty list of non-empty UTF-8 components.
///
/// Ordering is component-wise lexicographic, so every extension of a name
/// sorts contiguously right after it. The content store and NRS rely on this.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name {
    components: Vec<String>,
}

impl Name {
    pub fn from_components<I, S>(components: I) -> Result<Self, NameError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let components: Vec<String> = components.into_iter().map(Into::into).collect();
        if components.is_empty() {
            return Err(NameError::Empty);
        }
        for (i, c) in components.iter().enumerate() {
            check_component(c, i)?;
        }
        Ok(Name { components })
    }

    pub fn parse(text: &str) -> Result<Self, NameError> {
        let rest = text
            .strip_prefix('/')
            .ok_or(NameError::MissingLeadingSlash)?;
        if rest.is_empty() {
            return Err(NameError::Empty);
        }
        Name::from_components(rest.split('/'))
    }

    pub fn components(&self) -> &[String] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    /// Always false; kept for clippy's `len_without_is_empty`.
    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// True iff `self` is a leading sublist of `other` (equality included).
    pub fn is_prefix_of(&self, other: &Name) -> bool {
        self.components.len() <= other.components.len()
            && self.components.iter().zip(&other.components).all(|(a, b)| a == b)
    }

    /// Leading `n` components. `n` is clamped to `1..=len`.
    pub fn prefix(&self, n: usize) -> Name {
        let n = n.clamp(1, self.components.len());
        Name {
            components: self.components[..n].to_vec(),
        }
    }

    /// All prefixes, longest first (the name itself included).
    pub fn prefixes_longest_first(&self) -> impl Iterator<Item = Name> + '_ {
        (1..=self.components.len()).rev().map(|n| self.prefix(n))
    }

    pub fn try_child(&self, component: impl Into<String>) -> Result<Name, NameError> {
        let component = component.into();
        check_component(&component, self.components.len())?;
        let mut components = self.components.clone();
        components.push(component);
        Ok(Name { components })
    }

    /// Appends one component.
    ///
    /// Panics when `component` is empty or contains '/'. Use [`Name::try_child`]
    /// for untrusted input.
    pub fn child(&self, component: impl Into<String>) -> Name {
        self.try_child(component).expect("invalid name component")
    }

    pub fn last(&self) -> &str {
        self.components.last().map(String::as_str).unwrap_or_default()
    }
}

fn check_component(c: &str, index: usize) -> Result<(), NameError> {
    if c.is_empty() {
        return Err(NameError::EmptyComponent(index));
    }
    if c.contains('/') {
        return Err(NameError::SlashInComponent(c.to_string()));
    }
    Ok(())
}

/// Free-function form of [`Name::is_prefix_of`].
pub fn name_is_prefix(prefix: &Name, name: &Name) -> bool {
    prefix.is_prefix_of(name)
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.components {
            write!(f, "/{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Name({self})")
    }
}

impl FromStr for Name {
    type Err = NameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Name::parse(s)
    }
}

impl Serialize for Name {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Name {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Name::parse(&text).map_err(serde::de::Error::custom)
    }
}

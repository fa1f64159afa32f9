// SPDX-License-Identifier: Apache-2.0

//! Local human-readable names for labels.
//!
//! Names are a convenience of the local user only; the network never sees
//! them. A directory is injective: one name per label and one label per name.

use std::collections::BTreeMap;
use std::path::Path;

use rand::RngCore;

use crate::label::{new_label, Label};

#[derive(Debug, thiserror::Error)]
pub enum NameError {
    #[error("name {0:?} is already bound to a different label")]
    NameTaken(String),
    #[error("label {label} is already named {existing:?}")]
    LabelTaken { label: Label, existing: String },
    #[error("name directory is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NameDirectory {
    by_name: BTreeMap<String, Label>,
    by_label: BTreeMap<Label, String>,
}

impl NameDirectory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, label: Label) -> Result<(), NameError> {
        let name = name.into();
        match (self.by_name.get(&name), self.by_label.get(&label)) {
            (Some(l), _) if *l == label => return Ok(()),
            (Some(_), _) => return Err(NameError::NameTaken(name)),
            (None, Some(existing)) => {
                return Err(NameError::LabelTaken { label, existing: existing.clone() })
            }
            (None, None) => {}
        }
        self.by_label.insert(label, name.clone());
        self.by_name.insert(name, label);
        Ok(())
    }

    /// Look up `name`, minting and recording a fresh label if absent.
    pub fn intern<R: RngCore + ?Sized>(&mut self, name: &str, rng: &mut R) -> Label {
        if let Some(l) = self.by_name.get(name) {
            return *l;
        }
        let mut label = new_label(rng);
        while self.by_label.contains_key(&label) {
            label = new_label(rng);
        }
        self.insert(name, label).expect("fresh name and label");
        label
    }

    pub fn resolve(&self, name: &str) -> Option<Label> {
        self.by_name.get(name).copied()
    }

    pub fn name_of(&self, label: &Label) -> Option<&str> {
        self.by_label.get(label).map(String::as_str)
    }

    /// Resolve a term that is either a UUID literal or a known name.
    pub fn resolve_term(&self, term: &str) -> Option<Label> {
        term.parse().ok().or_else(|| self.resolve(term))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Label)> {
        self.by_name.iter().map(|(n, l)| (n.as_str(), *l))
    }

    pub fn len(&self) -> usize {
        self.by_name.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_name.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.by_name).expect("string map serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, NameError> {
        let raw: BTreeMap<String, Label> = serde_json::from_str(s)?;
        let mut d = NameDirectory::new();
        for (n, l) in raw {
            d.insert(n, l)?;
        }
        Ok(d)
    }

    pub fn load(path: &Path) -> Result<Self, NameError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), NameError> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}

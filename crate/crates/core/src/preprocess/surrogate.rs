//! Role/actor knowledge bases and surrogate-tag substitution.
//!
//! Names are replaced by `role_<rank>` / `actor_<rank>` where rank 1 is the
//! most important entry of its kind in the series. Roles and actors are
//! numbered independently.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PersonKind {
    Role,
    Actor,
}

impl PersonKind {
    pub fn tag_prefix(self) -> &'static str {
        match self {
            PersonKind::Role => "role",
            PersonKind::Actor => "actor",
        }
    }

    pub fn tag(self, rank: u32) -> String {
        format!("{}_{rank}", self.tag_prefix())
    }
}

impl fmt::Display for PersonKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag_prefix())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonEntry {
    pub name: String,
    #[serde(default)]
    pub aliases: Vec<String>,
    pub rank: u32,
}

impl PersonEntry {
    pub fn new(name: &str, rank: u32) -> Self {
        PersonEntry {
            name: name.to_string(),
            aliases: Vec::new(),
            rank,
        }
    }

    pub fn with_alias(mut self, alias: &str) -> Self {
        self.aliases.push(alias.to_string());
        self
    }

    /// Canonical name followed by aliases.
    pub fn surfaces(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.name.as_str()).chain(self.aliases.iter().map(String::as_str))
    }
}

/// Importance-ranked roles and actors of one series.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnowledgeBase {
    pub series: String,
    #[serde(default)]
    pub roles: Vec<PersonEntry>,
    #[serde(default)]
    pub actors: Vec<PersonEntry>,
}

impl KnowledgeBase {
    pub fn load(path: &Path) -> Result<KnowledgeBase> {
        let text = crate::io::read_to_string(path)?;
        KnowledgeBase::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<KnowledgeBase> {
        let kb: KnowledgeBase =
            serde_json::from_str(text).map_err(|e| Error::json("knowledge base", e))?;
        kb.normalized().validated()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("knowledge base serializes")
    }

    fn normalized(mut self) -> Self {
        for e in self.roles.iter_mut().chain(self.actors.iter_mut()) {
            e.name = e.name.nfc().collect();
            for a in &mut e.aliases {
                *a = a.nfc().collect();
            }
        }
        self
    }

    /// Checks names are non-empty and ranks per kind are exactly `1..=n`.
    pub fn validated(self) -> Result<KnowledgeBase> {
        for (kind, entries) in self.entries_by_kind() {
            let mut ranks: Vec<u32> = entries.iter().map(|e| e.rank).collect();
            ranks.sort_unstable();
            if ranks.iter().enumerate().any(|(i, r)| *r as usize != i + 1) {
                return Err(Error::InvalidKnowledgeBase(format!(
                    "{} ranks in series `{}` must be unique and contiguous from 1, got {ranks:?}",
                    kind, self.series
                )));
            }
            if let Some(e) = entries.iter().find(|e| e.surfaces().any(str::is_empty)) {
                return Err(Error::InvalidKnowledgeBase(format!(
                    "{kind} of rank {} has an empty name or alias",
                    e.rank
                )));
            }
        }
        Ok(self)
    }

    fn entries_by_kind(&self) -> [(PersonKind, &[PersonEntry]); 2] {
        [
            (PersonKind::Role, self.roles.as_slice()),
            (PersonKind::Actor, self.actors.as_slice()),
        ]
    }

    /// Every surface string in the knowledge base.
    pub fn surfaces(&self) -> impl Iterator<Item = &str> {
        self.roles
            .iter()
            .chain(self.actors.iter())
            .flat_map(PersonEntry::surfaces)
    }
}

/// Surface string (name or alias) to surrogate tag.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SurrogateMap {
    entries: BTreeMap<String, String>,
    // tag of trie entry `i`
    tags: Vec<String>,
    trie: Trie,
}

impl SurrogateMap {
    pub fn build(kb: &KnowledgeBase) -> Result<SurrogateMap> {
        let mut entries: BTreeMap<String, String> = BTreeMap::new();
        let mut owner: HashMap<String, (PersonKind, u32)> = HashMap::new();
        for (kind, list) in kb.entries_by_kind() {
            for entry in list {
                for surface in entry.surfaces() {
                    match owner.get(surface) {
                        Some(&(k, r)) if (k, r) != (kind, entry.rank) => {
                            return Err(Error::AmbiguousSurface {
                                surface: surface.to_string(),
                                first: k.tag(r),
                                second: kind.tag(entry.rank),
                            });
                        }
                        Some(_) => {}
                        None => {
                            owner.insert(surface.to_string(), (kind, entry.rank));
                            entries.insert(surface.to_string(), kind.tag(entry.rank));
                        }
                    }
                }
            }
        }
        Ok(SurrogateMap::from_entries(entries))
    }

    fn from_entries(entries: BTreeMap<String, String>) -> SurrogateMap {
        let mut trie = Trie::default();
        for (i, surface) in entries.keys().enumerate() {
            trie.insert(surface, i);
        }
        let tags = entries.values().cloned().collect();
        SurrogateMap { entries, tags, trie }
    }

    pub fn get(&self, surface: &str) -> Option<&str> {
        self.entries.get(surface).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Splits `text` into untouched text and tag pieces, scanning left to right
    /// and taking the longest surface string that starts at each position.
    pub fn segments<'a>(&'a self, text: &'a str) -> Vec<Piece<'a>> {
        let mut pieces = Vec::new();
        let mut plain_start = 0;
        let mut pos = 0;
        while pos < text.len() {
            if let Some((len, id)) = self.trie.longest_match(&text[pos..]) {
                if plain_start < pos {
                    pieces.push(Piece::Text(&text[plain_start..pos]));
                }
                pieces.push(Piece::Tag(&self.tags[id]));
                pos += len;
                plain_start = pos;
            } else {
                pos += text[pos..].chars().next().map_or(1, char::len_utf8);
            }
        }
        if plain_start < text.len() {
            pieces.push(Piece::Text(&text[plain_start..]));
        }
        pieces
    }

    /// Replaces every mapped name with its tag.
    pub fn substitute(&self, text: &str) -> String {
        if self.is_empty() {
            return text.to_string();
        }
        self.segments(text)
            .into_iter()
            .map(|p| match p {
                Piece::Text(s) | Piece::Tag(s) => s,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Piece<'a> {
    Text(&'a str),
    Tag(&'a str),
}

/// Character trie over surface strings; terminal nodes carry the entry id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Trie {
    nodes: Vec<TrieNode>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct TrieNode {
    children: BTreeMap<char, usize>,
    terminal: Option<usize>,
}

impl Trie {
    fn insert(&mut self, word: &str, id: usize) {
        if self.nodes.is_empty() {
            self.nodes.push(TrieNode::default());
        }
        let mut node = 0;
        for ch in word.chars() {
            node = match self.nodes[node].children.get(&ch) {
                Some(&next) => next,
                None => {
                    self.nodes.push(TrieNode::default());
                    let next = self.nodes.len() - 1;
                    self.nodes[node].children.insert(ch, next);
                    next
                }
            };
        }
        self.nodes[node].terminal = Some(id);
    }

    /// Byte length and id of the longest word that prefixes `text`.
    fn longest_match(&self, text: &str) -> Option<(usize, usize)> {
        let mut node = 0;
        let mut best = None;
        if self.nodes.is_empty() {
            return None;
        }
        for (offset, ch) in text.char_indices() {
            match self.nodes[node].children.get(&ch) {
                Some(&next) => node = next,
                None => break,
            }
            if let Some(id) = self.nodes[node].terminal {
                best = Some((offset + ch.len_utf8(), id));
            }
        }
        best
    }
}

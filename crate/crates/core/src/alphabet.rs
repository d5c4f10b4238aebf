//! Event alphabets and finite event sequences.

use crate::error::{Error, Result};
use std::borrow::Cow;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

/// An ordered set of distinct event symbols.
///
/// The declaration order is fixed at construction and drives every
/// enumeration in the library: breadth-first exploration, tie-breaking,
/// and witness minimality all follow it.
#[derive(Debug, Clone)]
pub struct Alphabet {
    inner: Arc<AlphabetInner>,
}

#[derive(Debug)]
struct AlphabetInner {
    events: Vec<String>,
    index: HashMap<String, u32>,
}

impl Alphabet {
    pub fn new<I, S>(events: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let events: Vec<String> = events.into_iter().map(Into::into).collect();
        if events.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        let mut index = HashMap::with_capacity(events.len());
        for (i, symbol) in events.iter().enumerate() {
            if index.insert(symbol.clone(), i as u32).is_some() {
                return Err(Error::DuplicateEvent(symbol.clone()));
            }
        }
        Ok(Alphabet {
            inner: Arc::new(AlphabetInner { events, index }),
        })
    }

    pub fn len(&self) -> usize {
        self.inner.events.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty alphabets
    }

    pub fn events(&self) -> &[String] {
        &self.inner.events
    }

    pub fn contains(&self, symbol: &str) -> bool {
        self.inner.index.contains_key(symbol)
    }

    pub fn index_of(&self, symbol: &str) -> Option<u32> {
        self.inner.index.get(symbol).copied()
    }

    pub fn symbol(&self, id: u32) -> &str {
        &self.inner.events[id as usize]
    }

    pub(crate) fn ids(&self) -> std::ops::Range<u32> {
        0..self.len() as u32
    }
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.events == other.inner.events
    }
}

impl Eq for Alphabet {}

impl Hash for Alphabet {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.inner.events.hash(state);
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.events().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

/// A finite sequence of events over one alphabet.
///
/// The empty sequence is a valid value. Events are stored as indices into
/// the owning alphabet; construction validates membership.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EventSequence {
    alphabet: Alphabet,
    items: Vec<u32>,
}

impl EventSequence {
    /// The empty sequence over `alphabet`.
    pub fn empty(alphabet: &Alphabet) -> Self {
        EventSequence {
            alphabet: alphabet.clone(),
            items: Vec::new(),
        }
    }

    /// Builds a sequence from event symbols, validating each against the
    /// alphabet; reports the position of the first foreign symbol.
    pub fn from_symbols<I, S>(alphabet: &Alphabet, symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut items = Vec::new();
        for (position, symbol) in symbols.into_iter().enumerate() {
            let symbol = symbol.as_ref();
            match alphabet.index_of(symbol) {
                Some(id) => items.push(id),
                None => {
                    return Err(Error::ForeignEvent {
                        symbol: symbol.to_string(),
                        position,
                    })
                }
            }
        }
        Ok(EventSequence {
            alphabet: alphabet.clone(),
            items,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// The sequence with `symbol` appended.
    pub fn appended(&self, symbol: &str) -> Result<Self> {
        let id = self
            .alphabet
            .index_of(symbol)
            .ok_or_else(|| Error::ForeignEvent {
                symbol: symbol.to_string(),
                position: self.items.len(),
            })?;
        Ok(self.appended_id(id))
    }

    pub(crate) fn appended_id(&self, id: u32) -> Self {
        let mut items = self.items.clone();
        items.push(id);
        EventSequence {
            alphabet: self.alphabet.clone(),
            items,
        }
    }

    /// Concatenation; both sequences must share one alphabet.
    pub fn concat(&self, other: &EventSequence) -> Result<Self> {
        if self.alphabet != other.alphabet {
            return Err(Error::AlphabetMismatch {
                expected: self.alphabet.to_string(),
                actual: other.alphabet.to_string(),
            });
        }
        let mut items = self.items.clone();
        items.extend_from_slice(&other.items);
        Ok(EventSequence {
            alphabet: self.alphabet.clone(),
            items,
        })
    }

    /// The prefix holding the first `len` events.
    pub fn prefix(&self, len: usize) -> Self {
        EventSequence {
            alphabet: self.alphabet.clone(),
            items: self.items[..len.min(self.items.len())].to_vec(),
        }
    }

    pub fn is_prefix_of(&self, other: &EventSequence) -> bool {
        self.alphabet == other.alphabet
            && self.items.len() <= other.items.len()
            && self.items[..] == other.items[..self.items.len()]
    }

    pub fn symbols(&self) -> impl Iterator<Item = &str> + '_ {
        self.items.iter().map(|&id| self.alphabet.symbol(id))
    }

    pub(crate) fn from_ids(alphabet: &Alphabet, items: Vec<u32>) -> Self {
        debug_assert!(items.iter().all(|&id| (id as usize) < alphabet.len()));
        EventSequence {
            alphabet: alphabet.clone(),
            items,
        }
    }

    /// Event ids of this sequence re-indexed against `target`.
    ///
    /// Borrows when the alphabets already agree; otherwise resolves each
    /// symbol and reports the first that `target` does not know.
    pub(crate) fn ids_in<'a>(&'a self, target: &Alphabet) -> Result<Cow<'a, [u32]>> {
        if self.alphabet == *target {
            return Ok(Cow::Borrowed(&self.items));
        }
        let mut ids = Vec::with_capacity(self.items.len());
        for (position, &id) in self.items.iter().enumerate() {
            let symbol = self.alphabet.symbol(id);
            match target.index_of(symbol) {
                Some(target_id) => ids.push(target_id),
                None => {
                    return Err(Error::ForeignEvent {
                        symbol: symbol.to_string(),
                        position,
                    })
                }
            }
        }
        Ok(Cow::Owned(ids))
    }
}

impl fmt::Display for EventSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, symbol) in self.symbols().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{symbol}")?;
        }
        Ok(())
    }
}

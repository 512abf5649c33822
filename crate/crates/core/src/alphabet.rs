//! Interned alphabets and signed letters.
//!
//! Symbols are interned once per [`Alphabet`] and afterwards compared by id,
//! so two letters are equal iff they are the same symbol with the same sign.
//! Words never store symbol names; printing takes the alphabet as context.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlphabetError {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("symbol `{0}` is not a valid identifier")]
    BadIdentifier(String),
    #[error("duplicate symbol `{0}`")]
    Duplicate(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SymbolId(pub u32);

/// A letter `x` or `x^-1` over an interned alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub sym: SymbolId,
    pub inverse: bool,
}

impl Letter {
    pub fn new(sym: SymbolId) -> Self {
        Letter {
            sym,
            inverse: false,
        }
    }

    pub fn inv(self) -> Self {
        Letter {
            sym: self.sym,
            inverse: !self.inverse,
        }
    }

    /// `true` iff `other` is exactly the inverse of `self`.
    pub fn cancels(self, other: Letter) -> bool {
        self.sym == other.sym && self.inverse != other.inverse
    }
}

/// A finite set of named symbols with stable ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
    index: HashMap<String, SymbolId>,
}

fn valid_ident(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && name != "1"
}

impl Alphabet {
    pub fn new() -> Self {
        Alphabet::default()
    }

    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self, AlphabetError> {
        let mut a = Alphabet::new();
        for n in names {
            a.intern_new(n.as_ref())?;
        }
        Ok(a)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, id: SymbolId) -> &str {
        &self.names[id.0 as usize]
    }

    pub fn lookup(&self, name: &str) -> Option<SymbolId> {
        self.index.get(name).copied()
    }

    /// Interns `name`, returning the existing id if already present.
    pub fn intern(&mut self, name: &str) -> Result<SymbolId, AlphabetError> {
        if let Some(id) = self.lookup(name) {
            return Ok(id);
        }
        self.intern_new(name)
    }

    fn intern_new(&mut self, name: &str) -> Result<SymbolId, AlphabetError> {
        if !valid_ident(name) {
            return Err(AlphabetError::BadIdentifier(name.to_string()));
        }
        if self.index.contains_key(name) {
            return Err(AlphabetError::Duplicate(name.to_string()));
        }
        let id = SymbolId(self.names.len() as u32);
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        Ok(id)
    }

    /// Adds a fresh symbol named `base`, or `base_<k>` on collision.
    pub fn fresh(&mut self, base: &str) -> SymbolId {
        if !self.index.contains_key(base) {
            return self.intern_new(base).expect("fresh symbol name invalid");
        }
        let mut k = 1usize;
        loop {
            let candidate = format!("{base}_{k}");
            if !self.index.contains_key(&candidate) {
                return self.intern_new(&candidate).expect("fresh symbol name invalid");
            }
            k += 1;
        }
    }

    pub fn letter(&self, name: &str) -> Result<Letter, AlphabetError> {
        self.lookup(name)
            .map(Letter::new)
            .ok_or_else(|| AlphabetError::UnknownSymbol(name.to_string()))
    }

    pub fn show_letter(&self, l: Letter) -> String {
        if l.inverse {
            format!("{}^-1", self.name(l.sym))
        } else {
            self.name(l.sym).to_string()
        }
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.names.join(", "))
    }
}

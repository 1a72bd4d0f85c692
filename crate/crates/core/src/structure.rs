//! Finite relational structures over a relational signature.
//!
//! A [`Structure`] lives on the domain `{0, …, size−1}` and interprets every
//! symbol of its [`Signature`] as a duplicate-free set of tuples. Values are
//! immutable once built and every operation on them is a pure function, so
//! they can be shared freely across threads.

use std::collections::{BTreeMap, BTreeSet};
use std::hash::{Hash, Hasher};

use crate::embed::Embedding;
use crate::error::Error;

/// Returns true when `name` is a legal relation-symbol name: non-empty and
/// drawn from `[A-Za-z0-9_.<]`.
pub fn valid_symbol_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '<'))
}

/// A relation symbol: a name together with a fixed arity (>= 1).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RelationSymbol {
    name: String,
    arity: usize,
}

impl RelationSymbol {
    pub fn new(name: impl Into<String>, arity: usize) -> Result<Self, Error> {
        let name = name.into();
        if !valid_symbol_name(&name) {
            return Err(Error::InvalidSymbolName { name });
        }
        if arity == 0 {
            return Err(Error::InvalidArity { name });
        }
        Ok(RelationSymbol { name, arity })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }
}

/// The vocabulary of a structure: finitely many named relation symbols.
///
/// The symbol list keeps its construction order, which is used only for
/// rendering. Equality and hashing treat a signature as the *set* of its
/// `(name, arity)` pairs.
#[derive(Clone, Debug)]
pub struct Signature {
    symbols: Vec<RelationSymbol>,
}

impl Signature {
    /// Builds a signature from `(name, arity)` pairs, rejecting invalid names,
    /// zero arities and duplicate names.
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = (S, usize)>) -> Result<Self, Error> {
        let mut out: Vec<RelationSymbol> = Vec::new();
        for (name, arity) in symbols {
            let sym = RelationSymbol::new(name, arity)?;
            if out.iter().any(|s| s.name == sym.name) {
                return Err(Error::DuplicateSymbol { name: sym.name });
            }
            out.push(sym);
        }
        Ok(Signature { symbols: out })
    }

    /// The empty signature (pure sets).
    pub fn empty() -> Self {
        Signature { symbols: Vec::new() }
    }

    /// Convenience: a signature with a single binary symbol.
    pub fn binary(name: impl Into<String>) -> Result<Self, Error> {
        Signature::new([(name.into(), 2)])
    }

    /// Symbols in rendering order.
    pub fn symbols(&self) -> &[RelationSymbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.symbols.iter().any(|s| s.name == name)
    }

    pub fn arity_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().find(|s| s.name == name).map(|s| s.arity)
    }

    /// Symbol names in rendering order.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.symbols.iter().map(|s| s.name.as_str())
    }

    /// `(name, arity)` pairs sorted by name; the canonical set view used for
    /// equality, hashing and canonical forms.
    pub fn sorted_pairs(&self) -> Vec<(&str, usize)> {
        let mut pairs: Vec<(&str, usize)> = self
            .symbols
            .iter()
            .map(|s| (s.name.as_str(), s.arity))
            .collect();
        pairs.sort();
        pairs
    }

    pub fn is_disjoint_from(&self, other: &Signature) -> bool {
        self.symbols.iter().all(|s| !other.contains(&s.name))
    }

    /// Union of two signatures with disjoint symbol names; `self`'s symbols
    /// come first in rendering order.
    pub fn union(&self, other: &Signature) -> Result<Signature, Error> {
        for s in &other.symbols {
            if self.contains(&s.name) {
                return Err(Error::OverlappingSignatures {
                    name: s.name.clone(),
                });
            }
        }
        let mut symbols = self.symbols.clone();
        symbols.extend(other.symbols.iter().cloned());
        Ok(Signature { symbols })
    }

    /// The sub-signature containing exactly the named symbols, kept in this
    /// signature's rendering order. Unknown names are an error.
    pub fn restricted(&self, keep: &BTreeSet<String>) -> Result<Signature, Error> {
        for name in keep {
            if !self.contains(name) {
                return Err(Error::UnknownSymbol { name: name.clone() });
            }
        }
        Ok(Signature {
            symbols: self
                .symbols
                .iter()
                .filter(|s| keep.contains(&s.name))
                .cloned()
                .collect(),
        })
    }

    /// Appends a fresh symbol; errors when the name is already taken.
    pub fn extended(&self, name: impl Into<String>, arity: usize) -> Result<Signature, Error> {
        let sym = RelationSymbol::new(name, arity)?;
        if self.contains(&sym.name) {
            return Err(Error::NameCollision { name: sym.name });
        }
        let mut symbols = self.symbols.clone();
        symbols.push(sym);
        Ok(Signature { symbols })
    }
}

impl PartialEq for Signature {
    fn eq(&self, other: &Self) -> bool {
        self.sorted_pairs() == other.sorted_pairs()
    }
}

impl Eq for Signature {}

impl Hash for Signature {
    fn hash<H: Hasher>(&self, state: &mut H) {
        for (name, arity) in self.sorted_pairs() {
            name.hash(state);
            arity.hash(state);
        }
    }
}

/// A finite relational structure on the domain `{0, …, size−1}`.
///
/// Every signature symbol has an entry in the relation map (possibly empty),
/// and every tuple entry lies inside the domain.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Structure {
    sig: Signature,
    size: usize,
    rels: BTreeMap<String, BTreeSet<Vec<usize>>>,
}

impl Structure {
    /// A structure with all relations empty.
    pub fn new(sig: Signature, size: usize) -> Structure {
        let rels = sig
            .names()
            .map(|n| (n.to_string(), BTreeSet::new()))
            .collect();
        Structure { sig, size, rels }
    }

    pub fn sig(&self) -> &Signature {
        &self.sig
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Inserts a tuple; set semantics, so re-inserting is a no-op.
    pub fn add_tuple(&mut self, symbol: &str, tuple: &[usize]) -> Result<(), Error> {
        let arity = self
            .sig
            .arity_of(symbol)
            .ok_or_else(|| Error::UnknownSymbol {
                name: symbol.to_string(),
            })?;
        if tuple.len() != arity {
            return Err(Error::ArityMismatch {
                name: symbol.to_string(),
                expected: arity,
                got: tuple.len(),
            });
        }
        for &e in tuple {
            if e >= self.size {
                return Err(Error::ElementOutOfRange {
                    element: e,
                    size: self.size,
                });
            }
        }
        self.rels
            .get_mut(symbol)
            .expect("signature symbols always have a relation entry")
            .insert(tuple.to_vec());
        Ok(())
    }

    /// Consuming variant of [`Structure::add_tuple`], handy when building
    /// fixtures.
    pub fn with_tuple(mut self, symbol: &str, tuple: &[usize]) -> Result<Structure, Error> {
        self.add_tuple(symbol, tuple)?;
        Ok(self)
    }

    pub(crate) fn remove_tuple(&mut self, symbol: &str, tuple: &[usize]) {
        if let Some(set) = self.rels.get_mut(symbol) {
            set.remove(tuple);
        }
    }

    pub fn has_tuple(&self, symbol: &str, tuple: &[usize]) -> bool {
        self.rels.get(symbol).is_some_and(|set| set.contains(tuple))
    }

    /// The tuples of a symbol, in lexicographic order.
    pub fn tuples(&self, symbol: &str) -> Result<&BTreeSet<Vec<usize>>, Error> {
        self.rels.get(symbol).ok_or_else(|| Error::UnknownSymbol {
            name: symbol.to_string(),
        })
    }

    /// Total number of tuples across all relations.
    pub fn tuple_count(&self) -> usize {
        self.rels.values().map(|s| s.len()).sum()
    }

    /// True when no relation contains a tuple with repeated entries.
    pub fn relations_injective(&self) -> bool {
        self.first_non_injective_tuple().is_none()
    }

    /// The lexicographically first `(symbol, tuple)` with a repeated entry,
    /// if any.
    pub fn first_non_injective_tuple(&self) -> Option<(&str, &Vec<usize>)> {
        for (name, set) in &self.rels {
            for tuple in set {
                let mut seen = BTreeSet::new();
                if tuple.iter().any(|e| !seen.insert(e)) {
                    return Some((name.as_str(), tuple));
                }
            }
        }
        None
    }

    /// Same domain, relations restricted to the kept symbols.
    pub fn reduct(&self, keep: &BTreeSet<String>) -> Result<Structure, Error> {
        let sig = self.sig.restricted(keep)?;
        let rels = sig
            .names()
            .map(|n| (n.to_string(), self.rels[n].clone()))
            .collect();
        Ok(Structure {
            sig,
            size: self.size,
            rels,
        })
    }

    /// The structure induced on `subset`, relabelled to `{0, …, |S|−1}`
    /// preserving numeric order, together with the inclusion embedding back
    /// into `self`.
    pub fn substructure(&self, subset: &BTreeSet<usize>) -> Result<(Structure, Embedding), Error> {
        for &e in subset {
            if e >= self.size {
                return Err(Error::ElementOutOfRange {
                    element: e,
                    size: self.size,
                });
            }
        }
        let inclusion: Vec<usize> = subset.iter().copied().collect();
        let mut index_of = BTreeMap::new();
        for (new, &old) in inclusion.iter().enumerate() {
            index_of.insert(old, new);
        }
        let mut induced = Structure::new(self.sig.clone(), inclusion.len());
        for (name, set) in &self.rels {
            for tuple in set {
                if tuple.iter().all(|e| index_of.contains_key(e)) {
                    let mapped: Vec<usize> = tuple.iter().map(|e| index_of[e]).collect();
                    induced.add_tuple(name, &mapped)?;
                }
            }
        }
        let embedding = Embedding::new(&induced, self, inclusion)
            .expect("inclusion of an induced substructure is an embedding");
        Ok((induced, embedding))
    }

    /// The image of this structure under a bijective relabelling of its
    /// domain (`perm[old] = new`).
    pub fn relabeled(&self, perm: &[usize]) -> Result<Structure, Error> {
        if perm.len() != self.size {
            return Err(Error::IncompleteMap {
                expected: self.size,
                got: perm.len(),
            });
        }
        let mut seen = vec![false; self.size];
        for &p in perm {
            if p >= self.size {
                return Err(Error::ElementOutOfRange {
                    element: p,
                    size: self.size,
                });
            }
            if seen[p] {
                return Err(Error::NotInjective {
                    first: 0,
                    second: 0,
                    image: p,
                });
            }
            seen[p] = true;
        }
        let mut out = Structure::new(self.sig.clone(), self.size);
        for (name, set) in &self.rels {
            for tuple in set {
                let mapped: Vec<usize> = tuple.iter().map(|&e| perm[e]).collect();
                out.add_tuple(name, &mapped)?;
            }
        }
        Ok(out)
    }

    /// Merges two structures on the same domain with disjoint signatures into
    /// one structure over the union signature.
    pub fn merge(&self, other: &Structure) -> Result<Structure, Error> {
        if self.size != other.size {
            return Err(Error::SignatureMismatch {
                context: format!(
                    "cannot merge structures of sizes {} and {}",
                    self.size, other.size
                ),
            });
        }
        let sig = self.sig.union(&other.sig)?;
        let mut out = Structure::new(sig, self.size);
        for (name, set) in self.rels.iter().chain(other.rels.iter()) {
            for tuple in set {
                out.add_tuple(name, tuple)?;
            }
        }
        Ok(out)
    }

    /// Expands the structure by an additional relation under a fresh name.
    pub fn expanded(
        &self,
        name: &str,
        arity: usize,
        tuples: impl IntoIterator<Item = Vec<usize>>,
    ) -> Result<Structure, Error> {
        let sig = self.sig.extended(name, arity)?;
        let mut out = Structure {
            sig,
            size: self.size,
            rels: self.rels.clone(),
        };
        out.rels.insert(name.to_string(), BTreeSet::new());
        for tuple in tuples {
            out.add_tuple(name, &tuple)?;
        }
        Ok(out)
    }
}

/// Checks that `map` (of length `F.size`) preserves every relation of `from`
/// into `to`: related tuples map to related tuples. Preservation only — no
/// injectivity, no reflection.
pub fn is_homomorphism(map: &[usize], from: &Structure, to: &Structure) -> Result<bool, Error> {
    if from.sig() != to.sig() {
        return Err(Error::SignatureMismatch {
            context: "homomorphism endpoints".to_string(),
        });
    }
    if map.len() != from.size() {
        return Err(Error::IncompleteMap {
            expected: from.size(),
            got: map.len(),
        });
    }
    for &v in map {
        if v >= to.size() {
            return Err(Error::ElementOutOfRange {
                element: v,
                size: to.size(),
            });
        }
    }
    for sym in from.sig().symbols() {
        for tuple in from.tuples(sym.name())? {
            let image: Vec<usize> = tuple.iter().map(|&e| map[e]).collect();
            if !to.has_tuple(sym.name(), &image) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

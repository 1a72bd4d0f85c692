//! Embeddings between structures and their enumeration.
//!
//! An embedding is an injective map that preserves *and* reflects every
//! relation. Enumeration is a backtracking search over partial injective
//! maps with forward checking on relation tuples; candidates are tried in
//! ascending target order, so the output is sorted lexicographically by the
//! map vector and is deterministic across runs.

use std::sync::Arc;

use crate::error::Error;
use crate::structure::Structure;

/// An embedding of `source` into `target`.
///
/// Holds shared handles to both endpoints so that an enumerated batch of
/// embeddings stays cheap to clone and to move across threads.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Embedding {
    source: Arc<Structure>,
    target: Arc<Structure>,
    map: Vec<usize>,
}

impl Embedding {
    /// Validates that `map` is an embedding of `source` into `target`:
    /// total, injective, and relation-reflecting in both directions.
    pub fn new(source: &Structure, target: &Structure, map: Vec<usize>) -> Result<Embedding, Error> {
        Embedding::with_arcs(Arc::new(source.clone()), Arc::new(target.clone()), map)
    }

    pub(crate) fn with_arcs(
        source: Arc<Structure>,
        target: Arc<Structure>,
        map: Vec<usize>,
    ) -> Result<Embedding, Error> {
        if source.sig() != target.sig() {
            return Err(Error::SignatureMismatch {
                context: "embedding endpoints".to_string(),
            });
        }
        if map.len() != source.size() {
            return Err(Error::IncompleteMap {
                expected: source.size(),
                got: map.len(),
            });
        }
        for (i, &v) in map.iter().enumerate() {
            if v >= target.size() {
                return Err(Error::ElementOutOfRange {
                    element: v,
                    size: target.size(),
                });
            }
            for (j, &w) in map.iter().enumerate().take(i) {
                if v == w {
                    return Err(Error::NotInjective {
                        first: j,
                        second: i,
                        image: v,
                    });
                }
            }
        }
        // Relation reflection, both directions, over all source tuples.
        for sym in source.sig().symbols() {
            if source.size() == 0 {
                break;
            }
            let arity = sym.arity();
            let mut tuple = vec![0usize; arity];
            loop {
                let image: Vec<usize> = tuple.iter().map(|&e| map[e]).collect();
                let in_source = source.has_tuple(sym.name(), &tuple);
                let in_target = target.has_tuple(sym.name(), &image);
                if in_source != in_target {
                    return Err(Error::NotAnEmbedding {
                        detail: format!(
                            "tuple {:?} of {:?} is {} in the source but its image {:?} is {} in the target",
                            tuple,
                            sym.name(),
                            if in_source { "present" } else { "absent" },
                            image,
                            if in_target { "present" } else { "absent" },
                        ),
                    });
                }
                if !advance(&mut tuple, source.size()) {
                    break;
                }
            }
        }
        Ok(Embedding { source, target, map })
    }

    /// The identity embedding of a structure into itself.
    pub fn identity(s: &Structure) -> Embedding {
        let arc = Arc::new(s.clone());
        Embedding {
            source: arc.clone(),
            target: arc,
            map: (0..s.size()).collect(),
        }
    }

    pub fn source(&self) -> &Structure {
        &self.source
    }

    pub fn target(&self) -> &Structure {
        &self.target
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn apply(&self, element: usize) -> Result<usize, Error> {
        self.map
            .get(element)
            .copied()
            .ok_or(Error::ElementOutOfRange {
                element,
                size: self.source.size(),
            })
    }

    /// The image of the source domain, sorted ascending.
    pub fn image(&self) -> Vec<usize> {
        let mut img = self.map.clone();
        img.sort_unstable();
        img
    }

    /// Composition `other ∘ self`: first apply `self: A → B`, then
    /// `other: B → C`. Errors when the middle structures differ.
    pub fn then(&self, other: &Embedding) -> Result<Embedding, Error> {
        if self.target() != other.source() {
            return Err(Error::SignatureMismatch {
                context: "embedding composition endpoints".to_string(),
            });
        }
        let map: Vec<usize> = self.map.iter().map(|&v| other.map[v]).collect();
        Embedding::with_arcs(self.source.clone(), other.target.clone(), map)
    }
}

fn advance(tuple: &mut [usize], base: usize) -> bool {
    if base == 0 {
        return false;
    }
    for slot in tuple.iter_mut().rev() {
        *slot += 1;
        if *slot < base {
            return true;
        }
        *slot = 0;
    }
    false
}

/// Enumerates all embeddings of `a` into `c`, sorted lexicographically by
/// the map vector. The two structures must share their signature.
pub fn enumerate_embeddings(a: &Structure, c: &Structure) -> Result<Vec<Embedding>, Error> {
    if a.sig() != c.sig() {
        return Err(Error::SignatureMismatch {
            context: "embedding enumeration endpoints".to_string(),
        });
    }
    let source = Arc::new(a.clone());
    let target = Arc::new(c.clone());
    let mut out = Vec::new();
    let mut map = vec![usize::MAX; a.size()];
    let mut used = vec![false; c.size()];
    extend(a, c, &mut map, &mut used, 0, &mut |m| {
        out.push(
            Embedding::with_arcs(source.clone(), target.clone(), m.to_vec())
                .expect("search only yields valid embeddings"),
        );
    });
    Ok(out)
}

/// Number of embeddings of `a` into `c`, without materializing them.
pub fn count_embeddings(a: &Structure, c: &Structure) -> Result<usize, Error> {
    if a.sig() != c.sig() {
        return Err(Error::SignatureMismatch {
            context: "embedding enumeration endpoints".to_string(),
        });
    }
    let mut count = 0usize;
    let mut map = vec![usize::MAX; a.size()];
    let mut used = vec![false; c.size()];
    extend(a, c, &mut map, &mut used, 0, &mut |_| count += 1);
    Ok(count)
}

fn extend(
    a: &Structure,
    c: &Structure,
    map: &mut Vec<usize>,
    used: &mut Vec<bool>,
    depth: usize,
    emit: &mut impl FnMut(&[usize]),
) {
    if depth == a.size() {
        emit(map);
        return;
    }
    for candidate in 0..c.size() {
        if used[candidate] {
            continue;
        }
        map[depth] = candidate;
        if consistent(a, c, map, depth) {
            used[candidate] = true;
            extend(a, c, map, used, depth + 1, emit);
            used[candidate] = false;
        }
        map[depth] = usize::MAX;
    }
}

/// Forward check: every tuple over the assigned prefix `{0..=depth}` that
/// mentions `depth` must be related in the source iff its image is related
/// in the target.
fn consistent(a: &Structure, c: &Structure, map: &[usize], depth: usize) -> bool {
    let assigned = depth + 1;
    for sym in a.sig().symbols() {
        let arity = sym.arity();
        let mut tuple = vec![0usize; arity];
        loop {
            if tuple.contains(&depth) {
                let image: Vec<usize> = tuple.iter().map(|&e| map[e]).collect();
                if a.has_tuple(sym.name(), &tuple) != c.has_tuple(sym.name(), &image) {
                    return false;
                }
            }
            if !advance(&mut tuple, assigned) {
                break;
            }
        }
    }
    true
}

/// All embeddings of `a` onto itself. Always contains the identity.
pub fn automorphisms(a: &Structure) -> Result<Vec<Embedding>, Error> {
    enumerate_embeddings(a, a)
}

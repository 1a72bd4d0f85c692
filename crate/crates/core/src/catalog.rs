//! Small gallery of standard structures used throughout tests and docs.
//!
//! Symbol names follow the built-in classes: linear orders use `<`, graphs
//! use `E`, tournaments use `A`, linearly extended posets use `prec`/`lt`.

use crate::error::Error;
use crate::structure::{Signature, Structure};

/// The n-chain: a strict linear order `0 < 1 < … < n−1` over `{</2}`.
pub fn chain(n: usize) -> Structure {
    chain_named(n, "<")
}

/// A chain under a custom order symbol.
pub fn chain_named(n: usize, symbol: &str) -> Structure {
    let mut s = Structure::new(Signature::binary(symbol).expect("valid symbol"), n);
    for i in 0..n {
        for j in (i + 1)..n {
            s.add_tuple(symbol, &[i, j]).expect("in range");
        }
    }
    s
}

/// The complete graph on n vertices over `{E/2}` (both edge directions).
pub fn complete_graph(n: usize) -> Structure {
    let mut s = Structure::new(Signature::binary("E").expect("valid symbol"), n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s.add_tuple("E", &[i, j]).expect("in range");
            }
        }
    }
    s
}

/// The edgeless graph on n vertices over `{E/2}`.
pub fn empty_graph(n: usize) -> Structure {
    Structure::new(Signature::binary("E").expect("valid symbol"), n)
}

/// The path 0 – 1 – … – n−1 over `{E/2}`.
pub fn path_graph(n: usize) -> Structure {
    let mut s = empty_graph(n);
    for i in 0..n.saturating_sub(1) {
        s.add_tuple("E", &[i, i + 1]).expect("in range");
        s.add_tuple("E", &[i + 1, i]).expect("in range");
    }
    s
}

/// A graph over `{E/2}` from undirected edge pairs.
pub fn graph(n: usize, edges: &[(usize, usize)]) -> Result<Structure, Error> {
    let mut s = empty_graph(n);
    for &(u, v) in edges {
        s.add_tuple("E", &[u, v])?;
        s.add_tuple("E", &[v, u])?;
    }
    Ok(s)
}

/// The transitive tournament on n vertices over `{A/2}`.
pub fn transitive_tournament(n: usize) -> Structure {
    let mut s = Structure::new(Signature::binary("A").expect("valid symbol"), n);
    for i in 0..n {
        for j in (i + 1)..n {
            s.add_tuple("A", &[i, j]).expect("in range");
        }
    }
    s
}

/// The ordered complete graph on n vertices over `{</2, E/2}`.
pub fn ordered_complete_graph(n: usize) -> Structure {
    chain(n).merge(&complete_graph(n)).expect("disjoint signatures")
}

/// An ordered graph over `{</2, E/2}`: the natural order plus given edges.
pub fn ordered_graph(n: usize, edges: &[(usize, usize)]) -> Result<Structure, Error> {
    chain(n).merge(&graph(n, edges)?)
}

/// A permutation structure over `{a.</2, b.</2}`: `a.<` is the natural
/// order, `b.<` orders the points by the given permutation pattern.
pub fn permutation_structure(pattern: &[usize]) -> Result<Structure, Error> {
    let n = pattern.len();
    let mut seen = vec![false; n];
    for &p in pattern {
        if p >= n {
            return Err(Error::ElementOutOfRange { element: p, size: n });
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
    let first = chain_named(n, "a.<");
    let mut second = Structure::new(Signature::binary("b.<").expect("valid symbol"), n);
    for i in 0..n {
        for j in 0..n {
            if pattern[i] < pattern[j] {
                second.add_tuple("b.<", &[i, j])?;
            }
        }
    }
    first.merge(&second)
}

/// A structure with no relations at all (empty signature).
pub fn pure_set(n: usize) -> Structure {
    Structure::new(Signature::empty(), n)
}

/// A linearly extended poset over `{prec/2, lt/2}`: `lt` is the natural
/// order, `prec` the transitive closure of the given covering pairs (which
/// must go upward).
pub fn poset_with_extension(n: usize, covers: &[(usize, usize)]) -> Result<Structure, Error> {
    let lt = chain_named(n, "lt");
    let mut prec = Structure::new(Signature::binary("prec").expect("valid symbol"), n);
    let mut adj = vec![vec![false; n]; n];
    for &(u, v) in covers {
        if u >= v {
            return Err(Error::Unsupported {
                message: format!("cover ({u}, {v}) does not go upward"),
            });
        }
        adj[u][v] = true;
    }
    // transitive closure
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if adj[i][k] && adj[k][j] {
                    adj[i][j] = true;
                }
            }
        }
    }
    for (i, row) in adj.iter().enumerate() {
        for (j, &related) in row.iter().enumerate() {
            if related {
                prec.add_tuple("prec", &[i, j])?;
            }
        }
    }
    prec.merge(&lt)
}

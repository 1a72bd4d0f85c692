//! Shared test oracles and generators.
//!
//! Everything here is deliberately written independently of the library's
//! search paths: isomorphism by trying every permutation, arrow verdicts by
//! trying every coloring, amalgam existence by scanning every member and
//! embedding pair. The tests compare the fast implementations against these.

#![allow(dead_code)]

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use ramseykit::classes::{BuiltinClass, ClassSpec};
use ramseykit::{
    catalog, enumerate_embeddings, ArrowInstance, Embedding, Signature, Structure,
};

// --- permutation brute force -------------------------------------------------

pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                rec(n, cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(n, &mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Isomorphism by brute force over all bijections.
pub fn brute_force_isomorphic(a: &Structure, b: &Structure) -> bool {
    if a.sig() != b.sig() || a.size() != b.size() {
        return false;
    }
    all_permutations(a.size())
        .into_iter()
        .any(|perm| &a.relabeled(&perm).expect("valid permutation") == b)
}

/// Embedding enumeration by brute force: every injective map checked for
/// relation reflection directly, without backtracking or pruning.
pub fn brute_force_embeddings(a: &Structure, c: &Structure) -> Vec<Vec<usize>> {
    fn injective_maps(n: usize, m: usize) -> Vec<Vec<usize>> {
        fn rec(m: usize, depth: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if depth == n {
                out.push(cur.clone());
                return;
            }
            for v in 0..m {
                if !cur.contains(&v) {
                    cur.push(v);
                    rec(m, depth + 1, n, cur, out);
                    cur.pop();
                }
            }
        }
        let mut out = Vec::new();
        rec(m, 0, n, &mut Vec::new(), &mut out);
        out
    }
    let mut found = Vec::new();
    'maps: for map in injective_maps(a.size(), c.size()) {
        for sym in a.sig().symbols() {
            // all tuples over the source domain, both directions
            let arity = sym.arity();
            let mut tuple = vec![0usize; arity];
            if a.size() == 0 {
                continue;
            }
            loop {
                let image: Vec<usize> = tuple.iter().map(|&e| map[e]).collect();
                if a.has_tuple(sym.name(), &tuple) != c.has_tuple(sym.name(), &image) {
                    continue 'maps;
                }
                let mut i = arity;
                let mut done = true;
                while i > 0 {
                    i -= 1;
                    tuple[i] += 1;
                    if tuple[i] < a.size() {
                        done = false;
                        break;
                    }
                    tuple[i] = 0;
                }
                if done {
                    break;
                }
            }
        }
        found.push(map);
    }
    found
}

// --- exhaustive arrow oracle --------------------------------------------------

/// Decides the arrow by enumerating every coloring and scanning every copy
/// of B directly. Exponential in |Emb(A,C)|; callers keep that below ~20.
pub fn exhaustive_arrow_oracle(instance: &ArrowInstance) -> bool {
    let emb_ac = enumerate_embeddings(instance.small(), instance.large()).unwrap();
    let emb_bc = enumerate_embeddings(instance.medium(), instance.large()).unwrap();
    let emb_ab = enumerate_embeddings(instance.small(), instance.medium()).unwrap();
    let r = instance.colors() as usize;
    let vars = emb_ac.len();
    let colorings = (r as f64).powi(vars as i32);
    assert!(colorings <= (1u64 << 25) as f64, "oracle instance too large");

    let index_of = |map: &[usize]| -> usize {
        emb_ac
            .iter()
            .position(|e| e.map() == map)
            .expect("composition is an embedding")
    };
    // precompute the composed index sets
    let sets: Vec<Vec<usize>> = emb_bc
        .iter()
        .map(|f| {
            emb_ab
                .iter()
                .map(|e| {
                    let composed: Vec<usize> = e.map().iter().map(|&v| f.map()[v]).collect();
                    index_of(&composed)
                })
                .collect()
        })
        .collect();

    if emb_bc.is_empty() {
        return false; // no copy of B: any coloring is bad
    }

    let total = (r as u64).pow(vars as u32);
    let mut coloring = vec![0usize; vars];
    for code in 0..total {
        let mut c = code;
        for slot in coloring.iter_mut() {
            *slot = (c % r as u64) as usize;
            c /= r as u64;
        }
        let has_mono = sets.iter().any(|set| {
            set.is_empty() || set.iter().all(|&i| coloring[i] == coloring[set[0]])
        });
        if !has_mono {
            return false; // found a bad coloring
        }
    }
    true
}

// --- naive amalgamation oracles ----------------------------------------------

/// Compatible embedding pair into a candidate amalgam, by direct scan.
fn amalgam_into(
    candidate: &Structure,
    d_left: &Structure,
    d_right: &Structure,
    e1: &[usize],
    e2: &[usize],
    strong: bool,
    base_size: usize,
) -> bool {
    let f1s = enumerate_embeddings(d_left, candidate).unwrap();
    let f2s = enumerate_embeddings(d_right, candidate).unwrap();
    for f1 in &f1s {
        for f2 in &f2s {
            let compatible = (0..base_size).all(|a| f1.map()[e1[a]] == f2.map()[e2[a]]);
            if !compatible {
                continue;
            }
            if strong {
                let img1: std::collections::BTreeSet<usize> = f1.map().iter().copied().collect();
                let img2: std::collections::BTreeSet<usize> = f2.map().iter().copied().collect();
                let glued: std::collections::BTreeSet<usize> =
                    (0..base_size).map(|a| f1.map()[e1[a]]).collect();
                let inter: std::collections::BTreeSet<usize> =
                    img1.intersection(&img2).copied().collect();
                if inter != glued {
                    continue;
                }
            }
            return true;
        }
    }
    false
}

/// Naive bounded amalgamation check: iterates every diagram (all members up
/// to the bound, every embedding pair, no orbit reduction) and scans all
/// members up to the size cap for an amalgam.
pub fn naive_amalgamation_check(class: &ClassSpec, max_size: usize, strong: bool) -> bool {
    let mut members: Vec<Structure> = Vec::new();
    for n in 0..=max_size {
        members.extend(class.enumerate_members(n));
    }
    // candidates per size, computed on demand
    let mut candidates: std::collections::BTreeMap<usize, Vec<Structure>> =
        std::collections::BTreeMap::new();

    for b1 in &members {
        for b2 in &members {
            for a in &members {
                if a.size() > b1.size().min(b2.size()) {
                    continue;
                }
                let e1s = enumerate_embeddings(a, b1).unwrap();
                let e2s = enumerate_embeddings(a, b2).unwrap();
                for e1 in &e1s {
                    for e2 in &e2s {
                        let cap = b1.size() + b2.size() - a.size();
                        let sizes: Vec<usize> = if strong {
                            vec![cap]
                        } else {
                            (b1.size().max(b2.size())..=cap).collect()
                        };
                        let mut found = false;
                        'sizes: for size in sizes {
                            let pool = candidates
                                .entry(size)
                                .or_insert_with(|| class.enumerate_members(size));
                            for candidate in pool.iter() {
                                if amalgam_into(
                                    candidate,
                                    b1,
                                    b2,
                                    e1.map(),
                                    e2.map(),
                                    strong,
                                    a.size(),
                                ) {
                                    found = true;
                                    break 'sizes;
                                }
                            }
                        }
                        if !found {
                            return false;
                        }
                    }
                }
            }
        }
    }
    true
}

// --- random generators ---------------------------------------------------------

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A uniformly random labelled member of the class, built constructively
/// per class kind.
pub fn random_member(class: &ClassSpec, n: usize, rng: &mut ChaCha8Rng) -> Structure {
    match class {
        ClassSpec::Builtin { kind, symbols } => random_builtin(kind, symbols, n, rng),
        ClassSpec::Wedge(left, right) => {
            let l = random_member(left, n, rng);
            let r = random_member(right, n, rng);
            l.merge(&r).expect("disjoint signatures")
        }
        ClassSpec::Forget(inner, _) => {
            let keep: std::collections::BTreeSet<String> =
                class.signature().names().map(String::from).collect();
            random_member(inner, n, rng).reduct(&keep).expect("kept symbols")
        }
    }
}

fn random_builtin(
    kind: &BuiltinClass,
    symbols: &[String],
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Structure {
    match kind {
        BuiltinClass::LinearOrder => {
            let mut rank: Vec<usize> = (0..n).collect();
            rank.shuffle(rng);
            order_from_rank(&symbols[0], &rank)
        }
        BuiltinClass::Graph => random_graph(&symbols[0], n, 0.5, rng),
        BuiltinClass::KnFree(k) => loop {
            let candidate = random_graph(&symbols[0], n, 0.3, rng);
            if !has_clique(&candidate, &symbols[0], *k) {
                return candidate;
            }
        },
        BuiltinClass::Tournament => {
            let sig = Signature::binary(symbols[0].clone()).unwrap();
            let mut s = Structure::new(sig, n);
            for a in 0..n {
                for b in (a + 1)..n {
                    let t = if rng.random_bool(0.5) { [a, b] } else { [b, a] };
                    s.add_tuple(&symbols[0], &t).unwrap();
                }
            }
            s
        }
        BuiltinClass::PosetLinExt => {
            let mut rank: Vec<usize> = (0..n).collect();
            rank.shuffle(rng);
            let lt = order_from_rank(&symbols[1], &rank);
            // prec: transitive closure of a random subset of lt
            let mut rel = vec![vec![false; n]; n];
            for a in 0..n {
                for b in 0..n {
                    if rank[a] < rank[b] && rng.random_bool(0.4) {
                        rel[a][b] = true;
                    }
                }
            }
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        if rel[i][k] && rel[k][j] {
                            rel[i][j] = true;
                        }
                    }
                }
            }
            let sig = Signature::binary(symbols[0].clone()).unwrap();
            let mut prec = Structure::new(sig, n);
            for (a, row) in rel.iter().enumerate() {
                for (b, &related) in row.iter().enumerate() {
                    if related {
                        prec.add_tuple(&symbols[0], &[a, b]).unwrap();
                    }
                }
            }
            prec.merge(&lt).expect("disjoint symbols")
        }
    }
}

fn order_from_rank(symbol: &str, rank: &[usize]) -> Structure {
    let n = rank.len();
    let sig = Signature::binary(symbol).unwrap();
    let mut s = Structure::new(sig, n);
    for a in 0..n {
        for b in 0..n {
            if rank[a] < rank[b] {
                s.add_tuple(symbol, &[a, b]).unwrap();
            }
        }
    }
    s
}

fn random_graph(symbol: &str, n: usize, p: f64, rng: &mut ChaCha8Rng) -> Structure {
    let sig = Signature::binary(symbol).unwrap();
    let mut s = Structure::new(sig, n);
    for a in 0..n {
        for b in (a + 1)..n {
            if rng.random_bool(p) {
                s.add_tuple(symbol, &[a, b]).unwrap();
                s.add_tuple(symbol, &[b, a]).unwrap();
            }
        }
    }
    s
}

pub fn has_clique(s: &Structure, symbol: &str, k: usize) -> bool {
    fn rec(s: &Structure, sym: &str, k: usize, start: usize, chosen: &mut Vec<usize>) -> bool {
        if chosen.len() == k {
            return true;
        }
        for v in start..s.size() {
            if chosen.iter().all(|&u| s.has_tuple(sym, &[u, v])) {
                chosen.push(v);
                if rec(s, sym, k, v + 1, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    rec(s, symbol, k, 0, &mut Vec::new())
}

/// A random (F, h, M) triple: M a class member, h an arbitrary map into it,
/// F carrying a random subset of the pullback relations so that h is a
/// homomorphism by construction. M having injective relations makes F's
/// relations injective too.
pub fn random_homomorphism_triple(
    class: &ClassSpec,
    target_size: usize,
    source_size: usize,
    rng: &mut ChaCha8Rng,
) -> (Structure, Vec<usize>, Structure) {
    let target = random_member(class, target_size, rng);
    let map: Vec<usize> = (0..source_size)
        .map(|_| rng.random_range(0..target_size))
        .collect();
    let mut source = Structure::new(target.sig().clone(), source_size);
    for sym in target.sig().symbols() {
        for a in 0..source_size {
            for b in 0..source_size {
                if target.has_tuple(sym.name(), &[map[a], map[b]]) && rng.random_bool(0.5) {
                    source.add_tuple(sym.name(), &[a, b]).unwrap();
                }
            }
        }
    }
    (source, map, target)
}

// --- assorted fixtures ---------------------------------------------------------

pub fn ordered_complete(n: usize) -> Structure {
    catalog::ordered_complete_graph(n)
}

pub fn chain_instance(a: usize, b: usize, c: usize, r: u32) -> ArrowInstance {
    ArrowInstance::new(catalog::chain(a), catalog::chain(b), catalog::chain(c), r).unwrap()
}

pub fn identity_embedding(s: &Structure) -> Embedding {
    Embedding::identity(s)
}

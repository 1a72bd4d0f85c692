//! Decidable hereditary-class specifications.
//!
//! A [`ClassSpec`] denotes a class of finite structures, closed under
//! isomorphism and induced substructures, with a decidable membership
//! predicate: the built-in classes (linear orders, graphs, tournaments,
//! K_n-free graphs, linearly extended posets), the wedge of two classes with
//! disjoint signatures (membership of both reducts), and the forget
//! combinator (some expansion of the dropped symbols is a member).

use std::collections::BTreeSet;

use crate::canon::{canonical_form, canonical_representative, CanonicalForm};
use crate::catalog;
use crate::error::Error;
use crate::structure::{valid_symbol_name, Signature, Structure};

/// The built-in class kinds. Each fixes the arities and the membership
/// semantics; the symbol *names* live on the [`ClassSpec`] node so that
/// renaming works uniformly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BuiltinClass {
    /// Strict linear orders; canonical symbol `<`.
    LinearOrder,
    /// Symmetric irreflexive graphs; canonical symbol `E`.
    Graph,
    /// Tournaments (irreflexive, exactly one direction per pair); canonical
    /// symbol `A`.
    Tournament,
    /// K_n-free graphs, n >= 3; canonical symbol `E`.
    KnFree(usize),
    /// Posets with a linear extension; canonical symbols `prec`, `lt`.
    PosetLinExt,
}

impl BuiltinClass {
    fn canonical_symbols(&self) -> Vec<&'static str> {
        match self {
            BuiltinClass::LinearOrder => vec!["<"],
            BuiltinClass::Graph | BuiltinClass::KnFree(_) => vec!["E"],
            BuiltinClass::Tournament => vec!["A"],
            BuiltinClass::PosetLinExt => vec!["prec", "lt"],
        }
    }
}

/// A hereditary-class specification with a derived signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClassSpec {
    /// A built-in class; `symbols` names its relations, in the kind's
    /// canonical role order (`prec` before `lt` for poset extensions).
    Builtin {
        kind: BuiltinClass,
        symbols: Vec<String>,
    },
    /// Structures over the disjoint union signature whose reducts lie in the
    /// respective classes.
    Wedge(Box<ClassSpec>, Box<ClassSpec>),
    /// Structures with *some* expansion of the dropped symbols inside the
    /// inner class.
    Forget(Box<ClassSpec>, BTreeSet<String>),
}

impl ClassSpec {
    /// A built-in class under its canonical symbol names.
    pub fn builtin(kind: BuiltinClass) -> Result<ClassSpec, Error> {
        if let BuiltinClass::KnFree(n) = kind {
            if n < 3 {
                return Err(Error::InvalidClassParameter {
                    message: format!(
                        "KnFree requires n >= 3 (K{n}-free graphs would all be edgeless)"
                    ),
                });
            }
        }
        let symbols = kind.canonical_symbols().iter().map(|s| s.to_string()).collect();
        Ok(ClassSpec::Builtin { kind, symbols })
    }

    pub fn linear_order() -> ClassSpec {
        ClassSpec::builtin(BuiltinClass::LinearOrder).expect("no parameter")
    }

    pub fn graph() -> ClassSpec {
        ClassSpec::builtin(BuiltinClass::Graph).expect("no parameter")
    }

    pub fn tournament() -> ClassSpec {
        ClassSpec::builtin(BuiltinClass::Tournament).expect("no parameter")
    }

    pub fn kn_free(n: usize) -> Result<ClassSpec, Error> {
        ClassSpec::builtin(BuiltinClass::KnFree(n))
    }

    pub fn poset_lin_ext() -> ClassSpec {
        ClassSpec::builtin(BuiltinClass::PosetLinExt).expect("no parameter")
    }

    /// The permutation class: two linear orders, symbols `a.<` and `b.<`.
    pub fn permutations() -> ClassSpec {
        ClassSpec::linear_order()
            .renamed("a")
            .expect("valid prefix")
            .wedge(ClassSpec::linear_order().renamed("b").expect("valid prefix"))
            .expect("disjoint signatures")
    }

    /// The derived signature of the class.
    pub fn signature(&self) -> Signature {
        match self {
            ClassSpec::Builtin { symbols, .. } => {
                Signature::new(symbols.iter().map(|s| (s.clone(), 2)))
                    .expect("builtin symbols are valid and distinct")
            }
            ClassSpec::Wedge(left, right) => left
                .signature()
                .union(&right.signature())
                .expect("wedge signatures are disjoint by construction"),
            ClassSpec::Forget(inner, dropped) => {
                let keep: BTreeSet<String> = inner
                    .signature()
                    .names()
                    .filter(|n| !dropped.contains(*n))
                    .map(String::from)
                    .collect();
                inner
                    .signature()
                    .restricted(&keep)
                    .expect("kept symbols come from the inner signature")
            }
        }
    }

    /// Wedge combinator: requires disjoint signatures (rename first when
    /// they clash).
    pub fn wedge(self, other: ClassSpec) -> Result<ClassSpec, Error> {
        let left_sig = self.signature();
        let right_sig = other.signature();
        for name in right_sig.names() {
            if left_sig.contains(name) {
                return Err(Error::OverlappingSignatures {
                    name: name.to_string(),
                });
            }
        }
        Ok(ClassSpec::Wedge(Box::new(self), Box::new(other)))
    }

    /// Renames every symbol `s` of this class spec to `prefix.s`. Membership
    /// semantics are unchanged up to the renaming.
    pub fn renamed(self, prefix: &str) -> Result<ClassSpec, Error> {
        if !valid_symbol_name(prefix) {
            return Err(Error::InvalidPrefix {
                prefix: prefix.to_string(),
            });
        }
        let renamed = self.rename_tree(prefix);
        // prefixing is injective on names, so the check is belt-and-braces
        let sig = renamed.signature();
        let mut seen = BTreeSet::new();
        for name in sig.names() {
            if !seen.insert(name.to_string()) {
                return Err(Error::NameCollision {
                    name: name.to_string(),
                });
            }
        }
        Ok(renamed)
    }

    fn rename_tree(self, prefix: &str) -> ClassSpec {
        match self {
            ClassSpec::Builtin { kind, symbols } => ClassSpec::Builtin {
                kind,
                symbols: symbols.into_iter().map(|s| format!("{prefix}.{s}")).collect(),
            },
            ClassSpec::Wedge(l, r) => ClassSpec::Wedge(
                Box::new(l.rename_tree(prefix)),
                Box::new(r.rename_tree(prefix)),
            ),
            ClassSpec::Forget(inner, dropped) => ClassSpec::Forget(
                Box::new(inner.rename_tree(prefix)),
                dropped.into_iter().map(|s| format!("{prefix}.{s}")).collect(),
            ),
        }
    }

    /// Forget combinator: drops the named symbols; membership asks for some
    /// expansion of them inside `self`.
    pub fn forget(self, dropped: BTreeSet<String>) -> Result<ClassSpec, Error> {
        let sig = self.signature();
        for name in &dropped {
            if !sig.contains(name) {
                return Err(Error::UnknownSymbol { name: name.clone() });
            }
        }
        Ok(ClassSpec::Forget(Box::new(self), dropped))
    }

    /// Decides membership of a structure whose signature equals the class
    /// signature.
    pub fn membership(&self, s: &Structure) -> Result<bool, Error> {
        if *s.sig() != self.signature() {
            return Err(Error::SignatureMismatch {
                context: "class membership".to_string(),
            });
        }
        self.membership_unchecked(s)
    }

    fn membership_unchecked(&self, s: &Structure) -> Result<bool, Error> {
        match self {
            ClassSpec::Builtin { kind, symbols } => builtin_membership(kind, symbols, s),
            ClassSpec::Wedge(left, right) => {
                let left_names: BTreeSet<String> =
                    left.signature().names().map(String::from).collect();
                let right_names: BTreeSet<String> =
                    right.signature().names().map(String::from).collect();
                Ok(left.membership_unchecked(&s.reduct(&left_names)?)?
                    && right.membership_unchecked(&s.reduct(&right_names)?)?)
            }
            ClassSpec::Forget(inner, dropped) => forget_membership(inner, dropped, s),
        }
    }

    /// Membership of the substructure induced on `elems`, decided in place
    /// (no substructure is materialized). The builtin predicates quantify
    /// over `elems` directly and read only their own symbols, so extra
    /// symbols on `s` are harmless. Forget classes fall back to building
    /// the substructure.
    pub(crate) fn membership_on_subset(
        &self,
        s: &Structure,
        elems: &[usize],
    ) -> Result<bool, Error> {
        match self {
            ClassSpec::Builtin { kind, symbols } => {
                builtin_membership_on(kind, symbols, s, elems)
            }
            ClassSpec::Wedge(left, right) => Ok(left.membership_on_subset(s, elems)?
                && right.membership_on_subset(s, elems)?),
            ClassSpec::Forget(..) => {
                let subset: BTreeSet<usize> = elems.iter().copied().collect();
                let (induced, _) = s.substructure(&subset)?;
                let keep: BTreeSet<String> = self.signature().names().map(String::from).collect();
                self.membership_unchecked(&induced.reduct(&keep)?)
            }
        }
    }

    /// Incremental prune for the amalgam completion search: checks only the
    /// constraints that become final once all tuples over the pair `(u, v)`
    /// are decided, with third points ranging over `decided`. For the
    /// built-in predicates (which quantify over pairs and triples) checking
    /// every pair at its own cell adds up to full membership; Forget classes
    /// have no such decomposition and fall back to the subset check.
    pub(crate) fn cell_check(
        &self,
        s: &Structure,
        u: usize,
        v: usize,
        decided: &[usize],
    ) -> Result<bool, Error> {
        match self {
            ClassSpec::Builtin { kind, symbols } => {
                Ok(builtin_cell_check(kind, symbols, s, u, v, decided))
            }
            ClassSpec::Wedge(left, right) => {
                Ok(left.cell_check(s, u, v, decided)? && right.cell_check(s, u, v, decided)?)
            }
            ClassSpec::Forget(..) => self.membership_on_subset(s, decided),
        }
    }

    /// All members of size `n`, one canonical representative per isomorphism
    /// class, sorted by canonical form. Deterministic.
    pub fn enumerate_members(&self, n: usize) -> Vec<Structure> {
        let mut seen: BTreeSet<CanonicalForm> = BTreeSet::new();
        let mut out: Vec<(CanonicalForm, Structure)> = Vec::new();
        for labeled in self.labeled_generators(n) {
            let code = canonical_form(&labeled);
            if seen.insert(code.clone()) {
                out.push((code, canonical_representative(&labeled)));
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out.into_iter().map(|(_, s)| s).collect()
    }

    /// A complete set of labelled candidates: every isomorphism class of a
    /// member of size `n` is represented at least once, and everything
    /// produced is a member. Not every labelling appears — the left factor
    /// of a wedge is pinned to canonical representatives, which is enough
    /// because any member can be relabelled so its left reduct is canonical.
    fn labeled_generators(&self, n: usize) -> Vec<Structure> {
        match self {
            ClassSpec::Builtin { kind, symbols } => {
                builtin_labeled(kind, symbols, n, Labelings::Seed)
            }
            ClassSpec::Wedge(left, right) => {
                let lefts = left.enumerate_members(n);
                // the right factor must range over every labelling so that
                // the relabelling pinning the left reduct stays covered
                let rights = right.all_labeled_members(n);
                let mut out = Vec::with_capacity(lefts.len() * rights.len());
                for l in &lefts {
                    for r in &rights {
                        out.push(l.merge(r).expect("disjoint signatures"));
                    }
                }
                out
            }
            ClassSpec::Forget(inner, _) => {
                let keep: BTreeSet<String> = self.signature().names().map(String::from).collect();
                let mut seen = std::collections::HashSet::new();
                let mut out = Vec::new();
                for m in inner.labeled_generators(n) {
                    let r = m.reduct(&keep).expect("kept symbols exist");
                    if seen.insert(r.clone()) {
                        out.push(r);
                    }
                }
                out
            }
        }
    }

    /// Every labelled member of size `n`.
    fn all_labeled_members(&self, n: usize) -> Vec<Structure> {
        match self {
            ClassSpec::Builtin { kind, symbols } => {
                builtin_labeled(kind, symbols, n, Labelings::All)
            }
            ClassSpec::Wedge(left, right) => {
                let lefts = left.all_labeled_members(n);
                let rights = right.all_labeled_members(n);
                let mut out = Vec::with_capacity(lefts.len() * rights.len());
                for l in &lefts {
                    for r in &rights {
                        out.push(l.merge(r).expect("disjoint signatures"));
                    }
                }
                out
            }
            ClassSpec::Forget(inner, _) => {
                let keep: BTreeSet<String> = self.signature().names().map(String::from).collect();
                let mut seen = std::collections::HashSet::new();
                let mut out = Vec::new();
                for m in inner.all_labeled_members(n) {
                    let r = m.reduct(&keep).expect("kept symbols exist");
                    if seen.insert(r.clone()) {
                        out.push(r);
                    }
                }
                out
            }
        }
    }
}

/// Whether a builtin generator may restrict itself to one labelling per
/// class where that is cheap (`Seed`), or must produce every labelling
/// (`All`).
#[derive(Clone, Copy, PartialEq, Eq)]
enum Labelings {
    Seed,
    All,
}

fn builtin_membership(kind: &BuiltinClass, symbols: &[String], s: &Structure) -> Result<bool, Error> {
    match kind {
        BuiltinClass::LinearOrder => is_strict_linear_order_on(s, &symbols[0]),
        BuiltinClass::Graph => is_graph(s, &symbols[0]),
        BuiltinClass::Tournament => {
            let sym = &symbols[0];
            let n = s.size();
            for a in 0..n {
                if s.has_tuple(sym, &[a, a]) {
                    return Ok(false);
                }
                for b in (a + 1)..n {
                    let fwd = s.has_tuple(sym, &[a, b]);
                    let bwd = s.has_tuple(sym, &[b, a]);
                    if fwd == bwd {
                        return Ok(false); // needs exactly one direction
                    }
                }
            }
            Ok(true)
        }
        BuiltinClass::KnFree(k) => {
            if !is_graph(s, &symbols[0])? {
                return Ok(false);
            }
            Ok(!has_clique(s, &symbols[0], *k))
        }
        BuiltinClass::PosetLinExt => {
            let prec = &symbols[0];
            let lt = &symbols[1];
            if !is_strict_linear_order_on(s, lt)? {
                return Ok(false);
            }
            let n = s.size();
            // prec: strict partial order contained in lt
            for a in 0..n {
                if s.has_tuple(prec, &[a, a]) {
                    return Ok(false);
                }
                for b in 0..n {
                    if s.has_tuple(prec, &[a, b]) && !s.has_tuple(lt, &[a, b]) {
                        return Ok(false);
                    }
                    for c in 0..n {
                        if s.has_tuple(prec, &[a, b])
                            && s.has_tuple(prec, &[b, c])
                            && !s.has_tuple(prec, &[a, c])
                        {
                            return Ok(false);
                        }
                    }
                }
            }
            Ok(true)
        }
    }
}

/// The builtin predicates with all quantifiers restricted to `elems`.
fn builtin_membership_on(
    kind: &BuiltinClass,
    symbols: &[String],
    s: &Structure,
    elems: &[usize],
) -> Result<bool, Error> {
    match kind {
        BuiltinClass::LinearOrder => Ok(slo_on(s, &symbols[0], elems)),
        BuiltinClass::Graph => Ok(graph_on(s, &symbols[0], elems)),
        BuiltinClass::Tournament => {
            let sym = &symbols[0];
            for &a in elems {
                if s.has_tuple(sym, &[a, a]) {
                    return Ok(false);
                }
                for &b in elems {
                    if a < b && s.has_tuple(sym, &[a, b]) == s.has_tuple(sym, &[b, a]) {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
        BuiltinClass::KnFree(k) => {
            Ok(graph_on(s, &symbols[0], elems) && !has_clique_within(s, &symbols[0], *k, elems))
        }
        BuiltinClass::PosetLinExt => {
            let prec = &symbols[0];
            let lt = &symbols[1];
            if !slo_on(s, lt, elems) {
                return Ok(false);
            }
            for &a in elems {
                if s.has_tuple(prec, &[a, a]) {
                    return Ok(false);
                }
                for &b in elems {
                    if s.has_tuple(prec, &[a, b]) && !s.has_tuple(lt, &[a, b]) {
                        return Ok(false);
                    }
                    for &c in elems {
                        if s.has_tuple(prec, &[a, b])
                            && s.has_tuple(prec, &[b, c])
                            && !s.has_tuple(prec, &[a, c])
                        {
                            return Ok(false);
                        }
                    }
                }
            }
            Ok(true)
        }
    }
}

/// The constraints of a builtin predicate that mention both `u` and `v`,
/// with remaining positions over `decided`.
fn builtin_cell_check(
    kind: &BuiltinClass,
    symbols: &[String],
    s: &Structure,
    u: usize,
    v: usize,
    decided: &[usize],
) -> bool {
    match kind {
        BuiltinClass::LinearOrder => slo_cell(s, &symbols[0], u, v, decided),
        BuiltinClass::Graph => s.has_tuple(&symbols[0], &[u, v]) == s.has_tuple(&symbols[0], &[v, u]),
        BuiltinClass::Tournament => {
            s.has_tuple(&symbols[0], &[u, v]) != s.has_tuple(&symbols[0], &[v, u])
        }
        BuiltinClass::KnFree(k) => {
            let sym = &symbols[0];
            if s.has_tuple(sym, &[u, v]) != s.has_tuple(sym, &[v, u]) {
                return false;
            }
            if !s.has_tuple(sym, &[u, v]) {
                return true;
            }
            // a clique through the new edge needs k−2 common neighbors
            let common: Vec<usize> = decided
                .iter()
                .copied()
                .filter(|&w| {
                    w != u && w != v && s.has_tuple(sym, &[u, w]) && s.has_tuple(sym, &[v, w])
                })
                .collect();
            !has_clique_within(s, sym, k.saturating_sub(2), &common)
        }
        BuiltinClass::PosetLinExt => {
            let prec = &symbols[0];
            let lt = &symbols[1];
            if !slo_cell(s, lt, u, v, decided) {
                return false;
            }
            for (a, b) in [(u, v), (v, u)] {
                if s.has_tuple(prec, &[a, b]) && !s.has_tuple(lt, &[a, b]) {
                    return false;
                }
            }
            transitive_through_pair(s, prec, u, v, decided)
        }
    }
}

/// Strict-linear-order constraints localized to the pair (u, v): totality
/// of the pair, plus every transitivity instance that involves both points.
fn slo_cell(s: &Structure, sym: &str, u: usize, v: usize, decided: &[usize]) -> bool {
    if !s.has_tuple(sym, &[u, v]) && !s.has_tuple(sym, &[v, u]) {
        return false;
    }
    transitive_through_pair(s, sym, u, v, decided)
}

/// Checks every transitivity instance (a,b,c) whose support contains both
/// `u` and `v`, with the third point (if any) drawn from `decided`.
fn transitive_through_pair(s: &Structure, sym: &str, u: usize, v: usize, decided: &[usize]) -> bool {
    let check = |a: usize, b: usize, c: usize| -> bool {
        !(s.has_tuple(sym, &[a, b]) && s.has_tuple(sym, &[b, c]) && !s.has_tuple(sym, &[a, c]))
    };
    for &w in decided {
        // all triples over {u, v, w} that use both u and v
        for (a, b, c) in [
            (u, v, w),
            (u, w, v),
            (w, u, v),
            (v, u, w),
            (v, w, u),
            (w, v, u),
        ] {
            if !check(a, b, c) {
                return false;
            }
        }
    }
    // degenerate triples over {u, v} alone (antisymmetry via irreflexivity)
    for (a, b, c) in [(u, v, u), (v, u, v)] {
        if !check(a, b, c) {
            return false;
        }
    }
    true
}

fn slo_on(s: &Structure, sym: &str, elems: &[usize]) -> bool {
    for &a in elems {
        if s.has_tuple(sym, &[a, a]) {
            return false;
        }
        for &b in elems {
            if a != b && !s.has_tuple(sym, &[a, b]) && !s.has_tuple(sym, &[b, a]) {
                return false;
            }
            for &c in elems {
                if s.has_tuple(sym, &[a, b]) && s.has_tuple(sym, &[b, c]) && !s.has_tuple(sym, &[a, c])
                {
                    return false;
                }
            }
        }
    }
    true
}

fn graph_on(s: &Structure, sym: &str, elems: &[usize]) -> bool {
    for &a in elems {
        if s.has_tuple(sym, &[a, a]) {
            return false;
        }
        for &b in elems {
            if s.has_tuple(sym, &[a, b]) != s.has_tuple(sym, &[b, a]) {
                return false;
            }
        }
    }
    true
}

fn has_clique_within(s: &Structure, sym: &str, k: usize, elems: &[usize]) -> bool {
    fn rec(s: &Structure, sym: &str, k: usize, elems: &[usize], start: usize, chosen: &mut Vec<usize>) -> bool {
        if chosen.len() == k {
            return true;
        }
        for idx in start..elems.len() {
            let v = elems[idx];
            if chosen.iter().all(|&u| s.has_tuple(sym, &[u, v])) {
                chosen.push(v);
                if rec(s, sym, k, elems, idx + 1, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    if k > elems.len() {
        return false;
    }
    let mut chosen = Vec::with_capacity(k);
    rec(s, sym, k, elems, 0, &mut chosen)
}

fn is_strict_linear_order_on(s: &Structure, sym: &str) -> Result<bool, Error> {
    crate::formula::is_strict_linear_order(s, sym)
}

fn is_graph(s: &Structure, sym: &str) -> Result<bool, Error> {
    let n = s.size();
    for a in 0..n {
        if s.has_tuple(sym, &[a, a]) {
            return Ok(false);
        }
        for b in 0..n {
            if s.has_tuple(sym, &[a, b]) != s.has_tuple(sym, &[b, a]) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn has_clique(s: &Structure, sym: &str, k: usize) -> bool {
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
    if k > s.size() {
        return false;
    }
    let mut chosen = Vec::with_capacity(k);
    rec(s, sym, k, 0, &mut chosen)
}

/// Forget membership: exhaustive search over interpretations of the dropped
/// symbols. A symbol that names the order of a plain linear-order leaf only
/// ranges over the n! strict linear orders; anything else ranges over all
/// 2^(n^arity) relations, which is why this is a small-size tool.
fn forget_membership(
    inner: &ClassSpec,
    dropped: &BTreeSet<String>,
    s: &Structure,
) -> Result<bool, Error> {
    let inner_sig = inner.signature();
    let dropped_list: Vec<String> = dropped.iter().cloned().collect();
    let mut assignment: Vec<Vec<Vec<usize>>> = Vec::with_capacity(dropped_list.len());
    search_expansions(inner, &inner_sig, &dropped_list, 0, s, &mut assignment)
}

fn search_expansions(
    inner: &ClassSpec,
    inner_sig: &Signature,
    dropped: &[String],
    idx: usize,
    s: &Structure,
    chosen: &mut Vec<Vec<Vec<usize>>>,
) -> Result<bool, Error> {
    if idx == dropped.len() {
        // assemble the expansion over the inner signature
        let mut expanded = Structure::new(inner_sig.clone(), s.size());
        for sym in s.sig().symbols() {
            for tuple in s.tuples(sym.name())? {
                expanded.add_tuple(sym.name(), tuple)?;
            }
        }
        for (name, tuples) in dropped.iter().zip(chosen.iter()) {
            for tuple in tuples {
                expanded.add_tuple(name, tuple)?;
            }
        }
        return inner.membership_unchecked(&expanded);
    }
    let name = &dropped[idx];
    let arity = inner_sig.arity_of(name).ok_or_else(|| Error::UnknownSymbol {
        name: name.clone(),
    })?;
    for candidate in candidate_relations(inner, name, arity, s.size()) {
        chosen.push(candidate);
        if search_expansions(inner, inner_sig, dropped, idx + 1, s, chosen)? {
            chosen.pop();
            return Ok(true);
        }
        chosen.pop();
    }
    Ok(false)
}

/// Candidate interpretations for one dropped symbol.
fn candidate_relations(
    inner: &ClassSpec,
    name: &str,
    arity: usize,
    n: usize,
) -> Vec<Vec<Vec<usize>>> {
    if symbol_is_linear_order_leaf(inner, name) {
        // only the n! strict linear orders can ever satisfy the leaf
        return permutations(n)
            .into_iter()
            .map(|rank| {
                let mut tuples = Vec::new();
                for a in 0..n {
                    for b in 0..n {
                        if rank[a] < rank[b] {
                            tuples.push(vec![a, b]);
                        }
                    }
                }
                tuples
            })
            .collect();
    }
    // all subsets of n^arity tuples
    let all_tuples = all_tuples_over(n, arity);
    let count = all_tuples.len();
    (0..(1usize << count))
        .map(|mask| {
            all_tuples
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, t)| t.clone())
                .collect()
        })
        .collect()
}

pub(crate) fn all_tuples_over(n: usize, arity: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut tuple = vec![0usize; arity];
    'outer: loop {
        out.push(tuple.clone());
        let mut i = arity;
        loop {
            if i == 0 {
                break 'outer;
            }
            i -= 1;
            tuple[i] += 1;
            if tuple[i] < n {
                break;
            }
            tuple[i] = 0;
        }
    }
    out
}

/// True when `name` is the order symbol of a plain linear-order leaf of the
/// spec tree.
fn symbol_is_linear_order_leaf(spec: &ClassSpec, name: &str) -> bool {
    match spec {
        ClassSpec::Builtin {
            kind: BuiltinClass::LinearOrder,
            symbols,
        } => symbols[0] == name,
        ClassSpec::Builtin { .. } => false,
        ClassSpec::Wedge(l, r) => {
            symbol_is_linear_order_leaf(l, name) || symbol_is_linear_order_leaf(r, name)
        }
        ClassSpec::Forget(inner, _) => symbol_is_linear_order_leaf(inner, name),
    }
}

pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, current: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if current.len() == n {
            out.push(current.clone());
            return;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                current.push(v);
                rec(n, current, used, out);
                current.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    let mut current: Vec<usize> = Vec::with_capacity(n);
    let mut used = vec![false; n];
    rec(n, &mut current, &mut used, &mut out);
    out
}

fn builtin_labeled(
    kind: &BuiltinClass,
    symbols: &[String],
    n: usize,
    labelings: Labelings,
) -> Vec<Structure> {
    match kind {
        BuiltinClass::LinearOrder => match labelings {
            // every linear order is isomorphic to the ascending chain
            Labelings::Seed => vec![catalog::chain_named(n, &symbols[0])],
            Labelings::All => {
                let sym = &symbols[0];
                let sig = Signature::binary(sym.clone()).expect("valid symbol");
                permutations(n)
                    .into_iter()
                    .map(|rank| {
                        let mut s = Structure::new(sig.clone(), n);
                        for a in 0..n {
                            for b in 0..n {
                                if rank[a] < rank[b] {
                                    s.add_tuple(sym, &[a, b]).expect("in range");
                                }
                            }
                        }
                        s
                    })
                    .collect()
            }
        },
        BuiltinClass::Graph => labeled_graphs(&symbols[0], n, usize::MAX),
        BuiltinClass::KnFree(k) => labeled_graphs(&symbols[0], n, *k),
        BuiltinClass::Tournament => {
            let sym = &symbols[0];
            let sig = Signature::binary(sym.clone()).expect("valid symbol");
            let pairs: Vec<(usize, usize)> = upper_pairs(n);
            let mut out = Vec::with_capacity(1 << pairs.len());
            for mask in 0usize..(1 << pairs.len()) {
                let mut s = Structure::new(sig.clone(), n);
                for (i, &(a, b)) in pairs.iter().enumerate() {
                    let tuple = if mask & (1 << i) != 0 { [b, a] } else { [a, b] };
                    s.add_tuple(sym, &tuple).expect("in range");
                }
                out.push(s);
            }
            out
        }
        BuiltinClass::PosetLinExt => {
            let prec_sym = &symbols[0];
            let lt_sym = &symbols[1];
            let orders = match labelings {
                // with a free choice of labelling, lt may be pinned to the
                // ascending chain
                Labelings::Seed => vec![(0..n).collect::<Vec<usize>>()],
                Labelings::All => permutations(n),
            };
            let mut out = Vec::new();
            for rank in orders {
                let lt_sig = Signature::binary(lt_sym.clone()).expect("valid symbol");
                let mut lt = Structure::new(lt_sig, n);
                let mut pairs = Vec::new();
                for a in 0..n {
                    for b in 0..n {
                        if rank[a] < rank[b] {
                            lt.add_tuple(lt_sym, &[a, b]).expect("in range");
                            pairs.push((a, b));
                        }
                    }
                }
                let prec_sig = Signature::binary(prec_sym.clone()).expect("valid symbol");
                'mask: for mask in 0usize..(1 << pairs.len()) {
                    let mut prec = Structure::new(prec_sig.clone(), n);
                    for (i, &(a, b)) in pairs.iter().enumerate() {
                        if mask & (1 << i) != 0 {
                            prec.add_tuple(prec_sym, &[a, b]).expect("in range");
                        }
                    }
                    for &(a, b) in &pairs {
                        for &(c, d) in &pairs {
                            if b == c
                                && prec.has_tuple(prec_sym, &[a, b])
                                && prec.has_tuple(prec_sym, &[c, d])
                                && !prec.has_tuple(prec_sym, &[a, d])
                            {
                                continue 'mask;
                            }
                        }
                    }
                    out.push(prec.merge(&lt).expect("disjoint symbols"));
                }
            }
            out
        }
    }
}

fn upper_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            pairs.push((a, b));
        }
    }
    pairs
}

fn labeled_graphs(sym: &str, n: usize, forbidden_clique: usize) -> Vec<Structure> {
    let sig = Signature::binary(sym).expect("valid symbol");
    let pairs = upper_pairs(n);
    let mut out = Vec::new();
    for mask in 0usize..(1 << pairs.len()) {
        let mut s = Structure::new(sig.clone(), n);
        for (i, &(a, b)) in pairs.iter().enumerate() {
            if mask & (1 << i) != 0 {
                s.add_tuple(sym, &[a, b]).expect("in range");
                s.add_tuple(sym, &[b, a]).expect("in range");
            }
        }
        if forbidden_clique != usize::MAX && has_clique(&s, sym, forbidden_clique) {
            continue;
        }
        out.push(s);
    }
    out
}

// --- class-spec DSL ---------------------------------------------------------
//
//   LO | G | T | F(3) | PLE | perm
//   wedge(X, Y) | rename(X, "p") | forget(X, {sym, …})

/// Parses the class-spec DSL used by the command line.
pub fn parse_class_spec(text: &str) -> Result<ClassSpec, Error> {
    let mut parser = DslParser {
        chars: text.char_indices().collect(),
        pos: 0,
    };
    let spec = parser.parse_spec()?;
    parser.skip_ws();
    if parser.pos < parser.chars.len() {
        return Err(parser.error("unexpected trailing input"));
    }
    Ok(spec)
}

struct DslParser {
    chars: Vec<(usize, char)>,
    pos: usize,
}

impl DslParser {
    fn error(&self, message: &str) -> Error {
        let position = self
            .chars
            .get(self.pos)
            .map(|(byte, _)| *byte)
            .unwrap_or_else(|| self.chars.last().map(|(b, c)| b + c.len_utf8()).unwrap_or(0));
        Error::ClassDsl {
            position,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while let Some(&(_, c)) = self.chars.get(self.pos) {
            if c.is_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn expect(&mut self, expected: char) -> Result<(), Error> {
        match self.peek() {
            Some(c) if c == expected => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.error(&format!("expected {expected:?}"))),
        }
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        while let Some(&(_, c)) = self.chars.get(self.pos) {
            if c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '<') {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.pos == start {
            None
        } else {
            Some(self.chars[start..self.pos].iter().map(|&(_, c)| c).collect())
        }
    }

    fn quoted(&mut self) -> Result<String, Error> {
        self.expect('"')?;
        let mut out = String::new();
        loop {
            match self.chars.get(self.pos) {
                Some(&(_, '"')) => {
                    self.pos += 1;
                    return Ok(out);
                }
                Some(&(_, c)) => {
                    out.push(c);
                    self.pos += 1;
                }
                None => return Err(self.error("unterminated string")),
            }
        }
    }

    fn parse_spec(&mut self) -> Result<ClassSpec, Error> {
        let at = self.pos;
        let name = self.ident().ok_or_else(|| self.error("expected a class spec"))?;
        match name.as_str() {
            "LO" => Ok(ClassSpec::linear_order()),
            "G" => Ok(ClassSpec::graph()),
            "T" => Ok(ClassSpec::tournament()),
            "PLE" => Ok(ClassSpec::poset_lin_ext()),
            "perm" => Ok(ClassSpec::permutations()),
            "F" => {
                self.expect('(')?;
                let number = self
                    .ident()
                    .and_then(|s| s.parse::<usize>().ok())
                    .ok_or_else(|| self.error("expected an integer"))?;
                self.expect(')')?;
                ClassSpec::kn_free(number).map_err(|e| {
                    self.pos = at;
                    self.error(&e.to_string())
                })
            }
            "wedge" => {
                self.expect('(')?;
                let left = self.parse_spec()?;
                self.expect(',')?;
                let right = self.parse_spec()?;
                self.expect(')')?;
                left.wedge(right).map_err(|e| {
                    self.pos = at;
                    self.error(&e.to_string())
                })
            }
            "rename" => {
                self.expect('(')?;
                let inner = self.parse_spec()?;
                self.expect(',')?;
                self.skip_ws();
                let prefix = self.quoted()?;
                self.expect(')')?;
                inner.renamed(&prefix).map_err(|e| {
                    self.pos = at;
                    self.error(&e.to_string())
                })
            }
            "forget" => {
                self.expect('(')?;
                let inner = self.parse_spec()?;
                self.expect(',')?;
                self.expect('{')?;
                let mut dropped = BTreeSet::new();
                loop {
                    let sym = self.ident().ok_or_else(|| self.error("expected a symbol name"))?;
                    dropped.insert(sym);
                    match self.peek() {
                        Some(',') => {
                            self.pos += 1;
                        }
                        Some('}') => {
                            self.pos += 1;
                            break;
                        }
                        _ => return Err(self.error("expected ',' or '}'")),
                    }
                }
                self.expect(')')?;
                inner.forget(dropped).map_err(|e| {
                    self.pos = at;
                    self.error(&e.to_string())
                })
            }
            other => {
                self.pos = at;
                Err(self.error(&format!("unknown class {other:?}")))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn chain_is_a_linear_order() {
        let lo = ClassSpec::linear_order();
        assert!(lo.membership(&catalog::chain(3)).unwrap());
        let not_total = Structure::new(Signature::binary("<").unwrap(), 2);
        assert!(!lo.membership(&not_total).unwrap());
    }

    #[test]
    fn triangle_is_not_k3_free() {
        let f3 = ClassSpec::kn_free(3).unwrap();
        assert!(!f3.membership(&catalog::complete_graph(3)).unwrap());
        assert!(f3.membership(&catalog::path_graph(3)).unwrap());
        assert!(ClassSpec::kn_free(2).is_err());
    }

    #[test]
    fn two_orders_form_a_permutation() {
        let perm = ClassSpec::permutations();
        let member = catalog::permutation_structure(&[2, 0, 1]).unwrap();
        assert!(perm.membership(&member).unwrap());
    }

    #[test]
    fn wedge_requires_disjoint_signatures() {
        assert!(ClassSpec::graph().wedge(ClassSpec::graph()).is_err());
        let ordered_graphs = ClassSpec::linear_order().wedge(ClassSpec::graph()).unwrap();
        assert!(ordered_graphs
            .membership(&catalog::ordered_complete_graph(3))
            .unwrap());
    }

    #[test]
    fn renaming_prefixes_every_symbol() {
        let renamed = ClassSpec::linear_order().renamed("a").unwrap();
        let sig = renamed.signature();
        assert!(sig.contains("a.<"));
        assert!(renamed.membership(&catalog::chain_named(3, "a.<")).unwrap());
        assert!(ClassSpec::linear_order().renamed("").is_err());
    }

    #[test]
    fn member_counts_at_small_sizes() {
        assert_eq!(ClassSpec::linear_order().enumerate_members(3).len(), 1);
        assert_eq!(ClassSpec::graph().enumerate_members(3).len(), 4);
        assert_eq!(ClassSpec::permutations().enumerate_members(2).len(), 2);
        assert_eq!(ClassSpec::graph().enumerate_members(4).len(), 11);
        assert_eq!(ClassSpec::tournament().enumerate_members(3).len(), 2);
        assert_eq!(ClassSpec::linear_order().enumerate_members(0).len(), 1);
    }

    #[test]
    fn members_are_members_and_pairwise_nonisomorphic() {
        for class in [
            ClassSpec::graph(),
            ClassSpec::tournament(),
            ClassSpec::poset_lin_ext(),
        ] {
            for n in 0..4 {
                let members = class.enumerate_members(n);
                let mut codes = BTreeSet::new();
                for m in &members {
                    assert!(class.membership(m).unwrap());
                    assert!(codes.insert(canonical_form(m)));
                }
            }
        }
    }

    #[test]
    fn forget_membership_searches_expansions() {
        // forgetting the order from linearly ordered graphs gives all graphs
        let ordered_graphs = ClassSpec::linear_order().wedge(ClassSpec::graph()).unwrap();
        let dropped: BTreeSet<String> = ["<".to_string()].into();
        let forget = ordered_graphs.forget(dropped).unwrap();
        assert!(forget.membership(&catalog::path_graph(3)).unwrap());
        assert!(forget.membership(&catalog::complete_graph(3)).unwrap());
        // a loop is never a graph, no matter the expansion
        let loopy = catalog::empty_graph(2).with_tuple("E", &[0, 0]).unwrap();
        assert!(!forget.membership(&loopy).unwrap());
    }

    #[test]
    fn dsl_round_trips_the_builtins() {
        assert_eq!(parse_class_spec("LO").unwrap(), ClassSpec::linear_order());
        assert_eq!(parse_class_spec("G").unwrap(), ClassSpec::graph());
        assert_eq!(parse_class_spec("T").unwrap(), ClassSpec::tournament());
        assert_eq!(parse_class_spec("F(3)").unwrap(), ClassSpec::kn_free(3).unwrap());
        assert_eq!(parse_class_spec("PLE").unwrap(), ClassSpec::poset_lin_ext());
        assert_eq!(parse_class_spec("perm").unwrap(), ClassSpec::permutations());
        assert_eq!(
            parse_class_spec("wedge(LO, G)").unwrap(),
            ClassSpec::linear_order().wedge(ClassSpec::graph()).unwrap()
        );
        assert_eq!(
            parse_class_spec(" rename ( LO , \"a\" ) ").unwrap(),
            ClassSpec::linear_order().renamed("a").unwrap()
        );
        let forget = parse_class_spec("forget(wedge(LO,G),{<})").unwrap();
        assert!(matches!(forget, ClassSpec::Forget(_, _)));
        assert!(parse_class_spec("wedge(G,G)").is_err());
        assert!(parse_class_spec("F(2)").is_err());
        assert!(parse_class_spec("LO extra").is_err());
        assert!(matches!(
            parse_class_spec("bogus"),
            Err(Error::ClassDsl { .. })
        ));
    }
}

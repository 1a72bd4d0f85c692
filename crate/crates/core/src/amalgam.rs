//! Amalgamation diagrams, free and strong amalgams, bounded-size property
//! checks, and injectivization of homomorphisms.
//!
//! A strong amalgam within the size cap |B1|+|B2|−|A| is found by completing
//! the free amalgam with extra tuples that mix fresh points of both sides.
//! The completion search decides the cross tuples cell by cell (one cell per
//! pair of fresh points) and prunes through hereditariness: the constraints
//! that become final at a cell must already hold. For a wedge class the
//! search factors through the two component signatures, since cross tuples
//! of one side never affect the other side's reduct; the per-side existence
//! results are memoized across diagrams during a property check.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Mutex;

use rayon::prelude::*;

use crate::classes::ClassSpec;
use crate::embed::{automorphisms, enumerate_embeddings, Embedding};
use crate::error::Error;
use crate::structure::{is_homomorphism, Structure};
use crate::text::render_structure;

/// A span A → B1, A → B2 of embeddings over a shared signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmalgamationDiagram {
    base: Structure,
    left: Structure,
    right: Structure,
    e1: Embedding,
    e2: Embedding,
}

impl AmalgamationDiagram {
    pub fn new(
        base: Structure,
        left: Structure,
        right: Structure,
        e1: Embedding,
        e2: Embedding,
    ) -> Result<Self, Error> {
        if e1.source() != &base || e1.target() != &left {
            return Err(Error::NotAnEmbedding {
                detail: "e1 must embed the base into the left side".to_string(),
            });
        }
        if e2.source() != &base || e2.target() != &right {
            return Err(Error::NotAnEmbedding {
                detail: "e2 must embed the base into the right side".to_string(),
            });
        }
        if base.sig() != left.sig() || base.sig() != right.sig() {
            return Err(Error::SignatureMismatch {
                context: "amalgamation diagram".to_string(),
            });
        }
        Ok(AmalgamationDiagram {
            base,
            left,
            right,
            e1,
            e2,
        })
    }

    pub fn base(&self) -> &Structure {
        &self.base
    }

    pub fn left(&self) -> &Structure {
        &self.left
    }

    pub fn right(&self) -> &Structure {
        &self.right
    }

    pub fn left_embedding(&self) -> &Embedding {
        &self.e1
    }

    pub fn right_embedding(&self) -> &Embedding {
        &self.e2
    }

    fn raw(&self) -> RawDiagram<'_> {
        RawDiagram {
            left: &self.left,
            right: &self.right,
            e1_map: self.e1.map(),
            e2_map: self.e2.map(),
        }
    }
}

/// Borrowed view of a diagram: everything the completion search needs.
#[derive(Clone, Copy)]
struct RawDiagram<'a> {
    left: &'a Structure,
    right: &'a Structure,
    e1_map: &'a [usize],
    e2_map: &'a [usize],
}

/// An amalgam of a diagram: a completed structure with embeddings of both
/// sides agreeing on the base.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Amalgam {
    completed: Structure,
    f1: Embedding,
    f2: Embedding,
    strong: bool,
}

impl Amalgam {
    pub fn completed(&self) -> &Structure {
        &self.completed
    }

    pub fn left_embedding(&self) -> &Embedding {
        &self.f1
    }

    pub fn right_embedding(&self) -> &Embedding {
        &self.f2
    }

    /// True when the images of the two sides intersect exactly in the image
    /// of the base.
    pub fn is_strong(&self) -> bool {
        self.strong
    }
}

fn compute_strong_flag(e1_map: &[usize], f1: &Embedding, f2: &Embedding) -> bool {
    let img1: BTreeSet<usize> = f1.map().iter().copied().collect();
    let img2: BTreeSet<usize> = f2.map().iter().copied().collect();
    let glued: BTreeSet<usize> = e1_map.iter().map(|&a| f1.map()[a]).collect();
    let intersection: BTreeSet<usize> = img1.intersection(&img2).copied().collect();
    intersection == glued
}

/// The coordinates of a glued union of the two sides: where each element of
/// B1 and B2 lands, which amalgam ids are fresh on each side, and the glued
/// core.
struct GluedBase {
    structure: Structure,
    f1: Vec<usize>,
    f2: Vec<usize>,
    core: Vec<usize>,
    left_new: Vec<usize>,
    right_new: Vec<usize>,
}

/// Builds the union structure for a partial matching `glue` from fresh
/// left-side elements to fresh right-side elements (empty for the free
/// amalgam). Returns `None` when the gluing is inconsistent with one of the
/// sides being an induced substructure.
fn glued_base(d: RawDiagram<'_>, glue: &[(usize, usize)]) -> Option<GluedBase> {
    let n1 = d.left.size();
    let e2_image: BTreeMap<usize, usize> = d
        .e2_map
        .iter()
        .enumerate()
        .map(|(a, &j)| (j, a))
        .collect();
    let glue_of_right: BTreeMap<usize, usize> = glue.iter().map(|&(u, v)| (v, u)).collect();

    // left side keeps its ids
    let f1: Vec<usize> = (0..n1).collect();
    let mut f2 = vec![usize::MAX; d.right.size()];
    let mut next = n1;
    for (j, slot) in f2.iter_mut().enumerate() {
        if let Some(&a) = e2_image.get(&j) {
            *slot = d.e1_map[a];
        } else if let Some(&u) = glue_of_right.get(&j) {
            *slot = u;
        } else {
            *slot = next;
            next += 1;
        }
    }
    let size = next;

    let mut structure = Structure::new(d.left.sig().clone(), size);
    for sym in d.left.sig().symbols() {
        for tuple in d.left.tuples(sym.name()).expect("left symbol") {
            structure.add_tuple(sym.name(), tuple).expect("left tuples in range");
        }
        for tuple in d.right.tuples(sym.name()).expect("right symbol") {
            let mapped: Vec<usize> = tuple.iter().map(|&e| f2[e]).collect();
            structure.add_tuple(sym.name(), &mapped).expect("mapped tuples in range");
        }
    }

    // both sides must stay induced substructures of the union
    let img2: BTreeSet<usize> = f2.iter().copied().collect();
    let mut f2_inverse: BTreeMap<usize, usize> = BTreeMap::new();
    for (j, &id) in f2.iter().enumerate() {
        f2_inverse.insert(id, j);
    }
    for sym in d.left.sig().symbols() {
        for tuple in structure.tuples(sym.name()).expect("union symbol") {
            if tuple.iter().all(|e| *e < n1) && !d.left.has_tuple(sym.name(), tuple) {
                return None;
            }
            if tuple.iter().all(|e| img2.contains(e)) {
                let pre: Vec<usize> = tuple.iter().map(|e| f2_inverse[e]).collect();
                if !d.right.has_tuple(sym.name(), &pre) {
                    return None;
                }
            }
        }
    }

    let e1_image: BTreeSet<usize> = d.e1_map.iter().copied().collect();
    let glued_left: BTreeSet<usize> = glue.iter().map(|&(u, _)| u).collect();
    let core: Vec<usize> = (0..n1)
        .filter(|i| e1_image.contains(i) || glued_left.contains(i))
        .collect();
    let left_new: Vec<usize> = (0..n1)
        .filter(|i| !e1_image.contains(i) && !glued_left.contains(i))
        .collect();
    let right_new: Vec<usize> = (n1..size).collect();
    Some(GluedBase {
        structure,
        f1,
        f2,
        core,
        left_new,
        right_new,
    })
}

/// The free amalgam: both sides glued exactly over the base, relations the
/// union of the two images and nothing more. Always satisfies the strong
/// intersection condition.
pub fn free_amalgam(d: &AmalgamationDiagram) -> Amalgam {
    let base = glued_base(d.raw(), &[]).expect("the empty gluing is always consistent");
    let f1 = Embedding::new(&d.left, &base.structure, base.f1.clone())
        .expect("left inclusion into the free amalgam is an embedding");
    let f2 = Embedding::new(&d.right, &base.structure, base.f2.clone())
        .expect("right inclusion into the free amalgam is an embedding");
    let strong = compute_strong_flag(d.e1.map(), &f1, &f2);
    Amalgam {
        completed: base.structure,
        f1,
        f2,
        strong,
    }
}

/// Memo for per-side completion existence, shared across the diagrams of a
/// property check. Keyed by the rendered side base plus the fresh point
/// lists (the core is their complement).
type CompletionMemo = Mutex<HashMap<String, bool>>;

fn memo_key(base: &Structure, left_new: &[usize], right_new: &[usize]) -> String {
    format!("{}|{:?}|{:?}", render_structure(base), left_new, right_new)
}

enum SearchGoal<'a> {
    /// Collect every completion.
    All(&'a mut Vec<Structure>),
    /// Stop at the first completion.
    First(&'a mut Option<Structure>),
}

/// Searches completions of a glued base inside the class, factoring through
/// wedge components. Returns whether at least one completion exists.
fn search_completions(
    class: &ClassSpec,
    base: &Structure,
    core: &[usize],
    left_new: &[usize],
    right_new: &[usize],
    goal: &mut SearchGoal<'_>,
    memo: Option<&CompletionMemo>,
) -> Result<bool, Error> {
    if let ClassSpec::Wedge(l, r) = class {
        let left_names: BTreeSet<String> = l.signature().names().map(String::from).collect();
        let right_names: BTreeSet<String> = r.signature().names().map(String::from).collect();
        let left_base = base.reduct(&left_names)?;
        let right_base = base.reduct(&right_names)?;
        match goal {
            SearchGoal::First(slot) => {
                let mut left_first = None;
                let mut left_goal = SearchGoal::First(&mut left_first);
                if !search_completions(l, &left_base, core, left_new, right_new, &mut left_goal, memo)? {
                    return Ok(false);
                }
                let mut right_first = None;
                let mut right_goal = SearchGoal::First(&mut right_first);
                if !search_completions(r, &right_base, core, left_new, right_new, &mut right_goal, memo)? {
                    return Ok(false);
                }
                **slot = Some(
                    left_first
                        .expect("existence implies a completion")
                        .merge(&right_first.expect("existence implies a completion"))?,
                );
                return Ok(true);
            }
            SearchGoal::All(acc) => {
                let mut lefts = Vec::new();
                let mut left_goal = SearchGoal::All(&mut lefts);
                search_completions(l, &left_base, core, left_new, right_new, &mut left_goal, memo)?;
                if lefts.is_empty() {
                    return Ok(false);
                }
                let mut rights = Vec::new();
                let mut right_goal = SearchGoal::All(&mut rights);
                search_completions(r, &right_base, core, left_new, right_new, &mut right_goal, memo)?;
                if rights.is_empty() {
                    return Ok(false);
                }
                for lc in &lefts {
                    for rc in &rights {
                        acc.push(lc.merge(rc)?);
                    }
                }
                return Ok(true);
            }
        }
    }

    // leaf search; existence queries can be answered from the memo
    let existence_only = matches!(goal, SearchGoal::First(_));
    let key = match (existence_only, memo) {
        (true, Some(memo)) => {
            let key = memo_key(base, left_new, right_new);
            if let Some(&known) = memo.lock().expect("memo lock").get(&key) {
                if !known {
                    return Ok(false);
                }
                // a completion exists; fall through to materialize the witness
            }
            Some(key)
        }
        _ => None,
    };

    let exists = leaf_search(class, base, core, left_new, right_new, goal)?;
    if let (Some(key), Some(memo)) = (key, memo) {
        memo.lock().expect("memo lock").insert(key, exists);
    }
    Ok(exists)
}

/// Plain cell-by-cell backtracking over the cross tuples of one signature
/// component.
fn leaf_search(
    class: &ClassSpec,
    base: &Structure,
    core: &[usize],
    left_new: &[usize],
    right_new: &[usize],
    goal: &mut SearchGoal<'_>,
) -> Result<bool, Error> {
    let all_binary = base.sig().symbols().iter().all(|s| s.arity() == 2);
    let symbols: Vec<String> = {
        let mut names: Vec<String> = base.sig().names().map(String::from).collect();
        names.sort();
        names
    };
    let mut work = base.clone();
    let mut found_any = false;
    if all_binary {
        binary_cells(
            class, &mut work, core, left_new, right_new, &symbols, 0, goal, &mut found_any,
        )?;
    } else {
        generic_slots(class, &mut work, core, left_new, right_new, goal, &mut found_any)?;
    }
    Ok(found_any)
}

/// Emits the current completion; returns true when the search should stop.
fn emit(
    class: &ClassSpec,
    work: &Structure,
    goal: &mut SearchGoal<'_>,
    found_any: &mut bool,
) -> Result<bool, Error> {
    // the cell checks are prunes; the emitted structure must pass the full
    // predicate (it always does for the builtin classes, but the final word
    // belongs to the membership test)
    if !class.membership(work)? {
        return Ok(false);
    }
    *found_any = true;
    match goal {
        SearchGoal::All(acc) => {
            acc.push(work.clone());
            Ok(false)
        }
        SearchGoal::First(slot) => {
            **slot = Some(work.clone());
            Ok(true)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn binary_cells(
    class: &ClassSpec,
    work: &mut Structure,
    core: &[usize],
    left_new: &[usize],
    right_new: &[usize],
    symbols: &[String],
    cell_idx: usize,
    goal: &mut SearchGoal<'_>,
    found_any: &mut bool,
) -> Result<bool, Error> {
    let total_cells = left_new.len() * right_new.len();
    if cell_idx == total_cells {
        return emit(class, work, goal, found_any);
    }
    let j = cell_idx / left_new.len();
    let i = cell_idx % left_new.len();
    let u = left_new[i];
    let v = right_new[j];
    // points whose pairs with both u and v are already decided: earlier
    // fresh points only — a later left point has no decided pair with v yet
    let decided: Vec<usize> = core
        .iter()
        .chain(left_new[..i].iter())
        .chain(right_new[..j].iter())
        .copied()
        .collect();

    let slots: Vec<(usize, [usize; 2])> = symbols
        .iter()
        .enumerate()
        .flat_map(|(si, _)| [(si, [u, v]), (si, [v, u])])
        .collect();
    for mask in 0u32..(1u32 << slots.len()) {
        for (s, (si, tuple)) in slots.iter().enumerate() {
            if mask & (1 << s) != 0 {
                work.add_tuple(&symbols[*si], tuple)?;
            }
        }
        let viable = class.cell_check(work, u, v, &decided)?;
        let stop = viable
            && binary_cells(
                class, work, core, left_new, right_new, symbols, cell_idx + 1, goal, found_any,
            )?;
        for (s, (si, tuple)) in slots.iter().enumerate() {
            if mask & (1 << s) != 0 {
                work.remove_tuple(&symbols[*si], tuple);
            }
        }
        if stop {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Fallback for non-binary signatures: one flat subset search over all
/// cross tuples with a single final membership test.
fn generic_slots(
    class: &ClassSpec,
    work: &mut Structure,
    core: &[usize],
    left_new: &[usize],
    right_new: &[usize],
    goal: &mut SearchGoal<'_>,
    found_any: &mut bool,
) -> Result<bool, Error> {
    let left_set: BTreeSet<usize> = left_new.iter().copied().collect();
    let right_set: BTreeSet<usize> = right_new.iter().copied().collect();
    let domain: BTreeSet<usize> = core
        .iter()
        .chain(left_new.iter())
        .chain(right_new.iter())
        .copied()
        .collect();
    let mut slots: Vec<(String, Vec<usize>)> = Vec::new();
    for sym in work.sig().symbols() {
        for tuple in tuples_over_set(&domain, sym.arity()) {
            if tuple.iter().any(|e| left_set.contains(e))
                && tuple.iter().any(|e| right_set.contains(e))
            {
                slots.push((sym.name().to_string(), tuple));
            }
        }
    }
    fn rec(
        class: &ClassSpec,
        work: &mut Structure,
        slots: &[(String, Vec<usize>)],
        idx: usize,
        goal: &mut SearchGoal<'_>,
        found_any: &mut bool,
    ) -> Result<bool, Error> {
        if idx == slots.len() {
            return emit(class, work, goal, found_any);
        }
        if rec(class, work, slots, idx + 1, goal, found_any)? {
            return Ok(true);
        }
        let (name, tuple) = &slots[idx];
        work.add_tuple(name, tuple)?;
        let stop = rec(class, work, slots, idx + 1, goal, found_any)?;
        work.remove_tuple(name, tuple);
        Ok(stop)
    }
    rec(class, work, &slots, 0, goal, found_any)
}

fn tuples_over_set(set: &BTreeSet<usize>, arity: usize) -> Vec<Vec<usize>> {
    let elems: Vec<usize> = set.iter().copied().collect();
    if elems.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; arity];
    'outer: loop {
        out.push(idx.iter().map(|&i| elems[i]).collect());
        let mut pos = arity;
        loop {
            if pos == 0 {
                break 'outer;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < elems.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
    out
}

/// Existence of a completion for one gluing, memoized.
fn gluing_completable(
    d: RawDiagram<'_>,
    class: &ClassSpec,
    glue: &[(usize, usize)],
    memo: Option<&CompletionMemo>,
) -> Result<bool, Error> {
    let Some(base) = glued_base(d, glue) else {
        return Ok(false);
    };
    let mut first = None;
    let mut goal = SearchGoal::First(&mut first);
    search_completions(
        class,
        &base.structure,
        &base.core,
        &base.left_new,
        &base.right_new,
        &mut goal,
        memo,
    )
}

fn amalgams_for_gluing(
    d: &AmalgamationDiagram,
    class: &ClassSpec,
    glue: &[(usize, usize)],
    first_only: bool,
) -> Result<Vec<Amalgam>, Error> {
    let Some(base) = glued_base(d.raw(), glue) else {
        return Ok(Vec::new());
    };
    let mut completions = Vec::new();
    if first_only {
        let mut first = None;
        let mut goal = SearchGoal::First(&mut first);
        search_completions(
            class,
            &base.structure,
            &base.core,
            &base.left_new,
            &base.right_new,
            &mut goal,
            None,
        )?;
        completions.extend(first);
    } else {
        let mut goal = SearchGoal::All(&mut completions);
        search_completions(
            class,
            &base.structure,
            &base.core,
            &base.left_new,
            &base.right_new,
            &mut goal,
            None,
        )?;
    }
    let mut out = Vec::with_capacity(completions.len());
    for completed in completions {
        let f1 = Embedding::new(&d.left, &completed, base.f1.clone())?;
        let f2 = Embedding::new(&d.right, &completed, base.f2.clone())?;
        let strong = compute_strong_flag(d.e1.map(), &f1, &f2);
        out.push(Amalgam {
            completed,
            f1,
            f2,
            strong,
        });
    }
    Ok(out)
}

/// All strong amalgams of the diagram within the class, with the domain
/// capped at |B1|+|B2|−|A| (no extra points): the two sides glued exactly
/// over the base, completed by cross tuples in every way that lands in the
/// class. Deterministic order.
pub fn find_strong_amalgams(
    d: &AmalgamationDiagram,
    class: &ClassSpec,
) -> Result<Vec<Amalgam>, Error> {
    check_diagram_signature(d, class)?;
    amalgams_for_gluing(d, class, &[], false)
}

fn first_strong_amalgam(
    d: &AmalgamationDiagram,
    class: &ClassSpec,
) -> Result<Option<Amalgam>, Error> {
    Ok(amalgams_for_gluing(d, class, &[], true)?.into_iter().next())
}

fn fresh_left(d: RawDiagram<'_>) -> Vec<usize> {
    let image: BTreeSet<usize> = d.e1_map.iter().copied().collect();
    (0..d.left.size()).filter(|i| !image.contains(i)).collect()
}

fn fresh_right(d: RawDiagram<'_>) -> Vec<usize> {
    let image: BTreeSet<usize> = d.e2_map.iter().copied().collect();
    (0..d.right.size()).filter(|j| !image.contains(j)).collect()
}

/// All partial injective matchings between two disjoint element lists, the
/// empty matching first, in a fixed deterministic order.
fn partial_matchings(left: &[usize], right: &[usize]) -> Vec<Vec<(usize, usize)>> {
    fn rec(
        left: &[usize],
        right: &[usize],
        li: usize,
        used: &mut Vec<bool>,
        current: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if li == left.len() {
            out.push(current.clone());
            return;
        }
        // leave left[li] unmatched
        rec(left, right, li + 1, used, current, out);
        for (ri, &r) in right.iter().enumerate() {
            if !used[ri] {
                used[ri] = true;
                current.push((left[li], r));
                rec(left, right, li + 1, used, current, out);
                current.pop();
                used[ri] = false;
            }
        }
    }
    let mut out = Vec::new();
    let mut used = vec![false; right.len()];
    let mut current = Vec::new();
    rec(left, right, 0, &mut used, &mut current, &mut out);
    // empty matching first, then by size, then lexicographically
    out.sort_by_key(|a| (a.len(), a.clone()));
    out
}

/// Is there any amalgam at all (images may overlap beyond the base)?
fn any_amalgam_raw(
    d: RawDiagram<'_>,
    class: &ClassSpec,
    memo: Option<&CompletionMemo>,
) -> Result<bool, Error> {
    for glue in partial_matchings(&fresh_left(d), &fresh_right(d)) {
        if gluing_completable(d, class, &glue, memo)? {
            return Ok(true);
        }
    }
    Ok(false)
}

fn check_diagram_signature(d: &AmalgamationDiagram, class: &ClassSpec) -> Result<(), Error> {
    if *d.base.sig() != class.signature() {
        return Err(Error::SignatureMismatch {
            context: "diagram signature differs from the class signature".to_string(),
        });
    }
    Ok(())
}

/// Result of a bounded amalgamation-property check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PropertyCheck {
    /// Every diagram within the bound has the required amalgam.
    Ok,
    /// The first failing diagram in deterministic order.
    Counterexample(Box<AmalgamationDiagram>),
}

impl PropertyCheck {
    pub fn is_ok(&self) -> bool {
        matches!(self, PropertyCheck::Ok)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum AmalgamKind {
    Strong,
    Any,
}

/// Strong amalgamation up to the size bound: every diagram with both sides
/// of size ≤ k (bases ranging over all common substructures) must have a
/// strong amalgam within the size cap.
pub fn check_sap(class: &ClassSpec, max_size: usize) -> Result<PropertyCheck, Error> {
    check_property(class, max_size, AmalgamKind::Strong, false)
}

/// Amalgamation property up to the size bound (images may overlap beyond
/// the base).
pub fn check_ap(class: &ClassSpec, max_size: usize) -> Result<PropertyCheck, Error> {
    check_property(class, max_size, AmalgamKind::Any, false)
}

/// Joint embedding property up to the size bound: amalgamation restricted
/// to the empty base.
pub fn check_jep(class: &ClassSpec, max_size: usize) -> Result<PropertyCheck, Error> {
    check_property(class, max_size, AmalgamKind::Any, true)
}

fn check_property(
    class: &ClassSpec,
    max_size: usize,
    kind: AmalgamKind,
    empty_base_only: bool,
) -> Result<PropertyCheck, Error> {
    if max_size == 0 {
        return Err(Error::InvalidClassParameter {
            message: "the size bound must be at least 1".to_string(),
        });
    }
    let ctx = DiagramContext::new(class, max_size, empty_base_only)?;
    let engine = SideEngine::new(class, &ctx.members)?;
    let memo: CompletionMemo = Mutex::new(HashMap::new());
    // (group index, key index) of the first failing diagram, or an error
    let check_group = |gi: &usize| -> Option<Result<usize, Error>> {
        let group = ctx.groups[*gi];
        let keys = ctx.keys_for(group);
        for (ki, (m1, m2)) in keys.iter().enumerate() {
            let found = match kind {
                AmalgamKind::Strong => engine.strong_completable(group.1, group.2, m1, m2),
                AmalgamKind::Any => {
                    let raw = RawDiagram {
                        left: &ctx.members[group.1],
                        right: &ctx.members[group.2],
                        e1_map: m1,
                        e2_map: m2,
                    };
                    any_amalgam_raw(raw, class, Some(&memo))
                }
            };
            match found {
                Ok(true) => {}
                Ok(false) => return Some(Ok(ki)),
                Err(e) => return Some(Err(e)),
            }
        }
        None
    };
    // Disjoint groups may be checked in parallel; find_map_first keeps the
    // reported counterexample the deterministic-order first one. A single
    // worker runs a plain sequential scan.
    let indices: Vec<usize> = (0..ctx.groups.len()).collect();
    let failing = if rayon::current_num_threads() > 1 {
        indices
            .par_iter()
            .find_map_first(|gi| check_group(gi).map(|r| (*gi, r)))
    } else {
        indices.iter().find_map(|gi| check_group(gi).map(|r| (*gi, r)))
    };
    match failing {
        None => Ok(PropertyCheck::Ok),
        Some((_, Err(e))) => Err(e),
        Some((gi, Ok(ki))) => {
            let diagram = ctx.diagram_at(ctx.groups[gi], ki)?;
            Ok(PropertyCheck::Counterexample(Box::new(diagram)))
        }
    }
}

/// Memo key of one per-side completion problem: the component shape, the
/// interned codes of both side reducts, and the two base embeddings.
type SideKey = (u32, u32, u32, Vec<usize>, Vec<usize>);

/// Decides strong-amalgam existence per diagram by splitting it into the
/// signature components of the class. A side problem depends only on the
/// component reducts of the two sides and the embedding maps, so results
/// are shared aggressively across diagrams; the reducts are interned up to
/// a symbol-name-independent code so the two renamed copies of one class
/// share entries too.
struct SideEngine<'a> {
    components: Vec<(&'a ClassSpec, u32)>,
    /// per member, per component: the reduct of the member
    reducts: Vec<Vec<Structure>>,
    /// per member, per component: interned code of the reduct
    codes: Vec<Vec<u32>>,
    memo: Mutex<HashMap<SideKey, bool>>,
}

impl<'a> SideEngine<'a> {
    fn new(class: &'a ClassSpec, members: &[Structure]) -> Result<Self, Error> {
        fn flatten<'c>(spec: &'c ClassSpec, out: &mut Vec<&'c ClassSpec>) {
            match spec {
                ClassSpec::Wedge(l, r) => {
                    flatten(l, out);
                    flatten(r, out);
                }
                other => out.push(other),
            }
        }
        let mut flat = Vec::new();
        flatten(class, &mut flat);

        // shape of a component, independent of symbol names (renaming
        // preserves the sorted order of names, so positional codes agree)
        fn shape_of(spec: &ClassSpec) -> String {
            match spec {
                ClassSpec::Builtin { kind, .. } => format!("{kind:?}"),
                ClassSpec::Wedge(l, r) => format!("w({},{})", shape_of(l), shape_of(r)),
                ClassSpec::Forget(inner, dropped) => {
                    let sig = inner.signature();
                    let mut names: Vec<&str> = sig.names().collect();
                    names.sort();
                    let positions: Vec<usize> = names
                        .iter()
                        .enumerate()
                        .filter(|(_, n)| dropped.contains(**n))
                        .map(|(i, _)| i)
                        .collect();
                    format!("f({},{positions:?})", shape_of(inner))
                }
            }
        }
        let mut shape_ids: HashMap<String, u32> = HashMap::new();
        let components: Vec<(&ClassSpec, u32)> = flat
            .into_iter()
            .map(|c| {
                let shape = shape_of(c);
                let next = shape_ids.len() as u32;
                let id = *shape_ids.entry(shape).or_insert(next);
                (c, id)
            })
            .collect();

        // name-independent labeled code of a reduct: size plus the tuple
        // sets listed per sorted-symbol position
        fn code_of(s: &Structure) -> Vec<u8> {
            let mut names: Vec<&str> = s.sig().names().collect();
            names.sort();
            let mut out = Vec::new();
            out.extend_from_slice(&(s.size() as u32).to_be_bytes());
            for name in names {
                let tuples = s.tuples(name).expect("own symbol");
                out.extend_from_slice(&(tuples.len() as u32).to_be_bytes());
                for t in tuples {
                    for &e in t {
                        out.extend_from_slice(&(e as u32).to_be_bytes());
                    }
                }
            }
            out
        }

        let mut code_ids: HashMap<Vec<u8>, u32> = HashMap::new();
        let mut reducts = Vec::with_capacity(members.len());
        let mut codes = Vec::with_capacity(members.len());
        for m in members {
            let mut per_component = Vec::with_capacity(components.len());
            let mut per_codes = Vec::with_capacity(components.len());
            for (c, _) in &components {
                let names: BTreeSet<String> = c.signature().names().map(String::from).collect();
                let r = m.reduct(&names)?;
                let code = code_of(&r);
                let next = code_ids.len() as u32;
                per_codes.push(*code_ids.entry(code).or_insert(next));
                per_component.push(r);
            }
            reducts.push(per_component);
            codes.push(per_codes);
        }
        Ok(SideEngine {
            components,
            reducts,
            codes,
            memo: Mutex::new(HashMap::new()),
        })
    }

    fn strong_completable(
        &self,
        i1: usize,
        i2: usize,
        m1: &[usize],
        m2: &[usize],
    ) -> Result<bool, Error> {
        for (ci, (component, shape_id)) in self.components.iter().enumerate() {
            let c1 = self.codes[i1][ci];
            let c2 = self.codes[i2][ci];
            // a side problem and its mirror have the same answer
            let key: SideKey = if (c1, m1) <= (c2, m2) {
                (*shape_id, c1, c2, m1.to_vec(), m2.to_vec())
            } else {
                (*shape_id, c2, c1, m2.to_vec(), m1.to_vec())
            };
            if let Some(&known) = self.memo.lock().expect("side memo").get(&key) {
                if !known {
                    return Ok(false);
                }
                continue;
            }
            let raw = RawDiagram {
                left: &self.reducts[i1][ci],
                right: &self.reducts[i2][ci],
                e1_map: m1,
                e2_map: m2,
            };
            let base = glued_base(raw, &[]).expect("the empty gluing is always consistent");
            let mut first = None;
            let mut goal = SearchGoal::First(&mut first);
            let exists = search_completions(
                component,
                &base.structure,
                &base.core,
                &base.left_new,
                &base.right_new,
                &mut goal,
                None,
            )?;
            self.memo.lock().expect("side memo").insert(key, exists);
            if !exists {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Shared state for diagram enumeration: the members up to the size bound,
/// their automorphisms, and all embedding maps between them. Diagrams are
/// produced lazily per (base, left, right) group so that property checks
/// never hold more than one group in memory.
struct DiagramContext {
    members: Vec<Structure>,
    automorphism_maps: Vec<Vec<Vec<usize>>>,
    embedding_maps: BTreeMap<(usize, usize), Vec<Vec<usize>>>,
    /// (base index, left index, right index), in deterministic order
    groups: Vec<(usize, usize, usize)>,
}

impl DiagramContext {
    fn new(class: &ClassSpec, max_size: usize, empty_base_only: bool) -> Result<Self, Error> {
        let mut members: Vec<Structure> = Vec::new();
        for n in 0..=max_size {
            members.extend(class.enumerate_members(n));
        }
        let automorphism_maps: Vec<Vec<Vec<usize>>> = members
            .iter()
            .map(|m| {
                automorphisms(m).map(|auts| auts.iter().map(|e| e.map().to_vec()).collect())
            })
            .collect::<Result<_, _>>()?;
        let mut embedding_maps: BTreeMap<(usize, usize), Vec<Vec<usize>>> = BTreeMap::new();
        for (ia, a) in members.iter().enumerate() {
            for (ib, b) in members.iter().enumerate() {
                if a.size() <= b.size() {
                    let maps = enumerate_embeddings(a, b)?
                        .iter()
                        .map(|e| e.map().to_vec())
                        .collect();
                    embedding_maps.insert((ia, ib), maps);
                }
            }
        }
        let mut groups = Vec::new();
        for i1 in 0..members.len() {
            for i2 in 0..members.len() {
                for ia in 0..members.len() {
                    let a = &members[ia];
                    if empty_base_only && a.size() != 0 {
                        continue;
                    }
                    if a.size() > members[i1].size().min(members[i2].size()) {
                        continue;
                    }
                    let nonempty = !embedding_maps[&(ia, i1)].is_empty()
                        && !embedding_maps[&(ia, i2)].is_empty();
                    if nonempty {
                        groups.push((ia, i1, i2));
                    }
                }
            }
        }
        Ok(DiagramContext {
            members,
            automorphism_maps,
            embedding_maps,
            groups,
        })
    }

    /// The embedding pairs of one group, one per orbit under
    /// Aut(B1) × Aut(B2) acting on the left and Aut(A) acting diagonally on
    /// the right. Sorted, hence deterministic.
    fn keys_for(&self, (ia, i1, i2): (usize, usize, usize)) -> Vec<(Vec<usize>, Vec<usize>)> {
        let e1s = &self.embedding_maps[&(ia, i1)];
        let e2s = &self.embedding_maps[&(ia, i2)];
        let auts_a = &self.automorphism_maps[ia];
        let auts_b1 = &self.automorphism_maps[i1];
        let auts_b2 = &self.automorphism_maps[i2];
        let all_trivial = auts_a.len() == 1 && auts_b1.len() == 1 && auts_b2.len() == 1;

        let orbit_rep = |map: &[usize], auts: &[Vec<usize>]| -> Vec<usize> {
            auts.iter()
                .map(|alpha| map.iter().map(|&v| alpha[v]).collect::<Vec<usize>>())
                .min()
                .expect("automorphism list contains the identity")
        };

        let mut keys: BTreeSet<(Vec<usize>, Vec<usize>)> = BTreeSet::new();
        for e1 in e1s {
            for e2 in e2s {
                if all_trivial {
                    keys.insert((e1.clone(), e2.clone()));
                    continue;
                }
                let key = auts_a
                    .iter()
                    .map(|gamma| {
                        let e1g: Vec<usize> = gamma.iter().map(|&x| e1[x]).collect();
                        let e2g: Vec<usize> = gamma.iter().map(|&x| e2[x]).collect();
                        (orbit_rep(&e1g, auts_b1), orbit_rep(&e2g, auts_b2))
                    })
                    .min()
                    .expect("automorphism list contains the identity");
                keys.insert(key);
            }
        }
        keys.into_iter().collect()
    }

    fn diagram_at(
        &self,
        group: (usize, usize, usize),
        key_index: usize,
    ) -> Result<AmalgamationDiagram, Error> {
        let (ia, i1, i2) = group;
        let (m1, m2) = self.keys_for(group)[key_index].clone();
        let a = &self.members[ia];
        let b1 = &self.members[i1];
        let b2 = &self.members[i2];
        let e1 = Embedding::new(a, b1, m1)?;
        let e2 = Embedding::new(a, b2, m2)?;
        AmalgamationDiagram::new(a.clone(), b1.clone(), b2.clone(), e1, e2)
    }
}

/// Turns a homomorphism into an injective one by repeatedly duplicating the
/// offending image point through a strong amalgam of two copies of the
/// current target over the target minus that point. Requires injective
/// relations on both structures and a class with enough strong amalgams at
/// the sizes encountered.
pub fn injectivize(
    hom: &[usize],
    small: &Structure,
    target: &Structure,
    class: &ClassSpec,
) -> Result<(Structure, Vec<usize>), Error> {
    if let Some((symbol, tuple)) = target.first_non_injective_tuple() {
        return Err(Error::NonInjectiveRelation {
            symbol: symbol.to_string(),
            tuple: tuple.clone(),
        });
    }
    if let Some((symbol, tuple)) = small.first_non_injective_tuple() {
        return Err(Error::NonInjectiveRelation {
            symbol: symbol.to_string(),
            tuple: tuple.clone(),
        });
    }
    if !class.membership(target)? {
        return Err(Error::NotAMember {
            detail: "the homomorphism target is not in the class".to_string(),
        });
    }
    if !is_homomorphism(hom, small, target)? {
        return Err(Error::NotAHomomorphism {
            detail: "the given map does not preserve the relations".to_string(),
        });
    }

    let mut current_target = target.clone();
    let mut current_map = hom.to_vec();
    let max_steps = small.size() * small.size() + 1;
    for _ in 0..max_steps {
        let Some((u, _v)) = first_collision(&current_map) else {
            return Ok((current_target, current_map));
        };
        let p = current_map[u];
        let without: BTreeSet<usize> =
            (0..current_target.size()).filter(|&x| x != p).collect();
        let (base, inclusion) = current_target.substructure(&without)?;
        let diagram = AmalgamationDiagram::new(
            base,
            current_target.clone(),
            current_target.clone(),
            inclusion.clone(),
            inclusion,
        )?;
        let Some(amalgam) = first_strong_amalgam(&diagram, class)? else {
            return Err(Error::NoStrongAmalgam {
                base_size: diagram.base.size(),
                left_size: diagram.left.size(),
                right_size: diagram.right.size(),
            });
        };
        // the proof's remapping: everything follows the first copy, the
        // offending element alone crosses into the second copy
        let mut next_map = Vec::with_capacity(current_map.len());
        for (w, &image) in current_map.iter().enumerate() {
            if w == u {
                next_map.push(amalgam.f2.map()[image]);
            } else {
                next_map.push(amalgam.f1.map()[image]);
            }
        }
        current_target = amalgam.completed.clone();
        current_map = next_map;
        debug_assert!(is_homomorphism(&current_map, small, &current_target)?);
    }
    unreachable!("every step strictly reduces the number of collisions")
}

/// The lexicographically least pair (u, v), u < v, with equal images.
fn first_collision(map: &[usize]) -> Option<(usize, usize)> {
    for u in 0..map.len() {
        for v in (u + 1)..map.len() {
            if map[u] == map[v] {
                return Some((u, v));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::classes::ClassSpec;
    use crate::structure::Signature;

    fn diagram(
        base: Structure,
        left: Structure,
        right: Structure,
        m1: Vec<usize>,
        m2: Vec<usize>,
    ) -> AmalgamationDiagram {
        let e1 = Embedding::new(&base, &left, m1).unwrap();
        let e2 = Embedding::new(&base, &right, m2).unwrap();
        AmalgamationDiagram::new(base, left, right, e1, e2).unwrap()
    }

    #[test]
    fn free_amalgam_of_two_edges_is_a_path() {
        let point = catalog::empty_graph(1);
        let k2 = catalog::complete_graph(2);
        let d = diagram(point, k2.clone(), k2, vec![0], vec![0]);
        let amalgam = free_amalgam(&d);
        assert_eq!(amalgam.completed().size(), 3);
        assert!(amalgam.is_strong());
        assert!(crate::canon::is_isomorphic(
            amalgam.completed(),
            &catalog::path_graph(3)
        ));
    }

    #[test]
    fn free_amalgam_of_orders_is_not_an_order() {
        let bottom = catalog::chain(1);
        let two = catalog::chain(2);
        let d = diagram(bottom, two.clone(), two, vec![0], vec![0]);
        let amalgam = free_amalgam(&d);
        assert_eq!(amalgam.completed().size(), 3);
        // two comparabilities only: the cross pair is missing
        assert_eq!(amalgam.completed().tuples("<").unwrap().len(), 2);
        assert!(!ClassSpec::linear_order()
            .membership(amalgam.completed())
            .unwrap());
    }

    #[test]
    fn empty_base_gives_the_disjoint_union() {
        let empty = Structure::new(Signature::binary("E").unwrap(), 0);
        let k2 = catalog::complete_graph(2);
        let p3 = catalog::path_graph(3);
        let d = diagram(empty, k2, p3, vec![], vec![]);
        let amalgam = free_amalgam(&d);
        assert_eq!(amalgam.completed().size(), 5);
        assert_eq!(amalgam.completed().tuples("E").unwrap().len(), 2 + 4);
        assert!(amalgam.is_strong());
    }

    #[test]
    fn strong_amalgams_of_order_diagram() {
        let bottom = catalog::chain(1);
        let two = catalog::chain(2);
        let d = diagram(bottom, two.clone(), two, vec![0], vec![0]);
        let found = find_strong_amalgams(&d, &ClassSpec::linear_order()).unwrap();
        assert_eq!(found.len(), 2); // the two orderings of the fresh points
        for amalgam in &found {
            assert!(amalgam.is_strong());
            assert!(ClassSpec::linear_order()
                .membership(amalgam.completed())
                .unwrap());
        }
    }

    #[test]
    fn graph_diagram_keeps_the_free_amalgam() {
        let point = catalog::empty_graph(1);
        let k2 = catalog::complete_graph(2);
        let d = diagram(point, k2.clone(), k2, vec![0], vec![0]);
        let found = find_strong_amalgams(&d, &ClassSpec::graph()).unwrap();
        // the path (free) and the triangle (cross edge added)
        assert_eq!(found.len(), 2);
        assert!(crate::canon::is_isomorphic(
            found[0].completed(),
            &catalog::path_graph(3)
        ));

        let triangle_free = find_strong_amalgams(&d, &ClassSpec::kn_free(3).unwrap()).unwrap();
        assert_eq!(triangle_free.len(), 1); // the cross edge would close K3
    }

    #[test]
    fn sap_holds_for_small_bounds() {
        assert!(check_sap(&ClassSpec::linear_order(), 2).unwrap().is_ok());
        assert!(check_sap(&ClassSpec::graph(), 2).unwrap().is_ok());
        assert!(check_sap(&ClassSpec::tournament(), 2).unwrap().is_ok());
        assert!(check_jep(&ClassSpec::graph(), 3).unwrap().is_ok());
        assert!(check_ap(&ClassSpec::linear_order(), 2).unwrap().is_ok());
        assert!(check_sap(&ClassSpec::linear_order(), 0).is_err());
    }

    #[test]
    fn injectivize_collapsed_pair_into_order() {
        let edgeless = Structure::new(Signature::binary("<").unwrap(), 2);
        let one = catalog::chain(1);
        let (target, map) =
            injectivize(&[0, 0], &edgeless, &one, &ClassSpec::linear_order()).unwrap();
        assert_eq!(target.size(), 2);
        assert_eq!(map.len(), 2);
        assert_ne!(map[0], map[1]);
        assert!(ClassSpec::linear_order().membership(&target).unwrap());
        assert!(is_homomorphism(&map, &edgeless, &target).unwrap());
    }

    #[test]
    fn injectivize_two_edges_onto_one() {
        // two disjoint edges collapsed onto a single edge
        let two_edges = catalog::graph(4, &[(0, 1), (2, 3)]).unwrap();
        let k2 = catalog::complete_graph(2);
        let hom = vec![0, 1, 0, 1];
        let (target, map) = injectivize(&hom, &two_edges, &k2, &ClassSpec::graph()).unwrap();
        assert_eq!(target.size(), 4);
        let mut sorted = map.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 4); // injective
        assert!(is_homomorphism(&map, &two_edges, &target).unwrap());
        // the original target embeds into the result
        assert!(!enumerate_embeddings(&k2, &target).unwrap().is_empty());
    }

    #[test]
    fn injectivize_rejects_non_injective_relations() {
        let loopy = catalog::empty_graph(2).with_tuple("E", &[0, 0]).unwrap();
        let f = catalog::empty_graph(1);
        let err = injectivize(&[0], &f, &loopy, &ClassSpec::graph()).unwrap_err();
        assert!(matches!(err, Error::NonInjectiveRelation { .. }));
    }

    #[test]
    fn injectivize_keeps_injective_maps_unchanged() {
        let chain = catalog::chain(3);
        let sub = catalog::chain(2);
        let (target, map) =
            injectivize(&[0, 2], &sub, &chain, &ClassSpec::linear_order()).unwrap();
        assert_eq!(target, chain);
        assert_eq!(map, vec![0, 2]);
    }
}

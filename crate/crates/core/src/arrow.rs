//! Partition-arrow verification with certificates.
//!
//! `check_arrow` decides whether every r-coloring of the embeddings of A
//! into C is constant on the A-embeddings into some copy of B. The decision
//! procedure searches for a *bad* coloring — one where every copy of B sees
//! at least two colors — as a not-all-equal constraint problem over the
//! composed embedding sets. A failed arrow therefore comes with a concrete
//! coloring that can be re-validated by a direct scan, independent of the
//! search path that found it.

use std::collections::BTreeMap;

use crate::classes::ClassSpec;
use crate::embed::{enumerate_embeddings, Embedding};
use crate::error::Error;
use crate::formula::{expand_by_formula, is_strict_linear_order, QfFormula};
use crate::structure::Structure;

/// An arrow-check instance `C → (B)^A_r` over a shared signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrowInstance {
    a: Structure,
    b: Structure,
    c: Structure,
    colors: u32,
}

impl ArrowInstance {
    pub fn new(a: Structure, b: Structure, c: Structure, colors: u32) -> Result<Self, Error> {
        if colors == 0 {
            return Err(Error::InvalidClassParameter {
                message: "the number of colors must be at least 1".to_string(),
            });
        }
        if a.sig() != b.sig() || b.sig() != c.sig() {
            return Err(Error::SignatureMismatch {
                context: "arrow instance".to_string(),
            });
        }
        Ok(ArrowInstance { a, b, c, colors })
    }

    pub fn small(&self) -> &Structure {
        &self.a
    }

    pub fn medium(&self) -> &Structure {
        &self.b
    }

    pub fn large(&self) -> &Structure {
        &self.c
    }

    pub fn colors(&self) -> u32 {
        self.colors
    }
}

/// Outcome of an arrow check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ArrowVerdict {
    /// The arrow holds; `exhausted` records that the bad-coloring search
    /// refuted its entire tree.
    Holds { exhausted: bool },
    /// The arrow fails; the coloring (indexed by the enumeration order of
    /// the A-into-C embeddings) leaves no monochromatic copy of B.
    Fails { coloring: Vec<u32> },
}

impl ArrowVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, ArrowVerdict::Holds { .. })
    }
}

/// Verdict plus the data needed to re-check it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrowCertificate {
    pub verdict: ArrowVerdict,
}

impl ArrowCertificate {
    pub fn holds(&self) -> bool {
        self.verdict.holds()
    }
}

/// Which fails-certificate the search returns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CertificateMode {
    /// The first bad coloring in search order (first embedding pinned to
    /// color 0 as a symmetry break).
    #[default]
    FirstFound,
    /// The lexicographically least bad coloring; slower, fully canonical.
    Lexicographic,
}

/// Decides the arrow with the default certificate mode.
pub fn check_arrow(instance: &ArrowInstance) -> Result<ArrowCertificate, Error> {
    check_arrow_with(instance, CertificateMode::FirstFound)
}

/// Decides the arrow. The boolean verdict never depends on the mode.
pub fn check_arrow_with(
    instance: &ArrowInstance,
    mode: CertificateMode,
) -> Result<ArrowCertificate, Error> {
    let emb_ac = enumerate_embeddings(&instance.a, &instance.c)?;
    let emb_bc = enumerate_embeddings(&instance.b, &instance.c)?;
    let emb_ab = enumerate_embeddings(&instance.a, &instance.b)?;

    // No copy of B at all: every coloring is bad, even the empty one.
    if emb_bc.is_empty() {
        return Ok(ArrowCertificate {
            verdict: ArrowVerdict::Fails {
                coloring: vec![0; emb_ac.len()],
            },
        });
    }
    // A does not embed into B: the composed set is empty and a coloring is
    // vacuously constant on it, so any copy of B is monochromatic.
    if emb_ab.is_empty() {
        return Ok(ArrowCertificate {
            verdict: ArrowVerdict::Holds { exhausted: false },
        });
    }
    // One color is constant everywhere.
    if instance.colors == 1 {
        return Ok(ArrowCertificate {
            verdict: ArrowVerdict::Holds { exhausted: false },
        });
    }

    let sets = composed_sets(&emb_ac, &emb_bc, &emb_ab);
    let found = match mode {
        CertificateMode::FirstFound => {
            BadColoringSearch::new(emb_ac.len(), instance.colors, &sets, true).run()
        }
        CertificateMode::Lexicographic => LexSearch {
            vars: emb_ac.len(),
            colors: instance.colors,
            sets: &sets,
        }
        .run(),
    };
    Ok(ArrowCertificate {
        verdict: match found {
            Some(coloring) => ArrowVerdict::Fails { coloring },
            None => ArrowVerdict::Holds { exhausted: true },
        },
    })
}

/// For each f in Emb(B,C), the sorted indices (into the Emb(A,C) order) of
/// the composed maps {f ∘ e : e in Emb(A,B)}.
fn composed_sets(
    emb_ac: &[Embedding],
    emb_bc: &[Embedding],
    emb_ab: &[Embedding],
) -> Vec<Vec<usize>> {
    let index_of: BTreeMap<&[usize], usize> = emb_ac
        .iter()
        .enumerate()
        .map(|(i, e)| (e.map(), i))
        .collect();
    emb_bc
        .iter()
        .map(|f| {
            let mut set: Vec<usize> = emb_ab
                .iter()
                .map(|e| {
                    let composed: Vec<usize> = e.map().iter().map(|&v| f.map()[v]).collect();
                    *index_of
                        .get(composed.as_slice())
                        .expect("a composition of embeddings is an embedding")
                })
                .collect();
            set.sort_unstable();
            set.dedup();
            set
        })
        .collect()
}

/// Backtracking search for a coloring in which every composed set sees at
/// least two colors. Variables are embedding indices; the next variable is
/// picked from the most endangered set (monochromatic so far with the
/// fewest unassigned slots), which is what makes the tight instances cheap.
struct BadColoringSearch<'a> {
    colors: u32,
    sets: &'a [Vec<usize>],
    assignment: Vec<Option<u32>>,
    /// sets containing each variable
    sets_of_var: Vec<Vec<usize>>,
    symmetry_break: bool,
}

impl<'a> BadColoringSearch<'a> {
    fn new(vars: usize, colors: u32, sets: &'a [Vec<usize>], symmetry_break: bool) -> Self {
        let mut sets_of_var = vec![Vec::new(); vars];
        for (si, set) in sets.iter().enumerate() {
            for &v in set {
                sets_of_var[v].push(si);
            }
        }
        BadColoringSearch {
            colors,
            sets,
            assignment: vec![None; vars],
            sets_of_var,
            symmetry_break,
        }
    }

    fn run(mut self) -> Option<Vec<u32>> {
        // a singleton set can never see two colors
        if self.sets.iter().any(|s| s.len() <= 1) {
            return None;
        }
        if self.step() {
            Some(self.assignment.iter().map(|c| c.expect("complete")).collect())
        } else {
            None
        }
    }

    /// True when some set is fully assigned and constant.
    fn violated(&self, var: usize) -> bool {
        for &si in &self.sets_of_var[var] {
            let set = &self.sets[si];
            let mut first: Option<u32> = None;
            let mut constant = true;
            for &v in set {
                match self.assignment[v] {
                    None => {
                        constant = false;
                        break;
                    }
                    Some(c) => match first {
                        None => first = Some(c),
                        Some(f) if f != c => {
                            constant = false;
                            break;
                        }
                        Some(_) => {}
                    },
                }
            }
            if constant {
                return true;
            }
        }
        false
    }

    fn pick_variable(&self) -> Option<usize> {
        // most endangered set first: monochromatic so far, fewest unassigned
        let mut best: Option<(usize, usize)> = None; // (unassigned count, var)
        for set in self.sets {
            let mut unassigned = Vec::new();
            let mut seen: Option<u32> = None;
            let mut mono = true;
            for &v in set {
                match self.assignment[v] {
                    None => unassigned.push(v),
                    Some(c) => match seen {
                        None => seen = Some(c),
                        Some(f) if f != c => {
                            mono = false;
                            break;
                        }
                        Some(_) => {}
                    },
                }
            }
            if !mono || unassigned.is_empty() {
                continue;
            }
            let candidate = (unassigned.len(), unassigned[0]);
            if best.is_none_or(|b| candidate < b) {
                best = Some(candidate);
            }
        }
        if let Some((_, var)) = best {
            return Some(var);
        }
        self.assignment.iter().position(|a| a.is_none())
    }

    fn step(&mut self) -> bool {
        let var = match self.pick_variable() {
            Some(v) => v,
            None => return true, // complete; sets were checked incrementally
        };
        let color_limit = if self.symmetry_break && self.assignment.iter().all(|a| a.is_none()) {
            1 // pin the first assigned variable to color 0
        } else {
            self.colors
        };
        for color in 0..color_limit {
            self.assignment[var] = Some(color);
            if !self.violated(var) && self.step() {
                return true;
            }
            self.assignment[var] = None;
        }
        false
    }
}

/// Lexicographic variant: assigns variables in index order, colors
/// ascending; the first solution is the least bad coloring.
struct LexSearch<'a> {
    vars: usize,
    colors: u32,
    sets: &'a [Vec<usize>],
}

impl LexSearch<'_> {
    fn run(&self) -> Option<Vec<u32>> {
        if self.sets.iter().any(|s| s.len() <= 1) {
            return None;
        }
        let mut assignment: Vec<Option<u32>> = vec![None; self.vars];
        if self.extend(&mut assignment, 0) {
            Some(assignment.iter().map(|c| c.unwrap_or(0)).collect())
        } else {
            None
        }
    }

    fn extend(&self, assignment: &mut Vec<Option<u32>>, var: usize) -> bool {
        if var == assignment.len() {
            return self.sets.iter().all(|set| {
                let first = assignment[set[0]];
                set.iter().any(|&v| assignment[v] != first)
            });
        }
        for color in 0..self.colors {
            assignment[var] = Some(color);
            let dead = self.sets.iter().any(|set| {
                set.iter().all(|&v| assignment[v].is_some())
                    && set
                        .iter()
                        .all(|&v| assignment[v] == assignment[set[0]])
            });
            if !dead && self.extend(assignment, var + 1) {
                return true;
            }
        }
        assignment[var] = None;
        false
    }
}

/// Re-validates a fails-certificate by a direct scan over all copies of B:
/// the coloring must leave every composed set non-constant. Independent of
/// the search that produced the certificate.
pub fn validate_bad_coloring(instance: &ArrowInstance, coloring: &[u32]) -> Result<bool, Error> {
    let emb_ac = enumerate_embeddings(&instance.a, &instance.c)?;
    check_coloring_values(instance, coloring, emb_ac.len())?;
    let emb_bc = enumerate_embeddings(&instance.b, &instance.c)?;
    let emb_ab = enumerate_embeddings(&instance.a, &instance.b)?;
    let index_of: BTreeMap<&[usize], usize> = emb_ac
        .iter()
        .enumerate()
        .map(|(i, e)| (e.map(), i))
        .collect();
    for f in &emb_bc {
        let mut colors_seen = Vec::new();
        for e in &emb_ab {
            let composed: Vec<usize> = e.map().iter().map(|&v| f.map()[v]).collect();
            let idx = *index_of
                .get(composed.as_slice())
                .expect("composition is an embedding");
            colors_seen.push(coloring[idx]);
        }
        // an empty or single-color set is monochromatic: certificate invalid
        if colors_seen.windows(2).all(|w| w[0] == w[1]) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn check_coloring_values(
    instance: &ArrowInstance,
    coloring: &[u32],
    expected_len: usize,
) -> Result<(), Error> {
    if coloring.len() != expected_len {
        return Err(Error::InvalidColoring {
            detail: format!(
                "coloring covers {} embeddings, expected {expected_len}",
                coloring.len()
            ),
        });
    }
    if let Some(&c) = coloring.iter().find(|&&c| c >= instance.colors) {
        return Err(Error::InvalidColoring {
            detail: format!("color {c} out of range (r = {})", instance.colors),
        });
    }
    Ok(())
}

/// The first copy of B (in enumeration order) on which the coloring is
/// constant, or `None`. A copy with an empty composed set counts as
/// monochromatic (the coloring is vacuously constant on it).
pub fn find_mono_copy(
    instance: &ArrowInstance,
    coloring: &[u32],
) -> Result<Option<Embedding>, Error> {
    let emb_ac = enumerate_embeddings(&instance.a, &instance.c)?;
    check_coloring_values(instance, coloring, emb_ac.len())?;
    let emb_bc = enumerate_embeddings(&instance.b, &instance.c)?;
    let emb_ab = enumerate_embeddings(&instance.a, &instance.b)?;
    let index_of: BTreeMap<&[usize], usize> = emb_ac
        .iter()
        .enumerate()
        .map(|(i, e)| (e.map(), i))
        .collect();
    for f in emb_bc {
        let mut first: Option<u32> = None;
        let mut constant = true;
        for e in &emb_ab {
            let composed: Vec<usize> = e.map().iter().map(|&v| f.map()[v]).collect();
            let idx = *index_of
                .get(composed.as_slice())
                .expect("composition is an embedding");
            match first {
                None => first = Some(coloring[idx]),
                Some(c) if c != coloring[idx] => {
                    constant = false;
                    break;
                }
                Some(_) => {}
            }
        }
        if constant {
            return Ok(Some(f));
        }
    }
    Ok(None)
}

/// Scans the members of a class in size order (and canonical order within a
/// size) for the first structure C with `C → (B)^A_r`.
pub fn search_witness(
    class: &ClassSpec,
    a: &Structure,
    b: &Structure,
    colors: u32,
    max_size: usize,
) -> Result<Option<Structure>, Error> {
    if !class.membership(a)? {
        return Err(Error::NotAMember {
            detail: "the small structure A is not in the class".to_string(),
        });
    }
    if !class.membership(b)? {
        return Err(Error::NotAMember {
            detail: "the structure B is not in the class".to_string(),
        });
    }
    if max_size < b.size() {
        return Err(Error::InvalidClassParameter {
            message: format!(
                "max size {max_size} is smaller than |B| = {}",
                b.size()
            ),
        });
    }
    for n in b.size()..=max_size {
        for candidate in class.enumerate_members(n) {
            let instance = ArrowInstance::new(a.clone(), b.clone(), candidate.clone(), colors)?;
            if check_arrow(&instance)?.holds() {
                return Ok(Some(candidate));
            }
        }
    }
    Ok(None)
}

/// Report of a reduct-transfer check: the arrow verdict before and after
/// expanding all three structures by the order defined by a formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransferReport {
    pub base: ArrowCertificate,
    pub expanded: ArrowCertificate,
    pub verdicts_agree: bool,
    pub embedding_sets_equal: bool,
}

/// Expands A, B, C by the relation defined by `phi` under a fresh symbol,
/// checks the arrow on both the expanded and the original instance, and
/// reports whether the verdicts agree and whether the embedding sets
/// Emb(A,C) and Emb(A',C') coincide as sets of maps. The formula must
/// define a strict linear order on each input.
pub fn transfer_check(
    a: &Structure,
    b: &Structure,
    c: &Structure,
    phi: &QfFormula,
    name: &str,
    colors: u32,
) -> Result<TransferReport, Error> {
    let expand = |s: &Structure, which: &str| -> Result<Structure, Error> {
        let expanded = expand_by_formula(s, phi, name)?;
        if !is_strict_linear_order(&expanded, name)? {
            return Err(Error::FormulaNotOrder {
                which: which.to_string(),
            });
        }
        Ok(expanded)
    };
    let a2 = expand(a, "A")?;
    let b2 = expand(b, "B")?;
    let c2 = expand(c, "C")?;

    let base_instance = ArrowInstance::new(a.clone(), b.clone(), c.clone(), colors)?;
    let expanded_instance = ArrowInstance::new(a2.clone(), b2, c2.clone(), colors)?;
    let base = check_arrow(&base_instance)?;
    let expanded = check_arrow(&expanded_instance)?;

    let maps = |x: &Structure, y: &Structure| -> Result<Vec<Vec<usize>>, Error> {
        Ok(enumerate_embeddings(x, y)?
            .into_iter()
            .map(|e| e.map().to_vec())
            .collect())
    };
    let embedding_sets_equal = maps(a, c)? == maps(&a2, &c2)?;
    let verdicts_agree = base.holds() == expanded.holds();
    Ok(TransferReport {
        base,
        expanded,
        verdicts_agree,
        embedding_sets_equal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::formula::parse_formula;

    fn chains(a: usize, b: usize, c: usize, r: u32) -> ArrowInstance {
        ArrowInstance::new(catalog::chain(a), catalog::chain(b), catalog::chain(c), r).unwrap()
    }

    #[test]
    fn one_color_always_holds_with_a_copy() {
        let cert = check_arrow(&chains(2, 3, 4, 1)).unwrap();
        assert!(cert.holds());
    }

    #[test]
    fn no_copy_of_b_fails() {
        let cert = check_arrow(&chains(2, 5, 4, 2)).unwrap();
        match cert.verdict {
            ArrowVerdict::Fails { ref coloring } => {
                assert_eq!(coloring.len(), 6); // C(4,2)
                assert!(validate_bad_coloring(&chains(2, 5, 4, 2), coloring).unwrap());
            }
            _ => panic!("expected fails"),
        }
    }

    #[test]
    fn vacuous_composed_sets_hold() {
        // A does not embed into B, but B embeds into C
        let a = catalog::complete_graph(2);
        let b = catalog::empty_graph(2);
        let c = catalog::graph(3, &[(0, 1)]).unwrap();
        // b (edgeless pair) does embed into c? c has an edge; the edgeless
        // pair embeds via the two non-adjacent vertices (0,2)/(1,2)… it does.
        let instance = ArrowInstance::new(a, b, c, 2).unwrap();
        assert!(check_arrow(&instance).unwrap().holds());
    }

    #[test]
    fn self_arrow_for_rigid_structures() {
        for r in 1..4 {
            let inst = chains(3, 3, 3, r);
            assert!(check_arrow(&inst).unwrap().holds());
        }
    }

    #[test]
    fn pigeonhole_on_points() {
        // coloring points of a 2-chain with 2 colors cannot be constant on
        // singletons twice over… sanity: 1-chain into 2-chain, r=2: two
        // copies of B, each a single point; a bad coloring must make each
        // point set non-constant, impossible for singletons
        let cert = check_arrow(&chains(1, 1, 2, 2)).unwrap();
        assert!(cert.holds());
    }

    #[test]
    fn parity_coloring_has_a_monochromatic_triple() {
        let inst = chains(2, 3, 6, 2);
        let emb = enumerate_embeddings(inst.small(), inst.large()).unwrap();
        let coloring: Vec<u32> = emb.iter().map(|e| (e.map()[0] % 2) as u32).collect();
        // pairs of [0,2,3] are colored by first elements 0, 0, 2: all even
        let copy = find_mono_copy(&inst, &coloring).unwrap().expect("mono triple");
        assert_eq!(copy.map(), &[0, 2, 3]);
    }

    #[test]
    fn constant_coloring_returns_first_copy() {
        let inst = chains(2, 3, 4, 2);
        let emb_count = enumerate_embeddings(inst.small(), inst.large()).unwrap().len();
        let coloring = vec![0u32; emb_count];
        let copy = find_mono_copy(&inst, &coloring).unwrap().unwrap();
        assert_eq!(copy.map(), &[0, 1, 2]);
    }

    #[test]
    fn coloring_validation_errors() {
        let inst = chains(2, 3, 4, 2);
        assert!(find_mono_copy(&inst, &[0]).is_err());
        let emb_count = enumerate_embeddings(inst.small(), inst.large()).unwrap().len();
        assert!(find_mono_copy(&inst, &vec![5u32; emb_count]).is_err());
    }

    #[test]
    fn transfer_on_chains_is_trivially_consistent() {
        let a = catalog::chain(2);
        let b = catalog::chain(3);
        let c = catalog::chain(5);
        let phi = parse_formula("<(x,y)", a.sig()).unwrap();
        let report = transfer_check(&a, &b, &c, &phi, "<2", 2).unwrap();
        assert!(report.verdicts_agree);
        assert!(report.embedding_sets_equal);
    }

    #[test]
    fn transfer_rejects_non_orders() {
        let g = catalog::path_graph(3);
        let phi = parse_formula("E(x,y)", g.sig()).unwrap();
        let err = transfer_check(&g, &g, &g, &phi, "o", 2).unwrap_err();
        assert!(matches!(err, Error::FormulaNotOrder { .. }));
    }

    #[test]
    fn lexicographic_certificate_is_minimal() {
        let inst = chains(2, 3, 5, 2);
        let cert = check_arrow_with(&inst, CertificateMode::Lexicographic).unwrap();
        match cert.verdict {
            ArrowVerdict::Fails { coloring } => {
                assert!(validate_bad_coloring(&inst, &coloring).unwrap());
                assert_eq!(coloring[0], 0);
                // no bad coloring below it: flipping any prefix to something
                // smaller is impossible since colors are tried ascending; we
                // at least confirm determinism
                let again = check_arrow_with(&inst, CertificateMode::Lexicographic).unwrap();
                assert_eq!(
                    ArrowVerdict::Fails { coloring },
                    again.verdict
                );
            }
            _ => panic!("expected fails"),
        }
    }
}

//! The full product of two structures with disjoint signatures.
//!
//! The domain is the pair set D1 × D2, flattened row-major by
//! `index(a, b) = a·|D2| + b`. A tuple of pairs is related under a symbol of
//! the left signature exactly when its first-coordinate projection is
//! related in the left factor, with the second coordinates free; symbols of
//! the right signature read second coordinates.

use std::collections::BTreeSet;

use crate::canon::is_isomorphic;
use crate::classes::all_tuples_over;
use crate::error::Error;
use crate::structure::Structure;

/// A full product, remembering the factor sizes so that flat indices can be
/// rendered as pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductStructure {
    structure: Structure,
    left_size: usize,
    right_size: usize,
}

impl ProductStructure {
    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn into_structure(self) -> Structure {
        self.structure
    }

    pub fn left_size(&self) -> usize {
        self.left_size
    }

    pub fn right_size(&self) -> usize {
        self.right_size
    }

    pub fn index_of_pair(&self, a: usize, b: usize) -> usize {
        a * self.right_size + b
    }

    pub fn pair_of_index(&self, index: usize) -> (usize, usize) {
        (index / self.right_size, index % self.right_size)
    }
}

/// Builds the full product of two structures with disjoint signatures.
pub fn full_product(left: &Structure, right: &Structure) -> Result<ProductStructure, Error> {
    let sig = left.sig().union(right.sig())?;
    let n1 = left.size();
    let n2 = right.size();
    let mut out = Structure::new(sig, n1 * n2);
    for sym in left.sig().symbols() {
        let arity = sym.arity();
        for tuple in left.tuples(sym.name())? {
            for free in all_tuples_over(n2, arity) {
                let flat: Vec<usize> = tuple
                    .iter()
                    .zip(free.iter())
                    .map(|(&a, &b)| a * n2 + b)
                    .collect();
                out.add_tuple(sym.name(), &flat)?;
            }
        }
    }
    for sym in right.sig().symbols() {
        let arity = sym.arity();
        for tuple in right.tuples(sym.name())? {
            for free in all_tuples_over(n1, arity) {
                let flat: Vec<usize> = free
                    .iter()
                    .zip(tuple.iter())
                    .map(|(&a, &b)| a * n2 + b)
                    .collect();
                out.add_tuple(sym.name(), &flat)?;
            }
        }
    }
    Ok(ProductStructure {
        structure: out,
        left_size: n1,
        right_size: n2,
    })
}

/// Splits `g` by the signature partition (σ, τ), forms the full product of
/// the two reducts, and checks that the substructure induced on the diagonal
/// `{(d, d)}` is isomorphic to `g`. This holds for every structure and every
/// partition; the function recomputes it instead of assuming it.
pub fn diagonal_check(
    g: &Structure,
    sigma: &BTreeSet<String>,
    tau: &BTreeSet<String>,
) -> Result<bool, Error> {
    if !sigma.is_disjoint(tau) {
        let shared = sigma.intersection(tau).next().cloned().unwrap_or_default();
        return Err(Error::NotAPartition {
            detail: format!("symbol {shared:?} appears on both sides"),
        });
    }
    let all: BTreeSet<String> = g.sig().names().map(String::from).collect();
    let union: BTreeSet<String> = sigma.union(tau).cloned().collect();
    if union != all {
        return Err(Error::NotAPartition {
            detail: "sigma and tau together must cover exactly the signature".to_string(),
        });
    }
    let left = g.reduct(sigma)?;
    let right = g.reduct(tau)?;
    let product = full_product(&left, &right)?;
    let n = g.size();
    let diagonal: BTreeSet<usize> = (0..n).map(|d| product.index_of_pair(d, d)).collect();
    let (induced, _) = product.structure().substructure(&diagonal)?;
    Ok(is_isomorphic(&induced, g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::embed::automorphisms;
    use crate::structure::{Signature, Structure};

    #[test]
    fn chain_times_chain() {
        let left = catalog::chain(2);
        let right = catalog::chain_named(2, "<2");
        let p = full_product(&left, &right).unwrap();
        assert_eq!(p.structure().size(), 4);
        // first-coordinate order: all pairs (0,b) < (1,b')
        assert_eq!(p.structure().tuples("<").unwrap().len(), 4);
        assert_eq!(p.structure().tuples("<2").unwrap().len(), 4);
        assert_eq!(p.index_of_pair(1, 0), 2);
        assert_eq!(p.pair_of_index(3), (1, 1));
    }

    #[test]
    fn unit_factor_adjoins_empty_relations() {
        let g = catalog::complete_graph(3);
        let unit = Structure::new(Signature::binary("R").unwrap(), 1);
        let p = full_product(&g, &unit).unwrap();
        assert_eq!(p.structure().size(), 3);
        assert_eq!(p.structure().tuples("E").unwrap(), g.tuples("E").unwrap());
        assert!(p.structure().tuples("R").unwrap().is_empty());
    }

    #[test]
    fn domain_sizes_multiply() {
        let left = catalog::chain(3);
        let right = catalog::graph(4, &[(0, 1)]).unwrap();
        let p = full_product(&left, &right).unwrap();
        assert_eq!(p.structure().size(), 12);
        // relation count law: |R'| = |R| * n2^k for left symbols
        assert_eq!(p.structure().tuples("<").unwrap().len(), 3 * 16);
        assert_eq!(p.structure().tuples("E").unwrap().len(), 2 * 9);
    }

    #[test]
    fn overlapping_signatures_are_rejected() {
        let a = catalog::chain(2);
        let b = catalog::chain(2);
        assert!(full_product(&a, &b).is_err());
    }

    #[test]
    fn diagonal_of_a_permutation_structure() {
        let perm = catalog::permutation_structure(&[1, 0]).unwrap();
        let sigma: BTreeSet<String> = ["a.<".to_string()].into();
        let tau: BTreeSet<String> = ["b.<".to_string()].into();
        assert!(diagonal_check(&perm, &sigma, &tau).unwrap());

        // degenerate partition: sigma empty
        let empty = BTreeSet::new();
        let all: BTreeSet<String> = ["a.<".to_string(), "b.<".to_string()].into();
        assert!(diagonal_check(&perm, &empty, &all).unwrap());

        // not a partition
        assert!(diagonal_check(&perm, &all, &all).is_err());
        assert!(diagonal_check(&perm, &sigma, &sigma).is_err());
    }

    #[test]
    fn ordered_product_is_rigid() {
        let g1 = catalog::chain(3);
        let g2 = catalog::chain_named(2, "lt2");
        let p = full_product(&g1, &g2).unwrap();
        assert_eq!(automorphisms(p.structure()).unwrap().len(), 1);
    }
}

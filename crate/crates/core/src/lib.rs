//! Desk-scale combinatorics of classes of finite relational structures:
//! embeddings and canonical forms, partition-arrow verification with
//! certificates, amalgamation diagrams with strong-amalgam search, the
//! wedge and forget class combinators, full products, and definable-order
//! expansions.
//!
//! Everything is exact and deterministic: searches are exhaustive within
//! documented bounds, repeated runs produce identical output, and negative
//! verdicts come with independently checkable certificates.

pub mod amalgam;
pub mod arrow;
pub mod canon;
pub mod catalog;
pub mod classes;
pub mod cli;
pub mod embed;
pub mod error;
pub mod formula;
pub mod product;
pub mod structure;
pub mod text;

pub use amalgam::{
    check_ap, check_jep, check_sap, find_strong_amalgams, free_amalgam, injectivize, Amalgam,
    AmalgamationDiagram, PropertyCheck,
};
pub use arrow::{
    check_arrow, check_arrow_with, find_mono_copy, search_witness, transfer_check,
    ArrowCertificate, ArrowInstance, ArrowVerdict, CertificateMode, TransferReport,
};
pub use canon::{canonical_form, canonical_representative, is_isomorphic, CanonicalForm};
pub use classes::{BuiltinClass, ClassSpec};
pub use embed::{automorphisms, count_embeddings, enumerate_embeddings, Embedding};
pub use error::Error;
pub use formula::{expand_by_formula, is_strict_linear_order, parse_formula, QfFormula, Var};
pub use product::{diagonal_check, full_product, ProductStructure};
pub use structure::{is_homomorphism, RelationSymbol, Signature, Structure};
pub use text::{parse_map, parse_structure, render_map, render_structure};

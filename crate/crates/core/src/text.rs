//! The line-based text format for structures, plus map files.
//!
//! ```text
//! # a comment
//! signature: E/2, </2
//! size: 3
//! E: 0 1; 1 0
//! <: 0 1; 0 2; 1 2
//! ```
//!
//! `#`-prefixed lines and blank lines are ignored. A symbol absent from the
//! body has the empty relation. Duplicate tuples, arity mismatches and
//! out-of-range entries are parse errors. Rendering emits symbols in
//! signature order and tuples in lexicographic order, so render ∘ parse and
//! parse ∘ render are stable.

use std::fmt::Write as _;

use crate::error::Error;
use crate::structure::{valid_symbol_name, Signature, Structure};

/// Parses a structure from its text representation.
pub fn parse_structure(input: &str) -> Result<Structure, Error> {
    let mut lines = input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (sig_line_no, sig_line) = lines.next().ok_or(Error::TextFormat {
        line: 0,
        message: "missing 'signature:' line".to_string(),
    })?;
    let sig_body = sig_line
        .strip_prefix("signature:")
        .ok_or_else(|| Error::TextFormat {
            line: sig_line_no,
            message: format!("expected 'signature: …', got {sig_line:?}"),
        })?;
    let sig = parse_signature_body(sig_body, sig_line_no)?;

    let (size_line_no, size_line) = lines.next().ok_or(Error::TextFormat {
        line: sig_line_no,
        message: "missing 'size:' line".to_string(),
    })?;
    let size_body = size_line
        .strip_prefix("size:")
        .ok_or_else(|| Error::TextFormat {
            line: size_line_no,
            message: format!("expected 'size: N', got {size_line:?}"),
        })?;
    let size: usize = size_body.trim().parse().map_err(|_| Error::TextFormat {
        line: size_line_no,
        message: format!("invalid size {:?}", size_body.trim()),
    })?;

    let mut structure = Structure::new(sig, size);
    for (line_no, line) in lines {
        let (name, body) = line.split_once(':').ok_or_else(|| Error::TextFormat {
            line: line_no,
            message: format!("expected 'SYMBOL: tuples', got {line:?}"),
        })?;
        let name = name.trim();
        if !structure.sig().contains(name) {
            return Err(Error::TextFormat {
                line: line_no,
                message: format!("unknown symbol {name:?}"),
            });
        }
        for tuple_text in body.split(';') {
            let tuple_text = tuple_text.trim();
            if tuple_text.is_empty() {
                continue;
            }
            let mut tuple = Vec::new();
            for entry in tuple_text.split_whitespace() {
                let value: usize = entry.parse().map_err(|_| Error::TextFormat {
                    line: line_no,
                    message: format!("invalid element {entry:?}"),
                })?;
                tuple.push(value);
            }
            if structure.has_tuple(name, &tuple) {
                return Err(Error::TextFormat {
                    line: line_no,
                    message: format!("duplicate tuple {tuple:?} for symbol {name:?}"),
                });
            }
            structure.add_tuple(name, &tuple).map_err(|e| Error::TextFormat {
                line: line_no,
                message: e.to_string(),
            })?;
        }
    }
    Ok(structure)
}

fn parse_signature_body(body: &str, line: usize) -> Result<Signature, Error> {
    let body = body.trim();
    if body.is_empty() {
        return Ok(Signature::empty());
    }
    let mut pairs = Vec::new();
    for part in body.split(',') {
        let part = part.trim();
        let (name, arity_text) = part.rsplit_once('/').ok_or_else(|| Error::TextFormat {
            line,
            message: format!("expected 'NAME/ARITY', got {part:?}"),
        })?;
        let name = name.trim();
        if !valid_symbol_name(name) {
            return Err(Error::TextFormat {
                line,
                message: format!("invalid symbol name {name:?}"),
            });
        }
        let arity: usize = arity_text.trim().parse().map_err(|_| Error::TextFormat {
            line,
            message: format!("invalid arity {:?}", arity_text.trim()),
        })?;
        pairs.push((name.to_string(), arity));
    }
    Signature::new(pairs).map_err(|e| Error::TextFormat {
        line,
        message: e.to_string(),
    })
}

/// Renders a structure in the text format. Symbols appear in signature
/// order; symbols with empty relations are omitted from the body.
pub fn render_structure(s: &Structure) -> String {
    let mut out = String::new();
    let sig_items: Vec<String> = s
        .sig()
        .symbols()
        .iter()
        .map(|sym| format!("{}/{}", sym.name(), sym.arity()))
        .collect();
    if sig_items.is_empty() {
        out.push_str("signature:\n");
    } else {
        writeln!(out, "signature: {}", sig_items.join(", ")).expect("string write");
    }
    writeln!(out, "size: {}", s.size()).expect("string write");
    for sym in s.sig().symbols() {
        let tuples = s.tuples(sym.name()).expect("symbol from signature");
        if tuples.is_empty() {
            continue;
        }
        let rendered: Vec<String> = tuples
            .iter()
            .map(|t| {
                t.iter()
                    .map(|e| e.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        writeln!(out, "{}: {}", sym.name(), rendered.join("; ")).expect("string write");
    }
    out
}

/// Parses a map file: one line `i -> j` per source element, every element of
/// `{0, …, source_size−1}` present exactly once.
pub fn parse_map(input: &str, source_size: usize) -> Result<Vec<usize>, Error> {
    let mut map: Vec<Option<usize>> = vec![None; source_size];
    for (i, raw) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (left, right) = line.split_once("->").ok_or_else(|| Error::MapFile {
            line: line_no,
            message: format!("expected 'i -> j', got {line:?}"),
        })?;
        let from: usize = left.trim().parse().map_err(|_| Error::MapFile {
            line: line_no,
            message: format!("invalid source element {:?}", left.trim()),
        })?;
        let to: usize = right.trim().parse().map_err(|_| Error::MapFile {
            line: line_no,
            message: format!("invalid target element {:?}", right.trim()),
        })?;
        if from >= source_size {
            return Err(Error::MapFile {
                line: line_no,
                message: format!("source element {from} out of range (size {source_size})"),
            });
        }
        if map[from].is_some() {
            return Err(Error::MapFile {
                line: line_no,
                message: format!("source element {from} mapped twice"),
            });
        }
        map[from] = Some(to);
    }
    map.into_iter()
        .enumerate()
        .map(|(i, v)| {
            v.ok_or_else(|| Error::MapFile {
                line: 0,
                message: format!("missing line for source element {i}"),
            })
        })
        .collect()
}

/// Renders a map as `i -> j` lines.
pub fn render_map(map: &[usize]) -> String {
    let mut out = String::new();
    for (i, &j) in map.iter().enumerate() {
        writeln!(out, "{i} -> {j}").expect("string write");
    }
    out
}

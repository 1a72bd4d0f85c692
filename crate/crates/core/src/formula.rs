//! Quantifier-free two-variable formulas and definitional expansion.
//!
//! Formulas are built from atoms `R(x,y)`, `R(y,x)`, `R(x,x)`, `R(y,y)` (for
//! binary `R`) and `x=y`, closed under `!`, `&`, `|` with precedence
//! `! > & > |`. Two variables and binary atoms are all that a definable
//! binary order needs, so nothing more is supported.

use std::fmt;

use crate::error::Error;
use crate::structure::{valid_symbol_name, Signature, Structure};

/// One of the two formula variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X => write!(f, "x"),
            Var::Y => write!(f, "y"),
        }
    }
}

/// A quantifier-free formula in the variables `x` and `y`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum QfFormula {
    /// `R(v, w)` for a binary relation symbol `R`.
    Rel { symbol: String, left: Var, right: Var },
    /// `v = w`.
    Eq(Var, Var),
    Not(Box<QfFormula>),
    And(Box<QfFormula>, Box<QfFormula>),
    Or(Box<QfFormula>, Box<QfFormula>),
}

impl QfFormula {
    /// Evaluates the formula on a structure at the pair `(a, b)`, with `x`
    /// bound to `a` and `y` bound to `b`.
    pub fn evaluate(&self, s: &Structure, a: usize, b: usize) -> Result<bool, Error> {
        if a >= s.size() {
            return Err(Error::ElementOutOfRange {
                element: a,
                size: s.size(),
            });
        }
        if b >= s.size() {
            return Err(Error::ElementOutOfRange {
                element: b,
                size: s.size(),
            });
        }
        self.eval_inner(s, a, b)
    }

    fn eval_inner(&self, s: &Structure, a: usize, b: usize) -> Result<bool, Error> {
        let bind = |v: Var| match v {
            Var::X => a,
            Var::Y => b,
        };
        match self {
            QfFormula::Rel { symbol, left, right } => {
                match s.sig().arity_of(symbol) {
                    Some(2) => {}
                    Some(_) | None => {
                        return Err(Error::UnknownSymbol {
                            name: symbol.clone(),
                        })
                    }
                }
                Ok(s.has_tuple(symbol, &[bind(*left), bind(*right)]))
            }
            QfFormula::Eq(l, r) => Ok(bind(*l) == bind(*r)),
            QfFormula::Not(inner) => Ok(!inner.eval_inner(s, a, b)?),
            QfFormula::And(l, r) => Ok(l.eval_inner(s, a, b)? && r.eval_inner(s, a, b)?),
            QfFormula::Or(l, r) => Ok(l.eval_inner(s, a, b)? || r.eval_inner(s, a, b)?),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            QfFormula::Or(..) => 0,
            QfFormula::And(..) => 1,
            QfFormula::Not(..) => 2,
            QfFormula::Rel { .. } | QfFormula::Eq(..) => 3,
        }
    }

    fn render_at(&self, ctx: u8, out: &mut String) {
        let me = self.precedence();
        let parens = me < ctx;
        if parens {
            out.push('(');
        }
        match self {
            QfFormula::Rel { symbol, left, right } => {
                out.push_str(symbol);
                out.push('(');
                out.push_str(&left.to_string());
                out.push(',');
                out.push_str(&right.to_string());
                out.push(')');
            }
            QfFormula::Eq(l, r) => {
                out.push_str(&l.to_string());
                out.push('=');
                out.push_str(&r.to_string());
            }
            QfFormula::Not(inner) => {
                out.push('!');
                inner.render_at(2, out);
            }
            // left-associative: the left child may sit at the same level,
            // the right child needs strictly higher precedence
            QfFormula::And(l, r) => {
                l.render_at(1, out);
                out.push_str(" & ");
                r.render_at(2, out);
            }
            QfFormula::Or(l, r) => {
                l.render_at(0, out);
                out.push_str(" | ");
                r.render_at(1, out);
            }
        }
        if parens {
            out.push(')');
        }
    }
}

impl fmt::Display for QfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        self.render_at(0, &mut out);
        write!(f, "{out}")
    }
}

/// Parses a formula over the given signature. Atom symbols must exist in the
/// signature and be binary; both checks happen at parse time.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<QfFormula, Error> {
    let mut parser = Parser {
        chars: text.char_indices().collect(),
        pos: 0,
        sig,
    };
    let formula = parser.parse_or()?;
    parser.skip_ws();
    if parser.pos < parser.chars.len() {
        return Err(parser.error("unexpected trailing input"));
    }
    Ok(formula)
}

struct Parser<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    sig: &'a Signature,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        let position = self
            .chars
            .get(self.pos)
            .map(|(byte, _)| *byte)
            .unwrap_or_else(|| self.chars.last().map(|(b, c)| b + c.len_utf8()).unwrap_or(0));
        Error::Formula {
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

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        Some(c)
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

    fn parse_or(&mut self) -> Result<QfFormula, Error> {
        let mut left = self.parse_and()?;
        while self.peek() == Some('|') {
            self.pos += 1;
            let right = self.parse_and()?;
            left = QfFormula::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn parse_and(&mut self) -> Result<QfFormula, Error> {
        let mut left = self.parse_unary()?;
        while self.peek() == Some('&') {
            self.pos += 1;
            let right = self.parse_unary()?;
            left = QfFormula::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn parse_unary(&mut self) -> Result<QfFormula, Error> {
        match self.peek() {
            Some('!') => {
                self.pos += 1;
                Ok(QfFormula::Not(Box::new(self.parse_unary()?)))
            }
            Some('(') => {
                self.pos += 1;
                let inner = self.parse_or()?;
                self.expect(')')?;
                Ok(inner)
            }
            Some(c) if is_name_char(c) => self.parse_atom(),
            _ => Err(self.error("expected an atom, '!' or '('")),
        }
    }

    fn parse_name(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        while let Some(&(_, c)) = self.chars.get(self.pos) {
            if is_name_char(c) {
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

    fn parse_atom(&mut self) -> Result<QfFormula, Error> {
        let name_start = self.pos;
        let name = self.parse_name().ok_or_else(|| self.error("expected an atom"))?;
        if self.peek() == Some('(') {
            // relation atom NAME(var, var)
            match self.sig.arity_of(&name) {
                Some(2) => {}
                Some(a) => {
                    self.pos = name_start;
                    return Err(self.error(&format!(
                        "symbol {name:?} has arity {a}, formulas admit only binary atoms"
                    )));
                }
                None => {
                    self.pos = name_start;
                    return Err(self.error(&format!("unknown symbol {name:?}")));
                }
            }
            self.expect('(')?;
            let left = self.parse_var()?;
            self.expect(',')?;
            let right = self.parse_var()?;
            self.expect(')')?;
            Ok(QfFormula::Rel {
                symbol: name,
                left,
                right,
            })
        } else if name == "x" || name == "y" {
            let left = if name == "x" { Var::X } else { Var::Y };
            self.expect('=')?;
            let right = self.parse_var()?;
            Ok(QfFormula::Eq(left, right))
        } else {
            self.pos = name_start;
            Err(self.error("expected 'NAME(var,var)' or 'var=var'"))
        }
    }

    fn parse_var(&mut self) -> Result<Var, Error> {
        self.skip_ws();
        let start = self.pos;
        match self.bump() {
            Some('x') => Ok(Var::X),
            Some('y') => Ok(Var::Y),
            _ => {
                self.pos = start;
                Err(self.error("expected variable 'x' or 'y'"))
            }
        }
    }
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '<')
}

/// Expands a structure by the binary relation `{(a,b) : φ(a,b)}` under a
/// fresh symbol name; all old relations are unchanged.
pub fn expand_by_formula(s: &Structure, phi: &QfFormula, name: &str) -> Result<Structure, Error> {
    if !valid_symbol_name(name) {
        return Err(Error::InvalidSymbolName {
            name: name.to_string(),
        });
    }
    let mut tuples = Vec::new();
    for a in 0..s.size() {
        for b in 0..s.size() {
            if phi.evaluate(s, a, b)? {
                tuples.push(vec![a, b]);
            }
        }
    }
    s.expanded(name, 2, tuples)
}

/// True when the named binary relation is a strict linear order on the whole
/// domain: irreflexive, transitive and total.
pub fn is_strict_linear_order(s: &Structure, name: &str) -> Result<bool, Error> {
    match s.sig().arity_of(name) {
        Some(2) => {}
        Some(_) | None => {
            return Err(Error::UnknownSymbol {
                name: name.to_string(),
            })
        }
    }
    let n = s.size();
    for a in 0..n {
        if s.has_tuple(name, &[a, a]) {
            return Ok(false);
        }
    }
    for a in 0..n {
        for b in 0..n {
            if a != b && !s.has_tuple(name, &[a, b]) && !s.has_tuple(name, &[b, a]) {
                return Ok(false);
            }
            for c in 0..n {
                if s.has_tuple(name, &[a, b])
                    && s.has_tuple(name, &[b, c])
                    && !s.has_tuple(name, &[a, c])
                {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn digraph_sig() -> Signature {
        Signature::binary("E").unwrap()
    }

    #[test]
    fn parses_connectives() {
        let f = parse_formula("E(x,y) & !E(y,x)", &digraph_sig()).unwrap();
        assert!(matches!(f, QfFormula::And(_, _)));
        let g = parse_formula("x=y", &digraph_sig()).unwrap();
        assert_eq!(g, QfFormula::Eq(Var::X, Var::Y));
    }

    #[test]
    fn rejects_ternary_atoms() {
        let err = parse_formula("E(x,y,z)", &digraph_sig()).unwrap_err();
        assert!(matches!(err, Error::Formula { .. }));
    }

    #[test]
    fn rejects_unknown_and_nonbinary_symbols() {
        assert!(parse_formula("F(x,y)", &digraph_sig()).is_err());
        let unary = Signature::new([("P", 1)]).unwrap();
        assert!(parse_formula("P(x,x)", &unary).is_err());
    }

    #[test]
    fn positions_point_at_the_problem() {
        match parse_formula("E(x,y) & E(x", &digraph_sig()) {
            Err(Error::Formula { position, .. }) => assert!(position >= 9),
            other => panic!("expected formula error, got {other:?}"),
        }
    }

    #[test]
    fn evaluates_on_chains() {
        let chain = catalog::chain(3);
        let lt = parse_formula("<(x,y)", chain.sig()).unwrap();
        assert!(lt.evaluate(&chain, 0, 2).unwrap());
        assert!(!lt.evaluate(&chain, 2, 0).unwrap());

        let eq = parse_formula("x=y", chain.sig()).unwrap();
        assert!(eq.evaluate(&chain, 1, 1).unwrap());
        assert!(!eq.evaluate(&chain, 0, 1).unwrap());

        // chains are total: incomparability is everywhere false
        let incomparable = parse_formula("!<(x,y) & !<(y,x) & !(x=y)", chain.sig()).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                assert!(!incomparable.evaluate(&chain, a, b).unwrap());
            }
        }

        assert!(lt.evaluate(&chain, 0, 7).is_err());
    }

    #[test]
    fn expansion_adds_the_defined_relation() {
        let chain = catalog::chain(3);
        let lt = parse_formula("<(x,y)", chain.sig()).unwrap();
        let doubled = expand_by_formula(&chain, &lt, "<2").unwrap();
        assert_eq!(
            doubled.tuples("<2").unwrap(),
            doubled.tuples("<").unwrap()
        );
        assert!(is_strict_linear_order(&doubled, "<2").unwrap());

        let eq = parse_formula("x=y", chain.sig()).unwrap();
        let diag = expand_by_formula(&chain, &eq, "D").unwrap();
        assert_eq!(diag.tuples("D").unwrap().len(), 3);

        // name collisions are rejected
        assert!(expand_by_formula(&chain, &lt, "<").is_err());
    }

    #[test]
    fn order_detection() {
        assert!(is_strict_linear_order(&catalog::chain(3), "<").unwrap());
        assert!(!is_strict_linear_order(&catalog::complete_graph(2), "E").unwrap());
        let single = catalog::empty_graph(1);
        assert!(is_strict_linear_order(&single, "E").unwrap()); // vacuously total
        assert!(is_strict_linear_order(&catalog::chain(3), "nope").is_err());
    }

    #[test]
    fn redefining_an_order_of_a_permutation_structure() {
        let perm = catalog::permutation_structure(&[2, 0, 1]).unwrap();
        let phi = parse_formula("a.<(x,y)", perm.sig()).unwrap();
        let expanded = expand_by_formula(&perm, &phi, "c.<").unwrap();
        assert!(is_strict_linear_order(&expanded, "c.<").unwrap());
        assert_eq!(
            expanded.tuples("c.<").unwrap(),
            expanded.tuples("a.<").unwrap()
        );
    }

    #[test]
    fn render_parse_round_trip() {
        let sig = Signature::new([("E", 2), ("a.<", 2)]).unwrap();
        let texts = [
            "E(x,y) & !E(y,x)",
            "a.<(x,y) | E(x,x) & x=y",
            "!(E(x,y) | E(y,x))",
            "!!x=y",
            "E(x,y) & (E(y,x) & E(x,x))",
        ];
        for text in texts {
            let f = parse_formula(text, &sig).unwrap();
            let rendered = f.to_string();
            let back = parse_formula(&rendered, &sig).unwrap();
            assert_eq!(f, back, "round trip failed for {text:?} -> {rendered:?}");
        }
    }
}

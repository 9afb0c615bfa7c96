//! The specification language: formulas, documents, parsing and binding.
//!
//! A document declares target-set imports, embedding predicates and named formulas:
//!
//! ```text
//! targets goals_A = "targets/A.json";
//! pred near_A = dist(l2, goals_A, min) <= 0.409;
//! spec hold = G near_A;
//! ```
//!
//! Operator precedence, loosest first: `U` (right-associative), `|`, `&`, then the prefix
//! operators `!`, `F` and `G`. Comments start with `#`.

mod bind;
mod lexer;
mod parser;

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::embedding::EmbeddingPredicate;

pub use bind::{BindError, BoundSpec};
pub use parser::parse;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Pred(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Eventually(Box<Formula>),
    Always(Box<Formula>),
}

impl Formula {
    pub fn pred(name: impl Into<String>) -> Self {
        Formula::Pred(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Self {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Self {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn until(l: Formula, r: Formula) -> Self {
        Formula::Until(Box::new(l), Box::new(r))
    }

    pub fn eventually(f: Formula) -> Self {
        Formula::Eventually(Box::new(f))
    }

    pub fn always(f: Formula) -> Self {
        Formula::Always(Box::new(f))
    }

    /// Rewrites into the core fragment `{Pred, True, Not, And, Until}`.
    pub fn desugar(&self) -> Formula {
        use Formula::*;
        match self {
            True => True,
            False => Formula::not(True),
            Pred(p) => Pred(p.clone()),
            Not(f) => Formula::not(f.desugar()),
            And(l, r) => Formula::and(l.desugar(), r.desugar()),
            Or(l, r) => Formula::not(Formula::and(
                Formula::not(l.desugar()),
                Formula::not(r.desugar()),
            )),
            Until(l, r) => Formula::until(l.desugar(), r.desugar()),
            Eventually(f) => Formula::until(True, f.desugar()),
            Always(f) => Formula::not(Formula::until(True, Formula::not(f.desugar()))),
        }
    }

    pub fn is_core(&self) -> bool {
        use Formula::*;
        match self {
            True | Pred(_) => true,
            False | Or(..) | Eventually(_) | Always(_) => false,
            Not(f) => f.is_core(),
            And(l, r) | Until(l, r) => l.is_core() && r.is_core(),
        }
    }

    pub fn depth(&self) -> usize {
        use Formula::*;
        match self {
            True | False | Pred(_) => 0,
            Not(f) | Eventually(f) | Always(f) => 1 + f.depth(),
            And(l, r) | Or(l, r) | Until(l, r) => 1 + l.depth().max(r.depth()),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        use Formula::*;
        match self {
            True | False | Pred(_) => 1,
            Not(f) | Eventually(f) | Always(f) => 1 + f.size(),
            And(l, r) | Or(l, r) | Until(l, r) => 1 + l.size() + r.size(),
        }
    }

    /// Predicate names in first-occurrence order, without duplicates.
    pub fn atoms(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a str>) {
        use Formula::*;
        match self {
            True | False => {}
            Pred(p) => {
                if !out.contains(&p.as_str()) {
                    out.push(p);
                }
            }
            Not(f) | Eventually(f) | Always(f) => f.collect_atoms(out),
            And(l, r) | Or(l, r) | Until(l, r) => {
                l.collect_atoms(out);
                r.collect_atoms(out);
            }
        }
    }

    /// Renames every predicate through `f`, e.g. to map embedding predicates onto
    /// ground-truth propositions.
    pub fn map_atoms(&self, f: &mut impl FnMut(&str) -> String) -> Formula {
        use Formula::*;
        match self {
            True => True,
            False => False,
            Pred(p) => Pred(f(p)),
            Not(x) => Formula::not(x.map_atoms(f)),
            Eventually(x) => Formula::eventually(x.map_atoms(f)),
            Always(x) => Formula::always(x.map_atoms(f)),
            And(l, r) => Formula::and(l.map_atoms(f), r.map_atoms(f)),
            Or(l, r) => Formula::or(l.map_atoms(f), r.map_atoms(f)),
            Until(l, r) => Formula::until(l.map_atoms(f), r.map_atoms(f)),
        }
    }

    /// The two subgoal predicates of a sequential pattern `F (a & F b)`.
    pub fn sequential_subgoals(&self) -> Option<(&str, &str)> {
        if let Formula::Eventually(inner) = self {
            if let Formula::And(l, r) = inner.as_ref() {
                if let (Formula::Pred(a), Formula::Eventually(b)) = (l.as_ref(), r.as_ref()) {
                    if let Formula::Pred(b) = b.as_ref() {
                        return Some((a, b));
                    }
                }
            }
        }
        None
    }

    fn precedence(&self) -> u8 {
        use Formula::*;
        match self {
            Until(..) => 1,
            Or(..) => 2,
            And(..) => 3,
            Not(_) | Eventually(_) | Always(_) => 4,
            True | False | Pred(_) => 5,
        }
    }

    fn write_with(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        let wrap = self.precedence() < min_prec;
        if wrap {
            f.write_str("(")?;
        }
        use Formula::*;
        match self {
            True => f.write_str("true")?,
            False => f.write_str("false")?,
            Pred(p) => f.write_str(p)?,
            Not(x) => {
                f.write_str("!")?;
                x.write_with(f, 4)?;
            }
            Eventually(x) => {
                f.write_str("F ")?;
                x.write_with(f, 4)?;
            }
            Always(x) => {
                f.write_str("G ")?;
                x.write_with(f, 4)?;
            }
            // left-associative
            And(l, r) => {
                l.write_with(f, 3)?;
                f.write_str(" & ")?;
                r.write_with(f, 4)?;
            }
            Or(l, r) => {
                l.write_with(f, 2)?;
                f.write_str(" | ")?;
                r.write_with(f, 3)?;
            }
            // right-associative
            Until(l, r) => {
                l.write_with(f, 2)?;
                f.write_str(" U ")?;
                r.write_with(f, 1)?;
            }
        }
        if wrap {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_with(f, 0)
    }
}

/// Source position, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("syntax error at {location}: {message}")]
    Syntax { location: Location, message: String },
    #[error("unknown predicate `{name}` at {location}")]
    UnknownPredicate { name: String, location: Location },
    #[error("unknown target alias `{name}` at {location}")]
    UnknownTargetAlias { name: String, location: Location },
    #[error("duplicate {kind} name `{name}` at {location}")]
    DuplicateName {
        kind: &'static str,
        name: String,
        location: Location,
    },
    #[error("negative threshold {value} for predicate `{name}` at {location}")]
    NegativeEpsilon {
        name: String,
        value: f64,
        location: Location,
    },
}

impl SpecError {
    pub fn location(&self) -> Location {
        match self {
            SpecError::Syntax { location, .. }
            | SpecError::UnknownPredicate { location, .. }
            | SpecError::UnknownTargetAlias { location, .. }
            | SpecError::DuplicateName { location, .. }
            | SpecError::NegativeEpsilon { location, .. } => *location,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetImport {
    pub alias: String,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedSpec {
    pub name: String,
    pub formula: Formula,
}

/// A parsed document. Every name is unique within its namespace and every reference resolves.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpecDocument {
    pub targets: Vec<TargetImport>,
    pub predicates: Vec<EmbeddingPredicate>,
    pub specs: Vec<NamedSpec>,
}

impl SpecDocument {
    pub fn predicate(&self, name: &str) -> Option<&EmbeddingPredicate> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn predicate_mut(&mut self, name: &str) -> Option<&mut EmbeddingPredicate> {
        self.predicates.iter_mut().find(|p| p.name == name)
    }

    pub fn spec(&self, name: &str) -> Option<&Formula> {
        self.specs.iter().find(|s| s.name == name).map(|s| &s.formula)
    }

    pub fn target(&self, alias: &str) -> Option<&TargetImport> {
        self.targets.iter().find(|t| t.alias == alias)
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty() && self.predicates.is_empty() && self.specs.is_empty()
    }
}

/// Canonical source form; parsing it yields the same document.
impl fmt::Display for SpecDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.targets {
            writeln!(f, "targets {} = \"{}\";", t.alias, lexer::escape(&t.path))?;
        }
        for p in &self.predicates {
            writeln!(
                f,
                "pred {} = dist({}, {}, {}) {} {:?};",
                p.name,
                p.distance.keyword(),
                p.target,
                p.aggregation.keyword(),
                p.comparison,
                p.epsilon
            )?;
        }
        for s in &self.specs {
            writeln!(f, "spec {} = {};", s.name, s.formula)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: &str) -> Formula {
        Formula::pred(n)
    }

    #[test]
    fn desugar_examples() {
        assert_eq!(
            Formula::eventually(p("p")).desugar(),
            Formula::until(Formula::True, p("p"))
        );
        assert_eq!(
            Formula::always(p("p")).desugar(),
            Formula::not(Formula::until(Formula::True, Formula::not(p("p"))))
        );
        assert_eq!(p("p").desugar(), p("p"));
        assert_eq!(Formula::False.desugar(), Formula::not(Formula::True));
        assert_eq!(
            Formula::or(p("a"), p("b")).desugar(),
            Formula::not(Formula::and(Formula::not(p("a")), Formula::not(p("b"))))
        );
        assert!(Formula::always(Formula::or(p("a"), Formula::False)).desugar().is_core());
    }

    #[test]
    fn display_minimal_parens() {
        let f = Formula::eventually(Formula::and(p("a"), Formula::eventually(p("b"))));
        assert_eq!(f.to_string(), "F (a & F b)");
        let f = Formula::until(Formula::until(p("a"), p("b")), p("c"));
        assert_eq!(f.to_string(), "(a U b) U c");
        let f = Formula::until(p("a"), Formula::until(p("b"), p("c")));
        assert_eq!(f.to_string(), "a U b U c");
        let f = Formula::and(p("a"), Formula::or(p("b"), p("c")));
        assert_eq!(f.to_string(), "a & (b | c)");
        let f = Formula::not(Formula::not(Formula::True));
        assert_eq!(f.to_string(), "!!true");
    }

    #[test]
    fn subgoals() {
        let f = Formula::eventually(Formula::and(p("a"), Formula::eventually(p("b"))));
        assert_eq!(f.sequential_subgoals(), Some(("a", "b")));
        assert_eq!(Formula::eventually(p("a")).sequential_subgoals(), None);
    }

    #[test]
    fn atoms_dedup() {
        let f = Formula::and(p("b"), Formula::until(p("a"), p("b")));
        assert_eq!(f.atoms(), ["b", "a"]);
        assert_eq!(f.depth(), 2);
        assert_eq!(f.size(), 5);
    }
}

//! Recursive-descent parser for `.etl` documents.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::lexer::{tokenize, Tok, Token};
use super::{Formula, Location, NamedSpec, SpecDocument, SpecError, TargetImport};
use crate::embedding::{Aggregation, Comparison, DistanceFn, EmbeddingPredicate};

const RESERVED: &[&str] = &[
    "targets", "pred", "spec", "dist", "true", "false", "U", "F", "G",
];

/// Parses a document. Names must be declared before they are referenced.
pub fn parse(source: &str) -> Result<SpecDocument, SpecError> {
    let tokens = tokenize(source)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        doc: SpecDocument::default(),
    };
    parser.document()?;
    Ok(parser.doc)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    doc: SpecDocument,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn advance(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if tok.tok != Tok::Eof {
            self.pos += 1;
        }
        tok
    }

    fn error<T>(&self, loc: Location, message: impl Into<String>) -> Result<T, SpecError> {
        Err(SpecError::Syntax {
            location: loc,
            message: message.into(),
        })
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Location, SpecError> {
        let t = self.advance();
        if t.tok == want {
            Ok(t.loc)
        } else {
            self.error(t.loc, format!("expected {what}, found {}", t.tok.describe()))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<Location, SpecError> {
        let t = self.advance();
        match &t.tok {
            Tok::Ident(s) if s == kw => Ok(t.loc),
            other => self.error(t.loc, format!("expected `{kw}`, found {}", other.describe())),
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Location), SpecError> {
        let t = self.advance();
        match t.tok {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => Ok((s, t.loc)),
            Tok::Ident(s) => self.error(t.loc, format!("`{s}` is a reserved word and cannot name {what}")),
            other => self.error(t.loc, format!("expected {what}, found {}", other.describe())),
        }
    }

    fn document(&mut self) -> Result<(), SpecError> {
        loop {
            let t = self.peek().clone();
            match &t.tok {
                Tok::Eof => return Ok(()),
                Tok::Ident(s) if s == "targets" => self.targets_stmt()?,
                Tok::Ident(s) if s == "pred" => self.pred_stmt()?,
                Tok::Ident(s) if s == "spec" => self.spec_stmt()?,
                other => {
                    return self.error(
                        t.loc,
                        format!("expected `targets`, `pred` or `spec`, found {}", other.describe()),
                    )
                }
            }
        }
    }

    fn targets_stmt(&mut self) -> Result<(), SpecError> {
        self.expect_keyword("targets")?;
        let (alias, loc) = self.ident("a target alias")?;
        self.expect(Tok::Eq, "`=`")?;
        let t = self.advance();
        let path = match t.tok {
            Tok::Str(s) => s,
            other => return self.error(t.loc, format!("expected a quoted path, found {}", other.describe())),
        };
        self.expect(Tok::Semi, "`;`")?;
        if self.doc.target(&alias).is_some() {
            return Err(SpecError::DuplicateName {
                kind: "target",
                name: alias,
                location: loc,
            });
        }
        self.doc.targets.push(TargetImport { alias, path });
        Ok(())
    }

    fn pred_stmt(&mut self) -> Result<(), SpecError> {
        self.expect_keyword("pred")?;
        let (name, loc) = self.ident("a predicate")?;
        self.expect(Tok::Eq, "`=`")?;
        self.expect_keyword("dist")?;
        self.expect(Tok::LParen, "`(`")?;
        let t = self.advance();
        let distance = match &t.tok {
            Tok::Ident(s) if s == "l2" => DistanceFn::L2,
            Tok::Ident(s) if s == "cosine" => DistanceFn::Cosine,
            other => return self.error(t.loc, format!("expected `l2` or `cosine`, found {}", other.describe())),
        };
        self.expect(Tok::Comma, "`,`")?;
        let (target, target_loc) = self.ident("a target alias")?;
        self.expect(Tok::Comma, "`,`")?;
        let t = self.advance();
        let aggregation = match &t.tok {
            Tok::Ident(s) if s == "min" => Aggregation::Min,
            Tok::Ident(s) if s == "max" => Aggregation::Max,
            other => return self.error(t.loc, format!("expected `min` or `max`, found {}", other.describe())),
        };
        self.expect(Tok::RParen, "`)`")?;
        let t = self.advance();
        let comparison = match t.tok {
            Tok::Le => Comparison::Le,
            Tok::Lt => Comparison::Lt,
            Tok::Ge => Comparison::Ge,
            Tok::Gt => Comparison::Gt,
            other => {
                return self.error(
                    t.loc,
                    format!("expected a comparison (`<=`, `<`, `>=`, `>`), found {}", other.describe()),
                )
            }
        };
        let t = self.advance();
        let epsilon = match t.tok {
            Tok::Number(n) => n,
            other => return self.error(t.loc, format!("expected a threshold, found {}", other.describe())),
        };
        self.expect(Tok::Semi, "`;`")?;

        if self.doc.target(&target).is_none() {
            return Err(SpecError::UnknownTargetAlias {
                name: target,
                location: target_loc,
            });
        }
        if epsilon < 0.0 {
            return Err(SpecError::NegativeEpsilon {
                name,
                value: epsilon,
                location: t.loc,
            });
        }
        if self.doc.predicate(&name).is_some() {
            return Err(SpecError::DuplicateName {
                kind: "predicate",
                name,
                location: loc,
            });
        }
        self.doc.predicates.push(EmbeddingPredicate {
            name,
            target,
            distance,
            epsilon,
            comparison,
            aggregation,
        });
        Ok(())
    }

    fn spec_stmt(&mut self) -> Result<(), SpecError> {
        self.expect_keyword("spec")?;
        let (name, loc) = self.ident("a specification")?;
        self.expect(Tok::Eq, "`=`")?;
        let formula = self.formula()?;
        self.expect(Tok::Semi, "`;`")?;
        if self.doc.spec(&name).is_some() {
            return Err(SpecError::DuplicateName {
                kind: "spec",
                name,
                location: loc,
            });
        }
        self.doc.specs.push(NamedSpec { name, formula });
        Ok(())
    }

    fn formula(&mut self) -> Result<Formula, SpecError> {
        self.until()
    }

    fn until(&mut self) -> Result<Formula, SpecError> {
        let lhs = self.or()?;
        if self.is_keyword("U") {
            self.advance();
            let rhs = self.until()?;
            return Ok(Formula::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, SpecError> {
        let mut lhs = self.and()?;
        while self.peek().tok == Tok::Pipe {
            self.advance();
            lhs = Formula::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, SpecError> {
        let mut lhs = self.unary()?;
        while self.peek().tok == Tok::Amp {
            self.advance();
            lhs = Formula::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, SpecError> {
        if self.peek().tok == Tok::Bang {
            self.advance();
            return Ok(Formula::not(self.unary()?));
        }
        if self.is_keyword("F") {
            self.advance();
            return Ok(Formula::eventually(self.unary()?));
        }
        if self.is_keyword("G") {
            self.advance();
            return Ok(Formula::always(self.unary()?));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula, SpecError> {
        let t = self.advance();
        match t.tok {
            Tok::LParen => {
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Ident(s) if s == "true" => Ok(Formula::True),
            Tok::Ident(s) if s == "false" => Ok(Formula::False),
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                if self.doc.predicate(&s).is_none() {
                    return Err(SpecError::UnknownPredicate {
                        name: s,
                        location: t.loc,
                    });
                }
                Ok(Formula::Pred(s))
            }
            other => self.error(t.loc, format!("expected a formula, found {}", other.describe())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::Formula as Fm;

    const HEADER: &str = "targets goals_A = \"a.json\";\n\
                          pred a = dist(l2, goals_A, min) <= 0.1;\n\
                          pred b = dist(cosine, goals_A, max) > 0.2;\n\
                          pred c = dist(l2, goals_A, min) < 0.3;\n";

    fn formula(src: &str) -> Fm {
        let doc = parse(&format!("{HEADER}spec s = {src};")).unwrap();
        doc.spec("s").unwrap().clone()
    }

    #[test]
    fn hold_example() {
        let doc = parse(
            "targets goals_A = \"A.json\"; pred near_A = dist(l2, goals_A, min) <= 0.409; spec hold = G near_A;",
        )
        .unwrap();
        assert_eq!(doc.spec("hold"), Some(&Fm::always(Fm::pred("near_A"))));
        let p = doc.predicate("near_A").unwrap();
        assert_eq!(p.epsilon, 0.409);
        assert_eq!(p.comparison, Comparison::Le);
        assert_eq!(p.aggregation, Aggregation::Min);
        assert_eq!(p.distance, DistanceFn::L2);
        assert_eq!(p.target, "goals_A");
    }

    #[test]
    fn constant_formula() {
        let doc = parse("spec t = true;").unwrap();
        assert_eq!(doc.spec("t"), Some(&Fm::True));
    }

    #[test]
    fn sequential_example() {
        assert_eq!(
            formula("F (a & F b)"),
            Fm::eventually(Fm::and(Fm::pred("a"), Fm::eventually(Fm::pred("b"))))
        );
    }

    #[test]
    fn precedence_and_associativity() {
        // U loosest, right-assoc
        assert_eq!(
            formula("a U b U c"),
            Fm::until(Fm::pred("a"), Fm::until(Fm::pred("b"), Fm::pred("c")))
        );
        assert_eq!(
            formula("a | b & c U c"),
            Fm::until(
                Fm::or(Fm::pred("a"), Fm::and(Fm::pred("b"), Fm::pred("c"))),
                Fm::pred("c")
            )
        );
        // & left-assoc, prefix binds tightest
        assert_eq!(
            formula("!a & b & F c"),
            Fm::and(
                Fm::and(Fm::not(Fm::pred("a")), Fm::pred("b")),
                Fm::eventually(Fm::pred("c"))
            )
        );
        assert_eq!(formula("G !F a"), Fm::always(Fm::not(Fm::eventually(Fm::pred("a")))));
        assert_eq!(formula("(a | false)"), Fm::or(Fm::pred("a"), Fm::False));
    }

    #[test]
    fn comments_and_empty() {
        let doc = parse("# nothing here\n   \n# still nothing").unwrap();
        assert!(doc.is_empty());
        let doc = parse(&format!("{HEADER}# c\nspec s = a; # trailing\n")).unwrap();
        assert_eq!(doc.specs.len(), 1);
    }

    #[test]
    fn unknown_predicate_location() {
        let err = parse("spec s =\n  F missing;").unwrap_err();
        assert_eq!(
            err,
            SpecError::UnknownPredicate {
                name: "missing".into(),
                location: Location { line: 2, column: 5 }
            }
        );
    }

    #[test]
    fn unknown_target_alias() {
        let err = parse("pred p = dist(l2, nowhere, min) <= 0.1;").unwrap_err();
        assert!(matches!(err, SpecError::UnknownTargetAlias { ref name, .. } if name == "nowhere"));
    }

    #[test]
    fn duplicates() {
        let err = parse(&format!("{HEADER}pred a = dist(l2, goals_A, min) <= 0.5;")).unwrap_err();
        assert!(matches!(err, SpecError::DuplicateName { kind: "predicate", .. }));
        let err = parse("targets x = \"1\"; targets x = \"2\";").unwrap_err();
        assert!(matches!(err, SpecError::DuplicateName { kind: "target", .. }));
        let err = parse("spec s = true; spec s = false;").unwrap_err();
        assert!(matches!(err, SpecError::DuplicateName { kind: "spec", .. }));
    }

    #[test]
    fn negative_epsilon() {
        let err = parse("targets t = \"t\"; pred p = dist(l2, t, min) <= -0.25;").unwrap_err();
        assert!(matches!(err, SpecError::NegativeEpsilon { value, .. } if value == -0.25));
    }

    #[test]
    fn syntax_errors() {
        for src in [
            "spec s = ;",
            "spec s = true",
            "spec F = true;",
            "pred p = dist(l1, t, min) <= 1;",
            "spec s = (true;",
            "blah",
            "targets t = t;",
        ] {
            assert!(matches!(parse(src), Err(SpecError::Syntax { .. })), "{src}");
        }
    }

    #[test]
    fn canonical_round_trip() {
        let src = format!("{HEADER}spec s = G (a U !b | F c) & (b U c U a);\nspec t = false | true;");
        let doc = parse(&src).unwrap();
        let printed = doc.to_string();
        let again = parse(&printed).unwrap();
        assert_eq!(doc, again);
        assert_eq!(printed, again.to_string());
    }
}

use crate::fuzzy::{Antecedent, FuzzySet, LinguisticVariable, MembershipFunction, MfKind, Rule};

use super::lexer::{tokenize, Pos, Tok, Token};
use super::{DocOption, DslError, DslErrorKind, OptionValue, QueryDocument};

const RESERVED: [&str; 9] = [
    "var", "if", "then", "is", "not", "and", "or", "weight", "set",
];

/// Source positions of a `(variable is set)` reference.
struct AtomRef {
    var: (String, Pos),
    set: (String, Pos),
}

struct RuleRefs {
    atoms: Vec<AtomRef>,
    consequent: AtomRef,
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
    doc: QueryDocument,
    rule_refs: Vec<RuleRefs>,
}

/// Parse a query document, checking every reference and parameter.
pub fn parse(text: &str) -> Result<QueryDocument, DslError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        at: 0,
        doc: QueryDocument::default(),
        rule_refs: Vec::new(),
    };
    p.document()?;
    p.check_references()?;
    Ok(p.doc)
}

fn is_kw(tok: &Tok, kw: &str) -> bool {
    matches!(tok, Tok::Ident(s) if s.eq_ignore_ascii_case(kw))
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.at]
    }

    fn peek_at(&self, offset: usize) -> &Token {
        let i = (self.at + offset).min(self.toks.len() - 1);
        &self.toks[i]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn syntax(&self, expected: &str) -> DslError {
        let t = self.peek();
        DslError::new(
            DslErrorKind::Syntax,
            t.pos,
            format!("expected {expected}, found {}", t.tok.describe()),
        )
    }

    fn expect(&mut self, tok: Tok) -> Result<Pos, DslError> {
        if self.peek().tok == tok {
            Ok(self.bump().pos)
        } else {
            Err(self.syntax(&tok.describe()))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<Pos, DslError> {
        if is_kw(&self.peek().tok, kw) {
            Ok(self.bump().pos)
        } else {
            Err(self.syntax(&format!("`{kw}`")))
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if is_kw(&self.peek().tok, kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), DslError> {
        match &self.peek().tok {
            Tok::Ident(s) if RESERVED.iter().any(|k| s.eq_ignore_ascii_case(k)) => {
                let t = self.peek();
                Err(DslError::new(
                    DslErrorKind::Syntax,
                    t.pos,
                    format!("expected identifier, found keyword `{s}`"),
                ))
            }
            Tok::Ident(s) => {
                let s = s.clone();
                Ok((s, self.bump().pos))
            }
            _ => Err(self.syntax("identifier")),
        }
    }

    fn number(&mut self) -> Result<(f64, Pos), DslError> {
        match self.peek().tok {
            Tok::Number(n) => Ok((n, self.bump().pos)),
            _ => Err(self.syntax("number")),
        }
    }

    fn document(&mut self) -> Result<(), DslError> {
        loop {
            let tok = &self.peek().tok;
            if *tok == Tok::Eof {
                return Ok(());
            } else if is_kw(tok, "var") {
                self.var_decl()?;
            } else if is_kw(tok, "if") {
                self.rule()?;
            } else if is_kw(tok, "set") {
                self.option()?;
            } else {
                return Err(self.syntax("`var`, `IF` or `set`"));
            }
        }
    }

    fn var_decl(&mut self) -> Result<(), DslError> {
        self.expect_kw("var")?;
        let (name, name_pos) = self.ident()?;
        if self.doc.variables.iter().any(|v| v.name == name) {
            return Err(DslError::new(
                DslErrorKind::DuplicateVariable,
                name_pos,
                format!("variable `{name}` is already declared"),
            ));
        }
        self.expect(Tok::LBracket)?;
        let (lo, lo_pos) = self.number()?;
        self.expect(Tok::Comma)?;
        let (hi, _) = self.number()?;
        self.expect(Tok::RBracket)?;
        if lo >= hi {
            return Err(DslError::new(
                DslErrorKind::InvalidParameter,
                lo_pos,
                format!("domain [{lo}, {hi}] of `{name}` is empty"),
            ));
        }
        self.expect(Tok::LBrace)?;
        let mut sets: Vec<FuzzySet> = Vec::new();
        loop {
            if self.peek().tok == Tok::RBrace && !sets.is_empty() {
                self.bump();
                break;
            }
            let (set_name, pos) = self.ident().map_err(|e| {
                if sets.is_empty() {
                    self.syntax("a set declaration")
                } else {
                    e
                }
            })?;
            if sets.iter().any(|s| s.name == set_name) {
                return Err(DslError::new(
                    DslErrorKind::DuplicateSet,
                    pos,
                    format!("set `{set_name}` is already declared in `{name}`"),
                ));
            }
            self.expect(Tok::Colon)?;
            let mf = self.membership()?;
            sets.push(FuzzySet::new(set_name, mf));
        }
        self.doc
            .variables
            .push(LinguisticVariable { name, lo, hi, sets });
        Ok(())
    }

    fn membership(&mut self) -> Result<MembershipFunction, DslError> {
        let kind_pos = self.peek().pos;
        let kind = match &self.peek().tok {
            Tok::Ident(word) => MfKind::from_keyword(word).ok_or_else(|| {
                DslError::new(
                    DslErrorKind::Syntax,
                    kind_pos,
                    format!("unknown membership function `{word}` (expected tri, trap, gauss, zmf or smf)"),
                )
            })?,
            _ => return Err(self.syntax("membership function kind")),
        };
        self.bump();
        self.expect(Tok::LParen)?;
        let mut params = vec![self.number()?.0];
        while self.peek().tok == Tok::Comma {
            self.bump();
            params.push(self.number()?.0);
        }
        self.expect(Tok::RParen)?;
        if params.len() != kind.arity() {
            return Err(DslError::new(
                DslErrorKind::ArityMismatch,
                kind_pos,
                format!(
                    "{kind} takes {} parameters, got {}",
                    kind.arity(),
                    params.len()
                ),
            ));
        }
        MembershipFunction::new(kind, &params)
            .map_err(|e| DslError::new(DslErrorKind::InvalidParameter, kind_pos, e.to_string()))
    }

    fn rule(&mut self) -> Result<(), DslError> {
        self.expect_kw("if")?;
        let mut atoms = Vec::new();
        let antecedent = self.expr(&mut atoms)?;
        self.expect(Tok::Comma)?;
        self.expect_kw("then")?;
        self.expect(Tok::LParen)?;
        let var = self.ident()?;
        self.expect_kw("is")?;
        let set = self.ident()?;
        self.expect(Tok::RParen)?;
        let mut rule = Rule::new(antecedent, var.0.clone(), set.0.clone());
        if is_kw(&self.peek().tok, "weight") {
            self.bump();
            let (w, pos) = self.number()?;
            if !(w > 0.0 && w <= 1.0) {
                return Err(DslError::new(
                    DslErrorKind::InvalidParameter,
                    pos,
                    format!("rule weight {w} is outside (0, 1]"),
                ));
            }
            rule.weight = w;
        }
        self.doc.rules.push(rule);
        self.rule_refs.push(RuleRefs {
            atoms,
            consequent: AtomRef { var, set },
        });
        Ok(())
    }

    fn expr(&mut self, atoms: &mut Vec<AtomRef>) -> Result<Antecedent, DslError> {
        let mut lhs = self.and_expr(atoms)?;
        while self.eat_kw("or") {
            let rhs = self.and_expr(atoms)?;
            lhs = lhs.or(rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self, atoms: &mut Vec<AtomRef>) -> Result<Antecedent, DslError> {
        let mut lhs = self.term(atoms)?;
        while self.eat_kw("and") {
            let rhs = self.term(atoms)?;
            lhs = lhs.and(rhs);
        }
        Ok(lhs)
    }

    fn term(&mut self, atoms: &mut Vec<AtomRef>) -> Result<Antecedent, DslError> {
        self.expect(Tok::LParen)?;
        if self.peek().tok == Tok::LParen {
            let inner = self.expr(atoms)?;
            self.expect(Tok::RParen)?;
            return Ok(inner);
        }
        // `(var is [not] set)`; give a clearer message for the prose form
        // `(a or b is c)`.
        if matches!(self.peek().tok, Tok::Ident(_))
            && (is_kw(&self.peek_at(1).tok, "or") || is_kw(&self.peek_at(1).tok, "and"))
        {
            let t = self.peek_at(1);
            return Err(DslError::new(
                DslErrorKind::Syntax,
                t.pos,
                "expected `is`; write one `(variable is set)` atom per variable",
            ));
        }
        let var = self.ident()?;
        self.expect_kw("is")?;
        let negated = self.eat_kw("not");
        let set = self.ident()?;
        self.expect(Tok::RParen)?;
        let atom = Antecedent::Is {
            variable: var.0.clone(),
            set: set.0.clone(),
            negated,
        };
        atoms.push(AtomRef { var, set });
        Ok(atom)
    }

    fn option(&mut self) -> Result<(), DslError> {
        self.expect_kw("set")?;
        let (name, name_pos) = self.ident()?;
        self.expect(Tok::Equals)?;
        let value_pos = self.peek().pos;
        let value = match self.peek().tok.clone() {
            Tok::Number(n) => {
                self.bump();
                OptionValue::Number(n)
            }
            Tok::Ident(s) => {
                self.bump();
                OptionValue::Ident(s)
            }
            _ => return Err(self.syntax("number or identifier")),
        };
        check_option(&name, &value, name_pos, value_pos)?;
        self.doc.options.push(DocOption { name, value });
        Ok(())
    }

    fn check_references(&self) -> Result<(), DslError> {
        let mut output: Option<&str> = None;
        for (rule, refs) in self.doc.rules.iter().zip(&self.rule_refs) {
            for atom in &refs.atoms {
                self.resolve(atom)?;
            }
            self.resolve(&refs.consequent)?;
            let out = rule.consequent.0.as_str();
            match output {
                None => output = Some(out),
                Some(o) if o != out => {
                    return Err(DslError::new(
                        DslErrorKind::OutputConflict,
                        refs.consequent.var.1,
                        format!("consequent names `{out}` but the output is `{o}`"),
                    ));
                }
                _ => {}
            }
        }
        if let Some(out) = output {
            for refs in &self.rule_refs {
                if let Some(a) = refs.atoms.iter().find(|a| a.var.0 == out) {
                    return Err(DslError::new(
                        DslErrorKind::OutputConflict,
                        a.var.1,
                        format!("output variable `{out}` cannot appear in an antecedent"),
                    ));
                }
            }
        }
        Ok(())
    }

    fn resolve(&self, atom: &AtomRef) -> Result<(), DslError> {
        let (var, var_pos) = &atom.var;
        let (set, set_pos) = &atom.set;
        let decl = self
            .doc
            .variables
            .iter()
            .find(|v| v.name == *var)
            .ok_or_else(|| {
                DslError::new(
                    DslErrorKind::UndeclaredVariable,
                    *var_pos,
                    format!("variable `{var}` is not declared"),
                )
            })?;
        if decl.set(set).is_none() {
            return Err(DslError::new(
                DslErrorKind::UndeclaredSet,
                *set_pos,
                format!("variable `{var}` has no set `{set}`"),
            ));
        }
        Ok(())
    }
}

fn check_option(
    name: &str,
    value: &OptionValue,
    name_pos: Pos,
    value_pos: Pos,
) -> Result<(), DslError> {
    let fixed = |expected: &str| match value {
        OptionValue::Ident(s) if s.eq_ignore_ascii_case(expected) => Ok(()),
        _ => Err(DslError::new(
            DslErrorKind::InvalidOption,
            value_pos,
            format!("option `{name}` only supports `{expected}`, got `{value}`"),
        )),
    };
    match name.to_ascii_lowercase().as_str() {
        "resolution" => match value {
            OptionValue::Number(n) if *n >= 2.0 && n.fract() == 0.0 && *n <= 1e7 => Ok(()),
            _ => Err(DslError::new(
                DslErrorKind::InvalidOption,
                value_pos,
                format!("resolution must be an integer in [2, 1e7], got `{value}`"),
            )),
        },
        "and_op" | "implication" => fixed("min"),
        "or_op" | "aggregation" => fixed("max"),
        "not_op" => fixed("complement"),
        "defuzzification" => fixed("centroid"),
        _ => Err(DslError::new(
            DslErrorKind::InvalidOption,
            name_pos,
            format!("unknown option `{name}`"),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "var average [-3, 3] {\n  negative: zmf(-2, 0)\n  zero: gauss(0, 0.5)\n  positive: smf(0, 2)\n}\nvar score [0, 1] {\n  low: tri(0, 0, 0.5)\n  high: tri(0.5, 1, 1)\n}\n";

    fn doc(rules: &str) -> QueryDocument {
        parse(&format!("{HEADER}{rules}")).unwrap()
    }

    fn err(rules: &str) -> DslError {
        parse(&format!("{HEADER}{rules}")).unwrap_err()
    }

    #[test]
    fn single_atom_rule() {
        let d = doc("IF (average is zero), THEN (score is low)");
        assert_eq!(d.rules.len(), 1);
        assert_eq!(d.rules[0].antecedent, Antecedent::is("average", "zero"));
        assert_eq!(d.rules[0].consequent, ("score".into(), "low".into()));
        assert_eq!(d.rules[0].weight, 1.0);
    }

    #[test]
    fn negated_atom() {
        let d = doc("IF (average is not zero), THEN (score is high)");
        assert_eq!(d.rules[0].antecedent, Antecedent::is_not("average", "zero"));
    }

    #[test]
    fn and_binds_tighter() {
        let d = doc(
            "IF (average is zero) and (average is negative) or (average is positive), THEN (score is high)",
        );
        let expected = Antecedent::is("average", "zero")
            .and(Antecedent::is("average", "negative"))
            .or(Antecedent::is("average", "positive"));
        assert_eq!(d.rules[0].antecedent, expected);
    }

    #[test]
    fn parentheses_group() {
        let d = doc(
            "IF (average is zero) and ((average is negative) or (average is positive)), THEN (score is high)",
        );
        let expected = Antecedent::is("average", "zero")
            .and(Antecedent::is("average", "negative").or(Antecedent::is("average", "positive")));
        assert_eq!(d.rules[0].antecedent, expected);
    }

    #[test]
    fn keywords_ignore_case() {
        let d = parse(&format!(
            "{}\nif (average IS NOT zero), Then (score Is high) WEIGHT 0.5\nSET Resolution = 501",
            HEADER.replace("var ", "VAR ")
        ))
        .unwrap();
        assert_eq!(d.rules[0].weight, 0.5);
        assert_eq!(d.resolution(), 501);
    }

    #[test]
    fn identifiers_are_case_sensitive() {
        let e = err("IF (Average is zero), THEN (score is low)");
        assert_eq!(e.kind, DslErrorKind::UndeclaredVariable);
    }

    #[test]
    fn rules_may_precede_declarations() {
        let text = format!("IF (average is zero), THEN (score is low)\n{HEADER}");
        assert_eq!(parse(&text).unwrap().rules.len(), 1);
    }

    #[test]
    fn error_categories() {
        assert_eq!(
            err("IF (foo is zero), THEN (score is low)").kind,
            DslErrorKind::UndeclaredVariable
        );
        assert_eq!(
            err("IF (average is big), THEN (score is low)").kind,
            DslErrorKind::UndeclaredSet
        );
        assert_eq!(
            err("IF (average is zero) THEN (score is low)").kind,
            DslErrorKind::Syntax
        );
        assert_eq!(
            err("var x [0, 1] { a: tri(0, 1) }").kind,
            DslErrorKind::ArityMismatch
        );
        assert_eq!(
            err("var x [0, 1] { a: tri(0, 0.5, 1) a: smf(0, 1) }").kind,
            DslErrorKind::DuplicateSet
        );
        assert_eq!(
            err("var average [0, 1] { a: smf(0, 1) }").kind,
            DslErrorKind::DuplicateVariable
        );
        assert_eq!(
            err("var x [1, 0] { a: smf(0, 1) }").kind,
            DslErrorKind::InvalidParameter
        );
        assert_eq!(err("set resolution = 1").kind, DslErrorKind::InvalidOption);
        assert_eq!(
            err("set implication = prod").kind,
            DslErrorKind::InvalidOption
        );
        assert_eq!(
            err("IF (average is zero), THEN (score is low)\nIF (average is zero), THEN (average is zero)").kind,
            DslErrorKind::OutputConflict
        );
    }

    #[test]
    fn error_positions() {
        let e = err("IF (average is zero), THEN (score is lo)");
        // HEADER spans nine lines
        assert_eq!((e.line, e.column), (10, 38));
        let e = parse("var x [0, 1] {\n   a: bell(1, 2)\n}").unwrap_err();
        assert_eq!((e.kind, e.line, e.column), (DslErrorKind::Syntax, 2, 7));
    }

    #[test]
    fn prose_shorthand_is_rejected_with_hint() {
        let e = err("IF (average or slope is zero), THEN (score is low)");
        assert_eq!(e.kind, DslErrorKind::Syntax);
        assert!(e.message.contains("one `(variable is set)` atom"));
    }

    #[test]
    fn empty_document() {
        assert_eq!(parse("").unwrap(), QueryDocument::default());
        assert_eq!(
            parse("  # only a comment\n").unwrap(),
            QueryDocument::default()
        );
    }
}

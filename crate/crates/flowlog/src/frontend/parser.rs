//! Hand-rolled lexer and recursive-descent parser for the rule language,
//! plus the validation passes that make a [`Program`] safe to plan: arity
//! and declaration checks, range restriction, negation/constraint safety,
//! and aggregate placement rules.

use std::collections::BTreeMap;
use std::fmt;

use super::ast::{
    AggExpr, AggregateFunc, AggregateSpec, Atom, CmpOp, Constraint, Program, RelationInfo,
    RelationKind, Rule, Term,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    Syntax { line: usize, col: usize, message: String },
    ArityMismatch { relation: String, expected: usize, found: usize, line: usize },
    UndeclaredRelation { relation: String, line: usize },
    DuplicateDeclaration { relation: String, line: usize },
    /// `.input` names a relation that is also a rule head.
    InputOnDerived { relation: String },
    /// Aggregate rules mixed with plain rules, or disagreeing functions.
    MixedAggregate { relation: String, message: String },
    UnsafeRule { rule: usize, message: String },
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Syntax { line, col, message } => {
                write!(f, "syntax error at {line}:{col}: {message}")
            }
            ParseError::ArityMismatch { relation, expected, found, line } => write!(
                f,
                "arity mismatch at line {line}: {relation} declared with {expected} columns, used with {found}"
            ),
            ParseError::UndeclaredRelation { relation, line } => {
                write!(f, "undeclared relation {relation} at line {line}")
            }
            ParseError::DuplicateDeclaration { relation, line } => {
                write!(f, "duplicate declaration of {relation} at line {line}")
            }
            ParseError::InputOnDerived { relation } => {
                write!(f, ".input {relation}: relation is derived by a rule and cannot be a base input")
            }
            ParseError::MixedAggregate { relation, message } => {
                write!(f, "aggregate conflict on {relation}: {message}")
            }
            ParseError::UnsafeRule { rule, message } => {
                write!(f, "unsafe rule {rule}: {message}")
            }
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Dot,
    Comma,
    LParen,
    RParen,
    Colon,
    ColonDash,
    Bang,
    Plus,
    Underscore,
    Cmp(CmpOp),
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Dot => "`.`".into(),
            Tok::Comma => "`,`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Colon => "`:`".into(),
            Tok::ColonDash => "`:-`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Underscore => "`_`".into(),
            Tok::Cmp(op) => format!("`{}`", op.symbol()),
        }
    }
}

struct Lexed {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Lexed>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;

    macro_rules! push {
        ($tok:expr, $line:expr, $col:expr, $len:expr) => {{
            out.push(Lexed { tok: $tok, line: $line, col: $col });
            i += $len;
            col += $len;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let next = chars.get(i + 1).copied();
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '/' if next == Some('/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '/' if next == Some('*') => {
                let (sl, sc) = (line, col);
                i += 2;
                col += 2;
                loop {
                    match (chars.get(i), chars.get(i + 1)) {
                        (Some('*'), Some('/')) => {
                            i += 2;
                            col += 2;
                            break;
                        }
                        (Some('\n'), _) => {
                            i += 1;
                            line += 1;
                            col = 1;
                        }
                        (Some(_), _) => {
                            i += 1;
                            col += 1;
                        }
                        (None, _) => {
                            return Err(ParseError::Syntax {
                                line: sl,
                                col: sc,
                                message: "unterminated block comment".into(),
                            })
                        }
                    }
                }
            }
            '.' => push!(Tok::Dot, line, col, 1),
            ',' => push!(Tok::Comma, line, col, 1),
            '(' => push!(Tok::LParen, line, col, 1),
            ')' => push!(Tok::RParen, line, col, 1),
            '+' => push!(Tok::Plus, line, col, 1),
            ':' if next == Some('-') => push!(Tok::ColonDash, line, col, 2),
            ':' => push!(Tok::Colon, line, col, 1),
            '!' if next == Some('=') => push!(Tok::Cmp(CmpOp::Ne), line, col, 2),
            '!' => push!(Tok::Bang, line, col, 1),
            '=' => push!(Tok::Cmp(CmpOp::Eq), line, col, 1),
            '<' if next == Some('=') => push!(Tok::Cmp(CmpOp::Le), line, col, 2),
            '<' => push!(Tok::Cmp(CmpOp::Lt), line, col, 1),
            '>' if next == Some('=') => push!(Tok::Cmp(CmpOp::Ge), line, col, 2),
            '>' => push!(Tok::Cmp(CmpOp::Gt), line, col, 1),
            '_' if !next.map_or(false, |n| n.is_alphanumeric() || n == '_') => {
                push!(Tok::Underscore, line, col, 1)
            }
            c if c.is_ascii_digit() || (c == '-' && next.map_or(false, |n| n.is_ascii_digit())) => {
                let start = i;
                let (sl, sc) = (line, col);
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                col += i - start;
                let value = text.parse::<i64>().map_err(|_| ParseError::Syntax {
                    line: sl,
                    col: sc,
                    message: format!("integer literal `{text}` out of range"),
                })?;
                out.push(Lexed { tok: Tok::Int(value), line: sl, col: sc });
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                let (sl, sc) = (line, col);
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                col += i - start;
                out.push(Lexed { tok: Tok::Ident(text), line: sl, col: sc });
            }
            other => {
                return Err(ParseError::Syntax {
                    line,
                    col,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Lexed>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|l| &l.tok)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|l| &l.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map_or((1, 1), |l| (l.line, l.col))
    }

    fn line(&self) -> usize {
        self.here().0
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError::Syntax { line, col, message: message.into() }
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|l| l.tok.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: &Tok) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(self.err(format!("expected {}, found {}", want.describe(), t.describe()))),
            None => Err(self.err(format!("expected {}, found end of input", want.describe()))),
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(_)) => match self.bump() {
                Some(Tok::Ident(s)) => Ok(s),
                _ => unreachable!(),
            },
            Some(t) => Err(self.err(format!("expected {what}, found {}", t.describe()))),
            None => Err(self.err(format!("expected {what}, found end of input"))),
        }
    }
}

/// Raw statements before validation.
enum Statement {
    Decl { name: String, params: Vec<String>, line: usize },
    Input { name: String, line: usize },
    Output { name: String, line: usize },
    Rule(Rule, usize),
}

fn parse_statements(p: &mut Parser) -> Result<Vec<Statement>, ParseError> {
    let mut out = Vec::new();
    let mut next_rule_id = 0;
    while p.peek().is_some() {
        if p.peek() == Some(&Tok::Dot) {
            let line = p.line();
            p.bump();
            let kw = p.expect_ident("directive (decl, input, output)")?;
            match kw.as_str() {
                "decl" => {
                    let name = p.expect_ident("relation name")?;
                    p.expect(&Tok::LParen)?;
                    let mut params = Vec::new();
                    if p.peek() != Some(&Tok::RParen) {
                        loop {
                            let pname = p.expect_ident("parameter name")?;
                            p.expect(&Tok::Colon)?;
                            p.expect_ident("type name")?;
                            params.push(pname);
                            if p.peek() == Some(&Tok::Comma) {
                                p.bump();
                            } else {
                                break;
                            }
                        }
                    }
                    p.expect(&Tok::RParen)?;
                    out.push(Statement::Decl { name, params, line });
                }
                "input" => {
                    let name = p.expect_ident("relation name")?;
                    out.push(Statement::Input { name, line });
                }
                "output" => {
                    let name = p.expect_ident("relation name")?;
                    out.push(Statement::Output { name, line });
                }
                other => return Err(p.err(format!("unknown directive `.{other}`"))),
            }
        } else {
            let line = p.line();
            let rule = parse_rule(p, next_rule_id)?;
            next_rule_id += 1;
            out.push(Statement::Rule(rule, line));
        }
    }
    Ok(out)
}

fn parse_rule(p: &mut Parser, id: usize) -> Result<Rule, ParseError> {
    let relation = p.expect_ident("rule head")?;
    p.expect(&Tok::LParen)?;
    let mut head_terms = Vec::new();
    let mut aggregate = None;
    if p.peek() != Some(&Tok::RParen) {
        loop {
            if aggregate.is_some() {
                return Err(p.err("aggregate must be the last head column"));
            }
            match (p.peek(), p.peek2()) {
                (Some(Tok::Ident(name)), Some(Tok::LParen))
                    if matches!(name.as_str(), "MIN" | "MAX" | "COUNT" | "SUM") =>
                {
                    let func = match name.as_str() {
                        "MIN" => AggregateFunc::Min,
                        "MAX" => AggregateFunc::Max,
                        "COUNT" => AggregateFunc::Count,
                        _ => AggregateFunc::Sum,
                    };
                    p.bump();
                    p.bump();
                    let over = parse_agg_expr(p)?;
                    p.expect(&Tok::RParen)?;
                    aggregate = Some(AggregateSpec { func, over });
                }
                (Some(Tok::Underscore), _) => {
                    return Err(p.err("placeholder `_` not allowed in a rule head"))
                }
                _ => head_terms.push(parse_term(p)?),
            }
            if p.peek() == Some(&Tok::Comma) {
                p.bump();
            } else {
                break;
            }
        }
    }
    p.expect(&Tok::RParen)?;
    p.expect(&Tok::ColonDash)?;

    let mut body = Vec::new();
    let mut constraints = Vec::new();
    loop {
        match p.peek() {
            Some(Tok::Bang) => {
                p.bump();
                let mut atom = parse_atom(p)?;
                atom.negated = true;
                body.push(atom);
            }
            Some(Tok::Ident(_)) if p.peek2() == Some(&Tok::LParen) => {
                body.push(parse_atom(p)?);
            }
            Some(Tok::Ident(_)) | Some(Tok::Int(_)) => {
                let left = parse_term(p)?;
                let op = match p.bump() {
                    Some(Tok::Cmp(op)) => op,
                    Some(t) => {
                        p.pos -= 1;
                        return Err(p.err(format!("expected comparison operator, found {}", t.describe())));
                    }
                    None => return Err(p.err("expected comparison operator, found end of input")),
                };
                let right = parse_term(p)?;
                constraints.push(Constraint { left, op, right });
            }
            Some(t) => {
                let t = t.describe();
                return Err(p.err(format!("expected body atom or constraint, found {t}")));
            }
            None => return Err(p.err("expected body atom or constraint, found end of input")),
        }
        match p.peek() {
            Some(Tok::Comma) => {
                p.bump();
            }
            Some(Tok::Dot) => {
                p.bump();
                break;
            }
            Some(t) => {
                let t = t.describe();
                return Err(p.err(format!("expected `,` or `.`, found {t}")));
            }
            None => return Err(p.err("expected `,` or `.`, found end of input")),
        }
    }

    Ok(Rule {
        id,
        head: Atom::positive(relation, head_terms),
        aggregate,
        body,
        constraints,
    })
}

fn parse_atom(p: &mut Parser) -> Result<Atom, ParseError> {
    let relation = p.expect_ident("relation name")?;
    p.expect(&Tok::LParen)?;
    let mut terms = Vec::new();
    if p.peek() != Some(&Tok::RParen) {
        loop {
            terms.push(parse_body_term(p)?);
            if p.peek() == Some(&Tok::Comma) {
                p.bump();
            } else {
                break;
            }
        }
    }
    p.expect(&Tok::RParen)?;
    Ok(Atom::positive(relation, terms))
}

fn parse_term(p: &mut Parser) -> Result<Term, ParseError> {
    match p.peek() {
        Some(Tok::Ident(_)) => match p.bump() {
            Some(Tok::Ident(s)) => Ok(Term::Variable(s)),
            _ => unreachable!(),
        },
        Some(Tok::Int(_)) => match p.bump() {
            Some(Tok::Int(n)) => Ok(Term::Constant(n)),
            _ => unreachable!(),
        },
        Some(t) => {
            let t = t.describe();
            Err(p.err(format!("expected variable or constant, found {t}")))
        }
        None => Err(p.err("expected variable or constant, found end of input")),
    }
}

fn parse_body_term(p: &mut Parser) -> Result<Term, ParseError> {
    if p.peek() == Some(&Tok::Underscore) {
        p.bump();
        return Ok(Term::Placeholder);
    }
    parse_term(p)
}

fn parse_agg_expr(p: &mut Parser) -> Result<AggExpr, ParseError> {
    let first = parse_term(p)?;
    if p.peek() != Some(&Tok::Plus) {
        return match first {
            Term::Variable(v) => Ok(AggExpr::Var(v)),
            Term::Constant(c) => Ok(AggExpr::Const(c)),
            _ => Err(p.err("aggregate argument must be a variable or constant")),
        };
    }
    p.bump();
    let second = parse_term(p)?;
    match (first, second) {
        (Term::Variable(a), Term::Variable(b)) => Ok(AggExpr::AddVar(a, b)),
        (Term::Variable(a), Term::Constant(c)) | (Term::Constant(c), Term::Variable(a)) => {
            Ok(AggExpr::AddConst(a, c))
        }
        _ => Err(p.err("aggregate argument must involve a variable")),
    }
}

/// Parse and validate a whole program.
pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    let toks = lex(src)?;
    let mut parser = Parser { toks, pos: 0 };
    let statements = parse_statements(&mut parser)?;

    let mut relations: BTreeMap<String, RelationInfo> = BTreeMap::new();
    let mut rules = Vec::new();
    let mut inputs: Vec<(String, usize)> = Vec::new();
    let mut outputs: Vec<(String, usize)> = Vec::new();

    for s in &statements {
        if let Statement::Decl { name, params, line } = s {
            if relations.contains_key(name) {
                return Err(ParseError::DuplicateDeclaration { relation: name.clone(), line: *line });
            }
            relations.insert(
                name.clone(),
                RelationInfo {
                    arity: params.len(),
                    kind: RelationKind::Edb,
                    params: params.clone(),
                    is_input: false,
                    aggregate: None,
                },
            );
        }
    }

    for s in statements {
        match s {
            Statement::Decl { .. } => {}
            Statement::Input { name, line } => {
                if !relations.contains_key(&name) {
                    return Err(ParseError::UndeclaredRelation { relation: name, line });
                }
                inputs.push((name, line));
            }
            Statement::Output { name, line } => {
                if !relations.contains_key(&name) {
                    return Err(ParseError::UndeclaredRelation { relation: name, line });
                }
                outputs.push((name, line));
            }
            Statement::Rule(rule, line) => {
                check_rule_relations(&rule, &relations, line)?;
                rules.push(rule);
            }
        }
    }

    for rule in &rules {
        let info = relations.get_mut(&rule.head.relation).expect("head checked");
        info.kind = RelationKind::Idb;
    }
    for (name, _) in &inputs {
        let info = &relations[name];
        if info.kind == RelationKind::Idb {
            return Err(ParseError::InputOnDerived { relation: name.clone() });
        }
    }
    for (name, _) in &inputs {
        relations.get_mut(name).expect("checked").is_input = true;
    }

    resolve_aggregates(&rules, &mut relations)?;
    for rule in &rules {
        check_rule_safety(rule)?;
    }

    let mut input_names: Vec<String> = inputs.into_iter().map(|(n, _)| n).collect();
    input_names.sort();
    input_names.dedup();
    let mut output_names: Vec<String> = outputs.into_iter().map(|(n, _)| n).collect();
    output_names.sort();
    output_names.dedup();

    Ok(Program { relations, rules, inputs: input_names, outputs: output_names })
}

fn check_rule_relations(
    rule: &Rule,
    relations: &BTreeMap<String, RelationInfo>,
    line: usize,
) -> Result<(), ParseError> {
    let head_info = relations
        .get(&rule.head.relation)
        .ok_or_else(|| ParseError::UndeclaredRelation { relation: rule.head.relation.clone(), line })?;
    if head_info.arity != rule.head_arity() {
        return Err(ParseError::ArityMismatch {
            relation: rule.head.relation.clone(),
            expected: head_info.arity,
            found: rule.head_arity(),
            line,
        });
    }
    for atom in &rule.body {
        let info = relations
            .get(&atom.relation)
            .ok_or_else(|| ParseError::UndeclaredRelation { relation: atom.relation.clone(), line })?;
        if info.arity != atom.terms.len() {
            return Err(ParseError::ArityMismatch {
                relation: atom.relation.clone(),
                expected: info.arity,
                found: atom.terms.len(),
                line,
            });
        }
    }
    Ok(())
}

fn resolve_aggregates(
    rules: &[Rule],
    relations: &mut BTreeMap<String, RelationInfo>,
) -> Result<(), ParseError> {
    for rule in rules {
        let name = &rule.head.relation;
        let others: Vec<&Rule> = rules.iter().filter(|r| &r.head.relation == name).collect();
        match &rule.aggregate {
            Some(spec) => {
                for other in &others {
                    match &other.aggregate {
                        None => {
                            return Err(ParseError::MixedAggregate {
                                relation: name.clone(),
                                message: "aggregate and plain rules define the same relation".into(),
                            })
                        }
                        Some(o) if o.func != spec.func => {
                            return Err(ParseError::MixedAggregate {
                                relation: name.clone(),
                                message: format!(
                                    "rules disagree on aggregate function ({} vs {})",
                                    spec.func.name(),
                                    o.func.name()
                                ),
                            })
                        }
                        Some(_) => {}
                    }
                }
                if !spec.func.is_lattice() && others.len() > 1 {
                    return Err(ParseError::MixedAggregate {
                        relation: name.clone(),
                        message: format!("{} relations must be defined by a single rule", spec.func.name()),
                    });
                }
                relations.get_mut(name).expect("declared").aggregate = Some(spec.func);
            }
            None => {}
        }
    }
    Ok(())
}

fn check_rule_safety(rule: &Rule) -> Result<(), ParseError> {
    let unsafe_err = |message: String| ParseError::UnsafeRule { rule: rule.id, message };

    if rule.positive_atoms().next().is_none() {
        return Err(unsafe_err("rule needs at least one positive body atom".into()));
    }

    let positive: Vec<String> = rule.positive_var_order();
    let bound = |v: &str| positive.iter().any(|p| p == v);

    for t in &rule.head.terms {
        if let Term::Variable(v) = t {
            if !bound(v) {
                return Err(unsafe_err(format!("head variable {v} not bound by a positive body atom")));
            }
        }
    }
    if let Some(spec) = &rule.aggregate {
        for v in spec.over.variables() {
            if !bound(v) {
                return Err(unsafe_err(format!(
                    "aggregate variable {v} not bound by a positive body atom"
                )));
            }
        }
    }
    for (_, atom) in rule.negated_atoms() {
        for v in atom.variables() {
            if !bound(&v) {
                return Err(unsafe_err(format!(
                    "variable {v} in negated atom {atom} not bound by a positive body atom"
                )));
            }
        }
    }
    for c in &rule.constraints {
        let vars = c.variables();
        if vars.is_empty() {
            return Err(unsafe_err(format!("constraint {c} binds no variable")));
        }
        for v in vars {
            if !bound(v) {
                return Err(unsafe_err(format!(
                    "variable {v} in constraint {c} not bound by a positive body atom"
                )));
            }
        }
    }
    Ok(())
}
